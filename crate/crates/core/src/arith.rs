//! Prime tables, primality, and per-segment factorization data.
//!
//! Everything downstream (the pair sieve, the π_𝒩 sweeps, the Euler
//! products) reads primes from a [`PrimeTable`] and odd-prime-factor counts
//! from a [`FactorizationSegment`].

use crate::error::{ensure, Result};

/// Largest limit accepted by [`primes_up_to`] unless a different guard is
/// passed to [`primes_up_to_with_guard`].
pub const DEFAULT_PRIME_GUARD: u64 = 1 << 40;

/// Largest `hi - lo` accepted by [`factorize_segment`].
pub const MAX_SEGMENT_LEN: u64 = 1 << 30;

/// Entries processed per cache block inside [`factorize_segment`].
const BLOCK: u64 = 1 << 15;

/// Bit set in a segment cell when `n` lies outside 𝒩.
const OUTSIDE_N: u8 = 0x80;
const OMEGA_MASK: u8 = 0x7f;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// ⌊√n⌋, exact for every `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// ⌈√n⌉.
pub fn isqrt_ceil(n: u64) -> u64 {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for the full `u64` range.
///
/// Strong-pseudoprime test to the first twelve prime bases, which has no
/// counterexample below 3.3·10^24.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// All primes up to `limit`, ascending. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }

    /// Primes `p` with `p² ≤ bound`.
    pub fn up_to_sqrt(&self, bound: u64) -> &[u64] {
        let root = isqrt(bound);
        let end = self.primes.partition_point(|&p| p <= root);
        &self.primes[..end]
    }
}

pub fn primes_up_to(limit: u64) -> Result<PrimeTable> {
    primes_up_to_with_guard(limit, DEFAULT_PRIME_GUARD)
}

/// Segmented, odd-only sieve of Eratosthenes.
pub fn primes_up_to_with_guard(limit: u64, guard: u64) -> Result<PrimeTable> {
    ensure!(limit >= 2, Input, "prime limit {limit} is below 2");
    ensure!(
        limit <= guard,
        Input,
        "prime limit {limit} exceeds the memory guard {guard}"
    );

    let root = isqrt(limit);
    let base = small_sieve(root);
    let mut primes = Vec::with_capacity(estimate_pi(limit));
    primes.push(2);

    // Odd numbers 2i+1 for i in [seg_lo, seg_hi).
    const SEG: u64 = 1 << 18;
    let odd_count = limit.div_ceil(2);
    let mut composite = vec![false; SEG as usize];
    let mut seg_lo = 1; // skip 1
    while seg_lo < odd_count {
        let seg_hi = (seg_lo + SEG).min(odd_count);
        let len = (seg_hi - seg_lo) as usize;
        composite[..len].fill(false);
        for &p in base.iter().skip(1) {
            let sq = p * p;
            if sq > 2 * seg_hi - 1 {
                break;
            }
            // First odd multiple of p that is ≥ max(p², 2·seg_lo+1).
            let lo_val = 2 * seg_lo + 1;
            let mut m = if sq >= lo_val {
                sq
            } else {
                let k = lo_val.div_ceil(p) * p;
                if k % 2 == 0 {
                    k + p
                } else {
                    k
                }
            };
            while m < 2 * seg_hi {
                composite[((m - 1) / 2 - seg_lo) as usize] = true;
                m += 2 * p;
            }
        }
        primes.extend(
            composite[..len]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| 2 * (seg_lo + i as u64) + 1),
        );
        seg_lo = seg_hi;
    }
    Ok(PrimeTable { limit, primes })
}

fn small_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            for j in (i * i..=n).step_by(i) {
                sieve[j] = false;
            }
        }
        i += 1;
    }
    (0..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

fn estimate_pi(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize
}

/// Odd-prime-factor data for every `n` in `[lo, hi)`.
///
/// Each cell packs ω*(n) (saturating, low seven bits) and an "outside 𝒩"
/// flag (high bit).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorizationSegment {
    lo: u64,
    hi: u64,
    cells: Vec<u8>,
}

impl FactorizationSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// ω*(n) for `n` in the segment.
    ///
    /// # Panics
    /// If `n` lies outside `[lo, hi)`.
    #[inline]
    pub fn omega_star(&self, n: u64) -> u8 {
        self.cells[self.index(n)] & OMEGA_MASK
    }

    /// Whether `n ∈ 𝒩`, i.e. `4 ∤ n` and no prime `p ≡ 3 (mod 4)` divides `n`.
    #[inline]
    pub fn in_n(&self, n: u64) -> bool {
        self.cells[self.index(n)] & OUTSIDE_N == 0
    }

    /// `(n, ω*(n), n ∈ 𝒩)` for every `n` in the segment.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u8, bool)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lo + i as u64, c & OMEGA_MASK, c & OUTSIDE_N == 0))
    }

    #[inline]
    fn index(&self, n: u64) -> usize {
        assert!(
            (self.lo..self.hi).contains(&n),
            "{n} outside segment [{}, {})",
            self.lo,
            self.hi
        );
        (n - self.lo) as usize
    }
}

/// Computes ω*(n) and 𝒩-membership for all `n` in `[lo, hi)`.
///
/// Requires `base.limit()² ≥ hi`, so that any `n < hi` has at most one prime
/// factor beyond the table, which is recovered as the unsieved cofactor.
pub fn factorize_segment(lo: u64, hi: u64, base: &PrimeTable) -> Result<FactorizationSegment> {
    ensure!(lo < hi, Input, "empty segment [{lo}, {hi})");
    ensure!(
        hi - lo <= MAX_SEGMENT_LEN,
        Precondition,
        "segment length {} exceeds the configured maximum {MAX_SEGMENT_LEN}",
        hi - lo
    );
    ensure!(
        base.limit()
            .checked_mul(base.limit())
            .is_none_or(|sq| sq >= hi),
        Precondition,
        "prime table up to {} cannot factor integers below {hi}",
        base.limit()
    );

    let mut cells = vec![0u8; (hi - lo) as usize];
    let primes = base.up_to_sqrt(hi - 1);
    let mut prod = vec![0u64; BLOCK as usize];

    let mut block_lo = lo;
    while block_lo < hi {
        let block_hi = (block_lo + BLOCK).min(hi);
        let len = (block_hi - block_lo) as usize;
        let out = &mut cells[(block_lo - lo) as usize..(block_hi - lo) as usize];
        factor_block(block_lo, block_hi, primes, &mut prod[..len], out);
        block_lo = block_hi;
    }
    Ok(FactorizationSegment { lo, hi, cells })
}

fn factor_block(lo: u64, hi: u64, primes: &[u64], prod: &mut [u64], out: &mut [u8]) {
    // prod[i] accumulates the part of n made of primes in the table.
    for (i, (p, c)) in prod.iter_mut().zip(out.iter_mut()).enumerate() {
        let n = lo + i as u64;
        if n == 0 {
            *p = 0;
            *c = OUTSIDE_N;
            continue;
        }
        let tz = n.trailing_zeros();
        *p = 1 << tz;
        *c = if tz >= 2 { OUTSIDE_N } else { 0 };
    }

    for &p in primes.iter().skip(1) {
        let flag = if p % 4 == 3 { OUTSIDE_N } else { 0 };
        let mut idx = first_multiple(lo, p);
        while idx < hi {
            let i = (idx - lo) as usize;
            out[i] = (out[i] + 1) | flag;
            prod[i] *= p;
            idx += p;
        }
        let mut pk = p * p;
        while pk < hi {
            let mut idx = first_multiple(lo, pk);
            while idx < hi {
                prod[(idx - lo) as usize] *= p;
                idx += pk;
            }
            match pk.checked_mul(p) {
                Some(next) => pk = next,
                None => break,
            }
        }
    }

    for (i, (&p, c)) in prod.iter().zip(out.iter_mut()).enumerate() {
        let n = lo + i as u64;
        if n == 0 || p == n {
            continue;
        }
        // A single prime larger than the table remains.
        let q = n / p;
        *c += 1;
        if q % 4 == 3 {
            *c |= OUTSIDE_N;
        }
    }
}

#[inline]
fn first_multiple(lo: u64, m: u64) -> u64 {
    // n = 0 is handled separately; start from m itself when lo is 0.
    let lo = lo.max(1);
    lo.div_ceil(m) * m
}

/// ω*(n): the number of distinct odd primes dividing `n`.
///
/// Trial division up to ∛n, after which the cofactor has at most two prime
/// factors and is classified with [`is_prime`] and [`isqrt`].
pub fn omega_star(n: u64) -> u32 {
    assert!(n >= 1, "omega_star is defined for n >= 1");
    let mut m = n >> n.trailing_zeros();
    let mut count = 0;
    let mut p = 3u64;
    while p.saturating_mul(p).saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            count += 1;
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 2;
    }
    if m == 1 {
        count
    } else if is_prime(m) {
        count + 1
    } else {
        let r = isqrt(m);
        if r * r == m && is_prime(r) {
            count + 1
        } else {
            // Two distinct primes, both above the trial bound.
            count + 2
        }
    }
}

/// Whether `n ∈ 𝒩`, by direct factorization.
pub fn in_n(n: u64) -> bool {
    if n == 0 || n.is_multiple_of(4) {
        return false;
    }
    let mut m = n >> n.trailing_zeros();
    let mut p = 3u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            if p % 4 == 3 {
                return false;
            }
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 2;
    }
    m == 1 || m % 4 == 1
}
