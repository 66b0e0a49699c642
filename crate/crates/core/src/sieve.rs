//! The segmented pair sieve.
//!
//! For every prime `p ≤ √x` and every `a ≥ 1` with `a² + p² ≤ x`, the pair
//! `(a, p)` is credited to `n = a² + p²`. The integers `1..=x` are cut into
//! segments `[lo, hi)`; inside a segment the admissible `a` for each prime
//! form one contiguous range whose endpoints are found with integer square
//! roots. Per-`n` counters are then folded, together with ω*(n) from
//! [`factorize_segment`], into a [`SegmentTally`]. Tallies over disjoint
//! adjacent ranges merge by plain addition, so the reduction order never
//! changes the result.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{
    factorize_segment, isqrt, isqrt_ceil, primes_up_to, PrimeTable, MAX_SEGMENT_LEN,
};
use crate::error::{ensure, Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 22;
pub const MIN_SEGMENT_SIZE: u64 = 1 << 16;
pub const MIN_X: u64 = 100;

/// Version string written into every serialized report.
pub const GENERATED_BY: &str = concat!("two-squares ", env!("CARGO_PKG_VERSION"));

/// Per-`n` values of r₁ and r₁* over `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub lo: u64,
    pub hi: u64,
    pub r1: Vec<u16>,
    pub r1_star: Vec<u16>,
}

impl PairCounts {
    pub fn get(&self, n: u64) -> (u16, u16) {
        let i = (n - self.lo) as usize;
        (self.r1[i], self.r1_star[i])
    }
}

/// Counts the pairs `(a, p)` landing in `[lo, hi)`.
///
/// `primes` must contain every prime up to `√(hi − 1)`.
pub fn pair_counts(lo: u64, hi: u64, primes: &PrimeTable) -> Result<PairCounts> {
    ensure!(lo < hi, Input, "empty segment [{lo}, {hi})");
    ensure!(
        hi - lo <= MAX_SEGMENT_LEN,
        Precondition,
        "segment length {} exceeds the configured maximum {MAX_SEGMENT_LEN}",
        hi - lo
    );
    let top = hi - 1;
    ensure!(
        primes.limit() >= isqrt(top),
        Precondition,
        "prime table up to {} does not reach √{top}",
        primes.limit()
    );
    let len = (hi - lo) as usize;
    let mut r1 = vec![0u16; len];
    let mut r1_star = vec![0u16; len];

    for &p in primes.up_to_sqrt(top) {
        let p2 = p * p;
        if p2 >= top {
            break;
        }
        let a_lo = if lo > p2 {
            isqrt_ceil(lo - p2).max(1)
        } else {
            1
        };
        let a_hi = isqrt(top - p2);
        if a_lo > a_hi {
            continue;
        }
        let mut a_mod = a_lo % p;
        for a in a_lo..=a_hi {
            let i = (a * a + p2 - lo) as usize;
            r1[i] = r1[i]
                .checked_add(1)
                .ok_or_else(|| Error::Overflow(format!("r1({}) exceeds u16", lo + i as u64)))?;
            if a_mod != 0 {
                r1_star[i] += 1;
            }
            a_mod += 1;
            if a_mod == p {
                a_mod = 0;
            }
        }
    }
    Ok(PairCounts {
        lo,
        hi,
        r1,
        r1_star,
    })
}

/// Joint histogram of `(k, r) = (ω*(n), r₁(n))` over `n ∈ 𝒩`, including `r = 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct JointHistogram {
    cells: BTreeMap<(u32, u32), u64>,
}

impl JointHistogram {
    pub fn get(&self, k: u32, r: u32) -> u64 {
        self.cells.get(&(k, r)).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `((k, r), count)` in ascending `(k, r)` order, nonzero cells only.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.cells.iter().map(|(&key, &count)| (key, count))
    }

    pub fn add(&mut self, k: u32, r: u32, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let cell = self.cells.entry((k, r)).or_insert(0);
        *cell = cell
            .checked_add(count)
            .ok_or_else(|| Error::Overflow(format!("joint cell ({k}, {r})")))?;
        Ok(())
    }

    fn merge(&mut self, other: &JointHistogram) -> Result<()> {
        for ((k, r), count) in other.iter() {
            self.add(k, r, count)?;
        }
        Ok(())
    }
}

impl Serialize for JointHistogram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            self.cells
                .iter()
                .map(|(&(k, r), &c)| [k as u64, r as u64, c]),
        )
    }
}

impl<'de> Deserialize<'de> for JointHistogram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<[u64; 3]> = Vec::deserialize(d)?;
        let mut joint = JointHistogram::default();
        for [k, r, c] in rows {
            let k = u32::try_from(k).map_err(serde::de::Error::custom)?;
            let r = u32::try_from(r).map_err(serde::de::Error::custom)?;
            joint.add(k, r, c).map_err(serde::de::Error::custom)?;
        }
        Ok(joint)
    }
}

/// r₁-histogram of the `n ∉ 𝒩` that still have `r₁(n) > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutsideHistogram {
    cells: BTreeMap<u32, u64>,
}

impl OutsideHistogram {
    pub fn iter(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.cells.iter().map(|(&r, &c)| (r, c))
    }

    pub fn add(&mut self, r: u32, count: u64) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        let cell = self.cells.entry(r).or_insert(0);
        *cell = cell
            .checked_add(count)
            .ok_or_else(|| Error::Overflow(format!("outside-𝒩 cell r = {r}")))?;
        Ok(())
    }
}

impl Serialize for OutsideHistogram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.cells.iter().map(|(&r, &c)| [r as u64, c]))
    }
}

impl<'de> Deserialize<'de> for OutsideHistogram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows: Vec<[u64; 2]> = Vec::deserialize(d)?;
        let mut hist = OutsideHistogram::default();
        for [r, c] in rows {
            let r = u32::try_from(r).map_err(serde::de::Error::custom)?;
            hist.add(r, c).map_err(serde::de::Error::custom)?;
        }
        Ok(hist)
    }
}

/// Everything the statistics need from the integers in `[lo, hi)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentTally {
    /// Half-open range `[lo, hi)` of `n` covered.
    pub range: [u64; 2],
    pub joint: JointHistogram,
    pub outside: OutsideHistogram,
    pub r1_total: u64,
    pub r1_star_total: u64,
    /// Σ C(r₁(n), 2).
    pub moment2: u64,
    /// Σ C(r₁(n), 3).
    pub moment3: u64,
    /// Σ (r₁(n) − r₁*(n)).
    pub gcd_defect: u64,
}

fn checked_sum(a: u64, b: u64, what: &str) -> Result<u64> {
    a.checked_add(b)
        .ok_or_else(|| Error::Overflow(what.to_string()))
}

impl SegmentTally {
    pub fn empty(lo: u64) -> Self {
        SegmentTally {
            range: [lo, lo],
            ..Default::default()
        }
    }

    pub fn lo(&self) -> u64 {
        self.range[0]
    }

    pub fn hi(&self) -> u64 {
        self.range[1]
    }

    /// Combines tallies over adjacent ranges (in either order).
    pub fn merge(mut self, other: &SegmentTally) -> Result<Self> {
        let range = if other.lo() == other.hi() {
            self.range
        } else if self.lo() == self.hi() {
            other.range
        } else if self.hi() == other.lo() {
            [self.lo(), other.hi()]
        } else if other.hi() == self.lo() {
            [other.lo(), self.hi()]
        } else {
            return Err(Error::Input(format!(
                "cannot merge non-adjacent ranges [{}, {}) and [{}, {})",
                self.lo(),
                self.hi(),
                other.lo(),
                other.hi()
            )));
        };
        self.range = range;
        self.joint.merge(&other.joint)?;
        for (r, c) in other.outside.iter() {
            self.outside.add(r, c)?;
        }
        self.r1_total = checked_sum(self.r1_total, other.r1_total, "r1_total")?;
        self.r1_star_total = checked_sum(self.r1_star_total, other.r1_star_total, "r1_star_total")?;
        self.moment2 = checked_sum(self.moment2, other.moment2, "moment2")?;
        self.moment3 = checked_sum(self.moment3, other.moment3, "moment3")?;
        self.gcd_defect = checked_sum(self.gcd_defect, other.gcd_defect, "gcd_defect")?;
        Ok(self)
    }
}

/// Tally of `[lo, hi)`: pair counts and factorization data folded together.
pub fn tally_segment(lo: u64, hi: u64, primes: &PrimeTable) -> Result<SegmentTally> {
    let lo_eff = lo.max(1);
    ensure!(lo_eff < hi, Input, "empty segment [{lo}, {hi})");
    let counts = pair_counts(lo_eff, hi, primes)?;
    let factors = factorize_segment(lo_eff, hi, primes)?;

    // Dense accumulation; ω* < 16 below 2^64 and r₁ stays small.
    let mut dense: Vec<Vec<u64>> = vec![Vec::new(); 16];
    let mut tally = SegmentTally::empty(lo_eff);
    tally.range = [lo_eff, hi];
    for ((n, k, inside), (&r, &rs)) in factors
        .iter()
        .zip(counts.r1.iter().zip(counts.r1_star.iter()))
    {
        let (r, rs) = (r as u64, rs as u64);
        if inside {
            let row = &mut dense[k as usize];
            if row.len() <= r as usize {
                row.resize(r as usize + 1, 0);
            }
            row[r as usize] += 1;
        } else if r > 0 {
            tally.outside.add(r as u32, 1)?;
        }
        if r == 0 {
            continue;
        }
        debug_assert!(rs <= r, "r1*({n}) > r1({n})");
        tally.r1_total += r;
        tally.r1_star_total += rs;
        tally.moment2 += r * (r - 1) / 2;
        tally.moment3 += r * (r - 1) * r.saturating_sub(2) / 6;
        tally.gcd_defect += r - rs;
    }
    for (k, row) in dense.iter().enumerate() {
        for (r, &c) in row.iter().enumerate() {
            tally.joint.add(k as u32, r as u32, c)?;
        }
    }
    Ok(tally)
}

/// A complete (or, for checkpoints, partial) run up to `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallyReport {
    pub x: u64,
    pub generated_by_version: String,
    #[serde(flatten)]
    pub tally: SegmentTally,
}

impl TallyReport {
    pub fn new(x: u64, tally: SegmentTally) -> Self {
        TallyReport {
            x,
            generated_by_version: GENERATED_BY.to_string(),
            tally,
        }
    }

    /// Whether the report covers every `n` in `[1, x]`.
    pub fn is_complete(&self) -> bool {
        self.tally.range == [1, self.x + 1]
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The joint histogram as CSV with columns `k,r,count`.
    pub fn joint_csv(&self) -> String {
        let mut out = String::from("k,r,count\n");
        for ((k, r), c) in self.tally.joint.iter() {
            out.push_str(&format!("{k},{r},{c}\n"));
        }
        out
    }
}

/// How a count up to `x` is cut into segments.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentPlan {
    pub x: u64,
    pub segment_size: u64,
}

impl SegmentPlan {
    pub fn new(x: u64, segment_size: u64) -> Result<Self> {
        ensure!(x >= MIN_X, Input, "x = {x} is below the minimum {MIN_X}");
        ensure!(
            x < u64::MAX,
            Input,
            "x = {x} leaves no room for the segment end"
        );
        ensure!(
            (MIN_SEGMENT_SIZE..=MAX_SEGMENT_LEN).contains(&segment_size),
            Input,
            "segment size {segment_size} outside [{MIN_SEGMENT_SIZE}, {MAX_SEGMENT_LEN}]"
        );
        Ok(SegmentPlan { x, segment_size })
    }

    pub fn len(&self) -> usize {
        self.x.div_ceil(self.segment_size) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Segment `i` as a half-open range; segments tile `[1, x + 1)`.
    pub fn segment(&self, i: usize) -> (u64, u64) {
        let lo = 1 + i as u64 * self.segment_size;
        (lo, (lo + self.segment_size).min(self.x + 1))
    }

    pub fn primes(&self) -> Result<PrimeTable> {
        primes_up_to(isqrt(self.x) + 1)
    }
}

/// Runs the given `f` on a pool with exactly `threads` workers.
pub fn with_thread_budget<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    ensure!(threads >= 1, Input, "thread budget must be at least 1");
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Tallies the listed segments of `plan` in parallel, returned in input order.
pub fn tally_segments(
    plan: &SegmentPlan,
    primes: &PrimeTable,
    indices: &[usize],
) -> Result<Vec<SegmentTally>> {
    indices
        .par_iter()
        .map(|&i| {
            let (lo, hi) = plan.segment(i);
            tally_segment(lo, hi, primes)
        })
        .collect()
}

pub fn fold_tallies<'a>(parts: impl IntoIterator<Item = &'a SegmentTally>) -> Result<SegmentTally> {
    parts
        .into_iter()
        .try_fold(SegmentTally::empty(1), |acc, part| acc.merge(part))
}

/// Full count up to `x`. The result does not depend on `segment_size` or
/// `thread_budget`.
pub fn pair_sieve(x: u64, segment_size: u64, thread_budget: usize) -> Result<TallyReport> {
    let plan = SegmentPlan::new(x, segment_size)?;
    let primes = plan.primes()?;
    let indices: Vec<usize> = (0..plan.len()).collect();
    let parts = with_thread_budget(thread_budget, || tally_segments(&plan, &primes, &indices))??;
    let tally = fold_tallies(&parts)?;
    ensure!(
        tally.range == [1, x + 1],
        Invariant,
        "segments covered [{}, {}) instead of [1, {})",
        tally.lo(),
        tally.hi(),
        x + 1
    );
    Ok(TallyReport::new(x, tally))
}
