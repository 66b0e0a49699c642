//! The binary quadratic form attached to `(g, h, r, s)`, the residue ℓ that
//! makes `a` and `b` integral, and the root counts ν(d), each with an
//! exhaustive verifier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd, is_prime};
use crate::error::{ensure, Error, Result};

fn gcd_i(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, if it exists.
fn inverse_mod(a: i128, m: i128) -> Option<i128> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m))
}

/// The quantities `u_i, v_i, m, Δ, ξ` derived from `(g, h, r, s)`, with no
/// admissibility requirement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FormData {
    pub g: i64,
    pub h: i64,
    pub r: i64,
    pub s: i64,
    pub u1: i128,
    pub v1: i128,
    pub u2: i128,
    pub v2: i128,
    /// `(r² + s²)(g² + h²)`.
    pub m: i128,
    pub delta: i128,
    pub xi: i128,
}

impl FormData {
    pub fn new(g: i64, h: i64, r: i64, s: i64) -> Self {
        let (gi, hi, ri, si) = (g as i128, h as i128, r as i128, s as i128);
        let u1 = ri * gi + si * hi;
        let v1 = si * gi - ri * hi;
        let u2 = ri * gi - si * hi;
        let v2 = si * gi + ri * hi;
        FormData {
            g,
            h,
            r,
            s,
            u1,
            v1,
            u2,
            v2,
            m: (ri * ri + si * si) * (gi * gi + hi * hi),
            delta: u1 * v2 - u2 * v1,
            xi: u1 * u2 + v1 * v2,
        }
    }

    /// `r² + s²`.
    pub fn big_h(&self) -> i128 {
        let (r, s) = (self.r as i128, self.s as i128);
        r * r + s * s
    }

    /// `g² + h²`.
    pub fn gh_norm(&self) -> i128 {
        let (g, h) = (self.g as i128, self.h as i128);
        g * g + h * h
    }

    /// F(x, y) = m x² − 2ξ x y + m y².
    pub fn form(&self, x: i128, y: i128) -> i128 {
        self.m * x * x - 2 * self.xi * x * y + self.m * y * y
    }
}

/// An admissible quadruple together with ℓ mod Δ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SieveContext {
    #[serde(flatten)]
    pub data: FormData,
    /// Solution of `s ≡ i·r (mod (r² + s²)²)`, reduced mod `(r² + s²)²`.
    pub i: i128,
    pub ell: i128,
}

/// Builds the context, with ℓ assembled by CRT from its residues modulo
/// `r² + s²`, `h·(2, h)` and `g·(2, g)`.
pub fn build_context(g: i64, h: i64, r: i64, s: i64) -> Result<SieveContext> {
    ensure!(
        g > 0 && h > 0 && r > 0 && s > 0,
        Input,
        "(g, h, r, s) = ({g}, {h}, {r}, {s}) must be positive"
    );
    ensure!(
        g <= 1 << 20 && h <= 1 << 20 && r <= 1 << 20 && s <= 1 << 20,
        Input,
        "entries above 2^20 are not supported"
    );
    let data = FormData::new(g, h, r, s);
    let big_h = data.big_h();
    ensure!(
        gcd_i(data.gh_norm(), big_h) == 1,
        Input,
        "gcd(g² + h², r² + s²) = gcd({}, {big_h}) != 1",
        data.gh_norm()
    );
    ensure!(
        gcd(r as u64, s as u64) == 1,
        Input,
        "gcd(r, s) = gcd({r}, {s}) != 1"
    );

    let mod_h = h as i128 * gcd(2, h as u64) as i128;
    let mod_g = g as i128 * gcd(2, g as u64) as i128;
    for (a, b, name) in [
        (big_h, mod_h, "r²+s², h(2,h)"),
        (big_h, mod_g, "r²+s², g(2,g)"),
        (mod_h, mod_g, "h(2,h), g(2,g)"),
    ] {
        ensure!(
            gcd_i(a, b) == 1,
            Input,
            "moduli {name} = {a}, {b} are not coprime"
        );
    }
    ensure!(
        big_h * mod_h * mod_g == data.delta,
        Input,
        "moduli multiply to {} but Δ = {}",
        big_h * mod_h * mod_g,
        data.delta
    );

    let h2 = big_h * big_h;
    let r_inv = inverse_mod(r as i128, h2)
        .ok_or_else(|| Error::Input(format!("r = {r} not invertible mod {h2}")))?;
    let i = (s as i128 * r_inv).rem_euclid(h2);
    let ell = ell_from_i(&data, i, mod_h, mod_g)?;
    let ctx = SieveContext { data, i, ell };
    let d2 = data.delta * data.delta;
    if data.form(1, ell).rem_euclid(d2) != 0 {
        return Err(Error::Invariant(format!(
            "F(1, ℓ) ≢ 0 mod Δ² for {:?}",
            (g, h, r, s)
        )));
    }
    Ok(ctx)
}

fn ell_from_i(data: &FormData, i: i128, mod_h: i128, mod_g: i128) -> Result<i128> {
    let big_h = data.big_h();
    let (g, h) = (data.g as i128, data.h as i128);
    let lhs = (g * i - h).rem_euclid(big_h);
    let inv = inverse_mod(lhs, big_h)
        .ok_or_else(|| Error::Input(format!("g·i − h not invertible mod {big_h}")))?;
    let res_h = ((h + i * g).rem_euclid(big_h) * inv).rem_euclid(big_h);
    crt(&[
        (res_h, big_h),
        (1, mod_h),
        ((-1i128).rem_euclid(mod_g), mod_g),
    ])
}

fn crt(parts: &[(i128, i128)]) -> Result<i128> {
    let (mut x, mut modulus) = (0i128, 1i128);
    for &(a, m) in parts {
        let inv = inverse_mod(modulus % m, m)
            .ok_or_else(|| Error::Input(format!("modulus {m} is not coprime to {modulus}")))?;
        let k = ((a - x).rem_euclid(m) * inv).rem_euclid(m);
        x += modulus * k;
        modulus *= m;
        x = x.rem_euclid(modulus);
    }
    Ok(x)
}

impl SieveContext {
    pub fn delta(&self) -> i128 {
        self.data.delta
    }

    /// ℓ recomputed from another lift `i + k·(r² + s²)` of `i`.
    pub fn ell_for_lift(&self, k: i128) -> Result<i128> {
        let big_h = self.data.big_h();
        let mod_h = self.data.h as i128 * gcd(2, self.data.h as u64) as i128;
        let mod_g = self.data.g as i128 * gcd(2, self.data.g as u64) as i128;
        ell_from_i(&self.data, self.i + k * big_h, mod_h, mod_g)
    }

    /// A copy carrying a different ℓ, for mutation checks.
    pub fn with_ell(&self, ell: i128) -> Self {
        SieveContext {
            ell: ell.rem_euclid(self.delta()),
            ..*self
        }
    }
}

/// Checks, over all `(p, q) mod Δ` with `gcd(p, Δ) = 1`, that
/// `Δ | p v₂ − q v₁` and `Δ | q u₁ − p u₂` together hold exactly when
/// `q ≡ ℓ p (mod Δ)`.
pub fn verify_ell_bruteforce(ctx: &SieveContext) -> Result<bool> {
    let d = ctx.delta();
    ensure!(d <= 100_000, Precondition, "Δ = {d} exceeds 10^5");
    let f = &ctx.data;
    let (v1, v2, u1, u2) = (
        f.v1.rem_euclid(d) as i64,
        f.v2.rem_euclid(d) as i64,
        f.u1.rem_euclid(d) as i64,
        f.u2.rem_euclid(d) as i64,
    );
    let d64 = d as i64;
    let ell = ctx.ell as i64;
    let ok = (1..d64)
        .into_par_iter()
        .filter(|&p| gcd(p as u64, d64 as u64) == 1)
        .all(|p| {
            let target = (ell * p) % d64;
            // Residues of p·v₂ − q·v₁ and q·u₁ − p·u₂ as q runs upward.
            let mut ra = (p * v2) % d64;
            let mut rb = (d64 - (p * u2) % d64) % d64;
            for q in 0..d64 {
                let integral = ra == 0 && rb == 0;
                if integral != (q == target) {
                    return false;
                }
                ra -= v1;
                if ra < 0 {
                    ra += d64;
                }
                rb += u1;
                if rb >= d64 {
                    rb -= d64;
                }
            }
            true
        });
    Ok(ok)
}

/// Kronecker symbol (−4 | p) for a prime `p`.
fn chi_minus4(p: u64) -> i64 {
    match p % 4 {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// Distinct prime factors of a squarefree `d`, or an error if `d` is not
/// squarefree.
fn squarefree_primes(d: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut n = d;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            ensure!(
                !n.is_multiple_of(p),
                Input,
                "{d} is not squarefree ({p}² divides it)"
            );
            out.push(p);
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    Ok(out)
}

/// ν(d) for squarefree `d ≤ 10⁴`, from the prime-by-prime formula.
pub fn nu(d: u64, ctx: &SieveContext) -> Result<u64> {
    ensure!(
        (1..=10_000).contains(&d),
        Input,
        "d = {d} outside [1, 10^4]"
    );
    let mut value = 1u64;
    for p in squarefree_primes(d)? {
        let pi = p as i128;
        let local = if ctx.data.gh_norm() % pi == 0 {
            0
        } else if ctx.data.big_h() % pi == 0 {
            1
        } else {
            (1 + chi_minus4(p)) as u64
        };
        value *= local;
    }
    Ok(value)
}

/// `#{λ mod dΔ : λ ≡ ℓ (mod Δ), gcd(λ, d) = 1, dΔ² | F(1, λ)}` by direct
/// enumeration.
pub fn nu_bruteforce(d: u64, ctx: &SieveContext) -> Result<u64> {
    let delta = ctx.delta();
    ensure!(d >= 1, Input, "d must be positive");
    ensure!(
        d as i128 * delta <= 100_000_000,
        Precondition,
        "dΔ = {} too large",
        d as i128 * delta
    );
    let modulus = d as i128 * delta * delta;
    let count = (0..d as i128)
        .map(|j| ctx.ell + j * delta)
        .filter(|&lambda| gcd_i(lambda, d as i128) == 1)
        .filter(|&lambda| ctx.data.form(1, lambda).rem_euclid(modulus) == 0)
        .count();
    Ok(count as u64)
}

/// Compares the exhaustive root count modulo `pΔ` with [`nu`].
pub fn verify_nu_bruteforce(p: u64, ctx: &SieveContext) -> Result<bool> {
    ensure!(is_prime(p), Input, "{p} is not prime");
    ensure!(
        p as i128 * ctx.delta() <= 1_000_000,
        Precondition,
        "pΔ = {} exceeds 10^6",
        p as i128 * ctx.delta()
    );
    Ok(nu_bruteforce(p, ctx)? == nu(p, ctx)?)
}

/// Random admissible contexts with `Δ ≤ max_delta` and entries
/// `≤ max_entry`, reproducible from `seed`.
pub fn random_contexts(
    seed: u64,
    count: usize,
    max_entry: i64,
    max_delta: i128,
) -> Vec<SieveContext> {
    assert!(max_entry >= 2, "need entries up to at least 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let g = rng.gen_range(1..=max_entry);
        let h = rng.gen_range(1..=max_entry);
        let r = rng.gen_range(1..=max_entry);
        let s = rng.gen_range(1..=max_entry);
        if FormData::new(g, h, r, s).delta > max_delta {
            continue;
        }
        if let Ok(ctx) = build_context(g, h, r, s) {
            out.push(ctx);
        }
    }
    out
}

/// One line of a verification sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub g: i64,
    pub h: i64,
    pub r: i64,
    pub s: i64,
    pub delta: i128,
    pub check: String,
    pub pass: bool,
}

impl SweepRow {
    fn new(ctx: &SieveContext, check: String, pass: bool) -> Self {
        let d = &ctx.data;
        SweepRow {
            g: d.g,
            h: d.h,
            r: d.r,
            s: d.s,
            delta: d.delta,
            check,
            pass,
        }
    }
}

/// Sizes of a lemma sweep.
#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub seed: u64,
    pub ell_contexts: usize,
    pub ell_max_delta: i128,
    pub nu_contexts: usize,
    pub nu_max_prime: u64,
    pub multiplicative_pairs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            seed: 1,
            ell_contexts: 200,
            ell_max_delta: 10_000,
            nu_contexts: 50,
            nu_max_prime: 100,
            multiplicative_pairs: 500,
        }
    }
}

fn is_squarefree(d: u64) -> bool {
    squarefree_primes(d).is_ok()
}

/// Runs the ℓ verifier, the ν verifier on odd primes, and the
/// multiplicativity check on coprime squarefree pairs `d₁, d₂ ≤ 100`.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let ell_ctx = random_contexts(config.seed, config.ell_contexts, 50, config.ell_max_delta);
    for ctx in &ell_ctx {
        rows.push(SweepRow::new(
            ctx,
            "ell".into(),
            verify_ell_bruteforce(ctx)?,
        ));
    }

    let nu_max_delta = 1_000_000 / config.nu_max_prime.max(1) as i128;
    let nu_ctx = random_contexts(config.seed ^ 0x5eed, config.nu_contexts, 30, nu_max_delta);
    for ctx in &nu_ctx {
        for p in (3..=config.nu_max_prime).filter(|&p| is_prime(p)) {
            rows.push(SweepRow::new(
                ctx,
                format!("nu({p})"),
                verify_nu_bruteforce(p, ctx)?,
            ));
        }
    }

    if !nu_ctx.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xd1d2);
        let mut done = 0;
        while done < config.multiplicative_pairs {
            let ctx = &nu_ctx[rng.gen_range(0..nu_ctx.len())];
            let d1 = rng.gen_range(1..=100u64);
            let d2 = rng.gen_range(1..=100u64);
            if gcd(d1, d2) != 1 || !is_squarefree(d1) || !is_squarefree(d2) {
                continue;
            }
            let whole = nu_bruteforce(d1 * d2, ctx)?;
            let pass = whole == nu_bruteforce(d1, ctx)? * nu_bruteforce(d2, ctx)?
                && whole == nu(d1 * d2, ctx)?
                && nu(d1 * d2, ctx)? == nu(d1, ctx)? * nu(d2, ctx)?;
            rows.push(SweepRow::new(ctx, format!("nu-mult({d1},{d2})"), pass));
            done += 1;
        }
    }
    Ok(rows)
}

/// CSV `g,h,r,s,Delta,check,verdict`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut table = crate::csv::Table::new(["g", "h", "r", "s", "Delta", "check", "verdict"]);
    for row in rows {
        table.row([
            row.g.to_string(),
            row.h.to_string(),
            row.r.to_string(),
            row.s.to_string(),
            row.delta.to_string(),
            row.check.clone(),
            if row.pass { "pass" } else { "fail" }.to_string(),
        ]);
    }
    table.render()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities_example() {
        let f = FormData::new(1, 2, 2, 1);
        assert_eq!((f.u1, f.v1, f.u2, f.v2), (4, -3, 0, 5));
        assert_eq!(f.delta, 20);
        // gcd(g² + h², r² + s²) = 5, so the quadruple is not admissible.
        assert!(matches!(build_context(1, 2, 2, 1), Err(Error::Input(_))));
    }

    #[test]
    fn smallest_delta_is_rejected() {
        assert_eq!(FormData::new(1, 1, 1, 1).delta, 4);
        assert!(build_context(1, 1, 1, 1).is_err());
    }

    #[test]
    fn algebraic_identities() {
        for ctx in random_contexts(3, 500, 50, i128::MAX) {
            let f = ctx.data;
            let (g, h) = (f.g as i128, f.h as i128);
            assert_eq!(f.delta, 2 * g * h * f.big_h());
            assert_eq!(f.xi, f.big_h() * (g * g - h * h));
            assert_eq!(4 * f.xi * f.xi - 4 * f.m * f.m, -4 * f.delta * f.delta);
        }
    }

    #[test]
    fn ell_holds_on_small_contexts() {
        for ctx in random_contexts(5, 40, 12, 3000) {
            assert!(verify_ell_bruteforce(&ctx).unwrap(), "{:?}", ctx.data);
            let bumped = ctx.with_ell(ctx.ell + 1);
            assert!(!verify_ell_bruteforce(&bumped).unwrap());
        }
    }

    #[test]
    fn ell_is_lift_independent() {
        for ctx in random_contexts(9, 50, 20, i128::MAX) {
            for k in [1, 2, 7] {
                assert_eq!(ctx.ell_for_lift(k).unwrap(), ctx.ell);
            }
        }
    }

    #[test]
    fn form_congruence() {
        for ctx in random_contexts(13, 10, 6, 2000) {
            let d = ctx.delta();
            let d2 = d * d;
            let base = ctx.data.form(1, ctx.ell);
            for p in (1..d).filter(|&p| gcd_i(p, d) == 1) {
                let q = ctx.ell * p;
                assert_eq!(
                    ctx.data.form(p, q).rem_euclid(d2),
                    (base * p * p).rem_euclid(d2)
                );
            }
        }
    }

    #[test]
    fn nu_cases() {
        let ctx = build_context(2, 1, 2, 3).unwrap();
        assert_eq!(nu(1, &ctx).unwrap(), 1);
        assert_eq!(ctx.data.gh_norm(), 5);
        assert_eq!(nu(5, &ctx).unwrap(), 0);
        assert_eq!(nu_bruteforce(5, &ctx).unwrap(), 0);
        assert_eq!(nu(13, &ctx).unwrap(), 1);
        assert_eq!(nu(17, &ctx).unwrap(), 2);
        assert_eq!(nu_bruteforce(17, &ctx).unwrap(), 2);
        assert!(matches!(nu(18, &ctx), Err(Error::Input(_))));
    }

    #[test]
    fn nu_matches_bruteforce_on_odd_primes() {
        for ctx in random_contexts(21, 10, 20, 10_000) {
            for p in (3..=100).filter(|&p| is_prime(p)) {
                assert!(
                    verify_nu_bruteforce(p, &ctx).unwrap(),
                    "p = {p}, {:?}",
                    ctx.data
                );
            }
        }
    }

    #[test]
    fn sweep_csv_format() {
        let config = SweepConfig {
            ell_contexts: 2,
            ell_max_delta: 500,
            nu_contexts: 1,
            nu_max_prime: 7,
            multiplicative_pairs: 3,
            ..SweepConfig::default()
        };
        let rows = sweep(&config).unwrap();
        assert!(rows.iter().all(|r| r.pass));
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("g,h,r,s,Delta,check,verdict\n"));
        assert_eq!(csv.lines().count(), 1 + 2 + 3 + 3);
    }
}
