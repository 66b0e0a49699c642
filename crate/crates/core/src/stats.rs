//! Headline quantities computed from a [`TallyReport`], and their comparison
//! with the asymptotic formulas.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize_segment, gcd, isqrt, omega_star, primes_up_to};
use crate::error::{ensure, Error, Result};
use crate::heuristics::special::ln_factorial;
use crate::heuristics::{log_scales, EulerProduct};
use crate::sieve::{with_thread_budget, TallyReport, DEFAULT_SEGMENT_SIZE};

/// One empirical value set against a prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticComparison {
    pub x: f64,
    pub empirical: f64,
    pub predicted: f64,
    /// `empirical / predicted`, or NaN when the prediction is zero.
    pub ratio: f64,
    pub note: String,
}

impl AsymptoticComparison {
    pub fn new(x: f64, empirical: f64, predicted: f64, note: impl Into<String>) -> Self {
        let ratio = if predicted != 0.0 {
            empirical / predicted
        } else {
            f64::NAN
        };
        AsymptoticComparison {
            x,
            empirical,
            predicted,
            ratio,
            note: note.into(),
        }
    }
}

/// CSV `x,empirical,predicted,ratio,note`.
pub fn comparisons_csv(rows: &[AsymptoticComparison]) -> String {
    use crate::csv::float;
    let mut table = crate::csv::Table::new(["x", "empirical", "predicted", "ratio", "note"]);
    for row in rows {
        table.row([
            float(row.x),
            float(row.empirical),
            float(row.predicted),
            float(row.ratio),
            row.note.clone(),
        ]);
    }
    table.render()
}

/// JSON array of comparisons.
pub fn comparisons_json(rows: &[AsymptoticComparison]) -> Result<String> {
    let mut text = serde_json::to_string_pretty(rows)?;
    text.push('\n');
    Ok(text)
}

fn require_complete(report: &TallyReport) -> Result<()> {
    ensure!(
        report.is_complete(),
        Precondition,
        "report covers [{}, {}) but x = {}",
        report.tally.lo(),
        report.tally.hi(),
        report.x
    );
    Ok(())
}

/// N_r(x) for every `r ≥ 1` with a nonzero count, checked against
/// `Σ_n r₁(n)`.
pub fn n_r_table(report: &TallyReport) -> Result<BTreeMap<u32, u64>> {
    if report.x < 2 {
        return Ok(BTreeMap::new());
    }
    require_complete(report)?;
    let mut table = BTreeMap::new();
    for ((_, r), c) in report.tally.joint.iter().filter(|((_, r), _)| *r > 0) {
        *table.entry(r).or_insert(0u64) += c;
    }
    for (r, c) in report.tally.outside.iter() {
        *table.entry(r).or_insert(0u64) += c;
    }
    table.retain(|_, c| *c > 0);
    let weighted = table
        .iter()
        .try_fold(0u64, |acc, (&r, &c)| acc.checked_add(r as u64 * c))
        .ok_or_else(|| Error::Overflow("Σ r·N_r".into()))?;
    ensure!(
        weighted == report.tally.r1_total,
        Invariant,
        "Σ r·N_r = {weighted} but r1_total = {}",
        report.tally.r1_total
    );
    Ok(table)
}

/// N₀(x) = #{n ≤ x : r₁(n) ≥ 1}.
pub fn n0(report: &TallyReport) -> Result<u64> {
    Ok(n_r_table(report)?.values().sum())
}

/// `#{n ≤ x : n ∈ 𝒩, ω*(n) = k}` for every `k`, read off the joint
/// histogram.
pub fn pi_n_from_report(report: &TallyReport) -> Result<BTreeMap<u32, u64>> {
    require_complete(report)?;
    let mut out = BTreeMap::new();
    for ((k, _), c) in report.tally.joint.iter() {
        *out.entry(k).or_insert(0u64) += c;
    }
    out.retain(|_, c| *c > 0);
    Ok(out)
}

/// π_𝒩(x; k) for every `k`, by a direct factorization sweep of `[1, x]`.
pub fn pi_n_histogram(x: u64, threads: usize) -> Result<BTreeMap<u32, u64>> {
    ensure!(x >= 2, Input, "x = {x} is below 2");
    ensure!(x < u64::MAX, Input, "x too large");
    let base = primes_up_to((isqrt(x) + 1).max(2))?;
    let seg = DEFAULT_SEGMENT_SIZE;
    let count = x.div_ceil(seg);
    let parts: Vec<Result<[u64; 16]>> = with_thread_budget(threads, || {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let lo = 1 + i * seg;
                let hi = (lo + seg).min(x + 1);
                let segment = factorize_segment(lo, hi, &base)?;
                let mut local = [0u64; 16];
                for (_, k, inside) in segment.iter() {
                    if inside {
                        local[k as usize] += 1;
                    }
                }
                Ok(local)
            })
            .collect()
    })?;
    let mut total = [0u64; 16];
    for part in parts {
        for (t, v) in total.iter_mut().zip(part?) {
            *t += v;
        }
    }
    Ok(total
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| (k as u32, c))
        .collect())
}

/// c_κ·(x/log x)·(½ log log x)^{k−1}/(k−1)! with κ = (k−1)/log log x.
pub fn pi_n_prediction(x: f64, k: u32, product: &EulerProduct) -> Result<f64> {
    ensure!(k >= 2, Domain, "the estimate needs k ≥ 2, got {k}");
    ensure!(x > std::f64::consts::E, Domain, "log log x needs x > e");
    let log_x = x.ln();
    let ll = log_x.ln();
    let kappa = (k - 1) as f64 / ll;
    let ln = product.ln_c(kappa)? + x.ln() - log_x.ln() + (k - 1) as f64 * (0.5 * ll).ln()
        - ln_factorial((k - 1) as u64);
    Ok(ln.exp())
}

/// Exact π_𝒩(x; k) against its Euler-product estimate.
pub fn compare_pi_n(
    x: u64,
    k: u32,
    histogram: &BTreeMap<u32, u64>,
    product: &EulerProduct,
) -> Result<AsymptoticComparison> {
    let predicted = pi_n_prediction(x as f64, k, product)?;
    let empirical = histogram.get(&k).copied().unwrap_or(0) as f64;
    Ok(AsymptoticComparison::new(
        x as f64,
        empirical,
        predicted,
        format!(
            "pi_N(x;{k}) vs c_kappa estimate, primes <= {}",
            product.prime_limit()
        ),
    ))
}

/// Σ C(r₁(n), 2) against (9/8)·x/log x.
pub fn daniel_ratio(report: &TallyReport) -> Result<AsymptoticComparison> {
    ensure!(
        report.x >= 1000,
        Precondition,
        "x = {} is below 10^3",
        report.x
    );
    require_complete(report)?;
    let x = report.x as f64;
    Ok(AsymptoticComparison::new(
        x,
        report.tally.moment2 as f64,
        9.0 / 8.0 * x / x.ln(),
        "sum C(r1,2) vs 9/8 x/log x",
    ))
}

/// Σ (r₁(n) − r₁*(n)) against √x·log log x.
pub fn gcd_defect_check(report: &TallyReport) -> Result<AsymptoticComparison> {
    ensure!(
        report.x >= 100,
        Precondition,
        "x = {} is below 100",
        report.x
    );
    require_complete(report)?;
    let x = report.x as f64;
    Ok(AsymptoticComparison::new(
        x,
        report.tally.gcd_defect as f64,
        x.sqrt() * x.ln().ln(),
        "gcd defect vs sqrt(x) loglog x",
    ))
}

/// N₀(x) against (π/2)·x/log x. The note carries the normalized deficit
/// `((π/2)x/log x − N₀)·(log x)^{1+δ}/x`.
pub fn n0_main_term_check(report: &TallyReport) -> Result<AsymptoticComparison> {
    let count = n0(report)?;
    let x = report.x as f64;
    let main = FRAC_PI_2 * x / x.ln();
    let normalized = normalized_deficit(x, count as f64);
    Ok(AsymptoticComparison::new(
        x,
        count as f64,
        main,
        format!(
            "N0 vs (pi/2) x/log x; normalized deficit {}",
            crate::csv::float(normalized)
        ),
    ))
}

/// `((π/2)x/log x − N₀)·(log x)^{1+δ}/x`.
pub fn normalized_deficit(x: f64, n0: f64) -> f64 {
    let log_x = x.ln();
    (FRAC_PI_2 * x / log_x - n0) * log_x.powf(1.0 + crate::heuristics::delta()) / x
}

/// `c` in `|(π/2)x/log x − N₁ − Σ_{r≥2} r N_r| = c·x·L/(log x)²`.
pub fn sumidff_constant(report: &TallyReport) -> Result<f64> {
    let table = n_r_table(report)?;
    let x = report.x as f64;
    let log_x = x.ln();
    let n1 = table.get(&1).copied().unwrap_or(0) as f64;
    let weighted: f64 = table
        .iter()
        .filter(|(r, _)| **r >= 2)
        .map(|(&r, &c)| r as f64 * c as f64)
        .sum();
    let gap = FRAC_PI_2 * x / log_x - n1 - weighted;
    Ok(gap.abs() / (x * log_x.ln() / (log_x * log_x)))
}

/// Σ C(r₁(n), 2) over `n ∈ 𝒩` with ω*(n) = k, for every `k`.
pub fn moment2_by_k(report: &TallyReport) -> BTreeMap<u32, u64> {
    let mut out = BTreeMap::new();
    for ((k, r), c) in report.tally.joint.iter() {
        let r = r as u64;
        *out.entry(k).or_insert(0u64) += c * (r * r.saturating_sub(1) / 2);
    }
    out
}

/// Shape of `k ↦ moment2(k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentProfile {
    pub by_k: BTreeMap<u32, u64>,
    pub peak_k: u32,
    /// Non-decreasing up to the peak and non-increasing after it, over the
    /// full range of `k` with data.
    pub unimodal: bool,
    /// `2L ± 3(L log L)^{1/2}`.
    pub band: (f64, f64),
    pub peak_in_band: bool,
    /// Second differences of `log moment2(k)` are non-positive on the
    /// integers in `[L, 3L]`.
    pub log_concave_on_l_3l: bool,
}

pub fn moment_profile(report: &TallyReport) -> Result<MomentProfile> {
    require_complete(report)?;
    let by_k = moment2_by_k(report);
    ensure!(
        by_k.values().any(|&v| v > 0),
        Capability,
        "report has no per-cell second moments"
    );
    let (ll, _) = log_scales(report.x as f64)?;
    let (&k_min, _) = by_k.iter().next().expect("non-empty");
    let (&k_max, _) = by_k.iter().next_back().expect("non-empty");
    let values: Vec<u64> = (k_min..=k_max)
        .map(|k| by_k.get(&k).copied().unwrap_or(0))
        .collect();
    let peak_idx = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .expect("non-empty");
    let unimodal = values[..=peak_idx].windows(2).all(|w| w[0] <= w[1])
        && values[peak_idx..].windows(2).all(|w| w[0] >= w[1]);
    let peak_k = k_min + peak_idx as u32;
    let half = 3.0 * (ll * ll.ln().max(0.0)).sqrt();
    let band = (2.0 * ll - half, 2.0 * ll + half);
    let lo = ll.ceil() as u32;
    let hi = (3.0 * ll).floor() as u32;
    let logs: Vec<f64> = (lo..=hi)
        .map(|k| (by_k.get(&k).copied().unwrap_or(0) as f64).ln())
        .collect();
    let log_concave_on_l_3l = logs.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] <= 0.0);
    Ok(MomentProfile {
        by_k,
        peak_k,
        unimodal,
        band,
        peak_in_band: (peak_k as f64) >= band.0 && (peak_k as f64) <= band.1,
        log_concave_on_l_3l,
    })
}

/// Share of Σ C(r₁(n), 2) from cells with `|k − 2L| ≤ C(L log L)^{1/2}` and
/// `(log x)^{log 4 − 1 − ε} < r < (log x)^{log 4 − 1 + ε}`.
pub fn main_contrib_fraction(report: &TallyReport, c: f64, epsilon: f64) -> Result<f64> {
    ensure!(c > 0.0 && epsilon > 0.0, Input, "C and ε must be positive");
    ensure!(
        !report.tally.joint.is_empty(),
        Capability,
        "report has no joint (k, r) histogram"
    );
    require_complete(report)?;
    if report.tally.moment2 == 0 {
        return Ok(0.0);
    }
    let (ll, _) = log_scales(report.x as f64)?;
    let log_x = (report.x as f64).ln();
    let width = c * (ll * ll.ln().max(0.0)).sqrt();
    let centre = 4f64.ln() - 1.0;
    let r_lo = log_x.powf(centre - epsilon);
    let r_hi = log_x.powf(centre + epsilon);
    let mut inside = 0u64;
    for ((k, r), count) in report.tally.joint.iter() {
        let rf = r as f64;
        if (k as f64 - 2.0 * ll).abs() <= width && rf > r_lo && rf < r_hi {
            let r = r as u64;
            inside += count * (r * r.saturating_sub(1) / 2);
        }
    }
    Ok(inside as f64 / report.tally.moment2 as f64)
}

/// One endpoint of an angle interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngleEndpoint {
    /// `j·π/4` for `j ∈ {0, 1, 2}`, compared exactly.
    QuarterPi(u8),
    /// Any angle in radians, compared with a 1e−12 slack.
    Radians(f64),
}

/// Floating endpoints closer than this to the argument count as equal.
pub const ANGLE_SLACK: f64 = 1e-12;

impl AngleEndpoint {
    pub fn radians(self) -> f64 {
        match self {
            AngleEndpoint::QuarterPi(j) => j as f64 * FRAC_PI_4,
            AngleEndpoint::Radians(a) => a,
        }
    }

    /// Whether `arg(r + is) ≥ self`, for `r, s ≥ 0` not both zero.
    fn at_or_below(self, r: i64, s: i64) -> bool {
        match self {
            AngleEndpoint::QuarterPi(0) => true,
            AngleEndpoint::QuarterPi(1) => s >= r,
            AngleEndpoint::QuarterPi(_) => r == 0,
            AngleEndpoint::Radians(a) => (s as f64).atan2(r as f64) > a - ANGLE_SLACK,
        }
    }

    /// Parses `0`, `pi/4`, `pi/2` (exact) or a float in radians.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim().to_ascii_lowercase().replace(' ', "");
        match t.as_str() {
            "0" => Ok(AngleEndpoint::QuarterPi(0)),
            "pi/4" | "π/4" => Ok(AngleEndpoint::QuarterPi(1)),
            "pi/2" | "π/2" => Ok(AngleEndpoint::QuarterPi(2)),
            _ => t
                .parse::<f64>()
                .map(AngleEndpoint::Radians)
                .map_err(|_| Error::Input(format!("cannot parse angle {text:?}"))),
        }
    }
}

/// Half-open interval `[lo, hi) ⊆ [0, π/2]` of arguments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleInterval {
    pub lo: AngleEndpoint,
    pub hi: AngleEndpoint,
}

impl AngleInterval {
    pub fn new(lo: AngleEndpoint, hi: AngleEndpoint) -> Result<Self> {
        for e in [lo, hi] {
            if let AngleEndpoint::QuarterPi(j) = e {
                ensure!(j <= 2, Input, "endpoint {j}·π/4 exceeds π/2");
            }
            let a = e.radians();
            ensure!(
                (0.0..=FRAC_PI_2 + ANGLE_SLACK).contains(&a),
                Input,
                "endpoint {a} outside [0, π/2]"
            );
        }
        ensure!(
            lo.radians() < hi.radians(),
            Input,
            "angle interval is empty"
        );
        Ok(AngleInterval { lo, hi })
    }

    pub fn first_quadrant() -> Self {
        AngleInterval {
            lo: AngleEndpoint::QuarterPi(0),
            hi: AngleEndpoint::QuarterPi(2),
        }
    }

    pub fn contains(&self, r: i64, s: i64) -> bool {
        self.lo.at_or_below(r, s) && !self.hi.at_or_below(r, s)
    }
}

/// `#{r + is : arg ∈ I, n = r² + s² ∈ [2R², 4R²], ω*(n) = k, gcd(n, 2m) = 1}`
/// by enumeration of `|r|, |s| ≤ 2R`.
pub fn keysums_count(m: u64, k: u32, interval: &AngleInterval, big_r: f64) -> Result<u64> {
    ensure!(m >= 1 && k >= 1, Input, "m and k must be positive");
    ensure!(
        big_r > 0.0 && big_r <= 1e4,
        Input,
        "R = {big_r} outside (0, 10^4]"
    );
    let lo = 2.0 * big_r * big_r;
    let hi = 4.0 * big_r * big_r;
    let bound = (2.0 * big_r).floor() as i64;
    let two_m = 2 * m;
    // Arguments in [0, π/2] need r, s ≥ 0.
    let count = (0..=bound)
        .into_par_iter()
        .map(|r| {
            let mut local = 0u64;
            for s in 0..=bound {
                if r == 0 && s == 0 {
                    continue;
                }
                let n = (r * r + s * s) as u64;
                let nf = n as f64;
                if nf < lo || nf > hi || gcd(n, two_m) != 1 {
                    continue;
                }
                if omega_star(n) == k && interval.contains(r, s) {
                    local += 1;
                }
            }
            local
        })
        .sum();
    Ok(count)
}

/// Summary of a run: the headline comparisons in one document.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub x: u64,
    pub n0: u64,
    pub r1_total: u64,
    pub moment2: u64,
    pub gcd_defect: u64,
    pub comparisons: Vec<AsymptoticComparison>,
}

pub fn run_summary(report: &TallyReport) -> Result<RunSummary> {
    let mut comparisons = vec![n0_main_term_check(report)?, gcd_defect_check(report)?];
    if report.x >= 1000 {
        comparisons.push(daniel_ratio(report)?);
    }
    Ok(RunSummary {
        x: report.x,
        n0: n0(report)?,
        r1_total: report.tally.r1_total,
        moment2: report.tally.moment2,
        gcd_defect: report.tally.gcd_defect,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::in_n;
    use crate::reps::r1_of;
    use crate::sieve::pair_sieve;

    fn report(x: u64) -> TallyReport {
        pair_sieve(x, 1 << 16, 2).unwrap()
    }

    #[test]
    fn n_r_table_small() {
        let rep = report(100);
        let table = n_r_table(&rep).unwrap();
        let mut brute = BTreeMap::new();
        for n in 2..=100 {
            let (r, _) = r1_of(n);
            if r > 0 {
                *brute.entry(r).or_insert(0u64) += 1;
            }
        }
        assert_eq!(table, brute);
        assert!(table[&2] >= 1);
        let weighted: u64 = table.iter().map(|(&r, &c)| r as u64 * c).sum();
        assert_eq!(weighted, 33);
    }

    #[test]
    fn pi_n_small() {
        let brute = |x: u64| {
            let mut out = BTreeMap::new();
            for n in (1..=x).filter(|&n| in_n(n)) {
                *out.entry(omega_star(n)).or_insert(0u64) += 1;
            }
            out
        };
        assert_eq!(pi_n_histogram(2, 1).unwrap(), BTreeMap::from([(0, 2)]));
        assert_eq!(pi_n_histogram(4, 1).unwrap(), BTreeMap::from([(0, 2)]));
        // 5, 10, 13, 17, 25, 26, 29.
        assert_eq!(pi_n_histogram(30, 1).unwrap().get(&1), Some(&7));
        for x in [30, 1000, 54_321] {
            assert_eq!(pi_n_histogram(x, 3).unwrap(), brute(x));
        }
        let rep = report(54_321);
        assert_eq!(pi_n_from_report(&rep).unwrap(), brute(54_321));
    }

    #[test]
    fn pi_n_far_tail() {
        let product = EulerProduct::new(1000).unwrap();
        let hist = pi_n_histogram(100, 1).unwrap();
        let cmp = compare_pi_n(100, 50, &hist, &product).unwrap();
        assert_eq!(cmp.empirical, 0.0);
        assert!(cmp.predicted < 1e-20);
    }

    #[test]
    fn defect_small() {
        let rep = report(100);
        let mut brute = 0u64;
        for p in [2u64, 3, 5, 7] {
            for a in 1..=10u64 {
                if a * a + p * p <= 100 && a % p == 0 {
                    brute += 1;
                }
            }
        }
        let cmp = gcd_defect_check(&rep).unwrap();
        assert_eq!(cmp.empirical as u64, brute);
        assert_eq!(brute, 9);
    }

    #[test]
    fn daniel_small() {
        let rep = report(1000);
        let cmp = daniel_ratio(&rep).unwrap();
        assert!(cmp.ratio.is_finite() && cmp.ratio > 0.0);
        assert!(daniel_ratio(&report(999)).is_err());
    }

    #[test]
    fn comparison_ratio_rules() {
        let c = AsymptoticComparison::new(10.0, 0.0, 5.0, "");
        assert_eq!(c.ratio, 0.0);
        assert!(AsymptoticComparison::new(10.0, 1.0, 0.0, "").ratio.is_nan());
    }

    #[test]
    fn keysums_examples() {
        let quadrant = AngleInterval::first_quadrant();
        // n = 9 gives (3, 0); n = 13 gives (2, 3) and (3, 2).
        assert_eq!(keysums_count(1, 1, &quadrant, 2.0).unwrap(), 3);
        assert_eq!(keysums_count(1, 99, &quadrant, 2.0).unwrap(), 0);
        let plain = keysums_count(1, 1, &quadrant, 30.0).unwrap();
        let restricted = keysums_count(13 * 17 * 29, 1, &quadrant, 30.0).unwrap();
        assert!(restricted < plain);
    }

    #[test]
    fn keysums_intervals_partition() {
        let e = |j| AngleEndpoint::QuarterPi(j);
        let low = AngleInterval::new(e(0), e(1)).unwrap();
        let high = AngleInterval::new(e(1), e(2)).unwrap();
        let split = AngleInterval::new(e(0), AngleEndpoint::Radians(0.3)).unwrap();
        let rest = AngleInterval::new(AngleEndpoint::Radians(0.3), e(2)).unwrap();
        for k in 1..4 {
            let whole = keysums_count(3, k, &AngleInterval::first_quadrant(), 40.0).unwrap();
            let a = keysums_count(3, k, &low, 40.0).unwrap();
            let b = keysums_count(3, k, &high, 40.0).unwrap();
            assert_eq!(a + b, whole);
            let c = keysums_count(3, k, &split, 40.0).unwrap();
            let d = keysums_count(3, k, &rest, 40.0).unwrap();
            assert_eq!(c + d, whole);
        }
        assert!(AngleInterval::new(e(1), e(1)).is_err());
        assert!(AngleInterval::new(e(2), e(1)).is_err());
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(
            AngleEndpoint::parse("pi/4").unwrap(),
            AngleEndpoint::QuarterPi(1)
        );
        assert_eq!(
            AngleEndpoint::parse("0.5").unwrap(),
            AngleEndpoint::Radians(0.5)
        );
        assert!(AngleEndpoint::parse("north").is_err());
    }

    #[test]
    fn main_contrib_bounds() {
        let rep = report(200_000);
        let narrow = main_contrib_fraction(&rep, 3.0, 0.1).unwrap();
        let wide = main_contrib_fraction(&rep, 3.0, 0.5).unwrap();
        assert!((0.0..=1.0).contains(&narrow) && (0.0..=1.0).contains(&wide));
        assert!(wide >= narrow);
        let mut empty = rep.clone();
        empty.tally.joint = Default::default();
        assert!(matches!(
            main_contrib_fraction(&empty, 3.0, 0.1),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn n0_main_term_at_small_scale() {
        let rep = report(1_000_000);
        let cmp = n0_main_term_check(&rep).unwrap();
        assert!(cmp.empirical < cmp.predicted);
        assert!(sumidff_constant(&rep).unwrap().is_finite());
        let profile = moment_profile(&rep).unwrap();
        assert_eq!(
            profile.by_k.values().sum::<u64>(),
            rep.tally.moment2 - outside_moment2(&rep)
        );
    }

    fn outside_moment2(rep: &TallyReport) -> u64 {
        rep.tally
            .outside
            .iter()
            .map(|(r, c)| c * (r as u64 * (r as u64).saturating_sub(1) / 2))
            .sum()
    }

    #[test]
    fn csv_and_json() {
        let rows = vec![AsymptoticComparison::new(100.0, 1.0, 2.0, "a note")];
        let csv = comparisons_csv(&rows);
        assert!(csv.starts_with("x,empirical,predicted,ratio,note\n"));
        let json = comparisons_json(&rows).unwrap();
        assert!(json.contains("\"ratio\": 0.5"));
    }
}
