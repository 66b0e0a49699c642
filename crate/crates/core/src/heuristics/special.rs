//! Γ, adaptive quadrature and compensated summation.

use crate::error::{ensure, Error, Result};

/// Above this the statrs Lanczos evaluation overflows before Γ does.
const STATRS_GAMMA_MAX: f64 = 140.0;

/// Γ(s) for `s ∈ (0, 200)`.
///
/// Values beyond the `f64` range (`s ≳ 171.6`) are reported as a numerical
/// error; use [`ln_gamma`] there.
pub fn gamma_fn(s: f64) -> Result<f64> {
    ensure!(
        s > 0.0 && s < 200.0,
        Domain,
        "Γ(s) requires s in (0, 200), got {s}"
    );
    let value = if s <= STATRS_GAMMA_MAX {
        statrs::function::gamma::gamma(s)
    } else {
        // Γ(s) = Γ(s − k)·(s − k)(s − k + 1)···(s − 1).
        let k = (s - STATRS_GAMMA_MAX).ceil();
        let mut value = statrs::function::gamma::gamma(s - k);
        let mut t = s - k;
        while t < s - 0.5 {
            value *= t;
            t += 1.0;
        }
        value
    };
    ensure!(value.is_finite(), Numerical, "Γ({s}) overflows f64");
    Ok(value)
}

pub fn ln_gamma(s: f64) -> f64 {
    statrs::function::gamma::ln_gamma(s)
}

/// ln(n!).
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 20 {
        return ((2..=n).product::<u64>() as f64).ln();
    }
    ln_gamma(n as f64 + 1.0)
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Result of [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]` to an
/// absolute-or-relative tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    ensure!(
        a.is_finite() && b.is_finite() && a < b,
        Input,
        "bad interval [{a}, {b}]"
    );
    ensure!(tol > 0.0, Input, "tolerance must be positive");
    const MAX_INTERVALS: usize = 4000;

    let (v, e) = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::Numerical("integrand is not finite".into()));
        }
        if err <= tol * total.abs().max(1.0) || err <= tol {
            let mut sum = CompensatedSum::default();
            pieces.iter().for_each(|p| sum.add(p.2));
            return Ok(Quadrature {
                value: sum.value(),
                error_estimate: err,
                evaluations,
            });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Numerical(format!(
                "quadrature did not reach {tol:e} (estimate {err:e})"
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma_fn(1.0).unwrap(), 1.0) < 1e-12);
        assert!(rel(gamma_fn(0.5).unwrap(), PI.sqrt()) < 1e-12);
        assert!(rel(gamma_fn(5.0).unwrap(), 24.0) < 1e-12);
        let mut fact = 1.0f64;
        for n in 1..=170u32 {
            fact *= n as f64;
            assert!(
                rel(gamma_fn(n as f64 + 1.0).unwrap(), fact) < 1e-12,
                "n = {n}"
            );
        }
        // Γ(s + 1) = s Γ(s) on a non-integer ladder.
        for i in 1..400 {
            let s = i as f64 * 0.37;
            if s + 1.0 >= 171.0 {
                break;
            }
            let lhs = gamma_fn(s + 1.0).unwrap();
            let rhs = s * gamma_fn(s).unwrap();
            assert!(rel(lhs, rhs) < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn gamma_domain() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(200.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(180.0), Err(Error::Numerical(_))));
    }

    #[test]
    fn quadrature_smoke() {
        let q = integrate(|x| x.exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let q = integrate(|x| 1.0 / x, 1.0, 2.0, 1e-13).unwrap();
        assert!((q.value - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-13)).abs() < 1e-16);
    }
}
