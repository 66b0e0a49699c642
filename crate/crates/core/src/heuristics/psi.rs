//! The 1-periodic amplitudes ψ_r and ψ₀*, ψ₁*, ψ₂*.

use std::f64::consts::LN_2;

use statrs::function::gamma::gamma_lr;

use super::selfsimilar::ln_f_r;
use super::special::{ln_factorial, ln_gamma, CompensatedSum};
use super::Model;
use crate::error::{ensure, Error, Result};

/// Internal tolerance for the bilateral sums behind ψ.
const PSI_TOL: f64 = 1e-16;

/// Beyond this point `e^{−z}` is below 1e−21 and the kernels are pure powers.
const Z_TOP: f64 = 50.0;

/// β = 2^{1 − {t}} ∈ (1, 2].
pub fn beta_of_t(t: f64) -> f64 {
    2f64.powf(1.0 - (t - t.floor()))
}

/// Which of ψ₀*, ψ₁*, ψ₂*.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StarVariant {
    Zero,
    One,
    Two,
}

impl TryFrom<u8> for StarVariant {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(StarVariant::Zero),
            1 => Ok(StarVariant::One),
            2 => Ok(StarVariant::Two),
            _ => Err(Error::Input(format!(
                "ψ* variant must be 0, 1 or 2, got {v}"
            ))),
        }
    }
}

/// Σ_{j≥2} c_j (−z)^j / j! for `z < 1`, with `c_j = 1` or `c_j = j − 1`.
fn small_z_series(z: f64, weighted: bool) -> f64 {
    let mut term = z; // (−1)^1 z^1/1! up to sign
    let mut sum = 0.0;
    for j in 2..=30u32 {
        term *= z / j as f64;
        let signed = if j % 2 == 0 { term } else { -term };
        sum += if weighted {
            (j - 1) as f64 * signed
        } else {
            signed
        };
        if term < 1e-20 * sum.abs() {
            break;
        }
    }
    sum
}

/// Summand of ψ* at `z = 2^m β`, without the factor κ.
fn kernel(variant: StarVariant, tau: f64, z: f64) -> f64 {
    let low = z.powf(-1.0 - tau);
    match variant {
        StarVariant::One => z.powf(-tau) * -(-z).exp_m1(),
        StarVariant::Zero if z < 1.0 => low * small_z_series(z, false),
        StarVariant::Zero => low * ((-z).exp() - 1.0 + z),
        StarVariant::Two if z < 1.0 => low * small_z_series(z, true),
        StarVariant::Two => low * (-(-z).exp_m1() - z * (-z).exp()),
    }
}

/// Σ_{j≥0} kernel(z·2^j) for `z ≥ Z_TOP`, where e^{−z} is negligible.
fn kernel_upper_tail(variant: StarVariant, tau: f64, z: f64) -> f64 {
    let a = z.powf(-tau) / (1.0 - 2f64.powf(-tau));
    let b = z.powf(-1.0 - tau) / (1.0 - 2f64.powf(-1.0 - tau));
    match variant {
        StarVariant::One => a,
        StarVariant::Two => b,
        StarVariant::Zero => a - b,
    }
}

/// Σ_m g(2^m β) for a positive `g` decaying geometrically at both ends,
/// starting from the representative of β in `[1, 2)`. `g_top` sums the
/// terms from the first point at or above `z_top`.
fn bilateral(
    beta: f64,
    z_top: f64,
    mut g: impl FnMut(f64) -> f64,
    g_top: impl FnOnce(f64) -> f64,
) -> f64 {
    let mut z0 = beta;
    while z0 >= 2.0 {
        z0 *= 0.5;
    }
    while z0 < 1.0 {
        z0 *= 2.0;
    }
    let mut sum = CompensatedSum::default();
    let mut z = z0;
    while z < z_top {
        sum.add(g(z));
        z *= 2.0;
    }
    sum.add(g_top(z));
    let mut z = 0.5 * z0;
    loop {
        let t = g(z);
        sum.add(t);
        if t <= PSI_TOL * sum.value() || z < f64::MIN_POSITIVE {
            break;
        }
        z *= 0.5;
    }
    sum.value()
}

impl Model {
    /// ψ_r(t) = (κ/r!)·f_{r−1−τ}(2^{1−{t}}), for `r ≥ 2`.
    ///
    /// At `r = 1` the exponent is negative and the sum diverges.
    pub fn psi_r(&self, r: u32, t: f64) -> Result<f64> {
        ensure!(r >= 2, Domain, "ψ_r diverges for r = {r}; need r ≥ 2");
        ensure!(t.is_finite(), Input, "t must be finite");
        let big_r = r as f64 - 1.0 - self.constants.tau;
        let ln = self.kappa().ln() - ln_factorial(r as u64) + ln_f_r(big_r, beta_of_t(t), PSI_TOL)?;
        Ok(ln.exp())
    }

    /// ∫₀¹ ψ_r(t) dt = κ·Γ(r−1−τ)/(r!·log 2).
    pub fn psi_r_average(&self, r: u32) -> Result<f64> {
        ensure!(r >= 2, Domain, "ψ_r diverges for r = {r}; need r ≥ 2");
        let big_r = r as f64 - 1.0 - self.constants.tau;
        Ok((self.kappa().ln() + ln_gamma(big_r) - ln_factorial(r as u64)).exp() / LN_2)
    }

    /// ψ₀*(t), ψ₁*(t) or ψ₂*(t).
    pub fn psi_star(&self, variant: StarVariant, t: f64) -> Result<f64> {
        ensure!(t.is_finite(), Input, "t must be finite");
        let tau = self.constants.tau;
        let s = bilateral(
            beta_of_t(t),
            Z_TOP,
            |z| kernel(variant, tau, z),
            |z| kernel_upper_tail(variant, tau, z),
        );
        Ok(self.kappa() * s)
    }

    /// The part of ψ₂* (or ψ₁*) carried by `r > r_max`:
    /// `Σ_{r>r_max} ψ_r` (or `Σ_{r>r_max} r·ψ_r`), in closed form through
    /// the regularized incomplete gamma function.
    pub fn psi_star_remainder(&self, variant: StarVariant, r_max: u32, t: f64) -> Result<f64> {
        ensure!(r_max >= 1, Input, "r_max must be at least 1");
        let tau = self.constants.tau;
        // e^{−z}·Σ_{r≥n} z^r/r! = P(n, z).
        let (exponent, n) = match variant {
            StarVariant::Two => (-1.0 - tau, r_max as f64 + 1.0),
            StarVariant::One => (-tau, r_max as f64),
            StarVariant::Zero => {
                return Err(Error::Input("ψ₀* has no single-r expansion".into()));
            }
        };
        let z_top = 4.0 * n + 100.0;
        let s = bilateral(
            beta_of_t(t),
            z_top,
            |z| z.powf(exponent) * gamma_lr(n, z),
            |z| z.powf(exponent) / (1.0 - 2f64.powf(exponent)),
        );
        Ok(self.kappa() * s)
    }
}

/// CSV `t,r,psi` over `t = i/samples` for `i < samples` and each `r`.
pub fn psi_curve_csv(model: &Model, rs: &[u32], samples: u32) -> Result<String> {
    ensure!(samples >= 1, Input, "need at least one sample");
    let mut table = crate::csv::Table::new(["t", "r", "psi"]);
    for &r in rs {
        for i in 0..samples {
            let t = i as f64 / samples as f64;
            let v = model.psi_r(r, t)?;
            table.row([crate::csv::float(t), r.to_string(), crate::csv::float(v)]);
        }
    }
    Ok(table.render())
}

#[cfg(test)]
mod tests {
    use super::super::special::integrate;
    use super::super::{lambda, tau, Constants};
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// κ is a scale factor in every identity below; a fixed stand-in keeps
    /// the tests independent of the Euler product.
    fn model() -> Model {
        Model::new(Constants {
            delta: super::super::delta(),
            tau: tau(),
            lambda: lambda(),
            c_lambda: 0.0,
            kappa: 0.293_567,
            prime_limit_used: 0,
        })
    }

    #[test]
    fn beta_range() {
        assert_eq!(beta_of_t(0.0), 2.0);
        assert_eq!(beta_of_t(3.0), 2.0);
        let b = beta_of_t(0.999_999);
        assert!(b > 1.0 && b < 1.000_001);
    }

    #[test]
    fn periodicity() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let r = rng.gen_range(2..=30);
            let t: f64 = rng.gen();
            let a = m.psi_r(r, t).unwrap();
            let b = m.psi_r(r, t + 1.0).unwrap();
            assert!(((a - b) / a).abs() < 1e-12, "r = {r}, t = {t}");
        }
    }

    #[test]
    fn averages() {
        let m = model();
        for r in [2, 5, 10] {
            let q = integrate(|t| m.psi_r(r, t).unwrap(), 0.0, 1.0, 1e-12).unwrap();
            let want = m.psi_r_average(r).unwrap();
            assert!(((q.value - want) / want).abs() < 1e-8, "r = {r}");
        }
    }

    #[test]
    fn r_one_is_rejected() {
        assert!(matches!(model().psi_r(1, 0.3), Err(Error::Domain(_))));
        assert!(model().psi_r(2, 0.5).unwrap() > 0.0);
    }

    #[test]
    fn star_linear_identity() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t: f64 = rng.gen();
            let s0 = m.psi_star(StarVariant::Zero, t).unwrap();
            let s1 = m.psi_star(StarVariant::One, t).unwrap();
            let s2 = m.psi_star(StarVariant::Two, t).unwrap();
            assert!((s0 - (s1 - s2)).abs() < 1e-10);
        }
    }

    #[test]
    fn star_series_with_remainder() {
        let m = model();
        for t in [0.0, 0.17, 0.5, 0.93] {
            let mut plain = CompensatedSum::default();
            let mut weighted = CompensatedSum::default();
            for r in 2..=60 {
                let p = m.psi_r(r, t).unwrap();
                plain.add(p);
                weighted.add(r as f64 * p);
            }
            let two = m.psi_star(StarVariant::Two, t).unwrap();
            let one = m.psi_star(StarVariant::One, t).unwrap();
            let rem2 = m.psi_star_remainder(StarVariant::Two, 60, t).unwrap();
            let rem1 = m.psi_star_remainder(StarVariant::One, 60, t).unwrap();
            assert!((plain.value() + rem2 - two).abs() < 1e-9 * two, "t = {t}");
            assert!(
                (weighted.value() + rem1 - one).abs() < 1e-9 * one,
                "t = {t}"
            );
        }
    }

    #[test]
    fn remainder_vanishes_for_small_sums() {
        // With r_max = 1 the remainder is the whole of ψ₂*.
        let m = model();
        let all = m.psi_star_remainder(StarVariant::Two, 1, 0.4).unwrap();
        let two = m.psi_star(StarVariant::Two, 0.4).unwrap();
        assert!(((all - two) / two).abs() < 1e-12);
    }

    #[test]
    fn small_z_kernels_match_direct_form() {
        for z in [0.9f64, 0.5, 0.1] {
            let direct = (-z).exp() - 1.0 + z;
            assert!((small_z_series(z, false) - direct).abs() < 1e-15);
            let direct = 1.0 - (1.0 + z) * (-z).exp();
            assert!((small_z_series(z, true) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_csv_shape() {
        let csv = psi_curve_csv(&model(), &[2, 3], 4).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,r,psi");
        assert_eq!(lines.len(), 9);
    }

    proptest! {
        #[test]
        fn star_periodic(t in -5.0f64..5.0) {
            let m = model();
            for v in [StarVariant::Zero, StarVariant::One, StarVariant::Two] {
                let a = m.psi_star(v, t).unwrap();
                let b = m.psi_star(v, t + 1.0).unwrap();
                prop_assert!(((a - b) / a).abs() < 1e-12);
            }
        }
    }
}
