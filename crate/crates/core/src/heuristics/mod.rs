//! Constants and periodic functions of the probabilistic model for r₁*(n).
//!
//! The model treats each of the `R = r₀*(n)` primitive representations of
//! `n ≤ x` as having a prime second coordinate independently with
//! probability `1/log √x`. Summed over the dominant range of ω*(n) this
//! predicts `N_r(x)` up to a 1-periodic factor ψ_r of `log log x / log 2`.

mod crossover;
mod psi;
mod selfsimilar;
pub mod special;

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::arith::{primes_up_to, PrimeTable};
use crate::error::{ensure, Error, Result};
use special::{ln_factorial, ln_gamma, CompensatedSum};

pub use crossover::{
    crossover_csv, crossover_scan, family_transition, reduce_beta, CrossoverReport, Family,
    SpecialPoint, Verdict,
};
pub use psi::{beta_of_t, psi_curve_csv, StarVariant};
pub use selfsimilar::{f_r, f_r_detailed, ln_f_r, SelfSimilarSum};
pub use special::gamma_fn;

/// Number of primes used for κ unless configured otherwise.
pub const DEFAULT_PRIME_LIMIT: u64 = 10_000_000;

/// δ = 1 − (1 + log log 2)/log 2, the multiplication table constant.
pub fn delta() -> f64 {
    1.0 - (1.0 + LN_2.ln()) / LN_2
}

/// τ = log(1/log 2)/log 2.
pub fn tau() -> f64 {
    (1.0 / LN_2).ln() / LN_2
}

/// λ = 1/log 2.
pub fn lambda() -> f64 {
    1.0 / LN_2
}

/// The Euler product c_κ, evaluated over a fixed prime table.
#[derive(Clone, Debug)]
pub struct EulerProduct {
    primes: PrimeTable,
}

impl EulerProduct {
    pub fn new(prime_limit: u64) -> Result<Self> {
        ensure!(
            prime_limit >= 1000,
            Input,
            "prime limit {prime_limit} is below 1000"
        );
        Ok(EulerProduct {
            primes: primes_up_to(prime_limit)?,
        })
    }

    pub fn from_table(primes: PrimeTable) -> Self {
        EulerProduct { primes }
    }

    pub fn prime_limit(&self) -> u64 {
        self.primes.limit()
    }

    /// ln c_κ for any κ ≥ 0.
    pub fn ln_c(&self, kappa: f64) -> Result<f64> {
        ensure!(
            kappa.is_finite() && kappa >= 0.0,
            Domain,
            "c_κ needs κ ≥ 0, got {kappa}"
        );
        let mut acc = CompensatedSum::default();
        for &p in self.primes.primes().iter().skip(1) {
            let pf = p as f64;
            let damp = kappa * (-1.0 / pf).ln_1p();
            if p % 4 == 1 {
                let boost = 2.0 * kappa / (pf - 1.0);
                if 1.0 + boost <= 0.0 {
                    return Err(Error::Numerical(format!("non-positive factor at p = {p}")));
                }
                acc.add(boost.ln_1p() + damp);
            } else {
                acc.add(damp);
            }
        }
        Ok(3f64.ln() - (kappa + 2.0) * LN_2 - ln_gamma(kappa + 1.0) + acc.value())
    }

    pub fn c(&self, kappa: f64) -> Result<f64> {
        Ok(self.ln_c(kappa)?.exp())
    }
}

/// c_κ over the primes up to `prime_limit`, for κ ∈ [0, 4].
pub fn euler_product_c_kappa(kappa_param: f64, prime_limit: u64) -> Result<f64> {
    ensure!(
        (0.0..=4.0).contains(&kappa_param),
        Domain,
        "κ = {kappa_param} outside [0, 4]"
    );
    EulerProduct::new(prime_limit)?.c(kappa_param)
}

/// δ, τ, λ, c_λ and κ = c_λ·√((2λ)³/π).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    pub delta: f64,
    pub tau: f64,
    pub lambda: f64,
    /// c_κ at κ = λ.
    pub c_lambda: f64,
    pub kappa: f64,
    pub prime_limit_used: u64,
}

impl Constants {
    pub fn from_product(product: &EulerProduct) -> Result<Self> {
        let lambda = lambda();
        let c_lambda = product.c(lambda)?;
        Ok(Constants {
            delta: delta(),
            tau: tau(),
            lambda,
            c_lambda,
            kappa: c_lambda * ((2.0 * lambda).powi(3) / PI).sqrt(),
            prime_limit_used: product.prime_limit(),
        })
    }

    /// Rows `(name, value)` in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("delta", self.delta),
            ("tau", self.tau),
            ("lambda", self.lambda),
            ("c_lambda", self.c_lambda),
            ("kappa", self.kappa),
        ]
    }

    /// CSV with columns `name,value,prime_limit`.
    pub fn to_csv(&self) -> String {
        let mut table = crate::csv::Table::new(["name", "value", "prime_limit"]);
        for (name, value) in self.rows() {
            table.row([
                name.to_string(),
                crate::csv::float(value),
                self.prime_limit_used.to_string(),
            ]);
        }
        table.render()
    }
}

pub fn compute_constants(prime_limit: u64) -> Result<Constants> {
    Constants::from_product(&EulerProduct::new(prime_limit)?)
}

/// Binomial model: `P(r₁*(n) = r)` given `r₀*(n) = R`, with success
/// probability `1/log √x`. Takes `log x` so that astronomically large `x`
/// stay representable.
pub fn heuristic_pmf(big_r: u64, log_x: f64, r: u64) -> Result<f64> {
    ensure!(r <= big_r, Domain, "r = {r} exceeds R = {big_r}");
    ensure!(
        log_x.is_finite() && log_x >= 100f64.ln() - 1e-12,
        Domain,
        "model needs x ≥ 100, got log x = {log_x}"
    );
    let p = 2.0 / log_x;
    let ln_choose = ln_factorial(big_r) - ln_factorial(r) - ln_factorial(big_r - r);
    let ln = ln_choose + r as f64 * p.ln() + (big_r - r) as f64 * (-p).ln_1p();
    Ok(ln.exp())
}

/// What [`Model::predict`] should estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionKind {
    /// `N_r(x)` for `r ≥ 2`.
    NR { r: u32 },
    /// `π_𝒩(x; k, r) = #{n ≤ x : ω*(n) = k, r₁(n) = r}`.
    PiNKR { k: u32, r: u32 },
}

/// κ-dependent quantities: ψ_r, ψ*, and the predictions built from them.
#[derive(Clone, Copy, Debug)]
pub struct Model {
    pub constants: Constants,
}

/// `x` below which log log x < 1.
pub const MIN_PREDICT_X: f64 = 15.154_262_241_479_262; // e^e

impl Model {
    pub fn new(constants: Constants) -> Self {
        Model { constants }
    }

    pub fn with_prime_limit(prime_limit: u64) -> Result<Self> {
        Ok(Model::new(compute_constants(prime_limit)?))
    }

    pub fn kappa(&self) -> f64 {
        self.constants.kappa
    }

    /// Heuristic estimate of the requested count at `x`.
    pub fn predict(&self, kind: PredictionKind, x: f64) -> Result<f64> {
        ensure!(
            x.is_finite() && x >= MIN_PREDICT_X,
            Domain,
            "predictions need x ≥ e^e, got {x}"
        );
        let log_x = x.ln();
        let ll = log_x.ln();
        let scale = x / log_x.powf(1.0 + self.constants.delta) / ll.sqrt();
        match kind {
            PredictionKind::NR { r } => {
                ensure!(r >= 2, Domain, "N_r prediction needs r ≥ 2, got {r}");
                Ok(self.psi_r(r, ll / LN_2)? * scale)
            }
            PredictionKind::PiNKR { k, r } => {
                // α_k = 2^{k+1}/log x = 2^{k−K} α_K.
                let alpha = ((k as f64 + 1.0) * LN_2 - ll).exp();
                let exponent = r as f64 - 1.0 - self.constants.tau;
                let ln = exponent * alpha.ln() - alpha - ln_factorial(r as u64);
                Ok(self.kappa() * scale * ln.exp())
            }
        }
    }
}

/// `(L, K)` with `L = log log x` and `K = ⌊L/log 2⌋`, checking that
/// `2^K ∈ (½ log x, log x]`.
pub fn log_scales(x: f64) -> Result<(f64, i32)> {
    ensure!(
        x > std::f64::consts::E,
        Domain,
        "log log x needs x > e, got {x}"
    );
    let log_x = x.ln();
    let ll = log_x.ln();
    let k = (ll / LN_2).floor() as i32;
    let pow = 2f64.powi(k);
    if !(pow > 0.5 * log_x && pow <= log_x) {
        return Err(Error::Invariant(format!(
            "2^K = {pow} not in (½ log x, log x] = ({}, {log_x}] at x = {x}",
            0.5 * log_x
        )));
    }
    Ok((ll, k))
}
