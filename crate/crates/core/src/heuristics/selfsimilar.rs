//! The doubling-invariant sum f_R(β) = Σ_m (2^m β)^R e^{−2^m β}.

use serde::Serialize;

use super::special::CompensatedSum;
use crate::error::{ensure, Result};

/// f_R(β) in logarithmic form, with the truncation window and the analytic
/// bounds on the two discarded tails (relative to the returned sum).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SelfSimilarSum {
    pub ln_value: f64,
    pub m_lo: i32,
    pub m_hi: i32,
    pub lower_tail_bound: f64,
    pub upper_tail_bound: f64,
}

impl SelfSimilarSum {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// Exponent `m0` with `β·2^{m0}` in `[R/√2, R·√2)`, where the terms peak.
/// Found by exact doubling so that β and 2β share the same point `z`.
fn peak(big_r: f64, beta: f64) -> (i32, f64) {
    let lo = big_r * std::f64::consts::FRAC_1_SQRT_2;
    let hi = big_r * std::f64::consts::SQRT_2;
    let (mut m, mut z) = (0i32, beta);
    while z < lo {
        z *= 2.0;
        m += 1;
    }
    while z >= hi {
        z *= 0.5;
        m -= 1;
    }
    (m, z)
}

#[inline]
fn ln_term(big_r: f64, z: f64) -> f64 {
    big_r * z.ln() - z
}

/// Evaluates f_R(β) until each tail is below `tol` times the partial sum.
pub fn f_r_detailed(big_r: f64, beta: f64, tol: f64) -> Result<SelfSimilarSum> {
    ensure!(
        big_r.is_finite() && big_r > 0.0,
        Domain,
        "f_R needs R > 0, got {big_r}"
    );
    ensure!(
        beta.is_finite() && beta > 0.0,
        Domain,
        "f_R needs β > 0, got {beta}"
    );
    ensure!(
        tol > 0.0 && tol <= 1e-6,
        Domain,
        "tolerance {tol} not in (0, 1e-6]"
    );

    let (m0, z0) = peak(big_r, beta);
    let l0 = ln_term(big_r, z0);
    let ln2 = std::f64::consts::LN_2;

    // Terms are scaled by the peak term; every term is at most a small
    // multiple of it, so nothing overflows.
    let mut terms = vec![1.0f64];
    let mut partial = 1.0f64;

    // Upward: t_{m+1}/t_m = 2^R e^{−z_m}, decreasing in m.
    let (mut z, mut m_hi) = (z0, m0);
    let upper_tail_bound = loop {
        let q = (big_r * ln2 - z).exp();
        let last = (ln_term(big_r, z) - l0).exp();
        if q < 1.0 {
            let bound = last * q / (1.0 - q) / partial;
            if bound < tol {
                break bound;
            }
        }
        z *= 2.0;
        m_hi += 1;
        let t = (ln_term(big_r, z) - l0).exp();
        terms.push(t);
        partial += t;
    };

    // Downward: t_{m−1}/t_m = 2^{−R} e^{z_m/2}, decreasing as m falls.
    let (mut z, mut m_lo) = (z0, m0);
    let lower_tail_bound = loop {
        let q = (0.5 * z - big_r * ln2).exp();
        let last = (ln_term(big_r, z) - l0).exp();
        if q < 1.0 {
            let bound = last * q / (1.0 - q) / partial;
            if bound < tol {
                break bound;
            }
        }
        z *= 0.5;
        m_lo -= 1;
        let t = (ln_term(big_r, z) - l0).exp();
        terms.push(t);
        partial += t;
    };

    let mut sum = CompensatedSum::default();
    for t in &terms {
        sum.add(*t);
    }
    Ok(SelfSimilarSum {
        ln_value: l0 + sum.value().ln(),
        m_lo: m_lo - m0,
        m_hi: m_hi - m0,
        lower_tail_bound,
        upper_tail_bound,
    })
}

/// f_R(β).
pub fn f_r(big_r: f64, beta: f64, tol: f64) -> Result<f64> {
    Ok(f_r_detailed(big_r, beta, tol)?.value())
}

/// ln f_R(β), finite even when f_R itself overflows.
pub fn ln_f_r(big_r: f64, beta: f64, tol: f64) -> Result<f64> {
    Ok(f_r_detailed(big_r, beta, tol)?.ln_value)
}
