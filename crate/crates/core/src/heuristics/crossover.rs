//! Comparison of ψ_r and ψ_{r+1} through f_{r−1−τ}(β) ≥ f_{r−τ}(β)/(r+1).

use rayon::prelude::*;
use serde::Serialize;

use super::selfsimilar::ln_f_r;
use super::tau;
use crate::error::{ensure, Result};

const TOL: f64 = 1e-14;

/// Outcome of the inequality over the β grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    HoldsEverywhere,
    FailsSomewhere { witness_beta: f64 },
}

/// Families of β values proportional to `r − τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    /// β = (7/6)(r − τ).
    SevenSixths,
    /// β = (6/5)(r − τ).
    SixFifths,
    /// β = (5/6)(r − τ), the point reached by `x = exp(6·2^m/(5(r − τ)))`.
    FiveSixths,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::SevenSixths, Family::SixFifths, Family::FiveSixths];

    pub fn factor(self) -> f64 {
        match self {
            Family::SevenSixths => 7.0 / 6.0,
            Family::SixFifths => 6.0 / 5.0,
            Family::FiveSixths => 5.0 / 6.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Family::SevenSixths => "7/6",
            Family::SixFifths => "6/5",
            Family::FiveSixths => "5/6",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpecialPoint {
    pub family: Family,
    /// The family point reduced into (1, 2].
    pub beta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverReport {
    pub r: u32,
    pub beta_grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub verdict: Verdict,
    pub special_points: Vec<SpecialPoint>,
}

impl CrossoverReport {
    pub fn special(&self, family: Family) -> &SpecialPoint {
        self.special_points
            .iter()
            .find(|p| p.family == family)
            .expect("every family is evaluated")
    }
}

/// Reduces β into (1, 2] by powers of two.
pub fn reduce_beta(mut beta: f64) -> f64 {
    while beta > 2.0 {
        beta *= 0.5;
    }
    while beta <= 1.0 {
        beta *= 2.0;
    }
    beta
}

/// `(ln lhs, ln rhs)` at β.
fn sides(r: u32, beta: f64) -> Result<(f64, f64)> {
    let t = tau();
    let lhs = ln_f_r(r as f64 - 1.0 - t, beta, TOL)?;
    let rhs = ln_f_r(r as f64 - t, beta, TOL)? - ((r + 1) as f64).ln();
    Ok((lhs, rhs))
}

fn scan_one(r: u32, grid_points: u32) -> Result<CrossoverReport> {
    let mut report = CrossoverReport {
        r,
        beta_grid: Vec::with_capacity(grid_points as usize),
        lhs: Vec::with_capacity(grid_points as usize),
        rhs: Vec::with_capacity(grid_points as usize),
        verdict: Verdict::HoldsEverywhere,
        special_points: Vec::new(),
    };
    for i in 1..=grid_points {
        let beta = 2f64.powf(i as f64 / grid_points as f64);
        let (l, h) = sides(r, beta)?;
        if l < h && report.verdict == Verdict::HoldsEverywhere {
            report.verdict = Verdict::FailsSomewhere { witness_beta: beta };
        }
        report.beta_grid.push(beta);
        report.lhs.push(l.exp());
        report.rhs.push(h.exp());
    }
    for family in Family::ALL {
        let beta = reduce_beta(family.factor() * (r as f64 - tau()));
        let (l, h) = sides(r, beta)?;
        report.special_points.push(SpecialPoint {
            family,
            beta,
            lhs: l.exp(),
            rhs: h.exp(),
            holds: l >= h,
        });
    }
    Ok(report)
}

/// Evaluates the inequality for each `r` in `[r_min, r_max]` on a
/// log-uniform grid `β = 2^{i/grid_points}`, `i = 1..=grid_points`, and at
/// the family points.
pub fn crossover_scan(r_min: u32, r_max: u32, grid_points: u32) -> Result<Vec<CrossoverReport>> {
    ensure!(
        2 <= r_min && r_min <= r_max && r_max <= 100,
        Input,
        "need 2 ≤ r_min ≤ r_max ≤ 100, got [{r_min}, {r_max}]"
    );
    ensure!(
        grid_points >= 64,
        Input,
        "need at least 64 grid points, got {grid_points}"
    );
    (r_min..=r_max)
        .into_par_iter()
        .map(|r| scan_one(r, grid_points))
        .collect()
}

/// First `r` at which the family verdict differs from the verdict at the
/// start of the scan.
pub fn family_transition(reports: &[CrossoverReport], family: Family) -> Option<u32> {
    let first = reports.first()?.special(family).holds;
    reports
        .iter()
        .find(|rep| rep.special(family).holds != first)
        .map(|rep| rep.r)
}

/// CSV `r,beta,lhs,rhs,verdict,point`, one row per grid point and family
/// point; `verdict` is `holds` or `fails` for that row.
pub fn crossover_csv(reports: &[CrossoverReport]) -> String {
    use crate::csv::float;
    let mut table = crate::csv::Table::new(["r", "beta", "lhs", "rhs", "verdict", "point"]);
    let word = |holds: bool| if holds { "holds" } else { "fails" }.to_string();
    for rep in reports {
        for i in 0..rep.beta_grid.len() {
            table.row([
                rep.r.to_string(),
                float(rep.beta_grid[i]),
                float(rep.lhs[i]),
                float(rep.rhs[i]),
                word(rep.lhs[i] >= rep.rhs[i]),
                "grid".to_string(),
            ]);
        }
        for p in &rep.special_points {
            table.row([
                rep.r.to_string(),
                float(p.beta),
                float(p.lhs),
                float(p.rhs),
                word(p.holds),
                p.family.label().to_string(),
            ]);
        }
    }
    table.render()
}
