//! Admissibility checks for a parameter set and its phenotype laws.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::laws::PhenotypeLaws;
use crate::model::params::ModelParams;

/// A modelling constraint that a runnable configuration must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    Positivity,
    GridAlignment,
    RandomMoveProbability,
    PhenotypeSwitchProbability,
    HaptotaxisBound,
    ProliferationBound,
    MdeStability,
    SensitivityLaw,
    ProliferationLaw,
    SecretionLaw,
}

impl Constraint {
    /// The inequality or law property this constraint enforces.
    pub fn statement(self) -> &'static str {
        match self {
            Constraint::Positivity => {
                "rates, steps and domain lengths positive; p_min, zeta non-negative"
            }
            Constraint::GridAlignment => "x_max / dx and y_max / dy must be whole numbers",
            Constraint::RandomMoveProbability => "random-movement probability 0 < theta <= 1",
            Constraint::PhenotypeSwitchProbability => {
                "phenotype-switching probability 0 < beta <= 1"
            }
            Constraint::HaptotaxisBound => "haptotaxis bound eta * max_y mu(y) <= 1",
            Constraint::ProliferationBound => {
                "proliferation-probability bound tau * sup|R(y, rho)| <= 1"
            }
            Constraint::MdeStability => "MDE update positivity tau * (2 D_M / dx^2 + kappa_M) <= 1",
            Constraint::SensitivityLaw => "mu(0) = 0 and mu strictly increasing",
            Constraint::ProliferationLaw => "r(0) = 1, r(y_max) = 0 and r strictly decreasing",
            Constraint::SecretionLaw => "p(0) = p_min > 0 and p strictly increasing",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.statement())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

/// Every violated constraint; empty means the configuration is runnable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn cites(&self, constraint: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }

    fn push(&mut self, constraint: Constraint, detail: String) {
        self.violations.push(Violation { constraint, detail });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "- {}: {}", v.constraint, v.detail)?;
        }
        Ok(())
    }
}

const ALIGN_TOL: f64 = 1e-9;

/// Checks a parameter set and law choice against every admissibility rule.
pub fn validate_config(params: &ModelParams, laws: &PhenotypeLaws) -> ValidationReport {
    let mut report = ValidationReport::default();
    let b = &params.base;

    let positive = [
        ("tau", b.tau),
        ("dx", b.dx),
        ("dy", b.dy),
        ("eps", b.eps),
        ("x_max", b.x_max),
        ("y_max", b.y_max),
        ("alpha", b.alpha),
        ("rho_max", b.rho_max),
        ("e_max", b.e_max),
        ("kappa_m", b.kappa_m),
        ("kappa_e", b.kappa_e),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            report.push(Constraint::Positivity, format!("{name} = {v:e} must be > 0"));
        }
    }
    for (name, v) in [("t_final", b.t_final), ("p_min", b.p_min), ("zeta", b.zeta)] {
        if !(v >= 0.0 && v.is_finite()) {
            report.push(Constraint::Positivity, format!("{name} = {v:e} must be >= 0"));
        }
    }
    if !report.is_empty() {
        // Everything below divides by these quantities.
        return report;
    }

    for (name, len, step) in [("x", b.x_max, b.dx), ("y", b.y_max, b.dy)] {
        let ratio = len / step;
        if (ratio - ratio.round()).abs() > ALIGN_TOL * ratio.max(1.0) || ratio.round() < 1.0 {
            report.push(
                Constraint::GridAlignment,
                format!("{name}: length {len:e} / step {step:e} = {ratio} is not a positive integer"),
            );
        }
    }

    let s = &params.scaled;
    if !(s.theta > 0.0 && s.theta <= 1.0) {
        report.push(Constraint::RandomMoveProbability, format!("theta = {:e}", s.theta));
    }
    if !(s.beta > 0.0 && s.beta <= 1.0) {
        report.push(Constraint::PhenotypeSwitchProbability, format!("beta = {:e}", s.beta));
    }

    let ys: Vec<f64> = (0..params.ny()).map(|j| j as f64 * b.dy).collect();
    let mu_max = ys.iter().map(|&y| laws.mu(y)).fold(0.0, f64::max);
    if s.eta * mu_max > 1.0 {
        report.push(
            Constraint::HaptotaxisBound,
            format!("eta * max mu = {:e} * {:e} = {:e}", s.eta, mu_max, s.eta * mu_max),
        );
    }

    // |R| over y on the grid and rho in [0, rho_max]; R is affine in rho so
    // the extremes sit at the interval ends.
    let sup_r = ys
        .iter()
        .flat_map(|&y| {
            let r = laws.r(y, b.y_max);
            [(b.alpha * r).abs(), (b.alpha * (r - 1.0)).abs()]
        })
        .fold(0.0, f64::max);
    if b.tau * sup_r > 1.0 {
        report.push(
            Constraint::ProliferationBound,
            format!("tau * sup|R| = {:e} * {:e} = {:e}", b.tau, sup_r, b.tau * sup_r),
        );
    }

    let mde = b.tau * (2.0 * s.d_m / (b.dx * b.dx) + b.kappa_m);
    if mde > 1.0 {
        report.push(Constraint::MdeStability, format!("tau * (2 D_M / dx^2 + kappa_M) = {mde:e}"));
    }

    check_laws(&mut report, params, laws, &ys);
    report
}

fn check_laws(report: &mut ValidationReport, params: &ModelParams, laws: &PhenotypeLaws, ys: &[f64]) {
    let b = &params.base;
    if laws.mu(0.0) != 0.0 {
        report.push(Constraint::SensitivityLaw, format!("mu(0) = {:e}", laws.mu(0.0)));
    }
    if let Some(w) = ys.windows(2).find(|w| laws.mu(w[1]) <= laws.mu(w[0])) {
        report.push(Constraint::SensitivityLaw, format!("mu not increasing at y = {:e}", w[1]));
    }

    let r0 = laws.r(0.0, b.y_max);
    let r_end = laws.r(b.y_max, b.y_max);
    if (r0 - 1.0).abs() > 1e-12 || r_end.abs() > 1e-12 {
        report.push(Constraint::ProliferationLaw, format!("r(0) = {r0:e}, r(y_max) = {r_end:e}"));
    }
    if let Some(w) = ys.windows(2).find(|w| laws.r(w[1], b.y_max) >= laws.r(w[0], b.y_max)) {
        report.push(Constraint::ProliferationLaw, format!("r not decreasing at y = {:e}", w[1]));
    }

    if b.p_min <= 0.0 {
        report.push(Constraint::SecretionLaw, format!("p(0) = p_min = {:e} must be > 0", b.p_min));
    }
    if let Some(w) = ys
        .windows(2)
        .find(|w| laws.p(w[1], b.p_min, b.zeta) <= laws.p(w[0], b.p_min, b.zeta))
    {
        report.push(Constraint::SecretionLaw, format!("p not increasing at y = {:e}", w[1]));
    }
}
