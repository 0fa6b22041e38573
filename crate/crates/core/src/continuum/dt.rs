//! Explicit step-size rule.
//!
//! Forward Euler keeps every field non-negative when the total outflow rate
//! of each unknown, summed over all terms acting on it, stays below `1 / dt`.
//! The individual bounds are reported for diagnostics; the step actually
//! used is a fraction (default `SAFETY`) of the smaller of the cell and ECM
//! bounds. The MDE
//! bound sets the sub-step inside each step instead.

use serde::{Deserialize, Serialize};

use crate::continuum::{ContinuumSolver, ContinuumState};
use crate::error::SimError;

pub const SAFETY: f64 = 0.9;

/// Individual stability limits and the step chosen from them. `None` marks
/// a term that imposes no limit for the current fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtBounds {
    /// `dx^2 / (2 eps)`
    pub x_diffusion: f64,
    /// `dx / max |mu d_x E|`
    pub advection: Option<f64>,
    /// `dy^2 / (2 eps)`
    pub y_diffusion: f64,
    /// `eps / sup |R|`
    pub reaction: Option<f64>,
    /// `eps / kappa_M`
    pub mde_decay: f64,
    /// `eps / (kappa_E max M)`
    pub ecm: Option<f64>,
    /// `dx^2 / 2`, from the MDE diffusion.
    pub mde_diffusion: f64,
    /// `dt_fraction * min(cells, ecm)` with the combined rates
    /// `cells = 1 / (2 eps / dx^2 + 2 eps / dy^2 + 2 max|v| / dx + sup|R| / eps)`
    /// and `ecm = eps / (kappa_E max M)`.
    pub chosen: f64,
    /// MDE sub-steps per step, each within `SAFETY / (2 / dx^2 + kappa_M / eps)`.
    pub mde_substeps: usize,
}

impl DtBounds {
    /// Smallest of the individual bounds.
    pub fn min_individual(&self) -> f64 {
        [Some(self.x_diffusion), self.advection, Some(self.y_diffusion), self.reaction]
            .into_iter()
            .chain([Some(self.mde_decay), self.ecm, Some(self.mde_diffusion)])
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

fn limit(rate: f64) -> Option<f64> {
    (rate > 0.0).then(|| 1.0 / rate)
}

pub fn stable_dt(solver: &ContinuumSolver<'_>, state: &ContinuumState) -> Result<DtBounds, SimError> {
    let model = solver.model();
    let p = model.params();
    let b = model.base();
    let (eps, dx, dy) = (p.eps(), p.dx(), p.dy());

    let x_rate = 2.0 * eps / (dx * dx);
    let y_rate = if solver.ny() > 1 { 2.0 * eps / (dy * dy) } else { 0.0 };
    let v = solver.max_velocity(&state.ecm);
    let adv_rate = 2.0 * v / dx;
    let sup_r = if solver.terms().reaction {
        let rho_hi = state.rho.iter().fold(0.0f64, |a, &r| a.max(r)) / b.rho_max;
        let ys = model.phenotype_grid();
        let (r_lo, r_hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
            let r = model.r(y);
            (lo.min(r), hi.max(r))
        });
        b.alpha * (r_hi.abs().max((r_lo - rho_hi).abs()))
    } else {
        0.0
    };
    let react_rate = sup_r / eps;
    let m_max = state.mde.iter().fold(0.0f64, |a, &m| a.max(m));
    let ecm_rate = if solver.terms().ecm_degradation { b.kappa_e * m_max / eps } else { 0.0 };
    let cells = 1.0 / (x_rate + y_rate + adv_rate + react_rate);
    let ecm = limit(ecm_rate).unwrap_or(f64::INFINITY);
    let chosen = solver.dt_fraction() * cells.min(ecm);
    if !(chosen > 0.0 && chosen.is_finite()) {
        return Err(SimError::DegenerateStep(chosen));
    }
    Ok(DtBounds {
        x_diffusion: 1.0 / x_rate,
        advection: (v > 0.0).then(|| dx / v),
        y_diffusion: if y_rate > 0.0 { 1.0 / y_rate } else { f64::INFINITY },
        reaction: limit(react_rate),
        mde_decay: eps / b.kappa_m,
        ecm: limit(ecm_rate),
        mde_diffusion: dx * dx / 2.0,
        chosen,
        mde_substeps: solver.mde_substeps(chosen),
    })
}
