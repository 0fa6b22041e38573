//! Finite-volume solver for the rescaled continuum system
//!
//! ```text
//! d_t n = eps d_xx n - d_x(n mu(y) d_x E) + R(y, rho) n / eps + eps d_yy n
//! d_t M = d_xx M + (int p(y) n dy - kappa_M M) / eps
//! d_t E = -kappa_E E M / eps
//! ```
//!
//! on `[0, x_max] x [0, y_max]` with zero-flux boundaries. Space uses cells of
//! width `dx` centred on `x_i = i dx`; phenotype uses the nodes `y_j = j dy`
//! with trapezoid weights, so the `y` boundary rows carry half-cells. Time
//! stepping is forward Euler under [`stable_dt`]; the MDE equation, whose
//! diffusion limit `dx^2 / 2` is far below the others on fine grids, is
//! sub-cycled with explicit Euler sub-steps against the cell source of the
//! step's start.

mod dt;

pub use dt::{stable_dt, DtBounds, SAFETY};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::ibm::InitialProfile;
use crate::model::Model;
use crate::quadrature::trapezoid_weights;
use crate::snapshot::{SpaceGrid, Snapshot};

/// Slack allowed below zero before a step counts as a scheme failure,
/// relative to the field's magnitude.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

/// Rows below this count are stepped serially.
const PAR_MIN_ROWS: usize = 64;

/// Switches for individual terms; all on by default.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terms {
    pub reaction: bool,
    pub haptotaxis: bool,
    pub ecm_degradation: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms { reaction: true, haptotaxis: true, ecm_degradation: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumState {
    pub t: f64,
    /// Cell density, x-major: `n[i * ny + j]`.
    pub n: Vec<f64>,
    pub rho: Vec<f64>,
    pub mde: Vec<f64>,
    pub ecm: Vec<f64>,
}

/// Grid geometry and per-phenotype law values for one model.
pub struct ContinuumSolver<'m> {
    model: &'m Model,
    terms: Terms,
    dt_fraction: f64,
    nx: usize,
    ny: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    mu: Vec<f64>,
    p: Vec<f64>,
    r: Vec<f64>,
}

/// Trapezoid quadrature of each row of `n` over the phenotype nodes.
pub fn marginal_density(n: &[f64], ny: usize, dy: f64) -> Vec<f64> {
    let w = trapezoid_weights(ny, dy);
    n.chunks(ny).map(|row| row.iter().zip(&w).map(|(a, b)| a * b).sum()).collect()
}

impl<'m> ContinuumSolver<'m> {
    pub fn new(model: &'m Model) -> Self {
        Self::with_terms(model, Terms::default())
    }

    pub fn with_terms(model: &'m Model, terms: Terms) -> Self {
        let y = model.phenotype_grid();
        ContinuumSolver {
            model,
            terms,
            dt_fraction: SAFETY,
            nx: model.params().nx(),
            ny: y.len(),
            x: model.space_grid(),
            w: trapezoid_weights(y.len(), model.params().dy()),
            mu: y.iter().map(|&v| model.mu(v)).collect(),
            p: y.iter().map(|&v| model.p(v)).collect(),
            r: y.iter().map(|&v| model.r(v)).collect(),
            y,
        }
    }

    /// Uses `fraction` of the stable step instead of [`SAFETY`]. Smaller
    /// steps raise the Courant-dependent numerical diffusion of the upwind
    /// flux towards its `|v| dx / 2` limit, the value the lattice walk has.
    pub fn with_dt_fraction(mut self, fraction: f64) -> Self {
        assert!(fraction > 0.0 && fraction <= 1.0, "dt fraction {fraction} outside (0, 1]");
        self.dt_fraction = fraction;
        self
    }

    pub fn dt_fraction(&self) -> f64 {
        self.dt_fraction
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn terms(&self) -> Terms {
        self.terms
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Initial state `rho_max exp(-x^2) C exp(-(y - ybar0)^2 / eps)`.
    ///
    /// `C` normalises the phenotype profile under the trapezoid rule, so
    /// `rho(0, x) = rho_max exp(-x^2)` and `max rho(0) = rho_max` exactly.
    pub fn initial_state(&self, profile: &InitialProfile) -> ContinuumState {
        let rho_max = self.model.base().rho_max;
        let mut n = Vec::with_capacity(self.nx * self.ny);
        for &xi in &self.x {
            for &yj in &self.y {
                n.push(rho_max * profile.density(xi * xi, yj) / profile.a0);
            }
        }
        let rho = self.marginal(&n);
        ContinuumState {
            t: 0.0,
            n,
            rho,
            mde: vec![0.0; self.nx],
            ecm: vec![self.model.base().e_max; self.nx],
        }
    }

    pub fn marginal(&self, n: &[f64]) -> Vec<f64> {
        n.chunks(self.ny).map(|row| row.iter().zip(&self.w).map(|(a, b)| a * b).sum()).collect()
    }

    /// Haptotactic velocity `mu(y_j) (E_{i+1} - E_i) / dx` on face `i + 1/2`.
    fn face_velocity(&self, ecm: &[f64], i: usize, j: usize) -> f64 {
        if !self.terms.haptotaxis || i + 1 >= self.nx {
            return 0.0;
        }
        self.mu[j] * (ecm[i + 1] - ecm[i]) / self.model.params().dx()
    }

    /// Upwind haptotactic flux through face `i + 1/2`; zero on the boundary.
    fn face_flux(&self, n: &[f64], ecm: &[f64], i: usize, j: usize) -> f64 {
        let v = self.face_velocity(ecm, i, j);
        if v > 0.0 {
            v * n[i * self.ny + j]
        } else if v < 0.0 {
            v * n[(i + 1) * self.ny + j]
        } else {
            0.0
        }
    }

    /// Largest `|mu(y) d_x E|` over all faces.
    pub fn max_velocity(&self, ecm: &[f64]) -> f64 {
        let mu_max = self.mu.iter().fold(0.0f64, |a, &m| a.max(m.abs()));
        let grad = ecm.windows(2).fold(0.0f64, |a, w| a.max((w[1] - w[0]).abs()));
        if self.terms.haptotaxis {
            mu_max * grad / self.model.params().dx()
        } else {
            0.0
        }
    }

    /// `R(y_j, rho)`, or zero with the reaction switched off.
    fn growth(&self, j: usize, rho: f64) -> f64 {
        if !self.terms.reaction {
            return 0.0;
        }
        let b = self.model.base();
        b.alpha * (self.r[j] - rho / b.rho_max)
    }

    fn cell_row(&self, n: &[f64], ecm: &[f64], rho: &[f64], i: usize, out: &mut [f64]) {
        let p = self.model.params();
        let (eps, dx, dy) = (p.eps(), p.dx(), p.dy());
        let ny = self.ny;
        let row = &n[i * ny..(i + 1) * ny];
        let left = if i > 0 { &n[(i - 1) * ny..i * ny] } else { row };
        let right = if i + 1 < self.nx { &n[(i + 1) * ny..(i + 2) * ny] } else { row };
        for j in 0..ny {
            let lap_x = right[j] - 2.0 * row[j] + left[j];
            let f_right = self.face_flux(n, ecm, i, j);
            let f_left = if i > 0 { self.face_flux(n, ecm, i - 1, j) } else { 0.0 };
            let lap_y = if ny < 2 {
                0.0
            } else if j == 0 {
                2.0 * (row[1] - row[0])
            } else if j == ny - 1 {
                2.0 * (row[ny - 2] - row[ny - 1])
            } else {
                row[j + 1] - 2.0 * row[j] + row[j - 1]
            };
            out[j] = eps * lap_x / (dx * dx) - (f_right - f_left) / dx
                + self.growth(j, rho[i]) * row[j] / eps
                + eps * lap_y / (dy * dy);
        }
    }

    /// `dn/dt` at every node.
    pub fn cell_rhs(&self, n: &[f64], ecm: &[f64], rho: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; n.len()];
        if self.nx >= PAR_MIN_ROWS {
            out.par_chunks_mut(self.ny)
                .with_min_len(PAR_MIN_ROWS / 4)
                .enumerate()
                .for_each(|(i, o)| self.cell_row(n, ecm, rho, i, o));
        } else {
            out.chunks_mut(self.ny)
                .enumerate()
                .for_each(|(i, o)| self.cell_row(n, ecm, rho, i, o));
        }
        out
    }

    /// MDE source `int p(y) n dy` per cell (trapezoid rule).
    pub fn secretion(&self, n: &[f64]) -> Vec<f64> {
        n.chunks(self.ny)
            .map(|row| row.iter().zip(&self.w).zip(&self.p).map(|((a, w), p)| a * w * p).sum())
            .collect()
    }

    /// `dM/dt` with mirrored end cells.
    pub fn mde_rhs(&self, mde: &[f64], n: &[f64]) -> Vec<f64> {
        let p = self.model.params();
        let (eps, dx) = (p.eps(), p.dx());
        let kappa = self.model.base().kappa_m;
        let source = self.secretion(n);
        (0..self.nx)
            .map(|i| {
                let l = if i > 0 { mde[i - 1] } else { mde[i] };
                let r = if i + 1 < self.nx { mde[i + 1] } else { mde[i] };
                (l - 2.0 * mde[i] + r) / (dx * dx) + (source[i] - kappa * mde[i]) / eps
            })
            .collect()
    }

    /// `dE/dt = -kappa_E E M / eps`.
    pub fn ecm_rhs(&self, ecm: &[f64], mde: &[f64]) -> Vec<f64> {
        if !self.terms.ecm_degradation {
            return vec![0.0; ecm.len()];
        }
        ecm_rhs(ecm, mde, self.model)
    }

    /// Number of explicit MDE sub-steps taken within a step of length `dt`.
    pub fn mde_substeps(&self, dt: f64) -> usize {
        let p = self.model.params();
        let rate = 2.0 / (p.dx() * p.dx()) + self.model.base().kappa_m / p.eps();
        ((dt * rate / SAFETY) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    /// Forward Euler step of all fields from the same old state, with the
    /// MDE update split into [`Self::mde_substeps`] equal sub-steps.
    pub fn advance(&self, state: &ContinuumState, dt: f64) -> Result<ContinuumState, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::DegenerateStep(dt));
        }
        let dn = self.cell_rhs(&state.n, &state.ecm, &state.rho);
        let de = self.ecm_rhs(&state.ecm, &state.mde);
        let t = state.t + dt;
        let n: Vec<f64> = state.n.iter().zip(&dn).map(|(a, b)| a + dt * b).collect();
        let k = self.mde_substeps(dt);
        let h = dt / k as f64;
        let mut mde = state.mde.clone();
        for _ in 0..k {
            let dm = self.mde_rhs(&mde, &state.n);
            mde.iter_mut().zip(&dm).for_each(|(a, b)| *a += h * b);
        }
        let ecm: Vec<f64> = state.ecm.iter().zip(&de).map(|(a, b)| a + dt * b).collect();
        check_nonnegative(t, "n", &n)?;
        check_nonnegative(t, "M", &mde)?;
        check_nonnegative(t, "E", &ecm)?;
        let rho = self.marginal(&n);
        Ok(ContinuumState { t, n, rho, mde, ecm })
    }

    /// Total cell mass `sum_i dx rho_i`.
    pub fn mass(&self, state: &ContinuumState) -> f64 {
        self.model.params().dx() * state.rho.iter().sum::<f64>()
    }

    pub fn to_snapshot(&self, state: &ContinuumState) -> Snapshot {
        Snapshot {
            t: state.t,
            space: SpaceGrid::Line { x: self.x.clone() },
            y: self.y.clone(),
            n: state.n.clone(),
            rho: state.rho.clone(),
            mde: state.mde.clone(),
            ecm: state.ecm.clone(),
        }
    }

    /// Integrates to each requested time, shortening the last step before a
    /// snapshot so that it lands exactly on the requested time.
    pub fn run(&self, profile: &InitialProfile, times: &[f64]) -> Result<ContinuumRun, SimError> {
        let mut state = self.initial_state(profile);
        let e_max = self.model.base().e_max;
        let mass0 = self.mass(&state);
        let mut snapshots = Vec::with_capacity(times.len());
        let mut diagnostics = Vec::with_capacity(times.len());
        let mut steps = 0u64;
        let mut prev_ecm = state.ecm.clone();
        for &target in times {
            if target < state.t {
                return Err(SimError::Analysis(format!(
                    "snapshot times must be non-decreasing ({target} after {})",
                    state.t
                )));
            }
            let mut max_velocity = self.max_velocity(&state.ecm);
            let mut dt_min = f64::INFINITY;
            let snap_tol = 1e-12 * target.abs().max(1.0);
            while target - state.t > snap_tol {
                let bound = stable_dt(self, &state)?.chosen;
                let dt = bound.min(target - state.t);
                state = self.advance(&state, dt)?;
                if target - state.t <= snap_tol {
                    state.t = target;
                }
                steps += 1;
                dt_min = dt_min.min(dt);
                max_velocity = max_velocity.max(self.max_velocity(&state.ecm));
            }
            let mass = self.mass(&state);
            diagnostics.push(ContinuumDiagnostics {
                t: state.t,
                steps,
                dt_min: dt_min.is_finite().then_some(dt_min),
                max_velocity,
                mass,
                mass_change: (mass - mass0) / mass0,
                mde_nonnegative: state.mde.iter().all(|&m| m >= 0.0),
                ecm_in_range: state.ecm.iter().all(|&e| (0.0..=e_max).contains(&e)),
                ecm_monotone: state.ecm.iter().zip(&prev_ecm).all(|(a, b)| a <= b),
            });
            prev_ecm.clone_from(&state.ecm);
            snapshots.push(self.to_snapshot(&state));
        }
        Ok(ContinuumRun { snapshots, diagnostics })
    }
}

/// `dE/dt = -kappa_E E M / eps` for a model.
pub fn ecm_rhs(ecm: &[f64], mde: &[f64], model: &Model) -> Vec<f64> {
    let rate = model.base().kappa_e / model.params().eps();
    ecm.iter().zip(mde).map(|(e, m)| -rate * e * m).collect()
}

fn check_nonnegative(t: f64, field: &'static str, v: &[f64]) -> Result<(), SimError> {
    let scale = v.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    match v.iter().enumerate().find(|(_, &x)| x < -NEGATIVITY_TOLERANCE * scale) {
        Some((index, &value)) => Err(SimError::Negativity { t, field, index, value }),
        None => Ok(()),
    }
}

/// Per-snapshot checks of the continuum run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumDiagnostics {
    pub t: f64,
    /// Steps taken since the start of the run.
    pub steps: u64,
    /// Smallest step used since the previous snapshot.
    pub dt_min: Option<f64>,
    /// Largest `|mu d_x E|` since the previous snapshot.
    pub max_velocity: f64,
    pub mass: f64,
    /// Relative change of total mass since `t = 0`.
    pub mass_change: f64,
    pub mde_nonnegative: bool,
    pub ecm_in_range: bool,
    pub ecm_monotone: bool,
}

impl ContinuumDiagnostics {
    pub fn passed(&self) -> bool {
        self.mde_nonnegative && self.ecm_in_range && self.ecm_monotone
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuumRun {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<ContinuumDiagnostics>,
}

/// Runs the continuum model with all terms active.
pub fn run_continuum(model: &Model, profile: &InitialProfile, times: &[f64]) -> Result<ContinuumRun, SimError> {
    ContinuumSolver::new(model).run(profile, times)
}
