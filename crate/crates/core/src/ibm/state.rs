use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::ibm::lattice::Space;
use crate::model::Model;
use crate::quadrature::trapezoid_uniform;
use crate::snapshot::Snapshot;

/// Initial cell distribution `A0 C exp(-|x|^2) exp(-(y - ybar0)^2 / eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialProfile {
    pub a0: f64,
    pub ybar0: f64,
    /// Variance parameter of the phenotype Gaussian.
    pub eps: f64,
    /// Normalisation constant: `C * trapz(exp(-(y - ybar0)^2 / eps)) = 1`
    /// on the phenotype grid.
    pub c: f64,
}

impl InitialProfile {
    pub fn new(a0: f64, ybar0: f64, eps: f64, ys: &[f64]) -> Self {
        let dy = if ys.len() > 1 { ys[1] - ys[0] } else { 1.0 };
        let vals: Vec<f64> = ys.iter().map(|&y| phenotype_gaussian(y, ybar0, eps)).collect();
        let c = 1.0 / trapezoid_uniform(&vals, dy);
        InitialProfile { a0, ybar0, eps, c }
    }

    /// Unrounded expected count `F(x, y)` at squared distance `r2`.
    pub fn density(&self, r2: f64, y: f64) -> f64 {
        self.a0 * self.c * (-r2).exp() * phenotype_gaussian(y, self.ybar0, self.eps)
    }
}

fn phenotype_gaussian(y: f64, ybar0: f64, eps: f64) -> f64 {
    let d = y - ybar0;
    (-d * d / eps).exp()
}

/// Integer cell counts on the (space x phenotype) lattice plus MDE and ECM
/// fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IbState {
    pub space: Space,
    pub ny: usize,
    /// Cell counts, site-major: `counts[site * ny + j]`.
    pub counts: Vec<u32>,
    pub mde: Vec<f64>,
    pub ecm: Vec<f64>,
    /// Steps taken so far.
    pub step: u64,
    pub seed: u64,
}

impl IbState {
    pub fn total_cells(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    /// Cells per site.
    pub fn site_totals(&self) -> Vec<u64> {
        self.counts.chunks(self.ny).map(|c| c.iter().map(|&v| v as u64).sum()).collect()
    }

    /// Cell density per site: total count over the site volume.
    pub fn rho(&self, model: &Model) -> Vec<f64> {
        let vol = site_volume(self.space, model);
        self.site_totals().into_iter().map(|c| c as f64 / vol).collect()
    }

    pub fn to_snapshot(&self, model: &Model) -> Snapshot {
        let vol = site_volume(self.space, model);
        let cell = vol * model.params().dy();
        Snapshot {
            t: model.params().rescaled_time_of_step(self.step),
            space: self.space.grid(model.params().dx()),
            y: model.phenotype_grid(),
            n: self.counts.iter().map(|&c| c as f64 / cell).collect(),
            rho: self.rho(model),
            mde: self.mde.clone(),
            ecm: self.ecm.clone(),
        }
    }
}

/// Spatial volume of one lattice site: `dx` on a line, `dx^2` on a plane.
pub fn site_volume(space: Space, model: &Model) -> f64 {
    model.params().dx().powi(space.dims() as i32)
}

/// Builds the initial lattice: floored profile counts, no MDE, ECM at `e_max`.
pub fn init_state(
    profile: &InitialProfile,
    space: Space,
    model: &Model,
    seed: u64,
) -> Result<IbState, SimError> {
    let counts = initial_counts(profile, space, model);
    if counts.iter().all(|&c| c == 0) {
        return Err(SimError::EmptyLattice);
    }
    let sites = space.sites();
    Ok(IbState {
        space,
        ny: model.params().ny(),
        counts,
        mde: vec![0.0; sites],
        ecm: vec![model.base().e_max; sites],
        step: 0,
        seed,
    })
}

pub(crate) fn initial_counts(profile: &InitialProfile, space: Space, model: &Model) -> Vec<u32> {
    let dx = model.params().dx();
    let ys = model.phenotype_grid();
    let mut counts = Vec::with_capacity(space.sites() * ys.len());
    for site in 0..space.sites() {
        let r2 = space.index_radius2(site) as f64 * dx * dx;
        for &y in &ys {
            counts.push(profile.density(r2, y).floor() as u32);
        }
    }
    counts
}

/// `max_i rho_i` of the floored initial profile, used as the carrying density
/// when none is configured.
pub fn initial_rho_max(profile: &InitialProfile, space: Space, model: &Model) -> f64 {
    let counts = initial_counts(profile, space, model);
    let vol = site_volume(space, model);
    counts
        .chunks(model.params().ny())
        .map(|c| c.iter().map(|&v| v as f64).sum::<f64>() / vol)
        .fold(0.0, f64::max)
}
