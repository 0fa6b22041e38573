//! One time step of the lattice model.
//!
//! Cells at the same site and phenotype evolve independently under
//! identical probabilities, so each sub-step samples the outcome counts of
//! a whole group at once (binomial splits) instead of drawing per cell. The
//! joint law of the counts is identical to the per-cell procedure. Groups
//! are visited in index order, which fixes the draw order for a seed.
//!
//! Within a step, all rules read the step-`k` fields: movement uses `E^k`,
//! proliferation uses the pre-step density `rho^k` of the cell's current
//! site, the MDE update uses `n^k` and the ECM update uses `M^k`.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::SimError;
use crate::ibm::lattice::Space;
use crate::ibm::probs::{
    hapto_move_probs, phenotype_switch_probs, proliferation_probs, random_move_probs, Triple,
};
use crate::ibm::state::{site_volume, IbState};
use crate::model::Model;

/// Precomputed per-phenotype quantities and scratch buffers for stepping.
pub struct IbEngine<'m> {
    model: &'m Model,
    space: Space,
    ny: usize,
    ys: Vec<f64>,
    /// `p(y_j) / site_volume`
    secretion: Vec<f64>,
    random: Triple,
    switch: Triple,
    site_volume: f64,
    scratch: Vec<u32>,
}

impl<'m> IbEngine<'m> {
    pub fn new(model: &'m Model, space: Space) -> Result<Self, SimError> {
        let p = model.params();
        let dims = space.dims() as f64;
        let mde_rate = p.tau() * (2.0 * dims * p.d_m() / (p.dx() * p.dx()) + model.base().kappa_m);
        if mde_rate > 1.0 {
            return Err(SimError::MdeStability(format!(
                "tau * (2 * {dims} * D_M / dx^2 + kappa_M) = {mde_rate:e} > 1"
            )));
        }
        let ys = model.phenotype_grid();
        let vol = site_volume(space, model);
        Ok(IbEngine {
            model,
            space,
            ny: ys.len(),
            secretion: ys.iter().map(|&y| model.p(y) / vol).collect(),
            ys,
            random: random_move_probs(model),
            switch: phenotype_switch_probs(model),
            site_volume: vol,
            scratch: vec![0; space.sites() * model.params().ny()],
        })
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Advances cells, MDE and ECM by one step.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut IbState, rng: &mut R) -> Result<(), SimError> {
        let mde = self.step_mde(state);
        let ecm = self.step_ecm(state)?;
        self.step_cells(state, rng);
        state.mde = mde;
        state.ecm = ecm;
        state.step += 1;
        Ok(())
    }

    /// Pre-step density per site.
    pub fn rho(&self, state: &IbState) -> Vec<f64> {
        state
            .counts
            .chunks(self.ny)
            .map(|c| c.iter().map(|&v| v as f64).sum::<f64>() / self.site_volume)
            .collect()
    }

    /// Moves, switches and divides/kills every cell once, in the order
    /// random move, haptotactic move, phenotype change, division/death.
    pub fn step_cells<R: Rng + ?Sized>(&mut self, state: &mut IbState, rng: &mut R) {
        let rho = self.rho(state);
        #[cfg(debug_assertions)]
        let before = state.total_cells();

        let mut buf = std::mem::take(&mut self.scratch);

        let random = self.random;
        self.move_cells(&state.counts, &mut buf, rng, |_, _, _| random);
        std::mem::swap(&mut state.counts, &mut buf);

        let ecm = &state.ecm;
        let space = self.space;
        let (ys, model) = (&self.ys, self.model);
        self.move_cells(&state.counts, &mut buf, rng, |site, axis, j| {
            let here = ecm[site];
            let side = |dir| space.neighbor(site, axis, dir).map_or(here, |nb| ecm[nb]);
            hapto_move_probs(side(-1), here, side(1), ys[j], model)
        });
        std::mem::swap(&mut state.counts, &mut buf);

        self.switch_phenotypes(&state.counts, &mut buf, rng);
        std::mem::swap(&mut state.counts, &mut buf);

        #[cfg(debug_assertions)]
        debug_assert_eq!(before, state.total_cells(), "movement changed the cell count");

        self.proliferate(&mut state.counts, &rho, rng);
        self.scratch = buf;
    }

    /// Explicit MDE update with zero-flux (mirrored) boundaries.
    pub fn step_mde(&self, state: &IbState) -> Vec<f64> {
        let p = self.model.params();
        let tau = p.tau();
        let diff = p.d_m() / (p.dx() * p.dx());
        let kappa = self.model.base().kappa_m;
        let m = &state.mde;
        (0..self.space.sites())
            .map(|s| {
                let mut lap = 0.0;
                for axis in 0..self.space.dims() {
                    for dir in [-1, 1] {
                        let nb = self.space.neighbor(s, axis, dir).unwrap_or(s);
                        lap += m[nb] - m[s];
                    }
                }
                let col = &state.counts[s * self.ny..(s + 1) * self.ny];
                let source: f64 =
                    col.iter().zip(&self.secretion).map(|(&c, &q)| c as f64 * q).sum();
                m[s] + tau * (diff * lap - kappa * m[s] + source)
            })
            .collect()
    }

    /// Explicit ECM degradation `E (1 - tau kappa_E M)`.
    pub fn step_ecm(&self, state: &IbState) -> Result<Vec<f64>, SimError> {
        let rate = self.model.params().tau() * self.model.base().kappa_e;
        state
            .ecm
            .iter()
            .zip(&state.mde)
            .enumerate()
            .map(|(site, (&e, &m))| {
                let factor = rate * m;
                if factor > 1.0 {
                    Err(SimError::EcmPositivity { site, factor })
                } else {
                    Ok(e * (1.0 - factor))
                }
            })
            .collect()
    }

    fn move_cells<R, F>(&self, src: &[u32], dst: &mut [u32], rng: &mut R, probs: F)
    where
        R: Rng + ?Sized,
        F: Fn(usize, usize, usize) -> Triple,
    {
        dst.iter_mut().for_each(|v| *v = 0);
        for site in 0..self.space.sites() {
            for j in 0..self.ny {
                let count = src[site * self.ny + j];
                if count > 0 {
                    self.scatter(rng, site, site, 0, j, count, &probs, dst);
                }
            }
        }
    }

    /// Splits `count` cells along `axis`, then recurses into the next axis
    /// with probabilities still evaluated at `origin` (independent per-axis
    /// draws). Moves that would leave the domain are aborted.
    #[allow(clippy::too_many_arguments)]
    fn scatter<R, F>(
        &self,
        rng: &mut R,
        origin: usize,
        current: usize,
        axis: usize,
        j: usize,
        count: u32,
        probs: &F,
        dst: &mut [u32],
    ) where
        R: Rng + ?Sized,
        F: Fn(usize, usize, usize) -> Triple,
    {
        if axis == self.space.dims() {
            dst[current * self.ny + j] += count;
            return;
        }
        let t = probs(origin, axis, j);
        debug_assert!(t.is_valid(), "movement probabilities out of range: {t:?}");
        let (minus, plus, stay) = split3(rng, count, t.minus, t.plus);
        for (c, dir) in [(minus, -1), (plus, 1), (stay, 0)] {
            if c == 0 {
                continue;
            }
            let next = if dir == 0 {
                current
            } else {
                self.space.neighbor(current, axis, dir).unwrap_or(current)
            };
            self.scatter(rng, origin, next, axis + 1, j, c, probs, dst);
        }
    }

    fn switch_phenotypes<R: Rng + ?Sized>(&self, src: &[u32], dst: &mut [u32], rng: &mut R) {
        dst.iter_mut().for_each(|v| *v = 0);
        let last = self.ny - 1;
        for site in 0..self.space.sites() {
            let base = site * self.ny;
            for j in 0..self.ny {
                let count = src[base + j];
                if count == 0 {
                    continue;
                }
                let (down, up, stay) = split3(rng, count, self.switch.minus, self.switch.plus);
                // Switches out of [0, y_max] are aborted.
                let jd = if j == 0 { j } else { j - 1 };
                let ju = if j == last { j } else { j + 1 };
                dst[base + jd] += down;
                dst[base + ju] += up;
                dst[base + j] += stay;
            }
        }
    }

    fn proliferate<R: Rng + ?Sized>(&self, counts: &mut [u32], rho: &[f64], rng: &mut R) {
        for (site, &rho_site) in rho.iter().enumerate() {
            for j in 0..self.ny {
                let idx = site * self.ny + j;
                let count = counts[idx];
                if count == 0 {
                    continue;
                }
                let t = proliferation_probs(self.ys[j], rho_site, self.model);
                if t.plus > 0.0 {
                    counts[idx] = count + binomial(rng, count, t.plus);
                } else if t.minus > 0.0 {
                    counts[idx] = count - binomial(rng, count, t.minus);
                }
            }
        }
    }
}

/// Draws a binomial variate; exact for the degenerate cases.
#[inline]
pub(crate) fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u32, p: f64) -> u32 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n as u64, p).expect("probability in (0, 1)").sample(rng) as u32
}

/// Multinomial split of `n` items into (minus, plus, stay).
#[inline]
pub(crate) fn split3<R: Rng + ?Sized>(rng: &mut R, n: u32, p_minus: f64, p_plus: f64) -> (u32, u32, u32) {
    let minus = binomial(rng, n, p_minus);
    let rest = n - minus;
    let plus = if p_minus < 1.0 && rest > 0 {
        binomial(rng, rest, (p_plus / (1.0 - p_minus)).min(1.0))
    } else {
        0
    };
    (minus, plus, rest - plus)
}
