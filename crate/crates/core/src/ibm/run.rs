//! Single-replicate and ensemble drivers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::ibm::lattice::Space;
use crate::ibm::state::{init_state, IbState, InitialProfile};
use crate::ibm::step::IbEngine;
use crate::model::Model;
use crate::snapshot::Snapshot;

/// Invariant checks recorded at each snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub step: u64,
    pub t: f64,
    pub total_cells: u64,
    /// Largest `rho / rho_max` seen at any step since the previous snapshot.
    pub max_rho_ratio: f64,
    pub mde_nonnegative: bool,
    pub ecm_in_range: bool,
    /// ECM did not increase anywhere since the previous snapshot.
    pub ecm_monotone: bool,
}

impl StepDiagnostics {
    pub fn passed(&self) -> bool {
        self.mde_nonnegative && self.ecm_in_range && self.ecm_monotone
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IbRun {
    pub seed: u64,
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<StepDiagnostics>,
}

/// Ensemble of independent replicates and their mean fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub mean: Vec<Snapshot>,
    pub replicates: Vec<IbRun>,
}

/// Seed of replicate `index` derived from a base seed (SplitMix64 finaliser).
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn replicate_seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| replicate_seed(base, i)).collect()
}

/// Runs one replicate and records snapshots at the requested rescaled times.
pub fn run_single(
    model: &Model,
    profile: &InitialProfile,
    space: Space,
    times: &[f64],
    seed: u64,
) -> Result<IbRun, SimError> {
    let mut engine = IbEngine::new(model, space)?;
    let mut state = init_state(profile, space, model, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho_max = model.base().rho_max;
    let e_max = model.base().e_max;

    let mut snapshots = Vec::with_capacity(times.len());
    let mut diagnostics = Vec::with_capacity(times.len());
    let mut prev_ecm = state.ecm.clone();
    let mut max_ratio = ratio_max(&engine.rho(&state), rho_max);

    for &t in times {
        let target = model.params().steps_to(t);
        let mut ecm_monotone = true;
        while state.step < target {
            engine.step(&mut state, &mut rng)?;
            max_ratio = max_ratio.max(ratio_max(&engine.rho(&state), rho_max));
        }
        ecm_monotone &= state.ecm.iter().zip(&prev_ecm).all(|(new, old)| new <= old);
        prev_ecm.clone_from(&state.ecm);
        diagnostics.push(diagnose(&state, model, max_ratio, e_max, ecm_monotone));
        snapshots.push(state.to_snapshot(model));
        max_ratio = 0.0;
    }
    Ok(IbRun { seed, snapshots, diagnostics })
}

fn ratio_max(rho: &[f64], rho_max: f64) -> f64 {
    rho.iter().fold(0.0, |a, &r| a.max(r / rho_max))
}

fn diagnose(state: &IbState, model: &Model, max_rho_ratio: f64, e_max: f64, ecm_monotone: bool) -> StepDiagnostics {
    StepDiagnostics {
        step: state.step,
        t: model.params().rescaled_time_of_step(state.step),
        total_cells: state.total_cells(),
        max_rho_ratio,
        mde_nonnegative: state.mde.iter().all(|&m| m >= 0.0),
        ecm_in_range: state.ecm.iter().all(|&e| (0.0..=e_max).contains(&e)),
        ecm_monotone,
    }
}

/// Runs one replicate per seed, in parallel, and averages the fields.
///
/// Results are collected in seed order, so the output does not depend on
/// the number of worker threads.
pub fn run_replicates(
    model: &Model,
    profile: &InitialProfile,
    space: Space,
    times: &[f64],
    seeds: &[u64],
) -> Result<EnsembleSummary, SimError> {
    assert!(!seeds.is_empty(), "at least one replicate is required");
    let replicates = seeds
        .par_iter()
        .map(|&seed| run_single(model, profile, space, times, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let mean = (0..times.len())
        .map(|k| {
            let snaps: Vec<&Snapshot> = replicates.iter().map(|r| &r.snapshots[k]).collect();
            Snapshot::mean(&snaps).expect("non-empty ensemble")
        })
        .collect();
    Ok(EnsembleSummary { mean, replicates })
}
