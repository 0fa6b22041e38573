//! Reduction of planar snapshots to radial profiles.

use serde::{Deserialize, Serialize};

use crate::snapshot::{SpaceGrid, Snapshot};

/// Averages a planar snapshot over rings of width `dx` centred on the
/// origin, out to the largest radius fully inside the square.
///
/// Line snapshots are returned unchanged.
pub fn radial_transect(snap: &Snapshot) -> Snapshot {
    let (x1, x2) = match &snap.space {
        SpaceGrid::Line { .. } => return snap.clone(),
        SpaceGrid::Plane { x1, x2 } => (x1, x2),
    };
    let dx = snap.space.spacing();
    let nbins = x1.len().min(x2.len());
    let ny = snap.ny();
    let mut n = vec![0.0; nbins * ny];
    let mut rho = vec![0.0; nbins];
    let mut mde = vec![0.0; nbins];
    let mut ecm = vec![0.0; nbins];
    let mut hits = vec![0usize; nbins];
    for site in 0..snap.sites() {
        let (a, b) = snap.space.coords(site);
        let r = a.hypot(b.unwrap_or(0.0));
        let k = if dx > 0.0 { (r / dx).round() as usize } else { 0 };
        if k >= nbins {
            continue;
        }
        hits[k] += 1;
        rho[k] += snap.rho[site];
        mde[k] += snap.mde[site];
        ecm[k] += snap.ecm[site];
        for (acc, v) in n[k * ny..(k + 1) * ny].iter_mut().zip(snap.column(site)) {
            *acc += v;
        }
    }
    for k in 0..nbins {
        let h = hits[k].max(1) as f64;
        rho[k] /= h;
        mde[k] /= h;
        ecm[k] /= h;
        n[k * ny..(k + 1) * ny].iter_mut().for_each(|v| *v /= h);
    }
    Snapshot {
        t: snap.t,
        space: SpaceGrid::Line { x: (0..nbins).map(|k| k as f64 * dx).collect() },
        y: snap.y.clone(),
        n,
        rho,
        mde,
        ecm,
    }
}

/// Mirror-symmetry test of replicate densities under `x1 <-> x2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    /// Off-diagonal site pairs with non-degenerate replicate spread.
    pub pairs: usize,
    /// Largest `|mean difference| / standard error` over pairs.
    pub max_z: f64,
    /// Fraction of pairs with `z > 3`.
    pub fraction_above_3: f64,
}

/// Compares the ensemble mean density at `(i, k)` with that at `(k, i)` in
/// units of the standard error of the paired replicate differences.
///
/// Returns `None` for line snapshots, non-square planes or fewer than two
/// replicates.
pub fn reflection_asymmetry(replicates: &[&Snapshot]) -> Option<AsymmetryReport> {
    let first = replicates.first()?;
    let n = match &first.space {
        SpaceGrid::Plane { x1, x2 } if x1.len() == x2.len() => x1.len(),
        _ => return None,
    };
    if replicates.len() < 2 {
        return None;
    }
    let reps = replicates.len() as f64;
    let (mut pairs, mut above, mut max_z) = (0usize, 0usize, 0.0f64);
    for i in 0..n {
        for k in i + 1..n {
            let (a, b) = (i * n + k, k * n + i);
            let d: Vec<f64> = replicates.iter().map(|s| s.rho[a] - s.rho[b]).collect();
            let mean = d.iter().sum::<f64>() / reps;
            let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1.0);
            if var <= 0.0 {
                if mean != 0.0 {
                    pairs += 1;
                    above += 1;
                    max_z = f64::INFINITY;
                }
                continue;
            }
            let z = mean.abs() / (var / reps).sqrt();
            pairs += 1;
            if z > 3.0 {
                above += 1;
            }
            max_z = max_z.max(z);
        }
    }
    Some(AsymmetryReport {
        pairs,
        max_z,
        fraction_above_3: if pairs == 0 { 0.0 } else { above as f64 / pairs as f64 },
    })
}
