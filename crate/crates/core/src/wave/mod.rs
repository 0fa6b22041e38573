//! Front-structure metrics and the limiting travelling-wave relations used
//! to validate both engines.
//!
//! As `eps -> 0` the phenotype distribution at each point of the support
//! concentrates at a dominant trait `ybar(x)`, and the fields satisfy
//! `rho = rho_max r(ybar)`, `M = p(ybar) rho_max r(ybar) / kappa_M`, and
//! `E = e_max` outside the support, `0` inside. This module evaluates those
//! relations against measured snapshots; it does not solve for the phase
//! function or the front speed.

mod oracle;
mod transect;

pub use oracle::{compare_to_oracle, oracle_ecm, oracle_mde, oracle_rho, OracleErrors, OracleRow};
pub use transect::{radial_transect, reflection_asymmetry, AsymmetryReport};

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::quadrature::trapezoid_weights;
use crate::snapshot::{SpaceGrid, Snapshot};

/// Fraction of `rho_max` above which a site counts as occupied.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

/// Contiguous block of occupied sites (inclusive indices).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub start: usize,
    pub end: usize,
    /// False if unoccupied sites lie between `start` and `end`.
    pub contiguous: bool,
}

impl Support {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start..=self.end).contains(&i)
    }
}

/// Hull of the sites where `rho > threshold * rho_max`.
pub fn find_support(rho: &[f64], rho_max: f64, threshold: f64) -> Option<Support> {
    let cut = threshold * rho_max;
    let start = rho.iter().position(|&r| r > cut)?;
    let end = rho.iter().rposition(|&r| r > cut)?;
    let contiguous = rho[start..=end].iter().all(|&r| r > cut);
    Some(Support { start, end, contiguous })
}

/// Index of the largest entry, ties going to the smallest index.
pub(crate) fn argmax(col: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in col.iter().enumerate() {
        match best {
            Some(b) if v <= col[b] => {}
            _ => best = Some(j),
        }
    }
    best
}

/// Dominant phenotype per site; `None` outside the support.
pub fn extract_ybar(snap: &Snapshot, rho_max: f64) -> Vec<Option<f64>> {
    let support = find_support(&snap.rho, rho_max, SUPPORT_THRESHOLD);
    (0..snap.sites())
        .map(|i| match support {
            Some(s) if s.contains(i) && snap.rho[i] > SUPPORT_THRESHOLD * rho_max => {
                argmax(snap.column(i)).map(|j| snap.y[j])
            }
            _ => None,
        })
        .collect()
}

/// Phenotypic standard deviation of `n` per site, using trapezoid weights;
/// `None` where the column has no mass.
pub fn concentration_width(snap: &Snapshot) -> Vec<Option<f64>> {
    let dy = if snap.ny() > 1 { snap.y[1] - snap.y[0] } else { 1.0 };
    let w = trapezoid_weights(snap.ny(), dy);
    (0..snap.sites())
        .map(|i| {
            let col = snap.column(i);
            let mass: f64 = col.iter().zip(&w).map(|(n, w)| n * w).sum();
            if mass <= 0.0 {
                return None;
            }
            let mean: f64 = col.iter().zip(&w).zip(&snap.y).map(|((n, w), y)| n * w * y).sum::<f64>() / mass;
            let var: f64 = col
                .iter()
                .zip(&w)
                .zip(&snap.y)
                .map(|((n, w), y)| n * w * (y - mean) * (y - mean))
                .sum::<f64>()
                / mass;
            Some(var.max(0.0).sqrt())
        })
        .collect()
}

/// Front structure extracted from a one-dimensional snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub ybar: Vec<Option<f64>>,
    pub sigma_y: Vec<Option<f64>>,
    pub support: Option<Support>,
    /// Front edge: right end of the support.
    pub ell: Option<f64>,
    /// Standard error of `rho` per site when the profile is an ensemble mean.
    pub rho_se: Option<Vec<f64>>,
}

/// Increases of `rho` smaller than this many standard errors of the
/// difference are not counted as violations.
pub const NOISE_Z: f64 = 3.0;

/// Per-site standard error of the mean `rho` over replicate snapshots;
/// zero with fewer than two replicates.
pub fn rho_standard_error(snaps: &[&Snapshot]) -> Vec<f64> {
    let Some(first) = snaps.first() else {
        return Vec::new();
    };
    let k = snaps.len() as f64;
    (0..first.rho.len())
        .map(|i| {
            if snaps.len() < 2 {
                return 0.0;
            }
            let mean = snaps.iter().map(|s| s.rho[i]).sum::<f64>() / k;
            let var = snaps.iter().map(|s| (s.rho[i] - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        })
        .collect()
}

impl WaveProfile {
    pub fn from_snapshot(snap: &Snapshot, rho_max: f64) -> Result<Self, SimError> {
        let x = match &snap.space {
            SpaceGrid::Line { x } => x.clone(),
            SpaceGrid::Plane { .. } => {
                return Err(SimError::Analysis("wave profiles need a 1D snapshot or transect".into()))
            }
        };
        let support = find_support(&snap.rho, rho_max, SUPPORT_THRESHOLD);
        let ybar = extract_ybar(snap, rho_max);
        let sigma_y = concentration_width(snap)
            .into_iter()
            .enumerate()
            .map(|(i, s)| if ybar[i].is_some() { s } else { None })
            .collect();
        Ok(WaveProfile {
            t: snap.t,
            ell: support.map(|s| x[s.end]),
            x,
            rho: snap.rho.clone(),
            ybar,
            sigma_y,
            support,
            rho_se: None,
        })
    }

    pub fn with_rho_se(mut self, se: Vec<f64>) -> Self {
        assert_eq!(se.len(), self.rho.len(), "one standard error per site");
        self.rho_se = Some(se);
        self
    }

    /// Width at the middle site of the support.
    pub fn mid_support_width(&self) -> Option<f64> {
        let s = self.support?;
        self.sigma_y[(s.start + s.end) / 2]
    }
}

/// Pass/fail limits for [`structure_checks`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureTolerance {
    /// Largest admissible fraction of adjacent pairs violating either
    /// monotonicity property.
    pub max_violation_fraction: f64,
    /// Upper bound on `ybar` at the rear of the support, if checked.
    pub rear_ybar_max: Option<f64>,
    /// Lower bound on `ybar` at the front edge, if checked.
    pub edge_ybar_min: Option<f64>,
}

impl Default for StructureTolerance {
    fn default() -> Self {
        StructureTolerance { max_violation_fraction: 0.05, rear_ybar_max: None, edge_ybar_min: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub pairs: usize,
    pub ybar_violations: usize,
    pub rho_violations: usize,
    pub ybar_violation_fraction: f64,
    pub rho_violation_fraction: f64,
    pub rear_ybar: Option<f64>,
    pub edge_ybar: Option<f64>,
    pub contiguous: bool,
    pub pass: bool,
}

/// Counts adjacent support pairs where `ybar` decreases or `rho` increases.
pub fn structure_checks(profile: &WaveProfile, tol: &StructureTolerance) -> StructureReport {
    let Some(s) = profile.support else {
        return StructureReport {
            pairs: 0,
            ybar_violations: 0,
            rho_violations: 0,
            ybar_violation_fraction: 0.0,
            rho_violation_fraction: 0.0,
            rear_ybar: None,
            edge_ybar: None,
            contiguous: false,
            pass: false,
        };
    };
    let rho_scale = profile.rho[s.start..=s.end].iter().fold(0.0f64, |a, &r| a.max(r));
    let mut pairs = 0;
    let (mut yv, mut rv) = (0, 0);
    for i in s.start..s.end {
        let (Some(y0), Some(y1)) = (profile.ybar[i], profile.ybar[i + 1]) else {
            continue;
        };
        pairs += 1;
        if y1 < y0 {
            yv += 1;
        }
        let noise = profile.rho_se.as_ref().map_or(0.0, |se| NOISE_Z * se[i].hypot(se[i + 1]));
        if profile.rho[i + 1] > profile.rho[i] + 1e-9 * rho_scale + noise {
            rv += 1;
        }
    }
    let frac = |v: usize| if pairs == 0 { 0.0 } else { v as f64 / pairs as f64 };
    let rear_ybar = profile.ybar[s.start];
    let edge_ybar = profile.ybar[s.end];
    let pass = s.contiguous
        && frac(yv) <= tol.max_violation_fraction
        && frac(rv) <= tol.max_violation_fraction
        && tol.rear_ybar_max.is_none_or(|m| rear_ybar.is_some_and(|y| y <= m))
        && tol.edge_ybar_min.is_none_or(|m| edge_ybar.is_some_and(|y| y >= m));
    StructureReport {
        pairs,
        ybar_violations: yv,
        rho_violations: rv,
        ybar_violation_fraction: frac(yv),
        rho_violation_fraction: frac(rv),
        rear_ybar,
        edge_ybar,
        contiguous: s.contiguous,
        pass,
    }
}

/// Least-squares front speed with the RMS residual of the fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Fits `ell(t) = c t + b` to the front edges of a snapshot sequence.
pub fn front_speed(edges: &[(f64, f64)]) -> Result<SpeedEstimate, SimError> {
    if edges.len() < 2 {
        return Err(SimError::Analysis(format!(
            "front speed needs at least 2 front edges, found {}",
            edges.len()
        )));
    }
    let k = edges.len() as f64;
    let tm = edges.iter().map(|e| e.0).sum::<f64>() / k;
    let lm = edges.iter().map(|e| e.1).sum::<f64>() / k;
    let stt: f64 = edges.iter().map(|e| (e.0 - tm) * (e.0 - tm)).sum();
    if stt == 0.0 {
        return Err(SimError::Analysis("front edges share a single time".into()));
    }
    let stl: f64 = edges.iter().map(|e| (e.0 - tm) * (e.1 - lm)).sum();
    let speed = stl / stt;
    let intercept = lm - speed * tm;
    let residual = (edges
        .iter()
        .map(|e| (e.1 - speed * e.0 - intercept).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok(SpeedEstimate { speed, intercept, residual })
}

/// Front edges of every snapshot that has a support.
pub fn front_edges(snaps: &[Snapshot], rho_max: f64) -> Vec<(f64, f64)> {
    snaps
        .iter()
        .filter_map(|s| {
            let x = match &s.space {
                SpaceGrid::Line { x } => x,
                SpaceGrid::Plane { .. } => return None,
            };
            find_support(&s.rho, rho_max, SUPPORT_THRESHOLD).map(|sup| (s.t, x[sup.end]))
        })
        .collect()
}

#[cfg(test)]
mod tests;
