//! Engine-agnostic field snapshots.
//!
//! Both engines emit [`Snapshot`]s with identical layout so analysis and
//! comparison code never needs to know where a snapshot came from.

use serde::{Deserialize, Serialize};

/// Spatial lattice of a snapshot. Plane sites are numbered `i1 * n2 + i2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SpaceGrid {
    Line { x: Vec<f64> },
    Plane { x1: Vec<f64>, x2: Vec<f64> },
}

impl SpaceGrid {
    pub fn sites(&self) -> usize {
        match self {
            SpaceGrid::Line { x } => x.len(),
            SpaceGrid::Plane { x1, x2 } => x1.len() * x2.len(),
        }
    }

    pub fn dims(&self) -> usize {
        match self {
            SpaceGrid::Line { .. } => 1,
            SpaceGrid::Plane { .. } => 2,
        }
    }

    /// Coordinates of a site: `(x, None)` on a line, `(x1, Some(x2))` on a plane.
    pub fn coords(&self, site: usize) -> (f64, Option<f64>) {
        match self {
            SpaceGrid::Line { x } => (x[site], None),
            SpaceGrid::Plane { x1, x2 } => {
                let n2 = x2.len();
                (x1[site / n2], Some(x2[site % n2]))
            }
        }
    }

    /// Spacing of the first axis (zero for single-point grids).
    pub fn spacing(&self) -> f64 {
        let x = match self {
            SpaceGrid::Line { x } => x,
            SpaceGrid::Plane { x1, .. } => x1,
        };
        if x.len() > 1 {
            x[1] - x[0]
        } else {
            0.0
        }
    }
}

/// Fields at one rescaled time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub space: SpaceGrid,
    /// Phenotype nodes.
    pub y: Vec<f64>,
    /// Cell population density, site-major: `n[site * ny + j]`.
    pub n: Vec<f64>,
    /// Cell density per site.
    pub rho: Vec<f64>,
    /// MDE concentration per site.
    pub mde: Vec<f64>,
    /// ECM density per site.
    pub ecm: Vec<f64>,
}

impl Snapshot {
    pub fn sites(&self) -> usize {
        self.space.sites()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    /// Phenotype column of `n` at one site.
    pub fn column(&self, site: usize) -> &[f64] {
        let ny = self.ny();
        &self.n[site * ny..(site + 1) * ny]
    }

    /// Element-wise mean of snapshots sharing one layout; `None` if empty.
    pub fn mean(snaps: &[&Snapshot]) -> Option<Snapshot> {
        let first = *snaps.first()?;
        let k = snaps.len() as f64;
        let avg = |get: fn(&Snapshot) -> &Vec<f64>| -> Vec<f64> {
            let mut acc = vec![0.0; get(first).len()];
            for s in snaps {
                for (a, v) in acc.iter_mut().zip(get(s)) {
                    *a += v;
                }
            }
            acc.iter_mut().for_each(|a| *a /= k);
            acc
        };
        Some(Snapshot {
            t: first.t,
            space: first.space.clone(),
            y: first.y.clone(),
            n: avg(|s| &s.n),
            rho: avg(|s| &s.rho),
            mde: avg(|s| &s.mde),
            ecm: avg(|s| &s.ecm),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(v: f64) -> Snapshot {
        Snapshot {
            t: 1.0,
            space: SpaceGrid::Line { x: vec![0.0, 0.5] },
            y: vec![0.0, 1.0],
            n: vec![v; 4],
            rho: vec![v; 2],
            mde: vec![v; 2],
            ecm: vec![v; 2],
        }
    }

    #[test]
    fn mean_of_one_is_identity() {
        let s = snap(3.0);
        assert_eq!(Snapshot::mean(&[&s]).unwrap(), s);
        assert!(Snapshot::mean(&[]).is_none());
    }

    #[test]
    fn mean_averages_elementwise() {
        let (a, b) = (snap(1.0), snap(3.0));
        let m = Snapshot::mean(&[&a, &b]).unwrap();
        assert_eq!(m.n, vec![2.0; 4]);
        assert_eq!(m.ecm, vec![2.0; 2]);
    }

    #[test]
    fn plane_coordinates() {
        let g = SpaceGrid::Plane { x1: vec![0.0, 1.0, 2.0], x2: vec![0.0, 0.5] };
        assert_eq!(g.sites(), 6);
        assert_eq!(g.coords(3), (1.0, Some(0.5)));
        assert_eq!(g.spacing(), 1.0);
    }
}
