use serde::{Deserialize, Serialize};

use crate::snapshot::SpaceGrid;

/// Spatial lattice of the individual-based model: a line of `nx` sites or a
/// square of `nx * nx` sites (numbered `i1 * nx + i2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Line { nx: usize },
    Plane { nx: usize },
}

impl Space {
    pub fn dims(self) -> usize {
        match self {
            Space::Line { .. } => 1,
            Space::Plane { .. } => 2,
        }
    }

    pub fn sites(self) -> usize {
        match self {
            Space::Line { nx } => nx,
            Space::Plane { nx } => nx * nx,
        }
    }

    /// Neighbour of `site` one step along `axis` in direction `dir` (`-1` or
    /// `+1`), or `None` when that step leaves the domain.
    #[inline]
    pub fn neighbor(self, site: usize, axis: usize, dir: i32) -> Option<usize> {
        let (nx, stride) = match (self, axis) {
            (Space::Line { nx }, 0) => (nx, 1),
            (Space::Plane { nx }, 0) => (nx, nx),
            (Space::Plane { nx }, 1) => (nx, 1),
            _ => panic!("axis {axis} out of range for {self:?}"),
        };
        let coord = (site / stride) % nx;
        match dir {
            -1 if coord > 0 => Some(site - stride),
            1 if coord + 1 < nx => Some(site + stride),
            _ => None,
        }
    }

    /// Squared distance of `site` from the origin, in lattice units.
    pub fn index_radius2(self, site: usize) -> usize {
        match self {
            Space::Line { .. } => site * site,
            Space::Plane { nx } => {
                let (a, b) = (site / nx, site % nx);
                a * a + b * b
            }
        }
    }

    pub fn grid(self, dx: f64) -> SpaceGrid {
        match self {
            Space::Line { nx } => SpaceGrid::Line { x: axis(nx, dx) },
            Space::Plane { nx } => SpaceGrid::Plane { x1: axis(nx, dx), x2: axis(nx, dx) },
        }
    }
}

fn axis(n: usize, dx: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * dx).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_neighbours_abort_at_ends() {
        let s = Space::Line { nx: 4 };
        assert_eq!(s.neighbor(0, 0, -1), None);
        assert_eq!(s.neighbor(0, 0, 1), Some(1));
        assert_eq!(s.neighbor(3, 0, 1), None);
        assert_eq!(s.neighbor(2, 0, -1), Some(1));
    }

    #[test]
    fn plane_neighbours() {
        let s = Space::Plane { nx: 3 };
        // site 4 is the centre (1, 1)
        assert_eq!(s.neighbor(4, 0, -1), Some(1));
        assert_eq!(s.neighbor(4, 0, 1), Some(7));
        assert_eq!(s.neighbor(4, 1, -1), Some(3));
        assert_eq!(s.neighbor(4, 1, 1), Some(5));
        // (0, 2): no up along axis 0 below zero, no right along axis 1
        assert_eq!(s.neighbor(2, 0, -1), None);
        assert_eq!(s.neighbor(2, 1, 1), None);
        assert_eq!(s.index_radius2(5), 1 + 4);
    }
}
