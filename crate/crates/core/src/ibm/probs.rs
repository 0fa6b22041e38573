//! Per-cell event probabilities for the four sub-steps of a lattice update.

use crate::model::Model;

/// Outcome probabilities of a three-way event: move down/left, move
/// up/right, or nothing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triple {
    pub minus: f64,
    pub plus: f64,
    pub stay: f64,
}

impl Triple {
    fn new(minus: f64, plus: f64) -> Self {
        let t = Triple { minus, plus, stay: 1.0 - minus - plus };
        debug_assert!(t.is_valid(), "probability triple out of range: {t:?}");
        t
    }

    pub fn is_valid(&self) -> bool {
        let ok = |p: f64| (0.0..=1.0).contains(&p);
        ok(self.minus) && ok(self.plus) && ok(self.stay)
            && (self.minus + self.plus + self.stay - 1.0).abs() < 1e-12
    }
}

/// `(P_L, P_R, P_S)` of undirected movement: `theta / 2` each way.
pub fn random_move_probs(model: &Model) -> Triple {
    let half = model.params().theta() / 2.0;
    Triple::new(half, half)
}

/// `(P_HL, P_HR, P_HS)` of haptotactic movement up the ECM gradient.
pub fn hapto_move_probs(e_left: f64, e_here: f64, e_right: f64, y: f64, model: &Model) -> Triple {
    let b = model.base();
    let scale = model.params().eta() * model.mu(y) / (2.0 * b.e_max);
    Triple::new(scale * (e_left - e_here).max(0.0), scale * (e_right - e_here).max(0.0))
}

/// `(P_D, P_U, P_N)` of a spontaneous phenotype change. Boundary aborts
/// are applied by the stepper, not folded into these values.
pub fn phenotype_switch_probs(model: &Model) -> Triple {
    let half = model.params().beta() / 2.0;
    Triple::new(half, half)
}

/// `(P_A, P_B, P_Q)`: death, division and quiescence probabilities.
pub fn proliferation_probs(y: f64, rho: f64, model: &Model) -> Triple {
    let rate = model.growth_rate(y, rho);
    let tau = model.params().tau();
    Triple::new(tau * (-rate).max(0.0), tau * rate.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{default_base, ModelParams, PhenotypeLaws};
    use approx::assert_relative_eq;

    fn model() -> Model {
        let mut base = default_base(1e-2);
        base.tau = 1.25e-3;
        Model::new(ModelParams::from_base(base), PhenotypeLaws::default()).unwrap()
    }

    #[test]
    fn random_moves() {
        let t = random_move_probs(&model());
        assert_relative_eq!(t.minus, 5e-5, max_relative = 1e-12);
        assert_relative_eq!(t.plus, 5e-5, max_relative = 1e-12);
        assert_relative_eq!(t.stay, 0.9999, max_relative = 1e-12);
    }

    #[test]
    fn random_moves_at_theta_one() {
        // tau = dx^2 / 2 and eps = 1 gives theta = 1.
        let mut base = default_base(1.0);
        base.dy = 1.0;
        // The MDE update is unstable at this step size, so skip validation.
        let m = Model::unchecked(ModelParams::from_base(base), PhenotypeLaws::default());
        let t = random_move_probs(&m);
        assert_eq!((t.minus, t.plus, t.stay), (0.5, 0.5, 0.0));
    }

    #[test]
    fn hapto_moves() {
        let m = model();
        let flat = hapto_move_probs(0.7, 0.7, 0.7, 1.0, &m);
        assert_eq!((flat.minus, flat.plus, flat.stay), (0.0, 0.0, 1.0));
        let insensitive = hapto_move_probs(1.0, 0.0, 1.0, 0.0, &m);
        assert_eq!((insensitive.minus, insensitive.plus), (0.0, 0.0));
        // eta = 1e-2, mu(1) = 1: right = 1e-2 * 0.5 / 2, left gradient negative
        let t = hapto_move_probs(0.3, 0.5, 1.0, 1.0, &m);
        assert_relative_eq!(t.plus, 2.5e-3, max_relative = 1e-12);
        assert_eq!(t.minus, 0.0);
    }

    #[test]
    fn phenotype_switches() {
        let t = phenotype_switch_probs(&model());
        assert_relative_eq!(t.minus, 3.125e-4, max_relative = 1e-12);
        assert_relative_eq!(t.stay, 0.999375, max_relative = 1e-12);
    }

    #[test]
    fn proliferation() {
        let m = model();
        let rho_max = m.base().rho_max;
        let t = proliferation_probs(0.0, 0.0, &m);
        assert_relative_eq!(t.plus, 1.25e-4, max_relative = 1e-12);
        assert_eq!(t.minus, 0.0);
        for y in [0.0, 0.3, 1.0] {
            assert_eq!(proliferation_probs(y, rho_max, &m).plus, 0.0);
            assert_eq!(proliferation_probs(y, 2.0 * rho_max, &m).plus, 0.0);
        }
        let zero = proliferation_probs(0.0, rho_max, &m);
        assert_eq!((zero.minus, zero.plus, zero.stay), (0.0, 0.0, 1.0));
    }
}
