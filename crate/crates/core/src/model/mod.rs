//! Parameters, phenotype laws and scaling relations shared by both engines.

mod laws;
mod params;
mod validate;

pub use laws::{PhenotypeLaws, ProliferationLaw, SecretionLaw, SensitivityLaw};
pub use params::{derive_scaled_params, steps_to, BaseParams, ModelParams, ScaledParams};
pub use validate::{validate_config, Constraint, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// A validated parameter set together with its phenotype laws.
///
/// Both engines take a `&Model`, so a cross-engine comparison always runs
/// on one and the same configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    params: ModelParams,
    laws: PhenotypeLaws,
}

impl Model {
    pub fn new(params: ModelParams, laws: PhenotypeLaws) -> Result<Self, ConfigError> {
        let report = validate_config(&params, &laws);
        if !report.is_empty() {
            return Err(ConfigError::Invalid(report));
        }
        Ok(Model { params, laws })
    }

    #[cfg(test)]
    pub(crate) fn unchecked(params: ModelParams, laws: PhenotypeLaws) -> Self {
        Model { params, laws }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn laws(&self) -> &PhenotypeLaws {
        &self.laws
    }

    pub fn base(&self) -> &BaseParams {
        &self.params.base
    }

    pub fn mu(&self, y: f64) -> f64 {
        self.laws.mu(y)
    }

    pub fn r(&self, y: f64) -> f64 {
        self.laws.r(y, self.params.base.y_max)
    }

    pub fn p(&self, y: f64) -> f64 {
        self.laws.p(y, self.params.base.p_min, self.params.base.zeta)
    }

    /// Net growth rate `alpha (r(y) - rho / rho_max)`.
    pub fn growth_rate(&self, y: f64, rho: f64) -> f64 {
        growth_rate(y, rho, &self.laws, &self.params)
    }

    /// Phenotype grid `y_j = j dy`.
    pub fn phenotype_grid(&self) -> Vec<f64> {
        (0..self.params.ny()).map(|j| j as f64 * self.params.dy()).collect()
    }

    /// Spatial lattice `x_i = i dx`.
    pub fn space_grid(&self) -> Vec<f64> {
        (0..self.params.nx()).map(|i| i as f64 * self.params.dx()).collect()
    }

    /// Returns a copy with `rho_max` replaced. Validation is re-run.
    pub fn with_rho_max(&self, rho_max: f64) -> Result<Self, ConfigError> {
        let mut base = self.params.base.clone();
        base.rho_max = rho_max;
        Model::new(ModelParams::from_base(base), self.laws)
    }
}

pub fn growth_rate(y: f64, rho: f64, laws: &PhenotypeLaws, params: &ModelParams) -> f64 {
    let b = &params.base;
    b.alpha * (laws.r(y, b.y_max) - rho / b.rho_max)
}

/// Inputs of the built-in one-dimensional defaults (`eps` left to the caller).
pub fn default_base(eps: f64) -> BaseParams {
    let dx = 5e-2;
    BaseParams {
        tau: dx * dx / 2.0,
        dx,
        dy: 2e-2,
        eps,
        x_max: 100.0,
        y_max: 1.0,
        t_final: 30.0,
        alpha: 0.1,
        rho_max: 1.0,
        e_max: 1.0,
        kappa_m: 1.0,
        kappa_e: 1.0,
        p_min: 1e-7,
        zeta: 1e-5,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(eps: f64) -> Model {
        Model::new(ModelParams::from_base(default_base(eps)), PhenotypeLaws::default()).unwrap()
    }

    #[test]
    fn growth_rate_boundary_values() {
        let m = model(1e-2);
        let rho_max = m.base().rho_max;
        assert_eq!(m.growth_rate(0.0, rho_max), 0.0);
        assert_eq!(m.growth_rate(1.0, 0.0), 0.0);
        // 0.1 * (0.75 - 0.5)
        assert!((m.growth_rate(0.5, rho_max / 2.0) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn defaults_validate_cleanly() {
        for eps in [1e-2, 5e-3, 1e-3] {
            let p = ModelParams::from_base(default_base(eps));
            let report = validate_config(&p, &PhenotypeLaws::default());
            assert!(report.is_empty(), "eps={eps}: {report}");
        }
    }

    #[test]
    fn haptotaxis_violation_is_reported() {
        // eta = 2 e_max tau eps / dx^2 = eps when tau = dx^2 / 2; mu(1) = 1
        let mut base = default_base(1e-2);
        base.eps = 1.5;
        base.dy = 1.0; // keeps beta = 2 tau eps^2 / dy^2 small
        let p = ModelParams::from_base(base);
        assert!((p.eta() - 1.5).abs() < 1e-12);
        let report = validate_config(&p, &PhenotypeLaws::default());
        assert!(report.cites(Constraint::HaptotaxisBound), "{report}");
    }

    #[test]
    fn proliferation_violation_is_reported() {
        let mut base = default_base(1e-2);
        base.tau = 20.0;
        base.dx = 100.0;
        base.x_max = 100.0;
        base.dy = 1.0;
        let p = ModelParams::from_base(base);
        let report = validate_config(&p, &PhenotypeLaws::default());
        assert!(report.cites(Constraint::ProliferationBound), "{report}");
    }

    #[test]
    fn theta_violation_names_constraint() {
        let mut base = default_base(1e-2);
        base.eps = 200.0;
        let report = validate_config(&ModelParams::from_base(base), &PhenotypeLaws::default());
        assert!(report.cites(Constraint::RandomMoveProbability));
    }

    #[test]
    fn misaligned_grid_and_bad_secretion_are_reported() {
        let mut base = default_base(1e-2);
        base.dy = 0.03;
        base.p_min = 0.0;
        let report = validate_config(&ModelParams::from_base(base), &PhenotypeLaws::default());
        assert!(report.cites(Constraint::GridAlignment));
        assert!(report.cites(Constraint::SecretionLaw));
    }

    #[test]
    fn non_positive_inputs_short_circuit() {
        let mut base = default_base(1e-2);
        base.alpha = -1.0;
        let report = validate_config(&ModelParams::from_base(base), &PhenotypeLaws::default());
        assert_eq!(report.violations.len(), 1);
        assert!(report.cites(Constraint::Positivity));
    }

    #[test]
    fn laws_monotone_on_grid() {
        for laws in [
            PhenotypeLaws::default(),
            PhenotypeLaws::from_names("linear", "linear", "linear").unwrap(),
        ] {
            let m = Model::new(ModelParams::from_base(default_base(1e-2)), laws).unwrap();
            let ys = m.phenotype_grid();
            assert_eq!(m.mu(0.0), 0.0);
            assert_eq!(m.r(0.0), 1.0);
            assert_eq!(m.r(1.0), 0.0);
            assert_eq!(m.p(0.0), m.base().p_min);
            for w in ys.windows(2) {
                assert!(m.mu(w[1]) >= m.mu(w[0]) && m.mu(w[0]) >= 0.0);
                assert!(m.r(w[1]) <= m.r(w[0]));
                assert!(m.p(w[1]) >= m.p(w[0]));
            }
        }
    }

    proptest! {
        #[test]
        fn growth_rate_is_affine_in_rho(y in 0.0f64..1.0, rho in 0.0f64..3.0, h in 1e-3f64..0.5) {
            let m = model(1e-2);
            let b = m.base();
            let slope = (m.growth_rate(y, rho + h) - m.growth_rate(y, rho)) / h;
            prop_assert!((slope + b.alpha / b.rho_max).abs() < 1e-9);
        }

        #[test]
        fn scaled_limits_are_exact(tau in 1e-4f64..1e-2, dx in 1e-2f64..1.0, dy in 1e-2f64..1.0, eps in 1e-4f64..1e-1) {
            let s = ScaledParams::compute(tau, dx, dy, eps, 1.0);
            prop_assert!((s.diffusivity(tau, dx) / (eps * eps) - 1.0).abs() < 1e-13);
            prop_assert!((s.haptotactic_coefficient(tau, dx, 1.0) / eps - 1.0).abs() < 1e-13);
            prop_assert!((s.phenotypic_diffusivity(tau, dy) / (eps * eps) - 1.0).abs() < 1e-13);
        }
    }
}
