//! Model parameters and the discrete-to-continuum scaling relations.

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::validate::Constraint;

/// Physical and numerical parameters supplied by the user.
///
/// `rho_max` may be left unset; it is then computed from the initial cell
/// profile when the configuration is loaded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    /// Time step of one individual-based update (original time units).
    pub tau: f64,
    pub dx: f64,
    pub dy: f64,
    /// Small scaling parameter.
    pub eps: f64,
    /// Length of the spatial domain `[0, x_max]`.
    pub x_max: f64,
    /// Length of the phenotype domain `[0, y_max]`.
    pub y_max: f64,
    /// Final rescaled time.
    pub t_final: f64,
    pub alpha: f64,
    pub rho_max: f64,
    pub e_max: f64,
    pub kappa_m: f64,
    pub kappa_e: f64,
    pub p_min: f64,
    pub zeta: f64,
}

/// Per-step probabilities and MDE diffusivity implied by the scaling choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledParams {
    /// Random-movement probability.
    pub theta: f64,
    /// Haptotactic movement scale.
    pub eta: f64,
    /// Phenotype-switching probability.
    pub beta: f64,
    /// MDE diffusivity in original time units.
    pub d_m: f64,
}

impl ScaledParams {
    /// Evaluates the scalings without range checks.
    pub fn compute(tau: f64, dx: f64, dy: f64, eps: f64, e_max: f64) -> Self {
        let eps2 = eps * eps;
        ScaledParams {
            theta: 2.0 * tau * eps2 / (dx * dx),
            eta: 2.0 * e_max * tau * eps / (dx * dx),
            beta: 2.0 * tau * eps2 / (dy * dy),
            d_m: eps,
        }
    }

    /// Random-walk diffusivity recovered from `theta`: `theta dx^2 / (2 tau)`.
    pub fn diffusivity(&self, tau: f64, dx: f64) -> f64 {
        self.theta * dx * dx / (2.0 * tau)
    }

    /// Haptotactic coefficient recovered from `eta`: `eta dx^2 / (2 e_max tau)`.
    pub fn haptotactic_coefficient(&self, tau: f64, dx: f64, e_max: f64) -> f64 {
        self.eta * dx * dx / (2.0 * e_max * tau)
    }

    /// Phenotypic diffusivity recovered from `beta`: `beta dy^2 / (2 tau)`.
    pub fn phenotypic_diffusivity(&self, tau: f64, dy: f64) -> f64 {
        self.beta * dy * dy / (2.0 * tau)
    }
}

/// Computes `(theta, eta, beta, D_M)` so that the diffusive limits of the
/// lattice model reproduce the rescaled continuum system.
///
/// Fails if a probability leaves `(0, 1]`.
pub fn derive_scaled_params(
    tau: f64,
    dx: f64,
    dy: f64,
    eps: f64,
    e_max: f64,
) -> Result<ScaledParams, ConfigError> {
    for (name, v) in [("tau", tau), ("dx", dx), ("dy", dy), ("eps", eps), ("e_max", e_max)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::NonPositive { name, value: v });
        }
    }
    let scaled = ScaledParams::compute(tau, dx, dy, eps, e_max);
    if scaled.theta > 1.0 {
        return Err(ConfigError::Constraint {
            constraint: Constraint::RandomMoveProbability,
            detail: format!("theta = {:e} exceeds 1", scaled.theta),
        });
    }
    if scaled.beta > 1.0 {
        return Err(ConfigError::Constraint {
            constraint: Constraint::PhenotypeSwitchProbability,
            detail: format!("beta = {:e} exceeds 1", scaled.beta),
        });
    }
    Ok(scaled)
}

/// Full parameter set: user inputs plus derived scalings. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub base: BaseParams,
    pub scaled: ScaledParams,
}

impl ModelParams {
    /// Derives the scaled parameters without range checks; run
    /// [`crate::model::validate_config`] before simulating.
    pub fn from_base(base: BaseParams) -> Self {
        let scaled = ScaledParams::compute(base.tau, base.dx, base.dy, base.eps, base.e_max);
        ModelParams { base, scaled }
    }

    pub fn tau(&self) -> f64 {
        self.base.tau
    }
    pub fn dx(&self) -> f64 {
        self.base.dx
    }
    pub fn dy(&self) -> f64 {
        self.base.dy
    }
    pub fn eps(&self) -> f64 {
        self.base.eps
    }
    pub fn theta(&self) -> f64 {
        self.scaled.theta
    }
    pub fn eta(&self) -> f64 {
        self.scaled.eta
    }
    pub fn beta(&self) -> f64 {
        self.scaled.beta
    }
    pub fn d_m(&self) -> f64 {
        self.scaled.d_m
    }

    /// Number of lattice points `x_i = i dx` covering `[0, x_max]`.
    pub fn nx(&self) -> usize {
        grid_points(self.base.x_max, self.base.dx)
    }

    /// Number of phenotype points `y_j = j dy` covering `[0, y_max]`.
    pub fn ny(&self) -> usize {
        grid_points(self.base.y_max, self.base.dy)
    }

    /// Rescaled time reached after `k` individual-based steps.
    pub fn rescaled_time_of_step(&self, k: u64) -> f64 {
        k as f64 * self.base.eps * self.base.tau
    }

    /// Smallest step count whose rescaled time reaches `t`.
    pub fn steps_to(&self, t: f64) -> u64 {
        steps_to(t, self.base.eps, self.base.tau)
    }
}

pub(crate) fn grid_points(length: f64, step: f64) -> usize {
    (length / step).round() as usize + 1
}

/// `ceil(t / (eps tau))`, snapping ratios within round-off of an integer.
pub fn steps_to(t: f64, eps: f64, tau: f64) -> u64 {
    if t <= 0.0 {
        return 0;
    }
    let ratio = t / (eps * tau);
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest as u64
    } else {
        ratio.ceil() as u64
    }
}
