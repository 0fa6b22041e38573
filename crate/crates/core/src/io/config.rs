//! TOML configuration: flat keys, optional preset, explicit keys override.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::continuum::SAFETY;
use crate::error::{ConfigError, Error, Result};
use crate::ibm::{initial_rho_max, InitialProfile, Space};
use crate::io::presets;
use crate::model::{BaseParams, Model, ModelParams, PhenotypeLaws};

/// Raw configuration as written by the user. Every key is optional; unset
/// keys fall back to the preset, then to the built-in defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,

    pub eps: Option<f64>,
    pub dx: Option<f64>,
    pub dy: Option<f64>,
    /// Defaults to `dx^2 / 2`.
    pub tau: Option<f64>,
    pub x_max: Option<f64>,
    pub y_max: Option<f64>,
    pub t_final: Option<f64>,
    pub alpha: Option<f64>,
    /// Defaults to the largest initial density of the lattice model.
    pub rho_max: Option<f64>,
    pub e_max: Option<f64>,
    pub kappa_m: Option<f64>,
    pub kappa_e: Option<f64>,
    pub p_min: Option<f64>,
    pub zeta: Option<f64>,

    pub a0: Option<f64>,
    pub ybar0: Option<f64>,
    /// Spatial dimension of the lattice model (1 or 2).
    pub dims: Option<usize>,

    pub mu_law: Option<String>,
    pub r_law: Option<String>,
    pub p_law: Option<String>,

    /// Defaults to `{T/3, 2T/3, T}`.
    pub snapshots: Option<Vec<f64>>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub eps_sweep: Option<Vec<f64>>,
    /// Whether `sweep` also runs the lattice model at every `eps`.
    pub sweep_ibm: Option<bool>,
    /// Fraction of the stable continuum step to take, in `(0, 1]`.
    pub dt_fraction: Option<f64>,

    pub cross_l1_tol: Option<f64>,
    pub oracle_rho_linf_tol: Option<f64>,
    pub max_violation_fraction: Option<f64>,
    pub rear_ybar_max: Option<f64>,
    pub edge_ybar_min: Option<f64>,
    pub edge_band: Option<f64>,
    pub sigma_ratio_min: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Keys set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &ConfigFile) -> Self {
        overlay!(self, other;
            preset, eps, dx, dy, tau, x_max, y_max, t_final, alpha, rho_max, e_max,
            kappa_m, kappa_e, p_min, zeta, a0, ybar0, dims, mu_law, r_law, p_law,
            snapshots, replicates, seed, eps_sweep, sweep_ibm, cross_l1_tol,
            oracle_rho_linf_tol, max_violation_fraction, rear_ybar_max, edge_ybar_min,
            edge_band, sigma_ratio_min, dt_fraction,
        );
        self
    }

    /// Expands the preset (if any) under the explicit keys.
    pub fn expand(&self) -> Result<Self, ConfigError> {
        match &self.preset {
            Some(name) => Ok(presets::preset(name)?.overlay(self)),
            None => Ok(self.clone()),
        }
    }
}

/// Acceptance thresholds applied by `compare` and `sweep`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    /// Relative L1 gap between lattice-mean and continuum `rho`.
    pub cross_l1_tol: f64,
    /// Interior `max |rho - rho_max r(ybar)| / rho_max` at the final time.
    pub oracle_rho_linf_tol: Option<f64>,
    pub max_violation_fraction: f64,
    pub rear_ybar_max: Option<f64>,
    pub edge_ybar_min: Option<f64>,
    /// Fraction of the support next to the front edge left out of the
    /// oracle norms.
    pub edge_band: f64,
    /// Lower bound on `sigma(largest eps) / sigma(smallest eps)` in a sweep.
    pub sigma_ratio_min: Option<f64>,
}

/// A validated configuration ready to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadedConfig {
    /// Fully expanded keys (preset applied).
    pub file: ConfigFile,
    pub model: Model,
    pub profile: InitialProfile,
    pub dims: usize,
    pub snapshots: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub eps_sweep: Vec<f64>,
    pub sweep_ibm: bool,
    /// Fraction of the stable continuum step actually taken.
    pub dt_fraction: f64,
    pub checks: Checks,
    /// SHA-256 of the configuration text.
    pub hash: String,
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Reads, expands and validates a configuration file.
pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// Parses configuration text; see [`load_config`].
pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let raw = ConfigFile::parse(text)?;
    let mut loaded = resolve(&raw.expand()?)?;
    loaded.hash = sha256_hex(text);
    Ok(loaded)
}

/// Configuration of a built-in preset with no overrides.
pub fn load_preset(name: &str) -> Result<LoadedConfig, ConfigError> {
    parse_config(&format!("preset = \"{name}\"\n"))
}

impl LoadedConfig {
    /// Same configuration at another `eps`. A carrying density that was
    /// derived from the initial profile is derived again.
    pub fn with_eps(&self, eps: f64) -> Result<LoadedConfig, ConfigError> {
        let mut file = self.file.clone();
        file.eps = Some(eps);
        let mut out = resolve(&file)?;
        out.hash.clone_from(&self.hash);
        Ok(out)
    }
}

fn resolve(f: &ConfigFile) -> Result<LoadedConfig, ConfigError> {
    let eps = f.eps.unwrap_or(1e-2);
    let dx = f.dx.unwrap_or(5e-2);
    let base = BaseParams {
        tau: f.tau.unwrap_or(dx * dx / 2.0),
        dx,
        dy: f.dy.unwrap_or(2e-2),
        eps,
        x_max: f.x_max.unwrap_or(100.0),
        y_max: f.y_max.unwrap_or(1.0),
        t_final: f.t_final.unwrap_or(30.0),
        alpha: f.alpha.unwrap_or(0.1),
        rho_max: f.rho_max.unwrap_or(1.0),
        e_max: f.e_max.unwrap_or(1.0),
        kappa_m: f.kappa_m.unwrap_or(1.0),
        kappa_e: f.kappa_e.unwrap_or(1.0),
        p_min: f.p_min.unwrap_or(1e-7),
        zeta: f.zeta.unwrap_or(1e-5),
    };
    let laws = PhenotypeLaws::from_names(
        f.mu_law.as_deref().unwrap_or("quadratic"),
        f.r_law.as_deref().unwrap_or("quadratic"),
        f.p_law.as_deref().unwrap_or("quadratic"),
    )?;
    let dims = f.dims.unwrap_or(1);
    if !(1..=2).contains(&dims) {
        return Err(ConfigError::RunSpec(format!("dims must be 1 or 2, got {dims}")));
    }
    let t_final = base.t_final;
    let mut model = Model::new(ModelParams::from_base(base), laws)?;
    let profile = InitialProfile::new(
        positive("a0", f.a0.unwrap_or(100.0))?,
        f.ybar0.unwrap_or(0.2),
        eps,
        &model.phenotype_grid(),
    );
    if f.rho_max.is_none() {
        let space = match dims {
            1 => Space::Line { nx: model.params().nx() },
            _ => Space::Plane { nx: model.params().nx() },
        };
        let rho_max = initial_rho_max(&profile, space, &model);
        if rho_max <= 0.0 {
            return Err(ConfigError::RunSpec(
                "initial profile rounds to an empty lattice; rho_max cannot be derived".into(),
            ));
        }
        model = model.with_rho_max(rho_max)?;
    }

    let snapshots = f
        .snapshots
        .clone()
        .unwrap_or_else(|| vec![t_final / 3.0, 2.0 * t_final / 3.0, t_final]);
    check_times(&snapshots, t_final)?;
    let replicates = f.replicates.unwrap_or(5);
    if replicates == 0 {
        return Err(ConfigError::RunSpec("replicates must be at least 1".into()));
    }
    let eps_sweep = f.eps_sweep.clone().unwrap_or_else(|| vec![1e-2, 5e-3, 1e-3]);
    for &e in &eps_sweep {
        positive("eps_sweep entry", e)?;
    }
    let dt_fraction = f.dt_fraction.unwrap_or(SAFETY);
    if !(dt_fraction > 0.0 && dt_fraction <= 1.0) {
        return Err(ConfigError::RunSpec(format!("dt_fraction must lie in (0, 1], got {dt_fraction}")));
    }
    let checks = Checks {
        cross_l1_tol: positive("cross_l1_tol", f.cross_l1_tol.unwrap_or(0.15))?,
        oracle_rho_linf_tol: f.oracle_rho_linf_tol,
        max_violation_fraction: f.max_violation_fraction.unwrap_or(0.05),
        rear_ybar_max: f.rear_ybar_max,
        edge_ybar_min: f.edge_ybar_min,
        edge_band: f.edge_band.unwrap_or(0.1),
        sigma_ratio_min: f.sigma_ratio_min,
    };
    if !(0.0..1.0).contains(&checks.edge_band) {
        return Err(ConfigError::RunSpec(format!("edge_band must lie in [0, 1), got {}", checks.edge_band)));
    }
    Ok(LoadedConfig {
        file: f.clone(),
        model,
        profile,
        dims,
        snapshots,
        replicates,
        seed: f.seed.unwrap_or(1),
        eps_sweep,
        sweep_ibm: f.sweep_ibm.unwrap_or(true),
        dt_fraction,
        checks,
        hash: String::new(),
    })
}

fn positive(name: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::NonPositive { name, value })
    }
}

/// Snapshot times must be sorted and lie in `[0, t_final]`.
pub fn check_times(times: &[f64], t_final: f64) -> Result<(), ConfigError> {
    if times.is_empty() {
        return Err(ConfigError::RunSpec("at least one snapshot time is required".into()));
    }
    if let Some(t) = times.iter().find(|&&t| !(0.0..=t_final).contains(&t)) {
        return Err(ConfigError::RunSpec(format!("snapshot time {t} lies outside [0, {t_final}]")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(ConfigError::RunSpec("snapshot times must be sorted".into()));
    }
    Ok(())
}
