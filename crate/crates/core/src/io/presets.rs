//! Built-in parameter sets.
//!
//! `paper-*` presets use the full published grids. The `desk-*` presets
//! shrink the domain and coarsen the grids so that every run finishes in
//! minutes on a workstation. Their `a0` is scaled by `dx * dy` (by
//! `dx^2 * dy` on the plane) so that the initial densities, and hence the
//! derived `rho_max`, stay close to those of the full grids.

use crate::error::ConfigError;
use crate::io::config::ConfigFile;

pub const PRESETS: &[&str] = &[
    "paper-1d-eps1e2",
    "paper-1d-eps5e3",
    "paper-1d-eps1e3",
    "paper-2d",
    "desk-1d",
    "desk-sweep",
    "desk-2d",
];

fn paper_1d(eps: f64, t_final: f64) -> ConfigFile {
    ConfigFile {
        eps: Some(eps),
        dx: Some(5e-2),
        dy: Some(2e-2),
        x_max: Some(100.0),
        t_final: Some(t_final),
        a0: Some(100.0),
        ybar0: Some(0.2),
        replicates: Some(5),
        ..ConfigFile::default()
    }
}

pub fn preset(name: &str) -> Result<ConfigFile, ConfigError> {
    let cfg = match name {
        "paper-1d-eps1e2" => paper_1d(1e-2, 30.0),
        "paper-1d-eps5e3" => paper_1d(5e-3, 30.0),
        "paper-1d-eps1e3" => paper_1d(1e-3, 15.0),
        "paper-2d" => ConfigFile {
            eps: Some(1e-2),
            dims: Some(2),
            dx: Some(0.1),
            dy: Some(2e-2),
            x_max: Some(10.0),
            t_final: Some(5.0),
            a0: Some(1.0),
            replicates: Some(15),
            snapshots: Some(vec![0.0, 5.0]),
            ..ConfigFile::default()
        },
        "desk-1d" => ConfigFile {
            eps: Some(1e-2),
            dx: Some(0.2),
            dy: Some(5e-2),
            tau: Some(2e-2),
            x_max: Some(50.0),
            t_final: Some(10.0),
            a0: Some(1000.0),
            dt_fraction: Some(0.1),
            replicates: Some(5),
            snapshots: Some(vec![5.0, 10.0]),
            ..ConfigFile::default()
        },
        "desk-sweep" => ConfigFile {
            eps: Some(1e-2),
            dx: Some(1.25e-2),
            dy: Some(2e-2),
            x_max: Some(70.0),
            t_final: Some(15.0),
            a0: Some(25.0),
            snapshots: Some(vec![5.0, 10.0, 15.0]),
            eps_sweep: Some(vec![1e-2, 5e-3, 1e-3]),
            sweep_ibm: Some(false),
            oracle_rho_linf_tol: Some(0.05),
            rear_ybar_max: Some(0.3),
            edge_ybar_min: Some(0.9),
            sigma_ratio_min: Some(2.0),
            ..ConfigFile::default()
        },
        "desk-2d" => ConfigFile {
            eps: Some(1e-2),
            dims: Some(2),
            dx: Some(0.2),
            dy: Some(5e-2),
            tau: Some(0.1),
            x_max: Some(8.0),
            t_final: Some(5.0),
            a0: Some(10.0),
            replicates: Some(15),
            snapshots: Some(vec![0.0, 5.0]),
            ..ConfigFile::default()
        },
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    Ok(cfg)
}
