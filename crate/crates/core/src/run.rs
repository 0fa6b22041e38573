//! Orchestration of the five run modes and their reports.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::continuum::{ContinuumRun, ContinuumSolver};
use crate::error::{ConfigError, Error, Result};
use crate::ibm::{replicate_seeds, run_2d, run_replicates, EnsembleSummary, Space};
use crate::io::{append_ndjson, check_times, fmt_f64, write_snapshots, write_table, LoadedConfig};
use crate::snapshot::Snapshot;
use crate::wave::{
    compare_to_oracle, front_edges, front_speed, radial_transect, reflection_asymmetry, rho_standard_error,
    structure_checks,
    OracleErrors, StructureTolerance, WaveProfile,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ibm,
    Continuum,
    Compare,
    Sweep,
    Ibm2d,
}

impl Mode {
    pub const NAMES: [&'static str; 5] = ["ibm", "continuum", "compare", "sweep", "ibm2d"];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Ibm => "ibm",
            Mode::Continuum => "continuum",
            Mode::Compare => "compare",
            Mode::Sweep => "sweep",
            Mode::Ibm2d => "ibm2d",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "ibm" => Ok(Mode::Ibm),
            "continuum" => Ok(Mode::Continuum),
            "compare" => Ok(Mode::Compare),
            "sweep" => Ok(Mode::Sweep),
            "ibm2d" => Ok(Mode::Ibm2d),
            other => Err(ConfigError::RunSpec(format!("unknown mode `{other}`"))),
        }
    }
}

/// What to run and where to write it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub mode: Mode,
    pub config: Option<PathBuf>,
    pub snapshots: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl RunSpec {
    /// Spec with the configuration's own snapshot times, replicate count
    /// and seed.
    pub fn from_config(mode: Mode, cfg: &LoadedConfig, out: impl Into<PathBuf>) -> Self {
        RunSpec {
            mode,
            config: None,
            snapshots: cfg.snapshots.clone(),
            replicates: cfg.replicates,
            seed: cfg.seed,
            out: out.into(),
        }
    }

    pub fn validate(&self, cfg: &LoadedConfig) -> Result<(), ConfigError> {
        check_times(&self.snapshots, cfg.model.base().t_final)?;
        if self.replicates == 0 {
            return Err(ConfigError::RunSpec("replicates must be at least 1".into()));
        }
        match (self.mode, cfg.dims) {
            (Mode::Ibm2d, 1) => Err(ConfigError::RunSpec("ibm2d needs a configuration with dims = 2".into())),
            (Mode::Continuum | Mode::Compare | Mode::Sweep, 2) => Err(ConfigError::RunSpec(format!(
                "{} runs in one spatial dimension; the configuration has dims = 2",
                self.mode
            ))),
            _ => Ok(()),
        }
    }
}

/// Which side of `value` the bound constrains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max(f64),
    Min(f64),
}

impl Bound {
    fn holds(self, value: f64) -> bool {
        match self {
            Bound::Max(b) => value <= b,
            Bound::Min(b) => value >= b,
        }
    }
}

/// One measured metric, with its acceptance bound if it has one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub metric: String,
    pub eps: f64,
    pub t: Option<f64>,
    pub value: f64,
    pub bound: Option<Bound>,
    pub pass: Option<bool>,
}

impl Metric {
    fn info(metric: &str, eps: f64, t: Option<f64>, value: f64) -> Self {
        Metric { metric: metric.into(), eps, t, value, bound: None, pass: None }
    }

    fn checked(metric: &str, eps: f64, t: Option<f64>, value: f64, bound: Bound) -> Self {
        let pass = value.is_finite() && bound.holds(value);
        Metric { metric: metric.into(), eps, t, value, bound: Some(bound), pass: Some(pass) }
    }

    fn flag(metric: &str, eps: f64, t: Option<f64>, ok: bool) -> Self {
        Metric::checked(metric, eps, t, if ok { 1.0 } else { 0.0 }, Bound::Min(1.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    /// All bounded metrics passed.
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub artifacts: Vec<PathBuf>,
}

/// Relative L1 distance `sum |a - b| / sum |b|`.
pub fn relative_l1(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    let den: f64 = b.iter().map(|y| y.abs()).sum();
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs one mode, writing snapshots, reports and the run log under
/// `spec.out`.
pub fn run(spec: &RunSpec, cfg: &LoadedConfig) -> Result<RunOutcome> {
    spec.validate(cfg)?;
    std::fs::create_dir_all(&spec.out).map_err(|e| Error::io(&spec.out, e))?;
    let log = spec.out.join("run.ndjson");
    if log.exists() {
        std::fs::remove_file(&log).map_err(|e| Error::io(&log, e))?;
    }
    append_ndjson(
        &log,
        &[json!({
            "event": "start",
            "mode": spec.mode,
            "seed": spec.seed,
            "replicates": spec.replicates,
            "snapshots": spec.snapshots,
            "config_sha256": cfg.hash,
            "config": cfg.file,
            "rho_max": cfg.model.base().rho_max,
        })],
    )?;

    let mut artifacts = vec![log.clone()];
    let metrics = match spec.mode {
        Mode::Ibm => {
            let space = lattice(cfg);
            let ens = ibm_ensemble(spec, cfg, space, &log)?;
            artifacts.extend(write_snapshots(&spec.out, "ibm", &ens.mean, rho_max(cfg))?);
            ibm_diagnostic_metrics(&ens, cfg.model.params().eps())
        }
        Mode::Continuum => {
            let run = continuum(spec, cfg, &log)?;
            artifacts.extend(write_snapshots(&spec.out, "continuum", &run.snapshots, rho_max(cfg))?);
            continuum_diagnostic_metrics(&run, cfg.model.params().eps())
        }
        Mode::Compare => compare(spec, cfg, &spec.out, true, &log, &mut artifacts)?,
        Mode::Sweep => sweep(spec, cfg, &log, &mut artifacts)?,
        Mode::Ibm2d => ibm2d(spec, cfg, &log, &mut artifacts)?,
    };

    let report = spec.out.join("report.ndjson");
    if report.exists() {
        std::fs::remove_file(&report).map_err(|e| Error::io(&report, e))?;
    }
    append_ndjson(&report, &metrics)?;
    artifacts.push(report);
    let passed = metrics.iter().all(|m| m.pass != Some(false));
    append_ndjson(&log, &[json!({ "event": "end", "passed": passed })])?;
    Ok(RunOutcome { passed, metrics, artifacts })
}

fn rho_max(cfg: &LoadedConfig) -> f64 {
    cfg.model.base().rho_max
}

fn lattice(cfg: &LoadedConfig) -> Space {
    let nx = cfg.model.params().nx();
    if cfg.dims == 2 {
        Space::Plane { nx }
    } else {
        Space::Line { nx }
    }
}

fn ibm_ensemble(spec: &RunSpec, cfg: &LoadedConfig, space: Space, log: &Path) -> Result<EnsembleSummary> {
    let seeds = replicate_seeds(spec.seed, spec.replicates);
    let ens = run_replicates(&cfg.model, &cfg.profile, space, &spec.snapshots, &seeds)?;
    log_ibm(&ens, cfg.model.params().eps(), log)?;
    Ok(ens)
}

fn log_ibm(ens: &EnsembleSummary, eps: f64, log: &Path) -> Result<()> {
    let records: Vec<_> = ens
        .replicates
        .iter()
        .map(|r| json!({ "event": "ibm_replicate", "eps": eps, "seed": r.seed, "diagnostics": r.diagnostics }))
        .collect();
    append_ndjson(log, &records)
}

fn continuum(spec: &RunSpec, cfg: &LoadedConfig, log: &Path) -> Result<ContinuumRun> {
    let run = ContinuumSolver::new(&cfg.model).with_dt_fraction(cfg.dt_fraction).run(&cfg.profile, &spec.snapshots)?;
    append_ndjson(
        log,
        &[json!({ "event": "continuum", "eps": cfg.model.params().eps(), "diagnostics": run.diagnostics })],
    )?;
    Ok(run)
}

fn ibm_diagnostic_metrics(ens: &EnsembleSummary, eps: f64) -> Vec<Metric> {
    let ok = ens.replicates.iter().all(|r| r.diagnostics.iter().all(|d| d.passed()));
    vec![Metric::flag("ibm_fields_admissible", eps, None, ok)]
}

fn continuum_diagnostic_metrics(run: &ContinuumRun, eps: f64) -> Vec<Metric> {
    let ok = run.diagnostics.iter().all(|d| d.passed());
    let mut out = vec![Metric::flag("continuum_fields_admissible", eps, None, ok)];
    if let Some(d) = run.diagnostics.last() {
        out.push(Metric::info("continuum_max_velocity", eps, Some(d.t), d.max_velocity));
    }
    out
}

fn oracle_metrics(prefix: &str, err: &OracleErrors, eps: f64, bound: Option<f64>) -> Vec<Metric> {
    let t = Some(err.t);
    let rho_linf = match bound {
        Some(b) => Metric::checked(&format!("{prefix}oracle_rho_linf"), eps, t, err.rho_linf, Bound::Max(b)),
        None => Metric::info(&format!("{prefix}oracle_rho_linf"), eps, t, err.rho_linf),
    };
    vec![
        rho_linf,
        Metric::info(&format!("{prefix}oracle_rho_l1"), eps, t, err.rho_l1),
        Metric::info(&format!("{prefix}oracle_mde_linf"), eps, t, err.mde_linf),
        Metric::info(&format!("{prefix}oracle_mde_l1"), eps, t, err.mde_l1),
        Metric::info(&format!("{prefix}oracle_ecm_l1"), eps, t, err.ecm_l1),
    ]
}

/// Front-structure metrics; `bounded` applies the rear/edge bounds. Ensemble
/// means pass the standard error of `rho` so that sampling noise on flat
/// stretches is not read as an inversion.
fn structure_metrics(
    prefix: &str,
    snap: &Snapshot,
    rho_se: Option<Vec<f64>>,
    cfg: &LoadedConfig,
    check_fraction: bool,
    bounded: bool,
) -> Result<Vec<Metric>> {
    let eps = cfg.model.params().eps();
    let t = Some(snap.t);
    let c = &cfg.checks;
    let mut profile = WaveProfile::from_snapshot(snap, rho_max(cfg))?;
    if let Some(se) = rho_se {
        profile = profile.with_rho_se(se);
    }
    let rep = structure_checks(&profile, &StructureTolerance::default());
    let frac = |name: &str, v: f64| {
        if check_fraction {
            Metric::checked(&format!("{prefix}{name}"), eps, t, v, Bound::Max(c.max_violation_fraction))
        } else {
            Metric::info(&format!("{prefix}{name}"), eps, t, v)
        }
    };
    let mut out = vec![
        frac("ybar_violation_fraction", rep.ybar_violation_fraction),
        frac("rho_violation_fraction", rep.rho_violation_fraction),
    ];
    if check_fraction {
        out.push(Metric::flag(&format!("{prefix}support_contiguous"), eps, t, rep.contiguous));
    }
    let bounded_metric = |name: &str, v: Option<f64>, b: Option<Bound>| match (v, b, bounded) {
        (Some(v), Some(b), true) => Metric::checked(&format!("{prefix}{name}"), eps, t, v, b),
        (None, Some(b), true) => Metric::checked(&format!("{prefix}{name}"), eps, t, f64::NAN, b),
        (v, _, _) => Metric::info(&format!("{prefix}{name}"), eps, t, v.unwrap_or(f64::NAN)),
    };
    out.push(bounded_metric("rear_ybar", rep.rear_ybar, c.rear_ybar_max.map(Bound::Max)));
    out.push(bounded_metric("edge_ybar", rep.edge_ybar, c.edge_ybar_min.map(Bound::Min)));
    if let Some(s) = profile.mid_support_width() {
        out.push(Metric::info(&format!("{prefix}mid_support_sigma"), eps, t, s));
    }
    if let Some(ell) = profile.ell {
        out.push(Metric::info(&format!("{prefix}front_edge"), eps, t, ell));
    }
    Ok(out)
}

fn speed_metric(prefix: &str, snaps: &[Snapshot], cfg: &LoadedConfig) -> Vec<Metric> {
    let eps = cfg.model.params().eps();
    let edges: Vec<(f64, f64)> = front_edges(snaps, rho_max(cfg)).into_iter().filter(|e| e.0 > 0.0).collect();
    match front_speed(&edges) {
        Ok(s) => vec![
            Metric::info(&format!("{prefix}front_speed"), eps, None, s.speed),
            Metric::info(&format!("{prefix}front_speed_residual"), eps, None, s.residual),
        ],
        Err(_) => Vec::new(),
    }
}

fn oracle_rows(err: &OracleErrors) -> Vec<Vec<String>> {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    err.rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(err.t),
                fmt_f64(r.x),
                opt(r.ybar),
                opt(r.rho),
                opt(r.mde),
                fmt_f64(r.ecm),
                (r.interior as u8).to_string(),
            ]
        })
        .collect()
}

/// Continuum run plus, optionally, the lattice ensemble at the same times.
fn compare(
    spec: &RunSpec,
    cfg: &LoadedConfig,
    dir: &Path,
    with_ibm: bool,
    log: &Path,
    artifacts: &mut Vec<PathBuf>,
) -> Result<Vec<Metric>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let eps = cfg.model.params().eps();
    let cont = continuum(spec, cfg, log)?;
    artifacts.extend(write_snapshots(dir, "continuum", &cont.snapshots, rho_max(cfg))?);
    let mut metrics = continuum_diagnostic_metrics(&cont, eps);

    let mut oracle_table = Vec::new();
    let last = cont.snapshots.last().expect("at least one snapshot");
    for snap in &cont.snapshots {
        if snap.t <= 0.0 {
            continue;
        }
        let err = compare_to_oracle(snap, &cfg.model, cfg.checks.edge_band)?;
        oracle_table.extend(oracle_rows(&err));
        if std::ptr::eq(snap, last) {
            metrics.extend(oracle_metrics("continuum_", &err, eps, cfg.checks.oracle_rho_linf_tol));
        }
    }
    let oracle_path = dir.join("oracle.csv");
    write_table(&oracle_path, &["t", "x", "ybar", "rho", "M", "E", "interior"], &oracle_table)?;
    artifacts.push(oracle_path);
    metrics.extend(structure_metrics("continuum_", last, None, cfg, true, true)?);
    metrics.extend(speed_metric("continuum_", &cont.snapshots, cfg));

    if with_ibm {
        let ens = ibm_ensemble(spec, cfg, Space::Line { nx: cfg.model.params().nx() }, log)?;
        artifacts.extend(write_snapshots(dir, "ibm", &ens.mean, rho_max(cfg))?);
        metrics.extend(ibm_diagnostic_metrics(&ens, eps));
        for (a, b) in ens.mean.iter().zip(&cont.snapshots) {
            metrics.push(Metric::checked(
                "cross_l1_rho",
                eps,
                Some(a.t),
                relative_l1(&a.rho, &b.rho),
                Bound::Max(cfg.checks.cross_l1_tol),
            ));
        }
        let ib_last = ens.mean.last().expect("at least one snapshot");
        if ib_last.t > 0.0 {
            let err = compare_to_oracle(ib_last, &cfg.model, cfg.checks.edge_band)?;
            metrics.extend(oracle_metrics("ibm_", &err, eps, None));
        }
        let finals: Vec<&Snapshot> = ens.replicates.iter().filter_map(|r| r.snapshots.last()).collect();
        let se = rho_standard_error(&finals);
        metrics.extend(structure_metrics("ibm_", ib_last, Some(se), cfg, false, false)?);
        metrics.extend(speed_metric("ibm_", &ens.mean, cfg));
    }
    Ok(metrics)
}

/// Oracle metrics expected to shrink with `eps`.
pub const MONOTONE_METRICS: [&str; 5] = [
    "continuum_oracle_rho_linf",
    "continuum_oracle_rho_l1",
    "continuum_oracle_mde_linf",
    "continuum_oracle_mde_l1",
    "continuum_oracle_ecm_l1",
];

fn sweep(spec: &RunSpec, cfg: &LoadedConfig, log: &Path, artifacts: &mut Vec<PathBuf>) -> Result<Vec<Metric>> {
    let mut eps_list = cfg.eps_sweep.clone();
    eps_list.sort_by(|a, b| b.total_cmp(a));
    let smallest = *eps_list.last().expect("non-empty sweep");
    let mut metrics = Vec::new();
    for &eps in &eps_list {
        let sub = cfg.with_eps(eps)?;
        let mut checks = sub.checks;
        if eps != smallest {
            // bounds on the limiting profile apply only closest to the limit
            checks.oracle_rho_linf_tol = None;
            checks.rear_ybar_max = None;
            checks.edge_ybar_min = None;
        }
        let sub = LoadedConfig { checks, ..sub };
        let dir = spec.out.join(format!("eps_{}", fmt_f64(eps)));
        metrics.extend(compare(spec, &sub, &dir, cfg.sweep_ibm, log, artifacts)?);
    }

    let value = |name: &str, eps: f64| {
        metrics.iter().find(|m| m.metric == name && m.eps == eps).map(|m| m.value)
    };
    let mut extra = Vec::new();
    for name in MONOTONE_METRICS {
        let vals: Vec<Option<f64>> = eps_list.iter().map(|&e| value(name, e)).collect();
        let ok = vals.iter().all(Option::is_some)
            && vals.windows(2).all(|w| w[1].unwrap_or(f64::NAN) < w[0].unwrap_or(f64::NAN));
        extra.push(Metric::flag(&format!("{name}_decreasing"), smallest, None, ok));
    }
    if let (Some(b), Some(&largest)) = (cfg.checks.sigma_ratio_min, eps_list.first()) {
        let hi = value("continuum_mid_support_sigma", largest);
        let lo = value("continuum_mid_support_sigma", smallest);
        let ratio = match (hi, lo) {
            (Some(h), Some(l)) if l > 0.0 => h / l,
            _ => f64::NAN,
        };
        extra.push(Metric::checked("sigma_ratio", smallest, None, ratio, Bound::Min(b)));
    }
    metrics.extend(extra);

    let rows: Vec<Vec<String>> =
        metrics.iter().map(|m| vec![fmt_f64(m.eps), m.metric.clone(), fmt_f64(m.value)]).collect();
    let table = spec.out.join("sweep.csv");
    write_table(&table, &["eps", "metric", "value"], &rows)?;
    artifacts.push(table);
    Ok(metrics)
}

fn ibm2d(spec: &RunSpec, cfg: &LoadedConfig, log: &Path, artifacts: &mut Vec<PathBuf>) -> Result<Vec<Metric>> {
    let eps = cfg.model.params().eps();
    let seeds = replicate_seeds(spec.seed, spec.replicates);
    let out = run_2d(&cfg.model, &cfg.profile, &spec.snapshots, &seeds)?;
    log_ibm(&out.ensemble, eps, log)?;
    artifacts.extend(write_snapshots(&spec.out, "ibm2d", &out.ensemble.mean, rho_max(cfg))?);
    artifacts.extend(write_snapshots(&spec.out, "transect", &out.transects, rho_max(cfg))?);
    let mut metrics = ibm_diagnostic_metrics(&out.ensemble, eps);
    let last = out.transects.last().expect("at least one snapshot");
    let per_replicate: Vec<Snapshot> =
        out.ensemble.replicates.iter().filter_map(|r| r.snapshots.last()).map(radial_transect).collect();
    let se = rho_standard_error(&per_replicate.iter().collect::<Vec<_>>());
    metrics.extend(structure_metrics("transect_", last, Some(se), cfg, true, false)?);
    let k = spec.snapshots.len() - 1;
    let finals: Vec<&Snapshot> = out.ensemble.replicates.iter().map(|r| &r.snapshots[k]).collect();
    if let Some(a) = reflection_asymmetry(&finals) {
        metrics.push(Metric::info("mirror_asymmetry_max_z", eps, Some(last.t), a.max_z));
        metrics.push(Metric::info("mirror_asymmetry_fraction_above_3", eps, Some(last.t), a.fraction_above_3));
    }
    Ok(metrics)
}
