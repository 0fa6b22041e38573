//! Limiting relations between the dominant trait and the macroscopic fields.

use serde::{Deserialize, Serialize};

use crate::error::SimError;
use crate::model::Model;
use crate::snapshot::{SpaceGrid, Snapshot};
use crate::wave::{extract_ybar, find_support, SUPPORT_THRESHOLD};

/// Limiting cell density `rho_max r(ybar)`.
pub fn oracle_rho(ybar: f64, model: &Model) -> f64 {
    model.base().rho_max * model.r(ybar)
}

/// Limiting MDE `p(ybar) rho_max r(ybar) / kappa_M`.
pub fn oracle_mde(ybar: f64, model: &Model) -> f64 {
    model.p(ybar) * oracle_rho(ybar, model) / model.base().kappa_m
}

/// Limiting ECM: degraded inside the support, intact outside.
pub fn oracle_ecm(inside_support: bool, model: &Model) -> f64 {
    if inside_support {
        0.0
    } else {
        model.base().e_max
    }
}

/// One row of the oracle table; fields are `None` outside the support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub x: f64,
    pub ybar: Option<f64>,
    pub rho: Option<f64>,
    pub mde: Option<f64>,
    pub ecm: f64,
    /// Site contributes to the interior error norms.
    pub interior: bool,
}

/// Relative deviations of a snapshot from the limiting relations.
///
/// `rho` and `M` are compared on the support interior, i.e. the support
/// minus the `edge_band` fraction of it closest to the front edge. `E` is
/// compared on the whole domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleErrors {
    pub t: f64,
    /// `max |rho - rho_oracle| / rho_max`
    pub rho_linf: f64,
    /// `sum |rho - rho_oracle| / sum rho_oracle`
    pub rho_l1: f64,
    /// `max |M - M_oracle| / max M_oracle`
    pub mde_linf: f64,
    /// `sum |M - M_oracle| / sum M_oracle`
    pub mde_l1: f64,
    /// `sum |E - E_oracle| / (e_max * sites)`
    pub ecm_l1: f64,
    pub interior_sites: usize,
    pub support_contiguous: bool,
    pub rows: Vec<OracleRow>,
}

pub fn compare_to_oracle(snap: &Snapshot, model: &Model, edge_band: f64) -> Result<OracleErrors, SimError> {
    let x = match &snap.space {
        SpaceGrid::Line { x } => x,
        SpaceGrid::Plane { .. } => {
            return Err(SimError::Analysis("oracle comparison needs a 1D snapshot or transect".into()))
        }
    };
    let rho_max = model.base().rho_max;
    let support = find_support(&snap.rho, rho_max, SUPPORT_THRESHOLD)
        .ok_or_else(|| SimError::Analysis(format!("no occupied sites at t = {}", snap.t)))?;
    let ybar = extract_ybar(snap, rho_max);
    let trimmed = (edge_band * support.len() as f64).ceil() as usize;
    let interior_end = support.end.saturating_sub(trimmed);

    let mut rows = Vec::with_capacity(x.len());
    let (mut rho_inf, mut rho_dev, mut rho_ref) = (0.0f64, 0.0, 0.0);
    let (mut m_inf, mut m_max, mut m_dev, mut m_ref) = (0.0f64, 0.0f64, 0.0, 0.0);
    let mut e_dev = 0.0;
    let mut interior_sites = 0;
    for (i, &xi) in x.iter().enumerate() {
        let inside = support.contains(i);
        let e_or = oracle_ecm(inside, model);
        e_dev += (snap.ecm[i] - e_or).abs();
        let interior = inside && i <= interior_end && ybar[i].is_some();
        let (rho_or, m_or) = match ybar[i] {
            Some(y) => (Some(oracle_rho(y, model)), Some(oracle_mde(y, model))),
            None => (None, None),
        };
        if interior {
            let (ro, mo) = (rho_or.unwrap_or(0.0), m_or.unwrap_or(0.0));
            interior_sites += 1;
            rho_inf = rho_inf.max((snap.rho[i] - ro).abs());
            rho_dev += (snap.rho[i] - ro).abs();
            rho_ref += ro;
            m_inf = m_inf.max((snap.mde[i] - mo).abs());
            m_max = m_max.max(mo);
            m_dev += (snap.mde[i] - mo).abs();
            m_ref += mo;
        }
        rows.push(OracleRow { x: xi, ybar: ybar[i], rho: rho_or, mde: m_or, ecm: e_or, interior });
    }
    if interior_sites == 0 {
        return Err(SimError::Analysis(format!("support interior is empty at t = {}", snap.t)));
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { f64::INFINITY };
    Ok(OracleErrors {
        t: snap.t,
        rho_linf: rho_inf / rho_max,
        rho_l1: ratio(rho_dev, rho_ref),
        mde_linf: ratio(m_inf, m_max),
        mde_l1: ratio(m_dev, m_ref),
        ecm_l1: e_dev / (model.base().e_max * x.len() as f64),
        interior_sites,
        support_contiguous: support.contiguous,
        rows,
    })
}
