use super::*;
use crate::model::{default_base, Model, ModelParams, PhenotypeLaws};
use proptest::prelude::*;

fn model() -> Model {
    let mut b = default_base(1e-2);
    b.rho_max = 2.0;
    b.x_max = 1.0;
    Model::new(ModelParams::from_base(b), PhenotypeLaws::default()).unwrap()
}

/// Snapshot with a point mass at `ybar[i]` and fields on the limiting
/// relations; sites with `None` are empty and have intact ECM.
fn oracle_snapshot(m: &Model, ybar_idx: &[Option<usize>]) -> Snapshot {
    let ys = m.phenotype_grid();
    let ny = ys.len();
    let dy = m.params().dy();
    let mut n = vec![0.0; ybar_idx.len() * ny];
    let mut rho = vec![0.0; ybar_idx.len()];
    let mut mde = vec![0.0; ybar_idx.len()];
    let mut ecm = vec![m.base().e_max; ybar_idx.len()];
    for (i, j) in ybar_idx.iter().enumerate() {
        if let Some(j) = *j {
            rho[i] = oracle_rho(ys[j], m);
            mde[i] = oracle_mde(ys[j], m);
            ecm[i] = 0.0;
            n[i * ny + j] = rho[i] / dy;
        }
    }
    Snapshot {
        t: 1.0,
        space: SpaceGrid::Line { x: (0..ybar_idx.len()).map(|i| i as f64 * 0.1).collect() },
        y: ys,
        n,
        rho,
        mde,
        ecm,
    }
}

fn rising(k: usize) -> Vec<Option<usize>> {
    let mut v: Vec<Option<usize>> = (0..k).map(|i| Some(2 * i)).collect();
    v.extend([None, None, None]);
    v
}

#[test]
fn exact_profile_has_no_violations() {
    let m = model();
    let snap = oracle_snapshot(&m, &rising(20));
    let prof = WaveProfile::from_snapshot(&snap, m.base().rho_max).unwrap();
    let rep = structure_checks(&prof, &StructureTolerance { max_violation_fraction: 0.0, ..Default::default() });
    assert_eq!(rep.pairs, 19);
    assert_eq!((rep.ybar_violations, rep.rho_violations), (0, 0));
    assert!(rep.pass);
    assert!((prof.ell.unwrap() - 1.9).abs() < 1e-12);
    assert_eq!(prof.mid_support_width(), Some(0.0));

    let err = compare_to_oracle(&snap, &m, 0.1).unwrap();
    assert!(err.rho_linf < 1e-14 && err.rho_l1 < 1e-14);
    assert!(err.mde_linf < 1e-14 && err.mde_l1 < 1e-14);
    assert_eq!(err.ecm_l1, 0.0);
    assert_eq!(err.interior_sites, 18);
}

#[test]
fn injected_inversion_counts_once() {
    let m = model();
    let mut idx = rising(20);
    idx.swap(7, 8);
    let snap = oracle_snapshot(&m, &idx);
    let prof = WaveProfile::from_snapshot(&snap, m.base().rho_max).unwrap();
    let rep = structure_checks(&prof, &StructureTolerance::default());
    // ybar drops 7 -> 8 and rho rises 7 -> 8.
    assert_eq!(rep.ybar_violations, 1);
    assert_eq!(rep.rho_violations, 1);
}

#[test]
fn noise_within_standard_errors_is_not_an_inversion() {
    let m = model();
    let mut snap = oracle_snapshot(&m, &rising(10));
    snap.rho[5] += 0.5;
    let bare = WaveProfile::from_snapshot(&snap, m.base().rho_max).unwrap();
    assert_eq!(structure_checks(&bare, &StructureTolerance::default()).rho_violations, 1);
    // rise 0.5 - 0.0288 = 0.471 against 3 sqrt(2) se: 0.509 and 0.424
    let noisy = bare.clone().with_rho_se(vec![0.12; snap.sites()]);
    assert_eq!(structure_checks(&noisy, &StructureTolerance::default()).rho_violations, 0);
    let tight = bare.with_rho_se(vec![0.1; snap.sites()]);
    assert_eq!(structure_checks(&tight, &StructureTolerance::default()).rho_violations, 1);
}

#[test]
fn standard_error_of_replicates() {
    let m = model();
    let a = oracle_snapshot(&m, &[Some(0), Some(2)]);
    let mut b = a.clone();
    b.rho[0] += 2.0;
    // values {x, x + 2}: sample sd sqrt(2), se sqrt(2) / sqrt(2) = 1
    let se = rho_standard_error(&[&a, &b]);
    assert!((se[0] - 1.0).abs() < 1e-12);
    assert_eq!(se[1], 0.0);
    assert_eq!(rho_standard_error(&[&a]), vec![0.0, 0.0]);
    assert!(rho_standard_error(&[]).is_empty());
}

#[test]
fn gaps_mark_support_non_contiguous() {
    let m = model();
    let mut idx = rising(10);
    idx[4] = None;
    let snap = oracle_snapshot(&m, &idx);
    let s = find_support(&snap.rho, m.base().rho_max, SUPPORT_THRESHOLD).unwrap();
    assert_eq!((s.start, s.end, s.contiguous), (0, 9, false));
    let prof = WaveProfile::from_snapshot(&snap, m.base().rho_max).unwrap();
    assert!(!structure_checks(&prof, &StructureTolerance::default()).pass);
}

#[test]
fn rear_and_edge_bounds() {
    let m = model();
    let snap = oracle_snapshot(&m, &rising(20));
    let prof = WaveProfile::from_snapshot(&snap, m.base().rho_max).unwrap();
    let ok = StructureTolerance { rear_ybar_max: Some(0.05), edge_ybar_min: Some(0.7), ..Default::default() };
    assert!(structure_checks(&prof, &ok).pass);
    let bad = StructureTolerance { edge_ybar_min: Some(0.9), ..ok };
    assert!(!structure_checks(&prof, &bad).pass);
}

#[test]
fn ties_resolve_to_smaller_phenotype() {
    assert_eq!(argmax(&[0.0, 2.0, 1.0, 2.0]), Some(1));
    assert_eq!(argmax(&[0.0, 0.0]), Some(0));
    assert_eq!(argmax(&[]), None);
}

#[test]
fn oracle_values() {
    let m = model();
    // r(0.5) = 0.75, p(0.5) = 1e-7 + 2.5e-6
    assert!((oracle_rho(0.5, &m) - 1.5).abs() < 1e-15);
    assert!((oracle_mde(0.5, &m) - 1.5 * 2.6e-6).abs() < 1e-18);
    assert_eq!(oracle_ecm(true, &m), 0.0);
    assert_eq!(oracle_ecm(false, &m), 1.0);
}

#[test]
fn width_of_two_point_mass() {
    let m = model();
    let mut snap = oracle_snapshot(&m, &[Some(10)]);
    snap.n[10] = 1.0;
    snap.n[20] = 1.0;
    let w = concentration_width(&snap);
    assert!((w[0].unwrap() - 0.1).abs() < 1e-12);
    snap.n.iter_mut().for_each(|v| *v = 0.0);
    assert_eq!(concentration_width(&snap)[0], None);
}

#[test]
fn linear_front_speed() {
    let edges: Vec<(f64, f64)> = (1..=3).map(|k| (10.0 * k as f64, 4.0 + 0.6 * 10.0 * k as f64)).collect();
    let s = front_speed(&edges).unwrap();
    assert!((s.speed - 0.6).abs() < 1e-12);
    assert!((s.intercept - 4.0).abs() < 1e-10);
    assert!(s.residual < 1e-10);
    assert!(front_speed(&edges[..1]).is_err());
    assert!(front_speed(&[(1.0, 0.0), (1.0, 2.0)]).is_err());
}

fn plane(nx: usize, f: impl Fn(f64) -> f64) -> Snapshot {
    let x: Vec<f64> = (0..nx).map(|i| i as f64 * 0.5).collect();
    let mut rho = Vec::new();
    for &a in &x {
        for &b in &x {
            rho.push(f(a.hypot(b)));
        }
    }
    Snapshot {
        t: 0.0,
        space: SpaceGrid::Plane { x1: x.clone(), x2: x },
        y: vec![0.0, 1.0],
        n: rho.iter().flat_map(|&r| [r, 0.0]).collect(),
        mde: rho.clone(),
        ecm: vec![1.0; rho.len()],
        rho,
    }
}

#[test]
fn transect_of_radial_field() {
    let snap = plane(9, |r| (-r).exp());
    let tr = radial_transect(&snap);
    assert_eq!(tr.sites(), 9);
    assert_eq!(tr.rho[0], 1.0);
    for k in 1..9 {
        let r = k as f64 * 0.5;
        // ring averages of exp(-r) over |r' - r| <= dx / 2
        assert!(tr.rho[k] <= (-(r - 0.25)).exp() && tr.rho[k] >= (-(r + 0.25)).exp(), "bin {k}");
    }
    assert_eq!(tr.n[0], 1.0);
}

#[test]
fn mirrored_replicates_are_symmetric() {
    let a = plane(5, |r| 1.0 + r);
    let mut b = plane(5, |r| 2.0 * r);
    b.rho[1] += 0.1;
    b.rho[5] += 0.1;
    let rep = reflection_asymmetry(&[&a, &b]).unwrap();
    assert_eq!(rep.pairs, 0);
    assert_eq!(rep.max_z, 0.0);

    let mut c = a.clone();
    c.rho[1] += 1.0;
    let rep = reflection_asymmetry(&[&a, &c, &a]).unwrap();
    assert_eq!(rep.pairs, 1);
    assert!(rep.max_z > 0.0);
}

proptest! {
    #[test]
    fn ybar_invariant_under_scaling(vals in prop::collection::vec(0.0f64..10.0, 51), s in 1e-3f64..1e3) {
        let m = model();
        let mut snap = oracle_snapshot(&m, &[Some(0)]);
        snap.n = vals.clone();
        snap.rho = vec![1.0];
        let scaled = Snapshot {
            n: vals.iter().map(|v| v * s).collect(),
            ..snap.clone()
        };
        prop_assert_eq!(extract_ybar(&snap, 2.0), extract_ybar(&scaled, 2.0));
    }

    #[test]
    fn fitted_speed_recovers_line(c in -2.0f64..2.0, b in -10.0f64..10.0) {
        let edges: Vec<(f64, f64)> = [5.0, 10.0, 15.0, 30.0].iter().map(|&t| (t, c * t + b)).collect();
        let s = front_speed(&edges).unwrap();
        prop_assert!((s.speed - c).abs() < 1e-9);
    }
}
