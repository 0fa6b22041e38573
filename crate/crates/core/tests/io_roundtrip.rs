use proptest::prelude::*;

use phenoinvade_core::io::{fmt_f64, read_snapshots, write_snapshots, write_table};
use phenoinvade_core::{Error, Snapshot, SpaceGrid};

fn line_snapshot(t: f64, vals: &[f64]) -> Snapshot {
    let sites = vals.len() / 2;
    Snapshot {
        t,
        space: SpaceGrid::Line { x: (0..sites).map(|i| i as f64 * 0.1).collect() },
        y: vec![0.0, 0.5],
        n: vals.to_vec(),
        rho: vals.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect(),
        mde: vals.chunks(2).map(|c| c[0] / 3.0).collect(),
        ecm: vals.chunks(2).map(|c| 1.0 / (1.0 + c[1])).collect(),
    }
}

fn plane_snapshot() -> Snapshot {
    let x = vec![0.0, 0.2, 0.4];
    let sites = 9;
    Snapshot {
        t: 0.5,
        space: SpaceGrid::Plane { x1: x.clone(), x2: x },
        y: vec![0.0, 0.25, 0.5],
        n: (0..sites * 3).map(|k| (k as f64).sqrt() / 7.0).collect(),
        rho: (0..sites).map(|k| k as f64 / 3.0).collect(),
        mde: vec![1e-300; sites],
        ecm: (0..sites).map(|k| 1.0 - k as f64 * 0.1).collect(),
    }
}

#[test]
fn line_sequence_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = vec![
        line_snapshot(0.0, &[1.0, 0.0, 2.5, 1.0 / 3.0, 0.0, 0.0]),
        line_snapshot(1.0 / 7.0, &[0.1, 0.2, f64::MIN_POSITIVE, 1e300, 3.0, 4.0]),
    ];
    let paths = write_snapshots(dir.path(), "c", &snaps, 2.0).unwrap();
    assert_eq!(paths.len(), 2);
    assert_eq!(read_snapshots(dir.path(), "c").unwrap(), snaps);
}

#[test]
fn plane_sequence_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let snaps = vec![plane_snapshot()];
    write_snapshots(dir.path(), "p", &snaps, 3.0).unwrap();
    assert_eq!(read_snapshots(dir.path(), "p").unwrap(), snaps);
}

#[test]
fn empty_sequence_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let paths = write_snapshots(dir.path(), "e", &[], 1.0).unwrap();
    for p in &paths {
        let text = std::fs::read_to_string(p).unwrap();
        assert_eq!(text.lines().count(), 1, "{}", p.display());
    }
    assert!(read_snapshots(dir.path(), "e").unwrap().is_empty());
}

#[test]
fn summary_lists_ybar_only_inside_support() {
    let dir = tempfile::tempdir().unwrap();
    let snap = line_snapshot(1.0, &[0.0, 4.0, 0.0, 0.0]);
    let paths = write_snapshots(dir.path(), "s", &[snap], 1.0).unwrap();
    let text = std::fs::read_to_string(&paths[1]).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,x,rho,M,E,ybar");
    assert!(rows[1].ends_with(",5e-1"), "{}", rows[1]);
    assert!(rows[2].ends_with(','), "{}", rows[2]);
}

#[test]
fn malformed_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    write_snapshots(dir.path(), "m", &[line_snapshot(1.0, &[1.0, 2.0])], 1.0).unwrap();
    let fields = dir.path().join("m_fields.csv");
    std::fs::write(&fields, "t,x,y,n\n1e0,0e0,0e0,abc\n1e0,0e0,5e-1,2e0\n").unwrap();
    assert!(matches!(read_snapshots(dir.path(), "m"), Err(Error::Snapshot { .. })));

    write_table(&fields, &["a", "b"], &[]).unwrap();
    assert!(matches!(read_snapshots(dir.path(), "m"), Err(Error::Snapshot { .. })));
    assert!(matches!(read_snapshots(dir.path(), "missing"), Err(Error::Io { .. })));
}

proptest! {
    #[test]
    fn formatted_numbers_parse_back(bits in any::<u64>()) {
        let v = f64::from_bits(bits);
        prop_assume!(v.is_finite());
        let back: f64 = fmt_f64(v).parse().unwrap();
        prop_assert_eq!(back.to_bits(), v.to_bits());
    }

    #[test]
    fn arbitrary_fields_round_trip(vals in prop::collection::vec(0.0f64..1e6, 2..40), t in 0.0f64..100.0) {
        let vals = if vals.len() % 2 == 1 { &vals[1..] } else { &vals[..] };
        let dir = tempfile::tempdir().unwrap();
        let snaps = vec![line_snapshot(t, vals)];
        write_snapshots(dir.path(), "r", &snaps, 1.0).unwrap();
        prop_assert_eq!(read_snapshots(dir.path(), "r").unwrap(), snaps);
    }
}
