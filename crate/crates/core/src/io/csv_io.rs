//! Snapshot CSV files.
//!
//! Each snapshot sequence is written as two files sharing a stem:
//!
//! * `<stem>_fields.csv`: `t,x,y,n` (planes: `t,x,x2,y,n`), one row per
//!   (site, phenotype) node;
//! * `<stem>_summary.csv`: `t,x,rho,M,E,ybar` (planes: `t,x,x2,rho,M,E,ybar`),
//!   one row per site, with `ybar` empty outside the support.
//!
//! Numbers use the shortest exponent form that parses back to the same
//! `f64`, so a write/read cycle is bit-exact.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::snapshot::{SpaceGrid, Snapshot};
use crate::wave::extract_ybar;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Snapshot { path: path.into(), detail: format!("{other:?}") },
    }
}

fn is_plane(snaps: &[Snapshot]) -> bool {
    snaps.first().is_some_and(|s| s.space.dims() == 2)
}

pub fn fields_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}_fields.csv"))
}

pub fn summary_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}_summary.csv"))
}

/// Writes both CSV files for a snapshot sequence and returns their paths.
/// An empty sequence yields header-only files.
pub fn write_snapshots(dir: &Path, stem: &str, snaps: &[Snapshot], rho_max: f64) -> Result<Vec<PathBuf>> {
    let fp = fields_path(dir, stem);
    let sp = summary_path(dir, stem);
    write_fields(&fp, snaps)?;
    write_summary(&sp, snaps, rho_max)?;
    Ok(vec![fp, sp])
}

fn site_coords(snap: &Snapshot, site: usize, plane: bool) -> Vec<String> {
    let (a, b) = snap.space.coords(site);
    let mut v = vec![fmt_f64(a)];
    if plane {
        v.push(fmt_f64(b.unwrap_or(0.0)));
    }
    v
}

pub fn write_fields(path: &Path, snaps: &[Snapshot]) -> Result<()> {
    let plane = is_plane(snaps);
    let mut w = writer(path)?;
    let header: &[&str] = if plane { &["t", "x", "x2", "y", "n"] } else { &["t", "x", "y", "n"] };
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for s in snaps {
        let t = fmt_f64(s.t);
        for site in 0..s.sites() {
            let coords = site_coords(s, site, plane);
            for (j, &y) in s.y.iter().enumerate() {
                let mut rec = vec![t.clone()];
                rec.extend(coords.iter().cloned());
                rec.push(fmt_f64(y));
                rec.push(fmt_f64(s.n[site * s.ny() + j]));
                w.write_record(&rec).map_err(|e| csv_err(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_summary(path: &Path, snaps: &[Snapshot], rho_max: f64) -> Result<()> {
    let plane = is_plane(snaps);
    let mut w = writer(path)?;
    let header: &[&str] =
        if plane { &["t", "x", "x2", "rho", "M", "E", "ybar"] } else { &["t", "x", "rho", "M", "E", "ybar"] };
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for s in snaps {
        let t = fmt_f64(s.t);
        let ybar = extract_ybar(s, rho_max);
        for (site, yb) in ybar.iter().enumerate() {
            let mut rec = vec![t.clone()];
            rec.extend(site_coords(s, site, plane));
            rec.push(fmt_f64(s.rho[site]));
            rec.push(fmt_f64(s.mde[site]));
            rec.push(fmt_f64(s.ecm[site]));
            rec.push(yb.map(fmt_f64).unwrap_or_default());
            w.write_record(&rec).map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse(path: &Path, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Snapshot { path: path.into(), detail: format!("not a number: `{s}`") })
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// Groups consecutive rows by their first column (`t`).
fn by_time(path: &Path, rows: &[Vec<String>]) -> Result<Vec<(f64, Vec<Vec<f64>>)>> {
    let mut out: Vec<(f64, Vec<Vec<f64>>)> = Vec::new();
    for row in rows {
        let vals: Vec<f64> = row
            .iter()
            .map(|c| if c.is_empty() { Ok(f64::NAN) } else { parse(path, c) })
            .collect::<Result<_>>()?;
        match out.last_mut() {
            Some((t, group)) if t.to_bits() == vals[0].to_bits() => group.push(vals),
            _ => out.push((vals[0], vec![vals])),
        }
    }
    Ok(out)
}

fn unique_in_order(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|u| u.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

/// Reads a snapshot sequence written by [`write_snapshots`].
pub fn read_snapshots(dir: &Path, stem: &str) -> Result<Vec<Snapshot>> {
    let fp = fields_path(dir, stem);
    let sp = summary_path(dir, stem);
    let (fh, frows) = read_rows(&fp)?;
    let (sh, srows) = read_rows(&sp)?;
    let plane = match fh.len() {
        4 => false,
        5 => true,
        _ => return Err(Error::Snapshot { path: fp, detail: format!("unexpected header {fh:?}") }),
    };
    if sh.len() != if plane { 7 } else { 6 } {
        return Err(Error::Snapshot { path: sp, detail: format!("unexpected header {sh:?}") });
    }
    let fields = by_time(&fp, &frows)?;
    let summaries = by_time(&sp, &srows)?;
    if fields.len() != summaries.len() {
        return Err(Error::Snapshot {
            path: sp,
            detail: format!("{} snapshot times here but {} in the fields file", summaries.len(), fields.len()),
        });
    }
    let mismatch = |detail: &str| Error::Snapshot { path: sp.clone(), detail: detail.to_string() };
    let mut snaps = Vec::with_capacity(fields.len());
    for ((t, frows), (ts, srows)) in fields.into_iter().zip(summaries) {
        if t.to_bits() != ts.to_bits() {
            return Err(mismatch("snapshot times differ from the fields file"));
        }
        let c = if plane { 3 } else { 2 };
        let space = if plane {
            SpaceGrid::Plane {
                x1: unique_in_order(srows.iter().map(|r| r[1])),
                x2: unique_in_order(srows.iter().map(|r| r[2])),
            }
        } else {
            SpaceGrid::Line { x: srows.iter().map(|r| r[1]).collect() }
        };
        if space.sites() != srows.len() {
            return Err(mismatch("site coordinates do not form a grid"));
        }
        let ny = if space.sites() == 0 { 0 } else { frows.len() / space.sites() };
        if ny * space.sites() != frows.len() {
            return Err(Error::Snapshot { path: fp, detail: "row count is not sites x phenotypes".into() });
        }
        snaps.push(Snapshot {
            t,
            y: frows.iter().take(ny).map(|r| r[c]).collect(),
            n: frows.iter().map(|r| r[c + 1]).collect(),
            rho: srows.iter().map(|r| r[c]).collect(),
            mde: srows.iter().map(|r| r[c + 1]).collect(),
            ecm: srows.iter().map(|r| r[c + 2]).collect(),
            space,
        });
    }
    Ok(snaps)
}

/// Writes a table with a fixed header; cells are already formatted.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
