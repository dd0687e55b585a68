//! Error report between two bundles: boundary curves interpolated linearly
//! in tau, values and Delta interpolated linearly in S at matching tau.

use std::fs::File;
use std::path::Path;

use anyhow::{anyhow, Context};
use frontfix::export::ReportRow;
use frontfix::oracle::interpolate_curve;
use serde::{Deserialize, Serialize};

use crate::bundle::{BOUNDARY, GREEKS};
use crate::error::CliResult;
use crate::oracle_cmd::LATTICE;

#[derive(Debug, Clone, Copy, Deserialize)]
struct BoundaryIn {
    tau: f64,
    sf: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct GreeksIn {
    tau: f64,
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "Delta")]
    delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointError {
    pub tau: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub v_model: f64,
    pub v_reference: f64,
    pub v_error: f64,
    pub delta_model: f64,
    pub delta_reference: f64,
    pub delta_error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub report: Vec<ReportRow>,
    pub points: Vec<PointError>,
    pub lattice_points: Vec<PointError>,
}

impl Comparison {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.report.iter().find(|r| r.metric == name).and_then(|r| r.value.parse().ok())
    }
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut rdr = csv::Reader::from_reader(f);
    let rows = rdr.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

const TAU_MATCH: f64 = 1e-12;

/// Rows of one time level, sorted by S.
fn slices(rows: &[GreeksIn]) -> Vec<(f64, Vec<GreeksIn>)> {
    let mut out: Vec<(f64, Vec<GreeksIn>)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(t, _)| (t - r.tau).abs() <= TAU_MATCH) {
            Some((_, v)) => v.push(*r),
            None => out.push((r.tau, vec![*r])),
        }
    }
    for (_, v) in &mut out {
        v.sort_by(|a, b| a.s.total_cmp(&b.s));
    }
    out
}

/// `(V, Delta)` at `s` on one slice, `None` outside its S range.
fn at(slice: &[GreeksIn], s: f64) -> Option<(f64, f64)> {
    let (lo, hi) = (slice.first()?.s, slice.last()?.s);
    if s < lo || s > hi {
        return None;
    }
    let xs: Vec<f64> = slice.iter().map(|r| r.s).collect();
    let v: Vec<f64> = slice.iter().map(|r| r.v).collect();
    let d: Vec<f64> = slice.iter().map(|r| r.delta).collect();
    Some((interpolate_curve(&xs, &v, s), interpolate_curve(&xs, &d, s)))
}

fn stats(errors: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let (mut max, mut sum, mut n) = (0.0_f64, 0.0, 0usize);
    for e in errors {
        max = max.max(e);
        sum += e;
        n += 1;
    }
    (max, if n > 0 { sum / n as f64 } else { 0.0 }, n)
}

fn push_stats(report: &mut Vec<ReportRow>, prefix: &str, points: &[PointError]) {
    let (vmax, vmean, n) = stats(points.iter().map(|p| p.v_error));
    let (dmax, dmean, _) = stats(points.iter().map(|p| p.delta_error));
    report.push(ReportRow::new(format!("{prefix}points"), n));
    report.push(ReportRow::new(format!("{prefix}value_max_abs"), vmax));
    report.push(ReportRow::new(format!("{prefix}value_mean_abs"), vmean));
    report.push(ReportRow::new(format!("{prefix}delta_max_abs"), dmax));
    report.push(ReportRow::new(format!("{prefix}delta_mean_abs"), dmean));
}

pub fn compare(model: &Path, reference: &Path) -> CliResult<Comparison> {
    let mb: Vec<BoundaryIn> = read(&model.join(BOUNDARY))?;
    let rb: Vec<BoundaryIn> = read(&reference.join(BOUNDARY))?;
    if mb.is_empty() || rb.is_empty() {
        return Err(anyhow!("empty boundary file").into());
    }
    let r_tau: Vec<f64> = rb.iter().map(|r| r.tau).collect();
    let r_sf: Vec<f64> = rb.iter().map(|r| r.sf).collect();
    let (lo, hi) = (r_tau[0], r_tau[r_tau.len() - 1]);
    let boundary_err: Vec<(f64, f64)> = mb
        .iter()
        .filter(|r| r.tau >= lo - TAU_MATCH && r.tau <= hi + TAU_MATCH)
        .map(|r| (r.tau, (r.sf - interpolate_curve(&r_tau, &r_sf, r.tau)).abs()))
        .collect();
    if boundary_err.is_empty() {
        return Err(anyhow!("boundary curves cover disjoint tau ranges").into());
    }

    let mg: Vec<GreeksIn> = read(&model.join(GREEKS))?;
    let rg: Vec<GreeksIn> = read(&reference.join(GREEKS))?;
    let ref_slices = slices(&rg);
    let mut points = Vec::new();
    for m in &mg {
        let Some((_, slice)) = ref_slices.iter().find(|(t, _)| (t - m.tau).abs() <= TAU_MATCH) else {
            continue;
        };
        if let Some((v, d)) = at(slice, m.s) {
            points.push(PointError {
                tau: m.tau,
                s: m.s,
                v_model: m.v,
                v_reference: v,
                v_error: (m.v - v).abs(),
                delta_model: m.delta,
                delta_reference: d,
                delta_error: (m.delta - d).abs(),
            });
        }
    }
    if points.is_empty() && !mg.is_empty() && !rg.is_empty() {
        return Err(anyhow!("value surfaces share no (tau, S) domain").into());
    }

    let mut report = Vec::new();
    let (bmax, bmean, bn) = stats(boundary_err.iter().map(|(_, e)| *e));
    report.push(ReportRow::new("boundary_points", bn));
    report.push(ReportRow::new("boundary_max_abs", bmax));
    report.push(ReportRow::new("boundary_mean_abs", bmean));
    if let Some((_, e)) = boundary_err.iter().find(|(t, _)| (t - 1.0).abs() <= TAU_MATCH) {
        report.push(ReportRow::new("boundary_T_abs", *e));
    }
    push_stats(&mut report, "", &points);

    let mut lattice_points = Vec::new();
    let lattice_path = reference.join(LATTICE);
    if lattice_path.exists() {
        let lattice: Vec<GreeksIn> = read(&lattice_path)?;
        let model_slices = slices(&mg);
        for l in &lattice {
            let Some((_, slice)) = model_slices.iter().find(|(t, _)| (t - l.tau).abs() <= TAU_MATCH) else {
                continue;
            };
            if let Some((v, d)) = at(slice, l.s) {
                lattice_points.push(PointError {
                    tau: l.tau,
                    s: l.s,
                    v_model: v,
                    v_reference: l.v,
                    v_error: (v - l.v).abs(),
                    delta_model: d,
                    delta_reference: l.delta,
                    delta_error: (d - l.delta).abs(),
                });
            }
        }
        push_stats(&mut report, "lattice_", &lattice_points);
    }
    Ok(Comparison {
        report,
        points,
        lattice_points,
    })
}
