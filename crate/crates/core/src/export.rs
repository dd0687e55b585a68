//! CSV row types and writers. Every file has a header row and a fixed column order.

use std::io::Write;

use serde::Serialize;

use crate::auxiliary::{evaluate, free_boundary, greeks_from, BoundaryMode};
use crate::error::Result;
use crate::network::NetworkParams;
use crate::optimizer::TrainRecord;
use crate::par;
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub tau: f64,
    pub sf: f64,
    pub sf_dot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub tau: f64,
    pub y: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "P_y")]
    pub p_y: f64,
    #[serde(rename = "P_tau")]
    pub p_tau: f64,
    #[serde(rename = "P_yy")]
    pub p_yy: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreeksRow {
    pub tau: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(rename = "Gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub metric: String,
    pub value: String,
}

impl ReportRow {
    pub fn new(metric: impl Into<String>, value: impl ToString) -> Self {
        ReportRow {
            metric: metric.into(),
            value: value.to_string(),
        }
    }
}

pub fn boundary_rows(params: &NetworkParams, spec: &ProblemSpec, taus: &[f64]) -> Vec<BoundaryRow> {
    par::map(taus, |&tau| {
        let (sf, sf_dot) = free_boundary(params, spec, tau);
        BoundaryRow { tau, sf, sf_dot }
    })
}

/// Auxiliary function, derivatives and asset-space Greeks at each `(tau, y)`.
pub fn surface_rows(
    params: &NetworkParams,
    spec: &ProblemSpec,
    points: &[(f64, f64)],
    mode: BoundaryMode,
) -> Result<Vec<SurfaceRow>> {
    par::map(points, |&(tau, y)| {
        let aux = evaluate(params, spec, tau, y, mode)?;
        let g = greeks_from(spec, y, &aux)?;
        Ok(SurfaceRow {
            tau,
            y,
            s: g.s,
            p: aux.p,
            p_y: aux.p_y,
            p_tau: aux.p_tau,
            p_yy: aux.p_yy,
            v: g.value,
            delta: g.delta,
            gamma: g.gamma,
        })
    })
    .into_iter()
    .collect()
}

pub fn greeks_rows(surface: &[SurfaceRow]) -> Vec<GreeksRow> {
    surface
        .iter()
        .map(|r| GreeksRow {
            tau: r.tau,
            s: r.s,
            v: r.v,
            delta: r.delta,
            gamma: r.gamma,
        })
        .collect()
}

pub fn write_rows<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_history<W: Write>(out: W, history: &[TrainRecord]) -> Result<()> {
    write_rows(out, history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Architecture;
    use crate::problem::Scenario;

    fn text<R: Serialize>(rows: &[R]) -> String {
        let mut buf = Vec::new();
        write_rows(&mut buf, rows).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn headers_are_fixed() {
        let hist = [TrainRecord {
            step: 0,
            lr: 1e-3,
            loss: 2.5,
            elapsed: 0.0,
        }];
        assert!(text(&hist).starts_with("step,lr,loss,elapsed\n0,0.001,2.5,0.0\n"));
        let b = [BoundaryRow {
            tau: 1.0,
            sf: 80.0,
            sf_dot: -3.0,
        }];
        assert!(text(&b).starts_with("tau,sf,sf_dot\n"));
        let r = [ReportRow::new("final_loss", 0.5)];
        assert_eq!(text(&r), "metric,value\nfinal_loss,0.5\n");
    }

    #[test]
    fn surface_columns_and_greeks_projection() {
        let arch = Architecture::new(vec![3]).unwrap();
        let params = NetworkParams::init(&arch, 1, 0.1).unwrap();
        let spec = Scenario::Ltm.spec();
        let rows = surface_rows(&params, &spec, &[(1.0, 0.0), (0.5, 0.2)], BoundaryMode::Case1).unwrap();
        let csv = text(&rows);
        assert!(csv.starts_with("tau,y,S,P,P_y,P_tau,P_yy,V,Delta,Gamma\n"));
        let g = greeks_rows(&rows);
        assert_eq!(g[1].s, rows[1].s);
        assert!(text(&g).starts_with("tau,S,V,Delta,Gamma\n"));
        assert!(surface_rows(&params, &spec, &[(1.0, 1.5)], BoundaryMode::Case1).is_err());
    }
}
