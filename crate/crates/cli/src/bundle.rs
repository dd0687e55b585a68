//! Training runs and the files they leave behind.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use frontfix::auxiliary::free_boundary;
use frontfix::export::{
    boundary_rows, greeks_rows, surface_rows, write_rows, ReportRow, SurfaceRow,
};
use frontfix::residual::loss;
use frontfix::trainer::train_from;
use frontfix::{NetworkParams, TrainRecord};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const HISTORY: &str = "history.csv";
pub const BOUNDARY: &str = "boundary.csv";
pub const SURFACE: &str = "surface.csv";
pub const GREEKS: &str = "greeks.csv";
pub const SUMMARY: &str = "summary.csv";
pub const CHECKPOINT: &str = "checkpoint.txt";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub final_loss: f64,
    pub sf_t: f64,
    pub sf_dot_t: f64,
    pub wall_seconds: Option<f64>,
    pub params: NetworkParams,
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(())
}

pub fn write_csv<R: serde::Serialize>(path: &Path, rows: &[R]) -> CliResult<()> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    write_rows(BufWriter::new(f), rows)?;
    Ok(())
}

fn write_checkpoint(path: &Path, params: &NetworkParams) -> CliResult<()> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    params.write_checkpoint(BufWriter::new(f))?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> CliResult<NetworkParams> {
    let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(NetworkParams::read_checkpoint(f)?)
}

/// Trains from the seeded initialization and writes the full bundle to `dir`.
pub fn train(cfg: &ExperimentConfig, dir: &Path, record_timing: bool) -> CliResult<RunSummary> {
    let tc = cfg.train_config(record_timing)?;
    create_dir(dir)?;
    let init = NetworkParams::init(&tc.arch, tc.seed, tc.init_std)?;

    let mut history = csv::Writer::from_path(dir.join(HISTORY))?;
    let mut sink_error = None;
    let outcome = train_from(&tc, init, |rec: &TrainRecord, params| {
        if sink_error.is_some() {
            return;
        }
        let mut step = || -> CliResult<()> {
            history.serialize(rec)?;
            history.flush()?;
            if cfg.checkpoint_every_display {
                write_checkpoint(&dir.join(format!("checkpoint-{:06}.txt", rec.step)), params)?;
            }
            Ok(())
        };
        if let Err(e) = step() {
            sink_error = Some(e);
        }
    });
    if let Some(e) = sink_error {
        return Err(e);
    }
    let outcome = outcome?;
    let wall = record_timing.then_some(outcome.wall_seconds);
    export(cfg, &outcome.params, dir, outcome.final_loss, wall, &[])
}

/// Loads a checkpoint and writes every bundle file except the history.
pub fn evaluate(cfg: &ExperimentConfig, checkpoint: &Path, dir: &Path) -> CliResult<RunSummary> {
    let params = read_checkpoint(checkpoint)?;
    if params.arch().hidden != cfg.hidden {
        return Err(crate::config::ConfigError {
            key: "network.hidden".into(),
            msg: format!(
                "checkpoint has hidden layers {:?}, config has {:?}",
                params.arch().hidden,
                cfg.hidden
            ),
        }
        .into());
    }
    create_dir(dir)?;
    let grid = cfg.grid.build(cfg.spec.tau_min)?;
    let final_loss = loss(&params, &cfg.spec, &grid, cfg.mode)?;
    export(cfg, &params, dir, final_loss, None, &[ReportRow::new("checkpoint", checkpoint.display())])
}

fn export(
    cfg: &ExperimentConfig,
    params: &NetworkParams,
    dir: &Path,
    final_loss: f64,
    wall: Option<f64>,
    extra: &[ReportRow],
) -> CliResult<RunSummary> {
    let spec = &cfg.spec;
    let predict = cfg.predict.build(spec.tau_min)?;
    write_checkpoint(&dir.join(CHECKPOINT), params)?;
    write_csv(&dir.join(BOUNDARY), &boundary_rows(params, spec, &predict.taus))?;
    let surface: Vec<SurfaceRow> = surface_rows(params, spec, &predict.points(), cfg.mode)?;
    write_csv(&dir.join(SURFACE), &surface)?;
    write_csv(&dir.join(GREEKS), &greeks_rows(&surface))?;

    let (sf_t, sf_dot_t) = free_boundary(params, spec, 1.0);
    let mut report = vec![
        ReportRow::new("experiment", &cfg.name),
        ReportRow::new("config_hash", cfg.hash()),
        ReportRow::new("seed", cfg.seed),
        ReportRow::new("mode", cfg.mode.name()),
        ReportRow::new("grid", format!("{} {}x{} p={}", cfg.grid.kind.name(), cfg.grid.n_tau, cfg.grid.n_y, cfg.grid.p)),
        ReportRow::new("grid_points", cfg.grid.n_tau * cfg.grid.n_y),
        ReportRow::new("parameters", params.len()),
        ReportRow::new("train_steps", cfg.hyper.train_steps),
        ReportRow::new("final_loss", final_loss),
        ReportRow::new("sf_T", sf_t),
        ReportRow::new("sf_dot_T", sf_dot_t),
    ];
    if let Some(w) = wall {
        report.push(ReportRow::new("wall_time", w));
    }
    report.extend_from_slice(extra);
    write_csv(&dir.join(SUMMARY), &report)?;
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        final_loss,
        sf_t,
        sf_dot_t,
        wall_seconds: wall,
        params: params.clone(),
    })
}
