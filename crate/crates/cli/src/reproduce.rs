//! Experiment sweeps behind the reference tables, written as data.
//!
//! Each target trains one bundle per run under `<out>/<target>/<run>/` and
//! collects the headline numbers in `<out>/<target>/<target>.csv`.

use std::path::{Path, PathBuf};

use frontfix::{BoundaryMode, GridKind, Method, Scenario};
use serde::Serialize;

use crate::bundle::{self, write_csv};
use crate::config::{preset, ConfigError, ExperimentConfig};
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Table2,
    Table3,
    Table4,
    Table8,
    Table9,
    Fig4,
}

impl Target {
    pub const ALL: [Target; 6] = [
        Target::Table2,
        Target::Table3,
        Target::Table4,
        Target::Table8,
        Target::Table9,
        Target::Fig4,
    ];

    pub fn parse(s: &str) -> Option<Target> {
        Target::ALL.into_iter().find(|t| t.name().eq_ignore_ascii_case(s))
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::Table2 => "table2",
            Target::Table3 => "table3",
            Target::Table4 => "table4",
            Target::Table8 => "table8",
            Target::Table9 => "table9",
            Target::Fig4 => "fig4",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    /// Training grid size on both axes.
    pub grid: Option<usize>,
    pub scenarios: Option<Vec<Scenario>>,
}

/// One configured run plus the reference numbers it is compared with.
#[derive(Debug, Clone)]
pub struct Run {
    pub name: String,
    pub scenario: Scenario,
    pub cfg: ExperimentConfig,
    pub reference_sf: Option<f64>,
    pub reference_loss: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub run: String,
    pub scenario: String,
    pub grid: String,
    pub n_tau: usize,
    pub n_y: usize,
    pub p: f64,
    pub hidden: String,
    pub mode: String,
    pub x_max: f64,
    pub tau_min: f64,
    pub seed: u64,
    pub train_steps: usize,
    pub config_hash: String,
    pub final_loss: f64,
    #[serde(rename = "sf_T")]
    pub sf_t: f64,
    #[serde(rename = "sf_dot_T")]
    pub sf_dot_t: f64,
    pub reference_sf: Option<f64>,
    pub sf_abs_error: Option<f64>,
    pub reference_loss: Option<f64>,
    pub wall_time: Option<f64>,
}

fn base(scenario: Scenario, method: Method) -> ExperimentConfig {
    let mut cfg = preset(method.name()).expect("method presets parse");
    cfg.scenario = Some(scenario);
    cfg.spec = scenario.spec();
    cfg
}

fn with_grid(mut cfg: ExperimentConfig, kind: GridKind, n: usize, p: f64) -> ExperimentConfig {
    cfg.grid.kind = kind;
    cfg.grid.n_tau = n;
    cfg.grid.n_y = n;
    cfg.grid.p = p;
    cfg
}

fn run(name: String, scenario: Scenario, cfg: ExperimentConfig, sf: Option<f64>) -> Run {
    Run {
        name,
        scenario,
        cfg,
        reference_sf: sf,
        reference_loss: None,
    }
}

/// Reference values indexed like `Scenario::ALL`.
const TABLE2: [[f64; 4]; 3] = [
    [84.27, 84.52, 84.02, 83.92],
    [76.19, 76.23, 76.16, 76.16],
    [81.84, 81.78, 81.78, 81.78],
];
const TABLE3_P: [f64; 3] = [1.2, 1.5, 1.7];
const TABLE3: [[f64; 3]; 3] = [[84.20, 84.04, 83.91], [76.26, 76.17, 76.16], [81.88, 81.80, 81.78]];
const TABLE4_N: [usize; 3] = [20, 30, 40];
const TABLE4: [[f64; 3]; 3] = [[84.22, 84.06, 84.03], [76.19, 76.18, 76.17], [81.76, 81.78, 81.77]];
const TABLE8_X: [f64; 4] = [6.0, 4.0, 3.0, 2.0];
const TABLE8_XREF: [[f64; 4]; 3] = [
    [83.91, 84.04, 83.81, 83.95],
    [76.17, 76.17, 76.19, 79.92],
    [81.80, 81.79, 83.19, 90.39],
];
const TABLE8_T: [f64; 4] = [1e-8, 1e-6, 1e-4, 1e-2];
const TABLE8_TREF: [[f64; 4]; 3] = [
    [83.91, 83.86, 83.88, 83.89],
    [76.17, 76.21, 76.20, 76.22],
    [81.80, 81.78, 81.76, 81.83],
];
const TABLE9: [(BoundaryMode, f64, f64); 2] = [
    (BoundaryMode::Case1, 81.773, 4.437e-3),
    (BoundaryMode::Case2, 81.788, 4.170e-2),
];
const FIG4_METHODS: [Method; 6] = [Method::M1, Method::M4, Method::M5, Method::M6, Method::M7, Method::M8];

/// The runs of `target`, before overrides.
pub fn plan(target: Target) -> Vec<Run> {
    let mut runs = Vec::new();
    match target {
        Target::Table2 => {
            for (i, sc) in Scenario::ALL.into_iter().enumerate() {
                let kinds = [(GridKind::Uniform, 1.0), (GridKind::RandomStructured, 1.0), (GridKind::Stretched, 2.0)];
                for (j, (kind, p)) in kinds.into_iter().enumerate() {
                    let cfg = with_grid(base(sc, Method::M1), kind, 100, p);
                    runs.push(run(format!("{}-{}", sc, kind.name()), sc, cfg, Some(TABLE2[i][j])));
                }
            }
        }
        Target::Table3 => {
            for (i, sc) in Scenario::ALL.into_iter().enumerate() {
                for (j, p) in TABLE3_P.into_iter().enumerate() {
                    let cfg = with_grid(base(sc, Method::M1), GridKind::Stretched, 60, p);
                    runs.push(run(format!("{sc}-p{p}"), sc, cfg, Some(TABLE3[i][j])));
                }
            }
        }
        Target::Table4 => {
            for (i, sc) in Scenario::ALL.into_iter().enumerate() {
                for (j, n) in TABLE4_N.into_iter().enumerate() {
                    let cfg = with_grid(base(sc, Method::M1), GridKind::Stretched, n, 2.5);
                    runs.push(run(format!("{sc}-{n}x{n}"), sc, cfg, Some(TABLE4[i][j])));
                }
            }
        }
        Target::Table8 => {
            for (i, sc) in Scenario::ALL.into_iter().enumerate() {
                for (j, x) in TABLE8_X.into_iter().enumerate() {
                    let mut cfg = with_grid(base(sc, Method::M7), GridKind::Stretched, 60, 1.7);
                    cfg.spec = cfg.spec.with_x_max(x);
                    runs.push(run(format!("{sc}-xmax{x}"), sc, cfg, Some(TABLE8_XREF[i][j])));
                }
                for (j, t) in TABLE8_T.into_iter().enumerate() {
                    let mut cfg = with_grid(base(sc, Method::M7), GridKind::Stretched, 60, 1.7);
                    cfg.spec = cfg.spec.with_tau_min(t);
                    runs.push(run(format!("{sc}-taumin{t:e}"), sc, cfg, Some(TABLE8_TREF[i][j])));
                }
            }
        }
        Target::Table9 => {
            for (mode, sf, l) in TABLE9 {
                let mut cfg = with_grid(base(Scenario::Ltm, Method::M1), GridKind::Stretched, 60, 2.5);
                cfg.mode = mode;
                let mut r = run(format!("LTM-{}", mode.name()), Scenario::Ltm, cfg, Some(sf));
                r.reference_loss = Some(l);
                runs.push(r);
            }
        }
        Target::Fig4 => {
            for sc in Scenario::ALL {
                for m in FIG4_METHODS {
                    let cfg = with_grid(base(sc, m), GridKind::Stretched, 60, 2.5);
                    runs.push(run(format!("{sc}-{}", m.name()), sc, cfg, None));
                }
            }
        }
    }
    for r in &mut runs {
        r.cfg.name = format!("{}/{}", target.name(), r.name);
    }
    runs
}

fn apply(run: &mut Run, o: &Overrides) -> Result<(), ConfigError> {
    let cfg = &mut run.cfg;
    if let Some(seed) = o.seed {
        cfg.seed = seed;
        cfg.grid.seed = seed;
    }
    if let Some(steps) = o.steps {
        cfg.hyper.train_steps = steps;
    }
    if let Some(n) = o.grid {
        if n < 2 {
            return Err(ConfigError {
                key: "grid".into(),
                msg: format!("grid override needs at least 2 points per axis, got {n}"),
            });
        }
        cfg.grid.n_tau = n;
        cfg.grid.n_y = n;
    }
    Ok(())
}

/// Plans, applies overrides and filters runs for `target`.
pub fn runs(target: Target, o: &Overrides) -> Result<Vec<Run>, ConfigError> {
    let mut out = Vec::new();
    for mut r in plan(target) {
        if let Some(only) = &o.scenarios {
            if !only.contains(&r.scenario) {
                continue;
            }
        }
        apply(&mut r, o)?;
        out.push(r);
    }
    Ok(out)
}

/// Trains every run and writes the collected table; returns its path.
pub fn reproduce(target: Target, o: &Overrides, out: &Path, record_timing: bool) -> CliResult<(PathBuf, Vec<ResultRow>)> {
    let runs = runs(target, o)?;
    let root = out.join(target.name());
    bundle::create_dir(&root)?;
    let mut rows = Vec::with_capacity(runs.len());
    for r in &runs {
        let s = bundle::train(&r.cfg, &root.join(&r.name), record_timing)?;
        let g = &r.cfg.grid;
        rows.push(ResultRow {
            run: r.name.clone(),
            scenario: r.scenario.name().to_string(),
            grid: g.kind.name().to_string(),
            n_tau: g.n_tau,
            n_y: g.n_y,
            p: g.p,
            hidden: r.cfg.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("-"),
            mode: r.cfg.mode.name().to_string(),
            x_max: r.cfg.spec.x_max,
            tau_min: r.cfg.spec.tau_min,
            seed: r.cfg.seed,
            train_steps: r.cfg.hyper.train_steps,
            config_hash: r.cfg.hash(),
            final_loss: s.final_loss,
            sf_t: s.sf_t,
            sf_dot_t: s.sf_dot_t,
            reference_sf: r.reference_sf,
            sf_abs_error: r.reference_sf.map(|v| (s.sf_t - v).abs()),
            reference_loss: r.reference_loss,
            wall_time: s.wall_seconds,
        });
    }
    let path = root.join(format!("{}.csv", target.name()));
    write_csv(&path, &rows)?;
    Ok((path, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plans_cover_every_reference_cell() {
        assert_eq!(plan(Target::Table2).len(), 9);
        assert_eq!(plan(Target::Table3).len(), 9);
        assert_eq!(plan(Target::Table4).len(), 9);
        assert_eq!(plan(Target::Table8).len(), 24);
        assert_eq!(plan(Target::Table9).len(), 2);
        assert_eq!(plan(Target::Fig4).len(), 18);
        for t in Target::ALL {
            assert_eq!(Target::parse(t.name()), Some(t));
            let names: std::collections::BTreeSet<_> = plan(t).into_iter().map(|r| r.name).collect();
            assert_eq!(names.len(), plan(t).len(), "{t:?} has duplicate run names");
        }
    }

    #[test]
    fn table_settings() {
        let t9 = plan(Target::Table9);
        assert_eq!(t9[0].cfg.mode, BoundaryMode::Case1);
        assert_eq!(t9[1].cfg.mode, BoundaryMode::Case2);
        assert_ne!(t9[0].cfg.hash(), t9[1].cfg.hash());
        assert_eq!((t9[0].cfg.grid.n_tau, t9[0].cfg.grid.p), (60, 2.5));
        let t8 = plan(Target::Table8);
        let ltm2 = t8.iter().find(|r| r.name == "LTM-xmax2").unwrap();
        assert_eq!(ltm2.cfg.spec.x_max, 2.0);
        assert_eq!(ltm2.cfg.hidden, Method::M7.hidden());
        assert_eq!(ltm2.reference_sf, Some(90.39));
        let t2 = plan(Target::Table2);
        assert_eq!(t2[2].cfg.grid.kind, GridKind::Stretched);
        assert_eq!(t2[2].cfg.grid.n_tau, 100);
    }

    #[test]
    fn overrides_apply_and_filter() {
        let o = Overrides {
            seed: Some(7),
            steps: Some(3),
            grid: Some(5),
            scenarios: Some(vec![Scenario::Stm]),
        };
        let rs = runs(Target::Table3, &o).unwrap();
        assert_eq!(rs.len(), 3);
        for r in rs {
            assert_eq!(r.scenario, Scenario::Stm);
            assert_eq!((r.cfg.seed, r.cfg.hyper.train_steps, r.cfg.grid.n_y), (7, 3, 5));
        }
        let bad = Overrides {
            grid: Some(1),
            ..Overrides::default()
        };
        assert_eq!(runs(Target::Table9, &bad).unwrap_err().key, "grid");
    }
}
