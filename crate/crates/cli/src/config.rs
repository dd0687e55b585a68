//! Experiment configuration: plain TOML sections, one per solver module.
//!
//! Every key is optional. The problem falls back to a scenario preset, the
//! network and optimizer to a method preset. Unknown keys are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use frontfix::optimizer::Decay;
use frontfix::trainer::DEFAULT_INIT_STD;
use frontfix::{AdamHyper, Architecture, BoundaryMode, Grid, GridKind, Method, ProblemSpec, Scenario, TrainConfig};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
#[error("{key}: {msg}")]
pub struct ConfigError {
    pub key: String,
    pub msg: String,
}

fn err(key: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    pub n_tau: usize,
    pub n_y: usize,
    pub p: f64,
    pub seed: u64,
}

impl GridSpec {
    pub fn build(&self, tau_min: f64) -> frontfix::Result<Grid> {
        Grid::build(self.kind, self.n_tau, self.n_y, self.p, self.seed, tau_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub scenario: Option<Scenario>,
    pub spec: ProblemSpec,
    pub grid: GridSpec,
    pub predict: GridSpec,
    pub method: Option<Method>,
    pub hidden: Vec<usize>,
    pub init_std: f64,
    pub seed: u64,
    pub hyper: AdamHyper,
    pub mode: BoundaryMode,
    pub out_dir: Option<PathBuf>,
    /// Write a checkpoint at every logged step, not only at the end.
    pub checkpoint_every_display: bool,
}

const PRESETS: &[(&str, &str)] = &[
    ("table2-stretched-STM", include_str!("../../../configs/table2-stretched-STM.toml")),
    ("table2-stretched-MTM", include_str!("../../../configs/table2-stretched-MTM.toml")),
    ("table2-stretched-LTM", include_str!("../../../configs/table2-stretched-LTM.toml")),
    ("table9-case1-LTM", include_str!("../../../configs/table9-case1-LTM.toml")),
    ("table9-case2-LTM", include_str!("../../../configs/table9-case2-LTM.toml")),
    ("method1", include_str!("../../../configs/method1.toml")),
    ("method2", include_str!("../../../configs/method2.toml")),
    ("method3", include_str!("../../../configs/method3.toml")),
    ("method4", include_str!("../../../configs/method4.toml")),
    ("method5", include_str!("../../../configs/method5.toml")),
    ("method6", include_str!("../../../configs/method6.toml")),
    ("method7", include_str!("../../../configs/method7.toml")),
    ("method8", include_str!("../../../configs/method8.toml")),
    ("quick-LTM", include_str!("../../../configs/quick-LTM.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigError> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(name))
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<_> = preset_names().collect();
            err("preset", format!("unknown preset '{name}', known: {}", known.join(", ")))
        })?;
    let mut cfg = ExperimentConfig::parse(text)?;
    if cfg.name.is_empty() {
        cfg.name = name.to_string();
    }
    Ok(cfg)
}

/// Key lookups on one section that remember which keys were read.
struct Section<'a> {
    name: &'a str,
    table: Option<&'a Table>,
    seen: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'a str) -> Result<Self, ConfigError> {
        let table = match root.get(name) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(err(name, "expected a [section]")),
        };
        Ok(Section {
            name,
            table,
            seen: BTreeSet::new(),
        })
    }

    fn key(&self, k: &str) -> String {
        format!("{}.{}", self.name, k)
    }

    fn get(&mut self, k: &'a str) -> Option<&'a Value> {
        self.seen.insert(k);
        self.table.and_then(|t| t.get(k))
    }

    fn float(&mut self, k: &'a str) -> Result<Option<f64>, ConfigError> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(err(self.key(k), format!("expected a number, got {v}"))),
        }
    }

    fn uint(&mut self, k: &'a str) -> Result<Option<u64>, ConfigError> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(err(self.key(k), format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn size(&mut self, k: &'a str) -> Result<Option<usize>, ConfigError> {
        Ok(self.uint(k)?.map(|v| v as usize))
    }

    fn string(&mut self, k: &'a str) -> Result<Option<&'a str>, ConfigError> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(err(self.key(k), format!("expected a string, got {v}"))),
        }
    }

    fn boolean(&mut self, k: &'a str) -> Result<Option<bool>, ConfigError> {
        match self.get(k) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(err(self.key(k), format!("expected true or false, got {v}"))),
        }
    }

    fn sizes(&mut self, k: &'a str) -> Result<Option<Vec<usize>>, ConfigError> {
        let key = self.key(k);
        match self.get(k) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Integer(i) if *i > 0 => Ok(*i as usize),
                    _ => Err(err(key.clone(), format!("expected positive integers, got {v}"))),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(v) => Err(err(key, format!("expected an array, got {v}"))),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(t) = self.table {
            for k in t.keys() {
                if !self.seen.contains(k.as_str()) {
                    return Err(err(self.key(k), "unknown key"));
                }
            }
        }
        Ok(())
    }
}

const SECTIONS: [&str; 8] = [
    "experiment",
    "problem",
    "grid",
    "predict_grid",
    "network",
    "optimizer",
    "auxiliary",
    "output",
];

fn grid_section(s: &mut Section, default: GridSpec) -> Result<GridSpec, ConfigError> {
    let kind = match s.string("kind")? {
        None => default.kind,
        Some(k) => GridKind::parse(k).ok_or_else(|| {
            err(s.key("kind"), format!("unknown grid kind '{k}' (uniform, random, stretched)"))
        })?,
    };
    let n = s.size("n")?;
    let n_tau = s.size("n_tau")?.or(n).unwrap_or(default.n_tau);
    let n_y = s.size("n_y")?.or(n).unwrap_or(default.n_y);
    let p = match kind {
        GridKind::Stretched => s.float("p")?.unwrap_or(default.p),
        _ => {
            let p = s.float("p")?.unwrap_or(1.0);
            if p != 1.0 {
                return Err(err(s.key("p"), "a stretch exponent needs kind = \"stretched\""));
            }
            1.0
        }
    };
    let seed = s.uint("seed")?.unwrap_or(default.seed);
    if n_tau < 2 || n_y < 2 {
        return Err(err(s.key("n_tau"), "grid axes need at least 2 points"));
    }
    if kind == GridKind::Stretched && !(p >= 1.0) {
        return Err(err(s.key("p"), format!("stretch exponent must be >= 1, got {p}")));
    }
    Ok(GridSpec {
        kind,
        n_tau,
        n_y,
        p,
        seed,
    })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| err("file", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| err("syntax", e.message().to_string()))?;
        for k in root.keys() {
            if !SECTIONS.contains(&k.as_str()) {
                return Err(err(k.clone(), "unknown section"));
            }
        }

        let mut s = Section::new(&root, "experiment")?;
        let name = s.string("name")?.unwrap_or("").to_string();
        s.finish()?;

        let mut s = Section::new(&root, "problem")?;
        let scenario = match s.string("scenario")? {
            None => None,
            Some(v) => Some(
                Scenario::parse(v)
                    .ok_or_else(|| err(s.key("scenario"), format!("unknown scenario '{v}' (STM, MTM, LTM)")))?,
            ),
        };
        let base = scenario.unwrap_or(Scenario::Ltm).spec();
        let spec = ProblemSpec {
            strike: s.float("strike")?.unwrap_or(base.strike),
            maturity: s.float("maturity")?.unwrap_or(base.maturity),
            rate: s.float("rate")?.unwrap_or(base.rate),
            sigma: s.float("sigma")?.unwrap_or(base.sigma),
            x_max: s.float("x_max")?.unwrap_or(base.x_max),
            tau_min: s.float("tau_min")?.unwrap_or(base.tau_min),
        };
        if scenario.is_none() && s.table.is_none_or(|t| !t.contains_key("maturity")) {
            return Err(err("problem.scenario", "set a scenario or give the problem explicitly"));
        }
        spec.validate().map_err(|e| err("problem", e.to_string()))?;
        s.finish()?;

        let mut s = Section::new(&root, "grid")?;
        let grid = grid_section(
            &mut s,
            GridSpec {
                kind: GridKind::Stretched,
                n_tau: 60,
                n_y: 60,
                p: 2.0,
                seed: 0,
            },
        )?;
        s.finish()?;

        let mut s = Section::new(&root, "predict_grid")?;
        let predict = grid_section(
            &mut s,
            GridSpec {
                kind: GridKind::Uniform,
                n_tau: 101,
                n_y: 101,
                p: 1.0,
                seed: 0,
            },
        )?;
        s.finish()?;

        let mut s = Section::new(&root, "network")?;
        let method = match s.string("method")? {
            None => None,
            Some(v) => Some(Method::parse(v).ok_or_else(|| err(s.key("method"), format!("unknown method '{v}'")))?),
        };
        let hidden = match s.sizes("hidden")? {
            Some(h) if h.is_empty() => return Err(err(s.key("hidden"), "need at least one hidden layer")),
            Some(h) => h,
            None => method.unwrap_or(Method::M1).hidden(),
        };
        let init_std = s.float("init_std")?.unwrap_or(DEFAULT_INIT_STD);
        if !(init_std > 0.0) {
            return Err(err(s.key("init_std"), "must be > 0"));
        }
        let seed = s.uint("seed")?.unwrap_or(1);
        s.finish()?;

        let mut s = Section::new(&root, "optimizer")?;
        let base = method.unwrap_or(Method::M1).hyper();
        let decay_step = s.size("decay_step")?;
        let decay_rate = s.float("decay_rate")?;
        let smooth = s.boolean("smooth_decay")?.unwrap_or(false);
        let decay = match (s.boolean("decay")?, decay_step, decay_rate) {
            (Some(false), _, _) => None,
            (_, None, None) => base.decay.map(|d| Decay { smooth, ..d }),
            (_, step, rate) => {
                let d = base.decay.unwrap_or(Decay {
                    every: 2000,
                    rate: 0.85,
                    smooth,
                });
                Some(Decay {
                    every: step.unwrap_or(d.every),
                    rate: rate.unwrap_or(d.rate),
                    smooth,
                })
            }
        };
        let hyper = AdamHyper {
            lr0: s.float("lr")?.unwrap_or(base.lr0),
            beta1: s.float("beta1")?.unwrap_or(base.beta1),
            beta2: s.float("beta2")?.unwrap_or(base.beta2),
            eps: s.float("eps")?.unwrap_or(base.eps),
            decay,
            train_steps: s.size("train_steps")?.unwrap_or(base.train_steps),
            display_step: s.size("display_step")?.unwrap_or(base.display_step),
        };
        hyper.validate().map_err(|e| err("optimizer", e.to_string()))?;
        s.finish()?;

        let mut s = Section::new(&root, "auxiliary")?;
        let mode = match s.string("mode")? {
            None => BoundaryMode::Case1,
            Some(v) => BoundaryMode::parse(v)
                .ok_or_else(|| err(s.key("mode"), format!("unknown boundary mode '{v}' (case1, case2)")))?,
        };
        s.finish()?;

        let mut s = Section::new(&root, "output")?;
        let out_dir = s.string("dir")?.map(PathBuf::from);
        let checkpoint_every_display = s.boolean("checkpoint_every_display")?.unwrap_or(false);
        s.finish()?;

        Ok(ExperimentConfig {
            name,
            scenario,
            spec,
            grid,
            predict,
            method,
            hidden,
            init_std,
            seed,
            hyper,
            mode,
            out_dir,
            checkpoint_every_display,
        })
    }

    pub fn architecture(&self) -> Architecture {
        Architecture::new(self.hidden.clone()).expect("hidden sizes validated at parse time")
    }

    pub fn train_config(&self, record_timing: bool) -> frontfix::Result<TrainConfig> {
        Ok(TrainConfig {
            spec: self.spec,
            arch: self.architecture(),
            grid: self.grid.build(self.spec.tau_min)?,
            hyper: self.hyper,
            mode: self.mode,
            seed: self.seed,
            init_std: self.init_std,
            record_timing,
        })
    }

    /// Every resolved setting that influences results, one per line.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let sp = &self.spec;
        let _ = writeln!(s, "problem.strike={:e}", sp.strike);
        let _ = writeln!(s, "problem.maturity={:e}", sp.maturity);
        let _ = writeln!(s, "problem.rate={:e}", sp.rate);
        let _ = writeln!(s, "problem.sigma={:e}", sp.sigma);
        let _ = writeln!(s, "problem.x_max={:e}", sp.x_max);
        let _ = writeln!(s, "problem.tau_min={:e}", sp.tau_min);
        for (name, g) in [("grid", &self.grid), ("predict_grid", &self.predict)] {
            let _ = writeln!(
                s,
                "{name}={} {}x{} p={:e} seed={}",
                g.kind.name(),
                g.n_tau,
                g.n_y,
                g.p,
                g.seed
            );
        }
        let _ = writeln!(s, "network.hidden={:?}", self.hidden);
        let _ = writeln!(s, "network.init_std={:e}", self.init_std);
        let _ = writeln!(s, "network.seed={}", self.seed);
        let h = &self.hyper;
        let _ = writeln!(
            s,
            "optimizer=lr {:e} b1 {:e} b2 {:e} eps {:e} steps {} display {}",
            h.lr0, h.beta1, h.beta2, h.eps, h.train_steps, h.display_step
        );
        match h.decay {
            Some(d) => {
                let _ = writeln!(s, "optimizer.decay={} {:e} smooth={}", d.every, d.rate, d.smooth);
            }
            None => {
                let _ = writeln!(s, "optimizer.decay=none");
            }
        }
        let _ = writeln!(s, "auxiliary.mode={}", self.mode.name());
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
