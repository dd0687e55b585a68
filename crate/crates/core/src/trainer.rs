//! Full-batch training loop and the named hyperparameter presets.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::auxiliary::BoundaryMode;
use crate::error::{Error, Result};
use crate::network::{Architecture, NetworkParams};
use crate::optimizer::{AdamHyper, AdamState, Decay, TrainRecord};
use crate::problem::ProblemSpec;
use crate::residual::{loss, loss_and_gradient};
use crate::sampler::Grid;

/// Standard deviation of the normal initializer unless configured otherwise.
pub const DEFAULT_INIT_STD: f64 = 0.1;

/// Architecture and optimizer settings of the reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::M1,
        Method::M2,
        Method::M3,
        Method::M4,
        Method::M5,
        Method::M6,
        Method::M7,
        Method::M8,
    ];

    pub fn parse(s: &str) -> Option<Method> {
        let s = s.to_ascii_lowercase();
        let digit = s.strip_prefix("method").unwrap_or(&s).trim_start_matches(['-', '_', ' ']);
        match digit {
            "1" => Some(Method::M1),
            "2" => Some(Method::M2),
            "3" => Some(Method::M3),
            "4" => Some(Method::M4),
            "5" => Some(Method::M5),
            "6" => Some(Method::M6),
            "7" => Some(Method::M7),
            "8" => Some(Method::M8),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::M1 => "method1",
            Method::M2 => "method2",
            Method::M3 => "method3",
            Method::M4 => "method4",
            Method::M5 => "method5",
            Method::M6 => "method6",
            Method::M7 => "method7",
            Method::M8 => "method8",
        }
    }

    pub fn hidden(self) -> Vec<usize> {
        match self {
            Method::M1 | Method::M2 | Method::M3 => vec![512, 256, 128, 64],
            Method::M4 => vec![200; 4],
            Method::M5 => vec![200; 5],
            Method::M6 => vec![200; 6],
            Method::M7 => vec![256, 128, 64, 32],
            Method::M8 => vec![768, 384, 192, 96],
        }
    }

    pub fn architecture(self) -> Architecture {
        Architecture::new(self.hidden()).expect("preset architectures are valid")
    }

    pub fn hyper(self) -> AdamHyper {
        let base = AdamHyper::default();
        match self {
            Method::M2 => AdamHyper {
                beta1: 0.9,
                decay: None,
                ..base
            },
            Method::M3 => AdamHyper {
                beta1: 0.9,
                decay: Some(Decay {
                    every: 2000,
                    rate: 0.85,
                    smooth: false,
                }),
                ..base
            },
            _ => base,
        }
    }
}

/// Everything that determines a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub spec: ProblemSpec,
    pub arch: Architecture,
    pub grid: Grid,
    pub hyper: AdamHyper,
    pub mode: BoundaryMode,
    pub seed: u64,
    pub init_std: f64,
    /// Record wall-clock seconds in the history; off gives byte-stable output.
    pub record_timing: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub history: Vec<TrainRecord>,
    /// Loss after the last update.
    pub final_loss: f64,
    pub wall_seconds: f64,
}

/// Trains from the seeded initialization.
pub fn train(cfg: &TrainConfig) -> Result<TrainOutcome> {
    let init = NetworkParams::init(&cfg.arch, cfg.seed, cfg.init_std)?;
    train_from(cfg, init, |_, _| {})
}

/// Trains from `params`, calling `observe` after each logged record.
pub fn train_from<F>(cfg: &TrainConfig, mut params: NetworkParams, mut observe: F) -> Result<TrainOutcome>
where
    F: FnMut(&TrainRecord, &NetworkParams),
{
    cfg.spec.validate()?;
    cfg.hyper.validate()?;
    if params.arch() != &cfg.arch {
        return Err(Error::Config("initial parameters do not match the configured architecture".into()));
    }
    let clock = Instant::now();
    let elapsed = |c: &Instant| if cfg.record_timing { c.elapsed().as_secs_f64() } else { 0.0 };
    let wrap = |step: usize| move |e: Error| Error::Training { step, source: Box::new(e) };

    let mut state = AdamState::new(params.len());
    let mut history = Vec::new();
    for step in 0..cfg.hyper.train_steps {
        let (value, grad) = loss_and_gradient(&params, &cfg.spec, &cfg.grid, cfg.mode).map_err(wrap(step))?;
        if !value.is_finite() {
            return Err(wrap(step)(Error::Domain(format!("loss is {value}"))));
        }
        if step % cfg.hyper.display_step == 0 {
            let rec = TrainRecord {
                step,
                lr: cfg.hyper.lr_at(step),
                loss: value,
                elapsed: elapsed(&clock),
            };
            observe(&rec, &params);
            history.push(rec);
        }
        state.step(params.values_mut(), &grad, &cfg.hyper, step).map_err(wrap(step))?;
    }

    let steps = cfg.hyper.train_steps;
    let final_loss = loss(&params, &cfg.spec, &cfg.grid, cfg.mode).map_err(wrap(steps))?;
    if !final_loss.is_finite() {
        return Err(wrap(steps)(Error::Domain(format!("final loss is {final_loss}"))));
    }
    let rec = TrainRecord {
        step: steps,
        lr: cfg.hyper.lr_at(steps),
        loss: final_loss,
        elapsed: elapsed(&clock),
    };
    observe(&rec, &params);
    history.push(rec);
    Ok(TrainOutcome {
        params,
        history,
        final_loss,
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Scenario;

    fn tiny(steps: usize) -> TrainConfig {
        let spec = Scenario::Ltm.spec();
        TrainConfig {
            spec,
            arch: Architecture::new(vec![6, 4]).unwrap(),
            grid: Grid::stretched(8, 8, 2.0, spec.tau_min).unwrap(),
            hyper: AdamHyper {
                train_steps: steps,
                display_step: 5,
                ..Method::M1.hyper()
            },
            mode: BoundaryMode::Case1,
            seed: 3,
            init_std: 0.1,
            record_timing: false,
        }
    }

    #[test]
    fn presets_match_reference_tables() {
        assert_eq!(Method::M1.architecture().hidden, vec![512, 256, 128, 64]);
        assert_eq!(Method::M2.hyper().decay, None);
        assert_eq!(Method::M3.hyper().beta1, 0.9);
        assert_eq!(Method::M6.hidden().len(), 6);
        assert_eq!(Method::M7.architecture().param_count(), 44_033);
        for m in Method::ALL {
            let h = m.hyper();
            assert_eq!((h.lr0, h.beta2, h.eps, h.train_steps, h.display_step), (1e-3, 0.999, 1e-8, 20_000, 1000));
            assert_eq!(Method::parse(m.name()), Some(m));
        }
    }

    #[test]
    fn zero_steps_returns_initial_params() {
        let cfg = tiny(0);
        let out = train(&cfg).unwrap();
        let init = NetworkParams::init(&cfg.arch, cfg.seed, cfg.init_std).unwrap();
        assert_eq!(out.params, init);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.history[0].step, 0);
    }

    #[test]
    fn training_is_deterministic_and_logs_on_schedule() {
        let cfg = tiny(12);
        let a = train(&cfg).unwrap();
        let b = train(&cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.history, b.history);
        let steps: Vec<usize> = a.history.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 5, 10, 12]);
        assert!(a.history.iter().all(|r| r.loss.is_finite()));
    }

    #[test]
    fn loss_decreases_on_a_small_problem() {
        let mut cfg = tiny(150);
        cfg.hyper.lr0 = 1e-2;
        cfg.hyper.beta1 = 0.9;
        let out = train(&cfg).unwrap();
        assert!(out.final_loss < out.history[0].loss, "{:?}", out.history);
    }
}
