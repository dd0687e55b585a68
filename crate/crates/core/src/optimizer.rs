//! Adam with an exponential learning-rate decay schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decay {
    pub every: usize,
    pub rate: f64,
    /// `rate^(step/every)` instead of the staircase `rate^floor(step/every)`.
    pub smooth: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamHyper {
    pub lr0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub decay: Option<Decay>,
    pub train_steps: usize,
    pub display_step: usize,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            lr0: 1e-3,
            beta1: 0.99,
            beta2: 0.999,
            eps: 1e-8,
            decay: Some(Decay {
                every: 2000,
                rate: 0.85,
                smooth: false,
            }),
            train_steps: 20_000,
            display_step: 1000,
        }
    }
}

impl AdamHyper {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return bad(format!("learning rate must be > 0, got {}", self.lr0));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("betas must lie in [0, 1), got {} / {}", self.beta1, self.beta2));
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be > 0, got {}", self.eps));
        }
        if let Some(d) = self.decay {
            if d.every == 0 {
                return bad("decay step must be >= 1".into());
            }
            if !(d.rate > 0.0 && d.rate <= 1.0) {
                return bad(format!("decay rate must lie in (0, 1], got {}", d.rate));
            }
        }
        if self.display_step == 0 {
            return bad("display step must be >= 1".into());
        }
        Ok(())
    }

    /// Learning rate in effect at (zero-based) `step`.
    pub fn lr_at(&self, step: usize) -> f64 {
        match self.decay {
            None => self.lr0,
            Some(d) if d.smooth => self.lr0 * d.rate.powf(step as f64 / d.every as f64),
            Some(d) => self.lr0 * d.rate.powi((step / d.every) as i32),
        }
    }
}

/// First and second moment estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    /// Updates applied so far.
    pub t: usize,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// One Adam update of `params` at zero-based `step`. A non-finite
    /// gradient leaves both the state and the parameters untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], hyper: &AdamHyper, step: usize) -> Result<()> {
        assert_eq!(params.len(), grads.len());
        assert_eq!(params.len(), self.m.len());
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { step });
        }
        self.t += 1;
        let lr = hyper.lr_at(step);
        let (b1, b2) = (hyper.beta1, hyper.beta2);
        let c1 = 1.0 - b1.powi(self.t as i32);
        let c2 = 1.0 - b2.powi(self.t as i32);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + hyper.eps);
        }
        Ok(())
    }
}

/// One logged point of the loss history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
    /// Seconds since training started.
    pub elapsed: f64,
}
