//! Contract parameters and the coordinate maps between asset space `(t, S)`,
//! Landau space `(t, x)` and the normalized unit square `(tau, y)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default smallest normalized time evaluated.
pub const DEFAULT_TAU_MIN: f64 = 1e-8;

/// American put contract plus the truncation controls of the transformed domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub strike: f64,
    pub maturity: f64,
    pub rate: f64,
    pub sigma: f64,
    pub x_max: f64,
    pub tau_min: f64,
}

/// The three scenarios of the reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Short time to maturity.
    Stm,
    /// Medium time to maturity.
    Mtm,
    /// Long time to maturity.
    Ltm,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Stm, Scenario::Mtm, Scenario::Ltm];

    pub fn spec(self) -> ProblemSpec {
        let (maturity, rate, sigma) = match self {
            Scenario::Stm => (0.5, 0.05, 0.2),
            Scenario::Mtm => (1.0, 0.10, 0.3),
            Scenario::Ltm => (3.0, 0.08, 0.2),
        };
        ProblemSpec {
            strike: 100.0,
            maturity,
            rate,
            sigma,
            x_max: 6.0,
            tau_min: DEFAULT_TAU_MIN,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Stm => "STM",
            Scenario::Mtm => "MTM",
            Scenario::Ltm => "LTM",
        }
    }

    pub fn parse(s: &str) -> Option<Scenario> {
        match s.to_ascii_uppercase().as_str() {
            "STM" => Some(Scenario::Stm),
            "MTM" => Some(Scenario::Mtm),
            "LTM" => Some(Scenario::Ltm),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl ProblemSpec {
    pub fn new(
        strike: f64,
        maturity: f64,
        rate: f64,
        sigma: f64,
        x_max: f64,
        tau_min: f64,
    ) -> Result<Self> {
        let spec = ProblemSpec {
            strike,
            maturity,
            rate,
            sigma,
            x_max,
            tau_min,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("strike", self.strike),
            ("maturity", self.maturity),
            ("rate", self.rate),
            ("sigma", self.sigma),
            ("x_max", self.x_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if !(self.tau_min > 0.0 && self.tau_min < 1.0) {
            return Err(Error::Config(format!(
                "tau_min must lie in (0, 1), got {}",
                self.tau_min
            )));
        }
        let g = self.gamma();
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::Config(format!("gamma = rK/sigma^2 is not finite and positive: {g}")));
        }
        Ok(())
    }

    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = x_max;
        self
    }

    pub fn with_tau_min(mut self, tau_min: f64) -> Self {
        self.tau_min = tau_min;
        self
    }

    /// Decay speed of the auxiliary prefactor, `r K / sigma^2`.
    pub fn gamma(&self) -> f64 {
        self.rate * self.strike / (self.sigma * self.sigma)
    }

    /// Second-derivative anchor `2 r K / sigma^2` of the left boundary condition.
    pub fn contact_curvature(&self) -> f64 {
        2.0 * self.gamma()
    }

    /// `x = ln S - ln s_f`.
    pub fn landau_forward(&self, s: f64, sf: f64) -> Result<f64> {
        if !(s > 0.0) || !(sf > 0.0) {
            return Err(domain(format!("landau_forward needs S > 0 and s_f > 0, got S={s}, s_f={sf}")));
        }
        Ok(s.ln() - sf.ln())
    }

    /// `(t, x) -> (t / T, x / x_max)`.
    pub fn to_normalized(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.maturity).contains(&t) {
            return Err(domain(format!("t={t} outside [0, {}]", self.maturity)));
        }
        if !(0.0..=self.x_max).contains(&x) {
            return Err(domain(format!("x={x} outside [0, {}]", self.x_max)));
        }
        Ok((t / self.maturity, x / self.x_max))
    }

    pub fn from_normalized(&self, tau: f64, y: f64) -> (f64, f64) {
        (tau * self.maturity, y * self.x_max)
    }

    /// `S = s_f * exp(y * x_max)`.
    pub fn asset_price_of(&self, y: f64, sf: f64) -> Result<f64> {
        if !(sf > 0.0) {
            return Err(domain(format!("asset_price_of needs s_f > 0, got {sf}")));
        }
        if !(0.0..=1.0).contains(&y) {
            return Err(domain(format!("y={y} outside [0, 1]")));
        }
        Ok(sf * (y * self.x_max).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ltm() -> ProblemSpec {
        Scenario::Ltm.spec()
    }

    #[test]
    fn presets_validate() {
        for s in Scenario::ALL {
            s.spec().validate().unwrap();
        }
        assert!((ltm().gamma() - 200.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(ProblemSpec::new(100.0, 1.0, 0.05, 0.2, 6.0, 0.0).is_err());
        assert!(ProblemSpec::new(100.0, 1.0, 0.05, 0.2, 6.0, 1.0).is_err());
        assert!(ProblemSpec::new(-1.0, 1.0, 0.05, 0.2, 6.0, 1e-8).is_err());
        assert!(ProblemSpec::new(100.0, 1.0, 0.0, 0.2, 6.0, 1e-8).is_err());
    }

    #[test]
    fn landau_examples() {
        let spec = ltm();
        assert_eq!(spec.landau_forward(81.78, 81.78).unwrap(), 0.0);
        // ln(100/81.78) = 0.2011374710...
        let x = spec.landau_forward(100.0, 81.78).unwrap();
        assert!((x - 0.201_137_471_0).abs() < 1e-10, "{x}");
        let sf = 77.3;
        let x = spec.landau_forward(sf * spec.x_max.exp(), sf).unwrap();
        assert!((x - spec.x_max).abs() < 1e-14);
        assert!(spec.landau_forward(0.0, 1.0).is_err());
        assert!(spec.landau_forward(1.0, -1.0).is_err());
    }

    #[test]
    fn normalization_examples() {
        let spec = ltm();
        assert_eq!(spec.to_normalized(3.0, 6.0).unwrap(), (1.0, 1.0));
        assert_eq!(spec.to_normalized(0.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(spec.to_normalized(1.5, 3.0).unwrap(), (0.5, 0.5));
        assert!(spec.to_normalized(3.1, 0.0).is_err());
        assert!(spec.to_normalized(1.0, -0.1).is_err());
    }

    #[test]
    fn asset_price_examples() {
        let spec = ltm();
        assert_eq!(spec.asset_price_of(0.0, 76.16).unwrap(), 76.16);
        let s = spec.asset_price_of(1.0, 100.0).unwrap();
        assert!((s - 40_342.879_349_273_51).abs() < 1e-8, "{s}");
        assert!(spec.asset_price_of(0.5, 0.0).is_err());
    }
}
