//! The boundary-satisfying auxiliary function `P(tau, y)` built around the
//! network, the boundary extracted from the network at `y = 0`, and the
//! option value with Delta and Gamma.
//!
//! With `e = exp(-y^2 gamma / (2 tau))`,
//!
//! ```text
//! P = e * [ (K - sf)/x_max - y K + y^2/2 * a(tau) + y x_max N(tau, y) ]
//! sf = K - x_max N(tau, 0),   sf' = -x_max N_tau(tau, 0)
//! ```
//!
//! and `a(tau)` is chosen so that `P_yy(tau, 0)` takes the prescribed value.
//! `a` always contains the term `gamma (K - sf) / (tau x_max)`, which cancels
//! analytically against pieces of the prefactor derivatives; the derivative
//! formulas below are written with that cancellation already done so that the
//! `1/tau` blow-up near `tau_min` never reaches the floating-point sum.

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;
use crate::error::{domain, Error, Result};
use crate::network::{NetJet, NetworkParams};
use crate::problem::ProblemSpec;

/// Prefactor exponents below this underflow to exactly zero.
pub const EXP_FLOOR: f64 = -745.0;

/// How the second-derivative condition at `y = 0` is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryMode {
    /// `P_yy(tau, 0) = (2 r K / sigma^2 - sf) x_max`, imposed by construction.
    Case1,
    /// Second derivative at the boundary taken from the network's `N_yy`.
    Case2,
}

impl BoundaryMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case1" | "1" => Some(BoundaryMode::Case1),
            "case2" | "2" => Some(BoundaryMode::Case2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryMode::Case1 => "case1",
            BoundaryMode::Case2 => "case2",
        }
    }
}

/// Network jet entries over an arbitrary scalar type.
#[derive(Debug, Clone, Copy)]
pub struct Jet<T> {
    pub n: T,
    pub n_tau: T,
    pub n_y: T,
    pub n_yy: T,
    pub n_tau_y: T,
    pub n_tau_yy: T,
}

impl From<NetJet> for Jet<f64> {
    fn from(j: NetJet) -> Self {
        Jet {
            n: j.n,
            n_tau: j.n_tau,
            n_y: j.n_y,
            n_yy: j.n_yy,
            n_tau_y: j.n_tau_y,
            n_tau_yy: j.n_tau_yy,
        }
    }
}

/// `P` with its derivatives and the boundary quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxEval<T = f64> {
    pub p: T,
    pub p_y: T,
    pub p_tau: T,
    pub p_yy: T,
    pub sf: T,
    pub sf_dot: T,
    pub a: T,
    pub a_dot: T,
}

/// `(a, a')` split into the mode-dependent regular part and the shared
/// `gamma (K - sf) / (tau x_max)` part.
struct ACoeff<T> {
    reg: T,
    reg_dot: T,
    sing: T,
    sing_dot: T,
}

fn a_parts<T: Scalar>(spec: &ProblemSpec, tau: f64, edge: &Jet<T>, mode: BoundaryMode) -> ACoeff<T> {
    let k = spec.strike;
    let x = spec.x_max;
    let g = spec.gamma();
    // K - sf = x_max N(tau, 0), so gamma (K - sf) / (tau x_max) = gamma N(tau, 0) / tau.
    let sf_dot = edge.n_tau * (-x);
    let sing = edge.n * (g / tau);
    let sing_dot = edge.n * (-g / (tau * tau)) - sf_dot * (g / (tau * x));
    let (reg, reg_dot) = match mode {
        BoundaryMode::Case1 => (
            (edge.n * x - edge.n_y * 2.0 + (spec.contact_curvature() - k)) * x,
            (edge.n_tau * x - edge.n_tau_y * 2.0) * x,
        ),
        BoundaryMode::Case2 => (
            edge.n_yy - edge.n_y * (2.0 * x) - k,
            edge.n_tau_yy - edge.n_tau_y * (2.0 * x),
        ),
    };
    ACoeff {
        reg,
        reg_dot,
        sing,
        sing_dot,
    }
}

/// Builds `P` and its derivatives from the network jet at `(tau, y)` and at
/// `(tau, 0)`. Callers validate `tau >= tau_min` and `y` in `[0, 1]`.
pub fn assemble<T: Scalar>(
    spec: &ProblemSpec,
    tau: f64,
    y: f64,
    at: &Jet<T>,
    edge: &Jet<T>,
    mode: BoundaryMode,
) -> AuxEval<T> {
    let k = spec.strike;
    let x = spec.x_max;
    let g = spec.gamma();
    let sf = edge.n * (-x) + k;
    let sf_dot = edge.n_tau * (-x);
    let ac = a_parts(spec, tau, edge, mode);
    let a = ac.reg + ac.sing;
    let a_dot = ac.reg_dot + ac.sing_dot;

    let expo = -y * y * g / (2.0 * tau);
    if expo < EXP_FLOOR {
        let zero = T::cst(0.0);
        return AuxEval {
            p: zero,
            p_y: zero,
            p_tau: zero,
            p_yy: zero,
            sf,
            sf_dot,
            a,
            a_dot,
        };
    }
    let e = expo.exp();
    let gt = g / tau;

    // M = (K - sf)/x_max + rest, and (K - sf)/x_max = N(tau, 0).
    let rest = a * (0.5 * y * y) + at.n * (y * x) - y * k;
    let m = edge.n + rest;
    let m_y = a * y + at.n * x + at.n_y * (y * x) - k;

    let p = m * e;
    let p_y = (ac.reg * y + at.n * x + at.n_y * (y * x) - k) * e - rest * (y * gt * e);
    let p_tau = (sf_dot * (-1.0 / x) + ac.reg_dot * (0.5 * y * y) - sf_dot * (0.5 * y * y * gt / x)
        + at.n_tau * (y * x))
        * e
        + rest * (0.5 * y * y * gt / tau * e);
    let p_yy = (ac.reg + at.n_y * (2.0 * x) + at.n_yy * (y * x)) * e - m_y * (2.0 * y * gt * e)
        + m * (y * y * gt * gt * e)
        - rest * (gt * e);

    AuxEval {
        p,
        p_y,
        p_tau,
        p_yy,
        sf,
        sf_dot,
        a,
        a_dot,
    }
}

fn check_tau(spec: &ProblemSpec, tau: f64) -> Result<()> {
    if !(tau >= spec.tau_min && tau <= 1.0) {
        return Err(domain(format!("tau={tau} outside [tau_min={}, 1]", spec.tau_min)));
    }
    Ok(())
}

fn check_y(y: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&y) {
        return Err(domain(format!("y={y} outside [0, 1]")));
    }
    Ok(())
}

/// `(sf, sf')` read off the network at `y = 0`. Not clamped.
pub fn free_boundary(params: &NetworkParams, spec: &ProblemSpec, tau: f64) -> (f64, f64) {
    let j = params.jet(tau, 0.0);
    (spec.strike - spec.x_max * j.n, -spec.x_max * j.n_tau)
}

/// `(a, a')` for the chosen boundary mode.
pub fn a_coeff(
    params: &NetworkParams,
    spec: &ProblemSpec,
    tau: f64,
    mode: BoundaryMode,
) -> Result<(f64, f64)> {
    check_tau(spec, tau)?;
    let edge: Jet<f64> = params.jet(tau, 0.0).into();
    let ac = a_parts(spec, tau, &edge, mode);
    Ok((ac.reg + ac.sing, ac.reg_dot + ac.sing_dot))
}

pub fn evaluate(
    params: &NetworkParams,
    spec: &ProblemSpec,
    tau: f64,
    y: f64,
    mode: BoundaryMode,
) -> Result<AuxEval> {
    check_tau(spec, tau)?;
    check_y(y)?;
    let at: Jet<f64> = params.jet(tau, y).into();
    let edge: Jet<f64> = params.jet(tau, 0.0).into();
    Ok(assemble(spec, tau, y, &at, &edge, mode))
}

/// Option value and sensitivities in asset space at one normalized point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Greeks {
    pub s: f64,
    pub value: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Maps an evaluation at `(tau, y)` to asset space, anchored at `S = sf e^{y x_max}`.
pub fn greeks_from(spec: &ProblemSpec, y: f64, aux: &AuxEval) -> Result<Greeks> {
    if !(aux.sf > 0.0) {
        return Err(domain(format!("boundary sf={} is not positive; no asset-space image", aux.sf)));
    }
    let s = aux.sf * (y * spec.x_max).exp();
    Ok(Greeks {
        s,
        value: spec.x_max * aux.p,
        delta: aux.p_y / s,
        gamma: aux.p_yy / (spec.x_max * s * s) - aux.p_y / (s * s),
    })
}

pub fn greeks(
    params: &NetworkParams,
    spec: &ProblemSpec,
    tau: f64,
    y: f64,
    mode: BoundaryMode,
) -> Result<Greeks> {
    let aux = evaluate(params, spec, tau, y, mode)?;
    greeks_from(spec, y, &aux)
}

/// Normalized coordinate of asset price `s` given the boundary `sf`.
pub fn y_of_asset(spec: &ProblemSpec, s: f64, sf: f64) -> Result<f64> {
    let x = spec.landau_forward(s, sf)?;
    let y = x / spec.x_max;
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain(format!(
            "S={s} maps to y={y}, outside the continuation domain [sf, sf e^x_max]"
        )));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Architecture;
    use crate::problem::Scenario;

    fn zero_net() -> NetworkParams {
        let arch = Architecture::new(vec![3]).unwrap();
        NetworkParams::from_values(arch.clone(), vec![0.0; arch.param_count()]).unwrap()
    }

    fn random_net(seed: u64) -> NetworkParams {
        let arch = Architecture::new(vec![6, 4]).unwrap();
        NetworkParams::init(&arch, seed, 0.7).unwrap()
    }

    #[test]
    fn zero_network_boundary_is_strike() {
        let spec = Scenario::Ltm.spec();
        assert_eq!(free_boundary(&zero_net(), &spec, 0.5), (100.0, 0.0));
    }

    #[test]
    fn zero_network_a_coefficients() {
        let spec = Scenario::Ltm.spec();
        let (a, a_dot) = a_coeff(&zero_net(), &spec, 1.0, BoundaryMode::Case1).unwrap();
        assert!((a - 1800.0).abs() < 1e-9, "{a}");
        assert_eq!(a_dot, 0.0);
        let (_, a_dot) = a_coeff(&zero_net(), &spec, 0.3, BoundaryMode::Case2).unwrap();
        assert_eq!(a_dot, 0.0);
        assert!(a_coeff(&zero_net(), &spec, 1e-9, BoundaryMode::Case1).is_err());
    }

    #[test]
    fn zero_network_value_by_hand() {
        // M = 0 - 0.1*100 + 0.005*1800 = -1, exponent = -0.01*200/2 = -1.
        let spec = Scenario::Ltm.spec();
        let e = evaluate(&zero_net(), &spec, 1.0, 0.1, BoundaryMode::Case1).unwrap();
        assert!((e.p + (-1.0f64).exp()).abs() < 1e-15, "{}", e.p);
    }

    #[test]
    fn prefactor_underflows_at_tau_min() {
        let spec = Scenario::Ltm.spec();
        let e = evaluate(&random_net(1), &spec, 1e-8, 0.5, BoundaryMode::Case1).unwrap();
        assert_eq!((e.p, e.p_y, e.p_tau, e.p_yy), (0.0, 0.0, 0.0, 0.0));
        assert!(e.sf.is_finite() && e.a.is_finite() && e.a_dot.is_finite());
    }

    #[test]
    fn left_boundary_identities() {
        let spec = Scenario::Stm.spec();
        let c2 = spec.contact_curvature();
        for seed in 0..20 {
            let net = random_net(seed);
            for &tau in &[1e-8, 1e-4, 0.2, 1.0] {
                let e = evaluate(&net, &spec, tau, 0.0, BoundaryMode::Case1).unwrap();
                assert!((e.p - (spec.strike - e.sf) / spec.x_max).abs() <= 1e-12 * spec.strike);
                assert!((e.p_y + e.sf).abs() <= 1e-10 * spec.strike);
                assert!((e.p_tau + e.sf_dot / spec.x_max).abs() <= 1e-10 * spec.strike);
                assert!((e.p_yy - (c2 - e.sf) * spec.x_max).abs() <= 1e-8 * spec.strike * spec.x_max);
            }
        }
    }

    #[test]
    fn case1_second_derivative_from_a() {
        // P_yy(tau, 0) = a - (gamma/tau)(K - sf)/x_max + 2 x_max N_y(tau, 0).
        let spec = Scenario::Mtm.spec();
        let net = random_net(9);
        for &tau in &[0.05, 0.4, 1.0] {
            let (a, _) = a_coeff(&net, &spec, tau, BoundaryMode::Case1).unwrap();
            let j = net.jet(tau, 0.0);
            let sf = spec.strike - spec.x_max * j.n;
            let via_a = a - spec.gamma() / tau * (spec.strike - sf) / spec.x_max + 2.0 * spec.x_max * j.n_y;
            let target = (spec.contact_curvature() - sf) * spec.x_max;
            assert!((via_a - target).abs() <= 1e-10 * target.abs(), "{via_a} vs {target}");
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let spec = Scenario::Ltm.spec();
        let h = 1e-5;
        for mode in [BoundaryMode::Case1, BoundaryMode::Case2] {
            for seed in 0..4 {
                let net = random_net(100 + seed);
                for &(tau, y) in &[(0.05, 0.02), (0.3, 0.05), (0.8, 0.1), (1.0 - 2e-5, 0.03)] {
                    let e = evaluate(&net, &spec, tau, y, mode).unwrap();
                    let f = |t: f64, yy: f64| evaluate(&net, &spec, t, yy, mode).unwrap().p;
                    let d_y = (f(tau, y + h) - f(tau, y - h)) / (2.0 * h);
                    let d_t = (f(tau + h, y) - f(tau - h, y)) / (2.0 * h);
                    let d_yy = (f(tau, y + h) - 2.0 * e.p + f(tau, y - h)) / (h * h);
                    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-3);
                    assert!(rel(e.p_y, d_y) < 1e-5, "{mode:?} p_y {} vs {d_y}", e.p_y);
                    assert!(rel(e.p_tau, d_t) < 1e-5, "{mode:?} p_tau {} vs {d_t}", e.p_tau);
                    assert!(rel(e.p_yy, d_yy) < 1e-3, "{mode:?} p_yy {} vs {d_yy}", e.p_yy);
                }
            }
        }
    }

    #[test]
    fn a_dot_is_the_tau_derivative_of_a() {
        let spec = Scenario::Stm.spec();
        let h = 1e-6;
        for mode in [BoundaryMode::Case1, BoundaryMode::Case2] {
            let net = random_net(5);
            for &tau in &[0.1, 0.5, 0.9] {
                let (_, a_dot) = a_coeff(&net, &spec, tau, mode).unwrap();
                let fd = (a_coeff(&net, &spec, tau + h, mode).unwrap().0
                    - a_coeff(&net, &spec, tau - h, mode).unwrap().0)
                    / (2.0 * h);
                assert!((a_dot - fd).abs() <= 1e-6 * fd.abs().max(1.0), "{mode:?}: {a_dot} vs {fd}");
            }
        }
    }

    #[test]
    fn smooth_pasting_delta() {
        let spec = Scenario::Ltm.spec();
        let net = random_net(3);
        let g = greeks(&net, &spec, 0.7, 0.0, BoundaryMode::Case1).unwrap();
        assert!((g.delta + 1.0).abs() < 1e-12);
        let g = greeks(&net, &spec, 0.7, 1.0, BoundaryMode::Case1).unwrap();
        assert!(g.value.abs() < 1e-40 && g.delta.abs() < 1e-40 && g.gamma.abs() < 1e-40);
    }
}
