//! Sigmoid MLP `N(tau, y)` with a linear output unit, its input-derivative
//! jets, and parameter gradients of functionals of those jets.

mod batch;
mod checkpoint;
pub mod sigmoid;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub use batch::{Channels, Tape};
use sigmoid::sigmoid;

/// Points processed per tape; also the unit of data-parallel work.
pub const CHUNK_POINTS: usize = 128;

/// Hidden-layer widths; the input width is 2 and the output width is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Architecture {
    pub hidden: Vec<usize>,
}

impl Architecture {
    pub fn new(hidden: Vec<usize>) -> Result<Self> {
        if hidden.is_empty() {
            return Err(Error::Config("architecture needs at least one hidden layer".into()));
        }
        if hidden.contains(&0) {
            return Err(Error::Config(format!("hidden widths must be >= 1, got {hidden:?}")));
        }
        Ok(Architecture { hidden })
    }

    /// Widths including the input and output layer.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(2);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(1);
        sizes
    }

    pub fn param_count(&self) -> usize {
        self.layer_sizes().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

/// Location of one affine layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSlot {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Offset of the row-major `fan_out x fan_in` weight block.
    pub weights: usize,
    /// Offset of the `fan_out` biases, directly after the weights.
    pub biases: usize,
}

/// Weights and biases of every layer, stored flat in layer order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    arch: Architecture,
    values: Vec<f64>,
    seed: u64,
    init_std: f64,
}

impl NetworkParams {
    /// Draws every weight and bias from `Normal(0, init_std)`.
    pub fn init(arch: &Architecture, seed: u64, init_std: f64) -> Result<Self> {
        if !(init_std.is_finite() && init_std >= 0.0) {
            return Err(Error::Config(format!("init_std must be finite and >= 0, got {init_std}")));
        }
        let normal = Normal::new(0.0, init_std)
            .map_err(|e| Error::Config(format!("init distribution: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..arch.param_count()).map(|_| normal.sample(&mut rng)).collect();
        Ok(NetworkParams {
            arch: arch.clone(),
            values,
            seed,
            init_std,
        })
    }

    pub fn from_values(arch: Architecture, values: Vec<f64>) -> Result<Self> {
        if values.len() != arch.param_count() {
            return Err(Error::Config(format!(
                "expected {} parameters for {:?}, got {}",
                arch.param_count(),
                arch.hidden,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("parameters must be finite".into()));
        }
        Ok(NetworkParams {
            arch,
            values,
            seed: 0,
            init_std: 0.0,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn init_std(&self) -> f64 {
        self.init_std
    }

    pub fn layer_slots(&self) -> Vec<LayerSlot> {
        let mut off = 0;
        self.arch
            .layer_sizes()
            .windows(2)
            .map(|w| {
                let slot = LayerSlot {
                    fan_in: w[0],
                    fan_out: w[1],
                    weights: off,
                    biases: off + w[0] * w[1],
                };
                off = slot.biases + w[1];
                slot
            })
            .collect()
    }

    /// Plain scalar evaluation of `N(tau, y)`.
    pub fn forward(&self, tau: f64, y: f64) -> f64 {
        let slots = self.layer_slots();
        let last = slots.len() - 1;
        let mut act = vec![tau, y];
        for (k, slot) in slots.iter().enumerate() {
            let w = &self.values[slot.weights..slot.biases];
            let b = &self.values[slot.biases..slot.biases + slot.fan_out];
            act = (0..slot.fan_out)
                .map(|j| {
                    let row = &w[j * slot.fan_in..(j + 1) * slot.fan_in];
                    let d = row.iter().zip(&act).map(|(a, x)| a * x).sum::<f64>() + b[j];
                    if k == last {
                        d
                    } else {
                        sigmoid(d)
                    }
                })
                .collect();
        }
        act[0]
    }

    /// Value and all tracked input-derivatives at one point.
    pub fn jet(&self, tau: f64, y: f64) -> NetJet {
        Tape::forward(self, &[(tau, y)], Channels::Full).outputs()[0]
    }

    /// Jets at many points, evaluated chunk-wise (in parallel when enabled).
    pub fn jets(&self, points: &[(f64, f64)], channels: Channels) -> Vec<NetJet> {
        let chunks: Vec<&[(f64, f64)]> = points.chunks(CHUNK_POINTS).collect();
        par::map(&chunks, |c| Tape::forward(self, c, channels).outputs())
            .into_iter()
            .flatten()
            .collect()
    }

    /// Gradient of `functional(jets)` with respect to every parameter.
    ///
    /// `functional` receives the jets at `points` and returns its value along
    /// with the partial derivative of that value with respect to each jet entry
    /// (packed in a `NetJet` per point). The parameter gradient is obtained by
    /// reverse accumulation through the jet propagation itself.
    pub fn param_gradient<F>(
        &self,
        points: &[(f64, f64)],
        channels: Channels,
        functional: F,
    ) -> (f64, Vec<f64>)
    where
        F: FnOnce(&[NetJet]) -> (f64, Vec<NetJet>),
    {
        let tapes: Vec<Tape> = {
            let chunks: Vec<&[(f64, f64)]> = points.chunks(CHUNK_POINTS).collect();
            par::map(&chunks, |c| Tape::forward(self, c, channels))
        };
        let jets: Vec<NetJet> = tapes.iter().flat_map(|t| t.outputs()).collect();
        let (value, adjoints) = functional(&jets);
        assert_eq!(adjoints.len(), points.len(), "one adjoint per point");
        let work: Vec<(&Tape, &[NetJet])> = tapes
            .iter()
            .zip(adjoints.chunks(CHUNK_POINTS))
            .collect();
        let partials = par::map(&work, |(tape, adj)| {
            let mut g = vec![0.0; self.len()];
            tape.backward(self, adj, &mut g);
            g
        });
        let mut grad = vec![0.0; self.len()];
        for g in &partials {
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        (value, grad)
    }
}

/// `N` and its partial derivatives with respect to the inputs at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NetJet {
    pub n: f64,
    pub n_tau: f64,
    pub n_y: f64,
    pub n_yy: f64,
    pub n_tau_y: f64,
    pub n_tau_yy: f64,
}

impl NetJet {
    pub(crate) fn from_array(a: [f64; 6]) -> Self {
        NetJet {
            n: a[0],
            n_tau: a[1],
            n_y: a[2],
            n_yy: a[3],
            n_tau_y: a[4],
            n_tau_yy: a[5],
        }
    }

    pub(crate) fn to_array(self) -> [f64; 6] {
        [self.n, self.n_tau, self.n_y, self.n_yy, self.n_tau_y, self.n_tau_yy]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One hidden unit: N = zeta * f(w tau + n y + b).
    fn one_unit(zeta: f64, w: f64, n: f64, b: f64) -> NetworkParams {
        let arch = Architecture::new(vec![1]).unwrap();
        NetworkParams::from_values(arch, vec![w, n, b, zeta, 0.0]).unwrap()
    }

    fn zero_output(arch: &[usize], seed: u64) -> NetworkParams {
        let arch = Architecture::new(arch.to_vec()).unwrap();
        let mut p = NetworkParams::init(&arch, seed, 0.3).unwrap();
        let out = *p.layer_slots().last().unwrap();
        for v in &mut p.values_mut()[out.weights..] {
            *v = 0.0;
        }
        p
    }

    #[test]
    fn architecture_validation() {
        assert!(Architecture::new(vec![]).is_err());
        assert!(Architecture::new(vec![4, 0]).is_err());
        assert_eq!(Architecture::new(vec![4]).unwrap().param_count(), 17);
    }

    #[test]
    fn init_is_deterministic() {
        let arch = Architecture::new(vec![8, 4]).unwrap();
        let a = NetworkParams::init(&arch, 7, 0.1).unwrap();
        let b = NetworkParams::init(&arch, 7, 0.1).unwrap();
        let c = NetworkParams::init(&arch, 8, 0.1).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn init_scale_matches_config() {
        let arch = Architecture::new(vec![200, 200]).unwrap();
        let p = NetworkParams::init(&arch, 1, 0.1).unwrap();
        let n = p.len() as f64;
        let mean = p.values().iter().sum::<f64>() / n;
        let var = p.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 3e-3, "{mean}");
        assert!((var.sqrt() - 0.1).abs() < 2e-3, "{}", var.sqrt());
    }

    #[test]
    fn zero_output_layer_gives_zero_network() {
        let p = zero_output(&[5, 3], 2);
        for &(t, y) in &[(0.1, 0.0), (0.5, 0.5), (1.0, 1.0)] {
            assert_eq!(p.forward(t, y), 0.0);
            assert_eq!(p.jet(t, y), NetJet::default());
        }
    }

    #[test]
    fn single_unit_values() {
        let p = one_unit(1.0, 0.0, 0.0, 0.0);
        assert_eq!(p.forward(0.3, 0.9), 0.5);
        let p = one_unit(2.0, 1.0, -1.0, 0.3);
        let expected = 2.0 / (1.0 + (-0.8f64).exp());
        assert!((p.forward(0.7, 0.2) - expected).abs() < 1e-15);
        assert!((p.forward(0.7, 0.2) - 1.379_948_962).abs() < 1e-9);
    }

    #[test]
    fn single_unit_jet_matches_closed_forms() {
        let (zeta, w, n, b) = (1.3, -0.7, 2.1, 0.25);
        let p = one_unit(zeta, w, n, b);
        for &(t, y) in &[(0.1, 0.2), (0.9, 0.0), (0.4, 0.8)] {
            let f = sigmoid(w * t + n * y + b);
            let j = p.jet(t, y);
            let close = |a: f64, e: f64| (a - e).abs() <= 1e-14 * e.abs().max(1e-300);
            assert!(close(j.n_tau, zeta * w * f * (1.0 - f)));
            assert!(close(j.n_y, zeta * n * f * (1.0 - f)));
            assert!(close(j.n_yy, zeta * n * n * f * (1.0 - f) * (1.0 - 2.0 * f)));
        }
        // zeta=1, w=2, n=3 at (0.1, 0.2): d = 0.8, N_y = 3 f(0.8)(1 - f(0.8)).
        let p = one_unit(1.0, 2.0, 3.0, 0.0);
        assert!((p.jet(0.1, 0.2).n_y - 0.641_729_089_6).abs() < 1e-8);
    }

    #[test]
    fn jet_value_matches_forward() {
        let arch = Architecture::new(vec![6, 5, 3]).unwrap();
        let p = NetworkParams::init(&arch, 3, 0.8).unwrap();
        for &(t, y) in &[(0.05, 0.0), (0.5, 0.3), (1.0, 1.0)] {
            assert!((p.jet(t, y).n - p.forward(t, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn chunked_jets_match_single_point() {
        let arch = Architecture::new(vec![7, 4]).unwrap();
        let p = NetworkParams::init(&arch, 11, 0.5).unwrap();
        let pts: Vec<(f64, f64)> = (0..300).map(|i| (0.01 + i as f64 / 400.0, (i % 17) as f64 / 16.0)).collect();
        let all = p.jets(&pts, Channels::Full);
        for (i, &(t, y)) in pts.iter().enumerate().step_by(37) {
            assert_eq!(all[i], p.jet(t, y));
        }
        let interior = p.jets(&pts, Channels::Interior);
        assert_eq!(interior[5].n_yy, all[5].n_yy);
        assert_eq!(interior[5].n_tau_y, 0.0);
    }

    #[test]
    fn gradient_of_zero_network_square_is_zero() {
        let p = zero_output(&[4, 3], 5);
        let (v, g) = p.param_gradient(&[(0.5, 0.5)], Channels::Interior, |j| {
            let mut adj = NetJet::default();
            adj.n = 2.0 * j[0].n;
            (j[0].n * j[0].n, vec![adj])
        });
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_unit_value_gradient() {
        let (zeta, w, n, b) = (0.8, 0.3, -1.2, 0.4);
        let p = one_unit(zeta, w, n, b);
        let (t, y) = (0.6, 0.35);
        let (_, g) = p.param_gradient(&[(t, y)], Channels::Interior, |_| {
            (0.0, vec![NetJet { n: 1.0, ..NetJet::default() }])
        });
        let f = sigmoid(w * t + n * y + b);
        // layout: [w, n, b, zeta, out_bias]
        assert!((g[3] - f).abs() < 1e-15);
        assert!((g[2] - zeta * f * (1.0 - f)).abs() < 1e-15);
        assert!((g[0] - zeta * f * (1.0 - f) * t).abs() < 1e-15);
        assert!((g[1] - zeta * f * (1.0 - f) * y).abs() < 1e-15);
        assert_eq!(g[4], 1.0);
    }
}
