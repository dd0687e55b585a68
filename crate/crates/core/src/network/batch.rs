//! Batched jet propagation through the MLP and its reverse sweep.
//!
//! A chunk of `P` points with `C` tracked channels is laid out as a
//! `(P * C) x width` matrix per layer, so every affine layer is a single GEMM.
//! Channels use a canonical numbering: 0 value, 1 d/dtau, 2 d/dy, 3 d2/dy2,
//! 4 d2/dtau dy, 5 d3/dtau dy2. Slots 0..3 always hold the value, tau and y
//! channels.

use ndarray::{Array2, ArrayView1, ArrayView2};

use super::sigmoid::sigmoid_derivatives;
use super::{NetJet, NetworkParams};

/// Which input-derivatives a tape tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    /// `N, N_tau, N_y, N_yy` (interior residual points).
    Interior,
    /// `N, N_tau, N_y, N_tau_y` (boundary line `y = 0`, Case 1).
    Boundary,
    /// All six entries.
    Full,
}

impl Channels {
    pub fn slots(self) -> &'static [usize] {
        match self {
            Channels::Interior => &[0, 1, 2, 3],
            Channels::Boundary => &[0, 1, 2, 4],
            Channels::Full => &[0, 1, 2, 3, 4, 5],
        }
    }
}

/// Forward record of one chunk, kept for the reverse sweep.
#[derive(Debug, Clone)]
pub struct Tape {
    channels: Channels,
    points: Vec<(f64, f64)>,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
    out: Vec<f64>,
}

#[inline]
fn act_forward(z: &[f64; 6], s: &[f64; 5]) -> [f64; 6] {
    let [_, s1, s2, s3, _] = *s;
    let [_, zt, zy, zyy, zty, ztyy] = *z;
    [
        s[0],
        s1 * zt,
        s1 * zy,
        s2 * zy * zy + s1 * zyy,
        s2 * zt * zy + s1 * zty,
        s3 * zt * zy * zy + s2 * (2.0 * zty * zy + zt * zyy) + s1 * ztyy,
    ]
}

#[inline]
fn act_backward(z: &[f64; 6], s: &[f64; 5], hb: &[f64; 6]) -> [f64; 6] {
    let [_, s1, s2, s3, s4] = *s;
    let [_, zt, zy, zyy, zty, ztyy] = *z;
    [
        s1 * hb[0]
            + s2 * zt * hb[1]
            + s2 * zy * hb[2]
            + (s3 * zy * zy + s2 * zyy) * hb[3]
            + (s3 * zt * zy + s2 * zty) * hb[4]
            + (s4 * zt * zy * zy + s3 * (2.0 * zty * zy + zt * zyy) + s2 * ztyy) * hb[5],
        s1 * hb[1] + s2 * zy * hb[4] + (s3 * zy * zy + s2 * zyy) * hb[5],
        s1 * hb[2] + 2.0 * s2 * zy * hb[3] + s2 * zt * hb[4] + 2.0 * (s3 * zt * zy + s2 * zty) * hb[5],
        s1 * hb[3] + s2 * zt * hb[5],
        s1 * hb[4] + 2.0 * s2 * zy * hb[5],
        s1 * hb[5],
    ]
}

/// Applies `f(z_channels, sigmoid_derivs, other_channels)` per (point, unit).
fn pointwise<F>(z: &Array2<f64>, other: Option<&Array2<f64>>, slots: &[usize], f: F) -> Array2<f64>
where
    F: Fn(&[f64; 6], &[f64; 5], &[f64; 6]) -> [f64; 6],
{
    let c = slots.len();
    let (rows, width) = z.dim();
    let zs = z.as_slice().expect("standard layout");
    let os = other.map(|o| o.as_slice().expect("standard layout"));
    let mut out = vec![0.0; rows * width];
    let mut zc = [0.0; 6];
    let mut oc = [0.0; 6];
    for p in 0..rows / c {
        let base = p * c * width;
        for j in 0..width {
            for (si, &ch) in slots.iter().enumerate() {
                zc[ch] = zs[base + si * width + j];
                if let Some(os) = os {
                    oc[ch] = os[base + si * width + j];
                }
            }
            let s = sigmoid_derivatives(zc[0]);
            let r = f(&zc, &s, &oc);
            for (si, &ch) in slots.iter().enumerate() {
                out[base + si * width + j] = r[ch];
            }
        }
    }
    Array2::from_shape_vec((rows, width), out).expect("shape")
}

fn weights<'a>(params: &'a NetworkParams, k: usize) -> (ArrayView2<'a, f64>, &'a [f64]) {
    let s = params.layer_slots()[k];
    let v = params.values();
    let w = ArrayView2::from_shape((s.fan_out, s.fan_in), &v[s.weights..s.biases]).expect("shape");
    (w, &v[s.biases..s.biases + s.fan_out])
}

impl Tape {
    pub fn forward(params: &NetworkParams, points: &[(f64, f64)], channels: Channels) -> Tape {
        let layers = params.layer_slots();
        let hidden = layers.len() - 1;
        let slots = channels.slots();
        let c = slots.len();
        let rows = points.len() * c;

        let (w0, b0) = weights(params, 0);
        let width0 = layers[0].fan_out;
        let mut first = Array2::<f64>::zeros((rows, width0));
        for (p, &(tau, y)) in points.iter().enumerate() {
            for j in 0..width0 {
                let (wt, wy) = (w0[[j, 0]], w0[[j, 1]]);
                first[[p * c, j]] = wt * tau + wy * y + b0[j];
                first[[p * c + 1, j]] = wt;
                first[[p * c + 2, j]] = wy;
            }
        }

        let mut pre = Vec::with_capacity(hidden);
        let mut post: Vec<Array2<f64>> = Vec::with_capacity(hidden);
        let mut first = Some(first);
        for k in 0..hidden {
            let z = match first.take() {
                Some(z) => z,
                None => {
                    let (w, b) = weights(params, k);
                    let mut z = post[k - 1].dot(&w.t());
                    for p in 0..points.len() {
                        let mut row = z.row_mut(p * c);
                        for (v, bj) in row.iter_mut().zip(b) {
                            *v += bj;
                        }
                    }
                    z
                }
            };
            post.push(pointwise(&z, None, slots, |zc, s, _| act_forward(zc, s)));
            pre.push(z);
        }

        let (w_out, b_out) = weights(params, hidden);
        let mut out = post[hidden - 1].dot(&w_out.row(0)).to_vec();
        for p in 0..points.len() {
            out[p * c] += b_out[0];
        }
        Tape {
            channels,
            points: points.to_vec(),
            pre,
            post,
            out,
        }
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn outputs(&self) -> Vec<NetJet> {
        let slots = self.channels.slots();
        self.out
            .chunks(slots.len())
            .map(|row| {
                let mut a = [0.0; 6];
                for (&ch, &v) in slots.iter().zip(row) {
                    a[ch] = v;
                }
                NetJet::from_array(a)
            })
            .collect()
    }

    /// Adds `sum_p <adjoints[p], d jet_p / d params>` into `grad`.
    ///
    /// Adjoint entries for channels this tape does not track are ignored.
    pub fn backward(&self, params: &NetworkParams, adjoints: &[NetJet], grad: &mut [f64]) {
        assert_eq!(adjoints.len(), self.points.len());
        assert_eq!(grad.len(), params.len());
        let layers = params.layer_slots();
        let hidden = layers.len() - 1;
        let slots = self.channels.slots();
        let c = slots.len();
        let np = self.points.len();

        let gbar: Vec<f64> = adjoints
            .iter()
            .flat_map(|a| {
                let a = a.to_array();
                slots.iter().map(move |&ch| a[ch])
            })
            .collect();

        let out_slot = layers[hidden];
        let (w_out, _) = weights(params, hidden);
        let w_out = w_out.row(0);
        let gw = self.post[hidden - 1].t().dot(&ArrayView1::from(&gbar));
        for (g, v) in grad[out_slot.weights..out_slot.biases].iter_mut().zip(gw.iter()) {
            *g += v;
        }
        grad[out_slot.biases] += (0..np).map(|p| gbar[p * c]).sum::<f64>();

        let width = out_slot.fan_in;
        let mut hbar = Array2::from_shape_fn((np * c, width), |(r, j)| gbar[r] * w_out[j]);

        for k in (0..hidden).rev() {
            let zbar = pointwise(&self.pre[k], Some(&hbar), slots, act_backward);
            let s = layers[k];
            let mut gb = vec![0.0; s.fan_out];
            for p in 0..np {
                for (acc, v) in gb.iter_mut().zip(zbar.row(p * c)) {
                    *acc += v;
                }
            }
            for (g, v) in grad[s.biases..s.biases + s.fan_out].iter_mut().zip(&gb) {
                *g += v;
            }
            if k > 0 {
                let gw = zbar.t().dot(&self.post[k - 1]);
                let gws = gw.as_slice().expect("standard layout");
                for (g, v) in grad[s.weights..s.biases].iter_mut().zip(gws) {
                    *g += v;
                }
                let (w, _) = weights(params, k);
                hbar = zbar.dot(&w);
            } else {
                let mut gw = vec![0.0; 2 * s.fan_out];
                for (p, &(tau, y)) in self.points.iter().enumerate() {
                    let zv = zbar.row(p * c);
                    let zt = zbar.row(p * c + 1);
                    let zy = zbar.row(p * c + 2);
                    for j in 0..s.fan_out {
                        gw[2 * j] += zv[j] * tau + zt[j];
                        gw[2 * j + 1] += zv[j] * y + zy[j];
                    }
                }
                for (g, v) in grad[s.weights..s.biases].iter_mut().zip(&gw) {
                    *g += v;
                }
            }
        }
    }
}
