//! Logistic sigmoid and its first four derivatives, expressed through the
//! pair `(s, 1 - s)` so neither saturated tail loses precision.

/// Returns `(s, 1 - s)` without overflow for any finite input.
#[inline]
pub fn sigmoid_pair(z: f64) -> (f64, f64) {
    if z >= 0.0 {
        let e = (-z).exp();
        let d = 1.0 / (1.0 + e);
        (d, e * d)
    } else {
        let e = z.exp();
        let d = 1.0 / (1.0 + e);
        (e * d, d)
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    sigmoid_pair(z).0
}

/// `[s, s', s'', s''', s'''']` at `z`.
#[inline]
pub fn sigmoid_derivatives(z: f64) -> [f64; 5] {
    let (s, c) = sigmoid_pair(z);
    let s1 = s * c;
    let skew = c - s;
    let q = s1 * skew;
    [
        s,
        s1,
        q,
        s1 * (1.0 - 6.0 * s1),
        q * (1.0 - 12.0 * s1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturated_tails_stay_finite() {
        for z in [-1e4, -745.0, -700.0, 0.0, 700.0, 745.0, 1e4] {
            for d in sigmoid_derivatives(z) {
                assert!(d.is_finite(), "z={z}");
            }
        }
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(-1e4), 0.0);
        assert_eq!(sigmoid(1e4), 1.0);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for z in [-3.0, -0.7, 0.0, 0.4, 2.5] {
            let d = sigmoid_derivatives(z);
            let dp = sigmoid_derivatives(z + h);
            let dm = sigmoid_derivatives(z - h);
            for k in 0..4 {
                let fd = (dp[k] - dm[k]) / (2.0 * h);
                assert!((fd - d[k + 1]).abs() < 1e-8, "z={z} k={k}: {fd} vs {}", d[k + 1]);
            }
        }
    }
}
