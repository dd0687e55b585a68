use frontfix::sampler::{stretch_tau, stretch_y};
use frontfix::{Grid, GridKind};
use proptest::prelude::*;

/// Kolmogorov-Smirnov statistic of `sample` against U(0, 1).
fn ks_uniform(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let lo = x - i as f64 / n;
        let hi = (i + 1) as f64 / n - x;
        d.max(lo).max(hi)
    })
}

#[test]
fn random_axes_are_uniform() {
    let n = 1000;
    let critical = 1.6276 / (n as f64).sqrt();
    let tau_min = 1e-8;
    let mut rejected = 0;
    for seed in 0..100 {
        let g = Grid::random_structured(n, n, seed, tau_min).unwrap();
        let taus: Vec<f64> = g.taus.iter().map(|t| (t - tau_min) / (1.0 - tau_min)).collect();
        for axis in [&taus, &g.ys] {
            if ks_uniform(axis) > critical {
                rejected += 1;
            }
        }
    }
    // 200 tests at the 1% level: about 2 rejections expected, more than 8 has
    // probability below 1e-3 under uniformity.
    assert!(rejected <= 8, "{rejected} rejections");
}

#[test]
fn ks_statistic_detects_a_skewed_sample() {
    let skewed: Vec<f64> = (0..1000).map(|i| ((i as f64 + 0.5) / 1000.0).powi(2)).collect();
    assert!(ks_uniform(&skewed) > 1.6276 / 1000f64.sqrt());
    let even: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_uniform(&even) < 1e-3);
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

proptest! {
    #[test]
    fn unit_exponent_stretch_is_uniform(n_tau in 2usize..60, n_y in 2usize..60, tau_min in 1e-8f64..1e-2) {
        let s = Grid::stretched(n_tau, n_y, 1.0, tau_min).unwrap();
        let u = Grid::uniform(n_tau, n_y, tau_min).unwrap();
        prop_assert_eq!(&s.ys, &u.ys);
        for (a, b) in s.taus.iter().zip(&u.taus) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn stretched_gaps_grow(n in 3usize..80, p in 1.05f64..4.0) {
        let g = Grid::stretched(n, n, p, 1e-8).unwrap();
        prop_assert!(increasing(&g.taus) && increasing(&g.ys));
        let gaps = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>();
        for w in gaps(&g.ys).windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        for w in gaps(&g.taus).windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        prop_assert_eq!(g.ys[0], 0.0);
        prop_assert_eq!(*g.ys.last().unwrap(), 1.0);
        prop_assert_eq!(*g.taus.last().unwrap(), 1.0);
        prop_assert!(g.taus[0] >= 1e-8);
    }

    #[test]
    fn random_grids_are_sorted_and_span_the_domain(n_tau in 2usize..200, n_y in 2usize..200, seed in any::<u64>()) {
        let g = Grid::random_structured(n_tau, n_y, seed, 1e-8).unwrap();
        prop_assert!(increasing(&g.taus) && increasing(&g.ys));
        prop_assert_eq!(g.taus[0], 1e-8);
        prop_assert_eq!(*g.taus.last().unwrap(), 1.0);
        prop_assert_eq!(g.ys[0], 0.0);
        prop_assert_eq!(*g.ys.last().unwrap(), 1.0);
        prop_assert_eq!(g.len(), n_tau * n_y);
        let again = Grid::build(GridKind::RandomStructured, n_tau, n_y, 1.0, seed, 1e-8).unwrap();
        prop_assert_eq!(g, again);
    }

    #[test]
    fn stretch_maps_fix_the_unit_interval(u in 0.0f64..=1.0, p in 1.0f64..5.0) {
        let t = stretch_tau(u, p);
        let y = stretch_y(u, p);
        prop_assert!((0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&y));
        prop_assert!(t <= u + 1e-15 && y <= u + 1e-15);
    }
}

#[test]
fn invalid_sizes_and_exponents_are_rejected() {
    assert!(Grid::uniform(1, 5, 1e-8).is_err());
    assert!(Grid::uniform(3, 3, 0.0).is_err());
    assert!(Grid::stretched(5, 5, 0.9, 1e-8).is_err());
}
