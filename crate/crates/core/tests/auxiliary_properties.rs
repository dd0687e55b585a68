use frontfix::auxiliary::{evaluate, free_boundary, greeks};
use frontfix::residual::{loss, neumaier_sum, residuals};
use frontfix::{Architecture, BoundaryMode, Grid, NetworkParams, ProblemSpec, Scenario};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn net(hidden: Vec<usize>, seed: u64, std: f64) -> NetworkParams {
    NetworkParams::init(&Architecture::new(hidden).unwrap(), seed, std).unwrap()
}

fn scenario(i: usize) -> ProblemSpec {
    Scenario::ALL[i % 3].spec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn left_boundary_identities(seed in any::<u64>(), std in 0.05f64..1.0, tau in 1e-8f64..=1.0, sc in 0usize..3) {
        let spec = scenario(sc);
        let params = net(vec![8, 6], seed, std);
        let k = spec.strike;
        let x = spec.x_max;
        for mode in [BoundaryMode::Case1, BoundaryMode::Case2] {
            let e = evaluate(&params, &spec, tau, 0.0, mode).unwrap();
            let (sf, sf_dot) = free_boundary(&params, &spec, tau);
            prop_assert_eq!((e.sf, e.sf_dot), (sf, sf_dot));
            prop_assert!((e.p - (k - e.sf) / x).abs() <= 1e-12 * k);
            prop_assert!((e.p_y + e.sf).abs() <= 1e-10 * k);
            prop_assert!((e.p_tau + e.sf_dot / x).abs() <= 1e-10 * k);
            if mode == BoundaryMode::Case1 {
                let want = (spec.contact_curvature() - e.sf) * x;
                prop_assert!((e.p_yy - want).abs() <= 1e-8 * k * x);
            }
        }
    }

    #[test]
    fn far_boundary_decays(seed in any::<u64>(), tau in 0.01f64..=1.0) {
        let spec = Scenario::Stm.spec();
        let params = net(vec![5], seed, 0.3);
        let e = evaluate(&params, &spec, tau, 1.0, BoundaryMode::Case1).unwrap();
        // |M| on y in [0,1] is bounded by the sum of its term magnitudes at y = 1.
        let (a, _) = frontfix::auxiliary::a_coeff(&params, &spec, tau, BoundaryMode::Case1).unwrap();
        let j = params.jet(tau, 1.0);
        let bound = (spec.strike - e.sf).abs() / spec.x_max + spec.strike + 0.5 * a.abs() + spec.x_max * j.n.abs();
        prop_assert!(e.p.abs() <= (-spec.gamma() / (2.0 * tau)).exp() * bound);
    }

    #[test]
    fn smooth_pasting_delta(seed in any::<u64>(), tau in 0.01f64..=1.0) {
        let spec = Scenario::Mtm.spec();
        let params = net(vec![4, 4], seed, 0.1);
        let g = greeks(&params, &spec, tau, 0.0, BoundaryMode::Case1).unwrap();
        prop_assert!((g.delta + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn loss_is_nonnegative_and_order_free(seed in any::<u64>(), shuffle in any::<u64>()) {
        let spec = Scenario::Ltm.spec();
        let params = net(vec![6], seed, 0.2);
        let grid = Grid::stretched(6, 7, 2.0, spec.tau_min).unwrap();
        let l = loss(&params, &spec, &grid, BoundaryMode::Case1).unwrap();
        prop_assert!(l >= 0.0);
        let mut sq: Vec<f64> = residuals(&params, &spec, &grid, BoundaryMode::Case1)
            .unwrap()
            .iter()
            .map(|p| p.r_value * p.r_value)
            .collect();
        sq.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let permuted = neumaier_sum(sq.iter().copied()) / sq.len() as f64;
        prop_assert!((permuted - l).abs() <= 1e-15 * l);
    }
}

#[test]
fn derivatives_match_finite_differences_of_p() {
    let h = 1e-5;
    for (sc, seed) in [(0, 1), (1, 2), (2, 3), (2, 4)] {
        let spec = scenario(sc);
        let params = net(vec![6, 5], seed, 0.4);
        for mode in [BoundaryMode::Case1, BoundaryMode::Case2] {
            for (tau, y) in [(0.05, 0.02), (0.3, 0.05), (0.7, 0.1), (1.0 - h, 0.2)] {
                let p = |t: f64, v: f64| evaluate(&params, &spec, t, v, mode).unwrap().p;
                let e = evaluate(&params, &spec, tau, y, mode).unwrap();
                let fy = (p(tau, y + h) - p(tau, y - h)) / (2.0 * h);
                let ft = (p(tau + h, y) - p(tau - h, y)) / (2.0 * h);
                let py = |v: f64| evaluate(&params, &spec, tau, v, mode).unwrap().p_y;
                let fyy = (py(y + h) - py(y - h)) / (2.0 * h);
                let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-2);
                assert!(rel(e.p_y, fy) <= 1e-5, "{mode:?} p_y {} vs {fy}", e.p_y);
                assert!(rel(e.p_tau, ft) <= 1e-5, "{mode:?} p_tau {} vs {ft}", e.p_tau);
                assert!(rel(e.p_yy, fyy) <= 1e-5, "{mode:?} p_yy {} vs {fyy}", e.p_yy);
            }
        }
    }
}
