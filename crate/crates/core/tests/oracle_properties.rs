use frontfix::oracle::{binomial_put, psor_boundary, psor_solve, FdConfig, LatticeConfig};
use frontfix::{ProblemSpec, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LATTICE: LatticeConfig = LatticeConfig {
    steps: 400,
    smoothing: true,
};

fn put(k: f64, t: f64, r: f64, sigma: f64, s0: f64) -> f64 {
    let spec = ProblemSpec::new(k, t, r, sigma, 6.0, 1e-8).unwrap();
    binomial_put(&spec, s0, LATTICE).unwrap()
}

#[test]
fn lattice_is_monotone_in_spot_volatility_and_maturity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..20 {
        let k = 100.0;
        let t: f64 = rng.gen_range(0.25..3.0);
        let r: f64 = rng.gen_range(0.01..0.12);
        let sigma: f64 = rng.gen_range(0.1..0.5);
        let s0: f64 = rng.gen_range(70.0..130.0);
        let base = put(k, t, r, sigma, s0);
        assert!(base >= (k - s0).max(0.0));
        // Non-strict: inside the exercise region all three equal the payoff.
        assert!(put(k, t, r, sigma, s0 + 5.0) <= base, "spot");
        assert!(put(k, t, r, sigma + 0.05, s0) >= base, "volatility");
        assert!(put(k, t + 0.5, r, sigma, s0) >= base, "maturity");
    }
}

#[test]
fn lattice_reference_value_is_stable() {
    let spec = Scenario::Ltm.spec();
    let v = binomial_put(&spec, 100.0, LatticeConfig::default()).unwrap();
    assert!((v - 6.932_191_349_1).abs() < 1e-9, "{v}");
    let finer = binomial_put(&spec, 100.0, LatticeConfig { steps: 20_000, smoothing: true }).unwrap();
    assert!((v - finer).abs() < 1e-3);
}

#[test]
fn fd_boundary_is_decreasing_and_below_strike() {
    for sc in Scenario::ALL {
        let spec = sc.spec();
        let cfg = FdConfig {
            ns: 800,
            nt: 400,
            ..FdConfig::for_strike(spec.strike)
        };
        let curve = psor_boundary(&spec, &cfg).unwrap();
        assert_eq!(curve.len(), cfg.nt + 1);
        // The extracted curve jitters by a small fraction of a cell when the
        // contact node moves.
        let slack = 0.05 * cfg.s_max / cfg.ns as f64;
        for w in curve.windows(2) {
            assert!(w[1].1 <= w[0].1 + slack, "{sc}: {:?}", w);
        }
        assert!(curve.iter().all(|&(_, sf)| sf <= spec.strike));
    }
}

#[test]
fn fd_and_lattice_values_agree() {
    let spec = Scenario::Stm.spec();
    let cfg = FdConfig {
        ns: 1000,
        nt: 500,
        ..FdConfig::for_strike(spec.strike)
    };
    let sol = psor_solve(&spec, &cfg, &[]).unwrap();
    for s0 in [80.0, 86.0, 90.0, 95.0, 100.0, 105.0, 110.0, 120.0, 140.0, 180.0] {
        let b = binomial_put(&spec, s0, LatticeConfig { steps: 2000, smoothing: true }).unwrap();
        assert!((sol.value_at(s0) - b).abs() <= 0.1, "S={s0}: fd {} lattice {b}", sol.value_at(s0));
    }
}
