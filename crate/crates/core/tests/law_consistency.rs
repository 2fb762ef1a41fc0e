//! Cross-module consistency: the closed-form statistics, the two-point law
//! and the brute-force enumerator must describe the same random variable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zeno_core::nalgebra::DMatrix;
use zeno_core::{
    delta_q_exact, delta_q_fourth_order, discrepancy, ensemble_average, hamiltonian_moments,
    run_exhaustive, zeno_parameter, BimodalLaw, Complex64, HermitianOperator,
    IntervalDistribution, StateVector,
};

const DELTA_H: f64 = 2.0 * std::f64::consts::PI * 2500.0;

fn reference_model() -> (HermitianOperator, StateVector, IntervalDistribution) {
    (
        HermitianOperator::rabi(DELTA_H),
        StateVector::basis(2, 0).unwrap(),
        IntervalDistribution::bimodal(2.0e-6, 10.0e-6, 0.8).unwrap(),
    )
}

#[test]
fn pushforward_of_the_binomial_law_matches_enumeration() {
    let (h, psi0, dist) = reference_model();
    for m in [3usize, 9] {
        let exhaustive = run_exhaustive(&h, &psi0, &dist, m).unwrap();
        let law = BimodalLaw::from_model(&h, &psi0, &dist, m).unwrap();
        assert_eq!(exhaustive.support.len(), m + 1);
        for (k, &(p, weight)) in exhaustive.support.iter().enumerate() {
            assert!((p - law.p_of_k(k as f64)).abs() / p < 1e-12);
            let prob = law.exact_prob_k(k).unwrap();
            assert!((weight - prob).abs() / prob < 1e-12);
        }
    }
}

#[test]
fn law_mean_matches_both_ensemble_routes() {
    let (h, psi0, dist) = reference_model();
    let m = 10;
    let law = BimodalLaw::from_model(&h, &psi0, &dist, m).unwrap();
    let law_mean: f64 = law.support().iter().map(|pt| pt.prob * pt.p).sum();
    let closed = ensemble_average(&dist, &h, &psi0, m).unwrap();
    let brute = run_exhaustive(&h, &psi0, &dist, m).unwrap().mean;
    assert!((law_mean - closed).abs() / closed < 1e-10);
    assert!((brute - closed).abs() / closed < 1e-12);
}

#[test]
fn rate_function_minimum_sits_at_the_geometric_average() {
    // 1000 random realizations at m = 100: the empirical rate function is
    // minimized in the bin holding P_g, which the exact law confirms as the
    // most probable value.
    let (h, psi0, dist) = reference_model();
    let m = 100;
    let ensemble = zeno_core::run_ensemble(&h, &psi0, &dist, m, 1000, 42, 10).unwrap();
    let rate = zeno_core::empirical_rate_function(&ensemble.histogram, m);
    assert!(!rate.is_empty());
    let (argmin_p, j_min) = rate
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    assert!(j_min >= 0.0);

    let geo = zeno_core::geometric_average(&dist, &h, &psi0, m).unwrap();
    let geo_bin = ensemble.histogram.bin_index_of(geo).unwrap();
    let argmin_bin = ensemble.histogram.bin_index_of(argmin_p).unwrap();
    assert_eq!(geo_bin, argmin_bin);

    // cross-check against the exact law: the binomial argmax maps into the
    // same bin
    let law = BimodalLaw::from_model(&h, &psi0, &dist, m).unwrap();
    let most_probable = law
        .support()
        .into_iter()
        .max_by(|a, b| a.prob.partial_cmp(&b.prob).unwrap())
        .unwrap();
    assert_eq!(ensemble.histogram.bin_index_of(most_probable.p).unwrap(), geo_bin);
}

#[test]
fn delta_q_ratio_converges_under_interval_scaling() {
    // exact / fourth-order -> 1 as mu_k -> s mu_k with s -> 0
    let (h, psi0, dist) = reference_model();
    let moments = hamiltonian_moments(&h, &psi0).unwrap();
    let m = 100;
    let mut previous_error = f64::INFINITY;
    for s in [0.3f64, 0.13, 0.06, 0.02] {
        let scaled = dist.scaled(s).unwrap();
        let ratio = delta_q_exact(&scaled, &h, &psi0, m).unwrap()
            / delta_q_fourth_order(&moments, &scaled, m);
        let error = (ratio - 1.0).abs();
        assert!(error < previous_error, "no convergence at s = {s}");
        previous_error = error;
        if zeno_parameter(&scaled, &h, &psi0, m).unwrap().abs() <= 0.01 {
            assert!(error <= 0.05, "s = {s}: ratio {ratio}");
        }
    }
}

#[test]
fn zeno_collapse_for_randomized_strict_regime_configs() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let m = 100;
    let mut checked = 0;
    for _ in 0..25 {
        let dim = rng.gen_range(2..=4);
        let a = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = HermitianOperator::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0)).unwrap();
        let psi0 = StateVector::normalized(
            (0..dim)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        let spread = hamiltonian_moments(&h, &psi0).unwrap().variance.sqrt();
        if spread < 1e-3 {
            continue;
        }
        let w = rng.gen_range(0.2..0.8);
        let dist =
            IntervalDistribution::bimodal(rng.gen_range(0.1..1.0), rng.gen_range(1.0..3.0), w)
                .unwrap();

        // steer the interval scale into the strict Zeno regime
        let mut scale = 0.02 / (spread * 3.0);
        for _ in 0..3 {
            let z = zeno_parameter(&dist.scaled(scale).unwrap(), &h, &psi0, m)
                .unwrap()
                .abs();
            if z > 0.0 {
                scale *= (0.008 / z).sqrt();
            }
        }
        let scaled = dist.scaled(scale).unwrap();
        let z = zeno_parameter(&scaled, &h, &psi0, m).unwrap();
        if z == 0.0 || z.abs() > 0.01 {
            continue;
        }
        let d = discrepancy(&scaled, &h, &psi0, m).unwrap();
        assert!(d <= 1e-3, "D = {d} at zeno parameter {z}");
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} configurations reached the regime");
}
