//! Reproducible parallel ensembles of random measurement sequences.
//!
//! Run `i` draws its sequence from ChaCha8 stream `i` of the master seed, so
//! the sample list is bit-identical for a fixed seed no matter how many
//! rayon workers execute it or in which order. An exhaustive mode replaces
//! sampling by full enumeration of every sequence when the distribution is
//! small enough; it serves as the brute-force reference for the closed-form
//! averages.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::intervals::IntervalDistribution;
use crate::large_deviation::SurvivalHistogram;
use crate::quantum::{sequence_survival_with, HermitianOperator, StateVector, SurvivalFunction};

/// Guard against runaway ensembles: `n_runs * m` must stay below this.
pub const WORK_LIMIT: u64 = 10_000_000_000;
/// Exhaustive enumeration is limited to `atoms^m <= 2^MAX_EXHAUSTIVE_M`.
pub const MAX_EXHAUSTIVE_M: usize = 20;
/// Identity of the sequence sampler; part of the reproducibility contract.
pub const RNG_ID: &str = "chacha8/stream-per-run/v1";

/// Aggregated outcome of one Monte Carlo ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Sequence survival probability per run, indexed by run.
    pub samples: Vec<f64>,
    pub histogram: SurvivalHistogram,
    pub sample_mean: f64,
    /// Edges of the most populated histogram bin.
    pub sample_mode_bin: (f64, f64),
    /// SHA-256 digest of `(H, psi0, dist, m, n_runs, seed, rng id)`.
    pub config_fingerprint: String,
}

/// Runs `n_runs` independent sequences of `m` measurements and aggregates
/// the sequence survival probabilities.
///
/// Work is partitioned by run index over the current rayon pool; inputs are
/// shared immutably and the result is deterministic in `(inputs, seed)`.
pub fn run_ensemble(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    dist: &IntervalDistribution,
    m: usize,
    n_runs: usize,
    seed: u64,
    bins: usize,
) -> Result<EnsembleResult> {
    if m == 0 || n_runs == 0 {
        return Err(Error::ResourceLimit { n_runs, m });
    }
    let work = (n_runs as u64)
        .checked_mul(m as u64)
        .ok_or(Error::ResourceLimit { n_runs, m })?;
    if work > WORK_LIMIT {
        return Err(Error::ResourceLimit { n_runs, m });
    }

    let f = SurvivalFunction::new(hamiltonian, psi0)?;
    let samples: Vec<f64> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let sequence = dist.sample_sequence_run(m, seed, run as u64);
            sequence_survival_with(&f, &sequence)
        })
        .collect();

    let histogram = SurvivalHistogram::from_samples(&samples, bins)?;
    let sample_mean = samples.iter().sum::<f64>() / n_runs as f64;
    let sample_mode_bin = histogram.mode_bin();
    Ok(EnsembleResult {
        samples,
        histogram,
        sample_mean,
        sample_mode_bin,
        config_fingerprint: config_fingerprint(hamiltonian, psi0, dist, m, n_runs, seed),
    })
}

/// Weighted support of the survival probability from enumerating every
/// sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveEnsemble {
    /// `(P, total probability)` per distinct sequence composition, ordered
    /// by increasing `P`.
    pub support: Vec<(f64, f64)>,
    /// Exact mean `sum_sequences weight * P`.
    pub mean: f64,
}

/// Enumerates all `atoms^m` sequences with their product weights.
///
/// Supports one or two atoms and `m <= `[`MAX_EXHAUSTIVE_M`]. Each sequence
/// contributes `weight = prod_j p(mu_j)` and `P = prod_j q(mu_j)`; nothing
/// is sampled and no binomial shortcut is taken, so this is an independent
/// oracle for both the ensemble average and the pushforward law.
pub fn run_exhaustive(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    dist: &IntervalDistribution,
    m: usize,
) -> Result<ExhaustiveEnsemble> {
    let atoms = dist.atoms();
    if atoms.len() > 2 || m > MAX_EXHAUSTIVE_M || m == 0 {
        return Err(Error::ExhaustiveUnsupported {
            atoms: atoms.len(),
            m,
            max_m: MAX_EXHAUSTIVE_M,
        });
    }
    let f = SurvivalFunction::new(hamiltonian, psi0)?;

    if atoms.len() == 1 {
        let p = (m as f64 * f.ln_q(atoms[0].mu)).exp();
        return Ok(ExhaustiveEnsemble {
            support: vec![(p, 1.0)],
            mean: p,
        });
    }

    let ln_q = [f.ln_q(atoms[0].mu), f.ln_q(atoms[1].mu)];
    let weight = [atoms[0].p, atoms[1].p];
    // Accumulate per count of first-atom occurrences; the grouping is pure
    // bookkeeping, every pattern still contributes its own brute product.
    let mut grouped_weight = vec![0.0f64; m + 1];
    let mut grouped_p = vec![f64::NAN; m + 1];
    let mut mean = 0.0f64;
    for pattern in 0u64..(1u64 << m) {
        let mut ln_p = 0.0f64;
        let mut w = 1.0f64;
        let mut ones = 0usize;
        for bit in 0..m {
            let second = (pattern >> bit) & 1 == 1;
            let idx = usize::from(second);
            ln_p += ln_q[idx];
            w *= weight[idx];
            ones += 1 - idx;
        }
        let p = ln_p.exp();
        mean += w * p;
        grouped_weight[ones] += w;
        if grouped_p[ones].is_nan() {
            grouped_p[ones] = p;
        }
    }

    let mut support: Vec<(f64, f64)> = grouped_p
        .into_iter()
        .zip(grouped_weight)
        .filter(|(_, w)| *w > 0.0)
        .collect();
    support.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite probabilities"));
    Ok(ExhaustiveEnsemble { support, mean })
}

/// SHA-256 digest of the full ensemble configuration, including the RNG
/// identity. Two configurations share a fingerprint exactly when they are
/// guaranteed to produce identical ensembles.
pub fn config_fingerprint(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    dist: &IntervalDistribution,
    m: usize,
    n_runs: usize,
    seed: u64,
) -> String {
    let mut hasher = Sha256::new();
    hasher.update(RNG_ID.as_bytes());
    hasher.update((hamiltonian.dim() as u64).to_le_bytes());
    for c in hamiltonian.matrix().iter() {
        hasher.update(c.re.to_bits().to_le_bytes());
        hasher.update(c.im.to_bits().to_le_bytes());
    }
    for c in psi0.amplitudes().iter() {
        hasher.update(c.re.to_bits().to_le_bytes());
        hasher.update(c.im.to_bits().to_le_bytes());
    }
    hasher.update((dist.num_atoms() as u64).to_le_bytes());
    for atom in dist.atoms() {
        hasher.update(atom.mu.to_bits().to_le_bytes());
        hasher.update(atom.p.to_bits().to_le_bytes());
    }
    hasher.update((m as u64).to_le_bytes());
    hasher.update((n_runs as u64).to_le_bytes());
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ensemble_average;

    const DELTA_H: f64 = 2.0 * std::f64::consts::PI * 2500.0;

    fn reference_model() -> (HermitianOperator, StateVector, IntervalDistribution) {
        (
            HermitianOperator::rabi(DELTA_H),
            StateVector::basis(2, 0).unwrap(),
            IntervalDistribution::bimodal(2.0e-6, 10.0e-6, 0.8).unwrap(),
        )
    }

    #[test]
    fn single_atom_ensemble_is_constant() {
        let h = HermitianOperator::rabi(DELTA_H);
        let psi0 = StateVector::basis(2, 0).unwrap();
        let dist = IntervalDistribution::single(2.0e-6).unwrap();
        let result = run_ensemble(&h, &psi0, &dist, 100, 200, 5, 10).unwrap();
        let first = result.samples[0];
        assert!(result.samples.iter().all(|&s| s == first));
        assert!((result.sample_mean - first).abs() < 1e-15);
        assert!((first - 0.9060033429700846).abs() < 1e-10);
    }

    #[test]
    fn ensemble_is_deterministic_and_seed_sensitive() {
        let (h, psi0, dist) = reference_model();
        let a = run_ensemble(&h, &psi0, &dist, 100, 300, 42, 10).unwrap();
        let b = run_ensemble(&h, &psi0, &dist, 100, 300, 42, 10).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.config_fingerprint, b.config_fingerprint);
        let c = run_ensemble(&h, &psi0, &dist, 100, 300, 43, 10).unwrap();
        assert_ne!(a.samples, c.samples);
        assert_ne!(a.config_fingerprint, c.config_fingerprint);
    }

    #[test]
    fn ensemble_is_independent_of_worker_count() {
        let (h, psi0, dist) = reference_model();
        let mut runs = Vec::new();
        for workers in [1usize, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            let result =
                pool.install(|| run_ensemble(&h, &psi0, &dist, 100, 500, 42, 10).unwrap());
            runs.push(result);
        }
        assert_eq!(runs[0].samples, runs[1].samples);
        assert_eq!(runs[0].samples, runs[2].samples);
        assert_eq!(runs[0].histogram, runs[1].histogram);
        assert_eq!(runs[0].config_fingerprint, runs[2].config_fingerprint);
    }

    #[test]
    fn first_sample_matches_plain_sequence_sampling() {
        let (h, psi0, dist) = reference_model();
        let result = run_ensemble(&h, &psi0, &dist, 100, 3, 7, 4).unwrap();
        let seq = dist.sample_sequence(100, 7);
        let direct = crate::quantum::sequence_survival(&h, &psi0, &seq).unwrap();
        assert_eq!(result.samples[0], direct);
    }

    #[test]
    fn exhaustive_matches_closed_form_ensemble_average() {
        let (h, psi0, dist) = reference_model();
        for m in [1usize, 5, 12] {
            let exhaustive = run_exhaustive(&h, &psi0, &dist, m).unwrap();
            let closed = ensemble_average(&dist, &h, &psi0, m).unwrap();
            assert!(
                (exhaustive.mean - closed).abs() / closed < 1e-12,
                "m = {m}: {} vs {closed}",
                exhaustive.mean
            );
            let total: f64 = exhaustive.support.iter().map(|(_, w)| w).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_single_atom() {
        let h = HermitianOperator::rabi(DELTA_H);
        let psi0 = StateVector::basis(2, 0).unwrap();
        let dist = IntervalDistribution::single(2.0e-6).unwrap();
        let e = run_exhaustive(&h, &psi0, &dist, 10).unwrap();
        assert_eq!(e.support.len(), 1);
        assert_eq!(e.support[0].1, 1.0);
        assert!((e.mean - e.support[0].0).abs() < 1e-15);
    }

    #[test]
    fn exhaustive_rejects_unsupported_sizes() {
        let (h, psi0, _) = reference_model();
        let dist3 = IntervalDistribution::from_atoms([
            (1.0e-6, 0.3),
            (2.0e-6, 0.3),
            (3.0e-6, 0.4),
        ])
        .unwrap();
        assert!(matches!(
            run_exhaustive(&h, &psi0, &dist3, 5),
            Err(Error::ExhaustiveUnsupported { .. })
        ));
        let dist2 = IntervalDistribution::bimodal(1.0e-6, 2.0e-6, 0.5).unwrap();
        assert!(matches!(
            run_exhaustive(&h, &psi0, &dist2, MAX_EXHAUSTIVE_M + 1),
            Err(Error::ExhaustiveUnsupported { .. })
        ));
    }

    #[test]
    fn sample_mean_converges_to_the_ensemble_average() {
        // error vs <P> shrinks like 1/sqrt(n); bound each n by 4 sigma
        let (h, psi0, dist) = reference_model();
        let expected = ensemble_average(&dist, &h, &psi0, 100).unwrap();
        // exact variance of P from the two-point law
        let f = SurvivalFunction::new(&h, &psi0).unwrap();
        let (q1, q2) = (f.q(2.0e-6), f.q(10.0e-6));
        let second = (100.0 * (0.8 * q1 * q1 + 0.2 * q2 * q2).ln()).exp();
        let sd = (second - expected * expected).sqrt();
        for n in [100usize, 1000, 10000] {
            let result = run_ensemble(&h, &psi0, &dist, 100, n, 2024, 10).unwrap();
            let bound = 4.0 * sd / (n as f64).sqrt();
            assert!(
                (result.sample_mean - expected).abs() < bound,
                "n = {n}: |{} - {expected}| >= {bound}",
                result.sample_mean
            );
        }
    }

    #[test]
    fn work_limit_is_enforced() {
        let (h, psi0, dist) = reference_model();
        assert!(matches!(
            run_ensemble(&h, &psi0, &dist, usize::MAX, 2, 1, 10),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(matches!(
            run_ensemble(&h, &psi0, &dist, 0, 10, 1, 10),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
