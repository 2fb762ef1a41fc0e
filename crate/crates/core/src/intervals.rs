//! Discrete waiting-time distributions `p(mu)` and sampled measurement
//! sequences.
//!
//! Sequences are drawn with ChaCha8, one uniform draw per interval through
//! the inverse CDF of the atoms. The generator identity and the per-run
//! stream derivation (`seed_from_u64(seed)` + `set_stream(run_index)`) are
//! part of the reproducibility contract: the same `(distribution, m, seed,
//! run_index)` always yields the same sequence, on any machine and under any
//! scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative tolerance for the weight-normalization invariant.
pub const WEIGHT_TOL: f64 = 1e-12;

/// One point mass of the waiting-time distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    /// Waiting time, seconds.
    pub mu: f64,
    /// Probability weight.
    pub p: f64,
}

/// Discrete waiting-time distribution with cached moments.
///
/// Atoms are stored sorted by `mu` with exact duplicates merged, so a
/// two-atom construction with equal values collapses to a single atom.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalDistribution {
    atoms: Vec<Atom>,
    cumulative: Vec<f64>,
    mean: f64,
    nu2: f64,
    nu4: f64,
}

impl IntervalDistribution {
    /// Builds a distribution from `(mu, p)` pairs.
    ///
    /// Zero-weight atoms are dropped, duplicates merge, weights must sum to 1
    /// within [`WEIGHT_TOL`] and every `mu` must be finite and nonnegative.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut kept: Vec<Atom> = Vec::new();
        let mut total = 0.0f64;
        for (mu, p) in atoms {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidProbability(p));
            }
            if mu < 0.0 || !mu.is_finite() {
                return Err(Error::InvalidDuration(mu));
            }
            total += p;
            if p > 0.0 {
                kept.push(Atom { mu, p });
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightSum(total));
        }

        kept.sort_by(|a, b| a.mu.partial_cmp(&b.mu).expect("finite durations"));
        let mut merged: Vec<Atom> = Vec::with_capacity(kept.len());
        for atom in kept {
            match merged.last_mut() {
                Some(last) if last.mu == atom.mu => last.p += atom.p,
                _ => merged.push(atom),
            }
        }

        let mut cumulative = Vec::with_capacity(merged.len());
        let mut acc = 0.0;
        for atom in &merged {
            acc += atom.p;
            cumulative.push(acc);
        }
        // Guard the last edge so every u in [0, 1) lands in some atom.
        *cumulative.last_mut().expect("nonempty") = 1.0;

        let mean = merged.iter().map(|a| a.p * a.mu).sum();
        let nu2 = merged.iter().map(|a| a.p * a.mu.powi(2)).sum();
        let nu4 = merged.iter().map(|a| a.p * a.mu.powi(4)).sum();

        Ok(Self {
            atoms: merged,
            cumulative,
            mean,
            nu2,
            nu4,
        })
    }

    /// Two-point distribution with values `mu1`, `mu2` and weights
    /// `(p1, 1 - p1)`. Degenerate weights or equal values collapse to a
    /// single atom.
    pub fn bimodal(mu1: f64, mu2: f64, p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) || !p1.is_finite() {
            return Err(Error::InvalidProbability(p1));
        }
        Self::from_atoms([(mu1, p1), (mu2, 1.0 - p1)])
    }

    /// Point distribution concentrated on a single waiting time.
    pub fn single(mu: f64) -> Result<Self> {
        Self::from_atoms([(mu, 1.0)])
    }

    /// Distribution with every waiting time multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        Self::from_atoms(self.atoms.iter().map(|a| (a.mu * scale, a.p)))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_single_atom(&self) -> bool {
        self.atoms.len() == 1
    }

    /// Mean waiting time, seconds.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Second moment `nu2 = sum_k p_k mu_k^2`, s^2.
    pub fn nu2(&self) -> f64 {
        self.nu2
    }

    /// Fourth moment `nu4 = sum_k p_k mu_k^4`, s^4.
    pub fn nu4(&self) -> f64 {
        self.nu4
    }

    /// `nu4 - nu2^2`, evaluated as the variance of `mu^2` over the atoms:
    /// `sum_k p_k (mu_k^2 - nu2)^2`. Nonnegative by construction and exactly
    /// zero for a single atom, which the raw-moment difference is not.
    pub fn nu4_minus_nu2_sq(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.p * (a.mu.powi(2) - self.nu2).powi(2))
            .sum()
    }

    /// Draws `m` i.i.d. waiting times; equivalent to
    /// [`sample_sequence_run`](Self::sample_sequence_run) with run index 0.
    pub fn sample_sequence(&self, m: usize, seed: u64) -> MeasurementSequence {
        self.sample_sequence_run(m, seed, 0)
    }

    /// Draws `m` i.i.d. waiting times from the ChaCha8 stream `run_index`
    /// of `seed`. Distinct run indices give independent, reproducible
    /// sequences regardless of evaluation order.
    pub fn sample_sequence_run(&self, m: usize, seed: u64, run_index: u64) -> MeasurementSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run_index);
        let intervals = (0..m).map(|_| self.atoms[self.pick(rng.gen())].mu).collect();
        MeasurementSequence::new(intervals).expect("atoms are valid durations")
    }

    fn pick(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&edge| u < edge)
            .unwrap_or(self.atoms.len() - 1)
    }
}

/// Ordered list of waiting times `{mu_j}` with the total time `T = sum mu_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSequence {
    intervals: Vec<f64>,
    total_time: f64,
}

impl MeasurementSequence {
    pub fn new(intervals: Vec<f64>) -> Result<Self> {
        for &mu in &intervals {
            if mu < 0.0 || !mu.is_finite() {
                return Err(Error::InvalidDuration(mu));
            }
        }
        let total_time = intervals.iter().sum();
        Ok(Self {
            intervals,
            total_time,
        })
    }

    /// `m` identical intervals of length `mu` (periodic measurements).
    pub fn uniform(mu: f64, m: usize) -> Result<Self> {
        Self::new(vec![mu; m])
    }

    /// Number of measurements `m`.
    pub fn m(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    /// Total evolution time, seconds.
    pub fn total_time(&self) -> f64 {
        self.total_time
    }
}
