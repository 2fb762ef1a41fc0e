//! Closed-form statistics of the sequence survival probability over random
//! measurement sequences.
//!
//! For a waiting-time distribution with atoms `(mu_k, p_k)` and
//! `q_k = q(mu_k)`, all three averages are evaluated from the per-atom
//! `ln q_k` values in log space, so they share one code path and survive
//! `m` up to 10^6 without underflow:
//!
//! * ensemble   `<P> = exp(m * ln sum_k p_k q_k)`
//! * geometric  `P_g = exp(m * sum_k p_k ln q_k)`  (the most probable value)
//! * arithmetic `P_a = sum_k p_k exp(m * ln q_k)`
//!
//! The Zeno parameter is `m * <ln q>`, which is nonpositive; the regime
//! condition compares its absolute value against a threshold (the sign is
//! dropped deliberately, since the mean log-survival can only be `<= 0`).

use crate::error::{Error, Result};
use crate::intervals::IntervalDistribution;
use crate::quantum::{HamiltonianMoments, HermitianOperator, StateVector, SurvivalFunction};

/// Per-atom weights and log-survivals; the shared evaluation path for all
/// averages.
fn atom_log_survivals(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
) -> Result<Vec<(f64, f64)>> {
    let f = SurvivalFunction::new(hamiltonian, psi0)?;
    Ok(dist
        .atoms()
        .iter()
        .map(|a| (a.p, f.ln_q(a.mu)))
        .collect())
}

fn ensemble_from(atoms: &[(f64, f64)], m: usize) -> f64 {
    let mixture: f64 = atoms.iter().map(|&(p, ln_q)| p * ln_q.exp()).sum();
    if mixture <= 0.0 {
        return 0.0;
    }
    (m as f64 * mixture.ln()).exp()
}

fn geometric_from(atoms: &[(f64, f64)], m: usize) -> f64 {
    let mean_ln_q: f64 = atoms.iter().map(|&(p, ln_q)| p * ln_q).sum();
    (m as f64 * mean_ln_q).exp()
}

fn arithmetic_from(atoms: &[(f64, f64)], m: usize) -> f64 {
    atoms
        .iter()
        .map(|&(p, ln_q)| p * (m as f64 * ln_q).exp())
        .sum()
}

/// Ensemble average `<P(m)> = (sum_k p_k q_k)^m`.
pub fn ensemble_average(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    Ok(ensemble_from(&atom_log_survivals(dist, hamiltonian, psi0)?, m))
}

/// Geometric average `P_g = prod_k q_k^(m p_k)`, equal to the most probable
/// value of `P` (the minimum of the large-deviation rate function).
pub fn geometric_average(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    Ok(geometric_from(&atom_log_survivals(dist, hamiltonian, psi0)?, m))
}

/// Arithmetic average `P_a = sum_k p_k q_k^m` over periodic sequences with
/// the interval drawn once from the distribution.
pub fn arithmetic_average(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    Ok(arithmetic_from(&atom_log_survivals(dist, hamiltonian, psi0)?, m))
}

/// Zeno parameter `m * <ln q>` (nonpositive; `-inf` if some atom has `q = 0`).
pub fn zeno_parameter(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    let atoms = atom_log_survivals(dist, hamiltonian, psi0)?;
    Ok(m as f64 * atoms.iter().map(|&(p, ln_q)| p * ln_q).sum::<f64>())
}

/// Exact log-gap `Delta q = ln <q^m> - <ln q^m> = ln P_a - ln P_g`,
/// nonnegative by Jensen's inequality.
pub fn delta_q_exact(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    let atoms = atom_log_survivals(dist, hamiltonian, psi0)?;
    let geometric = geometric_from(&atoms, m);
    if geometric == 0.0 {
        return Err(Error::ZeroGeometricAverage);
    }
    Ok(arithmetic_from(&atoms, m).ln() - geometric.ln())
}

/// Normalized discrepancy `D = (P_a - P_g) / P_a = 1 - exp(-Delta q)`.
pub fn discrepancy(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<f64> {
    let atoms = atom_log_survivals(dist, hamiltonian, psi0)?;
    let arithmetic = arithmetic_from(&atoms, m);
    if arithmetic == 0.0 {
        return Err(Error::ZeroArithmeticAverage);
    }
    Ok((arithmetic - geometric_from(&atoms, m)) / arithmetic)
}

/// Fourth-order expansion of `Delta q`:
/// `(m^2 / 2) * (Delta^2 H)^2 * (nu4 - nu2^2)`.
///
/// Valid deep in the Zeno regime; it scales exactly as `m^2` and, under
/// `mu_k -> s * mu_k`, exactly as `s^4`.
pub fn delta_q_fourth_order(
    moments: &HamiltonianMoments,
    dist: &IntervalDistribution,
    m: usize,
) -> f64 {
    let mf = m as f64;
    0.5 * mf * mf * moments.variance * moments.variance * dist.nu4_minus_nu2_sq()
}

/// Fourth-order truncation of `q(mu)^m`:
/// `1 - m V mu^2 + (m/12) [gamma + 3 (2m - 1) V^2] mu^4`
/// with `V` the variance and `gamma` the kurtosis of `H`.
pub fn series_q_m(moments: &HamiltonianMoments, mu: f64, m: usize) -> f64 {
    let mf = m as f64;
    let v = moments.variance;
    1.0 - mf * v * mu.powi(2)
        + mf / 12.0 * (moments.kurtosis + 3.0 * (2.0 * mf - 1.0) * v * v) * mu.powi(4)
}

/// Fourth-order truncation of `ln q(mu)^m`:
/// `-m V mu^2 + (m/12) [gamma - 3 V^2] mu^4`.
pub fn series_ln_q_m(moments: &HamiltonianMoments, mu: f64, m: usize) -> f64 {
    let mf = m as f64;
    let v = moments.variance;
    -mf * v * mu.powi(2) + mf / 12.0 * (moments.kurtosis - 3.0 * v * v) * mu.powi(4)
}

/// Classification thresholds on `|m <ln q>|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZenoThresholds {
    pub strict: f64,
    pub loose: f64,
}

impl Default for ZenoThresholds {
    fn default() -> Self {
        Self {
            strict: 0.01,
            loose: 0.1,
        }
    }
}

/// Where a configuration sits relative to the Zeno condition `|m <ln q>| << 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZenoRegime {
    Strict,
    Loose,
    Outside,
}

impl ZenoRegime {
    pub fn classify(zeno_parameter: f64, thresholds: &ZenoThresholds) -> Self {
        let magnitude = zeno_parameter.abs();
        if magnitude <= thresholds.strict {
            ZenoRegime::Strict
        } else if magnitude <= thresholds.loose {
            ZenoRegime::Loose
        } else {
            ZenoRegime::Outside
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ZenoRegime::Strict => "strict",
            ZenoRegime::Loose => "loose",
            ZenoRegime::Outside => "outside",
        }
    }
}

/// Bundle of all closed-form statistics for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalStatistics {
    pub geometric: f64,
    pub arithmetic: f64,
    pub ensemble: f64,
    pub zeno_parameter: f64,
    pub delta_q: f64,
    pub discrepancy: f64,
    pub m: usize,
}

/// Computes every statistic in one pass over the atoms.
///
/// Errors if the geometric average vanishes (some atom has `q = 0`), which
/// makes `Delta q` undefined.
pub fn survival_statistics(
    dist: &IntervalDistribution,
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    m: usize,
) -> Result<SurvivalStatistics> {
    let atoms = atom_log_survivals(dist, hamiltonian, psi0)?;
    let geometric = geometric_from(&atoms, m);
    let arithmetic = arithmetic_from(&atoms, m);
    let ensemble = ensemble_from(&atoms, m);
    if geometric == 0.0 {
        return Err(Error::ZeroGeometricAverage);
    }
    Ok(SurvivalStatistics {
        geometric,
        arithmetic,
        ensemble,
        zeno_parameter: m as f64 * atoms.iter().map(|&(p, ln_q)| p * ln_q).sum::<f64>(),
        delta_q: arithmetic.ln() - geometric.ln(),
        discrepancy: (arithmetic - geometric) / arithmetic,
        m,
    })
}
