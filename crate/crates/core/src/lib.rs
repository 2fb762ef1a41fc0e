//! Survival-probability statistics of a quantum system under projective
//! measurements applied at random times.
//!
//! A system prepared in `|psi0>` evolves under a time-independent
//! Hamiltonian `H` and is projected back onto `|psi0>` after `m` waiting
//! times drawn i.i.d. from a discrete distribution `p(mu)`. The sequence
//! survival probability `P = prod_j q(mu_j)` is then a random variable; this
//! crate computes its geometric, arithmetic and ensemble averages in closed
//! form, the Zeno parameter `m <ln q>` that controls when they coincide, the
//! exact and Gaussian laws of `P` for two-point distributions, and
//! reproducible Monte Carlo ensembles.
//!
//! Conventions: Hamiltonians are in rad/s, durations in seconds, `hbar = 1`.
//! Frequencies quoted in ordinary units (kHz) must be multiplied by `2 pi`
//! on the way in.

pub mod error;
pub mod intervals;
pub mod large_deviation;
pub mod montecarlo;
pub mod quantum;
pub mod stats;

pub use error::{Error, Result};
pub use intervals::{Atom, IntervalDistribution, MeasurementSequence};
pub use large_deviation::{
    empirical_rate_function, BimodalLaw, LawPoint, SurvivalHistogram,
};
pub use montecarlo::{
    config_fingerprint, run_ensemble, run_exhaustive, EnsembleResult, ExhaustiveEnsemble, RNG_ID,
};
pub use quantum::{
    hamiltonian_moments, propagate, sequence_survival, sequence_survival_with, survival_q,
    HamiltonianMoments, HermitianOperator, StateVector, SurvivalFunction,
};
pub use stats::{
    arithmetic_average, delta_q_exact, delta_q_fourth_order, discrepancy, ensemble_average,
    geometric_average, series_ln_q_m, series_q_m, survival_statistics, zeno_parameter,
    SurvivalStatistics, ZenoRegime, ZenoThresholds,
};

pub use num_complex::Complex64;

// Re-exported so downstream crates build matrices against the same version.
pub use nalgebra;

