use thiserror::Error;

/// Errors produced by state, operator and distribution constructors and by
/// the statistics operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("state vector must have dimension >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("state vector is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),
    #[error("cannot normalize a zero state vector")]
    ZeroState,
    #[error("basis index {index} out of range for dimension {dim}")]
    BasisIndexOutOfRange { index: usize, dim: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |H_ij - conj(H_ji)| = {0:.3e}")]
    NotHermitian(f64),
    #[error("spectral decomposition failed to reproduce the matrix: max entry error {0:.3e}")]
    SpectralReconstruction(f64),
    #[error("operator dimension {operator} does not match state dimension {state}")]
    DimensionMismatch { operator: usize, state: usize },
    #[error("duration must be nonnegative and finite, got {0}")]
    InvalidDuration(f64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("distribution must contain at least one atom with positive weight")]
    EmptyDistribution,
    #[error("atom weights sum to {0}, expected 1 within 1e-12")]
    WeightSum(f64),
    #[error("geometric average is zero; delta_q is undefined")]
    ZeroGeometricAverage,
    #[error("arithmetic average is zero; discrepancy is undefined")]
    ZeroArithmeticAverage,
    #[error("degenerate bimodal law: q(mu1) = q(mu2) = {0}; k(P) is not invertible")]
    DegenerateLaw(f64),
    #[error("bimodal law requires exactly 2 atoms, distribution has {0}")]
    NotBimodal(usize),
    #[error("law weights are degenerate (m*p1*p2 = 0); Gaussian density is undefined")]
    DegenerateWeights,
    #[error("k = {k} outside the valid range 0..={m}")]
    KOutOfRange { k: usize, m: usize },
    #[error("survival probability must lie in (0, 1], got {0}")]
    InvalidSurvival(f64),
    #[error("histogram needs at least one sample")]
    NoSamples,
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error("sample {0} outside [0, 1]")]
    SampleOutOfRange(f64),
    #[error("ensemble size {n_runs} runs x {m} measurements is outside the supported range")]
    ResourceLimit { n_runs: usize, m: usize },
    #[error("exhaustive enumeration supports <= 2 atoms and m <= {max_m}, got {atoms} atoms, m = {m}")]
    ExhaustiveUnsupported { atoms: usize, m: usize, max_m: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
