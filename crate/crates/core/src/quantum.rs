//! States, Hermitian generators and single-interval survival probabilities.
//!
//! Everything here works in angular-frequency units: Hamiltonian matrix
//! elements are rad/s, durations are seconds, and `hbar = 1`. A drive quoted
//! as an ordinary frequency `f` (Hz) enters as `2*pi*f` rad/s. For the
//! resonant two-level model built by [`HermitianOperator::rabi`], a coupling
//! of `delta_h` rad/s gives `q(mu) = cos^2(delta_h * mu)`, i.e. a Rabi
//! angular frequency `Omega = 2 * delta_h`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::intervals::MeasurementSequence;

/// Tolerance for the unit-norm invariant of [`StateVector`].
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance for the Hermiticity check of [`HermitianOperator`].
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Entrywise tolerance for reconstructing the matrix from its eigensystem.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Normalized pure state `|psi0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Builds a state from amplitudes, requiring unit norm within [`NORM_TOL`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let deviation = (amplitudes.norm() - 1.0).abs();
        if deviation > NORM_TOL {
            return Err(Error::NotNormalized(deviation));
        }
        Ok(Self { amplitudes })
    }

    /// Builds a state from arbitrary nonzero amplitudes, rescaling to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        let mut amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        amplitudes /= Complex64::new(norm, 0.0);
        Ok(Self { amplitudes })
    }

    /// The computational basis state `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        if index >= dim {
            return Err(Error::BasisIndexOutOfRange { index, dim });
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }
}

/// Time-independent Hamiltonian `H` with its cached spectral decomposition.
///
/// Matrix elements are angular frequencies (rad/s). Construction rejects
/// non-Hermitian input and verifies that `V diag(lambda) V^dagger`
/// reproduces the matrix within [`RECONSTRUCTION_TOL`].
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: DMatrix<Complex64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(Error::DimensionTooSmall(rows));
        }
        let mut max_dev = 0.0f64;
        for i in 0..rows {
            for j in 0..rows {
                let dev = (matrix[(i, j)] - matrix[(j, i)].conj()).norm();
                max_dev = max_dev.max(dev);
            }
        }
        if max_dev > HERMITICITY_TOL {
            return Err(Error::NotHermitian(max_dev));
        }

        let eigen = matrix.clone().symmetric_eigen();
        let eigenvectors = eigen.eigenvectors;
        let eigenvalues = eigen.eigenvalues;

        let lambda = DVector::from_iterator(
            rows,
            eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)),
        );
        let reconstruction =
            &eigenvectors * DMatrix::from_diagonal(&lambda) * eigenvectors.adjoint();
        let mut max_err = 0.0f64;
        for i in 0..rows {
            for j in 0..rows {
                max_err = max_err.max((reconstruction[(i, j)] - matrix[(i, j)]).norm());
            }
        }
        // Scale-aware: the absolute tolerance applies to a unit-scale matrix.
        let scale = matrix.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
        if max_err > RECONSTRUCTION_TOL * scale {
            return Err(Error::SpectralReconstruction(max_err));
        }

        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Resonant two-level coupling Hamiltonian `delta_h * sigma_x`.
    ///
    /// `delta_h` is in rad/s; the induced Rabi angular frequency is
    /// `Omega = 2 * delta_h`, so a state prepared in `|0>` has
    /// `q(mu) = cos^2(delta_h * mu)`.
    pub fn rabi(delta_h: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        let c = Complex64::new(delta_h, 0.0);
        let matrix = DMatrix::from_row_slice(2, 2, &[z, c, c, z]);
        Self::new(matrix).expect("sigma_x coupling is Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Real eigenvalues, in the order produced by the decomposition.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Unitary matrix whose columns are the eigenvectors.
    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }
}

/// Energy moments of `H` in the initial state: `mean = <H>`,
/// `variance = <H^2> - <H>^2`, and `kurtosis` the fourth central moment
/// `<(H - <H>)^4>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMoments {
    /// rad/s
    pub mean: f64,
    /// rad^2/s^2
    pub variance: f64,
    /// rad^4/s^4
    pub kurtosis: f64,
}

/// Spectral representation of the single-interval survival amplitude.
///
/// For `|psi0>` with overlaps `w_k = |<v_k|psi0>|^2` onto the eigenvectors of
/// `H`, the amplitude is `<psi0|U(mu)|psi0> = sum_k w_k exp(-i lambda_k mu)`.
/// This avoids building the full propagator when `q` is evaluated many times.
#[derive(Debug, Clone)]
pub struct SurvivalFunction {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

impl SurvivalFunction {
    pub fn new(hamiltonian: &HermitianOperator, psi0: &StateVector) -> Result<Self> {
        if hamiltonian.dim() != psi0.dim() {
            return Err(Error::DimensionMismatch {
                operator: hamiltonian.dim(),
                state: psi0.dim(),
            });
        }
        let overlaps = hamiltonian.eigenvectors().adjoint() * psi0.amplitudes();
        Ok(Self {
            eigenvalues: hamiltonian.eigenvalues().iter().copied().collect(),
            weights: overlaps.iter().map(|c| c.norm_sqr()).collect(),
        })
    }

    /// `<psi0|exp(-iH mu)|psi0>`.
    pub fn amplitude(&self, mu: f64) -> Complex64 {
        if mu == 0.0 {
            // U(0) = I, so the amplitude is <psi0|psi0> = 1 exactly; the
            // weights only sum to 1 up to eigensolver roundoff.
            return Complex64::new(1.0, 0.0);
        }
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .map(|(&lambda, &w)| {
                let phase = -lambda * mu;
                Complex64::new(w * phase.cos(), w * phase.sin())
            })
            .sum()
    }

    /// Single-interval survival probability `q(mu)`, clamped into `[0, 1]`.
    pub fn q(&self, mu: f64) -> f64 {
        self.amplitude(mu).norm_sqr().clamp(0.0, 1.0)
    }

    /// `ln q(mu)`; `-inf` when the amplitude vanishes.
    pub fn ln_q(&self, mu: f64) -> f64 {
        self.q(mu).ln()
    }

    /// Spectral weights `w_k` paired with eigenvalues `lambda_k`; this is the
    /// spectral measure of `H` in `|psi0>`.
    pub fn spectral_measure(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// Unitary propagator `U = exp(-i H mu)` via the spectral decomposition,
/// `V diag(exp(-i lambda_k mu)) V^dagger`.
pub fn propagate(hamiltonian: &HermitianOperator, mu: f64) -> Result<DMatrix<Complex64>> {
    check_duration(mu)?;
    let dim = hamiltonian.dim();
    if mu == 0.0 {
        // exp(0) = I exactly, independent of the eigenbasis roundoff
        return Ok(DMatrix::identity(dim, dim));
    }
    let phases = DVector::from_iterator(
        dim,
        hamiltonian.eigenvalues().iter().map(|&lambda| {
            let phase = -lambda * mu;
            Complex64::new(phase.cos(), phase.sin())
        }),
    );
    let v = hamiltonian.eigenvectors();
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

/// Single-interval survival probability `q(mu) = |<psi0|U(mu)|psi0>|^2`,
/// evaluated through the full propagator.
pub fn survival_q(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    mu: f64,
) -> Result<f64> {
    if hamiltonian.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch {
            operator: hamiltonian.dim(),
            state: psi0.dim(),
        });
    }
    let u = propagate(hamiltonian, mu)?;
    let amplitude = (psi0.amplitudes().adjoint() * u * psi0.amplitudes())[(0, 0)];
    Ok(amplitude.norm_sqr().clamp(0.0, 1.0))
}

/// Sequence survival probability `P = prod_j q(mu_j)`.
///
/// Accumulated as `exp(sum_j ln q(mu_j))` so that products of up to 10^6
/// factors do not underflow term by term; an empty sequence gives 1. After a
/// rank-1 projection onto the initial pure state the post-measurement state
/// is `|psi0>` again, so the product of scalars carries the whole history.
pub fn sequence_survival(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
    sequence: &MeasurementSequence,
) -> Result<f64> {
    let f = SurvivalFunction::new(hamiltonian, psi0)?;
    Ok(sequence_survival_with(&f, sequence))
}

/// Same as [`sequence_survival`] with a precomputed [`SurvivalFunction`].
pub fn sequence_survival_with(f: &SurvivalFunction, sequence: &MeasurementSequence) -> f64 {
    let ln_p: f64 = sequence.intervals().iter().map(|&mu| f.ln_q(mu)).sum();
    ln_p.exp()
}

/// Mean, variance and fourth central moment (kurtosis) of `H` in `|psi0>`.
pub fn hamiltonian_moments(
    hamiltonian: &HermitianOperator,
    psi0: &StateVector,
) -> Result<HamiltonianMoments> {
    let f = SurvivalFunction::new(hamiltonian, psi0)?;
    let mean: f64 = f.spectral_measure().map(|(l, w)| w * l).sum();
    let variance: f64 = f
        .spectral_measure()
        .map(|(l, w)| w * (l - mean).powi(2))
        .sum();
    let kurtosis: f64 = f
        .spectral_measure()
        .map(|(l, w)| w * (l - mean).powi(4))
        .sum();
    Ok(HamiltonianMoments {
        mean,
        variance,
        kurtosis,
    })
}

fn check_duration(mu: f64) -> Result<()> {
    if mu < 0.0 || !mu.is_finite() {
        return Err(Error::InvalidDuration(mu));
    }
    Ok(())
}
