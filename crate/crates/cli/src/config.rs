//! TOML experiment configuration.
//!
//! Parsing is strict: unknown keys are rejected, and every physical quantity
//! carries its unit in the field name (`_khz`, `_us`) or in a mandatory
//! `units` tag. Conversion to internal units (rad/s, seconds) happens here
//! and nowhere else, so a kHz value can never leak into the math without its
//! `2 pi`.

use std::path::Path;

use serde::Deserialize;

use zeno_core::nalgebra::DMatrix;
use zeno_core::{Complex64, HermitianOperator, IntervalDistribution, StateVector};

use crate::CliError;

pub const KHZ_TO_RAD_PER_S: f64 = 2.0 * std::f64::consts::PI * 1.0e3;
pub const US_TO_S: f64 = 1.0e-6;

pub const DEFAULT_M: usize = 100;
pub const DEFAULT_N_RUNS: usize = 1000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    hamiltonian: HamiltonianSection,
    #[serde(default)]
    initial_state: Option<InitialStateSection>,
    distribution: DistributionSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    sweep: Option<SweepSection>,
    #[serde(default)]
    histogram: Option<HistogramSection>,
    #[serde(default)]
    output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HamiltonianSection {
    kind: String,
    delta_h_khz: Option<f64>,
    units: Option<String>,
    elements: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialStateSection {
    kind: String,
    index: Option<usize>,
    amplitudes: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionSection {
    atoms_us: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    m: usize,
    n_runs: usize,
    seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            m: DEFAULT_M,
            n_runs: DEFAULT_N_RUNS,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    variable: String,
    start_us: f64,
    stop_us: f64,
    step_us: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HistogramSection {
    bins: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    format: Option<String>,
}

/// What a sweep ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// The common interval of a periodic sequence (decay curves).
    Mu,
    /// The second atom of a bimodal distribution (average-scaling curves).
    Mu2,
}

/// A resolved sweep range, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start_s: f64,
    pub stop_s: f64,
    pub step_s: f64,
}

impl Sweep {
    /// Grid points `start, start + step, ...` up to `stop` inclusive
    /// (within half a ulp-scaled step of the endpoint).
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let value = self.start_s + i as f64 * self.step_s;
            if value > self.stop_s * (1.0 + 1e-12) + 1e-18 {
                break;
            }
            out.push(value);
            i += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Fully validated experiment: domain objects in internal units.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub hamiltonian: HermitianOperator,
    pub initial_state: StateVector,
    pub distribution: IntervalDistribution,
    pub m: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub sweep: Option<Sweep>,
    pub bins: usize,
    pub format: OutputFormat,
}

pub fn load(path: &Path) -> Result<Experiment, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Experiment, CliError> {
    // toml reports line/column spans for syntax and unknown-key errors
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config error: {e}")))?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<Experiment, CliError> {
    let hamiltonian = build_hamiltonian(&raw.hamiltonian)?;
    let initial_state = build_initial_state(raw.initial_state.as_ref(), hamiltonian.dim())?;
    let distribution = build_distribution(&raw.distribution)?;

    if raw.run.m == 0 {
        return Err(CliError::Config("run.m must be >= 1".into()));
    }
    if raw.run.n_runs == 0 {
        return Err(CliError::Config("run.n_runs must be >= 1".into()));
    }

    let sweep = raw.sweep.as_ref().map(build_sweep).transpose()?;

    let bins = match &raw.histogram {
        Some(h) if h.bins == 0 => {
            return Err(CliError::Config("histogram.bins must be >= 1".into()))
        }
        Some(h) => h.bins,
        None => DEFAULT_BINS,
    };

    let format = match raw.output.as_ref().and_then(|o| o.format.as_deref()) {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            return Err(CliError::Config(format!(
                "output.format: unknown format {other:?} (expected \"csv\" or \"json\")"
            )))
        }
    };

    Ok(Experiment {
        hamiltonian,
        initial_state,
        distribution,
        m: raw.run.m,
        n_runs: raw.run.n_runs,
        seed: raw.run.seed,
        sweep,
        bins,
        format,
    })
}

fn build_hamiltonian(section: &HamiltonianSection) -> Result<HermitianOperator, CliError> {
    match section.kind.as_str() {
        "rabi" => {
            let delta_h_khz = section.delta_h_khz.ok_or_else(|| {
                CliError::Config("hamiltonian: kind \"rabi\" requires delta_h_khz".into())
            })?;
            if section.units.is_some() || section.elements.is_some() {
                return Err(CliError::Config(
                    "hamiltonian: kind \"rabi\" takes only delta_h_khz".into(),
                ));
            }
            if !(delta_h_khz.is_finite() && delta_h_khz > 0.0) {
                return Err(CliError::Config(format!(
                    "hamiltonian.delta_h_khz must be positive and finite, got {delta_h_khz}"
                )));
            }
            Ok(HermitianOperator::rabi(delta_h_khz * KHZ_TO_RAD_PER_S))
        }
        "matrix" => {
            if section.delta_h_khz.is_some() {
                return Err(CliError::Config(
                    "hamiltonian: delta_h_khz is only valid for kind \"rabi\"".into(),
                ));
            }
            let units = section.units.as_deref().ok_or_else(|| {
                CliError::Config(
                    "hamiltonian: kind \"matrix\" requires a units tag (\"khz\" or \"rad_per_s\")"
                        .into(),
                )
            })?;
            let scale = match units {
                "khz" => KHZ_TO_RAD_PER_S,
                "rad_per_s" => 1.0,
                other => {
                    return Err(CliError::Config(format!(
                        "hamiltonian.units: unknown units {other:?} (expected \"khz\" or \"rad_per_s\")"
                    )))
                }
            };
            let rows = section.elements.as_ref().ok_or_else(|| {
                CliError::Config("hamiltonian: kind \"matrix\" requires elements".into())
            })?;
            let dim = rows.len();
            if dim < 2 || rows.iter().any(|r| r.len() != dim) {
                return Err(CliError::Config(format!(
                    "hamiltonian.elements must be a square matrix of dimension >= 2, got {dim} rows"
                )));
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for row in rows {
                for &[re, im] in row {
                    entries.push(Complex64::new(re * scale, im * scale));
                }
            }
            let matrix = DMatrix::from_row_slice(dim, dim, &entries);
            HermitianOperator::new(matrix)
                .map_err(|e| CliError::Config(format!("hamiltonian.elements: {e}")))
        }
        other => Err(CliError::Config(format!(
            "hamiltonian.kind: unknown kind {other:?} (expected \"rabi\" or \"matrix\")"
        ))),
    }
}

fn build_initial_state(
    section: Option<&InitialStateSection>,
    dim: usize,
) -> Result<StateVector, CliError> {
    let Some(section) = section else {
        // default: the first basis state
        return StateVector::basis(dim, 0)
            .map_err(|e| CliError::Config(format!("initial_state: {e}")));
    };
    match section.kind.as_str() {
        "basis" => {
            if section.amplitudes.is_some() {
                return Err(CliError::Config(
                    "initial_state: kind \"basis\" takes only index".into(),
                ));
            }
            let index = section.index.unwrap_or(0);
            StateVector::basis(dim, index)
                .map_err(|e| CliError::Config(format!("initial_state.index: {e}")))
        }
        "amplitudes" => {
            if section.index.is_some() {
                return Err(CliError::Config(
                    "initial_state: kind \"amplitudes\" takes only amplitudes".into(),
                ));
            }
            let amplitudes = section.amplitudes.as_ref().ok_or_else(|| {
                CliError::Config("initial_state: kind \"amplitudes\" requires amplitudes".into())
            })?;
            if amplitudes.len() != dim {
                return Err(CliError::Config(format!(
                    "initial_state.amplitudes has length {}, hamiltonian dimension is {dim}",
                    amplitudes.len()
                )));
            }
            let v = amplitudes
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            StateVector::normalized(v)
                .map_err(|e| CliError::Config(format!("initial_state.amplitudes: {e}")))
        }
        other => Err(CliError::Config(format!(
            "initial_state.kind: unknown kind {other:?} (expected \"basis\" or \"amplitudes\")"
        ))),
    }
}

fn build_distribution(section: &DistributionSection) -> Result<IntervalDistribution, CliError> {
    if section.atoms_us.len() != section.weights.len() {
        return Err(CliError::Config(format!(
            "distribution: atoms_us has {} entries but weights has {}",
            section.atoms_us.len(),
            section.weights.len()
        )));
    }
    let atoms = section
        .atoms_us
        .iter()
        .zip(&section.weights)
        .map(|(&mu_us, &w)| (mu_us * US_TO_S, w));
    IntervalDistribution::from_atoms(atoms)
        .map_err(|e| CliError::Config(format!("distribution: {e}")))
}

fn build_sweep(section: &SweepSection) -> Result<Sweep, CliError> {
    let variable = match section.variable.as_str() {
        "mu" => SweepVariable::Mu,
        "mu2" => SweepVariable::Mu2,
        other => {
            return Err(CliError::Config(format!(
                "sweep.variable: unknown variable {other:?} (expected \"mu\" or \"mu2\")"
            )))
        }
    };
    if !(section.step_us.is_finite() && section.step_us > 0.0) {
        return Err(CliError::Config(format!(
            "sweep.step_us must be positive, got {}",
            section.step_us
        )));
    }
    if section.start_us < 0.0 || section.stop_us < section.start_us {
        return Err(CliError::Config(format!(
            "sweep range [{}, {}] us is invalid",
            section.start_us, section.stop_us
        )));
    }
    Ok(Sweep {
        variable,
        start_s: section.start_us * US_TO_S,
        stop_s: section.stop_us * US_TO_S,
        step_s: section.step_us * US_TO_S,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[hamiltonian]
kind = "rabi"
delta_h_khz = 2.5

[distribution]
atoms_us = [2.0, 10.0]
weights = [0.8, 0.2]
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let exp = parse(MINIMAL).unwrap();
        assert_eq!(exp.m, 100);
        assert_eq!(exp.n_runs, 1000);
        assert_eq!(exp.seed, 42);
        assert_eq!(exp.bins, 10);
        assert_eq!(exp.format, OutputFormat::Csv);
        assert_eq!(exp.hamiltonian.dim(), 2);
        // 2.5 kHz -> 2 pi 2500 rad/s off-diagonal
        let c = exp.hamiltonian.matrix()[(0, 1)];
        assert!((c.re - 2.0 * std::f64::consts::PI * 2500.0).abs() < 1e-9);
        assert_eq!(exp.distribution.num_atoms(), 2);
        assert!((exp.distribution.atoms()[0].mu - 2.0e-6).abs() < 1e-18);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\n[run]\nm = 10\nbogus = 3\n");
        let err = parse(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let bad = MINIMAL.replace("delta_h_khz", "delta_h");
        let err = parse(&bad).unwrap_err();
        assert!(err.to_string().contains("delta_h"), "{err}");
    }

    #[test]
    fn rabi_requires_its_field_and_nothing_else() {
        let bad = MINIMAL.replace("delta_h_khz = 2.5", "");
        assert!(parse(&bad).is_err());
        // a units tag is only valid for kind = "matrix"
        let bad = MINIMAL.replace(
            "delta_h_khz = 2.5",
            "delta_h_khz = 2.5\nunits = \"khz\"",
        );
        let err = parse(&bad).unwrap_err();
        assert!(err.to_string().contains("rabi"), "{err}");
    }

    #[test]
    fn matrix_hamiltonian_with_units() {
        let text = r#"
[hamiltonian]
kind = "matrix"
units = "rad_per_s"
elements = [[[0.0, 0.0], [15707.963267948966, 0.0]], [[15707.963267948966, 0.0], [0.0, 0.0]]]

[initial_state]
kind = "basis"
index = 0

[distribution]
atoms_us = [2.0]
weights = [1.0]
"#;
        let exp = parse(text).unwrap();
        assert_eq!(exp.hamiltonian.dim(), 2);
        assert!(exp.distribution.is_single_atom());

        let missing_units = text.replace("units = \"rad_per_s\"\n", "");
        let err = parse(&missing_units).unwrap_err();
        assert!(err.to_string().contains("units"), "{err}");
    }

    #[test]
    fn non_hermitian_matrix_is_a_config_error() {
        let text = r#"
[hamiltonian]
kind = "matrix"
units = "rad_per_s"
elements = [[[0.0, 0.0], [1.0, 1.0]], [[1.0, 1.0], [0.0, 0.0]]]

[distribution]
atoms_us = [2.0]
weights = [1.0]
"#;
        let err = parse(text).unwrap_err();
        assert!(err.to_string().contains("Hermitian"), "{err}");
    }

    #[test]
    fn amplitude_initial_state_is_normalized() {
        let text = r#"
[hamiltonian]
kind = "rabi"
delta_h_khz = 2.5

[initial_state]
kind = "amplitudes"
amplitudes = [[1.0, 0.0], [1.0, 0.0]]

[distribution]
atoms_us = [2.0]
weights = [1.0]
"#;
        let exp = parse(text).unwrap();
        let a = exp.initial_state.amplitudes();
        assert!((a[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn sweep_section_is_validated() {
        let good = format!(
            "{MINIMAL}\n[sweep]\nvariable = \"mu2\"\nstart_us = 2.0\nstop_us = 25.0\nstep_us = 0.25\n"
        );
        let exp = parse(&good).unwrap();
        let sweep = exp.sweep.unwrap();
        assert_eq!(sweep.variable, SweepVariable::Mu2);
        let values = sweep.values();
        assert_eq!(values.len(), 93);
        assert!((values[0] - 2.0e-6).abs() < 1e-18);
        assert!((values.last().unwrap() - 25.0e-6).abs() < 1e-15);

        let bad = good.replace("step_us = 0.25", "step_us = 0.0");
        assert!(parse(&bad).is_err());
        let bad = good.replace("variable = \"mu2\"", "variable = \"time\"");
        assert!(parse(&bad).is_err());
    }

    #[test]
    fn run_bounds_are_checked() {
        let bad = format!("{MINIMAL}\n[run]\nm = 0\n");
        assert!(parse(&bad).is_err());
        let bad = format!("{MINIMAL}\n[run]\nn_runs = 0\n");
        assert!(parse(&bad).is_err());
    }
}
