//! The four experiment commands: decay curves, average-scaling sweeps,
//! ensemble histograms with theoretical overlays, and one-shot analysis
//! reports.

use std::path::{Path, PathBuf};

use serde_json::json;

use zeno_core::{
    arithmetic_average, config_fingerprint, delta_q_fourth_order, ensemble_average,
    geometric_average, hamiltonian_moments, run_ensemble, survival_statistics, zeno_parameter,
    BimodalLaw, Error as CoreError, IntervalDistribution, SurvivalFunction, ZenoRegime,
    ZenoThresholds,
};

use crate::config::{Experiment, OutputFormat, Sweep, SweepVariable};
use crate::output::{fmt, write_json, CsvWriter, Timestamp};
use crate::CliError;

const SCHEMA_VERSION: u32 = 1;

pub struct Context {
    pub experiment: Experiment,
    pub out_dir: PathBuf,
    pub timestamp: Timestamp,
}

impl Context {
    fn out_path(&self, stem: &str, format: OutputFormat) -> PathBuf {
        self.out_dir.join(format!("{stem}.{}", format.as_str()))
    }

    fn format(&self) -> OutputFormat {
        self.experiment.format
    }
}

/// Default sweep ranges when the config omits `[sweep]`: decay scans the
/// periodic interval from 0, scaling scans the second atom from the first
/// atom's value; both stop at 25 us in 0.25 us steps.
fn default_sweep(experiment: &Experiment, variable: SweepVariable) -> Sweep {
    let start_s = match variable {
        SweepVariable::Mu => 0.0,
        SweepVariable::Mu2 => experiment.distribution.atoms()[0].mu,
    };
    Sweep {
        variable,
        start_s,
        stop_s: 25.0e-6,
        step_s: 0.25e-6,
    }
}

fn resolve_sweep(
    experiment: &Experiment,
    wanted: SweepVariable,
    command: &str,
) -> Result<Sweep, CliError> {
    match experiment.sweep {
        Some(sweep) if sweep.variable == wanted => Ok(sweep),
        Some(_) => Err(CliError::Config(format!(
            "sweep.variable must be \"{}\" for the {command} command",
            match wanted {
                SweepVariable::Mu => "mu",
                SweepVariable::Mu2 => "mu2",
            }
        ))),
        None => Ok(default_sweep(experiment, wanted)),
    }
}

/// Decay of the survival probability under periodic measurements:
/// one row `(mu_us, q, P = q^m)` per grid point.
pub fn cmd_decay(ctx: &Context) -> Result<PathBuf, CliError> {
    let exp = &ctx.experiment;
    let sweep = resolve_sweep(exp, SweepVariable::Mu, "decay")?;
    let f = SurvivalFunction::new(&exp.hamiltonian, &exp.initial_state)
        .map_err(CliError::from_core)?;
    let m = exp.m as f64;

    let rows: Vec<(f64, f64, f64)> = sweep
        .values()
        .iter()
        .map(|&mu| {
            let q = f.q(mu);
            (mu / 1.0e-6, q, (m * q.ln()).exp())
        })
        .collect();

    match ctx.format() {
        OutputFormat::Csv => {
            let path = ctx.out_path("decay", OutputFormat::Csv);
            let mut csv = CsvWriter::create(&path, ctx.timestamp)?;
            csv.header(&["mu_us", "q", "P"])?;
            for (mu_us, q, p) in rows {
                csv.row(&[fmt(mu_us), fmt(q), fmt(p)])?;
            }
            csv.finish()
        }
        OutputFormat::Json => {
            let path = ctx.out_path("decay", OutputFormat::Json);
            let body = json!({
                "schema_version": SCHEMA_VERSION,
                "generated_at": ctx.timestamp.rfc3339(),
                "m": exp.m,
                "rows": rows.iter().map(|(mu_us, q, p)| json!({
                    "mu_us": mu_us, "q": q, "P": p,
                })).collect::<Vec<_>>(),
            });
            write_json(&path, &body)
        }
    }
}

/// Scaling of the averages with the second interval of a bimodal
/// distribution: rows `(mu2_us, P_g, P_a, P_ensemble, D, zeno_parameter)`.
///
/// Each row rebuilds the distribution as `(mu1, p1), (mu2, 1 - p1)` where
/// `mu1` and `p1` come from the first (smallest) configured atom. A
/// degenerate weight `p1 = 1` therefore gives curves constant in `mu2`.
pub fn cmd_sweep(ctx: &Context) -> Result<PathBuf, CliError> {
    let exp = &ctx.experiment;
    let sweep = resolve_sweep(exp, SweepVariable::Mu2, "sweep")?;
    if exp.distribution.num_atoms() > 2 {
        return Err(CliError::Config(format!(
            "the sweep command needs a bimodal distribution, got {} atoms",
            exp.distribution.num_atoms()
        )));
    }
    let mu1 = exp.distribution.atoms()[0].mu;
    let p1 = exp.distribution.atoms()[0].p;

    struct Row {
        mu2_us: f64,
        geometric: f64,
        arithmetic: f64,
        ensemble: f64,
        discrepancy: f64,
        zeno: f64,
    }

    let mut rows = Vec::new();
    for &mu2 in &sweep.values() {
        let dist = IntervalDistribution::bimodal(mu1, mu2, p1)
            .map_err(CliError::from_core)?;
        let geometric = geometric_average(&dist, &exp.hamiltonian, &exp.initial_state, exp.m)
            .map_err(CliError::from_core)?;
        let arithmetic = arithmetic_average(&dist, &exp.hamiltonian, &exp.initial_state, exp.m)
            .map_err(CliError::from_core)?;
        let ensemble = ensemble_average(&dist, &exp.hamiltonian, &exp.initial_state, exp.m)
            .map_err(CliError::from_core)?;
        let zeno = zeno_parameter(&dist, &exp.hamiltonian, &exp.initial_state, exp.m)
            .map_err(CliError::from_core)?;
        rows.push(Row {
            mu2_us: mu2 / 1.0e-6,
            geometric,
            arithmetic,
            ensemble,
            discrepancy: if arithmetic > 0.0 {
                (arithmetic - geometric) / arithmetic
            } else {
                f64::NAN
            },
            zeno,
        });
    }

    match ctx.format() {
        OutputFormat::Csv => {
            let path = ctx.out_path("sweep", OutputFormat::Csv);
            let mut csv = CsvWriter::create(&path, ctx.timestamp)?;
            csv.header(&["mu2_us", "P_g", "P_a", "P_ensemble", "D", "zeno_parameter"])?;
            for r in rows {
                csv.row(&[
                    fmt(r.mu2_us),
                    fmt(r.geometric),
                    fmt(r.arithmetic),
                    fmt(r.ensemble),
                    fmt(r.discrepancy),
                    fmt(r.zeno),
                ])?;
            }
            csv.finish()
        }
        OutputFormat::Json => {
            let path = ctx.out_path("sweep", OutputFormat::Json);
            let body = json!({
                "schema_version": SCHEMA_VERSION,
                "generated_at": ctx.timestamp.rfc3339(),
                "m": exp.m,
                "rows": rows.iter().map(|r| json!({
                    "mu2_us": r.mu2_us,
                    "P_g": r.geometric,
                    "P_a": r.arithmetic,
                    "P_ensemble": r.ensemble,
                    "D": r.discrepancy,
                    "zeno_parameter": r.zeno,
                })).collect::<Vec<_>>(),
            });
            write_json(&path, &body)
        }
    }
}

pub struct HistogramFiles {
    pub histogram: PathBuf,
    /// Absent when the distribution is a single atom (no two-point law).
    pub overlay: Option<PathBuf>,
}

/// Monte Carlo histogram of `P` plus, for a genuine two-atom distribution,
/// the exact binomial law and its Gaussian approximation on the same
/// support. The three analytic averages ride along as metadata markers.
pub fn cmd_histogram(ctx: &Context) -> Result<HistogramFiles, CliError> {
    let exp = &ctx.experiment;
    let stats = survival_statistics(&exp.distribution, &exp.hamiltonian, &exp.initial_state, exp.m)
        .map_err(CliError::from_core)?;
    let ensemble = run_ensemble(
        &exp.hamiltonian,
        &exp.initial_state,
        &exp.distribution,
        exp.m,
        exp.n_runs,
        exp.seed,
        exp.bins,
    )
    .map_err(CliError::from_core)?;

    // Two distinct atoms with equal survival probabilities cannot be
    // inverted to a count k; report that as numerical degeneracy. A single
    // atom simply has no overlay.
    let law = match BimodalLaw::from_model(&exp.hamiltonian, &exp.initial_state, &exp.distribution, exp.m)
    {
        Ok(law) => Some(law),
        Err(CoreError::NotBimodal(_)) => None,
        Err(e @ CoreError::DegenerateLaw(_)) => {
            return Err(CliError::Degenerate(e.to_string()))
        }
        Err(e) => return Err(CliError::from_core(e)),
    };

    match ctx.format() {
        OutputFormat::Csv => {
            let hist_path = ctx.out_path("histogram", OutputFormat::Csv);
            let mut csv = CsvWriter::create(&hist_path, ctx.timestamp)?;
            csv.comment(&format!("P_g = {}", fmt(stats.geometric)))?;
            csv.comment(&format!("P_a = {}", fmt(stats.arithmetic)))?;
            csv.comment(&format!("P_ensemble = {}", fmt(stats.ensemble)))?;
            csv.comment(&format!("sample_mean = {}", fmt(ensemble.sample_mean)))?;
            csv.comment(&format!(
                "mode_bin = [{}, {}]",
                fmt(ensemble.sample_mode_bin.0),
                fmt(ensemble.sample_mode_bin.1)
            ))?;
            csv.comment(&format!("fingerprint = {}", ensemble.config_fingerprint))?;
            csv.header(&["bin_lo", "bin_hi", "count", "relative_frequency"])?;
            let frequencies = ensemble.histogram.relative_frequencies();
            for (i, &frequency) in frequencies.iter().enumerate() {
                let (lo, hi) = ensemble.histogram.bin_edges(i);
                csv.row(&[
                    fmt(lo),
                    fmt(hi),
                    ensemble.histogram.counts()[i].to_string(),
                    fmt(frequency),
                ])?;
            }
            let hist_path = csv.finish()?;

            let overlay = match &law {
                Some(law) => {
                    let overlay_path = ctx.out_path("overlay", OutputFormat::Csv);
                    let mut csv = CsvWriter::create(&overlay_path, ctx.timestamp)?;
                    csv.comment(&format!("q1 = {}", fmt(law.q1())))?;
                    csv.comment(&format!("q2 = {}", fmt(law.q2())))?;
                    csv.header(&["k", "P", "prob_exact", "gaussian_density"])?;
                    for point in law.support() {
                        let gaussian = law
                            .gaussian_prob_p(point.p)
                            .map_err(CliError::from_core)?;
                        csv.row(&[
                            point.k.to_string(),
                            fmt(point.p),
                            fmt(point.prob),
                            fmt(gaussian),
                        ])?;
                    }
                    Some(csv.finish()?)
                }
                None => None,
            };
            Ok(HistogramFiles {
                histogram: hist_path,
                overlay,
            })
        }
        OutputFormat::Json => {
            let path = ctx.out_path("histogram", OutputFormat::Json);
            let overlay = law.map(|law| {
                law.support()
                    .iter()
                    .map(|point| {
                        json!({
                            "k": point.k,
                            "P": point.p,
                            "prob_exact": point.prob,
                            "gaussian_density": law.gaussian_prob_p(point.p).ok(),
                        })
                    })
                    .collect::<Vec<_>>()
            });
            let frequencies = ensemble.histogram.relative_frequencies();
            let body = json!({
                "schema_version": SCHEMA_VERSION,
                "generated_at": ctx.timestamp.rfc3339(),
                "markers": {
                    "P_g": stats.geometric,
                    "P_a": stats.arithmetic,
                    "P_ensemble": stats.ensemble,
                },
                "sample_mean": ensemble.sample_mean,
                "mode_bin": [ensemble.sample_mode_bin.0, ensemble.sample_mode_bin.1],
                "fingerprint": ensemble.config_fingerprint,
                "edges": ensemble.histogram.edges(),
                "counts": ensemble.histogram.counts(),
                "relative_frequencies": frequencies,
                "overlay": overlay,
            });
            let path = write_json(&path, &body)?;
            Ok(HistogramFiles {
                histogram: path,
                overlay: None,
            })
        }
    }
}

/// Machine-readable report of every closed-form statistic for one
/// configuration, including the Zeno classification and both the exact and
/// fourth-order `Delta q`.
pub fn cmd_analyze(ctx: &Context) -> Result<PathBuf, CliError> {
    let exp = &ctx.experiment;
    let stats = survival_statistics(&exp.distribution, &exp.hamiltonian, &exp.initial_state, exp.m)
        .map_err(CliError::from_core)?;
    let moments = hamiltonian_moments(&exp.hamiltonian, &exp.initial_state)
        .map_err(CliError::from_core)?;
    let thresholds = ZenoThresholds::default();
    let regime = ZenoRegime::classify(stats.zeno_parameter, &thresholds);
    let dq4 = delta_q_fourth_order(&moments, &exp.distribution, exp.m);
    let fingerprint = config_fingerprint(
        &exp.hamiltonian,
        &exp.initial_state,
        &exp.distribution,
        exp.m,
        exp.n_runs,
        exp.seed,
    );

    let body = json!({
        "schema_version": SCHEMA_VERSION,
        "generated_at": ctx.timestamp.rfc3339(),
        "config_fingerprint": fingerprint,
        "rng": zeno_core::RNG_ID,
        "m": exp.m,
        "n_runs": exp.n_runs,
        "seed": exp.seed,
        "hamiltonian_moments": {
            "mean_rad_per_s": moments.mean,
            "variance_rad2_per_s2": moments.variance,
            "kurtosis_rad4_per_s4": moments.kurtosis,
        },
        "interval_moments": {
            "mean_s": exp.distribution.mean(),
            "nu2_s2": exp.distribution.nu2(),
            "nu4_s4": exp.distribution.nu4(),
        },
        "averages": {
            "geometric": stats.geometric,
            "arithmetic": stats.arithmetic,
            "ensemble": stats.ensemble,
        },
        "zeno_parameter": stats.zeno_parameter,
        "delta_q_exact": stats.delta_q,
        "delta_q_fourth_order": dq4,
        "discrepancy": stats.discrepancy,
        "zeno_classification": regime.as_str(),
        "zeno_thresholds": {
            "strict": thresholds.strict,
            "loose": thresholds.loose,
        },
    });
    write_json(&ctx.out_path("analyze", OutputFormat::Json), &body)
}

/// Reads rows back from a CSV table, skipping comments and the header.
pub fn read_csv_rows(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .filter(|line| !line.starts_with('#') && !line.is_empty())
        .skip(1)
        .map(|line| line.split(',').map(str::to_owned).collect())
        .collect())
}
