//! Distribution of the sequence survival probability for bimodal waiting
//! times: the exact binomial law on the discrete support
//! `P = q1^k q2^(m-k)`, its Gaussian (Stirling) approximation, sample
//! histograms and the empirical rate function.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::intervals::IntervalDistribution;
use crate::quantum::{HermitianOperator, StateVector, SurvivalFunction};

/// Parameters of the survival-probability law for a two-atom distribution.
///
/// Requires `q1 != q2`: the count `k` of short-interval draws is recovered
/// from `P` by
/// `k(P) = (ln P - m ln q2) / (ln q1 - ln q2)`,
/// which degenerates when both atoms survive equally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodalLaw {
    q1: f64,
    q2: f64,
    p1: f64,
    m: usize,
    ln_q1: f64,
    ln_q2: f64,
}

impl BimodalLaw {
    pub fn new(q1: f64, q2: f64, p1: f64, m: usize) -> Result<Self> {
        for q in [q1, q2] {
            if !(q > 0.0 && q <= 1.0) {
                return Err(Error::InvalidSurvival(q));
            }
        }
        if !(0.0..=1.0).contains(&p1) || !p1.is_finite() {
            return Err(Error::InvalidProbability(p1));
        }
        if q1 == q2 {
            return Err(Error::DegenerateLaw(q1));
        }
        Ok(Self {
            q1,
            q2,
            p1,
            m,
            ln_q1: q1.ln(),
            ln_q2: q2.ln(),
        })
    }

    /// Law induced by a two-atom distribution under the given model, with
    /// `q_i = q(mu_i)` taken from the survival amplitude.
    pub fn from_model(
        hamiltonian: &HermitianOperator,
        psi0: &StateVector,
        dist: &IntervalDistribution,
        m: usize,
    ) -> Result<Self> {
        if dist.num_atoms() != 2 {
            return Err(Error::NotBimodal(dist.num_atoms()));
        }
        let f = SurvivalFunction::new(hamiltonian, psi0)?;
        let q1 = f.q(dist.atoms()[0].mu);
        let q2 = f.q(dist.atoms()[1].mu);
        Self::new(q1, q2, dist.atoms()[0].p, m)
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Inverts `P = q1^k q2^(m-k)` for the (real-valued) count `k`.
    pub fn k_of_p(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidSurvival(p));
        }
        Ok((p.ln() - self.m as f64 * self.ln_q2) / (self.ln_q1 - self.ln_q2))
    }

    /// Survival probability at a (possibly fractional) count `k`.
    pub fn p_of_k(&self, k: f64) -> f64 {
        (k * self.ln_q1 + (self.m as f64 - k) * self.ln_q2).exp()
    }

    /// Exact binomial weight `C(m, k) p1^k p2^(m-k)` via log-gamma.
    pub fn exact_prob_k(&self, k: usize) -> Result<f64> {
        if k > self.m {
            return Err(Error::KOutOfRange { k, m: self.m });
        }
        let (m, kf) = (self.m as f64, k as f64);
        // Degenerate weights put all mass on one endpoint.
        if self.p1 == 0.0 {
            return Ok(if k == 0 { 1.0 } else { 0.0 });
        }
        if self.p1 == 1.0 {
            return Ok(if k == self.m { 1.0 } else { 0.0 });
        }
        let ln_choose = ln_gamma(m + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(m - kf + 1.0);
        Ok((ln_choose + kf * self.p1.ln() + (m - kf) * self.p2().ln()).exp())
    }

    /// Gaussian (Stirling) approximation of `Prob(P)`, a density in `k`:
    /// `exp(-(k(P) - m p1)^2 / (2 m p1 p2)) / sqrt(2 pi m p1 p2)`.
    ///
    /// Its maximum sits at the geometric average `P = q1^(m p1) q2^(m p2)`.
    pub fn gaussian_prob_p(&self, p: f64) -> Result<f64> {
        let spread = self.m as f64 * self.p1 * self.p2();
        if spread <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        let k = self.k_of_p(p)?;
        let centered = k - self.m as f64 * self.p1;
        Ok((-centered * centered / (2.0 * spread)).exp()
            / (2.0 * std::f64::consts::PI * spread).sqrt())
    }

    /// Geometric average `q1^(m p1) q2^(m p2)`, the mode of the law.
    pub fn geometric_average(&self) -> f64 {
        (self.m as f64 * (self.p1 * self.ln_q1 + self.p2() * self.ln_q2)).exp()
    }

    /// The full discrete support: `(k, P(k), Prob(k))` for `k = 0..=m`.
    pub fn support(&self) -> Vec<LawPoint> {
        (0..=self.m)
            .map(|k| LawPoint {
                k,
                p: self.p_of_k(k as f64),
                prob: self.exact_prob_k(k).expect("k in range"),
            })
            .collect()
    }
}

/// One atom of the discrete survival-probability law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawPoint {
    pub k: usize,
    pub p: f64,
    pub prob: f64,
}

/// Histogram of survival-probability samples.
///
/// Default construction uses log-spaced bins from the smallest sample up to
/// 1, since `P` typically spans decades; if a sample is exactly zero the
/// bins fall back to linear over `[0, 1]`. Bins are half-open `[lo, hi)`
/// with the last bin closed.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalHistogram {
    edges: Vec<f64>,
    counts: Vec<u64>,
    n_samples: usize,
}

impl SurvivalHistogram {
    pub fn from_samples(samples: &[f64], bins: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::NoSamples);
        }
        if bins == 0 {
            return Err(Error::NoBins);
        }
        let mut min = f64::INFINITY;
        for &s in samples {
            if !(0.0..=1.0).contains(&s) || !s.is_finite() {
                return Err(Error::SampleOutOfRange(s));
            }
            min = min.min(s);
        }

        let edges = if min > 0.0 {
            // log-spaced; widen degenerate ranges where every sample is ~1
            let lo = if min < 1.0 { min } else { 1.0 - 1e-12 };
            let ln_lo = lo.ln();
            let mut edges: Vec<f64> = (0..=bins)
                .map(|i| (ln_lo * (1.0 - i as f64 / bins as f64)).exp())
                .collect();
            edges[0] = lo;
            edges[bins] = 1.0;
            edges
        } else {
            (0..=bins).map(|i| i as f64 / bins as f64).collect()
        };

        let mut counts = vec![0u64; bins];
        for &s in samples {
            counts[bin_index(&edges, s)] += 1;
        }
        Ok(Self {
            edges,
            counts,
            n_samples: samples.len(),
        })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn num_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self, index: usize) -> (f64, f64) {
        (self.edges[index], self.edges[index + 1])
    }

    pub fn relative_frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n_samples as f64)
            .collect()
    }

    /// Index of the bin holding `value`, if it lies within the edge range.
    pub fn bin_index_of(&self, value: f64) -> Option<usize> {
        let last = *self.edges.last().expect("edges nonempty");
        if value < self.edges[0] || value > last {
            return None;
        }
        Some(bin_index(&self.edges, value))
    }

    /// Most populated bin (first one on ties).
    pub fn mode_bin_index(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    /// Edge pair of the most populated bin.
    pub fn mode_bin(&self) -> (f64, f64) {
        self.bin_edges(self.mode_bin_index())
    }
}

fn bin_index(edges: &[f64], value: f64) -> usize {
    let bins = edges.len() - 1;
    match edges[1..bins].partition_point(|&e| e <= value) {
        i if i >= bins => bins - 1,
        i => i,
    }
}

/// Empirical rate function `J(P) = -ln(count / n) / m` per nonempty bin,
/// reported at the bin midpoint (geometric for log-spaced bins). Empty bins
/// are omitted so the output stays finite; the argmin over bins coincides
/// with the mode bin.
pub fn empirical_rate_function(hist: &SurvivalHistogram, m: usize) -> Vec<(f64, f64)> {
    let n = hist.n_samples() as f64;
    (0..hist.num_bins())
        .filter(|&i| hist.counts()[i] > 0)
        .map(|i| {
            let (lo, hi) = hist.bin_edges(i);
            let midpoint = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            let j = -(hist.counts()[i] as f64 / n).ln() / m as f64;
            (midpoint, j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA_H: f64 = 2.0 * std::f64::consts::PI * 2500.0;

    fn cosine_q(mu: f64) -> f64 {
        (DELTA_H * mu).cos().powi(2)
    }

    fn reference_law() -> BimodalLaw {
        BimodalLaw::new(cosine_q(2.0e-6), cosine_q(10.0e-6), 0.8, 100).unwrap()
    }

    #[test]
    fn k_inversion_hits_the_boundaries() {
        let law = reference_law();
        let m = law.m() as f64;
        let k_m = law.k_of_p(law.q1().powi(100)).unwrap();
        assert!((k_m - m).abs() < 1e-9);
        let k_0 = law.k_of_p(law.q2().powi(100)).unwrap();
        assert!(k_0.abs() < 1e-9);

        // interior point: the mode of the law at k = m p1
        let p_mode = law.p_of_k(80.0);
        assert!((law.k_of_p(p_mode).unwrap() - 80.0).abs() < 1e-9);
        // and agrees with the geometric average
        assert!((p_mode - law.geometric_average()).abs() < 1e-12);
    }

    #[test]
    fn k_of_p_is_monotone_in_ln_p() {
        let law = reference_law();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=100 {
            let p = law.p_of_k(k as f64);
            let back = law.k_of_p(p).unwrap();
            assert!(back > prev);
            prev = back;
        }
    }

    #[test]
    fn degenerate_law_is_rejected() {
        assert!(matches!(
            BimodalLaw::new(0.9, 0.9, 0.5, 10),
            Err(Error::DegenerateLaw(_))
        ));
        assert!(matches!(
            BimodalLaw::new(0.0, 0.9, 0.5, 10),
            Err(Error::InvalidSurvival(_))
        ));
    }

    #[test]
    fn from_model_requires_two_atoms() {
        let h = HermitianOperator::rabi(DELTA_H);
        let psi0 = StateVector::basis(2, 0).unwrap();
        let single = IntervalDistribution::single(2.0e-6).unwrap();
        assert!(matches!(
            BimodalLaw::from_model(&h, &psi0, &single, 10),
            Err(Error::NotBimodal(1))
        ));
        let dist = IntervalDistribution::bimodal(2.0e-6, 10.0e-6, 0.8).unwrap();
        let law = BimodalLaw::from_model(&h, &psi0, &dist, 100).unwrap();
        assert!((law.q1() - cosine_q(2.0e-6)).abs() < 1e-12);
        assert!((law.q2() - cosine_q(10.0e-6)).abs() < 1e-12);
    }

    #[test]
    fn binomial_weights_match_frozen_values_and_sum_to_one() {
        let law = reference_law();
        assert!((law.exact_prob_k(80).unwrap() - 0.09930021480881901).abs() < 1e-12);
        let total: f64 = (0..=100).map(|k| law.exact_prob_k(k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
        assert!(law.exact_prob_k(101).is_err());

        let m1 = BimodalLaw::new(0.9, 0.5, 0.35, 1).unwrap();
        assert!((m1.exact_prob_k(1).unwrap() - 0.35).abs() < 1e-15);
        let degenerate = BimodalLaw::new(0.9, 0.5, 1.0, 7).unwrap();
        assert_eq!(degenerate.exact_prob_k(7).unwrap(), 1.0);
        assert_eq!(degenerate.exact_prob_k(3).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_peak_and_one_sigma_point() {
        let law = reference_law();
        let peak = law.gaussian_prob_p(law.geometric_average()).unwrap();
        let expected_peak = 1.0 / (2.0 * std::f64::consts::PI * 16.0).sqrt();
        assert!((peak - expected_peak).abs() < 1e-12);
        assert!((peak - 0.09973557010035816).abs() < 1e-12);

        let sigma = (100.0f64 * 0.8 * 0.2).sqrt();
        for k in [80.0 + sigma, 80.0 - sigma] {
            let value = law.gaussian_prob_p(law.p_of_k(k)).unwrap();
            assert!((value - peak * (-0.5f64).exp()).abs() < 1e-12);
        }

        let degenerate = BimodalLaw::new(0.9, 0.5, 1.0, 7).unwrap();
        assert!(matches!(
            degenerate.gaussian_prob_p(0.5),
            Err(Error::DegenerateWeights)
        ));
    }

    #[test]
    fn gaussian_maximum_is_at_the_geometric_average() {
        let law = reference_law();
        let peak = law.gaussian_prob_p(law.geometric_average()).unwrap();
        for k in 0..=100 {
            let value = law.gaussian_prob_p(law.p_of_k(k as f64)).unwrap();
            assert!(value <= peak + 1e-15);
        }
    }

    #[test]
    fn mode_of_the_binomial_maps_near_the_geometric_average() {
        for p1 in [0.2, 0.5, 0.8] {
            let law = BimodalLaw::new(cosine_q(2.0e-6), cosine_q(10.0e-6), p1, 100).unwrap();
            let argmax = (0..=100)
                .max_by(|&a, &b| {
                    law.exact_prob_k(a)
                        .unwrap()
                        .partial_cmp(&law.exact_prob_k(b).unwrap())
                        .unwrap()
                })
                .unwrap();
            let k_geo = law.k_of_p(law.geometric_average()).unwrap();
            assert!(
                (argmax as f64 - k_geo).abs() <= 1.0,
                "p1 = {p1}: argmax {argmax} vs k(P_g) {k_geo}"
            );
        }
    }

    #[test]
    fn law_mean_reproduces_the_ensemble_average() {
        let law = reference_law();
        let mean: f64 = law.support().iter().map(|pt| pt.prob * pt.p).sum();
        let mixture = 0.8 * law.q1() + 0.2 * law.q2();
        let ensemble = (100.0 * mixture.ln()).exp();
        assert!((mean - ensemble).abs() < 1e-10);
    }

    #[test]
    fn histogram_counts_and_mode() {
        let samples = vec![0.5, 0.5, 0.5, 0.9, 0.2];
        let hist = SurvivalHistogram::from_samples(&samples, 4).unwrap();
        assert_eq!(hist.counts().iter().sum::<u64>(), 5);
        assert_eq!(hist.n_samples(), 5);
        let (lo, hi) = hist.mode_bin();
        assert!(lo <= 0.5 && 0.5 <= hi);
        assert_eq!(hist.edges().first().copied(), Some(0.2));
        assert_eq!(hist.edges().last().copied(), Some(1.0));
        // edges strictly increasing within [0, 1]
        for w in hist.edges().windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn histogram_handles_degenerate_inputs() {
        // all samples identical
        let hist = SurvivalHistogram::from_samples(&[0.7; 10], 3).unwrap();
        assert_eq!(hist.counts().iter().sum::<u64>(), 10);
        assert_eq!(hist.bin_index_of(0.7), Some(0));
        // all samples at 1
        let hist = SurvivalHistogram::from_samples(&[1.0; 4], 3).unwrap();
        assert_eq!(hist.counts()[2], 4);
        // a zero sample forces linear bins over [0, 1]
        let hist = SurvivalHistogram::from_samples(&[0.0, 0.25, 0.8], 4).unwrap();
        assert_eq!(hist.edges()[0], 0.0);
        assert_eq!(hist.counts().iter().sum::<u64>(), 3);
        // errors
        assert!(matches!(
            SurvivalHistogram::from_samples(&[], 4),
            Err(Error::NoSamples)
        ));
        assert!(matches!(
            SurvivalHistogram::from_samples(&[0.5], 0),
            Err(Error::NoBins)
        ));
        assert!(matches!(
            SurvivalHistogram::from_samples(&[1.5], 2),
            Err(Error::SampleOutOfRange(_))
        ));
    }

    #[test]
    fn rate_function_trivial_cases() {
        // all samples in one bin -> single pair with J = 0
        let hist = SurvivalHistogram::from_samples(&[0.5; 8], 1).unwrap();
        let rate = empirical_rate_function(&hist, 100);
        assert_eq!(rate.len(), 1);
        assert_eq!(rate[0].1, 0.0);

        // uniform two-bin split -> both J = -ln(1/2) / m
        let samples = vec![0.1, 0.1, 0.9, 0.9];
        let hist = SurvivalHistogram::from_samples(&samples, 2).unwrap();
        let rate = empirical_rate_function(&hist, 50);
        assert_eq!(rate.len(), 2);
        let expected = -(0.5f64).ln() / 50.0;
        for &(_, j) in &rate {
            assert!((j - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn rate_function_argmin_is_the_mode_bin() {
        let law = reference_law();
        // deterministic pseudo-samples from the law's own support
        let mut samples = Vec::new();
        for pt in law.support() {
            let copies = (pt.prob * 1000.0).round() as usize;
            samples.extend(std::iter::repeat_n(pt.p, copies));
        }
        let hist = SurvivalHistogram::from_samples(&samples, 10).unwrap();
        let rate = empirical_rate_function(&hist, law.m());
        let argmin = rate
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        let (lo, hi) = hist.mode_bin();
        assert!(lo <= argmin && argmin <= hi);
        // empty bins are omitted
        assert!(rate.len() <= hist.num_bins());
    }
}
