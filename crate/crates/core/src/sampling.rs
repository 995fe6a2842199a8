//! Finite-sample emulation of the experiment.
//!
//! Each shot is one categorical draw over the `2(2l+1)` joint outcomes
//! `(±1/2, m)`. Random streams come from ChaCha8 seeded through SplitMix64,
//! so every repeat has its own seed derived from `(master_seed, index)` and
//! results do not depend on evaluation order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{run_protocol, script_c_from_distribution, OutcomeDistribution, ProtocolConfig};

pub const DEFAULT_REPEATS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n_s: usize,
    pub n_repeats: usize,
    pub master_seed: u64,
}

impl SampleConfig {
    pub fn new(n_s: usize, master_seed: u64) -> Self {
        SampleConfig { n_s, n_repeats: DEFAULT_REPEATS, master_seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_s == 0 {
            return Err(Error::InvalidConfig("sample size must be at least 1".into()));
        }
        if self.n_repeats < 2 {
            return Err(Error::InvalidConfig(format!(
                "a standard deviation needs at least 2 repeats, got {}",
                self.n_repeats
            )));
        }
        Ok(())
    }

    /// The same sampling plan with the master seed replaced by a derived one.
    pub fn for_stream(&self, index: u64) -> Self {
        SampleConfig { master_seed: derive_seed(self.master_seed, index), ..*self }
    }
}

/// SplitMix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Outcome counts of `n_s` shots, laid out like [`OutcomeDistribution::joint`].
pub fn sample_counts(dist: &OutcomeDistribution, n_s: usize, seed: u64) -> Result<Vec<u64>> {
    let joint = dist.joint();
    let sampler = WeightedIndex::new(&joint)
        .map_err(|e| Error::ContractViolation(format!("outcome weights are not a distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; joint.len()];
    for _ in 0..n_s {
        counts[sampler.sample(&mut rng)] += 1;
    }
    Ok(counts)
}

/// Relative frequencies of `n_s` shots drawn from `dist`.
pub fn sample_outcomes(dist: &OutcomeDistribution, n_s: usize, seed: u64) -> Result<OutcomeDistribution> {
    if n_s == 0 {
        return Err(Error::InvalidConfig("sample size must be at least 1".into()));
    }
    let counts = sample_counts(dist, n_s, seed)?;
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    OutcomeDistribution::from_joint(dist.l, &weights)
}

pub fn estimate_script_c(empirical: &OutcomeDistribution) -> f64 {
    script_c_from_distribution(empirical)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub mean_c: f64,
    pub std_c: f64,
    pub per_repeat: Vec<f64>,
}

impl ErrorEstimate {
    /// Mean and sample standard deviation (`n − 1` denominator).
    pub fn from_values(per_repeat: Vec<f64>) -> Result<Self> {
        let (mean_c, std_c) = mean_std(&per_repeat)?;
        Ok(ErrorEstimate { mean_c, std_c, per_repeat })
    }
}

pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::InvalidConfig("a standard deviation needs at least 2 values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// `𝒞` estimated from each of `n_repeats` independent samples of `dist`.
pub fn repeated_estimates(dist: &OutcomeDistribution, cfg: &SampleConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    (0..cfg.n_repeats as u64)
        .map(|r| Ok(estimate_script_c(&sample_outcomes(dist, cfg.n_s, derive_seed(cfg.master_seed, r))?)))
        .collect()
}

pub fn error_bars_for(dist: &OutcomeDistribution, cfg: &SampleConfig) -> Result<ErrorEstimate> {
    ErrorEstimate::from_values(repeated_estimates(dist, cfg)?)
}

pub fn error_bars(config: &ProtocolConfig, cfg: &SampleConfig) -> Result<ErrorEstimate> {
    cfg.validate()?;
    error_bars_for(&run_protocol(config)?, cfg)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidConfig("log-log fit needs at least 2 strictly positive points".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("log-log fit needs distinct abscissae".into()));
    }
    Ok(logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Standard deviation of `𝒞` for each sample size.
pub fn std_by_sample_size(
    dist: &OutcomeDistribution,
    n_s_list: &[usize],
    cfg: &SampleConfig,
) -> Result<Vec<(usize, f64)>> {
    n_s_list
        .iter()
        .enumerate()
        .map(|(k, &n_s)| {
            let point = SampleConfig { n_s, ..cfg.for_stream(k as u64) };
            Ok((n_s, error_bars_for(dist, &point)?.std_c))
        })
        .collect()
}

/// Slope of `log std(𝒞)` against `log n_s`; −1/2 for shot-noise-limited estimates.
pub fn scaling_exponent(config: &ProtocolConfig, n_s_list: &[usize], cfg: &SampleConfig) -> Result<f64> {
    let min = n_s_list.iter().copied().min().unwrap_or(0);
    let max = n_s_list.iter().copied().max().unwrap_or(0);
    let mut distinct = n_s_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || min == 0 || max < 10 * min {
        return Err(Error::InvalidConfig("scaling fit needs at least 3 sample sizes spanning a decade".into()));
    }
    let dist = run_protocol(config)?;
    let stds = std_by_sample_size(&dist, n_s_list, cfg)?;
    log_log_slope(&stds.iter().map(|&(n, s)| (n as f64, s)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::half_int::HalfInt;
    use crate::model::{heisenberg_system, uniform_state};
    use crate::protocol::CouplingKind;
    use crate::spin::Hamiltonian;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn benchmark(l: HalfInt, t2: f64) -> ProtocolConfig {
        ProtocolConfig {
            hamiltonian: Arc::new(Hamiltonian::new(heisenberg_system(l).unwrap()).unwrap()),
            initial_state: uniform_state(l).unwrap(),
            site_i: 0,
            site_j: 1,
            t1: 0.0,
            t2,
            lambda: std::f64::consts::PI / l.value(),
            coupling: CouplingKind::Heisenberg,
        }
    }

    fn point_mass(l: HalfInt) -> OutcomeDistribution {
        let d = l.dim();
        let mut plus = vec![0.0; d];
        plus[d - 1] = 1.0;
        OutcomeDistribution {
            l,
            p_plus: 1.0,
            p_minus: 0.0,
            p_m_given_plus: plus,
            p_m_given_minus: vec![1.0 / d as f64; d],
            plus_used: true,
            minus_used: false,
        }
    }

    #[test]
    fn point_mass_is_recovered() {
        let l = HalfInt::from_int(3);
        let dist = point_mass(l);
        for n_s in [1, 7, 1000] {
            let emp = sample_outcomes(&dist, n_s, 42).unwrap();
            assert_eq!(emp.p_plus, 1.0);
            assert_eq!(emp.p_m_given_plus, dist.p_m_given_plus);
            assert_eq!(estimate_script_c(&emp), 3.0);
        }
    }

    #[test]
    fn large_samples_converge() {
        let dist = run_protocol(&benchmark(HalfInt::from_int(2), 0.7)).unwrap();
        let emp = sample_outcomes(&dist, 1_000_000, 7).unwrap();
        assert!(dist.total_variation(&emp) < 0.01);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let dist = run_protocol(&benchmark(HalfInt::ONE, 0.3)).unwrap();
        let a = sample_outcomes(&dist, 500, 99).unwrap();
        let b = sample_outcomes(&dist, 500, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_outcomes(&dist, 500, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn huge_samples_have_tiny_spread() {
        let config = benchmark(HalfInt::from_int(2), 0.5);
        let exact = script_c_from_distribution(&run_protocol(&config).unwrap());
        let est = error_bars(&config, &SampleConfig { n_s: 1_000_000, n_repeats: 4, master_seed: 1 }).unwrap();
        assert!(est.std_c < 5e-3);
        assert!((est.mean_c - exact).abs() <= 3.0 * est.std_c.max(1e-4));
    }

    #[test]
    fn seeds_agree_statistically() {
        let config = benchmark(HalfInt::from_int(2), 0.5);
        let a = error_bars(&config, &SampleConfig { n_s: 200, n_repeats: 100, master_seed: 1 }).unwrap();
        let b = error_bars(&config, &SampleConfig { n_s: 200, n_repeats: 100, master_seed: 2 }).unwrap();
        let tol = 3.0 * (a.std_c + b.std_c) / (100f64).sqrt() * 1.5;
        assert!((a.mean_c - b.mean_c).abs() <= tol);
    }

    #[test]
    fn repeats_validation() {
        let config = benchmark(HalfInt::ONE, 0.5);
        let bad = SampleConfig { n_s: 10, n_repeats: 1, master_seed: 0 };
        assert!(matches!(error_bars(&config, &bad), Err(Error::InvalidConfig(_))));
        let bad = SampleConfig { n_s: 0, n_repeats: 10, master_seed: 0 };
        assert!(matches!(error_bars(&config, &bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn binomial_proxy_scaling() {
        // Fair coin between (+, m = 1/2) and (−, m = 1/2): 𝒞 = (n₊ − n₋)/(2 n_s),
        // whose standard deviation is exactly 1/(2√n_s).
        let l = HalfInt::HALF;
        let dist = OutcomeDistribution {
            l,
            p_plus: 0.5,
            p_minus: 0.5,
            p_m_given_plus: vec![0.0, 1.0],
            p_m_given_minus: vec![0.0, 1.0],
            plus_used: true,
            minus_used: true,
        };
        let cfg = SampleConfig { n_s: 1, n_repeats: 400, master_seed: 5 };
        let stds = std_by_sample_size(&dist, &[100, 1000, 10_000, 100_000], &cfg).unwrap();
        for &(n, s) in &stds {
            assert!((s * 2.0 * (n as f64).sqrt() - 1.0).abs() < 0.15, "n = {n}: {s}");
        }
        let slope = log_log_slope(&stds.iter().map(|&(n, s)| (n as f64, s)).collect::<Vec<_>>()).unwrap();
        assert!((slope + 0.5).abs() <= 0.05, "{slope}");
    }

    #[test]
    fn flat_std_gives_zero_slope() {
        let slope = log_log_slope(&[(100.0, 0.3), (1000.0, 0.3), (10000.0, 0.3)]).unwrap();
        assert_eq!(slope, 0.0);
        assert!(log_log_slope(&[(100.0, 0.0), (1000.0, 0.3)]).is_err());
    }

    #[test]
    fn scaling_exponent_preconditions() {
        let config = benchmark(HalfInt::ONE, 0.5);
        let cfg = SampleConfig::new(1, 3);
        assert!(scaling_exponent(&config, &[100, 200, 300], &cfg).is_err());
        assert!(scaling_exponent(&config, &[100, 1000], &cfg).is_err());
    }

    #[test]
    fn mean_std_reference() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(m, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s, (5.0f64 / 3.0).sqrt(), epsilon = 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn empirical_estimates_are_bounded(seed in any::<u64>(), n_s in 1usize..400, t2 in 0.0f64..3.0) {
            let l = HalfInt::from_twice(3);
            let dist = run_protocol(&benchmark(l, t2)).unwrap();
            let emp = sample_outcomes(&dist, n_s, seed).unwrap();
            prop_assert!(emp.completeness_deviation() < 1e-12);
            prop_assert!(estimate_script_c(&emp).abs() <= l.value() + 1e-12);
        }

        #[test]
        fn error_estimate_mean_within_range(seed in any::<u64>()) {
            let dist = run_protocol(&benchmark(HalfInt::ONE, 0.4)).unwrap();
            let est = error_bars_for(&dist, &SampleConfig { n_s: 50, n_repeats: 10, master_seed: seed }).unwrap();
            let lo = est.per_repeat.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = est.per_repeat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(est.std_c >= 0.0 && lo - 1e-12 <= est.mean_c && est.mean_c <= hi + 1e-12);
        }
    }
}
