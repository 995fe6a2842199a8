//! Parameter sweeps over `t2` on the two-spin Heisenberg benchmark.
//!
//! All correlation columns are normalized by `l²`; `𝒞` columns are raw.
//! Sampling streams are derived from `(master_seed, grid index, λ index)`,
//! so a sweep is a pure function of its [`ExperimentSpec`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupled::{gamma_coefficients, slow_variation_metric, VariationRange};
use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::model::{with_ancilla, HamiltonianKind, InitialState, ModelSpec};
use crate::oracle::{exact_two_time, systematic_deviation, DeviationReport};
use crate::protocol::{
    effective_l, extract_correlation, lambda_for, run_protocol, script_c_from_distribution, CouplingKind,
    ExtractionMethod, OutcomeDistribution, ProtocolConfig,
};
use crate::sampling::{mean_std, repeated_estimates, SampleConfig};
use crate::spin::{Hamiltonian, StateVector};

/// Inclusive arithmetic grid `start, start + step, …, ≤ stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let grid = Grid { start, stop, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidConfig("grid bounds must be finite".into()));
        }
        if self.step <= 0.0 || self.stop < self.start {
            return Err(Error::InvalidConfig(format!("grid {self} needs step > 0 and stop >= start")));
        }
        if self.len() > 1_000_000 {
            return Err(Error::InvalidConfig(format!("grid {self} has too many points")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Points computed as `start + k·step` so that no rounding accumulates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl std::fmt::Display for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::InvalidConfig(format!("grid '{s}' is not start:stop:step")));
        };
        let num = |x: &str| {
            x.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("'{x}' in grid '{s}' is not a number")))
        };
        Grid::new(num(start)?, num(stop)?, num(step)?)
    }
}

/// Everything needed to reproduce one sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub l: HalfInt,
    pub state: InitialState,
    pub coupling: CouplingKind,
    /// System Hamiltonian on the two spin-`l` sites.
    pub hamiltonian: HamiltonianKind,
    pub site_i: usize,
    pub site_j: usize,
    pub t1: f64,
    pub t2_grid: Grid,
    /// Dimensionless couplings `λL`, with `L` the extraction scale.
    pub lambda_l: Vec<f64>,
    pub method: ExtractionMethod,
    pub refined_l: bool,
}

impl ExperimentSpec {
    pub fn benchmark(l: HalfInt, state: InitialState) -> Self {
        ExperimentSpec {
            l,
            state,
            coupling: CouplingKind::Heisenberg,
            hamiltonian: HamiltonianKind::HeisenbergTwoSpin,
            site_i: 0,
            site_j: 1,
            t1: 0.0,
            t2_grid: Grid { start: 0.0, stop: 3.0, step: 0.05 },
            lambda_l: vec![FRAC_PI_2, PI],
            method: ExtractionMethod::TwoPoint,
            refined_l: true,
        }
    }

    /// Couplings `λ` corresponding to [`lambda_l`](Self::lambda_l).
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda_l.iter().map(|&x| lambda_for(self.l, x, self.refined_l)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        HalfInt::spin(self.l.twice())?;
        if self.l == HalfInt::ZERO {
            return Err(Error::InvalidConfig("l must be positive".into()));
        }
        self.t2_grid.validate()?;
        if !self.t1.is_finite() {
            return Err(Error::InvalidConfig("t1 must be finite".into()));
        }
        if self.lambda_l.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("lambda-l values must be finite".into()));
        }
        if self.site_i > 1 || self.site_j > 1 {
            return Err(Error::InvalidConfig("sites must be 0 or 1 on the two-spin benchmark".into()));
        }
        Ok(())
    }

    fn require_protocol_grid(&self) -> Result<()> {
        if self.t2_grid.start < self.t1 {
            return Err(Error::InvalidConfig(format!(
                "t2 grid starts at {} before t1 = {}",
                self.t2_grid.start, self.t1
            )));
        }
        if self.lambda_l.is_empty() {
            return Err(Error::MissingLambda("no lambda-l values given".into()));
        }
        Ok(())
    }
}

/// A prepared sweep: Hamiltonian spectrum and initial state built once.
#[derive(Clone, Debug)]
pub struct Experiment {
    spec: ExperimentSpec,
    hamiltonian: Arc<Hamiltonian>,
    initial: StateVector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub t2: f64,
    pub re_c: f64,
    pub im_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRow {
    pub t2: f64,
    /// `𝒞(λ)` in the order of the spec's `lambda_l`.
    pub script_c: Vec<f64>,
    pub re_c: f64,
    pub im_c: f64,
    pub exact_re_c: f64,
    pub exact_im_c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub t2: f64,
    pub mean_script_c: Vec<f64>,
    pub std_script_c: Vec<f64>,
    pub re_c_mean: f64,
    pub re_c_std: f64,
    pub im_c_mean: f64,
    pub im_c_std: f64,
    /// Estimate from the exact outcome distribution (infinite sample).
    pub re_c_limit: f64,
    pub exact_re_c: f64,
    pub exact_im_c: f64,
}

impl SampleRow {
    /// `|exact − infinite-sample estimate|` for `Re C`.
    pub fn systematic(&self) -> f64 {
        (self.exact_re_c - self.re_c_limit).abs()
    }
}

impl Experiment {
    pub fn new(spec: ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let model = ModelSpec { spins: vec![spec.l, spec.l], hamiltonian: spec.hamiltonian.clone() };
        let hamiltonian = Arc::new(model.hamiltonian()?);
        let initial = spec.state.build(spec.l)?;
        Ok(Experiment { spec, hamiltonian, initial })
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &Arc<Hamiltonian> {
        &self.hamiltonian
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial
    }

    fn norm(&self) -> f64 {
        self.spec.l.value().powi(2)
    }

    /// Normalized exact correlation `C(t1, t2)/l²`.
    pub fn exact_at(&self, t2: f64) -> Result<Complex64> {
        let c = exact_two_time(&self.initial, &self.hamiltonian, self.spec.site_i, self.spec.site_j, self.spec.t1, t2)?;
        Ok(c / self.norm())
    }

    pub fn exact_series(&self) -> Result<Vec<ExactRow>> {
        self.spec
            .t2_grid
            .points()
            .into_iter()
            .map(|t2| {
                let c = self.exact_at(t2)?;
                Ok(ExactRow { t2, re_c: c.re, im_c: c.im })
            })
            .collect()
    }

    pub fn protocol_config(&self, t2: f64, lambda: f64) -> ProtocolConfig {
        ProtocolConfig {
            hamiltonian: Arc::clone(&self.hamiltonian),
            initial_state: self.initial.clone(),
            site_i: self.spec.site_i,
            site_j: self.spec.site_j,
            t1: self.spec.t1,
            t2,
            lambda,
            coupling: self.spec.coupling,
        }
    }

    /// Exact outcome distributions at one `t2`, one per `λ`.
    pub fn distributions(&self, t2: f64) -> Result<Vec<OutcomeDistribution>> {
        self.spec.lambdas().into_iter().map(|lambda| run_protocol(&self.protocol_config(t2, lambda))).collect()
    }

    fn extract(&self, script_c: &[f64]) -> Result<Complex64> {
        let pairs: Vec<(f64, f64)> = self.spec.lambdas().into_iter().zip(script_c.iter().copied()).collect();
        let est = extract_correlation(&pairs, self.spec.l, self.spec.method, self.spec.refined_l)?;
        Ok(est.value() / self.norm())
    }

    pub fn protocol_series(&self) -> Result<Vec<ProtocolRow>> {
        self.spec.require_protocol_grid()?;
        self.spec
            .t2_grid
            .points()
            .into_iter()
            .map(|t2| {
                let script_c: Vec<f64> = self.distributions(t2)?.iter().map(script_c_from_distribution).collect();
                let est = self.extract(&script_c)?;
                let exact = self.exact_at(t2)?;
                Ok(ProtocolRow { t2, script_c, re_c: est.re, im_c: est.im, exact_re_c: exact.re, exact_im_c: exact.im })
            })
            .collect()
    }

    pub fn sampled_series(&self, sampling: &SampleConfig) -> Result<Vec<SampleRow>> {
        self.spec.require_protocol_grid()?;
        sampling.validate()?;
        // Fail on an unusable λ grid before spending time on sampling.
        self.extract(&vec![0.0; self.spec.lambda_l.len()])?;
        self.spec
            .t2_grid
            .points()
            .into_iter()
            .enumerate()
            .map(|(p, t2)| self.sample_point(p as u64, t2, sampling))
            .collect()
    }

    fn sample_point(&self, index: u64, t2: f64, sampling: &SampleConfig) -> Result<SampleRow> {
        let dists = self.distributions(t2)?;
        let point = sampling.for_stream(index);
        // per_lambda[k][r]: 𝒞 at λ_k from repeat r.
        let per_lambda: Vec<Vec<f64>> = dists
            .iter()
            .enumerate()
            .map(|(k, d)| repeated_estimates(d, &point.for_stream(k as u64)))
            .collect::<Result<_>>()?;
        let mut re = Vec::with_capacity(sampling.n_repeats);
        let mut im = Vec::with_capacity(sampling.n_repeats);
        for r in 0..sampling.n_repeats {
            let values: Vec<f64> = per_lambda.iter().map(|v| v[r]).collect();
            let c = self.extract(&values)?;
            re.push(c.re);
            im.push(c.im);
        }
        let stats: Vec<(f64, f64)> = per_lambda.iter().map(|v| mean_std(v)).collect::<Result<_>>()?;
        let (re_c_mean, re_c_std) = mean_std(&re)?;
        let (im_c_mean, im_c_std) = mean_std(&im)?;
        let limit = self.extract(&dists.iter().map(script_c_from_distribution).collect::<Vec<_>>())?;
        let exact = self.exact_at(t2)?;
        Ok(SampleRow {
            t2,
            mean_script_c: stats.iter().map(|s| s.0).collect(),
            std_script_c: stats.iter().map(|s| s.1).collect(),
            re_c_mean,
            re_c_std,
            im_c_mean,
            im_c_std,
            re_c_limit: limit.re,
            exact_re_c: exact.re,
            exact_im_c: exact.im,
        })
    }
}

/// Deviation of the extracted `Re C` from the exact one over a protocol sweep.
pub fn re_deviation(rows: &[ProtocolRow]) -> Result<DeviationReport> {
    let exact: Vec<(f64, f64)> = rows.iter().map(|r| (r.t2, r.exact_re_c)).collect();
    let est: Vec<(f64, f64)> = rows.iter().map(|r| (r.t2, r.re_c)).collect();
    systematic_deviation(&exact, &est)
}

/// Summary of the γ coefficients of `state ⊗ ancilla` at one site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub l: HalfInt,
    pub state: InitialState,
    pub site: usize,
    pub metric_full: f64,
    pub metric_interior: f64,
    pub completeness: f64,
    pub ancilla_symmetry_deviation: f64,
    /// `(m, ‖γ_m^+‖, ‖γ_m^−‖)` for `m = −l−1/2, …, l+1/2`.
    pub profile: Vec<(f64, f64, f64)>,
}

pub fn diagnose(l: HalfInt, state: InitialState, site: usize) -> Result<DiagnoseReport> {
    let psi = with_ancilla(&state.build(l)?)?;
    let table = gamma_coefficients(&psi, site)?;
    let profile = table
        .m_values
        .iter()
        .zip(table.plus.iter().zip(&table.minus))
        .map(|(m, (p, q))| (m.value(), p.norm(), q.norm()))
        .collect();
    Ok(DiagnoseReport {
        l,
        state,
        site,
        metric_full: slow_variation_metric(&table, VariationRange::Full),
        metric_interior: slow_variation_metric(&table, VariationRange::Interior),
        completeness: table.completeness(),
        ancilla_symmetry_deviation: table.ancilla_symmetry_deviation(),
        profile,
    })
}

/// Which sweep a recipe runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exact,
    Protocol,
    Sample,
    Diagnose,
}

/// Built-in plot recipes with every parameter pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Recipe {
    Fig2Left,
    Fig2Right,
    Fig3,
    Fig4Left,
    Fig4Right,
}

/// Seed used by the sampling recipes.
pub const RECIPE_SEED: u64 = 20_240_601;

pub struct RecipePlan {
    pub command: Command,
    pub runs: Vec<ExperimentSpec>,
    pub sampling: Option<SampleConfig>,
    /// Parameters pinned by choice rather than by necessity; echoed in manifests.
    pub assumed: Vec<&'static str>,
}

impl Recipe {
    pub const ALL: [Recipe; 5] =
        [Recipe::Fig2Left, Recipe::Fig2Right, Recipe::Fig3, Recipe::Fig4Left, Recipe::Fig4Right];

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig2Left => "fig2-left",
            Recipe::Fig2Right => "fig2-right",
            Recipe::Fig3 => "fig3",
            Recipe::Fig4Left => "fig4-left",
            Recipe::Fig4Right => "fig4-right",
        }
    }

    pub fn plan(self) -> RecipePlan {
        let spec = |l: i32, state| ExperimentSpec {
            refined_l: false,
            ..ExperimentSpec::benchmark(HalfInt::from_int(l), state)
        };
        let assumed = vec!["t2-grid 0:3:0.05", "lambda-l {pi/2, pi}", "t1 = 0"];
        match self {
            Recipe::Fig2Left | Recipe::Fig2Right => {
                let state = if self == Recipe::Fig2Left { InitialState::Uniform } else { InitialState::MaxMag };
                RecipePlan { command: Command::Protocol, runs: vec![spec(8, state)], sampling: None, assumed }
            }
            Recipe::Fig3 => RecipePlan {
                command: Command::Protocol,
                runs: vec![spec(4, InitialState::Ramp), spec(16, InitialState::Ramp)],
                sampling: None,
                assumed,
            },
            Recipe::Fig4Left | Recipe::Fig4Right => {
                let n_s = if self == Recipe::Fig4Left { 100 } else { 1000 };
                let mut assumed = assumed;
                assumed.push("seed 20240601");
                RecipePlan {
                    command: Command::Sample,
                    runs: vec![spec(4, InitialState::Uniform)],
                    sampling: Some(SampleConfig::new(n_s, RECIPE_SEED)),
                    assumed,
                }
            }
        }
    }
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Recipe::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown recipe '{s}'")))
    }
}

/// Human-readable description of the extraction scale `L`.
pub fn scale_note(spec: &ExperimentSpec) -> String {
    format!("L = {} ({})", effective_l(spec.l, spec.refined_l), if spec.refined_l { "l + 1/2" } else { "l" })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_arithmetic() {
        let g: Grid = "0:3:0.05".parse().unwrap();
        assert_eq!(g.len(), 61);
        let pts = g.points();
        assert_eq!(pts[0], 0.0);
        assert_abs_diff_eq!(pts[60], 3.0, epsilon = 1e-12);
        assert_eq!("1:1:0.5".parse::<Grid>().unwrap().len(), 1);
        assert!("0:3".parse::<Grid>().is_err());
        assert!("0:3:0".parse::<Grid>().is_err());
        assert!("3:0:1".parse::<Grid>().is_err());
        assert!("a:1:1".parse::<Grid>().is_err());
    }

    fn small(state: InitialState) -> ExperimentSpec {
        ExperimentSpec {
            t2_grid: Grid::new(0.0, 1.0, 0.25).unwrap(),
            ..ExperimentSpec::benchmark(HalfInt::from_int(2), state)
        }
    }

    #[test]
    fn exact_series_examples() {
        let exp = Experiment::new(small(InitialState::MaxMag)).unwrap();
        let rows = exp.exact_series().unwrap();
        assert_eq!(rows.len(), 5);
        assert_abs_diff_eq!(rows[0].re_c, 1.0, epsilon = 1e-12);
        // Stretched state is stationary under the Heisenberg model.
        assert!(rows.iter().all(|r| (r.re_c - 1.0).abs() < 1e-10 && r.im_c.abs() < 1e-10));
    }

    #[test]
    fn protocol_needs_two_point_lambdas() {
        let spec = ExperimentSpec { lambda_l: vec![PI], ..small(InitialState::Uniform) };
        let exp = Experiment::new(spec).unwrap();
        assert!(matches!(exp.protocol_series(), Err(Error::MissingLambda(_))));
    }

    #[test]
    fn protocol_rejects_grid_before_t1() {
        let spec = ExperimentSpec { t1: 0.5, ..small(InitialState::Uniform) };
        let exp = Experiment::new(spec).unwrap();
        assert!(matches!(exp.protocol_series(), Err(Error::InvalidConfig(_))));
        assert!(exp.exact_series().is_ok());
    }

    #[test]
    fn sampled_series_is_deterministic() {
        let exp = Experiment::new(small(InitialState::Uniform)).unwrap();
        let cfg = SampleConfig { n_s: 50, n_repeats: 5, master_seed: 11 };
        let a = exp.sampled_series(&cfg).unwrap();
        let b = exp.sampled_series(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.re_c_std > 0.0));
    }

    #[test]
    fn fourier_and_two_point_are_consistent() {
        let l = HalfInt::from_int(8);
        let base = ExperimentSpec {
            t2_grid: Grid::new(0.0, 2.0, 0.5).unwrap(),
            ..ExperimentSpec::benchmark(l, InitialState::Uniform)
        };
        let two = Experiment::new(base.clone()).unwrap().protocol_series().unwrap();
        let fourier_spec = ExperimentSpec {
            lambda_l: (1..=8).map(|k| k as f64 * PI / 8.0).collect(),
            method: ExtractionMethod::Fourier,
            ..base
        };
        let four = Experiment::new(fourier_spec).unwrap().protocol_series().unwrap();
        let band = re_deviation(&two).unwrap().max_abs_dev.max(re_deviation(&four).unwrap().max_abs_dev);
        for (a, b) in two.iter().zip(&four) {
            assert!((a.re_c - b.re_c).abs() <= 2.0 * band, "t2 = {}: {} vs {}", a.t2, a.re_c, b.re_c);
        }
    }

    #[test]
    fn diagnose_examples() {
        let r = diagnose(HalfInt::from_int(8), InitialState::Uniform, 0).unwrap();
        assert_eq!(r.metric_interior, 0.0);
        assert_abs_diff_eq!(r.completeness, 1.0, epsilon = 1e-12);
        let r = diagnose(HalfInt::from_int(8), InitialState::MaxMag, 0).unwrap();
        assert_abs_diff_eq!(r.metric_full, 1.0, epsilon = 1e-12);
        let r = diagnose(HalfInt::from_int(16), InitialState::Ramp, 0).unwrap();
        assert_abs_diff_eq!(r.metric_interior, 1.0 / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn recipes_round_trip_names() {
        for r in Recipe::ALL {
            assert_eq!(r.name().parse::<Recipe>().unwrap(), r);
            let plan = r.plan();
            assert!(plan.runs.iter().all(|s| !s.refined_l && s.validate().is_ok()));
        }
    }
}
