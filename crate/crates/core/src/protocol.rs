//! The ancilla-assisted measurement protocol as an exact computation.
//!
//! Steps: evolve the system to `t1`, attach the ancilla `(|−⟩+|+⟩)/√2`,
//! couple site `i` to the ancilla with `𝒰(λ)`, project the ancilla on `S^z`,
//! evolve each renormalized branch to `t2`, and read the `S_j^z`
//! distribution. The outcome statistics give the correlator `𝒞(λ)`, from
//! which `Re C` and `Im C` are extracted through
//!
//! ```text
//! 𝒞(λ) ≈ (2/L) sin²(λL/2) Re C + (1/L) sin(λL) Im C
//! ```
//!
//! with `L = l` (plain) or `L = l + 1/2` (refined).

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupled::{coupling_unitary_coupled_diag, spin_of_dim, ANCILLA_DOWN, ANCILLA_UP};
use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::model::with_ancilla;
use crate::spin::{
    ancilla_operators, apply_local, evolution_unitary, kron, spin_operators, CMatrix, CVector, Hamiltonian, Operator,
    StateVector, UNITARY_TOL,
};

/// How the measured outcomes are combined into `𝒞`. Written into every manifest.
pub const CONVENTION: &str = "script_c = sum_m m * (P(m|+) P(+) - P(m|-) P(-)); ancilla outcomes weighted +1/-1, \
     equivalently <U^dag (S_j^z(t2-t1) (x) 2 S^z) U>";

/// Probabilities below this mark a projection branch as empty.
pub const BRANCH_THRESHOLD: f64 = 1e-14;

/// Tolerance on the norm of evolved states before a contract violation is raised.
const STATE_NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `exp(−iλ S_i·S)`.
    #[default]
    Heisenberg,
    /// `exp(−iλ S_i^z ⊗ S^z)`.
    #[serde(rename = "zz")]
    IsingZz,
    /// `exp(−iλ S_i^x ⊗ S^x)`.
    #[serde(rename = "xx")]
    IsingXx,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 3] = [CouplingKind::Heisenberg, CouplingKind::IsingZz, CouplingKind::IsingXx];

    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::Heisenberg => "heisenberg",
            CouplingKind::IsingZz => "zz",
            CouplingKind::IsingXx => "xx",
        }
    }
}

impl std::str::FromStr for CouplingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CouplingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown coupling '{s}'")))
    }
}

/// Coupling unitary on `ℋ_i ⊗ ℋ_A` (site first, ancilla last).
pub fn coupling_unitary(kind: CouplingKind, l: HalfInt, lambda: f64) -> Result<Operator> {
    let u = match kind {
        CouplingKind::Heisenberg => coupling_unitary_coupled_diag(l, lambda)?,
        CouplingKind::IsingZz => {
            let layout = crate::coupled::site_ancilla_layout(l);
            let mut diag = CVector::zeros(layout.total_dim());
            for (k, m) in l.magnetic_values().enumerate() {
                for (a, ms) in [(ANCILLA_DOWN, -0.5), (ANCILLA_UP, 0.5)] {
                    diag[2 * k + a] = Complex64::from_polar(1.0, -lambda * m.value() * ms);
                }
            }
            Operator::new(layout, CMatrix::from_diagonal(&diag))?
        }
        CouplingKind::IsingXx => {
            let generator = kron(&spin_operators(l)?.sx, &ancilla_operators().sx);
            evolution_unitary(&generator, lambda)?
        }
    };
    let deviation = u.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::ContractViolation(format!(
            "{} coupling unitary deviates from unitarity by {deviation:e}",
            kind.name()
        )));
    }
    Ok(u)
}

/// One protocol configuration: model, state, sites, times and coupling.
#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub hamiltonian: Arc<Hamiltonian>,
    /// System-only initial state; the ancilla is attached by the protocol.
    pub initial_state: StateVector,
    pub site_i: usize,
    pub site_j: usize,
    pub t1: f64,
    pub t2: f64,
    pub lambda: f64,
    pub coupling: CouplingKind,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        let layout = self.initial_state.layout();
        if layout.has_ancilla() {
            return Err(Error::UnexpectedAncilla);
        }
        if layout != self.hamiltonian.operator().layout() {
            return Err(Error::LayoutMismatch(format!(
                "initial state on {:?}, Hamiltonian on {:?}",
                layout.local_dims(),
                self.hamiltonian.operator().layout().local_dims()
            )));
        }
        layout.check_system_site(self.site_i)?;
        layout.check_system_site(self.site_j)?;
        if !(self.t1.is_finite() && self.t2.is_finite() && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("times and coupling must be finite".into()));
        }
        if self.t2 < self.t1 {
            return Err(Error::InvalidConfig(format!("t2 = {} precedes t1 = {}", self.t2, self.t1)));
        }
        self.initial_state.require_normalized()
    }

    pub fn l_i(&self) -> HalfInt {
        spin_of_dim(self.initial_state.layout().local_dims()[self.site_i]).expect("validated layout")
    }

    pub fn l_j(&self) -> HalfInt {
        spin_of_dim(self.initial_state.layout().local_dims()[self.site_j]).expect("validated layout")
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ProtocolConfig { lambda, ..self.clone() }
    }

    pub fn with_t2(&self, t2: f64) -> Self {
        ProtocolConfig { t2, ..self.clone() }
    }
}

/// Exact statistics of the ancilla outcome and the subsequent `S_j^z` reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub l: HalfInt,
    pub p_plus: f64,
    pub p_minus: f64,
    /// `P(m | +)`, indexed by ascending `m`.
    pub p_m_given_plus: Vec<f64>,
    pub p_m_given_minus: Vec<f64>,
    /// False when the branch probability fell below [`BRANCH_THRESHOLD`] and
    /// the conditional is a uniform placeholder.
    pub plus_used: bool,
    pub minus_used: bool,
}

impl OutcomeDistribution {
    pub fn m_values(&self) -> impl Iterator<Item = HalfInt> {
        self.l.magnetic_values()
    }

    /// Joint probabilities `P_± P(m|±)`: all `−` outcomes (ascending `m`), then all `+`.
    pub fn joint(&self) -> Vec<f64> {
        let minus = self.p_m_given_minus.iter().map(|p| p * self.p_minus);
        let plus = self.p_m_given_plus.iter().map(|p| p * self.p_plus);
        minus.chain(plus).collect()
    }

    /// Distribution from joint weights laid out as in [`joint`](Self::joint), e.g. sample counts.
    pub fn from_joint(l: HalfInt, weights: &[f64]) -> Result<Self> {
        let d = l.dim();
        if weights.len() != 2 * d {
            return Err(Error::DimensionMismatch { expected: 2 * d, found: weights.len() });
        }
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidConfig("joint weights must be non-negative with a positive sum".into()));
        }
        let (minus, plus) = weights.split_at(d);
        let (p_minus, p_m_given_minus, minus_used) = branch(minus.iter().sum::<f64>() / total, minus);
        let (p_plus, p_m_given_plus, plus_used) = branch(plus.iter().sum::<f64>() / total, plus);
        Ok(OutcomeDistribution { l, p_plus, p_minus, p_m_given_plus, p_m_given_minus, plus_used, minus_used })
    }

    /// Largest deviation from the probability axioms.
    pub fn completeness_deviation(&self) -> f64 {
        let cond = |v: &[f64]| (v.iter().sum::<f64>() - 1.0).abs();
        (self.p_plus + self.p_minus - 1.0).abs().max(cond(&self.p_m_given_plus)).max(cond(&self.p_m_given_minus))
    }

    pub fn min_probability(&self) -> f64 {
        self.p_m_given_plus
            .iter()
            .chain(&self.p_m_given_minus)
            .chain([&self.p_plus, &self.p_minus])
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Total variation distance between two distributions over the same outcomes.
    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        self.joint().iter().zip(other.joint()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0
    }
}

/// Branch probability and conditional from unnormalized weights.
fn branch(p: f64, weights: &[f64]) -> (f64, Vec<f64>, bool) {
    let p = p.max(0.0);
    let sum: f64 = weights.iter().sum();
    if p < BRANCH_THRESHOLD || sum <= 0.0 {
        let n = weights.len() as f64;
        return (p, vec![1.0 / n; weights.len()], false);
    }
    (p, weights.iter().map(|w| (w / sum).max(0.0)).collect(), true)
}

fn check_norm(psi: &StateVector, stage: &str) -> Result<()> {
    let deviation = (psi.norm() - 1.0).abs();
    if deviation > STATE_NORM_TOL {
        return Err(Error::ContractViolation(format!("state norm drifted by {deviation:e} after {stage}")));
    }
    Ok(())
}

/// `𝒰(λ)|ψ(t1)⟩ ⊗ |φ⟩`, the state right after the coupling step.
fn coupled_state(config: &ProtocolConfig) -> Result<StateVector> {
    config.validate()?;
    let psi_t1 = config.hamiltonian.evolve(&config.initial_state, config.t1)?;
    check_norm(&psi_t1, "evolution to t1")?;
    let full = with_ancilla(&psi_t1)?;
    let u = coupling_unitary(config.coupling, config.l_i(), config.lambda)?;
    let ancilla = full.layout().ancilla_slot().expect("ancilla attached");
    let coupled = apply_local(&u, &[config.site_i, ancilla], &full)?;
    check_norm(&coupled, "coupling")?;
    Ok(coupled)
}

/// Probabilities of the `S^z` eigenvalues of `site`.
fn site_distribution(psi: &StateVector, site: usize) -> Vec<f64> {
    let layout = psi.layout();
    let mut probs = vec![0.0; layout.local_dims()[site]];
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        probs[layout.digit(idx, site)] += amp.norm_sqr();
    }
    probs
}

/// Runs the protocol and returns the exact outcome distribution.
pub fn run_protocol(config: &ProtocolConfig) -> Result<OutcomeDistribution> {
    let coupled = coupled_state(config)?;
    let system = coupled.layout().system();
    let n = system.total_dim();
    let amps = coupled.amplitudes();
    let tau = config.t2 - config.t1;

    let mut result = [(0.0, Vec::new(), false), (0.0, Vec::new(), false)];
    for a in [ANCILLA_DOWN, ANCILLA_UP] {
        let projected = CVector::from_iterator(n, (0..n).map(|s| amps[2 * s + a]));
        let p = projected.norm_squared();
        let d = config.l_j().dim();
        if p < BRANCH_THRESHOLD {
            result[a] = (p.max(0.0), vec![1.0 / d as f64; d], false);
            continue;
        }
        let post = StateVector::normalized(system.clone(), projected)?;
        let evolved = config.hamiltonian.evolve(&post, tau)?;
        check_norm(&evolved, "branch evolution")?;
        result[a] = branch(p, &site_distribution(&evolved, config.site_j));
    }
    let [(p_minus, p_m_given_minus, minus_used), (p_plus, p_m_given_plus, plus_used)] = result;
    let dist = OutcomeDistribution {
        l: config.l_j(),
        p_plus,
        p_minus,
        p_m_given_plus,
        p_m_given_minus,
        plus_used,
        minus_used,
    };
    let deviation = dist.completeness_deviation();
    if deviation > 1e-10 {
        return Err(Error::ContractViolation(format!("outcome probabilities off by {deviation:e}")));
    }
    Ok(dist)
}

/// `Σ_m m (P(m|+) P_+ − P(m|−) P_−)`.
pub fn script_c_from_distribution(dist: &OutcomeDistribution) -> f64 {
    dist.m_values()
        .zip(dist.p_m_given_plus.iter().zip(&dist.p_m_given_minus))
        .map(|(m, (pp, pm))| m.value() * (pp * dist.p_plus - pm * dist.p_minus))
        .sum()
}

/// `⟨𝒰†(λ) (S_j^z(t2−t1) ⊗ 2S^z) 𝒰(λ)⟩` as a single expectation value, without projections.
pub fn script_c_direct(config: &ProtocolConfig) -> Result<f64> {
    let coupled = coupled_state(config)?;
    let evolved = config.hamiltonian.evolve(&coupled, config.t2 - config.t1)?;
    let ancilla = evolved.layout().ancilla_slot().expect("ancilla attached");
    let observable = kron(&spin_operators(config.l_j())?.sz, &ancilla_operators().sz.scaled(2.0.into()));
    let image = apply_local(&observable, &[config.site_j, ancilla], &evolved)?;
    Ok(evolved.inner(&image)?.re)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractionMethod {
    /// `Re C` from `λL = π`, `Im C` from `λL = π/2`.
    #[default]
    TwoPoint,
    /// Least squares on the two-function model over an arbitrary λ grid.
    Fourier,
}

impl ExtractionMethod {
    pub fn name(self) -> &'static str {
        match self {
            ExtractionMethod::TwoPoint => "two-point",
            ExtractionMethod::Fourier => "fourier",
        }
    }
}

impl std::str::FromStr for ExtractionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-point" => Ok(ExtractionMethod::TwoPoint),
            "fourier" => Ok(ExtractionMethod::Fourier),
            other => Err(Error::InvalidConfig(format!("unknown extraction method '{other}'"))),
        }
    }
}

/// The spin scale `L` used by the extraction: `l`, or `l + 1/2` when refined.
pub fn effective_l(l: HalfInt, refined: bool) -> f64 {
    if refined {
        l.value() + 0.5
    } else {
        l.value()
    }
}

/// Coupling `λ` for a dimensionless product `λL`.
pub fn lambda_for(l: HalfInt, lambda_l: f64, refined: bool) -> f64 {
    lambda_l / effective_l(l, refined)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    /// `(λ, 𝒞(λ))` pairs the estimate was built from.
    pub script_c_values: Vec<(f64, f64)>,
    pub re_c: f64,
    pub im_c: f64,
    pub method: ExtractionMethod,
    pub refined_l: bool,
}

impl CorrelationEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re_c, self.im_c)
    }
}

/// Model value of `𝒞(λ)` for a given `C`.
pub fn model_script_c(c: Complex64, l: HalfInt, lambda: f64, refined: bool) -> f64 {
    let [f_re, f_im] = basis_functions(effective_l(l, refined), lambda);
    f_re * c.re + f_im * c.im
}

fn basis_functions(big_l: f64, lambda: f64) -> [f64; 2] {
    let x = lambda * big_l;
    [2.0 / big_l * (x / 2.0).sin().powi(2), x.sin() / big_l]
}

const LAMBDA_MATCH_TOL: f64 = 1e-9;

pub fn extract_correlation(
    script_c: &[(f64, f64)],
    l: HalfInt,
    method: ExtractionMethod,
    refined_l: bool,
) -> Result<CorrelationEstimate> {
    let big_l = effective_l(l, refined_l);
    if big_l <= 0.0 {
        return Err(Error::InvalidConfig("extraction needs l > 0".into()));
    }
    let (re_c, im_c) = match method {
        ExtractionMethod::TwoPoint => {
            let at = |target: f64, label: &str| {
                script_c
                    .iter()
                    .find(|(lambda, _)| (lambda * big_l - target).abs() <= LAMBDA_MATCH_TOL * target)
                    .map(|&(_, c)| c)
                    .ok_or_else(|| Error::MissingLambda(format!("two-point extraction needs λL = {label}")))
            };
            let c_pi = at(std::f64::consts::PI, "π")?;
            let c_half_pi = at(std::f64::consts::FRAC_PI_2, "π/2")?;
            let re = big_l / 2.0 * c_pi;
            (re, big_l * c_half_pi - re)
        }
        ExtractionMethod::Fourier => {
            let mut lambdas: Vec<f64> = script_c.iter().map(|p| p.0).collect();
            lambdas.sort_by(f64::total_cmp);
            lambdas.dedup_by(|a, b| (*a - *b).abs() <= LAMBDA_MATCH_TOL * b.abs().max(1.0));
            if lambdas.len() < 4 {
                return Err(Error::MissingLambda(format!(
                    "fourier extraction needs at least 4 distinct λ values, got {}",
                    lambdas.len()
                )));
            }
            least_squares(script_c, big_l)?
        }
    };
    Ok(CorrelationEstimate { script_c_values: script_c.to_vec(), re_c, im_c, method, refined_l })
}

/// Ordinary least squares for `(Re C, Im C)` via the 2×2 normal equations.
fn least_squares(points: &[(f64, f64)], big_l: f64) -> Result<(f64, f64)> {
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(lambda, c) in points {
        let [f1, f2] = basis_functions(big_l, lambda);
        a11 += f1 * f1;
        a12 += f1 * f2;
        a22 += f2 * f2;
        b1 += f1 * c;
        b2 += f2 * c;
    }
    let det = a11 * a22 - a12 * a12;
    let trace = a11 + a22;
    if !(trace > 1e-20 && det > 1e-10 * trace * trace) {
        return Err(Error::SingularFit);
    }
    Ok(((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupled::j_populations;
    use crate::model::{heisenberg_system, maximally_magnetized_state, uniform_state};
    use crate::spin::SiteLayout;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn benchmark(l: HalfInt, state: StateVector, lambda: f64, t2: f64) -> ProtocolConfig {
        ProtocolConfig {
            hamiltonian: Arc::new(Hamiltonian::new(heisenberg_system(l).unwrap()).unwrap()),
            initial_state: state,
            site_i: 0,
            site_j: 1,
            t1: 0.0,
            t2,
            lambda,
            coupling: CouplingKind::Heisenberg,
        }
    }

    /// Single spin-1/2, `H = 0`, `i = j`, initial `|+1/2⟩`: the Heisenberg
    /// coupling is `e^{iλ/4}[cos(λ/2) 𝟙 − i sin(λ/2) SWAP]`, so the branches
    /// follow by hand.
    #[test]
    fn four_dimensional_hand_calculation() {
        let layout = SiteLayout::single(2);
        for lambda in [0.0, 0.3, 1.1, PI, 2.5] {
            let config = ProtocolConfig {
                hamiltonian: Arc::new(Hamiltonian::new(Operator::zeros(layout.clone())).unwrap()),
                initial_state: StateVector::basis(layout.clone(), 1).unwrap(),
                site_i: 0,
                site_j: 0,
                t1: 0.0,
                t2: 0.7,
                lambda,
                coupling: CouplingKind::Heisenberg,
            };
            let dist = run_protocol(&config).unwrap();
            let s2 = (lambda / 2.0).sin().powi(2);
            let c2 = (lambda / 2.0).cos().powi(2);
            assert_abs_diff_eq!(dist.p_plus, (1.0 + s2) / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dist.p_minus, c2 / 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(dist.p_m_given_plus[0], s2 / (1.0 + s2), epsilon = 1e-14);
            assert_abs_diff_eq!(dist.p_m_given_plus[1], 1.0 / (1.0 + s2), epsilon = 1e-14);
            if dist.minus_used {
                assert_abs_diff_eq!(dist.p_m_given_minus[1], 1.0, epsilon = 1e-14);
            }
            assert_abs_diff_eq!(script_c_from_distribution(&dist), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn empty_branch_is_flagged() {
        let layout = SiteLayout::single(2);
        let config = ProtocolConfig {
            hamiltonian: Arc::new(Hamiltonian::new(Operator::zeros(layout.clone())).unwrap()),
            initial_state: StateVector::basis(layout, 1).unwrap(),
            site_i: 0,
            site_j: 0,
            t1: 0.0,
            t2: 0.0,
            lambda: PI,
            coupling: CouplingKind::Heisenberg,
        };
        let dist = run_protocol(&config).unwrap();
        assert!(!dist.minus_used && dist.plus_used);
        assert_eq!(dist.p_m_given_minus, vec![0.5, 0.5]);
    }

    #[test]
    fn coupling_unitary_examples() {
        let l = HalfInt::from_int(3);
        for kind in CouplingKind::ALL {
            let u = coupling_unitary(kind, l, 0.0).unwrap();
            assert!(u.max_abs_diff(&Operator::identity(u.layout().clone())) < 1e-14);
        }
        let u = coupling_unitary(CouplingKind::IsingZz, HalfInt::HALF, 0.8).unwrap();
        let d = u.matrix().diagonal();
        let expect = [0.2, -0.2, -0.2, 0.2];
        for (z, e) in d.iter().zip(expect) {
            assert!((z - Complex64::from_polar(1.0, -e)).norm() < 1e-15);
        }
    }

    #[test]
    fn heisenberg_coupling_commutes_with_total_spin() {
        let l = HalfInt::from_int(8);
        let u = coupling_unitary(CouplingKind::Heisenberg, l, PI / 8.0).unwrap();
        let s = spin_operators(l).unwrap();
        let a = ancilla_operators();
        let id_s = Operator::identity(s.sz.layout().clone());
        let id_a = Operator::identity(SiteLayout::ancilla());
        let j = [(&s.sx, &a.sx), (&s.sy, &a.sy), (&s.sz, &a.sz)].map(|(x, y)| &kron(x, &id_a) + &kron(&id_s, y));
        let j2 = &(&(&j[0] * &j[0]) + &(&j[1] * &j[1])) + &(&j[2] * &j[2]);
        assert!(u.commutator(&j2).max_abs() <= 1e-10);
    }

    #[test]
    fn zero_coupling_gives_symmetric_branches() {
        let l = HalfInt::from_int(2);
        let dist = run_protocol(&benchmark(l, uniform_state(l).unwrap(), 0.0, 0.8)).unwrap();
        assert_abs_diff_eq!(dist.p_plus, 0.5, epsilon = 1e-14);
        for (a, b) in dist.p_m_given_plus.iter().zip(&dist.p_m_given_minus) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(script_c_from_distribution(&dist), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zz_on_eigenstate_matches_uncoupled_statistics() {
        let l = HalfInt::from_int(2);
        let mut config = benchmark(l, maximally_magnetized_state(l).unwrap(), 0.0, 1.3);
        config.coupling = CouplingKind::IsingZz;
        let reference = run_protocol(&config).unwrap();
        let coupled = run_protocol(&config.with_lambda(0.9)).unwrap();
        assert!(reference.total_variation(&coupled) < 1e-13);
        assert_abs_diff_eq!(script_c_direct(&config.with_lambda(0.9)).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn direct_and_born_paths_agree() {
        for twice_l in [1, 4, 8] {
            let l = HalfInt::from_twice(twice_l);
            for kind in CouplingKind::ALL {
                for lambda_l in [FRAC_PI_2, PI] {
                    for t2 in [0.0, 0.5, 1.5] {
                        let mut config = benchmark(l, uniform_state(l).unwrap(), lambda_l / l.value(), t2);
                        config.coupling = kind;
                        let born = script_c_from_distribution(&run_protocol(&config).unwrap());
                        let direct = script_c_direct(&config).unwrap();
                        assert!((born - direct).abs() <= 1e-10, "{kind:?} l={l} t2={t2}: {born} vs {direct}");
                    }
                }
            }
        }
    }

    #[test]
    fn coupling_preserves_j_populations() {
        let l = HalfInt::from_twice(5);
        let psi = with_ancilla(&uniform_state(l).unwrap()).unwrap();
        let u = coupling_unitary(CouplingKind::Heisenberg, l, 0.77).unwrap();
        let after = apply_local(&u, &[0, 2], &psi).unwrap();
        for ((_, a), (_, b)) in j_populations(&psi, 0).unwrap().iter().zip(j_populations(&after, 0).unwrap()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let l = HalfInt::ONE;
        let mut config = benchmark(l, uniform_state(l).unwrap(), 0.1, 0.5);
        config.t1 = 1.0;
        assert!(matches!(run_protocol(&config), Err(Error::InvalidConfig(_))));
        let mut config = benchmark(l, uniform_state(l).unwrap(), 0.1, 0.5);
        config.site_j = 2;
        assert!(matches!(run_protocol(&config), Err(Error::SiteOutOfRange { .. })));
        let mut config = benchmark(l, uniform_state(l).unwrap(), 0.1, 0.5);
        config.initial_state = with_ancilla(&config.initial_state).unwrap();
        assert!(matches!(run_protocol(&config), Err(Error::UnexpectedAncilla)));
    }

    #[test]
    fn script_c_examples() {
        let l = HalfInt::from_int(3);
        let mut point = vec![0.0; 7];
        point[6] = 1.0;
        let dist = OutcomeDistribution {
            l,
            p_plus: 1.0,
            p_minus: 0.0,
            p_m_given_plus: point,
            p_m_given_minus: vec![1.0 / 7.0; 7],
            plus_used: true,
            minus_used: false,
        };
        assert_eq!(script_c_from_distribution(&dist), 3.0);
    }

    #[test]
    fn joint_round_trip() {
        let l = HalfInt::ONE;
        let weights = [1.0, 2.0, 3.0, 0.0, 0.0, 4.0];
        let dist = OutcomeDistribution::from_joint(l, &weights).unwrap();
        assert_abs_diff_eq!(dist.p_minus, 0.6, epsilon = 1e-15);
        for (a, b) in dist.joint().iter().zip(weights) {
            assert_abs_diff_eq!(*a, b / 10.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn extraction_zero_and_synthetic() {
        let l = HalfInt::from_int(8);
        let zeros = [(PI / 8.0, 0.0), (FRAC_PI_2 / 8.0, 0.0)];
        let est = extract_correlation(&zeros, l, ExtractionMethod::TwoPoint, false).unwrap();
        assert_eq!((est.re_c, est.im_c), (0.0, 0.0));

        let c = Complex64::new(3.0, -1.0);
        for refined in [false, true] {
            let grid: Vec<(f64, f64)> = (1..=8)
                .map(|k| {
                    let lambda = lambda_for(l, k as f64 * PI / 8.0, refined);
                    (lambda, model_script_c(c, l, lambda, refined))
                })
                .collect();
            for method in [ExtractionMethod::TwoPoint, ExtractionMethod::Fourier] {
                let est = extract_correlation(&grid, l, method, refined).unwrap();
                assert!((est.value() - c).norm() <= 1e-10, "{method:?} refined={refined}");
            }
        }
    }

    #[test]
    fn extraction_preconditions() {
        let l = HalfInt::from_int(4);
        let one = [(PI / 4.0, 0.2)];
        assert!(matches!(
            extract_correlation(&one, l, ExtractionMethod::TwoPoint, false),
            Err(Error::MissingLambda(_))
        ));
        assert!(matches!(extract_correlation(&one, l, ExtractionMethod::Fourier, false), Err(Error::MissingLambda(_))));
        // λL on multiples of 2π: both basis functions vanish.
        let degenerate: Vec<(f64, f64)> = (1..=4).map(|k| (2.0 * PI * k as f64 / 4.0, 0.0)).collect();
        assert!(matches!(
            extract_correlation(&degenerate, l, ExtractionMethod::Fourier, false),
            Err(Error::SingularFit)
        ));
    }
}
