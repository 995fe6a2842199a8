//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function takes plain numbers/strings and returns a JSON
//! string; the `*_json` functions hold the logic so they can be tested natively.

use serde::Serialize;
use spincorr::experiment::{diagnose, re_deviation, Experiment, ExperimentSpec, Grid};
use spincorr::model::InitialState;
use spincorr::protocol::{lambda_for, run_protocol, script_c_from_distribution, OutcomeDistribution};
use spincorr::sampling::{estimate_script_c, sample_counts, SampleConfig};
use spincorr::{Error, HalfInt, Result};
use wasm_bindgen::prelude::*;

/// Largest spin for dynamics; keeps the dense eigendecomposition interactive.
pub const MAX_L: f64 = 12.0;
/// γ profiles need no diagonalization and can go further.
pub const MAX_L_PROFILE: f64 = 64.0;

fn spin_up_to(l: f64, max: f64) -> Result<HalfInt> {
    match HalfInt::from_f64(l) {
        Some(h) if l > 0.0 && l <= max => Ok(h),
        _ => Err(Error::InvalidConfig(format!("l = {l} must be a positive multiple of 1/2 up to {max}"))),
    }
}

fn experiment(l: f64, state: &str, coupling: &str, t2_stop: f64, refined: bool) -> Result<Experiment> {
    let l = spin_up_to(l, MAX_L)?;
    let state: InitialState = state.parse()?;
    Experiment::new(ExperimentSpec {
        coupling: coupling.parse()?,
        t2_grid: Grid::new(0.0, t2_stop, t2_stop / 120.0)?,
        refined_l: refined,
        ..ExperimentSpec::benchmark(l, state)
    })
}

#[derive(Serialize)]
struct Curves {
    t2: Vec<f64>,
    exact_re: Vec<f64>,
    exact_im: Vec<f64>,
    estimate_re: Vec<f64>,
    estimate_im: Vec<f64>,
    max_abs_dev: f64,
    mean_abs_dev: f64,
}

pub fn correlation_curves_json(l: f64, state: &str, coupling: &str, t2_stop: f64, refined: bool) -> Result<String> {
    let rows = experiment(l, state, coupling, t2_stop, refined)?.protocol_series()?;
    let dev = re_deviation(&rows)?;
    let curves = Curves {
        t2: rows.iter().map(|r| r.t2).collect(),
        exact_re: rows.iter().map(|r| r.exact_re_c).collect(),
        exact_im: rows.iter().map(|r| r.exact_im_c).collect(),
        estimate_re: rows.iter().map(|r| r.re_c).collect(),
        estimate_im: rows.iter().map(|r| r.im_c).collect(),
        max_abs_dev: dev.max_abs_dev,
        mean_abs_dev: dev.mean_abs_dev,
    };
    Ok(serde_json::to_string(&curves).expect("plain data serializes"))
}

#[derive(Serialize)]
struct Outcomes {
    m: Vec<f64>,
    p_plus: f64,
    p_minus: f64,
    /// Joint probabilities `P(+) P(m|+)` and `P(−) P(m|−)`.
    joint_plus: Vec<f64>,
    joint_minus: Vec<f64>,
    sampled_plus: Vec<u64>,
    sampled_minus: Vec<u64>,
    script_c: f64,
    script_c_sampled: f64,
}

pub fn outcome_distribution_json(
    l: f64,
    state: &str,
    coupling: &str,
    t2: f64,
    lambda_l: f64,
    n_s: usize,
    seed: u64,
) -> Result<String> {
    let exp = experiment(l, state, coupling, t2.max(0.05), false)?;
    let lambda = lambda_for(exp.spec().l, lambda_l, false);
    let dist = run_protocol(&exp.protocol_config(t2, lambda))?;
    SampleConfig::new(n_s, seed).validate()?;
    let counts = sample_counts(&dist, n_s, seed)?;
    let d = dist.l.dim();
    let joint = dist.joint();
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let sampled = OutcomeDistribution::from_joint(dist.l, &weights)?;
    let out = Outcomes {
        p_plus: dist.p_plus,
        p_minus: dist.p_minus,
        joint_minus: joint[..d].to_vec(),
        joint_plus: joint[d..].to_vec(),
        sampled_minus: counts[..d].to_vec(),
        sampled_plus: counts[d..].to_vec(),
        script_c: script_c_from_distribution(&dist),
        script_c_sampled: estimate_script_c(&sampled),
        m: dist.m_values().map(HalfInt::value).collect(),
    };
    Ok(serde_json::to_string(&out).expect("plain data serializes"))
}

pub fn gamma_profile_json(l: f64, state: &str) -> Result<String> {
    let report = diagnose(spin_up_to(l, MAX_L_PROFILE)?, state.parse()?, 0)?;
    Ok(serde_json::to_string(&report).expect("plain data serializes"))
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

/// Exact and estimated `C(0, t2)/l²` on 121 points of `[0, t2_stop]`.
#[wasm_bindgen]
pub fn correlation_curves(
    l: f64,
    state: &str,
    coupling: &str,
    t2_stop: f64,
    refined: bool,
) -> std::result::Result<String, JsError> {
    js(correlation_curves_json(l, state, coupling, t2_stop, refined))
}

/// Exact outcome probabilities of one protocol run and a finite sample of them.
#[wasm_bindgen]
pub fn outcome_distribution(
    l: f64,
    state: &str,
    coupling: &str,
    t2: f64,
    lambda_l: f64,
    n_s: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    js(outcome_distribution_json(l, state, coupling, t2, lambda_l, n_s, seed))
}

/// γ-coefficient norms and slow-variation metrics of the initial state at site 0.
#[wasm_bindgen]
pub fn gamma_profile(l: f64, state: &str) -> std::result::Result<String, JsError> {
    js(gamma_profile_json(l, state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curves_have_matching_lengths() {
        let v: serde_json::Value =
            serde_json::from_str(&correlation_curves_json(2.0, "uniform", "heisenberg", 3.0, true).unwrap()).unwrap();
        let n = v["t2"].as_array().unwrap().len();
        assert_eq!(n, 121);
        assert_eq!(v["estimate_re"].as_array().unwrap().len(), n);
        assert!((v["exact_re"][0].as_f64().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn outcome_counts_sum_to_shots() {
        let v: serde_json::Value = serde_json::from_str(
            &outcome_distribution_json(3.0, "ramp", "heisenberg", 1.0, std::f64::consts::PI, 500, 1).unwrap(),
        )
        .unwrap();
        let total: u64 = ["sampled_plus", "sampled_minus"]
            .iter()
            .flat_map(|k| v[*k].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()))
            .sum();
        assert_eq!(total, 500);
        assert!((v["p_plus"].as_f64().unwrap() + v["p_minus"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_profile_metrics() {
        let v: serde_json::Value = serde_json::from_str(&gamma_profile_json(4.0, "maxmag").unwrap()).unwrap();
        assert!((v["metric_interior"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(correlation_curves_json(0.3, "uniform", "heisenberg", 3.0, true).is_err());
        assert!(correlation_curves_json(40.0, "uniform", "heisenberg", 3.0, true).is_err());
        assert!(gamma_profile_json(2.0, "sideways").is_err());
        assert!(outcome_distribution_json(2.0, "uniform", "heisenberg", 1.0, 1.0, 0, 1).is_err());
    }
}
