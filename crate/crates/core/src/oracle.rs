//! Exact reference values: the two-time correlation, closed forms for the
//! Ising-type couplings, and deviation summaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coupled::{spin_of_dim, ANCILLA_DOWN, ANCILLA_UP};
use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::spin::{apply_local, evolution_unitary, spin_operators, CVector, Hamiltonian, StateVector};

fn site_sz(psi: &StateVector, site: usize) -> Result<StateVector> {
    let l = spin_of_dim(psi.layout().local_dim(site)?)?;
    apply_local(&spin_operators(l)?.sz, &[site], psi)
}

/// `C(t1, t2) = ⟨ψ| S_i^z(t1) S_j^z(t2) |ψ⟩` with Heisenberg-picture operators.
///
/// Evaluated as `⟨U(t1)ψ| S_i^z U(t1−t2) S_j^z U(t2) |ψ⟩`; any ordering of
/// `t1` and `t2` is accepted.
pub fn exact_two_time(psi: &StateVector, h: &Hamiltonian, i: usize, j: usize, t1: f64, t2: f64) -> Result<Complex64> {
    if psi.layout().has_ancilla() {
        return Err(Error::UnexpectedAncilla);
    }
    psi.layout().check_system_site(i)?;
    psi.layout().check_system_site(j)?;
    psi.require_normalized()?;
    let right = site_sz(&h.evolve(psi, t2)?, j)?;
    let right = site_sz(&h.evolve(&right, t1 - t2)?, i)?;
    h.evolve(psi, t1)?.inner(&right)
}

/// `C(t1, t2) / l²` between sites 0 and 1 of the two-spin benchmark.
pub fn normalized_correlation(psi: &StateVector, h: &Hamiltonian, t1: f64, t2: f64, l: HalfInt) -> Result<Complex64> {
    if psi.layout().system_sites() != 2 {
        return Err(Error::InvalidConfig("normalized correlation needs the two-site benchmark".into()));
    }
    let l2 = l.value() * l.value();
    if l2 == 0.0 {
        return Err(Error::InvalidConfig("normalization needs l > 0".into()));
    }
    Ok(exact_two_time(psi, h, 0, 1, t1, t2)? / l2)
}

const ANCILLA_TOL: f64 = 1e-12;

/// Splits `|Ψ⟩ = Σ_a |ψ_a⟩ ⊗ |a⟩` into its system branches `(ψ_−, ψ_+)`.
fn ancilla_branches(psi: &StateVector) -> Result<(StateVector, StateVector)> {
    let layout = psi.layout();
    if layout.ancilla_slot().is_none() {
        return Err(Error::MissingAncilla);
    }
    let system = layout.system();
    let n = system.total_dim();
    let amps = psi.amplitudes();
    let branch = |a: usize| CVector::from_iterator(n, (0..n).map(|s| amps[2 * s + a]));
    Ok((StateVector::new(system.clone(), branch(ANCILLA_DOWN))?, StateVector::new(system, branch(ANCILLA_UP))?))
}

/// System state `ψ` of `ψ ⊗ (|−⟩+|+⟩)/√2`, after checking the ancilla amplitudes.
fn prepared_system_state(psi: &StateVector) -> Result<StateVector> {
    let (down, up) = ancilla_branches(psi)?;
    let mismatch = (down.amplitudes() - up.amplitudes()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if mismatch > ANCILLA_TOL {
        return Err(Error::AncillaNotPrepared(format!("branch amplitudes differ by up to {mismatch:e}")));
    }
    let mut system = up.into_amplitudes();
    system *= Complex64::new(std::f64::consts::SQRT_2, 0.0);
    StateVector::new(down.layout().clone(), system)
}

/// `e^{−iμ S_i^z} |ψ⟩`.
fn rotate_z(psi: &StateVector, site: usize, mu: f64) -> Result<StateVector> {
    let layout = psi.layout();
    let l = spin_of_dim(layout.local_dim(site)?)?;
    let phases: Vec<Complex64> = l.magnetic_values().map(|m| Complex64::from_polar(1.0, -mu * m.value())).collect();
    let amps = CVector::from_iterator(
        psi.dim(),
        psi.amplitudes().iter().enumerate().map(|(idx, z)| z * phases[layout.digit(idx, site)]),
    );
    StateVector::new(layout.clone(), amps)
}

/// `⟨a| S_j^z(τ) |b⟩` for system states.
fn sz_matrix_element(a: &StateVector, b: &StateVector, h: &Hamiltonian, j: usize, tau: f64) -> Result<Complex64> {
    let a = h.evolve(a, tau)?;
    let b = site_sz(&h.evolve(b, tau)?, j)?;
    a.inner(&b)
}

/// `𝒞` for the coupling `exp(−iλ S_i^z ⊗ S^z)`:
/// `½[A(λ/2) − A(−λ/2)]` with `A(μ) = ⟨e^{iμS_i^z} S_j^z(t2−t1) e^{−iμS_i^z}⟩` on `ψ(t1)`.
///
/// `psi` is the system ⊗ ancilla state before any evolution.
pub fn ising_zz_closed_form(
    psi: &StateVector,
    h: &Hamiltonian,
    i: usize,
    j: usize,
    t1: f64,
    t2: f64,
    lambda: f64,
) -> Result<f64> {
    let system = h.evolve(&prepared_system_state(psi)?, t1)?;
    let a = |mu: f64| -> Result<f64> {
        let rotated = rotate_z(&system, i, mu)?;
        Ok(sz_matrix_element(&rotated, &rotated, h, j, t2 - t1)?.re)
    };
    Ok(0.5 * (a(lambda / 2.0)? - a(-lambda / 2.0)?))
}

/// `𝒞` for the coupling `exp(−iλ S_i^x ⊗ S^x)`, summed in the ancilla `S^x` eigenbasis.
///
/// With `|Ψ⟩ = Σ_σ |χ_σ⟩ ⊗ |σ_x⟩` the coupling acts as `e^{−iλσ S_i^x/2}` on
/// each branch and `2S^z` swaps the branches, so
/// `𝒞 = 2 Re ⟨W_+χ_+| S_j^z(t2−t1) |W_−χ_−⟩`. The prepared ancilla is the
/// `+x` eigenstate, for which this vanishes identically.
pub fn ising_xx_closed_form(
    psi: &StateVector,
    h: &Hamiltonian,
    i: usize,
    j: usize,
    t1: f64,
    t2: f64,
    lambda: f64,
) -> Result<f64> {
    prepared_system_state(psi)?;
    let (down, up) = ancilla_branches(psi)?;
    let scale = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let chi_plus = StateVector::new(down.layout().clone(), (up.amplitudes() + down.amplitudes()) * scale)?;
    let chi_minus = StateVector::new(down.layout().clone(), (up.amplitudes() - down.amplitudes()) * scale)?;

    let l = spin_of_dim(down.layout().local_dim(i)?)?;
    let sx = spin_operators(l)?.sx;
    // The coupling acts at t1, after the free evolution.
    let branch = |chi: &StateVector, sigma: f64| -> Result<StateVector> {
        let w = evolution_unitary(&sx, sigma * lambda / 2.0)?;
        apply_local(&w, &[i], &h.evolve(chi, t1)?)
    };
    let plus = branch(&chi_plus, 1.0)?;
    let minus = branch(&chi_minus, -1.0)?;
    Ok(2.0 * sz_matrix_element(&plus, &minus, h, j, t2 - t1)?.re)
}

/// Pointwise comparison of an estimate against the exact series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub max_abs_dev: f64,
    pub mean_abs_dev: f64,
    /// `(t2, exact, estimate)` per grid point.
    pub grid: Vec<(f64, f64, f64)>,
}

const GRID_TOL: f64 = 1e-12;

pub fn systematic_deviation(exact: &[(f64, f64)], estimate: &[(f64, f64)]) -> Result<DeviationReport> {
    if exact.len() != estimate.len() || exact.is_empty() {
        return Err(Error::GridMismatch(format!("{} exact points vs {} estimates", exact.len(), estimate.len())));
    }
    let mut grid = Vec::with_capacity(exact.len());
    for (&(t, e), &(t_est, v)) in exact.iter().zip(estimate) {
        if (t - t_est).abs() > GRID_TOL * t.abs().max(1.0) {
            return Err(Error::GridMismatch(format!("t2 = {t} vs {t_est}")));
        }
        grid.push((t, e, v));
    }
    let devs: Vec<f64> = grid.iter().map(|&(_, e, v)| (e - v).abs()).collect();
    Ok(DeviationReport {
        max_abs_dev: devs.iter().copied().fold(0.0, f64::max),
        mean_abs_dev: devs.iter().sum::<f64>() / devs.len() as f64,
        grid,
    })
}
