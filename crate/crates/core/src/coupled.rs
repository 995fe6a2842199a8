//! Coupling a spin-`l` site to the spin-1/2 ancilla.
//!
//! The coupled basis `|l, j, m⟩` with `j = l ± 1/2` is expanded in the
//! uncoupled product basis `|l, m_l⟩ ⊗ |m_s⟩` with Condon–Shortley phases:
//!
//! ```text
//! |l, l+1/2, m⟩ = a |m-1/2⟩|+⟩ + b |m+1/2⟩|-⟩
//! |l, l-1/2, m⟩ = a |m+1/2⟩|-⟩ - b |m-1/2⟩|+⟩
//! a = sqrt((l+1/2+m)/(2l+1)),  b = sqrt((l+1/2-m)/(2l+1))
//! ```
//!
//! The Heisenberg coupling `exp(-iλ S_i·S)` is diagonal in this basis, which
//! gives a construction of the coupling unitary independent of any matrix
//! exponential.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::spin::{apply_local, CMatrix, CVector, Operator, SiteLayout, StateVector};

/// Index of the ancilla states in the ascending-m basis.
pub const ANCILLA_DOWN: usize = 0;
pub const ANCILLA_UP: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgPair {
    pub a: f64,
    pub b: f64,
}

fn check_coupled_m(l: HalfInt, m: HalfInt) -> Result<()> {
    let top = l + HalfInt::HALF;
    if m.abs() > top || (top.twice() - m.twice()) % 2 != 0 {
        return Err(Error::OutOfMultiplet { l, m });
    }
    Ok(())
}

pub fn cg_coefficients(l: HalfInt, m: HalfInt) -> Result<CgPair> {
    HalfInt::spin(l.twice())?;
    check_coupled_m(l, m)?;
    let denom = f64::from(l.twice() + 1);
    let a = (f64::from(l.twice() + 1 + m.twice()) / 2.0 / denom).max(0.0).sqrt();
    let b = (f64::from(l.twice() + 1 - m.twice()) / 2.0 / denom).max(0.0).sqrt();
    Ok(CgPair { a, b })
}

/// Layout of one spin-`l` site followed by the ancilla.
pub fn site_ancilla_layout(l: HalfInt) -> SiteLayout {
    SiteLayout::single(l.dim()).with_ancilla().expect("fresh layout has no ancilla")
}

fn uncoupled_index(l: HalfInt, m_l: HalfInt, ancilla: usize) -> Option<usize> {
    l.index_of(m_l).ok().map(|k| 2 * k + ancilla)
}

/// `|l, j, m⟩` expanded in the uncoupled basis of `ℋ_i ⊗ ℋ_A`.
pub fn coupled_basis_vector(l: HalfInt, j: HalfInt, m: HalfInt) -> Result<StateVector> {
    let upper = j == l + HalfInt::HALF;
    let lower = j == l - HalfInt::HALF && j >= HalfInt::ZERO;
    if !(upper || lower) || !j.contains(m) {
        return Err(Error::InvalidCoupledPair { l, j, m });
    }
    let CgPair { a, b } = cg_coefficients(l, m)?;
    let layout = site_ancilla_layout(l);
    let mut v = CVector::zeros(layout.total_dim());
    let mut put = |m_l: HalfInt, ancilla: usize, coeff: f64| {
        if let Some(idx) = uncoupled_index(l, m_l, ancilla) {
            v[idx] += Complex64::new(coeff, 0.0);
        }
    };
    if upper {
        put(m - HalfInt::HALF, ANCILLA_UP, a);
        put(m + HalfInt::HALF, ANCILLA_DOWN, b);
    } else {
        put(m + HalfInt::HALF, ANCILLA_DOWN, a);
        put(m - HalfInt::HALF, ANCILLA_UP, -b);
    }
    StateVector::new(layout, v)
}

/// The `j` values reachable by coupling spin `l` to spin 1/2.
pub fn coupled_j_values(l: HalfInt) -> Vec<HalfInt> {
    let mut js = Vec::with_capacity(2);
    if l >= HalfInt::HALF {
        js.push(l - HalfInt::HALF);
    }
    js.push(l + HalfInt::HALF);
    js
}

/// All coupled basis vectors as `(j, m, |l,j,m⟩)`, `j` ascending then `m` ascending.
pub fn coupled_basis(l: HalfInt) -> Result<Vec<(HalfInt, HalfInt, StateVector)>> {
    let mut out = Vec::with_capacity(2 * l.dim());
    for j in coupled_j_values(l) {
        for m in j.magnetic_values() {
            out.push((j, m, coupled_basis_vector(l, j, m)?));
        }
    }
    Ok(out)
}

/// Eigenvalue of `S_i·S` on the `j` multiplet: `[j(j+1) − l(l+1) − 3/4] / 2`.
pub fn coupling_energy(l: HalfInt, j: HalfInt) -> f64 {
    (j.casimir() - l.casimir() - 0.75) / 2.0
}

/// Projector onto the `j` multiplet of `ℋ_i ⊗ ℋ_A`.
pub fn multiplet_projector(l: HalfInt, j: HalfInt) -> Result<Operator> {
    let layout = site_ancilla_layout(l);
    let dim = layout.total_dim();
    let mut p = CMatrix::zeros(dim, dim);
    for m in j.magnetic_values() {
        let v = coupled_basis_vector(l, j, m)?;
        p += v.amplitudes() * v.amplitudes().adjoint();
    }
    Operator::new(layout, p)
}

/// `exp(-iλ S_i·S)` assembled from its spectral decomposition in the coupled basis.
pub fn coupling_unitary_coupled_diag(l: HalfInt, lambda: f64) -> Result<Operator> {
    let layout = site_ancilla_layout(l);
    let dim = layout.total_dim();
    let mut u = CMatrix::zeros(dim, dim);
    for (j, _, v) in coupled_basis(l)? {
        let phase = Complex64::from_polar(1.0, -lambda * coupling_energy(l, j));
        u += v.amplitudes() * v.amplitudes().adjoint() * phase;
    }
    Operator::new(layout, u)
}

/// Weight of `psi` in each coupled multiplet of `site` and the ancilla.
pub fn j_populations(psi: &StateVector, site: usize) -> Result<Vec<(HalfInt, f64)>> {
    let layout = psi.layout();
    let ancilla = layout.ancilla_slot().ok_or(Error::MissingAncilla)?;
    layout.check_system_site(site)?;
    let l = spin_of_dim(layout.local_dims()[site])?;
    coupled_j_values(l)
        .into_iter()
        .map(|j| {
            let projected = apply_local(&multiplet_projector(l, j)?, &[site, ancilla], psi)?;
            Ok((j, projected.norm().powi(2)))
        })
        .collect()
}

pub(crate) fn spin_of_dim(dim: usize) -> Result<HalfInt> {
    HalfInt::spin(dim as i32 - 1)
}

/// Uncoupled expansion coefficients `γ_m^±` of a system ⊗ ancilla state.
///
/// `γ_m^± = ⟨l, m ∓ 1/2; ±1/2 | Ψ⟩` is a vector over the remaining system
/// sites. Entries are stored for `m = −l−1/2, …, l+1/2`; blocks whose site
/// quantum number falls outside the multiplet are zero.
#[derive(Clone, Debug)]
pub struct GammaTable {
    pub l: HalfInt,
    pub m_values: Vec<HalfInt>,
    pub plus: Vec<CVector>,
    pub minus: Vec<CVector>,
}

impl GammaTable {
    fn position(&self, m: HalfInt) -> Option<usize> {
        self.m_values.iter().position(|&x| x == m)
    }

    pub fn plus(&self, m: HalfInt) -> Option<&CVector> {
        self.position(m).map(|k| &self.plus[k])
    }

    pub fn minus(&self, m: HalfInt) -> Option<&CVector> {
        self.position(m).map(|k| &self.minus[k])
    }

    /// `Σ_m ‖γ_m^+‖² + ‖γ_m^−‖²`.
    pub fn completeness(&self) -> f64 {
        self.plus.iter().chain(&self.minus).map(|v| v.norm_squared()).sum()
    }

    /// Plus-branch blocks whose site quantum number is inside the multiplet.
    pub fn plus_in_range(&self) -> &[CVector] {
        // m = −l−1/2 maps to m_l = −l−1 and is always empty.
        &self.plus[1..]
    }

    /// Largest `|γ_{m+1}^+ − γ_m^−|`; zero when the ancilla is in `(|−⟩+|+⟩)/√2`.
    pub fn ancilla_symmetry_deviation(&self) -> f64 {
        (0..self.m_values.len() - 1).map(|k| (&self.plus[k + 1] - &self.minus[k]).norm()).fold(0.0, f64::max)
    }
}

pub fn gamma_coefficients(psi: &StateVector, site: usize) -> Result<GammaTable> {
    let layout = psi.layout();
    let ancilla = layout.ancilla_slot().ok_or(Error::MissingAncilla)?;
    layout.check_system_site(site)?;
    let site_dim = layout.local_dims()[site];
    let l = spin_of_dim(site_dim)?;
    let rest_dim = layout.total_dim() / (site_dim * 2);

    // blocks[k][a]: amplitudes with site digit k and ancilla digit a, ordered over the rest.
    let mut blocks = vec![[CVector::zeros(rest_dim), CVector::zeros(rest_dim)]; site_dim];
    let mut fill = vec![[0usize; 2]; site_dim];
    for (idx, amp) in psi.amplitudes().iter().enumerate() {
        let k = layout.digit(idx, site);
        let a = layout.digit(idx, ancilla);
        blocks[k][a][fill[k][a]] = *amp;
        fill[k][a] += 1;
    }

    let top = l + HalfInt::HALF;
    let m_values: Vec<HalfInt> = top.magnetic_values().collect();
    let block = |m_l: HalfInt, a: usize| match l.index_of(m_l) {
        Ok(k) => blocks[k][a].clone(),
        Err(_) => CVector::zeros(rest_dim),
    };
    let plus = m_values.iter().map(|&m| block(m - HalfInt::HALF, ANCILLA_UP)).collect();
    let minus = m_values.iter().map(|&m| block(m + HalfInt::HALF, ANCILLA_DOWN)).collect();
    Ok(GammaTable { l, m_values, plus, minus })
}

/// Rebuilds the full state from its γ table (inverse of [`gamma_coefficients`]).
pub fn reconstruct(table: &GammaTable, layout: &SiteLayout, site: usize) -> Result<StateVector> {
    let ancilla = layout.ancilla_slot().ok_or(Error::MissingAncilla)?;
    let mut amps = CVector::zeros(layout.total_dim());
    let mut fill = vec![[0usize; 2]; layout.local_dims()[site]];
    for idx in 0..amps.len() {
        let k = layout.digit(idx, site);
        let a = layout.digit(idx, ancilla);
        let m_l = table.l.magnetic_values().nth(k).expect("digit within multiplet");
        let (m, source) =
            if a == ANCILLA_UP { (m_l + HalfInt::HALF, &table.plus) } else { (m_l - HalfInt::HALF, &table.minus) };
        let pos = table.position(m).ok_or(Error::OutOfMultiplet { l: table.l, m })?;
        amps[idx] = source[pos][fill[k][a]];
        fill[k][a] += 1;
    }
    StateVector::new(layout.clone(), amps)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariationRange {
    /// Includes the jumps to zero just outside the multiplet.
    #[default]
    Full,
    /// Only differences between consecutive in-multiplet values of `m`.
    Interior,
}

pub const VARIATION_FLOOR: f64 = 1e-30;

/// `max_m ‖γ_{m+1}^+ − γ_m^+‖ / (max_m ‖γ_m^+‖ + ε)`; 0 for perfectly flat coefficients.
pub fn slow_variation_metric(table: &GammaTable, range: VariationRange) -> f64 {
    let inner = table.plus_in_range();
    let rest_dim = inner.first().map_or(0, |v| v.len());
    let zero = CVector::zeros(rest_dim);
    let seq: Vec<&CVector> = match range {
        VariationRange::Interior => inner.iter().collect(),
        VariationRange::Full => std::iter::once(&zero).chain(inner.iter()).chain(std::iter::once(&zero)).collect(),
    };
    let max_jump = seq.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    let max_norm = inner.iter().map(|v| v.norm()).fold(0.0, f64::max);
    max_jump / (max_norm + VARIATION_FLOOR)
}
