use num_complex::Complex64;

use super::layout::SiteLayout;
use super::operator::{CVector, Operator};
use crate::error::{Error, Result};

/// Norm tolerance for states produced by constructors and unitary evolution.
pub const NORM_TOL: f64 = 1e-12;

/// Dense amplitude vector over a tensor-product Hilbert space.
///
/// Constructors return normalized states; [`apply`] may produce unnormalized
/// vectors (projections), which carry the same type.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: SiteLayout,
    amplitudes: CVector,
}

impl StateVector {
    /// Wraps amplitudes without normalizing them.
    pub fn new(layout: SiteLayout, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch { expected: layout.total_dim(), found: amplitudes.len() });
        }
        Ok(StateVector { layout, amplitudes })
    }

    pub fn normalized(layout: SiteLayout, amplitudes: CVector) -> Result<Self> {
        let mut state = StateVector::new(layout, amplitudes)?;
        let norm = state.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        state.amplitudes.unscale_mut(norm);
        Ok(state)
    }

    pub fn from_real(layout: SiteLayout, amplitudes: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|&x| Complex64::new(x, 0.0)));
        StateVector::normalized(layout, v)
    }

    pub fn basis(layout: SiteLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { layout, amplitudes: v })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        check_layout(&self.layout, &other.layout)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Product state `self ⊗ other`.
    pub fn product(&self, other: &StateVector) -> StateVector {
        StateVector {
            layout: self.layout.concat(&other.layout),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }
}

pub(crate) fn check_layout(expected: &SiteLayout, found: &SiteLayout) -> Result<()> {
    if expected != found {
        return Err(Error::LayoutMismatch(format!(
            "expected {:?}, found {:?}",
            expected.local_dims(),
            found.local_dims()
        )));
    }
    Ok(())
}

/// `op |psi⟩`, not renormalized.
pub fn apply(op: &Operator, psi: &StateVector) -> Result<StateVector> {
    check_layout(op.layout(), psi.layout())?;
    Ok(StateVector { layout: psi.layout.clone(), amplitudes: op.matrix() * &psi.amplitudes })
}

/// `⟨psi| op |psi⟩`.
pub fn expectation(psi: &StateVector, op: &Operator) -> Result<Complex64> {
    check_layout(op.layout(), psi.layout())?;
    Ok(psi.amplitudes.dotc(&(op.matrix() * &psi.amplitudes)))
}

/// Applies an operator that acts on the listed slots only.
///
/// `op` is expressed on the product of the listed slots, in the listed order
/// (first slot most significant), e.g. a site–ancilla coupling built with
/// `kron(site_op, ancilla_op)` is applied with `slots = [site, ancilla]`.
pub fn apply_local(op: &Operator, slots: &[usize], psi: &StateVector) -> Result<StateVector> {
    let layout = psi.layout();
    let mut local_dim = 1;
    for (k, &slot) in slots.iter().enumerate() {
        local_dim *= layout.local_dim(slot)?;
        if slots[..k].contains(&slot) {
            return Err(Error::LayoutMismatch(format!("slot {slot} listed twice")));
        }
    }
    if op.dim() != local_dim {
        return Err(Error::DimensionMismatch { expected: local_dim, found: op.dim() });
    }

    // Offset of every local basis state relative to its environment base index.
    let strides: Vec<usize> = slots.iter().map(|&s| layout.stride(s)).collect();
    let dims: Vec<usize> = slots.iter().map(|&s| layout.local_dims()[s]).collect();
    let offsets: Vec<usize> = (0..local_dim)
        .map(|mut li| {
            let mut off = 0;
            for k in (0..slots.len()).rev() {
                off += (li % dims[k]) * strides[k];
                li /= dims[k];
            }
            off
        })
        .collect();

    let m = op.matrix();
    let src = psi.amplitudes();
    let mut out = CVector::zeros(src.len());
    let mut local = CVector::zeros(local_dim);
    for base in 0..src.len() {
        if slots.iter().any(|&s| layout.digit(base, s) != 0) {
            continue;
        }
        for (li, &off) in offsets.iter().enumerate() {
            local[li] = src[base + off];
        }
        let mapped = m * &local;
        for (li, &off) in offsets.iter().enumerate() {
            out[base + off] = mapped[li];
        }
    }
    StateVector::new(layout.clone(), out)
}
