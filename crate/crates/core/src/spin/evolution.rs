//! Exact unitary time evolution through the Hermitian eigendecomposition.
//!
//! A [`Hamiltonian`] diagonalizes once, on first use, and every later
//! propagation is `V · diag(e^{-iEt}) · V†` applied to a vector, which costs
//! `O(d²)` per time point.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::{CMatrix, CVector, Operator};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Eigenvalues and eigenvectors (columns) of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl Spectrum {
    pub fn of(op: &Operator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { deviation: op.hermiticity_deviation() });
        }
        if op.is_real() {
            let real: DMatrix<f64> = op.matrix().map(|z| z.re);
            let eig = real.symmetric_eigen();
            Ok(Spectrum {
                energies: eig.eigenvalues.iter().copied().collect(),
                vectors: eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            })
        } else {
            let eig = op.matrix().clone().symmetric_eigen();
            Ok(Spectrum { energies: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    fn phases(&self, t: f64) -> impl Iterator<Item = Complex64> + '_ {
        self.energies.iter().map(move |&e| Complex64::from_polar(1.0, -e * t))
    }

    /// `e^{-iHt} v` for a raw amplitude vector.
    pub fn propagate(&self, v: &CVector, t: f64) -> CVector {
        let mut coeffs = self.vectors.ad_mul(v);
        for (c, p) in coeffs.iter_mut().zip(self.phases(t)) {
            *c *= p;
        }
        &self.vectors * coeffs
    }

    /// The full propagator matrix `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (mut col, p) in scaled.column_iter_mut().zip(self.phases(t)) {
            col *= p;
        }
        scaled * self.vectors.adjoint()
    }
}

/// A Hermitian operator with a lazily computed, shareable spectrum.
#[derive(Debug)]
pub struct Hamiltonian {
    op: Operator,
    spectrum: OnceLock<Spectrum>,
}

impl Hamiltonian {
    pub fn new(op: Operator) -> Result<Self> {
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { deviation: op.hermiticity_deviation() });
        }
        Ok(Hamiltonian { op, spectrum: OnceLock::new() })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| Spectrum::of(&self.op).expect("Hermiticity checked at construction"))
    }

    pub fn propagator(&self, t: f64) -> Operator {
        Operator::new(self.op.layout().clone(), self.spectrum().propagator(t))
            .expect("propagator has the Hamiltonian's dimension")
    }

    /// Evolves `psi` for a time `t`.
    ///
    /// `psi` may live on the Hamiltonian's own layout or on that layout plus
    /// a trailing ancilla, in which case the ancilla is a spectator
    /// (`H ⊗ 𝟙_A`).
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let spectrum = self.spectrum();
        if psi.layout() == self.op.layout() {
            return StateVector::new(psi.layout().clone(), spectrum.propagate(psi.amplitudes(), t));
        }
        if psi.layout().has_ancilla() && &psi.layout().system() == self.op.layout() {
            let amps = psi.amplitudes();
            let n = self.op.dim();
            let mut out = CVector::zeros(2 * n);
            for a in 0..2 {
                let branch = CVector::from_iterator(n, (0..n).map(|s| amps[2 * s + a]));
                let evolved = spectrum.propagate(&branch, t);
                for s in 0..n {
                    out[2 * s + a] = evolved[s];
                }
            }
            return StateVector::new(psi.layout().clone(), out);
        }
        Err(Error::LayoutMismatch(format!(
            "state on {:?} cannot be evolved by a Hamiltonian on {:?}",
            psi.layout().local_dims(),
            self.op.layout().local_dims()
        )))
    }
}

/// `e^{-iht}` from the Hermitian eigendecomposition of `h`.
pub fn evolution_unitary(h: &Operator, t: f64) -> Result<Operator> {
    let spectrum = Spectrum::of(h)?;
    Operator::new(h.layout().clone(), spectrum.propagator(t))
}
