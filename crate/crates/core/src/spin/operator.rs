use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::layout::SiteLayout;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative Hermiticity tolerance.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute unitarity tolerance.
pub const UNITARY_TOL: f64 = 1e-10;

/// Dense complex square matrix acting on a [`SiteLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    layout: SiteLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: SiteLayout, matrix: CMatrix) -> Result<Self> {
        let dim = layout.total_dim();
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        if matrix.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: matrix.nrows() });
        }
        Ok(Operator { layout, matrix })
    }

    pub fn identity(layout: SiteLayout) -> Self {
        let dim = layout.total_dim();
        Operator { layout, matrix: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(layout: SiteLayout) -> Self {
        let dim = layout.total_dim();
        Operator { layout, matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(layout: SiteLayout, diagonal: &[f64]) -> Result<Self> {
        let diag = CVector::from_iterator(diagonal.len(), diagonal.iter().map(|&x| Complex64::new(x, 0.0)));
        Operator::new(layout, CMatrix::from_diagonal(&diag))
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Operator {
        Operator { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scaled(&self, factor: Complex64) -> Operator {
        Operator { layout: self.layout.clone(), matrix: &self.matrix * factor }
    }

    /// Same matrix on a different layout of equal total dimension.
    pub fn relabel(self, layout: SiteLayout) -> Result<Operator> {
        Operator::new(layout, self.matrix)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A - B|` entrywise.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "operator dimensions differ");
        self.matrix.iter().zip(other.matrix.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= HERMITIAN_TOL * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let product = self.matrix.adjoint() * &self.matrix;
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                dev = dev.max((product[(r, c)] - target).norm());
            }
        }
        dev
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= UNITARY_TOL
    }

    /// Whether all entries are real, which selects the real symmetric eigensolver.
    pub fn is_real(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        &(self * other) - &(other * self)
    }

    /// Removes a trailing ancilla factor from an operator of the form `H_S ⊗ 𝟙_A`.
    pub fn strip_ancilla(&self) -> Result<Operator> {
        if !self.layout.has_ancilla() {
            return Err(Error::MissingAncilla);
        }
        let n = self.dim() / 2;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut system = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                let pp = self.matrix[(2 * r, 2 * c)];
                let mm = self.matrix[(2 * r + 1, 2 * c + 1)];
                let pm = self.matrix[(2 * r, 2 * c + 1)];
                let mp = self.matrix[(2 * r + 1, 2 * c)];
                if (pp - mm).norm() > HERMITIAN_TOL * scale
                    || pm.norm() > HERMITIAN_TOL * scale
                    || mp.norm() > HERMITIAN_TOL * scale
                {
                    return Err(Error::LayoutMismatch("operator acts nontrivially on the ancilla".into()));
                }
                system[(r, c)] = pp;
            }
        }
        Operator::new(self.layout.system(), system)
    }
}

impl<'a> Mul<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn mul(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator { layout: self.layout.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl<'a> Add<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn add(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator { layout: self.layout.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a Operator> for &'a Operator {
    type Output = Operator;
    fn sub(self, rhs: &'a Operator) -> Operator {
        assert_eq!(self.layout, rhs.layout, "operator layouts differ");
        Operator { layout: self.layout.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

/// Kronecker product; the layout is the concatenation of both factors.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator { layout: a.layout.concat(&b.layout), matrix: a.matrix.kronecker(&b.matrix) }
}

/// Embeds a single-site operator at `site`, acting as the identity elsewhere.
pub fn tensor_embed(op: &Operator, site: usize, layout: &SiteLayout) -> Result<Operator> {
    let local = layout.local_dim(site)?;
    if op.dim() != local {
        return Err(Error::DimensionMismatch { expected: local, found: op.dim() });
    }
    let left: usize = layout.local_dims()[..site].iter().product();
    let right = layout.stride(site);
    let matrix = CMatrix::identity(left, left).kronecker(&op.matrix).kronecker(&CMatrix::identity(right, right));
    Operator::new(layout.clone(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn kron_of_identities() {
        let a = Operator::identity(SiteLayout::single(2));
        let b = Operator::identity(SiteLayout::single(3));
        let k = kron(&a, &b);
        assert_eq!(k, Operator::identity(SiteLayout::new(vec![2, 3]).unwrap()));
    }

    #[test]
    fn kron_of_diagonals() {
        let a = Operator::from_real_diagonal(SiteLayout::single(2), &[1.0, -1.0]).unwrap();
        let b = Operator::from_real_diagonal(SiteLayout::single(2), &[1.0, 0.0]).unwrap();
        let k = kron(&a, &b);
        let expected = [1.0, 0.0, -1.0, 0.0];
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(k.matrix()[(i, i)], c(*e));
        }
        assert_eq!(k.max_abs_diff(&Operator::from_real_diagonal(k.layout().clone(), &expected).unwrap()), 0.0);
    }

    #[test]
    fn embed_identity_and_errors() {
        let layout = SiteLayout::new(vec![2, 3, 4]).unwrap();
        let id = Operator::identity(SiteLayout::single(3));
        assert_eq!(tensor_embed(&id, 1, &layout).unwrap(), Operator::identity(layout.clone()));
        assert!(matches!(tensor_embed(&id, 0, &layout), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(tensor_embed(&id, 5, &layout), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn strip_ancilla_round_trip() {
        let sys = Operator::from_real_diagonal(SiteLayout::single(3), &[1.0, 2.0, 3.0]).unwrap();
        let full = kron(&sys, &Operator::identity(SiteLayout::ancilla()));
        assert!(full.layout().has_ancilla());
        assert_eq!(full.strip_ancilla().unwrap(), sys);
        let bad = kron(&sys, &Operator::from_real_diagonal(SiteLayout::ancilla(), &[1.0, -1.0]).unwrap());
        assert!(bad.strip_ancilla().is_err());
    }
}
