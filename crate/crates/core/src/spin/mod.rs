//! Spin operator algebra, tensor-product spaces and exact time evolution.
//!
//! Every single-site basis is ordered by ascending magnetic quantum number,
//! `|l,-l⟩` first.

mod evolution;
mod layout;
mod operator;
mod state;

use num_complex::Complex64;

pub use evolution::{evolution_unitary, Hamiltonian, Spectrum};
pub use layout::{SiteLayout, ANCILLA_DIM};
pub use operator::{kron, tensor_embed, CMatrix, CVector, Operator, HERMITIAN_TOL, UNITARY_TOL};
pub use state::{apply, apply_local, expectation, StateVector, NORM_TOL};

use crate::error::Result;
use crate::half_int::HalfInt;

/// Single-site spin matrices for spin `l`.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub l: HalfInt,
    pub sx: Operator,
    pub sy: Operator,
    pub sz: Operator,
    pub s_plus: Operator,
    pub s_minus: Operator,
    pub s_squared: Operator,
}

pub fn spin_operators(l: HalfInt) -> Result<SpinOps> {
    let l = HalfInt::spin(l.twice())?;
    let dim = l.dim();
    let layout = SiteLayout::single(dim);
    let lv = l.value();
    let ms: Vec<f64> = l.magnetic_values().map(HalfInt::value).collect();

    let mut plus = CMatrix::zeros(dim, dim);
    for k in 0..dim.saturating_sub(1) {
        let m = ms[k];
        plus[(k + 1, k)] = Complex64::new((lv * (lv + 1.0) - m * (m + 1.0)).max(0.0).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let half = Complex64::new(0.5, 0.0);
    let sx = (&plus + &minus) * half;
    let sy = (&plus - &minus) * Complex64::new(0.0, -0.5);

    let s_plus = Operator::new(layout.clone(), plus)?;
    let s_minus = Operator::new(layout.clone(), minus)?;
    let sx = Operator::new(layout.clone(), sx)?;
    let sy = Operator::new(layout.clone(), sy)?;
    let sz = Operator::from_real_diagonal(layout.clone(), &ms)?;
    let s_squared = &(&(&sx * &sx) + &(&sy * &sy)) + &(&sz * &sz);
    Ok(SpinOps { l, sx, sy, sz, s_plus, s_minus, s_squared })
}

/// The ancilla's spin-1/2 matrices.
pub fn ancilla_operators() -> SpinOps {
    let mut ops = spin_operators(HalfInt::HALF).expect("spin 1/2 is valid");
    for op in [&mut ops.sx, &mut ops.sy, &mut ops.sz, &mut ops.s_plus, &mut ops.s_minus, &mut ops.s_squared] {
        *op = op.clone().relabel(SiteLayout::ancilla()).expect("dimension 2");
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn spin_half_sz() {
        let ops = spin_operators(HalfInt::HALF).unwrap();
        assert_eq!(ops.sz.matrix()[(0, 0)], c(-0.5));
        assert_eq!(ops.sz.matrix()[(1, 1)], c(0.5));
    }

    #[test]
    fn spin_one_casimir() {
        let ops = spin_operators(HalfInt::ONE).unwrap();
        let target = Operator::identity(SiteLayout::single(3)).scaled(c(2.0));
        assert!(ops.s_squared.max_abs_diff(&target) < 1e-12);
    }

    #[test]
    fn spin_eight_sz_diagonal() {
        let ops = spin_operators(HalfInt::from_int(8)).unwrap();
        assert_eq!(ops.sz.dim(), 17);
        for k in 0..17 {
            assert_eq!(ops.sz.matrix()[(k, k)], c(k as f64 - 8.0));
        }
    }

    #[test]
    fn negative_spin_is_rejected() {
        assert!(spin_operators(HalfInt::from_twice(-2)).is_err());
    }

    #[test]
    fn algebra_for_reference_spins() {
        for twice in [1, 2, 8, 16, 32] {
            let ops = spin_operators(HalfInt::from_twice(twice)).unwrap();
            let i = c(0.0) + Complex64::i();
            let tol = 1e-12 * (1.0 + ops.l.casimir());
            assert!(ops.sx.commutator(&ops.sy).max_abs_diff(&ops.sz.scaled(i)) <= tol);
            assert!(ops.sy.commutator(&ops.sz).max_abs_diff(&ops.sx.scaled(i)) <= tol);
            assert!(ops.sz.commutator(&ops.sx).max_abs_diff(&ops.sy.scaled(i)) <= tol);
            let casimir = Operator::identity(ops.sz.layout().clone()).scaled(c(ops.l.casimir()));
            assert!(ops.s_squared.max_abs_diff(&casimir) <= tol);
        }
    }

    #[test]
    fn sz_sz_eigenvalues() {
        let ops = spin_operators(HalfInt::HALF).unwrap();
        let k = kron(&ops.sz, &ops.sz);
        let diag: Vec<f64> = (0..4).map(|i| k.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.25, -0.25, -0.25, 0.25]);
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let ops = spin_operators(HalfInt::ONE).unwrap();
        let layout = SiteLayout::new(vec![3, 3]).unwrap();
        let a = tensor_embed(&ops.sz, 0, &layout).unwrap();
        let b = tensor_embed(&ops.sz, 1, &layout).unwrap();
        assert_eq!(a.commutator(&b).max_abs(), 0.0);
        let sx0 = tensor_embed(&ops.sx, 0, &layout).unwrap();
        let sy1 = tensor_embed(&ops.sy, 1, &layout).unwrap();
        assert_eq!(sx0.commutator(&sy1).max_abs(), 0.0);
    }

    #[test]
    fn embed_sz_at_site_zero() {
        let ops = spin_operators(HalfInt::HALF).unwrap();
        let layout = SiteLayout::new(vec![2, 2]).unwrap();
        let embedded = tensor_embed(&ops.sz, 0, &layout).unwrap();
        let reference = kron(&ops.sz, &Operator::identity(SiteLayout::single(2)));
        assert_eq!(embedded, reference);
    }

    #[test]
    fn evolution_of_sz_over_full_period() {
        let ops = spin_operators(HalfInt::HALF).unwrap();
        let u = evolution_unitary(&ops.sz, 2.0 * std::f64::consts::PI).unwrap();
        let minus_one = Operator::identity(SiteLayout::single(2)).scaled(c(-1.0));
        assert!(u.max_abs_diff(&minus_one) < 1e-14);
    }

    #[test]
    fn evolution_at_zero_time_is_identity() {
        let ops = spin_operators(HalfInt::from_int(2)).unwrap();
        let h = &(&ops.sx * &ops.sz) + &(&ops.sz * &ops.sx);
        let u = evolution_unitary(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(h.layout().clone())) < 1e-13);
    }

    #[test]
    fn heisenberg_pair_spectrum() {
        let ops = spin_operators(HalfInt::HALF).unwrap();
        let h = &(&kron(&ops.sx, &ops.sx) + &kron(&ops.sy, &ops.sy)) + &kron(&ops.sz, &ops.sz);
        let spectrum = Spectrum::of(&h).unwrap();
        let mut energies = spectrum.energies().to_vec();
        energies.sort_by(f64::total_cmp);
        for (e, target) in energies.iter().zip([-0.75, 0.25, 0.25, 0.25]) {
            assert_abs_diff_eq!(*e, target, epsilon = 1e-14);
        }
        // U(t) carries exactly the singlet and triplet phases.
        let t = 0.7;
        let u = evolution_unitary(&h, t).unwrap();
        let trace = (0..4).map(|k| u.matrix()[(k, k)]).sum::<Complex64>();
        let expected = Complex64::from_polar(1.0, 0.75 * t) + Complex64::from_polar(3.0, -0.25 * t);
        assert!((trace - expected).norm() < 1e-13);
    }

    #[test]
    fn non_hermitian_rejected() {
        let ops = spin_operators(HalfInt::ONE).unwrap();
        assert!(matches!(evolution_unitary(&ops.s_plus, 1.0), Err(crate::Error::NotHermitian { .. })));
        assert!(Hamiltonian::new(ops.s_plus.clone()).is_err());
    }

    #[test]
    fn expectation_values() {
        let l = HalfInt::from_int(3);
        let ops = spin_operators(l).unwrap();
        let top = StateVector::basis(ops.sz.layout().clone(), l.dim() - 1).unwrap();
        assert_abs_diff_eq!(expectation(&top, &ops.sz).unwrap().re, 3.0, epsilon = 1e-15);

        let uniform = StateVector::from_real(ops.sz.layout().clone(), &vec![1.0; l.dim()]).unwrap();
        assert_abs_diff_eq!(expectation(&uniform, &ops.sz).unwrap().re, 0.0, epsilon = 1e-14);
        let sz2 = &ops.sz * &ops.sz;
        assert_abs_diff_eq!(expectation(&uniform, &sz2).unwrap().re, l.casimir() / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn hamiltonian_evolves_with_spectator_ancilla() {
        let ops = spin_operators(HalfInt::ONE).unwrap();
        let h = Hamiltonian::new(&(&ops.sx * &ops.sx) + &ops.sz).unwrap();
        let sys = StateVector::from_real(SiteLayout::single(3), &[0.3, -0.4, 0.5]).unwrap();
        let anc = StateVector::from_real(SiteLayout::ancilla(), &[1.0, 2.0]).unwrap();
        let joint = sys.product(&anc);
        let evolved = h.evolve(&joint, 1.3).unwrap();
        let reference = h.evolve(&sys, 1.3).unwrap().product(&anc);
        assert!((evolved.amplitudes() - reference.amplitudes()).norm() < 1e-13);
        assert!(h.evolve(&StateVector::basis(SiteLayout::single(4), 0).unwrap(), 1.0).is_err());
    }

    fn random_hermitian(dim: usize, seed: &[f64]) -> Operator {
        let m = CMatrix::from_fn(dim, dim, |r, c| {
            let k = (r * dim + c) % seed.len();
            Complex64::new(seed[k], seed[(k + 7) % seed.len()])
        });
        let h = (&m + &m.adjoint()) * c(0.5);
        Operator::new(SiteLayout::single(dim), h).unwrap()
    }

    /// Truncated Taylor series of `e^{-iht}`, independent of the eigensolver.
    fn taylor_exp(h: &Operator, t: f64) -> CMatrix {
        let a = h.matrix() * Complex64::new(0.0, -t);
        let dim = h.dim();
        let mut term = CMatrix::identity(dim, dim);
        let mut sum = term.clone();
        for k in 1..40 {
            term = &term * &a * c(1.0 / k as f64);
            sum += &term;
        }
        sum
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn unitary_group_and_norm(
            dim in 2usize..9,
            seed in prop::collection::vec(-1.0f64..1.0, 13),
            t1 in -2.0f64..2.0,
            t2 in -2.0f64..2.0,
        ) {
            let h = random_hermitian(dim, &seed);
            let u1 = evolution_unitary(&h, t1).unwrap();
            let u2 = evolution_unitary(&h, t2).unwrap();
            let u12 = evolution_unitary(&h, t1 + t2).unwrap();
            prop_assert!(u1.unitarity_deviation() <= UNITARY_TOL);
            prop_assert!((&u1 * &u2).max_abs_diff(&u12) <= 1e-9);

            let psi = StateVector::from_real(h.layout().clone(), &seed[..dim]).unwrap();
            let evolved = apply(&u1, &psi).unwrap();
            prop_assert!((evolved.norm() - 1.0).abs() <= 1e-12);
            let expect = expectation(&psi, &h).unwrap();
            prop_assert!(expect.im.abs() <= 1e-12);
        }

        #[test]
        fn spectral_route_matches_taylor(
            dim in 2usize..17,
            seed in prop::collection::vec(-1.0f64..1.0, 11),
            t in -1.0f64..1.0,
        ) {
            let h = random_hermitian(dim, &seed);
            let norm = h.matrix().norm();
            let t = t / norm.max(1.0);
            let u = evolution_unitary(&h, t).unwrap();
            let reference = taylor_exp(&h, t);
            let dev = (u.matrix() - reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(dev <= 1e-8, "deviation {}", dev);
        }
    }
}
