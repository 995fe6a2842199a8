//! Benchmark Hamiltonians and initial states.
//!
//! The two-spin Heisenberg model `H = S₁·S₂` (exchange constant 1, time in
//! its inverse units) and three product-type initial states: equally
//! populated, maximally magnetized, and a linear ramp on the first site.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::half_int::HalfInt;
use crate::spin::{kron, spin_operators, CMatrix, Hamiltonian, Operator, SiteLayout, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Uniform,
    #[serde(alias = "maxmag")]
    MaxMag,
    Ramp,
}

impl InitialState {
    pub const ALL: [InitialState; 3] = [InitialState::Uniform, InitialState::MaxMag, InitialState::Ramp];

    pub fn name(self) -> &'static str {
        match self {
            InitialState::Uniform => "uniform",
            InitialState::MaxMag => "maxmag",
            InitialState::Ramp => "ramp",
        }
    }

    pub fn build(self, l: HalfInt) -> Result<StateVector> {
        match self {
            InitialState::Uniform => uniform_state(l),
            InitialState::MaxMag => maximally_magnetized_state(l),
            InitialState::Ramp => ramp_state(l),
        }
    }
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(InitialState::Uniform),
            "maxmag" | "max-mag" => Ok(InitialState::MaxMag),
            "ramp" => Ok(InitialState::Ramp),
            other => Err(Error::InvalidConfig(format!("unknown initial state '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum HamiltonianKind {
    HeisenbergTwoSpin,
    OneAxisTwisting {
        chi: f64,
    },
    /// Row-major real and imaginary parts of a user-supplied matrix.
    Custom {
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub spins: Vec<HalfInt>,
    pub hamiltonian: HamiltonianKind,
}

impl ModelSpec {
    pub fn heisenberg(l: HalfInt) -> Self {
        ModelSpec { spins: vec![l, l], hamiltonian: HamiltonianKind::HeisenbergTwoSpin }
    }

    pub fn layout(&self) -> Result<SiteLayout> {
        let dims =
            self.spins.iter().map(|&l| HalfInt::spin(l.twice()).map(HalfInt::dim)).collect::<Result<Vec<_>>>()?;
        SiteLayout::new(dims)
    }

    /// The system Hamiltonian (no ancilla slot).
    pub fn system_operator(&self) -> Result<Operator> {
        match &self.hamiltonian {
            HamiltonianKind::HeisenbergTwoSpin => {
                let [l1, l2] = self.spins[..] else {
                    return Err(Error::InvalidConfig("heisenberg model needs exactly two sites".into()));
                };
                if l1 != l2 {
                    return Err(Error::InvalidConfig(format!("heisenberg sites must share l (got {l1} and {l2})")));
                }
                heisenberg_system(l1)
            }
            HamiltonianKind::OneAxisTwisting { chi } => {
                let [l] = self.spins[..] else {
                    return Err(Error::InvalidConfig("one-axis twisting is a single-site model".into()));
                };
                one_axis_twisting(*chi, l)
            }
            HamiltonianKind::Custom { re, im } => {
                let layout = self.layout()?;
                let n = layout.total_dim();
                if re.len() != n || im.len() != n || re.iter().chain(im).any(|row| row.len() != n) {
                    return Err(Error::DimensionMismatch { expected: n, found: re.len() });
                }
                let m = CMatrix::from_fn(n, n, |r, c| num_complex::Complex64::new(re[r][c], im[r][c]));
                let op = Operator::new(layout, m)?;
                if !op.is_hermitian() {
                    return Err(Error::NotHermitian { deviation: op.hermiticity_deviation() });
                }
                Ok(op)
            }
        }
    }

    pub fn hamiltonian(&self) -> Result<Hamiltonian> {
        Hamiltonian::new(self.system_operator()?)
    }
}

/// `S₁·S₂` on two spin-`l` sites, without the ancilla.
pub fn heisenberg_system(l: HalfInt) -> Result<Operator> {
    let s = spin_operators(l)?;
    Ok(&(&kron(&s.sx, &s.sx) + &kron(&s.sy, &s.sy)) + &kron(&s.sz, &s.sz))
}

/// `S₁·S₂ ⊗ 𝟙_A`.
pub fn heisenberg_two_spin(l: HalfInt) -> Result<Operator> {
    Ok(kron(&heisenberg_system(l)?, &Operator::identity(SiteLayout::ancilla())))
}

/// `χ (S^z)²` on a single site.
pub fn one_axis_twisting(chi: f64, l: HalfInt) -> Result<Operator> {
    HalfInt::spin(l.twice())?;
    let diag: Vec<f64> = l.magnetic_values().map(|m| chi * m.value() * m.value()).collect();
    Operator::from_real_diagonal(SiteLayout::single(l.dim()), &diag)
}

fn two_site(l: HalfInt, amps: impl Fn(usize, usize) -> f64) -> Result<StateVector> {
    HalfInt::spin(l.twice())?;
    let d = l.dim();
    let v: Vec<f64> = (0..d * d).map(|k| amps(k / d, k % d)).collect();
    StateVector::from_real(SiteLayout::new(vec![d, d])?, &v)
}

/// Equal population of every `|m₁, m₂⟩`.
pub fn uniform_state(l: HalfInt) -> Result<StateVector> {
    two_site(l, |_, _| 1.0)
}

/// `|l, l⟩ ⊗ |l, l⟩`.
pub fn maximally_magnetized_state(l: HalfInt) -> Result<StateVector> {
    let top = l.dim() - 1;
    two_site(l, |a, b| if a == top && b == top { 1.0 } else { 0.0 })
}

/// `Σ_{m₁} (l − m₁) |l, m₁⟩ ⊗ |l, l⟩`, normalized.
pub fn ramp_state(l: HalfInt) -> Result<StateVector> {
    let top = l.dim() - 1;
    // Index k corresponds to m₁ = −l + k, so l − m₁ = 2l − k.
    two_site(l, |a, b| if b == top { (l.twice() as usize - a) as f64 } else { 0.0 })
}

/// `|ψ⟩ ⊗ (|−⟩ + |+⟩)/√2`.
pub fn with_ancilla(psi: &StateVector) -> Result<StateVector> {
    if psi.layout().has_ancilla() {
        return Err(Error::UnexpectedAncilla);
    }
    Ok(psi.product(&ancilla_state()))
}

/// The prepared ancilla `(|−⟩ + |+⟩)/√2`.
pub fn ancilla_state() -> StateVector {
    StateVector::from_real(SiteLayout::ancilla(), &[1.0, 1.0]).expect("nonzero ancilla amplitudes")
}
