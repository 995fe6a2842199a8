use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor-product structure of a Hilbert space.
///
/// Slots are ordered as system sites in lattice order followed by the
/// spin-1/2 ancilla, when present. The first slot is the most significant
/// digit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteLayout {
    local_dims: Vec<usize>,
    ancilla: bool,
}

pub const ANCILLA_DIM: usize = 2;

impl SiteLayout {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if let Some(pos) = local_dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidConfig(format!("site {pos} has dimension 0")));
        }
        Ok(SiteLayout { local_dims, ancilla: false })
    }

    pub fn single(dim: usize) -> Self {
        assert!(dim > 0, "site dimension must be positive");
        SiteLayout { local_dims: vec![dim], ancilla: false }
    }

    /// The layout of a lone ancilla.
    pub fn ancilla() -> Self {
        SiteLayout { local_dims: vec![ANCILLA_DIM], ancilla: true }
    }

    /// Appends the ancilla slot.
    pub fn with_ancilla(&self) -> Result<Self> {
        if self.ancilla {
            return Err(Error::UnexpectedAncilla);
        }
        let mut local_dims = self.local_dims.clone();
        local_dims.push(ANCILLA_DIM);
        Ok(SiteLayout { local_dims, ancilla: true })
    }

    /// The layout with the ancilla slot removed.
    pub fn system(&self) -> SiteLayout {
        let mut local_dims = self.local_dims.clone();
        if self.ancilla {
            local_dims.pop();
        }
        SiteLayout { local_dims, ancilla: false }
    }

    /// Concatenation `self ⊗ other`. Only a trailing ancilla keeps its role.
    pub fn concat(&self, other: &SiteLayout) -> SiteLayout {
        let mut local_dims = self.local_dims.clone();
        local_dims.extend_from_slice(&other.local_dims);
        SiteLayout { local_dims, ancilla: other.ancilla }
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn slots(&self) -> usize {
        self.local_dims.len()
    }

    pub fn system_sites(&self) -> usize {
        self.local_dims.len() - usize::from(self.ancilla)
    }

    pub fn has_ancilla(&self) -> bool {
        self.ancilla
    }

    pub fn ancilla_slot(&self) -> Option<usize> {
        self.ancilla.then(|| self.local_dims.len() - 1)
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn local_dim(&self, slot: usize) -> Result<usize> {
        self.local_dims.get(slot).copied().ok_or(Error::SiteOutOfRange { site: slot, sites: self.local_dims.len() })
    }

    /// Index step between consecutive basis states of `slot`.
    pub fn stride(&self, slot: usize) -> usize {
        self.local_dims[slot + 1..].iter().product()
    }

    /// Local digit of `slot` in the flat basis index `index`.
    pub fn digit(&self, index: usize, slot: usize) -> usize {
        (index / self.stride(slot)) % self.local_dims[slot]
    }

    pub(crate) fn check_system_site(&self, site: usize) -> Result<()> {
        if site >= self.system_sites() {
            return Err(Error::SiteOutOfRange { site, sites: self.system_sites() });
        }
        Ok(())
    }
}
