//! Chain specification and Hamiltonian construction.
//!
//! A chain of M bare levels coupled by M−1 microwave-driven transitions maps
//! onto a single-particle tight-binding Hamiltonian
//!
//! ```text
//!     H[n, n+1] = H[n+1, n] = Ω_{n,n+1} / 2        (coupling, kHz)
//!     H[n, n]   = U_n                              (on-site term, kHz)
//! ```
//!
//! with alternating weak/strong Ω giving the staggered-hopping (SSH) pattern.
//! Per-bond drive detunings δ_{n,n+1} accumulate along the chain into the
//! on-site terms: U_1 = 0 and U_{k+1} = U_k + δ_{k,k+1}, the rotating-frame
//! convention for a ladder of chained drives. All frequencies are ordinary
//! frequencies in kHz; the 2π lives in the propagator, not here.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Declarative description of a chain: site labels (principal quantum
/// numbers), one Rabi coupling per bond, one drive detuning per bond.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    site_labels: Vec<u32>,
    couplings_khz: Vec<f64>,
    bond_detunings_khz: Vec<f64>,
}

impl LatticeSpec {
    /// Validates and builds a chain specification.
    ///
    /// Requires at least two sites, strictly increasing labels, and exactly
    /// M−1 finite couplings and detunings. Zero couplings are legal (a
    /// disconnected chain is a valid, if dull, configuration).
    pub fn new(
        site_labels: Vec<u32>,
        couplings_khz: Vec<f64>,
        bond_detunings_khz: Vec<f64>,
    ) -> Result<Self> {
        let m = site_labels.len();
        if m < 2 {
            return Err(Error::Spec(format!("need at least 2 sites, got {m}")));
        }
        if !site_labels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Spec(format!(
                "site labels must be strictly increasing, got {site_labels:?}"
            )));
        }
        if couplings_khz.len() != m - 1 {
            return Err(Error::Spec(format!(
                "expected {} couplings for {m} sites, got {}",
                m - 1,
                couplings_khz.len()
            )));
        }
        if bond_detunings_khz.len() != m - 1 {
            return Err(Error::Spec(format!(
                "expected {} bond detunings for {m} sites, got {}",
                m - 1,
                bond_detunings_khz.len()
            )));
        }
        if let Some(bad) = couplings_khz.iter().find(|c| !c.is_finite()) {
            return Err(Error::Spec(format!("non-finite coupling {bad}")));
        }
        if let Some(bad) = bond_detunings_khz.iter().find(|d| !d.is_finite()) {
            return Err(Error::Spec(format!("non-finite bond detuning {bad}")));
        }
        Ok(Self {
            site_labels,
            couplings_khz,
            bond_detunings_khz,
        })
    }

    /// Resonant chain: all bond detunings zero (the chiral-symmetric point).
    pub fn resonant(site_labels: Vec<u32>, couplings_khz: Vec<f64>) -> Result<Self> {
        let detunings = vec![0.0; couplings_khz.len()];
        Self::new(site_labels, couplings_khz, detunings)
    }

    /// Resonant chain of `sites` consecutive labels starting at `first_label`
    /// with couplings alternating weak, strong, weak, ... — the edge bonds are
    /// weak, which is the configuration hosting mid-gap edge states.
    pub fn alternating(
        first_label: u32,
        sites: usize,
        omega_weak_khz: f64,
        omega_strong_khz: f64,
    ) -> Result<Self> {
        if sites < 2 {
            return Err(Error::Spec(format!("need at least 2 sites, got {sites}")));
        }
        let labels: Vec<u32> = (0..sites as u32).map(|k| first_label + k).collect();
        let couplings: Vec<f64> = (0..sites - 1)
            .map(|b| {
                if b % 2 == 0 {
                    omega_weak_khz
                } else {
                    omega_strong_khz
                }
            })
            .collect();
        Self::resonant(labels, couplings)
    }

    /// Copy of this chain with the detuning of one bond replaced.
    pub fn with_bond_detuning(&self, bond_index: usize, detuning_khz: f64) -> Result<Self> {
        if bond_index >= self.bond_count() {
            return Err(Error::IndexOutOfRange {
                what: "bond",
                index: bond_index,
                len: self.bond_count(),
            });
        }
        let mut detunings = self.bond_detunings_khz.clone();
        detunings[bond_index] = detuning_khz;
        Self::new(self.site_labels.clone(), self.couplings_khz.clone(), detunings)
    }

    /// Number of sites M.
    pub fn len(&self) -> usize {
        self.site_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // M >= 2 by construction
    }

    /// Number of bonds M−1.
    pub fn bond_count(&self) -> usize {
        self.site_labels.len() - 1
    }

    pub fn site_labels(&self) -> &[u32] {
        &self.site_labels
    }

    pub fn couplings_khz(&self) -> &[f64] {
        &self.couplings_khz
    }

    pub fn bond_detunings_khz(&self) -> &[f64] {
        &self.bond_detunings_khz
    }

    /// Index of the site carrying `label`, if present.
    pub fn site_index(&self, label: u32) -> Option<usize> {
        self.site_labels.iter().position(|&l| l == label)
    }
}

/// Dense real symmetric tridiagonal chain Hamiltonian, entries in kHz.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub(crate) matrix: DMatrix<f64>,
}

impl HamiltonianMatrix {
    /// Dimension M.
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[(row, col)]
    }

    /// Main diagonal (the on-site terms U_n).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).collect()
    }

    /// First off-diagonal (the half-couplings Ω/2).
    pub fn off_diagonal(&self) -> Vec<f64> {
        (0..self.dim() - 1).map(|i| self.matrix[(i, i + 1)]).collect()
    }
}

/// Builds the chain Hamiltonian from a specification.
///
/// Off-diagonals are Ω/2; the diagonal accumulates bond detunings with the
/// first site pinned at zero. Pure and deterministic.
pub fn build_hamiltonian(spec: &LatticeSpec) -> HamiltonianMatrix {
    let m = spec.len();
    let mut matrix = DMatrix::zeros(m, m);
    for (bond, &omega) in spec.couplings_khz().iter().enumerate() {
        matrix[(bond, bond + 1)] = omega / 2.0;
        matrix[(bond + 1, bond)] = omega / 2.0;
    }
    let mut on_site = 0.0;
    for (bond, &delta) in spec.bond_detunings_khz().iter().enumerate() {
        on_site += delta;
        matrix[(bond + 1, bond + 1)] = on_site;
    }
    HamiltonianMatrix { matrix }
}
