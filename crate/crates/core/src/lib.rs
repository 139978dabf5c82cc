//! Single-particle dynamics on a staggered-hopping (SSH) chain realized as a
//! synthetic lattice of microwave-coupled Rydberg levels.
//!
//! The crate builds the chain Hamiltonian from a declarative lattice
//! description ([`lattice`]), diagonalizes it into dressed states
//! ([`spectral`]), propagates bare initial states through the spectrum with
//! optional phenomenological decay and dephasing ([`dynamics`]), extracts
//! observables over parameter sweeps ([`analysis`]), and models state-resolved
//! detection by ramped-field ionization with non-negative spectral unmixing
//! ([`sfi`]).
//!
//! Units: couplings, detunings, and eigenfrequencies are ordinary frequencies
//! in kHz; times are in μs; fields are in V/cm. The angular 2π·10⁻³ factor
//! joining kHz and μs lives in exactly one place,
//! [`dynamics::angular_phase`].

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod lattice;
pub mod sfi;
pub mod spectral;

pub use analysis::{
    dominant_oscillation_frequency, dressed_energy_scan, edge_transfer_curve, fwhm,
    splitting_vs_size, sweep_edge_detuning, sweep_protection_breakdown, SweepResult,
};
pub use dynamics::{
    evolve, oscillation_resolved_grid, uniform_grid, DecoherenceParams, PopulationTrajectory,
};
pub use error::{Error, Result};
pub use lattice::{build_hamiltonian, HamiltonianMatrix, LatticeSpec};
pub use sfi::{
    broad_background_trace, ionization_field, ionization_time, mix_traces, synthesize_trace,
    unmix, RampParams, SfiTrace, UnmixResult,
};
pub use spectral::{diagonalize, DressedSpectrum};
