//! Transverse phonon physics of a linear ion crystal doped with a single
//! impurity ion of different mass.
//!
//! The crate computes, all in dimensionless trap units:
//!
//! * [`crystal`] — axial equilibrium positions of the chain;
//! * [`modes`] — the transverse mode matrix, its labeled spectrum, and the
//!   cusp the extreme modes develop at unit mass ratio;
//! * [`phonons`] — local-phonon mean, variance and correlations for a state
//!   with `n` phonons in the lowest-lying collective mode, and the
//!   condensed/conducting phase label;
//! * [`sweep`] — time-dependent optical-dipole-force sweeps that drive the
//!   effective mass ratio through the critical point, with non-adiabatic
//!   coupling diagnostics;
//! * [`oracle`] — brute-force evaluation of the same observables in a
//!   truncated Fock space, used to arbitrate every closed form.

pub mod crystal;
pub mod error;
pub mod modes;
pub mod oracle;
pub mod phonons;
pub mod sweep;

pub use crystal::{solve_equilibrium, EquilibriumPositions, TrapConfig};
pub use error::{Error, Result};
pub use modes::{build_matrix, diagonalize, spectrum_for, ModeMatrix, ModeSpectrum};
pub use phonons::{observables, Phase, PhononObservables, PhononState};
pub use sweep::{
    adiabatic_check, effective_mass_ratio, observables_along_sweep, run_sweep, AdiabaticReport,
    ScheduleLaw, SweepResult, SweepSchedule,
};
