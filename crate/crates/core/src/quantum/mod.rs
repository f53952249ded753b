//! Mixed-state Pauli(–Poisson) dynamics and observables.

pub mod hamiltonian;
pub mod krylov;
pub mod observables;
pub mod propagate;
pub mod state;

pub use hamiltonian::{apply_pauli_hamiltonian, apply_pauli_identity_form, Hamiltonian};
pub use krylov::KrylovOptions;
pub use observables::{
    charge_energy, current, current_compact, current_parts, density, lp_norm, spin_density,
    CurrentParts, Observables,
};
pub use propagate::{
    continuity_residual, evolve_pauli_poisson, propagate_step, EvolveOptions, PropagatorOptions,
    StepRecord, Stepper, Trajectory,
};
pub use state::{build_mixed_state, coherent_state, ensemble_size, EnsembleSpec, MixedState};
