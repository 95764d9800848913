//! Exact finite-`N` dynamics in the `(2J+1)`-dimensional Dicke basis.

mod evolution;
mod hamiltonian;
mod operators;

pub use evolution::{
    autonomous_average_x, check_quantum_step, coherent_state, driven_average_x, evolve_autonomous,
    evolve_driven, evolve_with_spectrum, hamiltonian_scale, time_averaged_magnetization,
    MAX_PHASE_PER_STEP, NORM_DRIFT_LIMIT,
};
pub use hamiltonian::{eigendecompose, HamiltonianSpec, Spectrum};
pub use operators::{
    build_operators, build_operators_capped, ladder_coefficients, spin_expectations,
    CollectiveOperators, C64, DENSE_CAP,
};
