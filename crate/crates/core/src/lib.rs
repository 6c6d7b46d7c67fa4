//! Two qubits resonantly coupled to a single bosonic resonator mode under the
//! rotating-wave (two-qubit Jaynes-Cummings) Hamiltonian, with a homodyne
//! x-quadrature measurement protocol that heralds maximally entangled qubit
//! pairs of the form (|gg> + e^{-i phi}|ee>)/sqrt(2).
//!
//! Conventions used throughout: hbar = 1, the quadrature is the dimensionless
//! x = a + a^dag (coherent blob centred at 2 sqrt(nbar) cos(theta), unit
//! density variance), and the Husimi Q-function carries no 1/pi prefactor.

pub mod asymptotic;
pub mod dynamics;
mod error;
pub mod hilbert;
pub mod observables;
pub mod protocol;

pub use error::Error;

pub type C64 = num_complex::Complex64;

pub use dynamics::{build_block, evolve_analytic, evolve_numeric, ExcitationBlock, Propagator};
pub use hilbert::{
    coherent_coefficients, initial_state, CoherentPrep, JointState, QubitLabel, SystemParams,
};
pub use observables::{
    build_quadrature_basis, p_gg_trace, q_function, quadrature_slice, reduce_to_qubits,
    QuadratureBasis, QuadratureSlice, QubitDensityMatrix,
};
pub use protocol::{
    blurred_outcome, conditional_state, ideal_width, plateau_center, sample_outcome,
    sample_outcomes, success_curves, success_probability, width_analysis, HeraldedOutcome,
    OutcomeSampler, SuccessCurve, TargetState, WidthFitResult,
};
