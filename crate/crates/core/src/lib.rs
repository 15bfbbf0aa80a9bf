//! Single-photon transport between one-dimensional waveguides bridged by
//! multi-point ("giant") two-level emitters.
//!
//! * [`model`]: system description and reduced two-atom parameters.
//! * [`closed_form`]: analytic amplitudes for two giant atoms on two waveguides.
//! * [`realspace`]: exact boundary-condition solver for arbitrary layouts.
//! * [`sweep`]: parameter grids, figure presets and CSV output.
//! * [`audit`]: randomized invariant checks.

pub mod audit;
pub mod closed_form;
pub mod linalg;
pub mod model;
pub mod realspace;
pub mod sweep;

pub use closed_form::{
    amplitudes_eigen, amplitudes_full, amplitudes_matched, classify_condition, collective_params,
    degeneracy_coupling, ClosedFormError, ConditionReport,
};
pub use model::{
    two_atom_to_system, validate_system, CollectiveParams, ScatteringAmplitudes,
    ScatteringProbabilities, SystemSpec, TwoAtomParams,
};
pub use realspace::{solve, Direction, ScatteringProblem, SolveResult, SolverError};
