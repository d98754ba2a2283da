//! Classical hidden-state models of the protocol and the quantities built on them.

mod fidelity;
mod model;
mod programs;
mod report;

use thiserror::Error;

pub use fidelity::{
    avg_state_fidelity, bloch_comparison, complementary_fidelity, complementary_fidelity_chi,
    complementary_fidelity_of_outputs, BlochSample, DEFAULT_COMP_BASES,
};
pub use model::{
    classical_chi_expr, classical_chi_from_model, hidden_outcomes, hidden_state_map, responds, HiddenStateModel,
    CONDITIONAL_WEIGHT, NUM_HIDDEN,
};
pub use programs::{
    classical_fidelity_bounds, f_comp_c_from_f_sc, f_sc_from_f_ec, noise_process, quantum_composition_alpha,
    quantum_process, quantum_robustness_beta, steerable_weight, ClassicalBounds, ClassicalFit, SolverDiagnostics,
    SteerableWeight, F_COMP_C_REFERENCE, F_EC_REFERENCE, F_SC_REFERENCE,
};
pub use report::{Criteria, SteeringReport, ZERO_STEERING};

use crate::linalg::LinalgError;
use crate::sdp::SdpError;
use crate::tomo::TomoError;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("invalid hidden-state model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("complementary bases must differ (both are {0})")]
    SameBasis(usize),
    #[error("{program} program failed: {source}")]
    Solver {
        program: String,
        #[source]
        source: SdpError,
    },
    #[error(transparent)]
    Tomography(#[from] TomoError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
