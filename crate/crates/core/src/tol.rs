//! Numerical tolerances shared by every module.
//!
//! Acceptance runs tune these in one place; nothing else in the crate
//! hard-codes a comparison threshold for state validity.

/// Tolerance record. Use [`TOL`] unless a caller needs a custom slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |M - M†| for a matrix built to be Hermitian.
    pub hermitian: f64,
    /// Max |M - M†| accepted as input to the Hermitian eigensolver.
    pub hermitian_input: f64,
    /// Slack on eigenvalues and traces when validating states and channels.
    pub psd_slack: f64,
    /// Max |M - VΛV†| and |V†V - I| for eigendecompositions.
    pub reconstruction: f64,
    /// Eigenvalues below `-sqrt_clip` are reported as unphysical; all
    /// negative eigenvalues are clipped to zero before taking square roots.
    pub sqrt_clip: f64,
    /// Relative gap below which eigenvalues are treated as one degenerate cluster.
    pub degeneracy: f64,
    /// Slack on eigenvalues of the 2-decimal matrices printed with the experiment.
    pub rounded_fixture: f64,
}

pub const TOL: Tolerances = Tolerances {
    hermitian: 1e-12,
    hermitian_input: 1e-9,
    psd_slack: 1e-9,
    reconstruction: 1e-10,
    sqrt_clip: 1e-10,
    degeneracy: 1e-9,
    rounded_fixture: 1e-3,
};
