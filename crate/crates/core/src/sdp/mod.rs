//! Small block-diagonal semidefinite programs over Hermitian variables.
//!
//! Problems are stated with [`SdpProblem`], compiled to a real symmetric
//! standard form by [`embed_real`] and solved by a primal-dual interior-point
//! method. No external solver is involved.

mod embed;
mod ipm;
mod problem;

use thiserror::Error;

pub use embed::{embed_hermitian, embed_real, hermitian_basis, recover_hermitian, RealConstraint, RealSdp};
pub use ipm::{IterateInfo, SolverOptions};
pub use problem::{
    AffineExpr, BlockId, BlockSpec, Field, LinearForm, LinearMap, ScalarId, SdpProblem, Sense,
};

use crate::linalg::CMatrix;
use ipm::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    NumericalFailure,
}

/// Which side of the problem was found infeasible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    Primal,
    /// The primal objective is unbounded.
    Dual,
}

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("{0:?} infeasible (diverging objective)")]
    Infeasible(Infeasibility),
    #[error("no convergence after {} iterations (gap {:.2e}, residual {:.2e})", .0.iterations, .0.duality_gap, .0.feasibility_residual)]
    MaxIter(Box<SdpSolution>),
    #[error("numerical breakdown after {} iterations (gap {:.2e}, residual {:.2e})", .0.iterations, .0.duality_gap, .0.feasibility_residual)]
    NumericalFailure(Box<SdpSolution>),
}

/// Solver result in terms of the original problem.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub values: Vec<CMatrix>,
    pub scalars: Vec<f64>,
    /// Objective of the original problem (with its own sense and offset).
    pub objective_value: f64,
    /// Dual bound on the same scale as `objective_value`.
    pub dual_objective_value: f64,
    /// Relative duality gap.
    pub duality_gap: f64,
    /// Larger of the relative primal and dual residuals.
    pub feasibility_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Standard-form iteration log.
    pub history: Vec<IterateInfo>,
    /// Equality multipliers of the standard form.
    pub dual: Vec<f64>,
}

impl SdpSolution {
    pub fn value(&self, id: BlockId) -> &CMatrix {
        &self.values[id.0]
    }

    pub fn scalar(&self, id: ScalarId) -> f64 {
        self.scalars[id.0]
    }

    pub fn evaluate(&self, expr: &AffineExpr) -> CMatrix {
        expr.evaluate(&self.values, &self.scalars)
    }
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution, SdpError> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    let sf = embed_real(problem)?;
    solve_standard_form(&sf, opts)
}

/// Solves an already compiled problem.
pub fn solve_standard_form(sf: &RealSdp, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    let raw = ipm::solve_standard(sf, opts);
    let status = match raw.outcome {
        Outcome::Converged | Outcome::Stalled => SolveStatus::Optimal,
        Outcome::MaxIter => SolveStatus::MaxIter,
        Outcome::Breakdown => SolveStatus::NumericalFailure,
        Outcome::PrimalInfeasible => return Err(SdpError::Infeasible(Infeasibility::Primal)),
        Outcome::DualInfeasible => return Err(SdpError::Infeasible(Infeasibility::Dual)),
    };
    let (pobj, dobj) = (raw.info.primal_objective, raw.info.dual_objective);
    let solution = SdpSolution {
        values: sf.recover_blocks(&raw.x),
        scalars: raw.u,
        objective_value: sf.user_objective(pobj),
        dual_objective_value: sf.user_objective(dobj),
        duality_gap: raw.info.rel_gap,
        feasibility_residual: raw.info.primal_infeasibility.max(raw.info.dual_infeasibility),
        iterations: raw.history.len().saturating_sub(1),
        status,
        history: raw.history,
        dual: raw.y,
    };
    match status {
        SolveStatus::Optimal => Ok(solution),
        SolveStatus::MaxIter => Err(SdpError::MaxIter(Box::new(solution))),
        SolveStatus::NumericalFailure => Err(SdpError::NumericalFailure(Box::new(solution))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;
    use crate::qstate::random_density;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lambda_min_program(h: &CMatrix) -> (SdpProblem, ScalarId) {
        let n = h.dim();
        let mut p = SdpProblem::new(Sense::Maximize);
        let t = p.add_scalar("t");
        p.add_objective(LinearForm::new().scalar(t, 1.0));
        p.add_psd(
            "h - t",
            AffineExpr::constant(h.clone()).plus_scalar(t, CMatrix::identity(n).scale(-1.0)),
        );
        (p, t)
    }

    #[test]
    fn trace_minimization_returns_centered_point() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block("x", 2, Field::Complex);
        p.add_objective(LinearForm::new().block(x, CMatrix::identity(2)));
        p.add_equality(LinearForm::new().block(x, CMatrix::identity(2)), 1.0);
        let sol = solve(&p).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-7);
        assert!(sol.value(x).max_abs_diff(&CMatrix::diag(&[0.5, 0.5])) < 1e-6);
    }

    #[test]
    fn lambda_min_of_diagonal() {
        let (p, t) = lambda_min_program(&CMatrix::diag(&[0.3, 0.9]));
        let sol = solve(&p).unwrap();
        assert!((sol.scalar(t) - 0.3).abs() < 1e-7, "{}", sol.scalar(t));
        assert!((sol.objective_value - 0.3).abs() < 1e-7);
    }

    #[test]
    fn lambda_min_of_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = &random_density(4, &mut rng) - &random_density(4, &mut rng);
            let (p, t) = lambda_min_program(&h);
            let sol = solve(&p).unwrap();
            let want = eig_hermitian(&h).unwrap().min();
            assert!((sol.scalar(t) - want).abs() < 1e-7, "{} vs {want}", sol.scalar(t));
        }
    }

    #[test]
    fn infeasible_problem_is_detected() {
        // tr X = −1 with X ⪰ 0
        let mut p = SdpProblem::new(Sense::Minimize);
        let x = p.add_block("x", 2, Field::Real);
        p.add_objective(LinearForm::new().block(x, CMatrix::identity(2)));
        p.add_equality(LinearForm::new().block(x, CMatrix::identity(2)), -1.0);
        assert!(matches!(solve(&p), Err(SdpError::Infeasible(Infeasibility::Primal))));
    }

    #[test]
    fn identical_problems_give_identical_iterates() {
        let (p, _) = lambda_min_program(&CMatrix::diag(&[0.1, 0.4, 0.7]));
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.values, b.values);
    }
}
