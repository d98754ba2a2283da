use log::{debug, warn};

use crate::linalg::{eig_hermitian, CMatrix};
use crate::Complex64;
use crate::rsp::Assemblage;
use crate::sdp::{
    self, AffineExpr, BlockId, Field, LinearForm, LinearMap, SdpError, SdpProblem, SdpSolution, Sense, SolveStatus,
};
use crate::tomo::ProcessMatrix;

use super::model::{classical_chi_expr, classical_chi_from_model, responds, HiddenStateModel, NUM_HIDDEN};
use super::MetricsError;

/// Optimal F_Ec for any unitary target, (1+√3)/4. The solver reaches it to about 1e-9.
pub const F_EC_REFERENCE: f64 = 0.683_012_701_892_219_3;
/// (2F_Ec + 1)/3
pub const F_SC_REFERENCE: f64 = 0.788_675_134_594_812_9;
/// (3F̄_sc + 1)/4
pub const F_COMP_C_REFERENCE: f64 = 0.841_506_350_946_109_7;

/// Accepted iterates that hit the iteration cap still count when this close.
const LATE_ACCEPT: f64 = 1e-6;

/// Slack on the χ_expt preconditions.
const INPUT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub duality_gap: f64,
    pub feasibility_residual: f64,
    pub status: SolveStatus,
    /// Raw objective before clamping into the quantity's range.
    pub raw_value: f64,
}

impl SolverDiagnostics {
    fn of(sol: &SdpSolution, raw_value: f64) -> Self {
        Self {
            iterations: sol.iterations,
            duality_gap: sol.duality_gap,
            feasibility_residual: sol.feasibility_residual,
            status: sol.status,
            raw_value,
        }
    }
}

/// Result of a classical-model program: the quantity, the optimal model and its χ̃_c.
#[derive(Debug, Clone)]
pub struct ClassicalFit {
    pub value: f64,
    pub model: HiddenStateModel,
    pub chi_c: ProcessMatrix,
    pub diagnostics: SolverDiagnostics,
}

/// Output of [`classical_fidelity_bounds`].
#[derive(Debug, Clone)]
pub struct ClassicalBounds {
    pub f_ec: f64,
    pub f_sc: f64,
    pub f_comp_c: f64,
    /// Best classical process, tr χ_c = 1.
    pub chi_c: ProcessMatrix,
    pub model: HiddenStateModel,
    pub diagnostics: SolverDiagnostics,
}

pub fn f_sc_from_f_ec(f_ec: f64) -> f64 {
    (2.0 * f_ec + 1.0) / 3.0
}

pub fn f_comp_c_from_f_sc(f_sc: f64) -> f64 {
    (3.0 * f_sc + 1.0) / 4.0
}

fn check_process(chi: &ProcessMatrix) -> Result<(), MetricsError> {
    let tr = chi.trace();
    if (tr - 1.0).abs() > INPUT_SLACK {
        return Err(MetricsError::InvalidInput(format!("χ has trace {tr}, expected 1")));
    }
    let min = chi.min_eigenvalue();
    if min < -INPUT_SLACK {
        return Err(MetricsError::InvalidInput(format!("χ has eigenvalue {min:.3e}")));
    }
    Ok(())
}

struct ModelProgram {
    problem: SdpProblem,
    blocks: [BlockId; NUM_HIDDEN],
    chi: AffineExpr,
}

impl ModelProgram {
    fn new(sense: Sense) -> Self {
        let mut problem = SdpProblem::new(sense);
        let blocks = std::array::from_fn(|l| problem.add_block(format!("sigma{l}"), 2, Field::Complex));
        let chi = classical_chi_expr(&blocks);
        problem.add_psd("chi_c", chi.clone());
        Self { problem, blocks, chi }
    }

    fn total_weight(&self) -> LinearForm {
        self.blocks
            .iter()
            .fold(LinearForm::new(), |f, id| f.block(*id, CMatrix::identity(2)))
    }
}

fn run(problem: &SdpProblem, what: &str) -> Result<SdpSolution, MetricsError> {
    match sdp::solve(problem) {
        Ok(sol) => {
            debug!("{what}: {} iterations, gap {:.2e}", sol.iterations, sol.duality_gap);
            Ok(sol)
        }
        Err(SdpError::MaxIter(sol)) if sol.duality_gap < LATE_ACCEPT && sol.feasibility_residual < LATE_ACCEPT => {
            warn!("{what}: iteration cap reached, accepting gap {:.2e}", sol.duality_gap);
            Ok(*sol)
        }
        Err(e) => Err(MetricsError::Solver {
            program: what.to_string(),
            source: e,
        }),
    }
}

fn model_of(sol: &SdpSolution, blocks: &[BlockId; NUM_HIDDEN]) -> HiddenStateModel {
    HiddenStateModel::from_solver(blocks.iter().map(|id| sol.value(*id).clone()).collect())
}

/// Eigenvalues of χ_expt at or below this fraction of the largest span its kernel.
const FACE_TOL: f64 = 1e-10;

/// Range and kernel eigenvectors of a PSD matrix.
struct Face {
    range: Vec<Vec<Complex64>>,
    kernel: Vec<Vec<Complex64>>,
}

impl Face {
    fn of(m: &CMatrix) -> Result<Self, MetricsError> {
        let e = eig_hermitian(m)?;
        let cut = FACE_TOL * e.max().max(0.0);
        let (mut range, mut kernel) = (Vec::new(), Vec::new());
        for (k, &v) in e.values.iter().enumerate() {
            if v > cut {
                range.push(e.vector(k));
            } else {
                kernel.push(e.vector(k));
            }
        }
        Ok(Self { range, kernel })
    }

    /// V_r† X V_r
    fn compress(&self, x: &CMatrix) -> CMatrix {
        let r = self.range.len();
        let mut out = CMatrix::zeros(r);
        for (b, vb) in self.range.iter().enumerate() {
            let xb = x.apply(vb);
            for (a, va) in self.range.iter().enumerate() {
                out[(a, b)] = va.iter().zip(&xb).map(|(p, q)| p.conj() * q).sum();
            }
        }
        out
    }

    /// Hermitian F with tr(F X) = Re or Im of v_a† X v_b.
    fn component(va: &[Complex64], vb: &[Complex64], imag: bool) -> CMatrix {
        let ba = outer2(vb, va);
        let ab = outer2(va, vb);
        if imag {
            (&ba - &ab).scale_c(Complex64::new(0.0, -0.5))
        } else {
            (&ba + &ab).scale(0.5)
        }
    }

    /// Functionals whose vanishing on a PSD X is equivalent to X·kernel = 0.
    fn kernel_functionals(&self) -> Vec<CMatrix> {
        let mut out = Vec::new();
        for (i, q) in self.kernel.iter().enumerate() {
            for v in &self.range {
                out.push(Self::component(v, q, false));
                out.push(Self::component(v, q, true));
            }
            for q2 in &self.kernel[..=i] {
                out.push(Self::component(q2, q, false));
                if !std::ptr::eq(q2, q) {
                    out.push(Self::component(q2, q, true));
                }
            }
        }
        out
    }
}

/// |a⟩⟨b|
fn outer2(a: &[Complex64], b: &[Complex64]) -> CMatrix {
    let n = a.len();
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = a[i] * b[j].conj();
        }
    }
    m
}

/// α = 1 − max tr χ̃_c over classical models with χ̃_c ⪯ χ_expt.
///
/// When χ_expt is singular every feasible χ̃_c vanishes on its kernel, so the
/// program is posed on the range of χ_expt with χ̃_c·kernel = 0 as equalities.
/// Without this no point is strictly feasible and the interior-point method stalls.
pub fn quantum_composition_alpha(chi_expt: &ProcessMatrix) -> Result<ClassicalFit, MetricsError> {
    check_process(chi_expt)?;
    let face = Face::of(chi_expt.matrix())?;
    let mut problem = SdpProblem::new(Sense::Maximize);
    let blocks: [BlockId; NUM_HIDDEN] =
        std::array::from_fn(|l| problem.add_block(format!("sigma{l}"), 2, Field::Complex));
    let chi = classical_chi_expr(&blocks);
    problem.add_objective(
        blocks
            .iter()
            .fold(LinearForm::new(), |f, id| f.block(*id, CMatrix::identity(2))),
    );
    let residual = chi.clone().negate().plus_constant(chi_expt.matrix());
    if face.kernel.is_empty() {
        problem.add_psd("chi_c", chi);
        problem.add_psd("chi_expt - chi_c", residual);
    } else {
        for f in face.kernel_functionals() {
            problem.add_equality_affine(&chi, &f, 0.0);
        }
        let r = face.range.len();
        problem.add_psd("chi_c on range", chi.compose(r, |x| face.compress(x)));
        problem.add_psd("chi_expt - chi_c on range", residual.compose(r, |x| face.compress(x)));
    }
    let sol = run(&problem, "alpha")?;
    let model = model_of(&sol, &blocks);
    let raw = 1.0 - sol.objective_value;
    Ok(ClassicalFit {
        value: raw.clamp(0.0, 1.0),
        chi_c: classical_chi_from_model(&model),
        model,
        diagnostics: SolverDiagnostics::of(&sol, raw),
    })
}

/// β = min tr χ̃_c − 1 over classical models with χ̃_c ⪰ χ_expt and tr χ̃_c ≥ 1.
/// The model carries total weight 1 + β.
pub fn quantum_robustness_beta(chi_expt: &ProcessMatrix) -> Result<ClassicalFit, MetricsError> {
    check_process(chi_expt)?;
    let mut prog = ModelProgram::new(Sense::Minimize);
    let weight = prog.total_weight();
    prog.problem.add_objective(weight.clone());
    prog.problem.add_inequality(weight, 1.0);
    let excess = prog.chi.clone().plus_constant(&chi_expt.matrix().scale(-1.0));
    prog.problem.add_psd("chi_c - chi_expt", excess);
    let sol = run(&prog.problem, "beta")?;
    let model = model_of(&sol, &prog.blocks);
    let raw = sol.objective_value - 1.0;
    Ok(ClassicalFit {
        value: raw.max(0.0),
        chi_c: classical_chi_from_model(&model),
        model,
        diagnostics: SolverDiagnostics::of(&sol, raw),
    })
}

/// χ_noise = (χ̃_c − χ_expt)/β for the β model; None when β vanishes.
pub fn noise_process(chi_expt: &ProcessMatrix, fit: &ClassicalFit) -> Option<ProcessMatrix> {
    (fit.value > 1e-6).then(|| {
        let m = (fit.chi_c.matrix() - chi_expt.matrix()).scale(1.0 / fit.value);
        ProcessMatrix::from_matrix(m).expect("difference of Hermitian matrices")
    })
}

/// χ_Q = (χ_expt − χ̃_c)/α for the α model; None when α vanishes.
pub fn quantum_process(chi_expt: &ProcessMatrix, fit: &ClassicalFit) -> Option<ProcessMatrix> {
    (fit.value > 1e-6).then(|| {
        let m = (chi_expt.matrix() - fit.chi_c.matrix()).scale(1.0 / fit.value);
        ProcessMatrix::from_matrix(m).expect("difference of Hermitian matrices")
    })
}

/// F_Ec = max tr(χ̃_c χ_rsp) with tr χ̃_c = 1, and the derived state-fidelity limits.
pub fn classical_fidelity_bounds(chi_rsp: &ProcessMatrix) -> Result<ClassicalBounds, MetricsError> {
    check_process(chi_rsp)?;
    let mut prog = ModelProgram::new(Sense::Maximize);
    prog.problem.add_objective_affine(&prog.chi, chi_rsp.matrix());
    let weight = prog.total_weight();
    prog.problem.add_equality(weight, 1.0);
    let sol = run(&prog.problem, "classical fidelity")?;
    let model = model_of(&sol, &prog.blocks);
    let f_ec = sol.objective_value;
    let f_sc = f_sc_from_f_ec(f_ec);
    Ok(ClassicalBounds {
        f_ec,
        f_sc,
        f_comp_c: f_comp_c_from_f_sc(f_sc),
        chi_c: classical_chi_from_model(&model),
        model,
        diagnostics: SolverDiagnostics::of(&sol, f_ec),
    })
}

/// Result of [`steerable_weight`].
#[derive(Debug, Clone)]
pub struct SteerableWeight {
    pub value: f64,
    /// Unsteerable part σ_λ of the assemblage.
    pub sigma: Vec<CMatrix>,
    pub diagnostics: SolverDiagnostics,
}

/// SW = 1 − max Σ tr σ_λ with ρ′_{nm} − Σ_{λ→(n,m)} σ_λ ⪰ 0.
pub fn steerable_weight(assemblage: &Assemblage) -> Result<SteerableWeight, MetricsError> {
    for m in 1..=3 {
        for n in 0..2 {
            let min = eig_hermitian(assemblage.member(m, n))?.min();
            if min < -INPUT_SLACK {
                return Err(MetricsError::InvalidInput(format!(
                    "assemblage member ({m},{n}) has eigenvalue {min:.3e}"
                )));
            }
        }
    }
    let mut p = SdpProblem::new(Sense::Maximize);
    let blocks: Vec<BlockId> = (0..NUM_HIDDEN)
        .map(|l| p.add_block(format!("sigma{l}"), 2, Field::Complex))
        .collect();
    p.add_objective(
        blocks
            .iter()
            .fold(LinearForm::new(), |f, id| f.block(*id, CMatrix::identity(2))),
    );
    for m in 1..=3 {
        for n in 0..2 {
            let expr = blocks
                .iter()
                .enumerate()
                .filter(|(l, _)| responds(*l, m, n))
                .fold(AffineExpr::constant(assemblage.member(m, n).clone()), |e, (_, id)| {
                    e.plus_block(*id, LinearMap::scaled_identity(2, -1.0))
                });
            p.add_psd(format!("rho{m}{n} - sigma"), expr);
        }
    }
    let sol = run(&p, "steerable weight")?;
    let raw = 1.0 - sol.objective_value;
    Ok(SteerableWeight {
        value: raw.clamp(0.0, 1.0),
        sigma: blocks.iter().map(|id| sol.value(*id).clone()).collect(),
        diagnostics: SolverDiagnostics::of(&sol, raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::model::hidden_outcomes;
    use crate::qstate::{bloch_matrix, make_werner, singlet, QubitDensity, TwoQubitDensity};
    use crate::rsp::{simulate_rsp_outputs, steered_assemblage, EXPERIMENT_PHIS};
    use crate::tomo::{chi_target, process_tomography};

    fn werner_chi(p: f64) -> ProcessMatrix {
        process_tomography(&simulate_rsp_outputs(&make_werner(p).unwrap(), 0.0)).unwrap()
    }

    #[test]
    fn reference_constants_follow_the_conversions() {
        assert!((f_sc_from_f_ec(F_EC_REFERENCE) - F_SC_REFERENCE).abs() < 1e-15);
        assert!((f_comp_c_from_f_sc(F_SC_REFERENCE) - F_COMP_C_REFERENCE).abs() < 1e-15);
    }

    #[test]
    fn ideal_target_robustness() {
        let fit = quantum_robustness_beta(&chi_target(0.0)).unwrap();
        assert!((fit.value - (2.0 * 3f64.sqrt() - 3.0)).abs() < 1e-5, "{}", fit.value);
        assert!((fit.model.total_weight() - 1.0 - fit.value).abs() < 1e-5);
        let noise = noise_process(&chi_target(0.0), &fit).unwrap();
        assert!(noise.min_eigenvalue() > -1e-6);
    }

    #[test]
    fn ideal_target_composition() {
        let fit = quantum_composition_alpha(&chi_target(0.0)).unwrap();
        assert!((fit.value - 1.0).abs() < 1e-6, "{}", fit.value);
    }

    #[test]
    fn depolarizing_is_classical() {
        let dep = ProcessMatrix::completely_depolarizing();
        assert!(quantum_composition_alpha(&dep).unwrap().value < 1e-6);
        assert!(quantum_robustness_beta(&dep).unwrap().value < 1e-6);
    }

    #[test]
    fn bounds_match_reference() {
        let b = classical_fidelity_bounds(&chi_target(0.0)).unwrap();
        assert!((b.f_ec - F_EC_REFERENCE).abs() < 1e-6, "{:.16}", b.f_ec);
        assert!((b.chi_c.trace() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_are_phi_independent() {
        for phi in EXPERIMENT_PHIS {
            let b = classical_fidelity_bounds(&chi_target(phi)).unwrap();
            assert!((b.f_sc - F_SC_REFERENCE).abs() < 1e-6, "φ={phi}: {}", b.f_sc);
        }
    }

    #[test]
    fn explicit_strategy_is_below_the_optimum() {
        // σ_λ = R ρ(v_λ/√3) R† / 8
        let r = crate::rsp::rotation_unitary(0.0);
        let sigma = std::array::from_fn(|l| {
            let v = hidden_outcomes(l).map(|x| x as f64 / 3f64.sqrt());
            bloch_matrix(&v).conjugate_by(&r).scale(1.0 / 8.0)
        });
        let model = HiddenStateModel::new(sigma).unwrap();
        let chi = classical_chi_from_model(&model);
        let f = chi.process_fidelity(&chi_target(0.0));
        assert!(f <= F_EC_REFERENCE + 1e-7, "{f}");
        assert!(f > 0.6, "{f}");
    }

    #[test]
    fn werner_threshold() {
        let pc = 1.0 - 1.0 / 3f64.sqrt();
        for p in [pc + 0.02, 0.6] {
            let chi = werner_chi(p);
            assert!(quantum_robustness_beta(&chi).unwrap().value < 1e-5, "p={p}");
            assert!(quantum_composition_alpha(&chi).unwrap().value < 1e-5, "p={p}");
        }
        let chi = werner_chi(pc - 0.05);
        assert!(quantum_robustness_beta(&chi).unwrap().value > 1e-3);
        assert!(quantum_composition_alpha(&chi).unwrap().value > 1e-3);
    }

    #[test]
    fn singlet_weight_is_one() {
        let sw = steerable_weight(&steered_assemblage(&singlet())).unwrap();
        assert!((sw.value - 1.0).abs() < 1e-5, "{}", sw.value);
    }

    #[test]
    fn product_state_has_no_weight() {
        let a = QubitDensity::from_bloch([0.2, -0.3, 0.5]).unwrap();
        let b = QubitDensity::from_bloch([0.0, 0.6, 0.1]).unwrap();
        let sw = steerable_weight(&steered_assemblage(&TwoQubitDensity::product(&a, &b))).unwrap();
        assert!(sw.value < 1e-6, "{}", sw.value);
    }

    #[test]
    fn rejects_unnormalized_process() {
        let chi = ProcessMatrix::from_matrix(CMatrix::identity(4).scale(0.5)).unwrap();
        assert!(matches!(quantum_composition_alpha(&chi), Err(MetricsError::InvalidInput(_))));
    }
}
