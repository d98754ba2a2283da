use crate::linalg::{check_state, eig_hermitian, CMatrix};
use crate::rsp::OutputSextet;
use crate::sdp::{AffineExpr, BlockId, LinearMap};
use crate::tomo::{chi_linear, ProcessMatrix};

use super::MetricsError;

pub const NUM_HIDDEN: usize = 8;

/// Outcome triple v_λ for λ = 4n₁ + 2n₂ + n₃ (zero-based), v_λ[m] = (−1)^{n_m}.
pub fn hidden_outcomes(lambda: usize) -> [i8; 3] {
    assert!(lambda < NUM_HIDDEN, "hidden index {lambda} out of range");
    [2, 1, 0].map(|shift| if (lambda >> shift) & 1 == 0 { 1 } else { -1 })
}

/// True when hidden variable λ answers outcome n for measurement m.
pub fn responds(lambda: usize, m: usize, n: usize) -> bool {
    let sign = if n == 0 { 1 } else { -1 };
    hidden_outcomes(lambda)[m - 1] == sign
}

/// Eight sub-normalized hidden states σ_λ. Each σ_λ absorbs the hidden
/// probability, so the total weight Σ tr σ_λ equals tr χ̃_c.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateModel {
    sigma: [CMatrix; NUM_HIDDEN],
}

/// Classical outputs are O^c_{nm} = CONDITIONAL_WEIGHT · Σ_{λ responding n to m} σ_λ,
/// the inverse of the uniform marginal p(v_nm) = ½.
pub const CONDITIONAL_WEIGHT: f64 = 2.0;

impl HiddenStateModel {
    /// Checks each σ_λ is a 2×2 PSD matrix.
    pub fn new(sigma: [CMatrix; NUM_HIDDEN]) -> Result<Self, MetricsError> {
        for (l, s) in sigma.iter().enumerate() {
            if s.dim() != 2 {
                return Err(MetricsError::InvalidModel(format!("σ_{l} is not 2×2")));
            }
            let tr = s.trace_re();
            if tr > 0.0 {
                // validate the normalized state so the slack is relative
                check_state(&s.scale(1.0 / tr), 1e-7)
                    .map_err(|e| MetricsError::InvalidModel(format!("σ_{l}: {e}")))?;
            } else if s.max_abs() > 1e-9 {
                return Err(MetricsError::InvalidModel(format!("σ_{l} has trace {tr}")));
            }
        }
        Ok(Self { sigma })
    }

    /// Trusts solver output; tiny negative eigenvalues are clipped.
    pub(crate) fn from_solver(values: Vec<CMatrix>) -> Self {
        let sigma: Vec<CMatrix> = values
            .into_iter()
            .map(|s| {
                let e = eig_hermitian(&s.hermitize()).expect("solver blocks are Hermitian");
                let clipped: Vec<f64> = e.values.iter().map(|v| v.max(0.0)).collect();
                e.reassemble(&clipped)
            })
            .collect();
        Self {
            sigma: sigma.try_into().expect("eight hidden states"),
        }
    }

    pub fn sigma(&self, lambda: usize) -> &CMatrix {
        &self.sigma[lambda]
    }

    pub fn total_weight(&self) -> f64 {
        self.sigma.iter().map(|s| s.trace_re()).sum()
    }

    pub fn classical_outputs(&self) -> OutputSextet {
        OutputSextet::from_fn(|m, n| {
            let mut acc = CMatrix::zeros(2);
            for (l, s) in self.sigma.iter().enumerate() {
                if responds(l, m, n) {
                    acc += s;
                }
            }
            acc.scale(CONDITIONAL_WEIGHT)
        })
    }
}

/// χ̃_c of a hidden-state model, by the same linear map as process tomography.
/// Not normalized: tr χ̃_c = Σ tr σ_λ.
pub fn classical_chi_from_model(model: &HiddenStateModel) -> ProcessMatrix {
    ProcessMatrix::from_matrix(chi_linear(&model.classical_outputs()).hermitize())
        .expect("classical χ is a Hermitian 4×4 matrix")
}

/// Linear map σ_λ ↦ its contribution to χ̃_c.
pub fn hidden_state_map(lambda: usize) -> LinearMap {
    LinearMap::from_fn(2, 4, |x| {
        let sextet = OutputSextet::from_fn(|m, n| {
            if responds(lambda, m, n) {
                x.scale(CONDITIONAL_WEIGHT)
            } else {
                CMatrix::zeros(2)
            }
        });
        chi_linear(&sextet)
    })
}

/// χ̃_c as an affine expression in the eight σ blocks.
pub fn classical_chi_expr(blocks: &[BlockId; NUM_HIDDEN]) -> AffineExpr {
    blocks
        .iter()
        .enumerate()
        .fold(AffineExpr::zero(4), |e, (l, id)| e.plus_block(*id, hidden_state_map(l)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::bloch_matrix;
    use crate::rsp::basis_state;

    #[test]
    fn outcome_labels() {
        assert_eq!(hidden_outcomes(0), [1, 1, 1]);
        assert_eq!(hidden_outcomes(1), [1, 1, -1]);
        assert_eq!(hidden_outcomes(4), [-1, 1, 1]);
        assert_eq!(hidden_outcomes(7), [-1, -1, -1]);
    }

    #[test]
    fn uniform_mixed_model_is_depolarizing() {
        let m = HiddenStateModel::new(std::array::from_fn(|_| CMatrix::identity(2).scale(1.0 / 16.0))).unwrap();
        let chi = classical_chi_from_model(&m);
        assert!(chi.matrix().max_abs_diff(ProcessMatrix::completely_depolarizing().matrix()) < 1e-12);
        assert!((m.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outputs_share_the_identity_image() {
        let sigma = std::array::from_fn(|l| bloch_matrix(&[0.1 * l as f64 / 8.0, 0.0, 0.05]).scale(0.1));
        let m = HiddenStateModel::new(sigma).unwrap();
        let o = m.classical_outputs();
        let first = o.get(1, 0) + o.get(1, 1);
        for k in 2..=3 {
            assert!((o.get(k, 0) + o.get(k, 1)).max_abs_diff(&first) < 1e-15);
        }
    }

    #[test]
    fn single_hidden_state_outputs() {
        // σ_0 = |0⟩⟨0| answers + to every measurement
        let mut sigma: [CMatrix; 8] = std::array::from_fn(|_| CMatrix::zeros(2));
        sigma[0] = basis_state(3, 0);
        let m = HiddenStateModel::new(sigma).unwrap();
        let o = m.classical_outputs();
        for k in 1..=3 {
            assert!(o.get(k, 0).max_abs_diff(&basis_state(3, 0).scale(2.0)) < 1e-15);
            assert!(o.get(k, 1).max_abs() < 1e-15);
        }
        // E(ρ_s) = (1 + s₁ + s₂ + s₃)|0⟩⟨0|
        let chi = classical_chi_from_model(&m);
        let s = [0.6, 0.0, 0.8];
        let out = chi.apply(&bloch_matrix(&s));
        assert!(out.max_abs_diff(&basis_state(3, 0).scale(1.0 + 0.6 + 0.8)) < 1e-12);
    }

    #[test]
    fn map_agrees_with_model() {
        let sigma: [CMatrix; 8] = std::array::from_fn(|l| {
            bloch_matrix(&[0.3 * (l as f64 - 3.5) / 4.0, 0.2, -0.1]).scale(0.05 + 0.01 * l as f64)
        });
        let m = HiddenStateModel::new(sigma.clone()).unwrap();
        let mut via_maps = CMatrix::zeros(4);
        for (l, s) in sigma.iter().enumerate() {
            via_maps += &hidden_state_map(l).apply(s);
        }
        assert!(via_maps.max_abs_diff(classical_chi_from_model(&m).matrix()) < 1e-14);
    }

    #[test]
    fn rejects_non_psd_member() {
        let mut sigma: [CMatrix; 8] = std::array::from_fn(|_| CMatrix::zeros(2));
        sigma[3] = CMatrix::diag(&[0.5, -0.1]);
        assert!(HiddenStateModel::new(sigma).is_err());
    }
}
