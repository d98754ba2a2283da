//! The RSP protocol as a channel on Bob's qubit.
//!
//! Tomography inputs are the Pauli eigenstates |n⟩_m, with |0⟩_m the +x̂, +ŷ,
//! +ẑ Bloch directions for m = 1, 2, 3. Alice measures in the rotated basis
//! U|k⟩_m and Bob applies C_m = U F_m U† on one of the two branches.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    check_state, kron, partial_trace, pauli, CMatrix, LinalgError, MatrixFile, MatrixFileError,
    Subsystem, ONE, ZERO,
};
use crate::qstate::{QubitDensity, TwoQubitDensity};
use crate::tol::TOL;
use crate::tomo::ProcessMatrix;

#[derive(Debug, Error)]
pub enum RspError {
    #[error(transparent)]
    NotAState(#[from] LinalgError),
    #[error("missing output {0}")]
    MissingOutput(String),
    #[error(transparent)]
    File(#[from] MatrixFileError),
}

/// R(φ) = (|0⟩⟨0| + e^{iφ}|1⟩⟨0| + |0⟩⟨1| − e^{iφ}|1⟩⟨1|)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub phi: f64,
}

impl RotationParams {
    pub fn unitary(&self) -> CMatrix {
        rotation_unitary(self.phi)
    }
}

pub fn rotation_unitary(phi: f64) -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e = Complex64::from_polar(r, phi);
    CMatrix::from_rows(&[
        vec![Complex64::new(r, 0.0), Complex64::new(r, 0.0)],
        vec![e, -e],
    ])
}

/// The four rotation angles used in the experiment.
pub const EXPERIMENT_PHIS: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_2,
    std::f64::consts::PI,
    3.0 * std::f64::consts::FRAC_PI_2,
];

/// Ket |n⟩_m of the Pauli-m eigenbasis, m ∈ {1,2,3}, n ∈ {0,1}.
pub fn basis_ket(m: usize, n: usize) -> [Complex64; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sign = if n == 0 { 1.0 } else { -1.0 };
    match (m, n) {
        (1, _) => [Complex64::new(r, 0.0), Complex64::new(sign * r, 0.0)],
        (2, _) => [Complex64::new(r, 0.0), Complex64::new(0.0, sign * r)],
        (3, 0) => [ONE, ZERO],
        (3, 1) => [ZERO, ONE],
        _ => panic!("basis index m = {m}, n = {n} out of range"),
    }
}

pub fn basis_state(m: usize, n: usize) -> CMatrix {
    CMatrix::outer(&basis_ket(m, n))
}

/// Pauli F_m swapping |0⟩_m and |1⟩_m up to phase.
pub fn basis_flip(m: usize) -> CMatrix {
    match m {
        1 | 2 => pauli(3),
        3 => pauli(1),
        _ => panic!("basis index m = {m} out of range"),
    }
}

/// Bob's correction C_m = U F_m U†.
pub fn correction(phi: f64, m: usize) -> CMatrix {
    basis_flip(m).conjugate_by(&rotation_unitary(phi))
}

/// ρ ↦ R(φ) ρ R(φ)†.
pub fn ideal_rsp_apply(phi: f64, rho_in: &QubitDensity) -> QubitDensity {
    let out = rho_in.matrix().conjugate_by(&rotation_unitary(phi)).hermitize();
    QubitDensity::new(out).expect("unitary image of a state is a state")
}

/// Six channel outputs O_{nm} = E(|n⟩_m⟨n|).
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSextet {
    outputs: [[CMatrix; 2]; 3],
}

impl OutputSextet {
    /// `outputs[m-1][n]`.
    pub fn new(outputs: [[CMatrix; 2]; 3]) -> Self {
        Self { outputs }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> CMatrix) -> Self {
        Self {
            outputs: [1, 2, 3].map(|m| [f(m, 0), f(m, 1)]),
        }
    }

    pub fn get(&self, m: usize, n: usize) -> &CMatrix {
        &self.outputs[m - 1][n]
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &CMatrix)> {
        (1..=3).flat_map(move |m| (0..2).map(move |n| ((m, n), self.get(m, n))))
    }

    pub fn key(m: usize, n: usize) -> String {
        format!("m{m}n{n}")
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, MatrixFile> = self
            .iter()
            .map(|((m, n), o)| (Self::key(m, n), MatrixFile::from_matrix(o)))
            .collect();
        serde_json::to_string_pretty(&map).expect("sextet serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self, RspError> {
        let mut map: BTreeMap<String, MatrixFile> =
            serde_json::from_str(json).map_err(MatrixFileError::from)?;
        let mut take = |m: usize, n: usize| -> Result<CMatrix, RspError> {
            let key = Self::key(m, n);
            map.remove(&key)
                .ok_or(RspError::MissingOutput(key))?
                .to_matrix()
                .map_err(RspError::from)
        };
        let mut outputs: Vec<[CMatrix; 2]> = Vec::with_capacity(3);
        for m in 1..=3 {
            outputs.push([take(m, 0)?, take(m, 1)?]);
        }
        let outputs: [[CMatrix; 2]; 3] = outputs.try_into().expect("three bases");
        Ok(Self { outputs })
    }
}

/// Bob's unnormalized conditional states after Alice measures Pauli m with outcome n.
#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    members: [[CMatrix; 2]; 3],
}

impl Assemblage {
    pub fn new(members: [[CMatrix; 2]; 3]) -> Self {
        Self { members }
    }

    /// ρ′_{nm}
    pub fn member(&self, m: usize, n: usize) -> &CMatrix {
        &self.members[m - 1][n]
    }

    /// p(v_{nm}) = tr ρ′_{nm}
    pub fn probability(&self, m: usize, n: usize) -> f64 {
        self.member(m, n).trace_re()
    }

    /// Σ_n ρ′_{nm}
    pub fn marginal(&self, m: usize) -> CMatrix {
        self.member(m, 0) + self.member(m, 1)
    }

    /// Largest deviation between the three marginals.
    pub fn no_signaling_residual(&self) -> f64 {
        let first = self.marginal(1);
        (2..=3)
            .map(|m| self.marginal(m).max_abs_diff(&first))
            .fold(0.0, f64::max)
    }
}

/// tr_A[(P ⊗ I) ρ_AB]
fn steer(rho_ab: &CMatrix, alice_projector: &CMatrix) -> CMatrix {
    let op = kron(alice_projector, &CMatrix::identity(2));
    partial_trace(&(&op * rho_ab), Subsystem::A).hermitize()
}

/// Runs the protocol for every tomography input on a shared state.
///
/// For input |n⟩_m Alice projects onto U|k⟩_m. Branch k = n⊕1 is kept as is,
/// branch k = n gets C_m. The output is the Born-weighted sum of both.
pub fn simulate_rsp_outputs(rho_ab: &TwoQubitDensity, phi: f64) -> OutputSextet {
    simulate_on_matrix(rho_ab.matrix(), phi)
}

/// As [`simulate_rsp_outputs`] but validates a raw 4×4 matrix first.
pub fn simulate_rsp_outputs_checked(rho_ab: &CMatrix, phi: f64) -> Result<OutputSextet, RspError> {
    if rho_ab.dim() != 4 {
        return Err(LinalgError::DimensionMismatch {
            expected: 4,
            got: rho_ab.dim(),
        }
        .into());
    }
    check_state(rho_ab, TOL.psd_slack)?;
    Ok(simulate_on_matrix(rho_ab, phi))
}

fn simulate_on_matrix(rho_ab: &CMatrix, phi: f64) -> OutputSextet {
    let u = rotation_unitary(phi);
    OutputSextet::from_fn(|m, n| {
        let branch = |k: usize| steer(rho_ab, &basis_state(m, k).conjugate_by(&u));
        let c = correction(phi, m);
        (&branch(1 - n) + &branch(n).conjugate_by(&c)).hermitize()
    })
}

/// ρ′_{nm} = tr_A[(|n⟩_m⟨n| ⊗ I) ρ_AB] for the three Pauli measurements.
pub fn steered_assemblage(rho_ab: &TwoQubitDensity) -> Assemblage {
    steered_assemblage_of(rho_ab.matrix())
}

pub fn steered_assemblage_of(rho_ab: &CMatrix) -> Assemblage {
    Assemblage {
        members: [1, 2, 3].map(|m| [0, 1].map(|n| steer(rho_ab, &basis_state(m, n)))),
    }
}

/// E(ρ) = Σ_jk χ_jk σ_j ρ σ_k. Not renormalized, so an unnormalized χ gives an
/// unnormalized output.
pub fn apply_chi(chi: &ProcessMatrix, rho_in: &CMatrix) -> CMatrix {
    apply_chi_matrix(chi.matrix(), rho_in)
}

pub fn apply_chi_matrix(chi: &CMatrix, rho_in: &CMatrix) -> CMatrix {
    let paulis: Vec<CMatrix> = (0..4).map(pauli).collect();
    let mut out = CMatrix::zeros(2);
    for j in 0..4 {
        let left = &paulis[j] * rho_in;
        for k in 0..4 {
            let c = chi[(j, k)];
            if c == ZERO {
                continue;
            }
            out += &(&left * &paulis[k]).scale_c(c);
        }
    }
    out.hermitize()
}
