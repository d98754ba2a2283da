use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::CMatrix;
use crate::qstate::{bloch_of, haar_qubit, norm3, TwoQubitDensity};
use crate::rsp::{basis_state, rotation_unitary, simulate_rsp_outputs, OutputSextet};
use crate::tomo::ProcessMatrix;

use super::MetricsError;

/// Bases |0⟩_{n+1}, |1⟩_{n+1} for n = 1, 2: the y and z eigenbases.
pub const DEFAULT_COMP_BASES: (usize, usize) = (2, 3);

/// F̄_s = (2 tr(χ_expt χ_rsp) + 1)/3
pub fn avg_state_fidelity(chi_expt: &ProcessMatrix, chi_rsp: &ProcessMatrix) -> f64 {
    (2.0 * chi_expt.process_fidelity(chi_rsp) + 1.0) / 3.0
}

fn check_bases((q1, q2): (usize, usize)) -> Result<(), MetricsError> {
    for q in [q1, q2] {
        if !(1..=3).contains(&q) {
            return Err(MetricsError::InvalidInput(format!("basis index {q} outside 1..=3")));
        }
    }
    if q1 == q2 {
        return Err(MetricsError::SameBasis(q1));
    }
    Ok(())
}

/// ¼ Σ over both bases and both states of ⟨s|R†E(|s⟩⟨s|)R|s⟩, with E(|s⟩⟨s|) from `output`.
fn comp_average(phi: f64, (q1, q2): (usize, usize), output: impl Fn(usize, usize) -> CMatrix) -> f64 {
    let r = rotation_unitary(phi);
    let mut acc = 0.0;
    for q in [q1, q2] {
        for n in 0..2 {
            let target = basis_state(q, n).conjugate_by(&r);
            acc += output(q, n).inner(&target);
        }
    }
    acc / 4.0
}

/// F̄_comp from the simulated protocol outputs on `rho_ab`.
pub fn complementary_fidelity(
    rho_ab: &TwoQubitDensity,
    phi: f64,
    bases: (usize, usize),
) -> Result<f64, MetricsError> {
    check_bases(bases)?;
    Ok(complementary_fidelity_of_outputs(&simulate_rsp_outputs(rho_ab, phi), phi, bases))
}

/// F̄_comp from an already measured or simulated sextet. Bases must be distinct.
pub fn complementary_fidelity_of_outputs(sextet: &OutputSextet, phi: f64, bases: (usize, usize)) -> f64 {
    comp_average(phi, bases, |q, n| sextet.get(q, n).clone())
}

/// F̄_comp of a process matrix.
pub fn complementary_fidelity_chi(
    chi: &ProcessMatrix,
    phi: f64,
    bases: (usize, usize),
) -> Result<f64, MetricsError> {
    check_bases(bases)?;
    Ok(comp_average(phi, bases, |q, n| chi.apply(&basis_state(q, n))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochSample {
    pub input: [f64; 3],
    pub r_expt: f64,
    pub r_classical: f64,
}

fn output_length(chi: &ProcessMatrix, rho: &CMatrix) -> f64 {
    let out = chi.apply(rho);
    let tr = out.trace_re();
    if tr <= 0.0 {
        return 0.0;
    }
    norm3(&bloch_of(&out.scale(1.0 / tr)))
}

/// Output Bloch lengths of both processes on `count` Haar-random pure inputs.
pub fn bloch_comparison(
    chi_expt: &ProcessMatrix,
    chi_c_best: &ProcessMatrix,
    count: usize,
    seed: u64,
) -> Vec<BlochSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let rho = haar_qubit(&mut rng);
            BlochSample {
                input: rho.bloch(),
                r_expt: output_length(chi_expt, rho.matrix()),
                r_classical: output_length(chi_c_best, rho.matrix()),
            }
        })
        .collect()
}
