use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qstate::TwoQubitDensity;
use crate::rsp::simulate_rsp_outputs;
use crate::tomo::{chi_target, process_tomography, ProcessMatrix};

use super::fidelity::{avg_state_fidelity, complementary_fidelity_chi, complementary_fidelity_of_outputs, DEFAULT_COMP_BASES};
use super::programs::{quantum_composition_alpha, quantum_robustness_beta, F_COMP_C_REFERENCE, F_SC_REFERENCE};
use super::MetricsError;

/// Which fidelity criteria a process beats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criteria {
    /// F̄_s > F̄_sc
    pub avg_state: bool,
    /// F̄_comp > F̄_comp,c
    pub complementary: bool,
}

/// Everything known about one process against its target rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringReport {
    pub alpha: f64,
    pub beta: f64,
    pub process_fidelity: f64,
    pub avg_state_fidelity: f64,
    pub comp_fidelity: f64,
    pub f_sc: f64,
    pub f_comp_c: f64,
    pub criteria: Criteria,
}

/// α and β below this count as zero.
pub const ZERO_STEERING: f64 = 1e-6;

impl SteeringReport {
    /// Report for a tomographed process; the complementary fidelity is read off χ.
    pub fn from_process(chi_expt: &ProcessMatrix, phi: f64) -> Result<Self, MetricsError> {
        let comp = complementary_fidelity_chi(chi_expt, phi, DEFAULT_COMP_BASES)?;
        Self::assemble(chi_expt, phi, comp)
    }

    /// Simulates the protocol on `rho_ab`, reconstructs χ and reports on it.
    pub fn from_state(rho_ab: &TwoQubitDensity, phi: f64) -> Result<Self, MetricsError> {
        let sextet = simulate_rsp_outputs(rho_ab, phi);
        let chi = process_tomography(&sextet)?;
        let comp = complementary_fidelity_of_outputs(&sextet, phi, DEFAULT_COMP_BASES);
        Self::assemble(&chi, phi, comp)
    }

    /// Uses a caller-supplied complementary fidelity.
    pub fn assemble(chi_expt: &ProcessMatrix, phi: f64, comp_fidelity: f64) -> Result<Self, MetricsError> {
        let target = chi_target(phi);
        let alpha = quantum_composition_alpha(chi_expt)?.value;
        let beta = quantum_robustness_beta(chi_expt)?.value;
        let avg = avg_state_fidelity(chi_expt, &target);
        Ok(Self {
            alpha,
            beta,
            process_fidelity: chi_expt.process_fidelity(&target),
            avg_state_fidelity: avg,
            comp_fidelity,
            f_sc: F_SC_REFERENCE,
            f_comp_c: F_COMP_C_REFERENCE,
            criteria: Criteria {
                avg_state: avg > F_SC_REFERENCE,
                complementary: comp_fidelity > F_COMP_C_REFERENCE,
            },
        })
    }

    pub fn is_steering(&self) -> bool {
        self.alpha > ZERO_STEERING || self.beta > ZERO_STEERING
    }

    /// α and β agree on whether the process is classical.
    pub fn is_consistent(&self) -> bool {
        (self.alpha > ZERO_STEERING) == (self.beta > ZERO_STEERING)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for SteeringReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |b: bool| if b { "beats" } else { "within" };
        writeln!(f, "alpha                {:.4}", self.alpha)?;
        writeln!(f, "beta                 {:.4}", self.beta)?;
        writeln!(f, "process fidelity     {:.4}", self.process_fidelity)?;
        writeln!(
            f,
            "avg state fidelity   {:.4} ({} classical {:.4})",
            self.avg_state_fidelity,
            mark(self.criteria.avg_state),
            self.f_sc
        )?;
        write!(
            f,
            "comp fidelity        {:.4} ({} classical {:.4})",
            self.comp_fidelity,
            mark(self.criteria.complementary),
            self.f_comp_c
        )
    }
}
