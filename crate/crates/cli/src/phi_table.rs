use serde::Serialize;

use procsteer::metrics::{
    bloch_comparison, classical_fidelity_bounds, complementary_fidelity_of_outputs, BlochSample, SteeringReport,
    DEFAULT_COMP_BASES,
};
use procsteer::qstate::TwoQubitDensity;
use procsteer::rsp::EXPERIMENT_PHIS;
use procsteer::tomo::process_tomography;

use crate::config::Shots;
use crate::error::CliError;
use crate::sweep::outputs;

pub const BLOCH_SAMPLES: usize = 98;

/// Reports for the four rotation angles must agree this closely in exact mode.
pub const COVARIANCE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlochSummary {
    pub count: usize,
    pub min_r: f64,
    pub max_r_classical: f64,
    /// |r| > |r_c| on every sample.
    pub all_larger: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiRow {
    pub phi: f64,
    pub report: SteeringReport,
    pub bloch: BlochSummary,
    pub samples: Vec<BlochSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiTable {
    pub resource: String,
    pub shots: Shots,
    pub seed: u64,
    pub rows: Vec<PhiRow>,
}

/// Full report and Bloch-length comparison for each experimental φ.
/// Row k samples with seed `seed + k`.
pub fn run_phi_table(rho: &TwoQubitDensity, shots: Shots, seed: u64) -> Result<PhiTable, CliError> {
    let mut rows = Vec::with_capacity(EXPERIMENT_PHIS.len());
    for (k, &phi) in EXPERIMENT_PHIS.iter().enumerate() {
        let seed_k = seed.wrapping_add(k as u64);
        let sextet = outputs(rho, phi, shots, seed_k)?;
        let chi = process_tomography(&sextet)?;
        let comp = complementary_fidelity_of_outputs(&sextet, phi, DEFAULT_COMP_BASES);
        let report = SteeringReport::assemble(&chi, phi, comp)?;
        let best = classical_fidelity_bounds(&procsteer::tomo::chi_target(phi))?;
        let samples = bloch_comparison(&chi, &best.chi_c, BLOCH_SAMPLES, seed_k);
        let bloch = BlochSummary {
            count: samples.len(),
            min_r: samples.iter().map(|s| s.r_expt).fold(f64::INFINITY, f64::min),
            max_r_classical: samples.iter().map(|s| s.r_classical).fold(0.0, f64::max),
            all_larger: samples.iter().all(|s| s.r_expt > s.r_classical),
        };
        rows.push(PhiRow {
            phi,
            report,
            bloch,
            samples,
        });
    }
    Ok(PhiTable {
        resource: rho.label().to_string(),
        shots,
        seed,
        rows,
    })
}

/// In exact mode the four reports must coincide.
pub fn check_covariance(table: &PhiTable) -> Result<(), CliError> {
    if !table.shots.is_exact() {
        return Ok(());
    }
    let first = &table.rows[0].report;
    for row in &table.rows[1..] {
        let r = &row.report;
        let diffs = [
            ("alpha", r.alpha - first.alpha),
            ("beta", r.beta - first.beta),
            ("avg_state_fidelity", r.avg_state_fidelity - first.avg_state_fidelity),
            ("comp_fidelity", r.comp_fidelity - first.comp_fidelity),
        ];
        if let Some((name, d)) = diffs.iter().find(|(_, d)| d.abs() > COVARIANCE_TOL) {
            return Err(CliError::PostCheck(format!(
                "{name} at φ = {:.4} differs from φ = 0 by {d:.3e}",
                row.phi
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use procsteer::qstate::singlet;

    #[test]
    fn singlet_table() {
        let t = run_phi_table(&singlet(), Shots::Exact, 3).unwrap();
        assert_eq!(t.rows.len(), 4);
        for row in &t.rows {
            assert!(row.report.criteria.avg_state && row.report.criteria.complementary);
            assert!(row.bloch.all_larger);
            assert_eq!(row.samples.len(), BLOCH_SAMPLES);
        }
        check_covariance(&t).unwrap();
    }
}
