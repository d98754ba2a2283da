use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;

use procsteer::fixtures::project_fixture;
use procsteer::linalg::{eig_hermitian, overlap_fidelity, MatrixFile};
use procsteer::metrics::{steerable_weight, SteeringReport};
use procsteer::qstate::{fit_noise_intensity, geometric_discord, singlet_projector, NoiseFit};
use procsteer::rsp::steered_assemblage;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Fidelity,
    Discord,
    SteerableWeight,
    NoiseFit,
    RspReport,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Fidelity,
        Metric::Discord,
        Metric::SteerableWeight,
        Metric::NoiseFit,
        Metric::RspReport,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateAnalysis {
    pub name: String,
    /// Smallest eigenvalue of the matrix as read.
    pub min_eigenvalue: f64,
    /// Largest entry change made by the PSD projection.
    pub projection_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_to_singlet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discord: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steerable_weight: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_fit: Option<NoiseFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rsp_report: Option<SteeringReport>,
}

/// Reads a two-qubit matrix file, projects it onto the state set and computes `metrics`.
pub fn analyze_state(path: &Path, metrics: &[Metric], phi: f64) -> Result<StateAnalysis, CliError> {
    let input = |source| CliError::Input {
        path: path.display().to_string(),
        source,
    };
    let file = MatrixFile::read(path).map_err(input)?;
    let raw = file.to_matrix().map_err(input)?;
    if raw.dim() != 4 {
        return Err(CliError::Config(format!("expected a 4×4 matrix, {} has dim {}", path.display(), raw.dim())));
    }
    let name = file
        .name
        .clone()
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "state".into());
    let min_eigenvalue = eig_hermitian(&raw.hermitize())
        .map_err(|e| CliError::Config(e.to_string()))?
        .min();
    let rho = project_fixture(&raw, &name)?;
    let has = |m: Metric| metrics.contains(&m);
    Ok(StateAnalysis {
        projection_distance: rho.matrix().max_abs_diff(&raw),
        min_eigenvalue,
        fidelity_to_singlet: has(Metric::Fidelity).then(|| overlap_fidelity(rho.matrix(), &singlet_projector())),
        discord: has(Metric::Discord).then(|| geometric_discord(&rho)),
        steerable_weight: if has(Metric::SteerableWeight) {
            Some(steerable_weight(&steered_assemblage(&rho))?.value)
        } else {
            None
        },
        noise_fit: if has(Metric::NoiseFit) {
            Some(fit_noise_intensity(&rho)?)
        } else {
            None
        },
        rsp_report: if has(Metric::RspReport) {
            Some(SteeringReport::from_state(&rho, phi)?)
        } else {
            None
        },
        name,
    })
}
