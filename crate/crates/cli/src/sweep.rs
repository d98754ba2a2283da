use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use procsteer::metrics::{
    avg_state_fidelity, complementary_fidelity_of_outputs, quantum_composition_alpha, quantum_robustness_beta,
    steerable_weight, SolverDiagnostics, DEFAULT_COMP_BASES, F_SC_REFERENCE,
};
use procsteer::qstate::{
    geometric_discord, make_noise_model_state, make_noisy_werner, make_walkoff_state, make_werner, TwoQubitDensity,
};
use procsteer::rsp::{simulate_rsp_outputs, steered_assemblage, OutputSextet};
use procsteer::tomo::{chi_target, process_tomography, sample_sextet};

use crate::config::{Scenario, Shots, SweepConfig};
use crate::error::CliError;

pub const CSV_HEADER: &str = "param,alpha,beta,avg_state_fidelity,f_sc,comp_fidelity,discord,steerable_weight,track";

/// Allowed wrong-way change between neighbouring grid points.
pub const MONOTONE_SLACK: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Track {
    /// Noise model of the experiment.
    Theory,
    /// Perfect photon pairs.
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    pub alpha: SolverDiagnostics,
    pub beta: SolverDiagnostics,
    pub steerable_weight: SolverDiagnostics,
}

/// One CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub param: f64,
    pub alpha: f64,
    pub beta: f64,
    pub avg_state_fidelity: f64,
    pub f_sc: f64,
    pub comp_fidelity: f64,
    pub discord: f64,
    pub steerable_weight: f64,
    pub track: Track,
    #[serde(skip)]
    pub diagnostics: PointDiagnostics,
}

/// Protocol outputs on `rho`, sampled at `shots` unless exact.
pub fn outputs(rho: &TwoQubitDensity, phi: f64, shots: Shots, seed: u64) -> Result<OutputSextet, CliError> {
    let exact = simulate_rsp_outputs(rho, phi);
    match shots {
        Shots::Exact => Ok(exact),
        Shots::Finite(n) => Ok(sample_sextet(&exact, n, seed)?),
    }
}

/// All columns for one resource state. Discord and steerable weight are
/// properties of the state and do not see the shot noise.
pub fn evaluate_point(
    rho: &TwoQubitDensity,
    param: f64,
    track: Track,
    phi: f64,
    shots: Shots,
    seed: u64,
) -> Result<SweepRecord, CliError> {
    let sextet = outputs(rho, phi, shots, seed)?;
    let chi = process_tomography(&sextet)?;
    let alpha = quantum_composition_alpha(&chi)?;
    let beta = quantum_robustness_beta(&chi)?;
    let sw = steerable_weight(&steered_assemblage(rho))?;
    Ok(SweepRecord {
        param,
        alpha: alpha.value,
        beta: beta.value,
        avg_state_fidelity: avg_state_fidelity(&chi, &chi_target(phi)),
        f_sc: F_SC_REFERENCE,
        comp_fidelity: complementary_fidelity_of_outputs(&sextet, phi, DEFAULT_COMP_BASES),
        discord: geometric_discord(rho),
        steerable_weight: sw.value,
        track,
        diagnostics: PointDiagnostics {
            alpha: alpha.diagnostics,
            beta: beta.diagnostics,
            steerable_weight: sw.diagnostics,
        },
    })
}

fn states(cfg: &SweepConfig, x: f64) -> Result<[(Track, TwoQubitDensity); 2], CliError> {
    Ok(match cfg.scenario {
        Scenario::Walkoff => [
            (Track::Theory, make_noise_model_state(x, cfg.noise_p)?),
            (Track::Ideal, make_walkoff_state(x)?),
        ],
        Scenario::Werner => [(Track::Theory, make_noisy_werner(x)?), (Track::Ideal, make_werner(x)?)],
    })
}

/// Evaluates both tracks on every grid point. Point k uses seed `seed + k`.
/// Rows come out theory track first, each track ordered by parameter.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CliError> {
    cfg.validate()?;
    let points = cfg.grid.points();
    let rows: Vec<[SweepRecord; 2]> = points
        .par_iter()
        .enumerate()
        .map(|(k, &x)| {
            let seed = cfg.seed.wrapping_add(k as u64);
            let [(ta, a), (tb, b)] = states(cfg, x)?;
            Ok([
                evaluate_point(&a, x, ta, cfg.phi, cfg.shots, seed)?,
                evaluate_point(&b, x, tb, cfg.phi, cfg.shots, seed)?,
            ])
        })
        .collect::<Result<_, CliError>>()?;
    let (theory, ideal): (Vec<_>, Vec<_>) = rows.into_iter().map(|[a, b]| (a, b)).unzip();
    Ok(theory.into_iter().chain(ideal).collect())
}

pub fn run_walkoff_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CliError> {
    if cfg.scenario != Scenario::Walkoff {
        return Err(CliError::Config("walk-off sweep needs the walkoff scenario".into()));
    }
    run_sweep(cfg)
}

pub fn run_werner_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>, CliError> {
    if cfg.scenario != Scenario::Werner {
        return Err(CliError::Config("Werner sweep needs the werner scenario".into()));
    }
    run_sweep(cfg)
}

/// Walk-off metrics must not fall with θ, Werner metrics must not rise with p.
/// Under finite shots only the state-level columns are checked.
pub fn check_monotone(cfg: &SweepConfig, records: &[SweepRecord]) -> Result<(), CliError> {
    let sign = match cfg.scenario {
        Scenario::Walkoff => 1.0,
        Scenario::Werner => -1.0,
    };
    let mut columns: Vec<(&str, fn(&SweepRecord) -> f64)> = vec![
        ("discord", |r| r.discord),
        ("steerable_weight", |r| r.steerable_weight),
    ];
    if cfg.shots.is_exact() {
        columns.extend([
            ("alpha", (|r| r.alpha) as fn(&SweepRecord) -> f64),
            ("beta", |r| r.beta),
            ("avg_state_fidelity", |r| r.avg_state_fidelity),
        ]);
    }
    for track in [Track::Theory, Track::Ideal] {
        let rows: Vec<&SweepRecord> = records.iter().filter(|r| r.track == track).collect();
        for (name, get) in &columns {
            for w in rows.windows(2) {
                let change = sign * (get(w[1]) - get(w[0]));
                if change < -MONOTONE_SLACK {
                    return Err(CliError::PostCheck(format!(
                        "{name} on the {track:?} track moves the wrong way between {} and {} ({:.3e})",
                        w[0].param, w[1].param, change
                    )));
                }
            }
        }
    }
    Ok(())
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
