use serde::Serialize;

use crate::error::CliError;

pub const DEFAULT_NOISE_P: f64 = 0.06;
pub const DEFAULT_SHOTS: u64 = 10_000;
pub const MIN_SHOTS: u64 = 100;

/// Counts per tomography setting, or the noiseless limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn new(shots: u64, exact: bool) -> Result<Self, CliError> {
        if exact {
            return Ok(Shots::Exact);
        }
        if shots < MIN_SHOTS {
            return Err(CliError::Config(format!("--shots must be at least {MIN_SHOTS}, got {shots}")));
        }
        Ok(Shots::Finite(shots))
    }

    pub fn is_exact(self) -> bool {
        self == Shots::Exact
    }
}

/// Inclusive arithmetic grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self, CliError> {
        if !(start.is_finite() && end.is_finite() && step.is_finite()) {
            return Err(CliError::Config("grid bounds must be finite".into()));
        }
        if step <= 0.0 {
            return Err(CliError::Config(format!("grid step must be positive, got {step}")));
        }
        if end < start {
            return Err(CliError::Config(format!("grid is empty: end {end} < start {start}")));
        }
        Ok(Self { start, end, step })
    }

    /// start, start + step, … up to end. Values are rounded to 1e-9 so that
    /// accumulated float error does not leak into output files.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| ((self.start + k as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }

    fn check_within(&self, lo: f64, hi: f64, what: &str) -> Result<(), CliError> {
        if self.start < lo || self.end > hi {
            return Err(CliError::Config(format!(
                "{what} grid [{}, {}] leaves [{lo}, {hi}]",
                self.start, self.end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Walkoff,
    Werner,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub scenario: Scenario,
    pub grid: Grid,
    pub phi: f64,
    pub noise_p: f64,
    pub shots: Shots,
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        match self.scenario {
            Scenario::Walkoff => self.grid.check_within(0.0, 90.0, "θ")?,
            Scenario::Werner => self.grid.check_within(0.0, 1.0, "p_noise")?,
        }
        if !(0.0..=1.0).contains(&self.noise_p) {
            return Err(CliError::Config(format!("--pnoise must lie in [0, 1], got {}", self.noise_p)));
        }
        if !self.phi.is_finite() {
            return Err(CliError::Config("--phi must be finite".into()));
        }
        Ok(())
    }
}
