//! The three measured two-qubit density matrices shipped in `fixtures/`.
//!
//! They are printed to two decimals, so [`Fixture::raw`] may be marginally
//! non-positive. Anything that needs a physical state should go through
//! [`Fixture::state`], which projects onto the PSD cone and logs how far it moved.

use crate::linalg::{psd_project, CMatrix, MatrixFile};
use crate::qstate::{StateError, StateLabel, TwoQubitDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// HWP at 90°, walk-off compensated.
    Expt90,
    /// HWP at 40°.
    Expt40,
    /// Werner-type state at noise weight 0.5.
    WernerExpt05,
}

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::Expt90, Fixture::Expt40, Fixture::WernerExpt05];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Expt90 => "rho_expt_90",
            Fixture::Expt40 => "rho_expt_40",
            Fixture::WernerExpt05 => "rho_w_expt_05",
        }
    }

    pub fn json(self) -> &'static str {
        match self {
            Fixture::Expt90 => include_str!("../../../fixtures/rho_expt_90.json"),
            Fixture::Expt40 => include_str!("../../../fixtures/rho_expt_40.json"),
            Fixture::WernerExpt05 => include_str!("../../../fixtures/rho_w_expt_05.json"),
        }
    }

    pub fn file(self) -> MatrixFile {
        MatrixFile::parse(self.json()).expect("bundled fixture is well formed")
    }

    /// The matrix exactly as printed.
    pub fn raw(self) -> CMatrix {
        self.file().to_matrix().expect("bundled fixture is well formed")
    }

    /// PSD-projected state, labeled with the fixture name.
    pub fn state(self) -> Result<TwoQubitDensity, StateError> {
        project_fixture(&self.raw(), self.name())
    }
}

/// Projects a (possibly rounded) measured matrix onto the state set and wraps it.
pub fn project_fixture(raw: &CMatrix, name: &str) -> Result<TwoQubitDensity, StateError> {
    let projected = psd_project(&raw.hermitize())?;
    let moved = projected.max_abs_diff(raw);
    if moved > 0.0 {
        log::info!("{name}: PSD projection moved entries by up to {moved:.2e}");
    }
    TwoQubitDensity::new(projected, StateLabel::Fixture(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eig_hermitian;

    #[test]
    fn raw_fixtures_are_hermitian_unit_trace() {
        for f in Fixture::ALL {
            let m = f.raw();
            assert_eq!(m.dim(), 4);
            assert!(m.hermiticity_residual() < 1e-15, "{}", f.name());
            assert!((m.trace_re() - 1.0).abs() < 1e-12, "{}", f.name());
        }
    }

    #[test]
    fn ninety_degree_fixture_is_slightly_negative() {
        let lmin = eig_hermitian(&Fixture::Expt90.raw()).unwrap().min();
        assert!(lmin < 0.0 && lmin > -1e-3);
    }

    #[test]
    fn projected_states_are_physical() {
        for f in Fixture::ALL {
            let s = f.state().unwrap();
            assert!(eig_hermitian(s.matrix()).unwrap().min() >= -1e-12);
            assert_eq!(s.label(), &StateLabel::Fixture(f.name().to_string()));
        }
    }
}
