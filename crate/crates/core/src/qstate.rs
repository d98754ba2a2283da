//! Qubit and two-qubit states: constructors, Bloch algebra, the noise models,
//! the walk-off derivation, geometric discord and the noise-intensity fit.
//!
//! Angles of the half-wave plate are in degrees. Everything else is in radians.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    check_state, eig_hermitian, kron, pauli, uhlmann_fidelity, CMatrix, LinalgError, ZERO,
};
use crate::tol::TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("Bloch vector has length {norm}, expected a unit vector")]
    NotUnitVector { norm: f64 },
    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<(), StateError> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(StateError::OutOfRange { name, value, lo, hi })
    }
}

/// Single-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensity {
    matrix: CMatrix,
}

impl QubitDensity {
    /// Validates a 2×2 matrix as a state.
    pub fn new(matrix: CMatrix) -> Result<Self, StateError> {
        if matrix.dim() != 2 {
            return Err(LinalgError::DimensionMismatch {
                expected: 2,
                got: matrix.dim(),
            }
            .into());
        }
        check_state(&matrix, TOL.psd_slack)?;
        Ok(Self {
            matrix: matrix.hermitize(),
        })
    }

    /// (I + s·σ)/2 without the unit-length requirement; |s| ≤ 1.
    pub fn from_bloch(s: [f64; 3]) -> Result<Self, StateError> {
        let norm = norm3(&s);
        check_range("|bloch|", norm, 0.0, 1.0 + TOL.psd_slack)?;
        Ok(Self {
            matrix: bloch_matrix(&s),
        })
    }

    /// Pure state with unit Bloch vector `s`.
    pub fn pure_from_bloch(s: [f64; 3]) -> Result<Self, StateError> {
        let norm = norm3(&s);
        if (norm - 1.0).abs() > TOL.psd_slack {
            return Err(StateError::NotUnitVector { norm });
        }
        Ok(Self {
            matrix: bloch_matrix(&s),
        })
    }

    pub fn from_ket(psi: &[Complex64; 2]) -> Self {
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Self {
            matrix: CMatrix::outer(&[psi[0] / n, psi[1] / n]),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: CMatrix::identity(2).scale(0.5),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn bloch(&self) -> [f64; 3] {
        bloch_of(&self.matrix)
    }

    pub fn bloch_length(&self) -> f64 {
        norm3(&self.bloch())
    }
}

/// (I + s·σ)/2.
pub fn bloch_matrix(s: &[f64; 3]) -> CMatrix {
    let mut m = CMatrix::identity(2);
    for k in 0..3 {
        m += &pauli(k + 1).scale(s[k]);
    }
    m.scale(0.5)
}

/// Bloch vector of a (possibly unnormalized) 2×2 operator: s_k = tr(σ_k M).
pub fn bloch_of(m: &CMatrix) -> [f64; 3] {
    [1, 2, 3].map(|k| m.trace_product(&pauli(k)).re)
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Where a two-qubit state came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum StateLabel {
    Ideal,
    Werner { p: f64 },
    NoisyWerner { p: f64 },
    Walkoff { theta_deg: f64 },
    NoiseModel { theta_deg: f64, p: f64 },
    Fixture(String),
    Custom,
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Ideal => write!(f, "ideal"),
            StateLabel::Werner { p } => write!(f, "werner({p})"),
            StateLabel::NoisyWerner { p } => write!(f, "noisy-werner({p})"),
            StateLabel::Walkoff { theta_deg } => write!(f, "walkoff({theta_deg}°)"),
            StateLabel::NoiseModel { theta_deg, p } => write!(f, "noise-model({theta_deg}°, {p})"),
            StateLabel::Fixture(name) => write!(f, "fixture({name})"),
            StateLabel::Custom => write!(f, "custom"),
        }
    }
}

/// Two-qubit density matrix with a provenance label. Qubit A is Alice's.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    matrix: CMatrix,
    label: StateLabel,
}

impl TwoQubitDensity {
    pub fn new(matrix: CMatrix, label: StateLabel) -> Result<Self, StateError> {
        if matrix.dim() != 4 {
            return Err(LinalgError::DimensionMismatch {
                expected: 4,
                got: matrix.dim(),
            }
            .into());
        }
        check_state(&matrix, TOL.psd_slack)?;
        Ok(Self {
            matrix: matrix.hermitize(),
            label,
        })
    }

    pub fn product(a: &QubitDensity, b: &QubitDensity) -> Self {
        Self {
            matrix: kron(a.matrix(), b.matrix()),
            label: StateLabel::Custom,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &StateLabel {
        &self.label
    }

    pub fn with_label(mut self, label: StateLabel) -> Self {
        self.label = label;
        self
    }

    /// Mixture (1−w)·self + w·I⊗I/4.
    fn depolarize(&self, w: f64) -> CMatrix {
        &self.matrix.scale(1.0 - w) + &CMatrix::identity(4).scale(w / 4.0)
    }
}

/// (|01⟩ − |10⟩)/√2.
pub fn singlet_ket() -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        ZERO,
        Complex64::new(s, 0.0),
        Complex64::new(-s, 0.0),
        ZERO,
    ]
}

pub fn singlet_projector() -> CMatrix {
    CMatrix::outer(&singlet_ket())
}

pub fn singlet() -> TwoQubitDensity {
    TwoQubitDensity {
        matrix: singlet_projector(),
        label: StateLabel::Ideal,
    }
}

/// ½(|01⟩⟨01| + |10⟩⟨10|).
pub fn walkoff_mixture() -> CMatrix {
    CMatrix::diag(&[0.0, 0.5, 0.5, 0.0])
}

/// (1−p)|Ψ⁻⟩⟨Ψ⁻| + p·I⊗I/4.
pub fn make_werner(p_noise: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("p_noise", p_noise, 0.0, 1.0)?;
    let mut rho = singlet().depolarize(p_noise);
    if p_noise == 0.0 {
        rho = singlet_projector();
    }
    Ok(TwoQubitDensity {
        matrix: rho,
        label: StateLabel::Werner { p: p_noise },
    })
}

/// sin²θ|Ψ⁻⟩⟨Ψ⁻| + cos²θ·ρ_walk-off.
pub fn make_walkoff_state(theta_deg: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("theta_hwp", theta_deg, 0.0, 90.0)?;
    let (s, c) = theta_deg.to_radians().sin_cos();
    let matrix = &singlet_projector().scale(s * s) + &walkoff_mixture().scale(c * c);
    Ok(TwoQubitDensity {
        matrix,
        label: StateLabel::Walkoff { theta_deg },
    })
}

/// (1−p)·ρ_ent(θ) + p·I⊗I/4.
pub fn make_noise_model_state(theta_deg: f64, p: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("p", p, 0.0, 1.0)?;
    let ent = make_walkoff_state(theta_deg)?;
    Ok(TwoQubitDensity {
        matrix: ent.depolarize(p),
        label: StateLabel::NoiseModel { theta_deg, p },
    })
}

/// Singlet weight of the measured 90° state under the white-noise model.
pub const NOISE_90_SINGLET_WEIGHT: f64 = 0.94;

/// (1−p)·ρ_noise(90°) + p·I⊗I/4, a Werner state with singlet weight 0.94(1−p).
pub fn make_noisy_werner(p_noise: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("p_noise", p_noise, 0.0, 1.0)?;
    let w = make_werner(1.0 - NOISE_90_SINGLET_WEIGHT * (1.0 - p_noise))?;
    Ok(w.with_label(StateLabel::NoisyWerner { p: p_noise }))
}

// Mode-level walk-off model. Each photon lives in pol(2) ⊗ delay(3), the
// delay label taking the values 0, t, 2t. Index = pol·3 + delay.
const DELAY_LEVELS: usize = 3;
const MODE_DIM: usize = 2 * DELAY_LEVELS;

fn mode(pol: usize, delay: usize) -> usize {
    pol * DELAY_LEVELS + delay
}

/// Pure two-photon state after the compensating crystal,
/// (A⊗B + e^{iφ} B⊗A)/√2 with A = c|H,2t⟩ + s|V,t⟩, B = s|H,t⟩ − c|V,0⟩ and e^{iφ} = −1.
fn cbbo_amplitude(theta_deg: f64) -> Vec<Complex64> {
    let (s, c) = theta_deg.to_radians().sin_cos();
    let mut a = vec![ZERO; MODE_DIM];
    let mut b = vec![ZERO; MODE_DIM];
    a[mode(0, 2)] = Complex64::new(c, 0.0);
    a[mode(1, 1)] = Complex64::new(s, 0.0);
    b[mode(0, 1)] = Complex64::new(s, 0.0);
    b[mode(1, 0)] = Complex64::new(-c, 0.0);
    let phase = Complex64::new(-1.0, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = vec![ZERO; MODE_DIM * MODE_DIM];
    for i in 0..MODE_DIM {
        for j in 0..MODE_DIM {
            psi[i * MODE_DIM + j] = (a[i] * b[j] + phase * b[i] * a[j]) * r;
        }
    }
    psi
}

/// Traces both delay labels out of a two-photon mode-level pure state.
fn trace_delays(psi: &[Complex64]) -> CMatrix {
    let mut rho = CMatrix::zeros(4);
    for pa in 0..2 {
        for pb in 0..2 {
            for qa in 0..2 {
                for qb in 0..2 {
                    let mut acc = ZERO;
                    for da in 0..DELAY_LEVELS {
                        for db in 0..DELAY_LEVELS {
                            let x = psi[mode(pa, da) * MODE_DIM + mode(pb, db)];
                            let y = psi[mode(qa, da) * MODE_DIM + mode(qb, db)];
                            acc += x * y.conj();
                        }
                    }
                    rho[(pa * 2 + pb, qa * 2 + qb)] = acc;
                }
            }
        }
    }
    rho
}

/// Polarization state obtained by tracing the delay labels out of the
/// single pure CBBO output at angle θ. Equals
/// sin⁴θ|Ψ⁻⟩⟨Ψ⁻| + cos⁴θ·ρ_walk-off + sin²θcos²θ(|00⟩⟨00| + |11⟩⟨11|).
pub fn cbbo_polarization_state(theta_deg: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("theta_hwp", theta_deg, 0.0, 90.0)?;
    Ok(TwoQubitDensity {
        matrix: trace_delays(&cbbo_amplitude(theta_deg)).hermitize(),
        label: StateLabel::Walkoff { theta_deg },
    })
}

/// Walk-off state built from the mode-level model: the compensated (90°) and
/// uncompensated (0°) delay-traced states, mixed with weights sin²θ and cos²θ.
pub fn derive_walkoff_state(theta_deg: f64) -> Result<TwoQubitDensity, StateError> {
    check_range("theta_hwp", theta_deg, 0.0, 90.0)?;
    let compensated = trace_delays(&cbbo_amplitude(90.0));
    let uncompensated = trace_delays(&cbbo_amplitude(0.0));
    let (s, c) = theta_deg.to_radians().sin_cos();
    let matrix = (&compensated.scale(s * s) + &uncompensated.scale(c * c)).hermitize();
    Ok(TwoQubitDensity {
        matrix,
        label: StateLabel::Walkoff { theta_deg },
    })
}

/// Local Bloch vector of qubit A and the correlation tensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationData {
    /// x_i = tr[ρ(σ_i ⊗ I)]
    pub x: [f64; 3],
    /// A_ij = tr[ρ(σ_i ⊗ σ_j)]
    pub a: [[f64; 3]; 3],
}

pub fn correlation_data(rho: &TwoQubitDensity) -> CorrelationData {
    correlation_data_of(rho.matrix())
}

pub fn correlation_data_of(m: &CMatrix) -> CorrelationData {
    let id = pauli(0);
    let mut x = [0.0; 3];
    let mut a = [[0.0; 3]; 3];
    for i in 0..3 {
        let si = pauli(i + 1);
        x[i] = m.trace_product(&kron(&si, &id)).re;
        for j in 0..3 {
            a[i][j] = m.trace_product(&kron(&si, &pauli(j + 1))).re;
        }
    }
    CorrelationData { x, a }
}

/// D = ¼[|x|² + tr(AᵀA) − k_max], K = xxᵀ + AAᵀ.
pub fn geometric_discord(rho: &TwoQubitDensity) -> f64 {
    geometric_discord_of(&correlation_data(rho))
}

pub fn geometric_discord_of(c: &CorrelationData) -> f64 {
    let mut k = CMatrix::zeros(3);
    let mut frob = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let aat: f64 = (0..3).map(|l| c.a[i][l] * c.a[j][l]).sum();
            k[(i, j)] = Complex64::new(c.x[i] * c.x[j] + aat, 0.0);
            frob += c.a[i][j] * c.a[i][j];
        }
    }
    let k_max = eig_hermitian(&k).expect("K is real symmetric").max();
    let d = 0.25 * (norm3(&c.x).powi(2) + frob - k_max);
    if d < -1e-6 {
        log::warn!("geometric discord {d:.3e} is negative beyond rounding, clipped to 0");
    }
    d.max(0.0)
}

/// Result of fitting the white-noise model to a measured 90° state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFit {
    pub p: f64,
    pub fidelity: f64,
}

const GOLDEN_TOL: f64 = 1e-4;

/// Noise intensity p maximizing the Uhlmann fidelity between
/// (1−p)|Ψ⁻⟩⟨Ψ⁻| + p·I⊗I/4 and `rho_expt`, by golden-section search on [0, 1].
pub fn fit_noise_intensity(rho_expt: &TwoQubitDensity) -> Result<NoiseFit, StateError> {
    let target = rho_expt.matrix();
    let f = |p: f64| -> Result<f64, StateError> {
        let model = make_noise_model_state(90.0, p)?;
        Ok(uhlmann_fidelity(model.matrix(), target)?)
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GOLDEN_TOL {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    // the bracket can collapse onto an endpoint; compare against both
    let mid = 0.5 * (lo + hi);
    let mut best = NoiseFit {
        p: mid,
        fidelity: f(mid)?,
    };
    for edge in [0.0, 1.0] {
        let fe = f(edge)?;
        if fe > best.fidelity {
            best = NoiseFit { p: edge, fidelity: fe };
        }
    }
    Ok(best)
}

/// Haar-random pure qubit ket.
pub fn haar_qubit_ket<R: Rng + ?Sized>(rng: &mut R) -> [Complex64; 2] {
    let mut v = [ZERO; 2];
    for z in v.iter_mut() {
        *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    }
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Haar-random pure qubit state.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> QubitDensity {
    QubitDensity::from_ket(&haar_qubit_ket(rng))
}

/// Haar-random unitary of size `dim` (QR of a Ginibre matrix, phases fixed).
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = nalgebra::DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = CMatrix::zeros(dim);
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

/// Random mixed state from the Hilbert-Schmidt ensemble (G G† / tr).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let mut g = CMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    let m = &g * &g.adjoint();
    m.scale(1.0 / m.trace_re()).hermitize()
}

/// Random two-qubit state, labeled custom.
pub fn random_two_qubit<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitDensity {
    TwoQubitDensity {
        matrix: random_density(4, rng),
        label: StateLabel::Custom,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, Subsystem};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) < tol
    }

    #[test]
    fn pure_from_bloch_axes() {
        let z = QubitDensity::pure_from_bloch([0.0, 0.0, 1.0]).unwrap();
        assert!(close(z.matrix(), &CMatrix::diag(&[1.0, 0.0]), 1e-15));
        let x = QubitDensity::pure_from_bloch([1.0, 0.0, 0.0]).unwrap();
        assert!(close(x.matrix(), &CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), 1e-15));
        let y = QubitDensity::pure_from_bloch([0.0, 1.0, 0.0]).unwrap();
        assert!((y.matrix()[(0, 1)] - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn pure_from_bloch_rejects_short_vector() {
        assert!(matches!(
            QubitDensity::pure_from_bloch([0.5, 0.0, 0.0]),
            Err(StateError::NotUnitVector { .. })
        ));
    }

    #[test]
    fn bloch_round_trip() {
        let s = [0.3, -0.4, 0.5];
        let q = QubitDensity::from_bloch(s).unwrap();
        let back = q.bloch();
        for k in 0..3 {
            assert!((back[k] - s[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn werner_endpoints_and_spectrum() {
        assert_eq!(make_werner(0.0).unwrap().matrix(), &singlet_projector());
        assert!(close(make_werner(1.0).unwrap().matrix(), &CMatrix::identity(4).scale(0.25), 1e-15));
        let e = eig_hermitian(make_werner(0.5).unwrap().matrix()).unwrap();
        let want = [0.125, 0.125, 0.125, 0.625];
        for (v, w) in e.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
        assert!(matches!(make_werner(1.5), Err(StateError::OutOfRange { .. })));
    }

    #[test]
    fn walkoff_endpoints() {
        assert!(close(make_walkoff_state(90.0).unwrap().matrix(), &singlet_projector(), 1e-15));
        assert!(close(make_walkoff_state(0.0).unwrap().matrix(), &walkoff_mixture(), 1e-15));
        assert!(make_walkoff_state(-1.0).is_err());
    }

    #[test]
    fn walkoff_40_correlations() {
        let c = correlation_data(&make_walkoff_state(40.0).unwrap());
        let s2 = 40f64.to_radians().sin().powi(2);
        assert!((c.a[0][0] + s2).abs() < 1e-12);
        assert!((c.a[1][1] + s2).abs() < 1e-12);
        assert!((c.a[2][2] + 1.0).abs() < 1e-12);
        assert!((s2 - 0.413).abs() < 1e-3);
    }

    #[test]
    fn noise_model_mixture() {
        let r = make_noise_model_state(90.0, 0.06).unwrap();
        let want = &singlet_projector().scale(0.94) + &CMatrix::identity(4).scale(0.015);
        assert!(close(r.matrix(), &want, 1e-15));
        let c = correlation_data(&make_noise_model_state(40.0, 0.06).unwrap());
        assert!((c.a[0][0] + 0.388).abs() < 1e-3);
        assert!((c.a[2][2] + 0.94).abs() < 1e-12);
        let plain = make_walkoff_state(33.0).unwrap();
        assert!(close(make_noise_model_state(33.0, 0.0).unwrap().matrix(), plain.matrix(), 1e-15));
    }

    #[test]
    fn noisy_werner_weight() {
        let half = make_noisy_werner(0.5).unwrap();
        let c = correlation_data(&half);
        assert!((c.a[0][0] + 0.47).abs() < 1e-12);
        assert!(close(make_noisy_werner(1.0).unwrap().matrix(), &CMatrix::identity(4).scale(0.25), 1e-15));
    }

    #[test]
    fn derived_walkoff_matches_endpoints() {
        for th in [0.0, 40.0, 90.0] {
            let a = derive_walkoff_state(th).unwrap();
            let b = make_walkoff_state(th).unwrap();
            assert!(close(a.matrix(), b.matrix(), 1e-10), "θ = {th}");
        }
    }

    #[test]
    fn literal_cbbo_trace_closed_form() {
        for th in [0.0, 25.0, 40.0, 90.0] {
            let (s, c) = f64::to_radians(th).sin_cos();
            let want = &(&singlet_projector().scale(s.powi(4)) + &walkoff_mixture().scale(c.powi(4)))
                + &CMatrix::diag(&[1.0, 0.0, 0.0, 1.0]).scale(s * s * c * c);
            let got = cbbo_polarization_state(th).unwrap();
            assert!(close(got.matrix(), &want, 1e-12), "θ = {th}");
        }
    }

    #[test]
    fn correlation_examples() {
        let c = correlation_data(&singlet());
        for i in 0..3 {
            assert!(c.x[i].abs() < 1e-15);
            for j in 0..3 {
                let want = if i == j { -1.0 } else { 0.0 };
                assert!((c.a[i][j] - want).abs() < 1e-15);
            }
        }
        let w = correlation_data_of(&walkoff_mixture());
        assert!((w.a[2][2] + 1.0).abs() < 1e-15 && w.a[0][0].abs() < 1e-15);
    }

    #[test]
    fn discord_anchors() {
        let v = 0.47;
        assert!((geometric_discord(&make_noisy_werner(0.5).unwrap()) - v * v / 2.0).abs() < 1e-12);
        let d40 = geometric_discord(&make_noise_model_state(40.0, 0.06).unwrap());
        assert!((d40 - 0.0755).abs() < 1e-3, "{d40}");
        let prod = TwoQubitDensity::product(
            &QubitDensity::pure_from_bloch([0.0, 0.0, 1.0]).unwrap(),
            &QubitDensity::pure_from_bloch([1.0, 0.0, 0.0]).unwrap(),
        );
        assert!(geometric_discord(&prod).abs() < 1e-12);
    }

    #[test]
    fn walkoff_marginal_is_mixed() {
        let m = partial_trace(&walkoff_mixture(), Subsystem::A);
        assert!(close(&m, &CMatrix::identity(2).scale(0.5), 1e-15));
    }

    #[test]
    fn fit_recovers_singlet_and_werner() {
        let s = fit_noise_intensity(&singlet()).unwrap();
        assert!(s.p < 1e-3 && (s.fidelity - 1.0).abs() < 1e-6, "{s:?}");
        let w = fit_noise_intensity(&make_werner(0.3).unwrap()).unwrap();
        assert!((w.p - 0.3).abs() < 1e-3, "{w:?}");
        assert!((w.fidelity - 1.0).abs() < 1e-6);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(2, &mut rng);
        assert!((&u * &u.adjoint()).max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn label_display() {
        assert_eq!(StateLabel::Werner { p: 0.5 }.to_string(), "werner(0.5)");
        assert_eq!(StateLabel::Fixture("x".into()).to_string(), "fixture(x)");
    }
}
