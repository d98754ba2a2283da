//! Counting statistics, single-qubit state tomography and process tomography.
//!
//! χ is always expressed in the Pauli operator basis ordered (I, X, Y, Z).

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eig_hermitian, pauli, psd_project, CMatrix, LinalgError, MatrixFile, MatrixFileError};
use crate::qstate::QubitDensity;
use crate::rsp::{apply_chi_matrix, basis_ket, basis_state, rotation_unitary, OutputSextet};

#[derive(Debug, Error)]
pub enum TomoError {
    #[error("no counts recorded in basis {basis}")]
    IncompleteSettings { basis: u8 },
    #[error("basis traces of the sextet disagree by {spread:.3} (limit {limit})")]
    InconsistentSextet { spread: f64, limit: f64 },
    #[error("invalid count record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    File(#[from] MatrixFileError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Counts of outcome `outcome` when measuring Pauli `basis` (1, 2, 3) `shots` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub basis: u8,
    pub outcome: u8,
    pub counts: u64,
    pub shots: u64,
}

impl CountRecord {
    pub fn validate(&self) -> Result<(), TomoError> {
        if !(1..=3).contains(&self.basis) || self.outcome > 1 {
            return Err(TomoError::BadRecord(format!(
                "setting ({}, {}) out of range",
                self.basis, self.outcome
            )));
        }
        if self.shots == 0 || self.counts > self.shots {
            return Err(TomoError::BadRecord(format!(
                "{} counts out of {} shots",
                self.counts, self.shots
            )));
        }
        Ok(())
    }
}

pub fn write_counts_csv<W: Write>(records: &[CountRecord], out: W) -> Result<(), TomoError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<CountRecord>, TomoError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: CountRecord = row?;
        r.validate()?;
        out.push(r);
    }
    Ok(out)
}

/// Draws binomial counts in each Pauli basis. Two records (n = 0, 1) per basis.
pub fn simulate_counts(rho: &QubitDensity, shots: u64, seed: u64) -> Vec<CountRecord> {
    assert!(shots >= 1, "shots must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(6);
    for m in 1..=3u8 {
        let p0 = rho
            .matrix()
            .expectation(&basis_ket(m as usize, 0))
            .re
            .clamp(0.0, 1.0);
        let c0 = Binomial::new(shots, p0)
            .expect("probability clamped to [0, 1]")
            .sample(&mut rng);
        out.push(CountRecord { basis: m, outcome: 0, counts: c0, shots });
        out.push(CountRecord { basis: m, outcome: 1, counts: shots - c0, shots });
    }
    out
}

const MLE_MAX_ITER: usize = 500;
const MLE_TOL: f64 = 1e-10;

/// Linear inversion followed, if needed, by the RρR maximum-likelihood fixed point.
pub fn state_tomography(records: &[CountRecord]) -> Result<QubitDensity, TomoError> {
    let mut tallies = [[0u64; 2]; 3];
    for r in records {
        r.validate()?;
        tallies[r.basis as usize - 1][r.outcome as usize] += r.counts;
    }
    let mut freqs = [[0.0; 2]; 3];
    for (m, t) in tallies.iter().enumerate() {
        let total = t[0] + t[1];
        if total == 0 {
            return Err(TomoError::IncompleteSettings { basis: m as u8 + 1 });
        }
        freqs[m] = [t[0] as f64 / total as f64, t[1] as f64 / total as f64];
    }
    Ok(tomography_from_frequencies(&freqs))
}

/// Noiseless variant: ⟨σ_m⟩ given directly.
pub fn tomography_from_expectations(s: [f64; 3]) -> QubitDensity {
    let freqs = s.map(|e| [(1.0 + e) / 2.0, (1.0 - e) / 2.0]);
    tomography_from_frequencies(&freqs)
}

/// `freqs[m-1][n]` is the observed frequency of outcome n in basis m.
pub fn tomography_from_frequencies(freqs: &[[f64; 2]; 3]) -> QubitDensity {
    let s = freqs.map(|f| f[0] - f[1]);
    if let Ok(q) = QubitDensity::from_bloch(s) {
        return q;
    }
    let projectors: Vec<[CMatrix; 2]> = (1..=3).map(|m| [basis_state(m, 0), basis_state(m, 1)]).collect();
    let log_likelihood = |rho: &CMatrix| -> f64 {
        let mut l = 0.0;
        for m in 0..3 {
            for n in 0..2 {
                if freqs[m][n] > 0.0 {
                    let p = rho.trace_product(&projectors[m][n]).re.max(1e-300);
                    l += freqs[m][n] * p.ln();
                }
            }
        }
        l
    };
    let mut rho = CMatrix::identity(2).scale(0.5);
    let mut last = log_likelihood(&rho);
    for _ in 0..MLE_MAX_ITER {
        let mut r = CMatrix::zeros(2);
        for m in 0..3 {
            for n in 0..2 {
                let p = rho.trace_product(&projectors[m][n]).re.max(1e-300);
                r += &projectors[m][n].scale(freqs[m][n] / p);
            }
        }
        let next = &(&r * &rho) * &r;
        rho = next.scale(1.0 / next.trace_re()).hermitize();
        let l = log_likelihood(&rho);
        let done = (l - last).abs() < MLE_TOL;
        last = l;
        if done {
            break;
        }
    }
    // guard against the iterate drifting a hair outside the Bloch ball
    let bloch = crate::qstate::bloch_of(&rho);
    let len = crate::qstate::norm3(&bloch);
    let bloch = if len > 1.0 { bloch.map(|x| x / len) } else { bloch };
    QubitDensity::from_bloch(bloch).expect("clamped Bloch vector")
}

/// Single-qubit process matrix in the (I, X, Y, Z) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    chi: CMatrix,
}

pub const CHI_BASIS: [&str; 4] = ["I", "X", "Y", "Z"];

impl ProcessMatrix {
    /// Wraps a Hermitian 4×4 matrix as is; no normalization or positivity check.
    pub fn from_matrix(chi: CMatrix) -> Result<Self, LinalgError> {
        if chi.dim() != 4 {
            return Err(LinalgError::DimensionMismatch {
                expected: 4,
                got: chi.dim(),
            });
        }
        let residual = chi.hermiticity_residual();
        if residual > crate::tol::TOL.hermitian_input {
            return Err(LinalgError::NonHermitianInput { residual });
        }
        Ok(Self { chi: chi.hermitize() })
    }

    pub fn identity() -> Self {
        Self {
            chi: CMatrix::diag(&[1.0, 0.0, 0.0, 0.0]),
        }
    }

    /// ρ ↦ I/2.
    pub fn completely_depolarizing() -> Self {
        Self {
            chi: CMatrix::identity(4).scale(0.25),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.chi
    }

    pub fn trace(&self) -> f64 {
        self.chi.trace_re()
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        apply_chi_matrix(&self.chi, rho)
    }

    /// max |Σ_jk χ_jk σ_k σ_j − I|
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = CMatrix::zeros(2);
        for j in 0..4 {
            for k in 0..4 {
                acc += &(&pauli(k) * &pauli(j)).scale_c(self.chi[(j, k)]);
            }
        }
        acc.max_abs_diff(&CMatrix::identity(2))
    }

    /// tr(χ_a χ_b)
    pub fn process_fidelity(&self, other: &ProcessMatrix) -> f64 {
        self.chi.trace_product(&other.chi).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(&self.chi).expect("χ is Hermitian").min()
    }

    pub fn to_file(&self) -> MatrixFile {
        MatrixFile::from_matrix(&self.chi).with_basis(&CHI_BASIS)
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn from_json(json: &str) -> Result<Self, TomoError> {
        let file = MatrixFile::parse(json)?;
        Ok(Self::from_matrix(file.to_matrix()?)?)
    }
}

/// χ from the images of |a⟩⟨b| via χ_jk = ¼ Σ_ab ⟨a|σ_j E(|a⟩⟨b|) σ_k|b⟩.
pub fn chi_from_unit_images(images: &[[CMatrix; 2]; 2]) -> CMatrix {
    let paulis: Vec<CMatrix> = (0..4).map(pauli).collect();
    let mut chi = CMatrix::zeros(4);
    for j in 0..4 {
        for k in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    let m = &(&paulis[j] * &images[a][b]) * &paulis[k];
                    acc += m[(a, b)];
                }
            }
            chi[(j, k)] = acc * 0.25;
        }
    }
    chi
}

/// χ from the images of the Pauli operators E(I), E(X), E(Y), E(Z).
pub fn chi_from_pauli_images(e: &[CMatrix; 4]) -> CMatrix {
    let i = Complex64::new(0.0, 1.0);
    let e00 = (&e[0] + &e[3]).scale(0.5);
    let e11 = (&e[0] - &e[3]).scale(0.5);
    let e01 = (&e[1] + &e[2].scale_c(i)).scale(0.5);
    let e10 = (&e[1] - &e[2].scale_c(i)).scale(0.5);
    chi_from_unit_images(&[[e00, e01], [e10, e11]])
}

/// E(I) = mean_m(O_{0m} + O_{1m}), E(σ_m) = O_{0m} − O_{1m}.
pub fn pauli_images(sextet: &OutputSextet) -> [CMatrix; 4] {
    let mut ei = CMatrix::zeros(2);
    for m in 1..=3 {
        ei += &(sextet.get(m, 0) + sextet.get(m, 1));
    }
    let ei = ei.scale(1.0 / 3.0);
    let [ex, ey, ez] = [1, 2, 3].map(|m| sextet.get(m, 0) - sextet.get(m, 1));
    [ei, ex, ey, ez]
}

/// Linear reconstruction without repair or normalization; tr χ = tr E(I)/2.
/// Complex-linear in the outputs, so it also serves as a map on non-Hermitian arguments.
pub fn chi_linear(sextet: &OutputSextet) -> CMatrix {
    chi_from_pauli_images(&pauli_images(sextet))
}

pub const SEXTET_TRACE_LIMIT: f64 = 0.05;
const CHI_PSD_TRIGGER: f64 = 1e-9;

/// Process tomography from the six outputs: linear reconstruction, PSD repair
/// when the smallest eigenvalue is below −1e−9, trace normalization.
pub fn process_tomography(sextet: &OutputSextet) -> Result<ProcessMatrix, TomoError> {
    let traces: Vec<f64> = (1..=3)
        .map(|m| (sextet.get(m, 0) + sextet.get(m, 1)).trace_re())
        .collect();
    let hi = traces.iter().cloned().fold(f64::MIN, f64::max);
    let lo = traces.iter().cloned().fold(f64::MAX, f64::min);
    if hi - lo > SEXTET_TRACE_LIMIT {
        return Err(TomoError::InconsistentSextet {
            spread: hi - lo,
            limit: SEXTET_TRACE_LIMIT,
        });
    }
    let mut chi = chi_linear(sextet).hermitize();
    let tr = chi.trace_re();
    if tr <= 0.0 {
        return Err(LinalgError::ZeroTrace { trace: tr }.into());
    }
    if eig_hermitian(&chi)?.min() < -CHI_PSD_TRIGGER {
        let repaired = psd_project(&chi)?;
        log::info!(
            "process tomography: PSD repair moved χ by {:.2e}",
            repaired.max_abs_diff(&chi)
        );
        chi = repaired;
    }
    Ok(ProcessMatrix {
        chi: chi.scale(1.0 / tr).hermitize(),
    })
}

/// χ of ρ ↦ R(φ) ρ R(φ)†: u u† with u_j = tr(σ_j R)/2.
pub fn chi_target(phi: f64) -> ProcessMatrix {
    let r = rotation_unitary(phi);
    let u: Vec<Complex64> = (0..4).map(|j| pauli(j).trace_product(&r) * 0.5).collect();
    ProcessMatrix {
        chi: CMatrix::outer(&u).hermitize(),
    }
}

/// Replaces each output by its finite-statistics tomographic estimate.
/// Output (m, n) uses seed `seed + 2(m−1) + n`; the original trace is kept.
pub fn sample_sextet(sextet: &OutputSextet, shots: u64, seed: u64) -> Result<OutputSextet, TomoError> {
    let mut out: Vec<CMatrix> = Vec::with_capacity(6);
    for ((m, n), o) in sextet.iter() {
        let tr = o.trace_re();
        if tr <= 0.0 {
            return Err(LinalgError::ZeroTrace { trace: tr }.into());
        }
        let rho = QubitDensity::new(o.scale(1.0 / tr))
            .map_err(|e| LinalgError::NotAState { reason: e.to_string() })?;
        let records = simulate_counts(&rho, shots, seed + 2 * (m as u64 - 1) + n as u64);
        out.push(state_tomography(&records)?.into_matrix().scale(tr));
    }
    let mut it = out.into_iter();
    Ok(OutputSextet::from_fn(|_, _| it.next().expect("six outputs")))
}
