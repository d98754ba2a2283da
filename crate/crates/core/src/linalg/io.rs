//! JSON matrix files: `{"dim": n, "re": [[...]], "im": [[...]]}`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CMatrix;

#[derive(Debug, Error)]
pub enum MatrixFileError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed matrix: {0}")]
    Shape(String),
}

/// On-disk matrix object. `basis`, `name` and `note` are optional annotations;
/// unknown keys are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let n = m.dim();
        Self {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
            basis: None,
            name: None,
            note: None,
        }
    }

    pub fn with_basis(mut self, basis: &[&str]) -> Self {
        self.basis = Some(basis.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn to_matrix(&self) -> Result<CMatrix, MatrixFileError> {
        let n = self.dim;
        if n == 0 {
            return Err(MatrixFileError::Shape("dim must be positive".into()));
        }
        for (label, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != n {
                return Err(MatrixFileError::Shape(format!(
                    "{label} has {} rows, dim is {n}",
                    part.len()
                )));
            }
            if let Some((i, row)) = part.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(MatrixFileError::Shape(format!(
                    "{label} row {i} has {} entries, dim is {n}",
                    row.len()
                )));
            }
        }
        let data = (0..n)
            .flat_map(|i| (0..n).map(move |j| Complex64::new(self.re[i][j], self.im[i][j])))
            .collect();
        Ok(CMatrix::from_vec(n, data))
    }

    pub fn parse(json: &str) -> Result<Self, MatrixFileError> {
        let file: Self = serde_json::from_str(json)?;
        // validate shape eagerly
        file.to_matrix()?;
        Ok(file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, MatrixFileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix serialization cannot fail")
    }
}

/// Parses a matrix JSON string straight into a [`CMatrix`].
pub fn parse_matrix(json: &str) -> Result<CMatrix, MatrixFileError> {
    MatrixFile::parse(json)?.to_matrix()
}
