use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{CMatrix, LinalgError, ZERO};
use crate::tol::TOL;

/// Eigendecomposition of a Hermitian matrix: `M = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct HermEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn max(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V diag(values) V†` with the stored eigenvectors and a replacement spectrum.
    pub fn reassemble(&self, values: &[f64]) -> CMatrix {
        let n = self.vectors.dim();
        assert_eq!(values.len(), n);
        let mut out = CMatrix::zeros(n);
        for (k, &lam) in values.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out.hermitize()
    }

    pub fn reconstruction_error(&self, m: &CMatrix) -> f64 {
        self.reassemble(&self.values).max_abs_diff(m)
    }
}

/// Hermitian eigensolver with deterministic eigenvectors.
///
/// Within a degenerate cluster the basis is rebuilt from projections of the
/// canonical basis vectors (pivoted Gram-Schmidt, largest residual first, ties
/// to the lower index), then ordered by pivot index. Non-degenerate vectors come
/// out with their largest-magnitude component real and positive.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermEig, LinalgError> {
    let residual = m.hermiticity_residual();
    if residual > TOL.hermitian_input {
        return Err(LinalgError::NonHermitianInput { residual });
    }
    let n = m.dim();
    let h = m.hermitize();
    let dm = DMatrix::from_fn(n, n, |i, j| h[(i, j)]);
    let se = SymmetricEigen::new(dm);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let raw: Vec<Vec<Complex64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| se.eigenvectors[(i, k)]).collect())
        .collect();

    let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let mut vectors = CMatrix::zeros(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= TOL.degeneracy * scale {
            end += 1;
        }
        let canon = canonical_cluster_basis(&raw[start..end], n);
        for (offset, v) in canon.iter().enumerate() {
            for i in 0..n {
                vectors[(i, start + offset)] = v[i];
            }
        }
        start = end;
    }
    Ok(HermEig { values, vectors })
}

fn canonical_cluster_basis(cluster: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let k = cluster.len();
    // P e_i = Σ_v v (v_i)*
    let projections: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            let mut p = vec![ZERO; n];
            for v in cluster {
                let c = v[i].conj();
                for (pj, vj) in p.iter_mut().zip(v) {
                    *pj += vj * c;
                }
            }
            p
        })
        .collect();

    let mut chosen: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(k);
    let mut used = vec![false; n];
    for _ in 0..k {
        let mut best: Option<(usize, Vec<Complex64>, f64)> = None;
        for i in (0..n).filter(|&i| !used[i]) {
            let mut r = projections[i].clone();
            for (_, q) in &chosen {
                let ov: Complex64 = q.iter().zip(&r).map(|(a, b)| a.conj() * b).sum();
                for (rj, qj) in r.iter_mut().zip(q) {
                    *rj -= qj * ov;
                }
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let better = match &best {
                None => true,
                Some((_, _, bn)) => norm > bn * (1.0 + 1e-12) + 1e-15,
            };
            if better {
                best = Some((i, r, norm));
            }
        }
        let (i, r, norm) = best.expect("cluster larger than the space");
        used[i] = true;
        chosen.push((i, r.into_iter().map(|z| z / norm).collect()));
    }
    chosen.sort_by_key(|(i, _)| *i);
    chosen.into_iter().map(|(_, v)| v).collect()
}

/// Principal square root of a (nearly) PSD Hermitian matrix. Negative
/// eigenvalues are clipped to zero.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix, LinalgError> {
    let eig = eig_hermitian(m)?;
    if eig.min() < -TOL.sqrt_clip {
        log::debug!("sqrt_psd: clipping eigenvalue {:.3e}", eig.min());
    }
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(eig.reassemble(&roots))
}
