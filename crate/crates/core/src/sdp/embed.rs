//! Compilation of an [`SdpProblem`] into a real symmetric standard form
//!
//! ```text
//! min ⟨C, X⟩ + c_fᵀu   s.t.   ⟨A_i, X⟩ + f_iᵀu = b_i,   X ⪰ 0 (block diagonal),   u free
//! ```
//!
//! A Hermitian block X = P + iQ becomes the real block [[P, −Q], [Q, P]] and a
//! Hermitian coefficient A = R + iS becomes ½[[R, −S], [S, R]], so that
//! ⟨Ã, X̃⟩ = Re tr(A X). PSD constraints on affine expressions get their own
//! slack block, tied to the expression by one equality per Hermitian basis functional.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::problem::{Field, LinearForm, SdpProblem, Sense};
use super::SdpError;
use crate::linalg::CMatrix;

/// One equality row ⟨A_i, X⟩ + f_iᵀu = b_i, sparse over blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct RealConstraint {
    pub blocks: Vec<(usize, DMatrix<f64>)>,
    pub free: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct UserBlock {
    pub real_index: usize,
    pub dim: usize,
    pub field: Field,
}

/// Real standard form of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSdp {
    pub block_dims: Vec<usize>,
    pub c: Vec<DMatrix<f64>>,
    pub c_free: Vec<f64>,
    pub constraints: Vec<RealConstraint>,
    pub b: Vec<f64>,
    pub(crate) user_blocks: Vec<UserBlock>,
    /// +1 when the original problem minimizes, −1 when it maximizes.
    pub(crate) sign: f64,
    pub(crate) offset: f64,
}

impl RealSdp {
    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn num_free(&self) -> usize {
        self.c_free.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    /// Objective of the original problem from a standard-form objective value.
    pub fn user_objective(&self, standard_value: f64) -> f64 {
        self.sign * standard_value + self.offset
    }

    /// Hermitian values of the user blocks from real standard-form blocks.
    pub fn recover_blocks(&self, x: &[DMatrix<f64>]) -> Vec<CMatrix> {
        self.user_blocks
            .iter()
            .map(|ub| {
                let y = &x[ub.real_index];
                match ub.field {
                    Field::Real => {
                        let mut m = CMatrix::zeros(ub.dim);
                        for i in 0..ub.dim {
                            for j in 0..ub.dim {
                                m[(i, j)] = Complex64::new(0.5 * (y[(i, j)] + y[(j, i)]), 0.0);
                            }
                        }
                        m
                    }
                    Field::Complex => recover_hermitian(y),
                }
            })
            .collect()
    }

    /// Debug dump: block sizes, constraint count and all data, for replaying the
    /// compiled problem in another solver.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            block: usize,
            matrix: Vec<&'a [f64]>,
        }
        #[derive(Serialize)]
        struct Row<'a> {
            blocks: Vec<Entry<'a>>,
            free: &'a [(usize, f64)],
            rhs: f64,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            block_dims: &'a [usize],
            num_constraints: usize,
            num_free: usize,
            objective_sign: f64,
            objective_offset: f64,
            c: Vec<Vec<&'a [f64]>>,
            c_free: &'a [f64],
            constraints: Vec<Row<'a>>,
        }
        // nalgebra is column-major; these matrices are symmetric so columns are rows
        fn rows(m: &DMatrix<f64>) -> Vec<&[f64]> {
            m.as_slice().chunks(m.nrows()).collect()
        }
        let dump = Dump {
            block_dims: &self.block_dims,
            num_constraints: self.num_constraints(),
            num_free: self.num_free(),
            objective_sign: self.sign,
            objective_offset: self.offset,
            c: self.c.iter().map(rows).collect(),
            c_free: &self.c_free,
            constraints: self
                .constraints
                .iter()
                .zip(&self.b)
                .map(|(row, &rhs)| Row {
                    blocks: row
                        .blocks
                        .iter()
                        .map(|(k, m)| Entry {
                            block: *k,
                            matrix: rows(m),
                        })
                        .collect(),
                    free: &row.free,
                    rhs,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&dump).expect("standard form serialization cannot fail")
    }
}

/// [[P, −Q], [Q, P]] for H = P + iQ.
pub fn embed_hermitian(h: &CMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(i + n, j + n)] = z.re;
            out[(i, j + n)] = -z.im;
            out[(i + n, j)] = z.im;
        }
    }
    out
}

/// Inverse of [`embed_hermitian`] after symmetrizing over the complex structure:
/// P = (Y₁₁ + Y₂₂)/2, Q = (Y₂₁ − Y₁₂)/2.
pub fn recover_hermitian(y: &DMatrix<f64>) -> CMatrix {
    let n = y.nrows() / 2;
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let p = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
            let q = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
            out[(i, j)] = Complex64::new(p, q);
        }
    }
    out.hermitize()
}

fn embed_coefficient(a: &CMatrix, field: Field) -> DMatrix<f64> {
    match field {
        Field::Complex => embed_hermitian(&a.hermitize()) * 0.5,
        Field::Real => {
            let n = a.dim();
            DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re))
        }
    }
}

/// Hermitian functionals whose values ⟨F, Z⟩ are the diagonal entries and the
/// real and imaginary parts of each upper off-diagonal entry of Z.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let half = Complex64::new(0.5, 0.0);
    let half_i = Complex64::new(0.0, 0.5);
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(CMatrix::unit(d, i, i));
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut re = CMatrix::zeros(d);
            re[(i, j)] = half;
            re[(j, i)] = half;
            out.push(re);
            let mut im = CMatrix::zeros(d);
            im[(i, j)] = half_i;
            im[(j, i)] = -half_i;
            out.push(im);
        }
    }
    out
}

struct Builder {
    block_dims: Vec<usize>,
    fields: Vec<Field>,
    constraints: Vec<RealConstraint>,
    b: Vec<f64>,
    num_free: usize,
}

impl Builder {
    fn add_block(&mut self, dim: usize, field: Field) -> usize {
        let real_dim = match field {
            Field::Complex => 2 * dim,
            Field::Real => dim,
        };
        self.block_dims.push(real_dim);
        self.fields.push(field);
        self.block_dims.len() - 1
    }

    /// Sums coefficients per block so every block appears once in a row.
    fn compile_form(
        &self,
        form: &LinearForm,
        user: &[UserBlock],
    ) -> (BTreeMap<usize, DMatrix<f64>>, BTreeMap<usize, f64>) {
        let mut blocks: BTreeMap<usize, DMatrix<f64>> = BTreeMap::new();
        for (id, coeff) in &form.blocks {
            let ub = user[id.0];
            let m = embed_coefficient(coeff, ub.field);
            blocks
                .entry(ub.real_index)
                .and_modify(|acc| *acc += &m)
                .or_insert(m);
        }
        let mut free: BTreeMap<usize, f64> = BTreeMap::new();
        for (id, c) in &form.scalars {
            *free.entry(id.0).or_insert(0.0) += c;
        }
        (blocks, free)
    }

    fn push_row(
        &mut self,
        blocks: BTreeMap<usize, DMatrix<f64>>,
        free: BTreeMap<usize, f64>,
        rhs: f64,
    ) {
        self.constraints.push(RealConstraint {
            blocks: blocks
                .into_iter()
                .filter(|(_, m)| m.iter().any(|v| *v != 0.0))
                .collect(),
            free: free.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        });
        self.b.push(rhs);
    }
}

/// Compiles `problem` into the real standard form.
pub fn embed_real(problem: &SdpProblem) -> Result<RealSdp, SdpError> {
    problem.validate()?;
    let mut builder = Builder {
        block_dims: Vec::new(),
        fields: Vec::new(),
        constraints: Vec::new(),
        b: Vec::new(),
        num_free: problem.scalars.len(),
    };
    let user_blocks: Vec<UserBlock> = problem
        .blocks
        .iter()
        .map(|spec| UserBlock {
            real_index: builder.add_block(spec.dim, spec.field),
            dim: spec.dim,
            field: spec.field,
        })
        .collect();

    for (form, rhs) in &problem.equalities {
        let (blocks, free) = builder.compile_form(form, &user_blocks);
        builder.push_row(blocks, free, *rhs);
    }

    // form − s = rhs with a 1×1 slack s ⪰ 0
    for (form, rhs) in &problem.inequalities {
        let (mut blocks, free) = builder.compile_form(form, &user_blocks);
        let s = builder.add_block(1, Field::Real);
        blocks.insert(s, DMatrix::from_element(1, 1, -1.0));
        builder.push_row(blocks, free, *rhs);
    }

    // ⟨F, Z⟩ − ⟨F, Σ L(X) + Σ tM⟩ = ⟨F, G₀⟩ for every basis functional F
    for (_, expr) in &problem.psd {
        let d = expr.dim();
        let field = if d == 1 { Field::Real } else { Field::Complex };
        let z = builder.add_block(d, field);
        for f in hermitian_basis(d) {
            let (form, constant) = expr.functional(&f);
            let (mut blocks, free) = builder.compile_form(&form.negate(), &user_blocks);
            let zf = embed_coefficient(&f, field);
            blocks
                .entry(z)
                .and_modify(|acc| *acc += &zf)
                .or_insert(zf);
            builder.push_row(blocks, free, constant);
        }
    }

    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let (obj_blocks, obj_free) = builder.compile_form(&problem.objective, &user_blocks);
    let c: Vec<DMatrix<f64>> = builder
        .block_dims
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            obj_blocks
                .get(&k)
                .map(|m| m * sign)
                .unwrap_or_else(|| DMatrix::zeros(n, n))
        })
        .collect();
    let c_free: Vec<f64> = (0..builder.num_free)
        .map(|s| sign * obj_free.get(&s).copied().unwrap_or(0.0))
        .collect();

    Ok(RealSdp {
        block_dims: builder.block_dims,
        c,
        c_free,
        constraints: builder.constraints,
        b: builder.b,
        user_blocks,
        sign,
        offset: problem.objective_offset,
    })
}
