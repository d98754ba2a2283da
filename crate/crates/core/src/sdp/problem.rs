use serde::{Deserialize, Serialize};

use super::SdpError;
use crate::linalg::{CMatrix, ZERO};

/// Kind of PSD variable block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    /// Hermitian PSD.
    Complex,
    /// Real symmetric PSD. Coefficients only contribute their real part.
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub(crate) usize);

/// Unconstrained real variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarId(pub(crate) usize);

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
    pub field: Field,
}

/// Complex-linear map between square matrix spaces, stored by its action on
/// the matrix units: `images[a·n + b] = L(|a⟩⟨b|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    in_dim: usize,
    out_dim: usize,
    images: Vec<CMatrix>,
}

impl LinearMap {
    /// Tabulates `f` on the matrix units. `f` must be complex-linear.
    pub fn from_fn(in_dim: usize, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let mut images = Vec::with_capacity(in_dim * in_dim);
        for a in 0..in_dim {
            for b in 0..in_dim {
                let img = f(&CMatrix::unit(in_dim, a, b));
                assert_eq!(img.dim(), out_dim, "linear map produced the wrong dimension");
                images.push(img);
            }
        }
        Self {
            in_dim,
            out_dim,
            images,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, s: f64) -> Self {
        Self::from_fn(dim, dim, |x| x.scale(s))
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.dim(), self.in_dim);
        let mut out = CMatrix::zeros(self.out_dim);
        for a in 0..self.in_dim {
            for b in 0..self.in_dim {
                let c = x[(a, b)];
                if c != ZERO {
                    out += &self.images[a * self.in_dim + b].scale_c(c);
                }
            }
        }
        out
    }

    /// L*(F), defined by tr(L*(F)·X) = tr(F·L(X)); entry (b, a) is tr(F·L(|a⟩⟨b|)).
    pub fn adjoint(&self, f: &CMatrix) -> CMatrix {
        assert_eq!(f.dim(), self.out_dim);
        let mut out = CMatrix::zeros(self.in_dim);
        for a in 0..self.in_dim {
            for b in 0..self.in_dim {
                out[(b, a)] = f.trace_product(&self.images[a * self.in_dim + b]);
            }
        }
        out
    }

    /// Sum of two maps on the same spaces.
    pub fn plus(&self, other: &LinearMap) -> LinearMap {
        assert_eq!((self.in_dim, self.out_dim), (other.in_dim, other.out_dim));
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            images: self
                .images
                .iter()
                .zip(&other.images)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> LinearMap {
        Self {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            images: self.images.iter().map(|m| m.scale(s)).collect(),
        }
    }
}

/// Real linear functional Σ_b ⟨A_b, X_b⟩ + Σ_s c_s t_s with ⟨A, X⟩ = Re tr(A X).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    pub(crate) blocks: Vec<(BlockId, CMatrix)>,
    pub(crate) scalars: Vec<(ScalarId, f64)>,
}

impl LinearForm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(mut self, id: BlockId, coeff: CMatrix) -> Self {
        self.blocks.push((id, coeff));
        self
    }

    pub fn scalar(mut self, id: ScalarId, coeff: f64) -> Self {
        self.scalars.push((id, coeff));
        self
    }

    pub fn extend(mut self, other: LinearForm) -> Self {
        self.blocks.extend(other.blocks);
        self.scalars.extend(other.scalars);
        self
    }

    pub fn negate(mut self) -> Self {
        for (_, c) in &mut self.blocks {
            *c = c.scale(-1.0);
        }
        for (_, c) in &mut self.scalars {
            *c = -*c;
        }
        self
    }
}

/// G₀ + Σ_b L_b(X_b) + Σ_s t_s M_s, a Hermitian matrix affine in the variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineExpr {
    pub(crate) constant: CMatrix,
    pub(crate) blocks: Vec<(BlockId, LinearMap)>,
    pub(crate) scalars: Vec<(ScalarId, CMatrix)>,
}

impl AffineExpr {
    pub fn constant(c: CMatrix) -> Self {
        Self {
            constant: c,
            blocks: Vec::new(),
            scalars: Vec::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(CMatrix::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn plus_block(mut self, id: BlockId, map: LinearMap) -> Self {
        assert_eq!(map.out_dim(), self.dim(), "affine term has the wrong dimension");
        self.blocks.push((id, map));
        self
    }

    pub fn plus_scalar(mut self, id: ScalarId, m: CMatrix) -> Self {
        assert_eq!(m.dim(), self.dim(), "affine term has the wrong dimension");
        self.scalars.push((id, m));
        self
    }

    pub fn plus_constant(mut self, c: &CMatrix) -> Self {
        assert_eq!(c.dim(), self.dim(), "affine term has the wrong dimension");
        self.constant += c;
        self
    }

    pub fn negate(self) -> Self {
        Self {
            constant: self.constant.scale(-1.0),
            blocks: self.blocks.into_iter().map(|(id, map)| (id, map.scale(-1.0))).collect(),
            scalars: self.scalars.into_iter().map(|(id, m)| (id, m.scale(-1.0))).collect(),
        }
    }

    /// f(expr) for a linear map f onto `out_dim`×`out_dim` matrices.
    pub fn compose(self, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self {
            constant: f(&self.constant),
            blocks: self
                .blocks
                .into_iter()
                .map(|(id, map)| (id, LinearMap::from_fn(map.in_dim(), out_dim, |x| f(&map.apply(x)))))
                .collect(),
            scalars: self.scalars.into_iter().map(|(id, m)| (id, f(&m))).collect(),
        }
    }

    /// ⟨F, expr⟩ as (linear part, constant ⟨F, G₀⟩).
    pub fn functional(&self, f: &CMatrix) -> (LinearForm, f64) {
        let form = LinearForm {
            blocks: self
                .blocks
                .iter()
                .map(|(id, map)| (*id, map.adjoint(f).hermitize()))
                .collect(),
            scalars: self
                .scalars
                .iter()
                .map(|(id, m)| (*id, f.trace_product(m).re))
                .collect(),
        };
        (form, f.trace_product(&self.constant).re)
    }

    /// Value of the expression at given variable values.
    pub fn evaluate(&self, blocks: &[CMatrix], scalars: &[f64]) -> CMatrix {
        let mut out = self.constant.clone();
        for (id, map) in &self.blocks {
            out += &map.apply(&blocks[id.0]);
        }
        for (id, m) in &self.scalars {
            out += &m.scale(scalars[id.0]);
        }
        out
    }
}

/// Block-diagonal SDP over Hermitian variables.
#[derive(Debug, Clone)]
pub struct SdpProblem {
    pub(crate) sense: Sense,
    pub(crate) blocks: Vec<BlockSpec>,
    pub(crate) scalars: Vec<String>,
    pub(crate) objective: LinearForm,
    pub(crate) objective_offset: f64,
    pub(crate) equalities: Vec<(LinearForm, f64)>,
    /// form ≥ rhs
    pub(crate) inequalities: Vec<(LinearForm, f64)>,
    pub(crate) psd: Vec<(String, AffineExpr)>,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            blocks: Vec::new(),
            scalars: Vec::new(),
            objective: LinearForm::new(),
            objective_offset: 0.0,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            psd: Vec::new(),
        }
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn add_block(&mut self, name: impl Into<String>, dim: usize, field: Field) -> BlockId {
        assert!(dim > 0, "block dimension must be positive");
        self.blocks.push(BlockSpec {
            name: name.into(),
            dim,
            field,
        });
        BlockId(self.blocks.len() - 1)
    }

    pub fn add_scalar(&mut self, name: impl Into<String>) -> ScalarId {
        self.scalars.push(name.into());
        ScalarId(self.scalars.len() - 1)
    }

    /// Adds `form` to the objective.
    pub fn add_objective(&mut self, form: LinearForm) {
        self.objective = std::mem::take(&mut self.objective).extend(form);
    }

    /// Adds ⟨F, expr⟩ to the objective.
    pub fn add_objective_affine(&mut self, expr: &AffineExpr, f: &CMatrix) {
        let (form, c) = expr.functional(f);
        self.add_objective(form);
        self.objective_offset += c;
    }

    pub fn add_equality(&mut self, form: LinearForm, rhs: f64) {
        self.equalities.push((form, rhs));
    }

    /// ⟨F, expr⟩ = rhs
    pub fn add_equality_affine(&mut self, expr: &AffineExpr, f: &CMatrix, rhs: f64) {
        let (form, c) = expr.functional(f);
        self.add_equality(form, rhs - c);
    }

    /// form ≥ rhs
    pub fn add_inequality(&mut self, form: LinearForm, rhs: f64) {
        self.inequalities.push((form, rhs));
    }

    /// ⟨F, expr⟩ ≥ rhs
    pub fn add_inequality_affine(&mut self, expr: &AffineExpr, f: &CMatrix, rhs: f64) {
        let (form, c) = expr.functional(f);
        self.add_inequality(form, rhs - c);
    }

    /// expr ⪰ 0
    pub fn add_psd(&mut self, name: impl Into<String>, expr: AffineExpr) {
        self.psd.push((name.into(), expr));
    }

    pub(crate) fn validate(&self) -> Result<(), SdpError> {
        let check_form = |form: &LinearForm, what: &str| -> Result<(), SdpError> {
            for (id, c) in &form.blocks {
                let spec = self
                    .blocks
                    .get(id.0)
                    .ok_or_else(|| SdpError::Malformed(format!("{what}: unknown block {}", id.0)))?;
                if c.dim() != spec.dim {
                    return Err(SdpError::Malformed(format!(
                        "{what}: coefficient of dimension {} for block '{}' of dimension {}",
                        c.dim(),
                        spec.name,
                        spec.dim
                    )));
                }
                if c.hermiticity_residual() > 1e-9 {
                    return Err(SdpError::Malformed(format!(
                        "{what}: coefficient for block '{}' is not Hermitian",
                        spec.name
                    )));
                }
            }
            if let Some((id, _)) = form.scalars.iter().find(|(id, _)| id.0 >= self.scalars.len()) {
                return Err(SdpError::Malformed(format!("{what}: unknown scalar {}", id.0)));
            }
            Ok(())
        };
        check_form(&self.objective, "objective")?;
        for (i, (form, _)) in self.equalities.iter().enumerate() {
            check_form(form, &format!("equality {i}"))?;
        }
        for (i, (form, _)) in self.inequalities.iter().enumerate() {
            check_form(form, &format!("inequality {i}"))?;
        }
        for (name, expr) in &self.psd {
            if expr.constant.hermiticity_residual() > 1e-9 {
                return Err(SdpError::Malformed(format!("{name}: constant term is not Hermitian")));
            }
            for (id, map) in &expr.blocks {
                let spec = self
                    .blocks
                    .get(id.0)
                    .ok_or_else(|| SdpError::Malformed(format!("{name}: unknown block {}", id.0)))?;
                if map.in_dim() != spec.dim {
                    return Err(SdpError::Malformed(format!(
                        "{name}: map expects dimension {}, block '{}' has {}",
                        map.in_dim(),
                        spec.name,
                        spec.dim
                    )));
                }
            }
            if let Some((id, _)) = expr.scalars.iter().find(|(id, _)| id.0 >= self.scalars.len()) {
                return Err(SdpError::Malformed(format!("{name}: unknown scalar {}", id.0)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use num_complex::Complex64;

    #[test]
    fn adjoint_satisfies_defining_identity() {
        let u = crate::rsp::rotation_unitary(0.7);
        let map = LinearMap::from_fn(2, 2, |x| x.conjugate_by(&u).scale(2.0));
        let x = &pauli(1).scale(0.3) + &pauli(3).scale(-0.2);
        let f = &pauli(2) + &CMatrix::identity(2).scale(0.5);
        let lhs = map.adjoint(&f).trace_product(&x);
        let rhs = f.trace_product(&map.apply(&x));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn apply_matches_closure_on_complex_input() {
        let map = LinearMap::from_fn(2, 4, |x| crate::linalg::kron(x, &pauli(1)));
        let mut x = CMatrix::identity(2);
        x[(0, 1)] = Complex64::new(0.2, -0.7);
        x[(1, 0)] = Complex64::new(0.2, 0.7);
        let want = crate::linalg::kron(&x, &pauli(1));
        assert!(map.apply(&x).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn validation_catches_dimension_errors() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let b = p.add_block("x", 2, Field::Complex);
        p.add_objective(LinearForm::new().block(b, CMatrix::identity(3)));
        assert!(matches!(p.validate(), Err(SdpError::Malformed(_))));
    }
}
