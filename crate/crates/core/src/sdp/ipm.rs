//! Infeasible-start primal-dual path following with Nesterov-Todd scaling and
//! Mehrotra predictor-corrector steps, on the real standard form of [`super::embed`].
//!
//! Per block, with X = LLᵀ and LᵀSL = UDUᵀ, the scaling is G = L·U·D^{-1/4} and
//! W = GGᵀ, so that G⁻¹XG⁻ᵀ = GᵀSG = Λ = D^{1/2}. The search direction solves
//!
//! ```text
//! A(ΔX) + FΔu = r_p,   AᵀΔy + ΔS = R_d,   Fᵀ Δy = r_f,   ΔX + WΔSW = G Z Gᵀ,
//! ```
//!
//! where Z solves ½(ΛZ + ZΛ) = R, through the Schur complement M_ij = ⟨A_i, W A_j W⟩.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::embed::RealSdp;

/// Stopping and safeguarding parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Relative gap and relative residuals at which iteration stops.
    pub target_tol: f64,
    /// Looser level accepted when progress stalls before the target.
    pub accept_tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the PSD boundary taken per step.
    pub step_fraction: f64,
    /// A dual objective above this (or primal below its negative) declares infeasibility.
    pub divergence: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            target_tol: 1e-8,
            accept_tol: 1e-7,
            max_iter: 200,
            step_fraction: 0.98,
            divergence: 1e9,
        }
    }
}

/// One row of the iteration log, in standard-form (minimization) terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateInfo {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// ⟨X, S⟩
    pub complementarity: f64,
    pub rel_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl IterateInfo {
    pub fn worst(&self) -> f64 {
        self.rel_gap
            .max(self.primal_infeasibility)
            .max(self.dual_infeasibility)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Converged,
    Stalled,
    MaxIter,
    Breakdown,
    PrimalInfeasible,
    DualInfeasible,
}

pub(crate) struct RawSolution {
    /// Residuals of the returned iterate.
    pub info: IterateInfo,
    pub x: Vec<DMatrix<f64>>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub history: Vec<IterateInfo>,
    pub outcome: Outcome,
}

struct Iterate {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    u: DVector<f64>,
}

struct Scaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: DVector<f64>,
    chol_x_inv: DMatrix<f64>,
    chol_s_inv: DMatrix<f64>,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    du: DVector<f64>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.dot(b)
}

impl RealSdp {
    /// ⟨A_i, X⟩ + f_iᵀu for every row.
    fn apply_a(&self, x: &[DMatrix<f64>], u: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|row| {
                row.blocks.iter().map(|(k, a)| inner(a, &x[*k])).sum::<f64>()
                    + row.free.iter().map(|(j, f)| f * u[*j]).sum::<f64>()
            }),
        )
    }

    /// Σ_i y_i A_i per block.
    fn apply_at(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> =
            self.block_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        for (i, row) in self.constraints.iter().enumerate() {
            if y[i] == 0.0 {
                continue;
            }
            for (k, a) in &row.blocks {
                out[*k] += a * y[i];
            }
        }
        out
    }

    /// Σ_i y_i f_i
    fn apply_ft(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.num_free());
        for (i, row) in self.constraints.iter().enumerate() {
            for (j, f) in &row.free {
                out[*j] += f * y[i];
            }
        }
        out
    }

    fn objective(&self, x: &[DMatrix<f64>], u: &DVector<f64>) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| inner(c, x)).sum::<f64>()
            + self.c_free.iter().zip(u.iter()).map(|(c, u)| c * u).sum::<f64>()
    }
}

fn frob(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

fn lower_inverse(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
}

fn scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<Scaling> {
    let lx = x.clone().cholesky()?.l();
    let ls = s.clone().cholesky()?.l();
    let lx_inv = lower_inverse(&lx)?;
    let ls_inv = lower_inverse(&ls)?;
    let t = sym(&(lx.transpose() * s * &lx));
    let eig = t.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return None;
    }
    let d_quarter_inv = eig.eigenvalues.map(|d| d.powf(-0.25));
    let d_quarter = eig.eigenvalues.map(|d| d.powf(0.25));
    let g = &lx * &eig.eigenvectors * DMatrix::from_diagonal(&d_quarter_inv);
    let g_inv = DMatrix::from_diagonal(&d_quarter) * eig.eigenvectors.transpose() * &lx_inv;
    let w = sym(&(&g * g.transpose()));
    Some(Scaling {
        lambda: eig.eigenvalues.map(f64::sqrt),
        g,
        g_inv,
        w,
        chol_x_inv: lx_inv,
        chol_s_inv: ls_inv,
    })
}

/// Largest α ≤ `cap` keeping M + αΔ ⪰ 0, given L⁻¹ for M = LLᵀ.
fn max_step(l_inv: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let t = sym(&(l_inv * delta * l_inv.transpose()));
    let lmin = t.symmetric_eigenvalues().min();
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

enum SchurFactor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn solve(&self, rhs: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            SchurFactor::Chol(c) => Some(c.solve(rhs)),
            SchurFactor::Lu(lu) => lu.solve(rhs),
        }
    }
}

struct Workspace<'a> {
    sdp: &'a RealSdp,
    scal: Vec<Scaling>,
    /// W A_j W per constraint, sparse over blocks like the constraint itself.
    waw: Vec<Vec<(usize, DMatrix<f64>)>>,
    factor: SchurFactor,
    m: usize,
}

impl<'a> Workspace<'a> {
    fn build(sdp: &'a RealSdp, it: &Iterate) -> Option<Self> {
        let scal: Vec<Scaling> = it
            .x
            .iter()
            .zip(&it.s)
            .map(|(x, s)| scaling(x, s))
            .collect::<Option<_>>()?;
        let m = sdp.constraints.len();
        let waw: Vec<Vec<(usize, DMatrix<f64>)>> = sdp
            .constraints
            .iter()
            .map(|row| {
                row.blocks
                    .iter()
                    .map(|(k, a)| (*k, sym(&(&scal[*k].w * a * &scal[*k].w))))
                    .collect()
            })
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for i in 0..m {
            let ai = &sdp.constraints[i].blocks;
            for j in 0..=i {
                let mut v = 0.0;
                for (k, a) in ai {
                    if let Some((_, b)) = waw[j].iter().find(|(kb, _)| kb == k) {
                        v += inner(a, b);
                    }
                }
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let nf = sdp.num_free();
        let factor = if nf == 0 {
            match schur.clone().cholesky() {
                Some(c) => SchurFactor::Chol(c),
                None => SchurFactor::Lu(schur.lu()),
            }
        } else {
            let mut aug = DMatrix::zeros(m + nf, m + nf);
            aug.view_mut((0, 0), (m, m)).copy_from(&schur);
            for (i, row) in sdp.constraints.iter().enumerate() {
                for (j, f) in &row.free {
                    aug[(i, m + j)] = *f;
                    aug[(m + j, i)] = *f;
                }
            }
            SchurFactor::Lu(aug.lu())
        };
        Some(Self {
            sdp,
            scal,
            waw,
            factor,
            m,
        })
    }

    /// Direction for complementarity right-hand side `r` (scaled space, per block).
    fn direction(
        &self,
        rp: &DVector<f64>,
        rd: &[DMatrix<f64>],
        rf: &DVector<f64>,
        r: &[DMatrix<f64>],
    ) -> Option<Direction> {
        let sdp = self.sdp;
        let h: Vec<DMatrix<f64>> = self
            .scal
            .iter()
            .zip(r)
            .map(|(sc, r)| {
                let n = sc.lambda.len();
                let z = DMatrix::from_fn(n, n, |i, j| 2.0 * r[(i, j)] / (sc.lambda[i] + sc.lambda[j]));
                sym(&(&sc.g * z * sc.g.transpose()))
            })
            .collect();
        let wrw: Vec<DMatrix<f64>> = self
            .scal
            .iter()
            .zip(rd)
            .map(|(sc, rd)| sym(&(&sc.w * rd * &sc.w)))
            .collect();
        let zero_u = DVector::zeros(sdp.num_free());
        let a_h = sdp.apply_a(&h, &zero_u);
        let a_wrw = sdp.apply_a(&wrw, &zero_u);
        let top = rp - a_h + a_wrw;
        let nf = sdp.num_free();
        let rhs = if nf == 0 {
            top
        } else {
            let mut v = DVector::zeros(self.m + nf);
            v.rows_mut(0, self.m).copy_from(&top);
            v.rows_mut(self.m, nf).copy_from(rf);
            v
        };
        let sol = self.factor.solve(&rhs)?;
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let dy = sol.rows(0, self.m).into_owned();
        let du = if nf == 0 {
            DVector::zeros(0)
        } else {
            sol.rows(self.m, nf).into_owned()
        };
        // ΔS = R_d − AᵀΔy, ΔX = H − WΔSW (using the cached W A_j W)
        let aty = sdp.apply_at(&dy);
        let ds: Vec<DMatrix<f64>> = rd.iter().zip(&aty).map(|(r, a)| r - a).collect();
        let mut dx: Vec<DMatrix<f64>> = h.iter().zip(&wrw).map(|(h, w)| h - w).collect();
        for (j, blocks) in self.waw.iter().enumerate() {
            if dy[j] == 0.0 {
                continue;
            }
            for (k, b) in blocks {
                dx[*k] += b * dy[j];
            }
        }
        Some(Direction { dx, ds, dy, du })
    }

    fn step_lengths(&self, d: &Direction) -> (f64, f64) {
        let mut ap = f64::INFINITY;
        let mut ad = f64::INFINITY;
        for (k, sc) in self.scal.iter().enumerate() {
            ap = ap.min(max_step(&sc.chol_x_inv, &d.dx[k]));
            ad = ad.min(max_step(&sc.chol_s_inv, &d.ds[k]));
        }
        (ap, ad)
    }
}

fn initial_point(sdp: &RealSdp) -> Iterate {
    let nrm = |m: &DMatrix<f64>| m.norm();
    let x: Vec<DMatrix<f64>> = sdp
        .block_dims
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let nf = n as f64;
            let mut xi = 10f64.max(nf.sqrt());
            for (row, b) in sdp.constraints.iter().zip(&sdp.b) {
                if let Some((_, a)) = row.blocks.iter().find(|(kb, _)| *kb == k) {
                    xi = xi.max(nf * (1.0 + b.abs()) / (1.0 + nrm(a)));
                }
            }
            DMatrix::identity(n, n) * xi
        })
        .collect();
    let s: Vec<DMatrix<f64>> = sdp
        .block_dims
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let nf = n as f64;
            let mut eta = 10f64.max(nf.sqrt()).max(nrm(&sdp.c[k]));
            for row in &sdp.constraints {
                if let Some((_, a)) = row.blocks.iter().find(|(kb, _)| *kb == k) {
                    eta = eta.max(nrm(a));
                }
            }
            DMatrix::identity(n, n) * ((1.0 + eta) / 2.0).max(1.0)
        })
        .collect();
    Iterate {
        x,
        s,
        y: DVector::zeros(sdp.constraints.len()),
        u: DVector::zeros(sdp.num_free()),
    }
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rf: DVector<f64>,
    info: IterateInfo,
}

fn residuals(sdp: &RealSdp, it: &Iterate, iteration: usize, steps: (f64, f64)) -> Residuals {
    let b = DVector::from_column_slice(&sdp.b);
    let rp = &b - sdp.apply_a(&it.x, &it.u);
    let aty = sdp.apply_at(&it.y);
    let rd: Vec<DMatrix<f64>> = sdp
        .c
        .iter()
        .zip(&aty)
        .zip(&it.s)
        .map(|((c, a), s)| c - a - s)
        .collect();
    let cf = DVector::from_column_slice(&sdp.c_free);
    let rf = &cf - sdp.apply_ft(&it.y);
    let pobj = sdp.objective(&it.x, &it.u);
    let dobj = b.dot(&it.y);
    let compl: f64 = it.x.iter().zip(&it.s).map(|(x, s)| inner(x, s)).sum();
    let denom = 1.0 + pobj.abs() + dobj.abs();
    let rel_gap = (compl.abs() / denom).max((pobj - dobj).abs() / denom);
    let pinf = rp.norm() / (1.0 + b.norm());
    let dinf = (frob(&rd) / (1.0 + frob(&sdp.c))).max(rf.norm() / (1.0 + cf.norm()));
    Residuals {
        rp,
        rd,
        rf,
        info: IterateInfo {
            iteration,
            primal_objective: pobj,
            dual_objective: dobj,
            complementarity: compl,
            rel_gap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            step_primal: steps.0,
            step_dual: steps.1,
        },
    }
}

pub(crate) fn solve_standard(sdp: &RealSdp, opts: &SolverOptions) -> RawSolution {
    let n_total = sdp.total_dim() as f64;
    let mut it = initial_point(sdp);
    let mut history: Vec<IterateInfo> = Vec::new();
    let mut steps = (0.0, 0.0);
    let mut tiny_steps = 0;
    let mut best: Option<(f64, Iterate)> = None;

    let finish = |it: Iterate, history: Vec<IterateInfo>, outcome: Outcome| RawSolution {
        info: residuals(sdp, &it, history.len().saturating_sub(1), (0.0, 0.0)).info,
        x: it.x,
        u: it.u.iter().copied().collect(),
        y: it.y.iter().copied().collect(),
        history,
        outcome,
    };

    for iteration in 0..=opts.max_iter {
        let res = residuals(sdp, &it, iteration, steps);
        let info = res.info;
        history.push(info);
        log::trace!("ipm {iteration}: {info:?}");

        if info.worst() < opts.target_tol {
            return finish(it, history, Outcome::Converged);
        }
        if best.as_ref().is_none_or(|(w, _)| info.worst() < *w) {
            best = Some((
                info.worst(),
                Iterate {
                    x: it.x.clone(),
                    s: it.s.clone(),
                    y: it.y.clone(),
                    u: it.u.clone(),
                },
            ));
        }
        if info.dual_objective > opts.divergence && info.dual_infeasibility < opts.accept_tol {
            return finish(it, history, Outcome::PrimalInfeasible);
        }
        if info.primal_objective < -opts.divergence && info.primal_infeasibility < opts.accept_tol {
            return finish(it, history, Outcome::DualInfeasible);
        }
        if iteration == opts.max_iter {
            break;
        }

        let outcome = (|| -> Option<()> {
            let ws = Workspace::build(sdp, &it)?;
            let mu = info.complementarity / n_total;

            // predictor: drive complementarity to zero
            let r_aff: Vec<DMatrix<f64>> = ws
                .scal
                .iter()
                .map(|sc| DMatrix::from_diagonal(&sc.lambda.map(|l| -l * l)))
                .collect();
            let aff = ws.direction(&res.rp, &res.rd, &res.rf, &r_aff)?;
            let (ap, ad) = ws.step_lengths(&aff);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff: f64 = it
                .x
                .iter()
                .zip(&it.s)
                .zip(aff.dx.iter().zip(&aff.ds))
                .map(|((x, s), (dx, ds))| inner(&(x + dx * ap), &(s + ds * ad)))
                .sum::<f64>()
                / n_total;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector with the second-order term of the predictor
            let r_cor: Vec<DMatrix<f64>> = ws
                .scal
                .iter()
                .enumerate()
                .map(|(k, sc)| {
                    let n = sc.lambda.len();
                    let dxt = &sc.g_inv * &aff.dx[k] * sc.g_inv.transpose();
                    let dst = sc.g.transpose() * &aff.ds[k] * &sc.g;
                    let mut r = -sym(&(&dxt * &dst));
                    for i in 0..n {
                        r[(i, i)] += sigma * mu - sc.lambda[i] * sc.lambda[i];
                    }
                    r
                })
                .collect();
            let dir = ws.direction(&res.rp, &res.rd, &res.rf, &r_cor)?;
            let (ap, ad) = ws.step_lengths(&dir);
            let ap = (opts.step_fraction * ap).min(1.0);
            let ad = (opts.step_fraction * ad).min(1.0);
            for k in 0..it.x.len() {
                it.x[k] = sym(&(&it.x[k] + &dir.dx[k] * ap));
                it.s[k] = sym(&(&it.s[k] + &dir.ds[k] * ad));
            }
            it.u += &dir.du * ap;
            it.y += &dir.dy * ad;
            steps = (ap, ad);
            Some(())
        })();

        if outcome.is_none() {
            let (_, b) = best.take().expect("at least one iterate recorded");
            let ok = history.iter().map(|h| h.worst()).fold(f64::INFINITY, f64::min) < opts.accept_tol;
            return finish(b, history, if ok { Outcome::Stalled } else { Outcome::Breakdown });
        }
        if steps.0.max(steps.1) < 1e-10 {
            tiny_steps += 1;
            if tiny_steps >= 3 {
                let (w, b) = best.take().expect("at least one iterate recorded");
                let outcome = if w < opts.accept_tol { Outcome::Stalled } else { Outcome::Breakdown };
                return finish(b, history, outcome);
            }
        } else {
            tiny_steps = 0;
        }
    }
    let (w, b) = best.take().expect("at least one iterate recorded");
    let outcome = if w < opts.accept_tol { Outcome::Stalled } else { Outcome::MaxIter };
    finish(b, history, outcome)
}
