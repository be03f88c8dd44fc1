//! Dense primal-dual interior-point method for real block SDPs.
//!
//! Problems are stated in linear-matrix-inequality form
//!
//! ```text
//! minimize  cᵀy   subject to  F₀ + Σᵢ yᵢ Fᵢ ⪰ 0   (block diagonal)
//! ```
//!
//! which is the dual of `max −⟨F₀, X⟩ s.t. ⟨Fᵢ, X⟩ = cᵢ, X ⪰ 0`. The iteration
//! is an infeasible-start path-following method with the HKM search direction
//! and Mehrotra's predictor-corrector.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type RMat = DMatrix<f64>;

/// Sparse symmetric coefficient matrix with both triangles stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// Sparse copy of a dense symmetric matrix, dropping exact zeros.
    pub fn from_dense(m: &RMat) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        SparseSym { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Tr[F W] = Σ F_pq W_qp`.
    pub fn trace_with(&self, w: &RMat) -> f64 {
        self.entries.iter().map(|&(p, q, v)| v * w[(q, p)]).sum()
    }

    pub fn add_scaled_to(&self, s: f64, out: &mut RMat) {
        for &(p, q, v) in &self.entries {
            out[(p, q)] += s * v;
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

/// One PSD block: `F₀ + Σᵢ yᵢ Fᵢ ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub f0: RMat,
    pub terms: Vec<(usize, SparseSym)>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.f0.nrows()
    }
}

/// A block LMI program `min cᵀy s.t. F(y) ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub cost: Vec<f64>,
    pub blocks: Vec<Block>,
}

impl SdpProblem {
    pub fn nvars(&self) -> usize {
        self.cost.len()
    }

    /// `F(y) = F₀ + Σ yᵢFᵢ`, blockwise.
    pub fn lmi_value(&self, y: &[f64]) -> Vec<RMat> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = b.f0.clone();
                for (i, f) in &b.terms {
                    f.add_scaled_to(y[*i], &mut m);
                }
                m
            })
            .collect()
    }

    /// The linear part `Σ yᵢFᵢ`, blockwise.
    pub fn apply_adjoint(&self, y: &[f64]) -> Vec<RMat> {
        self.blocks
            .iter()
            .map(|b| {
                let mut m = RMat::zeros(b.dim(), b.dim());
                for (i, f) in &b.terms {
                    f.add_scaled_to(y[*i], &mut m);
                }
                m
            })
            .collect()
    }

    /// `(⟨Fᵢ, X⟩)ᵢ`.
    pub fn apply(&self, x: &[RMat]) -> Vec<f64> {
        let mut out = vec![0.0; self.nvars()];
        for (b, xb) in self.blocks.iter().zip(x) {
            for (i, f) in &b.terms {
                out[*i] += f.trace_with(xb);
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let m = self.nvars();
        let mut used = vec![false; m];
        for (k, b) in self.blocks.iter().enumerate() {
            if b.f0.nrows() != b.f0.ncols() {
                return Err(Error::DimMismatch(format!("block {k} is not square")));
            }
            let n = b.dim();
            for (i, f) in &b.terms {
                if *i >= m {
                    return Err(Error::DimMismatch(format!("block {k} references variable {i} of {m}")));
                }
                if f.entries.iter().any(|&(p, q, _)| p >= n || q >= n) {
                    return Err(Error::DimMismatch(format!("coefficient out of range in block {k}")));
                }
                used[*i] |= !f.is_empty();
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::DimMismatch(format!("variable {i} does not enter any constraint")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// `cᵀy` at the returned iterate (an upper bound on the optimum when feasible).
    pub primal_value: f64,
    /// `−⟨F₀, X⟩` (a lower bound on the optimum when `X` is feasible).
    pub dual_value: f64,
    /// `|primal − dual| / (1 + |primal|)`.
    pub gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub y: Vec<f64>,
    pub x: Vec<RMat>,
    pub iterations: usize,
}

impl SdpSolution {
    /// Midpoint of the two bounds.
    pub fn value(&self) -> f64 {
        0.5 * (self.primal_value + self.dual_value)
    }

    pub fn residual(&self) -> f64 {
        self.gap.max(self.primal_infeasibility).max(self.dual_infeasibility)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub stall_window: usize,
    pub stall_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: crate::tolerance::get().sdp,
            max_iter: 200,
            stall_window: 20,
            stall_threshold: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..SolverOptions::default()
        }
    }
}

fn sym(m: &RMat) -> RMat {
    (m + m.transpose()) * 0.5
}

fn dot(a: &RMat, b: &RMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn chol(m: &RMat) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    Cholesky::new(sym(m))
}

/// Largest `α ≤ cap` with `X + αΔ ⪰ 0`, given a Cholesky factor of `X`.
fn max_step(l: &RMat, delta: &RMat, cap: f64) -> f64 {
    let linv = match l.clone().try_inverse() {
        Some(v) => v,
        None => return 0.0,
    };
    let w = &linv * delta * linv.transpose();
    let eig = SymmetricEigen::new(sym(&w));
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        cap
    } else {
        (-1.0 / min).min(cap)
    }
}

struct Iterate {
    x: Vec<RMat>,
    z: Vec<RMat>,
    y: Vec<f64>,
}

/// Solves `min cᵀy s.t. F₀ + Σ yᵢFᵢ ⪰ 0`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    let m = p.nvars();
    let nb = p.blocks.len();
    let n_total: usize = p.blocks.iter().map(|b| b.dim()).sum();
    let c_norm = p.cost.iter().map(|v| v * v).sum::<f64>().sqrt();
    let f0_norm = p.blocks.iter().map(|b| b.f0.norm_squared()).sum::<f64>().sqrt();

    let mut it = Iterate {
        x: Vec::with_capacity(nb),
        z: Vec::with_capacity(nb),
        y: vec![0.0; m],
    };
    for b in &p.blocks {
        let n = b.dim() as f64;
        let mut max_ratio = 0.0f64;
        let mut max_a = b.f0.norm();
        for (i, f) in &b.terms {
            let fa = f.fro_norm();
            max_ratio = max_ratio.max((1.0 + p.cost[*i].abs()) / (1.0 + fa));
            max_a = max_a.max(fa);
        }
        let xi = 10f64.max(n.sqrt()).max(n.sqrt() * max_ratio);
        let eta = 10f64.max(n.sqrt()).max(max_a);
        it.x.push(RMat::identity(b.dim(), b.dim()) * xi);
        it.z.push(RMat::identity(b.dim(), b.dim()) * eta);
    }

    let mut best: Option<SdpSolution> = None;
    let mut best_infeas = f64::INFINITY;
    let mut stall = 0usize;

    for iter in 0..=opts.max_iter {
        let fx = p.apply(&it.x);
        let rp: Vec<f64> = (0..m).map(|i| fx[i] - p.cost[i]).collect();
        let fy = p.lmi_value(&it.y);
        let rd: Vec<RMat> = (0..nb).map(|k| &fy[k] - &it.z[k]).collect();
        let mu = (0..nb).map(|k| dot(&it.x[k], &it.z[k])).sum::<f64>() / n_total as f64;

        let primal_value: f64 = p.cost.iter().zip(&it.y).map(|(c, y)| c * y).sum();
        let dual_value: f64 = -(0..nb).map(|k| dot(&p.blocks[k].f0, &it.x[k])).sum::<f64>();
        let gap = (primal_value - dual_value).abs() / (1.0 + primal_value.abs());
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + c_norm);
        let dinf = rd.iter().map(|r| r.norm_squared()).sum::<f64>().sqrt() / (1.0 + f0_norm);

        let sol = SdpSolution {
            status: SdpStatus::MaxIterations,
            primal_value,
            dual_value,
            gap,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            y: it.y.clone(),
            x: it.x.clone(),
            iterations: iter,
        };
        let score = sol.residual();
        if best.as_ref().is_none_or(|b| score < b.residual()) {
            best = Some(sol);
        }
        if score <= opts.tol {
            let mut s = best.expect("best iterate recorded");
            s.status = SdpStatus::Optimal;
            return Ok(s);
        }
        let infeas = pinf.max(dinf);
        if infeas < 0.9 * best_infeas {
            best_infeas = infeas;
            stall = 0;
        } else {
            stall += 1;
        }
        if stall >= opts.stall_window && infeas > opts.stall_threshold {
            let mut s = best.expect("best iterate recorded");
            s.status = SdpStatus::Infeasible;
            return Ok(s);
        }
        if iter == opts.max_iter {
            break;
        }

        let zchol: Option<Vec<_>> = it.z.iter().map(chol).collect();
        let xchol: Option<Vec<_>> = it.x.iter().map(chol).collect();
        let (zchol, xchol) = match (zchol, xchol) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        let zinv: Vec<RMat> = zchol.iter().map(|c| c.inverse()).collect();

        // Schur complement M_ij = Tr[Fᵢ X Fⱼ Z⁻¹].
        let mut schur = RMat::zeros(m, m);
        for (k, b) in p.blocks.iter().enumerate() {
            let (x, zi) = (&it.x[k], &zinv[k]);
            for (ti, (vi, fi)) in b.terms.iter().enumerate() {
                for (vj, fj) in b.terms.iter().skip(ti) {
                    let mut acc = 0.0;
                    for &(pp, q, a) in &fi.entries {
                        for &(r, s, bv) in &fj.entries {
                            acc += a * bv * x[(q, r)] * zi[(s, pp)];
                        }
                    }
                    schur[(*vi, *vj)] += acc;
                    if vi != vj {
                        schur[(*vj, *vi)] += acc;
                    }
                }
            }
        }
        let schur = sym(&schur);
        let schur_chol = match Cholesky::new(schur.clone()) {
            Some(ch) => SchurSolver::Chol(ch),
            None => {
                let scale = (0..m).map(|i| schur[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
                let reg = &schur + RMat::identity(m, m) * (1e-14 * scale);
                match Cholesky::new(reg) {
                    Some(ch) => SchurSolver::Chol(ch),
                    None => SchurSolver::Lu(schur.clone().lu()),
                }
            }
        };

        // X Rd Z⁻¹ is shared by predictor and corrector.
        let x_rd_zinv: Vec<RMat> = (0..nb).map(|k| &it.x[k] * &rd[k] * &zinv[k]).collect();
        let f_x_rd_zinv = p.apply(&x_rd_zinv);

        let direction = |sigma: f64, corr: Option<&Vec<RMat>>| -> Option<(Vec<f64>, Vec<RMat>, Vec<RMat>)> {
            let target: Vec<RMat> = zinv.iter().map(|zi| zi * (sigma * mu)).collect();
            let f_target = p.apply(&target);
            let f_corr = corr.map(|c| p.apply(c));
            let h = DVector::from_fn(m, |i, _| {
                let mut v = rp[i] + f_target[i] - fx[i] - f_x_rd_zinv[i];
                if let Some(fc) = &f_corr {
                    v -= fc[i];
                }
                v
            });
            let dy = schur_chol.solve(&h)?;
            let dyv: Vec<f64> = dy.iter().cloned().collect();
            let fdy = p.apply_adjoint(&dyv);
            let dz: Vec<RMat> = (0..nb).map(|k| &rd[k] + &fdy[k]).collect();
            let dx: Vec<RMat> = (0..nb)
                .map(|k| {
                    let mut d = &target[k] - &it.x[k] - sym(&(&it.x[k] * &dz[k] * &zinv[k]));
                    if let Some(c) = corr {
                        d -= sym(&c[k]);
                    }
                    sym(&d)
                })
                .collect();
            Some((dyv, dx, dz))
        };

        let steps = |dx: &[RMat], dz: &[RMat], cap: f64| -> (f64, f64) {
            let mut ap = cap;
            let mut ad = cap;
            for k in 0..nb {
                ap = ap.min(max_step(&xchol[k].l(), &dx[k], cap));
                ad = ad.min(max_step(&zchol[k].l(), &dz[k], cap));
            }
            (ap, ad)
        };

        let Some((_, dxa, dza)) = direction(0.0, None) else { break };
        let (apa, ada) = steps(&dxa, &dza, 1.0);
        let mu_aff = (0..nb)
            .map(|k| dot(&(&it.x[k] + &dxa[k] * apa), &(&it.z[k] + &dza[k] * ada)))
            .sum::<f64>()
            / n_total as f64;
        let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
        let corr: Vec<RMat> = (0..nb).map(|k| &dxa[k] * &dza[k] * &zinv[k]).collect();
        let Some((dy, dx, dz)) = direction(sigma, Some(&corr)) else { break };
        let (apmax, admax) = steps(&dx, &dz, f64::INFINITY);
        let tau = 0.9 + 0.09 * apmax.min(admax).min(1.0);
        let ap = (tau * apmax).min(1.0);
        let ad = (tau * admax).min(1.0);
        for k in 0..nb {
            it.x[k] = sym(&(&it.x[k] + &dx[k] * ap));
            it.z[k] = sym(&(&it.z[k] + &dz[k] * ad));
        }
        for (y, d) in it.y.iter_mut().zip(dy.iter()) {
            *y += ad * d;
        }
    }
    Ok(best.expect("at least one iterate evaluated"))
}

enum SchurSolver {
    Chol(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurSolver {
    fn solve(&self, h: &DVector<f64>) -> Option<DVector<f64>> {
        let v = match self {
            SchurSolver::Chol(c) => c.solve(h),
            SchurSolver::Lu(lu) => lu.solve(h)?,
        };
        v.iter().all(|x| x.is_finite()).then_some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> RMat {
        RMat::from_diagonal(&DVector::from_row_slice(v))
    }

    #[test]
    fn operator_norm_as_sdp() {
        // min λ s.t. λI − diag(1,2) ⪰ 0
        let p = SdpProblem {
            cost: vec![1.0],
            blocks: vec![Block {
                f0: -diag(&[1.0, 2.0]),
                terms: vec![(0, SparseSym::from_dense(&RMat::identity(2, 2)))],
            }],
        };
        let s = solve(&p, &SolverOptions::with_tol(1e-10)).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_value - 2.0).abs() < 1e-8, "{}", s.primal_value);
    }

    #[test]
    fn bounded_trace_maximization() {
        // max Tr X s.t. 0 ⪯ X ⪯ diag(1,3), X symmetric 2x2 (3 variables)
        let basis = [diag(&[1.0, 0.0]), diag(&[0.0, 1.0]), RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])];
        let pos = Block {
            f0: RMat::zeros(2, 2),
            terms: basis.iter().enumerate().map(|(i, b)| (i, SparseSym::from_dense(b))).collect(),
        };
        let upper = Block {
            f0: diag(&[1.0, 3.0]),
            terms: basis.iter().enumerate().map(|(i, b)| (i, SparseSym::from_dense(&-b))).collect(),
        };
        let p = SdpProblem {
            cost: vec![-1.0, -1.0, 0.0],
            blocks: vec![pos, upper],
        };
        let s = solve(&p, &SolverOptions::with_tol(1e-10)).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.primal_value + 4.0).abs() < 1e-8);
        assert!(s.gap <= 1e-10);
    }

    #[test]
    fn adjoint_consistency() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
            let a = RMat::from_fn(3, 3, |_, _| rng.random::<f64>() - 0.5);
            sym(&a)
        };
        let p = SdpProblem {
            cost: vec![0.0; 2],
            blocks: vec![Block {
                f0: RMat::zeros(3, 3),
                terms: vec![(0, SparseSym::from_dense(&mk(&mut rng))), (1, SparseSym::from_dense(&mk(&mut rng)))],
            }],
        };
        let x = vec![mk(&mut rng)];
        let y = [rng.random::<f64>(), rng.random::<f64>()];
        let lhs = dot(&p.apply_adjoint(&y)[0], &x[0]);
        let ax = p.apply(&x);
        let rhs = y[0] * ax[0] + y[1] * ax[1];
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn infeasible_program_is_flagged() {
        // y ≥ 1 and −y ≥ 0 cannot both hold.
        let p = SdpProblem {
            cost: vec![1.0],
            blocks: vec![
                Block {
                    f0: diag(&[-1.0]),
                    terms: vec![(0, SparseSym::from_dense(&diag(&[1.0])))],
                },
                Block {
                    f0: diag(&[0.0]),
                    terms: vec![(0, SparseSym::from_dense(&diag(&[-1.0])))],
                },
            ],
        };
        let s = solve(&p, &SolverOptions::with_tol(1e-8)).unwrap();
        assert_ne!(s.status, SdpStatus::Optimal);
    }

    #[test]
    fn unused_variable_rejected() {
        let p = SdpProblem {
            cost: vec![1.0, 0.0],
            blocks: vec![Block {
                f0: diag(&[0.0]),
                terms: vec![(0, SparseSym::from_dense(&diag(&[1.0])))],
            }],
        };
        assert!(solve(&p, &SolverOptions::default()).is_err());
    }
}
