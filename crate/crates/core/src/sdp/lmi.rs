//! Complex Hermitian LMI builder compiled to the real solver format.

use crate::linalg::{c, CMat, C64, ZERO};

use super::solver::{Block, RMat, SdpProblem, SparseSym};

/// A group of real scalar variables parameterizing a complex matrix as
/// `Σₖ yₖ Bₖ` over a fixed real basis `Bₖ`.
#[derive(Debug, Clone)]
pub struct VarGroup {
    pub vars: Vec<usize>,
    pub basis: Vec<CMat>,
}

impl VarGroup {
    /// The matrix represented by the solver variables `y`.
    pub fn value(&self, y: &[f64]) -> CMat {
        let (r, cc) = self.basis[0].shape();
        let mut out = CMat::zeros(r, cc);
        for (v, b) in self.vars.iter().zip(&self.basis) {
            out += b * c(y[*v], 0.0);
        }
        out
    }
}

/// Basis of `r × r` Hermitian matrices: `E_ii`, `E_ij + E_ji`, `i(E_ij − E_ji)`.
pub fn hermitian_basis(r: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(r * r);
    for i in 0..r {
        let mut m = CMat::zeros(r, r);
        m[(i, i)] = c(1.0, 0.0);
        out.push(m);
    }
    for i in 0..r {
        for j in i + 1..r {
            let mut m = CMat::zeros(r, r);
            m[(i, j)] = c(1.0, 0.0);
            m[(j, i)] = c(1.0, 0.0);
            out.push(m);
            let mut m = CMat::zeros(r, r);
            m[(i, j)] = c(0.0, 1.0);
            m[(j, i)] = c(0.0, -1.0);
            out.push(m);
        }
    }
    out
}

/// Basis of all complex `rows × cols` matrices: `E_pq` and `i·E_pq`.
pub fn complex_basis(rows: usize, cols: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(2 * rows * cols);
    for p in 0..rows {
        for q in 0..cols {
            for z in [c(1.0, 0.0), c(0.0, 1.0)] {
                let mut m = CMat::zeros(rows, cols);
                m[(p, q)] = z;
                out.push(m);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
struct CBlock {
    f0: CMat,
    terms: Vec<(usize, CMat)>,
}

/// Builder for `min cᵀy s.t. F₀ + Σ yᵢFᵢ ⪰ 0` with complex Hermitian blocks.
#[derive(Debug, Clone, Default)]
pub struct LmiBuilder {
    cost: Vec<f64>,
    blocks: Vec<CBlock>,
}

impl LmiBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn scalar(&mut self, cost: f64) -> usize {
        self.cost.push(cost);
        self.cost.len() - 1
    }

    fn group(&mut self, basis: Vec<CMat>) -> VarGroup {
        let vars = basis.iter().map(|_| self.scalar(0.0)).collect();
        VarGroup { vars, basis }
    }

    pub fn hermitian(&mut self, r: usize) -> VarGroup {
        self.group(hermitian_basis(r))
    }

    pub fn complex(&mut self, rows: usize, cols: usize) -> VarGroup {
        self.group(complex_basis(rows, cols))
    }

    /// Adds the linear functional `Y ↦ cost(Y)` of a group to the objective.
    pub fn add_group_cost(&mut self, g: &VarGroup, cost: impl Fn(&CMat) -> f64) {
        for (v, b) in g.vars.iter().zip(&g.basis) {
            self.cost[*v] += cost(b);
        }
    }

    /// New block with constant part `f0` (must be Hermitian); returns its index.
    pub fn block(&mut self, f0: CMat) -> usize {
        self.blocks.push(CBlock { f0, terms: Vec::new() });
        self.blocks.len() - 1
    }

    pub fn add_term(&mut self, block: usize, var: usize, coef: CMat) {
        self.blocks[block].terms.push((var, coef));
    }

    /// Adds `map(Y)` to a block, where `Y` is the group's matrix and `map` is
    /// real-linear with Hermitian output.
    pub fn add_group(&mut self, block: usize, g: &VarGroup, map: impl Fn(&CMat) -> CMat) {
        for (v, b) in g.vars.iter().zip(&g.basis) {
            let coef = map(b);
            if coef.iter().any(|z| *z != ZERO) {
                self.add_term(block, *v, coef);
            }
        }
    }

    /// Compiles to the real form, embedding each complex block as
    /// `[[Re, −Im], [Im, Re]]` unless all of its data is real.
    pub fn compile(&self) -> SdpProblem {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let is_real = b.f0.iter().chain(b.terms.iter().flat_map(|t| t.1.iter())).all(|z| z.im == 0.0);
                let embed = |m: &CMat| -> RMat { if is_real { m.map(|z| z.re) } else { embed_complex(m) } };
                let f0 = embed(&b.f0);
                let f0 = (&f0 + f0.transpose()) * 0.5;
                let terms = b
                    .terms
                    .iter()
                    .map(|(v, m)| (*v, SparseSym::from_dense(&embed(m))))
                    .collect();
                Block { f0, terms }
            })
            .collect();
        SdpProblem {
            cost: self.cost.clone(),
            blocks,
        }
    }
}

/// `[[Re M, −Im M], [Im M, Re M]]`.
pub fn embed_complex(m: &CMat) -> RMat {
    let n = m.nrows();
    RMat::from_fn(2 * n, 2 * n, |i, j| {
        let z: C64 = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// `[[a, b†], [b, d]]` for square `a`, `d`.
pub fn block2(a: &CMat, b: &CMat, d: &CMat) -> CMat {
    let (na, nd) = (a.nrows(), d.nrows());
    let mut m = CMat::zeros(na + nd, na + nd);
    m.view_mut((0, 0), (na, na)).copy_from(a);
    m.view_mut((na, 0), (nd, na)).copy_from(b);
    m.view_mut((0, na), (na, nd)).copy_from(&b.adjoint());
    m.view_mut((na, na), (nd, nd)).copy_from(d);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::HermOp;
    use crate::sdp::solver::{solve, SolverOptions};

    #[test]
    fn embedding_preserves_spectrum() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let h = crate::random::hermitian(3, &mut rng);
        let e = crate::linalg::eig_hermitian(&h).unwrap();
        let re = nalgebra::SymmetricEigen::new(embed_complex(h.matrix()));
        let mut vals: Vec<f64> = re.eigenvalues.iter().cloned().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (k, v) in e.values.iter().enumerate() {
            assert!((vals[2 * k] - v).abs() < 1e-10 && (vals[2 * k + 1] - v).abs() < 1e-10);
        }
    }

    #[test]
    fn schur_complement_trace_program() {
        // min Tr M s.t. [[M, X†], [X, Y]] ⪰ 0 equals Tr[X† Y⁻¹ X].
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for d in 2..4 {
            let x = crate::random::complex_gaussian(d, d, &mut rng);
            let y = crate::random::density(d, &mut rng);
            let yinv = y.matrix().clone().try_inverse().unwrap();
            let expect = (x.adjoint() * yinv * &x).trace().re;
            let mut b = LmiBuilder::new();
            let m = b.hermitian(d);
            b.add_group_cost(&m, |e| e.trace().re);
            let zero = CMat::zeros(d, d);
            let blk = b.block(block2(&zero, &x, y.matrix()));
            b.add_group(blk, &m, |e| block2(e, &zero, &zero));
            let s = solve(&b.compile(), &SolverOptions::with_tol(1e-10)).unwrap();
            assert!((s.primal_value - expect).abs() <= 1e-7 * (1.0 + expect), "{} vs {expect}", s.primal_value);
            let mval = HermOp::from_mat_unchecked(m.value(&s.y));
            assert!((mval.trace() - expect).abs() <= 1e-7 * (1.0 + expect));
        }
    }
}
