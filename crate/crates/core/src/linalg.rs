//! Dense complex Hermitian linear algebra.
//!
//! Everything here works on small dense matrices (dimension ≲ 256). Operators
//! are stored row-major as far as index conventions are concerned: a bipartite
//! basis vector `|r⟩|b⟩` of `R ⊗ B` has index `r * d_B + b`.
//!
//! Functions of PSD operators act on the support only: the kernel is mapped to
//! zero regardless of `f(0)`. This is the convention for generalized inverses,
//! fractional powers and logarithms used throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A dense complex Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermOp {
    mat: CMat,
}

/// Largest deviation from Hermiticity, `max |M_ij − conj(M_ji)|`.
pub fn hermitian_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

impl HermOp {
    /// Validates squareness and Hermiticity, then stores the exactly-Hermitian part.
    pub fn new(mat: CMat) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.nrows() == 0 {
            return Err(Error::DimMismatch("operator must have positive dimension".into()));
        }
        let residual = hermitian_residual(&mat);
        if residual > 1e-12 * (1.0 + max_abs_entry(&mat)) {
            return Err(Error::NonHermitian { residual });
        }
        Ok(Self::from_mat_unchecked(mat))
    }

    /// Stores `(M + M†)/2` without validation. For results of operations that are
    /// Hermitian in exact arithmetic.
    pub fn from_mat_unchecked(mat: CMat) -> Self {
        let adj = mat.adjoint();
        HermOp {
            mat: (mat + adj).scale(0.5),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut m = CMat::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimMismatch(format!("row {i} has length {}, expected {n}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = c(*v, 0.0);
            }
        }
        HermOp::new(m)
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = c(*v, 0.0);
        }
        HermOp { mat: m }
    }

    pub fn identity(d: usize) -> Self {
        HermOp {
            mat: CMat::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        HermOp {
            mat: CMat::zeros(d, d),
        }
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &CVec) -> Self {
        HermOp::from_mat_unchecked(v * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn scale(&self, s: f64) -> HermOp {
        HermOp {
            mat: self.mat.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &HermOp) -> HermOp {
        HermOp {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &HermOp) -> HermOp {
        HermOp {
            mat: &self.mat - &other.mat,
        }
    }

    /// `self + s·I`.
    pub fn shift(&self, s: f64) -> HermOp {
        let mut m = self.mat.clone();
        for i in 0..self.dim() {
            m[(i, i)] += c(s, 0.0);
        }
        HermOp { mat: m }
    }

    /// Transpose in the computational basis (equivalently, complex conjugate).
    pub fn transpose(&self) -> HermOp {
        HermOp {
            mat: self.mat.transpose(),
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr[self · other]`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermOp) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.mat[(i, j)] * other.mat[(j, i)]).re;
            }
        }
        acc
    }

    /// `A · self · A†` for a (possibly rectangular) `A`.
    pub fn congruence(&self, a: &CMat) -> HermOp {
        HermOp::from_mat_unchecked(a * &self.mat * a.adjoint())
    }

    /// Matrix product `self · other · self`.
    pub fn sandwich(&self, other: &HermOp) -> HermOp {
        HermOp::from_mat_unchecked(&self.mat * &other.mat * &self.mat)
    }

    pub fn kron(&self, other: &HermOp) -> HermOp {
        HermOp {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Verifies trace one and positivity within tolerance.
    pub fn check_density(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::NotDensity(format!("trace is {tr}")));
        }
        let eig = eig_hermitian(self)?;
        let min = eig.values[0];
        if min < -1e-9 {
            return Err(Error::NotDensity(format!("min eigenvalue {min:.3e}")));
        }
        Ok(())
    }
}

/// Eigendecomposition with ascending eigenvalues; columns of `vectors` are eigenvectors.
#[derive(Debug, Clone)]
pub struct EigDecomp {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl EigDecomp {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// The default kernel cutoff `dim · rank_rel · max(λ_max, 0)`.
    pub fn default_rank_tol(&self) -> f64 {
        self.dim() as f64 * tolerance::get().rank_rel * self.max().max(0.0)
    }

    pub fn vector(&self, j: usize) -> CVec {
        self.vectors.column(j).into_owned()
    }

    /// `Σ_j g(λ_j) |ψ_j⟩⟨ψ_j|` over the indices selected by `keep`.
    fn assemble(&self, mut g: impl FnMut(usize, f64) -> Option<f64>) -> HermOp {
        let n = self.dim();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            if let Some(w) = g(j, self.values[j]) {
                if w == 0.0 {
                    continue;
                }
                let v = self.vectors.column(j);
                out += (v * v.adjoint()).scale(w);
            }
        }
        HermOp::from_mat_unchecked(out)
    }

    pub fn reconstruct(&self) -> HermOp {
        self.assemble(|_, l| Some(l))
    }
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending with a
/// stable index tie-break.
pub fn eig_hermitian(h: &HermOp) -> Result<EigDecomp> {
    let residual = hermitian_residual(h.matrix());
    if residual > 1e-12 * (1.0 + max_abs_entry(h.matrix())) {
        return Err(Error::NonHermitian { residual });
    }
    let n = h.dim();
    if n == 1 {
        return Ok(EigDecomp {
            values: vec![h.mat[(0, 0)].re],
            vectors: CMat::identity(1, 1),
        });
    }
    let eig = SymmetricEigen::try_new(h.mat.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NoConvergence(format!("symmetric QR iteration on {n}x{n} operator")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut vectors = CMat::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence("non-finite eigenvalue".into()));
    }
    Ok(EigDecomp { values, vectors })
}

/// Orthogonal decomposition of the space into support and kernel of a PSD operator.
#[derive(Debug, Clone)]
pub struct SupportSplit {
    pub proj_support: HermOp,
    pub proj_kernel: HermOp,
    pub rank: usize,
    /// Orthonormal basis of the support (columns), `dim × rank`.
    pub support_basis: CMat,
    /// Orthonormal basis of the kernel (columns), `dim × (dim − rank)`.
    pub kernel_basis: CMat,
    pub rank_tol: f64,
}

impl SupportSplit {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.proj_support.dim()
    }
}

fn check_psd(eig: &EigDecomp, tol: f64) -> Result<()> {
    if eig.min() < -10.0 * tol.max(1e-14 * eig.max().abs().max(1.0)) {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    Ok(())
}

fn split_from_eig(eig: &EigDecomp, tol: f64) -> Result<SupportSplit> {
    check_psd(eig, tol)?;
    let n = eig.dim();
    let support: Vec<usize> = (0..n).filter(|&j| eig.values[j] > tol).collect();
    let kernel: Vec<usize> = (0..n).filter(|&j| eig.values[j] <= tol).collect();
    let mut sb = CMat::zeros(n, support.len());
    for (k, &j) in support.iter().enumerate() {
        sb.set_column(k, &eig.vectors.column(j));
    }
    let mut kb = CMat::zeros(n, kernel.len());
    for (k, &j) in kernel.iter().enumerate() {
        kb.set_column(k, &eig.vectors.column(j));
    }
    let proj_support = HermOp::from_mat_unchecked(&sb * sb.adjoint());
    let proj_kernel = HermOp::from_mat_unchecked(&kb * kb.adjoint());
    Ok(SupportSplit {
        proj_support,
        proj_kernel,
        rank: support.len(),
        support_basis: sb,
        kernel_basis: kb,
        rank_tol: tol,
    })
}

/// Support/kernel split of a PSD operator. `rank_tol = None` selects the
/// default `dim · 1e-12 · λ_max`.
pub fn support_split(h: &HermOp, rank_tol: Option<f64>) -> Result<SupportSplit> {
    let eig = eig_hermitian(h)?;
    let tol = rank_tol.unwrap_or_else(|| eig.default_rank_tol());
    split_from_eig(&eig, tol)
}

/// `Σ_{λ_j > tol} f(λ_j) |ψ_j⟩⟨ψ_j|` for PSD `h`; the kernel maps to zero.
pub fn apply_on_support(h: &HermOp, f: impl Fn(f64) -> f64) -> Result<HermOp> {
    apply_on_support_tol(h, None, f)
}

pub fn apply_on_support_tol(h: &HermOp, rank_tol: Option<f64>, f: impl Fn(f64) -> f64) -> Result<HermOp> {
    let eig = eig_hermitian(h)?;
    let tol = rank_tol.unwrap_or_else(|| eig.default_rank_tol());
    check_psd(&eig, tol)?;
    Ok(eig.assemble(|_, l| if l > tol { Some(f(l)) } else { None }))
}

/// `f` applied to every eigenvalue of a Hermitian operator.
pub fn apply_hermitian(h: &HermOp, f: impl Fn(f64) -> f64) -> Result<HermOp> {
    let eig = eig_hermitian(h)?;
    Ok(eig.assemble(|_, l| Some(f(l))))
}

pub fn sqrt_psd(h: &HermOp) -> Result<HermOp> {
    apply_on_support(h, f64::sqrt)
}

pub fn inv_on_support(h: &HermOp) -> Result<HermOp> {
    apply_on_support(h, |x| 1.0 / x)
}

pub fn pow_on_support(h: &HermOp, p: f64) -> Result<HermOp> {
    apply_on_support(h, |x| x.powf(p))
}

pub fn log_on_support(h: &HermOp) -> Result<HermOp> {
    apply_on_support(h, f64::ln)
}

pub fn lambda_max(h: &HermOp) -> Result<f64> {
    Ok(eig_hermitian(h)?.max())
}

pub fn lambda_min(h: &HermOp) -> Result<f64> {
    Ok(eig_hermitian(h)?.min())
}

/// Operator norm `‖H‖_∞` of a Hermitian operator.
pub fn op_norm(h: &HermOp) -> Result<f64> {
    let eig = eig_hermitian(h)?;
    Ok(eig.max().abs().max(eig.min().abs()))
}

/// Which tensor factor of `R ⊗ B` survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

/// Partial trace of a general matrix on `R ⊗ B`.
pub fn partial_trace_mat(m: &CMat, dims: (usize, usize), keep: Keep) -> Result<CMat> {
    let (dr, db) = dims;
    if m.nrows() != dr * db || m.ncols() != dr * db {
        return Err(Error::DimMismatch(format!(
            "partial trace expects {}x{} operator, got {}x{}",
            dr * db,
            dr * db,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match keep {
        Keep::First => CMat::from_fn(dr, dr, |r, s| (0..db).map(|b| m[(r * db + b, s * db + b)]).sum()),
        Keep::Second => CMat::from_fn(db, db, |b, e| (0..dr).map(|r| m[(r * db + b, r * db + e)]).sum()),
    })
}

pub fn partial_trace(m: &HermOp, dims: (usize, usize), keep: Keep) -> Result<HermOp> {
    Ok(HermOp::from_mat_unchecked(partial_trace_mat(m.matrix(), dims, keep)?))
}

/// `(M ⊗ I)|Γ⟩ = Σ_{ij} M_{ij} |i⟩|j⟩`, the row-major flattening of `M`.
pub fn vec_gamma(m: &CMat) -> CVec {
    let n = m.ncols();
    CVec::from_fn(m.nrows() * n, |k, _| m[(k / n, k % n)])
}

/// The unnormalized maximally entangled vector `|Γ⟩` on `C^d ⊗ C^d`.
pub fn gamma_vector(d: usize) -> CVec {
    vec_gamma(&CMat::identity(d, d))
}

/// `‖Π⊥_b a‖_F / max(‖a‖_F, 1)`, measuring how much of `a` leaves the support of `b`.
pub fn support_leak(a: &HermOp, b: &SupportSplit) -> f64 {
    let leak = b.proj_kernel.matrix() * a.matrix();
    let norm = leak.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    norm / a.fro_norm().max(1.0)
}

/// Containment threshold for [`support_leak`].
pub const SUPPORT_CONTAINMENT_TOL: f64 = 1e-8;

/// Whether `supp(a) ⊆ supp(b)` within [`SUPPORT_CONTAINMENT_TOL`].
pub fn support_contained(a: &HermOp, b: &SupportSplit) -> bool {
    support_leak(a, b) <= SUPPORT_CONTAINMENT_TOL
}

/// Schur reduction `ρ₀₀ − ρ₀₁ ρ₁₁⁻¹ ρ₀₁†` of `rho` relative to the support/kernel
/// split of another operator; the inverse is taken on the support of `ρ₁₁`.
pub fn schur_reduction(rho: &HermOp, split: &SupportSplit) -> Result<HermOp> {
    let p = split.proj_support.matrix();
    let q = split.proj_kernel.matrix();
    let r = rho.matrix();
    let r00 = p * r * p;
    let r01 = p * r * q;
    let r11 = HermOp::from_mat_unchecked(q * r * q);
    let r11_inv = inv_on_support(&r11)?;
    // Range of ρ₀₁† must sit inside supp(ρ₁₁); automatic for PSD ρ.
    let r11_split = support_split(&r11, None)?;
    let leak = r11_split.proj_kernel.matrix() * r01.adjoint();
    let leak_norm = leak.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if leak_norm > 1e-7 * (1.0 + rho.fro_norm()) {
        return Err(Error::SupportViolation(format!(
            "off-diagonal block leaves supp(ρ₁₁) (residual {leak_norm:.3e})"
        )));
    }
    let correction = &r01 * r11_inv.matrix() * r01.adjoint();
    Ok(HermOp::from_mat_unchecked(r00 - correction))
}

/// Weighted operator geometric mean `X^{1/2} (X^{-1/2} Y X^{-1/2})^α X^{1/2}`.
///
/// With `eps > 0` the regularized `X + eps·I` is used. With `eps = 0` inverses
/// are taken on the support of `X`; when `supp(Y) ⊄ supp(X)` the result for
/// `α ∈ [0,1)` is the `ε → 0` limit, obtained from the Schur reduction of `Y`,
/// and `α` outside `[0,1]` is rejected.
pub fn geometric_mean(x: &HermOp, y: &HermOp, alpha: f64, eps: f64) -> Result<HermOp> {
    if x.dim() != y.dim() {
        return Err(Error::DimMismatch(format!("geometric mean of {}- and {}-dim operators", x.dim(), y.dim())));
    }
    if !alpha.is_finite() {
        return Err(Error::BadAlpha {
            alpha,
            allowed: "finite",
        });
    }
    if eps < 0.0 {
        return Err(Error::ParamOutOfRange {
            name: "eps",
            value: eps,
            range: "[0, ∞)".into(),
        });
    }
    let xe = if eps > 0.0 { x.shift(eps) } else { x.clone() };
    let eig = eig_hermitian(&xe)?;
    let tol = eig.default_rank_tol();
    check_psd(&eig, tol)?;
    let split = split_from_eig(&eig, tol)?;
    let y_eff = if split.is_full_rank() || support_contained(y, &split) {
        y.clone()
    } else if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::SupportViolation(format!(
            "supp(Y) ⊄ supp(X) with α = {alpha} outside [0, 1]"
        )));
    } else if alpha == 1.0 {
        return Ok(y.clone());
    } else {
        let reduced = schur_reduction(y, &split)?;
        if reduced.fro_norm() <= 1e-12 * y.fro_norm() {
            return Ok(HermOp::zeros(x.dim()));
        }
        reduced
    };
    let half = eig.assemble(|_, l| if l > tol { Some(l.sqrt()) } else { None });
    let inv_half = eig.assemble(|_, l| if l > tol { Some(1.0 / l.sqrt()) } else { None });
    let inner = inv_half.sandwich(&y_eff);
    let powered = apply_on_support(&inner, |v| v.powf(alpha))?;
    Ok(half.sandwich(&powered))
}

/// Root fidelity `‖√ρ √σ‖₁ = Tr √(√ρ σ √ρ)`.
pub fn root_fidelity(rho: &HermOp, sigma: &HermOp) -> Result<f64> {
    let sr = sqrt_psd(rho)?;
    let inner = sr.sandwich(sigma);
    let eig = eig_hermitian(&inner)?;
    Ok(eig.values.iter().map(|&l| l.max(0.0).sqrt()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &HermOp, b: &HermOp, tol: f64) -> bool {
        a.sub(b).fro_norm() <= tol
    }

    #[test]
    fn diagonal_eigendecomposition() {
        let h = HermOp::from_real_diag(&[0.8, 0.2]);
        let e = eig_hermitian(&h).unwrap();
        assert!((e.values[0] - 0.2).abs() < 1e-15);
        assert!((e.values[1] - 0.8).abs() < 1e-15);
        assert!(close(&e.reconstruct(), &h, 1e-14));
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = HermOp::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..7 {
            let h = random::hermitian(d, &mut rng);
            let e = eig_hermitian(&h).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let err = e.reconstruct().sub(&h).fro_norm();
            assert!(err <= 1e-10 * d as f64 * h.fro_norm(), "reconstruction error {err}");
            let vv = e.vectors.adjoint() * &e.vectors;
            let id = CMat::identity(d, d);
            assert!((vv - id).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(HermOp::new(m), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn split_of_rank_one_diag() {
        let s = support_split(&HermOp::from_real_diag(&[1.0, 0.0]), None).unwrap();
        assert_eq!(s.rank, 1);
        assert!(close(&s.proj_support, &HermOp::from_real_diag(&[1.0, 0.0]), 1e-14));
        assert!(close(&s.proj_kernel, &HermOp::from_real_diag(&[0.0, 1.0]), 1e-14));
    }

    #[test]
    fn split_of_full_rank_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random::density(3, &mut rng);
        let s = support_split(&rho, None).unwrap();
        assert_eq!(s.rank, 3);
        assert!(close(&s.proj_support, &HermOp::identity(3), 1e-10));
    }

    #[test]
    fn split_of_maximally_entangled_projector() {
        let g = gamma_vector(2);
        let phi = HermOp::projector(&g).scale(0.5);
        let s = support_split(&phi, None).unwrap();
        assert_eq!(s.rank, 1);
        // normalized projector onto |Γ⟩/√2 is |Γ⟩⟨Γ|/2 itself
        assert!(close(&s.proj_support, &phi, 1e-12));
        let p = &s.proj_support;
        let q = &s.proj_kernel;
        assert!(close(&p.add(q), &HermOp::identity(4), 1e-12));
        assert!(close(&p.sandwich(&HermOp::identity(4)), p, 1e-12));
        assert!((p.matrix() * q.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn split_rejects_indefinite() {
        let h = HermOp::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(support_split(&h, None), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn support_functions() {
        let inv = inv_on_support(&HermOp::from_real_diag(&[2.0, 0.0])).unwrap();
        assert!(close(&inv, &HermOp::from_real_diag(&[0.5, 0.0]), 1e-15));
        let sq = sqrt_psd(&HermOp::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(close(&sq, &HermOp::from_real_diag(&[2.0, 3.0]), 1e-14));
        let lg = log_on_support(&HermOp::from_real_diag(&[std::f64::consts::E, 0.0])).unwrap();
        assert!(close(&lg, &HermOp::from_real_diag(&[1.0, 0.0]), 1e-14));
    }

    #[test]
    fn identity_function_is_support_compression() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random::density_of_rank(4, 2, &mut rng);
        let id = apply_on_support(&h, |x| x).unwrap();
        let s = support_split(&h, None).unwrap();
        assert!(close(&id, &s.proj_support.sandwich(&h), 1e-10));
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random::hermitian(2, &mut rng);
        let b = random::density(3, &mut rng).scale(2.5);
        let ab = a.kron(&b);
        let ta = partial_trace(&ab, (2, 3), Keep::First).unwrap();
        assert!(close(&ta, &a.scale(b.trace()), 1e-12));
        let tb = partial_trace(&ab, (2, 3), Keep::Second).unwrap();
        assert!(close(&tb, &b.scale(a.trace()), 1e-12));
        let g = HermOp::projector(&gamma_vector(2));
        let red = partial_trace(&g, (2, 2), Keep::First).unwrap();
        assert!(close(&red, &HermOp::identity(2), 1e-14));
        assert!(matches!(
            partial_trace(&g, (3, 2), Keep::First),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn vec_gamma_examples() {
        let v = vec_gamma(&CMat::identity(2, 2));
        let expect = [1.0, 0.0, 0.0, 1.0];
        for (z, e) in v.iter().zip(expect) {
            assert_eq!(*z, c(e, 0.0));
        }
        let m = HermOp::from_real_diag(&[0.3, 0.7]);
        let v = vec_gamma(m.matrix());
        assert_eq!(v[0], c(0.3, 0.0));
        assert_eq!(v[3], c(0.7, 0.0));
        assert_eq!(v[1], ZERO);
    }

    #[test]
    fn transpose_trick_and_max_ent_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = 3;
        let m = random::complex_gaussian(d, d, &mut rng);
        let g = gamma_vector(d);
        let id = CMat::identity(d, d);
        let lhs = id.kronecker(&m) * &g;
        let rhs = m.transpose().kronecker(&id) * &g;
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
        let k = random::complex_gaussian(d, d, &mut rng);
        let val = (g.adjoint() * k.kronecker(&id) * &g)[(0, 0)];
        assert!((val - k.trace()).norm() < 1e-12);
    }

    #[test]
    fn geometric_mean_identity_and_commuting() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random::density(3, &mut rng);
        for alpha in [0.3, 0.5, 1.7, 2.0] {
            let g = geometric_mean(&x, &x, alpha, 0.0).unwrap();
            assert!(close(&g, &x, 1e-10));
        }
        let g = geometric_mean(
            &HermOp::from_real_diag(&[0.25, 0.75]),
            &HermOp::from_real_diag(&[0.5, 0.5]),
            2.0,
            0.0,
        )
        .unwrap();
        assert!(close(&g, &HermOp::from_real_diag(&[1.0, 1.0 / 3.0]), 1e-12));
    }

    #[test]
    fn geometric_mean_trace_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..20 {
            let x = random::density(3, &mut rng);
            let y = random::density(3, &mut rng).scale(1.7);
            for alpha in [0.2, 0.5, 0.9, 1.5] {
                let a = geometric_mean(&x, &y, alpha, 0.0).unwrap().trace();
                let b = geometric_mean(&y, &x, 1.0 - alpha, 0.0).unwrap().trace();
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn geometric_mean_rejects_support_violation_above_one() {
        let x = HermOp::from_real_diag(&[1.0, 0.0]);
        let y = HermOp::from_real_diag(&[0.5, 0.5]);
        assert!(matches!(
            geometric_mean(&x, &y, 2.0, 0.0),
            Err(Error::SupportViolation(_))
        ));
        assert!(geometric_mean(&x, &y, 2.0, 1e-6).is_ok());
    }

    #[test]
    fn pseudo_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for d in 2..5 {
            let l = random::complex_gaussian(d, d, &mut rng);
            let ltl = HermOp::from_mat_unchecked(l.adjoint() * &l);
            let llt = HermOp::from_mat_unchecked(&l * l.adjoint());
            let lhs = &l * sqrt_psd(&ltl).unwrap().matrix();
            let rhs = sqrt_psd(&llt).unwrap().matrix() * &l;
            let err = (lhs - rhs).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(err <= 1e-9, "pseudo-commute residual {err}");
        }
    }

    #[test]
    fn op_norm_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let x = random::density(3, &mut rng).scale(2.0);
            let y = random::density(2, &mut rng);
            let sum = x.kron(&HermOp::identity(2)).add(&HermOp::identity(3).kron(&y));
            let lhs = op_norm(&sum).unwrap();
            let rhs = op_norm(&x).unwrap() + op_norm(&y).unwrap();
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn root_fidelity_of_equal_and_orthogonal_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = random::density(3, &mut rng);
        assert!((root_fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let a = HermOp::from_real_diag(&[1.0, 0.0]);
        let b = HermOp::from_real_diag(&[0.0, 1.0]);
        assert!(root_fidelity(&a, &b).unwrap().abs() < 1e-12);
    }
}
