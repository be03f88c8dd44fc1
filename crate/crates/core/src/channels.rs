//! Quantum channels as Choi operators and one-parameter channel families.
//!
//! The Choi operator of `N: A → B` is `Γ = Σ_{a,a'} |a⟩⟨a'| ⊗ N(|a⟩⟨a'|)` on
//! `R ⊗ B` with `R ≅ A`. Channels act through post-selected teleportation,
//! which in coordinates is a contraction over the input index.

use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, HermOp, Keep, C64, ZERO};

/// Tolerance of the Choi certificates (positivity and `Tr_B Γ = I_R`).
pub const CHOI_TOL: f64 = 1e-9;

/// Choi operator of a channel with its trace-preserving certificate checked.
#[derive(Debug, Clone, PartialEq)]
pub struct Choi {
    op: HermOp,
    dims: (usize, usize),
}

impl Choi {
    /// Validates positivity and `Tr_B[op] = I_R` within [`CHOI_TOL`].
    pub fn new(op: HermOp, dims: (usize, usize)) -> Result<Self> {
        if op.dim() != dims.0 * dims.1 {
            return Err(Error::DimMismatch(format!(
                "Choi operator of dimension {} does not match dims {:?}",
                op.dim(),
                dims
            )));
        }
        let min = linalg::lambda_min(&op)?;
        if min < -CHOI_TOL {
            return Err(Error::NotPsd { min_eig: min });
        }
        let residual = trace_preserving_residual(op.matrix(), dims)?;
        if residual > CHOI_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Choi { op, dims })
    }

    pub fn from_kraus(kraus: &[CMat]) -> Result<Self> {
        choi_from_kraus(kraus)
    }

    pub fn identity(d: usize) -> Self {
        let g = linalg::gamma_vector(d);
        Choi {
            op: HermOp::projector(&g),
            dims: (d, d),
        }
    }

    /// `ρ ↦ Tr[ρ] I/d`.
    pub fn depolarizing(d: usize) -> Self {
        Choi {
            op: HermOp::identity(d * d).scale(1.0 / d as f64),
            dims: (d, d),
        }
    }

    /// `ρ ↦ Tr[ρ] σ`.
    pub fn replacer(d_in: usize, sigma: &HermOp) -> Result<Self> {
        sigma.check_density()?;
        Choi::new(HermOp::identity(d_in).kron(sigma), (d_in, sigma.dim()))
    }

    pub fn op(&self) -> &HermOp {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn d_in(&self) -> usize {
        self.dims.0
    }

    pub fn d_out(&self) -> usize {
        self.dims.1
    }

    /// Applies the channel to `ρ` on `R' ⊗ A` where `R'` has dimension `d_ref`.
    pub fn apply(&self, rho: &HermOp, d_ref: usize) -> Result<HermOp> {
        apply_channel(self, rho, d_ref)
    }

    /// Choi operator of `other ∘ self`.
    pub fn then(&self, other: &Choi) -> Result<Choi> {
        if self.d_out() != other.d_in() {
            return Err(Error::DimMismatch(format!(
                "cannot compose channel with output {} into channel with input {}",
                self.d_out(),
                other.d_in()
            )));
        }
        let op = apply_map(other.op(), other.dims, &self.op, self.d_in())?;
        Ok(Choi {
            op,
            dims: (self.d_in(), other.d_out()),
        })
    }

    /// Choi operator of `self ⊗ other`, ordered `(R₁R₂) ⊗ (B₁B₂)`.
    pub fn tensor(&self, other: &Choi) -> Choi {
        Choi {
            op: tensor_choi_ops(&self.op, self.dims, &other.op, other.dims),
            dims: (self.d_in() * other.d_in(), self.d_out() * other.d_out()),
        }
    }
}

fn trace_preserving_residual(m: &CMat, dims: (usize, usize)) -> Result<f64> {
    let tr_b = linalg::partial_trace_mat(m, dims, Keep::First)?;
    let diff = tr_b - CMat::identity(dims.0, dims.0);
    Ok(diff.iter().fold(0.0f64, |a, z| a.max(z.norm())))
}

/// Choi operator of the channel with the given Kraus operators (`d_out × d_in` each).
pub fn choi_from_kraus(kraus: &[CMat]) -> Result<Choi> {
    let first = kraus
        .first()
        .ok_or_else(|| Error::DimMismatch("empty Kraus list".into()))?;
    let (d_out, d_in) = first.shape();
    if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
        return Err(Error::DimMismatch("Kraus operators have differing shapes".into()));
    }
    let sum = kraus
        .iter()
        .fold(CMat::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
    let residual = (sum - CMat::identity(d_in, d_in))
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm()));
    if residual > CHOI_TOL {
        return Err(Error::NotTracePreserving { residual });
    }
    let n = d_in * d_out;
    let mut m = CMat::zeros(n, n);
    for k in kraus {
        // (I ⊗ K)|Γ⟩ has entry K[b, a] at index (a, b).
        let v = linalg::vec_gamma(&k.transpose());
        m += &v * v.adjoint();
    }
    Choi::new(HermOp::from_mat_unchecked(m), (d_in, d_out))
}

/// Contracts the input index of a Choi-like operator `gamma` on `A ⊗ B` against
/// an operator on `R ⊗ A`. Linear in both arguments, so it also maps
/// derivatives of Choi operators.
pub fn apply_map_mat(gamma: &CMat, dims: (usize, usize), rho: &CMat, d_ref: usize) -> Result<CMat> {
    let (da, db) = dims;
    if gamma.nrows() != da * db || rho.nrows() != d_ref * da {
        return Err(Error::DimMismatch(format!(
            "map with dims ({da}, {db}) cannot act on a {}-dim operator with reference dimension {d_ref}",
            rho.nrows()
        )));
    }
    let n = d_ref * db;
    let mut out = CMat::zeros(n, n);
    for r in 0..d_ref {
        for rp in 0..d_ref {
            for a in 0..da {
                for ap in 0..da {
                    let w = rho[(r * da + a, rp * da + ap)];
                    if w == ZERO {
                        continue;
                    }
                    for b in 0..db {
                        for bp in 0..db {
                            out[(r * db + b, rp * db + bp)] += w * gamma[(a * db + b, ap * db + bp)];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn apply_map(gamma: &HermOp, dims: (usize, usize), rho: &HermOp, d_ref: usize) -> Result<HermOp> {
    Ok(HermOp::from_mat_unchecked(apply_map_mat(gamma.matrix(), dims, rho.matrix(), d_ref)?))
}

/// `(id_R ⊗ N)(ρ_RA)` with `dim R = d_ref`.
pub fn apply_channel(ch: &Choi, rho: &HermOp, d_ref: usize) -> Result<HermOp> {
    apply_map(ch.op(), ch.dims, rho, d_ref)
}

/// Reorders `Γ₁ ⊗ Γ₂` from `R₁B₁R₂B₂` to `R₁R₂B₁B₂`.
pub fn tensor_choi_ops(g1: &HermOp, d1: (usize, usize), g2: &HermOp, d2: (usize, usize)) -> HermOp {
    let big = g1.kron(g2);
    let (r1, b1) = d1;
    let (r2, b2) = d2;
    let n = r1 * r2 * b1 * b2;
    let src = |i: usize| {
        let b2i = i % b2;
        let b1i = (i / b2) % b1;
        let r2i = (i / (b1 * b2)) % r2;
        let r1i = i / (r2 * b1 * b2);
        ((r1i * b1 + b1i) * r2 + r2i) * b2 + b2i
    };
    let m = CMat::from_fn(n, n, |i, j| big.matrix()[(src(i), src(j))]);
    HermOp::from_mat_unchecked(m)
}

/// `(1 − ε)ρ + ε I/d`.
pub fn smooth(rho: &HermOp, eps: f64) -> Result<HermOp> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::ParamOutOfRange {
            name: "eps",
            value: eps,
            range: "[0, 1)".into(),
        });
    }
    let d = rho.dim() as f64;
    Ok(rho.scale(1.0 - eps).shift(eps / d))
}

/// Which GADC parameter a family estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadcParam {
    Loss,
    Noise,
    Phase,
}

impl fmt::Display for GadcParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GadcParam::Loss => "loss",
            GadcParam::Noise => "noise",
            GadcParam::Phase => "phase",
        })
    }
}

impl std::str::FromStr for GadcParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loss" => Ok(GadcParam::Loss),
            "noise" => Ok(GadcParam::Noise),
            "phase" => Ok(GadcParam::Phase),
            other => Err(Error::Descriptor(format!("unknown GADC parameter '{other}'"))),
        }
    }
}

fn check_unit(name: &'static str, v: f64, open: bool) -> Result<()> {
    let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
    if ok {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange {
            name,
            value: v,
            range: if open { "(0, 1)" } else { "[0, 1]" }.into(),
        })
    }
}

/// Kraus operators of the generalized amplitude damping channel.
pub fn gadc_kraus(gamma: f64, n: f64) -> Result<Vec<CMat>> {
    check_unit("gamma", gamma, false)?;
    check_unit("N", n, false)?;
    let m = |a: f64, b: f64, cc: f64, d: f64| CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0)]);
    let s = (1.0 - gamma).sqrt();
    Ok(vec![
        m(1.0, 0.0, 0.0, s).scale((1.0 - n).sqrt()),
        m(0.0, (gamma * (1.0 - n)).sqrt(), 0.0, 0.0),
        m(s, 0.0, 0.0, 1.0).scale(n.sqrt()),
        m(0.0, 0.0, (gamma * n).sqrt(), 0.0),
    ])
}

/// GADC Choi operator followed by the phase rotation `diag(e^{-iφ}, e^{iφ})`.
pub fn gadc_choi_phase(gamma: f64, n: f64, phi: f64) -> Result<Choi> {
    check_unit("gamma", gamma, false)?;
    check_unit("N", n, false)?;
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = c(1.0 - gamma * n, 0.0);
    m[(1, 1)] = c(gamma * n, 0.0);
    m[(2, 2)] = c(gamma * (1.0 - n), 0.0);
    m[(3, 3)] = c(1.0 - gamma * (1.0 - n), 0.0);
    let off = C64::from_polar((1.0 - gamma).sqrt(), -2.0 * phi);
    m[(0, 3)] = off;
    m[(3, 0)] = off.conj();
    Choi::new(HermOp::from_mat_unchecked(m), (2, 2))
}

pub fn gadc_choi(gamma: f64, n: f64) -> Result<Choi> {
    gadc_choi_phase(gamma, n, 0.0)
}

fn gadc_derivative(param: GadcParam, gamma: f64, n: f64, phi: f64) -> HermOp {
    let mut m = CMat::zeros(4, 4);
    match param {
        GadcParam::Loss => {
            m[(0, 0)] = c(-n, 0.0);
            m[(1, 1)] = c(n, 0.0);
            m[(2, 2)] = c(1.0 - n, 0.0);
            m[(3, 3)] = c(-(1.0 - n), 0.0);
            let off = C64::from_polar(-0.5 / (1.0 - gamma).sqrt(), -2.0 * phi);
            m[(0, 3)] = off;
            m[(3, 0)] = off.conj();
        }
        GadcParam::Noise => {
            for (i, s) in [1.0, -1.0, 1.0, -1.0].into_iter().enumerate() {
                m[(i, i)] = c(-gamma * s, 0.0);
            }
        }
        GadcParam::Phase => {
            let off = C64::from_polar((1.0 - gamma).sqrt(), -2.0 * phi) * c(0.0, -2.0);
            m[(0, 3)] = off;
            m[(3, 0)] = off.conj();
        }
    }
    HermOp::from_mat_unchecked(m)
}

/// How a family supplies `∂θ Γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivMode {
    Analytic,
    /// Central difference with step `h`, shrunk near the interval ends.
    FiniteDifference { h: f64 },
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

type ChoiFn = Arc<dyn Fn(f64) -> Result<Choi> + Send + Sync>;
type DerivFn = Arc<dyn Fn(f64) -> Result<HermOp> + Send + Sync>;

/// A differentiable one-parameter family `θ ↦ Γ^{N_θ}` on an open interval.
#[derive(Clone)]
pub struct ChannelFamily {
    eval: ChoiFn,
    deriv: Option<DerivFn>,
    mode: DerivMode,
    interval: (f64, f64),
    dims: (usize, usize),
}

impl fmt::Debug for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChannelFamily")
            .field("mode", &self.mode)
            .field("interval", &self.interval)
            .field("dims", &self.dims)
            .finish()
    }
}

impl ChannelFamily {
    /// Family with an analytic derivative.
    pub fn analytic(
        dims: (usize, usize),
        interval: (f64, f64),
        eval: impl Fn(f64) -> Result<Choi> + Send + Sync + 'static,
        deriv: impl Fn(f64) -> Result<HermOp> + Send + Sync + 'static,
    ) -> Self {
        ChannelFamily {
            eval: Arc::new(eval),
            deriv: Some(Arc::new(deriv)),
            mode: DerivMode::Analytic,
            interval,
            dims,
        }
    }

    /// Family differentiated by central differences.
    pub fn finite_difference(
        dims: (usize, usize),
        interval: (f64, f64),
        h: f64,
        eval: impl Fn(f64) -> Result<Choi> + Send + Sync + 'static,
    ) -> Self {
        ChannelFamily {
            eval: Arc::new(eval),
            deriv: None,
            mode: DerivMode::FiniteDifference { h },
            interval,
            dims,
        }
    }

    /// The θ-independent family.
    pub fn constant(ch: Choi) -> Self {
        let dims = ch.dims();
        let n = dims.0 * dims.1;
        ChannelFamily::analytic(
            dims,
            (f64::NEG_INFINITY, f64::INFINITY),
            move |_| Ok(ch.clone()),
            move |_| Ok(HermOp::zeros(n)),
        )
    }

    /// Same family, differentiated numerically with step `h`.
    pub fn with_finite_difference(&self, h: f64) -> Self {
        ChannelFamily {
            eval: self.eval.clone(),
            deriv: None,
            mode: DerivMode::FiniteDifference { h },
            interval: self.interval,
            dims: self.dims,
        }
    }

    pub fn mode(&self) -> DerivMode {
        self.mode
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta > self.interval.0 && theta < self.interval.1
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::ParamOutOfRange {
                name: "theta",
                value: theta,
                range: format!("({}, {})", self.interval.0, self.interval.1),
            })
        }
    }

    pub fn choi(&self, theta: f64) -> Result<Choi> {
        self.check_theta(theta)?;
        (self.eval)(theta)
    }

    pub fn deriv(&self, theta: f64) -> Result<HermOp> {
        self.check_theta(theta)?;
        match (&self.deriv, self.mode) {
            (Some(d), _) => d(theta),
            (None, DerivMode::FiniteDifference { h }) => self.central_difference(theta, h),
            (None, DerivMode::Analytic) => unreachable!("analytic family without derivative"),
        }
    }

    /// `(Γ(θ+h) − Γ(θ−h)) / 2h` with `h` shrunk to keep both points inside the interval.
    pub fn central_difference(&self, theta: f64, h: f64) -> Result<HermOp> {
        self.check_theta(theta)?;
        let room = (theta - self.interval.0).min(self.interval.1 - theta);
        let h = h.min(0.5 * room);
        let hi = (self.eval)(theta + h)?;
        let lo = (self.eval)(theta - h)?;
        Ok(hi.op().sub(lo.op()).scale(0.5 / h))
    }

    /// Both the Choi operator and its derivative.
    pub fn at(&self, theta: f64) -> Result<(Choi, HermOp)> {
        Ok((self.choi(theta)?, self.deriv(theta)?))
    }

    /// `max |Tr_B[∂Γ]|`, zero for a valid family.
    pub fn derivative_certificate(&self, theta: f64) -> Result<f64> {
        let d = self.deriv(theta)?;
        let t = linalg::partial_trace_mat(d.matrix(), self.dims, Keep::First)?;
        Ok(t.iter().fold(0.0f64, |a, z| a.max(z.norm())))
    }

    /// Serial composition `θ ↦ M_θ ∘ N_θ` (apply `self` first).
    pub fn then(&self, second: &ChannelFamily) -> Result<ChannelFamily> {
        if self.dims.1 != second.dims.0 {
            return Err(Error::DimMismatch("serial composition of incompatible families".into()));
        }
        let interval = (
            self.interval.0.max(second.interval.0),
            self.interval.1.min(second.interval.1),
        );
        let (a, b) = (self.clone(), second.clone());
        let (a2, b2) = (self.clone(), second.clone());
        Ok(ChannelFamily::analytic(
            (self.dims.0, second.dims.1),
            interval,
            move |t| a.choi(t)?.then(&b.choi(t)?),
            move |t| {
                let (g1, d1) = a2.at(t)?;
                let (g2, d2) = b2.at(t)?;
                let x = apply_map(&d2, g2.dims(), g1.op(), g1.d_in())?;
                let y = apply_map(g2.op(), g2.dims(), &d1, g1.d_in())?;
                Ok(x.add(&y))
            },
        ))
    }

    /// Parallel composition `θ ↦ N_θ ⊗ M_θ`.
    pub fn tensor(&self, other: &ChannelFamily) -> ChannelFamily {
        let interval = (
            self.interval.0.max(other.interval.0),
            self.interval.1.min(other.interval.1),
        );
        let (a, b) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        ChannelFamily::analytic(
            (self.dims.0 * other.dims.0, self.dims.1 * other.dims.1),
            interval,
            move |t| Ok(a.choi(t)?.tensor(&b.choi(t)?)),
            move |t| {
                let (g1, d1) = a2.at(t)?;
                let (g2, d2) = b2.at(t)?;
                let x = tensor_choi_ops(&d1, g1.dims(), g2.op(), g2.dims());
                let y = tensor_choi_ops(g1.op(), g1.dims(), &d2, g2.dims());
                Ok(x.add(&y))
            },
        )
    }
}

/// GADC family in the chosen parameter. The other parameters are fixed; for
/// `Phase`, `gamma` and `n` are fixed and `θ = φ`.
pub fn gadc_family(param: GadcParam, gamma: f64, n: f64) -> Result<ChannelFamily> {
    match param {
        GadcParam::Loss => {
            check_unit("N", n, true)?;
            Ok(ChannelFamily::analytic(
                (2, 2),
                (0.0, 1.0),
                move |g| gadc_choi(g, n),
                move |g| Ok(gadc_derivative(GadcParam::Loss, g, n, 0.0)),
            ))
        }
        GadcParam::Noise => {
            check_unit("gamma", gamma, true)?;
            Ok(ChannelFamily::analytic(
                (2, 2),
                (0.0, 1.0),
                move |nn| gadc_choi(gamma, nn),
                move |nn| Ok(gadc_derivative(GadcParam::Noise, gamma, nn, 0.0)),
            ))
        }
        GadcParam::Phase => {
            check_unit("gamma", gamma, true)?;
            check_unit("N", n, true)?;
            Ok(ChannelFamily::analytic(
                (2, 2),
                (f64::NEG_INFINITY, f64::INFINITY),
                move |phi| gadc_choi_phase(gamma, n, phi),
                move |phi| Ok(gadc_derivative(GadcParam::Phase, gamma, n, phi)),
            ))
        }
    }
}

/// Noiseless phase rotation: conjugation by `diag(e^{-iθ}, e^{iθ})`.
pub fn phase_rotation_family() -> ChannelFamily {
    ChannelFamily::analytic(
        (2, 2),
        (f64::NEG_INFINITY, f64::INFINITY),
        |phi| gadc_choi_phase(0.0, 0.0, phi),
        |phi| Ok(gadc_derivative(GadcParam::Phase, 0.0, 0.0, phi)),
    )
}

type StateFn = Arc<dyn Fn(f64) -> Result<(HermOp, HermOp)> + Send + Sync>;

/// A differentiable family of density operators `θ ↦ (ρ_θ, ∂θρ_θ)`.
#[derive(Clone)]
pub struct StateFamily {
    f: StateFn,
    dim: usize,
    interval: (f64, f64),
}

impl fmt::Debug for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateFamily")
            .field("dim", &self.dim)
            .field("interval", &self.interval)
            .finish()
    }
}

impl StateFamily {
    pub fn new(
        dim: usize,
        interval: (f64, f64),
        f: impl Fn(f64) -> Result<(HermOp, HermOp)> + Send + Sync + 'static,
    ) -> Self {
        StateFamily {
            f: Arc::new(f),
            dim,
            interval,
        }
    }

    pub fn constant(rho: HermOp) -> Self {
        let d = rho.dim();
        StateFamily::new(d, (f64::NEG_INFINITY, f64::INFINITY), move |_| {
            Ok((rho.clone(), HermOp::zeros(d)))
        })
    }

    /// `θ ↦ diag(θ, 1 − θ)` on `(0, 1)`.
    pub fn bernoulli() -> Self {
        StateFamily::new(2, (0.0, 1.0), |t| {
            Ok((HermOp::from_real_diag(&[t, 1.0 - t]), HermOp::from_real_diag(&[1.0, -1.0])))
        })
    }

    /// `θ ↦ U_θ ρ U_θ†` with `U_θ = exp(−iθH)`.
    pub fn unitary_orbit(rho: HermOp, h: HermOp) -> Result<Self> {
        let eig = linalg::eig_hermitian(&h)?;
        let d = rho.dim();
        Ok(StateFamily::new(d, (f64::NEG_INFINITY, f64::INFINITY), move |t| {
            let diag = CMat::from_fn(d, d, |i, j| {
                if i == j {
                    C64::from_polar(1.0, -t * eig.values[i])
                } else {
                    ZERO
                }
            });
            let u = &eig.vectors * diag * eig.vectors.adjoint();
            let r = rho.congruence(&u);
            let comm = h.matrix() * r.matrix() - r.matrix() * h.matrix();
            let dr = HermOp::from_mat_unchecked(comm * c(0.0, -1.0));
            Ok((r, dr))
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn at(&self, theta: f64) -> Result<(HermOp, HermOp)> {
        if !(theta > self.interval.0 && theta < self.interval.1) {
            return Err(Error::ParamOutOfRange {
                name: "theta",
                value: theta,
                range: format!("({}, {})", self.interval.0, self.interval.1),
            });
        }
        (self.f)(theta)
    }

    pub fn state(&self, theta: f64) -> Result<HermOp> {
        Ok(self.at(theta)?.0)
    }

    /// `θ ↦ N(ρ_θ)` for a fixed channel acting on the last factor (`d_ref · d_in = dim`).
    pub fn through(&self, ch: &Choi, d_ref: usize) -> StateFamily {
        let (me, ch) = (self.clone(), ch.clone());
        StateFamily::new(d_ref * ch.d_out(), self.interval, move |t| {
            let (r, dr) = me.at(t)?;
            Ok((ch.apply(&r, d_ref)?, ch.apply(&dr, d_ref)?))
        })
    }

    /// `θ ↦ N_θ(ρ_θ)` with the channel family acting on the last factor.
    pub fn through_family(&self, fam: &ChannelFamily, d_ref: usize) -> StateFamily {
        let (me, fam) = (self.clone(), fam.clone());
        let interval = (
            self.interval.0.max(fam.interval().0),
            self.interval.1.min(fam.interval().1),
        );
        StateFamily::new(d_ref * fam.dims().1, interval, move |t| {
            let (r, dr) = me.at(t)?;
            let (g, dg) = fam.at(t)?;
            let out = apply_map(g.op(), g.dims(), &r, d_ref)?;
            let d1 = apply_map(&dg, g.dims(), &r, d_ref)?;
            let d2 = apply_map(g.op(), g.dims(), &dr, d_ref)?;
            Ok((out, d1.add(&d2)))
        })
    }

    /// `θ ↦ ρ_θ ⊗ σ_θ`.
    pub fn tensor(&self, other: &StateFamily) -> StateFamily {
        let (a, b) = (self.clone(), other.clone());
        let interval = (
            self.interval.0.max(other.interval.0),
            self.interval.1.min(other.interval.1),
        );
        StateFamily::new(self.dim * other.dim, interval, move |t| {
            let (r, dr) = a.at(t)?;
            let (s, ds) = b.at(t)?;
            Ok((r.kron(&s), dr.kron(&s).add(&r.kron(&ds))))
        })
    }

    /// `θ ↦ (1 − ε)ρ_θ + ε I/d`.
    pub fn smoothed(&self, eps: f64) -> StateFamily {
        let me = self.clone();
        StateFamily::new(self.dim, self.interval, move |t| {
            let (r, dr) = me.at(t)?;
            Ok((smooth(&r, eps)?, dr.scale(1.0 - eps)))
        })
    }
}

/// Classical–quantum channel family `x ↦ ω^{x,θ}`: input measured in the
/// computational basis, letter `x` prepares `ω^{x,θ}`.
#[derive(Debug, Clone)]
pub struct CqFamily {
    letters: Vec<StateFamily>,
}

impl CqFamily {
    pub fn new(letters: Vec<StateFamily>) -> Result<Self> {
        let first = letters
            .first()
            .ok_or_else(|| Error::DimMismatch("cq family needs at least one letter".into()))?;
        if letters.iter().any(|l| l.dim() != first.dim()) {
            return Err(Error::DimMismatch("cq letters have differing output dimensions".into()));
        }
        Ok(CqFamily { letters })
    }

    pub fn letters(&self) -> &[StateFamily] {
        &self.letters
    }

    pub fn d_out(&self) -> usize {
        self.letters[0].dim()
    }

    pub fn interval(&self) -> (f64, f64) {
        self.letters.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |acc, l| {
            (acc.0.max(l.interval().0), acc.1.min(l.interval().1))
        })
    }
}

fn block_diag(blocks: &[HermOp]) -> HermOp {
    let d = blocks[0].dim();
    let n = blocks.len() * d;
    let mut m = CMat::zeros(n, n);
    for (x, b) in blocks.iter().enumerate() {
        m.view_mut((x * d, x * d), (d, d)).copy_from(b.matrix());
    }
    HermOp::from_mat_unchecked(m)
}

/// `Σ_x |x⟩⟨x| ⊗ ω_x`.
pub fn cq_state(blocks: &[HermOp]) -> HermOp {
    block_diag(blocks)
}

/// Channel family of a cq family: `Γ(θ) = Σ_x |x⟩⟨x| ⊗ ω^{x,θ}`.
pub fn cq_channel(f: &CqFamily) -> ChannelFamily {
    let dims = (f.letters.len(), f.d_out());
    let (a, b) = (f.clone(), f.clone());
    ChannelFamily::analytic(
        dims,
        f.interval(),
        move |t| {
            let blocks = a.letters.iter().map(|l| l.state(t)).collect::<Result<Vec<_>>>()?;
            Choi::new(block_diag(&blocks), dims)
        },
        move |t| {
            let blocks = b.letters.iter().map(|l| Ok(l.at(t)?.1)).collect::<Result<Vec<_>>>()?;
            Ok(block_diag(&blocks))
        },
    )
}

type Complex2 = [f64; 2];

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum DescriptorJson {
    Kraus {
        dim_in: usize,
        dim_out: usize,
        kraus: Vec<Vec<Vec<Complex2>>>,
    },
    Gadc {
        param: GadcParam,
        gamma: f64,
        #[serde(rename = "N")]
        n: f64,
        #[serde(default)]
        phi: Option<f64>,
    },
    Choi {
        dims: [usize; 2],
        matrix: Vec<Vec<Complex2>>,
    },
}

/// A parsed channel descriptor.
#[derive(Debug, Clone)]
pub enum ChannelSpec {
    /// Fixed channel, treated as a constant family.
    Fixed(Choi),
    Gadc {
        param: GadcParam,
        gamma: f64,
        n: f64,
        phi: f64,
    },
}

impl ChannelSpec {
    /// Parses the JSON descriptor format accepted by the command line.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DescriptorJson = serde_json::from_str(text).map_err(|e| Error::Descriptor(e.to_string()))?;
        match raw {
            DescriptorJson::Kraus { dim_in, dim_out, kraus } => {
                let mats = kraus
                    .iter()
                    .enumerate()
                    .map(|(k, m)| to_matrix(m, dim_out, dim_in, &format!("kraus[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ChannelSpec::Fixed(choi_from_kraus(&mats).map_err(|e| Error::Descriptor(format!("kraus: {e}")))?))
            }
            DescriptorJson::Gadc { param, gamma, n, phi } => {
                check_unit("gamma", gamma, false).map_err(|e| Error::Descriptor(format!("gamma: {e}")))?;
                check_unit("N", n, false).map_err(|e| Error::Descriptor(format!("N: {e}")))?;
                let phi = phi.unwrap_or(0.0);
                if !phi.is_finite() {
                    return Err(Error::Descriptor("phi: must be finite".into()));
                }
                Ok(ChannelSpec::Gadc { param, gamma, n, phi })
            }
            DescriptorJson::Choi { dims, matrix } => {
                let n = dims[0] * dims[1];
                let m = to_matrix(&matrix, n, n, "matrix")?;
                let op = HermOp::new(m).map_err(|e| Error::Descriptor(format!("matrix: {e}")))?;
                Ok(ChannelSpec::Fixed(
                    Choi::new(op, (dims[0], dims[1])).map_err(|e| Error::Descriptor(format!("matrix: {e}")))?,
                ))
            }
        }
    }

    /// The parameter value encoded in the descriptor (0 for fixed channels).
    pub fn default_theta(&self) -> f64 {
        match self {
            ChannelSpec::Fixed(_) => 0.0,
            ChannelSpec::Gadc { param, gamma, n, phi } => match param {
                GadcParam::Loss => *gamma,
                GadcParam::Noise => *n,
                GadcParam::Phase => *phi,
            },
        }
    }

    pub fn family(&self) -> Result<ChannelFamily> {
        match self {
            ChannelSpec::Fixed(ch) => Ok(ChannelFamily::constant(ch.clone())),
            ChannelSpec::Gadc { param, gamma, n, .. } => gadc_family(*param, *gamma, *n),
        }
    }

    /// The channel at the descriptor's own parameter value.
    pub fn channel(&self) -> Result<Choi> {
        match self {
            ChannelSpec::Fixed(ch) => Ok(ch.clone()),
            ChannelSpec::Gadc { gamma, n, phi, .. } => gadc_choi_phase(*gamma, *n, *phi),
        }
    }
}

fn to_matrix(rows: &[Vec<Complex2>], nrows: usize, ncols: usize, what: &str) -> Result<CMat> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Descriptor(format!("{what}: expected a {nrows}x{ncols} matrix")));
    }
    if rows.iter().flatten().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Descriptor(format!("{what}: entries must be finite")));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| c(rows[i][j][0], rows[i][j][1])))
}
