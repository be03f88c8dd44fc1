//! SLD and RLD Fisher information of state and channel families.
//!
//! Finite values come from spectral formulas; whether a value is finite is
//! decided separately by a support test on the derivative, so `+∞` is never
//! the result of a division by a tiny eigenvalue.

use rand::Rng;

use crate::channels::{ChannelFamily, CqFamily, StateFamily};
use crate::divergences;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, c, CMat, CVec, HermOp, Keep};
use crate::sdp::programs::root_fidelity_channel_sdp_with;
use crate::sdp::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherKind {
    Sld,
    Rld,
}

/// Outcome of the support test deciding finiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitenessReport {
    pub kind: FisherKind,
    /// `"Π⊥ ∂ Π⊥ = 0"` or `"Π⊥ ∂ = 0"`.
    pub condition: &'static str,
    /// Frobenius norm of the violating part.
    pub residual: f64,
    pub tolerance: f64,
    pub finite: bool,
}

/// Relative tolerance of the finiteness test, scaled by `1 + ‖∂‖_F`.
pub const FINITENESS_TOL: f64 = 1e-9;

/// Support test for SLD (`Π⊥∂Π⊥ = 0`) or RLD (`Π⊥∂ = 0`) finiteness, where
/// `Π⊥` projects onto the kernel of `op` (a state or a Choi operator).
pub fn finiteness_report(op: &HermOp, deriv: &HermOp, kind: FisherKind) -> Result<FinitenessReport> {
    if op.dim() != deriv.dim() {
        return Err(Error::DimMismatch(format!(
            "operator of dimension {} with derivative of dimension {}",
            op.dim(),
            deriv.dim()
        )));
    }
    let split = linalg::support_split(op, None)?;
    let q = split.proj_kernel.matrix();
    let violating = match kind {
        FisherKind::Sld => q * deriv.matrix() * q,
        FisherKind::Rld => q * deriv.matrix(),
    };
    let residual = violating.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tolerance = FINITENESS_TOL * (1.0 + deriv.fro_norm());
    Ok(FinitenessReport {
        kind,
        condition: match kind {
            FisherKind::Sld => "Π⊥ ∂ Π⊥ = 0",
            FisherKind::Rld => "Π⊥ ∂ = 0",
        },
        residual,
        tolerance,
        finite: residual <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Spectral,
    Sdp,
    Seesaw,
    Limit,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Spectral => "closed",
            Method::Sdp => "sdp",
            Method::Seesaw => "seesaw",
            Method::Limit => "limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisherResult {
    pub value: ExtReal,
    pub finiteness: FinitenessReport,
    pub method: Method,
    /// Relative disagreement between two independent evaluations, when computed.
    pub cross_check: Option<f64>,
}

/// Checks that `rho` is a density operator and `drho` a traceless Hermitian operator of the same size.
pub fn validate_state_pair(rho: &HermOp, drho: &HermOp) -> Result<()> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimMismatch(format!(
            "state of dimension {} with derivative of dimension {}",
            rho.dim(),
            drho.dim()
        )));
    }
    rho.check_density()?;
    let trace = drho.trace();
    if trace.abs() > 1e-8 * (1.0 + drho.fro_norm()) {
        return Err(Error::NonTraceless { trace });
    }
    Ok(())
}

/// Eigenvalues clamped at the kernel cutoff: kernel eigenvalues become exactly 0.
fn clamped_spectrum(rho: &HermOp) -> Result<(Vec<f64>, CMat, f64)> {
    let eig = linalg::eig_hermitian(rho)?;
    let tol = eig.default_rank_tol();
    let vals = eig.values.iter().map(|&l| if l > tol { l } else { 0.0 }).collect();
    Ok((vals, eig.vectors, tol))
}

/// Symmetric logarithmic derivative `L` solving `∂ρ = (Lρ + ρL)/2` on the
/// support, with `⟨j|L|k⟩ = 0` whenever `λ_j + λ_k = 0`.
pub fn sld_operator(rho: &HermOp, drho: &HermOp) -> Result<HermOp> {
    let (vals, v, tol) = clamped_spectrum(rho)?;
    let d = v.adjoint() * drho.matrix() * &v;
    let n = vals.len();
    let l = CMat::from_fn(n, n, |j, k| {
        let s = vals[j] + vals[k];
        if s > tol {
            d[(j, k)] * (2.0 / s)
        } else {
            linalg::ZERO
        }
    });
    Ok(HermOp::from_mat_unchecked(&v * l * v.adjoint()))
}

fn sld_spectral_value(rho: &HermOp, drho: &HermOp) -> Result<(f64, f64)> {
    let (vals, v, tol) = clamped_spectrum(rho)?;
    let d = v.adjoint() * drho.matrix() * &v;
    let n = vals.len();
    let mut full = 0.0;
    let mut inner = 0.0;
    let mut cross = 0.0;
    for j in 0..n {
        for k in 0..n {
            let s = vals[j] + vals[k];
            if s > tol {
                let t = 2.0 * d[(j, k)].norm_sqr() / s;
                full += t;
                if vals[j] > 0.0 && vals[k] > 0.0 {
                    inner += t;
                } else if vals[j] > 0.0 {
                    cross += 4.0 * d[(j, k)].norm_sqr() / vals[j];
                }
            }
        }
    }
    Ok((full, inner + cross))
}

/// `2⟨Γ|(∂ρ⊗I)(ρ⊗I + I⊗ρᵀ)⁻¹(∂ρ⊗I)|Γ⟩`, inverse on the support.
pub fn sld_basis_independent(rho: &HermOp, drho: &HermOp) -> Result<f64> {
    let d = rho.dim();
    let k = rho.kron(&HermOp::identity(d)).add(&HermOp::identity(d).kron(&rho.transpose()));
    let kinv = linalg::inv_on_support(&k)?;
    let v = linalg::vec_gamma(drho.matrix());
    Ok(2.0 * (v.adjoint() * kinv.matrix() * &v)[(0, 0)].re)
}

/// Largest dimension for which the `d² × d²` cross-check formula is evaluated.
const CROSS_CHECK_MAX_DIM: usize = 12;

/// SLD Fisher information of a state family at one point.
pub fn sld_state(rho: &HermOp, drho: &HermOp) -> Result<FisherResult> {
    validate_state_pair(rho, drho)?;
    let finiteness = finiteness_report(rho, drho, FisherKind::Sld)?;
    if !finiteness.finite {
        return Ok(FisherResult {
            value: ExtReal::Infinite,
            finiteness,
            method: Method::Spectral,
            cross_check: None,
        });
    }
    let (value, alt) = sld_spectral_value(rho, drho)?;
    let mut disagreement = (value - alt).abs() / (1.0 + value.abs());
    if rho.dim() <= CROSS_CHECK_MAX_DIM {
        let bi = sld_basis_independent(rho, drho)?;
        disagreement = disagreement.max((value - bi).abs() / (1.0 + value.abs()));
    }
    if disagreement > 1e-6 {
        return Err(Error::NoConvergence(format!(
            "SLD formulas disagree (relative difference {disagreement:.3e})"
        )));
    }
    Ok(FisherResult {
        value: ExtReal::Finite(value),
        finiteness,
        method: Method::Spectral,
        cross_check: Some(disagreement),
    })
}

/// RLD Fisher information `Tr[(∂ρ)² ρ⁻¹]`, or `+∞` when `supp(∂ρ) ⊄ supp(ρ)`.
pub fn rld_state(rho: &HermOp, drho: &HermOp) -> Result<FisherResult> {
    validate_state_pair(rho, drho)?;
    let finiteness = finiteness_report(rho, drho, FisherKind::Rld)?;
    let value = if finiteness.finite {
        let inv = linalg::inv_on_support(rho)?;
        ExtReal::Finite(drho.sandwich(&inv).trace())
    } else {
        ExtReal::Infinite
    };
    Ok(FisherResult {
        value,
        finiteness,
        method: Method::Spectral,
        cross_check: None,
    })
}

/// SLD Fisher information `4[⟨∂φ|∂φ⟩ − |⟨∂φ|φ⟩|²]` of a pure-state family.
pub fn sld_pure(phi: &CVec, dphi: &CVec) -> Result<f64> {
    if phi.len() != dphi.len() {
        return Err(Error::DimMismatch("state and derivative vectors differ in length".into()));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(format!("‖φ‖ = {norm}")));
    }
    let overlap = dphi.dotc(phi);
    if overlap.re.abs() > 1e-8 * (1.0 + dphi.norm()) {
        return Err(Error::NotNormalized(format!(
            "Re⟨∂φ|φ⟩ = {:.3e} must vanish for a normalized family",
            overlap.re
        )));
    }
    Ok((4.0 * (dphi.norm_squared() - overlap.norm_sqr())).max(0.0))
}

/// RLD Fisher information `‖Tr_B[(∂Γ) Γ⁻¹ (∂Γ)]‖_∞` of a channel family.
pub fn rld_channel(fam: &ChannelFamily, theta: f64) -> Result<FisherResult> {
    let (g, dg) = fam.at(theta)?;
    let finiteness = finiteness_report(g.op(), &dg, FisherKind::Rld)?;
    let value = if finiteness.finite {
        let inv = linalg::inv_on_support(g.op())?;
        let inner = dg.sandwich(&inv);
        let reduced = linalg::partial_trace(&inner, g.dims(), Keep::First)?;
        ExtReal::Finite(linalg::lambda_max(&reduced)?.max(0.0))
    } else {
        ExtReal::Infinite
    };
    Ok(FisherResult {
        value,
        finiteness,
        method: Method::Spectral,
        cross_check: None,
    })
}

/// SLD Fisher information of a classical–quantum channel family, the
/// maximum over letters of the output-state values.
pub fn sld_cq_channel(f: &CqFamily, theta: f64) -> Result<FisherResult> {
    let mut best: Option<FisherResult> = None;
    for letter in f.letters() {
        let (r, dr) = letter.at(theta)?;
        let res = sld_state(&r, &dr)?;
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(res);
        }
    }
    Ok(best.expect("cq family has at least one letter"))
}

/// Classical Fisher information `Σ (∂p)²/p`, infinite if `∂p ≠ 0` where `p = 0`.
pub fn classical_fisher(p: &[f64], dp: &[f64]) -> ExtReal {
    let mut acc = 0.0;
    for (&pi, &di) in p.iter().zip(dp) {
        if pi > 0.0 {
            acc += di * di / pi;
        } else if di != 0.0 {
            return ExtReal::Infinite;
        }
    }
    ExtReal::Finite(acc)
}

/// Fisher information of `ρ_XB = Σ_x p(x)|x⟩⟨x| ⊗ ρ^x` through the decomposition
/// `I(p) + Σ_x p(x) I(ρ^x)`.
pub fn cq_state_fisher(
    p: &dyn Fn(f64) -> (Vec<f64>, Vec<f64>),
    cond: &[StateFamily],
    theta: f64,
    kind: FisherKind,
) -> Result<ExtReal> {
    let (probs, dprobs) = p(theta);
    if probs.len() != cond.len() || dprobs.len() != cond.len() {
        return Err(Error::DimMismatch("distribution and conditional families differ in size".into()));
    }
    let mut total = classical_fisher(&probs, &dprobs);
    for (x, fam) in cond.iter().enumerate() {
        if probs[x] <= 0.0 {
            continue;
        }
        let (r, dr) = fam.at(theta)?;
        let v = match kind {
            FisherKind::Sld => sld_state(&r, &dr)?.value,
            FisherKind::Rld => rld_state(&r, &dr)?.value,
        };
        total = total + v.map(|v| probs[x] * v);
    }
    Ok(total)
}

/// The cq state `Σ_x p(x)|x⟩⟨x| ⊗ ρ^x` and its θ-derivative.
pub fn cq_state_family_point(
    p: &dyn Fn(f64) -> (Vec<f64>, Vec<f64>),
    cond: &[StateFamily],
    theta: f64,
) -> Result<(HermOp, HermOp)> {
    let (probs, dprobs) = p(theta);
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    for (x, fam) in cond.iter().enumerate() {
        let (r, dr) = fam.at(theta)?;
        states.push(r.scale(probs[x]));
        derivs.push(r.scale(dprobs[x]).add(&dr.scale(probs[x])));
    }
    Ok((crate::channels::cq_state(&states), crate::channels::cq_state(&derivs)))
}

/// Which divergence a finite-difference Fisher estimate is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitRoute {
    /// `(8/δ²)(1 − √F)`, estimating SLD Fisher information.
    Fidelity,
    /// `(2/(α(α−1)δ²))(Q̂_α − 1)`, estimating RLD Fisher information.
    Geometric(f64),
    /// `(2/δ²) D̂`, estimating RLD Fisher information.
    BelavkinStaszewski,
}

/// Placement of the two evaluation points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    /// `θ` and `θ + δ`.
    Forward,
    /// `θ − δ/2` and `θ + δ/2`.
    Central,
}

/// A finite-difference Fisher estimate with its Richardson diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    pub delta: f64,
    /// Estimate at `δ/2`.
    pub half_step: f64,
    /// `2·E(δ/2) − E(δ)`, cancelling the first-order error of a forward shift.
    pub extrapolated: f64,
}

impl LimitEstimate {
    /// `|E(δ) − E(δ/2)|`.
    pub fn richardson_change(&self) -> f64 {
        (self.value - self.half_step).abs()
    }
}

fn points(theta: f64, delta: f64, shift: Shift) -> (f64, f64) {
    match shift {
        Shift::Forward => (theta, theta + delta),
        Shift::Central => (theta - 0.5 * delta, theta + 0.5 * delta),
    }
}

fn state_limit_once(fam: &StateFamily, theta: f64, delta: f64, eps: f64, route: LimitRoute, shift: Shift) -> Result<f64> {
    let (t0, t1) = points(theta, delta, shift);
    let base = fam.smoothed(eps).state(t0)?;
    let moved = fam.smoothed(eps).state(t1)?;
    let d2 = delta * delta;
    match route {
        LimitRoute::Fidelity => {
            let rf = linalg::root_fidelity(&base, &moved)?;
            Ok(8.0 / d2 * (1.0 - rf))
        }
        LimitRoute::Geometric(alpha) => {
            let q = divergences::geometric_quasi(&moved, &base, alpha)?;
            match q.finite() {
                Some(q) => Ok(2.0 / (alpha * (alpha - 1.0) * d2) * (q - 1.0)),
                None => Ok(f64::INFINITY),
            }
        }
        LimitRoute::BelavkinStaszewski => {
            let d = divergences::bs_relative_entropy(&moved, &base)?;
            Ok(d.finite().map_or(f64::INFINITY, |d| 2.0 / d2 * d))
        }
    }
}

/// Fisher information of a state family from a divergence between nearby
/// smoothed states. Smoothing by `eps` is applied before the parameter shift.
pub fn state_fisher_limits(
    fam: &StateFamily,
    theta: f64,
    delta: f64,
    eps: f64,
    route: LimitRoute,
    shift: Shift,
) -> Result<LimitEstimate> {
    if !(delta > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "delta",
            value: delta,
            range: "(0, ∞)".into(),
        });
    }
    if let LimitRoute::Geometric(a) = route {
        if !(a > 0.0) || a == 1.0 || !a.is_finite() {
            return Err(Error::BadAlpha {
                alpha: a,
                allowed: "(0, 1) ∪ (1, ∞)",
            });
        }
    }
    let value = state_limit_once(fam, theta, delta, eps, route, shift)?;
    let half_step = state_limit_once(fam, theta, 0.5 * delta, eps, route, shift)?;
    Ok(LimitEstimate {
        value,
        delta,
        half_step,
        extrapolated: 2.0 * half_step - value,
    })
}

/// Default parameter shift of the channel limit estimator.
pub const DEFAULT_LIMIT_DELTA: f64 = 1e-3;

/// Solver tolerance used for the fidelity SDPs inside limit estimates.
pub const LIMIT_SDP_TOL: f64 = 1e-11;

fn channel_limit_once(fam: &ChannelFamily, theta: f64, delta: f64, shift: Shift) -> Result<f64> {
    let (t0, t1) = points(theta, delta, shift);
    let a = fam.choi(t0)?;
    let b = fam.choi(t1)?;
    let opts = SolverOptions::with_tol(LIMIT_SDP_TOL);
    let rf = root_fidelity_channel_sdp_with(&a, &b, &opts)?.value.to_f64().min(1.0);
    Ok(8.0 / (delta * delta) * (1.0 - rf))
}

/// SLD Fisher information of a channel family estimated as
/// `(8/δ²)(1 − √F(N_θ, N_{θ+δ}))` with the channel root fidelity from its SDP.
pub fn sld_channel_limit(fam: &ChannelFamily, theta: f64, delta: f64, shift: Shift) -> Result<LimitEstimate> {
    if !(delta > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "delta",
            value: delta,
            range: "(0, ∞)".into(),
        });
    }
    let value = channel_limit_once(fam, theta, delta, shift)?;
    let half_step = channel_limit_once(fam, theta, 0.5 * delta, shift)?;
    Ok(LimitEstimate {
        value,
        delta,
        half_step,
        extrapolated: 2.0 * half_step - value,
    })
}

/// Best value of `√2 |Tr[X ∂ρ]|` over random `X` normalized to
/// `Tr[(XX† + X†X)ρ] = 1`; a lower bound on `√I_F` for testing.
pub fn root_sld_feasible_lower_bound<R: Rng + ?Sized>(
    rho: &HermOp,
    drho: &HermOp,
    samples: usize,
    rng: &mut R,
) -> f64 {
    let d = rho.dim();
    let mut best = 0.0f64;
    for _ in 0..samples {
        let x = crate::random::complex_gaussian(d, d, rng);
        best = best.max(root_sld_objective(rho, drho, &x));
    }
    best
}

/// `√2 |Tr[X ∂ρ]| / √Tr[(XX† + X†X)ρ]`, the scale-invariant root-SLD objective.
pub fn root_sld_objective(rho: &HermOp, drho: &HermOp, x: &CMat) -> f64 {
    let norm = ((x * x.adjoint() + x.adjoint() * x) * rho.matrix()).trace().re;
    if norm <= 0.0 {
        return 0.0;
    }
    let num = (x * drho.matrix()).trace().norm();
    2f64.sqrt() * num / norm.sqrt()
}

/// Derivative of the pure-state family `θ ↦ cos θ|0⟩ + sin θ|1⟩` at θ.
pub fn qubit_rotation(theta: f64) -> (CVec, CVec) {
    (
        CVec::from_vec(vec![c(theta.cos(), 0.0), c(theta.sin(), 0.0)]),
        CVec::from_vec(vec![c(-theta.sin(), 0.0), c(theta.cos(), 0.0)]),
    )
}
