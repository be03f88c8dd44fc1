//! Rényi-type divergences of states and channels, in nats.
//!
//! The geometric family is built on the weighted geometric mean
//! `G_α(σ, ρ) = σ^{1/2}(σ^{-1/2} ρ σ^{-1/2})^α σ^{1/2}`. When the support of the
//! first argument is not contained in the support of the second, values for
//! `α ∈ (0,1)` come from the Schur-reduced operator `ρ̃`, and values for `α > 1`
//! are `+∞`.

use crate::channels::Choi;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::linalg::{self, HermOp, Keep, SupportSplit};

/// How a geometric value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportCase {
    /// `supp ρ ⊆ supp σ`.
    Contained,
    /// `α ∈ (0,1)` without containment, evaluated on the Schur reduction `ρ̃`.
    TildeReduced,
    /// `α > 1` without containment.
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceValue {
    pub value: ExtReal,
    pub alpha: Option<f64>,
    pub support_case: SupportCase,
    /// Regularization `ε` of the smallest term in an `ε`-schedule, 0 when unused.
    pub regularization: f64,
    /// Set when `α` is close enough to 1 that `1/(α−1)` amplifies rounding.
    pub warning: Option<String>,
}

/// Condition number above which the `ε`-schedule replaces the support formula.
pub const ILL_CONDITIONED: f64 = 1e10;

/// Regularizations used by the `ε`-schedule, largest first.
pub const EPS_SCHEDULE: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Quasi-entropies below this are treated as exactly zero.
const QUASI_ZERO: f64 = 1e-13;

fn near_one_warning(alpha: f64) -> Option<String> {
    ((alpha - 1.0).abs() < 1e-3).then(|| format!("α = {alpha} is close to 1; value is ill-conditioned"))
}

fn check_pair(rho: &HermOp, sigma: &HermOp) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimMismatch(format!(
            "divergence between {}- and {}-dimensional operators",
            rho.dim(),
            sigma.dim()
        )));
    }
    rho.check_density()?;
    let eig = linalg::eig_hermitian(sigma)?;
    if eig.max() <= 0.0 || eig.min() < -10.0 * eig.default_rank_tol() {
        return Err(Error::NotPsd { min_eig: eig.min() });
    }
    Ok(())
}

fn check_renyi_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha {
            alpha,
            allowed: "(0, 1) ∪ (1, ∞)",
        });
    }
    Ok(())
}

fn check_channel_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0 {
        return Err(Error::BadAlpha {
            alpha,
            allowed: "(0, 1) ∪ (1, 2]",
        });
    }
    Ok(())
}

/// Condition number of `h` restricted to its support.
fn support_condition(h: &HermOp) -> Result<f64> {
    let eig = linalg::eig_hermitian(h)?;
    let tol = eig.default_rank_tol();
    let smallest = eig.values.iter().copied().find(|&l| l > tol).unwrap_or(eig.max());
    Ok(eig.max() / smallest)
}

/// Richardson extrapolation to `ε = 0` from the last two schedule values,
/// assuming an error linear in `ε`.
fn extrapolate(values: &[f64]) -> f64 {
    let n = values.len();
    let ratio = EPS_SCHEDULE[n - 2] / EPS_SCHEDULE[n - 1];
    values[n - 1] + (values[n - 1] - values[n - 2]) / (ratio - 1.0)
}

fn classify(rho: &HermOp, split: &SupportSplit, alpha: f64) -> SupportCase {
    if split.is_full_rank() || linalg::support_contained(rho, split) {
        SupportCase::Contained
    } else if alpha < 1.0 {
        SupportCase::TildeReduced
    } else {
        SupportCase::Infinite
    }
}

/// Geometric quasi-entropy `Q̂_α(ρ‖σ) = Tr[G_α(σ, ρ)]`, `+∞` for `α > 1` without containment.
pub fn geometric_quasi(rho: &HermOp, sigma: &HermOp, alpha: f64) -> Result<ExtReal> {
    Ok(geometric_quasi_detail(rho, sigma, alpha)?.0)
}

fn geometric_quasi_detail(rho: &HermOp, sigma: &HermOp, alpha: f64) -> Result<(ExtReal, SupportCase, f64)> {
    check_pair(rho, sigma)?;
    check_renyi_alpha(alpha)?;
    let split = linalg::support_split(sigma, None)?;
    let case = classify(rho, &split, alpha);
    if case == SupportCase::Infinite {
        return Ok((ExtReal::Infinite, case, 0.0));
    }
    if case == SupportCase::Contained && support_condition(sigma)? > ILL_CONDITIONED {
        let values = EPS_SCHEDULE
            .iter()
            .map(|&e| Ok(linalg::geometric_mean(sigma, rho, alpha, e)?.trace()))
            .collect::<Result<Vec<f64>>>()?;
        let q = extrapolate(&values).max(0.0);
        return Ok((ExtReal::Finite(q), case, EPS_SCHEDULE[2]));
    }
    let q = linalg::geometric_mean(sigma, rho, alpha, 0.0)?.trace().max(0.0);
    Ok((ExtReal::Finite(q), case, 0.0))
}

fn renyi_from_quasi(q: ExtReal, alpha: f64) -> ExtReal {
    match q {
        ExtReal::Infinite => ExtReal::Infinite,
        ExtReal::Finite(q) if q <= QUASI_ZERO => {
            // ln 0 / (α − 1) is +∞ for α < 1; for α > 1 a zero quasi-entropy
            // only arises from ρ = 0, excluded by the density check.
            ExtReal::Infinite
        }
        ExtReal::Finite(q) => ExtReal::Finite(q.ln() / (alpha - 1.0)),
    }
}

/// Geometric Rényi relative entropy `D̂_α(ρ‖σ) = ln Q̂_α / (α − 1)`.
///
/// For `α > 2` on well-conditioned pairs the quasi-entropy is evaluated in log
/// space, `ln Q̂_α = α D_max + ln Tr G_α(σ, e^{−D_max} ρ)`, so large `α` cannot overflow.
pub fn geometric_renyi(rho: &HermOp, sigma: &HermOp, alpha: f64) -> Result<DivergenceValue> {
    let (q, support_case, regularization) = geometric_quasi_detail(rho, sigma, alpha)?;
    let value = match q {
        ExtReal::Finite(_) if alpha > 2.0 && regularization == 0.0 => {
            let d = dmax(rho, sigma)?.to_f64();
            let scaled = linalg::geometric_mean(sigma, &rho.scale((-d).exp()), alpha, 0.0)?.trace();
            ExtReal::Finite((alpha * d + scaled.ln()) / (alpha - 1.0))
        }
        q => renyi_from_quasi(q, alpha),
    };
    Ok(DivergenceValue {
        value,
        alpha: Some(alpha),
        support_case,
        regularization,
        warning: near_one_warning(alpha),
    })
}

fn check_channels(cn: &Choi, cm: &Choi) -> Result<()> {
    if cn.dims() != cm.dims() {
        return Err(Error::DimMismatch(format!(
            "channels with dimensions {:?} and {:?}",
            cn.dims(),
            cm.dims()
        )));
    }
    Ok(())
}

/// `λ_min` (α ≤ 1) or `λ_max` (α > 1) of `Tr_B[G_α(Γ^M_ε, Γ^N)]`.
fn channel_extreme(cn: &Choi, m: &HermOp, alpha: f64, eps: f64) -> Result<f64> {
    let g = linalg::geometric_mean(m, cn.op(), alpha, eps)?;
    let reduced = linalg::partial_trace(&g, cn.dims(), Keep::First)?;
    if alpha <= 1.0 {
        linalg::lambda_min(&reduced)
    } else {
        linalg::lambda_max(&reduced)
    }
}

/// Geometric Rényi relative entropy of channels for `α ∈ (0,1) ∪ (1,2]`:
/// `ln λ_min(Tr_B G_α) / (α−1)` below 1 and `ln ‖Tr_B G_α‖_∞ / (α−1)` above,
/// with `G_α = G_α(Γ^M, Γ^N)`.
pub fn geometric_renyi_channel(cn: &Choi, cm: &Choi, alpha: f64) -> Result<DivergenceValue> {
    check_channels(cn, cm)?;
    check_channel_alpha(alpha)?;
    let split = linalg::support_split(cm.op(), None)?;
    let support_case = classify(cn.op(), &split, alpha);
    let (q, regularization) = match support_case {
        SupportCase::Infinite => (ExtReal::Infinite, 0.0),
        _ if alpha < 1.0 && support_condition(cm.op())? > ILL_CONDITIONED => {
            let values = EPS_SCHEDULE
                .iter()
                .map(|&e| channel_extreme(cn, cm.op(), alpha, e))
                .collect::<Result<Vec<f64>>>()?;
            (ExtReal::Finite(extrapolate(&values).max(0.0)), EPS_SCHEDULE[2])
        }
        _ => (ExtReal::Finite(channel_extreme(cn, cm.op(), alpha, 0.0)?.max(0.0)), 0.0),
    };
    Ok(DivergenceValue {
        value: renyi_from_quasi(q, alpha),
        alpha: Some(alpha),
        support_case,
        regularization,
        warning: near_one_warning(alpha),
    })
}

/// `λ_min(Tr_B[G_α(Γ^M, Γ^N)])` for `α ∈ [0, 1]`, continuous at both endpoints.
/// `−ln` of it equals `(1−α) D̂_α(N‖M)` inside the interval.
pub fn channel_quasi_min(cn: &Choi, cm: &Choi, alpha: f64) -> Result<f64> {
    check_channels(cn, cm)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BadAlpha {
            alpha,
            allowed: "[0, 1]",
        });
    }
    Ok(channel_extreme(cn, cm.op(), alpha, 0.0)?.max(0.0))
}

/// `ρ^{1/2} ln(ρ^{1/2} σ⁻¹ ρ^{1/2}) ρ^{1/2}`, the operator whose trace is the BS entropy.
fn bs_operator(rho: &HermOp, sigma: &HermOp) -> Result<HermOp> {
    let root = linalg::sqrt_psd(rho)?;
    let inner = root.sandwich(&linalg::inv_on_support(sigma)?);
    Ok(root.sandwich(&linalg::log_on_support(&inner)?))
}

/// Belavkin–Staszewski relative entropy `Tr[ρ ln(ρ^{1/2} σ⁻¹ ρ^{1/2})]`, `+∞` without containment.
pub fn bs_relative_entropy(rho: &HermOp, sigma: &HermOp) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    let split = linalg::support_split(sigma, None)?;
    if !linalg::support_contained(rho, &split) {
        return Ok(ExtReal::Infinite);
    }
    Ok(ExtReal::Finite(bs_operator(rho, sigma)?.trace()))
}

/// Belavkin–Staszewski relative entropy of channels,
/// `λ_max(Tr_B[(Γ^N)^{1/2} ln((Γ^N)^{1/2} (Γ^M)⁻¹ (Γ^N)^{1/2}) (Γ^N)^{1/2}])`.
pub fn bs_channel(cn: &Choi, cm: &Choi) -> Result<ExtReal> {
    check_channels(cn, cm)?;
    let split = linalg::support_split(cm.op(), None)?;
    if !linalg::support_contained(cn.op(), &split) {
        return Ok(ExtReal::Infinite);
    }
    let op = bs_operator(cn.op(), cm.op())?;
    let reduced = linalg::partial_trace(&op, cn.dims(), Keep::First)?;
    Ok(ExtReal::Finite(linalg::lambda_max(&reduced)?))
}

fn contained(rho: &HermOp, sigma: &HermOp) -> Result<bool> {
    Ok(linalg::support_contained(rho, &linalg::support_split(sigma, None)?))
}

/// Petz–Rényi relative entropy `ln Tr[ρ^α σ^{1−α}] / (α − 1)`.
pub fn petz_renyi(rho: &HermOp, sigma: &HermOp, alpha: f64) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    check_renyi_alpha(alpha)?;
    if alpha > 1.0 && !contained(rho, sigma)? {
        return Ok(ExtReal::Infinite);
    }
    let a = linalg::pow_on_support(rho, alpha)?;
    let b = linalg::pow_on_support(sigma, 1.0 - alpha)?;
    Ok(renyi_from_quasi(ExtReal::Finite(a.inner(&b).max(0.0)), alpha))
}

/// Sandwiched Rényi relative entropy `ln Tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α] / (α − 1)`.
pub fn sandwiched_renyi(rho: &HermOp, sigma: &HermOp, alpha: f64) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    check_renyi_alpha(alpha)?;
    if alpha > 1.0 && !contained(rho, sigma)? {
        return Ok(ExtReal::Infinite);
    }
    let s = linalg::pow_on_support(sigma, (1.0 - alpha) / (2.0 * alpha))?;
    let inner = s.sandwich(rho);
    let q = linalg::pow_on_support(&inner, alpha)?.trace();
    Ok(renyi_from_quasi(ExtReal::Finite(q.max(0.0)), alpha))
}

/// Umegaki relative entropy `Tr[ρ(ln ρ − ln σ)]`.
pub fn relative_entropy(rho: &HermOp, sigma: &HermOp) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    if !contained(rho, sigma)? {
        return Ok(ExtReal::Infinite);
    }
    let diff = linalg::log_on_support(rho)?.sub(&linalg::log_on_support(sigma)?);
    Ok(ExtReal::Finite(rho.inner(&diff)))
}

/// Max-relative entropy `ln λ_max(σ^{-1/2} ρ σ^{-1/2})`.
pub fn dmax(rho: &HermOp, sigma: &HermOp) -> Result<ExtReal> {
    check_pair(rho, sigma)?;
    if !contained(rho, sigma)? {
        return Ok(ExtReal::Infinite);
    }
    let s = linalg::pow_on_support(sigma, -0.5)?;
    Ok(ExtReal::Finite(linalg::lambda_max(&s.sandwich(rho))?.ln()))
}

/// Geometric fidelity `F̂(ρ,σ) = (Tr G_{1/2}(σ, ρ))²`, the `ε → 0` limit in all support cases.
pub fn geometric_fidelity(rho: &HermOp, sigma: &HermOp) -> Result<f64> {
    check_pair(rho, sigma)?;
    let q = linalg::geometric_mean(sigma, rho, 0.5, 0.0)?.trace().max(0.0);
    Ok((q * q).min(1.0))
}

/// Fidelity `‖√ρ √σ‖₁²`.
pub fn fidelity(rho: &HermOp, sigma: &HermOp) -> Result<f64> {
    check_pair(rho, sigma)?;
    let r = linalg::root_fidelity(rho, sigma)?;
    Ok((r * r).min(1.0))
}
