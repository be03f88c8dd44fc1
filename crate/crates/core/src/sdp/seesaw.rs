//! Alternating maximization for the SLD Fisher information of a channel family.
//!
//! With `S = √σ` and `ρ_σ = (S⊗I) Γ (S⊗I)` (the output for the pure input whose
//! reference marginal is `σ`), the channel quantity is
//!
//! ```text
//! sup_{σ, W}  2 Tr[W ∂Γ] − Tr[σ⁻¹ Tr_B(W Γ W)]
//! ```
//!
//! over densities `σ` and Hermitian `W`. The objective is jointly concave, and
//! both block maximizations are closed form: for fixed `σ` the optimal
//! `W = (S⊗I) L (S⊗I)` with `L` the SLD operator of `ρ_σ`, giving the value
//! `I_F(ρ_σ)`; for fixed `W` the optimal `σ` is `√P / Tr √P` with
//! `P = Tr_B(W Γ W)`. Every iterate is the Fisher information of an actual
//! input state, so the running value is a certified lower bound.

use crate::channels::ChannelFamily;
use crate::error::Result;
use crate::ext::ExtReal;
use crate::fisher::{self, FisherKind};
use crate::linalg::{self, HermOp, Keep};

/// Smoothing of each updated input marginal, keeping `σ` invertible.
const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Best lower bound found (`+∞` when the finiteness condition fails).
    pub value: ExtReal,
    /// Running best value after each iteration.
    pub trace: Vec<f64>,
    /// Reference marginal of the best input found.
    pub sigma: HermOp,
    pub converged: bool,
}

/// Relative improvement below which the iteration stops.
pub const SEESAW_TOL: f64 = 1e-6;

/// Seesaw lower bound on the SLD Fisher information of a channel family.
pub fn sld_channel_seesaw(fam: &ChannelFamily, theta: f64, iters: usize) -> Result<SeesawResult> {
    let (g, dg) = fam.at(theta)?;
    let (dr, db) = g.dims();
    let mut sigma = HermOp::identity(dr).scale(1.0 / dr as f64);
    if !fisher::finiteness_report(g.op(), &dg, FisherKind::Sld)?.finite {
        return Ok(SeesawResult {
            value: ExtReal::Infinite,
            trace: Vec::new(),
            sigma,
            converged: true,
        });
    }
    let mut trace: Vec<f64> = Vec::new();
    let mut best_sigma = sigma.clone();
    let mut converged = false;
    for _ in 0..iters.max(1) {
        let s = linalg::sqrt_psd(&sigma)?.kron(&HermOp::identity(db));
        let rho = s.sandwich(g.op());
        let drho = s.sandwich(&dg);
        let l = fisher::sld_operator(&rho, &drho)?;
        let value = 2.0 * l.inner(&drho) - l.sandwich(&rho).trace();
        let prev = trace.last().copied();
        match prev {
            Some(p) if value <= p => trace.push(p),
            _ => {
                trace.push(value);
                best_sigma = sigma.clone();
            }
        }
        if let Some(p) = prev {
            if value - p <= SEESAW_TOL * value.abs().max(1e-300) {
                converged = true;
                break;
            }
        }
        let w = s.sandwich(&l);
        let p = linalg::partial_trace(&w.sandwich(g.op()), (dr, db), Keep::First)?;
        let root = linalg::sqrt_psd(&p)?;
        let t = root.trace();
        if !(t > 0.0) {
            converged = true;
            break;
        }
        let next = root.scale(1.0 / t);
        sigma = next.scale(1.0 - SIGMA_FLOOR).shift(SIGMA_FLOOR / dr as f64);
    }
    Ok(SeesawResult {
        value: ExtReal::Finite(*trace.last().expect("at least one iteration")),
        trace,
        sigma: best_sigma,
        converged,
    })
}
