//! SLD and RLD Fisher information of state families, three ways: spectral
//! formulas, semi-definite programs, and finite-difference limits.

use geofish::channels::StateFamily;
use geofish::fisher::{self, LimitRoute, Shift};
use geofish::{sdp, HermOp, Result};

fn main() -> Result<()> {
    // A full-rank qubit family: ρ_θ = (1 − p) |ψ_θ⟩⟨ψ_θ| + p I/2 with a rotating |ψ_θ⟩.
    let p = 0.3;
    let fam = StateFamily::new(2, (-10.0, 10.0), move |t| {
        let (c, s) = (t.cos(), t.sin());
        let pure = HermOp::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]])?;
        let dpure = HermOp::from_real_rows(&[&[-2.0 * c * s, c * c - s * s], &[c * c - s * s, 2.0 * c * s]])?;
        Ok((pure.scale(1.0 - p).add(&HermOp::identity(2).scale(p / 2.0)), dpure.scale(1.0 - p)))
    });
    let theta = 0.4;
    let (rho, drho) = fam.at(theta)?;

    let sld = fisher::sld_state(&rho, &drho)?;
    let rld = fisher::rld_state(&rho, &drho)?;
    println!("SLD  closed = {:.10}", sld.value);
    println!("RLD  closed = {:.10}", rld.value);
    println!("SLD  sdp    = {:.10}", sdp::sld_state_sdp(&rho, &drho)?.value);
    println!("RLD  sdp    = {:.10}", sdp::rld_state_sdp(&rho, &drho)?.value);

    for (name, route) in [
        ("fidelity", LimitRoute::Fidelity),
        ("geometric α=2", LimitRoute::Geometric(2.0)),
        ("Belavkin–Staszewski", LimitRoute::BelavkinStaszewski),
    ] {
        let est = fisher::state_fisher_limits(&fam, theta, 1e-3, 0.0, route, Shift::Central)?;
        println!("limit {name:<20} = {:.8} (halving changes it by {:.1e})", est.value, est.richardson_change());
    }

    // A rank-deficient family whose derivative leaves the support: SLD stays
    // finite while RLD diverges.
    let pure = StateFamily::new(2, (-10.0, 10.0), |t| {
        let (c, s) = (t.cos(), t.sin());
        Ok((
            HermOp::from_real_rows(&[&[c * c, c * s], &[c * s, s * s]])?,
            HermOp::from_real_rows(&[&[-2.0 * c * s, c * c - s * s], &[c * c - s * s, 2.0 * c * s]])?,
        ))
    });
    let (r, dr) = pure.at(theta)?;
    let rld = fisher::rld_state(&r, &dr)?;
    println!(
        "pure state: SLD = {}, RLD = {} (support residual {:.2e})",
        fisher::sld_state(&r, &dr)?.value,
        rld.value,
        rld.finiteness.residual
    );
    Ok(())
}
