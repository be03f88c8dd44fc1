//! Fisher information of generalized amplitude damping channels: RLD via the
//! closed formula and the SDP, SLD via the seesaw, and the resulting
//! Cramér–Rao bounds.

use geofish::bounds::{self, Scaling};
use geofish::channels::{gadc_family, GadcParam};
use geofish::{fisher, sdp, Result};

fn main() -> Result<()> {
    let (gamma, n) = (0.5, 0.2);
    for (param, theta) in [(GadcParam::Loss, gamma), (GadcParam::Noise, n), (GadcParam::Phase, 0.1)] {
        let fam = gadc_family(param, gamma, n)?;
        let closed = fisher::rld_channel(&fam, theta)?;
        let via_sdp = sdp::rld_channel_sdp(&fam, theta)?;
        let seesaw = sdp::sld_channel_seesaw(&fam, theta, 200)?;
        println!("{param:>5}: RLD closed {:.8}  formula {:.8}  sdp {:.8} (gap {:.1e})",
            closed.value,
            bounds::gadc_closed_form(param, gamma, n)?,
            via_sdp.value,
            via_sdp.gap,
        );
        println!("       SLD seesaw {:.8} after {} rounds", seesaw.value, seesaw.trace.len());

        let verdict = bounds::heisenberg_verdict(&fam, theta)?;
        let b = bounds::estimation_bound(closed.value, 100, Scaling::Standard)?;
        println!(
            "       Heisenberg scaling blocked: {}; Var ≥ {:.3e} after 100 uses",
            verdict.blocked, b.var_lower
        );
    }
    Ok(())
}
