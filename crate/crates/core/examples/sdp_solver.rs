//! Using the embedded interior-point solver directly on a complex LMI:
//! the largest eigenvalue of a Hermitian matrix as `min t s.t. tI − H ⪰ 0`,
//! and the root fidelity of two channels.

use geofish::channels::{gadc_choi, Choi};
use geofish::sdp::lmi::LmiBuilder;
use geofish::sdp::{self, SolverOptions};
use geofish::{linalg, HermOp, Result, C64};

fn main() -> Result<()> {
    let h = HermOp::new(nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(-0.3, 0.0)],
    ))?;

    let mut b = LmiBuilder::new();
    let t = b.scalar(1.0);
    let blk = b.block(-h.matrix().clone());
    b.add_term(blk, t, linalg::CMat::identity(2, 2));
    let sol = sdp::solve(&b.compile(), &SolverOptions::default())?;
    println!("λ_max via SDP = {:.10} ({:?}, {} iterations)", sol.value(), sol.status, sol.iterations);
    println!("λ_max direct  = {:.10}", linalg::lambda_max(&h)?);

    let cn = gadc_choi(0.3, 0.1)?;
    let cm = Choi::identity(2);
    let f = sdp::root_fidelity_channel_sdp(&cn, &cm)?;
    println!("root fidelity of GADC(0.3, 0.1) with the identity channel = {:.8}", f.value);
    Ok(())
}
