//! Geometric Rényi divergences between states and channels, compared with the
//! Petz and sandwiched families.

use geofish::channels::gadc_choi;
use geofish::divergences as dv;
use geofish::{HermOp, Result};

fn main() -> Result<()> {
    let rho = HermOp::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]])?;
    let sigma = HermOp::from_real_rows(&[&[0.4, 0.1], &[0.1, 0.6]])?;

    println!("{:>5} {:>12} {:>12} {:>12}", "α", "sandwiched", "Petz", "geometric");
    for alpha in [0.3, 0.5, 0.9, 1.5, 2.0] {
        println!(
            "{alpha:>5} {:>12.8} {:>12.8} {:>12.8}",
            dv::sandwiched_renyi(&rho, &sigma, alpha)?,
            dv::petz_renyi(&rho, &sigma, alpha)?,
            dv::geometric_renyi(&rho, &sigma, alpha)?.value,
        );
    }
    println!("Umegaki D = {:.8}", dv::relative_entropy(&rho, &sigma)?);
    println!("BS      D = {:.8}", dv::bs_relative_entropy(&rho, &sigma)?);
    println!("D_max     = {:.8}", dv::dmax(&rho, &sigma)?);
    println!("F = {:.8}, geometric F = {:.8}", dv::fidelity(&rho, &sigma)?, dv::geometric_fidelity(&rho, &sigma)?);

    // A pure state against a state it is not supported in: infinite for α > 1.
    let pure = HermOp::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]])?;
    let other = HermOp::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]])?;
    let d = dv::geometric_renyi(&pure, &other, 1.5)?;
    println!("orthogonal pure states: D̂_1.5 = {} ({:?})", d.value, d.support_case);

    let cn = gadc_choi(0.3, 0.2)?;
    let cm = gadc_choi(0.6, 0.2)?;
    for alpha in [0.5, 1.5, 2.0] {
        println!("channels: D̂_{alpha} = {:.8}", dv::geometric_renyi_channel(&cn, &cm, alpha)?.value);
    }
    println!("channels: D̂_BS = {:.8}", dv::bs_channel(&cn, &cm)?);
    Ok(())
}
