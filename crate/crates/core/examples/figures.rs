//! Regenerates estimation and discrimination curves as CSV on standard output.

use geofish::bounds::{figure_data, unit_grid, Figure};
use geofish::Result;

fn main() -> Result<()> {
    let grid = unit_grid(9);
    let noise = figure_data(&Figure::EstimateNoise { gamma: 0.5 }, &grid)?;
    print!("{}", noise.to_csv());
    println!();
    // At N = 1/2 the RLD and SLD columns coincide.
    let loss = figure_data(&Figure::EstimateLoss { n: 0.5 }, &grid)?;
    print!("{}", loss.to_csv());
    println!();
    let disc = figure_data(&Figure::DiscNoise { n1: 0.2, n2: 0.2 }, &unit_grid(3))?;
    print!("{}", disc.to_csv());
    Ok(())
}
