//! Error exponents for discriminating two generalized amplitude damping channels.

use geofish::bounds;
use geofish::channels::gadc_choi;
use geofish::Result;

fn main() -> Result<()> {
    let cn = gadc_choi(0.8, 0.2)?;
    let cm = gadc_choi(0.7, 0.2)?;

    let lower = bounds::chernoff_lower(&cn, &cm)?;
    let upper = bounds::geometric_chernoff_upper(&cn, &cm)?;
    println!("Chernoff exponent: {lower:.6} ≤ C ≤ {upper:.6}");

    for n in [1, 10, 100] {
        println!("n = {n:>3}: error exponent ≤ {:.6}", bounds::chernoff_nonasymptotic_upper(&cn, &cm, n, 0.5)?);
    }

    for r in [0.001, 0.005, 0.02, 0.1] {
        let h = bounds::hoeffding_upper(&cn, &cm, r)?;
        let note = h.note.as_deref().unwrap_or("");
        println!("Hoeffding exponent at r = {r:<5}: ≤ {} {note}", h.value);
    }
    Ok(())
}
