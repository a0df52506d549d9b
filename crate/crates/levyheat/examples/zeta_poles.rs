//! Pole structure of the regularized zeta function ζ(z) = TR(Ã^(-z)) and
//! its numeric meromorphic continuation.
//!
//! Prints the candidate pole table in dimensions 2 and 3 under both trace
//! normalizations, then continues ζ to nonpositive integers and compares
//! with the exact closed form (1/2π)/(z-2) available in n = 2.
//!
//! Run: cargo run --release -p levyheat --example zeta_poles

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::quad::QuadConfig;
use levyheat::spectral::{zeta_continue, zeta_poles, Normalization};
use levyheat::symbolic::{complex_power_symbol, parametrix, shifted_symbol};
use levyheat::rat;
use num_complex::Complex64;

fn main() -> levyheat::Result<()> {
    let quad = QuadConfig::default();
    let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None)?;
    let series = shifted_symbol(&spec, 4, &quad)?;
    let cps = complex_power_symbol(&parametrix(&series, 4)?)?;

    for n in [2u32, 3] {
        for norm in [Normalization::Direct, Normalization::PaperExample] {
            println!("{}", zeta_poles(&cps, n, norm)?);
        }
    }

    // continuation needs a deeper truncation than the table
    let deep = complex_power_symbol(&parametrix(&shifted_symbol(&spec, 8, &quad)?, 8)?)?;
    println!("continued values in n = 2 (κ = direct) vs closed form (1/2π)/(z-2):");
    for z in [0.0, -1.0, -2.0] {
        let v = zeta_continue(&spec, &deep, 2, Complex64::new(z, 0.0), 2.0, &quad)?;
        let exact = 1.0 / (2.0 * std::f64::consts::PI * (z - 2.0));
        println!("  ζ({z:>4}) = {:+.10e}   exact {exact:+.10e}   diff {:+.2e}", v.re, v.re - exact);
    }
    Ok(())
}
