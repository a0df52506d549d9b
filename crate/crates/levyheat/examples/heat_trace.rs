//! Short-time heat-trace expansion, including the t log t term that
//! appears in dimension 3 for the rational order 1/2.
//!
//! Run: cargo run --release -p levyheat --example heat_trace

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::oracle::assemble_heat_trace;
use levyheat::quad::QuadConfig;
use levyheat::rat;
use levyheat::spectral::{apply_shift, banuelos_crosscheck, Normalization};

fn main() -> levyheat::Result<()> {
    let quad = QuadConfig::default();
    let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None)?;
    let mbar = spec.mbar(&quad)?;

    for n in [2u32, 3] {
        let assembled = assemble_heat_trace(&spec, n, 4, Normalization::PaperExample, &quad)?;
        // report the unshifted generator: prefactor e^(-m̄ t) = e^t here
        let shifted = apply_shift(assembled.expansion, mbar);
        println!("{shifted}");
    }

    // the lowest coefficient under the direct normalization equals the
    // bounded-domain comparison constant
    let direct = assemble_heat_trace(&spec, 3, 4, Normalization::Direct, &quad)?;
    let c0 = direct
        .expansion
        .power_terms
        .iter()
        .find(|p| p.exponent == rat(-3, 1))
        .unwrap()
        .coeff;
    let cross = banuelos_crosscheck(3, 0.5, 1.0)?;
    println!("c_0 (κ=direct, n=3) = {c0:.12e}");
    println!("comparison constant  = {cross:.12e}  (1/π² = {:.12e})", 1.0 / std::f64::consts::PI.powi(2));
    Ok(())
}
