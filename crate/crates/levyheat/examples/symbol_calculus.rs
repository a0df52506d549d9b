//! Parametrix, heat-operator symbol and complex-power symbol.
//!
//! The relativistic order-1/2 case runs in exact rational arithmetic; its
//! coefficient tuples are the classic low-order expansions.  A second run
//! uses quadrature-derived f64 coefficients for a different subordinator.
//!
//! Run: cargo run --release -p levyheat --example symbol_calculus

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::quad::QuadConfig;
use levyheat::symbolic::{
    complex_power_symbol, heat_symbol, parametrix, parametrix_defect, shifted_symbol, SymbolSeries,
};
use levyheat::{rat, Rat};

fn main() -> levyheat::Result<()> {
    // exact rationals: α_k = 1, 1/2, -1/8, 1/16
    let series = SymbolSeries::<Rat>::from_parts(
        rat(1, 2),
        vec![rat(1, 1), rat(1, 2), rat(-1, 8), rat(1, 16)],
        1.0,
    )?;
    let par = parametrix(&series, 6)?;
    println!("parametrix of λ - σ̃ (exact rationals):");
    for block in &par {
        println!("  b[-2α-{}] = {}", block.k, block);
    }
    let defect = parametrix_defect(&series, &par);
    println!("  cancellation defect terms: {} (empty = verified)", defect.len());

    println!("\nheat-operator symbol:");
    print!("{}", heat_symbol(&par)?);

    println!("complex-power symbol:");
    print!("{}", complex_power_symbol(&par)?);

    // generic subordinator, f64 coefficients from the density expansion
    let quad = QuadConfig::default();
    let spec = LevySpec::catalog(CatalogName::GammaRatio2, Some(rat(1, 3)), None)?;
    let sym = shifted_symbol(&spec, 3, &quad)?;
    println!("\ngamma-ratio-2 (order 1/3) shifted symbol:\n  {sym}");
    let par = parametrix(&sym, 4)?;
    println!("its parametrix block k = 4:\n  {}", par[4]);
    Ok(())
}
