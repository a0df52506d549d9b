//! Large-λ expansion of a Bernstein function from its Lévy density.
//!
//! Builds the relativistic subordinator of order 1/2, evaluates f by
//! quadrature against the closed form, prints the Watson expansion and
//! checks the decay rate of the truncation remainder.
//!
//! Run: cargo run --release -p levyheat --example watson_expansion

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::quad::QuadConfig;
use levyheat::rat;

fn main() -> levyheat::Result<()> {
    let quad = QuadConfig::default();
    let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None)?;

    println!("expansion coefficients p_k (density ~ t^(-1-α) Σ p_k t^k):");
    for (k, p) in spec.p().iter().enumerate().take(5) {
        println!("  p_{k} = {p:+.12e}");
    }

    println!("\nLaplace exponent by quadrature vs closed form (λ+1)^(1/2) - 1:");
    for lam in [0.5, 3.0, 40.0] {
        let q = spec.eval_f(lam, &quad)?;
        let c = (lam + 1.0f64).sqrt() - 1.0;
        println!("  f({lam:>5}) = {q:.12}   closed {c:.12}   diff {:+.2e}", q - c);
    }

    let mbar = spec.mbar(&quad)?;
    println!("\nshift constant m̄(0,∞) = {mbar:.12}");

    println!("\nWatson expansion f(λ) ~ m̄ - Σ Γ(-α+k) p_k λ^(α-k):");
    let watson = spec.watson_expand(4, &quad)?;
    for term in &watson.terms {
        println!("  {:+.12e} λ^({})", term.coeff, term.exponent);
    }

    // remainder after two terms decays like λ^(α-2) = λ^(-3/2)
    let grid: Vec<f64> = (0..9).map(|i| 1e2 * 10f64.powf(i as f64 / 2.0)).collect();
    let chk = spec.check_expansion(2, &grid, &quad)?;
    println!(
        "\nremainder after 2 terms: fitted log-log slope {:.4} (theory {:.4}, ok = {})",
        chk.slope,
        chk.expected_slope,
        chk.slope_ok()
    );
    Ok(())
}
