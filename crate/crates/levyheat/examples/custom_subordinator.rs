//! User-supplied Lévy densities: the evaluator and the expansion
//! coefficients are both declared, and the engine verifies they agree
//! instead of extracting coefficients from the singular endpoint.
//!
//! Run: cargo run --release -p levyheat --example custom_subordinator

use levyheat::bernstein::LevySpec;
use levyheat::quad::QuadConfig;
use levyheat::rat;

fn main() -> levyheat::Result<()> {
    let quad = QuadConfig::default();

    // a tempered stable-like density with the matching expansion
    let p0 = 0.4;
    let spec = LevySpec::custom(
        rat(1, 3),
        vec![p0, -2.0 * p0, 2.0 * p0],
        move |t: f64| p0 * t.powf(-4.0 / 3.0) * (-2.0 * t).exp(),
        false,
    )?;
    let report = spec.validate(&quad)?;
    println!(
        "consistent spec: m̄ = {:.6e}, hypothesis ok = {}, max consistency defect {:.3e}",
        report.mbar,
        report.ok(),
        report.max_consistency_defect
    );
    println!("f(2) by quadrature = {:.10}", spec.eval_f(2.0, &quad)?);

    // same evaluator with a wrong p_1: the dyadic-grid check flags it
    let broken = LevySpec::custom(
        rat(1, 3),
        vec![p0, 5.0],
        move |t: f64| p0 * t.powf(-4.0 / 3.0) * (-2.0 * t).exp(),
        false,
    )?;
    let report = broken.validate(&quad)?;
    println!(
        "\nmisdeclared expansion: consistent = {}, defect {:.3e}",
        report.expansion_consistent, report.max_consistency_defect
    );
    Ok(())
}
