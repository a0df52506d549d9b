//! Numeric ground truth: direct quadrature of the regularized heat trace
//! against the exact closed form and the assembled symbolic expansion,
//! plus asymptotic-coefficient extraction by weighted least squares.
//!
//! Run: cargo run --release -p levyheat --example oracle_check

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::oracle::{
    closed_form_n2_relativistic, fit_asymptotics, tr_heat_numeric, verify_expansion, BasisTerm,
};
use levyheat::quad::QuadConfig;
use levyheat::rat;
use levyheat::spectral::Normalization;

fn main() -> levyheat::Result<()> {
    let quad = QuadConfig::default();
    let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None)?;

    println!("numeric trace vs closed form (1/2π) e^(-t)(1+t)/t², n = 2:");
    for t in [0.05, 0.5, 2.0] {
        let s = tr_heat_numeric(&spec, 2, t, &quad)?;
        let exact = closed_form_n2_relativistic(t);
        println!(
            "  t={t:<5} value {:.12e}  rel dev {:+.2e}  est err {:.1e}",
            s.value,
            (s.value - exact) / exact,
            s.est_error
        );
    }

    let grid: Vec<f64> = (0..10).map(|i| 1e-3 * (0.1f64 / 1e-3).powf(i as f64 / 9.0)).collect();
    let report = verify_expansion(&spec, 2, 4, Normalization::Direct, &grid, &quad)?;
    println!(
        "\nend-to-end n=2: max relative deviation of the 4-term expansion {:.3e}",
        report.max_rel_deviation
    );

    // n = 3 carries a t log t term; fit it from trace samples
    let samples: Vec<_> = grid.iter().map(|&t| tr_heat_numeric(&spec, 3, t, &quad)).collect::<levyheat::Result<_>>()?;
    let fit = fit_asymptotics(&samples, &[-3.0, -1.0, 0.0, 1.0], &[1])?;
    println!("\nn=3 fit (condition {:.2e}):", fit.condition);
    for (b, c) in fit.basis.iter().zip(&fit.coefficients) {
        println!("  {b:?} -> {c:+.6e}");
    }
    let pi2 = std::f64::consts::PI.powi(2);
    println!(
        "  t·log t coefficient vs -1/(16π²) = {:+.6e}: fitted {:+.6e}",
        -1.0 / (16.0 * pi2),
        fit.coefficient_of(BasisTerm::LogPower(1)).unwrap()
    );
    Ok(())
}
