//! Monte Carlo verification of the probabilistic layer at desk scale:
//! the Laplace-exponent identity, the pathwise growth dichotomy of
//! subordinate Brownian motion and the first-passage arcsine ratio.
//!
//! Run: cargo run --release -p levyheat --example simulate

use levyheat::bernstein::{CatalogName, LevySpec};
use levyheat::montecarlo::{arcsine_estimate, bg_index_check, laplace_check, SimConfig};
use levyheat::rat;

fn main() -> levyheat::Result<()> {
    let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None)?;

    let cfg = SimConfig { paths: 50_000, epsilon: 1e-4, seed: 7, ..Default::default() };
    let laplace = laplace_check(&spec, &cfg, &[1.0, 5.0, 10.0])?;
    println!("Laplace identity E[e^(-λ X_t)] vs e^(-t f(λ)):");
    for row in &laplace.rows {
        println!(
            "  λ={:<4} t={:<4} est {:.6} target {:.6} (σ {:.1e})  pass={}",
            row.coord,
            row.t,
            row.estimate,
            row.target.unwrap(),
            row.stderr,
            row.pass.unwrap()
        );
    }

    let bg_cfg = SimConfig {
        paths: 10_000,
        epsilon: 1e-4,
        horizon: 1e-1,
        seed: 7,
        time_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
        ..Default::default()
    };
    let bg = bg_index_check(&spec, &bg_cfg, &[3.0, 0.67])?;
    println!("\ngrowth statistic medians t^(-1/β) sup|B_X| (order 2α = 1):");
    for row in &bg.rows {
        println!("  β={:<5} t={:<7} median {:.5e}", row.coord, row.t, row.estimate);
    }
    println!("  trends correct: {}", bg.all_pass());

    let arc = arcsine_estimate(&spec, &cfg, &[0.1, 0.03, 0.01])?;
    println!("\nfirst-passage ratio (1/x) E[X_(T(x)-)], limit α = 1/2:");
    for row in &arc.rows {
        println!("  x={:<5} ratio {:.5} (σ {:.1e})", row.coord, row.estimate, row.stderr);
    }
    Ok(())
}
