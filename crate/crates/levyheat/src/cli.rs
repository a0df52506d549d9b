//! Batch front-end: parse a run configuration, orchestrate the pipeline
//! and emit reports.
//!
//! Configuration is a single TOML document with one flat section per
//! module (diff-friendly, no schema tooling).  The order parameter is a
//! rational string "num/den" so no float needs to be re-rationalized.
//! Command-line flags override the corresponding config fields.
//!
//! Conventions stated in every report header: `log t` means the natural
//! logarithm; `t` is dimensionless.
//!
//! Exit codes: 0 success, 1 config error, 2 validation failure,
//! 3 numeric non-convergence.

use crate::bernstein::{rat_to_f64, CatalogName, LevySpec};
use crate::error::{Error, Result};
use crate::montecarlo::{
    arcsine_estimate, bg_index_check, consistency_check, laplace_check, PathStats, SimConfig,
};
use crate::oracle::{assemble_heat_trace, tr_heat_numeric, verify_expansion};
use crate::quad::QuadConfig;
use crate::spectral::{apply_shift, banuelos_crosscheck, zeta_continue_kappa, Normalization};
use crate::symbolic::{complex_power_symbol, heat_symbol, parametrix, shifted_symbol};
use crate::Rat;
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

const LOG_CONVENTION: &str = "log t is the natural logarithm; t is dimensionless";

#[derive(Parser, Debug)]
#[command(
    name = "levyheat",
    about = "Symbol calculus and heat-trace asymptotics of subordinate Brownian motion",
    after_help = "Config is a TOML document; see README.md for the schema."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts (overrides config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated subset of json,csv,txt (overrides config).
    #[arg(long, global = true)]
    format: Option<String>,
    /// Trace normalization (overrides config).
    #[arg(long, global = true)]
    kappa: Option<KappaArg>,
    /// Monte Carlo seed (overrides config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for simulation (0 = library default).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KappaArg {
    Direct,
    Paper,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// Watson expansion of f and the shifted-symbol series.
    Expand,
    /// Parameter-dependent parametrix terms.
    Parametrix,
    /// Heat-operator symbol expansion.
    HeatSymbol,
    /// Complex-power symbol expansion.
    PowerSymbol,
    /// Zeta pole table and continued values.
    Zeta,
    /// Assembled heat-trace expansion (both normalizations reported).
    HeatTrace,
    /// Numeric oracle comparison of the assembled expansion.
    Verify,
    /// Monte Carlo suites for the probabilistic layer.
    Simulate,
    /// Everything above in one document.
    Report,
}

// --- configuration file schema ---

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    subordinator: Option<SubordinatorSection>,
    run: Option<RunSection>,
    quadrature: Option<QuadSection>,
    expand: Option<ExpandSection>,
    zeta: Option<ZetaSection>,
    verify: Option<VerifySection>,
    simulate: Option<SimulateSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubordinatorSection {
    catalog: Option<String>,
    alpha: Option<String>,
    c: Option<f64>,
    #[serde(default)]
    irrational: bool,
    /// Custom spec: declared expansion coefficients plus a named built-in
    /// density evaluator.
    p: Option<Vec<f64>>,
    density: Option<String>,
    density_alpha: Option<String>,
    density_c: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunSection {
    n: Option<u32>,
    truncation: Option<u32>,
    kappa: Option<String>,
    out: Option<String>,
    formats: Option<Vec<String>>,
    seed: Option<u64>,
    threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadSection {
    tol: Option<f64>,
    max_evals: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpandSection {
    watson_terms: Option<usize>,
    remainder_orders: Option<Vec<usize>>,
    lambda_grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ZetaSection {
    z_points: Option<Vec<f64>>,
    split_radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifySection {
    t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateSection {
    paths: Option<usize>,
    epsilon: Option<f64>,
    horizon: Option<f64>,
    time_grid: Option<Vec<f64>>,
    lambdas: Option<Vec<f64>>,
    betas: Option<Vec<f64>>,
    bg_time_grid: Option<Vec<f64>>,
    bg_paths: Option<usize>,
    x_grid: Option<Vec<f64>>,
}

/// Fully resolved run configuration.
pub struct RunConfig {
    pub spec: LevySpec,
    pub n: u32,
    pub truncation: u32,
    pub kappa: Normalization,
    pub out_dir: PathBuf,
    pub formats: Vec<String>,
    pub seed: u64,
    pub threads: usize,
    pub quad: QuadConfig,
    pub watson_terms: Option<usize>,
    pub remainder_orders: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub z_points: Vec<f64>,
    pub split_radius: f64,
    pub verify_t_grid: Vec<f64>,
    pub sim: SimConfig,
    pub lambdas: Vec<f64>,
    pub betas: Vec<f64>,
    pub bg_time_grid: Vec<f64>,
    pub bg_paths: usize,
    pub x_grid: Vec<f64>,
}

fn parse_rational(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim())
        .map_err(|e| Error::Config(format!("cannot parse rational {s:?}: {e}")))
}

fn build_spec(sub: &SubordinatorSection) -> Result<LevySpec> {
    if let Some(p) = &sub.p {
        // custom: declared coefficients + named built-in density evaluator
        let alpha = parse_rational(
            sub.alpha
                .as_deref()
                .ok_or_else(|| Error::Config("custom subordinator needs alpha = \"p/q\"".into()))?,
        )?;
        let density_name = sub
            .density
            .as_deref()
            .ok_or_else(|| Error::Config("custom subordinator needs a named built-in density".into()))?;
        let dname = CatalogName::parse(density_name)?;
        let dalpha = match &sub.density_alpha {
            Some(s) => Some(parse_rational(s)?),
            None => sub.alpha.as_deref().map(parse_rational).transpose()?,
        };
        let donor = LevySpec::catalog(dname, dalpha, sub.density_c.or(sub.c))?;
        let p = p.clone();
        let spec = LevySpec::custom(alpha, p, move |t| donor.density(t), sub.irrational)?;
        return Ok(spec);
    }
    let name = CatalogName::parse(
        sub.catalog
            .as_deref()
            .ok_or_else(|| Error::Config("missing subordinator.catalog (or a custom block)".into()))?,
    )?;
    let alpha = sub.alpha.as_deref().map(parse_rational).transpose()?;
    let mut spec = LevySpec::catalog(name, alpha, sub.c)?;
    spec.set_treat_as_irrational(sub.irrational);
    Ok(spec)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let file: FileConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
    let sub = file
        .subordinator
        .as_ref()
        .ok_or_else(|| Error::Config("config has no [subordinator] section".into()))?;
    let spec = build_spec(sub)?;

    let run = file.run.unwrap_or_default();
    let quad = match &file.quadrature {
        Some(q) => QuadConfig {
            tol: q.tol.unwrap_or(1e-10),
            max_evals: q.max_evals.unwrap_or(200_000),
        },
        None => QuadConfig::default(),
    };
    let kappa = match (&cli.kappa, &run.kappa) {
        (Some(KappaArg::Direct), _) => Normalization::Direct,
        (Some(KappaArg::Paper), _) => Normalization::PaperExample,
        (None, Some(s)) => Normalization::parse(s)?,
        (None, None) => Normalization::Direct,
    };
    let formats = match (&cli.format, &run.formats) {
        (Some(s), _) => s.split(',').map(|x| x.trim().to_string()).collect(),
        (None, Some(v)) => v.clone(),
        (None, None) => vec!["json".into(), "csv".into(), "txt".into()],
    };
    for f in &formats {
        if !matches!(f.as_str(), "json" | "csv" | "txt") {
            return Err(Error::Config(format!("unknown format {f:?}; use json,csv,txt")));
        }
    }
    let n = run.n.unwrap_or(2);
    if n < 1 {
        return Err(Error::Config("dimension n must be >= 1".into()));
    }
    let truncation = run.truncation.unwrap_or(4);
    let seed = cli.seed.or(run.seed).unwrap_or(42);
    let threads = cli.threads.or(run.threads).unwrap_or(0);

    let sim_section = file.simulate.as_ref();
    let sim_paths = sim_section.and_then(|s| s.paths).unwrap_or(100_000);
    let sim = SimConfig {
        epsilon: sim_section.and_then(|s| s.epsilon).unwrap_or(1e-4),
        paths: sim_paths,
        horizon: sim_section.and_then(|s| s.horizon).unwrap_or(1.0),
        seed,
        time_grid: sim_section
            .and_then(|s| s.time_grid.clone())
            .unwrap_or_else(|| vec![0.5, 1.0]),
        extra_drift: 0.0,
        quad,
    };

    Ok(RunConfig {
        spec,
        n,
        truncation,
        kappa,
        out_dir: cli
            .out
            .clone()
            .or_else(|| run.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out")),
        formats,
        seed,
        threads,
        quad,
        watson_terms: file.expand.as_ref().and_then(|e| e.watson_terms),
        remainder_orders: file
            .expand
            .as_ref()
            .and_then(|e| e.remainder_orders.clone())
            .unwrap_or_else(|| vec![2]),
        lambda_grid: file
            .expand
            .as_ref()
            .and_then(|e| e.lambda_grid.clone())
            .unwrap_or_else(|| log_grid(1e2, 1e6, 9)),
        z_points: file
            .zeta
            .as_ref()
            .and_then(|z| z.z_points.clone())
            .unwrap_or_else(|| vec![0.0, -1.0, -2.0]),
        split_radius: file.zeta.as_ref().and_then(|z| z.split_radius).unwrap_or(2.0),
        verify_t_grid: file
            .verify
            .as_ref()
            .and_then(|v| v.t_grid.clone())
            .unwrap_or_else(|| log_grid(1e-3, 1e-1, 12)),
        sim,
        lambdas: sim_section
            .and_then(|s| s.lambdas.clone())
            .unwrap_or_else(|| vec![1.0, 5.0, 10.0]),
        betas: sim_section.and_then(|s| s.betas.clone()).unwrap_or_else(|| vec![3.0, 0.67]),
        bg_time_grid: sim_section
            .and_then(|s| s.bg_time_grid.clone())
            .unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3, 1e-4]),
        bg_paths: sim_section.and_then(|s| s.bg_paths).unwrap_or(10_000),
        x_grid: sim_section
            .and_then(|s| s.x_grid.clone())
            .unwrap_or_else(|| vec![0.1, 0.03, 0.01]),
    })
}

fn quad_provenance(quad: &QuadConfig) -> String {
    format!("quadrature({:.0e})", quad.tol)
}

fn mc_provenance(stats: &PathStats) -> String {
    format!("monte-carlo({},{})", stats.paths, stats.seed)
}

struct Emitter<'a> {
    cfg: &'a RunConfig,
    command: &'static str,
}

impl<'a> Emitter<'a> {
    fn new(cfg: &'a RunConfig, command: &'static str) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out_dir)?;
        Ok(Emitter { cfg, command })
    }

    fn wants(&self, fmt: &str) -> bool {
        self.cfg.formats.iter().any(|f| f == fmt)
    }

    fn path(&self, ext: &str) -> PathBuf {
        self.cfg.out_dir.join(format!("{}.{}", self.command, ext))
    }

    fn json(&self, body: Value) -> Result<()> {
        if !self.wants("json") {
            return Ok(());
        }
        let doc = json!({
            "command": self.command,
            "conventions": LOG_CONVENTION,
            "kappa": self.cfg.kappa.as_str(),
            "subordinator": spec_json(&self.cfg.spec),
            "results": body,
        });
        std::fs::write(self.path("json"), serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(())
    }

    fn txt(&self, body: &str) -> Result<()> {
        if !self.wants("txt") {
            return Ok(());
        }
        let mut head = String::new();
        let _ = writeln!(head, "# levyheat {}", self.command);
        let _ = writeln!(head, "# {}", LOG_CONVENTION);
        let _ = writeln!(head, "# kappa: {}", self.cfg.kappa.as_str());
        std::fs::write(self.path("txt"), format!("{head}\n{body}"))?;
        Ok(())
    }

    fn csv(&self, body: &str) -> Result<()> {
        if !self.wants("csv") {
            return Ok(());
        }
        std::fs::write(self.path("csv"), body)?;
        Ok(())
    }
}

fn spec_json(spec: &LevySpec) -> Value {
    let catalog = spec
        .catalog_id()
        .map(|id| {
            json!({
                "name": id.name.as_str(),
                "alpha_param": id.alpha_param.to_string(),
                "c": id.c,
            })
        })
        .unwrap_or(Value::Null);
    json!({
        "alpha": spec.alpha().to_string(),
        "treat_as_irrational": spec.treat_as_irrational(),
        "p": spec.p(),
        "catalog": catalog,
    })
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(format!("json serialization: {e}"))
    }
}

/// Entry point used by the binary.
pub fn run_from_args() -> i32 {
    let args: Vec<String> = std::env::args().collect();
    run_cli(&args)
}

/// Testable entry point; returns the process exit code.
pub fn run_cli<S: AsRef<str>>(args: &[S]) -> i32 {
    let cli = match Cli::try_parse_from(args.iter().map(|s| s.as_ref())) {
        Ok(c) => c,
        Err(e) => {
            // clap's rendered help/usage goes to stderr; config errors are 1
            eprint!("{e}");
            return 1;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("levyheat: {e}");
            if matches!(e, Error::Config(_)) {
                eprintln!("usage: levyheat <command> --config PATH [--out DIR] [--format json,csv,txt] [--kappa direct|paper] [--seed N] [--threads N]");
            }
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    if cfg.threads > 0 {
        // a failed build means a pool already exists, which is fine
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match cli.command {
        Command::Expand => cmd_expand(&cfg),
        Command::Parametrix => cmd_parametrix(&cfg),
        Command::HeatSymbol => cmd_heat_symbol(&cfg),
        Command::PowerSymbol => cmd_power_symbol(&cfg),
        Command::Zeta => cmd_zeta(&cfg),
        Command::HeatTrace => cmd_heat_trace(&cfg),
        Command::Verify => cmd_verify(&cfg),
        Command::Simulate => cmd_simulate(&cfg),
        Command::Report => cmd_report(&cfg),
    }
}

fn cmd_expand(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "expand")?;
    // default order adapts to the known expansion; an explicit request
    // beyond it stays an error
    let terms = cfg.watson_terms.unwrap_or_else(|| cfg.spec.p().len().min(4));
    let watson = cfg.spec.watson_expand(terms, &cfg.quad)?;
    let series = shifted_symbol(&cfg.spec, terms.saturating_sub(1).max(1), &cfg.quad)?;
    let mut checks = Vec::new();
    for &order in &cfg.remainder_orders {
        let chk = cfg.spec.check_expansion(order, &cfg.lambda_grid, &cfg.quad)?;
        checks.push(json!({
            "order": order,
            "max_scaled_remainder": chk.max_scaled_remainder,
            "slope": chk.slope,
            "expected_slope": chk.expected_slope,
            "slope_ok": chk.slope_ok(),
            "provenance": quad_provenance(&cfg.quad),
        }));
    }
    let mut txt = String::new();
    let _ = writeln!(txt, "Watson expansion of f (exponent, coefficient):");
    for t in &watson.terms {
        let _ = writeln!(txt, "  lambda^({:>6})  {:+.16e}", t.exponent.to_string(), t.coeff);
    }
    let _ = writeln!(txt, "\nshifted symbol series:\n  {series}");
    for c in &checks {
        let _ = writeln!(
            txt,
            "remainder order {}: slope {:.4} (expected {:.4}, ok={})",
            c["order"], c["slope"].as_f64().unwrap(), c["expected_slope"].as_f64().unwrap(), c["slope_ok"]
        );
    }
    em.txt(&txt)?;
    let mut csv = String::from("exponent,coefficient,provenance\n");
    for t in &watson.terms {
        let _ = writeln!(csv, "{},{},{}", t.exponent, t.coeff, quad_provenance(&cfg.quad));
    }
    em.csv(&csv)?;
    em.json(json!({
        "watson": {
            "provenance": quad_provenance(&cfg.quad),
            "terms": watson.terms.iter().map(|t| json!({
                "exponent": t.exponent.to_string(),
                "coeff": t.coeff,
            })).collect::<Vec<_>>(),
        },
        "symbol": { "provenance": "symbolic", "series": series.to_json() },
        "remainder_checks": checks,
    }))?;
    println!("expand: {} Watson terms, {} remainder checks", watson.terms.len(), cfg.remainder_orders.len());
    Ok(())
}

fn build_parametrix(cfg: &RunConfig) -> Result<Vec<crate::symbolic::PoleSeries<f64>>> {
    let series = shifted_symbol(&cfg.spec, (cfg.truncation as usize / 2).max(1), &cfg.quad)?;
    parametrix(&series, cfg.truncation)
}

fn cmd_parametrix(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "parametrix")?;
    let par = build_parametrix(cfg)?;
    let mut txt = String::new();
    for b in &par {
        let _ = writeln!(txt, "b[-2a-{}] = {}", b.k, b);
    }
    em.txt(&txt)?;
    em.json(json!({
        "provenance": "symbolic",
        "blocks": par.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
    }))?;
    let mut csv = String::from("k,r_exp,pole_order,coeff,provenance\n");
    for b in &par {
        for t in &b.terms {
            let _ = writeln!(csv, "{},{},{},{},symbolic", b.k, t.r_exp, t.pole_order, t.coeff);
        }
    }
    em.csv(&csv)?;
    println!("parametrix: {} blocks through order {}", par.len(), cfg.truncation);
    Ok(())
}

fn cmd_heat_symbol(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "heat-symbol")?;
    let heat = heat_symbol(&build_parametrix(cfg)?)?;
    em.txt(&heat.to_string())?;
    em.json(json!({ "provenance": "symbolic", "series": heat.to_json() }))?;
    let mut csv = String::from("k,t_pow,r_exp,coeff,provenance\n");
    for b in &heat.blocks {
        for t in &b.terms {
            let _ = writeln!(csv, "{},{},{},{},symbolic", b.k, t.t_pow, t.r_exp, t.coeff);
        }
    }
    em.csv(&csv)?;
    println!("heat-symbol: {} blocks", heat.blocks.len());
    Ok(())
}

fn cmd_power_symbol(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "power-symbol")?;
    let cps = complex_power_symbol(&build_parametrix(cfg)?)?;
    em.txt(&cps.to_string())?;
    em.json(json!({ "provenance": "symbolic", "series": cps.to_json() }))?;
    let mut csv = String::from("k,j,poly_z,provenance\n");
    for b in &cps.blocks {
        for (j, p) in &b.terms {
            let poly = p.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
            let _ = writeln!(csv, "{},{},{},symbolic", b.k, j, poly);
        }
    }
    em.csv(&csv)?;
    println!("power-symbol: {} blocks", cps.blocks.len());
    Ok(())
}

fn cmd_zeta(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "zeta")?;
    let cps = complex_power_symbol(&build_parametrix(cfg)?)?;
    let table = crate::spectral::zeta_poles(&cps, cfg.n, cfg.kappa)?;
    // the continuation tail needs Re(-2αz - K + n) < -1 at the most
    // negative requested z, usually deeper than the table truncation
    let z_min = cfg.z_points.iter().cloned().fold(0.0, f64::min);
    let two_alpha = 2.0 * cfg.spec.alpha_f64();
    let k_cont = ((two_alpha * (-z_min) + cfg.n as f64 + 2.0).ceil() as usize + 2)
        .max(cfg.truncation as usize)
        .min(2 * cfg.spec.expansion_order());
    let series_cont = shifted_symbol(&cfg.spec, k_cont / 2, &cfg.quad)?;
    let cps_cont = complex_power_symbol(&parametrix(&series_cont, k_cont as u32)?)?;
    let mut continued = Vec::new();
    let mut skipped = Vec::new();
    for &z in &cfg.z_points {
        // a requested point sitting on an actual pole has no value
        if let Some(pole) = table
            .entries
            .iter()
            .find(|e| !e.analytic && (rat_to_f64(e.z) - z).abs() < 1e-3)
        {
            skipped.push((z, pole.k, pole.z));
            continue;
        }
        let v = zeta_continue_kappa(
            &cfg.spec,
            &cps_cont,
            cfg.n,
            Complex64::new(z, 0.0),
            cfg.split_radius,
            cfg.kappa,
            &cfg.quad,
        )?;
        continued.push((z, v));
    }
    let mut txt = table.to_string();
    let _ = writeln!(txt, "\ncontinued values:");
    for (z, v) in &continued {
        let _ = writeln!(txt, "  zeta({z}) = {:.12e} {:+.3e} i", v.re, v.im);
    }
    for (z, k, zk) in &skipped {
        let _ = writeln!(txt, "  zeta({z}) skipped: pole z_{k} = {zk}");
    }
    em.txt(&txt)?;
    let mut csv = String::from("k,z,residue,analytic,provenance\n");
    for e in &table.entries {
        let _ = writeln!(csv, "{},{},{},{},symbolic", e.k, e.z, e.residue, e.analytic);
    }
    em.csv(&csv)?;
    em.json(json!({
        "poles": { "provenance": "symbolic", "table": table.to_json() },
        "continued": continued.iter().map(|(z, v)| json!({
            "z": z,
            "value": v.re,
            "imag": v.im,
            "provenance": quad_provenance(&cfg.quad),
        })).collect::<Vec<_>>(),
        "skipped": skipped.iter().map(|(z, k, zk)| json!({
            "z": z,
            "reason": format!("pole z_{k} = {zk}"),
        })).collect::<Vec<_>>(),
    }))?;
    println!("zeta: {} candidate poles, {} continued values", table.entries.len(), continued.len());
    Ok(())
}

fn cmd_heat_trace(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "heat-trace")?;
    let mbar = cfg.spec.mbar(&cfg.quad)?;
    let mut per_kappa = Vec::new();
    let mut txt = String::new();
    for norm in [Normalization::Direct, Normalization::PaperExample] {
        let assembled = assemble_heat_trace(&cfg.spec, cfg.n, cfg.truncation, norm, &cfg.quad)?;
        let shifted = apply_shift(assembled.expansion.clone(), mbar);
        let active = norm == cfg.kappa;
        let _ = writeln!(
            txt,
            "--- kappa = {}{} ---\n{}",
            norm.as_str(),
            if active { " (active)" } else { "" },
            shifted
        );
        per_kappa.push(json!({
            "kappa": norm.as_str(),
            "active": active,
            "provenance": "symbolic; zeta values " .to_string() + &quad_provenance(&cfg.quad),
            "pole_table": assembled.table.to_json(),
            "zeta_values": assembled.zeta_values.iter().map(|(l, v)| json!({
                "z": -(*l as i64),
                "value": v,
                "provenance": quad_provenance(&cfg.quad),
            })).collect::<Vec<_>>(),
            "expansion": shifted.to_json(),
        }));
    }
    let crosscheck = banuelos_crosscheck(
        cfg.n,
        cfg.spec.alpha_f64(),
        shifted_symbol(&cfg.spec, 1, &cfg.quad)?.coeffs()[0],
    )?;
    let _ = writeln!(txt, "bounded-domain comparison constant c_0(kappa=direct): {crosscheck:.12e}");
    em.txt(&txt)?;
    // CSV: the active-kappa expansion rows
    let assembled = assemble_heat_trace(&cfg.spec, cfg.n, cfg.truncation, cfg.kappa, &cfg.quad)?;
    let shifted = apply_shift(assembled.expansion, mbar);
    let mut csv = String::from("term,exponent,coefficient,source,provenance\n");
    for p in &shifted.power_terms {
        let src = match p.source {
            crate::spectral::TermSource::ZetaPole => "zeta-pole",
            crate::spectral::TermSource::GammaPole => "gamma-pole",
        };
        let _ = writeln!(csv, "power,{},{},{},symbolic", p.exponent, p.coeff, src);
    }
    for l in &shifted.log_terms {
        let _ = writeln!(csv, "log,{},{},double-pole,symbolic", l.l, -l.coeff);
    }
    em.csv(&csv)?;
    em.json(json!({
        "mbar": { "value": mbar, "provenance": quad_provenance(&cfg.quad) },
        "banuelos_c0_direct": { "value": crosscheck, "provenance": "symbolic" },
        "normalizations": per_kappa,
    }))?;
    println!(
        "heat-trace: n={} order={} log-terms({})={}",
        cfg.n,
        cfg.truncation,
        cfg.kappa.as_str(),
        shifted.log_terms.len()
    );
    Ok(())
}

fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "verify")?;
    let report = verify_expansion(&cfg.spec, cfg.n, cfg.truncation, cfg.kappa, &cfg.verify_t_grid, &cfg.quad)?;
    let mut txt = String::new();
    let _ = writeln!(
        txt,
        "max relative deviation {:.3e}; empirical remainder order {:.3}",
        report.max_rel_deviation, report.empirical_remainder_order
    );
    for r in &report.rows {
        let _ = writeln!(
            txt,
            "  t={:<12.6e} numeric={:<22.15e} symbolic={:<22.15e} rel={:.3e}",
            r.t, r.numeric, r.symbolic, r.rel_deviation
        );
    }
    em.txt(&txt)?;
    let mut csv = String::from("t,numeric,symbolic,rel_deviation,provenance\n");
    for r in &report.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.t, r.numeric, r.symbolic, r.rel_deviation, quad_provenance(&cfg.quad)
        );
    }
    em.csv(&csv)?;
    em.json(json!({
        "provenance": quad_provenance(&cfg.quad),
        "report": report.to_json(),
    }))?;
    println!(
        "verify: max rel deviation {:.3e} across {} t-points",
        report.max_rel_deviation,
        report.rows.len()
    );
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let em = Emitter::new(cfg, "simulate")?;
    let laplace = laplace_check(&cfg.spec, &cfg.sim, &cfg.lambdas)?;
    let mut bg_cfg = cfg.sim.clone();
    bg_cfg.paths = cfg.bg_paths;
    bg_cfg.time_grid = cfg.bg_time_grid.clone();
    bg_cfg.horizon = cfg.bg_time_grid.iter().cloned().fold(f64::MIN, f64::max);
    let bg = bg_index_check(&cfg.spec, &bg_cfg, &cfg.betas)?;
    let arcsine = arcsine_estimate(&cfg.spec, &cfg.sim, &cfg.x_grid)?;
    let consistency = consistency_check(&cfg.spec, &cfg.sim)?;

    let mut csv = String::from("functional,coord,t,estimate,stderr,target,pass\n");
    for stats in [&laplace, &bg, &arcsine, &consistency] {
        for line in stats.to_csv().lines().skip(1) {
            csv.push_str(line);
            csv.push('\n');
        }
    }
    em.csv(&csv)?;
    let mut txt = String::new();
    for (name, stats) in
        [("laplace", &laplace), ("bg-index", &bg), ("arcsine", &arcsine), ("consistency", &consistency)]
    {
        let _ = writeln!(txt, "{name}: pass={} ({} rows)", stats.all_pass(), stats.rows.len());
    }
    em.txt(&txt)?;
    em.json(json!({
        "laplace": { "provenance": mc_provenance(&laplace), "stats": laplace.to_json() },
        "bg_index": { "provenance": mc_provenance(&bg), "stats": bg.to_json() },
        "arcsine": { "provenance": mc_provenance(&arcsine), "stats": arcsine.to_json() },
        "consistency": { "provenance": mc_provenance(&consistency), "stats": consistency.to_json() },
    }))?;
    let all = laplace.all_pass() && bg.all_pass() && arcsine.all_pass() && consistency.all_pass();
    println!("simulate: all_pass={all}");
    if !all {
        return Err(Error::Validation("a Monte Carlo suite failed its tolerance".into()));
    }
    Ok(())
}

fn cmd_report(cfg: &RunConfig) -> Result<()> {
    cmd_expand(cfg)?;
    cmd_parametrix(cfg)?;
    cmd_heat_symbol(cfg)?;
    cmd_power_symbol(cfg)?;
    cmd_zeta(cfg)?;
    cmd_heat_trace(cfg)?;
    cmd_verify(cfg)?;
    cmd_simulate(cfg)?;
    // one combined document from the per-command artifacts
    let em = Emitter::new(cfg, "report")?;
    let mut combined = serde_json::Map::new();
    for name in ["expand", "parametrix", "heat-symbol", "power-symbol", "zeta", "heat-trace", "verify", "simulate"] {
        let p = cfg.out_dir.join(format!("{name}.json"));
        if p.exists() {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&p)?)?;
            combined.insert(name.to_string(), v);
        }
    }
    em.json(Value::Object(combined))?;
    // trace samples for plotting
    let mut csv = String::from("t,value,est_error,provenance\n");
    for &t in &cfg.verify_t_grid {
        let s = tr_heat_numeric(&cfg.spec, cfg.n, t, &cfg.quad)?;
        let _ = writeln!(csv, "{},{},{},{}", s.t, s.value, s.est_error, quad_provenance(&cfg.quad));
    }
    em.csv(&csv)?;
    em.txt("see report.json for the combined document\n")?;
    println!("report: combined document written");
    Ok(())
}
