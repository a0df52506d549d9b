//! Monte Carlo verification of the probabilistic layer.
//!
//! The subordinator is simulated as a compound Poisson process: jumps of
//! size >= ε arrive at rate Λ(ε) = ∫_ε^∞ m(t) dt with sizes drawn by
//! inverse CDF from a precomputed table, and the removed small jumps are
//! replaced by the deterministic drift d(ε) = ∫_0^ε t m(t) dt per unit
//! time.  Subordinate Brownian motion uses the convention that one
//! coordinate of B over a clock increment ΔX is Gaussian with variance
//! 2ΔX (characteristic function e^(-t|ξ|²), not the probabilist's e^(-t|ξ|²/2)).
//!
//! Paths run on independent counter-based streams and every aggregation is
//! a fixed-order pairwise-tree reduction, so results depend only on the
//! seed and configuration, never on thread count.

pub mod rng;

use crate::bernstein::LevySpec;
use crate::error::{Error, Result};
use crate::quad::{exp_sinh, tanh_sinh, QuadConfig};
use rayon::prelude::*;
use rng::CounterRng;
use serde_json::json;
use std::fmt::Write as _;

/// Simulation settings.
#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Small-jump cutoff ε > 0.
    pub epsilon: f64,
    pub paths: usize,
    /// Simulation horizon for grid-driven functionals.
    pub horizon: f64,
    pub seed: u64,
    /// Observation times, each in (0, horizon].
    pub time_grid: Vec<f64>,
    /// Additional deterministic drift (artifact knob for degenerate tests).
    pub extra_drift: f64,
    pub quad: QuadConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            epsilon: 1e-4,
            paths: 10_000,
            horizon: 1.0,
            seed: 7,
            time_grid: vec![0.5, 1.0],
            extra_drift: 0.0,
            quad: QuadConfig::default(),
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config("epsilon must be positive".into()));
        }
        if self.paths < 1000 {
            return Err(Error::Config("need at least 1000 paths".into()));
        }
        if self.time_grid.iter().any(|t| *t <= 0.0 || *t > self.horizon) {
            return Err(Error::Config("time grid must lie in (0, horizon]".into()));
        }
        Ok(())
    }
}

/// Inverse-CDF jump sampler for the truncated Lévy density.
#[derive(Clone, Debug)]
pub struct JumpModel {
    /// Arrival rate Λ(ε) of jumps of size >= ε.
    pub rate: f64,
    /// Drift replacing the removed small jumps, plus any extra drift.
    pub drift: f64,
    /// Mean of X_1 in the approximation: drift + ∫_ε^∞ t m dt.
    pub mean_x1: f64,
    /// log-spaced knots on [ε, t_cut] and the cumulative integral of m.
    knots: Vec<f64>,
    cdf: Vec<f64>,
}

const TABLE_KNOTS: usize = 2048;

impl JumpModel {
    pub fn build(spec: &LevySpec, cfg: &SimConfig) -> Result<JumpModel> {
        cfg.validate()?;
        let eps = cfg.epsilon;
        let quad = &cfg.quad;

        let drift_small = tanh_sinh(|t| t * spec.density(t), 0.0, eps, quad)?.value;

        // split all density integrals at t = 1, the module-wide convention
        let split_integral = |g: &dyn Fn(f64) -> f64, lo: f64| -> Result<f64> {
            if lo < 1.0 {
                Ok(tanh_sinh(g, lo, 1.0, quad)?.value + exp_sinh(g, 1.0, 1.0, quad)?.value)
            } else {
                Ok(exp_sinh(g, lo, 1.0, quad)?.value)
            }
        };

        // truncation point: rapid decay makes the tail mass negligible
        let mut t_cut = (10.0 * eps).max(4.0);
        let total_guess = split_integral(&|t| spec.density(t), eps)?;
        if total_guess <= 0.0 {
            // degenerate: no jumps at all
            return Ok(JumpModel {
                rate: 0.0,
                drift: drift_small + cfg.extra_drift,
                mean_x1: drift_small + cfg.extra_drift,
                knots: vec![eps, 2.0 * eps],
                cdf: vec![0.0, 0.0],
            });
        }
        loop {
            let tail = exp_sinh(|t| spec.density(t), t_cut, 1.0, quad)?.value;
            if tail <= 1e-12 * total_guess || t_cut > 1e9 {
                break;
            }
            t_cut *= 2.0;
        }

        // cumulative integral on log-spaced knots (Gauss-Legendre per segment)
        const GL_X: [f64; 4] = [
            -0.8611363115940526,
            -0.3399810435848563,
            0.3399810435848563,
            0.8611363115940526,
        ];
        const GL_W: [f64; 4] =
            [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];
        let ratio = (t_cut / eps).powf(1.0 / (TABLE_KNOTS - 1) as f64);
        let mut knots = Vec::with_capacity(TABLE_KNOTS);
        let mut k = eps;
        for _ in 0..TABLE_KNOTS {
            knots.push(k);
            k *= ratio;
        }
        let mut cdf = Vec::with_capacity(TABLE_KNOTS);
        cdf.push(0.0);
        for i in 1..TABLE_KNOTS {
            let (a, b) = (knots[i - 1], knots[i]);
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let mut seg = 0.0;
            for (x, w) in GL_X.iter().zip(GL_W) {
                let v = spec.density(mid + half * x);
                if !v.is_finite() {
                    return Err(Error::Numeric(format!(
                        "density evaluation failed at t = {}",
                        mid + half * x
                    )));
                }
                seg += w * v;
            }
            cdf.push(cdf[i - 1] + half * seg);
        }
        let rate = cdf[TABLE_KNOTS - 1];

        let mean_jump_total = split_integral(&|t| t * spec.density(t), eps)?;

        Ok(JumpModel {
            rate,
            drift: drift_small + cfg.extra_drift,
            mean_x1: drift_small + cfg.extra_drift + mean_jump_total,
            knots,
            cdf,
        })
    }

    /// Inverse-CDF draw of a jump size.
    #[inline]
    pub fn sample_jump(&self, rng: &mut CounterRng) -> f64 {
        let target = rng.uniform() * self.rate;
        let idx = match self.cdf.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
            Ok(i) => i.max(1),
            Err(i) => i.clamp(1, self.cdf.len() - 1),
        };
        let (g0, g1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (k0, k1) = (self.knots[idx - 1], self.knots[idx]);
        let frac = if g1 > g0 { (target - g0) / (g1 - g0) } else { 0.5 };
        k0 * (k1 / k0).powf(frac)
    }
}

/// One statistics row of a Monte Carlo suite.
#[derive(Clone, Debug)]
pub struct StatRow {
    pub functional: String,
    /// λ, β or x depending on the suite.
    pub coord: f64,
    pub t: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub target: Option<f64>,
    pub pass: Option<bool>,
}

/// Per-suite results with stream bookkeeping.
#[derive(Clone, Debug)]
pub struct PathStats {
    pub rows: Vec<StatRow>,
    pub seed: u64,
    pub paths: usize,
    pub epsilon: f64,
}

impl PathStats {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass.unwrap_or(true))
    }

    /// CSV with the canonical column set, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("functional,coord,t,estimate,stderr,target,pass\n");
        for r in &self.rows {
            let target = r.target.map(|v| format!("{v}")).unwrap_or_default();
            let pass = r.pass.map(|v| format!("{v}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.functional, r.coord, r.t, r.estimate, r.stderr, target, pass
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "paths": self.paths,
            "epsilon": self.epsilon,
            "all_pass": self.all_pass(),
            "rows": self.rows.iter().map(|r| json!({
                "functional": r.functional,
                "coord": r.coord,
                "t": r.t,
                "estimate": r.estimate,
                "stderr": r.stderr,
                "target": r.target,
                "pass": r.pass,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Deterministic pairwise-tree sum: independent of thread count and, being
/// a fixed reduction order, reproducible bit-for-bit.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let mid = n / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = tree_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = tree_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Simulate subordinator paths, returning X_t at the grid times
/// (cfg.time_grid order), one row per path.  Paths are nondecreasing by
/// construction; a debug assertion guards it.
pub fn simulate_subordinator(spec: &LevySpec, cfg: &SimConfig) -> Result<Vec<Vec<f64>>> {
    let model = JumpModel::build(spec, cfg)?;
    let mut grid: Vec<(usize, f64)> = cfg.time_grid.iter().cloned().enumerate().collect();
    grid.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    let paths: Vec<Vec<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = CounterRng::for_stream(cfg.seed, p as u64);
            let mut out = vec![0.0; grid.len()];
            let mut time = 0.0;
            let mut x = 0.0;
            let mut gi = 0;
            loop {
                let next = if model.rate > 0.0 {
                    time + rng.exponential(model.rate)
                } else {
                    f64::INFINITY
                };
                while gi < grid.len() && grid[gi].1 <= next.min(cfg.horizon) {
                    out[grid[gi].0] = x + model.drift * (grid[gi].1 - time);
                    gi += 1;
                }
                if next > cfg.horizon || gi >= grid.len() {
                    break;
                }
                x += model.drift * (next - time) + model.sample_jump(&mut rng);
                time = next;
            }
            debug_assert!(out.windows(2).all(|w| w[1] >= w[0] || w[1] == 0.0));
            out
        })
        .collect();
    Ok(paths)
}

/// Compare Ê[e^(-λ X_t)] with e^(-t f(λ)) for every (λ, t) cell; a cell
/// passes when the estimate is within 4 standard errors of the target.
pub fn laplace_check(spec: &LevySpec, cfg: &SimConfig, lambdas: &[f64]) -> Result<PathStats> {
    let paths = simulate_subordinator(spec, cfg)?;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.time_grid.iter().enumerate() {
        for &lam in lambdas {
            let vals: Vec<f64> = paths.iter().map(|p| (-lam * p[ti]).exp()).collect();
            let (mean, stderr) = mean_stderr(&vals);
            let f = match spec.f_closed_form(lam) {
                Some(v) => v,
                None => spec.eval_f(lam, &cfg.quad)?,
            };
            let target = (-t * f).exp();
            let pass = if lam == 0.0 {
                mean == 1.0 && stderr == 0.0
            } else {
                (mean - target).abs() <= 4.0 * stderr
            };
            rows.push(StatRow {
                functional: "laplace".into(),
                coord: lam,
                t,
                estimate: mean,
                stderr,
                target: Some(target),
                pass: Some(pass),
            });
        }
    }
    Ok(PathStats { rows, seed: cfg.seed, paths: cfg.paths, epsilon: cfg.epsilon })
}

/// Small-jump bias of the compound-Poisson approximation as ε varies.
/// The model-implied mean exp(-t f_ε(λ)) with
/// f_ε(λ) = λ d(ε) + ∫_ε^∞ (1-e^(-λs)) m(s) ds is computed by quadrature
/// (its bias against e^(-t f(λ)) decreases monotonically in ε), and each
/// Monte Carlo run is cross-checked against its own model within 4σ.
pub fn epsilon_bias_trend(
    spec: &LevySpec,
    cfg: &SimConfig,
    lambda: f64,
    t: f64,
    epsilons: &[f64],
) -> Result<PathStats> {
    let f_true = match spec.f_closed_form(lambda) {
        Some(v) => v,
        None => spec.eval_f(lambda, &cfg.quad)?,
    };
    let target = (-t * f_true).exp();
    let mut rows = Vec::new();
    for &eps in epsilons {
        let mut c = cfg.clone();
        c.epsilon = eps;
        c.time_grid = vec![t];
        c.horizon = t;
        let model = JumpModel::build(spec, &c)?;
        // f_ε(λ) by quadrature on [ε,1] and [1,∞)
        let g = |s: f64| (-(lambda * s)).exp_m1().neg() * spec.density(s);
        let hi = 1.0f64.max(2.0 * eps);
        let int_a = tanh_sinh(g, eps, hi, &cfg.quad)?.value;
        let int_b = exp_sinh(g, hi, 1.0, &cfg.quad)?.value;
        let f_model = lambda * model.drift + int_a + int_b;
        let model_mean = (-t * f_model).exp();

        let sim = simulate_subordinator(spec, &c)?;
        let vals: Vec<f64> = sim.iter().map(|p| (-lambda * p[0]).exp()).collect();
        let (mean, stderr) = mean_stderr(&vals);
        let pass = (mean - model_mean).abs() <= 4.0 * stderr;
        rows.push(StatRow {
            functional: "epsilon-bias".into(),
            coord: eps,
            t,
            estimate: (model_mean - target).abs(),
            stderr,
            target: Some((mean - model_mean).abs()),
            pass: Some(pass),
        });
    }
    // bias must decrease as ε shrinks (rows follow the given ε order)
    Ok(PathStats { rows, seed: cfg.seed, paths: cfg.paths, epsilon: cfg.epsilon })
}

/// Medians over paths of t^(-1/β) sup_(s<=t) |B_(X_s)| across the time
/// grid, one row per (β, t).  For β above the order 2α the medians must
/// decrease as t -> 0, below it they must increase.
pub fn bg_index_check(spec: &LevySpec, cfg: &SimConfig, betas: &[f64]) -> Result<PathStats> {
    let model = JumpModel::build(spec, cfg)?;
    let mut grid = cfg.time_grid.clone();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let horizon = *grid.last().unwrap();

    // per path: sup |B_(X_s)| for s up to each grid time
    let sups: Vec<Vec<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = CounterRng::for_stream(cfg.seed, p as u64);
            let mut out = vec![0.0; grid.len()];
            let mut time = 0.0;
            let mut b = 0.0f64;
            let mut sup = 0.0f64;
            let mut gi = 0;
            loop {
                let next = if model.rate > 0.0 {
                    time + rng.exponential(model.rate)
                } else {
                    f64::INFINITY
                };
                while gi < grid.len() && grid[gi] <= next.min(horizon) {
                    let dc = model.drift * (grid[gi] - time);
                    if dc > 0.0 {
                        b += rng.normal() * (2.0 * dc).sqrt();
                        sup = sup.max(b.abs());
                    }
                    time = grid[gi];
                    out[gi] = sup;
                    gi += 1;
                }
                if next > horizon || gi >= grid.len() {
                    break;
                }
                let dc = model.drift * (next - time);
                if dc > 0.0 {
                    b += rng.normal() * (2.0 * dc).sqrt();
                    sup = sup.max(b.abs());
                }
                let j = model.sample_jump(&mut rng);
                b += rng.normal() * (2.0 * j).sqrt();
                sup = sup.max(b.abs());
                time = next;
            }
            out
        })
        .collect();

    let two_alpha = 2.0 * spec.alpha_f64();
    let mut rows = Vec::new();
    // median of sup at each grid time, then scale per β
    let med_sup: Vec<f64> = (0..grid.len())
        .map(|gi| {
            let mut v: Vec<f64> = sups.iter().map(|s| s[gi]).collect();
            median(&mut v)
        })
        .collect();
    for &beta in betas {
        let stats: Vec<f64> = grid
            .iter()
            .zip(&med_sup)
            .map(|(t, m)| t.powf(-1.0 / beta) * m)
            .collect();
        // trend along descending t
        let descending: Vec<f64> = stats.iter().rev().cloned().collect();
        let monotone_down = descending.windows(2).all(|w| w[1] < w[0]);
        let monotone_up = descending.windows(2).all(|w| w[1] > w[0]);
        let pass = if beta > two_alpha {
            Some(monotone_down)
        } else if beta < two_alpha {
            Some(monotone_up)
        } else {
            None // critical index: no assertion
        };
        for (i, (&t, &s)) in grid.iter().zip(&stats).enumerate() {
            rows.push(StatRow {
                functional: "bg-index".into(),
                coord: beta,
                t,
                estimate: s,
                stderr: 0.0,
                target: None,
                pass: if i == 0 { pass } else { None },
            });
        }
    }
    Ok(PathStats { rows, seed: cfg.seed, paths: cfg.paths, epsilon: cfg.epsilon })
}

/// Estimates of (1/x) E[X_(T(x)-)] for each threshold x, with a linear
/// extrapolation to x = 0 that estimates the order α.  Event-driven, so
/// the pre-passage value is exact for the compound-Poisson approximation.
pub fn arcsine_estimate(spec: &LevySpec, cfg: &SimConfig, x_grid: &[f64]) -> Result<PathStats> {
    let model = JumpModel::build(spec, cfg)?;
    if model.rate == 0.0 && model.drift <= 0.0 {
        return Err(Error::Config("process never passes any level: zero rate and drift".into()));
    }
    let mut thresholds: Vec<f64> = x_grid.to_vec();
    thresholds.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let pre: Vec<Vec<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = CounterRng::for_stream(cfg.seed, p as u64);
            let mut out = vec![0.0; thresholds.len()];
            let mut x = 0.0f64;
            let mut xi = 0;
            let mut iterations = 0u64;
            while xi < thresholds.len() {
                iterations += 1;
                if iterations > 100_000_000 {
                    break; // guarded elsewhere; keeps degenerate configs finite
                }
                let w = if model.rate > 0.0 { rng.exponential(model.rate) } else { f64::INFINITY };
                // continuous crossings during the drift stretch
                let x_end = x + model.drift * w.min(1e18);
                while xi < thresholds.len() && x_end > thresholds[xi] {
                    out[xi] = thresholds[xi]; // X_(T-) = x at a continuous crossing
                    xi += 1;
                }
                if xi >= thresholds.len() || model.rate == 0.0 {
                    break;
                }
                x = x_end;
                let j = model.sample_jump(&mut rng);
                while xi < thresholds.len() && x + j > thresholds[xi] {
                    out[xi] = x; // pre-jump value
                    xi += 1;
                }
                x += j;
            }
            out
        })
        .collect();

    let alpha = spec.alpha_f64();
    let mut rows = Vec::new();
    let mut ratios = Vec::new();
    for (i, &x) in thresholds.iter().enumerate() {
        let vals: Vec<f64> = pre.iter().map(|p| p[i] / x).collect();
        let (mean, stderr) = mean_stderr(&vals);
        ratios.push((x, mean, stderr));
        rows.push(StatRow {
            functional: "arcsine".into(),
            coord: x,
            t: 0.0,
            estimate: mean,
            stderr,
            target: Some(alpha),
            pass: None,
        });
    }
    // weighted linear extrapolation ratio(x) ~ a + b x to x = 0
    let (mut sw, mut swx, mut swy, mut swxx, mut swxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, se) in &ratios {
        let w = 1.0 / (se * se).max(1e-12);
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    let denom = sw * swxx - swx * swx;
    let intercept = if denom.abs() > 0.0 { (swxx * swy - swx * swxy) / denom } else { swy / sw };
    rows.push(StatRow {
        functional: "arcsine-extrapolated".into(),
        coord: 0.0,
        t: 0.0,
        estimate: intercept,
        stderr: 0.0,
        target: Some(alpha),
        pass: Some((intercept - alpha).abs() <= 0.05),
    });
    Ok(PathStats { rows, seed: cfg.seed, paths: cfg.paths, epsilon: cfg.epsilon })
}

/// Compensator and clock-variance consistency of the simulator itself:
/// mean X_t/t must match E X_1 of the approximation, and the variance of
/// one Brownian coordinate at clock X_t must match 2 E[X_t], both to 4σ.
pub fn consistency_check(spec: &LevySpec, cfg: &SimConfig) -> Result<PathStats> {
    let model = JumpModel::build(spec, cfg)?;
    let paths = simulate_subordinator(spec, cfg)?;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.time_grid.iter().enumerate() {
        let vals: Vec<f64> = paths.iter().map(|p| p[ti] / t).collect();
        let (mean, stderr) = mean_stderr(&vals);
        rows.push(StatRow {
            functional: "compensator".into(),
            coord: 0.0,
            t,
            estimate: mean,
            stderr,
            target: Some(model.mean_x1),
            pass: Some((mean - model.mean_x1).abs() <= 4.0 * stderr),
        });
    }
    // Gaussian bridge: Var(one coordinate of B_(X_t)) = 2 E[X_t]
    let ti = cfg.time_grid.len() - 1;
    let t = cfg.time_grid[ti];
    let b_vals: Vec<f64> = paths
        .par_iter()
        .enumerate()
        .map(|(p, row)| {
            let mut rng = CounterRng::for_stream(cfg.seed ^ 0x5eed, p as u64);
            rng.normal() * (2.0 * row[ti]).sqrt()
        })
        .collect();
    let sq: Vec<f64> = b_vals.iter().map(|b| b * b).collect();
    let (var_est, var_se) = mean_stderr(&sq);
    let x_mean = tree_sum(&paths.iter().map(|p| p[ti]).collect::<Vec<_>>()) / cfg.paths as f64;
    rows.push(StatRow {
        functional: "bridge-variance".into(),
        coord: 0.0,
        t,
        estimate: var_est,
        stderr: var_se,
        target: Some(2.0 * x_mean),
        pass: Some((var_est - 2.0 * x_mean).abs() <= 4.0 * var_se),
    });
    Ok(PathStats { rows, seed: cfg.seed, paths: cfg.paths, epsilon: cfg.epsilon })
}

trait NegExt {
    fn neg(self) -> f64;
}

impl NegExt for f64 {
    fn neg(self) -> f64 {
        -self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::CatalogName;
    use crate::rat;
    use approx::assert_relative_eq;

    fn relativistic() -> LevySpec {
        LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None).unwrap()
    }

    fn small_cfg() -> SimConfig {
        SimConfig { paths: 20_000, epsilon: 1e-3, seed: 42, ..Default::default() }
    }

    #[test]
    fn jump_model_rate_and_drift() {
        let spec = relativistic();
        let cfg = small_cfg();
        let model = JumpModel::build(&spec, &cfg).unwrap();
        // Λ(ε) = ∫_ε^∞ m dt, d(ε) = ∫_0^ε t m dt against direct quadrature
        let q = QuadConfig::default();
        let lam_ref = tanh_sinh(|t| spec.density(t), cfg.epsilon, 1.0, &q).unwrap().value
            + exp_sinh(|t| spec.density(t), 1.0, 1.0, &q).unwrap().value;
        assert_relative_eq!(model.rate, lam_ref, max_relative = 1e-8);
        let d_ref = tanh_sinh(|t| t * spec.density(t), 0.0, cfg.epsilon, &q).unwrap().value;
        assert_relative_eq!(model.drift, d_ref, max_relative = 1e-10);
        // ε = 1e-3 relativistic: Λ ~ (1/(2 sqrt(pi))) 2/sqrt(ε) ~ 17
        assert!(model.rate > 10.0 && model.rate < 25.0, "rate {}", model.rate);
    }

    #[test]
    fn jump_sampler_matches_tail_probabilities() {
        let spec = relativistic();
        let cfg = small_cfg();
        let model = JumpModel::build(&spec, &cfg).unwrap();
        let mut rng = CounterRng::for_stream(9, 0);
        let n = 100_000;
        let mut over = 0usize;
        for _ in 0..n {
            if model.sample_jump(&mut rng) > 0.1 {
                over += 1;
            }
        }
        let q = QuadConfig::default();
        let p_ref = (tanh_sinh(|t| spec.density(t), 0.1, 1.0, &q).unwrap().value
            + exp_sinh(|t| spec.density(t), 1.0, 1.0, &q).unwrap().value)
            / model.rate;
        let se = (p_ref * (1.0 - p_ref) / n as f64).sqrt();
        assert!(((over as f64 / n as f64) - p_ref).abs() < 5.0 * se);
    }

    #[test]
    fn paths_nondecreasing_and_reproducible() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.paths = 2000;
        cfg.time_grid = vec![0.25, 0.5, 1.0];
        let a = simulate_subordinator(&spec, &cfg).unwrap();
        let b = simulate_subordinator(&spec, &cfg).unwrap();
        assert_eq!(a.len(), 2000);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra, rb); // bit-identical
            assert!(ra.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn degenerate_zero_density() {
        let spec = LevySpec::degenerate_zero();
        let cfg = small_cfg();
        let paths = simulate_subordinator(&spec, &cfg).unwrap();
        assert!(paths.iter().all(|p| p.iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn laplace_identity_small_run() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.time_grid = vec![1.0];
        let stats = laplace_check(&spec, &cfg, &[0.0, 1.0]).unwrap();
        // λ = 0: exactly one, zero variance
        let zero = &stats.rows[0];
        assert_eq!(zero.estimate, 1.0);
        assert_eq!(zero.stderr, 0.0);
        assert_eq!(zero.pass, Some(true));
        // λ = 1: within 4σ of e^(-(sqrt(2)-1))
        let one = &stats.rows[1];
        assert_relative_eq!(one.target.unwrap(), (-(2f64.sqrt() - 1.0)).exp(), max_relative = 1e-12);
        assert_eq!(one.pass, Some(true));
    }

    #[test]
    fn epsilon_bias_decreases() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.paths = 20_000;
        let stats = epsilon_bias_trend(&spec, &cfg, 10.0, 1.0, &[1e-2, 1e-3, 1e-4]).unwrap();
        let biases: Vec<f64> = stats.rows.iter().map(|r| r.estimate).collect();
        assert!(biases[0] > biases[1] && biases[1] > biases[2], "biases {biases:?}");
        assert!(stats.all_pass(), "MC inconsistent with its own model");
    }

    #[test]
    fn bg_trend_small_run() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.paths = 4000;
        cfg.epsilon = 1e-4;
        cfg.time_grid = vec![1e-1, 1e-2, 1e-3, 1e-4];
        cfg.horizon = 1e-1;
        let stats = bg_index_check(&spec, &cfg, &[3.0, 0.67]).unwrap();
        assert!(stats.all_pass(), "{:?}", stats.rows);
    }

    #[test]
    fn arcsine_pure_drift_is_exact() {
        let spec = LevySpec::degenerate_zero();
        let mut cfg = small_cfg();
        cfg.extra_drift = 1.0;
        let stats = arcsine_estimate(&spec, &cfg, &[0.1, 0.03, 0.01]).unwrap();
        for row in stats.rows.iter().filter(|r| r.functional == "arcsine") {
            assert_eq!(row.estimate, 1.0); // X_(T(x)-) = x exactly
            assert_eq!(row.stderr, 0.0);
        }
    }

    #[test]
    fn arcsine_truncated_stable_ratio_in_unit_interval() {
        // p_0-only stable-like density truncated at t = 1
        let p0 = 0.3;
        let spec = LevySpec::custom(
            rat(1, 2),
            vec![p0],
            move |t| if t <= 1.0 { p0 * t.powf(-1.5) } else { 0.0 },
            false,
        )
        .unwrap();
        let mut cfg = small_cfg();
        cfg.paths = 5000;
        let stats = arcsine_estimate(&spec, &cfg, &[0.05]).unwrap();
        let row = &stats.rows[0];
        assert!(row.estimate > 0.0 && row.estimate < 1.0);
    }

    #[test]
    fn arcsine_relativistic_converges_to_alpha() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.paths = 30_000;
        cfg.epsilon = 1e-4;
        let stats = arcsine_estimate(&spec, &cfg, &[0.1, 0.03, 0.01]).unwrap();
        let extrap = stats.rows.last().unwrap();
        assert!(
            (extrap.estimate - 0.5).abs() <= 0.05,
            "extrapolated {} vs alpha 0.5",
            extrap.estimate
        );
    }

    #[test]
    fn simulator_consistency() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.time_grid = vec![0.5, 1.0];
        let stats = consistency_check(&spec, &cfg).unwrap();
        assert!(stats.all_pass(), "{:?}", stats.rows);
        // E X_1 = f'(0) = 1/2 for the relativistic spec
        let comp = &stats.rows[0];
        assert_relative_eq!(comp.target.unwrap(), 0.5, max_relative = 1e-3);
    }

    #[test]
    fn csv_deterministic() {
        let spec = relativistic();
        let mut cfg = small_cfg();
        cfg.paths = 2000;
        let a = laplace_check(&spec, &cfg, &[1.0, 5.0]).unwrap().to_csv();
        let b = laplace_check(&spec, &cfg, &[1.0, 5.0]).unwrap().to_csv();
        assert_eq!(a.as_bytes(), b.as_bytes());
        assert!(a.starts_with("functional,coord,t,estimate,stderr,target,pass\n"));
    }
}
