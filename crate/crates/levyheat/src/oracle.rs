//! Independent numeric ground truth for the symbolic pipeline.
//!
//! The regularized heat trace of an x-independent symbol is the plain
//! radial integral `TR(e^(-tÃ)) = (2π)^(-n) Ω_n ∫ e^(-t σ̃(r)) r^(n-1) dr`;
//! this module evaluates it by adaptive double-exponential quadrature,
//! provides the exact closed form for the relativistic case in n = 2, and
//! extracts asymptotic coefficients from trace samples by weighted least
//! squares (optionally with `t^l log t` columns).

use crate::bernstein::LevySpec;
use crate::error::{Error, Result};
use crate::quad::{exp_sinh_tol, tanh_sinh_tol, QuadConfig};
use crate::spectral::{
    heat_trace_expansion, sphere_area, zeta_continue_kappa, zeta_poles, HeatTraceExpansion,
    Normalization,
};
use crate::symbolic::{complex_power_symbol, parametrix, shifted_symbol};
use crate::rat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::json;
use std::collections::BTreeMap;

/// One numeric trace evaluation.
#[derive(Clone, Copy, Debug)]
pub struct TraceSample {
    pub t: f64,
    pub value: f64,
    pub est_error: f64,
}

/// TR(e^(-tÃ)) = (2π)^(-n) Ω_n ∫ e^(-t σ̃(r)) r^(n-1) dr.  The radial
/// integral splits where t σ̃(r) = 50 (effective support) to avoid
/// spending nodes in the exponential tail.
pub fn tr_heat_numeric(spec: &LevySpec, n: u32, t: f64, quad: &QuadConfig) -> Result<TraceSample> {
    if !(t > 0.0) {
        return Err(Error::Config(format!("t must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::Config("dimension must be >= 1".into()));
    }
    let nf = n as f64;
    let cut = 50.0 / t;

    // σ̃ is increasing; find the split radius by doubling + bisection
    let sigma0 = spec.sigma_tilde(0.0, quad)?;
    if sigma0 <= 0.0 {
        return Err(Error::Validation(format!(
            "σ̃(0) = {sigma0:.3e} is not positive; the trace integral needs m̄ < 0"
        )));
    }
    let integrand = |r: f64| -> f64 {
        let s = spec.sigma_tilde(r, quad).unwrap_or(f64::NAN);
        (-t * s).exp() * r.powf(nf - 1.0)
    };

    let (near, far) = if sigma0 >= cut {
        // effective support starts at 0
        (
            None,
            exp_sinh_tol(integrand, 0.0, 1.0, quad.tol, f64::MIN_POSITIVE, quad.max_evals)?,
        )
    } else {
        let mut hi = 1.0f64;
        while spec.sigma_tilde(hi, quad)? < cut {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::Numeric("split radius search did not terminate".into()));
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if spec.sigma_tilde(mid, quad)? < cut {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let split = hi;
        let near = tanh_sinh_tol(integrand, 0.0, split, quad.tol, f64::MIN_POSITIVE, quad.max_evals)?;
        // the tail beyond the split is e^(-50)-suppressed; converge it
        // relative to the near part rather than to its own tiny value
        let far = exp_sinh_tol(
            integrand,
            split,
            split.max(1.0),
            quad.tol,
            quad.tol * near.value.abs(),
            quad.max_evals,
        )?;
        (Some(near), far)
    };

    let pref = (2.0 * std::f64::consts::PI).powi(-(n as i32)) * sphere_area(n);
    let (nv, ne) = near.map(|q| (q.value, q.est_error)).unwrap_or((0.0, 0.0));
    let value = pref * (nv + far.value);
    let est_error = pref * (ne + far.est_error);
    if !(value > 0.0) {
        return Err(Error::Numeric(format!("trace value {value} not positive at t = {t}")));
    }
    if est_error > 10.0 * quad.tol * value {
        return Err(Error::Numeric(format!(
            "trace quadrature error {est_error:.3e} above tolerance at t = {t}"
        )));
    }
    Ok(TraceSample { t, value, est_error })
}

/// Exact trace for the relativistic subordinator with α = 1/2 in n = 2:
/// (1/2π) e^(-t) (1+t) / t².
pub fn closed_form_n2_relativistic(t: f64) -> f64 {
    0.5 / std::f64::consts::PI * (-t).exp() * (1.0 + t) / (t * t)
}

/// One column of the fit model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasisTerm {
    /// t^e
    Power(f64),
    /// t^l log t (natural logarithm); the assembled expansion writes this
    /// summand as -c̃_l t^l log t, so the fitted raw coefficient is -c̃_l.
    LogPower(u32),
}

impl BasisTerm {
    fn eval(&self, t: f64) -> f64 {
        match self {
            BasisTerm::Power(e) => t.powf(*e),
            BasisTerm::LogPower(l) => t.powi(*l as i32) * t.ln(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub basis: Vec<BasisTerm>,
    pub coefficients: Vec<f64>,
    pub include_log: bool,
    pub residual_norm: f64,
    pub condition: f64,
}

impl FitResult {
    pub fn coefficient_of(&self, term: BasisTerm) -> Option<f64> {
        self.basis
            .iter()
            .position(|b| match (b, &term) {
                (BasisTerm::Power(a), BasisTerm::Power(c)) => (a - c).abs() < 1e-12,
                (BasisTerm::LogPower(a), BasisTerm::LogPower(c)) => a == c,
                _ => false,
            })
            .map(|i| self.coefficients[i])
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "include_log": self.include_log,
            "residual_norm": self.residual_norm,
            "condition": self.condition,
            "terms": self.basis.iter().zip(&self.coefficients).map(|(b, c)| match b {
                BasisTerm::Power(e) => json!({"basis": format!("t^{e}"), "coeff": c}),
                BasisTerm::LogPower(l) => json!({"basis": format!("t^{l}*log(t)"), "coeff": c}),
            }).collect::<Vec<_>>(),
        })
    }
}

const CONDITION_LIMIT: f64 = 1e10;

/// Weighted least squares of trace samples against
/// `Σ c_i t^(e_i) + Σ d_l t^l log t`.  Weights `t^(-e_min)` equalize the
/// magnitude of the leading column; the condition estimate is the
/// singular-value ratio of the weighted design matrix.
pub fn fit_asymptotics(
    samples: &[TraceSample],
    exponents: &[f64],
    include_log_at: &[u32],
) -> Result<FitResult> {
    let basis: Vec<BasisTerm> = exponents
        .iter()
        .map(|e| BasisTerm::Power(*e))
        .chain(include_log_at.iter().map(|l| BasisTerm::LogPower(*l)))
        .collect();
    if basis.is_empty() {
        return Err(Error::Config("fit model has no terms".into()));
    }
    if samples.len() < 2 * basis.len() {
        return Err(Error::Config(format!(
            "need at least {} samples for {} model terms, got {}",
            2 * basis.len(),
            basis.len(),
            samples.len()
        )));
    }
    let e_min = exponents.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);

    let rows = samples.len();
    let cols = basis.len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    for (i, s) in samples.iter().enumerate() {
        let w = s.t.powf(-e_min);
        for (j, term) in basis.iter().enumerate() {
            a[(i, j)] = w * term.eval(s.t);
        }
        b[i] = w * s.value;
    }
    // equilibrate columns so the condition estimate measures collinearity,
    // not the scale spread of the basis functions
    let mut col_norms = vec![0.0f64; cols];
    for (j, norm) in col_norms.iter_mut().enumerate() {
        *norm = a.column(j).norm();
        if *norm == 0.0 {
            return Err(Error::Numeric(format!("basis column {j} vanishes on the sample grid")));
        }
        for i in 0..rows {
            a[(i, j)] /= *norm;
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > CONDITION_LIMIT {
        return Err(Error::Numeric(format!(
            "ill-conditioned fit design (condition {condition:.3e}); shrink the model"
        )));
    }
    let x = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numeric(format!("SVD solve failed: {e}")))?;
    let residual = (&a * &x - &b).norm();
    let coefficients: Vec<f64> = x.iter().zip(&col_norms).map(|(c, n)| c / n).collect();
    Ok(FitResult {
        basis,
        coefficients,
        include_log: !include_log_at.is_empty(),
        residual_norm: residual,
        condition,
    })
}

/// Comparison of the assembled symbolic expansion against the numeric
/// trace over a t-grid.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub max_rel_deviation: f64,
    /// log-log slope of |numeric - partial sum| against t.
    pub empirical_remainder_order: f64,
    pub expansion: HeatTraceExpansion,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyRow {
    pub t: f64,
    pub numeric: f64,
    pub symbolic: f64,
    pub rel_deviation: f64,
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "max_rel_deviation": self.max_rel_deviation,
            "empirical_remainder_order": self.empirical_remainder_order,
            "rows": self.rows.iter().map(|r| json!({
                "t": r.t,
                "numeric": r.numeric,
                "symbolic": r.symbolic,
                "rel_deviation": r.rel_deviation,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Everything the pipeline produces for one (spec, n, order, κ) run.
pub struct AssembledExpansion {
    pub table: crate::spectral::ZetaPoleTable,
    /// Continued ζ(-l) values feeding the integer family.
    pub zeta_values: BTreeMap<u32, f64>,
    pub expansion: HeatTraceExpansion,
}

/// Build symbol -> parametrix -> complex powers -> pole table, continue ζ
/// at the required nonpositive integers and assemble the heat-trace
/// expansion.  The continuation uses a deeper tail subtraction than the
/// expansion itself (it needs Re(-2αz - K + n) < -1 at the most negative z).
pub fn assemble_heat_trace(
    spec: &LevySpec,
    n: u32,
    order: u32,
    normalization: Normalization,
    quad: &QuadConfig,
) -> Result<AssembledExpansion> {
    let mbar = spec.mbar(quad)?;
    if mbar >= -1e-8 {
        return Err(Error::Validation(format!(
            "shift constant m̄ = {mbar:.3e} is not strictly negative; the expansion is not defined"
        )));
    }
    let series = shifted_symbol(spec, (order as usize / 2).max(1), quad)?;
    let par = parametrix(&series, order)?;
    let cps = complex_power_symbol(&par)?;
    let table = zeta_poles(&cps, n, normalization)?;

    let two_alpha = 2.0 * spec.alpha_f64();
    let l_max = ((order as f64 - n as f64) / two_alpha).floor();
    let mut zeta_values = BTreeMap::new();
    if l_max >= 0.0 {
        let k_cont_needed = (two_alpha * l_max + n as f64 + 2.0).ceil() as usize + 2;
        let k_cont = k_cont_needed.max(order as usize).min(2 * spec.expansion_order());
        let series_cont = shifted_symbol(spec, k_cont / 2, quad)?;
        let cps_cont = complex_power_symbol(&parametrix(&series_cont, k_cont as u32)?)?;
        for l in 0..=(l_max as u32) {
            let z = rat(-(l as i64), 1);
            let pole_here = table
                .entries
                .iter()
                .any(|e| !e.analytic && e.z == z);
            if pole_here {
                continue; // log-term slot, no zeta value needed
            }
            let v = zeta_continue_kappa(
                spec,
                &cps_cont,
                n,
                Complex64::new(-(l as f64), 0.0),
                2.0,
                normalization,
                quad,
            )?;
            zeta_values.insert(l, v.re);
        }
    }
    let expansion = heat_trace_expansion(&table, &zeta_values, spec.treat_as_irrational())?;
    Ok(AssembledExpansion { table, zeta_values, expansion })
}

/// End-to-end check: build the expansion to order `order`, continue ζ at
/// the required integer points, and compare partial sums with
/// [`tr_heat_numeric`] on the grid.
pub fn verify_expansion(
    spec: &LevySpec,
    n: u32,
    order: u32,
    normalization: Normalization,
    t_grid: &[f64],
    quad: &QuadConfig,
) -> Result<VerifyReport> {
    let assembled = assemble_heat_trace(spec, n, order, normalization, quad)?;
    let expansion = assembled.expansion;

    let mut rows = Vec::with_capacity(t_grid.len());
    let mut max_rel: f64 = 0.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in t_grid {
        let numeric = tr_heat_numeric(spec, n, t, quad)?;
        let symbolic = expansion.eval(t);
        let rel = (numeric.value - symbolic).abs() / numeric.value.abs();
        max_rel = max_rel.max(rel);
        rows.push(VerifyRow { t, numeric: numeric.value, symbolic, rel_deviation: rel });
        let abs_dev = (numeric.value - symbolic).abs();
        if abs_dev > 0.0 {
            xs.push(t.ln());
            ys.push(abs_dev.ln());
        }
    }
    let slope = if xs.len() >= 2 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };

    Ok(VerifyReport {
        rows,
        max_rel_deviation: max_rel,
        empirical_remainder_order: slope,
        expansion,
    })
}
