//! Double-exponential (tanh-sinh / exp-sinh) quadrature.
//!
//! The tanh-sinh rule substitutes `x = tanh((pi/2) sinh u)` so that nodes
//! cluster double-exponentially at the endpoints; algebraic endpoint
//! singularities such as `t^(-a)` with `a < 1` need no special casing.
//! Semi-infinite integrals use the exp-sinh variant `x = a + s e^((pi/2) sinh u)`,
//! the double-exponential form of an exponential substitution.
//!
//! Refinement halves the step `h` per level; the error estimate is the
//! difference of the last two refinements.  Integrand values that are not
//! finite (endpoint overflow of a weighted-out singularity) are skipped.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Tolerance and evaluation budget for one integral.
#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    /// Target accuracy, applied both relative to the result and absolutely.
    pub tol: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { tol: 1e-10, max_evals: 200_000 }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig { tol, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    /// Difference of the last two refinement levels.
    pub est_error: f64,
    pub evals: usize,
}

/// Output values a rule can accumulate: real or complex integrands.
pub trait QuadValue: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, w: f64) -> Self;
    fn norm(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn norm(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, w: f64) -> Self {
        self * w
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

const U_MAX: f64 = 6.56;
const MAX_LEVEL: usize = 12;
const MIN_LEVEL: usize = 3;
const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Abscissa/weight data of one tanh-sinh node, split by endpoint so that
/// callers never lose the distance to the singular endpoint to rounding.
struct TsNode {
    /// Distance from the lower endpoint in units of the half-length, in (0, 1].
    offset_low: f64,
    /// Same from the upper endpoint.
    offset_high: f64,
    /// Weight density (pi/2) cosh(u) sech^2((pi/2) sinh u).
    weight: f64,
}

fn ts_node(u: f64) -> TsNode {
    let v = FRAC_PI_2 * u.sinh();
    let av = v.abs();
    // 1 -+ tanh(v) = 2 e^(-2|v|) / (1 + e^(-2|v|)) on the approached side
    let e = (-2.0 * av).exp();
    let near = 2.0 * e / (1.0 + e);
    let far = 2.0 / (1.0 + e);
    let sech = 2.0 * (-av).exp() / (1.0 + (-2.0 * av).exp());
    let weight = FRAC_PI_2 * u.cosh() * sech * sech;
    if u >= 0.0 {
        TsNode { offset_low: far, offset_high: near, weight }
    } else {
        TsNode { offset_low: near, offset_high: far, weight }
    }
}

/// Integrate `f` on the finite interval `(a, b)` with the tanh-sinh rule.
pub fn tanh_sinh<V, F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    tanh_sinh_tol(f, a, b, cfg.tol, cfg.tol, cfg.max_evals)
}

/// Same as [`tanh_sinh`] with separate relative and absolute targets.
pub fn tanh_sinh_tol<V, F>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Config(format!("tanh-sinh needs finite a < b, got [{a}, {b}]")));
    }
    let half = 0.5 * (b - a);
    let eval = |u: f64| -> V {
        let node = ts_node(u);
        if node.weight == 0.0 || node.offset_low == 0.0 || node.offset_high == 0.0 {
            return V::zero();
        }
        // pick the representation anchored at the nearer endpoint
        let x = if node.offset_low <= node.offset_high {
            a + half * node.offset_low
        } else {
            b - half * node.offset_high
        };
        let y = f(x);
        if y.is_finite_value() {
            y.scale(half * node.weight)
        } else {
            V::zero()
        }
    };
    refine(eval, rel_tol, abs_tol, max_evals)
}

/// Integrate `f` on `(a, +inf)` with the exp-sinh rule; `scale` sets the
/// distance from `a` at which nodes concentrate.
pub fn exp_sinh<V, F>(f: F, a: f64, scale: f64, cfg: &QuadConfig) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    exp_sinh_tol(f, a, scale, cfg.tol, cfg.tol, cfg.max_evals)
}

pub fn exp_sinh_tol<V, F>(
    f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<QuadResult<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V,
{
    if !a.is_finite() || !(scale > 0.0) {
        return Err(Error::Config(format!("exp-sinh needs finite a and scale > 0, got a={a}, scale={scale}")));
    }
    let eval = |u: f64| -> V {
        let v = FRAC_PI_2 * u.sinh();
        if v > 700.0 {
            return V::zero(); // x would overflow; rapid-decay integrand
        }
        let ev = v.exp();
        let x = a + scale * ev;
        if !x.is_finite() || x == a {
            return V::zero();
        }
        let y = f(x);
        if y.is_finite_value() {
            y.scale(scale * ev * FRAC_PI_2 * u.cosh())
        } else {
            V::zero()
        }
    };
    refine(eval, rel_tol, abs_tol, max_evals)
}

/// Level-doubling driver shared by both rules.
fn refine<V, G>(eval: G, rel_tol: f64, abs_tol: f64, max_evals: usize) -> Result<QuadResult<V>>
where
    V: QuadValue,
    G: Fn(f64) -> V,
{
    let mut evals = 0usize;
    let mut h = 1.0f64;

    let mut sum = eval(0.0);
    evals += 1;
    let mut j = 1;
    while (j as f64) * h <= U_MAX {
        let u = (j as f64) * h;
        sum = sum.add(eval(u)).add(eval(-u));
        evals += 2;
        j += 1;
    }
    let mut prev = sum.scale(h);
    let mut est_error = f64::INFINITY;

    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut new_sum = V::zero();
        let mut j = 1;
        while (j as f64) * h <= U_MAX {
            let u = (j as f64) * h;
            new_sum = new_sum.add(eval(u)).add(eval(-u));
            evals += 2;
            j += 2; // only odd multiples are new at this level
            if evals > max_evals {
                return Err(Error::Numeric(format!(
                    "quadrature budget exhausted ({evals} evals, est error {est_error:.3e})"
                )));
            }
        }
        sum = sum.add(new_sum);
        let value = sum.scale(h);
        est_error = value.add(prev.scale(-1.0)).norm();
        let target = abs_tol.max(rel_tol * value.norm());
        if level >= MIN_LEVEL && est_error <= target {
            return Ok(QuadResult { value, est_error, evals });
        }
        prev = value;
    }
    Err(Error::Numeric(format!(
        "quadrature tolerance not reached within budget (est error {est_error:.3e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT_PI: f64 = 1.7724538509055160272981674833411;

    #[test]
    fn endpoint_singularity() {
        let cfg = QuadConfig::default();
        let r = tanh_sinh(|t: f64| t.powf(-0.5), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        let r = tanh_sinh(|t: f64| t.ln(), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(r.value, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn strong_singularity() {
        let cfg = QuadConfig::default();
        // t^(-0.9) on (0,1): integral = 10
        let r = tanh_sinh(|t: f64| t.powf(-0.9), 0.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(r.value, 10.0, max_relative = 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let cfg = QuadConfig::default();
        let r = exp_sinh(|t: f64| (-t).exp(), 1.0, 1.0, &cfg).unwrap();
        assert_relative_eq!(r.value, (-1.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn split_gamma_half() {
        // int_0^inf e^-t t^(-1/2) dt = Gamma(1/2) = sqrt(pi)
        let cfg = QuadConfig::default();
        let g = |t: f64| (-t).exp() * t.powf(-0.5);
        let a = tanh_sinh(g, 0.0, 1.0, &cfg).unwrap().value;
        let b = exp_sinh(g, 1.0, 1.0, &cfg).unwrap().value;
        assert_relative_eq!(a + b, SQRT_PI, max_relative = 1e-12);
    }

    #[test]
    fn complex_integrand() {
        // int_0^1 t^i dt = 1/(1+i) = (1-i)/2
        let cfg = QuadConfig::default();
        let r = tanh_sinh(
            |t: f64| Complex64::new(0.0, t.ln()).exp(),
            0.0,
            1.0,
            &cfg,
        )
        .unwrap();
        assert_relative_eq!(r.value.re, 0.5, max_relative = 1e-10);
        assert_relative_eq!(r.value.im, -0.5, max_relative = 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let cfg = QuadConfig { tol: 1e-10, max_evals: 40 };
        let r = tanh_sinh(|t: f64| t.powf(-0.5), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn error_estimate_is_reported() {
        let cfg = QuadConfig::default();
        let r = tanh_sinh(|t: f64| t * t, 0.0, 2.0, &cfg).unwrap();
        assert_relative_eq!(r.value, 8.0 / 3.0, max_relative = 1e-12);
        assert!(r.est_error.is_finite());
        assert!(r.evals > 0);
    }

    #[test]
    fn large_decay_rate() {
        // int_0^inf e^(-lam t) dt = 1/lam with lam = 1e6, split at 1
        let cfg = QuadConfig::default();
        let lam = 1e6;
        let g = |t: f64| (-lam * t).exp();
        let a = tanh_sinh(g, 0.0, 1.0, &cfg).unwrap().value;
        let b = exp_sinh(g, 1.0, 1.0, &cfg).unwrap().value;
        assert_relative_eq!(a + b, 1.0 / lam, max_relative = 1e-10);
    }
}
