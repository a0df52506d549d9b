//! Exact series algebra for the shifted generator symbol.
//!
//! The shifted symbol expands into homogeneous components
//! `σ̃(ξ) ~ Σ_j α_j |ξ|^(2α-2j)` with `α_j = -Γ(-α+j) p_j`.  The resolvent
//! parametrix, the heat-operator symbol and the complex-power symbol are
//! all finite combinations of elementary terms
//!
//! ```text
//!     c · r^q · (λ - α_0 r^(2α))^(-m)
//! ```
//!
//! closed under the product rule `r^q (λ-a)^(-m) · r^q' (λ-a)^(-m') =
//! r^(q+q') (λ-a)^(-m-m')`.  Exponents and pole orders are exact
//! rationals/integers; coefficients are generic over [`Coeff`] so the
//! relativistic regression suite can run in exact rational arithmetic
//! while production paths use f64.
//!
//! Indexing convention: parametrix/heat/power blocks use unit steps in the
//! homogeneity degree (`-2α-k`, k = 0, 1, 2, ...) and every odd-k block is
//! identically zero, because the symbol expansion itself only carries
//! even steps `2α-2j`.

use crate::bernstein::{rat_to_f64, LevySpec};
use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::special::gamma;
use crate::{rat, Rat};
use num_complex::Complex64;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar coefficients of the series algebra.
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// Whether the value is negligible against `scale` (exact zero for
    /// rational coefficients).
    fn approx_zero(&self, scale: f64) -> bool;
    fn to_f64(&self) -> f64;
    /// Human-readable rendering ("1/2" for rationals).
    fn render(&self) -> String;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn approx_zero(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale.max(1.0)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

impl Coeff for Rat {
    fn zero() -> Self {
        rat(0, 1)
    }
    fn one() -> Self {
        rat(1, 1)
    }
    fn from_int(n: i64) -> Self {
        rat(n, 1)
    }
    fn is_zero(&self) -> bool {
        *self.numer() == 0
    }
    fn approx_zero(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn to_f64(&self) -> f64 {
        rat_to_f64(*self)
    }
    fn render(&self) -> String {
        format!("{self}")
    }
}

/// Homogeneous expansion of the shifted generator symbol.
#[derive(Clone, Debug)]
pub struct SymbolSeries<C: Coeff> {
    alpha: Rat,
    /// α_j, the coefficient of r^(2α-2j).
    coeffs: Vec<C>,
    /// -m̄, the constant added to the generator.
    shift: f64,
}

impl<C: Coeff> SymbolSeries<C> {
    pub fn from_parts(alpha: Rat, coeffs: Vec<C>, shift: f64) -> Result<Self> {
        if coeffs.is_empty() || coeffs[0].to_f64() <= 0.0 {
            return Err(Error::Validation("symbol series needs α_0 > 0".into()));
        }
        Ok(SymbolSeries { alpha, coeffs, shift })
    }

    pub fn alpha(&self) -> Rat {
        self.alpha
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Homogeneity degree 2α - 2j of the j-th term.
    pub fn degree(&self, j: usize) -> Rat {
        rat(2, 1) * self.alpha - rat(2 * j as i64, 1)
    }

    /// Partial sum Σ α_j r^(2α-2j) at radius r (meaningful for r >= 1).
    pub fn eval_truncated(&self, r: f64) -> f64 {
        let a2 = 2.0 * rat_to_f64(self.alpha);
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.to_f64() * r.powf(a2 - 2.0 * j as f64))
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha.to_string(),
            "shift": self.shift,
            "terms": self.coeffs.iter().enumerate().map(|(j, c)| json!({
                "k": j,
                "degree": self.degree(j).to_string(),
                "coeff": c.to_f64(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<C: Coeff> fmt::Display for SymbolSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}) r^({})", c.render(), self.degree(j))?;
        }
        Ok(())
    }
}

/// Build the shifted-symbol expansion α_j = -Γ(-α+j) p_j, j = 0..=K,
/// with shift -m̄.
pub fn shifted_symbol(spec: &LevySpec, order: usize, quad: &QuadConfig) -> Result<SymbolSeries<f64>> {
    if order >= spec.p().len() {
        return Err(Error::Config(format!(
            "symbol order {order} exceeds known expansion order {}",
            spec.expansion_order()
        )));
    }
    let a = spec.alpha_f64();
    let mut coeffs = Vec::with_capacity(order + 1);
    for (j, &pj) in spec.p().iter().take(order + 1).enumerate() {
        coeffs.push(-gamma(j as f64 - a)? * pj);
    }
    let shift = -spec.mbar(quad)?;
    SymbolSeries::from_parts(spec.alpha(), coeffs, shift)
}

/// One summand c r^q (λ - α_0 r^(2α))^(-m).
#[derive(Clone, Debug, PartialEq)]
pub struct PoleTerm<C: Coeff> {
    pub r_exp: Rat,
    pub pole_order: u32,
    pub coeff: C,
}

/// One parametrix element b_(-2α-k): a finite sum of pole terms sharing
/// the pole location a(r) = α_0 r^(2α).
#[derive(Clone, Debug)]
pub struct PoleSeries<C: Coeff> {
    pub alpha: Rat,
    pub alpha0: C,
    pub k: u32,
    /// Sorted by ascending pole order.
    pub terms: Vec<PoleTerm<C>>,
}

impl<C: Coeff> PoleSeries<C> {
    /// Exact homogeneity bookkeeping: q - 2α m = -2α - k for every term.
    pub fn homogeneity_ok(&self) -> bool {
        let target = -rat(2, 1) * self.alpha - rat(self.k as i64, 1);
        self.terms
            .iter()
            .all(|t| t.r_exp - rat(2 * t.pole_order as i64, 1) * self.alpha == target)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "k": self.k,
            "degree": (-rat(2,1) * self.alpha - rat(self.k as i64,1)).to_string(),
            "summands": self.terms.iter().map(|t| json!({
                "r_exp": t.r_exp.to_string(),
                "pole_order": t.pole_order,
                "coeff": t.coeff.to_f64(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<C: Coeff> fmt::Display for PoleSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}) r^({}) (lam - a0 r^(2a))^(-{})", t.coeff.render(), t.r_exp, t.pole_order)?;
        }
        Ok(())
    }
}

/// Parametrix of λ - σ̃ modulo terms of homogeneity below -2α-K: solves
/// [(λ - α_0 r^(2α)) - Σ_j α_j r^(2α-2j)] Σ_k b_(-2α-k) = 1 degree by
/// degree.  Odd-k elements are exactly zero.
pub fn parametrix<C: Coeff>(series: &SymbolSeries<C>, order: u32) -> Result<Vec<PoleSeries<C>>> {
    let needed = (order as usize) / 2 + 1;
    if series.coeffs().len() < needed {
        return Err(Error::Config(format!(
            "parametrix order {order} needs {needed} symbol coefficients, only {} known; \
             zero-padding is not performed",
            series.coeffs().len()
        )));
    }
    let alpha = series.alpha();
    let alpha0 = series.coeffs()[0].clone();

    let mut blocks: Vec<Vec<PoleTerm<C>>> = Vec::with_capacity(order as usize + 1);
    for k in 0..=order {
        if k == 0 {
            blocks.push(vec![PoleTerm { r_exp: rat(0, 1), pole_order: 1, coeff: C::one() }]);
            continue;
        }
        if k % 2 == 1 {
            blocks.push(Vec::new());
            continue;
        }
        // b_k = (λ-a)^(-1) Σ_{j>=1, 2j<=k} α_j r^(2α-2j) b_(k-2j)
        let mut acc: BTreeMap<(Rat, u32), C> = BTreeMap::new();
        for j in 1..=(k as usize / 2) {
            let aj = series.coeffs()[j].clone();
            if aj.is_zero() {
                continue;
            }
            let deg_j = series.degree(j);
            for t in &blocks[k as usize - 2 * j] {
                let key = (t.r_exp + deg_j, t.pole_order + 1);
                let add = aj.clone() * t.coeff.clone();
                match acc.remove(&key) {
                    Some(c) => {
                        let s = c + add;
                        if !s.is_zero() {
                            acc.insert(key, s);
                        }
                    }
                    None => {
                        acc.insert(key, add);
                    }
                }
            }
        }
        let mut terms: Vec<PoleTerm<C>> = acc
            .into_iter()
            .map(|((r_exp, pole_order), coeff)| PoleTerm { r_exp, pole_order, coeff })
            .collect();
        terms.sort_by_key(|t| t.pole_order);
        blocks.push(terms);
    }

    let out: Vec<PoleSeries<C>> = blocks
        .into_iter()
        .enumerate()
        .map(|(k, terms)| PoleSeries { alpha, alpha0: alpha0.clone(), k: k as u32, terms })
        .collect();
    debug_assert!(out.iter().all(|b| b.homogeneity_ok()));
    Ok(out)
}

/// Defect of the parametrix identity: all retained homogeneity degrees of
/// [(λ-a) - Σ α_j r^(2α-2j)] Σ b_k - 1 down to -2α-K, as (degree-offset k,
/// coefficient) pairs that survived cancellation.  Empty means verified.
pub fn parametrix_defect<C: Coeff>(
    series: &SymbolSeries<C>,
    blocks: &[PoleSeries<C>],
) -> Vec<(Rat, u32, C)> {
    let order = blocks.len() as i64 - 1;
    let alpha = series.alpha();
    let two_alpha = rat(2, 1) * alpha;
    let mut acc: BTreeMap<(Rat, u32), C> = BTreeMap::new();
    let push = |key: (Rat, u32), val: C, acc: &mut BTreeMap<(Rat, u32), C>| {
        match acc.remove(&key) {
            Some(c) => {
                let s = c + val;
                if !s.is_zero() {
                    acc.insert(key, s);
                }
            }
            None => {
                if !val.is_zero() {
                    acc.insert(key, val);
                }
            }
        }
    };
    for b in blocks {
        for t in &b.terms {
            // (λ - a) · term
            push((t.r_exp, t.pole_order - 1), t.coeff.clone(), &mut acc);
            // -Σ_j α_j r^(2α-2j) · term
            for (j, aj) in series.coeffs().iter().enumerate().skip(1) {
                let key = (t.r_exp + series.degree(j), t.pole_order);
                push(key, -(aj.clone() * t.coeff.clone()), &mut acc);
            }
        }
    }
    // subtract the 1
    push((rat(0, 1), 0), -C::one(), &mut acc);

    let scale = blocks
        .iter()
        .flat_map(|b| b.terms.iter())
        .fold(0.0f64, |m, t| m.max(t.coeff.to_f64().abs()));
    acc.into_iter()
        .filter_map(|((q, m), c)| {
            // retained degrees: q - 2α m >= -2α - K
            let degree = q - rat(m as i64, 1) * two_alpha;
            if degree >= -two_alpha - rat(order, 1) && !c.approx_zero(scale) {
                Some((q, m, c))
            } else {
                None
            }
        })
        .collect()
}

/// One heat-symbol summand c t^p r^q e^(-t α_0 r^(2α)).
#[derive(Clone, Debug, PartialEq)]
pub struct HeatTerm<C: Coeff> {
    pub t_pow: u32,
    pub r_exp: Rat,
    pub coeff: C,
}

#[derive(Clone, Debug)]
pub struct HeatBlock<C: Coeff> {
    pub k: u32,
    pub terms: Vec<HeatTerm<C>>,
}

/// Heat-operator symbol expansion Σ_k (polynomial in t) e^(-t α_0 r^(2α)).
#[derive(Clone, Debug)]
pub struct HeatSymbolSeries<C: Coeff> {
    pub alpha: Rat,
    pub alpha0: C,
    pub blocks: Vec<HeatBlock<C>>,
}

impl<C: Coeff> HeatSymbolSeries<C> {
    /// Numeric value of the truncated expansion at (r, t).
    pub fn eval(&self, r: f64, t: f64) -> f64 {
        let a = self.alpha0.to_f64() * r.powf(2.0 * rat_to_f64(self.alpha));
        let e = (-t * a).exp();
        self.blocks
            .iter()
            .flat_map(|b| b.terms.iter())
            .map(|term| term.coeff.to_f64() * t.powi(term.t_pow as i32) * r.powf(rat_to_f64(term.r_exp)) * e)
            .sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha.to_string(),
            "alpha0": self.alpha0.to_f64(),
            "blocks": self.blocks.iter().map(|b| json!({
                "k": b.k,
                "terms": b.terms.iter().map(|t| json!({
                    "t_pow": t.t_pow,
                    "r_exp": t.r_exp.to_string(),
                    "coeff": t.coeff.to_f64(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<C: Coeff> fmt::Display for HeatSymbolSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            if b.terms.is_empty() {
                continue;
            }
            write!(f, "k={}: [", b.k)?;
            for (i, t) in b.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "({}) t^{} r^({})", t.coeff.render(), t.t_pow, t.r_exp)?;
            }
            writeln!(f, "] exp(-t a0 r^(2a))")?;
        }
        Ok(())
    }
}

/// Apply the residue rule (1/2πi) ∮ e^(-tλ) (λ-a)^(-m) dλ =
/// ((-t)^(m-1)/(m-1)!) e^(-ta) termwise.  The contour is oriented so that
/// the k = 0 block is +e^(-ta); a one-time self-test pins the convention
/// against the three lowest-order expansions.
pub fn heat_symbol<C: Coeff>(blocks: &[PoleSeries<C>]) -> Result<HeatSymbolSeries<C>> {
    convention_self_test()?;
    let (alpha, alpha0) = match blocks.first() {
        Some(b) => (b.alpha, b.alpha0.clone()),
        None => return Err(Error::Config("heat_symbol needs at least the k=0 parametrix term".into())),
    };
    let out = blocks
        .iter()
        .map(|b| {
            let mut terms: Vec<HeatTerm<C>> = b
                .terms
                .iter()
                .map(|t| {
                    let m = t.pole_order;
                    // (-1)^(m-1)/(m-1)!
                    let mut c = t.coeff.clone();
                    for i in 1..m {
                        c = -c / C::from_int(i as i64);
                    }
                    HeatTerm { t_pow: m - 1, r_exp: t.r_exp, coeff: c }
                })
                .collect();
            terms.sort_by_key(|t| t.t_pow);
            HeatBlock { k: b.k, terms }
        })
        .collect();
    Ok(HeatSymbolSeries { alpha, alpha0, blocks: out })
}

/// Polynomial in the complex-power variable z, ascending coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyZ<C: Coeff>(pub Vec<C>);

impl<C: Coeff> PolyZ<C> {
    pub fn constant(c: C) -> Self {
        PolyZ(vec![c])
    }

    /// Multiply by the linear factor (b0 + b1 z).
    fn mul_linear(&self, b0: C, b1: C) -> Self {
        let mut out = vec![C::zero(); self.0.len() + 1];
        for (i, a) in self.0.iter().enumerate() {
            out[i] = out[i].clone() + a.clone() * b0.clone();
            out[i + 1] = out[i + 1].clone() + a.clone() * b1.clone();
        }
        PolyZ(out)
    }

    fn add(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_else(C::zero);
            let b = other.0.get(i).cloned().unwrap_or_else(C::zero);
            out.push(a + b);
        }
        PolyZ(out)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.0.iter().rev() {
            acc = acc * z + c.to_f64();
        }
        acc
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * z + c.to_f64();
        }
        acc
    }

    pub fn eval_deriv_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.0.iter().enumerate().skip(1).rev() {
            acc = acc * z + c.to_f64() * i as f64;
        }
        acc
    }
}

/// σ_(-2αz-k)(ξ; z) = [Σ_j poly_j(z) α_0^(-z-j)] r^(-2αz-k).
#[derive(Clone, Debug)]
pub struct PowerBlock<C: Coeff> {
    pub k: u32,
    /// (j, polynomial in z), ascending j; j = pole order - 1.
    pub terms: Vec<(u32, PolyZ<C>)>,
}

#[derive(Clone, Debug)]
pub struct ComplexPowerSeries<C: Coeff> {
    pub alpha: Rat,
    pub alpha0: C,
    pub blocks: Vec<PowerBlock<C>>,
}

impl<C: Coeff> ComplexPowerSeries<C> {
    /// Radial coefficient s_k(z) = Σ_j poly_j(z) α_0^(-z-j) of the
    /// degree-(-2αz-k) component.
    pub fn radial_coeff(&self, k: u32, z: f64) -> f64 {
        let a0 = self.alpha0.to_f64();
        self.blocks
            .iter()
            .find(|b| b.k == k)
            .map(|b| {
                b.terms
                    .iter()
                    .map(|(j, p)| p.eval(z) * a0.powf(-z - *j as f64))
                    .sum()
            })
            .unwrap_or(0.0)
    }

    pub fn radial_coeff_complex(&self, k: u32, z: Complex64) -> Complex64 {
        let a0 = self.alpha0.to_f64();
        let ln_a0 = a0.ln();
        self.blocks
            .iter()
            .find(|b| b.k == k)
            .map(|b| {
                b.terms
                    .iter()
                    .map(|(j, p)| {
                        p.eval_complex(z) * ((-z - *j as f64) * ln_a0).exp()
                    })
                    .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            })
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Magnitude scale of s_k(z): the same sum with every coefficient and
    /// factor replaced by its absolute value.  Used to decide whether a
    /// computed s_k(z_k) is a genuine zero or coefficient noise.
    pub fn radial_coeff_scale(&self, k: u32, z: f64) -> f64 {
        let a0 = self.alpha0.to_f64();
        self.blocks
            .iter()
            .find(|b| b.k == k)
            .map(|b| {
                b.terms
                    .iter()
                    .map(|(j, p)| {
                        let poly_mag: f64 = p
                            .0
                            .iter()
                            .enumerate()
                            .map(|(i, c)| c.to_f64().abs() * z.abs().powi(i as i32))
                            .sum();
                        poly_mag * a0.powf(-z - *j as f64)
                    })
                    .sum()
            })
            .unwrap_or(0.0)
    }

    /// d/dz of the radial coefficient s_k at z.
    pub fn radial_coeff_deriv_complex(&self, k: u32, z: Complex64) -> Complex64 {
        let a0 = self.alpha0.to_f64();
        let ln_a0 = a0.ln();
        self.blocks
            .iter()
            .find(|b| b.k == k)
            .map(|b| {
                b.terms
                    .iter()
                    .map(|(j, p)| {
                        (p.eval_deriv_complex(z) - p.eval_complex(z) * ln_a0)
                            * ((-z - *j as f64) * ln_a0).exp()
                    })
                    .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
            })
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Numeric value of the truncated symbol at radius r, power z.
    pub fn eval_complex(&self, r: f64, z: Complex64) -> Complex64 {
        let two_alpha = 2.0 * rat_to_f64(self.alpha);
        let ln_r = r.ln();
        self.blocks
            .iter()
            .map(|b| {
                self.radial_coeff_complex(b.k, z) * ((-two_alpha * z - b.k as f64) * ln_r).exp()
            })
            .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "alpha": self.alpha.to_string(),
            "alpha0": self.alpha0.to_f64(),
            "blocks": self.blocks.iter().map(|b| json!({
                "k": b.k,
                "degree": format!("-2*({})*z-{}", self.alpha, b.k),
                "terms": b.terms.iter().map(|(j, p)| json!({
                    "j": j,
                    "poly_z": p.0.iter().map(|c| c.to_f64()).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

impl<C: Coeff> fmt::Display for ComplexPowerSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.blocks {
            if b.terms.is_empty() {
                continue;
            }
            write!(f, "k={}: [", b.k)?;
            for (i, (j, p)) in b.terms.iter().enumerate() {
                if i > 0 {
                    write!(f, " + ")?;
                }
                let poly = p.0.iter().map(|c| c.render()).collect::<Vec<_>>().join(", ");
                write!(f, "(poly[{}] in z) a0^(-z-{})", poly, j)?;
            }
            writeln!(f, "] r^(-2az-{})", b.k)?;
        }
        Ok(())
    }
}

/// Apply the residue rule (1/2πi) ∮ λ^(-z) (λ-a)^(-m) dλ =
/// [(-z)(-z-1)...(-z-m+2)/(m-1)!] a^(-z-m+1) termwise.
pub fn complex_power_symbol<C: Coeff>(blocks: &[PoleSeries<C>]) -> Result<ComplexPowerSeries<C>> {
    convention_self_test()?;
    let (alpha, alpha0) = match blocks.first() {
        Some(b) => (b.alpha, b.alpha0.clone()),
        None => {
            return Err(Error::Config(
                "complex_power_symbol needs at least the k=0 parametrix term".into(),
            ))
        }
    };
    let out = blocks
        .iter()
        .map(|b| {
            let mut by_j: BTreeMap<u32, PolyZ<C>> = BTreeMap::new();
            for t in &b.terms {
                let m = t.pole_order;
                let mut poly = PolyZ::constant(t.coeff.clone());
                // Π_{i=0}^{m-2} (-z - i) / (m-1)!
                for i in 0..m.saturating_sub(1) {
                    poly = poly.mul_linear(C::from_int(-(i as i64)), -C::one());
                    poly = PolyZ(poly.0.into_iter().map(|c| c / C::from_int((i + 1) as i64)).collect());
                }
                let j = m - 1;
                let entry = by_j.remove(&j).map(|p| p.add(&poly)).unwrap_or(poly);
                by_j.insert(j, entry);
            }
            PowerBlock { k: b.k, terms: by_j.into_iter().collect() }
        })
        .collect();
    Ok(ComplexPowerSeries { alpha, alpha0, blocks: out })
}

/// One-time check that the two residue rules reproduce the three printed
/// lowest-order expansions (relativistic α = 1/2 in exact rationals).
fn convention_self_test() -> Result<()> {
    use std::sync::OnceLock;
    static CHECKED: OnceLock<bool> = OnceLock::new();
    let ok = *CHECKED.get_or_init(|| match self_test_impl() {
        Ok(()) => true,
        Err(_) => false,
    });
    if ok {
        Ok(())
    } else {
        Err(Error::Validation(
            "residue-rule sign conventions failed the startup self-test".into(),
        ))
    }
}

fn self_test_impl() -> Result<()> {
    let series = SymbolSeries::from_parts(
        rat(1, 2),
        vec![rat(1, 1), rat(1, 2), rat(-1, 8), rat(1, 16)],
        1.0,
    )?;
    let par = parametrix_raw(&series, 4)?;
    // heat: k=0 -> +1 at t^0; k=2 -> -α_1 t; k=4 -> -α_2 t + α_1²/2 t²
    let heat = heat_symbol_raw(&par);
    let ok_heat = heat[0].terms == vec![HeatTerm { t_pow: 0, r_exp: rat(0, 1), coeff: rat(1, 1) }]
        && heat[2].terms == vec![HeatTerm { t_pow: 1, r_exp: rat(-1, 1), coeff: rat(-1, 2) }]
        && heat[4].terms
            == vec![
                HeatTerm { t_pow: 1, r_exp: rat(-3, 1), coeff: rat(1, 8) },
                HeatTerm { t_pow: 2, r_exp: rat(-2, 1), coeff: rat(1, 8) },
            ];
    // power: k=0 -> 1; k=2 -> -α_1 z; k=4 -> (-α_2 z) + (α_1²/2) z(z+1)
    let power = power_symbol_raw(&par);
    let ok_power = power[0] == vec![(0u32, PolyZ(vec![rat(1, 1)]))]
        && power[2] == vec![(1u32, PolyZ(vec![rat(0, 1), rat(-1, 2)]))]
        && power[4]
            == vec![
                (1u32, PolyZ(vec![rat(0, 1), rat(1, 8)])),
                (2u32, PolyZ(vec![rat(0, 1), rat(1, 8), rat(1, 8)])),
            ];
    if ok_heat && ok_power {
        Ok(())
    } else {
        Err(Error::Validation("sign convention mismatch".into()))
    }
}

// Convention-test internals: same arithmetic as the public ops but without
// the self-test recursion.
fn parametrix_raw(series: &SymbolSeries<Rat>, order: u32) -> Result<Vec<PoleSeries<Rat>>> {
    parametrix(series, order)
}

fn heat_symbol_raw(blocks: &[PoleSeries<Rat>]) -> Vec<HeatBlock<Rat>> {
    blocks
        .iter()
        .map(|b| {
            let mut terms: Vec<HeatTerm<Rat>> = b
                .terms
                .iter()
                .map(|t| {
                    let m = t.pole_order;
                    let mut c = t.coeff;
                    for i in 1..m {
                        c = -c / rat(i as i64, 1);
                    }
                    HeatTerm { t_pow: m - 1, r_exp: t.r_exp, coeff: c }
                })
                .collect();
            terms.sort_by_key(|t| t.t_pow);
            HeatBlock { k: b.k, terms }
        })
        .collect()
}

fn power_symbol_raw(blocks: &[PoleSeries<Rat>]) -> Vec<Vec<(u32, PolyZ<Rat>)>> {
    blocks
        .iter()
        .map(|b| {
            let mut by_j: BTreeMap<u32, PolyZ<Rat>> = BTreeMap::new();
            for t in &b.terms {
                let m = t.pole_order;
                let mut poly = PolyZ::constant(t.coeff);
                for i in 0..m.saturating_sub(1) {
                    poly = poly.mul_linear(rat(-(i as i64), 1), rat(-1, 1));
                    poly = PolyZ(poly.0.into_iter().map(|c| c / rat((i + 1) as i64, 1)).collect());
                }
                let j = m - 1;
                let entry = by_j.remove(&j).map(|p| p.add(&poly)).unwrap_or(poly);
                by_j.insert(j, entry);
            }
            by_j.into_iter().collect()
        })
        .collect()
}

/// Infimum over the grid of σ̃(ξ)/⟨ξ⟩^(2α); must be strictly positive for
/// an elliptic symbol.
pub fn ellipticity_check(
    series: &SymbolSeries<f64>,
    spec: &LevySpec,
    xi_grid: &[f64],
    quad: &QuadConfig,
) -> Result<f64> {
    if xi_grid.is_empty() || xi_grid.iter().cloned().fold(f64::NAN, f64::max) < 1e3 {
        return Err(Error::Config("xi grid must cover |ξ| in [0, 1e3]".into()));
    }
    let two_alpha = 2.0 * rat_to_f64(series.alpha());
    let mut inf = f64::INFINITY;
    for &r in xi_grid {
        let sigma = spec.sigma_tilde(r, quad)?;
        let val = sigma / (1.0 + r * r).powf(two_alpha / 2.0);
        inf = inf.min(val);
    }
    if inf <= 0.0 {
        return Err(Error::Validation(format!(
            "non-positive ellipticity constant {inf:.3e}"
        )));
    }
    Ok(inf)
}

/// Minimum of |λ - σ̃(ξ)| / ⟨ξ⟩^(2α) over samples of the sector boundary
/// arg λ = ±θ (plus the apex), θ in (π/4, π/2).
pub fn sector_ellipticity_check(
    series: &SymbolSeries<f64>,
    spec: &LevySpec,
    theta: f64,
    xi_grid: &[f64],
    quad: &QuadConfig,
) -> Result<f64> {
    if !(theta > std::f64::consts::FRAC_PI_4 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Config(format!(
            "sector angle must lie in (pi/4, pi/2), got {theta}"
        )));
    }
    let two_alpha = 2.0 * rat_to_f64(series.alpha());
    let (st, ct) = (theta.sin(), theta.cos());
    let mut min = f64::INFINITY;
    for &r in xi_grid {
        let sigma = spec.sigma_tilde(r, quad)?;
        let weight = (1.0 + r * r).powf(two_alpha / 2.0);
        // boundary ray λ = ρ e^(iθ); σ̃ is real so the conjugate ray is symmetric
        min = min.min(sigma / weight); // apex ρ = 0
        for i in -20..=20 {
            let rho = sigma * 10f64.powf(i as f64 / 10.0);
            let d = ((rho * ct - sigma).powi(2) + (rho * st).powi(2)).sqrt();
            min = min.min(d / weight);
        }
    }
    if min <= 0.0 {
        return Err(Error::Validation(format!("non-positive sector bound {min:.3e}")));
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernstein::CatalogName;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn relativistic_series_rat() -> SymbolSeries<Rat> {
        SymbolSeries::from_parts(
            rat(1, 2),
            vec![rat(1, 1), rat(1, 2), rat(-1, 8), rat(1, 16)],
            1.0,
        )
        .unwrap()
    }

    fn quad() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn shifted_symbol_relativistic_exact_coefficients() {
        let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None).unwrap();
        let s = shifted_symbol(&spec, 3, &quad()).unwrap();
        let expected = [1.0, 0.5, -0.125, 0.0625];
        for (c, e) in s.coeffs().iter().zip(expected) {
            assert_relative_eq!(*c, e, max_relative = 1e-12);
        }
        assert_relative_eq!(s.shift(), 1.0, max_relative = 1e-9);
        assert_eq!(s.degree(0), rat(1, 1));
        assert_eq!(s.degree(2), rat(-3, 1));
    }

    #[test]
    fn shifted_symbol_leading_coefficient_reduces_to_one_for_relativistic() {
        // α_0 = -Γ(-a) a / Γ(1-a) = 1 by the reflection identity
        for a in [rat(1, 3), rat(7, 10)] {
            let spec = LevySpec::catalog(CatalogName::Relativistic, Some(a), None).unwrap();
            let s = shifted_symbol(&spec, 1, &quad()).unwrap();
            assert_relative_eq!(s.coeffs()[0], 1.0, max_relative = 1e-12);
            assert!(s.coeffs()[0] > 0.0);
        }
    }

    #[test]
    fn shifted_symbol_respects_truncation_cap() {
        let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None).unwrap();
        assert!(shifted_symbol(&spec, 40, &quad()).is_err());
    }

    #[test]
    fn parametrix_printed_terms() {
        let series = relativistic_series_rat();
        let par = parametrix(&series, 4).unwrap();
        // k=0: (λ-a)^(-1)
        assert_eq!(par[0].terms, vec![PoleTerm { r_exp: rat(0, 1), pole_order: 1, coeff: rat(1, 1) }]);
        // odd terms vanish
        assert!(par[1].terms.is_empty());
        assert!(par[3].terms.is_empty());
        // k=2: α_1 r^(2α-2) (λ-a)^(-2)
        assert_eq!(par[2].terms, vec![PoleTerm { r_exp: rat(-1, 1), pole_order: 2, coeff: rat(1, 2) }]);
        // k=4: α_2 r^(2α-4)(λ-a)^(-2) + α_1² r^(4α-4)(λ-a)^(-3)
        assert_eq!(
            par[4].terms,
            vec![
                PoleTerm { r_exp: rat(-3, 1), pole_order: 2, coeff: rat(-1, 8) },
                PoleTerm { r_exp: rat(-2, 1), pole_order: 3, coeff: rat(1, 4) },
            ]
        );
    }

    #[test]
    fn parametrix_k6_matches_brute_force_series_inversion() {
        // independent oracle: b = r^(-2α) w Σ_m (Σ_j α_j w s^j)^m with
        // w = (λ r^(-2α) - α_0)^(-1), s = r^(-2); dense bivariate arithmetic
        let series = SymbolSeries::from_parts(rat(1, 2), vec![1.0, 0.37, -0.83, 0.212], 1.0).unwrap();
        let par = parametrix(&series, 6).unwrap();

        let s_max = 3usize; // powers of s
        let w_max = 5usize;
        // S[s_pow][w_pow]
        let mut s_poly = vec![vec![0.0; w_max + 1]; s_max + 1];
        for j in 1..=3 {
            s_poly[j][1] = series.coeffs()[j];
        }
        let mut total = vec![vec![0.0; w_max + 1]; s_max + 1]; // Σ S^m
        let mut power = vec![vec![0.0; w_max + 1]; s_max + 1]; // S^m
        power[0][0] = 1.0;
        for m in 0..=s_max {
            if m > 0 {
                let mut next = vec![vec![0.0; w_max + 1]; s_max + 1];
                for (i1, r1) in power.iter().enumerate() {
                    for (j1, &c1) in r1.iter().enumerate() {
                        if c1 == 0.0 {
                            continue;
                        }
                        for (i2, r2) in s_poly.iter().enumerate() {
                            for (j2, &c2) in r2.iter().enumerate() {
                                if c2 == 0.0 || i1 + i2 > s_max || j1 + j2 > w_max {
                                    continue;
                                }
                                next[i1 + i2][j1 + j2] += c1 * c2;
                            }
                        }
                    }
                }
                power = next;
            }
            for i in 0..=s_max {
                for j in 0..=w_max {
                    total[i][j] += power[i][j];
                }
            }
        }
        // k-th block (k = 2i): coefficient of s^i, multiplied by w
        for i in 0..=s_max {
            let k = 2 * i;
            let block = &par[k];
            for m in 1..=w_max as u32 {
                let oracle = total[i][(m - 1) as usize];
                let ours = block
                    .terms
                    .iter()
                    .find(|t| t.pole_order == m)
                    .map(|t| t.coeff)
                    .unwrap_or(0.0);
                assert_relative_eq!(ours, oracle, max_relative = 1e-12, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn parametrix_cancellation_identity() {
        let series = relativistic_series_rat();
        let par = parametrix(&series, 6).unwrap();
        let defect = parametrix_defect(&series, &par);
        assert!(defect.is_empty(), "uncancelled terms: {defect:?}");
    }

    #[test]
    fn parametrix_truncation_is_an_error() {
        let series = SymbolSeries::from_parts(rat(1, 2), vec![1.0, 0.5], 1.0).unwrap();
        assert!(parametrix(&series, 4).is_err());
        assert!(parametrix(&series, 2).is_ok());
    }

    #[test]
    fn heat_symbol_printed_terms() {
        let series = relativistic_series_rat();
        let par = parametrix(&series, 4).unwrap();
        let heat = heat_symbol(&par).unwrap();
        // coefficient tuples in (α_0, α_1, α_2): k=0 -> 1, k=2 -> -α_1 t,
        // k=4 -> -α_2 t + (1/2)α_1² t²; relativistic numbers as below
        assert_eq!(heat.blocks[0].terms, vec![HeatTerm { t_pow: 0, r_exp: rat(0, 1), coeff: rat(1, 1) }]);
        assert_eq!(heat.blocks[2].terms, vec![HeatTerm { t_pow: 1, r_exp: rat(-1, 1), coeff: rat(-1, 2) }]);
        assert_eq!(
            heat.blocks[4].terms,
            vec![
                HeatTerm { t_pow: 1, r_exp: rat(-3, 1), coeff: rat(1, 8) },
                HeatTerm { t_pow: 2, r_exp: rat(-2, 1), coeff: rat(1, 8) },
            ]
        );
        assert!(heat.blocks[1].terms.is_empty() && heat.blocks[3].terms.is_empty());
    }

    #[test]
    fn complex_power_printed_terms() {
        let series = relativistic_series_rat();
        let par = parametrix(&series, 4).unwrap();
        let cps = complex_power_symbol(&par).unwrap();
        // k=0: α_0^(-z) (poly 1 at j=0)
        assert_eq!(cps.blocks[0].terms, vec![(0, PolyZ(vec![rat(1, 1)]))]);
        // k=2: -α_1 z at j=1 -> -(1/2) z
        assert_eq!(cps.blocks[2].terms, vec![(1, PolyZ(vec![rat(0, 1), rat(-1, 2)]))]);
        // k=4: -α_2 z at j=1 -> (1/8) z; (1/2)α_1² z(z+1) at j=2 -> (1/8)(z²+z)
        assert_eq!(
            cps.blocks[4].terms,
            vec![
                (1, PolyZ(vec![rat(0, 1), rat(1, 8)])),
                (2, PolyZ(vec![rat(0, 1), rat(1, 8), rat(1, 8)])),
            ]
        );
    }

    #[test]
    fn relativistic_power_symbol_collapses_to_printed_z_polynomials() {
        // with α_0 = 1 the k=4 radial coefficient is (1/8)(z² + 2z)
        let series = relativistic_series_rat();
        let par = parametrix(&series, 4).unwrap();
        let cps = complex_power_symbol(&par).unwrap();
        for z in [0.3, -1.0, 2.7] {
            assert_relative_eq!(cps.radial_coeff(4, z), (z * z + 2.0 * z) / 8.0, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(cps.radial_coeff(2, z), -0.5 * z, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(cps.radial_coeff(0, z), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn heat_matches_inverse_mellin_of_power_symbol() {
        // small-instance oracle equivalence of the two residue rules:
        // numerically invert the Mellin transform of the truncated power
        // symbol and compare with the truncated heat symbol
        use crate::special::gamma_complex;
        let series = relativistic_series_rat();
        let par = parametrix(&series, 4).unwrap();
        let heat = heat_symbol(&par).unwrap();
        let cps = complex_power_symbol(&par).unwrap();
        for (r, t) in [(1.3, 0.7f64), (2.0, 0.25)] {
            let c = 1.5;
            let t_ln = t.ln();
            let h = 0.005;
            let n = (45.0 / h) as usize;
            // trapezoid over y in [-45, 45]; Γ decays like e^(-π|y|/2)
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=2 * n {
                let y = (i as f64 - n as f64) * h;
                let z = Complex64::new(c, y);
                let val = gamma_complex(z) * cps.eval_complex(r, z) * (-z * t_ln).exp();
                let w = if i == 0 || i == 2 * n { 0.5 } else { 1.0 };
                acc += val * w;
            }
            let inv_mellin = (acc * h / (2.0 * std::f64::consts::PI)).re;
            let direct = heat.eval(r, t);
            assert_relative_eq!(inv_mellin, direct, max_relative = 1e-6);
        }
    }

    #[test]
    fn ellipticity_relativistic_is_one() {
        let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None).unwrap();
        let series = shifted_symbol(&spec, 2, &quad()).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| 1e3 * (i as f64 / 40.0).powi(2)).collect();
        let c = ellipticity_check(&series, &spec, &grid, &quad()).unwrap();
        // σ̃(ξ) = ⟨ξ⟩ exactly, so the constant is 1
        assert_relative_eq!(c, 1.0, max_relative = 1e-8);
        // σ̃(0) = -m̄ = 1 > 0
        assert_relative_eq!(spec.sigma_tilde(0.0, &quad()).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn ellipticity_gamma_ratio_2() {
        let spec = LevySpec::catalog(CatalogName::GammaRatio2, Some(rat(1, 3)), None).unwrap();
        let series = shifted_symbol(&spec, 2, &quad()).unwrap();
        let grid: Vec<f64> = (0..=30).map(|i| 1e3 * (i as f64 / 30.0).powi(2)).collect();
        let c = ellipticity_check(&series, &spec, &grid, &quad()).unwrap();
        assert!(c > 0.0);
    }

    #[test]
    fn sector_ellipticity_relativistic_bound() {
        let spec = LevySpec::catalog(CatalogName::Relativistic, Some(rat(1, 2)), None).unwrap();
        let series = shifted_symbol(&spec, 2, &quad()).unwrap();
        let grid: Vec<f64> = (0..=25).map(|i| 1e3 * (i as f64 / 25.0).powi(2)).collect();
        let m = sector_ellipticity_check(&series, &spec, 0.3 * std::f64::consts::PI, &grid, &quad()).unwrap();
        assert!(m >= 1.0 / 2f64.sqrt() - 1e-9, "sector bound {m}");
        // λ on the negative real axis: |λ-σ̃| >= σ̃ >= C⟨ξ⟩^(2α); the
        // sampled minimum can never undercut the ellipticity constant
        let c = ellipticity_check(&series, &spec, &grid, &quad()).unwrap();
        assert!(m <= 1.0 + 1e-12 && c <= 1.0 + 1e-12);
    }

    #[test]
    fn sector_ellipticity_power_ratio() {
        let spec = LevySpec::catalog(CatalogName::PowerRatio, Some(rat(1, 2)), Some(1.0)).unwrap();
        // m̄ = 0 for this entry; build the series with shift 0 by hand to
        // probe the sector geometry only
        let series = SymbolSeries::from_parts(rat(1, 2), vec![1.0, -0.5], 0.0).unwrap();
        let grid: Vec<f64> = (1..=25).map(|i| 1e3 * (i as f64 / 25.0).powi(2)).collect();
        let m = sector_ellipticity_check(&series, &spec, 0.3 * std::f64::consts::PI, &grid, &quad()).unwrap();
        assert!(m > 0.0);
    }

    #[test]
    fn scaling_covariance() {
        let base = SymbolSeries::from_parts(rat(1, 3), vec![0.7, 0.21, -0.4], 1.0).unwrap();
        let s = 3.5;
        let scaled = SymbolSeries::from_parts(
            rat(1, 3),
            base.coeffs().iter().map(|c| c * s).collect(),
            1.0,
        )
        .unwrap();
        let p1 = parametrix(&base, 4).unwrap();
        let p2 = parametrix(&scaled, 4).unwrap();
        // identical degree structure: same (k, r_exp, pole_order) triples
        for (b1, b2) in p1.iter().zip(&p2) {
            assert_eq!(b1.terms.len(), b2.terms.len());
            for (t1, t2) in b1.terms.iter().zip(&b2.terms) {
                assert_eq!(t1.r_exp, t2.r_exp);
                assert_eq!(t1.pole_order, t2.pole_order);
            }
        }
        // k=0 heat term becomes e^(-t s α_0 r^(2α))
        let h2 = heat_symbol(&p2).unwrap();
        assert_relative_eq!(h2.alpha0, s * 0.7, max_relative = 1e-14);
        assert_eq!(h2.blocks[0].terms[0], HeatTerm { t_pow: 0, r_exp: rat(0, 1), coeff: 1.0 });
    }

    proptest! {
        #[test]
        fn parametrix_identity_holds_for_random_symbols(
            a_num in 1i64..20,
            a_den in 21i64..40,
            c1 in -2.0f64..2.0,
            c2 in -2.0f64..2.0,
            c3 in -2.0f64..2.0,
            a0 in 0.1f64..3.0,
        ) {
            let alpha = rat(a_num, a_den); // in (0,1) since num < den
            let series = SymbolSeries::from_parts(alpha, vec![a0, c1, c2, c3], 1.0).unwrap();
            let par = parametrix(&series, 6).unwrap();
            // homogeneity bookkeeping is exact
            for b in &par {
                prop_assert!(b.homogeneity_ok());
            }
            // formal cancellation of all retained degrees
            let defect = parametrix_defect(&series, &par);
            prop_assert!(defect.is_empty(), "defect {:?}", defect);
        }

        #[test]
        fn odd_blocks_always_vanish(
            c1 in -2.0f64..2.0,
            c2 in -2.0f64..2.0,
        ) {
            let series = SymbolSeries::from_parts(rat(2, 5), vec![1.0, c1, c2], 1.0).unwrap();
            let par = parametrix(&series, 5).unwrap();
            prop_assert!(par[1].terms.is_empty());
            prop_assert!(par[3].terms.is_empty());
            prop_assert!(par[5].terms.is_empty());
        }
    }
}
