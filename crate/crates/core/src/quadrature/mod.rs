//! Period integrals ξ_D(s) = ∫_D e(λ,s) dλ with e(λ,s) = ((a−λ)(b−λ)(s−λ))^{−1/2}.
//!
//! The s-derivatives are again integrals of the same kind:
//! d^k/ds^k ξ_D(s) = (2k−1)!!/2^k · ∫_D e(λ,s)/(λ−s)^k dλ.
//!
//! Finite intervals use tanh-sinh, the left-infinite tail uses exp-sinh.
//! When a root of the integrand sits just outside an endpoint the interval is
//! cut geometrically toward that endpoint so each piece sees the near
//! singularity at a comparable relative distance.

mod de;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use de::{exp_sinh, tanh_sinh, Estimate};

use crate::conic::ConicFamily;
use crate::tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("interval {interval} is not inside the positivity domain for s={s}")]
    DomainViolation { interval: Interval, s: f64 },
    #[error("quadrature did not converge on {interval} at s={s}, order {k}")]
    NonConvergence { interval: Interval, s: f64, k: usize },
    #[error("s={s} lies within {gap:e} of an endpoint of {interval}")]
    EndpointTooClose { interval: Interval, s: f64, gap: f64 },
    #[error("degenerate caustic parameter s={s}")]
    DegenerateCaustic { s: f64 },
    #[error("period expressions disagree at s={s}: {first} vs {second}")]
    ConsistencyFailure { s: f64, first: f64, second: f64 },
    #[error("derivative order {k} exceeds the configured maximum {k_max}")]
    OrderTooHigh { k: usize, k_max: usize },
    #[error("derivatives need s outside the closed interval {interval}, got s={s}")]
    SingularDerivative { interval: Interval, s: f64 },
}

impl QuadratureError {
    pub fn is_internal(&self) -> bool {
        matches!(self, QuadratureError::ConsistencyFailure { .. })
    }
}

/// An open interval (lo, hi); `lo = None` stands for −∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo: Some(lo), hi }
    }

    pub fn below(hi: f64) -> Self {
        Interval { lo: None, hi }
    }

    fn key(&self) -> (u64, u64) {
        (self.lo.map_or(u64::MAX, f64::to_bits), self.hi.to_bits())
    }

    fn sort_key(&self) -> (f64, f64) {
        (self.lo.unwrap_or(f64::NEG_INFINITY), self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.lo {
            Some(lo) => write!(f, "({lo}, {})", self.hi),
            None => write!(f, "(-inf, {})", self.hi),
        }
    }
}

/// Which side of b the caustic parameter lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// 0 < s < b: the caustic is an ellipse.
    Elliptic,
    /// b < s < a: the caustic is a hyperbola.
    Hyperbolic,
}

pub fn regime(family: &ConicFamily, s: f64) -> Result<Regime, QuadratureError> {
    if !(s > 0.0 && s < family.a) || s == family.b || !s.is_finite() {
        return Err(QuadratureError::DegenerateCaustic { s });
    }
    Ok(if s < family.b { Regime::Elliptic } else { Regime::Hyperbolic })
}

/// The interval whose integral is the period ℓ(s) and whose ends do not move
/// with s: (b, a) for elliptic caustics, (−∞, b) for hyperbolic ones.
pub fn ell_interval(family: &ConicFamily, s: f64) -> Result<Interval, QuadratureError> {
    Ok(match regime(family, s)? {
        Regime::Elliptic => Interval::new(family.b, family.a),
        Regime::Hyperbolic => Interval::below(family.b),
    })
}

/// (2k−1)!!/2^k.
pub fn derivative_coefficient(k: usize) -> f64 {
    let mut c = 1.0;
    for j in 1..=k {
        c *= (2 * j - 1) as f64 / 2.0;
    }
    c
}

const MAX_LEVEL: u32 = 12;

fn check_domain(d: &Interval, family: &ConicFamily, s: f64, k: usize) -> Result<(), QuadratureError> {
    let reg = regime(family, s)?;
    let bad = QuadratureError::DomainViolation { interval: *d, s };
    if !d.hi.is_finite() || d.lo.is_some_and(|lo| !lo.is_finite() || lo >= d.hi) {
        return Err(bad);
    }
    let (a, b) = (family.a, family.b);
    let lo = d.lo.unwrap_or(f64::NEG_INFINITY);
    let inside = match reg {
        Regime::Elliptic => d.hi <= s || (lo >= b && d.hi <= a),
        Regime::Hyperbolic => d.hi <= b || (lo >= s && d.hi <= a),
    };
    if !inside {
        return Err(bad);
    }
    for e in d.lo.into_iter().chain([d.hi]) {
        let gap = (e - s).abs();
        if gap > 0.0 && gap < tolerances::ENDPOINT_GUARD {
            return Err(QuadratureError::EndpointTooClose { interval: *d, s, gap });
        }
        if k > 0 && gap == 0.0 {
            return Err(QuadratureError::SingularDerivative { interval: *d, s });
        }
    }
    Ok(())
}

/// Integrand in terms of distances to the three roots a, b, s.
#[inline]
fn kernel(da: f64, db: f64, ds: f64, k: usize, sign: f64) -> f64 {
    let e = 1.0 / (da * db * ds).sqrt();
    if k == 0 {
        e
    } else {
        e * (sign / ds).powi(k as i32)
    }
}

/// ∫_D e(λ,s)/(λ−s)^k dλ without the derivative coefficient.
fn raw_integral(d: &Interval, family: &ConicFamily, s: f64, k: usize) -> Result<Estimate, QuadratureError> {
    check_domain(d, family, s, k)?;
    let roots = [family.a, family.b, s];
    let fail = || QuadratureError::NonConvergence { interval: *d, s, k };
    let tol = tolerances::QUADRATURE_REL;
    match d.lo {
        Some(l) => {
            let r = d.hi;
            let w = r - l;
            let sign = if s <= l { 1.0 } else { -1.0 };
            // per root: (distance to l if below, distance to r if above)
            let below: Vec<Option<f64>> = roots.iter().map(|&p| (p <= l).then(|| l - p)).collect();
            let above: Vec<Option<f64>> = roots.iter().map(|&p| (p >= r).then(|| p - r)).collect();
            let near_l = below.iter().flatten().filter(|&&g| g > 0.0).fold(f64::INFINITY, |m, &g| m.min(g));
            let near_r = above.iter().flatten().filter(|&&g| g > 0.0).fold(f64::INFINITY, |m, &g| m.min(g));
            let cuts_l = geometric_cuts(near_l, w);
            let cuts_r = geometric_cuts(near_r, w);
            // pieces as (offset from l, offset from r, half width)
            let mut pieces = Vec::new();
            let mut prev = 0.0;
            for &c in &cuts_l {
                pieces.push((prev, w - c, 0.5 * (c - prev)));
                prev = c;
            }
            let left_end = prev;
            let mut prev_r = 0.0;
            let mut right_pieces = Vec::new();
            for &c in &cuts_r {
                right_pieces.push((w - c, prev_r, 0.5 * (c - prev_r)));
                prev_r = c;
            }
            pieces.push((left_end, prev_r, 0.5 * (w - left_end - prev_r)));
            pieces.extend(right_pieces);
            let mut total = Estimate { value: 0.0, error: 0.0 };
            for (ol, or, half) in pieces {
                let f = |dl: f64, dr: f64| {
                    let dist = |j: usize| match (below[j], above[j]) {
                        (Some(g), _) => g + ol + dl,
                        (_, Some(g)) => g + or + dr,
                        _ => f64::NAN,
                    };
                    kernel(dist(0), dist(1), dist(2), k, sign)
                };
                let e = tanh_sinh(half, f, tol, MAX_LEVEL).ok_or_else(fail)?;
                total.value += e.value;
                total.error += e.error;
            }
            Ok(total)
        }
        None => {
            let r = d.hi;
            let gaps: Vec<f64> = roots.iter().map(|&p| p - r).collect();
            let scale = family.a - r;
            let near = gaps.iter().filter(|&&g| g > 0.0).fold(f64::INFINITY, |m, &g| m.min(g));
            let mut cuts = Vec::new();
            if near < scale / 16.0 {
                let mut o = near * 8.0;
                while o < scale {
                    cuts.push(o);
                    o *= 8.0;
                }
            }
            let mut total = Estimate { value: 0.0, error: 0.0 };
            let mut prev = 0.0;
            for &c in &cuts {
                // λ runs over [r − c, r − prev]; dr is measured from r − prev
                let base = prev;
                let f = |_dl: f64, dr: f64| kernel(gaps[0] + base + dr, gaps[1] + base + dr, gaps[2] + base + dr, k, -1.0);
                let e = tanh_sinh(0.5 * (c - prev), f, tol, MAX_LEVEL).ok_or_else(fail)?;
                total.value += e.value;
                total.error += e.error;
                prev = c;
            }
            let base = prev;
            let f = |x: f64| kernel(gaps[0] + base + x, gaps[1] + base + x, gaps[2] + base + x, k, -1.0);
            let e = exp_sinh(scale.max(base), f, tol, MAX_LEVEL).ok_or_else(fail)?;
            total.value += e.value;
            total.error += e.error;
            Ok(total)
        }
    }
}

/// Offsets δ·8^j (j ≥ 1) below w/4 when a root sits at distance δ < w/16.
fn geometric_cuts(delta: f64, w: f64) -> Vec<f64> {
    let mut cuts = Vec::new();
    if delta < w / 16.0 {
        let mut o = delta * 8.0;
        while o < w / 4.0 {
            cuts.push(o);
            o *= 8.0;
        }
    }
    cuts
}

/// ξ_D(s) or its k-th derivative, with an error estimate.
pub fn xi_estimate(d: &Interval, family: &ConicFamily, s: f64, k: usize) -> Result<Estimate, QuadratureError> {
    let r = raw_integral(d, family, s, k)?;
    let c = derivative_coefficient(k);
    Ok(Estimate { value: c * r.value, error: c * r.error })
}

pub fn xi(d: &Interval, family: &ConicFamily, s: f64) -> Result<f64, QuadratureError> {
    xi_estimate(d, family, s, 0).map(|e| e.value)
}

pub fn xi_derivative(d: &Interval, family: &ConicFamily, s: f64, k: usize) -> Result<f64, QuadratureError> {
    xi_estimate(d, family, s, k).map(|e| e.value)
}

/// The period ℓ(s), checked against its second expression.
pub fn ell(family: &ConicFamily, s: f64) -> Result<f64, QuadratureError> {
    let (first, second) = ell_pair(family, s)?;
    let scale = first.abs().max(second.abs());
    if (first - second).abs() > tolerances::PERIOD_AGREEMENT * scale {
        return Err(QuadratureError::ConsistencyFailure { s, first, second });
    }
    Ok(match regime(family, s)? {
        Regime::Elliptic => first,
        Regime::Hyperbolic => second,
    })
}

/// Both period expressions: (∫_b^a, ∫_{−∞}^s) or (∫_s^a, ∫_{−∞}^b).
pub fn ell_pair(family: &ConicFamily, s: f64) -> Result<(f64, f64), QuadratureError> {
    let (a, b) = (family.a, family.b);
    Ok(match regime(family, s)? {
        Regime::Elliptic => (xi(&Interval::new(b, a), family, s)?, xi(&Interval::below(s), family, s)?),
        Regime::Hyperbolic => (xi(&Interval::new(s, a), family, s)?, xi(&Interval::below(b), family, s)?),
    })
}

type Key = (u64, u64, u64, usize);

/// Caching evaluator bound to one conic family.
///
/// Safe to share between threads; the cache is keyed by the exact bit
/// patterns of the interval, s and the derivative order.
#[derive(Debug)]
pub struct Quadrature {
    pub family: ConicFamily,
    k_max: usize,
    cache: Mutex<HashMap<Key, Estimate>>,
}

impl Quadrature {
    pub fn new(family: ConicFamily) -> Self {
        Self::with_k_max(family, tolerances::K_MAX)
    }

    pub fn with_k_max(family: ConicFamily, k_max: usize) -> Self {
        Quadrature { family, k_max, cache: Mutex::new(HashMap::new()) }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Raises the derivative limit; never lowers it.
    pub fn raise_k_max(&mut self, k: usize) {
        self.k_max = self.k_max.max(k);
    }

    pub fn xi(&self, d: &Interval, s: f64, k: usize) -> Result<Estimate, QuadratureError> {
        if k > self.k_max {
            return Err(QuadratureError::OrderTooHigh { k, k_max: self.k_max });
        }
        let (lo, hi) = d.key();
        let key = (lo, hi, s.to_bits(), k);
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return Ok(*e);
        }
        let e = xi_estimate(d, &self.family, s, k)?;
        self.cache.lock().unwrap().insert(key, e);
        Ok(e)
    }

    /// k-th derivative of ℓ at s.
    pub fn ell(&self, s: f64, k: usize) -> Result<Estimate, QuadratureError> {
        let d = ell_interval(&self.family, s)?;
        self.xi(&d, s, k)
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

/// Σ c_j ξ_{D_j} + c·ℓ, kept in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineCombination {
    pub terms: Vec<(f64, Interval)>,
    pub ell: f64,
}

impl AffineCombination {
    pub fn xi(d: Interval) -> Self {
        AffineCombination { terms: vec![(1.0, d)], ell: 0.0 }
    }

    pub fn ell() -> Self {
        AffineCombination { terms: vec![], ell: 1.0 }
    }

    /// ℓ − ξ_D.
    pub fn ell_minus(d: Interval) -> Self {
        AffineCombination { terms: vec![(-1.0, d)], ell: 1.0 }
    }

    pub fn is_pure_ell(&self) -> bool {
        self.terms.is_empty() && self.ell == 1.0
    }

    pub fn scaled(&self, c: f64) -> Self {
        AffineCombination { terms: self.terms.iter().map(|&(t, d)| (c * t, d)).collect(), ell: c * self.ell }.canonical()
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        AffineCombination { terms, ell: self.ell + other.ell }.canonical()
    }

    /// Sorted terms, equal intervals merged, zero coefficients dropped.
    pub fn canonical(&self) -> Self {
        let mut terms: Vec<(f64, Interval)> = Vec::new();
        let mut sorted = self.terms.clone();
        sorted.sort_by(|u, v| u.1.sort_key().partial_cmp(&v.1.sort_key()).unwrap());
        for (c, d) in sorted {
            match terms.last_mut() {
                Some(last) if last.1.key() == d.key() => last.0 += c,
                _ => terms.push((c, d)),
            }
        }
        terms.retain(|t| t.0 != 0.0);
        AffineCombination { terms, ell: self.ell }
    }

    /// k-th derivative at s. The ℓ part uses the fixed-endpoint interval of
    /// the regime.
    pub fn eval(&self, q: &Quadrature, s: f64, k: usize) -> Result<Estimate, QuadratureError> {
        let mut v = 0.0;
        let mut err = 0.0;
        let mut mag = 0.0;
        for (c, d) in &self.terms {
            let e = q.xi(d, s, k)?;
            v += c * e.value;
            err += c.abs() * e.error;
            mag += (c * e.value).abs();
        }
        if self.ell != 0.0 {
            let e = q.ell(s, k)?;
            v += self.ell * e.value;
            err += self.ell.abs() * e.error;
            mag += (self.ell * e.value).abs();
        }
        // cancellation in the sum costs relative precision of the parts
        err += 4.0 * f64::EPSILON * mag;
        Ok(Estimate { value: v, error: err })
    }

    pub fn value(&self, q: &Quadrature, s: f64) -> Result<f64, QuadratureError> {
        self.eval(q, s, 0).map(|e| e.value)
    }
}

impl fmt::Display for AffineCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.ell != 0.0 {
            if self.ell == 1.0 {
                write!(f, "ell")?;
            } else {
                write!(f, "{}*ell", self.ell)?;
            }
            first = false;
        }
        for (c, d) in &self.terms {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if first {
                if *c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag == 1.0 {
                write!(f, "xi{d}")?;
            } else {
                write!(f, "{mag}*xi{d}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam() -> ConicFamily {
        ConicFamily::new(2.0, 1.0).unwrap()
    }

    #[test]
    fn coefficients() {
        assert_eq!(derivative_coefficient(0), 1.0);
        assert_eq!(derivative_coefficient(1), 0.5);
        assert_eq!(derivative_coefficient(2), 0.75);
        assert_eq!(derivative_coefficient(3), 15.0 / 8.0);
    }

    #[test]
    fn period_expressions_agree() {
        let f = fam();
        let (u, v) = ell_pair(&f, 0.5).unwrap();
        assert!((u - v).abs() < 1e-12 * u, "{u} {v}");
        let (u, v) = ell_pair(&f, 1.5).unwrap();
        assert!((u - v).abs() < 1e-12 * u, "{u} {v}");
    }

    #[test]
    fn nested_domains_order() {
        let f = fam();
        assert!(xi(&Interval::new(1.0, 1.5), &f, 0.5).unwrap() < xi(&Interval::new(1.0, 2.0), &f, 0.5).unwrap());
    }

    #[test]
    fn domain_checks() {
        let f = fam();
        assert!(matches!(xi(&Interval::new(0.4, 1.2), &f, 0.5), Err(QuadratureError::DomainViolation { .. })));
        assert!(matches!(xi(&Interval::new(1.2, 1.8), &f, 1.5), Err(QuadratureError::DomainViolation { .. })));
        assert!(matches!(ell(&f, 1.0), Err(QuadratureError::DegenerateCaustic { .. })));
        assert!(matches!(ell(&f, 2.5), Err(QuadratureError::DegenerateCaustic { .. })));
        assert!(matches!(
            xi(&Interval::below(0.5 - 1e-10), &f, 0.5),
            Err(QuadratureError::EndpointTooClose { .. })
        ));
        assert!(matches!(
            xi_derivative(&Interval::below(0.5), &f, 0.5, 1),
            Err(QuadratureError::SingularDerivative { .. })
        ));
    }

    #[test]
    fn first_derivative_positive_right_of_s() {
        assert!(xi_derivative(&Interval::new(1.0, 2.0), &fam(), 0.5, 1).unwrap() > 0.0);
    }

    #[test]
    fn additivity() {
        let f = fam();
        for (s, parts) in [(0.5, [(1.0, 1.3), (1.3, 2.0)]), (1.5, [(1.5, 1.8), (1.8, 2.0)])] {
            let whole = xi(&Interval::new(parts[0].0, parts[1].1), &f, s).unwrap();
            let sum: f64 = parts.iter().map(|&(l, h)| xi(&Interval::new(l, h), &f, s).unwrap()).sum();
            assert!((whole - sum).abs() < 1e-10 * whole);
        }
        let whole = xi(&Interval::below(0.4), &f, 0.5).unwrap();
        let sum = xi(&Interval::below(0.1), &f, 0.5).unwrap() + xi(&Interval::new(0.1, 0.4), &f, 0.5).unwrap();
        assert!((whole - sum).abs() < 1e-10 * whole);
    }

    #[test]
    fn cache_reuses_values() {
        let q = Quadrature::new(fam());
        let d = Interval::new(1.0, 2.0);
        let u = q.xi(&d, 0.5, 1).unwrap();
        let v = q.xi(&d, 0.5, 1).unwrap();
        assert_eq!(u, v);
        assert_eq!(q.cache_len(), 1);
        assert!(matches!(q.xi(&d, 0.5, 5), Err(QuadratureError::OrderTooHigh { .. })));
    }

    #[test]
    fn canonical_combination() {
        let d = Interval::new(1.2, 2.0);
        let c = AffineCombination::xi(d).plus(&AffineCombination::xi(d).scaled(-1.0));
        assert!(c.terms.is_empty());
        assert_eq!(AffineCombination::ell_minus(Interval::below(0.5)).to_string(), "ell - xi(-inf, 0.5)");
    }
}
