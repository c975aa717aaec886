//! Independent oracles and fixtures shared by the integration suites.

#![allow(dead_code)]

use std::f64::consts::PI;

use nibbled::conic::{NibbledEllipse, TableSpec};
use nibbled::iet::Iet;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre on [lo, hi] with `panels` equal pieces.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, nodes: &[(f64, f64)]) -> f64 {
    let h = (hi - lo) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let c = lo + (p as f64 + 0.5) * h;
        for &(x, w) in nodes {
            sum += w * f(c + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Parameters of the confocal family and the caustic.
#[derive(Clone, Copy, Debug)]
pub struct Conic {
    pub a: f64,
    pub b: f64,
}

impl Conic {
    /// |(a−λ)(b−λ)(s−λ)|^{−1/2}, with the distances to the roots passed in so
    /// that roots sitting on an endpoint cancel exactly.
    fn e_with(&self, s: f64, lam: f64, lo: Option<(f64, f64)>, hi: Option<(f64, f64)>) -> f64 {
        let dist = |r: f64| {
            if let Some((p, d)) = lo {
                if r == p {
                    return d;
                }
            }
            if let Some((q, d)) = hi {
                if r == q {
                    return d;
                }
            }
            (r - lam).abs()
        };
        1.0 / (dist(self.a) * dist(self.b) * dist(s)).sqrt()
    }

    /// ∫_lo^hi e(λ,s) dλ via λ = lo + (hi−lo) sin²(θ/2), θ ∈ (0, π).
    pub fn xi_finite(&self, s: f64, lo: f64, hi: f64) -> f64 {
        let nodes = gauss_legendre(40);
        let w = hi - lo;
        let f = |th: f64| {
            let dl = w * (0.5 * th).sin().powi(2);
            let dh = w * (0.5 * th).cos().powi(2);
            let lam = lo + dl;
            0.5 * w * th.sin() * self.e_with(s, lam, Some((lo, dl)), Some((hi, dh)))
        };
        integrate(f, 0.0, PI, 64, &nodes)
    }

    /// ∫_{−∞}^hi e(λ,s) dλ via λ = hi − tan²φ, φ ∈ (0, π/2).
    pub fn xi_tail(&self, s: f64, hi: f64) -> f64 {
        let nodes = gauss_legendre(40);
        let f = |ph: f64| {
            let t = ph.tan();
            let d = t * t;
            let lam = hi - d;
            2.0 * t / ph.cos().powi(2) * self.e_with(s, lam, None, Some((hi, d)))
        };
        integrate(f, 0.0, 0.5 * PI, 64, &nodes)
    }

    pub fn xi(&self, s: f64, lo: Option<f64>, hi: f64) -> f64 {
        match lo {
            Some(lo) => self.xi_finite(s, lo, hi),
            None => self.xi_tail(s, hi),
        }
    }

    /// ½∬_{D1×D2} e(λ1)e(λ2)(λ2−λ1)/((λ1−s)(λ2−s)) over two finite
    /// intervals away from s, as a tensor Gauss–Legendre sum.
    pub fn bracket_double(&self, s: f64, d1: (f64, f64), d2: (f64, f64)) -> f64 {
        let nodes = gauss_legendre(40);
        let pts = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            let w = hi - lo;
            let panels = 32;
            let h = PI / panels as f64;
            let mut v = Vec::new();
            for p in 0..panels {
                let c = (p as f64 + 0.5) * h;
                for &(x, wt) in &nodes {
                    let th = c + 0.5 * h * x;
                    let dl = w * (0.5 * th).sin().powi(2);
                    let dh = w * (0.5 * th).cos().powi(2);
                    let lam = lo + dl;
                    let jac = 0.5 * h * wt * 0.5 * w * th.sin();
                    v.push((lam, jac * self.e_with(s, lam, Some((lo, dl)), Some((hi, dh)))));
                }
            }
            v
        };
        let p1 = pts(d1.0, d1.1);
        let p2 = pts(d2.0, d2.1);
        let mut sum = 0.0;
        for &(l1, w1) in &p1 {
            for &(l2, w2) in &p2 {
                sum += w1 * w2 * (l2 - l1) / ((l1 - s) * (l2 - s));
            }
        }
        0.5 * sum
    }
}

/// ε_n by sorting every orbit point from scratch.
pub fn epsilon_by_sorting(t: &Iet, n: usize) -> f64 {
    let d = t.d();
    let mut pts: Vec<f64> = Vec::new();
    for i in 1..d {
        let mut x = t.b(i);
        for k in 0..=n {
            if k > 0 {
                x = t.apply(x).unwrap();
            }
            pts.push(x);
        }
    }
    if pts.len() < 2 {
        return t.total();
    }
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

pub fn symmetric_k1() -> NibbledEllipse {
    TableSpec::symmetric(2.0, 1.0, vec![2.0, 1.0], vec![0.0, 0.5]).build().unwrap()
}

pub fn symmetric_k2() -> NibbledEllipse {
    TableSpec::symmetric(2.0, 1.0, vec![2.0, 1.5, 1.0], vec![0.0, 0.3, 0.6]).build().unwrap()
}

pub fn asymmetric_k2_spec() -> TableSpec {
    serde_json::from_str(
        r#"{"a": 2.0, "b": 1.0, "quadrants": {
            "pp": {"alphas": [2.0, 1.6, 1.0], "betas": [0.0, 0.2, 0.5]},
            "pm": {"alphas": [2.0, 1.5, 1.0], "betas": [0.0, 0.3, 0.5]},
            "mp": {"alphas": [2.0, 1.4, 1.0], "betas": [0.0, 0.2, 0.4]},
            "mm": {"alphas": [2.0, 1.3, 1.0], "betas": [0.0, 0.3, 0.4]}}}"#,
    )
    .unwrap()
}

pub fn asymmetric_k2() -> NibbledEllipse {
    asymmetric_k2_spec().build().unwrap()
}

pub fn tables() -> Vec<(&'static str, NibbledEllipse)> {
    vec![("symmetric k=1", symmetric_k1()), ("symmetric k=2", symmetric_k2()), ("asymmetric k=2", asymmetric_k2())]
}

/// Relative difference with a floor on the scale.
pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

/// Largest departure from a slope ±1 line over pieces of a flattened
/// polyline. Pieces break where the signs of (Δu, Δv) change (folds at the
/// caustic or the boundary) or where u jumps by more than `wrap`; the step
/// across a break is skipped.
pub fn slope_one_deviation(pts: &[[f64; 2]], wrap: f64) -> f64 {
    let mut worst = 0.0f64;
    let mut start = 0usize;
    let mut pattern: Option<(bool, bool)> = None;
    for i in 1..pts.len() {
        let du = pts[i][0] - pts[i - 1][0];
        let dv = pts[i][1] - pts[i - 1][1];
        let pat = (du >= 0.0, dv >= 0.0);
        if du.abs() > wrap || pattern.is_some_and(|p| p != pat) {
            start = i;
            pattern = None;
            continue;
        }
        if pattern.is_none() {
            pattern = Some(pat);
            if i - 1 != start {
                start = i - 1;
            }
        }
        let sigma = if pat.0 == pat.1 { 1.0 } else { -1.0 };
        let (u0, v0) = (pts[start][0], pts[start][1]);
        worst = worst.max(((pts[i][0] - u0) - sigma * (pts[i][1] - v0)).abs());
    }
    worst
}
