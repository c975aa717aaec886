//! Double-exponential quadrature rules.
//!
//! Both rules hand the integrand distances rather than abscissae so that
//! inverse-square-root endpoint singularities are evaluated without
//! cancellation.

use std::f64::consts::FRAC_PI_2;

/// Quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

const TANH_SINH_T: f64 = 4.0;
const EXP_SINH_T: f64 = 5.0;
const MIN_LEVEL: u32 = 3;

/// Integrates over an interval of half-width `half`.
///
/// `f(dl, dr)` receives the distances of the node from the left and right
/// endpoints. Returns `None` if `rel_tol` is not met by `max_level`.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(half: f64, f: F, rel_tol: f64, max_level: u32) -> Option<Estimate> {
    let node = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        let small = half * 2.0 * e / (1.0 + e);
        let big = half * 2.0 / (1.0 + e);
        if small == 0.0 {
            return 0.0;
        }
        let w = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let (dl, dr) = if u >= 0.0 { (big, small) } else { (small, big) };
        w * f(dl, dr)
    };
    run_levels(node, TANH_SINH_T, TANH_SINH_T, half, rel_tol, max_level)
}

/// Integrates over (0, ∞) in the variable x = scale·exp(π/2·sinh t).
///
/// `f(x)` receives the distance from the finite endpoint.
pub fn exp_sinh<F: Fn(f64) -> f64>(scale: f64, f: F, rel_tol: f64, max_level: u32) -> Option<Estimate> {
    let node = |t: f64| -> f64 {
        let x = scale * (FRAC_PI_2 * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return 0.0;
        }
        x * FRAC_PI_2 * t.cosh() * f(x)
    };
    run_levels(node, EXP_SINH_T, EXP_SINH_T, 1.0, rel_tol, max_level)
}

fn run_levels<N: Fn(f64) -> f64>(node: N, t_lo: f64, t_hi: f64, jac: f64, rel_tol: f64, max_level: u32) -> Option<Estimate> {
    // level 0: unit step on the full range
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    let n_lo = t_lo.floor() as i64;
    let n_hi = t_hi.floor() as i64;
    for j in -n_lo..=n_hi {
        let v = node(j as f64);
        if !v.is_finite() {
            return None;
        }
        sum += v;
        abs_sum += v.abs();
    }
    let mut h = 1.0;
    let mut prev = sum * h * jac;
    for level in 1..=max_level {
        h *= 0.5;
        let mut add = 0.0;
        let mut j = 1i64;
        loop {
            let t = j as f64 * h;
            if t > t_lo && t > t_hi {
                break;
            }
            if t <= t_hi {
                let v = node(t);
                if !v.is_finite() {
                    return None;
                }
                add += v;
                abs_sum += v.abs();
            }
            if t <= t_lo {
                let v = node(-t);
                if !v.is_finite() {
                    return None;
                }
                add += v;
                abs_sum += v.abs();
            }
            j += 2;
        }
        sum += add;
        let cur = sum * h * jac;
        let diff = (cur - prev).abs();
        let floor = 8.0 * f64::EPSILON * abs_sum * h * jac.abs();
        if level >= MIN_LEVEL && (diff <= rel_tol * cur.abs() || diff <= floor) {
            return Some(Estimate { value: cur, error: diff.max(floor) });
        }
        prev = cur;
    }
    None
}
