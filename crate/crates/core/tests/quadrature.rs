mod common;

use common::{gauss_legendre, integrate, rel, Conic};
use nibbled::conic::ConicFamily;
use nibbled::quadrature::{derivative_coefficient, ell, ell_pair, xi, xi_derivative, Interval, Quadrature};
use proptest::prelude::*;

fn fam() -> ConicFamily {
    ConicFamily::new(2.0, 1.0).unwrap()
}

const ORACLE: Conic = Conic { a: 2.0, b: 1.0 };

#[test]
fn gauss_legendre_is_exact_on_polynomials() {
    let nodes = gauss_legendre(10);
    let w: f64 = nodes.iter().map(|n| n.1).sum();
    assert!((w - 2.0).abs() < 1e-14);
    // degree 19 is the limit of a 10-point rule
    let v = integrate(|x| x.powi(18) + x.powi(19), -1.0, 1.0, 1, &nodes);
    assert!((v - 2.0 / 19.0).abs() < 1e-14);
}

#[test]
fn derivative_coefficients_are_double_factorials() {
    let frozen = [1.0, 0.5, 0.75, 1.875, 6.5625];
    for (k, &c) in frozen.iter().enumerate() {
        assert_eq!(derivative_coefficient(k), c);
    }
}

#[test]
fn oracle_matches_on_root_ends() {
    // intervals ending exactly on a, b or s
    let f = fam();
    for (d, s) in [
        (Interval::new(1.0, 2.0), 0.5),
        (Interval::new(0.2, 0.5), 0.5),
        (Interval::below(0.5), 0.5),
        (Interval::new(1.5, 2.0), 1.5),
        (Interval::below(1.0), 1.5),
        (Interval::new(-3.0, 1.0), 1.5),
    ] {
        let v = xi(&d, &f, s).unwrap();
        let o = ORACLE.xi(s, d.lo, d.hi);
        assert!(rel(v, o) < 1e-11, "{d} s={s}: {v} vs {o}");
    }
}

#[test]
fn period_of_circle_limit() {
    // near s = 0 the elliptic period tends to ∫_b^a dλ/sqrt((a−λ)(λ−b)λ) with s→0
    let f = fam();
    let o = ORACLE.xi_finite(1e-12, 1.0, 2.0);
    assert!(rel(ell(&f, 1e-3).unwrap(), o) < 1e-3);
}

fn elliptic_case() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.05f64..0.95, 0.0f64..1.0, 0.0f64..1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finite_xi_matches_oracle((s, u, v) in elliptic_case(), above in any::<bool>()) {
        let f = fam();
        let (lo, hi) = if above {
            let lo = 1.0 + 0.9 * u;
            (lo, lo + (2.0 - lo) * (0.1 + 0.9 * v))
        } else {
            let hi = s - 0.02 - (s + 0.5) * 0.5 * u;
            (hi - 0.05 - 2.0 * v, hi)
        };
        let d = Interval::new(lo, hi);
        let x = xi(&d, &f, s).unwrap();
        prop_assert!(rel(x, ORACLE.xi(s, Some(lo), hi)) < 1e-10);
    }

    #[test]
    fn tail_xi_matches_oracle(s in 1.05f64..1.95, u in 0.0f64..1.0) {
        let f = fam();
        let hi = 1.0 - 2.0 * u;
        let x = xi(&Interval::below(hi), &f, s).unwrap();
        prop_assert!(rel(x, ORACLE.xi(s, None, hi)) < 1e-10);
    }

    #[test]
    fn period_identity(s in prop_oneof![0.001f64..0.999, 1.001f64..1.999]) {
        let (p, q) = ell_pair(&fam(), s).unwrap();
        prop_assert!(rel(p, q) <= 1e-7);
        prop_assert!(p > 0.0 && q > 0.0);
    }

    #[test]
    fn additivity(s in 0.1f64..0.9, cut in 0.05f64..0.95) {
        let f = fam();
        let m = 1.0 + cut;
        let whole = xi(&Interval::new(1.0, 2.0), &f, s).unwrap();
        let parts = xi(&Interval::new(1.0, m), &f, s).unwrap() + xi(&Interval::new(m, 2.0), &f, s).unwrap();
        prop_assert!(rel(whole, parts) <= 1e-10);
        // the lower coordinate through the tail: ∫_β^s = ∫_{−∞}^s − ∫_{−∞}^β
        let beta = s * cut;
        let direct = xi(&Interval::new(beta, s), &f, s).unwrap();
        let via_tail = xi(&Interval::below(s), &f, s).unwrap() - xi(&Interval::below(beta), &f, s).unwrap();
        prop_assert!(rel(direct, via_tail) <= 1e-10);
    }

    #[test]
    fn derivative_matches_finite_differences(s in 1.1f64..1.9, k in 1usize..=2) {
        let f = fam();
        let d = Interval::below(0.8);
        let h = 1e-3;
        let g = |x: f64| xi_derivative(&d, &f, x, k - 1).unwrap();
        let c = |h: f64| (g(s + h) - g(s - h)) / (2.0 * h);
        let fd = (4.0 * c(0.5 * h) - c(h)) / 3.0;
        prop_assert!(rel(xi_derivative(&d, &f, s, k).unwrap(), fd) <= 1e-6);
    }

    #[test]
    fn cached_values_are_exact(s in 0.1f64..0.9) {
        let q = Quadrature::new(fam());
        let d = Interval::new(1.2, 1.7);
        let a = q.xi(&d, s, 1).unwrap();
        let b = q.xi(&d, s, 1).unwrap();
        prop_assert_eq!(a, b);
        prop_assert_eq!(a.value, xi_derivative(&d, &fam(), s, 1).unwrap());
    }
}
