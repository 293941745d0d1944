use std::f64::consts::PI;

use monobvp_core::boundary::DecayHint;
use monobvp_core::quadrature::{cauchy_integral, moment_integral, moment_integral_lebesgue, FrozenCauchy};
use monobvp_core::{BoundaryFunction, Error, MultiIndex, Multivector, Paravector, QuadratureError, QuadratureScheme, Signature};

fn sig(n: usize) -> Signature {
    Signature::new(n).unwrap()
}

fn pv(s: Signature, c: &[f64]) -> Paravector {
    Paravector::new(s, c).unwrap()
}

/// `1/(1 − iz)` for `z = x + iy`, as `(re, e1)` coefficients.
fn oracle(x: f64, y: f64) -> (f64, f64) {
    let (a, b) = (1.0 + y, -x);
    let d = a * a + b * b;
    (a / d, -b / d)
}

#[test]
fn residue_oracle_over_the_plane() {
    let s = sig(1);
    let c = BoundaryFunction::parse("1/(1+abs2(x))", s).unwrap();
    for (x, y) in [(0.0, 1.0), (0.4, 0.2), (-3.0, 0.05), (10.0, 2.0)] {
        let r = cauchy_integral(&c, &pv(s, &[x, y]), &QuadratureScheme::default()).unwrap();
        let (re, im) = oracle(x, y);
        assert!((r.value.scalar_part() - re).abs() < 1e-6, "{x},{y}: {}", r.value);
        assert!((r.value.coeff(1) - im).abs() < 1e-6, "{x},{y}: {}", r.value);
        assert!(r.total_error() < 1e-4);
    }
}

#[test]
fn refinement_converges() {
    let s = sig(1);
    let c = BoundaryFunction::parse("1/(1+abs2(x))", s).unwrap();
    let w = pv(s, &[0.2, 0.1]);
    let (re, _) = oracle(0.2, 0.1);
    let mut last = f64::INFINITY;
    for tol in [1e-3, 1e-6, 1e-9] {
        let scheme = QuadratureScheme { tolerance: tol, base_grid: 8, ..Default::default() };
        let r = cauchy_integral(&c, &w, &scheme).unwrap();
        let err = (r.value.scalar_part() - re).abs();
        assert!(err <= last.max(1e-9), "tol {tol}: {err}");
        last = err;
    }
    assert!(last < 1e-8);
}

#[test]
fn linear_in_the_datum() {
    let s = sig(2);
    let a = BoundaryFunction::parse("gauss(x)", s).unwrap();
    let b = BoundaryFunction::parse("x0*e1*gauss(x)", s).unwrap();
    let sum = BoundaryFunction::parse("2*gauss(x) - 3*x0*e1*gauss(x)", s).unwrap();
    let scheme = QuadratureScheme { base_grid: 32, ..Default::default() };
    let w = pv(s, &[0.3, -0.2, 0.8]);
    let va = cauchy_integral(&a, &w, &scheme).unwrap().value;
    let vb = cauchy_integral(&b, &w, &scheme).unwrap().value;
    let vs = cauchy_integral(&sum, &w, &scheme).unwrap().value;
    assert!(vs.approx_eq(&(va.scale(2.0) - vb.scale(3.0)), 1e-6));
}

#[test]
fn decays_like_the_kernel() {
    let s = sig(2);
    let c = BoundaryFunction::parse("gauss(x)", s).unwrap();
    let scheme = QuadratureScheme { base_grid: 32, ..Default::default() };
    let near = cauchy_integral(&c, &pv(s, &[0.0, 0.0, 100.0]), &scheme).unwrap().value.norm();
    let far = cauchy_integral(&c, &pv(s, &[0.0, 0.0, 1000.0]), &scheme).unwrap().value.norm();
    let order = (far / near).log10();
    assert!((order + 2.0).abs() < 1e-3, "{order}");
}

#[test]
fn moments() {
    let s = sig(1);
    let scheme = QuadratureScheme::default();
    let zero = MultiIndex::zero(s);
    let even = BoundaryFunction::parse("gauss(x)", s).unwrap();
    let m = moment_integral(&zero, &even, &scheme).unwrap();
    let want = Multivector::generator(s, 1).unwrap().scale(-PI.sqrt());
    assert!(m.value.approx_eq(&want, 1e-6), "{}", m.value);
    let l = moment_integral_lebesgue(&zero, &even, &scheme).unwrap();
    assert!((l.value.scalar_part() - PI.sqrt()).abs() < 1e-6);
    let odd = BoundaryFunction::parse("x0*gauss(x)", s).unwrap();
    assert!(moment_integral(&zero, &odd, &scheme).unwrap().value.norm() < 1e-8);
    // ∫ z1 e^{−x²} dx = −e1 ∫ x e^{−x²} = 0, and with x: ∫ x·(−x e1) e^{−x²} = −e1 √π/2
    let one = MultiIndex::new(s, &[1]).unwrap();
    let l = moment_integral_lebesgue(&one, &odd, &scheme).unwrap();
    assert!((l.value.coeff(1) + PI.sqrt() / 2.0).abs() < 1e-6, "{}", l.value);

    let s2 = sig(2);
    let g2 = BoundaryFunction::parse("gauss(x)", s2).unwrap();
    let m = moment_integral(&MultiIndex::zero(s2), &g2, &QuadratureScheme { base_grid: 32, ..Default::default() }).unwrap();
    assert!(m.value.approx_eq(&Multivector::generator(s2, 2).unwrap().scale(-PI), 1e-6), "{}", m.value);
}

#[test]
fn non_decaying_data_need_a_hint() {
    let s = sig(1);
    let flat = BoundaryFunction::parse("1", s).unwrap();
    let w = pv(s, &[0.0, 1.0]);
    assert_eq!(
        cauchy_integral(&flat, &w, &QuadratureScheme::default()).unwrap_err(),
        Error::Quadrature(QuadratureError::NonDecayingDatum)
    );
    let hinted = flat.with_decay(DecayHint::Power { exponent: 0.0, amplitude: 1.0 });
    let r = cauchy_integral(&hinted, &w, &QuadratureScheme::default()).unwrap();
    assert!(r.truncation_tail_bound.is_infinite());
    // the symmetric truncation is a principal value: S[1] = 1 above the plane
    assert!((r.value.scalar_part() - 1.0).abs() < 1e-3, "{}", r.value);
}

#[test]
fn frozen_rule_agrees_near_its_anchor() {
    let s = sig(1);
    let c = BoundaryFunction::parse("1/(1+abs2(x))", s).unwrap();
    let anchor = pv(s, &[0.3, 0.5]);
    let frozen = FrozenCauchy::new(&c, &anchor, &QuadratureScheme::default()).unwrap();
    assert!(frozen.eval(&anchor).unwrap().approx_eq(&frozen.anchor_result().value, 1e-12));
    let (re, im) = oracle(0.3001, 0.5);
    let v = frozen.eval(&pv(s, &[0.3001, 0.5])).unwrap();
    assert!((v.scalar_part() - re).abs() < 1e-6 && (v.coeff(1) - im).abs() < 1e-6);
}

#[test]
fn invalid_schemes() {
    let s = sig(1);
    let c = BoundaryFunction::parse("gauss(x)", s).unwrap();
    let bad = QuadratureScheme { base_grid: 2, ..Default::default() };
    assert!(matches!(
        cauchy_integral(&c, &pv(s, &[0.0, 1.0]), &bad),
        Err(Error::Quadrature(QuadratureError::InvalidScheme(_)))
    ));
    assert_eq!(
        cauchy_integral(&c, &pv(s, &[0.0, 0.0]), &QuadratureScheme::default()).unwrap_err(),
        Error::Quadrature(QuadratureError::EvaluationOnHyperplane)
    );
}
