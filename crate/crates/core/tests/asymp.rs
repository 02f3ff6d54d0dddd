use num_complex::Complex64;
use proptest::prelude::*;

use elliptika::asymp::{
    a_transform, error_law, law_expansion, law_profile, leading_term, AsymptoticExpansion, Branch,
    ExpansionEvaluator, ExpansionRequest,
};
use elliptika::oscint::{fourier_singular, FourierJob, Region};
use elliptika::specfun::{F, H0};

const R: f64 = 3.0;
const K: f64 = 4.0;

fn bump(x: f64) -> f64 {
    if x.abs() >= R {
        return 0.0;
    }
    (K / (1.0 - 1.0 / (R * R)) - K / (1.0 - x * x / (R * R))).exp()
}

#[test]
fn leading_term_against_quadrature() {
    // h = √|1−x²|·b(x) on the whole line, b(±1) = 1
    let e = AsymptoticExpansion::symmetric(1.0, vec![2f64.sqrt()]).unwrap();
    let h = |x: f64| (1.0 - x * x).abs().sqrt() * bump(x);
    let c = 0.01;
    for d in [32.0, -32.0, 64.0] {
        let mut total = Complex64::new(0.0, 0.0);
        for region in [Region::Inside, Region::Outside] {
            let job = FourierJob { c, d, a: 1.0, region, h: &h, phi: &F, tol: 1e-12, radius: R };
            total += fourier_singular(&job).unwrap().value;
        }
        let lt = leading_term(&e, &F, c, d).unwrap();
        assert!((total - lt).norm() < 0.02 * total.norm(), "D={d}: {total} vs {lt}");
    }
}

#[test]
fn leading_term_vanishes_for_a_zero_mod_four() {
    let e = AsymptoticExpansion::symmetric(0.0, vec![1.0]).unwrap();
    assert_eq!(leading_term(&e, &F, 0.1, 7.0).unwrap(), Complex64::new(0.0, 0.0));
    assert!(leading_term(&e, &H0, 0.1, 7.0).is_err());
}

#[test]
fn error_slopes_match_order() {
    let ds = [8.0, 16.0, 32.0, 64.0, 128.0];
    for (a, m, outside) in [(1.0, 0, false), (0.0, 1, false), (1.0, 1, true)] {
        let r = error_law(a, m, 1.0, outside, &ds, &F, 1e-12).unwrap();
        let s = r.slope.unwrap();
        assert!((s - r.expected).abs() < 0.4, "a={a} M={m} outside={outside}: {s} vs {}", r.expected);
    }
}

#[test]
fn alternate_branch_is_rejected() {
    let e = law_expansion(1.0, false, 3).unwrap();
    let req = ExpansionRequest::new(1, 1.0, 0.0);
    let mut ev = ExpansionEvaluator::new(&e, &req, &F).unwrap();
    let (c, d) = ((1.0f64 / 32.0).sqrt(), 32.0);
    let h = law_profile(1.0, false);
    let job = FourierJob { c, d, a: 1.0, region: Region::Inside, h: &h, phi: &F, tol: 1e-12, radius: R };
    let oracle = fourier_singular(&job).unwrap().value;
    let good = (ev.inside(c, d).unwrap() - oracle).norm();
    ev.branch = Branch::Alternate;
    match ev.inside(c, d) {
        Err(_) => {}
        Ok(v) => assert!((v - oracle).norm() > 10.0 * good, "alternate branch agrees with the oracle"),
    }
}

#[test]
fn request_validation() {
    let e = AsymptoticExpansion::symmetric(1.0, vec![1.0]).unwrap();
    assert!(ExpansionEvaluator::new(&e, &ExpansionRequest::new(0, 1.0, 0.0), &H0).is_err());
    assert!(ExpansionEvaluator::new(&e, &ExpansionRequest::new(3, 1.0, 0.5), &F).is_err());
    assert!(ExpansionEvaluator::new(&e, &ExpansionRequest::new(0, -1.0, 0.5), &F).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contour_abscissa_does_not_matter(tau in 0.4f64..2.5, x in prop_oneof![0.3f64..20.0, -20.0f64..-0.3]) {
        let e = AsymptoticExpansion::symmetric(1.0, vec![2f64.sqrt(), -0.3]).unwrap();
        let a = a_transform(&e, 0, &ExpansionRequest::new(0, 1.0, 0.0), &F, x).unwrap();
        let b = a_transform(&e, 0, &ExpansionRequest::new(0, tau, 0.0), &F, x).unwrap();
        prop_assert!((a - b).norm() < 1e-8 * a.norm().max(1e-3), "{} {}", a, b);
    }
}
