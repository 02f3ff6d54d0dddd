use num_complex::Complex64;
use proptest::prelude::*;

use elliptika::oscint::{fourier_singular, FourierJob, Region};
use elliptika::specfun::{MellinFunction, F, H1};

fn job<'a>(c: f64, d: f64, region: Region, h: &'a (dyn Fn(f64) -> f64 + Sync), phi: &'a dyn MellinFunction) -> FourierJob<'a> {
    FourierJob { c, d, a: 1.0, region, h, phi, tol: 1e-11, radius: 2.0 }
}

fn semicircle(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

fn outside_profile(x: f64) -> f64 {
    let q = x * x - 1.0;
    if q <= 0.0 || x.abs() >= 2.0 {
        return 0.0;
    }
    q.sqrt() * (-1.0 / (1.0 - (x / 2.0).powi(2))).exp() * (1.0 + 0.2 * x)
}

#[test]
fn inside_semicircle_against_reference() {
    // mpmath, 20 digits
    let v = fourier_singular(&job(0.3, 2.5, Region::Inside, &semicircle, &F)).unwrap().value;
    assert!((v.re - 0.030326558329357233).abs() < 1e-10, "{v}");
    assert!(v.im.abs() < 1e-12, "{v}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_in_profile(c in 0.02f64..1.5, d in 0.3f64..20.0, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let h1 = |x: f64| semicircle(x) * (1.0 + x);
        let h2 = |x: f64| semicircle(x) * x * x;
        let mix = |x: f64| s * h1(x) + t * h2(x);
        let a = fourier_singular(&job(c, d, Region::Inside, &h1, &F)).unwrap().value;
        let b = fourier_singular(&job(c, d, Region::Inside, &h2, &F)).unwrap().value;
        let m = fourier_singular(&job(c, d, Region::Inside, &mix, &F)).unwrap().value;
        prop_assert!((m - (a * s + b * t)).norm() < 1e-9);
    }

    #[test]
    fn conjugate_under_frequency_flip(c in 0.02f64..1.5, d in 0.3f64..20.0, outside in any::<bool>()) {
        let region = if outside { Region::Outside } else { Region::Inside };
        let h: &(dyn Fn(f64) -> f64 + Sync) = if outside { &outside_profile } else { &|x: f64| semicircle(x) * (1.0 + x) };
        let a = fourier_singular(&job(c, d, region, h, &H1)).unwrap().value;
        let b = fourier_singular(&job(c, -d, region, h, &H1)).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-9, "{} {}", a, b);
    }

    #[test]
    fn even_profile_gives_real_transform(c in 0.02f64..1.5, d in 0.3f64..20.0) {
        let v = fourier_singular(&job(c, d, Region::Inside, &semicircle, &F)).unwrap().value;
        prop_assert!(v.im.abs() < 1e-10);
    }
}

#[test]
fn rejects_bad_jobs() {
    let h = semicircle;
    assert!(fourier_singular(&job(0.0, 1.0, Region::Inside, &h, &F)).is_err());
    assert!(fourier_singular(&job(1.0, 0.0, Region::Inside, &h, &F)).is_err());
    let mut j = job(1.0, 1.0, Region::Outside, &h, &F);
    j.radius = 1.0;
    assert!(fourier_singular(&j).is_err());
    j.radius = 2.0;
    j.tol = 1e-15;
    assert!(fourier_singular(&j).is_err());
    assert_eq!(fourier_singular(&job(1.0, 1.0, Region::Inside, &|_| 0.0, &F)).unwrap().value, Complex64::new(0.0, 0.0));
}
