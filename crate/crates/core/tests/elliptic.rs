use proptest::prelude::*;
use std::sync::Arc;

use elliptika::elliptic::{
    envelope_check, envelope_grid, l_series, make_theta, sigma_square, sigma_xi, spread_primes, EnvelopeKind,
    Method, Term5Sign, ThetaProfile, TruncationPolicy,
};
use elliptika::ntheory::gcd;

fn small_policy() -> TruncationPolicy {
    TruncationPolicy { lambda: 4.0, phi: 2.0, chi0: 4.0, chi: 16.0, ..TruncationPolicy::default() }
}

fn run(p: u64, theta: &ThetaProfile, policy: &TruncationPolicy) -> elliptika::elliptic::EllipticReport {
    sigma_xi(p, theta, policy, Method::Oracle, Term5Sign::Literal).unwrap()
}

#[test]
fn linear_in_theta() {
    let t = make_theta();
    let pol = small_policy();
    let a = run(101, &t, &pol);
    let b = run(101, &t.scaled(2.0), &pol);
    assert!((b.sigma_xi - 2.0 * a.sigma_xi).abs() < 1e-12 * a.sigma_xi.abs().max(1e-3));
    let z = run(101, &t.combine(1.0, &t, -1.0), &pol);
    assert!(z.sigma_xi.abs() < 1e-14, "{}", z.sigma_xi);
}

#[test]
fn zero_profile_gives_zero() {
    let zero: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|_| 0.0);
    let t = ThetaProfile::custom(zero.clone(), zero.clone(), 1.0, zero, 1.0).unwrap();
    let r = run(53, &t, &small_policy());
    assert_eq!(r.sigma_xi, 0.0);
    assert_eq!(r.sigma_square, 0.0);
}

#[test]
fn report_is_consistent() {
    let r = run(101, &make_theta(), &small_policy());
    let sum: f64 = r.per_term_breakdown.iter().sum();
    assert!((sum - r.sigma_xi).abs() < 1e-9);
    assert!(r.sigma_xi_imag.abs() < 1e-8 * r.sigma_xi.abs().max(1e-3), "{}", r.sigma_xi_imag);
    assert!(r.lattice_points > 0);
    assert!(r.sigma0_note.contains("Sigma(0)"));
}

#[test]
fn region_split_only_moves_mass() {
    let t = make_theta();
    let mut reports = Vec::new();
    for split in [0.5, 1.0, 2.0] {
        let pol = TruncationPolicy { region_split: split, ..small_policy() };
        reports.push(run(101, &t, &pol));
    }
    let base = reports[0].sigma_xi;
    for r in &reports {
        assert!((r.sigma_xi - base).abs() < 1e-12);
        // the split counts only the (l, f, ξ) points of the base lattice
        assert!((r.small_region + r.large_region - base).abs() < 1e-9 * base.abs().max(1e-3));
    }
    assert!(reports[0].large_region != reports[2].large_region);
}

#[test]
fn term5_sign_swaps_the_fifth_term() {
    let t = make_theta();
    let pol = small_policy();
    let lit = run(101, &t, &pol);
    let mat = sigma_xi(101, &t, &pol, Method::Oracle, Term5Sign::Matched).unwrap();
    assert!((lit.per_term_breakdown[4] - mat.term5_alternate).abs() < 1e-15);
    assert!((mat.per_term_breakdown[4] - lit.term5_alternate).abs() < 1e-15);
}

#[test]
fn default_policy_at_101_passes_audit_and_methods_agree() {
    let t = make_theta();
    let pol = TruncationPolicy::default();
    let o = run(101, &t, &pol);
    assert!(o.truncation_audit.passed, "{:?}", o.truncation_audit);
    let x = sigma_xi(101, &t, &pol, Method::Expansion { m_order: 1, min_d: 8.0 }, Term5Sign::Literal).unwrap();
    assert!((x.sigma_xi - o.sigma_xi).abs() < 0.05 * o.sigma_xi.abs(), "{} vs {}", x.sigma_xi, o.sigma_xi);
}

#[test]
fn rejects_composite_and_bad_policy() {
    let t = make_theta();
    assert!(sigma_xi(91, &t, &small_policy(), Method::Oracle, Term5Sign::Literal).is_err());
    let bad = TruncationPolicy { chi: 0.5, ..small_policy() };
    assert!(sigma_xi(101, &t, &bad, Method::Oracle, Term5Sign::Literal).is_err());
}

#[test]
fn square_term_support() {
    let t = make_theta();
    for p in [3u64, 5, 7, 11, 13] {
        assert!(sigma_square(p, &t, 1e-14).unwrap() != 0.0, "p={p}");
    }
    for p in [17u64, 19, 101, 1009] {
        assert_eq!(sigma_square(p, &t, 1e-14).unwrap(), 0.0, "p={p}");
    }
    let a = sigma_square(3, &t, 1e-8).unwrap();
    let b = sigma_square(3, &t, 1e-14).unwrap();
    assert!((a - b).abs() < 1e-6 * b.abs());
}

/// Σ_{f | m} f^{1−2u} Σ_{l ≤ N, gcd(l, m/f) = 1} l^{−u}
fn l_series_direct(u: f64, m: u64) -> f64 {
    (1..=m)
        .filter(|f| m % f == 0)
        .map(|f| {
            let g = m / f;
            let inner: f64 = (1..=200_000u64).filter(|&l| gcd(l, g) == 1).map(|l| (l as f64).powf(-u)).sum();
            (f as f64).powf(1.0 - 2.0 * u) * inner
        })
        .sum()
}

#[test]
fn l_series_against_dirichlet_sum() {
    for m in [1u64, 2, 6, 12, 35] {
        let a = l_series(3.0, m).unwrap();
        let b = l_series_direct(3.0, m);
        assert!((a - b).abs() < 1e-9, "m={m}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn l_series_multiplicative(a in 1u64..40, b in 1u64..40, u in 1.2f64..4.0) {
        prop_assume!(gcd(a, b) == 1);
        let z = l_series(u, 1).unwrap();
        let lhs = l_series(u, a * b).unwrap() / z;
        let rhs = l_series(u, a).unwrap() / z * l_series(u, b).unwrap() / z;
        prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.abs());
    }

    #[test]
    fn grids_stay_in_their_regime(i in 0usize..6, refine in any::<bool>()) {
        let p = [101u64, 1009, 2003, 10007, 20011, 50021][i];
        let sp = (p as f64).sqrt();
        for kind in [EnvelopeKind::SmallRegion, EnvelopeKind::LargeRegion { n: 2 }, EnvelopeKind::Smooth { m: 2, n1: 0 }] {
            let Ok(g) = envelope_grid(p, kind, refine) else { continue };
            for (l, f, xi) in g {
                let r = (l * f * f) as f64 / sp;
                let x = r * xi as f64;
                match kind {
                    EnvelopeKind::SmallRegion => prop_assert!(x <= 0.25),
                    EnvelopeKind::LargeRegion { .. } => prop_assert!(x >= 10.0 && r <= 64.0 && xi <= 4096),
                    EnvelopeKind::Smooth { .. } => prop_assert!(r <= 1.0 && xi <= 32),
                }
            }
        }
    }
}

#[test]
fn refined_grid_contains_coarse() {
    for kind in [EnvelopeKind::SmallRegion, EnvelopeKind::LargeRegion { n: 2 }] {
        let a = envelope_grid(10007, kind, false).unwrap();
        let b = envelope_grid(10007, kind, true).unwrap();
        assert!(b.len() > a.len());
        assert!(a.iter().all(|pt| b.contains(pt)));
    }
}

#[test]
fn small_region_envelope_shape() {
    // r^{3/2}/√ξ: quadrupling ξ halves the envelope
    let grid = [(1, 1, 1), (1, 1, 4)];
    let rep = envelope_check(10007, &make_theta(), &grid, EnvelopeKind::SmallRegion, 1e-10).unwrap();
    let env: Vec<f64> = rep.rows.iter().filter(|r| r.row == 0).map(|r| r.envelope).collect();
    assert!((env[0] / env[1] - 2.0).abs() < 1e-12);
    assert!(rep.overall_max().is_finite());
}

#[test]
fn spread_primes_are_log_spaced_primes() {
    let v = spread_primes(100, 2000, 20);
    assert_eq!(v.len(), 20);
    assert!(v.windows(2).all(|w| w[0] < w[1]));
    assert!(v.iter().all(|&p| elliptika::ntheory::is_prime(p)));
    assert!(v[0] >= 100 && *v.last().unwrap() <= 2000);
}
