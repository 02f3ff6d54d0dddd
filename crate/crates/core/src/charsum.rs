//! Generalised Kloosterman sums
//!
//! Kl_{l,f}(ξ,n) = Σ_{a mod 4lf², f² | a²−4n, (a²−4n)/f² ≡ 0,1 (4)} ((a²−4n)/f² / l) e(aξ/4lf²)
//!
//! evaluated by brute force, or as a product of local factors (one per prime
//! dividing 4lf²) using closed forms at odd primes.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::ntheory::{
    factorize, gcd, isqrt, kloosterman_s, kronecker, legendre, mod_inverse,
    radical, residue, sqrt_mod_prime_power, unit_root, val,
};

pub const DEFAULT_BRUTE_CEILING: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CharSumParams {
    pub l: u64,
    pub f: u64,
    pub xi: i64,
    pub n: i64,
    modulus: u64,
    factors: Vec<(u64, u32)>,
}

impl CharSumParams {
    pub fn new(l: u64, f: u64, xi: i64, n: i64) -> Result<Self> {
        if l == 0 || f == 0 {
            return invalid("l and f must be positive");
        }
        if n == 0 {
            return invalid("n must be nonzero");
        }
        let modulus = f
            .checked_mul(f)
            .and_then(|f2| f2.checked_mul(l))
            .and_then(|m| m.checked_mul(4))
            .filter(|&m| m <= i64::MAX as u64 / 4)
            .ok_or(Error::Overflow("4lf²"))?;
        Ok(CharSumParams { l, f, xi, n, modulus, factors: factorize(modulus) })
    }

    /// 4lf²
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factors
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFactor {
    pub q: u64,
    pub k1: u32,
    pub k2: u32,
    pub xi_local: u64,
    pub value: Complex64,
}

struct Kahan {
    sum: Complex64,
    c: Complex64,
}

impl Kahan {
    fn new() -> Self {
        Kahan { sum: Complex64::new(0.0, 0.0), c: Complex64::new(0.0, 0.0) }
    }
    fn add(&mut self, x: Complex64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

pub fn kl_bruteforce(p: &CharSumParams) -> Result<Complex64> {
    kl_bruteforce_with_ceiling(p, DEFAULT_BRUTE_CEILING)
}

pub fn kl_bruteforce_with_ceiling(p: &CharSumParams, ceiling: u64) -> Result<Complex64> {
    let m = p.modulus;
    if m > ceiling {
        return Err(Error::TooLarge { modulus: m, ceiling });
    }
    let f2 = (p.f * p.f) as i128;
    let mut acc = Kahan::new();
    for a in 0..m {
        let t = (a as i128) * (a as i128) - 4 * p.n as i128;
        if t % f2 != 0 {
            continue;
        }
        let s = t / f2;
        if s.rem_euclid(4) > 1 {
            continue;
        }
        let w = kronecker_wide(s, p.l);
        if w == 0 {
            continue;
        }
        acc.add(unit_root(a as i128 * p.xi as i128, m) * w as f64);
    }
    Ok(acc.sum)
}

// (s/l) for an s that may exceed i64; the symbol only depends on s mod 4l.
fn kronecker_wide(s: i128, l: u64) -> i8 {
    let red = s.rem_euclid(4 * l as i128) as i64;
    kronecker(red, l as i64)
}

/// Definitional local sum at q (any prime): a runs mod q^{k1+2k2}, or mod
/// 2^{2+k1+2k2} with the mod-4 condition when q = 2.
pub fn kl_local_bruteforce(q: u64, k1: u32, k2: u32, xi: i64, n: i64) -> Result<Complex64> {
    let extra = if q == 2 { 2 } else { 0 };
    let m = q
        .checked_pow(k1 + 2 * k2 + extra)
        .filter(|&m| m <= DEFAULT_BRUTE_CEILING)
        .ok_or(Error::TooLarge { modulus: u64::MAX, ceiling: DEFAULT_BRUTE_CEILING })?;
    let f2 = q.pow(2 * k2) as i128;
    let l = q.pow(k1);
    let mut acc = Kahan::new();
    for a in 0..m {
        let t = (a as i128) * (a as i128) - 4 * n as i128;
        if t % f2 != 0 {
            continue;
        }
        let s = t / f2;
        if q == 2 && s.rem_euclid(4) > 1 {
            continue;
        }
        let w = kronecker_wide(s, l);
        if w == 0 {
            continue;
        }
        acc.add(unit_root(a as i128 * xi as i128, m) * w as f64);
    }
    Ok(acc.sum)
}

fn cos_frac(num: i128, den: u64) -> f64 {
    unit_root(num, den).re
}

// A square root of `a` modulo q^e (e ≥ 1); `branch` picks among the roots.
fn some_root(a: i128, q: u64, e: u32, branch: usize) -> u64 {
    let m = q.pow(e);
    let a = a.rem_euclid(m as i128) as i64;
    let roots = sqrt_mod_prime_power(a, q, e).expect("prime modulus");
    roots[branch % roots.len()]
}

/// Closed-form local factor at an odd prime q with l = q^{k1}, f = q^{k2}.
pub fn kl_local_odd(q: u64, k1: u32, k2: u32, xi: i64, n: i64) -> Result<f64> {
    kl_local_odd_branch(q, k1, k2, xi, n, 0)
}

/// As [`kl_local_odd`], with an explicit choice of the square root of 4n.
pub fn kl_local_odd_branch(
    q: u64,
    k1: u32,
    k2: u32,
    xi: i64,
    n: i64,
    branch: usize,
) -> Result<f64> {
    if q == 2 || !crate::ntheory::is_prime(q) {
        return invalid(format!("kl_local_odd needs an odd prime, got {q}"));
    }
    if n == 0 {
        return invalid("n must be nonzero");
    }
    q.checked_pow(k1 + 2 * k2 + 1).ok_or(Error::Overflow("kl_local_odd"))?;
    if k1 == 0 && k2 == 0 {
        return Ok(1.0);
    }
    let qf = q as f64;
    let big_n = 4 * n as i128;
    let vn = val(big_n, q);
    let vxi = if xi == 0 { u32::MAX } else { val(xi as i128, q) };
    let qi = q as i128;

    if k1 == 0 {
        let kk = 2 * k2;
        if vn >= kk {
            return Ok(if vxi >= k2 { q.pow(k2) as f64 } else { 0.0 });
        }
        if vn % 2 == 1 {
            return Ok(0.0);
        }
        let r = vn / 2;
        let unit = big_n / qi.pow(vn);
        if legendre(unit.rem_euclid(qi) as i64, q) != 1 {
            return Ok(0.0);
        }
        if vxi < r {
            return Ok(0.0);
        }
        let e = kk - 2 * r;
        let s = some_root(unit, q, e, branch) as i128;
        let xr = xi as i128 / qi.pow(r);
        return Ok(q.pow(r) as f64 * 2.0 * cos_frac(s * xr, q.pow(e)));
    }

    // k1 ≥ 1: the summand only depends on a mod q^{2k2+1}; the remaining
    // sum is complete and forces v_q(ξ) ≥ k1 − 1.
    if vxi < k1 - 1 {
        return Ok(0.0);
    }
    let outer = q.pow(k1 - 1) as f64;
    let even = k1 % 2 == 0;

    if vn >= 2 * k2 {
        // a ≡ 0 mod q^{k2}; reduces to a sum over b mod q with n2 = n/q^{2k2}
        let lead = q.pow(k2) as f64;
        let thr = k1 + k2 - 1;
        if vxi < thr {
            return Ok(0.0);
        }
        let n2 = big_n / qi.pow(2 * k2);
        let chi_n2 = legendre(n2.rem_euclid(qi) as i64, q) as f64;
        let t = if vxi > thr {
            if even {
                qf - (1.0 + chi_n2)
            } else if vn > 2 * k2 {
                qf - 1.0
            } else {
                -1.0
            }
        } else {
            let x2 = (xi as i128 / qi.pow(thr)).rem_euclid(qi);
            if even {
                if chi_n2 < 0.0 {
                    0.0
                } else {
                    let s = some_root(n2, q, 1, branch) as i128;
                    -(1.0 + chi_n2) * cos_frac(s * x2, q)
                }
            } else {
                let inv2 = mod_inverse(2, q).unwrap() as i128;
                let a = (inv2 * x2).rem_euclid(qi) as i64;
                let b = (2 * (n2 / 4).rem_euclid(qi) * x2).rem_euclid(qi) as i64;
                kloosterman_s(a, b, q)?.re
            }
        };
        return Ok(outer * lead * t);
    }

    // v_q(4n) < 2k2
    if vn % 2 == 1 {
        return Ok(0.0);
    }
    let r = vn / 2;
    let unit = big_n / qi.pow(vn);
    if legendre(unit.rem_euclid(qi) as i64, q) != 1 {
        return Ok(0.0);
    }
    let thr = k1 + r - 1;
    if vxi < thr {
        return Ok(0.0);
    }
    let e = 2 * k2 - 2 * r + 1;
    let s = some_root(unit, q, e, branch) as i128;
    let x3 = xi as i128 / qi.pow(thr);
    let theta_num = s * x3;
    let theta_den = q.pow(e);
    let lead = outer * q.pow(r) as f64;
    let t = if even {
        let c = 2.0 * cos_frac(theta_num, theta_den);
        if vxi > thr {
            (qf - 1.0) * c
        } else {
            -c
        }
    } else if vxi > thr {
        0.0
    } else {
        let chi = legendre((2 * s * x3).rem_euclid(qi) as i64, q) as f64;
        let z = unit_root(theta_num, theta_den);
        if q % 4 == 1 {
            2.0 * qf.sqrt() * chi * z.re
        } else {
            -2.0 * qf.sqrt() * chi * z.im
        }
    };
    Ok(lead * t)
}

/// Local factors of Kl_{l,f}(ξ,n), one per prime dividing 4lf².
pub fn kl_local_factors(p: &CharSumParams) -> Result<Vec<LocalFactor>> {
    let mut out = Vec::with_capacity(p.factors.len());
    for &(q, e) in &p.factors {
        let mq = q.pow(e);
        let cof = p.modulus / mq;
        let inv = mod_inverse(cof % mq, mq).ok_or(Error::Overflow("kl_local_factors"))?;
        let xi_local = ((residue(p.xi, mq) as u128 * inv as u128) % mq as u128) as u64;
        let k1 = if p.l % q == 0 { val(p.l as i128, q) } else { 0 };
        let k2 = if p.f % q == 0 { val(p.f as i128, q) } else { 0 };
        let value = if q == 2 {
            // real by a ↦ −a; exact zeros are restored from rounding noise
            let v = kl_local_bruteforce(2, k1, k2, xi_local as i64, p.n)?;
            if v.norm() < 1e-9 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(v.re, 0.0)
            }
        } else {
            Complex64::new(kl_local_odd(q, k1, k2, xi_local as i64, p.n)?, 0.0)
        };
        out.push(LocalFactor { q, k1, k2, xi_local, value });
    }
    Ok(out)
}

pub fn kl_factor(p: &CharSumParams) -> Result<Complex64> {
    let mut v = Complex64::new(1.0, 0.0);
    for lf in kl_local_factors(p)? {
        v *= lf.value;
        if v == Complex64::new(0.0, 0.0) {
            break;
        }
    }
    Ok(v)
}

/// Real-valued Kl via local factors; the 2-part is real by a ↦ −a symmetry.
pub fn kl_value(l: u64, f: u64, xi: i64, n: i64) -> Result<f64> {
    Ok(kl_factor(&CharSumParams::new(l, f, xi, n)?)?.re)
}

pub const DEFAULT_BOUND_CONSTANT: f64 = 4.0;

/// Bound certificate for |Kl_{l,f}(ξ,n)| with the default constant.
pub fn kl_bound(p: &CharSumParams) -> f64 {
    kl_bound_with_constant(p, DEFAULT_BOUND_CONSTANT)
}

pub fn kl_bound_with_constant(p: &CharSumParams, constant: f64) -> f64 {
    let f2 = p.f * p.f;
    if !crate::ntheory::delta_square(4 * p.n, f2) {
        return 0.0;
    }
    let g = gcd(p.n.unsigned_abs(), f2);
    let sg = isqrt(g);
    if sg * sg != g {
        return 0.0;
    }
    let gate = p.l / radical(p.l as i64).unwrap() * sg;
    if p.xi % gate as i64 != 0 {
        return 0.0;
    }
    let xr = (p.xi / sg as i64).unsigned_abs();
    let gx = gcd(xr, p.l);
    let logf = ((4 * p.l * f2) as f64).ln();
    constant * logf * ((p.l * g) as f64).sqrt() * (gx as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: u64, f: u64, xi: i64, n: i64) -> CharSumParams {
        CharSumParams::new(l, f, xi, n).unwrap()
    }

    #[test]
    fn brute_examples() {
        let v = kl_bruteforce(&p(1, 1, 4, 7)).unwrap();
        assert!((v.re - 4.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        let v = kl_bruteforce(&p(1, 1, 3, 7)).unwrap();
        assert!(v.norm() < 1e-12);
        // the 2-part Σ_{a mod 4} e(aξ'/4) kills ξ = 1; the q = 5 factor survives
        let want = 1.0 - 2.0 * (2.0 * std::f64::consts::PI / 5.0).cos();
        let v = kl_bruteforce(&p(5, 1, 1, 1)).unwrap();
        assert!(v.norm() < 1e-12, "{v}");
        let fs = kl_local_factors(&p(5, 1, 1, 1)).unwrap();
        assert!((fs[1].value.re - want).abs() < 1e-12);
        let v = kl_bruteforce(&p(5, 1, 4, 1)).unwrap();
        assert!((v.re - 4.0 * want).abs() < 1e-12, "{v}");
    }

    #[test]
    fn ceiling_error() {
        let e = kl_bruteforce_with_ceiling(&p(100, 10, 1, 1), 1000).unwrap_err();
        assert!(matches!(e, Error::TooLarge { .. }));
    }

    #[test]
    fn local_examples() {
        assert!((kl_local_odd(5, 1, 0, 5, 5).unwrap() - 4.0).abs() < 1e-12);
        assert!((kl_local_odd(5, 1, 0, 1, 1).unwrap() - 0.381966011250105).abs() < 1e-12);
        assert!((kl_local_odd(3, 0, 1, 0, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!(kl_local_odd(2, 1, 0, 1, 1).is_err());
    }

    #[test]
    fn factor_examples() {
        for &(l, f, xi, n) in &[(15, 1, 2, 3), (1, 1, 4, 7), (5, 3, 0, 9)] {
            let a = kl_factor(&p(l, f, xi, n)).unwrap();
            let b = kl_bruteforce(&p(l, f, xi, n)).unwrap();
            assert!((a - b).norm() < 1e-9, "{l} {f} {xi} {n}: {a} {b}");
        }
        let fs = kl_local_factors(&p(5, 3, 0, 9)).unwrap();
        assert_eq!(fs.iter().map(|x| x.q).collect::<Vec<_>>(), vec![2, 3, 5]);
    }

    #[test]
    fn bound_examples() {
        assert!(kl_bound(&p(5, 1, 1, 1)) >= 0.38197);
        // gate l·√g/rad(l) = 5 does not divide ξ = 3
        assert_eq!(kl_bound(&p(25, 1, 3, 1)), 0.0);
        assert!(kl_bruteforce(&p(25, 1, 3, 1)).unwrap().norm() < 1e-9);
        assert!(kl_bound(&p(1, 3, 0, 2)) == 0.0);
        assert!(kl_bruteforce(&p(1, 3, 0, 2)).unwrap().norm() < 1e-12);
        // the printed δ(n; f²) would vanish here
        let v = kl_bruteforce(&p(1, 2, 4, 3)).unwrap();
        assert!((v.re - 4.0).abs() < 1e-12);
        assert!(kl_bound(&p(1, 2, 4, 3)) >= 4.0);
    }
}
