//! Integer and modular arithmetic: valuations, Kronecker symbols, square
//! roots modulo prime powers, Gauss sums and classical Kloosterman sums.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor of the square root, exact on the whole u64 range.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |v| v <= n) {
        x += 1;
    }
    x
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// `a mod m` for signed `a`, as a residue in `[0, m)`.
#[inline]
pub fn residue(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// e(num/den) = exp(2πi·num/den), with the fraction reduced exactly first.
pub fn unit_root(num: i128, den: u64) -> Complex64 {
    let d = den as i128;
    let mut r = num.rem_euclid(d);
    if 2 * r > d {
        r -= d;
    }
    let (s, c) = (2.0 * PI * (r as f64) / (den as f64)).sin_cos();
    Complex64::new(c, s)
}

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller–Rabin for the full u64 range.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation as sorted `(prime, exponent)` pairs; `factorize(1)` is empty.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m && p < 1000 {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![m];
    let mut big = Vec::new();
    while let Some(x) = stack.pop() {
        if x == 1 {
            continue;
        }
        if is_prime(x) {
            big.push(x);
            continue;
        }
        let d = pollard_brent(x);
        stack.push(d);
        stack.push(x / d);
    }
    big.sort_unstable();
    for q in big {
        match out.last_mut() {
            Some((p, e)) if *p == q => *e += 1,
            _ => out.push((q, 1)),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimePower {
    pub q: u64,
    pub k: u32,
}

impl PrimePower {
    pub fn new(q: u64, k: u32) -> Result<Self> {
        if !is_prime(q) {
            return invalid(format!("{q} is not prime"));
        }
        q.checked_pow(k).ok_or(Error::Overflow("PrimePower"))?;
        Ok(PrimePower { q, k })
    }

    pub fn value(&self) -> u64 {
        self.q.pow(self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValuationSplit {
    pub v: u32,
    pub q_part: u64,
    pub coprime_part: i64,
}

pub fn valuation_split(a: i64, q: u64) -> Result<ValuationSplit> {
    if a == 0 {
        return invalid("valuation of 0 is infinite");
    }
    if !is_prime(q) {
        return invalid(format!("{q} is not prime"));
    }
    let mut v = 0;
    let mut rest = a as i128;
    let mut q_part = 1u64;
    while rest % q as i128 == 0 {
        rest /= q as i128;
        q_part *= q;
        v += 1;
    }
    Ok(ValuationSplit { v, q_part, coprime_part: rest as i64 })
}

/// v_q(a) for a ≠ 0 (no primality check; internal use).
pub(crate) fn val(a: i128, q: u64) -> u32 {
    debug_assert!(a != 0);
    let mut a = a;
    let mut v = 0;
    while a % q as i128 == 0 {
        a /= q as i128;
        v += 1;
    }
    v
}

pub fn radical(a: i64) -> Result<u64> {
    if a == 0 {
        return invalid("radical of 0");
    }
    Ok(factorize(a.unsigned_abs()).iter().map(|&(p, _)| p).product())
}

fn jacobi(a: i128, n: i128) -> i8 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut res = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                res = -res;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            res = -res;
        }
        a %= n;
    }
    if n == 1 {
        res
    } else {
        0
    }
}

/// Kronecker symbol (d/m), with (d/−1) = sign(d) and (d/0) = [|d| = 1].
pub fn kronecker(d: i64, m: i64) -> i8 {
    let d = d as i128;
    let mut m = m as i128;
    if m == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut res = 1i8;
    if m < 0 {
        m = -m;
        if d < 0 {
            res = -res;
        }
    }
    let mut v = 0;
    while m % 2 == 0 {
        m /= 2;
        v += 1;
    }
    if v > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r = d.rem_euclid(8);
        if v % 2 == 1 && (r == 3 || r == 5) {
            res = -res;
        }
    }
    res * jacobi(d, m)
}

/// Whether x² ≡ a (mod b) is solvable, decided prime power by prime power.
pub fn delta_square(a: i64, b: u64) -> bool {
    assert!(b >= 1, "delta_square: modulus must be positive");
    factorize(b).iter().all(|&(q, k)| square_mod_prime_power(a as i128, q, k))
}

fn square_mod_prime_power(a: i128, q: u64, k: u32) -> bool {
    let m = (q as i128).pow(k);
    let a = a.rem_euclid(m);
    if a == 0 {
        return true;
    }
    let v = val(a, q);
    if v % 2 == 1 {
        return false;
    }
    let unit = a / (q as i128).pow(v);
    let e = k - v;
    if q == 2 {
        match e {
            1 => true,
            2 => unit.rem_euclid(4) == 1,
            _ => unit.rem_euclid(8) == 1,
        }
    } else {
        jacobi(unit, q as i128) == 1
    }
}

fn tonelli_shanks(a: u64, p: u64) -> u64 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut s = 0;
    let mut qq = p - 1;
    while qq % 2 == 0 {
        qq /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, qq, p);
    let mut t = pow_mod(a, qq, p);
    let mut r = pow_mod(a, (qq + 1) / 2, p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Roots of y² ≡ u (mod q^e) for a unit u.
fn unit_roots(u: u64, q: u64, e: u32) -> Vec<u64> {
    let m = q.pow(e);
    if q == 2 {
        return match e {
            1 => vec![1],
            2 => {
                if u % 4 == 1 {
                    vec![1, 3]
                } else {
                    vec![]
                }
            }
            _ => {
                if u % 8 != 1 {
                    return vec![];
                }
                let mut s = 1u64;
                for i in 3..e {
                    let mi = 1u64 << (i + 1);
                    if (mul_mod(s, s, mi) + mi - u % mi) % mi != 0 {
                        s += 1 << (i - 1);
                    }
                }
                let h = 1u64 << (e - 1);
                vec![s % m, (m - s) % m, (s + h) % m, (m - s + h) % m]
            }
        };
    }
    if jacobi(u as i128, q as i128) != 1 {
        return vec![];
    }
    let mut s = tonelli_shanks(u % q, q);
    let mut mi = q;
    for _ in 1..e {
        mi *= q;
        let f = (mul_mod(s, s, mi) + mi - u % mi) % mi;
        let inv = mod_inverse(mul_mod(2, s, mi), mi).expect("unit root is invertible");
        s = (s + mi - mul_mod(f, inv, mi)) % mi;
    }
    vec![s, m - s]
}

/// All x mod q^k with x² ≡ a, sorted ascending.
pub fn sqrt_mod_prime_power(a: i64, q: u64, k: u32) -> Result<Vec<u64>> {
    if !is_prime(q) {
        return invalid(format!("{q} is not prime"));
    }
    if k == 0 {
        return invalid("exponent must be positive");
    }
    let m = q.checked_pow(k).ok_or(Error::Overflow("sqrt_mod_prime_power"))?;
    let a = residue(a, m);
    let mut out = Vec::new();
    if a == 0 {
        let step = q.pow((k + 1) / 2);
        out.extend((0..q.pow(k / 2)).map(|j| j * step));
        return Ok(out);
    }
    let v = val(a as i128, q);
    if v % 2 == 1 {
        return Ok(out);
    }
    let r = v / 2;
    let e = k - v;
    let me = q.pow(e);
    let unit = (a / q.pow(v)) % me;
    let qr = q.pow(r);
    for y0 in unit_roots(unit, q, e) {
        for j in 0..qr {
            let y = y0 + j * me;
            out.push(mul_mod(qr, y, m));
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Classical Kloosterman sum S(a, b; q) for a prime q.
pub fn kloosterman_s(a: i64, b: i64, q: u64) -> Result<Complex64> {
    if !is_prime(q) {
        return invalid(format!("{q} is not prime"));
    }
    if q == 2 {
        return Ok(unit_root((residue(a, 2) + residue(b, 2)) as i128, 2));
    }
    let a = residue(a, q);
    let b = residue(b, q);
    // inverses by inv(x) = −⌊q/x⌋·inv(q mod x); x and −x give conjugate terms
    let half = (q - 1) / 2;
    let mut inv = vec![0u64; q as usize];
    inv[1] = 1;
    let mut s = 0.0;
    let w = 2.0 * PI / q as f64;
    for x in 1..=half {
        if x > 1 {
            let y = (q - (q / x) * inv[(q % x) as usize] % q) % q;
            inv[x as usize] = y;
        }
        let t = ((a as u128 * x as u128 + b as u128 * inv[x as usize] as u128) % q as u128) as f64;
        s += (w * t).cos();
    }
    Ok(Complex64::new(2.0 * s, 0.0))
}

/// Quadratic Gauss sum Σ_a (a/q) e(a/q) for an odd prime q.
pub fn gauss_sum(q: u64) -> Result<Complex64> {
    if q == 2 || !is_prime(q) {
        return invalid(format!("gauss_sum needs an odd prime, got {q}"));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for a in 1..q {
        s += unit_root(a as i128, q) * jacobi(a as i128, q as i128) as f64;
    }
    Ok(s)
}

/// Closed form of [`gauss_sum`]: √q or i√q according to q mod 4.
pub fn gauss_sum_value(q: u64) -> Complex64 {
    let r = (q as f64).sqrt();
    if q % 4 == 1 {
        Complex64::new(r, 0.0)
    } else {
        Complex64::new(0.0, r)
    }
}

/// Legendre symbol (a/q) for an odd prime q.
pub fn legendre(a: i64, q: u64) -> i8 {
    jacobi(a as i128, q as i128)
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(2, 3), -1);
        assert_eq!(kronecker(7, 1), 1);
        assert_eq!(kronecker(0, 7), 0);
        assert_eq!(kronecker(-3, -1), -1);
        assert_eq!(kronecker(5, -1), 1);
        assert_eq!(kronecker(3, 2), -1);
        assert_eq!(kronecker(7, 2), 1);
        assert_eq!(kronecker(-1, 0), 1);
        assert_eq!(kronecker(2, 0), 0);
    }

    #[test]
    fn valuation_examples() {
        let s = valuation_split(18, 3).unwrap();
        assert_eq!((s.v, s.q_part, s.coprime_part), (2, 9, 2));
        let s = valuation_split(7, 3).unwrap();
        assert_eq!((s.v, s.q_part, s.coprime_part), (0, 1, 7));
        let s = valuation_split(-12, 2).unwrap();
        assert_eq!((s.v, s.q_part, s.coprime_part), (2, 4, -3));
        assert!(valuation_split(0, 3).is_err());
    }

    #[test]
    fn radical_examples() {
        assert_eq!(radical(12).unwrap(), 6);
        assert_eq!(radical(49).unwrap(), 7);
        assert_eq!(radical(1).unwrap(), 1);
        assert_eq!(radical(-1).unwrap(), 1);
        assert!(radical(0).is_err());
    }

    #[test]
    fn delta_examples() {
        assert!(delta_square(4, 9));
        assert!(!delta_square(2, 4));
        for b in 1..50 {
            assert!(delta_square(0, b));
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_prime_power(4, 3, 2).unwrap(), vec![2, 7]);
        assert_eq!(sqrt_mod_prime_power(1, 2, 3).unwrap(), vec![1, 3, 5, 7]);
        assert!(sqrt_mod_prime_power(2, 5, 1).unwrap().is_empty());
    }

    #[test]
    fn kloosterman_examples() {
        let s = kloosterman_s(0, 0, 7).unwrap();
        assert!((s.re - 6.0).abs() < 1e-12 && s.im.abs() < 1e-12);
        let s = kloosterman_s(1, 1, 5).unwrap();
        assert!((s.re - (2.0 + 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-12);
        assert!((s.re - 0.38197).abs() < 1e-5);
        let s = kloosterman_s(1, 0, 5).unwrap();
        assert!((s.re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_examples() {
        let g = gauss_sum(5).unwrap();
        assert!((g - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        let g = gauss_sum(3).unwrap();
        assert!((g - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
        let g = gauss_sum(7).unwrap();
        assert!((g - Complex64::new(0.0, 7f64.sqrt())).norm() < 1e-12);
        assert!(gauss_sum(2).is_err());
    }

    #[test]
    fn primality_and_factoring() {
        let primes: Vec<u64> = (0..200).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes.len(), 46);
        assert!(is_prime(18446744073709551557));
        assert!(!is_prime(3215031751));
        let n = 600851475143u64;
        assert_eq!(factorize(n), vec![(71, 1), (839, 1), (1471, 1), (6857, 1)]);
        let n = 1000000007u64 * 998244353;
        assert_eq!(factorize(n), vec![(998244353, 1), (1000000007, 1)]);
        assert!(PrimePower::new(4, 1).is_err());
        assert!(PrimePower::new(2, 64).is_err());
        assert_eq!(PrimePower::new(3, 4).unwrap().value(), 81);
    }

    #[test]
    fn divisors_small() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4294967295);
    }
}
