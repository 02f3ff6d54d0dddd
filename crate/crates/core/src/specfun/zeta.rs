//! Riemann ζ on the real half-line u > 1 (Euler–Maclaurin).

use crate::error::{invalid, Result};

// B_{2k}/(2k)!
const B2K: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

pub fn zeta_real(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return invalid(format!("zeta_real needs s > 1, got {s}"));
    }
    let n = 12usize;
    let nf = n as f64;
    let mut sum = 0.0;
    for k in (1..n).rev() {
        sum += (k as f64).powf(-s);
    }
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // Σ B_{2k}/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut rising = s;
    let mut pw = nf.powf(-s - 1.0);
    for (k, b) in B2K.iter().enumerate() {
        sum += b * rising * pw;
        let j = 2 * k as i32;
        rising *= (s + j as f64 + 1.0) * (s + j as f64 + 2.0);
        pw /= nf * nf;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn known_values() {
        assert!((zeta_real(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta_real(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta_real(3.0).unwrap() - 1.2020569031595942).abs() < 1e-15);
        assert!((zeta_real(1.5).unwrap() - 2.612375348685488).abs() < 1e-14);
        assert!(zeta_real(1.0).is_err());
    }
}
