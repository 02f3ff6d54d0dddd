//! Complex log-gamma via shifted Stirling series.

use num_complex::Complex64;
use std::f64::consts::PI;

// B_{2k} / (2k(2k−1)), k = 1..9
const STIRLING: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// log Γ(z); the imaginary part is only defined modulo 2π for Re z < 1/2.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection Γ(z)Γ(1−z) = π / sin(πz)
        let s = (z * PI).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    let zinv = z.inv();
    let z2 = zinv * zinv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pw = zinv;
    for c in STIRLING {
        series += pw * c;
        pw *= z2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series - shift
}

pub fn gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// 1/Γ(z), entire; exact zeros at the non-positive integers.
pub fn rgamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

pub fn gamma_real(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// Generalised binomial coefficient binom(z, j) = z(z−1)…(z−j+1)/j!.
pub fn binom(z: Complex64, j: usize) -> Complex64 {
    let mut r = Complex64::new(1.0, 0.0);
    for i in 0..j {
        r *= (z - i as f64) / (i as f64 + 1.0);
    }
    r
}
