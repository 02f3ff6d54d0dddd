//! Type-1 non-uniform FFT by fast Gaussian gridding:
//! F_j(k) = Σ_n c_{n,j} e^{ikθ_n}, k = 1..=K, for several real weight
//! vectors sharing the same angles θ_n.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

pub struct Spreader {
    kmax: usize,
    mr: usize,
    nj: usize,
    msp: usize,
    tau: f64,
    h: f64,
    e3: Vec<f64>,
    grid: Vec<f64>,
}

impl Spreader {
    /// `digits` sets the kernel width (≈ one correct digit per spread point).
    pub fn new(kmax: usize, nj: usize, digits: usize) -> Self {
        let msp = digits.clamp(4, 16);
        // the grid must hold the whole kernel, even for tiny K
        let m = 2 * (kmax + 1).max(msp);
        let r = 2.0;
        let mr = 2 * m;
        let tau = PI * msp as f64 / ((m * m) as f64 * r * (r - 0.5));
        let h = 2.0 * PI / mr as f64;
        let e3 = (0..2 * msp)
            .map(|i| {
                let l = i as f64 - (msp as f64 - 1.0);
                (-(l * h).powi(2) / (4.0 * tau)).exp()
            })
            .collect();
        Spreader { kmax, mr, nj, msp, tau, h, e3, grid: vec![0.0; mr * nj] }
    }

    /// Adds source(s) at angle θ (any real; reduced mod 2π) with weights c[0..nj].
    #[inline]
    pub fn add(&mut self, theta: f64, c: &[f64]) {
        let th = theta.rem_euclid(2.0 * PI);
        let m0 = (th / self.h).floor();
        let d = th - m0 * self.h;
        let m0 = m0 as usize;
        let lo = self.msp - 1;
        let e2 = (d * self.h / (2.0 * self.tau)).exp();
        let mut p = (-(d * d + 2.0 * lo as f64 * d * self.h) / (4.0 * self.tau)).exp();
        let nj = self.nj;
        let start = m0 + self.mr - lo;
        let width = 2 * self.msp;
        let first = start % self.mr;
        if first + width <= self.mr {
            let row = &mut self.grid[first * nj..(first + width) * nj];
            for (i, cell) in row.chunks_exact_mut(nj).enumerate() {
                let g = p * self.e3[i];
                for (slot, &cj) in cell.iter_mut().zip(c) {
                    *slot += g * cj;
                }
                p *= e2;
            }
        } else {
            for i in 0..width {
                let g = p * self.e3[i];
                let idx = (start + i) % self.mr * nj;
                for (j, &cj) in c.iter().enumerate() {
                    self.grid[idx + j] += g * cj;
                }
                p *= e2;
            }
        }
    }

    /// Transforms per weight vector, k = 1..=K.
    pub fn finish(self) -> Vec<Vec<Complex64>> {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_inverse(self.mr);
        let scale = (PI / self.tau).sqrt() / self.mr as f64;
        (0..self.nj)
            .map(|j| {
                let mut buf: Vec<Complex64> =
                    (0..self.mr).map(|m| Complex64::new(self.grid[m * self.nj + j], 0.0)).collect();
                fft.process(&mut buf);
                (1..=self.kmax).map(|k| buf[k] * (scale * ((k * k) as f64 * self.tau).exp())).collect()
            })
            .collect()
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(kmax: usize) {
        let thetas = [0.1, 2.0, -3.7, 10.4, 6.28, 1e3 + 0.3, 0.0];
        let c: Vec<[f64; 2]> = thetas.iter().enumerate().map(|(i, _)| [1.0 + i as f64, (i as f64).sin()]).collect();
        let mut s = Spreader::new(kmax, 2, 14);
        for (t, w) in thetas.iter().zip(&c) {
            s.add(*t, w);
        }
        let out = s.finish();
        for k in 1..=kmax {
            for j in 0..2 {
                let direct: Complex64 =
                    thetas.iter().zip(&c).map(|(t, w)| Complex64::from_polar(w[j], k as f64 * t)).sum();
                assert!((direct - out[j][k - 1]).norm() < 2e-12 * 28.0, "K={kmax} k={k} j={j}");
            }
        }
    }

    #[test]
    fn matches_direct_sum() {
        for kmax in [1, 2, 5, 37] {
            check(kmax);
        }
    }

    #[test]
    fn legendre_rule() {
        let (x, w) = gauss_legendre(12);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((s - 2.0 / 23.0).abs() < 1e-14);
    }
}
