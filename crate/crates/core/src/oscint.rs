//! Quadrature for the singular oscillatory integrals
//! ∫ h(x) Φ(C/√|1−x²|) e(xD) dx over |x| < 1 or |x| > 1, and the smooth
//! whole-line variant with √(x²+1).
//!
//! Near x = ±1 the substitution x = ±(1 − t²) (inside) or x = ±(1 + t²)
//! (outside) removes the |1∓x|^{a/2} branch point; the range is then cut
//! into pieces on which e(xD) turns through at most a quarter period.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::nufft::{gauss_legendre, Spreader};
use crate::quad::{integrate_segments, Tolerance};
use crate::specfun::MellinFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// ∫_{−1}^{1} h(x) Φ(C/√(1−x²)) e(xD) dx
    Inside,
    /// ∫_{|x|>1} h(x) Φ(C/√(x²−1)) e(xD) dx
    Outside,
    /// ∫_ℝ h(x) Φ(C/√(x²+1)) e(xD) dx, h smooth
    LineSmooth,
}

/// One integral. `h` is the full profile h_a (singular factor included);
/// `radius` bounds its support for the outside and whole-line regions.
#[derive(Clone, Copy)]
pub struct FourierJob<'a> {
    pub c: f64,
    pub d: f64,
    pub a: f64,
    pub region: Region,
    pub h: &'a (dyn Fn(f64) -> f64 + Sync),
    pub phi: &'a dyn MellinFunction,
    pub tol: f64,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierValue {
    pub value: Complex64,
    pub err_estimate: f64,
}

/// e(x) = exp(2πix)
#[inline]
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

fn validate(job: &FourierJob) -> Result<()> {
    if !(job.c > 0.0) || !job.c.is_finite() {
        return invalid(format!("C must be positive, got {}", job.c));
    }
    if job.d == 0.0 || !job.d.is_finite() {
        return invalid("D must be nonzero");
    }
    if job.region != Region::LineSmooth && !(job.a > -2.0) {
        return invalid(format!("a must exceed −2, got {}", job.a));
    }
    if !(1e-12..=1e-3).contains(&job.tol) {
        return invalid(format!("tol must lie in [1e−12, 1e−3], got {}", job.tol));
    }
    if job.region != Region::Inside && !(job.radius > 1.0 || job.region == Region::LineSmooth && job.radius > 0.0) {
        return invalid(format!("support radius {} too small for {:?}", job.radius, job.region));
    }
    Ok(())
}

/// Breakpoints t_k with t_k² on a grid of spacing ≤ w, covering [0, tmax].
fn sqrt_grid(tmax: f64, w: f64) -> Vec<f64> {
    let s_max = tmax * tmax;
    let n = ((s_max / w).ceil() as usize).max(1);
    (0..=n).map(|k| (s_max * k as f64 / n as f64).sqrt()).collect()
}

fn lin_grid(a: f64, b: f64, w: f64) -> Vec<f64> {
    let n = (((b - a) / w).ceil() as usize).max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

/// Piece of the substituted integral: the map t ↦ x, dx/dt and |x² ∓ 1|.
#[derive(Clone, Copy)]
struct Piece {
    sign: f64,
    outside: bool,
}

impl Piece {
    #[inline]
    fn map(&self, t: f64) -> (f64, f64, f64) {
        let t2 = t * t;
        if self.outside {
            // x = ±(1+t²), x² − 1 = t²(2+t²)
            (self.sign * (1.0 + t2), 2.0 * t, t2 * (2.0 + t2))
        } else {
            // x = ±(1−t²), 1 − x² = t²(2−t²)
            (self.sign * (1.0 - t2), 2.0 * t, t2 * (2.0 - t2))
        }
    }
}

fn pieces(region: Region) -> [Piece; 2] {
    let outside = region == Region::Outside;
    [Piece { sign: 1.0, outside }, Piece { sign: -1.0, outside }]
}

/// ∫ h Φ(C/√|1−x²|) e(xD) over the job's region, with an error estimate.
pub fn fourier_singular(job: &FourierJob) -> Result<FourierValue> {
    validate(job)?;
    let w = (0.25 / job.d.abs()).min(0.125);
    let phi = job.phi;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    match job.region {
        Region::Inside | Region::Outside => {
            let tmax = if job.region == Region::Inside { 1.0 } else { (job.radius - 1.0).sqrt() };
            let pts = sqrt_grid(tmax, w);
            let max_panels = (8 * pts.len()).max(4000);
            for piece in pieces(job.region) {
                let r = integrate_segments(
                    |t: f64| {
                        let (x, jac, q) = piece.map(t);
                        if q <= 0.0 {
                            return Complex64::new(0.0, 0.0);
                        }
                        let v = (job.h)(x) * phi.eval(job.c / q.sqrt()) * jac;
                        if v == 0.0 {
                            return Complex64::new(0.0, 0.0);
                        }
                        e(x * job.d) * v
                    },
                    &pts,
                    Tolerance { abs: 0.5 * job.tol, rel: 0.0, max_panels },
                )?;
                total += r.value;
                err += r.error;
            }
        }
        Region::LineSmooth => {
            let pts = lin_grid(-job.radius, job.radius, w);
            let max_panels = (8 * pts.len()).max(4000);
            let r = integrate_segments(
                |x: f64| {
                    let q = x * x + 1.0;
                    let v = (job.h)(x) * q.powf(0.5 * job.a) * phi.eval(job.c / q.sqrt());
                    if v == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    e(x * job.d) * v
                },
                &pts,
                Tolerance { abs: job.tol, rel: 0.0, max_panels },
            )?;
            total = r.value;
            err = r.error;
        }
    }
    if err > job.tol {
        return Err(Error::NoConvergence { estimate: total.norm(), error: err });
    }
    Ok(FourierValue { value: total, err_estimate: err })
}

/// ∫ h(x)(x²+1)^{a/2} Φ(C/√(x²+1)) e(xD) dx for smooth h supported in [−radius, radius].
pub fn fourier_smooth(
    h: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    c: f64,
    d: f64,
    phi: &dyn MellinFunction,
    radius: f64,
    tol: f64,
) -> Result<FourierValue> {
    fourier_singular(&FourierJob { c, d, a, region: Region::LineSmooth, h, phi, tol, radius })
}

/// One integrand of a batch: weight w(x, |x² ∓ 1|) multiplying Φ_k(C/√|x² ∓ 1|).
pub struct BatchIntegrand<'a> {
    pub weight: &'a (dyn Fn(f64, f64) -> f64 + Sync),
    pub phi: &'a dyn MellinFunction,
}

/// Batched transforms at equally spaced frequencies: for every integrand j
/// and k = 1..=kmax, out[j][k−1] = ∫ w_j(x) Φ_j(C/√q(x)) e(x·k·d0) dx over the
/// region, where q = 1−x², x²−1 or x²+1.
///
/// Fixed Gauss–Legendre panels (at most two periods of the top frequency,
/// refined geometrically around t ≈ C where Φ switches on) feed a type-1
/// NUFFT, so the cost is linear in the top frequency plus K log K.
/// The returned error covers the transform step only.
pub fn fourier_batch(
    region: Region,
    c: f64,
    d0: f64,
    kmax: usize,
    radius: f64,
    integrands: &[BatchIntegrand],
    tol: f64,
) -> Result<(Vec<Vec<Complex64>>, f64)> {
    if kmax == 0 || integrands.is_empty() {
        return Ok((vec![Vec::new(); integrands.len()], 0.0));
    }
    if !(c > 0.0) || d0 == 0.0 || !d0.is_finite() {
        return invalid("fourier_batch needs C > 0 and finite d0 ≠ 0");
    }
    if !(tol > 0.0) {
        return invalid("tol must be positive");
    }
    let nj = integrands.len();
    let dmax = d0.abs() * kmax as f64;
    let w = (2.0 / dmax).min(0.125);
    let digits = (-tol.log10()).ceil() as usize + 2;
    let mut spread = Spreader::new(kmax, nj, digits);
    let (gx, gw) = gauss_legendre(GL_ORDER);
    let mut vals = vec![0.0; nj];
    let mut abs_sum = 0.0;
    let mut node = |x: f64, q: f64, jac: f64, spread: &mut Spreader| {
        if q <= 0.0 {
            return;
        }
        let sq = q.sqrt();
        let mut any = false;
        for (v, it) in vals.iter_mut().zip(integrands) {
            *v = (it.weight)(x, q) * it.phi.eval(c / sq) * jac;
            any |= *v != 0.0;
            abs_sum += v.abs();
        }
        if any {
            let r = x * d0;
            spread.add(2.0 * PI * (r - r.round()), &vals);
        }
    };
    let mut run = |pts: &[f64], map: &dyn Fn(f64) -> (f64, f64, f64), spread: &mut Spreader| {
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            let (m, hw) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in gx.iter().zip(&gw) {
                let (x, jac, q) = map(m + hw * xi);
                node(x, q, jac * wi * hw, spread);
            }
        }
    };
    match region {
        Region::Inside | Region::Outside => {
            let tmax = if region == Region::Inside { 1.0 } else { (radius - 1.0).max(0.0).sqrt() };
            if tmax > 0.0 {
                let mut pts = sqrt_grid(tmax, w);
                // Φ(C/√q) switches on around t ≈ C/√2
                let mut t = c * 8.0;
                while t > c * 1e-3 {
                    if t < tmax {
                        pts.push(t);
                    }
                    t *= 0.5;
                }
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                for piece in pieces(region) {
                    run(&pts, &|t| piece.map(t), &mut spread);
                }
            }
        }
        Region::LineSmooth => {
            let pts = lin_grid(-radius, radius, w);
            run(&pts, &|x| (x, 1.0, x * x + 1.0), &mut spread);
        }
    }
    let out = spread.finish();
    Ok((out, abs_sum * 10f64.powi(-(digits as i32 - 2))))
}

const GL_ORDER: usize = 24;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::F;

    #[test]
    fn unit_root_helper() {
        assert!((e(0.25) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e(1e6 + 0.5) + 1.0).norm() < 1e-9);
    }

    #[test]
    fn zero_profile() {
        let h = |_: f64| 0.0;
        let job = FourierJob { c: 1.0, d: 3.0, a: 1.0, region: Region::Inside, h: &h, phi: &F, tol: 1e-10, radius: 1.0 };
        assert_eq!(fourier_singular(&job).unwrap().value, Complex64::new(0.0, 0.0));
    }

    fn check_batch(region: Region, c: f64, d0: f64, kmax: usize, ks: &[usize]) {
        let w1 = |x: f64, q: f64| (2.0 + x) * q.sqrt() * (-1.0 / (1.0 - (x / 2.0).powi(2)).max(1e-300)).exp();
        let its = [BatchIntegrand { weight: &w1, phi: &F }];
        let (v, _) = fourier_batch(region, c, d0, kmax, 2.0, &its, 1e-12).unwrap();
        let h = |x: f64| {
            let q = if region == Region::Inside { 1.0 - x * x } else { x * x - 1.0 };
            w1(x, q.abs())
        };
        for &k in ks {
            let job = FourierJob { c, d: d0 * k as f64, a: 1.0, region, h: &h, phi: &F, tol: 1e-12, radius: 2.0 };
            let s = fourier_singular(&job).unwrap().value;
            assert!((s - v[0][k - 1]).norm() < 1e-10, "{region:?} C={c} k={k}: {s} vs {}", v[0][k - 1]);
        }
    }

    #[test]
    fn batch_matches_single() {
        check_batch(Region::Inside, 0.3, -1.7, 5, &[1, 2, 3, 4, 5]);
        check_batch(Region::Inside, 0.02, 3.3, 400, &[1, 17, 250, 400]);
        check_batch(Region::Outside, 0.05, -2.1, 300, &[1, 99, 300]);
    }
}
