//! The cut-off functions φ0, φ, φ_κ and the Mellin transform φ̃.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{invalid, Result};
use crate::quad::{gk15, integrate, Tolerance};

/// g(y) = exp(−1/(1−y) − 1/y) on (0, 1), zero outside.
pub fn bump(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y) - 1.0 / y).exp()
    }
}

const PANELS: usize = 512;

struct Cumulative {
    iota: f64,
    // ∫_0^{k/PANELS} g, k = 0..=PANELS
    cum: Vec<f64>,
}

fn cumulative() -> &'static Cumulative {
    static C: OnceLock<Cumulative> = OnceLock::new();
    C.get_or_init(|| {
        let mut cum = vec![0.0; PANELS + 1];
        let mut f = bump;
        for k in 0..PANELS {
            let a = k as f64 / PANELS as f64;
            let b = (k + 1) as f64 / PANELS as f64;
            cum[k + 1] = cum[k] + gk15(&mut f, a, b).0;
        }
        Cumulative { iota: 1.0 / cum[PANELS], cum }
    })
}

/// ι = 1/∫₀¹ g, so that φ0(0) = 1.
pub fn iota() -> f64 {
    cumulative().iota
}

fn g_integral_to(t: f64) -> f64 {
    let c = cumulative();
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return c.cum[PANELS];
    }
    let k = ((t * PANELS as f64).floor() as usize).min(PANELS - 1);
    let a = k as f64 / PANELS as f64;
    let mut f = bump;
    c.cum[k] + if t > a { gk15(&mut f, a, t).0 } else { 0.0 }
}

/// φ0(x) = ι ∫₀^{1−x} g(y) dy on [0, 1].
pub fn phi0(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else if x > 0.5 {
        iota() * g_integral_to(1.0 - x)
    } else {
        // g is symmetric about 1/2
        1.0 - iota() * g_integral_to(x)
    }
}

/// φ(x): 1 on [0,1], φ0(x−1) on [1,2], 0 beyond (argument taken as |x|).
pub fn phi(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        1.0
    } else if x >= 2.0 {
        0.0
    } else {
        phi0(x - 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffSpec {
    pub kappa: f64,
    pub iota: f64,
}

impl CutoffSpec {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 0.5) {
            return invalid(format!("kappa must lie in (0, 1/2), got {kappa}"));
        }
        Ok(CutoffSpec { kappa, iota: iota() })
    }
}

/// The bundle (φ0, φ, φ_κ, φ̃) for a given κ.
#[derive(Clone, Copy, Debug)]
pub struct PhiFamily {
    pub spec: CutoffSpec,
}

pub fn phi_family(spec: CutoffSpec) -> Result<PhiFamily> {
    CutoffSpec::new(spec.kappa)?;
    Ok(PhiFamily { spec })
}

impl PhiFamily {
    pub fn phi0(&self, x: f64) -> f64 {
        phi0(x)
    }
    pub fn phi(&self, x: f64) -> f64 {
        phi(x)
    }
    /// φ_κ(x) = φ(|1 − |x|| / κ): equal to 1 within κ of ±1, 0 beyond 2κ.
    pub fn phi_kappa(&self, x: f64) -> f64 {
        phi((1.0 - x.abs()).abs() / self.spec.kappa)
    }
    /// φ̃(s) = (ι/s) ∫₁² g(2−x) x^s dx, s ≠ 0.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        if s == Complex64::new(0.0, 0.0) {
            return Err(crate::error::Error::Pole);
        }
        let waves = (s.im.abs() * 2f64.ln() / (2.0 * std::f64::consts::PI)).ceil() as usize;
        let n = (4 * waves).max(8);
        let pts: Vec<f64> = (0..=n).map(|i| 1.0 + i as f64 / n as f64).collect();
        let r = crate::quad::integrate_segments(
            |x: f64| (s * x.ln()).exp() * bump(2.0 - x),
            &pts,
            Tolerance::new(1e-18, 1e-13),
        )?;
        Ok(r.value * self.spec.iota / s)
    }
}

#[allow(dead_code)]
fn normaliser_by_quadrature() -> f64 {
    integrate(bump, 0.0, 1.0, Tolerance::new(1e-18, 1e-14)).unwrap().value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_shape() {
        assert_eq!(phi(0.5), 1.0);
        assert_eq!(phi(2.0), 0.0);
        assert!((phi0(0.0) - 1.0).abs() < 1e-15);
        assert!((phi0(0.5) - 0.5).abs() < 1e-14);
        let mut last = 1.0;
        for i in 0..=400 {
            let v = phi(1.0 + i as f64 / 400.0);
            assert!(v <= last + 1e-15);
            last = v;
        }
        assert!((iota() * normaliser_by_quadrature() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn phi0_matches_direct_quadrature() {
        for &x in &[0.1, 0.3, 0.77, 0.95] {
            let d = integrate(bump, 0.0, 1.0 - x, Tolerance::new(1e-18, 1e-14)).unwrap().value;
            assert!((phi0(x) - iota() * d).abs() < 1e-14);
        }
    }

    #[test]
    fn mellin_residue() {
        let fam = phi_family(CutoffSpec::new(0.25).unwrap()).unwrap();
        let s = Complex64::new(1e-3, 0.0);
        assert!(((s * fam.mellin(s).unwrap()).re - 1.0).abs() < 1e-2);
        // direct Mellin transform ∫ φ(x) x^{s−1} dx at s = 1: ∫₀² φ
        let s1 = Complex64::new(1.0, 0.0);
        let d = 1.0 + integrate(|x: f64| phi(x), 1.0, 2.0, Tolerance::new(1e-15, 1e-14)).unwrap().value;
        assert!((fam.mellin(s1).unwrap().re - d).abs() < 1e-12);
    }

    #[test]
    fn kappa_validation() {
        assert!(CutoffSpec::new(0.0).is_err());
        assert!(CutoffSpec::new(0.5).is_err());
        let fam = phi_family(CutoffSpec::new(0.25).unwrap()).unwrap();
        assert_eq!(fam.phi_kappa(1.0), 1.0);
        assert_eq!(fam.phi_kappa(0.5), 0.0);
        assert_eq!(fam.phi_kappa(-1.1), 1.0);
    }
}
