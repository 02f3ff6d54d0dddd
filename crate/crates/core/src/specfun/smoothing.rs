//! The smoothing functions F, H0, H1 and their Mellin transforms.
//!
//! F(x)  = (1/2K₀(2)) ∫ₓ^∞ e^{−y−1/y} dy/y,          F̃(u) = K_u(2) / (u K₀(2))
//! H̃0(u) = √π Γ(u/2) F̃(u) π^{−u} / Γ((1−u)/2)
//! H̃1(u) = √π Γ((1+u)/2) F̃(u) π^{−u} / Γ(1−u/2)
//! H_j(y) = (1/2πi) ∫_{(1)} H̃_j(u) y^{−u} du

use num_complex::Complex64;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use super::bessel::{bessel_k, bessel_k_real};
use super::cheb::ChebTable;
use super::gamma::{gamma, rgamma};
use crate::error::{Error, Result};
use crate::quad::{integrate, Tolerance};

/// Vertical contour Re u = abscissa, trapezoid step in Im u, truncated at ±height.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub abscissa: f64,
    pub step: f64,
    pub height: f64,
}

impl Default for Contour {
    fn default() -> Self {
        Contour { abscissa: 1.0, step: 0.05, height: 60.0 }
    }
}

impl Contour {
    pub fn at(abscissa: f64) -> Self {
        Contour { abscissa, ..Default::default() }
    }

    pub fn nodes(&self) -> usize {
        (self.height / self.step).round() as usize
    }
}

/// A smoothing function Φ bundled with its Mellin transform and pole data at u = 0.
pub trait MellinFunction: Send + Sync {
    fn name(&self) -> &'static str;
    fn eval(&self, x: f64) -> f64;
    fn mellin(&self, u: Complex64) -> Result<Complex64>;
    fn pole_order_at_0(&self) -> u32;
    /// Coefficient of u^{−1} in the Laurent expansion at 0.
    fn residue_at_0(&self) -> Complex64;
    /// Left edge of the half-plane where the only singularity is the pole at 0.
    fn holomorphy_abscissa(&self) -> f64;

    /// Φ̃(c + ikh), k = 0..=n, memoised on the exact bits of (c, h).
    fn contour_values(&self, c: f64, h: f64, n: usize) -> Result<Arc<Vec<Complex64>>> {
        let mut v = Vec::with_capacity(n + 1);
        for k in 0..=n {
            v.push(self.mellin(Complex64::new(c, k as f64 * h))?);
        }
        Ok(Arc::new(v))
    }
}

/// Memo for contour node values.
#[derive(Default)]
pub(crate) struct NodeCache {
    map: RwLock<HashMap<(u64, u64, usize), Arc<Vec<Complex64>>>>,
}

impl NodeCache {
    pub(crate) fn get_or<F: FnOnce() -> Result<Vec<Complex64>>>(
        &self,
        c: f64,
        h: f64,
        n: usize,
        make: F,
    ) -> Result<Arc<Vec<Complex64>>> {
        let key = (c.to_bits(), h.to_bits(), n);
        if let Some(v) = self.map.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(make()?);
        self.map.write().unwrap().insert(key, v.clone());
        Ok(v)
    }
}

pub fn k0_at_2() -> f64 {
    static K0: OnceLock<f64> = OnceLock::new();
    *K0.get_or_init(|| bessel_k_real(0.0, 2.0).expect("K0(2)"))
}

const F_CUT: f64 = 6.62; // 2cosh(6.62) > 745

/// F(x), by direct quadrature of ∫ e^{−2cosh s} ds over s ≥ log x.
pub fn big_f(x: f64) -> f64 {
    assert!(x >= 0.0, "big_f needs x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        return 1.0 - big_f(1.0 / x);
    }
    let s0 = x.ln();
    if s0 >= F_CUT {
        return 0.0;
    }
    let r = integrate(
        |s: f64| (-2.0 * s.cosh()).exp(),
        s0,
        F_CUT,
        Tolerance::new(1e-300, 1e-15),
    )
    .expect("F quadrature");
    r.value / (2.0 * k0_at_2())
}

/// F̃(u) = K_u(2)/(u K₀(2)); simple pole with residue 1 at u = 0.
pub fn big_f_mellin(u: Complex64) -> Result<Complex64> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole);
    }
    Ok(bessel_k(u, 2.0)? / (u * k0_at_2()))
}

pub fn h0_mellin(u: Complex64) -> Result<Complex64> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole);
    }
    let g = gamma(u * 0.5) * rgamma((1.0 - u) * 0.5);
    Ok(PI.sqrt() * g * big_f_mellin(u)? * (-u * PI.ln()).exp())
}

pub fn h1_mellin(u: Complex64) -> Result<Complex64> {
    if u == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole);
    }
    let g = gamma((1.0 + u) * 0.5) * rgamma(1.0 - u * 0.5);
    Ok(PI.sqrt() * g * big_f_mellin(u)? * (-u * PI.ln()).exp())
}

/// Laurent coefficients α_{−k}, …, α_{−1} of Φ̃ at 0 (by a circle of radius r).
pub fn laurent_at_0<F: Fn(Complex64) -> Result<Complex64>>(
    phi: F,
    order: usize,
    r: f64,
) -> Result<Vec<Complex64>> {
    let n = 128;
    let mut out = vec![Complex64::new(0.0, 0.0); order];
    for j in 0..n {
        let w = Complex64::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / n as f64);
        let v = phi(w)?;
        for (i, o) in out.iter_mut().enumerate() {
            // α_{−(order−i)} = (1/2πi)∮ Φ̃ u^{order−i−1} du
            *o += v * w.powi((order - i) as i32) / n as f64;
        }
    }
    Ok(out)
}

/// (1/2πi) ∫ Φ̃(u) y^{−u} du along a contour, from memoised node values;
/// returns the value and the truncation tail estimate.
pub fn inverse_mellin_nodes(nodes: &[Complex64], contour: &Contour, y: f64) -> (f64, f64) {
    let c = contour.abscissa;
    let h = contour.step;
    let ly = y.ln();
    let base = (-c * ly).exp();
    let mut s = 0.5 * nodes[0].re;
    let mut comp = 0.0;
    for (k, v) in nodes.iter().enumerate().skip(1) {
        let (sn, cs) = (-(k as f64) * h * ly).sin_cos();
        let term = v.re * cs - v.im * sn;
        let t = s + term;
        comp += if s.abs() >= term.abs() { (s - t) + term } else { (term - t) + s };
        s = t;
    }
    let tail = nodes.last().map_or(0.0, |v| v.norm()) * base * 2.0 / PI;
    ((s + comp) * h * base / PI, tail)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HKind {
    H0,
    H1,
}

fn h_mellin(kind: HKind, u: Complex64) -> Result<Complex64> {
    match kind {
        HKind::H0 => h0_mellin(u),
        HKind::H1 => h1_mellin(u),
    }
}

/// Left abscissa used for small y (past the pole at 0, before the next pole).
fn left_abscissa(kind: HKind) -> f64 {
    match kind {
        HKind::H0 => -1.0,
        HKind::H1 => -0.5,
    }
}

fn h_laurent(kind: HKind) -> &'static [Complex64] {
    static L0: OnceLock<Vec<Complex64>> = OnceLock::new();
    static L1: OnceLock<Vec<Complex64>> = OnceLock::new();
    match kind {
        HKind::H0 => L0.get_or_init(|| laurent_at_0(h0_mellin, 2, 0.5).expect("laurent H0")),
        HKind::H1 => L1.get_or_init(|| laurent_at_0(h1_mellin, 1, 0.5).expect("laurent H1")),
    }
}

fn node_cache(kind: HKind) -> &'static NodeCache {
    static C0: OnceLock<NodeCache> = OnceLock::new();
    static C1: OnceLock<NodeCache> = OnceLock::new();
    match kind {
        HKind::H0 => C0.get_or_init(NodeCache::default),
        HKind::H1 => C1.get_or_init(NodeCache::default),
    }
}

const TAIL_TOL: f64 = 1e-13;

/// H0 or H1 at y by quadrature on an explicit contour (Re u > 0).
pub fn h_on_contour(kind: HKind, y: f64, contour: &Contour) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::InvalidArgument(format!("H needs y > 0, got {y}")));
    }
    let n = contour.nodes();
    let nodes = node_cache(kind).get_or(contour.abscissa, contour.step, n, || {
        (0..=n)
            .map(|k| h_mellin(kind, Complex64::new(contour.abscissa, k as f64 * contour.step)))
            .collect()
    })?;
    let (v, tail) = inverse_mellin_nodes(&nodes, contour, y);
    if tail > TAIL_TOL * v.abs().max(1.0) {
        return Err(Error::ContourTail { tail, tol: TAIL_TOL });
    }
    let mut v = v;
    if contour.abscissa < 0.0 {
        let l = h_laurent(kind);
        v += match kind {
            HKind::H0 => l[1].re - l[0].re * y.ln(),
            HKind::H1 => l[0].re,
        };
    }
    Ok(v)
}

/// Direct evaluation: right contour for y ≥ 1, left contour plus the residue at 0 below.
pub fn h_direct(kind: HKind, y: f64) -> Result<f64> {
    let c = if y >= 1.0 { 1.0 } else { left_abscissa(kind) };
    h_on_contour(kind, y, &Contour::at(c))
}

pub fn h0(y: f64) -> Result<f64> {
    h_direct(HKind::H0, y)
}

pub fn h1(y: f64) -> Result<f64> {
    h_direct(HKind::H1, y)
}

const LOG_Y_MIN: f64 = -27.631021115928547; // ln 1e−12
const LOG_Y_MAX: f64 = 4.0943445622221; // ln 60

fn table(kind: Option<HKind>) -> &'static ChebTable {
    static TF: OnceLock<ChebTable> = OnceLock::new();
    static T0: OnceLock<ChebTable> = OnceLock::new();
    static T1: OnceLock<ChebTable> = OnceLock::new();
    let build = |f: &dyn Fn(f64) -> f64| ChebTable::build(|s| f(s.exp()), LOG_Y_MIN, LOG_Y_MAX, 64, 20);
    match kind {
        None => TF.get_or_init(|| build(&big_f)),
        Some(HKind::H0) => T0.get_or_init(|| build(&|y| h0(y).expect("H0 table"))),
        Some(HKind::H1) => T1.get_or_init(|| build(&|y| h1(y).expect("H1 table"))),
    }
}

/// F as a [`MellinFunction`], evaluated through a memo table.
#[derive(Clone, Copy, Debug, Default)]
pub struct BigF;

impl MellinFunction for BigF {
    fn name(&self) -> &'static str {
        "F"
    }
    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let s = x.ln();
        if s > LOG_Y_MAX {
            // F(x) < 1e−27 beyond the table
            return 0.0;
        }
        let t = table(None);
        if t.contains(s) {
            t.eval(s)
        } else {
            big_f(x)
        }
    }
    fn mellin(&self, u: Complex64) -> Result<Complex64> {
        big_f_mellin(u)
    }
    fn pole_order_at_0(&self) -> u32 {
        1
    }
    fn residue_at_0(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn holomorphy_abscissa(&self) -> f64 {
        f64::NEG_INFINITY
    }
    fn contour_values(&self, c: f64, h: f64, n: usize) -> Result<Arc<Vec<Complex64>>> {
        static CACHE: OnceLock<NodeCache> = OnceLock::new();
        CACHE.get_or_init(NodeCache::default).get_or(c, h, n, || {
            (0..=n).map(|k| big_f_mellin(Complex64::new(c, k as f64 * h))).collect()
        })
    }
}

/// H0 or H1 as a [`MellinFunction`], evaluated through a memo table.
#[derive(Clone, Copy, Debug)]
pub struct HFunction(pub HKind);

impl MellinFunction for HFunction {
    fn name(&self) -> &'static str {
        match self.0 {
            HKind::H0 => "H0",
            HKind::H1 => "H1",
        }
    }
    fn eval(&self, y: f64) -> f64 {
        let s = y.ln();
        if s > LOG_Y_MAX {
            // |H| < 1e−20 beyond the table
            return 0.0;
        }
        if s < LOG_Y_MIN {
            let l = h_laurent(self.0);
            return match self.0 {
                HKind::H0 => l[1].re - l[0].re * s,
                HKind::H1 => l[0].re,
            };
        }
        table(Some(self.0)).eval(s)
    }
    fn mellin(&self, u: Complex64) -> Result<Complex64> {
        h_mellin(self.0, u)
    }
    fn pole_order_at_0(&self) -> u32 {
        match self.0 {
            HKind::H0 => 2,
            HKind::H1 => 1,
        }
    }
    fn residue_at_0(&self) -> Complex64 {
        match self.0 {
            HKind::H0 => h_laurent(HKind::H0)[1],
            HKind::H1 => Complex64::new(PI, 0.0),
        }
    }
    fn holomorphy_abscissa(&self) -> f64 {
        match self.0 {
            HKind::H0 => -2.0,
            HKind::H1 => -1.0,
        }
    }
    fn contour_values(&self, c: f64, h: f64, n: usize) -> Result<Arc<Vec<Complex64>>> {
        let kind = self.0;
        node_cache(kind).get_or(c, h, n, || {
            (0..=n).map(|k| h_mellin(kind, Complex64::new(c, k as f64 * h))).collect()
        })
    }
}

pub const F: BigF = BigF;
pub const H0: HFunction = HFunction(HKind::H0);
pub const H1: HFunction = HFunction(HKind::H1);
