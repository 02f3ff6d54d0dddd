//! Asymptotic expansions at x = ±1, the A-transform, and the expansion
//! sides of the Fourier-transform asymptotics inside and outside [−1, 1].

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::oscint::e as eu;
use crate::specfun::gamma::{binom, ln_gamma};
use crate::specfun::{Contour, MellinFunction};

/// h(±(1−x)) ~ |x|^{a/2} Σ c_m^± x^m for 0 < x < κ.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AsymptoticExpansion {
    pub a: f64,
    pub coeffs_plus: Vec<f64>,
    pub coeffs_minus: Vec<f64>,
    pub kappa: f64,
    pub remainder_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

/// Branch used for real powers of negative numbers: y^w = |y|^w e^{±iπw}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, serde::Serialize, serde::Deserialize)]
pub enum Branch {
    /// arg y = +π
    #[default]
    Principal,
    /// arg y = −π
    Alternate,
}

impl Branch {
    fn arg(self, y: f64) -> f64 {
        if y >= 0.0 {
            0.0
        } else {
            match self {
                Branch::Principal => PI,
                Branch::Alternate => -PI,
            }
        }
    }
    /// log y on this branch
    pub fn log(self, y: f64) -> Complex64 {
        Complex64::new(y.abs().ln(), self.arg(y))
    }
    /// y^w on this branch
    pub fn pow(self, y: f64, w: Complex64) -> Complex64 {
        (w * self.log(y)).exp()
    }
}

impl AsymptoticExpansion {
    pub fn new(a: f64, plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != minus.len() || plus.is_empty() {
            return invalid("expansion coefficient lists must be nonempty and of equal length");
        }
        Ok(AsymptoticExpansion { a, coeffs_plus: plus, coeffs_minus: minus, kappa: 0.25, remainder_bound: f64::NAN })
    }

    pub fn symmetric(a: f64, c: Vec<f64>) -> Result<Self> {
        Self::new(a, c.clone(), c)
    }

    pub fn order(&self) -> usize {
        self.coeffs_plus.len() - 1
    }

    pub fn coeffs(&self, s: Sign) -> &[f64] {
        match s {
            Sign::Plus => &self.coeffs_plus,
            Sign::Minus => &self.coeffs_minus,
        }
    }

    /// |x|^{a/2} Σ_{m ≤ M} c_m^± x^m
    pub fn eval(&self, s: Sign, x: f64) -> f64 {
        let c = self.coeffs(s);
        let mut acc = 0.0;
        for &v in c.iter().rev() {
            acc = acc * x + v;
        }
        x.abs().powf(0.5 * self.a) * acc
    }

    /// Fit the remainder constant from 10³ samples in (0, κ) against the
    /// profile itself; `h` is the profile on the real line.
    pub fn fit_remainder(&mut self, h: &dyn Fn(f64) -> f64, outside: bool) -> f64 {
        let m = self.order() as f64;
        let mut worst: f64 = 0.0;
        for s in Sign::BOTH {
            for i in 1..=1000 {
                let x = self.kappa * i as f64 / 1000.0;
                // outside the interval the expansion variable is negative
                let xs = if outside { -x } else { x };
                let exact = h(s.value() * (1.0 - xs));
                let approx = self.eval(s, xs);
                let r = (exact - approx).abs() / x.powf(0.5 * self.a + m + 1.0);
                worst = worst.max(r);
            }
        }
        self.remainder_bound = 1.1 * worst;
        self.remainder_bound
    }
}

/// Expansion coefficients of a profile h at x = ±1 read off numerically
/// from samples of h(±(1−x))/|x|^{a/2} on (0, κ] (x < 0 when `outside`).
pub fn expansion_from_profile(
    h: &dyn Fn(f64) -> f64,
    a: f64,
    order: usize,
    outside: bool,
) -> Result<AsymptoticExpansion> {
    let kappa = 0.25;
    let sg = if outside { -1.0 } else { 1.0 };
    let mut out = [Vec::new(), Vec::new()];
    for (i, s) in Sign::BOTH.iter().enumerate() {
        let f = |t: f64| {
            let x = sg * t;
            if t == 0.0 {
                return f64::NAN;
            }
            h(s.value() * (1.0 - x)) / t.powf(0.5 * a)
        };
        let c = series::taylor_from_samples(&f, kappa, order);
        if c.iter().any(|v| !v.is_finite()) {
            return invalid("profile is not finite near ±1");
        }
        out[i] = c.iter().enumerate().map(|(m, v)| if outside && m % 2 == 1 { -v } else { *v }).collect();
    }
    let [plus, minus] = out;
    let mut e = AsymptoticExpansion::new(a, plus, minus)?;
    e.fit_remainder(h, outside);
    Ok(e)
}

/// d_m^± = 2^δ Σ_{j+k=m} c_k^± binom(δ, j)/(−2)^j: the expansion of
/// |2x − x²|^δ h(±(1−x)).
pub fn expansion_shift(e: &AsymptoticExpansion, delta: f64) -> AsymptoticExpansion {
    let shift = |c: &[f64]| -> Vec<f64> {
        let n = c.len();
        let dz = Complex64::new(delta, 0.0);
        (0..n)
            .map(|m| {
                let mut s = 0.0;
                for j in 0..=m {
                    s += c[m - j] * binom(dz, j).re / (-2f64).powi(j as i32);
                }
                2f64.powf(delta) * s
            })
            .collect()
    };
    AsymptoticExpansion {
        a: e.a + 2.0 * delta,
        coeffs_plus: shift(&e.coeffs_plus),
        coeffs_minus: shift(&e.coeffs_minus),
        kappa: e.kappa,
        remainder_bound: f64::NAN,
    }
}

/// c_m^±(u/2) = (i/2π)^{1+m+(u+a)/2} 2^{u/2} Σ_{j+k=m} c_k^± binom(u/2, j)/(−2)^j.
pub fn c_coeff(e: &AsymptoticExpansion, m: usize, u: Complex64, s: Sign) -> Result<Complex64> {
    let c = e.coeffs(s);
    if m >= c.len() {
        return invalid(format!("order {m} beyond expansion length {}", c.len()));
    }
    let half = u * 0.5;
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..=m {
        sum += binom(half, j) * (c[m - j] / (-2f64).powi(j as i32));
    }
    let log_i2pi = Complex64::new((0.5 / PI).ln(), 0.5 * PI);
    let w = half + 1.0 + m as f64 + 0.5 * e.a;
    Ok((w * log_i2pi + half * 2f64.ln()).exp() * sum)
}

/// Truncation order and contour data for the expansions.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExpansionRequest {
    pub m_order: usize,
    pub tau: f64,
    pub tau1: f64,
    pub sign: Sign,
}

impl ExpansionRequest {
    pub fn new(m_order: usize, tau: f64, tau1: f64) -> Self {
        ExpansionRequest { m_order, tau, tau1, sign: Sign::Plus }
    }
    pub fn validate(&self, phi: &dyn MellinFunction) -> Result<()> {
        if !(self.tau > 0.0) {
            return invalid("tau must be positive");
        }
        if !(self.tau1 >= 0.0) {
            return invalid("tau1 must be non-negative");
        }
        if self.tau1 == 0.0 && phi.pole_order_at_0() > 1 {
            return invalid("tau1 = 0 requires at most a simple pole of the Mellin transform at 0");
        }
        Ok(())
    }
}

impl Default for ExpansionRequest {
    fn default() -> Self {
        ExpansionRequest::new(1, 1.0, 0.0)
    }
}

/// The x-independent part Φ̃(u) c_m^±(u/2) Γ(m+1+(a+u)/2) on the nodes
/// u = τ + ikh, k = −n..=n.
pub struct ATransformKernel {
    tau: f64,
    step: f64,
    values: Vec<Complex64>,
}

impl ATransformKernel {
    pub fn new(e: &AsymptoticExpansion, m: usize, s: Sign, phi: &dyn MellinFunction, contour: Contour) -> Result<Self> {
        if !(2.0 * m as f64 + 2.0 + e.a > 0.0) {
            return invalid("A-transform needs 2m + 2 + a > 0");
        }
        if !(contour.abscissa > 0.0) {
            return invalid("A-transform contour must lie in Re u > 0");
        }
        let n_all = contour.nodes();
        let mel = phi.contour_values(contour.abscissa, contour.step, n_all)?;
        // drop nodes where Φ̃ has decayed into rounding noise; the remaining
        // factors are at most polynomial in |Im u| on either branch
        let floor = 1e-16 * mel[0].norm();
        let n = mel.iter().position(|v| v.norm() < floor).unwrap_or(n_all + 1).saturating_sub(1).max(1);
        let mut values = Vec::with_capacity(2 * n + 1);
        for k in -(n as i64)..=(n as i64) {
            let u = Complex64::new(contour.abscissa, k as f64 * contour.step);
            let pm = if k >= 0 { mel[k as usize] } else { mel[(-k) as usize].conj() };
            let g = ln_gamma(u * 0.5 + 1.0 + m as f64 + 0.5 * e.a).exp();
            values.push(pm * c_coeff(e, m, u, s)? * g);
        }
        Ok(ATransformKernel { tau: contour.abscissa, step: contour.step, values })
    }

    /// A(x) = (1/2πi) ∫_{(τ)} (kernel) x^{−u/2} du, x ≠ 0 real.
    pub fn eval(&self, x: f64, branch: Branch) -> Result<Complex64> {
        if x == 0.0 || !x.is_finite() {
            return invalid("A-transform needs x ≠ 0");
        }
        let lx = branch.log(x);
        let n = (self.values.len() - 1) / 2;
        // x^{−u/2} = exp(−(τ + ikh) lx / 2)
        let base = (-0.5 * self.tau * lx).exp();
        let step = (Complex64::new(0.0, -0.5 * self.step) * lx).exp();
        let mut wpos = base;
        let mut wneg = base;
        let mut acc = self.values[n] * base;
        let mut comp = Complex64::new(0.0, 0.0);
        let mut big: f64 = acc.norm();
        for k in 1..=n {
            wpos *= step;
            wneg /= step;
            let term = self.values[n + k] * wpos + self.values[n - k] * wneg;
            big = big.max(term.norm());
            let t = acc + term;
            comp += if acc.norm() >= term.norm() { (acc - t) + term } else { (term - t) + acc };
            acc = t;
        }
        let tail = (self.values[2 * n] * wpos).norm() + (self.values[0] * wneg).norm();
        let value = (acc + comp) * (self.step / (2.0 * PI));
        let tol = 1e-10 * big.max(value.norm());
        if tail > tol.max(1e-300) {
            return Err(Error::ContourTail { tail, tol });
        }
        Ok(value)
    }
}

/// 𝒜^{τ,±}_{h,m}(Φ)(x) on the contour Re u = τ (step/height from `Contour`).
pub fn a_transform(
    e: &AsymptoticExpansion,
    m: usize,
    req: &ExpansionRequest,
    phi: &dyn MellinFunction,
    x: f64,
) -> Result<Complex64> {
    a_transform_branch(e, m, req, phi, x, Branch::Principal)
}

pub fn a_transform_branch(
    e: &AsymptoticExpansion,
    m: usize,
    req: &ExpansionRequest,
    phi: &dyn MellinFunction,
    x: f64,
    branch: Branch,
) -> Result<Complex64> {
    if !(req.tau > 0.0) {
        return invalid("tau must be positive");
    }
    ATransformKernel::new(e, m, req.sign, phi, Contour::at(req.tau))?.eval(x, branch)
}

/// Kernels for all (m, ±) of an expansion, reusable across (C, D).
pub struct ExpansionEvaluator<'a> {
    e: &'a AsymptoticExpansion,
    m_order: usize,
    kernels: Vec<[ATransformKernel; 2]>,
    pub branch: Branch,
}

impl<'a> ExpansionEvaluator<'a> {
    pub fn new(e: &'a AsymptoticExpansion, req: &ExpansionRequest, phi: &dyn MellinFunction) -> Result<Self> {
        req.validate(phi)?;
        if req.m_order > e.order() {
            return invalid(format!("M = {} exceeds expansion order {}", req.m_order, e.order()));
        }
        let contour = Contour::at(req.tau);
        let mut kernels = Vec::new();
        for m in 0..=req.m_order {
            kernels.push([
                ATransformKernel::new(e, m, Sign::Plus, phi, contour)?,
                ATransformKernel::new(e, m, Sign::Minus, phi, contour)?,
            ]);
        }
        Ok(ExpansionEvaluator { e, m_order: req.m_order, kernels, branch: Branch::Principal })
    }

    /// Σ_{m ≤ M, ±} e(±D) 𝒜_m^±(∓C²D) / (∓D)^{m+1+a/2}
    pub fn inside(&self, c: f64, d: f64) -> Result<Complex64> {
        self.sum(c, d, false)
    }

    /// Σ_{m ≤ M, ±} e(±D) (−1)^m 𝒜_m^±(±C²D) / (±D)^{m+1+a/2}
    pub fn outside(&self, c: f64, d: f64) -> Result<Complex64> {
        self.sum(c, d, true)
    }

    fn sum(&self, c: f64, d: f64, outside: bool) -> Result<Complex64> {
        if d == 0.0 || !(c > 0.0) {
            return invalid("expansion needs C > 0 and D ≠ 0");
        }
        let mut total = Complex64::new(0.0, 0.0);
        for m in 0..=self.m_order {
            let w = Complex64::new(m as f64 + 1.0 + 0.5 * self.e.a, 0.0);
            for (i, s) in Sign::BOTH.iter().enumerate() {
                let z = if outside { s.value() * d } else { -s.value() * d };
                let a = self.kernels[m][i].eval(c * c * z, self.branch)?;
                let sgn = if outside && m % 2 == 1 { -1.0 } else { 1.0 };
                total += eu(s.value() * d) * a * sgn / self.branch.pow(z, w);
            }
        }
        Ok(total)
    }
}

pub fn expansion_inside(
    e: &AsymptoticExpansion,
    req: &ExpansionRequest,
    phi: &dyn MellinFunction,
    c: f64,
    d: f64,
) -> Result<Complex64> {
    ExpansionEvaluator::new(e, req, phi)?.inside(c, d)
}

pub fn expansion_outside(
    e: &AsymptoticExpansion,
    req: &ExpansionRequest,
    phi: &dyn MellinFunction,
    c: f64,
    d: f64,
) -> Result<Complex64> {
    ExpansionEvaluator::new(e, req, phi)?.outside(c, d)
}

/// Leading term of the whole-line transform of h = |1−x²|^{a/2} h1:
/// Σ_± e(±D) c_0^{±,a}(Φ) [D^{−(1+a/2)} + (−D)^{−(1+a/2)}],
/// c_0^{±,a}(Φ) = c_0^±(0) Γ(1+a/2) Res_{u=0} Φ̃. Exactly 0 for a ≡ 0 (mod 4).
pub fn leading_term(e: &AsymptoticExpansion, phi: &dyn MellinFunction, c: f64, d: f64) -> Result<Complex64> {
    let _ = c;
    if phi.pole_order_at_0() >= 2 {
        return invalid("leading term needs at most a simple pole at u = 0");
    }
    if d == 0.0 {
        return invalid("D must be nonzero");
    }
    if e.a.fract() != 0.0 || e.a < -2.0 {
        return invalid("leading term needs an integer a ≥ −2");
    }
    if (e.a as i64).rem_euclid(4) == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w = Complex64::new(1.0 + 0.5 * e.a, 0.0);
    let gam = ln_gamma(w).exp();
    let res = phi.residue_at_0();
    let bracket = 1.0 / Branch::Principal.pow(d, w) + 1.0 / Branch::Principal.pow(-d, w);
    let mut total = Complex64::new(0.0, 0.0);
    for s in Sign::BOTH {
        let c0 = c_coeff(e, 0, Complex64::new(0.0, 0.0), s)?;
        total += eu(s.value() * d) * c0 * gam * res * bracket;
    }
    Ok(total)
}

/// Least-squares slope of log|y| against log x over points with y ≠ 0.
pub fn loglog_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let v: Vec<(f64, f64)> = pts.iter().filter(|(x, y)| *x > 0.0 && *y != 0.0).map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    if v.len() < 2 {
        return None;
    }
    let n = v.len() as f64;
    let mx = v.iter().map(|p| p.0).sum::<f64>() / n;
    let my = v.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = v.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(v.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Support radius and steepness of the outside test profile.
const LAW_R: f64 = 3.0;
const LAW_K: f64 = 4.0;

fn law_bump(x: f64) -> f64 {
    if x.abs() >= LAW_R {
        return 0.0;
    }
    let r2 = LAW_R * LAW_R;
    (LAW_K / (1.0 - 1.0 / r2) - LAW_K / (1.0 - x * x / r2)).exp()
}

/// Test profile of the error-law experiment: |1−x²|^{a/2}(1 + x/3) on
/// [−1, 1], |x²−1|^{a/2}·b(x) outside with b a bump of radius 3.
pub fn law_profile(a: f64, outside: bool) -> impl Fn(f64) -> f64 + Sync {
    move |x: f64| {
        let q = (1.0 - x * x).abs();
        if outside {
            q.powf(0.5 * a) * law_bump(x)
        } else if x.abs() < 1.0 {
            q.powf(0.5 * a) * (1.0 + x / 3.0)
        } else {
            0.0
        }
    }
}

/// Exact expansion coefficients of [`law_profile`] to the given order.
pub fn law_expansion(a: f64, outside: bool, order: usize) -> Result<AsymptoticExpansion> {
    let n = order + 1;
    let mut base = vec![0.0; n.max(2)];
    base[0] = 2.0;
    base[1] = -1.0;
    let sing = series::pow(&base, 0.5 * a);
    let coeffs = |s: f64| -> Vec<f64> {
        let h1 = if outside {
            let r2 = LAW_R * LAW_R;
            let mut q = vec![0.0; n.max(3)];
            q[0] = 1.0 - 1.0 / r2;
            q[1] = 2.0 / r2;
            q[2] = -1.0 / r2;
            let mut arg: Vec<f64> = series::inv(&q).iter().map(|v| -LAW_K * v).collect();
            arg[0] += LAW_K / (1.0 - 1.0 / r2);
            series::exp(&arg)
        } else {
            let mut v = vec![0.0; n.max(2)];
            v[0] = 1.0 + s / 3.0;
            v[1] = -s / 3.0;
            v
        };
        let mut c = series::mul(&sing, &h1);
        c.truncate(n);
        c
    };
    let mut e = AsymptoticExpansion::new(a, coeffs(1.0), coeffs(-1.0))?;
    e.fit_remainder(&law_profile(a, outside), outside);
    Ok(e)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorLawRow {
    pub d: f64,
    pub c: f64,
    pub oracle_re: f64,
    pub oracle_im: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ErrorLawReport {
    pub a: f64,
    pub m_order: usize,
    pub c2d: f64,
    pub outside: bool,
    pub rows: Vec<ErrorLawRow>,
    pub slope: Option<f64>,
    /// −(M + 2 + a/2)
    pub expected: f64,
}

/// |oracle − expansion| along D with C²D held fixed, and its log-log slope.
pub fn error_law(
    a: f64,
    m_order: usize,
    c2d: f64,
    outside: bool,
    ds: &[f64],
    phi: &dyn MellinFunction,
    tol: f64,
) -> Result<ErrorLawReport> {
    if !(c2d > 0.0) {
        return invalid("C²D must be positive");
    }
    let e = law_expansion(a, outside, m_order.max(3))?;
    let ev = ExpansionEvaluator::new(&e, &ExpansionRequest::new(m_order, 1.0, 0.0), phi)?;
    let h = law_profile(a, outside);
    let region = if outside { crate::oscint::Region::Outside } else { crate::oscint::Region::Inside };
    let mut rows = Vec::with_capacity(ds.len());
    for &d in ds {
        let c = (c2d / d.abs()).sqrt();
        let job = crate::oscint::FourierJob { c, d, a, region, h: &h, phi, tol, radius: LAW_R };
        let o = crate::oscint::fourier_singular(&job)?.value;
        let x = if outside { ev.outside(c, d)? } else { ev.inside(c, d)? };
        rows.push(ErrorLawRow { d, c, oracle_re: o.re, oracle_im: o.im, error: (o - x).norm() });
    }
    let slope = loglog_slope(&rows.iter().map(|r| (r.d.abs(), r.error)).collect::<Vec<_>>());
    Ok(ErrorLawReport { a, m_order, c2d, outside, rows, slope, expected: -(m_order as f64 + 2.0 + 0.5 * a) })
}

/// Truncated power series in t with real coefficients.
pub mod series {
    pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = a.len().min(b.len());
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += a[i] * b[j];
            }
        }
        out
    }

    /// 1/a, a[0] ≠ 0
    pub fn inv(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / a[0];
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += a[j] * out[k - j];
            }
            out[k] = -s / a[0];
        }
        out
    }

    /// exp(a)
    pub fn exp(a: &[f64]) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        out[0] = a[0].exp();
        // out' = a' out
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * a[j] * out[k - j];
            }
            out[k] = s / k as f64;
        }
        out
    }

    /// a^p, a[0] > 0
    pub fn pow(a: &[f64], p: f64) -> Vec<f64> {
        let n = a.len();
        let mut out = vec![0.0; n];
        out[0] = a[0].powf(p);
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += (p * j as f64 - (k - j) as f64) * a[j] * out[k - j];
            }
            out[k] = s / (k as f64 * a[0]);
        }
        out
    }

    /// Taylor coefficients at 0 of f on [0, s], by Chebyshev interpolation
    /// (one-sided; f need not extend past 0).
    pub fn taylor_from_samples(f: &dyn Fn(f64) -> f64, s: f64, order: usize) -> Vec<f64> {
        use std::f64::consts::PI;
        let n = 10usize;
        let vals: Vec<f64> = (0..n)
            .map(|k| f(0.5 * s * ((PI * (k as f64 + 0.5) / n as f64).cos() + 1.0)))
            .collect();
        let cheb: Vec<f64> = (0..n)
            .map(|j| {
                let acc: f64 = (0..n).map(|k| vals[k] * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos()).sum();
                if j == 0 { acc / n as f64 } else { 2.0 * acc / n as f64 }
            })
            .collect();
        // T_j^{(k)}(−1) = (−1)^{j+k} Π_{i<k} (j² − i²)/(2i + 1)
        let mut out = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            let mut d = 0.0;
            for (j, cj) in cheb.iter().enumerate() {
                let mut p = 1.0;
                for i in 0..k {
                    p *= ((j * j) as f64 - (i * i) as f64) / (2 * i + 1) as f64;
                }
                let sg = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                d += cj * sg * p;
            }
            out.push(d / fact * (2.0 / s).powi(k as i32));
        }
        out
    }
}
