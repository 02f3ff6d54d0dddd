//! Assembly of Σ(□) and Σ(ξ≠0) for a prime p from orbital-integral
//! surrogates θ^{pos}, θ^{neg}, with truncation audits and a prime scan.
//!
//! Σ(ξ≠0) is the sum of five lattice sums over (l, f, ξ), n = lf²,
//! C = n/(2√p), D = −ξ√p/(2n):
//!
//! 1. √p/2 · n^{−3/2} Kl(ξ,p)/√l · ∫_ℝ θ^{pos} F(C/√|x²−1|) e(xD)
//! 2. 1/4 · n^{−1/2} Kl(ξ,p)/√l · ∫_{|x|<1} θ^{pos}/√(1−x²) H1(C/√(1−x²)) e(xD)
//! 3. 1/4 · n^{−1/2} Kl(ξ,p)/√l · ∫_{|x|>1} θ^{pos}/√(x²−1) H0(C/√(x²−1)) e(xD)
//! 4. √p/2 · n^{−3/2} Kl(ξ,−p)/√l · ∫_ℝ θ^{neg} F(C/√(x²+1)) e(xD)
//! 5. 1/4 · n^{−1/2} Kl(ξ,±p)/√l · ∫_ℝ θ^{neg}/√(x²+1) H0(C/√(x²+1)) e(xD)

use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

use crate::asymp::{expansion_shift, series, AsymptoticExpansion, ExpansionEvaluator, ExpansionRequest};
use crate::charsum::kl_value;
use crate::error::{invalid, Result};
use crate::ntheory::{divisors, factorize, gcd, is_prime};
use crate::oscint::{fourier_batch, BatchIntegrand, Region};
use crate::specfun::{zeta_real, MellinFunction, F, H0, H1};

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// θ^{pos} = 2√|x²−1|·g1·1_{[−1,1]} + g2 and a smooth θ^{neg}.
#[derive(Clone)]
pub struct ThetaProfile {
    pub g1: Profile,
    pub g2: Profile,
    pub g2_radius: f64,
    pub neg: Profile,
    pub neg_radius: f64,
    /// expansions of θ1 = 2√|x²−1|g1 (a = 1) and θ2 = g2 (a = 0) at ±1
    pub pos_expansions: (AsymptoticExpansion, AsymptoticExpansion),
}

impl std::fmt::Debug for ThetaProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ThetaProfile")
            .field("g2_radius", &self.g2_radius)
            .field("neg_radius", &self.neg_radius)
            .field("pos_expansions", &self.pos_expansions)
            .finish()
    }
}

const EXPANSION_ORDER: usize = 4;

fn default_bump(x: f64, r: f64) -> f64 {
    let y = x / r;
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Taylor series of exp(−1/(1 − ((1−t)/r)²)) at t = 0.
fn bump_series(r: f64, n: usize) -> Vec<f64> {
    let r2 = r * r;
    let mut q = vec![0.0; n];
    q[0] = 1.0 - 1.0 / r2;
    if n > 1 {
        q[1] = 2.0 / r2;
    }
    if n > 2 {
        q[2] = -1.0 / r2;
    }
    let arg: Vec<f64> = series::inv(&q).iter().map(|v| -v).collect();
    series::exp(&arg)
}

impl ThetaProfile {
    /// g1 ≡ 1, g2 = e^{−1/(1−(x/2)²)}, θ^{neg} = e^{−1/(1−(x/1.5)²)}.
    pub fn default_profile() -> Self {
        let n = EXPANSION_ORDER + 1;
        // 2√(x(2−x)) = 2√2·√x·(1 − x/2)^{1/2}
        let mut base = vec![0.0; n];
        base[0] = 1.0;
        base[1] = -0.5;
        let a: Vec<f64> = series::pow(&base, 0.5).iter().map(|v| 2.0 * 2f64.sqrt() * v).collect();
        let b = bump_series(2.0, n);
        let mut e1 = AsymptoticExpansion::symmetric(1.0, a).expect("nonempty");
        let mut e2 = AsymptoticExpansion::symmetric(0.0, b).expect("nonempty");
        let th1 = |x: f64| if x.abs() <= 1.0 { 2.0 * (1.0 - x * x).sqrt() } else { 0.0 };
        e1.fit_remainder(&th1, false);
        e2.fit_remainder(&|x| default_bump(x, 2.0), false);
        ThetaProfile {
            g1: Arc::new(|_| 1.0),
            g2: Arc::new(|x| default_bump(x, 2.0)),
            g2_radius: 2.0,
            neg: Arc::new(|x| default_bump(x, 1.5)),
            neg_radius: 1.5,
            pos_expansions: (e1, e2),
        }
    }

    /// Custom profile; expansions are read off numerically.
    pub fn custom(g1: Profile, g2: Profile, g2_radius: f64, neg: Profile, neg_radius: f64) -> Result<Self> {
        for (name, g, r) in [("g2", &g2, g2_radius), ("theta_neg", &neg, neg_radius)] {
            if !(r.is_finite() && r > 0.0) {
                return invalid(format!("{name}: support radius must be finite and positive"));
            }
            for k in 0..=64 {
                let x = r * (1.0 + k as f64 / 16.0);
                if g(x) != 0.0 || g(-x) != 0.0 {
                    return invalid(format!("{name} does not vanish outside radius {r}"));
                }
            }
        }
        let g1c = g1.clone();
        let th1 = move |x: f64| if x.abs() <= 1.0 { 2.0 * (1.0 - x * x).sqrt() * g1c(x) } else { 0.0 };
        let e1 = crate::asymp::expansion_from_profile(&th1, 1.0, EXPANSION_ORDER, false)?;
        let g2c = g2.clone();
        let e2 = crate::asymp::expansion_from_profile(&move |x| g2c(x), 0.0, EXPANSION_ORDER, false)?;
        Ok(ThetaProfile { g1, g2, g2_radius, neg, neg_radius, pos_expansions: (e1, e2) })
    }

    /// α·self + β·other
    pub fn combine(&self, alpha: f64, other: &ThetaProfile, beta: f64) -> ThetaProfile {
        let lin = |u: &Profile, v: &Profile| -> Profile {
            let (u, v) = (u.clone(), v.clone());
            Arc::new(move |x| alpha * u(x) + beta * v(x))
        };
        let ex = |u: &AsymptoticExpansion, v: &AsymptoticExpansion| {
            let mix = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| alpha * a + beta * b).collect::<Vec<_>>();
            AsymptoticExpansion {
                a: u.a,
                coeffs_plus: mix(&u.coeffs_plus, &v.coeffs_plus),
                coeffs_minus: mix(&u.coeffs_minus, &v.coeffs_minus),
                kappa: u.kappa,
                remainder_bound: alpha.abs() * u.remainder_bound + beta.abs() * v.remainder_bound,
            }
        };
        ThetaProfile {
            g1: lin(&self.g1, &other.g1),
            g2: lin(&self.g2, &other.g2),
            g2_radius: self.g2_radius.max(other.g2_radius),
            neg: lin(&self.neg, &other.neg),
            neg_radius: self.neg_radius.max(other.neg_radius),
            pos_expansions: (
                ex(&self.pos_expansions.0, &other.pos_expansions.0),
                ex(&self.pos_expansions.1, &other.pos_expansions.1),
            ),
        }
    }

    pub fn scaled(&self, s: f64) -> ThetaProfile {
        self.combine(s, self, 0.0)
    }

    pub fn theta1(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            2.0 * (1.0 - x * x).sqrt() * (self.g1)(x)
        } else {
            0.0
        }
    }

    pub fn theta_pos(&self, x: f64) -> f64 {
        self.theta1(x) + (self.g2)(x)
    }

    pub fn theta_neg(&self, x: f64) -> f64 {
        (self.neg)(x)
    }
}

impl Default for ThetaProfile {
    fn default() -> Self {
        Self::default_profile()
    }
}

pub fn make_theta() -> ThetaProfile {
    ThetaProfile::default_profile()
}

/// Lattice truncation: lf² ≤ λ√p, f ≤ φ p^{1/4}, |ξ| ≤ max(χ0, χ√p/lf²).
///
/// The defaults are sized by the doubling audit: H0, H1 decay slowly in C,
/// which sets λ (and φ = √λ keeps f_max at the edge of lf² ≤ λ√p); the
/// transforms only die off once C²D is well past 1, which sets χ.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationPolicy {
    pub lambda: f64,
    pub phi: f64,
    pub chi0: f64,
    pub chi: f64,
    /// split of the lattice at lf²ξ/√p = T (bookkeeping for the two regions)
    pub region_split: f64,
    /// relative tolerance for the doubling audit
    pub tail_tol: f64,
    /// absolute quadrature tolerance per Fourier batch
    pub quad_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            lambda: 32.0,
            phi: 32f64.sqrt(),
            chi0: 16.0,
            chi: 1024.0,
            region_split: 1.0,
            tail_tol: 0.01,
            quad_tol: 1e-10,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("phi", self.phi), ("chi0", self.chi0), ("chi", self.chi)] {
            if !(v.is_finite() && v >= 1.0) {
                return invalid(format!("truncation parameter {name} must be ≥ 1, got {v}"));
            }
        }
        if !(self.region_split > 0.0) {
            return invalid("region split must be positive");
        }
        if !(self.tail_tol > 0.0) {
            return invalid("tail_tol must be positive");
        }
        if !(1e-13..=1e-4).contains(&self.quad_tol) {
            return invalid("quad_tol must lie in [1e−13, 1e−4]");
        }
        Ok(())
    }

    pub fn f_max(&self, p: u64) -> u64 {
        ((self.phi * (p as f64).powf(0.25)).floor() as u64).max(1)
    }

    pub fn l_max(&self, p: u64, f: u64) -> u64 {
        ((self.lambda * (p as f64).sqrt() / (f * f) as f64).floor() as u64).max(1)
    }

    pub fn xi_max(&self, p: u64, n: u64) -> u64 {
        (self.chi * (p as f64).sqrt() / n as f64).floor().max(self.chi0.floor()) as u64
    }

    fn doubled(&self, which: usize) -> TruncationPolicy {
        let mut d = *self;
        match which {
            0 => d.lambda *= 2.0,
            1 => d.phi *= 2.0,
            _ => {
                d.chi0 *= 2.0;
                d.chi *= 2.0;
            }
        }
        d
    }
}

/// Which character sum multiplies the fifth term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term5Sign {
    /// Kl(ξ, p), as printed
    #[default]
    Literal,
    /// Kl(ξ, −p), matching the fourth term
    Matched,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    /// quadrature for every Fourier factor
    Oracle,
    /// asymptotic expansions for the θ^{pos} factors when |D| ≥ min_d
    Expansion { m_order: usize, min_d: f64 },
}

impl Default for Method {
    fn default() -> Self {
        Method::Oracle
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationAudit {
    /// |Σ' − Σ| for λ → 2λ, φ → 2φ, (χ0, χ) → 2(χ0, χ)
    pub delta_l: f64,
    pub delta_f: f64,
    pub delta_xi: f64,
    /// max delta relative to |Σ(ξ≠0)|
    pub max_relative: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EllipticReport {
    pub p: u64,
    pub sigma_square: f64,
    pub sigma_xi: f64,
    /// imaginary part left after the ξ ↔ −ξ pairing
    pub sigma_xi_imag: f64,
    pub per_term_breakdown: [f64; 5],
    /// fifth term with the other character-sum sign
    pub term5_alternate: f64,
    pub term5_sign: Term5Sign,
    /// contributions with lf²|ξ|/√p ≤ T and > T
    pub small_region: f64,
    pub large_region: f64,
    pub lattice_points: usize,
    pub truncation_audit: TruncationAudit,
    pub runtime: f64,
    pub sigma0_note: String,
}

pub const SIGMA0_NOTE: &str = "Sigma(0) not evaluated; classified O(1) in terms of the archimedean test function";

fn weights_f_h(x: f64) -> f64 {
    F.eval(x) + x * H0.eval(x)
}

/// Σ_{f | m} 1/f Σ_{l ≥ 1, gcd(l, m/f) = 1} 1/l [F(lf²/m) + (lf²/m) H0(lf²/m)]
fn square_inner(m: u64, tol: f64) -> f64 {
    let mut total = 0.0;
    for f in divisors(m) {
        let g = m / f;
        let mut s = 0.0;
        let mut l = 1u64;
        loop {
            let x = (l * f * f) as f64 / m as f64;
            if x > 60.0 {
                break;
            }
            if gcd(l, g) == 1 {
                let w = weights_f_h(x);
                s += w / l as f64;
                if w.abs() < tol && x > 1.0 {
                    break;
                }
            }
            l += 1;
        }
        total += s / f as f64;
    }
    total
}

/// Σ(□) for an odd prime p.
pub fn sigma_square(p: u64, theta: &ThetaProfile, tol: f64) -> Result<f64> {
    check_prime(p)?;
    let sp = (p as f64).sqrt();
    let xp = (p + 1) as f64 / (2.0 * sp);
    let xm = (p - 1) as f64 / (2.0 * sp);
    let pos = theta.theta_pos(xp) + theta.theta_pos(-xp);
    let neg = theta.theta_neg(xm) + theta.theta_neg(-xm);
    let mut total = 0.0;
    if pos != 0.0 {
        total += pos * square_inner(p - 1, tol);
    }
    if neg != 0.0 {
        total += neg * square_inner(p + 1, tol);
    }
    Ok(total)
}

/// L(u, m²) = ζ(u) Σ_{f | m} f^{1−2u} Π_{q | m/f} (1 − q^{−u}), u > 1.
pub fn l_series(u: f64, m: u64) -> Result<f64> {
    if m == 0 {
        return invalid("m must be positive");
    }
    let z = zeta_real(u)?;
    let mut s = 0.0;
    for f in divisors(m) {
        let mut prod = 1.0;
        for (q, _) in factorize(m / f) {
            prod *= 1.0 - (q as f64).powf(-u);
        }
        s += (f as f64).powf(1.0 - 2.0 * u) * prod;
    }
    Ok(z * s)
}

fn check_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return invalid(format!("{p} is not an odd prime"));
    }
    Ok(())
}

/// Fourier factors I_1..I_5 at frequencies D_k = k·d0, k = 1..=kmax.
struct FourierTable {
    vals: [Vec<Complex64>; 5],
}

fn oracle_table(theta: &ThetaProfile, c: f64, d0: f64, kmax: usize, tol: f64) -> Result<FourierTable> {
    let th = theta.clone();
    let th_b = theta.clone();
    let w_in_f = move |x: f64, _q: f64| th.theta_pos(x);
    let w_in_h1 = move |x: f64, q: f64| th_b.theta_pos(x) / q.sqrt();
    let g2a = theta.g2.clone();
    let g2b = theta.g2.clone();
    let w_out_f = move |x: f64, _q: f64| g2a(x);
    let w_out_h0 = move |x: f64, q: f64| g2b(x) / q.sqrt();
    let na = theta.neg.clone();
    let nb = theta.neg.clone();
    let w_neg_f = move |x: f64, _q: f64| na(x);
    let w_neg_h0 = move |x: f64, q: f64| nb(x) / q.sqrt();
    let (inside, _) = fourier_batch(
        Region::Inside,
        c,
        d0,
        kmax,
        1.0,
        &[BatchIntegrand { weight: &w_in_f, phi: &F }, BatchIntegrand { weight: &w_in_h1, phi: &H1 }],
        tol,
    )?;
    let (outside, _) = fourier_batch(
        Region::Outside,
        c,
        d0,
        kmax,
        theta.g2_radius.max(1.0),
        &[BatchIntegrand { weight: &w_out_f, phi: &F }, BatchIntegrand { weight: &w_out_h0, phi: &H0 }],
        tol,
    )?;
    let (neg, _) = fourier_batch(
        Region::LineSmooth,
        c,
        d0,
        kmax,
        theta.neg_radius,
        &[BatchIntegrand { weight: &w_neg_f, phi: &F }, BatchIntegrand { weight: &w_neg_h0, phi: &H0 }],
        tol,
    )?;
    let i1: Vec<Complex64> = inside[0].iter().zip(&outside[0]).map(|(a, b)| a + b).collect();
    let [_, i2] = <[Vec<Complex64>; 2]>::try_from(inside).expect("two integrands");
    let [_, i3] = <[Vec<Complex64>; 2]>::try_from(outside).expect("two integrands");
    let [i4, i5] = <[Vec<Complex64>; 2]>::try_from(neg).expect("two integrands");
    Ok(FourierTable { vals: [i1, i2, i3, i4, i5] })
}

/// Expansion evaluators for the three θ^{pos} factors.
struct PosExpansions<'a> {
    // term 1: θ1 inside (a=1), g2 inside (a=0), g2 outside (a=0)
    t1: [ExpansionEvaluator<'a>; 3],
    // term 2: θ1/√(1−x²) (a=0), g2/√(1−x²) (a=−1)
    t2: [ExpansionEvaluator<'a>; 2],
    // term 3: g2/√(x²−1) (a=−1)
    t3: ExpansionEvaluator<'a>,
}

struct ShiftedExpansions {
    th1: AsymptoticExpansion,
    g2: AsymptoticExpansion,
    th1_s: AsymptoticExpansion,
    g2_s: AsymptoticExpansion,
}

impl ShiftedExpansions {
    fn new(theta: &ThetaProfile) -> Self {
        let th1 = theta.pos_expansions.0.clone();
        let g2 = theta.pos_expansions.1.clone();
        ShiftedExpansions { th1_s: expansion_shift(&th1, -0.5), g2_s: expansion_shift(&g2, -0.5), th1, g2 }
    }
}

impl<'a> PosExpansions<'a> {
    fn new(s: &'a ShiftedExpansions, m_order: usize) -> Result<Self> {
        let rf = ExpansionRequest::new(m_order, 1.0, 0.0);
        let rh0 = ExpansionRequest::new(m_order, 1.0, 0.5);
        Ok(PosExpansions {
            t1: [
                ExpansionEvaluator::new(&s.th1, &rf, &F)?,
                ExpansionEvaluator::new(&s.g2, &rf, &F)?,
                ExpansionEvaluator::new(&s.g2, &rf, &F)?,
            ],
            t2: [ExpansionEvaluator::new(&s.th1_s, &rf, &H1)?, ExpansionEvaluator::new(&s.g2_s, &rf, &H1)?],
            t3: ExpansionEvaluator::new(&s.g2_s, &rh0, &H0)?,
        })
    }

    fn eval(&self, c: f64, d: f64) -> Result<[Complex64; 3]> {
        let t1 = self.t1[0].inside(c, d)? + self.t1[1].inside(c, d)? + self.t1[2].outside(c, d)?;
        let t2 = self.t2[0].inside(c, d)? + self.t2[1].inside(c, d)?;
        let t3 = self.t3.outside(c, d)?;
        Ok([t1, t2, t3])
    }
}

/// Contributions of one n = lf² to the base sum and the three audits.
#[derive(Clone, Default)]
struct NContribution {
    // [variant][term]: variant 0 base, 1 λ doubled, 2 φ doubled, 3 χ doubled;
    // term 0..5 with index 5 the alternate fifth term
    sums: [[Complex64; 6]; 4],
    small: Complex64,
    large: Complex64,
    points: usize,
}

struct LatticeCtx<'a> {
    p: u64,
    theta: &'a ThetaProfile,
    policy: TruncationPolicy,
    method: Method,
    term5: Term5Sign,
}

fn n_contribution(ctx: &LatticeCtx, n: u64, pairs: &[(u64, u64)], pos_exp: Option<&PosExpansions>) -> Result<NContribution> {
    let p = ctx.p;
    let pol = ctx.policy;
    let variants = [pol, pol.doubled(0), pol.doubled(1), pol.doubled(2)];
    // membership of each pair in each variant
    let member: Vec<[bool; 4]> = pairs
        .iter()
        .map(|&(l, f)| {
            let mut m = [false; 4];
            for (v, pv) in variants.iter().enumerate() {
                m[v] = f <= pv.f_max(p) && l <= pv.l_max(p, f);
            }
            m
        })
        .collect();
    let xi_lim: [u64; 4] = [0, 1, 2, 3].map(|v| variants[v].xi_max(p, n));
    let mut kmax = 0u64;
    for m in &member {
        for v in 0..4 {
            if m[v] {
                kmax = kmax.max(xi_lim[v]);
            }
        }
    }
    let mut out = NContribution::default();
    if kmax == 0 {
        return Ok(out);
    }
    let modulus = 4 * n;
    // Kl tables over residues mod 4n for ±ξ and n = ±p
    let pi = p as i64;
    let mut kl: Vec<(u64, u64, Vec<[f64; 4]>)> = Vec::new();
    let mut any = false;
    for &(l, f) in pairs {
        let reps = (modulus as usize).min(kmax as usize);
        let mut tab = Vec::with_capacity(reps);
        for r in 1..=reps as i64 {
            // even in ξ: the summand only sees a²
            let (kp, km) = (kl_value(l, f, r, pi)?, kl_value(l, f, r, -pi)?);
            let v = [kp, kp, km, km];
            any |= v.iter().any(|x| *x != 0.0);
            tab.push(v);
        }
        kl.push((l, f, tab));
    }
    if !any {
        return Ok(out);
    }
    let sp = (p as f64).sqrt();
    let c = n as f64 / (2.0 * sp);
    let d0 = -sp / (2.0 * n as f64);
    let kmax = kmax as usize;
    let table = oracle_table(ctx.theta, c, d0, kmax, pol.quad_tol)?;
    let nf = n as f64;
    let w_f = 0.5 * sp * nf.powf(-1.5);
    let w_h = 0.25 / nf.sqrt();
    for k in 1..=kmax {
        let d = k as f64 * d0;
        let mut vals = [table.vals[0][k - 1], table.vals[1][k - 1], table.vals[2][k - 1]];
        if let (Method::Expansion { min_d, .. }, Some(pe)) = (ctx.method, pos_exp) {
            if d.abs() >= min_d {
                vals = pe.eval(c, d)?;
            }
        }
        let fv = [vals[0], vals[1], vals[2], table.vals[3][k - 1], table.vals[4][k - 1]];
        let large = nf * k as f64 / sp > pol.region_split;
        for (pi_, (l, _f, tab)) in kl.iter().enumerate() {
            let m = member[pi_];
            let row = &tab[(k - 1) % tab.len()];
            let inv_sl = 1.0 / (*l as f64).sqrt();
            for (sgn, conj) in [(0usize, false), (1usize, true)] {
                let klp = row[sgn];
                let klm = row[2 + sgn];
                if klp == 0.0 && klm == 0.0 {
                    continue;
                }
                let g = |z: Complex64| if conj { z.conj() } else { z };
                let terms = [
                    g(fv[0]) * (w_f * klp * inv_sl),
                    g(fv[1]) * (w_h * klp * inv_sl),
                    g(fv[2]) * (w_h * klp * inv_sl),
                    g(fv[3]) * (w_f * klm * inv_sl),
                    g(fv[4]) * (w_h * klp * inv_sl),
                    g(fv[4]) * (w_h * klm * inv_sl),
                ];
                let chosen5 = if ctx.term5 == Term5Sign::Literal { terms[4] } else { terms[5] };
                let alt5 = if ctx.term5 == Term5Sign::Literal { terms[5] } else { terms[4] };
                let ordered = [terms[0], terms[1], terms[2], terms[3], chosen5, alt5];
                for v in 0..4 {
                    if m[v] && k as u64 <= xi_lim[v] {
                        for t in 0..6 {
                            out.sums[v][t] += ordered[t];
                        }
                    }
                }
                if m[0] && k as u64 <= xi_lim[0] {
                    out.points += 1;
                    let s5: Complex64 = ordered[..5].iter().sum();
                    if large {
                        out.large += s5;
                    } else {
                        out.small += s5;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Σ(ξ≠0) with its truncation audit, plus Σ(□).
pub fn sigma_xi(
    p: u64,
    theta: &ThetaProfile,
    policy: &TruncationPolicy,
    method: Method,
    term5: Term5Sign,
) -> Result<EllipticReport> {
    check_prime(p)?;
    policy.validate()?;
    let start = Instant::now();
    // lattice of n = lf² over the union of all audit variants
    let mut by_n: std::collections::BTreeMap<u64, Vec<(u64, u64)>> = Default::default();
    let f_top = policy.doubled(1).f_max(p);
    let lam2 = policy.doubled(0);
    for f in 1..=f_top {
        let lmax = lam2.l_max(p, f).max(policy.doubled(1).l_max(p, f));
        for l in 1..=lmax {
            by_n.entry(l * f * f).or_default().push((l, f));
        }
    }
    let shifted = ShiftedExpansions::new(theta);
    let pos_exp = match method {
        Method::Expansion { m_order, .. } => Some(PosExpansions::new(&shifted, m_order)?),
        Method::Oracle => None,
    };
    let ctx = LatticeCtx { p, theta, policy: *policy, method, term5 };
    let jobs: Vec<(u64, Vec<(u64, u64)>)> = by_n.into_iter().collect();
    let parts: Vec<Result<NContribution>> =
        jobs.par_iter().map(|(n, pairs)| n_contribution(&ctx, *n, pairs, pos_exp.as_ref())).collect();
    // fixed-order reduction
    let mut sums = [[Complex64::new(0.0, 0.0); 6]; 4];
    let mut small = Complex64::new(0.0, 0.0);
    let mut large = Complex64::new(0.0, 0.0);
    let mut points = 0usize;
    for part in parts {
        let part = part?;
        for v in 0..4 {
            for t in 0..6 {
                sums[v][t] += part.sums[v][t];
            }
        }
        small += part.small;
        large += part.large;
        points += part.points;
    }
    let total = |v: usize| -> Complex64 { sums[v][..5].iter().sum() };
    let base = total(0);
    let deltas = [1, 2, 3].map(|v| (total(v) - base).norm());
    let max_rel = deltas.iter().cloned().fold(0.0, f64::max) / base.norm().max(f64::MIN_POSITIVE);
    let audit = TruncationAudit {
        delta_l: deltas[0],
        delta_f: deltas[1],
        delta_xi: deltas[2],
        max_relative: max_rel,
        passed: max_rel < policy.tail_tol,
    };
    let sq = sigma_square(p, theta, 1e-16)?;
    let terms = [0, 1, 2, 3, 4].map(|t| sums[0][t].re);
    Ok(EllipticReport {
        p,
        sigma_square: sq,
        sigma_xi: base.re,
        sigma_xi_imag: base.im,
        per_term_breakdown: terms,
        term5_alternate: sums[0][5].re,
        term5_sign: term5,
        small_region: small.re,
        large_region: large.re,
        lattice_points: points,
        truncation_audit: audit,
        runtime: start.elapsed().as_secs_f64(),
        sigma0_note: SIGMA0_NOTE.to_string(),
    })
}

pub use crate::asymp::loglog_slope;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScanReport {
    pub reports: Vec<EllipticReport>,
    pub slope_sigma_xi: Option<f64>,
    /// None when Σ(□) vanishes at all but one prime
    pub slope_sigma_square: Option<f64>,
    pub audit_failures: Vec<u64>,
}

pub fn scan(primes: &[u64], theta: &ThetaProfile, policy: &TruncationPolicy, method: Method) -> Result<ScanReport> {
    if primes.len() < 8 {
        return invalid("scan needs at least 8 primes");
    }
    let lo = *primes.iter().min().expect("nonempty");
    let hi = *primes.iter().max().expect("nonempty");
    if (hi as f64) < 10.0 * lo as f64 * 0.999 {
        return invalid("scan primes must span at least a decade");
    }
    let mut reports = Vec::with_capacity(primes.len());
    for &p in primes {
        reports.push(sigma_xi(p, theta, policy, method, Term5Sign::Literal)?);
    }
    let slope_sigma_xi = loglog_slope(&reports.iter().map(|r| (r.p as f64, r.sigma_xi)).collect::<Vec<_>>());
    let slope_sigma_square = loglog_slope(&reports.iter().map(|r| (r.p as f64, r.sigma_square)).collect::<Vec<_>>());
    let audit_failures = reports.iter().filter(|r| !r.truncation_audit.passed).map(|r| r.p).collect();
    Ok(ScanReport { reports, slope_sigma_xi, slope_sigma_square, audit_failures })
}

pub const CSV_SCHEMA: &str = "# elliptika-schema v1";
pub const CSV_COLUMNS: &str = "p,sigma_square,sigma_xi,term1,term2,term3,term4,term5,audit_delta,seconds";

/// CSV body for a scan (no header lines).
pub fn csv_rows(reports: &[EllipticReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let audit = r.truncation_audit.delta_l.max(r.truncation_audit.delta_f).max(r.truncation_audit.delta_xi);
        s.push_str(&format!("{},{:e},{:e}", r.p, r.sigma_square, r.sigma_xi));
        for t in r.per_term_breakdown {
            s.push_str(&format!(",{t:e}"));
        }
        s.push_str(&format!(",{audit:e},{:.3}\n", r.runtime));
    }
    s
}

/// Full CSV text: schema line, config echo, column header, rows and a
/// trailing slope comment.
pub fn scan_csv(report: &ScanReport, config_json: &str) -> String {
    let mut s = format!("{CSV_SCHEMA}\n# config: {config_json}\n{CSV_COLUMNS}\n");
    s.push_str(&csv_rows(&report.reports));
    let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.6}"));
    s.push_str(&format!(
        "# slope_sigma_xi={} slope_sigma_square={}\n",
        fmt(report.slope_sigma_xi),
        fmt(report.slope_sigma_square)
    ));
    s
}

/// Odd primes in [lo, hi].
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi).filter(|&n| is_prime(n)).collect()
}

/// `count` primes spread log-uniformly over [lo, hi].
pub fn spread_primes(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let all = primes_between(lo, hi);
    if all.len() <= count || count < 2 {
        return all;
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = Vec::with_capacity(count);
    for i in 0..count {
        let target = (a + (b - a) * i as f64 / (count - 1) as f64).exp();
        let idx = all.partition_point(|&q| (q as f64) < target).min(all.len() - 1);
        let mut q = all[idx];
        if idx > 0 && (target - all[idx - 1] as f64).abs() < (q as f64 - target).abs() {
            q = all[idx - 1];
        }
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

/// One envelope family of Fourier factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    /// lf²ξ/√p small: (lf²/√p)^{3/2}/√ξ, with a log factor for the H0 row
    SmallRegion,
    /// lf²ξ/√p large: (√p/(lf²ξ))^N / ξ²
    LargeRegion { n: u32 },
    /// θ^{neg} rows: (lf²/√p)^{M−N1} / ξ^M
    Smooth { m: u32, n1: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnvelopeRow {
    pub l: u64,
    pub f: u64,
    pub xi: u64,
    /// which integral: 0 θ^{pos}F, 1 (lf²/√p)·θ^{pos}H1, 2 (lf²/√p)·θ^{pos}H0,
    /// 3 θ^{neg}F, 4 θ^{neg}H0
    pub row: usize,
    pub value: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EnvelopeReport {
    pub p: u64,
    pub kind: EnvelopeKind,
    pub rows: Vec<EnvelopeRow>,
    /// fitted constant per integral row (max ratio)
    pub max_ratio: Vec<f64>,
}

impl EnvelopeReport {
    pub fn overall_max(&self) -> f64 {
        self.max_ratio.iter().cloned().fold(0.0, f64::max)
    }
}

/// (l, f, ξ) points in the regime of `kind`, with x = lf²ξ/√p and r = lf²/√p:
/// x ≤ 1/4, ξ ≤ 64 (small region); x ≥ 10, r ≤ 64, ξ ≤ 4096 and
/// D = ξ/2r ≤ 4096 (large region: the box has to reach past the onset of the
/// C-decay near r ≈ 10 and D ≈ 5, where the envelope ratio peaks); r ≤ 1,
/// ξ ≤ 32 (θ^{neg}). The coarse grid takes l and ξ on powers of two; `refine`
/// adds the points ⌊2^{k/2}⌋ in between, over the same box.
pub fn envelope_grid(p: u64, kind: EnvelopeKind, refine: bool) -> Result<Vec<(u64, u64, u64)>> {
    check_prime(p)?;
    let sp = (p as f64).sqrt();
    let ladder = |max: u64| -> Vec<u64> {
        let mut v: Vec<u64> = (0..)
            .map(|k: i32| if refine { 2f64.powf(k as f64 / 2.0).floor() as u64 } else { 1u64 << k })
            .take_while(|&x| x <= max)
            .collect();
        v.dedup();
        v
    };
    let (r_max, xi_max) = match kind {
        EnvelopeKind::SmallRegion => (0.25, 64),
        EnvelopeKind::LargeRegion { .. } => (64.0, 4096),
        EnvelopeKind::Smooth { .. } => (1.0, 32),
    };
    let mut out = Vec::new();
    for f in [1u64, 2, 3] {
        for &l in &ladder((r_max * sp / (f * f) as f64).floor() as u64) {
            let r = (l * f * f) as f64 / sp;
            for &xi in &ladder(xi_max) {
                let x = r * xi as f64;
                let keep = match kind {
                    EnvelopeKind::SmallRegion => x <= 0.25,
                    EnvelopeKind::LargeRegion { .. } => x >= 10.0 && xi as f64 / (2.0 * r) <= 4096.0,
                    EnvelopeKind::Smooth { .. } => true,
                };
                if keep {
                    out.push((l, f, xi));
                }
            }
        }
    }
    if out.is_empty() {
        return invalid(format!("no grid points for {kind:?} at p = {p}"));
    }
    Ok(out)
}

/// Oracle Fourier factors on a (l, f, ξ) grid against the envelope `kind`.
pub fn envelope_check(
    p: u64,
    theta: &ThetaProfile,
    grid: &[(u64, u64, u64)],
    kind: EnvelopeKind,
    tol: f64,
) -> Result<EnvelopeReport> {
    check_prime(p)?;
    let sp = (p as f64).sqrt();
    let rows_for: &[usize] = match kind {
        EnvelopeKind::Smooth { .. } => &[3, 4],
        _ => &[0, 1, 2],
    };
    let results: Vec<Result<Vec<EnvelopeRow>>> = grid
        .par_iter()
        .map(|&(l, f, xi)| {
            if l == 0 || f == 0 || xi == 0 {
                return invalid("grid entries must be positive");
            }
            let n = l * f * f;
            let nf = n as f64;
            let c = nf / (2.0 * sp);
            let d = -(xi as f64) * sp / (2.0 * nf);
            let t = oracle_table(theta, c, d, 1, tol)?;
            let r = nf / sp; // lf²/√p
            let x = r * xi as f64; // lf²ξ/√p
            let mut out = Vec::new();
            for &row in rows_for {
                let mut v = t.vals[row][0].norm();
                if row == 1 || row == 2 {
                    v *= r;
                }
                let env = match kind {
                    EnvelopeKind::SmallRegion => {
                        let base = r.powf(1.5) / (xi as f64).sqrt();
                        if row == 2 {
                            base * (1.0 + x.ln().abs())
                        } else {
                            base
                        }
                    }
                    EnvelopeKind::LargeRegion { n } => (1.0 / x).powi(n as i32) / (xi as f64).powi(2),
                    EnvelopeKind::Smooth { m, n1 } => r.powi(m as i32 - n1 as i32) / (xi as f64).powi(m as i32),
                };
                out.push(EnvelopeRow { l, f, xi, row, value: v, envelope: env, ratio: v / env });
            }
            Ok(out)
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let max_ratio = rows_for
        .iter()
        .map(|&row| rows.iter().filter(|r| r.row == row).map(|r| r.ratio).fold(0.0, f64::max))
        .collect();
    Ok(EnvelopeReport { p, kind, rows, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_expansion_coefficients() {
        let t = make_theta();
        let e = &t.pos_expansions.0;
        assert!((e.coeffs_plus[0] - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((e.coeffs_plus[1] + 2f64.sqrt() / 2.0).abs() < 1e-14);
        assert!(e.remainder_bound.is_finite());
        assert!((t.theta_pos(0.0) - (2.0 + (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn bump_series_matches_function() {
        let c = bump_series(2.0, 5);
        let t: f64 = 0.01;
        let approx: f64 = c.iter().enumerate().map(|(k, v)| v * t.powi(k as i32)).sum();
        assert!((approx - default_bump(1.0 - t, 2.0)).abs() < 1e-11);
    }

    #[test]
    fn truncation_bounds() {
        let pol = TruncationPolicy { lambda: 8.0, phi: 8f64.sqrt(), chi0: 8.0, chi: 8.0, ..Default::default() };
        assert_eq!(pol.l_max(101, 1), 80);
        assert_eq!(pol.f_max(101), 8);
        assert_eq!(pol.xi_max(101, 1), 80);
        assert_eq!(pol.xi_max(101, 50), 8);
        let pol = TruncationPolicy::default();
        assert_eq!(pol.l_max(101, 1), 321);
        assert_eq!(pol.f_max(101), 17);
        assert_eq!(pol.l_max(101, 17), 1);
        assert_eq!(pol.xi_max(101, 1), 10291);
        assert_eq!(pol.xi_max(101, 5000), 16);
    }

    #[test]
    fn l_series_trivial_modulus() {
        let v = l_series(2.0, 1).unwrap();
        assert!((v - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert!(l_series(1.0, 4).is_err());
    }
}
