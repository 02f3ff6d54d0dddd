//! Adaptive Gauss–Kronrod (7/15) quadrature for real, complex and
//! vector-valued integrands, with compensated summation.

use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Integrand values: anything with a vector-space structure and a norm.
pub trait Quadrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn norm1(&self) -> f64;
}

impl Quadrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn norm1(&self) -> f64 {
        self.abs()
    }
}

impl Quadrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm1(&self) -> f64 {
        self.norm()
    }
}

/// Compensated (Kahan–Babuška) accumulator.
#[derive(Clone, Copy, Debug)]
pub struct Neumaier<T: Quadrand> {
    sum: T,
    comp: T,
}

impl<T: Quadrand> Default for Neumaier<T> {
    fn default() -> Self {
        Neumaier { sum: T::zero(), comp: T::zero() }
    }
}

impl<T: Quadrand> Neumaier<T> {
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        // component-wise magnitude test is approximated by the norm
        if self.sum.norm1() >= x.norm1() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// One 15-point Kronrod panel: (integral, error estimate).
pub fn gk15<T: Quadrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64) {
    let (v, e, _) = gk15_floor(f, a, b);
    (v, e)
}

// As gk15, also returning the roundoff floor of the error estimate.
fn gk15_floor<T: Quadrand, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> (T, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    let mut absk = fc.norm1() * WGK[7];
    let mut fv = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = (f1, f2);
        rk = rk + (f1 + f2) * WGK[j];
        absk += (f1.norm1() + f2.norm1()) * WGK[j];
        if j % 2 == 1 {
            rg = rg + (f1 + f2) * WG[j / 2];
        }
    }
    let mean = rk * 0.5;
    let mut asc = (fc - mean).norm1() * WGK[7];
    for j in 0..7 {
        asc += ((fv[j].0 - mean).norm1() + (fv[j].1 - mean).norm1()) * WGK[j];
    }
    let result = rk * h;
    let asc = asc * h.abs();
    let absk = absk * h.abs();
    let mut err = ((rk - rg) * h).norm1();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * absk;
    if absk > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (result, err, floor)
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    floor: f64,
    order: usize,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error && self.order == o.order
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error
            .total_cmp(&o.error)
            .then_with(|| o.order.cmp(&self.order))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel, max_panels: 2000 }
    }
}

/// Adaptive integration over consecutive segments `[pts[i], pts[i+1]]`.
///
/// The global error budget is shared across segments; the final sum is
/// accumulated in segment/position order, so results are reproducible.
pub fn integrate_segments<T: Quadrand, F: FnMut(f64) -> T>(
    mut f: F,
    pts: &[f64],
    tol: Tolerance,
) -> Result<QuadResult<T>> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut order = 0;
    for w in pts.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e, fl) = gk15_floor(&mut f, w[0], w[1]);
        evals += 15;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e, floor: fl, order });
        order += 1;
    }
    let total = |heap: &BinaryHeap<Panel<T>>| {
        let mut s = Neumaier::<T>::default();
        let mut e = 0.0;
        for p in heap.iter() {
            s.add(p.value);
            e += p.error;
        }
        (s.value(), e)
    };
    let (mut val, mut err) = total(&heap);
    let mut since_resum = 0;
    // panels whose error is at the roundoff floor: no further splitting
    let mut done: Vec<Panel<T>> = Vec::new();
    let mut done_val = T::zero();
    while err > tol.abs.max(tol.rel * (val + done_val).norm1()) {
        if heap.len() + done.len() >= tol.max_panels.max(pts.len()) {
            heap.extend(done);
            let (v, e) = finish(heap);
            return Err(Error::NoConvergence { estimate: v.norm1(), error: e });
        }
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b || p.error <= p.floor {
            val = val - p.value;
            err -= p.error;
            done_val = done_val + p.value;
            done.push(p);
            continue;
        }
        let (v1, e1, f1) = gk15_floor(&mut f, p.a, m);
        let (v2, e2, f2) = gk15_floor(&mut f, m, p.b);
        evals += 30;
        val = val + (v1 + v2 - p.value);
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: m, value: v1, error: e1, floor: f1, order });
        heap.push(Panel { a: m, b: p.b, value: v2, error: e2, floor: f2, order: order + 1 });
        order += 2;
        since_resum += 1;
        if since_resum >= 64 {
            let (v, e) = total(&heap);
            val = v;
            err = e;
            since_resum = 0;
        }
    }
    heap.extend(done);
    let (value, error) = finish(heap);
    Ok(QuadResult { value, error, evals })
}

fn finish<T: Quadrand>(heap: BinaryHeap<Panel<T>>) -> (T, f64) {
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut s = Neumaier::<T>::default();
    let mut e = Neumaier::<f64>::default();
    for p in &panels {
        s.add(p.value);
        e.add(p.error);
    }
    (s.value(), e.value())
}

pub fn integrate<T: Quadrand, F: FnMut(f64) -> T>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<QuadResult<T>> {
    integrate_segments(f, &[a, b], tol)
}

/// Vector-valued variant: `f(x, out)` fills `out` (length `dim`). Each
/// initial segment is refined locally until its largest scaled component
/// error is within its length share of `tol`; panels are summed as they
/// are accepted, so memory stays O(dim). Panel errors use the QUADPACK
/// estimate from |K15 − G7| and the K15 absolute sum.
pub fn integrate_vec<F: FnMut(f64, &mut [Complex64])>(
    mut f: F,
    pts: &[f64],
    dim: usize,
    scale: &[f64],
    tol: f64,
    max_panels: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut rk = vec![Complex64::new(0.0, 0.0); dim];
    let mut rg = vec![Complex64::new(0.0, 0.0); dim];
    let mut ra = vec![0.0f64; dim];
    let mut acc: Vec<Neumaier<Complex64>> = (0..dim).map(|_| Neumaier::default()).collect();
    let total_len: f64 = pts.windows(2).map(|w| (w[1] - w[0]).max(0.0)).sum();
    if total_len <= 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); dim], 0.0));
    }
    let mut err_total = 0.0;
    let mut count = 0usize;
    let mut stack: Vec<(f64, f64)> = Vec::new();
    for w in pts.windows(2) {
        if !(w[0] < w[1]) {
            continue;
        }
        stack.push((w[0], w[1]));
        while let Some((a, b)) = stack.pop() {
            count += 1;
            let c = 0.5 * (a + b);
            let h = 0.5 * (b - a);
            rk.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            rg.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            ra.iter_mut().for_each(|z| *z = 0.0);
            f(c, &mut buf);
            for k in 0..dim {
                rk[k] += buf[k] * WGK[7];
                rg[k] += buf[k] * WG[3];
                ra[k] += buf[k].norm() * WGK[7];
            }
            for j in 0..7 {
                let dx = h * XGK[j];
                for x in [c - dx, c + dx] {
                    f(x, &mut buf);
                    for k in 0..dim {
                        rk[k] += buf[k] * WGK[j];
                        ra[k] += buf[k].norm() * WGK[j];
                        if j % 2 == 1 {
                            rg[k] += buf[k] * WG[j / 2];
                        }
                    }
                }
            }
            let mut worst: f64 = 0.0;
            for k in 0..dim {
                let d = (rk[k] - rg[k]).norm() * h;
                let asum = ra[k] * h;
                let e = if asum > 0.0 && d > 0.0 {
                    (asum * (200.0 * d / asum).powf(1.5).min(1.0)).max(50.0 * f64::EPSILON * asum)
                } else {
                    d
                };
                worst = worst.max(e / scale[k].max(f64::MIN_POSITIVE));
            }
            let share = tol * (b - a) / total_len;
            if worst <= share || !(a < c && c < b) || count >= max_panels {
                for k in 0..dim {
                    acc[k].add(rk[k] * h);
                }
                err_total += worst;
            } else {
                // right half first so the left half is processed next
                stack.push((c, b));
                stack.push((a, c));
            }
        }
    }
    let out: Vec<Complex64> = acc.iter().map(|s| s.value()).collect();
    if err_total > tol {
        return Err(Error::NoConvergence { estimate: out.first().map_or(0.0, |z| z.norm()), error: err_total });
    }
    Ok((out, err_total))
}
