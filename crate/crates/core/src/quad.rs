//! Globally adaptive Gauss–Kronrod (7, 15) quadrature for real- and
//! complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that can be integrated: a real vector space with a norm.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_64, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One panel: Kronrod estimate and an error estimate in the QUADPACK style,
/// `|K - G|` rescaled against the panel's variation and floored at rounding level.
pub fn gk15<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut fv = [T::zero(); 15];
    fv[7] = f(c);
    for j in 0..7 {
        let dx = h * XGK[j];
        fv[j] = f(c - dx);
        fv[14 - j] = f(c + dx);
    }
    let mut k = fv[7] * WGK[7];
    let mut g = fv[7] * WG[3];
    let mut resabs = fv[7].magnitude() * WGK[7];
    for j in 0..7 {
        let s = fv[j] + fv[14 - j];
        k = k + s * WGK[j];
        resabs += WGK[j] * (fv[j].magnitude() + fv[14 - j].magnitude());
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let mean = k * 0.5;
    let mut resasc = WGK[7] * (fv[7] - mean).magnitude();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).magnitude() + (fv[14 - j] - mean).magnitude());
    }
    let h = h.abs();
    let (resabs, resasc) = (resabs * h, resasc * h);
    let mut err = (k - g).magnitude() * h;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (k * h, err)
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Equal-width panels to start from; raise it for oscillatory integrands.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-11, rel_tol: 1e-11, initial_panels: 1, max_panels: 200_000 }
    }
}

impl QuadOptions {
    pub fn with_panels(mut self, n: usize) -> Self {
        self.initial_panels = n.max(1);
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
    pub converged: bool,
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    seq: usize,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    // largest error first, ties broken by creation order so refinement is deterministic
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// `∫_a^b f(t) dt`, bisecting the worst panel until the summed error estimate
/// is below `max(abs_tol, rel_tol · |value|)`.
pub fn integrate<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, opts: &QuadOptions) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: 0.0, panels: 0, converged: true };
    }
    let n = opts.initial_panels.max(1);
    let width = (b - a) / n as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n);
    let mut seq = 0;
    let (mut value, mut error) = (T::zero(), 0.0);
    for i in 0..n {
        let lo = a + width * i as f64;
        let hi = if i + 1 == n { b } else { a + width * (i + 1) as f64 };
        let (v, e) = gk15(&f, lo, hi);
        value = value + v;
        error += e;
        heap.push(Panel { a: lo, b: hi, value: v, error: e, seq });
        seq += 1;
    }
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
        if error <= target || heap.len() >= opts.max_panels {
            // re-sum to shed drift from the running updates before deciding
            (value, error) = heap.iter().fold((T::zero(), 0.0), |(v, e), p| (v + p.value, e + p.error));
            let target = opts.abs_tol.max(opts.rel_tol * value.magnitude());
            if error <= target || heap.len() >= opts.max_panels {
                return QuadResult { value, error, panels: heap.len(), converged: error <= target };
            }
        }
        let worst = heap.pop().expect("nonempty panel heap");
        value = value - worst.value;
        error -= worst.error;
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot bisect further in floating point
            value = value + worst.value;
            heap.push(Panel { error: 0.0, ..worst });
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(&f, lo, hi);
            value = value + v;
            error += e;
            heap.push(Panel { a: lo, b: hi, value: v, error: e, seq });
            seq += 1;
        }
    }
}

/// Composite Simpson rule on `2 * half_intervals` subintervals; used as an
/// independent oracle in tests.
pub fn simpson<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, half_intervals: usize) -> T {
    let n = 2 * half_intervals.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc = acc + f(a + h * i as f64) * w;
    }
    acc * (h / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_exact() {
        let r = integrate(|t: f64| t.powi(20), 0.0, 1.0, &QuadOptions::default());
        assert!((r.value - 1.0 / 21.0).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn oscillatory_complex() {
        let w = 200.0;
        let r = integrate(|t: f64| Complex64::new(0.0, w * t).exp(), 0.0, 1.0, &QuadOptions::default().with_panels(40));
        let exact = (Complex64::new(0.0, w).exp() - 1.0) / Complex64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_refines() {
        let r = integrate(|t: f64| t.sqrt(), 0.0, 1.0, &QuadOptions::default());
        assert!((r.value - 2.0 / 3.0).abs() < 1e-10);
        let r = integrate(|t: f64| t.sin(), 0.0, PI, &QuadOptions::default());
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_matches() {
        let s = simpson(|t: f64| t.exp(), 0.0, 1.0, 500);
        assert!((s - (1f64.exp() - 1.0)).abs() < 1e-12);
    }
}
