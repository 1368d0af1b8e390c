//! Smooth compactly supported windows, dyadic partitions of unity, Fourier
//! and Hankel-type transforms, and residual checks of the Poisson and
//! Voronoi summation formulas.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bessel::bessel_j_fast;
use crate::error::{Error, Result};
use crate::expsums::phase;
use crate::heckecoeffs::CuspFormTable;
use crate::modarith::{gcd_signed, mod_inverse};
use crate::quad::{gk15, integrate, QuadOptions};

fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

const GLUE_PANELS: usize = 64;

/// Cumulative integrals of `exp(-1/(1-s^2))` on a fixed panel grid of `[-1, 1]`.
struct Glue {
    cumulative: [f64; GLUE_PANELS + 1],
}

impl Glue {
    fn get() -> &'static Glue {
        static GLUE: OnceLock<Glue> = OnceLock::new();
        GLUE.get_or_init(|| {
            let mut cumulative = [0.0; GLUE_PANELS + 1];
            for j in 0..GLUE_PANELS {
                let (a, b) = (Self::node(j), Self::node(j + 1));
                cumulative[j + 1] = cumulative[j] + gk15(&bump_profile, a, b).0;
            }
            Glue { cumulative }
        })
    }

    fn node(j: usize) -> f64 {
        -1.0 + 2.0 * j as f64 / GLUE_PANELS as f64
    }

    fn total(&self) -> f64 {
        self.cumulative[GLUE_PANELS]
    }

    /// `∫_{-1}^{y} exp(-1/(1-s^2)) ds`.
    fn partial(&self, y: f64) -> f64 {
        if y <= -1.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return self.total();
        }
        let j = (((y + 1.0) * 0.5 * GLUE_PANELS as f64) as usize).min(GLUE_PANELS - 1);
        self.cumulative[j] + gk15(&bump_profile, Self::node(j), y).0
    }
}

/// Smooth monotone step: 0 for `v ≤ 0`, 1 for `v ≥ 1`, `C^∞` everywhere.
pub fn glue(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v >= 1.0 {
        1.0
    } else {
        let g = Glue::get();
        g.partial(2.0 * v - 1.0) / g.total()
    }
}

/// Derivative of [`glue`].
pub fn glue_derivative(v: f64) -> f64 {
    if v <= 0.0 || v >= 1.0 {
        0.0
    } else {
        2.0 * bump_profile(2.0 * v - 1.0) / Glue::get().total()
    }
}

/// A compactly supported smooth weight on the positive reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothWindow {
    Zero,
    /// 0 outside `[c1, c2]`, 1 on `[lo, hi]`, glued smoothly in between.
    Bump {
        c1: f64,
        lo: f64,
        hi: f64,
        c2: f64,
    },
    /// `b_l(t/scale)` where `w = log t / log Δ` rises on `[l-1, l]` and falls on `[l, l+1]`.
    Dyadic {
        log_delta: f64,
        index: i64,
        scale: f64,
    },
}

type Interval = (f64, f64);

/// Canonical window: support `[1/2, 3]`, identically 1 on `[1, 2]`.
pub fn canonical_window() -> SmoothWindow {
    SmoothWindow::Bump { c1: 0.5, lo: 1.0, hi: 2.0, c2: 3.0 }
}

pub fn bump_window(c1: f64, lo: f64, hi: f64, c2: f64) -> Result<SmoothWindow> {
    let finite = [c1, lo, hi, c2].iter().all(|v| v.is_finite());
    if !finite || !(0.0 < c1 && c1 < lo && lo < hi && hi < c2) {
        return Err(Error::InvalidArgument(format!(
            "window needs 0 < c1 < lo < hi < c2, got ({c1}, {lo}, {hi}, {c2})"
        )));
    }
    Ok(SmoothWindow::Bump { c1, lo, hi, c2 })
}

impl SmoothWindow {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            SmoothWindow::Zero => 0.0,
            SmoothWindow::Bump { c1, lo, hi, c2 } => {
                if t <= c1 || t >= c2 {
                    0.0
                } else if t < lo {
                    glue((t - c1) / (lo - c1))
                } else if t <= hi {
                    1.0
                } else {
                    glue((c2 - t) / (c2 - hi))
                }
            }
            SmoothWindow::Dyadic { log_delta, index, scale } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let w = (t / scale).ln() / log_delta - index as f64;
                if w <= -1.0 || w >= 1.0 {
                    0.0
                } else if w <= 0.0 {
                    glue(w + 1.0)
                } else {
                    1.0 - glue(w)
                }
            }
        }
    }

    /// First derivative in `t`.
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            SmoothWindow::Zero => 0.0,
            SmoothWindow::Bump { c1, lo, hi, c2 } => {
                if t <= c1 || t >= c2 || (lo..=hi).contains(&t) {
                    0.0
                } else if t < lo {
                    glue_derivative((t - c1) / (lo - c1)) / (lo - c1)
                } else {
                    -glue_derivative((c2 - t) / (c2 - hi)) / (c2 - hi)
                }
            }
            SmoothWindow::Dyadic { log_delta, index, scale } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let dw = 1.0 / (t * log_delta);
                let w = (t / scale).ln() / log_delta - index as f64;
                if w <= -1.0 || w >= 1.0 {
                    0.0
                } else if w <= 0.0 {
                    glue_derivative(w + 1.0) * dw
                } else {
                    -glue_derivative(w) * dw
                }
            }
        }
    }

    /// Highest derivative order that [`SmoothWindow::derivative`] provides.
    pub fn derivative_order_hint(&self) -> u32 {
        1
    }

    /// Closed support `[c1, c2]`; `None` for the zero window.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            SmoothWindow::Zero => None,
            SmoothWindow::Bump { c1, c2, .. } => Some((c1, c2)),
            SmoothWindow::Dyadic { log_delta, index, scale } => {
                Some((scale * ((index - 1) as f64 * log_delta).exp(), scale * ((index + 1) as f64 * log_delta).exp()))
            }
        }
    }

    /// `t ↦ W(t / factor)`.
    pub fn scaled(&self, factor: f64) -> SmoothWindow {
        match *self {
            SmoothWindow::Zero => SmoothWindow::Zero,
            SmoothWindow::Bump { c1, lo, hi, c2 } => {
                SmoothWindow::Bump { c1: c1 * factor, lo: lo * factor, hi: hi * factor, c2: c2 * factor }
            }
            SmoothWindow::Dyadic { log_delta, index, scale } => {
                SmoothWindow::Dyadic { log_delta, index, scale: scale * factor }
            }
        }
    }

    /// Breakpoints between which the window is analytic, plus an interval on
    /// which it is identically 1 (if any).
    fn pieces(&self) -> (Vec<Interval>, Option<Interval>) {
        match *self {
            SmoothWindow::Zero => (Vec::new(), None),
            SmoothWindow::Bump { c1, lo, hi, c2 } => (vec![(c1, lo), (hi, c2)], Some((lo, hi))),
            SmoothWindow::Dyadic { log_delta, index, scale } => {
                let peak = scale * (index as f64 * log_delta).exp();
                let (a, b) = self.support().unwrap();
                (vec![(a, peak), (peak, b)], None)
            }
        }
    }

    /// `∫ W(t) dt`.
    pub fn mass(&self) -> f64 {
        fourier_transform_real(self, 0.0).re
    }
}

/// Partition of unity `Σ_l b_{l,Δ}(t) = 1` on `[1, X]` with `Δ = 1 + (log X)^{-B}`.
#[derive(Clone, Debug, Serialize)]
pub struct DyadicPartition {
    pub x: f64,
    pub b: f64,
    pub delta: f64,
    pub windows: Vec<SmoothWindow>,
}

impl DyadicPartition {
    pub fn sum_at(&self, t: f64) -> f64 {
        self.windows.iter().map(|w| w.eval(t)).sum()
    }
}

pub fn dyadic_partition(x: f64, b: f64) -> Result<DyadicPartition> {
    if x.is_nan() || b.is_nan() || x < 2.0 || b < 1.0 {
        return Err(Error::InvalidArgument(format!("need X ≥ 2 and B ≥ 1, got X={x}, B={b}")));
    }
    let delta = 1.0 + x.ln().powf(-b);
    let log_delta = delta.ln();
    let top = (x.ln() / log_delta).ceil() as i64;
    let windows = (0..=top).map(|index| SmoothWindow::Dyadic { log_delta, index, scale: 1.0 }).collect();
    Ok(DyadicPartition { x, b, delta, windows })
}

/// `Ŵ(ξ) = ∫ W(t) e(-tξ) dt`.
pub fn fourier_transform_real(w: &SmoothWindow, xi: f64) -> Complex64 {
    let (ramps, plateau) = w.pieces();
    let mut acc = Complex64::new(0.0, 0.0);
    if let Some((lo, hi)) = plateau {
        acc += if xi == 0.0 {
            Complex64::new(hi - lo, 0.0)
        } else {
            // ∫_lo^hi e(-tξ) dt
            (phase_f(-hi * xi) - phase_f(-lo * xi)) / Complex64::new(0.0, -TAU * xi)
        };
    }
    for (a, b) in ramps {
        let panels = (2.0 * xi.abs() * (b - a)).ceil() as usize + 4;
        // absolute accuracy is pinned to the window's size: far in the tail the
        // transform sits at rounding level and cannot be resolved relatively
        let opts = QuadOptions {
            abs_tol: 1e-13 * (b - a),
            rel_tol: 1e-12,
            initial_panels: panels,
            max_panels: 8 * panels + 200,
        };
        acc += integrate(|t: f64| phase_f(-t * xi) * w.eval(t), a, b, &opts).value;
    }
    acc
}

fn phase_f(x: f64) -> Complex64 {
    let (s, c) = (TAU * (x - x.round())).sin_cos();
    Complex64::new(c, s)
}

/// `Ṽ(x) = 2π i^k ∫ V(t) J_{k-1}(4π √(x t)) dt` for even weight `k ≥ 2`,
/// computed in the variable `u = √t`.
pub fn bessel_transform(v: &SmoothWindow, k: u32, x: f64) -> Result<f64> {
    if k % 2 == 1 || k == 0 {
        return Err(Error::Unsupported(format!("weight {k}: only even k ≥ 2 give a real transform")));
    }
    if x.is_nan() || x <= 0.0 {
        return Err(Error::InvalidArgument(format!("transform argument must be positive, got {x}")));
    }
    let Some((c1, c2)) = v.support() else { return Ok(0.0) };
    let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let freq = 4.0 * PI * x.sqrt();
    let order = k - 1;
    let (u1, u2) = (c1.sqrt(), c2.sqrt());
    let mut breaks = vec![u1];
    let (ramps, _) = v.pieces();
    for &(_, b) in &ramps {
        breaks.push(b.sqrt());
    }
    breaks.dedup();
    let scale = u2 * u2;
    let mut acc = 0.0;
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let panels = (freq * (b - a) / PI).ceil() as usize + 4;
        let opts = QuadOptions {
            abs_tol: 1e-13 * scale,
            rel_tol: 1e-12,
            initial_panels: panels,
            max_panels: 8 * panels + 200,
        };
        acc += integrate(|u: f64| 2.0 * u * v.eval(u * u) * bessel_j_fast(order, freq * u), a, b, &opts).value;
    }
    Ok(TAU * sign * acc)
}

/// `sup_t |Ŵ(t)| (1 + tL)^E` over the sample points `ts`.
pub fn decay_constant(w: &SmoothWindow, length: f64, exponent: f64, ts: &[f64]) -> f64 {
    ts.iter().map(|&t| fourier_transform_real(w, t).norm() * (1.0 + t * length).powf(exponent)).fold(0.0, f64::max)
}

/// Outcome of one summation-formula residual check.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub q: u64,
    pub a: i64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// Normalizer for the relative residual.
    pub scale: f64,
    pub relative_residual: f64,
    /// Number of dual terms kept before truncation.
    pub dual_terms: u64,
}

impl IdentityReport {
    fn new(q: u64, a: i64, lhs: Complex64, rhs: Complex64, scale: f64, dual_terms: u64) -> Self {
        let residual = (lhs - rhs).norm();
        let relative_residual = if scale > 0.0 { residual / scale } else { residual };
        Self { q, a, lhs, rhs, residual, scale, relative_residual, dual_terms }
    }
}

/// Relative threshold below which dual terms are dropped.
pub const TRUNCATION: f64 = 1e-12;

/// Evaluate `f(1), f(2), …` in parallel blocks until `|f(n)| < threshold` for
/// `run` consecutive `n`; returns the kept prefix.
pub(crate) fn collect_until_small<T, F>(f: F, threshold: f64, run: usize, cap: usize) -> Result<Vec<T>>
where
    T: Send + Copy,
    F: Fn(u64) -> (T, f64) + Sync,
{
    let block = run;
    let mut out: Vec<(T, f64)> = Vec::new();
    loop {
        let start = out.len() as u64 + 1;
        let chunk: Vec<(T, f64)> = (start..start + block as u64).into_par_iter().map(&f).collect();
        out.extend(chunk);
        let quiet = out.iter().rev().take_while(|(_, m)| *m < threshold).count();
        if quiet >= run {
            let keep = out.len() - quiet;
            out.truncate(keep);
            return Ok(out.into_iter().map(|(v, _)| v).collect());
        }
        if out.len() >= cap {
            return Err(Error::ResourceLimit { requested: out.len() as u64, limit: cap as u64 });
        }
    }
}

/// `Σ_{n ≡ a (q)} V(n)` against `(1/q) Σ_m e(am/q) V̂(m/q)`.
pub fn poisson_ap_check(q: u64, a: i64, v: &SmoothWindow) -> Result<IdentityReport> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    let Some((c1, c2)) = v.support() else {
        return Ok(IdentityReport::new(q, a, Complex64::default(), Complex64::default(), 0.0, 0));
    };
    let qi = q as i64;
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for n in (c1.floor() as i64).max(0)..=(c2.ceil() as i64) {
        let val = v.eval(n as f64);
        scale += val.abs();
        if (n - a).rem_euclid(qi) == 0 {
            lhs += val;
        }
    }
    let mass = v.mass();
    let scale = scale.max(mass.abs());
    let threshold = TRUNCATION * scale;
    let run = (q as usize).max(16);
    // V̂(-ξ) = conj V̂(ξ), so m and -m combine into 2 Re(e(am/q) V̂(m/q))
    let terms = collect_until_small(
        |m| {
            let ft = fourier_transform_real(v, m as f64 / q as f64);
            (2.0 * (phase(a.rem_euclid(qi) * (m % q) as i64, q) * ft).re, ft.norm())
        },
        threshold,
        run,
        10_000_000,
    )?;
    let rhs = (mass + terms.iter().sum::<f64>()) / q as f64;
    Ok(IdentityReport::new(q, a, Complex64::new(lhs, 0.0), Complex64::new(rhs, 0.0), scale, 2 * terms.len() as u64 + 1))
}

/// `Σ λ(n) e(an/q) V(n)` against the dual side `(1/q) Σ λ(n) e(-ā n/q) Ṽ(n/q²)`.
pub fn voronoi_check(q: u64, a: i64, v: &SmoothWindow, table: &CuspFormTable) -> Result<IdentityReport> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    if gcd_signed(a, q) != 1 {
        return Err(Error::NotCoprime { n: a, q });
    }
    let Some((c1, c2)) = v.support() else {
        return Ok(IdentityReport::new(q, a, Complex64::default(), Complex64::default(), 0.0, 0));
    };
    let n_max = table.n_max();
    let top = c2.ceil() as u64;
    if c1 < 1.0 || top > n_max {
        return Err(Error::OutOfRange { index: top, max: n_max });
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for n in (c1.ceil() as u64).max(1)..=top {
        let w = table.lambda(n)? * v.eval(n as f64);
        scale += w.abs();
        lhs += phase(a * (n % q) as i64, q) * w;
    }
    let abar = if q == 1 { 0 } else { mod_inverse(a, q)? as i64 };
    let weight = table.weight();
    let q2 = (q * q) as f64;
    let run = 2 * (q * q) as usize + 50;
    let transforms = collect_until_small(
        |n| {
            let t = bessel_transform(v, weight, n as f64 / q2).unwrap_or(f64::NAN);
            (t, if t.is_nan() { f64::INFINITY } else { t.abs() })
        },
        TRUNCATION * scale,
        run,
        n_max as usize,
    )
    .map_err(|_| Error::OutOfRange { index: n_max + 1, max: n_max })?;
    let mut rhs = Complex64::new(0.0, 0.0);
    for (i, t) in transforms.iter().enumerate() {
        let n = i as u64 + 1;
        rhs += phase(-abar * (n % q) as i64, q) * (table.lambda(n)? * t);
    }
    rhs /= q as f64;
    Ok(IdentityReport::new(q, a, lhs, rhs, scale, transforms.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::simpson;
    use proptest::prelude::*;

    #[test]
    fn bump_examples() {
        let w = canonical_window();
        assert_eq!(w.eval(1.5), 1.0);
        assert_eq!(w.eval(0.2), 0.0);
        assert_eq!(w.eval(3.5), 0.0);
        // rising ramp midpoint: glue(1/2) = I(0)/I(1) = 1/2 by symmetry
        let mid = w.eval(0.75);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-14);
        assert!(bump_window(1.0, 0.5, 2.0, 3.0).is_err());
        assert!(bump_window(0.0, 1.0, 2.0, 3.0).is_err());
    }

    #[test]
    fn glue_matches_simpson_oracle() {
        let total = simpson(bump_profile, -1.0, 1.0, 200_000);
        for &v in &[0.05, 0.2, 0.37, 0.5, 0.61, 0.9, 0.99] {
            let y = 2.0 * v - 1.0;
            let oracle = simpson(bump_profile, -1.0, y, 200_000) / total;
            assert!((glue(v) - oracle).abs() < 1e-10, "v={v}");
        }
        let w = canonical_window();
        let ramp = simpson(bump_profile, -1.0, 2.0 * 0.3 - 1.0, 200_000) / total;
        assert!((w.eval(0.5 + 0.3 * 0.5) - ramp).abs() < 1e-10);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let w = bump_window(1.0, 2.0, 4.0, 7.0).unwrap();
        let d = dyadic_partition(1e4, 1.0).unwrap().windows[5];
        for win in [w, d] {
            let (a, b) = win.support().unwrap();
            for i in 1..50 {
                let t = a + (b - a) * i as f64 / 50.0;
                let h = 1e-6 * t;
                let fd = (win.eval(t + h) - win.eval(t - h)) / (2.0 * h);
                assert!((fd - win.derivative(t)).abs() < 1e-6, "t={t}");
            }
        }
    }

    #[test]
    fn dyadic_partition_examples() {
        let x = 1e6;
        let p = dyadic_partition(x, 2.0).unwrap();
        assert!((p.sum_at(x.sqrt()) - 1.0).abs() < 1e-12);
        let expected = (x.ln() / p.delta.ln()).ceil() as usize + 1;
        assert_eq!(p.windows.len(), expected);
        for w in &p.windows {
            let (a, b) = w.support().unwrap();
            assert!((b / a - p.delta * p.delta).abs() < 1e-9);
        }
        for i in 0..=1000 {
            let t = x.powf(i as f64 / 1000.0);
            assert!((p.sum_at(t) - 1.0).abs() < 1e-12, "t={t}");
        }
        assert!(dyadic_partition(1.5, 1.0).is_err());
    }

    #[test]
    fn fourier_examples() {
        let w = canonical_window();
        let mass = simpson(|t| w.eval(t), 0.5, 3.0, 100_000);
        assert!((fourier_transform_real(&w, 0.0).re - mass).abs() < 1e-10);
        for &xi in &[0.1, 1.0, 3.7] {
            let f = fourier_transform_real(&w, xi);
            let g = fourier_transform_real(&w, -xi);
            assert!((f.conj() - g).norm() < 1e-13);
        }
        let oracle = simpson(|t| phase_f(-t) * w.eval(t), 0.5, 3.0, 200_000);
        assert!((fourier_transform_real(&w, 1.0) - oracle).norm() < 1e-9);
        assert_eq!(fourier_transform_real(&SmoothWindow::Zero, 2.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn fourier_decay_fits() {
        let w = canonical_window().scaled(50.0);
        let ts: Vec<f64> = (1..200).map(|i| i as f64 * 0.01).collect();
        for e in [2.0, 4.0] {
            let c = decay_constant(&w, 125.0, e, &ts);
            assert!(c.is_finite() && c > 0.0);
        }
    }

    #[test]
    fn bessel_transform_examples() {
        assert_eq!(bessel_transform(&SmoothWindow::Zero, 12, 1.0).unwrap(), 0.0);
        assert!(matches!(bessel_transform(&canonical_window(), 11, 1.0), Err(Error::Unsupported(_))));
        let w = canonical_window();
        for &x in &[0.01, 0.3, 1.0, 4.0, 20.0] {
            let ours = bessel_transform(&w, 12, x).unwrap();
            let oracle =
                TAU * simpson(|t| w.eval(t) * crate::bessel::bessel_j(11, 4.0 * PI * (x * t).sqrt()), 0.5, 3.0, 20_000);
            let scale = oracle.abs().max(1e-3);
            assert!((ours - oracle).abs() / scale < 1e-7, "x={x}: {ours} vs {oracle}");
        }
        for &lam in &[2.0, 7.5] {
            for &x in &[0.05, 0.8] {
                let lhs = bessel_transform(&w.scaled(lam), 12, x).unwrap();
                let rhs = lam * bessel_transform(&w, 12, lam * x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn poisson_examples() {
        let w = canonical_window().scaled(200.0);
        assert!(poisson_ap_check(1, 0, &w).unwrap().residual < 1e-8);
        assert!(poisson_ap_check(5, 2, &w).unwrap().residual < 1e-8);
        // support strictly between 10 and 11: no integer inside
        let narrow = bump_window(10.1, 10.3, 10.6, 10.9).unwrap();
        let r = poisson_ap_check(3, 1, &narrow).unwrap();
        assert_eq!(r.lhs, Complex64::new(0.0, 0.0));
        assert!(r.rhs.norm() < 1e-8);
    }

    #[test]
    fn voronoi_examples() {
        let table = CuspFormTable::compute(40_000).unwrap();
        let w = bump_window(50.0, 100.0, 125.0, 200.0).unwrap();
        let r = voronoi_check(1, 1, &w, &table).unwrap();
        assert!(r.relative_residual < 1e-6, "{r:?}");
        let r = voronoi_check(3, 1, &w, &table).unwrap();
        assert!(r.relative_residual < 1e-6, "{r:?}");
        let shifted = voronoi_check(3, 4, &w, &table).unwrap();
        assert!((shifted.lhs - r.lhs).norm() < 1e-12);
        assert!(matches!(voronoi_check(3, 3, &w, &table), Err(Error::NotCoprime { .. })));
    }

    proptest! {
        #[test]
        fn window_values_in_unit_interval(t in 0.0f64..10.0) {
            let v = canonical_window().eval(t);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn partition_of_unity(x in 10.0f64..1e6, b in 1.0f64..3.0, s in 0.0f64..1.0) {
            let p = dyadic_partition(x, b).unwrap();
            let t = x.powf(s);
            prop_assert!((p.sum_at(t) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn glue_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(glue(lo) <= glue(hi) + 1e-16);
        }
    }
}
