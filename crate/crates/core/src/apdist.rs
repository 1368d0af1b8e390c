//! Error terms of `λ_f * 1` in arithmetic progressions, the smoothed
//! congruence-sum identity, the Möbius decomposition of `S3`, and the
//! exponent optimizer over the bilinear bound templates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsums::{ramanujan_sum_exact, s3_sum, s3_table};
use crate::heckecoeffs::CuspFormTable;
use crate::modarith::{self, divisors, euler_phi, gcd, gcd_signed, inverse_or_zero, moebius, reduce};
use crate::transforms::{bessel_transform, collect_until_small, fourier_transform_real, SmoothWindow, TRUNCATION};

/// `E(X; q, a)` together with `|E| q / X`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorTermRecord {
    pub x: u64,
    pub q: u64,
    pub a: u64,
    pub e: f64,
    pub normalized: f64,
    /// `false` when `gcd(a, q) > 1`; then only the congruence sum is kept.
    pub coprime: bool,
}

impl ErrorTermRecord {
    fn new(x: u64, q: u64, a: u64, e: f64, coprime: bool) -> Self {
        Self { x, q, a, e, normalized: e.abs() * q as f64 / x as f64, coprime }
    }
}

fn check_progression(x: u64, q: u64, a: u64) -> Result<()> {
    if q == 0 || x == 0 {
        return Err(Error::InvalidArgument(format!("need X ≥ 1 and q ≥ 1, got X={x}, q={q}")));
    }
    if !(1..=q).contains(&a) {
        return Err(Error::InvalidArgument(format!("residue {a} outside 1..={q}")));
    }
    Ok(())
}

/// `E(X;q,a) = Σ_{n≤X, n≡a (q)} (λ*1)(n) - (1/φ(q)) Σ_{n≤X, (n,q)=1} (λ*1)(n)`.
pub fn error_term(table: &CuspFormTable, x: u64, q: u64, a: u64) -> Result<ErrorTermRecord> {
    check_progression(x, q, a)?;
    let conv = table.convolution_table(x)?;
    let r = a % q;
    let (mut first, mut second) = (0.0, 0.0);
    for (n, &c) in conv.iter().enumerate().skip(1) {
        let n = n as u64;
        if n % q == r {
            first += c;
        }
        if gcd(n, q) == 1 {
            second += c;
        }
    }
    let coprime = gcd(a, q) == 1;
    let e = if coprime { first - second / euler_phi(q) as f64 } else { first };
    Ok(ErrorTermRecord::new(x, q, a, e, coprime))
}

/// Same quantity without the convolution table: `(λ*1)(n)` by trial-division divisors.
pub fn error_term_direct(table: &CuspFormTable, x: u64, q: u64, a: u64) -> Result<ErrorTermRecord> {
    check_progression(x, q, a)?;
    if x > table.n_max() {
        return Err(Error::OutOfRange { index: x, max: table.n_max() });
    }
    let (mut first, mut second) = (0.0, 0.0);
    for n in 1..=x {
        let hit = n % q == a % q;
        let unit = gcd(n, q) == 1;
        if !hit && !unit {
            continue;
        }
        let mut c = 0.0;
        let mut d = 1;
        while d * d <= n {
            if n % d == 0 {
                c += table.lambda(d)?;
                if d * d != n {
                    c += table.lambda(n / d)?;
                }
            }
            d += 1;
        }
        if hit {
            first += c;
        }
        if unit {
            second += c;
        }
    }
    let coprime = gcd(a, q) == 1;
    let e = if coprime { first - second / euler_phi(q) as f64 } else { first };
    Ok(ErrorTermRecord::new(x, q, a, e, coprime))
}

/// `E(X;q,a)` for every unit `a` mod `q`, from a precomputed convolution table.
fn unit_error_terms(conv: &[f64], x: u64, q: u64) -> Vec<ErrorTermRecord> {
    let mut by_residue = vec![0.0; q as usize];
    for (n, &c) in conv.iter().enumerate().skip(1) {
        by_residue[n % q as usize] += c;
    }
    let us = modarith::units(q);
    let coprime_total: f64 = us.iter().map(|&r| by_residue[r as usize]).sum();
    let phi = euler_phi(q) as f64;
    us.iter()
        .map(|&r| {
            let a = if r == 0 { q } else { r };
            ErrorTermRecord::new(x, q, a, by_residue[r as usize] - coprime_total / phi, true)
        })
        .collect()
}

/// All `E(X;q,a)` with `(a,q) = 1`, ordered by `a`.
pub fn error_terms_for_modulus(table: &CuspFormTable, x: u64, q: u64) -> Result<Vec<ErrorTermRecord>> {
    check_progression(x, q, 1)?;
    let conv = table.convolution_table(x)?;
    let mut out = unit_error_terms(&conv, x, q);
    out.sort_by_key(|r| r.a);
    Ok(out)
}

/// Per modulus, the coprime class with the largest `|E|` (smallest `a` on ties).
pub fn error_scan(table: &CuspFormTable, x: u64, q_list: &[u64]) -> Result<Vec<ErrorTermRecord>> {
    for &q in q_list {
        if q == 0 || q > x {
            return Err(Error::InvalidArgument(format!("modulus {q} must satisfy 1 ≤ q ≤ X = {x}")));
        }
    }
    let conv = table.convolution_table(x)?;
    let mut out: Vec<ErrorTermRecord> = q_list
        .par_iter()
        .map(|&q| {
            let mut recs = unit_error_terms(&conv, x, q);
            recs.sort_by_key(|r| r.a);
            recs.into_iter()
                .fold(None::<ErrorTermRecord>, |best, r| match best {
                    Some(b) if b.e.abs() >= r.e.abs() => Some(b),
                    _ => Some(r),
                })
                .expect("every modulus has a unit")
        })
        .collect();
    out.sort_by_key(|r| r.q);
    Ok(out)
}

/// Integer points of a window's support, clipped to `n ≥ 1`.
fn integer_support(w: &SmoothWindow) -> Option<(u64, u64)> {
    let (c1, c2) = w.support()?;
    let lo = (c1.floor().max(1.0)) as u64;
    let hi = c2.ceil() as u64;
    (lo <= hi).then_some((lo, hi))
}

struct CongruenceSums {
    lhs: f64,
    main: f64,
    scale: f64,
}

fn congruence_sums(
    table: &CuspFormTable,
    v: &SmoothWindow,
    w: &SmoothWindow,
    q: u64,
    a: i64,
) -> Result<CongruenceSums> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    let zero = CongruenceSums { lhs: 0.0, main: 0.0, scale: 0.0 };
    let (Some((m_lo, m_hi)), Some((l_lo, l_hi))) = (integer_support(v), integer_support(w)) else {
        return Ok(zero);
    };
    if m_hi > table.n_max() {
        return Err(Error::OutOfRange { index: m_hi, max: table.n_max() });
    }
    let qu = q as usize;
    let mut w_res = vec![0.0; qu];
    let mut w_abs = vec![0.0; qu];
    for l in l_lo..=l_hi {
        let val = w.eval(l as f64);
        w_res[(l % q) as usize] += val;
        w_abs[(l % q) as usize] += val.abs();
    }
    let w_units: f64 = (0..q).filter(|&r| gcd(r, q) == 1).map(|r| w_res[r as usize]).sum();
    let a = reduce(a, q);
    let (mut lhs, mut main, mut scale) = (0.0, 0.0, 0.0);
    for m in m_lo..=m_hi {
        let lv = table.lambda(m)? * v.eval(m as f64);
        if lv == 0.0 {
            continue;
        }
        let mr = m % q;
        let (mut hit, mut hit_abs) = (0.0, 0.0);
        for r in 0..q {
            if (mr * r) % q == a {
                hit += w_res[r as usize];
                hit_abs += w_abs[r as usize];
            }
        }
        lhs += lv * hit;
        scale += lv.abs() * hit_abs;
        if gcd(mr, q) == 1 {
            main += lv * w_units;
        }
    }
    Ok(CongruenceSums { lhs, main: main / q as f64, scale })
}

/// `Ẽ(V,W;q,a) = Σ_{ml≡a (q)} λ(m)V(m)W(l) - (1/q) Σ_{(ml,q)=1} λ(m)V(m)W(l)`.
pub fn smoothed_error(table: &CuspFormTable, v: &SmoothWindow, w: &SmoothWindow, q: u64, a: i64) -> Result<f64> {
    let s = congruence_sums(table, v, w, q, a)?;
    Ok(s.lhs - s.main)
}

/// Both sides of the dual expansion of the congruence sum.
#[derive(Clone, Debug, Serialize)]
pub struct CongruenceDualReport {
    pub q: u64,
    pub a: i64,
    /// `Σ_{ml≡a (q)} λ(m)V(m)W(l)`.
    pub lhs: f64,
    /// `(1/q) Σ_{(ml,q)=1} λ(m)V(m)W(l)`.
    pub main_term: f64,
    pub smoothed_error: f64,
    /// `(1/q²) Σ_{d|q} (1/d) Σ_n Σ_{h∈ℤ} λ(n) Ṽ(n/d²) Ŵ(h/q) S3(n, h·\overline{q/d}, a; d) c_{q/d}(h)`.
    pub rhs: f64,
    /// Main term plus `(1/q) Σ_{d|q} (1/d) Σ_{m,l≥1} λ(m) Ṽ(m/d²) Ŵ(l/d) S3(m,l,a;d)`.
    pub rhs_displayed: Complex64,
    pub residual: f64,
    pub relative_residual: f64,
    pub displayed_residual: f64,
    /// `Σ_{ml≡a} |λ(m)V(m)W(l)|`.
    pub scale: f64,
    /// Bessel-transform terms kept, summed over `d`.
    pub dual_terms_v: u64,
    /// Fourier-transform terms kept on each side of 0.
    pub dual_terms_w: u64,
}

/// `Ŵ(h/step)` for `h ≥ 1` until the magnitudes stay below threshold.
fn fourier_tail(w: &SmoothWindow, step: u64, threshold: f64) -> Result<Vec<Complex64>> {
    collect_until_small(
        |h| {
            let f = fourier_transform_real(w, h as f64 / step as f64);
            (f, f.norm())
        },
        threshold,
        (step as usize).max(16),
        10_000_000,
    )
}

/// Residual of the dual expansion of `Σ_{ml≡a (q)} λ(m)V(m)W(l)`.
///
/// Dual sums are cut once the transforms stay below `1e-12` times the size of
/// the corresponding primal sum: for `q/d` steps of `Ŵ`, and over an
/// `x`-interval of length `1/4` (plus 50 terms) for `Ṽ(n/d²)`.
pub fn congruence_dual_check(
    table: &CuspFormTable,
    v: &SmoothWindow,
    w: &SmoothWindow,
    q: u64,
    a: i64,
) -> Result<CongruenceDualReport> {
    if q == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    if !modarith::is_squarefree(q) {
        return Err(Error::NotSquarefree(q));
    }
    if gcd_signed(a, q) != 1 {
        return Err(Error::NotCoprime { n: a, q });
    }
    let sums = congruence_sums(table, v, w, q, a)?;
    let mut v_scale = 0.0;
    if let Some((lo, hi)) = integer_support(v) {
        for m in lo..=hi {
            v_scale += (table.lambda(m)? * v.eval(m as f64)).abs();
        }
    }
    let w_mass = w.mass();
    let w_scale = integer_support(w)
        .map(|(lo, hi)| (lo..=hi).map(|l| w.eval(l as f64).abs()).sum::<f64>())
        .unwrap_or(0.0)
        .max(w_mass.abs());

    let w_hat = fourier_tail(w, q, TRUNCATION * w_scale)?;
    let big_h = w_hat.len() as i64;
    let w_at = |h: i64| -> Complex64 {
        match h {
            0 => Complex64::new(w_mass, 0.0),
            h if h > 0 => w_hat[h as usize - 1],
            h => w_hat[(-h) as usize - 1].conj(),
        }
    };

    let weight = table.weight();
    let n_max = table.n_max();
    let mut rhs = Complex64::new(0.0, 0.0);
    let mut displayed = Complex64::new(0.0, 0.0);
    let mut dual_terms_v = 0;
    for d in divisors(q) {
        let dp = q / d;
        let du = d as usize;
        let dp_inv = inverse_or_zero(dp % d, d)?;
        let s3 = s3_table(a, d)?;
        let ram: Vec<f64> = (0..dp).map(|h| ramanujan_sum_exact(dp, h as i64) as f64).collect();
        // T_d(r) = Σ_h Ŵ(h/q) S3(r, h·\overline{d'}, a; d) c_{d'}(h)
        let mut t = vec![Complex64::new(0.0, 0.0); du];
        for h in -big_h..=big_h {
            let wh = w_at(h) * ram[reduce(h, dp) as usize];
            let col = modarith::mul_mod(reduce(h, d), dp_inv, d) as usize;
            for (r, slot) in t.iter_mut().enumerate() {
                *slot += wh * s3[r * du + col];
            }
        }
        // U_d(r) = Σ_{l≥1} Ŵ(l/d) S3(r, l, a; d)
        let w_hat_d = fourier_tail(w, d, TRUNCATION * w_scale)?;
        let mut u = vec![Complex64::new(0.0, 0.0); du];
        for (i, &f) in w_hat_d.iter().enumerate() {
            let col = (i + 1) % du;
            for (r, slot) in u.iter_mut().enumerate() {
                *slot += f * s3[r * du + col];
            }
        }
        let d2 = (d * d) as f64;
        let v_check = collect_until_small(
            |n| {
                let t = bessel_transform(v, weight, n as f64 / d2).unwrap_or(f64::NAN);
                (t, if t.is_nan() { f64::INFINITY } else { t.abs() })
            },
            TRUNCATION * v_scale,
            du * du / 4 + 50,
            n_max as usize,
        )
        .map_err(|_| Error::OutOfRange { index: n_max + 1, max: n_max })?;
        dual_terms_v += v_check.len() as u64;
        let (mut exact_d, mut displayed_d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (i, &vc) in v_check.iter().enumerate() {
            let n = i as u64 + 1;
            let c = table.lambda(n)? * vc;
            exact_d += t[(n % d) as usize] * c;
            displayed_d += u[(n % d) as usize] * c;
        }
        rhs += exact_d / (d as f64);
        displayed += displayed_d / (d as f64);
    }
    let qf = q as f64;
    let rhs = (rhs / (qf * qf)).re;
    let rhs_displayed = displayed / qf + sums.main;
    let residual = (sums.lhs - rhs).abs();
    let relative_residual = if sums.scale > 0.0 { residual / sums.scale } else { residual };
    Ok(CongruenceDualReport {
        q,
        a,
        lhs: sums.lhs,
        main_term: sums.main,
        smoothed_error: sums.lhs - sums.main,
        rhs,
        rhs_displayed,
        residual,
        relative_residual,
        displayed_residual: (rhs_displayed - sums.lhs).norm(),
        scale: sums.scale,
        dual_terms_v,
        dual_terms_w: big_h as u64,
    })
}

/// `S3(m,l,a;d)` against `Σ_{s|(m,l,d)} μ(s) S3(x_s, 1, 1; d/s)` under two readings of `x_s`:
/// A: `x_s = s̄ (m/s)(l/s) a`, B: `x_s = (m/s)(l/s) a`, both mod `d/s`.
#[derive(Clone, Debug, Serialize)]
pub struct S3DecompositionReport {
    pub m: i64,
    pub l: i64,
    pub a: i64,
    pub d: u64,
    pub lhs: Complex64,
    pub reading_a: Complex64,
    pub reading_b: Complex64,
    pub residual_a: f64,
    pub residual_b: f64,
    pub holds_a: bool,
    pub holds_b: bool,
}

pub fn s3_decomposition_check(m: i64, l: i64, a: i64, d: u64) -> Result<S3DecompositionReport> {
    if d == 0 {
        return Err(Error::InvalidArgument("modulus must be at least 1".into()));
    }
    if !modarith::is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    if gcd_signed(a, d) != 1 {
        return Err(Error::NotCoprime { n: a, q: d });
    }
    let lhs = s3_sum(m, l, a, d)?.value;
    let g = gcd(gcd_signed(m, d), gcd_signed(l, d));
    let g = if g == 0 { d } else { g };
    let (mut ra, mut rb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for s in divisors(g) {
        let mu = moebius(s) as f64;
        if mu == 0.0 {
            continue;
        }
        let e = d / s;
        let base =
            modarith::mul_mod(modarith::mul_mod(reduce(m / s as i64, e), reduce(l / s as i64, e), e), reduce(a, e), e);
        let twisted = modarith::mul_mod(base, inverse_or_zero(s % e, e)?, e);
        ra += s3_sum(twisted as i64, 1, 1, e)?.value * mu;
        rb += s3_sum(base as i64, 1, 1, e)?.value * mu;
    }
    let (residual_a, residual_b) = ((lhs - ra).norm(), (lhs - rb).norm());
    let tol = 1e-9 * (d as f64).max(1.0);
    Ok(S3DecompositionReport {
        m,
        l,
        a,
        d,
        lhs,
        reading_a: ra,
        reading_b: rb,
        residual_a,
        residual_b,
        holds_a: residual_a < tol,
        holds_b: residual_b < tol,
    })
}

/// Which bound templates enter `τ(μ', ν')`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSystem {
    /// The three bilinear templates only.
    Displayed,
    /// The three templates plus completion in `l`: `μ'+ν' + max(1/2 - ν', -1/2)`.
    #[default]
    WithCompletion,
}

/// One term `c + a μ' + b ν'` inside a template's max.
type Line = (f64, f64, f64);

const TEMPLATE_1: [Line; 3] = [(1.0 / 6.0, -0.5, 0.0), (-1.0 / 6.0, 0.0, 0.0), (1.0 / 6.0, 0.0, -0.5)];
const TEMPLATE_2: [Line; 3] = [(0.25, -0.5, 0.0), (-0.25, 0.0, 0.0), (0.0, 0.0, -0.5)];
const TEMPLATE_3: [Line; 3] = [(-0.25, 0.0, 0.0), (0.375, -0.5, 0.0), (0.75, -1.0, 0.0)];
const TEMPLATE_4: [Line; 2] = [(0.5, 0.0, -1.0), (-0.5, 0.0, 0.0)];

fn templates(system: BoundSystem) -> Vec<&'static [Line]> {
    let mut t: Vec<&'static [Line]> = vec![&TEMPLATE_1, &TEMPLATE_2, &TEMPLATE_3];
    if system == BoundSystem::WithCompletion {
        t.push(&TEMPLATE_4);
    }
    t
}

/// Each template's value `μ'+ν' + max(…)` at `(μ', ν')`.
pub fn bound_templates(mu: f64, nu: f64, system: BoundSystem) -> Vec<f64> {
    templates(system)
        .into_iter()
        .map(|lines| mu + nu + lines.iter().map(|&(c, a, b)| c + a * mu + b * nu).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// `τ(μ', ν')`: the smallest template.
pub fn tau_bound(mu: f64, nu: f64, system: BoundSystem) -> f64 {
    bound_templates(mu, nu, system).into_iter().fold(f64::INFINITY, f64::min)
}

/// A point of the `(μ', ν')` region for given `δ, η, κ`, with its `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentRegion {
    pub delta: f64,
    pub eta: f64,
    pub kappa: f64,
    pub mu_prime: f64,
    pub nu_prime: f64,
    pub sigma: f64,
}

impl ExponentRegion {
    /// `μ', ν' ≥ 0`, `μ'+ν' ≤ 1+δ+η`, `ν' ≤ 1+η/2`, `μ' ≤ 2+η/2`, up to `tol`.
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.mu_prime >= -tol
            && self.nu_prime >= -tol
            && self.mu_prime + self.nu_prime <= 1.0 + self.delta + self.eta + tol
            && self.nu_prime <= 1.0 + self.eta / 2.0 + tol
            && self.mu_prime <= 2.0 + self.eta / 2.0 + tol
    }
}

/// `max τ(μ', ν')` over the feasible region for `δ, η`, with its maximizer `(μ', ν')`.
///
/// Every template is nondecreasing in both variables, so the maximum sits on
/// `μ'+ν' = 1+δ+η`; along that segment `τ` is piecewise linear in `μ'` and is
/// evaluated exactly at the endpoints and all pairwise crossings of its pieces.
pub fn sigma_max(delta: f64, eta: f64, system: BoundSystem) -> (f64, f64, f64) {
    let s = 1.0 + delta + eta;
    let lo = (s - (1.0 + eta / 2.0)).max(0.0);
    let hi = s.min(2.0 + eta / 2.0);
    // restrict each piece to the segment: value = c + b s + (a - b) μ'
    let lines: Vec<(f64, f64)> = templates(system).into_iter().flatten().map(|&(c, a, b)| (c + b * s, a - b)).collect();
    let mut xs = vec![lo, hi];
    for (i, &(c1, k1)) in lines.iter().enumerate() {
        for &(c2, k2) in &lines[i + 1..] {
            if k1 != k2 {
                let x = (c2 - c1) / (k1 - k2);
                if x > lo && x < hi {
                    xs.push(x);
                }
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    let mut best = (f64::NEG_INFINITY, lo, s - lo);
    for x in xs {
        let val = tau_bound(x, s - x, system);
        if val > best.0 {
            best = (val, x, s - x);
        }
    }
    best
}

/// Outcome of the `δ` scan.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentOptimum {
    pub eta: f64,
    pub kappa: f64,
    pub resolution: f64,
    pub system: BoundSystem,
    /// Largest grid `δ` with `σ_max(δ) ≤ 1 - κ`; `None` when even `δ = 0` fails.
    pub delta_star: Option<f64>,
    /// `1 / (2 - δ*)`.
    pub theta: Option<f64>,
    pub witness: Option<ExponentRegion>,
    /// `(δ, σ_max(δ))` over the grid.
    pub curve: Vec<(f64, f64)>,
}

pub fn exponent_optimizer(eta: f64, kappa: f64, resolution: f64) -> Result<ExponentOptimum> {
    exponent_optimizer_with(eta, kappa, resolution, BoundSystem::default())
}

/// Scan `δ ∈ [0, 1]` on a grid of step `resolution`.
pub fn exponent_optimizer_with(eta: f64, kappa: f64, resolution: f64, system: BoundSystem) -> Result<ExponentOptimum> {
    if !(eta > 0.0 && eta.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta and kappa must be positive, got {eta}, {kappa}")));
    }
    if !(resolution > 0.0 && resolution <= 1e-3) {
        return Err(Error::InvalidArgument(format!("resolution must lie in (0, 1e-3], got {resolution}")));
    }
    let steps = (1.0 / resolution).floor() as u64;
    let cells: Vec<(f64, (f64, f64, f64))> = (0..=steps)
        .into_par_iter()
        .map(|i| {
            let delta = i as f64 * resolution;
            (delta, sigma_max(delta, eta, system))
        })
        .collect();
    let best = cells.iter().rev().find(|(_, (sigma, _, _))| *sigma <= 1.0 - kappa);
    let witness = best.map(|&(delta, (sigma, mu_prime, nu_prime))| ExponentRegion {
        delta,
        eta,
        kappa,
        mu_prime,
        nu_prime,
        sigma,
    });
    let delta_star = witness.map(|w| w.delta);
    Ok(ExponentOptimum {
        eta,
        kappa,
        resolution,
        system,
        delta_star,
        theta: delta_star.map(|d| 1.0 / (2.0 - d)),
        witness,
        curve: cells.into_iter().map(|(d, (s, _, _))| (d, s)).collect(),
    })
}
