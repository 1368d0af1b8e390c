//! Bessel functions `J_n` of integer order.

use std::f64::consts::PI;

use crate::quad::{integrate, QuadOptions};

/// `J_n(x) = (1/π) ∫_0^π cos(nθ - x sin θ) dθ` by adaptive quadrature.
///
/// Absolute error stays below `1e-10` for `x ≤ 1e3`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    let panels = ((x + nf) / 2.0).ceil() as usize + 4;
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, initial_panels: panels, max_panels: 4 * panels + 10_000 };
    integrate(|t: f64| (nf * t - x * t.sin()).cos(), 0.0, PI, &opts).value / PI
}

/// Fast `J_n(x)` for `x ≥ 0`: power series near the origin, Hankel's
/// expansion plus forward recurrence when `x` dominates the order, and
/// normalized backward recurrence elsewhere.
pub fn bessel_j_fast(n: u32, x: f64) -> f64 {
    if x <= 2.0 {
        power_series(n, x)
    } else if x >= 25.0 && n as f64 <= x {
        let j0 = hankel(0.0, x);
        if n == 0 {
            return j0;
        }
        let mut j1 = hankel(1.0, x);
        let mut prev = j0;
        for k in 1..n {
            let next = 2.0 * k as f64 / x * j1 - prev;
            prev = j1;
            j1 = next;
        }
        j1
    } else {
        miller(n, x)
    }
}

fn power_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let h2 = half * half;
    for j in 1..60 {
        term *= -h2 / (j as f64 * (n + j) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut t = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        t *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if t.abs() >= last || t == 0.0 {
            break;
        }
        last = t.abs();
        match k % 4 {
            1 => q += t,
            2 => p -= t,
            3 => q -= t,
            _ => p += t,
        }
        if t.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

fn miller(n: u32, x: f64) -> f64 {
    let top = (n as f64).max(x);
    let mut m = (top + 30.0 + 3.0 * top.sqrt()) as u32;
    m += m % 2;
    let (mut jp, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut want = 0.0;
    for k in (1..=m).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        // j now holds the unnormalized J_{k-1}
        if k - 1 == n {
            want = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            want *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j;
    want / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_oracle(n: u32, x: f64) -> f64 {
        // Σ (-1)^j (x/2)^{n+2j} / (j! (n+j)!) with explicit factorials
        let fact = |k: u32| (1..=k).map(|i| i as f64).product::<f64>();
        (0..30).map(|j| (-1f64).powi(j as i32) * (x / 2.0).powi((n + 2 * j) as i32) / (fact(j) * fact(n + j))).sum()
    }

    #[test]
    fn integral_examples() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(11, 0.0), 0.0);
        assert!((bessel_j(11, 1.0) - series_oracle(11, 1.0)).abs() < 1e-10);
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-12);
        assert!((bessel_j(1, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-12);
    }

    #[test]
    fn fast_matches_integral() {
        let xs = [0.0, 1e-6, 0.3, 1.9, 2.0, 2.1, 5.0, 11.0, 24.9, 25.0, 25.1, 29.0, 31.0, 77.7, 150.0, 999.0];
        for n in 0..=30 {
            for &x in &xs {
                let a = bessel_j_fast(n, x);
                let b = bessel_j(n, x);
                assert!((a - b).abs() < 1e-10, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fast_matches_series() {
        for n in 0..=30 {
            for i in 0..=40 {
                let x = 0.25 * i as f64;
                assert!((bessel_j_fast(n, x) - series_oracle(n, x)).abs() < 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn far_field() {
        for &x in &[2e3, 4.5e4, 1e6] {
            let a = bessel_j_fast(11, x);
            let b = bessel_j(11, x);
            assert!((a - b).abs() < 1e-9, "x={x}: {a} vs {b}");
        }
    }
}
