//! The invariant suite behind `klooster verify` and the acceptance tests.

use std::time::Instant;

use serde::Serialize;

use crate::apdist::{
    congruence_dual_check, error_scan, error_term, error_term_direct, error_terms_for_modulus, exponent_optimizer,
};
use crate::bilinear::{bilinear_scan, correlation_scan, weyl_instances};
use crate::error::Result;
use crate::expsums::{hyper_kloosterman, hyper_kloosterman_crt, kl3_prime_table, kloosterman, s3_sum};
use crate::heckecoeffs::{divisor_counts, hecke_prime_power_violation, CuspFormTable};
use crate::modarith::{self, gcd, is_prime, is_squarefree, SquarefreeModulus};
use crate::report::{fmt_g12, Table};
use crate::rng::SplitMix64;
use crate::transforms::{bump_window, canonical_window, poisson_ap_check, voronoi_check, SmoothWindow};

/// Outcome of one check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { name: name.to_string(), passed, detail, seconds: start.elapsed().as_secs_f64() }
}

/// Size caps for the suite.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyCaps {
    /// Largest prime for the Weil, Deligne and correlation scans (each also has its own ceiling).
    pub pmax: u64,
    /// Largest modulus in the CRT comparison.
    pub qmax: u64,
    /// Largest modulus in the `S3` bridge scan.
    pub dmax: u64,
    /// Range of the Hecke checks.
    pub nmax: u64,
    /// `X` for the error-term checks.
    pub x: u64,
    /// Run the summation-formula residual checks.
    pub identities: bool,
    pub seed: u64,
}

impl Default for VerifyCaps {
    fn default() -> Self {
        Self { pmax: 500, qmax: 210, dmax: 50, nmax: 100_000, x: 10_000, identities: true, seed: 0 }
    }
}

impl VerifyCaps {
    /// Small instance of every check; finishes in seconds.
    pub fn quick() -> Self {
        Self { pmax: 23, qmax: 42, dmax: 15, nmax: 5_000, x: 2_000, identities: false, seed: 0 }
    }

    /// Table size the suite needs.
    pub fn table_size(&self) -> u64 {
        if self.identities {
            self.nmax.max(self.x).max(100_000)
        } else {
            self.nmax.max(self.x)
        }
    }
}

/// `δ*` and `θ` from the optimizer at `η = κ = 10⁻⁴`, grid `10⁻⁴`.
pub fn check_exponent() -> CheckResult {
    timed("exponent optimizer", || {
        let opt = exponent_optimizer(1e-4, 1e-4, 1e-4)?;
        let (Some(d), Some(t)) = (opt.delta_star, opt.theta) else {
            return Ok((false, "no feasible delta".into()));
        };
        let ok = (d - 1.0 / 18.0).abs() <= 2e-3 && (t - 18.0 / 35.0).abs() <= 2e-3;
        Ok((
            ok,
            format!(
                "delta*={} theta={} (1/18={}, 18/35={})",
                fmt_g12(d),
                fmt_g12(t),
                fmt_g12(1.0 / 18.0),
                fmt_g12(18.0 / 35.0)
            ),
        ))
    })
}

/// Direct against CRT `Kl_k` for `k ∈ {2,3}` and squarefree `q ≤ qmax` with at least two prime factors.
pub fn check_crt(qmax: u64) -> CheckResult {
    timed("twisted multiplicativity", || {
        let (mut worst, mut count, mut moduli) = (0.0f64, 0u64, 0u64);
        for q in 6..=qmax {
            if !is_squarefree(q) || modarith::prime_divisors(q).len() < 2 {
                continue;
            }
            moduli += 1;
            let m = SquarefreeModulus::new(q)?;
            for k in [2, 3] {
                for n in modarith::units(q) {
                    let a = hyper_kloosterman(k, n as i64, q)?.value;
                    let b = hyper_kloosterman_crt(k, n as i64, &m)?.value;
                    worst = worst.max((a - b).norm());
                    count += 1;
                }
            }
        }
        Ok((worst <= 1e-9, format!("{moduli} moduli, {count} values, max |direct - crt| = {}", fmt_g12(worst))))
    })
}

/// `|Kl2(n;p)| ≤ 2` for `p ≤ min(pmax, 500)` and `|Kl3(n;p)| ≤ 3` for `p ≤ min(pmax, 100)`.
pub fn check_weil_deligne(pmax: u64) -> CheckResult {
    timed("Weil and Deligne bounds", || {
        let (mut v2, mut v3, mut max2, mut max3) = (0u64, 0u64, 0.0f64, 0.0f64);
        for p in (2..=pmax.min(500)).filter(|&p| is_prime(p)) {
            let sp = (p as f64).sqrt();
            for n in 1..p as i64 {
                let k = kloosterman(n, 1, p)?.norm() / sp;
                max2 = max2.max(k);
                if k > 2.0 + 1e-9 {
                    v2 += 1;
                }
            }
            if p <= pmax.min(100) {
                let table = if p == 2 { None } else { Some(kl3_prime_table(p)?) };
                for n in 1..p {
                    let k = match &table {
                        Some(t) => t[n as usize].norm(),
                        None => hyper_kloosterman(3, n as i64, p)?.norm(),
                    };
                    max3 = max3.max(k);
                    if k > 3.0 + 1e-9 {
                        v3 += 1;
                    }
                }
            }
        }
        Ok((
            v2 + v3 == 0,
            format!("violations: Kl2 {v2}, Kl3 {v3}; max |Kl2| = {}, max |Kl3| = {}", fmt_g12(max2), fmt_g12(max3)),
        ))
    })
}

/// `S3(m,l,a;d) = d·Kl3(alm;d)` over all units `a, l, m` and squarefree `d ≤ dmax`.
pub fn check_s3_bridge(dmax: u64) -> CheckResult {
    timed("S3 bridge", || {
        let (mut worst, mut count) = (0.0f64, 0u64);
        for d in (2..=dmax).filter(|&d| is_squarefree(d)) {
            let us = modarith::units(d);
            let kl3: Vec<_> = (0..d)
                .map(|n| {
                    if gcd(n, d) == 1 {
                        hyper_kloosterman(3, n as i64, d).map(|v| v.value)
                    } else {
                        Ok(Default::default())
                    }
                })
                .collect::<Result<_>>()?;
            for &a in &us {
                for &l in &us {
                    for &m in &us {
                        let s = s3_sum(m as i64, l as i64, a as i64, d)?.value;
                        let arg = modarith::mul_mod(modarith::mul_mod(a, l, d), m, d);
                        worst = worst.max((s - kl3[arg as usize] * d as f64).norm());
                        count += 1;
                    }
                }
            }
        }
        Ok((worst <= 1e-9, format!("{count} triples, max |S3 - d Kl3| = {}", fmt_g12(worst))))
    })
}

/// Full `(h, m1, m2)` correlation scan for odd primes `p ≤ min(pmax, 60)`.
pub fn check_correlation(pmax: u64) -> CheckResult {
    timed("correlation sums", || {
        let mut worst: (f64, u64, (u64, u64, u64)) = (0.0, 0, (0, 0, 0));
        let mut diag_ok = true;
        let mut diag_excess: f64 = f64::NEG_INFINITY;
        for p in (3..=pmax.min(60)).filter(|&p| is_prime(p)) {
            let s = correlation_scan(p)?;
            if s.max_offdiag_ratio > worst.0 {
                worst = (s.max_offdiag_ratio, p, s.argmax);
            }
            diag_ok &= s.max_diagonal <= s.diagonal_bound;
            diag_excess = diag_excess.max(s.max_diagonal - s.diagonal_bound);
        }
        let (r, p, (h, m1, m2)) = worst;
        Ok((
            r <= 10.0 && diag_ok,
            format!(
                "max off-diagonal ratio {} at p={p} (h,m1,m2)=({h},{m1},{m2}); max diagonal minus bound {}",
                fmt_g12(r),
                fmt_g12(diag_excess)
            ),
        ))
    })
}

/// `τ` by expanding `x Π(1 - x^n)^24` densely, for `n ≤ len`.
pub fn tau_dense_oracle(len: usize) -> Vec<i128> {
    let mut poly = vec![0i128; len];
    poly[0] = 1;
    for n in 1..len {
        for _ in 0..24 {
            for i in (n..len).rev() {
                poly[i] -= poly[i - n];
            }
        }
    }
    poly
}

/// Multiplicativity, prime-power recursion and Deligne's bound up to `nmax`, plus the dense oracle.
pub fn check_hecke(table: &CuspFormTable, nmax: u64) -> CheckResult {
    timed("Hecke relations", || {
        let n = nmax.min(table.n_max()) as usize;
        let tau = table.tau_values();
        let oracle = tau_dense_oracle(50.min(n));
        let oracle_ok = oracle.iter().zip(tau).all(|(a, b)| a == b) && n >= 2 && tau[1] == -24 && oracle[1] == -24;
        let mut mult_bad = 0u64;
        let mut pairs = 0u64;
        for a in 2..=n {
            for b in (a + 1)..=(n / a) {
                if gcd(a as u64, b as u64) != 1 {
                    continue;
                }
                pairs += 1;
                if tau[a - 1].checked_mul(tau[b - 1]) != Some(tau[a * b - 1]) {
                    mult_bad += 1;
                }
            }
        }
        let mut power_bad = 0u64;
        for p in (2..=n as u64).take_while(|p| p * p <= n as u64).filter(|&p| is_prime(p)) {
            if hecke_prime_power_violation(table, p).is_some() {
                power_bad += 1;
            }
        }
        let dc = divisor_counts(n);
        let lam = table.lambda_values();
        let deligne_bad = (1..=n).filter(|&k| lam[k - 1].abs() > dc[k] as f64 * (1.0 + 1e-12)).count();
        Ok((
            oracle_ok && mult_bad + power_bad == 0 && deligne_bad == 0,
            format!(
                "n ≤ {n}: tau(2)={} (dense oracle agrees: {oracle_ok}); {pairs} coprime pairs, {mult_bad} failures; prime powers {power_bad} failures; Deligne {deligne_bad} failures",
                tau.get(1).copied().unwrap_or(0)
            ),
        ))
    })
}

pub fn voronoi_window() -> SmoothWindow {
    bump_window(50.0, 100.0, 125.0, 200.0).expect("valid window")
}

pub fn congruence_windows(q: u64) -> (SmoothWindow, SmoothWindow) {
    let w = bump_window(5.0, 12.0, 25.0, 40.0).expect("valid window");
    let v = if q <= 3 {
        bump_window(30.0, 50.0, 80.0, 120.0).expect("valid window")
    } else {
        canonical_window().scaled(20_000.0)
    };
    (v, w)
}

/// Poisson residuals for `q ∈ {1, 5, 12}`.
pub fn check_poisson() -> CheckResult {
    timed("Poisson in progressions", || {
        let v = canonical_window().scaled(200.0);
        let mut worst: f64 = 0.0;
        for (q, a) in [(1, 0), (5, 2), (12, 7)] {
            worst = worst.max(poisson_ap_check(q, a, &v)?.residual);
        }
        Ok((worst < 1e-8, format!("max residual {}", fmt_g12(worst))))
    })
}

/// Voronoi relative residuals for `q ∈ {1, 3, 5}`.
pub fn check_voronoi(table: &CuspFormTable) -> CheckResult {
    timed("Voronoi summation", || {
        let v = voronoi_window();
        let mut worst: f64 = 0.0;
        for (q, a) in [(1, 1), (3, 1), (5, 2)] {
            worst = worst.max(voronoi_check(q, a, &v, table)?.relative_residual);
        }
        Ok((worst < 1e-6, format!("max relative residual {}", fmt_g12(worst))))
    })
}

/// Dual-expansion relative residuals for `q ∈ {1, 3, 15, 105}`.
pub fn check_congruence_dual(table: &CuspFormTable) -> CheckResult {
    timed("congruence-sum dual expansion", || {
        let mut worst: f64 = 0.0;
        let mut displayed: f64 = 0.0;
        for (q, a) in [(1, 1), (3, 1), (15, 2), (105, 1)] {
            let (v, w) = congruence_windows(q);
            let r = congruence_dual_check(table, &v, &w, q, a)?;
            worst = worst.max(r.relative_residual);
            displayed = displayed.max(r.displayed_residual / r.scale);
        }
        Ok((
            worst < 1e-6,
            format!(
                "max relative residual {}; displayed form without the Ramanujan weights: {}",
                fmt_g12(worst),
                fmt_g12(displayed)
            ),
        ))
    })
}

/// `E(X;1,a) = 0`, unit classes summing to 0, and table against direct summation on 20 seeded cells.
pub fn check_error_terms(table: &CuspFormTable, x: u64, seed: u64) -> CheckResult {
    timed("error terms", || {
        let trivial = error_term(table, x, 1, 1)?.e == 0.0 && error_scan(table, x, &[1])?[0].e == 0.0;
        let mut worst_sum: f64 = 0.0;
        for q in (1..=40).filter(|&q| is_squarefree(q) && q <= x) {
            let total: f64 = error_terms_for_modulus(table, x, q)?.iter().map(|r| r.e).sum();
            let scale = (x as f64 / q as f64) * modarith::euler_phi(q) as f64;
            worst_sum = worst_sum.max(total.abs() / scale);
        }
        let mut rng = SplitMix64::new(seed);
        let mut worst_cell: f64 = 0.0;
        for _ in 0..20 {
            let xc = 1 + rng.next_u64() % x;
            let q = 1 + rng.next_u64() % 40;
            let a = 1 + rng.next_u64() % q;
            let t = error_term(table, xc, q, a)?;
            let d = error_term_direct(table, xc, q, a)?;
            worst_cell = worst_cell.max((t.e - d.e).abs());
        }
        Ok((
            trivial && worst_sum <= 1e-8 && worst_cell <= 1e-10,
            format!(
                "E(X;1,1)=0: {trivial}; max |Σ E|/((X/q)φ(q)) = {}; max table-direct gap = {}",
                fmt_g12(worst_sum),
                fmt_g12(worst_cell)
            ),
        ))
    })
}

/// Trivial bound on every seeded cell for `q ∈ {105, 210}`, Weyl ratios on 100 instances,
/// and a byte-identical ratio table on rerun.
pub fn check_bilinear(seed: u64) -> CheckResult {
    timed("bilinear scan", || {
        let grid = [8, 16, 32];
        let cells = bilinear_scan(&[105, 210], &grid, &grid, seed, 0.0)?;
        let trivial_bad = cells.iter().filter(|c| c.lhs > c.trivial_bound * (1.0 + 1e-9)).count();
        let weyl = weyl_instances(seed, 100)?;
        let weyl_max = weyl.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let again = bilinear_scan(&[105, 210], &grid, &grid, seed, 0.0)?;
        let deterministic = scan_table(&cells).to_csv()? == scan_table(&again).to_csv()?;
        let ratio_max = cells.iter().map(|c| c.ratio).fold(0.0, f64::max);
        Ok((
            trivial_bad == 0 && weyl_max <= 1.0 + 1e-9 && deterministic,
            format!(
                "{} cells, {trivial_bad} above trivial bound; max Weyl ratio {}; max LHS/RHS {}; deterministic: {deterministic}",
                cells.len(),
                fmt_g12(weyl_max),
                fmt_g12(ratio_max)
            ),
        ))
    })
}

/// Table layout of a bilinear scan.
pub fn scan_table(cells: &[crate::bilinear::ScanCell]) -> Table {
    let mut t = Table::new(&["q", "s", "M", "L", "lhs", "trivial_bound", "rhs", "ratio", "rhs_eps", "ratio_eps"]);
    for c in cells {
        t.push(vec![
            c.q.into(),
            c.s.into(),
            c.m.into(),
            c.l.into(),
            c.lhs.into(),
            c.trivial_bound.into(),
            c.rhs.into(),
            c.ratio.into(),
            c.rhs_eps.into(),
            c.ratio_eps.into(),
        ]);
    }
    t
}

/// Every check under the given caps, in a fixed order.
pub fn run_suite(caps: &VerifyCaps, table: &CuspFormTable) -> Vec<CheckResult> {
    let mut out = vec![
        check_exponent(),
        check_crt(caps.qmax),
        check_weil_deligne(caps.pmax),
        check_s3_bridge(caps.dmax),
        check_correlation(caps.pmax),
        check_hecke(table, caps.nmax),
    ];
    if caps.identities {
        out.push(check_poisson());
        out.push(check_voronoi(table));
        out.push(check_congruence_dual(table));
    }
    out.push(check_error_terms(table, caps.x, caps.seed));
    out.push(check_bilinear(caps.seed));
    out
}

pub fn results_table(results: &[CheckResult]) -> Table {
    let mut t = Table::new(&["check", "status", "seconds", "detail"]);
    for r in results {
        t.push(vec![
            r.name.as_str().into(),
            (if r.passed { "pass" } else { "FAIL" }).into(),
            format!("{:.2}", r.seconds).into(),
            r.detail.as_str().into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_oracle_small_values() {
        let t = tau_dense_oracle(12);
        assert_eq!(&t[..6], &[1, -24, 252, -1472, 4830, -6048]);
    }

    #[test]
    fn quick_suite_passes() {
        let caps = VerifyCaps::quick();
        let table = CuspFormTable::compute(caps.table_size()).unwrap();
        for r in run_suite(&caps, &table) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
