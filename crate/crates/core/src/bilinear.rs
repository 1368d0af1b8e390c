//! Bilinear forms with `Kl3`, the differencing inequality, and evaluators for
//! the upper bounds that control them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsums::{correlation_from_table, kl3_prime_table, kl3_table, roots_of_unity};
use crate::modarith::{divisors, gcd, gcd_signed, is_prime, mul_mod, reduce, SquarefreeModulus};
use crate::rng::SplitMix64;
use crate::transforms::SmoothWindow;

/// Coefficients `values[i]` attached to the integers `lo + i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientVector {
    lo: i64,
    values: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(lo: i64, values: Vec<Complex64>) -> Self {
        Self { lo, values }
    }

    pub fn from_real(lo: i64, values: &[f64]) -> Self {
        Self::new(lo, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(lo: i64, hi: i64) -> Self {
        Self::new(lo, vec![Complex64::new(0.0, 0.0); (hi - lo + 1).max(0) as usize])
    }

    /// Random coefficients on `[lo, hi]`, uniform on the unit disk.
    pub fn random_disk(lo: i64, hi: i64, rng: &mut SplitMix64) -> Self {
        Self::new(lo, (lo..=hi).map(|_| rng.unit_disk()).collect())
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let i = k - self.lo;
        if i < 0 || i >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.lo + i as i64, v))
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.values.iter().filter(|v| v.norm_sqr() > 0.0).count()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// True when every `|value| ≤ 1`.
    pub fn is_unit_bounded(&self) -> bool {
        self.sup_norm() <= 1.0 + 1e-15
    }
}

/// LHS, RHS and their ratio for one inequality instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub parameters: BTreeMap<String, f64>,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64, parameters: &[(&str, f64)]) -> Self {
        let ratio = if rhs > 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let parameters = parameters.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        Self { lhs, rhs, ratio, parameters }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + slack) + slack
    }
}

/// `Σ_m Σ_l α_m β_l K(ml)` for `K` given by its values on `0..q`.
pub fn bilinear_form(alpha: &CoefficientVector, beta: &CoefficientVector, k: &[Complex64]) -> Complex64 {
    let q = k.len() as i64;
    alpha
        .iter()
        .map(|(m, am)| {
            let inner: Complex64 = beta.iter().map(|(l, bl)| bl * k[(m * l).rem_euclid(q) as usize]).sum();
            am * inner
        })
        .sum()
}

fn kl3_twisted(a: i64, q: &SquarefreeModulus) -> Result<Vec<Complex64>> {
    let qv = q.value();
    if gcd_signed(a, qv) != 1 {
        return Err(Error::NotCoprime { n: a, q: qv });
    }
    let base = kl3_table(q)?;
    let a = reduce(a, qv);
    Ok((0..qv).map(|n| base[mul_mod(a, n, qv) as usize]).collect())
}

/// `Σ_{l ≥ 1} V(l/L) |Σ_m α_m Kl3(a m l; q)|^2`.
pub fn sigma_sum(
    alpha: &CoefficientVector,
    a: i64,
    q: &SquarefreeModulus,
    l_scale: f64,
    v: &SmoothWindow,
) -> Result<f64> {
    let k = kl3_twisted(a, q)?;
    let Some((c1, c2)) = v.support() else { return Ok(0.0) };
    let qv = q.value() as i64;
    let lo = ((c1 * l_scale).floor() as i64).max(1);
    let hi = (c2 * l_scale).ceil() as i64;
    let mut total = 0.0;
    for l in lo..=hi {
        let w = v.eval(l as f64 / l_scale);
        if w == 0.0 {
            continue;
        }
        let inner: Complex64 = alpha.iter().map(|(m, am)| am * k[(m * l).rem_euclid(qv) as usize]).sum();
        total += w * inner.norm_sqr();
    }
    Ok(total)
}

/// Checks `|Σ_k Σ_i b1i(k) b2i(k)|^2 ≤ H r2 R2^2 I Σ_i Σ_{c mod H r2} |Σ_{k ≡ c} b1i(k)|^2`.
///
/// Each `b2i` must cover the support of `b1i`; periodicity and the bound
/// `|b2i| ≤ R2` are verified on the supplied samples.
pub fn weyl_check(
    b1: &[CoefficientVector],
    b2: &[CoefficientVector],
    r2: u64,
    big_r2: f64,
    h: u64,
) -> Result<BoundReport> {
    if b1.len() != b2.len() {
        return Err(Error::InvalidArgument("b1 and b2 lists differ in length".into()));
    }
    if r2 == 0 || h == 0 {
        return Err(Error::InvalidArgument("r2 and H must be positive".into()));
    }
    let r = r2 as i64;
    for (i, f) in b2.iter().enumerate() {
        for (k, v) in f.iter() {
            if k + r <= f.hi() && (f.get(k + r) - v).norm() > 1e-12 {
                return Err(Error::InvalidArgument(format!("b2[{i}] is not {r2}-periodic at {k}")));
            }
            if v.norm() > big_r2 * (1.0 + 1e-12) {
                return Err(Error::InvalidArgument(format!("|b2[{i}]({k})| exceeds R2")));
            }
        }
        if b1[i].support_size() > 0 && (b1[i].lo() < f.lo() || b1[i].hi() > f.hi()) {
            return Err(Error::InvalidArgument(format!("b2[{i}] does not cover the support of b1[{i}]")));
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (f1, f2) in b1.iter().zip(b2) {
        total += f1.iter().map(|(k, v)| v * f2.get(k)).sum::<Complex64>();
    }
    let modulus = (h * r2) as i64;
    let mut diff = 0.0;
    for f1 in b1 {
        let mut classes = vec![Complex64::new(0.0, 0.0); modulus as usize];
        for (k, v) in f1.iter() {
            classes[k.rem_euclid(modulus) as usize] += v;
        }
        diff += classes.iter().map(|c| c.norm_sqr()).sum::<f64>();
    }
    let count = b1.len() as f64;
    let rhs = (h * r2) as f64 * big_r2 * big_r2 * count * diff;
    Ok(BoundReport::new(total.norm_sqr(), rhs, &[("r2", r2 as f64), ("R2", big_r2), ("H", h as f64), ("I", count)]))
}

/// Run [`weyl_check`] on `count` seeded instances with `R2 = 1`.
///
/// Instance `i` uses `SplitMix64::for_cell(seed, i)`: it draws `r2 ∈ 1..=6`,
/// `H ∈ 1..=3`, a length in `1..=40` and a family size in `1..=3`, then the
/// `b1` values and one period of each `b2`, all uniform on the unit disk.
pub fn weyl_instances(seed: u64, count: usize) -> Result<Vec<BoundReport>> {
    (0..count)
        .map(|i| {
            let mut rng = SplitMix64::for_cell(seed, i as u64);
            let r2 = 1 + rng.next_u64() % 6;
            let h = 1 + rng.next_u64() % 3;
            let len = 1 + (rng.next_u64() % 40) as usize;
            let family = 1 + (rng.next_u64() % 3) as usize;
            let b1: Vec<_> =
                (0..family).map(|_| CoefficientVector::new(0, (0..len).map(|_| rng.unit_disk()).collect())).collect();
            let b2: Vec<_> = (0..family)
                .map(|_| {
                    let period: Vec<Complex64> = (0..r2).map(|_| rng.unit_disk()).collect();
                    CoefficientVector::new(0, (0..len).map(|k| period[k % r2 as usize]).collect())
                })
                .collect();
            weyl_check(&b1, &b2, r2, 1.0, h)
        })
        .collect()
}

/// `|B|^2 ≤ ‖β‖^2 Σ_l |Σ_m α_m K(ml)|^2` (Cauchy–Schwarz in `l`).
pub fn cauchy_schwarz_check(alpha: &CoefficientVector, beta: &CoefficientVector, k: &[Complex64]) -> BoundReport {
    let q = k.len() as i64;
    let lhs = bilinear_form(alpha, beta, k).norm_sqr();
    let mut inner_sum = 0.0;
    for (l, bl) in beta.iter() {
        if bl.norm_sqr() == 0.0 {
            continue;
        }
        let s: Complex64 = alpha.iter().map(|(m, am)| am * k[(m * l).rem_euclid(q) as usize]).sum();
        inner_sum += s.norm_sqr();
    }
    let nb = beta.norm2();
    BoundReport::new(lhs, nb * nb * inner_sum, &[("q", q as f64)])
}

/// `‖K‖_∞ ‖α‖_2 ‖β‖_2 (#supp α · #supp β)^{1/2}`.
pub fn trivial_bound(alpha: &CoefficientVector, beta: &CoefficientVector, k_sup: f64) -> f64 {
    k_sup * alpha.norm2() * beta.norm2() * ((alpha.support_size() * beta.support_size()) as f64).sqrt()
}

fn require_divisor(s: u64, q: u64) -> Result<()> {
    if s == 0 || q == 0 || !q.is_multiple_of(s) {
        Err(Error::NotADivisor { s, q })
    } else {
        Ok(())
    }
}

/// `q^ε M L (M^{-1/2} s^{1/2} + q^{-1/4} s^{1/4} + L^{-1/2} q^{1/4} s^{-1/4})`.
pub fn bilinear_rhs(m: f64, l: f64, q: u64, s: u64, eps: f64) -> Result<f64> {
    require_divisor(s, q)?;
    let (qf, sf) = (q as f64, s as f64);
    Ok(qf.powf(eps)
        * m
        * l
        * (sf.sqrt() / m.sqrt() + sf.powf(0.25) / qf.powf(0.25) + qf.powf(0.25) / (l.sqrt() * sf.powf(0.25))))
}

/// `q^ε M L (q^{1/6} M^{-1/2} + q^{-1/6} + q^{1/6} L^{-1/2})`.
pub fn balanced_bilinear_rhs(m: f64, l: f64, q: u64, eps: f64) -> f64 {
    let qf = q as f64;
    let s = qf.powf(1.0 / 6.0);
    qf.powf(eps) * m * l * (s / m.sqrt() + 1.0 / s + s / l.sqrt())
}

/// Parameters of the exponent-pair estimate.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExponentPairParams {
    pub kappa: f64,
    pub lambda: f64,
    /// The unspecified `Q^C` factor; `Q = 1`, `C = 0` make it 1.
    pub big_q: f64,
    pub big_c: f64,
}

impl Default for ExponentPairParams {
    fn default() -> Self {
        Self { kappa: 0.5, lambda: 0.5, big_q: 1.0, big_c: 0.0 }
    }
}

/// `(qML)^ε Q^C ‖α‖ ‖β‖ (ML)^{1/2} (q^{κ/2} M^{(λ-κ-1)/2} + q^{-1/4} + L^{-1/2})`.
pub fn exponent_pair_rhs(
    m: f64,
    l: f64,
    q: u64,
    p: ExponentPairParams,
    norm_alpha: f64,
    norm_beta: f64,
    eps: f64,
) -> f64 {
    let qf = q as f64;
    let terms = qf.powf(p.kappa / 2.0) * m.powf((p.lambda - p.kappa - 1.0) / 2.0) + qf.powf(-0.25) + l.powf(-0.5);
    (qf * m * l).powf(eps) * p.big_q.powf(p.big_c) * norm_alpha * norm_beta * (m * l).sqrt() * terms
}

/// `q^ε M (q^{-1/4} + q^{3/8} M^{-1/2} + q^{3/4} M^{-1})`.
pub fn linear_kl3_rhs(m: f64, q: u64, eps: f64) -> f64 {
    let qf = q as f64;
    qf.powf(eps) * m * (qf.powf(-0.25) + qf.powf(0.375) / m.sqrt() + qf.powf(0.75) / m)
}

/// `q^ε (H r2 M L r1 + M^2 r1^{1/2} L (H r2)^{1/2} + M^2 r1^{3/2} (H r2)^{-1/2})` with `q = r1 r2`.
pub fn final_bound_rhs(m: f64, l: f64, r1: u64, r2: u64, h: u64, eps: f64) -> f64 {
    let (r1f, hr2) = (r1 as f64, (h * r2) as f64);
    let q = (r1 * r2) as f64;
    q.powf(eps) * (hr2 * m * l * r1f + m * m * r1f.sqrt() * l * hr2.sqrt() + m * m * r1f.powf(1.5) / hr2.sqrt())
}

/// Divisor of `q` nearest to `q^{1/3}` on a log scale (smaller one on ties).
pub fn divisor_near_cube_root(q: u64) -> u64 {
    let target = (q as f64).ln() / 3.0;
    divisors(q)
        .into_iter()
        .min_by(|&a, &b| {
            let da = ((a as f64).ln() - target).abs();
            let db = ((b as f64).ln() - target).abs();
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .unwrap_or(1)
}

/// One cell of the seeded bilinear scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanCell {
    pub q: u64,
    pub s: u64,
    pub m: u64,
    pub l: u64,
    pub lhs: f64,
    pub trivial_bound: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Same as `rhs` and `ratio` with `ε = 0.05`.
    pub rhs_eps: f64,
    pub ratio_eps: f64,
}

impl ScanCell {
    pub fn report(&self) -> BoundReport {
        BoundReport::new(
            self.lhs,
            self.rhs,
            &[("q", self.q as f64), ("s", self.s as f64), ("M", self.m as f64), ("L", self.l as f64)],
        )
    }
}

/// `|Σ_{M≤m≤2M} Σ_{L≤l≤2L} α_m β_l Kl3(ml; q)|` for random `|α|, |β| ≤ 1`,
/// against the factorable-moduli bound with `s | q` nearest `q^{1/3}`.
///
/// Cell `i` (row-major over `q`, then `M`, then `L`) draws α then β from
/// `SplitMix64::for_cell(seed, i)`.
pub fn bilinear_scan(q_list: &[u64], m_grid: &[u64], l_grid: &[u64], seed: u64, eps: f64) -> Result<Vec<ScanCell>> {
    let mut cells = Vec::new();
    for &q in q_list {
        for &m in m_grid {
            for &l in l_grid {
                cells.push((q, m, l));
            }
        }
    }
    let mut tables = BTreeMap::new();
    for &q in q_list {
        if let std::collections::btree_map::Entry::Vacant(e) = tables.entry(q) {
            let modulus = SquarefreeModulus::new(q)?;
            let k = kl3_table(&modulus)?;
            let sup = k.iter().map(|v| v.norm()).fold(0.0, f64::max);
            e.insert((k, sup));
        }
    }
    cells
        .par_iter()
        .enumerate()
        .map(|(i, &(q, m, l))| {
            let (k, sup) = &tables[&q];
            let mut rng = SplitMix64::for_cell(seed, i as u64);
            let alpha = CoefficientVector::random_disk(m as i64, 2 * m as i64, &mut rng);
            let beta = CoefficientVector::random_disk(l as i64, 2 * l as i64, &mut rng);
            let s = divisor_near_cube_root(q);
            let lhs = bilinear_form(&alpha, &beta, k).norm();
            let rhs = bilinear_rhs(m as f64, l as f64, q, s, eps)?;
            let rhs_eps = bilinear_rhs(m as f64, l as f64, q, s, eps + 0.05)?;
            Ok(ScanCell {
                q,
                s,
                m,
                l,
                lhs,
                trivial_bound: trivial_bound(&alpha, &beta, *sup),
                rhs,
                ratio: lhs / rhs,
                rhs_eps,
                ratio_eps: lhs / rhs_eps,
            })
        })
        .collect()
}

/// Summary of the correlation-sum scan at one prime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationScan {
    pub p: u64,
    /// `max |𝒮| / (√p · (m1 - m2, h, p)^{1/2})` away from `h ≡ 0, m1 ≡ m2`.
    pub max_offdiag_ratio: f64,
    pub argmax: (u64, u64, u64),
    /// `max |𝒮|` on `h ≡ 0, m1 ≡ m2`.
    pub max_diagonal: f64,
    pub diagonal_bound: f64,
}

/// Full scan of `𝒮(h, m1, m2, p)` over `h mod p` and units `m1, m2`.
pub fn correlation_scan(p: u64) -> Result<CorrelationScan> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let table = kl3_prime_table(p)?;
    let roots = roots_of_unity(p);
    let sp = (p as f64).sqrt();
    let mut best = (0.0, (0, 0, 0));
    let mut diag: f64 = 0.0;
    for m1 in 1..p {
        for m2 in 1..p {
            for h in 0..p {
                let v = correlation_from_table(&table, &roots, h, m1, m2, p).norm();
                if h == 0 && m1 == m2 {
                    diag = diag.max(v);
                    continue;
                }
                let g = gcd(gcd((m1 + p - m2) % p, h), p);
                let ratio = v / (sp * (g as f64).sqrt());
                if ratio > best.0 {
                    best = (ratio, (h, m1, m2));
                }
            }
        }
    }
    Ok(CorrelationScan {
        p,
        max_offdiag_ratio: best.0,
        argmax: best.1,
        max_diagonal: diag,
        diagonal_bound: p as f64 + 10.0 * sp,
    })
}

/// Sup of `|Kl3(n; r2)|` over units against the two candidate bounds
/// `d(r2) = 2^ω` and `3^ω`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kl3SupReport {
    pub r2: u64,
    pub sup: f64,
    pub divisor_bound: f64,
    pub three_omega_bound: f64,
}

pub fn kl3_sup_report(r2: &SquarefreeModulus) -> Result<Kl3SupReport> {
    let t = kl3_table(r2)?;
    let q = r2.value();
    let sup = (0..q).filter(|&n| gcd(n, q) == 1).map(|n| t[n as usize].norm()).fold(0.0, f64::max);
    let w = r2.omega() as i32;
    Ok(Kl3SupReport { r2: q, sup, divisor_bound: 2f64.powi(w), three_omega_bound: 3f64.powi(w) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsums::hyper_kloosterman;
    use crate::transforms::canonical_window;
    use proptest::prelude::*;

    fn ones(q: usize) -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0); q]
    }

    #[test]
    fn bilinear_examples() {
        let k: Vec<Complex64> = (0..7).map(|n| Complex64::new(n as f64, 1.0)).collect();
        let a = CoefficientVector::new(3, vec![Complex64::new(2.0, 0.0)]);
        let b = CoefficientVector::new(4, vec![Complex64::new(0.0, 1.0)]);
        let expect = Complex64::new(2.0, 0.0) * Complex64::new(0.0, 1.0) * k[12 % 7];
        assert_eq!(bilinear_form(&a, &b, &k), expect);

        let a = CoefficientVector::from_real(1, &[1.0, 1.0, 1.0]);
        assert_eq!(bilinear_form(&a, &a, &ones(5)), Complex64::new(9.0, 0.0));
    }

    #[test]
    fn bilinear_matches_double_loop() {
        let q = SquarefreeModulus::new(15).unwrap();
        let k = kl3_table(&q).unwrap();
        let mut rng = SplitMix64::new(99);
        let a = CoefficientVector::from_real(8, &(0..9).map(|_| rng.sign()).collect::<Vec<_>>());
        let b = CoefficientVector::from_real(8, &(0..9).map(|_| rng.sign()).collect::<Vec<_>>());
        let mut oracle = Complex64::new(0.0, 0.0);
        for m in 8..=16i64 {
            for l in 8..=16i64 {
                let kv = if gcd((m * l) as u64, 15) == 1 {
                    hyper_kloosterman(3, m * l, 15).unwrap().value
                } else {
                    Complex64::new(0.0, 0.0)
                };
                oracle += a.get(m) * b.get(l) * kv;
            }
        }
        assert!((bilinear_form(&a, &b, &k) - oracle).norm() < 1e-9);
    }

    #[test]
    fn sigma_examples() {
        let q = SquarefreeModulus::new(15).unwrap();
        let v = canonical_window();
        assert_eq!(sigma_sum(&CoefficientVector::zeros(4, 8), 1, &q, 4.0, &v).unwrap(), 0.0);
        let single = CoefficientVector::from_real(5, &[1.0]);
        assert!(sigma_sum(&single, 1, &q, 4.0, &v).unwrap() >= 0.0);
        let mut rng = SplitMix64::new(3);
        let alpha = CoefficientVector::random_disk(4, 8, &mut rng);
        let mut oracle = 0.0;
        for l in 1..=12i64 {
            let mut inner = Complex64::new(0.0, 0.0);
            for m in 4..=8i64 {
                if gcd((m * l) as u64, 15) == 1 {
                    inner += alpha.get(m) * hyper_kloosterman(3, m * l, 15).unwrap().value;
                }
            }
            oracle += v.eval(l as f64 / 4.0) * inner.norm_sqr();
        }
        assert!((sigma_sum(&alpha, 1, &q, 4.0, &v).unwrap() - oracle).abs() < 1e-8);
        assert!(matches!(sigma_sum(&alpha, 3, &q, 4.0, &v), Err(Error::NotCoprime { .. })));
    }

    #[test]
    fn weyl_examples() {
        let b1 = vec![CoefficientVector::from_real(0, &[1.0, 2.0, -1.0, 0.5])];
        let b2 = vec![CoefficientVector::from_real(0, &[1.0; 4])];
        let r = weyl_check(&b1, &b2, 1, 1.0, 1).unwrap();
        assert!(r.ratio <= 1.0);

        let mut rng = SplitMix64::new(11);
        let b1 = vec![CoefficientVector::new(0, (0..20).map(|_| rng.unit_disk()).collect())];
        let b2 = vec![CoefficientVector::new(0, (0..20).map(|k| crate::expsums::phase(k, 5)).collect())];
        let r = weyl_check(&b1, &b2, 5, 1.0, 2).unwrap();
        assert!(r.ratio <= 1.0 + 1e-12, "{r:?}");

        let b1 = vec![CoefficientVector::new(3, vec![Complex64::new(0.7, 0.2)])];
        let b2 = vec![CoefficientVector::new(0, vec![Complex64::new(0.0, 0.9); 6])];
        let r = weyl_check(&b1, &b2, 2, 0.9, 1).unwrap();
        assert!(r.lhs <= r.rhs);

        let bad = vec![CoefficientVector::from_real(0, &[1.0, 0.0, 0.5, 0.0])];
        assert!(weyl_check(&b1, &bad, 2, 1.0, 1).is_err());

        let runs = weyl_instances(4, 100).unwrap();
        assert_eq!(runs.len(), 100);
        assert!(runs.iter().all(|r| r.ratio <= 1.0 + 1e-9));
        assert_eq!(runs, weyl_instances(4, 100).unwrap());
    }

    #[test]
    fn rhs_examples() {
        let q = 210u64;
        let qf = q as f64;
        let v = bilinear_rhs(1.0, 1.0, q, 1, 0.0).unwrap();
        assert!((v - (1.0 + qf.powf(-0.25) + qf.powf(0.25))).abs() < 1e-12);
        let v = bilinear_rhs(16.0, 16.0, 210, 6, 0.0).unwrap();
        let expect =
            256.0 * (6f64.sqrt() / 4.0 + 6f64.powf(0.25) / qf.powf(0.25) + qf.powf(0.25) / (4.0 * 6f64.powf(0.25)));
        assert!((v - expect).abs() < 1e-9);
        assert!(matches!(bilinear_rhs(1.0, 1.0, 210, 4, 0.0), Err(Error::NotADivisor { .. })));

        let c = balanced_bilinear_rhs(1.0, 1.0, q, 0.0);
        assert!((c - (2.0 * qf.powf(1.0 / 6.0) + qf.powf(-1.0 / 6.0))).abs() < 1e-12);
        let c3 = qf.powf(1.0 / 3.0);
        // first and third terms coincide at M = L = q^{1/3}
        assert!((balanced_bilinear_rhs(c3, c3, q, 0.0) / (c3 * c3) - (2.0 + qf.powf(-1.0 / 6.0))).abs() < 1e-12);
        assert!(
            (balanced_bilinear_rhs(5.0, 7.0, q, 0.1) / balanced_bilinear_rhs(5.0, 7.0, q, 0.0) - qf.powf(0.1)).abs()
                < 1e-12
        );

        let p = ExponentPairParams::default();
        assert!((exponent_pair_rhs(1.0, 1.0, 1, p, 1.0, 1.0, 0.0) - 3.0).abs() < 1e-15);
        let m: f64 = 9.0;
        let first = qf.powf(0.25) * m.powf(-0.5);
        let full = exponent_pair_rhs(m, 4.0, q, p, 1.0, 1.0, 0.0);
        assert!((full / 6.0 - (first + qf.powf(-0.25) + 0.5)).abs() < 1e-12);
        assert!((exponent_pair_rhs(m, 4.0, q, p, 2.0, 1.0, 0.0) - 2.0 * full).abs() < 1e-12);

        let s = linear_kl3_rhs(qf, q, 0.0);
        assert!((s - qf * (2.0 * qf.powf(-0.25) + qf.powf(-0.125))).abs() < 1e-9);
        let s = linear_kl3_rhs(100.0, 30, 0.0);
        let expect = 100.0 * (30f64.powf(-0.25) + 30f64.powf(0.375) / 10.0 + 30f64.powf(0.75) / 100.0);
        assert!((s - expect).abs() < 1e-12);

        assert_eq!(final_bound_rhs(1.0, 1.0, 1, 1, 1, 0.0), 3.0);
        assert_eq!(final_bound_rhs(8.0, 8.0, 35, 3, 2, 0.0), final_bound_rhs(8.0, 8.0, 35, 2, 3, 0.0));
        let v = final_bound_rhs(8.0, 8.0, 35, 3, 2, 0.0);
        let expect = 6.0 * 64.0 * 35.0 + 64.0 * 35f64.sqrt() * 8.0 * 6f64.sqrt() + 64.0 * 35f64.powf(1.5) / 6f64.sqrt();
        assert!((v - expect).abs() < 1e-9);
    }

    #[test]
    fn scan_examples() {
        assert!(bilinear_scan(&[], &[8], &[8], 1, 0.0).unwrap().is_empty());
        let a = bilinear_scan(&[105], &[8, 16], &[8], 1, 0.0).unwrap();
        let b = bilinear_scan(&[105], &[8, 16], &[8], 1, 0.0).unwrap();
        assert_eq!(a, b);
        for c in &a {
            assert!(c.lhs <= c.trivial_bound * (1.0 + 1e-9));
            assert_eq!(c.s, 5);
        }
        assert_eq!(divisor_near_cube_root(210), 6);
    }

    #[test]
    fn correlation_scan_small() {
        let r = correlation_scan(7).unwrap();
        assert!(r.max_offdiag_ratio <= 10.0);
        assert!(r.max_diagonal <= r.diagonal_bound);
        assert!(correlation_scan(2).is_err());
    }

    #[test]
    fn kl3_sup() {
        let r = kl3_sup_report(&SquarefreeModulus::new(7 * 13).unwrap()).unwrap();
        assert!(r.sup <= r.three_omega_bound + 1e-9);
    }

    proptest! {
        #[test]
        fn weyl_holds_on_random_instances(seed in any::<u64>(), r2 in 1u64..7, h in 1u64..4, len in 1usize..30, count in 1usize..4) {
            let mut rng = SplitMix64::new(seed);
            let b1: Vec<_> = (0..count).map(|_| CoefficientVector::new(0, (0..len).map(|_| rng.unit_disk()).collect())).collect();
            let b2: Vec<_> = (0..count).map(|_| {
                let period: Vec<Complex64> = (0..r2).map(|_| rng.unit_disk()).collect();
                CoefficientVector::new(0, (0..len).map(|k| period[k % r2 as usize]).collect())
            }).collect();
            let r = weyl_check(&b1, &b2, r2, 1.0, h).unwrap();
            prop_assert!(r.ratio <= 1.0 + 1e-9);
        }

        #[test]
        fn trivial_and_cauchy_schwarz(seed in any::<u64>(), m in 1i64..12, l in 1i64..12) {
            let q = SquarefreeModulus::new(30).unwrap();
            let k = kl3_table(&q).unwrap();
            let sup = k.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut rng = SplitMix64::new(seed);
            let a = CoefficientVector::random_disk(m, 2 * m, &mut rng);
            let b = CoefficientVector::random_disk(l, 2 * l, &mut rng);
            prop_assert!(bilinear_form(&a, &b, &k).norm() <= trivial_bound(&a, &b, sup) * (1.0 + 1e-9));
            prop_assert!(cauchy_schwarz_check(&a, &b, &k).holds(1e-9));
        }

        #[test]
        fn sigma_nonnegative(seed in any::<u64>(), a in 1i64..20) {
            let q = SquarefreeModulus::new(21).unwrap();
            prop_assume!(gcd_signed(a, 21) == 1);
            let mut rng = SplitMix64::new(seed);
            let alpha = CoefficientVector::random_disk(3, 6, &mut rng);
            prop_assert!(sigma_sum(&alpha, a, &q, 5.0, &canonical_window()).unwrap() >= 0.0);
        }
    }
}
