//! Complete exponential sums: Kloosterman and hyper-Kloosterman sums,
//! Ramanujan sums, the two-variable sum `S3`, correlation sums of `Kl3`,
//! and the normalized discrete Fourier transform of periodic functions.
//!
//! Every phase `e(x) = exp(2πix)` is taken from a reduced fraction `r/q` with
//! `0 ≤ r < q`, so the per-term phase error stays near machine precision
//! regardless of the size of the unreduced numerator.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modarith::{self, gcd, gcd_signed, inverse_or_zero, is_prime, mul_mod, reduce, SquarefreeModulus};

/// `e(num/den)`.
#[inline]
pub fn phase(num: i64, den: u64) -> Complex64 {
    let r = reduce(num, den);
    unit_root(r, den)
}

#[inline]
fn unit_root(r: u64, den: u64) -> Complex64 {
    let (s, c) = (TAU * (r as f64 / den as f64)).sin_cos();
    Complex64::new(c, s)
}

/// `e(r/q)` for every residue `r` in `[0, q)`.
pub fn roots_of_unity(q: u64) -> Vec<Complex64> {
    (0..q).map(|r| unit_root(r, q)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    WeilNormalized,
}

/// Value of a complete exponential sum with its modulus and normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpSumValue {
    pub value: Complex64,
    pub modulus: u64,
    pub normalization: Normalization,
}

impl ExpSumValue {
    fn raw(value: Complex64, modulus: u64) -> Self {
        debug_assert!(value.re.is_finite() && value.im.is_finite());
        Self { value, modulus, normalization: Normalization::Raw }
    }

    fn normalized(value: Complex64, modulus: u64) -> Self {
        debug_assert!(value.re.is_finite() && value.im.is_finite());
        Self { value, modulus, normalization: Normalization::WeilNormalized }
    }

    pub fn norm(&self) -> f64 {
        self.value.norm()
    }
}

fn require_modulus(m: u64) -> Result<()> {
    if m == 0 {
        Err(Error::InvalidArgument("modulus must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `S(a, b; m) = Σ_{x unit mod m} e((a x + b x̄)/m)`.
pub fn kloosterman(a: i64, b: i64, m: u64) -> Result<ExpSumValue> {
    require_modulus(m)?;
    if m == 1 {
        return Ok(ExpSumValue::raw(Complex64::new(1.0, 0.0), 1));
    }
    let (a, b) = (reduce(a, m), reduce(b, m));
    let mut acc = Complex64::new(0.0, 0.0);
    for x in modarith::units(m) {
        let xi = modarith::mod_inverse(x as i64, m)?;
        let r = (mul_mod(a, x, m) + mul_mod(b, xi, m)) % m;
        acc += unit_root(r, m);
    }
    Ok(ExpSumValue::raw(acc, m))
}

/// Normalized hyper-Kloosterman sum
/// `Kl_k(n; q) = q^{-(k-1)/2} Σ_{x_1⋯x_k ≡ n} e((x_1 + ⋯ + x_k)/q)`
/// by direct enumeration of the first `k - 1` unit variables.
///
/// Cost is `O(φ(q)^{k-1})`.
pub fn hyper_kloosterman(k: u32, n: i64, q: u64) -> Result<ExpSumValue> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("hyper-Kloosterman rank {k} < 2")));
    }
    require_modulus(q)?;
    if gcd_signed(n, q) != 1 {
        return Err(Error::NotCoprime { n, q });
    }
    if q == 1 {
        return Ok(ExpSumValue::normalized(Complex64::new(1.0, 0.0), 1));
    }
    let units = modarith::units(q);
    let mut inverse = vec![0u64; q as usize];
    for &u in &units {
        inverse[u as usize] = modarith::mod_inverse(u as i64, q)?;
    }
    let roots = roots_of_unity(q);
    let target = reduce(n, q);
    let free = (k - 1) as usize;
    let mut idx = vec![0usize; free];
    let mut acc = Complex64::new(0.0, 0.0);
    'outer: loop {
        let mut sum = 0u64;
        let mut prod = 1u64;
        for &i in &idx {
            let x = units[i];
            sum = (sum + x) % q;
            prod = mul_mod(prod, x, q);
        }
        let last = mul_mod(target, inverse[prod as usize], q);
        acc += roots[((sum + last) % q) as usize];
        // odometer
        for slot in idx.iter_mut().rev() {
            *slot += 1;
            if *slot < units.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    let scale = (q as f64).powf((k - 1) as f64 / 2.0);
    Ok(ExpSumValue::normalized(acc / scale, q))
}

/// `Kl_k(n; q)` through twisted multiplicativity:
/// `Π_{p | q} Kl_k(n · \overline{(q/p)}^k; p)`.
pub fn hyper_kloosterman_crt(k: u32, n: i64, q: &SquarefreeModulus) -> Result<ExpSumValue> {
    let qv = q.value();
    if gcd_signed(n, qv) != 1 {
        return Err(Error::NotCoprime { n, q: qv });
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for &p in q.primes() {
        let cofactor = (qv / p) % p;
        let twist = modarith::pow_mod(modarith::mod_inverse(cofactor as i64, p)?, k as u64, p);
        let arg = mul_mod(reduce(n, p), twist, p);
        acc *= hyper_kloosterman(k, arg as i64, p)?.value;
    }
    Ok(ExpSumValue::normalized(acc, qv))
}

/// Same as [`hyper_kloosterman_crt`] for a plain integer, checking squarefreeness.
pub fn hyper_kloosterman_crt_u64(k: u32, n: i64, q: u64) -> Result<ExpSumValue> {
    hyper_kloosterman_crt(k, n, &SquarefreeModulus::new(q)?)
}

/// `c_d(n) = Σ_{u unit mod d} e(u n / d)`.
pub fn ramanujan_sum(d: u64, n: i64) -> Result<f64> {
    require_modulus(d)?;
    if d == 1 {
        return Ok(1.0);
    }
    let r = reduce(n, d);
    let s: Complex64 = modarith::units(d).into_iter().map(|u| unit_root(mul_mod(u, r, d), d)).sum();
    Ok(s.re)
}

/// Exact Ramanujan sum from Hölder's formula `μ(d/g) φ(d) / φ(d/g)`, `g = (d, n)`.
pub fn ramanujan_sum_exact(d: u64, n: i64) -> i64 {
    let g = gcd_signed(n, d);
    let g = if g == 0 { d } else { g };
    let t = d / g;
    modarith::moebius(t) as i64 * (modarith::euler_phi(d) / modarith::euler_phi(t)) as i64
}

/// `S3(m, l, a; d) = Σ_{u, v unit mod d} e((a u + l v + m ū v̄)/d)`.
pub fn s3_sum(m: i64, l: i64, a: i64, d: u64) -> Result<ExpSumValue> {
    require_modulus(d)?;
    if d == 1 {
        return Ok(ExpSumValue::raw(Complex64::new(1.0, 0.0), 1));
    }
    let units = modarith::units(d);
    let (m, l, a) = (reduce(m, d), reduce(l, d), reduce(a, d));
    let roots = roots_of_unity(d);
    let mut acc = Complex64::new(0.0, 0.0);
    for &u in &units {
        let ui = inverse_or_zero(u, d)?;
        for &v in &units {
            let vi = inverse_or_zero(v, d)?;
            let r = (mul_mod(a, u, d) + mul_mod(l, v, d) + mul_mod(mul_mod(m, ui, d), vi, d)) % d;
            acc += roots[r as usize];
        }
    }
    Ok(ExpSumValue::raw(acc, d))
}

/// Table of `S3(m, l, a; d)` for all residues `m, l` mod `d`, row-major in `m`.
///
/// Built in `O(d^3)`: `G_m(v) = Σ_u e((a u + m ū v̄)/d)` then a transform in `l`.
pub fn s3_table(a: i64, d: u64) -> Result<Vec<Complex64>> {
    require_modulus(d)?;
    let du = d as usize;
    if d == 1 {
        return Ok(vec![Complex64::new(1.0, 0.0)]);
    }
    let units = modarith::units(d);
    let inv: Vec<u64> = units.iter().map(|&u| inverse_or_zero(u, d)).collect::<Result<_>>()?;
    let roots = roots_of_unity(d);
    let a = reduce(a, d);
    let mut out = vec![Complex64::new(0.0, 0.0); du * du];
    let mut g = vec![Complex64::new(0.0, 0.0); units.len()];
    for m in 0..d {
        for (j, &vi) in inv.iter().enumerate() {
            let mv = mul_mod(m, vi, d);
            g[j] = units
                .iter()
                .zip(&inv)
                .map(|(&u, &ui)| roots[((mul_mod(a, u, d) + mul_mod(mv, ui, d)) % d) as usize])
                .sum();
        }
        let row = &mut out[m as usize * du..(m as usize + 1) * du];
        for l in 0..d {
            row[l as usize] = units.iter().zip(&g).map(|(&v, gv)| gv * roots[mul_mod(l, v, d) as usize]).sum();
        }
    }
    Ok(out)
}

type Kl3Slot = Arc<OnceLock<Arc<[Complex64]>>>;

fn kl3_cache() -> &'static Mutex<HashMap<u64, Kl3Slot>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Kl3Slot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Normalized `Kl3(n; p)` for every residue `n` mod the prime `p`; entry 0 is 0.
///
/// Built once per prime in `O(p^2)` by convolving the `Kl2` table with one
/// more unit variable, then cached for the life of the process.
pub fn kl3_prime_table(p: u64) -> Result<Arc<[Complex64]>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let slot = {
        let mut map = kl3_cache().lock().expect("kl3 cache poisoned");
        map.entry(p).or_default().clone()
    };
    Ok(slot.get_or_init(|| build_kl3_prime_table(p)).clone())
}

fn build_kl3_prime_table(p: u64) -> Arc<[Complex64]> {
    let pu = p as usize;
    let roots = roots_of_unity(p);
    let mut kl2 = vec![Complex64::new(0.0, 0.0); pu];
    for x1 in 1..p {
        for x2 in 1..p {
            kl2[mul_mod(x1, x2, p) as usize] += roots[((x1 + x2) % p) as usize];
        }
    }
    let inv: Vec<u64> = (0..p).map(|x| if x == 0 { 0 } else { modarith::mod_inverse(x as i64, p).unwrap() }).collect();
    let mut kl3 = vec![Complex64::new(0.0, 0.0); pu];
    for (n, slot) in kl3.iter_mut().enumerate().skip(1) {
        let mut acc = Complex64::new(0.0, 0.0);
        for x3 in 1..p {
            acc += roots[x3 as usize] * kl2[mul_mod(n as u64, inv[x3 as usize], p) as usize];
        }
        *slot = acc / p as f64;
    }
    kl3.into()
}

/// Normalized `Kl3(n; q)` for every residue mod a squarefree `q`, assembled from
/// the cached prime tables. Residues sharing a factor with `q` map to 0.
pub fn kl3_table(q: &SquarefreeModulus) -> Result<Vec<Complex64>> {
    let qv = q.value();
    let mut out = vec![Complex64::new(1.0, 0.0); qv as usize];
    for &p in q.primes() {
        let table = kl3_prime_table(p)?;
        let cofactor = (qv / p) % p;
        let twist = modarith::pow_mod(modarith::mod_inverse(cofactor as i64, p)?, 3, p);
        for (n, slot) in out.iter_mut().enumerate() {
            *slot *= table[mul_mod(n as u64 % p, twist, p) as usize];
        }
    }
    Ok(out)
}

/// `𝒮(h, m1, m2, p) = Σ_{l mod p} Kl3(m1 l; p) · conj(Kl3(m2 l; p)) · e(-h l / p)`,
/// the `l ≡ 0` term included (it vanishes since `Kl3(0; p) = 0`).
pub fn correlation_sum(h: i64, m1: i64, m2: i64, p: u64) -> Result<ExpSumValue> {
    if p == 2 || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let table = kl3_prime_table(p)?;
    let roots = roots_of_unity(p);
    Ok(ExpSumValue::raw(correlation_from_table(&table, &roots, reduce(h, p), reduce(m1, p), reduce(m2, p), p), p))
}

pub(crate) fn correlation_from_table(
    table: &[Complex64],
    roots: &[Complex64],
    h: u64,
    m1: u64,
    m2: u64,
    p: u64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..p {
        let k1 = table[mul_mod(m1, l, p) as usize];
        let k2 = table[mul_mod(m2, l, p) as usize];
        acc += k1 * k2.conj() * roots[((p - mul_mod(h, l, p)) % p) as usize];
    }
    acc
}

/// `K̂(n) = q^{-1/2} Σ_{h mod q} K(h) e(h n / q)` for `K` given by its values on `0..q`.
pub fn dft_periodic(values: &[Complex64], n: i64) -> Result<Complex64> {
    let q = values.len() as u64;
    require_modulus(q)?;
    let r = reduce(n, q);
    let s: Complex64 = values.iter().enumerate().map(|(h, &k)| k * unit_root(mul_mod(h as u64, r, q), q)).sum();
    Ok(s / (q as f64).sqrt())
}

/// Normalized Weil constant `gcd(a, b, p)` used by the Kloosterman bound.
pub fn weil_gcd(a: i64, b: i64, p: u64) -> u64 {
    gcd(gcd_signed(a, p), gcd_signed(b, p))
}
