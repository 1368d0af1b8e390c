//! Exact modular arithmetic, factorization and the classical multiplicative
//! functions, plus enumeration of smooth squarefree moduli.
//!
//! Products are formed in `u128` before reduction, so every routine is exact
//! for moduli up to `u64::MAX`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(|a|, n)` for a signed argument.
pub fn gcd_signed(a: i64, n: u64) -> u64 {
    gcd(a.unsigned_abs(), n)
}

/// Least nonnegative residue of `a` modulo `n`.
#[inline]
pub fn reduce(a: i64, n: u64) -> u64 {
    debug_assert!(n > 0);
    let r = (a as i128).rem_euclid(n as i128);
    r as u64
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("cannot factor 0".into()));
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        out.push((m, 1));
    }
    Ok(out)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    matches!(factorize(n).as_deref(), Ok([(p, 1)]) if *p == n)
}

/// Distinct prime divisors, ascending.
pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n.max(1)).map(|f| f.into_iter().map(|(p, _)| p).collect()).unwrap_or_default()
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factorize(n).map(|f| f.iter().all(|&(_, e)| e == 1)).unwrap_or(false)
}

/// Extended Euclid: returns `(g, x)` with `a*x ≡ g (mod n)`.
fn ext_gcd(a: u64, n: u64) -> (u64, i128) {
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    (r0 as u64, t0)
}

/// Inverse of `a` modulo `n`, in `[1, n-1]`.
pub fn mod_inverse(a: i64, n: u64) -> Result<u64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("modulus {n} must be at least 2")));
    }
    let r = reduce(a, n);
    let (g, x) = ext_gcd(r, n);
    if g != 1 {
        return Err(Error::NotInvertible { a, n });
    }
    Ok(x.rem_euclid(n as i128) as u64)
}

/// Like [`mod_inverse`] but returns 0 for the trivial modulus 1.
pub(crate) fn inverse_or_zero(a: u64, n: u64) -> Result<u64> {
    if n == 1 {
        Ok(0)
    } else {
        mod_inverse(a as i64, n)
    }
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi(0)");
    factorize(n).unwrap().into_iter().fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn moebius(n: u64) -> i8 {
    assert!(n >= 1, "moebius(0)");
    let f = factorize(n).unwrap();
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1, "divisor_count(0)");
    factorize(n).unwrap().into_iter().map(|(_, e)| e as u64 + 1).product()
}

/// All positive divisors, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    assert!(n >= 1, "divisors(0)");
    let mut out = vec![1u64];
    for (p, e) in factorize(n).unwrap() {
        let len = out.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Residues in `[0, q)` coprime to `q`. For `q = 1` this is `[0]`.
pub fn units(q: u64) -> Vec<u64> {
    if q == 1 {
        return vec![0];
    }
    (1..q).filter(|&x| gcd(x, q) == 1).collect()
}

/// A squarefree modulus together with its prime factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquarefreeModulus {
    value: u64,
    primes: Vec<u64>,
}

impl SquarefreeModulus {
    pub fn new(value: u64) -> Result<Self> {
        if value == 0 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        let f = factorize(value)?;
        if f.iter().any(|&(_, e)| e > 1) {
            return Err(Error::NotSquarefree(value));
        }
        Ok(Self { value, primes: f.into_iter().map(|(p, _)| p).collect() })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Largest prime factor, or 1 for the unit modulus.
    pub fn smoothness(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    pub fn omega(&self) -> usize {
        self.primes.len()
    }
}

/// Squarefree `q ≤ limit` whose prime factors are all `≤ y`, ascending.
pub fn smooth_squarefree_moduli(limit: u64, y: u64) -> Vec<SquarefreeModulus> {
    let primes: Vec<u64> = (2..=y.min(limit)).filter(|&p| is_prime(p)).collect();
    let mut out = Vec::new();
    // depth-first over increasing prime sequences
    let mut stack: Vec<(u64, usize, Vec<u64>)> = vec![(1, 0, Vec::new())];
    while let Some((value, start, ps)) = stack.pop() {
        for (i, &p) in primes.iter().enumerate().skip(start) {
            match value.checked_mul(p) {
                Some(v) if v <= limit => {
                    let mut next = ps.clone();
                    next.push(p);
                    stack.push((v, i + 1, next));
                }
                _ => break,
            }
        }
        out.push(SquarefreeModulus { value, primes: ps });
    }
    out.sort_by_key(|m| m.value);
    out
}

/// The factorization `q = r1 * r2` with differencing length `H`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationChoice {
    pub h: u64,
    pub r1: u64,
    pub r2: u64,
}

/// `H = (s, (s, q/s)^∞)`, `r2 = s/H`, `r1 = q/r2`.
///
/// `(·,·)^∞` keeps every prime power of `s` whose prime also divides
/// `(s, q/s)`; it is built by multiplying in common factors until stable.
pub fn factorization_choice(q: u64, s: u64) -> Result<FactorizationChoice> {
    if q == 0 || s == 0 || !q.is_multiple_of(s) {
        return Err(Error::NotADivisor { s, q });
    }
    let g = gcd(s, q / s);
    let mut h = 1u64;
    loop {
        let c = gcd(s / h, g);
        if c == 1 {
            break;
        }
        h *= c;
    }
    let r2 = s / h;
    Ok(FactorizationChoice { h, r1: q / r2, r2 })
}
