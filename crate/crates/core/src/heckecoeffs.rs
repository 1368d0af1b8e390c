//! Ramanujan's `τ(n)` from the product `x Π (1 - x^n)^24`, the normalized
//! eigenvalues `λ(n) = τ(n) n^{-11/2}` of `Δ`, and the convolution `λ * 1`.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::modarith;

/// Largest table the library agrees to build.
pub const N_MAX_LIMIT: u64 = 1_000_000;

pub const CACHE_ENV: &str = "KLOOSTER_CACHE_DIR";
const MAGIC: &[u8; 4] = b"TAU1";
const CACHE_FILE: &str = "tau.bin";
// entries recomputed from scratch whenever a cache file is loaded
const PREFIX_CHECK: usize = 2048;

/// Exact `τ(n)` and `λ(n)` for `1 ≤ n ≤ n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspFormTable {
    weight: u32,
    tau: Vec<i128>,
    lambda: Vec<f64>,
}

/// Coefficients of `Π_{n≥1} (1 - x^n)^3 = Σ_m (-1)^m (2m+1) x^{m(m+1)/2}` up to `x^len-1`.
fn eta_cubed(len: usize) -> Vec<(usize, i128)> {
    let mut out = Vec::new();
    let mut m = 0usize;
    loop {
        let e = m * (m + 1) / 2;
        if e >= len {
            break;
        }
        let c = (2 * m + 1) as i128;
        out.push((e, if m.is_multiple_of(2) { c } else { -c }));
        m += 1;
    }
    out
}

/// `τ(1..=n_max)` by multiplying the sparse cube of Euler's product into itself.
fn tau_series(n_max: usize) -> Result<Vec<i128>> {
    let sparse = eta_cubed(n_max);
    let mut acc = vec![0i128; n_max];
    for &(e, c) in &sparse {
        acc[e] = c;
    }
    let mut next = vec![0i128; n_max];
    for _ in 0..7 {
        for (n, slot) in next.iter_mut().enumerate() {
            let mut s = 0i128;
            for &(e, c) in &sparse {
                if e > n {
                    break;
                }
                let term = acc[n - e].checked_mul(c).ok_or(Error::Overflow("expanding the eta product"))?;
                s = s.checked_add(term).ok_or(Error::Overflow("expanding the eta product"))?;
            }
            *slot = s;
        }
        std::mem::swap(&mut acc, &mut next);
    }
    // Δ = x Π(1-x^n)^24, so τ(n) is the coefficient of x^{n-1}.
    Ok(acc)
}

fn lambda_of(tau: i128, n: u64) -> f64 {
    tau as f64 * (n as f64).powf(-5.5)
}

impl CuspFormTable {
    /// Build the table for `Δ` up to `n_max`.
    pub fn compute(n_max: u64) -> Result<Self> {
        check_size(n_max)?;
        Ok(Self::from_tau(tau_series(n_max as usize)?))
    }

    fn from_tau(tau: Vec<i128>) -> Self {
        let lambda = tau.iter().enumerate().map(|(i, &t)| lambda_of(t, i as u64 + 1)).collect();
        Self { weight: 12, tau, lambda }
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn n_max(&self) -> u64 {
        self.tau.len() as u64
    }

    fn index(&self, n: u64) -> Result<usize> {
        if n == 0 || n > self.n_max() {
            return Err(Error::OutOfRange { index: n, max: self.n_max() });
        }
        Ok(n as usize - 1)
    }

    pub fn tau(&self, n: u64) -> Result<i128> {
        Ok(self.tau[self.index(n)?])
    }

    /// `λ(n) = τ(n) n^{-11/2}`.
    pub fn lambda(&self, n: u64) -> Result<f64> {
        Ok(self.lambda[self.index(n)?])
    }

    /// `τ(1..=n_max)` as a slice; entry `i` holds `τ(i + 1)`.
    pub fn tau_values(&self) -> &[i128] {
        &self.tau
    }

    /// `λ(1..=n_max)`; entry `i` holds `λ(i + 1)`.
    pub fn lambda_values(&self) -> &[f64] {
        &self.lambda
    }

    /// A copy restricted to `n ≤ n_max`.
    pub fn truncated(&self, n_max: u64) -> Result<Self> {
        if n_max == 0 || n_max > self.n_max() {
            return Err(Error::OutOfRange { index: n_max, max: self.n_max() });
        }
        let n = n_max as usize;
        Ok(Self { weight: self.weight, tau: self.tau[..n].to_vec(), lambda: self.lambda[..n].to_vec() })
    }

    /// `(λ * 1)(n) = Σ_{m | n} λ(m)`.
    pub fn convolve_lambda_one(&self, n: u64) -> Result<f64> {
        self.index(n)?;
        Ok(modarith::divisors(n).into_iter().map(|d| self.lambda[d as usize - 1]).sum())
    }

    /// `(λ * 1)(n)` for `0 ≤ n ≤ x`, with entry 0 set to 0, by a divisor sweep.
    pub fn convolution_table(&self, x: u64) -> Result<Vec<f64>> {
        self.index(x)?;
        let x = x as usize;
        let mut out = vec![0.0; x + 1];
        for m in 1..=x {
            let l = self.lambda[m - 1];
            for n in (m..=x).step_by(m) {
                out[n] += l;
            }
        }
        Ok(out)
    }

    /// Serialize to the binary cache format.
    pub fn write_to<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.n_max().to_le_bytes())?;
        for &t in &self.tau {
            let bytes = minimal_le_bytes(t);
            w.write_all(&[bytes.len() as u8])?;
            w.write_all(&bytes)?;
        }
        w.flush()
    }

    /// Parse and validate the binary cache format.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let corrupt = |m: &str| Error::CorruptCache(m.to_string());
        if buf.len() < 12 || &buf[..4] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let n_max = u64::from_le_bytes(buf[4..12].try_into().unwrap());
        if n_max == 0 || n_max > N_MAX_LIMIT {
            return Err(corrupt("implausible n_max"));
        }
        let mut tau = Vec::with_capacity(n_max as usize);
        let mut pos = 12;
        for _ in 0..n_max {
            let len = *buf.get(pos).ok_or_else(|| corrupt("truncated record"))? as usize;
            pos += 1;
            if len == 0 || len > 16 || pos + len > buf.len() {
                return Err(corrupt("bad record length"));
            }
            tau.push(from_le_bytes(&buf[pos..pos + len]));
            pos += len;
        }
        if pos != buf.len() {
            return Err(corrupt("trailing bytes"));
        }
        let table = Self::from_tau(tau);
        table.validate()?;
        Ok(table)
    }

    /// Spot checks that catch bit rot in a loaded table.
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::CorruptCache(m));
        let prefix = self.tau.len().min(PREFIX_CHECK);
        let fresh = tau_series(prefix)?;
        if let Some(i) = (0..prefix).find(|&i| fresh[i] != self.tau[i]) {
            return bad(format!("tau({}) = {} but recomputation gives {}", i + 1, self.tau[i], fresh[i]));
        }
        let n = self.n_max();
        // multiplicativity on every coprime pair involving a small factor
        for m in 2..=n.min(50) {
            for k in (2..=n / m).filter(|&k| modarith::gcd(m, k) == 1) {
                let lhs = self.tau[(m * k) as usize - 1];
                let rhs = self.tau[m as usize - 1].checked_mul(self.tau[k as usize - 1]);
                if rhs != Some(lhs) {
                    return bad(format!("tau({}) breaks multiplicativity", m * k));
                }
            }
        }
        for p in (2..=n).take_while(|&p| p * p <= n).filter(|&p| modarith::is_prime(p)) {
            if let Some(v) = hecke_prime_power_violation(self, p) {
                return bad(format!("tau({v}) breaks the prime-power recursion"));
            }
        }
        let d = divisor_counts(n as usize);
        if let Some(i) = (0..n as usize).find(|&i| self.lambda[i].abs() > d[i + 1] as f64) {
            return bad(format!("lambda({}) exceeds d(n)", i + 1));
        }
        Ok(())
    }

    /// Load from `$KLOOSTER_CACHE_DIR/tau.bin` when it covers `n_max`, otherwise
    /// compute and (if the variable is set) store the new table there.
    ///
    /// A corrupt cache file is an error rather than a silent recompute.
    pub fn load_or_compute(n_max: u64) -> Result<Self> {
        match cache_dir() {
            Some(dir) => Self::load_or_compute_in(&dir, n_max),
            None => Self::compute(n_max),
        }
    }

    pub fn load_or_compute_in(dir: &Path, n_max: u64) -> Result<Self> {
        check_size(n_max)?;
        let path = dir.join(CACHE_FILE);
        if path.exists() {
            let cached = Self::read_from(io::BufReader::new(fs::File::open(&path)?))?;
            if cached.n_max() >= n_max {
                return cached.truncated(n_max);
            }
        }
        let table = Self::compute(n_max)?;
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!("{CACHE_FILE}.tmp{}", std::process::id()));
        table.write_to(io::BufWriter::new(fs::File::create(&tmp)?))?;
        fs::rename(&tmp, &path)?;
        Ok(table)
    }
}

/// First `p^{j+1}` where `τ(p^{j+1}) = τ(p)τ(p^j) - p^11 τ(p^{j-1})` fails, if any.
pub fn hecke_prime_power_violation(table: &CuspFormTable, p: u64) -> Option<u64> {
    let n = table.n_max();
    let p11 = (p as i128).checked_pow(11)?;
    let t = |k: u64| table.tau[k as usize - 1];
    let (mut prev, mut cur) = (1u64, p);
    while let Some(next) = cur.checked_mul(p).filter(|&x| x <= n) {
        let rhs = t(p).checked_mul(t(cur)).zip(p11.checked_mul(t(prev))).and_then(|(a, b)| a.checked_sub(b));
        if rhs != Some(t(next)) {
            return Some(next);
        }
        prev = cur;
        cur = next;
    }
    None
}

/// `d(n)` for `0 ≤ n ≤ x` (entry 0 unused).
pub fn divisor_counts(x: usize) -> Vec<u32> {
    let mut d = vec![0u32; x + 1];
    for m in 1..=x {
        for n in (m..=x).step_by(m) {
            d[n] += 1;
        }
    }
    d
}

fn check_size(n_max: u64) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if n_max > N_MAX_LIMIT {
        return Err(Error::ResourceLimit { requested: n_max, limit: N_MAX_LIMIT });
    }
    Ok(())
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|s| !s.is_empty()).map(PathBuf::from)
}

fn minimal_le_bytes(v: i128) -> Vec<u8> {
    let bytes = v.to_le_bytes();
    let mut len = 16;
    while len > 1 {
        let top = bytes[len - 1];
        let below_sign = bytes[len - 2] & 0x80;
        if (top == 0 && below_sign == 0) || (top == 0xff && below_sign != 0) {
            len -= 1;
        } else {
            break;
        }
    }
    bytes[..len].to_vec()
}

fn from_le_bytes(b: &[u8]) -> i128 {
    let fill = if b[b.len() - 1] & 0x80 != 0 { 0xff } else { 0 };
    let mut full = [fill; 16];
    full[..b.len()].copy_from_slice(b);
    i128::from_le_bytes(full)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Dense expansion of Π (1 - x^n)^24, independent of the sparse route.
    fn tau_oracle(n_max: usize) -> Vec<i128> {
        let mut poly = vec![0i128; n_max];
        poly[0] = 1;
        for n in 1..n_max {
            for _ in 0..24 {
                for i in (n..n_max).rev() {
                    poly[i] -= poly[i - n];
                }
            }
        }
        poly
    }

    #[test]
    fn small_values() {
        let t = CuspFormTable::compute(12).unwrap();
        let expect = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944];
        assert_eq!(t.tau_values(), &expect);
        assert_eq!(t.tau(6).unwrap(), t.tau(2).unwrap() * t.tau(3).unwrap());
        assert_eq!(t.lambda(1).unwrap(), 1.0);
        assert!((t.lambda(2).unwrap() + 0.530330085889911).abs() < 1e-12);
        assert!(matches!(t.tau(13), Err(Error::OutOfRange { index: 13, max: 12 })));
        assert!(matches!(t.lambda(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn matches_dense_oracle() {
        let t = CuspFormTable::compute(400).unwrap();
        assert_eq!(t.tau_values(), tau_oracle(400).as_slice());
    }

    #[test]
    fn size_limits() {
        assert!(matches!(CuspFormTable::compute(N_MAX_LIMIT + 1), Err(Error::ResourceLimit { .. })));
        assert!(CuspFormTable::compute(0).is_err());
    }

    #[test]
    fn hecke_relations_and_deligne() {
        let t = CuspFormTable::compute(5000).unwrap();
        for p in (2..5000).filter(|&p| modarith::is_prime(p)) {
            assert_eq!(hecke_prime_power_violation(&t, p), None);
        }
        for n in 1..=5000u64 {
            assert!(t.lambda(n).unwrap().abs() <= modarith::divisor_count(n) as f64);
        }
    }

    #[test]
    fn convolution_examples() {
        let t = CuspFormTable::compute(10_000).unwrap();
        assert_eq!(t.convolve_lambda_one(1).unwrap(), 1.0);
        assert!((t.convolve_lambda_one(2).unwrap() - 0.469669914110089).abs() < 1e-12);
        assert!((t.convolve_lambda_one(7).unwrap() - 1.0 - t.lambda(7).unwrap()).abs() < 1e-15);
        let table = t.convolution_table(10_000).unwrap();
        assert_eq!(table[0], 0.0);
        for n in 1..=10_000u64 {
            assert!((table[n as usize] - t.convolve_lambda_one(n).unwrap()).abs() < 1e-12);
        }
        for m in 1..=100u64 {
            for n in (1..=10_000 / m).filter(|&n| modarith::gcd(m, n) == 1) {
                let prod = table[m as usize] * table[n as usize];
                assert!((table[(m * n) as usize] - prod).abs() < 1e-10, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = CuspFormTable::load_or_compute_in(dir.path(), 3000).unwrap();
        assert!(dir.path().join(CACHE_FILE).exists());
        let b = CuspFormTable::load_or_compute_in(dir.path(), 2000).unwrap();
        assert_eq!(b.tau_values(), &a.tau_values()[..2000]);
        let c = CuspFormTable::load_or_compute_in(dir.path(), 4000).unwrap();
        assert_eq!(&c.tau_values()[..3000], a.tau_values());
    }

    #[test]
    fn cache_corruption_detected() {
        let t = CuspFormTable::compute(500).unwrap();
        let mut bytes = Vec::new();
        t.write_to(&mut bytes).unwrap();
        assert_eq!(CuspFormTable::read_from(bytes.as_slice()).unwrap(), t);

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(CuspFormTable::read_from(bad_magic.as_slice()), Err(Error::CorruptCache(_))));

        let mut truncated = bytes.clone();
        truncated.pop();
        assert!(matches!(CuspFormTable::read_from(truncated.as_slice()), Err(Error::CorruptCache(_))));

        // flip a low bit deep inside the table
        let mut flipped = bytes.clone();
        let at = 12 + 2 * 1500;
        flipped[at] ^= 1;
        assert!(matches!(CuspFormTable::read_from(flipped.as_slice()), Err(Error::CorruptCache(_))));
    }

    proptest! {
        #[test]
        fn byte_encoding_round_trips(v in any::<i128>()) {
            let b = minimal_le_bytes(v);
            prop_assert!(!b.is_empty() && b.len() <= 16);
            prop_assert_eq!(from_le_bytes(&b), v);
        }

        #[test]
        fn minimal_encoding_is_minimal(v in any::<i64>()) {
            let b = minimal_le_bytes(v as i128);
            if b.len() > 1 {
                prop_assert!(from_le_bytes(&b[..b.len() - 1]) != v as i128);
            }
        }
    }
}
