//! C interface: opaque τ tables, exponential sums and the identity checks.
//!
//! Every function returns a `KloosterStatus`; on failure the message is kept per thread
//! and read back with `klooster_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use klooster::apdist::{congruence_dual_check, error_term, exponent_optimizer_with, BoundSystem};
use klooster::expsums::{hyper_kloosterman, hyper_kloosterman_crt_u64, kloosterman, ramanujan_sum_exact, s3_sum};
use klooster::heckecoeffs::CuspFormTable;
use klooster::transforms::{bump_window, poisson_ap_check, voronoi_check, IdentityReport};
use klooster::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KloosterStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotCoprime = 3,
    NotSquarefree = 4,
    NotInvertible = 5,
    OutOfRange = 6,
    ResourceLimit = 7,
    Overflow = 8,
    CorruptCache = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KloosterMethod {
    Direct = 0,
    Crt = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KloosterComplex {
    pub re: f64,
    pub im: f64,
}

/// Both sides of a summation identity.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KloosterIdentityReport {
    pub lhs: KloosterComplex,
    pub rhs: KloosterComplex,
    pub residual: f64,
    pub relative_residual: f64,
    pub dual_terms: u64,
}

/// Opaque table of τ(n) and λ(n) = τ(n) n^{-11/2} for 1 ≤ n ≤ n_max.
pub struct KloosterTauTable(CuspFormTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KloosterStatus {
    match e {
        Error::NotInvertible { .. } => KloosterStatus::NotInvertible,
        Error::NotCoprime { .. } => KloosterStatus::NotCoprime,
        Error::NotSquarefree(_) => KloosterStatus::NotSquarefree,
        Error::OutOfRange { .. } => KloosterStatus::OutOfRange,
        Error::ResourceLimit { .. } => KloosterStatus::ResourceLimit,
        Error::Overflow(_) => KloosterStatus::Overflow,
        Error::CorruptCache(_) => KloosterStatus::CorruptCache,
        Error::Io(_) => KloosterStatus::Io,
        _ => KloosterStatus::InvalidArgument,
    }
}

fn fail(status: KloosterStatus, msg: impl Into<String>) -> KloosterStatus {
    set_error(msg.into());
    status
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), KloosterStatus>) -> KloosterStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KloosterStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => fail(KloosterStatus::Panic, "panic inside klooster"),
    }
}

fn lift<T>(r: klooster::Result<T>) -> Result<T, KloosterStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, KloosterStatus> {
    // SAFETY: caller passes either null or a valid, writable, aligned pointer.
    unsafe { p.as_mut() }.ok_or_else(|| fail(KloosterStatus::NullPointer, format!("{name} is null")))
}

fn table<'a>(p: *const KloosterTauTable) -> Result<&'a CuspFormTable, KloosterStatus> {
    // SAFETY: non-null handles come from klooster_tau_table_new and are not yet freed.
    unsafe { p.as_ref() }.map(|t| &t.0).ok_or_else(|| fail(KloosterStatus::NullPointer, "table is null"))
}

fn complex(z: klooster::expsums::ExpSumValue) -> KloosterComplex {
    KloosterComplex { re: z.value.re, im: z.value.im }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length without the NUL, or 0 when there is none.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: caller guarantees `buf` holds `len` bytes.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Builds the table for 1 ≤ n ≤ n_max, reading and writing $KLOOSTER_CACHE_DIR when set.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_tau_table_new(n_max: u64, table_out: *mut *mut KloosterTauTable) -> KloosterStatus {
    guard(|| {
        let slot = out(table_out, "table_out")?;
        *slot = ptr::null_mut();
        let t = lift(CuspFormTable::load_or_compute(n_max))?;
        *slot = Box::into_raw(Box::new(KloosterTauTable(t)));
        Ok(())
    })
}

/// Releases a table; null is ignored.
///
/// # Safety
/// `table` is null or a live handle from `klooster_tau_table_new`, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn klooster_tau_table_free(table: *mut KloosterTauTable) {
    if !table.is_null() {
        // SAFETY: pointer came from klooster_tau_table_new and is freed once.
        drop(unsafe { Box::from_raw(table) });
    }
}

/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_tau_table_n_max(
    table: *const KloosterTauTable,
    n_max_out: *mut u64,
) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        *out(n_max_out, "n_max_out")? = t.n_max();
        Ok(())
    })
}

/// τ(n); `Overflow` when it does not fit in 64 bits.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_tau(table: *const KloosterTauTable, n: u64, tau_out: *mut i64) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        let slot = out(tau_out, "tau_out")?;
        let v = lift(t.tau(n))?;
        *slot =
            i64::try_from(v).map_err(|_| fail(KloosterStatus::Overflow, format!("tau({n}) = {v} exceeds 64 bits")))?;
        Ok(())
    })
}

/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_lambda(
    table: *const KloosterTauTable,
    n: u64,
    lambda_out: *mut f64,
) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        let slot = out(lambda_out, "lambda_out")?;
        *slot = lift(t.lambda(n))?;
        Ok(())
    })
}

/// S(a, b; m) = Σ_{x unit mod m} e((a x + b x̄)/m), unnormalized.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_kloosterman(
    a: i64,
    b: i64,
    m: u64,
    value_out: *mut KloosterComplex,
) -> KloosterStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        *slot = complex(lift(kloosterman(a, b, m))?);
        Ok(())
    })
}

/// Kl_k(n; q) = q^{-(k-1)/2} Σ_{x_1⋯x_k ≡ n (q)} e((x_1 + ⋯ + x_k)/q); `method` is a `KloosterMethod`.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_hyper_kloosterman(
    k: u32,
    n: i64,
    q: u64,
    method: u32,
    value_out: *mut KloosterComplex,
) -> KloosterStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        let v = match method {
            m if m == KloosterMethod::Direct as u32 => hyper_kloosterman(k, n, q),
            m if m == KloosterMethod::Crt as u32 => hyper_kloosterman_crt_u64(k, n, q),
            m => return Err(fail(KloosterStatus::InvalidArgument, format!("unknown method {m}"))),
        };
        *slot = complex(lift(v)?);
        Ok(())
    })
}

/// S3(m, l, a; d) = Σ_{u, v unit mod d} e((a u + l v + m ū v̄)/d).
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_s3_sum(
    m: i64,
    l: i64,
    a: i64,
    d: u64,
    value_out: *mut KloosterComplex,
) -> KloosterStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        *slot = complex(lift(s3_sum(m, l, a, d))?);
        Ok(())
    })
}

/// c_d(n) = Σ_{u unit mod d} e(u n / d).
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_ramanujan_sum(d: u64, n: i64, value_out: *mut i64) -> KloosterStatus {
    guard(|| {
        let slot = out(value_out, "value_out")?;
        if d == 0 {
            return Err(fail(KloosterStatus::InvalidArgument, "modulus must be positive"));
        }
        *slot = ramanujan_sum_exact(d, n);
        Ok(())
    })
}

/// E(X; q, a) for the coefficients (λ*1)(n).
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_error_term(
    table: *const KloosterTauTable,
    x: u64,
    q: u64,
    a: u64,
    value_out: *mut f64,
) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        let slot = out(value_out, "value_out")?;
        *slot = lift(error_term(t, x, q, a))?.e;
        Ok(())
    })
}

/// Largest grid δ with σ_max(δ) ≤ 1 − κ and θ = 1/(2 − δ); both NaN when no δ qualifies.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_exponent_opt(
    eta: f64,
    kappa: f64,
    resolution: f64,
    with_completion: bool,
    delta_out: *mut f64,
    theta_out: *mut f64,
) -> KloosterStatus {
    guard(|| {
        let d = out(delta_out, "delta_out")?;
        let t = out(theta_out, "theta_out")?;
        let system = if with_completion { BoundSystem::WithCompletion } else { BoundSystem::Displayed };
        let opt = lift(exponent_optimizer_with(eta, kappa, resolution, system))?;
        *d = opt.delta_star.unwrap_or(f64::NAN);
        *t = opt.theta.unwrap_or(f64::NAN);
        Ok(())
    })
}

fn identity(r: IdentityReport) -> KloosterIdentityReport {
    KloosterIdentityReport {
        lhs: KloosterComplex { re: r.lhs.re, im: r.lhs.im },
        rhs: KloosterComplex { re: r.rhs.re, im: r.rhs.im },
        residual: r.residual,
        relative_residual: r.relative_residual,
        dual_terms: r.dual_terms,
    }
}

/// Σ_{n≡a (q)} V(n) against q^{-1} Σ_m e(am/q) V̂(m/q), V the bump 0 off [c1,c2], 1 on [lo,hi].
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_poisson_check(
    q: u64,
    a: i64,
    c1: f64,
    lo: f64,
    hi: f64,
    c2: f64,
    report_out: *mut KloosterIdentityReport,
) -> KloosterStatus {
    guard(|| {
        let slot = out(report_out, "report_out")?;
        let v = lift(bump_window(c1, lo, hi, c2))?;
        *slot = identity(lift(poisson_ap_check(q, a, &v))?);
        Ok(())
    })
}

/// Σ λ(n) e(an/q) V(n) against q^{-1} Σ λ(n) e(−ā n/q) Ṽ(n/q²).
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_voronoi_check(
    table: *const KloosterTauTable,
    q: u64,
    a: i64,
    c1: f64,
    lo: f64,
    hi: f64,
    c2: f64,
    report_out: *mut KloosterIdentityReport,
) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        let slot = out(report_out, "report_out")?;
        let v = lift(bump_window(c1, lo, hi, c2))?;
        *slot = identity(lift(voronoi_check(q, a, &v, t))?);
        Ok(())
    })
}

/// Σ_{ml≡a (q)} λ(m)V(m)W(l) against its dual expansion; each window is four doubles c1,lo,hi,c2.
///
/// # Safety
/// Pointer arguments are null or valid for the reads and writes their types describe.
#[no_mangle]
pub unsafe extern "C" fn klooster_congruence_sum_check(
    table: *const KloosterTauTable,
    q: u64,
    a: i64,
    v_window: *const f64,
    w_window: *const f64,
    report_out: *mut KloosterIdentityReport,
) -> KloosterStatus {
    guard(|| {
        let t = self::table(table)?;
        let slot = out(report_out, "report_out")?;
        if v_window.is_null() || w_window.is_null() {
            return Err(fail(KloosterStatus::NullPointer, "window is null"));
        }
        // SAFETY: non-null windows point at four readable doubles.
        let (vw, ww) = unsafe { (std::slice::from_raw_parts(v_window, 4), std::slice::from_raw_parts(w_window, 4)) };
        let v = lift(bump_window(vw[0], vw[1], vw[2], vw[3]))?;
        let w = lift(bump_window(ww[0], ww[1], ww[2], ww[3]))?;
        let r = lift(congruence_dual_check(t, &v, &w, q, a))?;
        *slot = KloosterIdentityReport {
            lhs: KloosterComplex { re: r.lhs, im: 0.0 },
            rhs: KloosterComplex { re: r.rhs, im: 0.0 },
            residual: r.residual,
            relative_residual: r.relative_residual,
            dual_terms: r.dual_terms_v,
        };
        Ok(())
    })
}
