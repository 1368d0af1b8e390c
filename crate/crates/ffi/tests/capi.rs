use std::ffi::c_char;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use klooster_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    let n = unsafe { klooster_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf.iter().take(n.min(255)).map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn new_table(n: u64) -> *mut KloosterTauTable {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { klooster_tau_table_new(n, &mut t) }, KloosterStatus::Ok);
    assert!(!t.is_null());
    t
}

#[test]
fn table_lifecycle() {
    let t = new_table(1000);
    let (mut n_max, mut tau, mut lambda) = (0u64, 0i64, 0f64);
    unsafe {
        assert_eq!(klooster_tau_table_n_max(t, &mut n_max), KloosterStatus::Ok);
        assert_eq!(klooster_tau(t, 2, &mut tau), KloosterStatus::Ok);
        assert_eq!(klooster_lambda(t, 4, &mut lambda), KloosterStatus::Ok);
    }
    assert_eq!((n_max, tau), (1000, -24));
    assert!((lambda + 0.71875).abs() < 1e-15);
    assert_eq!(unsafe { klooster_tau(t, 1001, &mut tau) }, KloosterStatus::OutOfRange);
    assert!(last_error().contains("1001"));
    unsafe {
        klooster_tau_table_free(t);
        klooster_tau_table_free(ptr::null_mut());
    }
}

#[test]
fn null_pointers() {
    let mut tau = 0i64;
    assert_eq!(unsafe { klooster_tau(ptr::null(), 1, &mut tau) }, KloosterStatus::NullPointer);
    assert_eq!(unsafe { klooster_tau_table_new(10, ptr::null_mut()) }, KloosterStatus::NullPointer);
    assert_eq!(unsafe { klooster_kloosterman(1, 1, 7, ptr::null_mut()) }, KloosterStatus::NullPointer);
    assert!(last_error().contains("null"));
}

#[test]
fn sums() {
    let mut v = KloosterComplex::default();
    unsafe {
        assert_eq!(klooster_hyper_kloosterman(3, 1, 2, KloosterMethod::Direct as u32, &mut v), KloosterStatus::Ok);
        assert!((v.re + 0.5).abs() < 1e-12 && v.im.abs() < 1e-12);
        let mut c = KloosterComplex::default();
        assert_eq!(klooster_hyper_kloosterman(3, 4, 35, KloosterMethod::Direct as u32, &mut v), KloosterStatus::Ok);
        assert_eq!(klooster_hyper_kloosterman(3, 4, 35, KloosterMethod::Crt as u32, &mut c), KloosterStatus::Ok);
        assert!((v.re - c.re).abs() < 1e-9 && (v.im - c.im).abs() < 1e-9);
        assert_eq!(
            klooster_hyper_kloosterman(3, 1, 12, KloosterMethod::Crt as u32, &mut c),
            KloosterStatus::NotSquarefree
        );
        assert_eq!(klooster_hyper_kloosterman(3, 1, 15, 7, &mut c), KloosterStatus::InvalidArgument);
        assert_eq!(klooster_hyper_kloosterman(2, 5, 15, 0, &mut c), KloosterStatus::NotCoprime);

        let mut s3 = KloosterComplex::default();
        let mut kl = KloosterComplex::default();
        assert_eq!(klooster_s3_sum(2, 3, 4, 11, &mut s3), KloosterStatus::Ok);
        assert_eq!(klooster_hyper_kloosterman(3, 24, 11, 0, &mut kl), KloosterStatus::Ok);
        assert!((s3.re - 11.0 * kl.re).abs() < 1e-9 && (s3.im - 11.0 * kl.im).abs() < 1e-9);

        let mut c6 = 0i64;
        assert_eq!(klooster_ramanujan_sum(6, 3, &mut c6), KloosterStatus::Ok);
        assert_eq!(c6, -2);
        assert_eq!(klooster_kloosterman(1, 1, 0, &mut v), KloosterStatus::InvalidArgument);
    }
}

#[test]
fn exponent_and_identities() {
    let (mut d, mut th) = (0.0, 0.0);
    unsafe {
        assert_eq!(klooster_exponent_opt(1e-4, 1e-4, 1e-3, true, &mut d, &mut th), KloosterStatus::Ok);
        assert!((d - 1.0 / 18.0).abs() < 2e-3 && (th - 18.0 / 35.0).abs() < 2e-3);
        assert_eq!(klooster_exponent_opt(1e-4, 1e-4, 1e-3, false, &mut d, &mut th), KloosterStatus::Ok);
        assert!(d.is_nan() && th.is_nan());

        let mut r = KloosterIdentityReport::default();
        assert_eq!(klooster_poisson_check(5, 2, 100.0, 150.0, 250.0, 400.0, &mut r), KloosterStatus::Ok);
        assert!(r.residual < 1e-8);
        assert_eq!(klooster_poisson_check(5, 2, 100.0, 50.0, 250.0, 400.0, &mut r), KloosterStatus::InvalidArgument);

        let t = new_table(100_000);
        assert_eq!(klooster_voronoi_check(t, 3, 1, 50.0, 100.0, 125.0, 200.0, &mut r), KloosterStatus::Ok);
        assert!(r.relative_residual < 1e-6 && r.dual_terms > 0);
        let v = [30.0, 50.0, 80.0, 120.0];
        let w = [5.0, 12.0, 25.0, 40.0];
        assert_eq!(klooster_congruence_sum_check(t, 1, 1, v.as_ptr(), w.as_ptr(), &mut r), KloosterStatus::Ok);
        assert!(r.relative_residual < 1e-6);
        assert_eq!(
            klooster_congruence_sum_check(t, 1, 1, ptr::null(), w.as_ptr(), &mut r),
            KloosterStatus::NullPointer
        );
        let mut e = 1.0;
        assert_eq!(klooster_error_term(t, 1000, 1, 1, &mut e), KloosterStatus::Ok);
        assert_eq!(e, 0.0);
        klooster_tau_table_free(t);
    }
}

#[test]
fn errors_are_per_call() {
    let mut v = KloosterComplex::default();
    unsafe {
        klooster_kloosterman(1, 1, 0, &mut v);
        assert!(!last_error().is_empty());
        klooster_kloosterman(1, 1, 7, &mut v);
    }
    assert_eq!(unsafe { klooster_last_error_message(ptr::null_mut(), 0) }, 0);
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else { return };
    if !cc.status.success() {
        return;
    }
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.parent().unwrap().join("libklooster_ffi.a");
    if !lib.exists() {
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "klooster.h"
int main(void) {
    KloosterTauTable *t = NULL;
    int64_t tau = 0;
    KloosterComplex v;
    char msg[128];
    if (klooster_tau_table_new(100, &t) != KLOOSTER_STATUS_OK) return 1;
    if (klooster_tau(t, 3, &tau) != KLOOSTER_STATUS_OK || tau != 252) return 2;
    if (klooster_hyper_kloosterman(3, 1, 2, KLOOSTER_METHOD_CRT, &v) != KLOOSTER_STATUS_OK) return 3;
    if (klooster_tau(t, 0, &tau) != KLOOSTER_STATUS_OUT_OF_RANGE) return 4;
    if (klooster_last_error_message(msg, sizeof msg) == 0) return 5;
    klooster_tau_table_free(t);
    printf("%.6f\n", v.re);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "-0.500000");
}
