use std::fs;
use std::process::{Command, Output};

fn klooster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_klooster")).args(args).env_remove("KLOOSTER_CACHE_DIR").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn kl3_at_two() {
    let o = klooster(&["kl3", "--n", "1", "--q", "2"]);
    assert!(o.status.success());
    let s = stdout(&o);
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[4], "-0.5");
}

#[test]
fn kl3_methods_agree() {
    let o = klooster(&["kl3", "--n", "1", "--q", "15", "--method", "both", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let re = |i: usize| rows[i]["re"].as_f64().unwrap();
    let im = |i: usize| rows[i]["im"].as_f64().unwrap();
    assert!((re(0) - re(1)).abs() < 1e-9 && (im(0) - im(1)).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(klooster(&["kl2", "--n", "0", "--q", "0"]).status.code(), Some(2));
    assert_eq!(klooster(&["kl3", "--n", "1", "--q", "12", "--method", "crt"]).status.code(), Some(2));
    assert_eq!(klooster(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn minimal_verify() {
    let o = klooster(&["verify", "--quick", "--pmax", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("pass"));
}

#[test]
fn corrupt_cache_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tau.bin"), b"definitely not a table").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_klooster"))
        .args(["tau", "--n", "5"])
        .env("KLOOSTER_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cache"));
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_klooster"))
            .args(["tau", "--n", "1", "--to", "30"])
            .env("KLOOSTER_CACHE_DIR", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(dir.path().join("tau.bin").exists());
    let second = run();
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn bilinear_scan_is_deterministic() {
    let args = ["bilinear-scan", "--seed", "1", "--q", "210"];
    let a = klooster(&args);
    let b = klooster(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(klooster(&["bilinear-scan", "--seed", "2", "--q", "210"]).stdout, a.stdout);
}

#[test]
fn error_scan_rows() {
    let args = ["error-scan", "--X", "10000", "--smooth", "7", "--qmax", "40"];
    let a = klooster(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, klooster(&args).stdout);
    let s = stdout(&a);
    assert_eq!(s.lines().next().unwrap(), "X,q,a_max,E,normalized");
    let qs: Vec<u64> = s.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(qs.windows(2).all(|w| w[0] < w[1]));
    assert!(qs.contains(&35) && !qs.contains(&11) && !qs.contains(&4));
}

#[test]
fn exponent_opt_json_matches_csv() {
    let base = ["exponent-opt", "--eta", "1e-4", "--kappa", "1e-4", "--res", "1e-4"];
    let csv = stdout(&klooster(&base));
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_slice(&klooster(&json_args).stdout).unwrap();
    let row = &json[0];
    let headers: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let keys: Vec<&str> = row.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(headers, keys);
    let theta = row["theta"].as_f64().unwrap();
    assert!((theta - 18.0 / 35.0).abs() < 2e-3);
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let o = klooster(&["kl2", "--n", "1", "--q", "7", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(fs::read_to_string(&path).unwrap().starts_with("k,n,q,method"));
    let bad = klooster(&["kl2", "--n", "1", "--q", "7", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(bad.status.code(), Some(3));
}
