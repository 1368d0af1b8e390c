use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use klooster::apdist::{congruence_dual_check, error_scan, exponent_optimizer_with, BoundSystem};
use klooster::bilinear::bilinear_scan;
use klooster::expsums::{hyper_kloosterman, hyper_kloosterman_crt_u64, ExpSumValue};
use klooster::heckecoeffs::CuspFormTable;
use klooster::modarith::smooth_squarefree_moduli;
use klooster::report::{Cell, Format, Table};
use klooster::transforms::{bump_window, voronoi_check, SmoothWindow};
use klooster::verify::{congruence_windows, results_table, run_suite, scan_table, voronoi_window, VerifyCaps};
use klooster::Error;

/// Exponential sums, Ramanujan's tau and equidistribution checks for smooth squarefree moduli.
///
/// Output is CSV (default) or JSON with floats at 12 significant digits.
/// The tau table is cached in $KLOOSTER_CACHE_DIR when that variable is set.
/// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.
#[derive(Parser, Debug)]
#[command(name = "klooster", version)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunConfig {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Seed for every randomized construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Direct,
    Crt,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kl_2(n; q) = q^{-1/2} Σ_{x y ≡ n (q)} e((x + y)/q), the normalized Kloosterman sum.
    Kl2(KlArgs),
    /// Kl_3(n; q) = q^{-1} Σ_{x y z ≡ n (q)} e((x + y + z)/q); the CRT route multiplies
    /// Kl_3(n \overline{(q/p)}^3; p) over the primes p | q.
    Kl3(KlArgs),
    /// τ(n) from Δ(z) = q Π_{n≥1} (1 - q^n)^24 and λ(n) = τ(n) n^{-11/2}.
    Tau(TauArgs),
    /// Run the invariant suite: Weil and Deligne bounds, CRT factorization of Kl_k, the
    /// S3 = d·Kl3 bridge, correlation sums, Hecke relations, Poisson, Voronoi and the
    /// dual expansion of the congruence sum, error terms, and the bilinear scan.
    Verify(VerifyArgs),
    /// max over (a, q) = 1 of E(X; q, a) = Σ_{n≤X, n≡a (q)} (λ*1)(n) − φ(q)^{-1} Σ_{n≤X, (n,q)=1} (λ*1)(n),
    /// over squarefree y-smooth q ≤ qmax; columns X,q,a_max,E,normalized with normalized = |E| q / X.
    ErrorScan(ErrorScanArgs),
    /// |Σ_{M≤m≤2M} Σ_{L≤l≤2L} α_m β_l Kl_3(ml; q)| for seeded |α|, |β| ≤ 1 against the trivial bound
    /// and q^ε M L (M^{-1/2} s^{1/2} + q^{-1/4} s^{1/4} + L^{-1/2} q^{1/4} s^{-1/4}), s | q nearest q^{1/3}.
    BilinearScan(BilinearArgs),
    /// Largest δ on a grid with max over μ',ν' ≥ 0, μ'+ν' ≤ 1+δ+η of
    /// min_i (μ'+ν' + max_j ℓ_ij(μ',ν')) ≤ 1 − κ, and θ = 1/(2 − δ).
    ///
    /// Templates: max(1/6 − μ'/2, −1/6, 1/6 − ν'/2), max(1/4 − μ'/2, −1/4, −ν'/2),
    /// max(−1/4, 3/8 − μ'/2, 3/4 − μ'), and with completion also max(1/2 − ν', −1/2).
    ExponentOpt(ExponentArgs),
    /// Σ λ(n) e(an/q) V(n) against q^{-1} Σ λ(n) e(−ā n/q) Ṽ(n/q²),
    /// Ṽ(x) = 2π i^k ∫ V(t) J_{k−1}(4π √(xt)) dt.
    VoronoiCheck(VoronoiArgs),
    /// Σ_{ml≡a (q)} λ(m)V(m)W(l) against
    /// q^{-2} Σ_{d|q} d^{-1} Σ_{n≥1} Σ_{h∈Z} λ(n) Ṽ(n/d²) Ŵ(h/q) S3(n, h \overline{q/d}, a; d) c_{q/d}(h),
    /// where S3(m,l,a;d) = Σ_{u,v unit} e((au + lv + m ū v̄)/d) and c is Ramanujan's sum.
    #[command(name = "prop2-check")]
    DualCheck(DualCheckArgs),
}

#[derive(Args, Debug)]
struct KlArgs {
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// Modulus; must be squarefree for the CRT route.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    #[arg(long, value_enum, default_value_t = Method::Direct)]
    method: Method,
}

#[derive(Args, Debug)]
struct TauArgs {
    /// First index.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Last index (defaults to n).
    #[arg(long)]
    to: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Small caps for every check.
    #[arg(long)]
    quick: bool,
    /// Largest prime in the Weil, Deligne and correlation scans.
    #[arg(long)]
    pmax: Option<u64>,
    /// Largest modulus in the CRT comparison.
    #[arg(long)]
    qmax: Option<u64>,
    /// Largest modulus in the S3 bridge.
    #[arg(long)]
    dmax: Option<u64>,
    /// Range of the Hecke checks.
    #[arg(long)]
    nmax: Option<u64>,
    /// Skip the Poisson, Voronoi and dual-expansion residuals.
    #[arg(long)]
    no_identities: bool,
}

#[derive(Args, Debug)]
struct ErrorScanArgs {
    #[arg(long = "X", value_parser = clap::value_parser!(u64).range(1..))]
    x: u64,
    /// Smoothness bound y: every prime factor of q is at most y.
    #[arg(long, default_value_t = 7)]
    smooth: u64,
    #[arg(long, default_value_t = 40)]
    qmax: u64,
}

#[derive(Args, Debug)]
struct BilinearArgs {
    /// Squarefree moduli.
    #[arg(long, value_delimiter = ',', default_values_t = [105u64, 210])]
    q: Vec<u64>,
    #[arg(long = "m", value_delimiter = ',', default_values_t = [8u64, 16, 32])]
    m_grid: Vec<u64>,
    #[arg(long = "l", value_delimiter = ',', default_values_t = [8u64, 16, 32])]
    l_grid: Vec<u64>,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
}

#[derive(Args, Debug)]
struct ExponentArgs {
    #[arg(long, default_value_t = 1e-4)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    kappa: f64,
    /// Grid step in δ (at most 1e-3).
    #[arg(long, default_value_t = 1e-4)]
    res: f64,
    #[arg(long, value_enum, default_value_t = BoundSystem::WithCompletion)]
    bounds: BoundSystem,
    /// Emit the whole curve δ ↦ σ_max(δ) instead of the optimum.
    #[arg(long)]
    curve: bool,
}

#[derive(Args, Debug)]
struct VoronoiArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    /// Window c1,lo,hi,c2: 0 off [c1,c2], 1 on [lo,hi].
    #[arg(long, value_delimiter = ',', num_args = 4)]
    window: Option<Vec<f64>>,
    /// Size of the τ table.
    #[arg(long, default_value_t = 100_000)]
    nmax: u64,
}

#[derive(Args, Debug)]
struct DualCheckArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    q: u64,
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    /// Window V as c1,lo,hi,c2.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    v: Option<Vec<f64>>,
    /// Window W as c1,lo,hi,c2.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    w: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    nmax: u64,
}

enum Failure {
    Verification(String),
    Usage(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::CorruptCache(_) => Failure::Io(e.to_string()),
            Error::Overflow(_) => Failure::Verification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn window(corners: &Option<Vec<f64>>, default: SmoothWindow) -> Result<SmoothWindow, Failure> {
    match corners.as_deref() {
        None => Ok(default),
        Some(&[c1, lo, hi, c2]) => Ok(bump_window(c1, lo, hi, c2)?),
        Some(_) => Err(Failure::Usage("a window needs four numbers c1,lo,hi,c2".into())),
    }
}

fn load_table(n_max: u64) -> Result<CuspFormTable, Failure> {
    Ok(CuspFormTable::load_or_compute(n_max)?)
}

fn kl_rows(k: u32, args: &KlArgs) -> Result<Table, Failure> {
    let mut t = Table::new(&["k", "n", "q", "method", "re", "im", "abs"]);
    let mut push = |method: &str, v: ExpSumValue| {
        t.push(vec![
            k.into(),
            args.n.into(),
            args.q.into(),
            method.into(),
            v.value.re.into(),
            v.value.im.into(),
            v.norm().into(),
        ]);
    };
    if matches!(args.method, Method::Direct | Method::Both) {
        push("direct", hyper_kloosterman(k, args.n, args.q)?);
    }
    if matches!(args.method, Method::Crt | Method::Both) {
        push("crt", hyper_kloosterman_crt_u64(k, args.n, args.q)?);
    }
    Ok(t)
}

/// Rendered output plus whether a verification failed.
fn execute(cmd: &Command, run: &RunConfig) -> Result<(String, bool), Failure> {
    let render = |t: &Table| t.render(run.format).map_err(Failure::from);
    match cmd {
        Command::Kl2(args) => Ok((render(&kl_rows(2, args)?)?, false)),
        Command::Kl3(args) => Ok((render(&kl_rows(3, args)?)?, false)),
        Command::Tau(args) => {
            let to = args.to.unwrap_or(args.n);
            if to < args.n {
                return Err(Failure::Usage(format!("--to {to} is below --n {}", args.n)));
            }
            let table = load_table(to)?;
            let mut t = Table::new(&["n", "tau", "lambda"]);
            for n in args.n..=to {
                let tau = table.tau(n)?;
                let cell = if i64::try_from(tau).is_ok() { Cell::Int(tau) } else { Cell::Text(tau.to_string()) };
                t.push(vec![n.into(), cell, table.lambda(n)?.into()]);
            }
            Ok((render(&t)?, false))
        }
        Command::Verify(args) => {
            let mut caps = if args.quick { VerifyCaps::quick() } else { VerifyCaps::default() };
            caps.seed = run.seed;
            if let Some(p) = args.pmax {
                caps.pmax = p;
            }
            if let Some(q) = args.qmax {
                caps.qmax = q;
            }
            if let Some(d) = args.dmax {
                caps.dmax = d;
            }
            if let Some(n) = args.nmax {
                caps.nmax = n;
            }
            if args.no_identities {
                caps.identities = false;
            }
            let table = load_table(caps.table_size())?;
            let results = run_suite(&caps, &table);
            let failed = results.iter().any(|r| !r.passed);
            let t = results_table(&results);
            let text = if run.output.is_none() && run.format == Format::Csv { t.to_text() } else { render(&t)? };
            Ok((text, failed))
        }
        Command::ErrorScan(args) => {
            let qs: Vec<u64> = smooth_squarefree_moduli(args.qmax, args.smooth)
                .iter()
                .map(|m| m.value())
                .filter(|&q| q <= args.x)
                .collect();
            let table = load_table(args.x)?;
            let recs = error_scan(&table, args.x, &qs)?;
            let mut t = Table::new(&["X", "q", "a_max", "E", "normalized"]);
            for r in recs {
                t.push(vec![r.x.into(), r.q.into(), r.a.into(), r.e.into(), r.normalized.into()]);
            }
            Ok((render(&t)?, false))
        }
        Command::BilinearScan(args) => {
            let cells = bilinear_scan(&args.q, &args.m_grid, &args.l_grid, run.seed, args.eps)?;
            Ok((render(&scan_table(&cells))?, false))
        }
        Command::ExponentOpt(args) => {
            let opt = exponent_optimizer_with(args.eta, args.kappa, args.res, args.bounds)?;
            if args.curve {
                let mut t = Table::new(&["delta", "sigma_max"]);
                for &(d, s) in &opt.curve {
                    t.push(vec![d.into(), s.into()]);
                }
                return Ok((render(&t)?, false));
            }
            let mut t = Table::new(&[
                "delta_star",
                "theta",
                "mu_prime",
                "nu_prime",
                "sigma",
                "eta",
                "kappa",
                "resolution",
                "bounds",
                "feasible",
            ]);
            let w = opt.witness;
            let bounds = args.bounds.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            t.push(vec![
                opt.delta_star.into(),
                opt.theta.into(),
                w.map(|w| w.mu_prime).into(),
                w.map(|w| w.nu_prime).into(),
                w.map(|w| w.sigma).into(),
                args.eta.into(),
                args.kappa.into(),
                args.res.into(),
                bounds.into(),
                opt.delta_star.is_some().into(),
            ]);
            Ok((render(&t)?, false))
        }
        Command::VoronoiCheck(args) => {
            let v = window(&args.window, voronoi_window())?;
            let table = load_table(args.nmax)?;
            let r = voronoi_check(args.q, args.a, &v, &table)?;
            let mut t = Table::new(&[
                "q",
                "a",
                "lhs_re",
                "lhs_im",
                "rhs_re",
                "rhs_im",
                "residual",
                "relative_residual",
                "dual_terms",
                "passed",
            ]);
            let passed = r.relative_residual < 1e-6;
            t.push(vec![
                r.q.into(),
                r.a.into(),
                r.lhs.re.into(),
                r.lhs.im.into(),
                r.rhs.re.into(),
                r.rhs.im.into(),
                r.residual.into(),
                r.relative_residual.into(),
                r.dual_terms.into(),
                passed.into(),
            ]);
            Ok((render(&t)?, !passed))
        }
        Command::DualCheck(args) => {
            let (dv, dw) = congruence_windows(args.q);
            let v = window(&args.v, dv)?;
            let w = window(&args.w, dw)?;
            let table = load_table(args.nmax)?;
            let r = congruence_dual_check(&table, &v, &w, args.q, args.a)?;
            let passed = r.relative_residual < 1e-6;
            let mut t = Table::new(&[
                "q",
                "a",
                "lhs",
                "main_term",
                "smoothed_error",
                "rhs",
                "residual",
                "relative_residual",
                "displayed_residual",
                "dual_terms_v",
                "dual_terms_w",
                "passed",
            ]);
            t.push(vec![
                r.q.into(),
                r.a.into(),
                r.lhs.into(),
                r.main_term.into(),
                r.smoothed_error.into(),
                r.rhs.into(),
                r.residual.into(),
                r.relative_residual.into(),
                r.displayed_residual.into(),
                r.dual_terms_v.into(),
                r.dual_terms_w.into(),
                passed.into(),
            ]);
            Ok((render(&t)?, !passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = execute(&cli.command, &cli.run).and_then(|(text, failed)| {
        match &cli.run.output {
            Some(path) => fs::write(path, &text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
            None => {
                let mut out = io::stdout().lock();
                out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Io(e.to_string()))?
            }
        }
        Ok(failed)
    });
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("klooster: verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("klooster: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("klooster: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("klooster: {m}");
            ExitCode::from(3)
        }
    }
}
