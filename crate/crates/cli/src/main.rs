//! Command-line front end: radial profile tables, rationality reports,
//! Monge–Ampère verification, curvature audits, and a self-test battery.
//!
//! Exit codes: 0 success, 1 usage error, 2 solver failure, 3 threshold or
//! verification failure, 4 I/O failure.

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Serialize;

use cym_core::bundle::{
    self, chern_curvature, default_fd, induced_base_metric, ricci_eigenvalues, split_residual,
    ChartBundleMetric,
};
use cym_core::error::CymError;
use cym_core::fd::FdConfig;
use cym_core::ma::{default_ma_fd, run_ma_verification_with, BaseData};
use cym_core::model::{ModelGeometry, RadialProfile};
use cym_core::phi::PhiProfile;
use cym_core::profile::{closed_form_z, solve_profile};
use cym_core::EigenSpec;

use config::{resolve, resolve_opt, FileConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "cym", version, about = "Radial profiles and Monge-Ampère verification for ball bundles")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export the solved radial profile as a CSV (or JSON) table.
    Profile(ProfileArgs),
    /// Rationality report for a constant-eigenvalue spec.
    Rationality(RationalityArgs),
    /// Verify the Monge-Ampère equation on a model ball bundle.
    VerifyMa(VerifyMaArgs),
    /// Curvature audit of a built-in or JSON-specified bundle metric.
    BundleCheck(BundleCheckArgs),
    /// Run the built-in spot-check battery.
    Selftest,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Single common eigenvalue (conflicts with --eigs).
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Comma-separated eigenvalue list (conflicts with --lambda).
    #[arg(long, allow_hyphen_values = true)]
    eigs: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Residual gate for the exit code.
    #[arg(long)]
    tolerance: Option<f64>,
    /// csv (default) or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RationalityArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyMaArgs {
    /// egg or product.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Product factors as "n:p,n:p".
    #[arg(long)]
    factors: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// auto (closed form for p=1 eggs) or ode (force the solved profile).
    #[arg(long)]
    profile_source: Option<String>,
    /// analytic (closed-form G) or fd (G measured by nested differencing).
    #[arg(long)]
    base_data: Option<String>,
    /// Residual gate; defaults to 1e-8 for closed-form profiles, 1e-5 for
    /// ODE profiles, 1e-3 with measured base data.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BundleCheckArgs {
    /// disk | sum-disk | flat | fs-positive | gauss | potential.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Disk power for --model disk.
    #[arg(long)]
    power: Option<f64>,
    /// Comma-separated powers for --model sum-disk.
    #[arg(long)]
    powers: Option<String>,
    /// Potential JSON file for --model potential.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

/// A failure mapped to its process exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
    fn solver(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
    fn threshold(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
    fn io(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<CymError> for Failure {
    fn from(e: CymError) -> Self {
        match &e {
            CymError::InvalidSpec(_) | CymError::Precondition(_) => Failure::usage(e.to_string()),
            CymError::GeometryViolation(_) => Failure::threshold(e.to_string()),
            _ => Failure::solver(e.to_string()),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, everything else is usage
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let result = match cli.cmd {
        Command::Profile(args) => cmd_profile(args),
        Command::Rationality(args) => cmd_rationality(args),
        Command::VerifyMa(args) => cmd_verify_ma(args),
        Command::BundleCheck(args) => cmd_bundle_check(args),
        Command::Selftest => cmd_selftest(),
    };
    match result {
        Ok(()) => {}
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.code);
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Failure> {
    match path {
        None => Ok(FileConfig::empty()),
        Some(p) => FileConfig::load(p).map_err(Failure::io),
    }
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("cannot parse {what} entry {s:?}")))
        })
        .collect()
}

/// Build the eigenvalue spec from --lambda / --eigs (mutually exclusive).
fn build_spec(
    n: usize,
    k: usize,
    lambda: Option<f64>,
    eigs: Option<String>,
) -> Result<EigenSpec, Failure> {
    let eigenvalues = match (lambda, eigs) {
        (Some(_), Some(_)) => {
            return Err(Failure::usage("--lambda and --eigs are mutually exclusive"));
        }
        (Some(l), None) => vec![l; n],
        (None, Some(list)) => parse_f64_list(&list, "--eigs")?,
        (None, None) => {
            return Err(Failure::usage("one of --lambda or --eigs is required"));
        }
    };
    EigenSpec::new(n, k, eigenvalues).map_err(Failure::from)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
    }
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    version: &'static str,
    command: &'static str,
    config: BTreeMap<String, String>,
    #[serde(flatten)]
    payload: T,
}

fn to_json<T: Serialize>(
    command: &'static str,
    cfg_echo: BTreeMap<String, String>,
    payload: T,
) -> String {
    let env = Envelope {
        version: VERSION,
        command,
        config: cfg_echo,
        payload,
    };
    let mut s = serde_json::to_string_pretty(&env).expect("report serialization");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// profile
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ProfileRow {
    r: f64,
    z: f64,
    w: f64,
    phi: f64,
    phi_prime: f64,
    y: f64,
    ode_residual: f64,
    phi_ode_residual: f64,
}

#[derive(Serialize)]
struct ProfileTable {
    n: usize,
    k: usize,
    eigenvalues: Vec<f64>,
    tolerance: f64,
    passed: bool,
    rows: Vec<ProfileRow>,
}

fn cmd_profile(args: ProfileArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let n = resolve(args.n, &cfg, "n", 0).map_err(Failure::usage)?;
    let k = resolve(args.k, &cfg, "k", 0).map_err(Failure::usage)?;
    let lambda = resolve_opt(args.lambda, &cfg, "lambda").map_err(Failure::usage)?;
    let eigs = match args.eigs {
        Some(e) => Some(e),
        None => cfg.get_raw("eigs").map(|s| s.to_string()),
    };
    let rel_tol = resolve(args.rel_tol, &cfg, "rel_tol", 1e-10).map_err(Failure::usage)?;
    let abs_tol = resolve(args.abs_tol, &cfg, "abs_tol", 1e-12).map_err(Failure::usage)?;
    let tolerance = resolve(args.tolerance, &cfg, "tolerance", 1e-8).map_err(Failure::usage)?;
    let format = resolve(args.format, &cfg, "format", "csv".to_string()).map_err(Failure::usage)?;

    let spec = build_spec(n, k, lambda, eigs)?;
    // precondition violations (λ ≥ 1) are usage errors; integration
    // breakdowns surface as solver failures with exit code 2
    let sol = solve_profile(&spec, rel_tol, abs_tol).map_err(Failure::from)?;
    let phi = PhiProfile::new(sol).map_err(Failure::from)?;
    let sol = phi.solution();

    let mut rows = Vec::with_capacity(1001);
    let mut passed = true;
    for i in 0..=1000 {
        let r = i as f64 / 1000.0;
        let z = sol.z(r).map_err(Failure::from)?;
        let w = sol.w(r).map_err(Failure::from)?;
        let phi_v = phi.phi(r).map_err(Failure::from)?;
        let phi_p = phi.phi_prime(r).map_err(Failure::from)?;
        let y = match phi.y(r) {
            Ok(v) => v,
            Err(CymError::Overflow(_)) => f64::INFINITY,
            Err(e) => return Err(e.into()),
        };
        let ode_res = sol.ode_residual(r).map_err(Failure::from)?;
        let phi_res = phi.phi_ode_residual(r).map_err(Failure::from)?;
        if ode_res.abs() > tolerance || phi_res.abs() > tolerance * phi_v.max(1.0) {
            passed = false;
        }
        rows.push(ProfileRow {
            r,
            z,
            w,
            phi: phi_v,
            phi_prime: phi_p,
            y,
            ode_residual: ode_res,
            phi_ode_residual: phi_res,
        });
    }

    let content = if format == "json" {
        let mut echo = BTreeMap::new();
        echo.insert("n".into(), n.to_string());
        echo.insert("k".into(), k.to_string());
        echo.insert("eigenvalues".into(), format!("{:?}", spec.eigenvalues()));
        echo.insert("rel_tol".into(), rel_tol.to_string());
        echo.insert("abs_tol".into(), abs_tol.to_string());
        echo.insert("tolerance".into(), tolerance.to_string());
        to_json(
            "profile",
            echo,
            ProfileTable {
                n,
                k,
                eigenvalues: spec.eigenvalues().to_vec(),
                tolerance,
                passed,
                rows,
            },
        )
    } else if format == "csv" {
        let mut s = String::from("r,Z,W,phi,phi_prime,Y,ode_residual,phi_ode_residual\n");
        for row in &rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                row.r,
                row.z,
                row.w,
                row.phi,
                row.phi_prime,
                row.y,
                row.ode_residual,
                row.phi_ode_residual
            ));
        }
        s
    } else {
        return Err(Failure::usage(format!("unknown format {format:?}")));
    };

    emit(&args.out, &content)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::threshold(format!(
            "profile residuals exceed tolerance {tolerance:.1e}"
        )))
    }
}

// ---------------------------------------------------------------------------
// rationality
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RationalityReport {
    n: usize,
    k: usize,
    lambda: f64,
    c: f64,
    beta_residual: f64,
    is_rational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_sup_gap: Option<f64>,
}

fn cmd_rationality(args: RationalityArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let n = resolve(args.n, &cfg, "n", 0).map_err(Failure::usage)?;
    let k = resolve(args.k, &cfg, "k", 0).map_err(Failure::usage)?;
    let lambda = resolve_opt(args.lambda, &cfg, "lambda")
        .map_err(Failure::usage)?
        .ok_or_else(|| Failure::usage("--lambda is required"))?;
    let rel_tol = resolve(args.rel_tol, &cfg, "rel_tol", 1e-10).map_err(Failure::usage)?;
    let abs_tol = resolve(args.abs_tol, &cfg, "abs_tol", 1e-12).map_err(Failure::usage)?;

    let spec = EigenSpec::constant(n, k, lambda).map_err(Failure::from)?;
    let (c, _) = spec.rational_case_c().map_err(Failure::from)?;
    let beta_residual = spec.beta_identity_residual().map_err(Failure::from)?;
    let is_rational = spec.is_rational_case().map_err(Failure::from)?;

    let closed_form_sup_gap = if is_rational {
        let sol = solve_profile(&spec, rel_tol, abs_tol).map_err(Failure::from)?;
        let phi = PhiProfile::new(sol).map_err(Failure::from)?;
        let mut sup = 0.0f64;
        for i in 0..=1000 {
            let r = i as f64 / 1000.0;
            let zgap = (phi.solution().z(r).map_err(Failure::from)?
                - closed_form_z(&spec, r).map_err(Failure::from)?)
            .abs();
            let pgap = (phi.phi(r).map_err(Failure::from)? - (1.0 - r * r)).abs();
            sup = sup.max(zgap.max(pgap));
        }
        Some(sup)
    } else {
        None
    };

    let mut echo = BTreeMap::new();
    echo.insert("n".into(), n.to_string());
    echo.insert("k".into(), k.to_string());
    echo.insert("lambda".into(), lambda.to_string());
    let content = to_json(
        "rationality",
        echo,
        RationalityReport {
            n,
            k,
            lambda,
            c,
            beta_residual,
            is_rational,
            closed_form_sup_gap,
        },
    );
    emit(&args.out, &content)
}

// ---------------------------------------------------------------------------
// verify-ma
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct VerifyMaPayload {
    threshold: f64,
    passed: bool,
    #[serde(flatten)]
    report: cym_core::ma::MaReport,
}

fn parse_factors(raw: &str) -> Result<Vec<(usize, f64)>, Failure> {
    raw.split(',')
        .map(|pair| {
            let (n, p) = pair
                .split_once(':')
                .ok_or_else(|| Failure::usage(format!("factor {pair:?} is not n:p")))?;
            let n = n
                .trim()
                .parse::<usize>()
                .map_err(|_| Failure::usage(format!("bad factor dimension {n:?}")))?;
            let p = p
                .trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("bad factor exponent {p:?}")))?;
            Ok((n, p))
        })
        .collect()
}

fn cmd_verify_ma(args: VerifyMaArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let model_kind =
        resolve(args.model, &cfg, "model", "egg".to_string()).map_err(Failure::usage)?;
    let points = resolve(args.points, &cfg, "points", 20).map_err(Failure::usage)?;
    let seed = resolve(args.seed, &cfg, "seed", 20240817).map_err(Failure::usage)?;
    let defaults = default_ma_fd();
    let step = resolve(args.step, &cfg, "step", defaults.step).map_err(Failure::usage)?;
    let levels = resolve(args.levels, &cfg, "levels", defaults.levels).map_err(Failure::usage)?;
    let threads = resolve(args.threads, &cfg, "threads", 1).map_err(Failure::usage)?;
    let profile_source = resolve(
        args.profile_source,
        &cfg,
        "profile_source",
        "auto".to_string(),
    )
    .map_err(Failure::usage)?;

    let model = match model_kind.as_str() {
        "egg" => {
            let n = resolve(args.n, &cfg, "n", 0).map_err(Failure::usage)?;
            let k = resolve(args.k, &cfg, "k", 0).map_err(Failure::usage)?;
            let p = resolve(args.p, &cfg, "p", 1.0).map_err(Failure::usage)?;
            ModelGeometry::egg(n, k, p).map_err(Failure::from)?
        }
        "product" => {
            let k = resolve(args.k, &cfg, "k", 0).map_err(Failure::usage)?;
            let raw = match args.factors {
                Some(f) => f,
                None => cfg
                    .get_raw("factors")
                    .map(|s| s.to_string())
                    .ok_or_else(|| Failure::usage("--factors is required for product"))?,
            };
            ModelGeometry::product_ball(parse_factors(&raw)?, k).map_err(Failure::from)?
        }
        other => return Err(Failure::usage(format!("unknown model {other:?}"))),
    };

    let profile = match profile_source.as_str() {
        "auto" => RadialProfile::for_model(&model, 1e-10, 1e-12).map_err(Failure::from)?,
        "ode" => RadialProfile::solved_for(&model, 1e-10, 1e-12).map_err(Failure::from)?,
        other => return Err(Failure::usage(format!("unknown profile source {other:?}"))),
    };
    let base_data = resolve(args.base_data, &cfg, "base_data", "analytic".to_string())
        .map_err(Failure::usage)?;
    let base = match base_data.as_str() {
        "analytic" => BaseData::Analytic,
        "fd" => BaseData::Measured(FdConfig::new(1e-2, 2)),
        other => return Err(Failure::usage(format!("unknown base data mode {other:?}"))),
    };
    let closed_form = matches!(profile, RadialProfile::ClosedFormP1 { .. });
    let (default_threshold, identity_gate) = match base {
        BaseData::Measured(_) => (1e-3, 1e-3),
        BaseData::Analytic if closed_form => (1e-8, 1e-6),
        BaseData::Analytic => (1e-5, 1e-6),
    };
    let threshold =
        resolve(args.threshold, &cfg, "threshold", default_threshold).map_err(Failure::usage)?;

    let fd = FdConfig::new(step, levels);
    let report = run_ma_verification_with(&model, &profile, points, seed, &fd, threads, base)
        .map_err(Failure::from)?;
    let passed = report.max_residual <= threshold
        && report.max_identity_gap <= identity_gate
        && report.points.iter().all(|p| p.min_eig > 0.0);

    let mut echo = BTreeMap::new();
    echo.insert("model".into(), model.name());
    echo.insert("points".into(), points.to_string());
    echo.insert("seed".into(), seed.to_string());
    echo.insert("step".into(), step.to_string());
    echo.insert("levels".into(), levels.to_string());
    echo.insert("threads".into(), threads.to_string());
    echo.insert("profile_source".into(), profile_source.clone());
    echo.insert("base_data".into(), base_data.clone());
    echo.insert("threshold".into(), threshold.to_string());
    let content = to_json(
        "verify-ma",
        echo,
        VerifyMaPayload {
            threshold,
            passed,
            report,
        },
    );
    emit(&args.out, &content)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::threshold(format!(
            "Monge-Ampère verification exceeded threshold {threshold:.1e}"
        )))
    }
}

// ---------------------------------------------------------------------------
// bundle-check
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GriffithsJson {
    min_value: f64,
    max_value: f64,
    negative_evidence: bool,
    samples: usize,
}

#[derive(Serialize)]
struct RicciJson {
    eigenvalues: Vec<Vec<f64>>,
    spread: f64,
    tolerance: f64,
    constant: bool,
}

#[derive(Serialize)]
struct BundleReport {
    model: String,
    n: usize,
    k: usize,
    seed: u64,
    step: f64,
    levels: usize,
    trials: usize,
    hermitian_symmetry_gap: f64,
    split_residual: f64,
    griffiths: GriffithsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    induced_metric_diag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    induced_metric_det: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    induced_metric_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    det_bundle_gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ricci: Option<RicciJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ricci_error: Option<String>,
    consistency_passed: bool,
}

fn cmd_bundle_check(args: BundleCheckArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let model_kind =
        resolve(args.model, &cfg, "model", "disk".to_string()).map_err(Failure::usage)?;
    let n = resolve(args.n, &cfg, "n", 1).map_err(Failure::usage)?;
    let trials = resolve(args.trials, &cfg, "trials", 25).map_err(Failure::usage)?;
    let seed = resolve(args.seed, &cfg, "seed", 20240817).map_err(Failure::usage)?;
    let step = resolve(args.step, &cfg, "step", default_fd().step).map_err(Failure::usage)?;
    let levels =
        resolve(args.levels, &cfg, "levels", default_fd().levels).map_err(Failure::usage)?;

    let metric: ChartBundleMetric = match model_kind.as_str() {
        "disk" => {
            let q = resolve(args.power, &cfg, "power", 1.0).map_err(Failure::usage)?;
            bundle::disk_power(n, q)
        }
        "sum-disk" => {
            let raw = match args.powers {
                Some(p) => p,
                None => cfg
                    .get_raw("powers")
                    .map(|s| s.to_string())
                    .ok_or_else(|| Failure::usage("--powers is required for sum-disk"))?,
            };
            let powers = parse_f64_list(&raw, "--powers")?;
            bundle::disk_power_sum(n, &powers).map_err(Failure::from)?
        }
        "flat" => bundle::flat(n),
        "fs-positive" => bundle::fubini_study_positive(n),
        "gauss" => bundle::gaussian(n),
        "potential" => {
            let path = args
                .json
                .or_else(|| cfg.get_raw("json").map(PathBuf::from))
                .ok_or_else(|| Failure::usage("--json is required for potential"))?;
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
            bundle::metric_from_potential_json(&text).map_err(Failure::from)?
        }
        other => return Err(Failure::usage(format!("unknown model {other:?}"))),
    };

    let fd = FdConfig::new(step, levels);
    let origin = vec![C64::new(0.0, 0.0); metric.n()];
    let theta = chern_curvature(&metric, &origin, &fd).map_err(Failure::from)?;
    let hermitian_symmetry_gap = theta.hermitian_symmetry_gap();
    let split = split_residual(&metric, &origin, &fd).map_err(Failure::from)?;
    let griffiths = bundle::griffiths_negativity_sample(&metric, &origin, &fd, trials, seed)
        .map_err(Failure::from)?;

    // induced metric and determinant-bundle consistency, where defined
    let (induced_metric_diag, induced_metric_det, induced_metric_error, det_bundle_gap) =
        match induced_base_metric(&metric, &origin, &fd) {
            Ok((g, det)) => {
                let ricci =
                    bundle::bundle_ricci(&theta, &metric.h_at(&origin)).map_err(Failure::from)?;
                let gap = (&ricci + &g).iter().map(|v| v.norm()).fold(0.0, f64::max);
                let diag = (0..g.nrows()).map(|i| g[(i, i)].re).collect();
                (Some(diag), Some(det), None, Some(gap))
            }
            Err(e) => (None, None, Some(e.to_string()), None),
        };

    // Ricci eigenvalue constancy over five fixed points
    let offsets = [(0.0, 0.0), (0.3, 0.0), (0.0, 0.3), (-0.25, 0.0), (0.15, -0.2)];
    let points: Vec<Vec<C64>> = offsets
        .iter()
        .map(|&(re, im)| {
            let mut z = vec![C64::new(0.0, 0.0); metric.n()];
            z[0] = C64::new(re, im);
            z
        })
        .collect();
    let (ricci, ricci_error) = match ricci_eigenvalues(&metric, &points, 1e-4) {
        Ok(rep) => (
            Some(RicciJson {
                eigenvalues: rep.eigenvalues,
                spread: rep.spread,
                tolerance: rep.tolerance,
                constant: rep.constant,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };

    let consistency_passed =
        hermitian_symmetry_gap <= 1e-8 && det_bundle_gap.is_none_or(|g| g <= 1e-6);

    let mut echo = BTreeMap::new();
    echo.insert("model".into(), metric.name().to_string());
    echo.insert("n".into(), n.to_string());
    echo.insert("trials".into(), trials.to_string());
    echo.insert("seed".into(), seed.to_string());
    echo.insert("step".into(), step.to_string());
    echo.insert("levels".into(), levels.to_string());
    let content = to_json(
        "bundle-check",
        echo,
        BundleReport {
            model: metric.name().to_string(),
            n: metric.n(),
            k: metric.k(),
            seed,
            step,
            levels,
            trials,
            hermitian_symmetry_gap,
            split_residual: split,
            griffiths: GriffithsJson {
                min_value: griffiths.min_value,
                max_value: griffiths.max_value,
                negative_evidence: griffiths.negative_evidence,
                samples: griffiths.samples,
            },
            induced_metric_diag,
            induced_metric_det,
            induced_metric_error,
            det_bundle_gap,
            ricci,
            ricci_error,
            consistency_passed,
        },
    );
    emit(&args.out, &content)?;
    if consistency_passed {
        Ok(())
    } else {
        Err(Failure::threshold(
            "finite-difference consistency checks failed".to_string(),
        ))
    }
}

// ---------------------------------------------------------------------------
// selftest
// ---------------------------------------------------------------------------

fn cmd_selftest() -> Result<(), Failure> {
    let results = cym_core::selftest::run_all();
    let mut failed = 0usize;
    for r in &results {
        let status = if r.passed { "ok  " } else { "FAIL" };
        println!("{status} {} — {}", r.name, r.detail);
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", results.len(), failed);
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::threshold(format!("{failed} selftest checks failed")))
    }
}
