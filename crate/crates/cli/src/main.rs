//! `drs`: command-line front end binding run configuration to the radial
//! laboratory and emitting plot-ready data files.
//!
//! Configuration is a single JSON document (`--config run.json`); flags
//! override fields, and `DRS_WORKERS` overrides the worker count. Exit
//! codes: 0 ok, 2 config error, 3 numerical failure, 4 inconclusive check.

mod config;
mod emit;

use clap::{Parser, Subcommand};
use config::{parse_space, ConfigError, RunConfig};
use drslab_core::experiments::{
    case1_times, case2_profile, case2_times, case1_profile, decay_and_weak_l2_check,
    h3_global_check, oscillatory_check, random_smooth_profile, ratio_sweep, BumpSpec, Family,
    Region, DILATION_FAMILY,
};
use drslab_core::schrodinger::{band_line, default_amp_scale, maximal_field, TimeGrid};
use drslab_core::space::SpaceParams;
use drslab_core::spherical::{Accuracy, PhiEvaluator};
use drslab_core::transforms::{
    full_calibration, RadialGrid, Smoothness, SpectralGrid, SpectralProfile, Transformer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "drs", about = "Radial analysis laboratory", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Space label: h3, rh:<n>, or dr:<m_v>,<m_z>.
    #[arg(long, global = true)]
    space: Option<String>,
    /// Output directory for data files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (DRS_WORKERS takes precedence).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// RNG seed for randomized runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate or tabulate the spherical function.
    Phi {
        #[arg(long)]
        lambda: f64,
        /// Single radius: print the value and exit.
        #[arg(long)]
        s: Option<f64>,
        /// Radius grid `lo:hi:count` to tabulate into phi.csv.
        #[arg(long)]
        radii: Option<String>,
        /// Add per-method columns (ODE plus both series evaluators).
        #[arg(long)]
        all_methods: bool,
        /// best | fast
        #[arg(long, default_value = "best")]
        accuracy: String,
    },
    /// Round-trip and isometry report for random band profiles.
    Transform {
        /// Number of random profiles.
        #[arg(long, default_value_t = 20)]
        profiles: usize,
    },
    /// Tabulate the propagated field at a fixed time.
    Propagate {
        /// Frequency band `a,b` for a bump profile (default 1,2).
        #[arg(long)]
        band: Option<String>,
        /// Family profile instead of a plain band: case1 | case2.
        #[arg(long)]
        family: Option<String>,
        /// Family frequency parameter.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        t: f64,
        /// Radius grid `lo:hi:count`.
        #[arg(long)]
        radii: Option<String>,
        /// best | fast
        #[arg(long, default_value = "fast")]
        accuracy: String,
    },
    /// Tabulate the maximal function over a time ladder.
    Maximal {
        #[arg(long)]
        band: Option<String>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        radii: Option<String>,
        /// Time ladder `lo:hi:count` or `lo:hi:count:log`.
        #[arg(long)]
        times: Option<String>,
        /// best | fast
        #[arg(long, default_value = "fast")]
        accuracy: String,
    },
    /// Measure a ratio-law exponent across a family.
    Sweep {
        /// case1 | case2 | dilated
        #[arg(long)]
        family: String,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        alpha: f64,
        /// Doubling ladder `a..b` or comma list.
        #[arg(long)]
        n_list: String,
    },
    /// Consistency checks.
    Check {
        #[command(subcommand)]
        which: CheckCmd,
    },
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Write the space's calibration record.
    Calibration,
    /// Oscillatory-kernel stability over random radius/time pairs.
    Oscillatory {
        #[arg(long, default_value_t = 2.1)]
        r0: f64,
        #[arg(long, default_value_t = 5.0)]
        r: f64,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 100.0)]
        lambda_max: f64,
    },
    /// Dilation-family contrast on H^3 (q = 2 vs q = 1.5).
    H3Global {
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
    },
    /// Pointwise decay and weak-L2 boundedness for band profiles.
    WeakL2 {
        #[arg(long, default_value_t = 0.6)]
        alpha: f64,
    },
}

/// Failures after argument parsing, mapped to exit codes.
#[derive(Debug)]
enum CliError {
    /// Exit 2.
    Config(ConfigError),
    /// Exit 3; diagnostics file already written when possible.
    Numerical(String),
    /// Exit 4.
    Inconclusive(String),
    /// Exit 3.
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Inconclusive(m) => write!(f, "inconclusive: {m}"),
            CliError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::Inconclusive(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &cli.space {
        cfg.space = parse_space(s)?;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    init_workers(&cfg);
    std::fs::create_dir_all(&cfg.out_dir)?;
    let params = cfg.space_params()?;
    let hash = cfg.hash();

    let result = dispatch(&cli.cmd, &cfg, &params, hash);
    if let Err(CliError::Numerical(msg)) = &result {
        // best-effort diagnostics file; the exit code already reports failure
        let _ = emit::write_json(
            &cfg.out_dir.join("diagnostics.json"),
            hash,
            &serde_json::json!({ "error": msg }),
        );
    }
    result
}

fn init_workers(cfg: &RunConfig) {
    let env = std::env::var("DRS_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let n = env.or(cfg.workers).unwrap_or(0);
    if n > 0 {
        // ignore failure: the pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn dispatch(cmd: &Cmd, cfg: &RunConfig, params: &SpaceParams, hash: u64) -> Result<(), CliError> {
    match cmd {
        Cmd::Phi {
            lambda,
            s,
            radii,
            all_methods,
            accuracy,
        } => cmd_phi(cfg, params, hash, *lambda, *s, radii.as_deref(), *all_methods, accuracy),
        Cmd::Transform { profiles } => cmd_transform(cfg, params, hash, *profiles),
        Cmd::Propagate {
            band,
            family,
            n,
            t,
            radii,
            accuracy,
        } => cmd_propagate(
            cfg,
            params,
            hash,
            band.as_deref(),
            family.as_deref(),
            *n,
            *t,
            radii.as_deref(),
            accuracy,
        ),
        Cmd::Maximal {
            band,
            family,
            n,
            radii,
            times,
            accuracy,
        } => cmd_maximal(
            cfg,
            params,
            hash,
            band.as_deref(),
            family.as_deref(),
            *n,
            radii.as_deref(),
            times.as_deref(),
            accuracy,
        ),
        Cmd::Sweep {
            family,
            q,
            alpha,
            n_list,
        } => cmd_sweep(cfg, params, hash, family, *q, *alpha, n_list),
        Cmd::Check { which } => match which {
            CheckCmd::Calibration => cmd_check_calibration(cfg, params, hash),
            CheckCmd::Oscillatory {
                r0,
                r,
                trials,
                lambda_max,
            } => cmd_check_oscillatory(cfg, params, hash, *r0, *r, *trials, *lambda_max),
            CheckCmd::H3Global { alpha } => cmd_check_h3_global(cfg, hash, *alpha),
            CheckCmd::WeakL2 { alpha } => cmd_check_weak_l2(cfg, params, hash, *alpha),
        },
    }
}

// ---- argument parsing helpers ----

fn parse_range(flag: &'static str, spec: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |msg: &str| ConfigError::Arg {
        flag,
        msg: msg.to_string(),
    };
    if parts.len() != 3 {
        return Err(bad("expected lo:hi:count"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad("lo is not a number"))?;
    let hi: f64 = parts[1].parse().map_err(|_| bad("hi is not a number"))?;
    let count: usize = parts[2].parse().map_err(|_| bad("count is not an integer"))?;
    if !(hi > lo && lo.is_finite()) || count < 2 {
        return Err(bad("need hi > lo and count >= 2"));
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

fn parse_times(flag: &'static str, spec: &str) -> Result<TimeGrid, ConfigError> {
    let bad = |msg: &str| ConfigError::Arg {
        flag,
        msg: msg.to_string(),
    };
    let (range, log) = match spec.strip_suffix(":log") {
        Some(rest) => (rest, true),
        None => (spec, false),
    };
    let nodes = parse_range(flag, range)?;
    let (lo, hi, count) = (nodes[0], *nodes.last().unwrap(), nodes.len());
    if log {
        if lo <= 0.0 {
            return Err(bad("log ladder needs lo > 0"));
        }
        Ok(TimeGrid::log_spaced(lo, hi, count))
    } else {
        Ok(TimeGrid::uniform(lo, hi, count))
    }
}

fn parse_band(flag: &'static str, spec: &str) -> Result<(f64, f64), ConfigError> {
    let bad = |msg: &str| ConfigError::Arg {
        flag,
        msg: msg.to_string(),
    };
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 2 {
        return Err(bad("expected a,b"));
    }
    let a: f64 = parts[0].parse().map_err(|_| bad("a is not a number"))?;
    let b: f64 = parts[1].parse().map_err(|_| bad("b is not a number"))?;
    if !(b > a && a >= 0.0) {
        return Err(bad("need 0 <= a < b"));
    }
    Ok((a, b))
}

/// `a..b` is a doubling ladder (inclusive); otherwise a comma list.
fn parse_n_list(flag: &'static str, spec: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = |msg: &str| ConfigError::Arg {
        flag,
        msg: msg.to_string(),
    };
    if let Some((a, b)) = spec.split_once("..") {
        let a: f64 = a.parse().map_err(|_| bad("ladder start is not a number"))?;
        let b: f64 = b.parse().map_err(|_| bad("ladder end is not a number"))?;
        if !(a > 0.0 && b >= a) {
            return Err(bad("need 0 < a <= b"));
        }
        let mut out = Vec::new();
        let mut x = a;
        while x <= b * (1.0 + 1e-12) {
            out.push(x);
            x *= 2.0;
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        out.push(part.trim().parse().map_err(|_| bad("bad list entry"))?);
    }
    Ok(out)
}

fn parse_family(flag: &'static str, spec: &str) -> Result<Family, ConfigError> {
    match spec {
        "case1" => Ok(Family::Case1),
        "case2" => Ok(Family::Case2),
        "dilated" => Ok(Family::Dilated),
        _ => Err(ConfigError::Arg {
            flag,
            msg: format!("unknown family `{spec}` (case1 | case2 | dilated)"),
        }),
    }
}

fn parse_accuracy(flag: &'static str, spec: &str) -> Result<Accuracy, ConfigError> {
    match spec {
        "best" => Ok(Accuracy::Best),
        "fast" => Ok(Accuracy::Fast),
        _ => Err(ConfigError::Arg {
            flag,
            msg: format!("unknown accuracy `{spec}` (best | fast)"),
        }),
    }
}

/// Build the profile a propagation-style subcommand acts on.
fn resolve_profile(
    params: &SpaceParams,
    family: Option<&str>,
    n: Option<u32>,
    band: Option<&str>,
) -> Result<SpectralProfile, CliError> {
    match family {
        Some(f) => {
            let fam = parse_family("--family", f)?;
            let n = n.ok_or(ConfigError::Arg {
                flag: "--n",
                msg: "required with --family".into(),
            })?;
            let profile = match fam {
                Family::Case1 => case1_profile(params, n, &BumpSpec::unit()),
                Family::Case2 => case2_profile(params, n, &BumpSpec::band()),
                Family::Dilated => {
                    return Ok(drslab_core::experiments::dilated_profile(n as f64))
                }
            };
            profile.map_err(|e| CliError::Config(ConfigError::Arg {
                flag: "--n",
                msg: e.to_string(),
            }))
        }
        None => {
            let (a, b) = match band {
                Some(spec) => parse_band("--band", spec)?,
                None => (1.0, 2.0),
            };
            let bump = BumpSpec::new(a, b, 0.0);
            Ok(SpectralProfile::new(
                (a, b),
                Smoothness::CompactBump,
                move |l| bump.eval(l),
            ))
        }
    }
}

fn family_times(params: &SpaceParams, cfg: &RunConfig, family: Option<&str>, n: Option<u32>) -> TimeGrid {
    match (family, n) {
        (Some("case1"), Some(n)) => case1_times(n as f64),
        (Some("case2"), Some(n)) => case2_times(n as f64),
        _ => {
            let r2 = params.rho() * params.rho();
            let tp = cfg.grids.time_points.max(8);
            let head = tp / 4;
            let mut g = TimeGrid::log_spaced(1e-6 / r2, 0.1 / r2, head.max(2));
            let tail = TimeGrid::uniform(0.1 / r2, (1.0 - 1e-6) / r2, tp - head.max(2) + 1);
            g.times.extend_from_slice(&tail.times[1..]);
            g
        }
    }
}

fn require_c_cal(params: &SpaceParams) -> Result<(f64, PhiEvaluator), CliError> {
    let cal = full_calibration(params);
    let c_cal = cal
        .c_cal
        .ok_or_else(|| CliError::Numerical("inversion calibration failed".into()))?;
    Ok((c_cal, PhiEvaluator::new(*params, cal)))
}

// ---- subcommands ----

#[allow(clippy::too_many_arguments)]
fn cmd_phi(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    lambda: f64,
    s: Option<f64>,
    radii: Option<&str>,
    all_methods: bool,
    accuracy: &str,
) -> Result<(), CliError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ConfigError::Arg {
            flag: "--lambda",
            msg: "must be a finite nonnegative number".into(),
        }
        .into());
    }
    let acc = parse_accuracy("--accuracy", accuracy)?;
    let (_, ev) = require_c_cal(params)?;
    if let Some(s) = s {
        if s <= 0.0 {
            return Err(ConfigError::Arg {
                flag: "--s",
                msg: "must be positive".into(),
            }
            .into());
        }
        let pv = ev.eval(lambda, s, acc);
        println!("{}", pv.value);
        return Ok(());
    }
    let grid = match radii {
        Some(spec) => parse_range("--radii", spec)?,
        None => parse_range("--radii", &format!("0.05:{}:120", cfg.grids.s_max))?,
    };
    if grid[0] <= 0.0 {
        return Err(ConfigError::Arg {
            flag: "--radii",
            msg: "radii must be positive".into(),
        }
        .into());
    }
    let values = ev.eval_on_grid(lambda, &grid, acc);
    let lambda_min = ev.calibration().lambda_min;
    let mut columns = vec!["s", "value", "error_bound", "method"];
    if all_methods {
        columns.extend_from_slice(&[
            "ode",
            "delta_ode",
            "bessel_m0",
            "delta_bessel_m0",
            "hc_leading",
            "delta_hc_leading",
        ]);
    }
    let ode = if all_methods {
        drslab_core::spherical::phi_ode_on_grid(params, lambda, &grid)
            .map_err(|e| CliError::Numerical(e.to_string()))?
    } else {
        Vec::new()
    };
    let mut rows = Vec::with_capacity(grid.len());
    for (j, &s) in grid.iter().enumerate() {
        let pv = &values[j];
        let mut row = vec![
            emit::fmt_f(s),
            emit::fmt_f(pv.value),
            emit::fmt_f(pv.error_bound),
            format!("{:?}", pv.method),
        ];
        if all_methods {
            row.push(emit::fmt_f(ode[j].value));
            row.push(emit::fmt_f(ode[j].value - pv.value));
            if lambda >= lambda_min {
                let bm = ev.bessel_m0(lambda, s);
                let hc = ev.hc_leading(lambda, s);
                row.push(emit::fmt_f(bm.value));
                row.push(emit::fmt_f(bm.value - pv.value));
                row.push(emit::fmt_f(hc.value));
                row.push(emit::fmt_f(hc.value - pv.value));
            } else {
                row.extend_from_slice(&[String::new(), String::new(), String::new(), String::new()]);
            }
        }
        rows.push(row);
    }
    let path = cfg.out_dir.join("phi.csv");
    emit::write_csv(&path, hash, &columns, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_transform(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    profiles: usize,
) -> Result<(), CliError> {
    let radial = RadialGrid::new(cfg.grids.s_max, cfg.grids.lambda_hint, cfg.grids.radial_budget);
    let spectral = SpectralGrid::new(cfg.grids.lambda_hint, cfg.grids.s_max);
    let tr = Transformer::with_grids(*params, radial, spectral, Accuracy::Best);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(profiles);
    let mut max_rt = 0.0f64;
    let mut max_iso = 0.0f64;
    for i in 0..profiles {
        let profile = random_smooth_profile(&mut rng, tr.spectral.lambda_max);
        let ghat: Vec<f64> = tr.spectral.nodes.iter().map(|&l| profile.eval(l)).collect();
        let g = tr.inverse(&ghat);
        let ghat2 = tr.forward(&g);
        let diff: Vec<f64> = ghat2.iter().zip(&ghat).map(|(a, b)| a - b).collect();
        let denom = tr.plancherel_inner(&ghat, &ghat);
        let round_trip = (tr.plancherel_inner(&diff, &diff) / denom).sqrt();
        let isometry = (tr.space_l2_sq(&g) - denom).abs() / denom;
        max_rt = max_rt.max(round_trip);
        max_iso = max_iso.max(isometry);
        rows.push(vec![
            i.to_string(),
            emit::fmt_f(round_trip),
            emit::fmt_f(isometry),
        ]);
    }
    let path = cfg.out_dir.join("transform.csv");
    emit::write_csv(&path, hash, &["profile", "round_trip_rel", "isometry_rel"], &rows)?;
    let summary = serde_json::json!({
        "profiles": profiles,
        "max_round_trip_rel": max_rt,
        "max_isometry_rel": max_iso,
    });
    let text = emit::write_json(&cfg.out_dir.join("transform_summary.json"), hash, &summary)?;
    print!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_propagate(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    band: Option<&str>,
    family: Option<&str>,
    n: Option<u32>,
    t: f64,
    radii: Option<&str>,
    accuracy: &str,
) -> Result<(), CliError> {
    let acc = parse_accuracy("--accuracy", accuracy)?;
    let profile = resolve_profile(params, family, n, band)?;
    let grid = match radii {
        Some(spec) => parse_range("--radii", spec)?,
        None => parse_range("--radii", &format!("0.05:{}:160", cfg.grids.s_max))?,
    };
    let (c_cal, ev) = require_c_cal(params)?;
    let b = profile.support;
    let amp = default_amp_scale(b);
    let rows: Vec<Vec<String>> = grid
        .par_iter()
        .map(|&s| {
            let line = band_line(&ev, c_cal, &|l| profile.eval(l), b, s, t, amp, acc);
            let v = line.eval(t);
            vec![
                emit::fmt_f(s),
                emit::fmt_f(v.re),
                emit::fmt_f(v.im),
                emit::fmt_f(v.norm()),
                emit::fmt_f(line.err_bound),
            ]
        })
        .collect();
    let path = cfg.out_dir.join("propagate.csv");
    emit::write_csv(&path, hash, &["s", "re", "im", "abs", "error_bound"], &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_maximal(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    band: Option<&str>,
    family: Option<&str>,
    n: Option<u32>,
    radii: Option<&str>,
    times: Option<&str>,
    accuracy: &str,
) -> Result<(), CliError> {
    let acc = parse_accuracy("--accuracy", accuracy)?;
    let profile = resolve_profile(params, family, n, band)?;
    let grid = match radii {
        Some(spec) => parse_range("--radii", spec)?,
        None => parse_range("--radii", &format!("0.05:{}:160", cfg.grids.s_max))?,
    };
    let ladder = match times {
        Some(spec) => parse_times("--times", spec)?,
        None => family_times(params, cfg, family, n),
    };
    let (c_cal, ev) = require_c_cal(params)?;
    let b = profile.support;
    let field = maximal_field(
        &ev,
        c_cal,
        &|l| profile.eval(l),
        b,
        &grid,
        &ladder.times,
        default_amp_scale(b),
        acc,
    );
    let mut rows = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        rows.push(vec![
            emit::fmt_f(field.radii[j]),
            emit::fmt_f(field.sup[j]),
            emit::fmt_f(field.argmax_t[j]),
            emit::fmt_f(field.err_bound[j]),
        ]);
    }
    let path = cfg.out_dir.join("maximal.csv");
    emit::write_csv(&path, hash, &["s", "sup", "argmax_t", "error_bound"], &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    family: &str,
    q: f64,
    alpha: f64,
    n_list: &str,
) -> Result<(), CliError> {
    let fam = parse_family("--family", family)?;
    let ns = parse_n_list("--n-list", n_list)?;
    let report = ratio_sweep(params, fam, q, alpha, &ns, Region::default_for(fam))
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            vec![
                emit::fmt_f(e.n),
                emit::fmt_f(e.lq_norm),
                emit::fmt_f(e.sobolev_norm),
                emit::fmt_f(e.ratio),
            ]
        })
        .collect();
    let path = cfg.out_dir.join("sweep.csv");
    emit::write_csv(&path, hash, &["n", "lq_norm", "sobolev_norm", "ratio"], &rows)?;
    let text = emit::write_json(&cfg.out_dir.join("sweep_summary.json"), hash, &report)?;
    print!("{text}");
    if report.inconclusive {
        return Err(CliError::Inconclusive(format!(
            "slope fit stderr {} exceeds {}",
            report.slope_stderr, cfg.tolerances.slope_stderr_max
        )));
    }
    Ok(())
}

fn cmd_check_calibration(cfg: &RunConfig, params: &SpaceParams, hash: u64) -> Result<(), CliError> {
    let cal = full_calibration(params);
    if cal.c_cal.is_none() {
        return Err(CliError::Numerical("inversion calibration failed".into()));
    }
    let path = cfg.out_dir.join(format!("calibration_{}.json", params.label()));
    let text = emit::write_json(&path, hash, &cal)?;
    print!("{text}");
    Ok(())
}

fn cmd_check_oscillatory(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    r0: f64,
    r: f64,
    trials: usize,
    lambda_max: f64,
) -> Result<(), CliError> {
    if !(r > r0 && r0 >= 2.0) {
        return Err(ConfigError::Arg {
            flag: "--r0",
            msg: "need 2 <= r0 < r".into(),
        }
        .into());
    }
    let report = oscillatory_check(params, r0, r, trials, lambda_max, cfg.seed);
    let text = emit::write_json(&cfg.out_dir.join("oscillatory.json"), hash, &report)?;
    print!("{text}");
    if report.inconclusive {
        return Err(CliError::Inconclusive(format!(
            "tail-inflated bound {} overtakes measured max {}",
            report.max_upper_bound, report.max_normalized
        )));
    }
    Ok(())
}

fn cmd_check_h3_global(cfg: &RunConfig, hash: u64, alpha: f64) -> Result<(), CliError> {
    let report = h3_global_check(alpha, &DILATION_FAMILY);
    let text = emit::write_json(&cfg.out_dir.join("h3_global.json"), hash, &report)?;
    print!("{text}");
    Ok(())
}

fn cmd_check_weak_l2(
    cfg: &RunConfig,
    params: &SpaceParams,
    hash: u64,
    alpha: f64,
) -> Result<(), CliError> {
    let report = decay_and_weak_l2_check(params, alpha);
    let text = emit::write_json(&cfg.out_dir.join("weak_l2.json"), hash, &report)?;
    print!("{text}");
    if !report.truncation_ok {
        return Err(CliError::Inconclusive(
            "weak-L2 quasinorm dominated by the grid boundary".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_parser() {
        let v = parse_range("--radii", "0:1:5").unwrap();
        assert_eq!(v, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_range("--radii", "1:0:5").is_err());
        assert!(parse_range("--radii", "0:1").is_err());
    }

    #[test]
    fn n_list_parser() {
        assert_eq!(
            parse_n_list("--n-list", "8..1024").unwrap(),
            vec![8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0]
        );
        assert_eq!(
            parse_n_list("--n-list", "3,5,9").unwrap(),
            vec![3.0, 5.0, 9.0]
        );
        assert!(parse_n_list("--n-list", "x..y").is_err());
    }

    #[test]
    fn time_ladder_parser() {
        let t = parse_times("--times", "1e-3:1:4:log").unwrap();
        assert_eq!(t.times.len(), 4);
        assert!((t.times[1] / t.times[0] - 10.0).abs() < 1e-9);
        let u = parse_times("--times", "0:1:3").unwrap();
        assert_eq!(u.times, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn family_and_accuracy_parsers() {
        assert_eq!(parse_family("--family", "case2").unwrap(), Family::Case2);
        assert!(parse_family("--family", "case3").is_err());
        assert!(matches!(
            parse_accuracy("--accuracy", "best").unwrap(),
            Accuracy::Best
        ));
        assert!(parse_accuracy("--accuracy", "ok").is_err());
    }
}
