//! hdsft: recover continuous frequencies in [-M, M]^d from black-box signal
//! samples, plus the oracle/verification suites backing the construction.
//!
//! Commands: gen (instance generation), run (recovery), verify (the check
//! suites), sweep (dimension-scaling CSV). Exit codes: 0 success,
//! 1 verification/assertion failure, 2 usage or IO error.

use clap::{Args, Parser, Subcommand};
use hdsft_core::model::{derive_params, GeneratorSettings, ParamOverrides, SignalSpec, ToneOracle};
use hdsft_core::oracle::{fit_loglog_slope, match_score, sweep, sweep_csv, SweepPolicy};
use hdsft_core::pipeline::recover_with_restarts;
use hdsft_core::seeding::{rng_for, Stream};
use hdsft_core::verify::{run_verify, VerifyLevel};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hdsft",
    version,
    about = "Sparse recovery of continuous d-dimensional frequencies from black-box samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random signal instance (tones with an enforced frequency gap).
    Gen(GenArgs),
    /// Recover tones from a signal spec and write the result document.
    Run(RunArgs),
    /// Run the verification checks (oracle cross-checks and statistical probes).
    Verify(VerifyArgs),
    /// Dimension-scaling sweep emitting CSV rows.
    Sweep(SweepArgs),
}

/// Keys accepted in a --config document. Flags override file keys, which
/// override built-in defaults. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    k: Option<usize>,
    d: Option<usize>,
    #[serde(rename = "M")]
    m: Option<f64>,
    eta: Option<f64>,
    #[serde(rename = "A")]
    a: Option<f64>,
    #[serde(rename = "Aprime")]
    a_prime: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    seed: Option<u64>,
    overrides: Option<ParamOverrides>,
    spec: Option<PathBuf>,
    out: Option<PathBuf>,
    trials: Option<u32>,
    dims: Option<Vec<usize>>,
    restarts: Option<u32>,
    level: Option<String>,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration document (JSON). Flags take precedence over file keys.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; every random choice derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of tones.
    #[arg(long)]
    k: Option<usize>,
    /// Dimension (≥ 2).
    #[arg(long)]
    d: Option<usize>,
    /// Frequency bound: coordinates lie in [-M, M].
    #[arg(long = "M")]
    m: Option<f64>,
    /// Minimum pairwise Euclidean frequency gap.
    #[arg(long)]
    eta: Option<f64>,
    /// Amplitude magnitude upper bound.
    #[arg(long = "A")]
    a: Option<f64>,
    /// Amplitude magnitude lower bound.
    #[arg(long = "Aprime")]
    a_prime: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Signal spec document to recover from.
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Independent attempts before giving up (count mismatch triggers a retry).
    #[arg(long)]
    restarts: Option<u32>,
    /// Override the derived time span T (power of two).
    #[arg(long = "T")]
    t_span: Option<f64>,
    /// Override the derived bandwidth F (power of two).
    #[arg(long = "F")]
    f_band: Option<f64>,
    /// Override the derived bucket count s (power of two).
    #[arg(long = "s")]
    s: Option<u32>,
    /// Override the derived importance-sample count N.
    #[arg(long = "N")]
    n_conv: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// fast: exactness checks (seconds). full: statistical suites (minutes).
    #[arg(long, value_parser = ["fast", "full"])]
    level: Option<String>,
    /// Run the dense-grid checks at this TF (demonstrates the grid guard).
    #[arg(long, value_name = "TF")]
    dense_tf: Option<i64>,
    /// Mutation-sanity hook: negate the closed-form v2 inside the check.
    #[arg(long, hide = true)]
    inject_v2_sign_flip: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Dimensions to sweep, comma-separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Seeds per dimension.
    #[arg(long)]
    trials: Option<u32>,
    /// Number of tones.
    #[arg(long)]
    k: Option<usize>,
    /// Exit nonzero if the fitted log-log slope of samples vs d exceeds 6.
    #[arg(long)]
    assert_poly: bool,
}

/// Failures with their process exit code.
enum Failure {
    /// Verification or assertion failure: exit 1.
    Check(String),
    /// Usage, configuration, or IO problem: exit 2.
    Usage(String),
}

type CmdResult = Result<(), Failure>;

impl From<hdsft_core::Error> for Failure {
    fn from(e: hdsft_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, Failure> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                Failure::Usage(format!("cannot read config file '{}': {e}", p.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("bad config document '{}': {e}", p.display())))
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> CmdResult {
    match out {
        None => {
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
            Ok(())
        }
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Failure::Usage(format!("cannot write '{}': {e}", p.display()))),
    }
}

fn read_spec(path: &Path) -> Result<SignalSpec, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read spec file '{}': {e}", path.display())))?;
    let spec = SignalSpec::from_json(&text)
        .map_err(|e| Failure::Usage(format!("bad spec document '{}': {e}", path.display())))?;
    spec.validate()
        .map_err(|e| Failure::Usage(format!("invalid spec '{}': {e}", path.display())))?;
    Ok(spec)
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let settings = GeneratorSettings {
        k: args.k.or(cfg.k).unwrap_or(2),
        d: args.d.or(cfg.d).unwrap_or(2),
        m: args.m.or(cfg.m).unwrap_or(1.0),
        eta: args.eta.or(cfg.eta).unwrap_or(0.5),
        a: args.a.or(cfg.a).unwrap_or(1.0),
        a_prime: args.a_prime.or(cfg.a_prime).unwrap_or(0.5),
    };
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let mut rng = rng_for(seed, Stream::Generator);
    let spec = hdsft_core::model::generate_spec(&settings, &mut rng)?;
    let out = args.common.out.clone().or(cfg.out);
    emit(&out, &spec.to_json())?;
    eprintln!(
        "generated k = {}, d = {} instance with eta = {} (seed {seed})",
        settings.k, settings.d, settings.eta
    );
    Ok(())
}

fn merged_overrides(cfg: &FileConfig, args: &RunArgs) -> ParamOverrides {
    let mut ov = cfg.overrides.clone().unwrap_or_default();
    if args.t_span.is_some() {
        ov.t_span = args.t_span;
    }
    if args.f_band.is_some() {
        ov.f_band = args.f_band;
    }
    if args.s.is_some() {
        ov.s = args.s;
    }
    if args.n_conv.is_some() {
        ov.n_conv = args.n_conv;
    }
    ov
}

fn cmd_run(args: RunArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let spec_path = args
        .spec
        .clone()
        .or(cfg.spec.clone())
        .ok_or_else(|| Failure::Usage("no spec file given (--spec or config key)".into()))?;
    let spec = read_spec(&spec_path)?;
    let constants = spec.constants();
    let epsilon = args.epsilon.or(cfg.epsilon).unwrap_or(0.1);
    let delta = args.delta.or(cfg.delta).unwrap_or(0.1);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let restarts = args.restarts.or(cfg.restarts).unwrap_or(4);
    let overrides = merged_overrides(&cfg, &args);
    let params = derive_params(&constants, epsilon, delta, &overrides)?;
    let oracle = ToneOracle::new(&spec);
    let result = recover_with_restarts(&oracle, &constants, &params, seed, restarts)?;

    let report = match_score(&spec, &result, constants.eta / 4.0);
    let out = args.common.out.clone().or(cfg.out);
    emit(&out, &result.to_json())?;
    eprintln!(
        "recovered {}/{} tones in {} attempt(s): recall {:.3}, max freq error {:.3e}, \
         max amp error {:.3e}, {} signal samples, {:.1} ms",
        result.recovered.len(),
        constants.k,
        result.diagnostics.attempts,
        report.recall,
        report.max_freq_error,
        report.max_amp_error,
        result.total_signal_samples,
        result.wall_time_ms
    );
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    if let Some(tf) = args.dense_tf {
        // Surface the dense-grid guard with its size report.
        hdsft_core::oracle::DenseGrid::zeros(2, tf)
            .map_err(|e| Failure::Usage(format!("refusing dense grid: {e}")))?;
    }
    let level = match args
        .level
        .or(cfg.level)
        .unwrap_or_else(|| "fast".into())
        .as_str()
    {
        "full" => VerifyLevel::Full,
        _ => VerifyLevel::Fast,
    };
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let report = run_verify(level, seed, args.inject_v2_sign_flip)?;
    print!("{}", report.render_table());
    if let Some(out) = args.common.out.clone().or(cfg.out) {
        std::fs::write(&out, report.to_json())
            .map_err(|e| Failure::Usage(format!("cannot write '{}': {e}", out.display())))?;
    }
    if report.all_pass {
        Ok(())
    } else {
        Err(Failure::Check("verification checks failed".into()))
    }
}

fn cmd_sweep(args: SweepArgs) -> CmdResult {
    let cfg = load_config(&args.common.config)?;
    let dims = args
        .dims
        .clone()
        .or(cfg.dims.clone())
        .unwrap_or_else(|| vec![2, 4, 8, 16]);
    let trials = args.trials.or(cfg.trials).unwrap_or(5).max(1);
    let seed = args.common.seed.or(cfg.seed).unwrap_or(0);
    let mut policy = SweepPolicy::desk_scale(args.k.or(cfg.k).unwrap_or(2));
    if let Some(eta) = cfg.eta {
        policy.eta = eta;
    }
    if let Some(m) = cfg.m {
        policy.m = m;
    }
    if let Some(eps) = cfg.epsilon {
        policy.epsilon = eps;
    }
    if let Some(delta) = cfg.delta {
        policy.delta = delta;
    }
    if let Some(restarts) = cfg.restarts {
        policy.restarts = restarts;
    }
    if let Some(ov) = cfg.overrides.clone() {
        policy.overrides = ov;
    }
    let seeds: Vec<u64> = (0..trials as u64).map(|i| seed.wrapping_add(i)).collect();
    let rows = sweep(&dims, &policy, &seeds)?;
    let out = args.common.out.clone().or(cfg.out);
    emit(&out, &sweep_csv(&rows))?;
    if args.assert_poly {
        let slope = fit_loglog_slope(&rows);
        eprintln!("fitted log-log slope of samples vs d: {slope:.3}");
        if slope.is_nan() || slope > 6.0 {
            return Err(Failure::Check(format!(
                "polynomial-scaling assertion failed: slope {slope:.3} > 6"
            )));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match outcome {
        Ok(()) => ExitCode::from(0),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
