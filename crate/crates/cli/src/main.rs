//! Command-line front end: loads a tower configuration, runs a certification
//! pipeline, and emits a deterministic report.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;

use framecert::dimension::dimension_trace;
use framecert::level::{certify_frame, DEFAULT_LEVEL_BUDGET};
use framecert::measure::{delta_empirical, delta_lower_bound};
use framecert::ortho::{
    audit_triples, enumerate_zero_set, search_orthogonal_sets, DEFAULT_POOL_CAP,
};
use framecert::report::{
    delta_payload, dim_csv, dim_payload, frame_payload, ortho_payload, sig17, stage_csv,
    stage_payload, CertReport, StageRow,
};
use framecert::stage::{
    build_stage_matrices, verify_deviation_bound, verify_unitary, DEFAULT_STAGE_CAP,
};
use framecert::tower::{tower_from_json, Tower};

#[derive(Parser)]
#[command(name = "framecert", version, about = "Frame tower certification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Tower configuration file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output format; CSV applies to the per-stage table and the dimension
    /// trace only.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-stage matrix checks.
    Stage {
        #[command(subcommand)]
        action: StageAction,
    },
    /// Level frame-bound certification.
    Frame {
        #[command(subcommand)]
        action: FrameAction,
    },
    /// Tail-transform lower bound: analytic floor vs. empirical minimum.
    Delta {
        #[command(flatten)]
        common: Common,
        /// Deepest level enumerated.
        #[arg(long, default_value = "3")]
        k: String,
        #[arg(long, default_value = "1e-12")]
        tail_tol: String,
    },
    /// Orthogonal-set search over the transform zero set.
    Ortho {
        #[command(subcommand)]
        action: OrthoAction,
    },
    /// Hausdorff-dimension quotient trace.
    Dim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "20")]
        jmax: String,
        /// Trailing-window length for the liminf estimate.
        #[arg(long, default_value = "5")]
        window: String,
    },
}

#[derive(Subcommand)]
enum StageAction {
    /// Verify unitarity and the deviation bound chain for stages 1..=J.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "4")]
        levels: String,
        #[arg(long, default_value = "1e-9")]
        tol: String,
    },
}

#[derive(Subcommand)]
enum FrameAction {
    /// Certify frame-bound windows for levels 1..=n.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "3")]
        level: String,
        #[arg(long, default_value = "1e-12")]
        tail_tol: String,
        /// Additive tolerance on the window comparison.
        #[arg(long, default_value = "1e-8")]
        tol: String,
    },
}

#[derive(Subcommand)]
enum OrthoAction {
    /// Exhaustive clique search over the enumerated zero-set pool.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "2")]
        jmax: String,
        #[arg(long, default_value = "50")]
        qbound: String,
        #[arg(long, default_value = "3")]
        max_size: String,
    },
}

/// Usage or configuration problem: exit 1.
struct UsageError(String);
/// Certification failure or computational limit: exit 2.
struct CheckError(String);

enum RunError {
    Usage(UsageError),
    Check(CheckError),
}

impl From<UsageError> for RunError {
    fn from(e: UsageError) -> Self {
        RunError::Usage(e)
    }
}

impl From<CheckError> for RunError {
    fn from(e: CheckError) -> Self {
        RunError::Check(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(RunError::Usage(UsageError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(RunError::Check(CheckError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_tower(common: &Common) -> Result<Tower, UsageError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", common.config.display())))?;
    tower_from_json(&text).map_err(|e| UsageError(format!("config field error: {e}")))
}

fn parse_usize(s: &str, field: &str) -> Result<usize, UsageError> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| UsageError(format!("--{field} must be a non-negative integer, got {s:?}")))
}

fn parse_pos_f64(s: &str, field: &str) -> Result<f64, UsageError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("--{field} must be a decimal number, got {s:?}")))?;
    if v.is_nan() || v <= 0.0 {
        return Err(UsageError(format!("--{field} must be positive, got {s:?}")));
    }
    Ok(v)
}

fn emit(common: &Common, text: &str) -> Result<(), UsageError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<bool, RunError> {
    match command {
        Command::Stage {
            action: StageAction::Verify {
                common,
                levels,
                tol,
            },
        } => {
            let tower = load_tower(&common)?;
            let j_max = parse_usize(&levels, "levels")?;
            if j_max < 1 {
                return Err(UsageError("--levels must be at least 1".into()).into());
            }
            let tol = parse_pos_f64(&tol, "tol")?;
            let mut rows = Vec::with_capacity(j_max);
            let mut all_pass = true;
            for j in 1..=j_max {
                let stage = tower
                    .stage(j)
                    .map_err(|e| CheckError(e.to_string()))?;
                let params = stage.structured.clone().ok_or_else(|| {
                    UsageError(format!("stage {j} is not structured; stage checks need (M, K, alpha)"))
                })?;
                let sm = build_stage_matrices::<f64>(&stage, DEFAULT_STAGE_CAP)
                    .map_err(|e| CheckError(e.to_string()))?;
                let unitary = verify_unitary(&sm.h, tol);
                let deviation = verify_deviation_bound(&sm, &stage, tol)
                    .map_err(|e| CheckError(e.to_string()))?;
                let pass = unitary.pass && deviation.pass;
                all_pass &= pass;
                rows.push(StageRow {
                    j,
                    n: stage.n.to_string(),
                    m: params.m,
                    k: params.k.to_string(),
                    alpha: params.alpha,
                    eps_analytic: params.eps_analytic(),
                    eps_measured: sm.eps_measured,
                    sigma_min: sm.sigma_min,
                    sigma_max: sm.sigma_max,
                    dev_op: sm.dev_op,
                    dev_frob: sm.dev_frob,
                    unitary_max_dev: unitary.max_deviation,
                    pass,
                });
            }
            let text = match common.format {
                Format::Csv => stage_csv(&rows),
                Format::Json => CertReport::new(
                    "stage verify",
                    tower.description(),
                    stage_payload(&rows),
                    all_pass,
                )
                .with_param("levels", levels.trim())
                .with_param("tol", sig17(tol))
                .to_json(),
            };
            emit(&common, &text)?;
            Ok(all_pass)
        }
        Command::Frame {
            action: FrameAction::Certify {
                common,
                level,
                tail_tol,
                tol,
            },
        } => {
            if common.format == Format::Csv {
                return Err(UsageError("frame certify has no CSV form; use --format json".into()).into());
            }
            let tower = load_tower(&common)?;
            let n_max = parse_usize(&level, "level")?;
            if n_max < 1 {
                return Err(UsageError("--level must be at least 1".into()).into());
            }
            let tail_tol = parse_pos_f64(&tail_tol, "tail-tol")?;
            let tol = parse_pos_f64(&tol, "tol")?;
            let cert = certify_frame::<f64>(&tower, n_max, tail_tol, tol, DEFAULT_LEVEL_BUDGET)
                .map_err(|e| CheckError(e.to_string()))?;
            let pass = cert.pass;
            let text = CertReport::new(
                "frame certify",
                tower.description(),
                frame_payload(&cert),
                pass,
            )
            .with_param("level", level.trim())
            .with_param("tail_tol", sig17(tail_tol))
            .with_param("tol", sig17(tol))
            .to_json();
            emit(&common, &text)?;
            Ok(pass)
        }
        Command::Delta {
            common,
            k,
            tail_tol,
        } => {
            if common.format == Format::Csv {
                return Err(UsageError("delta has no CSV form; use --format json".into()).into());
            }
            let tower = load_tower(&common)?;
            let k_max = parse_usize(&k, "k")?;
            if k_max < 1 {
                return Err(UsageError("--k must be at least 1".into()).into());
            }
            let tail_tol = parse_pos_f64(&tail_tol, "tail-tol")?;
            let floor = delta_lower_bound();
            let emp = delta_empirical::<f64>(&tower, k_max, tail_tol, DEFAULT_LEVEL_BUDGET)
                .map_err(|e| CheckError(e.to_string()))?;
            let pass = emp.min > 0.0;
            let text = CertReport::new(
                "delta",
                tower.description(),
                delta_payload(&floor, &emp),
                pass,
            )
            .with_param("k", k.trim())
            .with_param("tail_tol", sig17(tail_tol))
            .to_json();
            emit(&common, &text)?;
            Ok(pass)
        }
        Command::Ortho {
            action: OrthoAction::Search {
                common,
                jmax,
                qbound,
                max_size,
            },
        } => {
            if common.format == Format::Csv {
                return Err(UsageError("ortho search has no CSV form; use --format json".into()).into());
            }
            let tower = load_tower(&common)?;
            let j_max = parse_usize(&jmax, "jmax")?;
            let q_bound = parse_usize(&qbound, "qbound")? as u64;
            let size_cap = parse_usize(&max_size, "max-size")?;
            if j_max < 1 || size_cap < 1 {
                return Err(UsageError("--jmax and --max-size must be at least 1".into()).into());
            }
            let mut pool: Vec<BigRational> = vec![BigRational::from_integer(0.into())];
            let elems = enumerate_zero_set(&tower, j_max, q_bound)
                .map_err(|e| CheckError(e.to_string()))?;
            pool.extend(elems.into_iter().map(|e| e.xi.value().clone()));
            let search = search_orthogonal_sets(&tower, &pool, j_max, size_cap, DEFAULT_POOL_CAP)
                .map_err(|e| CheckError(e.to_string()))?;
            // Parity audit of near-miss triples is cubic in the pool; skip it
            // for large pools.
            let audit = if pool.len() <= 500 {
                Some(
                    audit_triples(&tower, &pool, j_max, DEFAULT_POOL_CAP)
                        .map_err(|e| CheckError(e.to_string()))?,
                )
            } else {
                None
            };
            let text = CertReport::new(
                "ortho search",
                tower.description(),
                ortho_payload(&search, audit.as_ref()),
                true,
            )
            .with_param("jmax", jmax.trim())
            .with_param("qbound", qbound.trim())
            .with_param("max_size", max_size.trim())
            .to_json();
            emit(&common, &text)?;
            Ok(true)
        }
        Command::Dim {
            common,
            jmax,
            window,
        } => {
            let tower = load_tower(&common)?;
            let j_max = parse_usize(&jmax, "jmax")?;
            let window = parse_usize(&window, "window")?;
            let trace = dimension_trace(&tower, j_max, window)
                .map_err(|e| UsageError(e.to_string()))?;
            let text = match common.format {
                Format::Csv => dim_csv(&trace),
                Format::Json => CertReport::new(
                    "dim",
                    tower.description(),
                    dim_payload(&trace),
                    true,
                )
                .with_param("jmax", jmax.trim())
                .with_param("window", window.to_string())
                .to_json(),
            };
            emit(&common, &text)?;
            Ok(true)
        }
    }
}
