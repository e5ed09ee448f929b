//! `qgamma`: command-line front end for γ-divergences, sweeps, projections,
//! randomized audits and the acceptance suite.
//!
//! Exit codes: 0 success / PASS, 1 FAIL, 2 usage or input error,
//! 3 infeasible constraints, 4 projection iteration limit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qgamma::acceptance::{run_suite, Suite};
use qgamma::algebra::{random_state_with_rank, AlgebraShape, State};
use qgamma::audit::{run_audit, AuditConfig, AuditKind};
use qgamma::channels::random_channel;
use qgamma::divergence::{divergence, sweep, write_sweep_csv, GammaGrid};
use qgamma::format::g9;
use qgamma::projection::{bregman_project, ConstraintSet, ProjectionOptions, ProjectionResult, Start};
use qgamma::quasientropy::quasi_entropy_gamma;
use qgamma::{tol, Error};

const PSD_TOL_ENV: &str = "QGAMMA_PSD_TOL";
const SOLVER_TOL_ENV: &str = "QGAMMA_SOLVER_TOL";

#[derive(Parser)]
#[command(name = "qgamma", version, about = "Quantum γ-divergence toolkit")]
struct Cli {
    /// PSD / support threshold (overrides QGAMMA_PSD_TOL).
    #[arg(long, global = true)]
    psd_tol: Option<f64>,
    /// Projection solver tolerance (overrides QGAMMA_SOLVER_TOL).
    #[arg(long, global = true)]
    solver_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print D_γ(ω, φ).
    Div {
        omega: PathBuf,
        phi: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
    /// Write a `gamma,divergence` CSV over the grid `a:b:step` (endpoints included).
    Sweep {
        omega: PathBuf,
        phi: PathBuf,
        #[arg(long, value_name = "A:B:STEP")]
        gamma: String,
        /// Output file; stdout if omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Bregman projection of ψ onto an affine constraint set.
    Project {
        psi: PathBuf,
        constraints: PathBuf,
        /// Must match the constraint file when given.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Start from a random state drawn with this seed instead of ψ.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Randomized audit of one identity or inequality.
    Audit {
        kind: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed γ; drawn from {0.1, ..., 0.9} per trial if omitted.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Print the quasi-entropy with f_γ.
    Quasi {
        omega: PathBuf,
        phi: PathBuf,
        #[arg(long)]
        gamma: f64,
    },
    /// Emit a random state or channel as JSON.
    Gen(GenArgs),
    /// Run the acceptance suite.
    Check {
        #[arg(long)]
        suite: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    what: GenKind,
}

#[derive(Subcommand)]
enum GenKind {
    State {
        /// Block sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        /// Rank per block (full rank if omitted).
        #[arg(long)]
        rank: Option<usize>,
        /// Leave the trace unnormalized.
        #[arg(long)]
        raw: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    Channel {
        #[arg(long = "in")]
        in_dim: usize,
        #[arg(long = "out-dim")]
        out_dim: usize,
        #[arg(long, default_value_t = 2)]
        kraus: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible(_) => 3,
            Error::ProjectionMaxIterations(_) => 4,
            _ => 2,
        };
        Fail(code, e.to_string())
    }
}

type CmdResult = Result<u8, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("qgamma: {msg}");
            ExitCode::from(code)
        }
    }
}

/// Flag value, else the environment variable, else `None`; negatives rejected.
fn tolerance(flag: Option<f64>, env: &str) -> Result<Option<f64>, Fail> {
    let value = match flag {
        Some(v) => Some(v),
        None => match std::env::var(env) {
            Ok(s) => Some(
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| usage(format!("{env}: not a number: {s:?}")))?,
            ),
            Err(_) => None,
        },
    };
    match value {
        Some(v) if !(v.is_finite() && v >= 0.0) => {
            Err(usage(format!("tolerance must be finite and >= 0, got {v} ({env})")))
        }
        v => Ok(v),
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(v) = tolerance(cli.psd_tol, PSD_TOL_ENV)? {
        tol::set_psd(v)?;
    }
    let solver_tol = tolerance(cli.solver_tol, SOLVER_TOL_ENV)?;

    match cli.command {
        Command::Div { omega, phi, gamma } => {
            let (w, p) = read_pair(&omega, &phi)?;
            println!("{}", divergence(&w, &p, gamma)?);
            Ok(0)
        }
        Command::Quasi { omega, phi, gamma } => {
            let (w, p) = read_pair(&omega, &phi)?;
            println!("{}", g9(quasi_entropy_gamma(&w, &p, gamma)?));
            Ok(0)
        }
        Command::Sweep { omega, phi, gamma, out } => {
            let (w, p) = read_pair(&omega, &phi)?;
            let grid = GammaGrid::parse(&gamma)?;
            let rows = sweep(&w, &p, &grid)?;
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &rows).map_err(|e| usage(e.to_string()))?;
            emit(out.as_deref(), &buf)?;
            Ok(0)
        }
        Command::Project { psi, constraints, gamma, max_iter, seed, out } => {
            let psi: State = read_json(&psi)?;
            let set: ConstraintSet = read_json(&constraints)?;
            if let Some(g) = gamma {
                if g != set.gamma() {
                    return Err(Error::GammaMismatch { expected: set.gamma(), actual: g }.into());
                }
            }
            let mut opts = ProjectionOptions { max_iter, ..Default::default() };
            if let Some(t) = solver_tol {
                opts.tol = t;
            }
            if let Some(s) = seed {
                opts.start = Start::Seeded(s);
            }
            match bregman_project(&psi, &set, &opts) {
                Ok(res) => {
                    emit(out.as_deref(), &projection_json(&res)?)?;
                    Ok(0)
                }
                Err(Error::ProjectionMaxIterations(res)) => {
                    emit(out.as_deref(), &projection_json(&res)?)?;
                    Err(Fail(
                        4,
                        format!(
                            "no convergence after {} iterations (kkt residual {})",
                            res.iterations,
                            g9(res.kkt_residual)
                        ),
                    ))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Audit { kind, trials, dim, seed, gamma } => {
            let kind: AuditKind = kind.parse()?;
            let outcome = run_audit(&AuditConfig { kind, trials, dim, seed, gamma })?;
            let verdict = if outcome.passed { "PASS" } else { "FAIL" };
            println!(
                "{verdict} {kind}: trials {} dim {dim} seed {seed} worst residual {} (tolerance {})",
                outcome.trials,
                g9(outcome.worst),
                g9(outcome.tolerance)
            );
            if outcome.passed {
                Ok(0)
            } else {
                println!("reproduce with: seed {seed} trial {}", outcome.worst_trial);
                Ok(1)
            }
        }
        Command::Check { suite, seed } => {
            let filter = suite.map(|s| s.parse::<Suite>()).transpose()?;
            let reports = run_suite(filter, seed)?;
            println!("{:>2}  {:<13} {:<28} {:<6} {:>12} {:>10}", "id", "suite", "criterion", "status", "worst", "tolerance");
            for r in &reports {
                println!(
                    "{:>2}  {:<13} {:<28} {:<6} {:>12} {:>10}",
                    r.id,
                    r.suite.to_string(),
                    r.name,
                    if r.passed { "PASS" } else { "FAIL" },
                    g9(r.worst_residual),
                    g9(r.tolerance)
                );
            }
            match reports.iter().find(|r| !r.passed) {
                None => {
                    println!("PASS: {} criteria", reports.len());
                    Ok(0)
                }
                Some(r) => {
                    println!("FAIL: criterion {} ({})", r.id, r.name);
                    Ok(1)
                }
            }
        }
        Command::Gen(GenArgs { what }) => match what {
            GenKind::State { shape, rank, raw, seed, out } => {
                let shape = AlgebraShape::new(shape)?;
                let max_rank = shape.blocks().iter().copied().max().unwrap_or(1);
                let state = random_state_with_rank(&shape, rank.unwrap_or(max_rank), seed, !raw);
                emit(out.as_deref(), &to_json_bytes(&state)?)?;
                Ok(0)
            }
            GenKind::Channel { in_dim, out_dim, kraus, seed, out } => {
                let t = random_channel(in_dim, out_dim, kraus, seed)?;
                emit(out.as_deref(), &to_json_bytes(&t)?)?;
                Ok(0)
            }
        },
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_pair(omega: &Path, phi: &Path) -> Result<(State, State), Fail> {
    let w: State = read_json(omega)?;
    let p: State = read_json(phi)?;
    if w.shape() != p.shape() {
        return Err(Error::ShapeMismatch(w.shape().blocks().to_vec(), p.shape().blocks().to_vec()).into());
    }
    Ok((w, p))
}

fn to_json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, Fail> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn projection_json(res: &ProjectionResult) -> Result<Vec<u8>, Fail> {
    to_json_bytes(&json!({
        "projected": res.projected,
        "divergence": res.divergence,
        "kkt_residual": res.kkt_residual,
        "iterations": res.iterations,
        "converged": res.converged,
    }))
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Fail> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| usage(e.to_string())),
    }
}
