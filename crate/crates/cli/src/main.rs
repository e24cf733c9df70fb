//! Command-line frontend for the sparsity-promoting regularization
//! toolkit: source-family verification, rate-function evaluation,
//! variational-inequality spot checks, regularized solves with
//! discrepancy weight selection, noise sweeps and the exponent-one
//! witness table.
//!
//! Exit codes: 0 on success, 1 for invalid input (flags, config or
//! data), 2 when a computation ran but failed numerically (family
//! verification failed, margin negative, weight grid exhausted).

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use l1rates::experiments::{run_beta1_demo, run_rate_sweep, SweepConfig, SweepTarget};
use l1rates::operators::{ImageVec, Operator};
use l1rates::piecewise::haar_combination;
use l1rates::rates::RateProfile;
use l1rates::sequences::SeqVec;
use l1rates::solver::{
    select_alpha_discrepancy, solve_l1_tikhonov, GridOptions, SolveOptions,
};
use l1rates::source_sets::{SourceCandidate, VerificationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

/// Margin below which a variational-inequality check counts as failed.
const MARGIN_FLOOR: f64 = -1e-9;

/// Default truncation dimension for sweeps.
const DEFAULT_SWEEP_DIM: usize = 256;

#[derive(Parser)]
#[command(
    name = "l1rates",
    version,
    about = "Certified convergence rates for sparsity-promoting regularization"
)]
struct Cli {
    /// File with key=value lines supplying defaults for omitted flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for random draws (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the primary output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: csv, json or text (default depends on the command)
    #[arg(long, global = true)]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct source families and verify both certificate conditions
    VerifySourceSets {
        /// bidiagonal, haar-integration or diagonal:<weights-file>
        #[arg(long)]
        operator: Option<String>,
        /// Family construction: bidiagonal or haar (default: from operator)
        #[arg(long)]
        construction: Option<String>,
        /// Comma-separated family sizes, e.g. 1,2,4,8
        #[arg(long)]
        n: Option<String>,
        /// Interference constant in (0,1); bidiagonal construction only
        #[arg(long)]
        c: Option<f64>,
        /// Verify at this depth instead of each family's default
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Evaluate the certified rate function φ
    ComputePhi {
        /// Reference sequence: e1, k2:<N> or a file of values
        #[arg(long)]
        xdag: Option<String>,
        /// Family construction: bidiagonal or haar
        #[arg(long)]
        construction: Option<String>,
        /// Interference constant; bidiagonal construction only
        #[arg(long)]
        c: Option<f64>,
        /// Comma-separated family sizes forming the rate ladder
        #[arg(long)]
        n_ladder: Option<String>,
        /// Arguments to evaluate at (default: log grid on [1e-6, 1])
        #[arg(long)]
        t: Option<String>,
    },
    /// Sample random candidates and report the variational-inequality margin
    CheckVie {
        #[arg(long)]
        xdag: Option<String>,
        #[arg(long)]
        construction: Option<String>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        n_ladder: Option<String>,
        /// Exponent to test (default: the certified (1−c)/(1+c))
        #[arg(long)]
        beta: Option<f64>,
        /// Number of random candidates (default 1000)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// One regularized solve
    Solve {
        #[arg(long)]
        operator: Option<String>,
        /// Data file; smoothing-operator data is read as basis coefficients
        #[arg(long)]
        y: Option<String>,
        /// Simulate from this reference instead of reading --y
        #[arg(long)]
        xdag: Option<String>,
        /// Noise level for simulated data (default 0 = exact)
        #[arg(long)]
        delta: Option<f64>,
        /// Regularization weight
        #[arg(long)]
        alpha: Option<f64>,
        /// Dimension the minimization is restricted to
        #[arg(long)]
        dim: Option<usize>,
        /// Optimality tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Iteration cap
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Choose the weight by the sequential discrepancy principle
    SelectAlpha {
        #[arg(long)]
        operator: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        xdag: Option<String>,
        /// Noise level (must be positive)
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// Discrepancy factor τ (default 1.5)
        #[arg(long)]
        tau: Option<f64>,
        /// Geometric grid ratio (default 0.7)
        #[arg(long)]
        ratio: Option<f64>,
        /// Number of grid points (default 60)
        #[arg(long)]
        count: Option<usize>,
        /// Largest grid weight (default: smallest weight with zero minimizer)
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Reconstruction-error sweep over descending noise levels
    Sweep {
        #[arg(long)]
        operator: Option<String>,
        #[arg(long)]
        xdag: Option<String>,
        /// Comma-separated noise levels, strictly descending
        #[arg(long)]
        deltas: Option<String>,
        /// Truncation dimension (default 256)
        #[arg(long)]
        dim: Option<usize>,
        /// Family sizes of a verified ladder; adds the certified φ column
        #[arg(long)]
        n_ladder: Option<String>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        alpha0: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Witness table: the ℓ¹ defect outruns the image distance
    Beta1Demo {
        #[arg(long)]
        operator: Option<String>,
        #[arg(long)]
        xdag: Option<String>,
        /// Comma-separated shift depths, e.g. 1,2,4,8
        #[arg(long)]
        n: Option<String>,
    },
}

enum CliError {
    /// Bad flags, config or data files → exit 1.
    Input(String),
    /// The computation ran and failed → exit 2.
    Numerical(String),
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn numerical(msg: impl Into<String>) -> CliError {
    CliError::Numerical(msg.into())
}

impl From<l1rates::Error> for CliError {
    fn from(e: l1rates::Error) -> Self {
        match e {
            l1rates::Error::InvalidInput(_)
            | l1rates::Error::InvalidParameter(_)
            | l1rates::Error::InvalidDepth { .. } => CliError::Input(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Text,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Format::Text),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format {other:?}; use csv, json or text")),
        }
    }
}

/// Flag values merged with config-file defaults; flags win.
struct Settings {
    cfg: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let mut cfg = HashMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    input(format!(
                        "config line {}: expected key=value, got {line:?}",
                        lineno + 1
                    ))
                })?;
                cfg.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(Self { cfg })
    }

    /// The flag if given, else the config value under `key`, else None.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.cfg.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| input(format!("config {key}={raw}: {e}"))),
            None => Ok(None),
        }
    }

    fn need<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T, CliError>
    where
        T::Err: Display,
    {
        self.pick(flag, key)?
            .ok_or_else(|| input(format!("missing --{key} (flag or config)")))
    }
}

fn parse_operator(raw: &str) -> Result<Operator, CliError> {
    match raw {
        "bidiagonal" => Ok(Operator::bidiagonal()),
        "haar-integration" => Ok(Operator::haar_integration()),
        _ => {
            if let Some(path) = raw.strip_prefix("diagonal:") {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| input(format!("cannot read weights {path}: {e}")))?;
                let weights = SeqVec::parse(&text)?.values().to_vec();
                Ok(Operator::diagonal(weights)?)
            } else {
                Err(input(format!(
                    "unknown operator {raw:?}; use bidiagonal, haar-integration or diagonal:<file>"
                )))
            }
        }
    }
}

/// `e1`, `k2:<N>` or a path to a file of values.
fn parse_reference(raw: &str) -> Result<SeqVec, CliError> {
    if raw == "e1" {
        return Ok(SeqVec::unit(1)?);
    }
    if let Some(n) = raw.strip_prefix("k2:") {
        let n: usize = n
            .parse()
            .map_err(|e| input(format!("bad dimension in {raw:?}: {e}")))?;
        if n == 0 {
            return Err(input("k2:<N> needs N at least 1"));
        }
        return Ok(SeqVec::new(
            (1..=n).map(|k| (k as f64).powi(-2)).collect(),
        )?);
    }
    let text = std::fs::read_to_string(raw)
        .map_err(|e| input(format!("cannot read sequence {raw}: {e}")))?;
    Ok(SeqVec::parse(&text)?)
}

fn parse_list<T: FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    let items: Result<Vec<T>, CliError> = raw
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<T>()
                .map_err(|e| input(format!("bad {what} entry {p:?}: {e}")))
        })
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(input(format!("empty {what} list")));
    }
    Ok(items)
}

/// Resolves the `--construction`/`--operator` pair: either may be
/// omitted when the other determines it.
fn resolve_construction(
    operator: Option<String>,
    construction: Option<String>,
) -> Result<(Operator, String), CliError> {
    let construction = match (&operator, construction) {
        (_, Some(c)) => c,
        (Some(op_name), None) => match op_name.as_str() {
            "bidiagonal" => "bidiagonal".to_string(),
            "haar-integration" => "haar".to_string(),
            other => {
                return Err(input(format!(
                    "no source-family construction for operator {other:?}; pass --construction"
                )))
            }
        },
        (None, None) => {
            return Err(input(
                "missing --construction (or --operator to infer it from)",
            ))
        }
    };
    let op = match construction.as_str() {
        "bidiagonal" => Operator::bidiagonal(),
        "haar" => Operator::haar_integration(),
        other => {
            return Err(input(format!(
                "unknown construction {other:?}; use bidiagonal or haar"
            )))
        }
    };
    if let Some(op_name) = operator {
        let named = parse_operator(&op_name)?;
        if named.name() != op.name() {
            return Err(input(format!(
                "operator {:?} does not match construction {construction:?}",
                named.name()
            )));
        }
    }
    Ok((op, construction))
}

/// Builds one source family per requested size.
fn build_ladder(
    construction: &str,
    sizes: &[usize],
    c: Option<f64>,
) -> Result<Vec<SourceCandidate>, CliError> {
    match construction {
        "bidiagonal" => {
            let c =
                c.ok_or_else(|| input("the bidiagonal construction needs --c in (0,1)"))?;
            sizes
                .iter()
                .map(|&n| SourceCandidate::bidiagonal(n, c).map_err(CliError::from))
                .collect()
        }
        "haar" => {
            if c.is_some() {
                return Err(input(
                    "the haar construction fixes its own interference constant; drop --c",
                ));
            }
            sizes
                .iter()
                .map(|&n| SourceCandidate::haar(n).map_err(CliError::from))
                .collect()
        }
        other => Err(input(format!("unknown construction {other:?}"))),
    }
}

/// Reads data for the operator's image space: sequence values directly,
/// or basis coefficients for function-space data.
fn load_data(op: &Operator, path: &str) -> Result<ImageVec, CliError> {
    let values = parse_reference(path)?;
    match op.image_space() {
        "sequence" => Ok(ImageVec::Seq(values)),
        _ => Ok(ImageVec::Fun(haar_combination(values.values()))),
    }
}

/// Either `--y <file>` data or data simulated from `--xdag` at `--delta`.
fn obtain_data(
    op: &Operator,
    y: Option<&str>,
    xdag: Option<&SeqVec>,
    delta: f64,
    seed: u64,
) -> Result<ImageVec, CliError> {
    match (y, xdag) {
        (Some(path), None) => load_data(op, path),
        (None, Some(x)) => {
            Ok(l1rates::experiments::simulate_data(op, x, delta, seed)?)
        }
        (Some(_), Some(_)) => Err(input("pass either --y or --xdag, not both")),
        (None, None) => Err(input("missing data: pass --y <file> or --xdag <reference>")),
    }
}

fn emit(out: Option<&PathBuf>, payload: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{payload}");
            if !payload.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| numerical(format!("serialization failed: {e}")))
}

fn main() -> ExitCode {
    // Parse manually so argument errors exit 1 (invalid input), while
    // --help/--version still exit 0.
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.print().ok();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            e.print().ok();
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            e.print().ok();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_ref())?;
    let seed = settings.pick(cli.seed, "seed")?.unwrap_or(0);
    let format = settings.pick(
        cli.format
            .map(|f| f.parse::<Format>())
            .transpose()
            .map_err(input)?,
        "format",
    )?;
    let out = cli.out.as_ref();

    match cli.command {
        Command::VerifySourceSets {
            operator,
            construction,
            n,
            c,
            depth,
        } => {
            let operator = settings.pick(operator, "operator")?;
            let construction = settings.pick(construction, "construction")?;
            let (_, construction) = resolve_construction(operator, construction)?;
            let c = settings.pick(c, "c")?;
            let sizes = parse_list::<usize>(&settings.need(n, "n")?, "family size")?;
            let depth = settings.pick(depth, "depth")?;
            let ladder = build_ladder(&construction, &sizes, c)?;
            let mut reports: Vec<VerificationReport> = Vec::new();
            for cand in &ladder {
                let rep = match depth {
                    Some(d) => cand.verify_at_depth(d)?,
                    None => cand.verify()?,
                };
                reports.push(rep);
            }
            let payload = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&reports)?,
                Format::Csv => {
                    let mut s =
                        String::from("n,c,depth,cond_i_max_error,max_col_sum,pass\n");
                    for r in &reports {
                        s.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.n, r.c, r.depth, r.cond_i_max_error, r.max_col_sum, r.pass
                        ));
                    }
                    s
                }
                Format::Text => {
                    let mut s = String::new();
                    for r in &reports {
                        s.push_str(&format!(
                            "family n={:<3} c={:<8.6} depth={:<6} identity error {:.3e}  max column sum {:.9}  {}\n",
                            r.n,
                            r.c,
                            r.depth,
                            r.cond_i_max_error,
                            r.max_col_sum,
                            if r.pass { "pass" } else { "FAIL" }
                        ));
                    }
                    s
                }
            };
            emit(out, &payload)?;
            if reports.iter().any(|r| !r.pass) {
                return Err(numerical("source-family verification failed"));
            }
            Ok(())
        }

        Command::ComputePhi {
            xdag,
            construction,
            c,
            n_ladder,
            t,
        } => {
            let construction = settings.need(construction, "construction")?;
            let (_, construction) = resolve_construction(None, Some(construction))?;
            let c = settings.pick(c, "c")?;
            let sizes =
                parse_list::<usize>(&settings.need(n_ladder, "n-ladder")?, "ladder")?;
            let x_dagger = parse_reference(&settings.need(xdag, "xdag")?)?;
            let ts = match settings.pick(t, "t")? {
                Some(raw) => parse_list::<f64>(&raw, "argument")?,
                // Default: 25-point log grid on [1e-6, 1].
                None => (0..25)
                    .map(|i| 10f64.powf(-6.0 + 6.0 * i as f64 / 24.0))
                    .collect(),
            };
            let ladder = build_ladder(&construction, &sizes, c)?;
            let profile = RateProfile::build(&ladder, &x_dagger)?;

            #[derive(Serialize)]
            struct PhiRow {
                t: f64,
                phi: f64,
                active_n: usize,
            }
            #[derive(Serialize)]
            struct PhiOut {
                c: f64,
                beta: f64,
                rows: Vec<PhiRow>,
            }
            let mut rows = Vec::new();
            for &t in &ts {
                rows.push(PhiRow {
                    t,
                    phi: profile.phi(t)?,
                    active_n: profile.active_rung(t)?.n,
                });
            }
            let outv = PhiOut {
                c: profile.c(),
                beta: profile.beta(),
                rows,
            };
            let payload = match format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&outv)?,
                Format::Csv => {
                    let mut s = String::from("t,phi\n");
                    for r in &outv.rows {
                        s.push_str(&format!("{},{}\n", r.t, r.phi));
                    }
                    s
                }
                Format::Text => {
                    let mut s = format!(
                        "interference constant c = {}\nrate exponent beta = {}\n",
                        outv.c, outv.beta
                    );
                    for r in &outv.rows {
                        s.push_str(&format!(
                            "phi({}) = {}  (active family size {})\n",
                            r.t, r.phi, r.active_n
                        ));
                    }
                    s
                }
            };
            emit(out, &payload)
        }

        Command::CheckVie {
            xdag,
            construction,
            c,
            n_ladder,
            beta,
            samples,
        } => {
            let construction = settings.need(construction, "construction")?;
            let (_, construction) = resolve_construction(None, Some(construction))?;
            let c = settings.pick(c, "c")?;
            let sizes =
                parse_list::<usize>(&settings.need(n_ladder, "n-ladder")?, "ladder")?;
            let x_dagger = parse_reference(&settings.need(xdag, "xdag")?)?;
            let samples = settings.pick(samples, "samples")?.unwrap_or(1000);
            if samples == 0 {
                return Err(input("--samples must be at least 1"));
            }
            let ladder = build_ladder(&construction, &sizes, c)?;
            let profile = RateProfile::build(&ladder, &x_dagger)?;
            let beta = settings.pick(beta, "beta")?.unwrap_or(profile.beta());

            // Random candidates around the reference: dimensions up to
            // 96, entries uniform in [-2, 2].
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut min_margin = f64::INFINITY;
            let mut mean_margin = 0.0;
            for _ in 0..samples {
                let dim = rng.random_range(1..=96);
                let x = SeqVec::new(
                    (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect(),
                )?;
                // Shift the certified margin to the requested exponent.
                let margin = profile.vie_margin(&x)?
                    + (profile.beta() - beta) * x.sub(&x_dagger).norm_l1();
                min_margin = min_margin.min(margin);
                mean_margin += margin / samples as f64;
            }
            let pass = min_margin >= MARGIN_FLOOR;

            #[derive(Serialize)]
            struct VieOut {
                beta: f64,
                certified_beta: f64,
                samples: usize,
                min_margin: f64,
                mean_margin: f64,
                pass: bool,
            }
            let outv = VieOut {
                beta,
                certified_beta: profile.beta(),
                samples,
                min_margin,
                mean_margin,
                pass,
            };
            let payload = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&outv)?,
                Format::Csv => format!(
                    "beta,certified_beta,samples,min_margin,mean_margin,pass\n{},{},{},{},{},{}\n",
                    outv.beta,
                    outv.certified_beta,
                    outv.samples,
                    outv.min_margin,
                    outv.mean_margin,
                    outv.pass
                ),
                Format::Text => format!(
                    "beta = {} (certified {})\nsamples = {}\nmin margin = {}\nmean margin = {}\n{}\n",
                    outv.beta,
                    outv.certified_beta,
                    outv.samples,
                    outv.min_margin,
                    outv.mean_margin,
                    if pass { "pass" } else { "FAIL" }
                ),
            };
            emit(out, &payload)?;
            if pass {
                Ok(())
            } else {
                Err(numerical(format!(
                    "variational-inequality margin {min_margin} below {MARGIN_FLOOR} at beta = {beta}"
                )))
            }
        }

        Command::Solve {
            operator,
            y,
            xdag,
            delta,
            alpha,
            dim,
            tol,
            max_iters,
        } => {
            let op = parse_operator(&settings.need(operator, "operator")?)?;
            let y = settings.pick(y, "y")?;
            let xdag = settings.pick(xdag, "xdag")?;
            let x_dagger = xdag.map(|s| parse_reference(&s)).transpose()?;
            let delta = settings.pick(delta, "delta")?.unwrap_or(0.0);
            let alpha = settings.need(alpha, "alpha")?;
            let dim = settings.need(dim, "dim")?;
            let opts = solve_options(&settings, tol, max_iters)?;
            let data = obtain_data(&op, y.as_deref(), x_dagger.as_ref(), delta, seed)?;
            let res = solve_l1_tikhonov(&op, &data, alpha, dim, None, &opts)?;

            #[derive(Serialize)]
            struct SolveOut {
                alpha: f64,
                iterations: usize,
                converged: bool,
                objective: f64,
                residual: f64,
                optimality_residual: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                l1_error: Option<f64>,
                x: Vec<f64>,
            }
            let outv = SolveOut {
                alpha,
                iterations: res.iterations,
                converged: res.converged,
                objective: res.objective,
                residual: res.residual_norm,
                optimality_residual: res.optimality_residual,
                l1_error: x_dagger.as_ref().map(|x| res.x.sub(x).norm_l1()),
                x: res.x.values().to_vec(),
            };
            let payload = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&outv)?,
                Format::Csv => res.x.to_csv(),
                Format::Text => format!(
                    "alpha = {alpha}\niterations = {}\nconverged = {}\nobjective = {}\nresidual = {}\noptimality residual = {}\n",
                    outv.iterations,
                    outv.converged,
                    outv.objective,
                    outv.residual,
                    outv.optimality_residual
                ),
            };
            emit(out, &payload)
        }

        Command::SelectAlpha {
            operator,
            y,
            xdag,
            delta,
            dim,
            tau,
            ratio,
            count,
            alpha0,
            tol,
            max_iters,
        } => {
            let op = parse_operator(&settings.need(operator, "operator")?)?;
            let y = settings.pick(y, "y")?;
            let xdag = settings.pick(xdag, "xdag")?;
            let x_dagger = xdag.map(|s| parse_reference(&s)).transpose()?;
            let delta = settings.need(delta, "delta")?;
            let dim = settings.need(dim, "dim")?;
            let grid = grid_options(&settings, tau, ratio, count, alpha0)?;
            let opts = solve_options(&settings, tol, max_iters)?;
            let data = obtain_data(&op, y.as_deref(), x_dagger.as_ref(), delta, seed)?;
            let sel = select_alpha_discrepancy(&op, &data, delta, dim, &grid, &opts)
                .map_err(|e| match e {
                    l1rates::Error::GridExhausted {
                        best_residual,
                        bound,
                    } => numerical(format!(
                        "weight grid exhausted: best residual {best_residual} never reached the bound {bound}"
                    )),
                    other => CliError::from(other),
                })?;

            #[derive(Serialize)]
            struct SelectOut {
                alpha: f64,
                index: usize,
                bound: f64,
                residual: f64,
                #[serde(skip_serializing_if = "Option::is_none")]
                l1_error: Option<f64>,
                total_iterations: usize,
                converged: bool,
            }
            let outv = SelectOut {
                alpha: sel.alpha,
                index: sel.index,
                bound: sel.bound,
                residual: sel.result.residual_norm,
                l1_error: x_dagger.as_ref().map(|x| sel.result.x.sub(x).norm_l1()),
                total_iterations: sel.total_iterations,
                converged: sel.result.converged,
            };
            let payload = match format.unwrap_or(Format::Json) {
                Format::Json => to_json(&outv)?,
                Format::Csv => format!(
                    "alpha,index,bound,residual,total_iterations,converged\n{},{},{},{},{},{}\n",
                    outv.alpha,
                    outv.index,
                    outv.bound,
                    outv.residual,
                    outv.total_iterations,
                    outv.converged
                ),
                Format::Text => format!(
                    "selected alpha = {} (grid index {})\nresidual = {} <= bound {}\ntotal iterations = {}\n",
                    outv.alpha, outv.index, outv.residual, outv.bound, outv.total_iterations
                ),
            };
            emit(out, &payload)
        }

        Command::Sweep {
            operator,
            xdag,
            deltas,
            dim,
            n_ladder,
            c,
            tau,
            ratio,
            count,
            alpha0,
            tol,
            max_iters,
        } => {
            let op = parse_operator(&settings.need(operator, "operator")?)?;
            let x_dagger = parse_reference(&settings.need(xdag, "xdag")?)?;
            let deltas =
                parse_list::<f64>(&settings.need(deltas, "deltas")?, "noise level")?;
            let dim = settings.pick(dim, "dim")?.unwrap_or(DEFAULT_SWEEP_DIM);
            let ladder_sizes = settings.pick(n_ladder, "n-ladder")?;
            let c = settings.pick(c, "c")?;
            let cfg = SweepConfig {
                deltas,
                truncation: dim,
                grid: grid_options(&settings, tau, ratio, count, alpha0)?,
                solve: solve_options(&settings, tol, max_iters)?,
                seed,
            };

            let report = match ladder_sizes {
                Some(raw) => {
                    let sizes = parse_list::<usize>(&raw, "ladder")?;
                    let construction = match op.name() {
                        "bidiagonal" => "bidiagonal",
                        "haar-integration" => "haar",
                        other => {
                            return Err(input(format!(
                                "no source-family construction for operator {other:?}"
                            )))
                        }
                    };
                    let ladder = build_ladder(construction, &sizes, c)?;
                    let profile = RateProfile::build(&ladder, &x_dagger)?;
                    run_rate_sweep(&SweepTarget::Certified(&profile), &cfg)?
                }
                None => run_rate_sweep(
                    &SweepTarget::Plain {
                        op: &op,
                        x_dagger: &x_dagger,
                    },
                    &cfg,
                )?,
            };
            let payload = match format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&report)?,
                Format::Csv => report.to_csv(),
                Format::Text => {
                    let mut s = String::from(
                        "delta        alpha        l1_error     residual     phi(delta)   iters  status\n",
                    );
                    for r in &report.rows {
                        s.push_str(&format!(
                            "{:<12.6e} {:<12.6e} {:<12.6e} {:<12.6e} {:<12.6e} {:<6} {}\n",
                            r.delta,
                            r.alpha,
                            r.l1_error,
                            r.residual,
                            r.phi_delta,
                            r.iterations,
                            r.status
                        ));
                    }
                    s
                }
            };
            emit(out, &payload)?;
            // All rows exhausting the weight grid is a numerical failure.
            if report
                .rows
                .iter()
                .all(|r| r.status == l1rates::experiments::RowStatus::GridExhausted)
            {
                return Err(numerical(
                    "every sweep row exhausted the weight grid",
                ));
            }
            Ok(())
        }

        Command::Beta1Demo { operator, xdag, n } => {
            let op = parse_operator(&settings.need(operator, "operator")?)?;
            let x_dagger = parse_reference(&settings.need(xdag, "xdag")?)?;
            let ns = parse_list::<usize>(&settings.need(n, "n")?, "depth")?;
            let report = run_beta1_demo(&op, &x_dagger, &ns)?;
            let payload = match format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&report)?,
                Format::Csv => report.to_csv(),
                Format::Text => {
                    let mut s = String::from("n      gap          image distance  ratio\n");
                    for r in &report.rows {
                        s.push_str(&format!(
                            "{:<6} {:<12.6} {:<15.6e} {:.6}\n",
                            r.n, r.gap, r.image_distance, r.ratio
                        ));
                    }
                    s
                }
            };
            emit(out, &payload)
        }
    }
}

fn solve_options(
    settings: &Settings,
    tol: Option<f64>,
    max_iters: Option<usize>,
) -> Result<SolveOptions, CliError> {
    let mut opts = SolveOptions::default();
    if let Some(t) = settings.pick(tol, "tol")? {
        opts.tolerance = t;
    }
    if let Some(m) = settings.pick(max_iters, "max-iters")? {
        opts.max_iterations = m;
    }
    Ok(opts)
}

fn grid_options(
    settings: &Settings,
    tau: Option<f64>,
    ratio: Option<f64>,
    count: Option<usize>,
    alpha0: Option<f64>,
) -> Result<GridOptions, CliError> {
    let mut grid = GridOptions::default();
    if let Some(t) = settings.pick(tau, "tau")? {
        grid.tau = t;
    }
    if let Some(r) = settings.pick(ratio, "ratio")? {
        grid.ratio = r;
    }
    if let Some(c) = settings.pick(count, "count")? {
        grid.count = c;
    }
    grid.alpha0 = settings.pick(alpha0, "alpha0")?;
    Ok(grid)
}
