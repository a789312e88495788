//! `entb`: concurrence lower bounds for bipartite quantum states from the
//! PPT, CCNR, local-uncertainty, and correlation-matrix separability
//! criteria.
//!
//! Exit codes: 0 on success, 1 on usage/IO/parse errors, 2 when a state
//! fails the density-matrix invariants.

use std::collections::BTreeMap;
use std::env;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entb_core::bounds::{best_bound, optimize_loos_traced, OptimizerConfig, PairStrategy};
use entb_core::error::Error;
use entb_core::io::{read_pair, read_state, write_pair};
use entb_core::qstate::{
    density_diagnostics, family_reference_pure, family_sweep_param, make_family, DensityMatrix,
};
use entb_core::sweep::{rows_to_csv, sweep_rows};
use entb_core::tol;

#[derive(Parser)]
#[command(
    name = "entb",
    version,
    about = "Lower bounds on the concurrence of bipartite quantum states",
    long_about = "Computes analytical lower bounds on the concurrence from violations of the \
                  PPT, CCNR, local-uncertainty (LUR), and correlation-matrix (CM) separability \
                  criteria, including a stochastic search over local orthogonal observables.\n\
                  Set ENTB_THREADS to cap worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StateSource {
    /// Path to a state file `{"dims":[m,n],"matrix":[[re,im],...]}`
    #[arg(long, value_name = "PATH")]
    state: Option<PathBuf>,
    /// Family spec `name[:key=value,...]`, e.g. `bell:M=2`, `figure1:p=0.5`,
    /// `tiles_upb`, `isotropic:M=3,F=0.8`, `random_ginibre:M=3,N=3,seed=7`
    #[arg(long, value_name = "SPEC")]
    family: Option<String>,
}

#[derive(Args)]
struct LooFlags {
    /// Observable strategy: standard | lemma1 | lemma1-psi | isotropic |
    /// optimize | file=<path>
    #[arg(long, default_value = "lemma1", value_name = "STRATEGY")]
    loo: String,
    /// RNG seed for `--loo optimize`
    #[arg(long)]
    seed: Option<u64>,
    /// Optimizer restarts
    #[arg(long)]
    restarts: Option<usize>,
    /// Optimizer steps per restart
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print validation diagnostics, criterion values, and all bounds
    Info {
        #[command(flatten)]
        source: StateSource,
        #[command(flatten)]
        loo: LooFlags,
    },
    /// Sweep a family parameter and write per-point bounds as CSV
    Sweep(SweepArgs),
    /// Search for observable sets maximizing the uncertainty bound
    Optimize {
        #[command(flatten)]
        source: StateSource,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        /// Write the winning observable pair to this path
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Check a state file against the density-matrix invariants
    Validate {
        /// Path to the state file
        path: PathBuf,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Family spec with fixed parameters, e.g. `figure1` or `isotropic:M=3`
    #[arg(long, value_name = "SPEC")]
    family: String,
    /// Parameter to sweep; defaults to the family's natural one
    #[arg(long, value_name = "NAME")]
    param: Option<String>,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    /// Number of grid points (inclusive endpoints)
    #[arg(long)]
    steps: usize,
    /// Observable strategy (as in `info`)
    #[arg(long, default_value = "lemma1", value_name = "STRATEGY")]
    loo: String,
    /// Seed for `--loo optimize`
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(Error::Validation(_)) => 2,
            CliError::Core(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => msg.clone(),
            CliError::Core(err) => err.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Core(err)
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    if let Ok(value) = env::var("ENTB_THREADS") {
        if let Ok(threads) = value.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

/// Parses `name[:key=value,...]` with case-insensitive keys.
fn parse_family_spec(spec: &str) -> CliResult<(String, BTreeMap<String, String>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((name, rest)) => (name, Some(rest)),
        None => (spec, None),
    };
    if name.is_empty() {
        return Err(CliError::Usage("empty family name".into()));
    }
    let mut params = BTreeMap::new();
    if let Some(rest) = rest {
        for item in rest.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("bad family parameter `{item}` (expected key=value)"))
            })?;
            params.insert(key.trim().to_lowercase(), value.trim().to_string());
        }
    }
    Ok((name.to_string(), params))
}

struct LoadedState {
    rho: DensityMatrix,
    /// `(name, params)` when built from a family spec.
    family: Option<(String, BTreeMap<String, String>)>,
    description: String,
}

fn load_state(source: &StateSource) -> CliResult<LoadedState> {
    match (&source.state, &source.family) {
        (Some(path), None) => {
            let rho = read_state(path)?;
            Ok(LoadedState {
                rho,
                family: None,
                description: format!("file {}", path.display()),
            })
        }
        (None, Some(spec)) => {
            let (name, params) = parse_family_spec(spec)?;
            let rho = make_family(&name, &params)?;
            Ok(LoadedState {
                rho,
                family: Some((name, params)),
                description: format!("family {spec}"),
            })
        }
        _ => Err(CliError::Usage(
            "exactly one of --state <path> or --family <spec> is required".into(),
        )),
    }
}

fn optimizer_config(seed: Option<u64>, restarts: Option<usize>, steps: Option<usize>) -> OptimizerConfig {
    let defaults = OptimizerConfig::default();
    OptimizerConfig {
        restarts: restarts.unwrap_or(defaults.restarts),
        steps_per_restart: steps.unwrap_or(defaults.steps_per_restart),
        seed: seed.unwrap_or(defaults.seed),
        ..defaults
    }
}

fn resolve_strategy(
    loo: &str,
    family: Option<&(String, BTreeMap<String, String>)>,
    cfg: OptimizerConfig,
) -> CliResult<PairStrategy> {
    match loo {
        "standard" => Ok(PairStrategy::Standard),
        "lemma1" => Ok(PairStrategy::SchmidtOfDominant),
        "lemma1-psi" => {
            let (name, params) = family.ok_or_else(|| {
                CliError::Usage("--loo lemma1-psi needs --family (it adapts to the family's reference pure state)".into())
            })?;
            let psi = family_reference_pure(name, params)?.ok_or_else(|| {
                CliError::Usage(format!(
                    "family `{name}` has no reference pure state; use --loo lemma1"
                ))
            })?;
            Ok(PairStrategy::SchmidtOfPure(psi))
        }
        "isotropic" => Ok(PairStrategy::Isotropic),
        "optimize" => Ok(PairStrategy::Optimize(cfg)),
        other => match other.strip_prefix("file=") {
            Some(path) => Ok(PairStrategy::Explicit(read_pair(&PathBuf::from(path))?)),
            None => Err(CliError::Usage(format!(
                "unknown --loo strategy `{other}` (expected standard | lemma1 | lemma1-psi | \
                 isotropic | optimize | file=<path>)"
            ))),
        },
    }
}

fn detected(flag: bool) -> &'static str {
    if flag {
        "yes"
    } else {
        "no"
    }
}

fn cmd_info(source: StateSource, loo: LooFlags) -> CliResult<()> {
    let loaded = load_state(&source)?;
    let rho = &loaded.rho;
    let dims = rho.dims();
    let cfg = optimizer_config(loo.seed, loo.restarts, loo.steps);
    let strategy = resolve_strategy(&loo.loo, loaded.family.as_ref(), cfg)?;
    let report = best_bound(rho, &strategy)?;

    let diag = density_diagnostics(rho.mat(), dims.m(), dims.n())?;
    println!("state: {}", loaded.description);
    println!(
        "dims: {}x{}  subsystems swapped: {}",
        dims.m(),
        dims.n(),
        if rho.swapped() { "yes" } else { "no" }
    );
    println!(
        "validation: ok (hermiticity defect {:.2e}, trace defect {:.2e}, min eigenvalue {:.2e})",
        diag.hermiticity_defect, diag.trace_defect, diag.min_eigenvalue
    );
    println!("criteria:");
    println!(
        "  ppt   ||T_A(rho)|| = {:.9}  threshold 1  detected: {}",
        report.ppt_value,
        detected(report.ppt_value > 1.0 + tol::DETECT)
    );
    println!(
        "  ccnr  ||R(rho)||   = {:.9}  threshold 1  detected: {}",
        report.ccnr_value,
        detected(report.ccnr_value > 1.0 + tol::DETECT)
    );
    println!(
        "  cm    ||T||        = {:.9}  threshold K = {:.9}  detected: {}",
        report.cm_norm,
        report.cm_threshold,
        detected(report.cm_norm > report.cm_threshold + tol::DETECT)
    );
    println!(
        "  lur   sum of variances = {:.9}  threshold m+n-2 = {}  detected: {}  [strategy: {}]",
        report.lur_sum,
        report.lur_threshold,
        detected(report.lur_sum < report.lur_threshold - tol::DETECT),
        loo.loo
    );
    println!("bounds (raw -> clamped):");
    println!("  ppt            {:>12.9} -> {:.9}", report.ppt_raw, report.ppt);
    println!("  ccnr           {:>12.9} -> {:.9}", report.ccnr_raw, report.ccnr);
    println!(
        "  rearrangement  {:>12.9} -> {:.9}",
        report.rearrangement_raw, report.rearrangement
    );
    println!("  lur            {:>12.9} -> {:.9}", report.lur_raw, report.lur);
    println!("  cm             {:>12.9} -> {:.9}", report.cm_raw, report.cm);
    println!("best lower bound on concurrence: {:.9}", report.best);
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    let (name, base_params) = parse_family_spec(&args.family)?;
    let param = match args.param {
        Some(p) => p.to_lowercase(),
        None => family_sweep_param(&name)
            .ok_or_else(|| {
                CliError::Core(Error::UnknownParam(format!(
                    "family `{name}` has no sweepable parameter"
                )))
            })?
            .to_string(),
    };
    let cfg = optimizer_config(args.seed, None, None);
    let family_info = Some((name.clone(), base_params.clone()));
    let strategy = resolve_strategy(&args.loo, family_info.as_ref(), cfg)?;
    let rows = sweep_rows(&name, &base_params, &param, args.from, args.to, args.steps, &strategy)?;
    fs::write(&args.out, rows_to_csv(&rows)).map_err(Error::from)?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn cmd_optimize(
    source: StateSource,
    seed: Option<u64>,
    restarts: Option<usize>,
    steps: Option<usize>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let loaded = load_state(&source)?;
    let cfg = optimizer_config(seed, restarts, steps);
    let outcome = optimize_loos_traced(&loaded.rho, &cfg)?;
    println!(
        "state: {}  dims: {}x{}",
        loaded.description,
        loaded.rho.dims().m(),
        loaded.rho.dims().n()
    );
    println!(
        "optimizer: {} restarts x {} steps, seed {}",
        cfg.restarts, cfg.steps_per_restart, cfg.seed
    );
    for report in &outcome.per_restart {
        println!(
            "restart {:>3}  seed {:<16}  start {:>12.9}  best {:>12.9}",
            report.restart + 1,
            report.seed_label,
            report.start_bound,
            report.best_bound
        );
    }
    let rearr = entb_core::bounds::rearrangement_bound(&loaded.rho);
    println!("global best: {:.9} ({})", outcome.bound, outcome.winner);
    println!("rearrangement bound for comparison: {:.9}", rearr);
    if let Some(path) = out {
        write_pair(&path, &outcome.pair)?;
        println!("wrote winning pair to {}", path.display());
    }
    Ok(())
}

fn cmd_validate(path: PathBuf) -> CliResult<()> {
    let text = fs::read_to_string(&path).map_err(Error::from)?;
    let file = entb_core::io::state_file_from_json(&text)?;
    let [m, n] = file.dims;
    if m < 2 || n < 2 {
        return Err(CliError::Core(Error::Parse(format!("bad dims [{m}, {n}]"))));
    }
    let d = m * n;
    if file.matrix.len() != d * d {
        return Err(CliError::Core(Error::Parse(format!(
            "matrix has {} entries, expected {}",
            file.matrix.len(),
            d * d
        ))));
    }
    let mat = entb_core::matrix::CMatrix::from_fn(d, d, |i, j| {
        let [re, im] = file.matrix[i * d + j];
        entb_core::matrix::c(re, im)
    });
    let diag = density_diagnostics(&mat, m, n)?;
    let line = |label: &str, ok: bool, detail: String| {
        println!("{label:<12} {}  ({detail})", if ok { "PASS" } else { "FAIL" });
    };
    line(
        "hermitian:",
        diag.hermitian_ok(),
        format!("defect {:.1e}, tol {:.0e}", diag.hermiticity_defect, tol::HERM),
    );
    line(
        "unit trace:",
        diag.trace_ok(),
        format!("TraceNotOne {:.1e}, tol {:.0e}", diag.trace_defect, tol::TRACE),
    );
    line(
        "psd:",
        diag.psd_ok(),
        format!("min eigenvalue {:.1e}, floor -{:.0e}", diag.min_eigenvalue, tol::PSD),
    );
    if diag.is_valid() {
        println!("state is a valid density matrix");
        Ok(())
    } else {
        // Reuse the library constructor for the canonical violation list.
        match DensityMatrix::new(mat, m, n) {
            Err(err) => Err(CliError::Core(err)),
            Ok(_) => unreachable!("diagnostics and validation disagree"),
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Info { source, loo } => cmd_info(source, loo),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Optimize { source, seed, restarts, steps, out } => {
            cmd_optimize(source, seed, restarts, steps, out)
        }
        Command::Validate { path } => cmd_validate(path),
    }
}
