//! Command-line harness: `synth`, `solve`, `phase`, `bench`, `compare`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 solver did not
//! converge (only with `--strict`).

pub mod config;
pub mod experiments;
pub mod io;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::hankel::{HankelVector, ObservationSet};
use crate::signal::{
    extract_frequencies, random_observations, relative_error, seeded_rng, SampleInstance,
};
use crate::solver::Solver;
use config::RunConfig;
use experiments::{
    bench_csv, compare_csv, compare_summary_csv, phase_csv, run_bench, run_compare, run_phase,
    ExperimentGrid,
};
use io::fmt_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pwgd",
    version,
    about = "Spectrally sparse signal recovery by projected Wirtinger gradient descent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random spectrally sparse signal and a sample set.
    Synth(Common),
    /// Recover one signal from samples.
    Solve(SolveArgs),
    /// Monte Carlo success-rate map over (rank, samples).
    Phase(PhaseArgs),
    /// Wall-clock scaling over problem dimensions.
    Bench(BenchArgs),
    /// Plain versus accelerated convergence on one instance.
    Compare(Common),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Hankel dimension; signals have length 2n-1.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Number of observed samples M.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Use the FISTA-style accelerated iteration.
    #[arg(long)]
    pub accelerated: bool,
    /// Keep the momentum running even when a step opposes it.
    #[arg(long = "no-restart")]
    pub no_restart: bool,
    /// Magnitude cap on unobserved entries.
    #[arg(long)]
    pub bound: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Exit with code 3 when the solver hits max-iter.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Flat key=value settings file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    fn flags(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut push = |k: &str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k.to_string(), val));
            }
        };
        push("n", self.n.map(|x| x.to_string()));
        push("rank", self.rank.map(|x| x.to_string()));
        push("samples", self.samples.map(|x| x.to_string()));
        push("seed", self.seed.map(|x| x.to_string()));
        push("delta1", self.delta1.map(|x| x.to_string()));
        push("delta2", self.delta2.map(|x| x.to_string()));
        push("tol", self.tol.map(|x| x.to_string()));
        push("max_iter", self.max_iter.map(|x| x.to_string()));
        push("accelerated", self.accelerated.then(|| "true".into()));
        push("restart", self.no_restart.then(|| "false".into()));
        push("bound", self.bound.map(|x| x.to_string()));
        push("threads", self.threads.map(|x| x.to_string()));
        push("strict", self.strict.then(|| "true".into()));
        v
    }

    fn resolve(&self, extra: Vec<(String, String)>) -> Result<RunConfig, CliError> {
        let mut flags = self.flags();
        flags.extend(extra);
        RunConfig::resolve(self.config.as_deref(), &flags).map_err(|e| match e {
            Error::Parse { .. } => CliError::Input(e),
            other => CliError::Usage(other.to_string()),
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Full signal file (t,re,im); samples are drawn from it.
    #[arg(long, conflicts_with = "observations")]
    pub signal: Option<PathBuf>,
    /// Observed samples file (t,re,im); requires --n.
    #[arg(long)]
    pub observations: Option<PathBuf>,
    /// Ground truth for error reporting when solving from --observations.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated ranks.
    #[arg(long)]
    pub ranks: Option<String>,
    /// Comma-separated sample counts.
    #[arg(long = "sample-counts")]
    pub sample_counts: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated n:rank:samples triples.
    #[arg(long)]
    pub dims: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(Error),
    NotConverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::NotConverged(_) => EXIT_NOT_CONVERGED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(e) => write!(f, "input error: {e}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
        }
    }
}

fn input(e: Error) -> CliError {
    CliError::Input(e)
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| input(e.into()))?;
    fs::write(dir.join(name), contents).map_err(|e| input(e.into()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("pwgd: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(c) => cmd_synth(&c),
        Command::Solve(a) => cmd_solve(&a),
        Command::Phase(a) => cmd_phase(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Compare(c) => cmd_compare(&c),
    }
}

fn cmd_synth(c: &Common) -> Result<(), CliError> {
    let cfg = c.resolve(Vec::new())?;
    let inst = SampleInstance::generate(cfg.n, cfg.rank, cfg.samples, cfg.seed).map_err(usage)?;
    let mut model = String::from("k,frequency,amp_re,amp_im\n");
    for (k, (f, d)) in inst.model.freqs().iter().zip(inst.model.amps()).enumerate() {
        let _ = writeln!(
            model,
            "{k},{},{},{}",
            fmt_f64(*f),
            fmt_f64(d.re),
            fmt_f64(d.im)
        );
    }
    write_out(&c.out, "model.csv", &model)?;
    write_out(
        &c.out,
        "signal.csv",
        &io::signal_csv(inst.x_true.as_slice().iter().copied().enumerate()),
    )?;
    let obs_rows = inst
        .obs
        .indices()
        .iter()
        .copied()
        .zip(inst.obs.values().iter().copied());
    write_out(&c.out, "observations.csv", &io::signal_csv(obs_rows))?;
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let cfg = a.common.resolve(Vec::new())?;

    // all inputs are read and validated before anything is written
    let (obs, truth): (ObservationSet, Option<HankelVector>) = match (&a.signal, &a.observations) {
        (Some(path), _) => {
            let x = HankelVector::new(io::read_signal(path).map_err(input)?).map_err(input)?;
            let mut rng = seeded_rng(cfg.seed);
            let obs = random_observations(&x, cfg.samples, &mut rng).map_err(usage)?;
            (obs, Some(x))
        }
        (None, Some(path)) => {
            if a.common.n.is_none() && a.common.config.is_none() {
                return Err(CliError::Usage("--observations requires --n".into()));
            }
            let obs = io::read_observations(path, cfg.n).map_err(input)?;
            let truth = match &a.truth {
                Some(t) => {
                    Some(HankelVector::new(io::read_signal(t).map_err(input)?).map_err(input)?)
                }
                None => None,
            };
            (obs, truth)
        }
        (None, None) => {
            let inst =
                SampleInstance::generate(cfg.n, cfg.rank, cfg.samples, cfg.seed).map_err(usage)?;
            (inst.obs, Some(inst.x_true))
        }
    };
    if let Some(t) = &truth {
        if t.n() != obs.n() {
            return Err(CliError::Input(Error::DimensionMismatch {
                expected: obs.n(),
                got: t.n(),
            }));
        }
    }

    let solver = Solver::new(obs.n(), cfg.solver.clone()).map_err(usage)?;
    let result = solver.solve(&obs).map_err(input)?;
    let rel = truth
        .as_ref()
        .map(|t| relative_error(result.z_hat.as_slice(), t.as_slice()))
        .transpose()
        .map_err(input)?;
    let freqs = extract_frequencies(&result.z_hat, cfg.rank);

    write_out(
        &a.common.out,
        "recovered.csv",
        &io::signal_csv(result.z_hat.as_slice().iter().copied().enumerate()),
    )?;
    let mut hist = String::from("iteration,objective,relchange\n");
    for (i, (o, d)) in result
        .objective_history
        .iter()
        .zip(&result.relchange_history)
        .enumerate()
    {
        let _ = writeln!(hist, "{},{},{}", i + 1, fmt_f64(*o), fmt_f64(*d));
    }
    write_out(&a.common.out, "history.csv", &hist)?;

    let mut summary = String::from("key,value\n");
    let _ = writeln!(summary, "n,{}", obs.n());
    let _ = writeln!(summary, "rank,{}", cfg.rank);
    let _ = writeln!(summary, "samples,{}", obs.len());
    let _ = writeln!(summary, "accelerated,{}", cfg.solver.accelerated);
    let _ = writeln!(summary, "iterations,{}", result.iterations);
    let _ = writeln!(summary, "converged,{}", result.converged);
    let final_obj = result
        .objective_history
        .last()
        .copied()
        .unwrap_or(result.initial_objective);
    let _ = writeln!(summary, "final_objective,{}", fmt_f64(final_obj));
    if let Some(r) = rel {
        let _ = writeln!(summary, "relative_error,{}", fmt_f64(r));
    }
    match &freqs {
        Ok(f) => {
            for (i, f) in f.iter().enumerate() {
                let _ = writeln!(summary, "frequency_{i},{}", fmt_f64(*f));
            }
        }
        Err(e) => {
            let _ = writeln!(
                summary,
                "frequency_error,{}",
                e.to_string().replace(',', ";")
            );
        }
    }
    write_out(&a.common.out, "summary.csv", &summary)?;

    if cfg.strict && !result.converged {
        return Err(CliError::NotConverged(format!(
            "stopped after {} iterations",
            result.iterations
        )));
    }
    Ok(())
}

fn cmd_phase(a: &PhaseArgs) -> Result<(), CliError> {
    let mut extra = Vec::new();
    if let Some(t) = a.trials {
        extra.push(("trials".to_string(), t.to_string()));
    }
    if let Some(r) = &a.ranks {
        extra.push(("ranks".to_string(), r.clone()));
    }
    if let Some(m) = &a.sample_counts {
        extra.push(("sample_counts".to_string(), m.clone()));
    }
    let cfg = a.common.resolve(extra)?;
    let grid = ExperimentGrid {
        n: cfg.n,
        ranks: cfg.ranks.clone(),
        sample_counts: cfg.sample_counts.clone(),
        trials: cfg.trials,
        master_seed: cfg.seed,
        solver: cfg.solver.clone(),
    };
    let cells = run_phase(&grid, cfg.threads).map_err(usage)?;
    write_out(&a.common.out, "phase.csv", &phase_csv(&cells))
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let mut extra = Vec::new();
    if let Some(d) = &a.dims {
        extra.push(("dims".to_string(), d.clone()));
    }
    if let Some(r) = a.repeats {
        extra.push(("repeats".to_string(), r.to_string()));
    }
    let cfg = a.common.resolve(extra)?;
    let rows = run_bench(&cfg.dims, &cfg.solver, cfg.repeats, cfg.seed).map_err(usage)?;
    write_out(&a.common.out, "bench.csv", &bench_csv(&rows))?;
    if cfg.strict {
        if let Some(r) = rows.iter().find(|r| !r.converged) {
            return Err(CliError::NotConverged(format!(
                "n={} R={} M={}",
                r.n, r.rank, r.m
            )));
        }
    }
    Ok(())
}

fn cmd_compare(c: &Common) -> Result<(), CliError> {
    let cfg = c.resolve(Vec::new())?;
    let cmp = run_compare(cfg.n, cfg.rank, cfg.samples, cfg.seed, &cfg.solver).map_err(usage)?;
    write_out(&c.out, "compare.csv", &compare_csv(&cmp))?;
    write_out(
        &c.out,
        "compare_summary.csv",
        &compare_summary_csv(&cmp).map_err(input)?,
    )?;
    if cfg.strict && !(cmp.plain.converged && cmp.accelerated.converged) {
        return Err(CliError::NotConverged("comparison run hit max-iter".into()));
    }
    Ok(())
}
