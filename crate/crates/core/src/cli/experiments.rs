//! Monte Carlo phase transitions, dimension scaling timings, and the
//! plain-versus-accelerated convergence comparison.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::io::fmt_f64;
use crate::dense;
use crate::error::{Error, Result};
use crate::signal::{relative_error, SampleInstance};
use crate::solver::{RecoveryResult, Solver, SolverConfig};

/// Relative error at or below which a trial counts as recovered.
pub const SUCCESS_THRESHOLD: f64 = 5e-3;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one Monte Carlo trial, independent of scheduling.
pub fn trial_seed(master: u64, rank: usize, m: usize, trial: usize) -> u64 {
    let mut s = splitmix(master);
    s = splitmix(s ^ rank as u64);
    s = splitmix(s ^ m as u64);
    splitmix(s ^ trial as u64)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t.max(1));
    }
    b.build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub n: usize,
    pub ranks: Vec<usize>,
    pub sample_counts: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub solver: SolverConfig,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        let len = 2 * self.n - 1;
        if self.n < 2 {
            return Err(Error::InvalidArgument("n must be at least 2".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if let Some(m) = self.sample_counts.iter().find(|&&m| m == 0 || m > len) {
            return Err(Error::InvalidArgument(format!(
                "sample count {m} outside 1..={len}"
            )));
        }
        if let Some(r) = self.ranks.iter().find(|&&r| r == 0 || r > self.n) {
            return Err(Error::InvalidArgument(format!(
                "rank {r} outside 1..={}",
                self.n
            )));
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCell {
    pub rank: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Outcome of one seeded recovery.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub instance: SampleInstance,
    pub result: RecoveryResult,
    pub relative_error: f64,
}

impl TrialOutcome {
    pub fn success(&self) -> bool {
        self.relative_error <= SUCCESS_THRESHOLD
    }
}

pub fn run_trial(
    n: usize,
    rank: usize,
    m: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<TrialOutcome> {
    let instance = SampleInstance::generate(n, rank, m, seed)?;
    let cfg = SolverConfig {
        rank,
        ..solver.clone()
    };
    let result = Solver::new(n, cfg)?.solve(&instance.obs)?;
    let relative_error = relative_error(result.z_hat.as_slice(), instance.x_true.as_slice())?;
    Ok(TrialOutcome {
        instance,
        result,
        relative_error,
    })
}

/// Success rates over the `(rank, m)` grid. Cells come out rank-major in the
/// order given; a solve error counts as a failed trial.
pub fn run_phase(grid: &ExperimentGrid, threads: Option<usize>) -> Result<Vec<PhaseCell>> {
    grid.validate()?;
    let jobs: Vec<(usize, usize, usize)> = grid
        .ranks
        .iter()
        .flat_map(|&r| {
            grid.sample_counts
                .iter()
                .flat_map(move |&m| (0..grid.trials).map(move |t| (r, m, t)))
        })
        .collect();
    let outcomes: Vec<bool> = pool(threads)?.install(|| {
        jobs.par_iter()
            .map(|&(r, m, t)| {
                let seed = trial_seed(grid.master_seed, r, m, t);
                match run_trial(grid.n, r, m, seed, &grid.solver) {
                    Ok(o) => o.success(),
                    Err(e) => {
                        eprintln!("trial R={r} M={m} #{t} failed: {e}");
                        false
                    }
                }
            })
            .collect()
    });
    Ok(outcomes
        .chunks(grid.trials)
        .zip(jobs.chunks(grid.trials))
        .map(|(ok, job)| {
            let successes = ok.iter().filter(|&&s| s).count();
            PhaseCell {
                rank: job[0].0,
                m: job[0].1,
                trials: grid.trials,
                successes,
                success_rate: successes as f64 / grid.trials as f64,
            }
        })
        .collect())
}

pub fn phase_csv(cells: &[PhaseCell]) -> String {
    let mut s = String::from("R,M,trials,successes,success_rate\n");
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            c.rank,
            c.m,
            c.trials,
            c.successes,
            fmt_f64(c.success_rate)
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub rank: usize,
    pub m: usize,
    /// Best wall-clock time over the repeats, solve only.
    pub elapsed_seconds: f64,
    pub iterations: usize,
    pub converged: bool,
    pub relative_error: f64,
    /// Scalars held by the final rank-`R` factors.
    pub factor_scalars: usize,
    /// Largest dense square buffer allocated while solving.
    pub max_dense_dim: usize,
}

impl BenchRow {
    pub fn seconds_per_iteration(&self) -> f64 {
        self.elapsed_seconds / self.iterations.max(1) as f64
    }
}

fn timed_solve(
    n: usize,
    rank: usize,
    m: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<(f64, TrialOutcome, usize)> {
    let instance = SampleInstance::generate(n, rank, m, seed)?;
    let s = Solver::new(
        n,
        SolverConfig {
            rank,
            ..solver.clone()
        },
    )?;
    dense::reset_tracker();
    let start = Instant::now();
    let result = s.solve(&instance.obs)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dim = dense::max_dense_dim();
    let relative_error = relative_error(result.z_hat.as_slice(), instance.x_true.as_slice())?;
    Ok((
        elapsed,
        TrialOutcome {
            instance,
            result,
            relative_error,
        },
        dim,
    ))
}

/// Times each `(n, rank, m)` configuration, keeping the minimum of
/// `repeats` runs. A discarded warm-up solve at the smallest size runs first.
pub fn run_bench(
    dims: &[(usize, usize, usize)],
    solver: &SolverConfig,
    repeats: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    if let Some(&(n, r, m)) = dims.iter().min_by_key(|d| d.0) {
        timed_solve(n, r, m, seed, solver)?;
    }
    dims.iter()
        .map(|&(n, rank, m)| {
            let mut best: Option<(f64, TrialOutcome, usize)> = None;
            for _ in 0..repeats.max(1) {
                let run = timed_solve(n, rank, m, seed, solver)?;
                if best.as_ref().is_none_or(|b| run.0 < b.0) {
                    best = Some(run);
                }
            }
            let (elapsed, outcome, max_dense_dim) = best.expect("at least one repeat");
            Ok(BenchRow {
                n,
                rank,
                m,
                elapsed_seconds: elapsed,
                iterations: outcome.result.iterations,
                converged: outcome.result.converged,
                relative_error: outcome.relative_error,
                factor_scalars: outcome.result.factors.storage_scalars(),
                max_dense_dim,
            })
        })
        .collect()
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "n,R,M,elapsed_seconds,seconds_per_iteration,iterations,converged,relative_error,factor_scalars,max_dense_dim\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.rank,
            r.m,
            fmt_f64(r.elapsed_seconds),
            fmt_f64(r.seconds_per_iteration()),
            r.iterations,
            r.converged,
            fmt_f64(r.relative_error),
            r.factor_scalars,
            r.max_dense_dim
        );
    }
    s
}

/// Both solvers on one seeded instance.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub instance: SampleInstance,
    pub plain: RecoveryResult,
    pub accelerated: RecoveryResult,
}

impl Comparison {
    /// Accelerated iterations over plain iterations.
    pub fn iteration_ratio(&self) -> f64 {
        self.accelerated.iterations as f64 / self.plain.iterations.max(1) as f64
    }
}

pub fn run_compare(
    n: usize,
    rank: usize,
    m: usize,
    seed: u64,
    solver: &SolverConfig,
) -> Result<Comparison> {
    let instance = SampleInstance::generate(n, rank, m, seed)?;
    let run = |accelerated| {
        Solver::new(
            n,
            SolverConfig {
                rank,
                accelerated,
                ..solver.clone()
            },
        )?
        .solve(&instance.obs)
    };
    let plain = run(false)?;
    let accelerated = run(true)?;
    Ok(Comparison {
        instance,
        plain,
        accelerated,
    })
}

/// Aligned per-iteration log. Row 0 holds the shared starting objective;
/// a solver that stopped earlier leaves its columns empty.
pub fn compare_csv(c: &Comparison) -> String {
    let mut s =
        String::from("iteration,pwgd_objective,pwgd_relchange,fista_objective,fista_relchange\n");
    let _ = writeln!(
        s,
        "0,{},,{},",
        fmt_f64(c.plain.initial_objective),
        fmt_f64(c.accelerated.initial_objective)
    );
    let rows = c.plain.iterations.max(c.accelerated.iterations);
    let cell = |r: &RecoveryResult, i: usize| match (
        r.objective_history.get(i),
        r.relchange_history.get(i),
    ) {
        (Some(o), Some(d)) => format!("{},{}", fmt_f64(*o), fmt_f64(*d)),
        _ => ",".to_string(),
    };
    for i in 0..rows {
        let _ = writeln!(
            s,
            "{},{},{}",
            i + 1,
            cell(&c.plain, i),
            cell(&c.accelerated, i)
        );
    }
    s
}

pub fn compare_summary_csv(c: &Comparison) -> Result<String> {
    let mut s = String::from("solver,iterations,converged,final_objective,relative_error\n");
    for (name, r) in [("pwgd", &c.plain), ("pwgd-fista", &c.accelerated)] {
        let err = relative_error(r.z_hat.as_slice(), c.instance.x_true.as_slice())?;
        let _ = writeln!(
            s,
            "{name},{},{},{},{}",
            r.iterations,
            r.converged,
            fmt_f64(
                r.objective_history
                    .last()
                    .copied()
                    .unwrap_or(r.initial_objective)
            ),
            fmt_f64(err)
        );
    }
    Ok(s)
}
