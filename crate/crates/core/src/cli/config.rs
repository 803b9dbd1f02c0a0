//! Run settings merged from defaults, a flat `key=value` file, and flags.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::lowrank::{SvdBackend, SvdOptions};
use crate::solver::{ProxCenter, SolverConfig};

/// Default `(n, rank, samples)` triples for `bench`, from 51 up to 5001.
pub const DEFAULT_BENCH_DIMS: [(usize, usize, usize); 8] = [
    (51, 1, 10),
    (51, 3, 20),
    (101, 5, 40),
    (501, 5, 100),
    (2501, 13, 500),
    (2501, 25, 1000),
    (5001, 20, 1000),
    (5001, 31, 2000),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub rank: usize,
    pub samples: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub threads: Option<usize>,
    pub strict: bool,
    pub trials: usize,
    pub ranks: Vec<usize>,
    pub sample_counts: Vec<usize>,
    pub dims: Vec<(usize, usize, usize)>,
    pub repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 64,
            rank: 2,
            samples: 30,
            seed: 0,
            solver: SolverConfig::default(),
            threads: None,
            strict: false,
            trials: 100,
            ranks: (1..=10).collect(),
            sample_counts: (1..=12).map(|i| 10 * i).collect(),
            dims: DEFAULT_BENCH_DIMS.to_vec(),
            repeats: 3,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("{key}: cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::InvalidArgument(format!(
            "{key}: expected a boolean, got `{other}`"
        ))),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_dims(key: &str, value: &str) -> Result<Vec<(usize, usize, usize)>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidArgument(format!(
                    "{key}: expected n:rank:samples, got `{item}`"
                )));
            }
            Ok((
                parse(key, parts[0])?,
                parse(key, parts[1])?,
                parse(key, parts[2])?,
            ))
        })
        .collect()
}

impl RunConfig {
    /// Applies one setting. Keys use underscores; dashes are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        match k {
            "n" => self.n = parse(k, value)?,
            "rank" => {
                self.rank = parse(k, value)?;
                self.solver.rank = self.rank;
            }
            "samples" => self.samples = parse(k, value)?,
            "seed" => self.seed = parse(k, value)?,
            "delta1" => self.solver.delta1 = parse(k, value)?,
            "delta2" => self.solver.delta2 = parse(k, value)?,
            "tol" => self.solver.tol = parse(k, value)?,
            "max_iter" => self.solver.max_iter = parse(k, value)?,
            "accelerated" => self.solver.accelerated = parse_bool(k, value)?,
            "restart" => self.solver.restart = parse_bool(k, value)?,
            "prox_center" => {
                self.solver.prox_center = match value.trim() {
                    "extrapolated" => ProxCenter::Extrapolated,
                    "previous" => ProxCenter::Previous,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "prox_center: expected extrapolated or previous, got `{other}`"
                        )))
                    }
                }
            }
            "bound" => {
                self.solver.bound = match value.trim() {
                    "" | "none" => None,
                    v => Some(parse(k, v)?),
                }
            }
            "threads" => self.threads = Some(parse(k, value)?),
            "strict" => self.strict = parse_bool(k, value)?,
            "trials" => self.trials = parse(k, value)?,
            "ranks" => self.ranks = parse_list(k, value)?,
            "sample_counts" => self.sample_counts = parse_list(k, value)?,
            "dims" => self.dims = parse_dims(k, value)?,
            "repeats" => self.repeats = parse(k, value)?,
            "svd_tol" => self.solver.svd.tol = parse(k, value)?,
            "svd_seed" => self.solver.svd.seed = parse(k, value)?,
            "dense_threshold" => self.solver.svd.dense_threshold = parse(k, value)?,
            "svd_backend" => {
                self.solver.svd.backend = match value.trim() {
                    "auto" => SvdBackend::Auto,
                    "dense" => SvdBackend::Dense,
                    "lanczos" => SvdBackend::Lanczos,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "svd_backend: expected auto, dense or lanczos, got `{other}`"
                        )))
                    }
                }
            }
            _ => return Err(Error::InvalidArgument(format!("unknown setting `{k}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key=value` text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: format!("expected key=value, found `{line}`"),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Defaults, then the config file (if any), then flags.
    pub fn resolve(file: Option<&Path>, flags: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: 0,
                msg: e.to_string(),
            })?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        for (k, v) in flags {
            cfg.set(k, v)?;
        }
        cfg.solver.rank = cfg.rank;
        Ok(cfg)
    }

    pub fn svd(&self) -> &SvdOptions {
        &self.solver.svd
    }
}
