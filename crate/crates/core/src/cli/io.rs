//! CSV reading and writing.
//!
//! Every file has a header row, LF line endings, and floats written with 17
//! significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hankel::ObservationSet;
use crate::C64;

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rows of `t,re,im`.
pub fn signal_csv(rows: impl IntoIterator<Item = (usize, C64)>) -> String {
    let mut s = String::from("t,re,im\n");
    for (t, x) in rows {
        let _ = writeln!(s, "{t},{},{}", fmt_f64(x.re), fmt_f64(x.im));
    }
    s
}

pub fn write_signal(path: &Path, x: &[C64]) -> Result<()> {
    fs::write(path, signal_csv(x.iter().copied().enumerate()))?;
    Ok(())
}

pub fn write_observations(path: &Path, obs: &ObservationSet) -> Result<()> {
    let rows = obs
        .indices()
        .iter()
        .copied()
        .zip(obs.values().iter().copied());
    fs::write(path, signal_csv(rows))?;
    Ok(())
}

fn parse_rows(path: &Path) -> Result<Vec<(usize, C64)>> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Parse {
        path: display.clone(),
        line: 0,
        msg: e.to_string(),
    })?;
    let err = |line: usize, msg: String| Error::Parse {
        path: display.clone(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "t,re,im" => {}
        Some((_, h)) => return Err(err(1, format!("expected header `t,re,im`, found `{h}`"))),
        None => return Err(err(1, "empty file".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(err(
                lineno,
                format!("expected 3 fields, found {}", fields.len()),
            ));
        }
        let t = fields[0]
            .parse::<usize>()
            .map_err(|e| err(lineno, format!("bad index `{}`: {e}", fields[0])))?;
        let re = fields[1]
            .parse::<f64>()
            .map_err(|e| err(lineno, format!("bad real part `{}`: {e}", fields[1])))?;
        let im = fields[2]
            .parse::<f64>()
            .map_err(|e| err(lineno, format!("bad imaginary part `{}`: {e}", fields[2])))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(err(lineno, "non-finite sample".into()));
        }
        if let Some(&(prev, _)) = rows.last() {
            if t <= prev {
                return Err(err(
                    lineno,
                    format!("index {t} not increasing (after {prev})"),
                ));
            }
        }
        rows.push((t, C64::new(re, im)));
    }
    Ok(rows)
}

/// Reads a full signal; indices must run `0, 1, ..., len - 1`.
pub fn read_signal(path: &Path) -> Result<Vec<C64>> {
    let rows = parse_rows(path)?;
    for (i, &(t, _)) in rows.iter().enumerate() {
        if t != i {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: i + 2,
                msg: format!("expected index {i}, found {t}"),
            });
        }
    }
    Ok(rows.into_iter().map(|(_, x)| x).collect())
}

/// Reads observed samples for a Hankel dimension `n`.
pub fn read_observations(path: &Path, n: usize) -> Result<ObservationSet> {
    let rows = parse_rows(path)?;
    let (indices, values) = rows.into_iter().unzip();
    ObservationSet::new(n, indices, values).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })
}
