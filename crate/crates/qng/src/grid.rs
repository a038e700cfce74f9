//! Parsing of grid, range and pair arguments.

use qng_core::envelope::log_lambda_grid;

use crate::error::{CliError, Result};

fn number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("not a number: {s:?}")))
}

fn count(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| CliError::Usage(format!("not a count: {s:?}")))
}

/// A grid given as `log:N:lo:hi` (symmetric log-spaced λ grid with zero),
/// `lin:a:b:N` (N evenly spaced points) or an explicit comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["log", n, lo, hi] => {
            let (n, lo, hi) = (count(n)?, number(lo)?, number(hi)?);
            if n == 0 || !(lo > 0.0 && hi >= lo) {
                return Err(CliError::Usage(format!("bad log grid {spec:?}")));
            }
            Ok(log_lambda_grid(n, lo, hi))
        }
        ["lin", a, b, n] => {
            let (a, b, n) = (number(a)?, number(b)?, count(n)?);
            match n {
                0 => Err(CliError::Usage(format!("bad linear grid {spec:?}"))),
                1 => Ok(vec![a]),
                _ => Ok((0..n)
                    .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                    .collect()),
            }
        }
        [list] => list.split(',').map(number).collect(),
        _ => Err(CliError::Usage(format!("unrecognized grid {spec:?}"))),
    }
}

/// `a..b` (inclusive) or a single integer.
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    match spec.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (count(a)?, count(b.trim_start_matches('='))?);
            if a > b {
                return Err(CliError::Usage(format!("empty range {spec:?}")));
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![count(spec)?]),
    }
}

/// `m,n` with `m < n`.
pub fn parse_pair(spec: &str) -> Result<(usize, usize)> {
    let (a, b) = spec
        .split_once(',')
        .ok_or_else(|| CliError::Usage(format!("expected m,n, got {spec:?}")))?;
    Ok((count(a)?, count(b)?))
}
