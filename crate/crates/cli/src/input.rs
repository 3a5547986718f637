//! Job specification parsing: a single JSON document with the matrix, walk,
//! and command-specific options, read from --in PATH or stdin.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Deserialize;

use crate::CliError;
use cluster_scatter::pattern::Walk;
use cluster_scatter::ExchangeMatrix;

#[derive(Debug, Deserialize)]
pub struct JobSpec {
    pub matrix: Vec<Vec<i64>>,
    /// Walk directions, 1-based as in the usual mutation notation.
    #[serde(default)]
    pub walk: Vec<i64>,
    pub depth: Option<usize>,
    pub truncation: Option<i64>,
    /// Initial exponent for theta computations.
    pub m0: Option<Vec<i64>>,
    /// Endpoint for theta computations; entries like "5/3" or "2".
    pub point: Option<Vec<String>>,
}

impl JobSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::usage(format!("invalid job document: {e}")))
    }

    pub fn exchange_matrix(&self) -> Result<ExchangeMatrix, CliError> {
        let n = self.matrix.len();
        if n == 0 || self.matrix.iter().any(|r| r.len() != n) {
            return Err(CliError::usage("matrix must be square and nonempty"));
        }
        ExchangeMatrix::from_rows(&self.matrix)
            .map_err(|e| CliError::usage(format!("bad exchange matrix: {e}")))
    }

    /// The walk converted to 0-based directions, with range checking.
    pub fn walk(&self) -> Result<Walk, CliError> {
        let n = self.matrix.len() as i64;
        let mut dirs = Vec::with_capacity(self.walk.len());
        for (pos, &k) in self.walk.iter().enumerate() {
            if k < 1 || k > n {
                return Err(CliError::usage(format!(
                    "walk entry {k} at position {pos} out of range 1..{n}"
                )));
            }
            dirs.push((k - 1) as usize);
        }
        Ok(Walk::new(dirs))
    }

    pub fn point(&self) -> Result<Vec<BigRational>, CliError> {
        match &self.point {
            None => Ok(vec![
                BigRational::new(BigInt::from(5), BigInt::from(3)),
                BigRational::new(BigInt::from(2), BigInt::from(7)),
            ]),
            Some(entries) => entries.iter().map(|s| parse_rational(s)).collect(),
        }
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| CliError::usage(format!("bad rational component {num:?}")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| CliError::usage(format!("bad rational component {den:?}")))?;
    if den == BigInt::from(0) {
        return Err(CliError::usage("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}
