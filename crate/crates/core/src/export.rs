//! Plain-file formats shared by the CLI and the Python bindings.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! artifact is byte-stable for identical inputs.

use std::fmt::Write as _;
use std::io;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::regsolve::StudyRow;
use crate::seqspace::SphereVector;

/// One enumeration term with its primitive integer direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationRecord {
    pub index: usize,
    /// `(coordinate, value)` of the integer direction; `zeta = v / |v|_2`.
    pub direction: Vec<(usize, i64)>,
    pub norm_squared: i64,
}

impl From<&SphereVector> for EnumerationRecord {
    fn from(z: &SphereVector) -> Self {
        let direction: Vec<(usize, i64)> = z.direction().iter().map(|(i, &v)| (i, v)).collect();
        let norm_squared = direction.iter().map(|(_, v)| v * v).sum();
        EnumerationRecord {
            index: z.index(),
            direction,
            norm_squared,
        }
    }
}

/// Long format, one row per nonzero coordinate of the integer direction
/// (directions are integral, so the denominator column is always 1).
pub fn enumeration_csv(terms: &[SphereVector]) -> String {
    let mut out = String::from("index,coordinate,numerator,denominator\n");
    for z in terms {
        for (i, v) in z.direction().iter() {
            let _ = writeln!(out, "{},{},{},1", z.index(), i, v);
        }
    }
    out
}

pub fn enumeration_json(terms: &[SphereVector]) -> serde_json::Result<String> {
    let recs: Vec<EnumerationRecord> = terms.iter().map(EnumerationRecord::from).collect();
    to_json(&recs)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Header `m, n` as little-endian u64, then the entries row-major as
/// little-endian f64.
pub fn dense_binary(a: &Matrix) -> Vec<u8> {
    let (m, n) = a.shape();
    let mut out = Vec::with_capacity(16 + 8 * m * n);
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for i in 0..m {
        for j in 0..n {
            out.extend_from_slice(&a[(i, j)].to_le_bytes());
        }
    }
    out
}

pub fn read_dense_binary(bytes: &[u8]) -> io::Result<Matrix> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    if bytes.len() < 16 {
        return Err(bad("missing header"));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let (m, n) = (word(0) as usize, word(1) as usize);
    let expected = m
        .checked_mul(n)
        .and_then(|e| e.checked_mul(8))
        .and_then(|e| e.checked_add(16));
    if expected != Some(bytes.len()) {
        return Err(bad("payload length does not match the header"));
    }
    Ok(Matrix::from_fn(m, n, |i, j| {
        let at = 16 + 8 * (i * n + j);
        f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
    }))
}

/// Plain CSV of the entries, no header.
pub fn matrix_csv(a: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| a[(i, j)].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn study_csv(rows: &[StudyRow]) -> String {
    let mut out = String::from("delta,alpha,error_l1,residual,iterations\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.delta, r.alpha, r.error_l1, r.residual, r.iterations
        );
    }
    out
}
