//! Experiment configuration: a JSON document whose every field is optional.
//!
//! Schema (defaults in parentheses):
//!
//! ```text
//! mode          "canonical" | "no-singleton" | "adversarial:N"  ("canonical")
//! n             column budget                                   (200)
//! m             row truncation                                  (20)
//! L             selection depth                                 (5)
//! budget        enumeration budget for selections               (1000000)
//! seed          noise / sampling seed                           (0)
//! deltas        strictly descending noise grid                  ([0.1, 0.01, 0.001, 0.0001])
//! rule          {"rule": "a_priori", "c": C} | {"rule": "discrepancy", "tau": T}
//! alpha, delta  single-solve regularization and noise level     (0.01, 0.01)
//! x_true        [[level, value], ...] ground truth on U         ([[1, 1.0], [3, -0.5], [5, 0.25]])
//! solver        {"tol": .., "max_iter": ..}                     (1e-8, 100000)
//! n_grid        ascending section sizes for rank / probe        ([10, 50, 100])
//! probe_target  [[coordinate, value], ...] probe data           ([[1, 1.0]])
//! certify       {"pair": [m, n], "signs": ["+", "+"], "k": K, "arithmetic": "float" | "exact"}
//! qdist         {"a": [[..], ..], "y": [..], "y2": [..]}
//! factor        {"instances", "rows", "cols", "rank", "samples", "tol"}
//! format        "csv" | "json"                                  ("csv")
//! out           output directory                                (flag, then $MAZUR_OUT_DIR, then ./mazur-out)
//! ```

use std::path::PathBuf;

use mazur_core::certify::{LpArithmetic, Sign};
use mazur_core::regsolve::{ParameterRule, SolverOptions};
use mazur_core::seqspace::EnumerationMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    pub pair: [usize; 2],
    pub signs: [Sign; 2],
    pub k: usize,
    pub arithmetic: LpArithmetic,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            pair: [1, 3],
            signs: [Sign::Plus, Sign::Plus],
            k: 100,
            arithmetic: LpArithmetic::Float,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdistConfig {
    pub a: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub y2: Vec<f64>,
}

impl Default for QdistConfig {
    fn default() -> Self {
        QdistConfig {
            a: vec![vec![1.0, 1.0]],
            y: vec![0.0],
            y2: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorConfig {
    pub instances: usize,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub samples: usize,
    pub tol: f64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            instances: 25,
            rows: 6,
            cols: 4,
            rank: 3,
            samples: 100,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: EnumerationMode,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub levels: usize,
    pub budget: usize,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub rule: ParameterRule,
    pub alpha: f64,
    pub delta: f64,
    pub x_true: Vec<(usize, f64)>,
    pub solver: SolverOptions,
    pub n_grid: Vec<usize>,
    pub probe_target: Vec<(usize, f64)>,
    pub certify: CertifyConfig,
    pub qdist: QdistConfig,
    pub factor: FactorConfig,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mode: EnumerationMode::Canonical,
            n: 200,
            m: 20,
            levels: 5,
            budget: 1_000_000,
            seed: 0,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
            rule: ParameterRule::default(),
            alpha: 1e-2,
            delta: 1e-2,
            x_true: vec![(1, 1.0), (3, -0.5), (5, 0.25)],
            solver: SolverOptions::default(),
            n_grid: vec![10, 50, 100],
            probe_target: vec![(1, 1.0)],
            certify: CertifyConfig::default(),
            qdist: QdistConfig::default(),
            factor: FactorConfig::default(),
            format: Format::Csv,
            out: None,
        }
    }
}

/// A configuration problem, tied to a line of the source when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON; syntax and schema errors carry serde's line number.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(blame_line(text, &e).unwrap_or(e.line())),
            message: e.to_string(),
        })?;
        cfg.validate(Some(text))?;
        Ok(cfg)
    }

    /// Checks value ranges; `source` is used to point at the offending key.
    pub fn validate(&self, source: Option<&str>) -> Result<(), ConfigError> {
        let fail = |key: &str, message: String| {
            Err(ConfigError {
                line: source.and_then(|s| key_line(s, key)),
                message,
            })
        };
        for (key, v) in [
            ("n", self.n),
            ("m", self.m),
            ("L", self.levels),
            ("budget", self.budget),
        ] {
            if v == 0 {
                return fail(key, format!("`{key}` must be positive"));
            }
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return fail(
                "deltas",
                "`deltas` must be a nonempty list of positive numbers".into(),
            );
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return fail("deltas", "`deltas` must be strictly descending".into());
        }
        match self.rule {
            ParameterRule::APriori { c } if !(c > 0.0 && c.is_finite()) => {
                return fail(
                    "rule",
                    format!("a-priori constant must be positive, got {c}"),
                )
            }
            ParameterRule::Discrepancy { tau } if !(tau > 1.0 && tau.is_finite()) => {
                return fail("rule", format!("discrepancy tau must exceed 1, got {tau}"))
            }
            _ => {}
        }
        for (key, v) in [("alpha", self.alpha), ("delta", self.delta)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(key, format!("`{key}` must be positive, got {v}"));
            }
        }
        if self.x_true.is_empty() {
            return fail("x_true", "`x_true` needs at least one atom".into());
        }
        for &(l, v) in &self.x_true {
            if l == 0 || !v.is_finite() || v == 0.0 {
                return fail(
                    "x_true",
                    format!("`x_true` entry [{l}, {v}] needs a positive level and a nonzero value"),
                );
            }
        }
        let mut seen: Vec<usize> = self.x_true.iter().map(|p| p.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return fail("x_true", "`x_true` repeats a level".into());
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return fail(
                "solver",
                "solver tolerance and iteration cap must be positive".into(),
            );
        }
        if self.n_grid.is_empty()
            || self.n_grid[0] == 0
            || self.n_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return fail(
                "n_grid",
                "`n_grid` must be positive and strictly ascending".into(),
            );
        }
        if self
            .probe_target
            .iter()
            .any(|&(i, v)| i == 0 || !v.is_finite())
        {
            return fail(
                "probe_target",
                "`probe_target` coordinates start at 1".into(),
            );
        }
        let c = &self.certify;
        if c.pair[0] == 0 || c.pair[1] == 0 || c.pair[0] == c.pair[1] {
            return fail(
                "pair",
                "`certify.pair` needs two distinct positive indices".into(),
            );
        }
        if c.k < c.pair[0].max(c.pair[1]) {
            return fail("k", "`certify.k` must cover both pair indices".into());
        }
        let q = &self.qdist;
        let cols = q.a.first().map_or(0, Vec::len);
        if cols == 0 || q.a.iter().any(|r| r.len() != cols) {
            return fail(
                "a",
                "`qdist.a` must be a nonempty rectangular matrix".into(),
            );
        }
        if q.y.len() != q.a.len() || q.y2.len() != q.a.len() {
            return fail(
                "y",
                "`qdist.y` and `qdist.y2` need one entry per row of `a`".into(),
            );
        }
        let f = &self.factor;
        if f.instances == 0 || f.samples == 0 || f.rows == 0 || f.cols == 0 || !(f.tol > 0.0) {
            return fail(
                "factor",
                "`factor` sizes and tolerance must be positive".into(),
            );
        }
        if f.rank == 0 || f.rank > f.rows.min(f.cols) {
            return fail(
                "rank",
                "`factor.rank` must lie in 1..=min(rows, cols)".into(),
            );
        }
        Ok(())
    }
}

/// Errors raised while converting a value (rather than parsing) are reported by
/// serde at the end of the enclosing object; re-check each top-level field on
/// its own to point at the key that actually failed.
fn blame_line(text: &str, e: &serde_json::Error) -> Option<usize> {
    if !e.is_data() {
        return None;
    }
    let serde_json::Value::Object(map) = serde_json::from_str(text).ok()? else {
        return None;
    };
    map.into_iter()
        .filter(|(k, v)| {
            let single = serde_json::Value::Object([(k.clone(), v.clone())].into_iter().collect());
            serde_json::from_value::<ExperimentConfig>(single).is_err()
        })
        .filter_map(|(k, _)| key_line(text, &k))
        .min()
}

/// 1-based line of the first occurrence of `"key"` in the source.
fn key_line(source: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    source
        .lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}
