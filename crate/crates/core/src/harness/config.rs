//! Sweep configuration files: a flat TOML table of `key = value` lines.
//!
//! ```toml
//! # Robin(3) / Robin(-3) interval, L from 1 down to 2^-10
//! family = "interval"        # interval | ball | square | disk | split-square
//! left = "R(3)"              # D, N, R(beta) or a bare number
//! right = -3
//! start = 1.0
//! factor = 0.5               # or: end = 0.0009765625
//! count = 11
//! solver = "auto"            # auto | exact | tridiagonal | shooting | fem
//! quantity = "sigma"         # sigma | scaled
//! output = "sweep.csv"       # optional
//! svg = "sweep.svg"          # optional
//! ```
//!
//! Family-specific keys: `left`/`right` (interval), `dimension` and
//! `boundary` (ball), `boundary` (square, disk), `west`/`east`
//! (split-square). Solver parameters: `cells` (tridiagonal, default 4096),
//! `resolution` (fem, default 32). Optional tolerances: `root_abs_tol`,
//! `eig_rel_tol`, `max_iterations`. `timing = false` writes zero wall
//! times so repeated runs give identical files.

use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Result, SpectraError};
use crate::harness::sweep::{Family, Grid, Quantity, Solver, SweepSpec};
use crate::types::{BoundaryOperator, TolerancePolicy};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    family: String,
    left: Option<toml::Value>,
    right: Option<toml::Value>,
    dimension: Option<u32>,
    boundary: Option<toml::Value>,
    west: Option<f64>,
    east: Option<f64>,
    start: f64,
    factor: Option<f64>,
    end: Option<f64>,
    count: usize,
    solver: Option<String>,
    cells: Option<usize>,
    resolution: Option<usize>,
    quantity: Option<String>,
    root_abs_tol: Option<f64>,
    eig_rel_tol: Option<f64>,
    max_iterations: Option<usize>,
    output: Option<PathBuf>,
    svg: Option<PathBuf>,
    timing: Option<bool>,
}

/// A parsed configuration: the sweep itself plus where to write results.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub spec: SweepSpec,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub timing: bool,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn find_key(text: &str, key: &str) -> usize {
    text.lines().position(|l| l.trim_start().strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))).map_or(0, |i| i + 1)
}

fn boundary(text: &str, key: &str, value: Option<toml::Value>) -> Result<BoundaryOperator> {
    let line = find_key(text, key);
    let value = value.ok_or_else(|| SpectraError::Config { line, msg: format!("missing `{key}`") })?;
    let s = match value {
        toml::Value::String(s) => s,
        toml::Value::Float(f) => f.to_string(),
        toml::Value::Integer(i) => i.to_string(),
        other => return Err(SpectraError::Config { line, msg: format!("`{key}` must be a string or number, got {other}") }),
    };
    s.parse().map_err(|e: SpectraError| SpectraError::Config { line, msg: e.to_string() })
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let raw: Raw = toml::from_str(text)
        .map_err(|e| SpectraError::Config { line: e.span().map_or(0, |s| line_of(text, s.start)), msg: e.message().to_string() })?;
    let err = |key: &str, msg: String| SpectraError::Config { line: find_key(text, key), msg };

    let family = match raw.family.as_str() {
        "interval" => Family::Interval { left: boundary(text, "left", raw.left)?, right: boundary(text, "right", raw.right)? },
        "ball" => Family::Ball {
            dimension: raw.dimension.ok_or_else(|| err("family", "ball needs `dimension`".into()))?,
            boundary: boundary(text, "boundary", raw.boundary)?,
        },
        "square" => Family::Square { boundary: boundary(text, "boundary", raw.boundary)? },
        "disk" => Family::Disk { boundary: boundary(text, "boundary", raw.boundary)? },
        "split-square" => Family::SplitSquare {
            west: raw.west.ok_or_else(|| err("family", "split-square needs `west`".into()))?,
            east: raw.east.ok_or_else(|| err("family", "split-square needs `east`".into()))?,
        },
        other => return Err(err("family", format!("unknown family `{other}`"))),
    };
    let grid = match (raw.factor, raw.end) {
        (Some(factor), None) => Grid::new(raw.start, factor, raw.count),
        (None, Some(end)) => Grid::spanning(raw.start, end, raw.count),
        (Some(_), Some(_)) => return Err(err("end", "give either `factor` or `end`, not both".into())),
        (None, None) => return Err(err("start", "missing `factor` (or `end`)".into())),
    };
    grid.validate().map_err(|e| match e {
        SpectraError::Config { msg, .. } => err("start", msg),
        other => other,
    })?;
    let solver = match raw.solver.as_deref().unwrap_or("auto") {
        "auto" => Solver::Auto,
        "exact" => Solver::Exact,
        "tridiagonal" => Solver::Tridiagonal { cells: raw.cells.unwrap_or(4096) },
        "shooting" => Solver::Shooting,
        "fem" => Solver::Fem { resolution: raw.resolution.unwrap_or(32) },
        other => return Err(err("solver", format!("unknown solver `{other}`"))),
    };
    let quantity = match raw.quantity.as_deref().unwrap_or("sigma") {
        "sigma" => Quantity::Sigma,
        "scaled" => Quantity::Scaled,
        other => return Err(err("quantity", format!("unknown quantity `{other}`"))),
    };
    let base = if matches!(solver, Solver::Tridiagonal { .. } | Solver::Fem { .. }) {
        TolerancePolicy::discretization()
    } else {
        TolerancePolicy::default()
    };
    let tol = TolerancePolicy {
        root_abs_tol: raw.root_abs_tol.unwrap_or(base.root_abs_tol),
        eig_rel_tol: raw.eig_rel_tol.unwrap_or(base.eig_rel_tol),
        max_iterations: raw.max_iterations.unwrap_or(base.max_iterations),
    }
    .validate()
    .map_err(|e| err("eig_rel_tol", e.to_string()))?;
    Ok(SweepConfig {
        spec: SweepSpec { family, grid, solver, quantity, tol },
        output: raw.output,
        svg: raw.svg,
        timing: raw.timing.unwrap_or(true),
    })
}
