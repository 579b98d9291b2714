//! Parameter sweeps over a geometric grid of scales.

use std::io::{Read, Write};
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use crate::discretize::fem::{principal_eigenvalue_fem, BoundaryField};
use crate::discretize::mesh::{mesh_disk, mesh_rectangle};
use crate::discretize::tridiag::principal_eigenvalue_tridiag;
use crate::error::{Result, SpectraError};
use crate::exact1d::principal_eigenvalue_1d;
use crate::harness::fit::{fit_rate, Fit};
use crate::radial::{principal_eigenvalue_ball, BallProblem};
use crate::types::{BoundaryOperator, EigenEstimate, Method, Problem1D, TolerancePolicy};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "ROBIN_SPECTRA_THREADS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `(0, L)` with the scale as `L`.
    Interval { left: BoundaryOperator, right: BoundaryOperator },
    /// `B_R ⊂ R^N` with the scale as `R`.
    Ball { dimension: u32, boundary: BoundaryOperator },
    /// Square of side `a` (the scale).
    Square { boundary: BoundaryOperator },
    /// Disk of radius `R` (the scale).
    Disk { boundary: BoundaryOperator },
    /// Square with coefficient `west` on edges left of `x = a/2` and `east`
    /// elsewhere. Sign-changing coefficients have no known limit, so this
    /// family is exploratory.
    SplitSquare { west: f64, east: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solver {
    /// Exact for intervals, shooting for balls, FEM at resolution 32 on meshes.
    Auto,
    Exact,
    Tridiagonal {
        cells: usize,
    },
    Shooting,
    Fem {
        resolution: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Sigma,
    /// `scale² · σ`, the eigenvalue of the unit-size domain with coefficient
    /// `β · scale`.
    Scaled,
}

/// `start · factor^k` for `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, factor: f64, count: usize) -> Self {
        Grid { start, factor, count }
    }

    /// Grid from `start` down to `end` with `count` points.
    pub fn spanning(start: f64, end: f64, count: usize) -> Self {
        Grid { start, factor: (end / start).powf(1.0 / (count.max(2) - 1) as f64), count }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start.is_finite()) {
            return Err(SpectraError::Config { line: 0, msg: format!("grid start must be positive, got {}", self.start) });
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(SpectraError::Config { line: 0, msg: format!("grid factor must lie in (0, 1), got {}", self.factor) });
        }
        if self.count < 3 {
            return Err(SpectraError::Config { line: 0, msg: format!("grid needs at least 3 points, got {}", self.count) });
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.start * self.factor.powi(k as i32)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub grid: Grid,
    pub solver: Solver,
    pub quantity: Quantity,
    pub tol: TolerancePolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scale: f64,
    /// `NaN` when the solver failed at this point.
    pub sigma: f64,
    pub residual: f64,
    pub method: Method,
    pub wall_ms: f64,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.sigma.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// In grid order (decreasing scale).
    pub rows: Vec<SweepRow>,
    pub fit: Fit,
}

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("worker pool")
    })
}

/// Run `f` inside the bounded worker pool.
pub fn in_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

fn method_of(family: &Family, solver: Solver) -> Method {
    match (family, solver) {
        (_, Solver::Tridiagonal { .. }) => Method::Tridiagonal,
        (_, Solver::Fem { .. }) => Method::Fem,
        (_, Solver::Shooting) => Method::Shooting,
        (Family::Interval { .. }, _) => Method::TranscendentalRoot,
        (Family::Ball { .. }, _) => Method::Shooting,
        _ => Method::Fem,
    }
}

/// Principal eigenvalue of one family member at `scale`.
pub fn solve_point(family: &Family, solver: Solver, scale: f64, tol: &TolerancePolicy) -> Result<EigenEstimate> {
    let fem = |res: usize, mesh: crate::discretize::mesh::Mesh2D, field: &BoundaryField| {
        principal_eigenvalue_fem(&mesh, field, None, &TolerancePolicy { max_iterations: tol.max_iterations.max(500), ..*tol })
            .map(|(est, _)| est)
            .map_err(|e| match e {
                SpectraError::TooCoarse(..) => SpectraError::TooCoarse(res, 8),
                other => other,
            })
    };
    match (*family, solver) {
        (Family::Interval { left, right }, Solver::Auto | Solver::Exact) => {
            principal_eigenvalue_1d(&Problem1D::interval(scale, left, right), tol)
        }
        (Family::Interval { left, right }, Solver::Tridiagonal { cells }) => {
            principal_eigenvalue_tridiag(&Problem1D::interval(scale, left, right), cells, tol)
        }
        (Family::Ball { dimension, boundary }, Solver::Auto | Solver::Shooting | Solver::Exact) => {
            principal_eigenvalue_ball(&BallProblem::new(dimension, scale, boundary), tol)
        }
        (Family::Ball { dimension, boundary }, Solver::Tridiagonal { cells }) => {
            principal_eigenvalue_tridiag(&Problem1D::radial(dimension, scale, boundary), cells, tol)
        }
        (Family::Ball { dimension: 2, boundary }, Solver::Fem { resolution }) => {
            fem(resolution, mesh_disk(scale, resolution)?, &BoundaryField::Uniform(boundary))
        }
        (Family::Disk { boundary }, Solver::Auto | Solver::Fem { .. }) => {
            let res = if let Solver::Fem { resolution } = solver { resolution } else { 32 };
            fem(res, mesh_disk(scale, res)?, &BoundaryField::Uniform(boundary))
        }
        (Family::Disk { boundary }, Solver::Shooting | Solver::Exact) => {
            principal_eigenvalue_ball(&BallProblem::new(2, scale, boundary), tol)
        }
        (Family::Square { boundary }, Solver::Auto | Solver::Fem { .. }) => {
            let res = if let Solver::Fem { resolution } = solver { resolution } else { 32 };
            fem(res, mesh_rectangle(scale, scale, res)?, &BoundaryField::Uniform(boundary))
        }
        (Family::SplitSquare { west, east }, Solver::Auto | Solver::Fem { .. }) => {
            let res = if let Solver::Fem { resolution } = solver { resolution } else { 32 };
            let f = move |p: [f64; 2]| BoundaryOperator::Robin(if p[0] < 0.5 * scale { west } else { east });
            fem(res, mesh_rectangle(scale, scale, res)?, &BoundaryField::Function(&f))
        }
        _ => Err(SpectraError::Unsupported("solver not available for this family")),
    }
}

/// Solve every grid point (concurrently, in the bounded pool) and classify
/// the trend of the converged rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.grid.validate()?;
    let tol = spec.tol.validate()?;
    let method = method_of(&spec.family, spec.solver);
    let points = spec.grid.points();
    let rows: Vec<SweepRow> = in_pool(|| {
        points
            .par_iter()
            .map(|&scale| {
                let start = Instant::now();
                let outcome = solve_point(&spec.family, spec.solver, scale, &tol);
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let factor = match spec.quantity {
                    Quantity::Sigma => 1.0,
                    Quantity::Scaled => scale * scale,
                };
                match outcome {
                    Ok(est) => SweepRow { scale, sigma: est.value * factor, residual: est.residual * factor, method: est.method, wall_ms },
                    Err(_) => SweepRow { scale, sigma: f64::NAN, residual: f64::NAN, method, wall_ms },
                }
            })
            .collect()
    });
    let converged: Vec<(f64, f64)> = rows.iter().filter(|r| r.converged()).map(|r| (r.scale, r.sigma)).collect();
    let fit = fit_rate(&converged)?;
    Ok(SweepResult { rows, fit })
}

/// 17 significant digits: enough to round-trip any `f64`.
fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

pub const CSV_HEADER: [&str; 5] = ["scale", "sigma", "residual", "method", "wall_ms"];

/// Write rows as CSV. With `timing = false` the `wall_ms` column is written
/// as zero, so that repeated runs produce identical bytes.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| SpectraError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        let wall = if timing { r.wall_ms } else { 0.0 };
        w.write_record([fmt17(r.scale), fmt17(r.sigma), fmt17(r.residual), r.method.as_str().to_string(), fmt17(wall)]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| SpectraError::Io(e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(SpectraError::Config { line: 1, msg: format!("unexpected CSV header {headers:?}") });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| SpectraError::Io(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            rec[k].parse().map_err(|_| SpectraError::Config { line, msg: format!("bad number `{}`", &rec[k]) })
        };
        let method = Method::parse(&rec[3]).ok_or_else(|| SpectraError::Config { line, msg: format!("unknown method `{}`", &rec[3]) })?;
        rows.push(SweepRow { scale: num(0)?, sigma: num(1)?, residual: num(2)?, method, wall_ms: num(4)? });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fit::FittedModel;
    use crate::types::BoundaryOperator::*;
    use std::f64::consts::PI;

    fn spec(family: Family, grid: Grid) -> SweepSpec {
        SweepSpec { family, grid, solver: Solver::Auto, quantity: Quantity::Sigma, tol: TolerancePolicy::default() }
    }

    #[test]
    fn opposite_coefficients_are_constant() {
        let s = spec(Family::Interval { left: Robin(3.0), right: Robin(-3.0) }, Grid::new(1.0, 0.5, 11));
        let result = run_sweep(&s).unwrap();
        let FittedModel::Constant { c } = result.fit.model else { panic!("{:?}", result.fit) };
        assert!((c + 9.0).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_power_law() {
        let s = spec(Family::Interval { left: Dirichlet, right: Dirichlet }, Grid::new(1.0, 0.5, 11));
        let FittedModel::PowerLaw { c, p } = run_sweep(&s).unwrap().fit.model else { panic!() };
        assert!((c - PI * PI).abs() < 1e-8 && (p + 2.0).abs() < 1e-10);
    }

    #[test]
    fn scaled_ball_is_linear() {
        let s = SweepSpec {
            quantity: Quantity::Scaled,
            ..spec(Family::Ball { dimension: 2, boundary: Robin(1.0) }, Grid::spanning(1e-1, 1e-4, 7))
        };
        let FittedModel::Linear { slope, intercept } = run_sweep(&s).unwrap().fit.model else { panic!() };
        assert!((slope - 2.0).abs() < 0.02 && intercept.abs() < 1e-4, "{slope} {intercept}");
    }

    #[test]
    fn small_interval_with_negative_end() {
        let s = spec(Family::Interval { left: Robin(-1.0), right: Neumann }, Grid::spanning(1e-2, 1e-6, 9));
        let FittedModel::PowerLaw { c, p } = run_sweep(&s).unwrap().fit.model else { panic!() };
        assert!((c + 1.0).abs() < 1e-2 && (p + 1.0).abs() < 1e-2, "{c} {p}");
    }

    #[test]
    fn failed_points_are_flagged() {
        // the tridiagonal solver rejects fewer than 16 cells at every point
        let s = SweepSpec {
            solver: Solver::Tridiagonal { cells: 8 },
            ..spec(Family::Interval { left: Dirichlet, right: Neumann }, Grid::new(1.0, 0.5, 4))
        };
        assert!(matches!(run_sweep(&s), Err(SpectraError::FitFailure(_))));
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let s = spec(Family::Interval { left: Robin(0.3), right: Dirichlet }, Grid::new(2.0, 0.7, 6));
        let (a, b) = (run_sweep(&s).unwrap(), run_sweep(&s).unwrap());
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_csv(&a.rows, &mut ca, false).unwrap();
        write_csv(&b.rows, &mut cb, false).unwrap();
        assert_eq!(ca, cb);
        let back = read_csv(ca.as_slice()).unwrap();
        for (x, y) in back.iter().zip(&a.rows) {
            assert_eq!(
                (x.scale.to_bits(), x.sigma.to_bits(), x.residual.to_bits(), x.method),
                (y.scale.to_bits(), y.sigma.to_bits(), y.residual.to_bits(), y.method)
            );
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(Grid::new(1.0, 1.5, 5).validate().is_err());
        assert!(Grid::new(-1.0, 0.5, 5).validate().is_err());
        assert!(Grid::new(1.0, 0.5, 2).validate().is_err());
    }
}
