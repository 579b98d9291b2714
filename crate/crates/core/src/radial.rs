//! Principal Robin eigenvalue of the ball `B_R ⊂ R^N` by shooting on the
//! radial equation `−ξ'' − (N−1)/r ξ' = σξ`, `ξ'(0) = 0`, and the scaled
//! eigenvalue `Σ(R) = R² σ₁(B_R, β) = σ₁(B₁, βR)`.

use crate::error::{Result, SpectraError};
use crate::geometry;
use crate::roots::first_root;
use crate::types::{BoundaryKind, BoundaryOperator, EigenEstimate, Eigenfunction, Method, TolerancePolicy};

/// Grid size used by [`principal_eigenvalue_ball`].
pub const DEFAULT_STEPS: usize = 4096;

/// Radius below which the solve runs on the unit ball with coefficient `βR`.
const SCALE_BELOW: f64 = 0.1;

const RENORMALIZE_ABOVE: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallProblem {
    pub dimension: u32,
    pub radius: f64,
    /// `Robin(β)`, `Neumann` or `Dirichlet` on the sphere `|x| = R`.
    pub boundary: BoundaryOperator,
}

impl BallProblem {
    pub fn new(dimension: u32, radius: f64, boundary: BoundaryOperator) -> Self {
        BallProblem { dimension, radius, boundary }
    }

    pub fn validate(self) -> Result<Self> {
        if self.dimension == 0 {
            return Err(SpectraError::ZeroDimension);
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(SpectraError::NonPositiveRadius(self.radius));
        }
        if !self.boundary.is_finite() {
            return Err(SpectraError::Unsupported("non-finite Robin coefficient"));
        }
        Ok(self)
    }

    /// The same eigenproblem posed on the unit ball (coefficient `βR`).
    pub fn scaled_to_unit(&self) -> BallProblem {
        let boundary = match self.boundary.beta() {
            None => BoundaryOperator::Dirichlet,
            Some(b) => BoundaryOperator::Robin(b * self.radius).normalized(),
        };
        BallProblem { dimension: self.dimension, radius: 1.0, boundary }
    }
}

/// Result of one shot at a trial eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingTrace {
    pub sigma: f64,
    /// `(r, ξ, ξ')` on the uniform grid `r_i = iR/steps`, starting at the
    /// center with `ξ(0) = 1`, `ξ'(0) = 0`. Values may have been rescaled
    /// by a common positive factor to avoid overflow.
    pub samples: Vec<(f64, f64, f64)>,
    /// `ξ'(R) + βξ(R)` for Robin, `ξ(R)` for Dirichlet.
    pub boundary_defect: f64,
    /// Sign changes of `ξ` on `(0, R)`.
    pub interior_nodes: usize,
}

impl ShootingTrace {
    pub fn end_value(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.1)
    }

    /// Signed defect that is positive exactly when the trial `σ` lies below
    /// the principal eigenvalue: the Riccati defect `ξ'/ξ + β` at `R` (or
    /// `ξ(R)` for Dirichlet) while `ξ` stays positive, `−∞` once it has a
    /// node.
    fn ordering_defect(&self, boundary: &BoundaryOperator) -> f64 {
        let end = self.end_value();
        match boundary.beta() {
            None => {
                if self.interior_nodes > 0 {
                    f64::NEG_INFINITY
                } else {
                    end
                }
            }
            Some(_) => {
                if self.interior_nodes > 0 || end <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.boundary_defect / end
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Radial {
    sigma: f64,
    bend: f64,
}

impl Radial {
    #[inline]
    fn rhs(&self, r: f64, xi: f64, eta: f64) -> (f64, f64) {
        (eta, -self.bend / r * eta - self.sigma * xi)
    }

    #[inline]
    fn rk4(&self, r: f64, h: f64, xi: f64, eta: f64) -> (f64, f64) {
        let (k1x, k1e) = self.rhs(r, xi, eta);
        let (k2x, k2e) = self.rhs(r + 0.5 * h, xi + 0.5 * h * k1x, eta + 0.5 * h * k1e);
        let (k3x, k3e) = self.rhs(r + 0.5 * h, xi + 0.5 * h * k2x, eta + 0.5 * h * k2e);
        let (k4x, k4e) = self.rhs(r + h, xi + h * k3x, eta + h * k3e);
        (xi + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x), eta + h / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e))
    }
}

/// Integrate the radial equation from the center to `R` at trial `sigma`.
///
/// The regular solution is seeded at `ε = R·10⁻⁶` from its series
/// expansion. The first cell `[ε, R/steps]` is crossed with geometrically
/// growing substeps and early cells are subdivided so that every RK4 step
/// satisfies `(N−1)·h/r ≤ 1`; from cell `N−1` on the grid is uniform.
pub fn shoot(problem: &BallProblem, sigma: f64, steps: usize) -> Result<ShootingTrace> {
    let problem = problem.validate()?;
    if steps < 64 {
        return Err(SpectraError::TooCoarse(steps, 64));
    }
    let n = problem.dimension as f64;
    let radius = problem.radius;
    let h = radius / steps as f64;
    let ode = Radial { sigma, bend: n - 1.0 };

    let eps = radius * 1e-6;
    let (e2, e4) = (eps * eps, eps.powi(4));
    let mut xi = 1.0 - sigma * e2 / (2.0 * n) + sigma * sigma * e4 / (8.0 * n * (n + 2.0));
    let mut eta = -sigma * eps / n + sigma * sigma * eps * e2 / (2.0 * n * (n + 2.0));

    let mut samples = Vec::with_capacity(steps + 1);
    samples.push((0.0, 1.0, 0.0));

    let growth = if n > 1.0 { 1.0 / (n - 1.0) } else { 1.0 };
    let mut r = eps;
    while r < h {
        let dr = (r * growth).min(h - r);
        (xi, eta) = ode.rk4(r, dr, xi, eta);
        r += dr;
    }
    samples.push((h, xi, eta));

    let mut nodes = usize::from(crosses(1.0, xi));
    for i in 1..steps {
        let r0 = i as f64 * h;
        let sub = (((n - 1.0) / i as f64).ceil() as usize).max(1);
        let dr = h / sub as f64;
        for k in 0..sub {
            (xi, eta) = ode.rk4(r0 + k as f64 * dr, dr, xi, eta);
        }
        if !xi.is_finite() || !eta.is_finite() {
            return Err(SpectraError::Overflow(r0 + h));
        }
        let prev = samples.last().map_or(1.0, |s| s.1);
        if i + 1 < steps && crosses(prev, xi) {
            nodes += 1;
        }
        samples.push(((i + 1) as f64 * h, xi, eta));
        if xi.abs() > RENORMALIZE_ABOVE {
            let f = 1.0 / xi.abs();
            for s in samples.iter_mut() {
                s.1 *= f;
                s.2 *= f;
            }
            xi *= f;
            eta *= f;
        }
    }
    if let Some(last) = samples.last_mut() {
        last.0 = radius;
    }
    let boundary_defect = match problem.boundary.beta() {
        None => xi,
        Some(b) => eta + b * xi,
    };
    Ok(ShootingTrace { sigma, samples, boundary_defect, interior_nodes: nodes })
}

fn crosses(prev: f64, next: f64) -> bool {
    (prev > 0.0 && next <= 0.0) || (prev < 0.0 && next >= 0.0)
}

/// Principal eigenvalue of `problem` on its own grid size, plus the final trace.
fn solve_direct(problem: &BallProblem, steps: usize, tol: &TolerancePolicy) -> Result<(f64, ShootingTrace)> {
    let radius = problem.radius;
    let boundary = problem.boundary;
    let defect = |sigma: f64| -> f64 { shoot(problem, sigma, steps).map_or(f64::NEG_INFINITY, |t| t.ordering_defect(&boundary)) };
    let below = |sigma: f64| defect(sigma) > 0.0;

    let (lo, hi) = match boundary.beta() {
        Some(b) if b < 0.0 => {
            let mut lo = -b * b * (4.0 / (radius * radius)).max(1.0) * 4.0 - 1.0;
            let mut tries = 0;
            while !below(lo) {
                lo *= 4.0;
                tries += 1;
                if tries > 60 {
                    return Err(SpectraError::BracketFailure(format!("no lower bound above {lo}")));
                }
            }
            (lo, 0.0)
        }
        _ => {
            let mut hi = 4.0 / (radius * radius);
            let mut tries = 0;
            while below(hi) {
                hi *= 2.0;
                tries += 1;
                if tries > 60 {
                    return Err(SpectraError::BracketFailure(format!("no upper bound below {hi}")));
                }
            }
            (0.0, hi)
        }
    };

    let scale = lo.abs().max(hi.abs()).max(1.0);
    let root_tol = TolerancePolicy { root_abs_tol: 1e-15 * scale, max_iterations: tol.max_iterations.max(100), ..*tol };
    let sigma = first_root(defect, lo, hi, &root_tol)?;
    let trace = shoot(problem, sigma, steps)?;
    Ok((sigma, trace))
}

fn normalized_profile(trace: &ShootingTrace, radius_scale: f64) -> Eigenfunction {
    let max = trace.samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    let nodes: Vec<f64> = trace.samples.iter().map(|s| s.0 * radius_scale).collect();
    let values: Vec<f64> = trace.samples.iter().map(|s| s.1 / max).collect();
    Eigenfunction::Sampled { nodes: nodes.into(), values: values.into() }
}

/// Principal eigenvalue of the ball with the default grid and a Richardson
/// halving check for the residual.
pub fn principal_eigenvalue_ball(problem: &BallProblem, tol: &TolerancePolicy) -> Result<EigenEstimate> {
    principal_eigenvalue_ball_with(problem, DEFAULT_STEPS, tol)
}

pub fn principal_eigenvalue_ball_with(problem: &BallProblem, steps: usize, tol: &TolerancePolicy) -> Result<EigenEstimate> {
    let problem = problem.validate()?;
    let tol = tol.validate()?;
    if steps < 128 {
        return Err(SpectraError::TooCoarse(steps, 128));
    }
    if problem.boundary.kind() == BoundaryKind::Neumann {
        let f = Eigenfunction::Affine { slope: 0.0, intercept: 1.0, length: problem.radius, scale: 1.0 };
        return EigenEstimate::new(0.0, 0.0, Method::ClosedForm, f);
    }
    let radius = problem.radius;
    let (work, factor) = if radius < SCALE_BELOW { (problem.scaled_to_unit(), radius * radius) } else { (problem, 1.0) };
    let (fine, trace) = solve_direct(&work, steps, &tol)?;
    let (coarse, _) = solve_direct(&work, steps / 2, &tol)?;
    let residual = (fine - coarse).abs() / 15.0 / factor;
    let f = normalized_profile(&trace, radius / work.radius);
    EigenEstimate::new(fine / factor, residual, Method::Shooting, f)
}

/// `Σ(R) = σ₁(B₁, βR)`, equal to `R² σ₁(B_R, β)` for `R > 0`.
///
/// Any finite `R` is accepted; for `R ≤ 0` this is the principal eigenvalue
/// of the unit ball with coefficient `βR`.
pub fn sigma_scaled(dimension: u32, radius: f64, beta: f64, tol: &TolerancePolicy) -> Result<f64> {
    if !radius.is_finite() || !beta.is_finite() {
        return Err(SpectraError::NonPositiveRadius(radius));
    }
    let unit = BallProblem::new(dimension, 1.0, BoundaryOperator::Robin(beta * radius));
    Ok(principal_eigenvalue_ball(&unit, tol)?.value)
}

/// Composite Simpson rule on uniformly spaced samples (even interval count).
fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// `dΣ/dR = β ∫_{∂B₁} Ψ² / ∫_{B₁} Ψ² = β ξ(1)² / ∫₀¹ ξ² r^{N−1} dr`, with `ξ`
/// the radial profile of the unit-ball eigenfunction for coefficient `βR`.
pub fn sigma_dot_formula(dimension: u32, radius: f64, beta: f64, tol: &TolerancePolicy) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(SpectraError::NonPositiveRadius(radius));
    }
    let unit = BallProblem::new(dimension, 1.0, BoundaryOperator::Robin(beta * radius)).validate()?;
    let tol = tol.validate()?;
    let trace = if unit.boundary.kind() == BoundaryKind::Neumann {
        shoot(&unit, 0.0, DEFAULT_STEPS)?
    } else {
        solve_direct(&unit, DEFAULT_STEPS, &tol)?.1
    };
    let m = (dimension - 1) as i32;
    let h = 1.0 / DEFAULT_STEPS as f64;
    let integrand: Vec<f64> = trace.samples.iter().map(|&(r, xi, _)| xi * xi * r.powi(m)).collect();
    let volume = simpson(&integrand, h);
    let end = trace.end_value();
    Ok(beta * end * end / volume)
}

/// Leading coefficient `β·Area(∂B₁)/|B₁| = βN` of `Σ(R)` as `R → 0`.
///
/// The small-radius expansion is established for `β > 0`; for `β < 0` the
/// returned value is the formal extension of the same formula.
pub fn asymptotic_slope(dimension: u32, beta: f64) -> f64 {
    beta * geometry::ball_geometry(dimension, 1.0).ratio()
}
