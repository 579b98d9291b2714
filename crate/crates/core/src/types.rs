//! Shared vocabulary: boundary operators, problem descriptions, eigenvalue
//! estimates and the tolerance policy every solver consumes.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Result, SpectraError};

/// Kind of a boundary condition, with `Robin(0)` reported as `Neumann`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Robin,
}

/// A boundary condition `∂u/∂n + β u = 0`.
///
/// `Dirichlet` plays the role of `β = +∞` and carries no coefficient.
/// `Neumann` and `Robin(0.0)` are the same operator: they compare and hash
/// equal.
#[derive(Debug, Clone, Copy)]
pub enum BoundaryOperator {
    Dirichlet,
    Neumann,
    Robin(f64),
}

impl BoundaryOperator {
    pub fn robin(beta: f64) -> Self {
        BoundaryOperator::Robin(beta)
    }

    pub fn kind(&self) -> BoundaryKind {
        match *self {
            BoundaryOperator::Dirichlet => BoundaryKind::Dirichlet,
            BoundaryOperator::Neumann => BoundaryKind::Neumann,
            BoundaryOperator::Robin(0.0) => BoundaryKind::Neumann,
            BoundaryOperator::Robin(_) => BoundaryKind::Robin,
        }
    }

    /// Finite Robin coefficient, `Some(0.0)` for Neumann, `None` for Dirichlet.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            BoundaryOperator::Dirichlet => None,
            BoundaryOperator::Neumann => Some(0.0),
            BoundaryOperator::Robin(b) => Some(if b == 0.0 { 0.0 } else { b }),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryOperator::Dirichlet)
    }

    /// Canonical form: `Robin(0)` becomes `Neumann`.
    pub fn normalized(self) -> Self {
        match self.kind() {
            BoundaryKind::Neumann => BoundaryOperator::Neumann,
            _ => self,
        }
    }

    /// Partial order used by the monotonicity results: Dirichlet is the top
    /// element, finite coefficients compare by value.
    pub fn dominates(&self, other: &BoundaryOperator) -> bool {
        match (self.beta(), other.beta()) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(a), Some(b)) => a >= b,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.beta().is_none_or(f64::is_finite)
    }
}

impl PartialEq for BoundaryOperator {
    fn eq(&self, other: &Self) -> bool {
        match (self.beta(), other.beta()) {
            (None, None) => true,
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for BoundaryOperator {}

impl Hash for BoundaryOperator {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self.beta() {
            None => 0u8.hash(state),
            Some(b) => {
                1u8.hash(state);
                b.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for BoundaryOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            BoundaryKind::Dirichlet => write!(f, "D"),
            BoundaryKind::Neumann => write!(f, "N"),
            BoundaryKind::Robin => write!(f, "R({})", self.beta().unwrap_or(0.0)),
        }
    }
}

/// Accepts `D`, `N`, `R(b)`, `R:b`, `robin:b` (case-insensitive) or a bare
/// number `b`, which means `Robin(b)`.
impl std::str::FromStr for BoundaryOperator {
    type Err = SpectraError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        match lower.as_str() {
            "d" | "dirichlet" => return Ok(BoundaryOperator::Dirichlet),
            "n" | "neumann" => return Ok(BoundaryOperator::Neumann),
            _ => {}
        }
        let coefficient = lower
            .strip_prefix("robin")
            .or_else(|| lower.strip_prefix('r'))
            .map(|rest| rest.trim_start_matches(':').trim_start_matches('(').trim_end_matches(')'))
            .unwrap_or(&lower);
        match coefficient.trim().parse::<f64>() {
            Ok(b) if b.is_finite() => Ok(BoundaryOperator::Robin(b)),
            _ => Err(SpectraError::InvalidBoundary(t.to_string())),
        }
    }
}

/// `−(r^{N−1} u')' = σ r^{N−1} u` on `(0, length)` with one condition per end.
///
/// `radial_dimension = 1` is the plain interval problem. For `N ≥ 2` the
/// left end is the center of a ball and must carry a Neumann condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem1D {
    pub length: f64,
    pub left: BoundaryOperator,
    pub right: BoundaryOperator,
    pub radial_dimension: u32,
}

impl Problem1D {
    pub fn interval(length: f64, left: BoundaryOperator, right: BoundaryOperator) -> Self {
        Problem1D { length, left, right, radial_dimension: 1 }
    }

    pub fn radial(dimension: u32, radius: f64, outer: BoundaryOperator) -> Self {
        Problem1D { length: radius, left: BoundaryOperator::Neumann, right: outer, radial_dimension: dimension }
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(SpectraError::NonPositiveLength(self.length));
        }
        if self.radial_dimension == 0 {
            return Err(SpectraError::ZeroDimension);
        }
        if self.radial_dimension >= 2 && self.left.kind() != BoundaryKind::Neumann {
            return Err(SpectraError::RadialWithoutNeumannCore(self.radial_dimension));
        }
        Ok(self)
    }

    /// The same problem with the two endpoint conditions exchanged.
    pub fn swapped(&self) -> Self {
        Problem1D { left: self.right, right: self.left, ..*self }
    }
}

/// Which algorithm produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    TranscendentalRoot,
    Shooting,
    Tridiagonal,
    Fem,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::TranscendentalRoot => "transcendental-root",
            Method::Shooting => "shooting",
            Method::Tridiagonal => "tridiagonal",
            Method::Fem => "fem",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        [Method::ClosedForm, Method::TranscendentalRoot, Method::Shooting, Method::Tridiagonal, Method::Fem]
            .into_iter()
            .find(|m| m.as_str() == s)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nodal data of a P1 function on a triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshField {
    pub vertices: Arc<[[f64; 2]]>,
    pub triangles: Arc<[[usize; 3]]>,
    pub values: Arc<[f64]>,
}

/// A principal eigenfunction, max-normalized over its domain.
///
/// Closed-form variants are evaluated exactly; sampled variants interpolate
/// linearly between nodes (barycentrically on triangles).
#[derive(Debug, Clone, PartialEq)]
pub enum Eigenfunction {
    /// `cos(s x − phase) / scale` on `[0, length]`.
    Trig { s: f64, phase: f64, length: f64, scale: f64 },
    /// `(intercept + slope x) / scale` on `[0, length]`.
    Affine { slope: f64, intercept: f64, length: f64, scale: f64 },
    /// `(a e^{s(x−L)} + b e^{−sx}) / scale` on `[0, L]`; both exponentials
    /// stay in `(0, 1]`, so nothing overflows.
    Hyperbolic { s: f64, a: f64, b: f64, length: f64, scale: f64 },
    /// Piecewise linear through `(nodes[i], values[i])`, nodes increasing.
    Sampled { nodes: Arc<[f64]>, values: Arc<[f64]> },
    /// P1 field on a planar mesh.
    Mesh(MeshField),
}

impl Eigenfunction {
    /// Closed interval on which a one-dimensional eigenfunction is defined.
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Eigenfunction::Trig { length, .. } | Eigenfunction::Affine { length, .. } | Eigenfunction::Hyperbolic { length, .. } => {
                Some((0.0, *length))
            }
            Eigenfunction::Sampled { nodes, .. } => Some((nodes[0], nodes[nodes.len() - 1])),
            Eigenfunction::Mesh(_) => None,
        }
    }

    fn raw(&self, x: f64) -> f64 {
        match *self {
            Eigenfunction::Trig { s, phase, scale, .. } => (s * x - phase).cos() / scale,
            Eigenfunction::Affine { slope, intercept, scale, .. } => (intercept + slope * x) / scale,
            Eigenfunction::Hyperbolic { s, a, b, length, scale } => (a * (s * (x - length)).exp() + b * (-s * x).exp()) / scale,
            Eigenfunction::Sampled { ref nodes, ref values } => interpolate(nodes, values, x),
            Eigenfunction::Mesh(_) => f64::NAN,
        }
    }

    /// `(ψ, ψ', ψ'')` for the closed-form variants, `None` otherwise.
    pub fn derivatives(&self, x: f64) -> Option<(f64, f64, f64)> {
        match *self {
            Eigenfunction::Trig { s, phase, scale, .. } => {
                let (sin, cos) = (s * x - phase).sin_cos();
                Some((cos / scale, -s * sin / scale, -s * s * cos / scale))
            }
            Eigenfunction::Affine { slope, intercept, scale, .. } => Some(((intercept + slope * x) / scale, slope / scale, 0.0)),
            Eigenfunction::Hyperbolic { s, a, b, length, scale } => {
                let up = a * (s * (x - length)).exp() / scale;
                let down = b * (-s * x).exp() / scale;
                Some((up + down, s * (up - down), s * s * (up + down)))
            }
            _ => None,
        }
    }

    /// Evaluate a one-dimensional eigenfunction.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain().ok_or(SpectraError::OutOfDomain(x))?;
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return Err(SpectraError::OutOfDomain(x));
        }
        Ok(self.raw(x.clamp(lo, hi)))
    }

    /// Evaluate a mesh eigenfunction at a planar point.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64> {
        let Eigenfunction::Mesh(field) = self else {
            return Err(SpectraError::OutOfDomain(x));
        };
        for tri in field.triangles.iter() {
            let [p0, p1, p2] = [field.vertices[tri[0]], field.vertices[tri[1]], field.vertices[tri[2]]];
            let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
            let l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det;
            let l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det;
            let l0 = 1.0 - l1 - l2;
            let eps = -1e-12;
            if l0 >= eps && l1 >= eps && l2 >= eps {
                return Ok(l0 * field.values[tri[0]] + l1 * field.values[tri[1]] + l2 * field.values[tri[2]]);
            }
        }
        Err(SpectraError::OutOfDomain(x))
    }

    /// `n` equispaced samples over the domain, endpoints included.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let Some((lo, hi)) = self.domain() else {
            return Vec::new();
        };
        let n = n.max(2);
        (0..n)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                (x, self.raw(x))
            })
            .collect()
    }
}

fn interpolate(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let k = nodes.partition_point(|&t| t <= x);
    if k == 0 {
        return values[0];
    }
    if k >= nodes.len() {
        return values[nodes.len() - 1];
    }
    let (x0, x1) = (nodes[k - 1], nodes[k]);
    let w = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// Principal eigenvalue with its defect bound and eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    pub value: f64,
    pub residual: f64,
    pub method: Method,
    pub eigenfunction: Eigenfunction,
}

impl EigenEstimate {
    pub fn new(value: f64, residual: f64, method: Method, eigenfunction: Eigenfunction) -> Result<Self> {
        if !value.is_finite() {
            return Err(SpectraError::NonFinite(value));
        }
        if !(residual >= 0.0) || !residual.is_finite() {
            return Err(SpectraError::NonFinite(residual));
        }
        Ok(EigenEstimate { value, residual, method, eigenfunction })
    }
}

/// Stopping rules shared by the root finders and iterative eigensolvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Absolute tolerance on the root variable `s = √|σ|`.
    pub root_abs_tol: f64,
    /// Relative tolerance on eigenvalues.
    pub eig_rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy { root_abs_tol: 1e-12, eig_rel_tol: 1e-10, max_iterations: 200 }
    }
}

impl TolerancePolicy {
    /// Defaults for discretized operators (tridiagonal and finite elements).
    pub fn discretization() -> Self {
        TolerancePolicy { eig_rel_tol: 1e-6, max_iterations: 500, ..Self::default() }
    }

    pub fn validate(self) -> Result<Self> {
        if !(self.root_abs_tol > 0.0) {
            return Err(SpectraError::InvalidTolerance("root_abs_tol must be positive"));
        }
        if !(self.eig_rel_tol > 0.0) {
            return Err(SpectraError::InvalidTolerance("eig_rel_tol must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(SpectraError::InvalidTolerance("max_iterations must be at least 1"));
        }
        Ok(self)
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn neumann_is_robin_zero() {
        assert_eq!(BoundaryOperator::Neumann, BoundaryOperator::Robin(0.0));
        assert_eq!(BoundaryOperator::Neumann, BoundaryOperator::Robin(-0.0));
        assert_ne!(BoundaryOperator::Neumann, BoundaryOperator::Dirichlet);
        let set: HashSet<_> = [BoundaryOperator::Neumann, BoundaryOperator::Robin(0.0)].into_iter().collect();
        assert_eq!(set.len(), 1);
        assert_eq!(BoundaryOperator::Robin(0.0).kind(), BoundaryKind::Neumann);
        assert_eq!(BoundaryOperator::Dirichlet.beta(), None);
    }

    #[test]
    fn validate_examples() {
        use BoundaryOperator::*;
        assert!(Problem1D::interval(1.0, Dirichlet, Dirichlet).validate().is_ok());
        assert_eq!(Problem1D::interval(0.0, Neumann, Neumann).validate(), Err(SpectraError::NonPositiveLength(0.0)));
        let p = Problem1D { length: 1.0, left: Dirichlet, right: Robin(1.0), radial_dimension: 3 };
        assert_eq!(p.validate(), Err(SpectraError::RadialWithoutNeumannCore(3)));
        assert!(Problem1D::radial(3, 1.0, Robin(1.0)).validate().is_ok());
    }

    #[test]
    fn estimate_rejects_non_finite() {
        let f = Eigenfunction::Affine { slope: 0.0, intercept: 1.0, length: 1.0, scale: 1.0 };
        assert!(EigenEstimate::new(f64::NAN, 0.0, Method::ClosedForm, f.clone()).is_err());
        assert!(EigenEstimate::new(f64::INFINITY, 0.0, Method::ClosedForm, f.clone()).is_err());
        assert!(EigenEstimate::new(1.0, -1.0, Method::ClosedForm, f).is_err());
    }

    #[test]
    fn tolerance_validation() {
        assert!(TolerancePolicy::default().validate().is_ok());
        let bad = TolerancePolicy { max_iterations: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TolerancePolicy { eig_rel_tol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sampled_interpolation() {
        let f = Eigenfunction::Sampled { nodes: vec![0.0, 1.0, 2.0].into(), values: vec![0.5, 1.0, 0.0].into() };
        assert_eq!(f.eval(0.5).unwrap(), 0.75);
        assert_eq!(f.eval(2.0).unwrap(), 0.0);
        assert!(f.eval(2.5).is_err());
    }
}
