//! Discretized operators used to cross-check the closed forms.

pub mod convergence;
pub mod fem;
pub mod mesh;
pub mod meshio;
pub mod sparse;
pub mod tridiag;

/// Smallest eigenpair of a discrete pencil.
#[derive(Debug, Clone, PartialEq)]
pub struct PencilEigen {
    pub value: f64,
    pub vector: Vec<f64>,
    /// Relative residual `‖(A − σM)x‖ / ‖Ax‖` (absolute for tridiagonal).
    pub residual: f64,
    pub iterations: usize,
}
