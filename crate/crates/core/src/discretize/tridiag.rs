//! Weighted P1 discretization of the interval/radial problem and a Sturm
//! bisection solver for the resulting tridiagonal pencil.

use crate::discretize::PencilEigen;
use crate::error::{Result, SpectraError};
use crate::types::{EigenEstimate, Eigenfunction, Method, Problem1D, TolerancePolicy};

/// Symmetric tridiagonal stiffness with a diagonal (lumped) mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
    pub mass_diag: Vec<f64>,
}

impl Tridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `D^{-1/2} K D^{-1/2}` with `D` the mass diagonal.
    fn standard_form(&self) -> (Vec<f64>, Vec<f64>) {
        let d: Vec<f64> = self.diag.iter().zip(&self.mass_diag).map(|(k, m)| k / m).collect();
        let e: Vec<f64> = self.off.iter().enumerate().map(|(i, k)| k / (self.mass_diag[i] * self.mass_diag[i + 1]).sqrt()).collect();
        (d, e)
    }
}

/// Nodes and free-unknown mapping of a uniform grid on `(0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub nodes: Vec<f64>,
    /// Index of the first free node (1 when the left end is Dirichlet).
    pub first: usize,
}

/// Assemble `−(r^{N−1}u')' = σ r^{N−1}u` with weighted P1 elements on `n`
/// cells. Dirichlet ends are eliminated, Robin ends add `β w` to the end
/// diagonal (`w = L^{N−1}` at the outer end), Neumann adds nothing.
pub fn assemble_1d(problem: &Problem1D, n: usize) -> Result<(Tridiag, Grid1D)> {
    let problem = problem.validate()?;
    if n < 16 {
        return Err(SpectraError::TooCoarse(n, 16));
    }
    let big_n = problem.radial_dimension as i32;
    let nf = big_n as f64;
    let l = problem.length;
    let h = l / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| if i == n { l } else { i as f64 * h }).collect();

    let mut k_diag = vec![0.0; n + 1];
    let mut k_off = vec![0.0; n];
    let mut mass = vec![0.0; n + 1];
    for e in 0..n {
        let (a, b) = (nodes[e], nodes[e + 1]);
        let hw = b - a;
        // ∫ r^{N−1} dr and ∫ r^N dr over the cell
        let w0 = (b.powi(big_n) - a.powi(big_n)) / nf;
        let w1 = (b.powi(big_n + 1) - a.powi(big_n + 1)) / (nf + 1.0);
        let k = w0 / (hw * hw);
        k_diag[e] += k;
        k_diag[e + 1] += k;
        k_off[e] -= k;
        // ∫ w φ over the cell for the left and right hat
        let right = (w1 - a * w0) / hw;
        let left = w0 - right;
        mass[e] += left;
        mass[e + 1] += right;
    }
    if let Some(b0) = problem.left.beta() {
        k_diag[0] += b0 * if big_n == 1 { 1.0 } else { 0.0 };
    }
    if let Some(bl) = problem.right.beta() {
        k_diag[n] += bl * l.powi(big_n - 1);
    }

    let first = usize::from(problem.left.is_dirichlet());
    let last = if problem.right.is_dirichlet() { n - 1 } else { n };
    let m = Tridiag { diag: k_diag[first..=last].to_vec(), off: k_off[first..last].to_vec(), mass_diag: mass[first..=last].to_vec() };
    Ok((m, Grid1D { nodes, first }))
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`,
/// from the signs of the LDLᵀ pivots of `T − xI`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    let tiny = f64::MIN_POSITIVE.sqrt();
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve `(T − μI) y = b` for symmetric tridiagonal `T` by LDLᵀ.
fn solve_shifted(d: &[f64], e: &[f64], mu: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let mut piv = vec![0.0; n];
    let mut y = b.to_vec();
    piv[0] = d[0] - mu;
    for i in 1..n {
        let l = e[i - 1] / piv[i - 1];
        piv[i] = d[i] - mu - l * e[i - 1];
        y[i] -= l * y[i - 1];
    }
    y[n - 1] /= piv[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = (y[i] - e[i] * y[i + 1]) / piv[i];
    }
    y
}

fn tridiag_apply(d: &[f64], e: &[f64], v: &[f64]) -> Vec<f64> {
    let n = d.len();
    (0..n)
        .map(|i| {
            let mut acc = d[i] * v[i];
            if i > 0 {
                acc += e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += e[i] * v[i + 1];
            }
            acc
        })
        .collect()
}

/// Smallest eigenvalue of the pencil `(K, diag(m))` by Sturm bisection,
/// refined by inverse iteration and a Rayleigh quotient. The eigenvector
/// (in the original variables) is sign-normalized to be positive.
pub fn smallest_eig_tridiag(m: &Tridiag, tol: &TolerancePolicy) -> Result<PencilEigen> {
    let n = m.len();
    if n == 0 {
        return Err(SpectraError::TooCoarse(0, 1));
    }
    if m.mass_diag.iter().any(|&w| !(w > 0.0)) {
        return Err(SpectraError::InvalidMesh("mass weights must be positive".into()));
    }
    let (d, e) = m.standard_form();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    lo -= 1e-8 * scale;
    hi += 1e-8 * scale;

    let mut iterations = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * scale || mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if iterations > tol.max_iterations.max(300) {
            return Err(SpectraError::MaxIterations(iterations));
        }
        if sturm_count(&d, &e, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // inverse iteration just below the bracket
    let mu = lo - (hi - lo) - 8.0 * f64::EPSILON * scale;
    let mut y = vec![1.0; n];
    for _ in 0..3 {
        let z = solve_shifted(&d, &e, mu, &y);
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        y = z.into_iter().map(|v| v / norm).collect();
    }
    let ty = tridiag_apply(&d, &e, &y);
    let rho: f64 = ty.iter().zip(&y).map(|(a, b)| a * b).sum();
    let residual = ty.iter().zip(&y).map(|(a, b)| (a - rho * b).powi(2)).sum::<f64>().sqrt();

    let mut vector: Vec<f64> = y.iter().zip(&m.mass_diag).map(|(v, w)| v / w.sqrt()).collect();
    if vector.iter().sum::<f64>() < 0.0 {
        vector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(PencilEigen { value: rho, vector, residual, iterations })
}

/// Principal eigenvalue of a [`Problem1D`] from its `n`-cell discretization.
pub fn principal_eigenvalue_tridiag(problem: &Problem1D, n: usize, tol: &TolerancePolicy) -> Result<EigenEstimate> {
    let (m, grid) = assemble_1d(problem, n)?;
    let eig = smallest_eig_tridiag(&m, tol)?;
    let mut values = vec![0.0; grid.nodes.len()];
    for (k, v) in eig.vector.iter().enumerate() {
        values[grid.first + k] = *v;
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    values.iter_mut().for_each(|v| *v /= max);
    let f = Eigenfunction::Sampled { nodes: grid.nodes.into(), values: values.into() };
    EigenEstimate::new(eig.value, eig.residual, Method::Tridiagonal, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::BoundaryOperator::*;
    use std::f64::consts::PI;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::discretization()
    }

    #[test]
    fn two_by_two() {
        let m = Tridiag { diag: vec![2.0, 2.0], off: vec![-1.0], mass_diag: vec![1.0, 1.0] };
        let eig = smallest_eig_tridiag(&m, &tol()).unwrap();
        assert!((eig.value - 1.0).abs() < 1e-14);
        assert!((eig.vector[0] - eig.vector[1]).abs() < 1e-12);
    }

    #[test]
    fn dirichlet_finite_difference_spectrum() {
        for n in [17usize, 64, 513] {
            let l = 2.5;
            let h = l / (n + 1) as f64;
            let m = Tridiag { diag: vec![2.0 / (h * h); n], off: vec![-1.0 / (h * h); n - 1], mass_diag: vec![1.0; n] };
            let exact = 2.0 / (h * h) * (1.0 - (PI * h / l).cos());
            let eig = smallest_eig_tridiag(&m, &tol()).unwrap();
            assert!((eig.value - exact).abs() <= 1e-10 * exact, "n={n}: {} vs {exact}", eig.value);
        }
    }

    #[test]
    fn sturm_counts_every_eigenvalue() {
        let n = 40;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        for k in 1..=n {
            let lam = 2.0 - 2.0 * (k as f64 * PI / (n + 1) as f64).cos();
            assert_eq!(sturm_count(&d, &e, lam - 1e-9), k - 1);
            assert_eq!(sturm_count(&d, &e, lam + 1e-9), k);
        }
    }

    #[test]
    fn neumann_kernel() {
        let p = Problem1D::interval(1.0, Neumann, Neumann);
        let (m, _) = assemble_1d(&p, 16).unwrap();
        let eig = smallest_eig_tridiag(&m, &tol()).unwrap();
        assert!(eig.value.abs() < 1e-10, "{}", eig.value);
        let v0 = eig.vector[0];
        assert!(eig.vector.iter().all(|v| (v - v0).abs() < 1e-8 * v0.abs()));
    }

    #[test]
    fn dirichlet_interval() {
        let p = Problem1D::interval(1.0, Dirichlet, Dirichlet);
        let est = principal_eigenvalue_tridiag(&p, 1024, &tol()).unwrap();
        assert!((est.value - PI * PI).abs() < 1e-4);
    }

    #[test]
    fn opposite_robin_coefficients() {
        let p = Problem1D::interval(2.0, Robin(3.0), Robin(-3.0));
        let est = principal_eigenvalue_tridiag(&p, 2048, &tol()).unwrap();
        assert!((est.value + 9.0).abs() < 1e-3, "{}", est.value);
    }

    #[test]
    fn radial_disk_dirichlet() {
        let p = Problem1D::radial(2, 1.0, Dirichlet);
        let est = principal_eigenvalue_tridiag(&p, 2048, &tol()).unwrap();
        assert!((est.value - 5.783185963).abs() < 1e-3, "{}", est.value);
    }

    #[test]
    fn too_coarse() {
        let p = Problem1D::interval(1.0, Dirichlet, Dirichlet);
        assert_eq!(assemble_1d(&p, 8).unwrap_err(), SpectraError::TooCoarse(8, 16));
    }

    #[test]
    fn eigenvector_positive() {
        let p = Problem1D::interval(3.0, Robin(-2.0), Dirichlet);
        let est = principal_eigenvalue_tridiag(&p, 256, &tol()).unwrap();
        let s = est.eigenfunction.samples(300);
        assert!(s[1..s.len() - 1].iter().all(|x| x.1 > 0.0));
    }
}
