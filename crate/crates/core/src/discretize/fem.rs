//! P1 finite elements for `−Δu = σu` with mixed boundary conditions.

use std::sync::Arc;

use crate::discretize::mesh::Mesh2D;
use crate::discretize::sparse::{smallest_eig_sparse, SparseBuilder, SparseSym};
use crate::error::{Result, SpectraError};
use crate::types::{BoundaryOperator, EigenEstimate, Eigenfunction, MeshField, Method, TolerancePolicy};

/// Which boundary operator applies on each boundary edge.
pub enum BoundaryField<'a> {
    /// The tags stored on the mesh.
    FromMesh,
    Uniform(BoundaryOperator),
    /// Evaluated at each edge midpoint; lets `β` vary along the boundary.
    Function(&'a dyn Fn([f64; 2]) -> BoundaryOperator),
}

impl BoundaryField<'_> {
    fn at(&self, mesh: &Mesh2D, edge: usize) -> BoundaryOperator {
        let e = &mesh.boundary_edges[edge];
        match self {
            BoundaryField::FromMesh => e.condition,
            BoundaryField::Uniform(op) => *op,
            BoundaryField::Function(f) => f(mesh.edge_midpoint(e.vertices)),
        }
    }
}

/// Assembled stiffness/mass pair on the free (non-Dirichlet) vertices.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub stiffness: SparseSym,
    pub mass: SparseSym,
    /// Free-unknown index of each vertex, `None` on Dirichlet vertices.
    pub dof_of_vertex: Vec<Option<usize>>,
    /// Vertices touched by both a Dirichlet edge and a non-Dirichlet edge.
    pub warnings: Vec<String>,
}

pub fn assemble_fem(mesh: &Mesh2D, field: &BoundaryField) -> Result<FemSystem> {
    mesh.validate()?;
    let nv = mesh.vertices.len();
    let ops: Vec<BoundaryOperator> = (0..mesh.boundary_edges.len()).map(|e| field.at(mesh, e)).collect();
    let mut dirichlet = vec![false; nv];
    let mut natural = vec![false; nv];
    for (e, op) in mesh.boundary_edges.iter().zip(&ops) {
        if let Some(b) = op.beta() {
            if !b.is_finite() {
                return Err(SpectraError::NonFinite(b));
            }
        }
        let flags = if op.is_dirichlet() { &mut dirichlet } else { &mut natural };
        flags[e.vertices[0]] = true;
        flags[e.vertices[1]] = true;
    }
    let warnings: Vec<String> = (0..nv)
        .filter(|&v| dirichlet[v] && natural[v])
        .map(|v| format!("vertex {v} lies on Dirichlet and natural boundary edges; treated as Dirichlet"))
        .collect();

    let mut dof_of_vertex = vec![None; nv];
    let mut n = 0;
    for v in 0..nv {
        if !dirichlet[v] {
            dof_of_vertex[v] = Some(n);
            n += 1;
        }
    }
    if n == 0 {
        return Err(SpectraError::TooCoarse(0, 1));
    }

    let mut k = SparseBuilder::new(n);
    let mut m = SparseBuilder::new(n);
    for t in &mesh.triangles {
        let p = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
        let area = mesh.triangle_area(t);
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for i in 0..3 {
            let (j, l) = ((i + 1) % 3, (i + 2) % 3);
            b[i] = p[j][1] - p[l][1];
            c[i] = p[l][0] - p[j][0];
        }
        for i in 0..3 {
            let Some(di) = dof_of_vertex[t[i]] else { continue };
            for j in i..3 {
                let Some(dj) = dof_of_vertex[t[j]] else { continue };
                k.add(di, dj, (b[i] * b[j] + c[i] * c[j]) / (4.0 * area));
                m.add(di, dj, if i == j { area / 6.0 } else { area / 12.0 });
            }
        }
    }
    for (e, op) in mesh.boundary_edges.iter().zip(&ops) {
        let beta = match op.beta() {
            Some(b) if b != 0.0 => b,
            _ => continue,
        };
        let len = mesh.edge_length(e.vertices);
        let [a, b] = [dof_of_vertex[e.vertices[0]], dof_of_vertex[e.vertices[1]]];
        if let Some(a) = a {
            k.add(a, a, beta * len / 3.0);
        }
        if let Some(b) = b {
            k.add(b, b, beta * len / 3.0);
        }
        if let (Some(a), Some(b)) = (a, b) {
            k.add(a, b, beta * len / 6.0);
        }
    }
    Ok(FemSystem { stiffness: k.build(), mass: m.build(), dof_of_vertex, warnings })
}

/// Principal eigenvalue of the P1 discretization on `mesh`.
pub fn principal_eigenvalue_fem(
    mesh: &Mesh2D,
    field: &BoundaryField,
    shift_hint: Option<f64>,
    tol: &TolerancePolicy,
) -> Result<(EigenEstimate, Vec<String>)> {
    let sys = assemble_fem(mesh, field)?;
    let eig = smallest_eig_sparse(&sys.stiffness, &sys.mass, shift_hint, tol)?;
    let mut values: Vec<f64> = sys.dof_of_vertex.iter().map(|d| d.map_or(0.0, |d| eig.vector[d])).collect();
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    values.iter_mut().for_each(|v| *v /= max);
    let field =
        MeshField { vertices: Arc::from(mesh.vertices.as_slice()), triangles: Arc::from(mesh.triangles.as_slice()), values: values.into() };
    let est = EigenEstimate::new(eig.value, eig.residual, Method::Fem, Eigenfunction::Mesh(field))?;
    Ok((est, sys.warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::convergence::convergence_order;
    use crate::discretize::mesh::{mesh_disk, mesh_rectangle};
    use crate::exact1d::principal_eigenvalue_1d;
    use crate::radial::{principal_eigenvalue_ball, BallProblem};
    use crate::types::{BoundaryOperator::*, Problem1D};
    use std::f64::consts::PI;

    fn tol() -> TolerancePolicy {
        TolerancePolicy { eig_rel_tol: 1e-9, ..TolerancePolicy::discretization() }
    }

    #[test]
    fn element_matrices_annihilate_constants() {
        let mesh = mesh_rectangle(1.0, 1.0, 8).unwrap();
        let sys = assemble_fem(&mesh, &BoundaryField::Uniform(Neumann)).unwrap();
        let ones = vec![1.0; sys.stiffness.dim()];
        assert!(sys.stiffness.mul(&ones).iter().all(|v| v.abs() < 1e-12));
        let total: f64 = sys.mass.mul(&ones).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn robin_term_integrates_beta_over_boundary() {
        let mesh = mesh_rectangle(1.0, 1.0, 8).unwrap();
        let sys = assemble_fem(&mesh, &BoundaryField::Uniform(Robin(2.5))).unwrap();
        let ones = vec![1.0; sys.stiffness.dim()];
        let total: f64 = sys.stiffness.mul(&ones).iter().sum();
        assert!((total - 2.5 * 4.0).abs() < 1e-12);
    }

    #[test]
    fn unit_square_dirichlet() {
        let mesh = mesh_rectangle(1.0, 1.0, 64).unwrap();
        let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Dirichlet), None, &tol()).unwrap();
        let exact = 2.0 * PI * PI;
        assert!((est.value - exact).abs() < 1e-2 * exact, "{}", est.value);
    }

    #[test]
    fn unit_square_dirichlet_second_order() {
        let pairs: Vec<(f64, f64)> = [16, 32, 64]
            .iter()
            .map(|&res| {
                let mesh = mesh_rectangle(1.0, 1.0, res).unwrap();
                let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Dirichlet), None, &tol()).unwrap();
                (1.0 / res as f64, est.value)
            })
            .collect();
        assert!((pairs[2].1 - 2.0 * PI * PI).abs() < 5e-3 * 2.0 * PI * PI);
        let p = convergence_order(&pairs).unwrap();
        assert!((1.8..=2.2).contains(&p), "{p}");
    }

    #[test]
    fn shrinking_squares_with_negative_coefficient() {
        let mut last = f64::INFINITY;
        for a in [1.0, 0.5, 0.25] {
            let mesh = mesh_rectangle(a, a, 32).unwrap();
            let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Robin(-1.0)), None, &tol()).unwrap();
            assert!(est.value < -4.0 / a && est.value < last, "a={a}: {}", est.value);
            last = est.value;
        }
    }

    #[test]
    fn disk_robin_matches_shooting() {
        let mesh = mesh_disk(1.0, 64).unwrap();
        let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Robin(1.0)), None, &tol()).unwrap();
        let ball = BallProblem { dimension: 2, radius: 1.0, boundary: Robin(1.0) };
        let exact = principal_eigenvalue_ball(&ball, &TolerancePolicy::default()).unwrap().value;
        assert!((est.value - exact).abs() < 5e-3 * exact, "{} vs {exact}", est.value);
    }

    #[test]
    fn unit_square_neumann_is_zero() {
        let mesh = mesh_rectangle(1.0, 1.0, 16).unwrap();
        let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Neumann), None, &tol()).unwrap();
        assert!(est.value.abs() < 1e-8, "{}", est.value);
    }

    #[test]
    fn square_robin_matches_separated_interval() {
        for beta in [1.0, -1.0] {
            let mesh = mesh_rectangle(1.0, 1.0, 48).unwrap();
            let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Robin(beta)), None, &tol()).unwrap();
            let p = Problem1D::interval(1.0, Robin(beta), Robin(beta));
            let exact = 2.0 * principal_eigenvalue_1d(&p, &TolerancePolicy::default()).unwrap().value;
            assert!((est.value - exact).abs() < 5e-3 * exact.abs(), "β={beta}: {} vs {exact}", est.value);
        }
    }

    #[test]
    fn disk_dirichlet() {
        let mesh = mesh_disk(1.0, 32).unwrap();
        let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Dirichlet), None, &tol()).unwrap();
        assert!((est.value - 5.783185963).abs() < 2e-2 * 5.78, "{}", est.value);
        assert!(est.eigenfunction.eval_xy(0.0, 0.0).unwrap() > 0.99);
    }

    #[test]
    fn mixed_tags_warn() {
        let mesh = mesh_rectangle(1.0, 1.0, 8).unwrap();
        let f = |p: [f64; 2]| if p[0] < 1e-12 { Dirichlet } else { Robin(1.0) };
        let (est, warnings) = principal_eigenvalue_fem(&mesh, &BoundaryField::Function(&f), None, &tol()).unwrap();
        assert_eq!(warnings.len(), 2);
        assert!(est.value > 0.0);
    }

    #[test]
    fn interior_values_positive() {
        let mesh = mesh_rectangle(1.0, 1.0, 24).unwrap();
        let (est, _) = principal_eigenvalue_fem(&mesh, &BoundaryField::Uniform(Robin(-2.0)), None, &tol()).unwrap();
        let Eigenfunction::Mesh(f) = &est.eigenfunction else { panic!() };
        assert!(f.values.iter().all(|&v| v > 0.0));
    }
}
