//! Triangulations with tagged boundary edges.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Result, SpectraError};
use crate::types::BoundaryOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainTag {
    Rectangle { a: f64, b: f64 },
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
    Imported,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub condition: BoundaryOperator,
}

/// A conforming triangulation. Triangles are counter-clockwise; every edge
/// that belongs to exactly one triangle is listed in `boundary_edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub domain: DomainTag,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh2D {
    /// Signed area (positive for counter-clockwise triangles).
    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [p0, p1, p2] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    pub fn edge_length(&self, e: [usize; 2]) -> f64 {
        let (p, q) = (self.vertices[e[0]], self.vertices[e[1]]);
        (p[0] - q[0]).hypot(p[1] - q[1])
    }

    pub fn edge_midpoint(&self, e: [usize; 2]) -> [f64; 2] {
        let (p, q) = (self.vertices[e[0]], self.vertices[e[1]]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Longest edge over all triangles.
    pub fn max_edge(&self) -> f64 {
        self.triangles.iter().flat_map(|t| [[t[0], t[1]], [t[1], t[2]], [t[2], t[0]]]).map(|e| self.edge_length(e)).fold(0.0, f64::max)
    }

    /// Check orientation, indices, and that the tagged boundary is exactly
    /// the set of edges owned by one triangle and forms closed loops.
    /// Returns the number of boundary loops.
    pub fn validate(&self) -> Result<usize> {
        let nv = self.vertices.len();
        if self.triangles.is_empty() {
            return Err(SpectraError::InvalidMesh("no triangles".into()));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(SpectraError::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let mut owners: HashMap<(usize, usize), u32> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(SpectraError::InvalidMesh(format!("triangle {i} references a missing vertex")));
            }
            let area = self.triangle_area(t);
            if !(area > 0.0) {
                return Err(SpectraError::InvalidMesh(format!("triangle {i} has non-positive area {area}")));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                *owners.entry(key(a, b)).or_insert(0) += 1;
            }
        }
        if let Some((e, n)) = owners.iter().find(|(_, &n)| n > 2) {
            return Err(SpectraError::InvalidMesh(format!("edge {e:?} is shared by {n} triangles")));
        }
        let mut degree: HashMap<usize, u32> = HashMap::new();
        let mut listed = 0;
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            match owners.get(&key(a, b)) {
                Some(1) => {}
                _ => return Err(SpectraError::InvalidMesh(format!("boundary edge {a}-{b} is not owned by exactly one triangle"))),
            }
            if let Some(beta) = e.condition.beta() {
                if !beta.is_finite() {
                    return Err(SpectraError::NonFinite(beta));
                }
            }
            *degree.entry(a).or_insert(0) += 1;
            *degree.entry(b).or_insert(0) += 1;
            listed += 1;
        }
        let open = owners.values().filter(|&&n| n == 1).count();
        if open != listed {
            return Err(SpectraError::InvalidMesh(format!("{open} boundary edges in the triangulation but {listed} tagged")));
        }
        if let Some((v, d)) = degree.iter().find(|(_, &d)| d != 2) {
            return Err(SpectraError::InvalidMesh(format!("boundary vertex {v} has degree {d}; the boundary is not closed")));
        }
        Ok(self.boundary_loops())
    }

    fn boundary_loops(&self) -> usize {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for e in &self.boundary_edges {
            adj.entry(e.vertices[0]).or_default().push(e.vertices[1]);
            adj.entry(e.vertices[1]).or_default().push(e.vertices[0]);
        }
        let mut seen = std::collections::HashSet::new();
        let mut loops = 0;
        let mut starts: Vec<usize> = adj.keys().copied().collect();
        starts.sort_unstable();
        for s in starts {
            if !seen.insert(s) {
                continue;
            }
            loops += 1;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &adj[&v] {
                    if seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        loops
    }

    /// Retag every boundary edge from its midpoint.
    pub fn with_boundary(mut self, f: impl Fn([f64; 2]) -> BoundaryOperator) -> Self {
        for i in 0..self.boundary_edges.len() {
            let m = self.edge_midpoint(self.boundary_edges[i].vertices);
            self.boundary_edges[i].condition = f(m);
        }
        self
    }

    pub fn with_uniform_boundary(self, op: BoundaryOperator) -> Self {
        self.with_boundary(|_| op)
    }

    /// The mesh of `tΩ`.
    pub fn scaled(&self, t: f64) -> Mesh2D {
        let domain = match self.domain {
            DomainTag::Rectangle { a, b } => DomainTag::Rectangle { a: a * t, b: b * t },
            DomainTag::Disk { radius } => DomainTag::Disk { radius: radius * t },
            DomainTag::Annulus { inner, outer } => DomainTag::Annulus { inner: inner * t, outer: outer * t },
            DomainTag::Imported => DomainTag::Imported,
        };
        Mesh2D {
            vertices: self.vertices.iter().map(|p| [p[0] * t, p[1] * t]).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
            domain,
        }
    }
}

/// `[0, a] × [0, b]` with `res` cells across the shorter side, each cell
/// split along alternating diagonals. Boundary is tagged Neumann.
pub fn mesh_rectangle(a: f64, b: f64, res: usize) -> Result<Mesh2D> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(SpectraError::DegenerateGeometry(format!("rectangle sides {a} × {b}")));
    }
    if res < 8 {
        return Err(SpectraError::TooCoarse(res, 8));
    }
    let short = a.min(b);
    let nx = ((res as f64 * a / short).round() as usize).max(1);
    let ny = ((res as f64 * b / short).round() as usize).max(1);
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([a * i as f64 / nx as f64, b * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            } else {
                triangles.push([v00, v10, v01]);
                triangles.push([v10, v11, v01]);
            }
        }
    }
    let mut loop_vertices = Vec::new();
    loop_vertices.extend((0..nx).map(|i| idx(i, 0)));
    loop_vertices.extend((0..ny).map(|j| idx(nx, j)));
    loop_vertices.extend((1..=nx).rev().map(|i| idx(i, ny)));
    loop_vertices.extend((1..=ny).rev().map(|j| idx(0, j)));
    let boundary_edges = closed_loop(&loop_vertices);
    Ok(Mesh2D { vertices, triangles, boundary_edges, domain: DomainTag::Rectangle { a, b } })
}

fn closed_loop(vs: &[usize]) -> Vec<BoundaryEdge> {
    (0..vs.len()).map(|k| BoundaryEdge { vertices: [vs[k], vs[(k + 1) % vs.len()]], condition: BoundaryOperator::Neumann }).collect()
}

/// Triangulate the band between two concentric rings of vertices, each
/// listed counter-clockwise by increasing angle starting at angle 0.
fn stitch(inner: &[usize], outer: &[usize], triangles: &mut Vec<[usize; 3]>) {
    let (m, n) = (inner.len(), outer.len());
    let (mut i, mut j) = (0, 0);
    while i < m || j < n {
        let next_in = (i + 1) as f64 / m as f64;
        let next_out = (j + 1) as f64 / n as f64;
        if j < n && (i == m || next_out <= next_in) {
            triangles.push([inner[i % m], outer[j], outer[(j + 1) % n]]);
            j += 1;
        } else {
            triangles.push([inner[i], outer[j % n], inner[(i + 1) % m]]);
            i += 1;
        }
    }
}

fn ring(vertices: &mut Vec<[f64; 2]>, radius: f64, count: usize) -> Vec<usize> {
    let start = vertices.len();
    for k in 0..count {
        let t = 2.0 * PI * k as f64 / count as f64;
        vertices.push([radius * t.cos(), radius * t.sin()]);
    }
    (start..start + count).collect()
}

/// Disk of radius `R` centred at the origin: `res` concentric rings, ring
/// `k` holding `6k` vertices, outer ring exactly on the circle.
pub fn mesh_disk(radius: f64, res: usize) -> Result<Mesh2D> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SpectraError::DegenerateGeometry(format!("disk radius {radius}")));
    }
    if res < 8 {
        return Err(SpectraError::TooCoarse(res, 8));
    }
    let mut vertices = vec![[0.0, 0.0]];
    let mut triangles = Vec::new();
    let mut prev = ring(&mut vertices, radius / res as f64, 6);
    for k in 0..6 {
        triangles.push([0, prev[k], prev[(k + 1) % 6]]);
    }
    for k in 2..=res {
        let r = if k == res { radius } else { radius * k as f64 / res as f64 };
        let cur = ring(&mut vertices, r, 6 * k);
        stitch(&prev, &cur, &mut triangles);
        prev = cur;
    }
    let boundary_edges = closed_loop(&prev);
    Ok(Mesh2D { vertices, triangles, boundary_edges, domain: DomainTag::Disk { radius } })
}

/// Annulus `inner < |x| < outer` with target spacing `outer / res`.
pub fn mesh_annulus(inner: f64, outer: f64, res: usize) -> Result<Mesh2D> {
    if !(inner > 0.0 && outer > inner && outer.is_finite()) {
        return Err(SpectraError::DegenerateGeometry(format!("annulus radii {inner}, {outer}")));
    }
    if res < 8 {
        return Err(SpectraError::TooCoarse(res, 8));
    }
    let h = outer / res as f64;
    let layers = ((outer - inner) / h).ceil().max(1.0) as usize;
    let count = |r: f64| ((6.0 * res as f64 * r / outer).round() as usize).max(6);
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let first = ring(&mut vertices, inner, count(inner));
    let mut prev = first.clone();
    for k in 1..=layers {
        let r = if k == layers { outer } else { inner + (outer - inner) * k as f64 / layers as f64 };
        let cur = ring(&mut vertices, r, count(r));
        stitch(&prev, &cur, &mut triangles);
        prev = cur;
    }
    let mut boundary_edges = closed_loop(&prev);
    let reversed: Vec<usize> = first.iter().rev().copied().collect();
    boundary_edges.extend(closed_loop(&reversed));
    Ok(Mesh2D { vertices, triangles, boundary_edges, domain: DomainTag::Annulus { inner, outer } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{isoperimetric_check, mesh_geometry};

    #[test]
    fn rectangle_invariants() {
        let m = mesh_rectangle(1.0, 1.0, 32).unwrap();
        assert_eq!(m.vertices.len(), 33 * 33);
        assert_eq!(m.triangles.len(), 2 * 32 * 32);
        assert_eq!(m.validate().unwrap(), 1);
        let g = mesh_geometry(&m).unwrap();
        assert!((g.measure - 1.0).abs() < 1e-12 && (g.boundary_area - 4.0).abs() < 1e-12);
        let m = mesh_rectangle(2.0, 3.0, 8).unwrap();
        assert_eq!(m.validate().unwrap(), 1);
        let g = mesh_geometry(&m).unwrap();
        assert!((g.measure - 6.0).abs() < 1e-12 && (g.boundary_area - 10.0).abs() < 1e-12);
    }

    #[test]
    fn disk_invariants() {
        let m = mesh_disk(1.0, 64).unwrap();
        assert_eq!(m.validate().unwrap(), 1);
        assert_eq!(m.vertices.len(), 1 + 3 * 64 * 65);
        let g = mesh_geometry(&m).unwrap();
        assert!((g.measure - PI).abs() < 1e-3 * PI, "{}", g.measure);
        assert!(isoperimetric_check(&g).abs() < 5e-3);
        let fine = mesh_geometry(&mesh_disk(1.0, 128).unwrap()).unwrap();
        assert!((fine.boundary_area - 2.0 * PI).abs() < 5e-4 * 2.0 * PI);
        for e in &m.boundary_edges {
            for v in e.vertices {
                let p = m.vertices[v];
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn annulus_invariants() {
        let m = mesh_annulus(0.5, 1.0, 64).unwrap();
        assert_eq!(m.validate().unwrap(), 2);
        let g = mesh_geometry(&m).unwrap();
        let exact = PI * 0.75;
        assert!((g.measure - exact).abs() < 5e-3 * exact, "{}", g.measure);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(mesh_rectangle(0.0, 1.0, 8), Err(SpectraError::DegenerateGeometry(_))));
        assert!(matches!(mesh_disk(-1.0, 8), Err(SpectraError::DegenerateGeometry(_))));
        assert!(matches!(mesh_annulus(1.0, 1.0, 8), Err(SpectraError::DegenerateGeometry(_))));
        assert_eq!(mesh_disk(1.0, 4).unwrap_err(), SpectraError::TooCoarse(4, 8));
    }

    #[test]
    fn broken_meshes_are_rejected() {
        let mut m = mesh_rectangle(1.0, 1.0, 8).unwrap();
        m.boundary_edges.pop();
        assert!(matches!(m.validate(), Err(SpectraError::InvalidMesh(_))));
        let mut m = mesh_rectangle(1.0, 1.0, 8).unwrap();
        m.triangles[0].swap(1, 2);
        assert!(matches!(m.validate(), Err(SpectraError::InvalidMesh(_))));
    }

    #[test]
    fn retagging_by_midpoint() {
        let m = mesh_rectangle(1.0, 1.0, 8).unwrap().with_boundary(|p| {
            if p[0] < 1e-12 {
                BoundaryOperator::Dirichlet
            } else {
                BoundaryOperator::Robin(2.0)
            }
        });
        let d = m.boundary_edges.iter().filter(|e| e.condition.is_dirichlet()).count();
        assert_eq!(d, 8);
    }
}
