//! Measures, boundary areas and the isoperimetric margin.

use std::f64::consts::PI;

use crate::discretize::mesh::Mesh2D;
use crate::error::{Result, SpectraError};

/// Where a [`DomainGeometry`] came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometrySource {
    Ball { radius: f64 },
    Rectangle { a: f64, b: f64 },
    Annulus { inner: f64, outer: f64 },
    Mesh,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainGeometry {
    pub measure: f64,
    pub boundary_area: f64,
    pub dimension: u32,
    pub source: GeometrySource,
}

impl DomainGeometry {
    /// `Area(∂Ω)/|Ω|`.
    pub fn ratio(&self) -> f64 {
        self.boundary_area / self.measure
    }

    /// The geometry of `tΩ`.
    pub fn scaled(&self, t: f64) -> DomainGeometry {
        let n = self.dimension as i32;
        let source = match self.source {
            GeometrySource::Ball { radius } => GeometrySource::Ball { radius: radius * t },
            GeometrySource::Rectangle { a, b } => GeometrySource::Rectangle { a: a * t, b: b * t },
            GeometrySource::Annulus { inner, outer } => GeometrySource::Annulus { inner: inner * t, outer: outer * t },
            GeometrySource::Mesh => GeometrySource::Mesh,
        };
        DomainGeometry {
            measure: self.measure * t.powi(n),
            boundary_area: self.boundary_area * t.powi(n - 1),
            dimension: self.dimension,
            source,
        }
    }
}

/// `Γ(k/2)` for a positive integer `k`, by `Γ(x+1) = xΓ(x)` from `Γ(1) = 1`
/// and `Γ(1/2) = √π`.
pub fn gamma_half_integer(k: u32) -> f64 {
    assert!(k >= 1, "Γ(k/2) needs k ≥ 1");
    let (mut x, mut value) = if k.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = k as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Volume of the unit ball in `R^N`: `π^{N/2} / Γ(N/2 + 1)`.
pub fn omega_n(dimension: u32) -> f64 {
    assert!(dimension >= 1, "dimension must be at least 1");
    PI.powf(dimension as f64 / 2.0) / gamma_half_integer(dimension + 2)
}

/// Measure `ω_N R^N` and surface `N ω_N R^{N−1}` of `B_R`. For `N = 1` the
/// "surface" is the two endpoints.
pub fn ball_geometry(dimension: u32, radius: f64) -> DomainGeometry {
    let w = omega_n(dimension);
    let n = dimension as i32;
    DomainGeometry {
        measure: w * radius.powi(n),
        boundary_area: dimension as f64 * w * radius.powi(n - 1),
        dimension,
        source: GeometrySource::Ball { radius },
    }
}

pub fn rectangle_geometry(a: f64, b: f64) -> DomainGeometry {
    DomainGeometry { measure: a * b, boundary_area: 2.0 * (a + b), dimension: 2, source: GeometrySource::Rectangle { a, b } }
}

pub fn annulus_geometry(inner: f64, outer: f64) -> DomainGeometry {
    DomainGeometry {
        measure: PI * (outer * outer - inner * inner),
        boundary_area: 2.0 * PI * (outer + inner),
        dimension: 2,
        source: GeometrySource::Annulus { inner, outer },
    }
}

/// `Area(∂Ω) − N ω_N^{1/N} |Ω|^{(N−1)/N}`: nonnegative, zero for balls.
pub fn isoperimetric_check(g: &DomainGeometry) -> f64 {
    let n = g.dimension as f64;
    g.boundary_area - n * omega_n(g.dimension).powf(1.0 / n) * g.measure.powf((n - 1.0) / n)
}

/// Total triangle area and boundary edge length of a mesh.
pub fn mesh_geometry(mesh: &Mesh2D) -> Result<DomainGeometry> {
    let mut measure = 0.0;
    for t in &mesh.triangles {
        let a = mesh.triangle_area(t);
        if !(a > 0.0) {
            return Err(SpectraError::InvalidMesh(format!("triangle {t:?} has area {a}")));
        }
        measure += a;
    }
    let boundary_area: f64 = mesh.boundary_edges.iter().map(|e| mesh.edge_length(e.vertices)).sum();
    if !(boundary_area > 0.0) {
        return Err(SpectraError::InvalidMesh("mesh has no boundary".into()));
    }
    Ok(DomainGeometry { measure, boundary_area, dimension: 2, source: GeometrySource::Mesh })
}
