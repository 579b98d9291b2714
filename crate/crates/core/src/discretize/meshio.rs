//! Plain-text mesh files.
//!
//! ```text
//! # comment
//! VERTICES
//! 0 0
//! 1 0
//! 0 1
//! TRIANGLES
//! 0 1 2
//! BOUNDARY
//! 0 1 D
//! 1 2 R 1.5
//! 2 0 N
//! ```
//!
//! Indices are 0-based. Boundary kinds are `D`, `N` and `R <beta>`.

use std::fmt::Write as _;

use crate::discretize::mesh::{BoundaryEdge, DomainTag, Mesh2D};
use crate::error::{Result, SpectraError};
use crate::types::BoundaryOperator;

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Vertices,
    Triangles,
    Boundary,
}

fn err(line: usize, msg: impl Into<String>) -> SpectraError {
    SpectraError::MeshParse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("bad {what} `{tok}`")))
}

/// Parse and validate a mesh.
pub fn parse_mesh(text: &str) -> Result<Mesh2D> {
    let mut section = Section::None;
    let mut mesh = Mesh2D { vertices: Vec::new(), triangles: Vec::new(), boundary_edges: Vec::new(), domain: DomainTag::Imported };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match content.to_ascii_uppercase().as_str() {
            "VERTICES" => {
                section = Section::Vertices;
                continue;
            }
            "TRIANGLES" => {
                section = Section::Triangles;
                continue;
            }
            "BOUNDARY" => {
                section = Section::Boundary;
                continue;
            }
            _ => {}
        }
        let mut toks = content.split_whitespace();
        match section {
            Section::None => return Err(err(line, "data before any section header")),
            Section::Vertices => {
                let x: f64 = num(toks.next(), line, "x coordinate")?;
                let y: f64 = num(toks.next(), line, "y coordinate")?;
                if !(x.is_finite() && y.is_finite()) {
                    return Err(err(line, "non-finite coordinate"));
                }
                mesh.vertices.push([x, y]);
            }
            Section::Triangles => {
                let mut t = [0usize; 3];
                for v in &mut t {
                    *v = num(toks.next(), line, "vertex index")?;
                    if *v >= mesh.vertices.len() {
                        return Err(err(line, format!("vertex {v} not defined")));
                    }
                }
                mesh.triangles.push(t);
            }
            Section::Boundary => {
                let a: usize = num(toks.next(), line, "vertex index")?;
                let b: usize = num(toks.next(), line, "vertex index")?;
                let condition = match toks.next() {
                    Some("D" | "d") => BoundaryOperator::Dirichlet,
                    Some("N" | "n") => BoundaryOperator::Neumann,
                    Some("R" | "r") => {
                        let beta: f64 = num(toks.next(), line, "Robin coefficient")?;
                        if !beta.is_finite() {
                            return Err(err(line, "non-finite Robin coefficient"));
                        }
                        BoundaryOperator::Robin(beta)
                    }
                    Some(k) => return Err(err(line, format!("unknown boundary kind `{k}`"))),
                    None => return Err(err(line, "missing boundary kind")),
                };
                mesh.boundary_edges.push(BoundaryEdge { vertices: [a, b], condition });
            }
        }
        if toks.next().is_some() {
            return Err(err(line, "trailing tokens"));
        }
    }
    mesh.validate()?;
    Ok(mesh)
}

pub fn write_mesh(mesh: &Mesh2D) -> String {
    let mut out = String::from("VERTICES\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:e} {:e}", v[0], v[1]);
    }
    out.push_str("TRIANGLES\n");
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    out.push_str("BOUNDARY\n");
    for e in &mesh.boundary_edges {
        let [a, b] = e.vertices;
        let _ = match e.condition.normalized() {
            BoundaryOperator::Dirichlet => writeln!(out, "{a} {b} D"),
            BoundaryOperator::Neumann => writeln!(out, "{a} {b} N"),
            BoundaryOperator::Robin(beta) => writeln!(out, "{a} {b} R {beta:e}"),
        };
    }
    out
}
