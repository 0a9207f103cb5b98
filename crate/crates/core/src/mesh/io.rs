use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::AnnularMesh;
use crate::geometry::Vec2;
use crate::{Error, Result};

/// Nodal data attached to a VTK export.
#[derive(Clone, Copy, Debug)]
pub enum VtkField<'a> {
    Scalar(&'a str, &'a [f64]),
    Vector(&'a str, &'a [Vec2]),
}

/// Parses a closed polyline from CSV text with header `x,y`.
pub fn parse_polyline_csv(text: &str) -> Result<Vec<Vec2>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.trim() == "x,y" => {}
        Some((_, header)) => {
            return Err(Error::parse("polyline csv", format!("expected header `x,y`, found `{header}`")))
        }
        None => return Err(Error::parse("polyline csv", "empty input")),
    }
    lines
        .map(|(ln, line)| {
            let mut cols = line.split(',');
            let (Some(x), Some(y), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse("polyline csv", format!("line {}: expected 2 columns", ln + 1)));
            };
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse("polyline csv", format!("line {}: bad number `{s}`", ln + 1)))
            };
            Ok(Vec2::new(num(x)?, num(y)?))
        })
        .collect()
}

pub fn format_polyline_csv(points: &[Vec2]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        let _ = writeln!(out, "{},{}", p.x, p.y);
    }
    out
}

pub fn read_polyline_csv(path: &Path) -> Result<Vec<Vec2>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_polyline_csv(&text)
}

pub fn write_polyline_csv(path: &Path, points: &[Vec2]) -> Result<()> {
    fs::write(path, format_polyline_csv(points)).map_err(|e| Error::io(path, e))
}

/// Renders the mesh as legacy ASCII VTK (unstructured grid of triangles).
pub fn format_vtk(mesh: &AnnularMesh, fields: &[VtkField<'_>]) -> Result<String> {
    let n = mesh.num_nodes();
    let tris = mesh.triangles();
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "annular mesh");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {n} double");
    for p in mesh.nodes() {
        let _ = writeln!(out, "{} {} 0", p.x, p.y);
    }
    let _ = writeln!(out, "CELLS {} {}", tris.len(), 4 * tris.len());
    for t in tris {
        let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "CELL_TYPES {}", tris.len());
    for _ in tris {
        let _ = writeln!(out, "5");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {n}");
    }
    for field in fields {
        match *field {
            VtkField::Scalar(name, values) => {
                check_len(name, values.len(), n)?;
                let _ = writeln!(out, "SCALARS {} double 1", sanitize(name));
                let _ = writeln!(out, "LOOKUP_TABLE default");
                for v in values {
                    let _ = writeln!(out, "{v}");
                }
            }
            VtkField::Vector(name, values) => {
                check_len(name, values.len(), n)?;
                let _ = writeln!(out, "VECTORS {} double", sanitize(name));
                for v in values {
                    let _ = writeln!(out, "{} {} 0", v.x, v.y);
                }
            }
        }
    }
    Ok(out)
}

pub fn write_vtk(path: &Path, mesh: &AnnularMesh, fields: &[VtkField<'_>]) -> Result<()> {
    let text = format_vtk(mesh, fields)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::FieldMismatch(format!("field `{name}` has {got} values, mesh has {want} nodes")))
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}
