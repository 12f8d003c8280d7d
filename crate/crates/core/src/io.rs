//! File output: legacy ASCII VTK, MatrixMarket system dumps and JSON reports.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::assembly::{DiscreteSolution, SaddleSystem};
use crate::elements::LocalBasis;
use crate::geometry::Vec2;
use crate::mesh::{CellKind, FittedMesh};

const VTK_TRIANGLE: u8 = 5;
const VTK_QUAD: u8 = 9;

/// Fields attached to the mesh in a VTK file.
pub struct SolutionFields<'a> {
    pub bases: &'a [LocalBasis],
    pub solution: &'a DiscreteSolution,
}

/// Writes the fitted mesh as an unstructured grid with region and parent
/// cell data. With `fields`, adds cell pressure and a vertex velocity obtained
/// by averaging the cell-wise values of `u_h` over the cells sharing a vertex.
///
/// Unless `deterministic`, the title line carries the Unix time of writing.
pub fn write_vtk<W: Write>(
    w: W,
    mesh: &FittedMesh,
    fields: Option<&SolutionFields<'_>>,
    deterministic: bool,
) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    let mut title = String::from("nc-stokes fitted mesh");
    if fields.is_some() {
        title.push_str("; velocity: nonconforming reconstruction (vertex average of cell values)");
    }
    if !deterministic {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        title.push_str(&format!("; written at unix time {secs}"));
    }
    writeln!(w, "{title}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(w, "{:.17e} {:.17e} 0", p.x, p.y)?;
    }
    let size: usize = mesh.cells.iter().map(|c| c.vertices.len() + 1).sum();
    writeln!(w, "CELLS {} {size}", mesh.cells.len())?;
    for cell in &mesh.cells {
        write!(w, "{}", cell.vertices.len())?;
        for v in &cell.vertices {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.cells.len())?;
    for cell in &mesh.cells {
        let t = match cell.kind {
            CellKind::Triangle => VTK_TRIANGLE,
            CellKind::Quad => VTK_QUAD,
        };
        writeln!(w, "{t}")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.cells.len())?;
    write_scalars(&mut w, "region", "int", mesh.cells.iter().map(|c| c.region.index().to_string()))?;
    write_scalars(&mut w, "parent", "int", mesh.cells.iter().map(|c| c.parent.to_string()))?;
    if let Some(f) = fields {
        write_scalars(&mut w, "pressure", "double", f.solution.pressure.iter().map(|p| format!("{p:.17e}")))?;
        writeln!(w, "POINT_DATA {}", mesh.vertices.len())?;
        writeln!(w, "VECTORS velocity double")?;
        for u in vertex_velocity(mesh, f) {
            writeln!(w, "{:.17e} {:.17e} 0", u.x, u.y)?;
        }
    }
    w.flush()
}

fn write_scalars<W: Write>(
    w: &mut W,
    name: &str,
    ty: &str,
    values: impl Iterator<Item = String>,
) -> io::Result<()> {
    writeln!(w, "SCALARS {name} {ty} 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

fn vertex_velocity(mesh: &FittedMesh, f: &SolutionFields<'_>) -> Vec<Vec2> {
    let mut sum = vec![Vec2::zeros(); mesh.vertices.len()];
    let mut count = vec![0usize; mesh.vertices.len()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for &v in &cell.vertices {
            sum[v] += f.solution.velocity_at(mesh, &f.bases[c], c, &mesh.vertices[v]);
            count[v] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &k)| if k == 0 { *s } else { s / k as f64 })
        .collect()
}

pub fn write_vtk_file(
    path: &Path,
    mesh: &FittedMesh,
    fields: Option<&SolutionFields<'_>>,
    deterministic: bool,
) -> io::Result<()> {
    write_vtk(File::create(path)?, mesh, fields, deterministic)
}

fn write_vector_market<W: Write>(mut w: W, v: &[f64]) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.17e}")?;
    }
    Ok(())
}

/// Writes `K.mtx`, `A.mtx`, `Bx.mtx`, `By.mtx` and `rhs.mtx` into `dir`.
pub fn dump_system(dir: &Path, system: &SaddleSystem) -> io::Result<()> {
    let open = |name: &str| File::create(dir.join(name)).map(BufWriter::new);
    system.full_matrix().write_matrix_market(open("K.mtx")?)?;
    system.a.write_matrix_market(open("A.mtx")?)?;
    system.b_x.write_matrix_market(open("Bx.mtx")?)?;
    system.b_y.write_matrix_market(open("By.mtx")?)?;
    write_vector_market(open("rhs.mtx")?, &system.full_rhs())
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}
