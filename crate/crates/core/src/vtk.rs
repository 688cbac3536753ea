//! Legacy ASCII VTK output.

use std::io::Write;

use crate::mesh::SimplicialMesh;

/// Writes the mesh as an unstructured grid with one point scalar field.
pub fn write_vtk<W: Write>(mesh: &SimplicialMesh, name: &str, values: &[f64], mut w: W) -> std::io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{name}")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} {}", p[0], p[1], p[2])?;
    }
    let nv = mesh.dim() + 1;
    writeln!(w, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nv + 1))?;
    for c in mesh.cells() {
        write!(w, "{nv}")?;
        for v in c {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_cells())?;
    let ty = if mesh.dim() == 2 { 5 } else { 10 };
    for _ in 0..mesh.n_cells() {
        writeln!(w, "{ty}")?;
    }
    writeln!(w, "POINT_DATA {}", mesh.n_vertices())?;
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}
