//! Legacy ASCII VTK output.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use vascfem::Field;

// corner order of a cell (bit k set = upper side on axis k) to VTK order
const QUAD: [usize; 4] = [0, 1, 3, 2];
const HEX: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

pub fn write_vtk_to<W: Write>(field: &Field, mut out: W) -> Result<()> {
    let mesh = field.mesh();
    let dim = mesh.dim();
    let nodes = mesh.nodes();
    let (order, cell_type): (&[usize], u32) = if dim == 2 { (&QUAD, 9) } else { (&HEX, 12) };
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "displacement")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", nodes.len())?;
    for p in nodes {
        writeln!(out, "{:e} {:e} {:e}", p[0], p[1], p[2])?;
    }
    let n_cells = mesh.n_cells();
    writeln!(out, "CELLS {} {}", n_cells, n_cells * (order.len() + 1))?;
    for cell in mesh.cells() {
        write!(out, "{}", order.len())?;
        for &k in order {
            write!(out, " {}", cell.nodes[k])?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {n_cells}")?;
    for _ in 0..n_cells {
        writeln!(out, "{cell_type}")?;
    }
    writeln!(out, "POINT_DATA {}", nodes.len())?;
    writeln!(out, "VECTORS displacement double")?;
    for n in 0..nodes.len() {
        let u = field.node_value(n);
        writeln!(out, "{:e} {:e} {:e}", u[0], u[1], if dim == 2 { 0.0 } else { u[2] })?;
    }
    Ok(())
}

pub fn write_vtk(field: &Field, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    write_vtk_to(field, &mut w)?;
    w.flush()?;
    Ok(())
}
