//! CSV and legacy VTK output, and the optimization run directory.
//!
//! Column orders are fixed:
//! - fields CSV: `cell,x,y,pressure,speed` followed by any extra columns;
//! - history CSV: `iteration,phi,volume_fraction,change`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::domain::{FlowState, Geometry, StructuredGrid};
use crate::error::Result;
use crate::topopt::OptimizerState;

/// Per-cell table of centre coordinates, pressure and speed, plus named
/// extra columns. Inactive cells are skipped.
pub fn write_fields_csv(
    mut out: impl Write,
    grid: &StructuredGrid,
    flow: &FlowState,
    extra: &[(&str, &[f64])],
) -> Result<()> {
    flow.check_shape(grid)?;
    write!(out, "cell,x,y,pressure,speed")?;
    for (name, _) in extra {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for c in grid.active_cells() {
        let [x, y] = grid.cell_center(c);
        write!(
            out,
            "{c},{x},{y},{},{}",
            flow.pressure[c],
            flow.cell_speed(grid, c)
        )?;
        for (_, v) in extra {
            write!(out, ",{}", v[c])?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Legacy ASCII VTK with cell data: STRUCTURED_POINTS for Cartesian grids,
/// RECTILINEAR_GRID for one-axis (interval and radial) grids. Inactive cells
/// carry 0 and an `active` flag of 0.
pub fn write_vtk(
    mut out: impl Write,
    grid: &StructuredGrid,
    title: &str,
    flow: Option<&FlowState>,
    scalars: &[(&str, &[f64])],
) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    let (nx, ny) = grid.dims();
    match *grid.geometry() {
        Geometry::Cartesian2D { x0, y0, .. } => {
            writeln!(out, "DATASET STRUCTURED_POINTS")?;
            writeln!(out, "DIMENSIONS {} {} 1", nx + 1, ny + 1)?;
            writeln!(out, "ORIGIN {x0} {y0} 0")?;
            writeln!(
                out,
                "SPACING {} {} 1",
                grid.cell_width(0),
                grid.cell_width(1)
            )?;
        }
        _ => {
            writeln!(out, "DATASET RECTILINEAR_GRID")?;
            writeln!(out, "DIMENSIONS {} 2 2", nx + 1)?;
            writeln!(out, "X_COORDINATES {} double", nx + 1)?;
            let edges: Vec<String> = (0..nx)
                .map(|c| grid.cell_bounds0(c).0.to_string())
                .chain(std::iter::once(grid.cell_bounds0(nx - 1).1.to_string()))
                .collect();
            writeln!(out, "{}", edges.join(" "))?;
            writeln!(out, "Y_COORDINATES 2 double\n0 1")?;
            writeln!(out, "Z_COORDINATES 2 double\n0 1")?;
        }
    }
    let n = grid.n_cells();
    writeln!(out, "CELL_DATA {n}")?;
    let write_scalar = |out: &mut dyn Write, name: &str, f: &dyn Fn(usize) -> f64| -> Result<()> {
        writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for c in 0..n {
            let v = if grid.is_active(c) { f(c) } else { 0.0 };
            writeln!(out, "{v}")?;
        }
        Ok(())
    };
    write_scalar(&mut out, "active", &|c| {
        if grid.is_active(c) {
            1.0
        } else {
            0.0
        }
    })?;
    if let Some(flow) = flow {
        flow.check_shape(grid)?;
        write_scalar(&mut out, "pressure", &|c| flow.pressure[c])?;
        write_scalar(&mut out, "speed", &|c| flow.cell_speed(grid, c))?;
        writeln!(out, "VECTORS velocity double")?;
        for c in 0..n {
            let v = if grid.is_active(c) {
                flow.cell_velocity(grid, c)
            } else {
                [0.0; 2]
            };
            writeln!(out, "{} {} 0", v[0], v[1])?;
        }
    }
    for (name, values) in scalars {
        write_scalar(&mut out, name, &|c| values[c])?;
    }
    Ok(())
}

/// Optimization history, one row per accepted iteration.
pub fn write_history_csv(mut out: impl Write, state: &OptimizerState) -> Result<()> {
    writeln!(out, "iteration,phi,volume_fraction,change")?;
    for (i, ((phi, vol), change)) in state
        .phi_history
        .iter()
        .zip(&state.volume_history)
        .zip(&state.change_history)
        .enumerate()
    {
        writeln!(out, "{i},{phi},{vol},{change}")?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes `config.toml`, `history.csv`, `design.csv` and `fields.vtk` into
/// `dir` (created if missing).
pub fn write_run_directory(
    dir: &Path,
    config_snapshot: &str,
    grid: &StructuredGrid,
    state: &OptimizerState,
    permeability: &[f64],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.toml"), config_snapshot)?;
    let mut h = create(&dir.join("history.csv"))?;
    write_history_csv(&mut h, state)?;
    h.flush()?;
    let extra: [(&str, &[f64]); 3] = [
        ("rho", &state.rho),
        ("rho_physical", &state.physical),
        ("permeability", permeability),
    ];
    let mut d = create(&dir.join("design.csv"))?;
    write_fields_csv(&mut d, grid, &state.flow, &extra)?;
    d.flush()?;
    let mut v = create(&dir.join("fields.vtk"))?;
    write_vtk(&mut v, grid, "optimized layout", Some(&state.flow), &extra)?;
    v.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_vtk_shapes() {
        let g = StructuredGrid::cartesian((0.0, 1.0), 3, (0.0, 1.0), 2).unwrap();
        let flow = FlowState::zeros(&g);
        let mut buf = Vec::new();
        write_fields_csv(&mut buf, &g, &flow, &[("rho", &[0.5; 6])]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), "cell,x,y,pressure,speed,rho");
        assert_eq!(s.lines().count(), 7);
        let mut buf = Vec::new();
        write_vtk(&mut buf, &g, "t", Some(&flow), &[]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(
            s.contains("STRUCTURED_POINTS")
                && s.contains("DIMENSIONS 4 3 1")
                && s.contains("CELL_DATA 6")
        );

        let r = StructuredGrid::cylindrical(0.1, 1.0, 4).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mut buf, &r, "t", None, &[]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("RECTILINEAR_GRID") && s.contains("X_COORDINATES 5"));
    }
}
