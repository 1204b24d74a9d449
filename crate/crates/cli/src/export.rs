//! CSV, JSON and OBJ writers.
//!
//! CSV layouts:
//!
//! - grids: `x,y,value`, one row per node, row-major (`x` fastest);
//! - causal samples: `x,y,b,bx,by,class`;
//! - flow states: `x,y,rho,u,v,c,p,regime`;
//! - light-like lines: `base_x,base_y,dir_x,dir_y,lift_x,lift_y,lift_t,samples,perpendicular_residual,lightlike_defect,verified`.
//!
//! Numbers use the shortest representation that round-trips, so identical
//! inputs give byte-identical files.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};
use zmc_core::duality::ChaplyginState;
use zmc_core::geometry::{CausalSample, LightLine};
use zmc_core::{Lattice, Point2, SampledGrid};

pub fn grid_csv(w: &mut impl Write, grid: &SampledGrid) -> io::Result<()> {
    values_csv(w, grid.lattice(), grid.values())
}

/// [`grid_csv`] for raw node values.
pub fn values_csv(w: &mut impl Write, lat: &Lattice, values: &[f64]) -> io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (p, v) in lat.points().zip(values) {
        writeln!(w, "{},{},{}", p.x, p.y, v)?;
    }
    Ok(())
}

/// Values at arbitrary points, same layout as a grid.
pub fn points_csv(w: &mut impl Write, rows: &[(Point2, f64)]) -> io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (p, v) in rows {
        writeln!(w, "{},{},{}", p.x, p.y, v)?;
    }
    Ok(())
}

pub fn causal_csv(w: &mut impl Write, samples: &[CausalSample]) -> io::Result<()> {
    writeln!(w, "x,y,b,bx,by,class")?;
    for s in samples {
        writeln!(w, "{},{},{},{},{},{}", s.point.x, s.point.y, s.b, s.grad_b[0], s.grad_b[1], s.class.as_str())?;
    }
    Ok(())
}

pub fn flow_csv(w: &mut impl Write, rows: &[(Point2, ChaplyginState)]) -> io::Result<()> {
    writeln!(w, "x,y,rho,u,v,c,p,regime")?;
    for (p, s) in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.x,
            p.y,
            s.rho,
            s.velocity[0],
            s.velocity[1],
            s.sound_speed,
            s.pressure,
            s.regime.as_str()
        )?;
    }
    Ok(())
}

pub fn lines_csv(w: &mut impl Write, lines: &[LightLine]) -> io::Result<()> {
    writeln!(
        w,
        "base_x,base_y,dir_x,dir_y,lift_x,lift_y,lift_t,samples,perpendicular_residual,lightlike_defect,verified"
    )?;
    for l in lines {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            l.base.x,
            l.base.y,
            l.direction[0],
            l.direction[1],
            l.lifted[0],
            l.lifted[1],
            l.lifted[2],
            l.samples.len(),
            l.perpendicular_residual,
            l.lightlike_defect,
            l.verified
        )?;
    }
    Ok(())
}

pub fn lattice_json(l: &Lattice) -> Value {
    json!({ "x0": l.rect.x0, "x1": l.rect.x1, "y0": l.rect.y0, "y1": l.rect.y1, "nx": l.nx, "ny": l.ny })
}

/// A grid as `{lattice, values}` with values row-major.
pub fn grid_json(grid: &SampledGrid) -> Value {
    values_json(grid.lattice(), grid.values())
}

pub fn values_json(lat: &Lattice, values: &[f64]) -> Value {
    json!({ "lattice": lattice_json(lat), "values": values })
}

pub fn to_json(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

/// Triangulated height field: one `v x y t` per node in row-major order,
/// each lattice cell split into two triangles, counter-clockwise seen from +t.
pub fn obj(w: &mut impl Write, grid: &SampledGrid) -> io::Result<()> {
    obj_mesh(w, grid.lattice(), grid.values())
}

/// [`obj`] for raw node values; also accepts 2×2 lattices.
pub fn obj_mesh(w: &mut impl Write, lat: &Lattice, values: &[f64]) -> io::Result<()> {
    assert_eq!(values.len(), lat.len(), "one value per node");
    if let Some((p, v)) = lat.points().zip(values).find(|(_, v)| !v.is_finite()) {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("cannot export a mesh: value {v} at ({}, {}) is not finite", p.x, p.y),
        ));
    }
    for (p, v) in lat.points().zip(values) {
        writeln!(w, "v {} {} {}", p.x, p.y, v)?;
    }
    let id = |i: usize, j: usize| lat.index(i, j) + 1;
    for j in 0..lat.ny - 1 {
        for i in 0..lat.nx - 1 {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            writeln!(w, "f {a} {b} {c}")?;
            writeln!(w, "f {a} {c} {d}")?;
        }
    }
    Ok(())
}

/// Write an OBJ mesh to `path`.
pub fn export_obj(grid: &SampledGrid, path: &std::path::Path) -> io::Result<()> {
    let mut buf = Vec::new();
    obj(&mut buf, grid)?;
    std::fs::write(path, buf)
}
