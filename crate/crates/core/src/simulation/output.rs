//! Snapshot files (legacy VTK plus a CSV sidecar) and diagonal profiles.
//!
//! Fields are sampled at the GLL nodes of each element, where the nodal
//! coefficients are the values, so no interpolation is involved.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::FieldState;
use crate::error::{Error, Result};
use crate::hdg::RefElement;
use crate::mesh::QuadMesh;

/// One sample point of a snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub element: usize,
    pub x: f64,
    pub y: f64,
    pub c: f64,
    pub p: f64,
    pub ux: f64,
    pub uy: f64,
}

pub fn snapshot_samples(state: &FieldState, mesh: &QuadMesh, re: &RefElement) -> Vec<Sample> {
    let (nb, n1) = (re.nb, re.n1);
    let mut out = Vec::with_capacity(mesh.n_elements() * nb);
    for e in 0..mesh.n_elements() {
        for a in 0..nb {
            let [x, y] = mesh.map_point(e, re.basis.nodes[a % n1], re.basis.nodes[a / n1]);
            let i = e * nb + a;
            out.push(Sample {
                element: e,
                x,
                y,
                c: state.transport.c[i],
                p: state.flow.p[i],
                ux: state.flow.ux[i],
                uy: state.flow.uy[i],
            });
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write `snapshot_<t>.vtk` and `snapshot_<t>.csv` into `dir`.
pub fn write_snapshot(state: &FieldState, mesh: &QuadMesh, re: &RefElement, dir: &Path) -> Result<[PathBuf; 2]> {
    state.validate(mesh, re)?;
    let samples = snapshot_samples(state, mesh, re);
    let n1 = re.n1;
    let k = n1 - 1;

    // `{}` on f64 prints the shortest string that parses back to the same bits
    let mut v = String::new();
    let _ = writeln!(v, "# vtk DataFile Version 3.0");
    let _ = writeln!(v, "miscible displacement t={}", state.t);
    let _ = writeln!(v, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(v, "POINTS {} double", samples.len());
    for s in &samples {
        let _ = writeln!(v, "{} {} 0", s.x, s.y);
    }
    let n_cells = mesh.n_elements() * k * k;
    let _ = writeln!(v, "CELLS {} {}", n_cells, 5 * n_cells);
    for e in 0..mesh.n_elements() {
        let o = e * re.nb;
        for j in 0..k {
            for i in 0..k {
                let a = o + j * n1 + i;
                let _ = writeln!(v, "4 {} {} {} {}", a, a + 1, a + n1 + 1, a + n1);
            }
        }
    }
    let _ = writeln!(v, "CELL_TYPES {n_cells}");
    for _ in 0..n_cells {
        v.push_str("9\n");
    }
    let _ = writeln!(v, "POINT_DATA {}", samples.len());
    for (name, get) in [("concentration", 0), ("pressure", 1)] {
        let _ = writeln!(v, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for s in &samples {
            let _ = writeln!(v, "{}", if get == 0 { s.c } else { s.p });
        }
    }
    let _ = writeln!(v, "VECTORS velocity double");
    for s in &samples {
        let _ = writeln!(v, "{} {} 0", s.ux, s.uy);
    }

    let mut c = String::from("element,x,y,c,p,ux,uy\n");
    for s in &samples {
        let _ = writeln!(c, "{},{},{},{},{},{},{}", s.element, s.x, s.y, s.c, s.p, s.ux, s.uy);
    }

    let vtk = dir.join(format!("snapshot_{}.vtk", state.t));
    let csv = dir.join(format!("snapshot_{}.csv", state.t));
    write_file(&vtk, &v)?;
    write_file(&csv, &c)?;
    Ok([vtk, csv])
}

/// Read a CSV sidecar back.
pub fn read_snapshot_csv(path: &Path) -> Result<Vec<Sample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fmt = |line: usize, d: &str| Error::Format {
        path: path.to_path_buf(),
        detail: format!("line {line}: {d}"),
    };
    let mut lines = text.lines();
    if lines.next() != Some("element,x,y,c,p,ux,uy") {
        return Err(fmt(1, "bad header"));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                return Err(fmt(i + 2, "expected 7 fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| fmt(i + 2, &e.to_string()));
            Ok(Sample {
                element: f[0].parse().map_err(|_| fmt(i + 2, "bad element"))?,
                x: num(f[1])?,
                y: num(f[2])?,
                c: num(f[3])?,
                p: num(f[4])?,
                ux: num(f[5])?,
                uy: num(f[6])?,
            })
        })
        .collect()
}

/// `(s, c_h(s, s))` at `n_samples` equispaced points of the diagonal.
pub fn extract_diagonal_profile(
    state: &FieldState,
    mesh: &QuadMesh,
    re: &RefElement,
    n_samples: usize,
) -> Result<Vec<(f64, f64)>> {
    let d = &mesh.domain;
    if d.x0 != d.y0 || d.x1 != d.y1 {
        return Err(Error::invalid(format!("diagonal profile needs a square domain, got {d}")));
    }
    if n_samples < 2 {
        return Err(Error::invalid("profile needs at least 2 samples"));
    }
    let nb = re.nb;
    Ok((0..n_samples)
        .map(|i| {
            let s = d.x0 + (d.x1 - d.x0) * i as f64 / (n_samples - 1) as f64;
            let e = mesh.locate(s, s).expect("diagonal point inside the domain");
            let r = mesh.element_rect(e);
            let xi = (2.0 * (s - r.x0) / r.width() - 1.0).clamp(-1.0, 1.0);
            let eta = (2.0 * (s - r.y0) / r.height() - 1.0).clamp(-1.0, 1.0);
            (s, re.basis.tensor_eval(&state.transport.c[e * nb..(e + 1) * nb], xi, eta))
        })
        .collect())
}

/// Write a profile as CSV with header `s,c`.
pub fn write_profile(path: &Path, profile: &[(f64, f64)]) -> Result<()> {
    let mut s = String::from("s,c\n");
    for (a, c) in profile {
        let _ = writeln!(s, "{a},{c}");
    }
    write_file(path, &s)
}
