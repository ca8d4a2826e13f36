//! Globally coupled unknowns: skeleton traces against element-wise DG
//! unknowns of one scalar field.

use serde::Serialize;

use crate::basis::NodalBasis;
use crate::error::Result;
use crate::mesh::{build_uniform_quad_mesh, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DofCounts {
    pub dim: usize,
    pub k: u64,
    pub n: u64,
    /// Trace unknowns on the skeleton.
    pub trace: u64,
    /// Element unknowns of a DG scalar.
    pub element: u64,
}

impl DofCounts {
    pub fn ratio(&self) -> f64 {
        self.trace as f64 / self.element as f64
    }
}

/// `N x N` quadrilaterals: `(k+1)(2N^2 + 2N)` traces, `(k+1)^2 N^2` DG unknowns.
pub fn dof_counts_2d(k: u64, n: u64) -> DofCounts {
    DofCounts {
        dim: 2,
        k,
        n,
        trace: (k + 1) * (2 * n * n + 2 * n),
        element: (k + 1) * (k + 1) * n * n,
    }
}

/// `N^3` cubes split into 5 tetrahedra each, `6N^3 + 2N^2` triangular faces.
pub fn dof_counts_3d(k: u64, n: u64) -> DofCounts {
    DofCounts {
        dim: 3,
        k,
        n,
        trace: (k + 2) * (k + 1) * (6 * n * n * n + 2 * n * n) / 2,
        element: 5 * (k + 3) * (k + 2) * (k + 1) * n * n * n / 6,
    }
}

pub fn dof_ratio_2d(k: u64, n: u64) -> f64 {
    dof_counts_2d(k, n).ratio()
}

pub fn dof_ratio_3d(k: u64, n: u64) -> f64 {
    dof_counts_3d(k, n).ratio()
}

/// 2D counts by building the mesh and the nodal space and counting.
pub fn enumerate_dofs_2d(k: usize, n: usize) -> Result<DofCounts> {
    let mesh = build_uniform_quad_mesh(n, n, Rect::square(0.0, 1.0))?;
    let basis = NodalBasis::new(k)?;
    let per_face = basis.n();
    let mut trace = 0;
    for f in &mesh.faces {
        // one trace space per face, shared by its neighbours
        assert!(f.elements.iter().any(Option::is_some));
        trace += per_face;
    }
    let element: usize = (0..mesh.n_elements()).map(|_| per_face * per_face).sum();
    Ok(DofCounts {
        dim: 2,
        k: k as u64,
        n: n as u64,
        trace: trace as u64,
        element: element as u64,
    })
}
