//! Hybridizable DG discretizations of the flow and transport equations.

pub mod condense;
pub mod darcy;
pub mod reference;
pub mod transport;

pub use condense::{CondensedSystem, Condensed, LocalBlocks, Skeleton};
pub use darcy::{assemble_darcy_local, darcy_solve, DarcyInput, DarcySolver, FlowSolution, FlowStabilization};
pub use reference::RefElement;
pub use transport::{assemble_transport_local, transport_step, TransportInput, TransportSolution, TransportSolver};

use faer::Mat;

use crate::error::Result;
use crate::mesh::QuadMesh;

/// Volume source term.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    None,
    /// One constant per element.
    Elementwise(&'a [f64]),
    /// Pointwise function of `(x, y)`.
    Function(&'a (dyn Fn(f64, f64) -> f64 + Sync)),
}

impl Source<'_> {
    /// `(s, phi_a)` on element `e` for every nodal function.
    pub(crate) fn load(&self, re: &RefElement, mesh: &QuadMesh, e: usize) -> Vec<f64> {
        let jac = 0.25 * mesh.hx * mesh.hy;
        let mut out = vec![0.0; re.nb];
        match *self {
            Source::None => {}
            Source::Elementwise(v) => {
                if v[e] != 0.0 {
                    for q in 0..re.nq {
                        let w = v[e] * re.w2[q] * jac;
                        for (a, o) in out.iter_mut().enumerate() {
                            *o += w * re.phi[(a, q)];
                        }
                    }
                }
            }
            Source::Function(f) => {
                for q in 0..re.nq {
                    let [x, y] = mesh.map_point(e, re.xq[q][0], re.xq[q][1]);
                    let w = f(x, y) * re.w2[q] * jac;
                    for (a, o) in out.iter_mut().enumerate() {
                        *o += w * re.phi[(a, q)];
                    }
                }
            }
        }
        out
    }
}

/// Boundary treatment of a trace unknown.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceBc {
    /// Zero normal flux through the boundary.
    NoFlow,
    /// Prescribed trace coefficients; only boundary-face entries are read.
    Dirichlet(Vec<f64>),
}

impl TraceBc {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, TraceBc::Dirichlet(_))
    }
}

/// Global trace dofs on boundary faces.
pub fn boundary_dofs(mesh: &QuadMesh, n1: usize) -> Vec<usize> {
    mesh.faces
        .iter()
        .filter(|f| f.boundary)
        .flat_map(|f| (0..n1).map(move |m| f.id * n1 + m))
        .collect()
}

/// Face L2 projection of `g` on every boundary face; zeros elsewhere.
pub fn project_boundary(mesh: &QuadMesh, re: &RefElement, g: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    let n1 = re.n1;
    let mut out = vec![0.0; mesh.n_faces() * n1];
    for f in mesh.faces.iter().filter(|f| f.boundary) {
        let v = re.project_face(mesh, f.id, &g)?;
        out[f.id * n1..(f.id + 1) * n1].copy_from_slice(&v);
    }
    Ok(out)
}

/// Face L2 projection of `g` on every face.
pub fn project_skeleton(mesh: &QuadMesh, re: &RefElement, g: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    let n1 = re.n1;
    let mut out = vec![0.0; mesh.n_faces() * n1];
    for f in 0..mesh.n_faces() {
        let v = re.project_face(mesh, f, &g)?;
        out[f * n1..(f + 1) * n1].copy_from_slice(&v);
    }
    Ok(out)
}

/// Elementwise L2 projection of `g`, laid out element-major.
pub fn project_elements(mesh: &QuadMesh, re: &RefElement, g: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(mesh.n_elements() * re.nb);
    for e in 0..mesh.n_elements() {
        out.extend(re.project_element(mesh, e, &g)?);
    }
    Ok(out)
}

/// Initial concentration and trace by L2 projection.
pub fn project_initial_condition(
    mesh: &QuadMesh,
    re: &RefElement,
    c0: impl Fn(f64, f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((project_elements(mesh, re, &c0)?, project_skeleton(mesh, re, &c0)?))
}

/// `Phi diag(d) Psi^T` for tables laid out `(basis, point)`.
pub(crate) fn weighted_product(phi: &Mat<f64>, d: &[f64], psi: &Mat<f64>) -> Mat<f64> {
    let mut pd = phi.clone();
    for (q, &w) in d.iter().enumerate() {
        for v in pd.col_as_slice_mut(q) {
            *v *= w;
        }
    }
    &pd * psi.transpose()
}

/// Copy `src` into `dst` at `(r, c)`, scaled.
pub(crate) fn put(dst: &mut Mat<f64>, r: usize, c: usize, src: &Mat<f64>, scale: f64) {
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(r + i, c + j)] = scale * src[(i, j)];
        }
    }
}
