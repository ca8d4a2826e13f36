//! Element-level static condensation and the global skeleton system.
//!
//! Each element contributes a block system
//!
//! ```text
//! [ kii  kit ] [ x ]   [ ri ]
//! [ kti  ktt ] [ l ] = [ rt ]
//! ```
//!
//! where `x` holds the interior unknowns and `l` the traces on its four faces.
//! Eliminating `x` leaves `(ktt - kti kii^-1 kit) l = rt - kti kii^-1 ri`,
//! which is summed over elements into the skeleton system.

use faer::{Mat, MatRef};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dense_lu_factor_mat, DenseBlock, DenseLu, SparseLu, SparsePattern, SparseSystem};
use crate::mesh::QuadMesh;

#[derive(Debug, Clone)]
pub struct LocalBlocks {
    pub kii: Mat<f64>,
    pub kit: Mat<f64>,
    pub kti: Mat<f64>,
    pub ktt: Mat<f64>,
    pub ri: Vec<f64>,
    pub rt: Vec<f64>,
}

/// Condensed contribution of one element plus what recovery needs.
#[derive(Debug)]
pub struct Condensed {
    pub h: Mat<f64>,
    pub f: Vec<f64>,
    /// `kii^-1 kit`.
    pub zmat: Mat<f64>,
    /// `kii^-1 ri`.
    pub z: Vec<f64>,
}

fn col(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn to_vec(m: MatRef<'_, f64>) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

impl LocalBlocks {
    pub fn n_interior(&self) -> usize {
        self.kii.nrows()
    }

    pub fn n_trace(&self) -> usize {
        self.ktt.nrows()
    }

    pub fn factor(&self, element: usize) -> Result<DenseLu> {
        dense_lu_factor_mat(self.kii.as_ref()).map_err(|e| match e {
            Error::SingularMatrix { .. } => Error::ElementSingular { element },
            other => other,
        })
    }

    pub fn condense(&self, element: usize) -> Result<Condensed> {
        let lu = self.factor(element)?;
        let nt = self.kit.ncols();
        let ni = self.kii.nrows();
        // one solve for [kit | ri]
        let rhs = Mat::from_fn(ni, nt + 1, |i, j| if j < nt { self.kit[(i, j)] } else { self.ri[i] });
        let sol = lu.solve_mat(rhs.as_ref());
        let kz = &self.kti * &sol;
        let h = Mat::from_fn(nt, nt, |i, j| self.ktt[(i, j)] - kz[(i, j)]);
        let f = (0..nt).map(|i| self.rt[i] - kz[(i, nt)]).collect();
        let zmat = sol.subcols(0, nt).to_owned();
        let z = to_vec(sol.subcols(nt, 1));
        Ok(Condensed { h, f, zmat, z })
    }

    /// Residuals `(ri - kii x - kit l, rt - kti x - ktt l)`.
    pub fn residual(&self, x: &[f64], l: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (xc, lc) = (col(x), col(l));
        let ri = &self.kii * &xc + &self.kit * &lc;
        let rt = &self.kti * &xc + &self.ktt * &lc;
        (
            self.ri.iter().enumerate().map(|(i, v)| v - ri[(i, 0)]).collect(),
            self.rt.iter().enumerate().map(|(i, v)| v - rt[(i, 0)]).collect(),
        )
    }
}

impl Condensed {
    /// Interior unknowns from the element's trace values.
    pub fn recover(&self, l: &[f64]) -> Vec<f64> {
        let zl = &self.zmat * col(l);
        self.z.iter().enumerate().map(|(i, v)| v - zl[(i, 0)]).collect()
    }
}

/// Global trace dofs of element `e`, ordered by local face then face node.
pub fn trace_dofs(mesh: &QuadMesh, n1: usize, e: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(4 * n1);
    for ef in mesh.element_faces(e) {
        out.extend((0..n1).map(|m| ef.face * n1 + m));
    }
    out
}

/// Skeleton numbering with constraints and a cached sparsity pattern.
#[derive(Debug, Clone)]
pub struct Skeleton {
    pub n1: usize,
    pub n_total: usize,
    /// Reduced index of each global trace dof, `None` if constrained.
    pub free: Vec<Option<usize>>,
    pub constrained: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    pattern: SparsePattern,
}

/// Assembled skeleton matrix (in pattern order) and right-hand side.
#[derive(Debug, Clone)]
pub struct CondensedSystem {
    pub values: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl Skeleton {
    pub fn new(mesh: &QuadMesh, n1: usize, constrained: &[usize]) -> Result<Self> {
        let n_total = mesh.n_faces() * n1;
        let mut is_c = vec![false; n_total];
        for &d in constrained {
            if d >= n_total {
                return Err(Error::OutOfRange {
                    what: "trace dof",
                    index: d,
                    len: n_total,
                });
            }
            is_c[d] = true;
        }
        let mut free = vec![None; n_total];
        let mut n_free = 0;
        for (d, c) in is_c.iter().enumerate() {
            if !c {
                free[d] = Some(n_free);
                n_free += 1;
            }
        }
        let mut pairs = Vec::new();
        for e in 0..mesh.n_elements() {
            let dofs = trace_dofs(mesh, n1, e);
            for &gi in &dofs {
                if let Some(i) = free[gi] {
                    for &gj in &dofs {
                        if let Some(j) = free[gj] {
                            pairs.push((i, j));
                        }
                    }
                }
            }
        }
        let pattern = SparsePattern::new(n_free, &pairs)?;
        let constrained = (0..n_total).filter(|&d| is_c[d]).collect();
        Ok(Self {
            n1,
            n_total,
            free,
            constrained,
            pairs,
            pattern,
        })
    }

    /// Mark the condensed matrix as symmetric definite with the given sign.
    pub fn definite(mut self, sign: f64) -> Result<Self> {
        self.pattern = self.pattern.with_definite(sign)?;
        Ok(self)
    }

    pub fn n_free(&self) -> usize {
        self.pattern.dim()
    }

    /// Sum element contributions; constrained values `g` move to the right side.
    pub fn assemble(&self, mesh: &QuadMesh, elems: &[Condensed], g: &[f64]) -> CondensedSystem {
        let mut values = Vec::with_capacity(self.pairs.len());
        let mut rhs = vec![0.0; self.n_free()];
        for (e, c) in elems.iter().enumerate() {
            let dofs = trace_dofs(mesh, self.n1, e);
            for (li, &gi) in dofs.iter().enumerate() {
                let Some(i) = self.free[gi] else { continue };
                rhs[i] += c.f[li];
                for (lj, &gj) in dofs.iter().enumerate() {
                    match self.free[gj] {
                        Some(_) => values.push(c.h[(li, lj)]),
                        None => rhs[i] -= c.h[(li, lj)] * g[gj],
                    }
                }
            }
        }
        CondensedSystem { values, rhs }
    }

    pub fn factor(&self, sys: &CondensedSystem) -> Result<SparseLu> {
        self.pattern.factor(&sys.values)
    }

    /// Solve and return the full trace vector including constrained values.
    pub fn solve(&self, sys: &CondensedSystem, g: &[f64]) -> Result<Vec<f64>> {
        let x = if self.n_free() == 0 {
            Vec::new()
        } else {
            self.factor(sys)?.solve(&sys.rhs)?
        };
        Ok(self.expand(&x, g))
    }

    pub fn expand(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        (0..self.n_total)
            .map(|d| match self.free[d] {
                Some(i) => x[i],
                None => g[d],
            })
            .collect()
    }

    /// Triplet form, for inspection and oracles.
    pub fn to_sparse_system(&self, sys: &CondensedSystem) -> SparseSystem {
        SparseSystem {
            n: self.n_free(),
            triplets: self
                .pairs
                .iter()
                .zip(&sys.values)
                .map(|(&(i, j), &v)| (i, j, v))
                .collect(),
            rhs: sys.rhs.clone(),
        }
    }
}

/// Condense every element in parallel; results stay in element order.
pub fn condense_all(blocks: &[LocalBlocks]) -> Result<Vec<Condensed>> {
    blocks
        .par_iter()
        .enumerate()
        .map(|(e, b)| b.condense(e))
        .collect()
}

/// Gather the trace values of element `e` from the global vector.
pub fn gather(mesh: &QuadMesh, n1: usize, e: usize, lambda: &[f64]) -> Vec<f64> {
    trace_dofs(mesh, n1, e).into_iter().map(|d| lambda[d]).collect()
}

/// Solve the uncondensed global system densely. Only for small meshes.
///
/// Returns per-element interior unknowns and the full trace vector.
pub fn monolithic_solve(
    mesh: &QuadMesh,
    n1: usize,
    blocks: &[LocalBlocks],
    constrained: &[usize],
    g: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let sk = Skeleton::new(mesh, n1, constrained)?;
    let ni: Vec<usize> = blocks.iter().map(|b| b.n_interior()).collect();
    let offsets: Vec<usize> = ni
        .iter()
        .scan(0, |s, &n| {
            let o = *s;
            *s += n;
            Some(o)
        })
        .collect();
    let n_int: usize = ni.iter().sum();
    let n = n_int + sk.n_free();
    let mut a = DenseBlock::zeros(n, n);
    let mut b = vec![0.0; n];
    for (e, blk) in blocks.iter().enumerate() {
        let o = offsets[e];
        let dofs = trace_dofs(mesh, n1, e);
        for i in 0..ni[e] {
            b[o + i] += blk.ri[i];
            for j in 0..ni[e] {
                a.data[(o + i) * n + o + j] += blk.kii[(i, j)];
            }
            for (lj, &gj) in dofs.iter().enumerate() {
                match sk.free[gj] {
                    Some(j) => a.data[(o + i) * n + n_int + j] += blk.kit[(i, lj)],
                    None => b[o + i] -= blk.kit[(i, lj)] * g[gj],
                }
            }
        }
        for (li, &gi) in dofs.iter().enumerate() {
            let Some(i) = sk.free[gi] else { continue };
            let r = n_int + i;
            b[r] += blk.rt[li];
            for j in 0..ni[e] {
                a.data[r * n + o + j] += blk.kti[(li, j)];
            }
            for (lj, &gj) in dofs.iter().enumerate() {
                match sk.free[gj] {
                    Some(j) => a.data[r * n + n_int + j] += blk.ktt[(li, lj)],
                    None => b[r] -= blk.ktt[(li, lj)] * g[gj],
                }
            }
        }
    }
    let x = crate::linalg::dense_lu_solve(&a, &b)?;
    let interior = offsets.iter().zip(&ni).map(|(&o, &m)| x[o..o + m].to_vec()).collect();
    Ok((interior, sk.expand(&x[n_int..], g)))
}
