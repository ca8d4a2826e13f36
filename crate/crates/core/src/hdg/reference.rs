//! Reference-square tables shared by the flow and transport discretizations.

use faer::Mat;

use crate::basis::{gl_rule, NodalBasis, QuadratureRule};
use crate::error::Result;
use crate::linalg::dense_lu_factor_mat;
use super::weighted_product;
use crate::mesh::{QuadMesh, BOTTOM, LEFT, RIGHT, TOP};

/// Basis values and derivatives at the `(k+2)^2` Gauss points of [-1,1]^2,
/// plus face tables at the `k+2` Gauss points of [-1,1].
#[derive(Debug, Clone)]
pub struct RefElement {
    pub basis: NodalBasis,
    pub quad: QuadratureRule,
    /// Nodes per direction, `k + 1`.
    pub n1: usize,
    /// Nodal functions per element, `(k + 1)^2`.
    pub nb: usize,
    /// Volume quadrature points, `(k + 2)^2`, ordered `qj * nq1 + qi`.
    pub nq: usize,
    pub nq1: usize,
    /// `phi[(a, q)]`.
    pub phi: Mat<f64>,
    /// Reference derivatives `d/dxi`, `d/deta`, same layout as `phi`.
    pub dphi: [Mat<f64>; 2],
    /// Tensor weights per volume point.
    pub w2: Vec<f64>,
    /// Reference coordinates per volume point.
    pub xq: Vec<[f64; 2]>,
    /// `face_phi[(m, q)] = l_m(s_q)` on the 1D rule.
    pub face_phi: Mat<f64>,
    /// 1D mass on [-1, 1], `sum_q w_q l_i l_j`.
    pub m1: Mat<f64>,
    /// Element node index of node `m` on local face `lf`.
    pub face_nodes: [Vec<usize>; 4],
    /// Reference mass `sum_q w_q phi_a phi_b`.
    pub mass: Mat<f64>,
    /// `sum_q w_q phi_a dphi_b` for both reference directions.
    pub grad: [Mat<f64>; 2],
}

impl RefElement {
    pub fn new(k: usize) -> Result<Self> {
        let basis = NodalBasis::new(k)?;
        let quad = gl_rule(k + 2)?;
        let n1 = k + 1;
        let nb = n1 * n1;
        let nq1 = quad.len();
        let nq = nq1 * nq1;
        let vals: Vec<Vec<f64>> = quad.points.iter().map(|&x| basis.values(x)).collect();
        let ders: Vec<Vec<f64>> = quad.points.iter().map(|&x| basis.derivatives(x)).collect();
        let mut phi = Mat::zeros(nb, nq);
        let mut dx = Mat::zeros(nb, nq);
        let mut dy = Mat::zeros(nb, nq);
        let mut w2 = Vec::with_capacity(nq);
        let mut xq = Vec::with_capacity(nq);
        for qj in 0..nq1 {
            for qi in 0..nq1 {
                let q = qj * nq1 + qi;
                w2.push(quad.weights[qi] * quad.weights[qj]);
                xq.push([quad.points[qi], quad.points[qj]]);
                for j in 0..n1 {
                    for i in 0..n1 {
                        let a = j * n1 + i;
                        phi[(a, q)] = vals[qi][i] * vals[qj][j];
                        dx[(a, q)] = ders[qi][i] * vals[qj][j];
                        dy[(a, q)] = vals[qi][i] * ders[qj][j];
                    }
                }
            }
        }
        let face_phi = Mat::from_fn(n1, nq1, |m, q| vals[q][m]);
        let m1 = Mat::from_fn(n1, n1, |i, j| {
            (0..nq1).map(|q| quad.weights[q] * vals[q][i] * vals[q][j]).sum()
        });
        let mut face_nodes: [Vec<usize>; 4] = Default::default();
        face_nodes[BOTTOM] = (0..n1).collect();
        face_nodes[RIGHT] = (0..n1).map(|j| j * n1 + k).collect();
        face_nodes[TOP] = (0..n1).map(|i| k * n1 + i).collect();
        face_nodes[LEFT] = (0..n1).map(|j| j * n1).collect();
        let mass = weighted_product(&phi, &w2, &phi);
        let grad = [weighted_product(&phi, &w2, &dx), weighted_product(&phi, &w2, &dy)];
        Ok(Self {
            basis,
            quad,
            n1,
            nb,
            nq,
            nq1,
            phi,
            dphi: [dx, dy],
            w2,
            xq,
            face_phi,
            m1,
            face_nodes,
            mass,
            grad,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.k
    }

    /// Reference coordinates of face parameter `s` on local face `lf`.
    pub fn face_point(lf: usize, s: f64) -> [f64; 2] {
        match lf {
            BOTTOM => [s, -1.0],
            RIGHT => [1.0, s],
            TOP => [s, 1.0],
            _ => [-1.0, s],
        }
    }

    /// Outward unit normal of local face `lf`.
    pub fn outward_normal(lf: usize) -> [f64; 2] {
        match lf {
            BOTTOM => [0.0, -1.0],
            RIGHT => [1.0, 0.0],
            TOP => [0.0, 1.0],
            _ => [-1.0, 0.0],
        }
    }

    /// Physical length of local face `lf`.
    pub fn face_length(mesh: &QuadMesh, lf: usize) -> f64 {
        if lf == BOTTOM || lf == TOP {
            mesh.hx
        } else {
            mesh.hy
        }
    }

    /// Values of a nodal field at the volume quadrature points.
    pub fn at_quad(&self, coeffs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.nb);
        let mut out = vec![0.0; self.nq];
        for (a, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (q, o) in out.iter_mut().enumerate() {
                    *o += c * self.phi[(a, q)];
                }
            }
        }
        out
    }

    /// Trace of a nodal element field on local face `lf`, as face nodal data.
    pub fn trace(&self, coeffs: &[f64], lf: usize) -> Vec<f64> {
        self.face_nodes[lf].iter().map(|&a| coeffs[a]).collect()
    }

    /// Values of face nodal data at the face quadrature points.
    pub fn face_at_quad(&self, face_coeffs: &[f64]) -> Vec<f64> {
        (0..self.nq1)
            .map(|q| (0..self.n1).map(|m| face_coeffs[m] * self.face_phi[(m, q)]).sum())
            .collect()
    }

    /// Element L2 projection of `g(x, y)` onto the nodal space.
    pub fn project_element(&self, mesh: &QuadMesh, e: usize, g: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        let jac = 0.25 * mesh.hx * mesh.hy;
        let mut mass = Mat::zeros(self.nb, self.nb);
        let mut rhs = Mat::zeros(self.nb, 1);
        for q in 0..self.nq {
            let [x, y] = mesh.map_point(e, self.xq[q][0], self.xq[q][1]);
            let wq = self.w2[q] * jac;
            let gq = g(x, y);
            for a in 0..self.nb {
                let pa = self.phi[(a, q)];
                rhs[(a, 0)] += wq * gq * pa;
                for b in 0..self.nb {
                    mass[(a, b)] += wq * pa * self.phi[(b, q)];
                }
            }
        }
        let x = dense_lu_factor_mat(mass.as_ref())?.solve_mat(rhs.as_ref());
        Ok((0..self.nb).map(|a| x[(a, 0)]).collect())
    }

    /// Face L2 projection of `g(x, y)` onto degree-k polynomials.
    pub fn project_face(&self, mesh: &QuadMesh, f: usize, g: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        let face = &mesh.faces[f];
        let mut rhs = Mat::zeros(self.n1, 1);
        for q in 0..self.nq1 {
            let [x, y] = face.point(self.quad.points[q]);
            let gq = g(x, y);
            for m in 0..self.n1 {
                rhs[(m, 0)] += self.quad.weights[q] * gq * self.face_phi[(m, q)];
            }
        }
        let x = dense_lu_factor_mat(self.m1.as_ref())?.solve_mat(rhs.as_ref());
        Ok((0..self.n1).map(|m| x[(m, 0)]).collect())
    }
}
