//! HDG discretization of the transport equation with implicit Euler:
//! `phi (c - c_prev)/dt + div(u c + q) + q_P c = s`, `D(u)^-1 q + grad c = 0`.
//!
//! Interior unknowns are ordered `[qx | qy | c]`. The diffusive trace is
//! `q.n + tau (c - c_hat)` with one `tau` per element face. The convective
//! trace uses the single-valued flow flux `u_hat.n`, so constants are
//! transported exactly and the face fluxes of neighbours cancel.

use faer::Mat;
use rayon::prelude::*;

use super::condense::{condense_all, gather, LocalBlocks, Skeleton};
use super::darcy::{element_velocity_at, FlowSolution};
use super::{boundary_dofs, put, weighted_product, RefElement, Source, TraceBc};
use crate::error::{Error, Result};
use crate::mesh::QuadMesh;
use crate::physics::FluidModel;

pub struct TransportInput<'a> {
    pub fluid: &'a FluidModel,
    /// Velocity of the current flow solve.
    pub flow: &'a FlowSolution,
    /// Normal flow flux per face along the stored normal, `face * nq1 + q`.
    pub flux: &'a [f64],
    /// Concentration at the previous time level.
    pub c_prev: &'a [f64],
    pub dt: f64,
    /// Production rate density `q_P` per element.
    pub sink: Option<&'a [f64]>,
    /// Right-hand side, e.g. `q_I c_bar`.
    pub source: Source<'a>,
    pub bc: &'a TraceBc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub qx: Vec<f64>,
    pub qy: Vec<f64>,
    pub c: Vec<f64>,
    pub c_hat: Vec<f64>,
}

/// Stabilization of element `e` on each local face, from its own velocity at
/// the face midpoint.
pub fn element_taus(re: &RefElement, fluid: &FluidModel, flow: &FlowSolution, e: usize) -> [f64; 4] {
    let mut t = [0.0; 4];
    for (lf, tl) in t.iter_mut().enumerate() {
        let u = element_velocity_at(re, flow, e, lf, 0.0);
        *tl = fluid.stabilization_tau(u, RefElement::outward_normal(lf));
    }
    t
}

/// Outward flow flux of element `e` on local face `lf`, at the face points.
fn outward_flux<'a>(mesh: &QuadMesh, re: &RefElement, flux: &'a [f64], e: usize, lf: usize) -> (f64, &'a [f64]) {
    let ef = mesh.element_faces(e)[lf];
    (ef.sign, &flux[ef.face * re.nq1..(ef.face + 1) * re.nq1])
}

/// Local block system of one element.
pub fn assemble_transport_local(
    re: &RefElement,
    mesh: &QuadMesh,
    e: usize,
    input: &TransportInput<'_>,
) -> Result<LocalBlocks> {
    let (nb, n1, nq1) = (re.nb, re.n1, re.nq1);
    let fluid = input.fluid;
    if !(input.dt > 0.0) {
        return Err(Error::invalid(format!("time step {}", input.dt)));
    }
    let jac = 0.25 * mesh.hx * mesh.hy;
    let r = e * nb..(e + 1) * nb;
    let ux_q = re.at_quad(&input.flow.ux[r.clone()]);
    let uy_q = re.at_quad(&input.flow.uy[r.clone()]);
    let mut dxx = Vec::with_capacity(re.nq);
    let mut dxy = Vec::with_capacity(re.nq);
    let mut dyy = Vec::with_capacity(re.nq);
    let mut wux = Vec::with_capacity(re.nq);
    let mut wuy = Vec::with_capacity(re.nq);
    for q in 0..re.nq {
        let w = re.w2[q] * jac;
        let inv = fluid
            .dispersion_tensor_inverse([ux_q[q], uy_q[q]])
            .map_err(|err| Error::Coefficient {
                element: e,
                detail: err.to_string(),
            })?;
        dxx.push(w * inv[0][0]);
        dxy.push(w * inv[0][1]);
        dyy.push(w * inv[1][1]);
        wux.push(w * ux_q[q] * 2.0 / mesh.hx);
        wuy.push(w * uy_q[q] * 2.0 / mesh.hy);
    }
    let axx = weighted_product(&re.phi, &dxx, &re.phi);
    let axy = weighted_product(&re.phi, &dxy, &re.phi);
    let ayy = weighted_product(&re.phi, &dyy, &re.phi);
    let mass = &re.mass * jac;
    let bx = &re.grad[0] * (jac * 2.0 / mesh.hx);
    let by = &re.grad[1] * (jac * 2.0 / mesh.hy);
    let conv = weighted_product(&re.dphi[0], &wux, &re.phi) + weighted_product(&re.dphi[1], &wuy, &re.phi);
    let sink = input.sink.map_or(0.0, |s| s[e]);
    let react = fluid.phi / input.dt + sink;
    let dc = &mass * react - &conv;

    let ni = 3 * nb;
    let nt = 4 * n1;
    let mut kii = Mat::zeros(ni, ni);
    put(&mut kii, 0, 0, &axx, 1.0);
    put(&mut kii, 0, nb, &axy, 1.0);
    put(&mut kii, nb, 0, &axy, 1.0);
    put(&mut kii, nb, nb, &ayy, 1.0);
    put(&mut kii, 0, 2 * nb, &bx.transpose().to_owned(), -1.0);
    put(&mut kii, nb, 2 * nb, &by.transpose().to_owned(), -1.0);
    put(&mut kii, 2 * nb, 0, &bx, 1.0);
    put(&mut kii, 2 * nb, nb, &by, 1.0);
    put(&mut kii, 2 * nb, 2 * nb, &dc, 1.0);

    let taus = element_taus(re, fluid, input.flow, e);
    let mut kit = Mat::zeros(ni, nt);
    let mut kti = Mat::zeros(nt, ni);
    let mut ktt = Mat::zeros(nt, nt);
    for lf in 0..4 {
        let scale = 0.5 * RefElement::face_length(mesh, lf);
        let n = RefElement::outward_normal(lf);
        let (comp, sgn) = if n[0] != 0.0 { (0, n[0]) } else { (1, n[1]) };
        let tau = taus[lf];
        let (fsign, fl) = outward_flux(mesh, re, input.flux, e, lf);
        // (u_hat.n - tau) weighted 1D mass
        let wq: Vec<f64> = (0..nq1)
            .map(|q| scale * re.quad.weights[q] * (fsign * fl[q] - tau))
            .collect();
        let mconv = weighted_product(&re.face_phi, &wq, &re.face_phi);
        for (m, &a) in re.face_nodes[lf].iter().enumerate() {
            for i in 0..n1 {
                let t = lf * n1 + i;
                let mf = scale * re.m1[(m, i)];
                kit[(comp * nb + a, t)] += sgn * mf;
                kit[(2 * nb + a, t)] += mconv[(m, i)];
                kti[(t, comp * nb + a)] += sgn * mf;
                kti[(t, 2 * nb + a)] += tau * mf;
            }
            for (m2, &b) in re.face_nodes[lf].iter().enumerate() {
                kii[(2 * nb + a, 2 * nb + b)] += tau * scale * re.m1[(m, m2)];
            }
        }
        for i in 0..n1 {
            for j in 0..n1 {
                ktt[(lf * n1 + i, lf * n1 + j)] = mconv[(i, j)];
            }
        }
    }

    let mut ri = vec![0.0; ni];
    let c_prev = &input.c_prev[r];
    let load = input.source.load(re, mesh, e);
    for a in 0..nb {
        let mc: f64 = (0..nb).map(|b| mass[(a, b)] * c_prev[b]).sum();
        ri[2 * nb + a] = fluid.phi / input.dt * mc + load[a];
    }
    Ok(LocalBlocks {
        kii,
        kit,
        kti,
        ktt,
        ri,
        rt: vec![0.0; nt],
    })
}

/// Transport solver with a cached skeleton pattern.
#[derive(Debug, Clone)]
pub struct TransportSolver {
    skeleton: Skeleton,
    dirichlet: bool,
}

impl TransportSolver {
    /// Dirichlet problems constrain the boundary traces; otherwise the
    /// flux-continuity rows of boundary faces impose zero total flux.
    pub fn new(mesh: &QuadMesh, re: &RefElement, dirichlet: bool) -> Result<Self> {
        let constrained = if dirichlet {
            boundary_dofs(mesh, re.n1)
        } else {
            Vec::new()
        };
        Ok(Self {
            skeleton: Skeleton::new(mesh, re.n1, &constrained)?,
            dirichlet,
        })
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    pub fn constraint_values(&self, mesh: &QuadMesh, re: &RefElement, bc: &TraceBc) -> Result<Vec<f64>> {
        let n = mesh.n_faces() * re.n1;
        match (bc, self.dirichlet) {
            (TraceBc::Dirichlet(g), true) if g.len() == n => Ok(g.clone()),
            (TraceBc::Dirichlet(g), true) => Err(Error::invalid(format!(
                "Dirichlet data of length {}, expected {n}",
                g.len()
            ))),
            (TraceBc::NoFlow, false) => Ok(vec![0.0; n]),
            _ => Err(Error::invalid("boundary condition does not match the solver")),
        }
    }

    pub fn assemble(&self, mesh: &QuadMesh, re: &RefElement, input: &TransportInput<'_>) -> Result<Vec<LocalBlocks>> {
        let n = mesh.n_elements() * re.nb;
        if input.c_prev.len() != n || input.flow.ux.len() != n || input.flux.len() != mesh.n_faces() * re.nq1 {
            return Err(Error::invalid("field sizes do not match the mesh"));
        }
        (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| assemble_transport_local(re, mesh, e, input))
            .collect()
    }

    pub fn solve(&self, mesh: &QuadMesh, re: &RefElement, input: &TransportInput<'_>) -> Result<TransportSolution> {
        let g = self.constraint_values(mesh, re, input.bc)?;
        let blocks = self.assemble(mesh, re, input)?;
        let cond = condense_all(&blocks)?;
        let sys = self.skeleton.assemble(mesh, &cond, &g);
        let c_hat = self.skeleton.solve(&sys, &g)?;
        let nb = re.nb;
        let interior: Vec<Vec<f64>> = cond
            .par_iter()
            .enumerate()
            .map(|(e, c)| c.recover(&gather(mesh, re.n1, e, &c_hat)))
            .collect();
        let n = mesh.n_elements() * nb;
        let mut sol = TransportSolution {
            qx: vec![0.0; n],
            qy: vec![0.0; n],
            c: vec![0.0; n],
            c_hat,
        };
        for (e, x) in interior.iter().enumerate() {
            let r = e * nb..(e + 1) * nb;
            sol.qx[r.clone()].copy_from_slice(&x[..nb]);
            sol.qy[r.clone()].copy_from_slice(&x[nb..2 * nb]);
            sol.c[r].copy_from_slice(&x[2 * nb..]);
        }
        Ok(sol)
    }
}

/// One implicit Euler step, building the solver on the fly.
pub fn transport_step(mesh: &QuadMesh, re: &RefElement, input: &TransportInput<'_>) -> Result<TransportSolution> {
    TransportSolver::new(mesh, re, input.bc.is_dirichlet())?.solve(mesh, re, input)
}

/// Interior unknowns of element `e` in local block order.
pub fn interior_vector(sol: &TransportSolution, re: &RefElement, e: usize) -> Vec<f64> {
    let r = e * re.nb..(e + 1) * re.nb;
    [&sol.qx[r.clone()], &sol.qy[r.clone()], &sol.c[r]].concat()
}

/// Outward total flux `(q_hat + u c_hat).n` of element `e` on local face
/// `lf`, at the face points.
pub fn element_face_flux(
    mesh: &QuadMesh,
    re: &RefElement,
    sol: &TransportSolution,
    input: &TransportInput<'_>,
    e: usize,
    lf: usize,
) -> Vec<f64> {
    let r = e * re.nb..(e + 1) * re.nb;
    let (qx, qy, c) = (&sol.qx[r.clone()], &sol.qy[r.clone()], &sol.c[r]);
    let n = RefElement::outward_normal(lf);
    let tau = element_taus(re, input.fluid, input.flow, e)[lf];
    let f = mesh.element_faces(e)[lf].face;
    let diff: Vec<f64> = re.face_nodes[lf]
        .iter()
        .map(|&a| n[0] * qx[a] + n[1] * qy[a] + tau * c[a])
        .collect();
    let diff_q = re.face_at_quad(&diff);
    let ch_q = re.face_at_quad(&sol.c_hat[f * re.n1..(f + 1) * re.n1]);
    let (fsign, fl) = outward_flux(mesh, re, input.flux, e, lf);
    (0..re.nq1)
        .map(|q| diff_q[q] + (fsign * fl[q] - tau) * ch_q[q])
        .collect()
}
