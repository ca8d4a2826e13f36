//! Mixed HDG discretization of `mu(c) K^-1 u + grad p = 0`, `div u = s`.
//!
//! Interior unknowns per element are ordered `[ux | uy | p]`, traces by local
//! face then face node. The numerical flux is `u.n + tau (p - p_hat)` with one
//! `tau` per element, see [`FlowStabilization`].

use faer::Mat;
use rayon::prelude::*;

use super::condense::{condense_all, gather, LocalBlocks, Skeleton};
use super::{boundary_dofs, put, weighted_product, RefElement, Source, TraceBc};
use crate::error::{Error, Result};
use crate::mesh::QuadMesh;
use crate::physics::{FluidModel, PermeabilityField};

pub struct DarcyInput<'a> {
    pub perm: &'a PermeabilityField,
    pub fluid: &'a FluidModel,
    /// Concentration coefficients, `nb` per element.
    pub c: &'a [f64],
    pub source: Source<'a>,
    pub bc: &'a TraceBc,
}

/// Velocity, pressure and pressure trace coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    pub p: Vec<f64>,
    pub p_hat: Vec<f64>,
    /// Flux stabilization of each element.
    pub tau: Vec<f64>,
}

/// Choice of `tau` in the flow flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlowStabilization {
    /// `tau = 1` in whatever units the data use.
    Unit,
    /// `tau = K_E / mu_o`, the resident-fluid mobility of the element.
    #[default]
    Mobility,
}

impl FlowStabilization {
    pub fn tau(self, k_e: f64, fluid: &FluidModel) -> f64 {
        match self {
            FlowStabilization::Unit => 1.0,
            FlowStabilization::Mobility => k_e / fluid.mu_o,
        }
    }
}

impl FlowSolution {
    pub fn zero(mesh: &QuadMesh, re: &RefElement) -> Self {
        let n = mesh.n_elements() * re.nb;
        Self {
            ux: vec![0.0; n],
            uy: vec![0.0; n],
            p: vec![0.0; n],
            p_hat: vec![0.0; mesh.n_faces() * re.n1],
            tau: vec![1.0; mesh.n_elements()],
        }
    }

    fn element(&self, re: &RefElement, e: usize) -> (&[f64], &[f64], &[f64]) {
        let r = e * re.nb..(e + 1) * re.nb;
        (&self.ux[r.clone()], &self.uy[r.clone()], &self.p[r])
    }
}

/// Local block system of one element.
pub fn assemble_darcy_local(
    re: &RefElement,
    mesh: &QuadMesh,
    e: usize,
    k_e: f64,
    tau: f64,
    c_e: &[f64],
    fluid: &FluidModel,
    source: Source<'_>,
) -> Result<LocalBlocks> {
    let (nb, n1) = (re.nb, re.n1);
    let jac = 0.25 * mesh.hx * mesh.hy;
    if !(k_e > 0.0 && k_e.is_finite()) {
        return Err(Error::Coefficient {
            element: e,
            detail: format!("permeability {k_e}"),
        });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Coefficient {
            element: e,
            detail: format!("flux stabilization {tau}"),
        });
    }
    let c_q = re.at_quad(c_e);
    let mut d = Vec::with_capacity(re.nq);
    for (q, &c) in c_q.iter().enumerate() {
        let mu = fluid.viscosity(c);
        let alpha = mu / k_e;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Coefficient {
                element: e,
                detail: format!("mu/K = {alpha} at quadrature point {q}"),
            });
        }
        d.push(re.w2[q] * jac * alpha);
    }
    let m_alpha = weighted_product(&re.phi, &d, &re.phi);
    let bx = &re.grad[0] * (jac * 2.0 / mesh.hx);
    let by = &re.grad[1] * (jac * 2.0 / mesh.hy);

    let ni = 3 * nb;
    let nt = 4 * n1;
    let mut kii = Mat::zeros(ni, ni);
    put(&mut kii, 0, 0, &m_alpha, 1.0);
    put(&mut kii, nb, nb, &m_alpha, 1.0);
    put(&mut kii, 0, 2 * nb, &bx.transpose().to_owned(), -1.0);
    put(&mut kii, nb, 2 * nb, &by.transpose().to_owned(), -1.0);
    put(&mut kii, 2 * nb, 0, &bx, 1.0);
    put(&mut kii, 2 * nb, nb, &by, 1.0);

    let mut kit = Mat::zeros(ni, nt);
    let mut kti = Mat::zeros(nt, ni);
    let mut ktt = Mat::zeros(nt, nt);
    for lf in 0..4 {
        let scale = 0.5 * RefElement::face_length(mesh, lf);
        let n = RefElement::outward_normal(lf);
        // normal velocity component on this face and its sign
        let (comp, sgn) = if n[0] != 0.0 { (0, n[0]) } else { (1, n[1]) };
        for (m, &a) in re.face_nodes[lf].iter().enumerate() {
            for i in 0..n1 {
                let t = lf * n1 + i;
                let mf = scale * re.m1[(m, i)];
                // <p_hat, v.n>
                kit[(comp * nb + a, t)] += sgn * mf;
                // -<p_hat, w>
                kit[(2 * nb + a, t)] -= tau * mf;
                // <u.n, mu> and <p, mu>
                kti[(t, comp * nb + a)] += sgn * mf;
                kti[(t, 2 * nb + a)] += tau * mf;
            }
            for (m2, &b) in re.face_nodes[lf].iter().enumerate() {
                // <p, w> on the boundary
                kii[(2 * nb + a, 2 * nb + b)] += tau * scale * re.m1[(m, m2)];
            }
        }
        for i in 0..n1 {
            for j in 0..n1 {
                ktt[(lf * n1 + i, lf * n1 + j)] = -tau * scale * re.m1[(i, j)];
            }
        }
    }

    let mut ri = vec![0.0; ni];
    ri[2 * nb..].copy_from_slice(&source.load(re, mesh, e));
    Ok(LocalBlocks {
        kii,
        kit,
        kti,
        ktt,
        ri,
        rt: vec![0.0; nt],
    })
}

/// Flow solver with a cached skeleton pattern for one mesh and boundary kind.
#[derive(Debug, Clone)]
pub struct DarcySolver {
    skeleton: Skeleton,
    dirichlet: bool,
    stabilization: FlowStabilization,
}

impl DarcySolver {
    /// Dirichlet problems constrain all boundary traces; no-flow problems pin
    /// trace dof 0 to zero, fixing the free additive constant.
    pub fn new(mesh: &QuadMesh, re: &RefElement, dirichlet: bool) -> Result<Self> {
        let constrained = if dirichlet {
            boundary_dofs(mesh, re.n1)
        } else {
            vec![0]
        };
        Ok(Self {
            skeleton: Skeleton::new(mesh, re.n1, &constrained)?.definite(-1.0)?,
            dirichlet,
            stabilization: FlowStabilization::default(),
        })
    }

    pub fn with_stabilization(mut self, s: FlowStabilization) -> Self {
        self.stabilization = s;
        self
    }

    pub fn stabilization(&self) -> FlowStabilization {
        self.stabilization
    }

    pub fn skeleton(&self) -> &Skeleton {
        &self.skeleton
    }

    /// Values of the constrained traces.
    pub fn constraint_values(&self, mesh: &QuadMesh, re: &RefElement, bc: &TraceBc) -> Result<Vec<f64>> {
        match (bc, self.dirichlet) {
            (TraceBc::Dirichlet(g), true) if g.len() == mesh.n_faces() * re.n1 => Ok(g.clone()),
            (TraceBc::Dirichlet(g), true) => Err(Error::invalid(format!(
                "Dirichlet data of length {}, expected {}",
                g.len(),
                mesh.n_faces() * re.n1
            ))),
            (TraceBc::NoFlow, false) => Ok(vec![0.0; mesh.n_faces() * re.n1]),
            _ => Err(Error::invalid("boundary condition does not match the solver")),
        }
    }

    pub fn assemble(&self, mesh: &QuadMesh, re: &RefElement, input: &DarcyInput<'_>) -> Result<Vec<LocalBlocks>> {
        let nb = re.nb;
        if input.c.len() != mesh.n_elements() * nb || input.perm.len() != mesh.n_elements() {
            return Err(Error::invalid("field sizes do not match the mesh"));
        }
        (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                assemble_darcy_local(
                    re,
                    mesh,
                    e,
                    input.perm.get(e),
                    self.stabilization.tau(input.perm.get(e), input.fluid),
                    &input.c[e * nb..(e + 1) * nb],
                    input.fluid,
                    input.source,
                )
            })
            .collect()
    }

    pub fn solve(&self, mesh: &QuadMesh, re: &RefElement, input: &DarcyInput<'_>) -> Result<FlowSolution> {
        let g = self.constraint_values(mesh, re, input.bc)?;
        let blocks = self.assemble(mesh, re, input)?;
        let cond = condense_all(&blocks)?;
        let sys = self.skeleton.assemble(mesh, &cond, &g);
        let p_hat = self.skeleton.solve(&sys, &g)?;
        let nb = re.nb;
        let interior: Vec<Vec<f64>> = cond
            .par_iter()
            .enumerate()
            .map(|(e, c)| c.recover(&gather(mesh, re.n1, e, &p_hat)))
            .collect();
        let mut sol = FlowSolution::zero(mesh, re);
        for (e, x) in interior.iter().enumerate() {
            let r = e * nb..(e + 1) * nb;
            sol.ux[r.clone()].copy_from_slice(&x[..nb]);
            sol.uy[r.clone()].copy_from_slice(&x[nb..2 * nb]);
            sol.p[r].copy_from_slice(&x[2 * nb..]);
        }
        sol.p_hat = p_hat;
        sol.tau = (0..mesh.n_elements())
            .map(|e| self.stabilization.tau(input.perm.get(e), input.fluid))
            .collect();
        Ok(sol)
    }
}

/// One-shot assemble, condense, solve and recover.
pub fn darcy_solve(mesh: &QuadMesh, re: &RefElement, input: &DarcyInput<'_>) -> Result<FlowSolution> {
    DarcySolver::new(mesh, re, input.bc.is_dirichlet())?.solve(mesh, re, input)
}

/// Interior unknowns of element `e` in local block order.
pub fn interior_vector(sol: &FlowSolution, re: &RefElement, e: usize) -> Vec<f64> {
    let (ux, uy, p) = sol.element(re, e);
    [ux, uy, p].concat()
}

/// Outward `u_hat . n` of element `e` on local face `lf`, at the face points.
pub fn element_face_flux(mesh: &QuadMesh, re: &RefElement, sol: &FlowSolution, e: usize, lf: usize) -> Vec<f64> {
    let (ux, uy, p) = sol.element(re, e);
    let n = RefElement::outward_normal(lf);
    let f = mesh.element_faces(e)[lf].face;
    let tau = sol.tau[e];
    let un: Vec<f64> = re.face_nodes[lf]
        .iter()
        .map(|&a| n[0] * ux[a] + n[1] * uy[a] + tau * p[a])
        .collect();
    let un_q = re.face_at_quad(&un);
    let ph_q = re.face_at_quad(&sol.p_hat[f * re.n1..(f + 1) * re.n1]);
    un_q.iter().zip(&ph_q).map(|(a, b)| a - tau * b).collect()
}

/// Outward `u . n` of element `e` on local face `lf` at face point `s`.
pub fn element_velocity_at(re: &RefElement, sol: &FlowSolution, e: usize, lf: usize, s: f64) -> [f64; 2] {
    let (ux, uy, _) = sol.element(re, e);
    let l = re.basis.values(s);
    let mut u = [0.0; 2];
    for (m, &a) in re.face_nodes[lf].iter().enumerate() {
        u[0] += l[m] * ux[a];
        u[1] += l[m] * uy[a];
    }
    u
}

/// Numerical normal flux on every face, oriented along the stored normal and
/// taken from the first neighbouring element. Laid out `face * nq1 + q`.
pub fn face_fluxes(mesh: &QuadMesh, re: &RefElement, sol: &FlowSolution) -> Vec<f64> {
    let mut out = Vec::with_capacity(mesh.n_faces() * re.nq1);
    for face in &mesh.faces {
        let owner = face.elements[0].or(face.elements[1]).expect("face without element");
        let ef = mesh
            .element_faces(owner)
            .iter()
            .find(|ef| ef.face == face.id)
            .copied()
            .expect("face not on its element");
        let fl = element_face_flux(mesh, re, sol, owner, ef.local);
        out.extend(fl.iter().map(|v| ef.sign * v));
    }
    out
}
