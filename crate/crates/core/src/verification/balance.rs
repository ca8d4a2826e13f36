//! Discrete conservation checks for one completed step of a wells run.

use serde::Serialize;

use crate::error::Result;
use crate::hdg::darcy::{self, face_fluxes};
use crate::hdg::{transport, RefElement, Source, TraceBc, TransportInput};
use crate::mesh::QuadMesh;
use crate::physics::{FluidModel, WellSources};
use crate::simulation::FieldState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    /// Per element, `int_dE u_hat.n - int_E (q_I - q_P)`.
    pub darcy: Vec<f64>,
    /// Largest element source or boundary flux magnitude.
    pub darcy_scale: f64,
    /// Net flow through the domain boundary.
    pub darcy_boundary_outflow: f64,
    /// `int q_I - int q_P` on the mesh.
    pub source_mismatch: f64,
    /// `phi/dt int (c - c_prev) + int q_P c - int q_I c_bar + boundary outflow`.
    pub transport: f64,
    /// Sum of the magnitudes of the transport terms.
    pub transport_scale: f64,
}

impl BalanceReport {
    pub fn max_darcy_relative(&self) -> f64 {
        self.darcy.iter().fold(0.0f64, |m, r| m.max(r.abs())) / self.darcy_scale
    }

    pub fn transport_relative(&self) -> f64 {
        self.transport.abs() / self.transport_scale
    }
}

fn face_integral(re: &RefElement, mesh: &QuadMesh, lf: usize, vals: &[f64]) -> f64 {
    let h = RefElement::face_length(mesh, lf);
    vals.iter().zip(&re.quad.weights).map(|(v, w)| v * w).sum::<f64>() * 0.5 * h
}

/// Balance residuals of the step from `c_prev` to `state`, with no-flow walls.
#[allow(clippy::too_many_arguments)]
pub fn mass_balance_report(
    state: &FieldState,
    mesh: &QuadMesh,
    re: &RefElement,
    fluid: &FluidModel,
    wells: &WellSources,
    c_bar: f64,
    dt: f64,
    c_prev: &[f64],
) -> Result<BalanceReport> {
    state.validate(mesh, re)?;
    let nb = re.nb;
    let jac = 0.25 * mesh.hx * mesh.hy;
    let flux = face_fluxes(mesh, re, &state.flow);
    let input = TransportInput {
        fluid,
        flow: &state.flow,
        flux: &flux,
        c_prev,
        dt,
        sink: Some(&wells.q_out),
        source: Source::None,
        bc: &TraceBc::NoFlow,
    };

    let mut darcy_res = Vec::with_capacity(mesh.n_elements());
    let mut scale = 0.0f64;
    let mut outflow = 0.0;
    let mut mismatch = 0.0;
    let (mut storage, mut sink, mut inject, mut t_out) = (0.0, 0.0, 0.0, 0.0);
    for e in 0..mesh.n_elements() {
        let area = mesh.element_rect(e).area();
        let src = (wells.q_in[e] - wells.q_out[e]) * area;
        mismatch += src;
        scale = scale.max(src.abs());
        let mut net = 0.0;
        for ef in mesh.faces_of_element(e)? {
            let fl = face_integral(re, mesh, ef.local, &darcy::element_face_flux(mesh, re, &state.flow, e, ef.local));
            net += fl;
            scale = scale.max(fl.abs());
            if mesh.faces[ef.face].boundary {
                outflow += fl;
                let tf = transport::element_face_flux(mesh, re, &state.transport, &input, e, ef.local);
                t_out += face_integral(re, mesh, ef.local, &tf);
            }
        }
        darcy_res.push(net - src);

        let r = e * nb..(e + 1) * nb;
        let dc: Vec<f64> = state.transport.c[r.clone()].iter().zip(&c_prev[r.clone()]).map(|(a, b)| a - b).collect();
        let dq = re.at_quad(&dc);
        let cq = re.at_quad(&state.transport.c[r]);
        for q in 0..re.nq {
            let w = re.w2[q] * jac;
            storage += w * dq[q];
            sink += w * wells.q_out[e] * cq[q];
            inject += w * wells.q_in[e] * c_bar;
        }
    }
    let storage = fluid.phi / dt * storage;
    let terms = [storage, sink, -inject, t_out];
    let t_scale = terms.iter().map(|v| v.abs()).sum::<f64>();
    Ok(BalanceReport {
        darcy: darcy_res,
        darcy_scale: if scale > 0.0 { scale } else { 1.0 },
        darcy_boundary_outflow: outflow,
        source_mismatch: mismatch,
        transport: terms.iter().sum(),
        transport_scale: if t_scale > 0.0 { t_scale } else { 1.0 },
    })
}
