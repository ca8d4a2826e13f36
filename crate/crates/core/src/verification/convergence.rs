//! Manufactured-solution runs and error tables.

use std::fmt::{self, Write as _};

use serde::Serialize;

use super::mms::MmsProblem;
use crate::error::{Error, Phase, Result};
use crate::hdg::darcy::face_fluxes;
use crate::hdg::{
    project_boundary, project_elements, DarcyInput, DarcySolver, FlowSolution, RefElement, Source, TraceBc,
    TransportInput, TransportSolution, TransportSolver,
};
use crate::mesh::{build_uniform_quad_mesh, QuadMesh, Rect};
use crate::physics::PermeabilityField;

/// L2 errors at the final time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRow {
    pub k: usize,
    pub n: usize,
    pub steps: usize,
    pub p: f64,
    pub u: f64,
    pub c: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub t_end: f64,
    pub rows: Vec<ErrorRow>,
}

/// `log2(coarse / fine)`.
pub fn rate(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Time step of the manufactured-solution protocol, `0.1 / ((k+1) N^k)`.
pub fn mms_time_step(k: usize, n: usize) -> f64 {
    0.1 / ((k + 1) as f64 * (n as f64).powi(k as i32))
}

/// Step sizes reaching `t_end`: whole steps of `dt`, the last one shortened
/// if `t_end` is not a multiple of `dt`.
pub fn time_steps(dt: f64, t_end: f64) -> Vec<f64> {
    let ratio = t_end / dt;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round().max(1.0) as usize
    } else {
        ratio.ceil() as usize
    };
    (0..n)
        .map(|i| {
            let t0 = i as f64 * dt;
            let t1 = if i + 1 == n { t_end } else { (i + 1) as f64 * dt };
            t1 - t0
        })
        .collect()
}

impl ConvergenceReport {
    /// Rows of the same degree, by increasing `n`.
    pub fn degree_rows(&self, k: usize) -> Vec<ErrorRow> {
        let mut r: Vec<ErrorRow> = self.rows.iter().filter(|r| r.k == k).copied().collect();
        r.sort_by_key(|r| r.n);
        r
    }

    /// Rates `[p, u, c, q]` of `row` against the previous row of the same degree.
    pub fn rates(&self, k: usize, n: usize) -> Option<[f64; 4]> {
        let rows = self.degree_rows(k);
        let i = rows.iter().position(|r| r.n == n)?;
        let prev = rows.get(i.checked_sub(1)?)?;
        let cur = rows[i];
        Some([
            rate(prev.p, cur.p),
            rate(prev.u, cur.u),
            rate(prev.c, cur.c),
            rate(prev.q, cur.q),
        ])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,N,steps,err_p,rate_p,err_u,rate_u,err_c,rate_c,err_q,rate_q\n");
        for r in &self.rows {
            let rt = self.rates(r.k, r.n);
            let f = |i: usize| rt.map(|v| format!("{:.4e}", v[i])).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{:.4e},{},{:.4e},{},{:.4e},{},{:.4e},{}",
                r.k,
                r.n,
                r.steps,
                r.p,
                f(0),
                r.u,
                f(1),
                r.c,
                f(2),
                r.q,
                f(3)
            );
        }
        s
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>3} {:>4} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7} {:>11} {:>7}",
            "k", "N", "|p-ph|", "rate", "|u-uh|", "rate", "|c-ch|", "rate", "|q-qh|", "rate"
        )?;
        for r in &self.rows {
            let rt = self.rates(r.k, r.n);
            let g = |i: usize| rt.map(|v| format!("{:.4}", v[i])).unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:>3} {:>4} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e} {:>7} {:>11.4e} {:>7}",
                r.k,
                r.n,
                r.p,
                g(0),
                r.u,
                g(1),
                r.c,
                g(2),
                r.q,
                g(3)
            )?;
        }
        Ok(())
    }
}

/// Square of the L2 distance between nodal fields and exact functions,
/// summed over components, by the `(k+2)`-point rule of `re`.
pub fn l2_error(
    mesh: &QuadMesh,
    re: &RefElement,
    fields: &[&[f64]],
    exact: impl Fn(f64, f64) -> Vec<f64>,
) -> f64 {
    let jac = 0.25 * mesh.hx * mesh.hy;
    let mut sum = 0.0;
    for e in 0..mesh.n_elements() {
        let r = e * re.nb..(e + 1) * re.nb;
        let vals: Vec<Vec<f64>> = fields.iter().map(|f| re.at_quad(&f[r.clone()])).collect();
        for q in 0..re.nq {
            let [x, y] = mesh.map_point(e, re.xq[q][0], re.xq[q][1]);
            let ex = exact(x, y);
            let d2: f64 = vals.iter().zip(&ex).map(|(v, x)| (v[q] - x).powi(2)).sum();
            sum += re.w2[q] * jac * d2;
        }
    }
    sum.sqrt()
}

/// Everything a manufactured-solution run produces.
#[derive(Debug, Clone)]
pub struct MmsRun {
    pub mesh: QuadMesh,
    pub re: RefElement,
    pub flow: FlowSolution,
    pub transport: TransportSolution,
    pub errors: ErrorRow,
}

/// State after one step of a manufactured-solution run.
pub struct MmsStep<'a> {
    pub step: usize,
    /// Time reached by the step.
    pub t: f64,
    /// Flow used by the step.
    pub flow: &'a FlowSolution,
    pub transport: &'a TransportSolution,
    /// Concentration before the step.
    pub c_prev: &'a [f64],
}

/// Run the manufactured problem on an `n x n` mesh of the unit square to `t_end`.
pub fn run_mms(problem: &MmsProblem, k: usize, n: usize, t_end: f64) -> Result<MmsRun> {
    let mesh = build_uniform_quad_mesh(n, n, Rect::square(0.0, 1.0))?;
    let re = RefElement::new(k)?;
    run_mms_on(problem, mesh, re, mms_time_step(k, n), t_end, |_| Ok(()))
}

/// Run the manufactured problem on any mesh with step `dt`, calling
/// `on_step` after every transport solve.
pub fn run_mms_on(
    problem: &MmsProblem,
    mesh: QuadMesh,
    re: RefElement,
    dt: f64,
    t_end: f64,
    mut on_step: impl FnMut(MmsStep<'_>) -> Result<()>,
) -> Result<MmsRun> {
    if !(dt > 0.0 && t_end > 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::invalid(format!("time step {dt}, final time {t_end}")));
    }
    let perm = PermeabilityField::constant(&mesh, problem.k)?;
    let fluid = &problem.fluid;
    let darcy = DarcySolver::new(&mesh, &re, true)?;
    let transport = TransportSolver::new(&mesh, &re, true)?;

    let flow_at = |c: &[f64], t: f64, step: usize| -> Result<FlowSolution> {
        let fp = move |x: f64, y: f64| problem.flow_forcing(x, y, t);
        let bc = TraceBc::Dirichlet(project_boundary(&mesh, &re, |x, y| problem.pressure(x, y, t))?);
        darcy
            .solve(
                &mesh,
                &re,
                &DarcyInput {
                    perm: &perm,
                    fluid,
                    c,
                    source: Source::Function(&fp),
                    bc: &bc,
                },
            )
            .map_err(Error::at_step(step, Phase::Flow))
    };

    let mut c = project_elements(&mesh, &re, |x, y| problem.concentration(x, y, 0.0))?;
    let mut last = None;
    let steps = time_steps(dt, t_end);
    let mut t = 0.0;
    for (i, &dt) in steps.iter().enumerate() {
        let flow = flow_at(&c, t, i)?;
        let flux = face_fluxes(&mesh, &re, &flow);
        let t1 = if i + 1 == steps.len() { t_end } else { t + dt };
        let fc = move |x: f64, y: f64| problem.transport_forcing(x, y, t1);
        let bc = TraceBc::Dirichlet(project_boundary(&mesh, &re, |x, y| problem.concentration(x, y, t1))?);
        let sol = transport
            .solve(
                &mesh,
                &re,
                &TransportInput {
                    fluid,
                    flow: &flow,
                    flux: &flux,
                    c_prev: &c,
                    dt,
                    sink: None,
                    source: Source::Function(&fc),
                    bc: &bc,
                },
            )
            .map_err(Error::at_step(i, Phase::Transport))?;
        on_step(MmsStep {
            step: i,
            t: t1,
            flow: &flow,
            transport: &sol,
            c_prev: &c,
        })?;
        c.clone_from(&sol.c);
        last = Some(sol);
        t = t1;
    }
    let tr = last.ok_or_else(|| Error::invalid("no time steps"))?;
    // flow at the final time from the final concentration
    let flow = flow_at(&c, t_end, steps.len())?;

    let errors = ErrorRow {
        k: re.k(),
        n: mesh.nx,
        steps: steps.len(),
        p: l2_error(&mesh, &re, &[&flow.p], |x, y| vec![problem.pressure(x, y, t_end)]),
        u: l2_error(&mesh, &re, &[&flow.ux, &flow.uy], |x, y| problem.velocity(x, y, t_end).to_vec()),
        c: l2_error(&mesh, &re, &[&tr.c], |x, y| vec![problem.concentration(x, y, t_end)]),
        q: l2_error(&mesh, &re, &[&tr.qx, &tr.qy], |x, y| {
            problem.diffusive_flux(x, y, t_end).to_vec()
        }),
    };
    Ok(MmsRun {
        mesh,
        re,
        flow,
        transport: tr,
        errors,
    })
}

/// Error table over every `(k, N)` pair.
pub fn run_convergence(k_list: &[usize], n_list: &[usize], t_end: f64) -> Result<ConvergenceReport> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("final time {t_end}")));
    }
    let problem = MmsProblem::default();
    let mut rows = Vec::new();
    for &k in k_list {
        for &n in n_list {
            rows.push(run_mms(&problem, k, n, t_end)?.errors);
        }
    }
    Ok(ConvergenceReport { t_end, rows })
}
