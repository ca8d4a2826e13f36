//! Time loop of the split scheme: a flow solve from `c^n`, then a transport
//! step to `c^{n+1}` with that velocity.

pub mod config;
pub mod output;
pub mod raster;

use std::path::PathBuf;

pub use config::{
    MeshConfig, Mode, OutputConfig, PermeabilityConfig, PhysicsConfig, SimulationConfig, TimeConfig,
};
pub use output::{
    extract_diagonal_profile, read_snapshot_csv, snapshot_samples, write_profile, write_snapshot, Sample,
};
pub use raster::{load_spe10_slice, Raster, RasterSummary};

use crate::error::{Error, Phase, Result};
use crate::hdg::darcy::face_fluxes;
use crate::hdg::{
    DarcyInput, DarcySolver, FlowSolution, RefElement, Source, TraceBc, TransportInput, TransportSolution,
    TransportSolver,
};
use crate::mesh::{build_uniform_quad_mesh, QuadMesh};
use crate::physics::{is_aligned, well_sources, FluidModel, PermeabilityField, WellSources};
use crate::verification::convergence::{run_mms_on, time_steps, ErrorRow};
use crate::verification::MmsProblem;

/// Discrete fields at one time level.
///
/// `transport` holds `c^{n+1}` and `q^{n+1}`; `flow` is the solve from `c^n`
/// that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub flow: FlowSolution,
    pub transport: TransportSolution,
}

impl FieldState {
    pub fn zero(mesh: &QuadMesh, re: &RefElement) -> Self {
        let n = mesh.n_elements() * re.nb;
        Self {
            t: 0.0,
            flow: FlowSolution::zero(mesh, re),
            transport: TransportSolution {
                qx: vec![0.0; n],
                qy: vec![0.0; n],
                c: vec![0.0; n],
                c_hat: vec![0.0; mesh.n_faces() * re.n1],
            },
        }
    }

    /// Check array sizes against `(mesh, k)`.
    pub fn validate(&self, mesh: &QuadMesh, re: &RefElement) -> Result<()> {
        let n = mesh.n_elements() * re.nb;
        let m = mesh.n_faces() * re.n1;
        let f = &self.flow;
        let t = &self.transport;
        let ok = [f.ux.len(), f.uy.len(), f.p.len(), t.qx.len(), t.qy.len(), t.c.len()]
            .iter()
            .all(|&l| l == n)
            && f.p_hat.len() == m
            && t.c_hat.len() == m;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("field state does not match the mesh"))
        }
    }
}

/// What the step hook sees after each transport solve.
pub struct StepContext<'a> {
    pub step: usize,
    pub dt: f64,
    pub mesh: &'a QuadMesh,
    pub re: &'a RefElement,
    pub fluid: &'a FluidModel,
    /// Well densities; zero in manufactured-solution mode.
    pub wells: &'a WellSources,
    pub c_bar: f64,
    pub c_prev: &'a [f64],
    pub state: &'a FieldState,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mesh: QuadMesh,
    pub re: RefElement,
    pub state: FieldState,
    /// States at the requested snapshot and profile times, in time order.
    pub snapshots: Vec<FieldState>,
    pub artifacts: Vec<PathBuf>,
    pub darcy_solves: usize,
    pub transport_solves: usize,
    /// Final-time errors in manufactured-solution mode.
    pub errors: Option<ErrorRow>,
}

/// Per-element permeability of the configured field.
pub fn build_permeability(config: &SimulationConfig, mesh: &QuadMesh) -> Result<PermeabilityField> {
    match &config.permeability {
        PermeabilityConfig::Constant { value } => PermeabilityField::constant(mesh, *value),
        PermeabilityConfig::Lens {
            background,
            region,
            factor,
        } => {
            if !is_aligned(mesh, region) || region.intersect(&mesh.domain) != Some(*region) {
                return Err(Error::MisalignedRegion {
                    what: "lens",
                    region: region.to_string(),
                });
            }
            if !(*factor > 0.0) {
                return Err(Error::Config(format!("lens factor {factor}")));
            }
            let values = (0..mesh.n_elements())
                .map(|e| {
                    let [x, y] = mesh.element_center(e);
                    if region.contains_point(x, y) {
                        background / factor
                    } else {
                        *background
                    }
                })
                .collect();
            PermeabilityField::from_values(values)
        }
        PermeabilityConfig::Raster { path, scale } => {
            let r = load_spe10_slice(path)?;
            if r.rows != mesh.ny || r.cols != mesh.nx {
                return Err(Error::Config(format!(
                    "raster {} is {}x{}, mesh is {}x{} (rows x cols)",
                    path.display(),
                    r.rows,
                    r.cols,
                    mesh.ny,
                    mesh.nx
                )));
            }
            // row j of the raster is element row j, counted from the bottom
            PermeabilityField::from_values(r.values.iter().map(|v| v * scale).collect())
        }
    }
}

/// Run a configuration to its final time.
pub fn run(config: &SimulationConfig) -> Result<RunOutput> {
    run_with(config, |_| Ok(()))
}

/// Run with a hook called after every step.
pub fn run_with(
    config: &SimulationConfig,
    mut on_step: impl FnMut(&StepContext<'_>) -> Result<()>,
) -> Result<RunOutput> {
    config.validate()?;
    let (nx, ny) = config.mesh.dims()?;
    let mesh = build_uniform_quad_mesh(nx, ny, config.mesh.domain)?;
    let re = RefElement::new(config.degree)?;
    let fluid = config.physics.fluid()?;
    let mut out = Recorder::new(config)?;
    out.visit(&mesh, &re, &FieldState::zero(&mesh, &re))?;

    match config.mode {
        Mode::ManufacturedSolution => {
            let PermeabilityConfig::Constant { value } = config.permeability else {
                return Err(Error::Config("manufactured-solution mode needs constant permeability".into()));
            };
            let problem = MmsProblem { fluid, k: value };
            let wells = WellSources::zero(mesh.n_elements());
            let mut last = None;
            let mut steps = 0;
            let run = run_mms_on(&problem, mesh.clone(), re.clone(), config.time.dt, config.time.t_end, |s| {
                let state = FieldState {
                    t: s.t,
                    flow: s.flow.clone(),
                    transport: s.transport.clone(),
                };
                on_step(&StepContext {
                    step: s.step,
                    dt: config.time.dt,
                    mesh: &mesh,
                    re: &re,
                    fluid: &fluid,
                    wells: &wells,
                    c_bar: 0.0,
                    c_prev: s.c_prev,
                    state: &state,
                })?;
                out.visit(&mesh, &re, &state)?;
                steps += 1;
                last = Some(state);
                Ok(())
            })?;
            Ok(out.finish(
                mesh,
                re,
                last.ok_or_else(|| Error::invalid("no time steps"))?,
                steps + 1,
                steps,
                Some(run.errors),
            ))
        }
        Mode::Wells => {
            let wm = config
                .wells
                .ok_or_else(|| Error::Config("wells mode needs a wells block".into()))?;
            let perm = build_permeability(config, &mesh)?;
            let wells = well_sources(&mesh, &wm)?;
            let flow_src: Vec<f64> = wells.q_in.iter().zip(&wells.q_out).map(|(a, b)| a - b).collect();
            let inject: Vec<f64> = wells.q_in.iter().map(|q| q * wm.c_bar).collect();
            let darcy = DarcySolver::new(&mesh, &re, false)?;
            let transport = TransportSolver::new(&mesh, &re, false)?;

            let mut state = FieldState::zero(&mesh, &re);
            let steps = time_steps(config.time.dt, config.time.t_end);
            for (i, &dt) in steps.iter().enumerate() {
                let flow = darcy
                    .solve(
                        &mesh,
                        &re,
                        &DarcyInput {
                            perm: &perm,
                            fluid: &fluid,
                            c: &state.transport.c,
                            source: Source::Elementwise(&flow_src),
                            bc: &TraceBc::NoFlow,
                        },
                    )
                    .map_err(Error::at_step(i, Phase::Flow))?;
                let flux = face_fluxes(&mesh, &re, &flow);
                let sol = transport
                    .solve(
                        &mesh,
                        &re,
                        &TransportInput {
                            fluid: &fluid,
                            flow: &flow,
                            flux: &flux,
                            c_prev: &state.transport.c,
                            dt,
                            sink: Some(&wells.q_out),
                            source: Source::Elementwise(&inject),
                            bc: &TraceBc::NoFlow,
                        },
                    )
                    .map_err(Error::at_step(i, Phase::Transport))?;
                let t1 = if i + 1 == steps.len() {
                    config.time.t_end
                } else {
                    state.t + dt
                };
                let prev = std::mem::replace(
                    &mut state,
                    FieldState {
                        t: t1,
                        flow,
                        transport: sol,
                    },
                );
                on_step(&StepContext {
                    step: i,
                    dt,
                    mesh: &mesh,
                    re: &re,
                    fluid: &fluid,
                    wells: &wells,
                    c_bar: wm.c_bar,
                    c_prev: &prev.transport.c,
                    state: &state,
                })?;
                out.visit(&mesh, &re, &state)?;
            }
            let n = steps.len();
            Ok(out.finish(mesh, re, state, n, n, None))
        }
    }
}

/// Captures states and writes files at the requested output times.
struct Recorder {
    /// `(time, snapshot, profile)`, sorted by time.
    events: Vec<(f64, bool, bool)>,
    next: usize,
    tol: f64,
    dir: Option<PathBuf>,
    samples: usize,
    snapshots: Vec<FieldState>,
    artifacts: Vec<PathBuf>,
}

impl Recorder {
    fn new(config: &SimulationConfig) -> Result<Self> {
        let o = &config.output;
        let mut events: Vec<(f64, bool, bool)> = Vec::new();
        for (&t, snap) in o.snapshots.iter().map(|t| (t, true)).chain(o.profiles.iter().map(|t| (t, false))) {
            match events.iter_mut().find(|e| e.0 == t) {
                Some(e) if snap => e.1 = true,
                Some(e) => e.2 = true,
                None => events.push((t, snap, !snap)),
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(d) = &o.directory {
            std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        Ok(Self {
            events,
            next: 0,
            tol: 1e-9 * config.time.dt,
            dir: o.directory.clone(),
            samples: o.profile_samples,
            snapshots: Vec::new(),
            artifacts: Vec::new(),
        })
    }

    fn visit(&mut self, mesh: &QuadMesh, re: &RefElement, state: &FieldState) -> Result<()> {
        while let Some(&(t, snap, profile)) = self.events.get(self.next) {
            if t > state.t + self.tol {
                break;
            }
            self.next += 1;
            // files are named by the requested time
            let at = FieldState { t, ..state.clone() };
            if let Some(dir) = &self.dir {
                if snap {
                    self.artifacts.extend(write_snapshot(&at, mesh, re, dir)?);
                }
                if profile {
                    let p = extract_diagonal_profile(&at, mesh, re, self.samples)?;
                    let path = dir.join(format!("profile_{t}.csv"));
                    write_profile(&path, &p)?;
                    self.artifacts.push(path);
                }
            }
            self.snapshots.push(at);
        }
        Ok(())
    }

    fn finish(
        self,
        mesh: QuadMesh,
        re: RefElement,
        state: FieldState,
        darcy_solves: usize,
        transport_solves: usize,
        errors: Option<ErrorRow>,
    ) -> RunOutput {
        RunOutput {
            mesh,
            re,
            state,
            snapshots: self.snapshots,
            artifacts: self.artifacts,
            darcy_solves,
            transport_solves,
            errors,
        }
    }
}
