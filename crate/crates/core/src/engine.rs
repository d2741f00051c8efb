//! The immersed-boundary time loop and run orchestration.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::coupling::{interp_velocity, spread_into};
use crate::fibers::{
    add_beam_force, add_spring_force, add_target_force, update_beam_curvatures,
    update_target_positions, BeamSet, SpringSet, TargetSet,
};
use crate::fluid::{FluidSolver, FluidState, Grid};
use crate::geometry::LagrangianMesh;
use crate::io::{write_fields_vtk, DumpFields};
use crate::kinematics::{PhaseSchedule, StateMatrix};
use crate::scenario::build_structure;
use crate::{Error, Real, Result, Vec2};

/// What the spline schedule drives, if anything.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive<T> {
    Static,
    /// Keyframe positions for the target points (row `i` is target `i`).
    Targets {
        schedule: PhaseSchedule<T>,
        states: Vec<StateMatrix<T>>,
    },
    /// Keyframe preferred curvatures (row `i` is beam `i`).
    Curvatures {
        schedule: PhaseSchedule<T>,
        states: Vec<StateMatrix<T>>,
    },
}

/// One immersed structure with its fiber models.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure<T> {
    pub mesh: LagrangianMesh<T>,
    pub targets: TargetSet<T>,
    pub springs: SpringSet<T>,
    pub beams: BeamSet<T>,
    pub drive: Drive<T>,
}

impl<T: Real> Structure<T> {
    pub fn passive(mesh: LagrangianMesh<T>) -> Self {
        Self {
            mesh,
            targets: TargetSet::default(),
            springs: SpringSet::default(),
            beams: BeamSet::default(),
            drive: Drive::Static,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mesh.len();
        self.targets.validate(n)?;
        self.springs.validate(n)?;
        self.beams.validate(n)?;
        let (rows, states, schedule) = match &self.drive {
            Drive::Static => return Ok(()),
            Drive::Targets { schedule, states } => (self.targets.len(), states, schedule),
            Drive::Curvatures { schedule, states } => (self.beams.beams.len(), states, schedule),
        };
        if states.len() <= schedule.max_state_index() {
            return Err(Error::InvalidArgument(format!(
                "schedule needs {} states, {} given",
                schedule.max_state_index() + 1,
                states.len()
            )));
        }
        for s in states {
            if s.len() != rows {
                return Err(Error::ShapeMismatch {
                    expected: rows,
                    found: s.len(),
                });
            }
        }
        Ok(())
    }

    /// Period of the driving schedule, if any.
    pub fn period(&self) -> Option<T> {
        match &self.drive {
            Drive::Static => None,
            Drive::Targets { schedule, .. } | Drive::Curvatures { schedule, .. } => {
                Some(schedule.period())
            }
        }
    }

    fn apply_drive(&mut self, t: T) -> Result<()> {
        match &self.drive {
            Drive::Static => Ok(()),
            Drive::Targets { schedule, states } => {
                update_target_positions(&mut self.targets, schedule, states, t)
            }
            Drive::Curvatures { schedule, states } => {
                update_beam_curvatures(&mut self.beams, schedule, states, t)
            }
        }
    }
}

/// Fluid, structure and clock advanced together.
pub struct Simulation<T: Real> {
    solver: FluidSolver<T>,
    pub fluid: FluidState<T>,
    pub structure: Structure<T>,
    /// Current node positions (not wrapped; the kernel handles periodicity).
    pub positions: Vec<Vec2<T>>,
    pub step: usize,
    pub dt: T,
    forces: Vec<Vec2<T>>,
}

impl<T: Real> Simulation<T> {
    pub fn new(fluid: FluidState<T>, structure: Structure<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        structure.validate()?;
        let positions = structure.mesh.points.clone();
        Ok(Self {
            solver: FluidSolver::new(fluid.grid),
            forces: vec![Vec2::zero(); positions.len()],
            fluid,
            structure,
            positions,
            step: 0,
            dt,
        })
    }

    pub fn time(&self) -> T {
        self.dt * T::from_usize_lossy(self.step)
    }

    pub fn grid(&self) -> &Grid<T> {
        self.solver.grid()
    }

    pub fn solver(&self) -> &FluidSolver<T> {
        &self.solver
    }

    /// Lagrangian force density from the most recent step.
    pub fn forces(&self) -> &[Vec2<T>] {
        &self.forces
    }

    /// Forces from the current configuration, then spread, fluid solve,
    /// interpolation and the no-slip position update.
    pub fn advance(&mut self) -> Result<crate::fluid::StepReport<T>> {
        let t = self.time();
        self.structure.apply_drive(t)?;

        self.forces.iter_mut().for_each(|f| *f = Vec2::zero());
        let s = &self.structure;
        add_target_force(&self.positions, &s.targets, &mut self.forces)?;
        add_spring_force(&self.positions, &s.springs, &mut self.forces)?;
        add_beam_force(&self.positions, &s.beams, &mut self.forces)?;

        self.fluid.fx.fill(T::zero());
        self.fluid.fy.fill(T::zero());
        let grid = self.fluid.grid;
        spread_into(
            &self.forces,
            &self.positions,
            s.mesh.ds,
            &grid,
            &mut self.fluid.fx,
            &mut self.fluid.fy,
        )
        .map_err(|e| self.diverged_or(e))?;

        let report = self
            .solver
            .advance(&mut self.fluid, self.dt)
            .map_err(|e| self.diverged_or(e))?;

        let vel = interp_velocity(&self.fluid.u, &self.fluid.v, &self.positions, &grid)
            .map_err(|e| self.diverged_or(e))?;
        for (x, u) in self.positions.iter_mut().zip(vel) {
            *x += u * self.dt;
        }
        self.step += 1;
        if !self.fluid.is_finite() || !self.positions.iter().all(|p| p.is_finite()) {
            return Err(Error::Diverged { step: self.step });
        }
        Ok(report)
    }

    fn diverged_or(&self, e: Error) -> Error {
        match e {
            Error::NonFinite(_) => Error::Diverged { step: self.step },
            other => other,
        }
    }

    pub fn centroid(&self) -> Vec2<T> {
        StateMatrix::new(self.positions.clone()).centroid()
    }
}

/// Builds the simulation described by `cfg` at rest.
pub fn build_simulation<T: Real>(cfg: &SimConfig) -> Result<Simulation<T>> {
    cfg.validate()?;
    let grid = Grid::new(cfg.nx, cfg.ny, T::lit(cfg.lx), T::lit(cfg.ly))?;
    let fluid = FluidState::at_rest(grid, T::lit(cfg.rho), T::lit(cfg.mu))?;
    Simulation::new(fluid, build_structure(cfg)?, T::lit(cfg.dt))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpRecord {
    pub index: usize,
    pub step: usize,
    pub time: f64,
    pub files: Vec<PathBuf>,
}

/// Written to `manifest.json` in the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: SimConfig,
    pub steps: usize,
    pub max_cfl: f64,
    pub dumps: Vec<DumpRecord>,
    pub trace: PathBuf,
}

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TRACE_FILE: &str = "trace.csv";

/// Node positions at one dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub head_x: f64,
    pub head_y: f64,
    pub centroid_x: f64,
    pub centroid_y: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub dumps: usize,
    pub wall_time: Duration,
    pub manifest: Manifest,
}

fn trace_row<T: Real>(sim: &Simulation<T>) -> TraceRow {
    let head = sim.positions[0];
    let c = sim.centroid();
    TraceRow {
        step: sim.step,
        time: sim.time().as_f64(),
        head_x: head.x.as_f64(),
        head_y: head.y.as_f64(),
        centroid_x: c.x.as_f64(),
        centroid_y: c.y.as_f64(),
    }
}

fn dump<T: Real>(sim: &Simulation<T>, dir: &Path, index: usize) -> Result<DumpRecord> {
    let vorticity = sim.solver.vorticity(&sim.fluid);
    let fields = DumpFields {
        grid: &sim.fluid.grid,
        u: &sim.fluid.u,
        v: &sim.fluid.v,
        p: &sim.fluid.p,
        vorticity: &vorticity,
        lagrangian: &sim.positions,
    };
    let files = write_fields_vtk(dir, &fields, index)?
        .into_iter()
        .map(|p| p.strip_prefix(dir).map(Path::to_path_buf).unwrap_or(p))
        .collect();
    Ok(DumpRecord {
        index,
        step: sim.step,
        time: sim.time().as_f64(),
        files,
    })
}

/// Runs `cfg` to completion, writing dumps, `trace.csv` and `manifest.json`
/// into `cfg.output_dir`.
pub fn run(cfg: &SimConfig) -> Result<RunSummary> {
    let start = Instant::now();
    let mut sim = build_simulation::<f64>(cfg)?;
    let dir = cfg.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    if dir.join(MANIFEST_FILE).exists() {
        return Err(Error::Config(format!(
            "{} already holds a run; choose a fresh output directory",
            dir.display()
        )));
    }
    let n_steps = cfg.n_steps();
    let mut dumps = vec![dump(&sim, &dir, 0)?];
    let mut trace = vec![trace_row(&sim)];
    let mut max_cfl = 0.0f64;
    while sim.step < n_steps {
        let report = sim.advance()?;
        max_cfl = max_cfl.max(report.cfl);
        if sim.step % cfg.print_dump == 0 || sim.step == n_steps {
            dumps.push(dump(&sim, &dir, dumps.len())?);
            trace.push(trace_row(&sim));
            log::info!("step {}/{} t = {:.6}", sim.step, n_steps, sim.time());
        }
    }

    let trace_path = dir.join(TRACE_FILE);
    let mut w = csv::Writer::from_path(&trace_path)?;
    for row in &trace {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(&trace_path, e))?;

    let manifest = Manifest {
        config: cfg.clone(),
        steps: n_steps,
        max_cfl,
        dumps,
        trace: PathBuf::from(TRACE_FILE),
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(RunSummary {
        output_dir: dir,
        steps: n_steps,
        dumps: manifest.dumps.len(),
        wall_time: start.elapsed(),
        manifest,
    })
}

pub fn read_manifest(run_dir: impl AsRef<Path>) -> Result<Manifest> {
    let path = run_dir.as_ref().join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_trace(run_dir: impl AsRef<Path>) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(run_dir.as_ref().join(TRACE_FILE))?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
