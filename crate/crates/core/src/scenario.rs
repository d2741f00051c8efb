//! Built-in scenario presets, parameter sweeps, and geometry decks.

use std::path::{Path, PathBuf};

use crate::config::{ProfileKind, ScenarioKind, SimConfig};
use crate::engine::{Drive, Structure};
use crate::fibers::{BeamSet, SpringSet, TargetSet};
use crate::geometry::{compute_curvatures, make_circle, make_heart, make_swimmer, LagrangianMesh};
use crate::io;
use crate::kinematics::{CubicInterpolant, Motion, Phase, PhaseSchedule, Profile, StateMatrix};
use crate::{Error, Real, Result, Vec2};

/// Circle centres as fractions of the domain: A, B, C.
pub const CIRCLE_CENTERS: [(f64, f64); 3] = [(0.35, 0.35), (0.65, 0.35), (0.65, 0.65)];

/// Default configuration of a scenario.
pub fn preset(kind: ScenarioKind) -> SimConfig {
    let circle = SimConfig {
        scenario: kind,
        nx: 32,
        ny: 32,
        lx: 1.0,
        ly: 1.0,
        rho: 1.0,
        mu: 1.0,
        dt: 2.5e-6,
        t_final: 0.02,
        print_dump: 200,
        profile: ProfileKind::Cubic,
        p1: 0.25,
        p2: 0.925,
        t1: 0.01,
        t_rest: 0.0,
        t2: 0.01,
        stroke_period: 2.0,
        upstroke_fraction: 0.5,
        k_targ: 1.0e8,
        k_spr: 0.0,
        k_beam: 0.0,
        size: 0.15,
        size_b: 0.0,
        n_points: 64,
        gap_fraction: 0.1,
        body_length: 0.0,
        ds: 0.0,
        geometry_dir: None,
        output_dir: PathBuf::from(kind.name()),
    };
    match kind {
        ScenarioKind::CircleLinear => SimConfig {
            profile: ProfileKind::Linear,
            ..circle
        },
        ScenarioKind::CircleCubic => circle,
        ScenarioKind::Heart => SimConfig {
            dt: 1e-5,
            t_final: 0.3,
            print_dump: 500,
            k_targ: 1.0e7,
            gap_fraction: 0.2,
            t1: 0.05,
            t_rest: 0.05,
            t2: 0.05,
            size: 0.5,
            size_b: 0.4,
            n_points: 96,
            ..circle
        },
        ScenarioKind::Swimmer => SimConfig {
            nx: 64,
            ny: 32,
            lx: 2.0,
            ly: 1.0,
            rho: 1000.0,
            mu: 10.0,
            dt: 1e-4,
            t_final: 6.0,
            print_dump: 2000,
            p1: 0.1,
            p2: 0.9,
            k_targ: 0.0,
            k_spr: 1.0e6,
            k_beam: 1.0e7,
            size: 0.0,
            n_points: 0,
            body_length: 0.5,
            ds: 1.0 / 64.0,
            ..circle
        },
    }
}

fn label(v: f64) -> String {
    format!("{v}")
}

/// Expands a named sweep into labelled configurations whose output
/// directories sit under `root`.
pub fn sweep(name: &str, root: &Path) -> Result<Vec<(String, SimConfig)>> {
    let base = preset(ScenarioKind::Swimmer);
    let points: Vec<(String, SimConfig)> = match name {
        "swimmer-case1" => [(0.1, 0.9), (0.2, 0.8), (0.3, 0.7), (0.4, 0.6)]
            .into_iter()
            .map(|(p1, p2)| {
                (
                    format!("p1_{}_p2_{}", label(p1), label(p2)),
                    SimConfig {
                        p1,
                        p2,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        "swimmer-case2" => [0.3, 0.5, 0.7, 0.9]
            .into_iter()
            .map(|p2| {
                (
                    format!("p1_0.1_p2_{}", label(p2)),
                    SimConfig {
                        p1: 0.1,
                        p2,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        "swimmer-case3" => [0.5, 0.429, 0.333, 0.2]
            .into_iter()
            .map(|ups| {
                (
                    format!("ups_{}", label(ups)),
                    SimConfig {
                        upstroke_fraction: ups,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        "swimmer-viscosity" => [0.05, 5.0, 10.0, 50.0, 500.0, 5000.0]
            .into_iter()
            .map(|mu| {
                (
                    format!("mu_{}", label(mu)),
                    SimConfig { mu, ..base.clone() },
                )
            })
            .collect(),
        other => {
            let kind: ScenarioKind = other.parse().map_err(|_| {
                Error::Config(format!(
                    "unknown sweep {other:?}; expected one of {}",
                    SWEEPS.join(", ")
                ))
            })?;
            vec![(kind.name().to_string(), preset(kind))]
        }
    };
    Ok(points
        .into_iter()
        .map(|(l, cfg)| {
            let output_dir = root.join(&l);
            (l, SimConfig { output_dir, ..cfg })
        })
        .collect())
}

pub const SWEEPS: [&str; 4] = [
    "swimmer-case1",
    "swimmer-case2",
    "swimmer-case3",
    "swimmer-viscosity",
];

fn profile<T: Real>(cfg: &SimConfig) -> Result<Profile<T>> {
    Ok(match cfg.profile {
        ProfileKind::Linear => Profile::Linear,
        ProfileKind::Cubic => {
            Profile::Cubic(CubicInterpolant::solve(T::lit(cfg.p1), T::lit(cfg.p2))?)
        }
    })
}

/// Phase schedule implied by the scenario parameters.
pub fn schedule<T: Real>(cfg: &SimConfig) -> Result<PhaseSchedule<T>> {
    let prof = profile(cfg)?;
    match cfg.scenario {
        ScenarioKind::CircleLinear | ScenarioKind::CircleCubic => {
            let blend = |from, duration: f64| Phase {
                duration: T::lit(duration),
                motion: Motion::Blend {
                    from,
                    to: from + 1,
                    profile: prof,
                },
            };
            PhaseSchedule::new(vec![
                blend(0, cfg.t1),
                Phase {
                    duration: T::lit(cfg.t_rest),
                    motion: Motion::Rest,
                },
                blend(1, cfg.t2),
            ])
        }
        ScenarioKind::Heart => {
            PhaseSchedule::there_and_back(T::lit(cfg.t1), T::lit(cfg.t_rest), T::lit(cfg.t2), prof)
        }
        ScenarioKind::Swimmer => PhaseSchedule::stroke(
            T::lit(cfg.stroke_period),
            T::lit(cfg.upstroke_fraction),
            prof,
        ),
    }
}

/// Points and keyframes of a scenario before fibers are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry<T> {
    pub initial: Vec<Vec2<T>>,
    /// Keyframe shapes (circle A/B/C, heart A/B, swimmer phase 1/2).
    pub states: Vec<StateMatrix<T>>,
    pub closed: bool,
}

/// Mesh whose nominal spacing is the mean edge length, so generated and
/// reloaded geometry agree bit for bit.
fn mesh_from_points<T: Real>(points: Vec<Vec2<T>>, closed: bool) -> LagrangianMesh<T> {
    let mut mesh = LagrangianMesh {
        points,
        ds: T::zero(),
        closed,
    };
    let sp = mesh.spacings();
    mesh.ds = sp.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(sp.len().max(1));
    mesh
}

pub fn generate_geometry<T: Real>(cfg: &SimConfig) -> Result<Geometry<T>> {
    let (lx, ly) = (T::lit(cfg.lx), T::lit(cfg.ly));
    match cfg.scenario {
        ScenarioKind::CircleLinear | ScenarioKind::CircleCubic => {
            let states = CIRCLE_CENTERS
                .iter()
                .map(|&(fx, fy)| {
                    let c = Vec2::new(lx * T::lit(fx), ly * T::lit(fy));
                    make_circle(c, T::lit(cfg.size), cfg.n_points).map(|m| m.state())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Geometry {
                initial: states[0].0.clone(),
                states,
                closed: true,
            })
        }
        ScenarioKind::Heart => {
            let c = Vec2::new(lx * T::half(), ly * T::half());
            let gap = T::lit(cfg.gap_fraction);
            let a = make_heart(c, T::lit(cfg.size), cfg.n_points, gap)?;
            let b = make_heart(c, T::lit(cfg.size_b), cfg.n_points, gap)?;
            Ok(Geometry {
                initial: a.points.clone(),
                states: vec![a.state(), b.state()],
                closed: false,
            })
        }
        ScenarioKind::Swimmer => {
            let l = T::lit(cfg.body_length);
            let s = make_swimmer(l, T::lit(cfg.ds))?;
            // centre the body in the domain; head points toward +x
            let shift = Vec2::new(lx * T::half() + l * T::half(), ly * T::half());
            let p1 = s.phase1.translated(shift);
            let p2 = s.phase2.translated(shift);
            Ok(Geometry {
                initial: p1.points.clone(),
                states: vec![p1.state(), p2.state()],
                closed: false,
            })
        }
    }
}

/// Attaches fibers and the spline drive to a geometry.
pub fn assemble_structure<T: Real>(cfg: &SimConfig, geom: Geometry<T>) -> Result<Structure<T>> {
    let schedule = schedule::<T>(cfg)?;
    let mesh = mesh_from_points(geom.initial, geom.closed);
    let mut s = Structure::passive(mesh);
    match cfg.scenario {
        ScenarioKind::Swimmer => {
            let curv = geom
                .states
                .iter()
                .map(|st| compute_curvatures(st.rows()))
                .collect::<Result<Vec<_>>>()?;
            s.springs = SpringSet::chain(&s.mesh.points, T::lit(cfg.k_spr));
            s.beams = BeamSet::chain(s.mesh.len(), T::lit(cfg.k_beam), &curv[0])?;
            s.drive = Drive::Curvatures {
                schedule,
                states: curv,
            };
        }
        _ => {
            s.targets = TargetSet::all_nodes(&s.mesh.points, T::lit(cfg.k_targ));
            s.drive = Drive::Targets {
                schedule,
                states: geom.states,
            };
        }
    }
    s.validate()?;
    Ok(s)
}

/// Structure for `cfg`, read from its deck directory when one is set.
pub fn build_structure<T: Real>(cfg: &SimConfig) -> Result<Structure<T>> {
    match &cfg.geometry_dir {
        Some(dir) => load_decks(cfg, dir),
        None => assemble_structure(cfg, generate_geometry(cfg)?),
    }
}

fn state_names(kind: ScenarioKind) -> &'static [&'static str] {
    match kind {
        ScenarioKind::CircleLinear | ScenarioKind::CircleCubic => {
            &["State_A", "State_B", "State_C"]
        }
        ScenarioKind::Heart => &["State_A", "State_B"],
        ScenarioKind::Swimmer => &["Phase1", "Phase2"],
    }
}

fn deck_stem(kind: ScenarioKind) -> &'static str {
    match kind {
        ScenarioKind::CircleLinear | ScenarioKind::CircleCubic => "circle",
        ScenarioKind::Heart => "heart",
        ScenarioKind::Swimmer => "swimmer",
    }
}

/// Writes the decks for `cfg` plus a config file that points at them.
/// Returns the written paths, config last.
pub fn write_decks(cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let geom = generate_geometry::<f64>(cfg)?;
    let structure = assemble_structure(cfg, geom.clone())?;
    let stem = deck_stem(cfg.scenario);
    let mut out = Vec::new();
    let mut put = |ext: &str| {
        let p = dir.join(format!("{stem}.{ext}"));
        out.push(p.clone());
        p
    };
    io::write_vertex(put("vertex"), &structure.mesh.points)?;
    if !structure.targets.is_empty() {
        io::write_targets(put("target"), &structure.targets)?;
    }
    if !structure.springs.springs.is_empty() {
        io::write_springs(put("spring"), &structure.springs)?;
    }
    if !structure.beams.beams.is_empty() {
        io::write_beams(put("beam"), &structure.beams)?;
    }
    for (name, st) in state_names(cfg.scenario).iter().zip(&geom.states) {
        let p = dir.join(format!("{name}.pts"));
        io::write_vertex(&p, st.rows())?;
        out.push(p);
    }
    let deck_cfg = SimConfig {
        geometry_dir: Some(PathBuf::from(".")),
        ..cfg.clone()
    };
    let p = dir.join(format!("{}.cfg", cfg.scenario));
    std::fs::write(&p, deck_cfg.to_text()).map_err(|e| Error::io(&p, e))?;
    out.push(p);
    Ok(out)
}

fn load_decks<T: Real>(cfg: &SimConfig, dir: &Path) -> Result<Structure<T>> {
    let stem = deck_stem(cfg.scenario);
    let vertices: Vec<Vec2<T>> = io::read_vertex(dir.join(format!("{stem}.vertex")))?;
    let states = state_names(cfg.scenario)
        .iter()
        .map(|name| io::read_points(dir.join(format!("{name}.pts"))).map(StateMatrix::new))
        .collect::<Result<Vec<_>>>()?;
    let geom = Geometry {
        initial: vertices,
        states,
        closed: cfg.scenario.is_circle(),
    };
    let mut s = assemble_structure(cfg, geom)?;
    // stiffnesses and connectivity come from the decks when present
    let target = dir.join(format!("{stem}.target"));
    if target.exists() {
        s.targets = io::read_targets(&target, &s.mesh.points)?;
    }
    let spring = dir.join(format!("{stem}.spring"));
    if spring.exists() {
        s.springs = io::read_springs(&spring)?;
    }
    let beam = dir.join(format!("{stem}.beam"));
    if beam.exists() {
        s.beams = io::read_beams(&beam)?;
    }
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for kind in ScenarioKind::ALL {
            preset(kind).validate().unwrap();
            let s = build_structure::<f64>(&preset(kind)).unwrap();
            assert!(s.mesh.len() > 3);
        }
    }

    #[test]
    fn sweeps_expand() {
        let root = Path::new("out");
        let c1 = sweep("swimmer-case1", root).unwrap();
        assert_eq!(c1.len(), 4);
        assert_eq!((c1[3].1.p1, c1[3].1.p2), (0.4, 0.6));
        assert_eq!(c1[0].1.output_dir, root.join("p1_0.1_p2_0.9"));
        assert_eq!(sweep("swimmer-case2", root).unwrap().len(), 4);
        let c3 = sweep("swimmer-case3", root).unwrap();
        assert_eq!(c3[1].1.upstroke_fraction, 0.429);
        let mu: Vec<f64> = sweep("swimmer-viscosity", root)
            .unwrap()
            .iter()
            .map(|(_, c)| c.mu)
            .collect();
        assert_eq!(mu, [0.05, 5.0, 10.0, 50.0, 500.0, 5000.0]);
        assert!(sweep("nope", root).is_err());
    }

    #[test]
    fn decks_reload_identically() {
        for kind in ScenarioKind::ALL {
            let dir = tempfile::tempdir().unwrap();
            let cfg = preset(kind);
            let files = write_decks(&cfg, dir.path()).unwrap();
            let loaded = crate::config::load_config(files.last().unwrap()).unwrap();
            assert_eq!(
                loaded.geometry_dir.as_deref(),
                Some(dir.path().join(".").as_path())
            );
            let a = build_structure::<f64>(&cfg).unwrap();
            let b = build_structure::<f64>(&loaded).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn swimmer_drive_hits_curvature_states_at_stroke_ends() {
        let cfg = preset(ScenarioKind::Swimmer);
        let s = build_structure::<f64>(&cfg).unwrap();
        let Drive::Curvatures { schedule, states } = &s.drive else {
            panic!("swimmer is curvature driven");
        };
        let down = cfg.stroke_period * (1.0 - cfg.upstroke_fraction);
        assert_eq!(&schedule.sample(states, 0.0).unwrap(), &states[0]);
        assert_eq!(&schedule.sample(states, down).unwrap(), &states[1]);
        assert_eq!(
            &schedule.sample(states, cfg.stroke_period).unwrap(),
            &states[0]
        );
    }
}
