use ibfsi_core::engine::{read_manifest, read_trace, run, Simulation, Structure};
use ibfsi_core::fibers::{Target, TargetSet};
use ibfsi_core::fluid::FluidState;
use ibfsi_core::geometry::make_circle;
use ibfsi_core::scenario::preset;
use ibfsi_core::{Grid, ScenarioKind, SimConfig, Vec2};

fn quiet_circle(out: &std::path::Path) -> SimConfig {
    let mut cfg = preset(ScenarioKind::CircleCubic);
    cfg.t_final = 40.0 * cfg.dt;
    cfg.print_dump = 20;
    cfg.output_dir = out.to_path_buf();
    cfg
}

#[test]
fn fiberless_structure_in_fluid_at_rest_stays_put() {
    let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
    let fluid = FluidState::at_rest(grid, 1.0, 0.1).unwrap();
    let mesh = make_circle(Vec2::new(0.5, 0.5), 0.2, 40).unwrap();
    let start = mesh.points.clone();
    let mut sim = Simulation::new(fluid, Structure::passive(mesh), 1e-3).unwrap();
    for _ in 0..20 {
        sim.advance().unwrap();
    }
    assert_eq!(sim.positions, start);
    assert!(sim
        .fluid
        .u
        .iter()
        .chain(sim.fluid.v.iter())
        .all(|&x| x == 0.0));
}

#[test]
fn tethered_node_is_pulled_towards_its_target() {
    let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
    let fluid = FluidState::at_rest(grid, 1.0, 0.1).unwrap();
    let mesh = make_circle(Vec2::new(0.5, 0.5), 0.2, 40).unwrap();
    let node = mesh.points[0];
    let goal = Vec2::new(node.x + 0.02, node.y);
    let mut structure = Structure::passive(mesh);
    structure.targets = TargetSet {
        targets: vec![Target {
            node: 0,
            position: goal,
            stiffness: 1e3,
        }],
    };
    let mut sim = Simulation::new(fluid, structure, 1e-4).unwrap();
    let before = (sim.positions[0] - goal).norm();
    for _ in 0..50 {
        sim.advance().unwrap();
    }
    let after = (sim.positions[0] - goal).norm();
    assert!(after < before, "{after} !< {before}");
    assert!(sim.positions[0].x > node.x);
}

#[test]
fn zero_length_run_writes_only_the_initial_dump() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quiet_circle(dir.path());
    cfg.t_final = 0.0;
    let summary = run(&cfg).unwrap();
    assert_eq!(summary.steps, 0);
    assert_eq!(summary.dumps, 1);
    let manifest = read_manifest(dir.path()).unwrap();
    assert_eq!(manifest.dumps.len(), 1);
    for f in &manifest.dumps[0].files {
        assert!(dir.path().join(f).exists(), "{}", f.display());
    }
    assert_eq!(read_trace(dir.path()).unwrap().len(), 1);
}

#[test]
fn dumps_follow_cadence_and_include_final_step() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quiet_circle(dir.path());
    cfg.t_final = 45.0 * cfg.dt;
    run(&cfg).unwrap();
    let steps: Vec<usize> = read_manifest(dir.path())
        .unwrap()
        .dumps
        .iter()
        .map(|d| d.step)
        .collect();
    assert_eq!(steps, vec![0, 20, 40, 45]);
}

#[test]
fn refuses_to_reuse_an_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quiet_circle(dir.path());
    run(&cfg).unwrap();
    assert!(run(&cfg).is_err());
}

#[test]
fn identical_configs_give_identical_dumps() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = run(&quiet_circle(a.path())).unwrap().manifest;
    run(&quiet_circle(b.path())).unwrap();
    for d in &ma.dumps {
        for f in &d.files {
            let x = std::fs::read(a.path().join(f)).unwrap();
            let y = std::fs::read(b.path().join(f)).unwrap();
            assert!(x == y, "{} differs", f.display());
        }
    }
    assert_eq!(read_trace(a.path()).unwrap(), read_trace(b.path()).unwrap());
}

#[test]
fn single_precision_simulation_runs() {
    let mut cfg = preset(ScenarioKind::CircleCubic);
    cfg.t_final = 10.0 * cfg.dt;
    let mut sim = ibfsi_core::engine::build_simulation::<f32>(&cfg).unwrap();
    for _ in 0..10 {
        sim.advance().unwrap();
    }
    assert!(sim.positions.iter().all(|p| p.is_finite()));
}
