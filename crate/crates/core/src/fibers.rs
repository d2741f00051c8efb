//! Lagrangian force laws: target tethers, linear springs and non-invariant
//! beams, plus the schedule-driven updates of their reference data.
//!
//! All returned forces are per-node force densities (force per unit length);
//! the coupling layer multiplies by `ds` when spreading.

use crate::kinematics::{PhaseSchedule, StateMatrix};
use crate::{Error, Real, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target<T> {
    pub node: usize,
    /// Prescribed position `Y`.
    pub position: Vec2<T>,
    pub stiffness: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetSet<T> {
    pub targets: Vec<Target<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spring<T> {
    pub master: usize,
    pub slave: usize,
    pub stiffness: T,
    pub rest_length: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpringSet<T> {
    pub springs: Vec<Spring<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beam<T> {
    /// Consecutive nodes `(s, s+1, s+2)`.
    pub nodes: [usize; 3],
    pub stiffness: T,
    /// Preferred second difference `(C_x, C_y)`.
    pub curvature: Vec2<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BeamSet<T> {
    pub beams: Vec<Beam<T>>,
}

fn check_index(index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, len })
    }
}

fn positive<T: Real>(v: T, what: &str) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{what} must be positive, got {v}"
        )))
    }
}

impl<T: Real> TargetSet<T> {
    /// Tethers every node to its current position.
    pub fn all_nodes(points: &[Vec2<T>], stiffness: T) -> Self {
        Self {
            targets: points
                .iter()
                .enumerate()
                .map(|(node, &position)| Target {
                    node,
                    position,
                    stiffness,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        for t in &self.targets {
            check_index(t.node, n_nodes)?;
            positive(t.stiffness, "target stiffness")?;
        }
        Ok(())
    }

    pub fn positions(&self) -> StateMatrix<T> {
        StateMatrix::new(self.targets.iter().map(|t| t.position).collect())
    }
}

impl<T: Real> SpringSet<T> {
    /// Springs between consecutive nodes with rest length equal to the
    /// current separation.
    pub fn chain(points: &[Vec2<T>], stiffness: T) -> Self {
        Self {
            springs: points
                .windows(2)
                .enumerate()
                .map(|(i, w)| Spring {
                    master: i,
                    slave: i + 1,
                    stiffness,
                    rest_length: (w[1] - w[0]).norm(),
                })
                .collect(),
        }
    }

    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        for s in &self.springs {
            check_index(s.master, n_nodes)?;
            check_index(s.slave, n_nodes)?;
            if s.master == s.slave {
                return Err(Error::InvalidArgument(format!(
                    "spring attaches node {} to itself",
                    s.master
                )));
            }
            positive(s.stiffness, "spring stiffness")?;
            if !(s.rest_length >= T::zero()) {
                return Err(Error::InvalidArgument(format!(
                    "negative spring rest length {}",
                    s.rest_length
                )));
            }
        }
        Ok(())
    }
}

impl<T: Real> BeamSet<T> {
    /// Beams on every consecutive triple, preferring the given curvatures
    /// (one entry per triple).
    pub fn chain(n_nodes: usize, stiffness: T, curvatures: &StateMatrix<T>) -> Result<Self> {
        let expected = n_nodes.saturating_sub(2);
        if curvatures.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: curvatures.len(),
            });
        }
        Ok(Self {
            beams: curvatures
                .rows()
                .iter()
                .enumerate()
                .map(|(s, &curvature)| Beam {
                    nodes: [s, s + 1, s + 2],
                    stiffness,
                    curvature,
                })
                .collect(),
        })
    }

    pub fn validate(&self, n_nodes: usize) -> Result<()> {
        for b in &self.beams {
            for &i in &b.nodes {
                check_index(i, n_nodes)?;
            }
            if b.nodes[1] != b.nodes[0] + 1 || b.nodes[2] != b.nodes[1] + 1 {
                return Err(Error::InvalidArgument(format!(
                    "beam nodes {:?} are not consecutive",
                    b.nodes
                )));
            }
            positive(b.stiffness, "beam stiffness")?;
        }
        Ok(())
    }

    pub fn curvatures(&self) -> StateMatrix<T> {
        StateMatrix::new(self.beams.iter().map(|b| b.curvature).collect())
    }
}

/// `f = k_targ (Y − X)` on tethered nodes, zero elsewhere.
pub fn target_force<T: Real>(x: &[Vec2<T>], set: &TargetSet<T>) -> Result<Vec<Vec2<T>>> {
    let mut f = vec![Vec2::zero(); x.len()];
    add_target_force(x, set, &mut f)?;
    Ok(f)
}

pub(crate) fn add_target_force<T: Real>(
    x: &[Vec2<T>],
    set: &TargetSet<T>,
    f: &mut [Vec2<T>],
) -> Result<()> {
    for t in &set.targets {
        check_index(t.node, x.len())?;
        f[t.node] += (t.position - x[t.node]) * t.stiffness;
    }
    Ok(())
}

/// Linear springs; master receives `−k (1 − R/‖X_S − X_M‖)(X_M − X_S)`.
pub fn spring_force<T: Real>(x: &[Vec2<T>], set: &SpringSet<T>) -> Result<Vec<Vec2<T>>> {
    let mut f = vec![Vec2::zero(); x.len()];
    add_spring_force(x, set, &mut f)?;
    Ok(f)
}

pub(crate) fn add_spring_force<T: Real>(
    x: &[Vec2<T>],
    set: &SpringSet<T>,
    f: &mut [Vec2<T>],
) -> Result<()> {
    for (i, s) in set.springs.iter().enumerate() {
        check_index(s.master, x.len())?;
        check_index(s.slave, x.len())?;
        let d = x[s.master] - x[s.slave];
        let len = d.norm();
        if !(len > T::zero()) {
            return Err(Error::DegenerateSpring { spring: i });
        }
        let on_master = d * (-s.stiffness * (T::one() - s.rest_length / len));
        f[s.master] += on_master;
        f[s.slave] -= on_master;
    }
    Ok(())
}

/// Bending energy `½ k ‖X(s) − 2X(s+1) + X(s+2) − C‖²` summed over beams.
pub fn beam_energy<T: Real>(x: &[Vec2<T>], set: &BeamSet<T>) -> Result<T> {
    let mut e = T::zero();
    for b in &set.beams {
        for &i in &b.nodes {
            check_index(i, x.len())?;
        }
        let [i, j, k] = b.nodes;
        let r = x[i] - x[j] * T::two() + x[k] - b.curvature;
        e += T::half() * b.stiffness * r.dot(r);
    }
    Ok(e)
}

/// Negative gradient of [`beam_energy`]: `(−1, +2, −1) · k (D − C)`.
pub fn beam_force<T: Real>(x: &[Vec2<T>], set: &BeamSet<T>) -> Result<Vec<Vec2<T>>> {
    let mut f = vec![Vec2::zero(); x.len()];
    add_beam_force(x, set, &mut f)?;
    Ok(f)
}

pub(crate) fn add_beam_force<T: Real>(
    x: &[Vec2<T>],
    set: &BeamSet<T>,
    f: &mut [Vec2<T>],
) -> Result<()> {
    for b in &set.beams {
        for &i in &b.nodes {
            check_index(i, x.len())?;
        }
        let [i, j, k] = b.nodes;
        let r = (x[i] - x[j] * T::two() + x[k] - b.curvature) * b.stiffness;
        f[i] -= r;
        f[j] += r * T::two();
        f[k] -= r;
    }
    Ok(())
}

/// Moves target positions to the scheduled blend of `states` at time `t`.
/// Row `i` of each state belongs to target `i`.
pub fn update_target_positions<T: Real>(
    set: &mut TargetSet<T>,
    schedule: &PhaseSchedule<T>,
    states: &[StateMatrix<T>],
    t: T,
) -> Result<()> {
    let y = schedule.sample(states, t)?;
    if y.len() != set.targets.len() {
        return Err(Error::ShapeMismatch {
            expected: set.targets.len(),
            found: y.len(),
        });
    }
    for (target, &p) in set.targets.iter_mut().zip(y.rows()) {
        target.position = p;
    }
    Ok(())
}

/// Moves preferred curvatures to the scheduled blend of curvature states.
/// Row `i` of each state belongs to beam `i`.
pub fn update_beam_curvatures<T: Real>(
    set: &mut BeamSet<T>,
    schedule: &PhaseSchedule<T>,
    curvature_states: &[StateMatrix<T>],
    t: T,
) -> Result<()> {
    let c = schedule.sample(curvature_states, t)?;
    if c.len() != set.beams.len() {
        return Err(Error::ShapeMismatch {
            expected: set.beams.len(),
            found: c.len(),
        });
    }
    for (beam, &cv) in set.beams.iter_mut().zip(c.rows()) {
        beam.curvature = cv;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{CubicInterpolant, Profile};

    fn v(x: f64, y: f64) -> Vec2<f64> {
        Vec2::new(x, y)
    }

    #[test]
    fn target_examples() {
        let x = vec![v(0.0, 0.0), v(1.0, 1.0)];
        let mut set = TargetSet::all_nodes(&x, 1e5);
        assert!(target_force(&x, &set)
            .unwrap()
            .iter()
            .all(|f| *f == v(0.0, 0.0)));
        set.targets[0].position = v(0.01, 0.0);
        let f = target_force(&x, &set).unwrap();
        assert!((f[0].x - 1000.0).abs() < 1e-9 && f[0].y == 0.0);
        assert_eq!(f[1], v(0.0, 0.0));
        for t in &mut set.targets {
            t.stiffness *= 2.0;
        }
        let f2 = target_force(&x, &set).unwrap();
        assert_eq!(f2[0], f[0] * 2.0);
        set.targets[1].node = 7;
        assert!(matches!(
            target_force(&x, &set),
            Err(Error::IndexOutOfRange { index: 7, len: 2 })
        ));
    }

    #[test]
    fn spring_examples() {
        let x = vec![v(0.0, 0.0), v(1.0, 0.0)];
        let rest = SpringSet {
            springs: vec![Spring {
                master: 0,
                slave: 1,
                stiffness: 2.0,
                rest_length: 1.0,
            }],
        };
        assert!(spring_force(&x, &rest)
            .unwrap()
            .iter()
            .all(|f| f.norm() == 0.0));

        let hooke = SpringSet {
            springs: vec![Spring {
                master: 0,
                slave: 1,
                stiffness: 2.0,
                rest_length: 0.0,
            }],
        };
        let f = spring_force(&x, &hooke).unwrap();
        assert_eq!(f[0], v(2.0, 0.0));
        assert_eq!(f[1], v(-2.0, 0.0));

        let coincident = vec![v(0.5, 0.5), v(0.5, 0.5)];
        assert!(matches!(
            spring_force(&coincident, &hooke),
            Err(Error::DegenerateSpring { spring: 0 })
        ));
    }

    #[test]
    fn beam_at_preferred_curvature_is_unloaded() {
        let x = vec![v(0.0, 0.0), v(1.0, 0.2), v(2.0, 1.0)];
        let c = crate::geometry::compute_curvatures(&x).unwrap();
        let set = BeamSet::chain(3, 5.0, &c).unwrap();
        for f in beam_force(&x, &set).unwrap() {
            assert!(f.norm() < 1e-15);
        }
    }

    #[test]
    fn straight_beam_is_torque_free() {
        // With C = 0 the forces are parallel to D, so the moment vanishes.
        let x = vec![v(0.0, 0.0), v(1.0, 0.3), v(1.7, -0.2)];
        let set = BeamSet::chain(3, 3.0, &StateMatrix::new(vec![v(0.0, 0.0)])).unwrap();
        let f = beam_force(&x, &set).unwrap();
        let sum = f[0] + f[1] + f[2];
        assert!(sum.norm() < 1e-14);
        let torque = (x[0] - x[1]).cross(f[0]) + (x[2] - x[1]).cross(f[2]);
        assert!(torque.abs() < 1e-14);
    }

    #[test]
    fn validation_errors() {
        let bad_beam = BeamSet {
            beams: vec![Beam {
                nodes: [0, 2, 3],
                stiffness: 1.0,
                curvature: v(0.0, 0.0),
            }],
        };
        assert!(bad_beam.validate(4).is_err());
        let self_spring = SpringSet {
            springs: vec![Spring {
                master: 1,
                slave: 1,
                stiffness: 1.0,
                rest_length: 0.0,
            }],
        };
        assert!(self_spring.validate(2).is_err());
        let soft = TargetSet {
            targets: vec![Target {
                node: 0,
                position: v(0.0, 0.0),
                stiffness: 0.0,
            }],
        };
        assert!(soft.validate(1).is_err());
        assert!(BeamSet::chain(4, 1.0, &StateMatrix::new(vec![v(0.0, 0.0)])).is_err());
    }

    #[test]
    fn target_update_follows_schedule() {
        let a = StateMatrix::new(vec![v(0.0, 0.0), v(1.0, 0.0)]);
        let b = StateMatrix::new(vec![v(0.5, 0.5), v(1.5, 0.5)]);
        let cubic = Profile::Cubic(CubicInterpolant::solve(0.25, 0.925).unwrap());
        let (t1, tr, t2) = (0.01, 0.005, 0.01);
        let sched = PhaseSchedule::there_and_back(t1, tr, t2, cubic).unwrap();
        let states = [a.clone(), b.clone()];
        let mut set = TargetSet::all_nodes(a.rows(), 1.0);

        update_target_positions(&mut set, &sched, &states, 0.0).unwrap();
        assert_eq!(set.positions(), a);
        update_target_positions(&mut set, &sched, &states, t1).unwrap();
        assert_eq!(set.positions(), b);
        update_target_positions(&mut set, &sched, &states, t1 + tr / 2.0).unwrap();
        assert_eq!(set.positions(), b);

        let wrong = [a.clone(), StateMatrix::new(vec![v(0.0, 0.0)])];
        assert!(update_target_positions(&mut set, &sched, &wrong, 0.002).is_err());
    }

    #[test]
    fn curvature_update_stroke_endpoints() {
        let c1 = StateMatrix::new(vec![v(0.0, 0.1), v(0.0, 0.2)]);
        let c2 = StateMatrix::new(vec![v(0.0, -0.1), v(0.0, -0.2)]);
        let cubic = Profile::Cubic(CubicInterpolant::solve(0.1, 0.9).unwrap());
        let period = 2.0;
        let sched = PhaseSchedule::stroke(period, 0.2, cubic).unwrap();
        let mut beams = BeamSet::chain(4, 1.0, &c1).unwrap();
        let states = [c1.clone(), c2.clone()];

        update_beam_curvatures(&mut beams, &sched, &states, 0.0).unwrap();
        assert_eq!(beams.curvatures(), c1);
        // downstroke is 80% of the period
        let loc = sched.locate(0.8 * period - 1e-12).unwrap();
        assert_eq!(loc.index, 0);
        assert!((loc.t_norm - 1.0).abs() < 1e-9);
        update_beam_curvatures(&mut beams, &sched, &states, 0.8 * period).unwrap();
        assert_eq!(beams.curvatures(), c2);
        update_beam_curvatures(&mut beams, &sched, &states, period).unwrap();
        assert_eq!(beams.curvatures(), c1);
    }
}
