//! Blending profiles that drive prescribed motion and material-state changes.
//!
//! A blend moves a whole point set from one state to another,
//! `h(t) = A + w(t)·(B − A)`, where the weight `w` is either the normalized
//! time itself (linear) or a piecewise cubic `g(t)` on `[0, 1]` with two
//! mediary knots `p1 < p2`. The cubic is pinned to `g(0) = 0`, `g(1) = 1`,
//! has zero slope and zero curvature at both ends, and is C² across the knots.

use serde::{Deserialize, Serialize};

use crate::linalg::solve_in_place;
use crate::{Error, Real, Result, Vec2};

/// Piecewise cubic blending function with interior knots `p1 < p2`.
///
/// Segment coefficients are in the global monomial basis:
/// `g0(t) = a0 + a1 t + a2 t² + a3 t³` on `[0, p1]`, `b` on `[p1, p2]`,
/// `c` on `[p2, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicInterpolant<T> {
    p1: T,
    p2: T,
    a: [T; 4],
    b: [T; 4],
    c: [T; 4],
}

fn value_basis<T: Real>(t: T) -> [T; 4] {
    [T::one(), t, t * t, t * t * t]
}

fn slope_basis<T: Real>(t: T) -> [T; 4] {
    [T::zero(), T::one(), T::two() * t, T::lit(3.0) * t * t]
}

fn curvature_basis<T: Real>(t: T) -> [T; 4] {
    [T::zero(), T::zero(), T::two(), T::lit(6.0) * t]
}

/// Which of the three cubic pieces to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    First,
    Middle,
    Last,
}

impl Segment {
    fn offset(self) -> usize {
        match self {
            Segment::First => 0,
            Segment::Middle => 4,
            Segment::Last => 8,
        }
    }
}

/// Assembles the 12 constraint equations (rows) and right-hand side.
///
/// Row order: value, slope, curvature at `t = 0`; value, slope, curvature
/// matching at `p1`; the same at `p2`; value, slope, curvature at `t = 1`.
pub fn constraint_system<T: Real>(p1: T, p2: T) -> ([[T; 12]; 12], [T; 12]) {
    type Basis<T> = fn(T) -> [T; 4];
    let bases: [Basis<T>; 3] = [value_basis, slope_basis, curvature_basis];
    let mut m = [[T::zero(); 12]; 12];
    let mut rhs = [T::zero(); 12];

    let put = |row: &mut [T; 12], seg: Segment, basis: [T; 4], sign: T| {
        for (k, v) in basis.into_iter().enumerate() {
            row[seg.offset() + k] += sign * v;
        }
    };

    for (d, basis) in bases.iter().enumerate() {
        put(&mut m[d], Segment::First, basis(T::zero()), T::one());
        put(&mut m[3 + d], Segment::First, basis(p1), T::one());
        put(&mut m[3 + d], Segment::Middle, basis(p1), -T::one());
        put(&mut m[6 + d], Segment::Middle, basis(p2), T::one());
        put(&mut m[6 + d], Segment::Last, basis(p2), -T::one());
        put(&mut m[9 + d], Segment::Last, basis(T::one()), T::one());
    }
    rhs[9] = T::one();
    (m, rhs)
}

impl<T: Real> CubicInterpolant<T> {
    /// Solves the constraint system for the given mediary points.
    pub fn solve(p1: T, p2: T) -> Result<Self> {
        if !(p1 > T::zero() && p2 > p1 && p2 < T::one()) {
            return Err(Error::InvalidMediaryPoints {
                p1: p1.as_f64(),
                p2: p2.as_f64(),
            });
        }
        let (mut m, mut rhs) = constraint_system(p1, p2);
        let x = solve_in_place(&mut m, &mut rhs)?;
        Ok(Self {
            p1,
            p2,
            a: [x[0], x[1], x[2], x[3]],
            b: [x[4], x[5], x[6], x[7]],
            c: [x[8], x[9], x[10], x[11]],
        })
    }

    pub fn p1(&self) -> T {
        self.p1
    }

    pub fn p2(&self) -> T {
        self.p2
    }

    /// `[a0..a3, b0..b3, c0..c3]`.
    pub fn coefficients(&self) -> [T; 12] {
        let mut out = [T::zero(); 12];
        out[..4].copy_from_slice(&self.a);
        out[4..8].copy_from_slice(&self.b);
        out[8..].copy_from_slice(&self.c);
        out
    }

    pub fn segment_coefficients(&self, seg: Segment) -> [T; 4] {
        match seg {
            Segment::First => self.a,
            Segment::Middle => self.b,
            Segment::Last => self.c,
        }
    }

    /// Segment that owns `t`; knots belong to the later segment.
    pub fn segment_of(&self, t: T) -> Segment {
        if t < self.p1 {
            Segment::First
        } else if t < self.p2 {
            Segment::Middle
        } else {
            Segment::Last
        }
    }

    /// `(g, g', g'')` of one cubic piece, without range checks.
    pub fn eval_segment(&self, seg: Segment, t: T) -> (T, T, T) {
        let k = self.segment_coefficients(seg);
        let three = T::lit(3.0);
        let g = k[0] + t * (k[1] + t * (k[2] + t * k[3]));
        let dg = k[1] + t * (T::two() * k[2] + three * t * k[3]);
        let ddg = T::two() * k[2] + T::lit(6.0) * t * k[3];
        (g, dg, ddg)
    }

    pub fn eval(&self, t: T) -> Result<T> {
        self.eval_derivs(t).map(|(g, _, _)| g)
    }

    pub fn eval_derivs(&self, t: T) -> Result<(T, T, T)> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::TimeOutOfRange(t.as_f64()));
        }
        Ok(self.eval_segment(self.segment_of(t), t))
    }

    /// Left-hand side minus right-hand side of every constraint equation,
    /// evaluated from the stored coefficients.
    pub fn constraint_residuals(&self) -> [T; 12] {
        let (m, rhs) = constraint_system(self.p1, self.p2);
        let x = self.coefficients();
        let mut out = [T::zero(); 12];
        for (r, row) in m.iter().enumerate() {
            let lhs = row
                .iter()
                .zip(x.iter())
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            out[r] = lhs - rhs[r];
        }
        out
    }
}

/// Time profile of a single blend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile<T> {
    Linear,
    Cubic(CubicInterpolant<T>),
}

impl<T: Real> Profile<T> {
    /// Blend weight for normalized time `t ∈ [0, 1]`.
    pub fn weight(&self, t: T) -> Result<T> {
        match self {
            Profile::Linear => {
                if t >= T::zero() && t <= T::one() {
                    Ok(t)
                } else {
                    Err(Error::TimeOutOfRange(t.as_f64()))
                }
            }
            Profile::Cubic(c) => c.eval(t),
        }
    }
}

/// An `N × 2` array of planar points (or of curvature pairs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateMatrix<T>(pub Vec<Vec2<T>>);

impl<T: Real> StateMatrix<T> {
    pub fn new(rows: Vec<Vec2<T>>) -> Self {
        Self(rows)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rows(&self) -> &[Vec2<T>] {
        &self.0
    }

    pub fn centroid(&self) -> Vec2<T> {
        let n = T::from_usize_lossy(self.0.len().max(1));
        self.0.iter().fold(Vec2::zero(), |acc, &p| acc + p) * (T::one() / n)
    }

    pub fn translated(&self, by: Vec2<T>) -> Self {
        Self(self.0.iter().map(|&p| p + by).collect())
    }
}

impl<T> From<Vec<Vec2<T>>> for StateMatrix<T> {
    fn from(v: Vec<Vec2<T>>) -> Self {
        Self(v)
    }
}

/// Row-wise `A + w·(B − A)`.
pub fn blend_states<T: Real>(
    a: &StateMatrix<T>,
    b: &StateMatrix<T>,
    w: T,
) -> Result<StateMatrix<T>> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    // cubic weights can leave [0, 1] by round-off near the knots
    if !w.is_finite() {
        return Err(Error::NonFinite("blend weight"));
    }
    Ok(StateMatrix(
        a.0.iter()
            .zip(b.0.iter())
            .map(|(&pa, &pb)| pa + (pb - pa) * w)
            .collect(),
    ))
}

/// What happens during one phase. State indices refer to the caller's list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Motion<T> {
    Blend {
        from: usize,
        to: usize,
        profile: Profile<T>,
    },
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase<T> {
    pub duration: T,
    pub motion: Motion<T>,
}

/// Result of [`PhaseSchedule::locate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLocation<T> {
    pub index: usize,
    /// Time normalized by the phase duration; rest phases report 1.
    pub t_norm: T,
    pub resting: bool,
}

/// Ordered phases repeated with period equal to the sum of durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule<T> {
    phases: Vec<Phase<T>>,
}

impl<T: Real> PhaseSchedule<T> {
    pub fn new(phases: Vec<Phase<T>>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("empty phase schedule".into()));
        }
        for (i, p) in phases.iter().enumerate() {
            let ok = match p.motion {
                Motion::Blend { .. } => p.duration > T::zero(),
                Motion::Rest => p.duration >= T::zero(),
            };
            if !ok || !p.duration.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "phase {i} has invalid duration {}",
                    p.duration
                )));
            }
        }
        if !phases
            .iter()
            .any(|p| matches!(p.motion, Motion::Blend { .. }))
        {
            return Err(Error::InvalidArgument(
                "schedule needs at least one blend phase".into(),
            ));
        }
        Ok(Self { phases })
    }

    /// A → B → C → … with one blend per consecutive pair of states.
    pub fn sequence(durations: &[T], profile: Profile<T>) -> Result<Self> {
        Self::new(
            durations
                .iter()
                .enumerate()
                .map(|(i, &duration)| Phase {
                    duration,
                    motion: Motion::Blend {
                        from: i,
                        to: i + 1,
                        profile,
                    },
                })
                .collect(),
        )
    }

    /// A → B, rest, B → A.
    pub fn there_and_back(forward: T, rest: T, back: T, profile: Profile<T>) -> Result<Self> {
        Self::new(vec![
            Phase {
                duration: forward,
                motion: Motion::Blend {
                    from: 0,
                    to: 1,
                    profile,
                },
            },
            Phase {
                duration: rest,
                motion: Motion::Rest,
            },
            Phase {
                duration: back,
                motion: Motion::Blend {
                    from: 1,
                    to: 0,
                    profile,
                },
            },
        ])
    }

    /// One swimming stroke: downstroke (state 0 → 1) then upstroke (1 → 0).
    /// `upstroke_fraction` is the share of `period` spent on the upstroke.
    pub fn stroke(period: T, upstroke_fraction: T, profile: Profile<T>) -> Result<Self> {
        if !(upstroke_fraction > T::zero() && upstroke_fraction < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "upstroke fraction {upstroke_fraction} outside (0, 1)"
            )));
        }
        let up = period * upstroke_fraction;
        Self::new(vec![
            Phase {
                duration: period - up,
                motion: Motion::Blend {
                    from: 0,
                    to: 1,
                    profile,
                },
            },
            Phase {
                duration: up,
                motion: Motion::Blend {
                    from: 1,
                    to: 0,
                    profile,
                },
            },
        ])
    }

    pub fn phases(&self) -> &[Phase<T>] {
        &self.phases
    }

    pub fn period(&self) -> T {
        self.phases
            .iter()
            .fold(T::zero(), |acc, p| acc + p.duration)
    }

    /// Highest state index referenced by any blend.
    pub fn max_state_index(&self) -> usize {
        self.phases
            .iter()
            .filter_map(|p| match p.motion {
                Motion::Blend { from, to, .. } => Some(from.max(to)),
                Motion::Rest => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Phase containing `t mod period`. Exact boundaries go to the later phase.
    pub fn locate(&self, t: T) -> Result<PhaseLocation<T>> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        let period = self.period();
        let tm = t % period;
        let mut start = T::zero();
        let mut last = 0;
        for (index, p) in self.phases.iter().enumerate() {
            if p.duration == T::zero() {
                continue;
            }
            last = index;
            let end = start + p.duration;
            if tm < end {
                return Ok(self.location(index, (tm - start) / p.duration));
            }
            start = end;
        }
        // Only reachable through round-off in the cumulative sum.
        Ok(self.location(last, T::one()))
    }

    fn location(&self, index: usize, t_norm: T) -> PhaseLocation<T> {
        let resting = matches!(self.phases[index].motion, Motion::Rest);
        PhaseLocation {
            index,
            t_norm: if resting {
                T::one()
            } else {
                t_norm.max(T::zero()).min(T::one())
            },
            resting,
        }
    }

    /// State held by a rest phase: target of the closest preceding blend.
    fn held_state(&self, index: usize) -> usize {
        let n = self.phases.len();
        (1..=n)
            .map(|k| (index + n - k) % n)
            .find_map(|i| match self.phases[i].motion {
                Motion::Blend { to, .. } => Some(to),
                Motion::Rest => None,
            })
            .expect("schedule has a blend phase")
    }

    /// Interpolated state at time `t` given the keyframe states.
    pub fn sample(&self, states: &[StateMatrix<T>], t: T) -> Result<StateMatrix<T>> {
        if states.len() <= self.max_state_index() {
            return Err(Error::InvalidArgument(format!(
                "schedule references state {} but only {} states given",
                self.max_state_index(),
                states.len()
            )));
        }
        let loc = self.locate(t)?;
        match self.phases[loc.index].motion {
            Motion::Rest => Ok(states[self.held_state(loc.index)].clone()),
            Motion::Blend { from, to, profile } => {
                let w = profile.weight(loc.t_norm)?;
                blend_states(&states[from], &states[to], w)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(p1: f64, p2: f64) -> CubicInterpolant<f64> {
        CubicInterpolant::solve(p1, p2).unwrap()
    }

    #[test]
    fn rejects_bad_mediary_points() {
        for (p1, p2) in [(0.0, 0.5), (0.3, 1.0), (0.6, 0.4), (0.5, 0.5), (-0.1, 0.5)] {
            assert!(matches!(
                CubicInterpolant::solve(p1, p2),
                Err(Error::InvalidMediaryPoints { .. })
            ));
        }
    }

    #[test]
    fn endpoints_and_knot_value() {
        let c = cubic(0.25, 0.925);
        assert!(c.eval(0.0).unwrap().abs() < 1e-12);
        assert!((c.eval(1.0).unwrap() - 1.0).abs() < 1e-12);
        // a3·p1³ with a3 ≈ 4.324.
        assert!((c.eval(0.25).unwrap() - 4.324 * 0.25f64.powi(3)).abs() < 1e-4);
        let (g, dg, ddg) = c.eval_derivs(0.0).unwrap();
        assert!(g.abs() < 1e-12 && dg.abs() < 1e-12 && ddg.abs() < 1e-12);
        let (g, dg, ddg) = c.eval_derivs(1.0).unwrap();
        assert!((g - 1.0).abs() < 1e-12 && dg.abs() < 1e-9 && ddg.abs() < 1e-9);
    }

    #[test]
    fn segments_agree_at_knots() {
        let c = cubic(0.25, 0.925);
        for (t, l, r) in [
            (c.p1(), Segment::First, Segment::Middle),
            (c.p2(), Segment::Middle, Segment::Last),
        ] {
            let left = c.eval_segment(l, t);
            let right = c.eval_segment(r, t);
            assert!((left.0 - right.0).abs() < 1e-9);
            assert!((left.1 - right.1).abs() < 1e-9);
            assert!((left.2 - right.2).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_time_rejected() {
        let c = cubic(0.1, 0.9);
        assert!(c.eval(-1e-9).is_err());
        assert!(c.eval(1.0 + 1e-9).is_err());
        assert!(c.eval(f64::NAN).is_err());
        assert!(Profile::<f64>::Linear.weight(1.5).is_err());
    }

    #[test]
    fn single_precision_solve() {
        let c = CubicInterpolant::<f32>::solve(0.25, 0.925).unwrap();
        assert!((c.coefficients()[3] - 4.324).abs() < 1e-3);
        assert!((c.eval(1.0).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn blend_examples() {
        let a = StateMatrix::new(vec![Vec2::new(0.0, 0.0)]);
        let b = StateMatrix::new(vec![Vec2::new(2.0, 4.0)]);
        assert_eq!(blend_states(&a, &b, 0.0).unwrap(), a);
        assert_eq!(blend_states(&a, &b, 1.0).unwrap(), b);
        assert_eq!(
            blend_states(&a, &b, 0.5).unwrap(),
            StateMatrix::new(vec![Vec2::new(1.0, 2.0)])
        );
        let c = StateMatrix::new(vec![Vec2::new(0.0, 0.0); 2]);
        assert!(matches!(
            blend_states(&a, &c, 0.5),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn locate_examples() {
        let s = PhaseSchedule::sequence(&[0.01f64, 0.01], Profile::Linear).unwrap();
        let l = s.locate(0.005).unwrap();
        assert_eq!(l.index, 0);
        assert!((l.t_norm - 0.5).abs() < 1e-12);
        let l = s.locate(0.025).unwrap();
        assert_eq!(l.index, 0);
        assert!((l.t_norm - 0.5).abs() < 1e-9);

        let h = PhaseSchedule::there_and_back(0.01, 0.005, 0.01, Profile::Linear).unwrap();
        let l = h.locate(0.012).unwrap();
        assert_eq!(l.index, 1);
        assert!(l.resting);
        assert_eq!(l.t_norm, 1.0);
    }

    #[test]
    fn boundary_goes_to_later_phase() {
        let s = PhaseSchedule::sequence(&[0.5, 0.25], Profile::Linear).unwrap();
        let l = s.locate(0.5).unwrap();
        assert_eq!(l.index, 1);
        assert_eq!(l.t_norm, 0.0);
        let l = s.locate(0.75).unwrap();
        assert_eq!(l.index, 0);
        assert_eq!(l.t_norm, 0.0);
    }

    #[test]
    fn zero_length_rest_is_skipped() {
        let s = PhaseSchedule::there_and_back(1.0, 0.0, 1.0, Profile::Linear).unwrap();
        assert_eq!(s.locate(1.0).unwrap().index, 2);
    }

    #[test]
    fn invalid_schedules() {
        assert!(PhaseSchedule::<f64>::new(vec![]).is_err());
        assert!(PhaseSchedule::sequence(&[0.0], Profile::<f64>::Linear).is_err());
        assert!(PhaseSchedule::<f64>::new(vec![Phase {
            duration: 1.0,
            motion: Motion::Rest
        }])
        .is_err());
        assert!(PhaseSchedule::stroke(2.0, 1.0, Profile::<f64>::Linear).is_err());
        assert!(PhaseSchedule::sequence(&[1.0], Profile::<f64>::Linear)
            .unwrap()
            .locate(-1.0)
            .is_err());
    }

    #[test]
    fn rest_holds_previous_target() {
        let states = vec![
            StateMatrix::new(vec![Vec2::new(0.0, 0.0)]),
            StateMatrix::new(vec![Vec2::new(1.0, 0.0)]),
        ];
        let h = PhaseSchedule::there_and_back(0.01, 0.005, 0.01, Profile::Linear).unwrap();
        assert_eq!(h.sample(&states, 0.0125).unwrap(), states[1]);
        assert_eq!(h.sample(&states, 0.0).unwrap(), states[0]);
        assert!(h.sample(&states[..1], 0.0).is_err());
    }

    #[test]
    fn stroke_durations() {
        let s = PhaseSchedule::stroke(2.0, 0.2, Profile::<f64>::Linear).unwrap();
        assert!((s.phases()[0].duration - 1.6).abs() < 1e-15);
        assert!((s.phases()[1].duration - 0.4).abs() < 1e-15);
        assert!((s.period() - 2.0).abs() < 1e-15);
    }
}
