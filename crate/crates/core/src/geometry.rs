//! Immersed geometries: moving circles, a two-size cartoon heart, and the
//! two-phase anguilliform swimmer, plus discrete curvature states.

use std::path::Path;

use crate::kinematics::StateMatrix;
use crate::{io, Error, Real, Result, Vec2};

/// Ordered Lagrangian points with nominal spacing `ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianMesh<T> {
    pub points: Vec<Vec2<T>>,
    pub ds: T,
    /// Whether the last point connects back to the first.
    pub closed: bool,
}

impl<T: Real> LagrangianMesh<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn state(&self) -> StateMatrix<T> {
        StateMatrix::new(self.points.clone())
    }

    /// Distances between consecutive points (including the closing edge).
    pub fn spacings(&self) -> Vec<T> {
        let n = self.points.len();
        let edges = if self.closed { n } else { n.saturating_sub(1) };
        (0..edges)
            .map(|i| (self.points[(i + 1) % n] - self.points[i]).norm())
            .collect()
    }

    pub fn arc_length(&self) -> T {
        self.spacings().into_iter().fold(T::zero(), |a, b| a + b)
    }

    pub fn translated(&self, by: Vec2<T>) -> Self {
        Self {
            points: self.points.iter().map(|&p| p + by).collect(),
            ds: self.ds,
            closed: self.closed,
        }
    }
}

/// `n` points uniformly spaced in angle, starting on the positive x-axis.
pub fn make_circle<T: Real>(center: Vec2<T>, radius: T, n: usize) -> Result<LagrangianMesh<T>> {
    if !(radius > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "circle radius must be positive, got {radius}"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "circle needs at least 3 points, got {n}"
        )));
    }
    let dtheta = T::TAU() / T::from_usize_lossy(n);
    let points = (0..n)
        .map(|k| {
            let th = dtheta * T::from_usize_lossy(k);
            center + Vec2::new(th.cos(), th.sin()) * radius
        })
        .collect();
    Ok(LagrangianMesh {
        points,
        ds: T::two() * radius * (dtheta * T::half()).sin(),
        closed: true,
    })
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let n = n + n % 2;
    let h = (b - a) / T::from_usize_lossy(n);
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { T::lit(4.0) } else { T::two() };
        acc += w * f(a + h * T::from_usize_lossy(k));
    }
    acc * h / T::lit(3.0)
}

fn bisect<T: Real>(f: impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    // f increasing, f(lo) <= 0 <= f(hi)
    for _ in 0..200 {
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) * T::half()
}

/// Both shape phases of the swimmer plus bookkeeping about the layout.
#[derive(Debug, Clone)]
pub struct Swimmer<T> {
    pub phase1: LagrangianMesh<T>,
    pub phase2: LagrangianMesh<T>,
    /// Number of leading nodes on the straight (head) segment, junction included.
    pub straight_nodes: usize,
    pub body_length: T,
}

/// Fraction of body length taken by the straight head segment.
pub const SWIMMER_STRAIGHT_FRACTION: f64 = 0.28;

/// Builds the swimmer with its head (node 0) at the origin and the body
/// trailing toward negative x.
///
/// The head segment is straight. The tail is a cubic `y = A·(ξ/ℓ)³` in the
/// distance `ξ` behind the junction, with tip deflection `A = L/10` and `ℓ`
/// chosen so the tail's arc length fills the remaining body length. Nodes are
/// spaced `ds` apart in arc length. Phase 2 mirrors the tail across the axis.
pub fn make_swimmer<T: Real>(length: T, ds: T) -> Result<Swimmer<T>> {
    if !(length > T::zero()) || !(ds > T::zero()) || ds >= length {
        return Err(Error::InvalidArgument(format!(
            "swimmer needs 0 < ds < L (ds = {ds}, L = {length})"
        )));
    }
    let n_straight = (T::lit(SWIMMER_STRAIGHT_FRACTION) * length / ds)
        .round()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let junction = -ds * T::from_usize_lossy(n_straight);
    let tail_len = length + junction;
    let n_tail = (tail_len / ds).round().to_usize().unwrap_or(0);
    if n_tail == 0 {
        return Err(Error::InvalidArgument("swimmer tail has no nodes".into()));
    }
    let amp = length / T::lit(10.0);
    let three = T::lit(3.0);
    let quad = 512;

    // arc length of y = amp (u)^3 over ξ = ℓ u, u ∈ [0, 1]
    let tail_arc = |ell: T| {
        simpson(
            |u: T| {
                let dy = three * amp * u * u / ell;
                (T::one() + dy * dy).sqrt()
            },
            T::zero(),
            T::one(),
            quad,
        ) * ell
    };
    if tail_len <= amp {
        return Err(Error::InvalidArgument(
            "swimmer tail shorter than its deflection".into(),
        ));
    }
    let ell = bisect(
        |e| tail_arc(e) - tail_len,
        T::lit(1e-12) * tail_len,
        tail_len,
    );
    let arc_to = |xi: T| {
        if xi <= T::zero() {
            return T::zero();
        }
        simpson(
            |s: T| {
                let u = s / ell;
                let dy = three * amp * u * u / ell;
                (T::one() + dy * dy).sqrt()
            },
            T::zero(),
            xi,
            quad,
        )
    };

    let mut up = Vec::with_capacity(n_straight + n_tail + 1);
    for k in 0..=n_straight {
        up.push(Vec2::new(-ds * T::from_usize_lossy(k), T::zero()));
    }
    let mut prev = T::zero();
    for k in 1..=n_tail {
        let target = ds * T::from_usize_lossy(k);
        let xi = bisect(|x| arc_to(x) - target, prev, ell * T::two());
        prev = xi;
        let u = xi / ell;
        up.push(Vec2::new(junction - xi, amp * u * u * u));
    }
    let straight_nodes = n_straight + 1;
    let down = up
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i < straight_nodes {
                p
            } else {
                Vec2::new(p.x, -p.y)
            }
        })
        .collect();
    Ok(Swimmer {
        phase1: LagrangianMesh {
            points: up,
            ds,
            closed: false,
        },
        phase2: LagrangianMesh {
            points: down,
            ds,
            closed: false,
        },
        straight_nodes,
        body_length: length,
    })
}

fn heart_curve<T: Real>(theta: T) -> Vec2<T> {
    let s = theta.sin();
    let x = T::lit(16.0) * s * s * s;
    let y = T::lit(13.0) * theta.cos()
        - T::lit(5.0) * (T::two() * theta).cos()
        - T::two() * (T::lit(3.0) * theta).cos()
        - (T::lit(4.0) * theta).cos();
    Vec2::new(x, y)
}

/// Open heart outline: `n` points at equal arc length with a gap of
/// `gap_fraction` of the perimeter centred on the top notch.
///
/// `size` is the width of the outline; the centre of its bounding box sits at
/// `center`. Two hearts built with the same `n` and `gap_fraction` are
/// ordered consistently and differ only by scale.
pub fn make_heart<T: Real>(
    center: Vec2<T>,
    size: T,
    n: usize,
    gap_fraction: T,
) -> Result<LagrangianMesh<T>> {
    if !(size > T::zero()) || n < 3 {
        return Err(Error::InvalidArgument(format!(
            "heart needs size > 0 and n >= 3 (size = {size}, n = {n})"
        )));
    }
    if !(gap_fraction > T::zero() && gap_fraction < T::half()) {
        return Err(Error::InvalidArgument(format!(
            "heart gap fraction {gap_fraction} outside (0, 0.5)"
        )));
    }
    // dense polyline, θ = 0 is the notch
    let m = 20_000usize;
    let dth = T::TAU() / T::from_usize_lossy(m);
    let pts: Vec<Vec2<T>> = (0..=m)
        .map(|k| heart_curve(dth * T::from_usize_lossy(k)))
        .collect();
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(T::zero());
    for w in pts.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1] - w[0]).norm());
    }
    let perimeter = *cum.last().unwrap();
    let half_gap = perimeter * gap_fraction * T::half();
    let usable = perimeter - T::two() * half_gap;
    let at_arc = |s: T| -> Vec2<T> {
        let idx = cum.partition_point(|&c| c <= s).clamp(1, pts.len() - 1);
        let (s0, s1) = (cum[idx - 1], cum[idx]);
        let w = if s1 > s0 {
            (s - s0) / (s1 - s0)
        } else {
            T::zero()
        };
        pts[idx - 1] + (pts[idx] - pts[idx - 1]) * w
    };
    let step = usable / T::from_usize_lossy(n - 1);
    let raw: Vec<Vec2<T>> = (0..n)
        .map(|k| at_arc(half_gap + step * T::from_usize_lossy(k)))
        .collect();

    let (lo, hi) = raw.iter().fold(
        (
            Vec2::new(T::infinity(), T::infinity()),
            Vec2::new(T::neg_infinity(), T::neg_infinity()),
        ),
        |(lo, hi), p| {
            (
                Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    );
    let scale = size / (hi.x - lo.x);
    let mid = (lo + hi) * T::half();
    let points = raw
        .into_iter()
        .map(|p| center + (p - mid) * scale)
        .collect();
    Ok(LagrangianMesh {
        points,
        ds: step * scale,
        closed: false,
    })
}

/// Second differences `X(s) − 2X(s+1) + X(s+2)` along an open chain.
pub fn compute_curvatures<T: Real>(points: &[Vec2<T>]) -> Result<StateMatrix<T>> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "curvature needs at least 3 points, got {}",
            points.len()
        )));
    }
    Ok(StateMatrix::new(
        points
            .windows(3)
            .map(|w| w[0] - w[1] * T::two() + w[2])
            .collect(),
    ))
}

/// Reads a `.pts` / `.vertex` point list.
pub fn load_state_points<T: Real>(path: impl AsRef<Path>) -> Result<StateMatrix<T>> {
    io::read_points(path).map(StateMatrix::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circle_n4_angles() {
        let c = make_circle(Vec2::<f64>::new(0.0, 0.0), 1.0, 4).unwrap();
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, e) in c.points.iter().zip(expect) {
            assert!((p.x - e.0).abs() < 1e-15 && (p.y - e.1).abs() < 1e-15);
        }
    }

    #[test]
    fn circle_radius_and_spacing() {
        let center = Vec2::<f64>::new(0.3, -0.2);
        let c = make_circle(center, 0.1, 360).unwrap();
        for p in &c.points {
            assert!(((*p - center).norm() - 0.1).abs() <= 1e-12);
        }
        let arc = 2.0 * PI * 0.1 / 360.0;
        for s in c.spacings() {
            assert!((s - arc).abs() / arc < 1e-4);
        }
        assert!(make_circle(center, 0.0, 10).is_err());
        assert!(make_circle(center, 1.0, 2).is_err());
    }

    #[test]
    fn curvature_examples() {
        let line: Vec<_> = (0..6).map(|k| Vec2::new(k as f64 * 0.3, 1.0)).collect();
        for c in compute_curvatures(&line).unwrap().rows() {
            assert!(c.norm() < 1e-15);
        }
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(2.0, 1.0),
        ];
        let c = compute_curvatures(&pts).unwrap();
        assert_eq!(c.rows(), &[Vec2::new(0.0, 1.0)]);
        assert!(compute_curvatures(&pts[..2]).is_err());
    }

    #[test]
    fn circle_top_curvature_matches_taylor() {
        // Oracle: y = r sin θ, second difference about θ = π/2 is
        // r(sin(π/2 - Δ) - 2 + sin(π/2 + Δ)) = -2r(1 - cos Δ) ≈ -rΔ².
        let n = 64;
        let r = 0.5;
        let c = make_circle(Vec2::new(0.0, 0.0), r, n).unwrap();
        let curv = compute_curvatures(&c.points).unwrap();
        let dtheta = 2.0 * PI / n as f64;
        // middle node of triple s is s + 1; top node index n/4
        let cy = curv.rows()[n / 4 - 1].y;
        let approx = -r * dtheta * dtheta;
        assert!((cy - approx).abs() / approx.abs() < dtheta * dtheta);
    }

    #[test]
    fn swimmer_layout() {
        let l: f64 = 1.0;
        let ds = 1.0 / 64.0;
        let s = make_swimmer(l, ds).unwrap();
        assert_eq!(s.phase1.len(), s.phase2.len());
        assert_eq!(s.phase1.points[0], Vec2::new(0.0, 0.0));
        for i in 0..s.straight_nodes {
            assert_eq!(s.phase1.points[i], s.phase2.points[i]);
            assert_eq!(s.phase1.points[i].y, 0.0);
        }
        for i in s.straight_nodes..s.phase1.len() {
            assert_eq!(s.phase2.points[i].y, -s.phase1.points[i].y);
            assert_eq!(s.phase2.points[i].x, s.phase1.points[i].x);
        }
        // independent arc-length check on a fine resampling of the exact curve
        let arc = s.phase1.arc_length();
        assert!((arc - l).abs() / l < 0.02, "arc {arc}");
        for sp in s.phase1.spacings() {
            assert!((sp - ds).abs() <= 0.2 * ds);
        }
        let tip = s.phase1.points.last().unwrap();
        assert!((tip.y - l / 10.0).abs() < 0.02 * l);
        assert!(make_swimmer(1.0, 1.0).is_err());
    }

    #[test]
    fn heart_states_are_scaled_copies() {
        let c = Vec2::new(0.5, 0.5);
        let a = make_heart(c, 0.4, 120, 0.1).unwrap();
        let b = make_heart(c, 0.3, 120, 0.1).unwrap();
        assert_eq!(a.len(), b.len());
        let ratio = 0.3 / 0.4;
        let mid_a = bbox_mid(&a.points);
        let mid_b = bbox_mid(&b.points);
        for (pa, pb) in a.points.iter().zip(&b.points) {
            let da = *pa - mid_a;
            let db = *pb - mid_b;
            assert!((da.x * ratio - db.x).abs() < 1e-12);
            assert!((da.y * ratio - db.y).abs() < 1e-12);
        }
        // chords never exceed the arc step; only the bottom cusp pulls them in
        let sp = a.spacings();
        assert!(sp.iter().all(|&s| s <= a.ds * (1.0 + 1e-9)));
        let near = sp.iter().filter(|&&s| s > 0.95 * a.ds).count();
        assert!(near as f64 >= 0.9 * sp.len() as f64);
        // hole between the two open ends
        let gap = (a.points[0] - *a.points.last().unwrap()).norm();
        assert!(gap > 2.0 * a.ds);
    }

    fn bbox_mid(p: &[Vec2<f64>]) -> Vec2<f64> {
        let (mut lo, mut hi) = (p[0], p[0]);
        for q in p {
            lo = Vec2::new(lo.x.min(q.x), lo.y.min(q.y));
            hi = Vec2::new(hi.x.max(q.x), hi.y.max(q.y));
        }
        (lo + hi) * 0.5
    }
}
