//! Force spreading and velocity interpolation with the four-point
//! regularized delta `δ_h(x) = φ(x/h) φ(y/h) / h²`.

use ndarray::Array2;

use crate::fluid::Grid;
use crate::{Error, Real, Result, Vec2};

/// One-dimensional four-point kernel profile; zero for `|r| ≥ 2`.
pub fn phi<T: Real>(r: T) -> T {
    let a = r.abs();
    let eighth = T::lit(0.125);
    if a < T::one() {
        let rad = (T::one() + T::lit(4.0) * a - T::lit(4.0) * a * a).max(T::zero());
        eighth * (T::lit(3.0) - T::two() * a + rad.sqrt())
    } else if a < T::two() {
        let rad = (T::lit(-7.0) + T::lit(12.0) * a - T::lit(4.0) * a * a).max(T::zero());
        eighth * (T::lit(5.0) - T::two() * a - rad.sqrt())
    } else {
        T::zero()
    }
}

/// Periodic grid indices and weights touched by a node at coordinate `pos`.
#[inline]
fn stencil<T: Real>(pos: T, h: T, n: usize) -> ([usize; 4], [T; 4]) {
    let s = pos / h;
    let base = s.floor();
    let first = base.to_i64().unwrap_or(0) - 1;
    let mut idx = [0usize; 4];
    let mut w = [T::zero(); 4];
    for k in 0..4 {
        let g = first + k as i64;
        idx[k] = g.rem_euclid(n as i64) as usize;
        w[k] = phi(s - (base + T::from_i64(k as i64 - 1).unwrap()));
    }
    (idx, w)
}

fn check_square<T: Real>(grid: &Grid<T>) -> Result<()> {
    if grid.is_square() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "coupling needs square cells (dx = {}, dy = {})",
            grid.dx(),
            grid.dy()
        )))
    }
}

fn check_finite<T: Real>(v: &[Vec2<T>], what: &'static str) -> Result<()> {
    if v.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Eulerian force density from nodal force densities `f` (per unit length):
/// `F(x) = Σ_s f(s) δ_h(x − X(s)) ds`.
pub fn spread_forces<T: Real>(
    f: &[Vec2<T>],
    x: &[Vec2<T>],
    ds: T,
    grid: &Grid<T>,
) -> Result<(Array2<T>, Array2<T>)> {
    let mut fx = grid.zeros();
    let mut fy = grid.zeros();
    spread_into(f, x, ds, grid, &mut fx, &mut fy)?;
    Ok((fx, fy))
}

/// Accumulating form of [`spread_forces`].
pub fn spread_into<T: Real>(
    f: &[Vec2<T>],
    x: &[Vec2<T>],
    ds: T,
    grid: &Grid<T>,
    fx: &mut Array2<T>,
    fy: &mut Array2<T>,
) -> Result<()> {
    check_square(grid)?;
    if f.len() != x.len() {
        return Err(Error::ShapeMismatch {
            expected: x.len(),
            found: f.len(),
        });
    }
    check_finite(f, "Lagrangian forces")?;
    check_finite(x, "Lagrangian positions")?;
    let h = grid.h();
    let scale = ds / (h * h);
    for (force, pos) in f.iter().zip(x) {
        let (ix, wx) = stencil(pos.x, h, grid.nx);
        let (iy, wy) = stencil(pos.y, h, grid.ny);
        let g = *force * scale;
        for a in 0..4 {
            for b in 0..4 {
                let w = wx[a] * wy[b];
                fx[[ix[a], iy[b]]] += g.x * w;
                fy[[ix[a], iy[b]]] += g.y * w;
            }
        }
    }
    Ok(())
}

/// Node velocities `U(s) = Σ_x u(x) δ_h(x − X(s)) h²`.
pub fn interp_velocity<T: Real>(
    u: &Array2<T>,
    v: &Array2<T>,
    x: &[Vec2<T>],
    grid: &Grid<T>,
) -> Result<Vec<Vec2<T>>> {
    check_square(grid)?;
    check_finite(x, "Lagrangian positions")?;
    if u.dim() != (grid.nx, grid.ny) || v.dim() != (grid.nx, grid.ny) {
        return Err(Error::InvalidArgument(
            "velocity field shape does not match grid".into(),
        ));
    }
    if !u.iter().chain(v.iter()).all(|c| c.is_finite()) {
        return Err(Error::NonFinite("Eulerian velocity"));
    }
    let h = grid.h();
    Ok(x.iter()
        .map(|pos| {
            let (ix, wx) = stencil(pos.x, h, grid.nx);
            let (iy, wy) = stencil(pos.y, h, grid.ny);
            let mut acc = Vec2::zero();
            for a in 0..4 {
                for b in 0..4 {
                    let w = wx[a] * wy[b];
                    acc.x += u[[ix[a], iy[b]]] * w;
                    acc.y += v[[ix[a], iy[b]]] * w;
                }
            }
            acc
        })
        .collect())
}
