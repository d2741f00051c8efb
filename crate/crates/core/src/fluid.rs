//! Incompressible Navier–Stokes on a doubly periodic grid.
//!
//! Fourier pseudo-spectral projection: skew-symmetric advection treated
//! explicitly with 2/3 dealiasing, viscosity implicitly, and incompressibility
//! imposed by removing the longitudinal part of each mode. Pressure is
//! recovered from the projection with zero mean.

use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{Array2, Zip};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Real, Result};

/// Periodic rectangular grid; node `(i, j)` sits at `(i·dx, j·dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
}

impl<T: Real> Grid<T> {
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(Error::InvalidArgument(format!(
                "grid must be at least 4x4, got {nx}x{ny}"
            )));
        }
        if !(lx > T::zero() && ly > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "domain lengths must be positive, got {lx} x {ly}"
            )));
        }
        Ok(Self { nx, ny, lx, ly })
    }

    pub fn dx(&self) -> T {
        self.lx / T::from_usize_lossy(self.nx)
    }

    pub fn dy(&self) -> T {
        self.ly / T::from_usize_lossy(self.ny)
    }

    /// Cell size of a square-cell grid.
    pub fn h(&self) -> T {
        self.dx()
    }

    pub fn is_square(&self) -> bool {
        let (dx, dy) = (self.dx(), self.dy());
        (dx - dy).abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(16.0)) * dx
    }

    pub fn x(&self, i: usize) -> T {
        self.dx() * T::from_usize_lossy(i)
    }

    pub fn y(&self, j: usize) -> T {
        self.dy() * T::from_usize_lossy(j)
    }

    pub fn zeros(&self) -> Array2<T> {
        Array2::zeros((self.nx, self.ny))
    }

    /// Samples `f(x, y)` at every grid node.
    pub fn sample(&self, f: impl Fn(T, T) -> T) -> Array2<T> {
        Array2::from_shape_fn((self.nx, self.ny), |(i, j)| f(self.x(i), self.y(j)))
    }
}

/// Eulerian fluid fields and material constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState<T> {
    pub grid: Grid<T>,
    pub u: Array2<T>,
    pub v: Array2<T>,
    pub p: Array2<T>,
    pub fx: Array2<T>,
    pub fy: Array2<T>,
    pub rho: T,
    pub mu: T,
}

impl<T: Real> FluidState<T> {
    /// Quiescent fluid.
    pub fn at_rest(grid: Grid<T>, rho: T, mu: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "density must be positive, got {rho}"
            )));
        }
        if !(mu >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "viscosity must be non-negative, got {mu}"
            )));
        }
        Ok(Self {
            grid,
            u: grid.zeros(),
            v: grid.zeros(),
            p: grid.zeros(),
            fx: grid.zeros(),
            fy: grid.zeros(),
            rho,
            mu,
        })
    }

    pub fn nu(&self) -> T {
        self.mu / self.rho
    }

    pub fn max_speed(&self) -> T {
        Zip::from(&self.u)
            .and(&self.v)
            .fold(T::zero(), |m, &a, &b| m.max(a.abs()).max(b.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(self.v.iter())
            .chain(self.p.iter())
            .all(|v| v.is_finite())
    }
}

type Spectrum<T> = Array2<Complex<T>>;

/// Column buffer and FFT scratch, reused across transforms.
type WorkBuffers<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

/// Planned transforms and wavenumber tables for one grid.
pub struct FluidSolver<T: Real> {
    grid: Grid<T>,
    fft_x: Arc<dyn Fft<T>>,
    ifft_x: Arc<dyn Fft<T>>,
    fft_y: Arc<dyn Fft<T>>,
    ifft_y: Arc<dyn Fft<T>>,
    /// Wavenumbers for first derivatives (Nyquist zeroed).
    kx: Vec<T>,
    ky: Vec<T>,
    /// Wavenumbers for the Laplacian (Nyquist kept).
    kx_full: Vec<T>,
    ky_full: Vec<T>,
    keep_x: Vec<bool>,
    keep_y: Vec<bool>,
    nyq_x: Option<usize>,
    nyq_y: Option<usize>,
    /// Transpose buffer and FFT scratch, reused across transforms.
    work: RefCell<WorkBuffers<T>>,
}

/// Diagnostics of one fluid step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport<T> {
    pub cfl: T,
}

fn wavenumbers<T: Real>(n: usize, length: T) -> (Vec<T>, Vec<T>, Vec<bool>, Option<usize>) {
    let base = T::TAU() / length;
    let mut full = Vec::with_capacity(n);
    let mut keep = Vec::with_capacity(n);
    for k in 0..n {
        let m = if k <= n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        };
        full.push(base * T::from_i64(m).unwrap());
        // 2/3 rule: keep |m| < n/3
        keep.push(3 * m.unsigned_abs() < n as u64);
    }
    let nyq = n.is_multiple_of(2).then_some(n / 2);
    let mut deriv = full.clone();
    if let Some(q) = nyq {
        deriv[q] = T::zero();
    }
    (deriv, full, keep, nyq)
}

/// Blocked transpose of a row-major `rows × cols` buffer.
fn transpose<C: Copy>(src: &[C], dst: &mut [C], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            let c1 = (c0 + B).min(cols);
            for r in r0..(r0 + B).min(rows) {
                let row = &src[r * cols + c0..r * cols + c1];
                for (k, &v) in row.iter().enumerate() {
                    dst[(c0 + k) * rows + r] = v;
                }
            }
        }
    }
}

impl<T: Real> FluidSolver<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let (kx, kx_full, keep_x, nyq_x) = wavenumbers(grid.nx, grid.lx);
        let (ky, ky_full, keep_y, nyq_y) = wavenumbers(grid.ny, grid.ly);
        Self {
            grid,
            fft_x: planner.plan_fft_forward(grid.nx),
            ifft_x: planner.plan_fft_inverse(grid.nx),
            fft_y: planner.plan_fft_forward(grid.ny),
            ifft_y: planner.plan_fft_inverse(grid.ny),
            kx,
            ky,
            kx_full,
            ky_full,
            keep_x,
            keep_y,
            nyq_x,
            nyq_y,
            work: RefCell::new((Vec::new(), Vec::new())),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    fn transform(
        &self,
        data: &mut Spectrum<T>,
        along_y: &Arc<dyn Fft<T>>,
        along_x: &Arc<dyn Fft<T>>,
    ) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let zero = Complex::new(T::zero(), T::zero());
        let mut work = self.work.borrow_mut();
        let (cols, scratch) = &mut *work;
        cols.resize(nx * ny, zero);
        let need = along_x
            .get_inplace_scratch_len()
            .max(along_y.get_inplace_scratch_len());
        scratch.resize(need, zero);
        let buf = data.as_slice_mut().expect("standard layout");
        // rows (fixed i) are contiguous in y
        along_y.process_with_scratch(buf, scratch);
        transpose(buf, cols, nx, ny);
        along_x.process_with_scratch(cols, scratch);
        transpose(cols, buf, ny, nx);
    }

    pub fn forward(&self, field: &Array2<T>) -> Spectrum<T> {
        let mut data = field.mapv(|v| Complex::new(v, T::zero()));
        self.transform(&mut data, &self.fft_y, &self.fft_x);
        data
    }

    pub fn inverse(&self, spec: &Spectrum<T>) -> Array2<T> {
        let mut data = spec.clone();
        self.transform(&mut data, &self.ifft_y, &self.ifft_x);
        let scale = T::one() / T::from_usize_lossy(self.grid.nx * self.grid.ny);
        data.mapv(|c| c.re * scale)
    }

    /// Transforms two real fields with one complex FFT.
    pub fn forward2(&self, a: &Array2<T>, b: &Array2<T>) -> (Spectrum<T>, Spectrum<T>) {
        let mut z = Zip::from(a).and(b).map_collect(|&x, &y| Complex::new(x, y));
        self.transform(&mut z, &self.fft_y, &self.fft_x);
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let half = T::half();
        let mut fa = Array2::from_elem((nx, ny), Complex::new(T::zero(), T::zero()));
        let mut fb = fa.clone();
        for i in 0..nx {
            let mi = (nx - i) % nx;
            for j in 0..ny {
                let zk = z[[i, j]];
                let zm = z[[mi, (ny - j) % ny]].conj();
                fa[[i, j]] = (zk + zm) * half;
                // (zk − zm) / 2i
                let d = (zk - zm) * half;
                fb[[i, j]] = Complex::new(d.im, -d.re);
            }
        }
        (fa, fb)
    }

    /// Inverse of two Hermitian spectra with one complex FFT.
    pub fn inverse2(&self, a: &Spectrum<T>, b: &Spectrum<T>) -> (Array2<T>, Array2<T>) {
        let mut z = Zip::from(a)
            .and(b)
            .map_collect(|&x, &y| Complex::new(x.re - y.im, x.im + y.re));
        self.transform(&mut z, &self.ifft_y, &self.ifft_x);
        let scale = T::one() / T::from_usize_lossy(self.grid.nx * self.grid.ny);
        (z.mapv(|c| c.re * scale), z.mapv(|c| c.im * scale))
    }

    fn ddx(&self, spec: &Spectrum<T>) -> Spectrum<T> {
        Array2::from_shape_fn(spec.dim(), |(i, j)| {
            spec[[i, j]] * Complex::new(T::zero(), self.kx[i])
        })
    }

    fn ddy(&self, spec: &Spectrum<T>) -> Spectrum<T> {
        Array2::from_shape_fn(spec.dim(), |(i, j)| {
            spec[[i, j]] * Complex::new(T::zero(), self.ky[j])
        })
    }

    fn is_nyquist(&self, i: usize, j: usize) -> bool {
        Some(i) == self.nyq_x || Some(j) == self.nyq_y
    }

    /// Skew-symmetric advection `½[(u·∇)u + ∇·(u⊗u)]`, dealiased.
    fn advection(
        &self,
        u: &Array2<T>,
        v: &Array2<T>,
        uh: &Spectrum<T>,
        vh: &Spectrum<T>,
    ) -> (Spectrum<T>, Spectrum<T>) {
        let (ux, uy) = self.inverse2(&self.ddx(uh), &self.ddy(uh));
        let (vx, vy) = self.inverse2(&self.ddx(vh), &self.ddy(vh));

        let conv_u = Zip::from(u)
            .and(v)
            .and(&ux)
            .and(&uy)
            .map_collect(|&a, &b, &dx, &dy| a * dx + b * dy);
        let conv_v = Zip::from(u)
            .and(v)
            .and(&vx)
            .and(&vy)
            .map_collect(|&a, &b, &dx, &dy| a * dx + b * dy);
        let (uu, vv) = self.forward2(&(u * u), &(v * v));
        let uv = self.forward(&(u * v));
        let (cu, cv) = self.forward2(&conv_u, &conv_v);

        let half = T::half();
        let mut nu_hat = Array2::from_shape_fn(uh.dim(), |(i, j)| {
            let ikx = Complex::new(T::zero(), self.kx[i]);
            let iky = Complex::new(T::zero(), self.ky[j]);
            (cu[[i, j]] + ikx * uu[[i, j]] + iky * uv[[i, j]]) * half
        });
        let mut nv_hat = Array2::from_shape_fn(uh.dim(), |(i, j)| {
            let ikx = Complex::new(T::zero(), self.kx[i]);
            let iky = Complex::new(T::zero(), self.ky[j]);
            (cv[[i, j]] + ikx * uv[[i, j]] + iky * vv[[i, j]]) * half
        });
        let zero = Complex::new(T::zero(), T::zero());
        for ((i, j), n) in nu_hat.indexed_iter_mut() {
            if !(self.keep_x[i] && self.keep_y[j]) {
                *n = zero;
            }
        }
        for ((i, j), n) in nv_hat.indexed_iter_mut() {
            if !(self.keep_x[i] && self.keep_y[j]) {
                *n = zero;
            }
        }
        // a periodic flux divergence has no mean
        nu_hat[[0, 0]] = zero;
        nv_hat[[0, 0]] = zero;
        (nu_hat, nv_hat)
    }

    /// Removes the divergent part of `(uh, vh)` in place; returns the scalar
    /// `k·û / |k|²` used for pressure recovery.
    fn project(&self, uh: &mut Spectrum<T>, vh: &mut Spectrum<T>) -> Spectrum<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut phi = Array2::from_elem(uh.dim(), zero);
        for i in 0..self.grid.nx {
            for j in 0..self.grid.ny {
                if i == 0 && j == 0 {
                    continue;
                }
                if self.is_nyquist(i, j) {
                    uh[[i, j]] = zero;
                    vh[[i, j]] = zero;
                    continue;
                }
                let (kx, ky) = (self.kx[i], self.ky[j]);
                let k2 = kx * kx + ky * ky;
                let kdotu = uh[[i, j]] * kx + vh[[i, j]] * ky;
                let s = kdotu / k2;
                uh[[i, j]] -= s * kx;
                vh[[i, j]] -= s * ky;
                phi[[i, j]] = s;
            }
        }
        phi
    }

    /// Projects a velocity field onto its divergence-free part.
    pub fn project_field(&self, u: &mut Array2<T>, v: &mut Array2<T>) {
        let (mut uh, mut vh) = self.forward2(u, v);
        self.project(&mut uh, &mut vh);
        (*u, *v) = self.inverse2(&uh, &vh);
    }

    /// One semi-implicit step of length `dt` using the force density stored
    /// in `state.fx`, `state.fy`.
    pub fn advance(&self, state: &mut FluidState<T>, dt: T) -> Result<StepReport<T>> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if state.grid != self.grid {
            return Err(Error::InvalidArgument(
                "fluid state and solver grids differ".into(),
            ));
        }
        let h = self.grid.dx().min(self.grid.dy());
        let max_u = state.max_speed();
        let cfl = max_u * dt / h;
        if !cfl.is_finite() {
            return Err(Error::NonFinite("fluid velocity"));
        }
        if cfl > T::one() {
            return Err(Error::CflViolation {
                cfl: cfl.as_f64(),
                max_velocity: max_u.as_f64(),
                dt: dt.as_f64(),
                h: h.as_f64(),
            });
        }
        if cfl > T::half() {
            log::warn!("CFL number {cfl:.3} above 0.5");
        }

        let (mut uh, mut vh) = self.forward2(&state.u, &state.v);
        let (nu_hat, nv_hat) = self.advection(&state.u, &state.v, &uh, &vh);
        let (fxh, fyh) = self.forward2(&state.fx, &state.fy);
        let inv_rho = T::one() / state.rho;
        Zip::from(&mut uh)
            .and(&nu_hat)
            .and(&fxh)
            .for_each(|w, &n, &f| {
                *w += (f * inv_rho - n) * dt;
            });
        Zip::from(&mut vh)
            .and(&nv_hat)
            .and(&fyh)
            .for_each(|w, &n, &f| {
                *w += (f * inv_rho - n) * dt;
            });

        let phi = self.project(&mut uh, &mut vh);
        // p̂ = −i ρ (k·ŵ) / (dt |k|²)
        let p_scale = state.rho / dt;
        let ph = phi.mapv(|s| Complex::new(s.im, -s.re) * p_scale);

        let nu = state.nu();
        for ((i, j), w) in uh.indexed_iter_mut() {
            let k2 = self.kx_full[i] * self.kx_full[i] + self.ky_full[j] * self.ky_full[j];
            *w /= T::one() + nu * dt * k2;
        }
        for ((i, j), w) in vh.indexed_iter_mut() {
            let k2 = self.kx_full[i] * self.kx_full[i] + self.ky_full[j] * self.ky_full[j];
            *w /= T::one() + nu * dt * k2;
        }
        (state.u, state.v) = self.inverse2(&uh, &vh);
        state.p = self.inverse(&ph);
        Ok(StepReport { cfl })
    }

    /// `∂v/∂x − ∂u/∂y`, computed spectrally.
    pub fn vorticity(&self, state: &FluidState<T>) -> Array2<T> {
        let (uh, vh) = self.forward2(&state.u, &state.v);
        let vx = self.ddx(&vh);
        let uy = self.ddy(&uh);
        self.inverse(&(vx - uy))
    }

    /// Spectral divergence field.
    pub fn divergence(&self, u: &Array2<T>, v: &Array2<T>) -> Array2<T> {
        let (uh, vh) = self.forward2(u, v);
        self.inverse(&(self.ddx(&uh) + self.ddy(&vh)))
    }

    pub fn max_divergence(&self, state: &FluidState<T>) -> T {
        self.divergence(&state.u, &state.v)
            .iter()
            .fold(T::zero(), |m, d| m.max(d.abs()))
    }

    /// Spectral `∂/∂x` of a real field.
    pub fn diff_x(&self, f: &Array2<T>) -> Array2<T> {
        self.inverse(&self.ddx(&self.forward(f)))
    }

    /// Spectral `∂/∂y` of a real field.
    pub fn diff_y(&self, f: &Array2<T>) -> Array2<T> {
        self.inverse(&self.ddy(&self.forward(f)))
    }
}
