//! Linear solvers for the implicit stages.
//!
//! Every implicit operator in both schemes has constant coefficients in x and
//! y with periodic closure, so a 2D discrete Fourier transform decouples it
//! into one banded system in z per horizontal mode. Those are solved directly
//! with partial pivoting, which also covers the nonsymmetric near-wall rows of
//! the enriched scheme. A matrix-free conjugate-gradient solver is kept as an
//! independent route for the symmetric operators.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{LayerError, Result};
use crate::grid::{fill_dirichlet_wall_ghosts, fill_neumann_wall_ghosts, fill_periodic_ghosts, CellField, GridSpec};
use crate::operators::{laplacian, periodic_symbol};

/// Which route the symmetric implicit stages take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearSolverKind {
    /// Horizontal FFT plus banded elimination in z.
    #[default]
    Spectral,
    /// Matrix-free conjugate gradients.
    ConjugateGradient,
}

/// Dense storage for one z-column system; elimination only touches the band.
#[derive(Debug, Clone)]
pub struct ColumnSystem {
    n: usize,
    kl: usize,
    ku: usize,
    a: Vec<f64>,
}

impl ColumnSystem {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, a: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn clear(&mut self) {
        self.a.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        debug_assert!(col + self.kl >= row && col <= row + self.ku);
        self.a[row * self.n + col] = v;
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        self.a[row * self.n + col] += v;
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.a[row * self.n + col]
    }

    /// In-place Gaussian elimination with partial pivoting; the matrix is
    /// destroyed and `rhs` replaced by the solution.
    pub fn solve_in_place(&mut self, rhs: &mut [Complex<f64>]) -> Result<()> {
        let n = self.n;
        let upper = self.kl + self.ku;
        for c in 0..n {
            let last = (c + self.kl).min(n - 1);
            let (mut piv, mut best) = (c, self.a[c * n + c].abs());
            for r in c + 1..=last {
                let v = self.a[r * n + c].abs();
                if v > best {
                    piv = r;
                    best = v;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LayerError::LinearSolve { residual: f64::INFINITY, iterations: 0 });
            }
            if piv != c {
                for col in c..=(c + upper).min(n - 1) {
                    self.a.swap(c * n + col, piv * n + col);
                }
                rhs.swap(c, piv);
            }
            let d = self.a[c * n + c];
            for r in c + 1..=last {
                let factor = self.a[r * n + c] / d;
                if factor == 0.0 {
                    continue;
                }
                self.a[r * n + c] = 0.0;
                for col in c + 1..=(c + upper).min(n - 1) {
                    self.a[r * n + col] -= factor * self.a[c * n + col];
                }
                let pivot_rhs = rhs[c];
                rhs[r] -= pivot_rhs * factor;
            }
        }
        for r in (0..n).rev() {
            let mut acc = rhs[r];
            for col in r + 1..=(r + upper).min(n - 1) {
                acc -= rhs[col] * self.a[r * n + col];
            }
            rhs[r] = acc / self.a[r * n + r];
        }
        Ok(())
    }
}

/// FFT-in-(x,y), banded-in-z direct solver bound to one grid.
pub struct SpectralSolver {
    grid: GridSpec,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    sym_x: Vec<f64>,
    sym_y: Vec<f64>,
}

impl std::fmt::Debug for SpectralSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSolver").field("grid", &self.grid).finish()
    }
}

impl SpectralSolver {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fwd_x: planner.plan_fft_forward(grid.m),
            inv_x: planner.plan_fft_inverse(grid.m),
            fwd_y: planner.plan_fft_forward(grid.n),
            inv_y: planner.plan_fft_inverse(grid.n),
            sym_x: (0..grid.m).map(|p| periodic_symbol(p, grid.m, grid.dx)).collect(),
            sym_y: (0..grid.n).map(|q| periodic_symbol(q, grid.n, grid.dy)).collect(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Forward transform of a real `M x N` plane (layout `j * M + i`); the
    /// result is stored mode-major as `p * N + q`.
    fn forward(&self, plane: &[f64]) -> Vec<Complex<f64>> {
        let (m, n) = (self.grid.m, self.grid.n);
        let mut buf: Vec<Complex<f64>> = plane.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.fwd_x.process(&mut buf);
        let mut t = vec![Complex::new(0.0, 0.0); m * n];
        for j in 0..n {
            for i in 0..m {
                t[i * n + j] = buf[j * m + i];
            }
        }
        self.fwd_y.process(&mut t);
        t
    }

    fn inverse(&self, mut t: Vec<Complex<f64>>) -> Vec<f64> {
        let (m, n) = (self.grid.m, self.grid.n);
        self.inv_y.process(&mut t);
        let mut buf = vec![Complex::new(0.0, 0.0); m * n];
        for i in 0..m {
            for j in 0..n {
                buf[j * m + i] = t[i * n + j];
            }
        }
        self.inv_x.process(&mut buf);
        let scale = 1.0 / (m * n) as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Solves a stack of `nz` horizontally-coupled planes. For each mode
    /// `build(lambda_h, sys)` fills the z-column matrix, where `lambda_h` is
    /// the eigenvalue of the horizontal 5-point Laplacian; returning
    /// `Some(row)` pins that unknown to zero (used for the singular mean mode).
    pub fn solve_columns<B>(&self, planes: &[Vec<f64>], kl: usize, ku: usize, build: B) -> Result<Vec<Vec<f64>>>
    where
        B: Fn(f64, &mut ColumnSystem) -> Option<usize>,
    {
        let (m, n) = (self.grid.m, self.grid.n);
        let nz = planes.len();
        let mut spec: Vec<Vec<Complex<f64>>> = planes.iter().map(|p| self.forward(p)).collect();
        let mut sys = ColumnSystem::new(nz, kl, ku);
        let mut col = vec![Complex::new(0.0, 0.0); nz];
        for p in 0..m {
            for q in 0..n {
                let mode = p * n + q;
                sys.clear();
                let pin = build(self.sym_x[p] + self.sym_y[q], &mut sys);
                for (s, plane) in spec.iter().enumerate() {
                    col[s] = plane[mode];
                }
                if let Some(row) = pin {
                    for c in 0..nz {
                        sys.a[row * nz + c] = 0.0;
                    }
                    sys.a[row * nz + row] = 1.0;
                    col[row] = Complex::new(0.0, 0.0);
                }
                sys.solve_in_place(&mut col)?;
                for (s, plane) in spec.iter_mut().enumerate() {
                    plane[mode] = col[s];
                }
            }
        }
        Ok(spec.into_iter().map(|t| self.inverse(t)).collect())
    }

    /// `shift * u - eps * lap(u) = rhs` with periodic sides and no-slip walls.
    pub fn helmholtz_dirichlet(&self, rhs: &CellField, shift: f64, eps: f64) -> Result<CellField> {
        let g = self.grid;
        let (l, iz2) = (g.l, 1.0 / (g.dz * g.dz));
        let planes = to_planes(rhs);
        let sol = self.solve_columns(&planes, 1, 1, |lam, sys| {
            for r in 0..l {
                let mut diag = shift - eps * lam + 2.0 * eps * iz2;
                if r == 0 {
                    diag += eps * iz2;
                } else {
                    sys.set(r, r - 1, -eps * iz2);
                }
                if r + 1 == l {
                    diag += eps * iz2;
                } else {
                    sys.set(r, r + 1, -eps * iz2);
                }
                sys.set(r, r, diag);
            }
            None
        })?;
        Ok(from_planes(&g, &sol))
    }

    /// `lap(psi) = rhs` with periodic sides and homogeneous Neumann walls.
    /// `rhs` must have zero mean; the returned solution has zero mean.
    pub fn poisson_neumann(&self, rhs: &CellField) -> Result<CellField> {
        let g = self.grid;
        let (l, iz2) = (g.l, 1.0 / (g.dz * g.dz));
        let planes = to_planes(rhs);
        let sol = self.solve_columns(&planes, 1, 1, |lam, sys| {
            for r in 0..l {
                let mut diag = lam - 2.0 * iz2;
                if r == 0 {
                    diag += iz2;
                } else {
                    sys.set(r, r - 1, iz2);
                }
                if r + 1 == l {
                    diag += iz2;
                } else {
                    sys.set(r, r + 1, iz2);
                }
                sys.set(r, r, diag);
            }
            (lam == 0.0).then_some(0)
        })?;
        let mut out = from_planes(&g, &sol);
        out.remove_mean();
        Ok(out)
    }
}

/// Interior values of one z-level as an `M x N` plane (layout `j * M + i`).
pub fn plane_of(f: &CellField, k: usize) -> Vec<f64> {
    let g = f.grid();
    let mut out = Vec::with_capacity(g.m * g.n);
    for j in 1..=g.n {
        for i in 1..=g.m {
            out.push(f[(i, j, k)]);
        }
    }
    out
}

pub fn to_planes(f: &CellField) -> Vec<Vec<f64>> {
    (1..=f.grid().l).map(|k| plane_of(f, k)).collect()
}

/// Inverse of [`to_planes`]; ghosts are left at zero.
pub fn from_planes(g: &GridSpec, planes: &[Vec<f64>]) -> CellField {
    let mut out = CellField::zeros(g);
    for (s, plane) in planes.iter().enumerate() {
        write_plane(&mut out, s + 1, plane);
    }
    out
}

pub fn write_plane(f: &mut CellField, k: usize, plane: &[f64]) {
    let g = *f.grid();
    for j in 1..=g.n {
        for i in 1..=g.m {
            f[(i, j, k)] = plane[(j - 1) * g.m + (i - 1)];
        }
    }
}

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct IterativeSolution {
    pub x: CellField,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Matrix-free conjugate gradients on the interior unknowns.
///
/// With `mean_free` the iterates and residuals are kept orthogonal to the
/// constants, which makes the Neumann Poisson operator definite.
pub fn conjugate_gradient<A>(
    apply: A,
    b: &CellField,
    tol: f64,
    max_iter: usize,
    mean_free: bool,
) -> Result<IterativeSolution>
where
    A: Fn(&CellField) -> CellField,
{
    let g = *b.grid();
    let mut x = CellField::zeros(&g);
    let mut r = b.clone();
    if mean_free {
        r.remove_mean();
    }
    let b_norm = r.interior_sum_sq().sqrt();
    if b_norm == 0.0 {
        return Ok(IterativeSolution { x, iterations: 0, relative_residual: 0.0 });
    }
    let mut p = r.clone();
    let mut rr = r.interior_sum_sq();
    for it in 1..=max_iter {
        let mut ap = apply(&p);
        if mean_free {
            ap.remove_mean();
        }
        let alpha = rr / p.interior_dot(&ap);
        x.axpby(1.0, alpha, &p);
        r.axpby(1.0, -alpha, &ap);
        let rr_new = r.interior_sum_sq();
        let rel = rr_new.sqrt() / b_norm;
        if rel <= tol {
            if mean_free {
                x.remove_mean();
            }
            return Ok(IterativeSolution { x, iterations: it, relative_residual: rel });
        }
        p.axpby(rr_new / rr, 1.0, &r);
        rr = rr_new;
    }
    Err(LayerError::LinearSolve { residual: rr.sqrt() / b_norm, iterations: max_iter })
}

/// `shift * u - eps * lap(u)` with no-slip ghosts.
pub fn apply_helmholtz_dirichlet(u: &CellField, shift: f64, eps: f64) -> CellField {
    let g = *u.grid();
    let mut w = u.clone();
    fill_periodic_ghosts(&mut w);
    fill_dirichlet_wall_ghosts(&mut w);
    let mut out = laplacian(&w, &g);
    for c in g.interior() {
        out[c] = shift * u[c] - eps * out[c];
    }
    out
}

/// `-lap(psi)` with Neumann ghosts (positive semi-definite).
pub fn apply_neg_laplacian_neumann(psi: &CellField) -> CellField {
    let g = *psi.grid();
    let mut w = psi.clone();
    fill_periodic_ghosts(&mut w);
    fill_neumann_wall_ghosts(&mut w);
    let mut out = laplacian(&w, &g);
    out.map_inplace(|v| -v);
    out
}

/// Relative residual `|A x - b| / |b|` over the interior.
pub fn relative_residual(ax: &CellField, b: &CellField) -> f64 {
    let g = b.grid();
    let num: f64 = g.interior().map(|c| (ax[c] - b[c]).powi(2)).sum::<f64>().sqrt();
    let den = b.interior_sum_sq().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
