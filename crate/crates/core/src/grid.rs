//! Uniform control-volume mesh of the channel `(0, Lx) x (0, Ly) x (0, 1)`.
//!
//! Interior cells use 1-based indices `1..=M`, `1..=N`, `1..=L`; index 0 and
//! `M + 1` (resp. `N + 1`, `L + 1`) are the single ghost layer on each side.
//! Cell `K(i, j, k)` spans `[(i - 1) dx, i dx] x [(j - 1) dy, j dy] x [(k - 1) dz, k dz]`.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use crate::error::{LayerError, Result};

/// Uniform Cartesian mesh with one ghost layer on every side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

/// Builds the `M x N x L` mesh of `(0, 2pi)^2 x (0, 1)`.
pub fn build_grid(m: usize, n: usize, l: usize) -> Result<GridSpec> {
    GridSpec::with_extent(m, n, l, 2.0 * PI, 2.0 * PI)
}

impl GridSpec {
    /// Mesh of `(0, lx) x (0, ly) x (0, 1)`; the horizontal periods are free,
    /// the wall-normal extent is always 1.
    pub fn with_extent(m: usize, n: usize, l: usize, lx: f64, ly: f64) -> Result<Self> {
        if m < 3 || n < 3 || l < 3 {
            return Err(LayerError::InvalidGrid(format!(
                "every direction needs at least 3 cells, got {m} x {n} x {l}"
            )));
        }
        if !(lx > 0.0 && lx.is_finite() && ly > 0.0 && ly.is_finite()) {
            return Err(LayerError::InvalidGrid(format!("horizontal periods must be positive, got {lx} x {ly}")));
        }
        Ok(Self { m, n, l, lx, ly, lz: 1.0, dx: lx / m as f64, dy: ly / n as f64, dz: 1.0 / l as f64 })
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn domain_volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn interior_cells(&self) -> usize {
        self.m * self.n * self.l
    }

    /// Cell-centre coordinates of `K(i, j, k)` (ghost indices give the mirrored centres).
    pub fn center(&self, i: usize, j: usize, k: usize) -> (f64, f64, f64) {
        ((i as f64 - 0.5) * self.dx, (j as f64 - 0.5) * self.dy, (k as f64 - 0.5) * self.dz)
    }

    /// Position of the face `x_{i+1/2}`.
    pub fn x_face(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn y_face(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    pub fn z_face(&self, k: usize) -> f64 {
        k as f64 * self.dz
    }

    /// Storage length of a field including ghosts.
    pub(crate) fn storage_len(&self) -> usize {
        (self.m + 2) * (self.n + 2) * (self.l + 2)
    }

    #[inline]
    pub(crate) fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * (self.n + 2) + j) * (self.m + 2) + i
    }

    /// Periodic wrap of an interior x-index given as a signed offset; accepts
    /// anything in `-M..2M`.
    #[inline]
    pub(crate) fn wrap_x(&self, i: isize) -> usize {
        (((i - 1).rem_euclid(self.m as isize)) + 1) as usize
    }

    #[inline]
    pub(crate) fn wrap_y(&self, j: isize) -> usize {
        (((j - 1).rem_euclid(self.n as isize)) + 1) as usize
    }

    /// Iterator over every interior `(i, j, k)` triple, `i` fastest.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize, usize)> {
        let (m, n, l) = (self.m, self.n, self.l);
        (1..=l).flat_map(move |k| (1..=n).flat_map(move |j| (1..=m).map(move |i| (i, j, k))))
    }
}

/// Cell-centred scalar with one ghost layer.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl CellField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self { grid: *grid, values: vec![0.0; grid.storage_len()] }
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self { grid: *grid, values: vec![c; grid.storage_len()] }
    }

    /// Samples `f(x, y, z)` at every interior cell centre; ghosts are left at zero.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(grid);
        for (i, j, k) in grid.interior() {
            let (x, y, z) = grid.center(i, j, k);
            out[(i, j, k)] = f(x, y, z);
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Applies `f` to every stored value, ghosts included.
    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        self.values.iter_mut().for_each(|v| *v = f(*v));
    }

    /// `self = a * self + b * other` over all storage.
    pub fn axpby(&mut self, a: f64, b: f64, other: &CellField) {
        debug_assert_eq!(self.grid, other.grid);
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            *s = a * *s + b * *o;
        }
    }

    /// `a * x + b * y`, ghosts included.
    pub fn combine(a: f64, x: &CellField, b: f64, y: &CellField) -> CellField {
        let mut out = x.clone();
        out.axpby(a, b, y);
        out
    }

    pub fn interior_sum(&self) -> f64 {
        self.grid.interior().map(|c| self[c]).sum()
    }

    pub fn interior_mean(&self) -> f64 {
        self.interior_sum() / self.grid.interior_cells() as f64
    }

    /// Subtracts the interior mean from every value (ghosts included).
    pub fn remove_mean(&mut self) -> f64 {
        let mean = self.interior_mean();
        self.map_inplace(|v| v - mean);
        mean
    }

    pub fn interior_max_abs(&self) -> f64 {
        self.grid.interior().map(|c| self[c].abs()).fold(0.0, f64::max)
    }

    /// Sum of squares over interior cells.
    pub fn interior_sum_sq(&self) -> f64 {
        self.grid.interior().map(|c| self[c] * self[c]).sum()
    }

    pub fn interior_dot(&self, other: &CellField) -> f64 {
        self.grid.interior().map(|c| self[c] * other[c]).sum()
    }

    /// Volume-weighted L2 norm over the interior.
    pub fn l2_norm(&self) -> f64 {
        (self.interior_sum_sq() * self.grid.cell_volume()).sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.grid.interior().all(|c| self[c].is_finite())
    }
}

impl Index<(usize, usize, usize)> for CellField {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &f64 {
        &self.values[self.grid.idx(i, j, k)]
    }
}

impl IndexMut<(usize, usize, usize)> for CellField {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut f64 {
        let at = self.grid.idx(i, j, k);
        &mut self.values[at]
    }
}

/// Three cell-centred components `(u, v, w)` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub comps: [CellField; 3],
}

impl VectorField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self { comps: [CellField::zeros(grid), CellField::zeros(grid), CellField::zeros(grid)] }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for (i, j, k) in grid.interior() {
            let (x, y, z) = grid.center(i, j, k);
            let v = f(x, y, z);
            for c in 0..3 {
                out.comps[c][(i, j, k)] = v[c];
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        self.comps[0].grid()
    }

    pub fn combine(a: f64, x: &VectorField, b: f64, y: &VectorField) -> VectorField {
        Self {
            comps: [
                CellField::combine(a, &x.comps[0], b, &y.comps[0]),
                CellField::combine(a, &x.comps[1], b, &y.comps[1]),
                CellField::combine(a, &x.comps[2], b, &y.comps[2]),
            ],
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(CellField::interior_max_abs).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.comps.iter().all(CellField::all_finite)
    }
}

/// Face-normal velocity fluxes on the three face families.
///
/// `fu[(i, j, k)]` is the flux through `x_{i+1/2}` for `i in 0..=M` (face 0 and
/// face `M` are the same periodic face), `fv` likewise in y, and `fw[(i, j, k)]`
/// the flux through `z_{k+1/2}` for `k in 0..=L`; the two wall levels hold 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceFluxes {
    pub fu: CellField,
    pub fv: CellField,
    pub fw: CellField,
}

impl FaceFluxes {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self { fu: CellField::zeros(grid), fv: CellField::zeros(grid), fw: CellField::zeros(grid) }
    }

    /// Samples a velocity field at face centres (used for manufactured-solution checks).
    pub fn from_velocity_fn(grid: &GridSpec, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for (i, j, k) in grid.interior() {
            let (x, y, z) = grid.center(i, j, k);
            out.fu[(i, j, k)] = f(grid.x_face(i), y, z)[0];
            out.fv[(i, j, k)] = f(x, grid.y_face(j), z)[1];
            if k < grid.l {
                out.fw[(i, j, k)] = f(x, y, grid.z_face(k))[2];
            }
        }
        out.close_boundaries();
        out
    }

    /// Copies the periodic seam faces and pins the wall faces to zero.
    pub fn close_boundaries(&mut self) {
        let g = *self.fu.grid();
        for k in 1..=g.l {
            for j in 1..=g.n {
                self.fu[(0, j, k)] = self.fu[(g.m, j, k)];
            }
            for i in 1..=g.m {
                self.fv[(i, 0, k)] = self.fv[(i, g.n, k)];
            }
        }
        for j in 1..=g.n {
            for i in 1..=g.m {
                self.fw[(i, j, 0)] = 0.0;
                self.fw[(i, j, g.l)] = 0.0;
            }
        }
    }

    pub fn combine(a: f64, x: &FaceFluxes, b: f64, y: &FaceFluxes) -> FaceFluxes {
        Self {
            fu: CellField::combine(a, &x.fu, b, &y.fu),
            fv: CellField::combine(a, &x.fv, b, &y.fv),
            fw: CellField::combine(a, &x.fw, b, &y.fw),
        }
    }
}

/// Periodic ghost rule in x and y: `f(0) = f(M)`, `f(M+1) = f(1)`, same in y with `N`.
/// Applied on every z-level, ghost levels included, so corner ghosts are consistent.
pub fn fill_periodic_ghosts(f: &mut CellField) {
    let g = *f.grid();
    for k in 0..=g.l + 1 {
        for j in 1..=g.n {
            f[(0, j, k)] = f[(g.m, j, k)];
            f[(g.m + 1, j, k)] = f[(1, j, k)];
        }
        for i in 0..=g.m + 1 {
            f[(i, 0, k)] = f[(i, g.n, k)];
            f[(i, g.n + 1, k)] = f[(i, 1, k)];
        }
    }
}

fn for_each_column(g: &GridSpec, mut body: impl FnMut(usize, usize)) {
    for j in 0..=g.n + 1 {
        for i in 0..=g.m + 1 {
            body(i, j);
        }
    }
}

/// Homogeneous Dirichlet by midpoint average: `f(0) = -f(1)`, `f(L+1) = -f(L)`.
pub fn fill_dirichlet_wall_ghosts(f: &mut CellField) {
    let g = *f.grid();
    for_each_column(&g, |i, j| {
        f[(i, j, 0)] = -f[(i, j, 1)];
        f[(i, j, g.l + 1)] = -f[(i, j, g.l)];
    });
}

/// No-slip ghost rule applied to all three velocity components.
pub fn fill_velocity_wall_ghosts(v: &mut VectorField) {
    for c in v.comps.iter_mut() {
        fill_dirichlet_wall_ghosts(c);
    }
}

/// Compact one-sided extrapolation of the pressure into the wall ghosts with
/// weights `5/2, -2, 1/2`. Reproduces constants and linear profiles in `k`;
/// on `k^2` the ghost is off by one.
pub fn fill_pressure_wall_ghosts(p: &mut CellField) {
    let g = *p.grid();
    let l = g.l;
    for_each_column(&g, |i, j| {
        p[(i, j, 0)] = 2.5 * p[(i, j, 1)] - 2.0 * p[(i, j, 2)] + 0.5 * p[(i, j, 3)];
        p[(i, j, l + 1)] = 2.5 * p[(i, j, l)] - 2.0 * p[(i, j, l - 1)] + 0.5 * p[(i, j, l - 2)];
    });
}

/// Homogeneous Neumann ghosts: `f(0) = f(1)`, `f(L+1) = f(L)`.
pub fn fill_neumann_wall_ghosts(f: &mut CellField) {
    let g = *f.grid();
    for_each_column(&g, |i, j| {
        f[(i, j, 0)] = f[(i, j, 1)];
        f[(i, j, g.l + 1)] = f[(i, j, g.l)];
    });
}

/// Full pressure ghost fill: periodic sides, compact extrapolation at the walls.
pub fn fill_pressure_ghosts(p: &mut CellField) {
    fill_periodic_ghosts(p);
    fill_pressure_wall_ghosts(p);
}

/// Full no-slip velocity ghost fill.
pub fn fill_velocity_ghosts(v: &mut VectorField) {
    for c in v.comps.iter_mut() {
        fill_periodic_ghosts(c);
    }
    fill_velocity_wall_ghosts(v);
}
