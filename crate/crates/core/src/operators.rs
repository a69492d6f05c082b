//! Discrete operators shared by both schemes. All of them act per unit
//! volume on interior cells and expect the caller to have filled the ghosts
//! appropriate for the field's boundary type.

use crate::grid::{CellField, FaceFluxes, GridSpec, VectorField};

/// Rotation vector `omega = alpha e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationParams {
    pub alpha: f64,
}

/// Standard 7-point second-difference Laplacian.
pub fn laplacian(f: &CellField, g: &GridSpec) -> CellField {
    let (ix2, iy2, iz2) = (1.0 / (g.dx * g.dx), 1.0 / (g.dy * g.dy), 1.0 / (g.dz * g.dz));
    let mut out = CellField::zeros(g);
    for (i, j, k) in g.interior() {
        let c = f[(i, j, k)];
        out[(i, j, k)] = (f[(i + 1, j, k)] - 2.0 * c + f[(i - 1, j, k)]) * ix2
            + (f[(i, j + 1, k)] - 2.0 * c + f[(i, j - 1, k)]) * iy2
            + (f[(i, j, k + 1)] - 2.0 * c + f[(i, j, k - 1)]) * iz2;
    }
    out
}

/// Horizontal part of the Laplacian at one cell.
#[inline]
pub(crate) fn horizontal_laplacian_at(f: &CellField, g: &GridSpec, i: usize, j: usize, k: usize) -> f64 {
    let c = f[(i, j, k)];
    (f[(i + 1, j, k)] - 2.0 * c + f[(i - 1, j, k)]) / (g.dx * g.dx)
        + (f[(i, j + 1, k)] - 2.0 * c + f[(i, j - 1, k)]) / (g.dy * g.dy)
}

/// Central-difference pressure gradient.
pub fn grad_pressure(p: &CellField, g: &GridSpec) -> VectorField {
    let mut out = VectorField::zeros(g);
    for (i, j, k) in g.interior() {
        out.comps[0][(i, j, k)] = (p[(i + 1, j, k)] - p[(i - 1, j, k)]) / (2.0 * g.dx);
        out.comps[1][(i, j, k)] = (p[(i, j + 1, k)] - p[(i, j - 1, k)]) / (2.0 * g.dy);
        out.comps[2][(i, j, k)] = (p[(i, j, k + 1)] - p[(i, j, k - 1)]) / (2.0 * g.dz);
    }
    out
}

/// Flux divergence per unit volume.
pub fn divergence(fl: &FaceFluxes, g: &GridSpec) -> CellField {
    let mut out = CellField::zeros(g);
    for (i, j, k) in g.interior() {
        out[(i, j, k)] = (fl.fu[(i, j, k)] - fl.fu[(i - 1, j, k)]) / g.dx
            + (fl.fv[(i, j, k)] - fl.fv[(i, j - 1, k)]) / g.dy
            + (fl.fw[(i, j, k)] - fl.fw[(i, j, k - 1)]) / g.dz;
    }
    out
}

/// Cellwise `omega x v = alpha (-v2, v1, 0)`.
pub fn rotate(v: &VectorField, r: RotationParams) -> VectorField {
    let g = *v.grid();
    let mut out = VectorField::zeros(&g);
    for c in g.interior() {
        out.comps[0][c] = -r.alpha * v.comps[1][c];
        out.comps[1][c] = r.alpha * v.comps[0][c];
    }
    out
}

/// Eigenvalue of the periodic 3-point second difference for the `p`-th
/// Fourier mode on `count` cells of width `h`.
pub fn periodic_symbol(p: usize, count: usize, h: f64) -> f64 {
    let theta = 2.0 * std::f64::consts::PI * p as f64 / count as f64;
    -(2.0 - 2.0 * theta.cos()) / (h * h)
}
