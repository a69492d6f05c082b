//! Boundary-layer-enriched momentum step.
//!
//! In the first and last cell layers the tangential velocity is represented
//! with the exponential corrector profile `-exp(-z^2 / (4 eps t))` attached to
//! a wall node `r`. Testing the momentum equation against that profile over
//! the near-wall cell gives one extra relation per wall column, which closes
//! the system once the ghost identity `u_0 = 2 r_0 - u_1` replaces the no-slip
//! ghost. The normal component keeps the classical treatment.

use rayon::prelude::*;

use crate::cfvm::{helmholtz_solve, momentum_rhs, MomentumSolution, SchemeState, SimConfig, DIRECT_RESIDUAL_FLOOR};
use crate::error::{LayerError, Result};
use crate::grid::{fill_dirichlet_wall_ghosts, fill_periodic_ghosts, CellField, GridSpec, VectorField};
use crate::linsolve::{to_planes, write_plane, SpectralSolver};
use crate::operators::horizontal_laplacian_at;

/// Point values and cell integral of the wall profile over one cell of height `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileIntegrals {
    /// Integral of the profile over `(0, h)`; negative.
    pub i0h: f64,
    pub phi_0: f64,
    pub phi_h2: f64,
    pub phi_h: f64,
    /// `phi(h/2) - phi(0)`.
    pub grad_lower: f64,
    /// `phi(h) - phi(h/2)`.
    pub grad_upper: f64,
}

pub fn profile_integrals(eps: f64, t: f64, h: f64) -> Result<ProfileIntegrals> {
    if !(t > 0.0) {
        return Err(LayerError::Domain(format!("profile needs t > 0, got {t}")));
    }
    if !(h > 0.0) || !(eps > 0.0) {
        return Err(LayerError::Domain(format!("profile needs h, eps > 0, got h={h}, eps={eps}")));
    }
    let et = eps * t;
    let phi = |z: f64| -(-z * z / (4.0 * et)).exp();
    let i0h = -(std::f64::consts::PI * et).sqrt() * libm::erf(h / (2.0 * et.sqrt()));
    let (phi_0, phi_h2, phi_h) = (phi(0.0), phi(0.5 * h), phi(h));
    Ok(ProfileIntegrals { i0h, phi_0, phi_h2, phi_h, grad_lower: phi_h2 - phi_0, grad_upper: phi_h - phi_h2 })
}

/// Coefficients of the near-wall relation for one horizontal velocity
/// component, per unit horizontal area:
/// `wall_node * r + first * u_1 + second * u_2 + lateral * lap_h(u_1) = rhs_weight * b_1`
/// with `b_1` the classical right-hand side of the wall cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearWallRow {
    pub wall_node: f64,
    pub first: f64,
    pub second: f64,
    pub lateral: f64,
    pub rhs_weight: f64,
}

pub fn near_wall_row(cfg: &SimConfig, g: &GridSpec, prof: &ProfileIntegrals) -> NearWallRow {
    let h = g.dz;
    let eh = cfg.eps * prof.phi_h2 / h;
    NearWallRow {
        wall_node: -2.0 * eh,
        first: 1.5 * prof.i0h / cfg.dt + 3.0 * eh,
        second: -eh,
        lateral: -cfg.eps * prof.i0h,
        rhs_weight: prof.i0h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Bottom,
    Top,
}

/// Wall nodes of the two tangential components and the profile used to get them.
#[derive(Debug, Clone, PartialEq)]
pub struct EnrichmentData {
    /// `[u, v]` planes of `r` at `z = 0`, layout `j * M + i`.
    pub r_bottom: [Vec<f64>; 2],
    pub r_top: [Vec<f64>; 2],
    pub profile: Option<ProfileIntegrals>,
}

impl EnrichmentData {
    /// Wall nodes implied by a no-slip field (midpoint of ghost and first cell).
    pub fn from_velocity(u: &VectorField) -> Self {
        let g = *u.grid();
        let mut w = u.clone();
        let mut out = Self { r_bottom: [vec![], vec![]], r_top: [vec![], vec![]], profile: None };
        for c in 0..2 {
            fill_dirichlet_wall_ghosts(&mut w.comps[c]);
            out.r_bottom[c] = wall_midpoints(&w.comps[c], &g, Wall::Bottom);
            out.r_top[c] = wall_midpoints(&w.comps[c], &g, Wall::Top);
        }
        out
    }
}

/// `(ghost + first) / 2` on one wall.
pub fn wall_midpoints(f: &CellField, g: &GridSpec, wall: Wall) -> Vec<f64> {
    let (kg, k1) = match wall {
        Wall::Bottom => (0, 1),
        Wall::Top => (g.l + 1, g.l),
    };
    let mut out = Vec::with_capacity(g.m * g.n);
    for j in 1..=g.n {
        for i in 1..=g.m {
            out.push(0.5 * (f[(i, j, kg)] + f[(i, j, k1)]));
        }
    }
    out
}

/// Residual of the near-wall relation for every wall column. The wall node is
/// read from the ghost of `u` through the ghost identity; `u` must have its
/// periodic ghosts filled.
pub fn near_wall_residual(row: &NearWallRow, u: &CellField, rhs: &CellField, wall: Wall) -> Vec<f64> {
    let g = *u.grid();
    let (kg, k1, k2) = match wall {
        Wall::Bottom => (0, 1, 2),
        Wall::Top => (g.l + 1, g.l, g.l - 1),
    };
    let mut out = Vec::with_capacity(g.m * g.n);
    for j in 1..=g.n {
        for i in 1..=g.m {
            let r = 0.5 * (u[(i, j, kg)] + u[(i, j, k1)]);
            let lhs = row.wall_node * r
                + row.first * u[(i, j, k1)]
                + row.second * u[(i, j, k2)]
                + row.lateral * horizontal_laplacian_at(u, &g, i, j, k1);
            out.push(lhs - row.rhs_weight * rhs[(i, j, k1)]);
        }
    }
    out
}

/// Classical cell rows `(3 / (2 dt)) u - eps lap u - rhs` using whatever ghosts `u` holds.
fn cell_residual(u: &CellField, rhs: &CellField, cfg: &SimConfig) -> CellField {
    let g = *u.grid();
    let lap = crate::operators::laplacian(u, &g);
    let mut out = CellField::zeros(&g);
    for c in g.interior() {
        out[c] = 1.5 / cfg.dt * u[c] - cfg.eps * lap[c] - rhs[c];
    }
    out
}

/// Solves the augmented system for one tangential component. Returns the
/// field with ghosts set from the wall nodes, the wall nodes and the relative
/// residual of all rows.
fn solve_tangential(
    solver: &SpectralSolver,
    cfg: &SimConfig,
    row: &NearWallRow,
    rhs: &CellField,
) -> Result<(CellField, Vec<f64>, Vec<f64>, f64)> {
    let g = *solver.grid();
    let l = g.l;
    let (shift, iz2) = (1.5 / cfg.dt, 1.0 / (g.dz * g.dz));
    let eps = cfg.eps;
    let cells = to_planes(rhs);
    let mut planes = Vec::with_capacity(l + 2);
    planes.push(cells[0].iter().map(|v| row.rhs_weight * v).collect::<Vec<_>>());
    planes.extend(cells.iter().cloned());
    planes.push(cells[l - 1].iter().map(|v| row.rhs_weight * v).collect::<Vec<_>>());

    let row = *row;
    let sol = solver.solve_columns(&planes, 2, 2, |lam, sys| {
        // unknowns: 0 -> r_0, s in 1..=L -> u_s, L + 1 -> r_{L+1}
        let n = l + 2;
        sys.set(0, 0, row.wall_node);
        sys.set(0, 1, row.first + row.lateral * lam);
        sys.set(0, 2, row.second);
        sys.set(n - 1, n - 1, row.wall_node);
        sys.set(n - 1, n - 2, row.first + row.lateral * lam);
        sys.set(n - 1, n - 3, row.second);
        for s in 1..=l {
            let mut diag = shift - eps * lam + 2.0 * eps * iz2;
            if s == 1 {
                // ghost u_0 = 2 r_0 - u_1
                diag += eps * iz2;
                sys.set(s, 0, -2.0 * eps * iz2);
            } else {
                sys.set(s, s - 1, -eps * iz2);
            }
            if s == l {
                diag += eps * iz2;
                sys.set(s, l + 1, -2.0 * eps * iz2);
            } else {
                sys.set(s, s + 1, -eps * iz2);
            }
            sys.set(s, s, diag);
        }
        None
    })?;

    let mut u = CellField::zeros(&g);
    for (s, plane) in sol.iter().enumerate().skip(1).take(l) {
        write_plane(&mut u, s, plane);
    }
    fill_periodic_ghosts(&mut u);
    let (r_bottom, r_top) = (sol[0].clone(), sol[l + 1].clone());
    set_wall_ghosts(&mut u, &r_bottom, &r_top);

    let cell = cell_residual(&u, rhs, cfg);
    let nb = near_wall_residual(&row, &u, rhs, Wall::Bottom);
    let nt = near_wall_residual(&row, &u, rhs, Wall::Top);
    let num = cell.interior_sum_sq() + nb.iter().chain(&nt).map(|v| v * v).sum::<f64>();
    let den = rhs.interior_sum_sq()
        + row.rhs_weight.powi(2) * cells[0].iter().chain(&cells[l - 1]).map(|v| v * v).sum::<f64>();
    let residual = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok((u, r_bottom, r_top, residual))
}

/// Ghost identity `u_0 = 2 r_0 - u_1` on both walls (also on periodic ghost columns).
pub fn set_wall_ghosts(u: &mut CellField, r_bottom: &[f64], r_top: &[f64]) {
    let g = *u.grid();
    for j in 0..=g.n + 1 {
        for i in 0..=g.m + 1 {
            let (ii, jj) = (g.wrap_x(i as isize), g.wrap_y(j as isize));
            let idx = (jj - 1) * g.m + (ii - 1);
            u[(i, j, 0)] = 2.0 * r_bottom[idx] - u[(i, j, 1)];
            u[(i, j, g.l + 1)] = 2.0 * r_top[idx] - u[(i, j, g.l)];
        }
    }
}

/// Enriched momentum step at time `t_np1` (where the profile is frozen).
pub fn momentum_step(
    st: &SchemeState,
    cfg: &SimConfig,
    g: &GridSpec,
    solver: &SpectralSolver,
    f_np1: &VectorField,
    t_np1: f64,
) -> Result<(MomentumSolution, EnrichmentData)> {
    let prof = profile_integrals(cfg.eps, t_np1, g.dz)?;
    let row = near_wall_row(cfg, g, &prof);
    let rhs = momentum_rhs(st, cfg, g, f_np1);
    let tangential: Vec<_> =
        rhs.comps[..2].par_iter().map(|b| solve_tangential(solver, cfg, &row, b)).collect::<Result<_>>()?;
    let (w, w_res, w_it) = helmholtz_solve(solver, cfg, &rhs.comps[2])?;
    let mut w = w;
    fill_periodic_ghosts(&mut w);
    fill_dirichlet_wall_ghosts(&mut w);

    let mut residual = w_res;
    let limit = cfg.lin_tol.max(DIRECT_RESIDUAL_FLOOR);
    let mut comps = Vec::with_capacity(3);
    let mut data = EnrichmentData { r_bottom: [vec![], vec![]], r_top: [vec![], vec![]], profile: Some(prof) };
    for (c, (u, rb, rt, res)) in tangential.into_iter().enumerate() {
        if !(res <= limit) {
            return Err(LayerError::LinearSolve { residual: res, iterations: 1 });
        }
        residual = residual.max(res);
        comps.push(u);
        data.r_bottom[c] = rb;
        data.r_top[c] = rt;
    }
    comps.push(w);
    let comps: [CellField; 3] = comps.try_into().expect("three components");
    Ok((MomentumSolution { u: VectorField { comps }, residual, iterations: w_it.max(1) }, data))
}

/// Enriched scheme on the manufactured problem with zero initial velocity.
pub fn nfvm_run(cfg: &SimConfig, g: &GridSpec) -> Result<crate::cfvm::RunResult> {
    let cfg = SimConfig { scheme: crate::cfvm::Scheme::Nfvm, ..*cfg };
    crate::cfvm::run_manufactured(&cfg, g)
}
