//! Collocated finite-volume splitting scheme: BDF2 momentum step with
//! extrapolated rotation and pressure, momentum-interpolated face fluxes,
//! pressure-increment Poisson solve and pressure update.
//!
//! The time loop is shared with the enriched scheme, which only swaps the
//! momentum solve.

use log::{debug, warn};
use rayon::prelude::*;

use crate::error::{LayerError, Result};
use crate::grid::{
    fill_neumann_wall_ghosts, fill_periodic_ghosts, fill_pressure_ghosts, fill_velocity_ghosts, CellField, FaceFluxes,
    GridSpec, VectorField,
};
use crate::linsolve::{
    apply_helmholtz_dirichlet, apply_neg_laplacian_neumann, conjugate_gradient, relative_residual, LinearSolverKind,
    SpectralSolver,
};
use crate::mms::{pressure_l2_error, velocity_l2_error, ExactSolution};
use crate::nfvm::{self, EnrichmentData};
use crate::operators::{divergence, grad_pressure, rotate, RotationParams};

/// Velocity norm beyond which a run is declared divergent.
pub const BLOWUP_NORM: f64 = 1e30;

/// Smallest residual a direct solve is held to, whatever `lin_tol` says.
pub(crate) const DIRECT_RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Cfvm,
    Nfvm,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Cfvm => "cfvm",
            Scheme::Nfvm => "nfvm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cfvm" => Some(Scheme::Cfvm),
            "nfvm" => Some(Scheme::Nfvm),
            _ => None,
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Run parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub eps: f64,
    pub alpha: f64,
    pub dt: f64,
    pub t_end: f64,
    pub theta: f64,
    pub scheme: Scheme,
    pub lin_tol: f64,
    pub lin_maxit: usize,
    pub solver: LinearSolverKind,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            eps: 1e-2,
            alpha: 1.0,
            dt: 1e-2,
            t_end: 1.0,
            theta: 1.0,
            scheme: Scheme::Nfvm,
            lin_tol: 1e-10,
            lin_maxit: 5000,
            solver: LinearSolverKind::Spectral,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(LayerError::InvalidParameter { name, reason });
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps", format!("must be positive and finite, got {}", self.eps));
        }
        if !self.alpha.is_finite() {
            return bad("alpha", format!("must be finite, got {}", self.alpha));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt", format!("must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= self.dt * (1.0 - 1e-12)) {
            return bad("t_end", format!("must be at least dt = {}, got {}", self.dt, self.t_end));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return bad("theta", format!("must be non-negative, got {}", self.theta));
        }
        if !(self.lin_tol > 0.0 && self.lin_tol.is_finite()) {
            return bad("lin_tol", format!("must be positive, got {}", self.lin_tol));
        }
        if self.lin_maxit == 0 {
            return bad("lin_maxit", "must be at least 1".into());
        }
        Ok(())
    }

    /// Number of steps to reach `t_end` (rounded to the nearest integer).
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }

    pub fn rotation(&self) -> RotationParams {
        RotationParams { alpha: self.alpha }
    }
}

/// Flux-correction denominator: cell volume over `2 dt / 3` plus the diagonal
/// viscous weights of the six neighbours.
pub fn coefficient_a(cfg: &SimConfig, g: &GridSpec) -> f64 {
    let (dx, dy, dz) = (g.dx, g.dy, g.dz);
    3.0 * dx * dy * dz / (2.0 * cfg.dt) + 2.0 * cfg.eps * (dx * dy / dz + dy * dz / dx + dx * dz / dy)
}

/// Histories carried across steps. Stored fields have their ghosts filled.
#[derive(Debug, Clone)]
pub struct SchemeState {
    pub u_n: VectorField,
    pub u_nm1: VectorField,
    pub p_n: CellField,
    pub p_nm1: CellField,
    pub flux_n: FaceFluxes,
    pub flux_nm1: FaceFluxes,
    pub step_index: usize,
    pub time: f64,
    /// Wall nodes of the enriched scheme (absent for the classical one).
    pub enrichment: Option<EnrichmentData>,
}

/// Initial histories: `u^{-1} = u^0`, zero pressures, fluxes of `u^0`.
pub fn startup(cfg: &SimConfig, g: &GridSpec, u0: &VectorField) -> SchemeState {
    let mut u = u0.clone();
    fill_velocity_ghosts(&mut u);
    let mut p = CellField::zeros(g);
    fill_pressure_ghosts(&mut p);
    let flux = interpolate_fluxes(&u, &p, cfg, g);
    SchemeState {
        u_nm1: u.clone(),
        u_n: u,
        p_nm1: p.clone(),
        p_n: p,
        flux_nm1: flux.clone(),
        flux_n: flux,
        step_index: 0,
        time: 0.0,
        enrichment: match cfg.scheme {
            Scheme::Cfvm => None,
            Scheme::Nfvm => Some(EnrichmentData::from_velocity(u0)),
        },
    }
}

/// Right-hand side of the momentum step: forcing, BDF2 history, extrapolated
/// rotation and extrapolated pressure gradient.
pub fn momentum_rhs(st: &SchemeState, cfg: &SimConfig, g: &GridSpec, f_np1: &VectorField) -> VectorField {
    let u_ext = VectorField::combine(2.0, &st.u_n, -1.0, &st.u_nm1);
    let rot = rotate(&u_ext, cfg.rotation());
    let mut p_ext = CellField::combine(2.0, &st.p_n, -1.0, &st.p_nm1);
    fill_pressure_ghosts(&mut p_ext);
    let gp = grad_pressure(&p_ext, g);
    let inv = 1.0 / (2.0 * cfg.dt);
    let mut out = VectorField::zeros(g);
    for c in 0..3 {
        for idx in g.interior() {
            out.comps[c][idx] = f_np1.comps[c][idx] + (4.0 * st.u_n.comps[c][idx] - st.u_nm1.comps[c][idx]) * inv
                - rot.comps[c][idx]
                - gp.comps[c][idx];
        }
    }
    out
}

/// Outcome of one implicit velocity solve.
#[derive(Debug, Clone)]
pub struct MomentumSolution {
    pub u: VectorField,
    /// Largest relative residual over the components.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `(3 / (2 dt)) u - eps lap u = rhs` for one component with no-slip walls.
pub(crate) fn helmholtz_solve(
    solver: &SpectralSolver,
    cfg: &SimConfig,
    rhs: &CellField,
) -> Result<(CellField, f64, usize)> {
    let shift = 1.5 / cfg.dt;
    match cfg.solver {
        LinearSolverKind::Spectral => {
            let u = solver.helmholtz_dirichlet(rhs, shift, cfg.eps)?;
            let res = relative_residual(&apply_helmholtz_dirichlet(&u, shift, cfg.eps), rhs);
            if !(res <= cfg.lin_tol.max(DIRECT_RESIDUAL_FLOOR)) {
                return Err(LayerError::LinearSolve { residual: res, iterations: 1 });
            }
            Ok((u, res, 1))
        }
        LinearSolverKind::ConjugateGradient => {
            let sol = conjugate_gradient(
                |x| apply_helmholtz_dirichlet(x, shift, cfg.eps),
                rhs,
                cfg.lin_tol,
                cfg.lin_maxit,
                false,
            )?;
            Ok((sol.x, sol.relative_residual, sol.iterations))
        }
    }
}

/// Classical momentum step; all three components carry no-slip ghosts.
pub fn momentum_step(
    st: &SchemeState,
    cfg: &SimConfig,
    g: &GridSpec,
    solver: &SpectralSolver,
    f_np1: &VectorField,
) -> Result<MomentumSolution> {
    let rhs = momentum_rhs(st, cfg, g, f_np1);
    let solved: Vec<(CellField, f64, usize)> =
        rhs.comps.par_iter().map(|b| helmholtz_solve(solver, cfg, b)).collect::<Result<_>>()?;
    let mut it = solved.into_iter();
    let (mut residual, mut iterations) = (0.0f64, 0usize);
    let mut next = || {
        let (c, r, n) = it.next().expect("three components");
        residual = residual.max(r);
        iterations = iterations.max(n);
        c
    };
    let mut u = VectorField { comps: [next(), next(), next()] };
    fill_velocity_ghosts(&mut u);
    Ok(MomentumSolution { u, residual, iterations })
}

/// Momentum-interpolated face fluxes with a third-difference pressure
/// correction weighted by `theta * area / (4 a)`. The correction uses periodic
/// images in x, y and the compact pressure ghosts in z; wall faces are zero.
pub fn interpolate_fluxes(u: &VectorField, p: &CellField, cfg: &SimConfig, g: &GridSpec) -> FaceFluxes {
    let mut p = p.clone();
    fill_pressure_ghosts(&mut p);
    let a = coefficient_a(cfg, g);
    let (cu, cv, cw) =
        (cfg.theta * g.dy * g.dz / (4.0 * a), cfg.theta * g.dx * g.dz / (4.0 * a), cfg.theta * g.dx * g.dy / (4.0 * a));
    let mut fl = FaceFluxes::zeros(g);
    let l = g.l;
    for (i, j, k) in g.interior() {
        let (si, sj) = (i as isize, j as isize);
        let px = |o: isize| p[(g.wrap_x(si + o), j, k)];
        let py = |o: isize| p[(i, g.wrap_y(sj + o), k)];
        let ip = g.wrap_x(si + 1);
        let jp = g.wrap_y(sj + 1);
        fl.fu[(i, j, k)] =
            0.5 * (u.comps[0][(i, j, k)] + u.comps[0][(ip, j, k)]) + cu * (px(2) - 3.0 * px(1) + 3.0 * px(0) - px(-1));
        fl.fv[(i, j, k)] =
            0.5 * (u.comps[1][(i, j, k)] + u.comps[1][(i, jp, k)]) + cv * (py(2) - 3.0 * py(1) + 3.0 * py(0) - py(-1));
        if k < l {
            // p at k + 2 = L + 1 and k - 1 = 0 come from the compact ghosts
            let pz = |kk: usize| p[(i, j, kk)];
            fl.fw[(i, j, k)] = 0.5 * (u.comps[2][(i, j, k)] + u.comps[2][(i, j, k + 1)])
                + cw * (pz(k + 2) - 3.0 * pz(k + 1) + 3.0 * pz(k) - pz(k - 1));
        }
    }
    fl.close_boundaries();
    fl
}

/// Pressure-increment solve and its diagnostics.
#[derive(Debug, Clone)]
pub struct PsiSolution {
    pub psi: CellField,
    /// Mean of the right-hand side before it was removed.
    pub rhs_mean: f64,
    /// Set when the mean exceeded `1e3 * tol`.
    pub compatibility_warning: bool,
    pub residual: f64,
}

/// Solves `lap psi = div((3 F^{n+1} - 4 F^n + F^{n-1}) / (2 dt))` with Neumann
/// walls; the right-hand side mean is removed and `psi` has zero mean.
pub fn solve_psi(
    f_np1: &FaceFluxes,
    f_n: &FaceFluxes,
    f_nm1: &FaceFluxes,
    cfg: &SimConfig,
    g: &GridSpec,
    solver: &SpectralSolver,
) -> Result<PsiSolution> {
    let inv = 1.0 / (2.0 * cfg.dt);
    let combo = FaceFluxes::combine(3.0 * inv, f_np1, -4.0 * inv, f_n);
    let combo = FaceFluxes::combine(1.0, &combo, inv, f_nm1);
    let rhs = divergence(&combo, g);
    solve_psi_from_rhs(rhs, cfg, solver)
}

/// The Poisson stage for an explicit right-hand side.
pub fn solve_psi_from_rhs(mut rhs: CellField, cfg: &SimConfig, solver: &SpectralSolver) -> Result<PsiSolution> {
    // residuals are measured against the source as given, so that a source
    // which is pure mean does not turn round-off into a relative failure
    let scale = rhs.interior_sum_sq().sqrt();
    let rhs_mean = rhs.remove_mean();
    let compatibility_warning = rhs_mean.abs() > 1e3 * cfg.lin_tol;
    if compatibility_warning {
        warn!("pressure-increment source has mean {rhs_mean:.3e}; removed before solving");
    }
    let mut psi = match cfg.solver {
        LinearSolverKind::Spectral => solver.poisson_neumann(&rhs)?,
        LinearSolverKind::ConjugateGradient => {
            let neg = CellField::combine(-1.0, &rhs, 0.0, &rhs);
            conjugate_gradient(apply_neg_laplacian_neumann, &neg, cfg.lin_tol, cfg.lin_maxit, true)?.x
        }
    };
    let neg_lap = apply_neg_laplacian_neumann(&psi);
    let abs_res = neumann_residual(&neg_lap, &rhs);
    let residual = if scale > 0.0 { abs_res / scale } else { abs_res };
    let limit = match cfg.solver {
        LinearSolverKind::Spectral => cfg.lin_tol.max(DIRECT_RESIDUAL_FLOOR),
        LinearSolverKind::ConjugateGradient => cfg.lin_tol * 10.0,
    };
    if !(residual <= limit) {
        return Err(LayerError::LinearSolve { residual, iterations: 1 });
    }
    fill_periodic_ghosts(&mut psi);
    fill_neumann_wall_ghosts(&mut psi);
    Ok(PsiSolution { psi, rhs_mean, compatibility_warning, residual })
}

/// `|a + b|` over the interior, i.e. the residual of `-lap psi = -rhs`.
fn neumann_residual(neg_lap: &CellField, rhs: &CellField) -> f64 {
    let g = *rhs.grid();
    g.interior().map(|c| (neg_lap[c] + rhs[c]).powi(2)).sum::<f64>().sqrt()
}

/// `p^{n+1} = psi + 2 p^n - p^{n-1} - eps div F^{n+1}`, re-centred to zero mean.
pub fn update_pressure(
    psi: &CellField,
    p_n: &CellField,
    p_nm1: &CellField,
    f_np1: &FaceFluxes,
    cfg: &SimConfig,
    g: &GridSpec,
) -> CellField {
    let div = divergence(f_np1, g);
    let mut p = CellField::zeros(g);
    for c in g.interior() {
        p[c] = psi[c] + 2.0 * p_n[c] - p_nm1[c] - cfg.eps * div[c];
    }
    p.remove_mean();
    fill_pressure_ghosts(&mut p);
    p
}

/// Per-step record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    pub velocity_norm: f64,
    pub divergence_norm: f64,
    pub momentum_residual: f64,
    pub psi_rhs_mean: f64,
    pub psi_warning: bool,
    pub velocity_error: Option<f64>,
    pub pressure_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunStatus {
    Completed,
    /// Non-finite values or a velocity norm above [`BLOWUP_NORM`] at `step`.
    BlowUp {
        step: usize,
        time: f64,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: SchemeState,
    pub status: RunStatus,
    pub history: Vec<StepDiagnostics>,
}

impl RunResult {
    pub fn blew_up(&self) -> bool {
        matches!(self.status, RunStatus::BlowUp { .. })
    }

    /// Diagnostics of the last step whose fields were finite.
    pub fn last_finite(&self) -> Option<&StepDiagnostics> {
        self.history.iter().rev().find(|d| d.velocity_norm.is_finite() && d.velocity_norm <= BLOWUP_NORM)
    }

    pub fn final_velocity_error(&self) -> Option<f64> {
        self.history.last().and_then(|d| d.velocity_error)
    }

    pub fn final_pressure_error(&self) -> Option<f64> {
        self.history.last().and_then(|d| d.pressure_error)
    }
}

/// One full step of either scheme; `state` is advanced in place.
pub fn advance(
    state: &mut SchemeState,
    cfg: &SimConfig,
    g: &GridSpec,
    solver: &SpectralSolver,
    f_np1: &VectorField,
) -> Result<StepDiagnostics> {
    let t_np1 = state.time + cfg.dt;
    let mom = match cfg.scheme {
        Scheme::Cfvm => momentum_step(state, cfg, g, solver, f_np1)?,
        Scheme::Nfvm => {
            let (sol, data) = nfvm::momentum_step(state, cfg, g, solver, f_np1, t_np1)?;
            state.enrichment = Some(data);
            sol
        }
    };
    let flux = interpolate_fluxes(&mom.u, &state.p_n, cfg, g);
    let psi = solve_psi(&flux, &state.flux_n, &state.flux_nm1, cfg, g, solver)?;
    let p = update_pressure(&psi.psi, &state.p_n, &state.p_nm1, &flux, cfg, g);
    let divergence_norm = divergence(&flux, g).l2_norm();

    state.u_nm1 = std::mem::replace(&mut state.u_n, mom.u);
    state.p_nm1 = std::mem::replace(&mut state.p_n, p);
    state.flux_nm1 = std::mem::replace(&mut state.flux_n, flux);
    state.step_index += 1;
    state.time = state.step_index as f64 * cfg.dt;

    Ok(StepDiagnostics {
        step: state.step_index,
        time: state.time,
        velocity_norm: state.u_n.l2_norm(),
        divergence_norm,
        momentum_residual: mom.residual,
        psi_rhs_mean: psi.rhs_mean,
        psi_warning: psi.compatibility_warning,
        velocity_error: None,
        pressure_error: None,
    })
}

/// Runs the scheme selected by `cfg.scheme` from `u0` to `t_end`. `forcing(t)`
/// returns the cell-centred forcing at time `t`; errors against `exact` are
/// recorded every step when it is given.
pub fn run_scheme(
    cfg: &SimConfig,
    g: &GridSpec,
    u0: &VectorField,
    forcing: &(dyn Fn(f64) -> VectorField + Sync),
    exact: Option<&ExactSolution>,
) -> Result<RunResult> {
    cfg.validate()?;
    let solver = SpectralSolver::new(g);
    let mut state = startup(cfg, g, u0);
    let mut history = Vec::with_capacity(cfg.n_steps());
    for _ in 0..cfg.n_steps() {
        let t_np1 = (state.step_index + 1) as f64 * cfg.dt;
        let f = forcing(t_np1);
        let step = state.step_index + 1;
        let mut diag = match advance(&mut state, cfg, g, &solver, &f) {
            Ok(d) => d,
            Err(LayerError::LinearSolve { residual, .. }) if !residual.is_finite() => {
                // a non-finite system is the divergence we are watching for
                return Ok(RunResult { state, status: RunStatus::BlowUp { step, time: t_np1 }, history });
            }
            Err(e) => return Err(LayerError::Step { step, source: Box::new(e) }),
        };
        let finite = state.u_n.all_finite() && state.p_n.all_finite();
        if let (Some(es), true) = (exact, finite) {
            diag.velocity_error = Some(velocity_l2_error(&state.u_n, es, state.time));
            diag.pressure_error = Some(pressure_l2_error(&state.p_n, es, state.time));
        }
        debug!(
            "{} step {} t={:.4} |u|={:.4e} err={:?}",
            cfg.scheme, diag.step, diag.time, diag.velocity_norm, diag.velocity_error
        );
        let blown = !finite || !(diag.velocity_norm <= BLOWUP_NORM);
        history.push(diag);
        if blown {
            return Ok(RunResult { state, status: RunStatus::BlowUp { step, time: t_np1 }, history });
        }
    }
    Ok(RunResult { state, status: RunStatus::Completed, history })
}

/// Classical scheme on the manufactured problem with zero initial velocity.
pub fn cfvm_run(cfg: &SimConfig, g: &GridSpec) -> Result<RunResult> {
    let cfg = SimConfig { scheme: Scheme::Cfvm, ..*cfg };
    run_manufactured(&cfg, g)
}

/// Manufactured problem for whichever scheme `cfg` selects.
pub fn run_manufactured(cfg: &SimConfig, g: &GridSpec) -> Result<RunResult> {
    cfg.validate()?;
    let es = ExactSolution::new(cfg.eps, cfg.alpha)?;
    let u0 = es.velocity_field(g, 0.0);
    let forcing = |t: f64| es.forcing_field(g, t);
    run_scheme(cfg, g, &u0, &forcing, Some(&es))
}
