//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden. The process exits 0 so the
//! workspace test run stays usable; set `ACCEPTANCE_STRICT=1` to exit 1 when
//! any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use layerfv::cfvm::{advance, startup};
use layerfv::correctors::{BoundaryTrace, CorrectorEval, ScalingQuantity};
use layerfv::grid::{fill_neumann_wall_ghosts, fill_periodic_ghosts, fill_pressure_ghosts, fill_velocity_ghosts};
use layerfv::linsolve::SpectralSolver;
use layerfv::mms::{self, pressure_l2_error, pressure_l2_error_raw, velocity_l2_error};
use layerfv::nfvm::EnrichmentData;
use layerfv::operators::{divergence, grad_pressure, laplacian, periodic_symbol, rotate, RotationParams};
use layerfv::report::{self, ExperimentRow};
use layerfv::{CellField, ExactSolution, FaceFluxes, Scheme, SimConfig, VectorField};
use rand::{rngs::StdRng, Rng, SeedableRng};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn within_factor(v: Option<f64>, reference: f64, factor: f64) -> bool {
    v.is_some_and(|v| v >= reference / factor && v <= reference * factor)
}

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "BLOWUP".into(), |x| format!("{x:.4e}"))
}

fn run(n: usize, eps: f64, scheme: Scheme) -> ExperimentRow {
    let cfg = SimConfig { eps, scheme, ..SimConfig::default() };
    report::run_one(n, &cfg).expect("valid configuration")
}

fn sweep(grids: &[usize], eps: f64) -> Vec<ExperimentRow> {
    report::run_table(grids, &[eps], &[Scheme::Cfvm, Scheme::Nfvm], &SimConfig::default(), None).expect("valid sweep")
}

fn pick(rows: &[ExperimentRow], n: usize, scheme: Scheme) -> &ExperimentRow {
    rows.iter().find(|r| r.n == n && r.scheme == scheme).expect("row present")
}

fn stability_contrast() -> Outcome {
    let start = Instant::now();
    let rows = sweep(&[10], 1e-6);
    let (c, nf) = (pick(&rows, 10, Scheme::Cfvm), pick(&rows, 10, Scheme::Nfvm));
    let cfvm_ok = c.blew_up() || c.vel_l2.is_some_and(|v| v > 1e3);
    let nfvm_ok = nf.vel_l2.is_some_and(|v| (0.015..=0.135).contains(&v));
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        passed: cfvm_ok && nfvm_ok && secs < 60.0,
        detail: format!(
            "eps=1e-6 N=10: CFVM {} (need > 1e3 or BLOWUP: {}), NFVM {} (need [0.015, 0.135]: {}), {secs:.1}s",
            show(c.vel_l2),
            ok(cfvm_ok),
            show(nf.vel_l2),
            ok(nfvm_ok)
        ),
    }
}

fn extreme_eps() -> Outcome {
    let start = Instant::now();
    let grids = [10, 20, 30];
    let reference = [0.04490, 0.01032, 0.00443];
    let rows = sweep(&grids, 1e-7);
    let nfvm: Vec<Option<f64>> = grids.iter().map(|&n| pick(&rows, n, Scheme::Nfvm).vel_l2).collect();
    let cfvm: Vec<Option<f64>> = grids.iter().map(|&n| pick(&rows, n, Scheme::Cfvm).vel_l2).collect();
    let nfvm_band = nfvm.iter().zip(reference).all(|(v, r)| within_factor(*v, r, 3.0));
    let monotone = nfvm.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if b < a));
    let cfvm_ok = cfvm.iter().all(|v| v.is_none_or(|x| x > 1e10));
    let secs = start.elapsed().as_secs_f64();
    let list = |v: &[Option<f64>]| v.iter().map(|x| show(*x)).collect::<Vec<_>>().join(", ");
    Outcome {
        passed: nfvm_band && monotone && cfvm_ok && secs < 600.0,
        detail: format!(
            "eps=1e-7 N=10,20,30: NFVM [{}] (x3 band: {}, decreasing: {}), CFVM [{}] (need > 1e10 or BLOWUP: {}), {secs:.1}s",
            list(&nfvm),
            ok(nfvm_band),
            ok(monotone),
            list(&cfvm),
            ok(cfvm_ok)
        ),
    }
}

fn moderate_eps() -> Outcome {
    let rows = sweep(&[20], 1e-2);
    let (c, nf) = (pick(&rows, 20, Scheme::Cfvm).vel_l2, pick(&rows, 20, Scheme::Nfvm).vel_l2);
    let band = within_factor(c, 0.00634, 3.0);
    let wins = matches!((c, nf), (Some(a), Some(b)) if a < b);
    Outcome {
        passed: band && wins,
        detail: format!(
            "eps=1e-2 N=20: CFVM {} (x3 of 0.00634: {}), NFVM {} (CFVM smaller: {})",
            show(c),
            ok(band),
            show(nf),
            ok(wins)
        ),
    }
}

fn pressure_table() -> Outcome {
    let a = run(20, 1e-5, Scheme::Nfvm).p_l2;
    let b = run(30, 1e-6, Scheme::Nfvm).p_l2;
    let (oka, okb) = (within_factor(a, 0.00539, 3.0), within_factor(b, 0.00238, 3.0));
    Outcome {
        passed: oka && okb,
        detail: format!(
            "NFVM pressure: eps=1e-5 N=20 {} (x3 of 0.00539: {}), eps=1e-6 N=30 {} (x3 of 0.00238: {})",
            show(a),
            ok(oka),
            show(b),
            ok(okb)
        ),
    }
}

fn corrector_pde_residual() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(11);
    let g = BoundaryTrace::new(|t, x, _| t * (1.0 + t) * x.cos(), |t, _, y| (3.0 * t).sin() * (1.0 + y.sin()));
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, 5.0] {
        let ce = CorrectorEval::with_tolerance(1e-4, alpha, 1e-13).expect("valid evaluator");
        for _ in 0..10 {
            let t = rng.random_range(0.2..1.0);
            let zbar = rng.random_range(0.1..3.0);
            let (x, y) = (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI));
            let r = ce.tangential_pde_residual(&g, t, x, y, zbar, 2e-3).expect("quadrature converges");
            worst = worst.max(r.0.abs()).max(r.1.abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        passed: worst < 5e-7 && secs < 60.0,
        detail: format!("30 points, alpha in {{0, 1, 5}}: worst residual {worst:.3e} (< 5e-7), {secs:.1}s"),
    }
}

fn closed_form_oracle() -> Outcome {
    let ce = CorrectorEval::with_tolerance(1.0, 0.0, 1e-12).expect("valid evaluator");
    let g = BoundaryTrace::constant(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for t in [0.1, 0.5, 2.0] {
        for z in [0.01, 0.3, 1.5] {
            let (p1, p2) = ce.exact_tangential_corrector(&g, t, 0.0, 0.0, z).expect("quadrature converges");
            worst = worst.max((p1 + libm::erfc(z / (2.0 * t.sqrt()))).abs()).max(p2.abs());
        }
    }
    Outcome { passed: worst < 1e-8, detail: format!("9 (t, z) pairs: worst deviation from -erfc {worst:.3e} (< 1e-8)") }
}

fn scaling_laws() -> Outcome {
    let start = Instant::now();
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let bands = [
        (ScalingQuantity::Dphi3DtL2, 0.65, 0.85),
        (ScalingQuantity::ZEpsD2phi3L2, 1.15, 1.35),
        (ScalingQuantity::Phi3OverSqrtEpsL2, 0.15, 0.35),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (q, lo, hi) in bands {
        let s = report::run_scaling_study(&eps, q, 1.0, 1.0).expect("scaling study");
        let inside = (lo..=hi).contains(&s.slope);
        passed &= inside;
        parts.push(format!("{} {:.3} in [{lo}, {hi}]: {}", q.name(), s.slope, ok(inside)));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome { passed: passed && secs < 120.0, detail: format!("{}, {secs:.1}s", parts.join("; ")) }
}

/// Fourth-order differences of the exact fields substituted into the momentum
/// equation, minus the forcing.
fn forcing_residual(es: &ExactSolution, x: f64, y: f64, z: f64, t: f64) -> [f64; 3] {
    let h = 1e-4;
    let e = |x: f64, y: f64, z: f64, t: f64| {
        let v = es.eval(x, y, z, t);
        [v.u, v.v, v.w, v.p]
    };
    let d1 = |f: &dyn Fn(f64) -> [f64; 4], c: usize, s: f64| {
        (f(s - 2.0 * h)[c] - 8.0 * f(s - h)[c] + 8.0 * f(s + h)[c] - f(s + 2.0 * h)[c]) / (12.0 * h)
    };
    let d2 = |f: &dyn Fn(f64) -> [f64; 4], c: usize, s: f64| {
        (-f(s - 2.0 * h)[c] + 16.0 * f(s - h)[c] - 30.0 * f(s)[c] + 16.0 * f(s + h)[c] - f(s + 2.0 * h)[c])
            / (12.0 * h * h)
    };
    let fx = |s: f64| e(s, y, z, t);
    let fy = |s: f64| e(x, s, z, t);
    let fz = |s: f64| e(x, y, s, t);
    let ft = |s: f64| e(x, y, z, s);
    let c = e(x, y, z, t);
    let grad_p = [d1(&fx, 3, x), d1(&fy, 3, y), d1(&fz, 3, z)];
    let rot = [-es.alpha * c[1], es.alpha * c[0], 0.0];
    let f = es.forcing(x, y, z, t);
    std::array::from_fn(|comp| {
        let lap = d2(&fx, comp, x) + d2(&fy, comp, y) + d2(&fz, comp, z);
        d1(&ft, comp, t) - es.eps * lap + rot[comp] + grad_p[comp] - f[comp]
    })
}

fn manufactured_gate() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for eps in [1e-2, 1e-4] {
        let es = ExactSolution::new(eps, 1.0).expect("valid");
        for _ in 0..20 {
            let (x, y) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let (z, t) = (rng.random_range(0.01..0.99), rng.random_range(0.1..1.0));
            worst = forcing_residual(&es, x, y, z, t).iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    let g = mms::grid(12).expect("grid");
    let es = ExactSolution::new(1e-3, 1.0).expect("valid");
    let t = 0.6;
    let sampled = [
        velocity_l2_error(&es.velocity_field(&g, t), &es, t),
        pressure_l2_error(&es.pressure_field(&g, t), &es, t),
        pressure_l2_error_raw(&es.pressure_field(&g, t), &es, t),
    ];
    let zero = sampled.iter().all(|v| *v < 1e-14);
    Outcome {
        passed: worst < 1e-6 && zero,
        detail: format!(
            "forcing residual worst {worst:.3e} over 40 points (< 1e-6); sampled-field errors {:.1e}, {:.1e}, {:.1e} (round-off: {})",
            sampled[0],
            sampled[1],
            sampled[2],
            ok(zero)
        ),
    }
}

fn scheme_consistency() -> Outcome {
    // eps t / h^2 = 20 * 1 / 0.01 = 2000
    let (n, eps, t0) = (10, 20.0, 1.0);
    let g = mms::grid(n).expect("grid");
    let es = ExactSolution::new(eps, 1.0).expect("valid");
    let step = |scheme: Scheme| {
        let cfg = SimConfig { eps, scheme, ..SimConfig::default() };
        let mut st = startup(&cfg, &g, &es.velocity_field(&g, t0));
        st.u_nm1 = es.velocity_field(&g, t0 - cfg.dt);
        fill_velocity_ghosts(&mut st.u_nm1);
        st.p_n = es.pressure_field(&g, t0);
        st.p_nm1 = es.pressure_field(&g, t0 - cfg.dt);
        fill_pressure_ghosts(&mut st.p_n);
        fill_pressure_ghosts(&mut st.p_nm1);
        st.step_index = (t0 / cfg.dt).round() as usize;
        st.time = t0;
        if scheme == Scheme::Nfvm {
            st.enrichment = Some(EnrichmentData::from_velocity(&st.u_n));
        }
        let solver = SpectralSolver::new(&g);
        advance(&mut st, &cfg, &g, &solver, &es.forcing_field(&g, t0 + cfg.dt)).expect("step succeeds");
        st.u_n
    };
    let (a, b) = (step(Scheme::Cfvm), step(Scheme::Nfvm));
    let diff = VectorField::combine(1.0, &a, -1.0, &b).max_abs();
    Outcome {
        passed: diff < 1e-8,
        detail: format!(
            "eps t/h^2 = 2e3, one step from identical history: max |u_cfvm - u_nfvm| = {diff:.3e} (< 1e-8; |u| = {:.3e})",
            a.max_abs()
        ),
    }
}

fn operator_suite() -> Outcome {
    let tol = 1e-13;
    let g = layerfv::build_grid(12, 10, 8).expect("grid");

    let mut c = CellField::constant(&g, 3.5);
    fill_pressure_ghosts(&mut c);
    let mut fl = FaceFluxes::zeros(&g);
    for f in [&mut fl.fu, &mut fl.fv, &mut fl.fw] {
        f.map_inplace(|_| 3.5);
    }
    let constant = laplacian(&c, &g)
        .interior_max_abs()
        .max(grad_pressure(&c, &g).max_abs())
        .max(divergence(&fl, &g).interior_max_abs())
        / 3.5;

    // x/y Fourier mode, constant in z with mirror ghosts
    let (px, py) = (2, 3);
    let mut m = CellField::from_fn(&g, |x, y, _| {
        (2.0 * PI * px as f64 * x / g.lx).cos() * (2.0 * PI * py as f64 * y / g.ly).cos()
    });
    fill_periodic_ghosts(&mut m);
    fill_neumann_wall_ghosts(&mut m);
    let sym = periodic_symbol(px, g.m, g.dx) + periodic_symbol(py, g.n, g.dy);
    let lap = laplacian(&m, &g);
    let eigen = g.interior().map(|c| (lap[c] - sym * m[c]).abs()).fold(0.0, f64::max) / sym.abs();

    // wall ghost against the continued polynomial, as a function of the cell index
    let ghost_gap = |coef: [f64; 3]| {
        let poly = |k: f64| coef[0] + coef[1] * k + coef[2] * k * k;
        let mut p = CellField::from_fn(&g, |_, _, z| poly(z / g.dz + 0.5));
        fill_pressure_ghosts(&mut p);
        let scale = poly(g.l as f64 + 1.0).abs().max(1.0);
        let bottom = (p[(3, 3, 0)] - poly(0.0)).abs();
        let top = (p[(3, 3, g.l + 1)] - poly(g.l as f64 + 1.0)).abs();
        bottom.max(top) / scale
    };
    let linear = ghost_gap([1.0, -0.75, 0.0]);
    let quadratic = ghost_gap([1.0, -0.75, 0.5]);

    let mut rng = StdRng::seed_from_u64(5);
    let mut v = VectorField::zeros(&g);
    for c in g.interior() {
        for comp in 0..3 {
            v.comps[comp][c] = rng.random_range(-1.0..1.0);
        }
    }
    let alpha = 1.7;
    let rv = rotate(&v, RotationParams { alpha });
    let dot: f64 = (0..3).map(|c| rv.comps[c].interior_dot(&v.comps[c])).sum();
    let vv: f64 = (0..3).map(|c| v.comps[c].interior_sum_sq()).sum();
    let skew = dot.abs() / (alpha * vv);

    let parts = [
        ("constants", constant),
        ("eigen-symbols", eigen),
        ("extrapolation on linears", linear),
        ("extrapolation on quadratics", quadratic),
        ("rotation skewness", skew),
    ];
    Outcome {
        passed: parts.iter().all(|(_, e)| *e < tol),
        detail: parts.iter().map(|(n, e)| format!("{n} {e:.1e} ({})", ok(*e < tol))).collect::<Vec<_>>().join("; "),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "no"
    }
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("stability contrast", stability_contrast),
        ("extreme-eps robustness", extreme_eps),
        ("moderate-eps sanity", moderate_eps),
        ("pressure table", pressure_table),
        ("corrector PDE residual", corrector_pde_residual),
        ("closed-form oracle", closed_form_oracle),
        ("scaling laws", scaling_laws),
        ("manufactured-solution gate", manufactured_gate),
        ("scheme consistency", scheme_consistency),
        ("discrete operator suite", operator_suite),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failures += 1;
        }
        println!("{} criterion {} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
