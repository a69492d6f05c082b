//! Boundary-layer correctors of the rotating heat problem.
//!
//! The exact correctors are Duhamel integrals of the heat kernel against the
//! wall trace, rotated by `alpha (t - tau)`. Both the tangential and the
//! normal components are evaluated by adaptive quadrature after a change of
//! variable that removes the `(t - tau)^{-1/2}` / `(t - tau)^{-3/2}` endpoint
//! behaviour:
//!
//! * tangential: `sigma = z / (2 sqrt(eps (t - tau)))`, which turns the kernel
//!   into `exp(-sigma^2) / sqrt(pi)` on `[z / (2 sqrt(eps t)), inf)`;
//! * normal: `w = sqrt(t - tau)`, which leaves the smooth factor
//!   `exp(-z^2 / (4 eps w^2))` on the compact interval `[0, sqrt(t)]`.
//!
//! The cheap exponential profile used by the enriched scheme lives here too.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{LayerError, Result};
use crate::quadrature::{integrate_with_breaks, QuadSettings};

type ScalarFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Fundamental solution of the 1D heat equation.
pub fn heat_kernel(t: f64, z: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(LayerError::Domain(format!("heat kernel needs t > 0, got {t}")));
    }
    Ok((-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt())
}

/// Tangential wall trace `g = (g1, g2, 0)` as functions of `(t, x, y)`.
#[derive(Clone)]
pub struct BoundaryTrace {
    g1: ScalarFn,
    g2: ScalarFn,
}

impl std::fmt::Debug for BoundaryTrace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("BoundaryTrace")
    }
}

impl BoundaryTrace {
    pub fn new(
        g1: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { g1: Arc::new(g1), g2: Arc::new(g2) }
    }

    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0, |_, _, _| 0.0)
    }

    /// Trace constant in time and space.
    pub fn constant(c1: f64, c2: f64) -> Self {
        Self::new(move |_, _, _| c1, move |_, _, _| c2)
    }

    /// `a * g + b * h`.
    pub fn linear_combination(a: f64, g: &BoundaryTrace, b: f64, h: &BoundaryTrace) -> Self {
        let (g1, g2, h1, h2) = (g.g1.clone(), g.g2.clone(), h.g1.clone(), h.g2.clone());
        Self::new(move |t, x, y| a * g1(t, x, y) + b * h1(t, x, y), move |t, x, y| a * g2(t, x, y) + b * h2(t, x, y))
    }

    pub fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        ((self.g1)(t, x, y), (self.g2)(t, x, y))
    }
}

/// Wall data driving the normal component: `d u3 / dz` and the vertical
/// vorticity `d u2 / dx - d u1 / dy`, both at `z = 0`, with their time
/// derivatives.
#[derive(Clone)]
pub struct SurfaceTraces {
    normal_strain: ScalarFn,
    vorticity: ScalarFn,
    normal_strain_dt: ScalarFn,
    vorticity_dt: ScalarFn,
}

impl std::fmt::Debug for SurfaceTraces {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SurfaceTraces")
    }
}

impl SurfaceTraces {
    pub fn new(
        normal_strain: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        vorticity: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        normal_strain_dt: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        vorticity_dt: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            normal_strain: Arc::new(normal_strain),
            vorticity: Arc::new(vorticity),
            normal_strain_dt: Arc::new(normal_strain_dt),
            vorticity_dt: Arc::new(vorticity_dt),
        }
    }

    pub fn zero() -> Self {
        Self::new(|_, _, _| 0.0, |_, _, _| 0.0, |_, _, _| 0.0, |_, _, _| 0.0)
    }

    /// Traces constant in time and space.
    pub fn constant(strain: f64, vorticity: f64) -> Self {
        Self::new(move |_, _, _| strain, move |_, _, _| vorticity, |_, _, _| 0.0, |_, _, _| 0.0)
    }

    /// Separable traces `a(t) S(x, y)` and `b(t) S(x, y)` with polynomial
    /// time factors given by their coefficients in increasing degree.
    pub fn separable_polynomial(
        a: Vec<f64>,
        b: Vec<f64>,
        spatial: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let spatial = Arc::new(spatial);
        let poly = |c: Vec<f64>| move |t: f64| c.iter().rev().fold(0.0, |acc, &v| acc * t + v);
        let dpoly = |c: Vec<f64>| {
            move |t: f64| c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (d, &v)| acc * t + d as f64 * v)
        };
        let (pa, pb, da, db) = (poly(a.clone()), poly(b.clone()), dpoly(a), dpoly(b));
        let (s1, s2, s3, s4) = (spatial.clone(), spatial.clone(), spatial.clone(), spatial);
        Self::new(
            move |t, x, y| pa(t) * s1(x, y),
            move |t, x, y| pb(t) * s2(x, y),
            move |t, x, y| da(t) * s3(x, y),
            move |t, x, y| db(t) * s4(x, y),
        )
    }
}

/// Immutable parameters of a corrector evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectorEval {
    pub eps: f64,
    pub alpha: f64,
    pub quad_tol: f64,
    /// Excluded `t - tau` neighbourhood of the kernel singularity; the change
    /// of variables makes the integrands regular so this defaults to 0.
    pub t_singularity_cut: f64,
    pub max_intervals: usize,
}

impl CorrectorEval {
    pub fn new(eps: f64, alpha: f64) -> Result<Self> {
        Self::with_tolerance(eps, alpha, 1e-9)
    }

    pub fn with_tolerance(eps: f64, alpha: f64, quad_tol: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LayerError::Domain(format!("eps must be positive, got {eps}")));
        }
        if !(quad_tol > 0.0) {
            return Err(LayerError::Domain(format!("quad_tol must be positive, got {quad_tol}")));
        }
        if !alpha.is_finite() {
            return Err(LayerError::Domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { eps, alpha, quad_tol, t_singularity_cut: 0.0, max_intervals: 1 << 14 })
    }

    fn settings(&self) -> QuadSettings {
        QuadSettings { abs_tol: self.quad_tol, rel_tol: 0.0, max_intervals: self.max_intervals }
    }

    /// Tangential components of the corrector that cancels the trace `g` at
    /// `z = 0`; at `z = 0` the boundary value `-(g1, g2)(t)` is returned.
    pub fn exact_tangential_corrector(&self, g: &BoundaryTrace, t: f64, x: f64, y: f64, z: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(LayerError::Domain(format!("corrector needs t > 0, got {t}")));
        }
        if z < 0.0 {
            return Err(LayerError::Domain(format!("corrector needs z >= 0, got {z}")));
        }
        if z == 0.0 {
            let (g1, g2) = g.eval(t, x, y);
            return Ok((-g1, -g2));
        }
        let zbar = z / self.eps.sqrt();
        let lower = zbar / (2.0 * t.sqrt());
        // sigma range that maps to t - tau > t_singularity_cut
        let upper_sigma =
            if self.t_singularity_cut > 0.0 { zbar / (2.0 * self.t_singularity_cut.sqrt()) } else { f64::INFINITY };
        let upper = (lower + 9.0).min(upper_sigma);
        if upper <= lower {
            return Ok((0.0, 0.0));
        }
        let alpha = self.alpha;
        let rotated = |sigma: f64, comp: usize| {
            let s = zbar * zbar / (4.0 * sigma * sigma);
            let (g1, g2) = g.eval(t - s, x, y);
            let (c, sn) = ((alpha * s).cos(), (alpha * s).sin());
            // g cos(alpha s) - (e3 x g) sin(alpha s), with e3 x g = (-g2, g1)
            let val = if comp == 0 { g1 * c + g2 * sn } else { g2 * c - g1 * sn };
            (-sigma * sigma).exp() * val
        };
        let breaks = [lower + 0.5, lower + 1.5, lower + 3.0];
        let pref = -2.0 / PI.sqrt();
        let q1 = integrate_with_breaks(|s| rotated(s, 0), lower, upper, &breaks, self.settings())?;
        let q2 = integrate_with_breaks(|s| rotated(s, 1), lower, upper, &breaks, self.settings())?;
        Ok((pref * q1.value, pref * q2.value))
    }

    fn w_breaks(&self, z: f64, t: f64) -> Vec<f64> {
        let w_star = z / (2.0 * self.eps.sqrt());
        let top = t.sqrt();
        [0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|f| f * w_star).filter(|&w| w > 0.0 && w < top).collect()
    }

    /// The bracket `-2 A cos(alpha w^2) + 2 B sin(alpha w^2)` at `tau = t - w^2`.
    fn normal_bracket(&self, tr: &SurfaceTraces, tau: f64, w2: f64, x: f64, y: f64, dt: bool) -> f64 {
        let (a, b) = if dt {
            ((tr.normal_strain_dt)(tau, x, y), (tr.vorticity_dt)(tau, x, y))
        } else {
            ((tr.normal_strain)(tau, x, y), (tr.vorticity)(tau, x, y))
        };
        let arg = self.alpha * w2;
        -2.0 * a * arg.cos() + 2.0 * b * arg.sin()
    }

    fn layer_weight(&self, z: f64, w: f64) -> f64 {
        if w == 0.0 {
            return 0.0;
        }
        let d = 4.0 * self.eps * w * w;
        (-z * z / d).exp() - (-1.0 / d).exp()
    }

    /// Normal component obtained from incompressibility, including the
    /// exponentially small counter-term that makes it vanish at `z = 1`.
    pub fn normal_corrector_phi3(&self, tr: &SurfaceTraces, t: f64, x: f64, y: f64, z: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(LayerError::Domain(format!("corrector needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let f = |w: f64| self.layer_weight(z, w) * self.normal_bracket(tr, t - w * w, w * w, x, y, false);
        let q = integrate_with_breaks(f, 0.0, t.sqrt(), &self.w_breaks(z, t), self.settings())?;
        Ok(-(self.eps / PI).sqrt() * q.value)
    }

    /// Time derivative of the normal component (Leibniz rule on the
    /// `s = t - tau` form).
    pub fn dphi3_dt(&self, tr: &SurfaceTraces, t: f64, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(LayerError::Domain(format!("derivative needs t > 0, got {t}")));
        }
        let top = t.sqrt();
        let boundary = self.layer_weight(z, top) * self.normal_bracket(tr, 0.0, t, x, y, false) / (2.0 * top);
        let f = |w: f64| self.layer_weight(z, w) * self.normal_bracket(tr, t - w * w, w * w, x, y, true);
        let q = integrate_with_breaks(f, 0.0, top, &self.w_breaks(z, t), self.settings())?;
        Ok(-(self.eps / PI).sqrt() * (boundary + q.value))
    }

    /// `eps * d^2 phi3 / dz^2`; only the z-dependent term contributes.
    pub fn eps_d2phi3_dz2(&self, tr: &SurfaceTraces, t: f64, x: f64, y: f64, z: f64) -> Result<f64> {
        if !(t > 0.0) || !(z > 0.0) {
            return Err(LayerError::Domain(format!("second derivative needs t, z > 0, got t={t}, z={z}")));
        }
        let eps = self.eps;
        let f = |w: f64| {
            if w == 0.0 {
                return 0.0;
            }
            let w2 = w * w;
            let e = (-z * z / (4.0 * eps * w2)).exp();
            e * (z * z / (4.0 * eps * w2 * w2) - 1.0 / (2.0 * w2)) * self.normal_bracket(tr, t - w2, w2, x, y, false)
        };
        let q = integrate_with_breaks(f, 0.0, t.sqrt(), &self.w_breaks(z, t), self.settings())?;
        Ok(-(eps / PI).sqrt() * q.value)
    }

    /// Residual of `d_t phi - d_zbar^2 phi + omega x phi` at `(t, zbar)` from
    /// fourth-order central differences with step `h` in both `t` and `zbar`.
    pub fn tangential_pde_residual(
        &self,
        g: &BoundaryTrace,
        t: f64,
        x: f64,
        y: f64,
        zbar: f64,
        h: f64,
    ) -> Result<(f64, f64)> {
        if zbar <= 2.0 * h || t <= 2.0 * h {
            return Err(LayerError::Domain("sample point too close to the boundary for the stencil".into()));
        }
        let se = self.eps.sqrt();
        let at = |tt: f64, zb: f64| self.exact_tangential_corrector(g, tt, x, y, zb * se);
        let c = at(t, zbar)?;
        let (tm2, tm1, tp1, tp2) = (at(t - 2.0 * h, zbar)?, at(t - h, zbar)?, at(t + h, zbar)?, at(t + 2.0 * h, zbar)?);
        let (zm2, zm1, zp1, zp2) = (at(t, zbar - 2.0 * h)?, at(t, zbar - h)?, at(t, zbar + h)?, at(t, zbar + 2.0 * h)?);
        let d1 = |m2: f64, m1: f64, p1: f64, p2: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let d2 =
            |m2: f64, m1: f64, c: f64, p1: f64, p2: f64| (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
        let dt = (d1(tm2.0, tm1.0, tp1.0, tp2.0), d1(tm2.1, tm1.1, tp1.1, tp2.1));
        let dzz = (d2(zm2.0, zm1.0, c.0, zp1.0, zp2.0), d2(zm2.1, zm1.1, c.1, zp1.1, zp2.1));
        // omega x phi = alpha (-phi2, phi1)
        Ok((dt.0 - dzz.0 - self.alpha * c.1, dt.1 - dzz.1 + self.alpha * c.0))
    }
}

/// Exponential approximation of the bottom-wall corrector profile.
pub fn approx_corrector(eps: f64, t: f64, z: f64) -> Result<[f64; 3]> {
    if !(t > 0.0) {
        return Err(LayerError::Domain(format!("approximate corrector needs t > 0, got {t}")));
    }
    let e = -(-z * z / (4.0 * eps * t)).exp();
    Ok([e, e, 0.0])
}

/// Top-wall profile: the bottom profile evaluated at `1 - z`.
pub fn mirrored_corrector(eps: f64, t: f64, z: f64) -> Result<[f64; 3]> {
    approx_corrector(eps, t, 1.0 - z)
}

/// Norms whose epsilon power laws are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingQuantity {
    /// `|d phi3 / dt|_{L2}`, expected exponent 3/4.
    Dphi3DtL2,
    /// `|z eps d^2 phi3 / dz^2|_{L2}`, expected exponent 5/4.
    ZEpsD2phi3L2,
    /// `|phi3 / sqrt(eps)|_{L2}`, expected exponent 1/4.
    Phi3OverSqrtEpsL2,
}

impl ScalingQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dphi3DtL2 => "dphi3_dt_L2",
            Self::ZEpsD2phi3L2 => "z_eps_d2phi3_L2",
            Self::Phi3OverSqrtEpsL2 => "phi3_over_sqrt_eps_L2",
        }
    }

    pub fn expected_exponent(&self) -> f64 {
        match self {
            Self::Dphi3DtL2 => 0.75,
            Self::ZEpsD2phi3L2 => 1.25,
            Self::Phi3OverSqrtEpsL2 => 0.25,
        }
    }

    /// Accepts [`Self::name`] with or without the `_L2` suffix, in any case.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        Self::ALL.into_iter().find(|q| {
            let name = q.name().to_ascii_lowercase();
            s == name || Some(s.as_str()) == name.strip_suffix("_l2")
        })
    }

    pub const ALL: [ScalingQuantity; 3] = [Self::Dphi3DtL2, Self::ZEpsD2phi3L2, Self::Phi3OverSqrtEpsL2];
}

/// Per-epsilon norms and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStudy {
    pub quantity: ScalingQuantity,
    pub eps: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Spatial factor of the traces used by the scaling study and its squared
/// L2 norm over `(0, 2pi)^2`.
fn scaling_spatial(x: f64, y: f64) -> f64 {
    x.cos() * y.cos()
}
const SCALING_SPATIAL_NORM_SQ: f64 = PI * PI;

/// Traces used by the scaling study: `a(t) = b(t) = t` times `cos x cos y`.
pub fn scaling_traces() -> SurfaceTraces {
    SurfaceTraces::separable_polynomial(vec![0.0, 1.0], vec![0.0, 1.0], scaling_spatial)
}

/// L2 norm over the channel of the named quantity for one `eps`, at time `t`.
/// The traces are separable so the horizontal integral is exact; the z
/// integral is adaptive.
pub fn quantity_l2_norm(ce: &CorrectorEval, quantity: ScalingQuantity, t: f64) -> Result<f64> {
    let tr = scaling_traces();
    // x = y = 0 gives spatial factor 1; the horizontal norm is applied analytically
    let profile = |z: f64| -> Result<f64> {
        Ok(match quantity {
            ScalingQuantity::Dphi3DtL2 => ce.dphi3_dt(&tr, t, 0.0, 0.0, z)?,
            ScalingQuantity::ZEpsD2phi3L2 => z * ce.eps_d2phi3_dz2(&tr, t, 0.0, 0.0, z)?,
            ScalingQuantity::Phi3OverSqrtEpsL2 => ce.normal_corrector_phi3(&tr, t, 0.0, 0.0, z)? / ce.eps.sqrt(),
        })
    };
    let width = (ce.eps * t).sqrt();
    let breaks: Vec<f64> =
        [0.1, 0.3, 1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|f| f * width).filter(|&z| z < 1.0).collect();
    let failure = std::cell::Cell::new(None);
    let sq = |z: f64| match profile(z) {
        Ok(v) => v * v,
        Err(e) => {
            failure.set(Some(e.to_string()));
            0.0
        }
    };
    let outer = QuadSettings { abs_tol: 1e-300, rel_tol: 1e-7, max_intervals: ce.max_intervals };
    let q = integrate_with_breaks(sq, 0.0, 1.0, &breaks, outer);
    if let Some(msg) = failure.take() {
        return Err(LayerError::Domain(format!("inner quadrature failed: {msg}")));
    }
    let q = q?;
    Ok((q.value * SCALING_SPATIAL_NORM_SQ).sqrt())
}

/// Fits the epsilon power law of `quantity` over `eps_list` at time `t`.
pub fn scaling_slope(ce: &CorrectorEval, quantity: ScalingQuantity, eps_list: &[f64], t: f64) -> Result<ScalingStudy> {
    if eps_list.len() < 2 {
        return Err(LayerError::InvalidConfig(format!(
            "scaling study needs at least two eps values, got {}",
            eps_list.len()
        )));
    }
    let mut norms = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let local = CorrectorEval { eps, ..*ce };
        if !(eps > 0.0) {
            return Err(LayerError::Domain(format!("eps must be positive, got {eps}")));
        }
        norms.push(quantity_l2_norm(&local, quantity, t)?);
    }
    Ok(ScalingStudy { quantity, eps: eps_list.to_vec(), slope: loglog_slope(eps_list, &norms), norms })
}

/// Outcome of one named property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyCheck {
    fn new(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self { name: name.into(), worst, tolerance, passed: worst < tolerance }
    }
}

/// Point `i` of the radical-inverse sequence in base `b`, in `(0, 1)`.
fn radical_inverse(mut i: usize, b: usize) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

/// Largest PDE residual of the tangential corrector over `points` quasi-random
/// `(t, zbar)` samples in `[0.3, 1] x [0.2, 3]`, for each rotation rate.
pub fn verify_pde_residual(alphas: &[f64], points: usize, tolerance: f64) -> Result<PropertyCheck> {
    let g = BoundaryTrace::new(|t, x, _| (t + t * t) * (1.0 + 0.5 * x.cos()), |t, _, y| (2.0 * t).sin() + t * y.sin());
    let mut worst: f64 = 0.0;
    for &alpha in alphas {
        let ce = CorrectorEval::with_tolerance(1e-3, alpha, 1e-13)?;
        for i in 1..=points {
            let t = 0.3 + 0.7 * radical_inverse(i, 2);
            let zbar = 0.2 + 2.8 * radical_inverse(i, 3);
            let x = 2.0 * PI * radical_inverse(i, 5);
            let r = ce.tangential_pde_residual(&g, t, x, 0.4, zbar, 2e-3)?;
            worst = worst.max(r.0.abs()).max(r.1.abs());
        }
    }
    Ok(PropertyCheck::new(format!("corrector PDE residual (alpha in {alphas:?})"), worst, tolerance))
}

/// Non-rotating corrector of a unit constant trace against `-erfc(z / 2 sqrt t)`
/// on a 3 x 3 set of `(t, z)` pairs.
pub fn verify_erfc_oracle(tolerance: f64) -> Result<PropertyCheck> {
    let ce = CorrectorEval::with_tolerance(1.0, 0.0, 1e-12)?;
    let g = BoundaryTrace::constant(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for t in [0.25, 0.5, 1.0] {
        for z in [0.05, 0.2, 1.0] {
            let (p1, p2) = ce.exact_tangential_corrector(&g, t, 0.0, 0.0, z)?;
            worst = worst.max((p1 + libm::erfc(z / (2.0 * t.sqrt()))).abs()).max(p2.abs());
        }
    }
    Ok(PropertyCheck::new("constant-trace corrector vs erfc", worst, tolerance))
}

/// Wall limit of the corrector, extrapolated from two small offsets, against
/// the negated trace.
pub fn verify_boundary_attainment(tolerance: f64) -> Result<PropertyCheck> {
    let ce = CorrectorEval::with_tolerance(1e-3, 1.0, 1e-12)?;
    let g = BoundaryTrace::new(|t, _, _| t, |t, _, _| 0.5 * t * t);
    let mut worst: f64 = 0.0;
    for t in [0.4, 1.0] {
        let (g1, g2) = g.eval(t, 0.0, 0.0);
        let d = 1e-7;
        let a = ce.exact_tangential_corrector(&g, t, 0.0, 0.0, d)?;
        let b = ce.exact_tangential_corrector(&g, t, 0.0, 0.0, 0.5 * d)?;
        worst = worst.max((2.0 * b.0 - a.0 + g1).abs()).max((2.0 * b.1 - a.1 + g2).abs());
    }
    Ok(PropertyCheck::new("corrector attains the wall trace", worst, tolerance))
}

/// The three checks above at their standard tolerances.
pub fn property_suite() -> Result<Vec<PropertyCheck>> {
    Ok(vec![
        verify_pde_residual(&[0.0, 1.0, 5.0], 10, 5e-7)?,
        verify_erfc_oracle(1e-8)?,
        verify_boundary_attainment(1e-9)?,
    ])
}
