//! Manufactured solution with boundary layers at both walls, its forcing and
//! discrete error norms.

use std::f64::consts::PI;

use crate::error::{LayerError, Result};
use crate::grid::{CellField, GridSpec, VectorField};

/// Wall factor `1 - exp(-s) cos(s)`.
pub fn layer_profile(s: f64) -> f64 {
    1.0 - (-s).exp() * s.cos()
}

fn layer_profile_d1(s: f64) -> f64 {
    (-s).exp() * (s.cos() + s.sin())
}

fn layer_profile_d2(s: f64) -> f64 {
    -2.0 * (-s).exp() * s.sin()
}

/// Supremum of [`layer_profile`] on `s >= 0`, attained at `s = 3 pi / 4`.
pub fn layer_profile_max() -> f64 {
    1.0 + (-0.75 * PI).exp() / 2f64.sqrt()
}

/// Horizontal period of the manufactured fields.
pub const PERIOD: f64 = 1.0;

/// `n^3` mesh whose horizontal extent matches [`PERIOD`].
pub fn grid(n: usize) -> Result<GridSpec> {
    GridSpec::with_extent(n, n, n, PERIOD, PERIOD)
}

/// Exact velocity/pressure pair and viscosity/rotation it is built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSolution {
    pub eps: f64,
    pub alpha: f64,
}

/// Point values `(u, v, w, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValues {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
}

impl ExactSolution {
    pub fn new(eps: f64, alpha: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(LayerError::Domain(format!("eps must be positive, got {eps}")));
        }
        if !alpha.is_finite() {
            return Err(LayerError::Domain(format!("alpha must be finite, got {alpha}")));
        }
        Ok(Self { eps, alpha })
    }

    /// Product of the bottom and top wall factors and its first two z-derivatives.
    pub fn layer_factor(&self, z: f64) -> (f64, f64, f64) {
        let se = self.eps.sqrt();
        let (s1, s2) = (z / se, (1.0 - z) / se);
        let (b1, b2) = (layer_profile(s1), layer_profile(s2));
        let (d1, d2) = (layer_profile_d1(s1) / se, -layer_profile_d1(s2) / se);
        let (dd1, dd2) = (layer_profile_d2(s1) / self.eps, layer_profile_d2(s2) / self.eps);
        (b1 * b2, d1 * b2 + b1 * d2, dd1 * b2 + 2.0 * d1 * d2 + b1 * dd2)
    }

    pub fn eval(&self, x: f64, y: f64, z: f64, t: f64) -> ExactValues {
        let (b, _, _) = self.layer_factor(z);
        ExactValues {
            u: t * (2.0 * PI * y).sin() * b,
            v: t * (2.0 * PI * x).sin() * b,
            w: 0.0,
            p: t * (2.0 * PI * x).cos() * (2.0 * PI * y).cos() * (PI * z).cos(),
        }
    }

    /// `d_t u - eps lap u + omega x u + grad p` in closed form.
    pub fn forcing(&self, x: f64, y: f64, z: f64, t: f64) -> [f64; 3] {
        let (b, _, bzz) = self.layer_factor(z);
        let (sx, cx) = (2.0 * PI * x).sin_cos();
        let (sy, cy) = (2.0 * PI * y).sin_cos();
        let (sz, cz) = (PI * z).sin_cos();
        let lap = bzz - 4.0 * PI * PI * b;
        let (u, v) = (t * sy * b, t * sx * b);
        [
            sy * b - self.eps * t * sy * lap - self.alpha * v - 2.0 * PI * t * sx * cy * cz,
            sx * b - self.eps * t * sx * lap + self.alpha * u - 2.0 * PI * t * cx * sy * cz,
            -PI * t * cx * cy * sz,
        ]
    }

    pub fn velocity_field(&self, g: &GridSpec, t: f64) -> VectorField {
        VectorField {
            comps: [
                CellField::from_fn(g, |x, y, z| self.eval(x, y, z, t).u),
                CellField::from_fn(g, |x, y, z| self.eval(x, y, z, t).v),
                CellField::zeros(g),
            ],
        }
    }

    pub fn pressure_field(&self, g: &GridSpec, t: f64) -> CellField {
        CellField::from_fn(g, |x, y, z| self.eval(x, y, z, t).p)
    }

    pub fn forcing_field(&self, g: &GridSpec, t: f64) -> VectorField {
        let mut out = VectorField::zeros(g);
        for (i, j, k) in g.interior() {
            let (x, y, z) = g.center(i, j, k);
            let f = self.forcing(x, y, z, t);
            for (c, fc) in f.iter().enumerate() {
                out.comps[c][(i, j, k)] = *fc;
            }
        }
        out
    }
}

/// Midpoint-rule L2 distance between a velocity field and the exact one.
pub fn velocity_l2_error(num: &VectorField, es: &ExactSolution, t: f64) -> f64 {
    let g = *num.grid();
    let mut acc = 0.0;
    for (i, j, k) in g.interior() {
        let (x, y, z) = g.center(i, j, k);
        let e = es.eval(x, y, z, t);
        let d = [num.comps[0][(i, j, k)] - e.u, num.comps[1][(i, j, k)] - e.v, num.comps[2][(i, j, k)] - e.w];
        acc += d.iter().map(|v| v * v).sum::<f64>();
    }
    (acc * g.cell_volume()).sqrt()
}

/// Pressure L2 error after removing the mean of both fields.
pub fn pressure_l2_error(num: &CellField, es: &ExactSolution, t: f64) -> f64 {
    let g = *num.grid();
    let mut exact = es.pressure_field(&g, t);
    exact.remove_mean();
    let mut n = num.clone();
    n.remove_mean();
    pressure_distance(&n, &exact)
}

/// Pressure L2 error without any gauge adjustment.
pub fn pressure_l2_error_raw(num: &CellField, es: &ExactSolution, t: f64) -> f64 {
    pressure_distance(num, &es.pressure_field(num.grid(), t))
}

fn pressure_distance(a: &CellField, b: &CellField) -> f64 {
    let g = *a.grid();
    let acc: f64 = g.interior().map(|c| (a[c] - b[c]).powi(2)).sum();
    (acc * g.cell_volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, FaceFluxes};
    use crate::operators::divergence;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    /// Fourth-order central differences of the exact solution substituted
    /// into the momentum equation.
    fn fd_residual(es: &ExactSolution, x: f64, y: f64, z: f64, t: f64) -> [f64; 3] {
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
        let mut out = [0.0; 3];
        for comp in 0..3 {
            let lap = d2(&fx, comp, x) + d2(&fy, comp, y) + d2(&fz, comp, z);
            out[comp] = d1(&ft, comp, t) - es.eps * lap + rot[comp] + grad_p[comp] - f[comp];
        }
        out
    }

    #[test]
    fn forcing_matches_finite_difference_oracle() {
        let mut rng = StdRng::seed_from_u64(7);
        for &eps in &[1e-2, 1e-4] {
            for &alpha in &[0.0, 1.0, 3.0] {
                let es = ExactSolution::new(eps, alpha).unwrap();
                for _ in 0..20 {
                    let x = rng.random_range(0.0..2.0 * PI);
                    let y = rng.random_range(0.0..2.0 * PI);
                    let z = rng.random_range(0.01..0.99);
                    let t = rng.random_range(0.1..1.0);
                    let r = fd_residual(&es, x, y, z, t);
                    for v in r {
                        assert!(v.abs() < 1e-6, "eps={eps} alpha={alpha} at ({x},{y},{z},{t}): {r:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_values_examples() {
        let es = ExactSolution::new(1e-3, 1.0).unwrap();
        let wall = es.eval(0.3, 0.7, 0.0, 0.8);
        assert_eq!((wall.u, wall.v), (0.0, 0.0));
        let top = es.eval(0.3, 0.7, 1.0, 0.8);
        assert_eq!((top.u, top.v), (0.0, 0.0));
        let start = es.eval(0.3, 0.7, 0.4, 0.0);
        assert_eq!((start.u, start.v, start.w), (0.0, 0.0, 0.0));

        let es = ExactSolution::new(1e-6, 1.0).unwrap();
        for y in [0.1, 0.9, 2.0] {
            let mid = es.eval(0.0, y, 0.5, 1.0);
            assert!((mid.u - (2.0 * PI * y).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn forcing_limits() {
        // t = 0: only the time derivative survives
        let es = ExactSolution::new(1e-2, 2.0).unwrap();
        let (x, y) = (0.4, 1.3);
        let f = es.forcing(x, y, 0.5, 0.0);
        let b = es.layer_factor(0.5).0;
        assert_relative_eq!(f[0], (2.0 * PI * y).sin() * b, max_relative = 1e-14);
        assert_relative_eq!(f[1], (2.0 * PI * x).sin() * b, max_relative = 1e-14);
        assert_eq!(f[2], 0.0);

        // no rotation, vanishing viscosity, mid-channel
        let es = ExactSolution::new(1e-12, 0.0).unwrap();
        let f = es.forcing(x, y, 0.5, 1.0);
        let px = -2.0 * PI * (2.0 * PI * x).sin() * (2.0 * PI * y).cos() * (0.5 * PI).cos();
        assert!((f[0] - ((2.0 * PI * y).sin() + px)).abs() < 1e-9);
    }

    #[test]
    fn layer_factor_bounds() {
        let bmax = layer_profile_max();
        assert_relative_eq!(layer_profile(0.75 * PI), bmax, max_relative = 1e-15);
        // the overshoot exceeds 1 + exp(-pi)
        assert!(bmax > 1.0 + (-PI).exp());
        for eps in [1e-1, 1e-2, 1e-4, 1e-7] {
            let es = ExactSolution::new(eps, 1.0).unwrap();
            for n in 0..=2000 {
                let z = n as f64 / 2000.0;
                let b = es.layer_factor(z).0;
                assert!((0.0..=bmax * bmax).contains(&b), "eps={eps} z={z} b={b}");
                assert!(layer_profile(z / eps.sqrt()) <= bmax);
            }
        }
    }

    #[test]
    fn error_norm_examples() {
        let g = build_grid(8, 6, 5).unwrap();
        let es = ExactSolution::new(1e-2, 1.0).unwrap();
        let v = es.velocity_field(&g, 0.7);
        let p = es.pressure_field(&g, 0.7);
        assert_eq!(velocity_l2_error(&v, &es, 0.7), 0.0);
        assert_eq!(pressure_l2_error_raw(&p, &es, 0.7), 0.0);
        assert!(pressure_l2_error(&p, &es, 0.7) < 1e-15);

        let mut shifted = v.clone();
        shifted.comps[0].map_inplace(|x| x + 0.1);
        let err = velocity_l2_error(&shifted, &es, 0.7);
        assert_relative_eq!(err, 0.1 * (4.0 * PI * PI).sqrt(), max_relative = 1e-12);

        // a constant pressure shift is invisible to the centred error
        let mut q = p.clone();
        q.map_inplace(|x| x + 3.0);
        assert!(pressure_l2_error(&q, &es, 0.7) < 1e-13);
        assert_relative_eq!(pressure_l2_error_raw(&q, &es, 0.7), 3.0 * (4.0 * PI * PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn sampled_flux_divergence_is_second_order() {
        // face values sampled exactly; z-faces carry w = 0 so only x and y
        // faces contribute, and u, v are independent of x, y respectively
        let es = ExactSolution::new(1e-2, 1.0).unwrap();
        let mut errs = Vec::new();
        for n in [10, 20, 30] {
            let g = grid(n).unwrap();
            let fl = FaceFluxes::from_velocity_fn(&g, |x, y, z| {
                let e = es.eval(x, y, z, 1.0);
                // perturb by a divergent field of amplitude h^2 to make the test non-trivial
                let h2 = g.dx * g.dx;
                [e.u + h2 * (2.0 * PI * x).sin(), e.v, e.w]
            });
            let d = divergence(&fl, &g);
            errs.push(d.interior_max_abs());
        }
        let order = (errs[0] / errs[1]).ln() / 2f64.ln();
        assert!(order >= 1.7, "{errs:?}");
        let order = (errs[1] / errs[2]).ln() / 1.5f64.ln();
        assert!(order >= 1.7, "{errs:?}");
    }

    proptest! {
        #[test]
        fn analytic_divergence_free_and_no_slip(x in 0.0f64..6.3, y in 0.0f64..6.3, z in 0.0f64..1.0, t in 0.0f64..2.0) {
            let es = ExactSolution::new(1e-3, 1.0).unwrap();
            let h = 1e-6;
            let du = (es.eval(x + h, y, z, t).u - es.eval(x - h, y, z, t).u) / (2.0 * h);
            let dv = (es.eval(x, y + h, z, t).v - es.eval(x, y - h, z, t).v) / (2.0 * h);
            prop_assert_eq!(du, 0.0);
            prop_assert_eq!(dv, 0.0);
            prop_assert_eq!(es.eval(x, y, 0.0, t).u, 0.0);
            prop_assert_eq!(es.eval(x, y, 1.0, t).v, 0.0);
            prop_assert_eq!(es.eval(x, y, z, t).w, 0.0);
        }
    }
}
