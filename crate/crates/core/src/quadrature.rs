//! Globally adaptive Gauss-Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LayerError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 0.0, max_intervals: 1 << 14 }
    }
}

impl QuadSettings {
    pub fn absolute(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (n, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        kron += w * s;
        if n % 2 == 1 {
            gauss += WG[n / 2] * s;
        }
    }
    let err = ((kron - gauss) * h).abs();
    (kron * h, err)
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrates `f` over `[a, b]`, starting from the given interior breakpoints.
pub fn integrate_with_breaks<F>(f: F, a: f64, b: f64, breaks: &[f64], settings: QuadSettings) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, intervals: 0 });
    }
    let mut nodes = vec![a];
    nodes.extend(breaks.iter().copied().filter(|&x| x > a.min(b) && x < a.max(b)));
    nodes.push(b);
    let last = nodes.len() - 1;
    if a > b {
        nodes[1..last].sort_by(|x, y| y.total_cmp(x));
    } else {
        nodes[1..last].sort_by(|x, y| x.total_cmp(y));
    }

    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err) = (0.0, 0.0);
    for w in nodes.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }

    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if !total.is_finite() || !total_err.is_finite() {
            return Err(LayerError::Quadrature { estimate: total_err, tolerance: tol });
        }
        if total_err <= tol {
            return Ok(Quadrature { value: total, error: total_err, intervals: heap.len() });
        }
        if heap.len() >= settings.max_intervals {
            return Err(LayerError::Quadrature { estimate: total_err, tolerance: tol });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // interval collapsed to machine resolution
            return Err(LayerError::Quadrature { estimate: total_err, tolerance: tol });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        // running sums drift; recompute occasionally
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
}

pub fn integrate<F>(f: F, a: f64, b: f64, settings: QuadSettings) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    integrate_with_breaks(f, a, b, &[], settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| x.powi(6) - 3.0 * x * x + 1.0, -1.0, 2.0, QuadSettings::default()).unwrap();
        let exact = (2f64.powi(7) + 1.0) / 7.0 - (8.0 + 1.0) + 3.0;
        assert!((q.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_normalisation() {
        let q = integrate(|x| (-x * x).exp() / std::f64::consts::PI.sqrt(), -12.0, 12.0, QuadSettings::absolute(1e-14))
            .unwrap();
        assert!((q.value - 1.0).abs() < 1e-13);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        let q = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, QuadSettings::absolute(1e-8)).unwrap();
        assert!((q.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let settings = QuadSettings { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 4 };
        let err = integrate(|x| (50.0 * x).sin().abs(), 0.0, 3.0, settings).unwrap_err();
        assert!(matches!(err, LayerError::Quadrature { .. }));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(f64::exp, 0.0, 1.0, QuadSettings::default()).unwrap().value;
        let back = integrate(f64::exp, 1.0, 0.0, QuadSettings::default()).unwrap().value;
        assert!((fwd + back).abs() < 1e-14);
    }
}
