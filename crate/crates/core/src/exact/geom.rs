//! Entropy of geometrically separated mixtures and `∫ ln |f'|`.

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::models::PiecewiseAffineMap;

/// Main term and the bound on the remainder for a mixture of `m` pairwise
/// geometrically separated permutons.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeomSepEntropy {
    /// `Σ_i Σ_{k=1}^n C(n,k) β_i^k (1−β_i)^{n−k} H_i(k)`.
    pub value: f64,
    /// `m ln(n + m)`; the true `H_n` lies in `[value, value + omega_upper]`.
    pub omega_upper: f64,
}

/// `component_h[i][k]` is `H_k` of component `i` for `k = 0..=n` (entry 0 is
/// ignored).
pub fn geom_sep_entropy(weights: &[f64], component_h: &[Vec<f64>], n: usize) -> Result<GeomSepEntropy> {
    if weights.len() != component_h.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), got: component_h.len() });
    }
    let mut value = 0.0;
    for (&b, h) in weights.iter().zip(component_h) {
        if h.len() < n + 1 {
            return Err(Error::LengthMismatch { expected: n + 1, got: h.len() });
        }
        for (k, &hk) in h.iter().enumerate().take(n + 1).skip(1) {
            value += binomial(n as u64, k as u64) * b.powi(k as i32) * (1.0 - b).powi((n - k) as i32) * hk;
        }
    }
    let m = weights.len() as f64;
    Ok(GeomSepEntropy { value, omega_upper: m * (n as f64 + m).ln() })
}

/// A map whose `∫₀¹ ln |f'|` is wanted.
pub enum MapDescription<'a> {
    Affine(&'a PiecewiseAffineMap),
    /// Piecewise C¹ map given by its derivative on each piece between the
    /// sorted `breakpoints` (which include 0 and 1).
    Smooth { breakpoints: Vec<f64>, derivative: &'a dyn Fn(f64) -> f64 },
}

pub const QUADRATURE_TOL: f64 = 1e-8;

/// `∫₀¹ ln |f'|` in nats: closed form for affine pieces, adaptive
/// Gauss–Legendre quadrature otherwise. Only interior nodes are sampled, so
/// integrable endpoint singularities are allowed.
pub fn integral_log_abs_derivative(f: &MapDescription) -> Result<f64> {
    match f {
        MapDescription::Affine(m) => Ok(m.integral_log_abs_slope()),
        MapDescription::Smooth { breakpoints, derivative } => {
            if breakpoints.len() < 2 || breakpoints[0] != 0.0 || *breakpoints.last().expect("non-empty") != 1.0 {
                return Err(Error::InvalidArgument("breakpoints must run from 0 to 1".into()));
            }
            let g = |x: f64| derivative(x).abs().ln();
            let mut total = 0.0;
            for w in breakpoints.windows(2) {
                if !(w[1] > w[0]) {
                    return Err(Error::InvalidArgument("breakpoints must increase".into()));
                }
                let whole = gauss5(&g, w[0], w[1]);
                total += adaptive(&g, w[0], w[1], whole, QUADRATURE_TOL * (w[1] - w[0]), 0);
            }
            if !total.is_finite() {
                return Err(Error::Numerical("derivative vanishes on a set of positive length".into()));
            }
            Ok(total)
        }
    }
}

const GL5_NODES: [f64; 5] = [0.0, -0.538_469_310_105_683_1, 0.538_469_310_105_683_1, -0.906_179_845_938_664, 0.906_179_845_938_664];
const GL5_WEIGHTS: [f64; 5] =
    [0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1, 0.236_926_885_056_189_1];

fn gauss5(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    GL5_NODES.iter().zip(GL5_WEIGHTS).map(|(&x, w)| w * g(c + h * x)).sum::<f64>() * h
}

fn adaptive(g: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    if b - a < 1e-12 {
        // a vanishing interval next to an integrable singularity
        return if whole.is_finite() { whole } else { 0.0 };
    }
    let mid = 0.5 * (a + b);
    let left = gauss5(g, a, mid);
    let right = gauss5(g, mid, b);
    let diff = left + right - whole;
    if !diff.is_finite() {
        return f64::NEG_INFINITY;
    }
    if diff.abs() <= tol || depth >= 60 {
        return left + right;
    }
    adaptive(g, a, mid, left, 0.5 * tol, depth + 1) + adaptive(g, mid, b, right, 0.5 * tol, depth + 1)
}
