//! Fourier series of log-periodic limits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::binomial::DecayParams;
use crate::error::{Error, Result};
use crate::estimator::RhoSequence;
use crate::gamma::{abs_gamma_integer_line, gamma, ln_gamma, ln_gamma_real};

pub const DEFAULT_HARMONICS: usize = 8;

/// Levels beyond this are summed through an integral bound.
const TAIL_LEVEL_SPLIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub r: i64,
    pub re: f64,
    pub im: f64,
}

impl Coefficient {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// `x ↦ Re Σ_{|r|≤R} c_r e^{2πirx}`, periodic with period 1 in `x = log_η n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierLimit {
    pub eta: f64,
    /// `r = −R..=R`.
    pub coeffs: Vec<Coefficient>,
    /// Bound on `Σ_{|r|>R} |c_r|`.
    pub tail_bound: f64,
    /// Estimated sup-norm of the part not represented by the coefficients
    /// (truncated levels); 0 when the series is complete.
    #[serde(default)]
    pub level_remainder: f64,
}

impl FourierLimit {
    fn from_positive(eta: f64, pos: Vec<Complex64>, tail_bound: f64, level_remainder: f64) -> Self {
        let r_max = pos.len() as i64 - 1;
        let coeffs = (-r_max..=r_max)
            .map(|r| {
                let c = if r >= 0 { pos[r as usize] } else { pos[(-r) as usize].conj() };
                Coefficient { r, re: c.re, im: c.im }
            })
            .collect();
        Self { eta, coeffs, tail_bound, level_remainder }
    }

    pub fn harmonics(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coefficient(&self, r: i64) -> Option<Complex64> {
        let h = self.harmonics() as i64;
        if r.abs() > h {
            return None;
        }
        Some(self.coeffs[(r + h) as usize].value())
    }

    pub fn eval_complex(&self, x: f64) -> Complex64 {
        self.coeffs.iter().map(|c| c.value() * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * c.r as f64 * x)).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_complex(x).re
    }

    /// Value at `n`, i.e. at `x = log_η n`.
    pub fn eval_at_index(&self, n: f64) -> f64 {
        self.eval(n.ln() / self.eta.ln())
    }

    pub fn mean(&self) -> f64 {
        self.coefficient(0).map_or(0.0, |c| c.re)
    }

    /// `max − min` of the truncated series on a grid, with an error bar
    /// covering the harmonic tail, the level remainder and the grid step.
    pub fn oscillation_amplitude(&self, grid: usize) -> Oscillation {
        let grid = grid.max(2);
        let vals: Vec<f64> = (0..grid).map(|i| self.eval(i as f64 / grid as f64)).collect();
        let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
        // |d/dx| ≤ 2π Σ |r||c_r|, half a grid step away from any point
        let lip: f64 = self.coeffs.iter().map(|c| 2.0 * std::f64::consts::PI * c.r.unsigned_abs() as f64 * c.value().norm()).sum();
        let grid_err = lip / grid as f64;
        Oscillation { amplitude: max - min, error: 2.0 * (self.tail_bound + self.level_remainder) + grid_err }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude: f64,
    pub error: f64,
}

/// `Σ_{r>R} |Γ(l + i r y)|`, summed until the terms are negligible; the
/// terms decay like `e^{−π r y/2}` times a power of `r`.
fn gamma_line_tail(l: u32, y: f64, r_from: usize) -> f64 {
    let mut total = 0.0;
    let mut prev = f64::INFINITY;
    let mut r = r_from as f64;
    loop {
        let t = abs_gamma_integer_line(l, r * y);
        total += t;
        if t == 0.0 || (t < 1e-18 * total && t < prev) || r > r_from as f64 + 1e6 {
            // geometric remainder with the last observed ratio
            let ratio = if prev.is_finite() && prev > 0.0 { t / prev } else { 0.0 };
            if ratio < 1.0 {
                total += t * ratio / (1.0 - ratio);
            }
            return total;
        }
        prev = t;
        r += 1.0;
    }
}

/// `L_l(x) = (1−q^l)/(l! |ln q|) Σ_r Γ(l + 2πir/ln q) e^{2πirx}`, the limit of
/// `δ_l(η^{x+m})` with `η = 1/q`.
pub fn log_periodic_limit_l(params: DecayParams, harmonics: usize) -> Result<FourierLimit> {
    let DecayParams { q, l } = DecayParams::new(params.q, params.l)?;
    let lnq = q.ln();
    let scale = (1.0 - q.powi(l as i32)) / (ln_gamma_real(l as f64 + 1.0).exp() * lnq.abs());
    let pos: Vec<Complex64> =
        (0..=harmonics).map(|r| scale * gamma(Complex64::new(l as f64, 2.0 * std::f64::consts::PI * r as f64 / lnq))).collect();
    let y = 2.0 * std::f64::consts::PI / lnq.abs();
    let tail = 2.0 * scale * gamma_line_tail(l as u32, y, harmonics + 1);
    Ok(FourierLimit::from_positive(1.0 / q, pos, tail, 0.0))
}

/// Weight of level `l` in the composite series: `(1−d^{−l})/((l+1)! ln d)`.
fn level_weight(d: f64, l: usize) -> f64 {
    (1.0 - d.powi(-(l as i32))) / (ln_gamma_real(l as f64 + 2.0).exp() * d.ln())
}

/// `A(x) = Σ_r (Σ_l ρ_{l+1} (1−d^{−l})/((l+1)! ln d) Γ(l − 2πir/ln d)) e^{2πirx}`
/// for the levels `l + 1 ≤ l_max` supplied by `rho`. The levels beyond are
/// covered by `level_remainder`, estimated from the a priori bound
/// `|ρ_n| ≤ 2d² ln n` and `sup L_l ≤ Σ_r |c_r(l)|`.
pub fn composite_limit_a(d: usize, rho: &RhoSequence, harmonics: usize, l_max: usize) -> Result<FourierLimit> {
    if d < 2 {
        return Err(Error::InvalidArgument("arity must be at least 2".into()));
    }
    if l_max < 2 || rho.max_n() < l_max {
        return Err(Error::InvalidArgument(format!("rho covers n ≤ {} but l_max = {l_max}", rho.max_n())));
    }
    let df = d as f64;
    let lnd = df.ln();
    let y = 2.0 * std::f64::consts::PI / lnd;
    let mut pos = vec![Complex64::new(0.0, 0.0); harmonics + 1];
    let mut tail = 0.0;
    for l in 1..l_max {
        let w = rho.rho(l + 1) * level_weight(df, l);
        if w == 0.0 {
            continue;
        }
        for (r, c) in pos.iter_mut().enumerate() {
            *c += w * gamma(Complex64::new(l as f64, -(r as f64) * y));
        }
        tail += 2.0 * w.abs() * gamma_line_tail(l as u32, y, harmonics + 1);
    }
    Ok(FourierLimit::from_positive(df, pos, tail, level_remainder(df, l_max)))
}

/// `Σ_{l ≥ l_max} 2d² ln(l+1)/(l+1) · sup_x L_l(x)` at `q = 1/d`.
fn level_remainder(d: f64, l_max: usize) -> f64 {
    let lnd = d.ln();
    let y = 2.0 * std::f64::consts::PI / lnd;
    let rho_bound = |l: f64| 2.0 * d * d * (l + 1.0).ln();
    let mut total = 0.0;
    for l in l_max..TAIL_LEVEL_SPLIT {
        // Σ_r |Γ(l + iry)| / Γ(l) in log space to avoid overflow
        let lg = ln_gamma_real(l as f64);
        let mut s = 1.0;
        let mut r = 1.0;
        loop {
            let t = (ln_gamma(Complex64::new(l as f64, r * y)).re - lg).exp();
            s += 2.0 * t;
            if t < 1e-17 * s {
                break;
            }
            r += 1.0;
        }
        let sup = ((1.0 - d.powi(-(l as i32))) / (l as f64 * lnd) * s).min(1.0);
        total += rho_bound(l as f64) / (l as f64 + 1.0) * sup;
    }
    // beyond the split, Σ_r |Γ(l+iry)|/Γ(l) ≤ 1 + √(2πl)/y + 1 (Gaussian profile)
    // so the summand is at most C ln(l+1) l^{-3/2}; integrate it
    let lsplit = TAIL_LEVEL_SPLIT.max(l_max) as f64;
    let c = 2.0 * d * d / lnd * ((2.0 * std::f64::consts::PI).sqrt() / y + 2.0 / lsplit.sqrt());
    total + c * 2.0 * ((lsplit + 1.0).ln() + 2.0) / lsplit.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::GapMode;

    #[test]
    fn l1_half_mean() {
        let f = log_periodic_limit_l(DecayParams::new(0.5, 1).unwrap(), DEFAULT_HARMONICS).unwrap();
        assert!((f.mean() - 0.5 / 2f64.ln()).abs() < 1e-14);
        let c1 = f.coefficient(1).unwrap();
        assert!(c1.norm() < 1e-4 && c1.norm() > 0.0);
        for r in 1..=8 {
            assert_eq!(f.coefficient(-r).unwrap(), f.coefficient(r).unwrap().conj());
        }
        assert!(f.tail_bound < 1e-30);
    }

    #[test]
    fn periodic_and_real() {
        let f = log_periodic_limit_l(DecayParams::new(0.2, 2).unwrap(), DEFAULT_HARMONICS).unwrap();
        for x in [0.0, 0.1, 0.37, 0.9] {
            assert!((f.eval(x) - f.eval(x + 1.0)).abs() < 1e-12);
            assert!(f.eval_complex(x).im.abs() < 1e-12);
        }
    }

    fn rho_seq(d: usize, vals: Vec<f64>) -> RhoSequence {
        let n = vals.len();
        RhoSequence { d, gap_mode: GapMode::Equal, values: vals, radii: vec![0.0; n] }
    }

    #[test]
    fn composite_examples() {
        let zero = composite_limit_a(2, &rho_seq(2, vec![0.0; 6]), 4, 7).unwrap();
        assert!(zero.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0));
        let single = composite_limit_a(2, &rho_seq(2, vec![1.0, 0.0, 0.0]), 4, 4).unwrap();
        assert!((single.mean() - 0.360_673_760_222_241).abs() < 1e-14);
        assert!(single.level_remainder > 0.0);
    }

    #[test]
    fn signs_agree() {
        // Γ(l − 2πir/ln d) at base d equals Γ(l + 2πir/ln q) at q = 1/d
        let a = composite_limit_a(3, &rho_seq(3, vec![0.0, 1.0]), 3, 3).unwrap();
        let l = log_periodic_limit_l(DecayParams::new(1.0 / 3.0, 2).unwrap(), 3).unwrap();
        for r in -3..=3 {
            let ratio = a.coefficient(r).unwrap() / l.coefficient(r).unwrap();
            assert!((ratio - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-13);
        }
    }
}
