//! Level coefficients `α_l(n)`: the expected number of size-`l` classes in
//! the recursive splitting of `n` items.

use serde::{Deserialize, Serialize};

use super::binomial::{windowed_binomial_sum, Compensated};
use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::tree::GapMode;

pub const ALPHA_N_CAP: usize = 100_000;
pub const ALPHA_ARITY_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub d: usize,
    pub l: usize,
    pub gap_mode: GapMode,
    /// Entry `n` is `α_l(n)`, `n = 0..=N`.
    pub values: Vec<f64>,
    /// Windowing error bound (equal gaps only).
    pub window_error: f64,
}

impl AlphaTable {
    /// `β_l(n) = l α_l(n)/n`, the probability that a given item ends in a
    /// size-`l` class.
    pub fn beta(&self, n: usize) -> Option<f64> {
        if n == 0 {
            return Some(0.0);
        }
        self.values.get(n).map(|a| self.l as f64 * a / n as f64)
    }
}

fn check(d: usize, l: usize, n_max: usize) -> Result<()> {
    if !(2..=ALPHA_ARITY_CAP).contains(&d) {
        return Err(Error::InvalidArgument(format!("arity must lie in 2..={ALPHA_ARITY_CAP}, got {d}")));
    }
    if l == 0 || n_max < l {
        return Err(Error::InvalidArgument(format!("need 1 ≤ l ≤ N, got l = {l}, N = {n_max}")));
    }
    if n_max > ALPHA_N_CAP {
        return Err(Error::CapExceeded { what: "alpha table length", cap: ALPHA_N_CAP as u64, got: n_max as u64 });
    }
    Ok(())
}

/// Equal gaps: `α(n) = d/(1 − d^{1−n}) Σ_{k<n} Binom(k; n, 1/d) α(k)`.
pub fn alpha_equal_table(d: usize, l: usize, n_max: usize) -> Result<AlphaTable> {
    check(d, l, n_max)?;
    let df = d as f64;
    let mut values = vec![0.0; n_max + 1];
    values[l] = 1.0;
    let mut err = 0.0;
    let mut max_alpha: f64 = 1.0;
    for n in l + 1..=n_max {
        let (s, dropped) = windowed_binomial_sum(n as u64, 1.0 / df, l as u64, n as u64, |k| values[k as usize]);
        let scale = df / (1.0 - df.powi(1 - n as i32));
        values[n] = scale * s;
        err += scale * dropped * max_alpha;
        max_alpha = max_alpha.max(values[n]);
    }
    Ok(AlphaTable { d, l, gap_mode: GapMode::Equal, values, window_error: err })
}

/// `P(k of n items land in the first part)` under uniform gaps:
/// `C(n−k+d−2, d−2)/C(n+d−1, d−1)`.
pub fn uniform_allocation_weights(d: usize, n: usize) -> Vec<f64> {
    let total = binomial((n + d - 1) as u64, (d - 1) as u64);
    (0..=n).map(|k| binomial((n - k + d - 2) as u64, (d - 2) as u64) / total).collect()
}

/// Uniform gaps: `α(n) = d Σ_{k<n} C(n−k+d−2, d−2) α(k) / (C(n+d−1, d−1) − d)`.
/// The kernel `C(j+d−2, d−2)` is a `(d−1)`-fold iterated prefix sum, so the
/// table costs `O(N d)`.
pub fn alpha_uniform_table(d: usize, l: usize, n_max: usize) -> Result<AlphaTable> {
    check(d, l, n_max)?;
    let df = d as f64;
    let mut values = vec![0.0; n_max + 1];
    // s[j] = S^{(j+1)}(n−1)
    let mut s = vec![Compensated::default(); d - 1];
    for n in 0..=n_max {
        let a = if n < l {
            0.0
        } else if n == l {
            1.0
        } else {
            let t: f64 = s.iter().map(Compensated::value).sum();
            df * t / (binomial((n + d - 1) as u64, (d - 1) as u64) - df)
        };
        values[n] = a;
        let mut carry = a;
        for sj in s.iter_mut() {
            sj.add(carry);
            carry = sj.value();
        }
    }
    Ok(AlphaTable { d, l, gap_mode: GapMode::UniformGaps, values, window_error: 0.0 })
}

pub fn alpha_table(d: usize, l: usize, n_max: usize, gap_mode: GapMode) -> Result<AlphaTable> {
    match gap_mode {
        GapMode::Equal => alpha_equal_table(d, l, n_max),
        GapMode::UniformGaps => alpha_uniform_table(d, l, n_max),
    }
}

/// Largest relative residual of `(n+d−1)_{d−1} a(n) = d(d−1) Σ_{k≤n} (n−k+d−2)_{d−2} a(k)`
/// over `n ∈ [from, a.len())`.
pub fn uniform_recursion_residual(d: usize, a: &[f64], from: usize) -> f64 {
    let ff = |x: f64, m: usize| (0..m).map(|i| x - i as f64).product::<f64>();
    let mut worst: f64 = 0.0;
    for n in from..a.len() {
        let lhs = ff((n + d - 1) as f64, d - 1) * a[n];
        let mut rhs = Compensated::default();
        let mut scale = lhs.abs();
        for (k, &ak) in a.iter().enumerate().take(n + 1) {
            let t = (d * (d - 1)) as f64 * ff((n - k + d - 2) as f64, d - 2) * ak;
            rhs.add(t);
            scale += t.abs();
        }
        if scale > 0.0 {
            worst = worst.max((lhs - rhs.value()).abs() / scale);
        }
    }
    worst
}

/// Largest relative residual of the equal-gap recursion over `n ∈ [from, a.len())`.
pub fn equal_recursion_residual(d: usize, a: &[f64], from: usize) -> f64 {
    let df = d as f64;
    let mut worst: f64 = 0.0;
    for n in from..a.len() {
        let den = df.powi(n as i32 - 1) - 1.0;
        let mut rhs = Compensated::default();
        let mut scale = a[n].abs();
        for (k, &ak) in a.iter().enumerate().take(n) {
            let t = binomial(n as u64, k as u64) * (df - 1.0).powi((n - k) as i32) / den * ak;
            rhs.add(t);
            scale += t.abs();
        }
        if scale > 0.0 {
            worst = worst.max((a[n] - rhs.value()).abs() / scale);
        }
    }
    worst
}
