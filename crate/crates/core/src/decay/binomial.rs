//! Simple binomial decay: hitting probabilities `δ_l(n)` and tie
//! probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window half-width in standard deviations for binomial sums.
pub const WINDOW_SIGMAS: f64 = 12.0;
/// Largest tail mass a window may drop; wider tails use the full range.
pub const WINDOW_TAIL_MAX: f64 = 1e-15;
/// Largest table length.
pub const TABLE_CAP: usize = 1 << 22;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln n! − ((n + ½) ln n − n + ln √(2π))` for integer `n ≥ 1`.
fn stirlerr(n: u64) -> f64 {
    if n <= 15 {
        let lnf: f64 = (2..=n).map(|i| (i as f64).ln()).sum();
        let nf = n as f64;
        return lnf - (nf + 0.5) * nf.ln() + nf - LN_SQRT_2PI;
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// `x ln(x/m) + m − x` without cancellation near `x = m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `C(n,k) p^k (1−p)^{n−k}` with full relative accuracy (saddle-point form).
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if k == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if k == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let kf = k as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(nf - kf, nf * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// `Σ_{k ∈ [lo, hi)} Binom(k; n, p) f(k)` restricted to `np ± 12σ` when the
/// Bernstein bound on the dropped mass is below [`WINDOW_TAIL_MAX`]. Returns
/// the sum and the dropped-mass bound (0 when nothing was dropped).
pub(crate) fn windowed_binomial_sum(n: u64, p: f64, lo: u64, hi: u64, f: impl Fn(u64) -> f64) -> (f64, f64) {
    if lo >= hi {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let mean = nf * p;
    let var = nf * p * (1.0 - p);
    let t = WINDOW_SIGMAS * var.sqrt();
    let bound = 2.0 * (-t * t / (2.0 * (var + t / 3.0))).exp();
    let (mut a, mut b, mut dropped) = (lo, hi, 0.0);
    if var > 0.0 && bound <= WINDOW_TAIL_MAX {
        let wl = (mean - t).ceil().max(0.0) as u64;
        let wh = (mean + t).floor() as u64 + 1;
        if wl > a || wh < b {
            a = a.max(wl);
            b = b.min(wh);
            dropped = bound;
        }
    }
    if a >= b {
        return (0.0, dropped);
    }
    // start at the mode (or the nearest window point), then use pmf ratios
    let mode = (((nf + 1.0) * p).floor() as u64).clamp(a, b - 1);
    let up = p / (1.0 - p);
    let mut acc = Compensated::default();
    let start = binomial_pmf(mode, n, p);
    let mut w = start;
    for k in mode..b {
        if k > mode {
            w *= (n - k + 1) as f64 / k as f64 * up;
        }
        acc.add(w * f(k));
    }
    w = start;
    for k in (a..mode).rev() {
        w *= (k + 1) as f64 / (n - k) as f64 / up;
        acc.add(w * f(k));
    }
    (acc.value(), dropped)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayParams {
    pub q: f64,
    pub l: usize,
}

impl DecayParams {
    pub fn new(q: f64, l: usize) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("q must lie in (0,1), got {q}")));
        }
        if l == 0 {
            return Err(Error::InvalidArgument("level must be at least 1".into()));
        }
        Ok(Self { q, l })
    }
}

/// `δ_l(n) = P(∃p: Y_p = l | Y_0 = n)` for `Y_{p+1} ~ Binom(Y_p, q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub params: DecayParams,
    /// Entry `n` is `δ_l(n)`, `n = 0..=N`.
    pub values: Vec<f64>,
    /// Sum of the binomial mass dropped by windowing, divided by `1 − q^n`;
    /// bounds the absolute error of every entry.
    pub window_error: f64,
}

impl DecayTable {
    pub fn get(&self, n: usize) -> Option<f64> {
        self.values.get(n).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `δ̃_l(n) = (1−q)^l/(1−q^l) δ_l(n)`: probability that exactly `l`
    /// players share the top score.
    pub fn tied_winner_probability(&self, n: usize) -> Option<f64> {
        let DecayParams { q, l } = self.params;
        let f = (1.0 - q).powi(l as i32) / (1.0 - q.powi(l as i32));
        self.get(n).map(|v| f * v)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,delta\n");
        for (n, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{n},{}\n", crate::io::fmt_f64(*v)));
        }
        s
    }
}

/// Exact recursion `δ(n) = Σ_{l≤k<n} Binom(k;n,q) δ(k) / (1 − q^n)`.
pub fn binomial_decay_table(params: DecayParams, n_max: usize) -> Result<DecayTable> {
    let DecayParams { q, l } = DecayParams::new(params.q, params.l)?;
    if n_max < l {
        return Err(Error::InvalidArgument(format!("table length {n_max} is below the level {l}")));
    }
    if n_max > TABLE_CAP {
        return Err(Error::CapExceeded { what: "decay table length", cap: TABLE_CAP as u64, got: n_max as u64 });
    }
    let mut values = vec![0.0; n_max + 1];
    values[l] = 1.0;
    let mut err = 0.0;
    for n in l + 1..=n_max {
        let (s, dropped) = windowed_binomial_sum(n as u64, q, l as u64, n as u64, |k| values[k as usize]);
        let stay = 1.0 - q.powi(n as i32);
        values[n] = s / stay;
        err += dropped / stay;
    }
    Ok(DecayTable { params: DecayParams { q, l }, values, window_error: err })
}

/// `δ̃_l(n)`.
pub fn tied_winner_probability(table: &DecayTable, n: usize) -> Result<f64> {
    table.tied_winner_probability(n).ok_or(Error::IndexOutOfRange { index: n, len: table.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial;

    #[test]
    fn pmf_matches_direct_formula() {
        for n in [1u64, 2, 7, 30, 60] {
            for k in 0..=n {
                for p in [0.5f64, 0.1, 1.0 / 3.0, 0.97] {
                    let direct = binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
                    let v = binomial_pmf(k, n, p);
                    assert!((v - direct).abs() <= 1e-13 * direct.max(1e-300), "{n} {k} {p}: {v} vs {direct}");
                }
            }
        }
        let total: f64 = (0..=5000).map(|k| binomial_pmf(k, 5000, 0.3)).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn windowed_sum_of_ones_is_one() {
        for n in [10u64, 100, 1000, 100_000] {
            let (s, dropped) = windowed_binomial_sum(n, 0.5, 0, n + 1, |_| 1.0);
            assert!((s - 1.0).abs() < 1e-12, "{n}: {s}");
            assert!(dropped <= WINDOW_TAIL_MAX);
        }
    }

    #[test]
    fn small_values() {
        let t = binomial_decay_table(DecayParams::new(0.5, 1).unwrap(), 4).unwrap();
        assert_eq!(t.values[0], 0.0);
        assert_eq!(t.values[1], 1.0);
        assert_eq!(t.values[2], 2.0 / 3.0);
        assert_eq!(t.tied_winner_probability(1), Some(1.0));
        let t2 = binomial_decay_table(DecayParams::new(0.5, 2).unwrap(), 4).unwrap();
        assert!((t2.tied_winner_probability(2).unwrap() - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn values_are_probabilities() {
        let t = binomial_decay_table(DecayParams::new(0.3, 3).unwrap(), 3000).unwrap();
        assert!(t.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(t.window_error < 1e-10);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DecayParams::new(1.0, 1).is_err());
        assert!(DecayParams::new(0.5, 0).is_err());
        assert!(binomial_decay_table(DecayParams { q: 0.5, l: 5 }, 3).is_err());
    }
}
