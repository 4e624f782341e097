//! Monte Carlo estimates of `H_n` for one permuton and of `E H_n` over a
//! random tree law.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::models::PermutonModel;
use crate::rng::{mix2, StreamRng};
use crate::tree::{GapMode, PermutationLaw, TreeRealizationHandle};

/// Independent sampling streams per run; merged counts do not depend on the
/// number of worker threads.
pub const SAMPLING_BLOCKS: u64 = 64;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Largest `n · N` accepted by one estimation run.
pub const SAMPLING_BUDGET: u64 = 1 << 34;

const SAMPLE_STREAM: u64 = 0x5a3e_11ed;
const BOOTSTRAP_STREAM: u64 = 0xb007_57a9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Plugin,
    MillerMadow,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Plugin => "plugin",
            Method::MillerMadow => "miller_madow",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plugin" => Ok(Method::Plugin),
            "miller_madow" | "miller-madow" => Ok(Method::MillerMadow),
            _ => Err(Error::InvalidArgument(format!("unknown estimator method {s:?}"))),
        }
    }
}

/// `ln N − (1/N) Σ c ln c`.
pub fn plugin_entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let s: f64 = counts.iter().filter(|&&c| c > 1).map(|&c| c as f64 * (c as f64).ln()).sum();
    (n.ln() - s / n).max(0.0)
}

/// Plug-in estimate plus `(K − 1)/(2N)`, `K` the number of observed patterns.
pub fn miller_madow(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let k = counts.iter().filter(|&&c| c > 0).count() as f64;
    plugin_entropy(counts) + (k - 1.0) / (2.0 * total as f64)
}

fn apply(method: Method, counts: &[u64]) -> f64 {
    match method {
        Method::Plugin => plugin_entropy(counts),
        Method::MillerMadow => miller_madow(counts),
    }
}

/// Pattern counts keyed by Lehmer rank.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCounts {
    pub n: usize,
    pub counts: BTreeMap<u64, u64>,
}

impl PatternCounts {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn values(&self) -> Vec<u64> {
        self.counts.values().copied().collect()
    }

    fn merge(&mut self, other: &HashMap<u64, u64>) {
        for (&k, &c) in other {
            *self.counts.entry(k).or_insert(0) += c;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub n: usize,
    pub value: f64,
    /// Bootstrap standard error; absent when fewer than two samples.
    pub stderr: Option<f64>,
    pub method: Method,
    pub sample_count: u64,
    pub distinct_patterns: usize,
}

impl EntropyEstimate {
    /// `distinct_patterns / N`; values near 1 mean the sample is far too small.
    pub fn saturation(&self) -> f64 {
        self.distinct_patterns as f64 / self.sample_count as f64
    }
}

fn check_budget(n: usize, samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let work = (n as u64).saturating_mul(samples);
    if work > SAMPLING_BUDGET {
        return Err(Error::CapExceeded { what: "sampling work n*N", cap: SAMPLING_BUDGET, got: work });
    }
    Ok(())
}

/// Counts of the patterns of lengths `1..=n_max`, each draw of `n_max`
/// points supplying one pattern of every shorter length through its prefixes.
pub fn count_patterns_nested(model: &PermutonModel, n_max: usize, samples: u64, seed: u64) -> Result<Vec<PatternCounts>> {
    check_budget(n_max, samples)?;
    let base = StreamRng::new(seed, SAMPLE_STREAM);
    let blocks: Vec<Vec<HashMap<u64, u64>>> = (0..SAMPLING_BLOCKS)
        .into_par_iter()
        .map(|b| {
            let quota = samples / SAMPLING_BLOCKS + u64::from(b < samples % SAMPLING_BLOCKS);
            let mut rng = base.fork(b);
            let mut maps = vec![HashMap::new(); n_max];
            for _ in 0..quota {
                for (k, p) in model.sample_nested(n_max, &mut rng)?.iter().enumerate() {
                    *maps[k].entry(p.rank()).or_insert(0) += 1;
                }
            }
            Ok(maps)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<PatternCounts> = (1..=n_max).map(|n| PatternCounts { n, counts: BTreeMap::new() }).collect();
    for maps in &blocks {
        for (k, m) in maps.iter().enumerate() {
            out[k].merge(m);
        }
    }
    Ok(out)
}

/// Standard deviation of the estimator over multinomial resamples of the
/// count vector.
pub fn bootstrap_stderr(counts: &[u64], method: Method, resamples: usize, seed: u64) -> Result<Option<f64>> {
    let total: u64 = counts.iter().sum();
    if total < 2 || resamples < 2 {
        return Ok(None);
    }
    let mut rng = StreamRng::new(seed, BOOTSTRAP_STREAM);
    let n = total as f64;
    let mut buf = vec![0u64; counts.len()];
    let mut vals = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        // conditional binomials give an exact multinomial draw
        let mut left = total;
        let mut mass = 1.0;
        for (i, &c) in counts.iter().enumerate() {
            let p = c as f64 / n;
            let draw = if left == 0 || mass <= 0.0 {
                0
            } else if i + 1 == counts.len() || p >= mass {
                left
            } else {
                Binomial::new(left, (p / mass).min(1.0)).map_err(|e| Error::Numerical(e.to_string()))?.sample(&mut rng)
            };
            buf[i] = draw;
            left -= draw;
            mass -= p;
        }
        vals.push(apply(method, &buf));
    }
    let mean = vals.iter().sum::<f64>() / resamples as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok(Some(var.sqrt()))
}

fn estimate_from_counts(c: &PatternCounts, method: Method, seed: u64, with_stderr: bool) -> Result<EntropyEstimate> {
    let v = c.values();
    let stderr = if with_stderr { bootstrap_stderr(&v, method, BOOTSTRAP_RESAMPLES, mix2(seed, c.n as u64))? } else { None };
    Ok(EntropyEstimate {
        n: c.n,
        value: apply(method, &v),
        stderr,
        method,
        sample_count: c.total(),
        distinct_patterns: c.distinct(),
    })
}

/// `H_n(μ)` from `samples` patterns. A tree model keeps one realization for
/// every draw.
pub fn estimate_sampling_entropy(model: &PermutonModel, n: usize, samples: u64, seed: u64, method: Method) -> Result<EntropyEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let c = count_patterns_nested(model, n, samples, seed)?;
    estimate_from_counts(&c[n - 1], method, seed, true)
}

/// Estimates for `n = 1..=n_max` from one nested sample.
pub fn estimate_entropy_curve(model: &PermutonModel, n_max: usize, samples: u64, seed: u64, method: Method) -> Result<Vec<EntropyEstimate>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    count_patterns_nested(model, n_max, samples, seed)?.iter().map(|c| estimate_from_counts(c, method, seed, true)).collect()
}

/// Quenched mean `E H_n` over independent realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEntropyEstimate {
    pub n: usize,
    pub mean: f64,
    /// Half-width of the 95% t-interval over realizations.
    pub ci_radius: f64,
    pub realization_count: usize,
    pub per_realization: Vec<f64>,
    /// Sample standard deviation of `H_n / n` across realizations.
    pub spread_per_n: f64,
}

/// Mean entropy curves for `n = 1..=n_max`.
pub fn estimate_mean_curve(
    law: &PermutationLaw,
    gap_mode: GapMode,
    n_max: usize,
    realizations: usize,
    samples: u64,
    seed: u64,
    method: Method,
) -> Result<Vec<MeanEntropyEstimate>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if realizations < 2 {
        return Err(Error::InvalidArgument("at least two realizations are needed for an interval".into()));
    }
    check_budget(n_max, samples.saturating_mul(realizations as u64))?;
    let per: Vec<Vec<f64>> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let handle = TreeRealizationHandle::new(mix2(seed, r), law.clone(), gap_mode);
            let model = PermutonModel::Tree(handle);
            let counts = count_patterns_nested(&model, n_max, samples, mix2(!seed, r))?;
            Ok(counts.iter().map(|c| apply(method, &c.values())).collect())
        })
        .collect::<Result<_>>()?;
    let t = StudentsT::new(0.0, 1.0, (realizations - 1) as f64).map_err(|e| Error::Numerical(e.to_string()))?;
    let q = t.inverse_cdf(0.975);
    let rf = realizations as f64;
    Ok((1..=n_max)
        .map(|n| {
            let vals: Vec<f64> = per.iter().map(|v| v[n - 1]).collect();
            let mean = vals.iter().sum::<f64>() / rf;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (rf - 1.0);
            MeanEntropyEstimate {
                n,
                mean,
                ci_radius: q * (var / rf).sqrt(),
                realization_count: realizations,
                spread_per_n: var.sqrt() / n as f64,
                per_realization: vals,
            }
        })
        .collect())
}

pub fn estimate_mean_entropy(
    law: &PermutationLaw,
    gap_mode: GapMode,
    n: usize,
    realizations: usize,
    samples: u64,
    seed: u64,
    method: Method,
) -> Result<MeanEntropyEstimate> {
    let mut c = estimate_mean_curve(law, gap_mode, n, realizations, samples, seed, method)?;
    Ok(c.pop().expect("n >= 1"))
}

/// `ρ_n` recovered from a mean curve, with linearly propagated radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoSequence {
    pub d: usize,
    pub gap_mode: GapMode,
    /// Entry `i` is `ρ_{i+2}`.
    pub values: Vec<f64>,
    pub radii: Vec<f64>,
}

impl RhoSequence {
    /// `ρ_n` for `n ≥ 2`.
    pub fn rho(&self, n: usize) -> f64 {
        if n < 2 {
            0.0
        } else {
            self.values.get(n - 2).copied().unwrap_or(0.0)
        }
    }

    pub fn max_n(&self) -> usize {
        self.values.len() + 1
    }

    /// The a priori bound `2 d² ln n`.
    pub fn upper_bound(&self, n: usize) -> f64 {
        2.0 * (self.d * self.d) as f64 * (n as f64).ln()
    }

    /// Indices `n` whose value leaves `[−radius, bound + radius]`.
    pub fn out_of_bounds(&self) -> Vec<usize> {
        (2..=self.max_n())
            .filter(|&n| {
                let (v, r) = (self.rho(n), self.radii[n - 2]);
                v < -r || v > self.upper_bound(n) + r
            })
            .collect()
    }
}

/// Coefficients `w_k`, `k < n`, with `y_n = ρ_n + Σ_k w_k y_k`.
pub fn recursion_weights(d: usize, gap_mode: GapMode, n: usize) -> Vec<f64> {
    let df = d as f64;
    match gap_mode {
        GapMode::Equal => {
            let den = df.powi(n as i32 - 1) - 1.0;
            (0..n).map(|k| binomial(n as u64, k as u64) * (df - 1.0).powi((n - k) as i32) / den).collect()
        }
        GapMode::UniformGaps => {
            let total = binomial((n + d - 1) as u64, (d - 1) as u64);
            let p = |k: usize| binomial((n - k + d - 2) as u64, (d - 2) as u64) / total;
            let scale = df / (1.0 - df * p(n));
            (0..n).map(|k| scale * p(k)).collect()
        }
    }
}

/// `y[i]` is `E H_{i+1}` and `radii[i]` its uncertainty; `y_0 = 0`.
pub fn implied_rho(y: &[f64], radii: &[f64], d: usize, gap_mode: GapMode) -> Result<RhoSequence> {
    if y.len() != radii.len() {
        return Err(Error::LengthMismatch { expected: y.len(), got: radii.len() });
    }
    if d < 2 {
        return Err(Error::InvalidArgument("arity must be at least 2".into()));
    }
    let at = |v: &[f64], k: usize| if k == 0 { 0.0 } else { v[k - 1] };
    let mut values = Vec::new();
    let mut out_radii = Vec::new();
    for n in 2..=y.len() {
        let w = recursion_weights(d, gap_mode, n);
        let mut rho = at(y, n);
        let mut rad = at(radii, n);
        for (k, wk) in w.iter().enumerate() {
            rho -= wk * at(y, k);
            rad += wk.abs() * at(radii, k);
        }
        values.push(rho);
        out_radii.push(rad);
    }
    Ok(RhoSequence { d, gap_mode, values, radii: out_radii })
}

/// The mean curve `y_1..=y_{n_max}` generated by `ρ`.
pub fn curve_from_rho(rho: &RhoSequence, n_max: usize) -> Vec<f64> {
    let mut y = vec![0.0; n_max + 1];
    for n in 2..=n_max {
        let w = recursion_weights(rho.d, rho.gap_mode, n);
        y[n] = rho.rho(n) + w.iter().enumerate().map(|(k, wk)| wk * y[k]).sum::<f64>();
    }
    y.split_off(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::ln_factorial;
    use crate::models::PiecewiseAffineMap;

    #[test]
    fn plugin_examples() {
        assert!((plugin_entropy(&[2, 2]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(plugin_entropy(&[4]), 0.0);
        assert!((plugin_entropy(&[3, 1]) - 0.562_335_144_618_808_4).abs() < 1e-12);
        assert_eq!(miller_madow(&[4]), 0.0);
        assert!((miller_madow(&[2, 2]) - (2f64.ln() + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn identity_map_has_zero_entropy() {
        let m = PermutonModel::Function(PiecewiseAffineMap::identity());
        let e = estimate_sampling_entropy(&m, 5, 1000, 3, Method::Plugin).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.stderr, Some(0.0));
        assert_eq!(e.distinct_patterns, 1);
    }

    #[test]
    fn block_21_n2() {
        let m = PermutonModel::block("21".parse().unwrap());
        let e = estimate_sampling_entropy(&m, 2, 100_000, 11, Method::Plugin).unwrap();
        let se = e.stderr.unwrap();
        assert!(se > 0.0 && se < 0.01);
        assert!((e.value - 0.562_335_144_618_808_4).abs() < 3.0 * se + 1e-3, "{} ± {se}", e.value);
    }

    #[test]
    fn uniform_sym3_miller_madow() {
        let e = estimate_sampling_entropy(&PermutonModel::Lebesgue, 3, 600_000, 5, Method::MillerMadow).unwrap();
        assert!((e.value - 6f64.ln()).abs() < 0.01);
    }

    #[test]
    fn nested_counts_have_the_right_totals() {
        let c = count_patterns_nested(&PermutonModel::Lebesgue, 4, 1000, 1).unwrap();
        for (k, pc) in c.iter().enumerate() {
            assert_eq!(pc.n, k + 1);
            assert_eq!(pc.total(), 1000);
        }
        assert_eq!(c[0].distinct(), 1);
    }

    #[test]
    fn rho_of_zero_curve_is_zero() {
        for mode in [GapMode::Equal, GapMode::UniformGaps] {
            let r = implied_rho(&[0.0; 6], &[0.0; 6], 3, mode).unwrap();
            assert!(r.values.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn rho_round_trip() {
        let y: Vec<f64> = (1..=9).map(|n| ln_factorial(n)).collect();
        for d in 2..5 {
            for mode in [GapMode::Equal, GapMode::UniformGaps] {
                let r = implied_rho(&y, &vec![0.0; y.len()], d, mode).unwrap();
                let back = curve_from_rho(&r, y.len());
                for (a, b) in y.iter().zip(&back) {
                    assert!((a - b).abs() < 1e-9 * a.max(1.0));
                }
            }
        }
    }

    #[test]
    fn uniform_d2_weights() {
        // 2/(n − 1) for every k < n
        let w = recursion_weights(2, GapMode::UniformGaps, 6);
        assert!(w.iter().all(|&x| (x - 0.4).abs() < 1e-15));
    }

    #[test]
    fn dirac_identity_mean_is_zero() {
        let law = PermutationLaw::dirac(crate::perm::Permutation::identity(2)).unwrap();
        let m = estimate_mean_entropy(&law, GapMode::Equal, 4, 3, 200, 1, Method::Plugin).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.ci_radius, 0.0);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("plugin".parse::<Method>().unwrap(), Method::Plugin);
        assert_eq!("miller_madow".parse::<Method>().unwrap(), Method::MillerMadow);
        assert!("nsb".parse::<Method>().is_err());
    }
}
