//! Distributions over Sym(n) and their Shannon entropy (nats).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{factorial_u64, Permutation};

/// Largest n for which a distribution may be enumerated densely.
pub const ENUMERATION_CAP: usize = 12;

const SUM_TOL: f64 = 1e-12;

/// A sparse probability vector over Sym(n). Absent keys have probability 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct PatternDistribution {
    n: usize,
    probs: BTreeMap<Permutation, f64>,
}

#[derive(Deserialize)]
struct RawDistribution {
    n: usize,
    probs: BTreeMap<Permutation, f64>,
}

impl TryFrom<RawDistribution> for PatternDistribution {
    type Error = Error;
    fn try_from(r: RawDistribution) -> Result<Self> {
        PatternDistribution::new(r.n, r.probs)
    }
}

impl PatternDistribution {
    /// Validates lengths, ranges and normalization. Zero entries are dropped.
    pub fn new(n: usize, probs: BTreeMap<Permutation, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (k, &p) in &probs {
            if k.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: k.len() });
            }
            if !(0.0..=1.0 + SUM_TOL).contains(&p) || p.is_nan() {
                return Err(Error::InvalidDistribution(format!("p({k}) = {p}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
        }
        let probs = probs.into_iter().filter(|&(_, p)| p > 0.0).collect();
        Ok(Self { n, probs })
    }

    /// Builds from a dense vector indexed by Lehmer rank.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() as u64 != factorial_u64(n) {
            return Err(Error::LengthMismatch { expected: factorial_u64(n) as usize, got: dense.len() });
        }
        let probs = dense
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(r, &p)| (Permutation::unrank(n, r as u64).expect("rank in range"), p))
            .collect();
        Self::new(n, probs)
    }

    /// Normalizes non-negative counts.
    pub fn from_counts(n: usize, counts: &BTreeMap<Permutation, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::InvalidDistribution("no counts".into()));
        }
        let probs = counts.iter().map(|(k, &c)| (k.clone(), c as f64 / total as f64)).collect();
        Self::new(n, probs)
    }

    pub fn point_mass(sigma: Permutation) -> Self {
        let n = sigma.len();
        Self { n, probs: BTreeMap::from([(sigma, 1.0)]) }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n > ENUMERATION_CAP {
            return Err(Error::CapExceeded { what: "enumeration length", cap: ENUMERATION_CAP as u64, got: n as u64 });
        }
        let p = 1.0 / factorial_u64(n) as f64;
        Ok(Self { n, probs: Permutation::all(n).map(|s| (s, p)).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<Permutation, f64> {
        &self.probs
    }

    pub fn prob(&self, sigma: &Permutation) -> f64 {
        self.probs.get(sigma).copied().unwrap_or(0.0)
    }

    pub fn support_size(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy(&self) -> f64 {
        shannon_entropy(self)
    }

    /// Image under a relabeling of Sym(n) (e.g. reversal).
    pub fn map_patterns<F: Fn(&Permutation) -> Permutation>(&self, f: F) -> Self {
        let mut probs = BTreeMap::new();
        for (k, &p) in &self.probs {
            *probs.entry(f(k)).or_insert(0.0) += p;
        }
        Self { n: self.n, probs }
    }

    /// Largest absolute difference of any single probability.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &p) in &self.probs {
            worst = worst.max((p - other.prob(k)).abs());
        }
        for (k, &p) in &other.probs {
            worst = worst.max((p - self.prob(k)).abs());
        }
        worst
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        let mut s = 0.0;
        for (k, &p) in &self.probs {
            s += (p - other.prob(k)).abs();
        }
        for (k, &p) in &other.probs {
            if !self.probs.contains_key(k) {
                s += p;
            }
        }
        0.5 * s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("distribution serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `−Σ p ln p` with `0 ln 0 = 0`.
/// Neumaier-compensated, so n! equal terms do not drift.
pub fn entropy_of<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    let (mut h, mut c) = (0.0f64, 0.0f64);
    for p in probs {
        if p > 0.0 {
            let t = -p * p.ln();
            let s = h + t;
            c += if h.abs() >= t.abs() { (h - s) + t } else { (t - s) + h };
            h = s;
        }
    }
    (h + c).max(0.0)
}

pub fn shannon_entropy(d: &PatternDistribution) -> f64 {
    entropy_of(d.probs.values().copied())
}

/// Entropy bracket for a finite mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureBounds {
    pub lower: f64,
    pub mixture: f64,
    pub upper: f64,
}

/// `lower = Σ a_k H(ν_k)`, `upper = lower + H(a)` with the weights normalized
/// to sum to one, and the entropy of the mixture itself in between.
pub fn mixture_entropy_bounds(components: &[(f64, PatternDistribution)]) -> Result<MixtureBounds> {
    if components.is_empty() {
        return Err(Error::InvalidArgument("empty mixture".into()));
    }
    let n = components[0].1.n;
    let mut s = 0.0;
    for (w, d) in components {
        if d.n != n {
            return Err(Error::LengthMismatch { expected: n, got: d.n });
        }
        if !(*w >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative weight {w}")));
        }
        s += w;
    }
    if s <= 0.0 {
        return Err(Error::InvalidArgument("weights sum to zero".into()));
    }
    let mut lower = 0.0;
    let mut mix: BTreeMap<&Permutation, f64> = BTreeMap::new();
    for (w, d) in components {
        let a = w / s;
        lower += a * d.entropy();
        for (k, &p) in &d.probs {
            *mix.entry(k).or_insert(0.0) += a * p;
        }
    }
    let mixture = entropy_of(mix.values().copied());
    let upper = lower + entropy_of(components.iter().map(|(w, _)| w / s));
    Ok(MixtureBounds { lower, mixture, upper })
}

/// `max_{k≥2} (|H_k − H_{k−1}| − ln k)` for a sequence indexed from n = 1.
///
/// Non-positive for every sampling-entropy sequence. Returns `-inf` when the
/// sequence has fewer than two terms.
pub fn quasi_monotonicity_gap(seq: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for k in 2..=seq.len() {
        let v = (seq[k - 1] - seq[k - 2]).abs() - (k as f64).ln();
        worst = worst.max(v);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn dist(pairs: &[(&str, f64)]) -> PatternDistribution {
        let n = pairs[0].0.len();
        PatternDistribution::new(n, pairs.iter().map(|&(k, v)| (p(k), v)).collect()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        assert!((PatternDistribution::uniform(3).unwrap().entropy() - 6f64.ln()).abs() < 1e-15);
        assert_eq!(PatternDistribution::point_mass(p("231")).entropy(), 0.0);
        let d = dist(&[("21", 0.75), ("12", 0.25)]);
        assert!((d.entropy() - 0.562_335_144_618_808_3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_distributions() {
        let bad = BTreeMap::from([(p("12"), 0.5), (p("21"), 0.4)]);
        assert!(PatternDistribution::new(2, bad).is_err());
        let mixed = BTreeMap::from([(p("12"), 0.5), (p("1"), 0.5)]);
        assert!(PatternDistribution::new(2, mixed).is_err());
    }

    #[test]
    fn mixture_examples() {
        let nu = dist(&[("21", 0.75), ("12", 0.25)]);
        let b = mixture_entropy_bounds(&[(1.0, nu.clone())]).unwrap();
        assert!((b.lower - nu.entropy()).abs() < 1e-15);
        assert!((b.mixture - nu.entropy()).abs() < 1e-15);
        assert!((b.upper - nu.entropy()).abs() < 1e-15);

        let b = mixture_entropy_bounds(&[(0.5, nu.clone()), (0.5, nu.clone())]).unwrap();
        assert!((b.mixture - nu.entropy()).abs() < 1e-15);
        assert!((b.upper - nu.entropy() - 2f64.ln()).abs() < 1e-15);

        let b = mixture_entropy_bounds(&[
            (0.5, PatternDistribution::point_mass(p("12"))),
            (0.5, PatternDistribution::point_mass(p("21"))),
        ])
        .unwrap();
        assert_eq!(b.lower, 0.0);
        assert!((b.mixture - 2f64.ln()).abs() < 1e-15);
        assert!((b.upper - 2f64.ln()).abs() < 1e-15);

        let mixed = [(0.5, PatternDistribution::point_mass(p("12"))), (0.5, PatternDistribution::point_mass(p("1")))];
        assert!(mixture_entropy_bounds(&mixed).is_err());
    }

    #[test]
    fn quasi_monotonicity_examples() {
        assert!(quasi_monotonicity_gap(&[0.0, 2f64.ln(), 6f64.ln()]) <= 1e-15);
        assert!(quasi_monotonicity_gap(&[0.0, 0.0, 0.0]) <= 0.0);
        let v = quasi_monotonicity_gap(&[0.0, 2.0]);
        assert!((v - (2.0 - 2f64.ln())).abs() < 1e-15 && v > 0.0);
        assert_eq!(quasi_monotonicity_gap(&[0.0]), f64::NEG_INFINITY);
    }

    #[test]
    fn json_shape() {
        let d = dist(&[("21", 0.75), ("12", 0.25)]);
        let s = d.to_json();
        assert_eq!(s, r#"{"n":2,"probs":{"12":0.25,"21":0.75}}"#);
        assert_eq!(PatternDistribution::from_json(&s).unwrap(), d);
        assert!(PatternDistribution::from_json(r#"{"n":2,"probs":{"12":0.2}}"#).is_err());
    }

    #[test]
    fn dense_round_trip() {
        let d = PatternDistribution::from_dense(3, &[0.5, 0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(d.prob(&p("123")), 0.5);
        assert_eq!(d.prob(&p("321")), 0.5);
        assert_eq!(d.support_size(), 2);
    }
}
