//! Random d-ary tree permutons: laws on Sym(d), lazily materialized
//! realizations, truncations, exact expectations and the class X_Π.

mod class;
mod density;
mod sampler;
mod truncation;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::{mix2, unit_open};

pub use class::{class_membership, forbidden_pattern, patterns_of_set};
pub use density::{
    allocation_probability, expected_pattern_density, expected_pattern_density_exact, expected_pattern_distribution,
    DensityScalar,
};
pub use sampler::LazySample;
pub use truncation::{realization_gap_stats, realize_truncation, GapStats, TruncatedRealization};

/// Largest supported arity.
pub const MAX_ARITY: usize = 16;

/// A probability distribution `F` on Sym(d).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLaw", into = "RawLaw")]
pub struct PermutationLaw {
    d: usize,
    support: Vec<Permutation>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawLaw {
    d: usize,
    weights: BTreeMap<Permutation, f64>,
}

impl TryFrom<RawLaw> for PermutationLaw {
    type Error = Error;
    fn try_from(r: RawLaw) -> Result<Self> {
        PermutationLaw::new(r.d, r.weights)
    }
}

impl From<PermutationLaw> for RawLaw {
    fn from(l: PermutationLaw) -> Self {
        RawLaw { d: l.d, weights: l.support.into_iter().zip(l.weights).collect() }
    }
}

impl PermutationLaw {
    pub fn new(d: usize, weights: BTreeMap<Permutation, f64>) -> Result<Self> {
        if !(2..=MAX_ARITY).contains(&d) {
            return Err(Error::InvalidArgument(format!("arity {d} outside 2..={MAX_ARITY}")));
        }
        let mut support = Vec::new();
        let mut w = Vec::new();
        let mut total = 0.0;
        for (k, p) in weights {
            if k.len() != d {
                return Err(Error::LengthMismatch { expected: d, got: k.len() });
            }
            if !(p >= 0.0) {
                return Err(Error::InvalidDistribution(format!("F({k}) = {p}")));
            }
            total += p;
            if p > 0.0 {
                support.push(k);
                w.push(p);
            }
        }
        if support.is_empty() || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("law weights sum to {total}")));
        }
        let mut cumulative = Vec::with_capacity(w.len());
        let mut acc = 0.0;
        for &p in &w {
            acc += p;
            cumulative.push(acc);
        }
        Ok(Self { d, support, weights: w, cumulative })
    }

    /// Uniform law on Sym(d).
    pub fn uniform(d: usize) -> Result<Self> {
        let all: Vec<Permutation> = Permutation::all(d).collect();
        let p = 1.0 / all.len() as f64;
        Self::new(d, all.into_iter().map(|s| (s, p)).collect())
    }

    pub fn dirac(pi: Permutation) -> Result<Self> {
        Self::new(pi.len(), BTreeMap::from([(pi, 1.0)]))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// The support Π in lexicographic order.
    pub fn support(&self) -> &[Permutation] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Inverse-CDF draw over the support order.
    pub fn draw_index(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u).min(self.support.len() - 1)
    }

    pub fn is_dirac_identity(&self) -> bool {
        self.support.len() == 1 && self.support[0] == Permutation::identity(self.d)
    }
}

/// How a node splits its interval among its `d` children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Every child gets `1/d`.
    Equal,
    /// Gaps of `d−1` independent uniform points.
    UniformGaps,
}

/// One realization of a random tree permuton, keyed by `seed`.
///
/// Node data (label and gaps) are pure functions of the seed and the node's
/// path, so nothing is stored and any depth can be reached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeRealizationHandle {
    pub seed: u64,
    pub law: PermutationLaw,
    pub gap_mode: GapMode,
}

const ROOT_SALT: u64 = 0x7265_616c_697a_6521;
const LABEL_SALT: u64 = 1;
const CUT_SALT: u64 = 2;
const CHILD_SALT: u64 = 0x100;

impl TreeRealizationHandle {
    pub fn new(seed: u64, law: PermutationLaw, gap_mode: GapMode) -> Self {
        Self { seed, law, gap_mode }
    }

    pub fn d(&self) -> usize {
        self.law.d()
    }

    pub(crate) fn root_key(&self) -> u64 {
        mix2(self.seed, ROOT_SALT)
    }

    pub(crate) fn child_key(key: u64, digit: usize) -> u64 {
        mix2(key, CHILD_SALT + digit as u64)
    }

    /// Key of the node at the given digit path.
    pub fn node_key(&self, path: &[usize]) -> u64 {
        path.iter().fold(self.root_key(), |k, &c| Self::child_key(k, c))
    }

    /// `α_s` for the node with this key.
    pub fn label_at(&self, key: u64) -> &Permutation {
        &self.law.support[self.label_index_at(key)]
    }

    pub(crate) fn label_index_at(&self, key: u64) -> usize {
        if self.law.support.len() == 1 {
            return 0;
        }
        self.law.draw_index(unit_open(mix2(key, LABEL_SALT)))
    }

    /// The `i`-th unsorted uniform cut point of a node (UniformGaps only).
    pub(crate) fn cut_at(key: u64, i: usize) -> f64 {
        unit_open(mix2(key, CUT_SALT + i as u64))
    }

    /// `τ_s`: the child widths of the node with this key.
    pub fn gaps_at(&self, key: u64) -> Vec<f64> {
        let d = self.d();
        match self.gap_mode {
            GapMode::Equal => vec![1.0 / d as f64; d],
            GapMode::UniformGaps => {
                let mut cuts: Vec<f64> = (0..d - 1).map(|i| Self::cut_at(key, i)).collect();
                cuts.sort_by(f64::total_cmp);
                let mut g = Vec::with_capacity(d);
                let mut prev = 0.0;
                for c in cuts {
                    g.push(c - prev);
                    prev = c;
                }
                g.push(1.0 - prev);
                g
            }
        }
    }
}
