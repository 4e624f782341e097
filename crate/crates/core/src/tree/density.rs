//! Expected pattern densities over the random realization (annealed law).

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GapMode, PermutationLaw};
use crate::combinatorics::{binomial, compositions, interleaving_count, multinomial_pmf};
use crate::distribution::PatternDistribution;
use crate::error::{Error, Result};
use crate::perm::{restrict0, Permutation};

/// Largest pattern length for the fixed-point solver.
pub const DENSITY_CAP: usize = 6;

/// Probability that the root sends `k_c` of `n = Σ k` points to child `c`,
/// averaged over the root gaps.
pub fn allocation_probability(mode: GapMode, k: &[usize]) -> f64 {
    let d = k.len();
    let n: usize = k.iter().sum();
    match mode {
        GapMode::Equal => multinomial_pmf(k, &vec![1.0 / d as f64; d]),
        // a flat Dirichlet mixes the multinomial into the uniform law on compositions
        GapMode::UniformGaps => 1.0 / binomial((n + d - 1) as u64, (d - 1) as u64),
    }
}

/// Arithmetic used by the fixed-point solver.
pub trait DensityScalar: Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> {
    fn from_weight(w: f64) -> Self;
    fn allocation(mode: GapMode, k: &[usize]) -> Self;
}

impl DensityScalar for f64 {
    fn from_weight(w: f64) -> Self {
        w
    }

    fn allocation(mode: GapMode, k: &[usize]) -> Self {
        allocation_probability(mode, k)
    }
}

impl DensityScalar for BigRational {
    /// Law weights are taken at their exact binary value.
    fn from_weight(w: f64) -> Self {
        BigRational::from_float(w).expect("finite weight")
    }

    fn allocation(mode: GapMode, k: &[usize]) -> Self {
        let d = k.len();
        let n: usize = k.iter().sum();
        match mode {
            GapMode::Equal => {
                let sizes: Vec<u64> = k.iter().map(|&x| x as u64).collect();
                let num = BigInt::from(interleaving_count(&sizes));
                let den = BigInt::from(d).pow(n as u32);
                BigRational::new(num, den)
            }
            GapMode::UniformGaps => {
                let sizes = [n as u64, d as u64 - 1];
                BigRational::new(BigInt::one(), BigInt::from(interleaving_count(&sizes)))
            }
        }
    }
}

struct Solver<'a, T> {
    law: &'a PermutationLaw,
    weights: Vec<T>,
    mode: GapMode,
    memo: HashMap<Permutation, T>,
    comps: HashMap<usize, Vec<(Vec<usize>, T)>>,
}

impl<'a, T: DensityScalar> Solver<'a, T> {
    fn new(law: &'a PermutationLaw, mode: GapMode) -> Self {
        let weights = law.weights().iter().map(|&w| T::from_weight(w)).collect();
        Self { law, weights, mode, memo: HashMap::new(), comps: HashMap::new() }
    }

    fn split_allocations(&mut self, n: usize) -> Vec<(Vec<usize>, T)> {
        let d = self.law.d();
        let mode = self.mode;
        self.comps
            .entry(n)
            .or_insert_with(|| {
                compositions(n, d)
                    .into_iter()
                    .filter(|k| k.iter().filter(|&&x| x > 0).count() >= 2)
                    .map(|k| {
                        let p = T::allocation(mode, &k);
                        (k, p)
                    })
                    .collect()
            })
            .clone()
    }

    /// `E t(σ) = Σ_α F(α) Σ_k P(k) 1[σ = α|_k[τ]] Π E t(τ_c)`, with the
    /// allocations that put every point in one child moved to the left side.
    fn density(&mut self, sigma: &Permutation) -> T {
        let n = sigma.len();
        if n == 1 {
            return T::one();
        }
        if let Some(v) = self.memo.get(sigma) {
            return v.clone();
        }
        let d = self.law.d();
        let entries = sigma.entries().to_vec();
        let allocs = self.split_allocations(n);
        let mut num = T::zero();
        for (ai, alpha) in self.law.support().to_vec().iter().enumerate() {
            let w = self.weights[ai].clone();
            let a = alpha.entries();
            for (k, p) in &allocs {
                // value offset of each child: sizes of children placed lower by α
                let mut offset = vec![0usize; d];
                for c in 0..d {
                    offset[c] = (0..d).filter(|&c2| a[c2] < a[c]).map(|c2| k[c2]).sum();
                }
                let mut pos = 0usize;
                let mut ok = true;
                let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(d);
                for c in 0..d {
                    let block: Vec<usize> = (pos..pos + k[c]).collect();
                    for &i in &block {
                        let v = entries[i] as usize - 1;
                        if v < offset[c] || v >= offset[c] + k[c] {
                            ok = false;
                        }
                    }
                    pos += k[c];
                    if k[c] > 0 {
                        blocks.push(block);
                    }
                }
                if !ok {
                    continue;
                }
                let mut prod = w.clone() * p.clone();
                for b in blocks {
                    if b.len() >= 2 {
                        let tau = restrict0(&entries, &b);
                        prod = prod * self.density(&tau);
                    }
                    if prod.is_zero() {
                        break;
                    }
                }
                num = num + prod;
            }
        }
        let mut p_one = T::zero();
        for c in 0..d {
            let mut k = vec![0usize; d];
            k[c] = n;
            p_one = p_one + T::allocation(self.mode, &k);
        }
        let v = num / (T::one() - p_one);
        self.memo.insert(sigma.clone(), v.clone());
        v
    }
}

fn check_cap(n: usize) -> Result<()> {
    if n > DENSITY_CAP {
        return Err(Error::CapExceeded { what: "expected-density pattern length", cap: DENSITY_CAP as u64, got: n as u64 });
    }
    Ok(())
}

/// `E t(σ, μ)` over realizations of the random tree permuton.
pub fn expected_pattern_density(law: &PermutationLaw, sigma: &Permutation, mode: GapMode) -> Result<f64> {
    check_cap(sigma.len())?;
    Ok(Solver::<f64>::new(law, mode).density(sigma))
}

/// Same as [`expected_pattern_density`] in exact rational arithmetic, with
/// the law weights read as exact binary fractions.
pub fn expected_pattern_density_exact(law: &PermutationLaw, sigma: &Permutation, mode: GapMode) -> Result<BigRational> {
    check_cap(sigma.len())?;
    Ok(Solver::<BigRational>::new(law, mode).density(sigma))
}

/// The annealed pattern law `E μ^(n)` on Sym(n).
pub fn expected_pattern_distribution(law: &PermutationLaw, mode: GapMode, n: usize) -> Result<PatternDistribution> {
    check_cap(n)?;
    let mut s = Solver::<f64>::new(law, mode);
    let probs = Permutation::all(n)
        .map(|sig| {
            let v = s.density(&sig);
            (sig, v)
        })
        .collect();
    PatternDistribution::new(n, probs)
}
