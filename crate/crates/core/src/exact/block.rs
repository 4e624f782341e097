//! Exact pattern laws of block permutons.

use crate::combinatorics::{compositions_capped, factorial, multinomial_pmf};
use crate::distribution::PatternDistribution;
use crate::error::{Error, Result};
use crate::models::BlockPermuton;
use crate::perm::{factorial_u64, lehmer_rank, Permutation};

pub const BLOCK_N_CAP: usize = 9;
pub const BLOCK_PI_CAP: usize = 8;

/// One-line entries of every permutation of each length `0..=n`.
pub(crate) fn all_entries_by_size(n: usize) -> Vec<Vec<Vec<u32>>> {
    (0..=n)
        .map(|k| if k == 0 { vec![Vec::new()] } else { Permutation::all(k).map(Permutation::into_entries).collect() })
        .collect()
}

/// `t(σ) = Σ_k multinomial(n; k) Π β_i^{k_i} Σ_{τ} Π 1/k_i! 1[σ = π|_k[τ]]`,
/// where empty blocks are dropped from the substitution.
pub fn exact_block_distribution(pi: &Permutation, weights: &[f64], n: usize) -> Result<PatternDistribution> {
    if n == 0 || n > BLOCK_N_CAP {
        return Err(Error::CapExceeded { what: "exact block pattern length", cap: BLOCK_N_CAP as u64, got: n as u64 });
    }
    if pi.len() > BLOCK_PI_CAP {
        return Err(Error::CapExceeded { what: "exact block permutation length", cap: BLOCK_PI_CAP as u64, got: pi.len() as u64 });
    }
    // validates the weights
    BlockPermuton::new(pi.clone(), weights.to_vec())?;
    let m = pi.len();
    let perms = all_entries_by_size(n);
    let mut dense = vec![0.0f64; factorial_u64(n) as usize];
    let mut buf: Vec<u32> = Vec::with_capacity(n);
    for k in compositions_capped(n, m)? {
        let pk = multinomial_pmf(&k, weights);
        if pk == 0.0 {
            continue;
        }
        let each = pk / k.iter().map(|&x| factorial(x as u64)).product::<f64>();
        let blocks: Vec<usize> = (0..m).filter(|&c| k[c] > 0).collect();
        let offsets: Vec<u32> = blocks
            .iter()
            .map(|&c| (0..m).filter(|&c2| pi.entries()[c2] < pi.entries()[c]).map(|c2| k[c2] as u32).sum())
            .collect();
        let radix: Vec<usize> = blocks.iter().map(|&c| perms[k[c]].len()).collect();
        let mut digits = vec![0usize; blocks.len()];
        loop {
            buf.clear();
            for (b, &c) in blocks.iter().enumerate() {
                buf.extend(perms[k[c]][digits[b]].iter().map(|&v| v + offsets[b]));
            }
            dense[lehmer_rank(&buf) as usize] += each;
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < radix[i] {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    PatternDistribution::from_dense(n, &dense)
}
