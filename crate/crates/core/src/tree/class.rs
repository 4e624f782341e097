//! The substitution class X_Π generated by the support of a law.

use std::collections::{BTreeSet, HashMap};

use crate::perm::{for_each_subset, restrict0, Permutation};

/// Every pattern of length `≥ 2` contained in some member of `pi_set`.
pub fn patterns_of_set(pi_set: &[Permutation]) -> BTreeSet<Permutation> {
    let mut out = BTreeSet::new();
    for pi in pi_set {
        for k in 2..=pi.len() {
            for_each_subset(pi.len(), k, |pos| {
                out.insert(restrict0(pi.entries(), pos));
                true
            });
        }
    }
    out
}

/// Whether `σ` can be built from `1` by repeatedly inflating an entry with a
/// pattern of some member of `pi_set`.
pub fn class_membership(sigma: &Permutation, pi_set: &[Permutation]) -> bool {
    let pats = patterns_of_set(pi_set);
    let mut memo = HashMap::new();
    member(sigma, &pats, &mut memo)
}

fn member(sigma: &Permutation, pats: &BTreeSet<Permutation>, memo: &mut HashMap<Permutation, bool>) -> bool {
    let n = sigma.len();
    if n == 1 {
        return true;
    }
    if let Some(&v) = memo.get(sigma) {
        return v;
    }
    let e = sigma.entries();
    let mut found = false;
    // each nonzero mask of the n−1 gaps cuts σ into k ≥ 2 consecutive blocks
    for mask in 1u64..(1u64 << (n - 1)) {
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for gap in 0..n - 1 {
            if mask >> gap & 1 == 1 {
                blocks.push((start, gap + 1));
                start = gap + 1;
            }
        }
        blocks.push((start, n));
        let intervals = blocks.iter().all(|&(a, b)| {
            let lo = e[a..b].iter().min().expect("non-empty");
            let hi = e[a..b].iter().max().expect("non-empty");
            (hi - lo) as usize == b - a - 1
        });
        if !intervals {
            continue;
        }
        let reps: Vec<usize> = blocks.iter().map(|&(a, _)| a).collect();
        let rho = restrict0(e, &reps);
        if !pats.contains(&rho) {
            continue;
        }
        if blocks.iter().all(|&(a, b)| member(&Permutation::standardize(&e[a..b]).expect("distinct"), pats, memo)) {
            found = true;
            break;
        }
    }
    memo.insert(sigma.clone(), found);
    found
}

/// `(2d−1, 2d−3, …, 1, 2d, 2d−2, …, 2)`.
pub fn forbidden_pattern(d: usize) -> Permutation {
    assert!(d >= 2);
    let odds = (0..d).map(|i| (2 * (d - i) - 1) as u32);
    let evens = (0..d).map(|i| (2 * (d - i)) as u32);
    Permutation::new(odds.chain(evens).collect()).expect("valid permutation")
}
