//! Exact pattern laws of piecewise-affine function permutons.
//!
//! Fix a range partition `J_1 < … < J_l` such that `f` maps each sub-piece of
//! `f⁻¹(J_j)` affinely onto `J_j`. Given how many of the `n` points land in
//! each sub-piece, the points of one cell have i.i.d. uniform heights in
//! `J_j`, so every interleaving of the sub-pieces' height ranks is equally
//! likely, and within a sub-piece height order follows (or reverses) x-order.

use crate::combinatorics::{compositions_capped, interleaving_count_u64, multinomial_pmf};
use crate::distribution::{entropy_of, PatternDistribution};
use crate::error::{Error, Result};
use crate::models::affine::{cuts_from_intervals, default_range_cuts, split_by_range};
use crate::models::{PiecewiseAffineMap, MEASURE_TOL};
use crate::perm::{factorial_u64, lehmer_rank};

pub const FUNCTION_N_CAP: usize = 9;

/// Largest number of (allocation, interleaving) terms accumulated.
pub const FUNCTION_WORK_CAP: f64 = 1e8;

/// The exact law together with the terms of the conditional-entropy bracket
/// `Σ P(m) ln M(m) ≤ H_n ≤ Σ P(m) ln M(m) + H(P)`.
#[derive(Clone, Debug)]
pub struct FunctionExact {
    pub dist: PatternDistribution,
    /// `Σ_m P(m) ln M(m)`, `M(m)` the number of admissible interleavings.
    pub mean_log_interleavings: f64,
    /// Entropy of the allocation law `P`.
    pub allocation_entropy: f64,
    /// Number of accumulated terms.
    pub work: f64,
}

impl FunctionExact {
    pub fn entropy(&self) -> f64 {
        self.dist.entropy()
    }
}

pub fn exact_function_distribution(f: &PiecewiseAffineMap, n: usize) -> Result<PatternDistribution> {
    Ok(exact_function_details(f, n)?.dist)
}

/// Same law computed through a caller-supplied compatible range partition.
pub fn exact_function_distribution_with_partition(
    f: &PiecewiseAffineMap,
    range_partition: &[(f64, f64)],
    n: usize,
) -> Result<PatternDistribution> {
    let cuts = cuts_from_intervals(range_partition)?;
    Ok(exact_function_with_cuts(f, &cuts, n)?.dist)
}

pub fn exact_function_details(f: &PiecewiseAffineMap, n: usize) -> Result<FunctionExact> {
    exact_function_with_cuts(f, &default_range_cuts(f), n)
}

struct SubPiece {
    cell: usize,
    len: f64,
    increasing: bool,
}

/// All distinct arrangements of a sorted multiset, in lexicographic order.
fn multiset_arrangements(sorted: &[u16]) -> Vec<Vec<u16>> {
    let mut cur = sorted.to_vec();
    let mut out = vec![cur.clone()];
    let n = cur.len();
    if n < 2 {
        return out;
    }
    loop {
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn exact_function_with_cuts(f: &PiecewiseAffineMap, cuts: &[f64], n: usize) -> Result<FunctionExact> {
    if n == 0 || n > FUNCTION_N_CAP {
        return Err(Error::CapExceeded { what: "exact function pattern length", cap: FUNCTION_N_CAP as u64, got: n as u64 });
    }
    let defect = f.measure_preservation_defect();
    if defect > MEASURE_TOL {
        return Err(Error::InvalidModel(format!("map is not measure preserving (density defect {defect:.3e})")));
    }
    let pieces: Vec<SubPiece> = split_by_range(f, cuts)?
        .into_iter()
        .map(|(cell, p)| SubPiece { cell, len: p.len(), increasing: p.increasing() })
        .collect();
    let cells = cuts.len() - 1;
    let lens: Vec<f64> = pieces.iter().map(|p| p.len).collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for (i, p) in pieces.iter().enumerate() {
        members[p.cell].push(i);
    }

    let allocations = compositions_capped(n, pieces.len())?;
    let mut work = 0.0;
    for m in &allocations {
        let mut w = 1.0;
        for mem in &members {
            let sizes: Vec<u64> = mem.iter().map(|&p| m[p] as u64).collect();
            w *= interleaving_count_u64(&sizes).map_or(f64::INFINITY, |c| c as f64);
        }
        work += w;
    }
    if work > FUNCTION_WORK_CAP {
        return Err(Error::CapExceeded { what: "exact function work", cap: FUNCTION_WORK_CAP as u64, got: work.min(u64::MAX as f64) as u64 });
    }

    let mut dense = vec![0.0f64; factorial_u64(n) as usize];
    let mut probs_of_alloc = Vec::with_capacity(allocations.len());
    let mut mean_log = 0.0;
    let mut ypos = vec![0u32; n];
    for m in &allocations {
        let pm = multinomial_pmf(m, &lens);
        if pm == 0.0 {
            continue;
        }
        probs_of_alloc.push(pm);
        // x offsets of the sub-pieces
        let mut xoff = vec![0usize; pieces.len()];
        for p in 1..pieces.len() {
            xoff[p] = xoff[p - 1] + m[p - 1];
        }
        let mut arrangements: Vec<Vec<Vec<u16>>> = Vec::with_capacity(cells);
        let mut ybase = vec![0usize; cells];
        let mut total_m = 1.0;
        let mut acc = 0;
        for (j, mem) in members.iter().enumerate() {
            ybase[j] = acc;
            let mut labels: Vec<u16> = Vec::new();
            for &p in mem {
                labels.extend(std::iter::repeat_n(p as u16, m[p]));
            }
            acc += labels.len();
            let a = multiset_arrangements(&labels);
            total_m *= a.len() as f64;
            arrangements.push(a);
        }
        mean_log += pm * total_m.ln();
        let each = pm / total_m;
        let mut digits = vec![0usize; cells];
        let mut used = vec![0usize; pieces.len()];
        loop {
            used.iter_mut().for_each(|u| *u = 0);
            for j in 0..cells {
                for (t, &label) in arrangements[j][digits[j]].iter().enumerate() {
                    let p = label as usize;
                    let r = used[p];
                    used[p] += 1;
                    let x = if pieces[p].increasing { xoff[p] + r } else { xoff[p] + m[p] - 1 - r };
                    ypos[x] = (ybase[j] + t) as u32 + 1;
                }
            }
            dense[lehmer_rank(&ypos) as usize] += each;
            let mut i = 0;
            while i < cells {
                digits[i] += 1;
                if digits[i] < arrangements[i].len() {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == cells {
                break;
            }
        }
    }
    let dist = PatternDistribution::from_dense(n, &dense)?;
    Ok(FunctionExact { dist, mean_log_interleavings: mean_log, allocation_entropy: entropy_of(probs_of_alloc), work })
}
