//! Finite-depth truncations of a realization.

use super::{GapMode, TreeRealizationHandle};
use crate::error::{Error, Result};
use crate::perm::{substitute, Permutation};

/// Largest number of level-m cells materialized.
pub const TRUNCATION_CAP: u64 = 1 << 20;

/// `π_m` together with the side lengths `T(s)` of its cells in x-order.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedRealization {
    pub depth: usize,
    pub pi: Permutation,
    pub cell_lengths: Vec<f64>,
}

fn check_cap(d: usize, m: usize) -> Result<()> {
    let cells = (d as u64).checked_pow(m as u32).unwrap_or(u64::MAX);
    if cells > TRUNCATION_CAP {
        return Err(Error::CapExceeded { what: "truncation cells d^m", cap: TRUNCATION_CAP, got: cells });
    }
    Ok(())
}

/// Level-m nodes in x-order as `(key, T(s))`.
fn level_nodes(h: &TreeRealizationHandle, m: usize) -> Vec<(u64, f64)> {
    let mut level = vec![(h.root_key(), 1.0)];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * h.d());
        for &(key, t) in &level {
            for (c, g) in h.gaps_at(key).into_iter().enumerate() {
                next.push((TreeRealizationHandle::child_key(key, c), t * g));
            }
        }
        level = next;
    }
    level
}

/// Builds `π_m = π_{m−1}[(α_s)_{|s| = m−1}]` with `π_0 = 1`.
pub fn realize_truncation(h: &TreeRealizationHandle, m: usize) -> Result<TruncatedRealization> {
    check_cap(h.d(), m)?;
    let mut pi = Permutation::identity(1);
    let mut level = vec![(h.root_key(), 1.0)];
    for _ in 0..m {
        let blocks: Vec<Permutation> = level.iter().map(|&(k, _)| h.label_at(k).clone()).collect();
        pi = substitute(&pi, &blocks)?;
        let mut next = Vec::with_capacity(level.len() * h.d());
        for &(key, t) in &level {
            for (c, g) in h.gaps_at(key).into_iter().enumerate() {
                next.push((TreeRealizationHandle::child_key(key, c), t * g));
            }
        }
        level = next;
    }
    Ok(TruncatedRealization { depth: m, pi, cell_lengths: level.into_iter().map(|(_, t)| t).collect() })
}

/// Level-m side-length statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapStats {
    /// `L_m = Σ T(s)²`.
    pub squared_sum: f64,
    /// `min T(s)`.
    pub min_gap: f64,
}

pub fn realization_gap_stats(h: &TreeRealizationHandle, m: usize) -> Result<GapStats> {
    if h.gap_mode != GapMode::UniformGaps {
        return Err(Error::ModeMismatch("gap statistics need uniform gaps".into()));
    }
    check_cap(h.d(), m)?;
    let level = level_nodes(h, m);
    let squared_sum = level.iter().map(|&(_, t)| t * t).sum();
    let min_gap = level.iter().map(|&(_, t)| t).fold(f64::INFINITY, f64::min);
    Ok(GapStats { squared_sum, min_gap })
}
