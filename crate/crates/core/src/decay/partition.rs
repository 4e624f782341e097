//! Monte Carlo of the recursive splitting behind `α_l(n)`.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::tree::GapMode;

const PARTITION_STREAM: u64 = 0x9a27_d3c4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub sims: u64,
}

/// Split `c` items into `d` parts, conditioned on at least two parts being
/// non-empty.
fn split(c: usize, d: usize, mode: GapMode, rng: &mut StreamRng, parts: &mut Vec<usize>) {
    loop {
        parts.clear();
        match mode {
            GapMode::Equal => {
                parts.resize(d, 0);
                for _ in 0..c {
                    parts[rng.random_range(0..d)] += 1;
                }
            }
            GapMode::UniformGaps => {
                // d − 1 bars among c + d − 1 slots: a uniform weak composition
                let mut bars = sample(rng, c + d - 1, d - 1).into_vec();
                bars.sort_unstable();
                let mut prev = 0;
                for &b in &bars {
                    parts.push(b - prev);
                    prev = b + 1;
                }
                parts.push(c + d - 1 - prev);
            }
        }
        if parts.iter().all(|&p| p < c) {
            return;
        }
    }
}

/// Expected number of size-`l` classes when `n` items are split recursively
/// until singletons.
pub fn partition_decay_expected_counts(d: usize, l: usize, n: usize, sims: u64, gap_mode: GapMode, seed: u64) -> Result<SimEstimate> {
    if d < 2 || l == 0 || n == 0 {
        return Err(Error::InvalidArgument("need d ≥ 2, l ≥ 1, n ≥ 1".into()));
    }
    if sims < 2 {
        return Err(Error::InvalidArgument("need at least two simulations".into()));
    }
    let mut rng = StreamRng::new(seed, PARTITION_STREAM);
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut stack = Vec::new();
    let mut parts = Vec::with_capacity(d);
    for _ in 0..sims {
        let mut count = 0u64;
        stack.clear();
        stack.push(n);
        while let Some(c) = stack.pop() {
            if c == l {
                count += 1;
            }
            if c <= l {
                continue;
            }
            split(c, d, gap_mode, &mut rng, &mut parts);
            stack.extend(parts.iter().copied().filter(|&p| p >= l));
        }
        let x = count as f64;
        sum += x;
        sum2 += x * x;
    }
    let s = sims as f64;
    let mean = sum / s;
    let var = ((sum2 - s * mean * mean) / (s - 1.0)).max(0.0);
    Ok(SimEstimate { mean, stderr: (var / s).sqrt(), sims })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decay::alpha_table;

    #[test]
    fn n_equals_l() {
        let e = partition_decay_expected_counts(3, 4, 4, 100, GapMode::UniformGaps, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn d2_closed_form() {
        // 2n/(l(l+1)) size-l classes for n > l
        let e = partition_decay_expected_counts(2, 2, 6, 40_000, GapMode::UniformGaps, 7).unwrap();
        assert!((e.mean - 2.0).abs() < 3.0 * e.stderr, "{e:?}");
        let e = partition_decay_expected_counts(2, 3, 12, 40_000, GapMode::UniformGaps, 8).unwrap();
        assert!((e.mean - 2.0).abs() < 3.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn agrees_with_tables() {
        for mode in [GapMode::UniformGaps, GapMode::Equal] {
            let t = alpha_table(3, 2, 8, mode).unwrap();
            let e = partition_decay_expected_counts(3, 2, 8, 40_000, mode, 9).unwrap();
            assert!((e.mean - t.values[8]).abs() < 3.0 * e.stderr, "{mode:?}: {e:?} vs {}", t.values[8]);
        }
    }
}
