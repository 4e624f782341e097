//! Exact pattern sampling from a single realization without truncation.

use rand::Rng;

use super::{GapMode, TreeRealizationHandle, MAX_ARITY};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rng::StreamRng;

/// `n` points drawn from one realization, stored as their x-order and y-ranks.
#[derive(Clone, Debug)]
pub struct LazySample {
    /// Point ids listed left to right.
    pub x_order: Vec<u32>,
    /// 0-based height rank of each point id.
    pub y_rank: Vec<u32>,
}

impl LazySample {
    pub fn n(&self) -> usize {
        self.x_order.len()
    }

    pub fn pattern(&self) -> Permutation {
        Permutation::from_vec_unchecked(self.x_order.iter().map(|&i| self.y_rank[i as usize] + 1).collect())
    }

    /// Pattern of the points with id `< k`; these are `k` i.i.d. points.
    pub fn pattern_prefix(&self, k: usize) -> Permutation {
        assert!(k >= 1 && k <= self.n());
        let ys: Vec<u32> = self.x_order.iter().filter(|&&i| (i as usize) < k).map(|&i| self.y_rank[i as usize]).collect();
        Permutation::standardize(&ys).expect("distinct ranks")
    }
}

fn depth_fuse(n: usize, d: usize) -> usize {
    let levels = (n.max(2) as f64).ln() / (d as f64).ln();
    (64.0 * levels).ceil() as usize + 256
}

impl TreeRealizationHandle {
    /// Draws `n` i.i.d. points from this realization.
    ///
    /// Every point descends from the root choosing child digits with the
    /// node's gap probabilities. Points sharing a node are split among the
    /// children; x-order follows the digits and y-order follows the node label.
    pub fn sample_lazy(&self, n: usize, rng: &mut StreamRng) -> Result<LazySample> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        let d = self.d();
        let fuse = depth_fuse(n, d);
        let mut ids: Vec<u32> = (0..n as u32).collect();
        let mut scratch = vec![0u32; n];
        let mut digit = vec![0u8; n];
        let mut y_rank = vec![0u32; n];
        let mut stack: Vec<(u64, usize, usize, usize)> = vec![(self.root_key(), 0, n, 0)];
        let mut cuts = [0f64; MAX_ARITY];
        while let Some((key, lo, hi, depth)) = stack.pop() {
            if depth > fuse {
                return Err(Error::DepthFuse(depth));
            }
            let mut counts = [0u32; MAX_ARITY];
            match self.gap_mode {
                GapMode::Equal => {
                    for &id in &ids[lo..hi] {
                        let c = rng.random_range(0..d);
                        digit[id as usize] = c as u8;
                        counts[c] += 1;
                    }
                }
                GapMode::UniformGaps => {
                    for (i, c) in cuts.iter_mut().enumerate().take(d - 1) {
                        *c = Self::cut_at(key, i);
                    }
                    for &id in &ids[lo..hi] {
                        let v = rng.open01();
                        let c = cuts[..d - 1].iter().filter(|&&u| u < v).count();
                        digit[id as usize] = c as u8;
                        counts[c] += 1;
                    }
                }
            }
            // stable counting sort of ids[lo..hi] by digit
            let mut start = [0usize; MAX_ARITY + 1];
            for c in 0..d {
                start[c + 1] = start[c] + counts[c] as usize;
            }
            let mut fill = start;
            for &id in &ids[lo..hi] {
                let c = digit[id as usize] as usize;
                scratch[lo + fill[c]] = id;
                fill[c] += 1;
            }
            ids[lo..hi].copy_from_slice(&scratch[lo..hi]);

            // children stacked vertically in the order given by the label
            let label = self.label_at(key).entries();
            let mut below = [0u32; MAX_ARITY];
            let mut by_height = [0usize; MAX_ARITY];
            for (c, &v) in label.iter().enumerate() {
                by_height[v as usize - 1] = c;
            }
            let mut acc = 0u32;
            for &c in by_height.iter().take(d) {
                below[c] = acc;
                acc += counts[c];
            }
            for c in 0..d {
                let (a, b) = (lo + start[c], lo + start[c + 1]);
                if below[c] > 0 {
                    for &id in &ids[a..b] {
                        y_rank[id as usize] += below[c];
                    }
                }
                if b - a >= 2 {
                    stack.push((Self::child_key(key, c), a, b, depth + 1));
                }
            }
        }
        Ok(LazySample { x_order: ids, y_rank })
    }

    pub fn sample_pattern_lazy(&self, n: usize, rng: &mut StreamRng) -> Result<Permutation> {
        Ok(self.sample_lazy(n, rng)?.pattern())
    }
}

#[cfg(test)]
mod tests {
    use super::super::PermutationLaw;
    use super::*;

    #[test]
    fn identity_law_gives_identity() {
        for mode in [GapMode::Equal, GapMode::UniformGaps] {
            let h = TreeRealizationHandle::new(3, PermutationLaw::dirac(Permutation::identity(3)).unwrap(), mode);
            let mut rng = StreamRng::new(1, 0);
            for n in 1..9 {
                assert_eq!(h.sample_pattern_lazy(n, &mut rng).unwrap(), Permutation::identity(n));
            }
        }
    }

    #[test]
    fn decreasing_law_gives_decreasing() {
        let h = TreeRealizationHandle::new(3, PermutationLaw::dirac("21".parse().unwrap()).unwrap(), GapMode::Equal);
        let mut rng = StreamRng::new(1, 0);
        assert_eq!(h.sample_pattern_lazy(5, &mut rng).unwrap(), Permutation::identity(5).reverse());
    }

    #[test]
    fn prefix_patterns_are_restrictions() {
        let h = TreeRealizationHandle::new(9, PermutationLaw::uniform(3).unwrap(), GapMode::UniformGaps);
        let mut rng = StreamRng::new(2, 0);
        for _ in 0..50 {
            let s = h.sample_lazy(7, &mut rng).unwrap();
            let full = s.pattern();
            assert_eq!(s.pattern_prefix(7), full);
            let pos: Vec<usize> =
                s.x_order.iter().enumerate().filter(|(_, &id)| id < 4).map(|(i, _)| i + 1).collect();
            assert_eq!(s.pattern_prefix(4), crate::perm::restrict(&full, &pos).unwrap());
        }
    }

    #[test]
    fn same_handle_same_rng_same_samples() {
        let h = TreeRealizationHandle::new(4, PermutationLaw::uniform(2).unwrap(), GapMode::UniformGaps);
        let mut a = StreamRng::new(8, 1);
        let mut b = StreamRng::new(8, 1);
        for _ in 0..20 {
            assert_eq!(h.sample_pattern_lazy(6, &mut a).unwrap(), h.sample_pattern_lazy(6, &mut b).unwrap());
        }
    }
}
