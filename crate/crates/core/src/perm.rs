//! Finite permutations in one-line notation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest length for which brute-force occurrence counting is allowed.
pub const CONTAINMENT_CAP: usize = 16;

/// Largest length for which a Lehmer rank fits in a `u64`.
pub const RANK_CAP: usize = 20;

/// A permutation of `{1..n}` stored 1-based in one-line notation.
///
/// The derived ordering is lexicographic on the one-line entries, which is
/// the same order as the Lehmer rank.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    entries: Vec<u32>,
}

impl Permutation {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut seen = vec![false; n];
        for &v in &entries {
            let v = v as usize;
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!("{entries:?}")));
            }
            seen[v - 1] = true;
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<u32>) -> Self {
        debug_assert!(Self::new(entries.clone()).is_ok());
        Self { entries }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_vec_unchecked((1..=n as u32).collect())
    }

    /// Pattern of a sequence of pairwise distinct keys: entry `i` is the rank
    /// of `keys[i]` among all keys.
    pub fn standardize<T: PartialOrd>(keys: &[T]) -> Result<Self> {
        let n = keys.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty".into()));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap_or(std::cmp::Ordering::Equal));
        let mut entries = vec![0u32; n];
        for (r, &i) in idx.iter().enumerate() {
            if r > 0 && keys[idx[r - 1]].partial_cmp(&keys[i]) != Some(std::cmp::Ordering::Less) {
                return Err(Error::Collision);
            }
            entries[i] = r as u32 + 1;
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// `π(i)` for 1-based `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.entries[i - 1]
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.len()];
        for (i, &v) in self.entries.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Self { entries: inv }
    }

    /// Left-right mirror image.
    pub fn reverse(&self) -> Self {
        let mut e = self.entries.clone();
        e.reverse();
        Self { entries: e }
    }

    /// Top-bottom mirror image.
    pub fn complement(&self) -> Self {
        let n = self.len() as u32;
        Self { entries: self.entries.iter().map(|&v| n + 1 - v).collect() }
    }

    /// Lehmer rank in `0..n!`, consistent with the derived ordering.
    pub fn rank(&self) -> u64 {
        lehmer_rank(&self.entries)
    }

    pub fn unrank(n: usize, mut rank: u64) -> Result<Self> {
        if n == 0 || n > RANK_CAP {
            return Err(Error::CapExceeded { what: "unrank length", cap: RANK_CAP as u64, got: n as u64 });
        }
        if rank >= factorial_u64(n) {
            return Err(Error::InvalidArgument(format!("rank {rank} >= {n}!")));
        }
        let mut digits = vec![0u64; n];
        for i in (0..n).rev() {
            let base = (n - i) as u64;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<u32> = (1..=n as u32).collect();
        let entries = digits.iter().map(|&d| pool.remove(d as usize)).collect();
        Ok(Self { entries })
    }

    /// Lexicographic successor, or `None` for the decreasing permutation.
    pub fn next_lex(&self) -> Option<Self> {
        let mut e = self.entries.clone();
        let n = e.len();
        if n < 2 {
            return None;
        }
        let mut i = n - 1;
        while i > 0 && e[i - 1] > e[i] {
            i -= 1;
        }
        if i == 0 {
            return None;
        }
        let mut j = n - 1;
        while e[j] < e[i - 1] {
            j -= 1;
        }
        e.swap(i - 1, j);
        e[i..].reverse();
        Some(Self { entries: e })
    }

    /// Sym(n) in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        let mut next = Some(Self::identity(n));
        std::iter::from_fn(move || {
            let cur = next.take()?;
            next = cur.next_lex();
            Some(cur)
        })
    }

    /// One-line string; entries are comma separated when `n > 9`.
    pub fn one_line(&self) -> String {
        if self.len() > 9 {
            self.entries.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        } else {
            self.entries.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        }
    }
}

/// Lehmer rank of a one-line permutation of length at most 20.
pub fn lehmer_rank(entries: &[u32]) -> u64 {
    let n = entries.len();
    assert!(n <= RANK_CAP, "rank needs n <= {RANK_CAP}");
    let mut used = 0u32;
    let mut r = 0u64;
    for (i, &v) in entries.iter().enumerate() {
        let below = (used & ((1u32 << (v - 1)) - 1)).count_ones();
        r = r * (n - i) as u64 + (v - 1 - below) as u64;
        used |= 1 << (v - 1);
    }
    r
}

pub fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Pattern of a planar point set read left to right.
pub fn pattern_of_points(points: &[(f64, f64)]) -> Result<Permutation> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidPermutation("empty point set".into()));
    }
    let mut by_x: Vec<(f64, f64)> = points.to_vec();
    by_x.sort_by(|a, b| a.0.total_cmp(&b.0));
    if by_x.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Collision);
    }
    let ys: Vec<f64> = by_x.iter().map(|p| p.1).collect();
    Permutation::standardize(&ys)
}

/// The inflation `σ[α_1, ..., α_m]`.
pub fn substitute(sigma: &Permutation, blocks: &[Permutation]) -> Result<Permutation> {
    let m = sigma.len();
    if blocks.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: blocks.len() });
    }
    // offset[v] = total size of the blocks whose σ-value is below v
    let mut size_by_value = vec![0u32; m + 1];
    for (i, b) in blocks.iter().enumerate() {
        size_by_value[sigma.entries[i] as usize] = b.len() as u32;
    }
    let mut offset = vec![0u32; m + 1];
    for v in 1..=m {
        offset[v] = if v == 1 { 0 } else { offset[v - 1] + size_by_value[v - 1] };
    }
    let total: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = Vec::with_capacity(total);
    for (i, b) in blocks.iter().enumerate() {
        let base = offset[sigma.entries[i] as usize];
        out.extend(b.entries.iter().map(|&x| x + base));
    }
    Ok(Permutation { entries: out })
}

/// Pattern formed by the entries at the given sorted 1-based positions.
pub fn restrict(pi: &Permutation, indices: &[usize]) -> Result<Permutation> {
    if indices.is_empty() {
        return Err(Error::InvalidArgument("empty index set".into()));
    }
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::InvalidArgument("indices must be strictly increasing".into()));
        }
    }
    for &i in indices {
        if i == 0 || i > pi.len() {
            return Err(Error::IndexOutOfRange { index: i, len: pi.len() });
        }
    }
    let vals: Vec<u32> = indices.iter().map(|&i| pi.entries[i - 1]).collect();
    Permutation::standardize(&vals)
}

/// Pattern of the entries at the given 0-based positions (no validation).
pub(crate) fn restrict0(pi: &[u32], positions: &[usize]) -> Permutation {
    let vals: Vec<u32> = positions.iter().map(|&i| pi[i]).collect();
    Permutation::standardize(&vals).expect("distinct entries")
}

/// Number of index subsets of `pi` order-isomorphic to `sigma`.
pub fn count_pattern(pi: &Permutation, sigma: &Permutation) -> Result<u64> {
    let (n, k) = (pi.len(), sigma.len());
    if n > CONTAINMENT_CAP {
        return Err(Error::CapExceeded { what: "containment length", cap: CONTAINMENT_CAP as u64, got: n as u64 });
    }
    if k > n {
        return Ok(0);
    }
    let mut count = 0u64;
    for_each_subset(n, k, |pos| {
        if matches_pattern(&pi.entries, pos, &sigma.entries) {
            count += 1;
        }
        true
    });
    Ok(count)
}

pub fn contains_pattern(pi: &Permutation, sigma: &Permutation) -> Result<bool> {
    let (n, k) = (pi.len(), sigma.len());
    if n > CONTAINMENT_CAP {
        return Err(Error::CapExceeded { what: "containment length", cap: CONTAINMENT_CAP as u64, got: n as u64 });
    }
    if k > n {
        return Ok(false);
    }
    let mut found = false;
    for_each_subset(n, k, |pos| {
        found = matches_pattern(&pi.entries, pos, &sigma.entries);
        !found
    });
    Ok(found)
}

/// Pattern density `t(σ, π)`.
pub fn pattern_density(pi: &Permutation, sigma: &Permutation) -> Result<f64> {
    let c = count_pattern(pi, sigma)?;
    Ok(c as f64 / binomial_f64(pi.len(), sigma.len()))
}

fn matches_pattern(pi: &[u32], pos: &[usize], sigma: &[u32]) -> bool {
    let k = pos.len();
    for a in 0..k {
        for b in a + 1..k {
            if (pi[pos[a]] < pi[pos[b]]) != (sigma[a] < sigma[b]) {
                return false;
            }
        }
    }
    true
}

/// Visits every k-subset of `0..n` in lexicographic order; stop by returning false.
pub(crate) fn for_each_subset<F: FnMut(&[usize]) -> bool>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut pos: Vec<usize> = (0..k).collect();
    loop {
        if !f(&pos) {
            return;
        }
        let mut i = k;
        while i > 0 && pos[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        pos[i - 1] += 1;
        for j in i..k {
            pos[j] = pos[j - 1] + 1;
        }
    }
}

pub(crate) fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.one_line())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({})", self.one_line())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Accepts `"3142"`, `"3,1,4,2"` and `"10,1,2,...,9"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let entries: Option<Vec<u32>> = if s.contains(',') {
            s.split(',').map(|t| t.trim().parse().ok()).collect()
        } else {
            s.chars().map(|c| c.to_digit(10)).collect()
        };
        match entries {
            Some(e) => Self::new(e),
            None => Err(Error::InvalidPermutation(s.to_string())),
        }
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.one_line())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
