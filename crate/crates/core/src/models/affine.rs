//! Piecewise-affine interval maps and the constructions built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Snap tolerance for piece boundaries and image endpoints.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `f(x) = slope * x + icpt` on `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffinePiece {
    pub start: f64,
    pub end: f64,
    pub slope: f64,
    pub icpt: f64,
}

impl AffinePiece {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.icpt
    }

    /// Value at the left end of the domain.
    pub fn y_start(&self) -> f64 {
        self.eval(self.start)
    }

    /// Limit value at the right end of the domain.
    pub fn y_end(&self) -> f64 {
        self.eval(self.end)
    }

    /// Image interval `(lo, hi)`.
    pub fn image(&self) -> (f64, f64) {
        let (a, b) = (self.y_start(), self.y_end());
        (a.min(b), a.max(b))
    }

    pub fn increasing(&self) -> bool {
        self.slope > 0.0
    }

    /// Affine piece on `[start, end)` running from `y0` to `y1`.
    pub fn through(start: f64, end: f64, y0: f64, y1: f64) -> Self {
        let slope = (y1 - y0) / (end - start);
        Self { start, end, slope, icpt: y0 - slope * start }
    }

    /// Length of `{x in piece : f(x) in [y1, y2]}`.
    pub fn preimage_len(&self, y1: f64, y2: f64) -> f64 {
        let (lo, hi) = self.image();
        let ov = (hi.min(y2) - lo.max(y1)).max(0.0);
        ov / self.slope.abs()
    }

    /// Sub-domain `[u, v]` mapped into `[y1, y2]` (empty when `u >= v`).
    pub fn preimage_interval(&self, y1: f64, y2: f64) -> (f64, f64) {
        let a = (y1 - self.icpt) / self.slope;
        let b = (y2 - self.icpt) / self.slope;
        let (a, b) = (a.min(b), a.max(b));
        (a.max(self.start), b.min(self.end))
    }
}

#[derive(Serialize, Deserialize)]
struct RawPiece {
    dom: [f64; 2],
    slope: f64,
    icpt: f64,
}

/// A map on `[0,1)` given by finitely many affine pieces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMap", into = "RawMap")]
pub struct PiecewiseAffineMap {
    pieces: Vec<AffinePiece>,
}

#[derive(Serialize, Deserialize)]
struct RawMap {
    pieces: Vec<RawPiece>,
}

impl TryFrom<RawMap> for PiecewiseAffineMap {
    type Error = Error;
    fn try_from(r: RawMap) -> Result<Self> {
        PiecewiseAffineMap::new(
            r.pieces
                .into_iter()
                .map(|p| AffinePiece { start: p.dom[0], end: p.dom[1], slope: p.slope, icpt: p.icpt })
                .collect(),
        )
    }
}

impl From<PiecewiseAffineMap> for RawMap {
    fn from(m: PiecewiseAffineMap) -> Self {
        RawMap {
            pieces: m
                .pieces
                .into_iter()
                .map(|p| RawPiece { dom: [p.start, p.end], slope: p.slope, icpt: p.icpt })
                .collect(),
        }
    }
}

impl PiecewiseAffineMap {
    /// Checks that the domains tile `[0,1)` and each image lies in `[0,1]`.
    /// Boundaries within `BOUNDARY_TOL` of each other are snapped together.
    pub fn new(mut pieces: Vec<AffinePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidModel("no pieces".into()));
        }
        let mut at = 0.0;
        for (i, p) in pieces.iter_mut().enumerate() {
            if (p.start - at).abs() > BOUNDARY_TOL {
                return Err(Error::InvalidModel(format!("piece {i} starts at {} but previous ends at {at}", p.start)));
            }
            p.start = at;
            if !(p.end > p.start) {
                return Err(Error::InvalidModel(format!("piece {i} has empty domain")));
            }
            if p.slope == 0.0 || !p.slope.is_finite() || !p.icpt.is_finite() {
                return Err(Error::InvalidModel(format!("piece {i} has slope {}", p.slope)));
            }
            let (lo, hi) = p.image();
            if lo < -BOUNDARY_TOL || hi > 1.0 + BOUNDARY_TOL {
                return Err(Error::InvalidModel(format!("piece {i} image [{lo}, {hi}] leaves [0,1]")));
            }
            at = p.end;
        }
        if (at - 1.0).abs() > BOUNDARY_TOL {
            return Err(Error::InvalidModel(format!("domains end at {at}, not 1")));
        }
        pieces.last_mut().expect("non-empty").end = 1.0;
        Ok(Self { pieces })
    }

    pub fn identity() -> Self {
        Self::new(vec![AffinePiece { start: 0.0, end: 1.0, slope: 1.0, icpt: 0.0 }]).expect("valid")
    }

    /// `x ↦ {k x}` for integer `k ≥ 1`.
    pub fn multiply_mod_one(k: u32) -> Self {
        let k = k as f64;
        let pieces = (0..k as u32)
            .map(|i| AffinePiece { start: i as f64 / k, end: (i + 1) as f64 / k, slope: k, icpt: -(i as f64) })
            .collect();
        Self::new(pieces).expect("valid")
    }

    pub fn doubling() -> Self {
        Self::multiply_mod_one(2)
    }

    pub fn tent() -> Self {
        Self::new(vec![
            AffinePiece { start: 0.0, end: 0.5, slope: 2.0, icpt: 0.0 },
            AffinePiece { start: 0.5, end: 1.0, slope: -2.0, icpt: 2.0 },
        ])
        .expect("valid")
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece_index(&self, x: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.start <= x);
        i.saturating_sub(1).min(self.pieces.len() - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// `λ([x1, x2] ∩ f⁻¹[y1, y2])`.
    pub fn rect_measure(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
        let mut s = 0.0;
        for p in &self.pieces {
            if p.end <= x1 || p.start >= x2 {
                continue;
            }
            let (u, v) = p.preimage_interval(y1, y2);
            s += (v.min(x2) - u.max(x1)).max(0.0);
        }
        s
    }

    /// `Σ |I| ln |slope|`.
    pub fn integral_log_abs_slope(&self) -> f64 {
        self.pieces.iter().map(|p| p.len() * p.slope.abs().ln()).sum()
    }

    /// Exact check: on every interval between consecutive image endpoints
    /// the push-forward density `Σ 1/|slope|` equals one.
    pub fn measure_preservation_defect(&self) -> f64 {
        let mut cuts: Vec<f64> = vec![0.0, 1.0];
        for p in &self.pieces {
            let (lo, hi) = p.image();
            cuts.push(lo.clamp(0.0, 1.0));
            cuts.push(hi.clamp(0.0, 1.0));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= BOUNDARY_TOL);
        let mut worst: f64 = 0.0;
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let density: f64 = self
                .pieces
                .iter()
                .filter(|p| {
                    let (lo, hi) = p.image();
                    lo < mid && mid < hi
                })
                .map(|p| 1.0 / p.slope.abs())
                .sum();
            worst = worst.max((density - 1.0).abs());
        }
        worst
    }
}

/// `max_J |λ(f⁻¹ J) − |J||` over the intervals `J = [a/g, b/g]`.
pub fn validate_measure_preserving(f: &PiecewiseAffineMap, grid: usize) -> f64 {
    assert!(grid >= 1);
    let g = grid as f64;
    let mut pre = vec![0.0f64; grid];
    for p in f.pieces() {
        let (lo, hi) = p.image();
        let j0 = ((lo * g).floor().max(0.0) as usize).min(grid - 1);
        let j1 = ((hi * g).ceil().max(1.0) as usize).min(grid);
        for (j, c) in pre.iter_mut().enumerate().take(j1).skip(j0) {
            *c += p.preimage_len(j as f64 / g, (j + 1) as f64 / g);
        }
    }
    // deviation of [a/g, b/g] is E[b] − E[a] for the prefix sums E
    let (mut e, mut emin, mut emax) = (0.0f64, 0.0f64, 0.0f64);
    for c in pre {
        e += c - 1.0 / g;
        emin = emin.min(e);
        emax = emax.max(e);
    }
    emax - emin
}

/// Replaces each piece by `2k+1` equal-length pieces alternating between the
/// piece's end values.
pub fn make_oscillating_approximator(f: &PiecewiseAffineMap, k: usize) -> Result<PiecewiseAffineMap> {
    if k == 0 {
        return Err(Error::InvalidArgument("oscillation count k must be at least 1".into()));
    }
    let parts = 2 * k + 1;
    let mut out = Vec::with_capacity(f.piece_count() * parts);
    for p in f.pieces() {
        let (ya, yb) = (p.y_start(), p.y_end());
        let w = p.len() / parts as f64;
        for j in 0..parts {
            let u = p.start + j as f64 * w;
            let v = if j + 1 == parts { p.end } else { p.start + (j + 1) as f64 * w };
            let (y0, y1) = if j % 2 == 0 { (ya, yb) } else { (yb, ya) };
            out.push(AffinePiece::through(u, v, y0, y1));
        }
    }
    PiecewiseAffineMap::new(out)
}

/// Splits `f` into sub-pieces whose images are exactly single cells of the
/// range partition given by its sorted cut points. Returns `(cell, piece)`.
pub(crate) fn split_by_range(f: &PiecewiseAffineMap, cuts: &[f64]) -> Result<Vec<(usize, AffinePiece)>> {
    let mut out = Vec::new();
    for p in f.pieces() {
        let (lo, hi) = p.image();
        let first = cuts.partition_point(|&c| c <= lo + 1e-9).saturating_sub(1);
        for j in first..cuts.len() - 1 {
            let (a, b) = (cuts[j], cuts[j + 1]);
            if a >= hi - 1e-9 {
                break;
            }
            if a < lo - 1e-9 || b > hi + 1e-9 {
                return Err(Error::IncompatiblePartition(format!(
                    "piece on [{}, {}) maps onto [{lo}, {hi}], which cuts cell [{a}, {b}]",
                    p.start, p.end
                )));
            }
            let (mut u, mut v) = p.preimage_interval(a, b);
            // keep the original boundaries exact
            if (u - p.start).abs() < 1e-12 {
                u = p.start;
            }
            if (v - p.end).abs() < 1e-12 {
                v = p.end;
            }
            if v > u {
                out.push((j, AffinePiece { start: u, end: v, slope: p.slope, icpt: p.icpt }));
            }
        }
    }
    out.sort_by(|a, b| a.1.start.total_cmp(&b.1.start));
    // re-tile exactly
    for i in 1..out.len() {
        out[i].1.start = out[i - 1].1.end;
    }
    Ok(out)
}

/// Cut points of the coarsest range partition with affine-bijective preimage
/// pieces: `0`, `1`, and every image endpoint.
pub fn default_range_cuts(f: &PiecewiseAffineMap) -> Vec<f64> {
    let mut cuts = vec![0.0, 1.0];
    for p in f.pieces() {
        let (lo, hi) = p.image();
        cuts.push(lo.clamp(0.0, 1.0));
        cuts.push(hi.clamp(0.0, 1.0));
    }
    normalize_cuts(cuts)
}

pub(crate) fn normalize_cuts(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    cuts
}

/// Converts a list of intervals `[a, b]` tiling `[0,1]` to cut points.
pub fn cuts_from_intervals(intervals: &[(f64, f64)]) -> Result<Vec<f64>> {
    let mut iv = intervals.to_vec();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cuts = vec![0.0];
    let mut at = 0.0;
    for &(a, b) in &iv {
        if (a - at).abs() > 1e-9 || !(b > a) {
            return Err(Error::IncompatiblePartition(format!("intervals do not tile [0,1] near {a}")));
        }
        cuts.push(b);
        at = b;
    }
    if (at - 1.0).abs() > 1e-9 {
        return Err(Error::IncompatiblePartition("intervals do not reach 1".into()));
    }
    *cuts.last_mut().expect("non-empty") = 1.0;
    Ok(cuts)
}

/// Continuous measure-preserving map `h` obtained by squeezing each preimage
/// piece of every range cell `J` onto its share of `J` and filling the gaps
/// with steep flanks of slope `|J| / (α|I_m|)`.
///
/// Within a cell the preimage pieces `I_1..I_k` are ordered left to right and
/// their shares of `J` are stacked from the bottom. A flank covering the part
/// of `J` below the share of `I_m` has length `α|I_m| Σ_{i<m}|I_i| / |J|`, the
/// flank above has length `α|I_m| Σ_{i>m}|I_i| / |J|`. For an increasing
/// piece the lower flank sits on the left; for a decreasing one, on the right.
pub fn make_gap_filled(f: &PiecewiseAffineMap, range_partition: &[(f64, f64)], alpha: f64) -> Result<PiecewiseAffineMap> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} is outside (0, 1)")));
    }
    let cuts = cuts_from_intervals(range_partition)?;
    let sub = split_by_range(f, &cuts)?;
    let cells = cuts.len() - 1;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for (i, (j, _)) in sub.iter().enumerate() {
        members[*j].push(i);
    }
    let mut out: Vec<AffinePiece> = Vec::with_capacity(sub.len() * 3);
    let mut made: Vec<(f64, Vec<AffinePiece>)> = Vec::with_capacity(sub.len());
    for (j, idx) in members.iter().enumerate() {
        let (jlo, jhi) = (cuts[j], cuts[j + 1]);
        let jl = jhi - jlo;
        let lens: Vec<f64> = idx.iter().map(|&i| sub[i].1.len()).collect();
        let total: f64 = lens.iter().sum();
        if idx.is_empty() {
            continue;
        }
        if (total - jl).abs() > 1e-9 {
            return Err(Error::IncompatiblePartition(format!("preimage of [{jlo}, {jhi}] has length {total}")));
        }
        let mut below = 0.0;
        for (m, &i) in idx.iter().enumerate() {
            let p = sub[i].1;
            let im = lens[m];
            let above = total - below - im;
            let share = (jlo + below, jlo + below + im);
            let low_flank = alpha * im * below / jl;
            let high_flank = alpha * im * above / jl;
            let mut seg = Vec::with_capacity(3);
            if p.increasing() {
                let a = p.start + low_flank;
                let b = p.end - high_flank;
                seg.push(AffinePiece::through(p.start, a, jlo, share.0));
                seg.push(AffinePiece::through(a, b, share.0, share.1));
                seg.push(AffinePiece::through(b, p.end, share.1, jhi));
            } else {
                let a = p.start + high_flank;
                let b = p.end - low_flank;
                seg.push(AffinePiece::through(p.start, a, jhi, share.1));
                seg.push(AffinePiece::through(a, b, share.1, share.0));
                seg.push(AffinePiece::through(b, p.end, share.0, jlo));
            }
            seg.retain(|s| s.len() > 1e-15);
            made.push((p.start, seg));
            below += im;
        }
    }
    made.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, seg) in made {
        out.extend(seg);
    }
    PiecewiseAffineMap::new(out)
}
