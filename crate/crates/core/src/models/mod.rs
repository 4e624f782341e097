//! Permuton representations, sampling, rectangle measures and d_□.

pub mod affine;
pub mod block;
pub mod grid;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use affine::{
    cuts_from_intervals, default_range_cuts, make_gap_filled, make_oscillating_approximator,
    validate_measure_preserving, AffinePiece, PiecewiseAffineMap,
};
pub use block::BlockPermuton;
pub use grid::GridDensityPermuton;

use crate::error::{Error, Result};
use crate::perm::{pattern_of_points, Permutation};
use crate::rng::StreamRng;
use crate::tree::{realize_truncation, TreeRealizationHandle};

/// Collision retries before a sampling error is reported.
pub const MAX_RETRIES: usize = 100;

/// Tolerance for the measure-preservation check of function models.
pub const MEASURE_TOL: f64 = 1e-9;

/// Largest level-m cell count used when a tree model is measured.
const TREE_MEASURE_CELLS: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PermutonModel {
    Lebesgue,
    Block(BlockPermuton),
    Function(PiecewiseAffineMap),
    Grid(GridDensityPermuton),
    Tree(TreeRealizationHandle),
}

/// A measured value with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub error: f64,
}

impl PermutonModel {
    pub fn block(pi: Permutation) -> Self {
        PermutonModel::Block(BlockPermuton::uniform(pi))
    }

    /// Function model; rejects maps that do not preserve Lebesgue measure.
    pub fn function(f: PiecewiseAffineMap) -> Result<Self> {
        let m = PermutonModel::Function(f);
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if let PermutonModel::Function(f) = self {
            let defect = f.measure_preservation_defect();
            if defect > MEASURE_TOL {
                return Err(Error::InvalidModel(format!("map is not measure preserving (density defect {defect:.3e})")));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PermutonModel::Lebesgue => "lebesgue",
            PermutonModel::Block(_) => "block",
            PermutonModel::Function(_) => "function",
            PermutonModel::Grid(_) => "grid",
            PermutonModel::Tree(_) => "tree",
        }
    }

    fn sample_points(&self, n: usize, rng: &mut StreamRng) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(n);
        match self {
            PermutonModel::Lebesgue => {
                for _ in 0..n {
                    pts.push((rng.open01(), rng.open01()));
                }
            }
            PermutonModel::Block(b) => {
                let w = b.weights();
                for _ in 0..n {
                    let u = rng.open01();
                    let mut acc = 0.0;
                    let mut i = w.len() - 1;
                    for (k, &wk) in w.iter().enumerate() {
                        acc += wk;
                        if u < acc {
                            i = k;
                            break;
                        }
                    }
                    let (x, y, s) = b.cell(i);
                    pts.push((x + s * rng.open01(), y + s * rng.open01()));
                }
            }
            PermutonModel::Function(f) => {
                for _ in 0..n {
                    let x = rng.open01();
                    pts.push((x, f.eval(x)));
                }
            }
            PermutonModel::Grid(g) => {
                let m = g.m() as f64;
                for _ in 0..n {
                    let (i, j) = g.cell_for(rng.open01());
                    pts.push(((i as f64 + rng.open01()) / m, (j as f64 + rng.open01()) / m));
                }
            }
            PermutonModel::Tree(_) => unreachable!("tree models sample lazily"),
        }
        pts
    }

    /// Pattern of `n` i.i.d. points. Tree models sample their realization
    /// exactly; collisions (float ties) are redrawn.
    pub fn sample_pattern(&self, n: usize, rng: &mut StreamRng) -> Result<Permutation> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        match self {
            PermutonModel::Tree(h) => h.sample_pattern_lazy(n, rng),
            PermutonModel::Lebesgue => {
                let mut e: Vec<u32> = (1..=n as u32).collect();
                e.shuffle(rng);
                Permutation::new(e)
            }
            _ => {
                for _ in 0..MAX_RETRIES {
                    match pattern_of_points(&self.sample_points(n, rng)) {
                        Err(Error::Collision) => continue,
                        other => return other,
                    }
                }
                Err(Error::Collision)
            }
        }
    }

    /// Patterns of the first `k` of `n` i.i.d. points for `k = 1..=n`.
    pub fn sample_nested(&self, n: usize, rng: &mut StreamRng) -> Result<Vec<Permutation>> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        match self {
            PermutonModel::Tree(h) => {
                let s = h.sample_lazy(n, rng)?;
                Ok((1..=n).map(|k| s.pattern_prefix(k)).collect())
            }
            PermutonModel::Lebesgue => {
                let mut e: Vec<u32> = (1..=n as u32).collect();
                e.shuffle(rng);
                (1..=n).map(|k| Permutation::standardize(&e[..k])).collect()
            }
            _ => {
                for _ in 0..MAX_RETRIES {
                    let pts = self.sample_points(n, rng);
                    match pattern_of_points(&pts) {
                        Err(Error::Collision) => continue,
                        Err(e) => return Err(e),
                        Ok(_) => return (1..=n).map(|k| pattern_of_points(&pts[..k])).collect(),
                    }
                }
                Err(Error::Collision)
            }
        }
    }

    /// `μ([x1,x2] × [y1,y2])`. Exact except for tree models, which are
    /// measured on a truncation with the reported error bound.
    pub fn rect_measure(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> Result<Measured> {
        if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) || !(0.0..=1.0).contains(&y1) || !(0.0..=1.0).contains(&y2) || x1 > x2 || y1 > y2 {
            return Err(Error::InvalidArgument(format!("malformed rectangle [{x1},{x2}]x[{y1},{y2}]")));
        }
        let exact = |value| Ok(Measured { value, error: 0.0 });
        match self {
            PermutonModel::Lebesgue => exact((x2 - x1) * (y2 - y1)),
            PermutonModel::Block(b) => exact(b.rect_measure(x1, x2, y1, y2)),
            PermutonModel::Function(f) => exact(f.rect_measure(x1, x2, y1, y2)),
            PermutonModel::Grid(g) => exact(g.rect_measure(x1, x2, y1, y2)),
            PermutonModel::Tree(h) => {
                let (b, err) = tree_as_block(h)?;
                Ok(Measured { value: b.rect_measure(x1, x2, y1, y2), error: err })
            }
        }
    }

    /// Masses of the `g × g` half-open grid cells, index `i * g + j` for
    /// x-cell `i` and y-cell `j`, with a total absolute error bound.
    pub fn grid_masses(&self, g: usize) -> Result<(Vec<f64>, f64)> {
        let gf = g as f64;
        let mut out = vec![0.0; g * g];
        let spread = |out: &mut Vec<f64>, x: f64, y: f64, w: f64, mass: f64| {
            let (i0, i1) = ((x * gf).floor() as usize, ((x + w) * gf).ceil() as usize);
            let (j0, j1) = ((y * gf).floor() as usize, ((y + w) * gf).ceil() as usize);
            for i in i0..i1.min(g) {
                let ox = (((i + 1) as f64 / gf).min(x + w) - (i as f64 / gf).max(x)).max(0.0);
                if ox == 0.0 {
                    continue;
                }
                for j in j0..j1.min(g) {
                    let oy = (((j + 1) as f64 / gf).min(y + w) - (j as f64 / gf).max(y)).max(0.0);
                    out[i * g + j] += mass * ox * oy / (w * w);
                }
            }
        };
        match self {
            PermutonModel::Block(b) => {
                for i in 0..b.pi().len() {
                    let (x, y, w) = b.cell(i);
                    spread(&mut out, x, y, w, w);
                }
                Ok((out, 0.0))
            }
            PermutonModel::Tree(h) => {
                let (b, err) = tree_as_block(h)?;
                for i in 0..b.pi().len() {
                    let (x, y, w) = b.cell(i);
                    spread(&mut out, x, y, w, w);
                }
                Ok((out, err))
            }
            _ => {
                for i in 0..g {
                    for j in 0..g {
                        let m = self.rect_measure(i as f64 / gf, (i + 1) as f64 / gf, j as f64 / gf, (j + 1) as f64 / gf)?;
                        out[i * g + j] = m.value;
                    }
                }
                Ok((out, 0.0))
            }
        }
    }
}

/// Block permuton of a truncation deep enough to have about 2^16 cells.
/// A rectangle's measure is exact on every cell it does not cut at a corner,
/// so the error is at most `d` times the largest cell.
fn tree_as_block(h: &TreeRealizationHandle) -> Result<(BlockPermuton, f64)> {
    let d = h.d() as u64;
    let mut m = 0;
    while d.pow(m + 1) <= TREE_MEASURE_CELLS {
        m += 1;
    }
    let t = realize_truncation(h, m as usize)?;
    let max_cell = t.cell_lengths.iter().copied().fold(0.0, f64::max);
    let b = BlockPermuton::new(t.pi, t.cell_lengths)?;
    Ok((b, h.d() as f64 * max_cell))
}

/// `max |μ1(R) − μ2(R)|` over rectangles whose corners lie on the `1/g` grid.
///
/// A lower bound on d_□ that is within `4/g` of it.
pub fn box_distance(mu1: &PermutonModel, mu2: &PermutonModel, g: usize) -> Result<f64> {
    if g < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let (a, _) = mu1.grid_masses(g)?;
    let (b, _) = mu2.grid_masses(g)?;
    // prefix sums over y within each x-column, then over x
    let mut p = vec![0.0f64; (g + 1) * (g + 1)];
    for i in 0..g {
        for j in 0..g {
            p[(i + 1) * (g + 1) + j + 1] =
                a[i * g + j] - b[i * g + j] + p[i * (g + 1) + j + 1] + p[(i + 1) * (g + 1) + j] - p[i * (g + 1) + j];
        }
    }
    let mut best: f64 = 0.0;
    let mut s = vec![0.0f64; g + 1];
    for x1 in 0..g {
        for x2 in x1 + 1..=g {
            for (j, sj) in s.iter_mut().enumerate() {
                *sj = p[x2 * (g + 1) + j] - p[x1 * (g + 1) + j];
            }
            // best rectangle in this strip is max − min of the column prefix
            let (lo, hi) = s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
            best = best.max(hi - lo);
        }
    }
    Ok(best)
}
