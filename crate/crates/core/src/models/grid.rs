//! Permutons with a piecewise-constant density on an m×m grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MARGINAL_TOL: f64 = 1e-9;

/// `density[i][j]` is the density on the cell with x-index `i` and y-index
/// `j`; the mass of that cell is `density[i][j] / m²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridDensityPermuton {
    m: usize,
    density: Vec<Vec<f64>>,
    /// Cumulative cell masses in row-major (x, y) order, for sampling.
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawGrid {
    m: usize,
    density: Vec<Vec<f64>>,
}

impl TryFrom<RawGrid> for GridDensityPermuton {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        if r.density.len() != r.m {
            return Err(Error::LengthMismatch { expected: r.m, got: r.density.len() });
        }
        GridDensityPermuton::new(r.density)
    }
}

impl From<GridDensityPermuton> for RawGrid {
    fn from(g: GridDensityPermuton) -> Self {
        RawGrid { m: g.m, density: g.density }
    }
}

impl GridDensityPermuton {
    pub fn new(density: Vec<Vec<f64>>) -> Result<Self> {
        let m = density.len();
        if m == 0 {
            return Err(Error::InvalidModel("empty grid".into()));
        }
        for row in &density {
            if row.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: row.len() });
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidModel("densities must be non-negative".into()));
            }
        }
        let mf = m as f64;
        for i in 0..m {
            let col: f64 = density[i].iter().sum::<f64>() / (mf * mf);
            let row: f64 = (0..m).map(|k| density[k][i]).sum::<f64>() / (mf * mf);
            if (col - 1.0 / mf).abs() > MARGINAL_TOL || (row - 1.0 / mf).abs() > MARGINAL_TOL {
                return Err(Error::InvalidModel(format!("marginals are not uniform at index {i}")));
            }
        }
        let mut cumulative = Vec::with_capacity(m * m);
        let mut acc = 0.0;
        for row in &density {
            for &v in row {
                acc += v / (mf * mf);
                cumulative.push(acc);
            }
        }
        Ok(Self { m, density, cumulative })
    }

    /// Builds from cell masses instead of densities.
    pub fn from_masses(masses: Vec<Vec<f64>>) -> Result<Self> {
        let m = masses.len() as f64;
        Self::new(masses.into_iter().map(|r| r.into_iter().map(|v| v * m * m).collect()).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn density(&self) -> &[Vec<f64>] {
        &self.density
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.density[i][j] / (self.m * self.m) as f64
    }

    /// Cell index `(i, j)` for a uniform draw `u` in (0, 1).
    pub fn cell_for(&self, u: f64) -> (usize, usize) {
        let total = *self.cumulative.last().expect("non-empty");
        let k = self.cumulative.partition_point(|&c| c <= u * total).min(self.m * self.m - 1);
        (k / self.m, k % self.m)
    }

    pub fn rect_measure(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
        let m = self.m as f64;
        let mut s = 0.0;
        for i in 0..self.m {
            let ox = (x2.min((i + 1) as f64 / m) - x1.max(i as f64 / m)).max(0.0);
            if ox == 0.0 {
                continue;
            }
            for j in 0..self.m {
                let oy = (y2.min((j + 1) as f64 / m) - y1.max(j as f64 / m)).max(0.0);
                s += ox * oy * self.density[i][j];
            }
        }
        s
    }

    /// Extremes of the density, `(min, max)`.
    pub fn density_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.density {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}
