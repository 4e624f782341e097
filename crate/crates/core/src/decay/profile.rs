//! Log-periodic profiles `A^{(m)}(x) = a(⌊η^{x+m}⌋)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPeriodicProfile {
    pub eta: f64,
    pub m_values: Vec<i32>,
    pub x_grid: Vec<f64>,
    /// `rows[i][j] = a(⌊η^{x_j + m_i}⌋)`.
    pub rows: Vec<Vec<f64>>,
    /// `sup_x |A^{(m_i)} − A^{(m_{i+1})}|` on the grid.
    pub distances: Vec<f64>,
}

impl LogPeriodicProfile {
    /// True when every successive distance is smaller than the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.distances.windows(2).all(|w| w[1] < w[0])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("x");
        for m in &self.m_values {
            s.push_str(&format!(",m{m}"));
        }
        s.push('\n');
        for (j, x) in self.x_grid.iter().enumerate() {
            s.push_str(&crate::io::fmt_f64(*x));
            for row in &self.rows {
                s.push(',');
                s.push_str(&crate::io::fmt_f64(row[j]));
            }
            s.push('\n');
        }
        s
    }
}

/// `n/g` for `n = 0..g`.
pub fn uniform_x_grid(g: usize) -> Vec<f64> {
    (0..g).map(|i| i as f64 / g as f64).collect()
}

/// Profiles of `seq` (indexed from 0) for `m` in `m_range`. Descriptive
/// only: decreasing distances are evidence, not proof, of convergence.
pub fn log_periodic_profile(
    seq: &dyn Fn(u64) -> Option<f64>,
    eta: f64,
    m_range: std::ops::RangeInclusive<i32>,
    x_grid: &[f64],
) -> Result<LogPeriodicProfile> {
    if !(eta > 1.0) {
        return Err(Error::InvalidArgument(format!("base must exceed 1, got {eta}")));
    }
    if x_grid.is_empty() {
        return Err(Error::InvalidArgument("empty x grid".into()));
    }
    let m_values: Vec<i32> = m_range.collect();
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in &m_values {
        let row = x_grid
            .iter()
            .map(|&x| {
                let t = eta.powf(x + m as f64).floor();
                if !(t >= 0.0 && t < u64::MAX as f64) {
                    return Err(Error::IndexOutOfRange { index: usize::MAX, len: 0 });
                }
                let idx = t as u64;
                seq(idx).ok_or(Error::IndexOutOfRange { index: idx as usize, len: 0 })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let distances = rows.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).collect();
    Ok(LogPeriodicProfile { eta, m_values, x_grid: x_grid.to_vec(), rows, distances })
}

/// Profile of a table indexed by `n`.
pub fn table_profile(values: &[f64], eta: f64, m_range: std::ops::RangeInclusive<i32>, x_grid: &[f64]) -> Result<LogPeriodicProfile> {
    let len = values.len();
    log_periodic_profile(&|n| values.get(n as usize).copied(), eta, m_range, x_grid)
        .map_err(|e| match e {
            Error::IndexOutOfRange { index, .. } => Error::IndexOutOfRange { index, len },
            other => other,
        })
}
