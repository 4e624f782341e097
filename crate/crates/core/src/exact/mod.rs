//! Exact pattern laws, exact entropy curves and related closed forms.

mod block;
mod function;
mod geom;
mod grid;

pub use block::{exact_block_distribution, BLOCK_N_CAP, BLOCK_PI_CAP};
pub use function::{
    exact_function_details, exact_function_distribution, exact_function_distribution_with_partition, FunctionExact,
    FUNCTION_N_CAP, FUNCTION_WORK_CAP,
};
pub use geom::{geom_sep_entropy, integral_log_abs_derivative, GeomSepEntropy, MapDescription, QUADRATURE_TOL};
pub use grid::{exact_grid_distribution, GRID_N_CAP, GRID_WORK_CAP};

use serde::{Deserialize, Serialize};

use crate::combinatorics::ln_factorial;
use crate::distribution::{quasi_monotonicity_gap, PatternDistribution};
use crate::error::{Error, Result};
use crate::estimator::{estimate_entropy_curve, Method};
use crate::models::PermutonModel;

/// Largest `n` for the exact Lebesgue law (a dense table of `n!` entries).
pub const LEBESGUE_N_CAP: usize = 9;

/// Exact `μ^(n)` for every model kind that has one.
pub fn exact_distribution(model: &PermutonModel, n: usize) -> Result<PatternDistribution> {
    match model {
        PermutonModel::Lebesgue => {
            if n == 0 || n > LEBESGUE_N_CAP {
                return Err(Error::CapExceeded { what: "exact Lebesgue pattern length", cap: LEBESGUE_N_CAP as u64, got: n as u64 });
            }
            PatternDistribution::uniform(n)
        }
        PermutonModel::Block(b) => exact_block_distribution(b.pi(), b.weights(), n),
        PermutonModel::Function(f) => exact_function_distribution(f, n),
        PermutonModel::Grid(g) => exact_grid_distribution(g, n),
        PermutonModel::Tree(_) => Err(Error::InvalidModel("tree realizations have no exact pattern law; use estimate mode".into())),
    }
}

/// One row of an entropy curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub n: usize,
    pub h: f64,
    pub h_per_n: f64,
    /// `H_n / (n ln n)`, taken as 0 at `n = 1`.
    pub h_per_nlogn: f64,
    /// Bootstrap standard error, estimate mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl CurveRow {
    pub fn new(n: usize, h: f64, stderr: Option<f64>) -> Self {
        let nf = n as f64;
        let h_per_nlogn = if n > 1 { h / (nf * nf.ln()) } else { 0.0 };
        Self { n, h, h_per_n: h / nf, h_per_nlogn, stderr }
    }
}

/// `H_n` for `n = 1..=n_max`, in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCurve {
    pub rows: Vec<CurveRow>,
}

pub const CURVE_HEADER: &str = "n,H,H_per_n,H_per_nlogn";

impl EntropyCurve {
    pub fn from_values(values: &[f64]) -> Self {
        Self { rows: values.iter().enumerate().map(|(i, &h)| CurveRow::new(i + 1, h, None)).collect() }
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    pub fn quasi_monotonicity_gap(&self) -> f64 {
        quasi_monotonicity_gap(&self.values())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CURVE_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                r.n,
                crate::io::fmt_f64(r.h),
                crate::io::fmt_f64(r.h_per_n),
                crate::io::fmt_f64(r.h_per_nlogn)
            ));
        }
        s
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        if lines.next().map(str::trim) != Some(CURVE_HEADER) {
            return Err(Error::InvalidArgument("missing entropy curve header".into()));
        }
        let mut values = Vec::new();
        for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            let n: usize = fields[0].trim().parse().map_err(|_| Error::InvalidArgument(format!("bad row: {line}")))?;
            if n != i + 1 || fields.len() != 4 {
                return Err(Error::InvalidArgument(format!("bad row: {line}")));
            }
            values.push(fields[1].trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad row: {line}")))?);
        }
        Ok(Self::from_values(&values))
    }
}

/// How an entropy curve is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EntropyMode {
    Exact,
    /// Monte Carlo with `samples` patterns per run; a single length-`n_max`
    /// draw supplies the patterns of every shorter length.
    Estimate { samples: u64, seed: u64, method: Method },
}

pub fn entropy_curve(model: &PermutonModel, n_max: usize, mode: EntropyMode) -> Result<EntropyCurve> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    match mode {
        EntropyMode::Exact => {
            let values = (1..=n_max)
                .map(|n| match model {
                    // closed form beyond the enumeration cap
                    PermutonModel::Lebesgue if n > LEBESGUE_N_CAP => Ok(ln_factorial(n as u64)),
                    _ => exact_distribution(model, n).map(|d| d.entropy()),
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(EntropyCurve::from_values(&values))
        }
        EntropyMode::Estimate { samples, seed, method } => {
            let est = estimate_entropy_curve(model, n_max, samples, seed, method)?;
            Ok(EntropyCurve { rows: est.iter().map(|e| CurveRow::new(e.n, e.value, e.stderr)).collect() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BlockPermuton, PiecewiseAffineMap};

    #[test]
    fn lebesgue_curve() {
        let c = entropy_curve(&PermutonModel::Lebesgue, 8, EntropyMode::Exact).unwrap();
        for r in &c.rows {
            assert!((r.h - ln_factorial(r.n as u64)).abs() < 1e-12, "n = {}: {:e}", r.n, r.h - ln_factorial(r.n as u64));
        }
        assert_eq!(c.rows[0].h_per_nlogn, 0.0);
        assert!(exact_distribution(&PermutonModel::Lebesgue, 10).is_err());
    }

    #[test]
    fn identity_curve_is_zero() {
        let c = entropy_curve(&PermutonModel::Function(PiecewiseAffineMap::identity()), 6, EntropyMode::Exact).unwrap();
        assert!(c.values().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let c = entropy_curve(&PermutonModel::block("231".parse().unwrap()), 5, EntropyMode::Exact).unwrap();
        let s = c.to_csv();
        assert!(s.starts_with("n,H,H_per_n,H_per_nlogn\n"));
        assert_eq!(EntropyCurve::from_csv(&s).unwrap().values(), c.values());
    }

    #[test]
    fn block_21_against_geometric_separation() {
        let h = exact_block_distribution(&"21".parse().unwrap(), &[0.5, 0.5], 2).unwrap().entropy();
        assert!((h - 0.562_335_144_618_808_4).abs() < 1e-12);
        let lebesgue: Vec<f64> = (0..=2).map(|k| ln_factorial(k)).collect();
        let g = geom_sep_entropy(&[0.5, 0.5], &[lebesgue.clone(), lebesgue], 2).unwrap();
        assert!(g.value <= h && h <= g.value + g.omega_upper);
        assert!((g.omega_upper - 2.0 * 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn tree_has_no_exact_law() {
        let h = crate::tree::TreeRealizationHandle::new(1, crate::tree::PermutationLaw::uniform(2).unwrap(), crate::tree::GapMode::Equal);
        assert!(exact_distribution(&PermutonModel::Tree(h), 3).is_err());
        let _ = BlockPermuton::uniform("1".parse().unwrap());
    }
}
