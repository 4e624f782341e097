//! Exact pattern laws of grid-density permutons.

use crate::combinatorics::{compositions_capped, factorial, multinomial_pmf};
use crate::distribution::PatternDistribution;
use crate::error::{Error, Result};
use crate::models::GridDensityPermuton;
use crate::perm::{factorial_u64, lehmer_rank, Permutation};

pub const GRID_N_CAP: usize = 9;
pub const GRID_WORK_CAP: f64 = 1e8;

/// Points are allocated to cells by mass. Points sharing an x-column are in
/// uniformly random x-order, points sharing a y-row in uniformly random
/// y-order, and the two orders are independent.
pub fn exact_grid_distribution(g: &GridDensityPermuton, n: usize) -> Result<PatternDistribution> {
    if n == 0 || n > GRID_N_CAP {
        return Err(Error::CapExceeded { what: "exact grid pattern length", cap: GRID_N_CAP as u64, got: n as u64 });
    }
    let m = g.m();
    let masses: Vec<f64> = (0..m * m).map(|c| g.mass(c / m, c % m)).collect();
    let allocations: Vec<Vec<usize>> =
        compositions_capped(n, m * m)?.into_iter().filter(|k| k.iter().enumerate().all(|(c, &x)| x == 0 || masses[c] > 0.0)).collect();

    let line_counts = |k: &[usize]| {
        let mut cols = vec![0usize; m];
        let mut rows = vec![0usize; m];
        for (c, &x) in k.iter().enumerate() {
            cols[c / m] += x;
            rows[c % m] += x;
        }
        (cols, rows)
    };
    let mut work = 0.0;
    for k in &allocations {
        let (cols, rows) = line_counts(k);
        work += cols.iter().chain(&rows).map(|&x| factorial(x as u64)).product::<f64>();
    }
    if work > GRID_WORK_CAP {
        return Err(Error::CapExceeded { what: "exact grid work", cap: GRID_WORK_CAP as u64, got: work as u64 });
    }

    let orders: Vec<Vec<Vec<usize>>> = (0..=n)
        .map(|k| if k == 0 { vec![Vec::new()] } else { Permutation::all(k).map(|p| p.entries().iter().map(|&v| v as usize - 1).collect()).collect() })
        .collect();
    let mut dense = vec![0.0f64; factorial_u64(n) as usize];
    let mut xr = vec![0usize; n];
    let mut yr = vec![0usize; n];
    let mut pattern = vec![0u32; n];
    for k in &allocations {
        let pk = multinomial_pmf(k, &masses);
        if pk == 0.0 {
            continue;
        }
        // points listed cell by cell
        let mut col_members: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut row_members: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut q = 0;
        for (c, &x) in k.iter().enumerate() {
            for _ in 0..x {
                col_members[c / m].push(q);
                row_members[c % m].push(q);
                q += 1;
            }
        }
        let lines: Vec<&Vec<usize>> = col_members.iter().chain(row_members.iter()).collect();
        let radix: Vec<usize> = lines.iter().map(|l| orders[l.len()].len()).collect();
        let each = pk / radix.iter().map(|&r| r as f64).product::<f64>();
        let mut digits = vec![0usize; lines.len()];
        loop {
            let mut at = 0;
            for (li, line) in lines.iter().enumerate().take(m) {
                for &o in &orders[line.len()][digits[li]] {
                    xr[line[o]] = at;
                    at += 1;
                }
            }
            at = 0;
            for (li, line) in lines.iter().enumerate().skip(m) {
                for &o in &orders[line.len()][digits[li]] {
                    yr[line[o]] = at;
                    at += 1;
                }
            }
            for q in 0..n {
                pattern[xr[q]] = yr[q] as u32 + 1;
            }
            dense[lehmer_rank(&pattern) as usize] += each;
            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < radix[i] {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
    }
    PatternDistribution::from_dense(n, &dense)
}
