//! Small exact combinatorial helpers.

use num_bigint::BigUint;

/// Multinomial coefficient `(Σ k_i)! / Π k_i!`, exact.
pub fn interleaving_count(block_sizes: &[u64]) -> BigUint {
    if let Some(v) = interleaving_count_u64(block_sizes) {
        return BigUint::from(v);
    }
    let mut acc = BigUint::from(1u32);
    let mut total: u64 = 0;
    for &k in block_sizes {
        // acc *= C(total + k, k), built one factor at a time
        for i in 1..=k {
            total += 1;
            acc *= total;
            acc /= i;
        }
    }
    acc
}

/// Same as [`interleaving_count`], or `None` on 64-bit overflow.
pub fn interleaving_count_u64(block_sizes: &[u64]) -> Option<u64> {
    let mut acc: u64 = 1;
    let mut total: u64 = 0;
    for &k in block_sizes {
        for i in 1..=k {
            total += 1;
            // acc * total / i is an integer at every step
            let g = gcd(acc, i);
            let (a, b) = (acc / g, i / g);
            acc = a.checked_mul(total / b)?;
        }
    }
    Some(acc)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0f64;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub fn ln_factorial(n: u64) -> f64 {
    crate::gamma::ln_gamma_real(n as f64 + 1.0)
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Number of weak compositions of `n` into `parts` parts.
pub fn composition_count(n: usize, parts: usize) -> f64 {
    if parts == 0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    binomial((n + parts - 1) as u64, (parts - 1) as u64)
}

/// Largest number of compositions an exact routine may enumerate.
pub const COMPOSITION_CAP: f64 = 2e6;

/// [`compositions`], refusing sets larger than [`COMPOSITION_CAP`].
pub fn compositions_capped(n: usize, parts: usize) -> crate::error::Result<Vec<Vec<usize>>> {
    let c = composition_count(n, parts);
    if c > COMPOSITION_CAP {
        return Err(crate::error::Error::CapExceeded { what: "allocation count", cap: COMPOSITION_CAP as u64, got: c.min(u64::MAX as f64) as u64 });
    }
    Ok(compositions(n, parts))
}

/// All weak compositions of `n` into `parts` non-negative parts, in
/// lexicographic order.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(i: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
    }
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, n, &mut cur, &mut out);
    out
}

/// Multinomial probability `n!/Π k_i! Π p_i^{k_i}`.
pub fn multinomial_pmf(k: &[usize], p: &[f64]) -> f64 {
    let sizes: Vec<u64> = k.iter().map(|&x| x as u64).collect();
    let mut prob = 1.0;
    for (&ki, &pi) in k.iter().zip(p) {
        if ki > 0 {
            prob *= pi.powi(ki as i32);
        }
    }
    if prob == 0.0 {
        return 0.0;
    }
    match interleaving_count_u64(&sizes) {
        Some(c) if c < (1u64 << 53) => c as f64 * prob,
        _ => {
            let n: usize = k.iter().sum();
            let mut lc = ln_factorial(n as u64);
            for &ki in k {
                lc -= ln_factorial(ki as u64);
            }
            lc.exp() * prob
        }
    }
}
