//! Roots of `(s)_{d−1} = d!` and the hypergeometric solutions they index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, factorial};
use crate::error::{Error, Result};
use crate::gamma::ln_gamma;

pub const ROOTS_ARITY_CAP: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub d: usize,
    /// `d` first, the rest by decreasing real part then imaginary part.
    pub roots: Vec<Complex64>,
    /// `x_i = d − s_i`; `x_1 = 0`.
    pub exponents: Vec<Complex64>,
}

/// `(s)_{d−1} − d!` and its derivative.
fn eval(d: usize, s: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for i in 0..d - 1 {
        let f = s - i as f64;
        dp = dp * f + p;
        p *= f;
    }
    (p - factorial(d as u64), dp)
}

/// Coefficients of `(s)_{d−1} − d!`, constant term first.
fn coefficients(d: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for i in 0..d - 1 {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= i as f64 * ck;
        }
        c = next;
    }
    c[0] -= factorial(d as u64);
    c
}

/// All roots via companion-matrix eigenvalues polished by Newton steps.
/// Fails unless the roots are distinct, `d` is among them and every other
/// root has real part below `d`.
pub fn falling_factorial_roots(d: usize) -> Result<RootSet> {
    if !(2..=ROOTS_ARITY_CAP).contains(&d) {
        return Err(Error::InvalidArgument(format!("arity must lie in 2..={ROOTS_ARITY_CAP}, got {d}")));
    }
    let deg = d - 1;
    let c = coefficients(d);
    let mut roots: Vec<Complex64> = if deg == 1 {
        vec![Complex64::new(-c[0], 0.0)]
    } else {
        let mut m = DMatrix::<f64>::zeros(deg, deg);
        for i in 1..deg {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..deg {
            m[(i, deg - 1)] = -c[i];
        }
        m.complex_eigenvalues().iter().copied().collect()
    };
    for r in roots.iter_mut() {
        for _ in 0..100 {
            let (p, dp) = eval(d, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
        // snap conjugation noise on real roots
        if r.im.abs() < 1e-12 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    let df = d as f64;
    roots.sort_by(|a, b| {
        let ka = (a - df).norm() < 1e-9;
        let kb = (b - df).norm() < 1e-9;
        kb.cmp(&ka).then(b.re.total_cmp(&a.re)).then(b.im.total_cmp(&a.im))
    });
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < 1e-8 * scale {
                return Err(Error::Numerical(format!("roots {} and {} are not separated", roots[i], roots[j])));
            }
        }
    }
    if (roots[0] - df).norm() > 1e-9 * df {
        return Err(Error::Numerical(format!("s = {d} is not among the computed roots")));
    }
    roots[0] = Complex64::new(df, 0.0);
    if let Some(bad) = roots[1..].iter().find(|r| r.re >= df) {
        return Err(Error::Numerical(format!("root {bad} has real part at least {d}")));
    }
    for r in &roots {
        let (p, _) = eval(d, *r);
        if p.norm() > 1e-8 * factorial(d as u64) {
            return Err(Error::Numerical(format!("residual {} at root {r}", p.norm())));
        }
    }
    let exponents = roots.iter().map(|s| Complex64::new(df, 0.0) - s).collect();
    Ok(RootSet { d, roots, exponents })
}

/// `a(n) = (n)_{n−l} / (n+x−1)_{n−l} = Γ(n+1) Γ(l+x) / (Γ(l+1) Γ(n+x))`.
pub fn hypergeometric_solution(l: usize, x: Complex64, n: usize) -> Result<Complex64> {
    let pole = |z: Complex64| z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0;
    let zl = Complex64::new(l as f64, 0.0) + x;
    let zn = Complex64::new(n as f64, 0.0) + x;
    if pole(zl) || pole(zn) {
        return Err(Error::Pole(n as u64));
    }
    let lg = ln_gamma(Complex64::new(n as f64 + 1.0, 0.0)) - ln_gamma(Complex64::new(l as f64 + 1.0, 0.0)) + ln_gamma(zl) - ln_gamma(zn);
    Ok(lg.exp())
}

/// Largest relative residual of
/// `Σ_i (−1)^{d−1−i} C(d−1,i) (n+i+d−1)_{d−1} a(n+i) = d! a(n+d−1)`
/// for `l ≤ n` and `n + d − 1 ≤ n_max`, relative to the sum of term moduli.
pub fn hypergeometric_solution_check(d: usize, l: usize, x: Complex64, n_max: usize) -> Result<f64> {
    if d < 2 || l == 0 {
        return Err(Error::InvalidArgument("need d ≥ 2 and l ≥ 1".into()));
    }
    let ff = |z: f64, m: usize| (0..m).map(|i| z - i as f64).product::<f64>();
    let a: Vec<Complex64> = (0..=n_max).map(|n| if n < l { Ok(Complex64::new(0.0, 0.0)) } else { hypergeometric_solution(l, x, n) }).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    let dm = d - 1;
    for n in l..=n_max.saturating_sub(dm) {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for i in 0..=dm {
            let sign = if (dm - i) % 2 == 0 { 1.0 } else { -1.0 };
            let t = a[n + i] * (sign * binomial(dm as u64, i as u64) * ff((n + i + d - 1) as f64, dm));
            sum += t;
            scale += t.norm();
        }
        let rhs = a[n + dm] * factorial(d as u64);
        scale += rhs.norm();
        if scale > 0.0 {
            worst = worst.max((sum - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_arities() {
        let r = falling_factorial_roots(2).unwrap();
        assert_eq!(r.roots, vec![Complex64::new(2.0, 0.0)]);
        let r = falling_factorial_roots(3).unwrap();
        assert!((r.roots[1] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((r.exponents[1] - Complex64::new(5.0, 0.0)).norm() < 1e-12);
        let r = falling_factorial_roots(4).unwrap();
        let w = Complex64::new(-0.5, 23f64.sqrt() / 2.0);
        assert!((r.roots[1] - w).norm() < 1e-10);
        assert!((r.roots[2] - w.conj()).norm() < 1e-10);
    }

    #[test]
    fn invariants_up_to_the_cap() {
        for d in 2..=ROOTS_ARITY_CAP {
            let r = falling_factorial_roots(d).unwrap();
            assert_eq!(r.roots.len(), d - 1);
            assert_eq!(r.exponents[0], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn linear_solution() {
        for n in 2..20 {
            let a = hypergeometric_solution(2, Complex64::new(0.0, 0.0), n).unwrap();
            assert!((a.re - n as f64 / 2.0).abs() < 1e-12 * n as f64);
        }
        assert!(hypergeometric_solution_check(2, 1, Complex64::new(0.0, 0.0), 100).unwrap() < 1e-10);
        assert!(hypergeometric_solution_check(3, 2, Complex64::new(0.0, 0.0), 100).unwrap() < 1e-8);
        assert!(hypergeometric_solution_check(3, 2, Complex64::new(5.0, 0.0), 100).unwrap() < 1e-8);
    }

    #[test]
    fn non_roots_fail_the_check() {
        assert!(hypergeometric_solution_check(3, 2, Complex64::new(2.0, 0.0), 100).unwrap() > 1e-4);
    }

    #[test]
    fn poles_are_reported() {
        assert!(matches!(hypergeometric_solution(2, Complex64::new(-2.0, 0.0), 5), Err(Error::Pole(_))));
    }
}
