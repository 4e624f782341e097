use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;

use permuton_core::exact::{entropy_curve, exact_function_distribution, EntropyCurve, EntropyMode};
use permuton_core::gamma::gamma;
use permuton_core::models::PiecewiseAffineMap;
use permuton_core::{Permutation, PermutonModel};

#[derive(Deserialize)]
struct GammaPoint {
    re_z: f64,
    im_z: f64,
    re: f64,
    im: f64,
}

#[test]
fn lanczos_matches_reference_values() {
    let pts: Vec<GammaPoint> = serde_json::from_str(include_str!("golden/lanczos_reference.json")).unwrap();
    assert!(!pts.is_empty());
    for p in &pts {
        let want = Complex64::new(p.re, p.im);
        let got = gamma(Complex64::new(p.re_z, p.im_z));
        let err = (got - want).norm() / want.norm().max(1e-300);
        assert!(err < 1e-12, "Γ({} + {}i): {got} vs {want}", p.re_z, p.im_z);
    }
}

/// Number of split points `m` with `σ` increasing on `σ_1..σ_m` and on `σ_{m+1}..σ_n`.
fn split_count(sigma: &Permutation) -> u64 {
    let e = sigma.entries();
    let inc = |s: &[u32]| s.windows(2).all(|w| w[0] < w[1]);
    (0..=e.len()).filter(|&m| inc(&e[..m]) && inc(&e[m..])).count() as u64
}

fn closed_form(n: usize) -> Vec<(Permutation, BigRational)> {
    let den = BigRational::from_integer(num_bigint::BigInt::one() << n);
    Permutation::all(n).map(|s| {
        let c = BigRational::from_integer(split_count(&s).into());
        (s, c / den.clone())
    }).collect()
}

#[test]
fn doubling_law_equals_closed_form_exactly() {
    for n in 1..=7 {
        let dist = exact_function_distribution(&PiecewiseAffineMap::doubling(), n).unwrap();
        let mut total = BigRational::zero();
        for (s, t) in closed_form(n) {
            let got = BigRational::from_float(dist.prob(&s)).unwrap();
            assert_eq!(got, t, "n={n} σ={}", s.one_line());
            total += t;
        }
        assert!(total.is_one());
    }
}

#[test]
fn doubling_golden_curve() {
    let golden = include_str!("golden/doubling_curve.csv");
    let model = PermutonModel::function(PiecewiseAffineMap::doubling()).unwrap();
    let curve = entropy_curve(&model, 9, EntropyMode::Exact).unwrap();
    assert_eq!(curve.to_csv(), golden);

    // entropies recomputed from the closed form
    let parsed = EntropyCurve::from_csv(golden).unwrap();
    for (n, h) in parsed.values().into_iter().enumerate().map(|(i, h)| (i + 1, h)) {
        let want: f64 = Permutation::all(n)
            .map(|s| split_count(&s) as f64 / (1u64 << n) as f64)
            .filter(|&t| t > 0.0)
            .map(|t| -t * t.ln())
            .sum();
        assert!((h - want).abs() < 1e-12, "n={n}: {h} vs {want}");
    }
}
