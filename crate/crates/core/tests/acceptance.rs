//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line to stderr
//! (uncaptured) and then asserts the criterion.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;

use permuton_core::decay::{
    alpha_equal_table, alpha_uniform_table, binomial_decay_table, falling_factorial_roots, hypergeometric_solution_check,
    table_profile, uniform_x_grid, DecayParams,
};
use permuton_core::estimator::{estimate_mean_curve, estimate_sampling_entropy, implied_rho, Method};
use permuton_core::exact::{entropy_curve, exact_block_distribution, exact_function_details, exact_function_distribution, EntropyMode};
use permuton_core::models::{make_gap_filled, make_oscillating_approximator, BlockPermuton, PiecewiseAffineMap};
use permuton_core::perm::contains_pattern;
use permuton_core::rng::mix2;
use permuton_core::tree::{
    class_membership, expected_pattern_density_exact, expected_pattern_distribution, forbidden_pattern, realization_gap_stats,
    GapMode, PermutationLaw, TreeRealizationHandle,
};
use permuton_core::{quasi_monotonicity_gap, Permutation, PermutonModel, StreamRng};

fn report(id: u32, pass: bool, detail: &str, started: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("[criterion {id:>2}] {verdict} ({:.1}s) {detail}\n", started.elapsed().as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {id}: {detail}");
}

fn p(s: &str) -> Permutation {
    Permutation::new(s.bytes().map(|b| (b - b'0') as u32).collect()).unwrap()
}

fn ln_fact(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[test]
fn criterion_01_lebesgue() {
    let t0 = Instant::now();
    let curve = entropy_curve(&PermutonModel::Lebesgue, 8, EntropyMode::Exact).unwrap();
    let exact_err = curve.values().iter().enumerate().map(|(i, h)| (h - ln_fact(i + 1)).abs()).fold(0.0, f64::max);
    let mc = estimate_sampling_entropy(&PermutonModel::Lebesgue, 4, 2_000_000, 11, Method::Plugin).unwrap();
    let mc_err = (mc.value - 24f64.ln()).abs();
    let pass = exact_err < 1e-12 && mc_err < 0.01 && t0.elapsed().as_secs() < 60;
    report(1, pass, &format!("exact max|H_n − ln n!| = {exact_err:.2e}; MC H_4 = {:.5} (off by {mc_err:.2e})", mc.value), t0);
}

#[test]
fn criterion_02_quasi_monotonicity() {
    let t0 = Instant::now();
    let mut rng = StreamRng::new(2, 0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let k = rng.random_range(1..=5usize);
        let mut v: Vec<u32> = (1..=k as u32).collect();
        rand::seq::SliceRandom::shuffle(&mut v[..], &mut rng);
        let w: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let b = BlockPermuton::new(Permutation::new(v).unwrap(), w.iter().map(|x| x / s).collect()).unwrap();
        let h: Vec<f64> = (1..=7).map(|n| exact_block_distribution(b.pi(), b.weights(), n).unwrap().entropy()).collect();
        worst = worst.max(quasi_monotonicity_gap(&h));
    }
    let maps = [
        PiecewiseAffineMap::doubling(),
        PiecewiseAffineMap::tent(),
        PiecewiseAffineMap::multiply_mod_one(3),
        make_oscillating_approximator(&PiecewiseAffineMap::identity(), 2).unwrap(),
        make_gap_filled(&PiecewiseAffineMap::doubling(), &[(0.0, 1.0)], 0.25).unwrap(),
    ];
    for f in &maps {
        let h: Vec<f64> = (1..=7).map(|n| exact_function_distribution(f, n).unwrap().entropy()).collect();
        worst = worst.max(quasi_monotonicity_gap(&h));
    }
    let pass = worst <= 1e-9 && t0.elapsed().as_secs() < 300;
    report(2, pass, &format!("max(|H_n − H_(n−1)| − ln n) = {worst:.3e} over 25 models"), t0);
}

/// Split points `m` with `σ` increasing on both sides.
fn split_count(sigma: &Permutation) -> u64 {
    let e = sigma.entries();
    let inc = |s: &[u32]| s.windows(2).all(|w| w[0] < w[1]);
    (0..=e.len()).filter(|&m| inc(&e[..m]) && inc(&e[m..])).count() as u64
}

#[test]
fn criterion_03_doubling() {
    let t0 = Instant::now();
    let f = PiecewiseAffineMap::doubling();
    let mut mismatches = 0;
    for n in 1..=7 {
        let dist = exact_function_distribution(&f, n).unwrap();
        for s in Permutation::all(n) {
            let want = BigRational::new(split_count(&s).into(), (num_bigint::BigInt::from(1) << n).into());
            if BigRational::from_float(dist.prob(&s)) != Some(want) {
                mismatches += 1;
            }
        }
    }
    let mut sandwich = true;
    let mut h = Vec::new();
    for n in 1..=9 {
        let ex = exact_function_details(&f, n).unwrap();
        let e = ex.entropy();
        let slack = 1e-12 * e.max(1.0);
        sandwich &= ex.mean_log_interleavings <= e + slack && e <= ex.mean_log_interleavings + ex.allocation_entropy + slack;
        h.push(e);
    }
    let per_n: Vec<f64> = h.iter().enumerate().map(|(i, v)| v / (i + 1) as f64).collect();
    let monotone = (4..9).all(|n| per_n[n] >= per_n[n - 1]);
    let h9 = per_n[8];
    let golden = 0.688_150_251_104_663_092_221_012_5;
    let pass = mismatches == 0 && sandwich && monotone && (h9 - golden).abs() < 1e-9;
    report(3, pass, &format!("{mismatches} rational mismatches; sandwich {sandwich}; H_n/n nondecreasing {monotone}; H_9/9 = {h9:.16}"), t0);
}

#[test]
fn criterion_04_decay() {
    let t0 = Instant::now();
    let n_max = 65_536;
    let table = binomial_decay_table(DecayParams::new(0.5, 1).unwrap(), n_max).unwrap();
    let exact_two = table.values[2] == 2.0 / 3.0;

    let tables: Vec<_> = (1..=1000).map(|l| binomial_decay_table(DecayParams::new(0.5, l).unwrap(), 1000).unwrap()).collect();
    let tie_err = (1..=1000)
        .map(|n| (tables.iter().map(|t| t.tied_winner_probability(n).unwrap()).sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);

    let limit_err = (10..=16).map(|m| (table.values[1 << m] - 0.72135).abs()).fold(0.0, f64::max);

    let profile = table_profile(&table.values, 2.0, 10..=15, &uniform_x_grid(256)).unwrap();
    let decreasing = profile.strictly_decreasing();

    let pass = exact_two && tie_err < 1e-10 && limit_err < 2e-3 && decreasing && t0.elapsed().as_secs() < 120;
    report(
        4,
        pass,
        &format!(
            "δ_1(2) = 2/3 {exact_two}; max|Σδ̃ − 1| = {tie_err:.2e}; max|δ_1(2^m) − 0.72135| = {limit_err:.2e}; distances {:?}",
            profile.distances.iter().map(|d| format!("{d:.2e}")).collect::<Vec<_>>()
        ),
        t0,
    );
}

#[test]
fn criterion_05_closed_form_and_shift() {
    let t0 = Instant::now();
    // as stated: l α_l(n)/n = 1
    let mut stated_worst: f64 = 0.0;
    // what the recursion actually gives for n > l: l α_l(n)/n = 2/(l+1)
    let mut derived_worst: f64 = 0.0;
    for l in 1..=20 {
        let t = alpha_uniform_table(2, l, 2000).unwrap();
        for n in l..=2000 {
            let b = t.beta(n).unwrap();
            stated_worst = stated_worst.max((b - 1.0).abs());
            let want = if n == l { 1.0 } else { 2.0 / (l + 1) as f64 };
            derived_worst = derived_worst.max((b - want).abs());
        }
    }
    let mut shift_worst: f64 = 0.0;
    for d in [2usize, 3] {
        for l in 2..=6 {
            let a = alpha_equal_table(d, l, 5000).unwrap();
            let t = binomial_decay_table(DecayParams::new(1.0 / d as f64, l - 1).unwrap(), 4999).unwrap();
            for n in 1..=5000 {
                shift_worst = shift_worst.max((a.beta(n).unwrap() - t.values[n - 1]).abs());
            }
        }
    }
    let pass = stated_worst < 1e-10 && shift_worst < 1e-10;
    report(
        5,
        pass,
        &format!(
            "max|l·α_l(n)/n − 1| = {stated_worst:.3e} (target 1e-10); max|l·α_l(n)/n − 2/(l+1)| for n > l = {derived_worst:.2e}; \
             shift identity max error = {shift_worst:.2e}"
        ),
        t0,
    );
}

#[test]
fn criterion_06_roots() {
    let t0 = Instant::now();
    let r3 = falling_factorial_roots(3).unwrap();
    let ok3 = r3.roots.len() == 2
        && (r3.roots[0] - Complex64::new(3.0, 0.0)).norm() < 1e-10
        && (r3.roots[1] - Complex64::new(-2.0, 0.0)).norm() < 1e-10;
    let r4 = falling_factorial_roots(4).unwrap();
    let w = Complex64::new(-0.5, 23f64.sqrt() / 2.0);
    let ok4 = r4.roots.len() == 3
        && (r4.roots[0] - Complex64::new(4.0, 0.0)).norm() < 1e-10
        && r4.roots[1..].iter().any(|z| (z - w).norm() < 1e-10)
        && r4.roots[1..].iter().any(|z| (z - w.conj()).norm() < 1e-10);
    let mut structure = true;
    let mut residual: f64 = 0.0;
    for d in 2..=8 {
        let r = falling_factorial_roots(d).unwrap();
        let df = d as f64;
        structure &= r.roots.len() == d - 1;
        structure &= r.roots.iter().any(|z| (z - Complex64::new(df, 0.0)).norm() < 1e-10);
        structure &= r.roots.iter().filter(|z| (*z - Complex64::new(df, 0.0)).norm() >= 1e-10).all(|z| z.re < df);
        for i in 0..r.roots.len() {
            for j in 0..i {
                structure &= (r.roots[i] - r.roots[j]).norm() > 1e-8;
            }
        }
        for &x in &r.exponents {
            for l in 1..=3 {
                residual = residual.max(hypergeometric_solution_check(d, l, x, 100).unwrap());
            }
        }
    }
    let pass = ok3 && ok4 && structure && residual < 1e-8;
    report(6, pass, &format!("d=3 {ok3}; d=4 {ok4}; d ≤ 8 structure {structure}; max residual {residual:.2e}"), t0);
}

#[test]
fn criterion_07_pattern_class() {
    let t0 = Instant::now();
    let law = PermutationLaw::uniform(2).unwrap();
    let h = TreeRealizationHandle::new(7, law.clone(), GapMode::UniformGaps);
    let mut rng = StreamRng::new(7, 1);
    let bad = [p("3142"), p("2413")];
    let mut hits = 0u64;
    for _ in 0..100_000 {
        let s = h.sample_pattern_lazy(4, &mut rng).unwrap();
        if bad.contains(&s) {
            hits += 1;
        }
    }

    // the pattern is outside X_Sym(d), and no member up to its length contains it
    let mut disagreements = 0;
    for d in 2..=4 {
        let support: Vec<Permutation> = Permutation::all(d).collect();
        let beta = forbidden_pattern(d);
        if class_membership(&beta, &support) {
            disagreements += 1;
        }
        for s in Permutation::all(2 * d) {
            if class_membership(&s, &support) && contains_pattern(&s, &beta).unwrap() {
                disagreements += 1;
            }
        }
    }

    let model = PermutonModel::Tree(TreeRealizationHandle::new(8, law.clone(), GapMode::Equal));
    let mut rng = StreamRng::new(8, 1);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..1_000_000 {
        for s in model.sample_nested(4, &mut rng).unwrap() {
            seen.insert(s);
        }
    }
    let support = law.support().to_vec();
    let class: Vec<Permutation> = (1..=4).flat_map(Permutation::all).filter(|s| class_membership(s, &support)).collect();
    let missing = class.iter().filter(|s| !seen.contains(*s)).count();

    let pass = hits == 0 && disagreements == 0 && missing == 0 && t0.elapsed().as_secs() < 180;
    report(
        7,
        pass,
        &format!("{hits} forbidden hits; {disagreements} membership disagreements; {missing} of {} class members unseen", class.len()),
        t0,
    );
}

#[test]
fn criterion_08_expected_density() {
    let t0 = Instant::now();
    let law = PermutationLaw::uniform(2).unwrap();
    let half = BigRational::new(1.into(), 2.into());
    let mut exact = true;
    let mut worst_z: f64 = 0.0;
    let samples = 100_000u64;
    for mode in [GapMode::Equal, GapMode::UniformGaps] {
        exact &= expected_pattern_density_exact(&law, &p("21"), mode).unwrap() == half;
        let e = expected_pattern_distribution(&law, mode, 3).unwrap();
        // one fresh realization per sample: frequencies estimate the annealed law
        let mut counts: BTreeMap<Permutation, u64> = BTreeMap::new();
        let mut rng = StreamRng::new(80, 1);
        for i in 0..samples {
            let h = TreeRealizationHandle::new(mix2(80, i), law.clone(), mode);
            *counts.entry(h.sample_pattern_lazy(3, &mut rng).unwrap()).or_insert(0) += 1;
        }
        for s in Permutation::all(3) {
            let q = e.prob(&s);
            let f = *counts.get(&s).unwrap_or(&0) as f64 / samples as f64;
            let sd = (q * (1.0 - q) / samples as f64).sqrt();
            let z = if sd > 0.0 { (f - q).abs() / sd } else if f == 0.0 { 0.0 } else { f64::INFINITY };
            worst_z = worst_z.max(z);
        }
    }
    let dirac = PermutationLaw::dirac(p("12")).unwrap();
    let zero = expected_pattern_density_exact(&dirac, &p("21"), GapMode::UniformGaps).unwrap() == BigRational::from_integer(0.into());
    let pass = exact && worst_z <= 3.0 && zero;
    report(8, pass, &format!("e(21) = 1/2 {exact}; worst |z| over Sym(3) = {worst_z:.2}; Dirac e(21) = 0 {zero}"), t0);
}

#[test]
fn criterion_09_gap_statistics() {
    let t0 = Instant::now();
    let seeds = 100_000u64;
    let law_for = |d: usize| PermutationLaw::uniform(d).unwrap();
    let mut worst_z: f64 = 0.0;
    let mut detail = String::new();
    for d in [2usize, 3, 5] {
        let law = law_for(d);
        let (mut s, mut s2) = (0.0, 0.0);
        for i in 0..seeds {
            let h = TreeRealizationHandle::new(mix2(90 + d as u64, i), law.clone(), GapMode::UniformGaps);
            let l1 = realization_gap_stats(&h, 1).unwrap().squared_sum;
            s += l1;
            s2 += l1 * l1;
        }
        let n = seeds as f64;
        let mean = s / n;
        let se = ((s2 - n * mean * mean) / (n - 1.0) / n).sqrt();
        let z = (mean - 2.0 / (d as f64 + 1.0)).abs() / se;
        worst_z = worst_z.max(z);
        detail.push_str(&format!("d={d}: E L_1 ≈ {mean:.5} (z = {z:.2}); "));
    }
    let a: f64 = 0.05;
    let law = law_for(2);
    let mut below = [0u64; 5];
    for i in 0..seeds {
        let h = TreeRealizationHandle::new(mix2(99, i), law.clone(), GapMode::UniformGaps);
        for (m, c) in below.iter_mut().enumerate() {
            if realization_gap_stats(&h, m + 1).unwrap().min_gap < a.powi(m as i32 + 1) {
                *c += 1;
            }
        }
    }
    let probs: Vec<f64> = below.iter().map(|&c| c as f64 / seeds as f64).collect();
    let decreasing = probs.windows(2).all(|w| w[1] < w[0]);
    detail.push_str(&format!("P(min gap < a^m), m = 1..5: {probs:?}"));
    report(9, worst_z <= 3.0 && decreasing, &detail, t0);
}

#[test]
fn criterion_10_tree_mean_entropy() {
    let t0 = Instant::now();
    let law = PermutationLaw::uniform(2).unwrap();
    let (realizations, samples, n_max) = (200, 200_000, 7);
    let eq = estimate_mean_curve(&law, GapMode::Equal, n_max, realizations, samples, 100, Method::MillerMadow).unwrap();
    let h2 = &eq[1];
    let h2_positive = h2.mean - h2.ci_radius > 0.0;

    let mut rho_ok = true;
    let mut detail = format!("E H_2 = {:.4} ± {:.4}; ", h2.mean, h2.ci_radius);
    let un = estimate_mean_curve(&law, GapMode::UniformGaps, n_max, realizations, samples, 101, Method::MillerMadow).unwrap();
    for (mode, curve) in [(GapMode::Equal, &eq), (GapMode::UniformGaps, &un)] {
        let y: Vec<f64> = curve.iter().map(|r| r.mean).collect();
        let radii: Vec<f64> = curve.iter().map(|r| r.ci_radius).collect();
        let rho = implied_rho(&y, &radii, 2, mode).unwrap();
        let bad = rho.out_of_bounds();
        rho_ok &= bad.is_empty();
        detail.push_str(&format!("{mode:?} ρ̂ {:?} out of bounds at {bad:?}; ", rho.values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>()));
    }

    let per_n: Vec<(f64, f64)> = un.iter().map(|r| (r.mean / r.n as f64, r.ci_radius / r.n as f64)).collect();
    let monotone = (2..n_max).all(|i| per_n[i].0 + per_n[i].1 >= per_n[i - 1].0 - per_n[i - 1].1);
    detail.push_str(&format!("uniform H_n/n {:?}", per_n[1..].iter().map(|(v, _)| format!("{v:.4}")).collect::<Vec<_>>()));

    let pass = h2_positive && rho_ok && monotone && t0.elapsed().as_secs() < 1800;
    report(10, pass, &detail, t0);
}
