//! One function per subcommand.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use permuton_core::decay::{
    binomial_decay_table, falling_factorial_roots, hypergeometric_solution_check, log_periodic_limit_l, table_profile, uniform_x_grid,
    DecayParams, DEFAULT_HARMONICS,
};
use permuton_core::estimator::{estimate_entropy_curve, estimate_mean_curve, implied_rho, Method, SAMPLING_BUDGET};
use permuton_core::exact::{entropy_curve as exact_curve, EntropyMode};
use permuton_core::io::{csv, fmt_f64};
use permuton_core::models::{box_distance as grid_box_distance, PiecewiseAffineMap};
use permuton_core::tree::{class_membership, forbidden_pattern, GapMode, PermutationLaw};
use permuton_core::perm::contains_pattern;
use permuton_core::{Error, Permutation, PermutonModel, StreamRng};

use crate::output::Run;
use crate::plot::{Chart, Series};
use crate::{Global, Refusal};

/// Largest pattern length estimated without `--allow-biased`.
pub const UNBIASED_N_MAX: usize = 7;
/// Residual above which a hypergeometric check counts as failed.
pub const RESIDUAL_TOL: f64 = 1e-8;

const SAMPLE_STREAM: u64 = 0x5341_4d50;

fn refuse<T>(msg: impl Into<String>) -> Result<T> {
    Err(Refusal(msg.into()).into())
}

fn echo<T: Serialize>(global: &Global, args: &T) -> serde_json::Value {
    let mut v = serde_json::to_value(global).unwrap_or_default();
    if let (Some(g), Ok(serde_json::Value::Object(a))) = (v.as_object_mut(), serde_json::to_value(args)) {
        g.extend(a);
    }
    v
}

/// Builtin name (`lebesgue`, `identity`, `doubling`, `tent`, `times:k`,
/// `block:<perm>`) or a path to a model JSON file.
pub fn resolve_model(spec: &str) -> Result<PermutonModel> {
    let m = match spec {
        "lebesgue" => PermutonModel::Lebesgue,
        "identity" => PermutonModel::function(PiecewiseAffineMap::identity())?,
        "doubling" => PermutonModel::function(PiecewiseAffineMap::doubling())?,
        "tent" => PermutonModel::function(PiecewiseAffineMap::tent())?,
        _ => {
            if let Some(k) = spec.strip_prefix("times:") {
                let k: u32 = k.parse().map_err(|_| Refusal(format!("bad multiplier in {spec:?}")))?;
                if k == 0 {
                    return refuse("multiplier must be positive");
                }
                PermutonModel::function(PiecewiseAffineMap::multiply_mod_one(k))?
            } else if let Some(p) = spec.strip_prefix("block:") {
                PermutonModel::block(p.parse()?)
            } else {
                let path = Path::new(spec);
                if !path.exists() {
                    return refuse(format!("unknown model {spec:?}: not a builtin and no such file"));
                }
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                PermutonModel::from_json(&text)?
            }
        }
    };
    Ok(m)
}

fn parse_method(s: Option<&str>) -> Result<Method> {
    Ok(s.unwrap_or("miller_madow").parse()?)
}

fn parse_gap_mode(s: Option<&str>) -> Result<GapMode> {
    match s.unwrap_or("equal") {
        "equal" => Ok(GapMode::Equal),
        "uniform" | "uniform_gaps" | "uniform-gaps" => Ok(GapMode::UniformGaps),
        other => refuse(format!("unknown gap mode {other:?} (equal | uniform)")),
    }
}

/// `uniform`, `dirac:<perm>` or a path to a law JSON file.
fn resolve_law(spec: &str, d: usize) -> Result<PermutationLaw> {
    if spec == "uniform" {
        return Ok(PermutationLaw::uniform(d)?);
    }
    if let Some(p) = spec.strip_prefix("dirac:") {
        return Ok(PermutationLaw::dirac(p.parse()?)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return refuse(format!("unknown law {spec:?}: expected uniform, dirac:<perm> or a JSON file"));
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(Error::from)?)
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct EntropyCurveArgs {
    /// Builtin model name or model JSON file.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Exact computation (the default unless --samples is given).
    #[arg(long)]
    pub exact: bool,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<u64>,
    /// plugin | miller_madow
    #[arg(long)]
    pub method: Option<String>,
}

pub fn entropy_curve(global: &Global, a: EntropyCurveArgs) -> Result<()> {
    let spec = match &a.model {
        Some(m) => m.clone(),
        None => return refuse("entropy-curve needs --model"),
    };
    let model = resolve_model(&spec)?;
    let n_max = a.n_max.unwrap_or(7);
    if n_max == 0 {
        return refuse("--n-max must be at least 1");
    }
    let mut run = Run::start(&global.out_dir(), "entropy-curve", echo(global, &a))?;
    let values: Vec<f64>;
    match a.samples {
        Some(_) if a.exact => return refuse("--exact and --samples are mutually exclusive"),
        None => {
            let curve = exact_curve(&model, n_max, EntropyMode::Exact)?;
            values = curve.values();
            run.write("entropy_curve.csv", &curve.to_csv())?;
        }
        Some(samples) => {
            let seed = global.require_seed()?;
            if n_max > UNBIASED_N_MAX && !global.allow_biased {
                return refuse(format!(
                    "estimates beyond n = {UNBIASED_N_MAX} are dominated by bias (n! ≫ N); pass --allow-biased to proceed"
                ));
            }
            let method = parse_method(a.method.as_deref())?;
            let est = estimate_entropy_curve(&model, n_max, samples, seed, method)?;
            let rows: Vec<Vec<String>> = est
                .iter()
                .map(|e| {
                    let n = e.n as f64;
                    let nlogn = if e.n > 1 { e.value / (n * n.ln()) } else { 0.0 };
                    vec![
                        e.n.to_string(),
                        fmt_f64(e.value),
                        fmt_f64(e.value / n),
                        fmt_f64(nlogn),
                        e.stderr.map(fmt_f64).unwrap_or_default(),
                        e.distinct_patterns.to_string(),
                        fmt_f64(e.saturation()),
                    ]
                })
                .collect();
            for e in &est {
                eprintln!("n = {}: {} distinct patterns in {} samples (saturation {:.3})", e.n, e.distinct_patterns, e.sample_count, e.saturation());
            }
            values = est.iter().map(|e| e.value).collect();
            run.write(
                "entropy_curve.csv",
                &csv(&["n", "H", "H_per_n", "H_per_nlogn", "stderr", "distinct_patterns", "saturation"], &rows),
            )?;
        }
    }
    if global.plot {
        let xs: Vec<f64> = (1..=values.len()).map(|n| n as f64).collect();
        let per_n: Vec<f64> = values.iter().zip(&xs).map(|(h, n)| h / n).collect();
        let per_nlogn: Vec<f64> = values.iter().zip(&xs).map(|(h, n)| if *n > 1.0 { h / (n * n.ln()) } else { f64::NAN }).collect();
        let mut references = vec![("1 (superlinear scale)".to_string(), 1.0)];
        if let PermutonModel::Function(f) = &model {
            references.push(("∫ log|f′|".to_string(), f.integral_log_abs_slope()));
        }
        let chart = Chart {
            title: format!("Sampling entropy of {spec}"),
            x_label: "n".into(),
            y_label: "normalized H_n (nats)".into(),
            series: vec![
                Series { name: "H_n / n".into(), xs: xs.clone(), ys: per_n },
                Series { name: "H_n / (n log n)".into(), xs, ys: per_nlogn },
            ],
            references,
        };
        run.write("entropy_curve.svg", &chart.to_svg())?;
    }
    run.finish()?;
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct TreeArgs {
    /// Arity.
    #[arg(long)]
    pub d: Option<usize>,
    /// uniform | dirac:<perm> | law JSON file
    #[arg(long)]
    pub law: Option<String>,
    /// equal | uniform
    #[arg(long)]
    pub gap_mode: Option<String>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Samples per realization.
    #[arg(long)]
    pub samples: Option<u64>,
    /// plugin | miller_madow
    #[arg(long)]
    pub method: Option<String>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, f) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

pub fn tree_experiment(global: &Global, a: TreeArgs) -> Result<()> {
    let seed = global.require_seed()?;
    let d = a.d.unwrap_or(2);
    let law = resolve_law(a.law.as_deref().unwrap_or("uniform"), d)?;
    let d = law.d();
    let mode = parse_gap_mode(a.gap_mode.as_deref())?;
    let n_max = a.n_max.unwrap_or(7);
    let realizations = a.realizations.unwrap_or(50);
    let samples = a.samples.unwrap_or(100_000);
    let method = parse_method(a.method.as_deref())?;
    if n_max > UNBIASED_N_MAX && !global.allow_biased {
        return refuse(format!("estimates beyond n = {UNBIASED_N_MAX} are dominated by bias; pass --allow-biased to proceed"));
    }
    let work = (n_max as u128) * (realizations as u128) * (samples as u128);
    if work > SAMPLING_BUDGET as u128 {
        let fit_samples = SAMPLING_BUDGET as u128 / (n_max as u128 * realizations.max(1) as u128);
        let fit_real = SAMPLING_BUDGET as u128 / (n_max as u128 * samples.max(1) as u128);
        return refuse(format!(
            "sampling work n_max·realizations·samples = {work} exceeds the budget {SAMPLING_BUDGET}; \
             try --samples {fit_samples} or --realizations {fit_real}"
        ));
    }
    let mut run = Run::start(&global.out_dir(), "tree-experiment", echo(global, &a))?;
    let curve = estimate_mean_curve(&law, mode, n_max, realizations, samples, seed, method)?;

    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|r| {
            let n = r.n as f64;
            vec![
                r.n.to_string(),
                fmt_f64(r.mean),
                fmt_f64(r.ci_radius),
                fmt_f64(r.mean / n),
                fmt_f64(r.ci_radius / n),
                fmt_f64(r.spread_per_n),
                r.realization_count.to_string(),
            ]
        })
        .collect();
    run.write("mean_entropy.csv", &csv(&["n", "mean_H", "ci_radius", "mean_H_per_n", "ci_per_n", "spread_per_n", "realizations"], &rows))?;

    let y: Vec<f64> = curve.iter().map(|r| r.mean).collect();
    let radii: Vec<f64> = curve.iter().map(|r| r.ci_radius).collect();
    let rho = implied_rho(&y, &radii, d, mode)?;
    let bad = rho.out_of_bounds();
    let rows: Vec<Vec<String>> = (2..=rho.max_n())
        .map(|n| {
            vec![
                n.to_string(),
                fmt_f64(rho.rho(n)),
                fmt_f64(rho.radii[n - 2]),
                fmt_f64(rho.upper_bound(n)),
                (!bad.contains(&n)).to_string(),
            ]
        })
        .collect();
    run.write("implied_rho.csv", &csv(&["n", "rho", "radius", "upper_bound", "within_bounds"], &rows))?;

    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|r| {
            let mut v: Vec<f64> = r.per_realization.iter().map(|h| h / r.n as f64).collect();
            v.sort_by(f64::total_cmp);
            let mut row = vec![r.n.to_string()];
            row.extend([0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&q| fmt_f64(quantile(&v, q))));
            row.push(fmt_f64(r.spread_per_n));
            row
        })
        .collect();
    run.write("concentration.csv", &csv(&["n", "min_per_n", "q25_per_n", "median_per_n", "q75_per_n", "max_per_n", "spread_per_n"], &rows))?;

    if global.plot {
        let xs: Vec<f64> = curve.iter().map(|r| r.n as f64).collect();
        let mean: Vec<f64> = curve.iter().map(|r| r.mean / r.n as f64).collect();
        let lo: Vec<f64> = curve.iter().map(|r| (r.mean - r.ci_radius) / r.n as f64).collect();
        let hi: Vec<f64> = curve.iter().map(|r| (r.mean + r.ci_radius) / r.n as f64).collect();
        let chart = Chart {
            title: format!("Mean entropy, d = {d}, {mode:?} gaps"),
            x_label: "n".into(),
            y_label: "E H_n / n (nats)".into(),
            series: vec![
                Series { name: "mean".into(), xs: xs.clone(), ys: mean },
                Series { name: "95% CI low".into(), xs: xs.clone(), ys: lo },
                Series { name: "95% CI high".into(), xs, ys: hi },
            ],
            references: vec![],
        };
        run.write("mean_entropy.svg", &chart.to_svg())?;
    }
    run.finish()?;
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct DecayArgs {
    /// Success probability q in (0, 1).
    #[arg(long)]
    pub q: Option<f64>,
    /// Level l ≥ 1.
    #[arg(long)]
    pub l: Option<usize>,
    /// Table length N.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub harmonics: Option<usize>,
    #[arg(long)]
    pub m_min: Option<i32>,
    #[arg(long)]
    pub m_max: Option<i32>,
    /// Points of the x grid on [0, 1).
    #[arg(long)]
    pub grid: Option<usize>,
}

pub fn decay(global: &Global, a: DecayArgs) -> Result<()> {
    let params = DecayParams::new(a.q.unwrap_or(0.5), a.l.unwrap_or(1))?;
    let n_max = a.n.unwrap_or(65_536);
    let table = binomial_decay_table(params, n_max)?;
    let limit = log_periodic_limit_l(params, a.harmonics.unwrap_or(DEFAULT_HARMONICS))?;
    let eta = 1.0 / params.q;
    // η^{x+m} < η^{m+1} ≤ N
    let top = ((n_max as f64).ln() / eta.ln()).floor() as i32 - 1;
    let m_max = a.m_max.unwrap_or(top);
    let m_min = a.m_min.unwrap_or((m_max - 5).max(1));
    if m_min > m_max {
        return refuse(format!("empty profile range m = {m_min}..={m_max}; increase --n"));
    }
    let grid = uniform_x_grid(a.grid.unwrap_or(256).max(1));
    let profile = table_profile(&table.values, eta, m_min..=m_max, &grid)?;

    let mut run = Run::start(&global.out_dir(), "decay", echo(global, &a))?;
    let rows: Vec<Vec<String>> = table
        .values
        .iter()
        .enumerate()
        .map(|(n, &v)| vec![n.to_string(), fmt_f64(v), fmt_f64(table.tied_winner_probability(n).unwrap_or(f64::NAN))])
        .collect();
    run.write("decay_table.csv", &csv(&["n", "delta", "tied_winner"], &rows))?;

    run.write("profile.csv", &profile.to_csv())?;
    let dist_rows: Vec<Vec<String>> = profile.m_values.iter().zip(&profile.distances).map(|(m, d)| vec![m.to_string(), fmt_f64(*d)]).collect();
    run.write("profile_distances.csv", &csv(&["m", "sup_distance_to_next"], &dist_rows))?;

    let osc = limit.oscillation_amplitude(grid.len());
    let fourier = json!({ "limit": limit, "mean": limit.mean(), "oscillation": osc });
    run.write("fourier.json", &serde_json::to_string_pretty(&fourier)?)?;
    run.error_bound("decay_window", table.window_error);
    run.error_bound("fourier_tail", limit.tail_bound);

    if global.plot {
        let mut series: Vec<Series> = profile
            .m_values
            .iter()
            .zip(&profile.rows)
            .map(|(m, row)| Series { name: format!("δ_l(⌊η^(x+{m})⌋)"), xs: grid.clone(), ys: row.clone() })
            .collect();
        series.push(Series { name: "L_l(x)".into(), xs: grid.clone(), ys: grid.iter().map(|&x| limit.eval(x)).collect() });
        let chart = Chart {
            title: format!("Binomial decay, q = {}, l = {}", params.q, params.l),
            x_label: "x".into(),
            y_label: "probability".into(),
            series,
            references: vec![],
        };
        run.write("decay.svg", &chart.to_svg())?;
    }
    run.finish()?;
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct RootsArgs {
    /// Single arity (overrides the range).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub d_min: Option<usize>,
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Starting level of the hypergeometric candidates.
    #[arg(long)]
    pub l: Option<usize>,
    #[arg(long)]
    pub n_max: Option<usize>,
}

pub fn roots(global: &Global, a: RootsArgs) -> Result<()> {
    let (lo, hi) = match a.d {
        Some(d) => (d, d),
        None => (a.d_min.unwrap_or(2), a.d_max.unwrap_or(8)),
    };
    if lo < 2 || lo > hi {
        return refuse(format!("bad arity range {lo}..={hi}"));
    }
    let l = a.l.unwrap_or(1);
    let n_max = a.n_max.unwrap_or(100);
    let mut run = Run::start(&global.out_dir(), "roots", echo(global, &a))?;
    let mut entries = Vec::new();
    let mut worst: f64 = 0.0;
    for d in lo..=hi {
        let r = falling_factorial_roots(d)?;
        let residuals = r.exponents.iter().map(|&x| hypergeometric_solution_check(d, l, x, n_max)).collect::<permuton_core::Result<Vec<f64>>>()?;
        worst = residuals.iter().copied().fold(worst, f64::max);
        entries.push(json!({
            "d": d,
            "roots": r.roots.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "exponents": r.exponents.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "residuals": residuals,
        }));
    }
    run.write("roots.json", &serde_json::to_string_pretty(&json!({ "l": l, "n_max": n_max, "arities": entries }))?)?;
    run.error_bound("max_residual", worst);
    run.finish()?;
    if worst >= RESIDUAL_TOL {
        return Err(Error::Numerical(format!("hypergeometric residual {worst:.3e} ≥ {RESIDUAL_TOL:e}")).into());
    }
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// Pattern length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of patterns.
    #[arg(long)]
    pub count: Option<u64>,
}

pub fn sample(global: &Global, a: SampleArgs) -> Result<()> {
    let seed = global.require_seed()?;
    let Some(spec) = a.model.clone() else {
        return refuse("sample needs --model");
    };
    let model = resolve_model(&spec)?;
    let n = a.n.unwrap_or(5);
    let count = a.count.unwrap_or(10);
    let mut rng = StreamRng::new(seed, SAMPLE_STREAM);
    let mut rows = Vec::with_capacity(count as usize);
    for i in 0..count {
        rows.push(vec![i.to_string(), model.sample_pattern(n, &mut rng)?.one_line()]);
    }
    let mut run = Run::start(&global.out_dir(), "sample", echo(global, &a))?;
    run.write("samples.csv", &csv(&["index", "pattern"], &rows))?;
    run.finish()?;
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct BoxDistanceArgs {
    #[arg(long)]
    pub model_a: Option<String>,
    #[arg(long)]
    pub model_b: Option<String>,
    /// Grid resolution g.
    #[arg(long)]
    pub grid: Option<usize>,
}

pub fn box_distance(global: &Global, a: BoxDistanceArgs) -> Result<()> {
    let (Some(sa), Some(sb)) = (a.model_a.clone(), a.model_b.clone()) else {
        return refuse("box-distance needs --model-a and --model-b");
    };
    let g = a.grid.unwrap_or(64);
    let value = grid_box_distance(&resolve_model(&sa)?, &resolve_model(&sb)?, g)?;
    let mut run = Run::start(&global.out_dir(), "box-distance", echo(global, &a))?;
    let out = json!({ "model_a": sa, "model_b": sb, "grid": g, "lower_bound": value, "upper_bound": value + 4.0 / g as f64 });
    run.write("box_distance.json", &serde_json::to_string_pretty(&out)?)?;
    run.finish()?;
    Ok(())
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
pub struct ClassCheckArgs {
    /// Generators (repeatable); default Sym(d).
    #[arg(long = "perm")]
    pub perms: Vec<String>,
    /// Arity for the default generator set Sym(d).
    #[arg(long)]
    pub d: Option<usize>,
    /// Permutations to test (repeatable).
    #[arg(long)]
    pub sigma: Vec<String>,
    /// Test every permutation of this length instead.
    #[arg(long)]
    pub length: Option<usize>,
}

pub fn class_check(global: &Global, a: ClassCheckArgs) -> Result<()> {
    let full_sym = a.perms.is_empty();
    let d = a.d.unwrap_or(2);
    let pi_set: Vec<Permutation> = if full_sym {
        if d < 2 || d > 8 {
            return refuse("--d must lie in 2..=8");
        }
        Permutation::all(d).collect()
    } else {
        a.perms.iter().map(|s| s.parse()).collect::<permuton_core::Result<_>>()?
    };
    let sigmas: Vec<Permutation> = if a.sigma.is_empty() {
        let k = a.length.unwrap_or(4);
        if k == 0 || k > 9 {
            return refuse("--length must lie in 1..=9");
        }
        Permutation::all(k).collect()
    } else {
        a.sigma.iter().map(|s| s.parse()).collect::<permuton_core::Result<_>>()?
    };
    let beta = full_sym.then(|| forbidden_pattern(d));
    let mut rows = Vec::with_capacity(sigmas.len());
    for s in &sigmas {
        let mut row = vec![s.one_line(), class_membership(s, &pi_set).to_string()];
        if let Some(b) = &beta {
            row.push(if s.len() <= permuton_core::perm::CONTAINMENT_CAP { contains_pattern(s, b)?.to_string() } else { String::new() });
        }
        rows.push(row);
    }
    let header: &[&str] = if beta.is_some() { &["sigma", "member", "contains_forbidden"] } else { &["sigma", "member"] };
    let mut run = Run::start(&global.out_dir(), "class-check", echo(global, &a))?;
    run.write("class_check.csv", &csv(header, &rows))?;
    run.finish()?;
    Ok(())
}
