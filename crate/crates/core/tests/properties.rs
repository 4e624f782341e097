use proptest::prelude::*;

use permuton_core::decay::{alpha_equal_table, binomial_decay_table, DecayParams};
use permuton_core::exact::{exact_block_distribution, exact_distribution};
use permuton_core::models::BlockPermuton;
use permuton_core::perm::{count_pattern, pattern_density, substitute};
use permuton_core::tree::{class_membership, GapMode, PermutationLaw, TreeRealizationHandle};
use permuton_core::{quasi_monotonicity_gap, Permutation, PermutonModel, StreamRng};

fn perm(max_len: usize) -> impl Strategy<Value = Permutation> {
    (1..=max_len).prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle()).prop_map(|v| Permutation::new(v).unwrap())
}

fn block_model(max_len: usize) -> impl Strategy<Value = BlockPermuton> {
    perm(max_len).prop_flat_map(|pi| {
        let k = pi.len();
        (Just(pi), prop::collection::vec(0.05f64..1.0, k))
    })
    .prop_map(|(pi, w)| {
        let s: f64 = w.iter().sum();
        BlockPermuton::new(pi, w.iter().map(|x| x / s).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_round_trips(p in perm(10)) {
        prop_assert_eq!(Permutation::unrank(p.len(), p.rank()).unwrap(), p);
    }

    #[test]
    fn symmetries_are_involutions(p in perm(12)) {
        prop_assert_eq!(p.inverse().inverse(), p.clone());
        prop_assert_eq!(p.reverse().reverse(), p.clone());
        prop_assert_eq!(p.complement().complement(), p);
    }

    #[test]
    fn densities_of_all_patterns_sum_to_one(p in perm(8), k in 1usize..4) {
        prop_assume!(k <= p.len());
        let s: f64 = Permutation::all(k).map(|s| pattern_density(&p, &s).unwrap()).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inflation_counts_multiply(s in perm(4), a in perm(3), b in perm(3)) {
        // every copy of σ picks one entry per block
        let blocks: Vec<Permutation> = (0..s.len()).map(|i| if i % 2 == 0 { a.clone() } else { b.clone() }).collect();
        let big = substitute(&s, &blocks).unwrap();
        let expect: u64 = blocks.iter().map(|x| x.len() as u64).product();
        prop_assert!(count_pattern(&big, &s).unwrap() >= expect);
    }

    #[test]
    fn block_laws_are_distributions_and_quasi_monotone(b in block_model(4)) {
        let mut h = Vec::new();
        for n in 1..=5 {
            let d = exact_block_distribution(b.pi(), b.weights(), n).unwrap();
            let s: f64 = d.probs().values().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let e = d.entropy();
            prop_assert!(e >= -1e-15);
            prop_assert!(e <= permuton_core::combinatorics::ln_factorial(n as u64) + 1e-12);
            h.push(e);
        }
        prop_assert!(quasi_monotonicity_gap(&h) <= 1e-9);
    }

    #[test]
    fn exact_laws_are_relabeling_invariant(b in block_model(4)) {
        // reversing the block permutation reverses every pattern
        let rev = BlockPermuton::new(b.pi().reverse(), b.weights().iter().rev().copied().collect()).unwrap();
        let d1 = exact_distribution(&PermutonModel::Block(b), 4).unwrap();
        let d2 = exact_distribution(&PermutonModel::Block(rev), 4).unwrap();
        prop_assert!(d1.map_patterns(|s| s.reverse()).max_abs_diff(&d2) < 1e-12);
    }

    #[test]
    fn tree_samples_stay_in_the_class(seed in any::<u64>(), n in 1usize..9, uniform in any::<bool>()) {
        let law = PermutationLaw::uniform(2).unwrap();
        let mode = if uniform { GapMode::UniformGaps } else { GapMode::Equal };
        let h = TreeRealizationHandle::new(seed, law.clone(), mode);
        let mut rng = StreamRng::new(seed, 1);
        let s = h.sample_pattern_lazy(n, &mut rng).unwrap();
        prop_assert_eq!(s.len(), n);
        prop_assert!(class_membership(&s, law.support()));
    }

    #[test]
    fn nested_samples_are_prefix_patterns(seed in any::<u64>(), n in 2usize..8) {
        let model = PermutonModel::block(Permutation::new(vec![2, 4, 1, 3]).unwrap());
        let mut rng = StreamRng::new(seed, 2);
        let nest = model.sample_nested(n, &mut rng).unwrap();
        prop_assert_eq!(nest.len(), n);
        for (k, p) in nest.iter().enumerate() {
            prop_assert_eq!(p.len(), k + 1);
            if k > 0 {
                prop_assert!(permuton_core::perm::contains_pattern(p, &nest[k - 1]).unwrap());
            }
        }
    }

    #[test]
    fn decay_values_are_probabilities(q in 0.05f64..0.95, l in 1usize..6) {
        let t = binomial_decay_table(DecayParams::new(q, l).unwrap(), 400).unwrap();
        prop_assert!(t.values.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
        prop_assert_eq!(t.values[l], 1.0);
    }

    #[test]
    fn shift_identity(d in 2usize..6, l in 2usize..8) {
        let a = alpha_equal_table(d, l, 600).unwrap();
        let t = binomial_decay_table(DecayParams::new(1.0 / d as f64, l - 1).unwrap(), 599).unwrap();
        for n in 1..=600 {
            prop_assert!((a.beta(n).unwrap() - t.values[n - 1]).abs() < 1e-11);
        }
    }
}
