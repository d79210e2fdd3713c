use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vmifs::baselines::{baseline_score, baseline_select, BaselineKind, MiCache};
use vmifs::data::{enumerate_joint, random_naive_bayes_spec, Column};
use vmifs::estimators::{fit_pairwise_cond_pmf, joint_mi_exact, mi_plugin};
use vmifs::numeric::log_sum_exp;
use vmifs::vmi::init_state;
use vmifs::{select, Dataset, QDistKind, VmiConfig};

const EXACT: VmiConfig = VmiConfig { alpha: 0.0 };

/// Binary-label categorical data where every feature is noisy evidence of
/// the label.
fn dataset() -> impl Strategy<Value = Dataset> {
    (8usize..40, 2usize..5).prop_flat_map(|(n, d)| {
        (
            proptest::collection::vec(0u32..2, n),
            proptest::collection::vec((proptest::collection::vec(0u32..3, n), proptest::collection::vec(any::<bool>(), n)), d),
        )
            .prop_map(|(y, cols)| {
                let cols = cols
                    .into_iter()
                    .map(|(noise, keep)| {
                        let codes = y.iter().zip(noise).zip(keep).map(|((&c, z), k)| if k { c } else { z }).collect();
                        (codes, 3)
                    })
                    .collect();
                Dataset::from_codes(cols, y, 2).unwrap()
            })
    })
}

fn kind() -> impl Strategy<Value = QDistKind> {
    prop_oneof![Just(QDistKind::Naive), Just(QDistKind::Pairwise)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bound_never_exceeds_empirical_mi(ds in dataset(), kind in kind()) {
        let mut state = init_state(&ds, kind, EXACT).unwrap();
        while !state.candidates().is_empty() {
            state.step().unwrap();
            let exact = joint_mi_exact(&ds, state.conditioning()).unwrap();
            prop_assert!(state.lb_estimate() <= exact + 1e-10);
        }
    }

    #[test]
    fn first_step_equals_plugin_mi(ds in dataset(), kind in kind()) {
        let state = init_state(&ds, kind, EXACT).unwrap();
        for i in 0..ds.n_features() {
            prop_assert!((state.score_candidate(i).unwrap() - mi_plugin(&ds, i, 0.0).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn posterior_is_normalized(ds in dataset(), kind in kind(), steps in 0usize..3) {
        let mut state = init_state(&ds, kind, VmiConfig::default()).unwrap();
        for _ in 0..steps.min(ds.n_features() - 1) {
            state.step().unwrap();
        }
        let l = ds.n_classes();
        for i in state.candidates() {
            let c = state.log_c(i).unwrap();
            for k in 0..ds.n_samples() {
                let joint: Vec<f64> = (0..l).map(|y| state.log_prior()[y] + state.log_q()[k * l + y] + c[k * l + y]).collect();
                let z = log_sum_exp(joint.iter().copied());
                prop_assert!(z.is_finite());
                let total: f64 = joint.iter().map(|v| (v - z).exp()).sum();
                prop_assert!((total - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn selection_is_deterministic_and_a_permutation(ds in dataset(), kind in kind()) {
        let a = select(&ds, kind, ds.n_features(), VmiConfig::default()).unwrap();
        let b = select(&ds, kind, ds.n_features(), VmiConfig::default()).unwrap();
        prop_assert_eq!(&a.ranked, &b.ranked);
        prop_assert_eq!(&a.scores, &b.scores);
        let mut r = a.ranked.clone();
        r.sort_unstable();
        prop_assert_eq!(r, (0..ds.n_features()).collect::<Vec<_>>());
        prop_assert!(a.scores.iter().all(|s| s.is_finite()));
    }

    #[test]
    fn class_relabeling_leaves_selection_unchanged(ds in dataset(), kind in kind()) {
        let swapped = ds.permute_classes(&[1, 0]).unwrap();
        let a = select(&ds, kind, ds.n_features(), EXACT).unwrap();
        let b = select(&swapped, kind, ds.n_features(), EXACT).unwrap();
        prop_assert_eq!(&a.ranked, &b.ranked);
        prop_assert_eq!(&a.restarts, &b.restarts);
        for (x, y) in a.scores.iter().zip(&b.scores) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn worker_count_does_not_change_results(ds in dataset(), kind in kind()) {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
                .install(|| select(&ds, kind, ds.n_features(), VmiConfig::default()).unwrap())
        };
        let (one, many) = (run(1), run(4));
        prop_assert_eq!(one.ranked, many.ranked);
        prop_assert_eq!(one.scores, many.scores);
    }

    #[test]
    fn baselines_agree_with_mim_first(ds in dataset()) {
        let mim = baseline_select(BaselineKind::Mim, &ds, 1).unwrap();
        for kind in BaselineKind::ALL {
            prop_assert_eq!(&baseline_select(kind, &ds, 1).unwrap().ranked, &mim.ranked);
        }
    }

    #[test]
    fn exact_greedy_objective_is_nondecreasing(ds in dataset()) {
        let r = baseline_select(BaselineKind::ExactGreedy, &ds, ds.n_features()).unwrap();
        for w in r.scores.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn baseline_scores_invariant_to_class_relabeling(ds in dataset()) {
        let swapped = ds.permute_classes(&[1, 0]).unwrap();
        let (c1, c2) = (MiCache::new(&ds), MiCache::new(&swapped));
        let s = [0];
        for kind in BaselineKind::ALL {
            for i in 1..ds.n_features() {
                let a = baseline_score(kind, &ds, &s, i, &c1).unwrap();
                let b = baseline_score(kind, &swapped, &s, i, &c2).unwrap();
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn naive_scores_ignore_value_coding_of_conditioned_feature(ds in dataset(), shift in 1u32..3) {
        // Recoding the conditioned column permutes its class tables without
        // changing them as a multiset, so no Naive-kind score moves.
        let recoded = recode(&ds, 0, shift);
        let mut a = init_state(&ds, QDistKind::Naive, VmiConfig::default()).unwrap();
        let mut b = init_state(&recoded, QDistKind::Naive, VmiConfig::default()).unwrap();
        a.force_select(0).unwrap();
        b.force_select(0).unwrap();
        prop_assert!((a.lb_current() - b.lb_current()).abs() < 1e-12);
        for i in 1..ds.n_features() {
            prop_assert!((a.score_candidate(i).unwrap() - b.score_candidate(i).unwrap()).abs() < 1e-12);
        }
    }
}

fn recode(ds: &Dataset, feature: usize, shift: u32) -> Dataset {
    let card = ds.column(feature).cardinality().unwrap();
    let codes = ds.codes(feature).unwrap().iter().map(|&v| (v + shift) % card as u32).collect();
    let mut cols: Vec<Column> = ds.columns().to_vec();
    cols[feature] = Column::categorical(codes, card);
    Dataset::new(cols, ds.labels().to_vec(), ds.n_classes(), ds.feature_names().to_vec()).unwrap()
}

#[test]
fn pairwise_updates_are_exact_on_naive_bayes_joints() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let ds = enumerate_joint(&random_naive_bayes_spec(&mut rng, 4, 2..=3)).unwrap();
        let base = init_state(&ds, QDistKind::Pairwise, EXACT).unwrap();
        let mut state = base.clone();
        for f in 0..3 {
            state.force_select(f).unwrap();
            for i in state.candidates() {
                let (now, before) = (state.log_c(i).unwrap(), base.log_c(i).unwrap());
                for (a, b) in now.iter().zip(before) {
                    assert!(a == b || (a - b).abs() < 1e-10, "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn pairwise_table_equals_class_table_under_conditional_independence() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let ds = enumerate_joint(&random_naive_bayes_spec(&mut rng, 2, 2..=3)).unwrap();
    let pair = fit_pairwise_cond_pmf(&ds, 0, 1, 0.0).unwrap();
    let single = vmifs::estimators::fit_cond_pmf(&ds, 0, 0.0).unwrap();
    let (ci, cj) = pair.cardinalities();
    for c in 0..2 {
        for u in 0..cj as u32 {
            for v in 0..ci as u32 {
                assert!((pair.prob(v, u, c) - single.prob(v, c)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn irrelevant_feature_is_neutral_under_naive_kind() {
    // x2 is independent of the label and of x0, x1 in the enumerated joint.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut spec = random_naive_bayes_spec(&mut rng, 3, 2..=3);
    let flat = spec.nodes[2].cpt[0].clone();
    spec.nodes[2].cpt[1] = flat;
    let ds = enumerate_joint(&spec).unwrap();
    let mut state = init_state(&ds, QDistKind::Naive, EXACT).unwrap();
    assert!(state.score_candidate(2).unwrap().abs() < 1e-10);
    for f in 0..2 {
        state.force_select(f).unwrap();
        assert!((state.score_candidate(2).unwrap() - state.lb_current()).abs() < 1e-10);
    }
}

#[test]
fn exact_greedy_matches_naive_vmi_on_naive_bayes_joints() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..25 {
        let ds = enumerate_joint(&random_naive_bayes_spec(&mut rng, 4, 2..=3)).unwrap();
        let exact = baseline_select(BaselineKind::ExactGreedy, &ds, 4).unwrap();
        let mut state = init_state(&ds, QDistKind::Naive, EXACT).unwrap();
        for (&f, &s) in exact.ranked.iter().zip(&exact.scores) {
            let scores = state.score_all();
            let best = scores.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            assert!((best - s).abs() < 1e-10);
            assert!((state.score_candidate(f).unwrap() - s).abs() < 1e-10);
            state.force_select(f).unwrap();
        }
    }
}

#[test]
fn cmim_defers_duplicates() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let ds = vmifs::verify::random_categorical_dataset(&mut rng, 200, 4, 3).unwrap();
    let copy = ds.column(0).clone();
    let ds = ds.with_column(copy, "dup0").unwrap();
    let r = baseline_select(BaselineKind::Cmim, &ds, 5).unwrap();
    let pos_orig = r.ranked.iter().position(|&f| f == 0).unwrap();
    let pos_dup = r.ranked.iter().position(|&f| f == 4).unwrap();
    assert!(pos_orig.max(pos_dup) == 4, "{:?}", r.ranked);
}
