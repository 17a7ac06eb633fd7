mod support;

use draftcause::estimate::synthetic::{generate, EffectShape, SyntheticConfig};
use draftcause::estimate::{estimate, LearnerConfig, MetaLearner};
use draftcause::ingest::{Edit, EventSource, Replayer};
use draftcause::metrics::{compute_quality, genbit_score, Lexicons};
use draftcause::refute::{placebo_treatment, RefuteConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &[
    "the", "he", "she", "her", "his", "man", "woman", "king", "queen", "mother", "father", "went", "to", "market",
    "and", "quartz", "nebula", "because", "it", "rained", "sang", "quietly", "labyrinth", "boy", "girl", "ran",
];

fn text() -> impl Strategy<Value = String> {
    let sentence = prop::collection::vec(prop::sample::select(VOCAB), 1..12).prop_map(|w| w.join(" "));
    (prop::collection::vec(sentence, 1..6), prop::sample::select(vec![". ", "! ", "? "]))
        .prop_map(|(s, end)| s.join(end) + end.trim_end())
}

fn mixed_case(s: &str, mask: u64) -> String {
    s.chars()
        .enumerate()
        .map(|(i, c)| if mask >> (i % 64) & 1 == 1 { c.to_ascii_uppercase() } else { c })
        .collect()
}

fn v(s: &[String]) -> Vec<&str> {
    s.iter().map(String::as_str).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_ranges(t in text()) {
        let q = compute_quality(&t, &Lexicons::bundled(), 10).unwrap();
        prop_assert!(q.y1 >= 0.0);
        prop_assert!(q.y2 >= 1.0);
        prop_assert!((0.0..=1.0).contains(&q.y3));
        prop_assert!(q.y4 >= 0.0);
    }

    #[test]
    fn metrics_ignore_case_and_surrounding_whitespace(t in text(), mask in any::<u64>(), pad in "[ \t\n]{0,4}") {
        let lex = Lexicons::bundled();
        let base = compute_quality(&t, &lex, 10).unwrap();
        let noisy = compute_quality(&format!("{pad}{}{pad}", mixed_case(&t, mask)), &lex, 10).unwrap();
        prop_assert_eq!(base, noisy);
    }

    #[test]
    fn metrics_are_deterministic(t in text()) {
        let lex = Lexicons::bundled();
        prop_assert_eq!(compute_quality(&t, &lex, 10).unwrap(), compute_quality(&t, &lex, 10).unwrap());
    }

    #[test]
    fn genbit_is_symmetric_in_the_gender_lists(t in text(), window in 1usize..12) {
        let lex = Lexicons::bundled();
        let a = genbit_score(&t, &lex, window);
        let b = genbit_score(&t, &lex.swapped_genders(), window);
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
    }

    #[test]
    fn d_separation_is_symmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dag = support::random_dag(6, &mut rng);
        let g = dag.to_graph();
        for (x, y, z) in support::all_triples(6).into_iter().step_by(17) {
            let (xn, yn, zn) = (support::names(&x), support::names(&y), support::names(&z));
            prop_assert_eq!(
                g.d_separated(&v(&xn), &v(&yn), &v(&zn)).unwrap(),
                g.d_separated(&v(&yn), &v(&xn), &v(&zn)).unwrap()
            );
        }
    }

    #[test]
    fn replay_is_deterministic(ops in prop::collection::vec((0usize..40, 0usize..4, "[a-z .]{0,5}", any::<bool>()), 1..30)) {
        let play = || {
            let mut r = Replayer::new("seed text");
            for (i, (off, del, ins, api)) in ops.iter().enumerate() {
                let len = r.state().text.chars().count();
                let offset = off % (len + 1);
                let deleted = (*del).min(len - offset);
                let source = if *api { EventSource::Api } else { EventSource::User };
                r.apply_edit(&Edit { offset, inserted: ins.clone(), deleted }, source, i).unwrap();
                assert!(r.state().tiling_holds());
            }
            r.state()
        };
        prop_assert_eq!(play(), play());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn outcome_shift_leaves_ites_unchanged(seed in 0u64..1000, c in -50.0f64..50.0) {
        let data = generate(&SyntheticConfig { n: 300, seed, ..SyntheticConfig::default() }).dataset;
        let shifted = data.with_outcome(data.outcome.iter().map(|y| y + c).collect());
        let cfg = LearnerConfig::default();
        let a = estimate(&data, MetaLearner::X, &cfg).unwrap();
        let b = estimate(&shifted, MetaLearner::X, &cfg).unwrap();
        for (x, y) in a.ite.iter().zip(&b.ite) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        prop_assert_eq!(a.ate, a.ite.iter().sum::<f64>() / a.ite.len() as f64);
    }

    #[test]
    fn placebo_mean_is_within_two_sd_of_zero(seed in 0u64..1000) {
        let data = generate(&SyntheticConfig { n: 300, seed, effect: EffectShape::Constant(1.0), ..SyntheticConfig::default() }).dataset;
        let est = |d: &draftcause::estimate::AnalysisDataset| {
            estimate(d, MetaLearner::X, &LearnerConfig::default()).map(|r| r.ate)
        };
        let ate = est(&data).unwrap();
        let cfg = RefuteConfig { simulations: 50, seed, ..RefuteConfig::default() };
        let r = placebo_treatment(&data, ate, &cfg, est).unwrap();
        prop_assert!(r.mean_effect.abs() <= 2.0 * r.sd_effect, "{} vs sd {}", r.mean_effect, r.sd_effect);
    }
}
