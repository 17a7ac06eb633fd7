use draftcause::behavior::Treatment;
use draftcause::estimate::synthetic::{generate, Covariate, EffectShape, SyntheticConfig};
use draftcause::estimate::{estimate, LearnerConfig, MetaLearner};
use draftcause::metrics::Outcome;
use draftcause::trends::{classify_trends, trend_table, Subgrouping, Trend, TrendRules};

#[test]
fn genre_driven_effect_shows_opposite_trends() {
    // tau = -1 for argumentative, +1 for creative.
    let effect = EffectShape::Linear { covariate: Covariate::C1, intercept: -1.0, slope: 2.0 };
    let syn = generate(&SyntheticConfig { n: 2000, seed: 21, effect, ..SyntheticConfig::default() });
    let fit = estimate(&syn.dataset, MetaLearner::X, &LearnerConfig::default()).unwrap();
    assert!(fit.ate.abs() < 0.3, "ate {}", fit.ate);

    let grouping = Subgrouping::from_corpus(&syn.confounders);
    let rules = TrendRules::default();
    let rows = classify_trends(Treatment::T1, Outcome::Y1, &fit.ite, fit.ate, &syn.confounders, &grouping, &rules)
        .unwrap();
    let c1 = |v: &str| rows.iter().find(|r| r.key.confounder == "C1" && r.key.value == v).unwrap().summary;
    let (arg, cre) = (c1("Argumentative"), c1("Creative"));
    assert_eq!(cre.trend, Trend::Up);
    assert_eq!(arg.trend, Trend::Down);
    // Exactly the subgroup whose sign disagrees with the overall ATE is flagged.
    assert_eq!(cre.contradicts_ate, fit.ate < 0.0);
    assert_eq!(arg.contradicts_ate, fit.ate > 0.0);

    let table = trend_table(&rows, &grouping);
    let col = table.header.iter().position(|h| h == "Y1_T1").unwrap();
    let cell = |v: &str| table.rows.iter().find(|r| r[0] == "C1" && r[1] == v).unwrap()[col].clone();
    let star = |contradicts: bool| if contradicts { "*" } else { "" };
    assert_eq!(cell("Creative"), format!("↑{}", star(cre.contradicts_ate)));
    assert_eq!(cell("Argumentative"), format!("↓{}", star(arg.contradicts_ate)));
}

#[test]
fn negating_ites_swaps_trends() {
    let effect = EffectShape::Linear { covariate: Covariate::C1, intercept: -1.0, slope: 2.0 };
    let syn = generate(&SyntheticConfig { n: 600, seed: 4, effect, ..SyntheticConfig::default() });
    let grouping = Subgrouping::from_corpus(&syn.confounders);
    let rules = TrendRules::default();
    let neg: Vec<f64> = syn.true_ite.iter().map(|v| -v).collect();
    let run = |ite: &[f64], ate: f64| {
        classify_trends(Treatment::T2, Outcome::Y3, ite, ate, &syn.confounders, &grouping, &rules).unwrap()
    };
    let a = run(&syn.true_ite, syn.true_ate());
    let b = run(&neg, -syn.true_ate());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.summary.trend.negated(), y.summary.trend, "{:?}", x.key);
        assert_eq!(x.summary.contradicts_ate, y.summary.contradicts_ate);
    }
}
