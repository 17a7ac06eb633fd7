//! Hand-computed metric values on small texts.

use draftcause::metrics::text::words;
use draftcause::metrics::{
    advanced_guiraud, genbit_score, mean_length_tunit, semantic_overlap, Gender, Lexicons,
};

const GUIRAUD_100: &str = include_str!("fixtures/metrics/guiraud_100.txt");
const RARE: [&str; 12] = [
    "quartz", "zephyr", "obsidian", "marmalade", "labyrinth", "xylophone", "archipelago", "juxtapose", "quixotic",
    "nebula", "ephemeral", "sycamore",
];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn guiraud_paragraph_has_100_tokens_and_12_advanced_types() {
    let lex = Lexicons::bundled();
    let toks = words(GUIRAUD_100);
    assert_eq!(toks.len(), 100);
    assert_eq!(toks.iter().filter(|t| RARE.contains(&t.as_str())).count(), 12);
    assert!(close(advanced_guiraud(GUIRAUD_100, &lex), 1.2));
}

#[test]
fn doubling_a_text_divides_guiraud_by_sqrt_two() {
    let lex = Lexicons::bundled();
    let doubled = format!("{GUIRAUD_100} {GUIRAUD_100}");
    assert!(close(advanced_guiraud(&doubled, &lex), 1.2 / 2f64.sqrt()));
}

#[test]
fn guiraud_of_common_words_is_zero() {
    assert_eq!(advanced_guiraud("the cat sat", &Lexicons::bundled()), 0.0);
}

#[test]
fn mean_length_of_tunit_fixtures() {
    let cases = [
        ("The dog barked.", 3.0),
        ("The dog barked and the cat ran.", 3.5),
        ("Stop!", 1.0),
        // 6 words in 2 units, then 2 words in 1 unit.
        ("She sang but he quietly left. It rained.", 8.0 / 3.0),
        // Shared subject: one unit.
        ("I bought bread and milk.", 5.0),
    ];
    for (text, want) in cases {
        assert!(close(mean_length_tunit(text).unwrap(), want), "{text}");
    }
}

#[test]
fn semantic_overlap_fixtures() {
    let lex = Lexicons::bundled();
    let cases = [
        ("Cats purr. Cats purr.", 1.0),
        ("Cats purr. Dogs bark.", 0.0),
        ("The cat slept. The cat ate food.", 0.25),
        // {bird, sing} vs {bird, fly} = 1/3, then {bird, fly} vs {fish, swim} = 0.
        ("Birds sing. Birds fly. Fish swim.", 1.0 / 6.0),
    ];
    for (text, want) in cases {
        assert!(close(semantic_overlap(text, &lex).unwrap(), want), "{text}");
    }
}

#[test]
fn genbit_fixtures() {
    let lex = Lexicons::bundled();
    assert_eq!(lex.gender("king", "king"), Some(Gender::Male));
    assert_eq!(lex.gender("queen", "queen"), Some(Gender::Female));
    let cases = [
        ("The table is red.", 2, 0.0),
        ("he leads. she leads.", 2, 0.0),
        ("he leads. he leads.", 2, 3f64.ln()),
        ("he quartz zebra she", 1, 2f64.ln()),
        ("he quartz zebra she", 2, 0.0),
        // smile: one king, one queen -> 0; laugh: one king -> ln 2.
        ("The king smiled. The king laughed. The queen smiled.", 10, 2f64.ln() / 2.0),
    ];
    for (text, window, want) in cases {
        assert!(close(genbit_score(text, &lex, window), want), "{text}");
    }
}

#[test]
fn metrics_ignore_case_and_outer_whitespace() {
    let lex = Lexicons::bundled();
    let a = "The King smiled. The queen LAUGHED at the quartz.";
    let b = format!("  \n{}\t ", a.to_lowercase());
    assert_eq!(advanced_guiraud(a, &lex), advanced_guiraud(&b, &lex));
    assert_eq!(mean_length_tunit(a).unwrap(), mean_length_tunit(&b).unwrap());
    assert_eq!(semantic_overlap(a, &lex).unwrap(), semantic_overlap(&b, &lex).unwrap());
    assert_eq!(genbit_score(a, &lex, 3), genbit_score(&b, &lex, 3));
}
