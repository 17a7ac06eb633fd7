//! Essay quality outcomes Y1..Y4 computed from final document text.

mod lexicon;
pub mod text;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use lexicon::{Gender, Lexicons, DEFAULT_COMMON_TOP_K};
use text::{lemmatize, sentences, words};

/// Default co-occurrence radius (in tokens) for the gender-bias score.
pub const DEFAULT_GENBIT_WINDOW: usize = 10;
const GENBIT_SMOOTHING: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{0} is undefined for text without words")]
    UndefinedMetric(&'static str),
    #[error("lexicon: {0}")]
    Lexicon(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityVector {
    /// Advanced Guiraud.
    pub y1: f64,
    /// Mean length of T-unit.
    pub y2: f64,
    /// Adjacent-sentence semantic overlap.
    pub y3: f64,
    /// Gender-bias score.
    pub y4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Outcome {
    Y1,
    Y2,
    Y3,
    Y4,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [Outcome::Y1, Outcome::Y2, Outcome::Y3, Outcome::Y4];

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Y1 => "Y1",
            Outcome::Y2 => "Y2",
            Outcome::Y3 => "Y3",
            Outcome::Y4 => "Y4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl QualityVector {
    pub fn get(&self, o: Outcome) -> f64 {
        match o {
            Outcome::Y1 => self.y1,
            Outcome::Y2 => self.y2,
            Outcome::Y3 => self.y3,
            Outcome::Y4 => self.y4,
        }
    }
}

pub fn compute_quality(text: &str, lex: &Lexicons, window: usize) -> Result<QualityVector, MetricsError> {
    Ok(QualityVector {
        y1: advanced_guiraud(text, lex),
        y2: mean_length_tunit(text)?,
        y3: semantic_overlap(text, lex)?,
        y4: genbit_score(text, lex, window),
    })
}

/// Distinct lemmas outside the common list per square root of token count.
pub fn advanced_guiraud(text: &str, lex: &Lexicons) -> f64 {
    let tokens = words(text);
    if tokens.is_empty() {
        return 0.0;
    }
    let advanced: BTreeSet<String> = tokens
        .iter()
        .map(|w| lemmatize(w))
        .filter(|l| !lex.is_common(l))
        .collect();
    advanced.len() as f64 / (tokens.len() as f64).sqrt()
}

const COORDINATORS: &[&str] = &["and", "but", "or", "so", "yet", "for", "nor"];
const SUBJECT_PRONOUNS: &[&str] = &["i", "you", "he", "she", "it", "we", "they", "there"];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
    "their", "some", "every", "each", "no", "many", "most", "all",
];
const FINITE_FORMS: &[&str] = &[
    "am", "is", "are", "was", "were", "has", "have", "had", "do", "does", "did", "will", "would",
    "can", "could", "shall", "should", "may", "might", "must", "ran", "ate", "slept", "went",
    "came", "saw", "said", "made", "took", "knew", "got", "gave", "found", "thought", "told",
    "became", "left", "felt", "brought", "began", "kept", "held", "wrote", "stood", "heard",
    "meant", "met", "paid", "sat", "spoke", "led", "grew", "lost", "fell", "sent", "built",
    "understood", "drew", "broke", "spent", "rose", "drove", "bought", "wore", "chose", "threw",
    "caught", "won", "forgot", "taught", "sold", "fought", "flew", "sang", "swam", "drank", "hid",
    "shook", "rode", "woke", "stole", "fed", "hung", "shot", "froze", "tore", "sank", "stuck",
    "struck", "swept", "wept", "fled", "slid", "blew",
];

fn looks_finite(tok: &str) -> bool {
    FINITE_FORMS.contains(&tok)
        || (tok.len() > 3 && tok.ends_with("ed"))
        || (tok.len() > 2 && tok.ends_with('s') && !tok.ends_with("ss") && !tok.ends_with("'s"))
}

/// Does an independent clause with its own subject start at `clause[0]`?
fn starts_independent_clause(clause: &[String]) -> bool {
    let mut rest = clause;
    if rest.first().is_some_and(|t| t == "then") {
        rest = &rest[1..];
    }
    let Some(head) = rest.first() else { return false };
    if SUBJECT_PRONOUNS.contains(&head.as_str()) {
        // The verb follows the pronoun, possibly after -ly adverbs.
        return rest[1..]
            .iter()
            .find(|t| !t.ends_with("ly"))
            .is_some_and(|t| {
                looks_finite(t)
                    || (!t.ends_with("ing") && !DETERMINERS.contains(&t.as_str()) && !COORDINATORS.contains(&t.as_str()))
            });
    }
    if DETERMINERS.contains(&head.as_str()) {
        // Determiner, noun (plus modifiers), then a finite verb within a few tokens.
        return rest.iter().skip(2).take(4).any(|t| looks_finite(t));
    }
    false
}

/// Number of T-units in one sentence's tokens.
pub fn count_tunits(sentence: &[String]) -> usize {
    let mut units = 1;
    for i in 1..sentence.len() {
        if !COORDINATORS.contains(&sentence[i].as_str()) {
            continue;
        }
        let end = sentence[i + 1..]
            .iter()
            .position(|t| COORDINATORS.contains(&t.as_str()))
            .map_or(sentence.len(), |p| i + 1 + p);
        if starts_independent_clause(&sentence[i + 1..end]) {
            units += 1;
        }
    }
    units
}

/// Words per T-unit.
pub fn mean_length_tunit(text: &str) -> Result<f64, MetricsError> {
    let sents = sentences(text);
    if sents.is_empty() {
        return Err(MetricsError::UndefinedMetric("mean length of T-unit"));
    }
    let n_words: usize = sents.iter().map(Vec::len).sum();
    let n_units: usize = sents.iter().map(|s| count_tunits(s)).sum();
    Ok(n_words as f64 / n_units as f64)
}

/// Similarity between two adjacent sentences, given as lowercase word tokens.
pub trait SentenceSimilarity {
    fn similarity(&self, a: &[String], b: &[String]) -> f64;
}

/// Jaccard overlap of stopword-filtered lemma sets.
pub struct LexicalJaccard<'a> {
    pub lexicons: &'a Lexicons,
}

impl LexicalJaccard<'_> {
    fn content(&self, sentence: &[String]) -> BTreeSet<String> {
        sentence
            .iter()
            .filter(|w| !self.lexicons.is_stopword(w))
            .map(|w| lemmatize(w))
            .collect()
    }
}

impl SentenceSimilarity for LexicalJaccard<'_> {
    fn similarity(&self, a: &[String], b: &[String]) -> f64 {
        let (a, b) = (self.content(a), self.content(b));
        let union = a.union(&b).count();
        if union == 0 {
            return 0.0;
        }
        a.intersection(&b).count() as f64 / union as f64
    }
}

pub fn semantic_overlap(text: &str, lex: &Lexicons) -> Result<f64, MetricsError> {
    semantic_overlap_with(text, &LexicalJaccard { lexicons: lex })
}

/// Mean similarity over adjacent sentence pairs; 0 for a single sentence.
pub fn semantic_overlap_with(text: &str, sim: &impl SentenceSimilarity) -> Result<f64, MetricsError> {
    let sents = sentences(text);
    match sents.len() {
        0 => Err(MetricsError::UndefinedMetric("semantic overlap")),
        1 => Ok(0.0),
        n => {
            let total: f64 = sents.windows(2).map(|w| sim.similarity(&w[0], &w[1])).sum();
            Ok(total / (n - 1) as f64)
        }
    }
}

/// Window co-occurrence gender-bias score.
///
/// For each non-gendered content lemma `w`, `m_w` and `f_w` count male and
/// female words within `window` tokens of an occurrence of `w` in the same
/// sentence. The score is the mean of `|ln((m_w + 1) / (f_w + 1))|` over
/// lemmas with any gendered co-occurrence, or 0 if there are none.
pub fn genbit_score(text: &str, lex: &Lexicons, window: usize) -> f64 {
    let mut counts: BTreeMap<String, (u64, u64)> = BTreeMap::new();
    for sentence in sentences(text) {
        let lemmas: Vec<String> = sentence.iter().map(|w| lemmatize(w)).collect();
        let genders: Vec<Option<Gender>> = sentence
            .iter()
            .zip(&lemmas)
            .map(|(w, l)| lex.gender(w, l))
            .collect();
        for (i, word) in sentence.iter().enumerate() {
            if genders[i].is_some() || lex.is_stopword(word) {
                continue;
            }
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(sentence.len() - 1);
            let (mut m, mut f) = (0, 0);
            for (j, g) in genders.iter().enumerate().take(hi + 1).skip(lo) {
                match (j != i).then_some(*g).flatten() {
                    Some(Gender::Male) => m += 1,
                    Some(Gender::Female) => f += 1,
                    None => {}
                }
            }
            if m + f > 0 {
                let entry = counts.entry(lemmas[i].clone()).or_default();
                entry.0 += m;
                entry.1 += f;
            }
        }
    }
    if counts.is_empty() {
        return 0.0;
    }
    let total: f64 = counts
        .values()
        .map(|&(m, f)| ((m as f64 + GENBIT_SMOOTHING) / (f as f64 + GENBIT_SMOOTHING)).ln().abs())
        .sum();
    total / counts.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        words(s)
    }

    #[test]
    fn all_common_words_give_zero_guiraud() {
        assert_eq!(advanced_guiraud("the cat sat", &Lexicons::bundled()), 0.0);
    }

    #[test]
    fn empty_text() {
        let lex = Lexicons::bundled();
        assert_eq!(advanced_guiraud("", &lex), 0.0);
        assert_eq!(genbit_score("", &lex, 10), 0.0);
        assert!(mean_length_tunit("  ").is_err());
        assert!(semantic_overlap("...", &lex).is_err());
    }

    #[test]
    fn tunit_examples() {
        assert_eq!(mean_length_tunit("The dog barked.").unwrap(), 3.0);
        assert_eq!(mean_length_tunit("The dog barked and the cat ran.").unwrap(), 3.5);
        assert_eq!(mean_length_tunit("Stop!").unwrap(), 1.0);
    }

    #[test]
    fn coordination_without_a_new_clause_does_not_split() {
        assert_eq!(count_tunits(&toks("I bought bread and milk")), 1);
        assert_eq!(count_tunits(&toks("I bought food for the dog")), 1);
        assert_eq!(count_tunits(&toks("she sang and danced")), 1);
        assert_eq!(count_tunits(&toks("she sang but he quietly left")), 2);
        assert_eq!(count_tunits(&toks("it rained so we stayed inside")), 2);
        assert_eq!(count_tunits(&toks("the storm passed and then the sun came out")), 2);
    }

    #[test]
    fn overlap_examples() {
        let lex = Lexicons::bundled();
        assert_eq!(semantic_overlap("Cats purr. Cats purr.", &lex).unwrap(), 1.0);
        assert_eq!(semantic_overlap("Cats purr. Dogs bark.", &lex).unwrap(), 0.0);
        assert_eq!(semantic_overlap("The cat slept. The cat ate food.", &lex).unwrap(), 0.25);
        assert_eq!(semantic_overlap("One sentence only.", &lex).unwrap(), 0.0);
    }

    #[test]
    fn genbit_examples() {
        let lex = Lexicons::bundled();
        assert_eq!(genbit_score("The table is red.", &lex, 2), 0.0);
        assert_eq!(genbit_score("he leads. she leads.", &lex, 2), 0.0);
        assert!((genbit_score("he leads. he leads.", &lex, 2) - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn genbit_window_is_respected() {
        let lex = Lexicons::bundled();
        // window 1: quartz sees only "he", zebra only "she" -> both ln 2.
        let narrow = genbit_score("he quartz zebra she", &lex, 1);
        assert!((narrow - 2f64.ln()).abs() < 1e-12);
        // window 2: each sees one of each -> balanced.
        assert_eq!(genbit_score("he quartz zebra she", &lex, 2), 0.0);
    }
}
