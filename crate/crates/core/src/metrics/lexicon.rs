use std::collections::HashSet;
use std::path::Path;

use super::text::lemmatize;
use super::MetricsError;

/// Number of most frequent words treated as common (non-advanced).
pub const DEFAULT_COMMON_TOP_K: usize = 2000;

pub const COMMON_FILE: &str = "common_words.txt";
pub const MALE_FILE: &str = "male_words.txt";
pub const FEMALE_FILE: &str = "female_words.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";

const BUNDLED_COMMON: &str = include_str!("../../resources/lexicons/common_words.txt");
const BUNDLED_MALE: &str = include_str!("../../resources/lexicons/male_words.txt");
const BUNDLED_FEMALE: &str = include_str!("../../resources/lexicons/female_words.txt");
const BUNDLED_STOPWORDS: &str = include_str!("../../resources/lexicons/stopwords.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gender {
    Male,
    Female,
}

/// Word lists the metrics depend on. Gendered sets hold both the listed forms
/// and their lemmas; the common set holds lemmas of the top-K ranked words.
#[derive(Debug, Clone)]
pub struct Lexicons {
    common: HashSet<String>,
    male: HashSet<String>,
    female: HashSet<String>,
    stopwords: HashSet<String>,
}

fn entries(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

impl Lexicons {
    pub fn from_texts(
        common_ranked: &str,
        top_k: usize,
        male: &str,
        female: &str,
        stopwords: &str,
    ) -> Result<Self, MetricsError> {
        let common: HashSet<String> = entries(common_ranked).take(top_k).map(|w| lemmatize(&w)).collect();
        if common.is_empty() {
            return Err(MetricsError::Lexicon("common-word list is empty".into()));
        }
        let expand = |text: &str| -> HashSet<String> {
            entries(text).flat_map(|w| [lemmatize(&w), w]).collect()
        };
        let male = expand(male);
        let female = expand(female);
        if let Some(both) = male.intersection(&female).min() {
            return Err(MetricsError::Lexicon(format!("{both:?} is listed as both male and female")));
        }
        Ok(Lexicons { common, male, female, stopwords: entries(stopwords).collect() })
    }

    /// The lists shipped with the crate.
    pub fn bundled() -> Self {
        Self::bundled_with_top_k(DEFAULT_COMMON_TOP_K).expect("bundled lexicons are valid")
    }

    pub fn bundled_with_top_k(top_k: usize) -> Result<Self, MetricsError> {
        Self::from_texts(BUNDLED_COMMON, top_k, BUNDLED_MALE, BUNDLED_FEMALE, BUNDLED_STOPWORDS)
    }

    /// Loads the four list files from `dir`.
    pub fn load_dir(dir: &Path, top_k: usize) -> Result<Self, MetricsError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path)
                .map_err(|e| MetricsError::Lexicon(format!("{}: {e}", path.display())))
        };
        Self::from_texts(
            &read(COMMON_FILE)?,
            top_k,
            &read(MALE_FILE)?,
            &read(FEMALE_FILE)?,
            &read(STOPWORDS_FILE)?,
        )
    }

    pub fn is_common(&self, lemma: &str) -> bool {
        self.common.contains(lemma)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    pub fn gender(&self, word: &str, lemma: &str) -> Option<Gender> {
        if self.male.contains(word) || self.male.contains(lemma) {
            Some(Gender::Male)
        } else if self.female.contains(word) || self.female.contains(lemma) {
            Some(Gender::Female)
        } else {
            None
        }
    }

    /// Same lists with the male and female sets exchanged.
    pub fn swapped_genders(&self) -> Self {
        Lexicons {
            common: self.common.clone(),
            male: self.female.clone(),
            female: self.male.clone(),
            stopwords: self.stopwords.clone(),
        }
    }
}
