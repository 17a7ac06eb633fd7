//! Tokenization, sentence splitting and lemmatization shared by the metrics.
//!
//! Everything is lowercased first, so all metrics are case-insensitive.
//! Words come from Unicode word boundaries and must contain a letter.
//! Sentences end at `.`, `!` or `?` runs followed by whitespace (or the end of
//! text), or at a line break. A short list of abbreviations does not end a
//! sentence.

use std::collections::HashMap;
use std::sync::OnceLock;

use unicode_segmentation::UnicodeSegmentation;

const ABBREVIATIONS: &[&str] = &["mr", "mrs", "ms", "dr", "st", "vs", "etc", "jr", "sr", "prof", "e.g", "i.e"];

fn normalize(text: &str) -> String {
    text.trim().to_lowercase().replace(['\u{2019}', '\u{2018}'], "'")
}

/// Lowercased word tokens of `text`.
pub fn words(text: &str) -> Vec<String> {
    words_of_normalized(&normalize(text))
}

fn words_of_normalized(text: &str) -> Vec<String> {
    text.unicode_words()
        .filter(|w| w.chars().any(char::is_alphabetic))
        .map(str::to_owned)
        .collect()
}

/// Sentences of `text` as word-token lists; sentences without words are dropped.
pub fn sentences(text: &str) -> Vec<Vec<String>> {
    let text = normalize(text);
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;

    let push = |from: usize, to: usize, out: &mut Vec<Vec<String>>| {
        let toks = words_of_normalized(&text[from..to]);
        if !toks.is_empty() {
            out.push(toks);
        }
    };

    while i < chars.len() {
        let (byte, c) = chars[i];
        if c == '\n' || c == '\r' {
            push(start, byte, &mut out);
            start = byte + c.len_utf8();
            i += 1;
            continue;
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '\u{201d}') {
                j += 1;
            }
            let at_boundary = j == chars.len() || chars[j].1.is_whitespace();
            if at_boundary && !(c == '.' && ends_with_abbreviation(&text[start..byte])) {
                let end = if j == chars.len() { text.len() } else { chars[j].0 };
                push(start, end, &mut out);
                start = end;
            }
            i = j;
            continue;
        }
        i += 1;
    }
    push(start, text.len(), &mut out);
    out
}

fn ends_with_abbreviation(before: &str) -> bool {
    let last = before
        .rsplit(|c: char| c.is_whitespace() || c == '(' || c == '"')
        .next()
        .unwrap_or("");
    ABBREVIATIONS.contains(&last)
}

static IRREGULAR_PAIRS: &[(&str, &str)] = &[
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("has", "have"), ("had", "have"), ("having", "have"), ("does", "do"),
    ("did", "do"), ("done", "do"), ("doing", "do"), ("goes", "go"), ("went", "go"), ("gone", "go"),
    ("ate", "eat"), ("eaten", "eat"), ("slept", "sleep"), ("ran", "run"), ("saw", "see"),
    ("seen", "see"), ("said", "say"), ("says", "say"), ("made", "make"), ("took", "take"),
    ("taken", "take"), ("came", "come"), ("knew", "know"), ("known", "know"), ("got", "get"),
    ("gotten", "get"), ("gave", "give"), ("given", "give"), ("found", "find"),
    ("thought", "think"), ("told", "tell"), ("became", "become"), ("left", "leave"),
    ("felt", "feel"), ("brought", "bring"), ("began", "begin"), ("begun", "begin"),
    ("kept", "keep"), ("held", "hold"), ("wrote", "write"), ("written", "write"),
    ("stood", "stand"), ("heard", "hear"), ("meant", "mean"), ("met", "meet"), ("paid", "pay"),
    ("sat", "sit"), ("spoke", "speak"), ("spoken", "speak"), ("led", "lead"), ("grew", "grow"),
    ("grown", "grow"), ("lost", "lose"), ("fell", "fall"), ("fallen", "fall"), ("sent", "send"),
    ("built", "build"), ("understood", "understand"), ("drew", "draw"), ("drawn", "draw"),
    ("broke", "break"), ("broken", "break"), ("spent", "spend"), ("rose", "rise"),
    ("risen", "rise"), ("drove", "drive"), ("driven", "drive"), ("bought", "buy"),
    ("wore", "wear"), ("worn", "wear"), ("chose", "choose"), ("chosen", "choose"),
    ("sought", "seek"), ("threw", "throw"), ("thrown", "throw"), ("caught", "catch"),
    ("dealt", "deal"), ("won", "win"), ("forgot", "forget"), ("forgotten", "forget"),
    ("taught", "teach"), ("sold", "sell"), ("fought", "fight"), ("flew", "fly"),
    ("flown", "fly"), ("sang", "sing"), ("sung", "sing"), ("swam", "swim"), ("drank", "drink"),
    ("drunk", "drink"), ("hid", "hide"), ("hidden", "hide"), ("shook", "shake"),
    ("shaken", "shake"), ("rode", "ride"), ("ridden", "ride"), ("woke", "wake"),
    ("woken", "wake"), ("stole", "steal"), ("stolen", "steal"), ("fed", "feed"), ("dug", "dig"),
    ("hung", "hang"), ("shot", "shoot"), ("bit", "bite"), ("bitten", "bite"), ("froze", "freeze"),
    ("frozen", "freeze"), ("tore", "tear"), ("torn", "tear"), ("swore", "swear"),
    ("sworn", "swear"), ("shone", "shine"), ("sank", "sink"), ("sunk", "sink"), ("spun", "spin"),
    ("stuck", "stick"), ("struck", "strike"), ("swept", "sweep"), ("wept", "weep"),
    ("crept", "creep"), ("bent", "bend"), ("lent", "lend"), ("fled", "flee"), ("slid", "slide"),
    ("blew", "blow"), ("blown", "blow"), ("men", "man"), ("women", "woman"),
    ("children", "child"), ("feet", "foot"), ("teeth", "tooth"), ("mice", "mouse"),
    ("geese", "goose"), ("lives", "life"), ("wives", "wife"), ("knives", "knife"),
    ("leaves", "leaf"), ("wolves", "wolf"), ("halves", "half"), ("selves", "self"),
    ("better", "good"), ("best", "good"), ("worse", "bad"), ("worst", "bad"),
    // Words the suffix rules would damage.
    ("news", "news"), ("series", "series"), ("species", "species"), ("perhaps", "perhaps"),
    ("whereas", "whereas"), ("always", "always"), ("politics", "politics"),
    ("economics", "economics"), ("physics", "physics"), ("mathematics", "mathematics"),
    ("ethics", "ethics"), ("lens", "lens"), ("chaos", "chaos"), ("bias", "bias"),
    ("canvas", "canvas"), ("atlas", "atlas"), ("alias", "alias"), ("thing", "thing"),
    ("nothing", "nothing"), ("something", "something"), ("anything", "anything"),
    ("everything", "everything"), ("king", "king"), ("ring", "ring"), ("spring", "spring"),
    ("string", "string"), ("evening", "evening"), ("morning", "morning"), ("during", "during"),
    ("ceiling", "ceiling"), ("sibling", "sibling"), ("darling", "darling"),
    ("pudding", "pudding"), ("hundred", "hundred"), ("sacred", "sacred"),
];

fn irregular() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| IRREGULAR_PAIRS.iter().copied().collect())
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

/// Number of vowel-consonant transitions, as in Porter's measure.
fn measure(s: &[u8]) -> usize {
    let mut m = 0;
    let mut prev_vowel = false;
    for (i, &c) in s.iter().enumerate() {
        let v = is_vowel(c) || (c == b'y' && i > 0 && !is_vowel(s[i - 1]));
        if prev_vowel && !v {
            m += 1;
        }
        prev_vowel = v;
    }
    m
}

/// Repairs a stem after stripping `-ed` / `-ing`: undoubles a final consonant
/// and restores a silent `e` on short consonant-vowel-consonant stems.
fn repair_stem(stem: &str) -> String {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 2 && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        return stem[..n - 1].to_owned();
    }
    let cvc = |i: usize| {
        // b[i-2..=i] is consonant, vowel, consonant (final not w/x/y)
        !is_vowel(b[i - 2]) && is_vowel(b[i - 1]) && !is_vowel(b[i]) && !matches!(b[i], b'w' | b'x' | b'y')
    };
    let short_vc = n == 2 && is_vowel(b[0]) && !is_vowel(b[1]);
    if short_vc || (n >= 3 && cvc(n - 1) && measure(b) == 1) {
        return format!("{stem}e");
    }
    stem.to_owned()
}

/// Maps a lowercase word to its lemma: irregular table first, then suffix
/// stripping for plurals, `-ed` and `-ing`. Non-ASCII words are left alone.
pub fn lemmatize(word: &str) -> String {
    let mut w = word;
    if let Some(base) = w.strip_suffix("'s") {
        w = base;
    } else if let Some(base) = w.strip_suffix('\'') {
        w = base;
    }
    if let Some(lemma) = irregular().get(w) {
        return (*lemma).to_owned();
    }
    if w.len() <= 3 || !w.is_ascii() || w.contains('\'') {
        return w.to_owned();
    }
    let b = w.as_bytes();
    let n = b.len();

    if w.ends_with("ies") && n > 4 {
        return format!("{}y", &w[..n - 3]);
    }
    if w.ends_with("sses") {
        return w[..n - 2].to_owned();
    }
    if ["xes", "ches", "shes", "zzes"].iter().any(|s| w.ends_with(s)) {
        return w[..n - 2].to_owned();
    }
    if w.ends_with('s') && !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
        return w[..n - 1].to_owned();
    }
    if w.ends_with("ied") && n > 4 {
        return format!("{}y", &w[..n - 3]);
    }
    if let Some(stem) = w.strip_suffix("ed") {
        let last = stem.as_bytes()[stem.len() - 1];
        if stem.bytes().any(is_vowel) && !is_vowel(last) {
            return repair_stem(stem);
        }
        return w.to_owned();
    }
    if let Some(stem) = w.strip_suffix("ing") {
        if stem.len() >= 3 && stem.bytes().any(is_vowel) {
            return repair_stem(stem);
        }
    }
    w.to_owned()
}
