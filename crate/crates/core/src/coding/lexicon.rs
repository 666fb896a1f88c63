use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::CodingError;

const VADER_LEXICON: &str = include_str!("../../assets/vader_lexicon.txt");
const EMOJI_LEXICON: &str = include_str!("../../assets/emoji_utf8_lexicon.txt");
const POLARITY_LEXICON: &str = include_str!("../../assets/polarity_lexicon.tsv");

pub const BOOSTER_INCREMENT: f64 = 0.293;

const INCREASING: &[&str] = &[
    "absolutely", "amazingly", "awfully", "completely", "considerable", "considerably",
    "decidedly", "deeply", "effing", "enormous", "enormously", "entirely", "especially",
    "exceptional", "exceptionally", "extreme", "extremely", "fabulously", "flipping", "flippin",
    "frackin", "fracking", "fricking", "frickin", "frigging", "friggin", "fully", "fuckin",
    "fucking", "fuggin", "fugging", "greatly", "hella", "highly", "hugely", "incredible",
    "incredibly", "intensely", "major", "majorly", "more", "most", "particularly", "purely",
    "quite", "really", "remarkably", "so", "substantially", "thoroughly", "total", "totally",
    "tremendous", "tremendously", "uber", "unbelievably", "unusually", "utter", "utterly",
    "very",
];

const DECREASING: &[&str] = &[
    "almost", "barely", "hardly", "just enough", "kind of", "kinda", "kindof", "kind-of", "less",
    "little", "marginal", "marginally", "occasional", "occasionally", "partly", "scarce",
    "scarcely", "slight", "slightly", "somewhat", "sort of", "sorta", "sortof", "sort-of",
];

const NEGATORS: &[&str] = &[
    "aint", "arent", "cannot", "cant", "couldnt", "darent", "didnt", "doesnt", "ain't", "aren't",
    "can't", "couldn't", "daren't", "didn't", "doesn't", "dont", "hadnt", "hasnt", "havent",
    "isnt", "mightnt", "mustnt", "neither", "don't", "hadn't", "hasn't", "haven't", "isn't",
    "mightn't", "mustn't", "neednt", "needn't", "never", "none", "nope", "nor", "not", "nothing",
    "nowhere", "oughtnt", "shant", "shouldnt", "uhuh", "wasnt", "werent", "oughtn't", "shan't",
    "shouldn't", "uh-uh", "wasn't", "weren't", "without", "wont", "wouldnt", "won't", "wouldn't",
    "rarely", "seldom", "despite",
];

/// Token valences plus the modifier word lists used by the rule-based
/// analyzer.
///
/// Lookups are done with lowercased tokens. Entries are stored as read, so
/// a lexicon row with uppercase letters (some emoticons) never matches, the
/// same as in the reference tool.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentimentLexicon {
    pub entries: HashMap<String, f64>,
    pub boosters: HashMap<String, f64>,
    pub negators: HashSet<String>,
    /// Single-character emoji → textual description, substituted before
    /// tokenizing.
    pub emoji: HashMap<char, String>,
}

impl SentimentLexicon {
    /// The bundled valence lexicon, emoji table and default modifier lists.
    pub fn bundled() -> Self {
        let mut lex = Self::parse_tsv(VADER_LEXICON).expect("bundled lexicon parses");
        lex.emoji = parse_emoji(EMOJI_LEXICON);
        lex.boosters = default_boosters(BOOSTER_INCREMENT);
        lex.negators = NEGATORS.iter().map(|s| s.to_string()).collect();
        lex
    }

    /// The bundled word-polarity lexicon (values in [-1, 1]) used by the
    /// lexicon-mean analyzer. No modifiers.
    pub fn bundled_polarity() -> Self {
        Self::parse_tsv(POLARITY_LEXICON).expect("bundled polarity lexicon parses")
    }

    /// Loads a `token<TAB>valence[<TAB>...]` file; extra columns are ignored.
    /// Modifier lists are the defaults.
    pub fn from_tsv_path(path: &Path) -> Result<Self, CodingError> {
        let text = std::fs::read_to_string(path).map_err(|source| CodingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut lex = Self::parse_tsv(&text)?;
        lex.emoji = parse_emoji(EMOJI_LEXICON);
        lex.boosters = default_boosters(BOOSTER_INCREMENT);
        lex.negators = NEGATORS.iter().map(|s| s.to_string()).collect();
        Ok(lex)
    }

    /// Parses entries only.
    pub fn parse_tsv(text: &str) -> Result<Self, CodingError> {
        let mut entries = HashMap::new();
        for (idx, raw) in text.trim_end_matches('\n').split('\n').enumerate() {
            if raw.is_empty() {
                continue;
            }
            let line = raw.trim();
            let mut cols = line.split('\t');
            let (Some(token), Some(value)) = (cols.next(), cols.next()) else {
                return Err(CodingError::Lexicon {
                    line: idx + 1,
                    reason: "expected token<TAB>valence".into(),
                });
            };
            if token.is_empty() {
                return Err(CodingError::Lexicon {
                    line: idx + 1,
                    reason: "empty token".into(),
                });
            }
            let valence: f64 = value.trim().parse().map_err(|e| CodingError::Lexicon {
                line: idx + 1,
                reason: format!("bad valence `{value}`: {e}"),
            })?;
            if !valence.is_finite() {
                return Err(CodingError::Lexicon {
                    line: idx + 1,
                    reason: "valence is not finite".into(),
                });
            }
            entries.insert(token.to_string(), valence);
        }
        Ok(SentimentLexicon {
            entries,
            ..Default::default()
        })
    }

    pub fn valence(&self, lowered: &str) -> Option<f64> {
        self.entries.get(lowered).copied()
    }

    pub fn contains(&self, lowered: &str) -> bool {
        self.entries.contains_key(lowered)
    }

    pub fn booster(&self, lowered: &str) -> Option<f64> {
        self.boosters.get(lowered).copied()
    }

    pub fn is_negator(&self, lowered: &str) -> bool {
        self.negators.contains(lowered)
    }
}

pub fn default_boosters(increment: f64) -> HashMap<String, f64> {
    INCREASING
        .iter()
        .map(|w| (w.to_string(), increment))
        .chain(DECREASING.iter().map(|w| (w.to_string(), -increment)))
        .collect()
}

fn parse_emoji(text: &str) -> HashMap<char, String> {
    let mut out = HashMap::new();
    for line in text.trim_end_matches('\n').split('\n') {
        let line = line.trim();
        let mut cols = line.split('\t');
        let (Some(key), Some(desc)) = (cols.next(), cols.next()) else {
            continue;
        };
        // multi-codepoint keys can never match a single character
        let mut chars = key.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            out.insert(c, desc.to_string());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_lexicon_loads() {
        let lex = SentimentLexicon::bundled();
        assert!(lex.entries.len() > 7000);
        assert_eq!(lex.valence("good"), Some(1.9));
        assert_eq!(lex.booster("very"), Some(0.293));
        assert_eq!(lex.booster("kind of"), Some(-0.293));
        assert!(lex.is_negator("isn't"));
        assert_eq!(lex.emoji.get(&'😀').map(String::as_str), Some("grinning face"));
    }

    #[test]
    fn polarity_lexicon_in_range() {
        let lex = SentimentLexicon::bundled_polarity();
        assert!(lex.entries.len() > 1000);
        assert!(lex.entries.values().all(|v| (-1.0..=1.0).contains(v)));
        assert!(lex.entries.keys().all(|k| k == &k.to_lowercase()));
    }

    #[test]
    fn malformed_rows() {
        assert!(SentimentLexicon::parse_tsv("good\n").is_err());
        assert!(SentimentLexicon::parse_tsv("good\tabc\n").is_err());
        assert!(SentimentLexicon::parse_tsv("good\tNaN\n").is_err());
        let lex = SentimentLexicon::parse_tsv("good\t1.5\r\nbad\t-2\t0.3\n").unwrap();
        assert_eq!(lex.valence("good"), Some(1.5));
        assert_eq!(lex.valence("bad"), Some(-2.0));
    }
}
