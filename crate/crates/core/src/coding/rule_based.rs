//! Rule-based valence analyzer producing a normalized compound score.
//!
//! Each token looks up a valence, which preceding words may boost, dampen or
//! negate. The valences are summed, punctuation emphasis is added, and the
//! sum `s` is squashed into (-1, 1) with `s / sqrt(s^2 + alpha)`.
//!
//! The heuristics reproduce vaderSentiment 3.3.2 token for token, including
//! its quirks (the "but" reweighting matches values by equality, and the
//! three-back negation test groups its `and`/`or` the way Python does).

use serde::{Deserialize, Serialize};

use super::lexicon::SentimentLexicon;

/// Tunable constants of the analyzer. Defaults are the reference tool's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConstants {
    /// Added by an ALL-CAPS sentiment word when the text mixes case.
    pub caps_emphasis: f64,
    pub negation_scalar: f64,
    pub exclamation_increment: f64,
    pub exclamation_cap: usize,
    pub question_increment: f64,
    pub question_cap: usize,
    /// Emphasis used once the question-mark count exceeds the cap.
    pub question_max: f64,
    pub but_before: f64,
    pub but_after: f64,
    pub alpha: f64,
}

impl Default for RuleConstants {
    fn default() -> Self {
        RuleConstants {
            caps_emphasis: 0.733,
            negation_scalar: -0.74,
            exclamation_increment: 0.292,
            exclamation_cap: 4,
            question_increment: 0.18,
            question_cap: 3,
            question_max: 0.96,
            but_before: 0.5,
            but_after: 1.5,
            alpha: 15.0,
        }
    }
}

const SPECIAL_CASES: &[(&str, f64)] = &[
    ("the shit", 3.0),
    ("the bomb", 3.0),
    ("bad ass", 1.5),
    ("badass", 1.5),
    ("bus stop", 0.0),
    ("yeah right", -2.0),
    ("kiss of death", -1.5),
    ("to die for", 3.0),
    ("beating heart", 3.5),
];

fn special_case(phrase: &str) -> Option<f64> {
    SPECIAL_CASES
        .iter()
        .find(|(p, _)| *p == phrase)
        .map(|(_, v)| *v)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PolarityScores {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

/// `score / sqrt(score^2 + alpha)`, clamped to [-1, 1].
pub fn normalize(score: f64, alpha: f64) -> f64 {
    (score / (score * score + alpha).sqrt()).clamp(-1.0, 1.0)
}

/// Python's `str.isupper`: at least one cased character and no lowercase one.
fn is_upper(s: &str) -> bool {
    let mut cased = false;
    for c in s.chars() {
        if c.is_lowercase() {
            return false;
        }
        if c.is_uppercase() {
            cased = true;
        }
    }
    cased
}

/// Whitespace split; leading/trailing ASCII punctuation is stripped unless
/// that leaves two characters or fewer (which keeps emoticons like `:)`).
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace()
        .map(|tok| {
            let stripped = tok.trim_matches(|c: char| c.is_ascii_punctuation());
            if stripped.chars().count() <= 2 {
                tok
            } else {
                stripped
            }
        })
        .collect()
}

struct Tokens<'a> {
    raw: Vec<&'a str>,
    lower: Vec<String>,
    /// some, but not all, tokens are ALL CAPS
    cap_diff: bool,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let raw = tokenize(text);
        let lower = raw.iter().map(|t| t.to_lowercase()).collect();
        let caps = raw.iter().filter(|t| is_upper(t)).count();
        let cap_diff = caps > 0 && caps < raw.len();
        Tokens {
            raw,
            lower,
            cap_diff,
        }
    }

    fn len(&self) -> usize {
        self.raw.len()
    }
}

#[derive(Debug, Clone)]
pub struct RuleBasedAnalyzer {
    lexicon: SentimentLexicon,
    constants: RuleConstants,
}

impl Default for RuleBasedAnalyzer {
    fn default() -> Self {
        Self::new(SentimentLexicon::bundled(), RuleConstants::default())
    }
}

impl RuleBasedAnalyzer {
    pub fn new(lexicon: SentimentLexicon, constants: RuleConstants) -> Self {
        RuleBasedAnalyzer { lexicon, constants }
    }

    pub fn lexicon(&self) -> &SentimentLexicon {
        &self.lexicon
    }

    pub fn constants(&self) -> &RuleConstants {
        &self.constants
    }

    pub fn compound(&self, text: &str) -> f64 {
        self.polarity_scores(text).compound
    }

    pub fn polarity_scores(&self, text: &str) -> PolarityScores {
        let text = self.replace_emoji(text);
        let text = text.trim();
        let toks = Tokens::new(text);

        let mut sentiments = Vec::with_capacity(toks.len());
        for i in 0..toks.len() {
            let lower = toks.lower[i].as_str();
            if self.lexicon.booster(lower).is_some()
                || (i + 1 < toks.len() && lower == "kind" && toks.lower[i + 1] == "of")
            {
                sentiments.push(0.0);
                continue;
            }
            sentiments.push(self.valence_at(&toks, i));
        }
        self.but_check(&toks, &mut sentiments);
        self.score_valence(&sentiments, text)
    }

    fn replace_emoji(&self, text: &str) -> String {
        let mut out = String::with_capacity(text.len());
        let mut prev_space = true;
        for c in text.chars() {
            if let Some(desc) = self.lexicon.emoji.get(&c) {
                if !prev_space {
                    out.push(' ');
                }
                out.push_str(desc);
                prev_space = false;
            } else {
                out.push(c);
                prev_space = c == ' ';
            }
        }
        out
    }

    fn is_negated(&self, lowered: &str) -> bool {
        self.lexicon.is_negator(lowered) || lowered.contains("n't")
    }

    fn scalar_inc_dec(&self, raw: &str, lower: &str, valence: f64, cap_diff: bool) -> f64 {
        let Some(mut scalar) = self.lexicon.booster(lower) else {
            return 0.0;
        };
        if valence < 0.0 {
            scalar = -scalar;
        }
        if is_upper(raw) && cap_diff {
            if valence > 0.0 {
                scalar += self.constants.caps_emphasis;
            } else {
                scalar -= self.constants.caps_emphasis;
            }
        }
        scalar
    }

    fn valence_at(&self, toks: &Tokens<'_>, i: usize) -> f64 {
        let lower = &toks.lower;
        let Some(base) = self.lexicon.valence(&lower[i]) else {
            return 0.0;
        };
        let neg = self.constants.negation_scalar;
        let mut valence = base;

        // "no" directly before another lexicon word acts as a negator only
        if lower[i] == "no" && i + 1 < toks.len() && self.lexicon.contains(&lower[i + 1]) {
            valence = 0.0;
        }
        if (i > 0 && lower[i - 1] == "no")
            || (i > 1 && lower[i - 2] == "no")
            || (i > 2 && lower[i - 3] == "no" && (lower[i - 1] == "or" || lower[i - 1] == "nor"))
        {
            valence = base * neg;
        }

        if is_upper(toks.raw[i]) && toks.cap_diff {
            if valence > 0.0 {
                valence += self.constants.caps_emphasis;
            } else {
                valence -= self.constants.caps_emphasis;
            }
        }

        for back in 0..3 {
            if i <= back {
                continue;
            }
            let j = i - back - 1;
            if self.lexicon.contains(&lower[j]) {
                continue;
            }
            let mut s = self.scalar_inc_dec(toks.raw[j], &lower[j], valence, toks.cap_diff);
            if back == 1 && s != 0.0 {
                s *= 0.95;
            }
            if back == 2 && s != 0.0 {
                s *= 0.9;
            }
            valence += s;
            valence = self.negation_check(valence, lower, back, i);
            if back == 2 {
                valence = self.special_idioms_check(valence, lower, i);
            }
        }

        self.least_check(valence, lower, i)
    }

    fn negation_check(&self, valence: f64, lower: &[String], back: usize, i: usize) -> f64 {
        let neg = self.constants.negation_scalar;
        let w = |k: usize| lower[i - k].as_str();
        match back {
            0 => {
                if self.is_negated(w(1)) {
                    return valence * neg;
                }
            }
            1 => {
                if w(2) == "never" && (w(1) == "so" || w(1) == "this") {
                    return valence * 1.25;
                } else if w(2) == "without" && w(1) == "doubt" {
                    return valence;
                } else if self.is_negated(w(2)) {
                    return valence * neg;
                }
            }
            _ => {
                // (never and (so|this)) or (so|this): grouping kept as-is
                if (w(3) == "never" && (w(2) == "so" || w(2) == "this"))
                    || (w(1) == "so" || w(1) == "this")
                {
                    return valence * 1.25;
                } else if w(3) == "without" && (w(2) == "doubt" || w(1) == "doubt") {
                    return valence;
                } else if self.is_negated(w(3)) {
                    return valence * neg;
                }
            }
        }
        valence
    }

    fn special_idioms_check(&self, mut valence: f64, lower: &[String], i: usize) -> f64 {
        let w = |k: usize| lower[k].as_str();
        let onezero = format!("{} {}", w(i - 1), w(i));
        let twoonezero = format!("{} {} {}", w(i - 2), w(i - 1), w(i));
        let twoone = format!("{} {}", w(i - 2), w(i - 1));
        let threetwoone = format!("{} {} {}", w(i - 3), w(i - 2), w(i - 1));
        let threetwo = format!("{} {}", w(i - 3), w(i - 2));

        for seq in [&onezero, &twoonezero, &twoone, &threetwoone, &threetwo] {
            if let Some(v) = special_case(seq) {
                valence = v;
                break;
            }
        }
        if lower.len() > i + 1 {
            if let Some(v) = special_case(&format!("{} {}", w(i), w(i + 1))) {
                valence = v;
            }
        }
        if lower.len() > i + 2 {
            if let Some(v) = special_case(&format!("{} {} {}", w(i), w(i + 1), w(i + 2))) {
                valence = v;
            }
        }
        for ngram in [&threetwoone, &threetwo, &twoone] {
            if let Some(b) = self.lexicon.booster(ngram) {
                valence += b;
            }
        }
        valence
    }

    fn least_check(&self, valence: f64, lower: &[String], i: usize) -> f64 {
        let neg = self.constants.negation_scalar;
        if i > 0 && lower[i - 1] == "least" && !self.lexicon.contains("least") {
            if i > 1 {
                if lower[i - 2] != "at" && lower[i - 2] != "very" {
                    return valence * neg;
                }
            } else {
                return valence * neg;
            }
        }
        valence
    }

    fn but_check(&self, toks: &Tokens<'_>, sentiments: &mut [f64]) {
        let Some(bi) = toks.lower.iter().position(|t| t == "but") else {
            return;
        };
        // The reference walks the list and rewrites the *first* slot holding
        // an equal value, not the current one.
        for k in 0..sentiments.len() {
            let s = sentiments[k];
            let si = sentiments
                .iter()
                .position(|&x| x == s)
                .expect("value came from the list");
            if si < bi {
                sentiments[si] = s * self.constants.but_before;
            } else if si > bi {
                sentiments[si] = s * self.constants.but_after;
            }
        }
    }

    fn punctuation_emphasis(&self, text: &str) -> f64 {
        let c = &self.constants;
        let ep = text.matches('!').count().min(c.exclamation_cap);
        let qm = text.matches('?').count();
        let qm_amp = if qm > 1 {
            if qm <= c.question_cap {
                qm as f64 * c.question_increment
            } else {
                c.question_max
            }
        } else {
            0.0
        };
        ep as f64 * c.exclamation_increment + qm_amp
    }

    fn score_valence(&self, sentiments: &[f64], text: &str) -> PolarityScores {
        if sentiments.is_empty() {
            return PolarityScores::default();
        }
        let mut sum: f64 = sentiments.iter().sum();
        let amp = self.punctuation_emphasis(text);
        if sum > 0.0 {
            sum += amp;
        } else if sum < 0.0 {
            sum -= amp;
        }
        let compound = normalize(sum, self.constants.alpha);

        let (mut pos, mut neg, mut neu) = (0.0f64, 0.0f64, 0usize);
        for &s in sentiments {
            if s > 0.0 {
                pos += s + 1.0;
            }
            if s < 0.0 {
                neg += s - 1.0;
            }
            if s == 0.0 {
                neu += 1;
            }
        }
        if pos > neg.abs() {
            pos += amp;
        } else if pos < neg.abs() {
            neg -= amp;
        }
        let total = pos + neg.abs() + neu as f64;
        PolarityScores {
            neg: (neg / total).abs(),
            neu: (neu as f64 / total).abs(),
            pos: (pos / total).abs(),
            compound,
        }
    }
}

/// Compound score of `text` with default constants.
pub fn score_rule_based(text: &str, lex: &SentimentLexicon) -> f64 {
    RuleBasedAnalyzer::new(lex.clone(), RuleConstants::default()).compound(text)
}
