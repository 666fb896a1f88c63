//! Per-post text coding: two sentiment scores and a keyword flag, plus the
//! per-day aggregates built from them.

mod lexicon;
mod rule_based;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

pub use lexicon::{default_boosters, SentimentLexicon, BOOSTER_INCREMENT};
pub use rule_based::{
    normalize, score_rule_based, tokenize, PolarityScores, RuleBasedAnalyzer, RuleConstants,
};

use crate::ingest::fold_case;

#[derive(Debug, thiserror::Error)]
pub enum CodingError {
    #[error("keyword list is empty")]
    NoKeywords,
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextCodes {
    pub tweet_id: String,
    pub sentiment_rule: f64,
    pub sentiment_mean: f64,
    pub keyword_flag: u8,
}

/// Mean polarity of the tokens found in `lex`, or 0 when none match.
///
/// Tokens are whitespace-split, stripped of surrounding ASCII punctuation
/// and lowercased. The result is clamped to [-1, 1] so a lexicon with a
/// wider valence scale still yields a polarity.
pub fn score_lexicon_mean(text: &str, lex: &SentimentLexicon) -> f64 {
    let (sum, n) = text
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| c.is_ascii_punctuation()).to_lowercase())
        .filter_map(|t| lex.valence(&t))
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).clamp(-1.0, 1.0)
    }
}

/// True iff some keyword occurs in `text` as a case-insensitive substring.
pub fn code_keywords<S: AsRef<str>>(text: &str, keywords: &[S]) -> Result<bool, CodingError> {
    if keywords.is_empty() {
        return Err(CodingError::NoKeywords);
    }
    let folded = fold_case(text);
    Ok(keywords
        .iter()
        .any(|k| folded.contains(fold_case(k.as_ref()).as_str())))
}

/// Codes posts with both analyzers and the keyword list.
#[derive(Debug, Clone)]
pub struct TextCoder {
    pub rule: Option<RuleBasedAnalyzer>,
    pub mean: Option<SentimentLexicon>,
    pub keywords: Vec<String>,
}

impl TextCoder {
    pub fn new(keywords: Vec<String>) -> Result<Self, CodingError> {
        if keywords.is_empty() {
            return Err(CodingError::NoKeywords);
        }
        Ok(TextCoder {
            rule: Some(RuleBasedAnalyzer::default()),
            mean: Some(SentimentLexicon::bundled_polarity()),
            keywords,
        })
    }

    pub fn code(&self, tweet_id: &str, text: &str) -> TextCodes {
        TextCodes {
            tweet_id: tweet_id.to_string(),
            sentiment_rule: self.rule.as_ref().map_or(0.0, |a| a.compound(text)),
            sentiment_mean: self.mean.as_ref().map_or(0.0, |l| score_lexicon_mean(text, l)),
            // non-empty is checked in `new`
            keyword_flag: code_keywords(text, &self.keywords).unwrap_or(false) as u8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRow {
    pub day: NaiveDate,
    pub mean_rule: f64,
    pub mean_lexmean: f64,
    pub keyword_count: u64,
    pub tweet_count: u64,
}

/// Groups codes by UTC calendar day. Days without posts are omitted.
pub fn daily_aggregate(codes: &[(DateTime<Utc>, TextCodes)]) -> Vec<DailyRow> {
    let mut days: BTreeMap<NaiveDate, (f64, f64, u64, u64)> = BTreeMap::new();
    for (at, c) in codes {
        let e = days.entry(at.date_naive()).or_default();
        e.0 += c.sentiment_rule;
        e.1 += c.sentiment_mean;
        e.2 += u64::from(c.keyword_flag);
        e.3 += 1;
    }
    days.into_iter()
        .map(|(day, (rule, mean, kw, n))| DailyRow {
            day,
            mean_rule: rule / n as f64,
            mean_lexmean: mean / n as f64,
            keyword_count: kw,
            tweet_count: n,
        })
        .collect()
}

/// Codes CSV: `tweet_id, sentiment_rule, sentiment_mean, keyword_flag`.
pub fn write_codes<W: Write>(codes: &[TextCodes], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if codes.is_empty() {
        w.write_record(["tweet_id", "sentiment_rule", "sentiment_mean", "keyword_flag"])?;
    }
    for c in codes {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_codes<R: Read>(input: R) -> csv::Result<Vec<TextCodes>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Daily CSV: `day, mean_rule, mean_lexmean, keyword_count, tweet_count`.
pub fn write_daily<W: Write>(rows: &[DailyRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["day", "mean_rule", "mean_lexmean", "keyword_count", "tweet_count"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
