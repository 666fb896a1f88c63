//! Corpus loading and query filtering.
//!
//! A corpus is a local JSONL or CSV dump of posts. Loading never silently
//! drops a line: anything that does not decode, or decodes into a record that
//! breaks the [`TweetRecord`] invariants, ends up in the rejects report with
//! its line number.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("unknown corpus format `{0}` (expected jsonl or csv)")]
    UnknownFormat(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
}

/// One post together with the users it points at.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author_id: String,
    pub author_handle: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    #[serde(default)]
    pub reply_to_user: Option<String>,
    #[serde(default)]
    pub retweet_of_user: Option<String>,
    #[serde(default)]
    pub mentioned_users: Vec<String>,
    #[serde(default)]
    pub lang: Option<String>,
}

impl TweetRecord {
    /// Checks the per-record invariants. Uniqueness of `tweet_id` is a corpus
    /// property and is checked by the loader.
    pub fn validate(&self) -> Result<(), String> {
        if self.tweet_id.is_empty() {
            return Err("tweet_id is empty".into());
        }
        if self.reply_to_user.is_some() && self.retweet_of_user.is_some() {
            return Err("both reply_to_user and retweet_of_user are set".into());
        }
        let mut seen = HashSet::new();
        for m in &self.mentioned_users {
            if m == &self.author_id {
                return Err(format!("mentioned_users contains the author `{m}`"));
            }
            if !seen.insert(m.as_str()) {
                return Err(format!("mentioned_users contains `{m}` twice"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusFormat::Jsonl => "jsonl",
            CorpusFormat::Csv => "csv",
        })
    }
}

/// A line that could not be turned into a valid record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadedCorpus {
    pub records: Vec<TweetRecord>,
    pub rejects: Vec<Reject>,
}

impl LoadedCorpus {
    /// Writes the rejects report as JSONL of `{line, reason}`.
    pub fn write_rejects<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.rejects {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Loads every record from `path`, in file order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus, IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file)).map_err(io_err),
        CorpusFormat::Csv => read_csv(file).map_err(|source| IngestError::Csv {
            path: path.display().to_string(),
            source,
        }),
    }
}

/// JSONL reader; blank lines are skipped without a reject.
pub fn read_jsonl<R: BufRead>(reader: R) -> std::io::Result<LoadedCorpus> {
    let mut acc = Accumulator::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TweetRecord>(&line) {
            Ok(rec) => acc.push(lineno, rec),
            Err(e) => acc.reject(lineno, format!("undecodable record: {e}")),
        }
    }
    Ok(acc.out)
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    tweet_id: String,
    author_id: String,
    author_handle: String,
    created_at: String,
    text: String,
    #[serde(default)]
    reply_to_user: String,
    #[serde(default)]
    retweet_of_user: String,
    #[serde(default)]
    mentioned_users: String,
    #[serde(default)]
    lang: String,
}

fn non_empty(s: String) -> Option<String> {
    if s.is_empty() {
        None
    } else {
        Some(s)
    }
}

impl TryFrom<CsvRow> for TweetRecord {
    type Error = String;

    fn try_from(row: CsvRow) -> Result<Self, Self::Error> {
        let created_at = DateTime::parse_from_rfc3339(&row.created_at)
            .map_err(|e| format!("bad created_at `{}`: {e}", row.created_at))?
            .with_timezone(&Utc);
        let mentioned_users = row
            .mentioned_users
            .split('|')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        Ok(TweetRecord {
            tweet_id: row.tweet_id,
            author_id: row.author_id,
            author_handle: row.author_handle,
            created_at,
            text: row.text,
            reply_to_user: non_empty(row.reply_to_user),
            retweet_of_user: non_empty(row.retweet_of_user),
            mentioned_users,
            lang: non_empty(row.lang),
        })
    }
}

/// CSV reader. The header row is required and uses the JSONL field names;
/// `mentioned_users` is a `|`-separated cell.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<LoadedCorpus, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut acc = Accumulator::default();
    for result in rdr.records() {
        let row = match result {
            Ok(row) => row,
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(e),
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                acc.reject(line, format!("undecodable row: {e}"));
                continue;
            }
        };
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match row.deserialize::<CsvRow>(Some(&headers)) {
            Ok(raw) => match TweetRecord::try_from(raw) {
                Ok(rec) => acc.push(line, rec),
                Err(reason) => acc.reject(line, reason),
            },
            Err(e) => acc.reject(line, format!("undecodable row: {e}")),
        }
    }
    Ok(acc.out)
}

#[derive(Default)]
struct Accumulator {
    out: LoadedCorpus,
    ids: HashSet<String>,
}

impl Accumulator {
    fn push(&mut self, line: u64, rec: TweetRecord) {
        if let Err(reason) = rec.validate() {
            self.reject(line, reason);
        } else if !self.ids.insert(rec.tweet_id.clone()) {
            self.reject(line, format!("duplicate tweet_id `{}`", rec.tweet_id));
        } else {
            self.out.records.push(rec);
        }
    }

    fn reject(&mut self, line: u64, reason: String) {
        self.out.rejects.push(Reject { line, reason });
    }
}

/// Keyword/time-window query. Keyword groups are OR-ed; the keywords inside
/// one group are AND-ed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub keyword_groups: Vec<Vec<String>>,
    pub from_time: DateTime<Utc>,
    pub to_time: DateTime<Utc>,
    #[serde(default)]
    pub restrict_to_users: Option<BTreeSet<String>>,
    #[serde(default)]
    pub case_sensitive: bool,
}

impl Query {
    pub fn new(
        keyword_groups: Vec<Vec<String>>,
        from_time: DateTime<Utc>,
        to_time: DateTime<Utc>,
    ) -> Result<Self, IngestError> {
        let q = Query {
            keyword_groups,
            from_time,
            to_time,
            restrict_to_users: None,
            case_sensitive: false,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_users<I, S>(mut self, users: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.restrict_to_users = Some(users.into_iter().map(Into::into).collect());
        self
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.from_time >= self.to_time {
            return Err(IngestError::InvalidQuery(format!(
                "from_time {} is not before to_time {}",
                self.from_time, self.to_time
            )));
        }
        if self.keyword_groups.is_empty() {
            return Err(IngestError::InvalidQuery("no keyword groups".into()));
        }
        if let Some(i) = self
            .keyword_groups
            .iter()
            .position(|g| g.is_empty() || g.iter().any(String::is_empty))
        {
            return Err(IngestError::InvalidQuery(format!(
                "keyword group {i} is empty or holds an empty keyword"
            )));
        }
        Ok(())
    }

    pub fn matches(&self, rec: &TweetRecord) -> bool {
        if rec.created_at < self.from_time || rec.created_at >= self.to_time {
            return false;
        }
        if let Some(users) = &self.restrict_to_users {
            if !users.contains(&rec.author_id) {
                return false;
            }
        }
        let folded;
        let text = if self.case_sensitive {
            rec.text.as_str()
        } else {
            folded = fold_case(&rec.text);
            folded.as_str()
        };
        self.keyword_groups.iter().any(|group| {
            group.iter().all(|kw| {
                if self.case_sensitive {
                    text.contains(kw.as_str())
                } else {
                    text.contains(fold_case(kw).as_str())
                }
            })
        })
    }
}

/// Case folding used for case-insensitive keyword matching.
pub fn fold_case(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

pub fn filter_corpus(corpus: &[TweetRecord], q: &Query) -> Vec<TweetRecord> {
    corpus.iter().filter(|r| q.matches(r)).cloned().collect()
}

/// Distinct authors of the records matching `q`: the first pass of a
/// two-stage pull.
pub fn stage_one_users(corpus: &[TweetRecord], q: &Query) -> BTreeSet<String> {
    corpus
        .iter()
        .filter(|r| q.matches(r))
        .map(|r| r.author_id.clone())
        .collect()
}

/// Writes records as JSONL, one object per line.
pub fn write_jsonl<W: Write>(records: &[TweetRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn ts(day: u32, hour: u32) -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2023, 3, day, hour, 0, 0).unwrap()
    }

    fn rec(id: &str, author: &str, day: u32, text: &str) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author_id: author.into(),
            author_handle: author.to_lowercase(),
            created_at: ts(day, 12),
            text: text.into(),
            reply_to_user: None,
            retweet_of_user: None,
            mentioned_users: vec![],
            lang: Some("en".into()),
        }
    }

    fn jsonl(recs: &[TweetRecord]) -> String {
        let mut buf = Vec::new();
        write_jsonl(recs, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_input_gives_nothing() {
        let loaded = read_jsonl("".as_bytes()).unwrap();
        assert!(loaded.records.is_empty());
        assert!(loaded.rejects.is_empty());
    }

    #[test]
    fn three_lines_in_order() {
        let recs = vec![
            rec("1", "A", 15, "one"),
            rec("2", "B", 16, "two"),
            rec("3", "C", 17, "three"),
        ];
        let loaded = read_jsonl(jsonl(&recs).as_bytes()).unwrap();
        assert_eq!(loaded.records, recs);
        assert!(loaded.rejects.is_empty());
    }

    #[test]
    fn reply_and_retweet_together_is_rejected() {
        let mut bad = rec("2", "B", 16, "two");
        bad.reply_to_user = Some("A".into());
        bad.retweet_of_user = Some("C".into());
        let recs = vec![rec("1", "A", 15, "one"), bad, rec("3", "C", 17, "three")];
        let loaded = read_jsonl(jsonl(&recs).as_bytes()).unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert_eq!(loaded.rejects.len(), 1);
        assert_eq!(loaded.rejects[0].line, 2);
        assert!(loaded.rejects[0].reason.contains("reply_to_user"));
    }

    #[test]
    fn garbage_and_duplicates_are_rejected() {
        let text = format!(
            "{}not json\n{}",
            jsonl(&[rec("1", "A", 15, "x")]),
            jsonl(&[rec("1", "B", 16, "y")])
        );
        let loaded = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(loaded.records.len(), 1);
        let lines: Vec<u64> = loaded.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![2, 3]);
        assert!(loaded.rejects[1].reason.contains("duplicate"));
    }

    #[test]
    fn mention_invariants() {
        let mut r = rec("1", "A", 15, "x");
        r.mentioned_users = vec!["B".into(), "B".into()];
        assert!(r.validate().is_err());
        r.mentioned_users = vec!["A".into()];
        assert!(r.validate().is_err());
        r.mentioned_users = vec!["B".into(), "C".into()];
        assert!(r.validate().is_ok());
    }

    #[test]
    fn csv_rows_and_line_numbers() {
        let csv_text = "\
tweet_id,author_id,author_handle,created_at,text,reply_to_user,retweet_of_user,mentioned_users,lang
1,A,a,2023-03-15T10:00:00Z,hello,,,B|C,en
2,B,b,not-a-date,oops,,,,
3,C,c,2023-03-16T10:00:00Z,\"multi, field\",A,,,
4,D,d,2023-03-16T11:00:00Z,both,A,B,,
";
        let loaded = read_csv(csv_text.as_bytes()).unwrap();
        assert_eq!(loaded.records.len(), 2);
        assert_eq!(loaded.records[0].mentioned_users, vec!["B", "C"]);
        assert_eq!(loaded.records[1].reply_to_user.as_deref(), Some("A"));
        assert_eq!(loaded.records[1].lang, None);
        let lines: Vec<u64> = loaded.rejects.iter().map(|r| r.line).collect();
        assert_eq!(lines, vec![3, 5]);
    }

    fn window() -> (DateTime<Utc>, DateTime<Utc>) {
        (ts(15, 0), ts(29, 0))
    }

    #[test]
    fn and_group_matches() {
        let (from, to) = window();
        let q = Query::new(vec![vec!["OpenAI".into(), "LLM".into()]], from, to).unwrap();
        assert!(q.matches(&rec("1", "A", 20, "OpenAI LLM is out")));
        assert!(!q.matches(&rec("2", "A", 20, "OpenAI is out")));
        // case-insensitive by default
        assert!(q.matches(&rec("3", "A", 20, "openai llm")));
    }

    #[test]
    fn window_is_half_open() {
        let (from, to) = window();
        let q = Query::new(vec![vec!["ai".into()]], from, to).unwrap();
        let mut at_from = rec("1", "A", 15, "ai");
        at_from.created_at = from;
        let mut at_to = rec("2", "A", 29, "ai");
        at_to.created_at = to;
        assert!(q.matches(&at_from));
        assert!(!q.matches(&at_to));
        assert!(!q.matches(&rec("3", "A", 10, "ai")));
    }

    #[test]
    fn case_sensitive_knob() {
        let (from, to) = window();
        let mut q = Query::new(vec![vec!["GPT".into()]], from, to).unwrap();
        q.case_sensitive = true;
        assert!(!q.matches(&rec("1", "A", 20, "gpt rocks")));
        assert!(q.matches(&rec("1", "A", 20, "GPT rocks")));
    }

    #[test]
    fn substring_semantics() {
        let (from, to) = window();
        let q = Query::new(vec![vec!["risk".into()]], from, to).unwrap();
        assert!(q.matches(&rec("1", "A", 20, "so many risks")));
    }

    #[test]
    fn invalid_queries() {
        let (from, to) = window();
        assert!(Query::new(vec![], from, to).is_err());
        assert!(Query::new(vec![vec![]], from, to).is_err());
        assert!(Query::new(vec![vec!["x".into()]], to, from).is_err());
        assert!(Query::new(vec![vec!["x".into()]], from, from).is_err());
    }

    #[test]
    fn two_stage_pull() {
        let (from, to) = window();
        let corpus = vec![
            rec("1", "A", 16, "ChatGPT is neat"),
            rec("2", "B", 17, "chatgpt again"),
            rec("3", "C", 18, "nothing here"),
            rec("4", "A", 19, "the letter about risk"),
            rec("5", "C", 20, "the letter is a risk"),
        ];
        let q1 = Query::new(vec![vec!["chatgpt".into()]], from, to).unwrap();
        let users = stage_one_users(&corpus, &q1);
        assert_eq!(users, BTreeSet::from(["A".to_string(), "B".to_string()]));

        let q2 = Query::new(vec![vec!["letter".into()]], from, to)
            .unwrap()
            .with_users(users);
        let ids: Vec<_> = filter_corpus(&corpus, &q2)
            .into_iter()
            .map(|r| r.tweet_id)
            .collect();
        assert_eq!(ids, vec!["4"]);
    }

    #[test]
    fn stage_one_edge_cases() {
        let (from, to) = window();
        let q = Query::new(vec![vec!["zzz".into()]], from, to).unwrap();
        assert!(stage_one_users(&[rec("1", "A", 16, "x")], &q).is_empty());

        let q = Query::new(vec![vec!["ai".into()]], from, to).unwrap();
        let corpus = vec![rec("1", "A", 16, "ai"), rec("2", "A", 17, "AI!")];
        assert_eq!(stage_one_users(&corpus, &q).len(), 1);

        let corpus = vec![
            rec("1", "A", 16, "ai"),
            rec("2", "B", 17, "AI"),
            rec("3", "A", 18, "ai"),
            rec("4", "C", 19, "nope"),
        ];
        assert_eq!(
            stage_one_users(&corpus, &q),
            BTreeSet::from(["A".to_string(), "B".to_string()])
        );
    }
}
