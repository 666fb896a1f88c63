use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::animate::{Rgb, Scheme};
use crate::ingest::{CorpusFormat, Query};
use crate::network::Team;
use crate::paths::TraversalMode;
use crate::temporal::{day_index, Day, IntervalAggregation, DEFAULT_WINDOW};

/// Everything one pipeline run needs. Relative paths are resolved against
/// the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    #[serde(default)]
    pub corpus_format: Option<CorpusFormat>,
    /// JSONL of nodelist profiles; users without one get a stub.
    #[serde(default)]
    pub profiles: Option<PathBuf>,
    #[serde(default)]
    pub teams: BTreeMap<String, Team>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub query: QueryConfig,
    pub coding: CodingConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub animation: AnimationConfig,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryConfig {
    pub keyword_groups: Vec<Vec<String>>,
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    #[serde(default)]
    pub case_sensitive: bool,
    /// First pass of a two-stage pull: only authors matching this query
    /// are kept by the main query.
    #[serde(default)]
    pub stage_one: Option<StageOneConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageOneConfig {
    pub keyword_groups: Vec<Vec<String>>,
    #[serde(default)]
    pub from: Option<DateTime<Utc>>,
    #[serde(default)]
    pub to: Option<DateTime<Utc>>,
}

impl QueryConfig {
    pub fn query(&self) -> Query {
        Query {
            keyword_groups: self.keyword_groups.clone(),
            from_time: self.from,
            to_time: self.to,
            restrict_to_users: None,
            case_sensitive: self.case_sensitive,
        }
    }

    pub fn stage_one_query(&self) -> Option<Query> {
        self.stage_one.as_ref().map(|s| Query {
            keyword_groups: s.keyword_groups.clone(),
            from_time: s.from.unwrap_or(self.from),
            to_time: s.to.unwrap_or(self.to),
            restrict_to_users: None,
            case_sensitive: self.case_sensitive,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodingConfig {
    pub keywords: Vec<String>,
    /// Valence lexicon for the rule-based analyzer; bundled when absent.
    #[serde(default)]
    pub rule_lexicon: Option<PathBuf>,
    /// Polarity lexicon for the lexicon-mean analyzer; bundled when absent.
    #[serde(default)]
    pub mean_lexicon: Option<PathBuf>,
    #[serde(default = "yes")]
    pub rule_based: bool,
    #[serde(default = "yes")]
    pub lexicon_mean: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub window: u32,
    /// Nodes with fewer interactions over the whole horizon are left out
    /// of the animation.
    pub min_degree: usize,
    /// Day 0; the date of `query.from` when absent.
    pub epoch: Option<NaiveDate>,
    pub aggregation: IntervalAggregation,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            window: DEFAULT_WINDOW,
            min_degree: 0,
            epoch: None,
            aggregation: IntervalAggregation::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub roots: Vec<String>,
    pub start_day: Day,
    /// Deadline for backward trees; the last observed day when absent.
    pub end_day: Option<Day>,
    pub mode: TraversalMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnimationConfig {
    pub scheme: Scheme,
    pub seed: u64,
    pub size_min: f64,
    pub size_max: f64,
    pub log_size: bool,
    pub iterations: usize,
    /// Script embedded in index.html. Without it only JSON and SVG are written.
    pub player_bundle: Option<PathBuf>,
    /// `#RRGGBB` stops for negative, neutral and positive sentiment.
    pub palette: Option<[String; 3]>,
}

impl Default for AnimationConfig {
    fn default() -> Self {
        AnimationConfig {
            scheme: Scheme::Sentiment,
            seed: 42,
            size_min: 0.3,
            size_max: 1.3,
            log_size: false,
            iterations: 300,
            player_bundle: None,
            palette: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Makes every relative path absolute against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.out_dir);
        for p in [
            &mut self.profiles,
            &mut self.coding.rule_lexicon,
            &mut self.coding.mean_lexicon,
            &mut self.animation.player_bundle,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn corpus_format(&self) -> CorpusFormat {
        self.corpus_format
            .unwrap_or_else(|| CorpusFormat::from_path(&self.corpus))
    }

    pub fn epoch(&self) -> NaiveDate {
        self.network.epoch.unwrap_or_else(|| self.query.from.date_naive())
    }

    /// Every day from the epoch through the day holding the end of the
    /// query window.
    pub fn observation_days(&self) -> Vec<Day> {
        let last = day_index(self.query.to - Duration::seconds(1), self.epoch());
        (0..=last).collect()
    }

    pub fn palette(&self) -> Result<crate::animate::Palette, String> {
        match &self.animation.palette {
            None => Ok(Default::default()),
            Some([n, z, p]) => {
                let c = |s: &str| Rgb::parse(s).map_err(|e| e.to_string());
                Ok(crate::animate::Palette {
                    negative: c(n)?,
                    neutral: c(z)?,
                    positive: c(p)?,
                })
            }
        }
    }

    /// Problems that make the config unusable; empty when it is fine.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.corpus.is_file() {
            out.push(format!("corpus {} does not exist", self.corpus.display()));
        }
        for (what, p) in [
            ("profiles", &self.profiles),
            ("coding.rule_lexicon", &self.coding.rule_lexicon),
            ("coding.mean_lexicon", &self.coding.mean_lexicon),
        ] {
            if let Some(p) = p {
                if !p.is_file() {
                    out.push(format!("{what} {} does not exist", p.display()));
                }
            }
        }
        if let Err(e) = self.query.query().validate() {
            out.push(format!("query: {e}"));
        }
        if let Some(q) = self.query.stage_one_query() {
            if let Err(e) = q.validate() {
                out.push(format!("query.stage_one: {e}"));
            }
        }
        if self.coding.keywords.is_empty() || self.coding.keywords.iter().any(String::is_empty) {
            out.push("coding.keywords must be a non-empty list of non-empty strings".into());
        }
        if self.network.window < 1 {
            out.push("network.window must be at least 1".into());
        }
        let a = &self.animation;
        if !(a.size_min.is_finite() && a.size_max.is_finite() && 0.0 < a.size_min && a.size_min <= a.size_max) {
            out.push(format!(
                "animation size range ({}, {}) must satisfy 0 < min <= max",
                a.size_min, a.size_max
            ));
        }
        if let Err(e) = self.palette() {
            out.push(format!("animation.palette: {e}"));
        }
        out
    }

    /// Hash of the analysis settings. File locations are left out since
    /// the manifest hashes file contents separately.
    pub fn config_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("corpus");
            m.remove("profiles");
            m.remove("out_dir");
            for (section, key) in [
                ("coding", "rule_lexicon"),
                ("coding", "mean_lexicon"),
                ("animation", "player_bundle"),
            ] {
                if let Some(s) = m.get_mut(section).and_then(|s| s.as_object_mut()) {
                    s.remove(key);
                }
            }
        }
        hex::encode(Sha256::digest(v.to_string().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "corpus": "corpus.jsonl",
        "query": {"keyword_groups": [["openai"]], "from": "2023-03-15T00:00:00Z", "to": "2023-04-13T00:00:00Z"},
        "coding": {"keywords": ["risk"]}
    }"#;

    #[test]
    fn defaults_and_days() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.network.window, 4);
        assert_eq!(c.animation.seed, 42);
        assert!(c.coding.rule_based && c.coding.lexicon_mean);
        assert_eq!(c.epoch(), NaiveDate::from_ymd_opt(2023, 3, 15).unwrap());
        assert_eq!(c.observation_days().len(), 29);
    }

    #[test]
    fn unknown_field_rejected() {
        let text = MINIMAL.replacen("\"corpus\"", "\"corpsu\": 1, \"corpus\"", 1);
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn resolve_and_validate() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("corpus.jsonl"), "").unwrap();
        let mut c = RunConfig::from_json(MINIMAL).unwrap();
        c.resolve_paths(dir.path());
        assert_eq!(c.out_dir, dir.path().join("out"));
        assert!(c.validate().is_empty());
        c.network.window = 0;
        c.coding.keywords.clear();
        c.animation.palette = Some(["#FF0000".into(), "yellow".into(), "#00FF00".into()]);
        assert_eq!(c.validate().len(), 3);
    }

    #[test]
    fn hash_ignores_locations() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.resolve_paths(Path::new("/somewhere/else"));
        assert_eq!(a.config_hash(), b.config_hash());
        b.network.window = 5;
        assert_ne!(a.config_hash(), b.config_hash());
    }
}
