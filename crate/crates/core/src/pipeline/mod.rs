//! Stage-by-stage pipeline over files in one output directory.
//!
//! Each stage reads the files earlier stages wrote, writes its own, and
//! records a line in `manifest.jsonl` with content hashes of both.

mod config;
mod manifest;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{
    AnimationConfig, CodingConfig, NetworkConfig, PathsConfig, QueryConfig, RunConfig, StageOneConfig,
};
pub use manifest::{read_manifest, FileHash, ManifestEntry, MANIFEST_FILE};

use crate::animate::{build_animation, export_animation, LayoutParams, SizeScale, VisualStyle};
use crate::coding::{
    daily_aggregate, read_codes, write_codes, write_daily, RuleBasedAnalyzer, RuleConstants,
    SentimentLexicon, TextCoder,
};
use crate::ingest::{filter_corpus, load_corpus, read_jsonl, stage_one_users, write_jsonl};
use crate::network::{build_edgelist, build_nodelist, read_edgelist, read_nodelist, write_edgelist, write_nodelist, NodeProfile};
use crate::paths::{
    backward_path, forward_path, overlap_series, transmission_timeline, timeline_svg, write_timeline,
    OverlapClass, PathTree,
};
use crate::temporal::{Day, Interaction, TemporalNetwork};

pub const FILTERED: &str = "filtered.jsonl";
pub const REJECTS: &str = "rejects.jsonl";
pub const EDGELIST: &str = "edgelist.csv";
pub const NODELIST: &str = "nodelist.csv";
pub const CODES: &str = "codes.csv";
pub const NETWORK: &str = "network.json";
pub const DAILY: &str = "daily.csv";
pub const INTERVALS: &str = "intervals.csv";
pub const SLICES: &str = "slices.jsonl";
pub const PATHS: &str = "paths.json";
pub const OVERLAP: &str = "overlap.json";
pub const ANIMATION_DIR: &str = "animation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Filter,
    Edges,
    Nodes,
    Code,
    Network,
    Daily,
    Slice,
    Paths,
    Timeline,
    Overlap,
    Animate,
}

impl Stage {
    pub const ALL: [Stage; 11] = [
        Stage::Filter,
        Stage::Edges,
        Stage::Nodes,
        Stage::Code,
        Stage::Network,
        Stage::Daily,
        Stage::Slice,
        Stage::Paths,
        Stage::Timeline,
        Stage::Overlap,
        Stage::Animate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Filter => "filter",
            Stage::Edges => "edges",
            Stage::Nodes => "nodes",
            Stage::Code => "code",
            Stage::Network => "network",
            Stage::Daily => "daily",
            Stage::Slice => "slice",
            Stage::Paths => "paths",
            Stage::Timeline => "timeline",
            Stage::Overlap => "overlap",
            Stage::Animate => "animate",
        }
    }

    /// Artifacts this stage reads, each with the stage that writes it.
    pub fn upstream(self, config: &RunConfig) -> Vec<(&'static str, Stage)> {
        match self {
            Stage::Filter => vec![],
            Stage::Edges | Stage::Code => vec![(FILTERED, Stage::Filter)],
            Stage::Nodes => vec![(EDGELIST, Stage::Edges)],
            Stage::Network => vec![
                (EDGELIST, Stage::Edges),
                (NODELIST, Stage::Nodes),
                (CODES, Stage::Code),
            ],
            Stage::Daily => vec![(FILTERED, Stage::Filter), (CODES, Stage::Code)],
            Stage::Slice | Stage::Paths => vec![(NETWORK, Stage::Network)],
            Stage::Timeline => vec![(PATHS, Stage::Paths)],
            Stage::Overlap => vec![(NETWORK, Stage::Network), (PATHS, Stage::Paths)],
            Stage::Animate => {
                let mut v = vec![(NETWORK, Stage::Network)];
                if config.animation.scheme == crate::animate::Scheme::Path {
                    v.push((OVERLAP, Stage::Overlap));
                }
                v
            }
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("`{stage}` needs {artifact}: run {needs} first")]
    MissingUpstream {
        stage: Stage,
        artifact: String,
        needs: Stage,
    },
    #[error("{0}")]
    Data(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit code: 2 config, 3 missing upstream, 4 data or I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::MissingUpstream { .. } => 3,
            PipelineError::Data(_) | PipelineError::Io { .. } => 4,
        }
    }

    fn config(msg: impl Into<String>) -> Self {
        PipelineError::Config(vec![msg.into()])
    }
}

fn data<E: fmt::Display>(ctx: &str) -> impl FnOnce(E) -> PipelineError + '_ {
    move |e| PipelineError::Data(format!("{ctx}: {e}"))
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads a config file and resolves its relative paths against the file's
/// directory.
pub fn load_config(path: &Path) -> Result<RunConfig, PipelineError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PipelineError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = RunConfig::from_json(&text)
        .map_err(|e| PipelineError::config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    cfg.resolve_paths(base);
    Ok(cfg)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageReport {
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: String,
}

/// Runs one stage. Fails without writing anything when the config is
/// invalid or an upstream artifact is missing.
pub fn run_stage(stage: Stage, config: &RunConfig) -> Result<StageReport, PipelineError> {
    let problems = config.validate();
    if !problems.is_empty() {
        return Err(PipelineError::Config(problems));
    }
    let out = &config.out_dir;
    for (artifact, needs) in stage.upstream(config) {
        if !out.join(artifact).is_file() {
            return Err(PipelineError::MissingUpstream {
                stage,
                artifact: artifact.to_string(),
                needs,
            });
        }
    }
    std::fs::create_dir_all(out).map_err(io_at(out))?;
    let mut run = StageRun::new(config);
    match stage {
        Stage::Filter => run.filter()?,
        Stage::Edges => run.edges()?,
        Stage::Nodes => run.nodes()?,
        Stage::Code => run.code()?,
        Stage::Network => run.network()?,
        Stage::Daily => run.daily()?,
        Stage::Slice => run.slice()?,
        Stage::Paths => run.paths()?,
        Stage::Timeline => run.timeline()?,
        Stage::Overlap => run.overlap()?,
        Stage::Animate => run.animate()?,
    }
    let entry = ManifestEntry {
        stage: stage.name().to_string(),
        inputs: run.inputs,
        config_hash: config.config_hash(),
        outputs: run.outputs.clone(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    manifest::record(out, entry)?;
    Ok(StageReport {
        outputs: run.outputs.into_iter().map(|f| f.path).collect(),
        warnings: run.warnings,
        summary: run.summary,
    })
}

/// Runs every stage in order, stopping at the first failure.
pub fn run_all(config: &RunConfig) -> Result<Vec<(Stage, StageReport)>, PipelineError> {
    Stage::ALL
        .into_iter()
        .map(|s| run_stage(s, config).map(|r| (s, r)))
        .collect()
}

/// Per-stage bookkeeping: files read and written, warnings.
struct StageRun<'a> {
    cfg: &'a RunConfig,
    inputs: Vec<FileHash>,
    outputs: Vec<FileHash>,
    warnings: Vec<String>,
    summary: String,
}

impl<'a> StageRun<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        StageRun {
            cfg,
            inputs: Vec::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
            summary: String::new(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    /// Hashes an input file. Artifacts are named relative to the output
    /// directory, outside files by file name.
    fn input(&mut self, path: &Path) -> Result<(), PipelineError> {
        let name = match path.strip_prefix(&self.cfg.out_dir) {
            Ok(rel) => rel.to_string_lossy().replace('\\', "/"),
            Err(_) => path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
        };
        self.inputs.push(FileHash::of(path, name)?);
        Ok(())
    }

    fn artifact(&mut self, name: &str) -> Result<PathBuf, PipelineError> {
        let p = self.path(name);
        self.input(&p)?;
        Ok(p)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let p = self.path(name);
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(io_at(dir))?;
        }
        std::fs::write(&p, bytes).map_err(io_at(&p))?;
        self.outputs.push(FileHash::of(&p, name.to_string())?);
        Ok(())
    }

    fn write_with<F>(&mut self, name: &str, f: F) -> Result<(), PipelineError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), String>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::Data(format!("writing {name}: {e}")))?;
        self.write(name, &buf)
    }

    fn open(&mut self, name: &str) -> Result<BufReader<File>, PipelineError> {
        let p = self.artifact(name)?;
        File::open(&p).map(BufReader::new).map_err(io_at(&p))
    }

    fn load_network(&mut self) -> Result<TemporalNetwork, PipelineError> {
        let p = self.artifact(NETWORK)?;
        let text = std::fs::read_to_string(&p).map_err(io_at(&p))?;
        let mut net = TemporalNetwork::from_json(&text).map_err(data(NETWORK))?;
        net.aggregation = self.cfg.network.aggregation;
        net.validate().map_err(data(NETWORK))?;
        Ok(net)
    }

    fn load_filtered(&mut self) -> Result<Vec<crate::ingest::TweetRecord>, PipelineError> {
        let r = self.open(FILTERED)?;
        let loaded = read_jsonl(r).map_err(data(FILTERED))?;
        if let Some(rej) = loaded.rejects.first() {
            return Err(PipelineError::Data(format!(
                "{FILTERED} line {}: {}",
                rej.line, rej.reason
            )));
        }
        Ok(loaded.records)
    }

    fn load_paths(&mut self) -> Result<PathsDoc, PipelineError> {
        let r = self.open(PATHS)?;
        serde_json::from_reader(r).map_err(data(PATHS))
    }

    fn filter(&mut self) -> Result<(), PipelineError> {
        let cfg = self.cfg;
        self.input(&cfg.corpus)?;
        let loaded = load_corpus(&cfg.corpus, cfg.corpus_format()).map_err(|e| PipelineError::Data(e.to_string()))?;
        let mut q = cfg.query.query();
        if let Some(q1) = cfg.query.stage_one_query() {
            let users = stage_one_users(&loaded.records, &q1);
            self.summary.push_str(&format!("stage one kept {} authors; ", users.len()));
            q.restrict_to_users = Some(users);
        }
        let kept = filter_corpus(&loaded.records, &q);
        if !loaded.rejects.is_empty() {
            self.warnings
                .push(format!("{} corpus lines rejected, see {REJECTS}", loaded.rejects.len()));
        }
        self.summary.push_str(&format!(
            "{} of {} records match, {} rejected",
            kept.len(),
            loaded.records.len(),
            loaded.rejects.len()
        ));
        self.write_with(FILTERED, |b| write_jsonl(&kept, b).map_err(|e| e.to_string()))?;
        self.write_with(REJECTS, |b| loaded.write_rejects(b).map_err(|e| e.to_string()))
    }

    fn edges(&mut self) -> Result<(), PipelineError> {
        let records = self.load_filtered()?;
        let edges = build_edgelist(&records);
        self.summary = format!("{} edges", edges.len());
        self.write_with(EDGELIST, |b| write_edgelist(&edges, b).map_err(|e| e.to_string()))
    }

    fn nodes(&mut self) -> Result<(), PipelineError> {
        let edges = read_edgelist(self.open(EDGELIST)?).map_err(data(EDGELIST))?;
        let mut profiles = HashMap::new();
        if let Some(p) = &self.cfg.profiles {
            self.input(p)?;
            let text = std::fs::read_to_string(p).map_err(io_at(p))?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let prof: NodeProfile = serde_json::from_str(line)
                    .map_err(|e| PipelineError::Data(format!("{} line {}: {e}", p.display(), i + 1)))?;
                profiles.insert(prof.user_id.clone(), prof);
            }
        }
        let list = build_nodelist(&edges, &profiles, &self.cfg.teams);
        self.warnings.extend(list.warnings);
        self.summary = format!("{} nodes", list.nodes.len());
        self.write_with(NODELIST, |b| write_nodelist(&list.nodes, b).map_err(|e| e.to_string()))
    }

    fn code(&mut self) -> Result<(), PipelineError> {
        let records = self.load_filtered()?;
        let c = &self.cfg.coding;
        let mut coder = TextCoder::new(c.keywords.clone()).map_err(|e| PipelineError::config(e.to_string()))?;
        let lexicon = |p: &Option<PathBuf>, bundled: fn() -> SentimentLexicon| match p {
            Some(p) => SentimentLexicon::from_tsv_path(p).map_err(|e| PipelineError::Data(e.to_string())),
            None => Ok(bundled()),
        };
        coder.rule = if c.rule_based {
            let lex = lexicon(&c.rule_lexicon, SentimentLexicon::bundled)?;
            Some(RuleBasedAnalyzer::new(lex, RuleConstants::default()))
        } else {
            None
        };
        coder.mean = if c.lexicon_mean {
            Some(lexicon(&c.mean_lexicon, SentimentLexicon::bundled_polarity)?)
        } else {
            None
        };
        for p in [&c.rule_lexicon, &c.mean_lexicon].into_iter().flatten() {
            self.input(p)?;
        }
        let codes: Vec<_> = records.iter().map(|r| coder.code(&r.tweet_id, &r.text)).collect();
        let flagged = codes.iter().filter(|c| c.keyword_flag == 1).count();
        self.summary = format!("{} posts coded, {flagged} with keywords", codes.len());
        self.write_with(CODES, |b| write_codes(&codes, b).map_err(|e| e.to_string()))
    }

    fn network(&mut self) -> Result<(), PipelineError> {
        let edges = read_edgelist(self.open(EDGELIST)?).map_err(data(EDGELIST))?;
        let nodes = read_nodelist(self.open(NODELIST)?).map_err(data(NODELIST))?;
        let codes = read_codes(self.open(CODES)?).map_err(data(CODES))?;
        let codes: HashMap<String, _> = codes.into_iter().map(|c| (c.tweet_id.clone(), c)).collect();
        let epoch = self.cfg.epoch();
        let interactions = Interaction::from_edges(&edges, &codes, epoch);
        if let Some(early) = interactions.iter().find(|i| i.day < 0) {
            return Err(PipelineError::Data(format!(
                "post {} predates the epoch {epoch}",
                early.tweet_id
            )));
        }
        let net = TemporalNetwork::build(
            &interactions,
            &nodes,
            epoch,
            self.cfg.network.window,
            self.cfg.network.aggregation,
        );
        net.validate().map_err(data("network"))?;
        self.summary = format!("{} nodes, {} dyads", net.nodes.len(), net.edges.len());
        let mut json = net.to_json().map_err(data(NETWORK))?;
        json.push('\n');
        self.write(NETWORK, json.as_bytes())
    }

    fn daily(&mut self) -> Result<(), PipelineError> {
        let records = self.load_filtered()?;
        let codes = read_codes(self.open(CODES)?).map_err(data(CODES))?;
        let by_id: HashMap<&str, _> = records.iter().map(|r| (r.tweet_id.as_str(), r.created_at)).collect();
        let mut rows = Vec::with_capacity(codes.len());
        for c in codes {
            let at = *by_id.get(c.tweet_id.as_str()).ok_or_else(|| {
                PipelineError::Data(format!("{CODES} has post {} missing from {FILTERED}", c.tweet_id))
            })?;
            rows.push((at, c));
        }
        let daily = daily_aggregate(&rows);
        self.summary = format!("{} days", daily.len());
        self.write_with(DAILY, |b| write_daily(&daily, b).map_err(|e| e.to_string()))
    }

    fn slice(&mut self) -> Result<(), PipelineError> {
        let net = self.load_network()?;
        let days = self.cfg.observation_days();
        self.write_with(INTERVALS, |b| {
            let mut w = csv::Writer::from_writer(b);
            w.write_record(["user_id", "onset", "terminus", "degree", "mean_sentiment", "keyword_any"])
                .map_err(|e| e.to_string())?;
            for n in &net.nodes {
                for iv in &n.intervals {
                    w.write_record([
                        iv.user_id.clone(),
                        iv.onset.to_string(),
                        iv.terminus.to_string(),
                        iv.degree.to_string(),
                        iv.mean_sentiment.to_string(),
                        iv.keyword_any.to_string(),
                    ])
                    .map_err(|e| e.to_string())?;
                }
            }
            w.flush().map_err(|e| e.to_string())
        })?;
        self.write_with(SLICES, |b| {
            for &d in &days {
                serde_json::to_writer(&mut *b, &net.slice(d)).map_err(|e| e.to_string())?;
                b.push(b'\n');
            }
            Ok(())
        })?;
        self.summary = format!("{} slices", days.len());
        Ok(())
    }

    fn paths(&mut self) -> Result<(), PipelineError> {
        let pc = &self.cfg.paths;
        if pc.roots.is_empty() {
            return Err(PipelineError::config("paths.roots is empty"));
        }
        let net = self.load_network()?;
        let end = pc
            .end_day
            .unwrap_or_else(|| *self.cfg.observation_days().last().unwrap_or(&0));
        let mut doc = PathsDoc::default();
        for root in &pc.roots {
            let fwd = forward_path(&net, root, pc.start_day, pc.mode).map_err(data("paths"))?;
            let bwd = backward_path(&net, root, end, pc.mode).map_err(data("paths"))?;
            self.summary.push_str(&format!(
                "{root}: reaches {}, reached by {}; ",
                fwd.len() - 1,
                bwd.len() - 1
            ));
            doc.forward.push(fwd);
            doc.backward.push(bwd);
        }
        let mut json = serde_json::to_string_pretty(&doc).map_err(data(PATHS))?;
        json.push('\n');
        self.write(PATHS, json.as_bytes())
    }

    fn timeline(&mut self) -> Result<(), PipelineError> {
        let doc = self.load_paths()?;
        for tree in &doc.forward {
            let rows = transmission_timeline(tree);
            let stem = format!("timeline_{}", file_safe(&tree.root));
            self.write_with(&format!("{stem}.csv"), |b| write_timeline(&rows, b).map_err(|e| e.to_string()))?;
            let svg = timeline_svg(&rows, &format!("forward path from {}", tree.root));
            self.write(&format!("{stem}.svg"), svg.as_bytes())?;
        }
        self.summary = format!("{} timelines", doc.forward.len());
        Ok(())
    }

    fn overlap(&mut self) -> Result<(), PipelineError> {
        let net = self.load_network()?;
        let doc = self.load_paths()?;
        let [a, b, ..] = doc.forward.as_slice() else {
            return Err(PipelineError::config("overlap needs two roots in paths.roots"));
        };
        let series = overlap_series(&net, a, b, &self.cfg.observation_days());
        if let Some((d, classes)) = series.iter().next_back() {
            let both = classes.values().filter(|c| **c == OverlapClass::Both).count();
            let neither = classes.values().filter(|c| **c == OverlapClass::Neither).count();
            self.summary = format!("day {d}: {both} in both paths, {neither} in neither");
        }
        let mut json = serde_json::to_string_pretty(&series).map_err(data(OVERLAP))?;
        json.push('\n');
        self.write(OVERLAP, json.as_bytes())
    }

    fn animate(&mut self) -> Result<(), PipelineError> {
        let cfg = self.cfg;
        let net = self.load_network()?.filter_by_total_degree(cfg.network.min_degree);
        let overlap: Option<BTreeMap<Day, BTreeMap<String, OverlapClass>>> =
            if cfg.animation.scheme == crate::animate::Scheme::Path {
                Some(serde_json::from_reader(self.open(OVERLAP)?).map_err(data(OVERLAP))?)
            } else {
                None
            };
        let a = &cfg.animation;
        let mut style = VisualStyle::for_network(&net, a.scheme);
        style.palette = cfg.palette().map_err(PipelineError::config)?;
        style.size = SizeScale {
            min: a.size_min,
            max: a.size_max,
            log: a.log_size,
        };
        let params = LayoutParams {
            iterations: a.iterations,
            ..Default::default()
        };
        let days = cfg.observation_days();
        let doc = build_animation(&net, &days, &style, a.seed, &params, overlap.as_ref());
        let player = match &a.player_bundle {
            Some(p) if p.is_file() => {
                self.input(p)?;
                Some(std::fs::read_to_string(p).map_err(io_at(p))?)
            }
            Some(p) => {
                self.warnings.push(format!("player bundle {} not found", p.display()));
                None
            }
            None => None,
        };
        let dir = self.path(ANIMATION_DIR);
        let report = export_animation(&doc, &dir, player.as_deref()).map_err(|e| PipelineError::Data(e.to_string()))?;
        self.warnings.extend(report.warnings);
        for f in report.files {
            let rel = format!(
                "{ANIMATION_DIR}/{}",
                f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
            );
            self.outputs.push(FileHash::of(&f, rel)?);
        }
        self.summary = format!("{} slices, {} nodes after min_degree", doc.slices.len(), net.nodes.len());
        Ok(())
    }
}

/// Forward and backward trees, one per configured root.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathsDoc {
    pub forward: Vec<PathTree>,
    pub backward: Vec<PathTree>,
}

/// Keeps ASCII letters, digits, `-` and `_`; everything else becomes `_`.
fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}
