//! Edgelist and nodelist construction.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeType {
    Mention,
    Reply,
    Retweet,
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeType::Mention => "mention",
            EdgeType::Reply => "reply",
            EdgeType::Retweet => "retweet",
        })
    }
}

/// One edgelist row. `from` is the acting user, `to` the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub tweet_id: String,
    pub created_at: DateTime<Utc>,
    pub from: String,
    pub to: String,
    pub text: String,
    pub edge_type: EdgeType,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Team {
    Musk,
    #[serde(rename = "openai")]
    OpenAi,
    #[default]
    None,
}

impl FromStr for Team {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "musk" => Ok(Team::Musk),
            "openai" => Ok(Team::OpenAi),
            "none" | "" => Ok(Team::None),
            other => Err(format!("unknown team `{other}`")),
        }
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Team::Musk => "musk",
            Team::OpenAi => "openai",
            Team::None => "none",
        })
    }
}

/// One nodelist row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeProfile {
    pub user_id: String,
    #[serde(default)]
    pub handle: String,
    #[serde(default)]
    pub display_name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub followers_count: u64,
    #[serde(default)]
    pub team: Team,
}

impl NodeProfile {
    /// Placeholder profile for a user we have no profile data for.
    pub fn stub(user_id: &str) -> Self {
        NodeProfile {
            user_id: user_id.to_string(),
            handle: user_id.to_string(),
            display_name: String::new(),
            description: String::new(),
            location: String::new(),
            verified: false,
            followers_count: 0,
            team: Team::None,
        }
    }
}

/// Turns records into interaction edges.
///
/// A reply or retweet yields one edge to its target. Each mentioned user
/// yields a mention edge unless that user is already the reply/retweet
/// target of the same post. Self-edges are dropped. Output is sorted by
/// `(created_at, tweet_id, to)`.
pub fn build_edgelist(records: &[TweetRecord]) -> Vec<Edge> {
    let mut edges = Vec::new();
    for rec in records {
        let primary = rec
            .reply_to_user
            .as_ref()
            .map(|u| (u, EdgeType::Reply))
            .or_else(|| rec.retweet_of_user.as_ref().map(|u| (u, EdgeType::Retweet)));
        let mut push = |to: &str, edge_type| {
            if to != rec.author_id {
                edges.push(Edge {
                    tweet_id: rec.tweet_id.clone(),
                    created_at: rec.created_at,
                    from: rec.author_id.clone(),
                    to: to.to_string(),
                    text: rec.text.clone(),
                    edge_type,
                });
            }
        };
        if let Some((target, kind)) = primary {
            push(target, kind);
        }
        let mut seen = BTreeSet::new();
        for m in &rec.mentioned_users {
            if primary.is_some_and(|(t, _)| t == m) || !seen.insert(m) {
                continue;
            }
            push(m, EdgeType::Mention);
        }
    }
    edges.sort_by(|a, b| {
        (a.created_at, &a.tweet_id, &a.to).cmp(&(b.created_at, &b.tweet_id, &b.to))
    });
    edges
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Nodelist {
    pub nodes: Vec<NodeProfile>,
    pub warnings: Vec<String>,
}

/// One profile per distinct user in the edgelist, sorted by user id.
pub fn build_nodelist(
    edges: &[Edge],
    profiles: &HashMap<String, NodeProfile>,
    teams: &BTreeMap<String, Team>,
) -> Nodelist {
    let users: BTreeSet<&str> = edges
        .iter()
        .flat_map(|e| [e.from.as_str(), e.to.as_str()])
        .collect();
    let nodes = users
        .iter()
        .map(|&u| {
            let mut p = profiles
                .get(u)
                .cloned()
                .unwrap_or_else(|| NodeProfile::stub(u));
            p.user_id = u.to_string();
            if let Some(team) = teams.get(u) {
                p.team = *team;
            }
            p
        })
        .collect();
    let warnings = teams
        .keys()
        .filter(|u| !users.contains(u.as_str()))
        .map(|u| format!("team entry for `{u}` matches no user in the edgelist"))
        .collect();
    Nodelist { nodes, warnings }
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    tweet_id: String,
    created_at: DateTime<Utc>,
    from: String,
    to: String,
    text: String,
    edge_type: EdgeType,
}

/// Edgelist CSV: `tweet_id, created_at, from, to, text, edge_type`.
pub fn write_edgelist<W: Write>(edges: &[Edge], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for e in edges {
        w.serialize(EdgeRow {
            tweet_id: e.tweet_id.clone(),
            created_at: e.created_at,
            from: e.from.clone(),
            to: e.to.clone(),
            text: e.text.clone(),
            edge_type: e.edge_type,
        })?;
    }
    if edges.is_empty() {
        w.write_record(["tweet_id", "created_at", "from", "to", "text", "edge_type"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edgelist<R: Read>(input: R) -> csv::Result<Vec<Edge>> {
    csv::Reader::from_reader(input)
        .deserialize::<EdgeRow>()
        .map(|r| {
            r.map(|row| Edge {
                tweet_id: row.tweet_id,
                created_at: row.created_at,
                from: row.from,
                to: row.to,
                text: row.text,
                edge_type: row.edge_type,
            })
        })
        .collect()
}

const NODELIST_HEADER: [&str; 8] = [
    "user_id",
    "handle",
    "display_name",
    "description",
    "location",
    "verified",
    "followers_count",
    "team",
];

/// Nodelist CSV: `user_id, handle, display_name, description, location,
/// verified, followers_count, team`.
pub fn write_nodelist<W: Write>(nodes: &[NodeProfile], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if nodes.is_empty() {
        w.write_record(NODELIST_HEADER)?;
    }
    for n in nodes {
        w.serialize(n)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_nodelist<R: Read>(input: R) -> csv::Result<Vec<NodeProfile>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
