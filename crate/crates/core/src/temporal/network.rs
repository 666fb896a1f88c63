use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::intervals::intervals_from_spells;
use super::{spellize, Day, DyadEdge, EdgeSpell, GraphError, Interaction, IntervalAggregation, NodeInterval};
use crate::network::{EdgeType, NodeProfile, Team};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub profile: NodeProfile,
    pub intervals: Vec<NodeInterval>,
}

/// Nodes with their activity intervals and dyads with their spells.
///
/// Nodes are kept sorted by user id and dyads by `(u, v)`, so the JSON form
/// is stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalNetwork {
    pub epoch: NaiveDate,
    pub window: u32,
    pub nodes: Vec<NetworkNode>,
    pub edges: Vec<DyadEdge>,
    #[serde(skip)]
    pub aggregation: IntervalAggregation,
}

/// A node active on one day, with the attributes of its interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceNode {
    pub user_id: String,
    pub team: Team,
    pub degree: u32,
    pub mean_sentiment: f64,
    pub keyword_any: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceEdge {
    pub u: String,
    pub v: String,
    pub from: String,
    pub to: String,
    pub edge_type: EdgeType,
    pub tweet_id: String,
    pub text: String,
    pub sentiment: f64,
    pub keyword_flag: u8,
}

/// Static graph of everything active on `day`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceGraph {
    pub day: Day,
    pub nodes: Vec<SliceNode>,
    pub edges: Vec<SliceEdge>,
}

impl TemporalNetwork {
    /// Builds the network from interactions and a nodelist. Users that
    /// appear in interactions but not in `profiles` get stub profiles.
    pub fn build(
        interactions: &[Interaction],
        profiles: &[NodeProfile],
        epoch: NaiveDate,
        window: u32,
        aggregation: IntervalAggregation,
    ) -> Self {
        let edges = spellize(interactions, window);
        let mut by_id: BTreeMap<String, NodeProfile> = profiles
            .iter()
            .map(|p| (p.user_id.clone(), p.clone()))
            .collect();
        for d in &edges {
            for u in [&d.u, &d.v] {
                by_id
                    .entry(u.clone())
                    .or_insert_with(|| NodeProfile::stub(u));
            }
        }
        let mut net = TemporalNetwork {
            epoch,
            window,
            nodes: by_id
                .into_values()
                .map(|profile| NetworkNode {
                    profile,
                    intervals: Vec::new(),
                })
                .collect(),
            edges,
            aggregation,
        };
        net.recompute_intervals();
        net
    }

    fn recompute_intervals(&mut self) {
        let mut incident: HashMap<&str, Vec<&EdgeSpell>> = HashMap::new();
        for d in &self.edges {
            for s in &d.spells {
                incident.entry(&d.u).or_default().push(s);
                incident.entry(&d.v).or_default().push(s);
            }
        }
        let computed: Vec<Vec<NodeInterval>> = self
            .nodes
            .iter()
            .map(|n| match incident.get(n.profile.user_id.as_str()) {
                Some(spells) => {
                    intervals_from_spells(&n.profile.user_id, spells, self.window, self.aggregation)
                }
                None => Vec::new(),
            })
            .collect();
        for (n, iv) in self.nodes.iter_mut().zip(computed) {
            n.intervals = iv;
        }
    }

    pub fn node(&self, user: &str) -> Option<&NetworkNode> {
        self.nodes
            .binary_search_by(|n| n.profile.user_id.as_str().cmp(user))
            .ok()
            .map(|i| &self.nodes[i])
    }

    pub fn contains(&self, user: &str) -> bool {
        self.node(user).is_some()
    }

    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.profile.user_id.as_str())
    }

    pub fn intervals(&self, user: &str) -> Result<&[NodeInterval], GraphError> {
        self.node(user)
            .map(|n| n.intervals.as_slice())
            .ok_or_else(|| GraphError::UnknownUser(user.to_string()))
    }

    /// Latest terminus over all spells.
    pub fn horizon(&self) -> Option<Day> {
        self.edges
            .iter()
            .flat_map(|d| d.spells.iter().map(|s| s.terminus))
            .max()
    }

    /// Days from 0 through the last day on which an interaction starts.
    pub fn observation_days(&self) -> Vec<Day> {
        let last = self
            .edges
            .iter()
            .flat_map(|d| d.spells.iter().map(|s| s.onset))
            .max();
        match last {
            Some(last) => (0..=last).collect(),
            None => Vec::new(),
        }
    }

    /// Number of incident interactions (spells) over the whole horizon.
    pub fn total_degree(&self, user: &str) -> usize {
        self.edges
            .iter()
            .filter(|d| d.touches(user))
            .map(|d| d.spells.len())
            .sum()
    }

    pub fn slice(&self, day: Day) -> SliceGraph {
        let nodes = self
            .nodes
            .iter()
            .filter_map(|n| {
                let iv = n.intervals.iter().find(|i| i.spell().contains(day))?;
                Some(SliceNode {
                    user_id: n.profile.user_id.clone(),
                    team: n.profile.team,
                    degree: iv.degree,
                    mean_sentiment: iv.mean_sentiment,
                    keyword_any: iv.keyword_any,
                })
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|d| {
                let s = d.active_on(day)?;
                Some(SliceEdge {
                    u: d.u.clone(),
                    v: d.v.clone(),
                    from: s.from.clone(),
                    to: s.to.clone(),
                    edge_type: s.edge_type,
                    tweet_id: s.tweet_id.clone(),
                    text: s.text.clone(),
                    sentiment: s.sentiment,
                    keyword_flag: s.keyword_flag,
                })
            })
            .collect();
        SliceGraph { day, nodes, edges }
    }

    /// Drops nodes with fewer than `min_degree` incident interactions over
    /// the whole horizon, and every dyad that loses an endpoint. Surviving
    /// nodes have their intervals recomputed from the remaining dyads.
    pub fn filter_by_total_degree(&self, min_degree: usize) -> TemporalNetwork {
        if min_degree == 0 {
            return self.clone();
        }
        let keep: BTreeSet<&str> = self
            .user_ids()
            .filter(|u| self.total_degree(u) >= min_degree)
            .collect();
        let mut out = TemporalNetwork {
            epoch: self.epoch,
            window: self.window,
            nodes: self
                .nodes
                .iter()
                .filter(|n| keep.contains(n.profile.user_id.as_str()))
                .cloned()
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|d| keep.contains(d.u.as_str()) && keep.contains(d.v.as_str()))
                .cloned()
                .collect(),
            aggregation: self.aggregation,
        };
        out.recompute_intervals();
        out
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        for w in self.nodes.windows(2) {
            if w[0].profile.user_id >= w[1].profile.user_id {
                return Err(GraphError::Invariant(format!(
                    "nodes not sorted/unique at `{}`",
                    w[1].profile.user_id
                )));
            }
        }
        for w in self.edges.windows(2) {
            if (&w[0].u, &w[0].v) >= (&w[1].u, &w[1].v) {
                return Err(GraphError::Invariant(format!(
                    "dyads not sorted/unique at ({}, {})",
                    w[1].u, w[1].v
                )));
            }
        }
        for d in &self.edges {
            d.check()?;
            for u in [&d.u, &d.v] {
                if !self.contains(u) {
                    return Err(GraphError::Invariant(format!("dyad endpoint `{u}` has no node")));
                }
            }
            if d.spells.iter().any(|s| s.onset < 0) {
                return Err(GraphError::Invariant(format!(
                    "dyad ({}, {}) has a spell before day 0",
                    d.u, d.v
                )));
            }
        }
        for n in &self.nodes {
            for w in n.intervals.windows(2) {
                if w[0].terminus >= w[1].onset {
                    return Err(GraphError::Invariant(format!(
                        "intervals of `{}` overlap",
                        n.profile.user_id
                    )));
                }
            }
            if n.intervals.iter().any(|i| i.degree == 0) {
                return Err(GraphError::Invariant(format!(
                    "`{}` has an interval with degree 0",
                    n.profile.user_id
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
