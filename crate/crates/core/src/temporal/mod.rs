//! Dynamic networks with spell semantics.
//!
//! Every interaction between two users opens a spell `[day, day + W]` on
//! their (unordered) dyad. Spells on one dyad never overlap: when a later
//! interaction starts while an earlier spell is still running, the earlier
//! spell is cut short to end the day before, and of several interactions on
//! the same day only the most recent one is kept. Each spell therefore
//! describes the most recent interaction on its dyad.

mod intervals;
mod network;

use std::collections::{BTreeMap, HashMap};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::coding::TextCodes;
use crate::network::{Edge, EdgeType};

pub use intervals::{node_intervals, IntervalAggregation, KeywordAggregation, NodeInterval, SentimentAggregation};
pub use network::{NetworkNode, SliceEdge, SliceGraph, SliceNode, TemporalNetwork};

/// Day index, counted from the network epoch.
pub type Day = i64;

/// Default spell length: an interaction stays active for four days after
/// the day it happened, five days inclusive.
pub const DEFAULT_WINDOW: u32 = 4;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GraphError {
    #[error("user `{0}` is not in the network")]
    UnknownUser(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Closed activity interval `[onset, terminus]` in day units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Spell {
    pub onset: Day,
    pub terminus: Day,
}

impl Spell {
    pub fn new(onset: Day, terminus: Day) -> Self {
        debug_assert!(onset <= terminus);
        Spell { onset, terminus }
    }

    pub fn contains(&self, day: Day) -> bool {
        self.onset <= day && day <= self.terminus
    }

    pub fn intersects(&self, other: &Spell) -> bool {
        self.onset <= other.terminus && other.onset <= self.terminus
    }
}

/// An edgelist row placed on the day axis and carrying its text codes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    pub tweet_id: String,
    pub created_at: DateTime<Utc>,
    pub day: Day,
    pub from: String,
    pub to: String,
    pub edge_type: EdgeType,
    pub text: String,
    pub sentiment: f64,
    pub keyword_flag: u8,
}

impl Interaction {
    /// Places edges on days counted from `epoch`. Edges whose post has no
    /// codes get neutral sentiment and no keyword.
    pub fn from_edges(
        edges: &[Edge],
        codes: &HashMap<String, TextCodes>,
        epoch: NaiveDate,
    ) -> Vec<Interaction> {
        edges
            .iter()
            .map(|e| {
                let c = codes.get(&e.tweet_id);
                Interaction {
                    tweet_id: e.tweet_id.clone(),
                    created_at: e.created_at,
                    day: day_index(e.created_at, epoch),
                    from: e.from.clone(),
                    to: e.to.clone(),
                    edge_type: e.edge_type,
                    text: e.text.clone(),
                    sentiment: c.map_or(0.0, |c| c.sentiment_rule),
                    keyword_flag: c.map_or(0, |c| c.keyword_flag),
                }
            })
            .collect()
    }

    fn dyad(&self) -> (&str, &str) {
        if self.from <= self.to {
            (&self.from, &self.to)
        } else {
            (&self.to, &self.from)
        }
    }

    fn sort_key(&self) -> (Day, DateTime<Utc>, &str, &str, &str) {
        (self.day, self.created_at, &self.tweet_id, &self.from, &self.to)
    }
}

/// Whole UTC days between `epoch` (midnight) and `at`.
pub fn day_index(at: DateTime<Utc>, epoch: NaiveDate) -> Day {
    (at.date_naive() - epoch).num_days()
}

/// Date of the earliest timestamp, the default epoch.
pub fn epoch_of<'a, I: IntoIterator<Item = &'a DateTime<Utc>>>(times: I) -> Option<NaiveDate> {
    times.into_iter().min().map(|t| t.date_naive())
}

/// A spell on a dyad with the attributes of the interaction anchoring it.
/// `from`/`to` record the direction of that interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpell {
    pub onset: Day,
    pub terminus: Day,
    pub from: String,
    pub to: String,
    pub edge_type: EdgeType,
    pub tweet_id: String,
    pub text: String,
    pub sentiment: f64,
    pub keyword_flag: u8,
}

impl EdgeSpell {
    pub fn spell(&self) -> Spell {
        Spell::new(self.onset, self.terminus)
    }
}

/// Unordered dyad `u < v` with sorted, pairwise disjoint spells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadEdge {
    pub u: String,
    pub v: String,
    pub spells: Vec<EdgeSpell>,
}

impl DyadEdge {
    pub fn other(&self, user: &str) -> Option<&str> {
        if self.u == user {
            Some(&self.v)
        } else if self.v == user {
            Some(&self.u)
        } else {
            None
        }
    }

    pub fn touches(&self, user: &str) -> bool {
        self.u == user || self.v == user
    }

    pub fn active_on(&self, day: Day) -> Option<&EdgeSpell> {
        self.spells.iter().find(|s| s.spell().contains(day))
    }

    pub fn check(&self) -> Result<(), GraphError> {
        if self.u >= self.v {
            return Err(GraphError::Invariant(format!(
                "dyad ({}, {}) is not ordered",
                self.u, self.v
            )));
        }
        for s in &self.spells {
            if s.onset > s.terminus {
                return Err(GraphError::Invariant(format!(
                    "dyad ({}, {}): spell ({}, {}) ends before it starts",
                    self.u, self.v, s.onset, s.terminus
                )));
            }
        }
        for w in self.spells.windows(2) {
            if w[0].terminus >= w[1].onset {
                return Err(GraphError::Invariant(format!(
                    "dyad ({}, {}): spells ({}, {}) and ({}, {}) overlap or are unsorted",
                    self.u, self.v, w[0].onset, w[0].terminus, w[1].onset, w[1].terminus
                )));
            }
        }
        Ok(())
    }
}

/// Groups interactions into dyads and resolves overlapping spells.
///
/// Interaction `i` on day `d_i` provisionally spans `[d_i, d_i + window]`.
/// Of several interactions on one day only the latest survives; each
/// survivor's spell is then cut to end the day before the next survivor.
/// The result is independent of input order; dyads come out sorted.
pub fn spellize(interactions: &[Interaction], window: u32) -> Vec<DyadEdge> {
    let mut by_dyad: BTreeMap<(&str, &str), Vec<&Interaction>> = BTreeMap::new();
    for it in interactions {
        if it.from == it.to {
            continue;
        }
        by_dyad.entry(it.dyad()).or_default().push(it);
    }
    by_dyad
        .into_iter()
        .map(|((u, v), mut items)| {
            items.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
            // most recent of each day wins
            let mut kept: Vec<&Interaction> = Vec::with_capacity(items.len());
            for it in items {
                match kept.last_mut() {
                    Some(last) if last.day == it.day => *last = it,
                    _ => kept.push(it),
                }
            }
            let spells = kept
                .iter()
                .enumerate()
                .map(|(k, it)| {
                    let mut terminus = it.day + Day::from(window);
                    if let Some(next) = kept.get(k + 1) {
                        terminus = terminus.min(next.day - 1);
                    }
                    EdgeSpell {
                        onset: it.day,
                        terminus,
                        from: it.from.clone(),
                        to: it.to.clone(),
                        edge_type: it.edge_type,
                        tweet_id: it.tweet_id.clone(),
                        text: it.text.clone(),
                        sentiment: it.sentiment,
                        keyword_flag: it.keyword_flag,
                    }
                })
                .collect();
            DyadEdge {
                u: u.to_string(),
                v: v.to_string(),
                spells,
            }
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use chrono::{Duration, TimeZone};

    pub fn epoch() -> NaiveDate {
        NaiveDate::from_ymd_opt(2023, 3, 15).unwrap()
    }

    /// Interaction on `day` at `minute` past midnight.
    pub fn inter(id: &str, from: &str, to: &str, day: Day, minute: i64) -> Interaction {
        let created_at = Utc.from_utc_datetime(&epoch().and_hms_opt(0, 0, 0).unwrap())
            + Duration::days(day)
            + Duration::minutes(minute);
        Interaction {
            tweet_id: id.into(),
            created_at,
            day,
            from: from.into(),
            to: to.into(),
            edge_type: EdgeType::Mention,
            text: format!("tweet {id}"),
            sentiment: 0.0,
            keyword_flag: 0,
        }
    }
}
