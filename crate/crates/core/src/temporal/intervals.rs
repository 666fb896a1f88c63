use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Day, DyadEdge, EdgeSpell, GraphError, Spell};

/// Node attributes over one activity interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeInterval {
    pub user_id: String,
    pub onset: Day,
    pub terminus: Day,
    /// Incident edge spells intersecting the interval.
    pub degree: u32,
    pub mean_sentiment: f64,
    pub keyword_any: u8,
}

impl NodeInterval {
    pub fn spell(&self) -> Spell {
        Spell::new(self.onset, self.terminus)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentAggregation {
    #[default]
    Mean,
    /// Sentiment of the most recent incident interaction.
    Latest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordAggregation {
    /// 1 if any incident interaction carries a keyword.
    #[default]
    Max,
    Latest,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntervalAggregation {
    pub sentiment: SentimentAggregation,
    pub keyword: KeywordAggregation,
}

/// Activity intervals of `user`.
///
/// Boundaries are the distinct days on which an incident spell starts. The
/// interval anchored at day `a` runs to `a + window`, cut to the day before
/// the next anchor. Statistics are taken over every incident spell that
/// intersects the interval.
pub fn node_intervals(
    dyads: &[DyadEdge],
    user: &str,
    window: u32,
    agg: IntervalAggregation,
) -> Result<Vec<NodeInterval>, GraphError> {
    let incident: Vec<&EdgeSpell> = dyads
        .iter()
        .filter(|d| d.touches(user))
        .flat_map(|d| d.spells.iter())
        .collect();
    if incident.is_empty() {
        return Err(GraphError::UnknownUser(user.to_string()));
    }
    Ok(intervals_from_spells(user, &incident, window, agg))
}

pub(super) fn intervals_from_spells(
    user: &str,
    incident: &[&EdgeSpell],
    window: u32,
    agg: IntervalAggregation,
) -> Vec<NodeInterval> {
    let anchors: Vec<Day> = incident
        .iter()
        .map(|s| s.onset)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    anchors
        .iter()
        .enumerate()
        .map(|(k, &onset)| {
            let mut terminus = onset + Day::from(window);
            if let Some(&next) = anchors.get(k + 1) {
                terminus = terminus.min(next - 1);
            }
            let span = Spell::new(onset, terminus);
            let mut active: Vec<&EdgeSpell> = incident
                .iter()
                .copied()
                .filter(|s| s.spell().intersects(&span))
                .collect();
            active.sort_by(|a, b| (a.onset, &a.tweet_id).cmp(&(b.onset, &b.tweet_id)));
            let latest = active.last().expect("anchor spell intersects its interval");
            let mean_sentiment = match agg.sentiment {
                SentimentAggregation::Mean => {
                    active.iter().map(|s| s.sentiment).sum::<f64>() / active.len() as f64
                }
                SentimentAggregation::Latest => latest.sentiment,
            };
            let keyword_any = match agg.keyword {
                KeywordAggregation::Max => active.iter().map(|s| s.keyword_flag).max().unwrap_or(0),
                KeywordAggregation::Latest => latest.keyword_flag,
            };
            NodeInterval {
                user_id: user.to_string(),
                onset,
                terminus,
                degree: active.len() as u32,
                mean_sentiment,
                keyword_any,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::test_support::inter;
    use super::super::{spellize, Interaction};
    use super::*;

    fn with_codes(mut it: Interaction, sentiment: f64, kw: u8) -> Interaction {
        it.sentiment = sentiment;
        it.keyword_flag = kw;
        it
    }

    #[test]
    fn single_interaction_interval() {
        let dyads = spellize(&[with_codes(inter("1", "A", "B", 1, 0), 0.2, 1)], 4);
        let iv = node_intervals(&dyads, "A", 4, Default::default()).unwrap();
        assert_eq!(iv.len(), 1);
        assert_eq!((iv[0].onset, iv[0].terminus, iv[0].degree), (1, 5, 1));
        assert_eq!(iv[0].mean_sentiment, 0.2);
        assert_eq!(iv[0].keyword_any, 1);
    }

    #[test]
    fn second_interval_counts_both_active_interactions() {
        let dyads = spellize(
            &[
                with_codes(inter("1", "A", "B", 1, 0), 0.4, 0),
                with_codes(inter("2", "C", "A", 2, 0), -0.2, 1),
            ],
            4,
        );
        let iv = node_intervals(&dyads, "A", 4, Default::default()).unwrap();
        let spans: Vec<_> = iv.iter().map(|i| (i.onset, i.terminus, i.degree)).collect();
        assert_eq!(spans, vec![(1, 1, 1), (2, 6, 2)]);
        assert!((iv[1].mean_sentiment - 0.1).abs() < 1e-12);
        assert_eq!(iv[1].keyword_any, 1);
        assert_eq!(iv[0].keyword_any, 0);

        let latest = IntervalAggregation {
            sentiment: SentimentAggregation::Latest,
            keyword: KeywordAggregation::Latest,
        };
        let iv = node_intervals(&dyads, "A", 4, latest).unwrap();
        assert_eq!(iv[1].mean_sentiment, -0.2);
    }

    #[test]
    fn gap_between_intervals() {
        let dyads = spellize(&[inter("1", "A", "B", 0, 0), inter("2", "A", "C", 20, 0)], 4);
        let iv = node_intervals(&dyads, "A", 4, Default::default()).unwrap();
        let spans: Vec<_> = iv.iter().map(|i| (i.onset, i.terminus)).collect();
        assert_eq!(spans, vec![(0, 4), (20, 24)]);
    }

    #[test]
    fn unknown_user() {
        let dyads = spellize(&[inter("1", "A", "B", 0, 0)], 4);
        assert_eq!(
            node_intervals(&dyads, "Z", 4, Default::default()),
            Err(GraphError::UnknownUser("Z".into()))
        );
    }
}
