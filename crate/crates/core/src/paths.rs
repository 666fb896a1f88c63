//! Time-respecting reachability over a [`TemporalNetwork`].
//!
//! Information sits at a node from the day it arrives and can cross any
//! incident spell `[o, t]` on day `max(arrival, o)` as long as that day is
//! not after `t`. Waiting is free. Forward trees record the earliest arrival
//! at every reachable node; backward trees record the latest day a node can
//! still start a chain that reaches the root in time.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::temporal::{Day, GraphError, TemporalNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Which spells may carry information away from a reached node.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraversalMode {
    /// Any incident spell.
    #[default]
    Undirected,
    /// Only spells whose interaction points from sender to receiver.
    Directed,
}

impl std::str::FromStr for TraversalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "undirected" => Ok(TraversalMode::Undirected),
            "directed" => Ok(TraversalMode::Directed),
            other => Err(format!("unknown traversal mode `{other}` (undirected|directed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEntry {
    /// Arrival day for forward trees, latest departure day for backward ones.
    pub arrival_day: Day,
    pub generation: u32,
    pub predecessor: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathTree {
    pub root: String,
    pub direction: Direction,
    pub start_day: Day,
    pub mode: TraversalMode,
    pub entries: BTreeMap<String, PathEntry>,
}

impl PathTree {
    pub fn contains(&self, user: &str) -> bool {
        self.entries.contains_key(user)
    }

    /// Users in the tree by `day`: arrived for forward trees, already
    /// departed-able (departure day at or after `day`) for backward ones.
    pub fn member_on(&self, user: &str, day: Day) -> bool {
        self.entries.get(user).is_some_and(|e| match self.direction {
            Direction::Forward => e.arrival_day <= day,
            Direction::Backward => e.arrival_day >= day,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Directed arc `from -> to` usable on days `[onset, terminus]`.
#[derive(Debug, Clone, Copy)]
struct Arc {
    to: usize,
    onset: Day,
    terminus: Day,
}

fn arcs(net: &TemporalNetwork, mode: TraversalMode, reversed: bool) -> Vec<Vec<Arc>> {
    let index = |u: &str| {
        net.nodes
            .binary_search_by(|n| n.profile.user_id.as_str().cmp(u))
            .expect("dyad endpoints are network nodes")
    };
    let mut adj = vec![Vec::new(); net.nodes.len()];
    let mut push = |from: usize, to: usize, onset: Day, terminus: Day| {
        if reversed {
            // run time backwards: the arc flips and the days negate
            adj[to].push(Arc {
                to: from,
                onset: -terminus,
                terminus: -onset,
            });
        } else {
            adj[from].push(Arc { to, onset, terminus });
        }
    };
    for d in &net.edges {
        for s in &d.spells {
            let (f, t) = (index(&s.from), index(&s.to));
            push(f, t, s.onset, s.terminus);
            if mode == TraversalMode::Undirected {
                push(t, f, s.onset, s.terminus);
            }
        }
    }
    adj
}

type Label = (Day, u32, Option<usize>);

/// Earliest-arrival search. Labels compare by (arrival, generation,
/// predecessor index); node indices follow user id order, so the last key
/// breaks ties by predecessor id.
fn earliest_arrival(adj: &[Vec<Arc>], root: usize, start: Day) -> Vec<Option<Label>> {
    let mut best: Vec<Option<Label>> = vec![None; adj.len()];
    let mut done = vec![false; adj.len()];
    let mut heap = BinaryHeap::new();
    best[root] = Some((start, 0, None));
    heap.push(Reverse((start, 0u32, None::<usize>, root)));
    while let Some(Reverse((a, g, p, x))) = heap.pop() {
        if done[x] || best[x] != Some((a, g, p)) {
            continue;
        }
        done[x] = true;
        for arc in &adj[x] {
            let day = a.max(arc.onset);
            if day > arc.terminus || done[arc.to] {
                continue;
            }
            let cand = (day, g + 1, Some(x));
            if best[arc.to].is_none_or(|b| cand < b) {
                best[arc.to] = Some(cand);
                heap.push(Reverse((cand.0, cand.1, cand.2, arc.to)));
            }
        }
    }
    best
}

fn build_tree(
    net: &TemporalNetwork,
    root: &str,
    day: Day,
    mode: TraversalMode,
    direction: Direction,
) -> Result<PathTree, GraphError> {
    let root_idx = net
        .nodes
        .binary_search_by(|n| n.profile.user_id.as_str().cmp(root))
        .map_err(|_| GraphError::UnknownUser(root.to_string()))?;
    let reversed = direction == Direction::Backward;
    let adj = arcs(net, mode, reversed);
    let start = if reversed { -day } else { day };
    let labels = earliest_arrival(&adj, root_idx, start);
    let id = |i: usize| net.nodes[i].profile.user_id.clone();
    let entries = labels
        .into_iter()
        .enumerate()
        .filter_map(|(i, l)| {
            let (a, g, p) = l?;
            Some((
                id(i),
                PathEntry {
                    arrival_day: if reversed { -a } else { a },
                    generation: g,
                    predecessor: p.map(id),
                },
            ))
        })
        .collect();
    Ok(PathTree {
        root: root.to_string(),
        direction,
        start_day: day,
        mode,
        entries,
    })
}

/// Earliest-arrival tree of everyone `root` can reach from `start_day` on.
///
/// Generation is the hop count along the tree. Among equal arrivals the
/// smaller generation wins, then the smaller predecessor id.
pub fn forward_path(
    net: &TemporalNetwork,
    root: &str,
    start_day: Day,
    mode: TraversalMode,
) -> Result<PathTree, GraphError> {
    build_tree(net, root, start_day, mode, Direction::Forward)
}

/// Latest-departure tree of everyone who can reach `root` by `end_day`.
///
/// Entry days are the latest day a node can pass information on and still
/// reach the root in time. In directed mode only spells pointing toward the
/// already-reached node count.
pub fn backward_path(
    net: &TemporalNetwork,
    root: &str,
    end_day: Day,
    mode: TraversalMode,
) -> Result<PathTree, GraphError> {
    build_tree(net, root, end_day, mode, Direction::Backward)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimelineRow {
    pub user_id: String,
    pub arrival_day: Day,
    pub generation: u32,
}

/// Tree entries sorted by (arrival day, generation, user id).
pub fn transmission_timeline(tree: &PathTree) -> Vec<TimelineRow> {
    let mut rows: Vec<TimelineRow> = tree
        .entries
        .iter()
        .map(|(u, e)| TimelineRow {
            user_id: u.clone(),
            arrival_day: e.arrival_day,
            generation: e.generation,
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.arrival_day, a.generation, &a.user_id).cmp(&(b.arrival_day, b.generation, &b.user_id))
    });
    rows
}

pub fn write_timeline<W: Write>(rows: &[TimelineRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["user_id", "arrival_day", "generation"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timeline<R: std::io::Read>(input: R) -> csv::Result<Vec<TimelineRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Scatter of arrival day (x) against generation (y), 800x400 viewBox.
pub fn timeline_svg(rows: &[TimelineRow], title: &str) -> String {
    const W: f64 = 800.0;
    const H: f64 = 400.0;
    const M: f64 = 50.0;
    let (d0, d1) = match (rows.iter().map(|r| r.arrival_day).min(), rows.iter().map(|r| r.arrival_day).max()) {
        (Some(a), Some(b)) => (a, b.max(a + 1)),
        _ => (0, 1),
    };
    let g1 = rows.iter().map(|r| r.generation).max().unwrap_or(0).max(1);
    let x = |d: Day| M + (W - 2.0 * M) * (d - d0) as f64 / (d1 - d0) as f64;
    let y = |g: u32| H - M - (H - 2.0 * M) * f64::from(g) / f64::from(g1);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 400" width="800" height="400">"#
    );
    let _ = writeln!(s, r##"<rect width="800" height="400" fill="#FFFFFF"/>"##);
    let _ = writeln!(s, r#"<text x="400" y="24" text-anchor="middle" font-size="16">{}</text>"#, escape_xml(title));
    let _ = writeln!(
        s,
        r##"<line x1="{M}" y1="{b}" x2="{r}" y2="{b}" stroke="#000000"/><line x1="{M}" y1="{M}" x2="{M}" y2="{b}" stroke="#000000"/>"##,
        b = H - M,
        r = W - M
    );
    let _ = writeln!(s, r#"<text x="400" y="390" text-anchor="middle" font-size="12">day</text>"#);
    let _ = writeln!(
        s,
        r#"<text x="14" y="200" text-anchor="middle" font-size="12" transform="rotate(-90 14 200)">generation</text>"#
    );
    for (d, label) in [(d0, d0), (d1, d1)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="10">{label}</text>"#,
            x(d),
            H - M + 14.0
        );
    }
    for g in [0, g1] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{g}</text>"#,
            M - 6.0,
            y(g) + 3.0
        );
    }
    for r in rows {
        let _ = writeln!(
            s,
            r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#1F77B4" fill-opacity="0.7"><title>{} day {} gen {}</title></circle>"##,
            x(r.arrival_day),
            y(r.generation),
            escape_xml(&r.user_id),
            r.arrival_day,
            r.generation
        );
    }
    s.push_str("</svg>\n");
    s
}

pub(crate) fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OverlapClass {
    #[serde(rename = "A_only")]
    AOnly,
    #[serde(rename = "B_only")]
    BOnly,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "neither")]
    Neither,
}

/// Classifies every network node by membership in two trees on `day`.
pub fn overlap_classes(
    net: &TemporalNetwork,
    a: &PathTree,
    b: &PathTree,
    day: Day,
) -> BTreeMap<String, OverlapClass> {
    net.user_ids()
        .map(|u| {
            let class = match (a.member_on(u, day), b.member_on(u, day)) {
                (true, true) => OverlapClass::Both,
                (true, false) => OverlapClass::AOnly,
                (false, true) => OverlapClass::BOnly,
                (false, false) => OverlapClass::Neither,
            };
            (u.to_string(), class)
        })
        .collect()
}

/// Overlap classes for each day, keyed by day.
pub fn overlap_series(
    net: &TemporalNetwork,
    a: &PathTree,
    b: &PathTree,
    days: &[Day],
) -> BTreeMap<Day, BTreeMap<String, OverlapClass>> {
    days.iter()
        .map(|&d| (d, overlap_classes(net, a, b, d)))
        .collect()
}

/// Number of nodes per class.
pub fn class_counts(classes: &BTreeMap<String, OverlapClass>) -> BTreeMap<OverlapClass, usize> {
    let mut out = BTreeMap::new();
    for c in classes.values() {
        *out.entry(*c).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::test_support::{epoch, inter};
    use crate::temporal::Interaction;

    fn net(items: &[Interaction], window: u32) -> TemporalNetwork {
        TemporalNetwork::build(items, &[], epoch(), window, Default::default())
    }

    /// A-B spell (1,5), B-C spell (3,7).
    fn chain() -> TemporalNetwork {
        net(&[inter("1", "A", "B", 1, 0), inter("2", "B", "C", 3, 0)], 4)
    }

    fn arrival(t: &PathTree, u: &str) -> Option<(Day, u32)> {
        t.entries.get(u).map(|e| (e.arrival_day, e.generation))
    }

    #[test]
    fn chain_forward() {
        let t = forward_path(&chain(), "A", 1, TraversalMode::Undirected).unwrap();
        assert_eq!(arrival(&t, "A"), Some((1, 0)));
        assert_eq!(arrival(&t, "B"), Some((1, 1)));
        assert_eq!(arrival(&t, "C"), Some((3, 2)));
        assert_eq!(t.entries["C"].predecessor.as_deref(), Some("B"));
        assert_eq!(t.entries["A"].predecessor, None);
        let rows: Vec<_> = transmission_timeline(&t)
            .into_iter()
            .map(|r| (r.user_id, r.arrival_day, r.generation))
            .collect();
        assert_eq!(
            rows,
            vec![("A".into(), 1, 0), ("B".into(), 1, 1), ("C".into(), 3, 2)]
        );
    }

    #[test]
    fn expired_spell_blocks() {
        // A-B spell (1,1), B-C spell (3,7), start on day 2
        let mut n = chain();
        n.edges[0].spells[0].terminus = 1;
        let t = forward_path(&n, "A", 2, TraversalMode::Undirected).unwrap();
        assert_eq!(t.entries.keys().collect::<Vec<_>>(), vec!["A"]);
        let t = forward_path(&n, "A", 1, TraversalMode::Undirected).unwrap();
        assert_eq!(arrival(&t, "C"), Some((3, 2)));
    }

    #[test]
    fn isolated_root_and_unknown_root() {
        let n = TemporalNetwork::build(
            &[inter("1", "A", "B", 1, 0)],
            &[crate::network::NodeProfile::stub("Z")],
            epoch(),
            4,
            Default::default(),
        );
        let t = forward_path(&n, "Z", 0, TraversalMode::Undirected).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(arrival(&t, "Z"), Some((0, 0)));
        let t = backward_path(&n, "Z", 10, TraversalMode::Undirected).unwrap();
        assert_eq!(t.len(), 1);
        assert!(forward_path(&n, "nobody", 0, TraversalMode::Undirected).is_err());
    }

    #[test]
    fn backward_chain() {
        let t = backward_path(&chain(), "C", 7, TraversalMode::Undirected).unwrap();
        // B passes on to C as late as day 7; A must hand to B by day 5
        assert_eq!(arrival(&t, "C"), Some((7, 0)));
        assert_eq!(arrival(&t, "B"), Some((7, 1)));
        assert_eq!(arrival(&t, "A"), Some((5, 2)));
        let t = backward_path(&chain(), "C", 2, TraversalMode::Undirected).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn directed_mode_follows_interaction_direction() {
        // A -> B (1,5), C -> B (3,7): from A nothing reaches C when directed
        let n = net(&[inter("1", "A", "B", 1, 0), inter("2", "C", "B", 3, 0)], 4);
        let und = forward_path(&n, "A", 1, TraversalMode::Undirected).unwrap();
        assert!(und.contains("C"));
        let dir = forward_path(&n, "A", 1, TraversalMode::Directed).unwrap();
        assert!(dir.contains("B") && !dir.contains("C"));
        let back = backward_path(&n, "B", 7, TraversalMode::Directed).unwrap();
        assert!(back.contains("A") && back.contains("C"));
    }

    #[test]
    fn ties_prefer_lower_generation_then_smaller_id() {
        // R reaches X directly on day 3 and via M on day 3; direct wins.
        let n = net(
            &[
                inter("1", "R", "M", 0, 0),
                inter("2", "M", "X", 3, 0),
                inter("3", "R", "X", 3, 0),
                inter("4", "R", "P", 0, 0),
                inter("5", "Q", "R", 0, 0),
                inter("6", "P", "Y", 2, 0),
                inter("7", "Q", "Y", 2, 0),
            ],
            4,
        );
        let t = forward_path(&n, "R", 0, TraversalMode::Undirected).unwrap();
        assert_eq!(arrival(&t, "X"), Some((3, 1)));
        assert_eq!(t.entries["Y"].predecessor.as_deref(), Some("P"));
    }

    #[test]
    fn overlap_by_day() {
        // X reached by A on day 3 and by B on day 6
        let n = net(&[inter("1", "A", "X", 3, 0), inter("2", "B", "X", 6, 0)], 4);
        let ta = forward_path(&n, "A", 0, TraversalMode::Undirected).unwrap();
        let tb = forward_path(&n, "B", 0, TraversalMode::Undirected).unwrap();
        assert_eq!(arrival(&ta, "X"), Some((3, 1)));
        assert_eq!(arrival(&tb, "X"), Some((6, 1)));
        assert_eq!(overlap_classes(&n, &ta, &tb, 4)["X"], OverlapClass::AOnly);
        assert_eq!(overlap_classes(&n, &ta, &tb, 6)["X"], OverlapClass::Both);
        let before = overlap_classes(&n, &ta, &tb, -1);
        assert!(before.values().all(|c| *c == OverlapClass::Neither));
        let json = serde_json::to_string(&overlap_series(&n, &ta, &tb, &[4])).unwrap();
        assert!(json.contains(r#""4":{"#) && json.contains(r#""X":"A_only""#));
    }

    #[test]
    fn timeline_csv_and_svg() {
        let t = forward_path(&chain(), "A", 1, TraversalMode::Undirected).unwrap();
        let rows = transmission_timeline(&t);
        let mut buf = Vec::new();
        write_timeline(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "user_id,arrival_day,generation\nA,1,0\nB,1,1\nC,3,2\n"
        );
        assert_eq!(read_timeline(buf.as_slice()).unwrap(), rows);
        let svg = timeline_svg(&rows, "A & co");
        assert!(svg.contains(r#"viewBox="0 0 800 400""#));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("A &amp; co"));
    }
}
