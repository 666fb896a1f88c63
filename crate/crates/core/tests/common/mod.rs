//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use tweetscope::network::EdgeType;
use tweetscope::paths::TraversalMode;
use tweetscope::temporal::{Day, Interaction, TemporalNetwork};

pub fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(2023, 3, 15).unwrap()
}

pub fn interaction(id: &str, from: &str, to: &str, day: Day, second: i64) -> Interaction {
    Interaction {
        tweet_id: id.into(),
        created_at: Utc.from_utc_datetime(&epoch().and_hms_opt(0, 0, 0).unwrap())
            + Duration::days(day)
            + Duration::seconds(second),
        day,
        from: from.into(),
        to: to.into(),
        edge_type: EdgeType::Mention,
        text: String::new(),
        sentiment: 0.0,
        keyword_flag: 0,
    }
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

/// Which interaction is active on `day` under most-recent-wins, simulated
/// one day at a time: the latest interaction started on or before `day`,
/// provided it started no more than `window` days earlier.
pub fn active_by_simulation(items: &[Interaction], day: Day, window: u32) -> Option<&str> {
    let latest = items
        .iter()
        .filter(|i| i.day <= day)
        .max_by(|a, b| (a.day, a.created_at, &a.tweet_id).cmp(&(b.day, b.created_at, &b.tweet_id)))?;
    (day - latest.day <= Day::from(window)).then_some(latest.tweet_id.as_str())
}

/// Random network on up to `max_nodes` users with at most `max_spells`
/// interactions, each on its own day per dyad so every one becomes a spell.
pub fn random_network<R: Rng>(rng: &mut R, max_nodes: usize, max_spells: usize) -> TemporalNetwork {
    let n = rng.gen_range(2..=max_nodes);
    let users: Vec<String> = (0..n).map(|k| format!("n{k:02}")).collect();
    let m = rng.gen_range(0..=max_spells);
    let window = rng.gen_range(0..=4u32);
    let mut used: BTreeMap<(String, String), Vec<Day>> = BTreeMap::new();
    let mut items = Vec::new();
    for k in 0..m {
        let pair: Vec<&String> = users.choose_multiple(rng, 2).collect();
        let (from, to) = (pair[0].clone(), pair[1].clone());
        let key = if from < to { (from.clone(), to.clone()) } else { (to.clone(), from.clone()) };
        let day = rng.gen_range(0..15);
        let days = used.entry(key).or_default();
        if days.contains(&day) {
            continue;
        }
        days.push(day);
        items.push(interaction(&format!("e{k:03}"), &from, &to, day, 0));
    }
    let profiles: Vec<_> = users.iter().map(|u| tweetscope::network::NodeProfile::stub(u)).collect();
    TemporalNetwork::build(&items, &profiles, epoch(), window, Default::default())
}

/// (from, to, onset, terminus) for every spell direction usable in `mode`.
fn arcs(net: &TemporalNetwork, mode: TraversalMode) -> Vec<(String, String, Day, Day)> {
    let mut out = Vec::new();
    for d in &net.edges {
        for s in &d.spells {
            out.push((s.from.clone(), s.to.clone(), s.onset, s.terminus));
            if mode == TraversalMode::Undirected {
                out.push((s.to.clone(), s.from.clone(), s.onset, s.terminus));
            }
        }
    }
    out
}

/// Earliest arrival at every node by enumerating every simple
/// time-respecting path from `root`.
pub fn brute_forward(net: &TemporalNetwork, root: &str, start: Day, mode: TraversalMode) -> BTreeMap<String, Day> {
    fn go(
        arcs: &[(String, String, Day, Day)],
        at: &str,
        t: Day,
        path: &mut Vec<String>,
        best: &mut BTreeMap<String, Day>,
    ) {
        let e = best.entry(at.to_string()).or_insert(t);
        *e = (*e).min(t);
        for (f, to, o, term) in arcs {
            if f != at || path.contains(to) {
                continue;
            }
            let day = t.max(*o);
            if day <= *term {
                path.push(to.clone());
                go(arcs, to, day, path, best);
                path.pop();
            }
        }
    }
    let arcs = arcs(net, mode);
    let mut best = BTreeMap::new();
    go(&arcs, root, start, &mut vec![root.to_string()], &mut best);
    best
}

/// Latest departure from every node that can still reach `root` by `end`,
/// by enumerating every simple time-respecting path into `root`.
pub fn brute_backward(net: &TemporalNetwork, root: &str, end: Day, mode: TraversalMode) -> BTreeMap<String, Day> {
    fn go(
        arcs: &[(String, String, Day, Day)],
        at: &str,
        t: Day,
        path: &mut Vec<String>,
        best: &mut BTreeMap<String, Day>,
    ) {
        let e = best.entry(at.to_string()).or_insert(t);
        *e = (*e).max(t);
        for (from, to, o, term) in arcs {
            if to != at || path.contains(from) {
                continue;
            }
            let day = t.min(*term);
            if day >= *o {
                path.push(from.clone());
                go(arcs, from, day, path, best);
                path.pop();
            }
        }
    }
    let arcs = arcs(net, mode);
    let mut best = BTreeMap::new();
    go(&arcs, root, end, &mut vec![root.to_string()], &mut best);
    best
}

/// Checks predecessor links: each hop is a real transmission, generations
/// count hops, and no reached node offers a better (day, generation, id).
pub fn check_tree_labels(
    net: &TemporalNetwork,
    tree: &tweetscope::paths::PathTree,
) -> Result<(), String> {
    use tweetscope::paths::Direction;
    let arcs = arcs(net, tree.mode);
    let forward = tree.direction == Direction::Forward;
    // candidate label offered to `child` by reached node `w` over one arc
    let offer = |w: &str, child: &str| -> Option<(Day, u32)> {
        let we = tree.entries.get(w)?;
        arcs.iter()
            .filter_map(|(f, t, o, term)| {
                if forward && f == w && t == child {
                    let d = we.arrival_day.max(*o);
                    (d <= *term).then_some(d)
                } else if !forward && t == w && f == child {
                    let d = we.arrival_day.min(*term);
                    (d >= *o).then_some(d)
                } else {
                    None
                }
            })
            .reduce(|a, b| if forward { a.min(b) } else { a.max(b) })
            .map(|d| (d, we.generation + 1))
    };
    let root = tree.entries.get(&tree.root).ok_or("root missing")?;
    if root.generation != 0 || root.predecessor.is_some() || root.arrival_day != tree.start_day {
        return Err("root label wrong".into());
    }
    for (u, e) in &tree.entries {
        if *u == tree.root {
            continue;
        }
        let p = e.predecessor.as_deref().ok_or(format!("{u} has no predecessor"))?;
        let pe = tree.entries.get(p).ok_or(format!("{u}'s predecessor {p} not in tree"))?;
        if e.generation != pe.generation + 1 {
            return Err(format!("{u}: generation {} after {}", e.generation, pe.generation));
        }
        if offer(p, u).map(|(d, _)| d) != Some(e.arrival_day) {
            return Err(format!("{u}: no transmission from {p} on day {}", e.arrival_day));
        }
        // key: earlier (forward) or later (backward) day, then generation, then id
        let key = |d: Day, g: u32, id: &str| (if forward { d } else { -d }, g, id.to_string());
        let mine = key(e.arrival_day, e.generation, p);
        for w in tree.entries.keys() {
            if w == u {
                continue;
            }
            if let Some((d, g)) = offer(w, u) {
                if key(d, g, w) < mine {
                    return Err(format!("{u}: {w} offers a better label than {p}"));
                }
            }
        }
    }
    Ok(())
}
