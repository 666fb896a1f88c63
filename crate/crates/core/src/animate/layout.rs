//! Force-directed layout with warm starts across slices.
//!
//! Only `+ - * /` and `sqrt` are used, so positions are bit-identical on
//! every IEEE-754 platform for the same inputs and seed.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::temporal::{Day, TemporalNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

pub type Positions = BTreeMap<String, Point>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub iterations: usize,
    /// Step cap at the first iteration for nodes placed fresh, in layout units.
    pub cold_temperature: f64,
    /// Step cap for nodes carried over from the previous slice.
    pub warm_temperature: f64,
    /// Pull toward the origin, relative to the ideal edge length.
    pub gravity: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            iterations: 300,
            cold_temperature: 0.1,
            warm_temperature: 0.002,
            gravity: 0.05,
        }
    }
}

const AREA: f64 = 1.0;
const SEED_RADIUS: f64 = 0.5;

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Deterministic starting point for a node with no previous position: a
/// point near the circle of radius 0.5, chosen from `(seed, user)`.
pub fn seed_position(seed: u64, user: &str) -> Point {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ fnv1a(user));
    // rational circle parametrization keeps this trig-free
    let t: f64 = rng.gen_range(-1.0..1.0);
    let flip = rng.gen_bool(0.5);
    let r = SEED_RADIUS * rng.gen_range(0.9..1.1);
    let d = 1.0 + t * t;
    let x = (1.0 - t * t) / d;
    let y = 2.0 * t / d;
    Point {
        x: r * if flip { -x } else { x },
        y: r * y,
    }
}

/// Runs the force simulation in place. `temperature[i]` caps node `i`'s
/// first step; caps cool linearly to zero.
fn fruchterman_reingold(
    pos: &mut [Point],
    edges: &[(usize, usize)],
    temperature: &[f64],
    params: &LayoutParams,
) {
    let n = pos.len();
    if n < 2 {
        return;
    }
    let k = (AREA / n as f64).sqrt();
    let k2 = k * k;
    let mut disp = vec![Point { x: 0.0, y: 0.0 }; n];
    for it in 0..params.iterations {
        disp.iter_mut().for_each(|d| *d = Point { x: 0.0, y: 0.0 });
        for i in 0..n {
            for j in (i + 1)..n {
                let (mut dx, mut dy) = (pos[i].x - pos[j].x, pos[i].y - pos[j].y);
                let mut d2 = dx * dx + dy * dy;
                if d2 < 1e-18 {
                    // coincident: push apart along x in index order
                    dx = 1e-6;
                    dy = 0.0;
                    d2 = dx * dx;
                }
                // k^2 / d along the unit vector: (dx, dy) * k^2 / d^2
                let f = k2 / d2;
                disp[i].x += dx * f;
                disp[i].y += dy * f;
                disp[j].x -= dx * f;
                disp[j].y -= dy * f;
            }
        }
        for &(u, v) in edges {
            let (dx, dy) = (pos[u].x - pos[v].x, pos[u].y - pos[v].y);
            let d = (dx * dx + dy * dy).sqrt();
            // d^2 / k along the unit vector: (dx, dy) * d / k
            let f = d / k;
            disp[u].x -= dx * f;
            disp[u].y -= dy * f;
            disp[v].x += dx * f;
            disp[v].y += dy * f;
        }
        let g = params.gravity / k;
        for i in 0..n {
            disp[i].x -= pos[i].x * g;
            disp[i].y -= pos[i].y * g;
        }
        let cool = 1.0 - it as f64 / params.iterations as f64;
        for i in 0..n {
            let len = (disp[i].x * disp[i].x + disp[i].y * disp[i].y).sqrt();
            if len > 0.0 {
                let step = len.min(temperature[i] * cool);
                pos[i].x += disp[i].x / len * step;
                pos[i].y += disp[i].y / len * step;
            }
        }
    }
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Lays out the slice of each day in `days`, starting every slice from the
/// previous slice's positions. Nodes seen for the first time start from
/// [`seed_position`]. Output coordinates are rounded to 4 decimals.
pub fn layout_sequence(
    net: &TemporalNetwork,
    days: &[Day],
    seed: u64,
    params: &LayoutParams,
) -> BTreeMap<Day, Positions> {
    debug_assert!(days.windows(2).all(|w| w[0] <= w[1]));
    let mut carried: Positions = BTreeMap::new();
    let mut out = BTreeMap::new();
    for &day in days {
        let slice = net.slice(day);
        let ids: Vec<&str> = slice.nodes.iter().map(|n| n.user_id.as_str()).collect();
        let index = |u: &str| ids.binary_search(&u).expect("slice edge endpoints are slice nodes");
        let edges: Vec<(usize, usize)> = slice.edges.iter().map(|e| (index(&e.u), index(&e.v))).collect();
        let mut pos = Vec::with_capacity(ids.len());
        let mut temp = Vec::with_capacity(ids.len());
        for u in &ids {
            match carried.get(*u) {
                Some(p) => {
                    pos.push(*p);
                    temp.push(params.warm_temperature);
                }
                None => {
                    pos.push(seed_position(seed, u));
                    temp.push(params.cold_temperature);
                }
            }
        }
        fruchterman_reingold(&mut pos, &edges, &temp, params);
        let positions: Positions = ids
            .iter()
            .zip(&pos)
            .map(|(u, p)| {
                (
                    u.to_string(),
                    Point {
                        x: round4(p.x),
                        y: round4(p.y),
                    },
                )
            })
            .collect();
        // nodes that drop out keep their last position for when they return
        for (u, p) in &positions {
            carried.insert(u.clone(), *p);
        }
        out.insert(day, positions);
    }
    out
}

/// Largest distance between two positioned nodes.
pub fn diameter(pos: &Positions) -> f64 {
    let pts: Vec<&Point> = pos.values().collect();
    let mut best = 0.0f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let (dx, dy) = (pts[i].x - pts[j].x, pts[i].y - pts[j].y);
            best = best.max((dx * dx + dy * dy).sqrt());
        }
    }
    best
}
