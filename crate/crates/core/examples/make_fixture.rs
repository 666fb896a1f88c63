//! Regenerates `fixtures/synthetic/`: a 200-post corpus over 29 days with
//! 30 users, plus profiles, a run config and the hashes of every artifact
//! the pipeline produces from it.
//!
//! Layout of the corpus:
//! - two groups, each led by a root (`u_elon`, `u_sama`) with a team of three,
//!   interact only inside their group until day 12;
//! - from day 12 two bridge users and a few cross-group posts connect them;
//! - an island of four users only ever talks among itself;
//! - keyword posts (risk/danger/harm) peak on day 13;
//! - 12 posts are off-topic and fail the query; 3 extra lines are malformed.
//!
//! Run with `cargo run -p tweetscope --example make_fixture`.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use tweetscope::ingest::TweetRecord;
use tweetscope::pipeline::{self, read_manifest};

const SEED: u64 = 20230315;

/// Posts per day, 29 days, 200 in total.
const PER_DAY: [usize; 29] = [
    6, 6, 7, 6, 7, 6, 7, 6, 7, 6, 7, 7, 9, 12, 10, 7, 7, 7, 6, 7, 6, 7, 6, 7, 6, 7, 6, 6, 6,
];
/// Keyword posts per day; the spike sits on day 13.
const KEYWORD_PER_DAY: [usize; 29] = [
    0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 3, 8, 4, 1, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0,
];
/// Days carrying one off-topic post each.
const OFF_TOPIC_DAYS: [usize; 12] = [1, 3, 5, 8, 10, 14, 16, 18, 21, 23, 25, 27];
/// First day cross-group interaction is allowed.
const BRIDGE_DAY: usize = 12;

const TOPICS: [&str; 4] = ["OpenAI", "ChatGPT", "GPT-4", "AI model"];
const POSITIVE: [&str; 4] = [
    "Really impressed by the new {t} release, great work!",
    "{t} makes my day so much better :)",
    "Love how fast {t} keeps improving",
    "The {t} demo was amazing and fun",
];
const NEGATIVE: [&str; 4] = [
    "{t} is overhyped and honestly disappointing",
    "I hate how {t} keeps failing at basic tasks",
    "Terrible experience with {t} today",
    "{t} answers are wrong and useless again",
];
const NEUTRAL: [&str; 4] = [
    "Reading the {t} announcement now",
    "Thoughts on {t} and what comes next?",
    "{t} update is out this week",
    "Comparing {t} with last year's version",
];
const KEYWORD: [&str; 4] = [
    "The {t} race carries a serious risk for everyone",
    "Experts warn of real danger from {t}",
    "Who takes responsibility when {t} causes harm?",
    "{t} risks are not a joke, slow down",
];
const OFF_TOPIC: [&str; 4] = [
    "Lunch was great today",
    "Traffic is terrible this morning",
    "Watching the game tonight with friends",
    "New coffee place opened downtown",
];

struct User {
    id: String,
    handle: String,
    name: String,
    bio: String,
    team: &'static str,
}

fn users() -> Vec<User> {
    let mut v = Vec::new();
    let mut add = |id: &str, handle: &str, name: &str, bio: &str, team: &'static str| {
        v.push(User {
            id: id.into(),
            handle: handle.into(),
            name: name.into(),
            bio: bio.into(),
            team,
        })
    };
    add("u_elon", "elonmusk", "Elon", "Rockets, cars, and opinions", "musk");
    add("u_m1", "mteam_one", "M One", "Engineer", "musk");
    add("u_m2", "mteam_two", "M Two", "Investor", "musk");
    add("u_m3", "mteam_three", "M Three", "Writer", "musk");
    add("u_sama", "sama", "Sam", "Building AGI", "openai");
    add("u_o1", "oteam_one", "O One", "Researcher", "openai");
    add("u_o2", "oteam_two", "O Two", "Policy", "openai");
    add("u_o3", "oteam_three", "O Three", "Product", "openai");
    for k in 1..=22 {
        add(
            &format!("u_a{k:02}"),
            &format!("user{k:02}"),
            &format!("User {k}"),
            "Tech enthusiast",
            "none",
        );
    }
    v
}

fn group_m() -> Vec<String> {
    let mut g: Vec<String> = ["u_elon", "u_m1", "u_m2", "u_m3"].map(String::from).to_vec();
    g.extend((1..=8).map(|k| format!("u_a{k:02}")));
    g
}

fn group_o() -> Vec<String> {
    let mut g: Vec<String> = ["u_sama", "u_o1", "u_o2", "u_o3"].map(String::from).to_vec();
    g.extend((9..=16).map(|k| format!("u_a{k:02}")));
    g
}

fn island() -> Vec<String> {
    (17..=20).map(|k| format!("u_a{k:02}")).collect()
}

const BRIDGES: [&str; 2] = ["u_a21", "u_a22"];

fn pick<'a>(rng: &mut ChaCha8Rng, from: &'a [String]) -> &'a String {
    from.choose(rng).expect("non-empty group")
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic");
    std::fs::create_dir_all(&dir).unwrap();
    let users = users();
    let handle = |id: &str| users.iter().find(|u| u.id == id).unwrap().handle.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let epoch = NaiveDate::from_ymd_opt(2023, 3, 15).unwrap();
    let (gm, go, isl) = (group_m(), group_o(), island());

    let mut records: Vec<TweetRecord> = Vec::new();
    for day in 0..29 {
        let n = PER_DAY[day];
        let n_kw = KEYWORD_PER_DAY[day];
        let off = usize::from(OFF_TOPIC_DAYS.contains(&day));
        // distinct seconds keep same-day ordering unambiguous
        let mut secs: Vec<i64> = (0..n).map(|_| rng.gen_range(0..86_400)).collect();
        secs.sort_unstable();
        secs.dedup();
        while secs.len() < n {
            let s = rng.gen_range(0..86_400);
            if !secs.contains(&s) {
                secs.push(s);
                secs.sort_unstable();
            }
        }
        for (k, &sec) in secs.iter().enumerate() {
            let created_at = Utc.from_utc_datetime(&epoch.and_hms_opt(0, 0, 0).unwrap())
                + Duration::days(day as i64)
                + Duration::seconds(sec);
            // the roots open their groups on days 0 and 1
            let (author, target): (String, Option<String>) = if day == 0 && k == 0 {
                ("u_elon".into(), Some("u_m1".into()))
            } else if day == 1 && k == 0 {
                ("u_sama".into(), Some("u_o1".into()))
            } else {
                let roll: f64 = rng.gen();
                let cross = day >= BRIDGE_DAY;
                if roll < 0.12 {
                    let a = pick(&mut rng, &isl).clone();
                    let t = isl.iter().filter(|u| **u != a).cloned().collect::<Vec<_>>();
                    (a, Some(pick(&mut rng, &t).clone()))
                } else if cross && roll < 0.30 {
                    let b = BRIDGES[rng.gen_range(0..2)].to_string();
                    let side = if rng.gen_bool(0.5) { &gm } else { &go };
                    let other = pick(&mut rng, side).clone();
                    if rng.gen_bool(0.5) {
                        (b, Some(other))
                    } else {
                        (other, Some(b))
                    }
                } else if cross && roll < 0.36 {
                    (pick(&mut rng, &gm).clone(), Some(pick(&mut rng, &go).clone()))
                } else if roll < 0.42 {
                    // original post, no interaction
                    let g = if rng.gen_bool(0.5) { &gm } else { &go };
                    (pick(&mut rng, g).clone(), None)
                } else {
                    let g = if rng.gen_bool(0.5) { &gm } else { &go };
                    let a = pick(&mut rng, g).clone();
                    let t = g.iter().filter(|u| **u != a).cloned().collect::<Vec<_>>();
                    (a, Some(pick(&mut rng, &t).clone()))
                }
            };
            let topic = TOPICS[rng.gen_range(0..TOPICS.len())];
            // first n_kw posts of the day carry keywords, the last may be off-topic
            let text = if k < n_kw {
                KEYWORD.choose(&mut rng).unwrap().replace("{t}", topic)
            } else if off == 1 && k == n - 1 {
                OFF_TOPIC.choose(&mut rng).unwrap().to_string()
            } else {
                let pool = match rng.gen_range(0..3) {
                    0 => &POSITIVE,
                    1 => &NEGATIVE,
                    _ => &NEUTRAL,
                };
                pool.choose(&mut rng).unwrap().replace("{t}", topic)
            };
            let mut rec = TweetRecord {
                tweet_id: format!("t{:04}", records.len() + 1),
                author_id: author.clone(),
                author_handle: handle(&author),
                created_at,
                text,
                reply_to_user: None,
                retweet_of_user: None,
                mentioned_users: vec![],
                lang: Some("en".into()),
            };
            if let Some(t) = target {
                match rng.gen_range(0..3) {
                    0 => {
                        rec.text = format!("@{} {}", handle(&t), rec.text);
                        rec.reply_to_user = Some(t);
                    }
                    1 => {
                        rec.text = format!("RT @{}: {}", handle(&t), rec.text);
                        rec.retweet_of_user = Some(t.clone());
                        rec.mentioned_users = vec![t];
                    }
                    _ => {
                        rec.text = format!("{} @{}", rec.text, handle(&t));
                        rec.mentioned_users = vec![t];
                    }
                }
            }
            records.push(rec);
        }
    }
    assert_eq!(records.len(), 200);

    let mut corpus = String::new();
    for (i, r) in records.iter().enumerate() {
        corpus.push_str(&serde_json::to_string(r).unwrap());
        corpus.push('\n');
        // malformed lines after records 50, 120 and 180
        match i + 1 {
            50 => corpus.push_str("{\"tweet_id\": \"t_bad\", \"author_id\": \n"),
            120 => {
                let mut bad = records[0].clone();
                bad.tweet_id = "t_both".into();
                bad.reply_to_user = Some("u_m2".into());
                bad.retweet_of_user = Some("u_m3".into());
                writeln!(corpus, "{}", serde_json::to_string(&bad).unwrap()).unwrap();
            }
            180 => writeln!(corpus, "{}", serde_json::to_string(&records[10]).unwrap()).unwrap(),
            _ => {}
        }
    }
    std::fs::write(dir.join("corpus.jsonl"), corpus).unwrap();

    let mut profiles = String::new();
    for u in &users {
        let p = json!({
            "user_id": u.id,
            "handle": u.handle,
            "display_name": u.name,
            "description": u.bio,
            "location": "",
            "verified": u.team != "none",
            "followers_count": 100 + 37 * u.id.len() as u64,
        });
        profiles.push_str(&p.to_string());
        profiles.push('\n');
    }
    std::fs::write(dir.join("profiles.jsonl"), profiles).unwrap();

    let teams: serde_json::Map<String, serde_json::Value> = users
        .iter()
        .filter(|u| u.team != "none")
        .map(|u| (u.id.clone(), json!(u.team)))
        .collect();
    let config = json!({
        "corpus": "corpus.jsonl",
        "profiles": "profiles.jsonl",
        "teams": teams,
        "out_dir": "out",
        "query": {
            "keyword_groups": [["openai"], ["chatgpt"], ["gpt"], ["ai", "model"]],
            "from": "2023-03-15T00:00:00Z",
            "to": "2023-04-13T00:00:00Z"
        },
        "coding": {"keywords": ["risk", "danger", "harm"]},
        "network": {"window": 4, "min_degree": 0},
        "paths": {"roots": ["u_elon", "u_sama"], "start_day": 0, "mode": "undirected"},
        "animation": {"scheme": "sentiment", "seed": 42}
    });
    std::fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(&config).unwrap() + "\n",
    )
    .unwrap();

    // pin the hash of every artifact a full run produces
    let out = tempfile::tempdir().unwrap();
    let mut cfg = pipeline::load_config(&dir.join("config.json")).unwrap();
    cfg.out_dir = out.path().to_path_buf();
    pipeline::run_all(&cfg).unwrap();
    let mut lines: Vec<String> = read_manifest(out.path())
        .unwrap()
        .into_iter()
        .flat_map(|e| e.outputs)
        .map(|f| format!("{}  {}", f.sha256, f.path))
        .collect();
    lines.sort();
    std::fs::write(dir.join("expected_hashes.txt"), lines.join("\n") + "\n").unwrap();
    println!("wrote fixture to {}", dir.display());
}
