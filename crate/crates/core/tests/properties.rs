//! Randomized properties of spells, paths and coding.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tweetscope::coding::{score_lexicon_mean, SentimentLexicon};
use tweetscope::paths::{backward_path, forward_path, TraversalMode};
use tweetscope::temporal::spellize;

proptest! {
    #[test]
    fn spells_never_overlap_and_stay_in_window(
        days in prop::collection::vec(0i64..20, 1..10),
        window in 0u32..6,
    ) {
        let items: Vec<_> = days
            .iter()
            .enumerate()
            .map(|(k, &d)| common::interaction(&format!("i{k}"), "p", "q", d, k as i64))
            .collect();
        let spells = &spellize(&items, window)[0].spells;
        for w in spells.windows(2) {
            prop_assert!(w[0].terminus < w[1].onset);
        }
        for s in spells {
            prop_assert!(s.onset <= s.terminus);
            prop_assert!(s.terminus - s.onset <= i64::from(window));
        }
    }

    #[test]
    fn later_start_reaches_no_more(seed in any::<u64>(), start in 0i64..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(&mut rng, 10, 20);
        let root = net.user_ids().next().unwrap().to_string();
        for mode in [TraversalMode::Undirected, TraversalMode::Directed] {
            let early = forward_path(&net, &root, start, mode).unwrap();
            let late = forward_path(&net, &root, start + 1, mode).unwrap();
            for (u, e) in &late.entries {
                let first = early.entries.get(u);
                prop_assert!(first.is_some(), "{} reached only from the later start", u);
                prop_assert!(first.unwrap().arrival_day <= e.arrival_day);
            }
        }
    }

    #[test]
    fn trees_are_consistent(seed in any::<u64>(), day in 0i64..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = common::random_network(&mut rng, 10, 20);
        for root in net.user_ids() {
            for mode in [TraversalMode::Undirected, TraversalMode::Directed] {
                let f = forward_path(&net, root, day, mode).unwrap();
                prop_assert!(common::check_tree_labels(&net, &f).is_ok());
                let b = backward_path(&net, root, day, mode).unwrap();
                prop_assert!(common::check_tree_labels(&net, &b).is_ok());
            }
        }
    }

    #[test]
    fn lexicon_mean_is_bounded(text in "[a-z !?.,]{0,80}") {
        let s = score_lexicon_mean(&text, &SentimentLexicon::bundled_polarity());
        prop_assert!((-1.0..=1.0).contains(&s));
    }
}

#[test]
fn lexicon_mean_near_reference_values() {
    let lex = SentimentLexicon::bundled_polarity();
    let negative_example = "Just as I predicted last summer, authorities have started restricting young people's access to Large Language Models. Italy has banned #ChatGPT due to \"privacy concerns,\" with one of the reasons being that @OpenAI doesn't verify the age of its users.";
    let positive_example = "@intelligentHQ @OpenAI @Google @Microsoft @nvidia It's exciting to see how Generative AI like GPT-4 is improving its performance in language tasks, like passing simulated bar exams. Can't wait to see what other breakthroughs are on the horizon!";
    for (text, want) in [(negative_example, 0.047), (positive_example, 0.072)] {
        let got = score_lexicon_mean(text, &lex);
        assert!((got - want).abs() <= 0.05, "scored {got}, expected about {want}");
    }
}
