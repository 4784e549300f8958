use std::collections::HashSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use slotfill::challenge::build_uwre_plus;
use slotfill::io;
use slotfill::metrics::{score_slot_filling, ScoreOptions};
use slotfill::mixer::{mix, MixSpec};
use slotfill::model::{validate_dataset, Dataset, Instance, Origin, Prediction, Span, Split};
use slotfill::segment::{segment_sentences, sentences};
use slotfill::transforms::{insert_no_answer_token, negativize_squad, strip_no_answer_token};

const WORDS: &[&str] = &["Ann", "lived", "in", "Zürich", "für", "Dr.", "Smith", "東京", "river", "a", "was", "born", "U.S.", "x"];

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..8).prop_map(|ws| {
        let mut s = ws.join(" ");
        s.replace_range(0..0, "The ");
        s + "."
    })
}

/// A positive whose gold spans are picked from its own tokens.
fn positive(id: usize) -> impl Strategy<Value = Instance> {
    (prop::collection::vec(sentence(), 1..5), prop::collection::vec(any::<prop::sample::Index>(), 1..3)).prop_map(
        move |(sents, picks)| {
            let context = sents.join(" ");
            let words: Vec<(usize, &str)> = {
                let mut out = Vec::new();
                let mut offset = 0;
                for w in context.split(' ') {
                    out.push((offset, w));
                    offset += w.chars().count() + 1;
                }
                out
            };
            let mut answers: Vec<Span> = Vec::new();
            for p in picks {
                let (start, w) = words[p.index(words.len())];
                let span = Span::new(start, w);
                if !answers.contains(&span) {
                    answers.push(span);
                }
            }
            Instance {
                id: format!("q{id}"),
                question: "Where?".into(),
                context,
                answers,
                relation: None,
                subject_entity: None,
                origin: Origin::SquadPositive,
                split: Split::Train,
            }
        },
    )
}

fn squad_dataset() -> impl Strategy<Value = Dataset> {
    (0usize..12)
        .prop_flat_map(|n| (0..n).map(positive).collect::<Vec<_>>())
        .prop_map(|instances| Dataset::new("squad", instances))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jsonl_round_trips(d in squad_dataset()) {
        let text = io::to_jsonl(&d.instances).unwrap();
        let back: Vec<Instance> = io::from_jsonl(&text).unwrap();
        prop_assert_eq!(back, d.instances);
    }

    #[test]
    fn generated_positives_are_valid(d in squad_dataset()) {
        prop_assert!(validate_dataset(&d).is_empty());
    }

    #[test]
    fn negatives_drop_exactly_the_answer_sentences(d in squad_dataset()) {
        let (out, report) = negativize_squad(&d, false).unwrap();
        prop_assert_eq!(out.len() + report.skipped, d.len());
        prop_assert!(validate_dataset(&out).is_empty());
        for neg in &out.instances {
            let src = d.instances.iter().find(|i| format!("{}-neg", i.id) == neg.id).unwrap();
            let bounds = segment_sentences(&src.context);
            let kept: Vec<&str> = sentences(&src.context, &bounds)
                .into_iter()
                .zip(&bounds)
                .filter(|(_, b)| !src.answers.iter().any(|a| b.overlaps(a.start, a.end())))
                .map(|(s, _)| s)
                .collect();
            prop_assert_eq!(&neg.context, &kept.join(" "));
            prop_assert!(neg.answers.is_empty());
        }
    }

    #[test]
    fn no_answer_token_round_trips(d in squad_dataset()) {
        let (with_negs, _) = negativize_squad(&d, true).unwrap();
        let adapted = insert_no_answer_token(&with_negs, "NoAnswerFound").unwrap();
        prop_assert!(validate_dataset(&adapted).is_empty());
        prop_assert_eq!(adapted.len(), with_negs.len());
        let stripped = strip_no_answer_token(&adapted).unwrap();
        prop_assert_eq!(stripped.instances, with_negs.instances);
        prop_assert_eq!(stripped.no_answer_token, None);
    }

    #[test]
    fn f1_ignores_order(d in squad_dataset(), seed in any::<u64>(), answer_mask in any::<u64>()) {
        let preds: Vec<Prediction> = d
            .instances
            .iter()
            .enumerate()
            .map(|(k, i)| match answer_mask >> (k % 64) & 3 {
                0 => Prediction::no_answer(i.id.clone()),
                1 => Prediction::answer(i.id.clone(), i.answers[0].text.clone()),
                _ => Prediction::answer(i.id.clone(), "wrong"),
            })
            .collect();
        let opts = ScoreOptions::default();
        let base = score_slot_filling(&d, &preds, &opts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut shuffled_preds = preds.clone();
        shuffled_preds.shuffle(&mut rng);
        let mut shuffled = d.clone();
        shuffled.instances.shuffle(&mut rng);
        let again = score_slot_filling(&shuffled, &shuffled_preds, &opts).unwrap();
        prop_assert_eq!(base.precision, again.precision);
        prop_assert_eq!(base.recall, again.recall);
        prop_assert_eq!(base.f1, again.f1);
    }

    #[test]
    fn uwre_plus_keeps_ceiling_half(n in 1usize..200, pool in 0usize..150, seed in any::<u64>()) {
        let make = |k: usize, origin: Origin, prefix: &str| Instance {
            id: format!("{prefix}{k}"),
            question: "Where was Bob born?".into(),
            context: "Ann was born in Oslo.".into(),
            answers: vec![],
            relation: Some("place_of_birth".into()),
            subject_entity: Some("Bob".into()),
            origin,
            split: Split::Train,
        };
        let split = Dataset::new("s", (0..n).map(|k| make(k, Origin::UwreNegative, "n")).collect());
        let pool = Dataset::new("p", (0..pool).map(|k| make(k, Origin::ChallengeNegative, "c")).collect());
        match build_uwre_plus(&split, &pool, seed) {
            Ok((out, report)) => {
                let kept = out.instances.iter().filter(|i| i.origin == Origin::UwreNegative).count();
                prop_assert_eq!(kept, n - n / 2);
                prop_assert_eq!(out.len() + report.shortfall, n);
                let ids: HashSet<_> = out.instances.iter().map(|i| &i.id).collect();
                prop_assert_eq!(ids.len(), out.len());
            }
            Err(_) => prop_assert_eq!(pool.len(), 0),
        }
    }

    #[test]
    fn mixes_nest(base in 0usize..20, augment in 0usize..300, mut sizes in prop::collection::vec(1usize..400, 1..5), seed in any::<u64>()) {
        sizes.sort_unstable();
        sizes.dedup();
        let make = |prefix: &str, n: usize| {
            let instances = (0..n)
                .map(|k| Instance {
                    id: format!("{prefix}{k}"),
                    question: "q".into(),
                    context: "c".into(),
                    answers: vec![],
                    relation: None,
                    subject_entity: None,
                    origin: Origin::SquadNegative,
                    split: Split::Train,
                })
                .collect();
            Dataset::new(prefix, instances)
        };
        let spec = MixSpec { base: "b".into(), augment: "a".into(), sizes: sizes.clone(), seed };
        let out = mix(&spec, &make("b", base), &make("a", augment)).unwrap();
        for (d, &k) in out.iter().zip(&sizes) {
            prop_assert_eq!(d.len(), base + k.min(augment));
        }
        for pair in out.windows(2) {
            let small: HashSet<_> = pair[0].instances.iter().map(|i| &i.id).collect();
            let large: HashSet<_> = pair[1].instances.iter().map(|i| &i.id).collect();
            prop_assert!(small.is_subset(&large));
        }
    }
}
