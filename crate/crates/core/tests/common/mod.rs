//! Test-only oracles, kept independent of the code paths they check.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use slotfill::baseline::{self, BaselineConfig, IdfTable, ANCHOR_BONUS, ANCHOR_GAP};
use slotfill::segment::segment_sentences;
use slotfill::{Dataset, Instance, Origin, Prediction, Span, Split};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------------------
// Slot-filling tally oracle

/// What the generator intended a prediction to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    NoAnswer,
    Correct,
    Wrong,
}

#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct Tally {
    pub tp: usize,
    pub fp_on_positive: usize,
    pub fp_on_negative: usize,
    pub ignored_tn: usize,
    pub missed_positive: usize,
}

impl Tally {
    pub fn precision(&self) -> f64 {
        let answered = self.tp + self.fp_on_positive + self.fp_on_negative;
        if answered == 0 { 0.0 } else { self.tp as f64 / answered as f64 }
    }

    pub fn recall(&self) -> f64 {
        let positives = self.tp + self.fp_on_positive + self.missed_positive;
        if positives == 0 { 0.0 } else { self.tp as f64 / positives as f64 }
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) }
    }
}

/// Classify each (instance, intent) pair by construction, not by string matching.
pub fn brute_force_tally(cases: &[(bool, Intent)]) -> Tally {
    let mut t = Tally::default();
    for &(positive, intent) in cases {
        match (positive, intent) {
            (true, Intent::Correct) => t.tp += 1,
            (true, Intent::Wrong) => t.fp_on_positive += 1,
            (true, Intent::NoAnswer) => t.missed_positive += 1,
            (false, Intent::NoAnswer) => t.ignored_tn += 1,
            (false, _) => t.fp_on_negative += 1,
        }
    }
    t
}

const GOLDS: &[&str] = &["Honolulu, Hawaii", "Kenya", "the Eiffel Tower", "1961", "Acme Corp.", "São Paulo"];
const WRONG: &[&str] = &["Nairobi", "Paris", "1862", "Globex", "Lima", "Hawaii Honolulu"];

/// Surface variants that normalize to the same answer.
fn correct_variant(rng: &mut ChaCha8Rng, gold: &str) -> String {
    match rng.gen_range(0..4) {
        0 => gold.to_string(),
        1 => gold.to_uppercase(),
        2 => format!("The {gold}!"),
        _ => format!("  {}  ", gold.replace(' ', "   ")),
    }
}

pub struct GeneratedCase {
    pub dataset: Dataset,
    pub predictions: Vec<Prediction>,
    /// (is positive, intent) per instance, aligned with `dataset.instances`.
    pub labels: Vec<(bool, Intent)>,
}

/// Up to `max` instances of mixed polarity with predictions of known intent.
/// Roughly a tenth of instances get no prediction line at all.
pub fn random_case(rng: &mut ChaCha8Rng, max: usize, allow_positives: bool) -> GeneratedCase {
    let n = rng.gen_range(0..=max);
    let mut instances = Vec::with_capacity(n);
    let mut predictions = Vec::new();
    let mut labels = Vec::new();
    for k in 0..n {
        let positive = allow_positives && rng.gen_bool(0.5);
        let id = format!("i{k}");
        let (context, answers) = if positive {
            let gold = GOLDS[rng.gen_range(0..GOLDS.len())];
            (format!("It was {gold}."), vec![Span::new(7, gold)])
        } else {
            ("Nothing relevant here.".to_string(), vec![])
        };
        let intent = match rng.gen_range(0..3) {
            0 => Intent::NoAnswer,
            1 if positive => Intent::Correct,
            _ => Intent::Wrong,
        };
        let missing = intent == Intent::NoAnswer && rng.gen_bool(0.3);
        if !missing {
            let answer = match intent {
                Intent::NoAnswer => None,
                Intent::Correct => Some(correct_variant(rng, &answers[0].text)),
                Intent::Wrong => Some(WRONG[rng.gen_range(0..WRONG.len())].to_string()),
            };
            predictions.push(Prediction { instance_id: id.clone(), answer });
        }
        labels.push((positive, intent));
        instances.push(Instance {
            id,
            question: "What?".into(),
            context,
            answers,
            relation: None,
            subject_entity: None,
            origin: if positive { Origin::SquadPositive } else { Origin::SquadNegative },
            split: Split::Dev,
        });
    }
    GeneratedCase { dataset: Dataset::new("rand", instances), predictions, labels }
}

// ---------------------------------------------------------------------------
// Baseline span oracle: enumerate every token range in every sentence

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpan {
    pub start: usize,
    pub end: usize,
    pub score: f64,
}

fn words(s: &str) -> Vec<(String, usize, usize)> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphanumeric() {
            let start = i;
            while i < chars.len() && chars[i].is_alphanumeric() {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect::<String>().to_lowercase();
            out.push((w, start, i));
        } else {
            i += 1;
        }
    }
    out
}

fn stop(w: &str) -> bool {
    baseline::STOPWORDS.contains(&w)
}

/// Every candidate span with its documented score, in enumeration order.
pub fn oracle_all_spans(inst: &Instance, cfg: &BaselineConfig, idf: &IdfTable) -> Vec<OracleSpan> {
    let question: Vec<String> = words(&inst.question).into_iter().map(|w| w.0).filter(|w| !stop(w)).collect();
    let entity: Vec<String> =
        inst.subject_entity.as_deref().map(|e| words(e).into_iter().map(|w| w.0).collect()).unwrap_or_default();
    let all = words(&inst.context);
    let mut out = Vec::new();
    for sentence in segment_sentences(&inst.context) {
        let toks: Vec<&(String, usize, usize)> =
            all.iter().filter(|t| t.1 >= sentence.start && t.2 <= sentence.end).collect();
        let mut matched: Vec<&str> = Vec::new();
        for t in &toks {
            if question.contains(&t.0) && !matched.contains(&t.0.as_str()) {
                matched.push(&t.0);
            }
        }
        let sentence_score: f64 = matched.iter().map(|w| idf.idf(w)).sum();
        for i in 0..toks.len() {
            for j in i..toks.len() {
                if j - i + 1 > cfg.max_span_tokens {
                    continue;
                }
                let ok = toks[i..=j].iter().all(|t| !stop(&t.0) && !question.contains(&t.0) && !entity.contains(&t.0));
                if !ok {
                    continue;
                }
                // anchor: a question term within the ANCHOR_GAP + 1 tokens before i,
                // with only stopwords in between
                let mut anchored = false;
                for back in 1..=ANCHOR_GAP + 1 {
                    if back > i {
                        break;
                    }
                    let w = &toks[i - back].0;
                    if question.contains(w) {
                        anchored = true;
                        break;
                    }
                    if !stop(w) {
                        break;
                    }
                }
                let score = sentence_score + if anchored { ANCHOR_BONUS } else { 0.0 };
                out.push(OracleSpan { start: toks[i].1, end: toks[j].2, score });
            }
        }
    }
    out
}

/// Argmax with ties to the earlier start, then the shorter span.
pub fn oracle_best(inst: &Instance, cfg: &BaselineConfig, idf: &IdfTable) -> Option<OracleSpan> {
    let mut spans = oracle_all_spans(inst, cfg, idf);
    spans.sort_by(|a, b| {
        b.score.total_cmp(&a.score).then(a.start.cmp(&b.start)).then((a.end - a.start).cmp(&(b.end - b.start)))
    });
    spans.into_iter().next()
}

/// Max best-span score, or 0 when an instance has no candidate at all.
pub fn oracle_max_score(inst: &Instance, cfg: &BaselineConfig, idf: &IdfTable) -> f64 {
    oracle_best(inst, cfg, idf).map_or(0.0, |s| s.score)
}
