//! Slot-filling precision/recall/F1 and challenge-set accuracy.
//!
//! A correct "no answer" on a negative instance counts toward neither
//! precision nor recall; any answer returned on a negative lowers precision.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, Prediction, Span};

/// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
/// whitespace.
pub fn normalize_answer(s: &str) -> String {
    let lowered = s.to_lowercase();
    let no_punct: String = lowered.chars().filter(|c| !c.is_ascii_punctuation()).collect();
    no_punct
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Token-overlap F1 between two normalized answers.
pub fn token_f1(pred: &str, gold: &str) -> f64 {
    let p: Vec<&str> = pred.split_whitespace().collect();
    let g: Vec<&str> = gold.split_whitespace().collect();
    if p.is_empty() || g.is_empty() {
        return if p.is_empty() && g.is_empty() { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for w in &g {
        *counts.entry(w).or_default() += 1;
    }
    let mut common = 0usize;
    for w in &p {
        if let Some(c) = counts.get_mut(w).filter(|c| **c > 0) {
            *c -= 1;
            common += 1;
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / p.len() as f64;
    let recall = common as f64 / g.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Normalized exact match against any gold answer.
    #[default]
    Exact,
    /// Partial credit: best token-overlap F1 against the gold answers.
    TokenF1,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    /// P = 0 when nothing was answered, R = 0 when there are no positives.
    #[default]
    Zero,
    /// P = 1 when nothing was answered, R = 1 when there are no positives.
    Vacuous,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    pub match_mode: MatchMode,
    pub zero_policy: ZeroPolicy,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub positives: usize,
    pub negatives: usize,
    pub answered: usize,
    pub correct: usize,
    pub no_answer_predictions: usize,
    /// Instances without a prediction line; scored as "no answer".
    pub missing_predictions: usize,
    /// Sum of per-answer credit; equals `correct` under exact matching.
    pub credit: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub counts: Counts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_relation: Option<BTreeMap<String, EvalReport>>,
}

pub const TSV_HEADER: &str =
    "precision\trecall\tf1\taccuracy\tpositives\tnegatives\tanswered\tcorrect\tno_answer_predictions\tmissing_predictions";

impl EvalReport {
    /// One tab-separated line in [`TSV_HEADER`] order; absent values are empty.
    pub fn to_tsv(&self) -> String {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
        let c = &self.counts;
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            f(self.precision),
            f(self.recall),
            f(self.f1),
            f(self.accuracy),
            c.positives,
            c.negatives,
            c.answered,
            c.correct,
            c.no_answer_predictions,
            c.missing_predictions
        )
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Gold answer texts, leaving out the dummy no-answer span.
fn gold_answers<'a>(inst: &'a Instance, token: Option<&str>) -> Vec<&'a str> {
    inst.answers
        .iter()
        .filter(|a| token.is_none_or(|t| **a != Span::new(0, t)))
        .map(|a| a.text.as_str())
        .collect()
}

/// The predicted answer, or `None` when the prediction means "no answer":
/// null, blank, or (on adapted datasets) the dummy token itself.
pub fn effective_answer<'a>(answer: Option<&'a str>, token: Option<&str>) -> Option<&'a str> {
    let a = answer?;
    if a.trim().is_empty() {
        return None;
    }
    match token {
        Some(t) if normalize_answer(a) == normalize_answer(t) => None,
        _ => Some(a),
    }
}

fn index_predictions<'a>(d: &Dataset, preds: &'a [Prediction]) -> Result<HashMap<&'a str, Option<&'a str>>> {
    let ids: HashSet<&str> = d.instances.iter().map(|i| i.id.as_str()).collect();
    let mut by_id = HashMap::with_capacity(preds.len());
    let mut unknown = Vec::new();
    let mut duplicate = Vec::new();
    for p in preds {
        if !ids.contains(p.instance_id.as_str()) {
            unknown.push(p.instance_id.clone());
        } else if by_id.insert(p.instance_id.as_str(), p.answer.as_deref()).is_some() {
            duplicate.push(p.instance_id.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownPredictionIds(unknown));
    }
    if !duplicate.is_empty() {
        duplicate.dedup();
        return Err(Error::DuplicatePredictions(duplicate));
    }
    Ok(by_id)
}

fn credit(answer: &str, golds: &[&str], mode: MatchMode) -> f64 {
    let pred = normalize_answer(answer);
    let best = golds.iter().map(|g| {
        let g = normalize_answer(g);
        match mode {
            MatchMode::Exact => f64::from(u8::from(pred == g)),
            MatchMode::TokenF1 => token_f1(&pred, &g),
        }
    });
    best.fold(0.0, f64::max)
}

fn finish(counts: Counts, opts: &ScoreOptions) -> EvalReport {
    let vacuous = opts.zero_policy == ZeroPolicy::Vacuous;
    let ratio = |num: f64, den: usize| if den > 0 { num / den as f64 } else if vacuous { 1.0 } else { 0.0 };
    let precision = ratio(counts.credit, counts.answered);
    let recall = ratio(counts.credit, counts.positives);
    let total = counts.positives + counts.negatives;
    let accuracy = (counts.positives == 0 && total > 0).then(|| counts.no_answer_predictions as f64 / total as f64);
    EvalReport {
        precision: Some(precision),
        recall: Some(recall),
        f1: Some(f1_score(precision, recall)),
        accuracy,
        counts,
        per_relation: None,
    }
}

/// Slot-filling P/R/F1. Missing predictions count as "no answer".
pub fn score_slot_filling(d: &Dataset, preds: &[Prediction], opts: &ScoreOptions) -> Result<EvalReport> {
    let by_id = index_predictions(d, preds)?;
    let token = d.no_answer_token.as_deref();
    let mut overall = Counts::default();
    let mut per_relation: BTreeMap<String, Counts> = BTreeMap::new();

    for inst in &d.instances {
        let golds = gold_answers(inst, token);
        let mut tally = Counts::default();
        let raw = match by_id.get(inst.id.as_str()) {
            Some(a) => *a,
            None => {
                tally.missing_predictions = 1;
                None
            }
        };
        if golds.is_empty() {
            tally.negatives = 1;
        } else {
            tally.positives = 1;
        }
        match effective_answer(raw, token) {
            None => tally.no_answer_predictions = 1,
            Some(answer) => {
                tally.answered = 1;
                if !golds.is_empty() {
                    let c = credit(answer, &golds, opts.match_mode);
                    tally.credit = c;
                    tally.correct = usize::from(c == 1.0);
                }
            }
        }
        add(&mut overall, &tally);
        if let Some(rel) = &inst.relation {
            add(per_relation.entry(rel.clone()).or_default(), &tally);
        }
    }

    let mut report = finish(overall, opts);
    if !per_relation.is_empty() {
        report.per_relation = Some(per_relation.into_iter().map(|(r, c)| (r, finish(c, opts))).collect());
    }
    Ok(report)
}

fn add(into: &mut Counts, c: &Counts) {
    into.positives += c.positives;
    into.negatives += c.negatives;
    into.answered += c.answered;
    into.correct += c.correct;
    into.no_answer_predictions += c.no_answer_predictions;
    into.missing_predictions += c.missing_predictions;
    into.credit += c.credit;
}

/// Fraction of "no answer" predictions on an all-negative dataset.
pub fn score_challenge_accuracy(d: &Dataset, preds: &[Prediction]) -> Result<EvalReport> {
    let token = d.no_answer_token.as_deref();
    if let Some(p) = d.instances.iter().find(|i| !gold_answers(i, token).is_empty()) {
        return Err(Error::InvalidInput(format!(
            "challenge accuracy needs an all-negative dataset; `{}` has a gold answer",
            p.id
        )));
    }
    let by_id = index_predictions(d, preds)?;
    let mut counts = Counts { negatives: d.len(), ..Default::default() };
    for inst in &d.instances {
        let raw = match by_id.get(inst.id.as_str()) {
            Some(a) => *a,
            None => {
                counts.missing_predictions += 1;
                None
            }
        };
        match effective_answer(raw, token) {
            None => counts.no_answer_predictions += 1,
            Some(_) => counts.answered += 1,
        }
    }
    let accuracy = if d.is_empty() { 0.0 } else { counts.no_answer_predictions as f64 / d.len() as f64 };
    Ok(EvalReport { accuracy: Some(accuracy), counts, ..Default::default() })
}
