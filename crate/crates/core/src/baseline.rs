//! Training-free lexical span extractor with a no-answer threshold.
//!
//! Scoring, frozen:
//!
//! * Text is tokenized into lowercased runs of alphanumeric characters;
//!   everything else separates tokens. No stemming.
//! * Question terms are the question's tokens minus [`STOPWORDS`] (which
//!   include the wh-words).
//! * A sentence scores the summed IDF of the distinct question terms it
//!   contains.
//! * Candidate spans are 1..=`max_span_tokens` consecutive tokens inside one
//!   sentence, each a non-stopword that is neither a question term nor a
//!   token of the subject entity.
//! * A span is *anchored* when the token before it is a question term, looking
//!   back over at most [`ANCHOR_GAP`] stopwords. Anchored spans gain
//!   [`ANCHOR_BONUS`].
//! * score(span) = sentence score + anchor bonus. The best span wins, ties
//!   going to the earlier start, then the shorter span. It is returned when its
//!   score reaches `no_answer_threshold`, otherwise the prediction is "no answer".

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{self, ScoreOptions};
use crate::model::{Dataset, Instance, Prediction};
use crate::segment::segment_sentences;
use crate::text;

pub const ANCHOR_BONUS: f64 = 0.5;
pub const ANCHOR_GAP: usize = 2;
pub const DEFAULT_MAX_SPAN_TOKENS: usize = 8;
/// Roughly two matched question terms of minimal rarity.
pub const DEFAULT_NO_ANSWER_THRESHOLD: f64 = 2.0;

pub const STOPWORDS: &[&str] = &[
    "a", "about", "after", "also", "an", "and", "are", "as", "at", "be", "been", "before", "but", "by",
    "can", "could", "did", "do", "does", "for", "from", "had", "has", "have", "he", "her", "his",
    "how", "i", "if", "in", "into", "is", "it", "its", "of", "on", "or", "she", "so", "than", "that",
    "the", "their", "them", "then", "there", "these", "they", "this", "those", "to", "was", "we",
    "were", "what", "when", "where", "which", "while", "who", "whom", "whose", "why", "will", "with",
    "would", "you",
];

pub fn is_stopword(w: &str) -> bool {
    STOPWORDS.binary_search(&w).is_ok()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfSource {
    #[default]
    SelfCorpus,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub max_span_tokens: usize,
    pub no_answer_threshold: f64,
    pub idf_source: IdfSource,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            max_span_tokens: DEFAULT_MAX_SPAN_TOKENS,
            no_answer_threshold: DEFAULT_NO_ANSWER_THRESHOLD,
            idf_source: IdfSource::SelfCorpus,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.max_span_tokens == 0 || !(self.no_answer_threshold >= 0.0) {
            return Err(crate::error::Error::InvalidInput(format!(
                "baseline needs max_span_tokens >= 1 and no_answer_threshold >= 0, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub norm: String,
    /// Character offsets into the source text.
    pub start: usize,
    pub end: usize,
}

pub fn tokenize(s: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut current: Option<(usize, String)> = None;
    for (i, c) in s.chars().enumerate() {
        if c.is_alphanumeric() {
            let (_, buf) = current.get_or_insert_with(|| (i, String::new()));
            buf.extend(c.to_lowercase());
        } else if let Some((start, norm)) = current.take() {
            out.push(Token { norm, start, end: i });
        }
    }
    if let Some((start, norm)) = current {
        out.push(Token { norm, start, end: text::char_len(s) });
    }
    out
}

/// Inverse document frequency over contexts:
/// `ln((1 + N) / (1 + df(w))) + 1`; unseen words get `df = 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdfTable {
    docs: usize,
    df: HashMap<String, usize>,
    uniform: bool,
}

impl IdfTable {
    /// Every word weighs 1.
    pub fn uniform() -> Self {
        IdfTable { uniform: true, ..Default::default() }
    }

    pub fn idf(&self, w: &str) -> f64 {
        if self.uniform {
            return 1.0;
        }
        let df = self.df.get(w).copied().unwrap_or(0);
        ((1 + self.docs) as f64 / (1 + df) as f64).ln() + 1.0
    }

    pub fn docs(&self) -> usize {
        self.docs
    }
}

pub fn build_idf(d: &Dataset) -> IdfTable {
    let mut df: HashMap<String, usize> = HashMap::new();
    for inst in &d.instances {
        let distinct: HashSet<String> = tokenize(&inst.context).into_iter().map(|t| t.norm).collect();
        for w in distinct {
            *df.entry(w).or_default() += 1;
        }
    }
    IdfTable { docs: d.len(), df, uniform: false }
}

pub fn idf_for(d: &Dataset, source: IdfSource) -> IdfTable {
    match source {
        IdfSource::SelfCorpus => build_idf(d),
        IdfSource::Uniform => IdfTable::uniform(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSpan {
    /// Character offsets into the context.
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub score: f64,
    pub sentence_score: f64,
    pub anchored: bool,
}

/// The highest-scoring candidate span, regardless of threshold.
pub fn best_span(inst: &Instance, cfg: &BaselineConfig, idf: &IdfTable) -> Option<ScoredSpan> {
    let question: HashSet<String> =
        tokenize(&inst.question).into_iter().map(|t| t.norm).filter(|w| !is_stopword(w)).collect();
    let entity: HashSet<String> = inst
        .subject_entity
        .as_deref()
        .map(|e| tokenize(e).into_iter().map(|t| t.norm).collect())
        .unwrap_or_default();
    let tokens = tokenize(&inst.context);

    let mut best: Option<ScoredSpan> = None;
    for sentence in segment_sentences(&inst.context) {
        let toks: Vec<&Token> =
            tokens.iter().filter(|t| t.start >= sentence.start && t.end <= sentence.end).collect();
        let matched: HashSet<&str> =
            toks.iter().map(|t| t.norm.as_str()).filter(|w| question.contains(*w)).collect();
        let sentence_score: f64 = matched.iter().map(|w| idf.idf(w)).sum();

        let eligible = |t: &Token| !is_stopword(&t.norm) && !question.contains(&t.norm) && !entity.contains(&t.norm);
        for i in 0..toks.len() {
            let anchored = is_anchored(&toks, i, &question);
            let score = sentence_score + if anchored { ANCHOR_BONUS } else { 0.0 };
            for j in i..toks.len().min(i + cfg.max_span_tokens) {
                if !eligible(toks[j]) {
                    break;
                }
                let (start, end) = (toks[i].start, toks[j].end);
                // strictly greater: earlier starts and shorter spans come first
                if best.as_ref().is_none_or(|b| score > b.score) {
                    best = Some(ScoredSpan {
                        start,
                        end,
                        text: text::slice_chars(&inst.context, start, end - start).unwrap_or_default().to_string(),
                        score,
                        sentence_score,
                        anchored,
                    });
                }
            }
        }
    }
    best
}

fn is_anchored(toks: &[&Token], i: usize, question: &HashSet<String>) -> bool {
    let mut k = i;
    let mut gap = 0;
    while k > 0 {
        k -= 1;
        let w = toks[k].norm.as_str();
        if question.contains(w) {
            return true;
        }
        if !is_stopword(w) || gap == ANCHOR_GAP {
            return false;
        }
        gap += 1;
    }
    false
}

pub fn predict(inst: &Instance, cfg: &BaselineConfig, idf: &IdfTable) -> Prediction {
    match best_span(inst, cfg, idf) {
        Some(span) if span.score >= cfg.no_answer_threshold => Prediction::answer(inst.id.clone(), span.text),
        _ => Prediction::no_answer(inst.id.clone()),
    }
}

/// Predictions for every instance, in dataset order.
pub fn predict_all(d: &Dataset, cfg: &BaselineConfig, idf: &IdfTable) -> Vec<Prediction> {
    d.instances.par_iter().map(|i| predict(i, cfg, idf)).collect()
}

/// Threshold that maximizes slot-filling F1 on `held_out`.
///
/// Candidate thresholds are the instances' best-span scores; the chosen one is
/// moved halfway down to the next lower score so it sits between regimes.
pub fn tune_threshold(held_out: &Dataset, cfg: &BaselineConfig, idf: &IdfTable) -> f64 {
    let best: Vec<Option<ScoredSpan>> = held_out.instances.par_iter().map(|i| best_span(i, cfg, idf)).collect();
    let mut scores: Vec<f64> = best.iter().flatten().map(|s| s.score).collect();
    scores.sort_by(f64::total_cmp);
    scores.dedup();
    if scores.is_empty() {
        return cfg.no_answer_threshold;
    }

    let f1_at = |t: f64| {
        let preds: Vec<Prediction> = held_out
            .instances
            .iter()
            .zip(&best)
            .map(|(inst, s)| match s {
                Some(s) if s.score >= t => Prediction::answer(inst.id.clone(), s.text.clone()),
                _ => Prediction::no_answer(inst.id.clone()),
            })
            .collect();
        metrics::score_slot_filling(held_out, &preds, &ScoreOptions::default())
            .ok()
            .and_then(|r| r.f1)
            .unwrap_or(0.0)
    };

    let mut chosen = 0;
    let mut chosen_f1 = f64::NEG_INFINITY;
    for (k, &t) in scores.iter().enumerate() {
        let f1 = f1_at(t);
        if f1 > chosen_f1 {
            chosen = k;
            chosen_f1 = f1;
        }
    }
    let below = if chosen == 0 { 0.0 } else { scores[chosen - 1] };
    (scores[chosen] + below) / 2.0
}
