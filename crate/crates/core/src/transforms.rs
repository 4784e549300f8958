//! SQuAD adaptations: negatives by answer-sentence removal, and the
//! `NoAnswerFound` dummy-token format for unmodified span extractors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, Origin, ProvenanceEntry, Span};
use crate::segment::{segment_sentences, sentences};
use crate::text;

pub const DEFAULT_NO_ANSWER_TOKEN: &str = "NoAnswerFound";
pub const NEGATIVE_ID_SUFFIX: &str = "-neg";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub input_count: usize,
    pub output_count: usize,
    pub skipped: usize,
    pub parameters: serde_json::Value,
    /// Skipped negatives whose gold answers sat in more than one sentence.
    #[serde(default)]
    pub skipped_multi_sentence: usize,
}

/// Context with every sentence that overlaps a gold span removed, survivors
/// joined by one space. `None` when nothing survives.
pub fn remove_answer_sentences(context: &str, answers: &[Span]) -> (Option<String>, usize) {
    let bounds = segment_sentences(context);
    let texts = sentences(context, &bounds);
    let mut removed = 0;
    let mut survivors = Vec::with_capacity(bounds.len());
    for (b, t) in bounds.iter().zip(texts) {
        if answers.iter().any(|a| b.overlaps(a.start, a.end())) {
            removed += 1;
        } else {
            survivors.push(t);
        }
    }
    let joined = (!survivors.is_empty()).then(|| survivors.join(" "));
    (joined, removed)
}

/// Emit one negative per SQuAD positive (and the positive itself when
/// `keep_positives` is set, directly before its negative).
pub fn negativize_squad(d: &Dataset, keep_positives: bool) -> Result<(Dataset, TransformReport)> {
    if let Some(bad) = d.instances.iter().find(|i| i.origin != Origin::SquadPositive) {
        return Err(Error::InvalidInput(format!(
            "negativize expects squad_positive instances, `{}` is {:?}",
            bad.id, bad.origin
        )));
    }
    if d.no_answer_token.is_some() {
        return Err(Error::InvalidInput("negativize must run before no-answer token insertion".into()));
    }

    let results: Vec<(Option<Instance>, usize)> = d
        .instances
        .par_iter()
        .map(|pos| {
            let (context, removed) = remove_answer_sentences(&pos.context, &pos.answers);
            let neg = context.map(|context| Instance {
                id: format!("{}{NEGATIVE_ID_SUFFIX}", pos.id),
                question: pos.question.clone(),
                context,
                answers: Vec::new(),
                relation: pos.relation.clone(),
                subject_entity: pos.subject_entity.clone(),
                origin: Origin::SquadNegative,
                split: pos.split,
            });
            (neg, removed)
        })
        .collect();

    let mut out = Vec::with_capacity(d.len() * 2);
    let mut skipped = 0;
    let mut skipped_multi_sentence = 0;
    for (pos, (neg, removed)) in d.instances.iter().zip(results) {
        if keep_positives {
            out.push(pos.clone());
        }
        match neg {
            Some(n) => out.push(n),
            None => {
                skipped += 1;
                if removed > 1 {
                    skipped_multi_sentence += 1;
                }
            }
        }
    }

    let parameters = json!({ "keep_positives": keep_positives });
    let report = TransformReport {
        input_count: d.len(),
        output_count: out.len(),
        skipped,
        parameters: parameters.clone(),
        skipped_multi_sentence,
    };
    let name = format!("{}-neg", d.name);
    Ok((d.derive(name, out, ProvenanceEntry::new("negativize", parameters, None)), report))
}

fn check_token(token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInput(format!("no-answer token {token:?} must be non-empty without whitespace")));
    }
    Ok(())
}

/// Prefix every context with `token` and a space, shift spans accordingly and
/// give every negative the single gold span `{0, token}`.
pub fn insert_no_answer_token(d: &Dataset, token: &str) -> Result<Dataset> {
    check_token(token)?;
    if let Some(existing) = &d.no_answer_token {
        return Err(Error::InvalidInput(format!("dataset already adapted with token `{existing}`")));
    }
    if let Some(i) = d.instances.iter().find(|i| i.context.starts_with(token)) {
        return Err(Error::InvalidInput(format!("context of `{}` already starts with `{token}`", i.id)));
    }
    let shift = text::char_len(token) + 1;
    let instances = d
        .instances
        .iter()
        .map(|inst| {
            let answers = if inst.answers.is_empty() {
                vec![Span::new(0, token)]
            } else {
                inst.answers.iter().map(|a| Span::new(a.start + shift, a.text.clone())).collect()
            };
            Instance { context: format!("{token} {}", inst.context), answers, ..inst.clone() }
        })
        .collect();
    let mut out = d.derive(
        format!("{}-noanswer", d.name),
        instances,
        ProvenanceEntry::new("insert_no_answer_token", json!({ "token": token }), None),
    );
    out.no_answer_token = Some(token.to_string());
    Ok(out)
}

/// Undo [`insert_no_answer_token`].
pub fn strip_no_answer_token(d: &Dataset) -> Result<Dataset> {
    let token = d
        .no_answer_token
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("dataset carries no no-answer token".into()))?;
    let prefix = format!("{token} ");
    let shift = text::char_len(&prefix);
    let dummy = Span::new(0, token);
    let instances = d
        .instances
        .iter()
        .map(|inst| {
            let context = inst.context.strip_prefix(&prefix).ok_or_else(|| {
                Error::InvalidInput(format!("context of `{}` lacks the `{token}` prefix", inst.id))
            })?;
            let answers = inst
                .answers
                .iter()
                .filter(|a| **a != dummy)
                .map(|a| {
                    a.start.checked_sub(shift).map(|start| Span::new(start, a.text.clone())).ok_or_else(|| {
                        Error::InvalidInput(format!("span of `{}` at {} lies inside the prefix", inst.id, a.start))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Instance { context: context.to_string(), answers, ..inst.clone() })
        })
        .collect::<Result<Vec<_>>>()?;
    let name = d.name.strip_suffix("-noanswer").unwrap_or(&d.name).to_string();
    let mut out = d.derive(name, instances, ProvenanceEntry::new("strip_no_answer_token", json!({ "token": token }), None));
    out.no_answer_token = None;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_dataset, Split};

    fn positive(id: &str, context: &str, answers: Vec<Span>) -> Instance {
        Instance {
            id: id.into(),
            question: "Where was Obama born?".into(),
            context: context.into(),
            answers,
            relation: None,
            subject_entity: None,
            origin: Origin::SquadPositive,
            split: Split::Train,
        }
    }

    #[test]
    fn obama_negative() {
        let d = Dataset::new(
            "s",
            vec![positive("q", "Obama was born in Hawaii. His father was born in Kenya.", vec![Span::new(18, "Hawaii")])],
        );
        let (out, report) = negativize_squad(&d, false).unwrap();
        assert_eq!(out.instances.len(), 1);
        let neg = &out.instances[0];
        assert_eq!(neg.context, "His father was born in Kenya.");
        assert_eq!(neg.id, "q-neg");
        assert!(neg.answers.is_empty());
        assert_eq!(neg.origin, Origin::SquadNegative);
        assert_eq!(report.skipped, 0);
    }

    #[test]
    fn single_sentence_is_skipped() {
        let d = Dataset::new("s", vec![positive("q", "Obama was born in Hawaii.", vec![Span::new(18, "Hawaii")])]);
        let (out, report) = negativize_squad(&d, true).unwrap();
        assert_eq!(report.skipped, 1);
        assert_eq!(out.instances.len(), 1);
        assert_eq!(out.instances[0].origin, Origin::SquadPositive);
    }

    #[test]
    fn two_answers_two_sentences() {
        let ctx = "Ann was born in Rome. Ben likes tea. Ann grew up in Oslo.";
        let answers = vec![Span::new(16, "Rome"), Span::new(52, "Oslo")];
        let d = Dataset::new("s", vec![positive("q", ctx, answers.clone())]);
        assert!(validate_dataset(&d).is_empty());
        let (out, _) = negativize_squad(&d, false).unwrap();
        let neg = &out.instances[0];
        assert_eq!(neg.context, "Ben likes tea.");
        // brute force: no gold text at any gold offset of the output
        for a in &answers {
            assert_ne!(text::slice_chars(&neg.context, a.start, text::char_len(&a.text)), Some(a.text.as_str()));
            assert!(!neg.context.contains(&a.text));
        }
    }

    #[test]
    fn rejects_non_squad_positive() {
        let mut p = positive("q", "x", vec![]);
        p.origin = Origin::UwreNegative;
        assert!(negativize_squad(&Dataset::new("s", vec![p]), false).is_err());
    }

    #[test]
    fn token_insertion_on_negative_and_positive() {
        let mut neg = positive("n", "His father was born in Kenya.", vec![]);
        neg.origin = Origin::SquadNegative;
        let pos = positive("p", "President Obama was born in Honolulu, Hawaii.", vec![Span::new(28, "Honolulu, Hawaii")]);
        let d = Dataset::new("s", vec![neg, pos]);
        let out = insert_no_answer_token(&d, DEFAULT_NO_ANSWER_TOKEN).unwrap();
        assert_eq!(out.instances[0].context, "NoAnswerFound His father was born in Kenya.");
        assert_eq!(out.instances[0].answers, vec![Span::new(0, "NoAnswerFound")]);
        let shifted = &out.instances[1];
        let recomputed = text::find_chars(&shifted.context, "Honolulu, Hawaii").unwrap();
        assert_eq!(recomputed, 42);
        assert_eq!(shifted.answers[0].start, recomputed);
        assert!(validate_dataset(&out).is_empty());
        assert_eq!(strip_no_answer_token(&out).unwrap().instances, d.instances);
    }

    #[test]
    fn empty_dataset_gets_flag() {
        let out = insert_no_answer_token(&Dataset::default(), DEFAULT_NO_ANSWER_TOKEN).unwrap();
        assert!(out.is_empty());
        assert_eq!(out.no_answer_token.as_deref(), Some(DEFAULT_NO_ANSWER_TOKEN));
    }

    #[test]
    fn double_adaptation_is_rejected() {
        let d = Dataset::new("s", vec![positive("p", "Obama was born in Hawaii.", vec![Span::new(18, "Hawaii")])]);
        let once = insert_no_answer_token(&d, "NoAnswerFound").unwrap();
        assert!(insert_no_answer_token(&once, "NoAnswerFound").is_err());
        let mut unflagged = once.clone();
        unflagged.no_answer_token = None;
        assert!(insert_no_answer_token(&unflagged, "NoAnswerFound").is_err());
        assert!(insert_no_answer_token(&d, "No Answer").is_err());
    }
}
