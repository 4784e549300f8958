//! Canonical data model: instances, spans, datasets and the records that
//! travel between modules.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::provenance::Invocation;
use crate::text;

/// Literal placeholder token in question templates.
pub const PLACEHOLDER: &str = "XXX";

/// Answer location inside a context, in characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub text: String,
}

impl Span {
    pub fn new(start: usize, text: impl Into<String>) -> Self {
        Span { start, text: text.into() }
    }

    /// Exclusive end offset.
    pub fn end(&self) -> usize {
        self.start + text::char_len(&self.text)
    }

    pub fn matches(&self, context: &str) -> bool {
        !self.text.is_empty()
            && text::slice_chars(context, self.start, text::char_len(&self.text))
                == Some(self.text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    SquadPositive,
    SquadNegative,
    UwrePositive,
    UwreNegative,
    ChallengeNegative,
    Synthetic,
}

impl Origin {
    pub fn is_negative(self) -> bool {
        matches!(self, Origin::SquadNegative | Origin::UwreNegative | Origin::ChallengeNegative)
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Origin::SquadPositive | Origin::UwrePositive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train, dev or test)")),
        }
    }
}

/// One question/context pair. An empty `answers` list marks a negative.
///
/// Field order is the canonical JSONL key order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub question: String,
    pub context: String,
    pub answers: Vec<Span>,
    pub relation: Option<String>,
    pub subject_entity: Option<String>,
    pub origin: Origin,
    pub split: Split,
}

impl Instance {
    pub fn is_negative(&self) -> bool {
        self.answers.is_empty()
    }
}

/// One step applied to a dataset, recorded so the dataset can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub operation: String,
    pub parameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Filled in by the command line layer: the exact command plus file digests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invocation: Option<Invocation>,
}

impl ProvenanceEntry {
    pub fn new(operation: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        ProvenanceEntry { operation: operation.to_string(), parameters, seed, invocation: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub name: String,
    pub instances: Vec<Instance>,
    pub provenance_log: Vec<ProvenanceEntry>,
    /// Set once the dummy no-answer token has been inserted into every context.
    pub no_answer_token: Option<String>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Self {
        Dataset { name: name.into(), instances, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Same metadata, new instances, with `entry` appended to the log.
    pub fn derive(&self, name: impl Into<String>, instances: Vec<Instance>, entry: ProvenanceEntry) -> Dataset {
        let mut provenance_log = self.provenance_log.clone();
        provenance_log.push(entry);
        Dataset {
            name: name.into(),
            instances,
            provenance_log,
            no_answer_token: self.no_answer_token.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationQuery {
    pub relation: String,
    pub subject_entity: String,
}

impl RelationQuery {
    pub fn new(relation: impl Into<String>, subject_entity: impl Into<String>) -> Result<Self> {
        let (relation, subject_entity) = (relation.into(), subject_entity.into());
        if relation.is_empty() || subject_entity.is_empty() {
            return Err(Error::InvalidInput(
                "relation query needs a non-empty relation and subject entity".into(),
            ));
        }
        Ok(RelationQuery { relation, subject_entity })
    }
}

/// Relation-level question pattern with exactly one `XXX` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuestionTemplate {
    relation: String,
    pattern: String,
    placeholder_at: usize,
}

impl QuestionTemplate {
    pub fn new(relation: impl Into<String>, pattern: impl Into<String>) -> Result<Self> {
        let (relation, pattern) = (relation.into(), pattern.into());
        if relation.is_empty() {
            return Err(Error::Template(format!("template `{pattern}` has an empty relation")));
        }
        let occurrences = text::count_overlapping(&pattern, PLACEHOLDER);
        if occurrences != 1 {
            return Err(Error::Template(format!(
                "pattern `{pattern}` must contain the placeholder {PLACEHOLDER} exactly once, found {occurrences}"
            )));
        }
        let placeholder_at = pattern.find(PLACEHOLDER).expect("counted above");
        Ok(QuestionTemplate { relation, pattern, placeholder_at })
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    /// Pattern text before and after the placeholder.
    pub fn parts(&self) -> (&str, &str) {
        (
            &self.pattern[..self.placeholder_at],
            &self.pattern[self.placeholder_at + PLACEHOLDER.len()..],
        )
    }
}

/// A model's output for one instance; `answer: None` asserts no answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    #[serde(rename = "id")]
    pub instance_id: String,
    pub answer: Option<String>,
}

impl Prediction {
    pub fn answer(id: impl Into<String>, answer: impl Into<String>) -> Self {
        Prediction { instance_id: id.into(), answer: Some(answer.into()) }
    }

    pub fn no_answer(id: impl Into<String>) -> Self {
        Prediction { instance_id: id.into(), answer: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    SpanMismatch,
    EmptySpanText,
    NegativeHasAnswers,
    PositiveWithoutAnswers,
    DuplicateId,
    MissingNoAnswerPrefix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub instance_id: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}: {}", self.instance_id, self.kind, self.detail)
    }
}

/// Check every type invariant; an empty result means the dataset is valid.
///
/// On datasets carrying a no-answer token, negatives must hold exactly the
/// dummy span `{0, token}` instead of an empty answer list.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let token = d.no_answer_token.as_deref();

    for inst in &d.instances {
        let mut push = |kind, detail: String| {
            violations.push(Violation { instance_id: inst.id.clone(), kind, detail })
        };
        if !seen.insert(inst.id.as_str()) {
            push(ViolationKind::DuplicateId, "id already used by an earlier instance".into());
        }
        for span in &inst.answers {
            if span.text.is_empty() {
                push(ViolationKind::EmptySpanText, format!("span at {} has empty text", span.start));
            } else if !span.matches(&inst.context) {
                push(
                    ViolationKind::SpanMismatch,
                    format!("context at {} does not read {:?}", span.start, span.text),
                );
            }
        }
        if let Some(tok) = token {
            let prefixed = inst
                .context
                .strip_prefix(tok)
                .is_some_and(|rest| rest.starts_with(' '));
            if !prefixed {
                push(ViolationKind::MissingNoAnswerPrefix, format!("context does not start with `{tok} `"));
            }
        }
        if inst.origin.is_negative() {
            let dummy_only = match token {
                Some(tok) => inst.answers.len() == 1 && inst.answers[0] == Span::new(0, tok),
                None => inst.answers.is_empty(),
            };
            if !dummy_only {
                push(
                    ViolationKind::NegativeHasAnswers,
                    format!("{:?} instance carries {} answer span(s)", inst.origin, inst.answers.len()),
                );
            }
        }
        if inst.origin.is_positive() && inst.answers.is_empty() {
            push(ViolationKind::PositiveWithoutAnswers, format!("{:?} instance has no answers", inst.origin));
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn inst(id: &str, context: &str, answers: Vec<Span>, origin: Origin) -> Instance {
        Instance {
            id: id.into(),
            question: "Where was Obama born?".into(),
            context: context.into(),
            answers,
            relation: None,
            subject_entity: None,
            origin,
            split: Split::Train,
        }
    }

    #[test]
    fn span_mismatch_is_reported() {
        let d = Dataset::new(
            "t",
            vec![inst("q1", "Obama was born in Hawaii.", vec![Span::new(0, "Hawaii")], Origin::SquadPositive)],
        );
        let v = validate_dataset(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].instance_id, "q1");
        assert_eq!(v[0].kind, ViolationKind::SpanMismatch);
    }

    #[test]
    fn empty_dataset_is_valid() {
        assert!(validate_dataset(&Dataset::default()).is_empty());
    }

    #[test]
    fn duplicate_ids() {
        let a = inst("a", "x", vec![], Origin::SquadNegative);
        let d = Dataset::new("t", vec![a.clone(), a]);
        let v = validate_dataset(&d);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DuplicateId);
    }

    #[test]
    fn polarity_follows_origin() {
        let d = Dataset::new(
            "t",
            vec![
                inst("p", "Hawaii", vec![], Origin::UwrePositive),
                inst("n", "Hawaii", vec![Span::new(0, "Hawaii")], Origin::ChallengeNegative),
                inst("s", "Hawaii", vec![], Origin::Synthetic),
            ],
        );
        let kinds: Vec<_> = validate_dataset(&d).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::PositiveWithoutAnswers, ViolationKind::NegativeHasAnswers]);
    }

    #[test]
    fn adapted_negatives_carry_the_dummy_span() {
        let mut d = Dataset::new(
            "t",
            vec![inst("n", "NoAnswerFound Kenya.", vec![Span::new(0, "NoAnswerFound")], Origin::SquadNegative)],
        );
        assert_eq!(validate_dataset(&d).len(), 1);
        d.no_answer_token = Some("NoAnswerFound".into());
        assert!(validate_dataset(&d).is_empty());
    }

    #[test]
    fn template_placeholder_count() {
        assert!(QuestionTemplate::new("r", "Where was XXX born?").is_ok());
        assert!(QuestionTemplate::new("r", "Where was he born?").is_err());
        assert!(QuestionTemplate::new("r", "XXX and XXX").is_err());
        assert!(QuestionTemplate::new("r", "XXXX?").is_err());
    }

    #[test]
    fn relation_query_fields_non_empty() {
        assert!(RelationQuery::new("place_of_birth", "Obama").is_ok());
        assert!(RelationQuery::new("", "Obama").is_err());
        assert!(RelationQuery::new("place_of_birth", "").is_err());
    }

    #[test]
    fn canonical_field_order() {
        let i = inst("q", "Hawaii", vec![Span::new(0, "Hawaii")], Origin::SquadPositive);
        let line = serde_json::to_string(&i).unwrap();
        assert_eq!(
            line,
            r#"{"id":"q","question":"Where was Obama born?","context":"Hawaii","answers":[{"start":0,"text":"Hawaii"}],"relation":null,"subject_entity":null,"origin":"squad_positive","split":"train"}"#
        );
    }
}
