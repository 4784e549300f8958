//! Readers for the two source formats: SQuAD v1.1 JSON and the UWRE
//! tab-separated record format.
//!
//! UWRE records are one per line:
//!
//! ```text
//! relation<TAB>template<TAB>entity<TAB>sentence<TAB>answer1|answer2|...
//! ```
//!
//! An empty final field marks a negative record.

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, Origin, ProvenanceEntry, QuestionTemplate, Span, Split};
use crate::templates;
use crate::text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadFile {
    #[serde(default)]
    pub version: serde_json::Value,
    pub data: Vec<SquadRawDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadRawDocument {
    pub title: String,
    pub paragraphs: Vec<SquadParagraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadParagraph {
    pub context: String,
    pub qas: Vec<SquadQa>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadQa {
    pub id: String,
    pub question: String,
    pub answers: Vec<SquadAnswer>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SquadAnswer {
    pub text: String,
    pub answer_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UwreRawRecord {
    pub relation: String,
    pub template: String,
    pub subject_entity: String,
    pub sentence: String,
    pub answers: Vec<String>,
}

/// An input record that was dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub input_count: usize,
    pub output_count: usize,
    pub dropped: Vec<Dropped>,
    /// Answers found more than once in their sentence; the first occurrence was used.
    pub ambiguous_answers: usize,
}

pub fn parse_squad<R: Read>(reader: R) -> Result<SquadFile> {
    let de = &mut serde_json::Deserializer::from_reader(reader);
    serde_path_to_error::deserialize(de).map_err(|e| Error::parse(format!("`{}`", e.path()), e.inner()))
}

/// Convert a SQuAD v1.1 document into positives, one per question.
pub fn ingest_squad(file: &SquadFile, split: Split, name: &str) -> (Dataset, IngestReport) {
    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut instances = Vec::new();

    for doc in &file.data {
        for para in &doc.paragraphs {
            for qa in &para.qas {
                report.input_count += 1;
                let mut drop = |reason: String| {
                    report.dropped.push(Dropped { id: qa.id.clone(), line: None, reason })
                };
                if qa.answers.is_empty() {
                    drop("question has no answers".into());
                    continue;
                }
                let mut answers: Vec<Span> = Vec::with_capacity(qa.answers.len());
                let mut bad = None;
                for a in &qa.answers {
                    let span = Span::new(a.answer_start, a.text.clone());
                    if !span.matches(&para.context) {
                        bad = Some(format!(
                            "answer_start {} does not index {:?} in the context",
                            a.answer_start, a.text
                        ));
                        break;
                    }
                    if !answers.contains(&span) {
                        answers.push(span);
                    }
                }
                if let Some(reason) = bad {
                    drop(reason);
                    continue;
                }
                if !seen.insert(qa.id.clone()) {
                    drop("duplicate question id".into());
                    continue;
                }
                instances.push(Instance {
                    id: qa.id.clone(),
                    question: qa.question.clone(),
                    context: para.context.clone(),
                    answers,
                    relation: None,
                    subject_entity: None,
                    origin: Origin::SquadPositive,
                    split,
                });
            }
        }
    }
    report.output_count = instances.len();
    let entry = ProvenanceEntry::new("ingest_squad", json!({ "split": split, "name": name }), None);
    let mut d = Dataset::new(name, instances);
    d.provenance_log.push(entry);
    (d, report)
}

/// Parse one TSV record. `line` is 1-based and only used for error sites.
pub fn parse_uwre_line(row: &str, line: usize) -> Result<UwreRawRecord> {
    let row = row.strip_suffix('\r').unwrap_or(row);
    let fields: Vec<&str> = row.split('\t').collect();
    if fields.len() != 5 {
        return Err(Error::parse(format!("line {line}"), format!("expected 5 tab-separated fields, found {}", fields.len())));
    }
    for (i, label) in ["relation", "template", "entity", "sentence"].iter().enumerate() {
        if fields[i].is_empty() {
            return Err(Error::parse(format!("line {line}"), format!("empty {label} field")));
        }
    }
    let answers = if fields[4].is_empty() {
        Vec::new()
    } else {
        let answers: Vec<String> = fields[4].split('|').map(str::to_string).collect();
        if answers.iter().any(String::is_empty) {
            return Err(Error::parse(format!("line {line}"), "empty answer between `|` separators"));
        }
        answers
    };
    Ok(UwreRawRecord {
        relation: fields[0].to_string(),
        template: fields[1].to_string(),
        subject_entity: fields[2].to_string(),
        sentence: fields[3].to_string(),
        answers,
    })
}

pub fn uwre_id(split: Split, line: usize) -> String {
    format!("uwre-{split}-{line}")
}

/// Convert UWRE TSV text into instances plus the distinct template inventory.
///
/// Answers are located at their first occurrence in the sentence.
pub fn ingest_uwre(tsv: &str, split: Split, name: &str) -> Result<(Dataset, Vec<QuestionTemplate>, IngestReport)> {
    let mut report = IngestReport::default();
    let mut instances = Vec::new();
    let mut inventory: Vec<QuestionTemplate> = Vec::new();

    for (idx, row) in tsv.lines().enumerate() {
        let line = idx + 1;
        if row.trim().is_empty() {
            continue;
        }
        report.input_count += 1;
        let rec = parse_uwre_line(row, line)?;
        let template = QuestionTemplate::new(rec.relation.clone(), rec.template.clone())
            .map_err(|e| Error::parse(format!("line {line}"), e))?;
        if !inventory.contains(&template) {
            inventory.push(template.clone());
        }
        let id = uwre_id(split, line);

        let mut answers = Vec::new();
        let mut missing = None;
        for a in &rec.answers {
            match text::find_chars(&rec.sentence, a) {
                Some(start) => {
                    if text::count_overlapping(&rec.sentence, a) > 1 {
                        report.ambiguous_answers += 1;
                        log::debug!("{id}: answer {a:?} occurs more than once; using first occurrence");
                    }
                    let span = Span::new(start, a.clone());
                    if !answers.contains(&span) {
                        answers.push(span);
                    }
                }
                None => {
                    missing = Some(a.clone());
                    break;
                }
            }
        }
        if let Some(a) = missing {
            report.dropped.push(Dropped {
                id,
                line: Some(line),
                reason: format!("answer {a:?} not found in sentence"),
            });
            continue;
        }
        let origin = if answers.is_empty() { Origin::UwreNegative } else { Origin::UwrePositive };
        instances.push(Instance {
            id,
            question: templates::fill(&template, &rec.subject_entity),
            context: rec.sentence,
            answers,
            relation: Some(rec.relation),
            subject_entity: Some(rec.subject_entity),
            origin,
            split,
        });
    }
    report.output_count = instances.len();
    let mut d = Dataset::new(name, instances);
    d.provenance_log
        .push(ProvenanceEntry::new("ingest_uwre", json!({ "split": split, "name": name }), None));
    Ok((d, inventory, report))
}
