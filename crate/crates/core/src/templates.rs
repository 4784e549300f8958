//! KB query to natural-language question translation.

use std::collections::HashSet;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{QuestionTemplate, RelationQuery};

/// Replace the template's placeholder with the query's subject entity.
///
/// Substitution is positional: an entity that itself reads `XXX` is inserted
/// verbatim and nothing else in the pattern changes.
pub fn instantiate(t: &QuestionTemplate, q: &RelationQuery) -> Result<String> {
    if t.relation() != q.relation {
        return Err(Error::RelationMismatch {
            template: t.relation().to_string(),
            query: q.relation.clone(),
        });
    }
    Ok(fill(t, &q.subject_entity))
}

pub(crate) fn fill(t: &QuestionTemplate, entity: &str) -> String {
    let (before, after) = t.parts();
    let mut out = String::with_capacity(before.len() + entity.len() + after.len());
    out.push_str(before);
    out.push_str(entity);
    out.push_str(after);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// Parse `relation<TAB>pattern` rows. Invalid rows are rejected with their
/// line number; exact duplicate rows are kept once.
pub fn parse_templates(text: &str) -> (Vec<QuestionTemplate>, Vec<Rejection>) {
    let mut templates = Vec::new();
    let mut rejections = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let row = raw.strip_suffix('\r').unwrap_or(raw);
        if row.trim().is_empty() {
            continue;
        }
        let Some((relation, pattern)) = row.split_once('\t') else {
            rejections.push(Rejection { line, reason: "expected `relation<TAB>pattern`".into() });
            continue;
        };
        match QuestionTemplate::new(relation, pattern) {
            Ok(t) => {
                if seen.insert((relation.to_string(), pattern.to_string())) {
                    templates.push(t);
                }
            }
            Err(e) => rejections.push(Rejection { line, reason: e.to_string() }),
        }
    }
    (templates, rejections)
}

pub fn load_templates(path: &Path) -> Result<(Vec<QuestionTemplate>, Vec<Rejection>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_templates(&text))
}

pub fn to_tsv(templates: &[QuestionTemplate]) -> String {
    templates.iter().map(|t| format!("{}\t{}\n", t.relation(), t.pattern())).collect()
}

/// Template inventory with deterministic per-relation selection.
#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    templates: Vec<QuestionTemplate>,
}

impl TemplateSet {
    pub fn new(templates: Vec<QuestionTemplate>) -> Self {
        TemplateSet { templates }
    }

    pub fn all(&self) -> &[QuestionTemplate] {
        &self.templates
    }

    /// The `index`-th template for `relation`, in file order.
    pub fn get(&self, relation: &str, index: usize) -> Option<&QuestionTemplate> {
        self.templates.iter().filter(|t| t.relation() == relation).nth(index)
    }

    pub fn first(&self, relation: &str) -> Option<&QuestionTemplate> {
        self.get(relation, 0)
    }
}
