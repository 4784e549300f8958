//! Challenge negatives (a sentence paired with the same relation's question
//! about a different entity) and UWRE+ splits that swap half of the original
//! negatives for them.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, Origin, ProvenanceEntry};
use crate::sampling;
use crate::templates::{self, TemplateSet};

pub const CHALLENGE_ID_SUFFIX: &str = "-chal";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeReport {
    pub skipped_no_donor: usize,
    pub shortfall: usize,
    pub seed: u64,
}

/// Entities of `relation` that may be asked about over `sentence`: different
/// from `entity` and not occurring in the sentence, case-insensitively.
pub fn eligible_donors<'a>(entities: &'a [String], entity: &str, sentence: &str) -> Vec<&'a str> {
    let lower = sentence.to_lowercase();
    entities
        .iter()
        .filter(|e| e.as_str() != entity && !lower.contains(&e.to_lowercase()))
        .map(String::as_str)
        .collect()
}

/// Build one challenge negative per `uwre_positive` instance that has an
/// eligible donor entity. Other instances in `positives` are ignored.
///
/// Donors are drawn uniformly from the eligible entities, in order of first
/// appearance, from a single stream seeded by `seed`.
pub fn build_challenge_set(positives: &Dataset, templates: &TemplateSet, seed: u64) -> Result<(Dataset, ChallengeReport)> {
    let sources: Vec<&Instance> =
        positives.instances.iter().filter(|i| i.origin == Origin::UwrePositive).collect();

    let mut by_relation: HashMap<&str, Vec<String>> = HashMap::new();
    for inst in &sources {
        let (Some(rel), Some(ent)) = (inst.relation.as_deref(), inst.subject_entity.as_deref()) else {
            return Err(Error::InvalidInput(format!(
                "`{}` needs relation and subject_entity to build challenge instances",
                inst.id
            )));
        };
        if templates.first(rel).is_none() {
            return Err(Error::InvalidInput(format!("no question template for relation `{rel}`")));
        }
        let entities = by_relation.entry(rel).or_default();
        if !entities.iter().any(|e| e == ent) {
            entities.push(ent.to_string());
        }
    }

    let existing: HashSet<&str> = positives.instances.iter().map(|i| i.id.as_str()).collect();
    let mut rng = sampling::rng(seed);
    let mut report = ChallengeReport { seed, ..Default::default() };
    let mut out = Vec::new();
    let mut collisions = Vec::new();

    for inst in sources {
        let rel = inst.relation.as_deref().expect("checked above");
        let ent = inst.subject_entity.as_deref().expect("checked above");
        let donors = eligible_donors(&by_relation[rel], ent, &inst.context);
        if donors.is_empty() {
            report.skipped_no_donor += 1;
            continue;
        }
        let donor = donors[sampling::pick(&mut rng, donors.len())];
        let template = templates.first(rel).expect("checked above");
        let id = format!("{}{CHALLENGE_ID_SUFFIX}", inst.id);
        if existing.contains(id.as_str()) {
            collisions.push(id.clone());
        }
        out.push(Instance {
            id,
            question: templates::fill(template, donor),
            context: inst.context.clone(),
            answers: Vec::new(),
            relation: Some(rel.to_string()),
            subject_entity: Some(donor.to_string()),
            origin: Origin::ChallengeNegative,
            split: inst.split,
        });
    }
    if !collisions.is_empty() {
        return Err(Error::IdCollision(collisions));
    }
    let entry = ProvenanceEntry::new(
        "build_challenge_set",
        json!({ "templates": templates::to_tsv(templates.all()) }),
        Some(seed),
    );
    Ok((positives.derive(format!("{}-challenge", positives.name), out, entry), report))
}

/// Replace a seeded half (rounded down) of the `uwre_negative` instances with
/// challenge negatives sampled from `pool`. Replacements take the removed
/// instances' positions; when the pool runs short the remaining removals are
/// simply dropped and reported as `shortfall`.
pub fn build_uwre_plus(split: &Dataset, pool: &Dataset, seed: u64) -> Result<(Dataset, ChallengeReport)> {
    if pool.is_empty() {
        return Err(Error::InvalidInput("challenge pool is empty".into()));
    }
    if let Some(bad) = pool.instances.iter().find(|i| i.origin != Origin::ChallengeNegative) {
        return Err(Error::InvalidInput(format!("pool instance `{}` is {:?}, not challenge_negative", bad.id, bad.origin)));
    }
    let negatives: Vec<usize> = split
        .instances
        .iter()
        .enumerate()
        .filter(|(_, i)| i.origin == Origin::UwreNegative)
        .map(|(idx, _)| idx)
        .collect();
    if negatives.is_empty() {
        return Err(Error::InvalidInput("split has no uwre_negative instances to replace".into()));
    }
    let ids: HashSet<&str> = split.instances.iter().map(|i| i.id.as_str()).collect();
    let collisions: Vec<String> =
        pool.instances.iter().filter(|i| ids.contains(i.id.as_str())).map(|i| i.id.clone()).collect();
    if !collisions.is_empty() {
        return Err(Error::IdCollision(collisions));
    }

    let half = negatives.len() / 2;
    let mut rng = sampling::rng(seed);
    let removed: HashSet<usize> =
        sampling::sample_indices(&mut rng, negatives.len(), half).into_iter().map(|k| negatives[k]).collect();
    let added = half.min(pool.len());
    let mut replacements = sampling::sample_indices(&mut rng, pool.len(), added)
        .into_iter()
        .map(|k| &pool.instances[k]);

    let mut out = Vec::with_capacity(split.len());
    for (idx, inst) in split.instances.iter().enumerate() {
        if !removed.contains(&idx) {
            out.push(inst.clone());
        } else if let Some(r) = replacements.next() {
            out.push(r.clone());
        }
    }
    let report = ChallengeReport { skipped_no_donor: 0, shortfall: half - added, seed };
    let entry = ProvenanceEntry::new("build_uwre_plus", json!({ "pool": pool.name }), Some(seed));
    Ok((split.derive(format!("{}-plus", split.name), out, entry), report))
}
