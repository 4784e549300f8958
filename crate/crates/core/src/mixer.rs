//! Seeded, nested sampling of an augmentation set appended to a base set.
//!
//! Every size in a [`MixSpec`] draws from the same shuffled order, so the
//! sample for a smaller size is always a subset of the sample for a larger
//! one. Sampled instances keep their original relative order.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::io::{JsonlReader, JsonlWriter};
use crate::model::{Dataset, Instance, ProvenanceEntry};
use crate::sampling;

pub fn default_sizes() -> Vec<usize> {
    vec![1_000, 10_000, 100_000, 1_000_000]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    pub base: String,
    pub augment: String,
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    pub seed: u64,
}

impl MixSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.iter().any(|&k| k == 0) {
            return Err(Error::InvalidInput("mix sizes must be positive".into()));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!("mix sizes must be strictly increasing: {:?}", self.sizes)));
        }
        Ok(())
    }

    pub fn output_name(&self, k: usize) -> String {
        format!("{}+{}@{}", self.base, self.augment, k)
    }
}

/// Sorted positions of a uniform `n`-sample of `0..len`.
pub fn sample_positions(len: usize, n: usize, seed: u64) -> Vec<usize> {
    sampling::sample_indices(&mut sampling::rng(seed), len, n)
}

pub fn sample_without_replacement(d: &Dataset, n: usize, seed: u64) -> Dataset {
    if n >= d.len() {
        log::info!("sample of {n} from {} covers the whole dataset `{}`", d.len(), d.name);
    }
    let instances = sample_positions(d.len(), n, seed).into_iter().map(|i| d.instances[i].clone()).collect();
    d.derive(
        format!("{}@{n}", d.name),
        instances,
        ProvenanceEntry::new("sample_without_replacement", json!({ "n": n }), Some(seed)),
    )
}

fn check_collisions<'a>(base_ids: &HashSet<&str>, augment_ids: impl Iterator<Item = &'a str>) -> Result<()> {
    let offenders: Vec<String> = augment_ids.filter(|id| base_ids.contains(id)).map(str::to_string).collect();
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Error::IdCollision(offenders))
    }
}

pub fn mix_entry(spec: &MixSpec, k: usize) -> ProvenanceEntry {
    ProvenanceEntry::new(
        "mix",
        json!({ "base": spec.base, "augment": spec.augment, "sizes": spec.sizes, "size": k }),
        Some(spec.seed),
    )
}

/// In-memory mix: one dataset per size, `base` followed by the sample.
pub fn mix(spec: &MixSpec, base: &Dataset, augment: &Dataset) -> Result<Vec<Dataset>> {
    spec.validate()?;
    let base_ids: HashSet<&str> = base.instances.iter().map(|i| i.id.as_str()).collect();
    check_collisions(&base_ids, augment.instances.iter().map(|i| i.id.as_str()))?;

    let log = crate::provenance::merge_logs([&base.provenance_log[..], &augment.provenance_log[..]]);
    Ok(spec
        .sizes
        .iter()
        .map(|&k| {
            if k > augment.len() {
                log::info!("mix size {k} truncated to augment size {}", augment.len());
            }
            let mut instances = base.instances.clone();
            instances.extend(sample_positions(augment.len(), k, spec.seed).into_iter().map(|i| augment.instances[i].clone()));
            let mut provenance_log = log.clone();
            provenance_log.push(mix_entry(spec, k));
            Dataset {
                name: spec.output_name(k),
                instances,
                provenance_log,
                no_answer_token: base.no_answer_token.clone(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixOutput {
    pub name: String,
    pub path: PathBuf,
    pub size: usize,
    pub sampled: usize,
    pub count: usize,
    pub truncated: bool,
}

/// File-backed mix that never holds either dataset in memory: one pass over
/// `augment` collects ids, then each output streams `base` and the selected
/// `augment` lines. Outputs are `{out_dir}/{name}.jsonl`.
pub fn mix_files(spec: &MixSpec, base: &Path, augment: &Path, out_dir: &Path) -> Result<Vec<MixOutput>> {
    spec.validate()?;
    let mut base_ids_owned = Vec::new();
    for inst in JsonlReader::<Instance>::open(base)? {
        base_ids_owned.push(inst?.id);
    }
    let base_ids: HashSet<&str> = base_ids_owned.iter().map(String::as_str).collect();

    let mut augment_len = 0usize;
    let mut offenders = Vec::new();
    for inst in JsonlReader::<Instance>::open(augment)? {
        let inst = inst?;
        if base_ids.contains(inst.id.as_str()) {
            offenders.push(inst.id);
        }
        augment_len += 1;
    }
    if !offenders.is_empty() {
        return Err(Error::IdCollision(offenders));
    }

    let largest = spec.sizes.last().copied().unwrap_or(0);
    let order = sampling::shuffled_prefix(&mut sampling::rng(spec.seed), augment_len, largest);

    let mut outputs = Vec::with_capacity(spec.sizes.len());
    for &k in &spec.sizes {
        let take = k.min(augment_len);
        let mut selected = vec![false; augment_len];
        for &i in &order[..take] {
            selected[i] = true;
        }
        let name = spec.output_name(k);
        let path = out_dir.join(format!("{name}.jsonl"));
        let mut w = JsonlWriter::create(&path)?;
        for inst in JsonlReader::<Instance>::open(base)? {
            w.write(&inst?)?;
        }
        for (i, inst) in JsonlReader::<Instance>::open(augment)?.enumerate() {
            let inst = inst?;
            if selected[i] {
                w.write(&inst)?;
            }
        }
        let count = w.finish()?;
        if take < k {
            log::info!("mix size {k} truncated to augment size {augment_len}");
        }
        outputs.push(MixOutput { name, path, size: k, sampled: take, count, truncated: take < k });
    }
    Ok(outputs)
}
