//! Canonical JSONL reading and writing, plus the `.meta.json` sidecar that
//! carries a dataset's name, no-answer flag and provenance log.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance, Prediction, ProvenanceEntry};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_answer_token: Option<String>,
    #[serde(default)]
    pub provenance_log: Vec<ProvenanceEntry>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn read_sidecar(path: &Path) -> Result<Option<Sidecar>> {
    let meta = sidecar_path(path);
    if !meta.exists() {
        return Ok(None);
    }
    read_json(&meta).map(Some)
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    write_json(&sidecar_path(path), sidecar)
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Streams records from a JSONL file; blank lines are skipped.
pub struct JsonlReader<T> {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: DeserializeOwned> JsonlReader<T> {
    pub fn open(path: &Path) -> Result<Self> {
        Ok(JsonlReader {
            path: path.to_path_buf(),
            lines: open(path)?.lines(),
            line_no: 0,
            _marker: std::marker::PhantomData,
        })
    }
}

impl<T: DeserializeOwned> Iterator for JsonlReader<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let site = format!("{}:{}", self.path.display(), self.line_no);
            let de = &mut serde_json::Deserializer::from_str(&line);
            return Some(serde_path_to_error::deserialize(de).map_err(|e| {
                Error::parse(format!("{site} at `{}`", e.path()), e.inner())
            }));
        }
    }
}

/// Streams canonical lines to a file; one record per line, LF endings.
pub struct JsonlWriter {
    path: PathBuf,
    out: BufWriter<File>,
    count: usize,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(JsonlWriter { path: path.to_path_buf(), out: create(path)?, count: 0 })
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n").map_err(|e| Error::io(&self.path, e))?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(mut self) -> Result<usize> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.count)
    }
}

/// Canonical JSONL text for a list of instances.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn from_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(format!("line {}", i + 1), e)))
        .collect()
}

pub fn read_instances(path: &Path) -> Result<Vec<Instance>> {
    JsonlReader::open(path)?.collect()
}

/// Load a dataset and its sidecar (if any). Without a sidecar the name is the
/// file stem and the log is empty.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let instances = read_instances(path)?;
    let sidecar = read_sidecar(path)?.unwrap_or_default();
    Ok(Dataset {
        name: sidecar.name.unwrap_or_else(|| default_name(path)),
        instances,
        provenance_log: sidecar.provenance_log,
        no_answer_token: sidecar.no_answer_token,
    })
}

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    for inst in &d.instances {
        w.write(inst)?;
    }
    w.finish()?;
    write_sidecar(
        path,
        &Sidecar {
            name: Some(d.name.clone()),
            no_answer_token: d.no_answer_token.clone(),
            provenance_log: d.provenance_log.clone(),
        },
    )
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>> {
    JsonlReader::open(path)?.collect()
}

pub fn write_predictions(path: &Path, preds: &[Prediction]) -> Result<()> {
    let mut w = JsonlWriter::create(path)?;
    for p in preds {
        w.write(p)?;
    }
    w.finish().map(|_| ())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_reader(open(path)?);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::parse(format!("{} at `{}`", path.display(), e.path()), e.inner()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
}

pub fn default_name(path: &Path) -> String {
    let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
    file.strip_suffix(".jsonl").map(str::to_string).unwrap_or(file)
}
