//! Command line surface. Every command that writes files also writes a
//! `<file>.meta.json` sidecar whose provenance log ends with the exact command
//! and the digests of everything it read and wrote; `replay` re-runs such a
//! log and checks the outputs byte for byte.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::baseline::{self, BaselineConfig, IdfSource};
use crate::challenge;
use crate::error::Error;
use crate::ingest;
use crate::io::{self, Sidecar};
use crate::metrics::{self, MatchMode, ScoreOptions, ZeroPolicy};
use crate::mixer::{self, MixSpec};
use crate::model::{validate_dataset, Dataset, ProvenanceEntry, Split};
use crate::provenance::{self, FileDigest, Invocation};
use crate::templates::{self, TemplateSet};
use crate::transforms;

/// Overrides the scratch directory used by `replay`.
pub const WORK_DIR_ENV: &str = "SLOTFILL_WORK_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "slotfill", version, about = "Build and score QA-style slot-filling datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Convert SQuAD v1.1 JSON into canonical JSONL positives.
    IngestSquad(IngestSquadArgs),
    /// Convert UWRE TSV records into canonical JSONL plus a template inventory.
    IngestUwre(IngestUwreArgs),
    /// Add negatives built by removing answer-bearing sentences.
    Negativize(NegativizeArgs),
    /// Prefix every context with the dummy no-answer token.
    AdaptNoanswer(AdaptArgs),
    /// Pair each positive's sentence with a question about another entity.
    BuildChallenge(BuildChallengeArgs),
    /// Replace half of a split's negatives with challenge negatives.
    BuildUwrePlus(BuildUwrePlusArgs),
    /// Append nested seeded samples of one dataset to another.
    Mix(MixArgs),
    /// Run the lexical baseline and write a prediction file.
    PredictBaseline(PredictArgs),
    /// Slot-filling precision, recall and F1.
    Score(ScoreArgs),
    /// No-answer accuracy on an all-negative dataset.
    ScoreChallenge(ScoreChallengeArgs),
    /// Check every data-model invariant of a dataset file.
    Validate(ValidateArgs),
    /// Re-run a provenance log and verify every output byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestSquadArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub split: Split,
    /// Dataset name; defaults to the output file stem.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct IngestUwreArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub split: Split,
    /// Where to write the `relation<TAB>pattern` template inventory.
    #[arg(long)]
    pub templates_out: PathBuf,
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct NegativizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub keep_positives: bool,
    /// Also write the transform report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AdaptArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = transforms::DEFAULT_NO_ANSWER_TOKEN)]
    pub token: String,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BuildChallengeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub templates: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BuildUwrePlusArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub pool: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; the effective seed is derived from it and the split name.
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct MixArgs {
    /// JSON mix spec: {"base", "augment", "sizes", "seed"}.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub augment: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdfArg {
    SelfCorpus,
    Uniform,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PredictArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Baseline config JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub max_span_tokens: Option<usize>,
    #[arg(long, value_enum)]
    pub idf: Option<IdfArg>,
    /// Pick the threshold that maximizes F1 on this held-out dataset.
    #[arg(long, conflicts_with = "threshold")]
    pub tune_on: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchArg {
    Exact,
    TokenF1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroArg {
    Zero,
    Vacuous,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScoreArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub preds: PathBuf,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the one-line TSV form instead of JSON.
    #[arg(long)]
    pub tsv: bool,
    #[arg(long = "match", value_enum, default_value = "exact")]
    pub match_mode: MatchArg,
    #[arg(long, value_enum, default_value = "zero")]
    pub zero_policy: ZeroArg,
    /// Treat this token as "no answer" even if the dataset sidecar does not say so.
    #[arg(long)]
    pub no_answer_token: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScoreChallengeArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub preds: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub tsv: bool,
    #[arg(long)]
    pub no_answer_token: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub no_answer_token: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `.meta.json` sidecar (or any file holding a `provenance_log`).
    #[arg(long)]
    pub log: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    /// Data failed a check: exit 1.
    Validation(String),
    /// Bad flags, unreadable or malformed input: exit 2.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Usage(_) => EXIT_USAGE,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli.command, &mut stdout.lock()) {
        Ok(_) => EXIT_OK,
        Err(f) => {
            match &f {
                Failure::Validation(m) => eprintln!("validation failed: {m}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
            }
            f.exit_code()
        }
    }
}

/// Run one command, writing human-readable output to `out`. Returns the
/// digests of the files it produced, in a fixed order.
pub fn execute(cmd: &Command, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    match cmd {
        Command::IngestSquad(a) => ingest_squad(cmd, a, out),
        Command::IngestUwre(a) => ingest_uwre(cmd, a, out),
        Command::Negativize(a) => negativize(cmd, a, out),
        Command::AdaptNoanswer(a) => adapt(cmd, a),
        Command::BuildChallenge(a) => build_challenge(cmd, a, out),
        Command::BuildUwrePlus(a) => build_uwre_plus(cmd, a, out),
        Command::Mix(a) => mix(cmd, a, out),
        Command::PredictBaseline(a) => predict(cmd, a, out),
        Command::Score(a) => score(cmd, a, out),
        Command::ScoreChallenge(a) => score_challenge(cmd, a, out),
        Command::Validate(a) => validate(a, out).map(|_| Vec::new()),
        Command::Replay(a) => replay(a, out).map(|_| Vec::new()),
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    writeln!(out, "{text}").map_err(|e| Failure::Usage(e.to_string()))
}

fn print_line(out: &mut dyn Write, line: &str) -> CliResult<()> {
    writeln!(out, "{line}").map_err(|e| Failure::Usage(e.to_string()))
}

/// Digests of the given inputs plus their sidecars, when present.
fn input_digests(inputs: &[&Path]) -> CliResult<Vec<FileDigest>> {
    let mut digests = Vec::new();
    for p in inputs {
        digests.push(FileDigest::of(p)?);
        let meta = io::sidecar_path(p);
        if meta.exists() {
            digests.push(FileDigest::of(&meta)?);
        }
    }
    Ok(digests)
}

fn invocation(cmd: &Command, inputs: &[&Path], outputs: &[&Path]) -> CliResult<Invocation> {
    Ok(Invocation {
        command: serde_json::to_value(cmd).map_err(Error::from)?,
        inputs: input_digests(inputs)?,
        outputs: outputs.iter().map(|p| FileDigest::of(p)).collect::<crate::Result<_>>()?,
    })
}

fn stamp(log: &mut [ProvenanceEntry], inv: Invocation) {
    if let Some(last) = log.last_mut() {
        last.invocation = Some(inv);
    }
}

/// Write the dataset's JSONL, then its sidecar with the invocation attached to
/// the newest log entry. `extra_outputs` must already exist.
fn emit_dataset(
    cmd: &Command,
    path: &Path,
    mut d: Dataset,
    inputs: &[&Path],
    extra_outputs: &[&Path],
) -> CliResult<Vec<FileDigest>> {
    let mut w = io::JsonlWriter::create(path)?;
    for inst in &d.instances {
        w.write(inst)?;
    }
    w.finish()?;
    let mut outputs = vec![path];
    outputs.extend_from_slice(extra_outputs);
    let inv = invocation(cmd, inputs, &outputs)?;
    let digests = inv.outputs.clone();
    stamp(&mut d.provenance_log, inv);
    io::write_sidecar(
        path,
        &Sidecar {
            name: Some(d.name.clone()),
            no_answer_token: d.no_answer_token.clone(),
            provenance_log: d.provenance_log,
        },
    )?;
    Ok(digests)
}

/// Sidecar for a non-dataset output (predictions, reports).
fn emit_log(cmd: &Command, path: &Path, mut log: Vec<ProvenanceEntry>, entry: ProvenanceEntry, inputs: &[&Path]) -> CliResult<Vec<FileDigest>> {
    log.push(entry);
    let inv = invocation(cmd, inputs, &[path])?;
    let digests = inv.outputs.clone();
    stamp(&mut log, inv);
    io::write_sidecar(path, &Sidecar { provenance_log: log, ..Default::default() })?;
    Ok(digests)
}

fn dataset_name(explicit: &Option<String>, out: &Path) -> String {
    explicit.clone().unwrap_or_else(|| io::default_name(out))
}

fn ingest_squad(cmd: &Command, a: &IngestSquadArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let file = ingest::parse_squad(io::open(&a.input)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    let (d, report) = ingest::ingest_squad(&file, a.split, &dataset_name(&a.name, &a.out));
    print_json(out, &report)?;
    emit_dataset(cmd, &a.out, d, &[&a.input], &[])
}

fn ingest_uwre(cmd: &Command, a: &IngestUwreArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| Error::io(&a.input, e))?;
    let (d, inventory, report) = ingest::ingest_uwre(&text, a.split, &dataset_name(&a.name, &a.out))
        .map_err(|e| Failure::Usage(format!("{}: {e}", a.input.display())))?;
    std::fs::write(&a.templates_out, templates::to_tsv(&inventory)).map_err(|e| Error::io(&a.templates_out, e))?;
    print_json(out, &report)?;
    emit_dataset(cmd, &a.out, d, &[&a.input], &[&a.templates_out])
}

fn write_report<T: Serialize>(path: &Option<PathBuf>, report: &T, out: &mut dyn Write) -> CliResult<()> {
    if let Some(p) = path {
        io::write_json(p, report)?;
    }
    print_json(out, report)
}

fn negativize(cmd: &Command, a: &NegativizeArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let d = io::read_dataset(&a.input)?;
    let (mut neg, report) = transforms::negativize_squad(&d, a.keep_positives)?;
    neg.name = io::default_name(&a.out);
    write_report(&a.report, &report, out)?;
    emit_dataset(cmd, &a.out, neg, &[&a.input], &[])
}

fn adapt(cmd: &Command, a: &AdaptArgs) -> CliResult<Vec<FileDigest>> {
    let d = io::read_dataset(&a.input)?;
    let mut adapted = transforms::insert_no_answer_token(&d, &a.token)?;
    adapted.name = io::default_name(&a.out);
    emit_dataset(cmd, &a.out, adapted, &[&a.input], &[])
}

fn load_template_set(path: &Path) -> CliResult<TemplateSet> {
    let (ts, rejections) = templates::load_templates(path)?;
    if let Some(r) = rejections.first() {
        return Err(Failure::Usage(format!("{}:{}: {}", path.display(), r.line, r.reason)));
    }
    Ok(TemplateSet::new(ts))
}

fn build_challenge(cmd: &Command, a: &BuildChallengeArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let d = io::read_dataset(&a.input)?;
    let set = load_template_set(&a.templates)?;
    let (mut c, report) = challenge::build_challenge_set(&d, &set, a.seed)?;
    c.name = io::default_name(&a.out);
    write_report(&a.report, &report, out)?;
    emit_dataset(cmd, &a.out, c, &[&a.input, &a.templates], &[])
}

/// Split shared by every instance, used to derive the per-split seed.
fn common_split(d: &Dataset) -> CliResult<Split> {
    let mut splits = d.instances.iter().map(|i| i.split);
    let first = splits.next().ok_or_else(|| Failure::Usage(format!("dataset `{}` is empty", d.name)))?;
    if splits.any(|s| s != first) {
        return Err(Failure::Usage(format!("dataset `{}` mixes several splits", d.name)));
    }
    Ok(first)
}

fn build_uwre_plus(cmd: &Command, a: &BuildUwrePlusArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let split = io::read_dataset(&a.input)?;
    let pool = io::read_dataset(&a.pool)?;
    let seed = provenance::derive_seed(a.seed, common_split(&split)?.as_str());
    let (mut plus, report) = challenge::build_uwre_plus(&split, &pool, seed)?;
    plus.provenance_log = provenance::merge_logs([&split.provenance_log[..], &pool.provenance_log[..]]);
    plus.provenance_log.push(ProvenanceEntry::new(
        "build_uwre_plus",
        json!({ "pool": pool.name, "master_seed": a.seed }),
        Some(seed),
    ));
    plus.name = io::default_name(&a.out);
    write_report(&a.report, &report, out)?;
    emit_dataset(cmd, &a.out, plus, &[&a.input, &a.pool], &[])
}

fn mix(cmd: &Command, a: &MixArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let spec: MixSpec = io::read_json(&a.config)?;
    spec.validate()?;
    let base_meta = io::read_sidecar(&a.base)?.unwrap_or_default();
    let augment_meta = io::read_sidecar(&a.augment)?.unwrap_or_default();
    let outputs = mixer::mix_files(&spec, &a.base, &a.augment, &a.out_dir)?;
    print_json(out, &outputs)?;

    let paths: Vec<&Path> = outputs.iter().map(|o| o.path.as_path()).collect();
    let inv = invocation(cmd, &[&a.config, &a.base, &a.augment], &paths)?;
    let history = provenance::merge_logs([&base_meta.provenance_log[..], &augment_meta.provenance_log[..]]);
    for o in &outputs {
        let mut log = history.clone();
        log.push(mixer::mix_entry(&spec, o.size));
        stamp(&mut log, inv.clone());
        io::write_sidecar(
            &o.path,
            &Sidecar { name: Some(o.name.clone()), no_answer_token: base_meta.no_answer_token.clone(), provenance_log: log },
        )?;
    }
    Ok(inv.outputs)
}

fn predict(cmd: &Command, a: &PredictArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let d = io::read_dataset(&a.input)?;
    let mut cfg: BaselineConfig = match &a.config {
        Some(p) => io::read_json(p)?,
        None => BaselineConfig::default(),
    };
    if let Some(t) = a.threshold {
        cfg.no_answer_threshold = t;
    }
    if let Some(m) = a.max_span_tokens {
        cfg.max_span_tokens = m;
    }
    if let Some(idf) = a.idf {
        cfg.idf_source = match idf {
            IdfArg::SelfCorpus => IdfSource::SelfCorpus,
            IdfArg::Uniform => IdfSource::Uniform,
        };
    }
    cfg.validate()?;
    let idf = baseline::idf_for(&d, cfg.idf_source);
    let mut inputs: Vec<&Path> = vec![&a.input];
    if let Some(p) = &a.config {
        inputs.push(p);
    }
    if let Some(held) = &a.tune_on {
        let held_out = io::read_dataset(held)?;
        cfg.no_answer_threshold = baseline::tune_threshold(&held_out, &cfg, &idf);
        inputs.push(held);
    }
    let preds = baseline::predict_all(&d, &cfg, &idf);
    io::write_predictions(&a.out, &preds)?;
    print_json(out, &cfg)?;
    let entry = ProvenanceEntry::new("predict_baseline", serde_json::to_value(cfg).map_err(Error::from)?, None);
    emit_log(cmd, &a.out, d.provenance_log, entry, &inputs)
}

fn with_token(mut d: Dataset, token: &Option<String>) -> Dataset {
    if token.is_some() {
        d.no_answer_token = token.clone();
    }
    d
}

fn emit_report(
    cmd: &Command,
    report: &metrics::EvalReport,
    tsv: bool,
    path: &Option<PathBuf>,
    d: &Dataset,
    preds_path: &Path,
    inputs: &[&Path],
    operation: &str,
    out: &mut dyn Write,
) -> CliResult<Vec<FileDigest>> {
    if tsv {
        print_line(out, &report.to_tsv())?;
    } else {
        print_json(out, report)?;
    }
    let Some(p) = path else { return Ok(Vec::new()) };
    io::write_json(p, report)?;
    let preds_log = io::read_sidecar(preds_path)?.unwrap_or_default().provenance_log;
    let log = provenance::merge_logs([&d.provenance_log[..], &preds_log[..]]);
    let params = serde_json::to_value(cmd).map_err(Error::from)?;
    emit_log(cmd, p, log, ProvenanceEntry::new(operation, params, None), inputs)
}

fn score(cmd: &Command, a: &ScoreArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let d = with_token(io::read_dataset(&a.dataset)?, &a.no_answer_token);
    let preds = io::read_predictions(&a.preds)?;
    let opts = ScoreOptions {
        match_mode: match a.match_mode {
            MatchArg::Exact => MatchMode::Exact,
            MatchArg::TokenF1 => MatchMode::TokenF1,
        },
        zero_policy: match a.zero_policy {
            ZeroArg::Zero => ZeroPolicy::Zero,
            ZeroArg::Vacuous => ZeroPolicy::Vacuous,
        },
    };
    let report = metrics::score_slot_filling(&d, &preds, &opts)?;
    emit_report(cmd, &report, a.tsv, &a.out, &d, &a.preds, &[&a.dataset, &a.preds], "score_slot_filling", out)
}

fn score_challenge(cmd: &Command, a: &ScoreChallengeArgs, out: &mut dyn Write) -> CliResult<Vec<FileDigest>> {
    let d = with_token(io::read_dataset(&a.dataset)?, &a.no_answer_token);
    let preds = io::read_predictions(&a.preds)?;
    let report = metrics::score_challenge_accuracy(&d, &preds)?;
    emit_report(cmd, &report, a.tsv, &a.out, &d, &a.preds, &[&a.dataset, &a.preds], "score_challenge_accuracy", out)
}

fn validate(a: &ValidateArgs, out: &mut dyn Write) -> CliResult<()> {
    let d = with_token(io::read_dataset(&a.input)?, &a.no_answer_token);
    let violations = validate_dataset(&d);
    for v in &violations {
        print_line(out, &v.to_string())?;
    }
    if violations.is_empty() {
        print_line(out, &format!("{}: {} instances, no violations", a.input.display(), d.len()))
    } else {
        Err(Failure::Validation(format!("{} violation(s) in {}", violations.len(), a.input.display())))
    }
}

impl Command {
    /// Point every output at `dir`, keeping inputs untouched.
    fn redirect_outputs(&mut self, dir: &Path) {
        let to = |p: &mut PathBuf, tag: &str| {
            let file = p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            *p = dir.join(format!("{tag}-{file}"));
        };
        match self {
            Command::IngestSquad(a) => to(&mut a.out, "out"),
            Command::IngestUwre(a) => {
                to(&mut a.out, "out");
                to(&mut a.templates_out, "templates");
            }
            Command::Negativize(a) => {
                to(&mut a.out, "out");
                a.report = None;
            }
            Command::AdaptNoanswer(a) => to(&mut a.out, "out"),
            Command::BuildChallenge(a) => {
                to(&mut a.out, "out");
                a.report = None;
            }
            Command::BuildUwrePlus(a) => {
                to(&mut a.out, "out");
                a.report = None;
            }
            Command::Mix(a) => a.out_dir = dir.join("mix"),
            Command::PredictBaseline(a) => to(&mut a.out, "out"),
            Command::Score(a) => {
                if let Some(p) = a.out.as_mut() {
                    to(p, "out");
                }
            }
            Command::ScoreChallenge(a) => {
                if let Some(p) = a.out.as_mut() {
                    to(p, "out");
                }
            }
            Command::Validate(_) | Command::Replay(_) => {}
        }
    }
}

fn replay(a: &ReplayArgs, out: &mut dyn Write) -> CliResult<()> {
    let sidecar: Sidecar = io::read_json(&a.log)?;
    let scratch_root = std::env::var_os(WORK_DIR_ENV).map(PathBuf::from);
    let scratch = match &scratch_root {
        Some(root) => {
            std::fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
            tempfile::tempdir_in(root)
        }
        None => tempfile::tempdir(),
    }
    .map_err(|e| Failure::Usage(format!("cannot create scratch directory: {e}")))?;

    let mut steps = 0;
    for (n, entry) in sidecar.provenance_log.iter().enumerate() {
        let Some(inv) = &entry.invocation else { continue };
        let mut cmd: Command = serde_json::from_value(inv.command.clone())
            .map_err(|e| Failure::Usage(format!("log entry {n}: unreadable command: {e}")))?;
        for input in &inv.inputs {
            let now = provenance::sha256_file(&input.path)?;
            if now != input.sha256 {
                return Err(Failure::Validation(format!(
                    "step {n} ({}): input {} changed since it was recorded",
                    entry.operation,
                    input.path.display()
                )));
            }
        }
        let dir = scratch.path().join(format!("step{n}"));
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        cmd.redirect_outputs(&dir);
        let produced = execute(&cmd, &mut std::io::sink())?;
        if produced.len() != inv.outputs.len() {
            return Err(Failure::Validation(format!(
                "step {n} ({}): produced {} outputs, log records {}",
                entry.operation,
                produced.len(),
                inv.outputs.len()
            )));
        }
        for (got, want) in produced.iter().zip(&inv.outputs) {
            if got.sha256 != want.sha256 {
                return Err(Failure::Validation(format!(
                    "step {n} ({}): output {} differs from the recorded bytes",
                    entry.operation,
                    want.path.display()
                )));
            }
        }
        steps += 1;
    }
    print_line(out, &format!("replayed {steps} step(s): all outputs byte-identical"))
}
