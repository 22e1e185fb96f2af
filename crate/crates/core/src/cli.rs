//! `lisa` command line: corpus conversion, training, evaluation, prefix
//! curves, pattern mining and hidden-state export.
//!
//! Data goes to stdout (or `--out`), diagnostics to stderr. Exit status is 0
//! on success, 2 for usage or input-data errors, 1 for internal failures.
//! Every numeric or path option can also come from a `--config` file of
//! `key=value` lines (keys are the long flag names); explicit flags win.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::cbrnn::{evaluate, train_with_embeddings, LossConfig, ModelError, TrainConfig, TrainedModel};
use crate::corpus::{
    build_vocabulary, generate_synthetic, import_semeval, parse_corpus, with_id_prefix, write_corpus, CorpusError,
    CorpusSplit, LabeledSentence, SyntheticConfig,
};
use crate::embeddings::{init_random, load_pretrained_text, EmbeddingError};
use crate::interpret::{
    export_hidden_states, mine_patterns, prefix_curve, write_hidden_tsv, InterpretError, DEFAULT_TAU,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Data(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EmbeddingError> for CliError {
    fn from(e: EmbeddingError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<InterpretError> for CliError {
    fn from(e: InterpretError) -> Self {
        match e {
            InterpretError::UnknownRelation(_) | InterpretError::InvalidThreshold(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

fn write_err(e: io::Error) -> CliError {
    CliError::Internal(format!("write failed: {e}"))
}

#[derive(Debug, Parser)]
#[command(
    name = "lisa",
    version,
    about = "C-BRNN relation classifier with prefix scoring and saliency patterns"
)]
struct Cli {
    /// key=value file supplying defaults for any long option
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write the model file plus a per-epoch metrics log
    Train(TrainArgs),
    /// Per-prefix prediction curve for one sentence (CSV)
    Lisa(LisaArgs),
    /// Mine saliency patterns over a corpus (TSV)
    Patterns(PatternArgs),
    /// Accuracy and F1 over a corpus
    Eval(EvalArgs),
    /// Final combined hidden state per sentence (TSV)
    ExportHidden(ExportArgs),
    /// Write a synthetic train/dev/test corpus with planted triggers
    Generate(GenerateArgs),
    /// Convert the SemEval-2010 Task 8 text format to the normalized corpus format
    ImportSemeval(ImportArgs),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Normalized training corpus
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    dev: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    /// Train on a generated corpus, `<relations>x<sentences per relation>`
    #[arg(long)]
    synthetic: Option<String>,
    /// Model file to write
    #[arg(long)]
    out: Option<PathBuf>,
    /// Metrics log path (stdout when absent)
    #[arg(long)]
    metrics: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "lr", alias = "learning-rate")]
    lr: Option<f64>,
    /// Hidden size D
    #[arg(long)]
    hidden: Option<usize>,
    /// Embedding dimension d
    #[arg(long = "embed-dim")]
    embed_dim: Option<usize>,
    /// N-gram window size N (odd)
    #[arg(long)]
    ngram: Option<usize>,
    #[arg(long = "min-count")]
    min_count: Option<usize>,
    #[arg(long = "clip-norm")]
    clip_norm: Option<f64>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    shuffle: Option<bool>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "m-plus")]
    m_plus: Option<f64>,
    #[arg(long = "m-minus")]
    m_minus: Option<f64>,
    /// word2vec-style text vectors to initialise embeddings
    #[arg(long)]
    pretrained: Option<PathBuf>,
    #[arg(long = "freeze-embeddings", num_args = 0..=1, default_missing_value = "true")]
    freeze_embeddings: Option<bool>,
    /// Keep only `<e1> … </e2>` of every sentence
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    truncate: Option<bool>,
}

#[derive(Debug, Args)]
struct LisaArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// Space-separated tokens including the four entity markers
    #[arg(long)]
    sentence: Option<String>,
    /// Corpus to take the sentence from (with --id)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sentence id (line number) within --data
    #[arg(long)]
    id: Option<String>,
    /// Target relation; defaults to the gold label with --id
    #[arg(long)]
    relation: Option<String>,
    /// Must match the model's window size when given
    #[arg(long)]
    ngram: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    lookahead: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PatternArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    tau: Option<f64>,
    /// Reported N-gram width; defaults to the model's window size
    #[arg(long)]
    ngram: Option<usize>,
    #[arg(long = "only-correct", num_args = 0..=1, default_missing_value = "true")]
    only_correct: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    lookahead: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    truncate: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    truncate: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    truncate: Option<bool>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    relations: Option<usize>,
    #[arg(long = "per-relation")]
    per_relation: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory receiving train.tsv, dev.tsv, test.tsv and triggers.tsv
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// SemEval text file; standard input when absent or `-`
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const CONFIG_KEYS: &[&str] = &[
    "data",
    "dev",
    "test",
    "synthetic",
    "out",
    "metrics",
    "seed",
    "epochs",
    "lr",
    "hidden",
    "embed-dim",
    "ngram",
    "min-count",
    "clip-norm",
    "shuffle",
    "gamma",
    "m-plus",
    "m-minus",
    "pretrained",
    "freeze-embeddings",
    "truncate",
    "model",
    "sentence",
    "id",
    "relation",
    "lookahead",
    "tau",
    "only-correct",
    "relations",
    "per-relation",
    "out-dir",
    "input",
];

/// Values from a `--config` file.
#[derive(Debug, Default)]
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
            let key = k.trim().trim_start_matches("--").to_owned();
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "{}:{}: unknown key `{key}`",
                    path.display(),
                    i + 1
                )));
            }
            values.insert(key, v.trim().to_owned());
        }
        Ok(Settings { values })
    }

    /// Explicit flag, else config value, else `None`.
    fn get<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("invalid value `{raw}` for `{key}` in config"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        Ok(self.get(key, flag)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.get(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, A>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Train(a) => cmd_train(a, &settings, stdout, stderr),
        Command::Lisa(a) => cmd_lisa(a, &settings, stdout),
        Command::Patterns(a) => cmd_patterns(a, &settings, stdout),
        Command::Eval(a) => cmd_eval(a, &settings, stdout),
        Command::ExportHidden(a) => cmd_export_hidden(a, &settings, stdout),
        Command::Generate(a) => cmd_generate(a, &settings, stderr),
        Command::ImportSemeval(a) => cmd_import_semeval(a, &settings, stdout),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

fn read_corpus(path: &Path, truncate: bool) -> Result<Vec<LabeledSentence>, CliError> {
    let sentences = parse_corpus(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(if truncate {
        sentences.iter().map(LabeledSentence::truncated_to_arguments).collect()
    } else {
        sentences
    })
}

fn load_model(path: &Path) -> Result<TrainedModel<f64>, CliError> {
    TrainedModel::<f64>::from_text(&read_text(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or to `stdout` when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", p.display()))),
        None => stdout.write_all(bytes).map_err(write_err),
    }
}

fn parse_synthetic_spec(spec: &str, seed: u64) -> Result<SyntheticConfig, CliError> {
    let bad = || CliError::Usage(format!("--synthetic expects <relations>x<per-relation>, got `{spec}`"));
    let (r, n) = spec.split_once('x').ok_or_else(bad)?;
    Ok(SyntheticConfig {
        n_relations: r.trim().parse().map_err(|_| bad())?,
        sentences_per_relation: n.trim().parse().map_err(|_| bad())?,
        seed,
    })
}

fn cmd_train(a: TrainArgs, s: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let defaults = TrainConfig::default();
    let seed = s.or("seed", a.seed, defaults.seed)?;
    let cfg = TrainConfig {
        learning_rate: s.or("lr", a.lr, defaults.learning_rate)?,
        epochs: s.or("epochs", a.epochs, defaults.epochs)?,
        seed,
        window: s.or("ngram", a.ngram, defaults.window)?,
        hidden: s.or("hidden", a.hidden, defaults.hidden)?,
        embed_dim: s.or("embed-dim", a.embed_dim, defaults.embed_dim)?,
        min_count: s.or("min-count", a.min_count, defaults.min_count)?,
        clip_norm: s.or("clip-norm", a.clip_norm, defaults.clip_norm)?,
        shuffle: s.or("shuffle", a.shuffle, defaults.shuffle)?,
        trainable_embeddings: !s.or("freeze-embeddings", a.freeze_embeddings, false)?,
    };
    let ldef = LossConfig::default();
    let lcfg = LossConfig {
        gamma: s.or("gamma", a.gamma, ldef.gamma)?,
        m_plus: s.or("m-plus", a.m_plus, ldef.m_plus)?,
        m_minus: s.or("m-minus", a.m_minus, ldef.m_minus)?,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    lcfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let out: PathBuf = s.required("out", a.out)?;
    let metrics: Option<PathBuf> = s.get("metrics", a.metrics)?;
    let truncate = s.or("truncate", a.truncate, false)?;

    let synthetic: Option<String> = s.get("synthetic", a.synthetic)?;
    let data: Option<PathBuf> = s.get("data", a.data)?;
    let mut split = match (synthetic, data) {
        (Some(spec), None) => generate_synthetic(parse_synthetic_spec(&spec, seed)?)
            .map_err(|e| CliError::Usage(format!("--synthetic: {e}")))?,
        (None, Some(path)) => {
            let part = |p: Option<PathBuf>, prefix: &str| -> Result<Vec<LabeledSentence>, CliError> {
                Ok(match p {
                    Some(p) => with_id_prefix(read_corpus(&p, truncate)?, prefix),
                    None => Vec::new(),
                })
            };
            let train = with_id_prefix(read_corpus(&path, truncate)?, "train:");
            let dev = part(s.get("dev", a.dev)?, "dev:")?;
            let test = part(s.get("test", a.test)?, "test:")?;
            CorpusSplit::new(train, dev, test)?
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("--data and --synthetic are mutually exclusive".into())),
        (None, None) => return Err(CliError::Usage("one of --data or --synthetic is required".into())),
    };
    if truncate && !split.triggers.is_empty() {
        for part in [&mut split.train, &mut split.dev, &mut split.test] {
            *part = part.iter().map(LabeledSentence::truncated_to_arguments).collect();
        }
    }

    let vocab = build_vocabulary(&split.train, cfg.min_count)?;
    let pretrained: Option<PathBuf> = s.get("pretrained", a.pretrained)?;
    let embeddings = match pretrained {
        Some(p) => load_pretrained_text(&p, &vocab, cfg.embed_dim, seed)
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?,
        None => init_random(&vocab, cfg.embed_dim, seed)?,
    };
    let outcome = train_with_embeddings::<f64>(&split, vocab, embeddings, &cfg, &lcfg)?;
    outcome
        .model
        .save(&out)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", out.display())))?;

    let mut log = String::from("epoch\ttrain_loss\tdev_accuracy\n");
    for h in &outcome.history {
        let dev = h.dev_accuracy.map_or_else(|| "NA".to_owned(), |v| v.to_string());
        log.push_str(&format!("{}\t{}\t{}\n", h.epoch, h.train_loss, dev));
    }
    emit(metrics.as_deref(), stdout, log.as_bytes())?;
    writeln!(stderr, "kept epoch {} of {}", outcome.best_epoch, cfg.epochs).map_err(write_err)?;
    if !split.test.is_empty() {
        let report = evaluate(&outcome.model, &split.test)?;
        writeln!(
            stderr,
            "test accuracy: {}\ntest macro_f1: {}",
            report.accuracy, report.macro_f1
        )
        .map_err(write_err)?;
    }
    Ok(())
}

fn cmd_lisa(a: LisaArgs, s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&s.required::<PathBuf>("model", a.model)?)?;
    let lookahead = s.or("lookahead", a.lookahead, false)?;
    if let Some(n) = s.get::<usize>("ngram", a.ngram)? {
        if n != model.params.window {
            return Err(CliError::Usage(format!(
                "--ngram {n} does not match the model's window size {}",
                model.params.window
            )));
        }
    }
    let relation: Option<String> = s.get("relation", a.relation)?;
    let sentence_text: Option<String> = s.get("sentence", a.sentence)?;
    let (sentence, relation) = match sentence_text {
        Some(text) => {
            let relation = relation.ok_or_else(|| CliError::Usage("--sentence needs --relation".into()))?;
            let tokens = text.split_whitespace().map(str::to_owned).collect();
            let sentence = LabeledSentence::new("sentence", relation.clone(), tokens)
                .map_err(|e| CliError::Usage(format!("malformed sentence: {e}")))?;
            (sentence, relation)
        }
        None => {
            let data: PathBuf = s.required("data", a.data)?;
            let id: String = s.required("id", a.id)?;
            let sentence = read_corpus(&data, false)?
                .into_iter()
                .find(|x| x.id == id)
                .ok_or_else(|| CliError::Usage(format!("no sentence with id {id} in {}", data.display())))?;
            let relation = relation.unwrap_or_else(|| sentence.label.clone());
            (sentence, relation)
        }
    };
    let curve = prefix_curve(&model, &sentence, &relation, lookahead)?;
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).map_err(write_err)?;
    emit(s.get::<PathBuf>("out", a.out)?.as_deref(), stdout, &buf)
}

fn cmd_patterns(a: PatternArgs, s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&s.required::<PathBuf>("model", a.model)?)?;
    let sentences = read_corpus(
        &s.required::<PathBuf>("data", a.data)?,
        s.or("truncate", a.truncate, false)?,
    )?;
    let tau = s.or("tau", a.tau, DEFAULT_TAU)?;
    let ngram = s.or("ngram", a.ngram, model.params.window)?;
    let only_correct = s.or("only-correct", a.only_correct, true)?;
    let lookahead = s.or("lookahead", a.lookahead, true)?;
    let table = mine_patterns(&model, &sentences, tau, ngram, only_correct, lookahead)?;
    let mut buf = Vec::new();
    table.write_tsv(&mut buf).map_err(write_err)?;
    emit(s.get::<PathBuf>("out", a.out)?.as_deref(), stdout, &buf)
}

fn cmd_eval(a: EvalArgs, s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&s.required::<PathBuf>("model", a.model)?)?;
    let sentences = read_corpus(
        &s.required::<PathBuf>("data", a.data)?,
        s.or("truncate", a.truncate, false)?,
    )?;
    let report = evaluate(&model, &sentences)?;
    let mut text = format!("accuracy: {}\nmacro_f1: {}\n", report.accuracy, report.macro_f1);
    for c in &report.per_class {
        text.push_str(&format!(
            "precision[{l}]: {}\nrecall[{l}]: {}\nf1[{l}]: {}\n",
            c.precision,
            c.recall,
            c.f1,
            l = c.label
        ));
    }
    emit(s.get::<PathBuf>("out", a.out)?.as_deref(), stdout, text.as_bytes())
}

fn cmd_export_hidden(a: ExportArgs, s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&s.required::<PathBuf>("model", a.model)?)?;
    let sentences = read_corpus(
        &s.required::<PathBuf>("data", a.data)?,
        s.or("truncate", a.truncate, false)?,
    )?;
    let rows = export_hidden_states(&model, &sentences)?;
    let mut buf = Vec::new();
    write_hidden_tsv(&rows, &mut buf).map_err(write_err)?;
    emit(s.get::<PathBuf>("out", a.out)?.as_deref(), stdout, &buf)
}

fn cmd_generate(a: GenerateArgs, s: &Settings, stderr: &mut dyn Write) -> Result<(), CliError> {
    let config = SyntheticConfig {
        n_relations: s.or("relations", a.relations, 4)?,
        sentences_per_relation: s.or("per-relation", a.per_relation, 50)?,
        seed: s.or("seed", a.seed, 7)?,
    };
    let dir: PathBuf = s.required("out-dir", a.out_dir)?;
    let split = generate_synthetic(config).map_err(|e| CliError::Usage(e.to_string()))?;
    let io_err = |e: io::Error| CliError::Internal(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(&dir).map_err(io_err)?;
    fs::write(dir.join("train.tsv"), write_corpus(&split.train)).map_err(io_err)?;
    fs::write(dir.join("dev.tsv"), write_corpus(&split.dev)).map_err(io_err)?;
    fs::write(dir.join("test.tsv"), write_corpus(&split.test)).map_err(io_err)?;
    let triggers: String = split
        .triggers
        .iter()
        .map(|(r, t)| format!("{r}\t{}\n", t.join(" ")))
        .collect();
    fs::write(dir.join("triggers.tsv"), triggers).map_err(io_err)?;
    writeln!(
        stderr,
        "wrote {} train, {} dev, {} test sentences to {}",
        split.train.len(),
        split.dev.len(),
        split.test.len(),
        dir.display()
    )
    .map_err(write_err)
}

fn cmd_import_semeval(a: ImportArgs, s: &Settings, stdout: &mut dyn Write) -> Result<(), CliError> {
    let input: Option<PathBuf> = s.get("input", a.input)?;
    let raw = match input {
        Some(p) if p.as_os_str() != "-" => read_text(&p)?,
        _ => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Data(format!("cannot read stdin: {e}")))?;
            buf
        }
    };
    let sentences = import_semeval(&raw)?;
    emit(
        s.get::<PathBuf>("out", a.out)?.as_deref(),
        stdout,
        write_corpus(&sentences).as_bytes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("lisa").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        let (code, _, err) = run_capture(&["train", "--out", "/nonexistent/x"]);
        assert_eq!(code, 2);
        assert!(err.contains("--data or --synthetic"), "{err}");
        let (code, _, err) = run_capture(&["train", "--synthetic", "4y50", "--out", "m"]);
        assert_eq!(code, 2);
        assert!(err.contains("--synthetic"), "{err}");
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("patterns"));
    }

    #[test]
    fn synthetic_spec() {
        let c = parse_synthetic_spec("4x50", 7).unwrap();
        assert_eq!((c.n_relations, c.sentences_per_relation, c.seed), (4, 50, 7));
        assert!(parse_synthetic_spec("4", 7).is_err());
    }

    #[test]
    fn settings_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\nepochs = 3\nlr=0.5\n").unwrap();
        let s = Settings::load(Some(&path)).unwrap();
        assert_eq!(s.or("epochs", None::<usize>, 50).unwrap(), 3);
        assert_eq!(s.or("epochs", Some(9usize), 50).unwrap(), 9);
        assert_eq!(s.or("hidden", None::<usize>, 64).unwrap(), 64);
        assert_eq!(s.get::<f64>("lr", None).unwrap(), Some(0.5));
        fs::write(&path, "bogus=1\n").unwrap();
        assert!(matches!(Settings::load(Some(&path)), Err(CliError::Usage(_))));
        fs::write(&path, "epochs=x\n").unwrap();
        let s = Settings::load(Some(&path)).unwrap();
        assert!(s.get::<usize>("epochs", None).is_err());
    }
}
