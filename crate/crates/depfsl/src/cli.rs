//! The `depfsl` command line.
//!
//! Every subcommand accepts `--config FILE` with `key = value` lines using
//! the subcommand's long flag names; flags given on the command line win.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use depfsl_core::corpus::Vocabulary;
use depfsl_core::eval::{eval_chimera, eval_crw, eval_dn, EvalReport};
use depfsl_core::fewshot::{ChainOrder, FewShotContext, FslConfig, Inferencer, Method};
use depfsl_core::spaces::nearest_neighbors;
use depfsl_core::stopwords::StopWords;
use depfsl_core::training::{EpochStats, ModelKind, Trainer, TrainerConfig};

use crate::config::parse_key_values;
use crate::conllu::{read_conllu, read_corpus};
use crate::datasets::{load_chimera, load_crw, load_dn};
use crate::diagnostics::diagnostics_text;
use crate::error::{Error, Result};
use crate::formats::{read_vocab, write_text_rows, write_text_space, write_vocab_file};
use crate::model::{load_model, save_model, LoadedModel};
use crate::report::{human_report, machine_report};
use crate::stopwords::read_stopwords;
use crate::synthetic::{write_dataset, Language, LanguageSpec};

#[derive(Debug, Parser)]
#[command(name = "depfsl", version, about = "Dependency-based few-shot word embeddings")]
pub struct Cli {
    /// Read default flag values from a `key = value` file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count word forms in a CoNLL-U corpus and write a vocabulary file.
    #[command(args_override_self = true)]
    Vocab(VocabArgs),
    /// Train a background model into a directory.
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Infer a vector for the slot word of a context file.
    #[command(args_override_self = true)]
    Infer(InferArgs),
    /// Run an evaluation protocol.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Nearest neighbors of a word in a trained space.
    #[command(args_override_self = true)]
    Neighbors(NeighborsArgs),
    /// Write a trained space in the text export format.
    #[command(args_override_self = true)]
    Export(ExportArgs),
    /// Generate the synthetic corpus and evaluation datasets.
    #[command(args_override_self = true)]
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// CoNLL-U file or directory of *.conllu files.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub lowercase: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Vocabulary file; built from the corpus with --min-count when absent.
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub min_count: u64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub lowercase: bool,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 15)]
    pub negatives: usize,
    /// Tuples per Adagrad step.
    #[arg(long, default_value_t = 5)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Subsampling threshold on relative frequency.
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; more than one is fast but not reproducible.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferenceArgs {
    /// Model directory written by `train`, or a space file.
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, default_value = "additive", value_parser = parse_method)]
    pub method: Method,
    #[arg(long, default_value = "___")]
    pub target_form: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    #[arg(long, default_value_t = 15)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Stop-word list, one word per line (default: built-in English list).
    #[arg(long, conflicts_with = "no_stopwords")]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stopwords: bool,
    /// Apply the matrix nearest the slot first in dm-additive paths.
    #[arg(long)]
    pub reverse_chain: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub inference: InferenceArgs,
    /// CoNLL-U sentences containing the target form.
    #[arg(long)]
    pub contexts: PathBuf,
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Definitional Nonce: MRR and median rank.
    #[command(args_override_self = true)]
    Dn(EvalArgs),
    /// Chimera: Spearman per trial size.
    #[command(args_override_self = true)]
    Chimera(EvalArgs),
    /// Contextual Rare Words: Spearman per sample size.
    #[command(args_override_self = true)]
    Crw(EvalArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub inference: InferenceArgs,
    /// Dataset manifest (TSV).
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated sizes (chimera default 2,4,6; crw default 1,2,4,8,16).
    #[arg(long)]
    pub sizes: Option<String>,
    /// Random selections per size (crw).
    #[arg(long, default_value_t = 10)]
    pub selections: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Machine-readable report file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NeighborsArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub sentences: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse()
        .map_err(|_| format!("expected one of skipgram, dep-skipgram, dep-matrix; found {s:?}"))
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse()
        .map_err(|_| format!("expected one of additive, dep-additive, dm-additive; found {s:?}"))
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Inserts `--key value` pairs from the `--config` file right after the
/// subcommand path, so that later command-line occurrences override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let root = Cli::command();
    let mut node = &root;
    let mut path_end = 1;
    let mut config = None;
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy().into_owned();
        if s == "--" {
            break;
        }
        if let Some(rest) = s.strip_prefix("--") {
            let (name, inline) = match rest.split_once('=') {
                Some((n, v)) => (n.to_string(), Some(v.to_string())),
                None => (rest.to_string(), None),
            };
            let takes_value = node
                .get_arguments()
                .chain(root.get_arguments())
                .find(|a| a.get_long() == Some(name.as_str()))
                .is_some_and(|a| a.get_action().takes_values());
            let skip = if takes_value && inline.is_none() { 2 } else { 1 };
            if name == "config" {
                config = inline.or_else(|| argv.get(i + 1).map(|v| v.to_string_lossy().into_owned()));
            }
            i += skip;
            continue;
        }
        if !s.starts_with('-') {
            if let Some(sub) = node.find_subcommand(&s) {
                node = sub;
                path_end = i + 1;
            }
        }
        i += 1;
    }
    let Some(config) = config else { return Ok(argv) };
    let path = PathBuf::from(config);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in parse_key_values(&text, &path)? {
        let arg = node
            .get_arguments()
            .filter(|a| !matches!(a.get_id().as_str(), "config" | "help" | "version"))
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                Error::Usage(format!(
                    "{}: unknown key {key:?} for `{}`",
                    path.display(),
                    node.get_name()
                ))
            })?;
        if arg.get_action().takes_values() {
            injected.push(format!("--{key}").into());
            injected.push(value.into());
        } else {
            let on: bool = value
                .parse()
                .map_err(|_| Error::Usage(format!("{}: {key} expects true or false", path.display())))?;
            if on {
                injected.push(format!("--{key}").into());
            }
        }
    }
    let mut out = argv[..path_end].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[path_end..]);
    Ok(out)
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Vocab(a) => cmd_vocab(a),
        Command::Train(a) => cmd_train(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Eval(e) => cmd_eval(e),
        Command::Neighbors(a) => cmd_neighbors(a),
        Command::Export(a) => cmd_export(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn build_vocab(corpus: &[depfsl_core::corpus::ParsedSentence], min_count: u64, lowercase: bool) -> Result<Vocabulary> {
    let vocab = Vocabulary::build(corpus, min_count, lowercase);
    if vocab.is_empty() {
        return Err(depfsl_core::Error::EmptyVocabulary.into());
    }
    Ok(vocab)
}

fn cmd_vocab(a: VocabArgs) -> Result<()> {
    let corpus = read_corpus(&a.corpus)?;
    let vocab = build_vocab(&corpus, a.min_count, a.lowercase)?;
    write_vocab_file(&a.out, &vocab)?;
    eprintln!("{} words, {} tokens", vocab.len(), vocab.total());
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let config = TrainerConfig {
        model: a.model,
        dim: a.dim,
        negatives: a.negatives,
        batch_size: a.batch,
        learning_rate: a.lr,
        window: a.window,
        subsample_tau: a.tau,
        epochs: a.epochs,
        seed: a.seed,
        threads: a.threads,
    };
    config.validate()?;
    eprintln!(
        "model={} dim={} k={} batch={} lr={} window={} tau={} epochs={} seed={} threads={}",
        config.model,
        config.dim,
        config.negatives,
        config.batch_size,
        config.learning_rate,
        config.window,
        config.subsample_tau,
        config.epochs,
        config.seed,
        config.threads
    );
    let corpus = read_corpus(&a.corpus)?;
    let vocab = match &a.vocab {
        Some(p) => read_vocab(p)?,
        None => build_vocab(&corpus, a.min_count, a.lowercase)?,
    };
    eprintln!("{} sentences, {} words", corpus.len(), vocab.len());
    let trainer = Trainer::new(&corpus, vocab, config.clone())?;
    let log = |s: &EpochStats, took: Duration| {
        let rate = s.tuples as f64 / took.as_secs_f64().max(1e-9);
        eprintln!(
            "epoch={}/{} tuples={} tuples_per_sec={:.0} mean_loss={:.6}",
            s.epoch, config.epochs, s.tuples, rate, s.mean_loss
        );
    };
    let model = crate::parallel::train(&trainer, config.threads, log)?;
    save_model(&a.out, &model, &config)?;
    Ok(())
}

fn fsl_config(a: &InferenceArgs) -> Result<FslConfig> {
    let stopwords = if a.no_stopwords {
        StopWords::none()
    } else if let Some(p) = &a.stopwords {
        read_stopwords(p)?
    } else {
        StopWords::english()
    };
    Ok(FslConfig {
        tau: a.tau,
        negatives: a.negatives,
        window: a.window,
        stopwords,
        method: a.method,
        chain_order: if a.reverse_chain { ChainOrder::TargetFirst } else { ChainOrder::ContextFirst },
    })
}

fn inferencer<'m>(model: &'m LoadedModel, a: &InferenceArgs) -> Result<Inferencer<'m>> {
    if a.method == Method::DmAdditive && model.matrices.is_none() {
        return Err(Error::Usage(format!(
            "{}: dm-additive needs dependency matrices; this model has none (trained as {})",
            a.space.display(),
            model.setting("model").unwrap_or("a plain space")
        )));
    }
    Ok(Inferencer::new(&model.space, model.matrices.as_ref(), fsl_config(a)?)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn cmd_infer(a: InferArgs) -> Result<()> {
    let model = load_model(&a.inference.space)?;
    let inf = inferencer(&model, &a.inference)?;
    let sentences = read_conllu(&a.contexts)?;
    let context = FewShotContext::new(sentences, &a.inference.target_form)
        .map_err(|e| Error::Usage(format!("{}: {e}", a.contexts.display())))?;
    let result = inf.infer_with_diagnostics(&context)?;
    if let Some(p) = &a.diagnostics {
        fs::write(p, diagnostics_text(&result)).map_err(|e| Error::io(p, e))?;
    }
    let mut buf = Vec::new();
    write_text_rows(&mut buf, result.vector.len(), std::iter::once((&a.inference.target_form, &result.vector)))
        .expect("writing to memory");
    write_out(a.out.as_deref(), &String::from_utf8(buf).expect("UTF-8"))
}

fn parse_sizes(s: Option<&str>, default: &[usize]) -> Result<Vec<usize>> {
    match s {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Usage(format!("invalid size {x:?} in --sizes")))
            })
            .collect(),
    }
}

fn cmd_eval(e: EvalCommand) -> Result<()> {
    let (a, report): (EvalArgs, EvalReport) = match e {
        EvalCommand::Dn(a) => {
            let model = load_model(&a.inference.space)?;
            let inf = inferencer(&model, &a.inference)?;
            let items = load_dn(&a.data, &a.inference.target_form)?;
            let r = eval_dn(&inf, &items)?;
            (a, r)
        }
        EvalCommand::Chimera(a) => {
            let model = load_model(&a.inference.space)?;
            let inf = inferencer(&model, &a.inference)?;
            let items = load_chimera(&a.data, &a.inference.target_form)?;
            let sizes = parse_sizes(a.sizes.as_deref(), &[2, 4, 6])?;
            let r = eval_chimera(&inf, &items, &sizes)?;
            (a, r)
        }
        EvalCommand::Crw(a) => {
            let model = load_model(&a.inference.space)?;
            let inf = inferencer(&model, &a.inference)?;
            let items = load_crw(&a.data, &a.inference.target_form)?;
            let sizes = parse_sizes(a.sizes.as_deref(), &[1, 2, 4, 8, 16])?;
            let r = eval_crw(&inf, &items, &sizes, a.selections, a.seed)?;
            (a, r)
        }
    };
    if let Some(p) = &a.report {
        fs::write(p, machine_report(&report)).map_err(|e| Error::io(p, e))?;
    }
    write_out(None, &human_report(&report))
}

fn cmd_neighbors(a: NeighborsArgs) -> Result<()> {
    let model = load_model(&a.space)?;
    let query = model
        .space
        .lookup(&a.word)
        .ok_or_else(|| Error::Usage(format!("{:?} is not in the vocabulary", a.word)))?
        .iter()
        .map(|&x| x as f64)
        .collect::<Vec<f64>>();
    let mut text = String::new();
    let own = model.space.vocab().normalize(&a.word);
    for (w, sim) in nearest_neighbors(&model.space, &query, a.k + 1)?
        .into_iter()
        .filter(|(w, _)| *w != own)
        .take(a.k)
    {
        text.push_str(&format!("{w}\t{sim:.6}\n"));
    }
    write_out(None, &text)
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let model = load_model(&a.space)?;
    let mut buf = Vec::new();
    write_text_space(&mut buf, &model.space).expect("writing to memory");
    write_out(a.out.as_deref(), &String::from_utf8(buf).expect("UTF-8"))
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    write_dataset(&a.out, &Language::new(LanguageSpec::default()), a.sentences, a.seed)
}
