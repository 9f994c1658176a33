//! Command-line front end over [`CorpusStore`].
//!
//! Exit codes: 0 success, 1 usage or other failure, 2 unknown id, 3 missing
//! model, 4 propagation divergence. Failures print one line
//! `error[<kind>]: <message>` to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::document::ParseOptions;
use crate::error::{Error, Result};
use crate::pipeline::ContributionModel;
use crate::sentiment::{parse_corpus, train_sentiment, DEFAULT_SMOOTHING, SEED_CORPUS};
use crate::span::{cross_validate, parse_span_corpus, train_span, SpanSentence};
use crate::store::{format_author_rows, format_paper_rows, CorpusStore, ModelKind, StageOutcome};
use crate::{classifier, synth};

#[derive(Debug, Parser)]
#[command(name = "citinf", version, about = "Citation classification, reference ranking and influence propagation")]
pub struct Cli {
    /// Corpus store directory.
    #[arg(long, global = true, default_value = "citinf-store")]
    pub store: PathBuf,
    /// Seed for training and fold assignment (overrides config.toml).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Treat unresolvable citation markers as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and store documents (a JSON file, or every *.json in a directory).
    Ingest {
        path: PathBuf,
        /// Replace papers that are already stored.
        #[arg(long)]
        force: bool,
    },
    /// Run context, sentiment, classification, ranking and local influence.
    Pipeline {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        paper_id: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Propagate academic influence over the corpus citation graph.
    Propagate {
        #[arg(long)]
        damping: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Print influence tables, or the row of one author or paper.
    Report {
        #[arg(long, conflicts_with = "paper")]
        author: Option<String>,
        #[arg(long)]
        paper: Option<String>,
    },
    /// Train the sentiment model (default: the bundled seed corpus).
    TrainSentiment {
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
        smoothing: f64,
    },
    /// Train the contribution classifier from a labelled file, or register the rule-based labeler.
    TrainClassifier {
        #[arg(required_unless_present = "bootstrap", conflicts_with = "bootstrap")]
        labelled: Option<PathBuf>,
        #[arg(long)]
        bootstrap: bool,
        #[arg(long, default_value_t = classifier::DEFAULT_ALPHA)]
        alpha: f64,
    },
    /// Train the reference ranker on the stored papers, or on synthetic queries.
    TrainRanker {
        #[arg(long, value_name = "QUERIES")]
        synthetic: Option<usize>,
    },
    /// Train the span detector on an annotated corpus.
    TrainSpan {
        #[arg(required_unless_present = "synthetic")]
        corpus: Option<PathBuf>,
        #[arg(long, value_name = "SENTENCES", conflicts_with = "corpus")]
        synthetic: Option<usize>,
    },
    /// Cross-validate the span detector.
    CrossValidateSpan {
        #[arg(required_unless_present = "synthetic")]
        corpus: Option<PathBuf>,
        #[arg(long, value_name = "SENTENCES", conflicts_with = "corpus")]
        synthetic: Option<usize>,
        #[arg(long)]
        folds: Option<usize>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotFound(_) => 2,
        Error::ModelMissing { .. } => 3,
        Error::Divergence { .. } => 4,
        _ => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let first = rendered.lines().next().unwrap_or("invalid arguments");
                let _ = writeln!(err, "error[usage]: {}", first.trim_start_matches("error: "));
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn json_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn span_data(corpus: &Option<PathBuf>, synthetic: Option<usize>, seed: u64) -> Result<Vec<SpanSentence>> {
    match (corpus, synthetic) {
        (Some(path), _) => parse_span_corpus(&read(path)?),
        (None, Some(n)) => Ok(synth::span_corpus(n, 0.1, seed)),
        (None, None) => Err(Error::invalid("give a corpus file or --synthetic")),
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let store = CorpusStore::open(&cli.store)?;
    let config = *store.config();
    let seed = cli.seed;
    let io = |e: std::io::Error| Error::io("<stdout>", e);
    match &cli.command {
        Command::Ingest { path, force } => {
            let options = ParseOptions { strict: cli.strict };
            let files = json_files(path)?;
            if files.is_empty() {
                return Err(Error::NotFound(format!("no .json documents in {}", path.display())));
            }
            for file in files {
                let ingested = store.ingest(&read(&file)?, options, *force)?;
                let p = &ingested.paper;
                for d in &ingested.diagnostics {
                    let _ = writeln!(
                        err,
                        "warning[unresolved-marker]: {} sentence {}: {:?}: {}",
                        p.paper_id, d.sent_id, d.marker, d.reason
                    );
                }
                writeln!(
                    out,
                    "{}\t{} mentions\t{} diagnostics",
                    p.paper_id,
                    p.mentions.len(),
                    ingested.diagnostics.len()
                )
                .map_err(io)?;
            }
        }
        Command::Pipeline { paper_id, all } => {
            let ids = if *all {
                store.paper_ids()?
            } else {
                vec![paper_id.clone().expect("clap requires an id without --all")]
            };
            for id in ids {
                let outcome = store.run_pipeline(&id)?;
                let ranked = store.load_analysis(&id)?.ranked.len();
                let word = match outcome {
                    StageOutcome::Computed => "computed",
                    StageOutcome::Unchanged => "unchanged",
                };
                writeln!(out, "{id}\t{word}\t{ranked} ranked references").map_err(io)?;
            }
        }
        Command::Propagate { damping, tol, max_iter } => {
            let mut params = config.propagation;
            params.damping = damping.unwrap_or(params.damping);
            params.tol = tol.unwrap_or(params.tol);
            params.max_iter = max_iter.unwrap_or(params.max_iter);
            let report = store.propagate(&params)?;
            writeln!(
                out,
                "converged in {} iterations, max residual {:e}; {} papers, {} authors",
                report.iterations,
                report.residual,
                report.papers.len(),
                report.authors.len()
            )
            .map_err(io)?;
        }
        Command::Report { author, paper } => match (author, paper) {
            (Some(a), _) => write!(out, "{}", format_author_rows(&[store.author_row(a)?])).map_err(io)?,
            (_, Some(p)) => write!(out, "{}", format_paper_rows(&[store.paper_row(p)?])).map_err(io)?,
            (None, None) => {
                write!(out, "{}", format_paper_rows(&store.paper_report()?)).map_err(io)?;
                writeln!(out).map_err(io)?;
                write!(out, "{}", format_author_rows(&store.author_report()?)).map_err(io)?;
            }
        },
        Command::TrainSentiment { corpus, smoothing } => {
            let text = match corpus {
                Some(path) => read(path)?,
                None => SEED_CORPUS.to_string(),
            };
            let model = train_sentiment(&parse_corpus(&text)?, *smoothing)?;
            let v = store.put_model(ModelKind::Sentiment, &model.to_text())?;
            writeln!(out, "sentiment model {v}").map_err(io)?;
        }
        Command::TrainClassifier { labelled, bootstrap, alpha } => {
            let model = match (labelled, bootstrap) {
                (_, true) => ContributionModel::Bootstrap,
                (Some(path), false) => ContributionModel::NaiveBayes(Box::new(classifier::train_classifier(
                    &classifier::parse_labelled(&read(path)?)?,
                    *alpha,
                )?)),
                (None, false) => return Err(Error::invalid("give a labelled file or --bootstrap")),
            };
            let v = store.put_model(ModelKind::Classifier, &model.to_text())?;
            writeln!(out, "classifier model {v}").map_err(io)?;
        }
        Command::TrainRanker { synthetic } => {
            let mut rc = config.ranker;
            rc.seed = seed.unwrap_or(rc.seed);
            let trace = match synthetic {
                Some(n) => {
                    let queries = synth::ranking_dataset(*n, 0.5, rc.seed);
                    let (model, trace) = crate::ranker::train_lambdamart(&queries, &rc)?;
                    store.put_model(ModelKind::Ranker, &model.to_text())?;
                    trace
                }
                None => store.train_ranker(&rc)?,
            };
            let (_, v) = store.model(ModelKind::Ranker)?;
            writeln!(
                out,
                "ranker model {v}: pairwise loss {:.6} -> {:.6}",
                trace.pairwise_loss.first().copied().unwrap_or(0.0),
                trace.pairwise_loss.last().copied().unwrap_or(0.0)
            )
            .map_err(io)?;
        }
        Command::TrainSpan { corpus, synthetic } => {
            let data = span_data(corpus, *synthetic, seed.unwrap_or(0))?;
            let model = train_span(&data, &config.span.train)?;
            let v = store.put_model(ModelKind::Span, &model.to_text())?;
            writeln!(out, "span model {v}").map_err(io)?;
        }
        Command::CrossValidateSpan { corpus, synthetic, folds } => {
            let seed = seed.unwrap_or(0);
            let data = span_data(corpus, *synthetic, seed)?;
            let k = folds.unwrap_or(config.span.folds);
            let s = cross_validate(&data, k, seed, |train| train_span(train, &config.span.train))?;
            writeln!(out, "folds {k}\tprecision {:.4}\trecall {:.4}\tf1 {:.4}", s.precision, s.recall, s.f1)
                .map_err(io)?;
        }
    }
    Ok(())
}
