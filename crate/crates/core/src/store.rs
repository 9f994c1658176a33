//! On-disk corpus store.
//!
//! ```text
//! <root>/config.toml
//! <root>/manifest.json             model versions and paper digests
//! <root>/models/<kind>.txt         sentiment, classifier, ranker, span
//! <root>/papers/<id>/paper.json    parsed paper
//! <root>/papers/<id>/diagnostics.tsv
//! <root>/papers/<id>/analysis.json stage outputs and the input versions
//! <root>/papers/<id>/ranked.tsv
//! <root>/graph.txt
//! <root>/report/{papers,authors}.tsv, report/propagation.txt
//! ```
//!
//! Files are only rewritten when their bytes change, and a pipeline stage
//! whose inputs and model versions match the stored record is skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::context::{ContextOptions, LexicalRelatedness, DEFAULT_TAU};
use crate::document::{normalize_author, parse_paper, Ingested, Paper, ParseOptions};
use crate::error::{Error, Result};
use crate::influence::{author_influence, propagate, InfluenceGraph, Propagation, PropagationParams};
use crate::pipeline::{
    analyze_paper, annotate_mentions, build_graph, ranking_queries, ContributionModel, Models, PaperAnalysis,
};
use crate::ranker::{train_lambdamart, GbdtEnsemble, LambdaMartConfig, TrainingTrace};
use crate::sentiment::SentimentModel;
use crate::span::{SpanModel, SpanTrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextConfig {
    pub tau: f64,
    pub max_span: Option<usize>,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self { tau: DEFAULT_TAU, max_span: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpanConfig {
    pub folds: usize,
    pub train: SpanTrainConfig,
}

impl Default for SpanConfig {
    fn default() -> Self {
        Self { folds: 10, train: SpanTrainConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoreConfig {
    pub context: ContextConfig,
    pub ranker: LambdaMartConfig,
    pub propagation: PropagationParams,
    pub span: SpanConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    Sentiment,
    Classifier,
    Ranker,
    Span,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Sentiment => "sentiment",
            ModelKind::Classifier => "classifier",
            ModelKind::Ranker => "ranker",
            ModelKind::Span => "span",
        }
    }

    fn hint(self) -> &'static str {
        match self {
            ModelKind::Sentiment => "run `train-sentiment`",
            ModelKind::Classifier => "run `train-classifier`",
            ModelKind::Ranker => "run `train-ranker`",
            ModelKind::Span => "run `train-span`",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    /// Model kind → version.
    pub models: BTreeMap<String, String>,
    /// Paper id → digest of its stored `paper.json`.
    pub papers: BTreeMap<String, String>,
}

/// Versions of everything an analysis was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisInputs {
    pub paper: String,
    pub sentiment: String,
    pub classifier: String,
    pub ranker: String,
    pub context: ContextConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredAnalysis {
    pub inputs: AnalysisInputs,
    pub analysis: PaperAnalysis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Computed,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRow {
    pub paper_id: String,
    pub af: f64,
    /// `(citing paper, IF)` for every incoming edge, by citing id.
    pub cited_by: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRow {
    pub author: String,
    pub af: f64,
    /// `(paper, credit share)`, by paper id.
    pub papers: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub iterations: usize,
    pub residual: f64,
    pub papers: Vec<PaperRow>,
    pub authors: Vec<AuthorRow>,
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn version_of(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes `contents` unless the file already holds exactly these bytes.
fn write_if_changed(path: &Path, contents: &str) -> Result<bool> {
    if fs::read(path).is_ok_and(|old| old == contents.as_bytes()) {
        return Ok(false);
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(true)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("store records serialize");
    s.push('\n');
    s
}

fn from_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

/// Rows sorted by descending AF, ties by ascending id.
fn sort_rows<T>(rows: &mut [T], key: impl Fn(&T) -> (f64, &str)) {
    rows.sort_by(|a, b| {
        let (fa, ia) = key(a);
        let (fb, ib) = key(b);
        fb.total_cmp(&fa).then(ia.cmp(ib))
    });
}

fn format_pairs(pairs: &[(String, f64)]) -> String {
    if pairs.is_empty() {
        return "-".to_string();
    }
    pairs.iter().map(|(id, v)| format!("{id}:{v}")).collect::<Vec<_>>().join(",")
}

fn parse_pairs(field: &str) -> Option<Vec<(String, f64)>> {
    if field == "-" {
        return Some(Vec::new());
    }
    field
        .split(',')
        .map(|p| {
            let (id, v) = p.rsplit_once(':')?;
            Some((id.to_string(), v.parse().ok()?))
        })
        .collect()
}

pub const PAPERS_HEADER: &str = "paper_id\taf\tcited_by";
pub const AUTHORS_HEADER: &str = "author\taf\tpapers";

pub fn format_paper_rows(rows: &[PaperRow]) -> String {
    let mut out = format!("{PAPERS_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}", r.paper_id, r.af, format_pairs(&r.cited_by));
    }
    out
}

pub fn format_author_rows(rows: &[AuthorRow]) -> String {
    let mut out = format!("{AUTHORS_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{}\t{}", r.author, r.af, format_pairs(&r.papers));
    }
    out
}

/// Exclusive lock file, removed on drop.
struct GraphLock(PathBuf);

impl GraphLock {
    fn acquire(path: &Path) -> Result<Self> {
        match fs::File::create_new(path) {
            Ok(_) => Ok(Self(path.to_path_buf())),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::invalid(format!(
                "{} exists: another propagation is running (delete the file if it is stale)",
                path.display()
            ))),
            Err(e) => Err(Error::io(path, e)),
        }
    }
}

impl Drop for GraphLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

type RawRow = (String, f64, Vec<(String, f64)>);

fn parse_rows(text: &str, header: &str, what: &str) -> Result<Vec<RawRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(Error::parse(what.to_string(), "missing header"));
    }
    lines
        .enumerate()
        .map(|(i, l)| {
            let bad = || Error::parse(format!("{what} row {}", i + 1), format!("malformed row {l:?}"));
            let f: Vec<&str> = l.split('\t').collect();
            let [id, af, pairs] = f.as_slice() else {
                return Err(bad());
            };
            Ok((id.to_string(), af.parse().map_err(|_| bad())?, parse_pairs(pairs).ok_or_else(bad)?))
        })
        .collect()
}

pub fn parse_paper_rows(text: &str) -> Result<Vec<PaperRow>> {
    Ok(parse_rows(text, PAPERS_HEADER, "papers report")?
        .into_iter()
        .map(|(paper_id, af, cited_by)| PaperRow { paper_id, af, cited_by })
        .collect())
}

pub fn parse_author_rows(text: &str) -> Result<Vec<AuthorRow>> {
    Ok(parse_rows(text, AUTHORS_HEADER, "authors report")?
        .into_iter()
        .map(|(author, af, papers)| AuthorRow { author, af, papers })
        .collect())
}

pub struct CorpusStore {
    root: PathBuf,
    config: StoreConfig,
}

impl CorpusStore {
    /// Opens the store at `root`, creating it with a default `config.toml`
    /// if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let config_path = root.join("config.toml");
        let config = if config_path.exists() {
            toml::from_str(&read(&config_path)?)
                .map_err(|e| Error::parse(config_path.display().to_string(), e.to_string()))?
        } else {
            let config = StoreConfig::default();
            let text = toml::to_string(&config).map_err(|e| Error::invalid(e.to_string()))?;
            write_if_changed(&config_path, &text)?;
            config
        };
        Ok(Self { root, config })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        if path.exists() {
            from_json(&path)
        } else {
            Ok(Manifest::default())
        }
    }

    fn update_manifest(&self, f: impl FnOnce(&mut Manifest)) -> Result<()> {
        let mut m = self.manifest()?;
        f(&mut m);
        write_if_changed(&self.manifest_path(), &to_json(&m))?;
        Ok(())
    }

    fn paper_dir(&self, paper_id: &str) -> PathBuf {
        self.root.join("papers").join(paper_id)
    }

    /// Parses and stores a document. An existing paper with the same id is
    /// only replaced with `force`.
    pub fn ingest(&self, json: &str, options: ParseOptions, force: bool) -> Result<Ingested> {
        let ingested = parse_paper(json, options)?;
        let id = &ingested.paper.paper_id;
        let dir = self.paper_dir(id);
        if dir.join("paper.json").exists() && !force {
            return Err(Error::AlreadyExists(format!("paper {id}")));
        }
        let paper_json = to_json(&ingested.paper);
        write_if_changed(&dir.join("paper.json"), &paper_json)?;
        let mut diag = String::from("sent_id\tmarker\treason\n");
        for d in &ingested.diagnostics {
            let _ = writeln!(diag, "{}\t{}\t{}", d.sent_id, d.marker, d.reason);
        }
        write_if_changed(&dir.join("diagnostics.tsv"), &diag)?;
        let digest = version_of(paper_json.as_bytes());
        self.update_manifest(|m| {
            m.papers.insert(id.clone(), digest);
        })?;
        Ok(ingested)
    }

    pub fn paper_ids(&self) -> Result<Vec<String>> {
        Ok(self.manifest()?.papers.into_keys().collect())
    }

    pub fn load_paper(&self, paper_id: &str) -> Result<Paper> {
        let path = self.paper_dir(paper_id).join("paper.json");
        if !self.manifest()?.papers.contains_key(paper_id) || !path.exists() {
            return Err(Error::NotFound(format!("paper {paper_id}")));
        }
        from_json(&path)
    }

    /// Stores a model's text; returns its version.
    pub fn put_model(&self, kind: ModelKind, text: &str) -> Result<String> {
        let version = version_of(text.as_bytes());
        write_if_changed(&self.root.join("models").join(format!("{}.txt", kind.name())), text)?;
        self.update_manifest(|m| {
            m.models.insert(kind.name().to_string(), version.clone());
        })?;
        Ok(version)
    }

    /// A registered model's text and version.
    pub fn model(&self, kind: ModelKind) -> Result<(String, String)> {
        let missing = || Error::ModelMissing { stage: kind.name(), hint: kind.hint().to_string() };
        let version = self.manifest()?.models.get(kind.name()).cloned().ok_or_else(missing)?;
        let path = self.root.join("models").join(format!("{}.txt", kind.name()));
        if !path.exists() {
            return Err(missing());
        }
        Ok((read(&path)?, version))
    }

    pub fn sentiment_model(&self) -> Result<(SentimentModel, String)> {
        let (text, v) = self.model(ModelKind::Sentiment)?;
        Ok((SentimentModel::from_text(&text)?, v))
    }

    pub fn contribution_model(&self) -> Result<(ContributionModel, String)> {
        let (text, v) = self.model(ModelKind::Classifier)?;
        Ok((ContributionModel::from_text(&text)?, v))
    }

    pub fn ranker_model(&self) -> Result<(GbdtEnsemble, String)> {
        let (text, v) = self.model(ModelKind::Ranker)?;
        Ok((GbdtEnsemble::from_text(&text)?, v))
    }

    pub fn span_model(&self) -> Result<(SpanModel, String)> {
        let (text, v) = self.model(ModelKind::Span)?;
        Ok((SpanModel::from_text(&text)?, v))
    }

    fn context_options(&self) -> ContextOptions {
        ContextOptions { max_span: self.config.context.max_span }
    }

    /// Trains the ranker on the stored papers, labelling each citation
    /// occurrence with its reference's contribution class.
    pub fn train_ranker(&self, config: &LambdaMartConfig) -> Result<TrainingTrace> {
        let (sentiment, _) = self.sentiment_model()?;
        let (contribution, _) = self.contribution_model()?;
        let relatedness = LexicalRelatedness { tau: self.config.context.tau };
        let annotated = self
            .paper_ids()?
            .iter()
            .map(|id| Ok(annotate_mentions(&self.load_paper(id)?, &relatedness, self.context_options(), &sentiment)))
            .collect::<Result<Vec<_>>>()?;
        let queries = ranking_queries(&annotated, &contribution)?;
        if queries.is_empty() {
            return Err(Error::invalid("no stored paper has two or more citation occurrences to rank"));
        }
        let (model, trace) = train_lambdamart(&queries, config)?;
        self.put_model(ModelKind::Ranker, &model.to_text())?;
        Ok(trace)
    }

    fn expected_inputs(&self, paper_id: &str) -> Result<AnalysisInputs> {
        let manifest = self.manifest()?;
        let paper =
            manifest.papers.get(paper_id).cloned().ok_or_else(|| Error::NotFound(format!("paper {paper_id}")))?;
        Ok(AnalysisInputs {
            paper,
            sentiment: self.model(ModelKind::Sentiment)?.1,
            classifier: self.model(ModelKind::Classifier)?.1,
            ranker: self.model(ModelKind::Ranker)?.1,
            context: self.config.context,
        })
    }

    /// Runs all per-paper stages unless the stored analysis was made from
    /// the same inputs.
    pub fn run_pipeline(&self, paper_id: &str) -> Result<StageOutcome> {
        let paper = self.load_paper(paper_id)?;
        let inputs = self.expected_inputs(paper_id)?;
        let path = self.paper_dir(paper_id).join("analysis.json");
        if path.exists() {
            let stored: StoredAnalysis = from_json(&path)?;
            if stored.inputs == inputs {
                return Ok(StageOutcome::Unchanged);
            }
        }
        let (sentiment, _) = self.sentiment_model()?;
        let (contribution, _) = self.contribution_model()?;
        let (ranker, _) = self.ranker_model()?;
        let relatedness = LexicalRelatedness { tau: self.config.context.tau };
        let models = Models {
            relatedness: &relatedness,
            context: self.context_options(),
            sentiment: &sentiment,
            contribution: &contribution,
            ranker: &ranker,
        };
        let analysis = analyze_paper(&paper, &models)?;
        let mut ranked = String::from("cit_id\trank\tscore\tclass\tlocal_influence\n");
        for r in &analysis.ranked {
            let _ = writeln!(ranked, "{}\t{}\t{}\t{}\t{}", r.cit_id, r.rank, r.score, r.class, r.local_influence);
        }
        write_if_changed(&self.paper_dir(paper_id).join("ranked.tsv"), &ranked)?;
        write_if_changed(&path, &to_json(&StoredAnalysis { inputs, analysis }))?;
        Ok(StageOutcome::Computed)
    }

    /// The stored analysis, which must be current with respect to the
    /// registered models and the paper.
    pub fn load_analysis(&self, paper_id: &str) -> Result<PaperAnalysis> {
        let path = self.paper_dir(paper_id).join("analysis.json");
        if !path.exists() {
            return Err(Error::invalid(format!("paper {paper_id} has no analysis; run `pipeline` first")));
        }
        let stored: StoredAnalysis = from_json(&path)?;
        if stored.inputs != self.expected_inputs(paper_id)? {
            return Err(Error::invalid(format!("analysis of {paper_id} is stale; rerun `pipeline`")));
        }
        Ok(stored.analysis)
    }

    /// Builds the citation graph from all analyses, propagates AF and writes
    /// the graph and report tables.
    ///
    /// Holds `graph.lock` while running; a second concurrent propagation
    /// fails instead of waiting.
    pub fn propagate(&self, params: &PropagationParams) -> Result<PropagationReport> {
        let _lock = GraphLock::acquire(&self.root.join("graph.lock"))?;
        let ids = self.paper_ids()?;
        if ids.is_empty() {
            return Err(Error::invalid("store holds no papers"));
        }
        let analyses = ids.iter().map(|id| self.load_analysis(id)).collect::<Result<Vec<_>>>()?;
        let graph = build_graph(&analyses)?;
        write_if_changed(&self.root.join("graph.txt"), &graph.to_text())?;
        let result = propagate(&graph, params)?;
        let report = report_rows(&graph, &result)?;
        let dir = self.root.join("report");
        write_if_changed(&dir.join("papers.tsv"), &format_paper_rows(&report.papers))?;
        write_if_changed(&dir.join("authors.tsv"), &format_author_rows(&report.authors))?;
        write_if_changed(
            &dir.join("propagation.txt"),
            &format!(
                "damping {}\ntol {}\niterations {}\nresidual {}\n",
                params.damping, params.tol, report.iterations, report.residual
            ),
        )?;
        Ok(report)
    }

    pub fn load_graph(&self) -> Result<InfluenceGraph> {
        let path = self.root.join("graph.txt");
        if !path.exists() {
            return Err(Error::invalid("no graph snapshot; run `propagate` first"));
        }
        InfluenceGraph::from_text(&read(&path)?)
    }

    fn report_file(&self, name: &str) -> Result<String> {
        let path = self.root.join("report").join(name);
        if !path.exists() {
            return Err(Error::invalid("no propagation results; run `propagate` first"));
        }
        read(&path)
    }

    pub fn paper_report(&self) -> Result<Vec<PaperRow>> {
        parse_paper_rows(&self.report_file("papers.tsv")?)
    }

    pub fn author_report(&self) -> Result<Vec<AuthorRow>> {
        parse_author_rows(&self.report_file("authors.tsv")?)
    }

    /// Report row of one paper.
    pub fn paper_row(&self, paper_id: &str) -> Result<PaperRow> {
        self.paper_report()?
            .into_iter()
            .find(|r| r.paper_id == paper_id)
            .ok_or_else(|| Error::NotFound(format!("paper {paper_id}")))
    }

    /// Report row of one author, matched verbatim or after name
    /// normalization.
    pub fn author_row(&self, author: &str) -> Result<AuthorRow> {
        let normalized = normalize_author(author);
        self.author_report()?
            .into_iter()
            .find(|r| r.author == author || r.author == normalized)
            .ok_or_else(|| Error::NotFound(format!("author {author}")))
    }

    /// SHA-256 over every file path and its bytes, in path order.
    pub fn digest(&self) -> Result<String> {
        fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
            let mut entries: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
                .collect::<Result<_>>()?;
            entries.sort();
            for p in entries {
                if p.is_dir() {
                    walk(&p, out)?;
                } else {
                    out.push(p);
                }
            }
            Ok(())
        }
        let mut files = Vec::new();
        walk(&self.root, &mut files)?;
        let mut h = Sha256::new();
        for f in files {
            let rel = f.strip_prefix(&self.root).unwrap_or(&f);
            h.update(rel.to_string_lossy().as_bytes());
            h.update([0]);
            h.update(fs::read(&f).map_err(|e| Error::io(&f, e))?);
            h.update([0]);
        }
        Ok(hex::encode(h.finalize()))
    }
}

/// Per-paper and per-author rows of a propagation result.
pub fn report_rows(graph: &InfluenceGraph, result: &Propagation) -> Result<PropagationReport> {
    let ids = graph.paper_ids();
    let mut papers: Vec<PaperRow> = (0..graph.len())
        .map(|node| {
            let mut cited_by: Vec<(String, f64)> =
                graph.incoming(node).iter().map(|&(j, v)| (ids[j].clone(), v)).collect();
            cited_by.sort_by(|a, b| a.0.cmp(&b.0));
            PaperRow { paper_id: ids[node].clone(), af: result.scores[node], cited_by }
        })
        .collect();
    sort_rows(&mut papers, |r| (r.af, r.paper_id.as_str()));
    let mut authors = graph
        .authors()
        .iter()
        .map(|(name, list)| {
            let mut shares: Vec<(String, f64)> = list.iter().map(|s| (ids[s.paper].clone(), s.share)).collect();
            shares.sort_by(|a, b| a.0.cmp(&b.0));
            Ok(AuthorRow { author: name.clone(), af: author_influence(graph, result, name)?, papers: shares })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut authors, |r| (r.af, r.author.as_str()));
    Ok(PropagationReport { iterations: result.iterations, residual: result.residual, papers, authors })
}
