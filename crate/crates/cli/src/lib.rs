//! The `tca` command line.
//!
//! Exit codes: 0 success (whatever the credit decision), 1 input error,
//! 2 resource error, 3 internal error.

pub mod config;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tca_core::aggregation::{load_annotations, AssessmentConfig};
use tca_core::canonical::{format_float, to_canonical_json};
use tca_core::course::{Course, PairManifest};
use tca_core::embedding::{CachingProvider, EmbeddingCache, EmbeddingProvider, RemoteConfig, RemoteProvider};
use tca_core::measures::{MeasureId, VerbScorer};
use tca_core::pipeline::{Assessment, Assessor};
use tca_core::simverb::{evaluate_measures, read_simverb};
use tca_core::wordvec::WordVectors;

pub use config::{FileConfig, Format, ProviderSpec, RunConfig};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "tca", version, about = "Transfer credit assessment from learning outcomes")]
pub struct Cli {
    /// TOML settings file; flags and environment variables win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Directory holding index.verb and data.verb
    #[arg(long, global = true, env = "TCA_WORDNET_DIR", value_name = "DIR")]
    pub wordnet_dir: Option<PathBuf>,
    /// Bloom seed-verb TOML file (default: built-in list)
    #[arg(long, global = true, value_name = "FILE")]
    pub seed_verbs: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assess one receiving/sending course pair
    Assess(AssessArgs),
    /// Decide every pair in a manifest under a grid of parameter values
    Sweep(SweepArgs),
    /// Correlate verb similarity measures with a SimVerb-style benchmark
    EvalVerbs(EvalArgs),
    /// Manage embedding cache files
    #[command(subcommand)]
    Cache(CacheCommand),
    /// Run the HTTP API
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProviderArgs {
    /// test, cache or remote:URL (bare `remote` reads TCA_PROVIDER_URL)
    #[arg(long, value_name = "SPEC")]
    pub provider: Option<String>,
    /// Embedding cache file
    #[arg(long, value_name = "FILE")]
    pub cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AssessArgs {
    #[arg(long, value_name = "FILE")]
    pub receiving: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub sending: PathBuf,
    /// Taxonomic share of the final score, percent
    #[arg(long)]
    pub impact: Option<f64>,
    #[arg(long)]
    pub sim_threshold: Option<f64>,
    #[arg(long)]
    pub lo_threshold: Option<f64>,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON manifest: {"pairs": [{"id", "receiving", "sending"}]}
    #[arg(long, value_name = "FILE")]
    pub pairs: PathBuf,
    /// Comma-separated values; settings are the product of all three lists
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub impact: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub sim_threshold: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub lo_threshold: Option<Vec<f64>>,
    /// CSV of course_pair_id,human_decision; adds an agreement row
    #[arg(long, value_name = "FILE")]
    pub annotations: Option<PathBuf>,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Verb-pair file: verb1, verb2, [POS,] score, tab separated
    #[arg(long, value_name = "FILE")]
    pub dataset: PathBuf,
    /// Comma-separated measures (default: the six WordNet measures)
    #[arg(long, value_delimiter = ',')]
    pub measures: Option<Vec<String>>,
    /// Word vectors in text format, as NAME=FILE; scored as vector:NAME
    #[arg(long, value_name = "NAME=FILE")]
    pub vectors: Vec<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    /// Embed every learning outcome of the given courses into the cache
    Fill(FillArgs),
    /// Check every record of a cache file
    Verify {
        #[arg(long, value_name = "FILE")]
        cache: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct FillArgs {
    #[arg(long, value_name = "FILE")]
    pub cache: PathBuf,
    /// remote:URL, or bare `remote` with TCA_PROVIDER_URL
    #[arg(long, value_name = "SPEC")]
    pub provider: Option<String>,
    /// Pairs manifest whose courses to embed
    #[arg(long, value_name = "FILE")]
    pub pairs: Option<PathBuf>,
    /// Course document to embed; repeatable
    #[arg(long, value_name = "FILE")]
    pub course: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "TCA_PORT")]
    pub port: Option<u16>,
    /// Allowed browser origin; repeatable (default: any)
    #[arg(long, value_name = "ORIGIN")]
    pub cors_origin: Vec<String>,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

struct Context {
    file: FileConfig,
    wordnet_dir: PathBuf,
    seed_verbs: Option<PathBuf>,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let wordnet_dir = cli
            .wordnet_dir
            .clone()
            .or_else(|| file.wordnet_dir.clone())
            .unwrap_or_else(|| PathBuf::from(config::DEFAULT_WORDNET_DIR));
        let seed_verbs = cli.seed_verbs.clone().or_else(|| file.seed_verbs.clone());
        Ok(Context {
            file,
            wordnet_dir,
            seed_verbs,
        })
    }

    fn run_config(
        &self,
        provider: &ProviderArgs,
        format: Option<Format>,
        assessment: AssessmentConfig,
    ) -> Result<RunConfig, CliError> {
        let env_url = std::env::var(config::PROVIDER_URL_ENV).ok();
        Ok(RunConfig {
            wordnet_dir: self.wordnet_dir.clone(),
            seed_verbs: self.seed_verbs.clone(),
            provider: ProviderSpec::resolve(provider.provider.as_deref(), self.file.provider.as_deref(), env_url.as_deref())?,
            cache: provider.cache.clone().or_else(|| self.file.cache.clone()),
            assessment,
            format: format.or(self.file.format).unwrap_or_default(),
        })
    }

    fn assessment(&self, impact: Option<f64>, sim: Option<f64>, lo: Option<f64>) -> Result<AssessmentConfig, CliError> {
        let f = &self.file.assessment;
        let n = AssessmentConfig::NEUTRAL;
        Ok(AssessmentConfig::new(
            impact.or(f.impact).unwrap_or(n.impact),
            sim.or(f.sim_threshold).unwrap_or(n.sim_threshold),
            lo.or(f.lo_threshold).unwrap_or(n.lo_threshold),
        )?)
    }

    fn assessor(&self, rc: &RunConfig) -> Result<Assessor, CliError> {
        let provider = rc.provider.build(rc.cache.as_deref())?;
        let classifier = config::load_classifier(&rc.wordnet_dir, rc.seed_verbs.as_deref())?;
        Ok(Assessor::new(Arc::new(classifier), provider))
    }
}

/// Parse `args` (program name first), run, and return the exit code.
/// Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{}", text) } else { write!(err, "{}", text) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::new(cli)?;
    match &cli.command {
        Command::Assess(a) => assess(&ctx, a, out),
        Command::Sweep(a) => sweep(&ctx, a, out),
        Command::EvalVerbs(a) => eval_verbs(&ctx, a, out),
        Command::Cache(CacheCommand::Fill(a)) => cache_fill(a, out),
        Command::Cache(CacheCommand::Verify { cache }) => cache_verify(cache, out),
        Command::Serve(a) => serve(&ctx, a),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .map_err(|e| CliError::Internal(format!("cannot write output: {}", e)))
}

fn canonical<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    to_canonical_json(value).map_err(|e| CliError::Internal(e.to_string()))
}

fn assess(ctx: &Context, a: &AssessArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ctx.assessment(a.impact, a.sim_threshold, a.lo_threshold)?;
    let rc = ctx.run_config(&a.provider, a.format, cfg)?;
    let receiving = Course::load(&a.receiving)?;
    let sending = Course::load(&a.sending)?;
    let assessor = ctx.assessor(&rc)?;
    let result = assessor.assess_pair(&receiving, &sending, &rc.assessment)?;
    match rc.format {
        Format::Json => emit(out, &canonical(&result)?),
        Format::Table => emit(out, &assessment_table(&result)),
    }
}

/// Human-readable summary of one assessment.
pub fn assessment_table(a: &Assessment) -> String {
    let g = &a.grids;
    let d = &a.decision;
    let mut s = format!(
        "receiving {} ({} LOs) vs sending {} ({} LOs)\nimpact {}  sim_threshold {}  lo_threshold {}  provider {}\n\n",
        g.receiving.course_id,
        g.receiving.learning_outcomes.len(),
        g.sending.course_id,
        g.sending.learning_outcomes.len(),
        format_float(a.config.impact),
        format_float(a.config.sim_threshold),
        format_float(a.config.lo_threshold),
        a.provider
    );
    let idw = g.receiving.learning_outcomes.iter().map(|l| l.id.len()).max().unwrap_or(0).max(10);
    let sw = g.sending.learning_outcomes.iter().map(|l| l.id.len()).max().unwrap_or(0).max(10);
    s.push_str(&format!("{:<idw$}  {:>5}  {:<sw$}  {:>6}\n", "receiving", "level", "best match", "final", idw = idw, sw = sw));
    for (i, lo) in g.receiving.learning_outcomes.iter().enumerate() {
        let row = &d.final_grid.cells[i];
        let mut j = 0;
        for k in 1..row.len() {
            if row[k] > row[j] {
                j = k;
            }
        }
        let matched = d.matched_rows.iter().any(|m| m.receiving_id == lo.id);
        s.push_str(&format!(
            "{:<idw$}  {:>5}  {:<sw$}  {:>6.4}{}\n",
            lo.id,
            lo.level.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            d.final_grid.cols[j],
            row[j],
            if matched { "  matched" } else { "" },
            idw = idw,
            sw = sw
        ));
    }
    s.push_str(&format!(
        "\nmatched {}/{} ({}) -> decision: {}\n",
        d.matched_count,
        d.receiving_count,
        format_float(d.match_fraction),
        d.decision
    ));
    s
}

fn sweep(ctx: &Context, a: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let n = ctx.assessment(None, None, None)?;
    let list = |v: &Option<Vec<f64>>, d: f64, flag: &str| -> Result<Vec<f64>, CliError> {
        match v {
            Some(v) if v.is_empty() => Err(CliError::Input(format!("{}: empty range", flag))),
            Some(v) => Ok(v.clone()),
            None => Ok(vec![d]),
        }
    };
    let impacts = list(&a.impact, n.impact, "--impact")?;
    let sims = list(&a.sim_threshold, n.sim_threshold, "--sim-threshold")?;
    let los = list(&a.lo_threshold, n.lo_threshold, "--lo-threshold")?;
    let mut settings = Vec::new();
    for i in &impacts {
        for s in &sims {
            for l in &los {
                settings.push(AssessmentConfig::new(*i, *s, *l)?);
            }
        }
    }
    let rc = ctx.run_config(&a.provider, a.format, n)?;
    let pairs = PairManifest::load_pairs(&a.pairs)?;
    let annotations = match a.annotations.clone().or_else(|| ctx.file.annotations.clone()) {
        Some(p) => Some(load_annotations(p)?),
        None => None,
    };
    let assessor = ctx.assessor(&rc)?;
    let report = assessor.sweep(&pairs, &settings, annotations.as_deref())?;
    match rc.format {
        Format::Json => emit(out, &canonical(&report)?),
        Format::Table => emit(out, &report.to_table()),
    }
}

fn eval_verbs(ctx: &Context, a: &EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let measures: Vec<MeasureId> = match &a.measures {
        Some(ms) => ms
            .iter()
            .map(|m| m.parse().map_err(|e: tca_core::measures::UnknownMeasure| CliError::Input(e.to_string())))
            .collect::<Result<_, _>>()?,
        None => MeasureId::knowledge_based(),
    };
    if measures.is_empty() {
        return Err(CliError::Input("--measures: empty list".into()));
    }
    let file = std::fs::File::open(&a.dataset)
        .map_err(|e| CliError::Input(format!("cannot read {}: {}", a.dataset.display(), e)))?;
    let data = read_simverb(std::io::BufReader::new(file))
        .map_err(|e| CliError::Input(format!("{}: {}", a.dataset.display(), e)))?;
    let classifier = config::load_classifier(&ctx.wordnet_dir, None)?;
    let mut scorer = VerbScorer::new(classifier.taxonomy());
    for spec in &a.vectors {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--vectors expects NAME=FILE, got '{}'", spec)))?;
        let vectors = WordVectors::load(path).map_err(|e| CliError::Input(format!("{}: {}", path, e)))?;
        scorer = scorer.with_vectors(name, vectors);
    }
    let report = evaluate_measures(&scorer, &data, &measures).map_err(|e| CliError::Input(e.to_string()))?;
    match a.format.or(ctx.file.format).unwrap_or_default() {
        Format::Json => emit(out, &canonical(&report)?),
        Format::Table => emit(out, &report.to_table()),
    }
}

fn cache_fill(a: &FillArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let env_url = std::env::var(config::PROVIDER_URL_ENV).ok();
    let url = match ProviderSpec::resolve(Some(a.provider.as_deref().unwrap_or("remote")), None, env_url.as_deref())? {
        ProviderSpec::Remote(u) => u,
        other => return Err(CliError::Input(format!("cache fill needs a remote provider, got {:?}", other))),
    };
    let mut courses: Vec<Course> = Vec::new();
    if let Some(p) = &a.pairs {
        for pair in PairManifest::load_pairs(p)? {
            courses.push(pair.receiving);
            courses.push(pair.sending);
        }
    }
    for p in &a.course {
        courses.push(Course::load(p)?);
    }
    if courses.is_empty() {
        return Err(CliError::Input("nothing to embed: pass --pairs or --course".into()));
    }
    let mut texts: Vec<String> = Vec::new();
    for c in &courses {
        for t in c.texts() {
            if !texts.contains(&t) {
                texts.push(t);
            }
        }
    }
    let cache = Arc::new(EmbeddingCache::open(&a.cache)?);
    let before = cache.len();
    let provider = CachingProvider::new(RemoteProvider::new(RemoteConfig::new(url)), cache.clone());
    provider.embed_batch(&texts)?;
    emit(
        out,
        &format!(
            "{}: {} texts, {} newly embedded, {} records",
            a.cache.display(),
            texts.len(),
            cache.len() - before,
            cache.len()
        ),
    )
}

fn cache_verify(path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    if !path.exists() {
        return Err(CliError::Resource(format!("embedding cache {} not found", path.display())));
    }
    let report = EmbeddingCache::verify(path)?;
    let mut text = format!("{}: {} records, {} corrupt", path.display(), report.records, report.corrupt.len());
    for (line, msg) in &report.corrupt {
        text.push_str(&format!("\n  line {}: {}", line, msg));
    }
    emit(out, &text)?;
    if report.is_clean() {
        Ok(())
    } else {
        Err(CliError::Resource(format!("{} has {} corrupt record(s)", path.display(), report.corrupt.len())))
    }
}

fn serve(ctx: &Context, a: &ServeArgs) -> Result<(), CliError> {
    let rc = ctx.run_config(&a.provider, None, AssessmentConfig::NEUTRAL)?;
    let provider = rc.provider.build(rc.cache.as_deref())?;
    let port = a.port.or(ctx.file.port).unwrap_or(8080);
    let state = tca_service::AppState::loading(provider);
    state.spawn_load(rc.wordnet_dir.clone(), rc.seed_verbs.clone());
    let cors = tca_service::CorsConfig {
        origins: a.cors_origin.clone(),
    };
    let app = tca_service::router(state, &cors).map_err(CliError::Input)?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(async {
        let addr = format!("{}:{}", a.host, port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError::Resource(format!("cannot listen on {}: {}", addr, e)))?;
        log::info!("listening on http://{}", addr);
        tca_service::serve(listener, app)
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}
