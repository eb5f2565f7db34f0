//! The `biasscan` command line.
//!
//! Exit codes: 0 success, 1 analysis failure, 2 usage or configuration error.
//! With `--format json` stdout carries only the JSON artifact.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::classifier::{ClassifyConfig, MockBackend, ModelBackend, UpstreamBackend};
use crate::evaluation::{
    evaluate, evaluate_backend, format_table, load_dataset, random_baseline, DatasetFormat, EvaluationRow,
};
use crate::extraction::{extract_article, fetch_url, Article, FetchLimits};
use crate::report::analyze;
use crate::segmentation::segment;
use crate::service::{self, ServiceConfig};
use crate::taxonomy::taxonomy_document;

#[derive(Debug, Parser)]
#[command(name = "biasscan", version, about = "Sentence-level news bias analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze one article and print its bias report.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
        backend: BackendKind,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// BCP-47 language tag passed to the model.
        #[arg(long)]
        language: Option<String>,
        /// Include the article body in the report.
        #[arg(long)]
        echo_body: bool,
        /// Service config file, for upstream settings.
        #[arg(long, env = service::ENV_CONFIG)]
        config: Option<PathBuf>,
    },
    /// Print the extracted article, as JSON unless `--format text`.
    Extract {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Print the sentences of an article with their offsets.
    Segment {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, value_enum, default_value_t = BackendKind::Mock)]
        backend: BackendKind,
        #[arg(long, env = service::ENV_CONFIG)]
        config: Option<PathBuf>,
        /// Overrides BIASSCAN_LISTEN_ADDR.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Evaluate a classifier on a labeled sentence dataset. Prints a
    /// metrics table followed by the same rows as JSON.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// Dataset format; defaults from the file extension.
        #[arg(long, value_enum)]
        format: Option<DatasetFormat>,
        #[arg(long, value_enum, default_value_t = EvalBackend::Mock)]
        backend: EvalBackend,
        /// Seed for the random baseline.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
        #[arg(long, env = service::ENV_CONFIG)]
        config: Option<PathBuf>,
    },
    /// Print the bias taxonomy as JSON.
    Taxonomy,
}

/// Exactly one of `--file`, `--url` or `--stdin`.
#[derive(Debug, Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
pub struct InputArgs {
    /// Read the article from a file. `.html`/`.htm` files are extracted.
    #[arg(long, group = "source")]
    file: Option<PathBuf>,
    /// Fetch and extract the article at this URL.
    #[arg(long, group = "source")]
    url: Option<String>,
    /// Read the article from standard input.
    #[arg(long, group = "source")]
    stdin: bool,
    /// Treat file or stdin input as HTML.
    #[arg(long, conflicts_with = "url")]
    html: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Mock,
    Upstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalBackend {
    Mock,
    Upstream,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// A failure mapped to an exit code.
struct Failure {
    code: i32,
    message: String,
}

fn failure(message: impl ToString) -> Failure {
    Failure { code: 1, message: message.to_string() }
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn is_html_path(p: &Path) -> bool {
    p.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("html") || e.eq_ignore_ascii_case("htm"))
}

async fn load_article(input: &InputArgs) -> Result<Article, Failure> {
    if let Some(url) = &input.url {
        let html = fetch_url(url, &FetchLimits::default()).await.map_err(failure)?;
        let mut article = extract_article(&html, Some(url)).map_err(failure)?;
        article.source_url = Some(url.clone());
        return Ok(article);
    }
    let (raw, html) = match &input.file {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| failure(format!("{}: {e}", path.display())))?;
            (crate::extraction::decode_html(&bytes, None), input.html || is_html_path(path))
        }
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf).map_err(failure)?;
            (crate::extraction::decode_html(&buf, None), input.html)
        }
    };
    if html {
        extract_article(&raw, None).map_err(failure)
    } else {
        Ok(Article::from_text(&raw))
    }
}

fn make_backend(kind: BackendKind, config: Option<&Path>) -> Result<Arc<dyn ModelBackend>, Failure> {
    match kind {
        BackendKind::Mock => Ok(Arc::new(MockBackend::with_default_lexicon())),
        BackendKind::Upstream => {
            let cfg = ServiceConfig::load(config, |k| std::env::var(k).ok()).map_err(usage)?;
            let upstream = cfg.upstream().map_err(usage)?;
            Ok(Arc::new(UpstreamBackend::new(upstream).map_err(usage)?))
        }
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

/// Runs one command and returns what it prints on stdout.
async fn execute(command: Command) -> Result<String, Failure> {
    let mut out = String::new();
    match command {
        Command::Analyze { input, backend, format, language, echo_body, config } => {
            let backend = make_backend(backend, config.as_deref())?;
            let mut article = load_article(&input).await?;
            if language.is_some() {
                article.language_hint = language;
            }
            let report = analyze(&article, backend.as_ref(), &ClassifyConfig::default(), echo_body)
                .await
                .map_err(failure)?;
            match format {
                Format::Json => out = report.to_json() + "\n",
                Format::Text => out = report.render_text(),
            }
        }
        Command::Extract { input, format } => {
            let article = load_article(&input).await?;
            match format {
                Format::Json => out = json_line(&article),
                Format::Text => {
                    if !article.title.is_empty() {
                        let _ = writeln!(out, "Title: {}", article.title);
                    }
                    if !article.byline.is_empty() {
                        let _ = writeln!(out, "Byline: {}", article.byline);
                    }
                    let _ = writeln!(out, "{}", article.body_text);
                }
            }
        }
        Command::Segment { input, format } => {
            let article = load_article(&input).await?;
            let sentences = segment(&article.body_text);
            match format {
                Format::Json => out = json_line(&sentences),
                Format::Text => {
                    for s in &sentences {
                        let _ = writeln!(out, "{}\t{}..{}\t{}", s.index, s.start, s.end, s.text);
                    }
                }
            }
        }
        Command::Serve { backend, config, listen } => {
            let mut cfg = ServiceConfig::load(config.as_deref(), |k| std::env::var(k).ok()).map_err(usage)?;
            if let Some(addr) = listen {
                cfg.listen_addr = addr;
            }
            let backend = make_backend(backend, config.as_deref())?;
            service::serve(&cfg, backend).await.map_err(failure)?;
        }
        Command::Eval { dataset, format, backend, seed, parallelism, config } => {
            let fmt = format.unwrap_or_else(|| DatasetFormat::from_path(&dataset));
            let data = load_dataset(&dataset, fmt).map_err(failure)?;
            let (name, counts) = match backend {
                EvalBackend::Random => {
                    let coin = random_baseline(seed);
                    let cm = evaluate(&data, |t| Ok::<_, std::convert::Infallible>(coin(t))).expect("infallible");
                    (format!("random (seed {seed})"), cm)
                }
                EvalBackend::Mock | EvalBackend::Upstream => {
                    let kind = if backend == EvalBackend::Mock { BackendKind::Mock } else { BackendKind::Upstream };
                    let b = make_backend(kind, config.as_deref())?;
                    let cm = evaluate_backend(&data, b.as_ref(), &ClassifyConfig::default(), parallelism)
                        .await
                        .map_err(failure)?;
                    (b.model_id().to_string(), cm)
                }
            };
            let rows = [EvaluationRow::new(name, counts)];
            out = format_table(&rows) + "\n" + &json_line(&rows);
        }
        Command::Taxonomy => out = json_line(&taxonomy_document()),
    }
    Ok(out)
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let default_level = if matches!(cli.command, Command::Serve { .. }) { "info" } else { "warn" };
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new(default_level));
    let _ = tracing_subscriber::fmt().with_env_filter(filter).with_writer(std::io::stderr).try_init();

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("error: cannot start runtime: {e}");
            return 1;
        }
    };
    match runtime.block_on(execute(cli.command)) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()) {
                Ok(()) => 0,
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
                Err(e) => {
                    eprintln!("error: cannot write output: {e}");
                    1
                }
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
