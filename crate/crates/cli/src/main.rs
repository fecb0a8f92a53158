use std::fmt::Write as _;
use std::io::{ErrorKind, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use structsearch::bench::{compare_engines, gen_queries, render_table, reports_to_json, Engine, QueryKind};
use structsearch::config::{ConfigOverrides, EngineConfig, UnionMode};
use structsearch::frontend::{export_tree, import_tree, FrontendError};
use structsearch::index::format::checksum;
use structsearch::index::{build_index, ingest, load_index, save_index, FormatError, IndexError};
use structsearch::recommend::{render_text, Markup, RecommendError, Reduced, RenderOptions};
use structsearch::rerank::MethodCache;
use structsearch::synth::{generate_files, write_corpus, SynthConfig};
use structsearch_cli::service::{serve, AppState};
use structsearch_cli::{document, parse_input, recommendations};

const EXIT_OTHER: u8 = 1;
const EXIT_PARSE: u8 = 3;
const EXIT_EMPTY: u8 = 4;
const EXIT_FORMAT: u8 = 5;

#[derive(Parser)]
#[command(name = "structsearch", version, about = "Structural code search and snippet recommendation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a corpus directory (one subdirectory per project).
    Index {
        corpus: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Recommend code for a query read from a file or stdin.
    Recommend {
        /// Query file; `-` or absent reads stdin.
        query: Option<PathBuf>,
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, value_enum, default_value_t = MarkupArg::Lines)]
        markup: MarkupArg,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Measure Recall@1 and Recall@100 of the engines on generated queries.
    Bench {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, value_enum, default_value_t = KindArg::Both)]
        kind: KindArg,
        #[arg(short = 'n', long, default_value_t = 1000)]
        queries: usize,
        /// Engines to compare; all three by default.
        #[arg(long, value_enum, value_delimiter = ',')]
        engines: Vec<EngineArg>,
        /// Also write the machine-readable report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Serve POST /recommend and GET /health over HTTP.
    Serve {
        #[command(flatten)]
        index: IndexArg,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Convert a snippet, method body or method declaration to an interchange document.
    ExportTree {
        input: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Validate an interchange document and print the code it describes.
    ImportTree { input: Option<PathBuf> },
    /// Write a seeded synthetic corpus to a directory.
    Synth {
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        methods: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Args)]
struct IndexArg {
    /// Index file.
    #[arg(short, long, env = "STRUCTSEARCH_INDEX")]
    index: PathBuf,
}

#[derive(Args, Default)]
struct EngineArgs {
    /// Configuration file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long)]
    eta1: Option<usize>,
    #[arg(long)]
    eta2: Option<usize>,
    #[arg(long)]
    tau1: Option<f64>,
    #[arg(long)]
    tau2: Option<f64>,
    #[arg(long)]
    tau3: Option<f64>,
    #[arg(long)]
    topk: Option<usize>,
    #[arg(long, value_enum)]
    union: Option<UnionArg>,
    /// Mark dropped statements with a placeholder comment.
    #[arg(long)]
    placeholders: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarkupArg {
    Plain,
    Lines,
    Ansi,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Contiguous,
    NonContiguous,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Reranked,
    TfidfFeature,
    TfidfKeyword,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnionArg {
    AsWritten,
    Uniform,
}

impl EngineArgs {
    fn resolve(&self) -> Result<EngineConfig> {
        let mut o = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ConfigOverrides::from_toml(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => ConfigOverrides::default(),
        };
        o.merge(&ConfigOverrides {
            eta1: self.eta1,
            eta2: self.eta2,
            tau1: self.tau1,
            tau2: self.tau2,
            tau3: self.tau3,
            top_k: self.topk,
            union_mode: self.union.map(|u| match u {
                UnionArg::AsWritten => UnionMode::AsWritten,
                UnionArg::Uniform => UnionMode::Uniform,
            }),
            placeholders: self.placeholders.then_some(true),
            workers: self.workers,
            seed: self.seed,
        });
        let config = o.apply(&EngineConfig::default())?;
        if config.workers > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(config.workers).build_global().ok();
        }
        Ok(config)
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == ErrorKind::BrokenPipe => Ok(()),
        r => r.context("writing output"),
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

fn open_index(path: &Path) -> Result<structsearch::index::CorpusIndex> {
    let start = Instant::now();
    let index = load_index(path)?;
    log::info!("loaded {} methods from {} in {:.2}s", index.len(), path.display(), start.elapsed().as_secs_f64());
    Ok(index)
}

fn cmd_index(corpus: &Path, out: &Path, engine: &EngineArgs) -> Result<ExitCode> {
    engine.resolve()?;
    let start = Instant::now();
    let c = ingest(corpus)?;
    let index = build_index(&c)?;
    save_index(&index, out)?;
    let bytes = std::fs::read(out).with_context(|| format!("reading back {}", out.display()))?;
    let sum: String = checksum(&bytes).unwrap_or_default().iter().map(|b| format!("{b:02x}")).collect();
    let s = &c.stats;
    let mut out = String::new();
    writeln!(out, "methods      {}", index.len())?;
    writeln!(out, "features     {}", index.feature_count())?;
    writeln!(out, "files        {} ({} duplicate, {} unreadable, {} unlexable)", s.files, s.duplicate_files, s.unreadable_files, s.unlexable_files)?;
    writeln!(out, "projects     {} duplicate", s.duplicate_projects)?;
    writeln!(out, "found        {} methods ({} duplicate, {} unparseable)", s.methods_found, s.duplicate_methods, s.unparseable_methods)?;
    writeln!(out, "checksum     {sum}")?;
    writeln!(out, "elapsed      {:.2}s", start.elapsed().as_secs_f64())?;
    emit(&out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_recommend(query: Option<&Path>, index: &Path, format: Format, markup: MarkupArg, engine: &EngineArgs) -> Result<ExitCode> {
    let config = engine.resolve()?;
    let text = read_input(query)?;
    let tree = parse_input(&text)?;
    let index = open_index(index)?;
    let recs = recommendations(&index, tree, &config)?;
    let empty = recs.is_empty();
    match format {
        Format::Json => emit(&document(recs))?,
        Format::Text => {
            let markup = match markup {
                MarkupArg::Plain => Markup::Plain,
                MarkupArg::Lines => Markup::Lines,
                MarkupArg::Ansi => Markup::Ansi,
            };
            if empty {
                eprintln!("no recommendations");
            }
            emit(&render_text(&recs, markup))?;
        }
    }
    Ok(if empty { ExitCode::from(EXIT_EMPTY) } else { ExitCode::SUCCESS })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    index: &Path,
    kind: KindArg,
    n: usize,
    engines: &[EngineArg],
    report: Option<&Path>,
    format: Format,
    engine: &EngineArgs,
) -> Result<ExitCode> {
    let config = engine.resolve()?;
    let index = open_index(index)?;
    let kinds: &[QueryKind] = match kind {
        KindArg::Contiguous => &[QueryKind::Contiguous],
        KindArg::NonContiguous => &[QueryKind::NonContiguous],
        KindArg::Both => &[QueryKind::Contiguous, QueryKind::NonContiguous],
    };
    let engines: Vec<Engine> = if engines.is_empty() {
        Engine::ALL.to_vec()
    } else {
        engines
            .iter()
            .map(|e| match e {
                EngineArg::Reranked => Engine::Reranked,
                EngineArg::TfidfFeature => Engine::TfidfFeature,
                EngineArg::TfidfKeyword => Engine::TfidfKeyword,
            })
            .collect()
    };
    let cache = MethodCache::build(&index);
    let mut reports = Vec::new();
    for &k in kinds {
        let set = gen_queries(&index, n, k, config.seed)?;
        reports.push(compare_engines(&index, Some(&cache), &set, k, &engines, &config));
    }
    let json = reports_to_json(&reports);
    if let Some(p) = report {
        std::fs::write(p, format!("{json}\n")).with_context(|| format!("writing {}", p.display()))?;
    }
    match format {
        Format::Text => emit(&render_table(&reports))?,
        Format::Json => emit(&format!("{json}\n"))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_serve(index: &Path, bind: SocketAddr, engine: &EngineArgs) -> Result<ExitCode> {
    let config = engine.resolve()?;
    let index = open_index(index)?;
    let state = Arc::new(AppState { index, config });
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(serve(state, bind)).with_context(|| format!("serving on {bind}"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_export(input: Option<&Path>, out: Option<&Path>) -> Result<ExitCode> {
    let tree = parse_input(&read_input(input)?)?;
    let doc = export_tree(&tree);
    match out {
        Some(p) => std::fs::write(p, format!("{doc}\n")).with_context(|| format!("writing {}", p.display()))?,
        None => emit(&format!("{doc}\n"))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_import(input: Option<&Path>) -> Result<ExitCode> {
    let tree = import_tree(read_input(input)?.trim_end())?;
    let all = vec![true; tree.tree.leaf_count()];
    let (text, _) = Reduced::new(&tree.tree, &all).render(&tree.tree, &|_| false, RenderOptions::default());
    emit(&format!("{text}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_synth(out: &Path, methods: usize, seed: u64) -> Result<ExitCode> {
    if methods == 0 {
        bail!("--methods must be at least 1");
    }
    let files = generate_files(&SynthConfig::new(methods, seed));
    write_corpus(&files, out).with_context(|| format!("writing {}", out.display()))?;
    emit(&format!("wrote {} files to {}\n", files.len(), out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<FrontendError>() {
            return EXIT_PARSE;
        }
        if let Some(r) = cause.downcast_ref::<RecommendError>() {
            return match r {
                RecommendError::Parse(_) | RecommendError::Search(_) => EXIT_PARSE,
                RecommendError::NoResult => EXIT_EMPTY,
            };
        }
        if cause.is::<FormatError>() || matches!(cause.downcast_ref::<IndexError>(), Some(IndexError::Format(_))) {
            return EXIT_FORMAT;
        }
    }
    EXIT_OTHER
}

fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Index { corpus, out, engine } => cmd_index(corpus, out, engine),
        Command::Recommend { query, index, format, markup, engine } => {
            cmd_recommend(query.as_deref(), &index.index, *format, *markup, engine)
        }
        Command::Bench { index, kind, queries, engines, report, format, engine } => {
            cmd_bench(&index.index, *kind, *queries, engines, report.as_deref(), *format, engine)
        }
        Command::Serve { index, bind, engine } => cmd_serve(&index.index, *bind, engine),
        Command::ExportTree { input, out } => cmd_export(input.as_deref(), out.as_deref()),
        Command::ImportTree { input } => cmd_import(input.as_deref()),
        Command::Synth { out, methods, seed } => cmd_synth(out, *methods, *seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
