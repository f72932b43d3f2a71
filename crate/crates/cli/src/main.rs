use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lyrecon::fixtures::synthetic;
use lyrecon::generation::{Backend, ChatBackend, Generator, MockBackend, ResultCache};
use lyrecon::pipeline::{
    run_evaluate, run_join, run_reconstruct, run_report, EvaluateOptions, JoinInputs,
    PipelineConfig, PipelineError, ReconstructOptions,
};

/// Rebuild lyric corpora from bag-of-words data and measure them.
#[derive(Parser)]
#[command(name = "lyrecon", version)]
struct Cli {
    /// Settings file (TOML) with optional [join], [backend] and [prompt] tables.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inner-join the bag-of-words file with mood, genre and metadata tables.
    Join(JoinArgs),
    /// Generate lyrics for every joined record, resuming unfinished runs.
    Reconstruct(ReconstructArgs),
    /// Corpus statistics, optional comparison and bag-of-words fidelity.
    Evaluate(EvaluateArgs),
    /// Compare two stats.tsv files.
    Report(ReportArgs),
    /// Write a seeded synthetic input set.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct JoinArgs {
    #[arg(long)]
    bow: PathBuf,
    /// Mood CSV with track id, valence and arousal columns.
    #[arg(long)]
    mood: PathBuf,
    /// Tab-separated `track_id<TAB>genre` lines.
    #[arg(long)]
    genre: PathBuf,
    /// CSV with track id, artist and title columns.
    #[arg(long)]
    meta: PathBuf,
    /// `start_over_pi end_over_pi label` lines; built-in eight sectors if omitted.
    #[arg(long)]
    mood_table: Option<PathBuf>,
    /// Field separator of the mood and metadata tables.
    #[arg(long)]
    delimiter: Option<char>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    /// Deterministic offline generator.
    Mock,
    /// Chat-completions endpoint; key from LYRECON_API_KEY.
    Live,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "mock")]
    backend: BackendKind,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    timeout_secs: Option<f64>,
    #[arg(long)]
    max_attempts: Option<u32>,
    /// Upper bound on concurrent requests.
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Keep only the N most frequent words in each prompt.
    #[arg(long)]
    max_vocabulary_words: Option<usize>,
    /// Directory for cached generations.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Attempt at most N outstanding tracks in this invocation.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Second corpus to compare against.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    abstract_lexicon: PathBuf,
    #[arg(long)]
    concrete_lexicon: PathBuf,
    /// Bag-of-words file for per-track coverage and rank fidelity.
    #[arg(long)]
    bow: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    #[arg(long, default_value = "Reconstructed")]
    left_label: String,
    #[arg(long, default_value = "Reference")]
    right_label: String,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 100)]
    tracks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::load)
}

fn join(args: JoinArgs, mut config: PipelineConfig) -> Result<i32, PipelineError> {
    if let Some(d) = args.delimiter {
        config.join.delimiter = d;
    }
    let inputs = JoinInputs {
        bow: args.bow,
        mood: args.mood,
        genre: args.genre,
        meta: args.meta,
        mood_table: args.mood_table,
    };
    let (_, report) = run_join(&inputs, &config.join, &args.out)?;
    print!("{report}");
    Ok(0)
}

fn reconstruct(args: ReconstructArgs, mut config: PipelineConfig) -> Result<i32, PipelineError> {
    let b = &mut config.backend;
    if let Some(v) = args.endpoint {
        b.endpoint = v;
    }
    if let Some(v) = args.model {
        b.model = v;
    }
    if let Some(v) = args.temperature {
        b.decoding.temperature = v;
    }
    if let Some(v) = args.max_tokens {
        b.decoding.max_tokens = v;
    }
    if let Some(v) = args.timeout_secs {
        b.timeout_secs = v;
    }
    if let Some(v) = args.max_attempts {
        b.retry.max_attempts = v;
    }
    if let Some(v) = args.max_in_flight {
        b.max_in_flight = v;
    }
    if let Some(v) = args.max_vocabulary_words {
        config.prompt.max_vocabulary_words = Some(v);
    }

    // credentials are checked before anything touches the output directory
    let backend: Box<dyn Backend> = match args.backend {
        BackendKind::Mock => Box::new(MockBackend),
        BackendKind::Live => Box::new(ChatBackend::from_env(&config.backend)?),
    };
    let generator = Generator::new(
        backend,
        config.backend,
        args.cache_dir.map(ResultCache::new),
    )?;
    let options = ReconstructOptions {
        records: args.records,
        out: args.out,
        prompt: config.prompt,
        limit: args.limit,
    };
    let summary = run_reconstruct(&options, &generator)?;
    print!("{summary}");
    Ok(summary.exit_code())
}

fn evaluate(args: EvaluateArgs) -> Result<i32, PipelineError> {
    let summary = run_evaluate(&EvaluateOptions {
        corpus: args.corpus,
        reference: args.reference,
        abstract_lexicon: args.abstract_lexicon,
        concrete_lexicon: args.concrete_lexicon,
        bow: args.bow,
        out_dir: args.out_dir,
    })?;
    match &summary.comparison {
        Some(report) => print!("{}", report.to_table()),
        None => print!("{}", summary.stats.to_table("Corpus")),
    }
    if let Some(mean) = summary.mean_coverage() {
        println!("mean bow_coverage: {mean}");
    }
    if summary.missing_bow > 0 {
        println!("tracks without bag-of-words: {}", summary.missing_bow);
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<i32, PipelineError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Join(a) => join(a, config),
        Command::Reconstruct(a) => reconstruct(a, config),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => {
            let report = run_report(
                &a.left,
                &a.right,
                (&a.left_label, &a.right_label),
                &a.out_dir,
            )?;
            print!("{}", report.to_table());
            Ok(0)
        }
        Command::Fixture(a) => {
            let paths = synthetic(a.tracks, a.seed)
                .write_to(&a.out_dir)
                .map_err(|source| PipelineError::Io {
                    path: a.out_dir.display().to_string(),
                    source,
                })?;
            println!("{}", paths.bow.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
