//! `foldscope`: ingest genome tables, render folded ideograms, generate and
//! check query tasks, compute interaction metrics, and run the HTTP service.
//!
//! Exit codes: 0 success, 1 I/O, 2 parse, 3 validation, 4 infeasible task.

mod script;

use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use foldscope_core::fold::build_layout;
use foldscope_core::tasks::{check_answer, generate_task_excluding, oracle_answer};
use foldscope_core::{
    build_assembly, ingest, Answer, EventLog, FoldState, GenomeAssembly, LayoutConfig, MetricsError, ModelConfig,
    ParseMode, TaskError, TaskKind, TaskSpec,
};
use foldscope_service::{metrics_report, render_svg, Store, SvgOptions};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Infeasible(_) => 4,
        }
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::NoFeasibleTask(_) => CliError::Infeasible(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::BadLine { .. } => CliError::Parse(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser)]
#[command(name = "foldscope", version, about = "Multi-focus genome ideogram engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and build an assembly from cytoband, gene and phenotype tables
    Ingest(IngestArgs),
    /// Render one chromosome as SVG after applying a fold script
    Render(RenderArgs),
    /// Generate, solve or check query tasks
    #[command(subcommand)]
    Task(TaskCommand),
    /// Compute interaction metrics from an event log
    Metrics(MetricsArgs),
    /// Start the HTTP service
    Serve(ServeArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    cytobands: PathBuf,
    #[arg(long)]
    genes: PathBuf,
    #[arg(long)]
    phenotypes: Option<PathBuf>,
    #[arg(long, default_value = "assembly")]
    name: String,
    /// Write the built assembly as JSON
    #[arg(long)]
    out: Option<PathBuf>,
    /// Abort on the first bad line (default)
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip bad lines and report them
    #[arg(long)]
    lenient: bool,
}

#[derive(Args)]
struct RenderArgs {
    /// Assembly JSON written by `ingest --out`
    #[arg(long)]
    assembly: PathBuf,
    #[arg(long)]
    chromosome: String,
    /// Lines of `<verb> <target>`; verbs: open, close, compress, uncompress, open_sub, close_sub
    #[arg(long)]
    fold_script: Option<PathBuf>,
    /// Pixels per layout unit
    #[arg(long, default_value_t = SvgOptions::default().scale)]
    scale: f64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TaskCommand {
    /// Print a task as JSON
    Generate {
        #[arg(long)]
        assembly: PathBuf,
        #[arg(long)]
        kind: TaskKind,
        #[arg(long)]
        seed: u64,
        /// Chromosomes already used, comma separated
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
    },
    /// Print the oracle answer of a task as JSON
    Solve {
        #[arg(long)]
        assembly: PathBuf,
        #[arg(long)]
        task: PathBuf,
    },
    /// Check an answer; prints `correct` or `incorrect`
    Check {
        #[arg(long)]
        assembly: PathBuf,
        #[arg(long)]
        task: PathBuf,
        #[arg(long)]
        answer: PathBuf,
    },
}

#[derive(Args)]
struct MetricsArgs {
    /// JSON-lines event log
    #[arg(long)]
    log: PathBuf,
    #[arg(long, requires = "chromosome")]
    assembly: Option<PathBuf>,
    #[arg(long)]
    chromosome: Option<String>,
    /// Chromosome length in bp, instead of an assembly
    #[arg(long, conflicts_with = "assembly")]
    length: Option<u64>,
    /// Task JSON; adds first-hit and analysis times
    #[arg(long, requires = "assembly")]
    task: Option<PathBuf>,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Assembly JSON files to preload, registered under their file stem
    #[arg(long)]
    assembly: Vec<PathBuf>,
    /// Persistence root; overrides FOLDSCOPE_DATA_DIR
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> CliResult {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_assembly(path: &Path) -> CliResult<GenomeAssembly> {
    let assembly = GenomeAssembly::from_json(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    assembly
        .validate()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(assembly)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn parse_err(path: &Path, e: foldscope_core::ParseError) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

fn ingest_cmd(args: IngestArgs) -> CliResult {
    let mode = if args.lenient { ParseMode::Lenient } else { ParseMode::Strict };
    let bands = ingest::parse_cytobands(&read(&args.cytobands)?, mode).map_err(|e| parse_err(&args.cytobands, e))?;
    let genes = ingest::parse_gene_table(&read(&args.genes)?, mode).map_err(|e| parse_err(&args.genes, e))?;
    let phenotypes = match &args.phenotypes {
        Some(p) => ingest::parse_phenotype_table(&read(p)?, mode).map_err(|e| parse_err(p, e))?,
        None => Default::default(),
    };
    for w in bands.warnings.iter().chain(&genes.warnings).chain(&phenotypes.warnings) {
        log::warn!("{w}");
    }
    let skipped: Vec<String> = bands
        .skipped
        .iter()
        .map(|e| format!("{}: {e}", args.cytobands.display()))
        .chain(genes.skipped.iter().map(|e| format!("{}: {e}", args.genes.display())))
        .chain(phenotypes.skipped.iter().map(|e| format!("phenotypes: {e}")))
        .collect();
    for s in &skipped {
        eprintln!("skipped {s}");
    }
    let config = ModelConfig {
        name: args.name,
        ..ModelConfig::default()
    };
    let assembly = build_assembly(&bands.rows, &genes.rows, &phenotypes.rows, &config)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut report = format!(
        "assembly\t{}\nchromosomes\t{}\nlength_bp\t{}\ngenes\t{}\nphenotypes\t{}\nskipped\t{}\n",
        assembly.name,
        assembly.chromosomes.len(),
        assembly.total_length(),
        assembly.total_genes(),
        assembly.phenotypes.len(),
        skipped.len()
    );
    report.push_str("#chromosome\tlength_bp\tgenes\tregions\n");
    for c in &assembly.chromosomes {
        report.push_str(&format!("{}\t{}\t{}\t{}\n", c.id, c.length_bp, c.gene_count(), c.regions.len()));
    }
    print!("{report}");
    if let Some(out) = args.out {
        write(&out, &assembly.to_json())?;
    }
    Ok(())
}

fn render_cmd(args: RenderArgs) -> CliResult {
    let assembly = load_assembly(&args.assembly)?;
    let chrom = assembly
        .chromosome(&args.chromosome)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let mut state = FoldState::new(chrom.id.clone(), LayoutConfig::default());
    if let Some(path) = &args.fold_script {
        let steps = script::parse(&read(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        for step in steps {
            state = state
                .apply(chrom, step.verb, &step.target)
                .map_err(|e| CliError::Validation(format!("{}: line {}: {e}", path.display(), step.line)))?;
        }
    }
    if !(args.scale.is_finite() && args.scale > 0.0) {
        return Err(CliError::Validation("--scale must be positive".into()));
    }
    let layout = build_layout(&assembly, &state).map_err(|e| CliError::Validation(e.to_string()))?;
    let opts = SvgOptions {
        scale: args.scale,
        ..SvgOptions::default()
    };
    let svg = render_svg(&assembly, &layout, &opts);
    match args.out {
        Some(out) => write(&out, &svg),
        None => {
            print!("{svg}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn task_cmd(cmd: TaskCommand) -> CliResult {
    match cmd {
        TaskCommand::Generate {
            assembly,
            kind,
            seed,
            exclude,
        } => {
            let assembly = load_assembly(&assembly)?;
            let used: BTreeSet<String> = exclude.into_iter().collect();
            let task = generate_task_excluding(&assembly, kind, seed, &used)?;
            println!("{}", to_json(&task));
        }
        TaskCommand::Solve { assembly, task } => {
            let assembly = load_assembly(&assembly)?;
            let task: TaskSpec = load_json(&task)?;
            println!("{}", to_json(&oracle_answer(&assembly, &task)?));
        }
        TaskCommand::Check { assembly, task, answer } => {
            let assembly = load_assembly(&assembly)?;
            let task: TaskSpec = load_json(&task)?;
            let answer: Answer = load_json(&answer)?;
            let correct = check_answer(&assembly, &task, &answer)?;
            println!("{}", if correct { "correct" } else { "incorrect" });
        }
    }
    Ok(())
}

fn metrics_cmd(args: MetricsArgs) -> CliResult {
    let log = EventLog::parse_jsonl(&read(&args.log)?).map_err(|e| CliError::Parse(format!("{}: {e}", args.log.display())))?;
    let report = match (&args.assembly, args.length) {
        (Some(path), _) => {
            let assembly = load_assembly(path)?;
            let task: Option<TaskSpec> = args.task.as_deref().map(load_json).transpose()?;
            let chromosome = args.chromosome.clone().unwrap_or_default();
            metrics_report(&assembly, &log, &chromosome, task.as_ref()).map_err(|e| CliError::Validation(e.to_string()))?
        }
        (None, Some(length)) => {
            let log = match &args.chromosome {
                Some(c) => log.for_chromosome(c),
                None => log,
            };
            foldscope_service::MetricsReport {
                chromosome: args.chromosome.clone().unwrap_or_default(),
                chromosome_length_bp: length,
                events: log.len(),
                exploration: foldscope_core::metrics::exploration_percentage(&log, length)?,
                kind: None,
                targets: Vec::new(),
                analysis_time_ms: None,
            }
        }
        (None, None) => return Err(CliError::Validation("pass --assembly with --chromosome, or --length".into())),
    };
    if args.json {
        println!("{}", to_json(&report));
    } else {
        print!("{}", report.to_tsv());
    }
    Ok(())
}

fn serve_cmd(args: ServeArgs) -> CliResult {
    let store = match &args.data_dir {
        Some(dir) => Store::open(dir),
        None => Store::from_env(),
    }
    .map_err(|source| CliError::Io {
        path: args.data_dir.clone().unwrap_or_default(),
        source,
    })?;
    for path in &args.assembly {
        let assembly = load_assembly(path)?;
        let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let id = store
            .add_assembly(assembly, Some(id))
            .map_err(|e| CliError::Validation(e.to_string()))?;
        log::info!("assembly {id} loaded from {}", path.display());
    }
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::Validation(format!("bad listen address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        path: PathBuf::new(),
        source,
    })?;
    runtime
        .block_on(foldscope_service::serve(store, addr))
        .map_err(|source| CliError::Io {
            path: PathBuf::from(addr.to_string()),
            source,
        })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => ingest_cmd(args),
        Command::Render(args) => render_cmd(args),
        Command::Task(cmd) => task_cmd(cmd),
        Command::Metrics(args) => metrics_cmd(args),
        Command::Serve(args) => serve_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
