//! Thin command-line wrapper around the library for file-based pipelines.
//!
//! Every subcommand is a pure function of its input files, flags, and seed:
//! the same invocation always produces the same bytes. Graphs are read as
//! TSV edge lists (`buyer_id<TAB>seller_id<TAB>sign`, `#` comments allowed),
//! record outputs are TSV with a `#`-prefixed header row, and `--format
//! table` renders the same records as aligned columns instead.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use bibalance::butterflies::{count_butterflies, write_census_records};
use bibalance::caterpillars::{
    balance_suggestion_matrix, count_caterpillars, write_suggestions, CATERPILLAR_PATTERNS,
};
use bibalance::experiment::{
    default_grid, fit, generate_planted_graph, run_experiment, run_sweep, score_with_fallback,
    ExperimentSpec, FittedMethod,
};
use bibalance::factorization::write_embeddings;
use bibalance::graph::{SignedBipartiteGraph, SplitSpec};
use bibalance::metrics::{write_predictions, MetricsReport};
use bibalance::randomwalk::write_score_block;
use bibalance::{Error, Result};

/// Balance-theory analytics and link-sign prediction for signed bipartite
/// networks.
#[derive(Parser)]
#[command(name = "bibalance", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Census of the seven butterfly sign classes, with null-model surprise.
    Census(CensusArgs),
    /// Per-pair counts of 3-edge paths, split by sign pattern.
    Caterpillars(CaterpillarArgs),
    /// Net balanced-butterfly gain of adding each non-linked pair.
    Suggest(SuggestArgs),
    /// Fit a method on the whole graph and score non-linked (or listed) pairs.
    Predict(PredictArgs),
    /// Split the edges, fit on train, and report test AUC / F1.
    Evaluate(EvaluateArgs),
    /// Grid-search hyperparameters on validation AUC, then run the winner on test.
    Sweep(SweepArgs),
    /// Generate a planted two-faction graph with sign noise.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct IoArgs {
    /// Signed edge list: one `buyer_id<TAB>seller_id<TAB>sign` row per edge.
    #[arg(long)]
    input: PathBuf,
    /// Destination file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Machine-readable TSV with a `#`-prefixed header row.
    Records,
    /// The same records rendered as aligned columns.
    Table,
}

#[derive(Args)]
struct FormatArg {
    #[arg(long, value_enum, default_value_t = OutputFormat::Records)]
    format: OutputFormat,
}

/// Flags choosing what to fit. A `--config` file holds a full experiment
/// spec (method, dataset, split, seed, config, grid as JSON); the other
/// flags override its fields, and `--method` alone is enough without one.
#[derive(Args)]
struct MethodArgs {
    /// Experiment spec as JSON (`{"method": "SBRW", "config": {...}, ...}`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Method name: SCd, SCsc, MF, MFwBT, LazyRW, or SBRW.
    #[arg(long)]
    method: Option<String>,
    /// Master seed: overrides the split seed and every trainer seed at once.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct SplitArgs {
    /// Train,validation,test fractions (default 0.85,0.05,0.10).
    #[arg(long)]
    split: Option<String>,
    /// Dataset label stamped into reports.
    #[arg(long)]
    dataset: Option<String>,
}

#[derive(Args)]
struct CensusArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct CaterpillarArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Pairs to profile: one `buyer_id<TAB>seller_id` row per pair.
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct SuggestArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    model: MethodArgs,
    /// Pairs to score (`buyer_id<TAB>seller_id` rows); defaults to every
    /// non-linked pair.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Also save the fitted model (logistic weights, embeddings, or the
    /// walk's full score block, depending on the method).
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    model: MethodArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Number of consecutive split seeds to run and average. 1 keeps the
    /// single seeded split; larger values re-seed the split and the trainers
    /// per run and report the per-seed results plus mean AUC / F1.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Also dump the per-pair test predictions as TSV (single seed only).
    #[arg(long)]
    dump_predictions: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    model: MethodArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Also dump the winning configuration's test predictions as TSV.
    #[arg(long)]
    dump_predictions: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of buyer-side nodes.
    #[arg(long)]
    buyers: usize,
    /// Number of seller-side nodes.
    #[arg(long)]
    sellers: usize,
    /// Probability that any given pair is linked, in (0, 1].
    #[arg(long)]
    density: f64,
    /// Probability that an edge's faction-aligned sign is flipped, in [0, 0.5).
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Destination file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Census(args) => census(args),
        Command::Caterpillars(args) => caterpillars(args),
        Command::Suggest(args) => suggest(args),
        Command::Predict(args) => predict(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Sweep(args) => sweep(args),
        Command::Generate(args) => generate(args),
    }
}

fn census(args: CensusArgs) -> Result<()> {
    let graph = load_graph(&args.io.input)?;
    let report = count_butterflies(&graph);
    let mut buffer = Vec::new();
    write_census_records(&report, &mut buffer)?;
    emit_records(args.io.output.as_deref(), args.format.format, buffer)
}

fn caterpillars(args: CaterpillarArgs) -> Result<()> {
    let graph = load_graph(&args.io.input)?;
    let pairs = read_pairs(&args.pairs)?;
    let mut buffer = Vec::new();
    write!(buffer, "# buyer_id\tseller_id")?;
    for pattern in CATERPILLAR_PATTERNS {
        write!(buffer, "\t{pattern}")?;
    }
    writeln!(buffer, "\tbalanced\tunbalanced\tnet")?;
    for (buyer_id, seller_id) in &pairs {
        let buyer = lookup_buyer(&graph, buyer_id)?;
        let seller = lookup_seller(&graph, seller_id)?;
        let profile = count_caterpillars(&graph, buyer, seller)?;
        write!(buffer, "{buyer_id}\t{seller_id}")?;
        for count in profile.counts() {
            write!(buffer, "\t{count}")?;
        }
        writeln!(
            buffer,
            "\t{}\t{}\t{}",
            profile.balanced_total(),
            profile.unbalanced_total(),
            profile.net_balance()
        )?;
    }
    emit_records(args.io.output.as_deref(), args.format.format, buffer)
}

fn suggest(args: SuggestArgs) -> Result<()> {
    let graph = load_graph(&args.io.input)?;
    let suggestions = balance_suggestion_matrix(&graph);
    let mut buffer = Vec::new();
    write_suggestions(&graph, &suggestions, &mut buffer)?;
    emit_records(args.io.output.as_deref(), args.format.format, buffer)
}

fn predict(args: PredictArgs) -> Result<()> {
    let graph = load_graph(&args.io.input)?;
    let spec = build_spec(&args.model, &SplitArgs::default())?;
    let (_, config) = spec.resolve();
    let method = spec.method;
    let fitted = fit(&graph, method, &config)?;

    let pairs: Vec<(u32, u32)> = match &args.pairs {
        Some(path) => {
            let mut indexed = Vec::new();
            for (buyer_id, seller_id) in read_pairs(path)? {
                indexed.push((
                    lookup_buyer(&graph, &buyer_id)?,
                    lookup_seller(&graph, &seller_id)?,
                ));
            }
            indexed
        }
        None => {
            let mut non_linked = Vec::new();
            for buyer in 0..graph.n_buyers() as u32 {
                for seller in 0..graph.n_sellers() as u32 {
                    if !graph.has_edge(buyer, seller) {
                        non_linked.push((buyer, seller));
                    }
                }
            }
            non_linked
        }
    };

    let mut buffer = Vec::new();
    writeln!(buffer, "# buyer_id\tseller_id\tscore\tpredicted_sign")?;
    for (buyer, seller) in pairs {
        let (score, sign) = score_with_fallback(&fitted, &graph, buyer, seller)?;
        writeln!(
            buffer,
            "{}\t{}\t{:.6}\t{}",
            graph.buyer_id(buyer),
            graph.seller_id(seller),
            score,
            sign
        )?;
    }

    if let Some(path) = &args.model_out {
        let mut writer = open_output(Some(path))?;
        match &fitted {
            FittedMethod::Logistic(model) => model.write_json(&mut writer)?,
            FittedMethod::Embeddings(embeddings) => {
                write_embeddings(embeddings, &config.effective_mf(method), &mut writer)?;
            }
            FittedMethod::Walk(block) => write_score_block(block, &graph, &mut writer)?,
        }
        writer.flush()?;
    }
    emit_records(args.io.output.as_deref(), args.format.format, buffer)
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    if args.seeds == 0 {
        return Err(Error::InvalidParameter(
            "--seeds must be at least 1".to_string(),
        ));
    }
    if args.seeds > 1 && args.dump_predictions.is_some() {
        return Err(Error::InvalidParameter(
            "--dump-predictions needs a single split; drop --seeds".to_string(),
        ));
    }
    let graph = load_graph(&args.io.input)?;
    let spec = build_spec(&args.model, &args.split)?;
    let (split, config) = spec.resolve();

    let mut reports: Vec<MetricsReport> = Vec::new();
    for offset in 0..args.seeds {
        let (run_split, run_config) = if args.seeds == 1 {
            (split, config)
        } else {
            let seed = split.seed + offset;
            let mut reseeded = split;
            reseeded.seed = seed;
            (reseeded, config.with_seed(seed))
        };
        let outcome =
            run_experiment(&graph, &spec.dataset, spec.method, &run_config, &run_split)?;
        if let Some(path) = &args.dump_predictions {
            let mut writer = open_output(Some(path))?;
            write_predictions(&outcome.predictions, &mut writer)?;
            writer.flush()?;
        }
        reports.push(outcome.report);
    }

    let value = if reports.len() == 1 {
        serde_json::to_value(&reports[0])?
    } else {
        let count = reports.len() as f64;
        let mean_auc = reports.iter().map(|r| r.auc).sum::<f64>() / count;
        let mean_f1 = reports.iter().map(|r| r.f1).sum::<f64>() / count;
        serde_json::json!({
            "reports": reports,
            "mean_auc": mean_auc,
            "mean_f1": mean_f1,
        })
    };
    emit_json(args.io.output.as_deref(), &value)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let graph = load_graph(&args.io.input)?;
    let spec = build_spec(&args.model, &args.split)?;
    let (split, base_config) = spec.resolve();
    let mut grid = match &spec.grid {
        Some(grid_spec) => grid_spec.expand(&base_config, spec.method),
        None => default_grid(spec.method),
    };
    if let Some(seed) = spec.seed {
        for candidate in &mut grid {
            *candidate = candidate.with_seed(seed);
        }
    }
    let outcome = run_sweep(&graph, &spec.dataset, spec.method, &grid, &split)?;
    if let Some(path) = &args.dump_predictions {
        let mut writer = open_output(Some(path))?;
        write_predictions(&outcome.outcome.predictions, &mut writer)?;
        writer.flush()?;
    }
    let value = serde_json::json!({
        "validation_reports": outcome.search.validation_reports,
        "best_index": outcome.search.best_index,
        "best_config": outcome.best_config,
        "test_report": outcome.outcome.report,
    });
    emit_json(args.io.output.as_deref(), &value)
}

fn generate(args: GenerateArgs) -> Result<()> {
    let graph =
        generate_planted_graph(args.buyers, args.sellers, args.density, args.noise, args.seed)?;
    let mut writer = open_output(args.output.as_deref())?;
    graph.write_tsv(&mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Builds the experiment spec from the config file (if any) plus flag
/// overrides. `--method` alone is enough; without either, this errors.
fn build_spec(model: &MethodArgs, split: &SplitArgs) -> Result<ExperimentSpec> {
    let mut spec: ExperimentSpec = match &model.config {
        Some(path) => {
            let file = File::open(path).map_err(|e| file_error(path, e))?;
            serde_json::from_reader(BufReader::new(file))?
        }
        None => {
            let method = model.method.as_deref().ok_or_else(|| {
                Error::InvalidParameter(
                    "no method chosen: pass --method or a --config file naming one".to_string(),
                )
            })?;
            ExperimentSpec {
                method: method.parse()?,
                dataset: "dataset".to_string(),
                split: SplitSpec::default(),
                seed: None,
                config: None,
                grid: None,
            }
        }
    };
    if let Some(name) = &model.method {
        spec.method = name.parse()?;
    }
    if let Some(seed) = model.seed {
        spec.seed = Some(seed);
    }
    if let Some(fractions) = &split.split {
        spec.split = parse_split(fractions, spec.split.seed)?;
    }
    if let Some(dataset) = &split.dataset {
        spec.dataset = dataset.clone();
    }
    spec.split.validate()?;
    Ok(spec)
}

fn parse_split(text: &str, seed: u64) -> Result<SplitSpec> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "--split wants three comma-separated fractions, got {text:?}"
        )));
    }
    let mut fractions = [0.0f64; 3];
    for (slot, part) in fractions.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!("--split fraction {part:?} is not a number"))
        })?;
    }
    SplitSpec::with_fractions(fractions[0], fractions[1], fractions[2], seed)
}

fn load_graph(path: &Path) -> Result<SignedBipartiteGraph> {
    let file = File::open(path).map_err(|e| file_error(path, e))?;
    SignedBipartiteGraph::from_tsv_reader(BufReader::new(file))
}

/// Reads `buyer_id<TAB>seller_id` rows; blank lines and `#` comments are
/// skipped and extra columns (e.g. a sign from an edge list) are ignored.
fn read_pairs(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| file_error(path, e))?;
    let mut pairs = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        match (fields.next(), fields.next()) {
            (Some(buyer), Some(seller)) => pairs.push((buyer.to_string(), seller.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: number + 1,
                    message: "expected buyer_id<TAB>seller_id".to_string(),
                })
            }
        }
    }
    Ok(pairs)
}

fn lookup_buyer(graph: &SignedBipartiteGraph, id: &str) -> Result<u32> {
    graph.buyer_index(id).ok_or_else(|| Error::UnknownId {
        side: "buyer",
        id: id.to_string(),
    })
}

fn lookup_seller(graph: &SignedBipartiteGraph, id: &str) -> Result<u32> {
    graph.seller_index(id).ok_or_else(|| Error::UnknownId {
        side: "seller",
        id: id.to_string(),
    })
}

fn file_error(path: &Path, error: io::Error) -> Error {
    Error::Io(io::Error::new(
        error.kind(),
        format!("{}: {error}", path.display()),
    ))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(path) => Box::new(io::BufWriter::new(
            File::create(path).map_err(|e| file_error(path, e))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout())),
    })
}

fn emit_records(path: Option<&Path>, format: OutputFormat, buffer: Vec<u8>) -> Result<()> {
    let text = String::from_utf8(buffer).expect("records are UTF-8");
    let rendered = match format {
        OutputFormat::Records => text,
        OutputFormat::Table => tabulate(&text),
    };
    let mut writer = open_output(path)?;
    writer.write_all(rendered.as_bytes())?;
    writer.flush()?;
    Ok(())
}

fn emit_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let mut writer = open_output(path)?;
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    writer.flush()?;
    Ok(())
}

/// Renders `#`-headed TSV records as aligned columns (header underlined when
/// present).
fn tabulate(records: &str) -> String {
    let mut rows: Vec<Vec<&str>> = Vec::new();
    let mut has_header = false;
    for (index, line) in records.lines().enumerate() {
        let line = match line.strip_prefix("# ") {
            Some(rest) => {
                has_header = has_header || index == 0;
                rest
            }
            None => line,
        };
        rows.push(line.split('\t').collect());
    }
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in &rows {
        for (column, cell) in row.iter().enumerate() {
            widths[column] = widths[column].max(cell.len());
        }
    }
    let render = |row: &[&str]| -> String {
        let mut line = String::new();
        for (column, cell) in row.iter().enumerate() {
            if column > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if column + 1 < row.len() {
                line.push_str(&" ".repeat(widths[column].saturating_sub(cell.len())));
            }
        }
        line
    };
    let mut out = String::new();
    for (index, row) in rows.iter().enumerate() {
        out.push_str(&render(row));
        out.push('\n');
        if index == 0 && has_header {
            let dashes: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            let dashes: Vec<&str> = dashes.iter().map(String::as_str).collect();
            out.push_str(&render(&dashes));
            out.push('\n');
        }
    }
    out
}
