//! Subcommand implementations and the exit-code taxonomy.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hashgnn::error::Error as LibError;
use hashgnn::eval::{run_link_prediction, EvalConfig};
use hashgnn::graph::io::{load_graph_from_paths, save_graph, write_mapping};
use hashgnn::graph::{generate_synthetic, SyntheticConfig};
use hashgnn::sketch::io::write_embedding;
use hashgnn::sketch::{
    build_family_table, embed_iterations, memory_footprint, EmbeddingMatrix,
};

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_VALIDATION: u8 = 4;
pub const EXIT_RESOURCE: u8 = 5;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub enum CliError {
    Lib(LibError),
    Resource(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Resource(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(LibError::Io(e))
    }
}

/// 0 ok, 2 config, 3 parse/io, 4 validation, 5 resource.
pub fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Resource(_) => EXIT_RESOURCE,
        CliError::Lib(e) => match e {
            LibError::InvalidParameter(_) => EXIT_CONFIG,
            LibError::Parse { .. } | LibError::Io(_) => EXIT_PARSE,
            LibError::Validation(_)
            | LibError::HashDomain { .. }
            | LibError::EmptySet
            | LibError::LengthMismatch { .. }
            | LibError::Split(_) => EXIT_VALIDATION,
        },
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Lib(LibError::InvalidParameter(msg.into()))
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

/// Randomized MinHash message-passing embeddings and link prediction.
#[derive(Parser, Debug)]
#[command(name = "hashgnn", version, about)]
pub struct Cli {
    /// Worker threads for the sketch engine; the output never depends on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Budget in MiB for the embedding memory estimate.
    #[arg(long, global = true, default_value_t = 8192)]
    pub mem_budget_mb: u64,

    /// Exit with the resource code instead of warning when the estimate
    /// exceeds the budget.
    #[arg(long, global = true)]
    pub strict_memory: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Embed a graph and write the embedding file (plus `<out>.mapping`).
    Embed(EmbedArgs),
    /// Run the link-prediction experiment and write its report.
    Linkpred(LinkpredArgs),
    /// Generate a planted-partition graph and write edge/attribute files.
    Synth(SynthArgs),
    /// Time embeddings over growing synthetic graphs at constant degree.
    BenchScaling(BenchArgs),
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    /// Edge file (one `u v` pair per line; `#` comments ignored).
    #[arg(long)]
    pub edges: PathBuf,
    /// Attribute file (`node attr...` per line; optional `#universe N` header).
    #[arg(long)]
    pub attrs: PathBuf,
    /// Output embedding file.
    #[arg(long)]
    pub out: PathBuf,
    /// Iterations.
    #[arg(long = "T", default_value_t = 2)]
    pub iterations: usize,
    /// Embedding dimensions.
    #[arg(long = "K", default_value_t = 200)]
    pub dimensions: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also write the embedding after every iteration into this directory.
    #[arg(long)]
    pub checkpoints: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LinkpredArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub attrs: PathBuf,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "T", default_value_t = 2)]
    pub iterations: usize,
    #[arg(long = "K", default_value_t = 200)]
    pub dimensions: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Fraction of edges kept for training.
    #[arg(long, default_value_t = 0.8)]
    pub ratio: f64,
    /// Repeated trials (trial i uses seed + i).
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Sweep T instead of using --T, e.g. `--grid T=1..5`.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Output edge file.
    #[arg(long)]
    pub edges: PathBuf,
    /// Output attribute file.
    #[arg(long)]
    pub attrs: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub nodes: usize,
    #[arg(long, default_value_t = 20.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 2)]
    pub communities: usize,
    #[arg(long, default_value_t = 8)]
    pub attrs_per_node: usize,
    /// Attribute universe size; 0 picks `max(100, nodes/4)`.
    #[arg(long, default_value_t = 0)]
    pub universe: u32,
    /// Probability an attribute draw comes from the node's own community block.
    #[arg(long, default_value_t = 0.9)]
    pub affinity: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Graph sizes to generate, comma separated.
    #[arg(long, value_parser = parse_sizes, default_value = "1000,10000")]
    pub sizes: SizeList,
    /// Iteration counts to time, e.g. `--grid T=1..3`.
    #[arg(long, value_parser = parse_grid, default_value = "T=1..3")]
    pub grid: GridSpec,
    #[arg(long = "K", default_value_t = 200)]
    pub dimensions: usize,
    #[arg(long, default_value_t = 20.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 2)]
    pub communities: usize,
    #[arg(long, default_value_t = 8)]
    pub attrs_per_node: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
}

/// An inclusive sweep over T, parsed from `T=lo..hi` or `T=n`.
#[derive(Debug, Clone)]
pub struct GridSpec(pub Vec<usize>);

/// A comma-separated list of graph sizes.
#[derive(Debug, Clone)]
pub struct SizeList(pub Vec<usize>);

fn parse_grid(spec: &str) -> Result<GridSpec, String> {
    let body = spec
        .strip_prefix("T=")
        .ok_or_else(|| format!("grid spec must look like T=1..5, got {spec:?}"))?;
    let (lo, hi) = match body.split_once("..") {
        Some((lo, hi)) => (lo, hi),
        None => (body, body),
    };
    let lo: usize = lo.parse().map_err(|_| format!("bad grid bound {lo:?}"))?;
    let hi: usize = hi.parse().map_err(|_| format!("bad grid bound {hi:?}"))?;
    if lo == 0 || hi < lo {
        return Err(format!("grid T={lo}..{hi} is empty or starts at zero"));
    }
    Ok(GridSpec((lo..=hi).collect()))
}

fn parse_sizes(spec: &str) -> Result<SizeList, String> {
    let sizes: Result<Vec<usize>, _> = spec.split(',').map(|tok| tok.trim().parse()).collect();
    let sizes = sizes.map_err(|_| format!("bad size list {spec:?}"))?;
    if sizes.is_empty() || sizes.contains(&0) {
        return Err("size list must contain positive integers".into());
    }
    Ok(SizeList(sizes))
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(config_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| config_error(format!("thread pool: {e}")))?;
    }
    let budget = MemoryBudget {
        budget_bytes: cli.mem_budget_mb * 1024 * 1024,
        strict: cli.strict_memory,
    };
    match cli.command {
        Command::Embed(args) => cmd_embed(args, &budget),
        Command::Linkpred(args) => cmd_linkpred(args, &budget),
        Command::Synth(args) => cmd_synth(args),
        Command::BenchScaling(args) => cmd_bench_scaling(args, &budget),
    }
}

struct MemoryBudget {
    budget_bytes: u64,
    strict: bool,
}

impl MemoryBudget {
    /// Warns (or fails under --strict-memory) before a large embedding run.
    fn check(&self, node_count: usize, iterations: usize, dimensions: usize) -> Result<(), CliError> {
        let estimate = memory_footprint(node_count, iterations, dimensions);
        if estimate <= self.budget_bytes {
            return Ok(());
        }
        let msg = format!(
            "embedding estimate {:.1} MiB exceeds the {:.1} MiB budget ({} nodes, K={})",
            estimate as f64 / (1024.0 * 1024.0),
            self.budget_bytes as f64 / (1024.0 * 1024.0),
            node_count,
            dimensions
        );
        if self.strict {
            return Err(CliError::Resource(msg));
        }
        eprintln!("warning: {msg}");
        Ok(())
    }
}

fn validate_positive(value: usize, name: &str) -> Result<(), CliError> {
    if value == 0 {
        return Err(config_error(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn validate_ratio(ratio: f64) -> Result<(), CliError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(config_error(format!(
            "train ratio must lie in (0, 1); got {ratio}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

fn cmd_embed(args: EmbedArgs, budget: &MemoryBudget) -> Result<(), CliError> {
    validate_positive(args.iterations, "--T")?;
    validate_positive(args.dimensions, "--K")?;

    let loaded = load_graph_from_paths(&args.edges, &args.attrs)?;
    let g = &loaded.graph;
    budget.check(g.node_count(), args.iterations, args.dimensions)?;

    println!(
        "config = {{ command = embed, T = {}, K = {}, seed = {}, nodes = {}, edges = {}, universe = {} }}",
        args.iterations,
        args.dimensions,
        args.seed,
        g.node_count(),
        g.edge_count(),
        g.universe_size()
    );

    let table = build_family_table(g.universe_size(), args.iterations, args.dimensions, args.seed)?;
    if let Some(dir) = &args.checkpoints {
        std::fs::create_dir_all(dir)?;
    }

    let total = Instant::now();
    let mut checkpoint_err: Option<CliError> = None;
    let matrix = embed_iterations(g, &table, |snap| {
        println!(
            "iteration {}: {:.3} s",
            snap.iteration,
            snap.elapsed.as_secs_f64()
        );
        if let (Some(dir), None) = (&args.checkpoints, &checkpoint_err) {
            let result = write_checkpoint(dir, &snap, g.node_count(), &table);
            if let Err(e) = result {
                checkpoint_err = Some(e);
            }
        }
    })?;
    if let Some(e) = checkpoint_err {
        return Err(e);
    }
    let embed_seconds = total.elapsed().as_secs_f64();

    let mut out = BufWriter::new(File::create(&args.out)?);
    write_embedding(&matrix, &mut out)?;
    out.flush()?;

    let mapping_path = mapping_path_for(&args.out);
    let mut mapping = BufWriter::new(File::create(&mapping_path)?);
    write_mapping(&loaded.node_labels, &mut mapping)?;
    mapping.flush()?;

    println!(
        "embedded {} nodes in {:.3} s -> {} (mapping: {})",
        g.node_count(),
        embed_seconds,
        args.out.display(),
        mapping_path.display()
    );
    Ok(())
}

fn mapping_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".mapping");
    out.with_file_name(name)
}

fn write_checkpoint(
    dir: &Path,
    snap: &hashgnn::sketch::IterationSnapshot<'_>,
    node_count: usize,
    table: &hashgnn::sketch::HashFamilyTable,
) -> Result<(), CliError> {
    let matrix = EmbeddingMatrix::from_rows(
        snap.entries.to_vec(),
        node_count,
        table.dimensions(),
        snap.iteration,
        table.universe_size(),
        table.seed(),
    )?;
    let path = dir.join(format!("embedding_t{}.txt", snap.iteration));
    let mut out = BufWriter::new(File::create(path)?);
    write_embedding(&matrix, &mut out)?;
    out.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// linkpred
// ---------------------------------------------------------------------------

fn cmd_linkpred(args: LinkpredArgs, budget: &MemoryBudget) -> Result<(), CliError> {
    validate_positive(args.dimensions, "--K")?;
    validate_positive(args.trials, "--trials")?;
    validate_ratio(args.ratio)?;
    let sweep: Vec<usize> = match &args.grid {
        Some(grid) => grid.0.clone(),
        None => {
            validate_positive(args.iterations, "--T")?;
            vec![args.iterations]
        }
    };

    let loaded = load_graph_from_paths(&args.edges, &args.attrs)?;
    let g = &loaded.graph;
    budget.check(
        g.node_count(),
        *sweep.iter().max().unwrap(),
        args.dimensions,
    )?;

    let mut text = Vec::new();
    for (idx, &t) in sweep.iter().enumerate() {
        let report = run_link_prediction(
            g,
            &EvalConfig {
                train_ratio: args.ratio,
                iterations: t,
                dimensions: args.dimensions,
                trials: args.trials,
                seed: args.seed,
            },
        )?;
        if sweep.len() > 1 {
            if idx > 0 {
                writeln!(text)?;
            }
            writeln!(text, "# T = {t}")?;
        }
        report.write_text(&mut text)?;
    }

    match &args.out {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            out.write_all(&text)?;
            out.flush()?;
            println!("wrote report to {}", path.display());
        }
        None => {
            std::io::stdout().write_all(&text)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn auto_universe(nodes: usize) -> u32 {
    (nodes / 4).max(100) as u32
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    let universe = if args.universe == 0 {
        auto_universe(args.nodes)
    } else {
        args.universe
    };
    let cfg = SyntheticConfig {
        node_count: args.nodes,
        avg_degree: args.avg_degree,
        communities: args.communities,
        attrs_per_node: args.attrs_per_node,
        universe_size: universe,
        attr_affinity: args.affinity,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let g = generate_synthetic(&cfg, &mut rng)?;
    save_graph(&g, &args.edges, &args.attrs)?;
    println!(
        "config = {{ command = synth, nodes = {}, avg_degree = {}, communities = {}, attrs_per_node = {}, universe = {}, affinity = {}, seed = {} }}",
        args.nodes, args.avg_degree, args.communities, args.attrs_per_node, universe, args.affinity, args.seed
    );
    println!(
        "generated {} nodes, {} edges (average degree {:.2}) -> {}, {}",
        g.node_count(),
        g.edge_count(),
        g.average_degree(),
        args.edges.display(),
        args.attrs.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench-scaling
// ---------------------------------------------------------------------------

fn cmd_bench_scaling(args: BenchArgs, budget: &MemoryBudget) -> Result<(), CliError> {
    validate_positive(args.dimensions, "--K")?;
    let t_values = &args.grid.0;
    let max_t = *t_values.iter().max().unwrap();

    println!(
        "config = {{ command = bench-scaling, sizes = {:?}, T = {:?}, K = {}, avg_degree = {}, communities = {}, attrs_per_node = {}, seed = {} }}",
        args.sizes.0, t_values, args.dimensions, args.avg_degree, args.communities, args.attrs_per_node, args.seed
    );

    let mut header = format!("{:>10}", "nodes");
    for t in t_values {
        header.push_str(&format!(" {:>12}", format!("T={t} (s)")));
    }
    println!("{header}");

    for &size in &args.sizes.0 {
        budget.check(size, max_t, args.dimensions)?;
        let cfg = SyntheticConfig {
            node_count: size,
            avg_degree: args.avg_degree,
            communities: args.communities.min(size),
            attrs_per_node: args.attrs_per_node,
            universe_size: auto_universe(size),
            attr_affinity: 0.9,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let g = generate_synthetic(&cfg, &mut rng)?;

        let mut row = format!("{size:>10}");
        for &t in t_values {
            let table =
                build_family_table(g.universe_size(), t, args.dimensions, args.seed)?;
            let start = Instant::now();
            let _ = hashgnn::sketch::embed_with_table(&g, &table)?;
            row.push_str(&format!(" {:>12.3}", start.elapsed().as_secs_f64()));
        }
        println!("{row}");
    }
    Ok(())
}
