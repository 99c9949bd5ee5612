use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rowblock::blocking::Similarity;
use rowblock::experiment::{
    run_bench, run_sweep, write_csv, write_sweep, BenchConfig, ExperimentManifest, OUTPUT_DIR_ENV,
};
use rowblock::generators::{
    gen_blocked, gen_rmat, scramble, BlockedMatrixSpec, RmatSpec, RMAT_DEFAULT_PROBABILITIES,
};
use rowblock::matrix::{
    read_matrix_market, write_matrix_market, ColumnPartition, RowGrouping, VbrMatrix,
};
use rowblock::metrics::{
    blocking_stats, verify_density_bound, Algorithm, BlockingStats, SweepConfig,
};
use rowblock::multiply::TcuModel;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "rowblock",
    version,
    about = "Reorder and block sparse matrices by row similarity"
)]
struct Cli {
    /// Default directory for outputs that are not given an explicit path.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic matrix in MatrixMarket format.
    #[command(subcommand)]
    Generate(GenerateCommand),
    /// Group the rows of a matrix and report blocking statistics.
    Block(BlockArgs),
    /// Run every blocking listed in a JSON manifest.
    Sweep(SweepArgs),
    /// Time the VBR kernel against the CSR baseline.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Block-structured matrix with Δ x Δ tiles.
    Blocked(BlockedArgs),
    /// Recursive-matrix graph adjacency.
    Rmat(RmatArgs),
}

#[derive(Args)]
struct BlockedArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    delta: usize,
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    rho: f64,
    #[arg(long)]
    seed: u64,
    /// Shuffle the rows with this seed after generation.
    #[arg(long)]
    scramble: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RmatArgs {
    #[arg(long)]
    log2_nodes: u32,
    #[arg(long)]
    avg_degree: usize,
    /// Quadrant probabilities a,b,c,d.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    probabilities: Option<Vec<f64>>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    scramble: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    /// Jaccard with the size cap (density guaranteed).
    Bounded,
    /// Jaccard without the size cap.
    Plain,
    /// Seed-only comparisons on raw columns.
    Naive,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityArg {
    Jaccard,
    Cosine,
}

impl From<SimilarityArg> for Similarity {
    fn from(s: SimilarityArg) -> Self {
        match s {
            SimilarityArg::Jaccard => Similarity::Jaccard,
            SimilarityArg::Cosine => Similarity::Cosine,
        }
    }
}

#[derive(Args)]
struct PolicyArgs {
    /// Similarity threshold in [0, 1].
    #[arg(long, value_parser = parse_tau)]
    tau: f64,
    #[arg(long, value_enum, default_value = "bounded")]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value = "jaccard")]
    similarity: SimilarityArg,
    /// Collapse identical quotient rows before grouping.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    compress: bool,
}

impl PolicyArgs {
    fn sweep_config(&self) -> SweepConfig {
        let similarity = self.similarity.into();
        match self.policy {
            PolicyArg::Naive => SweepConfig::naive(similarity),
            p => SweepConfig {
                algorithm: Algorithm::OneSided,
                similarity,
                bounded: p == PolicyArg::Bounded,
                pattern_update: true,
                use_compression: self.compress,
            },
        }
    }
}

#[derive(Args)]
struct BlockArgs {
    input: PathBuf,
    /// Column partition width ΔW.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    dw: u64,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Where to write the grouping JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the VBR descriptor JSON.
    #[arg(long)]
    vbr_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    manifest: PathBuf,
    /// Worker threads (0 uses every core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output directory, overriding the manifest.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    input: PathBuf,
    /// Column partition widths.
    #[arg(long, value_delimiter = ',', required = true)]
    dw: Vec<usize>,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Dense operand widths.
    #[arg(
        short = 'N',
        long = "dense-widths",
        value_delimiter = ',',
        required = true
    )]
    n: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    runs: u64,
    /// Seed for the dense operand.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256.0)]
    tcu_m: f64,
    #[arg(long, default_value_t = 16.0)]
    tcu_ell: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&t) {
        Ok(t)
    } else {
        Err(format!("tau must lie in [0, 1], got {t}"))
    }
}

#[derive(Serialize)]
struct BlockReport<'a> {
    input: &'a Path,
    n_rows: usize,
    n_cols: usize,
    delta_w: usize,
    tau: f64,
    config: SweepConfig,
    stats: &'a BlockingStats,
    #[serde(flatten)]
    grouping: &'a RowGrouping,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Generate(GenerateCommand::Blocked(args)) => {
            let spec = BlockedMatrixSpec {
                n_rows: args.rows,
                n_cols: args.cols,
                delta: args.delta,
                theta: args.theta,
                rho: args.rho,
                seed: args.seed,
            };
            let a = gen_blocked(&spec)?;
            emit_matrix(a, args.scramble, args.output, &out_dir, "blocked.mtx")
        }
        Command::Generate(GenerateCommand::Rmat(args)) => {
            let probabilities = match args.probabilities {
                Some(p) => [p[0], p[1], p[2], p[3]],
                None => RMAT_DEFAULT_PROBABILITIES,
            };
            let spec = RmatSpec {
                log2_nodes: args.log2_nodes,
                avg_degree: args.avg_degree,
                probabilities,
                seed: args.seed,
            };
            let a = gen_rmat(&spec)?;
            emit_matrix(a, args.scramble, args.output, &out_dir, "rmat.mtx")
        }
        Command::Block(args) => cmd_block(args, &out_dir),
        Command::Sweep(args) => {
            let manifest = ExperimentManifest::load(&args.manifest)
                .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
            let dir = match args.output {
                Some(dir) => dir,
                None if manifest.output_dir.is_some() => manifest.resolve_output_dir(None),
                None => out_dir,
            };
            let output = run_sweep(&manifest, args.jobs)?;
            let (csv, json) = write_sweep(&output, &dir)?;
            println!(
                "rows={} curves={} csv={} summary={}",
                output.records.len(),
                output.summary.curves.len(),
                csv.display(),
                json.display()
            );
            Ok(())
        }
        Command::Bench(args) => cmd_bench(args, &out_dir),
    }
}

fn emit_matrix(
    a: rowblock::matrix::CsrMatrix,
    scramble_seed: Option<u64>,
    output: Option<PathBuf>,
    out_dir: &Path,
    default_name: &str,
) -> Result<()> {
    let a = match scramble_seed {
        Some(seed) => scramble(&a, seed).0,
        None => a,
    };
    let path = resolve(output, out_dir, default_name)?;
    write_matrix_market(&path, &a).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "nnz={} density={} rows={} cols={} path={}",
        a.nnz(),
        a.density(),
        a.n_rows(),
        a.n_cols(),
        path.display()
    );
    Ok(())
}

fn resolve(explicit: Option<PathBuf>, out_dir: &Path, default_name: &str) -> Result<PathBuf> {
    let path = explicit.unwrap_or_else(|| out_dir.join(default_name));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(path)
}

fn cmd_block(args: BlockArgs, out_dir: &Path) -> Result<()> {
    let a = read_matrix_market(&args.input)?;
    let delta_w = args.dw as usize;
    let tau = args.policy.tau;
    let config = args.policy.sweep_config();
    let partition = ColumnPartition::uniform(a.n_cols(), delta_w)?;
    let grouping = config.run(&a, &partition, tau)?;
    let mut stats = blocking_stats(&a, &grouping, &partition)?;
    stats.tau = Some(tau);
    let report = verify_density_bound(&a, &grouping, &partition, tau)?;
    stats.density_bound_ok = Some(report.all_ok());

    let path = resolve(args.output, out_dir, "grouping.json")?;
    let json = serde_json::to_string_pretty(&BlockReport {
        input: &args.input,
        n_rows: a.n_rows(),
        n_cols: a.n_cols(),
        delta_w,
        tau,
        config,
        stats: &stats,
        grouping: &grouping,
    })?;
    fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;

    if let Some(vbr_path) = args.vbr_out {
        let vbr = VbrMatrix::from_grouping(&a, &grouping, &partition)?;
        let vbr_path = resolve(Some(vbr_path), out_dir, "")?;
        fs::write(
            &vbr_path,
            serde_json::to_string(&vbr.to_descriptor())? + "\n",
        )
        .with_context(|| format!("writing {}", vbr_path.display()))?;
    }

    println!(
        "groups={} rho_prime={} delta_h_prime={} stored_blocks={} fill_in={} density_bound_ok={} grouping={}",
        stats.n_groups,
        stats.rho_prime,
        stats.delta_h_prime,
        stats.n_stored_blocks,
        stats.fill_in,
        report.all_ok(),
        path.display()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs, out_dir: &Path) -> Result<()> {
    let a = read_matrix_market(&args.input)?;
    let config = BenchConfig {
        partition_widths: args.dw,
        tau: args.policy.tau,
        sweep: args.policy.sweep_config(),
        dense_widths: args.n,
        threads: args.threads,
        runs: args.runs as usize,
        seed: args.seed,
        tcu: TcuModel::new(args.tcu_m, args.tcu_ell)?,
    };
    let id = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let records = run_bench(&a, &id, &config)?;
    let path = resolve(args.output, out_dir, "bench.csv")?;
    write_csv(&path, &records)?;
    println!("rows={} csv={}", records.len(), path.display());
    Ok(())
}
