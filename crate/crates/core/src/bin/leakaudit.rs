use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use leakaudit::config::FileConfig;
use leakaudit::etl::{build_dataset, extract_cohort, load_tables};
use leakaudit::experiment::{run_setups, Setup};
use leakaudit::report::{render_report, write_report_file, ReportFile, JSON_FILE};
use leakaudit::synth::{generate_cohort, SynthConfig};
use leakaudit::tabular::{read_dataset, write_dataset};
use leakaudit::Result;

const DATASET_FILE: &str = "dataset.csv";

#[derive(Parser)]
#[command(
    name = "leakaudit",
    version,
    about = "Oversampling and imputation leakage audit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort.
    Synth(SynthArgs),
    /// Extract a labeled cohort from MIMIC-III-shaped CSV tables.
    Etl(EtlArgs),
    /// Run one or all setups and write report.json and report.md.
    Run(RunArgs),
    /// Re-render report.md from a report.json.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 112)]
    n_total: usize,
    #[arg(long, default_value_t = 10)]
    n_minority: usize,
    #[arg(long, default_value_t = 8)]
    binary_features: usize,
    #[arg(long, default_value_t = 12)]
    numeric_features: usize,
    #[arg(long, default_value_t = 6)]
    informative: usize,
    #[arg(long, default_value_t = 1.0)]
    signal: f64,
    #[arg(long, default_value_t = 0.1)]
    missing_rate: f64,
}

#[derive(Args)]
struct EtlArgs {
    #[arg(long)]
    data_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Schema map and feature key lists.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset CSV; a default synthetic cohort is used when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    /// i, ii, iii, holdout or all
    #[arg(long, default_value = "all")]
    setup: String,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repeats: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    /// Report population instead of sample standard deviation.
    #[arg(long)]
    population_std: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding report.json; report.md is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Alternative report.json location.
    #[arg(long)]
    from: Option<PathBuf>,
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        n_total: args.n_total,
        n_minority: args.n_minority,
        n_binary_features: args.binary_features,
        n_numeric_features: args.numeric_features,
        signal_strength: args.signal,
        n_informative: args.informative,
        missing_rate: args.missing_rate,
        seed: args.seed,
    };
    let ds = generate_cohort(&cfg)?;
    let path = args.out.join(DATASET_FILE);
    write_dataset(&ds, &path)?;
    println!("wrote {} ({} rows)", path.display(), ds.n_rows());
    Ok(())
}

fn etl(args: EtlArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let tables = load_tables(&args.data_dir, &cfg.schema)?;
    let cohort = extract_cohort(&tables, &cfg.cohort)?;
    let ds = build_dataset(&cohort, &tables, &cfg.cohort)?;
    let path = args.out.join(DATASET_FILE);
    write_dataset(&ds, &path)?;
    let [short, long] = ds.class_counts(&ds.all_rows());
    println!(
        "wrote {}: {} patients, {} long stays, {} short stays",
        path.display(),
        ds.n_rows(),
        long,
        short
    );
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let file = load_config(args.config.as_deref())?;
    let mut cfg = file.run;
    if let Some(v) = args.folds {
        cfg.folds = v;
    }
    if let Some(v) = args.seed {
        cfg.master_seed = v;
    }
    if let Some(v) = args.repeats {
        cfg.repeats = v;
    }
    if let Some(v) = args.beta {
        cfg.adasyn.beta = v;
    }
    if let Some(v) = args.k_neighbors {
        cfg.adasyn.k_neighbors = v;
    }
    if let Some(v) = args.trees {
        cfg.forest.n_trees = v;
    }
    if args.population_std {
        cfg.std_kind = leakaudit::evaluation::StdKind::Population;
    }
    let setups: Vec<Setup> = if args.setup == "all" {
        Setup::ALL.to_vec()
    } else {
        args.setup
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_>>()?
    };
    let ds = match &args.data {
        Some(p) => read_dataset(p)?,
        None => generate_cohort(&SynthConfig::default())?,
    };
    let reports = run_setups(&ds, &cfg, &setups)?;
    let (json, table) = render_report(&reports, &args.out)?;
    for r in &reports {
        println!(
            "{:<22} AUROC {:6.2} ± {:5.2} %  ({} folds, {} skipped, {} flagged)",
            r.setup.name(),
            100.0 * r.mean_auroc,
            100.0 * r.std_auroc,
            r.folds.len(),
            r.skipped.len(),
            r.flagged_folds()
        );
    }
    println!("wrote {} and {}", json.display(), table.display());
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let from = args.from.unwrap_or_else(|| args.out.join(JSON_FILE));
    let file = ReportFile::load(&from)?;
    let (_, table) = write_report_file(&file, &args.out)?;
    print!("{}", file.to_markdown());
    eprintln!("wrote {}", table.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Etl(a) => etl(a),
        Command::Run(a) => run(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
