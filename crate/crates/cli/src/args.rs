use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "dockthrottle",
    version,
    about = "Run docking over a ligand library as many parallel jobs",
    long_about = "Run docking over a ligand library as many parallel jobs.\n\n\
                  The number of cores the scheduler may use is detected from the machine; \
                  set DOCKTHROTTLE_TOTAL_CORES or --total-cores to override it."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dock every ligand in a library and write a ranked hit list
    Screen(ScreenArgs),
    /// Time a matrix of (jobs, cpus) shapes over repeated screening runs
    Bench(BenchArgs),
    /// Rebuild ranking.csv from the outputs already in an output directory
    Rank(RankArgs),
    /// Parse a PDBQT file and print a JSON summary
    Parse(ParseArgs),
    /// Recompute the benchmark report from a samples.csv file
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    Polling,
    Eventdriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    /// Built-in Monte Carlo docking kernel
    Mock,
    /// External program given by --command
    External,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    /// Receptor PDBQT (may also come from the config file's `receptor` key)
    #[arg(long, value_name = "FILE")]
    pub receptor: Option<PathBuf>,

    /// Directory searched recursively for *.pdbqt ligands
    #[arg(long, value_name = "DIR", conflicts_with = "ligand_list", required_unless_present = "ligand_list")]
    pub ligand_dir: Option<PathBuf>,

    /// File listing one ligand path per line
    #[arg(long, value_name = "FILE")]
    pub ligand_list: Option<PathBuf>,

    /// Vina-style `key = value` file with the grid box and search settings
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Concurrent docking jobs [default: detected cores]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Cores given to each docking job [default: config `cpu`, else 1]
    #[arg(long, value_name = "N")]
    pub cpus_per_job: Option<usize>,

    /// How freed slots are refilled
    #[arg(long, value_enum, default_value = "eventdriven")]
    pub scheduler: SchedulerArg,

    /// Seconds between slot checks with --scheduler polling
    #[arg(long, value_name = "SECONDS", default_value_t = 0.33)]
    pub poll_interval: f64,

    /// Random seed [default: config `seed`, else 0]
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,

    /// Output directory [default: config `out`, else ./out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Rows kept in ranking.csv
    #[arg(long, value_name = "N", default_value_t = 50)]
    pub top_k: usize,

    /// Docking backend
    #[arg(long, value_enum, default_value = "mock")]
    pub engine: EngineArg,

    /// Command template for --engine external, e.g.
    /// "vina --receptor {receptor} --ligand {ligand} --out {out} --cpu {cpu} --seed {seed}"
    #[arg(long, value_name = "TEMPLATE")]
    pub command: Option<String>,

    /// Allow jobs x cpus-per-job to exceed the available cores
    #[arg(long)]
    pub oversubscribe: bool,

    /// Skip ligands whose out.pdbqt already parses (the default)
    #[arg(long, overrides_with = "no_resume")]
    pub resume: bool,

    /// Dock every ligand again even if output exists
    #[arg(long)]
    pub no_resume: bool,

    /// Exit with status 2 when any ligand fails
    #[arg(long)]
    pub strict: bool,

    /// Cores available to the scheduler (overrides DOCKTHROTTLE_TOTAL_CORES)
    #[arg(long, value_name = "N")]
    pub total_cores: Option<usize>,

    /// Write the scheduler's start/finish events to trace.jsonl
    #[arg(long)]
    pub trace: bool,

    /// Extra attempts for a failed ligand
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub retries: u32,

    /// Kill an external docking command after this many seconds
    #[arg(long, value_name = "SECONDS")]
    pub timeout: Option<f64>,

    /// Independent search runs per ligand [default: config, else 8]
    #[arg(long, value_name = "N")]
    pub exhaustiveness: Option<usize>,

    /// Poses visited per search run by the mock kernel
    #[arg(long, value_name = "N")]
    pub mc_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub screen: ScreenArgs,

    /// Matrix file: one `<jobs> <cpus>` or `ilp <cpus>` row per line
    #[arg(long, value_name = "FILE")]
    pub matrix: PathBuf,

    /// Timed runs per matrix row
    #[arg(long, value_name = "N", default_value_t = 5)]
    pub iterations: usize,

    /// Label of the single-core baseline row
    #[arg(long, value_name = "LABEL", default_value = "N/A|1")]
    pub baseline: String,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Output directory of a previous screen
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,

    /// Rows kept in ranking.csv
    #[arg(long, value_name = "N", default_value_t = 50)]
    pub top_k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PdbqtKind {
    Ligand,
    Receptor,
    Output,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// PDBQT file to parse
    pub file: PathBuf,

    /// What the file holds [default: guessed from its records]
    #[arg(long, value_enum)]
    pub kind: Option<PdbqtKind>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// samples.csv written by `bench`
    #[arg(long, value_name = "FILE")]
    pub samples: PathBuf,

    /// Label of the single-core baseline row
    #[arg(long, value_name = "LABEL", default_value = "N/A|1")]
    pub baseline: String,

    /// Directory for summary.csv, plot.csv and report.txt [default: next to the samples]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}
