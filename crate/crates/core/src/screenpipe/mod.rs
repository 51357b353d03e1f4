//! End-to-end screening: library in, ranked hit list out.
//!
//! Output directory layout:
//!
//! ```text
//! <out>/<ligand_id>/out.pdbqt
//! <out>/<ligand_id>/job.log
//! <out>/ranking.csv
//! <out>/failures.csv
//! <out>/trace.jsonl        (when enabled)
//! <out>/.screen.lock       (while a run is active)
//! ```

mod config;
mod library;
mod ranking;

pub use config::{parse_vina_config, EngineChoice, LigandSource, ScreeningConfig, SimDuration, Timing, VinaConfig};
pub use library::ingest_library;
pub use ranking::{rank_outcomes, write_failures, write_ranking, FailureEntry, RankingEntry};

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::dockkern::KernelError;
use crate::executor::{output_path, ExecError, ExecutorBackend, ExternalEngine, JobRunner, MockEngine};
use crate::pdbqt::{parse_output, parse_receptor, PdbqtError};
use crate::scheduler::{
    detect_cores, trace_to_jsonl, Clock, CoreBudget, JobOutcome, JobSpec, SchedError, Scheduler, TraceRecord,
};

pub const LOCK_FILE: &str = ".screen.lock";
pub const RANKING_FILE: &str = "ranking.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const TRACE_FILE: &str = "trace.jsonl";

#[derive(Debug, Error)]
pub enum ScreenError {
    #[error("ligand library is empty")]
    EmptyLibrary,
    #[error("ligand id {id:?} is used by both {} and {}", first.display(), second.display())]
    DuplicateLigandId { id: String, first: PathBuf, second: PathBuf },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("config line {line}: {reason}")]
    ConfigSyntax { line: usize, reason: String },
    #[error("{} exists; another screen may be running in this directory (remove it if not)", .0.display())]
    Locked(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("receptor: {0}")]
    Receptor(#[from] PdbqtError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

impl ScreenError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ScreenError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Holds `.screen.lock` for the lifetime of a run.
struct LockGuard(PathBuf);

impl LockGuard {
    fn acquire(out_dir: &Path) -> Result<Self, ScreenError> {
        let path = out_dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(LockGuard(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(ScreenError::Locked(path)),
            Err(e) => Err(ScreenError::io(&path, e)),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub struct ScreenReport {
    /// One per library ligand, in ingestion order.
    pub outcomes: Vec<JobOutcome>,
    pub ranking: Vec<RankingEntry>,
    pub failures: Vec<FailureEntry>,
    pub trace: Vec<TraceRecord>,
    /// Scheduler makespan; 0 when every ligand was resumed.
    pub elapsed: f64,
}

impl ScreenReport {
    pub fn resumed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.resumed).count()
    }
}

fn backend(config: &ScreeningConfig) -> Result<ExecutorBackend, ScreenError> {
    let text = fs::read_to_string(&config.receptor_path).map_err(|e| ScreenError::io(&config.receptor_path, e))?;
    let id = config
        .receptor_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "receptor".into());
    let receptor = parse_receptor(&id, &text)?;
    Ok(match &config.engine {
        EngineChoice::Mock => ExecutorBackend::InProcess(MockEngine {
            receptor: Arc::new(receptor),
            grid: config.grid,
            kernel: config.kernel.clone(),
        }),
        EngineChoice::External { template, timeout } => {
            let mut engine = ExternalEngine::new(template, config.receptor_path.clone())?;
            engine.config_path = config.config_path.clone();
            engine.seed = config.kernel.seed;
            engine.timeout = *timeout;
            ExecutorBackend::External(engine)
        }
    })
}

fn clock(timing: Timing) -> Clock {
    match timing {
        Timing::Monotonic => Clock::Monotonic,
        Timing::Virtual(SimDuration::Fixed(s)) => Clock::virtual_fixed(s),
        Timing::Virtual(SimDuration::ModeledCost { seconds_per_unit }) => {
            Clock::Virtual(Arc::new(move |_: &JobSpec, o: &JobOutcome| {
                o.modeled_cost.map_or(o.wall_time, |c| c * seconds_per_unit)
            }))
        }
    }
}

/// A previous run's output for `id`, if it exists and parses.
fn resumable(out_dir: &Path, id: &str) -> Option<JobOutcome> {
    let path = output_path(out_dir, id);
    let text = fs::read_to_string(&path).ok()?;
    let parsed = parse_output(id, &text).ok()?;
    if parsed.modes.is_empty() {
        return None;
    }
    Some(JobOutcome {
        out_path: Some(path),
        resumed: true,
        ..JobOutcome::ok(id, parsed)
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), ScreenError> {
    fs::write(path, text).map_err(|e| ScreenError::io(path, e))
}

/// Docks the whole library and writes the ranking, failure report and
/// (optionally) the scheduler trace into `config.out_dir`.
pub fn screen(config: &ScreeningConfig) -> Result<ScreenReport, ScreenError> {
    config.validate()?;
    let library = ingest_library(&config.ligand_source)?;
    let backend = backend(config)?;
    let budget = CoreBudget {
        total_cores: detect_cores(config.total_cores)?,
        jobs: config.jobs,
        cores_per_job: config.cores_per_job,
        oversubscribe: config.oversubscribe,
    };
    budget.validate()?;

    fs::create_dir_all(&config.out_dir).map_err(|e| ScreenError::io(&config.out_dir, e))?;
    let _lock = LockGuard::acquire(&config.out_dir)?;

    let mut outcomes: Vec<Option<JobOutcome>> = vec![None; library.len()];
    let mut queue = Vec::new();
    let mut queued_at = Vec::new();
    for (i, (id, path)) in library.iter().enumerate() {
        if config.resume {
            if let Some(o) = resumable(&config.out_dir, id) {
                outcomes[i] = Some(o);
                continue;
            }
        }
        queue.push(JobSpec {
            job_id: id.clone(),
            ligand_path: path.clone(),
            cores: config.cores_per_job,
        });
        queued_at.push(i);
    }
    log::info!(
        "{} ligands: {} queued, {} resumed; {} jobs x {} cores",
        library.len(),
        queue.len(),
        library.len() - queue.len(),
        config.jobs,
        config.cores_per_job
    );

    let runner = JobRunner {
        backend,
        out_dir: config.out_dir.clone(),
    };
    let scheduler = Scheduler::new(config.policy, budget)
        .with_retries(config.retries)
        .with_clock(clock(config.timing));
    let report = scheduler.run(&queue, &runner)?;
    for (outcome, i) in report.outcomes.into_iter().zip(queued_at) {
        outcomes[i] = Some(outcome);
    }
    let outcomes: Vec<JobOutcome> = outcomes
        .into_iter()
        .map(|o| o.expect("every ligand is resumed or scheduled"))
        .collect();

    let (ranking, failures) = rank_outcomes(&outcomes);
    write_file(&config.out_dir.join(RANKING_FILE), &write_ranking(&ranking, config.top_k))?;
    write_file(&config.out_dir.join(FAILURES_FILE), &write_failures(&failures))?;
    if config.write_trace {
        write_file(&config.out_dir.join(TRACE_FILE), &trace_to_jsonl(&report.trace))?;
    }
    for f in &failures {
        log::warn!("{}: {}", f.ligand_id, f.diagnostic);
    }
    Ok(ScreenReport {
        outcomes,
        ranking,
        failures,
        trace: report.trace,
        elapsed: report.elapsed,
    })
}
