//! Fixed-slot job scheduler.
//!
//! Keeps at most `J` jobs of `C` cores each running over an ordered queue.
//! Two refill policies exist: [`PolicyKind::EventDriven`] starts the next job
//! as soon as a slot frees up, [`PolicyKind::Polling`] only looks for free
//! slots on a fixed tick, like a shell loop that sleeps between checks.
//!
//! Time comes from a [`Clock`]: the monotonic system clock with real worker
//! threads, or a virtual clock where each job is charged a computed duration.

mod runtime;
mod trace;

pub use trace::{check_trace, trace_to_jsonl, TraceEvent, TraceRecord};

use std::collections::{HashSet, VecDeque};
use std::env;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pdbqt::MultiModelOutput;
use runtime::{RealRuntime, Runtime, VirtualRuntime};

/// Environment variable that overrides core detection.
pub const TOTAL_CORES_ENV: &str = "DOCKTHROTTLE_TOTAL_CORES";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchedError {
    #[error("{jobs} jobs x {cores_per_job} cores = {} exceeds {total_cores} available cores (pass --oversubscribe to allow)", jobs * cores_per_job)]
    BudgetExceeded {
        jobs: usize,
        cores_per_job: usize,
        total_cores: usize,
    },
    #[error("invalid core budget: {0}")]
    InvalidBudget(String),
    #[error("invalid scheduler policy: {0}")]
    InvalidPolicy(String),
    #[error("job id {0:?} appears more than once in the queue")]
    DuplicateJobId(String),
    #[error("job {job_id:?} asks for {cores} cores but slots have {cores_per_job}")]
    JobTooWide {
        job_id: String,
        cores: usize,
        cores_per_job: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Polling,
    EventDriven,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerPolicy {
    pub kind: PolicyKind,
    /// Seconds between slot checks; only used by `Polling`.
    pub poll_interval: f64,
}

impl SchedulerPolicy {
    pub const DEFAULT_POLL_INTERVAL: f64 = 0.33;

    pub fn event_driven() -> Self {
        SchedulerPolicy {
            kind: PolicyKind::EventDriven,
            poll_interval: Self::DEFAULT_POLL_INTERVAL,
        }
    }

    pub fn polling(poll_interval: f64) -> Result<Self, SchedError> {
        let p = SchedulerPolicy {
            kind: PolicyKind::Polling,
            poll_interval,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SchedError> {
        if self.kind == PolicyKind::Polling && !(self.poll_interval > 0.0 && self.poll_interval.is_finite()) {
            return Err(SchedError::InvalidPolicy(format!(
                "poll interval must be positive, got {}",
                self.poll_interval
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreBudget {
    pub total_cores: usize,
    pub jobs: usize,
    pub cores_per_job: usize,
    pub oversubscribe: bool,
}

impl CoreBudget {
    pub fn validate(&self) -> Result<(), SchedError> {
        if self.jobs < 1 || self.cores_per_job < 1 || self.total_cores < 1 {
            return Err(SchedError::InvalidBudget(format!(
                "jobs, cores per job and total cores must all be >= 1: {self:?}"
            )));
        }
        if !self.oversubscribe && self.jobs * self.cores_per_job > self.total_cores {
            return Err(SchedError::BudgetExceeded {
                jobs: self.jobs,
                cores_per_job: self.cores_per_job,
                total_cores: self.total_cores,
            });
        }
        Ok(())
    }
}

/// Logical core count: explicit override, then the environment variable,
/// then the platform. Falls back to 1 when the platform cannot tell.
pub fn detect_cores(override_cores: Option<usize>) -> Result<usize, SchedError> {
    let checked = |n: usize, from: &str| {
        if n == 0 {
            Err(SchedError::InvalidBudget(format!("{from} core count must be >= 1")))
        } else {
            Ok(n)
        }
    };
    if let Some(n) = override_cores {
        return checked(n, "overridden");
    }
    if let Ok(v) = env::var(TOTAL_CORES_ENV) {
        let n = v.trim().parse::<usize>().map_err(|_| {
            SchedError::InvalidBudget(format!("{TOTAL_CORES_ENV}={v:?} is not a core count"))
        })?;
        return checked(n, TOTAL_CORES_ENV);
    }
    match std::thread::available_parallelism() {
        Ok(n) => Ok(n.get()),
        Err(e) => {
            log::warn!("cannot detect core count ({e}); assuming 1");
            Ok(1)
        }
    }
}

/// One unit of data-level parallelism: a single ligand docked on `cores` cores.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub job_id: String,
    pub ligand_path: PathBuf,
    pub cores: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum JobStatus {
    Ok,
    Failed(String),
    Timeout,
}

impl JobStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, JobStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub job_id: String,
    pub status: JobStatus,
    /// Seconds between start and finish on the scheduler's clock.
    pub wall_time: f64,
    pub started_at: f64,
    pub finished_at: f64,
    pub result: Option<Arc<MultiModelOutput>>,
    pub out_path: Option<PathBuf>,
    /// Mock-kernel cost estimate, when the backend provides one.
    pub modeled_cost: Option<f64>,
    /// Skipped because a valid output already existed.
    pub resumed: bool,
    pub attempts: u32,
}

impl JobOutcome {
    pub fn ok(job_id: &str, result: MultiModelOutput) -> Self {
        JobOutcome {
            result: Some(Arc::new(result)),
            ..Self::with_status(job_id, JobStatus::Ok)
        }
    }

    pub fn failed(job_id: &str, diagnostic: impl Into<String>) -> Self {
        Self::with_status(job_id, JobStatus::Failed(diagnostic.into()))
    }

    pub fn with_status(job_id: &str, status: JobStatus) -> Self {
        JobOutcome {
            job_id: job_id.to_string(),
            status,
            wall_time: 0.0,
            started_at: 0.0,
            finished_at: 0.0,
            result: None,
            out_path: None,
            modeled_cost: None,
            resumed: false,
            attempts: 0,
        }
    }

    pub fn best_energy(&self) -> Option<f64> {
        self.result.as_ref().and_then(|r| r.best_energy())
    }
}

/// Runs one job to completion. Called concurrently from scheduler workers.
pub trait Executor: Sync {
    fn execute(&self, job: &JobSpec) -> JobOutcome;
}

impl<F> Executor for F
where
    F: Fn(&JobSpec) -> JobOutcome + Sync,
{
    fn execute(&self, job: &JobSpec) -> JobOutcome {
        self(job)
    }
}

/// Seconds a finished job is charged on the virtual clock.
pub type DurationFn = dyn Fn(&JobSpec, &JobOutcome) -> f64 + Send + Sync;

pub enum Clock {
    /// Real worker threads timed on the monotonic system clock.
    Monotonic,
    /// Jobs execute inline; time advances by the computed durations only.
    Virtual(Arc<DurationFn>),
}

impl Clock {
    pub fn virtual_fixed(seconds: f64) -> Self {
        Clock::Virtual(Arc::new(move |_: &JobSpec, _: &JobOutcome| seconds))
    }
}

pub struct RunReport {
    /// In submission order.
    pub outcomes: Vec<JobOutcome>,
    pub trace: Vec<TraceRecord>,
    /// Makespan in seconds on the run's clock.
    pub elapsed: f64,
}

/// The Start/Finish event log of a run.
pub fn schedule_trace(report: &RunReport) -> &[TraceRecord] {
    &report.trace
}

pub struct Scheduler {
    pub policy: SchedulerPolicy,
    pub budget: CoreBudget,
    /// Extra attempts for a failed job; 0 means record the failure and move on.
    pub retries: u32,
    pub clock: Clock,
}

impl Scheduler {
    pub fn new(policy: SchedulerPolicy, budget: CoreBudget) -> Self {
        Scheduler {
            policy,
            budget,
            retries: 0,
            clock: Clock::Monotonic,
        }
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    /// Executes every job exactly once (plus retries) and returns outcomes in
    /// submission order. Executor failures are recorded per job.
    pub fn run(&self, queue: &[JobSpec], executor: &dyn Executor) -> Result<RunReport, SchedError> {
        self.policy.validate()?;
        self.budget.validate()?;
        let mut seen = HashSet::new();
        for job in queue {
            if !seen.insert(job.job_id.as_str()) {
                return Err(SchedError::DuplicateJobId(job.job_id.clone()));
            }
            if job.cores > self.budget.cores_per_job || job.cores == 0 {
                return Err(SchedError::JobTooWide {
                    job_id: job.job_id.clone(),
                    cores: job.cores,
                    cores_per_job: self.budget.cores_per_job,
                });
            }
        }
        match &self.clock {
            Clock::Monotonic => std::thread::scope(|scope| {
                let mut rt = RealRuntime::start(scope, self.budget.jobs, queue, executor);
                Ok(self.orchestrate(&mut rt, queue))
            }),
            Clock::Virtual(duration) => {
                let mut rt = VirtualRuntime::new(queue, executor, duration.as_ref());
                Ok(self.orchestrate(&mut rt, queue))
            }
        }
    }

    fn orchestrate<R: Runtime>(&self, rt: &mut R, queue: &[JobSpec]) -> RunReport {
        let n = queue.len();
        let slot_count = self.budget.jobs;
        let interval = self.policy.poll_interval;
        let polling = self.policy.kind == PolicyKind::Polling;

        let mut pending: VecDeque<usize> = (0..n).collect();
        let mut attempts = vec![0u32; n];
        let mut outcomes: Vec<Option<JobOutcome>> = vec![None; n];
        let mut slots: Vec<Option<(usize, f64)>> = vec![None; slot_count];
        let mut running = 0usize;
        let mut trace = Vec::new();
        let mut next_tick = 0u64;

        loop {
            let now = rt.now();
            let may_fill = if polling {
                if now >= next_tick as f64 * interval {
                    next_tick = (now / interval).floor() as u64 + 1;
                    while next_tick as f64 * interval <= now {
                        next_tick += 1;
                    }
                    true
                } else {
                    false
                }
            } else {
                true
            };
            if may_fill {
                while running < slot_count {
                    let Some(index) = pending.pop_front() else { break };
                    let slot = slots.iter().position(Option::is_none).expect("free slot");
                    slots[slot] = Some((index, now));
                    attempts[index] += 1;
                    running += 1;
                    trace.push(TraceRecord {
                        time: now,
                        slot,
                        event: TraceEvent::Start,
                        job_id: queue[index].job_id.clone(),
                    });
                    rt.dispatch(slot, index);
                }
            }
            if running == 0 && pending.is_empty() {
                break;
            }
            let deadline = (polling && !pending.is_empty()).then(|| next_tick as f64 * interval);
            let Some(done) = rt.wait(deadline) else { continue };

            let (index, started_at) = slots[done.slot].take().expect("completion for a busy slot");
            debug_assert_eq!(index, done.index);
            running -= 1;
            trace.push(TraceRecord {
                time: done.finished_at,
                slot: done.slot,
                event: TraceEvent::Finish,
                job_id: queue[index].job_id.clone(),
            });
            if !done.outcome.status.is_ok() && attempts[index] <= self.retries {
                log::warn!(
                    "job {} failed (attempt {}), retrying",
                    queue[index].job_id,
                    attempts[index]
                );
                pending.push_front(index);
                continue;
            }
            let mut outcome = done.outcome;
            outcome.job_id = queue[index].job_id.clone();
            outcome.started_at = started_at;
            outcome.finished_at = done.finished_at.max(started_at);
            outcome.wall_time = outcome.finished_at - started_at;
            outcome.attempts = attempts[index];
            outcomes[index] = Some(outcome);
        }

        trace.sort_by(|a, b| a.time.total_cmp(&b.time));
        RunReport {
            outcomes: outcomes
                .into_iter()
                .map(|o| o.expect("every job has an outcome"))
                .collect(),
            trace,
            elapsed: rt.now(),
        }
    }
}
