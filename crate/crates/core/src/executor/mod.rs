//! Job execution backends: the in-process mock kernel, or an external docking
//! command run as a black box.
//!
//! Every job owns `<out_dir>/<ligand_id>/`, which receives `out.pdbqt` and
//! `job.log`.

mod external;
mod template;

pub use external::{run_external, ExternalInvocation, CAPTURE_LIMIT};
pub use template::{expand_template, placeholders_in, TemplateValues, PLACEHOLDERS};

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dockkern::{dock, GridBox, KernelConfig};
use crate::pdbqt::{parse_ligand, parse_output, write_output, ReceptorModel};
use crate::scheduler::{Executor, JobOutcome, JobSpec, JobStatus};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error("unknown placeholder {{{0}}} in command template")]
    UnknownPlaceholder(String),
    #[error("command template is empty")]
    EmptyTemplate,
    #[error("command template must contain {{{0}}}")]
    MissingPlaceholder(String),
    #[error("template uses {{{0}}} but no value is configured for it")]
    MissingValue(String),
    #[error("failed to start {program}: {reason}")]
    SpawnFailure { program: String, reason: String },
    #[error("command exceeded the {0:?} time limit")]
    Timeout(Duration),
    #[error("expected output {0} was not written")]
    OutputMissing(PathBuf),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ExecError {
    fn from(e: std::io::Error) -> Self {
        ExecError::Io(e.to_string())
    }
}

/// Everything the mock kernel needs besides the ligand.
#[derive(Debug, Clone)]
pub struct MockEngine {
    pub receptor: Arc<ReceptorModel>,
    pub grid: GridBox,
    pub kernel: KernelConfig,
}

#[derive(Debug, Clone)]
pub struct ExternalEngine {
    template: String,
    pub receptor_path: PathBuf,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    pub timeout: Option<Duration>,
}

impl ExternalEngine {
    /// Validates that the template only uses known placeholders and names
    /// both `{ligand}` and `{out}`.
    pub fn new(template: &str, receptor_path: PathBuf) -> Result<Self, ExecError> {
        if template.split_whitespace().next().is_none() {
            return Err(ExecError::EmptyTemplate);
        }
        let used = placeholders_in(template);
        if let Some(bad) = used.iter().find(|p| !PLACEHOLDERS.contains(&p.as_str())) {
            return Err(ExecError::UnknownPlaceholder(bad.clone()));
        }
        for required in ["ligand", "out"] {
            if !used.iter().any(|p| p == required) {
                return Err(ExecError::MissingPlaceholder(required.into()));
            }
        }
        Ok(ExternalEngine {
            template: template.to_string(),
            receptor_path,
            config_path: None,
            seed: 0,
            timeout: None,
        })
    }

    pub fn template(&self) -> &str {
        &self.template
    }
}

#[derive(Debug, Clone)]
pub enum ExecutorBackend {
    InProcess(MockEngine),
    External(ExternalEngine),
}

pub fn job_dir(out_dir: &Path, job_id: &str) -> PathBuf {
    out_dir.join(job_id)
}

pub fn output_path(out_dir: &Path, job_id: &str) -> PathBuf {
    job_dir(out_dir, job_id).join("out.pdbqt")
}

fn excerpt(text: &str) -> String {
    const TAIL: usize = 2000;
    let t = text.trim_end();
    if t.len() <= TAIL {
        return t.to_string();
    }
    let mut start = t.len() - TAIL;
    while !t.is_char_boundary(start) {
        start += 1;
    }
    format!("...{}", &t[start..])
}

/// Runs one job on `backend`. Never panics on job-level problems: they come
/// back as `Failed` or `Timeout` outcomes.
pub fn execute(spec: &JobSpec, backend: &ExecutorBackend, out_dir: &Path) -> JobOutcome {
    let started = Instant::now();
    let dir = job_dir(out_dir, &spec.job_id);
    if let Err(e) = fs::create_dir_all(&dir) {
        return JobOutcome::failed(&spec.job_id, format!("cannot create {}: {e}", dir.display()));
    }
    let mut outcome = match backend {
        ExecutorBackend::InProcess(engine) => execute_mock(spec, engine, out_dir),
        ExecutorBackend::External(engine) => execute_external(spec, engine, out_dir),
    };
    outcome.wall_time = started.elapsed().as_secs_f64();
    outcome.finished_at = outcome.wall_time;
    outcome
}

fn execute_mock(spec: &JobSpec, engine: &MockEngine, out_dir: &Path) -> JobOutcome {
    let id = spec.job_id.as_str();
    let text = match fs::read_to_string(&spec.ligand_path) {
        Ok(t) => t,
        Err(e) => {
            return JobOutcome::failed(id, format!("cannot read {}: {e}", spec.ligand_path.display()))
        }
    };
    let ligand = match parse_ligand(id, &text) {
        Ok(l) => l,
        Err(e) => return JobOutcome::failed(id, format!("ligand parse error: {e}")),
    };
    let result = match dock(&engine.receptor, &ligand, &engine.grid, &engine.kernel, spec.cores) {
        Ok(r) => r,
        Err(e) => return JobOutcome::failed(id, format!("docking error: {e}")),
    };
    let output = result.to_output();
    let text = match write_output(&output) {
        Ok(t) => t,
        Err(e) => return JobOutcome::failed(id, format!("cannot format output: {e}")),
    };
    let path = output_path(out_dir, id);
    let log = format!(
        "engine mock\nligand {}\nseed {}\ncores {}\nmodes {}\nbest_energy {:.1}\nmodeled_cost {}\nwall_time {:.6}\n",
        spec.ligand_path.display(),
        result.seed_used,
        result.cores_used,
        output.modes.len(),
        output.best_energy().unwrap_or(f64::NAN),
        result.modeled_cost,
        result.wall_time,
    );
    if let Err(e) = fs::write(&path, text).and_then(|_| fs::write(job_dir(out_dir, id).join("job.log"), log)) {
        return JobOutcome::failed(id, format!("cannot write {}: {e}", path.display()));
    }
    JobOutcome {
        out_path: Some(path),
        modeled_cost: Some(result.modeled_cost),
        ..JobOutcome::ok(id, output)
    }
}

fn execute_external(spec: &JobSpec, engine: &ExternalEngine, out_dir: &Path) -> JobOutcome {
    let id = spec.job_id.as_str();
    let out = output_path(out_dir, id);
    // a stale file from an earlier attempt must not pass for fresh output
    let _ = fs::remove_file(&out);
    let values = TemplateValues {
        ligand: spec.ligand_path.display().to_string(),
        receptor: engine.receptor_path.display().to_string(),
        out: out.display().to_string(),
        cpu: spec.cores,
        seed: engine.seed,
        config: engine.config_path.as_ref().map(|p| p.display().to_string()),
    };
    let argv = match expand_template(&engine.template, &values) {
        Ok(a) => a,
        Err(e) => return JobOutcome::failed(id, e.to_string()),
    };
    let log_path = job_dir(out_dir, id).join("job.log");
    let invocation = match run_external(&argv, engine.timeout, &log_path) {
        Ok(inv) => inv,
        Err(ExecError::Timeout(limit)) => {
            let mut o = JobOutcome::with_status(id, JobStatus::Timeout);
            log::warn!("{id}: external command exceeded {limit:?}");
            o.out_path = None;
            return o;
        }
        Err(e) => return JobOutcome::failed(id, e.to_string()),
    };
    if invocation.exit_code != Some(0) {
        let code = invocation
            .exit_code
            .map_or("a signal".to_string(), |c| format!("exit code {c}"));
        return JobOutcome::failed(
            id,
            format!("command failed with {code}: {}", excerpt(&invocation.stderr)),
        );
    }
    let text = match fs::read_to_string(&out) {
        Ok(t) => t,
        Err(_) => return JobOutcome::failed(id, ExecError::OutputMissing(out).to_string()),
    };
    match parse_output(id, &text) {
        Ok(parsed) => JobOutcome {
            out_path: Some(out),
            ..JobOutcome::ok(id, parsed)
        },
        Err(e) => JobOutcome::failed(id, format!("cannot parse {}: {e}", out.display())),
    }
}

/// [`Executor`] that runs every job on one backend, writing into `out_dir`.
pub struct JobRunner {
    pub backend: ExecutorBackend,
    pub out_dir: PathBuf,
}

impl Executor for JobRunner {
    fn execute(&self, job: &JobSpec) -> JobOutcome {
        execute(job, &self.backend, &self.out_dir)
    }
}
