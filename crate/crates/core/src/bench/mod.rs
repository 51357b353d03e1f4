//! Benchmark harness: time a matrix of `(jobs, cpus)` shapes over repeated
//! screening runs, then summarise and derive speedup multipliers.
//!
//! A matrix file has one row per line, either `<jobs> <cpus>` or
//! `ilp <cpus>`. An `ilp` row is a single job using `cpus` cores inside the
//! engine, and is labelled `N/A|<cpus>`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::screenpipe::{screen, ScreenError, ScreeningConfig, Timing};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("matrix line {line}: {reason}")]
    InvalidMatrix { line: usize, reason: String },
    #[error("benchmark needs at least one iteration")]
    ZeroIterations,
    #[error("benchmark matrix has no rows")]
    EmptyMatrix,
    #[error("no summary for baseline configuration {0}")]
    MissingBaseline(String),
    #[error("samples line {line}: {reason}")]
    InvalidSamples { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixRow {
    /// `None` marks an engine-only (ILP) row.
    pub jobs: Option<usize>,
    pub cpus: usize,
}

impl MatrixRow {
    pub fn label(&self) -> String {
        match self.jobs {
            Some(j) => format!("{j}|{}", self.cpus),
            None => format!("N/A|{}", self.cpus),
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let (jobs, cpus) = label.split_once('|')?;
        let cpus = cpus.trim().parse().ok().filter(|&c| c >= 1)?;
        let jobs = match jobs.trim() {
            "N/A" => None,
            j => Some(j.parse().ok().filter(|&j| j >= 1)?),
        };
        Some(MatrixRow { jobs, cpus })
    }

    /// Concurrent jobs the scheduler runs for this row.
    pub fn scheduler_jobs(&self) -> usize {
        self.jobs.unwrap_or(1)
    }

    pub fn total_cores(&self) -> usize {
        self.scheduler_jobs() * self.cpus
    }

    fn dir_name(&self) -> String {
        match self.jobs {
            Some(j) => format!("{j}x{}", self.cpus),
            None => format!("ilp{}", self.cpus),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchMatrix {
    pub rows: Vec<MatrixRow>,
    pub iterations: usize,
}

impl BenchMatrix {
    pub const DEFAULT_ITERATIONS: usize = 5;

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.iterations < 1 {
            return Err(BenchError::ZeroIterations);
        }
        if self.rows.is_empty() {
            return Err(BenchError::EmptyMatrix);
        }
        Ok(())
    }
}

pub fn parse_matrix(text: &str, iterations: usize) -> Result<BenchMatrix, BenchError> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: &str| BenchError::InvalidMatrix {
            line: i + 1,
            reason: format!("{reason}: {line:?}"),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [jobs, cpus] = fields[..] else {
            return Err(err("expected `<jobs> <cpus>` or `ilp <cpus>`"));
        };
        let cpus: usize = cpus.parse().ok().filter(|&c| c >= 1).ok_or_else(|| err("cpus must be a positive integer"))?;
        let jobs = if jobs.eq_ignore_ascii_case("ilp") {
            None
        } else {
            Some(jobs.parse().ok().filter(|&j| j >= 1).ok_or_else(|| err("jobs must be a positive integer or `ilp`"))?)
        };
        rows.push(MatrixRow { jobs, cpus });
    }
    let matrix = BenchMatrix { rows, iterations };
    matrix.validate()?;
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSample {
    pub config_label: String,
    pub iteration: usize,
    pub elapsed: f64,
}

/// A run that errored; the row gets no sample for that iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub config_label: String,
    pub iteration: usize,
    pub error: String,
}

/// Runs every row `iterations` times, strictly one after another. Each run
/// starts from an empty output directory under `<base.out_dir>/runs/`.
///
/// Elapsed time wraps the whole `screen()` call on the monotonic clock, or
/// is the scheduler makespan when `base.timing` is virtual.
pub fn run_matrix(matrix: &BenchMatrix, base: &ScreeningConfig) -> Result<(Vec<RunSample>, Vec<RowFailure>), BenchError> {
    matrix.validate()?;
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for row in &matrix.rows {
        let label = row.label();
        let mut config = base.clone();
        config.jobs = row.scheduler_jobs();
        config.cores_per_job = row.cpus;
        config.resume = false;
        config.out_dir = base.out_dir.join("runs").join(row.dir_name());
        for iteration in 1..=matrix.iterations {
            if config.out_dir.exists() {
                fs::remove_dir_all(&config.out_dir).map_err(|source| BenchError::Io {
                    path: config.out_dir.clone(),
                    source,
                })?;
            }
            let started = Instant::now();
            let result = screen(&config);
            let wall = started.elapsed().as_secs_f64();
            match result {
                Ok(report) => {
                    let elapsed = match config.timing {
                        Timing::Monotonic => wall,
                        Timing::Virtual(_) => report.elapsed,
                    };
                    log::info!("{label} iteration {iteration}: {elapsed:.3} s");
                    samples.push(RunSample {
                        config_label: label.clone(),
                        iteration,
                        elapsed,
                    });
                }
                Err(e) => {
                    log::error!("{label} iteration {iteration}: {e}");
                    let fatal = matches!(e, ScreenError::Sched(_) | ScreenError::InvalidConfig(_));
                    failures.push(RowFailure {
                        config_label: label.clone(),
                        iteration,
                        error: e.to_string(),
                    });
                    // the same configuration error would repeat every iteration
                    if fatal {
                        break;
                    }
                }
            }
        }
    }
    Ok((samples, failures))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub config_label: String,
    pub samples: usize,
    pub mean: f64,
    pub stddev_pct: f64,
}

/// Mean and relative sample standard deviation per label, in order of first
/// appearance.
pub fn summarize(samples: &[RunSample]) -> Vec<Summary> {
    let mut labels: Vec<&str> = Vec::new();
    for s in samples {
        if !labels.contains(&s.config_label.as_str()) {
            labels.push(&s.config_label);
        }
    }
    labels
        .into_iter()
        .map(|label| {
            let xs: Vec<f64> = samples.iter().filter(|s| s.config_label == label).map(|s| s.elapsed).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let stddev_pct = if xs.len() < 2 || mean == 0.0 {
                0.0
            } else {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                100.0 * var.sqrt() / mean
            };
            Summary {
                config_label: label.to_string(),
                samples: xs.len(),
                mean,
                stddev_pct,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub config_label: String,
    pub vs_single: f64,
    /// Against the engine-only row with the same total core count, if the
    /// matrix has one.
    pub vs_ilp: Option<f64>,
}

pub fn speedup_table(summaries: &[Summary], single_core_label: &str) -> Result<Vec<SpeedupRow>, BenchError> {
    let single = summaries
        .iter()
        .find(|s| s.config_label == single_core_label)
        .ok_or_else(|| BenchError::MissingBaseline(single_core_label.to_string()))?;
    let ilp_mean = |cores: usize| {
        summaries
            .iter()
            .find(|s| MatrixRow::from_label(&s.config_label).is_some_and(|r| r.jobs.is_none() && r.cpus == cores))
            .map(|s| s.mean)
    };
    Ok(summaries
        .iter()
        .map(|s| SpeedupRow {
            config_label: s.config_label.clone(),
            vs_single: single.mean / s.mean,
            vs_ilp: MatrixRow::from_label(&s.config_label)
                .and_then(|r| ilp_mean(r.total_cores()))
                .map(|m| m / s.mean),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: String,
    pub csv: String,
    pub plot_csv: String,
}

fn split_label(label: &str) -> (String, String) {
    match label.split_once('|') {
        Some((j, c)) => (j.to_string(), c.to_string()),
        None => (label.to_string(), String::new()),
    }
}

/// Renders the summaries (in input order) as a table, a CSV and plot data.
/// `speedups` rows are matched to summaries by label.
pub fn emit_report(summaries: &[Summary], speedups: &[SpeedupRow]) -> Report {
    let speedup = |label: &str| speedups.iter().find(|r| r.config_label == label);
    let mut table = format!(
        "{:>9}  {:>9}  {:>14}  {:>10}  {:>11}  {:>10}\n",
        "# of Jobs", "# of CPUs", "Avg Time [s]", "Std Dev %", "vs single", "vs ILP"
    );
    let mut csv = String::from("config,jobs,cpus,mean_s,stddev_pct,vs_single,vs_ilp\n");
    let mut plot_csv = String::from("config,mean_s,log10_mean_s\n");
    for s in summaries {
        let (jobs, cpus) = split_label(&s.config_label);
        let sp = speedup(&s.config_label);
        let vs_single = sp.map(|r| format!("{:.2}", r.vs_single)).unwrap_or_default();
        let vs_ilp = sp.and_then(|r| r.vs_ilp).map(|v| format!("{v:.2}")).unwrap_or_default();
        let _ = writeln!(
            table,
            "{jobs:>9}  {cpus:>9}  {:>14.3}  {:>10.2}  {:>11}  {:>10}",
            s.mean,
            s.stddev_pct,
            if vs_single.is_empty() { "-" } else { &vs_single },
            if vs_ilp.is_empty() { "-" } else { &vs_ilp },
        );
        let _ = writeln!(
            csv,
            "{},{jobs},{cpus},{},{:.2},{vs_single},{vs_ilp}",
            s.config_label, s.mean, s.stddev_pct
        );
        let _ = writeln!(plot_csv, "{},{},{}", s.config_label, s.mean, s.mean.log10());
    }
    Report { table, csv, plot_csv }
}

pub fn write_samples(samples: &[RunSample]) -> String {
    let mut out = String::from("config,iteration,elapsed_s\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", s.config_label, s.iteration, s.elapsed);
    }
    out
}

pub fn parse_samples(text: &str) -> Result<Vec<RunSample>, BenchError> {
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("config,")) {
            continue;
        }
        let err = |reason: &str| BenchError::InvalidSamples {
            line: i + 1,
            reason: format!("{reason}: {line:?}"),
        };
        let fields: Vec<&str> = line.split(',').collect();
        let [label, iteration, elapsed] = fields[..] else {
            return Err(err("expected config,iteration,elapsed_s"));
        };
        if MatrixRow::from_label(label).is_none() {
            return Err(err("config must look like `<jobs>|<cpus>` or `N/A|<cpus>`"));
        }
        samples.push(RunSample {
            config_label: label.to_string(),
            iteration: iteration.parse().map_err(|_| err("bad iteration"))?,
            elapsed: elapsed
                .parse()
                .ok()
                .filter(|e: &f64| e.is_finite() && *e >= 0.0)
                .ok_or_else(|| err("bad elapsed time"))?,
        });
    }
    Ok(samples)
}

/// File names written by [`write_report_files`].
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "plot.csv";
pub const TABLE_FILE: &str = "report.txt";

pub fn write_report_files(dir: &Path, samples: &[RunSample], report: &Report) -> Result<(), BenchError> {
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|source| BenchError::Io { path, source })
    };
    fs::create_dir_all(dir).map_err(|source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(SAMPLES_FILE, &write_samples(samples))?;
    write(SUMMARY_FILE, &report.csv)?;
    write(PLOT_FILE, &report.plot_csv)?;
    write(TABLE_FILE, &report.table)
}
