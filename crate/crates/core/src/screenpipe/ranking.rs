use std::fmt::Write as _;

use serde::Serialize;

use crate::scheduler::{JobOutcome, JobStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingEntry {
    pub ligand_id: String,
    pub best_energy: f64,
    pub num_modes: usize,
    /// Relative to the screening output directory.
    pub out_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureEntry {
    pub ligand_id: String,
    pub diagnostic: String,
}

/// Splits outcomes into the ranked hit list (energy ascending, ties by id)
/// and the failures.
pub fn rank_outcomes(outcomes: &[JobOutcome]) -> (Vec<RankingEntry>, Vec<FailureEntry>) {
    let mut ranking = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        let entry = o.result.as_ref().and_then(|r| {
            r.best_energy().map(|e| RankingEntry {
                ligand_id: o.job_id.clone(),
                best_energy: e,
                num_modes: r.modes.len(),
                out_path: format!("{}/out.pdbqt", o.job_id),
            })
        });
        match (&o.status, entry) {
            (JobStatus::Ok, Some(e)) => ranking.push(e),
            (JobStatus::Ok, None) => failures.push(FailureEntry {
                ligand_id: o.job_id.clone(),
                diagnostic: "engine produced no binding modes".into(),
            }),
            (JobStatus::Failed(msg), _) => failures.push(FailureEntry {
                ligand_id: o.job_id.clone(),
                diagnostic: msg.clone(),
            }),
            (JobStatus::Timeout, _) => failures.push(FailureEntry {
                ligand_id: o.job_id.clone(),
                diagnostic: "timed out".into(),
            }),
        }
    }
    ranking.sort_by(|a, b| a.best_energy.total_cmp(&b.best_energy).then_with(|| a.ligand_id.cmp(&b.ligand_id)));
    (ranking, failures)
}

/// Quotes a field only when it needs it.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_ranking(entries: &[RankingEntry], top_k: usize) -> String {
    let mut out = String::from("rank,ligand_id,best_energy_kcal_mol,num_modes,out_path\n");
    for (i, e) in entries.iter().take(top_k).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{:.1},{},{}",
            i + 1,
            csv_field(&e.ligand_id),
            e.best_energy,
            e.num_modes,
            csv_field(&e.out_path)
        );
    }
    out
}

pub fn write_failures(failures: &[FailureEntry]) -> String {
    let mut out = String::from("ligand_id,diagnostic\n");
    for f in failures {
        // one record per line keeps the file greppable
        let diag = f.diagnostic.replace(['\n', '\r'], " ");
        let _ = writeln!(out, "{},{}", csv_field(&f.ligand_id), csv_field(&diag));
    }
    out
}
