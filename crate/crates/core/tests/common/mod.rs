//! Independent oracles and fixtures shared by the integration tests and the
//! acceptance runner.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use dockthrottle::dockkern::{GridBox, Pose};
use dockthrottle::pdbqt::{LigandModel, ReceptorModel};
use dockthrottle::scheduler::{TraceEvent, TraceRecord};
use dockthrottle::screenpipe::{LigandSource, ScreeningConfig};
use dockthrottle::synthetic::{synthetic_library, synthetic_receptor, write_library, write_receptor};

type V = [f64; 3];

fn sub(a: V, b: V) -> V {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: V, b: V) -> V {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: V, s: f64) -> V {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: V, b: V) -> V {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Rodrigues' formula: `v` turned by `theta` about the unit axis `k`.
pub fn rodrigues(v: V, k: V, theta: f64) -> V {
    let (s, c) = theta.sin_cos();
    add(add(scale(v, c), scale(cross(k, v), s)), scale(k, dot(k, v) * (1.0 - c)))
}

/// Rotation matrix of a unit quaternion given as (w, x, y, z).
pub fn quaternion_matrix(w: f64, x: f64, y: f64, z: f64) -> [[f64; 3]; 3] {
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Brute-force forward kinematics written from the definition: each branch
/// (in file order) turns its distal atoms about the current parent->child
/// bond, then the ligand is rotated about its reference centroid and shifted.
pub fn kinematics_oracle(ligand: &LigandModel, pose: &Pose) -> Vec<V> {
    let index: HashMap<i64, usize> = ligand.atoms.iter().enumerate().map(|(i, a)| (a.serial, i)).collect();
    let mut pts: Vec<V> = ligand.atoms.iter().map(|a| [a.x, a.y, a.z]).collect();
    let n = pts.len() as f64;
    let centroid = pts.iter().fold([0.0; 3], |acc, p| add(acc, *p));
    let centroid = scale(centroid, 1.0 / n);
    for (branch, &theta) in ligand.torsion_tree.branches.iter().zip(&pose.torsions) {
        let a = pts[index[&branch.parent_serial]];
        let b = pts[index[&branch.child_serial]];
        let axis = sub(b, a);
        let len = dot(axis, axis).sqrt();
        let k = scale(axis, 1.0 / len);
        for &i in &branch.distal {
            pts[i] = add(b, rodrigues(sub(pts[i], b), k, theta));
        }
    }
    let q = pose.orientation.quaternion();
    let m = quaternion_matrix(q.w, q.i, q.j, q.k);
    let t = [pose.translation.x, pose.translation.y, pose.translation.z];
    pts.iter()
        .map(|p| {
            let d = sub(*p, centroid);
            let r = [dot(m[0], d), dot(m[1], d), dot(m[2], d)];
            add(add(r, centroid), t)
        })
        .collect()
}

/// Greedy list-scheduling replay: jobs start in queue order on the earliest
/// free slot, as soon as it frees. Returns the makespan.
pub fn event_driven_makespan(durations: &[f64], slots: usize) -> f64 {
    let mut free = vec![0.0f64; slots];
    let mut end = 0.0f64;
    for &d in durations {
        let (i, &t) = free
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("at least one slot");
        free[i] = t + d;
        end = end.max(t + d);
    }
    end
}

/// Checks refill behaviour of a trace: after every Finish, if a job is still
/// waiting, some job must start within `max_latency`.
pub fn check_refill(trace: &[TraceRecord], max_latency: f64) -> Result<(), String> {
    for (k, r) in trace.iter().enumerate() {
        if r.event != TraceEvent::Finish {
            continue;
        }
        if let Some(next) = trace[k + 1..].iter().find(|e| e.event == TraceEvent::Start) {
            let latency = next.time - r.time;
            if latency > max_latency + 1e-9 {
                return Err(format!(
                    "{} finished at {} but {} waited until {}",
                    r.job_id, r.time, next.job_id, next.time
                ));
            }
        }
    }
    Ok(())
}

/// Each id starts and finishes exactly once.
pub fn check_exactly_once(trace: &[TraceRecord], ids: &[String]) -> Result<(), String> {
    for id in ids {
        let starts = trace.iter().filter(|r| &r.job_id == id && r.event == TraceEvent::Start).count();
        let finishes = trace.iter().filter(|r| &r.job_id == id && r.event == TraceEvent::Finish).count();
        if starts != 1 || finishes != 1 {
            return Err(format!("{id}: {starts} starts, {finishes} finishes"));
        }
    }
    if trace.len() != 2 * ids.len() {
        return Err(format!("{} events for {} jobs", trace.len(), ids.len()));
    }
    Ok(())
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub receptor: ReceptorModel,
    pub grid: GridBox,
    pub ligands: Vec<LigandModel>,
}

impl Fixture {
    /// Synthetic receptor plus `count` synthetic ligands written to disk.
    pub fn new(count: usize, receptor_atoms: usize) -> Self {
        let dir = tempfile::tempdir().expect("temp dir");
        let (receptor, grid) = synthetic_receptor(2024, receptor_atoms);
        write_receptor(&dir.path().join("receptor.pdbqt"), &receptor).expect("write receptor");
        let ligands = synthetic_library(77, count);
        write_library(&dir.path().join("lib"), &ligands).expect("write library");
        Fixture {
            dir,
            receptor,
            grid,
            ligands,
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn config(&self, out: &str) -> ScreeningConfig {
        ScreeningConfig::new(
            self.path("receptor.pdbqt"),
            LigandSource::Dir(self.path("lib")),
            self.grid,
            self.path(out),
        )
    }
}

pub fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
