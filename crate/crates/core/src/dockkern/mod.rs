//! Deterministic mock docking kernel.
//!
//! Chemically meaningless but smooth and cheap: a clipped Lennard-Jones pair
//! score, Metropolis search over rigid-body and torsional degrees of freedom
//! inside a grid box, and Vina-style mode clustering. Output depends only on
//! the inputs and the seed; the `cores` argument of [`dock`] changes timing,
//! never results.

mod cluster;
mod dock;
mod ilp;
mod kinematics;
mod rmsd;
mod score;
mod search;

pub use cluster::cluster_modes;
pub use dock::{dock, DockingResult};
pub use ilp::{ilp_run_units, ligand_cost_units, run_cost_units, run_seed};
pub use kinematics::{apply_pose, LigandFrame};
pub use rmsd::{rmsd_lb, rmsd_ub};
pub use score::{score_pose, Scorer};
pub use search::{mc_search, SearchMoves};

use std::f64::consts::PI;

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid kernel configuration: {0}")]
    InvalidConfig(String),
    #[error("no candidate poses to cluster")]
    EmptyCandidates,
}

/// Axis-aligned docking search space, in Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    pub center: [f64; 3],
    pub size: [f64; 3],
}

impl GridBox {
    pub fn new(center: [f64; 3], size: [f64; 3]) -> Result<Self, KernelError> {
        if size.iter().any(|s| !(*s > 0.0) || !s.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(KernelError::InvalidConfig(format!(
                "grid box sizes must be positive and finite, got {size:?}"
            )));
        }
        Ok(GridBox { center, size })
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|k| (p[k] - self.center[k]).abs() <= self.size[k] / 2.0)
    }

    pub fn lower(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.center[k] - self.size[k] / 2.0)
    }

    pub fn upper(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.center[k] + self.size[k] / 2.0)
    }
}

/// A rigid-body placement plus one angle per rotatable bond.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub translation: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
    /// Radians in (-pi, pi], one per branch in tree order.
    pub torsions: Vec<f64>,
}

impl Pose {
    pub fn identity(n_torsions: usize) -> Self {
        Pose {
            translation: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
            torsions: vec![0.0; n_torsions],
        }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Parameters of the clipped Lennard-Jones toy score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub sigma: f64,
    pub epsilon: f64,
    pub cutoff: f64,
    /// Upper bound per pair, also the penalty per ligand atom outside the box.
    pub clip: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            sigma: 3.5,
            epsilon: 0.2,
            cutoff: 8.0,
            clip: 100.0,
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.sigma > 0.0 && self.cutoff > self.sigma && self.clip > 0.0) {
            return Err(KernelError::InvalidConfig(format!(
                "score parameters need sigma > 0, cutoff > sigma, clip > 0: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    /// Independent search runs per ligand; the unit of internal parallelism.
    pub exhaustiveness: usize,
    pub num_modes: usize,
    /// kcal/mol above the best mode beyond which modes are dropped.
    pub energy_range: f64,
    /// Poses visited per run, the seeded starting pose included.
    pub mc_steps: usize,
    /// Minimum rmsd_lb (Å) between any two reported modes.
    pub rmsd_dedup: f64,
    pub seed: u64,
    /// Per-extra-core synchronisation overhead of internal parallelism.
    pub ilp_overhead_kappa: f64,
    pub score: ScoreParams,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            exhaustiveness: 8,
            num_modes: 9,
            energy_range: 3.0,
            mc_steps: 2000,
            rmsd_dedup: 2.0,
            seed: 0,
            ilp_overhead_kappa: 0.01,
            score: ScoreParams::default(),
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<(), KernelError> {
        let bad = |m: &str| Err(KernelError::InvalidConfig(m.to_string()));
        if self.exhaustiveness < 1 {
            return bad("exhaustiveness must be >= 1");
        }
        if self.num_modes < 1 {
            return bad("num_modes must be >= 1");
        }
        if !(self.energy_range >= 0.0) {
            return bad("energy_range must be >= 0");
        }
        if self.mc_steps < 1 {
            return bad("mc_steps must be >= 1");
        }
        if !(self.rmsd_dedup >= 0.0) {
            return bad("rmsd_dedup must be >= 0");
        }
        if !(self.ilp_overhead_kappa >= 0.0) {
            return bad("ilp_overhead_kappa must be >= 0");
        }
        self.score.validate()
    }
}
