use nalgebra::Vector3;

use super::{GridBox, KernelError, LigandFrame, Pose, ScoreParams};
use crate::pdbqt::{LigandModel, ReceptorModel};

/// Receptor heavy atoms plus score parameters, ready for repeated scoring.
pub struct Scorer {
    receptor: Vec<Vector3<f64>>,
    params: ScoreParams,
    grid: Option<GridBox>,
}

impl Scorer {
    pub fn new(receptor: &ReceptorModel, params: ScoreParams, grid: Option<GridBox>) -> Self {
        Scorer {
            receptor: receptor
                .atoms
                .iter()
                .filter(|a| a.is_heavy())
                .map(|a| Vector3::new(a.x, a.y, a.z))
                .collect(),
            params,
            grid,
        }
    }

    pub fn receptor_heavy_count(&self) -> usize {
        self.receptor.len()
    }

    /// Clipped LJ term for one pair at squared distance `d2`.
    pub fn pair_energy(&self, d2: f64) -> f64 {
        let p = &self.params;
        if d2 > p.cutoff * p.cutoff {
            return 0.0;
        }
        if d2 == 0.0 {
            return p.clip;
        }
        let s6 = (p.sigma * p.sigma / d2).powi(3);
        let lj = 4.0 * p.epsilon * (s6 * s6 - s6);
        lj.min(p.clip)
    }

    pub fn score_coordinates(&self, coords: &[Vector3<f64>], heavy: &[bool]) -> f64 {
        let cutoff2 = self.params.cutoff * self.params.cutoff;
        let mut total = 0.0;
        for (p, &is_heavy) in coords.iter().zip(heavy) {
            if let Some(grid) = &self.grid {
                if !grid.contains(&[p.x, p.y, p.z]) {
                    total += self.params.clip;
                }
            }
            if !is_heavy {
                continue;
            }
            for r in &self.receptor {
                let d2 = (p - r).norm_squared();
                if d2 <= cutoff2 {
                    total += self.pair_energy(d2);
                }
            }
        }
        total
    }

    pub fn score(&self, frame: &LigandFrame, pose: &Pose) -> Result<f64, KernelError> {
        let coords = frame.pose_coordinates(pose)?;
        Ok(self.score_coordinates(&coords, frame.heavy_mask()))
    }
}

/// Scores one pose: clipped Lennard-Jones over receptor-heavy x ligand-heavy
/// pairs within the cutoff, plus `clip` for every ligand atom outside `grid`.
pub fn score_pose(
    receptor: &ReceptorModel,
    ligand: &LigandModel,
    pose: &Pose,
    params: &ScoreParams,
    grid: Option<&GridBox>,
) -> Result<f64, KernelError> {
    let scorer = Scorer::new(receptor, *params, grid.copied());
    scorer.score(&LigandFrame::new(ligand), pose)
}
