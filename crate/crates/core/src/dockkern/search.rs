use std::f64::consts::PI;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{wrap_angle, GridBox, KernelConfig, KernelError, LigandFrame, Pose, Scorer};
use crate::pdbqt::{LigandModel, ReceptorModel};

/// Gaussian step widths and temperature of the Metropolis walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchMoves {
    /// Å per axis.
    pub translation_sigma: f64,
    /// Radians, per component of the rotation vector.
    pub rotation_sigma: f64,
    pub torsion_sigma: f64,
    /// kcal/mol.
    pub temperature: f64,
}

impl Default for SearchMoves {
    fn default() -> Self {
        SearchMoves {
            translation_sigma: 0.5,
            rotation_sigma: 0.1,
            torsion_sigma: 0.2,
            temperature: 1.2,
        }
    }
}

fn gaussian3(rng: &mut ChaCha8Rng, sigma: f64) -> Vector3<f64> {
    let n = Normal::new(0.0, sigma).expect("positive sigma");
    Vector3::new(n.sample(rng), n.sample(rng), n.sample(rng))
}

fn random_orientation(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    loop {
        let q = Quaternion::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if q.norm() > 1e-6 {
            return UnitQuaternion::new_normalize(q);
        }
    }
}

fn initial_pose(frame: &LigandFrame, grid: &GridBox, rng: &mut ChaCha8Rng) -> Pose {
    let lo = grid.lower();
    let hi = grid.upper();
    let target = Vector3::new(
        rng.gen_range(lo[0]..=hi[0]),
        rng.gen_range(lo[1]..=hi[1]),
        rng.gen_range(lo[2]..=hi[2]),
    );
    Pose {
        translation: target - frame.centroid(),
        orientation: random_orientation(rng),
        torsions: (0..frame.torsion_count())
            .map(|_| wrap_angle(rng.gen_range(-PI..PI)))
            .collect(),
    }
}

fn perturb(pose: &Pose, moves: &SearchMoves, rng: &mut ChaCha8Rng) -> Pose {
    let dt = gaussian3(rng, moves.translation_sigma);
    let dr = gaussian3(rng, moves.rotation_sigma);
    let torsion = Normal::new(0.0, moves.torsion_sigma).expect("positive sigma");
    let turned = UnitQuaternion::from_scaled_axis(dr) * pose.orientation;
    Pose {
        translation: pose.translation + dt,
        orientation: UnitQuaternion::new_normalize(turned.into_inner()),
        torsions: pose
            .torsions
            .iter()
            .map(|t| wrap_angle(t + torsion.sample(rng)))
            .collect(),
    }
}

/// One seeded Metropolis run. Returns the best pose visited and its score.
pub(crate) fn search_run(
    frame: &LigandFrame,
    scorer: &Scorer,
    grid: &GridBox,
    steps: usize,
    moves: &SearchMoves,
    seed: u64,
) -> (Pose, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = initial_pose(frame, grid, &mut rng);
    let mut current_e = scorer
        .score(frame, &current)
        .expect("pose built from frame has matching torsion count");
    let mut best = (current.clone(), current_e);
    for _ in 1..steps {
        let candidate = perturb(&current, moves, &mut rng);
        let e = scorer.score(frame, &candidate).expect("matching torsion count");
        let accept = e <= current_e
            || rng.gen::<f64>() < (-(e - current_e) / moves.temperature).exp();
        if accept {
            current = candidate;
            current_e = e;
            if e < best.1 {
                best = (current.clone(), e);
            }
        }
    }
    best
}

/// Metropolis search from a seeded random pose inside `grid`. `mc_steps`
/// counts poses visited, so a single step returns the starting pose.
pub fn mc_search(
    receptor: &ReceptorModel,
    ligand: &LigandModel,
    grid: &GridBox,
    config: &KernelConfig,
    run_seed: u64,
) -> Result<(Pose, f64), KernelError> {
    config.validate()?;
    let frame = LigandFrame::new(ligand);
    let scorer = Scorer::new(receptor, config.score, Some(*grid));
    Ok(search_run(
        &frame,
        &scorer,
        grid,
        config.mc_steps,
        &SearchMoves::default(),
        run_seed,
    ))
}
