use std::hint::black_box;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use super::ilp::per_step_units;
use super::search::search_run;
use super::{
    cluster_modes, ilp_run_units, run_seed, GridBox, KernelConfig, KernelError, LigandFrame, Pose,
    Scorer, SearchMoves,
};
use crate::pdbqt::{DockedMode, LigandModel, MultiModelOutput, ReceptorModel};

#[derive(Debug, Clone, PartialEq)]
pub struct DockingResult {
    pub ligand_id: String,
    pub modes: Vec<DockedMode>,
    /// Measured seconds; the only field that varies between identical calls.
    pub wall_time: f64,
    pub cores_used: usize,
    pub seed_used: u64,
    /// Cost of this job under the internal-parallelism model, in inner-loop operations.
    pub modeled_cost: f64,
}

impl DockingResult {
    pub fn to_output(&self) -> MultiModelOutput {
        MultiModelOutput {
            ligand_id: self.ligand_id.clone(),
            modes: self.modes.clone(),
        }
    }
}

/// Docks one ligand: `exhaustiveness` independent seeded searches spread over
/// `min(cores, exhaustiveness)` threads, then clustered into modes.
///
/// Each run is followed by `kappa * (cores - 1) * mc_steps` extra score
/// evaluations, the synchronisation overhead of internal parallelism.
pub fn dock(
    receptor: &ReceptorModel,
    ligand: &LigandModel,
    grid: &GridBox,
    config: &KernelConfig,
    cores: usize,
) -> Result<DockingResult, KernelError> {
    config.validate()?;
    if cores < 1 {
        return Err(KernelError::InvalidConfig("cores must be >= 1".into()));
    }
    let started = Instant::now();
    let frame = LigandFrame::new(ligand);
    let scorer = Scorer::new(receptor, config.score, Some(*grid));
    let moves = SearchMoves::default();
    let runs = config.exhaustiveness;
    let overhead_evals =
        (config.ilp_overhead_kappa * (cores - 1) as f64 * config.mc_steps as f64).round() as usize;

    let one_run = |i: usize| -> (Pose, f64) {
        let seed = run_seed(config.seed, &ligand.id, i);
        let best = search_run(&frame, &scorer, grid, config.mc_steps, &moves, seed);
        for _ in 0..overhead_evals {
            black_box(scorer.score(&frame, black_box(&best.0)).ok());
        }
        best
    };

    let workers = cores.min(runs);
    let mut results: Vec<Option<(Pose, f64)>> = vec![None; runs];
    if workers == 1 {
        for (i, slot) in results.iter_mut().enumerate() {
            *slot = Some(one_run(i));
        }
    } else {
        let next = AtomicUsize::new(0);
        let collected = Mutex::new(Vec::with_capacity(runs));
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= runs {
                        break;
                    }
                    let r = one_run(i);
                    collected.lock().expect("result lock").push((i, r));
                });
            }
        });
        for (i, r) in collected.into_inner().expect("result lock") {
            results[i] = Some(r);
        }
    }
    // merged by run index, never by arrival order
    let candidates: Vec<(Pose, f64)> = results
        .into_iter()
        .map(|r| r.expect("every run completed"))
        .collect();
    let modes = cluster_modes(&candidates, ligand, config)?;

    let modeled_cost = per_step_units(&frame, scorer.receptor_heavy_count())
        * config.mc_steps as f64
        * ilp_run_units(runs, cores, config.ilp_overhead_kappa);
    Ok(DockingResult {
        ligand_id: ligand.id.clone(),
        modes,
        wall_time: started.elapsed().as_secs_f64(),
        cores_used: cores,
        seed_used: config.seed,
        modeled_cost,
    })
}
