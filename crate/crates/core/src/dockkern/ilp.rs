//! Seed derivation and the cost model of the kernel's internal parallelism.

use super::{KernelConfig, LigandFrame};
use crate::pdbqt::{LigandModel, ReceptorModel};

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of search run `run` for one ligand. Depends only on its arguments,
/// never on scheduling order.
pub fn run_seed(global_seed: u64, ligand_id: &str, run: usize) -> u64 {
    let mut h = splitmix64(global_seed);
    for b in ligand_id.bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ splitmix64(run as u64 ^ 0xD1B5_4A32_D192_ED03))
}

/// Elapsed time of one docking job in units of a single search run:
/// `ceil(E / min(C, E)) * (1 + kappa * (C - 1))`.
pub fn ilp_run_units(exhaustiveness: usize, cores: usize, kappa: f64) -> f64 {
    let e = exhaustiveness.max(1);
    let c = cores.max(1);
    let waves = e.div_ceil(c.min(e));
    waves as f64 * (1.0 + kappa * (c - 1) as f64)
}

/// Inner-loop operations of one search run: pair terms plus pose building.
pub fn run_cost_units(ligand: &LigandModel, receptor: &ReceptorModel, mc_steps: usize) -> f64 {
    let frame = LigandFrame::new(ligand);
    let receptor_heavy = receptor.atoms.iter().filter(|a| a.is_heavy()).count();
    per_step_units(&frame, receptor_heavy) * mc_steps as f64
}

pub(crate) fn per_step_units(frame: &LigandFrame, receptor_heavy: usize) -> f64 {
    let ligand_heavy = frame.heavy_mask().iter().filter(|h| **h).count();
    (ligand_heavy * receptor_heavy + 2 * frame.atom_count() + frame.distal_total()) as f64
}

/// Modeled cost of docking one ligand on `cores` cores.
pub fn ligand_cost_units(
    ligand: &LigandModel,
    receptor: &ReceptorModel,
    config: &KernelConfig,
    cores: usize,
) -> f64 {
    run_cost_units(ligand, receptor, config.mc_steps)
        * ilp_run_units(config.exhaustiveness, cores, config.ilp_overhead_kappa)
}
