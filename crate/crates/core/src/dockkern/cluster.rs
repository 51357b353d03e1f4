use super::{rmsd_lb, rmsd_ub, KernelConfig, KernelError, LigandFrame, Pose};
use crate::pdbqt::{DockedMode, LigandModel};

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    let r = (v * scale).round() / scale;
    // keep "-0.0" out of the written file
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Greedy energy-ordered clustering of search results into reported modes.
///
/// Values are quantised to the precision of the output file (energy 0.1,
/// RMSD and coordinates 0.001) so a written result reads back unchanged.
pub fn cluster_modes(
    candidates: &[(Pose, f64)],
    ligand: &LigandModel,
    config: &KernelConfig,
) -> Result<Vec<DockedMode>, KernelError> {
    if candidates.is_empty() {
        return Err(KernelError::EmptyCandidates);
    }
    let frame = LigandFrame::new(ligand);
    let types = ligand.types();
    let heavy = ligand.heavy_mask();

    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| candidates[i].1.total_cmp(&candidates[j].1));
    let best_energy = candidates[order[0]].1;

    let mut kept: Vec<(f64, Vec<[f64; 3]>)> = Vec::new();
    for &i in &order {
        let (pose, energy) = &candidates[i];
        if kept.len() >= config.num_modes || *energy > best_energy + config.energy_range {
            break;
        }
        let coords: Vec<[f64; 3]> = frame
            .pose_coordinates(pose)?
            .iter()
            .map(|p| [p.x, p.y, p.z])
            .collect();
        let mut distinct = true;
        for (_, other) in &kept {
            if rmsd_lb(&coords, other, &types, &heavy)? < config.rmsd_dedup {
                distinct = false;
                break;
            }
        }
        if distinct {
            kept.push((*energy, coords));
        }
    }

    let reference = kept[0].1.clone();
    kept.iter()
        .enumerate()
        .map(|(k, (energy, coords))| {
            let (lb, ub) = if k == 0 {
                (0.0, 0.0)
            } else {
                (
                    rmsd_lb(coords, &reference, &types, &heavy)?,
                    rmsd_ub(coords, &reference, &heavy)?,
                )
            };
            Ok(DockedMode {
                mode_index: k + 1,
                energy: round_to(*energy, 1),
                rmsd_lb: round_to(lb, 3),
                rmsd_ub: round_to(ub, 3),
                atoms: ligand
                    .atoms
                    .iter()
                    .zip(coords)
                    .map(|(a, p)| a.with_position(p.map(|c| round_to(c, 3))))
                    .collect(),
                passthrough: ligand.structure.clone(),
            })
        })
        .collect()
}
