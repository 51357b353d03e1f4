use std::collections::HashMap;

use nalgebra::{Unit, UnitQuaternion, Vector3};

use super::{KernelError, Pose};
use crate::pdbqt::LigandModel;

struct Joint {
    parent: usize,
    child: usize,
    distal: Vec<usize>,
}

/// Reference geometry of a ligand prepared for repeated pose evaluation.
pub struct LigandFrame {
    reference: Vec<Vector3<f64>>,
    centroid: Vector3<f64>,
    joints: Vec<Joint>,
    heavy: Vec<bool>,
}

impl LigandFrame {
    pub fn new(ligand: &LigandModel) -> Self {
        let index: HashMap<i64, usize> = ligand
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (a.serial, i))
            .collect();
        let reference: Vec<Vector3<f64>> = ligand
            .atoms
            .iter()
            .map(|a| Vector3::new(a.x, a.y, a.z))
            .collect();
        let centroid = if reference.is_empty() {
            Vector3::zeros()
        } else {
            reference.iter().sum::<Vector3<f64>>() / reference.len() as f64
        };
        // parse_ligand guarantees both serials exist
        let joints = ligand
            .torsion_tree
            .branches
            .iter()
            .map(|b| Joint {
                parent: index[&b.parent_serial],
                child: index[&b.child_serial],
                distal: b.distal.clone(),
            })
            .collect();
        LigandFrame {
            reference,
            centroid,
            joints,
            heavy: ligand.heavy_mask(),
        }
    }

    pub fn atom_count(&self) -> usize {
        self.reference.len()
    }

    pub fn torsion_count(&self) -> usize {
        self.joints.len()
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.centroid
    }

    pub fn heavy_mask(&self) -> &[bool] {
        &self.heavy
    }

    /// Sum of distal-set sizes: atoms moved per full torsion sweep.
    pub(crate) fn distal_total(&self) -> usize {
        self.joints.iter().map(|j| j.distal.len()).sum()
    }

    pub fn pose_coordinates(&self, pose: &Pose) -> Result<Vec<Vector3<f64>>, KernelError> {
        if pose.torsions.len() != self.joints.len() {
            return Err(KernelError::DimensionMismatch {
                expected: self.joints.len(),
                got: pose.torsions.len(),
            });
        }
        let mut pts = self.reference.clone();
        // Parents first, so a nested joint turns about its already-moved axis.
        for (joint, &angle) in self.joints.iter().zip(&pose.torsions) {
            if angle == 0.0 {
                continue;
            }
            let pivot = pts[joint.child];
            let axis = pivot - pts[joint.parent];
            if axis.norm() == 0.0 {
                continue;
            }
            let rot = UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), angle);
            for &i in &joint.distal {
                pts[i] = pivot + rot * (pts[i] - pivot);
            }
        }
        if pose.orientation == UnitQuaternion::identity() {
            for p in &mut pts {
                *p += pose.translation;
            }
        } else {
            let shift = self.centroid + pose.translation;
            for p in &mut pts {
                *p = pose.orientation * (*p - self.centroid) + shift;
            }
        }
        Ok(pts)
    }
}

/// Forward kinematics: torsions applied along the tree, then the whole
/// ligand rotated about its reference centroid and translated.
pub fn apply_pose(ligand: &LigandModel, pose: &Pose) -> Result<Vec<[f64; 3]>, KernelError> {
    let pts = LigandFrame::new(ligand).pose_coordinates(pose)?;
    Ok(pts.iter().map(|p| [p.x, p.y, p.z]).collect())
}
