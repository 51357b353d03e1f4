//! Reader and writer for PDBQT ligand, receptor and multi-model docking output files.
//!
//! ATOM/HETATM records use the PDB fixed-column layout with the PDBQT
//! partial-charge (columns 67-76) and AutoDock type (columns 78-79) extension.

mod ligand;
mod output;
mod record;

pub use ligand::{parse_ligand, parse_receptor};
pub use output::{format_result_remark, parse_output, write_ligand, write_output};
pub use record::{format_atom_line, parse_atom_line};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PdbqtError {
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: BRANCH {parent} {child} is not closed by a matching ENDBRANCH")]
    UnbalancedBranch { line: usize, parent: i64, child: i64 },
    #[error("ligand has no ROOT block")]
    MissingRoot,
    #[error("line {line}: receptor contains water (residue HOH); strip waters before docking")]
    WaterPresent { line: usize },
    #[error("MODEL {model} has no REMARK VINA RESULT line")]
    MissingResultRemark { model: usize },
    #[error("invalid torsion tree: {0}")]
    InvalidTree(String),
    #[error("output invariant violated: {0}")]
    InvariantViolation(String),
}

/// One ATOM/HETATM record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomRecord {
    pub hetatm: bool,
    pub serial: i64,
    pub name: String,
    pub residue_name: String,
    pub chain: char,
    pub residue_seq: i64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Kept only so outputs round-trip; docking ignores it.
    pub occupancy: f64,
    pub temp_factor: f64,
    pub partial_charge: f64,
    pub autodock_type: String,
}

impl AtomRecord {
    /// Heavy atoms are everything except the AutoDock hydrogen types `H` and `HD`.
    pub fn is_heavy(&self) -> bool {
        is_heavy_type(&self.autodock_type)
    }

    pub fn position(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn with_position(&self, p: [f64; 3]) -> Self {
        AtomRecord {
            x: p[0],
            y: p[1],
            z: p[2],
            ..self.clone()
        }
    }
}

pub fn is_heavy_type(autodock_type: &str) -> bool {
    autodock_type != "H" && autodock_type != "HD"
}

/// A rotatable bond: atoms in `distal` turn about the axis `parent_serial -> child_serial`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub parent_serial: i64,
    pub child_serial: i64,
    /// Indices (into the atom list) of every atom inside this BRANCH block, nested blocks included.
    pub distal: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TorsionTree {
    pub root_atoms: Vec<usize>,
    /// Pre-order: a branch always comes after the branch that encloses it.
    pub branches: Vec<Branch>,
    pub torsdof: u32,
}

/// A line that is not an atom record, kept verbatim together with the index
/// of the atom it precedes so writers can put it back in place.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PassthroughLine {
    pub before_atom: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LigandModel {
    pub id: String,
    pub atoms: Vec<AtomRecord>,
    pub torsion_tree: TorsionTree,
    /// ROOT/ENDROOT/BRANCH/ENDBRANCH/TORSDOF lines in file order.
    pub structure: Vec<PassthroughLine>,
}

impl LigandModel {
    pub fn heavy_mask(&self) -> Vec<bool> {
        self.atoms.iter().map(AtomRecord::is_heavy).collect()
    }

    pub fn heavy_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.is_heavy()).count()
    }

    pub fn coordinates(&self) -> Vec<[f64; 3]> {
        self.atoms.iter().map(AtomRecord::position).collect()
    }

    pub fn types(&self) -> Vec<&str> {
        self.atoms.iter().map(|a| a.autodock_type.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReceptorModel {
    pub id: String,
    pub atoms: Vec<AtomRecord>,
}

/// One binding mode of a docking result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DockedMode {
    pub mode_index: usize,
    /// kcal/mol, lower is better.
    pub energy: f64,
    pub rmsd_lb: f64,
    pub rmsd_ub: f64,
    pub atoms: Vec<AtomRecord>,
    /// Non-atom lines of the MODEL block other than the VINA RESULT remark.
    pub passthrough: Vec<PassthroughLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiModelOutput {
    pub ligand_id: String,
    pub modes: Vec<DockedMode>,
}

impl MultiModelOutput {
    pub fn best_energy(&self) -> Option<f64> {
        self.modes.first().map(|m| m.energy)
    }

    /// Checks the ordering and RMSD rules every written output must satisfy.
    pub fn validate(&self) -> Result<(), PdbqtError> {
        let fail = |msg: String| Err(PdbqtError::InvariantViolation(msg));
        if self.modes.is_empty() {
            return fail("output has no modes".into());
        }
        for (i, mode) in self.modes.iter().enumerate() {
            if mode.mode_index != i + 1 {
                return fail(format!(
                    "mode at position {} has index {}",
                    i + 1,
                    mode.mode_index
                ));
            }
            if !mode.energy.is_finite() {
                return fail(format!("mode {} energy is not finite", mode.mode_index));
            }
            if !(mode.rmsd_lb >= 0.0 && mode.rmsd_lb <= mode.rmsd_ub) {
                return fail(format!(
                    "mode {} needs 0 <= rmsd_lb <= rmsd_ub, got {} / {}",
                    mode.mode_index, mode.rmsd_lb, mode.rmsd_ub
                ));
            }
        }
        let first = &self.modes[0];
        if first.rmsd_lb != 0.0 || first.rmsd_ub != 0.0 {
            return fail("mode 1 must have zero RMSD".into());
        }
        if let Some(w) = self.modes.windows(2).find(|w| w[1].energy < w[0].energy) {
            return fail(format!(
                "modes not sorted by energy: {} after {}",
                w[1].energy, w[0].energy
            ));
        }
        Ok(())
    }
}

/// Splits a structural record into keyword and integer arguments, e.g. `BRANCH 2 5`.
pub(crate) fn keyword(line: &str) -> &str {
    line.split_whitespace().next().unwrap_or("")
}

pub(crate) fn is_atom_line(line: &str) -> bool {
    line.starts_with("ATOM") || line.starts_with("HETATM")
}
