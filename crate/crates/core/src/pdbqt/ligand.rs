use std::collections::{HashMap, HashSet};

use super::record::parse_atom_line;
use super::{
    is_atom_line, keyword, Branch, LigandModel, PassthroughLine, PdbqtError, ReceptorModel,
    TorsionTree,
};

struct OpenBranch {
    index: usize,
    parent: i64,
    child: i64,
    line: usize,
}

fn two_serials(line: &str, line_no: usize) -> Result<(i64, i64), PdbqtError> {
    let mut it = line.split_whitespace().skip(1).map(str::parse::<i64>);
    match (it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b))) => Ok((a, b)),
        _ => Err(PdbqtError::MalformedRecord {
            line: line_no,
            reason: format!("expected two atom serials in {:?}", line.trim()),
        }),
    }
}

/// Parses a ligand with its ROOT/BRANCH torsion tree. REMARK and other
/// unknown records are skipped.
pub fn parse_ligand(id: &str, text: &str) -> Result<LigandModel, PdbqtError> {
    let mut atoms = Vec::new();
    let mut structure = Vec::new();
    let mut root_atoms = Vec::new();
    let mut branches: Vec<Branch> = Vec::new();
    let mut open: Vec<OpenBranch> = Vec::new();
    let mut root_state = None::<bool>; // Some(true) while inside ROOT
    let mut torsdof = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        let keep = |structure: &mut Vec<PassthroughLine>, n: usize| {
            structure.push(PassthroughLine {
                before_atom: n,
                text: line.to_string(),
            })
        };
        if is_atom_line(line) {
            let atom = parse_atom_line(line, line_no)?;
            let index = atoms.len();
            if !open.is_empty() {
                for b in &open {
                    branches[b.index].distal.push(index);
                }
            } else if root_state == Some(true) {
                root_atoms.push(index);
            } else {
                return Err(PdbqtError::MalformedRecord {
                    line: line_no,
                    reason: "atom outside ROOT and BRANCH blocks".into(),
                });
            }
            atoms.push(atom);
            continue;
        }
        match keyword(line) {
            "ROOT" => {
                if root_state.is_some() {
                    return Err(PdbqtError::MalformedRecord {
                        line: line_no,
                        reason: "second ROOT block".into(),
                    });
                }
                root_state = Some(true);
                keep(&mut structure, atoms.len());
            }
            "ENDROOT" => {
                if root_state != Some(true) {
                    return Err(PdbqtError::MalformedRecord {
                        line: line_no,
                        reason: "ENDROOT without ROOT".into(),
                    });
                }
                root_state = Some(false);
                keep(&mut structure, atoms.len());
            }
            "BRANCH" => {
                if root_state != Some(false) {
                    return Err(PdbqtError::MalformedRecord {
                        line: line_no,
                        reason: "BRANCH before the ROOT block is closed".into(),
                    });
                }
                let (parent, child) = two_serials(line, line_no)?;
                open.push(OpenBranch {
                    index: branches.len(),
                    parent,
                    child,
                    line: line_no,
                });
                branches.push(Branch {
                    parent_serial: parent,
                    child_serial: child,
                    distal: Vec::new(),
                });
                keep(&mut structure, atoms.len());
            }
            "ENDBRANCH" => {
                let (parent, child) = two_serials(line, line_no)?;
                match open.pop() {
                    Some(b) if b.parent == parent && b.child == child => {}
                    Some(b) => {
                        return Err(PdbqtError::UnbalancedBranch {
                            line: b.line,
                            parent: b.parent,
                            child: b.child,
                        })
                    }
                    None => {
                        return Err(PdbqtError::MalformedRecord {
                            line: line_no,
                            reason: format!("ENDBRANCH {parent} {child} without BRANCH"),
                        })
                    }
                }
                keep(&mut structure, atoms.len());
            }
            "TORSDOF" => {
                let n = line
                    .split_whitespace()
                    .nth(1)
                    .and_then(|t| t.parse::<u32>().ok())
                    .ok_or_else(|| PdbqtError::MalformedRecord {
                        line: line_no,
                        reason: "TORSDOF needs a non-negative integer".into(),
                    })?;
                torsdof = Some(n);
                keep(&mut structure, atoms.len());
            }
            _ => {}
        }
    }

    if let Some(b) = open.first() {
        return Err(PdbqtError::UnbalancedBranch {
            line: b.line,
            parent: b.parent,
            child: b.child,
        });
    }
    match root_state {
        None => return Err(PdbqtError::MissingRoot),
        Some(true) => {
            return Err(PdbqtError::MalformedRecord {
                line: text.lines().count(),
                reason: "ROOT block never closed".into(),
            })
        }
        Some(false) => {}
    }

    let torsion_tree = TorsionTree {
        root_atoms,
        torsdof: torsdof.unwrap_or(branches.len() as u32),
        branches,
    };
    let model = LigandModel {
        id: id.to_string(),
        atoms,
        torsion_tree,
        structure,
    };
    validate_tree(&model)?;
    Ok(model)
}

fn validate_tree(model: &LigandModel) -> Result<(), PdbqtError> {
    if model.torsion_tree.root_atoms.is_empty() {
        return Err(PdbqtError::InvalidTree("ROOT block has no atoms".into()));
    }
    let mut by_serial = HashMap::new();
    for (i, a) in model.atoms.iter().enumerate() {
        if by_serial.insert(a.serial, i).is_some() {
            return Err(PdbqtError::InvalidTree(format!(
                "duplicate atom serial {}",
                a.serial
            )));
        }
    }
    for b in &model.torsion_tree.branches {
        let parent = *by_serial.get(&b.parent_serial).ok_or_else(|| {
            PdbqtError::InvalidTree(format!("branch parent serial {} not found", b.parent_serial))
        })?;
        let child = *by_serial.get(&b.child_serial).ok_or_else(|| {
            PdbqtError::InvalidTree(format!("branch child serial {} not found", b.child_serial))
        })?;
        let distal: HashSet<usize> = b.distal.iter().copied().collect();
        if distal.contains(&parent) {
            return Err(PdbqtError::InvalidTree(format!(
                "branch {} {} contains its own parent atom",
                b.parent_serial, b.child_serial
            )));
        }
        if !distal.contains(&child) {
            return Err(PdbqtError::InvalidTree(format!(
                "branch {} {} does not contain its child atom",
                b.parent_serial, b.child_serial
            )));
        }
    }
    Ok(())
}

/// Parses a rigid receptor. Torsion records are ignored; waters are rejected
/// because receptor preparation is expected to have removed them.
pub fn parse_receptor(id: &str, text: &str) -> Result<ReceptorModel, PdbqtError> {
    let mut atoms = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if !is_atom_line(line) {
            continue;
        }
        let atom = parse_atom_line(line, i + 1)?;
        if atom.residue_name == "HOH" {
            return Err(PdbqtError::WaterPresent { line: i + 1 });
        }
        atoms.push(atom);
    }
    if atoms.is_empty() {
        return Err(PdbqtError::MalformedRecord {
            line: 0,
            reason: "receptor has no atom records".into(),
        });
    }
    Ok(ReceptorModel {
        id: id.to_string(),
        atoms,
    })
}
