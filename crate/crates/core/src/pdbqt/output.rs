use super::record::{format_atom_line, parse_atom_line};
use super::{
    is_atom_line, keyword, AtomRecord, DockedMode, LigandModel, MultiModelOutput, PassthroughLine,
    PdbqtError,
};

const RESULT_TAG: &str = "REMARK VINA RESULT:";

pub fn format_result_remark(energy: f64, rmsd_lb: f64, rmsd_ub: f64) -> String {
    format!("{RESULT_TAG}{energy:>10.1} {rmsd_lb:>10.3} {rmsd_ub:>10.3}")
}

pub(crate) fn push_interleaved(out: &mut String, atoms: &[AtomRecord], extra: &[PassthroughLine]) {
    let mut extra = extra.iter().peekable();
    for (i, atom) in atoms.iter().enumerate() {
        while let Some(p) = extra.next_if(|p| p.before_atom <= i) {
            out.push_str(&p.text);
            out.push('\n');
        }
        out.push_str(&format_atom_line(atom));
        out.push('\n');
    }
    for p in extra {
        out.push_str(&p.text);
        out.push('\n');
    }
}

/// Writes a ligand back out with its torsion-tree records in place.
pub fn write_ligand(ligand: &LigandModel) -> String {
    let mut out = String::new();
    push_interleaved(&mut out, &ligand.atoms, &ligand.structure);
    out
}

/// Writes a multi-model docking output in the Vina `out.pdbqt` layout.
pub fn write_output(result: &MultiModelOutput) -> Result<String, PdbqtError> {
    result.validate()?;
    let mut out = String::new();
    for mode in &result.modes {
        out.push_str(&format!("MODEL {}\n", mode.mode_index));
        out.push_str(&format_result_remark(mode.energy, mode.rmsd_lb, mode.rmsd_ub));
        out.push('\n');
        push_interleaved(&mut out, &mode.atoms, &mode.passthrough);
        out.push_str("ENDMDL\n");
    }
    Ok(out)
}

struct Pending {
    index: usize,
    line: usize,
    result: Option<(f64, f64, f64)>,
    mode: DockedMode,
}

fn parse_remark(line: &str, line_no: usize) -> Result<(f64, f64, f64), PdbqtError> {
    let nums: Vec<f64> = line[RESULT_TAG.len()..]
        .split_whitespace()
        .take(3)
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| PdbqtError::MalformedRecord {
            line: line_no,
            reason: "REMARK VINA RESULT fields are not numbers".into(),
        })?;
    match nums[..] {
        [e, lb, ub] => Ok((e, lb, ub)),
        _ => Err(PdbqtError::MalformedRecord {
            line: line_no,
            reason: "REMARK VINA RESULT needs three numbers".into(),
        }),
    }
}

/// Reads a multi-model output. Lines inside a MODEL block that are neither
/// atoms nor the VINA RESULT remark are kept verbatim.
pub fn parse_output(ligand_id: &str, text: &str) -> Result<MultiModelOutput, PdbqtError> {
    let mut modes: Vec<DockedMode> = Vec::new();
    let mut current: Option<Pending> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end();
        match current.as_mut() {
            None => {
                if keyword(line) == "MODEL" {
                    let index: usize = line
                        .split_whitespace()
                        .nth(1)
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| PdbqtError::MalformedRecord {
                            line: line_no,
                            reason: "MODEL needs a positive index".into(),
                        })?;
                    if index != modes.len() + 1 {
                        return Err(PdbqtError::MalformedRecord {
                            line: line_no,
                            reason: format!("expected MODEL {}, found MODEL {index}", modes.len() + 1),
                        });
                    }
                    current = Some(Pending {
                        index,
                        line: line_no,
                        result: None,
                        mode: DockedMode {
                            mode_index: index,
                            energy: 0.0,
                            rmsd_lb: 0.0,
                            rmsd_ub: 0.0,
                            atoms: Vec::new(),
                            passthrough: Vec::new(),
                        },
                    });
                }
                // anything between models is ignored
            }
            Some(p) => {
                if keyword(line) == "ENDMDL" {
                    let p = current.take().expect("open model");
                    let (energy, rmsd_lb, rmsd_ub) = p
                        .result
                        .ok_or(PdbqtError::MissingResultRemark { model: p.index })?;
                    modes.push(DockedMode {
                        energy,
                        rmsd_lb,
                        rmsd_ub,
                        ..p.mode
                    });
                } else if is_atom_line(line) {
                    p.mode.atoms.push(parse_atom_line(line, line_no)?);
                } else if line.starts_with(RESULT_TAG) && p.result.is_none() {
                    p.result = Some(parse_remark(line, line_no)?);
                } else if keyword(line) == "MODEL" {
                    return Err(PdbqtError::MalformedRecord {
                        line: line_no,
                        reason: format!("MODEL inside unterminated MODEL {}", p.index),
                    });
                } else {
                    p.mode.passthrough.push(PassthroughLine {
                        before_atom: p.mode.atoms.len(),
                        text: line.to_string(),
                    });
                }
            }
        }
    }
    if let Some(p) = current {
        return Err(PdbqtError::MalformedRecord {
            line: p.line,
            reason: format!("MODEL {} has no ENDMDL", p.index),
        });
    }
    if modes.is_empty() {
        return Err(PdbqtError::MalformedRecord {
            line: 0,
            reason: "no MODEL blocks".into(),
        });
    }
    Ok(MultiModelOutput {
        ligand_id: ligand_id.to_string(),
        modes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(serial: i64, x: f64) -> AtomRecord {
        AtomRecord {
            hetatm: false,
            serial,
            name: format!("C{serial}"),
            residue_name: "LIG".into(),
            chain: 'A',
            residue_seq: 1,
            x,
            y: -2.5,
            z: 0.125,
            occupancy: 1.0,
            temp_factor: 0.0,
            partial_charge: -0.25,
            autodock_type: "C".into(),
        }
    }

    fn mode(index: usize, energy: f64, lb: f64, ub: f64) -> DockedMode {
        DockedMode {
            mode_index: index,
            energy,
            rmsd_lb: lb,
            rmsd_ub: ub,
            atoms: vec![atom(1, 1.0), atom(2, 2.5)],
            passthrough: vec![
                PassthroughLine {
                    before_atom: 0,
                    text: "ROOT".into(),
                },
                PassthroughLine {
                    before_atom: 2,
                    text: "ENDROOT".into(),
                },
                PassthroughLine {
                    before_atom: 2,
                    text: "TORSDOF 0".into(),
                },
            ],
        }
    }

    #[test]
    fn remark_line_layout() {
        let out = MultiModelOutput {
            ligand_id: "lig".into(),
            modes: vec![mode(1, -9.1, 0.0, 0.0)],
        };
        let text = write_output(&out).unwrap();
        assert!(text
            .lines()
            .any(|l| l == "REMARK VINA RESULT:      -9.1      0.000      0.000"));
        let back = parse_output("lig", &text).unwrap();
        assert_eq!(back.modes[0].energy, -9.1);
        assert_eq!((back.modes[0].rmsd_lb, back.modes[0].rmsd_ub), (0.0, 0.0));
        assert_eq!(back, out);
    }

    #[test]
    fn two_models_keep_order() {
        let out = MultiModelOutput {
            ligand_id: "lig".into(),
            modes: vec![mode(1, -9.1, 0.0, 0.0), mode(2, -8.2, 1.234, 2.5)],
        };
        let back = parse_output("lig", &write_output(&out).unwrap()).unwrap();
        let energies: Vec<_> = back.modes.iter().map(|m| m.energy).collect();
        let idx: Vec<_> = back.modes.iter().map(|m| m.mode_index).collect();
        assert_eq!(energies, vec![-9.1, -8.2]);
        assert_eq!(idx, vec![1, 2]);
    }

    #[test]
    fn unsorted_modes_are_rejected() {
        let out = MultiModelOutput {
            ligand_id: "lig".into(),
            modes: vec![mode(1, -7.0, 0.0, 0.0), mode(2, -9.0, 1.0, 2.0)],
        };
        assert!(matches!(
            write_output(&out),
            Err(PdbqtError::InvariantViolation(_))
        ));
    }

    #[test]
    fn nonzero_first_rmsd_is_rejected() {
        let out = MultiModelOutput {
            ligand_id: "lig".into(),
            modes: vec![mode(1, -7.0, 0.5, 0.5)],
        };
        assert!(matches!(
            write_output(&out),
            Err(PdbqtError::InvariantViolation(_))
        ));
    }

    #[test]
    fn missing_remark() {
        let text = "MODEL 1\nATOM      1  C1  LIG A   1       1.000  -2.500   0.125  1.00  0.00    -0.250 C \nENDMDL\n";
        assert_eq!(
            parse_output("x", text),
            Err(PdbqtError::MissingResultRemark { model: 1 })
        );
    }

    #[test]
    fn reads_real_vina_layout() {
        let text = "\
MODEL 1
REMARK VINA RESULT:    -6.4      0.000      0.000
REMARK INTER + INTRA:          -8.431
REMARK  1 active torsions:
ROOT
ATOM      1  C1  LIG A   1       1.000  -2.500   0.125  1.00  0.00    -0.250 C
ENDROOT
TORSDOF 1
ENDMDL
MODEL 2
REMARK VINA RESULT:    -6.1      1.718      2.044
ROOT
ATOM      1  C1  LIG A   1       1.200  -2.500   0.125  1.00  0.00    -0.250 C
ENDROOT
TORSDOF 1
ENDMDL
";
        let out = parse_output("v", text).unwrap();
        assert_eq!(out.modes.len(), 2);
        assert_eq!(out.modes[1].rmsd_ub, 2.044);
        assert_eq!(out.modes[0].passthrough[0].text, "REMARK INTER + INTRA:          -8.431");
        // unknown remarks survive a rewrite
        let again = parse_output("v", &write_output(&out).unwrap()).unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn model_indices_must_be_consecutive() {
        let text = "MODEL 2\nREMARK VINA RESULT:    -6.4      0.000      0.000\nENDMDL\n";
        assert!(matches!(
            parse_output("x", text),
            Err(PdbqtError::MalformedRecord { .. })
        ));
    }
}
