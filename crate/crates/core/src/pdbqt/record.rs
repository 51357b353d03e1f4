use super::{AtomRecord, PdbqtError};

/// 1-based inclusive column range of a padded line.
fn cols(line: &str, start: usize, end: usize) -> &str {
    &line[start - 1..end]
}

fn malformed(line: usize, reason: impl Into<String>) -> PdbqtError {
    PdbqtError::MalformedRecord {
        line,
        reason: reason.into(),
    }
}

fn real(line_no: usize, field: &str, text: &str) -> Result<f64, PdbqtError> {
    let t = text.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| malformed(line_no, format!("{field} {t:?} is not a number")))?;
    if !v.is_finite() {
        return Err(malformed(line_no, format!("{field} is not finite")));
    }
    Ok(v)
}

fn optional_real(line_no: usize, field: &str, text: &str) -> Result<f64, PdbqtError> {
    if text.trim().is_empty() {
        Ok(0.0)
    } else {
        real(line_no, field, text)
    }
}

fn integer(line_no: usize, field: &str, text: &str, required: bool) -> Result<i64, PdbqtError> {
    let t = text.trim();
    if t.is_empty() && !required {
        return Ok(0);
    }
    t.parse()
        .map_err(|_| malformed(line_no, format!("{field} {t:?} is not an integer")))
}

/// Parses one ATOM/HETATM line. `line_no` is only used for diagnostics.
pub fn parse_atom_line(line: &str, line_no: usize) -> Result<AtomRecord, PdbqtError> {
    if !line.is_ascii() {
        return Err(malformed(line_no, "non-ASCII characters in atom record"));
    }
    let hetatm = if line.starts_with("HETATM") {
        true
    } else if line.starts_with("ATOM") {
        false
    } else {
        return Err(malformed(line_no, "not an ATOM/HETATM record"));
    };
    let trimmed = line.trim_end_matches(['\r', '\n']);
    if trimmed.trim_end().len() < 54 {
        return Err(malformed(line_no, "atom record shorter than the coordinate columns"));
    }
    let padded = format!("{trimmed:<80}");
    let p = padded.as_str();

    let autodock_type = cols(p, 78, 79).trim().to_string();
    if autodock_type.is_empty() {
        return Err(malformed(line_no, "missing AutoDock atom type (columns 78-79)"));
    }
    Ok(AtomRecord {
        hetatm,
        serial: integer(line_no, "serial", cols(p, 7, 11), true)?,
        name: cols(p, 13, 16).trim().to_string(),
        residue_name: cols(p, 18, 20).trim().to_string(),
        chain: p.as_bytes()[21] as char,
        residue_seq: integer(line_no, "residue sequence", cols(p, 23, 26), false)?,
        x: real(line_no, "x", cols(p, 31, 38))?,
        y: real(line_no, "y", cols(p, 39, 46))?,
        z: real(line_no, "z", cols(p, 47, 54))?,
        occupancy: optional_real(line_no, "occupancy", cols(p, 55, 60))?,
        temp_factor: optional_real(line_no, "temperature factor", cols(p, 61, 66))?,
        partial_charge: real(line_no, "partial charge", cols(p, 67, 76))?,
        autodock_type,
    })
}

/// Formats an atom in the fixed-column layout (79 characters, no newline).
pub fn format_atom_line(atom: &AtomRecord) -> String {
    let record = if atom.hetatm { "HETATM" } else { "ATOM  " };
    // PDB convention: names shorter than four characters start in column 14.
    let name = if atom.name.len() < 4 {
        format!(" {:<3}", atom.name)
    } else {
        format!("{:<4}", atom.name)
    };
    format!(
        "{record}{:>5} {name} {:>3} {}{:>4}    {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}{:>10.3} {:<2}",
        atom.serial,
        atom.residue_name,
        atom.chain,
        atom.residue_seq,
        atom.x,
        atom.y,
        atom.z,
        atom.occupancy,
        atom.temp_factor,
        atom.partial_charge,
        atom.autodock_type,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str =
        "ATOM      1  C1  LIG A   1      11.280  13.800   2.500  0.00  0.00     0.123 C ";

    #[test]
    fn parses_fixed_columns() {
        let a = parse_atom_line(LINE, 1).unwrap();
        assert_eq!(a.serial, 1);
        assert_eq!(a.name, "C1");
        assert_eq!(a.residue_name, "LIG");
        assert_eq!(a.chain, 'A');
        assert_eq!(a.residue_seq, 1);
        assert_eq!((a.x, a.y, a.z), (11.280, 13.800, 2.500));
        assert_eq!(a.partial_charge, 0.123);
        assert_eq!(a.autodock_type, "C");
        assert!(!a.hetatm);
    }

    #[test]
    fn format_is_bit_exact() {
        let a = parse_atom_line(LINE, 1).unwrap();
        assert_eq!(format_atom_line(&a), LINE);
    }

    #[test]
    fn hetatm_and_two_letter_type() {
        let line =
            "HETATM   12  OA2 UNL     1      -1.005   0.250 -12.125  1.00  0.00    -0.648 OA";
        let a = parse_atom_line(line, 3).unwrap();
        assert!(a.hetatm);
        assert_eq!(a.autodock_type, "OA");
        assert_eq!(a.chain, ' ');
        assert_eq!(a.z, -12.125);
        assert_eq!(format_atom_line(&a), line);
    }

    #[test]
    fn hydrogen_types_are_not_heavy() {
        let mut a = parse_atom_line(LINE, 1).unwrap();
        for (t, heavy) in [("H", false), ("HD", false), ("HS", true), ("C", true), ("N", true)] {
            a.autodock_type = t.into();
            assert_eq!(a.is_heavy(), heavy, "{t}");
        }
    }

    #[test]
    fn rejects_bad_coordinates() {
        let bad = LINE.replace("11.280", "11.2x0");
        assert!(matches!(
            parse_atom_line(&bad, 7),
            Err(PdbqtError::MalformedRecord { line: 7, .. })
        ));
    }

    #[test]
    fn rejects_missing_type_and_short_lines() {
        assert!(parse_atom_line(&LINE[..76], 1).is_err());
        assert!(parse_atom_line("ATOM      1  C1  LIG A   1", 1).is_err());
    }
}
