//! Seeded synthetic receptors and ligand libraries for tests and benchmarks.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dockkern::GridBox;
use crate::pdbqt::{
    format_atom_line, parse_ligand, parse_receptor, write_ligand, AtomRecord, LigandModel,
    ReceptorModel,
};

const HEAVY_TYPES: [&str; 8] = ["C", "C", "A", "N", "OA", "C", "NA", "SA"];
const RESIDUES: [&str; 5] = ["ALA", "ASP", "GLY", "ILE", "THR"];

fn atom(serial: i64, name: &str, residue: &str, seq: i64, p: Vector3<f64>, t: &str) -> AtomRecord {
    let q = |v: f64| (v * 1000.0).round() / 1000.0;
    AtomRecord {
        hetatm: false,
        serial,
        name: name.to_string(),
        residue_name: residue.to_string(),
        chain: 'A',
        residue_seq: seq,
        x: q(p.x),
        y: q(p.y),
        z: q(p.z),
        occupancy: 0.0,
        temp_factor: 0.0,
        partial_charge: 0.0,
        autodock_type: t.to_string(),
    }
}

fn unit_vector(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// A rigid pocket: `atoms` heavy atoms scattered in a shell of radius 8-12 Å
/// around the origin, and a 20 Å box centred on it.
pub fn synthetic_receptor(seed: u64, atoms: usize) -> (ReceptorModel, GridBox) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EC0_0000);
    let mut text = String::new();
    for i in 0..atoms {
        let r = rng.gen_range(8.0..12.0);
        let p = unit_vector(&mut rng) * r;
        let t = ["C", "N", "OA", "C"][i % 4];
        let a = atom(
            i as i64 + 1,
            &format!("{}{}", &t[..1], i % 10),
            RESIDUES[(i / 8) % RESIDUES.len()],
            (i / 8) as i64 + 1,
            p,
            t,
        );
        text.push_str(&format_atom_line(&a));
        text.push('\n');
    }
    let receptor = parse_receptor("synthetic_receptor", &text).expect("generated receptor parses");
    let grid = GridBox::new([0.0; 3], [20.0; 3]).expect("positive box");
    (receptor, grid)
}

/// A chain ligand with `heavy` heavy atoms, `torsions` nested rotatable
/// bonds (clamped to `heavy - 2`), and a polar hydrogen on every fourth heavy atom.
pub fn synthetic_ligand(id: &str, seed: u64, heavy: usize, torsions: usize) -> LigandModel {
    let heavy = heavy.max(1);
    let torsions = torsions.min(heavy.saturating_sub(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut positions = Vec::with_capacity(heavy);
    let mut p = Vector3::zeros();
    let mut dir = unit_vector(&mut rng);
    for _ in 0..heavy {
        positions.push(p);
        dir = (dir + unit_vector(&mut rng) * 0.9).normalize();
        p += dir * 1.5;
    }
    let centroid = positions.iter().sum::<Vector3<f64>>() / heavy as f64;

    // root keeps the first atoms; each branch starts at an evenly spaced chain position
    let root_len = (heavy / (torsions + 1)).max(1).min(heavy - torsions);
    let tail = heavy - root_len;
    let starts: Vec<usize> = (0..torsions).map(|k| root_len + k * tail / torsions).collect();

    let mut lines = vec!["REMARK  synthetic ligand".to_string(), "ROOT".to_string()];
    let mut serial = 0i64;
    let mut heavy_serial = vec![0i64; heavy];
    let mut open: Vec<(i64, i64)> = Vec::new();
    for i in 0..heavy {
        if starts.contains(&i) {
            if i == root_len {
                lines.push("ENDROOT".into());
            }
            let parent = heavy_serial[i - 1];
            let child = serial + 1;
            lines.push(format!("BRANCH {parent:>3} {child:>3}"));
            open.push((parent, child));
        }
        serial += 1;
        heavy_serial[i] = serial;
        let t = HEAVY_TYPES[(i + seed as usize) % HEAVY_TYPES.len()];
        lines.push(format_atom_line(&atom(
            serial,
            &format!("{}{}", &t[..1], i + 1),
            "LIG",
            1,
            positions[i] - centroid,
            t,
        )));
        if i % 4 == 3 {
            serial += 1;
            let h = positions[i] - centroid + unit_vector(&mut rng);
            lines.push(format_atom_line(&atom(serial, &format!("H{}", i + 1), "LIG", 1, h, "HD")));
        }
    }
    if torsions == 0 {
        lines.push("ENDROOT".into());
    }
    while let Some((a, b)) = open.pop() {
        lines.push(format!("ENDBRANCH {a:>3} {b:>3}"));
    }
    lines.push(format!("TORSDOF {torsions}"));
    parse_ligand(id, &lines.join("\n")).expect("generated ligand parses")
}

/// `count` ligands named `lig_0000`, `lig_0001`, ... The first two are the
/// smallest (5 heavy atoms, rigid) and largest (60 heavy atoms, 12 torsions);
/// the rest are drawn uniformly from that range.
pub fn synthetic_library(seed: u64, count: usize) -> Vec<LigandModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let (heavy, torsions) = match i {
                0 => (5, 0),
                1 => (60, 12),
                _ => {
                    let h = rng.gen_range(5..=60);
                    (h, rng.gen_range(0..=12usize.min(h - 2)))
                }
            };
            let lig_seed: u64 = rng.gen();
            synthetic_ligand(&format!("lig_{i:04}"), lig_seed, heavy, torsions)
        })
        .collect()
}

/// Writes each ligand to `<dir>/<id>.pdbqt`.
pub fn write_library(dir: &Path, ligands: &[LigandModel]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    ligands
        .iter()
        .map(|l| {
            let path = dir.join(format!("{}.pdbqt", l.id));
            fs::write(&path, write_ligand(l))?;
            Ok(path)
        })
        .collect()
}

/// Writes the receptor atoms to `path`.
pub fn write_receptor(path: &Path, receptor: &ReceptorModel) -> io::Result<()> {
    let mut text = String::new();
    for a in &receptor.atoms {
        text.push_str(&format_atom_line(a));
        text.push('\n');
    }
    fs::write(path, text)
}
