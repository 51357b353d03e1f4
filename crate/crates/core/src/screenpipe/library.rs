use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{LigandSource, ScreenError};

fn ligand_id(path: &Path) -> Option<String> {
    path.file_stem().map(|s| s.to_string_lossy().into_owned())
}

fn walk(dir: &Path, found: &mut Vec<PathBuf>) -> Result<(), ScreenError> {
    let entries = fs::read_dir(dir).map_err(|e| ScreenError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| ScreenError::io(dir, e))?.path();
        if path.is_dir() {
            walk(&path, found)?;
        } else if path.extension().is_some_and(|e| e == "pdbqt") {
            found.push(path);
        }
    }
    Ok(())
}

/// Lists the library as `(ligand_id, path)` sorted by id. The id is the file
/// stem, so two files with the same stem anywhere in the tree collide.
pub fn ingest_library(source: &LigandSource) -> Result<Vec<(String, PathBuf)>, ScreenError> {
    let paths = match source {
        LigandSource::Dir(dir) => {
            if !dir.is_dir() {
                return Err(ScreenError::InvalidConfig(format!(
                    "ligand directory {} does not exist",
                    dir.display()
                )));
            }
            let mut found = Vec::new();
            walk(dir, &mut found)?;
            found
        }
        LigandSource::ListFile(list) => {
            let text = fs::read_to_string(list).map_err(|e| ScreenError::io(list, e))?;
            let base = list.parent().unwrap_or(Path::new(""));
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| base.join(l))
                .collect()
        }
    };
    let mut seen: HashMap<String, PathBuf> = HashMap::new();
    let mut library = Vec::with_capacity(paths.len());
    for path in paths {
        let Some(id) = ligand_id(&path) else { continue };
        if let Some(first) = seen.insert(id.clone(), path.clone()) {
            return Err(ScreenError::DuplicateLigandId {
                id,
                first,
                second: path,
            });
        }
        library.push((id, path));
    }
    if library.is_empty() {
        return Err(ScreenError::EmptyLibrary);
    }
    library.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(library)
}
