//! Dataset discovery over the documented layout:
//! `<root>/<split>/{originals,masks,inpainted}/<stem>.<ext>`, triples
//! matched by stem across the three directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const IMAGE_EXTS: [&str; 6] = ["png", "pgm", "ppm", "pbm", "pnm", "pgm16"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetTriple {
    pub split: String,
    pub stem: String,
    pub original: PathBuf,
    pub mask: PathBuf,
    pub inpainted: PathBuf,
}

/// A triple that could not be assembled, with the reason.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SkippedEntry {
    pub split: String,
    pub stem: String,
    pub reason: String,
}

fn stems_of(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        if !IMAGE_EXTS.contains(&ext.as_str()) {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.insert(stem.to_string(), path.clone());
        }
    }
    Ok(out)
}

/// Discover all triples under a dataset root, deterministically ordered by
/// (split, stem). Incomplete triples are reported, not fatal.
pub fn discover(root: &Path) -> Result<(Vec<DatasetTriple>, Vec<SkippedEntry>)> {
    let mut splits = Vec::new();
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if entry.path().is_dir() {
            splits.push(entry.path());
        }
    }
    splits.sort();
    let mut triples = Vec::new();
    let mut skipped = Vec::new();
    for split_dir in splits {
        let split = split_dir
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let originals = stems_of(&split_dir.join("originals")).unwrap_or_default();
        let masks = stems_of(&split_dir.join("masks")).unwrap_or_default();
        let inpainted = stems_of(&split_dir.join("inpainted")).unwrap_or_default();
        let mut all_stems: Vec<&String> = originals
            .keys()
            .chain(masks.keys())
            .chain(inpainted.keys())
            .collect();
        all_stems.sort();
        all_stems.dedup();
        for stem in all_stems {
            match (originals.get(stem), masks.get(stem), inpainted.get(stem)) {
                (Some(o), Some(m), Some(i)) => triples.push(DatasetTriple {
                    split: split.clone(),
                    stem: stem.clone(),
                    original: o.clone(),
                    mask: m.clone(),
                    inpainted: i.clone(),
                }),
                (o, m, i) => {
                    let mut missing = Vec::new();
                    if o.is_none() {
                        missing.push("originals");
                    }
                    if m.is_none() {
                        missing.push("masks");
                    }
                    if i.is_none() {
                        missing.push("inpainted");
                    }
                    skipped.push(SkippedEntry {
                        split: split.clone(),
                        stem: stem.clone(),
                        reason: format!("missing in {}", missing.join(", ")),
                    });
                }
            }
        }
    }
    Ok((triples, skipped))
}

/// Candidate file for a triple under a mirror layout
/// `<dir>/<split>/<stem>.<ext>`.
pub fn candidate_path_for(dir: &Path, triple: &DatasetTriple) -> Option<PathBuf> {
    for ext in IMAGE_EXTS {
        let p = dir
            .join(&triple.split)
            .join(format!("{}.{}", triple.stem, ext));
        if p.is_file() {
            return Some(p);
        }
    }
    None
}
