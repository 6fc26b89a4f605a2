//! Shared helpers for the harness integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

/// Compares `text` with `tests/golden/<name>` byte for byte.
/// Set `MMREC_REGEN_GOLDEN=1` to rewrite the file instead.
pub fn check_golden_text(name: &str, text: &str) -> Result<(), String> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("MMREC_REGEN_GOLDEN").is_some() {
        std::fs::write(&path, text).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("missing golden {}: {e}", path.display()))?;
    if want == text {
        Ok(())
    } else {
        Err(format!("golden {name} differs:\n--- want\n{want}--- got\n{text}"))
    }
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(root, &path, out);
        } else {
            out.push(path.strip_prefix(root).unwrap().to_path_buf());
        }
    }
}

/// Relative paths of every file under `root`, sorted.
pub fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

/// Files that are missing from one tree or differ in content.
pub fn differing_files(a: &Path, b: &Path) -> Vec<PathBuf> {
    let (fa, fb) = (files_under(a), files_under(b));
    let mut out: Vec<PathBuf> = fa.iter().filter(|p| !fb.contains(p)).cloned().collect();
    out.extend(fb.iter().filter(|p| !fa.contains(p)).cloned());
    for p in fa.iter().filter(|p| fb.contains(p)) {
        if std::fs::read(a.join(p)).unwrap() != std::fs::read(b.join(p)).unwrap() {
            out.push(p.clone());
        }
    }
    out
}
