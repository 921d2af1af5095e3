//! Helpers shared by integration test targets.

#![allow(dead_code)]

pub mod dd;

use std::path::Path;

/// Writes `text` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
