//! Helpers shared by the CLI test suites. Each suite uses a subset, so the
//! module as a whole allows dead code.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn regimes() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regimes"))
}

/// Run the binary in `dir`, requiring success, and return stdout.
pub fn run_ok(dir: &Path, args: &[&str]) -> String {
    let output = capture(dir, args);
    assert!(
        output.status.success(),
        "`regimes {}` failed with {:?}\nstderr: {}",
        args.join(" "),
        output.status.code(),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("stdout is utf-8")
}

/// Run the binary in `dir`, requiring failure, and return (code, stderr).
pub fn run_err(dir: &Path, args: &[&str]) -> (i32, String) {
    let output = capture(dir, args);
    assert!(
        !output.status.success(),
        "`regimes {}` unexpectedly succeeded",
        args.join(" ")
    );
    let code = output.status.code().expect("exit code");
    (code, String::from_utf8_lossy(&output.stderr).into_owned())
}

fn capture(dir: &Path, args: &[&str]) -> Output {
    regimes()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// The single run directory under `out_root`.
pub fn run_dir(out_root: &Path) -> PathBuf {
    let mut dirs: Vec<PathBuf> = fs::read_dir(out_root)
        .expect("output root exists")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.is_dir())
        .collect();
    assert_eq!(dirs.len(), 1, "expected one run dir in {}", out_root.display());
    dirs.pop().expect("one run dir")
}

/// Every file under `root`, keyed by relative path, as raw bytes.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    collect(root, root, &mut files);
    files
}

fn collect(root: &Path, dir: &Path, files: &mut BTreeMap<PathBuf, Vec<u8>>) {
    for entry in fs::read_dir(dir).expect("directory is readable") {
        let path = entry.expect("dir entry").path();
        if path.is_dir() {
            collect(root, &path, files);
        } else {
            let rel = path.strip_prefix(root).expect("path under root").to_path_buf();
            files.insert(rel, fs::read(&path).expect("file is readable"));
        }
    }
}

/// Parse a `date,regime` CSV into date -> regime.
pub fn read_regimes(path: &Path) -> BTreeMap<String, usize> {
    let text = fs::read_to_string(path).expect("regime file is readable");
    let mut rows = BTreeMap::new();
    for line in text.lines().skip(1) {
        let (date, regime) = line.split_once(',').expect("two columns");
        rows.insert(date.to_string(), regime.parse().expect("regime id"));
    }
    rows
}

/// Parse a CSV with a header into rows of column -> cell.
pub fn read_table(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).expect("table is readable");
    let mut lines = text.lines();
    let headers: Vec<&str> = lines.next().expect("header row").split(',').collect();
    lines
        .map(|line| {
            headers
                .iter()
                .zip(line.split(','))
                .map(|(h, cell)| (h.to_string(), cell.to_string()))
                .collect()
        })
        .collect()
}
