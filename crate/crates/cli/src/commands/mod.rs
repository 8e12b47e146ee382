mod compare;
mod hist;
mod ood;
mod train;

use std::path::{Path, PathBuf};

use btcp::report::ExperimentReport;

pub use compare::{compare, comparison_rows, ComparisonRow, METRICS};
pub use hist::hist;
pub use ood::ood;
pub use train::{execute, train};

use crate::error::{usage, CliError};

pub const REPORT_FILE: &str = "report.json";

/// `path` itself when it is a file, otherwise every `report.json` below it in
/// sorted order.
pub fn find_reports(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    if !path.is_dir() {
        return Err(usage(format!(
            "no such report or directory: {}",
            path.display()
        )));
    }
    let mut found = Vec::new();
    let mut stack = vec![path.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir)? {
            let p = entry?.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n == REPORT_FILE) {
                found.push(p);
            }
        }
    }
    found.sort();
    Ok(found)
}

pub fn load_report(path: &Path) -> Result<ExperimentReport, CliError> {
    ExperimentReport::load_json(path)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("{}: {e}", path.display())))
}
