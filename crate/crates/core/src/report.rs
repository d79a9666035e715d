//! Machine-readable exports: empowerment heatmap grids and output-file
//! helpers shared by the CLI and the regression suites.

use std::path::Path;

use crate::empowerment::empowerment_deterministic;
use crate::error::Result;
use crate::model::TransitionOperator;

/// Per-cell empowerment (bits) of a gridworld operator at one horizon, as a
/// CSV grid (rows = grid rows). Wall cells still get their self-loop value.
pub fn empowerment_map_csv(
    op: &TransitionOperator,
    width: usize,
    height: usize,
    n: usize,
    mode: usize,
) -> Result<String> {
    let mut out = String::new();
    for r in 0..height {
        let mut row = Vec::with_capacity(width);
        for c in 0..width {
            let bits = empowerment_deterministic(op, r * width + c, n, mode)?;
            row.push(format!("{bits:.6}"));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Writes a file, creating parent directories as needed.
pub fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}
