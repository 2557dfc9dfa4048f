//! CSV writers. All files use LF line endings; trajectory files carry
//! shortest round-trip representations so norms can be recomputed exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Coupling, SpaceTimeGrid};
use crate::hilbert::{SpaceTimeField, StateSpace};
use crate::solver::Trajectory;

pub const SUMMARY_HEADER: &str = "epsilon,N_iter,norm_yT,abs_zT,norm_v";

/// One row of the results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub epsilon: f64,
    pub n_iter: usize,
    pub norm_y_final: f64,
    pub abs_z_final: f64,
    pub norm_control: f64,
}

/// Six significant digits.
pub fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            sig6(r.epsilon),
            r.n_iter,
            sig6(r.norm_y_final),
            sig6(r.abs_z_final),
            sig6(r.norm_control)
        );
    }
    s
}

pub fn emit_summary(rows: &[SummaryRow], path: &Path) -> Result<()> {
    write_file(path, &format_summary(rows))
}

/// Inverse of [`format_summary`].
pub fn parse_summary(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(SUMMARY_HEADER) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "missing summary header".into(),
        });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |column: usize, message: String| Error::Parse {
                line: i + 2,
                column,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(bad(1, format!("expected 5 fields, found {}", fields.len())));
            }
            let num = |k: usize| -> Result<f64> {
                fields[k]
                    .parse()
                    .map_err(|e| bad(k + 1, format!("`{}`: {e}", fields[k])))
            };
            Ok(SummaryRow {
                epsilon: num(0)?,
                n_iter: fields[1]
                    .parse()
                    .map_err(|e| bad(2, format!("`{}`: {e}", fields[1])))?,
                norm_y_final: num(2)?,
                abs_z_final: num(3)?,
                norm_control: num(4)?,
            })
        })
        .collect()
}

/// Writes `text`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Control values on the masked nodes: header `t,<node indices>`, one row per level.
pub fn format_control(v: &SpaceTimeField, nodes: &[usize], grid: &SpaceTimeGrid) -> String {
    let mut s = String::from("t");
    for j in nodes {
        let _ = write!(s, ",{j}");
    }
    s.push('\n');
    for n in 0..grid.levels() {
        let _ = write!(s, "{}", grid.t(n));
        for &j in nodes {
            let _ = write!(s, ",{}", v[[n, j]]);
        }
        s.push('\n');
    }
    s
}

/// `(Nt+1) x (Nx+1)` field with a leading time column; header `t,x_0,...`.
pub fn format_state_y(traj: &Trajectory) -> String {
    let grid = traj.grid();
    let mut s = String::from("t");
    for x in grid.xs() {
        let _ = write!(s, ",{x}");
    }
    s.push('\n');
    for (n, state) in traj.states.iter().enumerate() {
        let _ = write!(s, "{}", grid.t(n));
        for y in &state.y {
            let _ = write!(s, ",{y}");
        }
        s.push('\n');
    }
    s
}

pub fn format_state_z(traj: &Trajectory) -> String {
    let grid = traj.grid();
    let mut s = String::from("t,z\n");
    for (n, state) in traj.states.iter().enumerate() {
        let _ = writeln!(s, "{},{}", grid.t(n), state.z);
    }
    s
}

/// Per-level `||y(t)||_{L^2}`, `|z(t)|` and the weighted state norm.
pub fn format_norms_over_time(traj: &Trajectory, coupling: &Coupling) -> String {
    let grid = traj.grid();
    let space = StateSpace::new(grid, coupling);
    let mut s = String::from("t,norm_y,abs_z,h_norm\n");
    for (n, state) in traj.states.iter().enumerate() {
        let ny = space.field_norm(&state.y);
        let h = (ny * ny + coupling.ode_weight() * state.z * state.z).sqrt();
        let _ = writeln!(s, "{},{},{},{}", grid.t(n), ny, state.z.abs(), h);
    }
    s
}

/// Two-column `t,u` file.
pub fn format_series(name: &str, values: &[f64], grid: &SpaceTimeGrid) -> String {
    let mut s = format!("t,{name}\n");
    for (n, v) in values.iter().enumerate() {
        let _ = writeln!(s, "{},{}", grid.t(n), v);
    }
    s
}
