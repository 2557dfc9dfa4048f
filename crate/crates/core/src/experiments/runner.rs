//! ε-sweeps and the files they produce.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Prepared};
use super::output::{self, SummaryRow};
use super::presets::preset;
use crate::error::Result;
use crate::extension::{boundary_null_control, BoundaryControl, Verification};
use crate::hilbert::StateSpace;
use crate::hum::{HumProblem, HumResult};
use crate::parallel::Execution;

/// Result for one penalty value.
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub hum: HumResult,
    /// Present in boundary mode.
    pub boundary: Option<BoundaryOutcome>,
}

#[derive(Debug, Clone)]
pub struct BoundaryOutcome {
    pub control: BoundaryControl,
    pub verification: Verification,
    /// `||y_ext(T) - y(T)||_{L^2(0, ell)}` between the extended-domain state
    /// and the re-solve with the extracted flux.
    pub restriction_gap: f64,
}

impl SweepEntry {
    /// Table row: distributed-control norms, or the `(0, ell)` re-solve norms
    /// and `||u||_{L^2(0,T)}` in boundary mode.
    pub fn summary_row(&self) -> SummaryRow {
        let (ny, az, nv) = match &self.boundary {
            Some(b) => (
                b.verification.norm_y_final,
                b.verification.abs_z_final,
                b.verification.norm_control,
            ),
            None => {
                let n = &self.hum.norms;
                (n.norm_y_final, n.abs_z_final, n.norm_control)
            }
        };
        SummaryRow {
            epsilon: self.epsilon,
            n_iter: self.hum.iterations,
            norm_y_final: ny,
            abs_z_final: az,
            norm_control: nv,
        }
    }
}

/// Runs every configured penalty value; results keep the configured order.
pub fn sweep(
    cfg: &ExperimentConfig,
    prepared: &Prepared,
    exec: Execution,
) -> Result<Vec<SweepEntry>> {
    let results = exec.map(&cfg.hum.epsilons, |&eps| solve_one(cfg, prepared, eps));
    results.into_iter().collect()
}

fn solve_one(cfg: &ExperimentConfig, p: &Prepared, epsilon: f64) -> Result<SweepEntry> {
    let hum_cfg = cfg.hum_config(epsilon, &p.f0);
    match &p.extension {
        None => {
            let problem = HumProblem::new(&p.grid, &p.data, &p.solver)?;
            let hum = problem.hum_cg(&p.initial, &hum_cfg)?;
            Ok(SweepEntry {
                epsilon,
                hum,
                boundary: None,
            })
        }
        Some(ext) => {
            let run = boundary_null_control(&p.initial, &p.data, ext, &p.solver, &hum_cfg)?;
            let sub = ext.original_grid();
            let space = StateSpace::new(sub, &p.data.coupling);
            let ext_final = &run.hum.final_state.y[..sub.nodes()];
            let diff: Vec<f64> = run
                .verification
                .trajectory
                .last()
                .y
                .iter()
                .zip(ext_final)
                .map(|(a, b)| a - b)
                .collect();
            let outcome = BoundaryOutcome {
                control: run.control,
                verification: run.verification,
                restriction_gap: space.field_norm(&diff),
            };
            Ok(SweepEntry {
                epsilon,
                hum: run.hum,
                boundary: Some(outcome),
            })
        }
    }
}

/// What a run wrote.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<SummaryRow>,
    pub entries: Vec<SweepEntry>,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    /// Penalty values whose CG stopped at `max_iter` without meeting the tolerance.
    pub fn unconverged(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| !e.hum.converged)
            .map(|e| e.epsilon)
            .collect()
    }
}

/// `--out` wins, then the config's `output_dir`, then `out/<name>`.
pub fn resolve_output_dir(cfg: &ExperimentConfig, overridden: Option<&Path>) -> PathBuf {
    overridden
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name))
}

/// Runs the sweep and writes all CSV files into `out_dir`.
///
/// Trajectory-level files (`control.csv`, `state_y.csv`, `state_z.csv`,
/// `norms_over_time.csv`, and in boundary mode `boundary_control.csv`) are
/// written for the smallest penalty value.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    exec: Execution,
) -> Result<RunReport> {
    let prepared = cfg.prepare()?;
    let entries = sweep(cfg, &prepared, exec)?;
    let rows: Vec<SummaryRow> = entries.iter().map(SweepEntry::summary_row).collect();

    let mut files = Vec::new();
    let mut emit = |name: &str, text: &str| -> Result<()> {
        let path = out_dir.join(name);
        output::write_file(&path, text)?;
        files.push(path);
        Ok(())
    };

    emit("summary.csv", &output::format_summary(&rows))?;

    let detail = entries
        .iter()
        .min_by(|a, b| a.epsilon.total_cmp(&b.epsilon))
        .expect("validated configs have at least one epsilon");
    let coupling = &prepared.data.coupling;
    emit(
        "control.csv",
        &output::format_control(
            &detail.hum.control_v,
            &prepared.data.region.nodes(),
            &prepared.grid,
        ),
    )?;
    let shown = match &detail.boundary {
        Some(b) => &b.verification.trajectory,
        None => &detail.hum.controlled,
    };
    emit("state_y.csv", &output::format_state_y(shown))?;
    emit("state_z.csv", &output::format_state_z(shown))?;
    emit(
        "norms_over_time.csv",
        &output::format_norms_over_time(shown, coupling),
    )?;

    if let Some(b) = &detail.boundary {
        emit(
            "boundary_control.csv",
            &output::format_series("u", &b.control.u, shown.grid()),
        )?;
        emit("verification.csv", &format_verification(&entries))?;
    }

    emit("observability.csv", &format_observability(&prepared, exec)?)?;

    let mut resolved = cfg.clone();
    resolved.output_dir = None;
    emit("config.json", &(resolved.to_json() + "\n"))?;

    Ok(RunReport {
        rows,
        entries,
        out_dir: out_dir.to_path_buf(),
        files,
    })
}

/// Samples and seed of the random observability probe written with every run.
pub const PROBE_SAMPLES: usize = 32;
pub const PROBE_SEED: u64 = 0x5eed;

/// Observability ratios of random final data; large values flag weak
/// observability on the chosen grid.
fn format_observability(p: &Prepared, exec: Execution) -> Result<String> {
    let problem = HumProblem::new(&p.grid, &p.data, &p.solver)?;
    let ratios = problem.observability_probe(PROBE_SAMPLES, PROBE_SEED, exec)?;
    let max = ratios.iter().copied().fold(f64::MIN, f64::max);
    let min = ratios.iter().copied().fold(f64::MAX, f64::min);
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(format!(
        "seed,samples,min_ratio,mean_ratio,max_ratio\n{},{},{},{},{}\n",
        PROBE_SEED,
        PROBE_SAMPLES,
        output::sig6(min),
        output::sig6(mean),
        output::sig6(max),
    ))
}

fn format_verification(entries: &[SweepEntry]) -> String {
    let mut s = String::from(
        "epsilon,N_iter,norm_yT,abs_zT,norm_u,ext_norm_yT,ext_abs_zT,ext_norm_v,restriction_gap\n",
    );
    for e in entries {
        let Some(b) = &e.boundary else { continue };
        let v = &b.verification;
        let n = &e.hum.norms;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            output::sig6(e.epsilon),
            e.hum.iterations,
            output::sig6(v.norm_y_final),
            output::sig6(v.abs_z_final),
            output::sig6(v.norm_control),
            output::sig6(n.norm_y_final),
            output::sig6(n.abs_z_final),
            output::sig6(n.norm_control),
            output::sig6(b.restriction_gap),
        );
    }
    s
}

pub fn run_preset(name: &str, out_dir: Option<&Path>, exec: Execution) -> Result<RunReport> {
    let cfg = preset(name)?;
    let dir = resolve_output_dir(&cfg, out_dir);
    run_experiment(&cfg, &dir, exec)
}

pub fn run_config(path: &Path, out_dir: Option<&Path>, exec: Execution) -> Result<RunReport> {
    let cfg = ExperimentConfig::from_file(path)?;
    let dir = resolve_output_dir(&cfg, out_dir);
    run_experiment(&cfg, &dir, exec)
}
