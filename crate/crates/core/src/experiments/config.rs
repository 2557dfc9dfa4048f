//! JSON experiment description.
//!
//! ```json
//! {
//!   "name": "test1",
//!   "mode": "distributed",
//!   "grid": { "length": 1.0, "final_time": 0.6, "nx": 30, "nt": 120 },
//!   "problem": {
//!     "a": "1", "b": "0", "c": "1", "mu": 1.0, "kappa": 1.0,
//!     "omega": [0.3, 0.7], "y0": "-10*sin(pi*x)", "z0": "0"
//!   },
//!   "hum": { "epsilons": [1e-1, 1e-2], "tol": 1e-3, "max_iter": 500,
//!            "f0_y": "0.4*sin(pi*x)", "f0_z": "0" },
//!   "solver": { "theta": 1.0, "adjoint": "discrete" }
//! }
//! ```
//!
//! `a` and `b` are expressions in `x` and `t`, `c` in `t`. `z0` and `f0_z`
//! are evaluated at `x = 0`, so repeating the `y0` expression as `z0` gives
//! `z0 = y0(0)`. In `boundary` mode a `boundary: { "ell": ... }` block is
//! required; `grid.length` and `grid.nx` then describe the extended interval
//! `(0, L)`, `omega` must lie in `(ell, L)`, and `y0`/`z0` are the data on
//! `(0, ell)`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::expr::Expression;
use crate::error::{Error, Result};
use crate::extension::ExtensionConfig;
use crate::grid::{ControlRegion, Coupling, SpaceTimeGrid};
use crate::hilbert::HState;
use crate::hum::HumConfig;
use crate::problem::ProblemData;
use crate::solver::{AdjointMode, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Distributed,
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub length: f64,
    pub final_time: f64,
    pub nx: usize,
    pub nt: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub a: String,
    pub b: String,
    pub c: String,
    pub mu: f64,
    pub kappa: f64,
    pub omega: [f64; 2],
    pub y0: String,
    pub z0: String,
}

fn default_max_iter() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumSpec {
    pub epsilons: Vec<f64>,
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub f0_y: String,
    pub f0_z: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjointSpec {
    Discrete,
    Continuous,
}

impl From<AdjointSpec> for AdjointMode {
    fn from(a: AdjointSpec) -> Self {
        match a {
            AdjointSpec::Discrete => AdjointMode::Discrete,
            AdjointSpec::Continuous => AdjointMode::Continuous,
        }
    }
}

fn default_theta() -> f64 {
    1.0
}

fn default_adjoint() -> AdjointSpec {
    AdjointSpec::Discrete
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_adjoint")]
    pub adjoint: AdjointSpec,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            theta: default_theta(),
            adjoint: default_adjoint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub ell: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub grid: GridSpec,
    pub problem: ProblemSpec,
    pub hum: HumSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates a JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    /// Samples all data on the grid(s).
    pub fn prepare(&self) -> Result<Prepared> {
        let invalid = |m: String| Error::Validation(m);
        let p = &self.problem;
        if !(p.mu * p.kappa > 0.0) {
            return Err(invalid(format!(
                "coupling constants must satisfy mu * kappa > 0 (standing hypothesis on the coupling); got mu = {}, kappa = {}",
                p.mu, p.kappa
            )));
        }
        let h = &self.hum;
        if h.epsilons.is_empty() {
            return Err(invalid("hum.epsilons must not be empty".into()));
        }
        if let Some(eps) = h.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(invalid(format!("hum.epsilons must be positive, got {eps}")));
        }
        if !(h.tol.is_finite() && h.tol > 0.0) {
            return Err(invalid(format!("hum.tol must be positive, got {}", h.tol)));
        }
        if h.max_iter == 0 {
            return Err(invalid("hum.max_iter must be at least 1".into()));
        }

        let g = &self.grid;
        let grid = SpaceTimeGrid::new(g.length, g.final_time, g.nx, g.nt)?;
        let solver = SolverConfig::default()
            .with_theta(self.solver.theta)
            .with_adjoint(self.solver.adjoint.into());
        solver.validate(&grid)?;
        let coupling = Coupling::new(p.mu, p.kappa)?;

        let extension = match (self.mode, &self.boundary) {
            (Mode::Distributed, None) => None,
            (Mode::Distributed, Some(_)) => {
                return Err(invalid(
                    "a boundary block requires mode = \"boundary\"".into(),
                ))
            }
            (Mode::Boundary, None) => {
                return Err(invalid(
                    "mode = \"boundary\" requires a boundary block with ell".into(),
                ))
            }
            (Mode::Boundary, Some(b)) => {
                let cells = b.ell / grid.dx();
                let nx_sub = cells.round();
                if !(nx_sub >= 1.0 && (cells - nx_sub).abs() <= 1e-9 * cells) {
                    return Err(Error::GridMisalignment(format!(
                        "ell = {} is not a node of the extended grid (dx = {})",
                        b.ell,
                        grid.dx()
                    )));
                }
                let ext = ExtensionConfig::new(
                    b.ell,
                    g.length,
                    (p.omega[0], p.omega[1]),
                    nx_sub as usize,
                    g.final_time,
                    g.nt,
                )?;
                debug_assert_eq!(ext.extended_grid().nx(), grid.nx());
                Some(ext)
            }
        };

        let region = ControlRegion::new(p.omega[0], p.omega[1], &grid)?;
        let a = Expression::parse(&p.a)?.function();
        let b = Expression::parse(&p.b)?.function();
        let c = Expression::parse(&p.c)?.function();
        let data = ProblemData::from_fns(&grid, a, b, |t| c(0.0, t), coupling, region)?;

        let initial_grid = extension.as_ref().map_or(&grid, |e| e.original_grid());
        let initial = sample_state(&p.y0, &p.z0, initial_grid, "initial data")?;
        let f0 = sample_state(&h.f0_y, &h.f0_z, &grid, "initial guess f0")?;

        Ok(Prepared {
            grid,
            data,
            initial,
            f0,
            solver,
            extension,
        })
    }

    /// Penalty-independent part of the CG configuration.
    pub fn hum_config(&self, epsilon: f64, f0: &HState) -> HumConfig {
        HumConfig::new(epsilon, self.hum.tol, f0.clone()).with_max_iter(self.hum.max_iter)
    }
}

fn sample_state(y: &str, z: &str, grid: &SpaceTimeGrid, what: &'static str) -> Result<HState> {
    let fy = Expression::parse(y)?.function();
    let z = Expression::parse(z)?.eval(0.0, 0.0);
    let state = HState::from_fn(grid, |x| fy(x, 0.0), z);
    if !state.is_finite() {
        return Err(Error::NonFinite(what));
    }
    Ok(state)
}

/// Sampled data ready for the solvers.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The computational grid (the extended one in boundary mode).
    pub grid: SpaceTimeGrid,
    pub data: ProblemData,
    /// Initial state, on `(0, ell)` in boundary mode.
    pub initial: HState,
    pub f0: HState,
    pub solver: SolverConfig,
    pub extension: Option<ExtensionConfig>,
}
