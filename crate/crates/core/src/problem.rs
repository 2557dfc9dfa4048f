//! Potentials, coupling constants and control region of one problem instance.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{ControlRegion, Coupling, SpaceTimeGrid};

/// Potentials `a(x, t)`, `b(x, t)`, `c(t)` sampled on a grid, plus coupling and region.
///
/// `a` and `b` are indexed `[time level, node]`, `c` by time level.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub c: Vec<f64>,
    pub coupling: Coupling,
    pub region: ControlRegion,
}

impl ProblemData {
    pub fn new(
        a: Array2<f64>,
        b: Array2<f64>,
        c: Vec<f64>,
        coupling: Coupling,
        region: ControlRegion,
        grid: &SpaceTimeGrid,
    ) -> Result<Self> {
        let data = Self {
            a,
            b,
            c,
            coupling,
            region,
        };
        data.check(grid)?;
        Ok(data)
    }

    /// Samples closed-form potentials at every node and time level.
    pub fn from_fns(
        grid: &SpaceTimeGrid,
        a: impl Fn(f64, f64) -> f64,
        b: impl Fn(f64, f64) -> f64,
        c: impl Fn(f64) -> f64,
        coupling: Coupling,
        region: ControlRegion,
    ) -> Result<Self> {
        let shape = (grid.levels(), grid.nodes());
        let a = Array2::from_shape_fn(shape, |(n, j)| a(grid.x(j), grid.t(n)));
        let b = Array2::from_shape_fn(shape, |(n, j)| b(grid.x(j), grid.t(n)));
        let c = grid.ts().map(c).collect();
        Self::new(a, b, c, coupling, region, grid)
    }

    /// Constant potentials.
    pub fn constant(
        grid: &SpaceTimeGrid,
        a: f64,
        b: f64,
        c: f64,
        coupling: Coupling,
        region: ControlRegion,
    ) -> Result<Self> {
        Self::from_fns(grid, |_, _| a, |_, _| b, |_| c, coupling, region)
    }

    pub fn check(&self, grid: &SpaceTimeGrid) -> Result<()> {
        let shape = (grid.levels(), grid.nodes());
        for (what, arr) in [("potential a", &self.a), ("potential b", &self.b)] {
            if arr.dim() != shape {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: shape.0 * shape.1,
                    got: arr.len(),
                });
            }
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(what));
            }
        }
        if self.c.len() != grid.levels() {
            return Err(Error::DimensionMismatch {
                what: "potential c",
                expected: grid.levels(),
                got: self.c.len(),
            });
        }
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential c"));
        }
        if self.region.mask().len() != grid.nodes() {
            return Err(Error::DimensionMismatch {
                what: "control region mask",
                expected: grid.nodes(),
                got: self.region.mask().len(),
            });
        }
        Ok(())
    }

    /// The same data on the first `nodes` nodes of the grid, with a new region.
    pub fn restrict(&self, nodes: usize, region: ControlRegion) -> Self {
        let cols = ndarray::s![.., ..nodes];
        Self {
            a: self.a.slice(cols).to_owned(),
            b: self.b.slice(cols).to_owned(),
            c: self.c.clone(),
            coupling: self.coupling,
            region,
        }
    }
}
