//! The state space `L^2(0, L) x R` with the `mu/kappa`-weighted inner product,
//! and the `L^2(omega_T)` pairing of space-time controls.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{ControlRegion, Coupling, SpaceTimeGrid};

/// A space-time array indexed by `[time level, node]`.
pub type SpaceTimeField = Array2<f64>;

/// An element `(y, z)` of the state space: nodal field values and the ODE state.
#[derive(Debug, Clone, PartialEq)]
pub struct HState {
    pub y: Vec<f64>,
    pub z: f64,
}

impl HState {
    pub fn new(y: Vec<f64>, z: f64) -> Self {
        Self { y, z }
    }

    pub fn zeros(nodes: usize) -> Self {
        Self {
            y: vec![0.0; nodes],
            z: 0.0,
        }
    }

    /// Samples `y(x)` at the grid nodes.
    pub fn from_fn(grid: &SpaceTimeGrid, y: impl Fn(f64) -> f64, z: f64) -> Self {
        Self {
            y: grid.xs().map(y).collect(),
            z,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.z == 0.0 && self.y.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.y.iter().all(|v| v.is_finite())
    }

    pub fn check(&self, grid: &SpaceTimeGrid, what: &'static str) -> Result<()> {
        if self.y.len() != grid.nodes() {
            return Err(Error::DimensionMismatch {
                what,
                expected: grid.nodes(),
                got: self.y.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::NonFinite(what));
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            y: self.y.iter().map(|v| alpha * v).collect(),
            z: alpha * self.z,
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &HState) {
        debug_assert_eq!(self.y.len(), other.y.len());
        for (a, b) in self.y.iter_mut().zip(&other.y) {
            *a += alpha * b;
        }
        self.z += alpha * other.z;
    }

    /// `alpha * self + other`
    pub fn lincomb(&self, alpha: f64, other: &HState) -> Self {
        let mut out = other.clone();
        out.axpy(alpha, self);
        out
    }

    /// Max-norm distance over all nodal values and the ODE component.
    pub fn max_abs_diff(&self, other: &HState) -> f64 {
        self.y
            .iter()
            .zip(&other.y)
            .map(|(a, b)| (a - b).abs())
            .fold((self.z - other.z).abs(), f64::max)
    }
}

/// Precomputed quadrature weights of the state inner product on one grid.
#[derive(Debug, Clone)]
pub struct StateSpace {
    weights: Vec<f64>,
    ode_weight: f64,
}

impl StateSpace {
    pub fn new(grid: &SpaceTimeGrid, coupling: &Coupling) -> Self {
        Self {
            weights: grid.space_weights().to_vec(),
            ode_weight: coupling.ode_weight(),
        }
    }

    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    fn conform(&self, a: &HState) -> Result<()> {
        if a.y.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.weights.len(),
                got: a.y.len(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, a: &HState, b: &HState) -> Result<f64> {
        self.conform(a)?;
        self.conform(b)?;
        Ok(self.inner_unchecked(a, b))
    }

    pub(crate) fn inner_unchecked(&self, a: &HState, b: &HState) -> f64 {
        let field: f64 = self
            .weights
            .iter()
            .zip(a.y.iter().zip(&b.y))
            .map(|(w, (u, v))| w * (u * v))
            .sum();
        field + self.ode_weight * (a.z * b.z)
    }

    pub fn norm(&self, a: &HState) -> Result<f64> {
        Ok(self.inner(a, a)?.max(0.0).sqrt())
    }

    pub(crate) fn norm_unchecked(&self, a: &HState) -> f64 {
        self.inner_unchecked(a, a).max(0.0).sqrt()
    }

    /// Plain `L^2` norm of the field component.
    pub fn field_norm(&self, y: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(y)
            .map(|(w, v)| w * v * v)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    }
}

/// Trapezoid quadrature of `a.y * b.y` plus `(mu / kappa) a.z b.z`.
pub fn inner_product(
    a: &HState,
    b: &HState,
    coupling: &Coupling,
    grid: &SpaceTimeGrid,
) -> Result<f64> {
    StateSpace::new(grid, coupling).inner(a, b)
}

pub fn h_norm(a: &HState, coupling: &Coupling, grid: &SpaceTimeGrid) -> Result<f64> {
    StateSpace::new(grid, coupling).norm(a)
}

/// The `L^2(omega_T)` pairing: trapezoid in space restricted by the region
/// mask, theta-scheme weights in time (see [`SpaceTimeGrid::time_weights`]).
#[derive(Debug, Clone)]
pub struct ControlSpace {
    /// space weight times mask, per node
    spatial: Vec<f64>,
    temporal: Vec<f64>,
}

impl ControlSpace {
    pub fn new(region: &ControlRegion, grid: &SpaceTimeGrid, theta: f64) -> Result<Self> {
        if region.mask().len() != grid.nodes() {
            return Err(Error::DimensionMismatch {
                what: "control region mask",
                expected: grid.nodes(),
                got: region.mask().len(),
            });
        }
        let spatial = grid
            .space_weights()
            .iter()
            .zip(region.mask())
            .map(|(w, m)| w * m)
            .collect();
        Ok(Self {
            spatial,
            temporal: grid.time_weights(theta),
        })
    }

    pub fn spatial_weights(&self) -> &[f64] {
        &self.spatial
    }

    pub fn time_weights(&self) -> &[f64] {
        &self.temporal
    }

    fn conform(&self, v: &SpaceTimeField) -> Result<()> {
        let expected = (self.temporal.len(), self.spatial.len());
        if v.dim() != expected {
            return Err(Error::DimensionMismatch {
                what: "space-time control",
                expected: expected.0 * expected.1,
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, u: &SpaceTimeField, v: &SpaceTimeField) -> Result<f64> {
        self.conform(u)?;
        self.conform(v)?;
        let mut total = 0.0;
        for (n, tw) in self.temporal.iter().enumerate() {
            if *tw == 0.0 {
                continue;
            }
            let level: f64 = self
                .spatial
                .iter()
                .zip(u.row(n).iter().zip(v.row(n).iter()))
                .map(|(w, (a, b))| w * (a * b))
                .sum();
            total += tw * level;
        }
        Ok(total)
    }

    pub fn norm(&self, v: &SpaceTimeField) -> Result<f64> {
        Ok(self.inner(v, v)?.max(0.0).sqrt())
    }
}

/// `L^2(omega_T)` norm of a space-time control; values outside the mask are ignored.
pub fn control_l2_norm(
    v: &SpaceTimeField,
    region: &ControlRegion,
    grid: &SpaceTimeGrid,
    theta: f64,
) -> Result<f64> {
    ControlSpace::new(region, grid, theta)?.norm(v)
}

/// `L^2(0, T)` norm of a time series sampled at the levels, theta-scheme weights.
pub fn time_l2_norm(u: &[f64], grid: &SpaceTimeGrid, theta: f64) -> Result<f64> {
    if u.len() != grid.levels() {
        return Err(Error::DimensionMismatch {
            what: "time series",
            expected: grid.levels(),
            got: u.len(),
        });
    }
    let s: f64 = grid
        .time_weights(theta)
        .iter()
        .zip(u)
        .map(|(w, v)| w * v * v)
        .sum();
    Ok(s.max(0.0).sqrt())
}
