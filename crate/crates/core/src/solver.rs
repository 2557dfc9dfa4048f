//! Theta-scheme solvers for the forward coupled system and its adjoint.
//!
//! # Discretization
//!
//! The Dirichlet coupling `y(0, t) = mu z(t)` is built into the unknowns:
//! the reduced vector is `X = (z, y_1, ..., y_Nx)` and `y_0 = mu X_0`.
//! On that constrained space the system is written in weak form with the
//! lumped (trapezoid) mass of the state inner product,
//!
//! ```text
//! M X' + A(t) X = F(t),      M = diag(dx/2 mu^2 + mu/kappa, dx, ..., dx, dx/2),
//! ```
//!
//! where `A = K + R(t)`: `K` is the symmetric stiffness of `int y_x phi_x`,
//! and `R` collects `a y`, `b z` and `c z`. Row 0 is the ODE row; the `b z`
//! term fills column 0, which is why each implicit step is a tridiagonal
//! system bordered by one dense column. At `x = L` the Neumann row equals the
//! ghost-node stencil `y_{Nx+1} = y_{Nx-1} + 2 dx u`.
//!
//! Because `K` is symmetric in the `M` inner product, the semi-discrete
//! adjoint is again a discretization of the adjoint system, with the
//! nonlocal `int b phi` term appearing as the transpose of the border.
//!
//! The discrete adjoint is the exact transpose, in the weighted inner
//! products, of the assembled forward step sequence. The continuous adjoint
//! runs the theta-scheme backward on `-M Xi' + A^T Xi = 0` directly.

use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use crate::hilbert::{ControlSpace, HState, SpaceTimeField};
use crate::linalg::BorderedTridiagonal;
use crate::problem::ProblemData;

/// Boundary condition at the right end `x = L`.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum RightBoundary {
    /// `y_x(L, t) = 0`
    #[default]
    Neumann,
    /// `y_x(L, t) = u(t)`, with `u` sampled at every time level.
    Flux(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjointMode {
    /// Exact transpose of the forward scheme.
    #[default]
    Discrete,
    /// Direct theta-scheme discretization of the adjoint system.
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// 1 is implicit Euler, 1/2 is Crank-Nicolson.
    pub theta: f64,
    pub right_bc: RightBoundary,
    pub adjoint: AdjointMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            theta: 1.0,
            right_bc: RightBoundary::Neumann,
            adjoint: AdjointMode::Discrete,
        }
    }
}

impl SolverConfig {
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_adjoint(mut self, mode: AdjointMode) -> Self {
        self.adjoint = mode;
        self
    }

    pub fn with_flux(mut self, u: Vec<f64>) -> Self {
        self.right_bc = RightBoundary::Flux(u);
        self
    }

    pub fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in [0.5, 1], got {}",
                self.theta
            )));
        }
        if let RightBoundary::Flux(u) = &self.right_bc {
            if u.len() != grid.levels() {
                return Err(Error::DimensionMismatch {
                    what: "boundary flux",
                    expected: grid.levels(),
                    got: u.len(),
                });
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("boundary flux"));
            }
        }
        Ok(())
    }
}

/// Discrete solution: one state per time level.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<HState>,
    grid: SpaceTimeGrid,
}

impl Trajectory {
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn initial(&self) -> &HState {
        &self.states[0]
    }

    pub fn last(&self) -> &HState {
        self.states.last().expect("trajectory is never empty")
    }

    /// Field values as a `[level, node]` array.
    pub fn field(&self) -> SpaceTimeField {
        let nodes = self.grid.nodes();
        SpaceTimeField::from_shape_fn((self.states.len(), nodes), |(n, j)| self.states[n].y[j])
    }

    pub fn ode(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.z).collect()
    }
}

/// Output of an adjoint solve.
///
/// `trajectory` holds the adjoint states `(phi, rho)` with
/// `states[Nt]` equal to the supplied final data. `observation` is the
/// field that pairs with a control in `L^2(omega_T)`: the value `phi` that
/// generates HUM controls and enters `int_{omega_T} |phi|^2`. In continuous
/// mode it is the field of `trajectory`; in discrete mode it is the
/// transposed source map, which for implicit Euler is the adjoint state one
/// level earlier.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub trajectory: Trajectory,
    pub observation: SpaceTimeField,
}

impl AdjointSolution {
    /// `phi 1_omega`, the control generated by this adjoint solution.
    pub fn masked_observation(&self, data: &ProblemData) -> SpaceTimeField {
        let mask = ndarray::ArrayView1::from(data.region.mask());
        let mut v = self.observation.clone();
        for mut row in v.rows_mut() {
            row.zip_mut_with(&mask, |a, &m| {
                if m == 0.0 {
                    *a = 0.0
                }
            });
        }
        v
    }
}

/// Per-grid quantities of the semi-discrete system.
pub(crate) struct Stepper<'a> {
    grid: &'a SpaceTimeGrid,
    data: &'a ProblemData,
    theta: f64,
    mu: f64,
    ode_weight: f64,
    /// lumped mass in reduced coordinates
    mass: Vec<f64>,
    /// control load weights in reduced coordinates
    load: Vec<f64>,
    time_weights: Vec<f64>,
}

/// `A` of one step, plus the implicit matrix `E = M/dt + theta A`.
struct StepMatrices {
    a: BorderedTridiagonal,
    e: BorderedTridiagonal,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(grid: &'a SpaceTimeGrid, data: &'a ProblemData, theta: f64) -> Result<Self> {
        data.check(grid)?;
        let mu = data.coupling.mu();
        let ode_weight = data.coupling.ode_weight();
        let w = grid.space_weights();
        let mut mass = w.to_vec();
        mass[0] = w[0] * mu * mu + ode_weight;
        let control = ControlSpace::new(&data.region, grid, theta)?;
        let mut load = control.spatial_weights().to_vec();
        load[0] *= mu;
        Ok(Self {
            grid,
            data,
            theta,
            mu,
            ode_weight,
            mass,
            load,
            time_weights: grid.time_weights(theta),
        })
    }

    fn n(&self) -> usize {
        self.mass.len()
    }

    /// Orthogonal projection of a state onto `{y_0 = mu z}`, in reduced coordinates.
    pub(crate) fn reduce(&self, s: &HState) -> Vec<f64> {
        let w0 = self.grid.space_weights()[0];
        let mut x = s.y.clone();
        x[0] = (w0 * self.mu * s.y[0] + self.ode_weight * s.z) / self.mass[0];
        x
    }

    pub(crate) fn embed(&self, x: &[f64]) -> HState {
        let mut y = x.to_vec();
        y[0] = self.mu * x[0];
        HState { y, z: x[0] }
    }

    /// Assembles `A` for the step `n -> n+1` with potentials at `t_n + theta dt`.
    fn step(&self, n: usize) -> StepMatrices {
        let (th, nx, dx) = (self.theta, self.grid.nx(), self.grid.dx());
        let w = self.grid.space_weights();
        let mu = self.mu;
        let pa = |j: usize| th * self.data.a[[n + 1, j]] + (1.0 - th) * self.data.a[[n, j]];
        let pb = |j: usize| th * self.data.b[[n + 1, j]] + (1.0 - th) * self.data.b[[n, j]];
        let pc = th * self.data.c[n + 1] + (1.0 - th) * self.data.c[n];
        let size = self.n();
        let inv = 1.0 / dx;

        let mut lower = vec![0.0; size];
        let mut diag = vec![0.0; size];
        let mut upper = vec![0.0; size];
        let mut border = vec![0.0; size];

        diag[0] = mu * mu * inv + w[0] * (pa(0) * mu * mu + pb(0) * mu) + self.ode_weight * pc;
        upper[0] = -mu * inv;
        for j in 1..=nx {
            diag[j] = if j < nx { 2.0 * inv } else { inv } + w[j] * pa(j);
            lower[j] = if j == 1 { -mu * inv } else { -inv };
            if j < nx {
                upper[j] = -inv;
            }
            border[j] = w[j] * pb(j);
        }
        let a =
            BorderedTridiagonal::new(lower.clone(), diag.clone(), upper.clone(), border.clone());
        let inv_dt = 1.0 / self.grid.dt();
        let scale = |v: &[f64]| v.iter().map(|x| th * x).collect::<Vec<_>>();
        let e_diag = diag
            .iter()
            .zip(&self.mass)
            .map(|(d, m)| m * inv_dt + th * d)
            .collect();
        let e = BorderedTridiagonal::new(scale(&lower), e_diag, scale(&upper), scale(&border));
        StepMatrices { a, e }
    }

    /// Runs the forward scheme from `initial`.
    pub(crate) fn forward(
        &self,
        source: Option<&SpaceTimeField>,
        initial: &HState,
        flux: Option<&[f64]>,
    ) -> Result<Trajectory> {
        let (th, nt) = (self.theta, self.grid.nt());
        let inv_dt = 1.0 / self.grid.dt();
        let last = self.n() - 1;
        let mut states = Vec::with_capacity(nt + 1);
        states.push(initial.clone());
        let mut x = self.reduce(initial);
        for n in 0..nt {
            let m = self.step(n);
            let ax = m.a.matvec(&x);
            let mut rhs: Vec<f64> = (0..self.n())
                .map(|i| self.mass[i] * inv_dt * x[i] - (1.0 - th) * ax[i])
                .collect();
            if let Some(v) = source {
                for (i, l) in self.load.iter().enumerate() {
                    if *l != 0.0 {
                        rhs[i] += l * (th * v[[n + 1, i]] + (1.0 - th) * v[[n, i]]);
                    }
                }
            }
            if let Some(u) = flux {
                rhs[last] += th * u[n + 1] + (1.0 - th) * u[n];
            }
            m.e.solve(&mut rhs)
                .map_err(|_| Error::SingularStep { level: n + 1 })?;
            x = rhs;
            states.push(self.embed(&x));
        }
        Ok(Trajectory {
            states,
            grid: self.grid.clone(),
        })
    }

    pub(crate) fn adjoint(&self, terminal: &HState, mode: AdjointMode) -> Result<AdjointSolution> {
        match mode {
            AdjointMode::Discrete => self.adjoint_discrete(terminal),
            AdjointMode::Continuous => self.adjoint_continuous(terminal),
        }
    }

    /// Transpose of [`Self::forward`] with respect to the state and control pairings.
    fn adjoint_discrete(&self, terminal: &HState) -> Result<AdjointSolution> {
        let (th, nt, size) = (self.theta, self.grid.nt(), self.n());
        let inv_dt = 1.0 / self.grid.dt();
        let mut xi = self.reduce(terminal);
        let mut reduced = vec![Vec::new(); nt + 1];
        // ys[n] = E_{n-1}^{-T} M xi^n, defined for n >= 1
        let mut ys = vec![Vec::new(); nt + 1];
        reduced[nt] = xi.clone();
        for n in (0..nt).rev() {
            let m = self.step(n);
            let mut y: Vec<f64> = xi.iter().zip(&self.mass).map(|(v, m)| m * v).collect();
            m.e.solve_transpose(&mut y)
                .map_err(|_| Error::SingularStep { level: n })?;
            let aty = m.a.matvec_transpose(&y);
            xi = (0..size)
                .map(|i| (self.mass[i] * inv_dt * y[i] - (1.0 - th) * aty[i]) / self.mass[i])
                .collect();
            reduced[n] = xi.clone();
            ys[n + 1] = y;
        }

        let mut observation = SpaceTimeField::zeros((nt + 1, size));
        for n in 0..=nt {
            let tau = self.time_weights[n];
            if tau == 0.0 {
                // level carries no control weight; report the adjoint state itself
                let s = self.embed(&reduced[n]);
                observation
                    .row_mut(n)
                    .assign(&ndarray::ArrayView1::from(&s.y));
                continue;
            }
            let mut raw = vec![0.0; size];
            if n >= 1 {
                raw.iter_mut().zip(&ys[n]).for_each(|(r, y)| *r += th * y);
            }
            if n < nt {
                raw.iter_mut()
                    .zip(&ys[n + 1])
                    .for_each(|(r, y)| *r += (1.0 - th) * y);
            }
            let mut row = observation.row_mut(n);
            row[0] = self.mu * raw[0] / tau;
            for j in 1..size {
                row[j] = raw[j] / tau;
            }
        }

        let mut states: Vec<HState> = reduced.iter().map(|x| self.embed(x)).collect();
        states[nt] = terminal.clone();
        Ok(AdjointSolution {
            trajectory: Trajectory {
                states,
                grid: self.grid.clone(),
            },
            observation,
        })
    }

    fn adjoint_continuous(&self, terminal: &HState) -> Result<AdjointSolution> {
        let (th, nt, size) = (self.theta, self.grid.nt(), self.n());
        let inv_dt = 1.0 / self.grid.dt();
        let mut xi = self.reduce(terminal);
        let mut states = vec![HState::zeros(size); nt + 1];
        let mut observation = SpaceTimeField::zeros((nt + 1, size));
        let first = self.embed(&xi);
        observation
            .row_mut(nt)
            .assign(&ndarray::ArrayView1::from(&first.y));
        states[nt] = terminal.clone();
        for n in (0..nt).rev() {
            let m = self.step(n);
            let atx = m.a.matvec_transpose(&xi);
            let mut rhs: Vec<f64> = (0..size)
                .map(|i| self.mass[i] * inv_dt * xi[i] - (1.0 - th) * atx[i])
                .collect();
            m.e.solve_transpose(&mut rhs)
                .map_err(|_| Error::SingularStep { level: n })?;
            xi = rhs;
            let s = self.embed(&xi);
            observation
                .row_mut(n)
                .assign(&ndarray::ArrayView1::from(&s.y));
            states[n] = s;
        }
        Ok(AdjointSolution {
            trajectory: Trajectory {
                states,
                grid: self.grid.clone(),
            },
            observation,
        })
    }
}

pub(crate) fn check_source(v: &SpaceTimeField, grid: &SpaceTimeGrid) -> Result<()> {
    let shape = (grid.levels(), grid.nodes());
    if v.dim() != shape {
        return Err(Error::DimensionMismatch {
            what: "space-time source",
            expected: shape.0 * shape.1,
            got: v.len(),
        });
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("space-time source"));
    }
    Ok(())
}

/// Solves the forward system with distributed source `v` (only its values on
/// the control region matter) from `initial`.
pub fn solve_forward(
    v: &SpaceTimeField,
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<Trajectory> {
    forward_impl(Some(v), initial, data, grid, config)
}

pub(crate) fn forward_impl(
    v: Option<&SpaceTimeField>,
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<Trajectory> {
    config.validate(grid)?;
    initial.check(grid, "initial state")?;
    if let Some(v) = v {
        check_source(v, grid)?;
    }
    let stepper = Stepper::new(grid, data, config.theta)?;
    let flux = match &config.right_bc {
        RightBoundary::Neumann => None,
        RightBoundary::Flux(u) => Some(u.as_slice()),
    };
    stepper.forward(v, initial, flux)
}

/// Solves the adjoint system backward from `terminal` at `t = T`.
pub fn solve_adjoint(
    terminal: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<AdjointSolution> {
    config.validate(grid)?;
    terminal.check(grid, "final data")?;
    Stepper::new(grid, data, config.theta)?.adjoint(terminal, config.adjoint)
}

/// Final state of the forward system without control.
pub fn uncontrolled_final(
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<HState> {
    Ok(forward_impl(None, initial, data, grid, config)?
        .last()
        .clone())
}
