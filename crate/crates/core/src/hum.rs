//! Penalized HUM: the Gramian, the primal and dual functionals, the
//! conjugate-gradient solve of `(Lambda + eps I) f = -(y(T), z(T))`, and the
//! duality and observability probes.

use crate::error::{Error, Result};
use crate::grid::SpaceTimeGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::{ControlSpace, HState, SpaceTimeField, StateSpace};
use crate::parallel::Execution;
use crate::problem::ProblemData;
use crate::solver::{
    check_source, forward_impl, AdjointSolution, RightBoundary, SolverConfig, Stepper, Trajectory,
};

/// Number of CG iterations between recomputations of the residual from scratch.
const RESIDUAL_REFRESH: usize = 25;
/// Relative gap between recurrence and recomputed residual that triggers replacement.
const RESIDUAL_DRIFT: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct HumConfig {
    pub epsilon: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub f0: HState,
}

impl HumConfig {
    pub fn new(epsilon: f64, tol: f64, f0: HState) -> Self {
        Self {
            epsilon,
            tol,
            max_iter: 500,
            f0,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self, grid: &SpaceTimeGrid) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        self.f0.check(grid, "initial guess f0")
    }
}

/// The three columns reported per penalty value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlNorms {
    /// `||y(., T)||_{L^2}`
    pub norm_y_final: f64,
    /// `|z(T)|`
    pub abs_z_final: f64,
    /// `||v||_{L^2(omega_T)}`
    pub norm_control: f64,
}

#[derive(Debug, Clone)]
pub struct HumResult {
    /// `v = phi 1_omega`, indexed `[level, node]`
    pub control_v: SpaceTimeField,
    /// `(phi_T, rho_T)` at the last iterate
    pub minimizer_ft: HState,
    pub final_state: HState,
    /// Controlled forward trajectory driven by `control_v`.
    pub controlled: Trajectory,
    pub iterations: usize,
    /// `||g^k||` for `k = 0..=iterations`
    pub residual_history: Vec<f64>,
    pub norms: ControlNorms,
    /// False when `max_iter` was reached before the stopping test.
    pub converged: bool,
}

/// Shared machinery for one problem instance: solver, pairings and `y0`-free maps.
pub struct HumProblem<'a> {
    grid: &'a SpaceTimeGrid,
    data: &'a ProblemData,
    config: &'a SolverConfig,
    stepper: Stepper<'a>,
    states: StateSpace,
    controls: ControlSpace,
}

impl<'a> HumProblem<'a> {
    pub fn new(
        grid: &'a SpaceTimeGrid,
        data: &'a ProblemData,
        config: &'a SolverConfig,
    ) -> Result<Self> {
        config.validate(grid)?;
        if config.right_bc != RightBoundary::Neumann {
            return Err(Error::InvalidConfig(
                "distributed HUM needs the homogeneous Neumann condition at x = L".into(),
            ));
        }
        let stepper = Stepper::new(grid, data, config.theta)?;
        Ok(Self {
            grid,
            data,
            config,
            stepper,
            states: StateSpace::new(grid, &data.coupling),
            controls: ControlSpace::new(&data.region, grid, config.theta)?,
        })
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.states
    }

    pub fn control_space(&self) -> &ControlSpace {
        &self.controls
    }

    pub fn adjoint(&self, ft: &HState) -> Result<AdjointSolution> {
        ft.check(self.grid, "final data")?;
        self.stepper.adjoint(ft, self.config.adjoint)
    }

    pub fn forward(&self, v: Option<&SpaceTimeField>, initial: &HState) -> Result<Trajectory> {
        initial.check(self.grid, "initial state")?;
        if let Some(v) = v {
            check_source(v, self.grid)?;
        }
        self.stepper.forward(v, initial, None)
    }

    /// `Lambda f`: final state of the forward solve from rest driven by `phi(f) 1_omega`.
    pub fn gramian(&self, ft: &HState) -> Result<HState> {
        let v = self.adjoint(ft)?.masked_observation(self.data);
        let zero = HState::zeros(self.grid.nodes());
        Ok(self.stepper.forward(Some(&v), &zero, None)?.last().clone())
    }

    /// `eps f + (y(T), z(T))` with `(y, z)` driven from `initial` by `phi(f) 1_omega`.
    fn residual(
        &self,
        ft: &HState,
        initial: &HState,
        eps: f64,
    ) -> Result<(HState, SpaceTimeField)> {
        let v = self.adjoint(ft)?.masked_observation(self.data);
        let fin = self
            .stepper
            .forward(Some(&v), initial, None)?
            .last()
            .clone();
        Ok((ft.lincomb(eps, &fin), v))
    }

    pub fn uncontrolled_final(&self, initial: &HState) -> Result<HState> {
        Ok(self.forward(None, initial)?.last().clone())
    }

    pub fn evaluate_f(&self, v: &SpaceTimeField, initial: &HState, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        let fin = forward_impl(Some(v), initial, self.data, self.grid, self.config)?;
        let cn = self.controls.norm(v)?;
        let hn = self.states.norm_unchecked(fin.last());
        Ok(0.5 * cn * cn + 0.5 / eps * hn * hn)
    }

    pub fn evaluate_j(&self, ft: &HState, initial: &HState, eps: f64) -> Result<f64> {
        check_eps(eps)?;
        initial.check(self.grid, "initial state")?;
        let adj = self.adjoint(ft)?;
        let obs = adj.masked_observation(self.data);
        let energy = self.controls.inner(&obs, &obs)?;
        let fnorm = self.states.norm_unchecked(ft);
        let pairing = self
            .states
            .inner_unchecked(initial, adj.trajectory.initial());
        Ok(0.5 * energy + 0.5 * eps * fnorm * fnorm + pairing)
    }

    /// Gradient of `J_eps` at `f`: `(Lambda + eps I) f + (ybar(T), zbar(T))`.
    pub fn gradient_j(&self, ft: &HState, initial: &HState, eps: f64) -> Result<HState> {
        check_eps(eps)?;
        let lam = self.gramian(ft)?;
        let bar = self.uncontrolled_final(initial)?;
        let mut g = ft.lincomb(eps, &lam);
        g.axpy(1.0, &bar);
        Ok(g)
    }

    /// Left minus right side of the duality relation
    /// `int_{omega_T} v phi = <(y(T), z(T)), f> - <(y0, z0), (phi(0), rho(0))>`.
    pub fn duality_terms(
        &self,
        v: &SpaceTimeField,
        initial: &HState,
        ft: &HState,
    ) -> Result<[f64; 3]> {
        let fwd = forward_impl(Some(v), initial, self.data, self.grid, self.config)?;
        let adj = self.adjoint(ft)?;
        let work = self.controls.inner(v, &adj.observation)?;
        let fin = self.states.inner_unchecked(fwd.last(), ft);
        let init = self
            .states
            .inner_unchecked(initial, adj.trajectory.initial());
        Ok([work, fin, init])
    }

    /// Algorithm: HUM combined with conjugate gradients.
    pub fn hum_cg(&self, initial: &HState, hum: &HumConfig) -> Result<HumResult> {
        hum.validate(self.grid)?;
        initial.check(self.grid, "initial state")?;
        let eps = hum.epsilon;
        let h = &self.states;

        let mut f = hum.f0.clone();
        let (mut g, v0) = self.residual(&f, initial, eps)?;
        let g0_norm = h.norm_unchecked(&g);
        let mut history = vec![g0_norm];
        let f0_norm = h.norm_unchecked(&f);

        if g0_norm == 0.0 || (f0_norm > 0.0 && g0_norm / f0_norm <= hum.tol) {
            return self.finish(initial, f, v0, 0, history, true);
        }

        let mut w = g.clone();
        let mut g_sq = g0_norm * g0_norm;
        let mut converged = false;
        let mut k = 0;
        while k < hum.max_iter {
            let lam_w = self.gramian(&w)?;
            let gbar = w.lincomb(eps, &lam_w);
            let curvature = h.inner_unchecked(&gbar, &w);
            if !(curvature > 0.0) {
                return Err(Error::CgBreakdown {
                    iteration: k,
                    curvature,
                });
            }
            let step = g_sq / curvature;
            f.axpy(-step, &w);
            g.axpy(-step, &gbar);
            k += 1;

            if k % RESIDUAL_REFRESH == 0 {
                let (fresh, _) = self.residual(&f, initial, eps)?;
                let gap = h.norm_unchecked(&fresh.lincomb(-1.0, &g));
                if gap > RESIDUAL_DRIFT * h.norm_unchecked(&fresh).max(f64::MIN_POSITIVE) {
                    g = fresh;
                }
            }

            let g_norm = h.norm_unchecked(&g);
            history.push(g_norm);
            if g_norm / g0_norm <= hum.tol {
                converged = true;
                break;
            }
            let g_sq_next = g_norm * g_norm;
            let gamma = g_sq_next / g_sq;
            g_sq = g_sq_next;
            w = w.lincomb(gamma, &g);
        }

        let v = self.adjoint(&f)?.masked_observation(self.data);
        self.finish(initial, f, v, k, history, converged)
    }

    fn finish(
        &self,
        initial: &HState,
        f: HState,
        v: SpaceTimeField,
        iterations: usize,
        residual_history: Vec<f64>,
        converged: bool,
    ) -> Result<HumResult> {
        let controlled = self.stepper.forward(Some(&v), initial, None)?;
        let final_state = controlled.last().clone();
        let norms = ControlNorms {
            norm_y_final: self.states.field_norm(&final_state.y),
            abs_z_final: final_state.z.abs(),
            norm_control: self.controls.norm(&v)?,
        };
        Ok(HumResult {
            control_v: v,
            minimizer_ft: f,
            final_state,
            controlled,
            iterations,
            residual_history,
            norms,
            converged,
        })
    }

    /// `(||phi(0)||^2 + (mu/kappa) rho(0)^2) / int_{omega_T} |phi|^2`.
    pub fn observability_ratio(&self, ft: &HState) -> Result<f64> {
        let adj = self.adjoint(ft)?;
        let obs = adj.masked_observation(self.data);
        let denom = self.controls.inner(&obs, &obs)?;
        if !(denom > 1e-300) {
            return Err(Error::UndefinedRatio(denom));
        }
        let start = adj.trajectory.initial();
        Ok(self.states.inner_unchecked(start, start) / denom)
    }

    /// Observability ratios of `samples` final data drawn uniformly from
    /// `[-1, 1]` at every node and for `z`.
    ///
    /// Sample `i` uses stream `i` of a ChaCha generator keyed by `seed`, so the
    /// result does not depend on `exec`.
    pub fn observability_probe(
        &self,
        samples: usize,
        seed: u64,
        exec: Execution,
    ) -> Result<Vec<f64>> {
        let nodes = self.grid.nodes();
        exec.map_range(samples, |i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let y = (0..nodes).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            self.observability_ratio(&HState::new(y, rng.gen_range(-1.0..=1.0)))
        })
        .into_iter()
        .collect()
    }

    /// `Lambda e_i` for every nodal unit vector: the field nodes, then `z`.
    pub fn gramian_columns(&self, exec: Execution) -> Result<Vec<HState>> {
        let nodes = self.grid.nodes();
        exec.map_range(nodes + 1, |i| {
            let mut e = HState::zeros(nodes);
            if i < nodes {
                e.y[i] = 1.0;
            } else {
                e.z = 1.0;
            }
            self.gramian(&e)
        })
        .into_iter()
        .collect()
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

pub fn gramian_apply(
    ft: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<HState> {
    HumProblem::new(grid, data, config)?.gramian(ft)
}

/// `F_eps(v) = 1/2 ||v||^2_{L^2(omega_T)} + 1/(2 eps) ||(y(T), z(T))||^2`.
pub fn evaluate_f(
    v: &SpaceTimeField,
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    epsilon: f64,
) -> Result<f64> {
    HumProblem::new(grid, data, config)?.evaluate_f(v, initial, epsilon)
}

/// `J_eps(f) = 1/2 int_{omega_T} |phi|^2 + eps/2 ||f||^2 + <(y0, z0), (phi(0), rho(0))>`.
pub fn evaluate_j(
    ft: &HState,
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    epsilon: f64,
) -> Result<f64> {
    HumProblem::new(grid, data, config)?.evaluate_j(ft, initial, epsilon)
}

pub fn hum_cg(
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
    hum: &HumConfig,
) -> Result<HumResult> {
    HumProblem::new(grid, data, config)?.hum_cg(initial, hum)
}

pub fn duality_residual(
    v: &SpaceTimeField,
    initial: &HState,
    ft: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<f64> {
    let [work, fin, init] = HumProblem::new(grid, data, config)?.duality_terms(v, initial, ft)?;
    Ok(work - (fin - init))
}

pub fn observability_ratio(
    ft: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<f64> {
    HumProblem::new(grid, data, config)?.observability_ratio(ft)
}
