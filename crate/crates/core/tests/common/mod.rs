#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use odeheat::{
    ControlRegion, Coupling, HState, HumProblem, ProblemData, SolverConfig, SpaceTimeField,
    SpaceTimeGrid,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random problem on `(0, L)` with smooth random potentials.
pub struct Instance {
    pub grid: SpaceTimeGrid,
    pub data: ProblemData,
    pub config: SolverConfig,
}

impl Instance {
    pub fn problem(&self) -> HumProblem<'_> {
        HumProblem::new(&self.grid, &self.data, &self.config).unwrap()
    }

    pub fn random_state(&self, rng: &mut ChaCha8Rng) -> HState {
        random_state(&self.grid, rng)
    }

    /// Random field supported on the control region.
    pub fn random_control(&self, rng: &mut ChaCha8Rng) -> SpaceTimeField {
        let mask = self.data.region.mask();
        SpaceTimeField::from_shape_fn((self.grid.levels(), self.grid.nodes()), |(_, j)| {
            if mask[j] > 0.0 {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
    }
}

pub fn random_state(grid: &SpaceTimeGrid, rng: &mut ChaCha8Rng) -> HState {
    let y = (0..grid.nodes())
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    HState::new(y, rng.gen_range(-1.0..1.0))
}

pub fn random_instance(rng: &mut ChaCha8Rng, nx: usize, nt: usize, theta: f64) -> Instance {
    let length = rng.gen_range(0.5..2.0);
    let final_time = rng.gen_range(0.1..1.0);
    let grid = SpaceTimeGrid::new(length, final_time, nx, nt).unwrap();
    let coupling = loop {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let mu = sign * rng.gen_range(0.3..3.0);
        let kappa = sign * rng.gen_range(0.3..3.0);
        if let Ok(c) = Coupling::new(mu, kappa) {
            break c;
        }
    };
    let region = loop {
        let w0 = rng.gen_range(0.0..0.6) * length;
        let w1 = w0 + rng.gen_range(0.2..0.9) * length;
        if let Ok(r) = ControlRegion::new(w0, w1.min(length), &grid) {
            break r;
        }
    };
    let [a0, a1, b0, b1, c0, c1]: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
    let data = ProblemData::from_fns(
        &grid,
        move |x, t| a0 + a1 * (PI * x / length).sin() * (1.0 + t),
        move |x, t| b0 + b1 * x * (2.0 * t).cos(),
        move |t| c0 + c1 * t,
        coupling,
        region,
    )
    .unwrap();
    Instance {
        grid,
        data,
        config: SolverConfig::default().with_theta(theta),
    }
}

/// Test 1 data: `a = c = 1`, `b = 0`, `mu = kappa = 1`, `omega = (0.3, 0.7)`, `T = 0.6`.
pub fn test1(nx: usize, nt: usize) -> (Instance, HState, HState) {
    let grid = SpaceTimeGrid::new(1.0, 0.6, nx, nt).unwrap();
    let region = ControlRegion::new(0.3, 0.7, &grid).unwrap();
    let data = ProblemData::constant(
        &grid,
        1.0,
        0.0,
        1.0,
        Coupling::new(1.0, 1.0).unwrap(),
        region,
    )
    .unwrap();
    let y0 = HState::from_fn(&grid, |x| -10.0 * (PI * x).sin(), 0.0);
    let f0 = HState::from_fn(&grid, |x| 0.4 * (PI * x).sin(), 0.0);
    (
        Instance {
            grid,
            data,
            config: SolverConfig::default(),
        },
        y0,
        f0,
    )
}

/// Quadrature weights of the state inner product, field nodes then `z`.
pub fn state_weights(grid: &SpaceTimeGrid, coupling: &Coupling) -> Vec<f64> {
    let mut w = grid.space_weights().to_vec();
    w.push(coupling.ode_weight());
    w
}

pub fn to_vector(s: &HState) -> DVector<f64> {
    DVector::from_iterator(s.y.len() + 1, s.y.iter().copied().chain([s.z]))
}

pub fn from_vector(v: &DVector<f64>) -> HState {
    let n = v.len() - 1;
    HState::new(v.rows(0, n).iter().copied().collect(), v[n])
}

/// Dense matrix of the Gramian in nodal coordinates, column `i` = `Lambda e_i`.
pub fn dense_gramian(problem: &HumProblem<'_>, nodes: usize) -> DMatrix<f64> {
    let n = nodes + 1;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = 1.0;
        let col = problem.gramian(&from_vector(&e)).unwrap();
        m.set_column(i, &to_vector(&col));
    }
    m
}

/// `W^{1/2} M W^{-1/2}`: the operator in an orthonormal basis of the weighted space.
pub fn symmetrized(m: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = weights.len();
    DMatrix::from_fn(n, n, |i, j| {
        weights[i].sqrt() * m[(i, j)] / weights[j].sqrt()
    })
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
