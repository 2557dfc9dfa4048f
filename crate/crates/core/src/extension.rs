//! Neumann boundary control on `(0, ell)` by domain extension.
//!
//! The initial datum is extended to `(0, L)`, a distributed HUM control is
//! computed with support in `omega ⊂ (ell, L)`, and the trace
//! `u = y_x(ell, .)` of the controlled state becomes the boundary control of
//! the original problem. [`verify_boundary_control`] re-solves on `(0, ell)`
//! with that flux.

use crate::error::{Error, Result};
use crate::grid::{ControlRegion, SpaceTimeGrid};
use crate::hilbert::{time_l2_norm, HState, StateSpace};
use crate::hum::{HumConfig, HumProblem, HumResult};
use crate::problem::ProblemData;
use crate::solver::{forward_impl, RightBoundary, SolverConfig, Trajectory};

/// Geometry of the extended problem.
///
/// The extended grid uses the mesh size `ell / nx_sub`, so `ell` is always a
/// node; `length / dx` must be an integer as well.
#[derive(Debug, Clone)]
pub struct ExtensionConfig {
    ell: f64,
    extended: SpaceTimeGrid,
    original: SpaceTimeGrid,
    region: ControlRegion,
}

impl ExtensionConfig {
    pub fn new(
        ell: f64,
        length: f64,
        omega: (f64, f64),
        nx_sub: usize,
        final_time: f64,
        nt: usize,
    ) -> Result<Self> {
        if !(ell > 0.0 && length > ell) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < ell < L, got ell = {ell}, L = {length}"
            )));
        }
        if !(omega.0 > ell && omega.1 <= length && omega.0 < omega.1) {
            return Err(Error::InvalidRegion(format!(
                "omega = ({}, {}) must lie inside (ell, L) = ({ell}, {length})",
                omega.0, omega.1
            )));
        }
        let original = SpaceTimeGrid::new(ell, final_time, nx_sub, nt)?;
        let cells = length / original.dx();
        let nx = cells.round();
        if (cells - nx).abs() > 1e-9 * cells {
            return Err(Error::GridMisalignment(format!(
                "L / dx = {cells} is not an integer (dx = {})",
                original.dx()
            )));
        }
        let extended = SpaceTimeGrid::new(length, final_time, nx as usize, nt)?;
        let region = ControlRegion::new(omega.0, omega.1, &extended)?;
        Ok(Self {
            ell,
            extended,
            original,
            region,
        })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn extended_grid(&self) -> &SpaceTimeGrid {
        &self.extended
    }

    pub fn original_grid(&self) -> &SpaceTimeGrid {
        &self.original
    }

    pub fn region(&self) -> &ControlRegion {
        &self.region
    }

    /// Index of the node `x = ell` on the extended grid.
    pub fn trace_node(&self) -> usize {
        self.original.nx()
    }
}

/// Flux `u(t_n)` at `x = ell`, one value per time level.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryControl {
    pub u: Vec<f64>,
}

/// Extends nodal values on `[0, ell]` to `[0, L]` by the constant `y0(ell)`.
pub fn extend_initial(y0: &[f64], ext: &ExtensionConfig) -> Result<Vec<f64>> {
    let sub = ext.original.nodes();
    if y0.len() != sub {
        return Err(Error::GridMisalignment(format!(
            "initial data has {} nodes, the (0, ell) grid has {sub}",
            y0.len()
        )));
    }
    let mut out = y0.to_vec();
    out.resize(ext.extended.nodes(), y0[sub - 1]);
    Ok(out)
}

/// Centered difference `(y_{j+1} - y_{j-1}) / (2 dx)` at `x_j = ell`, at every level.
pub fn extract_trace_control(traj: &Trajectory, ext: &ExtensionConfig) -> Result<BoundaryControl> {
    let grid = traj.grid();
    if grid.nodes() != ext.extended.nodes() {
        return Err(Error::GridMisalignment(format!(
            "trajectory has {} nodes, the extended grid has {}",
            grid.nodes(),
            ext.extended.nodes()
        )));
    }
    let j = ext.trace_node();
    if j == 0 || j >= grid.nx() {
        return Err(Error::GridMisalignment(
            "ell must be an interior node".into(),
        ));
    }
    let inv = 0.5 / grid.dx();
    let u = traj
        .states
        .iter()
        .map(|s| (s.y[j + 1] - s.y[j - 1]) * inv)
        .collect();
    Ok(BoundaryControl { u })
}

/// Final-time norms of the boundary-controlled system on `(0, ell)`.
#[derive(Debug, Clone)]
pub struct Verification {
    /// `||y(., T)||_{L^2(0, ell)}`
    pub norm_y_final: f64,
    pub abs_z_final: f64,
    /// `||u||_{L^2(0, T)}`
    pub norm_control: f64,
    pub trajectory: Trajectory,
}

/// Relative tolerance of the compatibility check `y0(0) = mu z0`.
const COMPATIBILITY_TOL: f64 = 1e-10;

fn check_compatible(initial: &HState, mu: f64) -> Result<()> {
    let mismatch = initial.y[0] - mu * initial.z;
    if mismatch.abs() > COMPATIBILITY_TOL * initial.y[0].abs().max(1.0) {
        return Err(Error::Incompatible(mismatch));
    }
    Ok(())
}

/// Solves the original system on `(0, ell)` with `y_x(ell, t) = u(t)`.
///
/// `data` must be sampled on `grid`; its control region is not used.
pub fn verify_boundary_control(
    control: &BoundaryControl,
    initial: &HState,
    data: &ProblemData,
    grid: &SpaceTimeGrid,
    config: &SolverConfig,
) -> Result<Verification> {
    initial.check(grid, "initial state")?;
    check_compatible(initial, data.coupling.mu())?;
    let mut cfg = config.clone();
    cfg.right_bc = RightBoundary::Flux(control.u.clone());
    let trajectory = forward_impl(None, initial, data, grid, &cfg)?;
    let space = StateSpace::new(grid, &data.coupling);
    let last = trajectory.last();
    Ok(Verification {
        norm_y_final: space.field_norm(&last.y),
        abs_z_final: last.z.abs(),
        norm_control: time_l2_norm(&control.u, grid, cfg.theta)?,
        trajectory,
    })
}

/// Everything produced by one boundary-control computation.
#[derive(Debug, Clone)]
pub struct BoundaryRun {
    pub hum: HumResult,
    pub control: BoundaryControl,
    pub verification: Verification,
}

/// Extends, runs distributed HUM on `(0, L)`, extracts the trace at `ell`
/// and verifies it on `(0, ell)`.
///
/// `data` is sampled on the extended grid; `initial` lives on `(0, ell)`.
pub fn boundary_null_control(
    initial: &HState,
    data: &ProblemData,
    ext: &ExtensionConfig,
    config: &SolverConfig,
    hum: &HumConfig,
) -> Result<BoundaryRun> {
    initial.check(&ext.original, "initial state")?;
    check_compatible(initial, data.coupling.mu())?;
    let extended_initial = HState::new(extend_initial(&initial.y, ext)?, initial.z);
    let problem = HumProblem::new(&ext.extended, data, config)?;
    let result = problem.hum_cg(&extended_initial, hum)?;
    let control = extract_trace_control(&result.controlled, ext)?;
    let sub_region = ControlRegion::new(0.0, ext.ell, &ext.original)?;
    let sub_data = data.restrict(ext.original.nodes(), sub_region);
    let verification =
        verify_boundary_control(&control, initial, &sub_data, &ext.original, config)?;
    Ok(BoundaryRun {
        hum: result,
        control,
        verification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Coupling;
    use std::f64::consts::PI;

    fn ext() -> ExtensionConfig {
        ExtensionConfig::new(1.0, 2.0, (1.3, 1.7), 10, 0.6, 20).unwrap()
    }

    #[test]
    fn geometry_validation() {
        assert!(ExtensionConfig::new(1.0, 1.0, (0.3, 0.7), 10, 0.6, 20).is_err());
        assert!(ExtensionConfig::new(1.0, 2.0, (0.5, 1.7), 10, 0.6, 20).is_err());
        assert!(matches!(
            ExtensionConfig::new(1.0, 2.05, (1.3, 1.7), 10, 0.6, 20),
            Err(Error::GridMisalignment(_))
        ));
        let e = ext();
        assert_eq!(e.extended_grid().nx(), 20);
        assert_eq!(e.trace_node(), 10);
        assert!((e.extended_grid().x(e.trace_node()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_extension() {
        let e = ext();
        let y = extend_initial(&[4.0; 11], &e).unwrap();
        assert_eq!(y, vec![4.0; 21]);
        let g = e.original_grid();
        let y0: Vec<f64> = g.xs().map(|x| -10.0 * (PI * x).sin()).collect();
        let y = extend_initial(&y0, &e).unwrap();
        assert_eq!(&y[..11], &y0[..]);
        assert!(y[11..].iter().all(|&v| v == y0[10]));
        assert!(y0[10].abs() < 1e-14);
        assert!(extend_initial(&[1.0; 7], &e).is_err());
    }

    #[test]
    fn extension_is_linear() {
        let e = ext();
        let a: Vec<f64> = (0..11).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..11).map(|i| (i as f64 * 0.3).cos()).collect();
        let combo: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 2.5 * p + q).collect();
        let lhs = extend_initial(&combo, &e).unwrap();
        let ea = extend_initial(&a, &e).unwrap();
        let eb = extend_initial(&b, &e).unwrap();
        for i in 0..lhs.len() {
            assert_eq!(lhs[i], 2.5 * ea[i] + eb[i]);
        }
    }

    #[test]
    fn trace_of_linear_and_constant_profiles() {
        let e = ext();
        let g = e.extended_grid();
        let data = ProblemData::constant(
            g,
            0.0,
            0.0,
            0.0,
            Coupling::new(1.0, 1.0).unwrap(),
            e.region().clone(),
        )
        .unwrap();
        let cfg = SolverConfig::default();
        let flat = forward_impl(None, &HState::from_fn(g, |_| 3.0, 3.0), &data, g, &cfg).unwrap();
        let u = extract_trace_control(&flat, &e).unwrap();
        assert!(u.u.iter().all(|v| v.abs() < 1e-12));

        let mut lin = flat.clone();
        for s in &mut lin.states {
            s.y = g.xs().map(|x| 5.0 * x).collect();
        }
        let u = extract_trace_control(&lin, &e).unwrap();
        assert!(u.u.iter().all(|v| (v - 5.0).abs() < 1e-12));
    }

    #[test]
    fn zero_control_zero_data() {
        let e = ext();
        let g = e.original_grid();
        let r = ControlRegion::new(0.0, 1.0, g).unwrap();
        let d =
            ProblemData::constant(g, 0.0, 20.0, 0.0, Coupling::new(1.0, 1.0).unwrap(), r).unwrap();
        let bc = BoundaryControl {
            u: vec![0.0; g.levels()],
        };
        let v = verify_boundary_control(
            &bc,
            &HState::zeros(g.nodes()),
            &d,
            g,
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(
            (v.norm_y_final, v.abs_z_final, v.norm_control),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn incompatible_data_rejected() {
        let e = ext();
        let g = e.original_grid();
        let r = ControlRegion::new(0.0, 1.0, g).unwrap();
        let d =
            ProblemData::constant(g, 0.0, 0.0, 0.0, Coupling::new(1.0, 1.0).unwrap(), r).unwrap();
        let bc = BoundaryControl {
            u: vec![0.0; g.levels()],
        };
        let bad = HState::from_fn(g, |_| 1.0, 0.0);
        let err = verify_boundary_control(&bc, &bad, &d, g, &SolverConfig::default());
        assert!(matches!(err, Err(Error::Incompatible(_))));
    }
}
