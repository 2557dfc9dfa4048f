//! Uniform space-time grids, the coupling constants and the control region.

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether a node sits on an interval endpoint.
const NODE_SNAP: f64 = 1e-9;

/// Uniform discretization of `(0, length) x (0, final_time)`.
///
/// Nodes are `x_j = j * dx` for `j = 0..=nx` and time levels `t_n = n * dt`
/// for `n = 0..=nt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    length: f64,
    final_time: f64,
    nx: usize,
    nt: usize,
    weights: Vec<f64>,
}

impl SpaceTimeGrid {
    pub fn new(length: f64, final_time: f64, nx: usize, nt: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if nx < 4 {
            return Err(Error::InvalidGrid(format!("need nx >= 4, got {nx}")));
        }
        if nt < 2 {
            return Err(Error::InvalidGrid(format!("need nt >= 2, got {nt}")));
        }
        let dx = length / nx as f64;
        let mut weights = vec![dx; nx + 1];
        weights[0] = 0.5 * dx;
        weights[nx] = 0.5 * dx;
        Ok(Self {
            length,
            final_time,
            nx,
            nt,
            weights,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// Number of spatial nodes, `nx + 1`.
    pub fn nodes(&self) -> usize {
        self.nx + 1
    }

    /// Number of time levels, `nt + 1`.
    pub fn levels(&self) -> usize {
        self.nt + 1
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.final_time / self.nt as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.nx {
            self.length
        } else {
            j as f64 * self.dx()
        }
    }

    pub fn t(&self, n: usize) -> f64 {
        if n == self.nt {
            self.final_time
        } else {
            n as f64 * self.dt()
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes()).map(|j| self.x(j))
    }

    pub fn ts(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.levels()).map(|n| self.t(n))
    }

    /// Composite trapezoid weights in space: `dx/2` at the endpoints, `dx` inside.
    pub fn space_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature weights in time attached to a theta-scheme.
    ///
    /// A source sampled at the time levels enters step `n -> n+1` as
    /// `theta * s^{n+1} + (1 - theta) * s^n`, so level 0 carries
    /// `(1 - theta) dt`, the last level `theta dt` and every other level `dt`.
    /// For `theta = 1/2` this is the composite trapezoid rule.
    pub fn time_weights(&self, theta: f64) -> Vec<f64> {
        let dt = self.dt();
        let mut w = vec![dt; self.levels()];
        w[0] = (1.0 - theta) * dt;
        w[self.nt] = theta * dt;
        w
    }

    /// Index of the node at `x`, if `x` coincides with a node.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        let s = x / self.dx();
        let j = s.round();
        if j < 0.0 || j > self.nx as f64 {
            return None;
        }
        ((s - j).abs() <= NODE_SNAP).then_some(j as usize)
    }

    /// The same spatial mesh size restricted to `(0, sub_length)`.
    pub fn restrict(&self, sub_length: f64) -> Result<Self> {
        let j = self.node_at(sub_length).ok_or_else(|| {
            Error::GridMisalignment(format!("x = {sub_length} is not a node of the grid"))
        })?;
        Self::new(self.x(j), self.final_time, j, self.nt)
    }
}

/// Boundary coupling `mu` and flux coupling `kappa`, with `mu * kappa > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    mu: f64,
    kappa: f64,
}

impl Coupling {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !(mu.is_finite() && kappa.is_finite()) || mu * kappa <= 0.0 {
            return Err(Error::InvalidCoupling { mu, kappa });
        }
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Weight `mu / kappa` of the ODE component in the state inner product.
    pub fn ode_weight(&self) -> f64 {
        self.mu / self.kappa
    }
}

/// Control region `omega = (w0, w1)` together with its nodal quadrature mask.
///
/// Nodes strictly inside the interval carry weight 1. A node that coincides
/// with an endpoint carries 1/2, so that the mask times the space weights is
/// the trapezoid rule on `omega` whenever the endpoints are nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlRegion {
    w0: f64,
    w1: f64,
    mask: Vec<f64>,
}

impl ControlRegion {
    pub fn new(w0: f64, w1: f64, grid: &SpaceTimeGrid) -> Result<Self> {
        let length = grid.length();
        if !(w0.is_finite() && w1.is_finite()) || w0 < 0.0 || w1 <= w0 || w1 > length {
            return Err(Error::InvalidRegion(format!(
                "need 0 <= w0 < w1 <= {length}, got ({w0}, {w1})"
            )));
        }
        let dx = grid.dx();
        let mask: Vec<f64> = grid
            .xs()
            .map(|x| {
                let lo = (x - w0) / dx;
                let hi = (w1 - x) / dx;
                if lo < -NODE_SNAP || hi < -NODE_SNAP {
                    0.0
                } else if lo.abs() <= NODE_SNAP || hi.abs() <= NODE_SNAP {
                    0.5
                } else {
                    1.0
                }
            })
            .collect();
        let covered = mask.iter().filter(|&&m| m > 0.0).count();
        if covered < 2 {
            return Err(Error::InvalidRegion(format!(
                "({w0}, {w1}) covers only {covered} node(s); refine the grid"
            )));
        }
        Ok(Self { w0, w1, mask })
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    /// Indices of nodes with a nonzero mask.
    pub fn nodes(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(j, &m)| (m > 0.0).then_some(j))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(SpaceTimeGrid::new(1.0, 1.0, 3, 10).is_err());
        assert!(SpaceTimeGrid::new(1.0, 1.0, 4, 1).is_err());
        assert!(SpaceTimeGrid::new(0.0, 1.0, 8, 10).is_err());
        assert!(SpaceTimeGrid::new(1.0, -1.0, 8, 10).is_err());
        assert!(SpaceTimeGrid::new(f64::NAN, 1.0, 8, 10).is_err());
    }

    #[test]
    fn space_weights_sum_to_length() {
        for &(l, nx) in &[(1.0, 4), (2.0, 60), (0.37, 33), (10.0, 1000)] {
            let g = SpaceTimeGrid::new(l, 1.0, nx, 2).unwrap();
            // compensated sum, so the check measures the weights and not the summation
            let (mut s, mut comp) = (0.0f64, 0.0f64);
            for &w in g.space_weights() {
                let t = s + w;
                comp += if s.abs() >= w.abs() {
                    (s - t) + w
                } else {
                    (w - t) + s
                };
                s = t;
            }
            let s = s + comp;
            assert!((s - l).abs() <= 1e-14 * l, "{s} vs {l}");
        }
    }

    #[test]
    fn time_weights_sum_to_final_time() {
        let g = SpaceTimeGrid::new(1.0, 0.6, 8, 120).unwrap();
        for theta in [0.5, 0.75, 1.0] {
            let s: f64 = g.time_weights(theta).iter().sum();
            assert!((s - 0.6).abs() < 1e-14);
        }
        assert_eq!(g.time_weights(1.0)[0], 0.0);
    }

    #[test]
    fn coupling_requires_positive_product() {
        assert!(Coupling::new(1.0, 1.0).is_ok());
        assert!(Coupling::new(-2.0, -0.5).is_ok());
        assert!(matches!(
            Coupling::new(1.0, -1.0),
            Err(Error::InvalidCoupling { .. })
        ));
        assert!(Coupling::new(0.0, 1.0).is_err());
    }

    #[test]
    fn region_mask_aligned_endpoints() {
        let g = SpaceTimeGrid::new(1.0, 0.6, 30, 120).unwrap();
        let r = ControlRegion::new(0.3, 0.7, &g).unwrap();
        assert_eq!(r.nodes(), (9..=21).collect::<Vec<_>>());
        assert_eq!(r.mask()[9], 0.5);
        assert_eq!(r.mask()[21], 0.5);
        assert_eq!(r.mask()[15], 1.0);
        let measure: f64 = r
            .mask()
            .iter()
            .zip(g.space_weights())
            .map(|(m, w)| m * w)
            .sum();
        assert!((measure - 0.4).abs() < 1e-14);
    }

    #[test]
    fn region_validation() {
        let g = SpaceTimeGrid::new(1.0, 0.6, 8, 10).unwrap();
        assert!(ControlRegion::new(0.7, 0.3, &g).is_err());
        assert!(ControlRegion::new(0.2, 1.2, &g).is_err());
        // (0.3, 0.33) contains no node of an 8-interval mesh
        assert!(ControlRegion::new(0.3, 0.33, &g).is_err());
    }

    #[test]
    fn restriction_keeps_mesh_size() {
        let g = SpaceTimeGrid::new(2.0, 0.6, 60, 120).unwrap();
        let s = g.restrict(1.0).unwrap();
        assert_eq!(s.nx(), 30);
        assert!((s.dx() - g.dx()).abs() < 1e-15);
        assert!(g.restrict(1.01).is_err());
    }
}
