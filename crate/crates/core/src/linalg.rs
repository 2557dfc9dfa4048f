//! Tridiagonal systems bordered by a dense first column.
//!
//! The implicit step of the coupled system has the ODE unknown in slot 0.
//! Every field row couples to it through the `b(x, t) z(t)` term, which
//! fills column 0; everything else is tridiagonal. Both the matrix and its
//! transpose are solved by elimination in `O(n)`.

/// `A = tridiag(lower, diag, upper) + border e_0^T`.
///
/// `lower[i]` is `A[i][i-1]` (`lower[0]` unused), `upper[i]` is `A[i][i+1]`
/// (`upper[n-1]` unused), and `border[i]` is added to `A[i][0]` for `i >= 2`.
/// Entries of `border` at rows 0 and 1 are folded into the diagonal and the
/// subdiagonal on construction.
#[derive(Debug, Clone)]
pub struct BorderedTridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    border: Vec<f64>,
}

/// Pivot magnitude below which the step matrix is treated as singular.
const PIVOT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

impl BorderedTridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>, mut border: Vec<f64>) -> Self {
        let n = diag.len();
        assert!(n >= 3, "bordered system needs at least 3 unknowns");
        assert!(lower.len() == n && upper.len() == n && border.len() == n);
        let mut diag = diag;
        let mut lower = lower;
        diag[0] += border[0];
        lower[1] += border[1];
        border[0] = 0.0;
        border[1] = 0.0;
        Self {
            lower,
            diag,
            upper,
            border,
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i] + self.border[i] * x[0];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut out: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.upper[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.lower[i + 1] * x[i + 1];
                }
                s
            })
            .collect();
        out[0] += self.border.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
        out
    }

    /// Solves `A x = rhs` in place.
    ///
    /// Sweeping upward from the last row expresses every unknown as
    /// `x_i = alpha_i + beta_i x_{i-1} + gamma_i x_0`; row 0 then closes the
    /// system for `x_0`.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<(), Singular> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let (l, d, u, c) = (&self.lower, &self.diag, &self.upper, &self.border);
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        let mut gamma = vec![0.0; n];

        let last = n - 1;
        let den = pivot(d[last])?;
        alpha[last] = rhs[last] / den;
        beta[last] = -l[last] / den;
        gamma[last] = -c[last] / den;
        for i in (1..last).rev() {
            let den = pivot(d[i] + u[i] * beta[i + 1])?;
            alpha[i] = (rhs[i] - u[i] * alpha[i + 1]) / den;
            beta[i] = -l[i] / den;
            gamma[i] = -(c[i] + u[i] * gamma[i + 1]) / den;
        }
        // x_1 = alpha_1 + (beta_1 + gamma_1) x_0
        let den = pivot(d[0] + u[0] * (beta[1] + gamma[1]))?;
        let x0 = (rhs[0] - u[0] * alpha[1]) / den;
        rhs[0] = x0;
        for i in 1..n {
            rhs[i] = alpha[i] + beta[i] * rhs[i - 1] + gamma[i] * x0;
        }
        Ok(())
    }

    /// Solves `A^T x = rhs` in place.
    ///
    /// In the transpose the border becomes row 0 and rows `1..n` are purely
    /// tridiagonal, so the upward sweep gives `x_i = alpha_i + beta_i x_{i-1}`,
    /// which makes every unknown affine in `x_0`.
    pub fn solve_transpose(&self, rhs: &mut [f64]) -> Result<(), Singular> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        // transpose: sub-diagonal at row i is upper[i-1], super-diagonal is lower[i+1]
        let (l, d, u, c) = (&self.lower, &self.diag, &self.upper, &self.border);
        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        let last = n - 1;
        let den = pivot(d[last])?;
        alpha[last] = rhs[last] / den;
        beta[last] = -u[last - 1] / den;
        for i in (1..last).rev() {
            let den = pivot(d[i] + l[i + 1] * beta[i + 1])?;
            alpha[i] = (rhs[i] - l[i + 1] * alpha[i + 1]) / den;
            beta[i] = -u[i - 1] / den;
        }
        // x_i = p_i + q_i x_0
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];
        q[0] = 1.0;
        for i in 1..n {
            p[i] = alpha[i] + beta[i] * p[i - 1];
            q[i] = beta[i] * q[i - 1];
        }
        // row 0: d0 x0 + l1 x1 + sum_{i>=2} c_i x_i = rhs0
        let mut coeff = d[0] + l[1] * q[1];
        let mut known = l[1] * p[1];
        for i in 2..n {
            coeff += c[i] * q[i];
            known += c[i] * p[i];
        }
        let x0 = (rhs[0] - known) / pivot(coeff)?;
        for i in 0..n {
            rhs[i] = p[i] + q[i] * x0;
        }
        Ok(())
    }
}

fn pivot(v: f64) -> Result<f64, Singular> {
    if v.is_finite() && v.abs() > PIVOT_FLOOR {
        Ok(v)
    } else {
        Err(Singular)
    }
}
