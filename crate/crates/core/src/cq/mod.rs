//! Runge-Kutta convolution quadrature.
//!
//! A convolution operator `K(dt)` is discretized by expanding `K(Delta(z)/tau)`
//! in powers of `z`, where `Delta(z) = (A + z/(1-z) * 1 b^T)^{-1}` is the
//! differentiation symbol of the Runge-Kutta method.  The expansion
//! coefficients (the quadrature weights) and the action of `K(dt)` are both
//! obtained from samples on the circle `|z| = rho` via FFT; applying `K^{-1}`
//! only requires solving one frequency-domain problem per contour node, which
//! is what makes the scheme parallel in time.

mod eig;
mod spectral;

pub use eig::{eig_small, Eig};
pub use spectral::{
    apply_symbol, contour_nodes, cq_weights, discrete_convolution, from_eigen_basis,
    solve_convolution_equation, to_eigen_basis, FrequencySolver, NodeData, Spectral,
};

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};

/// Butcher tableau of an implicit Runge-Kutta method.
#[derive(Debug, Clone)]
pub struct RKTableau {
    pub m: usize,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// Stability function at infinity, `R(inf) = 1 - b^T A^{-1} 1`.
    pub r_infinity: f64,
}

/// Radau IIA collocation method with `m` stages (order `2m-1`); `m = 1` is
/// backward Euler.  Stiffly accurate: `b` is the last row of `A`, `c_m = 1`.
pub fn radau_tableau(m: usize) -> Result<RKTableau> {
    let (a, c): (Vec<f64>, Vec<f64>) = match m {
        1 => (vec![1.0], vec![1.0]),
        2 => (
            vec![
                5.0 / 12.0,
                -1.0 / 12.0,
                3.0 / 4.0,
                1.0 / 4.0,
            ],
            vec![1.0 / 3.0, 1.0],
        ),
        3 => {
            let q = 6.0f64.sqrt();
            (
                vec![
                    (88.0 - 7.0 * q) / 360.0,
                    (296.0 - 169.0 * q) / 1800.0,
                    (-2.0 + 3.0 * q) / 225.0,
                    (296.0 + 169.0 * q) / 1800.0,
                    (88.0 + 7.0 * q) / 360.0,
                    (-2.0 - 3.0 * q) / 225.0,
                    (16.0 - q) / 36.0,
                    (16.0 + q) / 36.0,
                    1.0 / 9.0,
                ],
                vec![(4.0 - q) / 10.0, (4.0 + q) / 10.0, 1.0],
            )
        }
        _ => return Err(Error::InvalidParameter(format!("unsupported stage count m = {m}"))),
    };
    let a = DMatrix::from_row_slice(m, m, &a);
    let b = a.row(m - 1).transpose();
    let c = DVector::from_vec(c);
    let a_inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("tableau matrix A is singular".into()))?;
    let r_infinity = 1.0 - (b.transpose() * &a_inv * DVector::from_element(m, 1.0))[(0, 0)];
    Ok(RKTableau { m, a, b, c, r_infinity })
}

impl RKTableau {
    /// Differentiation symbol `Delta(z) = (A + z/(1-z) * 1 b^T)^{-1}`.
    pub fn delta_symbol(&self, zeta: C64) -> Result<DMatrix<C64>> {
        if zeta.norm() >= 1.0 {
            return Err(Error::Domain(format!("delta symbol requires |zeta| < 1, got {zeta}")));
        }
        let m = self.m;
        let w = zeta / (C64::ONE - zeta);
        let mut mat = DMatrix::<C64>::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                mat[(i, j)] = C64::from(self.a[(i, j)]) + w * self.b[j];
            }
        }
        mat.try_inverse().ok_or_else(|| {
            Error::Numerical(format!("differentiation symbol singular at zeta = {zeta}"))
        })
    }
}

/// Time grid plus contour radius defining a convolution quadrature with
/// `N + 1` transform nodes.
#[derive(Debug, Clone)]
pub struct CQGrid {
    pub tau: f64,
    pub n_steps: usize,
    pub rho: f64,
}

impl CQGrid {
    /// Grid over `[0, t_final]` with the default radius
    /// `rho = eps_machine^(1/(2L))`, which balances contour truncation against
    /// round-off amplification `rho^{-n}` in the transforms.
    pub fn new(t_final: f64, n_steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || n_steps == 0 {
            return Err(Error::InvalidParameter(format!(
                "need t_final > 0 and n_steps >= 1, got {t_final}, {n_steps}"
            )));
        }
        let l = (n_steps + 1) as f64;
        let rho = f64::EPSILON.powf(1.0 / (2.0 * l));
        Ok(Self { tau: t_final / n_steps as f64, n_steps, rho })
    }

    /// Same grid with an explicit contour radius (0 < rho < 1).
    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter(format!("rho must lie in (0,1), got {rho}")));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn t_final(&self) -> f64 {
        self.tau * self.n_steps as f64
    }

    /// Number of contour nodes, `L = N + 1`.
    pub fn n_nodes(&self) -> usize {
        self.n_steps + 1
    }

    pub fn zeta(&self, l: usize) -> C64 {
        let angle = 2.0 * std::f64::consts::PI * l as f64 / self.n_nodes() as f64;
        self.rho * C64::new(0.0, angle).exp()
    }

    pub fn t(&self, n: usize) -> f64 {
        self.tau * n as f64
    }
}

/// A causal sequence of stage vectors `g^0 .. g^N`; entry `n`, stage `i`
/// carries data attached to time `t_n + c_i tau`.  Values before `t = 0` are
/// implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSignal {
    pub n_steps: usize,
    pub m: usize,
    pub dim: usize,
    data: Vec<f64>,
}

impl StageSignal {
    pub fn zeros(n_steps: usize, m: usize, dim: usize) -> Self {
        Self { n_steps, m, dim, data: vec![0.0; (n_steps + 1) * m * dim] }
    }

    /// Sample a vector-valued function of time at the stage times (no
    /// interpolation: `t_n + c_i tau` exactly).
    pub fn sample(
        grid: &CQGrid,
        tab: &RKTableau,
        dim: usize,
        mut f: impl FnMut(f64, &mut [f64]),
    ) -> Self {
        let mut sig = Self::zeros(grid.n_steps, tab.m, dim);
        for n in 0..=grid.n_steps {
            for i in 0..tab.m {
                let t = grid.t(n) + tab.c[i] * grid.tau;
                let off = sig.offset(n, i);
                f(t, &mut sig.data[off..off + dim]);
            }
        }
        sig
    }

    pub fn sample_scalar(grid: &CQGrid, tab: &RKTableau, mut f: impl FnMut(f64) -> f64) -> Self {
        Self::sample(grid, tab, 1, |t, out| out[0] = f(t))
    }

    fn offset(&self, n: usize, stage: usize) -> usize {
        (n * self.m + stage) * self.dim
    }

    pub fn stage(&self, n: usize, stage: usize) -> &[f64] {
        let off = self.offset(n, stage);
        &self.data[off..off + self.dim]
    }

    pub fn stage_mut(&mut self, n: usize, stage: usize) -> &mut [f64] {
        let off = self.offset(n, stage);
        &mut self.data[off..off + self.dim]
    }

    /// All stages of entry `n` as one flat slice of length `m * dim`.
    pub fn entry(&self, n: usize) -> &[f64] {
        let off = self.offset(n, 0);
        &self.data[off..off + self.m * self.dim]
    }

    pub fn entry_mut(&mut self, n: usize) -> &mut [f64] {
        let off = self.offset(n, 0);
        &mut self.data[off..off + self.m * self.dim]
    }

    /// Point approximation at `t_n`: for stiffly accurate methods this is the
    /// last stage of entry `n - 1` (stage time `t_{n-1} + c_m tau = t_n`);
    /// the value at `t_0 = 0` is zero by the causality convention.
    pub fn point_value(&self, n: usize) -> Vec<f64> {
        if n == 0 {
            vec![0.0; self.dim]
        } else {
            self.stage(n - 1, self.m - 1).to_vec()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    pub fn raw(&self) -> &[f64] {
        &self.data
    }

    pub fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
