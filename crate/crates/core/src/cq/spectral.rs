//! Contour-node machinery: scaled FFT transforms, quadrature weights, the
//! discrete convolution, and the frequency-decoupled solver.
//!
//! Two evaluation paths exist on purpose.  The spectral path (transform,
//! multiply node values, transform back) is the canonical one: it is fast,
//! it is what the solver inverts, and composing two spectral convolutions on
//! the same grid is algebraically identical to convolving with the product
//! symbol (the contour aliasing cancels term by term).  The weight-marching
//! path computes `sum_j W_{n-j} g^j` literally; it is O(N^2) but exactly
//! causal, and serves as a cross-check.

use super::eig::{eig_small, Eig};
use super::{CQGrid, RKTableau, StageSignal};
use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;
use rustfft::FftPlanner;

/// Eigendecomposition of `Delta(zeta_l)/tau` at one contour node.
pub struct NodeData {
    pub index: usize,
    pub zeta: C64,
    pub eig: Eig,
}

/// Decompose the differentiation symbol at every contour node, verifying the
/// right-half-plane property of its eigenvalues.  If the eigenvector basis is
/// ill-conditioned at some node, the radius is nudged (documented retry)
/// before giving up.
pub fn contour_nodes(tab: &RKTableau, grid: &CQGrid) -> Result<(Vec<NodeData>, CQGrid)> {
    const COND_LIMIT: f64 = 1e10;
    let mut last_err = None;
    for factor in [1.0, 0.999, 1.001] {
        let mut g = grid.clone();
        g.rho = (grid.rho * factor).min(1.0 - 1e-12);
        match try_nodes(tab, &g, COND_LIMIT) {
            Ok(nodes) => return Ok((nodes, g)),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

fn try_nodes(tab: &RKTableau, grid: &CQGrid, cond_limit: f64) -> Result<Vec<NodeData>> {
    let l_nodes = grid.n_nodes();
    let mut out = Vec::with_capacity(l_nodes);
    for l in 0..l_nodes {
        let zeta = grid.zeta(l);
        let delta = tab.delta_symbol(zeta)?;
        let eig = eig_small(&(delta / C64::from(grid.tau)))?;
        for lam in &eig.values {
            if lam.re <= 0.0 {
                return Err(Error::Numerical(format!(
                    "node {l}: frequency {lam} not in the right half-plane"
                )));
            }
        }
        if eig.cond > cond_limit {
            return Err(Error::Numerical(format!(
                "node {l}: eigenvector basis condition {:.3e} exceeds limit",
                eig.cond
            )));
        }
        out.push(NodeData { index: l, zeta, eig });
    }
    Ok(out)
}

/// Node-indexed spectral data: for each contour node `l`, `m` stage blocks of
/// `dim` complex entries (contiguous per node).
pub struct Spectral {
    pub n_nodes: usize,
    pub m: usize,
    pub dim: usize,
    pub rho: f64,
    data: Vec<C64>,
}

impl Spectral {
    pub fn zeros(n_nodes: usize, m: usize, dim: usize, rho: f64) -> Self {
        Self { n_nodes, m, dim, rho, data: vec![C64::ZERO; n_nodes * m * dim] }
    }

    /// Scaled forward transform: `ghat_l = sum_n g^n rho^n e^{+2 pi i n l / L}`.
    pub fn forward(g: &StageSignal, grid: &CQGrid) -> Self {
        let l_nodes = grid.n_nodes();
        assert_eq!(g.n_steps + 1, l_nodes, "signal length must match the grid");
        let (m, dim) = (g.m, g.dim);
        let mut spec = Self::zeros(l_nodes, m, dim, grid.rho);
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(l_nodes);
        let mut buf = vec![C64::ZERO; l_nodes];
        let pow: Vec<f64> = rho_powers(grid.rho, l_nodes);
        for i in 0..m {
            for k in 0..dim {
                for n in 0..l_nodes {
                    buf[n] = C64::from(g.stage(n, i)[k] * pow[n]);
                }
                fft.process(&mut buf);
                for l in 0..l_nodes {
                    spec.data[(l * m + i) * dim + k] = buf[l];
                }
            }
        }
        spec
    }

    /// Inverse of [`Spectral::forward`]: real part of
    /// `rho^{-n}/L sum_l phat_l e^{-2 pi i n l / L}`.
    pub fn inverse(&self) -> StageSignal {
        let l_nodes = self.n_nodes;
        let mut sig = StageSignal::zeros(l_nodes - 1, self.m, self.dim);
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(l_nodes);
        let mut buf = vec![C64::ZERO; l_nodes];
        let pow = rho_powers(self.rho, l_nodes);
        let scale = 1.0 / l_nodes as f64;
        for i in 0..self.m {
            for k in 0..self.dim {
                for l in 0..l_nodes {
                    buf[l] = self.data[(l * self.m + i) * self.dim + k];
                }
                fft.process(&mut buf);
                for n in 0..l_nodes {
                    sig.stage_mut(n, i)[k] = buf[n].re * scale / pow[n];
                }
            }
        }
        sig
    }

    pub fn node_block(&self, l: usize) -> &[C64] {
        let sz = self.m * self.dim;
        &self.data[l * sz..(l + 1) * sz]
    }

    pub fn node_block_mut(&mut self, l: usize) -> &mut [C64] {
        let sz = self.m * self.dim;
        &mut self.data[l * sz..(l + 1) * sz]
    }

    /// Fill the upper half of the node range with the complex conjugate of the
    /// lower half (valid for real signals and conjugation-equivariant symbols).
    pub fn mirror_conjugate(&mut self) {
        let l_nodes = self.n_nodes;
        let sz = self.m * self.dim;
        for l in 1..l_nodes.div_ceil(2) {
            let (head, tail) = self.data.split_at_mut((l_nodes - l) * sz);
            let src = &head[l * sz..(l + 1) * sz];
            for (d, s) in tail[..sz].iter_mut().zip(src) {
                *d = s.conj();
            }
        }
    }
}

fn rho_powers(rho: f64, n: usize) -> Vec<f64> {
    let mut pow = Vec::with_capacity(n);
    let mut p = 1.0;
    for _ in 0..n {
        pow.push(p);
        p *= rho;
    }
    pow
}

/// Mix the stage blocks of one node into the eigenbasis: `u_j = sum_i Qinv[j][i] v_i`.
pub fn to_eigen_basis(eig: &Eig, block: &[C64], dim: usize) -> Vec<C64> {
    stage_transform(&eig.inverse, block, dim)
}

/// Inverse of [`to_eigen_basis`]; the output dimension may differ from the
/// input's (e.g. potential evaluations at targets).
pub fn from_eigen_basis(eig: &Eig, block: &[C64], dim: usize) -> Vec<C64> {
    stage_transform(&eig.vectors, block, dim)
}

fn stage_transform(q: &DMatrix<C64>, block: &[C64], dim: usize) -> Vec<C64> {
    let m = q.nrows();
    assert_eq!(block.len(), m * dim);
    let mut out = vec![C64::ZERO; m * dim];
    for j in 0..m {
        for i in 0..m {
            let w = q[(j, i)];
            if w != C64::ZERO {
                let src = &block[i * dim..(i + 1) * dim];
                let dst = &mut out[j * dim..(j + 1) * dim];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
    out
}

/// Quadrature weights `W_n` of a scalar symbol as `m x m` stage matrices:
/// `W_n = rho^{-n}/L sum_l k(Delta(zeta_l)/tau) e^{-2 pi i n l / L}`.
pub fn cq_weights(
    mut k: impl FnMut(C64) -> Result<C64>,
    tab: &RKTableau,
    grid: &CQGrid,
) -> Result<Vec<DMatrix<C64>>> {
    let (nodes, grid) = contour_nodes(tab, grid)?;
    let l_nodes = grid.n_nodes();
    let m = tab.m;
    // node values k(Delta(zeta_l)/tau) = Q diag(k(lambda)) Qinv
    let mut node_mats = Vec::with_capacity(l_nodes);
    for nd in &nodes {
        let kv: Vec<C64> = nd
            .eig
            .values
            .iter()
            .map(|&lam| k(lam))
            .collect::<Result<_>>()
            .map_err(|e| Error::Numerical(format!("symbol evaluation failed at node {}: {e}", nd.index)))?;
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(kv));
        node_mats.push(&nd.eig.vectors * diag * &nd.eig.inverse);
    }
    // entrywise FFT over the node index
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(l_nodes);
    let mut weights = vec![DMatrix::<C64>::zeros(m, m); l_nodes];
    let mut buf = vec![C64::ZERO; l_nodes];
    let pow = rho_powers(grid.rho, l_nodes);
    for r in 0..m {
        for c in 0..m {
            for l in 0..l_nodes {
                buf[l] = node_mats[l][(r, c)];
            }
            fft.process(&mut buf);
            for n in 0..l_nodes {
                weights[n][(r, c)] = buf[n] / (l_nodes as f64 * pow[n]);
            }
        }
    }
    Ok(weights)
}

/// Causal discrete convolution by explicit weight marching:
/// `out^n = sum_{j <= n} W_{n-j} g^j` (stage matrices acting blockwise).
pub fn discrete_convolution(weights: &[DMatrix<C64>], g: &StageSignal) -> StageSignal {
    let m = g.m;
    let dim = g.dim;
    assert!(!weights.is_empty() && weights[0].nrows() == m, "weight/stage shape mismatch");
    let mut out = StageSignal::zeros(g.n_steps, m, dim);
    let mut acc = vec![C64::ZERO; m * dim];
    for n in 0..=g.n_steps {
        acc.iter_mut().for_each(|v| *v = C64::ZERO);
        for j in 0..=n {
            let w = &weights[n - j];
            let gj = g.entry(j);
            for r in 0..m {
                for c in 0..m {
                    let wrc = w[(r, c)];
                    if wrc != C64::ZERO {
                        for k in 0..dim {
                            acc[r * dim + k] += wrc * gj[c * dim + k];
                        }
                    }
                }
            }
        }
        let dst = out.entry_mut(n);
        for (d, a) in dst.iter_mut().zip(&acc) {
            *d = a.re;
        }
    }
    out
}

/// Apply a scalar symbol `k(dt)` through the spectral path.
pub fn apply_symbol(
    mut k: impl FnMut(C64) -> Result<C64>,
    g: &StageSignal,
    tab: &RKTableau,
    grid: &CQGrid,
) -> Result<StageSignal> {
    let (nodes, grid) = contour_nodes(tab, grid)?;
    let mut spec = Spectral::forward(g, &grid);
    let dim = g.dim;
    for nd in &nodes {
        let mut u = to_eigen_basis(&nd.eig, spec.node_block(nd.index), dim);
        for (j, &lam) in nd.eig.values.iter().enumerate() {
            let kv = k(lam)?;
            for v in &mut u[j * dim..(j + 1) * dim] {
                *v *= kv;
            }
        }
        let back = from_eigen_basis(&nd.eig, &u, dim);
        spec.node_block_mut(nd.index).copy_from_slice(&back);
    }
    Ok(spec.inverse())
}

/// Solve the convolution equation `A(dt) phi = g`.
///
/// `solve_at(lambda, rhs)` must overwrite `rhs` with `A(lambda)^{-1} rhs`.
/// Only nodes in the lower half of the contour are visited; the upper half is
/// filled by conjugation, which requires the frequency operator to satisfy
/// `A(conj s) = conj A(s)` (real time-domain kernel) and `g` to be real.
pub fn solve_convolution_equation(
    mut solve_at: impl FnMut(C64, &mut [C64]) -> Result<()>,
    g: &StageSignal,
    tab: &RKTableau,
    grid: &CQGrid,
) -> Result<StageSignal> {
    if g.max_abs() > 0.0 {
        let head = g.entry(0).iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if head > 1e-8 * g.max_abs() {
            eprintln!(
                "warning: convolution input does not vanish at t = 0 \
                 (|g^0| = {head:.3e}); accuracy may degrade"
            );
        }
    }
    let (nodes, grid) = contour_nodes(tab, grid)?;
    let l_nodes = grid.n_nodes();
    let mut spec = Spectral::forward(g, &grid);
    let dim = g.dim;
    for nd in nodes.iter().take(l_nodes / 2 + 1) {
        let mut u = to_eigen_basis(&nd.eig, spec.node_block(nd.index), dim);
        for (j, &lam) in nd.eig.values.iter().enumerate() {
            solve_at(lam, &mut u[j * dim..(j + 1) * dim])
                .map_err(|e| Error::Numerical(format!("frequency solve failed at node {}: {e}", nd.index)))?;
        }
        let back = from_eigen_basis(&nd.eig, &u, dim);
        spec.node_block_mut(nd.index).copy_from_slice(&back);
    }
    spec.mirror_conjugate();
    Ok(spec.inverse())
}

/// Marker trait alias kept for documentation: any `FnMut(C64, &mut [C64])`
/// in-place solver works with [`solve_convolution_equation`].
pub trait FrequencySolver: FnMut(C64, &mut [C64]) -> Result<()> {}
impl<T: FnMut(C64, &mut [C64]) -> Result<()>> FrequencySolver for T {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::radau_tableau;
    use approx::assert_relative_eq;

    fn grid_small() -> CQGrid {
        CQGrid::new(1.6, 16).unwrap()
    }

    #[test]
    fn identity_symbol_weights() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let w = cq_weights(|_| Ok(C64::ONE), &tab, &grid).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((w[0][(r, c)] - expect).norm() < 1e-7);
            }
        }
        for wn in w.iter().skip(1) {
            assert!(wn.norm() < 1e-7, "nonzero tail weight {}", wn.norm());
        }
    }

    #[test]
    fn derivative_symbol_weights_backward_euler() {
        // K(s) = s, m = 1, tau = 0.1: K(Delta(z)/tau) = (1-z)/tau
        let tab = radau_tableau(1).unwrap();
        let grid = CQGrid::new(1.6, 16).unwrap();
        let mut g2 = grid.clone();
        g2.tau = 0.1;
        let w = cq_weights(|s| Ok(s), &tab, &g2).unwrap();
        assert!((w[0][(0, 0)] - 10.0).norm() < 1e-6);
        assert!((w[1][(0, 0)] + 10.0).norm() < 1e-6);
        for wn in w.iter().skip(2) {
            assert!(wn.norm() < 1e-6);
        }
    }

    #[test]
    fn integral_symbol_weights_backward_euler() {
        // K(s) = 1/s, m = 1, tau = 0.5: weights are all tau
        let tab = radau_tableau(1).unwrap();
        let mut grid = CQGrid::new(8.0, 16).unwrap();
        grid.tau = 0.5;
        let w = cq_weights(|s| Ok(1.0 / s), &tab, &grid).unwrap();
        for wn in &w {
            assert!((wn[(0, 0)] - 0.5).norm() < 1e-6, "weight {}", wn[(0, 0)]);
        }
    }

    #[test]
    fn identity_convolution_returns_input() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| (t * t * t) * (-t).exp());
        let w = cq_weights(|_| Ok(C64::ONE), &tab, &grid).unwrap();
        let out = discrete_convolution(&w, &g);
        for n in 0..=grid.n_steps {
            for i in 0..tab.m {
                assert_relative_eq!(out.stage(n, i)[0], g.stage(n, i)[0], epsilon = 1e-7);
            }
        }
        let out2 = apply_symbol(|_| Ok(C64::ONE), &g, &tab, &grid).unwrap();
        for n in 0..=grid.n_steps {
            for i in 0..tab.m {
                assert_relative_eq!(out2.stage(n, i)[0], g.stage(n, i)[0], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn derivative_then_integral_is_identity() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| t.powi(4) * (-t).exp());
        let dg = apply_symbol(|s| Ok(s), &g, &tab, &grid).unwrap();
        let back = apply_symbol(|s| Ok(1.0 / s), &dg, &tab, &grid).unwrap();
        let scale = g.max_abs();
        for n in 0..=grid.n_steps {
            for i in 0..tab.m {
                assert!(
                    (back.stage(n, i)[0] - g.stage(n, i)[0]).abs() <= 1e-10 * scale,
                    "n={n} i={i}: {} vs {}",
                    back.stage(n, i)[0],
                    g.stage(n, i)[0]
                );
            }
        }
    }

    #[test]
    fn marching_and_spectral_paths_agree() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| (t * t) * (-2.0 * t).exp());
        let w = cq_weights(|s| Ok(s.sqrt()), &tab, &grid).unwrap();
        let a = discrete_convolution(&w, &g);
        let b = apply_symbol(|s| Ok(s.sqrt()), &g, &tab, &grid).unwrap();
        for n in 0..=grid.n_steps {
            for i in 0..tab.m {
                assert!(
                    (a.stage(n, i)[0] - b.stage(n, i)[0]).abs() < 1e-6,
                    "paths disagree at n={n}"
                );
            }
        }
    }

    #[test]
    fn marching_is_bitwise_causal() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| (t * 1.3).sin() * t);
        let w = cq_weights(|s| Ok(s.sqrt()), &tab, &grid).unwrap();
        let full = discrete_convolution(&w, &g);
        let n0 = 7;
        let mut cut = g.clone();
        for n in (n0 + 1)..=grid.n_steps {
            cut.entry_mut(n).iter_mut().for_each(|v| *v = 0.0);
        }
        let cut_out = discrete_convolution(&w, &cut);
        for n in 0..=n0 {
            assert_eq!(full.entry(n), cut_out.entry(n), "output differs at n={n} <= {n0}");
        }
    }

    #[test]
    fn solve_identity_and_scaling() {
        let tab = radau_tableau(2).unwrap();
        let grid = grid_small();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| t * t * (-t).exp());
        let phi = solve_convolution_equation(|_, _| Ok(()), &g, &tab, &grid).unwrap();
        for n in 0..=grid.n_steps {
            assert_relative_eq!(phi.stage(n, 0)[0], g.stage(n, 0)[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn solve_derivative_equation_gives_antiderivative() {
        // A(s) = s, g(t) = t^2 -> phi(t) = t^3/3, order 3 at the grid points
        let tab = radau_tableau(2).unwrap();
        let grid = CQGrid::new(1.0, 32).unwrap();
        let g = StageSignal::sample_scalar(&grid, &tab, |t| t * t);
        let phi = solve_convolution_equation(
            |lam, rhs| {
                for v in rhs.iter_mut() {
                    *v /= lam;
                }
                Ok(())
            },
            &g,
            &tab,
            &grid,
        )
        .unwrap();
        let t = grid.t(grid.n_steps);
        let exact = t * t * t / 3.0;
        let got = phi.point_value(grid.n_steps)[0];
        assert!((got - exact).abs() < 1e-5, "got {got}, exact {exact}");
    }

    #[test]
    fn solve_matches_runge_kutta_time_stepping() {
        // A(s) = 1 + s: y + y' = g, stepped directly with the same tableau
        let tab = radau_tableau(2).unwrap();
        let grid = CQGrid::new(4.0, 64).unwrap();
        let gf = |t: f64| t.powi(4) * (-t).exp();
        let g = StageSignal::sample_scalar(&grid, &tab, gf);
        let phi = solve_convolution_equation(
            |lam, rhs| {
                for v in rhs.iter_mut() {
                    *v /= C64::ONE + lam;
                }
                Ok(())
            },
            &g,
            &tab,
            &grid,
        )
        .unwrap();
        // direct Radau IIA march of y' = g - y, y(0) = 0
        let m = tab.m;
        let tau = grid.tau;
        let mut y = 0.0f64;
        let mut id_plus = nalgebra::DMatrix::<f64>::identity(m, m);
        id_plus += &tab.a * tau;
        let lu = id_plus.lu();
        for n in 0..grid.n_steps {
            let rhs = nalgebra::DVector::from_fn(m, |i, _| {
                y + tau * (0..m).map(|j| tab.a[(i, j)] * gf(grid.t(n) + tab.c[j] * tau)).sum::<f64>()
            });
            let stages = lu.solve(&rhs).unwrap();
            // stiffly accurate: next value is the last stage
            y = stages[m - 1];
            let cq_val = phi.point_value(n + 1)[0];
            assert!(
                (cq_val - y).abs() < 1e-7,
                "n={}: cq {} vs stepping {}",
                n + 1,
                cq_val,
                y
            );
        }
    }
}
