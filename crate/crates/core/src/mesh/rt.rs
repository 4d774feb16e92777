//! Raviart-Thomas order-0 boundary element space and the antisymmetric
//! surface pairing.
//!
//! One degree of freedom per edge.  The global edge direction runs from the
//! lower to the higher vertex index; the adjacent triangle traversing the edge
//! in that direction carries sign +1, the other -1.  On a triangle with area
//! `A`, the basis function of an edge of length `L` with opposite vertex `p`
//! is `sigma * L/(2A) * (x - p)`, with constant surface divergence
//! `sigma * L/A`.

use super::{Point, SurfaceMesh};
use crate::error::{Error, Result};
use crate::quad::{gauss_01, tri_rule};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct RTSpace {
    pub mesh: SurfaceMesh,
    /// Polynomial order; only 0 is implemented (the field exists so higher
    /// orders can be added without changing the interface).
    pub order: usize,
    /// Per triangle, per local edge (k = edge from vertex k to k+1):
    /// (global edge index, sign).
    pub tri_edges: Vec<[(usize, f64); 3]>,
}

impl RTSpace {
    pub fn new(mesh: SurfaceMesh, order: usize) -> Result<Self> {
        if order != 0 {
            return Err(Error::InvalidParameter(format!(
                "only order-0 elements are implemented, requested {order}"
            )));
        }
        let mut lookup = std::collections::HashMap::new();
        for (e, edge) in mesh.edges.iter().enumerate() {
            lookup.insert((edge.v[0], edge.v[1]), e);
        }
        let mut tri_edges = Vec::with_capacity(mesh.triangles.len());
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let mut local = [(0usize, 0.0f64); 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = lookup[&(a.min(b), a.max(b))];
                let sign = if mesh.edges[e].tris[0] == t { 1.0 } else { -1.0 };
                debug_assert_eq!((a < b), sign > 0.0);
                local[k] = (e, sign);
            }
            tri_edges.push(local);
        }
        Ok(Self { mesh, order, tri_edges })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_edges()
    }

    /// Value of the local basis function `k` of triangle `t` at `x` (assumed
    /// to lie in the triangle plane).
    pub fn basis(&self, t: usize, k: usize, x: &Point) -> Point {
        let tri = self.mesh.triangles[t];
        let p = self.mesh.vertices[tri[(k + 2) % 3]];
        let l = self.edge_length(self.tri_edges[t][k].0);
        let sign = self.tri_edges[t][k].1;
        (x - p) * (sign * l / (2.0 * self.mesh.areas[t]))
    }

    /// Constant surface divergence of local basis `k` on triangle `t`.
    pub fn basis_div(&self, t: usize, k: usize) -> f64 {
        let (e, sign) = self.tri_edges[t][k];
        sign * self.edge_length(e) / self.mesh.areas[t]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let edge = &self.mesh.edges[e];
        (self.mesh.vertices[edge.v[1]] - self.mesh.vertices[edge.v[0]]).norm()
    }

    /// Evaluate the function with the given coefficient vector at a point of
    /// triangle `t`.
    pub fn eval(&self, coeffs: &[f64], t: usize, x: &Point) -> Point {
        let mut out = Point::zeros();
        for k in 0..3 {
            out += self.basis(t, k, x) * coeffs[self.tri_edges[t][k].0];
        }
        out
    }

    /// In-plane outward normal of local edge `k` in triangle `t` (the
    /// direction of positive basis flux).
    pub fn edge_conormal(&self, t: usize, k: usize) -> Point {
        let tri = self.mesh.triangles[t];
        let tangent = (self.mesh.vertices[tri[(k + 1) % 3]] - self.mesh.vertices[tri[k]]).normalize();
        tangent.cross(&self.mesh.normals[t])
    }

    /// Edge-moment interpolation of a tangential field: the coefficient of
    /// edge `e` is the mean conormal moment `1/L int_e f . m ds`, with the
    /// conormal `m` taken from the plus triangle.
    pub fn interpolate(&self, f: impl Fn(&Point) -> Point) -> Vec<f64> {
        self.interpolate_moments(|e, x| {
            let (t, k) = self.plus_side(e);
            f(x).dot(&self.edge_conormal(t, k))
        })
    }

    /// Interpolation of the rotated trace `u x nu` of an ambient field `u`
    /// without evaluating the (edge-discontinuous) surface normal: the moment
    /// reduces to the tangential line integral `1/L int_e u . t ds` along the
    /// global edge direction, which is single-valued across the edge.
    pub fn interpolate_rotated_trace(&self, u: impl Fn(&Point) -> Point) -> Vec<f64> {
        self.interpolate_moments(|e, x| {
            let edge = &self.mesh.edges[e];
            let t = (self.mesh.vertices[edge.v[1]] - self.mesh.vertices[edge.v[0]]).normalize();
            u(x).dot(&t)
        })
    }

    fn interpolate_moments(&self, f: impl Fn(usize, &Point) -> f64) -> Vec<f64> {
        let rule = gauss_01(3);
        let mut coeffs = vec![0.0; self.n_dofs()];
        for (e, edge) in self.mesh.edges.iter().enumerate() {
            let (a, b) = (self.mesh.vertices[edge.v[0]], self.mesh.vertices[edge.v[1]]);
            // mean moment: the length factors cancel
            coeffs[e] = rule.iter().map(|&(s, w)| w * f(e, &(a + (b - a) * s))).sum();
        }
        coeffs
    }

    /// (triangle, local edge) of the plus side of edge `e`.
    pub fn plus_side(&self, e: usize) -> (usize, usize) {
        let t = self.mesh.edges[e].tris[0];
        let k = (0..3)
            .find(|&k| self.tri_edges[t][k].0 == e)
            .expect("edge not found in its plus triangle");
        (t, k)
    }

    /// Discrete tangential L2 norm of a coefficient vector (triangle-wise
    /// degree-2 quadrature, exact for RT0 functions).
    pub fn l2_norm(&self, coeffs: &[f64]) -> f64 {
        let rule = tri_rule(2);
        let mut total = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let tri = self.mesh.triangles[t];
            let (v0, v1, v2) = (
                self.mesh.vertices[tri[0]],
                self.mesh.vertices[tri[1]],
                self.mesh.vertices[tri[2]],
            );
            for &(l1, l2, w) in &rule {
                let x = v0 * l1 + v1 * l2 + v2 * (1.0 - l1 - l2);
                total += w * self.mesh.areas[t] * self.eval(coeffs, t, &x).norm_squared();
            }
        }
        total.sqrt()
    }

    /// Galerkin load vector `b_i = int_Gamma phi_i . f dsigma` of a smooth
    /// tangential field.
    pub fn l2_moments(&self, f: impl Fn(&Point) -> Point) -> Vec<f64> {
        let rule = tri_rule(4);
        let mut b = vec![0.0; self.n_dofs()];
        for t in 0..self.mesh.n_triangles() {
            let tri = self.mesh.triangles[t];
            let (v0, v1, v2) = (
                self.mesh.vertices[tri[0]],
                self.mesh.vertices[tri[1]],
                self.mesh.vertices[tri[2]],
            );
            for &(l1, l2, w) in &rule {
                let x = v0 * l1 + v1 * l2 + v2 * (1.0 - l1 - l2);
                let fx = f(&x);
                for k in 0..3 {
                    let (e, _) = self.tri_edges[t][k];
                    b[e] += w * self.mesh.areas[t] * self.basis(t, k, &x).dot(&fx);
                }
            }
        }
        b
    }

    /// L2 norm of the (piecewise constant) surface divergence.
    pub fn div_l2_norm(&self, coeffs: &[f64]) -> f64 {
        let mut total = 0.0;
        for t in 0..self.mesh.n_triangles() {
            let d: f64 = (0..3)
                .map(|k| self.basis_div(t, k) * coeffs[self.tri_edges[t][k].0])
                .sum();
            total += self.mesh.areas[t] * d * d;
        }
        total.sqrt()
    }
}

/// Galerkin matrix of the antisymmetric pairing
/// `B[i][j] = int_Gamma (phi_i x nu) . phi_j`.
#[derive(Debug, Clone)]
pub struct PairingMatrix {
    pub matrix: DMatrix<f64>,
}

/// Assemble the pairing.  Entries are computed by an edge-midpoint rule
/// (exact for the quadratic integrand); antisymmetry is exact by
/// construction: only the upper local triangle is integrated, the lower is
/// its negation, diagonals are zero.
pub fn assemble_pairing(space: &RTSpace) -> PairingMatrix {
    let n = space.n_dofs();
    let mut b = DMatrix::<f64>::zeros(n, n);
    let rule = tri_rule(2);
    for t in 0..space.mesh.n_triangles() {
        let tri = space.mesh.triangles[t];
        let (v0, v1, v2) = (
            space.mesh.vertices[tri[0]],
            space.mesh.vertices[tri[1]],
            space.mesh.vertices[tri[2]],
        );
        let nrm = space.mesh.normals[t];
        let area = space.mesh.areas[t];
        for a in 0..3 {
            for c in (a + 1)..3 {
                let mut val = 0.0;
                for &(l1, l2, w) in &rule {
                    let x = v0 * l1 + v1 * l2 + v2 * (1.0 - l1 - l2);
                    let pa = space.basis(t, a, &x);
                    let pc = space.basis(t, c, &x);
                    val += w * area * pa.cross(&nrm).dot(&pc);
                }
                let (i, j) = (space.tri_edges[t][a].0, space.tri_edges[t][c].0);
                b[(i, j)] += val;
                b[(j, i)] -= val;
            }
        }
    }
    PairingMatrix { matrix: b }
}
