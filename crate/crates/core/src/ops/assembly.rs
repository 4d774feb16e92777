//! Galerkin assembly of the single- and double-layer boundary operators.
//!
//! Matrix entries are the pairing-tested weak forms: with the surface pairing
//! `[a, b] = int (a x nu) . b` and tangential test/trial functions,
//!
//! ```text
//! V[i][j] = -kappa iint G phi_i(x).phi_j(y) - kappa^{-1} iint G div phi_i div phi_j
//! K[i][j] =  iint grad_x G . (phi_j(y) x phi_i(x))
//! ```
//!
//! Both forms are symmetric under exchange of test and trial function (swap
//! the integration variables; the kernel is even, its gradient odd), so each
//! triangle pair is integrated once and scattered into both halves --
//! symmetry of the assembled matrices is exact by construction.

use super::kernel::{kernel_at_distance, kernel_gradient_factor};
use super::quadrature::{duffy_fan, QuadConfig};
use crate::error::{Error, Result};
use crate::materials::MaterialPair;
use crate::mesh::{Point, RTSpace};
use crate::quad::{gauss_01, tri_rule};
use crate::C64;
use nalgebra::DMatrix;

/// Cached per-triangle geometry for the pair loop.
struct TriGeom {
    v: [Point; 3],
    centroid: Point,
    /// Radius of the centroid-centered enclosing sphere.
    radius: f64,
    /// Circumscribed-circle diameter.
    diam: f64,
    area: f64,
    /// Vertex opposite local edge k.
    opp: [Point; 3],
    /// Basis scaling sign_k * L_k / (2 A).
    coef: [f64; 3],
    /// Divergence sign_k * L_k / A.
    div: [f64; 3],
    /// Global edge index per local edge.
    edge: [usize; 3],
}

fn tri_geom(space: &RTSpace, t: usize) -> TriGeom {
    let mesh = &space.mesh;
    let tri = mesh.triangles[t];
    let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
    let centroid = (v[0] + v[1] + v[2]) / 3.0;
    let radius = v.iter().map(|p| (p - centroid).norm()).fold(0.0, f64::max);
    let area = mesh.areas[t];
    let (la, lb, lc) = ((v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm());
    let diam = la * lb * lc / (2.0 * area);
    let mut opp = [Point::zeros(); 3];
    let mut coef = [0.0; 3];
    let mut div = [0.0; 3];
    let mut edge = [0usize; 3];
    for k in 0..3 {
        opp[k] = v[(k + 2) % 3];
        let (e, sign) = space.tri_edges[t][k];
        let l = space.edge_length(e);
        coef[k] = sign * l / (2.0 * area);
        div[k] = sign * l / area;
        edge[k] = e;
    }
    TriGeom { v, centroid, radius, diam, area, opp, coef, div, edge }
}

/// Assemble V and K at the wavenumber `kappa` in one pass (the kernel
/// evaluations are shared).
pub fn assemble_vk(
    kappa: C64,
    space: &RTSpace,
    cfg: &QuadConfig,
) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    cfg.validate()?;
    if kappa.re <= 0.0 {
        return Err(Error::Numerical(format!(
            "wavenumber {kappa} has non-positive real part; the kernel would not decay"
        )));
    }
    let n = space.n_dofs();
    let n_tri = space.mesh.n_triangles();
    let geom: Vec<TriGeom> = (0..n_tri).map(|t| tri_geom(space, t)).collect();

    let gauss = gauss_01(match cfg.singular_order {
        q @ 2..=6 => q,
        _ => 8,
    });
    let outer_rule = tri_rule(5);

    let mut v_mat = DMatrix::<C64>::zeros(n, n);
    let mut k_mat = DMatrix::<C64>::zeros(n, n);
    let mut inner_pts: Vec<(Point, f64)> = Vec::new();

    for t1 in 0..n_tri {
        let g1 = &geom[t1];
        for t2 in 0..=t1 {
            let g2 = &geom[t2];
            let gap = (g1.centroid - g2.centroid).norm() - g1.radius - g2.radius;
            let diam = 0.5 * (g1.diam + g2.diam);
            let mut gsum = C64::default();
            let mut vsum = [[C64::default(); 3]; 3];
            let mut ksum = [[C64::default(); 3]; 3];

            let mut accumulate = |x: &Point, wx: f64, y: &Point, wy: f64, skew: bool| {
                let d = x - y;
                let r = d.norm();
                let w = wx * wy;
                let g = kernel_at_distance(kappa, r);
                let wg = g * w;
                gsum += wg;
                let xa = [x - g1.opp[0], x - g1.opp[1], x - g1.opp[2]];
                let yc = [y - g2.opp[0], y - g2.opp[1], y - g2.opp[2]];
                for a in 0..3 {
                    for c in 0..3 {
                        vsum[a][c] += wg * xa[a].dot(&yc[c]);
                    }
                }
                if skew {
                    let cg = kernel_gradient_factor(kappa, r) / r * w;
                    let m = [d.cross(&yc[0]), d.cross(&yc[1]), d.cross(&yc[2])];
                    for a in 0..3 {
                        for c in 0..3 {
                            ksum[a][c] += cg * m[c].dot(&xa[a]);
                        }
                    }
                }
            };

            if gap < cfg.near_factor * diam {
                // close or touching: Duffy fan around the closest point of
                // T2 for every outer point of T1
                for &(l1, l2, wo) in &outer_rule {
                    let x = g1.v[0] * l1 + g1.v[1] * l2 + g1.v[2] * (1.0 - l1 - l2);
                    let wx = wo * g1.area;
                    duffy_fan(&x, &g2.v, &gauss, &mut inner_pts);
                    for &(y, wy) in &inner_pts {
                        accumulate(&x, wx, &y, wy, t1 != t2);
                    }
                }
            } else {
                let rule = cfg.far_rule(gap, diam);
                for &(l1, l2, wo) in &rule {
                    let x = g1.v[0] * l1 + g1.v[1] * l2 + g1.v[2] * (1.0 - l1 - l2);
                    let wx = wo * g1.area;
                    for &(m1, m2, wi) in &rule {
                        let y = g2.v[0] * m1 + g2.v[1] * m2 + g2.v[2] * (1.0 - m1 - m2);
                        accumulate(&x, wx, &y, wi * g2.area, true);
                    }
                }
            }

            // scatter; the pair (t2, t1) is covered by symmetry
            for a in 0..3 {
                for c in 0..3 {
                    let (i, j) = (g1.edge[a], g2.edge[c]);
                    let coef = g1.coef[a] * g2.coef[c];
                    let dv = g1.div[a] * g2.div[c];
                    if t1 == t2 {
                        // K vanishes identically on coplanar identical pairs
                        // (the gradient lies in the plane, the basis cross
                        // product is normal to it); symmetrize V so the
                        // global matrix is symmetric bitwise.
                        let vs = (vsum[a][c] + vsum[c][a]) * 0.5;
                        v_mat[(i, j)] += -kappa * coef * vs - dv / kappa * gsum;
                    } else {
                        let vv = -kappa * coef * vsum[a][c] - dv / kappa * gsum;
                        let kv = coef * ksum[a][c];
                        v_mat[(i, j)] += vv;
                        v_mat[(j, i)] += vv;
                        k_mat[(i, j)] += kv;
                        k_mat[(j, i)] += kv;
                    }
                }
            }
        }
    }
    Ok((v_mat, k_mat))
}

/// Galerkin single-layer boundary operator at the pair's wavenumber.
pub fn assemble_v(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    cfg: &QuadConfig,
) -> Result<DMatrix<C64>> {
    Ok(assemble_vk(pair.wavenumber(s)?, space, cfg)?.0)
}

/// Galerkin double-layer boundary operator at the pair's wavenumber.
pub fn assemble_k(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    cfg: &QuadConfig,
) -> Result<DMatrix<C64>> {
    Ok(assemble_vk(pair.wavenumber(s)?, space, cfg)?.1)
}
