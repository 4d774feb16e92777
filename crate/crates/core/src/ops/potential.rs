//! Off-surface evaluation of the layer potentials.
//!
//! For a surface density `phi` (complex RT0 coefficients) and a point `x`
//! away from the surface,
//!
//! ```text
//! S(kappa) phi (x) = -kappa int G phi dy + kappa^{-1} grad int G div phi dy
//! D(kappa) phi (x) =  int grad_x G x phi dy
//! ```
//!
//! Triangles close to the target are subdivided recursively so the fixed
//! rule resolves the near-singular kernel; targets closer than a fraction of
//! the local element size are flagged as degraded rather than rejected.

use super::kernel::{kernel_at_distance, kernel_gradient_factor};
use super::quadrature::closest_point_triangle;
use crate::error::{Error, Result};
use crate::materials::{MaterialPair, Side};
use crate::mesh::{Point, RTSpace, SurfaceMesh};
use crate::quad::tri_rule;
use crate::C64;
use nalgebra::Vector3;

pub type CVector = Vector3<C64>;

/// Evaluation points with side tags and their distance to the surface.
#[derive(Debug, Clone)]
pub struct PotentialTargets {
    pub points: Vec<Point>,
    pub sides: Vec<Side>,
    /// Minimum distance of any point to the surface.
    pub min_distance: f64,
}

impl PotentialTargets {
    pub fn new(points: Vec<Point>, sides: Vec<Side>, mesh: &SurfaceMesh) -> Result<Self> {
        if points.len() != sides.len() {
            return Err(Error::InvalidParameter(
                "one side tag per evaluation point is required".into(),
            ));
        }
        let mut min_distance = f64::INFINITY;
        for p in &points {
            min_distance = min_distance.min(distance_to_surface(mesh, p));
        }
        if !(min_distance > 1e-12 * mesh.h) {
            return Err(Error::InvalidParameter(format!(
                "evaluation points must lie strictly off the surface (distance {min_distance})"
            )));
        }
        Ok(Self { points, sides, min_distance })
    }
}

/// Distance from `p` to the closest point of the triangulated surface.
pub fn distance_to_surface(mesh: &SurfaceMesh, p: &Point) -> f64 {
    let mut best = f64::INFINITY;
    for tri in &mesh.triangles {
        let q = closest_point_triangle(
            p,
            &mesh.vertices[tri[0]],
            &mesh.vertices[tri[1]],
            &mesh.vertices[tri[2]],
        );
        best = best.min((p - q).norm());
    }
    best
}

/// Potential values with the near-field accuracy flag.
#[derive(Debug, Clone)]
pub struct PotentialValues {
    pub values: Vec<CVector>,
    /// True when some target was within one quadrature-resolution distance
    /// of the surface; results there have degraded accuracy.
    pub degraded: bool,
}

/// Single-layer potential at the pair's wavenumber `s sqrt(eps mu)`.
pub fn eval_single_layer(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    coeffs: &[C64],
    points: &[Point],
) -> Result<PotentialValues> {
    eval_single_layer_kappa(pair.wavenumber(s)?, space, coeffs, points)
}

/// Double-layer potential at the pair's wavenumber.
pub fn eval_double_layer(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    coeffs: &[C64],
    points: &[Point],
) -> Result<PotentialValues> {
    eval_double_layer_kappa(pair.wavenumber(s)?, space, coeffs, points)
}

pub fn eval_single_layer_kappa(
    kappa: C64,
    space: &RTSpace,
    coeffs: &[C64],
    points: &[Point],
) -> Result<PotentialValues> {
    let mut out = eval_pair_kappa(kappa, space, coeffs, points)?;
    Ok(PotentialValues { values: out.0.drain(..).map(|(s, _)| s).collect(), degraded: out.2 })
}

pub fn eval_double_layer_kappa(
    kappa: C64,
    space: &RTSpace,
    coeffs: &[C64],
    points: &[Point],
) -> Result<PotentialValues> {
    let mut out = eval_pair_kappa(kappa, space, coeffs, points)?;
    Ok(PotentialValues { values: out.0.drain(..).map(|(_, d)| d).collect(), degraded: out.2 })
}

/// Electric and magnetic fields reconstructed from a density pair:
/// `E = -eta S phi + D psi`, `H = -D phi - eta^{-1} S psi`, with
/// `eta = sqrt(mu s) / sqrt(eps s)` of the side's material pair.
pub fn eval_fields(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    phi: &[C64],
    psi: &[C64],
    points: &[Point],
) -> Result<(Vec<CVector>, Vec<CVector>, bool)> {
    let kappa = pair.wavenumber(s)?;
    let eta = pair.impedance_ratio(s)?;
    let (sd_phi, _, degraded_phi) = eval_pair_kappa(kappa, space, phi, points)?;
    let (sd_psi, _, degraded_psi) = eval_pair_kappa(kappa, space, psi, points)?;
    let mut e = Vec::with_capacity(points.len());
    let mut h = Vec::with_capacity(points.len());
    for (&(ref s_phi, ref d_phi), &(ref s_psi, ref d_psi)) in sd_phi.iter().zip(&sd_psi) {
        e.push(d_psi - s_phi * eta);
        h.push(-(d_phi + s_psi / eta));
    }
    Ok((e, h, degraded_phi || degraded_psi))
}

/// Shared single pass computing both S(kappa)phi and D(kappa)phi per target.
/// Returns ((S, D) per point, min distance, degraded flag).
#[allow(clippy::type_complexity)]
fn eval_pair_kappa(
    kappa: C64,
    space: &RTSpace,
    coeffs: &[C64],
    points: &[Point],
) -> Result<(Vec<(CVector, CVector)>, f64, bool)> {
    if kappa.re <= 0.0 {
        return Err(Error::Numerical(format!(
            "wavenumber {kappa} has non-positive real part"
        )));
    }
    if coeffs.len() != space.n_dofs() {
        return Err(Error::InvalidParameter(format!(
            "density has {} coefficients, space has {} DOFs",
            coeffs.len(),
            space.n_dofs()
        )));
    }
    let mesh = &space.mesh;
    let rule = tri_rule(4);
    let n_tri = mesh.n_triangles();

    // per-triangle constants: opposite vertices with complex scaling, and the
    // (constant) complex surface divergence
    let mut div_phi = vec![C64::default(); n_tri];
    let mut scale = vec![[C64::default(); 3]; n_tri];
    for t in 0..n_tri {
        for k in 0..3 {
            let (e, sign) = space.tri_edges[t][k];
            let c = coeffs[e] * (sign * space.edge_length(e) / (2.0 * mesh.areas[t]));
            scale[t][k] = c;
            div_phi[t] += coeffs[e] * space.basis_div(t, k);
        }
    }

    let mut results = Vec::with_capacity(points.len());
    let mut global_min = f64::INFINITY;
    let mut degraded = false;

    for x in points {
        let mut int_g_phi = CVector::zeros(); // int G phi
        let mut int_grad = CVector::zeros(); // int grad_x G * div phi
        let mut int_grad_cross = CVector::zeros(); // int grad_x G x phi

        for t in 0..n_tri {
            let tri = mesh.triangles[t];
            let v = [mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]];
            let opp = [v[2], v[0], v[1]];
            let q = closest_point_triangle(x, &v[0], &v[1], &v[2]);
            let dist = (x - q).norm();
            let diam = mesh.h.min(
                (v[1] - v[0]).norm() * (v[2] - v[1]).norm() * (v[0] - v[2]).norm()
                    / (2.0 * mesh.areas[t]),
            );
            global_min = global_min.min(dist);
            if dist < 0.25 * diam {
                degraded = true;
            }
            if dist == 0.0 {
                return Err(Error::Numerical(
                    "potential evaluation point lies on the surface".into(),
                ));
            }
            // subdivide until the sub-element size is comparable to the gap
            let depth = if dist >= 1.5 * diam {
                0
            } else {
                (((1.5 * diam / dist).log2().ceil() as i64).max(1) as usize).min(4)
            };
            integrate_tri(
                &v,
                mesh.areas[t],
                depth,
                &rule,
                &mut |y: &Point, w: f64| {
                    let d = x - y;
                    let r = d.norm();
                    let g = kernel_at_distance(kappa, r) * w;
                    let cg = kernel_gradient_factor(kappa, r) / r * w;
                    // phi(y) = sum_k scale_k (y - opp_k)
                    let mut phi = CVector::zeros();
                    for k in 0..3 {
                        let b = y - opp[k];
                        phi += CVector::new(
                            scale[t][k] * b.x,
                            scale[t][k] * b.y,
                            scale[t][k] * b.z,
                        );
                    }
                    int_g_phi += phi * g;
                    let grad = CVector::new(cg * d.x, cg * d.y, cg * d.z);
                    int_grad += grad * div_phi[t];
                    int_grad_cross += cross_c(&grad, &phi);
                },
            );
        }

        let single = -int_g_phi * kappa + int_grad / kappa;
        let double = int_grad_cross;
        results.push((single, double));
    }
    Ok((results, global_min, degraded))
}

/// `a x b` for complex 3-vectors.
pub fn cross_c(a: &CVector, b: &CVector) -> CVector {
    CVector::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

fn integrate_tri(
    v: &[Point; 3],
    area: f64,
    depth: usize,
    rule: &[(f64, f64, f64)],
    f: &mut impl FnMut(&Point, f64),
) {
    if depth == 0 {
        for &(l1, l2, w) in rule {
            let y = v[0] * l1 + v[1] * l2 + v[2] * (1.0 - l1 - l2);
            f(&y, w * area);
        }
        return;
    }
    let m01 = (v[0] + v[1]) / 2.0;
    let m12 = (v[1] + v[2]) / 2.0;
    let m20 = (v[2] + v[0]) / 2.0;
    let quarter = area / 4.0;
    for sub in [
        [v[0], m01, m20],
        [m01, v[1], m12],
        [m20, m12, v[2]],
        [m01, m12, m20],
    ] {
        integrate_tri(&sub, quarter, depth - 1, rule, f);
    }
}
