//! Quadrature for weakly singular double surface integrals.
//!
//! Element pairs are classified by their distance relative to the element
//! size.  Distant pairs use tensor products of symmetric triangle rules with
//! a distance-graded point count.  Close and touching pairs use a
//! coordinate-transform rule: for every outer quadrature point the inner
//! triangle is split into a fan of sub-triangles around the point closest to
//! the outer point, and each fan triangle is integrated with a Duffy map
//! whose Jacobian cancels the `1/r` kernel singularity.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::quad::{tri_rule, TriPoint};

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Gauss points per direction of the Duffy maps used on close pairs.
    pub singular_order: usize,
    /// Polynomial degree of the base triangle rule for distant pairs.
    pub far_degree: usize,
    /// Pairs closer than `near_factor` mean diameters use the singular path.
    pub near_factor: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { singular_order: 4, far_degree: 4, near_factor: 1.2 }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if self.singular_order < 2 {
            return Err(Error::Config(format!(
                "singular quadrature order must be at least 2, got {}",
                self.singular_order
            )));
        }
        if self.far_degree < 2 {
            return Err(Error::Config(format!(
                "far-field quadrature degree must be at least 2, got {}",
                self.far_degree
            )));
        }
        if !(self.near_factor > 0.0) {
            return Err(Error::Config("near-pair distance factor must be positive".into()));
        }
        Ok(())
    }

    /// Triangle rule for a distant pair whose gap is `dist` and whose mean
    /// circumdiameter is `diam`: upgraded close to the singular threshold,
    /// downgraded far away where the integrand is very smooth.
    pub fn far_rule(&self, dist: f64, diam: f64) -> Vec<TriPoint> {
        let f = dist / diam;
        if f < 3.0 {
            tri_rule(self.far_degree.max(5))
        } else if f < 8.0 {
            tri_rule(self.far_degree)
        } else {
            tri_rule(self.far_degree.min(2))
        }
    }
}

/// Point of the (closed) triangle `(a, b, c)` closest to `p`.
pub fn closest_point_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Inner quadrature points `(y, w)` over the triangle `(v0, v1, v2)` for an
/// outer point `x`: fan split around the closest point with a Duffy map per
/// fan triangle.  Weights sum to the triangle area up to the (fast-decaying)
/// error of the graded maps.
///
/// The map `y = p + u (a - p) + u t (b - a)` cancels the `1/r` singularity
/// at `p` through its Jacobian `u * |(a-p) x (b-a)|`.  The remaining complex
/// poles of the kernel are resolved by sinh substitutions in both
/// directions: transversally the `t` interval is split at the foot of the
/// perpendicular from `p` onto the edge `(a, b)` and graded towards it;
/// radially the grading is centered on the exact complex pole of the
/// distance along each ray, which also removes the branch points of the
/// distance itself.
pub fn duffy_fan(
    x: &Point,
    v: &[Point; 3],
    gauss: &[(f64, f64)],
    out: &mut Vec<(Point, f64)>,
) {
    out.clear();
    let p = closest_point_triangle(x, &v[0], &v[1], &v[2]);
    let xp = x - p;
    let total_area = 0.5 * (v[1] - v[0]).cross(&(v[2] - v[0])).norm();
    for k in 0..3 {
        let (a, b) = (v[k], v[(k + 1) % 3]);
        let ab = b - a;
        let two_area = (a - p).cross(&ab).norm();
        if two_area <= 1e-13 * total_area {
            continue; // p lies on this edge: degenerate fan triangle
        }
        let foot = (p - a).dot(&ab) / ab.norm_squared();
        // in-plane pole offset of the transverse integrand, in t units
        let dt_pole = two_area / ab.norm_squared();
        let split = [0.0, foot, 1.0];
        let plain = [0.0, 1.0];
        let breaks: &[f64] =
            if foot > 0.02 && foot < 0.98 { &split } else { &plain };

        for bw in breaks.windows(2) {
            let (lo, hi) = (bw[0], bw[1]);
            let len = hi - lo;
            if len <= 0.0 {
                continue;
            }
            // transverse sinh map from the endpoint nearest the foot of the
            // perpendicular, graded by the pole distance; for the pure 1/r
            // kernel the transformed integrand is nearly constant
            let from_hi = (hi - foot).abs() < (lo - foot).abs();
            let near = if from_hi { hi } else { lo };
            let delta = dt_pole.hypot(near - foot).max(1e-300);
            let big_w = (len / delta).asinh();
            for &(tq, wt) in gauss {
                let arg = big_w * tq;
                let off = delta * arg.sinh();
                let t = if from_hi { hi - off } else { lo + off };
                let jac_t = delta * arg.cosh() * big_w;
                let w_dir = (a - p) + ab * t;

                // Radial grading: along the ray direction `w_dir` the squared
                // distance to `x` is `|w_dir|^2 ((u - alpha)^2 + beta^2)`, so
                // the kernel has its singularity at the complex radial
                // coordinate `u0 = alpha + i beta`.  The shifted substitution
                // `u = alpha + beta sinh(xi)` turns the distance into
                // `|w_dir| beta cosh(xi)`, which is analytic and pole-free on
                // the real axis.
                let wn2 = w_dir.norm_squared();
                let alpha = xp.dot(&w_dir) / wn2;
                let beta = xp.cross(&w_dir).norm() / wn2;
                let pole_dist = if alpha < 0.0 {
                    alpha.hypot(beta)
                } else if alpha > 1.0 {
                    (alpha - 1.0).hypot(beta)
                } else {
                    beta
                };
                let radial_map = beta > 1e-14 && pole_dist < 1.0;
                let (xi_lo, xi_span) = if radial_map {
                    let lo = (-alpha / beta).asinh();
                    (lo, ((1.0 - alpha) / beta).asinh() - lo)
                } else {
                    (0.0, 0.0)
                };
                for &(uq, wu) in gauss {
                    let (u, du) = if radial_map {
                        let xi = xi_lo + xi_span * uq;
                        (alpha + beta * xi.sinh(), beta * xi.cosh() * xi_span)
                    } else {
                        (uq, 1.0)
                    };
                    let y = p + w_dir * u;
                    out.push((y, wu * du * wt * jac_t * u * two_area));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_01;

    #[test]
    fn config_validation() {
        assert!(QuadConfig::default().validate().is_ok());
        assert!(QuadConfig { singular_order: 1, ..Default::default() }.validate().is_err());
        assert!(QuadConfig { far_degree: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn closest_point_cases() {
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        let c = Point::new(0.0, 1.0, 0.0);
        // interior projection
        let q = closest_point_triangle(&Point::new(0.2, 0.3, 5.0), &a, &b, &c);
        assert!((q - Point::new(0.2, 0.3, 0.0)).norm() < 1e-14);
        // vertex region
        let q = closest_point_triangle(&Point::new(-1.0, -1.0, 0.0), &a, &b, &c);
        assert!((q - a).norm() < 1e-14);
        // edge region
        let q = closest_point_triangle(&Point::new(0.5, -2.0, 1.0), &a, &b, &c);
        assert!((q - Point::new(0.5, 0.0, 0.0)).norm() < 1e-14);
        // hypotenuse region
        let q = closest_point_triangle(&Point::new(1.0, 1.0, 0.0), &a, &b, &c);
        assert!((q - Point::new(0.5, 0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn duffy_weights_sum_to_area() {
        // the graded maps are not polynomially exact, so the weight sum only
        // converges to the area -- but it must do so fast
        let v = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(2.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let mut pts = Vec::new();
        for x in [
            Point::new(0.3, 0.2, 0.0),
            Point::new(0.0, 0.0, 0.0),
            Point::new(0.4, 0.1, 0.2),
            Point::new(5.0, 5.0, 5.0),
        ] {
            for (n, tol) in [(4usize, 1e-3), (8, 1e-7)] {
                duffy_fan(&x, &v, &gauss_01(n), &mut pts);
                assert!(pts.iter().all(|&(_, w)| w > 0.0), "negative weight");
                let total: f64 = pts.iter().map(|&(_, w)| w).sum();
                assert!((total - 1.0).abs() < tol, "n={n}: weights sum {total}");
            }
        }
    }

    #[test]
    fn duffy_integrates_vertex_singularity() {
        // int over the triangle (0,0), (1,0), (0,1) of 1/|y| dA
        // = int_0^{pi/2} dtheta / (cos + sin) = sqrt(2) ln(1 + sqrt 2)
        let v = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let exact = 2.0f64.sqrt() * (1.0 + 2.0f64.sqrt()).ln();
        let gauss = gauss_01(8);
        let mut pts = Vec::new();
        duffy_fan(&Point::zeros(), &v, &gauss, &mut pts);
        let got: f64 = pts.iter().map(|&(y, w)| w / y.norm()).sum();
        assert!((got - exact).abs() < 1e-10, "got {got}, exact {exact}");
    }

    #[test]
    fn duffy_integrates_interior_singularity() {
        // 1/|y - x| with x strictly inside; reference from a much finer rule
        let v = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.3, 0.1, 0.0),
            Point::new(0.2, 1.1, 0.0),
        ];
        let x = Point::new(0.4, 0.35, 0.0);
        let eval = |n: usize| {
            let gauss = gauss_01(n);
            let mut pts = Vec::new();
            duffy_fan(&x, &v, &gauss, &mut pts);
            pts.iter().map(|&(y, w)| w / (y - x).norm()).sum::<f64>()
        };
        let coarse = eval(4);
        let fine = eval(8);
        assert!((coarse - fine).abs() < 1e-6 * fine.abs(), "{coarse} vs {fine}");
    }

    #[test]
    fn far_rule_grading() {
        let cfg = QuadConfig::default();
        assert_eq!(cfg.far_rule(2.0, 1.0).len(), 7); // close: upgraded
        assert_eq!(cfg.far_rule(5.0, 1.0).len(), 6); // base
        assert_eq!(cfg.far_rule(20.0, 1.0).len(), 3); // very far: downgraded
    }
}
