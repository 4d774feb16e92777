//! The frequency-domain kernel shared by all layer potentials.

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::C64;

/// `G(s, x) = e^{-s |x|} / (4 pi |x|)` for `Re s >= 0`, `x != 0`.
pub fn helmholtz_kernel(s: C64, x: &Point) -> Result<C64> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::Domain("kernel evaluated at its singular point x = 0".into()));
    }
    Ok(kernel_at_distance(s, r))
}

/// Kernel value given the (positive) distance `r = |x|`.
#[inline]
pub fn kernel_at_distance(s: C64, r: f64) -> C64 {
    (-s * r).exp() / (4.0 * std::f64::consts::PI * r)
}

/// Radial factor of the kernel gradient: `grad_x G(s, x) = c(r) * x / r`
/// with `c(r) = -(s + 1/r) G(s, r)`.
#[inline]
pub fn kernel_gradient_factor(s: C64, r: f64) -> C64 {
    -(s + 1.0 / r) * kernel_at_distance(s, r)
}

/// `grad_x G(s, x)` as a complex 3-vector.
pub fn kernel_gradient(s: C64, x: &Point) -> Result<nalgebra::Vector3<C64>> {
    let r = x.norm();
    if r == 0.0 {
        return Err(Error::Domain("kernel gradient evaluated at x = 0".into()));
    }
    let c = kernel_gradient_factor(s, r) / r;
    Ok(nalgebra::Vector3::new(c * x.x, c * x.y, c * x.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn laplace_limit() {
        let g = helmholtz_kernel(C64::new(0.0, 0.0), &Point::new(1.0, 0.0, 0.0)).unwrap();
        assert!((g - C64::new(1.0 / (4.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn unit_distance_values() {
        let g = helmholtz_kernel(C64::new(1.0, 0.0), &Point::new(0.0, 1.0, 0.0)).unwrap();
        assert!((g - C64::new((-1.0f64).exp() / (4.0 * PI), 0.0)).norm() < 1e-15);
        // s = 1 + i*pi flips the sign: e^{-1 - i pi} = -e^{-1}
        let g = helmholtz_kernel(C64::new(1.0, PI), &Point::new(0.0, 0.0, 1.0)).unwrap();
        assert!((g - C64::new(-(-1.0f64).exp() / (4.0 * PI), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conjugate_symmetry() {
        let s = C64::new(0.7, 2.3);
        let x = Point::new(0.3, -1.1, 0.6);
        let g = helmholtz_kernel(s, &x).unwrap();
        let gc = helmholtz_kernel(s.conj(), &x).unwrap();
        assert!((gc - g.conj()).norm() < 1e-15);
    }

    #[test]
    fn singular_point_is_rejected() {
        assert!(helmholtz_kernel(C64::new(1.0, 0.0), &Point::zeros()).is_err());
        assert!(kernel_gradient(C64::new(1.0, 0.0), &Point::zeros()).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = C64::new(1.2, 0.8);
        let x = Point::new(0.4, 0.7, -0.2);
        let grad = kernel_gradient(s, &x).unwrap();
        let eps = 1e-6;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += eps;
            xm[k] -= eps;
            let fd = (helmholtz_kernel(s, &xp).unwrap() - helmholtz_kernel(s, &xm).unwrap())
                / (2.0 * eps);
            assert!((grad[k] - fd).norm() < 1e-7, "component {k}");
        }
    }
}
