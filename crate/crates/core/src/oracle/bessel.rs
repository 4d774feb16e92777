//! Modified spherical Bessel functions of complex argument.
//!
//! With the decaying fundamental solution `e^{-z r}/r` the separable radial
//! solutions of the vector wave equation are the modified spherical Bessel
//! functions: the regular family `i_l` (`i_0 = sinh(z)/z`) and the decaying
//! family normalized here as `k_l` with `k_0 = e^{-z}/z` (the conventional
//! second-kind function without its `pi/2` prefactor).  Their Wronskian is
//!
//! ```text
//! i_l(z) k_l'(z) - i_l'(z) k_l(z) = -1/z^2        for all l
//! ```
//!
//! `k_l` grows with `l`, so its three-term recurrence is run upward; `i_l`
//! decays with `l`, so it is generated by a downward (Miller) recurrence
//! normalized against the closed form of `i_0`.

use crate::error::{Error, Result};
use crate::C64;

/// Regular and decaying modified spherical Bessel values `(i_l, k_l)` for
/// `l = 0..=lmax`.
///
/// Requires `Re z > 0` (the decaying family is defined on the right half
/// plane).  Returns a numerical error if the values overflow, which happens
/// for `k_l` when `|z|` is extremely small relative to `lmax`.
pub fn modified_spherical_bessel(z: C64, lmax: usize) -> Result<(Vec<C64>, Vec<C64>)> {
    if !(z.re > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "modified spherical Bessel functions need Re z > 0, got {z}"
        )));
    }
    let n = lmax + 1;

    // decaying family: upward recurrence k_{l+1} = k_{l-1} + (2l+1)/z k_l
    let mut k = vec![C64::default(); n];
    k[0] = (-z).exp() / z;
    if n > 1 {
        k[1] = k[0] * (1.0 + 1.0 / z);
    }
    for l in 1..n - 1 {
        k[l + 1] = k[l - 1] + k[l] * ((2 * l + 1) as f64 / z);
    }
    if k.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical(format!(
            "modified spherical Bessel overflow at z = {z}, lmax = {lmax}"
        )));
    }

    // regular family: downward Miller recurrence from a starting degree high
    // enough that the admixture of the growing solution has decayed away,
    // then normalize with i_0 = sinh(z)/z
    let start = lmax + 40 + z.norm() as usize;
    let mut f_hi = C64::new(0.0, 0.0); // f_{l+1}
    let mut f = C64::new(1e-280, 0.0); // f_l
    let mut i = vec![C64::default(); n];
    let mut l = start;
    loop {
        if l < n {
            i[l] = f;
        }
        if l == 0 {
            break;
        }
        let f_lo = f_hi + f * ((2 * l + 1) as f64) / z;
        f_hi = f;
        f = f_lo;
        l -= 1;
        if f.norm_sqr() > 1e200 {
            let scale = 1e-100;
            f *= scale;
            f_hi *= scale;
            for v in i.iter_mut() {
                *v *= scale;
            }
        }
    }
    // bring the unnormalized values to O(1) magnitude first: a direct
    // complex division by i[0] would underflow its squared norm
    let mag = i[0].norm();
    if !(mag > 0.0) {
        return Err(Error::Numerical(format!(
            "downward recurrence lost all precision at z = {z}, lmax = {lmax}"
        )));
    }
    let scale = (z.sinh() / z) / (i[0] / mag) / mag;
    for v in i.iter_mut() {
        *v *= scale;
    }
    Ok((i, k))
}

/// Values together with derivatives: `(i, i', k, k')` for `l = 0..=lmax`.
pub fn modified_spherical_bessel_with_derivatives(
    z: C64,
    lmax: usize,
) -> Result<(Vec<C64>, Vec<C64>, Vec<C64>, Vec<C64>)> {
    let (i, k) = modified_spherical_bessel(z, lmax + 1)?;
    let mut di = Vec::with_capacity(lmax + 1);
    let mut dk = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        let lf = l as f64;
        di.push(i[l + 1] + i[l] * (lf / z));
        dk.push(k[l] * (lf / z) - k[l + 1]);
    }
    Ok((i[..=lmax].to_vec(), di, k[..=lmax].to_vec(), dk))
}

/// Riccati combinations `R_f(z) = (z f(z))' = f + z f'` for both families:
/// `(i, Ri, k, Rk)` for `l = 0..=lmax`.  These are the tangential-derivative
/// factors of the multipole fields.
pub fn riccati(z: C64, lmax: usize) -> Result<(Vec<C64>, Vec<C64>, Vec<C64>, Vec<C64>)> {
    let (i, di, k, dk) = modified_spherical_bessel_with_derivatives(z, lmax)?;
    let ri = i.iter().zip(&di).map(|(f, d)| f + z * d).collect();
    let rk = k.iter().zip(&dk).map(|(f, d)| f + z * d).collect();
    Ok((i, ri, k, rk))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn closed_forms_at_low_degree() {
        let z = C64::new(0.7, 1.3);
        let (i, k) = modified_spherical_bessel(z, 1).unwrap();
        assert!(rel(i[0], z.sinh() / z) < 1e-14);
        assert!(rel(i[1], z.cosh() / z - z.sinh() / (z * z)) < 1e-13);
        assert!(rel(k[0], (-z).exp() / z) < 1e-14);
        assert!(rel(k[1], (-z).exp() * (1.0 / z + 1.0 / (z * z))) < 1e-13);
    }

    #[test]
    fn matches_external_reference_values() {
        // frozen from an independent high-precision evaluation of the
        // half-integer-order modified Bessel functions
        let table: [(usize, C64, C64, C64); 8] = [
            (
                0,
                C64::new(1.0, 0.0),
                C64::new(1.17520119364380146, 0.0),
                C64::new(0.367879441171442322, 0.0),
            ),
            (
                1,
                C64::new(1.0, 0.0),
                C64::new(0.367879441171442322, 0.0),
                C64::new(0.735758882342884643, 0.0),
            ),
            (
                5,
                C64::new(1.0, 0.0),
                C64::new(0.0000999623752006825919, 0.0),
                C64::new(894.314921487776284, 0.0),
            ),
            (
                2,
                C64::new(2.0, -3.0),
                C64::new(-0.63742393907739204, -0.173083210354701636),
                C64::new(-0.00901530171520490664, -0.0610620774593063371),
            ),
            (
                30,
                C64::new(30.0, 40.0),
                C64::new(-249871922.819844729, 189317914.89865513),
                C64::new(-3.41986023006579444e-13, 5.52424773968393664e-13),
            ),
            (
                30,
                C64::new(50.0, 0.0),
                C64::new(5676593928693482.34, 0.0),
                C64::new(3.00777381298633295e-20, 0.0),
            ),
            (
                10,
                C64::new(0.1, 0.0),
                C64::new(7.27467321062256822e-21, 0.0),
                C64::new(6.54556803209997058e19, 0.0),
            ),
            (
                3,
                C64::new(0.5, 0.5),
                C64::new(-0.0024463335862579485, 0.00231406808929103755),
                C64::new(-59.8767953823404431, 2.99190825165573381),
            ),
        ];
        for (l, z, i_ref, k_ref) in table {
            let (i, k) = modified_spherical_bessel(z, l).unwrap();
            assert!(rel(i[l], i_ref) < 1e-12, "i_{l}({z}): {} vs {i_ref}", i[l]);
            assert!(rel(k[l], k_ref) < 1e-12, "k_{l}({z}): {} vs {k_ref}", k[l]);
        }
    }

    #[test]
    fn wronskian_over_argument_grid() {
        // i k' - i' k = -1/z^2 for all degrees; checked over the target
        // region l <= 30, |z| <= 50
        for re in [0.1, 1.0, 10.0, 30.0] {
            for im in [-40.0, -5.0, 0.0, 5.0, 40.0] {
                let z = C64::new(re, im);
                if z.norm() > 50.0 {
                    continue;
                }
                let (i, di, k, dk) =
                    modified_spherical_bessel_with_derivatives(z, 30).unwrap();
                let target = -1.0 / (z * z);
                for l in 0..=30 {
                    let w = i[l] * dk[l] - di[l] * k[l];
                    assert!(
                        rel(w, target) < 1e-12,
                        "Wronskian off at l={l}, z={z}: {w} vs {target}"
                    );
                }
            }
        }
    }

    #[test]
    fn left_half_plane_is_rejected() {
        assert!(modified_spherical_bessel(C64::new(-1.0, 0.0), 3).is_err());
        assert!(modified_spherical_bessel(C64::new(0.0, 2.0), 3).is_err());
    }

    #[test]
    fn extreme_degree_overflow_is_an_error() {
        // k_l at tiny |z| overflows f64 for large l
        assert!(modified_spherical_bessel(C64::new(1e-12, 0.0), 40).is_err());
    }

    #[test]
    fn riccati_matches_derivative_definition() {
        let z = C64::new(1.7, -0.4);
        let (i, ri, k, rk) = riccati(z, 5).unwrap();
        let (i2, di, k2, dk) = modified_spherical_bessel_with_derivatives(z, 5).unwrap();
        for l in 0..=5 {
            assert!(rel(i[l], i2[l]) < 1e-14);
            assert!(rel(k[l], k2[l]) < 1e-14);
            assert!(rel(ri[l], i2[l] + z * di[l]) < 1e-14);
            assert!(rel(rk[l], k2[l] + z * dk[l]) < 1e-14);
        }
    }
}
