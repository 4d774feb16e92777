//! High-accuracy reference values for fractional-integral convolutions.
//!
//! The causal convolution with transfer function `s^{-alpha}` is the
//! Riemann-Liouville integral
//!
//! ```text
//! (I^alpha g)(t) = 1/Gamma(alpha) int_0^t (t - tau)^{alpha-1} g(tau) dtau.
//! ```
//!
//! Substituting `w = (t - tau)^alpha` removes the endpoint singularity:
//! `(I^alpha g)(t) = 1/(alpha Gamma(alpha)) int_0^{t^alpha} g(t - w^{1/alpha}) dw`,
//! which a composite Gauss rule integrates to near machine accuracy for the
//! smooth pulse-type inputs used in the convolution-quadrature tests.

use crate::error::{Error, Result};
use crate::quad::gauss_01;
use statrs::function::gamma::gamma;

/// Evaluate the fractional integral of order `alpha` in `(0, 1]` of `g`
/// (assumed smooth with `g(0) = 0`-type causal behaviour) on a time grid.
pub fn fractional_integral_oracle(
    g: impl Fn(f64) -> f64,
    alpha: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fractional order must lie in (0, 1], got {alpha}"
        )));
    }
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidParameter("times must be nonnegative".into()));
    }
    let rule = gauss_01(8);
    let panels = 64;
    let scale = 1.0 / (alpha * gamma(alpha));
    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return 0.0;
            }
            let upper = t.powf(alpha);
            let dw = upper / panels as f64;
            let mut acc = 0.0;
            for p in 0..panels {
                let w0 = p as f64 * dw;
                for &(q, wq) in &rule {
                    let w = w0 + q * dw;
                    acc += wq * dw * g(t - w.powf(1.0 / alpha));
                }
            }
            scale * acc
        })
        .collect())
}
