//! Dispersive material laws in the Laplace domain.
//!
//! A material is described by its susceptibility `chi(s)` on the right
//! half-plane; the permittivity (or permeability) is
//! `eps(s) = eps0 * (1 + chi(s))`.  Strong passivity,
//! `Re(eps(s) s) >= eps0 * Re s`, is what the solver relies on: it makes the
//! coupled boundary operator coercive and fixes the square-root branches.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

/// A permittivity or permeability law `eps(s) = base * (1 + chi(s))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MaterialKind {
    Vacuum,
    /// `chi(s) = beta / (s + lambda)`
    Debye { beta: f64, lambda: f64 },
    /// `chi(s) = (alpha1 + alpha2 exp(-t_star s)) / s`
    ShiftedHeaviside { alpha1: f64, alpha2: f64, t_star: f64 },
    /// `chi(s) = omega_d^2 / (s (s + gamma_d))`
    Drude { omega_d: f64, gamma_d: f64 },
    /// `chi(s) = beta_l / (s^2 + alpha_l s + omega_l^2)`
    Lorentz { beta_l: f64, alpha_l: f64, omega_l: f64 },
    /// `chi(s) = gamma / (1 + beta s^eta)`, principal branch of `s^eta`
    Fractional { gamma: f64, beta: f64, eta: f64 },
    /// `chi(s) = P(s)/Q(s)` with real coefficients, constant term first.
    /// Passivity is audited, never assumed.
    RationalCustom { numerator: Vec<f64>, denominator: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSymbol {
    #[serde(flatten)]
    pub kind: MaterialKind,
    /// eps0 (or mu0) in the chosen unit system; 1 by default.
    #[serde(default = "one")]
    pub base_constant: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

/// Permittivity/permeability pair for one side of the interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPair {
    pub epsilon: MaterialSymbol,
    pub mu: MaterialSymbol,
    pub side: Side,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

impl MaterialSymbol {
    pub fn new(kind: MaterialKind, base_constant: f64) -> Result<Self> {
        check_positive("base_constant", base_constant)?;
        match &kind {
            MaterialKind::Vacuum => {}
            MaterialKind::Debye { beta, lambda } => {
                check_positive("beta", *beta)?;
                check_positive("lambda", *lambda)?;
            }
            MaterialKind::ShiftedHeaviside { alpha1, alpha2, t_star } => {
                check_positive("alpha1", *alpha1)?;
                check_positive("alpha2", *alpha2)?;
                check_positive("t_star", *t_star)?;
                // alpha2 > alpha1 is allowed (margins stay observable) but is
                // outside the regime where passivity is guaranteed.
            }
            MaterialKind::Drude { omega_d, gamma_d } => {
                check_positive("omega_d", *omega_d)?;
                check_positive("gamma_d", *gamma_d)?;
            }
            MaterialKind::Lorentz { beta_l, alpha_l, omega_l } => {
                check_positive("beta_l", *beta_l)?;
                check_positive("omega_l", *omega_l)?;
                if !(*alpha_l > 0.0 && *alpha_l * *alpha_l < 4.0 * omega_l * omega_l) {
                    return Err(Error::InvalidParameter(format!(
                        "lorentz requires 0 < alpha_l < 2*omega_l, got alpha_l={alpha_l}, omega_l={omega_l}"
                    )));
                }
            }
            MaterialKind::Fractional { gamma, beta, eta } => {
                check_positive("gamma", *gamma)?;
                check_positive("beta", *beta)?;
                if !(*eta > 0.0 && *eta < 2.0) {
                    return Err(Error::InvalidParameter(format!("eta must lie in (0,2), got {eta}")));
                }
            }
            MaterialKind::RationalCustom { numerator: _, denominator } => {
                if denominator.iter().all(|&c| c == 0.0) {
                    return Err(Error::InvalidParameter("rational_custom denominator is zero".into()));
                }
            }
        }
        Ok(Self { kind, base_constant })
    }

    pub fn vacuum() -> Self {
        Self { kind: MaterialKind::Vacuum, base_constant: 1.0 }
    }

    /// Validate parameters of a deserialized symbol.
    pub fn validate(&self) -> Result<()> {
        Self::new(self.kind.clone(), self.base_constant).map(|_| ())
    }

    /// Susceptibility `chi(s)` for `Re s > 0`.
    pub fn eval_chi(&self, s: C64) -> Result<C64> {
        require_right_half_plane(s)?;
        Ok(match &self.kind {
            MaterialKind::Vacuum => C64::ZERO,
            MaterialKind::Debye { beta, lambda } => beta / (s + lambda),
            MaterialKind::ShiftedHeaviside { alpha1, alpha2, t_star } => {
                (alpha1 + alpha2 * (-t_star * s).exp()) / s
            }
            MaterialKind::Drude { omega_d, gamma_d } => omega_d * omega_d / (s * (s + gamma_d)),
            MaterialKind::Lorentz { beta_l, alpha_l, omega_l } => {
                beta_l / (s * s + alpha_l * s + omega_l * omega_l)
            }
            MaterialKind::Fractional { gamma, beta, eta } => gamma / (1.0 + beta * s.powf(*eta)),
            MaterialKind::RationalCustom { numerator, denominator } => {
                let p = eval_poly(numerator, s);
                let q = eval_poly(denominator, s);
                if q.norm() == 0.0 {
                    return Err(Error::Numerical(format!(
                        "rational_custom denominator vanishes at s = {s}"
                    )));
                }
                p / q
            }
        })
    }

    /// `eps(s) = base * (1 + chi(s))`.
    pub fn eval(&self, s: C64) -> Result<C64> {
        Ok(self.base_constant * (C64::ONE + self.eval_chi(s)?))
    }

    /// `Re(eps(s) s) - eps0 Re s`; nonnegative certifies strong passivity at s.
    pub fn passivity_margin(&self, s: C64) -> Result<f64> {
        Ok((self.eval(s)? * s).re - self.base_constant * s.re)
    }
}

fn eval_poly(coeffs: &[f64], s: C64) -> C64 {
    coeffs.iter().rev().fold(C64::ZERO, |acc, &c| acc * s + c)
}

fn require_right_half_plane(s: C64) -> Result<()> {
    if s.re > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("material symbols require Re s > 0, got s = {s}")))
    }
}

impl MaterialPair {
    pub fn vacuum(side: Side) -> Self {
        Self { epsilon: MaterialSymbol::vacuum(), mu: MaterialSymbol::vacuum(), side }
    }

    /// `s * sqrt(eps(s) mu(s))`, computed as the product of the principal
    /// roots of `eps(s)s` and `mu(s)s`.  The factor-wise branch choice is what
    /// guarantees `Re > 0` for strongly passive materials; the single
    /// principal root of the product does not.
    pub fn wavenumber(&self, s: C64) -> Result<C64> {
        Ok(passive_sqrt(self.epsilon.eval(s)? * s)? * passive_sqrt(self.mu.eval(s)? * s)?)
    }

    /// `sqrt(mu(s)s) / sqrt(eps(s)s)` with principal roots.
    pub fn impedance_ratio(&self, s: C64) -> Result<C64> {
        Ok(passive_sqrt(self.mu.eval(s)? * s)? / passive_sqrt(self.epsilon.eval(s)? * s)?)
    }

    /// Dispersive interior used by the bundled experiments:
    /// `eps(s) = 1/2 + 1/(1 + s^{1/2})` (fractional law) and `mu = 1/2`.
    pub fn fractional_interior() -> Self {
        Self {
            epsilon: MaterialSymbol::new(
                MaterialKind::Fractional { gamma: 2.0, beta: 1.0, eta: 0.5 },
                0.5,
            )
            .expect("valid fractional parameters"),
            mu: MaterialSymbol::new(MaterialKind::Vacuum, 0.5).expect("valid vacuum parameters"),
            side: Side::Interior,
        }
    }
}

fn passive_sqrt(z: C64) -> Result<C64> {
    if z.re <= 0.0 {
        return Err(Error::Passivity(format!(
            "Re(eps*s) or Re(mu*s) is nonpositive ({z}); material is not strongly passive here"
        )));
    }
    Ok(z.sqrt())
}

/// Max over the four material symbols of `(|eps(s)s|^2 + 1) / Re(eps(s)s)`.
/// Purely diagnostic: it tracks the frequency growth of the solver's
/// stability constants.
pub fn m_eps_mu(interior: &MaterialPair, exterior: &MaterialPair, s: C64) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for sym in [&interior.epsilon, &interior.mu, &exterior.epsilon, &exterior.mu] {
        let z = sym.eval(s)? * s;
        m = m.max((z.norm_sqr() + 1.0) / z.re);
    }
    Ok(m)
}

/// Log-spaced audit grid: `Re s` in `[0.1, 10]`, `Im s` in `[-100, 100]`
/// (signed log spacing plus the real axis).
pub fn audit_grid(n_re: usize, n_im: usize) -> Vec<C64> {
    let mut grid = Vec::with_capacity(n_re * (2 * n_im + 1));
    for i in 0..n_re {
        let t = i as f64 / (n_re - 1).max(1) as f64;
        let re = 10f64.powf(-1.0 + 2.0 * t);
        grid.push(C64::new(re, 0.0));
        for j in 0..n_im {
            let u = j as f64 / (n_im - 1).max(1) as f64;
            let im = 10f64.powf(-1.0 + 3.0 * u);
            grid.push(C64::new(re, im));
            grid.push(C64::new(re, -im));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn fractional_interior() -> MaterialPair {
        // eps(s) = 1/2 + 1/(1 + s^{1/2}), mu = 1/2
        MaterialPair {
            epsilon: MaterialSymbol::new(
                MaterialKind::Fractional { gamma: 2.0, beta: 1.0, eta: 0.5 },
                0.5,
            )
            .unwrap(),
            mu: MaterialSymbol { kind: MaterialKind::Vacuum, base_constant: 0.5 },
            side: Side::Interior,
        }
    }

    #[test]
    fn vacuum_chi_is_zero() {
        let v = MaterialSymbol::vacuum();
        assert_eq!(v.eval_chi(c(2.0, 3.0)).unwrap(), C64::ZERO);
        assert_eq!(v.eval(c(2.0, 3.0)).unwrap(), C64::ONE);
    }

    #[test]
    fn debye_closed_form() {
        let d = MaterialSymbol::new(MaterialKind::Debye { beta: 1.0, lambda: 1.0 }, 1.0).unwrap();
        let chi = d.eval_chi(c(1.0, 0.0)).unwrap();
        assert_relative_eq!(chi.re, 0.5, max_relative = 1e-15);
        assert_eq!(chi.im, 0.0);
        assert_relative_eq!(d.eval(c(1.0, 0.0)).unwrap().re, 1.5, max_relative = 1e-15);
    }

    #[test]
    fn drude_closed_form() {
        let d = MaterialSymbol::new(MaterialKind::Drude { omega_d: 1.0, gamma_d: 1.0 }, 1.0).unwrap();
        assert_relative_eq!(d.eval_chi(c(1.0, 0.0)).unwrap().re, 0.5, max_relative = 1e-15);
        assert_relative_eq!(d.passivity_margin(c(1.0, 0.0)).unwrap(), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn shifted_heaviside_margin() {
        let h = MaterialSymbol::new(
            MaterialKind::ShiftedHeaviside { alpha1: 1.0, alpha2: 1.0, t_star: 1.0 },
            1.0,
        )
        .unwrap();
        assert_relative_eq!(
            h.passivity_margin(c(1.0, 0.0)).unwrap(),
            1.0 + (-1.0f64).exp(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn vacuum_margin_is_zero() {
        let v = MaterialSymbol::vacuum();
        assert_eq!(v.passivity_margin(c(1.0, 5.0)).unwrap(), 0.0);
    }

    #[test]
    fn fractional_interior_at_one() {
        let p = fractional_interior();
        let eps = p.epsilon.eval(c(1.0, 0.0)).unwrap();
        assert_relative_eq!(eps.re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(eps.im, 0.0, epsilon = 1e-15);
        let kappa = p.wavenumber(c(1.0, 0.0)).unwrap();
        assert_relative_eq!(kappa.re, 0.5f64.sqrt(), max_relative = 1e-14);
        let eta = p.impedance_ratio(c(1.0, 0.0)).unwrap();
        assert_relative_eq!(eta.re, 0.5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn vacuum_wavenumber_is_s() {
        let p = MaterialPair::vacuum(Side::Exterior);
        assert_relative_eq!(p.wavenumber(c(3.0, 0.0)).unwrap().re, 3.0, max_relative = 1e-15);
        let k = p.wavenumber(c(1.0, 1.0)).unwrap();
        assert_relative_eq!(k.re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(k.im, 1.0, max_relative = 1e-14);
        assert_relative_eq!(p.impedance_ratio(c(0.3, 7.0)).unwrap().re, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn debye_over_vacuum_impedance() {
        let p = MaterialPair {
            epsilon: MaterialSymbol::new(MaterialKind::Debye { beta: 1.0, lambda: 1.0 }, 1.0).unwrap(),
            mu: MaterialSymbol::vacuum(),
            side: Side::Interior,
        };
        assert_relative_eq!(
            p.impedance_ratio(c(1.0, 0.0)).unwrap().re,
            1.0 / 1.5f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn m_eps_mu_vacuum() {
        let int = MaterialPair::vacuum(Side::Interior);
        let ext = MaterialPair::vacuum(Side::Exterior);
        assert_relative_eq!(m_eps_mu(&int, &ext, c(1.0, 0.0)).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(m_eps_mu(&int, &ext, c(2.0, 0.0)).unwrap(), 2.5, max_relative = 1e-15);
    }

    #[test]
    fn rejects_left_half_plane() {
        let v = MaterialSymbol::vacuum();
        assert!(matches!(v.eval_chi(c(-1.0, 2.0)), Err(Error::Domain(_))));
        assert!(matches!(v.eval_chi(c(0.0, 2.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(MaterialSymbol::new(MaterialKind::Debye { beta: -1.0, lambda: 1.0 }, 1.0).is_err());
        assert!(MaterialSymbol::new(
            MaterialKind::Lorentz { beta_l: 1.0, alpha_l: 5.0, omega_l: 1.0 },
            1.0
        )
        .is_err());
        assert!(MaterialSymbol::new(
            MaterialKind::Fractional { gamma: 1.0, beta: 1.0, eta: 2.0 },
            1.0
        )
        .is_err());
    }

    #[test]
    fn conjugate_symmetry() {
        let laws = all_passive_laws();
        let s = c(0.7, 2.3);
        for law in &laws {
            let a = law.eval(s).unwrap();
            let b = law.eval(s.conj()).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-14);
            assert_relative_eq!(a.im, -b.im, max_relative = 1e-14, epsilon = 1e-16);
        }
    }

    fn all_passive_laws() -> Vec<MaterialSymbol> {
        vec![
            MaterialSymbol::vacuum(),
            MaterialSymbol::new(MaterialKind::Debye { beta: 1.0, lambda: 1.0 }, 1.0).unwrap(),
            MaterialSymbol::new(
                MaterialKind::ShiftedHeaviside { alpha1: 2.0, alpha2: 1.0, t_star: 1.0 },
                1.0,
            )
            .unwrap(),
            MaterialSymbol::new(MaterialKind::Drude { omega_d: 1.0, gamma_d: 1.0 }, 1.0).unwrap(),
            MaterialSymbol::new(
                MaterialKind::Lorentz { beta_l: 1.0, alpha_l: 1.0, omega_l: 1.0 },
                1.0,
            )
            .unwrap(),
            MaterialSymbol::new(MaterialKind::Fractional { gamma: 2.0, beta: 1.0, eta: 0.5 }, 0.5)
                .unwrap(),
        ]
    }

    #[test]
    fn passivity_margins_on_audit_grid() {
        let grid = audit_grid(25, 20);
        for law in &all_passive_laws() {
            for &s in &grid {
                let m = law.passivity_margin(s).unwrap();
                assert!(m >= -1e-12, "margin {m} < -1e-12 for {law:?} at s = {s}");
            }
        }
    }

    #[test]
    fn wavenumber_positive_real_part_on_grid() {
        let pair = fractional_interior();
        let grid = audit_grid(25, 20);
        for &s in &grid {
            let k = pair.wavenumber(s).unwrap();
            assert!(k.re > 0.0, "Re wavenumber <= 0 at s = {s}");
        }
    }

    #[test]
    fn heaviside_unstable_regime_is_observable() {
        // alpha2 > alpha1: margins must be computable; positivity is not claimed.
        let h = MaterialSymbol::new(
            MaterialKind::ShiftedHeaviside { alpha1: 0.1, alpha2: 5.0, t_star: 1.0 },
            1.0,
        )
        .unwrap();
        let m = h.passivity_margin(c(0.2, 3.0)).unwrap();
        assert!(m.is_finite());
    }
}
