//! Multipole (Mie-type) reference solution for the penetrable unit sphere at
//! complex frequency, and spectral data of the boundary operators there.
//!
//! Every mode is a pair `(l, polarization)` acting on the two tangential
//! vector-spherical-harmonic families
//!
//! ```text
//! T2 = grad_S Y_l          (gradient type)
//! T1 = T2 x r_hat          (curl type, surface-divergence free)
//! ```
//!
//! With radial factors `f` from the modified Bessel families (regular `i_l`
//! inside, decaying `k_l` outside) the multipole fields at wavenumber
//! `kappa` have tangential traces proportional to `f(kappa)` for the
//! curl-type component and to `R_f(kappa) = (z f)'(kappa)` for the
//! gradient-type component.  Matching tangential `E` and `H` across the
//! sphere yields one 2x2 system per mode.

use super::bessel::{modified_spherical_bessel, riccati};
use crate::error::{Error, Result};
use crate::materials::MaterialPair;
use crate::mesh::Point;
use crate::C64;
use nalgebra::Vector3;

pub type CVector = Vector3<C64>;

/// Mode polarization: which of `E` or `H` is the pure curl-type field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// `E` curl-type (transverse electric in the radial sense).
    Te,
    /// `H` curl-type.
    Tm,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::Te, Polarization::Tm];

    pub fn label(self) -> &'static str {
        match self {
            Polarization::Te => "TE",
            Polarization::Tm => "TM",
        }
    }
}

/// Per-mode transmission data: the scattered (decaying exterior) and
/// transmitted (regular interior) coefficients for a unit incident mode.
#[derive(Debug, Clone, Copy)]
pub struct ModalCoefficient {
    pub ell: usize,
    pub pol: Polarization,
    /// Incident-mode amplitude this row was solved for.
    pub incident: C64,
    /// Scattered exterior coefficient.
    pub reflection: C64,
    /// Interior coefficient.
    pub transmission: C64,
}

/// Multipole solution of the sphere transmission problem at one frequency.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    pub s: C64,
    pub lmax: usize,
    pub kappa_int: C64,
    pub kappa_ext: C64,
    pub coefficients: Vec<ModalCoefficient>,
    /// Ratio of the largest last-degree coefficient magnitude to the overall
    /// largest: the truncation-tail estimate.
    pub tail: f64,
}

/// Incident field given as modal amplitudes per `(l, polarization)`,
/// `l = 1..=lmax` (degree zero carries no tangential field).
#[derive(Debug, Clone)]
pub struct IncidentModes {
    pub lmax: usize,
    /// `amplitudes[l-1] = (TE, TM)` incident coefficients of degree `l`.
    pub amplitudes: Vec<(C64, C64)>,
}

impl IncidentModes {
    pub fn uniform(lmax: usize, value: C64) -> Self {
        Self { lmax, amplitudes: vec![(value, value); lmax] }
    }

    /// Modal amplitudes of the regular expansion of a plane pulse
    /// `e^{s d.x}` at frequency `s`: degree weight `(2l+1) i_l(|kappa|)`
    /// (polarization-symmetric magnitude, sufficient for truncation
    /// estimates).
    pub fn plane_wave(s: C64, lmax: usize) -> Result<Self> {
        let (i, _) = modified_spherical_bessel(s, lmax)?;
        let amplitudes = (1..=lmax)
            .map(|l| {
                let a = i[l] * ((2 * l + 1) as f64);
                (a, a)
            })
            .collect();
        Ok(Self { lmax, amplitudes })
    }
}

/// Solve the sphere transmission problem mode by mode.
///
/// For each mode the curl-type trace is continuous and the companion
/// gradient-type trace is continuous after weighting with `1/(mu s)` (TE)
/// or `1/(eps s)` (TM) of the respective side.
pub fn solve_modes(
    s: C64,
    interior: &MaterialPair,
    exterior: &MaterialPair,
    incident: &IncidentModes,
    lmax: usize,
) -> Result<ModalSolution> {
    if incident.lmax < lmax {
        return Err(Error::InvalidParameter(format!(
            "incident expansion has {} degrees, {lmax} requested",
            incident.lmax
        )));
    }
    let kappa_int = interior.wavenumber(s)?;
    let kappa_ext = exterior.wavenumber(s)?;
    let (ie, rie, ke, rke) = riccati(kappa_ext, lmax)?;
    let (ii, rii, _, _) = riccati(kappa_int, lmax)?;
    let mu_e = exterior.mu.eval(s)? * s;
    let eps_e = exterior.epsilon.eval(s)? * s;
    let mu_i = interior.mu.eval(s)? * s;
    let eps_i = interior.epsilon.eval(s)? * s;

    let mut coefficients = Vec::with_capacity(2 * lmax);
    for l in 1..=lmax {
        for pol in Polarization::BOTH {
            let (we, wi) = match pol {
                Polarization::Te => (mu_e, mu_i),
                Polarization::Tm => (eps_e, eps_i),
            };
            let a = match pol {
                Polarization::Te => incident.amplitudes[l - 1].0,
                Polarization::Tm => incident.amplitudes[l - 1].1,
            };
            // b k(ze) - c i(zi)          = -a i(ze)
            // b Rk(ze)/we - c Ri(zi)/wi  = -a Ri(ze)/we
            let det = ke[l] * (-rii[l] / wi) - (-ii[l]) * (rke[l] / we);
            if det.norm() == 0.0 {
                return Err(Error::Numerical(format!(
                    "singular transmission system at l={l} {}",
                    pol.label()
                )));
            }
            let r1 = -a * ie[l];
            let r2 = -a * rie[l] / we;
            let b = (r1 * (-rii[l] / wi) - (-ii[l]) * r2) / det;
            let c = (ke[l] * r2 - r1 * (rke[l] / we)) / det;
            coefficients.push(ModalCoefficient {
                ell: l,
                pol,
                incident: a,
                reflection: b,
                transmission: c,
            });
        }
    }

    let max = coefficients
        .iter()
        .map(|m| m.reflection.norm())
        .fold(0.0_f64, f64::max);
    let last = coefficients
        .iter()
        .filter(|m| m.ell == lmax)
        .map(|m| m.reflection.norm())
        .fold(0.0_f64, f64::max);
    let tail = if max > 0.0 { last / max } else { 0.0 };

    Ok(ModalSolution { s, lmax, kappa_int, kappa_ext, coefficients, tail })
}

/// Spectral data of the boundary operators on the unit sphere at wavenumber
/// `kappa`, per degree `l = 1..=lmax`.
///
/// The single-layer operator acts diagonally on the two tangential families,
/// the double-layer operator swaps them:
///
/// ```text
/// V:  T1 -> v_curl T1,   T2 -> v_grad T2
/// K:  T1 -> k_swap T2,   T2 -> k_swap T1
/// ```
#[derive(Debug, Clone, Copy)]
pub struct OperatorSpectrum {
    pub ell: usize,
    /// `-kappa^2 i_l(kappa) k_l(kappa)`.
    pub v_curl: C64,
    /// `Ri_l(kappa) Rk_l(kappa)`.
    pub v_grad: C64,
    /// `kappa (k_l Ri_l + i_l Rk_l)/2`.
    pub k_swap: C64,
}

pub fn operator_spectrum(kappa: C64, lmax: usize) -> Result<Vec<OperatorSpectrum>> {
    let (i, ri, k, rk) = riccati(kappa, lmax)?;
    Ok((1..=lmax)
        .map(|l| OperatorSpectrum {
            ell: l,
            v_curl: -kappa * kappa * i[l] * k[l],
            v_grad: ri[l] * rk[l],
            k_swap: kappa * (k[l] * ri[l] + i[l] * rk[l]) * 0.5,
        })
        .collect())
}

/// Axisymmetric real vector spherical harmonics of degree `l` at the unit
/// vector `xhat`: `(T1, T2) = (grad_S P_l x r_hat, grad_S P_l)` built on the
/// Legendre polynomial `P_l(z.x)`.
pub fn vsh_axisymmetric(l: usize, xhat: &Point) -> (Point, Point) {
    let u = xhat.z.clamp(-1.0, 1.0);
    let dp = legendre_derivative(l, u);
    // tangential projection of the axis direction
    let axis = Point::new(0.0, 0.0, 1.0);
    let tangential = axis - xhat * u;
    let t2 = tangential * dp;
    let t1 = t2.cross(xhat);
    (t1, t2)
}

/// Derivative `P_l'(u)` of the Legendre polynomial.
fn legendre_derivative(l: usize, u: f64) -> f64 {
    // recurrence on (P_l, P_l'): P' via (1-u^2) P_l' = l (P_{l-1} - u P_l)
    let mut p_prev = 1.0;
    let mut p = u;
    if l == 0 {
        return 0.0;
    }
    for n in 1..l {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * u * p - nf * p_prev) / (nf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let denom = 1.0 - u * u;
    if denom < 1e-14 {
        // at the poles the tangential factor vanishes with the same rate, so
        // any finite value works; use the limit of l(l+1)/2 * sign powers
        return 0.5 * (l * (l + 1)) as f64 * if u > 0.0 { 1.0 } else { (-1.0_f64).powi(l as i32 + 1) };
    }
    (l as f64) * (p_prev - u * p) / denom
}

/// Tangential traces of the total exterior and interior fields of a modal
/// solution at a surface point: returns `(e_ext, h_ext, e_int, h_int)` as
/// tangential complex vectors (not yet rotated by `x nu`).
pub fn mie_traces(
    solution: &ModalSolution,
    s: C64,
    interior: &MaterialPair,
    exterior: &MaterialPair,
    xhat: &Point,
) -> Result<(CVector, CVector, CVector, CVector)> {
    let lmax = solution.lmax;
    let (ie, rie, ke, rke) = riccati(solution.kappa_ext, lmax)?;
    let (ii, rii, _, _) = riccati(solution.kappa_int, lmax)?;
    let mu_e = exterior.mu.eval(s)? * s;
    let eps_e = exterior.epsilon.eval(s)? * s;
    let mu_i = interior.mu.eval(s)? * s;
    let eps_i = interior.epsilon.eval(s)? * s;

    let mut e_ext = CVector::zeros();
    let mut h_ext = CVector::zeros();
    let mut e_int = CVector::zeros();
    let mut h_int = CVector::zeros();
    for m in &solution.coefficients {
        let l = m.ell;
        let (t1, t2) = vsh_axisymmetric(l, xhat);
        let t1c = cvec(&t1);
        let t2c = cvec(&t2);
        // exterior: incident (regular) + scattered (decaying); interior: regular
        let curl_ext = m.incident * ie[l] + m.reflection * ke[l];
        let grad_ext = m.incident * rie[l] + m.reflection * rke[l];
        let curl_int = m.transmission * ii[l];
        let grad_int = m.transmission * rii[l];
        match m.pol {
            Polarization::Te => {
                // E curl-type; H = -curl E / (mu s)
                e_ext += t1c * curl_ext;
                h_ext -= t2c * (grad_ext / mu_e);
                e_int += t1c * curl_int;
                h_int -= t2c * (grad_int / mu_i);
            }
            Polarization::Tm => {
                // H curl-type; E = curl H / (eps s)
                h_ext += t1c * curl_ext;
                e_ext += t2c * (grad_ext / eps_e);
                h_int += t1c * curl_int;
                e_int += t2c * (grad_int / eps_i);
            }
        }
    }
    Ok((e_ext, h_ext, e_int, h_int))
}

fn cvec(p: &Point) -> CVector {
    CVector::new(p.x.into(), p.y.into(), p.z.into())
}
