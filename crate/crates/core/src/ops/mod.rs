//! Frequency-domain boundary operators of the transmission problem.
//!
//! For one material pair with impedance ratio `eta = sqrt(mu s)/sqrt(eps s)`
//! the Calderón block operator is
//!
//! ```text
//! C(s) = [ -eta V(s)     K(s)      ]
//!        [ -K(s)        -V(s)/eta  ]
//! ```
//!
//! and the coupled two-sided system combines both sides with a constant
//! coupling block built from the antisymmetric surface pairing matrix
//! `B[i][j] = int (xi_i x nu) . xi_j`:
//!
//! ```text
//! A(s) = [ C_ext(s)   J    ]        J = 1/2 [ 0  -B ]
//!        [  -J      C_int(s)]                [ B   0 ]
//! ```
//!
//! Every block row is the weak form tested in the skew surface pairing
//! `[a, b] = int (a x nu) . b`.  For the layer operators the two rotations
//! cancel and the entries reduce to the familiar symmetric Galerkin forms
//! (see [`assembly`]); for the identity coupling the pairing itself appears
//! as `B`.  In this convention `J` is a symmetric matrix, so the coupling
//! contributes nothing to the Hermitian part of `A` and the coercivity of
//! the one-sided Calderón forms carries over to the coupled system; see
//! [`min_hermitian_eigenvalue`] and the coercivity tests.

mod assembly;
mod kernel;
mod potential;
mod quadrature;

pub use assembly::{assemble_k, assemble_v, assemble_vk};
pub use kernel::{helmholtz_kernel, kernel_gradient};
pub use potential::{
    cross_c, distance_to_surface, eval_double_layer, eval_double_layer_kappa, eval_fields,
    eval_single_layer, eval_single_layer_kappa, CVector, PotentialTargets, PotentialValues,
};
pub use quadrature::{closest_point_triangle, duffy_fan, QuadConfig};

use crate::error::{Error, Result};
use crate::materials::{MaterialPair, Side};
use crate::mesh::{PairingMatrix, RTSpace};
use crate::C64;
use faer::linalg::solvers::Solve;
use nalgebra::DMatrix;

/// All frequency-domain operators assembled at one complex frequency.
#[derive(Debug, Clone)]
pub struct FrequencyOperatorSet {
    pub s: C64,
    pub kappa_ext: C64,
    pub kappa_int: C64,
    pub v_ext: DMatrix<C64>,
    pub k_ext: DMatrix<C64>,
    pub v_int: DMatrix<C64>,
    pub k_int: DMatrix<C64>,
    pub c_ext: DMatrix<C64>,
    pub c_int: DMatrix<C64>,
    /// Coupled system matrix of size `4 * dof`.
    pub a: DMatrix<C64>,
}

/// Place V- and K-matrices into the 2x2 Calderón block layout.
fn calderon_blocks(v: &DMatrix<C64>, k: &DMatrix<C64>, eta: C64) -> DMatrix<C64> {
    let n = v.nrows();
    let mut c = DMatrix::<C64>::zeros(2 * n, 2 * n);
    let inv_eta = C64::new(1.0, 0.0) / eta;
    for j in 0..n {
        for i in 0..n {
            c[(i, j)] = -eta * v[(i, j)];
            c[(i, j + n)] = k[(i, j)];
            c[(i + n, j)] = -k[(i, j)];
            c[(i + n, j + n)] = -inv_eta * v[(i, j)];
        }
    }
    c
}

/// Galerkin Calderón operator of one material pair.
pub fn assemble_calderon(
    s: C64,
    pair: &MaterialPair,
    space: &RTSpace,
    cfg: &QuadConfig,
) -> Result<DMatrix<C64>> {
    let (v, k) = assemble_vk(pair.wavenumber(s)?, space, cfg)?;
    Ok(calderon_blocks(&v, &k, pair.impedance_ratio(s)?))
}

/// The constant coupling block `J = 1/2 [[0, -B], [B, 0]]` with `B` the
/// antisymmetric pairing matrix (the identity operator tested in the skew
/// surface pairing).  Since `B` is antisymmetric, `J` is symmetric.
pub fn coupling_blocks(pairing: &PairingMatrix) -> DMatrix<C64> {
    let b = &pairing.matrix;
    let n = b.nrows();
    let mut j = DMatrix::<C64>::zeros(2 * n, 2 * n);
    for q in 0..n {
        for p in 0..n {
            let v = C64::new(0.5 * b[(p, q)], 0.0);
            j[(p, q + n)] = -v;
            j[(p + n, q)] = v;
        }
    }
    j
}

/// Assemble the coupled operator and keep every intermediate block.
pub fn assemble_a(
    s: C64,
    interior: &MaterialPair,
    exterior: &MaterialPair,
    space: &RTSpace,
    pairing: &PairingMatrix,
    cfg: &QuadConfig,
) -> Result<FrequencyOperatorSet> {
    check_sides(interior, exterior)?;
    let kappa_ext = exterior.wavenumber(s)?;
    let kappa_int = interior.wavenumber(s)?;
    let (v_ext, k_ext) = assemble_vk(kappa_ext, space, cfg)?;
    let (v_int, k_int) = assemble_vk(kappa_int, space, cfg)?;
    let c_ext = calderon_blocks(&v_ext, &k_ext, exterior.impedance_ratio(s)?);
    let c_int = calderon_blocks(&v_int, &k_int, interior.impedance_ratio(s)?);
    let a = couple(&c_ext, &c_int, pairing);
    Ok(FrequencyOperatorSet {
        s,
        kappa_ext,
        kappa_int,
        v_ext,
        k_ext,
        v_int,
        k_int,
        c_ext,
        c_int,
        a,
    })
}

/// Assemble only the coupled matrix, dropping intermediates as soon as
/// possible (used by the time-domain driver where memory is the bound).
pub fn assemble_a_matrix(
    s: C64,
    interior: &MaterialPair,
    exterior: &MaterialPair,
    space: &RTSpace,
    pairing: &PairingMatrix,
    cfg: &QuadConfig,
) -> Result<DMatrix<C64>> {
    check_sides(interior, exterior)?;
    let c_ext = {
        let (v, k) = assemble_vk(exterior.wavenumber(s)?, space, cfg)?;
        calderon_blocks(&v, &k, exterior.impedance_ratio(s)?)
    };
    let c_int = {
        let (v, k) = assemble_vk(interior.wavenumber(s)?, space, cfg)?;
        calderon_blocks(&v, &k, interior.impedance_ratio(s)?)
    };
    Ok(couple(&c_ext, &c_int, pairing))
}

fn check_sides(interior: &MaterialPair, exterior: &MaterialPair) -> Result<()> {
    if interior.side != Side::Interior || exterior.side != Side::Exterior {
        return Err(Error::InvalidParameter(
            "material pairs passed with swapped side tags".into(),
        ));
    }
    Ok(())
}

fn couple(
    c_ext: &DMatrix<C64>,
    c_int: &DMatrix<C64>,
    pairing: &PairingMatrix,
) -> DMatrix<C64> {
    let b = &pairing.matrix;
    let n2 = c_ext.nrows();
    let n = n2 / 2;
    let mut a = DMatrix::<C64>::zeros(2 * n2, 2 * n2);
    a.view_mut((0, 0), (n2, n2)).copy_from(c_ext);
    a.view_mut((n2, n2), (n2, n2)).copy_from(c_int);
    for q in 0..n {
        for p in 0..n {
            let v = C64::new(0.5 * b[(p, q)], 0.0);
            // J block (upper right) and -J (lower left)
            a[(p, n2 + q + n)] = -v;
            a[(p + n, n2 + q)] = v;
            a[(n2 + p, q + n)] = v;
            a[(n2 + p + n, q)] = -v;
        }
    }
    a
}

/// Minimum eigenvalue of the Hermitian part `(A + A^H)/2`.
pub fn min_hermitian_eigenvalue(a: &DMatrix<C64>) -> Result<f64> {
    let n = a.nrows();
    let h = faer::Mat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let eigs = h
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigenvalue solve failed: {e:?}")))?;
    eigs.into_iter()
        .reduce(f64::min)
        .ok_or_else(|| Error::Numerical("empty matrix".into()))
}

/// Dense LU factorization wrapper reused by the frequency solves.
pub struct DenseLu {
    lu: faer::linalg::solvers::PartialPivLu<C64>,
}

impl DenseLu {
    pub fn new(a: &DMatrix<C64>) -> Self {
        let n = a.nrows();
        let view = faer::MatRef::from_column_major_slice(a.as_slice(), n, n);
        Self { lu: view.partial_piv_lu() }
    }

    pub fn solve_in_place(&self, rhs: &mut [C64]) {
        let n = rhs.len();
        let view = faer::MatMut::from_column_major_slice_mut(rhs, n, 1);
        self.lu.solve_in_place(view);
    }
}

/// One-shot dense solve `A x = rhs` (rhs overwritten by the solution).
pub fn solve_dense(a: &DMatrix<C64>, rhs: &mut [C64]) -> Result<()> {
    if a.nrows() != rhs.len() {
        return Err(Error::InvalidParameter(format!(
            "matrix is {}x{} but right-hand side has length {}",
            a.nrows(),
            a.ncols(),
            rhs.len()
        )));
    }
    DenseLu::new(a).solve_in_place(rhs);
    Ok(())
}
