//! Dense numerical kernels: symmetric eigendecomposition, projection onto
//! the positive-semidefinite cone, the vectorized curvature bound used to
//! build proximal weights, Lyapunov solves for controllability Gramians, and
//! Hurwitz tests.
//!
//! Everything here targets desk-scale problems (state dimensions in the tens)
//! and favors explicit dense linear algebra over asymptotically faster
//! special-purpose algorithms.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::model::symmetrize;
use crate::scalar::Scalar;

/// State dimension above which the vectorized curvature matrix (n²×n²) is no
/// longer formed densely and a matrix-free power iteration is used instead.
pub const DENSE_KRON_LIMIT: usize = 64;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending,
/// eigenvectors stored as the corresponding orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition<T: Scalar> {
    pub values: Vec<T>,
    pub vectors: DMatrix<T>,
}

/// Symmetric eigendecomposition with descending eigenvalue order.
///
/// The input is symmetrized first; callers that need an asymmetry guard use
/// [`project_psd`].
pub fn eig_sym<T: Scalar>(x: &DMatrix<T>) -> EigDecomposition<T> {
    let xs = symmetrize(x);
    let se = xs.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<T> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).copy_from(&se.eigenvectors.column(src));
    }
    EigDecomposition { values, vectors }
}

/// Projection onto the positive-semidefinite cone: clip the eigenvalues of
/// the (symmetrized) input at zero and reconstruct.
///
/// Inputs may deviate from exact symmetry by round-off; a relative asymmetry
/// beyond 1e-8 is rejected as a caller bug rather than silently averaged
/// away. Eigenvalues within 1e-12·‖X‖ of zero are treated as zero so the
/// cone boundary does not flap under noise.
pub fn project_psd<T: Scalar>(x: &DMatrix<T>) -> Result<DMatrix<T>, Error> {
    if x.nrows() != x.ncols() {
        return Err(Error::DimensionMismatch {
            context: format!("projection input is {}×{}", x.nrows(), x.ncols()),
        });
    }
    let scale = T::one().max(x.norm());
    let asym = (x - x.transpose()).norm() / scale;
    if asym > T::c(1e-8) {
        return Err(Error::AsymmetricInput { asymmetry: asym.as_f64() });
    }
    let xs = symmetrize(x);
    let eig = eig_sym(&xs);
    let zero_band = T::c(1e-12) * xs.norm();
    let clipped: Vec<T> = eig
        .values
        .iter()
        .map(|&l| if l <= zero_band { T::zero() } else { l })
        .collect();
    let n = xs.nrows();
    let mut scaled = eig.vectors.clone();
    for (j, &l) in clipped.iter().enumerate() {
        scaled.column_mut(j).scale_mut(l);
    }
    let result = scaled * eig.vectors.transpose();
    debug_assert_eq!(result.nrows(), n);
    Ok(symmetrize(&result))
}

/// The symmetric operator whose largest eigenvalue bounds the curvature of a
/// per-vertex sub-problem: X ↦ HX + XH + BXB + BᵀXBᵀ with H = VFFᵀVᵀ and
/// B = VFVᵀ.
fn curvature_apply<T: Scalar>(
    h: &DMatrix<T>,
    b: &DMatrix<T>,
    x: &DMatrix<T>,
) -> DMatrix<T> {
    h * x + x * h + b * x * b + b.transpose() * x * b.transpose()
}

fn curvature_blocks<T: Scalar>(
    f: &DMatrix<T>,
    v: &DMatrix<T>,
) -> Result<(DMatrix<T>, DMatrix<T>), Error> {
    let p = f.nrows();
    if f.ncols() != p || v.ncols() != p {
        return Err(Error::DimensionMismatch {
            context: format!(
                "curvature blocks need v (n×p) and square f (p×p); got v {}×{}, f {}×{}",
                v.nrows(),
                v.ncols(),
                f.nrows(),
                f.ncols()
            ),
        });
    }
    let vf = v * f;
    let b = &vf * v.transpose();
    let h = &vf * vf.transpose();
    Ok((h, b))
}

/// Largest eigenvalue of the vectorized curvature operator, scaled by the
/// penalty parameter. Formed densely as an n²×n² symmetric matrix up to
/// [`DENSE_KRON_LIMIT`]; beyond that a matrix-free power iteration
/// ([`max_eig_kron_power`]) takes over.
pub fn max_eig_kron<T: Scalar>(
    f: &DMatrix<T>,
    v: &DMatrix<T>,
    sigma: T,
) -> Result<T, Error> {
    if sigma <= T::zero() {
        return Err(Error::NonPositiveSigma { sigma: sigma.as_f64() });
    }
    let n = v.nrows();
    if n > DENSE_KRON_LIMIT {
        return max_eig_kron_power(f, v, sigma);
    }
    let (h, b) = curvature_blocks(f, v)?;
    let eye = DMatrix::<T>::identity(n, n);
    let big = h.kronecker(&eye)
        + eye.kronecker(&h)
        + b.transpose().kronecker(&b)
        + b.kronecker(&b.transpose());
    let eig = eig_sym(&big);
    Ok(sigma * eig.values[0])
}

/// Matrix-free estimate of the same quantity as [`max_eig_kron`] via power
/// iteration on a positive shift of the curvature operator (tolerance 1e-10,
/// at most 10 000 iterations).
pub fn max_eig_kron_power<T: Scalar>(
    f: &DMatrix<T>,
    v: &DMatrix<T>,
    sigma: T,
) -> Result<T, Error> {
    if sigma <= T::zero() {
        return Err(Error::NonPositiveSigma { sigma: sigma.as_f64() });
    }
    let (h, b) = curvature_blocks(f, v)?;
    let n = v.nrows();
    // Shift by an upper bound on the spectral radius so the shifted operator
    // is positive semidefinite and its top eigenvalue is what power iteration
    // finds.
    let shift = T::c(2.0) * h.norm() + T::c(2.0) * b.norm() * b.norm() + T::one();

    // Deterministic full-support start.
    let mut x = DMatrix::from_fn(n, n, |i, j| T::one() / T::c((1 + i + j) as f64));
    x = symmetrize(&x);
    let start_norm = x.norm();
    x /= start_norm;

    let mut rayleigh = T::zero();
    for _ in 0..10_000 {
        let y = curvature_apply(&h, &b, &x) + &x * shift;
        let next = y.dot(&x);
        let y_norm = y.norm();
        if y_norm == T::zero() {
            // Unreachable for a positive shift; bail out defensively.
            return Err(Error::NumericalBreakdown {
                context: "power iteration produced a zero iterate".to_string(),
            });
        }
        let y = y / y_norm;
        if (next - rayleigh).abs() <= T::c(1e-10) * T::one().max(next.abs()) {
            return Ok(sigma * (next - shift));
        }
        rayleigh = next;
        x = y;
    }
    Ok(sigma * (rayleigh - shift))
}

/// Solve A·W + W·Aᵀ + Q = 0 for the controllability Gramian W of a Hurwitz
/// matrix A, via the vectorized n²×n² linear system.
///
/// The residual of the returned solution is checked against 1e-8·‖Q‖.
pub fn lyapunov_solve<T: Scalar>(
    acl: &DMatrix<T>,
    qrhs: &DMatrix<T>,
) -> Result<DMatrix<T>, Error> {
    let n = acl.nrows();
    if acl.ncols() != n || qrhs.nrows() != n || qrhs.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: format!(
                "Lyapunov solve needs square same-size inputs; got A {}×{}, Q {}×{}",
                acl.nrows(),
                acl.ncols(),
                qrhs.nrows(),
                qrhs.ncols()
            ),
        });
    }
    let (hurwitz, max_re) = is_hurwitz(acl);
    if !hurwitz {
        return Err(Error::NotHurwitz { max_real_eig: max_re.as_f64() });
    }
    let qs = symmetrize(qrhs);

    let eye = DMatrix::<T>::identity(n, n);
    let system = eye.kronecker(acl) + acl.kronecker(&eye);
    let neg_q = -&qs;
    let rhs = nalgebra::DVector::from_column_slice(neg_q.as_slice());
    let lu = system.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or(Error::SingularSystem { residual: f64::INFINITY })?;
    let w = symmetrize(&DMatrix::from_column_slice(n, n, sol.as_slice()));

    let residual = (acl * &w + &w * acl.transpose() + &qs).norm();
    if residual > T::c(1e-8) * qs.norm() {
        return Err(Error::SingularSystem { residual: residual.as_f64() });
    }
    Ok(w)
}

/// Whether every eigenvalue of the matrix has real part below −1e-9, plus
/// the largest real part found.
pub fn is_hurwitz<T: Scalar>(acl: &DMatrix<T>) -> (bool, T) {
    if acl.nrows() == 0 {
        return (true, T::c(f64::NEG_INFINITY));
    }
    let eigs = acl.clone().complex_eigenvalues();
    let mut max_re = eigs[0].re;
    for e in eigs.iter().skip(1) {
        // Written so a NaN eigenvalue poisons the maximum instead of being
        // skipped.
        if !(e.re <= max_re) {
            max_re = e.re;
        }
    }
    (max_re < T::c(-1e-9), max_re)
}
