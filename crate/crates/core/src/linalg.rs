//! Dense linear-algebra helpers on top of nalgebra.
//!
//! Complex products are split into real GEMMs: nalgebra dispatches real
//! products to `matrixmultiply` but multiplies complex matrices with a
//! generic kernel that is an order of magnitude slower at our sizes.

use crate::error::{Error, Result};
use crate::{CMat, C64};
use nalgebra::DMatrix;

pub fn re(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.re)
}

pub fn im(m: &CMat) -> DMatrix<f64> {
    m.map(|z| z.im)
}

pub fn from_parts(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMat {
    re.zip_map(im, C64::new)
}

pub fn from_real(re: &DMatrix<f64>) -> CMat {
    re.map(|x| C64::new(x, 0.0))
}

/// True when every imaginary part is negligible against the real parts.
pub fn is_real(m: &CMat) -> bool {
    let scale = m.iter().fold(0.0f64, |s, z| s.max(z.re.abs()));
    m.iter().all(|z| z.im.abs() <= 1e-15 * scale)
}

/// `a · b` for complex matrices.
pub fn mul(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions");
    if a.nrows() * a.ncols() * b.ncols() < 32_768 {
        return a * b;
    }
    let (ar, ai, br, bi) = (re(a), im(a), re(b), im(b));
    let rr = &ar * &br - &ai * &bi;
    let ii = &ar * &bi + &ai * &br;
    from_parts(&rr, &ii)
}

/// `aᴴ · a` for a real matrix, via an explicit transpose (nalgebra's
/// `tr_mul` bypasses the fast GEMM path).
pub fn gram_real(a: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * a
}

/// `aᴴ · a` for a complex matrix.
pub fn gram(a: &CMat) -> CMat {
    let (ar, ai) = (re(a), im(a));
    let art = ar.transpose();
    let ait = ai.transpose();
    let rr = &art * &ar + &ait * &ai;
    let ii = &art * &ai - &ait * &ar;
    from_parts(&rr, &ii)
}

/// Replace `m` by `(m + mᴴ)/2`.
pub fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
///
/// Real symmetric input takes the (much faster) real solver.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let (vals, vecs) = if is_real(m) {
        let e = nalgebra::SymmetricEigen::try_new(re(m), 1e-15, 10_000)
            .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
        (e.eigenvalues.as_slice().to_vec(), from_real(&e.eigenvectors))
    } else {
        let e = nalgebra::SymmetricEigen::try_new(m.clone(), 1e-15, 10_000)
            .ok_or_else(|| Error::Numerical("hermitian eigensolver did not converge".into()))?;
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors)
    };
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let sorted_vals = order.iter().map(|&k| vals[k]).collect();
    let sorted_vecs = CMat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok((sorted_vals, sorted_vecs))
}

/// Orthonormal basis (columns) of the eigenvectors of Hermitian `m` whose
/// eigenvalues exceed `rel_tol · λ_max`.
pub fn support_basis(m: &CMat, rel_tol: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let top = vals.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Ok(CMat::zeros(m.nrows(), 0));
    }
    let keep = vals.iter().take_while(|&&v| v > rel_tol * top).count();
    Ok(vecs.columns(0, keep).into_owned())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.last().copied().unwrap_or(0.0))
}

/// Determinant by LU decomposition.
pub fn det(m: CMat) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.lu().determinant()
}

/// Largest absolute entry.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |s, z| s.max(z.norm()))
}

/// Block-diagonal matrix.
pub fn block_diag(blocks: &[&CMat]) -> CMat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(n, n);
    let mut o = 0;
    for b in blocks {
        out.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(*b);
        o += b.nrows();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(r: usize, c: usize, seed: f64) -> CMat {
        CMat::from_fn(r, c, |i, j| {
            let x = seed + (i * 31 + j * 17) as f64;
            C64::new(x.sin(), (1.3 * x).cos())
        })
    }

    #[test]
    fn split_product_matches_naive() {
        let a = sample(40, 50, 0.3);
        let b = sample(50, 30, 1.1);
        let d = mul(&a, &b) - &a * &b;
        assert!(max_abs(&d) < 1e-12);
        let g = gram(&a) - a.adjoint() * &a;
        assert!(max_abs(&g) < 1e-12);
    }

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let a = sample(12, 12, 0.7);
        let mut h = &a * a.adjoint();
        hermitize(&mut h);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            12,
            vals.iter().map(|&v| C64::new(v, 0.0)),
        ));
        let rec = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(rec - &h)) < 1e-10);
    }

    #[test]
    fn support_of_low_rank() {
        let a = sample(10, 3, 0.2);
        let h = &a * a.adjoint();
        assert_eq!(support_basis(&h, 1e-10).unwrap().ncols(), 3);
    }
}
