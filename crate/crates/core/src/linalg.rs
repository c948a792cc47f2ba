//! Dense linear-algebra helpers shared by the modules.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn commutator<T: ComplexField>(x: &DMatrix<T>, y: &DMatrix<T>) -> DMatrix<T> {
    x * y - y * x
}

/// Largest entry of `|m - m†|`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Spectral (operator) norm.
pub fn op_norm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])].clone());
    (values, vectors)
}

/// Square root of a positive semidefinite Hermitian matrix. Eigenvalues in
/// `(-clamp, 0)` are set to zero; anything more negative is kept as an error
/// signal for the caller through the returned minimum eigenvalue.
pub fn psd_sqrt<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> (DMatrix<T>, f64) {
    let (values, vectors) = hermitian_eigen(m);
    let min = values.first().copied().unwrap_or(0.0);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        for r in 0..n {
            scaled[(r, k)] = scaled[(r, k)].clone() * T::from_real(s);
        }
    }
    (&scaled * vectors.adjoint(), min)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    hermitian_eigen(m).0.iter().map(|v| v.abs()).sum()
}

pub fn trace_product(x: &CMat, y: &CMat) -> Complex64 {
    // tr(x y) without forming the product
    let n = x.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

pub fn top_left(m: &CMat, k: usize) -> CMat {
    m.view((0, 0), (k, k)).into_owned()
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(c)
}

/// Real part if the imaginary part is negligible.
pub fn as_real(m: &CMat, tol: f64) -> Option<RMat> {
    if m.iter().all(|z| z.im.abs() <= tol) {
        Some(m.map(|z| z.re))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_squares_back() {
        let m = RMat::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let (r, min) = psd_sqrt(&m);
        assert!(min > 0.0);
        assert!((&r * &r - &m).abs().max() < 1e-12);
    }

    #[test]
    fn op_norm_of_shift_is_one() {
        let s = RMat::from_fn(5, 5, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
        assert!((op_norm(&s) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_product_matches_product_trace() {
        let x = CMat::from_fn(4, 4, |i, j| Complex64::new(i as f64, j as f64 * 0.5));
        let y = CMat::from_fn(4, 4, |i, j| Complex64::new((i * j) as f64, 1.0));
        assert!((trace_product(&x, &y) - (&x * &y).trace()).norm() < 1e-12);
    }
}
