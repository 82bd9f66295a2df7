//! Dense complex matrices and the kernels the optimizer is built on.
//!
//! Storage is row-major `Vec<Complex64>`. The space of n×n complex matrices
//! is treated as a real inner-product space via [`real_inner`], the real part
//! of the Frobenius inner product; gradients and Hessians elsewhere in the
//! crate are expressed against that structure.
//!
//! Matrix inversion is Gauss-Jordan with partial pivoting and a deterministic
//! singularity threshold of `n · ε · max|M_ij|`. The general (non-Hermitian)
//! eigendecomposition lives in [`eig`]; singular values in
//! [`singular_values`].

mod eigen;
mod svd;

pub use eigen::{eig, eigenvalues};
pub use svd::{singular_values, top_singular_subspace};

use num_complex::Complex64;

use crate::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    /// Builds from a slice of rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        CMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must be rows*cols");
        CMatrix { rows, cols, data }
    }

    /// Diagonal matrix from the given entries.
    pub fn from_diag(d: &[Complex64]) -> Self {
        let mut m = CMatrix::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = v;
        }
        m
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .collect()
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn mul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "inner dimensions must agree: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        let nc = rhs.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * nc..(i + 1) * nc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * nc..(k + 1) * nc];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scale_mut(&mut self, s: Complex64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// self += s * other (matching shapes required).
    pub fn add_scaled(&mut self, s: Complex64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.add_scaled(Complex64::ONE, other);
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out.add_scaled(-Complex64::ONE, other);
        out
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Zeroes the diagonal in place.
    pub fn zero_diag_mut(&mut self) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self.data[i * self.cols + i] = Complex64::ZERO;
        }
    }

    /// Squared Frobenius norm of the off-diagonal part, without allocating.
    pub fn offdiag_norm_sq(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    s += self.data[i * self.cols + j].norm_sqr();
                }
            }
        }
        s
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    fn require_same_shape(&self, other: &CMatrix) -> Result<()> {
        if (self.rows, self.cols) == (other.rows, other.cols) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: (self.rows, self.cols),
                got: (other.rows, other.cols),
            })
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Real inner product on the space of complex matrices:
/// `Re Σ_ij U_ij · conj(V_ij)`. Symmetric and bilinear over real scalars.
pub fn real_inner(u: &CMatrix, v: &CMatrix) -> Result<f64> {
    u.require_same_shape(v)?;
    Ok(real_inner_unchecked(u, v))
}

#[inline]
pub(crate) fn real_inner_unchecked(u: &CMatrix, v: &CMatrix) -> f64 {
    u.data
        .iter()
        .zip(&v.data)
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum()
}

/// Copy of `m` with the diagonal zeroed.
pub fn offdiag(m: &CMatrix) -> Result<CMatrix> {
    m.require_square()?;
    let mut out = m.clone();
    out.zero_diag_mut();
    Ok(out)
}

/// `AB − BA` for square matrices of matching dimension.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    a.require_square()?;
    a.require_same_shape(b)?;
    let mut out = a.mul(b);
    let ba = b.mul(a);
    out.add_scaled(-Complex64::ONE, &ba);
    Ok(out)
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
///
/// A pivot whose modulus falls below `n · ε · max|M_ij|` makes the matrix
/// singular for our purposes and returns [`Error::SingularMatrix`].
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.require_square()?;
    let n = m.rows;
    let threshold = n as f64 * f64::EPSILON * m.max_abs();
    let mut a = m.clone();
    let mut inv = CMatrix::identity(n);

    for col in 0..n {
        // Partial pivot: largest modulus on or below the diagonal.
        let mut pivot_row = col;
        let mut pivot_abs = a[(col, col)].norm();
        for r in col + 1..n {
            let v = a[(r, col)].norm();
            if v > pivot_abs {
                pivot_abs = v;
                pivot_row = r;
            }
        }
        if pivot_abs <= threshold {
            return Err(Error::SingularMatrix {
                col,
                pivot: pivot_abs,
                threshold,
            });
        }
        if pivot_row != col {
            swap_rows(&mut a, pivot_row, col);
            swap_rows(&mut inv, pivot_row, col);
        }
        let inv_pivot = Complex64::ONE / a[(col, col)];
        for j in 0..n {
            a[(col, j)] *= inv_pivot;
            inv[(col, j)] *= inv_pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor.re == 0.0 && factor.im == 0.0 {
                continue;
            }
            for j in 0..n {
                let ac = a[(col, j)];
                a[(r, j)] -= factor * ac;
                let ic = inv[(col, j)];
                inv[(r, j)] -= factor * ic;
            }
        }
    }
    Ok(inv)
}

fn swap_rows(m: &mut CMatrix, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    let cols = m.cols;
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    let (head, tail) = m.data.split_at_mut(hi * cols);
    head[lo * cols..(lo + 1) * cols].swap_with_slice(&mut tail[..cols]);
}

/// Frobenius norm of `m`: a cheap upper bound on the spectral radius.
pub fn spectral_radius_bound(m: &CMatrix) -> f64 {
    m.frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, rng: &mut SeededRng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| rng.complex_gaussian(1.0))
    }

    #[test]
    fn real_inner_identity_is_dimension() {
        let i2 = CMatrix::identity(2);
        assert_eq!(real_inner(&i2, &i2).unwrap(), 2.0);
    }

    #[test]
    fn real_inner_orthogonal_phases() {
        let u = CMatrix::from_rows(&[vec![c(0.0, 1.0)]]);
        let v = CMatrix::from_rows(&[vec![c(1.0, 0.0)]]);
        assert_eq!(real_inner(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn real_inner_symmetry_and_norm() {
        let mut rng = SeededRng::new(7);
        let u = random_matrix(3, &mut rng);
        let v = random_matrix(3, &mut rng);
        let uv = real_inner(&u, &v).unwrap();
        let vu = real_inner(&v, &u).unwrap();
        assert!((uv - vu).abs() < 1e-14);
        let uu = real_inner(&u, &u).unwrap();
        assert!((uu - u.frobenius_norm_sq()).abs() < 1e-12 * uu.abs());
    }

    #[test]
    fn real_inner_dimension_mismatch() {
        let u = CMatrix::identity(2);
        let v = CMatrix::identity(3);
        assert!(matches!(
            real_inner(&u, &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn offdiag_zeroes_diagonal_only() {
        let d = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(offdiag(&d).unwrap().frobenius_norm(), 0.0);

        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]);
        let o = offdiag(&m).unwrap();
        assert_eq!(o[(0, 0)], Complex64::ZERO);
        assert_eq!(o[(0, 1)], c(2.0, 0.0));
        assert_eq!(o[(1, 0)], c(3.0, 0.0));
        assert_eq!(o[(1, 1)], Complex64::ZERO);
    }

    #[test]
    fn offdiag_idempotent() {
        let mut rng = SeededRng::new(3);
        let m = random_matrix(4, &mut rng);
        let once = offdiag(&m).unwrap();
        let twice = offdiag(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn offdiag_rejects_rectangular() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(offdiag(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn commutator_of_equal_matrices_vanishes() {
        let mut rng = SeededRng::new(11);
        let a = random_matrix(3, &mut rng);
        assert!(commutator(&a, &a).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn commutator_two_by_two() {
        let a = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let b = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        let ab = commutator(&a, &b).unwrap();
        assert_eq!(ab[(0, 1)], c(-1.0, 0.0));
        assert_eq!(ab[(0, 0)], Complex64::ZERO);
        assert_eq!(ab[(1, 0)], Complex64::ZERO);
        assert_eq!(ab[(1, 1)], Complex64::ZERO);
    }

    #[test]
    fn commutator_traceless_and_antisymmetric() {
        let mut rng = SeededRng::new(5);
        let a = random_matrix(4, &mut rng);
        let b = random_matrix(4, &mut rng);
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        let trace: Complex64 = ab.diag().iter().sum();
        assert!(trace.norm() < 1e-12);
        assert!(ab.add(&ba).frobenius_norm() < 1e-12);
    }

    #[test]
    fn jacobi_identity() {
        let mut rng = SeededRng::new(19);
        let a = random_matrix(4, &mut rng);
        let b = random_matrix(4, &mut rng);
        let cm = random_matrix(4, &mut rng);
        let t1 = commutator(&a, &commutator(&b, &cm).unwrap()).unwrap();
        let t2 = commutator(&b, &commutator(&cm, &a).unwrap()).unwrap();
        let t3 = commutator(&cm, &commutator(&a, &b).unwrap()).unwrap();
        let sum = t1.add(&t2).add(&t3);
        let scale = t1.frobenius_norm() + t2.frobenius_norm() + t3.frobenius_norm();
        assert!(sum.frobenius_norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn inverse_identity_and_diagonal() {
        let i = CMatrix::identity(3);
        assert!(inverse(&i).unwrap().sub(&i).frobenius_norm() < 1e-15);
        let d = CMatrix::from_diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let di = inverse(&d).unwrap();
        assert!((di[(0, 0)] - c(0.5, 0.0)).norm() < 1e-15);
        assert!((di[(1, 1)] - c(0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_detects_rank_deficiency() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(inverse(&m), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn inverse_residual_random() {
        let mut rng = SeededRng::new(23);
        for n in [2usize, 5, 20, 50] {
            let m = random_matrix(n, &mut rng);
            let mi = inverse(&m).unwrap();
            let resid = m.mul(&mi).sub(&CMatrix::identity(n)).frobenius_norm();
            assert!(resid < 1e-10, "n={n}: residual {resid}");
        }
    }

    #[test]
    fn spectral_radius_bound_examples() {
        let i3 = CMatrix::identity(3);
        assert!((spectral_radius_bound(&i3) - 3f64.sqrt()).abs() < 1e-15);
        let d = CMatrix::from_diag(&[c(3.0, 0.0), c(0.0, 0.0)]);
        assert!((spectral_radius_bound(&d) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn adjoint_involution_and_product_rule() {
        let mut rng = SeededRng::new(31);
        let a = random_matrix(3, &mut rng);
        let b = random_matrix(3, &mut rng);
        assert_eq!(a.adjoint().adjoint(), a);
        let lhs = a.mul(&b).adjoint();
        let rhs = b.adjoint().mul(&a.adjoint());
        assert!(lhs.sub(&rhs).frobenius_norm() < 1e-12);
    }
}
