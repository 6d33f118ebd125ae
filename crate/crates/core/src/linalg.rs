//! Small dense complex matrices and the factorizations the precoding layer
//! needs: Hermitian Cholesky, a cyclic Jacobi eigensolver, and the Cholesky
//! reduction of the generalized Hermitian eigenproblem.
//!
//! Problem sizes here are tiny (rows and columns on the order of the RF
//! chain count), so the code favors clarity and determinism over large-scale
//! performance.

use crate::error::{Error, Result};
use crate::{approx_f64, real, Scalar};
use num_complex::Complex;
use std::ops::{Index, IndexMut};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMat { rows, cols, data }
    }

    /// Builds a matrix from row slices, requiring equal row lengths.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidInput("matrix needs at least one row".into()));
        }
        let n_cols = rows[0].len();
        if n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidInput(
                "matrix rows must be nonempty and of equal length".into(),
            ));
        }
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(CMat {
            rows: n_rows,
            cols: n_cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: format!("{} inner rows", self.cols),
                found: format!("{}", rhs.rows),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re.is_zero() && a.im.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "matrix-vector product",
                expected: format!("vector of length {}", self.cols),
                found: format!("{}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for (a, x) in self.row(r).iter().zip(v) {
                    acc += a * x;
                }
                acc
            })
            .collect())
    }

    /// Gram matrix `self^H · self`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ci = row[i].conj();
                for j in i..n {
                    g[(i, j)] += ci * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[(i, j)] = g[(j, i)].conj();
            }
        }
        g
    }

    /// Adds `s · I` in place; the matrix must be square.
    pub fn add_scaled_identity(&mut self, s: T) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self[(i, i)].re += s;
        }
    }

    /// Stacks matrices vertically; all must share the column count.
    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidInput(
                "vstack needs at least one block".into(),
            ));
        }
        let cols = parts[0].cols;
        if parts.iter().any(|p| p.cols != cols) {
            return Err(Error::DimensionMismatch {
                context: "vstack",
                expected: format!("{cols} columns"),
                found: "mixed column counts".into(),
            });
        }
        let rows = parts.iter().map(|p| p.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }
}

impl<T: Scalar> Index<(usize, usize)> for CMat<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for CMat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[r * self.cols + c]
    }
}

/// Squared Euclidean norm of a complex vector.
pub fn vec_norm_sqr<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<T: Scalar>(v: &[Complex<T>]) -> T {
    vec_norm_sqr(v).sqrt()
}

/// Inner product `a^H · b`.
pub fn vec_dot_conj<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        })
}

/// Rotates `v` by a global phase so its largest-modulus entry is real
/// positive (ties broken by lowest index). Leaves the zero vector alone.
pub fn fix_phase<T: Scalar>(v: &mut [Complex<T>]) {
    let mut best = 0usize;
    let mut best_mag = T::zero();
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag {
            best_mag = m;
            best = i;
        }
    }
    if best_mag.is_zero() {
        return;
    }
    let pivot = v[best];
    let rot = pivot.conj() / Complex::new(pivot.norm(), T::zero());
    for z in v.iter_mut() {
        *z *= rot;
    }
    // kill the rounding residue on the pivot's imaginary part
    v[best].im = T::zero();
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: CMat<T>,
}

impl<T: Scalar> Cholesky<T> {
    pub fn factor(a: &CMat<T>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                context: "cholesky",
                expected: "square matrix".into(),
                found: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let mut l = CMat::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !crate::is_positive_finite(d) {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: approx_f64(d),
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, T::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { lower: l })
    }

    pub fn lower(&self) -> &CMat<T> {
        &self.lower
    }

    /// Solves `L x = b` by forward substitution.
    pub fn solve_lower_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lower.rows();
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.lower[(i, k)];
                x[i] = x[i] - lik * x[k];
            }
            x[i] /= self.lower[(i, i)].re;
        }
        x
    }

    /// Solves `L^H x = b` by back substitution.
    pub fn solve_adjoint_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let n = self.lower.rows();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            for k in i + 1..n {
                let lki = self.lower[(k, i)].conj();
                x[i] = x[i] - lki * x[k];
            }
            x[i] /= self.lower[(i, i)].re;
        }
        x
    }

    /// Solves `A x = b` with `A = L L^H`.
    pub fn solve_vec(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        self.solve_adjoint_vec(&self.solve_lower_vec(b))
    }

    /// Solves `L X = B` column by column.
    pub fn solve_lower_mat(&self, b: &CMat<T>) -> CMat<T> {
        let mut out = CMat::zeros(b.rows(), b.cols());
        for c in 0..b.cols() {
            let col = self.solve_lower_vec(&b.col(c));
            for (r, z) in col.into_iter().enumerate() {
                out[(r, c)] = z;
            }
        }
        out
    }

    /// Congruence transform `L^{-1} C L^{-H}`, re-Hermitized to absorb
    /// rounding.
    pub fn reduce(&self, c: &CMat<T>) -> CMat<T> {
        let y = self.solve_lower_mat(c);
        let z = self.solve_lower_mat(&y.adjoint());
        let mut m = z.adjoint();
        hermitize(&mut m);
        m
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; when present, `vectors` holds the
/// matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<CMat<T>>,
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// Full eigendecomposition (values and vectors) of a Hermitian matrix.
pub fn hermitian_eigen<T: Scalar>(m: &CMat<T>) -> Result<HermitianEigen<T>> {
    jacobi(m, true)
}

/// Eigenvalues only; cheaper than [`hermitian_eigen`] on hot paths.
pub fn hermitian_eigenvalues<T: Scalar>(m: &CMat<T>) -> Result<Vec<T>> {
    Ok(jacobi(m, false)?.values)
}

fn hermitize<T: Scalar>(a: &mut CMat<T>) {
    let half = real::<T>(0.5);
    let n = a.rows();
    for p in 0..n {
        a[(p, p)].im = T::zero();
        for q in p + 1..n {
            let avg = (a[(p, q)] + a[(q, p)].conj()) * half;
            a[(p, q)] = avg;
            a[(q, p)] = avg.conj();
        }
    }
}

fn off_diagonal_norm<T: Scalar>(a: &CMat<T>) -> T {
    let n = a.rows();
    let mut acc = T::zero();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

// Cyclic Jacobi for Hermitian matrices. Each rotation factors the phase out
// of the (p, q) entry and applies the classic real rotation that zeroes it.
fn jacobi<T: Scalar>(m: &CMat<T>, want_vectors: bool) -> Result<HermitianEigen<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "hermitian eigen",
            expected: "square matrix".into(),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mut a = m.clone();
    hermitize(&mut a);
    let mut v = if want_vectors {
        Some(CMat::<T>::identity(n))
    } else {
        None
    };

    let scale = a.frobenius_norm();
    if !scale.is_finite() {
        return Err(Error::InvalidInput(
            "eigen input contains non-finite entries".into(),
        ));
    }
    let tol = T::epsilon() * scale * real::<T>(n as f64);

    let mut converged = scale.is_zero() || n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        if off_diagonal_norm(&a) <= tol {
            converged = true;
            break;
        }
        let mut rotations = 0usize;
        for p in 0..n - 1 {
            for q in p + 1..n {
                if rotate(&mut a, v.as_mut(), p, q) {
                    rotations += 1;
                }
            }
        }
        // a sweep in which every entry sat below its local threshold means
        // the off-diagonal mass has hit the rounding floor
        if rotations == 0 {
            converged = true;
        }
        sweeps += 1;
    }
    if !converged && off_diagonal_norm(&a) > tol {
        return Err(Error::EigenNonConvergence {
            sweeps,
            off_diag: approx_f64(off_diagonal_norm(&a)),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = v.map(|vm| CMat::from_fn(n, n, |r, c| vm[(r, order[c])]));
    Ok(HermitianEigen { values, vectors })
}

fn rotate<T: Scalar>(a: &mut CMat<T>, v: Option<&mut CMat<T>>, p: usize, q: usize) -> bool {
    let apq = a[(p, q)];
    let g = apq.norm();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // skip entries already negligible at the local scale
    if g <= T::epsilon() * (app.abs() + aqq.abs() + g) {
        return false;
    }
    let phase = apq / Complex::new(g, T::zero());
    let tau = (aqq - app) / (real::<T>(2.0) * g);
    let t = if tau.is_zero() {
        T::one()
    } else {
        tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    let s = t * c;
    let cs = Complex::new(c, T::zero());
    let s_conj_phase = phase.conj() * s;
    let s_phase = phase * s;

    let n = a.rows();
    // columns p, q: A <- A·U with U the plane rotation
    for i in 0..n {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * cs - y * s_conj_phase;
        a[(i, q)] = x * s + y * (cs * phase.conj());
    }
    // rows p, q: A <- U^H·A
    for j in 0..n {
        let x = a[(p, j)];
        let y = a[(q, j)];
        a[(p, j)] = x * cs - y * s_phase;
        a[(q, j)] = x * s + y * (cs * phase);
    }
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)].im = T::zero();
    a[(q, q)].im = T::zero();

    if let Some(vm) = v {
        for i in 0..n {
            let x = vm[(i, p)];
            let y = vm[(i, q)];
            vm[(i, p)] = x * cs - y * s_conj_phase;
            vm[(i, q)] = x * s + y * (cs * phase.conj());
        }
    }
    true
}

/// Principal pair of the generalized problem `C v = λ B v`.
#[derive(Debug, Clone)]
pub struct GeneralizedPair<T> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
}

/// Principal eigenpair of `C v = λ B v` for Hermitian PSD `C` and Hermitian
/// positive-definite `B`, via the Cholesky reduction `B = L L^H` followed by
/// a standard Hermitian eigensolve of `L^{-1} C L^{-H}`.
///
/// The returned eigenvalue is clamped at zero (the reduced matrix is PSD up
/// to rounding) and the vector is mapped back through `L^H v = w` without
/// normalization; callers apply their own scaling.
pub fn generalized_principal_pair<T: Scalar>(
    c: &CMat<T>,
    b: &CMat<T>,
) -> Result<GeneralizedPair<T>> {
    let chol = Cholesky::factor(b)?;
    let reduced = chol.reduce(c);
    let eig = hermitian_eigen(&reduced)?;
    let n = reduced.rows();
    let max_idx = n - 1; // values sorted ascending
    let w = eig
        .vectors
        .as_ref()
        .expect("vectors requested")
        .col(max_idx);
    let vector = chol.solve_adjoint_vec(&w);
    let value = eig.values[max_idx].max(T::zero());
    Ok(GeneralizedPair { value, vector })
}

/// Largest generalized eigenvalue of `C v = λ B v`, without eigenvectors.
pub fn generalized_max_eigenvalue<T: Scalar>(c: &CMat<T>, b: &CMat<T>) -> Result<T> {
    let chol = Cholesky::factor(b)?;
    let reduced = chol.reduce(c);
    let values = hermitian_eigenvalues(&reduced)?;
    Ok(values[values.len() - 1].max(T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C64 = Complex<f64>;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn product_against_hand_example() {
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)]]).unwrap();
        let b = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p[(0, 0)], c(1.0, 1.0));
        assert_eq!(p[(0, 1)], c(-1.0, 1.0));
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = CMat::from_rows(&[
            vec![c(4.0, 0.0), c(1.0, -1.0)],
            vec![c(1.0, 1.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let chol = Cholesky::factor(&a).unwrap();
        let l = chol.lower();
        let rec = l.mul(&l.adjoint()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[(i, j)] - a[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            Cholesky::factor(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn eigen_diagonal_matrix() {
        let a = CMat::from_rows(&[
            vec![c(3.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let eig = hermitian_eigen(&a).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_residuals_on_random_hermitian() {
        use crate::RngStream;
        let mut rng = RngStream::from_seed(11);
        for trial in 0..50 {
            let n = 2 + (trial % 5);
            let raw = CMat::from_fn(n, n, |_, _| {
                Complex::new(
                    f64::standard_normal(&mut rng),
                    f64::standard_normal(&mut rng),
                )
            });
            let mut herm = raw.clone();
            for i in 0..n {
                for j in 0..n {
                    herm[(i, j)] = (raw[(i, j)] + raw[(j, i)].conj()) * c(0.5, 0.0);
                }
            }
            let eig = hermitian_eigen(&herm).unwrap();
            let vectors = eig.vectors.as_ref().unwrap();
            let scale = herm.frobenius_norm();
            for k in 0..n {
                let v = vectors.col(k);
                let mv = herm.mul_vec(&v).unwrap();
                let resid: f64 = mv
                    .iter()
                    .zip(&v)
                    .map(|(m, x)| (m - x * eig.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(
                    resid <= 1e-12 * scale.max(1.0),
                    "residual {resid} too large (n={n})"
                );
                assert!((vec_norm(&v) - 1.0).abs() < 1e-12);
            }
            // eigenvalue sum equals trace
            let trace: f64 = (0..n).map(|i| herm[(i, i)].re).sum();
            let sum: f64 = eig.values.iter().sum();
            assert!((trace - sum).abs() < 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn generalized_pair_diagonal_case() {
        // C = diag(1, 0), B = diag(0.5, 1.5) -> lambda_max = 2, v along e1
        let c_mat = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let b_mat = CMat::from_rows(&[
            vec![c(0.5, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.5, 0.0)],
        ])
        .unwrap();
        let pair = generalized_principal_pair(&c_mat, &b_mat).unwrap();
        assert!((pair.value - 2.0).abs() < 1e-12);
        assert!(pair.vector[1].norm() < 1e-12 * pair.vector[0].norm());
    }

    #[test]
    fn fix_phase_makes_pivot_real_positive() {
        let mut v = vec![c(0.0, -2.0), c(1.0, 0.0)];
        fix_phase(&mut v);
        assert!((v[0].re - 2.0).abs() < 1e-15);
        assert_eq!(v[0].im, 0.0);
        // rotation preserves the norm
        assert!((vec_norm(&v) - 5.0f64.sqrt()).abs() < 1e-12);
    }
}
