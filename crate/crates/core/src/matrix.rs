//! Small dense complex matrices and a cyclic-Jacobi Hermitian eigensolver.
//!
//! Matrix sizes here are desk scale (a few hundred at most), so a plain
//! row-major `Vec` and an O(n^3)-per-sweep Jacobi iteration are entirely
//! adequate and keep the numerics easy to audit.

use num::traits::Zero;
use thiserror::Error;

use crate::scalar::{Scalar, C};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<F: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<C<F>>,
}

impl<F: Scalar> CMatrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(F::one(), F::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<F>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// A^H * A, Hermitian positive semidefinite Gram matrix.
    pub fn gram(&self) -> CMatrix<F> {
        let mut g = CMatrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in 0..self.cols {
                let mut acc = C::zero();
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                g[(i, j)] = acc;
            }
        }
        g
    }

    pub fn sub(&self, other: &CMatrix<F>) -> CMatrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Max entrywise modulus of A^H A - I.
    pub fn unitary_deviation(&self) -> F {
        let g = self.gram();
        let mut worst = F::zero();
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j {
                    C::new(F::one(), F::zero())
                } else {
                    C::zero()
                };
                let d = (g[(i, j)] - target).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    fn off_diagonal_norm_sqr(&self) -> F {
        let mut acc = F::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)].norm_sqr();
                }
            }
        }
        acc
    }

    /// Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations,
    /// ascending. The off-diagonal mass is driven below
    /// `tol * ||A||_F` (tol defaults to 1e-13 at the call sites).
    pub fn hermitian_eigenvalues(&self, tol: F) -> Result<Vec<F>, MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::Shape(format!(
                "{}x{} is not square",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(vec![]);
        }
        let mut a = self.clone();
        let fro = a.frobenius_norm();
        let threshold = if fro > F::zero() { tol * fro } else { tol };
        let max_sweeps = 60;
        for _sweep in 0..max_sweeps {
            if a.off_diagonal_norm_sqr().sqrt() <= threshold {
                let mut eig: Vec<F> = (0..n).map(|i| a[(i, i)].re).collect();
                eig.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
                return Ok(eig);
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    a.jacobi_rotate(p, q);
                }
            }
        }
        Err(MatrixError::NoConvergence(max_sweeps))
    }

    /// One complex Jacobi rotation zeroing A[p][q] (and A[q][p]).
    ///
    /// With a = A[p][p], d = A[q][q] real and A[p][q] = b * u, |u| = 1, the
    /// 2x2 block factors as diag(1, conj(u)) * [[a, b], [b, d]] * diag(1, u),
    /// so a real rotation on the middle factor diagonalizes it.
    fn jacobi_rotate(&mut self, p: usize, q: usize) {
        let apq = self[(p, q)];
        let b = apq.norm();
        if b == F::zero() {
            return;
        }
        let u = apq / b;
        let app = self[(p, p)].re;
        let aqq = self[(q, q)].re;
        let tau = (aqq - app) / (b + b);
        // Smaller-magnitude root of t^2 - 2*tau*t - 1 = 0.
        let t = if tau >= F::zero() {
            -F::one() / (tau + (F::one() + tau * tau).sqrt())
        } else {
            F::one() / (-tau + (F::one() + tau * tau).sqrt())
        };
        let c = F::one() / (F::one() + t * t).sqrt();
        let s = t * c;

        // J columns: col_p = [c, s*conj(u)]^T, col_q = [-s, c*conj(u)]^T.
        let s_ubar = u.conj() * s;
        let c_ubar = u.conj() * c;
        let n = self.rows;
        // A <- A J
        for i in 0..n {
            let aip = self[(i, p)];
            let aiq = self[(i, q)];
            self[(i, p)] = aip * c + aiq * s_ubar;
            self[(i, q)] = aiq * c_ubar - aip * s;
        }
        // A <- J^H A
        let s_u = u * s;
        let c_u = u * c;
        for j in 0..n {
            let apj = self[(p, j)];
            let aqj = self[(q, j)];
            self[(p, j)] = apj * c + aqj * s_u;
            self[(q, j)] = aqj * c_u - apj * s;
        }
        // Clean the rotated pair exactly; the diagonal stays real.
        self[(p, q)] = C::zero();
        self[(q, p)] = C::zero();
        let dpp = self[(p, p)].re;
        let dqq = self[(q, q)].re;
        self[(p, p)] = C::new(dpp, F::zero());
        self[(q, q)] = C::new(dqq, F::zero());
    }

    /// Extreme singular values via the eigenvalues of the Gram matrix.
    pub fn singular_extremes(&self, tol: F) -> Result<(F, F), MatrixError> {
        let eig = self.gram().hermitian_eigenvalues(tol)?;
        let lo = eig.first().copied().unwrap_or_else(F::zero);
        let hi = eig.last().copied().unwrap_or_else(F::zero);
        let clamp = |x: F| if x < F::zero() { F::zero() } else { x };
        Ok((clamp(lo).sqrt(), clamp(hi).sqrt()))
    }

    /// Largest singular value.
    pub fn operator_norm(&self, tol: F) -> Result<F, MatrixError> {
        Ok(self.singular_extremes(tol)?.1)
    }
}

impl<F: Scalar> std::ops::Index<(usize, usize)> for CMatrix<F> {
    type Output = C<F>;
    fn index(&self, (i, j): (usize, usize)) -> &C<F> {
        &self.data[i * self.cols + j]
    }
}

impl<F: Scalar> std::ops::IndexMut<(usize, usize)> for CMatrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<F> {
        &mut self.data[i * self.cols + j]
    }
}

pub const EIG_TOL: f64 = 1e-13;
