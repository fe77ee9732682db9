//! Eigendecomposition of general (non-normal) complex matrices through the
//! complex Schur form.

use nalgebra::{DMatrix, DVector, Schur, SVD};

use crate::quantum::C64;

/// Eigenvector matrices with condition number above this are treated as
/// numerically defective.
pub const MAX_CONDITION: f64 = 1e8;

/// `A = V diag(lambda) V^-1`.
#[derive(Clone, Debug)]
pub struct Spectral {
    pub eigenvalues: Vec<C64>,
    pub vectors: DMatrix<C64>,
    pub inverse: DMatrix<C64>,
    pub condition: f64,
}

impl Spectral {
    /// Reconstructs `V diag(f(lambda)) V^-1`.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        scaled * &self.inverse
    }

    /// `exp(A t)`.
    pub fn exp(&self, t: f64) -> DMatrix<C64> {
        self.map(|l| (l * t).exp())
    }

    /// Builds the decomposition of a normal matrix from known unitary
    /// eigenvectors.
    pub fn from_unitary_eigenbasis(eigenvalues: Vec<C64>, vectors: DMatrix<C64>) -> Self {
        let inverse = vectors.adjoint();
        Self {
            eigenvalues,
            vectors,
            inverse,
            condition: 1.0,
        }
    }

    /// Returns `None` when `a` is defective or its eigenvector matrix is too
    /// ill-conditioned to reuse.
    pub fn decompose(a: &DMatrix<C64>) -> Option<Self> {
        let n = a.nrows();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let schur = Schur::try_new(a.clone(), f64::EPSILON, 10_000)?;
        let (q, t) = schur.unpack();

        // eigenvalues closer than this are treated as one degenerate eigenvalue
        let degenerate = 1e-10 * scale;
        let mut y = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut s = C64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    s += t[(i, j)] * y[(j, k)];
                }
                let d = t[(i, i)] - lambda;
                if d.norm() <= degenerate {
                    if s.norm() <= degenerate {
                        y[(i, k)] = C64::new(0.0, 0.0);
                    } else {
                        // Jordan block
                        return None;
                    }
                } else {
                    y[(i, k)] = -s / d;
                }
            }
            let norm = y.column(k).norm();
            y.column_mut(k).unscale_mut(norm);
        }
        let vectors = q * y;
        let sv = SVD::new(vectors.clone(), false, false).singular_values;
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 0.0) || smax / smin > MAX_CONDITION {
            return None;
        }
        let inverse = vectors.clone().try_inverse()?;
        let eigenvalues: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
        let out = Self {
            eigenvalues,
            vectors,
            inverse,
            condition: smax / smin,
        };
        let residual = (out.map(|l| l) - a)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if residual > 1e-8 * scale {
            return None;
        }
        Some(out)
    }
}

/// `vec(|x><y|)` under column stacking.
pub fn vec_outer(x: &DVector<C64>, y: &DVector<C64>) -> DVector<C64> {
    y.map(|z| z.conj()).kronecker(x)
}

/// Column-stacked vectorization of a square matrix.
pub fn vectorize(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_iterator(n, n, v.iter().copied())
}
