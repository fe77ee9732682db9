//! Dense complex operators, density matrices, measurement bases and the
//! Born rule.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `max |rho - rho^dag|` and on `|tr rho - 1|`.
pub const STATE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const PSD_TOL: f64 = -1e-10;
/// Allowed drift of a probability vector away from unit sum.
pub const PROB_SUM_TOL: f64 = 1e-9;
/// Probabilities in `[-PROB_CLAMP, 0)` are rounding noise and clamp to zero.
pub const PROB_CLAMP: f64 = 1e-9;

/// Dense `N x N` complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidOperator("ragged rows".into()));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    /// Entrywise `max |A - A^dag|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs_diff(&self.0, &self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL, PSD_TOL)
    }

    /// Validates with caller-chosen tolerances; used on propagator output
    /// where the superoperator itself carries ~1e-12 rounding.
    pub(crate) fn with_tolerance(op: Operator, tol: f64, psd_tol: f64) -> Result<Self> {
        let herm = op.hermiticity_deviation();
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = op.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_ev = hermitian_eigenvalues(op.matrix())[0];
        if min_ev < psd_tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:e}"
            )));
        }
        Ok(Self(op))
    }

    /// Skips validation; the caller guarantees the invariants.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self(op)
    }

    /// `|psi><psi|` for a normalized `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        Ok(Self(Operator::new(psi * psi.adjoint())?))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(Operator::identity(n).scale(1.0 / n as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.0.matrix()
    }
}

/// Orthonormal non-degenerate measurement basis `{|m_i>}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementBasis {
    vectors: Vec<DVector<C64>>,
}

impl MeasurementBasis {
    pub const ORTHONORMALITY_TOL: f64 = 1e-10;

    pub fn new(vectors: Vec<DVector<C64>>) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::InvalidBasis("no vectors".into()));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != n) {
            return Err(Error::InvalidBasis(format!(
                "vector of length {} in a basis of {n} vectors",
                v.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let overlap = vectors[i].dotc(&vectors[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                if (overlap - C64::new(expected, 0.0)).norm() > Self::ORTHONORMALITY_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "<m_{i}|m_{j}> = {overlap}, expected {expected}"
                    )));
                }
            }
        }
        Ok(Self { vectors })
    }

    /// The standard basis `|0>, ..., |N-1>`. For spin operators in the usual
    /// representation this is the `S_z` eigenbasis ordered by decreasing
    /// magnetic number.
    pub fn computational(n: usize) -> Self {
        let vectors = (0..n)
            .map(|i| {
                DVector::from_fn(n, |k, _| {
                    if k == i {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        Self { vectors }
    }

    /// Qubit basis `|m_+> = cos(theta/2)|0> + sin(theta/2)|1>`,
    /// `|m_-> = -sin(theta/2)|0> + cos(theta/2)|1>`; index 0 is `m_+`.
    pub fn qubit(theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidBasis(format!(
                "qubit angle {theta} outside [0, pi]"
            )));
        }
        let (s, c) = (theta / 2.0).sin_cos();
        let plus = DVector::from_vec(vec![C64::new(c, 0.0), C64::new(s, 0.0)]);
        let minus = DVector::from_vec(vec![C64::new(-s, 0.0), C64::new(c, 0.0)]);
        Ok(Self {
            vectors: vec![plus, minus],
        })
    }

    /// Columns of a unitary matrix as basis vectors.
    pub fn from_unitary(u: &DMatrix<C64>) -> Result<Self> {
        Self::new(u.column_iter().map(|c| c.into_owned()).collect())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize) -> &DVector<C64> {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[DVector<C64>] {
        &self.vectors
    }

    pub fn projector(&self, i: usize) -> DensityMatrix {
        let v = &self.vectors[i];
        DensityMatrix::from_operator_unchecked(Operator(v * v.adjoint()))
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    /// `<m_i|A|m_i>` for every basis vector.
    pub(crate) fn diagonal(&self, a: &DMatrix<C64>) -> Vec<f64> {
        self.vectors.iter().map(|v| v.dotc(&(a * v)).re).collect()
    }
}

/// Clamps rounding noise and renormalizes a probability vector in place.
pub fn normalize_probabilities(p: &mut [f64]) -> Result<()> {
    for (index, value) in p.iter_mut().enumerate() {
        if *value < -PROB_CLAMP || !value.is_finite() {
            return Err(Error::NegativeProbability {
                index,
                value: *value,
            });
        }
        *value = value.clamp(0.0, 1.0);
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::NormalizationDrift { sum });
    }
    p.iter_mut().for_each(|x| *x /= sum);
    Ok(())
}

/// Born-rule outcome probabilities `p_i = <m_i|rho|m_i>`.
pub fn born_probabilities(rho: &DensityMatrix, basis: &MeasurementBasis) -> Result<Vec<f64>> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: rho.dim(),
        });
    }
    let mut p = basis.diagonal(rho.matrix());
    normalize_probabilities(&mut p)?;
    Ok(p)
}

/// Smallest `i` whose cumulative probability exceeds `u`.
pub fn sample_index(p: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if acc > u {
            return i;
        }
    }
    // u landed in the rounding gap above the final partial sum
    p.iter().rposition(|&x| x > 0.0).unwrap_or(p.len() - 1)
}

/// Projective measurement: samples an outcome and returns the collapsed state.
pub fn collapse<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<(usize, DensityMatrix)> {
    let p = born_probabilities(rho, basis)?;
    let i = sample_index(&p, rng.gen::<f64>());
    Ok((i, basis.projector(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn projector_gives_deterministic_probabilities() {
        let basis = MeasurementBasis::qubit(0.7).unwrap();
        let p = born_probabilities(&basis.projector(0), &basis).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_is_basis_independent() {
        for theta in [0.0, 0.3, PI / 2.0, 2.9, PI] {
            let basis = MeasurementBasis::qubit(theta).unwrap();
            let p = born_probabilities(&DensityMatrix::maximally_mixed(2), &basis).unwrap();
            assert!((p[0] - 0.5).abs() < 1e-14);
            assert!((p[1] - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn theta_zero_is_computational_basis() {
        assert_eq!(
            MeasurementBasis::qubit(0.0).unwrap(),
            MeasurementBasis::computational(2)
        );
    }

    #[test]
    fn rejects_non_orthonormal_basis() {
        let v = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let err = MeasurementBasis::new(vec![v.clone(), v]).unwrap_err();
        assert!(matches!(err, Error::InvalidBasis(_)));
    }

    #[test]
    fn rejects_invalid_states() {
        let bad_trace = Operator::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(DensityMatrix::new(bad_trace).is_err());
        let negative = Operator::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = Operator::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = born_probabilities(
            &DensityMatrix::maximally_mixed(3),
            &MeasurementBasis::computational(2),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn clamping_and_drift() {
        let mut p = vec![-5e-10, 1.0 + 5e-10];
        normalize_probabilities(&mut p).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[0] + p[1] - 1.0).abs() < 1e-15);

        let mut neg = vec![-1e-6, 1.0];
        assert!(matches!(
            normalize_probabilities(&mut neg),
            Err(Error::NegativeProbability { index: 0, .. })
        ));
        let mut drift = vec![0.5, 0.6];
        assert!(matches!(
            normalize_probabilities(&mut drift),
            Err(Error::NormalizationDrift { .. })
        ));
    }

    #[test]
    fn inverse_cdf_picks_smallest_index_above_u() {
        let p = [0.25, 0.0, 0.75];
        assert_eq!(sample_index(&p, 0.0), 0);
        assert_eq!(sample_index(&p, 0.2499), 0);
        assert_eq!(sample_index(&p, 0.25), 2);
        assert_eq!(sample_index(&p, 0.999_999), 2);
    }

    #[test]
    fn collapse_onto_basis_state_is_deterministic() {
        let basis = MeasurementBasis::computational(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (i, post) = collapse(&basis.projector(1), &basis, &mut rng).unwrap();
            assert_eq!(i, 1);
            assert_eq!(post, basis.projector(1));
        }
    }

    #[test]
    fn collapse_of_maximally_mixed_is_fair() {
        let basis = MeasurementBasis::qubit(1.1).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| collapse(&rho, &basis, &mut rng).unwrap().0 == 0)
            .count();
        let se = (0.25 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn collapse_frequencies_pass_chi_square() {
        // diag(0.25, 0.75) in the basis, plus coherences a dephasing channel would leave
        let basis = MeasurementBasis::qubit(0.9).unwrap();
        let u = DMatrix::from_columns(&[basis.vector(0).clone(), basis.vector(1).clone()]);
        let in_basis = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.25, 0.0),
                C64::new(0.1, 0.05),
                C64::new(0.1, -0.05),
                C64::new(0.75, 0.0),
            ],
        );
        let rho = DensityMatrix::new(Operator::new(&u * in_basis * u.adjoint()).unwrap()).unwrap();
        let expected = born_probabilities(&rho, &basis).unwrap();
        assert!((expected[0] - 0.25).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 20_000;
        let mut counts = [0usize; 2];
        for _ in 0..n {
            counts[collapse(&rho, &basis, &mut rng).unwrap().0] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(&expected)
            .map(|(&c, &p)| {
                let e = p * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // chi-square, one degree of freedom, 99th percentile
        assert!(chi2 < 6.635, "chi2 = {chi2}");
    }

    #[test]
    fn collapse_is_reproducible() {
        let basis = MeasurementBasis::computational(3);
        let rho = DensityMatrix::maximally_mixed(3);
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50)
                .map(|_| collapse(&rho, &basis, &mut rng).unwrap().0)
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
    }
}
