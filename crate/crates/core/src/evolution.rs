//! Time-homogeneous quantum evolutions, their superoperator propagators and
//! the transition probabilities `p(i, t | j)` between measurement states.
//!
//! Density matrices are vectorized by column stacking, so
//! `vec(A rho B) = (B^T (x) A) vec(rho)` and the Lindbladian reads
//!
//! ```text
//! L = -i (I (x) H - H^T (x) I)
//!     + sum_k kappa_k ( conj(J_k) (x) J_k - 1/2 I (x) J_k^dag J_k - 1/2 (J_k^dag J_k)^T (x) I )
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quantum::{
    hermitian_eigenvalues, max_abs_diff, normalize_probabilities, DensityMatrix, MeasurementBasis,
    Operator, C64,
};
use crate::spectral::{unvectorize, vec_outer, vectorize, Spectral};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const KRAUS_TOL: f64 = 1e-8;
/// Trace and Hermiticity tolerance on propagated states.
pub const PROPAGATED_TOL: f64 = 1e-9;

/// One Lindblad channel `kappa (J rho J^dag - 1/2 {J^dag J, rho})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dissipator {
    pub rate: f64,
    pub jump: Operator,
}

impl Dissipator {
    pub fn new(rate: f64, jump: Operator) -> Self {
        Self { rate, jump }
    }
}

type KrausFn = dyn Fn(f64) -> Vec<Operator> + Send + Sync;

/// Caller-supplied table `t -> {A_k(t)}`. Need not form a semigroup.
#[derive(Clone)]
pub struct KrausFamily {
    dim: usize,
    table: Arc<KrausFn>,
}

impl KrausFamily {
    pub fn new(dim: usize, table: impl Fn(f64) -> Vec<Operator> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            table: Arc::new(table),
        }
    }

    /// Kraus operators at `t`, checked for completeness.
    pub fn operators(&self, t: f64) -> Result<Vec<Operator>> {
        let ops = (self.table)(t);
        let mut sum = DMatrix::<C64>::zeros(self.dim, self.dim);
        for a in &ops {
            if a.dim() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: a.dim(),
                });
            }
            sum += a.matrix().adjoint() * a.matrix();
        }
        let deviation = max_abs_diff(&sum, &DMatrix::identity(self.dim, self.dim));
        if deviation > KRAUS_TOL {
            return Err(Error::KrausIncomplete { t, deviation });
        }
        Ok(ops)
    }
}

impl fmt::Debug for KrausFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KrausFamily")
            .field("dim", &self.dim)
            .finish()
    }
}

#[derive(Clone, Debug)]
pub enum EvolutionKind {
    Unitary {
        hamiltonian: Operator,
    },
    Lindblad {
        hamiltonian: Operator,
        dissipators: Vec<Dissipator>,
    },
    Kraus(KrausFamily),
}

#[derive(Clone, Debug)]
enum Generator {
    Spectral(Arc<Spectral>),
    /// Defective or ill-conditioned Lindbladian: scaling-and-squaring Pade.
    Dense(Arc<DMatrix<C64>>),
    Kraus,
}

/// A quantum evolution `E(t)` together with a cached representation of its
/// generator.
#[derive(Clone, Debug)]
pub struct QuantumEvolution {
    kind: EvolutionKind,
    dim: usize,
    generator: Generator,
}

fn check_hamiltonian(h: &Operator) -> Result<()> {
    let deviation = h.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NonHermitian { deviation });
    }
    Ok(())
}

impl QuantumEvolution {
    /// `E(t)[rho] = e^{-iHt} rho e^{iHt}`.
    pub fn unitary(hamiltonian: Operator) -> Result<Self> {
        check_hamiltonian(&hamiltonian)?;
        let n = hamiltonian.dim();
        let h = hamiltonian.matrix();
        let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        // eigenvectors of the commutator superoperator are vec(|a><b|)
        let mut eigenvalues = Vec::with_capacity(n * n);
        let mut vectors = DMatrix::<C64>::zeros(n * n, n * n);
        for b in 0..n {
            for a in 0..n {
                let k = b * n + a;
                let gap = eig.eigenvalues[a] - eig.eigenvalues[b];
                eigenvalues.push(C64::new(0.0, -gap));
                let v = vec_outer(
                    &eig.eigenvectors.column(a).into_owned(),
                    &eig.eigenvectors.column(b).into_owned(),
                );
                vectors.set_column(k, &v);
            }
        }
        Ok(Self {
            kind: EvolutionKind::Unitary { hamiltonian },
            dim: n,
            generator: Generator::Spectral(Arc::new(Spectral::from_unitary_eigenbasis(
                eigenvalues,
                vectors,
            ))),
        })
    }

    pub fn lindblad(hamiltonian: Operator, dissipators: Vec<Dissipator>) -> Result<Self> {
        check_hamiltonian(&hamiltonian)?;
        let n = hamiltonian.dim();
        for (index, d) in dissipators.iter().enumerate() {
            if !(d.rate >= 0.0) || !d.rate.is_finite() {
                return Err(Error::NegativeRate {
                    index,
                    rate: d.rate,
                });
            }
            if d.jump.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.jump.dim(),
                });
            }
        }
        let l = lindbladian(&hamiltonian, &dissipators);
        let generator = match Spectral::decompose(&l) {
            Some(s) => Generator::Spectral(Arc::new(s)),
            None => Generator::Dense(Arc::new(l)),
        };
        Ok(Self {
            kind: EvolutionKind::Lindblad {
                hamiltonian,
                dissipators,
            },
            dim: n,
            generator,
        })
    }

    pub fn kraus(family: KrausFamily) -> Self {
        Self {
            dim: family.dim,
            kind: EvolutionKind::Kraus(family),
            generator: Generator::Kraus,
        }
    }

    /// `E(t) = id` for every `t`, as a one-element Kraus family.
    pub fn identity(n: usize) -> Self {
        Self::kraus(KrausFamily::new(n, move |_| vec![Operator::identity(n)]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &EvolutionKind {
        &self.kind
    }

    /// Whether propagators are built from a cached eigendecomposition.
    pub fn is_spectral(&self) -> bool {
        matches!(self.generator, Generator::Spectral(_))
    }

    pub fn is_semigroup(&self) -> bool {
        !matches!(self.kind, EvolutionKind::Kraus(_))
    }

    pub(crate) fn spectral(&self) -> Option<&Spectral> {
        match &self.generator {
            Generator::Spectral(s) => Some(s),
            _ => None,
        }
    }

    /// The superoperator `E(t)`.
    pub fn propagator(&self, t: f64) -> Result<Propagator> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime(t));
        }
        let superoperator = match &self.generator {
            Generator::Spectral(s) => s.exp(t),
            Generator::Dense(l) => {
                let e = (l.as_ref() * C64::new(t, 0.0)).exp();
                if e.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::ExpmFailed(format!(
                        "non-finite entries in exp(L t) at t = {t}"
                    )));
                }
                e
            }
            Generator::Kraus => {
                let EvolutionKind::Kraus(family) = &self.kind else {
                    unreachable!()
                };
                let n = self.dim;
                let mut s = DMatrix::<C64>::zeros(n * n, n * n);
                for a in family.operators(t)? {
                    s += a.matrix().map(|z| z.conj()).kronecker(a.matrix());
                }
                s
            }
        };
        Ok(Propagator {
            dim: self.dim,
            time: t,
            superoperator,
        })
    }

    /// `rho(t) = E(t)[rho]`.
    pub fn apply(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.propagator(t)?.apply(rho)
    }

    /// `p(i, t | j) = <m_i| E(t)[|m_j><m_j|] |m_i>`.
    pub fn transition_probability(
        &self,
        i: usize,
        t: f64,
        j: usize,
        basis: &MeasurementBasis,
    ) -> Result<f64> {
        self.check_basis(basis)?;
        basis.check_index(i)?;
        basis.check_index(j)?;
        Ok(TransitionKernel::new(self, basis)?.column(j, t)?[i])
    }

    pub(crate) fn check_basis(&self, basis: &MeasurementBasis) -> Result<()> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.dim(),
            });
        }
        Ok(())
    }

    /// True iff `max |E(t)[1] - 1| <= tol` at every sample time.
    pub fn is_unital(&self, t_samples: &[f64], tol: f64) -> bool {
        let n = self.dim;
        let id = DMatrix::<C64>::identity(n, n);
        let vid = vectorize(&id);
        t_samples.iter().all(|&t| match self.propagator(t) {
            Ok(p) => max_abs_diff(&unvectorize(&(&p.superoperator * &vid), n), &id) <= tol,
            Err(_) => false,
        })
    }
}

/// Vectorized Lindbladian (column stacking).
pub fn lindbladian(hamiltonian: &Operator, dissipators: &[Dissipator]) -> DMatrix<C64> {
    let n = hamiltonian.dim();
    let h = hamiltonian.matrix();
    let id = DMatrix::<C64>::identity(n, n);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
    for d in dissipators {
        let j = d.jump.matrix();
        let jdj = j.adjoint() * j;
        let term = j.map(|z| z.conj()).kronecker(j)
            - id.kronecker(&jdj) * C64::new(0.5, 0.0)
            - jdj.transpose().kronecker(&id) * C64::new(0.5, 0.0);
        l += term * C64::new(d.rate, 0.0);
    }
    l
}

/// 64 log-spaced times over `[tau/100, 20 tau]`.
pub fn default_unitality_grid(tau: f64) -> Vec<f64> {
    log_grid(tau / 100.0, 20.0 * tau, 64)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Matrix form of `E(t)` acting on column-stacked density matrices.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub dim: usize,
    pub time: f64,
    pub superoperator: DMatrix<C64>,
}

impl Propagator {
    pub fn apply_matrix(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        unvectorize(&(&self.superoperator * vectorize(rho)), self.dim)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        let out = self.apply_matrix(rho.matrix());
        let herm = max_abs_diff(&out, &out.adjoint());
        let trace = out.trace();
        if herm > PROPAGATED_TOL || (trace - C64::new(1.0, 0.0)).norm() > PROPAGATED_TOL {
            return Err(Error::PropagatorDefect(format!(
                "t = {}: hermiticity deviation {herm:e}, trace {trace}",
                self.time
            )));
        }
        let out = (&out + out.adjoint()) * C64::new(0.5, 0.0);
        let min_ev = hermitian_eigenvalues(&out)[0];
        if min_ev < -PROPAGATED_TOL {
            return Err(Error::PropagatorDefect(format!(
                "t = {}: negative eigenvalue {min_ev:e}",
                self.time
            )));
        }
        Ok(DensityMatrix::from_operator_unchecked(Operator::new(out)?))
    }

    /// Choi matrix `sum_ab |a><b| (x) E(|a><b|)`.
    pub fn choi(&self) -> DMatrix<C64> {
        let n = self.dim;
        let mut choi = DMatrix::<C64>::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                let col = self.superoperator.column(b * n + a);
                let block = DMatrix::from_iterator(n, n, col.iter().copied());
                choi.view_mut((a * n, b * n), (n, n)).copy_from(&block);
            }
        }
        choi
    }

    pub fn min_choi_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.choi())[0]
    }

    /// `max |tr E(|a><b|) - delta_ab|` over matrix units.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let col = self.superoperator.column(b * n + a);
                let tr: C64 = (0..n).map(|k| col[k * n + k]).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((tr - C64::new(expected, 0.0)).norm());
            }
        }
        worst
    }

    pub fn compose(&self, other: &Propagator) -> Propagator {
        Propagator {
            dim: self.dim,
            time: self.time + other.time,
            superoperator: &self.superoperator * &other.superoperator,
        }
    }
}

#[derive(Clone, Debug)]
enum KernelRepr {
    /// `p(i,t|j) = Re sum_k left[i,k] e^{lambda_k t} right[k,j]`
    Spectral {
        rates: Vec<C64>,
        left: DMatrix<C64>,
        right: DMatrix<C64>,
    },
    Direct {
        projectors: Vec<DVector<C64>>,
    },
}

/// Transition probabilities `p(., t | .)` for one evolution and basis,
/// with the basis projections precomputed.
#[derive(Clone, Debug)]
pub struct TransitionKernel {
    ev: QuantumEvolution,
    basis: MeasurementBasis,
    repr: KernelRepr,
}

impl TransitionKernel {
    pub fn new(ev: &QuantumEvolution, basis: &MeasurementBasis) -> Result<Self> {
        ev.check_basis(basis)?;
        let n = basis.dim();
        let projectors: Vec<DVector<C64>> = (0..n)
            .map(|i| vec_outer(basis.vector(i), basis.vector(i)))
            .collect();
        let repr = match ev.spectral() {
            Some(s) => {
                let k = s.eigenvalues.len();
                let mut left = DMatrix::<C64>::zeros(n, k);
                let mut right = DMatrix::<C64>::zeros(k, n);
                for (i, p) in projectors.iter().enumerate() {
                    left.set_row(i, &(p.adjoint() * &s.vectors));
                    right.set_column(i, &(&s.inverse * p));
                }
                KernelRepr::Spectral {
                    rates: s.eigenvalues.clone(),
                    left,
                    right,
                }
            }
            None => KernelRepr::Direct { projectors },
        };
        Ok(Self {
            ev: ev.clone(),
            basis: basis.clone(),
            repr,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn evolution(&self) -> &QuantumEvolution {
        &self.ev
    }

    pub fn basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    /// Unclamped `p(i,t|j)` written to `out[i + n j]`.
    pub fn raw_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        match &self.repr {
            KernelRepr::Spectral { rates, left, right } => {
                let phases: Vec<C64> = rates.iter().map(|&l| (l * t).exp()).collect();
                for j in 0..n {
                    for i in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for (k, ph) in phases.iter().enumerate() {
                            acc += left[(i, k)] * ph * right[(k, j)];
                        }
                        out[i + n * j] = acc.re;
                    }
                }
            }
            KernelRepr::Direct { projectors } => {
                let prop = self.ev.propagator(t)?;
                for (j, pj) in projectors.iter().enumerate() {
                    let evolved = &prop.superoperator * pj;
                    for (i, pi) in projectors.iter().enumerate() {
                        out[i + n * j] = pi.dotc(&evolved).re;
                    }
                }
            }
        }
        Ok(())
    }

    /// Unclamped column `p(., t | j)`.
    pub fn raw_column_into(&self, j: usize, t: f64, out: &mut [f64]) -> Result<()> {
        let n = self.dim();
        match &self.repr {
            KernelRepr::Spectral { rates, left, right } => {
                for (i, o) in out.iter_mut().enumerate().take(n) {
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, &l) in rates.iter().enumerate() {
                        acc += left[(i, k)] * (l * t).exp() * right[(k, j)];
                    }
                    *o = acc.re;
                }
            }
            KernelRepr::Direct { projectors } => {
                let prop = self.ev.propagator(t)?;
                let evolved = &prop.superoperator * &projectors[j];
                for (i, o) in out.iter_mut().enumerate().take(n) {
                    *o = projectors[i].dotc(&evolved).re;
                }
            }
        }
        Ok(())
    }

    /// `P[i][j] = Re sum_k left[i,k] g(lambda_k) right[k,j]`, i.e. the
    /// transition matrix with `e^{lambda t}` replaced by `g(lambda)`.
    /// `None` unless the generator is diagonalized.
    pub(crate) fn spectral_transform(&self, g: impl Fn(C64) -> C64) -> Option<DMatrix<f64>> {
        let KernelRepr::Spectral { rates, left, right } = &self.repr else {
            return None;
        };
        let weights: Vec<C64> = rates.iter().map(|&l| g(l)).collect();
        let n = self.dim();
        Some(DMatrix::from_fn(n, n, |i, j| {
            weights
                .iter()
                .enumerate()
                .map(|(k, w)| left[(i, k)] * w * right[(k, j)])
                .sum::<C64>()
                .re
        }))
    }

    /// Born probabilities of `E(t)[|m_j><m_j|]`, clamped and normalized.
    pub fn column(&self, j: usize, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidTime(t));
        }
        let mut p = vec![0.0; self.dim()];
        self.raw_column_into(j, t, &mut p)?;
        normalize_probabilities(&mut p)?;
        Ok(p)
    }

    /// Column-stochastic matrix `P[i][j] = p(i,t|j)`.
    pub fn matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        (0..self.dim())
            .map(|j| self.column(j, t).map(DVector::from_vec))
            .collect::<Result<Vec<_>>>()
            .map(|cols| DMatrix::from_columns(&cols))
    }
}
