use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::Basis;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Bases at or above this dimension store operators sparsely.
pub const SPARSE_THRESHOLD: usize = 256;

/// Entry-wise tolerance for the Hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// Square operator on a basis. The Hermitian flag is only ever set after a
/// numeric check or by an operation that preserves it exactly.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix {
    basis: Arc<Basis>,
    storage: Storage,
    hermitian: bool,
}

impl fmt::Debug for OperatorMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorMatrix")
            .field("dim", &self.dim())
            .field("sparse", &self.is_sparse())
            .field("hermitian", &self.hermitian)
            .finish()
    }
}

impl OperatorMatrix {
    fn with_storage(basis: &Arc<Basis>, storage: Storage) -> Self {
        let mut op = Self {
            basis: Arc::clone(basis),
            storage,
            hermitian: false,
        };
        op.hermitian = op.hermiticity_defect() < HERMITIAN_TOL;
        op
    }

    fn uses_sparse(basis: &Basis) -> bool {
        basis.dim() >= SPARSE_THRESHOLD
    }

    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(basis: &Arc<Basis>, triplets: Vec<(usize, usize, C64)>) -> Self {
        let n = basis.dim();
        let csr = CsrMatrix::from_triplets(n, n, triplets);
        Self::from_csr(basis, csr)
    }

    pub fn from_csr(basis: &Arc<Basis>, csr: CsrMatrix) -> Self {
        assert_eq!(csr.nrows(), basis.dim());
        let storage = if Self::uses_sparse(basis) {
            Storage::Sparse(csr)
        } else {
            Storage::Dense(csr.to_dense())
        };
        Self::with_storage(basis, storage)
    }

    pub fn from_dense(basis: &Arc<Basis>, m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, basis dimension is {}",
                m.nrows(),
                m.ncols(),
                basis.dim()
            )));
        }
        let storage = if Self::uses_sparse(basis) {
            Storage::Sparse(CsrMatrix::from_dense(&m))
        } else {
            Storage::Dense(m)
        };
        Ok(Self::with_storage(basis, storage))
    }

    pub fn identity(basis: &Arc<Basis>) -> Self {
        Self::from_csr(basis, CsrMatrix::identity(basis.dim()))
    }

    pub fn zero(basis: &Arc<Basis>) -> Self {
        Self::from_csr(basis, CsrMatrix::zeros(basis.dim(), basis.dim()))
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        match &self.storage {
            Storage::Dense(m) => m[(row, col)],
            Storage::Sparse(s) => s.get(row, col),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(s) => s.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.storage {
            Storage::Dense(m) => CsrMatrix::from_dense(m),
            Storage::Sparse(s) => s.clone(),
        }
    }

    /// Largest entry-wise |A - A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => {
                let n = m.nrows();
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in i..n {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            }
            Storage::Sparse(s) => s.hermiticity_defect(),
        }
    }

    fn check_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a + b),
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.add(b)),
            _ => unreachable!("storage is fixed by basis dimension"),
        };
        if self.hermitian && other.hermitian {
            Ok(Self {
                basis: Arc::clone(&self.basis),
                storage,
                hermitian: true,
            })
        } else {
            Ok(Self::with_storage(&self.basis, storage))
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        if c.im == 0.0 {
            return self.scale_real(c.re);
        }
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * c),
            Storage::Sparse(s) => Storage::Sparse(s.scale(c)),
        };
        Self::with_storage(&self.basis, storage)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m * C64::new(c, 0.0)),
            Storage::Sparse(s) => Storage::Sparse(s.scale(C64::new(c, 0.0))),
        };
        Self {
            basis: Arc::clone(&self.basis),
            storage,
            hermitian: self.hermitian,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_basis(other)?;
        let storage = match (&self.storage, &other.storage) {
            (Storage::Dense(a), Storage::Dense(b)) => Storage::Dense(a * b),
            (Storage::Sparse(a), Storage::Sparse(b)) => Storage::Sparse(a.matmul(b)),
            _ => unreachable!("storage is fixed by basis dimension"),
        };
        Ok(Self::with_storage(&self.basis, storage))
    }

    pub fn adjoint(&self) -> Self {
        let storage = match &self.storage {
            Storage::Dense(m) => Storage::Dense(m.adjoint()),
            Storage::Sparse(s) => Storage::Sparse(s.adjoint()),
        };
        Self {
            basis: Arc::clone(&self.basis),
            storage,
            hermitian: self.hermitian,
        }
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        match &self.storage {
            Storage::Dense(m) => m * v,
            Storage::Sparse(s) => s.mul_vec(v),
        }
    }

    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
            Storage::Sparse(s) => s.iter().map(|(_, _, z)| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Largest absolute row sum; bounds the spectral norm of a Hermitian operator.
    pub fn norm_inf(&self) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m
                .row_iter()
                .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            Storage::Sparse(s) => s.norm_inf(),
        }
    }

    /// Largest entry-wise difference between two operators on the same basis.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }
}
