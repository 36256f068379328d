//! Dense complex-matrix primitives.
//!
//! Everything here works on small (≤ 64-dimensional) matrices and is pure:
//! spectra, trace norm, and the reindexings used by the separability
//! criteria (partial transpose, realignment) plus the partial trace.

use nalgebra::{DMatrix, SymmetricEigen};
pub use nalgebra::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Maximum entrywise deviation |M - M†| tolerated for Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix, row-major at the API boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadDimension(0));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    /// Outer product |v⟩⟨v|.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Entries in row-major order.
    pub fn row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        Self(self.0.kronecker(&rhs.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.map(|z| z * s))
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self(&self.0 + &rhs.0)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self(&self.0 - &rhs.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |M - M†| over all entries.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.sub(&self.adjoint()).max_abs()
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()).map(|z| z * 0.5))
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }
}

/// Ordered list of subsystem dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimensionSignature(Vec<usize>);

impl DimensionSignature {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::BadDimension(0));
        }
        if let Some(&d) = dims.iter().find(|&&d| d == 0) {
            return Err(Error::BadDimension(d));
        }
        Ok(Self(dims))
    }

    pub fn bipartite(da: usize, db: usize) -> Result<Self> {
        Self::new(vec![da, db])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn parts(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    /// (dA, dB) when the signature has exactly two parts.
    pub fn as_bipartite(&self) -> Option<(usize, usize)> {
        match self.0.as_slice() {
            &[a, b] => Some((a, b)),
            _ => None,
        }
    }

    pub(crate) fn check_square(&self, m: &ComplexMatrix) -> Result<()> {
        if !m.is_square() {
            return Err(Error::NonSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                actual: m.rows(),
            });
        }
        Ok(())
    }
}

fn require_hermitian(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(m.hermitian_part())
}

/// Eigenvalues (descending) and matching eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let sym = require_hermitian(m)?;
    let eig = SymmetricEigen::try_new(sym.into_inner(), 1e-15, 0).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let n = order.len();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Real eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let sym = require_hermitian(m)?;
    let mut values: Vec<f64> = sym.into_inner().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Singular values, descending.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.inner().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// ‖M‖₁ = tr √(M†M), the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Partial transpose on the second factor: ρ_{ij,kl} → ρ_{il,kj}.
pub fn partial_transpose(rho: &ComplexMatrix, sig: &DimensionSignature) -> Result<ComplexMatrix> {
    let (da, db) = sig.as_bipartite().ok_or(Error::DimensionMismatch {
        expected: 2,
        actual: sig.parts(),
    })?;
    sig.check_square(rho)?;
    let mut out = ComplexMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out.0[(i * db + l, k * db + j)] = rho.0[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Realignment R(ρ) with rows indexed by (i,k) and columns by (j,l);
/// output shape is dA² × dB².
pub fn realign(rho: &ComplexMatrix, sig: &DimensionSignature) -> Result<ComplexMatrix> {
    let (da, db) = sig.as_bipartite().ok_or(Error::DimensionMismatch {
        expected: 2,
        actual: sig.parts(),
    })?;
    sig.check_square(rho)?;
    let mut out = ComplexMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out.0[(i * da + k, j * db + l)] = rho.0[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Traces out every subsystem not listed in `keep`. Kept subsystems retain
/// their original relative order.
pub fn partial_trace(
    rho: &ComplexMatrix,
    sig: &DimensionSignature,
    keep: &[usize],
) -> Result<ComplexMatrix> {
    sig.check_square(rho)?;
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let dims = sig.dims();
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: k,
                parts: dims.len(),
            });
        }
        kept[k] = true;
    }

    let n = sig.total();
    // (kept index, traced index) for every full basis index
    let split: Vec<(usize, usize)> = (0..n)
        .map(|mut idx| {
            let (mut kept_idx, mut kept_stride) = (0, 1);
            let (mut traced_idx, mut traced_stride) = (0, 1);
            for (p, &d) in dims.iter().enumerate().rev() {
                let digit = idx % d;
                idx /= d;
                if kept[p] {
                    kept_idx += digit * kept_stride;
                    kept_stride *= d;
                } else {
                    traced_idx += digit * traced_stride;
                    traced_stride *= d;
                }
            }
            (kept_idx, traced_idx)
        })
        .collect();

    let out_dim: usize = dims
        .iter()
        .zip(&kept)
        .filter(|(_, &k)| k)
        .map(|(d, _)| d)
        .product();
    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    for r in 0..n {
        for c in 0..n {
            if split[r].1 == split[c].1 {
                out.0[(split[r].0, split[c].0)] += rho.0[(r, c)];
            }
        }
    }
    Ok(out)
}
