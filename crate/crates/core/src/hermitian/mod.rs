//! Dense complex matrices, Hermitian matrices and validated density matrices.
//!
//! Everything here is small-dimension dense linear algebra. Storage is a
//! [`nalgebra::DMatrix`] of [`Complex64`]; the Hermitian eigensolver is a
//! cyclic Jacobi iteration, [`eigh`].

mod jacobi;

use std::fmt;

use nalgebra::DMatrix;

pub use nalgebra::Complex;
pub type Complex64 = Complex<f64>;

pub use jacobi::{eigh, eigh_with_tolerance};

use crate::error::{Error, Result};

/// Default absolute tolerance on `|m_ij - conj(m_ji)|` (scaled by the largest entry when that exceeds 1).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default tolerance for trace, positivity and degeneracy checks on density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Default tolerance on `||U^H U - I||_F`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Square dense complex matrix, `n >= 1`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn from_dmatrix(data: DMatrix<Complex64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let n = re.len();
        if im.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: im.len(),
            });
        }
        for row in re.iter().chain(im) {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| Complex64::new(re[i][j], im[i][j])))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::from_dmatrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self {
            data: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            data: &self.data * &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            data: &self.data - &other.data,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `|m_ij - conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `||U^H U - I||_F`.
    pub fn unitary_deviation(&self) -> f64 {
        let n = self.dim();
        let gram = self.data.adjoint() * &self.data;
        (gram - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn real_parts(&self) -> Vec<Vec<f64>> {
        self.data.row_iter().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }

    pub fn imag_parts(&self) -> Vec<Vec<f64>> {
        self.data.row_iter().map(|r| r.iter().map(|z| z.im).collect()).collect()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexMatrix")
            .field("n", &self.dim())
            .field("re", &self.real_parts())
            .field("im", &self.imag_parts())
            .finish()
    }
}

/// A complex matrix equal to its own conjugate transpose.
///
/// Construction accepts inputs that are Hermitian up to a tolerance and then
/// symmetrizes them exactly, so downstream code can rely on exact symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, HERMITIAN_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        let scale = m.data.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let deviation = m.hermitian_deviation();
        if deviation > tol * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// `(m + m^H) / 2` with no tolerance check.
    pub(crate) fn symmetrized(m: ComplexMatrix) -> Self {
        let n = m.dim();
        let data = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(m.data[(i, i)].re, 0.0)
            } else {
                (m.data[(i, j)] + m.data[(j, i)].conj()) * 0.5
            }
        });
        Self {
            inner: ComplexMatrix { data },
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Ok(Self {
            inner: ComplexMatrix::from_real_diagonal(diag)?,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_real_diagonal(&vec![0.0; n]).expect("n >= 1")
    }

    /// `u diag(values) u^H`; `u` is trusted to be unitary.
    pub fn from_spectrum(values: &[f64], u: &ComplexMatrix) -> Self {
        let n = u.dim();
        assert_eq!(values.len(), n, "spectrum length must match the basis");
        let mut scaled = u.data.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Self::symmetrized(ComplexMatrix {
            data: scaled * u.data.adjoint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn as_complex(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_complex(self) -> ComplexMatrix {
        self.inner
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner.get(i, j)
    }

    /// `self + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut data = self.inner.data.clone();
        for i in 0..self.dim() {
            data[(i, i)].re += c;
        }
        Self {
            inner: ComplexMatrix { data },
        }
    }

    pub fn eigh(&self) -> Result<SpectralDecomposition> {
        eigh(self)
    }
}

/// Ascending eigenvalues and the unitary matrix whose columns are the matching eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `U diag(lambda) U^H`.
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectrum(&self.eigenvalues, &self.eigenvectors)
    }
}

/// Returns `u m u^H`, rejecting `u` if it is not unitary within [`UNITARY_TOL`].
pub fn conjugate(m: &HermitianMatrix, u: &ComplexMatrix) -> Result<HermitianMatrix> {
    if u.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: u.dim(),
        });
    }
    let deviation = u.unitary_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let product = &u.data * &m.inner.data * u.data.adjoint();
    Ok(HermitianMatrix::symmetrized(ComplexMatrix { data: product }))
}

/// A Hermitian, positive, unit-trace matrix whose smallest eigenvalue is
/// strictly positive. The spectral decomposition is computed once at
/// validation time and kept.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    spectral: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn validate(m: ComplexMatrix, tol: f64) -> Result<Self> {
        validate_density(m, tol)
    }

    /// Builds `u diag(weights) u^H` from a known probability vector and basis.
    /// The weights must be nonnegative and sum to one; only debug builds check.
    pub(crate) fn from_spectrum_unchecked(weights: &[f64], u: &ComplexMatrix) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= 0.0));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]));
        let n = weights.len();
        let eigenvalues: Vec<f64> = order.iter().map(|&k| weights[k]).collect();
        let eigenvectors = ComplexMatrix {
            data: DMatrix::from_fn(n, n, |i, j| u.data[(i, order[j])]),
        };
        let spectral = SpectralDecomposition {
            eigenvalues,
            eigenvectors,
        };
        Self {
            matrix: spectral.reconstruct(),
            spectral,
        }
    }

    /// The maximally mixed state `I / n`.
    pub fn maximally_mixed(n: usize) -> Self {
        let w = vec![1.0 / n as f64; n];
        Self::from_spectrum_unchecked(&w, &ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectral.eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.eigenvalues[0]
    }
}

/// Checks Hermiticity, unit trace, positivity and nondegeneracy, in that order.
///
/// `tol` applies to the trace, the positivity check and the degeneracy
/// threshold: a smallest eigenvalue below `-tol` is [`Error::NotPositive`],
/// one in `[-tol, tol]` is [`Error::Degenerate`].
pub fn validate_density(m: ComplexMatrix, tol: f64) -> Result<DensityMatrix> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let matrix = HermitianMatrix::new(m)?;
    let trace = matrix.trace();
    if (trace - 1.0).abs() > tol {
        return Err(Error::NotUnitTrace { trace });
    }
    let spectral = matrix.eigh()?;
    let min_eigenvalue = spectral.eigenvalues[0];
    if min_eigenvalue < -tol {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    if min_eigenvalue <= tol {
        return Err(Error::Degenerate { min_eigenvalue });
    }
    Ok(DensityMatrix { matrix, spectral })
}
