//! Dense complex operators on small spin Hilbert spaces.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// A state vector in the computational basis.
pub type State = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// A complex square matrix acting on a `2^n`-dimensional spin space.
///
/// Rows and columns are indexed by computational-basis bitstrings with the
/// first site as the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        assert!(matrix.is_square(), "operator must be square");
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(dim, dim))
    }

    /// Builds a 2x2 operator from row-major entries.
    pub fn single_site(entries: [[Complex64; 2]; 2]) -> Self {
        Self::from_matrix(DMatrix::from_fn(2, 2, |r, c| entries[r][c]))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix(self.matrix.adjoint())
    }

    /// Tensor product `self ⊗ other`; `self` acts on the more significant bits.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix(self.matrix.kronecker(&other.matrix))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Frobenius norm. Bounds the spectral norm from above.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// Largest entry of `M - M†`.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() < tol
    }

    /// Norm of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }

    pub fn apply(&self, state: &State) -> State {
        &self.matrix * state
    }

    /// `⟨ψ|M|ψ⟩` for a (not necessarily normalized) `ψ`.
    pub fn expectation(&self, state: &State) -> Complex64 {
        state.dotc(&(&self.matrix * state))
    }

    /// Restriction to the span of the listed basis states.
    pub fn restrict(&self, basis: &[usize]) -> Self {
        let n = basis.len();
        Self::from_matrix(DMatrix::from_fn(n, n, |r, c| self.matrix[(basis[r], basis[c])]))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_matrix(&self.matrix * factor)
    }
}

impl<'a> Mul<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.matrix * &rhs.matrix)
    }
}

impl Mul for DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: DenseOperator) -> DenseOperator {
        &self * &rhs
    }
}

impl<'a> Add<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.matrix + &rhs.matrix)
    }
}

impl Add for DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: DenseOperator) -> DenseOperator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a DenseOperator> for &'a DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator::from_matrix(&self.matrix - &rhs.matrix)
    }
}

impl Sub for DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: DenseOperator) -> DenseOperator {
        &self - &rhs
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;
    fn neg(self) -> DenseOperator {
        DenseOperator::from_matrix(-&self.matrix)
    }
}

impl Mul<f64> for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: f64) -> DenseOperator {
        DenseOperator::from_matrix(&self.matrix * Complex64::new(rhs, 0.0))
    }
}

impl Mul<Complex64> for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: Complex64) -> DenseOperator {
        DenseOperator::from_matrix(&self.matrix * rhs)
    }
}
