//! Dense complex linear algebra for finite-dimensional states and observables.
//!
//! Every wrapper type validates its invariant once, at construction, and is
//! immutable afterwards. Operations may therefore assume that a
//! [`DensityMatrix`] has unit trace and no significantly negative eigenvalue,
//! that a [`Projector`] is idempotent, and so on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixObject", into = "MatrixObject")]
pub struct ComplexMatrix(DMatrix<Complex64>);

/// Wire form of a [`ComplexMatrix`]: row-major real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixObject {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<MatrixObject> for ComplexMatrix {
    type Error = Error;

    fn try_from(obj: MatrixObject) -> Result<Self> {
        ComplexMatrix::from_parts(obj.rows, obj.cols, &obj.re, &obj.im)
    }
}

impl From<ComplexMatrix> for MatrixObject {
    fn from(m: ComplexMatrix) -> Self {
        let entries = m.row_major();
        MatrixObject {
            rows: m.rows(),
            cols: m.cols(),
            re: entries.iter().map(|z| z.re).collect(),
            im: entries.iter().map(|z| z.im).collect(),
        }
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension);
        }
        if entries.len() != rows * cols {
            return Err(Error::BadShape {
                rows,
                cols,
                found: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_row_slice(rows, cols, entries))
    }

    /// Builds a matrix from row-major real and imaginary parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::BadShape {
                rows,
                cols,
                found: re.len().min(im.len()),
            });
        }
        let entries: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Self::from_row_major(rows, cols, &entries)
    }

    pub fn from_real(rows: usize, cols: usize, re: &[f64]) -> Result<Self> {
        Self::from_parts(rows, cols, re, &vec![0.0; re.len()])
    }

    pub fn from_nalgebra(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::ZeroDimension);
        }
        // nalgebra is column-major; report the row-major index.
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite {
                        index: i * m.ncols() + j,
                    });
                }
            }
        }
        Ok(ComplexMatrix(m))
    }

    pub fn identity(d: usize) -> Self {
        ComplexMatrix(DMatrix::identity(d, d))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix(DMatrix::zeros(rows, cols))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        ComplexMatrix(DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                ZERO
            }
        }))
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        ComplexMatrix(DMatrix::from_fn(u.len(), v.len(), |i, j| {
            u[i] * v[j].conj()
        }))
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

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        ComplexMatrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                context: "matrix product",
                expected: self.cols(),
                found: other.rows(),
            });
        }
        Ok(ComplexMatrix(&self.0 * &other.0))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.same_shape(other, "matrix sum")?;
        Ok(ComplexMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.same_shape(other, "matrix difference")?;
        Ok(ComplexMatrix(&self.0 - &other.0))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix(&self.0 * factor)
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance; infinite when the shapes differ.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Kronecker product without the dimension cap.
    pub(crate) fn kron_unchecked(&self, other: &ComplexMatrix) -> Self {
        ComplexMatrix(self.0.kronecker(&other.0))
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        u.matmul(self)?.matmul(&u.adjoint())
    }

    fn same_shape(&self, other: &ComplexMatrix, context: &'static str) -> Result<()> {
        if self.rows() != other.rows() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.rows(),
                found: other.rows(),
            });
        }
        if self.cols() != other.cols() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.cols(),
                found: other.cols(),
            });
        }
        Ok(())
    }

    fn hermitian_deviation(&self) -> f64 {
        let n = self.rows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

/// Kronecker product `a ⊗ b`, rejecting results above [`tolerance::max_dim`].
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let max = tolerance::max_dim();
    for (x, y) in [(a.rows(), b.rows()), (a.cols(), b.cols())] {
        let dim = x.saturating_mul(y);
        if dim > max {
            return Err(Error::DimensionTooLarge { dim, max });
        }
    }
    Ok(a.kron_unchecked(b))
}

/// A unit vector in `ℂ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(DVector<Complex64>);

impl StateVector {
    /// Validates that the amplitudes are finite and have unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = Self::finite(amplitudes)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::NotNormalized {
                norm,
                tol: tolerance::NORM,
            });
        }
        Ok(StateVector(v))
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let v = Self::finite(amplitudes)?;
        let norm = v.norm();
        if norm <= f64::EPSILON {
            return Err(Error::NotNormalized {
                norm,
                tol: tolerance::NORM,
            });
        }
        Ok(StateVector(v / Complex64::new(norm, 0.0)))
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// The computational basis vector `|index⟩` of `ℂ^dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if index >= dim {
            return Err(Error::DimensionMismatch {
                context: "basis vector index",
                expected: dim,
                found: index,
            });
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(StateVector(v))
    }

    fn finite(amplitudes: Vec<Complex64>) -> Result<DVector<Complex64>> {
        if amplitudes.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if let Some(index) = amplitudes
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(DVector::from_vec(amplitudes))
    }

    pub(crate) fn from_unit_nalgebra(v: DVector<Complex64>) -> Self {
        StateVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.0.as_slice()
    }

    pub fn as_nalgebra(&self) -> &DVector<Complex64> {
        &self.0
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                context: "inner product",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.0.dotc(&other.0))
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let dim = self.dim().saturating_mul(other.dim());
        let max = tolerance::max_dim();
        if dim > max {
            return Err(Error::DimensionTooLarge { dim, max });
        }
        Ok(StateVector(self.0.kronecker(&other.0)))
    }

    /// Same ray, with the first non-negligible amplitude made real-positive.
    pub fn with_canonical_phase(&self) -> StateVector {
        match self.0.iter().find(|z| z.norm() > tolerance::EIGEN) {
            Some(z) => {
                let phase = z.conj() / z.norm();
                StateVector(&self.0 * phase)
            }
            None => self.clone(),
        }
    }

    /// Distance between the rays of two vectors: `max |u - e^{iθ} v|` for the best θ.
    pub fn phase_distance(&self, other: &StateVector) -> Result<f64> {
        let overlap = other.inner(self)?;
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        Ok(self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b * phase).norm())
            .fold(0.0, f64::max))
    }

    /// `|self⟩` as a `d × 1` column.
    pub fn to_column(&self) -> ComplexMatrix {
        ComplexMatrix(DMatrix::from_column_slice(self.dim(), 1, self.0.as_slice()))
    }

    pub fn projector(&self) -> Projector {
        Projector {
            op: HermitianOperator::from_trusted(self.outer()),
            rank: 1,
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            op: HermitianOperator::from_trusted(self.outer()),
        }
    }

    fn outer(&self) -> ComplexMatrix {
        ComplexMatrix::outer(self.amplitudes(), self.amplitudes())
    }
}

/// A square matrix equal to its conjugate transpose.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "MatrixObject")]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
}

impl From<HermitianOperator> for MatrixObject {
    fn from(h: HermitianOperator) -> Self {
        h.matrix.into()
    }
}

impl HermitianOperator {
    /// Validates Hermiticity and stores the exactly symmetrized matrix.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > tolerance::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_trusted(matrix))
    }

    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let sym = (&matrix.0 + matrix.0.adjoint()) * half;
        HermitianOperator {
            matrix: ComplexMatrix(sym),
        }
    }

    pub fn identity(d: usize) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::identity(d),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianOperator {
            matrix: ComplexMatrix::diagonal(values),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn tensor(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator {
            matrix: tensor(&self.matrix, &other.matrix)?,
        })
    }

    /// Real linear combination `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &HermitianOperator, b: f64) -> Result<HermitianOperator> {
        let lhs = self.matrix.scale(Complex64::new(a, 0.0));
        let rhs = other.matrix.scale(Complex64::new(b, 0.0));
        Ok(HermitianOperator::from_trusted(lhs.add(&rhs)?))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eigh(&self.matrix)?.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }
}

/// An orthogonal projector: hermitian, idempotent, spectrum in `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "MatrixObject")]
pub struct Projector {
    op: HermitianOperator,
    rank: usize,
}

impl From<Projector> for MatrixObject {
    fn from(p: Projector) -> Self {
        p.op.into()
    }
}

impl Projector {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let m = op.matrix();
        let idem = m.matmul(m)?.max_abs_diff(m);
        if idem > tolerance::IDEMPOTENT {
            return Err(Error::NotProjector {
                reason: format!("max |P^2 - P| = {idem:e}"),
            });
        }
        let values = op.eigenvalues()?;
        let mut rank = 0;
        for &lambda in &values {
            if (lambda - 1.0).abs() <= tolerance::EIGEN {
                rank += 1;
            } else if lambda.abs() > tolerance::EIGEN {
                return Err(Error::NotProjector {
                    reason: format!("eigenvalue {lambda} is neither 0 nor 1"),
                });
            }
        }
        Ok(Projector { op, rank })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn onto(v: &StateVector) -> Self {
        v.projector()
    }

    /// Projector onto the span of orthonormal vectors; the caller guarantees orthonormality.
    pub(crate) fn from_orthonormal(vectors: &[StateVector], dim: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for v in vectors {
            m += v.0.clone() * v.0.adjoint();
        }
        Projector {
            op: HermitianOperator::from_trusted(ComplexMatrix(m)),
            rank: vectors.len(),
        }
    }

    pub fn identity(d: usize) -> Self {
        Projector {
            op: HermitianOperator::identity(d),
            rank: d,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn tensor(&self, other: &Projector) -> Result<Projector> {
        Ok(Projector {
            op: self.op.tensor(&other.op)?,
            rank: self.rank * other.rank,
        })
    }
}

/// A positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(into = "MatrixObject")]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl From<DensityMatrix> for MatrixObject {
    fn from(d: DensityMatrix) -> Self {
        d.op.into()
    }
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let trace = op.matrix().trace().re;
        if (trace - 1.0).abs() > tolerance::TRACE {
            return Err(Error::NotDensity {
                reason: format!("trace {trace} is not 1"),
            });
        }
        let min = op.min_eigenvalue()?;
        if min < -tolerance::PSD {
            return Err(Error::NotDensity {
                reason: format!("eigenvalue {min:e} is negative"),
            });
        }
        Ok(DensityMatrix { op })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    pub fn pure(v: &StateVector) -> Self {
        v.density()
    }

    /// `I/d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        let w = 1.0 / d as f64;
        Ok(DensityMatrix {
            op: HermitianOperator::diagonal(&vec![w; d]),
        })
    }

    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::diagonal(probabilities))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.op.matrix()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            op: self.op.tensor(&other.op)?,
        })
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = self.matrix().as_nalgebra();
        m.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Anything the Born rule can be applied to.
pub trait QuantumState {
    fn dim(&self) -> usize;
    fn to_density(&self) -> DensityMatrix;
    /// Unclamped `⟨ψ|A|ψ⟩` or `Tr(Aρ)`.
    fn expect(&self, obs: &HermitianOperator) -> Result<f64>;
}

impl QuantumState for StateVector {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn to_density(&self) -> DensityMatrix {
        self.density()
    }

    fn expect(&self, obs: &HermitianOperator) -> Result<f64> {
        check_dim("expectation", obs.dim(), self.dim())?;
        let av = obs.matrix().as_nalgebra() * &self.0;
        Ok(self.0.dotc(&av).re)
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }

    fn expect(&self, obs: &HermitianOperator) -> Result<f64> {
        expectation(self, obs)
    }
}

/// Either kind of state, for callers that decide at runtime.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState for State {
    fn dim(&self) -> usize {
        match self {
            State::Pure(v) => v.dim(),
            State::Mixed(r) => r.dim(),
        }
    }

    fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(v) => v.density(),
            State::Mixed(r) => r.clone(),
        }
    }

    fn expect(&self, obs: &HermitianOperator) -> Result<f64> {
        match self {
            State::Pure(v) => v.expect(obs),
            State::Mixed(r) => r.expect(obs),
        }
    }
}

impl From<StateVector> for State {
    fn from(v: StateVector) -> Self {
        State::Pure(v)
    }
}

impl From<DensityMatrix> for State {
    fn from(r: DensityMatrix) -> Self {
        State::Mixed(r)
    }
}

fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Which factor of `ℋ₁ ⊗ ℋ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    First,
    Second,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        }
    }
}

/// Partial trace of a square matrix on `ℂ^{d1} ⊗ ℂ^{d2}`, keeping one factor.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: (usize, usize),
    keep: Factor,
) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    if d1 == 0 || d2 == 0 {
        return Err(Error::ZeroDimension);
    }
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    check_dim("partial trace", d1 * d2, m.rows())?;
    let a = m.as_nalgebra();
    let out = match keep {
        Factor::First => DMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| a[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Factor::Second => DMatrix::from_fn(d2, d2, |k, l| {
            (0..d1).map(|i| a[(i * d2 + k, i * d2 + l)]).sum()
        }),
    };
    Ok(ComplexMatrix(out))
}

/// Reduced density matrix `Tr₂ ρ` (keep first) or `Tr₁ ρ` (keep second).
pub fn partial_trace(
    rho: &DensityMatrix,
    dims: (usize, usize),
    keep: Factor,
) -> Result<DensityMatrix> {
    let reduced = partial_trace_matrix(rho.matrix(), dims, keep)?;
    // Positivity and trace are inherited from rho.
    Ok(DensityMatrix {
        op: HermitianOperator::from_trusted(reduced),
    })
}

/// `Tr(A ρ)`.
pub fn expectation(rho: &DensityMatrix, obs: &HermitianOperator) -> Result<f64> {
    check_dim("expectation", rho.dim(), obs.dim())?;
    let a = obs.matrix().as_nalgebra();
    let r = rho.matrix().as_nalgebra();
    let n = rho.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * r[(j, i)];
        }
    }
    Ok(acc.re)
}

/// The potentia of `power` in `state`, clamped to `[0, 1]`.
pub fn born_rule<S: QuantumState + ?Sized>(state: &S, power: &Projector) -> Result<f64> {
    let p = state.expect(power.operator())?;
    Ok(p.clamp(0.0, 1.0))
}

/// One eigenspace of a hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: Projector,
}

/// Eigenvalues in ascending order with orthonormal, phase-fixed eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

pub fn hermitian_eigen(obs: &HermitianOperator) -> Result<Eigensystem> {
    let (values, vectors) = eigh(obs.matrix())?;
    let vectors = vectors
        .into_iter()
        .map(|v| StateVector(v).with_canonical_phase())
        .collect();
    Ok(Eigensystem { values, vectors })
}

/// Groups the spectrum into eigenprojectors, merging eigenvalues closer
/// than [`tolerance::DEGENERACY`]. Ascending by eigenvalue.
pub fn spectral_decompose(obs: &HermitianOperator) -> Result<Vec<SpectralComponent>> {
    let (values, vectors) = eigh(obs.matrix())?;
    let d = obs.dim();
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] < tolerance::DEGENERACY {
            end += 1;
        }
        let group: Vec<StateVector> = vectors[start..end]
            .iter()
            .cloned()
            .map(StateVector)
            .collect();
        let eigenvalue = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.push(SpectralComponent {
            eigenvalue,
            projector: Projector::from_orthonormal(&group, d),
        });
        start = end;
    }
    Ok(out)
}

/// Ascending eigenpairs of a hermitian matrix.
pub(crate) fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, Vec<DVector<Complex64>>)> {
    let n = m.rows();
    let eig = nalgebra::SymmetricEigen::try_new(m.0.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigensolver(format!("no convergence for {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    Ok((values, vectors))
}

/// A unitary matrix, `U†U = I` within [`tolerance::HERMITIAN`].
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(ComplexMatrix);

impl Unitary {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let gram = matrix.adjoint().matmul(&matrix)?;
        let dev = gram.max_abs_diff(&ComplexMatrix::identity(matrix.rows()));
        if dev > tolerance::HERMITIAN {
            return Err(Error::Internal(format!("matrix is not unitary: {dev:e}")));
        }
        Ok(Unitary(matrix))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn conjugate_hermitian(&self, h: &HermitianOperator) -> Result<HermitianOperator> {
        Ok(HermitianOperator::from_trusted(
            h.matrix().conjugate_by(&self.0)?,
        ))
    }

    pub fn conjugate_density(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            op: self.conjugate_hermitian(rho.operator())?,
        })
    }

    pub fn conjugate_projector(&self, p: &Projector) -> Result<Projector> {
        Ok(Projector {
            op: self.conjugate_hermitian(p.operator())?,
            rank: p.rank(),
        })
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        check_dim("unitary action", self.dim(), v.dim())?;
        StateVector::normalized((self.0.as_nalgebra() * v.as_nalgebra()).as_slice().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ket(bits: &[f64]) -> StateVector {
        StateVector::normalized(bits.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
    }

    fn sigma_x() -> HermitianOperator {
        HermitianOperator::new(ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap())
            .unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = tensor(&i2, &i2).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_of_basis_projectors_matches_index_formula() {
        let p0 = ket(&[1.0, 0.0]).projector();
        let p1 = ket(&[0.0, 1.0]).projector();
        let t = tensor(p0.matrix(), p1.matrix()).unwrap();
        // (A ⊗ B)[(i,k),(j,l)] = A[i,j] B[k,l]
        for i in 0..2 {
            for k in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        let expected = p0.matrix().get(i, j) * p1.matrix().get(k, l);
                        assert_eq!(t.get(i * 2 + k, j * 2 + l), expected);
                    }
                }
            }
        }
        assert_eq!(t, ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn tensor_rejects_oversized_product() {
        let big = ComplexMatrix::identity(9);
        assert!(matches!(
            tensor(&big, &big),
            Err(Error::DimensionTooLarge { dim: 81, max: 64 })
        ));
    }

    #[test]
    fn matrix_validation_rejects_bad_input() {
        assert!(matches!(
            ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0]),
            Err(Error::BadShape { .. })
        ));
        assert!(matches!(
            ComplexMatrix::from_real(1, 2, &[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(
            ComplexMatrix::from_real(0, 0, &[]),
            Err(Error::ZeroDimension)
        ));
    }

    #[test]
    fn wrappers_validate_invariants() {
        let not_herm = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            HermitianOperator::new(not_herm),
            Err(Error::NotHermitian { .. })
        ));
        let half = ComplexMatrix::diagonal(&[0.5, 0.0]);
        assert!(matches!(
            Projector::from_matrix(half.clone()),
            Err(Error::NotProjector { .. })
        ));
        assert!(matches!(
            DensityMatrix::from_matrix(half),
            Err(Error::NotDensity { .. })
        ));
        let negative = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::from_matrix(negative),
            Err(Error::NotDensity { .. })
        ));
        assert!(matches!(
            StateVector::from_real(&[0.9, 0.0]),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn projector_rank_is_counted() {
        let p = Projector::from_matrix(ComplexMatrix::diagonal(&[1.0, 0.0, 1.0])).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(Projector::identity(3).rank(), 3);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let phi = ket(&[1.0, 0.0, 0.0, 1.0]).density();
        // oracle: (ρ₁)_{ij} = Σ_k ρ_{2i+k, 2j+k}
        let m = phi.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let s = m.get(2 * i, 2 * j) + m.get(2 * i + 1, 2 * j + 1);
                let expected = if i == j { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(s.re, expected, epsilon = 1e-15);
            }
        }
        let rho1 = partial_trace(&phi, (2, 2), Factor::First).unwrap();
        assert!(
            rho1.matrix()
                .max_abs_diff(&ComplexMatrix::diagonal(&[0.5, 0.5]))
                < 1e-15
        );
    }

    #[test]
    fn partial_trace_of_product_returns_factor() {
        let a = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        let b = ket(&[1.0, 1.0, 1.0]).density();
        let ab = a.tensor(&b).unwrap();
        let back_a = partial_trace(&ab, (2, 3), Factor::First).unwrap();
        let back_b = partial_trace(&ab, (2, 3), Factor::Second).unwrap();
        assert!(back_a.matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(back_b.matrix().max_abs_diff(b.matrix()) < 1e-15);
        assert_abs_diff_eq!(back_b.matrix().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let r = DensityMatrix::maximally_mixed(4).unwrap();
        assert!(matches!(
            partial_trace(&r, (2, 3), Factor::First),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_and_born_rule_examples() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(
            expectation(&rho, &HermitianOperator::identity(2)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let zero = ket(&[1.0, 0.0]);
        let one = ket(&[0.0, 1.0]);
        let plus = ket(&[1.0, 1.0]);
        assert_eq!(
            expectation(&zero.density(), one.projector().operator()).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            born_rule(&zero, &zero.projector()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            born_rule(&zero, &one.projector()).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            born_rule(&plus, &zero.projector()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            born_rule(&plus.density(), &zero.projector()).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(born_rule(&plus, &Projector::identity(3)).is_err());
    }

    #[test]
    fn spectral_decomposition_of_identity_is_one_component() {
        let parts = spectral_decompose(&HermitianOperator::identity(2)).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].eigenvalue, 1.0);
        assert_eq!(parts[0].projector.rank(), 2);
        assert!(
            parts[0]
                .projector
                .matrix()
                .max_abs_diff(&ComplexMatrix::identity(2))
                < 1e-12
        );
    }

    #[test]
    fn spectral_decomposition_of_diagonal_is_ordered() {
        let parts = spectral_decompose(&HermitianOperator::diagonal(&[-1.0, 1.0])).unwrap();
        assert_eq!(parts.len(), 2);
        assert_abs_diff_eq!(parts[0].eigenvalue, -1.0, epsilon = 1e-15);
        assert!(
            parts[0]
                .projector
                .matrix()
                .max_abs_diff(&ComplexMatrix::diagonal(&[1.0, 0.0]))
                < 1e-12
        );
        assert_abs_diff_eq!(parts[1].eigenvalue, 1.0, epsilon = 1e-15);
        assert!(
            parts[1]
                .projector
                .matrix()
                .max_abs_diff(&ComplexMatrix::diagonal(&[0.0, 1.0]))
                < 1e-12
        );
    }

    #[test]
    fn spectral_decomposition_of_sigma_x_reassembles() {
        let sx = sigma_x();
        let parts = spectral_decompose(&sx).unwrap();
        assert_eq!(parts.len(), 2);
        let minus = ket(&[1.0, -1.0]).projector();
        let plus = ket(&[1.0, 1.0]).projector();
        assert!(parts[0].projector.matrix().max_abs_diff(minus.matrix()) < 1e-12);
        assert!(parts[1].projector.matrix().max_abs_diff(plus.matrix()) < 1e-12);
        let mut sum = ComplexMatrix::zeros(2, 2);
        for part in &parts {
            sum = sum
                .add(&part.projector.matrix().scale(c(part.eigenvalue, 0.0)))
                .unwrap();
        }
        assert!(sum.max_abs_diff(sx.matrix()) < 1e-12);
    }

    #[test]
    fn eigenvectors_follow_phase_convention() {
        let sy = HermitianOperator::new(
            ComplexMatrix::from_row_major(
                2,
                2,
                &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
            )
            .unwrap(),
        )
        .unwrap();
        let eig = hermitian_eigen(&sy).unwrap();
        for v in &eig.vectors {
            let first = v.amplitudes()[0];
            assert!(first.re > 0.0);
            assert_abs_diff_eq!(first.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn matrix_json_uses_row_major_parts() {
        let m = ComplexMatrix::from_row_major(1, 2, &[c(1.0, 2.0), c(3.0, -4.0)]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            r#"{"rows":1,"cols":2,"re":[1.0,3.0],"im":[2.0,-4.0]}"#
        );
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(
            r#"{"rows":1,"cols":1,"re":[1],"im":[0],"extra":1}"#
        )
        .is_err());
        assert!(
            serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":1,"re":[1],"im":[0]}"#)
                .is_err()
        );
    }

    #[test]
    fn unitary_conjugation_preserves_type() {
        let h = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0])
            .unwrap()
            .scale(c(std::f64::consts::FRAC_1_SQRT_2, 0.0));
        let u = Unitary::new(h).unwrap();
        let zero = ket(&[1.0, 0.0]);
        let p = u.conjugate_projector(&zero.projector()).unwrap();
        assert!(
            p.matrix()
                .max_abs_diff(ket(&[1.0, 1.0]).projector().matrix())
                < 1e-12
        );
        assert!(Unitary::new(ComplexMatrix::diagonal(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let v = ket(&[1.0, 1.0]);
        let w = StateVector::new(v.amplitudes().iter().map(|z| z * c(0.0, 1.0)).collect()).unwrap();
        assert!(v.phase_distance(&w).unwrap() < 1e-15);
        assert!(v.phase_distance(&ket(&[1.0, -1.0])).unwrap() > 0.5);
    }
}
