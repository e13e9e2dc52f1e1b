//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Matrices are stored as [`nalgebra::DMatrix`] over `Complex<f64>`. The dual
//! space ℋ* is identified with ℋ through the computational basis, so the
//! transpose of an operator is the entrywise transpose of its matrix. On a
//! two-slot space ℋ⊗ℋ* the first tensor factor is the ℋ slot and the second
//! is the ℋ* slot; index `(i, j)` of the product lives at `i * d + j`.

use std::ops::{Add, Deref, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Largest tolerated violation of `m[(i, j)] == conj(m[(j, i)])`, relative to
/// `max(1, max |m_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues down to `-PSD_TOL` are treated as zero.
pub const PSD_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are merged into one spectral projector.
pub const EIGEN_CLUSTER_GAP: f64 = 1e-9;
const EIGEN_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (asymmetry {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("trace {trace} differs from 1")]
    TraceNotOne { trace: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid factor selection: {0}")]
    InvalidFactors(String),
    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Builds a matrix from entries listed row by row.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(rows, cols, entries)
}

/// Builds a complex matrix from real entries listed row by row.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_iterator(
        rows,
        cols,
        (0..rows * cols).map(|k| {
            let (j, i) = (k / rows, k % rows);
            c(entries[i * cols + j], 0.0)
        }),
    )
}

/// Real inner product `Re tr(A* B)` on matrices.
pub fn frobenius_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Induced ∞-norm (largest absolute row sum).
pub fn norm_inf(m: &ComplexMatrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs_entry(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// `I_left ⊗ op ⊗ I_right`.
pub fn embed(op: &ComplexMatrix, left: usize, right: usize) -> ComplexMatrix {
    let mut out = op.clone();
    if left > 1 {
        out = ComplexMatrix::identity(left, left).kronecker(&out);
    }
    if right > 1 {
        out = out.kronecker(&ComplexMatrix::identity(right, right));
    }
    out
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Symmetric eigen-decomposition with eigenvalues sorted ascending; the
/// eigenvectors are the columns of the returned matrix.
pub fn eigh(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::SymmetricEigen::try_new(hermitize(m), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(LinalgError::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut vals: Vec<f64> = nalgebra::SymmetricEigen::try_new(hermitize(m), f64::EPSILON, EIGEN_MAX_ITER)
        .ok_or(LinalgError::EigenNoConvergence)?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// A dense complex matrix equal to its own adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Validates Hermiticity and symmetrizes away rounding-level asymmetry.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let deviation = max_abs_entry(&(&m - m.adjoint()));
        if deviation > HERMITIAN_TOL * max_abs_entry(&m).max(1.0) {
            return Err(LinalgError::NotHermitian { deviation });
        }
        Ok(Self(hermitize(&m)))
    }

    /// Wraps a matrix that is Hermitian by construction up to rounding.
    pub(crate) fn from_raw(m: ComplexMatrix) -> Self {
        debug_assert!(m.is_square());
        Self(hermitize(&m))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Self::new(from_real_rows(dim, dim, entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(diag[i], 0.0) } else { c(0.0, 0.0) }))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re tr(self · other)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        frobenius_inner(&self.0, &other.0)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues(&self.0)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        max_abs_entry(&(&self.0 - &other.0))
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.0)
    }

    pub fn kron(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(self.0.kronecker(&other.0))
    }

    /// Conjugation `U · self · U*`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> HermitianMatrix {
        Self::from_raw(u * &self.0 * u.adjoint())
    }
}

impl Deref for HermitianMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Add for HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0 + rhs.0)
    }
}

impl Sub for HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(self.0 - rhs.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scaled(rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn neg(self) -> HermitianMatrix {
        self.scaled(-1.0)
    }
}

/// A positive semidefinite Hermitian matrix with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let trace = h.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(LinalgError::TraceNotOne { trace });
        }
        let min_eigenvalue = h.min_eigenvalue()?;
        if min_eigenvalue < -PSD_TOL {
            return Err(LinalgError::NotPsd { min_eigenvalue });
        }
        Ok(Self(h))
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Checks positivity, then rescales to unit trace.
    pub fn normalized(h: HermitianMatrix) -> Result<Self> {
        let min_eigenvalue = h.min_eigenvalue()?;
        let trace = h.trace();
        if min_eigenvalue < -PSD_TOL * trace.abs().max(1.0) {
            return Err(LinalgError::NotPsd { min_eigenvalue });
        }
        if trace <= 0.0 {
            return Err(LinalgError::TraceNotOne { trace });
        }
        Ok(Self(h.scaled(1.0 / trace)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(HermitianMatrix::identity(dim).scaled(1.0 / dim as f64))
    }

    /// `|ψ⟩⟨ψ|` for a normalized copy of `psi`.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let v = psi.unscale(norm);
        Ok(Self(HermitianMatrix::from_raw(&v * v.adjoint())))
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;

    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}

/// Per-factor dimensions of a tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorShape {
    dims: Vec<usize>,
}

impl FactorShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(LinalgError::InvalidFactors(format!("dimensions {dims:?}")));
        }
        Ok(Self { dims })
    }

    /// `(ℋ ⊗ ℋ*)^⊗k` for `dim ℋ = d`: `2k` factors of dimension `d`.
    pub fn transport(d: usize, k: usize) -> Result<Self> {
        Self::new(vec![d; 2 * k])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

/// Offsets of every multi-index over `factors` in the flat index of `shape`.
fn offsets(shape: &FactorShape, factors: &[usize]) -> Vec<usize> {
    let dims = shape.dims();
    let mut strides = vec![1usize; dims.len()];
    for f in (0..dims.len().saturating_sub(1)).rev() {
        strides[f] = strides[f + 1] * dims[f + 1];
    }
    let mut out = vec![0usize];
    for &f in factors {
        let stride = strides[f];
        out = out
            .iter()
            .flat_map(|&base| (0..dims[f]).map(move |digit| base + digit * stride))
            .collect();
    }
    out
}

/// Traces out every factor of `shape` not listed in `keep` (0-based).
///
/// Kept factors appear in the output in ascending order.
pub fn partial_trace(m: &HermitianMatrix, shape: &FactorShape, keep: &[usize]) -> Result<HermitianMatrix> {
    if m.dim() != shape.total() {
        return Err(LinalgError::DimensionMismatch { expected: shape.total(), found: m.dim() });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() || kept.iter().any(|&f| f >= shape.len()) {
        return Err(LinalgError::InvalidFactors(format!("keep {keep:?} for {} factors", shape.len())));
    }
    let traced: Vec<usize> = (0..shape.len()).filter(|f| !kept.contains(f)).collect();
    let kept_off = offsets(shape, &kept);
    let traced_off = offsets(shape, &traced);
    let n = kept_off.len();
    let out = ComplexMatrix::from_fn(n, n, |r, col| {
        traced_off
            .iter()
            .map(|&t| m[(kept_off[r] + t, kept_off[col] + t)])
            .sum()
    });
    Ok(HermitianMatrix::from_raw(out))
}

pub fn transpose_entrywise(m: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix(m.transpose())
}

/// Swap transposition on ℋ⊗ℋ*: the linear extension of `A ⊗ Bᵀ ↦ B ⊗ Aᵀ`.
pub fn swap_transpose(m: &HermitianMatrix, d: usize) -> Result<HermitianMatrix> {
    if m.dim() != d * d {
        return Err(LinalgError::DimensionMismatch { expected: d * d, found: m.dim() });
    }
    let mut out = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    out[(l * d + k, j * d + i)] = m[(i * d + j, k * d + l)];
                }
            }
        }
    }
    Ok(HermitianMatrix::from_raw(out))
}

/// Eigenvalues in ascending order with their orthogonal spectral projectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<HermitianMatrix>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.projectors.first().map_or(0, |p| p.dim())
    }

    /// `Σ f(λ_i) P_i`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (&lambda, p) in self.eigenvalues.iter().zip(&self.projectors) {
            out += p.matrix().scale(f(lambda));
        }
        HermitianMatrix::from_raw(out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.apply(|x| x)
    }
}

/// Spectral decomposition with eigenvalues closer than [`EIGEN_CLUSTER_GAP`]
/// merged into a single projector.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let (values, vectors) = eigh(m.matrix())?;
    let n = values.len();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < EIGEN_CLUSTER_GAP {
            end += 1;
        }
        let block = vectors.columns(start, end - start);
        let lambda = values[start..end].iter().sum::<f64>() / (end - start) as f64;
        eigenvalues.push(lambda);
        projectors.push(HermitianMatrix::from_raw(block * block.adjoint()));
        start = end;
    }
    Ok(SpectralDecomposition { eigenvalues, projectors })
}

/// Principal square root of a positive semidefinite matrix; eigenvalues in
/// `[-PSD_TOL, 0)` are clamped to zero.
pub fn sqrt_psd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spectrum = eig_hermitian(m)?;
    if let Some(&min_eigenvalue) = spectrum.eigenvalues.first() {
        if min_eigenvalue < -PSD_TOL {
            return Err(LinalgError::NotPsd { min_eigenvalue });
        }
    }
    // eigenvalues at rounding level are zeros of the exact spectrum
    let top = spectrum.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 8.0 * m.dim() as f64 * f64::EPSILON * top;
    Ok(spectrum.apply(|x| if x <= floor { 0.0 } else { x.sqrt() }))
}

/// `|X⟩⟩`: entry `i * cols + j` holds `X(i, j)`.
pub fn vectorize(x: &ComplexMatrix) -> ComplexVector {
    let cols = x.ncols();
    ComplexVector::from_fn(x.len(), |k, _| x[(k / cols, k % cols)])
}

/// `|X⟩⟩⟨⟨X|`.
pub fn outer_vec(x: &ComplexMatrix) -> HermitianMatrix {
    let v = vectorize(x);
    HermitianMatrix::from_raw(&v * v.adjoint())
}

/// Orthonormal basis of the Hermitian `dim × dim` matrices under `Re tr(A*B)`:
/// `I/√dim` first, then normalized generalized Gell-Mann matrices (for each
/// pair `j < k` the symmetric then the antisymmetric element, then the
/// diagonal ones). For `dim = 2` this is `{I, σx, σy, σz}/√2`.
pub fn hermitian_basis(dim: usize) -> Vec<HermitianMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    if dim == 0 {
        return basis;
    }
    basis.push(HermitianMatrix::identity(dim).scaled(1.0 / (dim as f64).sqrt()));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in j + 1..dim {
            let mut sym = ComplexMatrix::zeros(dim, dim);
            sym[(j, k)] = c(h, 0.0);
            sym[(k, j)] = c(h, 0.0);
            basis.push(HermitianMatrix(sym));
            let mut anti = ComplexMatrix::zeros(dim, dim);
            anti[(j, k)] = c(0.0, -h);
            anti[(k, j)] = c(0.0, h);
            basis.push(HermitianMatrix(anti));
        }
    }
    for l in 1..dim {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        diag[..l].iter_mut().for_each(|x| *x = 1.0 / norm);
        diag[l] = -(l as f64) / norm;
        basis.push(HermitianMatrix::from_diagonal(&diag));
    }
    basis
}

/// Pauli matrix for `axis` 0, 1, 2 (x, y, z).
pub fn pauli(axis: usize) -> HermitianMatrix {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let entries = match axis {
        0 => [o, one, one, o],
        1 => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        2 => [one, o, o, -one],
        _ => panic!("Pauli axis must be 0, 1 or 2, got {axis}"),
    };
    HermitianMatrix(from_row_major(2, 2, &entries))
}

pub fn pauli_triple() -> [HermitianMatrix; 3] {
    [pauli(0), pauli(1), pauli(2)]
}

pub fn hadamard() -> ComplexMatrix {
    from_real_rows(2, 2, &[1.0, 1.0, 1.0, -1.0]).scale(std::f64::consts::FRAC_1_SQRT_2)
}

/// Largest deviation of `u·u*` from the identity.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    max_abs_entry(&(u * u.adjoint() - ComplexMatrix::identity(u.nrows(), u.nrows())))
}
