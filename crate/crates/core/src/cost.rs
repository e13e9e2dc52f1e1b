//! Cost operators from observables and classical cost functions.
//!
//! For observables `A_1..A_K` with spectral projectors `P_k(λ)`, a classical
//! cost `c(x, y)` on `ℝ^K × ℝ^K` induces the operator
//!
//! ```text
//! C = Σ_{x, y} c(x, y) ⊗_k ( P_k(y_k) ⊗ P_k(x_k)ᵀ )
//! ```
//!
//! on `(ℋ ⊗ ℋ*)^⊗K`, summed over all eigenvalue tuples. The `y` variables sit
//! in the ℋ slots (the target marginal) and the `x` variables in the ℋ* slots.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::linalg::{
    self, eig_hermitian, embed, kron, pauli, pauli_triple, transpose_entrywise, unitarity_defect, ComplexMatrix,
    HermitianMatrix, LinalgError, SpectralDecomposition,
};

/// Largest operator dimension built by [`cost_operator_general`].
pub const MAX_COST_DIM: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("cost arity {cost} does not match {observables} observables")]
    ArityMismatch { cost: usize, observables: usize },
    #[error("cost operator dimension {dim} exceeds the budget of {max}")]
    DimensionBudget { dim: usize, max: usize },
    #[error("exponent p = {0} must be a finite real >= 1")]
    InvalidExponent(f64),
    #[error("classical cost is negative ({value}) at an eigenvalue tuple")]
    NegativeCost { value: f64 },
    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },
    #[error("observable set is empty")]
    NoObservables,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, CostError>;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(CostError::InvalidExponent(p))
    }
}

type CostFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type PairFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Classical cost `c: ℝ^K × ℝ^K → [0, ∞)`, called as `c(x, y)`.
#[derive(Clone)]
pub struct ClassicalCost {
    arity: usize,
    eval: Arc<CostFn>,
}

impl ClassicalCost {
    pub fn new<F>(arity: usize, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { arity, eval: Arc::new(f) }
    }

    /// `Σ_k |x_k − y_k|^p`.
    pub fn lp_power(arity: usize, p: f64) -> Self {
        Self::new(arity, move |x, y| x.iter().zip(y).map(|(a, b)| (a - b).abs().powf(p)).sum())
    }

    /// `‖x − y‖₂^p`; does not factorize for `K > 1` unless `p = 2`.
    pub fn euclidean_power(arity: usize, p: f64) -> Self {
        Self::new(arity, move |x, y| {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().powf(p / 2.0)
        })
    }

    pub fn zero(arity: usize) -> Self {
        Self::new(arity, |_, _| 0.0)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.eval)(x, y)
    }
}

impl fmt::Debug for ClassicalCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassicalCost").field("arity", &self.arity).finish_non_exhaustive()
    }
}

/// Two-argument cost `f(x, y)` for one factor of a separable cost.
#[derive(Clone)]
pub struct PairCost(Arc<PairFn>);

impl PairCost {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self(Arc::new(f))
    }

    /// `|x − y|^p`.
    pub fn abs_power(p: f64) -> Self {
        Self::new(move |x, y| (x - y).abs().powf(p))
    }

    pub fn constant(value: f64) -> Self {
        Self::new(move |_, _| value)
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        (self.0)(x, y)
    }
}

impl fmt::Debug for PairCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PairCost(..)")
    }
}

/// Observables `A_1..A_K` of a common dimension with cached spectra.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    observables: Vec<HermitianMatrix>,
    spectra: Vec<SpectralDecomposition>,
}

impl ObservableSet {
    pub fn new(observables: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = observables.first().ok_or(CostError::NoObservables)?.dim();
        if let Some(bad) = observables.iter().find(|a| a.dim() != dim) {
            return Err(LinalgError::DimensionMismatch { expected: dim, found: bad.dim() }.into());
        }
        let spectra = observables.iter().map(eig_hermitian).collect::<std::result::Result<_, _>>()?;
        Ok(Self { observables, spectra })
    }

    /// `{σx, σy, σz}`.
    pub fn pauli_triple() -> Self {
        Self::new(pauli_triple().to_vec()).expect("Pauli matrices are valid observables")
    }

    pub fn sigma_z() -> Self {
        Self::new(vec![pauli(2)]).expect("σz is a valid observable")
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.observables[0].dim()
    }

    pub fn observables(&self) -> &[HermitianMatrix] {
        &self.observables
    }

    pub fn spectra(&self) -> &[SpectralDecomposition] {
        &self.spectra
    }
}

/// All `(x, y, P(y) ⊗ P(x)ᵀ)` for one observable.
fn pair_terms(spectrum: &SpectralDecomposition) -> Vec<(f64, f64, ComplexMatrix)> {
    let mut out = Vec::new();
    for (iy, py) in spectrum.projectors.iter().enumerate() {
        for (ix, px) in spectrum.projectors.iter().enumerate() {
            let term = kron(py.matrix(), &px.matrix().transpose());
            out.push((spectrum.eigenvalues[ix], spectrum.eigenvalues[iy], term));
        }
    }
    out
}

/// Cost operator of an arbitrary classical cost on `(ℋ⊗ℋ*)^⊗K`, summed over
/// every eigenvalue tuple.
pub fn cost_operator_general(obs: &ObservableSet, cost: &ClassicalCost) -> Result<HermitianMatrix> {
    let k = obs.len();
    if cost.arity() != k {
        return Err(CostError::ArityMismatch { cost: cost.arity(), observables: k });
    }
    let d2 = obs.dim() * obs.dim();
    let dim = d2
        .checked_pow(k as u32)
        .filter(|&n| n <= MAX_COST_DIM)
        .ok_or(CostError::DimensionBudget { dim: d2.saturating_pow(k as u32), max: MAX_COST_DIM })?;

    let per_factor: Vec<_> = obs.spectra().iter().map(pair_terms).collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut x = vec![0.0; k];
    let mut y = vec![0.0; k];
    let mut index = vec![0usize; k];
    loop {
        for f in 0..k {
            let (xf, yf, _) = &per_factor[f][index[f]];
            x[f] = *xf;
            y[f] = *yf;
        }
        let value = cost.evaluate(&x, &y);
        if value < 0.0 || !value.is_finite() {
            return Err(CostError::NegativeCost { value });
        }
        if value != 0.0 {
            let term = linalg::kron_all((0..k).map(|f| &per_factor[f][index[f]].2));
            out += term.scale(value);
        }
        // odometer over the Cartesian product of eigenvalue pairs
        let mut f = k;
        loop {
            if f == 0 {
                return Ok(HermitianMatrix::new(out)?);
            }
            f -= 1;
            index[f] += 1;
            if index[f] < per_factor[f].len() {
                break;
            }
            index[f] = 0;
        }
    }
}

/// One `C_k = Σ f_k(x, y) P_k(y) ⊗ P_k(x)ᵀ` per observable, each on ℋ⊗ℋ*.
pub fn cost_operator_factorized(obs: &ObservableSet, per_factor: &[PairCost]) -> Result<Vec<HermitianMatrix>> {
    if per_factor.len() != obs.len() {
        return Err(CostError::ArityMismatch { cost: per_factor.len(), observables: obs.len() });
    }
    obs.spectra()
        .iter()
        .zip(per_factor)
        .map(|(spectrum, f)| {
            let d2 = spectrum.dim() * spectrum.dim();
            let mut out = ComplexMatrix::zeros(d2, d2);
            for (x, y, term) in pair_terms(spectrum) {
                let value = f.evaluate(x, y);
                if value < 0.0 || !value.is_finite() {
                    return Err(CostError::NegativeCost { value });
                }
                out += term.scale(value);
            }
            Ok(HermitianMatrix::new(out)?)
        })
        .collect()
}

/// `Σ_k I^⊗(k−1) ⊗ C_k ⊗ I^⊗(K−k)` on `(ℋ⊗ℋ*)^⊗K`.
pub fn embed_factorized_sum(terms: &[HermitianMatrix]) -> Result<HermitianMatrix> {
    let d2 = terms.first().ok_or(CostError::NoObservables)?.dim();
    let k = terms.len();
    let dim = d2.pow(k as u32);
    if dim > MAX_COST_DIM {
        return Err(CostError::DimensionBudget { dim, max: MAX_COST_DIM });
    }
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (f, term) in terms.iter().enumerate() {
        if term.dim() != d2 {
            return Err(LinalgError::DimensionMismatch { expected: d2, found: term.dim() }.into());
        }
        out += embed(term.matrix(), d2.pow(f as u32), d2.pow((k - f - 1) as u32));
    }
    Ok(HermitianMatrix::new(out)?)
}

/// `Σ_k C_k` on a single copy of ℋ⊗ℋ*.
pub fn sum_factorized(terms: &[HermitianMatrix]) -> Result<HermitianMatrix> {
    let first = terms.first().ok_or(CostError::NoObservables)?;
    terms[1..].iter().try_fold(first.clone(), |acc, t| {
        if t.dim() != acc.dim() {
            Err(LinalgError::DimensionMismatch { expected: acc.dim(), found: t.dim() }.into())
        } else {
            Ok(&acc + t)
        }
    })
}

/// `|M|^p` through the spectral decomposition of `M`.
pub fn abs_power(m: &HermitianMatrix, p: f64) -> Result<HermitianMatrix> {
    Ok(eig_hermitian(m)?.apply(|x| x.abs().powf(p)))
}

/// `A ⊗ Iᵀ − I ⊗ Aᵀ`.
pub fn difference_operator(a: &HermitianMatrix) -> HermitianMatrix {
    let id = HermitianMatrix::identity(a.dim());
    &a.kron(&id) - &id.kron(&transpose_entrywise(a))
}

/// Symmetric qubit cost `2^{p+1} I⊗Iᵀ − 2^p |I⟩⟩⟨⟨I|`.
pub fn cost_symm(p: f64) -> Result<HermitianMatrix> {
    check_exponent(p)?;
    let s = 2f64.powf(p);
    Ok(HermitianMatrix::from_real_rows(
        4,
        &[
            s, 0.0, 0.0, -s, //
            0.0, 2.0 * s, 0.0, 0.0, //
            0.0, 0.0, 2.0 * s, 0.0, //
            -s, 0.0, 0.0, s,
        ],
    )?)
}

/// The symmetric cost summed term by term as `Σ_k |σ_k ⊗ Iᵀ − I ⊗ σ_kᵀ|^p`.
pub fn cost_symm_functional(p: f64) -> Result<HermitianMatrix> {
    check_exponent(p)?;
    let terms = pauli_triple()
        .iter()
        .map(|s| abs_power(&difference_operator(s), p))
        .collect::<Result<Vec<_>>>()?;
    sum_factorized(&terms)
}

/// Single-observable qubit cost `2^{p−1}(I⊗Iᵀ − σz⊗σzᵀ) = diag(0, 2^p, 2^p, 0)`.
pub fn cost_z(p: f64) -> Result<HermitianMatrix> {
    check_exponent(p)?;
    let s = 2f64.powf(p);
    Ok(HermitianMatrix::from_diagonal(&[0.0, s, s, 0.0]))
}

/// `‖(U ⊗ (U*)ᵀ) C (U* ⊗ Uᵀ) − C‖_∞` for a unitary `U` on ℋ.
pub fn check_unitary_invariance(cost: &HermitianMatrix, u: &ComplexMatrix) -> Result<f64> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(CostError::NotUnitary { defect });
    }
    if u.nrows() * u.nrows() != cost.dim() {
        return Err(LinalgError::DimensionMismatch { expected: cost.dim(), found: u.nrows() * u.nrows() }.into());
    }
    let v = kron(u, &u.adjoint().transpose());
    let rotated = cost.conjugate_by(&v);
    Ok((&rotated - cost).norm_inf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, hadamard, max_abs_entry};
    use crate::random;

    fn assert_close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) {
        let diff = a.max_abs_diff(b);
        assert!(diff <= tol, "difference {diff:e}\n{}\n{}", a.matrix(), b.matrix());
    }

    #[test]
    fn general_cost_sigma_z() {
        for p in [1.0, 2.0, 2.5] {
            let got = cost_operator_general(&ObservableSet::sigma_z(), &ClassicalCost::lp_power(1, p)).unwrap();
            let s = 2f64.powf(p);
            assert_close(&got, &HermitianMatrix::from_diagonal(&[0.0, s, s, 0.0]), 1e-13);
        }
        let zero = cost_operator_general(&ObservableSet::pauli_triple(), &ClassicalCost::zero(3)).unwrap();
        assert_close(&zero, &HermitianMatrix::zeros(64), 0.0);
    }

    #[test]
    fn general_cost_matches_kron_sum() {
        let obs = ObservableSet::new(vec![pauli(2), pauli(2)]).unwrap();
        let general = cost_operator_general(&obs, &ClassicalCost::lp_power(2, 1.0)).unwrap();
        let cz = cost_z(1.0).unwrap();
        let kron_sum = &cz.kron(&HermitianMatrix::identity(4)) + &HermitianMatrix::identity(4).kron(&cz);
        assert_close(&general, &kron_sum, 1e-13);
    }

    #[test]
    fn general_cost_errors() {
        let obs = ObservableSet::sigma_z();
        assert!(matches!(
            cost_operator_general(&obs, &ClassicalCost::lp_power(2, 1.0)),
            Err(CostError::ArityMismatch { .. })
        ));
        let big = ObservableSet::new(vec![pauli(0); 5]).unwrap();
        assert!(matches!(
            cost_operator_general(&big, &ClassicalCost::lp_power(5, 1.0)),
            Err(CostError::DimensionBudget { .. })
        ));
        let negative = ClassicalCost::new(1, |x, y| x[0] - y[0]);
        assert!(matches!(cost_operator_general(&obs, &negative), Err(CostError::NegativeCost { .. })));
    }

    #[test]
    fn factorized_examples() {
        let cz = cost_operator_factorized(&ObservableSet::sigma_z(), &[PairCost::abs_power(2.0)]).unwrap();
        assert_close(&cz[0], &cost_z(2.0).unwrap(), 1e-13);

        let one = cost_operator_factorized(&ObservableSet::sigma_z(), &[PairCost::constant(1.0)]).unwrap();
        assert_close(&one[0], &HermitianMatrix::identity(4), 1e-13);

        // |σx ⊗ I − I ⊗ σxᵀ|^p is the σz cost rotated by H ⊗ Hᵀ
        let obs = ObservableSet::new(vec![pauli(0)]).unwrap();
        let cx = cost_operator_factorized(&obs, &[PairCost::abs_power(2.0)]).unwrap();
        let h = hadamard();
        let rotated = cost_z(2.0).unwrap().conjugate_by(&kron(&h, &h.transpose()));
        assert_close(&cx[0], &rotated, 1e-13);

        assert!(matches!(
            cost_operator_factorized(&obs, &[]),
            Err(CostError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn symm_cost_as_printed() {
        let p2 = cost_symm(2.0).unwrap();
        let want = HermitianMatrix::from_real_rows(
            4,
            &[4.0, 0.0, 0.0, -4.0, 0.0, 8.0, 0.0, 0.0, 0.0, 0.0, 8.0, 0.0, -4.0, 0.0, 0.0, 4.0],
        )
        .unwrap();
        assert_eq!(p2, want);
        let p1 = cost_symm(1.0).unwrap();
        let want = HermitianMatrix::from_real_rows(
            4,
            &[2.0, 0.0, 0.0, -2.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 4.0, 0.0, -2.0, 0.0, 0.0, 2.0],
        )
        .unwrap();
        assert_eq!(p1, want);
        let eig = p2.eigenvalues().unwrap();
        for (got, want) in eig.iter().zip([0.0, 8.0, 8.0, 8.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(matches!(cost_symm(0.5), Err(CostError::InvalidExponent(_))));
        assert!(matches!(cost_z(f64::NAN), Err(CostError::InvalidExponent(_))));
    }

    #[test]
    fn symm_cost_two_routes_agree() {
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert_close(&cost_symm(p).unwrap(), &cost_symm_functional(p).unwrap(), 1e-10);
        }
    }

    #[test]
    fn z_cost_examples() {
        assert_eq!(cost_z(1.0).unwrap(), HermitianMatrix::from_diagonal(&[0.0, 2.0, 2.0, 0.0]));
        assert_eq!(cost_z(2.0).unwrap(), HermitianMatrix::from_diagonal(&[0.0, 4.0, 4.0, 0.0]));
        let vec_i = linalg::vectorize(&ComplexMatrix::identity(2, 2));
        let corner = vec_i.dotc(&(cost_z(2.0).unwrap().matrix() * &vec_i));
        assert_eq!(corner, c(0.0, 0.0));
        // 2^{p−1}(I⊗Iᵀ − σz⊗σzᵀ)
        let p = 1.7;
        let alt = (&HermitianMatrix::identity(4) - &pauli(2).kron(&pauli(2))).scaled(2f64.powf(p - 1.0));
        assert_close(&cost_z(p).unwrap(), &alt, 1e-14);
    }

    #[test]
    fn unitary_invariance() {
        let mut rng = random::rng(11);
        let symm = cost_symm(2.0).unwrap();
        for _ in 0..20 {
            let u = random::unitary(&mut rng, 2);
            assert!(check_unitary_invariance(&symm, &u).unwrap() <= 1e-10);
        }
        let phi: f64 = 0.83;
        let rot = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.0, phi / 2.0).exp(),
            c(0.0, -phi / 2.0).exp(),
        ]));
        let cz = cost_z(2.0).unwrap();
        assert!(check_unitary_invariance(&cz, &rot).unwrap() <= 1e-10);
        let dev = check_unitary_invariance(&cz, &hadamard()).unwrap();
        assert!((dev - 4.0).abs() < 1e-12, "deviation {dev}");
        let not_unitary = ComplexMatrix::identity(2, 2).scale(2.0);
        assert!(matches!(check_unitary_invariance(&cz, &not_unitary), Err(CostError::NotUnitary { .. })));
    }

    #[test]
    fn costs_are_swap_symmetric() {
        for p in [1.0, 2.0, 3.0] {
            for cost in [cost_symm(p).unwrap(), cost_z(p).unwrap()] {
                let swapped = linalg::swap_transpose(&cost, 2).unwrap();
                assert!(max_abs_entry(&(swapped.matrix() - cost.matrix())) < 1e-14);
            }
        }
    }
}
