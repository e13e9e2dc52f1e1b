//! Quantum couplings and the linearized transport problem.
//!
//! A coupling of `ρ` (source) and `ω` (target) is a state `Π` on `ℋ⊗ℋ*`
//! whose first marginal is `ω` and whose second marginal is `ρᵀ`. For `K`
//! observables the linearized problem optimizes a single plan `Γ` on
//! `(ℋ⊗ℋ*)^⊗K`; tensor factor `2k` carries `ω` and factor `2k+1` carries
//! `ρᵀ`, both 0-based.
//!
//! The dual variables are pairs `(X_k, Y_k)` of Hermitian operators with
//! objective `Σ_k tr(ρ X_k) + tr(ω Y_k)` and constraint
//! `C − Σ_k I ⊗ … ⊗ (Y_k ⊗ I + I ⊗ X_kᵀ) ⊗ … ⊗ I ⪰ 0`.

use thiserror::Error;

use crate::cost::{self, ClassicalCost, CostError, ObservableSet, PairCost};
use crate::linalg::{
    embed, hermitian_basis, kron, outer_vec, partial_trace, sqrt_psd, transpose_entrywise, DensityMatrix,
    FactorShape, HermitianMatrix, LinalgError,
};
use crate::sdp::{self, Constraint, SdpError, SdpProblem, SdpSolution, SolveStatus, SolverOptions};

/// Default marginal tolerance for [`Coupling`] construction.
pub const COUPLING_TOL: f64 = 1e-8;
/// Slack eigenvalue floor for dual feasibility.
pub const DUAL_FEAS_TOL: f64 = 1e-8;
/// Relative eigenvalue threshold used when counting ranks for the
/// degeneracy flag.
pub const RANK_REL_TOL: f64 = 1e-6;
/// Radicands of the divergence in `[−NEG_RADICAND_TOL, 0]` clamp to zero.
pub const NEG_RADICAND_TOL: f64 = 1e-9;
/// Tolerance for reporting the dual value as attained by the returned
/// potentials.
pub const ATTAINMENT_TOL: f64 = 1e-6;
/// Solver tolerance used for the three solves of a divergence.
pub const DIVERGENCE_SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("state dimensions differ: rho is {rho}, omega is {omega}")]
    StateDims { rho: usize, omega: usize },
    #[error("cost acts on dimension {found}, expected {expected}")]
    CostDims { expected: usize, found: usize },
    #[error("{0}")]
    ModeMismatch(String),
    #[error("exponent p = {0} must be finite and at least 1")]
    InvalidExponent(f64),
    #[error("matrix is not a coupling of the declared marginals (deviation {deviation:e}, min eigenvalue {min_eigenvalue:e})")]
    NotCoupling { deviation: f64, min_eigenvalue: f64 },
    #[error("solver stopped with status {status} after {iterations} iterations")]
    Solver { status: SolveStatus, iterations: usize },
    #[error("divergence radicand {0:e} is negative beyond tolerance")]
    NegativeRadicand(f64),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, TransportError>;

/// Diagnostics from [`is_coupling`].
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingCheck {
    pub valid: bool,
    /// Largest entrywise deviation over all `2K` marginals.
    pub max_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace_error: f64,
}

/// Checks PSD-ness, unit trace and all `2K` marginals of `pi`.
pub fn is_coupling(
    pi: &HermitianMatrix,
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    k: usize,
    tol: f64,
) -> Result<CouplingCheck> {
    let d = rho.dim();
    if omega.dim() != d {
        return Err(TransportError::StateDims { rho: d, omega: omega.dim() });
    }
    let shape = FactorShape::transport(d, k)?;
    if pi.dim() != shape.total() {
        return Err(LinalgError::DimensionMismatch { expected: shape.total(), found: pi.dim() }.into());
    }
    let rho_t = transpose_entrywise(rho);
    let mut max_deviation: f64 = 0.0;
    for f in 0..k {
        max_deviation = max_deviation.max(partial_trace(pi, &shape, &[2 * f])?.max_abs_diff(omega));
        max_deviation = max_deviation.max(partial_trace(pi, &shape, &[2 * f + 1])?.max_abs_diff(&rho_t));
    }
    let min_eigenvalue = pi.min_eigenvalue()?;
    let trace_error = (pi.trace() - 1.0).abs();
    Ok(CouplingCheck {
        valid: max_deviation <= tol && min_eigenvalue >= -tol && trace_error <= tol,
        max_deviation,
        min_eigenvalue,
        trace_error,
    })
}

/// A transport plan together with the marginals it couples.
#[derive(Clone, Debug)]
pub struct Coupling {
    matrix: DensityMatrix,
    shape: FactorShape,
    rho: DensityMatrix,
    omega: DensityMatrix,
}

impl Coupling {
    /// Validates `matrix` as a `K`-fold coupling of `rho` and `omega` at
    /// tolerance `tol`.
    pub fn new(matrix: HermitianMatrix, rho: DensityMatrix, omega: DensityMatrix, k: usize, tol: f64) -> Result<Self> {
        let check = is_coupling(&matrix, &rho, &omega, k, tol)?;
        if !check.valid {
            return Err(TransportError::NotCoupling {
                deviation: check.max_deviation.max(check.trace_error),
                min_eigenvalue: check.min_eigenvalue,
            });
        }
        let shape = FactorShape::transport(rho.dim(), k)?;
        let matrix = DensityMatrix::normalized(matrix)?;
        Ok(Self { matrix, shape, rho, omega })
    }

    pub fn matrix(&self) -> &DensityMatrix {
        &self.matrix
    }

    pub fn shape(&self) -> &FactorShape {
        &self.shape
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn omega(&self) -> &DensityMatrix {
        &self.omega
    }

    /// Number of observables `K`.
    pub fn factors(&self) -> usize {
        self.shape.len() / 2
    }

    pub fn check(&self, tol: f64) -> Result<CouplingCheck> {
        is_coupling(&self.matrix, &self.rho, &self.omega, self.factors(), tol)
    }

    /// `tr(C Π)`.
    pub fn objective(&self, cost: &HermitianMatrix) -> Result<f64> {
        if cost.dim() != self.matrix.dim() {
            return Err(TransportError::CostDims { expected: self.matrix.dim(), found: cost.dim() });
        }
        Ok(cost.inner(&self.matrix))
    }
}

/// `ω ⊗ ρᵀ`.
pub fn trivial_coupling(rho: &DensityMatrix, omega: &DensityMatrix) -> Result<Coupling> {
    if rho.dim() != omega.dim() {
        return Err(TransportError::StateDims { rho: rho.dim(), omega: omega.dim() });
    }
    let m = omega.kron(&transpose_entrywise(rho));
    Coupling::new(m, rho.clone(), omega.clone(), 1, COUPLING_TOL)
}

/// The canonical purification `|√ρ⟩⟩⟨⟨√ρ|`, a coupling of `ρ` with itself.
pub fn purification_coupling(rho: &DensityMatrix) -> Result<Coupling> {
    let root = sqrt_psd(rho)?;
    Coupling::new(outer_vec(root.matrix()), rho.clone(), rho.clone(), 1, COUPLING_TOL)
}

/// Kantorovich potentials `(X_k, Y_k)`, `k = 1..K`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPotentials {
    pub x: Vec<HermitianMatrix>,
    pub y: Vec<HermitianMatrix>,
}

impl DualPotentials {
    pub fn new(x: Vec<HermitianMatrix>, y: Vec<HermitianMatrix>) -> Result<Self> {
        if x.len() != y.len() || x.is_empty() {
            return Err(TransportError::ModeMismatch(format!(
                "potentials need matching non-empty lists, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        let d = x[0].dim();
        if let Some(bad) = x.iter().chain(&y).find(|m| m.dim() != d) {
            return Err(LinalgError::DimensionMismatch { expected: d, found: bad.dim() }.into());
        }
        Ok(Self { x, y })
    }

    pub fn single(x: HermitianMatrix, y: HermitianMatrix) -> Result<Self> {
        Self::new(vec![x], vec![y])
    }

    pub fn zeros(d: usize, k: usize) -> Self {
        Self { x: vec![HermitianMatrix::zeros(d); k], y: vec![HermitianMatrix::zeros(d); k] }
    }

    pub fn factors(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.x[0].dim()
    }

    /// `Σ_k tr(ρ X_k) + tr(ω Y_k)`.
    pub fn objective(&self, rho: &DensityMatrix, omega: &DensityMatrix) -> f64 {
        self.x.iter().map(|x| x.inner(rho)).sum::<f64>() + self.y.iter().map(|y| y.inner(omega)).sum::<f64>()
    }

    /// `Σ_k embed_k(Y_k ⊗ I + I ⊗ X_kᵀ)`.
    pub fn constraint_operator(&self) -> HermitianMatrix {
        let d = self.dim();
        let k = self.factors();
        let d2 = d * d;
        let id = HermitianMatrix::identity(d);
        let mut out = HermitianMatrix::zeros(d2.pow(k as u32));
        for (f, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            let local = &y.kron(&id) + &id.kron(&transpose_entrywise(x));
            let e = embed(local.matrix(), d2.pow(f as u32), d2.pow((k - f - 1) as u32));
            out = &out + &HermitianMatrix::from_raw(e);
        }
        out
    }

    /// `C − Σ_k embed_k(Y_k ⊗ I + I ⊗ X_kᵀ)`.
    pub fn slack(&self, cost: &HermitianMatrix) -> Result<HermitianMatrix> {
        let op = self.constraint_operator();
        if op.dim() != cost.dim() {
            return Err(TransportError::CostDims { expected: op.dim(), found: cost.dim() });
        }
        Ok(cost - &op)
    }

    /// Smallest eigenvalue of the slack.
    pub fn min_slack(&self, cost: &HermitianMatrix) -> Result<f64> {
        Ok(self.slack(cost)?.min_eigenvalue()?)
    }

    pub fn is_feasible(&self, cost: &HermitianMatrix, tol: f64) -> Result<bool> {
        Ok(self.min_slack(cost)? >= -tol)
    }
}

/// How the transport cost is specified.
#[derive(Clone, Debug)]
pub enum CostModel {
    /// A cost operator on a single copy of `ℋ⊗ℋ*`.
    Operator(HermitianMatrix),
    /// One pair cost per observable, `c(x, y) = Σ_k c_k(x_k, y_k)`.
    Factorized { observables: ObservableSet, terms: Vec<PairCost> },
    /// A joint classical cost on the `K`-tuples of eigenvalues.
    General { observables: ObservableSet, cost: ClassicalCost },
}

impl CostModel {
    /// `Σ_k |A_k ⊗ I − I ⊗ A_kᵀ|^p`.
    pub fn abs_power(observables: ObservableSet, p: f64) -> Self {
        let terms = vec![PairCost::abs_power(p); observables.len()];
        CostModel::Factorized { observables, terms }
    }

    fn state_dim(&self) -> Option<usize> {
        match self {
            CostModel::Operator(_) => None,
            CostModel::Factorized { observables, .. } | CostModel::General { observables, .. } => {
                Some(observables.dim())
            }
        }
    }

    fn observable_count(&self) -> usize {
        match self {
            CostModel::Operator(_) => 1,
            CostModel::Factorized { observables, .. } | CostModel::General { observables, .. } => observables.len(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One coupling on `ℋ⊗ℋ*` against a single cost operator.
    Joint,
    /// One correlated plan on `(ℋ⊗ℋ*)^⊗K`.
    Linearized,
    /// One coupling against `Σ_k C_k`; the product plan `Π^⊗K` reduces to
    /// this for factorized costs.
    Nonlinear,
}

#[derive(Clone, Debug)]
pub struct TransportInstance {
    pub rho: DensityMatrix,
    pub omega: DensityMatrix,
    pub cost: CostModel,
    pub p: f64,
    pub mode: Mode,
}

impl TransportInstance {
    pub fn new(rho: DensityMatrix, omega: DensityMatrix, cost: CostModel, p: f64, mode: Mode) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(TransportError::InvalidExponent(p));
        }
        if rho.dim() != omega.dim() {
            return Err(TransportError::StateDims { rho: rho.dim(), omega: omega.dim() });
        }
        let d = rho.dim();
        match &cost {
            CostModel::Operator(c) if c.dim() != d * d => {
                return Err(TransportError::CostDims { expected: d * d, found: c.dim() })
            }
            _ => {}
        }
        if let Some(od) = cost.state_dim() {
            if od != d {
                return Err(TransportError::CostDims { expected: d, found: od });
            }
        }
        let k = cost.observable_count();
        match (&cost, mode) {
            (CostModel::General { .. }, Mode::Nonlinear) if k > 1 => {
                return Err(TransportError::ModeMismatch(
                    "the nonlinear problem needs a factorized cost".into(),
                ))
            }
            (CostModel::Factorized { .. } | CostModel::General { .. }, Mode::Joint) if k > 1 => {
                return Err(TransportError::ModeMismatch(format!(
                    "joint mode takes a single observable, got {k}"
                )))
            }
            _ => {}
        }
        if let CostModel::Factorized { terms, .. } = &cost {
            if terms.len() != k {
                return Err(CostError::ArityMismatch { cost: terms.len(), observables: k }.into());
            }
        }
        Ok(Self { rho, omega, cost, p, mode })
    }

    /// Qubit instance against a fixed cost operator on `ℋ⊗ℋ*`.
    pub fn joint(rho: DensityMatrix, omega: DensityMatrix, cost: HermitianMatrix, p: f64) -> Result<Self> {
        Self::new(rho, omega, CostModel::Operator(cost), p, Mode::Joint)
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Number of tensor copies of `ℋ⊗ℋ*` in the plan.
    pub fn factors(&self) -> usize {
        match self.mode {
            Mode::Linearized => self.cost.observable_count(),
            Mode::Joint | Mode::Nonlinear => 1,
        }
    }

    /// The cost operator the plan is optimized against.
    pub fn cost_operator(&self) -> Result<HermitianMatrix> {
        Ok(match (&self.cost, self.mode) {
            (CostModel::Operator(c), _) => c.clone(),
            (CostModel::Factorized { observables, terms }, Mode::Linearized) => {
                cost::embed_factorized_sum(&cost::cost_operator_factorized(observables, terms)?)?
            }
            (CostModel::Factorized { observables, terms }, _) => {
                cost::sum_factorized(&cost::cost_operator_factorized(observables, terms)?)?
            }
            (CostModel::General { observables, cost }, _) => cost::cost_operator_general(observables, cost)?,
        })
    }

    /// The same problem with source and target exchanged.
    pub fn reversed(&self) -> Self {
        Self { rho: self.omega.clone(), omega: self.rho.clone(), ..self.clone() }
    }

    /// One joint instance per observable of a factorized cost.
    pub fn split_factors(&self) -> Result<Vec<TransportInstance>> {
        let CostModel::Factorized { observables, terms } = &self.cost else {
            return Err(TransportError::ModeMismatch("only factorized costs split per observable".into()));
        };
        let ops = cost::cost_operator_factorized(observables, terms)?;
        ops.into_iter()
            .map(|c| TransportInstance::new(self.rho.clone(), self.omega.clone(), CostModel::Operator(c), self.p, Mode::Joint))
            .collect()
    }
}

/// Primal SDP for a transport instance.
#[derive(Clone, Debug)]
pub struct PrimalProblem {
    pub sdp: SdpProblem,
    pub dim: usize,
    pub factors: usize,
    /// The non-identity Hermitian basis used for the marginal constraints.
    pub basis: Vec<HermitianMatrix>,
}

/// Builds `min tr(CΓ)` over plans `Γ` with the prescribed marginals.
///
/// For each factor `k` and non-identity basis element `B` there is one
/// constraint on the `ω` marginal and one on the `ρᵀ` marginal; the shared
/// unit-trace condition appears once, last.
pub fn build_primal(instance: &TransportInstance) -> Result<PrimalProblem> {
    let d = instance.dim();
    let k = instance.factors();
    let cost = instance.cost_operator()?;
    let d2 = d * d;
    let total = d2.pow(k as u32);
    if cost.dim() != total {
        return Err(TransportError::CostDims { expected: total, found: cost.dim() });
    }
    let basis: Vec<HermitianMatrix> = hermitian_basis(d).into_iter().skip(1).collect();
    let id = HermitianMatrix::identity(d);
    let mut constraints = Vec::with_capacity(2 * k * basis.len() + 1);
    for f in 0..k {
        let (left, right) = (d2.pow(f as u32), d2.pow((k - f - 1) as u32));
        for b in &basis {
            constraints.push(Constraint {
                matrix: HermitianMatrix::from_raw(embed(&kron(b, &id), left, right)),
                rhs: b.inner(&instance.omega),
            });
        }
        for b in &basis {
            constraints.push(Constraint {
                matrix: HermitianMatrix::from_raw(embed(&kron(&id, &transpose_entrywise(b)), left, right)),
                rhs: b.inner(&instance.rho),
            });
        }
    }
    constraints.push(Constraint { matrix: HermitianMatrix::identity(total), rhs: 1.0 });
    Ok(PrimalProblem { sdp: SdpProblem::new(cost, constraints)?, dim: d, factors: k, basis })
}

impl PrimalProblem {
    /// Maps constraint multipliers to potentials. The unit-trace multiplier
    /// is absorbed into `X_1`, so every `Y_k` and `X_k`, `k > 1`, is
    /// traceless.
    pub fn potentials(&self, y: &[f64]) -> DualPotentials {
        let nb = self.basis.len();
        let d = self.dim;
        let combine = |coeffs: &[f64]| {
            self.basis
                .iter()
                .zip(coeffs)
                .fold(HermitianMatrix::zeros(d), |acc, (b, &c)| &acc + &b.scaled(c))
        };
        let mut xs = Vec::with_capacity(self.factors);
        let mut ys = Vec::with_capacity(self.factors);
        for f in 0..self.factors {
            let base = 2 * f * nb;
            ys.push(combine(&y[base..base + nb]));
            xs.push(combine(&y[base + nb..base + 2 * nb]));
        }
        let t = y[2 * self.factors * nb];
        xs[0] = &xs[0] + &HermitianMatrix::identity(d).scaled(t);
        DualPotentials { x: xs, y: ys }
    }
}

/// The Kantorovich dual in basis coordinates.
///
/// The variables are the coefficients of `Y_k` and `X_k` in the traceless
/// Hermitian basis plus one identity coefficient carried by `X_1` (the
/// gauge `(X, Y) ↦ (X + tI, Y − tI)` is fixed by keeping `Y_k` traceless).
/// This is exactly the conic dual of [`build_primal`], so one primal-dual
/// solve yields both.
#[derive(Clone, Debug)]
pub struct DualProblem {
    pub primal: PrimalProblem,
    pub rho: DensityMatrix,
    pub omega: DensityMatrix,
}

pub fn build_dual(instance: &TransportInstance) -> Result<DualProblem> {
    Ok(DualProblem { primal: build_primal(instance)?, rho: instance.rho.clone(), omega: instance.omega.clone() })
}

impl DualProblem {
    pub fn num_variables(&self) -> usize {
        self.primal.sdp.num_constraints()
    }

    pub fn cost(&self) -> &HermitianMatrix {
        self.primal.sdp.objective()
    }

    pub fn potentials(&self, coeffs: &[f64]) -> DualPotentials {
        self.primal.potentials(coeffs)
    }

    /// Objective value and smallest slack eigenvalue of a candidate.
    pub fn evaluate(&self, pots: &DualPotentials) -> Result<(f64, f64)> {
        Ok((pots.objective(&self.rho, &self.omega), pots.min_slack(self.cost())?))
    }
}

#[derive(Clone, Debug)]
pub struct TransportSolution {
    /// `D^p`, the primal optimum.
    pub value: f64,
    /// `D = value^{1/p}`.
    pub distance: f64,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub coupling: Coupling,
    pub potentials: DualPotentials,
    /// Recomputed objective of `potentials`.
    pub potential_objective: f64,
    pub min_slack: f64,
    /// Whether the returned potentials are feasible and reach the primal
    /// value within [`ATTAINMENT_TOL`].
    pub dual_attained: bool,
    /// Whether `rank X + rank S < n` at the solution, signalling a
    /// non-unique optimal plan or potential.
    pub degenerate: bool,
    pub status: SolveStatus,
    pub iterations: usize,
    pub certificate: sdp::Certificate,
    pub raw: SdpSolution,
}

fn numerical_rank(m: &HermitianMatrix) -> Result<usize> {
    let ev = m.eigenvalues()?;
    let top = ev.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    Ok(ev.iter().filter(|&&v| v > RANK_REL_TOL * top).count())
}

/// Solves the transport primal and dual of `instance`.
pub fn wasserstein_distance(instance: &TransportInstance, opts: &SolverOptions) -> Result<TransportSolution> {
    let problem = build_primal(instance)?;
    let sol = sdp::solve(&problem.sdp, opts)?;
    if sol.status != SolveStatus::Optimal {
        return Err(TransportError::Solver { status: sol.status, iterations: sol.iterations });
    }
    let certificate = sdp::certify(&sol, &problem.sdp)?;
    let potentials = problem.potentials(&sol.y);
    let potential_objective = potentials.objective(&instance.rho, &instance.omega);
    let min_slack = potentials.min_slack(problem.sdp.objective())?;
    let dual_attained =
        min_slack >= -DUAL_FEAS_TOL && (potential_objective - sol.primal_obj).abs() <= ATTAINMENT_TOL * sol.primal_obj.abs().max(1.0);
    let degenerate = numerical_rank(&sol.x)? + numerical_rank(&sol.s)? < problem.sdp.dim();
    let coupling = Coupling {
        matrix: DensityMatrix::normalized(sol.x.clone())?,
        shape: FactorShape::transport(problem.dim, problem.factors)?,
        rho: instance.rho.clone(),
        omega: instance.omega.clone(),
    };
    let value = sol.primal_obj;
    Ok(TransportSolution {
        value,
        distance: value.max(0.0).powf(1.0 / instance.p),
        primal: sol.primal_obj,
        dual: sol.dual_obj,
        gap: (sol.primal_obj - sol.dual_obj).abs(),
        coupling,
        potentials,
        potential_objective,
        min_slack,
        dual_attained,
        degenerate,
        status: sol.status,
        iterations: sol.iterations,
        certificate,
        raw: sol,
    })
}

/// Sum of the `K` single-observable optima of a factorized instance.
pub fn factorwise_value(instance: &TransportInstance, opts: &SolverOptions) -> Result<f64> {
    instance
        .split_factors()?
        .iter()
        .map(|inst| wasserstein_distance(inst, opts).map(|s| s.value))
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Divergence {
    /// `D²(ρ, ω)`.
    pub cross: f64,
    pub self_rho: f64,
    pub self_omega: f64,
    /// `d²`, clamped at zero within tolerance.
    pub squared: f64,
    pub value: f64,
}

/// Quadratic divergence `d = (D²(ρ,ω) − ½(D²(ρ,ρ) + D²(ω,ω)))^{1/2}`, with
/// every term solved as an SDP against the same cost.
pub fn divergence_quadratic(
    rho: &DensityMatrix,
    omega: &DensityMatrix,
    cost: &CostModel,
    mode: Mode,
    opts: &SolverOptions,
) -> Result<Divergence> {
    // the radicand tolerance is tighter than the default solver tolerance
    let opts = SolverOptions {
        tol_gap: opts.tol_gap.min(DIVERGENCE_SOLVE_TOL),
        tol_feas: opts.tol_feas.min(DIVERGENCE_SOLVE_TOL),
        ..opts.clone()
    };
    let solve = |a: &DensityMatrix, b: &DensityMatrix| -> Result<f64> {
        let inst = TransportInstance::new(a.clone(), b.clone(), cost.clone(), 2.0, mode)?;
        Ok(wasserstein_distance(&inst, &opts)?.value)
    };
    let cross = solve(rho, omega)?;
    let self_rho = solve(rho, rho)?;
    let self_omega = solve(omega, omega)?;
    let radicand = cross - 0.5 * (self_rho + self_omega);
    if radicand < -NEG_RADICAND_TOL {
        return Err(TransportError::NegativeRadicand(radicand));
    }
    let squared = radicand.max(0.0);
    Ok(Divergence { cross, self_rho, self_omega, squared, value: squared.sqrt() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapDemo {
    pub p: f64,
    /// Optimum of the problem over product plans `Π^⊗3`.
    pub nonlinear: f64,
    /// Optimum of the linearized problem over correlated plans.
    pub linearized: f64,
}

impl GapDemo {
    pub fn difference(&self) -> f64 {
        self.nonlinear - self.linearized
    }
}

/// Nonlinear and linearized optima for `ρ = ½(I + ½σ_z)`,
/// `ω = ½(I − ½σ_z)` and the Pauli triple with `|x − y|^p`.
pub fn gap_demo(p: f64, opts: &SolverOptions) -> Result<GapDemo> {
    let rho = DensityMatrix::from_matrix(crate::linalg::from_real_rows(2, 2, &[0.75, 0.0, 0.0, 0.25]))?;
    let omega = DensityMatrix::from_matrix(crate::linalg::from_real_rows(2, 2, &[0.25, 0.0, 0.0, 0.75]))?;
    let cost = CostModel::abs_power(ObservableSet::pauli_triple(), p);
    let nonlinear = TransportInstance::new(rho.clone(), omega.clone(), cost.clone(), p, Mode::Nonlinear)?;
    let linearized = TransportInstance::new(rho, omega, cost, p, Mode::Linearized)?;
    Ok(GapDemo {
        p,
        nonlinear: wasserstein_distance(&nonlinear, opts)?.value,
        linearized: factorwise_value(&linearized, opts)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_symm, cost_z};
    use crate::linalg::{c, from_real_rows};

    fn rho_z(a: f64) -> DensityMatrix {
        DensityMatrix::from_matrix(from_real_rows(2, 2, &[(1.0 + a) / 2.0, 0.0, 0.0, (1.0 - a) / 2.0])).unwrap()
    }

    fn rho_x(a: f64) -> DensityMatrix {
        DensityMatrix::from_matrix(from_real_rows(2, 2, &[0.5, a / 2.0, a / 2.0, 0.5])).unwrap()
    }

    #[test]
    fn trivial_coupling_of_mixed_states() {
        let half = DensityMatrix::maximally_mixed(2);
        let t = trivial_coupling(&half, &half).unwrap();
        assert!(t.matrix().max_abs_diff(&HermitianMatrix::identity(4).scaled(0.25)) < 1e-15);
        let check = t.check(0.0).unwrap();
        assert!(check.valid);
        assert_eq!(check.max_deviation, 0.0);
    }

    #[test]
    fn trivial_coupling_objective() {
        // 8 − 4⟨⟨I|ω⊗ρᵀ|I⟩⟩ = 8 − 4 tr(ωρ) with tr(ωρ) = 2 · 3/16
        let t = trivial_coupling(&rho_z(0.5), &rho_z(-0.5)).unwrap();
        assert!(t.check(0.0).unwrap().valid);
        assert!((t.objective(&cost_symm(2.0).unwrap()).unwrap() - 6.5).abs() < 1e-12);
    }

    #[test]
    fn purification_of_maximally_mixed_state() {
        let pi = purification_coupling(&DensityMatrix::maximally_mixed(2)).unwrap();
        let want = from_real_rows(4, 4, &[0.5, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.5]);
        assert!(pi.matrix().max_abs_diff(&HermitianMatrix::new(want).unwrap()) < 1e-12);
    }

    #[test]
    fn purification_of_pure_state() {
        let psi = nalgebra::DVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho = DensityMatrix::pure(&psi).unwrap();
        let pi = purification_coupling(&rho).unwrap();
        let want = rho.kron(&transpose_entrywise(&rho));
        assert!(pi.matrix().max_abs_diff(&want) < 1e-9);
    }

    #[test]
    fn purification_objective() {
        for r in [0.0, 0.3, -0.7, 0.99] {
            let pi = purification_coupling(&rho_z(r)).unwrap();
            let got = pi.objective(&cost_symm(2.0).unwrap()).unwrap();
            assert!((got - (4.0 - 4.0 * (1.0 - r * r).sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn swapped_marginals_are_rejected() {
        let t = omega_first(0.3, -0.2);
        let check = is_coupling(&t, &rho_z(-0.2), &rho_z(0.3), 1, 1e-8).unwrap();
        assert!(!check.valid);
        assert!(check.max_deviation > 0.1);
    }

    fn omega_first(a: f64, b: f64) -> HermitianMatrix {
        rho_z(b).kron(&rho_z(a))
    }

    #[test]
    fn primal_constraint_counts() {
        let inst = TransportInstance::joint(rho_z(0.3), rho_z(-0.1), cost_z(2.0).unwrap(), 2.0).unwrap();
        let p = build_primal(&inst).unwrap();
        assert_eq!(p.sdp.dim(), 4);
        assert_eq!(p.sdp.num_constraints(), 7);
        let inst = TransportInstance::new(
            rho_z(0.3),
            rho_z(-0.1),
            CostModel::abs_power(ObservableSet::pauli_triple(), 2.0),
            2.0,
            Mode::Linearized,
        )
        .unwrap();
        let p = build_primal(&inst).unwrap();
        assert_eq!(p.sdp.dim(), 64);
        assert_eq!(p.sdp.num_constraints(), 19);
        assert_eq!(sdp::preprocess(&p.sdp).unwrap().1.rank, 19);
    }

    #[test]
    fn trivial_coupling_satisfies_primal_constraints() {
        let inst = TransportInstance::joint(rho_x(0.4), rho_z(-0.3), cost_symm(1.0).unwrap(), 1.0).unwrap();
        let p = build_primal(&inst).unwrap();
        let t = trivial_coupling(&inst.rho, &inst.omega).unwrap();
        for c in p.sdp.constraints() {
            assert!((c.matrix.inner(t.matrix()) - c.rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_inconsistent_instances() {
        let r3 = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            TransportInstance::joint(r3.clone(), rho_z(0.0), cost_z(1.0).unwrap(), 1.0),
            Err(TransportError::StateDims { .. })
        ));
        assert!(matches!(
            TransportInstance::joint(r3.clone(), r3, cost_z(1.0).unwrap(), 1.0),
            Err(TransportError::CostDims { .. })
        ));
        assert!(matches!(
            TransportInstance::joint(rho_z(0.0), rho_z(0.0), cost_z(1.0).unwrap(), 0.5),
            Err(TransportError::InvalidExponent(_))
        ));
        assert!(matches!(
            TransportInstance::new(
                rho_z(0.0),
                rho_z(0.0),
                CostModel::abs_power(ObservableSet::pauli_triple(), 2.0),
                2.0,
                Mode::Joint
            ),
            Err(TransportError::ModeMismatch(_))
        ));
    }

    #[test]
    fn z_potentials_from_commuting_case() {
        for p in [1.0, 2.0, 3.0] {
            let s = 2f64.powf(p);
            let x = HermitianMatrix::from_diagonal(&[s, 0.0]);
            let pots = DualPotentials::single(x.clone(), -&x).unwrap();
            let cz = cost_z(p).unwrap();
            assert!(pots.is_feasible(&cz, 1e-12).unwrap());
            let (a, b) = (0.6, -0.2);
            assert!((pots.objective(&rho_z(a), &rho_z(b)) - 2f64.powf(p - 1.0) * (a - b)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_potentials_are_feasible() {
        let pots = DualPotentials::zeros(2, 1);
        assert!(pots.is_feasible(&cost_symm(2.0).unwrap(), 1e-12).unwrap());
        assert_eq!(pots.objective(&rho_z(0.1), &rho_z(0.2)), 0.0);
    }

    #[test]
    fn z_transport_commuting_value() {
        let inst = TransportInstance::joint(rho_z(0.3), rho_z(-0.1), cost_z(2.0).unwrap(), 2.0).unwrap();
        let sol = wasserstein_distance(&inst, &SolverOptions::default()).unwrap();
        assert!((sol.value - 0.8).abs() < 1e-7, "{}", sol.value);
        assert!(sol.certificate.passed);
        assert!(sol.coupling.check(1e-7).unwrap().valid);
        assert!(sol.min_slack >= -1e-8);
        assert!(sol.dual_attained);
    }

    #[test]
    fn symmetric_gap_instance() {
        for p in [1.0, 2.0] {
            let inst = TransportInstance::joint(rho_z(0.5), rho_z(-0.5), cost_symm(p).unwrap(), p).unwrap();
            let sol = wasserstein_distance(&inst, &SolverOptions::default()).unwrap();
            assert!((sol.value - 2f64.powf(p)).abs() < 1e-7);
            assert!((sol.distance - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn z_eigenstate_self_distance_vanishes() {
        let inst = TransportInstance::joint(rho_z(1.0), rho_z(1.0), cost_z(2.0).unwrap(), 2.0).unwrap();
        let sol = wasserstein_distance(&inst, &SolverOptions::default()).unwrap();
        assert!(sol.value.abs() < 1e-7);
    }

    #[test]
    fn z_cost_between_x_and_z_states() {
        let bx = DensityMatrix::from_matrix(from_real_rows(2, 2, &[0.5, 0.25, 0.25, 0.5])).unwrap();
        let bz = rho_z(0.5);
        let sol = wasserstein_distance(&TransportInstance::joint(bx.clone(), bz.clone(), cost_z(2.0).unwrap(), 2.0).unwrap(), &SolverOptions::default()).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-6, "{}", sol.value);
    }

    #[test]
    fn gap_demo_values() {
        let g = gap_demo(2.0, &SolverOptions::default()).unwrap();
        assert!((g.nonlinear - 4.0).abs() < 1e-6);
        assert!((g.linearized - (4.0 - 2.0 * (3f64.sqrt() - 1.0))).abs() < 1e-6);
        assert!(g.difference() > 1.0);
    }

    #[test]
    fn divergence_spot_values() {
        let d = divergence_quadratic(
            &rho_z(0.5),
            &rho_z(-0.5),
            &CostModel::Operator(cost_symm(2.0).unwrap()),
            Mode::Joint,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((d.squared - 2.0 * 3f64.sqrt()).abs() < 1e-6);
        let d = divergence_quadratic(
            &rho_x(0.0),
            &rho_x(0.5),
            &CostModel::Operator(cost_z(2.0).unwrap()),
            Mode::Joint,
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((d.squared - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-6);
        let same = divergence_quadratic(
            &rho_x(0.3),
            &rho_x(0.3),
            &CostModel::Operator(cost_z(2.0).unwrap()),
            Mode::Joint,
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(same.squared, 0.0);
    }
}
