//! Dense semidefinite programming over complex Hermitian matrices.
//!
//! Standard form, with the real inner product `⟨A, B⟩ = Re tr(A* B)`:
//!
//! ```text
//! primal:  minimize ⟨C, X⟩   subject to ⟨A_i, X⟩ = b_i,  X ⪰ 0
//! dual:    maximize bᵀy      subject to C − Σ y_i A_i = S,  S ⪰ 0
//! ```
//!
//! The solver is an infeasible-start primal-dual path-following method with
//! Nesterov–Todd scaling and Mehrotra predictor-corrector steps. The
//! Hermitian cone is handled directly; there is no real-symmetric embedding.
//! Each iteration factors the `m × m` Schur complement
//! `M_ij = ⟨A_i, W A_j W⟩` densely, where `W` is the NT scaling point.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::{
    eigenvalues, frobenius_inner, max_abs_entry, norm_inf, ComplexMatrix, HermitianMatrix, LinalgError, C64,
};

/// Largest supported variable dimension.
pub const MAX_DIM: usize = 256;
/// Rank tolerance for dependent constraint rows.
pub const RANK_TOL: f64 = 1e-10;
const RECENTER_STEP: f64 = 0.1;
/// An accepted iterate may exceed weak duality by at most this relative amount.
const WEAK_DUALITY_SLACK: f64 = 1e-10;
/// Extra iterations spent trying to restore weak duality after convergence.
const POLISH_ITERS: usize = 5;
const STEP_FRACTION: f64 = 0.98;
const MU_FLOOR: f64 = 1e-12;
const INFEASIBILITY_MU_RATIO: f64 = 0.1;
const MAX_SCHUR_CONDITION: f64 = 1e14;
const DIVERGENCE_BOUND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("constraint {index} has dimension {found}, expected {expected}")]
    ConstraintDimension { index: usize, expected: usize, found: usize },
    #[error("variable dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    TooLarge(usize),
    #[error("constraint {index} is a linear combination of earlier rows with a different right-hand side (mismatch {mismatch:e})")]
    Inconsistent { index: usize, mismatch: f64 },
    #[error("right-hand side {index} is not finite")]
    NonFiniteRhs { index: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, SdpError>;

/// One equality constraint `⟨matrix, X⟩ = rhs`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub matrix: HermitianMatrix,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    objective: HermitianMatrix,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new(objective: HermitianMatrix, constraints: Vec<Constraint>) -> Result<Self> {
        let n = objective.dim();
        if n > MAX_DIM {
            return Err(SdpError::TooLarge(n));
        }
        for (index, c) in constraints.iter().enumerate() {
            if c.matrix.dim() != n {
                return Err(SdpError::ConstraintDimension { index, expected: n, found: c.matrix.dim() });
            }
            if !c.rhs.is_finite() {
                return Err(SdpError::NonFiniteRhs { index });
            }
        }
        Ok(Self { objective, constraints })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn objective(&self) -> &HermitianMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Same constraints, objective multiplied by `s`.
    pub fn with_scaled_objective(&self, s: f64) -> Self {
        Self { objective: self.objective.scaled(s), constraints: self.constraints.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Record a per-iteration trace in [`SdpSolution::trace`].
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol_gap: 1e-8, tol_feas: 1e-8, max_iter: 200, verbose: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Infeasible,
    Numerical,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Numerical => "numerical",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mu: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter {:3}  mu {:.3e}  rp {:.3e}  rd {:.3e}  pobj {:.12e}  dobj {:.12e}  ap {:.3}  ad {:.3}",
            self.iteration,
            self.mu,
            self.primal_residual,
            self.dual_residual,
            self.primal_obj,
            self.dual_obj,
            self.step_primal,
            self.step_dual
        )
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: HermitianMatrix,
    /// One multiplier per constraint of the original problem; rows removed by
    /// [`preprocess`] get zero.
    pub y: Vec<f64>,
    pub s: HermitianMatrix,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Whether any Newton system had an equilibrated condition number above
    /// [`MAX_SCHUR_CONDITION`] or needed the pseudo-inverse fallback.
    pub ill_conditioned: bool,
    pub trace: Vec<IterationRecord>,
}

impl SdpSolution {
    fn failed(n: usize, m: usize, status: SolveStatus) -> Self {
        Self {
            x: HermitianMatrix::zeros(n),
            y: vec![0.0; m],
            s: HermitianMatrix::zeros(n),
            primal_obj: f64::NAN,
            dual_obj: f64::NAN,
            gap: f64::NAN,
            status,
            iterations: 0,
            ill_conditioned: false,
            trace: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessReport {
    pub removed: Vec<usize>,
    pub rank: usize,
}

fn real_coords(m: &ComplexMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Removes linearly dependent constraints by Gram–Schmidt orthogonalization
/// (two passes) of the constraint matrices in the real inner product.
pub fn preprocess(problem: &SdpProblem) -> Result<(SdpProblem, PreprocessReport)> {
    let mut basis: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for (index, c) in problem.constraints.iter().enumerate() {
        let mut v = real_coords(c.matrix.matrix());
        let mut rhs = c.rhs;
        let norm0 = dot(&v, &v).sqrt();
        for _ in 0..2 {
            for (q, qb) in &basis {
                let proj = dot(&v, q);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
                rhs -= proj * qb;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= RANK_TOL * norm0.max(1.0) {
            if rhs.abs() > 1e-8 * (1.0 + c.rhs.abs()) {
                return Err(SdpError::Inconsistent { index, mismatch: rhs });
            }
            removed.push(index);
        } else {
            v.iter_mut().for_each(|a| *a /= norm);
            basis.push((v, rhs / norm));
            kept.push(c.clone());
        }
    }
    let rank = kept.len();
    Ok((
        SdpProblem { objective: problem.objective.clone(), constraints: kept },
        PreprocessReport { removed, rank },
    ))
}

/// Per-solve state; all buffers belong to one problem.
struct Workspace<'a> {
    c: &'a ComplexMatrix,
    a: Vec<&'a ComplexMatrix>,
    b: DVector<f64>,
    n: usize,
}

impl Workspace<'_> {
    fn apply(&self, x: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(self.a.len(), self.a.iter().map(|ai| frobenius_inner(ai, x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        for (ai, &yi) in self.a.iter().zip(y.iter()) {
            out += ai.scale(yi);
        }
        out
    }
}

fn hermitize(m: ComplexMatrix) -> ComplexMatrix {
    (&m + m.adjoint()).scale(0.5)
}

fn lower_inverse(l: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = l.nrows();
    l.solve_lower_triangular(&ComplexMatrix::identity(n, n))
}

/// Largest `α ≤ 1 / fraction` keeping `L L* + α Δ` positive semidefinite,
/// with `L⁻¹` given.
fn max_step(l_inv: &ComplexMatrix, delta: &ComplexMatrix) -> Result<f64> {
    let scaled = l_inv * delta * l_inv.adjoint();
    let min = eigenvalues(&scaled)?.first().copied().unwrap_or(0.0);
    Ok(if min < 0.0 { -1.0 / min } else { f64::INFINITY })
}

struct Direction {
    dx: ComplexMatrix,
    dy: DVector<f64>,
    ds: ComplexMatrix,
}

/// Nesterov–Todd scaling `W = G G*` with `G⁻¹ X G⁻* = G* S G = diag(λ)`.
struct Scaling {
    g: ComplexMatrix,
    g_inv: ComplexMatrix,
    w: ComplexMatrix,
    lambda: Vec<f64>,
}

fn nt_scaling(x: &ComplexMatrix, s: &ComplexMatrix) -> Option<Scaling> {
    let lx = nalgebra::Cholesky::new(x.clone())?.l();
    let ls = nalgebra::Cholesky::new(s.clone())?.l();
    let svd = (ls.adjoint() * &lx).svd(true, true);
    let q = svd.v_t?.adjoint();
    let lambda: Vec<f64> = svd.singular_values.iter().copied().collect();
    if lambda.iter().any(|&l| !l.is_finite() || l <= 0.0) {
        return None;
    }
    let n = x.nrows();
    let g = &lx * &q * ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(lambda[i].powf(-0.5), 0.0) } else { C64::new(0.0, 0.0) });
    let lx_inv = lower_inverse(&lx)?;
    let g_inv = ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(lambda[i].sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
        * q.adjoint()
        * lx_inv;
    let w = hermitize(&g * g.adjoint());
    Some(Scaling { g, g_inv, w, lambda })
}

/// Schur complement solve after symmetric diagonal equilibration, by
/// Cholesky with one refinement step. If Cholesky breaks down the system is
/// solved by a spectral pseudo-inverse truncated at [`MAX_SCHUR_CONDITION`].
struct SchurSolver {
    equil: DMatrix<f64>,
    scale: DVector<f64>,
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    eig: Option<nalgebra::SymmetricEigen<f64, nalgebra::Dyn>>,
    pseudo_inverse: bool,
}

impl SchurSolver {
    fn new(schur: DMatrix<f64>) -> Option<Self> {
        let m = schur.nrows();
        if schur.iter().any(|v| !v.is_finite()) || (0..m).any(|i| schur[(i, i)] <= 0.0) {
            return None;
        }
        let scale = DVector::from_iterator(m, (0..m).map(|i| schur[(i, i)].sqrt().recip()));
        let equil = DMatrix::from_fn(m, m, |i, j| schur[(i, j)] * scale[i] * scale[j]);
        let eig = equil.clone().symmetric_eigen();
        let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
        let ill = m > 0 && (lo <= 0.0 || hi / lo > MAX_SCHUR_CONDITION);
        match nalgebra::Cholesky::new(equil.clone()) {
            Some(chol) => Some(Self { equil, scale, chol: Some(chol), eig: None, pseudo_inverse: ill }),
            None => Some(Self { equil, scale, chol: None, eig: Some(eig), pseudo_inverse: true }),
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let z = rhs.component_mul(&self.scale);
        let mut sol = self.solve_equilibrated(&z);
        // one step of iterative refinement
        let residual = &z - &self.equil * &sol;
        sol += self.solve_equilibrated(&residual);
        sol.component_mul(&self.scale)
    }

    fn solve_equilibrated(&self, z: &DVector<f64>) -> DVector<f64> {
        match (&self.chol, &self.eig) {
            (Some(c), _) => c.solve(z),
            (None, Some(e)) => {
                let top = e.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let coeffs = e.eigenvectors.transpose() * z;
                let inv = DVector::from_iterator(
                    coeffs.len(),
                    coeffs.iter().zip(e.eigenvalues.iter()).map(|(c, &l)| if l > top / MAX_SCHUR_CONDITION { c / l } else { 0.0 }),
                );
                &e.eigenvectors * inv
            }
            (None, None) => unreachable!(),
        }
    }
}

/// Solves `p` from the standard identity start `X = S = τ I`, `y = 0`,
/// `τ = max(1, ‖C‖_∞)`.
pub fn solve(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let n = problem.dim();
    let m_full = problem.num_constraints();
    let (reduced, report) = match preprocess(problem) {
        Ok(r) => r,
        Err(SdpError::Inconsistent { .. }) => return Ok(SdpSolution::failed(n, m_full, SolveStatus::Infeasible)),
        Err(e) => return Err(e),
    };
    let ws = Workspace {
        c: problem.objective.matrix(),
        a: reduced.constraints.iter().map(|c| c.matrix.matrix()).collect(),
        b: DVector::from_iterator(reduced.num_constraints(), reduced.constraints.iter().map(|c| c.rhs)),
        n,
    };
    let m = ws.a.len();
    // Gram matrix of the (independent) constraints, for projecting primal
    // directions back onto A(ΔX) = r_p
    let gram = DMatrix::from_fn(m, m, |i, j| frobenius_inner(ws.a[i], ws.a[j]));
    let Some(gram_chol) = nalgebra::Cholesky::new(gram) else {
        return Ok(SdpSolution::failed(n, m_full, SolveStatus::Numerical));
    };

    let tau = norm_inf(ws.c).max(1.0);
    let mut x = ComplexMatrix::identity(n, n).scale(tau);
    let mut s = ComplexMatrix::identity(n, n).scale(tau);
    let mut y = DVector::<f64>::zeros(m);
    let mut trace = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut last_steps = (0.0, 0.0);
    let mut ill_conditioned = false;
    let mut candidate: Option<(ComplexMatrix, DVector<f64>, ComplexMatrix, usize)> = None;

    for iter in 0..=opts.max_iter {
        iterations = iter;
        let rp = &ws.b - ws.apply(&x);
        let rd = hermitize(ws.c - &s - ws.adjoint(&y));
        let pobj = frobenius_inner(ws.c, &x);
        let dobj = ws.b.dot(&y);
        let mu = frobenius_inner(&x, &s) / n as f64;
        let rp_norm = rp.amax();
        let rd_norm = norm_inf(&rd);
        if opts.verbose {
            trace.push(IterationRecord {
                iteration: iter,
                mu,
                primal_residual: rp_norm,
                dual_residual: rd_norm,
                primal_obj: pobj,
                dual_obj: dobj,
                step_primal: last_steps.0,
                step_dual: last_steps.1,
            });
        }
        if rp_norm <= opts.tol_feas
            && rd_norm <= opts.tol_feas
            && (pobj - dobj).abs() <= opts.tol_gap * pobj.abs().max(1.0)
        {
            if dobj - pobj <= WEAK_DUALITY_SLACK * pobj.abs().max(1.0) {
                status = SolveStatus::Optimal;
                candidate = None;
                break;
            }
            // converged but slightly past weak duality: keep it and polish
            if candidate.is_none() {
                candidate = Some((x.clone(), y.clone(), s.clone(), iter));
            }
        }
        if iter == opts.max_iter || candidate.as_ref().is_some_and(|c| iter >= c.3 + POLISH_ITERS) {
            break;
        }
        if x.trace().re > DIVERGENCE_BOUND * tau || s.trace().re > DIVERGENCE_BOUND * tau {
            status = SolveStatus::Infeasible;
            break;
        }

        let Some(sc) = nt_scaling(&x, &s) else {
            status = SolveStatus::Numerical;
            break;
        };
        // Schur complement M_ij = ⟨A_i, W A_j W⟩
        let waw: Vec<ComplexMatrix> = ws.a.iter().map(|aj| hermitize(&sc.w * *aj * &sc.w)).collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in 0..=i {
                let v = frobenius_inner(ws.a[i], &waw[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let Some(schur_solver) = SchurSolver::new(schur) else {
            status = SolveStatus::Numerical;
            break;
        };
        ill_conditioned |= schur_solver.pseudo_inverse;
        let w_rd_w = &sc.w * &rd * &sc.w;
        let a_w_rd_w = ws.apply(&w_rd_w);

        // Solves with scaled complementarity right-hand side `target`, where
        // Λ∘(ΔX̃ + ΔS̃) = target and Λ_ij = (λ_i + λ_j)/2.
        let direction = |target: &ComplexMatrix| -> Direction {
            let t = ComplexMatrix::from_fn(n, n, |i, j| target[(i, j)] / ((sc.lambda[i] + sc.lambda[j]) / 2.0));
            let gtg = hermitize(&sc.g * t * sc.g.adjoint());
            let rhs = &rp - ws.apply(&gtg) + &a_w_rd_w;
            let mut dy = schur_solver.solve(&rhs);
            let mut ds = hermitize(&rd - ws.adjoint(&dy));
            let mut dx = hermitize(gtg - &sc.w * &ds * &sc.w);
            // one refinement sweep through the same Newton system, then an
            // exact projection onto the primal residual equation
            let defect = &rp - ws.apply(&dx);
            let ddy = schur_solver.solve(&defect);
            let adj = ws.adjoint(&ddy);
            dx += hermitize(&sc.w * &adj * &sc.w);
            ds -= adj;
            dy += ddy;
            let defect = &rp - ws.apply(&dx);
            dx += ws.adjoint(&gram_chol.solve(&defect));
            Direction { dx, dy, ds }
        };

        let v2 = ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(sc.lambda[i] * sc.lambda[i], 0.0) } else { C64::new(0.0, 0.0) });
        let Some(lx_inv) = nalgebra::Cholesky::new(x.clone()).and_then(|c| lower_inverse(&c.l())) else {
            status = SolveStatus::Numerical;
            break;
        };
        let Some(ls_inv) = nalgebra::Cholesky::new(s.clone()).and_then(|c| lower_inverse(&c.l())) else {
            status = SolveStatus::Numerical;
            break;
        };

        // after a blocked step, take a pure centering step to regain centrality
        if last_steps.0.min(last_steps.1) < RECENTER_STEP && iterations > 0 {
            let target = ComplexMatrix::identity(n, n).scale(mu.max(MU_FLOOR)) - &v2;
            let dir = direction(&target);
            let ap = (STEP_FRACTION * max_step(&lx_inv, &dir.dx)?).min(1.0);
            let ad = (STEP_FRACTION * max_step(&ls_inv, &dir.ds)?).min(1.0);
            if !(ap.is_finite() && ad.is_finite()) || ap.max(ad) < 1e-12 {
                status = SolveStatus::Numerical;
                break;
            }
            x = hermitize(&x + dir.dx.scale(ap));
            y += dir.dy.scale(ad);
            s = hermitize(&s + dir.ds.scale(ad));
            last_steps = (1.0, 1.0);
            continue;
        }

        // predictor
        let pred = direction(&(-&v2));
        let ap = max_step(&lx_inv, &pred.dx)?.min(1.0);
        let ad = max_step(&ls_inv, &pred.ds)?.min(1.0);
        let mu_aff = frobenius_inner(&(&x + pred.dx.scale(ap)), &(&s + pred.ds.scale(ad))) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector
        let dxs = &sc.g_inv * &pred.dx * sc.g_inv.adjoint();
        let dss = sc.g.adjoint() * &pred.ds * &sc.g;
        let second_order = hermitize(dxs * dss);
        // keep complementarity from outrunning primal feasibility
        let target_mu = (sigma * mu).max(MU_FLOOR).max(INFEASIBILITY_MU_RATIO * rp_norm).min(mu);
        let target = ComplexMatrix::identity(n, n).scale(target_mu) - &v2 - second_order;
        let dir = direction(&target);

        let ap = (STEP_FRACTION * max_step(&lx_inv, &dir.dx)?).min(1.0);
        let ad = (STEP_FRACTION * max_step(&ls_inv, &dir.ds)?).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || ap.max(ad) < 1e-12 {
            status = SolveStatus::Numerical;
            break;
        }
        x = hermitize(&x + dir.dx.scale(ap));
        y += dir.dy.scale(ad);
        s = hermitize(&s + dir.ds.scale(ad));
        last_steps = (ap, ad);
    }

    if let Some((cx, cy, cs, citer)) = candidate {
        (x, y, s, iterations) = (cx, cy, cs, citer);
        status = SolveStatus::Optimal;
    }

    // expand multipliers back to the original constraint list
    let mut y_full = vec![0.0; m_full];
    let kept: Vec<usize> = (0..m_full).filter(|i| !report.removed.contains(i)).collect();
    for (k, &i) in kept.iter().enumerate() {
        y_full[i] = y[k];
    }
    let primal_obj = frobenius_inner(ws.c, &x);
    let dual_obj = ws.b.dot(&y);
    Ok(SdpSolution {
        x: HermitianMatrix::from_raw(x),
        y: y_full,
        s: HermitianMatrix::from_raw(s),
        primal_obj,
        dual_obj,
        gap: (primal_obj - dual_obj).abs(),
        status,
        iterations,
        ill_conditioned,
        trace,
    })
}

/// Residuals recomputed from `(X, y, S)` alone.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub primal_residuals: Vec<f64>,
    /// `‖C − S − Σ y_i A_i‖_∞`.
    pub dual_residual: f64,
    pub min_eig_x: f64,
    pub min_eig_s: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub passed: bool,
}

impl Certificate {
    pub fn max_primal_residual(&self) -> f64 {
        self.primal_residuals.iter().fold(0.0, |a, &r| a.max(r.abs()))
    }
}

pub const CERT_FEAS_TOL: f64 = 1e-8;
pub const CERT_PSD_TOL: f64 = 1e-9;
pub const CERT_GAP_TOL: f64 = 1e-7;

/// Independently verifies a solution against the problem it claims to solve.
pub fn certify(sol: &SdpSolution, problem: &SdpProblem) -> Result<Certificate> {
    let primal_residuals: Vec<f64> = problem.constraints.iter().map(|c| c.matrix.inner(&sol.x) - c.rhs).collect();
    let mut dual = problem.objective.matrix() - sol.s.matrix();
    for (c, &yi) in problem.constraints.iter().zip(&sol.y) {
        dual -= c.matrix.matrix().scale(yi);
    }
    let dual_residual = norm_inf(&dual);
    let min_eig_x = sol.x.min_eigenvalue()?;
    let min_eig_s = sol.s.min_eigenvalue()?;
    let primal_obj = problem.objective.inner(&sol.x);
    let dual_obj: f64 = problem.constraints.iter().zip(&sol.y).map(|(c, y)| c.rhs * y).sum();
    let gap = (primal_obj - dual_obj).abs();
    let max_primal = primal_residuals.iter().fold(0.0f64, |a, &r| a.max(r.abs()));
    let passed = sol.status == SolveStatus::Optimal
        && max_primal <= CERT_FEAS_TOL
        && dual_residual <= CERT_FEAS_TOL
        && min_eig_x >= -CERT_PSD_TOL
        && min_eig_s >= -CERT_PSD_TOL
        && gap <= CERT_GAP_TOL * primal_obj.abs().max(1.0)
        && max_abs_entry(sol.x.matrix()).is_finite();
    Ok(Certificate { primal_residuals, dual_residual, min_eig_x, min_eig_s, primal_obj, dual_obj, gap, passed })
}
