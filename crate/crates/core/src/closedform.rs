//! Closed-form qubit distances, divergences, couplings and potentials.
//!
//! States are written in the Bloch parametrization `ρ(r) = ½(I + r·σ)`.
//! Scalar arguments refer to one Bloch coordinate: `ρ(α) = ½(I + ασ_z)` for
//! the commuting families and `ρ(α) = ½(I + ασ_x)` for the xy families.
//! Distances are returned as `D^p`, the optimal transport cost. In every
//! pair `(α, β)` the first state is the source `ρ` and the second the
//! target `ω`.

use thiserror::Error;

use crate::linalg::{c, swap_transpose, DensityMatrix, HermitianMatrix, LinalgError};
use crate::transport::{Coupling, DualPotentials, TransportError, COUPLING_TOL};

/// Slack on `‖r‖ ≤ 1`.
pub const BLOCH_TOL: f64 = 1e-12;
/// Cross-product tolerance for collinear Bloch vectors.
pub const COLLINEAR_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ClosedFormError {
    #[error("Bloch vector {0:?} lies outside the unit ball")]
    OutsideBall([f64; 3]),
    #[error("parameter {0} outside [-1, 1]")]
    OutOfRange(f64),
    #[error("Bloch vectors are not collinear (cross product norm {0:e})")]
    NotCollinear(f64),
    #[error("potentials are not available for pure states")]
    PureState,
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ClosedFormError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(r: [f64; 3]) -> Result<Self> {
        if r.iter().any(|v| !v.is_finite()) || norm(&r) > 1.0 + BLOCH_TOL {
            return Err(ClosedFormError::OutsideBall(r));
        }
        Ok(Self(r))
    }

    pub fn origin() -> Self {
        Self([0.0; 3])
    }

    pub fn x(a: f64) -> Result<Self> {
        Self::new([a, 0.0, 0.0])
    }

    pub fn z(a: f64) -> Result<Self> {
        Self::new([0.0, 0.0, a])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn cross(&self, other: &Self) -> [f64; 3] {
        let (a, b) = (self.0, other.0);
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    pub fn distance(&self, other: &Self) -> f64 {
        norm(&[self.0[0] - other.0[0], self.0[1] - other.0[1], self.0[2] - other.0[2]])
    }

    pub fn is_collinear(&self, other: &Self) -> bool {
        norm(&self.cross(other)) <= COLLINEAR_TOL
    }
}

fn norm(r: &[f64; 3]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_unit(a: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&a) {
        return Err(ClosedFormError::OutOfRange(a));
    }
    Ok(())
}

fn sqrt0(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// `½(I + r·σ)`.
pub fn state_from_bloch(r: &BlochVector) -> DensityMatrix {
    let [x, y, z] = r.0;
    let m = crate::linalg::from_row_major(
        2,
        2,
        &[c((1.0 + z) / 2.0, 0.0), c(x / 2.0, -y / 2.0), c(x / 2.0, y / 2.0), c((1.0 - z) / 2.0, 0.0)],
    );
    DensityMatrix::from_matrix(m).expect("Bloch ball states are density matrices")
}

/// `½(I + ασ_z)`.
pub fn rho_z(alpha: f64) -> Result<DensityMatrix> {
    Ok(state_from_bloch(&BlochVector::z(alpha)?))
}

/// `½(I + ασ_x)`.
pub fn rho_x(alpha: f64) -> Result<DensityMatrix> {
    Ok(state_from_bloch(&BlochVector::x(alpha)?))
}

/// `D^p_symm` between `ρ(α)` and `ρ(β)` on the z axis:
/// `2^p(1 + ½|α−β| − √((1+min)(1−max)))`.
pub fn d_symm_commuting(alpha: f64, beta: f64, p: f64) -> f64 {
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    2f64.powf(p) * (1.0 + 0.5 * (alpha - beta).abs() - sqrt0((1.0 + lo) * (1.0 - hi)))
}

/// `D^p_symm` between collinear Bloch vectors.
pub fn d_symm_general(r1: &BlochVector, r2: &BlochVector, p: f64) -> Result<f64> {
    let cross = norm(&r1.cross(r2));
    if cross > COLLINEAR_TOL {
        return Err(ClosedFormError::NotCollinear(cross));
    }
    let m = r1.norm().max(r2.norm());
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok(2f64.powf(p) * (1.0 + 0.5 * r1.distance(r2) - sqrt0((1.0 + r1.dot(r2) / m) * (1.0 - m))))
}

/// Optimal coupling of `ρ(α)` and `ρ(β)` for the symmetric cost.
pub fn coupling_symm_commuting(alpha: f64, beta: f64) -> Result<Coupling> {
    check_unit(alpha)?;
    check_unit(beta)?;
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let corner = sqrt0((1.0 + lo) * (1.0 - hi)) / 2.0;
    #[rustfmt::skip]
    let m = HermitianMatrix::from_real_rows(4, &[
        (1.0 + lo) / 2.0, 0.0, 0.0, corner,
        0.0, (beta - alpha).max(0.0) / 2.0, 0.0, 0.0,
        0.0, 0.0, (alpha - beta).max(0.0) / 2.0, 0.0,
        corner, 0.0, 0.0, (1.0 - hi) / 2.0,
    ])?;
    Ok(Coupling::new(m, rho_z(alpha)?, rho_z(beta)?, 1, COUPLING_TOL)?)
}

/// The two candidate potential pairs for the symmetric cost, in the order
/// `(X₁, Y₁)`, `(X₂, Y₂)`.
pub fn potentials_symm_commuting(alpha: f64, beta: f64, p: f64) -> Result<[DualPotentials; 2]> {
    if !(alpha.abs() < 1.0 && beta.abs() < 1.0) {
        return Err(ClosedFormError::PureState);
    }
    let s = 2f64.powf(p);
    let x1 = HermitianMatrix::from_diagonal(&[-s * ((1.0 - beta) / (1.0 + alpha)).sqrt() - s, 0.0]);
    let y1 = HermitianMatrix::from_diagonal(&[2.0 * s, s - s * ((1.0 + alpha) / (1.0 - beta)).sqrt()]);
    let x2 = HermitianMatrix::from_diagonal(&[2.0 * s, s - s * ((1.0 + beta) / (1.0 - alpha)).sqrt()]);
    let y2 = HermitianMatrix::from_diagonal(&[-s * ((1.0 - alpha) / (1.0 + beta)).sqrt() - s, 0.0]);
    Ok([DualPotentials::single(x1, y1)?, DualPotentials::single(x2, y2)?])
}

/// `d²_symm` between collinear Bloch vectors.
pub fn divergence_symm_commuting(r1: &BlochVector, r2: &BlochVector) -> Result<f64> {
    let cross = norm(&r1.cross(r2));
    if cross > COLLINEAR_TOL {
        return Err(ClosedFormError::NotCollinear(cross));
    }
    let (a, b) = (r1.norm(), r2.norm());
    let m = a.max(b);
    let joint = if m == 0.0 { 1.0 } else { sqrt0((1.0 + r1.dot(r2) / m) * (1.0 - m)) };
    Ok(2.0 * (r1.distance(r2) + sqrt0(1.0 - a * a) + sqrt0(1.0 - b * b) - 2.0 * joint))
}

/// `d²_symm` between `ρ(α)` and `ρ(β)` on a common axis.
pub fn divergence_symm_scalar(alpha: f64, beta: f64) -> f64 {
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    2.0 * ((alpha - beta).abs() + sqrt0(1.0 - alpha * alpha) + sqrt0(1.0 - beta * beta)
        - 2.0 * sqrt0((1.0 + lo) * (1.0 - hi)))
}

/// `D^p_z` between `ρ(α)` and `ρ(β)` on the x axis:
/// `2^{p−1}(1 − √(1 − max(α², β²)))`.
pub fn d_z_xy(alpha: f64, beta: f64, p: f64) -> f64 {
    2f64.powf(p - 1.0) * (1.0 - sqrt0(1.0 - (alpha * alpha).max(beta * beta)))
}

fn pi_plus(alpha: f64, beta: f64) -> Result<HermitianMatrix> {
    let s = sqrt0(1.0 - alpha * alpha);
    let (u, l) = ((1.0 + s) * beta / alpha, (1.0 - s) * beta / alpha);
    #[rustfmt::skip]
    let rows = [
        1.0 + s, alpha, beta, u,
        alpha, 1.0 - s, l, beta,
        beta, l, 1.0 - s, alpha,
        u, beta, alpha, 1.0 + s,
    ];
    Ok(HermitianMatrix::from_real_rows(4, &rows.map(|v| v / 4.0))?)
}

fn pi_minus(alpha: f64, beta: f64) -> Result<HermitianMatrix> {
    let s = sqrt0(1.0 - beta * beta);
    let (u, l) = ((1.0 + s) * alpha / beta, (1.0 - s) * alpha / beta);
    #[rustfmt::skip]
    let rows = [
        1.0 + s, alpha, beta, u,
        alpha, 1.0 - s, l, beta,
        beta, l, 1.0 - s, alpha,
        u, beta, alpha, 1.0 + s,
    ];
    Ok(HermitianMatrix::from_real_rows(4, &rows.map(|v| v / 4.0))?)
}

/// `Π₊(β, α)` mapped by the swap transposition.
pub fn pi_minus_by_swap(alpha: f64, beta: f64) -> Result<HermitianMatrix> {
    Ok(swap_transpose(&pi_plus(beta, alpha)?, 2)?)
}

/// Optimal coupling of `ρ(α)` and `ρ(β)` on the x axis for the z cost.
/// Ties `|α| = |β| > 0` use `Π₊`.
pub fn coupling_z_xy(alpha: f64, beta: f64) -> Result<Coupling> {
    check_unit(alpha)?;
    check_unit(beta)?;
    let m = if alpha == 0.0 && beta == 0.0 {
        HermitianMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5])
    } else if alpha.abs() >= beta.abs() {
        pi_plus(alpha, beta)?
    } else {
        pi_minus(alpha, beta)?
    };
    Ok(Coupling::new(m, rho_x(alpha)?, rho_x(beta)?, 1, COUPLING_TOL)?)
}

/// `X_±` with `M = max(|α|, |β|)`; returns `(X₊, Y=0)`, `(X₋, Y=0)`,
/// `(X=0, Y=X₊)`, `(X=0, Y=X₋)`.
pub fn potentials_z_xy(alpha: f64, beta: f64, p: f64) -> Result<[DualPotentials; 4]> {
    let m = alpha.abs().max(beta.abs());
    if m >= 1.0 {
        return Err(ClosedFormError::PureState);
    }
    let s = 2f64.powf(p - 1.0);
    let root = (1.0 - m * m).sqrt();
    let diag = s * (1.0 - 1.0 / root);
    let off = s * (m * m / (1.0 - m * m)).sqrt();
    let xp = HermitianMatrix::from_real_rows(2, &[diag, off, off, diag])?;
    let xm = HermitianMatrix::from_real_rows(2, &[diag, -off, -off, diag])?;
    let zero = HermitianMatrix::zeros(2);
    Ok([
        DualPotentials::single(xp.clone(), zero.clone())?,
        DualPotentials::single(xm.clone(), zero.clone())?,
        DualPotentials::single(zero.clone(), xp)?,
        DualPotentials::single(zero, xm)?,
    ])
}

/// `d²_z` between xy-plane states with Bloch radii `r1`, `r2`:
/// `√(1 − min²) − √(1 − max²)`.
pub fn divergence_z_xy(r1: f64, r2: f64) -> f64 {
    let (lo, hi) = (r1.min(r2), r1.max(r2));
    sqrt0(1.0 - lo * lo) - sqrt0(1.0 - hi * hi)
}

/// `D^p_z` between `ρ(α)` and `ρ(β)` on the z axis: `2^{p−1}|α − β|`.
pub fn d_z_commuting(alpha: f64, beta: f64, p: f64) -> f64 {
    2f64.powf(p - 1.0) * (alpha - beta).abs()
}

pub fn coupling_z_commuting(alpha: f64, beta: f64) -> Result<Coupling> {
    check_unit(alpha)?;
    check_unit(beta)?;
    let (lo, hi) = (alpha.min(beta), alpha.max(beta));
    let m = HermitianMatrix::from_diagonal(&[
        (1.0 + lo) / 2.0,
        (beta - alpha).max(0.0) / 2.0,
        (alpha - beta).max(0.0) / 2.0,
        (1.0 - hi) / 2.0,
    ]);
    Ok(Coupling::new(m, rho_z(alpha)?, rho_z(beta)?, 1, COUPLING_TOL)?)
}

/// `(X, Y) = (diag(2^p, 0), −diag(2^p, 0))` and the same pair with the roles
/// of `X` and `Y` exchanged.
pub fn potentials_z_commuting(p: f64) -> Result<[DualPotentials; 2]> {
    let x = HermitianMatrix::from_diagonal(&[2f64.powf(p), 0.0]);
    let y = -&x;
    Ok([DualPotentials::single(x.clone(), y.clone())?, DualPotentials::single(y, x)?])
}

/// `d²(ρ,σ) + d²(σ,ω) − d²(ρ,ω)` for the symmetric cost on a common axis.
pub fn triangle_margin_symm(alpha: f64, beta: f64, gamma: f64) -> f64 {
    divergence_symm_scalar(alpha, beta) + divergence_symm_scalar(beta, gamma) - divergence_symm_scalar(alpha, gamma)
}

/// `d²(ρ,σ) + d²(σ,ω) − d²(ρ,ω)` for the z cost on xy-plane states.
pub fn triangle_margin_z(r_rho: f64, r_sigma: f64, r_omega: f64) -> f64 {
    divergence_z_xy(r_rho, r_sigma) + divergence_z_xy(r_sigma, r_omega) - divergence_z_xy(r_rho, r_omega)
}

/// Optimal cost between two discrete measures on the real line for a
/// convex cost of `x − y`, through the monotone (quantile) coupling.
pub fn classical_ot_1d(source: &[(f64, f64)], target: &[(f64, f64)], cost: impl Fn(f64, f64) -> f64) -> f64 {
    let mut a: Vec<(f64, f64)> = source.iter().copied().filter(|&(_, w)| w > 0.0).collect();
    let mut b: Vec<(f64, f64)> = target.iter().copied().filter(|&(_, w)| w > 0.0).collect();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    b.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (mut i, mut j, mut total) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        let mass = a[i].1.min(b[j].1);
        total += mass * cost(a[i].0, b[j].0);
        a[i].1 -= mass;
        b[j].1 -= mass;
        if a[i].1 <= 1e-15 {
            i += 1;
        }
        if b[j].1 <= 1e-15 {
            j += 1;
        }
    }
    total
}

/// Classical transport between the σ_z outcome distributions of `ρ(α)` and
/// `ρ(β)` with cost `|x − y|^p`.
pub fn classical_z_commuting(alpha: f64, beta: f64, p: f64) -> f64 {
    let dist = |a: f64| [(1.0, (1.0 + a) / 2.0), (-1.0, (1.0 - a) / 2.0)];
    classical_ot_1d(&dist(alpha), &dist(beta), |x, y| (x - y).abs().powf(p))
}

/// Rotation about the z axis, `exp(iφσ_z/2)`.
pub fn z_rotation(phi: f64) -> crate::linalg::ComplexMatrix {
    let (co, si) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    crate::linalg::from_row_major(2, 2, &[c(co, si), c(0.0, 0.0), c(0.0, 0.0), c(co, -si)])
}

/// Rotates a pair of Bloch vectors about z (each by its own angle) so that
/// neither has a y component, keeping x ≥ 0. The angles are the ones to
/// pass to [`z_rotation`].
pub fn eliminate_y(r1: &BlochVector, r2: &BlochVector) -> (BlochVector, BlochVector, f64, f64) {
    let rot = |r: &BlochVector| {
        let [x, y, z] = r.0;
        let rad = x.hypot(y);
        (BlochVector([rad, 0.0, z]), y.atan2(x))
    };
    let (a, pa) = rot(r1);
    let (b, pb) = rot(r2);
    (a, b, pa, pb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{cost_symm, cost_z};
    use crate::linalg::pauli;
    use crate::transport::purification_coupling;

    const SQ3: f64 = 1.7320508075688772;

    #[test]
    fn bloch_states() {
        assert!(state_from_bloch(&BlochVector::origin()).max_abs_diff(&HermitianMatrix::identity(2).scaled(0.5)) == 0.0);
        let z = rho_z(0.4).unwrap();
        assert!(z.max_abs_diff(&HermitianMatrix::from_diagonal(&[0.7, 0.3])) < 1e-15);
        let x = rho_x(0.4).unwrap();
        assert!(x.max_abs_diff(&HermitianMatrix::from_real_rows(2, &[0.5, 0.2, 0.2, 0.5]).unwrap()) < 1e-15);
        assert!(matches!(BlochVector::new([0.8, 0.8, 0.0]), Err(ClosedFormError::OutsideBall(_))));
        assert!(BlochVector::new([1.0 + 1e-13, 0.0, 0.0]).is_ok());
        let y = state_from_bloch(&BlochVector::new([0.0, 0.6, 0.0]).unwrap());
        assert!((y.inner(&pauli(1)) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn symm_commuting_values() {
        for p in [1.0, 2.0, 3.0] {
            assert!((d_symm_commuting(0.5, -0.5, p) - 2f64.powf(p)).abs() < 1e-12);
            assert_eq!(d_symm_commuting(0.0, 0.0, p), 0.0);
            let a = 0.6;
            assert!((d_symm_commuting(a, a, p) - 2f64.powf(p) * (1.0 - (1.0 - a * a).sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn symm_general_values() {
        let o = BlochVector::origin();
        assert_eq!(d_symm_general(&o, &o, 2.0).unwrap(), 0.0);
        let (a, b) = (BlochVector::z(0.5).unwrap(), BlochVector::z(-0.5).unwrap());
        assert!((d_symm_general(&a, &b, 2.0).unwrap() - 4.0).abs() < 1e-12);
        let (a, b) = (BlochVector::x(0.5).unwrap(), BlochVector::x(-0.5).unwrap());
        assert!((d_symm_general(&a, &b, 2.0).unwrap() - 4.0).abs() < 1e-12);
        for (x, y) in [(0.3, -0.8), (-0.2, -0.6), (0.9, 0.1)] {
            let g = d_symm_general(&BlochVector::z(x).unwrap(), &BlochVector::z(y).unwrap(), 1.5).unwrap();
            assert!((g - d_symm_commuting(x, y, 1.5)).abs() < 1e-12);
        }
        let err = d_symm_general(&BlochVector::x(0.5).unwrap(), &BlochVector::z(0.5).unwrap(), 2.0);
        assert!(matches!(err, Err(ClosedFormError::NotCollinear(_))));
    }

    #[test]
    fn symm_coupling() {
        let pi = coupling_symm_commuting(0.0, 0.0).unwrap();
        let pur = purification_coupling(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(pi.matrix().max_abs_diff(pur.matrix()) < 1e-15);
        let pi = coupling_symm_commuting(0.5, -0.5).unwrap();
        #[rustfmt::skip]
        let want = HermitianMatrix::from_real_rows(4, &[
            0.25, 0.0, 0.0, 0.25,
            0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.5, 0.0,
            0.25, 0.0, 0.0, 0.25,
        ]).unwrap();
        assert!(pi.matrix().max_abs_diff(&want) < 1e-15);
        let pi = coupling_symm_commuting(0.3, -0.2).unwrap();
        assert!(pi.check(1e-12).unwrap().valid);
        let mut rng = crate::random::rng(3);
        use rand::Rng;
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
            let pi = coupling_symm_commuting(a, b).unwrap();
            for p in [1.0, 2.0] {
                assert!((pi.objective(&cost_symm(p).unwrap()).unwrap() - d_symm_commuting(a, b, p)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symm_potentials() {
        let [first, _] = potentials_symm_commuting(0.0, 0.0, 2.0).unwrap();
        assert_eq!(first.x[0], HermitianMatrix::from_diagonal(&[-8.0, 0.0]));
        assert_eq!(first.y[0], HermitianMatrix::from_diagonal(&[8.0, 0.0]));
        let mut rng = crate::random::rng(4);
        use rand::Rng;
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.gen_range(-0.99..0.99), rng.gen_range(-0.99..0.99));
            for p in [1.0, 2.0] {
                let cost = cost_symm(p).unwrap();
                let pots = potentials_symm_commuting(a, b, p).unwrap();
                let (rho, omega) = (rho_z(a).unwrap(), rho_z(b).unwrap());
                let mut best = f64::NEG_INFINITY;
                for pot in &pots {
                    assert!(pot.min_slack(&cost).unwrap() >= -1e-10);
                    best = best.max(pot.objective(&rho, &omega));
                }
                assert!((best - d_symm_commuting(a, b, p)).abs() < 1e-10, "{a} {b} {p}");
            }
        }
        assert!(matches!(potentials_symm_commuting(1.0, 0.0, 2.0), Err(ClosedFormError::PureState)));
    }

    #[test]
    fn symm_divergence() {
        let (a, b) = (BlochVector::z(0.5).unwrap(), BlochVector::z(-0.5).unwrap());
        assert!((divergence_symm_commuting(&a, &b).unwrap() - 2.0 * SQ3).abs() < 1e-12);
        assert!(divergence_symm_commuting(&a, &a).unwrap().abs() < 1e-12);
        assert!((divergence_symm_scalar(0.5, -0.5) - 2.0 * SQ3).abs() < 1e-12);
        let x = BlochVector::x(0.3).unwrap();
        assert!(divergence_symm_commuting(&a, &x).is_err());
    }

    #[test]
    fn z_xy_values() {
        assert_eq!(d_z_xy(0.0, 0.0, 2.0), 0.0);
        assert!((d_z_xy(0.5, 0.0, 2.0) - (2.0 - SQ3)).abs() < 1e-12);
        assert_eq!(d_z_xy(0.3, -0.7, 1.5), d_z_xy(-0.7, 0.3, 1.5));
    }

    #[test]
    fn z_xy_couplings() {
        let pi0 = coupling_z_xy(0.0, 0.0).unwrap();
        assert_eq!(pi0.matrix().hermitian(), &HermitianMatrix::from_diagonal(&[0.5, 0.0, 0.0, 0.5]));
        for (a, b) in [(0.5, 0.25), (0.25, 0.5), (-0.6, 0.6), (0.9, -0.3), (0.0, 0.7), (-0.95, 0.0)] {
            let pi = coupling_z_xy(a, b).unwrap();
            assert!(pi.check(1e-12).unwrap().valid, "{a} {b}");
            for p in [1.0, 2.0] {
                assert!((pi.objective(&cost_z(p).unwrap()).unwrap() - d_z_xy(a, b, p)).abs() < 1e-12);
            }
        }
        let pm = coupling_z_xy(0.2, 0.7).unwrap();
        assert!(pm.matrix().max_abs_diff(&pi_minus_by_swap(0.2, 0.7).unwrap()) < 1e-15);
    }

    #[test]
    fn z_xy_potentials() {
        let pots = potentials_z_xy(0.0, 0.0, 2.0).unwrap();
        assert!(pots.iter().all(|p| p.x[0] == HermitianMatrix::zeros(2) && p.y[0] == HermitianMatrix::zeros(2)));
        let pots = potentials_z_xy(0.5, 0.25, 2.0).unwrap();
        let x = &pots[0].x[0];
        assert!((x[(0, 0)].re - 2.0 * (1.0 - 2.0 / SQ3)).abs() < 1e-12);
        assert!((x[(0, 1)].re - 2.0 / SQ3).abs() < 1e-12);
        for m in (0..20).map(|i| i as f64 * 0.05) {
            for p in [1.0, 2.0, 3.0] {
                let cost = cost_z(p).unwrap();
                let (a, b) = (m, -m / 3.0);
                let (rho, omega) = (rho_x(a).unwrap(), rho_x(b).unwrap());
                let mut best = f64::NEG_INFINITY;
                for pot in potentials_z_xy(a, b, p).unwrap() {
                    assert!(pot.min_slack(&cost).unwrap() >= -1e-10);
                    best = best.max(pot.objective(&rho, &omega));
                }
                assert!((best - d_z_xy(a, b, p)).abs() < 1e-10);
                let (rho, omega) = (rho_x(b).unwrap(), rho_x(a).unwrap());
                let best = potentials_z_xy(b, a, p).unwrap().iter().map(|q| q.objective(&rho, &omega)).fold(f64::NEG_INFINITY, f64::max);
                assert!((best - d_z_xy(b, a, p)).abs() < 1e-10);
            }
        }
        assert!(matches!(potentials_z_xy(1.0, 0.0, 2.0), Err(ClosedFormError::PureState)));
    }

    #[test]
    fn z_xy_divergence() {
        assert_eq!(divergence_z_xy(0.4, 0.4), 0.0);
        assert!((divergence_z_xy(0.0, 0.5) - (1.0 - SQ3 / 2.0)).abs() < 1e-15);
        let (a, b) = (0.3, 0.8);
        let half_gap = 0.5 * (d_z_xy(b, b, 2.0) - d_z_xy(a, a, 2.0));
        assert!((divergence_z_xy(a, b) - half_gap).abs() < 1e-12);
    }

    #[test]
    fn z_commuting() {
        assert_eq!(d_z_commuting(0.4, 0.4, 2.0), 0.0);
        assert_eq!(d_z_commuting(1.0, -1.0, 1.0), 2.0);
        for (a, b) in [(0.3, -0.1), (-0.9, 0.2), (1.0, 1.0), (0.5, 0.5)] {
            for p in [1.0, 2.0, 2.5] {
                let want = d_z_commuting(a, b, p);
                assert!((classical_z_commuting(a, b, p) - want).abs() < 1e-12);
                let pi = coupling_z_commuting(a, b).unwrap();
                assert!(pi.check(1e-12).unwrap().valid);
                assert!((pi.objective(&cost_z(p).unwrap()).unwrap() - want).abs() < 1e-12);
                let (rho, omega) = (rho_z(a).unwrap(), rho_z(b).unwrap());
                let pots = potentials_z_commuting(p).unwrap();
                let best = pots.iter().map(|q| q.objective(&rho, &omega)).fold(f64::NEG_INFINITY, f64::max);
                assert!((best - want).abs() < 1e-12);
                assert!(pots.iter().all(|q| q.is_feasible(&cost_z(p).unwrap(), 1e-12).unwrap()));
            }
        }
    }

    #[test]
    fn classical_ot_oracle() {
        let v = classical_ot_1d(&[(0.0, 0.5), (1.0, 0.5)], &[(0.0, 0.25), (2.0, 0.75)], |x, y| (x - y).abs());
        // 0.25 stays, 0.25 moves 0→2, 0.5 moves 1→2
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangle_margins() {
        assert!(triangle_margin_symm(0.3, 0.3, 0.3).abs() < 1e-12);
        assert!(triangle_margin_z(0.2, 0.5, 0.9).abs() < 1e-12);
        assert!(triangle_margin_z(0.2, 0.9, 0.5) > 0.0);
        assert!(triangle_margin_symm(-0.5, 0.1, 0.7) >= -1e-12);
    }

    #[test]
    fn y_elimination() {
        let r1 = BlochVector::new([0.3, 0.2, 0.4]).unwrap();
        let (a, _, phi, _) = eliminate_y(&r1, &r1);
        assert!((a.0[0] - 0.3f64.hypot(0.2)).abs() < 1e-15 && a.0[1] == 0.0);
        let u = z_rotation(phi);
        let rotated = state_from_bloch(&r1).conjugate_by(&u);
        assert!(rotated.max_abs_diff(&state_from_bloch(&a)) < 1e-14);
    }
}
