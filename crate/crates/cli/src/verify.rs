//! Verification suites: SDP optima against closed forms, duality,
//! triangle inequalities and identities, run in parallel with a
//! deterministic case order.

use qwass::closedform::{
    coupling_symm_commuting, coupling_z_commuting, coupling_z_xy, d_symm_commuting, d_z_commuting, d_z_xy,
    divergence_symm_scalar, divergence_z_xy, eliminate_y, potentials_symm_commuting, potentials_z_commuting,
    potentials_z_xy, rho_x, rho_z, state_from_bloch, triangle_margin_symm, triangle_margin_z,
};
use qwass::cost::{cost_symm, cost_z};
use qwass::linalg::{sqrt_psd, DensityMatrix, HermitianMatrix};
use qwass::random;
use qwass::transport::{divergence_quadratic, purification_coupling, wasserstein_distance, Coupling, DualPotentials};
use qwass::{CostModel, Mode, SolverOptions, TransportInstance};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Symmetric cost, z-axis states, grid.
    SymmCommuting,
    /// z cost, x-axis states, grid.
    ZXy,
    /// z cost, z-axis states, grid.
    ZCommuting,
    /// Closed-form couplings and potentials against the SDP, grid.
    Witness,
    /// Symmetric-cost divergence, z-axis states, grid.
    DivergenceSymm,
    /// z-cost divergence, x-axis states, grid.
    DivergenceZ,
    /// Random commuting triples, symmetric-cost divergence.
    TriangleSymm,
    /// Random xy-plane triples, z-cost divergence.
    TriangleZ,
    /// Zero duality gap on random qubit pairs.
    Duality,
    /// Purification cost identity on random qubits.
    Purification,
    /// z-cost distance invariance under per-state z rotations.
    Rotation,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::SymmCommuting => "symm-commuting",
            Suite::ZXy => "z-xy",
            Suite::ZCommuting => "z-commuting",
            Suite::Witness => "witness",
            Suite::DivergenceSymm => "divergence-symm",
            Suite::DivergenceZ => "divergence-z",
            Suite::TriangleSymm => "triangle-symm",
            Suite::TriangleZ => "triangle-z",
            Suite::Duality => "duality",
            Suite::Purification => "purification",
            Suite::Rotation => "rotation",
        }
    }

    fn default_samples(self) -> usize {
        match self {
            Suite::TriangleSymm | Suite::TriangleZ => 10_000,
            Suite::Duality => 500,
            _ => 100,
        }
    }

    fn tolerance(self) -> f64 {
        match self {
            Suite::SymmCommuting | Suite::ZXy | Suite::ZCommuting | Suite::DivergenceSymm | Suite::DivergenceZ => 1e-5,
            Suite::Witness | Suite::Duality | Suite::Rotation => 1e-6,
            Suite::TriangleSymm | Suite::TriangleZ | Suite::Purification => 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub index: usize,
    pub params: Vec<f64>,
    /// Absent when the case errored.
    pub value: Option<f64>,
    pub reference: Option<f64>,
    pub deviation: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub tolerance: f64,
    pub cases: usize,
    pub failures: usize,
    pub max_deviation: f64,
    pub passed: bool,
    pub rows: Vec<CaseRow>,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyConfig {
    pub density: usize,
    pub samples: Option<usize>,
    pub seed: u64,
}

type Eval = Result<(f64, f64, f64), String>;

fn grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| -0.95 + 1.9 * i as f64 / (n - 1) as f64).collect()
}

fn grid_params(n: usize) -> Vec<Vec<f64>> {
    let g = grid(n);
    let mut out = Vec::new();
    for p in [1.0, 2.0] {
        for &a in &g {
            for &b in &g {
                out.push(vec![a, b, p]);
            }
        }
    }
    out
}

fn sdp(rho: &DensityMatrix, omega: &DensityMatrix, cost: HermitianMatrix, p: f64, opts: &SolverOptions) -> Result<f64, String> {
    let inst = TransportInstance::joint(rho.clone(), omega.clone(), cost, p).map_err(|e| e.to_string())?;
    wasserstein_distance(&inst, opts).map(|s| s.value).map_err(|e| e.to_string())
}

fn random_qubit<R: Rng>(rng: &mut R) -> Vec<f64> {
    random::bloch(rng, 1.0).components().to_vec()
}

fn qubit(v: &[f64]) -> Result<DensityMatrix, String> {
    let r = qwass::BlochVector::new([v[0], v[1], v[2]]).map_err(|e| e.to_string())?;
    Ok(state_from_bloch(&r))
}

fn params(suite: Suite, cfg: &VerifyConfig) -> Vec<Vec<f64>> {
    let samples = cfg.samples.unwrap_or(suite.default_samples());
    let mut rng = random::rng(cfg.seed);
    match suite {
        Suite::SymmCommuting | Suite::ZXy | Suite::ZCommuting | Suite::Witness => grid_params(cfg.density),
        Suite::DivergenceSymm | Suite::DivergenceZ => {
            grid_params(cfg.density).into_iter().filter(|v| v[2] == 2.0).collect()
        }
        Suite::TriangleSymm => (0..samples).map(|_| (0..3).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect(),
        Suite::TriangleZ => (0..samples).map(|_| (0..3).map(|_| rng.gen_range(0.0..=1.0)).collect()).collect(),
        Suite::Duality => (0..samples)
            .map(|i| {
                let mut v = random_qubit(&mut rng);
                v.extend(random_qubit(&mut rng));
                v.push((i % 2) as f64);
                v.push(if (i / 2) % 2 == 0 { 1.0 } else { 2.0 });
                v
            })
            .collect(),
        Suite::Purification => (0..samples).map(|_| random_qubit(&mut rng)).collect(),
        Suite::Rotation => (0..samples)
            .map(|i| {
                let mut v = random::bloch(&mut rng, 0.95).components().to_vec();
                v.extend(random::bloch(&mut rng, 0.95).components());
                v.push(if i % 2 == 0 { 1.0 } else { 2.0 });
                v
            })
            .collect(),
    }
}

/// Best objective among the feasible candidate potentials.
fn best_potential(cands: &[DualPotentials], coupling: &Coupling, cost: &HermitianMatrix) -> Result<(f64, f64), String> {
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for pot in cands {
        let slack = pot.min_slack(cost).map_err(|e| e.to_string())?;
        let obj = pot.objective(coupling.rho(), coupling.omega());
        if slack >= -1e-8 && obj > best.0 {
            best = (obj, slack);
        }
    }
    Ok(best)
}

fn witness(a: f64, b: f64, p: f64, opts: &SolverOptions) -> Eval {
    let e = |e: qwass::closedform::ClosedFormError| e.to_string();
    let families: [(Coupling, Vec<DualPotentials>, HermitianMatrix, DensityMatrix, DensityMatrix); 3] = [
        (
            coupling_symm_commuting(a, b).map_err(e)?,
            potentials_symm_commuting(a, b, p).map_err(e)?.to_vec(),
            cost_symm(p).map_err(|e| e.to_string())?,
            rho_z(a).map_err(e)?,
            rho_z(b).map_err(e)?,
        ),
        (
            coupling_z_xy(a, b).map_err(e)?,
            potentials_z_xy(a, b, p).map_err(e)?.to_vec(),
            cost_z(p).map_err(|e| e.to_string())?,
            rho_x(a).map_err(e)?,
            rho_x(b).map_err(e)?,
        ),
        (
            coupling_z_commuting(a, b).map_err(e)?,
            potentials_z_commuting(p).map_err(e)?.to_vec(),
            cost_z(p).map_err(|e| e.to_string())?,
            rho_z(a).map_err(e)?,
            rho_z(b).map_err(e)?,
        ),
    ];
    let mut spread: f64 = 0.0;
    let mut valid = true;
    let mut value = 0.0;
    let mut reference = 0.0;
    for (coupling, pots, cost, rho, omega) in families {
        valid &= coupling.check(1e-8).map_err(|e| e.to_string())?.valid;
        let primal = coupling.objective(&cost).map_err(|e| e.to_string())?;
        let (dual, slack) = best_potential(&pots, &coupling, &cost)?;
        valid &= slack >= -1e-8;
        let opt = sdp(&rho, &omega, cost, p, opts)?;
        let s = (primal - dual).abs().max((primal - opt).abs()).max((dual - opt).abs());
        if s >= spread {
            spread = s;
            value = primal;
            reference = opt;
        }
    }
    if !valid {
        return Err("closed-form coupling or potential failed its feasibility check".into());
    }
    Ok((value, reference, spread))
}

fn evaluate(suite: Suite, v: &[f64], opts: &SolverOptions) -> Eval {
    let err = |e: qwass::closedform::ClosedFormError| e.to_string();
    let diff = |value: f64, reference: f64| Ok((value, reference, (value - reference).abs()));
    match suite {
        Suite::SymmCommuting => {
            let (a, b, p) = (v[0], v[1], v[2]);
            diff(sdp(&rho_z(a).map_err(err)?, &rho_z(b).map_err(err)?, cost_symm(p).unwrap(), p, opts)?, d_symm_commuting(a, b, p))
        }
        Suite::ZXy => {
            let (a, b, p) = (v[0], v[1], v[2]);
            diff(sdp(&rho_x(a).map_err(err)?, &rho_x(b).map_err(err)?, cost_z(p).unwrap(), p, opts)?, d_z_xy(a, b, p))
        }
        Suite::ZCommuting => {
            let (a, b, p) = (v[0], v[1], v[2]);
            diff(sdp(&rho_z(a).map_err(err)?, &rho_z(b).map_err(err)?, cost_z(p).unwrap(), p, opts)?, d_z_commuting(a, b, p))
        }
        Suite::Witness => witness(v[0], v[1], v[2], opts),
        Suite::DivergenceSymm | Suite::DivergenceZ => {
            let (a, b) = (v[0], v[1]);
            let (rho, omega, cost, reference) = if suite == Suite::DivergenceSymm {
                (rho_z(a), rho_z(b), cost_symm(2.0).unwrap(), divergence_symm_scalar(a, b))
            } else {
                (rho_x(a), rho_x(b), cost_z(2.0).unwrap(), divergence_z_xy(a.abs(), b.abs()))
            };
            let d = divergence_quadratic(&rho.map_err(err)?, &omega.map_err(err)?, &CostModel::Operator(cost), Mode::Joint, opts)
                .map_err(|e| e.to_string())?;
            diff(d.squared, reference)
        }
        Suite::TriangleSymm | Suite::TriangleZ => {
            let margin = if suite == Suite::TriangleSymm {
                triangle_margin_symm(v[0], v[1], v[2])
            } else {
                triangle_margin_z(v[0], v[1], v[2])
            };
            Ok((margin, 0.0, (-margin).max(0.0)))
        }
        Suite::Duality => {
            let p = v[7];
            let cost = if v[6] == 0.0 { cost_symm(p) } else { cost_z(p) }.map_err(|e| e.to_string())?;
            let inst = TransportInstance::joint(qubit(&v[0..3])?, qubit(&v[3..6])?, cost, p).map_err(|e| e.to_string())?;
            let sol = wasserstein_distance(&inst, opts).map_err(|e| e.to_string())?;
            Ok((sol.primal, sol.dual, sol.gap / sol.primal.max(1.0)))
        }
        Suite::Purification => {
            let rho = qubit(v)?;
            let tr = sqrt_psd(rho.hermitian()).map_err(|e| e.to_string())?.trace();
            let value = purification_coupling(&rho)
                .and_then(|c| c.objective(&cost_symm(2.0).unwrap()))
                .map_err(|e| e.to_string())?;
            diff(value, 8.0 - 4.0 * tr * tr)
        }
        Suite::Rotation => {
            let p = v[6];
            let r1 = qwass::BlochVector::new([v[0], v[1], v[2]]).map_err(err)?;
            let r2 = qwass::BlochVector::new([v[3], v[4], v[5]]).map_err(err)?;
            let (a, b, _, _) = eliminate_y(&r1, &r2);
            let before = sdp(&state_from_bloch(&r1), &state_from_bloch(&r2), cost_z(p).unwrap(), p, opts)?;
            let after = sdp(&state_from_bloch(&a), &state_from_bloch(&b), cost_z(p).unwrap(), p, opts)?;
            diff(before, after)
        }
    }
}

/// Runs `suite`; the result depends only on the configuration.
pub fn run(suite: Suite, cfg: &VerifyConfig, opts: &SolverOptions) -> SuiteReport {
    let tolerance = suite.tolerance();
    let mut rows: Vec<CaseRow> = params(suite, cfg)
        .into_par_iter()
        .enumerate()
        .map(|(index, params)| match evaluate(suite, &params, opts) {
            Ok((value, reference, deviation)) => CaseRow {
                index,
                params,
                value: Some(value),
                reference: Some(reference),
                deviation: Some(deviation),
                pass: deviation <= tolerance,
                error: None,
            },
            Err(e) => CaseRow { index, params, value: None, reference: None, deviation: None, pass: false, error: Some(e) },
        })
        .collect();
    rows.sort_by_key(|r| r.index);
    let failures = rows.iter().filter(|r| !r.pass).count();
    let max_deviation = rows.iter().filter_map(|r| r.deviation).fold(0.0, f64::max);
    SuiteReport {
        suite,
        seed: cfg.seed,
        tolerance,
        cases: rows.len(),
        failures,
        max_deviation,
        passed: failures == 0,
        rows,
    }
}
