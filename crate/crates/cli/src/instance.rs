//! TOML instance files.
//!
//! ```toml
//! p = 2.0
//! mode = "joint"            # joint | linearized | nonlinear
//! cost = "symm"             # symm | z | factorized | general
//! observables = "sigma-z"   # pauli-triple | sigma-z | custom
//! classical = "lp"          # lp | euclidean, general costs only
//!
//! [rho]
//! bloch = [0.0, 0.0, 0.5]
//!
//! [omega]
//! re = [[0.5, 0.0], [0.0, 0.5]]
//! im = [[0.0, 0.0], [0.0, 0.0]]
//!
//! [[observable]]            # only with observables = "custom"
//! re = [[1.0, 0.0], [0.0, -1.0]]
//! ```

use std::path::Path;

use qwass::closedform::state_from_bloch;
use qwass::cost::{cost_symm, cost_z};
use qwass::linalg::{c, from_row_major, pauli, DensityMatrix, HermitianMatrix};
use qwass::{BlochVector, ClassicalCost, CostModel, Mode, ObservableSet, TransportInstance};
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    Symm,
    Z,
    Factorized,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    Joint,
    Linearized,
    Nonlinear,
}

impl From<ModeKind> for Mode {
    fn from(m: ModeKind) -> Self {
        match m {
            ModeKind::Joint => Mode::Joint,
            ModeKind::Linearized => Mode::Linearized,
            ModeKind::Nonlinear => Mode::Nonlinear,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableKind {
    #[default]
    PauliTriple,
    SigmaZ,
    Custom,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalKind {
    /// `Σ_k |x_k − y_k|^p`.
    #[default]
    Lp,
    /// `‖x − y‖₂^p`.
    Euclidean,
}

/// A state or observable given as a Bloch vector or as explicit rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_mode")]
    pub mode: ModeKind,
    pub cost: CostKind,
    #[serde(default)]
    pub observables: ObservableKind,
    #[serde(default)]
    pub classical: ClassicalKind,
    pub rho: MatrixSpec,
    pub omega: MatrixSpec,
    #[serde(default, rename = "observable", skip_serializing_if = "Vec::is_empty")]
    pub custom: Vec<MatrixSpec>,
}

fn default_p() -> f64 {
    2.0
}

fn default_mode() -> ModeKind {
    ModeKind::Joint
}

/// Command-line overrides of instance file fields.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    /// `Some(None)` keeps the file's observable-based cost.
    pub cost: Option<Option<CostKind>>,
    pub p: Option<f64>,
    pub mode: Option<ModeKind>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid instance file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        match o.cost {
            Some(Some(kind)) => self.cost = kind,
            Some(None) if matches!(self.cost, CostKind::Symm | CostKind::Z) => {
                return Err(CliError::Usage("--cost custom needs a factorized or general cost in the file".into()))
            }
            _ => {}
        }
        if let Some(p) = o.p {
            self.p = p;
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        Ok(self)
    }

    pub fn rho(&self) -> Result<DensityMatrix> {
        density(&self.rho, "rho")
    }

    pub fn omega(&self) -> Result<DensityMatrix> {
        density(&self.omega, "omega")
    }

    fn observable_set(&self, d: usize) -> Result<ObservableSet> {
        let obs = match self.observables {
            ObservableKind::PauliTriple => ObservableSet::pauli_triple(),
            ObservableKind::SigmaZ => ObservableSet::sigma_z(),
            ObservableKind::Custom => {
                if self.custom.is_empty() {
                    return Err(CliError::Usage("observables = \"custom\" needs [[observable]] entries".into()));
                }
                let list = self
                    .custom
                    .iter()
                    .enumerate()
                    .map(|(i, spec)| hermitian(spec, &format!("observable {i}")))
                    .collect::<Result<Vec<_>>>()?;
                ObservableSet::new(list).map_err(CliError::usage)?
            }
        };
        if obs.dim() != d {
            return Err(CliError::Usage(format!("observables act on dimension {}, states on {d}", obs.dim())));
        }
        Ok(obs)
    }

    pub fn instance(&self) -> Result<TransportInstance> {
        let (rho, omega) = (self.rho()?, self.omega()?);
        let d = rho.dim();
        let p = self.p;
        if !(p.is_finite() && p >= 1.0) {
            return Err(CliError::Usage(format!("p = {p} must be at least 1")));
        }
        let cost = match self.cost {
            CostKind::Symm | CostKind::Z if d != 2 => {
                return Err(CliError::Usage("the symm and z costs are defined for qubits".into()))
            }
            CostKind::Symm => CostModel::Operator(cost_symm(p).map_err(CliError::usage)?),
            CostKind::Z => CostModel::Operator(cost_z(p).map_err(CliError::usage)?),
            CostKind::Factorized => CostModel::abs_power(self.observable_set(d)?, p),
            CostKind::General => {
                let observables = self.observable_set(d)?;
                let k = observables.len();
                let cost = match self.classical {
                    ClassicalKind::Lp => ClassicalCost::lp_power(k, p),
                    ClassicalKind::Euclidean => ClassicalCost::euclidean_power(k, p),
                };
                CostModel::General { observables, cost }
            }
        };
        TransportInstance::new(rho, omega, cost, p, self.mode.into()).map_err(CliError::usage)
    }
}

fn rows(entries: &[Vec<f64>], what: &str) -> Result<(usize, Vec<f64>)> {
    let n = entries.len();
    if n == 0 || entries.iter().any(|r| r.len() != n) {
        return Err(CliError::Usage(format!("{what}: expected a nonempty square array of rows")));
    }
    Ok((n, entries.iter().flatten().copied().collect()))
}

fn hermitian(spec: &MatrixSpec, what: &str) -> Result<HermitianMatrix> {
    match (&spec.bloch, &spec.re) {
        (Some(_), _) => Err(CliError::Usage(format!("{what}: bloch is only valid for qubit states"))),
        (None, Some(re)) => {
            let (n, re) = rows(re, what)?;
            let im = match &spec.im {
                Some(im) => {
                    let (m, im) = rows(im, what)?;
                    if m != n {
                        return Err(CliError::Usage(format!("{what}: re is {n}x{n} but im is {m}x{m}")));
                    }
                    im
                }
                None => vec![0.0; n * n],
            };
            let entries: Vec<_> = re.iter().zip(&im).map(|(&a, &b)| c(a, b)).collect();
            HermitianMatrix::new(from_row_major(n, n, &entries)).map_err(|e| CliError::Usage(format!("{what}: {e}")))
        }
        (None, None) => Err(CliError::Usage(format!("{what}: missing re"))),
    }
}

fn density(spec: &MatrixSpec, what: &str) -> Result<DensityMatrix> {
    match (spec.bloch, &spec.re) {
        (Some(_), Some(_)) => return Err(CliError::Usage(format!("{what}: give either bloch or re/im, not both"))),
        (Some(r), None) => {
            let v = BlochVector::new(r).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
            return Ok(state_from_bloch(&v));
        }
        (None, None) => return Err(CliError::Usage(format!("{what}: missing bloch or re"))),
        (None, Some(_)) => {}
    }
    DensityMatrix::new(hermitian(spec, what)?).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

/// Bloch vector of a qubit state, `r_k = tr(ρ σ_k)`.
pub fn bloch_of(rho: &DensityMatrix) -> Option<[f64; 3]> {
    (rho.dim() == 2).then(|| [0, 1, 2].map(|k| rho.inner(&pauli(k))))
}
