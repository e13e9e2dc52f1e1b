//! Quantum Wasserstein distances between finite-dimensional quantum states.
//!
//! The crate builds the linearized quantum optimal transport problem and its
//! Kantorovich dual as complex semidefinite programs, solves them with a
//! self-contained interior-point method, and evaluates the known closed-form
//! optimal couplings and potentials for qubits as independent oracles.
//!
//! * [`linalg`]: tensor products, partial traces, spectral calculus.
//! * [`cost`]: cost operators built from observables and classical costs.
//! * [`sdp`]: the dense primal-dual interior-point solver.
//! * [`transport`]: couplings, primal/dual problem builders, distances.
//! * [`closedform`]: closed-form qubit distances, couplings and potentials.
//! * [`random`]: seeded random states, unitaries and Hermitian matrices.

pub mod closedform;
pub mod cost;
pub mod linalg;
pub mod random;
pub mod sdp;
pub mod transport;

pub use closedform::BlochVector;
pub use cost::{ClassicalCost, ObservableSet, PairCost};
pub use linalg::{ComplexMatrix, DensityMatrix, FactorShape, HermitianMatrix, SpectralDecomposition};
pub use sdp::{SdpProblem, SdpSolution, SolveStatus, SolverOptions};
pub use transport::{Coupling, CostModel, DualPotentials, Mode, TransportInstance, TransportSolution};
