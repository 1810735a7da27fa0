//! IMEX finite-difference solver for the linearized perturbation system in
//! similarity variables on the unit cube.

pub mod grid;
pub mod init;
pub mod manufactured;
pub mod ops;
pub mod rhs;
pub mod snapshot;
pub mod solver;
pub mod spectral;

pub use grid::{FieldPair, Grid, LinState, ScalarGridField, VectorGridField};
pub use ops::{divergence, gradient, laplacian};
pub use init::random_divergence_free;
pub use manufactured::{manufactured_convergence, temporal_convergence, ConvergenceReport, Manufactured};
pub use rhs::{assemble_f_bar, assemble_rhs, Coefficients, PressureMode};
pub use snapshot::Snapshot;
pub use solver::{
    run, step, with_parallelism, Background, BackgroundSource, ForcingSource, RunOutput, SolverConfig,
};
pub use spectral::{leray_project, poisson_solve_dirichlet};
