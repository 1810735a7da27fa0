//! Desk-scale Nash–Moser iteration for the nonlinear perturbation problem:
//! smoothing operators, residuals of the approximate problems, Newton
//! increments from the linearized solver, and the convergence trace.

pub mod iterate;
pub mod residual;
pub mod smoothing;

pub use iterate::{initial_guess, iterate, iterate_from, IterationConfig, IterationTrace, Schedule, StepRecord};
pub use residual::{
    linearized_solve_step, quadratic_remainder, residual, residual_operators, tame_estimate_check, trajectory_norm,
    TameEstimate, Window,
};
pub use smoothing::{operator_constants, shell_balanced_field, smoothing_sweep, smooth, ConstantRow, Inequality, SmoothingOp, SmoothingReport};
