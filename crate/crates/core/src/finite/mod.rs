//! Equilibrium solvers for finitely many types.
//!
//! Two independent routes are provided for general models: damped
//! best-response iteration on the groups' problems ([`fixed_point_solve`]) and
//! extragradient on the equivalent variational inequality
//! ([`extragradient_solve`]). The quadratic fishing family additionally has
//! direct linear characterizations in [`quadratic`].

mod best_response;
pub mod quadratic;
mod special;
mod vi;

pub use best_response::{fixed_point_solve, group_best_response, BestResponse};
pub use quadratic::{quadratic_hrkn_direct, quadratic_rkn_direct, Coarsening, HrKantNash};
pub use special::{build_special_case, SpecialCase};
pub use vi::{extragradient_solve, monotonicity_probe, vi_map, vi_residual, MonotonicityProbe};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Outer residual tolerance.
    pub tol: f64,
    pub max_outer: usize,
    /// Relaxation weight of the new best response in the fixed-point update.
    pub damping: f64,
    /// Projected-gradient residual tolerance for group best responses.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Initial extragradient step; halved whenever the step test fails.
    pub eg_step: f64,
    /// Points per axis for grid best responses (infinite risk factors).
    pub oracle_grid: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-10,
            max_outer: 10_000,
            damping: 0.5,
            inner_tol: 1e-12,
            inner_max_iter: 10_000,
            eg_step: 0.1,
            oracle_grid: 41,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.inner_tol > 0.0) {
            return Err(Error::Input("tolerances must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::Input(format!(
                "damping {} outside (0, 1]",
                self.damping
            )));
        }
        if !(self.eg_step > 0.0) {
            return Err(Error::Input("extragradient step must be positive".into()));
        }
        if self.oracle_grid < 2 {
            return Err(Error::Input("oracle grid needs at least two points".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    /// Group best responses that hit the inner iteration cap.
    pub inner_failures: usize,
}
