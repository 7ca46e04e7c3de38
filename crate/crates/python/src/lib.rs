//! Python module `kantian`.

use kantian_core::continuum::{self, Candidate, ContinuumLQ as LqGame, XiProfile};
use kantian_core::finite::{
    extragradient_solve, fixed_point_solve, monotonicity_probe, quadratic_hrkn_direct,
    quadratic_rkn_direct, Coarsening, SolveReport, SolverConfig,
};
use kantian_core::model::{
    ActionBox, FiniteGame, FiniteTypeSpace, GroupMeasure, QuadraticFishingModel, WeightKernel,
};
use kantian_core::{oracle, scenarios, Error, RiskFactor};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Input(_) | Error::DimensionMismatch { .. } | Error::Invariant(_) => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn report_dict<'py>(py: Python<'py>, r: &SolveReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("converged", r.converged)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("residual", r.final_residual)?;
    Ok(d)
}

/// Risk-aggregated cost `(1/beta) ln sum q exp(beta v)` with `q` the
/// normalized masses; `beta = 0` gives the mean, `+-inf` the max / min.
#[pyfunction]
fn risk_aggregate(values: Vec<f64>, masses: Vec<f64>, beta: f64) -> PyResult<f64> {
    let beta = RiskFactor::new(beta).map_err(to_py)?;
    kantian_core::risk_aggregate(&values, &masses, beta).map_err(to_py)
}

/// Closed-form Kantian and altruistic curves of the symmetric fishing game.
#[pyfunction]
fn symmetric_reference(py: Python<'_>, alpha: f64) -> PyResult<Bound<'_, PyDict>> {
    let r = scenarios::symmetric_reference(alpha);
    let d = PyDict::new(py);
    d.set_item("kantian", r.kantian)?;
    d.set_item("altruistic", r.altruistic)?;
    d.set_item("kantian_cost", r.kantian_cost)?;
    d.set_item("altruistic_cost", r.altruistic_cost)?;
    Ok(d)
}

/// Quadratic fishing game `J_k = a_k u^2 - (1 - ubar) b_k u` on `[0, 1]` with
/// groups holding the fraction `alpha` of every type.
#[pyclass(module = "kantian")]
struct QuadraticGame {
    space: FiniteTypeSpace,
    model: QuadraticFishingModel,
    alpha: f64,
    game: FiniteGame<QuadraticFishingModel>,
}

#[pymethods]
impl QuadraticGame {
    #[new]
    #[pyo3(signature = (effort, efficiency, masses, alpha=0.0, beta=0.0))]
    fn new(
        effort: Vec<f64>,
        efficiency: Vec<f64>,
        masses: Vec<f64>,
        alpha: f64,
        beta: f64,
    ) -> PyResult<Self> {
        let build = || -> kantian_core::Result<Self> {
            let model = QuadraticFishingModel::new(effort, efficiency, ActionBox::default())?;
            let space = FiniteTypeSpace::from_individual(model.descriptors(), masses)?;
            let measure = GroupMeasure::uniform(&space, alpha)?;
            let n = space.len();
            let game = FiniteGame::new(
                space.clone(),
                model.clone(),
                measure,
                WeightKernel::ones(n),
                RiskFactor::new(beta)?,
            )?;
            Ok(QuadraticGame {
                space,
                model,
                alpha,
                game,
            })
        };
        build().map_err(to_py)
    }

    /// Four-type example game.
    #[staticmethod]
    #[pyo3(signature = (alpha=0.0))]
    fn four_type(alpha: f64) -> PyResult<Self> {
        let sc = scenarios::four_type_game(alpha).map_err(to_py)?;
        Self::new(
            sc.model.effort().to_vec(),
            sc.model.efficiency().to_vec(),
            sc.space.p().to_vec(),
            alpha,
            0.0,
        )
    }

    #[getter]
    fn num_types(&self) -> usize {
        self.space.len()
    }

    /// Damped best-response iteration; returns `(actions, report)`.
    #[pyo3(signature = (tol=1e-10))]
    fn fixed_point<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
    ) -> PyResult<(Vec<f64>, Bound<'py, PyDict>)> {
        let cfg = SolverConfig {
            tol,
            ..SolverConfig::default()
        };
        let (eq, report) = fixed_point_solve(&self.game, &cfg).map_err(to_py)?;
        Ok((eq.star, report_dict(py, &report)?))
    }

    /// Extragradient on the variational inequality; returns `(actions, report)`.
    #[pyo3(signature = (tol=1e-10))]
    fn extragradient<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
    ) -> PyResult<(Vec<f64>, Bound<'py, PyDict>)> {
        let cfg = SolverConfig {
            tol,
            ..SolverConfig::default()
        };
        let (eq, report) = extragradient_solve(&self.game, &cfg).map_err(to_py)?;
        Ok((eq.star, report_dict(py, &report)?))
    }

    /// Linear-system solution (neutral risk only).
    fn rkn_direct(&self) -> PyResult<Vec<f64>> {
        quadratic_rkn_direct(&self.space, &self.model, self.alpha).map_err(to_py)
    }

    /// h,r-Kant-Nash actions when owners credit members with their own effort weight.
    fn hrkn_direct(&self) -> PyResult<Vec<f64>> {
        quadratic_hrkn_direct(
            &self.space,
            &self.model,
            self.alpha,
            Coarsening::OwnEffortWeight,
        )
        .map(|h| h.equilibrium)
        .map_err(to_py)
    }

    /// Smallest sampled monotonicity quotient of the equilibrium map.
    #[pyo3(signature = (samples=1000, seed=0))]
    fn monotonicity_probe(&self, samples: usize, seed: u64) -> PyResult<f64> {
        monotonicity_probe(&self.game, samples, seed)
            .map(|p| p.min_value)
            .map_err(to_py)
    }
}

/// Linear-quadratic game on a continuum of types `x` in `[0, 1]`.
#[pyclass(module = "kantian")]
struct ContinuumLQ {
    lq: LqGame,
}

#[pymethods]
impl ContinuumLQ {
    /// `kernel` is `"uniform"` or `"windowed"`; `xi` is `"const"`, `"linear"` or `"affine"`.
    #[new]
    #[pyo3(signature = (alpha, kernel="uniform", xi="const", n=201))]
    fn new(alpha: f64, kernel: &str, xi: &str, n: usize) -> PyResult<Self> {
        let xi = XiProfile::parse(xi).map_err(to_py)?;
        let lq = match kernel {
            "uniform" => LqGame::uniform_kernel(alpha, xi, n),
            "windowed" => LqGame::windowed(alpha, xi, n),
            other => return Err(PyValueError::new_err(format!("unknown kernel '{other}'"))),
        }
        .map_err(to_py)?;
        Ok(ContinuumLQ { lq })
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.lq.grid().to_vec()
    }

    /// Returns a dict with `x`, `actions`, `costs`, `ubar_minus`, `population_mean`
    /// and the necessary-condition `residual`.
    fn solve<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let sol = continuum::solve(&self.lq).map_err(to_py)?;
        let residual =
            continuum::pontryagin_residual(&self.lq, &Candidate::from(&sol)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("x", self.lq.grid().to_vec())?;
        d.set_item("actions", sol.actions)?;
        d.set_item("costs", sol.costs)?;
        d.set_item("ubar_minus", sol.ubar_minus)?;
        d.set_item("population_mean", sol.population_mean)?;
        d.set_item("residual", residual)?;
        Ok(d)
    }

    /// Sup-norm gap to an `n_types` finite discretization solved by extragradient.
    #[pyo3(signature = (n_types=51))]
    fn crosscheck(&self, n_types: usize) -> PyResult<f64> {
        oracle::discretized_continuum_crosscheck(&self.lq, n_types).map_err(to_py)
    }
}

#[pymodule]
fn kantian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(risk_aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_reference, m)?)?;
    m.add_class::<QuadraticGame>()?;
    m.add_class::<ContinuumLQ>()?;
    Ok(())
}
