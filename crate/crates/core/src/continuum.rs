//! Linear-quadratic fishing game with a continuum of types on `X = [0, 1]`.
//!
//! Each player `x_i` solves its group's problem as an optimal control problem
//! in the virtual time `t` (the member's type). For `J = u^2 - (1 - ubar) xi u`
//! and `g = xi u` the necessary conditions collapse to two linear equations
//! in the constant second state `chi2` and constant costate `p1`, plus a
//! linear Fredholm equation of the second kind for the out-of-group mean field
//! `ubar_minus(x_i)`, which is solved by the Nystrom method on the game's
//! trapezoid rule.
//!
//! Sampled kernels are stored owner-major: `r[(i, j)] = r(t_j, x_i)` is the
//! group density of member `t_j` in the group of player `x_i = t_i`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

const EDGE_TOL: f64 = 1e-9;

/// Efficiency profiles `xi(t)` used by the built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiProfile {
    /// `xi = 1`
    Constant,
    /// `xi = t`
    Linear,
    /// `xi = 0.5 + t`
    Affine,
}

impl XiProfile {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            XiProfile::Constant => 1.0,
            XiProfile::Linear => t,
            XiProfile::Affine => 0.5 + t,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            XiProfile::Constant => "const",
            XiProfile::Linear => "linear",
            XiProfile::Affine => "affine",
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "const" | "constant" | "1" => Ok(XiProfile::Constant),
            "linear" | "t" => Ok(XiProfile::Linear),
            "affine" => Ok(XiProfile::Affine),
            other => Err(Error::Input(format!(
                "unknown efficiency profile '{other}'"
            ))),
        }
    }
}

/// `n` equispaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| j as f64 / (n - 1) as f64).collect()
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    (0..n)
        .map(|j| {
            let left = if j > 0 { grid[j] - grid[j - 1] } else { 0.0 };
            let right = if j + 1 < n {
                grid[j + 1] - grid[j]
            } else {
                0.0
            };
            0.5 * (left + right)
        })
        .collect()
}

/// Sampled data of the continuum LQ game.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumLQ {
    grid: Vec<f64>,
    weights: Vec<f64>,
    xi: Vec<f64>,
    density: Vec<f64>,
    r: DMatrix<f64>,
    w: DMatrix<f64>,
}

impl ContinuumLQ {
    /// Validates the samples and attaches composite trapezoid weights.
    pub fn new(
        grid: Vec<f64>,
        xi: Vec<f64>,
        density: Vec<f64>,
        r: DMatrix<f64>,
        w: DMatrix<f64>,
    ) -> Result<Self> {
        let n = grid.len();
        if n < 2 {
            return Err(Error::Input("grid needs at least two points".into()));
        }
        if grid[0] != 0.0 || grid[n - 1] != 1.0 || grid.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Input(
                "grid must increase strictly from 0 to 1".into(),
            ));
        }
        check_len(n, xi.len())?;
        check_len(n, density.len())?;
        if r.shape() != (n, n) || w.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.nrows().max(w.nrows()),
            });
        }
        if xi.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Invariant(
                "efficiency must be finite and nonnegative".into(),
            ));
        }
        if density.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::Invariant(
                "density must be finite and nonnegative".into(),
            ));
        }
        for i in 0..n {
            for j in 0..n {
                let (rv, wv) = (r[(i, j)], w[(i, j)]);
                if !(rv.is_finite() && rv >= 0.0 && rv <= density[j] + 1e-12) {
                    return Err(Error::Invariant(format!(
                        "r(t_{j}, x_{i}) = {rv} outside [0, p(t_{j})]"
                    )));
                }
                if !(wv.is_finite() && wv >= 0.0) || (rv > 0.0 && wv <= 0.0) {
                    return Err(Error::Invariant(format!(
                        "w(t_{j}, x_{i}) = {wv} must be positive where r > 0"
                    )));
                }
            }
        }
        let weights = trapezoid_weights(&grid);
        Ok(ContinuumLQ {
            grid,
            weights,
            xi,
            density,
            r,
            w,
        })
    }

    fn sampled(
        alpha: f64,
        xi: XiProfile,
        n: usize,
        kernel: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Input(format!(
                "group fraction {alpha} outside [0, 1]"
            )));
        }
        if n < 2 {
            return Err(Error::Input("grid needs at least two points".into()));
        }
        let grid = uniform_grid(n);
        let xs: Vec<f64> = grid.iter().map(|t| xi.eval(*t)).collect();
        let r = DMatrix::from_fn(n, n, |i, j| alpha * kernel(grid[j], grid[i]));
        Self::new(grid, xs, vec![1.0; n], r, DMatrix::from_element(n, n, 1.0))
    }

    /// Every group holds the fraction `alpha` of every type: `r = alpha`.
    pub fn uniform_kernel(alpha: f64, xi: XiProfile, n: usize) -> Result<Self> {
        Self::sampled(alpha, xi, n, |_, _| 1.0)
    }

    /// `r(t, x) = alpha` for `|t - x| <= 0.3` and `t <= 0.9`, zero otherwise.
    ///
    /// The grid size is raised to the next `10m + 1` so that every window
    /// edge falls on a node; edge nodes carry half the jump, which keeps the
    /// trapezoid rule second order for the piecewise-constant kernel.
    pub fn windowed(alpha: f64, xi: XiProfile, n: usize) -> Result<Self> {
        let n = if n < 11 {
            11
        } else {
            n + (10 - (n - 1) % 10) % 10
        };
        let step = |d: f64| -> f64 {
            if d < -EDGE_TOL {
                1.0
            } else if d <= EDGE_TOL {
                0.5
            } else {
                0.0
            }
        };
        Self::sampled(alpha, xi, n, |t, x| {
            step((t - x).abs() - 0.3) * step(t - 0.9)
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn quadrature_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    /// `r(t_j, x_i)`.
    pub fn group_density(&self, i: usize, j: usize) -> f64 {
        self.r[(i, j)]
    }

    /// `w(t_j, x_i)`.
    pub fn importance(&self, i: usize, j: usize) -> f64 {
        self.w[(i, j)]
    }

    pub fn has_unit_weights(&self) -> bool {
        self.w.iter().all(|w| *w == 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConstants {
    /// `int xi^2 r dt`
    pub c1: f64,
    /// `int xi^2 r / w dt`
    pub c2: f64,
    /// `int xi^2 r w dt`
    pub c3: f64,
}

pub fn quadrature_constants(lq: &ContinuumLQ, i: usize) -> Result<QuadratureConstants> {
    if i >= lq.len() {
        return Err(Error::Input(format!("grid index {i} out of range")));
    }
    let mut c = QuadratureConstants {
        c1: 0.0,
        c2: 0.0,
        c3: 0.0,
    };
    for j in 0..lq.len() {
        let r = lq.r[(i, j)];
        if r == 0.0 {
            continue;
        }
        let base = lq.weights[j] * lq.xi[j] * lq.xi[j] * r;
        let w = lq.w[(i, j)];
        c.c1 += base;
        c.c2 += base / w;
        c.c3 += base * w;
    }
    Ok(c)
}

/// The constant second state `chi2` and costate `p1` of one player's
/// group problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierPair {
    pub chi2: f64,
    pub p1: f64,
}

/// Solves
///
/// ```text
/// (2 + C1) chi2 + C2 p1 = (1 - ubar_minus) C1
/// C3 chi2 + (2 + C1) p1 = (1 - ubar_minus) C3
/// ```
///
/// whose determinant is `(2 + C1)^2 - C2 C3`. With unit weights this gives
/// `chi2 = p1 = C / (2C + 2) (1 - ubar_minus)`.
pub fn multipliers_from_constants(
    c: QuadratureConstants,
    ubar_minus: f64,
) -> Result<MultiplierPair> {
    let det = (2.0 + c.c1).powi(2) - c.c2 * c.c3;
    if det.abs() <= 1e-14 * (1.0 + c.c1 * c.c1 + (c.c2 * c.c3).abs()) {
        return Err(Error::Singular(format!(
            "multiplier system is singular: C1 = {}, C2 = {}, C3 = {}",
            c.c1, c.c2, c.c3
        )));
    }
    let a = 1.0 - ubar_minus;
    Ok(MultiplierPair {
        chi2: (c.c1 * c.c1 + 2.0 * c.c1 - c.c2 * c.c3) / det * a,
        p1: 2.0 * c.c3 / det * a,
    })
}

pub fn closed_form_multipliers(
    lq: &ContinuumLQ,
    i: usize,
    ubar_minus: f64,
) -> Result<MultiplierPair> {
    multipliers_from_constants(quadrature_constants(lq, i)?, ubar_minus)
}

/// Hamiltonian minimizer `u = (1 - ubar_minus - chi2 - p1 / w(t, x_i)) xi(t) / 2`
/// at member `t = t_j` of player `x_i = t_i`'s group.
pub fn lq_optimal_action(
    lq: &ContinuumLQ,
    i: usize,
    j: usize,
    m: MultiplierPair,
    ubar_minus: f64,
) -> f64 {
    let w = lq.w[(i, j)];
    let costate = if m.p1 == 0.0 { 0.0 } else { m.p1 / w };
    0.5 * (1.0 - ubar_minus - m.chi2 - costate) * lq.xi[j]
}

/// Nystrom solution of
///
/// ```text
/// v(x) = int 1/2 (1 - v(t)) xi(t)^2 / (C(t) + 1) (p(t) - r(t, x)) dt
/// ```
///
/// on the sample grid, i.e. `(I + K) v = K 1`. Needs unit weights.
pub fn fredholm_solve(lq: &ContinuumLQ) -> Result<Vec<f64>> {
    if !lq.has_unit_weights() {
        return Err(Error::Unsupported(
            "the mean-field integral equation assumes w = 1".into(),
        ));
    }
    let n = lq.len();
    let c: Vec<f64> = (0..n)
        .map(|j| quadrature_constants(lq, j).map(|q| q.c1))
        .collect::<Result<_>>()?;
    let kernel = DMatrix::from_fn(n, n, |i, j| {
        0.5 * lq.weights[j] * lq.xi[j] * lq.xi[j] / (c[j] + 1.0) * (lq.density[j] - lq.r[(i, j)])
    });
    let rhs = &kernel * DVector::from_element(n, 1.0);
    let system = DMatrix::identity(n, n) + kernel;
    let v = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("Nystrom system I + K is singular".into()))?;
    Ok(v.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumSolution {
    pub ubar_minus: Vec<f64>,
    pub multipliers: Vec<MultiplierPair>,
    /// Equilibrium action `u(x_i)` of each player.
    pub actions: Vec<f64>,
    /// Realized cost `u^2 - (1 - ubar) xi u` of each player.
    pub costs: Vec<f64>,
    /// Population aggregate `int u xi p dt`.
    pub population_mean: f64,
}

/// Evaluates each player's own action from its group's optimal control, the
/// population aggregate, and the realized costs.
pub fn strategy_and_costs(lq: &ContinuumLQ, ubar_minus: &[f64]) -> Result<ContinuumSolution> {
    let n = lq.len();
    check_len(n, ubar_minus.len())?;
    let multipliers: Vec<MultiplierPair> = (0..n)
        .map(|i| closed_form_multipliers(lq, i, ubar_minus[i]))
        .collect::<Result<_>>()?;
    let actions: Vec<f64> = (0..n)
        .map(|i| lq_optimal_action(lq, i, i, multipliers[i], ubar_minus[i]))
        .collect();
    let population_mean: f64 = (0..n)
        .map(|j| lq.weights[j] * lq.density[j] * lq.xi[j] * actions[j])
        .sum();
    let costs = actions
        .iter()
        .zip(&lq.xi)
        .map(|(u, xi)| u * u - (1.0 - population_mean) * xi * u)
        .collect();
    Ok(ContinuumSolution {
        ubar_minus: ubar_minus.to_vec(),
        multipliers,
        actions,
        costs,
        population_mean,
    })
}

/// Runs the integral-equation solve followed by strategy evaluation.
pub fn solve(lq: &ContinuumLQ) -> Result<ContinuumSolution> {
    let v = fredholm_solve(lq)?;
    strategy_and_costs(lq, &v)
}

/// Builds the windowed-group lq.
pub fn windowed_scenario(alpha: f64, xi: XiProfile, n: usize) -> Result<ContinuumLQ> {
    ContinuumLQ::windowed(alpha, xi, n)
}

/// Cost, aggregator and Hamiltonian minimizer of a continuum game, as needed
/// by the necessary-condition checker.
pub trait ContinuumModel {
    /// `dJ/dv (u, v, t_j)`
    fn d_cost_dv(&self, u: f64, v: f64, j: usize) -> f64;
    /// `g(u, t_j)`
    fn aggregator(&self, u: f64, j: usize) -> f64;
    /// Minimizer of player `x_i`'s Hamiltonian at member `t_j`.
    fn minimizer(&self, i: usize, j: usize, m: MultiplierPair, ubar_minus: f64) -> f64;
}

impl ContinuumModel for ContinuumLQ {
    fn d_cost_dv(&self, u: f64, _v: f64, j: usize) -> f64 {
        self.xi[j] * u
    }

    fn aggregator(&self, u: f64, j: usize) -> f64 {
        self.xi[j] * u
    }

    fn minimizer(&self, i: usize, j: usize, m: MultiplierPair, ubar_minus: f64) -> f64 {
        lq_optimal_action(self, i, j, m, ubar_minus)
    }
}

/// Sampled functions `(u, chi2, p1, ubar_minus)` claimed to describe an
/// equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub actions: Vec<f64>,
    pub chi2: Vec<f64>,
    pub p1: Vec<f64>,
    pub ubar_minus: Vec<f64>,
}

impl From<&ContinuumSolution> for Candidate {
    fn from(s: &ContinuumSolution) -> Self {
        Candidate {
            actions: s.actions.clone(),
            chi2: s.multipliers.iter().map(|m| m.chi2).collect(),
            p1: s.multipliers.iter().map(|m| m.p1).collect(),
            ubar_minus: s.ubar_minus.clone(),
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let hi = xs.partition_point(|t| *t < x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[hi - 1], xs[hi]);
    let s = (x - x0) / (x1 - x0);
    ys[hi - 1] * (1.0 - s) + ys[hi] * s
}

/// Piecewise-linear resampling of sampled functions between grids.
pub fn resample(from: &[f64], values: &[f64], onto: &[f64]) -> Vec<f64> {
    onto.iter().map(|x| interpolate(from, values, *x)).collect()
}

impl Candidate {
    pub fn resample(&self, from: &ContinuumLQ, onto: &ContinuumLQ) -> Candidate {
        let r = |v: &[f64]| resample(from.grid(), v, onto.grid());
        Candidate {
            actions: r(&self.actions),
            chi2: r(&self.chi2),
            p1: r(&self.p1),
            ubar_minus: r(&self.ubar_minus),
        }
    }
}

/// Largest absolute defect over grid points of each necessary condition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PontryaginDefects {
    /// `p1 = int dL/dv dt` (costate boundary condition).
    pub costate: f64,
    /// `chi2 = int g(l) r dt` (state boundary condition).
    pub state: f64,
    /// `ubar_minus(x) = int g(u(t), t) (p - r(t, x)) dt`.
    pub mean_field: f64,
    /// `u(x) = l(x, chi2, p1, ubar_minus)`.
    pub consistency: f64,
}

impl PontryaginDefects {
    pub fn max(&self) -> f64 {
        self.costate
            .max(self.state)
            .max(self.mean_field)
            .max(self.consistency)
    }
}

pub fn pontryagin_defects<M: ContinuumModel>(
    lq: &ContinuumLQ,
    model: &M,
    cand: &Candidate,
) -> Result<PontryaginDefects> {
    let n = lq.len();
    for v in [&cand.actions, &cand.chi2, &cand.p1, &cand.ubar_minus] {
        check_len(n, v.len())?;
    }
    let mut d = PontryaginDefects::default();
    for i in 0..n {
        let m = MultiplierPair {
            chi2: cand.chi2[i],
            p1: cand.p1[i],
        };
        let v = cand.ubar_minus[i] + cand.chi2[i];
        let (mut costate, mut state, mut mean_field) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let (q, r) = (lq.weights[j], lq.r[(i, j)]);
            if r > 0.0 {
                let l = model.minimizer(i, j, m, cand.ubar_minus[i]);
                costate += q * model.d_cost_dv(l, v, j) * lq.w[(i, j)] * r;
                state += q * model.aggregator(l, j) * r;
            }
            mean_field += q * model.aggregator(cand.actions[j], j) * (lq.density[j] - r);
        }
        let own = model.minimizer(i, i, m, cand.ubar_minus[i]);
        d.costate = d.costate.max((cand.p1[i] - costate).abs());
        d.state = d.state.max((cand.chi2[i] - state).abs());
        d.mean_field = d.mean_field.max((cand.ubar_minus[i] - mean_field).abs());
        d.consistency = d.consistency.max((cand.actions[i] - own).abs());
    }
    Ok(d)
}

/// Max defect of the LQ game's necessary conditions under the trapezoid rule.
pub fn pontryagin_residual(lq: &ContinuumLQ, cand: &Candidate) -> Result<f64> {
    Ok(pontryagin_defects(lq, lq, cand)?.max())
}
