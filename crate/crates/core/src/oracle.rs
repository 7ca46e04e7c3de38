//! Brute-force reference solutions.
//!
//! Everything here works by exhaustive grid search over `U^{N'}` followed by
//! a few rounds of zooming in on the incumbent, so it needs neither
//! gradients nor convexity. Only a handful of distinct types are supported.

use nalgebra::DMatrix;

use crate::continuum::{self, ContinuumLQ};
use crate::error::{check_len, Error, Result};
use crate::finite::{extragradient_solve, SolverConfig};
use crate::model::{
    aggregate_statistic, ActionBox, FiniteGame, FiniteTypeSpace, GameModel, GroupMeasure,
    QuadraticFishingModel, WeightKernel,
};
use crate::risk::RiskFactor;

/// Largest number of distinct types the grid search accepts.
pub const MAX_GRID_DIM: usize = 3;
/// Zoom rounds after the initial grid.
pub const REFINEMENT_ROUNDS: usize = 5;

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Spacing of the final refinement grid.
pub fn grid_resolution(bounds: ActionBox, grid_n: usize) -> f64 {
    let shrink = 2.0 / (grid_n - 1) as f64;
    bounds.width() / (grid_n - 1) as f64 * shrink.powi(REFINEMENT_ROUNDS as i32)
}

/// Minimizes `f` over the box `U^dim`.
///
/// Points are visited in lexicographic order and only a strict improvement
/// replaces the incumbent, so ties resolve to the lexicographically smallest
/// grid point. Each refinement round resamples `grid_n` points per axis on
/// `[x - h, x + h]` (clipped to the box) where `h` is the previous spacing.
pub fn grid_minimize<F>(dim: usize, bounds: ActionBox, grid_n: usize, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if dim == 0 {
        return Ok(Vec::new());
    }
    if dim > MAX_GRID_DIM {
        return Err(Error::Unsupported(format!(
            "grid search over {dim} distinct types (at most {MAX_GRID_DIM})"
        )));
    }
    if grid_n < 2 {
        return Err(Error::Input(
            "grid needs at least two points per axis".into(),
        ));
    }
    let mut axes = vec![axis(bounds.lo, bounds.hi, grid_n); dim];
    let mut spacing = bounds.width() / (grid_n - 1) as f64;
    let mut best = vec![bounds.lo; dim];

    for round in 0..=REFINEMENT_ROUNDS {
        let mut best_val = f64::INFINITY;
        let total = grid_n.pow(dim as u32);
        let mut point = vec![0.0; dim];
        // lexicographic order: the first axis varies slowest
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..dim).rev() {
                point[a] = axes[a][rem % grid_n];
                rem /= grid_n;
            }
            let v = f(&point)?;
            if v < best_val {
                best_val = v;
                best.copy_from_slice(&point);
            }
        }
        if !best_val.is_finite() {
            return Err(Error::Invariant(
                "objective is not finite anywhere on the grid".into(),
            ));
        }
        if round == REFINEMENT_ROUNDS {
            break;
        }
        for a in 0..dim {
            let lo = (best[a] - spacing).max(bounds.lo);
            let hi = (best[a] + spacing).min(bounds.hi);
            axes[a] = axis(lo, hi, grid_n);
        }
        spacing = 2.0 * spacing / (grid_n - 1) as f64;
    }
    Ok(best)
}

/// Grid minimizer of type `k`'s group cost against `star`. Works for every
/// risk factor, including the worst-off and best-off limits.
pub fn brute_force_group_min<M: GameModel>(
    game: &FiniteGame<M>,
    k: usize,
    star: &[f64],
    grid_n: usize,
) -> Result<Vec<f64>> {
    check_len(game.num_types(), star.len())?;
    grid_minimize(game.distinct_count(), game.action_box(), grid_n, |u| {
        game.group_cost(k, u, star)
    })
}

fn expand(space: &FiniteTypeSpace, u: &[f64]) -> Vec<f64> {
    space.sigmas().iter().map(|&s| u[s]).collect()
}

fn population_costs<M: GameModel + ?Sized>(
    space: &FiniteTypeSpace,
    model: &M,
    u: &[f64],
) -> Result<Vec<f64>> {
    let profile = expand(space, u);
    let ubar = aggregate_statistic(&profile, space, model)?;
    Ok((0..space.len())
        .map(|k| model.cost(profile[k], ubar, k))
        .collect())
}

/// Profile minimizing the population mean cost `sum_k p_k J(u_k, ubar, k)`.
pub fn brute_force_social_opt<M: GameModel + ?Sized>(
    space: &FiniteTypeSpace,
    model: &M,
    grid_n: usize,
) -> Result<Vec<f64>> {
    check_len(space.len(), model.num_types())?;
    let u = grid_minimize(space.distinct_count(), model.action_box(), grid_n, |u| {
        let costs = population_costs(space, model, u)?;
        Ok(costs.iter().zip(space.p()).map(|(c, p)| c * p).sum())
    })?;
    Ok(expand(space, &u))
}

/// Profile minimizing the largest cost among types with positive mass.
pub fn brute_force_minimax<M: GameModel + ?Sized>(
    space: &FiniteTypeSpace,
    model: &M,
    grid_n: usize,
) -> Result<Vec<f64>> {
    check_len(space.len(), model.num_types())?;
    let u = grid_minimize(space.distinct_count(), model.action_box(), grid_n, |u| {
        let costs = population_costs(space, model, u)?;
        Ok(costs
            .iter()
            .zip(space.p())
            .filter(|(_, p)| **p > 0.0)
            .map(|(c, _)| *c)
            .fold(f64::NEG_INFINITY, f64::max))
    })?;
    Ok(expand(space, &u))
}

/// Finite game sampling a continuum game at `n_types` equispaced types.
///
/// Type `k` sits at `t_k` with mass equal to its trapezoid weight, cost
/// `u^2 - (1 - ubar) xi(t_k) u`, and group `r_kj = r(t_j, t_k) p_j`.
pub fn discretize_continuum(
    alpha_kernel: impl Fn(f64, f64) -> f64,
    xi: impl Fn(f64) -> f64,
    n_types: usize,
) -> Result<FiniteGame<QuadraticFishingModel>> {
    if n_types < 2 {
        return Err(Error::Input("need at least two sampled types".into()));
    }
    let sample = ContinuumLQ::new(
        continuum::uniform_grid(n_types),
        vec![1.0; n_types],
        vec![1.0; n_types],
        DMatrix::zeros(n_types, n_types),
        DMatrix::from_element(n_types, n_types, 1.0),
    )?;
    let t = sample.grid().to_vec();
    let p = sample.quadrature_weights().to_vec();
    let b: Vec<f64> = t.iter().map(|t| xi(*t)).collect();
    let model = QuadraticFishingModel::new(vec![1.0; n_types], b, ActionBox::default())?;
    let space = FiniteTypeSpace::new(model.descriptors(), (0..n_types).collect(), p.clone())?;
    let r = DMatrix::from_fn(n_types, n_types, |k, j| alpha_kernel(t[j], t[k]) * p[j]);
    let measure = GroupMeasure::new(r, &space)?;
    FiniteGame::new(
        space,
        model,
        measure,
        WeightKernel::ones(n_types),
        RiskFactor::NEUTRAL,
    )
}

/// Solves the `n_types` discretization of `lq` by extragradient and
/// returns its sup-norm distance at the sampled types from the continuum
/// solution on the game's own grid (linearly interpolated).
///
/// The sampled types must each belong to their own group, and `n_types`
/// must be small enough for the dense finite solver.
pub fn discretized_continuum_crosscheck(lq: &ContinuumLQ, n_types: usize) -> Result<f64> {
    if !lq.has_unit_weights() {
        return Err(Error::Unsupported("crosscheck assumes w = 1".into()));
    }
    if lq.density().iter().any(|p| *p != 1.0) {
        return Err(Error::Unsupported(
            "crosscheck assumes the uniform type density".into(),
        ));
    }
    let reference = continuum::solve(lq)?;
    let grid = lq.grid();
    let n = lq.len();
    // Kernel and efficiency as piecewise-linear functions of the samples.
    let xi = |t: f64| continuum::resample(grid, lq.xi(), &[t])[0];
    let kernel = |t: f64, x: f64| {
        let i = nearest(grid, x);
        let row: Vec<f64> = (0..n).map(|j| lq.group_density(i, j)).collect();
        continuum::resample(grid, &row, &[t])[0]
    };
    let game = discretize_continuum(kernel, xi, n_types)?;
    if (0..n_types).any(|k| game.measure.mass(k) > 0.0 && game.measure.weight(k, k) <= 0.0) {
        return Err(Error::Unsupported(
            "a sampled type lies outside its own group".into(),
        ));
    }
    let cfg = SolverConfig {
        eg_step: 1.0,
        max_outer: 200_000,
        ..SolverConfig::default()
    };
    let (eq, report) = extragradient_solve(&game, &cfg)?;
    if !report.converged {
        return Err(Error::Invariant(format!(
            "extragradient stopped after {} iterations at residual {:.3e}",
            report.iterations, report.final_residual
        )));
    }
    let t = continuum::uniform_grid(n_types);
    let expected = continuum::resample(grid, &reference.actions, &t);
    Ok(eq
        .star
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn nearest(grid: &[f64], x: f64) -> usize {
    let hi = grid.partition_point(|t| *t < x).min(grid.len() - 1);
    if hi > 0 && (x - grid[hi - 1]) < (grid[hi] - x) {
        hi - 1
    } else {
        hi
    }
}
