use nalgebra::DMatrix;

use super::{SolveReport, SolverConfig};
use crate::error::{check_len, Result};
use crate::model::{EquilibriumProfile, FiniteGame, GameModel};
use crate::oracle;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub actions: Vec<f64>,
    /// Projected-gradient residual `|x - P(x - grad)|_inf` at return.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn warm_start<M: GameModel>(game: &FiniteGame<M>, k: usize, star: &[f64]) -> Vec<f64> {
    let bounds = game.action_box();
    let mut x = vec![f64::NAN; game.distinct_count()];
    for (i, s) in star.iter().enumerate() {
        let j = game.space.sigma(i);
        if x[j].is_nan() {
            x[j] = *s;
        }
    }
    x[game.space.sigma(k)] = star[k];
    x.into_iter().map(|v| bounds.project(v)).collect()
}

/// Minimizes type `k`'s group cost over the distinct-type strategies by
/// projected gradient with Barzilai-Borwein trial steps and Armijo
/// backtracking, warm-started from `star`.
pub fn group_best_response<M: GameModel>(
    game: &FiniteGame<M>,
    k: usize,
    star: &[f64],
    cfg: &SolverConfig,
) -> Result<BestResponse> {
    check_len(game.num_types(), star.len())?;
    let bounds = game.action_box();
    let project = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| bounds.project(*x)).collect() };
    let pg_norm = |x: &[f64], g: &[f64]| -> f64 {
        x.iter()
            .zip(g)
            .map(|(x, g)| (x - bounds.project(x - g)).abs())
            .fold(0.0, f64::max)
    };

    let mut x = warm_start(game, k, star);
    let mut f = game.group_cost(k, &x, star)?;
    let mut g = game.grad_group_cost(k, &x, star)?;
    let mut step = 1.0;

    for it in 0..cfg.inner_max_iter {
        let residual = pg_norm(&x, &g);
        if residual <= cfg.inner_tol {
            return Ok(BestResponse {
                actions: x,
                residual,
                iterations: it,
                converged: true,
            });
        }

        let slack = 8.0 * f64::EPSILON * f.abs().max(1.0);
        let mut t = step;
        let (x_new, f_new) = loop {
            let trial: Vec<f64> =
                project(&x.iter().zip(&g).map(|(x, g)| x - t * g).collect::<Vec<_>>());
            let f_trial = game.group_cost(k, &trial, star)?;
            let descent: f64 = g
                .iter()
                .zip(trial.iter().zip(&x))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            if f_trial <= f + 1e-4 * descent + slack || t < 1e-20 {
                break (trial, f_trial);
            }
            t *= 0.5;
        };
        let g_new = game.grad_group_cost(k, &x_new, star)?;

        let (mut ss, mut sy) = (0.0, 0.0);
        for j in 0..x.len() {
            let s = x_new[j] - x[j];
            ss += s * s;
            sy += s * (g_new[j] - g[j]);
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-10, 1e10)
        } else {
            (2.0 * t).min(1e10)
        };
        if ss == 0.0 {
            // Stalled at roundoff level.
            let residual = pg_norm(&x_new, &g_new);
            return Ok(BestResponse {
                actions: x_new,
                residual,
                iterations: it + 1,
                converged: residual <= cfg.inner_tol,
            });
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    let residual = pg_norm(&x, &g);
    Ok(BestResponse {
        actions: x,
        residual,
        iterations: cfg.inner_max_iter,
        converged: residual <= cfg.inner_tol,
    })
}

/// Damped iteration `star <- (1 - damping) star + damping * diag(best responses)`
/// from the box midpoint. Infinite risk factors use grid best responses, and
/// the tolerance is then floored at ten times the grid resolution, below
/// which the quantized responses can cycle.
pub fn fixed_point_solve<M: GameModel>(
    game: &FiniteGame<M>,
    cfg: &SolverConfig,
) -> Result<(EquilibriumProfile, SolveReport)> {
    cfg.validate()?;
    let (n, d) = (game.num_types(), game.distinct_count());
    let mut star = vec![game.action_box().midpoint(); n];
    let mut report = SolveReport::default();
    let mut group = DMatrix::zeros(n, d);
    let tol = if game.beta.is_finite() {
        cfg.tol
    } else {
        cfg.tol
            .max(10.0 * oracle::grid_resolution(game.action_box(), cfg.oracle_grid))
    };

    for iter in 0..cfg.max_outer {
        let mut failures = 0;
        for k in 0..n {
            let row = if game.beta.is_finite() {
                let br = group_best_response(game, k, &star, cfg)?;
                if !br.converged {
                    failures += 1;
                }
                br.actions
            } else {
                oracle::brute_force_group_min(game, k, &star, cfg.oracle_grid)?
            };
            for (j, v) in row.into_iter().enumerate() {
                group[(k, j)] = v;
            }
        }
        let residual = (0..n)
            .map(|k| (star[k] - group[(k, game.space.sigma(k))]).abs())
            .fold(0.0, f64::max);
        report.residual_history.push(residual);
        report.iterations = iter + 1;
        report.final_residual = residual;
        report.inner_failures = failures;
        if residual <= tol {
            report.converged = failures == 0;
            break;
        }
        for k in 0..n {
            star[k] = (1.0 - cfg.damping) * star[k] + cfg.damping * group[(k, game.space.sigma(k))];
        }
    }
    Ok((EquilibriumProfile { star, group }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::{build_special_case, SpecialCase};
    use crate::model::{
        ActionBox, FiniteTypeSpace, GroupMeasure, QuadraticFishingModel, WeightKernel,
    };
    use crate::risk::RiskFactor;
    use approx::assert_abs_diff_eq;

    fn symmetric(alpha: f64) -> FiniteGame<QuadraticFishingModel> {
        let model = QuadraticFishingModel::new(vec![1.0], vec![1.0], ActionBox::default()).unwrap();
        let space = FiniteTypeSpace::from_individual(model.descriptors(), vec![1.0]).unwrap();
        let measure = GroupMeasure::uniform(&space, alpha).unwrap();
        FiniteGame::new(
            space,
            model,
            measure,
            WeightKernel::ones(1),
            RiskFactor::NEUTRAL,
        )
        .unwrap()
    }

    #[test]
    fn full_group_best_response_is_social_optimum() {
        let g = symmetric(1.0);
        let cfg = SolverConfig::default();
        for s in [0.0, 0.3, 1.0] {
            let br = group_best_response(&g, 0, &[s], &cfg).unwrap();
            assert!(br.converged);
            assert_abs_diff_eq!(br.actions[0], 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_group_best_response_is_nash_reply() {
        let g = symmetric(0.0);
        let br = group_best_response(&g, 0, &[1.0 / 3.0], &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(br.actions[0], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn inner_cap_is_reported() {
        let g = symmetric(0.5);
        let cfg = SolverConfig {
            inner_max_iter: 0,
            ..SolverConfig::default()
        };
        let br = group_best_response(&g, 0, &[0.9], &cfg).unwrap();
        assert!(!br.converged);
    }

    #[test]
    fn symmetric_kantian_fixed_point() {
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            let (eq, report) =
                fixed_point_solve(&symmetric(alpha), &SolverConfig::default()).unwrap();
            assert!(report.converged);
            assert!(report.final_residual <= 1e-10);
            assert_abs_diff_eq!(eq.star[0], 1.0 / (3.0 + alpha), epsilon = 1e-9);
        }
    }

    #[test]
    fn nonconvergence_is_reported() {
        let cfg = SolverConfig {
            max_outer: 2,
            ..SolverConfig::default()
        };
        let (_, report) = fixed_point_solve(&symmetric(0.5), &cfg).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 2);
        assert_eq!(report.residual_history.len(), 2);
    }

    #[test]
    fn harsanyi_matches_social_optimum_oracle() {
        let model =
            QuadraticFishingModel::new(vec![1.0, 2.0], vec![1.0, 1.5], ActionBox::default())
                .unwrap();
        let space = FiniteTypeSpace::from_individual(model.descriptors(), vec![0.4, 0.6]).unwrap();
        let (measure, beta, weights) = build_special_case(&SpecialCase::Harsanyi, &space).unwrap();
        let game = FiniteGame::new(space.clone(), model.clone(), measure, weights, beta).unwrap();
        let (eq, report) = fixed_point_solve(&game, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        let oracle = oracle::brute_force_social_opt(&space, &model, 41).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(eq.star[k], oracle[k], epsilon = 1e-4);
        }
    }
}
