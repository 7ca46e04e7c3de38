//! Variational-inequality view of the equilibrium problem.
//!
//! The unknown `z` stacks the group strategies `utilde` (row-major, `N x N'`)
//! followed by the equilibrium actions `star` (`N`). The map `F(z)` stacks
//! each group's cost gradient and the consistency gaps
//! `star_k - utilde[(k, sigma(k))]`. Equilibria are exactly the points with
//! `F(z)^T (z' - z) >= 0` for every feasible `z'`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolveReport, SolverConfig};
use crate::error::{check_len, Error, Result};
use crate::model::{ActionBox, EquilibriumProfile, FiniteGame, GameModel};

/// Ratio test for accepting an extragradient step.
const STEP_RATIO: f64 = 0.9;
/// Divergence window and growth factor.
const DIVERGENCE_WINDOW: usize = 100;
const DIVERGENCE_GROWTH: f64 = 10.0;

fn map_packed<M: GameModel>(game: &FiniteGame<M>, z: &[f64]) -> Result<Vec<f64>> {
    let (n, d) = (game.num_types(), game.distinct_count());
    let star = &z[n * d..];
    let mut out = Vec::with_capacity(z.len());
    for k in 0..n {
        out.extend(game.grad_group_cost(k, &z[k * d..(k + 1) * d], star)?);
    }
    for k in 0..n {
        out.push(star[k] - z[k * d + game.space.sigma(k)]);
    }
    Ok(out)
}

fn pack<M: GameModel>(
    game: &FiniteGame<M>,
    utilde: &DMatrix<f64>,
    star: &[f64],
) -> Result<Vec<f64>> {
    let (n, d) = (game.num_types(), game.distinct_count());
    check_len(n, star.len())?;
    if utilde.nrows() != n || utilde.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: n * d,
            found: utilde.len(),
        });
    }
    let mut z = Vec::with_capacity(n * d + n);
    for k in 0..n {
        z.extend(utilde.row(k).iter());
    }
    z.extend_from_slice(star);
    Ok(z)
}

fn unpack(n: usize, d: usize, z: &[f64]) -> EquilibriumProfile {
    EquilibriumProfile {
        star: z[n * d..].to_vec(),
        group: DMatrix::from_row_slice(n, d, &z[..n * d]),
    }
}

fn natural_residual(bounds: ActionBox, z: &[f64], fz: &[f64], eta: f64) -> f64 {
    z.iter()
        .zip(fz)
        .map(|(z, f)| (z - bounds.project(z - eta * f)).abs())
        .fold(0.0, f64::max)
}

/// The stacked map `F(utilde, star)`.
pub fn vi_map<M: GameModel>(
    game: &FiniteGame<M>,
    utilde: &DMatrix<f64>,
    star: &[f64],
) -> Result<Vec<f64>> {
    let z = pack(game, utilde, star)?;
    map_packed(game, &z)
}

/// Natural-map residual `|z - P(z - eta F(z))|_inf`, zero exactly at solutions.
pub fn vi_residual<M: GameModel>(
    game: &FiniteGame<M>,
    utilde: &DMatrix<f64>,
    star: &[f64],
    eta: f64,
) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::Input("residual step must be positive".into()));
    }
    let z = pack(game, utilde, star)?;
    let fz = map_packed(game, &z)?;
    Ok(natural_residual(game.action_box(), &z, &fz, eta))
}

/// Korpelevich extragradient with box projection, started from the box
/// midpoint. Convergence is measured by the unit-step natural residual.
pub fn extragradient_solve<M: GameModel>(
    game: &FiniteGame<M>,
    cfg: &SolverConfig,
) -> Result<(EquilibriumProfile, SolveReport)> {
    cfg.validate()?;
    let (n, d) = (game.num_types(), game.distinct_count());
    let bounds = game.action_box();
    let project = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|x| bounds.project(x)).collect() };

    let mut z = vec![bounds.midpoint(); n * d + n];
    let mut eta = cfg.eg_step;
    let mut report = SolveReport::default();

    for iter in 0..cfg.max_outer {
        let f0 = map_packed(game, &z)?;
        let residual = natural_residual(bounds, &z, &f0, 1.0);
        report.residual_history.push(residual);
        report.final_residual = residual;
        report.iterations = iter;
        if residual <= cfg.tol {
            report.converged = true;
            return Ok((unpack(n, d, &z), report));
        }
        if iter >= DIVERGENCE_WINDOW
            && residual > DIVERGENCE_GROWTH * report.residual_history[iter - DIVERGENCE_WINDOW]
        {
            return Ok((unpack(n, d, &z), report));
        }

        let (f1, eta_used) = loop {
            let mid = project(z.iter().zip(&f0).map(|(z, f)| z - eta * f).collect());
            let f1 = map_packed(game, &mid)?;
            let (mut df, mut dz) = (0.0f64, 0.0f64);
            for i in 0..z.len() {
                df += (f1[i] - f0[i]).powi(2);
                dz += (mid[i] - z[i]).powi(2);
            }
            if eta * df.sqrt() <= STEP_RATIO * dz.sqrt() || eta < 1e-12 {
                break (f1, eta);
            }
            eta *= 0.5;
        };
        z = project(z.iter().zip(&f1).map(|(z, f)| z - eta_used * f).collect());
    }
    report.iterations = cfg.max_outer;
    Ok((unpack(n, d, &z), report))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityProbe {
    /// Smallest sampled `(F(z') - F(z))^T (z' - z) / |z' - z|^2`.
    pub min_value: f64,
    /// All sampled quotients were positive. Sampling evidence, not a proof.
    pub certificate: bool,
}

/// Samples `samples` pairs uniformly in the feasible box and reports the
/// smallest monotonicity quotient of `F`.
pub fn monotonicity_probe<M: GameModel>(
    game: &FiniteGame<M>,
    samples: usize,
    seed: u64,
) -> Result<MonotonicityProbe> {
    let (n, d) = (game.num_types(), game.distinct_count());
    let bounds = game.action_box();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n * d + n)
            .map(|_| bounds.lo + bounds.width() * rng.random::<f64>())
            .collect()
    };
    let mut min_value = f64::INFINITY;
    for _ in 0..samples {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let fa = map_packed(game, &a)?;
        let fb = map_packed(game, &b)?;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..a.len() {
            let dz = b[i] - a[i];
            num += (fb[i] - fa[i]) * dz;
            den += dz * dz;
        }
        if den > 0.0 {
            min_value = min_value.min(num / den);
        }
    }
    Ok(MonotonicityProbe {
        min_value,
        certificate: min_value > 0.0 && min_value.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::fixed_point_solve;
    use crate::model::{FiniteTypeSpace, GroupMeasure, QuadraticFishingModel, WeightKernel};
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

    /// `J = -c u^2 + u ubar`: concave in the own action.
    struct Concave;

    impl GameModel for Concave {
        fn num_types(&self) -> usize {
            1
        }
        fn action_box(&self) -> ActionBox {
            ActionBox::default()
        }
        fn cost(&self, u: f64, ubar: f64, _: usize) -> f64 {
            -2.0 * u * u + u * ubar
        }
        fn d_cost_du(&self, u: f64, ubar: f64, _: usize) -> f64 {
            -4.0 * u + ubar
        }
        fn d_cost_dubar(&self, u: f64, _: f64, _: usize) -> f64 {
            u
        }
        fn aggregator(&self, u: f64, _: usize) -> f64 {
            u
        }
        fn d_aggregator(&self, _: f64, _: usize) -> f64 {
            1.0
        }
    }

    #[test]
    fn vanishes_at_symmetric_kantian_point() {
        for alpha in [0.0, 0.5, 1.0] {
            let g = symmetric(alpha);
            let u = 1.0 / (3.0 + alpha);
            let f = vi_map(&g, &DMatrix::from_element(1, 1, u), &[u]).unwrap();
            assert!(f.iter().all(|x| x.abs() < 1e-15));
            assert!(vi_residual(&g, &DMatrix::from_element(1, 1, u), &[u], 1.0).unwrap() < 1e-10);
        }
    }

    #[test]
    fn consistency_block_is_affine_in_star() {
        let g = symmetric(0.5);
        let ut = DMatrix::from_element(1, 1, 0.3);
        let base = vi_map(&g, &ut, &[0.4]).unwrap();
        let moved = vi_map(&g, &ut, &[0.45]).unwrap();
        assert_abs_diff_eq!(moved[1] - base[1], 0.05, epsilon = 1e-15);
    }

    #[test]
    fn residual_positive_away_from_solution() {
        let g = symmetric(0.5);
        let r = vi_residual(&g, &DMatrix::from_element(1, 1, 1.0), &[1.0], 1.0).unwrap();
        assert!(r > 0.1);
        assert!(vi_residual(&g, &DMatrix::from_element(1, 1, 1.0), &[1.0], 0.0).is_err());
    }

    #[test]
    fn residual_is_lipschitz_on_samples() {
        let g = symmetric(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let (a, b, c, e) = (
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
                rng.random::<f64>(),
            );
            let ra = vi_residual(&g, &DMatrix::from_element(1, 1, a), &[b], 1.0).unwrap();
            let rb = vi_residual(&g, &DMatrix::from_element(1, 1, c), &[e], 1.0).unwrap();
            let dist = (a - c).abs().max((b - e).abs());
            if dist > 1e-9 {
                worst = worst.max((ra - rb).abs() / dist);
            }
        }
        // |F| has Lipschitz constant 4 in the max-norm here, so 5 bounds the residual's.
        assert!(worst <= 5.0, "sampled Lipschitz constant {worst}");
    }

    #[test]
    fn extragradient_symmetric() {
        let (eq, report) = extragradient_solve(&symmetric(0.5), &SolverConfig::default()).unwrap();
        assert!(report.converged);
        assert_abs_diff_eq!(eq.star[0], 1.0 / 3.5, epsilon = 1e-9);
    }

    #[test]
    fn extragradient_agrees_with_fixed_point() {
        let g = symmetric(0.2);
        let (a, _) = extragradient_solve(&g, &SolverConfig::default()).unwrap();
        let (b, _) = fixed_point_solve(&g, &SolverConfig::default()).unwrap();
        assert_abs_diff_eq!(a.star[0], b.star[0], epsilon = 1e-8);
    }

    #[test]
    fn probe_detects_monotone_and_nonmonotone_maps() {
        let p = monotonicity_probe(&symmetric(0.5), 1000, 1).unwrap();
        assert!(p.certificate && p.min_value > 0.0);
        assert_eq!(p, monotonicity_probe(&symmetric(0.5), 1000, 1).unwrap());

        let space = FiniteTypeSpace::from_individual(vec![vec![0.0]], vec![1.0]).unwrap();
        let measure = GroupMeasure::empty(&space);
        let g = FiniteGame::new(
            space,
            Concave,
            measure,
            WeightKernel::ones(1),
            RiskFactor::NEUTRAL,
        )
        .unwrap();
        let p = monotonicity_probe(&g, 200, 1).unwrap();
        assert!(!p.certificate && p.min_value < 0.0);
    }
}
