//! Named constructions of the worked examples.

use crate::continuum::{ContinuumLQ, XiProfile};
use crate::error::{Error, Result};
use crate::model::{
    ActionBox, FiniteGame, FiniteTypeSpace, GroupMeasure, QuadraticFishingModel, WeightKernel,
};
use crate::risk::RiskFactor;

pub const SYMMETRIC_FISHING: &str = "symmetric_fishing";
pub const FOUR_TYPE: &str = "four_type";
pub const CONTINUUM_UNIFORM: &str = "continuum_uniform";
pub const CONTINUUM_WINDOWED: &str = "continuum_windowed";

pub const SCENARIO_NAMES: [&str; 4] = [
    SYMMETRIC_FISHING,
    FOUR_TYPE,
    CONTINUUM_UNIFORM,
    CONTINUUM_WINDOWED,
];

/// Default continuum grid size.
pub const DEFAULT_GRID_N: usize = 201;

/// Masses of the four types `(1,1), (1,2), (2,1), (2,2)`.
pub const FOUR_TYPE_MASSES: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Finite,
    Continuum,
}

pub fn kind_of(name: &str) -> Result<ScenarioKind> {
    match name {
        SYMMETRIC_FISHING | FOUR_TYPE => Ok(ScenarioKind::Finite),
        CONTINUUM_UNIFORM | CONTINUUM_WINDOWED => Ok(ScenarioKind::Continuum),
        other => Err(Error::Input(format!("unknown scenario '{other}'"))),
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Input(format!("alpha = {alpha} outside [0, 1]")))
    }
}

/// Finite-type scenario with a quadratic fishing model and uniform groups.
#[derive(Debug, Clone)]
pub struct FiniteScenario {
    pub name: &'static str,
    pub alpha: f64,
    pub space: FiniteTypeSpace,
    pub model: QuadraticFishingModel,
    pub measure: GroupMeasure,
    pub weights: WeightKernel,
    pub beta: RiskFactor,
}

impl FiniteScenario {
    fn uniform(
        name: &'static str,
        alpha: f64,
        effort: Vec<f64>,
        efficiency: Vec<f64>,
        p: Vec<f64>,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let n = p.len();
        let model = QuadraticFishingModel::new(effort, efficiency, ActionBox::default())?;
        let space = FiniteTypeSpace::from_individual(model.descriptors(), p)?;
        let measure = GroupMeasure::uniform(&space, alpha)?;
        Ok(FiniteScenario {
            name,
            alpha,
            space,
            model,
            measure,
            weights: WeightKernel::ones(n),
            beta: RiskFactor::NEUTRAL,
        })
    }

    pub fn game(&self) -> Result<FiniteGame<QuadraticFishingModel>> {
        FiniteGame::new(
            self.space.clone(),
            self.model.clone(),
            self.measure.clone(),
            self.weights.clone(),
            self.beta,
        )
    }
}

/// Closed-form curves of the symmetric fishing game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricReference {
    pub kantian: f64,
    pub altruistic: f64,
    pub kantian_cost: f64,
    pub altruistic_cost: f64,
}

/// Cost `2u^2 - u` of the symmetric profile `u`.
pub fn symmetric_cost(u: f64) -> f64 {
    2.0 * u * u - u
}

pub fn symmetric_reference(alpha: f64) -> SymmetricReference {
    let kantian = 1.0 / (3.0 + alpha);
    let altruistic = (2.0 - alpha) / (6.0 - 2.0 * alpha);
    SymmetricReference {
        kantian,
        altruistic,
        kantian_cost: symmetric_cost(kantian),
        altruistic_cost: symmetric_cost(altruistic),
    }
}

/// One type with `J = u^2 - (1 - ubar) u`; every group holds the fraction
/// `alpha` of the population.
pub fn symmetric_fishing(alpha: f64) -> Result<FiniteScenario> {
    FiniteScenario::uniform(SYMMETRIC_FISHING, alpha, vec![1.0], vec![1.0], vec![1.0])
}

/// Types `x = (x1, x2)` in `{1,2}^2` with `J = x2 u^2 - (1 - ubar) x1 u`,
/// listed as `(1,1), (1,2), (2,1), (2,2)`.
pub fn four_type_game(alpha: f64) -> Result<FiniteScenario> {
    FiniteScenario::uniform(
        FOUR_TYPE,
        alpha,
        vec![1.0, 2.0, 1.0, 2.0],
        vec![1.0, 1.0, 2.0, 2.0],
        FOUR_TYPE_MASSES.to_vec(),
    )
}

#[derive(Debug, Clone)]
pub struct ContinuumScenario {
    pub name: &'static str,
    pub alpha: f64,
    pub xi: XiProfile,
    pub lq: ContinuumLQ,
}

fn xi_squared_integral(xi: XiProfile) -> f64 {
    match xi {
        XiProfile::Constant => 1.0,
        XiProfile::Linear => 1.0 / 3.0,
        XiProfile::Affine => 13.0 / 12.0,
    }
}

impl ContinuumScenario {
    /// Exact equilibrium `u(x) = xi(x) / ((C + 1)(2 + (1 - alpha) int xi^2 / (C + 1)))`
    /// with `C = alpha int xi^2`, on the scenario grid. Only the uniform kernel
    /// has one.
    pub fn reference(&self) -> Option<Vec<f64>> {
        if self.name != CONTINUUM_UNIFORM {
            return None;
        }
        let q = xi_squared_integral(self.xi);
        let c = self.alpha * q;
        let den = (c + 1.0) * (2.0 + (1.0 - self.alpha) * q / (c + 1.0));
        Some(
            self.lq
                .grid()
                .iter()
                .map(|t| self.xi.eval(*t) / den)
                .collect(),
        )
    }
}

pub fn continuum_uniform(alpha: f64, xi: XiProfile, n: usize) -> Result<ContinuumScenario> {
    check_alpha(alpha)?;
    Ok(ContinuumScenario {
        name: CONTINUUM_UNIFORM,
        alpha,
        xi,
        lq: ContinuumLQ::uniform_kernel(alpha, xi, n)?,
    })
}

pub fn continuum_windowed(alpha: f64, xi: XiProfile, n: usize) -> Result<ContinuumScenario> {
    check_alpha(alpha)?;
    Ok(ContinuumScenario {
        name: CONTINUUM_WINDOWED,
        alpha,
        xi,
        lq: ContinuumLQ::windowed(alpha, xi, n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum;
    use crate::finite::{fixed_point_solve, quadratic_rkn_direct, SolverConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_reference_values() {
        for a in [0.0, 1.0] {
            let r = symmetric_reference(a);
            assert_abs_diff_eq!(r.kantian, r.altruistic, epsilon = 1e-15);
        }
        assert_eq!(symmetric_reference(0.0).kantian, 1.0 / 3.0);
        assert_eq!(symmetric_reference(1.0).altruistic, 0.25);
        let r = symmetric_reference(0.5);
        assert_abs_diff_eq!(r.kantian, 2.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.altruistic, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_solver_matches_reference() {
        for i in 0..=10 {
            let alpha = i as f64 / 10.0;
            let sc = symmetric_fishing(alpha).unwrap();
            let (eq, _) = fixed_point_solve(&sc.game().unwrap(), &SolverConfig::default()).unwrap();
            assert_abs_diff_eq!(
                eq.star[0],
                symmetric_reference(alpha).kantian,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn four_type_data() {
        let sc = four_type_game(0.3).unwrap();
        assert_eq!(sc.space.p(), &FOUR_TYPE_MASSES);
        assert_eq!(sc.space.distinct_count(), 4);
        assert_eq!(sc.model.effort(), &[1.0, 2.0, 1.0, 2.0]);
        assert_eq!(sc.model.efficiency(), &[1.0, 1.0, 2.0, 2.0]);
        assert!(quadratic_rkn_direct(&sc.space, &sc.model, 0.3).is_ok());
        assert!(four_type_game(1.5).is_err());
    }

    #[test]
    fn continuum_references() {
        let sc = continuum_uniform(0.4, XiProfile::Constant, 51).unwrap();
        assert!(sc
            .reference()
            .unwrap()
            .iter()
            .all(|u| (u - 1.0 / 3.4).abs() < 1e-15));
        let sc = continuum_uniform(0.0, XiProfile::Linear, 51).unwrap();
        for (t, u) in sc.lq.grid().iter().zip(sc.reference().unwrap()) {
            assert_abs_diff_eq!(u, 3.0 * t / 7.0, epsilon = 1e-15);
        }
        assert!(continuum_windowed(0.4, XiProfile::Constant, 51)
            .unwrap()
            .reference()
            .is_none());
    }

    #[test]
    fn continuum_solution_matches_reference_to_quadrature_order() {
        let sc = continuum_uniform(0.6, XiProfile::Affine, 401).unwrap();
        let sol = continuum::solve(&sc.lq).unwrap();
        let reference = sc.reference().unwrap();
        let err = sol
            .actions
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn names() {
        for name in SCENARIO_NAMES {
            assert!(kind_of(name).is_ok());
        }
        assert!(kind_of("nope").is_err());
    }
}
