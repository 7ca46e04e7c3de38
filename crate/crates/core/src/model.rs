//! Finite-type game data: type space, virtual-group measure, importance
//! weights, cost/aggregator evaluators, and the group cost seen by each type.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::risk::{risk_aggregate, risk_weights, RiskFactor};

const PROB_TOL: f64 = 1e-12;

/// Closed scalar action interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBox {
    pub lo: f64,
    pub hi: f64,
}

impl ActionBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Input(format!(
                "action box [{lo}, {hi}] is empty or unbounded"
            )));
        }
        Ok(ActionBox { lo, hi })
    }

    pub fn project(&self, u: f64) -> f64 {
        u.clamp(self.lo, self.hi)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.lo && u <= self.hi
    }
}

impl Default for ActionBox {
    fn default() -> Self {
        ActionBox { lo: 0.0, hi: 1.0 }
    }
}

/// Finitely many (individual type, social type) pairs with their population
/// shares. Types with identical individual descriptors share a column in a
/// group's strategy; `sigma` maps each type onto that column.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteTypeSpace {
    individual: Vec<Vec<f64>>,
    social: Vec<usize>,
    p: Vec<f64>,
    sigma: Vec<usize>,
    distinct: usize,
}

impl FiniteTypeSpace {
    pub fn new(individual: Vec<Vec<f64>>, social: Vec<usize>, p: Vec<f64>) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            return Err(Error::Input(
                "type space must contain at least one type".into(),
            ));
        }
        check_len(n, individual.len())?;
        check_len(n, social.len())?;
        if p.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Invariant("every type share must be positive".into()));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::Invariant(format!(
                "type shares sum to {total}, not 1"
            )));
        }

        let mut reps: Vec<usize> = Vec::new();
        let mut sigma = Vec::with_capacity(n);
        for k in 0..n {
            match reps.iter().position(|&r| individual[r] == individual[k]) {
                Some(j) => sigma.push(j),
                None => {
                    sigma.push(reps.len());
                    reps.push(k);
                }
            }
        }
        Ok(FiniteTypeSpace {
            individual,
            social,
            p,
            sigma,
            distinct: reps.len(),
        })
    }

    /// One social type per individual type, all descriptors taken as given.
    pub fn from_individual(individual: Vec<Vec<f64>>, p: Vec<f64>) -> Result<Self> {
        let social = (0..p.len()).collect();
        Self::new(individual, social, p)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn distinct_count(&self) -> usize {
        self.distinct
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn sigma(&self, k: usize) -> usize {
        self.sigma[k]
    }

    pub fn sigmas(&self) -> &[usize] {
        &self.sigma
    }

    pub fn individual(&self, k: usize) -> &[f64] {
        &self.individual[k]
    }

    pub fn social(&self, k: usize) -> usize {
        self.social[k]
    }
}

/// Sub-probability weights `r[(k, k')]`: the share of type `k'` that a player
/// of type `k` imagines in its virtual group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasure {
    r: DMatrix<f64>,
    masses: Vec<f64>,
}

impl GroupMeasure {
    pub fn new(r: DMatrix<f64>, space: &FiniteTypeSpace) -> Result<Self> {
        let n = space.len();
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.nrows().max(r.ncols()),
            });
        }
        for k in 0..n {
            for j in 0..n {
                let v = r[(k, j)];
                if !(v.is_finite() && v >= 0.0 && v <= space.p()[j] + PROB_TOL) {
                    return Err(Error::Invariant(format!(
                        "r[{k},{j}] = {v} outside [0, p_{j} = {}]",
                        space.p()[j]
                    )));
                }
            }
        }
        let masses: Vec<f64> = (0..n).map(|k| r.row(k).sum()).collect();
        if let Some(m) = masses.iter().find(|m| **m > 1.0 + PROB_TOL) {
            return Err(Error::Invariant(format!("group mass {m} exceeds 1")));
        }
        Ok(GroupMeasure { r, masses })
    }

    /// Every group is the singleton of its owner.
    pub fn empty(space: &FiniteTypeSpace) -> Self {
        let n = space.len();
        GroupMeasure {
            r: DMatrix::zeros(n, n),
            masses: vec![0.0; n],
        }
    }

    /// `r[(k, k')] = alpha * p_k'` for every `k`.
    pub fn uniform(space: &FiniteTypeSpace, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Input(format!(
                "group fraction {alpha} outside [0, 1]"
            )));
        }
        let n = space.len();
        let r = DMatrix::from_fn(n, n, |_, j| alpha * space.p()[j]);
        Self::new(r, space)
    }

    pub fn weight(&self, k: usize, member: usize) -> f64 {
        self.r[(k, member)]
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.r.row(k).iter().copied().collect()
    }

    pub fn mass(&self, k: usize) -> f64 {
        self.masses[k]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }
}

/// Importance weights `w[(k, k')]` applied by type `k` to member `k'`. Only
/// ratios within a row matter for the group's choice.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightKernel {
    w: DMatrix<f64>,
}

impl WeightKernel {
    pub fn new(w: DMatrix<f64>, measure: &GroupMeasure) -> Result<Self> {
        let r = measure.matrix();
        if w.shape() != r.shape() {
            return Err(Error::DimensionMismatch {
                expected: r.nrows(),
                found: w.nrows(),
            });
        }
        for ((wv, rv), idx) in w.iter().zip(r.iter()).zip(0..) {
            if !(wv.is_finite() && *wv >= 0.0) || (*rv > 0.0 && *wv <= 0.0) {
                return Err(Error::Invariant(format!(
                    "weight {wv} at entry {idx} must be positive where the group weight is positive"
                )));
            }
        }
        Ok(WeightKernel { w })
    }

    pub fn ones(n: usize) -> Self {
        WeightKernel {
            w: DMatrix::from_element(n, n, 1.0),
        }
    }

    pub fn weight(&self, k: usize, member: usize) -> f64 {
        self.w[(k, member)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }
}

/// Per-type scalar cost `J(u, ubar, k)` and aggregator `g(u, k)` with their
/// first derivatives.
pub trait GameModel {
    fn num_types(&self) -> usize;
    fn action_box(&self) -> ActionBox;
    fn cost(&self, u: f64, ubar: f64, k: usize) -> f64;
    fn d_cost_du(&self, u: f64, ubar: f64, k: usize) -> f64;
    fn d_cost_dubar(&self, u: f64, ubar: f64, k: usize) -> f64;
    fn aggregator(&self, u: f64, k: usize) -> f64;
    fn d_aggregator(&self, u: f64, k: usize) -> f64;
}

/// Fishing-game family `J = a_k u^2 - (1 - ubar) b_k u`, `g = b_k u`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFishingModel {
    effort: Vec<f64>,
    efficiency: Vec<f64>,
    bounds: ActionBox,
}

impl QuadraticFishingModel {
    pub fn new(effort: Vec<f64>, efficiency: Vec<f64>, bounds: ActionBox) -> Result<Self> {
        check_len(effort.len(), efficiency.len())?;
        if effort
            .iter()
            .chain(&efficiency)
            .any(|x| !(x.is_finite() && *x > 0.0))
        {
            return Err(Error::Invariant(
                "effort weights and efficiencies must be positive".into(),
            ));
        }
        Ok(QuadraticFishingModel {
            effort,
            efficiency,
            bounds,
        })
    }

    /// Effort weights `a_k`.
    pub fn effort(&self) -> &[f64] {
        &self.effort
    }

    /// Efficiencies `b_k`.
    pub fn efficiency(&self) -> &[f64] {
        &self.efficiency
    }

    /// Individual descriptors `(a_k, b_k)` for building a type space.
    pub fn descriptors(&self) -> Vec<Vec<f64>> {
        self.effort
            .iter()
            .zip(&self.efficiency)
            .map(|(a, b)| vec![*a, *b])
            .collect()
    }
}

impl GameModel for QuadraticFishingModel {
    fn num_types(&self) -> usize {
        self.effort.len()
    }

    fn action_box(&self) -> ActionBox {
        self.bounds
    }

    fn cost(&self, u: f64, ubar: f64, k: usize) -> f64 {
        self.effort[k] * u * u - (1.0 - ubar) * self.efficiency[k] * u
    }

    fn d_cost_du(&self, u: f64, ubar: f64, k: usize) -> f64 {
        2.0 * self.effort[k] * u - (1.0 - ubar) * self.efficiency[k]
    }

    fn d_cost_dubar(&self, u: f64, _ubar: f64, k: usize) -> f64 {
        self.efficiency[k] * u
    }

    fn aggregator(&self, u: f64, k: usize) -> f64 {
        self.efficiency[k] * u
    }

    fn d_aggregator(&self, _u: f64, k: usize) -> f64 {
        self.efficiency[k]
    }
}

/// Equilibrium actions `star[k]` together with the imagined group strategies
/// `group[(k, j)]` over distinct individual types `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    pub star: Vec<f64>,
    pub group: DMatrix<f64>,
}

impl EquilibriumProfile {
    /// `max_k |star_k - group[(k, sigma(k))]|`.
    pub fn consistency_residual(&self, space: &FiniteTypeSpace) -> f64 {
        self.star
            .iter()
            .enumerate()
            .map(|(k, s)| (s - self.group[(k, space.sigma(k))]).abs())
            .fold(0.0, f64::max)
    }
}

/// `ubar = sum_k p_k g(profile_k, k)`.
pub fn aggregate_statistic<M: GameModel + ?Sized>(
    profile: &[f64],
    space: &FiniteTypeSpace,
    model: &M,
) -> Result<f64> {
    check_len(space.len(), profile.len())?;
    Ok(profile
        .iter()
        .zip(space.p())
        .enumerate()
        .map(|(k, (u, p))| p * model.aggregator(*u, k))
        .sum())
}

/// A fully specified finite-type game: types, payoffs, virtual groups,
/// importance weights and risk attitude.
#[derive(Debug, Clone)]
pub struct FiniteGame<M> {
    pub space: FiniteTypeSpace,
    pub model: M,
    pub measure: GroupMeasure,
    pub weights: WeightKernel,
    pub beta: RiskFactor,
}

impl<M: GameModel> FiniteGame<M> {
    pub fn new(
        space: FiniteTypeSpace,
        model: M,
        measure: GroupMeasure,
        weights: WeightKernel,
        beta: RiskFactor,
    ) -> Result<Self> {
        check_len(space.len(), model.num_types())?;
        check_len(space.len(), measure.matrix().nrows())?;
        check_len(space.len(), weights.matrix().nrows())?;
        Ok(FiniteGame {
            space,
            model,
            measure,
            weights,
            beta,
        })
    }

    pub fn num_types(&self) -> usize {
        self.space.len()
    }

    pub fn distinct_count(&self) -> usize {
        self.space.distinct_count()
    }

    pub fn action_box(&self) -> ActionBox {
        self.model.action_box()
    }

    pub fn aggregate_statistic(&self, profile: &[f64]) -> Result<f64> {
        aggregate_statistic(profile, &self.space, &self.model)
    }

    fn check_args(&self, k: usize, utilde: &[f64], star: &[f64]) -> Result<()> {
        if k >= self.num_types() {
            return Err(Error::Input(format!("type index {k} out of range")));
        }
        check_len(self.distinct_count(), utilde.len())?;
        check_len(self.num_types(), star.len())
    }

    /// Aggregate seen by the group of type `k` when its members play `utilde`
    /// and everyone else plays `star`.
    pub fn group_mean_field(&self, k: usize, utilde: &[f64], star: &[f64]) -> Result<f64> {
        self.check_args(k, utilde, star)?;
        Ok(self.mean_field_unchecked(k, utilde, star))
    }

    fn mean_field_unchecked(&self, k: usize, utilde: &[f64], star: &[f64]) -> f64 {
        let p = self.space.p();
        (0..self.num_types())
            .map(|i| {
                let r = self.measure.weight(k, i);
                let outside = if p[i] > r {
                    self.model.aggregator(star[i], i) * (p[i] - r)
                } else {
                    0.0
                };
                let inside = if r > 0.0 {
                    self.model.aggregator(utilde[self.space.sigma(i)], i) * r
                } else {
                    0.0
                };
                outside + inside
            })
            .sum()
    }

    fn member_costs(&self, k: usize, utilde: &[f64], ubar: f64) -> Vec<f64> {
        (0..self.num_types())
            .map(|i| {
                self.weights.weight(k, i) * self.model.cost(utilde[self.space.sigma(i)], ubar, i)
            })
            .collect()
    }

    /// Cost of type `k`'s virtual group playing `utilde` against `star`. An
    /// empty group falls back to the owner's own cost at `utilde[sigma(k)]`.
    pub fn group_cost(&self, k: usize, utilde: &[f64], star: &[f64]) -> Result<f64> {
        self.check_args(k, utilde, star)?;
        let ubar = self.mean_field_unchecked(k, utilde, star);
        if self.measure.mass(k) <= 0.0 {
            return Ok(self.model.cost(utilde[self.space.sigma(k)], ubar, k));
        }
        let costs = self.member_costs(k, utilde, ubar);
        risk_aggregate(&costs, &self.measure.row(k), self.beta)
    }

    /// Gradient of [`group_cost`](Self::group_cost) with respect to `utilde`.
    pub fn grad_group_cost(&self, k: usize, utilde: &[f64], star: &[f64]) -> Result<Vec<f64>> {
        self.check_args(k, utilde, star)?;
        if !self.beta.is_finite() {
            return Err(Error::Unsupported(
                "group cost gradient needs a finite risk factor".into(),
            ));
        }
        let n = self.num_types();
        let sigma = self.space.sigmas();
        let ubar = self.mean_field_unchecked(k, utilde, star);
        let mut grad = vec![0.0; self.distinct_count()];

        if self.measure.mass(k) <= 0.0 {
            let own = sigma[k];
            grad[own] = self.model.d_cost_du(utilde[own], ubar, k);
            return Ok(grad);
        }

        let costs = self.member_costs(k, utilde, ubar);
        let pi = risk_weights(&costs, &self.measure.row(k), self.beta)?;
        let mut d_ubar = 0.0;
        for i in 0..n {
            if pi[i] == 0.0 {
                continue;
            }
            let u = utilde[sigma[i]];
            let scale = pi[i] * self.weights.weight(k, i);
            grad[sigma[i]] += scale * self.model.d_cost_du(u, ubar, i);
            d_ubar += scale * self.model.d_cost_dubar(u, ubar, i);
        }
        for i in 0..n {
            let r = self.measure.weight(k, i);
            if r > 0.0 {
                let j = sigma[i];
                grad[j] += d_ubar * r * self.model.d_aggregator(utilde[j], i);
            }
        }
        Ok(grad)
    }
}
