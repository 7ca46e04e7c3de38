use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{FiniteTypeSpace, GroupMeasure, WeightKernel};
use crate::risk::RiskFactor;

/// Classical solution concepts recovered as special group structures.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecialCase {
    /// Empty groups: mean-field Nash.
    Nash,
    /// Whole population, mean cost.
    Harsanyi,
    /// Whole population, worst-off member.
    Rawls,
    /// Whole population, best-off member.
    BestOff,
    /// Each type's group is its own block of the partition.
    Coalition(Vec<Vec<usize>>),
    /// A fraction `alpha` of every type.
    Uniform(f64),
}

pub fn build_special_case(
    kind: &SpecialCase,
    space: &FiniteTypeSpace,
) -> Result<(GroupMeasure, RiskFactor, WeightKernel)> {
    let n = space.len();
    let whole = || GroupMeasure::uniform(space, 1.0);
    let (measure, beta) = match kind {
        SpecialCase::Nash => (GroupMeasure::empty(space), RiskFactor::NEUTRAL),
        SpecialCase::Harsanyi => (whole()?, RiskFactor::NEUTRAL),
        SpecialCase::Rawls => (whole()?, RiskFactor::WORST_OFF),
        SpecialCase::BestOff => (whole()?, RiskFactor::BEST_OFF),
        SpecialCase::Uniform(alpha) => (GroupMeasure::uniform(space, *alpha)?, RiskFactor::NEUTRAL),
        SpecialCase::Coalition(blocks) => {
            let mut block_of = vec![usize::MAX; n];
            for (b, block) in blocks.iter().enumerate() {
                if block.is_empty() {
                    return Err(Error::Input("coalition blocks must be nonempty".into()));
                }
                for &k in block {
                    if k >= n || block_of[k] != usize::MAX {
                        return Err(Error::Input(format!(
                            "type {k} is out of range or in two coalitions"
                        )));
                    }
                    block_of[k] = b;
                }
            }
            if block_of.contains(&usize::MAX) {
                return Err(Error::Input("coalitions must cover every type".into()));
            }
            // The coalition's true mass; its normalization is the coalition's
            // conditional distribution.
            let r = DMatrix::from_fn(n, n, |k, j| {
                if block_of[k] == block_of[j] {
                    space.p()[j]
                } else {
                    0.0
                }
            });
            (GroupMeasure::new(r, space)?, RiskFactor::NEUTRAL)
        }
    };
    Ok((measure, beta, WeightKernel::ones(n)))
}
