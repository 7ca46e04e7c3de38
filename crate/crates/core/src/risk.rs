//! Exponential (risk-sensitive) certainty equivalent of a group's costs.

use crate::error::{Error, Result};

/// Risk attitude of a virtual group, an extended real in `[-inf, +inf]`.
///
/// `0` aggregates by the mean, `+inf` by the worst-off member and `-inf` by
/// the best-off member. NaN is not representable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RiskFactor(f64);

impl RiskFactor {
    pub const NEUTRAL: RiskFactor = RiskFactor(0.0);
    pub const WORST_OFF: RiskFactor = RiskFactor(f64::INFINITY);
    pub const BEST_OFF: RiskFactor = RiskFactor(f64::NEG_INFINITY);

    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_nan() {
            return Err(Error::Input("risk factor must not be NaN".into()));
        }
        Ok(RiskFactor(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Default for RiskFactor {
    fn default() -> Self {
        RiskFactor::NEUTRAL
    }
}

fn normalize(masses: &[f64]) -> Result<Vec<f64>> {
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::Input("masses must be finite and nonnegative".into()));
    }
    let total: f64 = masses.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateGroup);
    }
    Ok(masses.iter().map(|m| m / total).collect())
}

/// Aggregates `values` under the probability weights `masses / sum(masses)`:
///
/// * finite nonzero `beta`: `(1/beta) ln sum q_i exp(beta v_i)`
/// * `beta == 0`: the weighted mean
/// * `beta == +inf` / `-inf`: max / min over members with positive weight
///
/// The finite case is shifted by the extreme value so that every exponent is
/// nonpositive, and is evaluated through `ln_1p`/`exp_m1` so that it stays
/// accurate as `beta` approaches zero.
pub fn risk_aggregate(values: &[f64], masses: &[f64], beta: RiskFactor) -> Result<f64> {
    crate::error::check_len(values.len(), masses.len())?;
    let q = normalize(masses)?;
    let beta = beta.value();
    let members = || {
        values
            .iter()
            .zip(&q)
            .filter(|(_, &q)| q > 0.0)
            .map(|(v, _)| *v)
    };

    if beta == f64::INFINITY {
        return Ok(members().fold(f64::NEG_INFINITY, f64::max));
    }
    if beta == f64::NEG_INFINITY {
        return Ok(members().fold(f64::INFINITY, f64::min));
    }
    if members().any(|v| !v.is_finite()) {
        return Err(Error::Input(
            "non-finite member value with finite risk factor".into(),
        ));
    }
    if beta == 0.0 {
        return Ok(values.iter().zip(&q).map(|(v, q)| v * q).sum());
    }

    let shift = if beta > 0.0 {
        members().fold(f64::NEG_INFINITY, f64::max)
    } else {
        members().fold(f64::INFINITY, f64::min)
    };
    let s: f64 = values
        .iter()
        .zip(&q)
        .filter(|(_, &q)| q > 0.0)
        .map(|(v, q)| q * (beta * (v - shift)).exp_m1())
        .sum();
    Ok(shift + s.ln_1p() / beta)
}

/// Sensitivities `d aggregate / d v_i` for finite `beta`: softmax weights
/// `q_i exp(beta v_i) / sum_j q_j exp(beta v_j)`, which reduce to `q` at `beta = 0`.
pub fn risk_weights(values: &[f64], masses: &[f64], beta: RiskFactor) -> Result<Vec<f64>> {
    crate::error::check_len(values.len(), masses.len())?;
    if !beta.is_finite() {
        return Err(Error::Unsupported(
            "risk weights need a finite risk factor".into(),
        ));
    }
    let q = normalize(masses)?;
    let beta = beta.value();
    if beta == 0.0 {
        return Ok(q);
    }
    let shift = values
        .iter()
        .zip(&q)
        .filter(|(_, &q)| q > 0.0)
        .map(|(v, _)| beta * v)
        .fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = values
        .iter()
        .zip(&q)
        .map(|(v, &q)| {
            if q > 0.0 {
                q * (beta * v - shift).exp()
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn limits_and_mean() {
        let v = [1.0, 3.0];
        let m = [0.5, 0.5];
        assert_eq!(risk_aggregate(&v, &m, RiskFactor::NEUTRAL).unwrap(), 2.0);
        assert_eq!(risk_aggregate(&v, &m, RiskFactor::WORST_OFF).unwrap(), 3.0);
        assert_eq!(risk_aggregate(&v, &m, RiskFactor::BEST_OFF).unwrap(), 1.0);
    }

    #[test]
    fn unit_beta_matches_direct_formula() {
        // ln(0.5 e + 0.5 e^3), evaluated to 20 digits with mpmath.
        let expected = 2.433_780_830_483_027_2;
        let got = risk_aggregate(&[1.0, 3.0], &[0.5, 0.5], RiskFactor::new(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
    }

    #[test]
    fn huge_beta_does_not_overflow() {
        let got = risk_aggregate(
            &[1000.0, 1001.0],
            &[1.0, 1.0],
            RiskFactor::new(50.0).unwrap(),
        )
        .unwrap();
        assert!(got.is_finite());
        assert!(got < 1001.0 && got > 1000.9);
        let got = risk_aggregate(
            &[1000.0, 1001.0],
            &[1.0, 1.0],
            RiskFactor::new(-50.0).unwrap(),
        )
        .unwrap();
        assert!(got.is_finite() && got > 1000.0 && got < 1000.1);
    }

    #[test]
    fn zero_mass_members_are_ignored_by_extremes() {
        let v = [10.0, 1.0, 3.0];
        let m = [0.0, 0.5, 0.5];
        assert_eq!(risk_aggregate(&v, &m, RiskFactor::WORST_OFF).unwrap(), 3.0);
        let b = risk_aggregate(&v, &m, RiskFactor::new(2.0).unwrap()).unwrap();
        assert!(b < 3.0);
    }

    #[test]
    fn errors() {
        assert_eq!(
            risk_aggregate(&[1.0], &[0.0], RiskFactor::NEUTRAL),
            Err(Error::DegenerateGroup)
        );
        assert!(matches!(
            risk_aggregate(&[f64::INFINITY], &[1.0], RiskFactor::new(1.0).unwrap()),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            risk_aggregate(&[1.0, 2.0], &[1.0], RiskFactor::NEUTRAL),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(RiskFactor::new(f64::NAN).is_err());
    }

    #[test]
    fn weights_are_derivatives() {
        let v = [0.3, -1.2, 2.0];
        let m = [0.2, 0.5, 0.3];
        let beta = RiskFactor::new(0.7).unwrap();
        let w = risk_weights(&v, &m, beta).unwrap();
        for i in 0..3 {
            let h = 1e-6;
            let mut vp = v;
            let mut vm = v;
            vp[i] += h;
            vm[i] -= h;
            let fd = (risk_aggregate(&vp, &m, beta).unwrap()
                - risk_aggregate(&vm, &m, beta).unwrap())
                / (2.0 * h);
            assert_abs_diff_eq!(w[i], fd, epsilon = 1e-8);
        }
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (1usize..6).prop_flat_map(|n| {
            (
                prop::collection::vec(-5.0f64..5.0, n),
                prop::collection::vec(0.01f64..1.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn nondecreasing_in_beta((v, m) in instance()) {
            let mut prev = risk_aggregate(&v, &m, RiskFactor::BEST_OFF).unwrap();
            for i in -40..=40 {
                let beta = RiskFactor::new(i as f64 * 0.25).unwrap();
                let cur = risk_aggregate(&v, &m, beta).unwrap();
                prop_assert!(cur >= prev - 1e-12, "beta={} {} < {}", beta.value(), cur, prev);
                prev = cur;
            }
            let top = risk_aggregate(&v, &m, RiskFactor::WORST_OFF).unwrap();
            prop_assert!(top >= prev - 1e-12);
        }

        #[test]
        fn continuous_at_zero((v, m) in instance()) {
            let a = risk_aggregate(&v, &m, RiskFactor::new(1e-9).unwrap()).unwrap();
            let b = risk_aggregate(&v, &m, RiskFactor::NEUTRAL).unwrap();
            prop_assert!((a - b).abs() < 1e-7);
        }

        #[test]
        fn invariant_to_mass_scale((v, m) in instance(), scale in 1e-3f64..1e3, beta in -4.0f64..4.0) {
            let scaled: Vec<f64> = m.iter().map(|x| x * scale).collect();
            let beta = RiskFactor::new(beta).unwrap();
            let a = risk_aggregate(&v, &m, beta).unwrap();
            let b = risk_aggregate(&v, &scaled, beta).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }
}
