//! Direct linear characterizations for the quadratic fishing family with a
//! uniform group measure `r[(k, k')] = alpha p_k'`, neutral risk and unit
//! weights. With `S = diag(p_k a_k)` and `l_k = p_k b_k`, each group cost is
//! `u^T (S + alpha l l^T) u - (1 - (1 - alpha) l^T star) l^T u`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};
use crate::model::{FiniteTypeSpace, QuadraticFishingModel};

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "group fraction {alpha} outside [0, 1]"
        )))
    }
}

fn weighted_efficiency(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
) -> Result<DVector<f64>> {
    check_len(space.len(), model.efficiency().len())?;
    Ok(DVector::from_iterator(
        space.len(),
        space.p().iter().zip(model.efficiency()).map(|(p, b)| p * b),
    ))
}

fn solve(matrix: DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    matrix
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Singular("equilibrium system has no unique solution".into()))
}

/// `(2S + (1 + alpha) l l^T) u = l`.
pub fn rkn_system(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
    alpha: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_alpha(alpha)?;
    let l = weighted_efficiency(space, model)?;
    let s = DMatrix::from_diagonal(&DVector::from_iterator(
        space.len(),
        space.p().iter().zip(model.effort()).map(|(p, a)| p * a),
    ));
    let matrix = 2.0 * s + (1.0 + alpha) * &l * l.transpose();
    Ok((matrix, l))
}

/// r-Kant-Nash actions of the quadratic game.
pub fn quadratic_rkn_direct(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
    alpha: f64,
) -> Result<Vec<f64>> {
    let (matrix, rhs) = rkn_system(space, model, alpha)?;
    Ok(solve(matrix, &rhs)?.iter().copied().collect())
}

/// How a group owner perceives the other members' types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coarsening {
    /// Members are seen as they are; reduces to the r-Kant-Nash system.
    Identity,
    /// Members keep their efficiency but are credited with the owner's own
    /// effort weight, so owners with equal effort weights form one class.
    OwnEffortWeight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrKantNash {
    pub equilibrium: Vec<f64>,
    /// Imagined group strategy of each perception class over all types.
    pub class_profiles: Vec<Vec<f64>>,
    /// Perception class of each type.
    pub class_of: Vec<usize>,
}

/// Perception classes and the quadratic weight `S_c` each class uses.
fn classes(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
    h: Coarsening,
) -> (Vec<usize>, Vec<DMatrix<f64>>) {
    let n = space.len();
    let p = space.p();
    match h {
        Coarsening::Identity => {
            let s = DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                p.iter().zip(model.effort()).map(|(p, a)| p * a),
            ));
            (vec![0; n], vec![s])
        }
        Coarsening::OwnEffortWeight => {
            let mut weights: Vec<f64> = Vec::new();
            let class_of = model
                .effort()
                .iter()
                .map(|a| match weights.iter().position(|w| w == a) {
                    Some(c) => c,
                    None => {
                        weights.push(*a);
                        weights.len() - 1
                    }
                })
                .collect();
            let mats = weights
                .iter()
                .map(|a| {
                    DMatrix::from_diagonal(&DVector::from_iterator(n, p.iter().map(|p| a * p)))
                })
                .collect();
            (class_of, mats)
        }
    }
}

/// Block system for the h,r-Kant-Nash equilibrium with unknowns
/// `[u^{t_1}; ...; u^{t_C}; u^{KN}]`:
///
/// ```text
/// 2(S_c + alpha l l^T) u^{t_c} + (1 - alpha) l l^T u^{KN} = l     (each class c)
/// sum_c E_c u^{t_c} - u^{KN} = 0
/// ```
///
/// where `E_c` selects the types belonging to class `c`.
pub fn hrkn_system(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
    alpha: f64,
    h: Coarsening,
) -> Result<(DMatrix<f64>, DVector<f64>, Vec<usize>)> {
    check_alpha(alpha)?;
    let n = space.len();
    let l = weighted_efficiency(space, model)?;
    let llt = &l * l.transpose();
    let (class_of, s) = classes(space, model, h);
    let c = s.len();
    let size = (c + 1) * n;
    let mut matrix = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);

    for (ci, s_c) in s.iter().enumerate() {
        let block = 2.0 * (s_c + alpha * &llt);
        matrix.view_mut((ci * n, ci * n), (n, n)).copy_from(&block);
        matrix
            .view_mut((ci * n, c * n), (n, n))
            .copy_from(&((1.0 - alpha) * &llt));
        rhs.rows_mut(ci * n, n).copy_from(&l);
    }
    for k in 0..n {
        matrix[(c * n + k, class_of[k] * n + k)] = 1.0;
        matrix[(c * n + k, c * n + k)] = -1.0;
    }
    Ok((matrix, rhs, class_of))
}

pub fn quadratic_hrkn_direct(
    space: &FiniteTypeSpace,
    model: &QuadraticFishingModel,
    alpha: f64,
    h: Coarsening,
) -> Result<HrKantNash> {
    let (matrix, rhs, class_of) = hrkn_system(space, model, alpha, h)?;
    let n = space.len();
    let c = matrix.nrows() / n - 1;
    let x = solve(matrix, &rhs)?;
    Ok(HrKantNash {
        equilibrium: x.rows(c * n, n).iter().copied().collect(),
        class_profiles: (0..c)
            .map(|ci| x.rows(ci * n, n).iter().copied().collect())
            .collect(),
        class_of,
    })
}
