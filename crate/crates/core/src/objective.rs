//! The penalized pseudo-likelihood objective and its derivatives.
//!
//! With residual columns `r_ik = sigma_ik * Y_ik + sum_{j != i} sum_l omega_ijkl * Y_jl`,
//! the smooth part is
//!
//! ```text
//! L(omega, sigma) = 1/2 * sum_{i,k} ( -log sigma_ik + |r_ik|^2 / n )
//! ```
//!
//! and the penalty is `lambda * sum_{i<j} |Omega_ij|_F`.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::precision::BlockPrecision;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub loss: f64,
    pub penalty: f64,
    pub total: f64,
}

pub(crate) fn check_compatible(est: &BlockPrecision, data: &Dataset) -> Result<()> {
    if est.partition() != data.partition() {
        return Err(Error::Dimension(format!(
            "estimate partition {:?} does not match data partition {:?}",
            est.partition().dims(),
            data.partition().dims()
        )));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Residual columns `r_ik` for every flat column, column-major `n x D`.
pub fn residual_matrix(est: &BlockPrecision, data: &Dataset) -> Result<Vec<f64>> {
    check_compatible(est, data)?;
    let n = data.n();
    let part = data.partition();
    let mut r = vec![0.0; n * data.dim()];
    for (c, &s) in est.sigma().iter().enumerate() {
        axpy(s, data.column(c), &mut r[c * n..(c + 1) * n]);
    }
    for (&(i, j), block) in est.blocks() {
        for k in 0..block.nrows() {
            let ci = part.column(i, k);
            for l in 0..block.ncols() {
                let w = block[(k, l)];
                if w == 0.0 {
                    continue;
                }
                let cj = part.column(j, l);
                axpy(w, data.column(cj), &mut r[ci * n..(ci + 1) * n]);
                axpy(w, data.column(ci), &mut r[cj * n..(cj + 1) * n]);
            }
        }
    }
    Ok(r)
}

fn loss_from_residuals(sigma: &[f64], residuals: &[f64], n: usize) -> f64 {
    let quad: f64 = residuals.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let logs: f64 = sigma.iter().map(|s| -s.ln()).sum();
    0.5 * (logs + quad)
}

fn check_sigma(est: &BlockPrecision) -> Result<()> {
    if let Some(c) = est.sigma().iter().position(|&s| s <= 0.0) {
        return Err(Error::InvalidInput(format!(
            "diagonal entry {} is not positive",
            c + 1
        )));
    }
    Ok(())
}

/// Smooth (unpenalized) part of the objective.
pub fn smooth_loss(est: &BlockPrecision, data: &Dataset) -> Result<f64> {
    check_sigma(est)?;
    let r = residual_matrix(est, data)?;
    Ok(loss_from_residuals(est.sigma(), &r, data.n()))
}

/// `lambda` times the sum of Frobenius norms of the stored blocks.
pub fn group_penalty(est: &BlockPrecision, lambda: f64) -> f64 {
    lambda * est.blocks().map(|(_, b)| b.norm()).sum::<f64>()
}

pub fn objective(est: &BlockPrecision, data: &Dataset, lambda: f64) -> Result<ObjectiveValue> {
    let loss = smooth_loss(est, data)?;
    let penalty = group_penalty(est, lambda);
    Ok(ObjectiveValue {
        loss,
        penalty,
        total: loss + penalty,
    })
}

/// Gradient of the smooth loss with respect to `vec(Omega_ij)` (row-major),
/// for an upper pair `i < j`. Absent blocks are evaluated at zero.
pub fn block_gradient(est: &BlockPrecision, data: &Dataset, i: usize, j: usize) -> Result<Vec<f64>> {
    if i >= j {
        return Err(Error::InvalidInput(format!(
            "block gradient needs i < j, got ({},{})",
            i + 1,
            j + 1
        )));
    }
    let p = data.partition().num_nodes();
    if j >= p {
        return Err(Error::Dimension(format!("node {} outside {p} nodes", j + 1)));
    }
    let r = residual_matrix(est, data)?;
    Ok(block_gradient_from_residuals(data, &r, i, j))
}

pub(crate) fn block_gradient_from_residuals(
    data: &Dataset,
    residuals: &[f64],
    i: usize,
    j: usize,
) -> Vec<f64> {
    let n = data.n();
    let part = data.partition();
    let (ki, kj) = (part.dim(i), part.dim(j));
    let inv_n = 1.0 / n as f64;
    let mut g = Vec::with_capacity(ki * kj);
    for k in 0..ki {
        let ci = part.column(i, k);
        let ri = &residuals[ci * n..(ci + 1) * n];
        let yi = data.column(ci);
        for l in 0..kj {
            let cj = part.column(j, l);
            let rj = &residuals[cj * n..(cj + 1) * n];
            let yj = data.column(cj);
            g.push(inv_n * (dot(ri, yj) + dot(rj, yi)));
        }
    }
    g
}

/// Partial derivative of the smooth loss with respect to `sigma_ik`:
/// `-1 / (2 sigma_ik) + Y_ik' r_ik / n`.
pub fn sigma_gradient(est: &BlockPrecision, data: &Dataset, i: usize, k: usize) -> Result<f64> {
    check_compatible(est, data)?;
    let part = data.partition();
    if i >= part.num_nodes() || k >= part.dim(i) {
        return Err(Error::Dimension(format!(
            "component ({},{}) outside partition",
            i + 1,
            k + 1
        )));
    }
    let c = part.column(i, k);
    let s = est.sigma()[c];
    if s <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "diagonal entry {} is not positive",
            c + 1
        )));
    }
    let r = residual_matrix(est, data)?;
    let n = data.n();
    Ok(sigma_gradient_from_residuals(
        s,
        data.column(c),
        &r[c * n..(c + 1) * n],
    ))
}

pub(crate) fn sigma_gradient_from_residuals(sigma: f64, y: &[f64], r: &[f64]) -> f64 {
    -0.5 / sigma + dot(y, r) / y.len() as f64
}

/// Loss with explicit per-component weights `w_ik`:
///
/// `1/2 * sum_{i,k} ( -log sigma_ik + w_ik/n * |Y_ik + sum_{j != i} sum_l (omega_ijkl / sigma_ik) Y_jl|^2 )`.
///
/// With `w_ik = sigma_ik^2` this coincides with [`smooth_loss`]. The solver
/// only uses that convex choice; other weights are for diagnostics.
pub fn weighted_loss(est: &BlockPrecision, data: &Dataset, weights: &[f64]) -> Result<f64> {
    check_sigma(est)?;
    if weights.len() != data.dim() {
        return Err(Error::Dimension(format!(
            "{} weights for {} columns",
            weights.len(),
            data.dim()
        )));
    }
    let r = residual_matrix(est, data)?;
    let n = data.n();
    let mut total = 0.0;
    for (c, (&s, &w)) in est.sigma().iter().zip(weights).enumerate() {
        let rc = &r[c * n..(c + 1) * n];
        let scaled: f64 = rc.iter().map(|v| (v / s) * (v / s)).sum();
        total += -s.ln() + w * scaled / n as f64;
    }
    Ok(0.5 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::NodePartition;
    use nalgebra::DMatrix;

    fn single_column(values: Vec<f64>) -> Dataset {
        let n = values.len();
        Dataset::from_columns(n, NodePartition::new(vec![1]).unwrap(), values).unwrap()
    }

    #[test]
    fn loss_single_node_unit_sigma() {
        // (1/n) |Y|^2 = 1
        let data = single_column(vec![1.0, -1.0, 1.0, -1.0]);
        let est = BlockPrecision::new(data.partition().clone(), vec![1.0]).unwrap();
        assert!((smooth_loss(&est, &data).unwrap() - 0.5).abs() < 1e-15);
        let est2 = BlockPrecision::new(data.partition().clone(), vec![2.0]).unwrap();
        let expected = 0.5 * (-(2f64.ln()) + 4.0);
        assert!((smooth_loss(&est2, &data).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 1.6534).abs() < 1e-4);
    }

    #[test]
    fn penalty_values() {
        let part = NodePartition::new(vec![2, 2]).unwrap();
        let mut est = BlockPrecision::new(part, vec![1.0; 4]).unwrap();
        assert_eq!(group_penalty(&est, 3.0), 0.0);
        est.set_block(0, 1, DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]))
            .unwrap();
        assert!((group_penalty(&est, 1.0) - 5.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_gradient_vanishes_at_one_over_root_two() {
        let data = single_column(vec![1.0, -1.0, 1.0, -1.0]);
        let est =
            BlockPrecision::new(data.partition().clone(), vec![1.0 / 2f64.sqrt()]).unwrap();
        assert!(sigma_gradient(&est, &data, 0, 0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gradient_zero_for_orthogonal_columns() {
        let part = NodePartition::new(vec![1, 1]).unwrap();
        let data =
            Dataset::from_columns(4, part.clone(), vec![1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0])
                .unwrap();
        let est = BlockPrecision::new(part, vec![1.0, 1.0]).unwrap();
        assert_eq!(block_gradient(&est, &data, 0, 1).unwrap(), vec![0.0]);
        assert!(block_gradient(&est, &data, 1, 1).is_err());
        assert!(block_gradient(&est, &data, 1, 0).is_err());
    }

    #[test]
    fn weighted_loss_matches_convex_weights() {
        let part = NodePartition::new(vec![1, 2]).unwrap();
        let data = Dataset::from_columns(
            3,
            part.clone(),
            vec![0.3, -1.2, 0.7, 1.1, 0.2, -0.4, -0.5, 0.9, 0.1],
        )
        .unwrap();
        let mut est = BlockPrecision::new(part, vec![1.3, 0.8, 2.0]).unwrap();
        est.set_block(0, 1, DMatrix::from_row_slice(1, 2, &[0.2, -0.3])).unwrap();
        let w: Vec<f64> = est.sigma().iter().map(|s| s * s).collect();
        let a = weighted_loss(&est, &data, &w).unwrap();
        let b = smooth_loss(&est, &data).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn mismatched_partition_is_rejected() {
        let data = single_column(vec![1.0, 2.0, 3.0]);
        let est = BlockPrecision::new(NodePartition::new(vec![1, 1]).unwrap(), vec![1.0, 1.0])
            .unwrap();
        assert!(matches!(smooth_loss(&est, &data), Err(Error::Dimension(_))));
    }
}
