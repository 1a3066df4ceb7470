//! Penalty grids, warm-started regularization paths and K-fold cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{center_columns, Dataset};
use crate::error::{Error, Result};
use crate::objective::{dot, smooth_loss};
use crate::optimizer::{fit, stationary_sigma_at_zero, FitConfig, FitResult};
use crate::precision::BlockPrecision;

/// Strictly decreasing list of penalty levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
    pub lambda_max: f64,
    pub ratio: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub const DEFAULT_COUNT: usize = 30;
    pub const DEFAULT_RATIO: f64 = 0.01;

    /// `count` log-spaced values from `lambda_max` down to `ratio * lambda_max`.
    pub fn log_spaced(lambda_max: f64, count: usize, ratio: f64) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda_max must be positive, got {lambda_max}"
            )));
        }
        if count < 2 || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!(
                "grid needs count >= 2 and ratio in (0, 1), got {count}:{ratio}"
            )));
        }
        let step = ratio.ln() / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count)
            .map(|t| lambda_max * (step * t as f64).exp())
            .collect();
        values[0] = lambda_max;
        values[count - 1] = ratio * lambda_max;
        Ok(LambdaGrid {
            values,
            lambda_max,
            ratio,
            count,
        })
    }

    /// An explicit grid; values must be positive and strictly decreasing.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty lambda grid".into()));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput("lambda values must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput(
                "lambda values must be strictly decreasing".into(),
            ));
        }
        let lambda_max = values[0];
        Ok(LambdaGrid {
            ratio: values[values.len() - 1] / lambda_max,
            count: values.len(),
            lambda_max,
            values,
        })
    }
}

/// Smallest penalty at which all-zero blocks are optimal: the largest block
/// gradient norm at `omega = 0` with the diagonal at its matching minimizer.
pub fn lambda_max(data: &Dataset) -> f64 {
    let part = data.partition();
    let sigma = stationary_sigma_at_zero(data);
    let inv_n = 1.0 / data.n() as f64;
    let mut best: f64 = 0.0;
    for (i, j) in part.pairs() {
        let mut sq = 0.0;
        for a in part.columns(i) {
            for b in part.columns(j) {
                let g = inv_n * (sigma[a] + sigma[b]) * dot(data.column(a), data.column(b));
                sq += g * g;
            }
        }
        best = best.max(sq.sqrt());
    }
    best
}

/// Fits every grid value in order, each warm-started from the previous fit.
pub fn regularization_path(
    data: &Dataset,
    grid: &LambdaGrid,
    base: &FitConfig,
) -> Result<Vec<FitResult>> {
    let mut fits: Vec<FitResult> = Vec::with_capacity(grid.values.len());
    for &lambda in &grid.values {
        let cfg = FitConfig {
            lambda,
            ..base.clone()
        };
        let init = fits.last().map(|f| &f.estimate);
        fits.push(fit(data, &cfg, init)?);
    }
    Ok(fits)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub seed: u64,
    pub grid: LambdaGrid,
    /// Stop descending the grid once the fold-mean loss has stayed above its
    /// running minimum for this many consecutive values. `None` scans the
    /// whole grid.
    #[serde(default)]
    pub patience: Option<usize>,
}

impl CvConfig {
    pub const DEFAULT_PATIENCE: usize = 3;

    pub fn new(folds: usize, seed: u64, grid: LambdaGrid) -> Self {
        CvConfig {
            folds,
            seed,
            grid,
            patience: Some(Self::DEFAULT_PATIENCE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Grid values actually evaluated: a prefix of the configured grid.
    pub lambdas: Vec<f64>,
    /// Fold-mean validation loss per evaluated grid value.
    pub mean_loss: Vec<f64>,
    pub sd_loss: Vec<f64>,
    pub best_index: usize,
    pub best_lambda: f64,
    pub folds: usize,
    pub seed: u64,
    pub grid_size: usize,
    pub stopped_early: bool,
}

/// Fold label of every row: a seeded shuffle dealt round-robin.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut labels = vec![0; n];
    for (t, &row) in order.iter().enumerate() {
        labels[row] = t % folds;
    }
    labels
}

/// Training rows centered by their own means, validation rows shifted by the
/// same means, and the warm start carried along the grid.
struct Fold {
    train: Dataset,
    valid: Dataset,
    warm: Option<BlockPrecision>,
}

impl Fold {
    fn new(data: &Dataset, labels: &[usize], fold: usize) -> Result<Self> {
        let (valid, train): (Vec<usize>, Vec<usize>) =
            (0..data.n()).partition(|&r| labels[r] == fold);
        let train = data.select_rows(&train)?;
        let means = train.column_means();
        Ok(Fold {
            train: center_columns(&train),
            valid: data.select_rows(&valid)?.shifted(&means)?,
            warm: None,
        })
    }

    fn step(&mut self, cfg: &FitConfig) -> Result<f64> {
        let result = fit(&self.train, cfg, self.warm.as_ref())?;
        let loss = smooth_loss(&result.estimate, &self.valid)?;
        self.warm = Some(result.estimate);
        Ok(loss)
    }
}

/// K-fold cross-validation of the unpenalized loss along `cfg.grid`.
/// All folds descend the grid together, each warm-started from its previous
/// fit. The best value minimizes the fold-mean loss; ties go to the larger
/// penalty.
pub fn cross_validate(data: &Dataset, cfg: &CvConfig, base: &FitConfig) -> Result<CvReport> {
    let n = data.n();
    if cfg.folds < 2 || cfg.folds > n {
        return Err(Error::InvalidInput(format!(
            "need 2 <= folds <= n, got {} folds for {n} rows",
            cfg.folds
        )));
    }
    if n / cfg.folds < 2 {
        return Err(Error::InvalidInput(format!(
            "{} folds over {n} rows leave a fold with fewer than 2 rows",
            cfg.folds
        )));
    }
    if cfg.patience == Some(0) {
        return Err(Error::InvalidInput("patience must be at least 1".into()));
    }
    let labels = fold_assignment(n, cfg.folds, cfg.seed);
    let mut folds: Vec<Fold> = (0..cfg.folds)
        .map(|f| Fold::new(data, &labels, f))
        .collect::<Result<_>>()?;

    let k = cfg.folds as f64;
    let mut lambdas = Vec::new();
    let mut mean_loss = Vec::new();
    let mut sd_loss = Vec::new();
    let mut best_index = 0;
    let mut stopped_early = false;
    for (t, &lambda) in cfg.grid.values.iter().enumerate() {
        let fit_cfg = FitConfig {
            lambda,
            ..base.clone()
        };
        let losses: Vec<f64> = folds
            .par_iter_mut()
            .map(|fold| fold.step(&fit_cfg))
            .collect::<Result<_>>()?;
        let mean = losses.iter().sum::<f64>() / k;
        let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (k - 1.0);
        lambdas.push(lambda);
        mean_loss.push(mean);
        sd_loss.push(var.sqrt());
        if mean < mean_loss[best_index] {
            best_index = t;
        }
        if let Some(patience) = cfg.patience {
            if t - best_index >= patience && t + 1 < cfg.grid.values.len() {
                stopped_early = true;
                break;
            }
        }
    }
    Ok(CvReport {
        best_lambda: lambdas[best_index],
        lambdas,
        mean_loss,
        sd_loss,
        best_index,
        folds: cfg.folds,
        seed: cfg.seed,
        grid_size: cfg.grid.values.len(),
        stopped_early,
    })
}

/// `2n * loss + log(n) * (free parameters in nonzero blocks)`.
///
/// Reporting only: on multi-attribute data this criterion tends to pick the
/// empty graph, so it is never used to select the penalty.
pub fn bic(result: &FitResult, data: &Dataset) -> Result<f64> {
    let n = data.n() as f64;
    let loss = smooth_loss(&result.estimate, data)?;
    let params: usize = result.estimate.blocks().map(|(_, b)| b.len()).sum();
    Ok(2.0 * n * loss + n.ln() * params as f64)
}
