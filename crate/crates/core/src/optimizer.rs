//! Cyclic block coordinate descent for the penalized pseudo-likelihood.
//!
//! One sweep visits every upper pair `(i, j)` in lexicographic order and
//! solves the block subproblem by backtracking proximal gradient, then
//! replaces every diagonal entry by its closed-form minimizer. Residual
//! columns are updated in place after each block and refreshed from scratch
//! every `refresh_every` sweeps.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::objective::{
    axpy, block_gradient_from_residuals, check_compatible, dot, residual_matrix,
    sigma_gradient_from_residuals,
};
use crate::precision::BlockPrecision;
use crate::prox::group_soft_threshold_in_place;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda: f64,
    /// Convergence tolerance for the outer sweeps and the block subproblems.
    pub tol: f64,
    pub max_sweeps: usize,
    pub max_prox_iters: usize,
    pub sigma_floor: f64,
    /// Tolerance of the KKT report attached to every fit.
    pub kkt_tol: f64,
    pub refresh_every: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            lambda: 0.0,
            tol: 1e-6,
            max_sweeps: 500,
            max_prox_iters: 100,
            sigma_floor: 1e-8,
            kkt_tol: 1e-4,
            refresh_every: 50,
        }
    }
}

impl FitConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        FitConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        for (name, v) in [
            ("tol", self.tol),
            ("sigma_floor", self.sigma_floor),
            ("kkt_tol", self.kkt_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_sweeps == 0 || self.max_prox_iters == 0 || self.refresh_every == 0 {
            return Err(Error::InvalidInput(
                "max_sweeps, max_prox_iters and refresh_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Numerical optimality certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// max over zero blocks of `|grad_ij|_2 - lambda` (negative when strictly inside).
    pub max_inactive_violation: f64,
    /// max over nonzero blocks of `|grad_ij + lambda * w_ij / |w_ij|_2|_inf`.
    pub max_active_residual: f64,
    /// max over diagonal entries of `|dL / d sigma_ik|`.
    pub max_sigma_gradient: f64,
    pub tolerance: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub estimate: BlockPrecision,
    pub lambda: f64,
    /// Total objective at the starting point followed by one value per sweep.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub kkt: KktReport,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the starting value")
    }

    pub fn edge_graph(&self) -> EdgeGraph {
        self.estimate.edge_graph()
    }
}

/// `1 / var(Y_c)` with the unbiased variance.
pub fn initial_sigma(data: &Dataset) -> Vec<f64> {
    data.column_variances().iter().map(|v| 1.0 / v).collect()
}

/// Minimizer of the diagonal entries when every block is zero:
/// `sqrt(n / (2 Y_c'Y_c))`.
pub fn stationary_sigma_at_zero(data: &Dataset) -> Vec<f64> {
    let n = data.n() as f64;
    (0..data.dim())
        .map(|c| {
            let y = data.column(c);
            (n / (2.0 * dot(y, y))).sqrt()
        })
        .collect()
}

/// Positive root of `2q s^2 + 2c s - n = 0`, the stationary point in `s`
/// of `-log s / 2 + |s y + a|^2 / (2n)` with `q = y'y`, `c = y'a`.
fn sigma_root(c: f64, q: f64, n: f64) -> f64 {
    let disc = (c * c + 2.0 * n * q).sqrt();
    if c >= 0.0 {
        n / (c + disc)
    } else {
        (disc - c) / (2.0 * q)
    }
}

struct Solver<'a> {
    data: &'a Dataset,
    cfg: &'a FitConfig,
    pairs: Vec<(usize, usize)>,
    sigma: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    active: Vec<bool>,
    residuals: Vec<f64>,
    /// `Y_i'Y_i / n` per node, row-major.
    grams: Vec<Vec<f64>>,
    sq_norms: Vec<f64>,
    scratch: Scratch,
}

#[derive(Default)]
struct Scratch {
    w: Vec<f64>,
    g: Vec<f64>,
    z: Vec<f64>,
    d: Vec<f64>,
    hd: Vec<f64>,
}

impl<'a> Solver<'a> {
    fn new(data: &'a Dataset, cfg: &'a FitConfig, start: &BlockPrecision) -> Result<Self> {
        check_compatible(start, data)?;
        let part = data.partition();
        let n = data.n();
        let pairs: Vec<(usize, usize)> = part.pairs().collect();
        let blocks = pairs
            .iter()
            .map(|&(i, j)| match start.block(i, j) {
                Some(b) => {
                    let mut v = Vec::with_capacity(b.len());
                    for k in 0..b.nrows() {
                        for l in 0..b.ncols() {
                            v.push(b[(k, l)]);
                        }
                    }
                    v
                }
                None => vec![0.0; part.dim(i) * part.dim(j)],
            })
            .collect::<Vec<_>>();
        let active = blocks.iter().map(|b| b.iter().any(|&v| v != 0.0)).collect();
        let grams = (0..part.num_nodes())
            .map(|i| {
                let cols = part.columns(i);
                let ki = cols.len();
                let mut g = vec![0.0; ki * ki];
                for a in 0..ki {
                    for b in a..ki {
                        let v = dot(data.column(cols.start + a), data.column(cols.start + b))
                            / n as f64;
                        g[a * ki + b] = v;
                        g[b * ki + a] = v;
                    }
                }
                g
            })
            .collect();
        let sq_norms = (0..data.dim())
            .map(|c| dot(data.column(c), data.column(c)))
            .collect();
        let kmax = part.max_dim();
        let cap = kmax * kmax;
        let scratch = Scratch {
            w: Vec::with_capacity(cap),
            g: Vec::with_capacity(cap),
            z: Vec::with_capacity(cap),
            d: Vec::with_capacity(cap),
            hd: Vec::with_capacity(cap),
        };
        Ok(Solver {
            data,
            cfg,
            pairs,
            sigma: start.sigma().to_vec(),
            blocks,
            active,
            residuals: residual_matrix(start, data)?,
            grams,
            sq_norms,
            scratch,
        })
    }

    fn to_estimate(&self) -> Result<BlockPrecision> {
        let part = self.data.partition();
        let mut est = BlockPrecision::new(part.clone(), self.sigma.clone())?;
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            if self.active[idx] {
                est.set_block(
                    i,
                    j,
                    DMatrix::from_row_slice(part.dim(i), part.dim(j), &self.blocks[idx]),
                )?;
            }
        }
        Ok(est)
    }

    fn refresh_residuals(&mut self) -> Result<()> {
        let est = self.to_estimate()?;
        self.residuals = residual_matrix(&est, self.data)?;
        Ok(())
    }

    fn objective(&self) -> f64 {
        let n = self.data.n() as f64;
        let quad: f64 = self.residuals.iter().map(|v| v * v).sum::<f64>() / n;
        let logs: f64 = self.sigma.iter().map(|s| -s.ln()).sum();
        let pen: f64 = self
            .blocks
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(b, _)| b.iter().map(|v| v * v).sum::<f64>().sqrt())
            .sum();
        0.5 * (logs + quad) + self.cfg.lambda * pen
    }

    /// `H(d) = d S_jj + S_ii d`: the Hessian of the smooth loss restricted to
    /// block `(i, j)`, applied to a row-major `K_i x K_j` direction.
    fn apply_hessian(si: &[f64], sj: &[f64], ki: usize, kj: usize, d: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.resize(ki * kj, 0.0);
        for k in 0..ki {
            for l in 0..kj {
                let mut acc = 0.0;
                for m in 0..kj {
                    acc += d[k * kj + m] * sj[m * kj + l];
                }
                for m in 0..ki {
                    acc += si[k * ki + m] * d[m * kj + l];
                }
                out[k * kj + l] = acc;
            }
        }
    }

    /// Solves the subproblem for pair `idx` and applies the change to the
    /// residuals. Returns the largest absolute entry change.
    fn update_block(&mut self, idx: usize) -> Result<f64> {
        let (i, j) = self.pairs[idx];
        let part = self.data.partition();
        let (ki, kj) = (part.dim(i), part.dim(j));
        let lambda = self.cfg.lambda;
        let tol = self.cfg.tol;

        let g0 = block_gradient_from_residuals(self.data, &self.residuals, i, j);
        if !self.active[idx] && norm(&g0) <= lambda {
            return Ok(0.0);
        }

        let Scratch { w, g, z, d, hd } = &mut self.scratch;
        let (si, sj) = (&self.grams[i], &self.grams[j]);
        w.clear();
        w.extend_from_slice(&self.blocks[idx]);
        g.clear();
        g.extend_from_slice(&g0);

        for _ in 0..self.cfg.max_prox_iters {
            let mut s = 1.0;
            loop {
                z.clear();
                z.extend(w.iter().zip(g.iter()).map(|(wv, gv)| wv - s * gv));
                group_soft_threshold_in_place(z, lambda * s);
                d.clear();
                d.extend(z.iter().zip(w.iter()).map(|(a, b)| a - b));
                Self::apply_hessian(si, sj, ki, kj, d, hd);
                let dd = dot(d, d);
                // quadratic model: f(w + d) = f(w) + g'd + d'Hd / 2
                if dot(d, hd) <= dd / s || dd == 0.0 {
                    break;
                }
                s *= 0.5;
                if s < 1e-30 {
                    return Err(Error::NonFinite { i: i + 1, j: j + 1 });
                }
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { i: i + 1, j: j + 1 });
            }
            std::mem::swap(w, z);
            for (gv, h) in g.iter_mut().zip(hd.iter()) {
                *gv += h;
            }
            if subproblem_residual(w, g, lambda) <= tol {
                break;
            }
        }

        let n = self.data.n();
        let mut change: f64 = 0.0;
        for k in 0..ki {
            let ci = part.column(i, k);
            for l in 0..kj {
                let delta = w[k * kj + l] - self.blocks[idx][k * kj + l];
                if delta == 0.0 {
                    continue;
                }
                change = change.max(delta.abs());
                let cj = part.column(j, l);
                let (lo, hi) = self.residuals.split_at_mut(ci.max(cj) * n);
                let (ri, rj) = if ci < cj {
                    (&mut lo[ci * n..(ci + 1) * n], &mut hi[..n])
                } else {
                    (&mut hi[..n], &mut lo[cj * n..(cj + 1) * n])
                };
                axpy(delta, self.data.column(cj), ri);
                axpy(delta, self.data.column(ci), rj);
            }
        }
        self.blocks[idx].copy_from_slice(w);
        self.active[idx] = w.iter().any(|&v| v != 0.0);
        Ok(change)
    }

    /// Closed-form update of every diagonal entry. Returns the largest change.
    fn update_sigmas(&mut self) -> f64 {
        let n = self.data.n();
        let mut change: f64 = 0.0;
        for c in 0..self.sigma.len() {
            let y = self.data.column(c);
            let r = &mut self.residuals[c * n..(c + 1) * n];
            let q = self.sq_norms[c];
            let s = self.sigma[c];
            let cross = dot(y, r) - s * q;
            let updated = sigma_root(cross, q, n as f64).max(self.cfg.sigma_floor);
            let delta = updated - s;
            if delta != 0.0 {
                axpy(delta, y, r);
                self.sigma[c] = updated;
                change = change.max(delta.abs());
            }
        }
        change
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Distance from zero to the subdifferential of the block subproblem at `w`.
fn subproblem_residual(w: &[f64], g: &[f64], lambda: f64) -> f64 {
    let nw = norm(w);
    if nw == 0.0 {
        (norm(g) - lambda).max(0.0)
    } else {
        w.iter()
            .zip(g)
            .map(|(wv, gv)| (gv + lambda * wv / nw).abs())
            .fold(0.0, f64::max)
    }
}

fn default_start(data: &Dataset) -> Result<BlockPrecision> {
    BlockPrecision::new(data.partition().clone(), initial_sigma(data))
}

/// Fits the estimator at `cfg.lambda`, starting from `init` when given and
/// otherwise from `sigma = 1 / var`, all blocks zero.
///
/// Every sweep updates all blocks in lexicographic order and then all
/// diagonal entries. The fit stops once both the relative objective decrease
/// and the largest parameter change of a sweep fall below `cfg.tol`.
pub fn fit(data: &Dataset, cfg: &FitConfig, init: Option<&BlockPrecision>) -> Result<FitResult> {
    cfg.validate()?;
    let start = match init {
        Some(est) => est.clone(),
        None => default_start(data)?,
    };
    let mut solver = Solver::new(data, cfg, &start)?;
    let mut trace = vec![solver.objective()];
    let mut converged = false;
    let mut sweeps = 0;
    // A cold start moves the diagonal to its minimizer at zero blocks before
    // the first block sweep, so no block activates when lambda >= lambda_max.
    let mut pending_sigma_change = if init.is_none() {
        solver.update_sigmas()
    } else {
        0.0
    };
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut change: f64 = std::mem::take(&mut pending_sigma_change);
        for idx in 0..solver.pairs.len() {
            change = change.max(solver.update_block(idx)?);
        }
        change = change.max(solver.update_sigmas());
        if sweeps % cfg.refresh_every == 0 {
            solver.refresh_residuals()?;
        }
        let current = solver.objective();
        let previous = *trace.last().unwrap();
        trace.push(current);
        let relative = (previous - current).abs() / previous.abs().max(1.0);
        if relative < cfg.tol && change < cfg.tol {
            converged = true;
            break;
        }
    }
    let estimate = solver.to_estimate()?;
    let kkt = kkt_certificate(&estimate, data, cfg.lambda, cfg.kkt_tol)?;
    Ok(FitResult {
        estimate,
        lambda: cfg.lambda,
        objective_trace: trace,
        sweeps,
        converged,
        kkt,
    })
}

/// One block subproblem solved at the current estimate: returns the
/// minimizer over `Omega_ij` with everything else held fixed.
pub fn block_prox_step(
    i: usize,
    j: usize,
    est: &BlockPrecision,
    data: &Dataset,
    cfg: &FitConfig,
) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    if i >= j || j >= data.partition().num_nodes() {
        return Err(Error::InvalidInput(format!(
            "block ({},{}) is not an upper pair",
            i + 1,
            j + 1
        )));
    }
    let mut solver = Solver::new(data, cfg, est)?;
    let idx = solver
        .pairs
        .iter()
        .position(|&pair| pair == (i, j))
        .expect("upper pair is enumerated");
    solver.update_block(idx)?;
    let part = data.partition();
    Ok(DMatrix::from_row_slice(
        part.dim(i),
        part.dim(j),
        &solver.blocks[idx],
    ))
}

/// Closed-form minimizer of the objective in `sigma_ik` with everything else
/// held fixed, clamped below by `cfg.sigma_floor`.
pub fn sigma_update(
    i: usize,
    k: usize,
    est: &BlockPrecision,
    data: &Dataset,
    cfg: &FitConfig,
) -> Result<f64> {
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
    let n = data.n();
    let y = data.column(c);
    let q = dot(y, y);
    if q <= 0.0 {
        return Err(Error::InvalidInput(format!("column {} is all zero", c + 1)));
    }
    let r = residual_matrix(est, data)?;
    let cross = dot(y, &r[c * n..(c + 1) * n]) - est.sigma()[c] * q;
    Ok(sigma_root(cross, q, n as f64).max(cfg.sigma_floor))
}

/// Checks the optimality system of the penalized problem at `est`.
pub fn kkt_certificate(
    est: &BlockPrecision,
    data: &Dataset,
    lambda: f64,
    kkt_tol: f64,
) -> Result<KktReport> {
    let r = residual_matrix(est, data)?;
    let part = data.partition();
    let n = data.n();
    let mut inactive = f64::NEG_INFINITY;
    let mut active: f64 = 0.0;
    for (i, j) in part.pairs() {
        let g = block_gradient_from_residuals(data, &r, i, j);
        match est.block(i, j) {
            None => inactive = inactive.max(norm(&g) - lambda),
            Some(b) => {
                let nb = b.norm();
                let (ki, kj) = (b.nrows(), b.ncols());
                for k in 0..ki {
                    for l in 0..kj {
                        let res = (g[k * kj + l] + lambda * b[(k, l)] / nb).abs();
                        active = active.max(res);
                    }
                }
            }
        }
    }
    if inactive == f64::NEG_INFINITY {
        inactive = 0.0;
    }
    let sigma_grad = (0..data.dim())
        .map(|c| {
            sigma_gradient_from_residuals(est.sigma()[c], data.column(c), &r[c * n..(c + 1) * n])
                .abs()
        })
        .fold(0.0, f64::max);
    Ok(KktReport {
        max_inactive_violation: inactive,
        max_active_residual: active,
        max_sigma_gradient: sigma_grad,
        tolerance: kkt_tol,
        satisfied: inactive <= kkt_tol && active <= kkt_tol && sigma_grad <= kkt_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::center_columns;
    use crate::objective::{objective, sigma_gradient};
    use crate::partition::NodePartition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn correlated_data(n: usize, dims: Vec<usize>, seed: u64) -> Dataset {
        let part = NodePartition::new(dims).unwrap();
        let d = part.total_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let latent: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut values = Vec::with_capacity(n * d);
        for c in 0..d {
            let loading = 0.3 + 0.1 * c as f64;
            for r in 0..n {
                let e: f64 = StandardNormal.sample(&mut rng);
                values.push(loading * latent[r] + e);
            }
        }
        center_columns(&Dataset::from_columns(n, part, values).unwrap())
    }

    #[test]
    fn sigma_root_solves_quadratic() {
        for &(c, q, n) in &[(0.0, 10.0, 10.0), (3.0, 5.0, 7.0), (-4.0, 2.0, 9.0)] {
            let s = sigma_root(c, q, n);
            assert!(s > 0.0);
            assert!((2.0 * q * s * s + 2.0 * c * s - n).abs() < 1e-10);
        }
    }

    #[test]
    fn sigma_update_closed_forms() {
        let part = NodePartition::new(vec![1]).unwrap();
        let unit = Dataset::from_columns(4, part.clone(), vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let est = BlockPrecision::new(part.clone(), vec![1.0]).unwrap();
        let cfg = FitConfig::default();
        let s = sigma_update(0, 0, &est, &unit, &cfg).unwrap();
        assert!((s - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let root2 = 2f64.sqrt();
        let double =
            Dataset::from_columns(4, part.clone(), vec![root2, -root2, root2, -root2]).unwrap();
        let s = sigma_update(0, 0, &est, &double, &cfg).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sigma_gradient_vanishes_at_update() {
        let data = correlated_data(30, vec![1, 2, 2], 4);
        let mut est = BlockPrecision::new(data.partition().clone(), vec![1.1, 0.9, 1.3, 0.7, 1.0])
            .unwrap();
        est.set_block(0, 1, DMatrix::from_row_slice(1, 2, &[0.2, -0.1])).unwrap();
        est.set_block(1, 2, DMatrix::from_row_slice(2, 2, &[0.05, 0.3, -0.2, 0.1]))
            .unwrap();
        let cfg = FitConfig::default();
        for (i, k) in [(0, 0), (1, 1), (2, 0)] {
            let s = sigma_update(i, k, &est, &data, &cfg).unwrap();
            let mut moved = est.clone();
            moved.set_sigma(data.partition().column(i, k), s).unwrap();
            assert!(sigma_gradient(&moved, &data, i, k).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn large_lambda_gives_empty_graph_quickly() {
        let data = correlated_data(50, vec![2, 1, 2], 8);
        let est = BlockPrecision::new(data.partition().clone(), initial_sigma(&data)).unwrap();
        let biggest = data
            .partition()
            .pairs()
            .map(|(i, j)| norm(&crate::objective::block_gradient(&est, &data, i, j).unwrap()))
            .fold(0.0, f64::max);
        let fit_result = fit(&data, &FitConfig::with_lambda(biggest * 1.5), None).unwrap();
        assert!(fit_result.converged);
        assert!(fit_result.sweeps <= 2);
        assert_eq!(fit_result.estimate.num_blocks(), 0);
        let expected = stationary_sigma_at_zero(&data);
        for (a, b) in fit_result.estimate.sigma().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fit_result.kkt.satisfied);
    }

    #[test]
    fn fit_is_monotone_and_certified() {
        let data = correlated_data(60, vec![1, 2, 2, 1], 2);
        let result = fit(&data, &FitConfig::with_lambda(0.05), None).unwrap();
        assert!(result.converged);
        for w in result.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-10 * w[0].abs().max(1.0));
        }
        assert!(result.kkt.satisfied, "{:?}", result.kkt);
        let direct = objective(&result.estimate, &data, 0.05).unwrap();
        assert!((direct.total - result.objective()).abs() < 1e-9);
        assert!(result.estimate.num_blocks() > 0);
    }

    #[test]
    fn fit_is_deterministic() {
        let data = correlated_data(40, vec![2, 2, 1], 3);
        let cfg = FitConfig::with_lambda(0.08);
        let a = fit(&data, &cfg, None).unwrap();
        let b = fit(&data, &cfg, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn warm_and_cold_starts_agree() {
        let data = correlated_data(80, vec![1, 2, 2], 9);
        let cfg = FitConfig {
            tol: 1e-10,
            ..FitConfig::with_lambda(0.05)
        };
        let cold = fit(&data, &cfg, None).unwrap();
        let warm_from = fit(&data, &FitConfig::with_lambda(0.2), None).unwrap();
        let warm = fit(&data, &cfg, Some(&warm_from.estimate)).unwrap();
        assert!((cold.objective() - warm.objective()).abs() < 1e-6);
    }

    #[test]
    fn zero_block_stays_zero_above_threshold() {
        let data = correlated_data(40, vec![2, 2], 6);
        let est = BlockPrecision::new(data.partition().clone(), initial_sigma(&data)).unwrap();
        let g = crate::objective::block_gradient(&est, &data, 0, 1).unwrap();
        let cfg = FitConfig::with_lambda(norm(&g) * 1.0001);
        let block = block_prox_step(0, 1, &est, &data, &cfg).unwrap();
        assert!(block.iter().all(|&v| v == 0.0));
        assert!(block_prox_step(1, 0, &est, &data, &cfg).is_err());
    }

    #[test]
    fn perturbed_solution_fails_certificate() {
        let data = correlated_data(60, vec![1, 2, 2], 12);
        let result = fit(&data, &FitConfig::with_lambda(0.03), None).unwrap();
        assert!(result.kkt.satisfied);
        let mut est = result.estimate.clone();
        let (&(i, j), b) = est.blocks().next().expect("some active block");
        let mut b = b.clone();
        b[(0, 0)] += 0.1;
        est.set_block(i, j, b).unwrap();
        let report = kkt_certificate(&est, &data, 0.03, 1e-4).unwrap();
        assert!(!report.satisfied);
    }

    #[test]
    fn invalid_config_rejected() {
        let data = correlated_data(20, vec![1, 1], 1);
        assert!(fit(&data, &FitConfig::with_lambda(-1.0), None).is_err());
        let cfg = FitConfig {
            max_sweeps: 0,
            ..FitConfig::with_lambda(0.1)
        };
        assert!(fit(&data, &cfg, None).is_err());
    }
}
