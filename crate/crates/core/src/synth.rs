//! Random block precision matrices and Gaussian samples from them.
//!
//! All randomness comes from ChaCha20 seeded with the configured seed. Each
//! piece of the construction reads its own stream, so a block's values do not
//! depend on how many draws other blocks consumed:
//!
//! * stream 0: the edge set,
//! * stream `1 + i`: diagonal block of node `i`,
//! * stream `1 + p + t`: off-diagonal block of the `t`-th pair in
//!   lexicographic order,
//! * stream `u64::MAX`: samples drawn by [`sample`].

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::partition::NodePartition;

const SAMPLE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub p: usize,
    pub k: usize,
    /// Fraction of the `p(p-1)/2` pairs that become edges.
    pub density: f64,
    pub n: usize,
    pub seed: u64,
    pub diag_range: (f64, f64),
    pub offdiag_values: Vec<f64>,
    pub shift_margin: f64,
}

impl GeneratorConfig {
    pub fn new(p: usize, k: usize, density: f64, n: usize, seed: u64) -> Self {
        GeneratorConfig {
            p,
            k,
            density,
            n,
            seed,
            diag_range: (0.5, 1.0),
            offdiag_values: vec![0.0, 0.05, -0.05, -0.2, 0.2],
            shift_margin: 0.5,
        }
    }

    pub fn num_pairs(&self) -> usize {
        self.p * self.p.saturating_sub(1) / 2
    }

    /// Realized edge count, `round(density * p(p-1)/2)`.
    pub fn num_edges(&self) -> usize {
        (self.density * self.num_pairs() as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.k == 0 {
            return Err(Error::InvalidInput(format!(
                "need p >= 2 and k >= 1, got p={} k={}",
                self.p, self.k
            )));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if self.density * (self.num_pairs() as f64) < 1.0 || self.num_edges() == 0 {
            return Err(Error::InvalidInput(format!(
                "density {} yields no edge among {} pairs",
                self.density,
                self.num_pairs()
            )));
        }
        let (lo, hi) = self.diag_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("bad diagonal range ({lo}, {hi})")));
        }
        if !self.offdiag_values.iter().any(|&v| v != 0.0)
            || self.offdiag_values.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "off-diagonal value set needs a finite nonzero entry".into(),
            ));
        }
        if !(self.shift_margin > 0.0 && self.shift_margin.is_finite()) {
            return Err(Error::InvalidInput("shift margin must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub config: GeneratorConfig,
    pub partition: NodePartition,
    /// Dense `pK x pK` symmetric positive-definite precision matrix.
    pub omega: DMatrix<f64>,
    pub graph: EdgeGraph,
    /// Diagonal of `omega`.
    pub sigma_true: Vec<f64>,
    /// Diagonal shift added to make `omega` positive definite.
    pub rho: f64,
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The precision matrix before the diagonal shift, and its edge set.
pub fn generate_unshifted(cfg: &GeneratorConfig) -> Result<(DMatrix<f64>, Vec<(usize, usize)>)> {
    cfg.validate()?;
    let (p, k) = (cfg.p, cfg.k);
    let d = p * k;
    let npairs = cfg.num_pairs();

    let mut edge_rng = stream_rng(cfg.seed, 0);
    let mut chosen = rand::seq::index::sample(&mut edge_rng, npairs, cfg.num_edges()).into_vec();
    chosen.sort_unstable();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .collect();

    let mut omega = DMatrix::zeros(d, d);
    let (lo, hi) = cfg.diag_range;
    for i in 0..p {
        let mut rng = stream_rng(cfg.seed, 1 + i as u64);
        let raw = DMatrix::from_fn(k, k, |_, _| {
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        });
        for a in 0..k {
            for b in 0..k {
                omega[(i * k + a, i * k + b)] = if a == b {
                    raw[(a, a)]
                } else {
                    0.5 * (raw[(a, b)] + raw[(b, a)])
                };
            }
        }
    }

    let values = &cfg.offdiag_values;
    let mut edges = Vec::with_capacity(chosen.len());
    for t in chosen {
        let (i, j) = pairs[t];
        let mut rng = stream_rng(cfg.seed, 1 + p as u64 + t as u64);
        let block = loop {
            let b = DMatrix::from_fn(k, k, |_, _| values[rng.random_range(0..values.len())]);
            if b.iter().any(|&v| v != 0.0) {
                break b;
            }
        };
        for a in 0..k {
            for b in 0..k {
                omega[(i * k + a, j * k + b)] = block[(a, b)];
                omega[(j * k + b, i * k + a)] = block[(a, b)];
            }
        }
        edges.push((i, j));
    }
    Ok((omega, edges))
}

pub fn generate_truth(cfg: &GeneratorConfig) -> Result<GroundTruth> {
    let (mut omega, edges) = generate_unshifted(cfg)?;
    let d = omega.nrows();
    let min_eig = SymmetricEigen::new(omega.clone()).eigenvalues.min();
    let rho = min_eig.abs() + cfg.shift_margin;
    for c in 0..d {
        omega[(c, c)] += rho;
    }
    let k = cfg.k;
    let mut graph = EdgeGraph::empty(cfg.p);
    for (i, j) in edges {
        let norm = omega.view((i * k, j * k), (k, k)).norm();
        graph.insert(i, j, norm)?;
    }
    let sigma_true = (0..d).map(|c| omega[(c, c)]).collect();
    Ok(GroundTruth {
        config: cfg.clone(),
        partition: NodePartition::uniform(cfg.p, cfg.k)?,
        omega,
        graph,
        sigma_true,
        rho,
    })
}

/// Ground truth from an explicit precision matrix (used for hand-built truths).
pub fn truth_from_precision(
    omega: DMatrix<f64>,
    partition: NodePartition,
    config: GeneratorConfig,
) -> Result<GroundTruth> {
    let d = partition.total_dim();
    if omega.nrows() != d || omega.ncols() != d {
        return Err(Error::Dimension(format!(
            "precision is {}x{}, partition needs {d}x{d}",
            omega.nrows(),
            omega.ncols()
        )));
    }
    let mut graph = EdgeGraph::empty(partition.num_nodes());
    for (i, j) in partition.pairs() {
        let block = omega.view(
            (partition.offset(i), partition.offset(j)),
            (partition.dim(i), partition.dim(j)),
        );
        let norm = block.norm();
        if norm > 0.0 {
            graph.insert(i, j, norm)?;
        }
    }
    let sigma_true = (0..d).map(|c| omega[(c, c)]).collect();
    Ok(GroundTruth {
        config,
        partition,
        omega,
        graph,
        sigma_true,
        rho: 0.0,
    })
}

/// Draws `n` rows from `N(0, omega^{-1})`. With `omega = L L'`, each row is
/// `L'^{-1} z` for a standard normal `z`.
pub fn sample(truth: &GroundTruth, n: usize, seed: u64) -> Result<Dataset> {
    let d = truth.omega.nrows();
    let chol = truth
        .omega
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("precision matrix is not positive definite".into()))?;
    let mut rng = stream_rng(seed, SAMPLE_STREAM);
    let mut z = DMatrix::<f64>::zeros(d, n);
    for r in 0..n {
        for c in 0..d {
            z[(c, r)] = rng.sample(StandardNormal);
        }
    }
    let x = chol
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::InvalidInput("singular Cholesky factor".into()))?;
    Dataset::from_matrix(&x.transpose(), truth.partition.clone())
}
