#![allow(dead_code)]

use mconcord::{center_columns, BlockPrecision, Dataset, NodePartition};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Correlated Gaussian data: standard normals mixed by a random lower
/// triangular matrix, then centered.
pub fn mixed_data(n: usize, dims: Vec<usize>, seed: u64) -> Dataset {
    let part = NodePartition::new(dims).unwrap();
    let d = part.total_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mix = DMatrix::from_fn(d, d, |a, b| {
        if a == b {
            1.0
        } else if b < a {
            0.4 * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        }
    });
    center_columns(&Dataset::from_matrix(&(z * mix.transpose()), part).unwrap())
}

/// Estimate with random blocks on every pair and random positive diagonal.
pub fn random_estimate(part: &NodePartition, seed: u64, scale: f64) -> BlockPrecision {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = (0..part.total_dim())
        .map(|_| rng.random_range(0.5..2.0))
        .collect();
    let mut est = BlockPrecision::new(part.clone(), sigma).unwrap();
    for (i, j) in part.pairs() {
        let b = DMatrix::from_fn(part.dim(i), part.dim(j), |_, _| {
            scale * rng.sample::<f64, _>(StandardNormal)
        });
        est.set_block(i, j, b).unwrap();
    }
    est
}

/// `Y'Y / n` as a dense matrix.
pub fn covariance(data: &Dataset) -> DMatrix<f64> {
    let y = data.to_matrix();
    y.transpose() * &y / data.n() as f64
}

/// Penalized loss written with dense matrices:
/// `1/2 sum_c (-ln W_cc + (W S W)_cc) + lambda sum_{i<j} |W_ij|_F`.
/// `w` holds the diagonal entries and the cross-node blocks; within-node
/// off-diagonal entries must be zero.
pub fn dense_objective(w: &DMatrix<f64>, s: &DMatrix<f64>, part: &NodePartition, lambda: f64) -> f64 {
    let ws = w * s;
    let mut total = 0.0;
    for c in 0..w.nrows() {
        total += -w[(c, c)].ln() + (ws.row(c) * w.column(c))[(0, 0)];
    }
    0.5 * total + lambda * dense_penalty(w, part)
}

pub fn dense_penalty(w: &DMatrix<f64>, part: &NodePartition) -> f64 {
    part.pairs()
        .map(|(i, j)| {
            w.view((part.offset(i), part.offset(j)), (part.dim(i), part.dim(j)))
                .norm()
        })
        .sum()
}

/// Result of the dense accelerated proximal-gradient solver.
pub struct OracleFit {
    pub w: DMatrix<f64>,
    pub objective: f64,
    pub iterations: usize,
}

/// Minimizes the penalized loss over the cross-node blocks by FISTA with
/// backtracking and adaptive restart. The diagonal is profiled out in closed
/// form at every evaluation, so the iterate is the block part only.
pub fn fista_oracle(data: &Dataset, lambda: f64, max_iter: usize) -> OracleFit {
    let part = data.partition().clone();
    let s = covariance(data);
    let d = s.nrows();
    let node_of: Vec<usize> = (0..d).map(|c| part.locate(c).unwrap().0).collect();

    // diagonal minimizer for fixed off-diagonal part `u`
    let profile = |u: &DMatrix<f64>| -> DMatrix<f64> {
        let su = &s * u;
        let mut w = u.clone();
        for c in 0..d {
            let b = su[(c, c)];
            let a = s[(c, c)];
            w[(c, c)] = (-b + (b * b + 2.0 * a).sqrt()) / (2.0 * a);
        }
        w
    };
    let smooth = |u: &DMatrix<f64>| -> (f64, DMatrix<f64>) {
        let w = profile(u);
        let value = dense_objective(&w, &s, &part, 0.0);
        let sw = &s * &w;
        let mut g = &sw + sw.transpose();
        for a in 0..d {
            for b in 0..d {
                if node_of[a] == node_of[b] {
                    g[(a, b)] = 0.0;
                }
            }
        }
        (value, g)
    };
    let prox = |v: &DMatrix<f64>, t: f64| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(d, d);
        for (i, j) in part.pairs() {
            let (oi, oj) = (part.offset(i), part.offset(j));
            let block = v.view((oi, oj), (part.dim(i), part.dim(j))).clone_owned();
            let nb = block.norm();
            if nb > t {
                let shrunk = block * (1.0 - t / nb);
                out.view_mut((oi, oj), shrunk.shape()).copy_from(&shrunk);
                out.view_mut((oj, oi), (shrunk.ncols(), shrunk.nrows()))
                    .copy_from(&shrunk.transpose());
            }
        }
        out
    };
    let total = |u: &DMatrix<f64>| smooth(u).0 + lambda * dense_penalty(u, &part);

    let mut x = DMatrix::<f64>::zeros(d, d);
    let mut y = x.clone();
    let mut theta: f64 = 1.0;
    let mut step: f64 = 1.0;
    let mut fx = total(&x);
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let (fy, gy) = smooth(&y);
        let next = loop {
            // matrix entries count every symmetric pair twice
            let cand = prox(&(&y - &gy * (step / 2.0)), lambda * step / 2.0);
            let diff = &cand - &y;
            let model = fy + gy.dot(&diff) / 2.0 + diff.norm_squared() / (2.0 * step);
            if smooth(&cand).0 <= model + 1e-15 * fy.abs().max(1.0) {
                break cand;
            }
            step *= 0.5;
        };
        let f_next = total(&next);
        let moved = (&next - &x).norm();
        if f_next > fx {
            if moved < 1e-13 {
                break;
            }
            // restart momentum from the current point
            theta = 1.0;
            y = x.clone();
            continue;
        }
        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        y = &next + (&next - &x) * ((theta - 1.0) / theta_next);
        theta = theta_next;
        x = next;
        fx = f_next;
        step *= 1.1;
        if moved < 1e-13 {
            break;
        }
    }
    let w = profile(&x);
    OracleFit {
        objective: dense_objective(&w, &s, &part, lambda),
        w,
        iterations,
    }
}

pub fn central_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}
