use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::partition::NodePartition;

/// Row-major vectorization of an off-diagonal block: entry `(k, l)` of a
/// `K_i x K_j` block lands at position `k * K_j + l`.
pub fn vectorize_block(
    partition: &NodePartition,
    i: usize,
    j: usize,
    block: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    check_block_shape(partition, i, j, block.nrows(), block.ncols())?;
    let mut out = Vec::with_capacity(block.len());
    for k in 0..block.nrows() {
        for l in 0..block.ncols() {
            out.push(block[(k, l)]);
        }
    }
    Ok(out)
}

/// Inverse of [`vectorize_block`].
pub fn unvectorize_block(
    partition: &NodePartition,
    i: usize,
    j: usize,
    values: &[f64],
) -> Result<DMatrix<f64>> {
    let (ki, kj) = (partition.dim(i), partition.dim(j));
    if values.len() != ki * kj {
        return Err(Error::Dimension(format!(
            "block ({},{}) needs {} entries, got {}",
            i + 1,
            j + 1,
            ki * kj,
            values.len()
        )));
    }
    Ok(DMatrix::from_row_slice(ki, kj, values))
}

fn check_block_shape(
    partition: &NodePartition,
    i: usize,
    j: usize,
    rows: usize,
    cols: usize,
) -> Result<()> {
    let p = partition.num_nodes();
    if i >= p || j >= p {
        return Err(Error::Dimension(format!(
            "block ({},{}) outside a {p}-node partition",
            i + 1,
            j + 1
        )));
    }
    if rows != partition.dim(i) || cols != partition.dim(j) {
        return Err(Error::Dimension(format!(
            "block ({},{}) must be {}x{}, got {}x{}",
            i + 1,
            j + 1,
            partition.dim(i),
            partition.dim(j),
            rows,
            cols
        )));
    }
    Ok(())
}

/// Block-structured precision estimate.
///
/// Holds the diagonal entries `sigma[c]` for every flat column `c` and the
/// upper off-diagonal blocks `(i, j)`, `i < j`. A missing block is exactly
/// zero; the lower block `(j, i)` is the transpose of `(i, j)`. Off-diagonal
/// entries inside a diagonal block are not parameters and read as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPrecision {
    partition: NodePartition,
    sigma: Vec<f64>,
    blocks: BTreeMap<(usize, usize), DMatrix<f64>>,
}

impl BlockPrecision {
    pub fn new(partition: NodePartition, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != partition.total_dim() {
            return Err(Error::Dimension(format!(
                "{} diagonal entries for {} columns",
                sigma.len(),
                partition.total_dim()
            )));
        }
        if let Some(c) = sigma.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "diagonal entry {} must be positive and finite, got {}",
                c + 1,
                sigma[c]
            )));
        }
        Ok(BlockPrecision {
            partition,
            sigma,
            blocks: BTreeMap::new(),
        })
    }

    pub fn partition(&self) -> &NodePartition {
        &self.partition
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn set_sigma(&mut self, column: usize, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "diagonal entry {} must be positive and finite, got {value}",
                column + 1
            )));
        }
        self.sigma[column] = value;
        Ok(())
    }

    /// Stored blocks in lexicographic `(i, j)` order.
    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &DMatrix<f64>)> {
        self.blocks.iter()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(&(i, j))
    }

    /// Block `(i, j)` as a dense matrix, zero when absent.
    pub fn block_or_zero(&self, i: usize, j: usize) -> DMatrix<f64> {
        match self.blocks.get(&(i, j)) {
            Some(b) => b.clone(),
            None => DMatrix::zeros(self.partition.dim(i), self.partition.dim(j)),
        }
    }

    /// Stores block `(i, j)`, `i < j`. An all-zero block is removed instead.
    pub fn set_block(&mut self, i: usize, j: usize, block: DMatrix<f64>) -> Result<()> {
        if i >= j {
            return Err(Error::InvalidInput(format!(
                "only upper blocks (i < j) are stored, got ({},{})",
                i + 1,
                j + 1
            )));
        }
        check_block_shape(&self.partition, i, j, block.nrows(), block.ncols())?;
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { i: i + 1, j: j + 1 });
        }
        if block.iter().all(|&v| v == 0.0) {
            self.blocks.remove(&(i, j));
        } else {
            self.blocks.insert((i, j), block);
        }
        Ok(())
    }

    /// `omega_{ijkl}` for any ordered node pair, using `omega_{ijkl} = omega_{jilk}`.
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        if i == j {
            return if k == l {
                self.sigma[self.partition.column(i, k)]
            } else {
                0.0
            };
        }
        if i < j {
            self.blocks.get(&(i, j)).map_or(0.0, |b| b[(k, l)])
        } else {
            self.blocks.get(&(j, i)).map_or(0.0, |b| b[(l, k)])
        }
    }

    /// Dense `D x D` matrix implied by the parameterization.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.partition.total_dim();
        let mut m = DMatrix::zeros(d, d);
        for (c, &s) in self.sigma.iter().enumerate() {
            m[(c, c)] = s;
        }
        for (&(i, j), b) in &self.blocks {
            let (oi, oj) = (self.partition.offset(i), self.partition.offset(j));
            for k in 0..b.nrows() {
                for l in 0..b.ncols() {
                    m[(oi + k, oj + l)] = b[(k, l)];
                    m[(oj + l, oi + k)] = b[(k, l)];
                }
            }
        }
        m
    }

    /// Edges are exactly the stored (nonzero) blocks, weighted by Frobenius norm.
    pub fn edge_graph(&self) -> EdgeGraph {
        let mut graph = EdgeGraph::empty(self.partition.num_nodes());
        for (&(i, j), b) in &self.blocks {
            graph
                .insert(i, j, b.norm())
                .expect("stored blocks are nonzero upper pairs");
        }
        graph
    }

    /// Largest absolute difference over all parameters (diagonal and blocks).
    pub fn max_abs_diff(&self, other: &BlockPrecision) -> f64 {
        let mut diff = self
            .sigma
            .iter()
            .zip(&other.sigma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        for (i, j) in self.partition.pairs() {
            let (a, b) = (self.block(i, j), other.block(i, j));
            if a.is_none() && b.is_none() {
                continue;
            }
            let d = (self.block_or_zero(i, j) - other.block_or_zero(i, j)).amax();
            diff = diff.max(d);
        }
        diff
    }
}
