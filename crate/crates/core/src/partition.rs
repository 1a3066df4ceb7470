use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layout of `p` nodes where node `i` carries a `K_i`-dimensional variable.
///
/// Columns of a dataset are laid out node by node: node `i` owns the flat
/// column range `offsets[i]..offsets[i + 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct NodePartition {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionSpec {
    dims: Vec<usize>,
}

impl TryFrom<PartitionSpec> for NodePartition {
    type Error = Error;

    fn try_from(spec: PartitionSpec) -> Result<Self> {
        NodePartition::new(spec.dims)
    }
}

impl From<NodePartition> for PartitionSpec {
    fn from(partition: NodePartition) -> Self {
        PartitionSpec {
            dims: partition.dims,
        }
    }
}

impl NodePartition {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidInput("partition needs at least one node".into()));
        }
        if let Some(i) = dims.iter().position(|&k| k == 0) {
            return Err(Error::InvalidInput(format!(
                "node {} has zero dimension",
                i + 1
            )));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        offsets.push(0);
        for &k in &dims {
            offsets.push(offsets.last().unwrap() + k);
        }
        Ok(NodePartition { dims, offsets })
    }

    /// `p` nodes of common dimension `k`.
    pub fn uniform(p: usize, k: usize) -> Result<Self> {
        Self::new(vec![k; p])
    }

    /// Every flat column as its own one-dimensional node.
    pub fn singletons(total_dim: usize) -> Result<Self> {
        Self::new(vec![1; total_dim])
    }

    pub fn num_nodes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, node: usize) -> usize {
        self.dims[node]
    }

    pub fn offset(&self, node: usize) -> usize {
        self.offsets[node]
    }

    pub fn total_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// Flat column index of component `k` of node `i` (both 0-based).
    pub fn column(&self, node: usize, component: usize) -> usize {
        debug_assert!(component < self.dims[node]);
        self.offsets[node] + component
    }

    pub fn columns(&self, node: usize) -> std::ops::Range<usize> {
        self.offsets[node]..self.offsets[node + 1]
    }

    /// Inverse of [`column`](Self::column).
    pub fn locate(&self, column: usize) -> Option<(usize, usize)> {
        if column >= self.total_dim() {
            return None;
        }
        let node = self.offsets.partition_point(|&o| o <= column) - 1;
        Some((node, column - self.offsets[node]))
    }

    /// Number of unordered node pairs, `p(p-1)/2`.
    pub fn num_pairs(&self) -> usize {
        let p = self.num_nodes();
        p * (p - 1) / 2
    }

    /// All pairs `(i, j)` with `i < j` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.num_nodes();
        (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
    }

    /// Column headers `v<i>.<k>` with 1-based node and component.
    pub fn column_names(&self) -> Vec<String> {
        (0..self.num_nodes())
            .flat_map(|i| (0..self.dims[i]).map(move |k| format!("v{}.{}", i + 1, k + 1)))
            .collect()
    }
}
