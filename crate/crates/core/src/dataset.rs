use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::partition::NodePartition;

/// `n` samples of the concatenated node vector, stored column-major so that
/// every flat column (one component of one node) is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    partition: NodePartition,
    centered: bool,
}

impl Dataset {
    /// Builds a dataset from column-major values (`values[c * n + r]`).
    pub fn from_columns(n: usize, partition: NodePartition, values: Vec<f64>) -> Result<Self> {
        let d = partition.total_dim();
        if values.len() != n * d {
            return Err(Error::Dimension(format!(
                "expected {} values for {} rows x {} columns, got {}",
                n * d,
                n,
                d,
                values.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 samples, got {n}")));
        }
        let data = Dataset {
            values,
            n,
            partition,
            centered: false,
        };
        data.validate()?;
        Ok(data)
    }

    /// Builds a dataset from row-major samples.
    pub fn from_rows(rows: &[Vec<f64>], partition: NodePartition) -> Result<Self> {
        let n = rows.len();
        let d = partition.total_dim();
        let mut values = vec![0.0; n * d];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dimension(format!(
                    "row {} has {} values, partition expects {}",
                    r + 1,
                    row.len(),
                    d
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                values[c * n + r] = v;
            }
        }
        Self::from_columns(n, partition, values)
    }

    pub fn from_matrix(matrix: &DMatrix<f64>, partition: NodePartition) -> Result<Self> {
        if matrix.ncols() != partition.total_dim() {
            return Err(Error::Dimension(format!(
                "matrix has {} columns, partition expects {}",
                matrix.ncols(),
                partition.total_dim()
            )));
        }
        Self::from_columns(matrix.nrows(), partition, matrix.as_slice().to_vec())
    }

    fn validate(&self) -> Result<()> {
        for c in 0..self.dim() {
            let col = self.column(c);
            if let Some(r) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Parse {
                    row: r + 1,
                    column: c + 1,
                    message: "non-finite value".into(),
                });
            }
            let first = col[0];
            if col.iter().all(|&v| v == first) || sample_variance(col) <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "column {} ({}) has zero variance",
                    c + 1,
                    self.column_name(c)
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.partition.total_dim()
    }

    pub fn partition(&self) -> &NodePartition {
        &self.partition
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.values[c * self.n..(c + 1) * self.n]
    }

    pub fn value(&self, row: usize, column: usize) -> f64 {
        self.values[column * self.n + row]
    }

    pub fn column_name(&self, c: usize) -> String {
        match self.partition.locate(c) {
            Some((i, k)) => format!("v{}.{}", i + 1, k + 1),
            None => format!("#{}", c + 1),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.dim(), &self.values)
    }

    /// Same samples under a different layout of the same columns.
    pub fn with_partition(&self, partition: NodePartition) -> Result<Self> {
        if partition.total_dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "partition covers {} columns, data has {}",
                partition.total_dim(),
                self.dim()
            )));
        }
        Ok(Dataset {
            partition,
            ..self.clone()
        })
    }

    pub fn column_means(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|c| self.column(c).iter().sum::<f64>() / self.n as f64)
            .collect()
    }

    /// Unbiased (`n - 1`) sample variance of every column.
    pub fn column_variances(&self) -> Vec<f64> {
        (0..self.dim()).map(|c| sample_variance(self.column(c))).collect()
    }

    /// Subtracts the given per-column shifts. The result is flagged as
    /// centered only when the shifts are this dataset's own means.
    pub fn shifted(&self, shifts: &[f64]) -> Result<Self> {
        if shifts.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "{} shifts for {} columns",
                shifts.len(),
                self.dim()
            )));
        }
        let mut values = self.values.clone();
        for (c, &m) in shifts.iter().enumerate() {
            for v in &mut values[c * self.n..(c + 1) * self.n] {
                *v -= m;
            }
        }
        Ok(Dataset {
            values,
            n: self.n,
            partition: self.partition.clone(),
            centered: false,
        })
    }

    /// Rows at the given indices, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let m = rows.len();
        let mut values = Vec::with_capacity(m * self.dim());
        for c in 0..self.dim() {
            let col = self.column(c);
            values.extend(rows.iter().map(|&r| col[r]));
        }
        Self::from_columns(m, self.partition.clone(), values)
    }

    /// Divides every column by its sample standard deviation.
    pub fn standardized(&self) -> Self {
        let mut values = self.values.clone();
        for c in 0..self.dim() {
            let sd = sample_variance(self.column(c)).sqrt();
            for v in &mut values[c * self.n..(c + 1) * self.n] {
                *v /= sd;
            }
        }
        Dataset {
            values,
            n: self.n,
            partition: self.partition.clone(),
            centered: self.centered,
        }
    }

    pub(crate) fn mark_centered(mut self) -> Self {
        self.centered = true;
        self
    }
}

pub(crate) fn sample_variance(col: &[f64]) -> f64 {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Subtracts every column mean and flags the result as centered.
pub fn center_columns(data: &Dataset) -> Dataset {
    if data.is_centered() {
        return data.clone();
    }
    let means = data.column_means();
    data.shifted(&means)
        .expect("means have one entry per column")
        .mark_centered()
}

/// Residual-variance estimate of every diagonal precision entry.
///
/// Component `(i, k)` is regressed on all columns of the other nodes; with
/// residual `e`, the estimate is `(n - m) / e'e` where `m = sum_{j != i} K_j`.
pub fn residual_sigma_estimate(data: &Dataset) -> Result<Vec<f64>> {
    let part = data.partition();
    let n = data.n();
    let d = data.dim();
    let mut sigma = vec![0.0; d];
    for i in 0..part.num_nodes() {
        let own = part.columns(i);
        let others: Vec<usize> = (0..d).filter(|c| !own.contains(c)).collect();
        let m = others.len();
        if n <= m {
            return Err(Error::InvalidInput(format!(
                "node {} regression needs more than {m} samples, got {n}",
                i + 1
            )));
        }
        let q = if m > 0 {
            let design = DMatrix::from_fn(n, m, |r, c| data.value(r, others[c]));
            let qr = design.qr();
            let r = qr.r();
            let scale = (0..m).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
            if (0..m).any(|k| r[(k, k)].abs() <= 1e-10 * scale) {
                return Err(Error::RankDeficient { node: i + 1 });
            }
            Some(qr.q())
        } else {
            None
        };
        for c in own {
            let y = DVector::from_column_slice(data.column(c));
            let e = match &q {
                Some(q) => &y - q * (q.transpose() * &y),
                None => y,
            };
            let rss = e.norm_squared();
            if rss <= 0.0 {
                return Err(Error::RankDeficient { node: i + 1 });
            }
            sigma[c] = (n - m) as f64 / rss;
        }
    }
    Ok(sigma)
}
