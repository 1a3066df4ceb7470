//! Edge-recovery scoring over the `p(p-1)/2` candidate node pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::EdgeGraph;
use crate::partition::NodePartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    /// Number of detected edges.
    pub fn total_detected(&self) -> u64 {
        self.tp + self.fp
    }

    /// Number of correctly detected edges.
    pub fn correctly_detected(&self) -> u64 {
        self.tp
    }
}

/// Sensitivity, precision and Matthews correlation. A score whose
/// denominator vanishes is reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub tpr: f64,
    pub ppv: f64,
    pub mcc: f64,
}

pub fn confusion(est: &EdgeGraph, truth: &EdgeGraph) -> Result<ConfusionCounts> {
    let p = truth.num_nodes();
    if est.num_nodes() != p {
        return Err(Error::Dimension(format!(
            "estimate has {} nodes, truth has {p}",
            est.num_nodes()
        )));
    }
    let tp = est.edges().filter(|&(i, j, _)| truth.contains(i, j)).count() as u64;
    let fp = est.num_edges() as u64 - tp;
    let fn_ = truth.num_edges() as u64 - tp;
    let pairs = (p * p.saturating_sub(1) / 2) as u64;
    Ok(ConfusionCounts {
        tp,
        tn: pairs - tp - fp - fn_,
        fp,
        fn_,
    })
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn scores(c: &ConfusionCounts) -> Scores {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    Scores {
        tpr: ratio(tp, tp + fn_),
        ppv: ratio(tp, tp + fp),
        mcc: ratio(tp * tn - fp * fn_, den),
    }
}

/// Harmonic mean of sensitivity and precision, `2TP / (2TP + FP + FN)`.
pub fn f1(c: &ConfusionCounts) -> f64 {
    let tp = c.tp as f64;
    ratio(2.0 * tp, 2.0 * tp + c.fp as f64 + c.fn_ as f64)
}

/// Collapses a graph over flat columns into a graph over nodes: nodes `a`
/// and `b` are joined when any column of `a` is joined to any column of `b`.
/// The node weight is the Euclidean norm of the crossing flat weights.
pub fn aggregate_univariate_blocks(
    flat_graph: &EdgeGraph,
    partition: &NodePartition,
) -> Result<EdgeGraph> {
    if flat_graph.num_nodes() != partition.total_dim() {
        return Err(Error::Dimension(format!(
            "flat graph has {} nodes, partition has {} columns",
            flat_graph.num_nodes(),
            partition.total_dim()
        )));
    }
    let mut sums = std::collections::BTreeMap::new();
    for (a, b, w) in flat_graph.edges() {
        let (na, _) = partition
            .locate(a)
            .ok_or_else(|| Error::Dimension(format!("column {} outside partition", a + 1)))?;
        let (nb, _) = partition
            .locate(b)
            .ok_or_else(|| Error::Dimension(format!("column {} outside partition", b + 1)))?;
        if na != nb {
            *sums.entry((na.min(nb), na.max(nb))).or_insert(0.0) += w * w;
        }
    }
    let mut graph = EdgeGraph::empty(partition.num_nodes());
    for ((i, j), s) in sums {
        graph.insert(i, j, f64::sqrt(s))?;
    }
    Ok(graph)
}

/// Counts and scores of one estimate against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub n_total: u64,
    pub n_correct: u64,
    pub tpr: f64,
    pub ppv: f64,
    pub mcc: f64,
}

pub fn evaluate(est: &EdgeGraph, truth: &EdgeGraph) -> Result<EvalReport> {
    let counts = confusion(est, truth)?;
    let s = scores(&counts);
    Ok(EvalReport {
        counts,
        n_total: counts.total_detected(),
        n_correct: counts.correctly_detected(),
        tpr: s.tpr,
        ppv: s.ppv,
        mcc: s.mcc,
    })
}
