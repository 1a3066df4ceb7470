use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph over `p` nodes with a positive weight per edge.
///
/// Nodes are 0-based in memory and 1-based in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EdgeGraphJson", into = "EdgeGraphJson")]
pub struct EdgeGraph {
    p: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
struct EdgeGraphJson {
    p: usize,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    i: usize,
    j: usize,
    frobenius: f64,
}

impl TryFrom<EdgeGraphJson> for EdgeGraph {
    type Error = Error;

    fn try_from(json: EdgeGraphJson) -> Result<Self> {
        let mut graph = EdgeGraph::empty(json.p);
        for e in json.edges {
            if e.i == 0 || e.j == 0 {
                return Err(Error::InvalidInput("edge endpoints are 1-based".into()));
            }
            graph.insert(e.i - 1, e.j - 1, e.frobenius)?;
        }
        Ok(graph)
    }
}

impl From<EdgeGraph> for EdgeGraphJson {
    fn from(graph: EdgeGraph) -> Self {
        EdgeGraphJson {
            p: graph.p,
            edges: graph
                .edges
                .into_iter()
                .map(|((i, j), w)| EdgeJson {
                    i: i + 1,
                    j: j + 1,
                    frobenius: w,
                })
                .collect(),
        }
    }
}

impl EdgeGraph {
    pub fn empty(p: usize) -> Self {
        EdgeGraph {
            p,
            edges: BTreeMap::new(),
        }
    }

    /// Adds (or overwrites) edge `{i, j}`. Self-loops, out-of-range nodes and
    /// non-positive weights are rejected.
    pub fn insert(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop at node {}", i + 1)));
        }
        if i >= self.p || j >= self.p {
            return Err(Error::InvalidInput(format!(
                "edge ({},{}) outside a {}-node graph",
                i + 1,
                j + 1,
                self.p
            )));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "edge ({},{}) has non-positive weight {weight}",
                i + 1,
                j + 1
            )));
        }
        self.edges.insert((i.min(j), i.max(j)), weight);
        Ok(())
    }

    pub fn num_nodes(&self) -> usize {
        self.p
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.edges.get(&(i.min(j), i.max(j))).copied()
    }

    /// Edges as `(i, j, weight)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_is_one_based() {
        let mut g = EdgeGraph::empty(3);
        g.insert(2, 0, 0.35).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"p":3,"edges":[{"i":1,"j":3,"frobenius":0.35}]}"#);
        let back: EdgeGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(back.contains(0, 2) && back.contains(2, 0));
    }

    #[test]
    fn rejects_invalid_edges() {
        let mut g = EdgeGraph::empty(3);
        assert!(g.insert(1, 1, 1.0).is_err());
        assert!(g.insert(0, 3, 1.0).is_err());
        assert!(g.insert(0, 1, 0.0).is_err());
        assert!(serde_json::from_str::<EdgeGraph>(r#"{"p":2,"edges":[{"i":0,"j":1,"frobenius":1}]}"#).is_err());
        assert!(serde_json::from_str::<EdgeGraph>(r#"{"p":2,"edges":[{"i":1,"j":1,"frobenius":1}]}"#).is_err());
    }
}
