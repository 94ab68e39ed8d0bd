//! Graph samples, adjacency construction and node featurization.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// One classification sample: an undirected, unweighted graph.
///
/// Edges are stored once as `(i, j)` with `i < j`; self-loops are dropped
/// on construction and only reappear through the `A + I` shift in
/// [`normalize_adjacency`].
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    node_labels: Option<Vec<i64>>,
    node_attributes: Option<Vec<Vec<f64>>>,
    graph_label: usize,
}

/// Summary of what [`Graph::new`] had to clean up in its edge input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeCleanup {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges are normalized to
    /// `i < j`, deduplicated, and self-loops are removed.
    pub fn new(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        graph_label: usize,
    ) -> Result<Self> {
        let (graph, _) = Self::with_cleanup(num_nodes, edges, graph_label)?;
        Ok(graph)
    }

    pub fn with_cleanup(
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        graph_label: usize,
    ) -> Result<(Self, EdgeCleanup)> {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut cleanup = EdgeCleanup::default();
        let mut list = Vec::new();
        for (i, j) in edges {
            if i >= num_nodes || j >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) out of range for {num_nodes} nodes"
                )));
            }
            if i == j {
                cleanup.self_loops += 1;
                continue;
            }
            list.push((i.min(j), i.max(j)));
        }
        list.sort_unstable();
        let before = list.len();
        list.dedup();
        cleanup.duplicates = before - list.len();
        Ok((
            Self {
                num_nodes,
                edges: list,
                node_labels: None,
                node_attributes: None,
                graph_label,
            },
            cleanup,
        ))
    }

    pub fn with_node_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn with_node_attributes(mut self, attributes: Vec<Vec<f64>>) -> Result<Self> {
        if attributes.len() != self.num_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} attribute rows for {} nodes",
                attributes.len(),
                self.num_nodes
            )));
        }
        self.node_attributes = Some(attributes);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_labels(&self) -> Option<&[i64]> {
        self.node_labels.as_deref()
    }

    pub fn node_attributes(&self) -> Option<&[Vec<f64>]> {
        self.node_attributes.as_deref()
    }

    pub fn graph_label(&self) -> usize {
        self.graph_label
    }

    pub(crate) fn set_graph_label(&mut self, label: usize) {
        self.graph_label = label;
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// Symmetric 0/1 adjacency matrix with zero diagonal.
pub fn adjacency(g: &Graph) -> DenseMatrix {
    let n = g.num_nodes();
    let mut a = DenseMatrix::zeros(n, n);
    for &(i, j) in g.edges() {
        a.set(i, j, 1.0);
        a.set(j, i, 1.0);
    }
    a
}

/// Recovers the `i < j` edge list from a 0/1 adjacency matrix.
pub fn edges_from_adjacency(a: &DenseMatrix) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..a.rows() {
        for j in (i + 1)..a.cols() {
            if a.get(i, j) != 0.0 {
                out.push((i, j));
            }
        }
    }
    out
}

/// `D̂^{-1/2} (A + I) D̂^{-1/2}` with `D̂` the degree matrix of `A + I`.
pub fn normalize_adjacency(a: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| {
            let deg: f64 = a.row(i).iter().sum::<f64>() + 1.0;
            1.0 / deg.sqrt()
        })
        .collect();
    DenseMatrix::from_fn(n, n, |i, j| {
        let shifted = a.get(i, j) + if i == j { 1.0 } else { 0.0 };
        inv_sqrt[i] * shifted * inv_sqrt[j]
    })
}

/// How node signals `X` are materialized from a [`Graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    OnehotLabels,
    Degree,
    ConstantOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub mode: FeatureMode,
    /// Sorted, dataset-wide node label ids (used by `OnehotLabels`).
    pub label_vocabulary: Vec<i64>,
    pub degree_cap: usize,
}

pub const DEFAULT_DEGREE_CAP: usize = 10;

impl FeatureSpec {
    pub fn onehot(vocabulary: impl IntoIterator<Item = i64>) -> Self {
        let set: BTreeSet<i64> = vocabulary.into_iter().collect();
        Self {
            mode: FeatureMode::OnehotLabels,
            label_vocabulary: set.into_iter().collect(),
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    pub fn degree(cap: usize) -> Self {
        Self {
            mode: FeatureMode::Degree,
            label_vocabulary: Vec::new(),
            degree_cap: cap,
        }
    }

    pub fn constant() -> Self {
        Self {
            mode: FeatureMode::ConstantOne,
            label_vocabulary: Vec::new(),
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }

    /// Width of the feature rows this spec produces.
    pub fn dim(&self) -> usize {
        match self.mode {
            FeatureMode::OnehotLabels => self.label_vocabulary.len(),
            FeatureMode::Degree => self.degree_cap + 1,
            FeatureMode::ConstantOne => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            FeatureMode::OnehotLabels if self.label_vocabulary.is_empty() => Err(Error::Config(
                vec!["onehot_labels features need a non-empty label vocabulary".into()],
            )),
            FeatureMode::Degree if self.degree_cap < 1 => {
                Err(Error::Config(vec!["degree_cap must be at least 1".into()]))
            }
            _ => Ok(()),
        }
    }
}

/// Materializes the `n × d` node signal matrix for `g`.
pub fn node_features(g: &Graph, spec: &FeatureSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let n = g.num_nodes();
    let d = spec.dim();
    let mut x = DenseMatrix::zeros(n, d);
    match spec.mode {
        FeatureMode::OnehotLabels => {
            let labels = g.node_labels().ok_or_else(|| {
                Error::InvalidGraph("onehot_labels features need node labels".into())
            })?;
            for (i, &label) in labels.iter().enumerate() {
                let col = spec
                    .label_vocabulary
                    .binary_search(&label)
                    .map_err(|_| Error::UnknownNodeLabel(label))?;
                x.set(i, col, 1.0);
            }
        }
        FeatureMode::Degree => {
            for (i, deg) in g.degrees().into_iter().enumerate() {
                x.set(i, deg.min(spec.degree_cap), 1.0);
            }
        }
        FeatureMode::ConstantOne => x.fill(1.0),
    }
    Ok(x)
}
