//! Immutable undirected graphs, degree statistics and GCN normalization.

use std::collections::BTreeMap;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Symmetric CSR adjacency without weights. Neighbor lists are sorted,
/// deduplicated and free of self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Topology {
    /// Symmetrizes `edges`, dropping self-loops and duplicates.
    pub fn from_edges(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references a node >= {num_nodes}"
                )));
            }
            if u == v {
                continue;
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        Ok(Self::from_lists(lists))
    }

    fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            neighbors.extend_from_slice(list);
            offsets.push(neighbors.len());
        }
        Self { offsets, neighbors }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of stored directed entries (twice the undirected edge count).
    pub fn num_entries(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    /// Undirected edge list with `u < v`.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        (0..self.num_nodes())
            .flat_map(|u| {
                self.neighbors(u)
                    .iter()
                    .filter(move |&&v| u < v)
                    .map(move |&v| (u, v))
            })
            .collect()
    }

    /// Appends `extra` new nodes (ids `N..N+extra`) and connects them to
    /// existing nodes. `attachments` holds `(new_local_index, existing_node)`.
    pub fn with_attachments(&self, extra: usize, attachments: &[(usize, usize)]) -> Topology {
        let n = self.num_nodes();
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); extra];
        for &(m, target) in attachments {
            assert!(m < extra && target < n, "attachment out of range");
            incoming[target].push(n + m);
            outgoing[m].push(target);
        }
        let mut offsets = Vec::with_capacity(n + extra + 1);
        let mut neighbors = Vec::with_capacity(self.neighbors.len() + 2 * attachments.len());
        offsets.push(0);
        for (i, inc) in incoming.iter_mut().enumerate() {
            neighbors.extend_from_slice(self.neighbors(i));
            inc.sort_unstable();
            inc.dedup();
            neighbors.extend_from_slice(inc);
            offsets.push(neighbors.len());
        }
        for out in &mut outgoing {
            out.sort_unstable();
            out.dedup();
            neighbors.extend_from_slice(out);
            offsets.push(neighbors.len());
        }
        Topology { offsets, neighbors }
    }

    /// `Â = D̃^{-1/2}(A+I)D̃^{-1/2}` where `D̃` is the degree matrix of `A+I`.
    pub fn normalized_adjacency(&self) -> NormalizedAdjacency {
        let n = self.num_nodes();
        let inv_sqrt: Vec<f64> = (0..n)
            .map(|i| 1.0 / ((self.degree(i) + 1) as f64).sqrt())
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(self.neighbors.len() + n);
        let mut values = Vec::with_capacity(self.neighbors.len() + n);
        offsets.push(0);
        for i in 0..n {
            let nbrs = self.neighbors(i);
            let split = nbrs.partition_point(|&j| j < i);
            let push = |j: usize, idx: &mut Vec<usize>, val: &mut Vec<f64>| {
                idx.push(j);
                val.push(inv_sqrt[i] * inv_sqrt[j]);
            };
            for &j in &nbrs[..split] {
                push(j, &mut indices, &mut values);
            }
            push(i, &mut indices, &mut values);
            for &j in &nbrs[split..] {
                push(j, &mut indices, &mut values);
            }
            offsets.push(indices.len());
        }
        NormalizedAdjacency(SparseMatrix::from_csr(n, n, offsets, indices, values))
    }

    /// Row-normalized adjacency `D^{-1}A`; rows of isolated nodes are empty.
    pub fn mean_aggregator(&self) -> SparseMatrix {
        let n = self.num_nodes();
        let values = (0..n)
            .flat_map(|i| {
                let d = self.degree(i);
                std::iter::repeat_n(1.0 / d.max(1) as f64, d)
            })
            .collect();
        SparseMatrix::from_csr(n, n, self.offsets.clone(), self.neighbors.clone(), values)
    }
}

/// Symmetric normalized adjacency with self-loops, as used by GCN.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency(SparseMatrix);

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &SparseMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.0
    }
}

/// Empirical node-degree distribution over all nodes of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    histogram: BTreeMap<usize, f64>,
}

impl DegreeDistribution {
    pub fn from_topology(topology: &Topology) -> Self {
        let n = topology.num_nodes();
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..n {
            *counts.entry(topology.degree(i)).or_default() += 1;
        }
        let histogram = counts
            .into_iter()
            .map(|(d, c)| (d, c as f64 / n as f64))
            .collect();
        Self { histogram }
    }

    /// Builds from explicit `(degree, probability)` pairs, normalizing the mass.
    pub fn from_probabilities(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut histogram = BTreeMap::new();
        for (d, p) in pairs {
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::input(format!("bad probability {p} for degree {d}")));
            }
            *histogram.entry(d).or_insert(0.0) += p;
        }
        let total: f64 = histogram.values().sum();
        if total <= 0.0 {
            return Err(Error::input("degree distribution has no mass"));
        }
        histogram.values_mut().for_each(|p| *p /= total);
        Ok(Self { histogram })
    }

    pub fn probability(&self, degree: usize) -> f64 {
        self.histogram.get(&degree).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.histogram.iter().map(|(&d, &p)| (d, p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(d, p)| d as f64 * p).sum()
    }
}

/// Immutable undirected graph with dense node features and class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    topology: Topology,
    features: Array2<f64>,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Graph {
    /// Builds a graph from directed pairs; the node count is the number of
    /// feature rows. Edges are symmetrized, deduplicated and self-loops dropped.
    pub fn build(
        edges: &[(usize, usize)],
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::input(format!(
                "{} labels for {} feature rows",
                labels.len(),
                n
            )));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= num_classes) {
            return Err(Error::input(format!(
                "label {y} of node {i} is not below num_classes {num_classes}"
            )));
        }
        let topology = Topology::from_edges(n, edges)?;
        Self::from_parts(topology, features, labels, num_classes)
    }

    pub fn from_parts(
        topology: Topology,
        features: Array2<f64>,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        let n = topology.num_nodes();
        if features.nrows() != n || labels.len() != n {
            return Err(Error::input("topology, features and labels disagree on N"));
        }
        if labels.iter().any(|&y| y >= num_classes) {
            return Err(Error::input("label out of range"));
        }
        Ok(Self {
            topology,
            features: features.as_standard_layout().into_owned(),
            labels,
            num_classes,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.topology.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.topology.neighbors(i)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.topology.degree(i)
    }

    pub fn degree_distribution(&self) -> DegreeDistribution {
        DegreeDistribution::from_topology(&self.topology)
    }

    pub fn normalized_adjacency(&self) -> NormalizedAdjacency {
        self.topology.normalized_adjacency()
    }

    /// Hex SHA-256 over structure, features and labels.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.num_nodes() as u64).to_le_bytes());
        h.update((self.num_classes as u64).to_le_bytes());
        h.update((self.feature_dim() as u64).to_le_bytes());
        for &o in &self.topology.offsets {
            h.update((o as u64).to_le_bytes());
        }
        for &v in &self.topology.neighbors {
            h.update((v as u64).to_le_bytes());
        }
        for &x in self.features.iter() {
            h.update(x.to_bits().to_le_bytes());
        }
        for &y in &self.labels {
            h.update((y as u64).to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
