use ndarray::{concatenate, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Topology};
use crate::synthesis::{compute_class_quota, QuotaMode};

/// Disjoint train / validation / test node sets with per-class training counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImbalancedSplit {
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
    class_counts_train: Vec<usize>,
}

impl ImbalancedSplit {
    /// Validates disjointness and that every class has a training node.
    pub fn new(
        mut train: Vec<usize>,
        mut val: Vec<usize>,
        mut test: Vec<usize>,
        labels: &[usize],
        num_classes: usize,
    ) -> Result<Self> {
        let n = labels.len();
        let mut owner = vec![0u8; n];
        for (tag, set) in [(1u8, &mut train), (2, &mut val), (3, &mut test)] {
            set.sort_unstable();
            for &i in set.iter() {
                if i >= n {
                    return Err(Error::input(format!("split node {i} >= N={n}")));
                }
                if owner[i] != 0 {
                    return Err(Error::input(format!("node {i} appears in two split sets")));
                }
                owner[i] = tag;
            }
        }
        let mut class_counts_train = vec![0usize; num_classes];
        for &i in &train {
            class_counts_train[labels[i]] += 1;
        }
        if let Some(c) = class_counts_train.iter().position(|&k| k == 0) {
            return Err(Error::input(format!("class {c} has no training node")));
        }
        Ok(Self {
            train,
            val,
            test,
            class_counts_train,
        })
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn val(&self) -> &[usize] {
        &self.val
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    pub fn class_counts_train(&self) -> &[usize] {
        &self.class_counts_train
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts_train.len()
    }

    /// Realized imbalance ratio `max_c n_c / min_c n_c`.
    pub fn rho(&self) -> f64 {
        let max = *self.class_counts_train.iter().max().unwrap();
        let min = *self.class_counts_train.iter().min().unwrap();
        max as f64 / min as f64
    }

    /// Training nodes grouped by class, each group in ascending id order.
    pub fn train_by_class(&self, labels: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for &i in &self.train {
            out[labels[i]].push(i);
        }
        out
    }

    /// The `⌊C/2⌋` classes with the fewest training nodes, ties broken by
    /// lower class index.
    pub fn minor_classes(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.num_classes()).collect();
        order.sort_by_key(|&c| (self.class_counts_train[c], c));
        let mut minor = order[..self.num_classes() / 2].to_vec();
        minor.sort_unstable();
        minor
    }
}

/// Nodes of each class, shuffled with `rng`.
fn shuffled_classes(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); g.num_classes()];
    for i in 0..g.num_nodes() {
        by_class[g.label(i)].push(i);
    }
    for nodes in &mut by_class {
        nodes.shuffle(rng);
    }
    by_class
}

/// Classes ordered by available node count descending, ties by index.
fn classes_by_size(by_class: &[Vec<usize>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..by_class.len()).collect();
    order.sort_by_key(|&c| (std::cmp::Reverse(by_class[c].len()), c));
    order
}

/// Geometric long-tail training counts `round(n_max · ρ^{-p/(C-1)})` for
/// tail positions `p = 0..C`, each clamped to at least one.
pub fn long_tail_counts(num_classes: usize, n_max: usize, rho: f64) -> Vec<usize> {
    (0..num_classes)
        .map(|p| {
            let exponent = if num_classes > 1 {
                p as f64 / (num_classes - 1) as f64
            } else {
                0.0
            };
            ((n_max as f64 * rho.powf(-exponent)).round() as usize).max(1)
        })
        .collect()
}

/// Long-tailed split: the largest class gets `n_max` training nodes and each
/// following class (by available size) shrinks geometrically down to
/// `n_max / rho`. Every class then contributes up to `val_per_class` of its
/// remaining nodes to validation; everything left is test.
pub fn make_long_tailed_split(
    g: &Graph,
    rho: f64,
    n_max: usize,
    val_per_class: usize,
    seed: u64,
) -> Result<ImbalancedSplit> {
    if !(rho.is_finite() && rho >= 1.0) {
        return Err(Error::input(format!("imbalance ratio must be >= 1, got {rho}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_class = shuffled_classes(g, &mut rng);
    let counts = long_tail_counts(g.num_classes(), n_max, rho);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (pos, &c) in classes_by_size(&by_class).iter().enumerate() {
        let nodes = &by_class[c];
        let k = counts[pos];
        if nodes.len() < k {
            return Err(Error::input(format!(
                "class {c} has {} nodes but needs {k} training nodes",
                nodes.len()
            )));
        }
        let v = val_per_class.min(nodes.len() - k);
        train.extend_from_slice(&nodes[..k]);
        val.extend_from_slice(&nodes[k..k + v]);
        test.extend_from_slice(&nodes[k + v..]);
    }
    ImbalancedSplit::new(train, val, test, g.labels(), g.num_classes())
}

/// Step split with explicit per-class sizes: the `⌈C/2⌉` largest classes get
/// `n_maj` training nodes, the rest `max(1, round(n_maj / rho))`. Validation
/// and test take up to `n_val` and `n_test` nodes per class from what remains.
pub fn make_step_split_with_counts(
    g: &Graph,
    rho: f64,
    n_maj: usize,
    n_val: usize,
    n_test: usize,
    seed: u64,
) -> Result<ImbalancedSplit> {
    if !(rho.is_finite() && rho >= 1.0) {
        return Err(Error::input(format!("imbalance ratio must be >= 1, got {rho}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_class = shuffled_classes(g, &mut rng);
    let majors = g.num_classes().div_ceil(2);
    let n_min = ((n_maj as f64 / rho).round() as usize).max(1);
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (pos, &c) in classes_by_size(&by_class).iter().enumerate() {
        let nodes = &by_class[c];
        let k = if pos < majors { n_maj } else { n_min };
        if nodes.len() < k {
            return Err(Error::input(format!(
                "class {c} has {} nodes but needs {k} training nodes",
                nodes.len()
            )));
        }
        let v = n_val.min(nodes.len() - k);
        let t = n_test.min(nodes.len() - k - v);
        train.extend_from_slice(&nodes[..k]);
        val.extend_from_slice(&nodes[k..k + v]);
        test.extend_from_slice(&nodes[k + v..k + v + t]);
    }
    ImbalancedSplit::new(train, val, test, g.labels(), g.num_classes())
}

/// Step split from `(train, val, test)` fractions of a balanced per-class
/// budget `N / C`, e.g. `(0.1, 0.1, 0.8)`.
pub fn make_step_split(
    g: &Graph,
    rho: f64,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<ImbalancedSplit> {
    let (tr, va, te) = fractions;
    if [tr, va, te].iter().any(|f| !(0.0..=1.0).contains(f)) || (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::input(format!(
            "split fractions must lie in [0,1] and sum to 1, got {fractions:?}"
        )));
    }
    let per_class = g.num_nodes() as f64 / g.num_classes() as f64;
    let size = |f: f64| (f * per_class).round() as usize;
    make_step_split_with_counts(g, rho, size(tr).max(1), size(va), size(te), seed)
}

/// Duplicates minor training nodes (features, label and incident edges)
/// round-robin until every class reaches the quota target. Duplicates are
/// appended after the original nodes, so original ids, validation and test
/// sets are unchanged.
pub fn upsample_split(
    g: &Graph,
    split: &ImbalancedSplit,
    mode: QuotaMode,
) -> Result<(Graph, ImbalancedSplit)> {
    let quotas = compute_class_quota(split.class_counts_train(), mode);
    let groups = split.train_by_class(g.labels());
    let sources: Vec<usize> = quotas
        .iter()
        .enumerate()
        .flat_map(|(c, &q)| groups[c].iter().copied().cycle().take(q))
        .collect();
    if sources.is_empty() {
        return Ok((g.clone(), split.clone()));
    }
    let n = g.num_nodes();
    let attachments: Vec<(usize, usize)> = sources
        .iter()
        .enumerate()
        .flat_map(|(m, &s)| g.neighbors(s).iter().map(move |&t| (m, t)))
        .collect();
    let topology: Topology = g.topology().with_attachments(sources.len(), &attachments);
    let features = concatenate(
        Axis(0),
        &[g.features().view(), g.features().select(Axis(0), &sources).view()],
    )
    .expect("same feature width");
    let mut labels = g.labels().to_vec();
    labels.extend(sources.iter().map(|&s| g.label(s)));
    let graph = Graph::from_parts(topology, features, labels, g.num_classes())?;
    let mut train = split.train().to_vec();
    train.extend(n..n + sources.len());
    let split = ImbalancedSplit::new(
        train,
        split.val().to_vec(),
        split.test().to_vec(),
        graph.labels(),
        graph.num_classes(),
    )?;
    Ok((graph, split))
}
