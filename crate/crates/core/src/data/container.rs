//! On-disk graph formats: a single versioned JSON container, and an edge-list
//! text file joined with feature and label CSVs by node index.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Container {
    version: u32,
    num_nodes: usize,
    num_classes: usize,
    edges: Vec<[usize; 2]>,
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

fn parse_error(path: &Path, context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        context: context.into(),
        message: message.into(),
    }
}

/// Loads a graph from a JSON container
/// `{"version":1,"num_nodes":N,"num_classes":C,"edges":[[u,v],..],"features":[[..],..],"labels":[..]}`.
pub fn load_graph_container(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let c: Container = serde_json::from_str(&text).map_err(|e| {
        parse_error(
            path,
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if c.version != CONTAINER_VERSION {
        return Err(Error::Version {
            found: c.version,
            expected: CONTAINER_VERSION,
        });
    }
    if c.labels.len() != c.num_nodes {
        return Err(parse_error(
            path,
            "field `labels`",
            format!("{} entries for num_nodes {}", c.labels.len(), c.num_nodes),
        ));
    }
    if c.features.len() != c.num_nodes {
        return Err(parse_error(
            path,
            "field `features`",
            format!("{} rows for num_nodes {}", c.features.len(), c.num_nodes),
        ));
    }
    let dim = c.features.first().map_or(0, Vec::len);
    if let Some(i) = c.features.iter().position(|r| r.len() != dim) {
        return Err(parse_error(
            path,
            format!("field `features` row {i}"),
            format!("length {} differs from {dim}", c.features[i].len()),
        ));
    }
    let flat: Vec<f64> = c.features.into_iter().flatten().collect();
    let features = Array2::from_shape_vec((c.num_nodes, dim), flat).expect("checked shape");
    let edges: Vec<(usize, usize)> = c.edges.iter().map(|&[u, v]| (u, v)).collect();
    Graph::build(&edges, features, c.labels, c.num_classes)
}

/// Writes `graph` as a JSON container. Each undirected edge is written once.
pub fn save_graph_container(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let c = Container {
        version: CONTAINER_VERSION,
        num_nodes: graph.num_nodes(),
        num_classes: graph.num_classes(),
        edges: graph
            .topology()
            .edge_list()
            .into_iter()
            .map(|(u, v)| [u, v])
            .collect(),
        features: graph.features().rows().into_iter().map(|r| r.to_vec()).collect(),
        labels: graph.labels().to_vec(),
    };
    fs::write(path, serde_json::to_vec(&c)?)?;
    Ok(())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim().parse::<T>().map_err(|e| {
        parse_error(path, format!("line {line} field {field}"), format!("`{raw}`: {e}"))
    })
}

/// Loads an edge-list text file (`u v` per line) together with a features CSV
/// (`node,x0,x1,...` per line) and a labels CSV (`node,label` per line).
/// Lines starting with `#` are ignored. `num_classes` defaults to the largest
/// label plus one.
pub fn load_edge_list_bundle(
    edges_path: impl AsRef<Path>,
    features_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    num_classes: Option<usize>,
) -> Result<Graph> {
    let (edges_path, features_path, labels_path) =
        (edges_path.as_ref(), features_path.as_ref(), labels_path.as_ref());

    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for (line, l) in data_lines(&fs::read_to_string(features_path)?) {
        let mut parts = l.split(',');
        let node = parse_field(features_path, line, "node", parts.next().unwrap_or(""))?;
        let values = parts
            .enumerate()
            .map(|(k, raw)| parse_field(features_path, line, &format!("x{k}"), raw))
            .collect::<Result<Vec<f64>>>()?;
        rows.push((node, values));
    }
    let n = rows.len();
    let dim = rows.first().map_or(0, |r| r.1.len());
    let mut features = Array2::zeros((n, dim));
    let mut seen = vec![false; n];
    for (node, values) in rows {
        if node >= n || seen[node] {
            return Err(parse_error(
                features_path,
                format!("node {node}"),
                "node ids must be a permutation of 0..N",
            ));
        }
        if values.len() != dim {
            return Err(parse_error(
                features_path,
                format!("node {node}"),
                format!("{} values, expected {dim}", values.len()),
            ));
        }
        seen[node] = true;
        features.row_mut(node).assign(&ndarray::ArrayView1::from(&values));
    }

    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (line, l) in data_lines(&fs::read_to_string(labels_path)?) {
        let (node, label) = l.split_once(',').ok_or_else(|| {
            parse_error(labels_path, format!("line {line}"), "expected `node,label`")
        })?;
        let node: usize = parse_field(labels_path, line, "node", node)?;
        let label: usize = parse_field(labels_path, line, "label", label)?;
        if node >= n {
            return Err(parse_error(labels_path, format!("line {line}"), format!("node {node} >= N={n}")));
        }
        labels[node] = Some(label);
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(i, y)| y.ok_or_else(|| parse_error(labels_path, format!("node {i}"), "missing label")))
        .collect::<Result<Vec<usize>>>()?;
    let num_classes = num_classes.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));

    let mut edges = Vec::new();
    for (line, l) in data_lines(&fs::read_to_string(edges_path)?) {
        let mut parts = l.split_whitespace();
        let (Some(u), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_error(edges_path, format!("line {line}"), "expected `u v`"));
        };
        edges.push((
            parse_field(edges_path, line, "u", u)?,
            parse_field(edges_path, line, "v", v)?,
        ));
    }
    Graph::build(&edges, features, labels, num_classes)
}
