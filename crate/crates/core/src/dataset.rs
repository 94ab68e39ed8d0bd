//! TU-format benchmark ingestion, statistics, pool-size rule and
//! stratified fold splitting.
//!
//! A TU dataset `NAME` is a directory holding
//!
//! * `NAME_A.txt`: one directed edge per line, `i, j`, 1-based global node ids
//! * `NAME_graph_indicator.txt`: line `t` is the 1-based graph id of node `t`
//! * `NAME_graph_labels.txt`: line `g` is the raw class label of graph `g`
//! * optionally `NAME_node_labels.txt` and `NAME_node_attributes.txt`
//!
//! The files may live either directly in the given root or in `root/NAME/`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeatureSpec, Graph, DEFAULT_DEGREE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub avg_nodes: f64,
    pub avg_edges: f64,
}

/// A parsed benchmark with class labels remapped to `0..num_classes`.
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub name: String,
    pub graphs: Vec<Graph>,
    pub num_classes: usize,
    /// Sorted raw class labels; index `c` is the raw label of class `c`.
    pub class_vocabulary: Vec<i64>,
    /// Sorted node label ids across the whole dataset, if node labels exist.
    pub label_vocabulary: Vec<i64>,
    pub stats: DatasetStats,
    pub warnings: Vec<String>,
}

impl DatasetBundle {
    /// Assembles a bundle from graphs whose `graph_label` holds a raw label.
    pub fn from_graphs(name: impl Into<String>, mut graphs: Vec<Graph>) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::InvalidGraph("dataset has no graphs".into()));
        }
        let class_vocabulary: Vec<i64> = graphs
            .iter()
            .map(|g| g.graph_label() as i64)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        for g in &mut graphs {
            let raw = g.graph_label() as i64;
            let class = class_vocabulary.binary_search(&raw).expect("label in vocabulary");
            g.set_graph_label(class);
        }
        Ok(Self::assemble(name.into(), graphs, class_vocabulary, Vec::new()))
    }

    fn assemble(
        name: String,
        graphs: Vec<Graph>,
        class_vocabulary: Vec<i64>,
        warnings: Vec<String>,
    ) -> Self {
        let label_vocabulary: Vec<i64> = graphs
            .iter()
            .filter_map(|g| g.node_labels())
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let stats = dataset_stats(&graphs);
        Self {
            name,
            num_classes: class_vocabulary.len(),
            graphs,
            class_vocabulary,
            label_vocabulary,
            stats,
            warnings,
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.graphs.iter().map(Graph::graph_label).collect()
    }

    pub fn has_node_labels(&self) -> bool {
        self.graphs.iter().all(|g| g.node_labels().is_some())
    }

    /// One-hot node labels when every graph has them, capped degree
    /// one-hot otherwise.
    pub fn default_feature_spec(&self) -> FeatureSpec {
        if self.has_node_labels() && !self.label_vocabulary.is_empty() {
            FeatureSpec::onehot(self.label_vocabulary.iter().copied())
        } else {
            FeatureSpec::degree(DEFAULT_DEGREE_CAP)
        }
    }

    pub fn class_histogram(&self, indices: &[usize]) -> Vec<usize> {
        let mut hist = vec![0; self.num_classes];
        for &i in indices {
            hist[self.graphs[i].graph_label()] += 1;
        }
        hist
    }
}

/// Means over graphs of node count and undirected edge count.
pub fn dataset_stats(graphs: &[Graph]) -> DatasetStats {
    let n = graphs.len().max(1) as f64;
    DatasetStats {
        avg_nodes: graphs.iter().map(|g| g.num_nodes() as f64).sum::<f64>() / n,
        avg_edges: graphs.iter().map(|g| g.num_edges() as f64).sum::<f64>() / n,
    }
}

fn dataset_dir(root: &Path, name: &str) -> PathBuf {
    let nested = root.join(name);
    if nested.join(format!("{name}_A.txt")).is_file() {
        nested
    } else {
        root.to_path_buf()
    }
}

/// Streams the non-empty-tail lines of a file. Trailing blank lines are
/// dropped; a blank line followed by content is reported as malformed.
fn for_each_line(path: &Path, mut f: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let mut reader = BufReader::with_capacity(1 << 16, file);
    let mut buf = String::new();
    let mut lineno = 0;
    let mut pending_blank: Option<usize> = None;
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        lineno += 1;
        let line = buf.trim_end_matches(['\n', '\r']).trim();
        if line.is_empty() {
            pending_blank.get_or_insert(lineno);
            continue;
        }
        if let Some(blank) = pending_blank {
            return Err(parse_error(path, blank, "unexpected blank line"));
        }
        f(lineno, line)?;
    }
    Ok(())
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_int(path: &Path, line: usize, field: &str) -> Result<i64> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| parse_error(path, line, format!("expected an integer, found {field:?}")))
}

fn read_int_column(path: &Path) -> Result<Vec<i64>> {
    let mut out = Vec::new();
    for_each_line(path, |line, text| {
        out.push(parse_int(path, line, text)?);
        Ok(())
    })?;
    Ok(out)
}

fn read_attributes(path: &Path, expected_rows: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut rows = Vec::with_capacity(expected_rows);
    for_each_line(path, |line, text| {
        let row: std::result::Result<Vec<f64>, _> =
            text.split(',').map(|v| v.trim().parse::<f64>()).collect();
        match row {
            Ok(r) if r.iter().all(|v| v.is_finite()) => {
                rows.push(r);
                Ok(())
            }
            _ => Err(parse_error(path, line, "malformed attribute row")),
        }
    })
    .map_err(|e| e.to_string())?;
    if rows.len() != expected_rows {
        return Err(format!(
            "{}: {} attribute rows for {} nodes",
            path.display(),
            rows.len(),
            expected_rows
        ));
    }
    Ok(rows)
}

/// Parses the TU dataset `name` found under `root`.
pub fn parse_tu_dataset(root: &Path, name: &str) -> Result<DatasetBundle> {
    let dir = dataset_dir(root, name);
    let file = |suffix: &str| dir.join(format!("{name}_{suffix}.txt"));
    let mut warnings = Vec::new();

    // Node -> graph membership. Graph ids must start at 1 and never skip.
    let indicator_path = file("graph_indicator");
    let mut offsets: Vec<usize> = Vec::new();
    let mut num_nodes = 0usize;
    for_each_line(&indicator_path, |line, text| {
        let id = parse_int(&indicator_path, line, text)?;
        let current = offsets.len() as i64;
        if id == current + 1 {
            offsets.push(num_nodes);
        } else if id != current {
            return Err(parse_error(
                &indicator_path,
                line,
                format!("graph id {id} after {current}: ids must be contiguous and non-decreasing"),
            ));
        }
        num_nodes += 1;
        Ok(())
    })?;
    let num_graphs = offsets.len();
    if num_graphs == 0 {
        return Err(parse_error(&indicator_path, 1, "no nodes"));
    }
    let sizes: Vec<usize> = offsets
        .iter()
        .enumerate()
        .map(|(g, &start)| offsets.get(g + 1).copied().unwrap_or(num_nodes) - start)
        .collect();

    let labels_path = file("graph_labels");
    let raw_labels = read_int_column(&labels_path)?;
    if raw_labels.len() != num_graphs {
        return Err(parse_error(
            &labels_path,
            raw_labels.len(),
            format!("{} labels for {num_graphs} graphs", raw_labels.len()),
        ));
    }

    let graph_of = |node: usize| -> usize { offsets.partition_point(|&o| o <= node) - 1 };

    // Directed pairs per graph; bit 0 marks i<j as given, bit 1 the reverse.
    let edges_path = file("A");
    let mut per_graph: Vec<Vec<(u32, u32, u8)>> = vec![Vec::new(); num_graphs];
    for_each_line(&edges_path, |line, text| {
        let mut parts = text.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_error(&edges_path, line, format!("expected \"i, j\", found {text:?}")));
        };
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip([a, b]) {
            let id = parse_int(&edges_path, line, field)?;
            if id < 1 || id as usize > num_nodes {
                return Err(parse_error(
                    &edges_path,
                    line,
                    format!("node id {id} out of range 1..={num_nodes}"),
                ));
            }
            *slot = id as usize - 1;
        }
        let g = graph_of(ends[0]);
        if graph_of(ends[1]) != g {
            return Err(parse_error(
                &edges_path,
                line,
                format!("edge ({}, {}) joins two different graphs", ends[0] + 1, ends[1] + 1),
            ));
        }
        let (i, j) = (ends[0] - offsets[g], ends[1] - offsets[g]);
        let dir = if i <= j { 1 } else { 2 };
        per_graph[g].push((i.min(j) as u32, i.max(j) as u32, dir));
        Ok(())
    })?;

    let node_labels_path = file("node_labels");
    let node_labels = if node_labels_path.is_file() {
        let labels = read_int_column(&node_labels_path)?;
        if labels.len() != num_nodes {
            return Err(parse_error(
                &node_labels_path,
                labels.len(),
                format!("{} node labels for {num_nodes} nodes", labels.len()),
            ));
        }
        Some(labels)
    } else {
        None
    };

    let attributes_path = file("node_attributes");
    let mut attributes = if attributes_path.is_file() {
        match read_attributes(&attributes_path, num_nodes) {
            Ok(rows) => Some(rows),
            Err(msg) => {
                warnings.push(format!("ignoring node attributes: {msg}"));
                None
            }
        }
    } else {
        None
    };

    let class_vocabulary: Vec<i64> = raw_labels
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut one_way = 0usize;
    let mut self_loops = 0usize;
    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, mut pairs) in per_graph.into_iter().enumerate() {
        pairs.sort_unstable();
        let mut edges = Vec::with_capacity(pairs.len() / 2);
        let mut idx = 0;
        while idx < pairs.len() {
            let (i, j, _) = pairs[idx];
            let mut dirs = 0u8;
            while idx < pairs.len() && pairs[idx].0 == i && pairs[idx].1 == j {
                dirs |= pairs[idx].2;
                idx += 1;
            }
            if i == j {
                self_loops += 1;
                continue;
            }
            if dirs != 3 {
                one_way += 1;
            }
            edges.push((i as usize, j as usize));
        }
        let class = class_vocabulary
            .binary_search(&raw_labels[g])
            .expect("label in vocabulary");
        let mut graph = Graph::new(sizes[g], edges, class)?;
        if let Some(labels) = &node_labels {
            graph = graph.with_node_labels(labels[offsets[g]..offsets[g] + sizes[g]].to_vec())?;
        }
        if let Some(rows) = attributes.as_mut() {
            let chunk: Vec<Vec<f64>> = rows
                .drain(..sizes[g])
                .collect();
            graph = graph.with_node_attributes(chunk)?;
        }
        graphs.push(graph);
    }
    if one_way > 0 {
        warnings.push(format!(
            "{one_way} edges appear in one direction only; treated as undirected"
        ));
    }
    if self_loops > 0 {
        warnings.push(format!("dropped {self_loops} self-loops"));
    }
    for w in &warnings {
        log::warn!("{name}: {w}");
    }

    Ok(DatasetBundle::assemble(
        name.to_string(),
        graphs,
        class_vocabulary,
        warnings,
    ))
}

/// Writes a bundle back out in TU format under `dir`, using the raw class
/// labels from `class_vocabulary`.
pub fn write_tu_dataset(dir: &Path, bundle: &DatasetBundle) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let name = &bundle.name;
    let open = |suffix: &str| -> Result<std::io::BufWriter<File>> {
        Ok(std::io::BufWriter::new(File::create(
            dir.join(format!("{name}_{suffix}.txt")),
        )?))
    };
    let mut a = open("A")?;
    let mut indicator = open("graph_indicator")?;
    let mut labels = open("graph_labels")?;
    let mut node_labels = if bundle.has_node_labels() {
        Some(open("node_labels")?)
    } else {
        None
    };
    let mut offset = 0usize;
    for (g, graph) in bundle.graphs.iter().enumerate() {
        for &(i, j) in graph.edges() {
            writeln!(a, "{}, {}", offset + i + 1, offset + j + 1)?;
            writeln!(a, "{}, {}", offset + j + 1, offset + i + 1)?;
        }
        for _ in 0..graph.num_nodes() {
            writeln!(indicator, "{}", g + 1)?;
        }
        writeln!(labels, "{}", bundle.class_vocabulary[graph.graph_label()])?;
        if let (Some(w), Some(nl)) = (node_labels.as_mut(), graph.node_labels()) {
            for l in nl {
                writeln!(w, "{l}")?;
            }
        }
        offset += graph.num_nodes();
    }
    a.flush()?;
    indicator.flush()?;
    labels.flush()?;
    if let Some(mut w) = node_labels {
        w.flush()?;
    }
    Ok(())
}

/// `k₁ = ⌊avg_nodes · p⌋`, `k₂ = ⌊k₁ / 2⌋`; the first `depth` entries.
pub fn pool_sizes(avg_nodes: f64, p: f64, depth: usize) -> Result<Vec<usize>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::PoolSize(format!("fraction {p} must lie in (0, 1)")));
    }
    if !(1..=2).contains(&depth) {
        return Err(Error::PoolSize(format!("depth {depth} must be 1 or 2")));
    }
    let k1 = (avg_nodes * p).floor();
    let ks = [k1, (k1 / 2.0).floor()];
    ks[..depth]
        .iter()
        .map(|&k| {
            if k >= 1.0 {
                Ok(k as usize)
            } else {
                Err(Error::PoolSize(format!(
                    "avg_nodes {avg_nodes} with fraction {p} gives pool size {k} < 1"
                )))
            }
        })
        .collect()
}

/// Pool sizes and node fraction used for the published benchmark runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedPooling {
    pub fraction: f64,
    pub ks: [usize; 2],
}

/// Canonical dataset name: `D&D` is stored on disk as `DD`.
pub fn canonical_name(name: &str) -> String {
    match name.to_ascii_uppercase().as_str() {
        "D&D" => "DD".to_string(),
        other => other.to_string(),
    }
}

/// Pool sizes as printed for the five benchmarks. NCI1 pins `k₁ = 6`
/// although the fraction rule gives 7; D&D pins `k₂ = 2` from its own
/// second fraction.
pub fn published_pooling(name: &str) -> Option<PublishedPooling> {
    let (fraction, ks) = match canonical_name(name).as_str() {
        "COLLAB" => (0.22, [16, 8]),
        "DD" => (0.05, [14, 2]),
        "ENZYMES" => (0.25, [8, 4]),
        "NCI1" => (0.24, [6, 3]),
        "PROTEINS" => (0.21, [8, 4]),
        _ => return None,
    };
    Some(PublishedPooling { fraction, ks })
}

/// Stratified assignment of graphs to `k` folds plus a per-fold validation
/// holdout drawn from the training portion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Vec<usize>>,
    pub validation: Vec<Vec<usize>>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    pub fn validation_indices(&self, fold: usize) -> &[usize] {
        &self.validation[fold]
    }

    /// Graphs outside the test fold and outside the validation holdout.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let held: BTreeSet<usize> = self.validation[fold].iter().copied().collect();
        let mut out: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .filter(|i| !held.contains(i))
            .collect();
        out.sort_unstable();
        out
    }
}

pub const DEFAULT_VAL_FRACTION: f64 = 0.1;

/// Splits `labels` into `k` stratified folds, deterministic in `seed`.
pub fn stratified_folds(
    labels: &[usize],
    k: usize,
    seed: u64,
    val_fraction: f64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Folds(format!("need at least 2 folds, got {k}")));
    }
    if !(0.0..1.0).contains(&val_fraction) {
        return Err(Error::Folds(format!("validation fraction {val_fraction} outside [0, 1)")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    if let Some((c, members)) = by_class.iter().find(|(_, m)| m.len() < k) {
        return Err(Error::Folds(format!(
            "class {c} has {} members, fewer than {k} folds",
            members.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    // Dealing continues where the previous class stopped, which keeps fold
    // sizes within one of each other as well.
    let mut next = 0usize;
    for members in by_class.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }

    let mut validation = Vec::with_capacity(k);
    for fold in &folds {
        let mut held = Vec::new();
        for members in by_class.values() {
            let mut train: Vec<usize> = members
                .iter()
                .copied()
                .filter(|i| fold.binary_search(i).is_err())
                .collect();
            train.sort_unstable();
            train.shuffle(&mut rng);
            let mut take = (val_fraction * train.len() as f64).round() as usize;
            if val_fraction > 0.0 && train.len() >= 2 {
                take = take.clamp(1, train.len() - 1);
            }
            held.extend_from_slice(&train[..take]);
        }
        held.sort_unstable();
        validation.push(held);
    }

    Ok(FoldPlan {
        k,
        seed,
        folds,
        validation,
    })
}
