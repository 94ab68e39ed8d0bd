//! Small generated datasets with class-dependent structure, for tests and
//! offline demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DatasetBundle;
use crate::error::Result;
use crate::graph::Graph;

/// Number of node-label values the generator emits.
pub const NODE_LABELS: i64 = 3;

fn ring(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

fn two_cliques(n: usize) -> Vec<(usize, usize)> {
    let half = n / 2;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if (i < half) == (j < half) {
                edges.push((i, j));
            }
        }
    }
    edges.push((half - 1, half));
    edges
}

fn star_with_tail(n: usize) -> Vec<(usize, usize)> {
    let hub_size = n / 2 + 1;
    let mut edges: Vec<_> = (1..hub_size).map(|i| (0, i)).collect();
    edges.extend((hub_size - 1..n - 1).map(|i| (i, i + 1)));
    edges
}

/// One graph of class `class % 3` with 6 to 12 nodes, a few random extra
/// edges, and node labels biased toward the class id.
pub fn synthetic_graph(class: usize, rng: &mut impl Rng) -> Graph {
    let n = rng.gen_range(6..=12);
    let mut edges = match class % 3 {
        0 => ring(n),
        1 => two_cliques(n),
        _ => star_with_tail(n),
    };
    for _ in 0..rng.gen_range(0..=2) {
        edges.push((rng.gen_range(0..n), rng.gen_range(0..n)));
    }
    let labels = (0..n)
        .map(|_| {
            if rng.gen_bool(0.6) {
                (class % 3) as i64
            } else {
                rng.gen_range(0..NODE_LABELS)
            }
        })
        .collect();
    Graph::new(n, edges, class)
        .and_then(|g| g.with_node_labels(labels))
        .expect("generated graph is valid")
}

/// `per_class` graphs for each of `classes` classes, interleaved by class.
pub fn synthetic_dataset(name: &str, classes: usize, per_class: usize, seed: u64) -> Result<DatasetBundle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::with_capacity(classes * per_class);
    for _ in 0..per_class {
        for c in 0..classes {
            graphs.push(synthetic_graph(c, &mut rng));
        }
    }
    DatasetBundle::from_graphs(name, graphs)
}
