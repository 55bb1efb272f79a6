use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ingest::sweep::{SweepBuilder, SweepTree};
use crate::tree::MergeTree;

/// Undirected graph with a real weight on every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != vertex_count {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {vertex_count} vertices",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::input(format!("vertex weight {w} is not finite")));
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::input(format!("edge ({u},{v}) has an endpoint out of range")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::input(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(WeightedGraph { vertex_count, edges, weights })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same graph with new vertex weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.vertex_count, self.edges.clone(), weights)
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// For every pair `a < b` joined by a path of at most `k` edges, the
    /// smallest possible largest vertex weight over such paths.
    pub fn bounded_hop_minimax(&self, k: usize) -> HashMap<(usize, usize), f64> {
        let adj = self.adjacency();
        let w = &self.weights;
        let mut out = HashMap::new();
        let mut best: HashMap<usize, f64> = HashMap::new();
        for a in 0..self.vertex_count {
            best.clear();
            best.insert(a, w[a]);
            let mut frontier = vec![a];
            for _ in 0..k {
                let mut next = Vec::new();
                let snapshot: Vec<(usize, f64)> = frontier.iter().map(|&u| (u, best[&u])).collect();
                for (u, cost) in snapshot {
                    for &v in &adj[u] {
                        let c = cost.max(w[v]);
                        match best.get_mut(&v) {
                            Some(old) if *old <= c => {}
                            Some(old) => {
                                *old = c;
                                next.push(v);
                            }
                            None => {
                                best.insert(v, c);
                                next.push(v);
                            }
                        }
                    }
                }
                next.sort_unstable();
                next.dedup();
                if next.is_empty() {
                    break;
                }
                frontier = next;
            }
            for (&b, &c) in &best {
                if b > a {
                    out.insert((a, b), c);
                }
            }
        }
        out
    }
}

/// Weights equal to vertex degrees.
pub fn degree_weights(g: &WeightedGraph) -> Vec<f64> {
    g.degrees().into_iter().map(|d| d as f64).collect()
}

pub fn graph_merge_tree(g: &WeightedGraph) -> MergeTree {
    graph_sweep(g).tree
}

/// Sweep over vertices in increasing (weight, id) order. Node origins are
/// vertex ids; `entry[v]` is the node at which vertex `v` joined.
pub fn graph_sweep(g: &WeightedGraph) -> SweepTree {
    let n = g.vertex_count();
    let adj = g.adjacency();
    let w = g.weights();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]).then(a.cmp(&b)));
    let mut sweep = SweepBuilder::new(n);
    let mut neighbours = Vec::new();
    for &v in &order {
        neighbours.clear();
        neighbours.extend(adj[v].iter().copied().filter(|&u| sweep.is_active(u)));
        sweep.add_joining(v, w[v], &neighbours);
    }
    sweep.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    #[default]
    Four,
    Eight,
}

/// Pixel grid graph; vertex `r * cols + c` carries the pixel value.
pub fn image_to_grid_graph(pixels: &[Vec<f64>], connectivity: Connectivity) -> Result<WeightedGraph> {
    let rows = pixels.len();
    let cols = pixels.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 {
        return Err(Error::input("image is empty"));
    }
    if pixels.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("image rows differ in length".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
            if connectivity == Connectivity::Eight && r + 1 < rows {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r + 1, c + 1)));
                }
                if c > 0 {
                    edges.push((id(r, c), id(r + 1, c - 1)));
                }
            }
        }
    }
    let weights = pixels.iter().flatten().copied().collect();
    WeightedGraph::new(rows * cols, edges, weights)
}
