//! Filtered simplicial complexes and their constructors.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::ingest::graph::WeightedGraph;
use crate::ingest::linkage::DistanceMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted, distinct vertex ids.
    pub vertices: Vec<usize>,
    pub value: f64,
}

impl Simplex {
    pub fn new(mut vertices: Vec<usize>, value: f64) -> Self {
        vertices.sort_unstable();
        Simplex { vertices, value }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-one faces, each obtained by dropping one vertex.
    pub fn facets(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.vertices.len()).filter(move |_| self.vertices.len() > 1).map(move |skip| {
            self.vertices
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v)
                .collect()
        })
    }
}

/// Simplices in a filtration order: faces precede cofaces and values never
/// decrease along faces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilteredComplex {
    simplices: Vec<Simplex>,
}

fn canonical_cmp(a: &Simplex, b: &Simplex) -> std::cmp::Ordering {
    a.value
        .total_cmp(&b.value)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

impl FilteredComplex {
    /// Sorts by (value, dimension, vertex list) and validates.
    pub fn new(mut simplices: Vec<Simplex>) -> Result<Self> {
        simplices.sort_by(canonical_cmp);
        Self::from_ordered(simplices)
    }

    /// Keeps the given order; it must list faces before cofaces with
    /// monotone values.
    pub fn from_ordered(simplices: Vec<Simplex>) -> Result<Self> {
        let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(simplices.len());
        for (i, s) in simplices.iter().enumerate() {
            if s.vertices.is_empty() {
                return Err(Error::input("empty simplex"));
            }
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input(format!(
                    "simplex {:?} must list distinct vertices in ascending order",
                    s.vertices
                )));
            }
            if !s.value.is_finite() {
                return Err(Error::input(format!("simplex {:?} has non-finite value", s.vertices)));
            }
            for facet in s.facets() {
                match index.get(facet.as_slice()) {
                    None => {
                        return Err(Error::NonMonotone(format!(
                            "face {facet:?} of {:?} does not appear before it",
                            s.vertices
                        )))
                    }
                    Some(&j) if simplices[j].value > s.value => {
                        return Err(Error::NonMonotone(format!(
                            "face {facet:?} has value {} above its coface {:?} at {}",
                            simplices[j].value, s.vertices, s.value
                        )))
                    }
                    _ => {}
                }
            }
            if index.insert(&s.vertices, i).is_some() {
                return Err(Error::input(format!("duplicate simplex {:?}", s.vertices)));
            }
        }
        Ok(FilteredComplex { simplices })
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.dim()).max()
    }

    pub fn count_by_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }

    /// The prefix of simplices with value at most `t`, as a sub-complex.
    pub fn sublevel(&self, t: f64) -> FilteredComplex {
        FilteredComplex {
            simplices: self.simplices.iter().filter(|s| s.value <= t).cloned().collect(),
        }
    }
}

fn check_max_dim(max_dim: usize) -> Result<()> {
    if max_dim == 0 || max_dim > 2 {
        return Err(Error::input(format!("max_dim must be 1 or 2, got {max_dim}")));
    }
    Ok(())
}

/// Rips complex up to dimension `max_dim`: edges at pairwise distance,
/// triangles at their longest edge, everything above `max_radius` dropped.
pub fn vietoris_rips(dist: &DistanceMatrix, max_dim: usize, max_radius: f64) -> Result<FilteredComplex> {
    check_max_dim(max_dim)?;
    clique_complex(dist, max_dim, max_radius, |d| d, |_, ab, ac, bc| ab.max(ac).max(bc))
}

/// Čech complex of a Euclidean point set given by its distance matrix, in
/// the radius parametrisation: edges at half their length, triangles at the
/// radius of their minimal enclosing ball.
pub fn cech_complex(dist: &DistanceMatrix, max_dim: usize, max_radius: f64) -> Result<FilteredComplex> {
    check_max_dim(max_dim)?;
    clique_complex(dist, max_dim, max_radius, |d| d / 2.0, |_, ab, ac, bc| {
        minimal_enclosing_radius(ab * 2.0, ac * 2.0, bc * 2.0)
    })
}

/// Radius of the smallest ball containing a triangle with the given side lengths.
pub fn minimal_enclosing_radius(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(f64::total_cmp);
    let [x, y, z] = s;
    if x * x + y * y <= z * z {
        return z / 2.0;
    }
    let prod = (x + y + z) * (-x + y + z) * (x - y + z) * (x + y - z);
    if prod <= 0.0 {
        return z / 2.0;
    }
    (x * y * z / prod.sqrt()).max(z / 2.0)
}

fn clique_complex(
    dist: &DistanceMatrix,
    max_dim: usize,
    max_radius: f64,
    edge_value: impl Fn(f64) -> f64,
    triangle_value: impl Fn([usize; 3], f64, f64, f64) -> f64,
) -> Result<FilteredComplex> {
    let n = dist.len();
    let mut simplices: Vec<Simplex> = (0..n).map(|i| Simplex { vertices: vec![i], value: 0.0 }).collect();
    let mut edge = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = edge_value(dist.get(i, j));
            if v <= max_radius {
                edge[i * n + j] = v;
                simplices.push(Simplex { vertices: vec![i, j], value: v });
            }
        }
    }
    if max_dim >= 2 {
        for i in 0..n {
            for j in (i + 1)..n {
                let ij = edge[i * n + j];
                if ij.is_nan() {
                    continue;
                }
                for k in (j + 1)..n {
                    let (ik, jk) = (edge[i * n + k], edge[j * n + k]);
                    if ik.is_nan() || jk.is_nan() {
                        continue;
                    }
                    let v = triangle_value([i, j, k], ij, ik, jk).max(ij).max(ik).max(jk);
                    if v <= max_radius {
                        simplices.push(Simplex { vertices: vec![i, j, k], value: v });
                    }
                }
            }
        }
    }
    FilteredComplex::new(simplices)
}

/// Sublevel complex of a node-weighted graph. Edges take the larger endpoint
/// weight. With `triangle_hops = Some(k)`, every pair at hop distance at most
/// `k` becomes an edge valued by the cheapest connecting path of at most `k`
/// hops (cost = largest weight on the path), and every triple of mutually
/// connected pairs becomes a triangle valued by its largest edge.
pub fn graph_sublevel_complex(g: &WeightedGraph, triangle_hops: Option<usize>) -> Result<FilteredComplex> {
    let n = g.vertex_count();
    let w = g.weights();
    let mut simplices: Vec<Simplex> =
        (0..n).map(|i| Simplex { vertices: vec![i], value: w[i] }).collect();
    match triangle_hops {
        None | Some(0) | Some(1) => {
            for &(u, v) in g.edges() {
                simplices.push(Simplex::new(vec![u, v], w[u].max(w[v])));
            }
            if triangle_hops == Some(1) {
                let adj = g.adjacency();
                let mut is_edge = vec![false; n * n];
                for &(u, v) in g.edges() {
                    is_edge[u * n + v] = true;
                    is_edge[v * n + u] = true;
                }
                for &(u, v) in g.edges() {
                    let (a, b) = (u.min(v), u.max(v));
                    for &c in &adj[a] {
                        if c > b && is_edge[b * n + c] {
                            simplices.push(Simplex::new(vec![a, b, c], w[a].max(w[b]).max(w[c])));
                        }
                    }
                }
            }
        }
        Some(k) => {
            let paths = g.bounded_hop_minimax(k);
            let mut near: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut pairs: Vec<(&(usize, usize), &f64)> = paths.iter().collect();
            pairs.sort_by(|x, y| x.0.cmp(y.0));
            for (&(a, b), &v) in pairs {
                simplices.push(Simplex { vertices: vec![a, b], value: v });
                near[a].push(b);
            }
            for a in 0..n {
                for (i, &b) in near[a].iter().enumerate() {
                    let ab = paths[&(a, b)];
                    for &c in &near[a][i + 1..] {
                        if let Some(&bc) = paths.get(&(b, c)) {
                            let ac = paths[&(a, c)];
                            simplices.push(Simplex { vertices: vec![a, b, c], value: ab.max(ac).max(bc) });
                        }
                    }
                }
            }
        }
    }
    FilteredComplex::new(simplices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral() -> DistanceMatrix {
        DistanceMatrix::new(vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ])
        .unwrap()
    }

    #[test]
    fn rips_on_equilateral_triangle() {
        let c = vietoris_rips(&equilateral(), 2, 10.0).unwrap();
        assert_eq!(c.count_by_dim(0), 3);
        assert_eq!(c.count_by_dim(1), 3);
        assert_eq!(c.count_by_dim(2), 1);
        assert!(c.simplices().iter().filter(|s| s.dim() > 0).all(|s| s.value == 1.0));
        let small = vietoris_rips(&equilateral(), 2, 0.5).unwrap();
        assert_eq!(small.len(), 3);
        assert!(vietoris_rips(&equilateral(), 3, 1.0).is_err());
    }

    #[test]
    fn rips_triangles_take_longest_edge() {
        let d = DistanceMatrix::euclidean(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]]).unwrap();
        let c = vietoris_rips(&d, 2, 10.0).unwrap();
        let tri = c.simplices().iter().find(|s| s.dim() == 2).unwrap();
        assert_eq!(tri.value, d.get(1, 2));
    }

    #[test]
    fn enclosing_radius() {
        // right triangle: half the hypotenuse
        assert!((minimal_enclosing_radius(3.0, 4.0, 5.0) - 2.5).abs() < 1e-12);
        // equilateral: circumradius s / sqrt(3)
        assert!((minimal_enclosing_radius(1.0, 1.0, 1.0) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        // obtuse: half the longest side
        assert!((minimal_enclosing_radius(1.0, 1.0, 1.9) - 0.95).abs() < 1e-12);
    }

    #[test]
    fn rejects_missing_faces_and_decreasing_values() {
        let bad = vec![Simplex::new(vec![0], 0.0), Simplex::new(vec![0, 1], 1.0)];
        assert!(matches!(FilteredComplex::from_ordered(bad), Err(Error::NonMonotone(_))));
        let bad = vec![
            Simplex::new(vec![0], 0.0),
            Simplex::new(vec![1], 2.0),
            Simplex::new(vec![0, 1], 1.0),
        ];
        assert!(matches!(FilteredComplex::from_ordered(bad), Err(Error::NonMonotone(_))));
    }

    #[test]
    fn graph_path_uses_max_rule() {
        let g = WeightedGraph::new(2, vec![(0, 1)], vec![0.0, 2.0]).unwrap();
        let c = graph_sublevel_complex(&g, None).unwrap();
        let values: Vec<(Vec<usize>, f64)> =
            c.simplices().iter().map(|s| (s.vertices.clone(), s.value)).collect();
        assert_eq!(values, vec![(vec![0], 0.0), (vec![1], 2.0), (vec![0, 1], 2.0)]);
    }

    #[test]
    fn graph_triangle_filled() {
        let g = WeightedGraph::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![0.0; 3]).unwrap();
        for hops in [Some(1), Some(2)] {
            let c = graph_sublevel_complex(&g, hops).unwrap();
            assert_eq!(c.count_by_dim(0), 3);
            assert_eq!(c.count_by_dim(1), 3);
            assert_eq!(c.count_by_dim(2), 1);
            assert!(c.simplices().iter().all(|s| s.value == 0.0));
        }
    }

    #[test]
    fn star_has_no_triangles_at_one_hop() {
        let g = WeightedGraph::new(4, vec![(0, 1), (0, 2), (0, 3)], vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let c = graph_sublevel_complex(&g, Some(1)).unwrap();
        assert_eq!(c.count_by_dim(2), 0);
        // at two hops the leaves become pairwise connected through the centre
        let c2 = graph_sublevel_complex(&g, Some(2)).unwrap();
        assert_eq!(c2.count_by_dim(1), 6);
        assert_eq!(c2.count_by_dim(2), 4);
    }
}
