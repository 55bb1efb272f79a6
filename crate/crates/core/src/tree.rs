//! Computational merge trees.
//!
//! A merge tree is a rooted tree whose nodes carry heights. The unique root
//! sits at height `+inf`; every other node is strictly lower than its parent.
//! Node ids are the indices `0..len()` and stay stable under upsampling,
//! which only appends new nodes.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Raw node record, the unit of the JSON schema and of validation.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: NodeId,
    pub height: f64,
    pub parent: Option<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    NonContiguousIds { ids: Vec<usize> },
    UnknownParent { node: NodeId, parent: NodeId },
    NanHeight { node: NodeId },
    NoRoot,
    MultipleRoots { roots: Vec<NodeId> },
    RootNotInfinite { root: NodeId },
    InfiniteNonRoot { nodes: Vec<NodeId> },
    NotATree { nodes: Vec<NodeId> },
    EqualAdjacentHeights { child: NodeId, parent: NodeId },
    ChildAboveParent { child: NodeId, parent: NodeId },
    NoFiniteNodes,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty tree"),
            Violation::NonContiguousIds { ids } => {
                write!(f, "node ids must be exactly 0..n; offending ids {ids:?}")
            }
            Violation::UnknownParent { node, parent } => {
                write!(f, "node {node} refers to unknown parent {parent}")
            }
            Violation::NanHeight { node } => write!(f, "node {node} has a NaN height"),
            Violation::NoRoot => write!(f, "no root"),
            Violation::MultipleRoots { roots } => write!(f, "multiple roots {roots:?}"),
            Violation::RootNotInfinite { root } => write!(f, "root {root} has finite height"),
            Violation::InfiniteNonRoot { nodes } => {
                write!(f, "non-root nodes {nodes:?} have infinite height")
            }
            Violation::NotATree { nodes } => {
                write!(f, "nodes {nodes:?} do not reach the root (cycle)")
            }
            Violation::EqualAdjacentHeights { child, parent } => {
                write!(f, "equal adjacent heights at {child} -> {parent}")
            }
            Violation::ChildAboveParent { child, parent } => {
                write!(f, "node {child} is higher than its parent {parent}")
            }
            Violation::NoFiniteNodes => write!(f, "tree has no finite nodes"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every structural clause of a computational merge tree.
pub fn validate_nodes(nodes: &[TreeNode]) -> ValidationReport {
    let mut violations = Vec::new();
    let n = nodes.len();
    if n == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }

    let mut seen = vec![false; n];
    let mut bad_ids = Vec::new();
    for node in nodes {
        if node.id >= n || seen[node.id] {
            bad_ids.push(node.id);
        } else {
            seen[node.id] = true;
        }
    }
    if !bad_ids.is_empty() {
        violations.push(Violation::NonContiguousIds { ids: bad_ids });
        return ValidationReport { violations };
    }

    let mut height = vec![0.0; n];
    let mut parent = vec![None; n];
    for node in nodes {
        height[node.id] = node.height;
        parent[node.id] = node.parent;
    }
    for node in nodes {
        if node.height.is_nan() {
            violations.push(Violation::NanHeight { node: node.id });
        }
        if let Some(p) = node.parent {
            if p >= n {
                violations.push(Violation::UnknownParent { node: node.id, parent: p });
            }
        }
    }
    if !violations.is_empty() {
        return ValidationReport { violations };
    }

    let roots: Vec<NodeId> = (0..n).filter(|&i| parent[i].is_none()).collect();
    match roots.len() {
        0 => violations.push(Violation::NoRoot),
        1 => {
            if height[roots[0]] != f64::INFINITY {
                violations.push(Violation::RootNotInfinite { root: roots[0] });
            }
        }
        _ => violations.push(Violation::MultipleRoots { roots: roots.clone() }),
    }
    let infinite: Vec<NodeId> = (0..n)
        .filter(|&i| parent[i].is_some() && height[i].is_infinite())
        .collect();
    if !infinite.is_empty() {
        violations.push(Violation::InfiniteNonRoot { nodes: infinite });
    }
    if roots.len() == 1 && n == 1 {
        violations.push(Violation::NoFiniteNodes);
    }

    // every node must reach a root without revisiting a node
    let mut state = vec![0u8; n]; // 0 unknown, 1 reaches root, 2 cycles
    for start in 0..n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut on_path = vec![false; 0];
        on_path.resize(n, false);
        let mut cur = start;
        let outcome = loop {
            if state[cur] != 0 {
                break state[cur];
            }
            if on_path[cur] {
                break 2;
            }
            on_path[cur] = true;
            path.push(cur);
            match parent[cur] {
                None => break 1,
                Some(p) => cur = p,
            }
        };
        for v in path {
            state[v] = outcome;
        }
    }
    let cyclic: Vec<NodeId> = (0..n).filter(|&i| state[i] == 2).collect();
    if !cyclic.is_empty() {
        violations.push(Violation::NotATree { nodes: cyclic });
    }

    for i in 0..n {
        if let Some(p) = parent[i] {
            if height[i] == height[p] {
                violations.push(Violation::EqualAdjacentHeights { child: i, parent: p });
            } else if height[i] > height[p] {
                violations.push(Violation::ChildAboveParent { child: i, parent: p });
            }
        }
    }
    ValidationReport { violations }
}

/// A validated computational merge tree.
#[derive(Debug, Clone)]
pub struct MergeTree {
    heights: Vec<f64>,
    parents: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    root: NodeId,
    /// Index of the data element (sample, point, vertex) that created the node.
    origin: Vec<Option<usize>>,
}

impl PartialEq for MergeTree {
    fn eq(&self, other: &Self) -> bool {
        self.parents == other.parents
            && self.heights.len() == other.heights.len()
            && self
                .heights
                .iter()
                .zip(&other.heights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl MergeTree {
    pub fn new(nodes: Vec<TreeNode>) -> Result<Self> {
        let report = validate_nodes(&nodes);
        if !report.is_ok() {
            return Err(Error::InvalidTree(report));
        }
        let n = nodes.len();
        let mut heights = vec![0.0; n];
        let mut parents = vec![None; n];
        for node in nodes {
            heights[node.id] = node.height;
            parents[node.id] = node.parent;
        }
        Ok(Self::assemble(heights, parents, vec![None; n]))
    }

    /// Builds a tree from per-node heights and parents (index = id).
    pub fn from_parents(heights: Vec<f64>, parents: Vec<Option<NodeId>>) -> Result<Self> {
        if heights.len() != parents.len() {
            return Err(Error::DimensionMismatch("heights and parents differ in length".into()));
        }
        let nodes = heights
            .iter()
            .zip(&parents)
            .enumerate()
            .map(|(id, (&height, &parent))| TreeNode { id, height, parent })
            .collect();
        Self::new(nodes)
    }

    pub(crate) fn from_parts_with_origin(
        heights: Vec<f64>,
        parents: Vec<Option<NodeId>>,
        origin: Vec<Option<usize>>,
    ) -> Result<Self> {
        let mut tree = Self::from_parents(heights, parents)?;
        tree.origin = origin;
        Ok(tree)
    }

    fn assemble(heights: Vec<f64>, parents: Vec<Option<NodeId>>, origin: Vec<Option<usize>>) -> Self {
        let n = heights.len();
        let mut children = vec![Vec::new(); n];
        let mut root = 0;
        for (i, p) in parents.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => root = i,
            }
        }
        let mut depth = vec![0; n];
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                queue.push_back(c);
            }
        }
        MergeTree { heights, parents, children, depth, root, origin }
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn height(&self, node: NodeId) -> f64 {
        self.heights[node]
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parents[node]
    }

    pub fn children(&self, node: NodeId) -> &[NodeId] {
        &self.children[node]
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.depth[node]
    }

    pub fn origin(&self, node: NodeId) -> Option<usize> {
        self.origin[node]
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node != self.root && self.children[node].is_empty()
    }

    pub fn is_root(&self, node: NodeId) -> bool {
        node == self.root
    }

    /// Leaves in increasing id order.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// Non-root nodes in increasing id order.
    pub fn finite_nodes(&self) -> Vec<NodeId> {
        (0..self.len()).filter(|&i| i != self.root).collect()
    }

    pub fn nodes(&self) -> Vec<TreeNode> {
        (0..self.len())
            .map(|id| TreeNode { id, height: self.heights[id], parent: self.parents[id] })
            .collect()
    }

    pub fn min_height(&self) -> f64 {
        self.heights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest finite node height.
    pub fn max_finite_height(&self) -> f64 {
        self.heights
            .iter()
            .copied()
            .filter(|h| h.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn validate(&self) -> ValidationReport {
        validate_nodes(&self.nodes())
    }

    fn check(&self, node: NodeId) -> Result<()> {
        if node < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode(node))
        }
    }

    /// `true` iff `ancestor` is `node` or lies above it.
    pub fn is_ancestor(&self, ancestor: NodeId, node: NodeId) -> bool {
        let mut cur = node;
        loop {
            if cur == ancestor {
                return true;
            }
            if self.depth[cur] <= self.depth[ancestor] {
                return false;
            }
            match self.parents[cur] {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Lowest common ancestor-or-self of `u` and `v`.
    pub fn lca(&self, u: NodeId, v: NodeId) -> Result<NodeId> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.lca_unchecked(u, v))
    }

    pub(crate) fn lca_unchecked(&self, mut u: NodeId, mut v: NodeId) -> NodeId {
        while self.depth[u] > self.depth[v] {
            u = self.parents[u].expect("non-root has parent");
        }
        while self.depth[v] > self.depth[u] {
            v = self.parents[v].expect("non-root has parent");
        }
        while u != v {
            u = self.parents[u].expect("non-root has parent");
            v = self.parents[v].expect("non-root has parent");
        }
        u
    }

    pub fn merge_height(&self, u: NodeId, v: NodeId) -> Result<f64> {
        Ok(self.heights[self.lca(u, v)?])
    }

    /// `||(merge(u,v) - h(u), merge(u,v) - h(v))||_p`; `p = f64::INFINITY` is the max norm.
    pub fn lp_metric(&self, u: NodeId, v: NodeId, p: f64) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        if u == self.root || v == self.root {
            return Err(Error::RootNotAllowed("lp_metric needs finite nodes"));
        }
        if !(p >= 1.0) {
            return Err(Error::input(format!("lp exponent must be >= 1, got {p}")));
        }
        let m = self.merge_height(u, v)?;
        Ok(lp_norm2(m - self.heights[u], m - self.heights[v], p))
    }

    /// All leaves below `node` (the node itself if it is a leaf).
    pub fn descendant_leaves(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            if self.children[u].is_empty() {
                if u != self.root {
                    out.push(u);
                }
            } else {
                stack.extend(self.children[u].iter().copied());
            }
        }
        out.sort_unstable();
        out
    }

    /// Merge heights between every pair of the given nodes.
    pub fn merge_height_matrix(&self, nodes: &[NodeId]) -> Vec<f64> {
        let k = nodes.len();
        let mut out = vec![0.0; k * k];
        for a in 0..k {
            out[a * k + a] = self.heights[nodes[a]];
            for b in (a + 1)..k {
                let m = self.heights[self.lca_unchecked(nodes[a], nodes[b])];
                out[a * k + b] = m;
                out[b * k + a] = m;
            }
        }
        out
    }

    /// The point of the tree sitting exactly on `node`.
    pub fn point(&self, node: NodeId) -> TreePoint {
        TreePoint { node, height: self.heights[node] }
    }

    /// The point at `height` on the edge path above `node`, normalised so that
    /// `point.node` is the lower endpoint of the edge containing it.
    /// Returns `None` when `height` is below the node.
    pub fn ancestor_at(&self, node: NodeId, height: f64) -> Option<TreePoint> {
        if height < self.heights[node] {
            return None;
        }
        let mut cur = node;
        while let Some(p) = self.parents[cur] {
            if self.heights[p] <= height {
                cur = p;
            } else {
                break;
            }
        }
        Some(TreePoint { node: cur, height })
    }

    pub fn point_ancestor_at(&self, point: TreePoint, height: f64) -> Option<TreePoint> {
        if height < point.height {
            return None;
        }
        self.ancestor_at(point.node, height)
    }

    /// Merge height of two points of the tree.
    pub fn point_merge_height(&self, p: TreePoint, q: TreePoint) -> f64 {
        let w = self.lca_unchecked(p.node, q.node);
        p.height.max(q.height).max(self.heights[w])
    }

    /// `p` lies below-or-at `q` in the tree order.
    pub fn point_le(&self, p: TreePoint, q: TreePoint) -> bool {
        match self.point_ancestor_at(p, q.height) {
            Some(a) => a.node == q.node,
            None => false,
        }
    }

    /// Leaves whose ancestor path passes through the point.
    pub fn leaves_below_point(&self, p: TreePoint) -> Vec<NodeId> {
        self.descendant_leaves(p.node)
    }

    pub(crate) fn set_origin(&mut self, origin: Vec<Option<usize>>) {
        debug_assert_eq!(origin.len(), self.len());
        self.origin = origin;
    }
}

/// A position on a merge tree: a height on the edge above `node`
/// (`height(node) <= height < height(parent(node))`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePoint {
    pub node: NodeId,
    pub height: f64,
}

pub(crate) fn lp_norm2(a: f64, b: f64, p: f64) -> f64 {
    if p == f64::INFINITY {
        a.abs().max(b.abs())
    } else if p == 1.0 {
        a.abs() + b.abs()
    } else if p == 2.0 {
        a.hypot(b)
    } else {
        (a.abs().powf(p) + b.abs().powf(p)).powf(1.0 / p)
    }
}

/// An assignment of labels `0..n` to non-root nodes covering every leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    assignment: Vec<NodeId>,
}

impl Labeling {
    pub fn new(tree: &MergeTree, assignment: Vec<NodeId>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::input("labeling needs at least one label"));
        }
        let mut covered = vec![false; tree.len()];
        for &node in &assignment {
            tree.check(node)?;
            if node == tree.root() {
                return Err(Error::RootNotAllowed("labels may not target the root"));
            }
            covered[node] = true;
        }
        let missing: Vec<NodeId> = tree.leaves().into_iter().filter(|&l| !covered[l]).collect();
        if !missing.is_empty() {
            return Err(Error::input(format!("labeling misses leaves {missing:?}")));
        }
        Ok(Labeling { assignment })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn get(&self, label: usize) -> NodeId {
        self.assignment[label]
    }

    pub fn assignment(&self) -> &[NodeId] {
        &self.assignment
    }
}

/// Matrix of pairwise merge heights of labelled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LcaMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl LcaMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }
}

/// Pairwise merge heights of the labelled nodes. Entries between nodes that
/// only meet at the root are `+inf`.
pub fn lca_matrix(tree: &MergeTree, labeling: &Labeling) -> Result<LcaMatrix> {
    for &node in labeling.assignment() {
        tree.check(node)?;
        if node == tree.root() {
            return Err(Error::RootNotAllowed("labels may not target the root"));
        }
    }
    let n = labeling.len();
    Ok(LcaMatrix { n, entries: tree.merge_height_matrix(labeling.assignment()) })
}

/// Height grid used when inserting degree-2 nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    pub anchor: f64,
    pub mesh: f64,
    /// Highest grid height sampled on edges into the root.
    pub ceiling: f64,
}

impl SamplingGrid {
    pub fn for_trees(trees: &[&MergeTree], mesh: f64) -> Result<Self> {
        if !(mesh > 0.0) || !mesh.is_finite() {
            return Err(Error::input(format!("mesh must be positive, got {mesh}")));
        }
        let anchor = trees.iter().map(|t| t.min_height()).fold(f64::INFINITY, f64::min);
        let ceiling = trees
            .iter()
            .map(|t| t.max_finite_height())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(SamplingGrid { anchor, mesh, ceiling })
    }

    pub fn level(&self, k: i64) -> f64 {
        self.anchor + (k as f64) * self.mesh
    }

    /// Grid heights strictly inside `(lo, hi)`, with a relative guard so
    /// heights that coincide with an endpoint up to rounding are skipped.
    pub fn interior(&self, lo: f64, hi: f64) -> Vec<f64> {
        let tol = 1e-9 * self.mesh;
        let mut out = Vec::new();
        let mut k = ((lo - self.anchor) / self.mesh).floor() as i64;
        loop {
            let h = self.level(k);
            if h >= hi - tol {
                break;
            }
            if h > lo + tol {
                out.push(h);
            }
            k += 1;
        }
        out
    }
}

/// Inserts degree-2 nodes on every edge at the heights of a grid anchored at
/// the tree's minimum height.
pub fn upsample(tree: &MergeTree, mesh: f64) -> Result<MergeTree> {
    let grid = SamplingGrid::for_trees(&[tree], mesh)?;
    Ok(upsample_on_grid(tree, &grid))
}

/// Inserts degree-2 nodes at grid heights strictly inside every edge. Edges
/// into the root are sampled up to and including the grid ceiling. Existing
/// ids are preserved; new nodes are appended ordered by (edge child id, height).
pub fn upsample_on_grid(tree: &MergeTree, grid: &SamplingGrid) -> MergeTree {
    let mut heights = tree.heights.clone();
    let mut parents = tree.parents.clone();
    let mut origin = tree.origin.clone();
    let tol = 1e-9 * grid.mesh;
    for child in 0..tree.len() {
        let Some(parent) = tree.parents[child] else { continue };
        let lo = tree.heights[child];
        let hi = tree.heights[parent];
        let levels = if hi.is_finite() {
            grid.interior(lo, hi)
        } else {
            grid.interior(lo, grid.ceiling + tol + grid.mesh * 0.5)
                .into_iter()
                .filter(|&h| h <= grid.ceiling + tol)
                .collect()
        };
        let mut below = child;
        for h in levels {
            let id = heights.len();
            heights.push(h);
            parents.push(None);
            origin.push(None);
            parents[below] = Some(id);
            below = id;
        }
        parents[below] = Some(parent);
    }
    MergeTree::assemble(heights, parents, origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    /// a(0), b(1) under m(3) under root.
    fn abm() -> MergeTree {
        MergeTree::from_parents(vec![0.0, 1.0, 3.0, INF], vec![Some(2), Some(2), Some(3), None])
            .unwrap()
    }

    #[test]
    fn minimal_tree_is_valid() {
        let t = MergeTree::from_parents(vec![0.0, INF], vec![Some(1), None]).unwrap();
        assert!(t.validate().is_ok());
        assert_eq!(t.leaves(), vec![0]);
    }

    #[test]
    fn equal_adjacent_heights_reported() {
        let nodes = vec![
            TreeNode { id: 0, height: 1.0, parent: Some(1) },
            TreeNode { id: 1, height: 1.0, parent: Some(2) },
            TreeNode { id: 2, height: INF, parent: None },
        ];
        let report = validate_nodes(&nodes);
        assert_eq!(
            report.violations,
            vec![Violation::EqualAdjacentHeights { child: 0, parent: 1 }]
        );
        assert!(report.to_string().contains("equal adjacent heights"));
    }

    #[test]
    fn multiple_roots_reported() {
        let nodes = vec![
            TreeNode { id: 0, height: 0.0, parent: None },
            TreeNode { id: 1, height: INF, parent: None },
        ];
        let report = validate_nodes(&nodes);
        assert!(report
            .violations
            .contains(&Violation::MultipleRoots { roots: vec![0, 1] }));
        assert!(report.to_string().contains("multiple roots"));
    }

    #[test]
    fn cycles_and_bad_ids_reported() {
        let nodes = vec![
            TreeNode { id: 0, height: 0.0, parent: Some(1) },
            TreeNode { id: 1, height: 1.0, parent: Some(0) },
            TreeNode { id: 2, height: INF, parent: None },
        ];
        let report = validate_nodes(&nodes);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NotATree { .. })));

        let nodes = vec![
            TreeNode { id: 0, height: 0.0, parent: Some(5) },
            TreeNode { id: 5, height: INF, parent: None },
        ];
        assert!(matches!(
            validate_nodes(&nodes).violations[0],
            Violation::NonContiguousIds { .. }
        ));
    }

    #[test]
    fn lca_and_merge_height() {
        let t = abm();
        assert_eq!(t.lca(0, 1).unwrap(), 2);
        assert_eq!(t.lca(0, 0).unwrap(), 0);
        assert_eq!(t.lca(0, 3).unwrap(), 3);
        assert_eq!(t.merge_height(0, 1).unwrap(), 3.0);
        assert_eq!(t.merge_height(0, 0).unwrap(), 0.0);
        assert_eq!(t.merge_height(0, 3).unwrap(), INF);
        assert!(matches!(t.lca(0, 17), Err(Error::UnknownNode(17))));
    }

    #[test]
    fn lp_metric_values() {
        let t = abm();
        assert_eq!(t.lp_metric(0, 1, 1.0).unwrap(), 5.0);
        assert_eq!(t.lp_metric(0, 1, INF).unwrap(), 3.0);
        assert_eq!(t.lp_metric(1, 1, 2.0).unwrap(), 0.0);
        assert!(matches!(t.lp_metric(0, 3, 1.0), Err(Error::RootNotAllowed(_))));
    }

    #[test]
    fn lca_matrix_values() {
        let t = abm();
        let lab = Labeling::new(&t, vec![0, 1]).unwrap();
        assert_eq!(lca_matrix(&t, &lab).unwrap().rows(), vec![vec![0.0, 3.0], vec![3.0, 1.0]]);
        let swapped = Labeling::new(&t, vec![1, 0]).unwrap();
        assert_eq!(
            lca_matrix(&t, &swapped).unwrap().rows(),
            vec![vec![1.0, 3.0], vec![3.0, 0.0]]
        );
        assert!(Labeling::new(&t, vec![0, 3]).is_err());
        assert!(Labeling::new(&t, vec![0, 2]).is_err());

        let single = MergeTree::from_parents(vec![2.5, INF], vec![Some(1), None]).unwrap();
        let lab = Labeling::new(&single, vec![0]).unwrap();
        assert_eq!(lca_matrix(&single, &lab).unwrap().rows(), vec![vec![2.5]]);
    }

    #[test]
    fn upsample_inserts_grid_nodes() {
        // edge 0 -> 3 with a sibling leaf at 0 so the grid is anchored at 0
        let t = MergeTree::from_parents(
            vec![0.0, 0.0, 3.0, INF],
            vec![Some(2), Some(2), Some(3), None],
        )
        .unwrap();
        let up = upsample(&t, 1.0).unwrap();
        assert!(up.validate().is_ok());
        let mut inserted: Vec<f64> = (t.len()..up.len()).map(|i| up.height(i)).collect();
        inserted.sort_by(f64::total_cmp);
        assert_eq!(inserted, vec![1.0, 1.0, 2.0, 2.0]);
        // original merge heights survive
        assert_eq!(up.merge_height(0, 1).unwrap(), 3.0);
        assert_eq!(up.leaves(), t.leaves());
    }

    #[test]
    fn upsample_coarse_mesh_is_identity() {
        let t = abm();
        let up = upsample(&t, 10.0).unwrap();
        assert_eq!(up, t);
    }

    #[test]
    fn upsample_is_idempotent_on_fixed_grid() {
        let t = abm();
        let grid = SamplingGrid { anchor: 0.0, mesh: 0.5, ceiling: 3.0 };
        let once = upsample_on_grid(&t, &grid);
        let twice = upsample_on_grid(&once, &grid);
        assert_eq!(once, twice);
    }

    #[test]
    fn root_edge_sampled_to_ceiling() {
        let t = MergeTree::from_parents(vec![0.0, INF], vec![Some(1), None]).unwrap();
        let grid = SamplingGrid { anchor: 0.0, mesh: 1.0, ceiling: 3.0 };
        let up = upsample_on_grid(&t, &grid);
        let mut hs: Vec<f64> = up.finite_nodes().iter().map(|&i| up.height(i)).collect();
        hs.sort_by(f64::total_cmp);
        assert_eq!(hs, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn points_and_ancestors() {
        let t = abm();
        let p = t.ancestor_at(0, 2.0).unwrap();
        assert_eq!(p, TreePoint { node: 0, height: 2.0 });
        let q = t.ancestor_at(1, 3.0).unwrap();
        assert_eq!(q, TreePoint { node: 2, height: 3.0 });
        assert_eq!(t.point_merge_height(p, t.point(1)), 3.0);
        assert!(t.point_le(t.point(0), p));
        assert!(!t.point_le(t.point(1), p));
        assert!(t.ancestor_at(1, 0.5).is_none());
    }
}
