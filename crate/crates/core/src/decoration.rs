//! Lift decorations: barcodes placed on merge trees through the birth points
//! of their bars, and the node barcodes they induce.

use crate::barcode::{truncate_barcode, Barcode, Interval};
use crate::error::{Error, Result};
use crate::ingest::{FilteredComplex, Simplex};
use crate::persistence::{self, PersistencePair};
use crate::tree::{MergeTree, NodeId, SamplingGrid, TreePoint};

/// A bar of the decoration together with its positions on the tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftedBar {
    pub interval: Interval,
    pub birth: TreePoint,
    /// `None` when the bar never dies and is anchored at the root.
    pub death: Option<TreePoint>,
}

/// Pair of bars (by index) whose incomparable birth points merge before
/// the earlier of their deaths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisjointnessViolation {
    pub first: usize,
    pub second: usize,
    pub merge_height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoratedMergeTree {
    tree: MergeTree,
    degree: usize,
    bars: Vec<LiftedBar>,
    /// Per node; populated for leaves only.
    leaf_bars: Vec<Vec<(f64, usize)>>,
    warnings: Vec<String>,
}

impl DecoratedMergeTree {
    /// Validates and normalises the anchors. Zero-length bars are dropped.
    pub fn new(tree: MergeTree, degree: usize, bars: Vec<LiftedBar>) -> Result<Self> {
        let mut kept = Vec::with_capacity(bars.len());
        for bar in bars {
            if bar.interval.is_empty() {
                continue;
            }
            let birth = normalise(&tree, bar.birth)?;
            if birth.height != bar.interval.birth {
                return Err(Error::InconsistentDecoration(format!(
                    "birth anchor at {} for bar {}",
                    birth.height, bar.interval
                )));
            }
            let death = match bar.death {
                None if bar.interval.is_essential() => None,
                None => {
                    return Err(Error::InconsistentDecoration(format!(
                        "finite bar {} anchored at the root",
                        bar.interval
                    )))
                }
                Some(p) => {
                    let p = normalise(&tree, p)?;
                    if p.height != bar.interval.death {
                        return Err(Error::InconsistentDecoration(format!(
                            "death anchor at {} for bar {}",
                            p.height, bar.interval
                        )));
                    }
                    if !tree.point_le(birth, p) {
                        return Err(Error::InconsistentDecoration(format!(
                            "death anchor of bar {} is not above its birth anchor",
                            bar.interval
                        )));
                    }
                    Some(p)
                }
            };
            kept.push(LiftedBar { interval: bar.interval, birth, death });
        }
        Ok(Self::assemble(tree, degree, kept, Vec::new()))
    }

    fn assemble(tree: MergeTree, degree: usize, bars: Vec<LiftedBar>, warnings: Vec<String>) -> Self {
        let mut leaf_bars = vec![Vec::new(); tree.len()];
        for leaf in tree.leaves() {
            let here = tree.point(leaf);
            leaf_bars[leaf] = bars
                .iter()
                .enumerate()
                .filter_map(|(i, bar)| {
                    let m = if tree.point_le(here, bar.birth) {
                        bar.interval.birth
                    } else {
                        tree.point_merge_height(bar.birth, here)
                    };
                    (m < bar.interval.death).then_some((m, i))
                })
                .collect();
        }
        DecoratedMergeTree { tree, degree, bars, leaf_bars, warnings }
    }

    pub fn with_warnings(mut self, warnings: Vec<String>) -> Self {
        self.warnings = warnings;
        self
    }

    /// Merge tree without any bars.
    pub fn undecorated(tree: MergeTree, degree: usize) -> Self {
        Self::assemble(tree, degree, Vec::new(), Vec::new())
    }

    pub fn tree(&self) -> &MergeTree {
        &self.tree
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bars(&self) -> &[LiftedBar] {
        &self.bars
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// The barcode carried by the decoration, one interval per lifted bar.
    pub fn barcode(&self) -> Barcode {
        Barcode::new(self.degree, self.bars.iter().map(|b| b.interval).collect())
    }

    /// Same decoration on the tree upsampled on `grid`; anchors move to the
    /// sub-edges that contain them.
    pub fn upsampled(&self, grid: &SamplingGrid) -> DecoratedMergeTree {
        let tree = crate::tree::upsample_on_grid(&self.tree, grid);
        let at = |p: TreePoint| tree.ancestor_at(p.node, p.height).expect("anchor above its node");
        let bars = self
            .bars
            .iter()
            .map(|b| LiftedBar { interval: b.interval, birth: at(b.birth), death: b.death.map(at) })
            .collect();
        Self::assemble(tree, self.degree, bars, self.warnings.clone())
    }
}

fn normalise(tree: &MergeTree, p: TreePoint) -> Result<TreePoint> {
    if p.node >= tree.len() {
        return Err(Error::UnknownNode(p.node));
    }
    if !p.height.is_finite() {
        return Err(Error::InconsistentDecoration("anchor at infinite height".into()));
    }
    tree.ancestor_at(p.node, p.height).ok_or_else(|| {
        Error::InconsistentDecoration(format!(
            "anchor height {} lies below node {} at {}",
            p.height,
            p.node,
            tree.height(p.node)
        ))
    })
}

/// Lift decoration of the degree-`degree` bars of `pairs`. `vertex_to_node`
/// maps each complex vertex to the tree node at which it enters the sublevel
/// sets (its leaf, or the node it joined at).
pub fn lift_decorate(
    tree: &MergeTree,
    complex: &FilteredComplex,
    pairs: &[PersistencePair],
    degree: usize,
    vertex_to_node: &[NodeId],
) -> Result<DecoratedMergeTree> {
    let simplices = complex.simplices();
    let mut warnings = Vec::new();
    let mut bars = Vec::new();
    for pair in pairs.iter().filter(|p| p.degree == degree && !p.interval.is_empty()) {
        let simplex = simplices.get(pair.birth_simplex).ok_or_else(|| {
            Error::InconsistentDecoration(format!("birth simplex {} out of range", pair.birth_simplex))
        })?;
        let b = pair.interval.birth;
        let mut anchor: Option<TreePoint> = None;
        for &v in &simplex.vertices {
            let node = *vertex_to_node.get(v).ok_or_else(|| {
                Error::InconsistentDecoration(format!("vertex {v} has no node in the merge tree"))
            })?;
            if node >= tree.len() || node == tree.root() {
                return Err(Error::InconsistentDecoration(format!("vertex {v} maps to invalid node {node}")));
            }
            let h = if b < tree.height(node) {
                warnings.push(format!(
                    "bar {} born below node {node} at {}; clamped",
                    pair.interval,
                    tree.height(node)
                ));
                tree.height(node)
            } else {
                b
            };
            let p = tree.ancestor_at(node, h).expect("height at or above node");
            match anchor {
                None => anchor = Some(p),
                Some(q) if q.node == p.node => {}
                Some(q) => {
                    return Err(Error::InconsistentDecoration(format!(
                        "vertices of the birth simplex of {} sit in different components ({} and {}) at its birth",
                        pair.interval, q.node, p.node
                    )))
                }
            }
        }
        let birth = anchor.expect("simplex has a vertex");
        let interval = Interval { birth: birth.height, death: pair.interval.death };
        if interval.is_empty() || interval.death < interval.birth {
            continue;
        }
        let death = if interval.is_essential() {
            None
        } else {
            Some(tree.ancestor_at(birth.node, interval.death).expect("death above birth"))
        };
        bars.push(LiftedBar { interval, birth, death });
    }
    Ok(DecoratedMergeTree::assemble(tree.clone(), degree, bars, warnings))
}

/// All pairs of bars with incomparable birth points whose earlier death is
/// not below the merge height of the birth points. Empty means certified.
pub fn check_disjointness(dmt: &DecoratedMergeTree) -> Vec<DisjointnessViolation> {
    let tree = dmt.tree();
    let bars = dmt.bars();
    let mut out = Vec::new();
    for i in 0..bars.len() {
        for j in (i + 1)..bars.len() {
            let (p, q) = (bars[i].birth, bars[j].birth);
            if tree.point_le(p, q) || tree.point_le(q, p) {
                continue;
            }
            let m = tree.point_merge_height(p, q);
            if bars[i].interval.death.min(bars[j].interval.death) >= m {
                out.push(DisjointnessViolation { first: i, second: j, merge_height: m });
            }
        }
    }
    out
}

/// Barcode induced at a leaf: each bar enters at its merge height with the
/// leaf and survives while that is below its death.
pub fn leaf_barcode(dmt: &DecoratedMergeTree, leaf: NodeId) -> Result<Barcode> {
    let tree = dmt.tree();
    if leaf >= tree.len() {
        return Err(Error::UnknownNode(leaf));
    }
    if !tree.is_leaf(leaf) {
        return Err(Error::input(format!("node {leaf} is not a leaf")));
    }
    Ok(Barcode::new(
        dmt.degree,
        dmt.leaf_bars[leaf]
            .iter()
            .map(|&(m, i)| Interval { birth: m, death: dmt.bars[i].interval.death })
            .collect(),
    ))
}

fn first_leaf(tree: &MergeTree, mut node: NodeId) -> NodeId {
    while let Some(&c) = tree.children(node).first() {
        node = c;
    }
    node
}

/// Barcode at a non-root node: a descendant leaf's barcode truncated at the
/// node's height.
pub fn node_barcode(dmt: &DecoratedMergeTree, node: NodeId) -> Result<Barcode> {
    let tree = dmt.tree();
    if node >= tree.len() {
        return Err(Error::UnknownNode(node));
    }
    if tree.is_root(node) {
        return Err(Error::RootNotAllowed("node barcodes are defined below the root"));
    }
    let leaf = first_leaf(tree, node);
    Ok(truncate_barcode(&leaf_barcode(dmt, leaf)?, tree.height(node)))
}

/// Barcode at an arbitrary point of the tree.
pub fn point_barcode(dmt: &DecoratedMergeTree, point: TreePoint) -> Result<Barcode> {
    let leaf = first_leaf(dmt.tree(), point.node);
    Ok(truncate_barcode(&leaf_barcode(dmt, leaf)?, point.height))
}

/// Leaves descending from the birth point of bar `bar_index`.
pub fn cycle_component(dmt: &DecoratedMergeTree, bar_index: usize) -> Result<Vec<NodeId>> {
    let bar = dmt
        .bars
        .get(bar_index)
        .ok_or_else(|| Error::input(format!("bar index {bar_index} out of range ({} bars)", dmt.bars.len())))?;
    Ok(dmt.tree.leaves_below_point(bar.birth))
}

/// Union of the leaf barcodes, one interval per bar: the earliest entry of
/// the bar over all leaves up to its death.
pub fn pushforward(dmt: &DecoratedMergeTree) -> Barcode {
    let mut entry = vec![f64::INFINITY; dmt.bars.len()];
    for leaf in dmt.tree.leaves() {
        for &(m, i) in &dmt.leaf_bars[leaf] {
            entry[i] = entry[i].min(m);
        }
    }
    Barcode::new(
        dmt.degree,
        entry
            .iter()
            .zip(&dmt.bars)
            .filter(|(m, _)| m.is_finite())
            .map(|(&m, b)| Interval { birth: m, death: b.interval.death })
            .collect(),
    )
}

/// Exact barcode at a leaf: persistence of the filtration by the component
/// containing the leaf. A simplex enters once it is present and its
/// component has merged with the leaf.
pub fn exact_leaf_barcode(
    tree: &MergeTree,
    complex: &FilteredComplex,
    vertex_to_node: &[NodeId],
    degree: usize,
    leaf: NodeId,
) -> Result<Barcode> {
    let here = tree.point(leaf);
    let mut simplices = Vec::with_capacity(complex.len());
    for s in complex.simplices() {
        let node = *vertex_to_node
            .get(s.vertices[0])
            .ok_or_else(|| Error::InconsistentDecoration(format!("vertex {} has no node", s.vertices[0])))?;
        let t = s.value.max(tree.height(node));
        let p = tree.ancestor_at(node, t).expect("height at or above node");
        let entry = if tree.point_le(here, p) { t } else { tree.point_merge_height(p, here) };
        if entry.is_finite() {
            simplices.push(Simplex { vertices: s.vertices.clone(), value: entry });
        }
    }
    let restricted = FilteredComplex::new(simplices)?;
    let pairs = persistence::reduce(&restricted)?;
    Ok(persistence::barcode(&pairs, degree, true))
}

/// Drops bars shorter than `bar_threshold` and cuts the tree at
/// `tree_threshold`: everything below becomes a leaf at the threshold
/// carrying the truncated barcode.
pub fn simplify(dmt: &DecoratedMergeTree, bar_threshold: f64, tree_threshold: f64) -> Result<DecoratedMergeTree> {
    if !(bar_threshold >= 0.0) || tree_threshold.is_nan() {
        return Err(Error::input("simplification thresholds must be non-negative"));
    }
    let tree = &dmt.tree;
    let t = tree_threshold;
    let long: Vec<LiftedBar> = dmt
        .bars
        .iter()
        .copied()
        .filter(|b| b.interval.is_essential() || b.interval.length() >= bar_threshold)
        .collect();
    if t <= tree.min_height() {
        return Ok(DecoratedMergeTree::assemble(tree.clone(), dmt.degree, long, dmt.warnings.clone()));
    }

    let n = tree.len();
    let mut new_id = vec![usize::MAX; n];
    let mut heights = Vec::new();
    let mut keep = Vec::new();
    for u in 0..n {
        if tree.height(u) >= t {
            new_id[u] = heights.len();
            heights.push(tree.height(u));
            keep.push(u);
        }
    }
    // cut[u]: new leaf on the edge above a removed node u whose parent is above t
    let mut cut = vec![usize::MAX; n];
    let mut cut_nodes = Vec::new();
    for u in 0..n {
        if tree.height(u) < t {
            let p = tree.parent(u).expect("root is never below the threshold");
            if tree.height(p) > t {
                cut[u] = heights.len();
                heights.push(t);
                cut_nodes.push((u, p));
            }
        }
    }
    let mut parents = vec![None; heights.len()];
    for &u in &keep {
        parents[new_id[u]] = tree.parent(u).map(|p| new_id[p]);
    }
    for &(u, p) in &cut_nodes {
        parents[cut[u]] = Some(new_id[p]);
    }
    let simplified = MergeTree::from_parents(heights, parents)?;
    let map_point = |p: TreePoint| -> TreePoint {
        let q = tree.ancestor_at(p.node, p.height.max(t)).expect("above node");
        let node = if new_id[q.node] != usize::MAX { new_id[q.node] } else { cut[q.node] };
        TreePoint { node, height: q.height }
    };
    let bars = long
        .into_iter()
        .filter_map(|b| {
            let interval = b.interval.truncate(t)?;
            Some(LiftedBar { interval, birth: map_point(b.birth), death: b.death.map(map_point) })
        })
        .collect();
    Ok(DecoratedMergeTree::assemble(simplified, dmt.degree, bars, dmt.warnings.clone()))
}
