//! Bottleneck distance, labelled matching costs and brute-force oracles.

use crate::barcode::{Barcode, Interval};
use crate::decoration::{leaf_barcode, node_barcode, point_barcode, DecoratedMergeTree};
use crate::error::{Error, Result};
use crate::tree::{lca_matrix, Labeling, MergeTree, NodeId, TreePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    Inf,
    L2,
}

/// Partial matching between two barcodes, by bar index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matching {
    pub matched: Vec<(usize, usize)>,
    pub unmatched_left: Vec<usize>,
    pub unmatched_right: Vec<usize>,
}

pub fn matching_cost_barcodes(left: &Barcode, right: &Barcode, m: &Matching) -> f64 {
    let pairs = m
        .matched
        .iter()
        .map(|&(i, j)| left.bars[i].sup_distance(&right.bars[j]));
    let singles = m
        .unmatched_left
        .iter()
        .map(|&i| left.bars[i].diagonal_cost())
        .chain(m.unmatched_right.iter().map(|&j| right.bars[j].diagonal_cost()));
    pairs.chain(singles).fold(0.0, f64::max)
}

fn pair_cost(a: &Interval, b: &Interval) -> f64 {
    a.sup_distance(b)
}

/// Exact bottleneck distance.
pub fn bottleneck(b1: &Barcode, b2: &Barcode) -> Result<f64> {
    if b1.degree != b2.degree {
        return Err(Error::DimensionMismatch(format!(
            "barcodes of degree {} and {}",
            b1.degree, b2.degree
        )));
    }
    Ok(bottleneck_bars(&b1.bars, &b2.bars))
}

/// Bottleneck distance between two bar lists, ignoring degrees.
pub fn bottleneck_bars(left: &[Interval], right: &[Interval]) -> f64 {
    let (ess_l, fin_l): (Vec<Interval>, Vec<Interval>) = left.iter().partition(|b| b.is_essential());
    let (ess_r, fin_r): (Vec<Interval>, Vec<Interval>) = right.iter().partition(|b| b.is_essential());
    if ess_l.len() != ess_r.len() {
        return f64::INFINITY;
    }
    // essential bars: optimal matching pairs births in sorted order
    let mut bl: Vec<f64> = ess_l.iter().map(|b| b.birth).collect();
    let mut br: Vec<f64> = ess_r.iter().map(|b| b.birth).collect();
    bl.sort_by(f64::total_cmp);
    br.sort_by(f64::total_cmp);
    let ess = bl.iter().zip(&br).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ess.max(finite_bottleneck(&fin_l, &fin_r))
}

fn finite_bottleneck(left: &[Interval], right: &[Interval]) -> f64 {
    let left: Vec<Interval> = left.iter().copied().filter(|b| !b.is_empty()).collect();
    let right: Vec<Interval> = right.iter().copied().filter(|b| !b.is_empty()).collect();
    if left.is_empty() && right.is_empty() {
        return 0.0;
    }
    let mut candidates = vec![0.0];
    for a in &left {
        candidates.push(a.diagonal_cost());
        for b in &right {
            candidates.push(pair_cost(a, b));
        }
    }
    for b in &right {
        candidates.push(b.diagonal_cost());
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let (mut lo, mut hi) = (0, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching_exists(&left, &right, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Feasibility at threshold `eps`: left side = left bars + diagonal copies of
/// right bars, right side = right bars + diagonal copies of left bars.
fn perfect_matching_exists(left: &[Interval], right: &[Interval], eps: f64) -> bool {
    let (n, m) = (left.len(), right.len());
    let size = n + m;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); size];
    for i in 0..n {
        for j in 0..m {
            if pair_cost(&left[i], &right[j]) <= eps {
                adj[i].push(j);
            }
        }
        if left[i].diagonal_cost() <= eps {
            adj[i].push(m + i);
        }
    }
    for j in 0..m {
        if right[j].diagonal_cost() <= eps {
            adj[n + j].push(j);
        }
        // diagonal-to-diagonal is always free
        adj[n + j].extend((0..n).map(|i| m + i));
    }
    hopcroft_karp(&adj, size) == size
}

fn hopcroft_karp(adj: &[Vec<usize>], right_size: usize) -> usize {
    let n = adj.len();
    let mut match_l = vec![usize::MAX; n];
    let mut match_r = vec![usize::MAX; right_size];
    let mut dist = vec![0usize; n];
    let mut matched = 0;
    loop {
        let mut queue = std::collections::VecDeque::new();
        let mut found = false;
        for u in 0..n {
            if match_l[u] == usize::MAX {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            return matched;
        }
        fn augment(
            u: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            match_l: &mut [usize],
            match_r: &mut [usize],
        ) -> bool {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == usize::MAX || (dist[w] == dist[u] + 1 && augment(w, adj, dist, match_l, match_r)) {
                    match_l[u] = v;
                    match_r[v] = u;
                    return true;
                }
            }
            dist[u] = usize::MAX;
            false
        }
        for u in 0..n {
            if match_l[u] == usize::MAX && augment(u, adj, &mut dist, &mut match_l, &mut match_r) {
                matched += 1;
            }
        }
    }
}

/// Optional decorations accompanying the trees in a labelled comparison.
#[derive(Debug, Clone, Copy)]
pub struct Decorations<'a> {
    pub f: &'a DecoratedMergeTree,
    pub g: &'a DecoratedMergeTree,
}

/// `|x - y|` for merge heights that may be infinite: equal infinities cost 0.
fn height_gap(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs()
    }
}

/// Matching cost of a pair of labelings.
pub fn labeled_cost(
    tree_f: &MergeTree,
    lambda_f: &Labeling,
    tree_g: &MergeTree,
    lambda_g: &Labeling,
    norm: Norm,
    decorations: Option<Decorations<'_>>,
) -> Result<f64> {
    if lambda_f.len() != lambda_g.len() {
        return Err(Error::DimensionMismatch(format!(
            "labelings of sizes {} and {}",
            lambda_f.len(),
            lambda_g.len()
        )));
    }
    if norm == Norm::L2 && decorations.is_some() {
        return Err(Error::input("the l2 cost is only defined for undecorated trees"));
    }
    let a = lca_matrix(tree_f, lambda_f)?;
    let b = lca_matrix(tree_g, lambda_g)?;
    let gaps = a.entries().iter().zip(b.entries()).map(|(&x, &y)| height_gap(x, y));
    let mut cost = match norm {
        Norm::Inf => gaps.fold(0.0, f64::max),
        Norm::L2 => gaps.map(|g| g * g).sum::<f64>().sqrt(),
    };
    if let Some(d) = decorations {
        check_decorations(tree_f, tree_g, &d)?;
        for i in 0..lambda_f.len() {
            let bf = node_barcode(d.f, lambda_f.get(i))?;
            let bg = node_barcode(d.g, lambda_g.get(i))?;
            cost = cost.max(bottleneck(&bf, &bg)?);
        }
    }
    Ok(cost)
}

fn check_decorations(tree_f: &MergeTree, tree_g: &MergeTree, d: &Decorations<'_>) -> Result<()> {
    if d.f.tree() != tree_f || d.g.tree() != tree_g {
        return Err(Error::input("decorations must sit on the compared trees"));
    }
    if d.f.degree() != d.g.degree() {
        return Err(Error::DimensionMismatch("decorations of different degrees".into()));
    }
    Ok(())
}

/// Options for the brute-force labelled distance.
#[derive(Debug, Clone)]
pub struct ExhaustiveOptions {
    /// Candidate nodes per tree; `None` means every non-root node.
    pub pool_f: Option<Vec<NodeId>>,
    pub pool_g: Option<Vec<NodeId>>,
    /// Largest number of candidate labelings allowed.
    pub cap: f64,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        ExhaustiveOptions { pool_f: None, pool_g: None, cap: 5e6 }
    }
}

fn pool(tree: &MergeTree, given: &Option<Vec<NodeId>>) -> Result<Vec<NodeId>> {
    let mut p = match given {
        Some(p) => p.clone(),
        None => tree.finite_nodes(),
    };
    p.sort_unstable();
    p.dedup();
    for &u in &p {
        if u >= tree.len() {
            return Err(Error::UnknownNode(u));
        }
        if u == tree.root() {
            return Err(Error::RootNotAllowed("pools may not contain the root"));
        }
    }
    for leaf in tree.leaves() {
        if p.binary_search(&leaf).is_err() {
            return Err(Error::input(format!("pool misses leaf {leaf}")));
        }
    }
    Ok(p)
}

/// Exact minimum of `labeled_cost` over labelings of size
/// `leaves(F) + leaves(G)` with images in the pools, both leaf-surjective.
///
/// Under the sup norm the cost of a labeling only grows when label pairs are
/// added, so the minimum is attained with every leaf of F paired with some
/// pool node of G and every leaf of G paired with some pool node of F. The
/// l2 cost is not monotone in that sense and is minimised over all multisets
/// of pairs covering both leaf sets.
pub fn exhaustive_labeled_distance(
    tree_f: &MergeTree,
    tree_g: &MergeTree,
    norm: Norm,
    decorations: Option<Decorations<'_>>,
    options: &ExhaustiveOptions,
) -> Result<f64> {
    if norm == Norm::L2 && decorations.is_some() {
        return Err(Error::input("the l2 cost is only defined for undecorated trees"));
    }
    if let Some(d) = &decorations {
        check_decorations(tree_f, tree_g, d)?;
    }
    let pf = pool(tree_f, &options.pool_f)?;
    let pg = pool(tree_g, &options.pool_g)?;
    let lf = tree_f.leaves();
    let lg = tree_g.leaves();
    let n = lf.len() + lg.len();
    match norm {
        Norm::Inf => {
            let size = (pg.len() as f64).powi(lf.len() as i32) * (pf.len() as f64).powi(lg.len() as i32);
            if size > options.cap {
                return Err(Error::CapExceeded { size, cap: options.cap });
            }
            let search = PairSearch::new(tree_f, tree_g, &pf, &pg, decorations)?;
            // slot s < |lf|: F leaf fixed, G node chosen; later slots the reverse
            let mut choice = vec![0usize; n];
            let mut best = f64::INFINITY;
            loop {
                let pairs: Vec<(usize, usize)> = (0..n)
                    .map(|s| {
                        if s < lf.len() {
                            (search.f_index(lf[s]), choice[s])
                        } else {
                            (choice[s], search.g_index(lg[s - lf.len()]))
                        }
                    })
                    .collect();
                best = best.min(search.sup_cost(&pairs));
                // odometer increment
                let mut s = 0;
                loop {
                    if s == n {
                        return Ok(best);
                    }
                    let limit = if s < lf.len() { pg.len() } else { pf.len() };
                    choice[s] += 1;
                    if choice[s] < limit {
                        break;
                    }
                    choice[s] = 0;
                    s += 1;
                }
            }
        }
        Norm::L2 => {
            let k = pf.len() * pg.len();
            let size = binomial(k + n - 1, n);
            if size > options.cap {
                return Err(Error::CapExceeded { size, cap: options.cap });
            }
            let search = PairSearch::new(tree_f, tree_g, &pf, &pg, None)?;
            let leaf_f: Vec<usize> = lf.iter().map(|&l| search.f_index(l)).collect();
            let leaf_g: Vec<usize> = lg.iter().map(|&l| search.g_index(l)).collect();
            let mut best = f64::INFINITY;
            let mut current = Vec::with_capacity(n);
            l2_multisets(&search, k, n, 0, &mut current, &leaf_f, &leaf_g, &mut best);
            Ok(best)
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[allow(clippy::too_many_arguments)]
fn l2_multisets(
    search: &PairSearch<'_>,
    k: usize,
    remaining: usize,
    start: usize,
    current: &mut Vec<(usize, usize)>,
    leaf_f: &[usize],
    leaf_g: &[usize],
    best: &mut f64,
) {
    if remaining == 0 {
        let covers = leaf_f.iter().all(|&a| current.iter().any(|p| p.0 == a))
            && leaf_g.iter().all(|&b| current.iter().any(|p| p.1 == b));
        if covers {
            *best = best.min(search.l2_cost(current));
        }
        return;
    }
    // prune: the uncovered leaves must still fit into the remaining slots
    let missing_f = leaf_f.iter().filter(|&&a| !current.iter().any(|p| p.0 == a)).count();
    let missing_g = leaf_g.iter().filter(|&&b| !current.iter().any(|p| p.1 == b)).count();
    if missing_f.max(missing_g) > remaining {
        return;
    }
    let width = search.pg.len();
    for idx in start..k {
        current.push((idx / width, idx % width));
        l2_multisets(search, k, remaining - 1, idx, current, leaf_f, leaf_g, best);
        current.pop();
    }
}

/// Precomputed merge heights and barcode distances over the pools.
struct PairSearch<'a> {
    pf: &'a [NodeId],
    pg: &'a [NodeId],
    mf: Vec<f64>,
    mg: Vec<f64>,
    /// Bottleneck distance between node barcodes, `pf.len() x pg.len()`.
    bar: Option<Vec<f64>>,
}

impl<'a> PairSearch<'a> {
    fn new(
        tree_f: &MergeTree,
        tree_g: &MergeTree,
        pf: &'a [NodeId],
        pg: &'a [NodeId],
        decorations: Option<Decorations<'_>>,
    ) -> Result<Self> {
        let bar = match decorations {
            None => None,
            Some(d) => {
                let bf: Vec<Barcode> = pf.iter().map(|&u| node_barcode(d.f, u)).collect::<Result<_>>()?;
                let bg: Vec<Barcode> = pg.iter().map(|&u| node_barcode(d.g, u)).collect::<Result<_>>()?;
                let mut out = Vec::with_capacity(bf.len() * bg.len());
                for a in &bf {
                    for b in &bg {
                        out.push(bottleneck(a, b)?);
                    }
                }
                Some(out)
            }
        };
        Ok(PairSearch { pf, pg, mf: tree_f.merge_height_matrix(pf), mg: tree_g.merge_height_matrix(pg), bar })
    }

    fn f_index(&self, node: NodeId) -> usize {
        self.pf.binary_search(&node).expect("leaf in pool")
    }

    fn g_index(&self, node: NodeId) -> usize {
        self.pg.binary_search(&node).expect("leaf in pool")
    }

    fn gap(&self, p: (usize, usize), q: (usize, usize)) -> f64 {
        let (nf, ng) = (self.pf.len(), self.pg.len());
        height_gap(self.mf[p.0 * nf + q.0], self.mg[p.1 * ng + q.1])
    }

    fn sup_cost(&self, pairs: &[(usize, usize)]) -> f64 {
        let mut cost: f64 = 0.0;
        for (a, &p) in pairs.iter().enumerate() {
            if let Some(bar) = &self.bar {
                cost = cost.max(bar[p.0 * self.pg.len() + p.1]);
            }
            for &q in &pairs[a..] {
                cost = cost.max(self.gap(p, q));
            }
        }
        cost
    }

    fn l2_cost(&self, pairs: &[(usize, usize)]) -> f64 {
        let mut total = 0.0;
        for &p in pairs {
            for &q in pairs {
                let g = self.gap(p, q);
                total += g * g;
            }
        }
        total.sqrt()
    }
}

/// Verifies that `phi` (leaves of F to points of G) and `psi` (leaves of G
/// to points of F) form an epsilon-matching of the decorated trees.
pub fn epsilon_matching_check(
    dmt_f: &DecoratedMergeTree,
    dmt_g: &DecoratedMergeTree,
    phi: &[(NodeId, TreePoint)],
    psi: &[(NodeId, TreePoint)],
    eps: f64,
    tol: f64,
) -> Result<bool> {
    let (f, g) = (dmt_f.tree(), dmt_g.tree());
    let leaves_f = f.leaves();
    let leaves_g = g.leaves();
    let lookup = |map: &[(NodeId, TreePoint)], leaves: &[NodeId]| -> Result<Vec<TreePoint>> {
        leaves
            .iter()
            .map(|&l| {
                map.iter()
                    .find(|(k, _)| *k == l)
                    .map(|&(_, p)| p)
                    .ok_or_else(|| Error::input(format!("map undefined on leaf {l}")))
            })
            .collect()
    };
    let phi_v = lookup(phi, &leaves_f)?;
    let psi_v = lookup(psi, &leaves_g)?;

    // height shift and landing on a valid point
    let shifted = |tree: &MergeTree, leaf: NodeId, p: TreePoint| -> bool {
        (p.height - (tree.height(leaf) + eps)).abs() <= tol
    };
    if !leaves_f.iter().zip(&phi_v).all(|(&l, &p)| shifted(f, l, p) && valid_point(g, p)) {
        return Ok(false);
    }
    if !leaves_g.iter().zip(&psi_v).all(|(&l, &p)| shifted(g, l, p) && valid_point(f, p)) {
        return Ok(false);
    }
    // merge compatibility: phi(u), phi(v) merge no later than merge(u, v) + eps
    if !merges_compatible(f, g, &leaves_f, &phi_v, eps, tol) || !merges_compatible(g, f, &leaves_g, &psi_v, eps, tol)
    {
        return Ok(false);
    }
    // 2 eps compatibility: psi after phi is the 2 eps ancestor
    let psi_ext = |tree_src: &MergeTree, tree_dst: &MergeTree, leaves_dst: &[NodeId], back: &[TreePoint], p: TreePoint| {
        // extend the map on leaves of the destination to the point p by
        // following any leaf below p and moving up by the height difference
        let leaf = tree_src.leaves_below_point(p)[0];
        let idx = leaves_dst.iter().position(|&l| l == leaf).expect("leaf of tree");
        let image = back[idx];
        tree_dst.point_ancestor_at(image, image.height + (p.height - tree_src.height(leaf)))
    };
    for (i, &u) in leaves_f.iter().enumerate() {
        let Some(round) = psi_ext(g, f, &leaves_g, &psi_v, phi_v[i]) else { return Ok(false) };
        let Some(target) = f.ancestor_at(u, f.height(u) + 2.0 * eps) else { return Ok(false) };
        if !same_point(f, round, target, tol) {
            return Ok(false);
        }
    }
    for (j, &v) in leaves_g.iter().enumerate() {
        let Some(round) = psi_ext(f, g, &leaves_f, &phi_v, psi_v[j]) else { return Ok(false) };
        let Some(target) = g.ancestor_at(v, g.height(v) + 2.0 * eps) else { return Ok(false) };
        if !same_point(g, round, target, tol) {
            return Ok(false);
        }
    }
    // barcodes at leaves
    for (i, &u) in leaves_f.iter().enumerate() {
        if bottleneck(&leaf_barcode(dmt_f, u)?, &point_barcode(dmt_g, phi_v[i])?)? > eps + tol {
            return Ok(false);
        }
    }
    for (j, &v) in leaves_g.iter().enumerate() {
        if bottleneck(&leaf_barcode(dmt_g, v)?, &point_barcode(dmt_f, psi_v[j])?)? > eps + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

fn valid_point(tree: &MergeTree, p: TreePoint) -> bool {
    p.node < tree.len()
        && p.height >= tree.height(p.node)
        && tree.parent(p.node).is_none_or(|q| p.height < tree.height(q))
}

fn same_point(tree: &MergeTree, p: TreePoint, q: TreePoint, tol: f64) -> bool {
    if (p.height - q.height).abs() > tol {
        return false;
    }
    let h = p.height.max(q.height);
    match (tree.point_ancestor_at(p, h), tree.point_ancestor_at(q, h)) {
        (Some(a), Some(b)) => a.node == b.node,
        _ => false,
    }
}

fn merges_compatible(
    src: &MergeTree,
    dst: &MergeTree,
    leaves: &[NodeId],
    images: &[TreePoint],
    eps: f64,
    tol: f64,
) -> bool {
    for a in 0..leaves.len() {
        for b in (a + 1)..leaves.len() {
            let m_src = src.merge_height(leaves[a], leaves[b]).expect("valid leaves");
            let m_dst = dst.point_merge_height(images[a], images[b]);
            if m_dst > m_src + eps + tol {
                return false;
            }
        }
    }
    true
}
