//! Union-find sweep that grows a merge tree while elements and connections
//! are added in non-decreasing height order.
//!
//! Merges at the height of an existing component top are coalesced into that
//! top, so the resulting tree never has a parent and child at equal height.

use crate::tree::{MergeTree, NodeId};

#[derive(Debug)]
pub(crate) struct SweepBuilder {
    heights: Vec<f64>,
    parents: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    origin: Vec<Option<usize>>,
    alive: Vec<bool>,
    redirect: Vec<NodeId>,
    uf_parent: Vec<usize>,
    uf_rank: Vec<u8>,
    top: Vec<NodeId>,
    entry: Vec<Option<NodeId>>,
}

/// Result of a sweep: the tree and, per element, the node at which the
/// element entered the tree. The component of an element at any height at
/// or above its own is the ancestor of its entry node at that height.
#[derive(Debug, Clone)]
pub struct SweepTree {
    pub tree: MergeTree,
    pub entry: Vec<NodeId>,
}

impl SweepTree {
    /// Smallest-id leaf below each element's entry node.
    pub fn element_leaves(&self) -> Vec<NodeId> {
        let mut cache: Vec<Option<NodeId>> = vec![None; self.tree.len()];
        self.entry
            .iter()
            .map(|&node| {
                *cache[node].get_or_insert_with(|| self.tree.descendant_leaves(node)[0])
            })
            .collect()
    }
}

impl SweepBuilder {
    pub fn new(elements: usize) -> Self {
        SweepBuilder {
            heights: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            origin: Vec::new(),
            alive: Vec::new(),
            redirect: Vec::new(),
            uf_parent: (0..elements).collect(),
            uf_rank: vec![0; elements],
            top: vec![usize::MAX; elements],
            entry: vec![None; elements],
        }
    }

    fn new_node(&mut self, height: f64, origin: Option<usize>) -> NodeId {
        let id = self.heights.len();
        self.heights.push(height);
        self.parents.push(None);
        self.children.push(Vec::new());
        self.origin.push(origin);
        self.alive.push(true);
        self.redirect.push(id);
        id
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.uf_parent[root] != root {
            root = self.uf_parent[root];
        }
        let mut cur = x;
        while self.uf_parent[cur] != root {
            let next = self.uf_parent[cur];
            self.uf_parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        let (big, small) = if self.uf_rank[ra] >= self.uf_rank[rb] { (ra, rb) } else { (rb, ra) };
        self.uf_parent[small] = big;
        if self.uf_rank[big] == self.uf_rank[small] {
            self.uf_rank[big] += 1;
        }
        big
    }

    pub fn is_active(&self, element: usize) -> bool {
        self.entry[element].is_some()
    }

    /// Starts a new component: a leaf at `height`.
    pub fn add_leaf(&mut self, element: usize, height: f64) {
        let node = self.new_node(height, Some(element));
        self.entry[element] = Some(node);
        let r = self.find(element);
        self.top[r] = node;
    }

    /// Adds `element` at `height`, joining the components of the given
    /// already-active neighbours. Without neighbours the element becomes a leaf.
    pub fn add_joining(&mut self, element: usize, height: f64, neighbours: &[usize]) {
        let mut roots: Vec<usize> = neighbours.iter().map(|&u| self.find(u)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.is_empty() {
            self.add_leaf(element, height);
            return;
        }
        let top = self.merge_roots(&roots, height, Some(element));
        let r = self.union(element, roots[0]);
        self.top[r] = top;
        self.entry[element] = Some(top);
    }

    /// Connects the components of two active elements at `height`.
    pub fn connect(&mut self, a: usize, b: usize, height: f64, origin: Option<usize>) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        self.merge_roots(&[ra, rb], height, origin);
    }

    /// Merges the given distinct component roots at `height`, returning the new top.
    fn merge_roots(&mut self, roots: &[usize], height: f64, origin: Option<usize>) -> NodeId {
        if roots.len() == 1 {
            return self.top[roots[0]];
        }
        let tops: Vec<NodeId> = roots.iter().map(|&r| self.top[r]).collect();
        let mut absorbed = Vec::new();
        let mut kids = Vec::new();
        for &t in &tops {
            if self.heights[t] == height {
                absorbed.push(t);
                kids.extend(self.children[t].iter().copied());
            } else {
                kids.push(t);
            }
        }
        absorbed.sort_unstable();
        kids.sort_unstable();
        let node = match kids.len() {
            0 => absorbed[0],
            1 if !absorbed.is_empty() => kids[0],
            _ => {
                let node = match absorbed.first() {
                    Some(&a) => a,
                    None => self.new_node(height, origin),
                };
                for &k in &kids {
                    self.parents[k] = Some(node);
                }
                self.children[node] = kids.clone();
                node
            }
        };
        for &a in &absorbed {
            if a != node {
                self.alive[a] = false;
                self.redirect[a] = node;
                self.children[a].clear();
            }
        }
        let mut r = roots[0];
        for &other in &roots[1..] {
            r = self.union(r, other);
        }
        self.top[r] = node;
        node
    }

    fn resolve(&mut self, mut node: NodeId) -> NodeId {
        while self.redirect[node] != node {
            let next = self.redirect[node];
            self.redirect[node] = self.redirect[next];
            node = next;
        }
        node
    }

    /// Attaches every remaining component top to an infinite root and
    /// compacts node ids (creation order is preserved).
    pub fn finish(mut self) -> SweepTree {
        let elements = self.uf_parent.len();
        let mut comp_tops = Vec::new();
        for e in 0..elements {
            if self.entry[e].is_some() {
                let r = self.find(e);
                comp_tops.push(self.top[r]);
            }
        }
        comp_tops.sort_unstable();
        comp_tops.dedup();
        let root = self.new_node(f64::INFINITY, None);
        for &t in &comp_tops {
            self.parents[t] = Some(root);
        }

        let mut remap = vec![usize::MAX; self.heights.len()];
        let mut next = 0;
        for (i, slot) in remap.iter_mut().enumerate() {
            if self.alive[i] {
                *slot = next;
                next += 1;
            }
        }
        let mut heights = Vec::with_capacity(next);
        let mut parents = Vec::with_capacity(next);
        let mut origin = Vec::with_capacity(next);
        for i in 0..self.heights.len() {
            if self.alive[i] {
                heights.push(self.heights[i]);
                parents.push(self.parents[i].map(|p| remap[p]));
                origin.push(self.origin[i]);
            }
        }
        let entry = (0..elements)
            .map(|e| {
                let node = self.entry[e].expect("every element was added");
                remap[self.resolve(node)]
            })
            .collect();
        let tree = MergeTree::from_parts_with_origin(heights, parents, origin)
            .expect("sweep produces a valid merge tree");
        SweepTree { tree, entry }
    }
}
