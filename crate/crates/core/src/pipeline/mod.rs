//! Distance estimates between merge trees and decorated merge trees via
//! transport couplings, pairwise distance matrices and the experiments.

mod experiments;

pub use experiments::{
    circle_clouds, experiment_figure1, experiment_scalar_classification, figure1_clouds, graph_dmt, graph_match,
    loo_nn, pointcloud_dmt, scalar_class_series, ComplexKind, DmtBuild, Figure1Options, Figure1Report, GraphMatch,
    NormResult, ScalarClassificationOptions, ScalarClassificationReport, RHO1, RHO2,
};

use ndarray::Array2;
use rayon::prelude::*;

use crate::barcode::Barcode;
use crate::decoration::{node_barcode, DecoratedMergeTree};
use crate::error::{Error, Result};
use crate::metrics::{bottleneck, labeled_cost, Decorations, Norm};
use crate::transport::{
    coupling_to_maps, solve_fgw, solve_gw, Coupling, Init, MeasureNetwork, SolverOptions, StructuredMeasureNetwork,
};
use crate::tree::{upsample_on_grid, Labeling, MergeTree, NodeId, SamplingGrid};

/// An upsampled tree turned into a measure network over its non-root nodes.
#[derive(Debug, Clone)]
pub struct TreeNetwork {
    pub tree: MergeTree,
    pub network: MeasureNetwork,
    pub order: Vec<NodeId>,
}

/// Merge heights over the non-root nodes of `tree`, with infinite entries
/// replaced by `cap`, and uniform mass.
fn network_of(tree: MergeTree, cap: f64) -> TreeNetwork {
    let order = tree.finite_nodes();
    let n = order.len();
    let flat = tree.merge_height_matrix(&order);
    let matrix = Array2::from_shape_vec((n, n), flat).expect("square").mapv(|h| h.min(cap));
    let network = MeasureNetwork::uniform(matrix).expect("finite heights, uniform mass");
    TreeNetwork { tree, network, order }
}

/// Upsamples on `grid` and caps root-mediated merges just above the ceiling.
pub fn tree_network_on_grid(tree: &MergeTree, grid: &SamplingGrid) -> TreeNetwork {
    network_of(upsample_on_grid(tree, grid), grid.ceiling + grid.mesh)
}

pub fn tree_to_network(tree: &MergeTree, mesh: f64) -> Result<(MeasureNetwork, Vec<NodeId>)> {
    let grid = SamplingGrid::for_trees(&[tree], mesh)?;
    let tn = tree_network_on_grid(tree, &grid);
    Ok((tn.network, tn.order))
}

/// Labelings on `[k + l]`: the leaves of F with their images, then the
/// leaves of G with theirs.
pub fn labelings_from_maps(
    tree_f: &MergeTree,
    tree_g: &MergeTree,
    phi: &[(NodeId, NodeId)],
    psi: &[(NodeId, NodeId)],
) -> Result<(Labeling, Labeling)> {
    let lookup = |map: &[(NodeId, NodeId)], leaf: NodeId| {
        map.iter()
            .find(|&&(l, _)| l == leaf)
            .map(|&(_, x)| x)
            .ok_or_else(|| Error::input(format!("map is undefined at leaf {leaf}")))
    };
    let (mut lf, mut lg) = (Vec::new(), Vec::new());
    for leaf in tree_f.leaves() {
        lf.push(leaf);
        lg.push(lookup(phi, leaf)?);
    }
    for leaf in tree_g.leaves() {
        lf.push(lookup(psi, leaf)?);
        lg.push(leaf);
    }
    Ok((Labeling::new(tree_f, lf)?, Labeling::new(tree_g, lg)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitKind {
    #[default]
    Product,
    /// Diagonal coupling; only valid when both networks have equal masses.
    Identity,
}

impl InitKind {
    fn init(self) -> Init {
        match self {
            InitKind::Product => Init::Product,
            InitKind::Identity => Init::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimateOptions {
    pub solver: SolverOptions,
    pub init: InitKind,
}

/// Upper estimate of an interleaving distance with everything needed to
/// recompute it.
#[derive(Debug, Clone)]
pub struct InterleavingEstimate {
    pub value: f64,
    pub labelings: (Labeling, Labeling),
    pub coupling: Coupling,
    pub norm: Norm,
    pub mesh: f64,
    /// The upsampled trees the labelings refer to.
    pub trees: (MergeTree, MergeTree),
    pub orders: (Vec<NodeId>, Vec<NodeId>),
    pub trace: Vec<f64>,
    /// Set when infinite feature costs had to be capped.
    pub capped_costs: bool,
}

impl InterleavingEstimate {
    /// Undecorated cost of the recorded labelings under `norm`.
    pub fn cost(&self, norm: Norm) -> Result<f64> {
        labeled_cost(&self.trees.0, &self.labelings.0, &self.trees.1, &self.labelings.1, norm, None)
    }
}

fn estimate_from_networks(a: &TreeNetwork, b: &TreeNetwork, norm: Norm, mesh: f64, options: &EstimateOptions) -> Result<InterleavingEstimate> {
    let out = solve_gw(&a.network, &b.network, &options.init.init(), &options.solver)?;
    let (phi, psi) = coupling_to_maps(&out.coupling, &a.tree, &b.tree, &a.order, &b.order)?;
    let labelings = labelings_from_maps(&a.tree, &b.tree, &phi, &psi)?;
    let value = labeled_cost(&a.tree, &labelings.0, &b.tree, &labelings.1, norm, None)?;
    Ok(InterleavingEstimate {
        value,
        labelings,
        coupling: out.coupling,
        norm,
        mesh,
        trees: (a.tree.clone(), b.tree.clone()),
        orders: (a.order.clone(), b.order.clone()),
        trace: out.trace,
        capped_costs: false,
    })
}

/// Transport-based upper estimate of the labelled interleaving distance.
pub fn estimate_tree_distance(
    tree_f: &MergeTree,
    tree_g: &MergeTree,
    mesh: f64,
    norm: Norm,
    options: &EstimateOptions,
) -> Result<InterleavingEstimate> {
    let grid = SamplingGrid::for_trees(&[tree_f, tree_g], mesh)?;
    let a = tree_network_on_grid(tree_f, &grid);
    let b = tree_network_on_grid(tree_g, &grid);
    estimate_from_networks(&a, &b, norm, mesh, options)
}

struct DmtNetwork {
    dmt: DecoratedMergeTree,
    net: StructuredMeasureNetwork,
    order: Vec<NodeId>,
}

fn dmt_network_on_grid(dmt: &DecoratedMergeTree, grid: &SamplingGrid) -> Result<DmtNetwork> {
    let up = dmt.upsampled(grid);
    let tn = network_of(up.tree().clone(), grid.ceiling + grid.mesh);
    let features = tn.order.iter().map(|&u| node_barcode(&up, u)).collect::<Result<Vec<Barcode>>>()?;
    let net = StructuredMeasureNetwork::new(tn.network, features)?;
    Ok(DmtNetwork { dmt: up, net, order: tn.order })
}

fn dmt_estimate(a: &DmtNetwork, b: &DmtNetwork, zeta: f64, mesh: f64, options: &EstimateOptions) -> Result<InterleavingEstimate> {
    let out = solve_fgw(&a.net, &b.net, zeta, &options.init.init(), &options.solver)?;
    let (ta, tb) = (a.dmt.tree(), b.dmt.tree());
    let coupling = out.solution.coupling;
    let (phi, psi) = coupling_to_maps(&coupling, ta, tb, &a.order, &b.order)?;
    let labelings = labelings_from_maps(ta, tb, &phi, &psi)?;
    let value = labeled_cost(ta, &labelings.0, tb, &labelings.1, Norm::Inf, Some(Decorations { f: &a.dmt, g: &b.dmt }))?;
    Ok(InterleavingEstimate {
        value,
        labelings,
        coupling,
        norm: Norm::Inf,
        mesh,
        trees: (ta.clone(), tb.clone()),
        orders: (a.order.clone(), b.order.clone()),
        trace: out.solution.trace,
        capped_costs: out.capped_infinite_costs,
    })
}

/// Fused transport estimate of the decorated distance; the value is the
/// decorated sup-norm cost of the extracted labelings.
pub fn estimate_dmt_distance(
    dmt_f: &DecoratedMergeTree,
    dmt_g: &DecoratedMergeTree,
    mesh: f64,
    zeta: f64,
    options: &EstimateOptions,
) -> Result<InterleavingEstimate> {
    if dmt_f.degree() != dmt_g.degree() {
        return Err(Error::DimensionMismatch(format!(
            "decorations of degree {} and {}",
            dmt_f.degree(),
            dmt_g.degree()
        )));
    }
    let grid = SamplingGrid::for_trees(&[dmt_f.tree(), dmt_g.tree()], mesh)?;
    let a = dmt_network_on_grid(dmt_f, &grid)?;
    let b = dmt_network_on_grid(dmt_g, &grid)?;
    dmt_estimate(&a, &b, zeta, mesh, options)
}

/// Inputs to a pairwise matrix.
#[derive(Debug, Clone)]
pub enum Item {
    Tree(MergeTree),
    Dmt(DecoratedMergeTree),
    /// Barcodes of any degrees, at most one per degree.
    Barcodes(Vec<Barcode>),
}

impl Item {
    fn tree(&self) -> Option<&MergeTree> {
        match self {
            Item::Tree(t) => Some(t),
            Item::Dmt(d) => Some(d.tree()),
            Item::Barcodes(_) => None,
        }
    }

    fn barcode(&self, degree: usize) -> Option<&Barcode> {
        match self {
            Item::Barcodes(bs) => bs.iter().find(|b| b.degree == degree),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMetric {
    Tree(Norm),
    Dmt { zeta: f64 },
    Bottleneck0,
    Bottleneck1,
    Max01,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseOptions {
    pub mesh: f64,
    pub estimate: EstimateOptions,
}

impl Default for PairwiseOptions {
    fn default() -> Self {
        PairwiseOptions { mesh: 0.5, estimate: EstimateOptions::default() }
    }
}

fn unordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

fn fill_symmetric(n: usize, pairs: &[(usize, usize)], values: &[f64]) -> Array2<f64> {
    let mut m = Array2::zeros((n, n));
    for (&(i, j), &v) in pairs.iter().zip(values) {
        m[[i, j]] = v;
        m[[j, i]] = v;
    }
    m
}

/// Tree estimates for every unordered pair, one transport solve per pair,
/// evaluated under each of `norms`. All trees share one sampling grid.
pub fn pairwise_tree_matrices(trees: &[MergeTree], norms: &[Norm], options: &PairwiseOptions) -> Result<Vec<Array2<f64>>> {
    let n = trees.len();
    if n == 0 {
        return Ok(norms.iter().map(|_| Array2::zeros((0, 0))).collect());
    }
    let refs: Vec<&MergeTree> = trees.iter().collect();
    let grid = SamplingGrid::for_trees(&refs, options.mesh)?;
    let nets: Vec<TreeNetwork> = trees.par_iter().map(|t| tree_network_on_grid(t, &grid)).collect();
    let pairs = unordered_pairs(n);
    let values: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let est = estimate_from_networks(&nets[i], &nets[j], Norm::Inf, options.mesh, &options.estimate)?;
            norms.iter().map(|&norm| est.cost(norm)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..norms.len())
        .map(|k| {
            let column: Vec<f64> = values.iter().map(|v| v[k]).collect();
            fill_symmetric(n, &pairs, &column)
        })
        .collect())
}

/// Symmetric matrix of `metric` over all unordered pairs of `items`.
pub fn pairwise_matrix(items: &[Item], metric: PairMetric, options: &PairwiseOptions) -> Result<Array2<f64>> {
    let n = items.len();
    let pairs = unordered_pairs(n);
    match metric {
        PairMetric::Tree(norm) => {
            let trees = items
                .iter()
                .map(|it| it.tree().cloned().ok_or_else(|| Error::input("tree metric needs trees")))
                .collect::<Result<Vec<_>>>()?;
            Ok(pairwise_tree_matrices(&trees, &[norm], options)?.remove(0))
        }
        PairMetric::Dmt { zeta } => {
            let dmts = items
                .iter()
                .map(|it| match it {
                    Item::Dmt(d) => Ok(d),
                    _ => Err(Error::input("dmt metric needs decorated trees")),
                })
                .collect::<Result<Vec<_>>>()?;
            if dmts.windows(2).any(|w| w[0].degree() != w[1].degree()) {
                return Err(Error::DimensionMismatch("decorations of different degrees".into()));
            }
            if n == 0 {
                return Ok(Array2::zeros((0, 0)));
            }
            let trees: Vec<&MergeTree> = dmts.iter().map(|d| d.tree()).collect();
            let grid = SamplingGrid::for_trees(&trees, options.mesh)?;
            let nets = dmts.par_iter().map(|d| dmt_network_on_grid(d, &grid)).collect::<Result<Vec<_>>>()?;
            let values = pairs
                .par_iter()
                .map(|&(i, j)| Ok(dmt_estimate(&nets[i], &nets[j], zeta, options.mesh, &options.estimate)?.value))
                .collect::<Result<Vec<f64>>>()?;
            Ok(fill_symmetric(n, &pairs, &values))
        }
        PairMetric::Bottleneck0 | PairMetric::Bottleneck1 | PairMetric::Max01 => {
            let degrees: &[usize] = match metric {
                PairMetric::Bottleneck0 => &[0],
                PairMetric::Bottleneck1 => &[1],
                _ => &[0, 1],
            };
            let get = |i: usize, d: usize| {
                items[i]
                    .barcode(d)
                    .ok_or_else(|| Error::input(format!("item {i} has no degree-{d} barcode")))
            };
            for i in 0..n {
                for &d in degrees {
                    get(i, d)?;
                }
            }
            let values = pairs
                .par_iter()
                .map(|&(i, j)| {
                    degrees
                        .iter()
                        .map(|&d| bottleneck(get(i, d)?, get(j, d)?))
                        .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v)))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(fill_symmetric(n, &pairs, &values))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn cherry(a: f64, b: f64, m: f64) -> MergeTree {
        MergeTree::from_parents(vec![a, b, m, INF], vec![Some(2), Some(2), Some(3), None]).unwrap()
    }

    #[test]
    fn single_leaf_network_is_a_chain() {
        let t = MergeTree::from_parents(vec![0.0, INF], vec![Some(1), None]).unwrap();
        let (net, order) = tree_to_network(&t, 0.5).unwrap();
        // the root edge is only sampled up to the highest finite height
        assert_eq!(order, vec![0]);
        assert_eq!(net.matrix()[[0, 0]], 0.0);
        let t = cherry(0.0, 1.0, 2.0);
        let (net, order) = tree_to_network(&t, 0.5).unwrap();
        assert!((net.mass().sum() - 1.0).abs() < 1e-12);
        let h = |u: NodeId| upsample_on_grid(&t, &SamplingGrid::for_trees(&[&t], 0.5).unwrap()).height(u);
        for (i, &u) in order.iter().enumerate() {
            assert!(net.matrix()[[i, i]] == h(u));
        }
    }

    #[test]
    fn identical_trees_estimate_zero() {
        let t = cherry(0.0, 1.0, 3.0);
        let opts = EstimateOptions { init: InitKind::Identity, ..Default::default() };
        let est = estimate_tree_distance(&t, &t, 0.5, Norm::Inf, &opts).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.cost(Norm::L2).unwrap(), 0.0);
    }

    #[test]
    fn labelings_from_single_leaves() {
        let t = MergeTree::from_parents(vec![0.0, INF], vec![Some(1), None]).unwrap();
        let (a, b) = labelings_from_maps(&t, &t, &[(0, 0)], &[(0, 0)]).unwrap();
        assert_eq!(a.assignment(), &[0, 0]);
        assert_eq!(b.assignment(), &[0, 0]);
    }

    #[test]
    fn pairwise_bottleneck_duplicates() {
        let b = Barcode::new(0, vec![crate::Interval::new(0.0, 2.0).unwrap()]);
        let items = vec![Item::Barcodes(vec![b.clone()]), Item::Barcodes(vec![b])];
        let m = pairwise_matrix(&items, PairMetric::Bottleneck0, &PairwiseOptions::default()).unwrap();
        assert_eq!(m, Array2::<f64>::zeros((2, 2)));
        assert!(pairwise_matrix(&items, PairMetric::Bottleneck1, &PairwiseOptions::default()).is_err());
        let one = pairwise_matrix(&items[..1], PairMetric::Max01, &PairwiseOptions::default());
        assert!(one.is_err());
    }
}
