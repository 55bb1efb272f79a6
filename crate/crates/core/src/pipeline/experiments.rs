use std::f64::consts::PI;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    estimate_dmt_distance, pairwise_tree_matrices, EstimateOptions, InitKind, InterleavingEstimate, PairwiseOptions,
};
use crate::decoration::{check_disjointness, lift_decorate, simplify, DecoratedMergeTree};
use crate::error::{Error, Result};
use crate::ingest::{
    cech_complex, graph_sublevel_complex, graph_sweep, scalar_to_merge_tree, single_linkage_sweep, vietoris_rips,
    DistanceMatrix, FilteredComplex, ScalarSeries, WeightedGraph,
};
use crate::metrics::{bottleneck, Norm};
use crate::persistence::{barcode, reduce, PersistencePair};
use crate::transport::SolverOptions;
use crate::tree::{MergeTree, NodeId};

/// A decorated tree together with the data it was lifted from.
#[derive(Debug, Clone)]
pub struct DmtBuild {
    pub dmt: DecoratedMergeTree,
    pub complex: FilteredComplex,
    pub pairs: Vec<PersistencePair>,
    /// Tree node at which each vertex entered.
    pub entry: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComplexKind {
    #[default]
    Rips,
    /// Radius parametrisation; the tree is built on half distances to match.
    Cech,
}

/// Lift DMT of a point cloud given by its distance matrix.
pub fn pointcloud_dmt(dist: &DistanceMatrix, degree: usize, max_radius: f64, kind: ComplexKind) -> Result<DmtBuild> {
    let max_dim = (degree + 1).clamp(1, 2);
    let (complex, sweep) = match kind {
        ComplexKind::Rips => (vietoris_rips(dist, max_dim, max_radius)?, single_linkage_sweep(dist)?),
        ComplexKind::Cech => (cech_complex(dist, max_dim, max_radius)?, single_linkage_sweep(&dist.scaled(0.5))?),
    };
    let pairs = reduce(&complex)?;
    let dmt = lift_decorate(&sweep.tree, &complex, &pairs, degree, &sweep.entry)?;
    Ok(DmtBuild { dmt, complex, pairs, entry: sweep.entry })
}

/// Lift DMT of a node-weighted graph's sublevel filtration.
pub fn graph_dmt(g: &WeightedGraph, degree: usize, triangle_hops: Option<usize>) -> Result<DmtBuild> {
    let sweep = graph_sweep(g);
    let complex = graph_sublevel_complex(g, triangle_hops)?;
    let pairs = reduce(&complex)?;
    let dmt = lift_decorate(&sweep.tree, &complex, &pairs, degree, &sweep.entry)?;
    Ok(DmtBuild { dmt, complex, pairs, entry: sweep.entry })
}

/// Leave-one-out nearest neighbour predictions and accuracy; ties go to the
/// lowest index.
pub fn loo_nn(dist: &Array2<f64>, labels: &[usize]) -> (f64, Vec<usize>) {
    let n = labels.len();
    let mut predicted = Vec::with_capacity(n);
    let mut correct = 0;
    for i in 0..n {
        let mut best: Option<(f64, usize)> = None;
        for j in (0..n).filter(|&j| j != i) {
            let d = dist[[i, j]];
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        let p = best.map_or(labels[i], |(_, j)| labels[j]);
        correct += usize::from(p == labels[i]);
        predicted.push(p);
    }
    let accuracy = if n == 0 { 0.0 } else { correct as f64 / n as f64 };
    (accuracy, predicted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarClassificationOptions {
    pub seed: u64,
    pub samples_per_class: usize,
    pub grid_points: usize,
    /// Upper end of the uniform noise.
    pub noise: f64,
    pub mesh: f64,
    pub norms: Vec<Norm>,
    pub solver: SolverOptions,
}

impl Default for ScalarClassificationOptions {
    fn default() -> Self {
        ScalarClassificationOptions {
            seed: 0,
            samples_per_class: 10,
            grid_points: 100,
            noise: 0.5,
            mesh: 0.5,
            norms: vec![Norm::Inf, Norm::L2],
            solver: SolverOptions::default(),
        }
    }
}

pub const RHO1: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const RHO2: [f64; 3] = [1.0, 3.0, 5.0];

/// `sin(rho1 pi t) + cos(rho2 pi t)` plus uniform noise on `grid_points`
/// equally spaced points of `[0, 1]`.
pub fn scalar_class_series(rho1: f64, rho2: f64, grid_points: usize, noise: f64, rng: &mut impl Rng) -> Result<ScalarSeries> {
    if grid_points < 2 {
        return Err(Error::input("the sampling grid needs at least two points"));
    }
    let samples = (0..grid_points)
        .map(|i| {
            let t = i as f64 / (grid_points - 1) as f64;
            let g = if noise > 0.0 { rng.gen_range(0.0..noise) } else { 0.0 };
            (t, (rho1 * PI * t).sin() + (rho2 * PI * t).cos() + g)
        })
        .collect();
    ScalarSeries::new(samples)
}

fn norm_name(norm: Norm) -> &'static str {
    match norm {
        Norm::Inf => "inf",
        Norm::L2 => "l2",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormResult {
    pub norm: &'static str,
    pub accuracy: f64,
    pub predicted: Vec<usize>,
    /// Rows: true class, columns: predicted class.
    pub confusion: Vec<Vec<usize>>,
    pub distances: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalarClassificationReport {
    pub seed: u64,
    pub samples_per_class: usize,
    pub grid_points: usize,
    pub noise: f64,
    pub mesh: f64,
    pub max_iters: usize,
    pub tol: f64,
    /// `(rho1, rho2)` per class index.
    pub classes: Vec<(f64, f64)>,
    pub labels: Vec<usize>,
    pub results: Vec<NormResult>,
}

pub fn experiment_scalar_classification(options: &ScalarClassificationOptions) -> Result<ScalarClassificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut classes = Vec::new();
    let mut labels = Vec::new();
    let mut trees: Vec<MergeTree> = Vec::new();
    for &r1 in &RHO1 {
        for &r2 in &RHO2 {
            let class = classes.len();
            classes.push((r1, r2));
            for _ in 0..options.samples_per_class {
                let series = scalar_class_series(r1, r2, options.grid_points, options.noise, &mut rng)?;
                trees.push(scalar_to_merge_tree(&series)?);
                labels.push(class);
            }
        }
    }
    let pairwise = PairwiseOptions {
        mesh: options.mesh,
        estimate: EstimateOptions { solver: options.solver, init: InitKind::Product },
    };
    let matrices = pairwise_tree_matrices(&trees, &options.norms, &pairwise)?;
    let results = options
        .norms
        .iter()
        .zip(matrices)
        .map(|(&norm, m)| {
            let (accuracy, predicted) = loo_nn(&m, &labels);
            let mut confusion = vec![vec![0; classes.len()]; classes.len()];
            for (&t, &p) in labels.iter().zip(&predicted) {
                confusion[t][p] += 1;
            }
            NormResult {
                norm: norm_name(norm),
                accuracy,
                predicted,
                confusion,
                distances: m.outer_iter().map(|r| r.to_vec()).collect(),
            }
        })
        .collect();
    Ok(ScalarClassificationReport {
        seed: options.seed,
        samples_per_class: options.samples_per_class,
        grid_points: options.grid_points,
        noise: options.noise,
        mesh: options.mesh,
        max_iters: options.solver.max_iters,
        tol: options.solver.tol,
        classes,
        labels,
        results,
    })
}

/// `n` points on each circle of radius `radius` around `centers`, starting at
/// angle 0 and going counter-clockwise.
pub fn circle_clouds(centers: &[(f64, f64)], radius: f64, n: usize) -> Vec<Vec<f64>> {
    centers
        .iter()
        .flat_map(|&(x, y)| {
            (0..n).map(move |k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                vec![x + radius * a.cos(), y + radius * a.sin()]
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure1Options {
    pub radius: f64,
    /// Gap between the two clusters.
    pub separation: f64,
    /// Coordinates are jittered by `U[-noise, noise]`.
    pub noise: f64,
    pub seed: u64,
    pub points_per_circle: usize,
    pub max_radius: f64,
    pub mesh: f64,
    pub zeta: f64,
    /// Optional `(bar, tree)` simplification thresholds applied before estimating.
    pub simplify: Option<(f64, f64)>,
    pub solver: SolverOptions,
}

impl Default for Figure1Options {
    fn default() -> Self {
        Figure1Options {
            radius: 1.0,
            separation: 4.0,
            noise: 0.0,
            seed: 0,
            points_per_circle: 48,
            max_radius: 1.5,
            mesh: 0.25,
            zeta: 0.5,
            simplify: Some((0.0, 0.1)),
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Figure1Report {
    pub radius: f64,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
    pub points: (usize, usize),
    pub bottleneck0: f64,
    pub bottleneck1: f64,
    pub dmt_estimate: f64,
    pub self_estimate: f64,
    pub violations: (usize, usize),
    pub capped_costs: bool,
}

/// The two clouds: (a) one cluster holding two touching circles next to a
/// loop-free segment; (b) one circle per cluster. Cluster gaps and sample
/// spacings agree so the ordinary barcodes coincide.
pub fn figure1_clouds(options: &Figure1Options) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let r = options.radius;
    let n = options.points_per_circle;
    if !(r > 0.0) || n < 3 {
        return Err(Error::input("radius must be positive and circles need at least 3 points"));
    }
    if n % 4 != 0 {
        return Err(Error::input("points per circle must be a multiple of 4"));
    }
    let chord = 2.0 * r * (PI / n as f64).sin();
    let gap = options.separation;
    let mut a = circle_clouds(&[(0.0, 0.0), (0.0, 2.0 * r + chord)], r, n);
    let top = 2.0 * r + chord + r;
    let bottom = -r;
    let count = ((top - bottom) / chord).floor() as usize + 1;
    a.extend((0..count).map(|k| vec![r + gap, bottom + k as f64 * chord]));
    let mut b = circle_clouds(&[(0.0, 0.0), (2.0 * r + gap, 0.0)], r, n);
    if options.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for p in a.iter_mut().chain(b.iter_mut()) {
            for x in p.iter_mut() {
                *x += rng.gen_range(-options.noise..=options.noise);
            }
        }
    }
    Ok((a, b))
}

pub fn experiment_figure1(options: &Figure1Options) -> Result<Figure1Report> {
    let (a, b) = figure1_clouds(options)?;
    let build = |pts: &[Vec<f64>], degree| pointcloud_dmt(&DistanceMatrix::euclidean(pts)?, degree, options.max_radius, ComplexKind::Cech);
    let (a1, b1) = (build(&a, 1)?, build(&b, 1)?);
    let b0 = bottleneck(&barcode(&a1.pairs, 0, true), &barcode(&b1.pairs, 0, true))?;
    let bn1 = bottleneck(&barcode(&a1.pairs, 1, true), &barcode(&b1.pairs, 1, true))?;
    let violations = (check_disjointness(&a1.dmt).len(), check_disjointness(&b1.dmt).len());
    let prepare = |d: &DecoratedMergeTree| match options.simplify {
        Some((bar, tree)) => simplify(d, bar, tree),
        None => Ok(d.clone()),
    };
    let (da, db) = (prepare(&a1.dmt)?, prepare(&b1.dmt)?);
    let est = EstimateOptions { solver: options.solver, init: InitKind::Product };
    let cross: InterleavingEstimate = estimate_dmt_distance(&da, &db, options.mesh, options.zeta, &est)?;
    let same = estimate_dmt_distance(&da, &da, options.mesh, options.zeta, &EstimateOptions { init: InitKind::Identity, ..est })?;
    Ok(Figure1Report {
        radius: options.radius,
        separation: options.separation,
        noise: options.noise,
        seed: options.seed,
        points: (a.len(), b.len()),
        bottleneck0: b0,
        bottleneck1: bn1,
        dmt_estimate: cross.value,
        self_estimate: same.value,
        violations,
        capped_costs: cross.capped_costs,
    })
}

/// Node assignment between two graphs read off a fused coupling.
#[derive(Debug, Clone)]
pub struct GraphMatch {
    /// For every vertex of B, the matched vertex of A.
    pub assignment: Vec<usize>,
    pub estimate: InterleavingEstimate,
}

/// Position in `order` of the node at or directly below the point where
/// each vertex entered the (upsampled) tree.
fn vertex_slots(tree: &MergeTree, order: &[NodeId], entry: &[NodeId], weights: &[f64]) -> Result<Vec<usize>> {
    let mut slot = vec![usize::MAX; tree.len()];
    for (i, &u) in order.iter().enumerate() {
        slot[u] = i;
    }
    entry
        .iter()
        .zip(weights)
        .map(|(&node, &w)| {
            // ids of original nodes survive upsampling
            let p = tree.ancestor_at(node, w.max(tree.height(node))).expect("at or above the entry node");
            match slot[p.node] {
                usize::MAX => Err(Error::Solver(format!("node {} is not in the network", p.node))),
                i => Ok(i),
            }
        })
        .collect()
}

/// Matches every vertex of B to the vertex of A carrying the most coupling
/// mass against it; ties go to the closest weight, then the lowest id.
pub fn graph_match(
    ga: &WeightedGraph,
    gb: &WeightedGraph,
    degree: usize,
    triangle_hops: Option<usize>,
    mesh: f64,
    zeta: f64,
    options: &EstimateOptions,
) -> Result<GraphMatch> {
    let a = graph_dmt(ga, degree, triangle_hops)?;
    let b = graph_dmt(gb, degree, triangle_hops)?;
    let estimate = estimate_dmt_distance(&a.dmt, &b.dmt, mesh, zeta, options)?;
    let (ta, tb) = &estimate.trees;
    let (oa, ob) = &estimate.orders;
    let sa = vertex_slots(ta, oa, &a.entry, ga.weights())?;
    let sb = vertex_slots(tb, ob, &b.entry, gb.weights())?;
    let x = estimate.coupling.matrix();
    let (wa, wb) = (ga.weights(), gb.weights());
    let assignment = sb
        .iter()
        .enumerate()
        .map(|(v, &j)| {
            let mut best = 0;
            for u in 1..sa.len() {
                let (m, bm) = (x[[sa[u], j]], x[[sa[best], j]]);
                if m > bm || (m == bm && (wa[u] - wb[v]).abs() < (wa[best] - wb[v]).abs()) {
                    best = u;
                }
            }
            best
        })
        .collect();
    Ok(GraphMatch { assignment, estimate })
}
