mod common;

use common::{multiset, random_cloud, random_complex, random_dmt, random_tree};
use dmt_core::decoration::{check_disjointness, pushforward};
use dmt_core::ingest::{
    graph_merge_tree, graph_sublevel_complex, scalar_to_merge_tree, single_linkage_sweep, DistanceMatrix,
    FilteredComplex, ScalarSeries, WeightedGraph,
};
use dmt_core::io;
use dmt_core::metrics::{epsilon_matching_check, exhaustive_labeled_distance, ExhaustiveOptions};
use dmt_core::persistence::{barcode, reduce};
use dmt_core::pipeline::{estimate_tree_distance, pointcloud_dmt, ComplexKind, EstimateOptions, InitKind};
use dmt_core::transport::{gw_distortion, gw_distortion_reference, solve_gw, Coupling, Init, MeasureNetwork, SolverOptions};
use dmt_core::tree::{lca_matrix, upsample_on_grid, Labeling, SamplingGrid, TreePoint};
use dmt_core::{bottleneck, labeled_cost, Barcode, Decorations, Interval, MergeTree, Norm};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn interval() -> impl Strategy<Value = Interval> {
    (0u32..12, prop::option::weighted(0.85, 0u32..12)).prop_map(|(b, len)| {
        let b = b as f64 * 0.25;
        match len {
            Some(l) => Interval::new(b, b + l as f64 * 0.25).unwrap(),
            None => Interval::essential(b),
        }
    })
}

fn barcode_strategy() -> impl Strategy<Value = Barcode> {
    prop::collection::vec(interval(), 0..=6).prop_map(|bars| Barcode::new(1, bars))
}

fn random_network(rng: &mut impl Rng, n: usize) -> MeasureNetwork {
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(0.0..4.0);
            m[[i, j]] = x;
            m[[j, i]] = x;
        }
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    MeasureNetwork::new(m, Array1::from_iter(w.iter().map(|x| x / s))).unwrap()
}

/// Merge-height network over the non-root nodes of a tree, uniform masses.
fn tree_network(t: &MergeTree) -> MeasureNetwork {
    let nodes = t.finite_nodes();
    let n = nodes.len();
    MeasureNetwork::uniform(Array2::from_shape_vec((n, n), t.merge_height_matrix(&nodes)).unwrap()).unwrap()
}

/// Basic feasible solutions of the transport polytope, by trying every
/// spanning tree of the complete bipartite graph.
fn polytope_vertices(mu1: &Array1<f64>, mu2: &Array1<f64>) -> Vec<Array2<f64>> {
    let (n, m) = (mu1.len(), mu2.len());
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect();
    let k = n + m - 1;
    let mut out = Vec::new();
    let mut pick = vec![false; cells.len()];
    fn rec(
        start: usize,
        left: usize,
        cells: &[(usize, usize)],
        pick: &mut Vec<bool>,
        mu: (&Array1<f64>, &Array1<f64>),
        out: &mut Vec<Array2<f64>>,
    ) {
        if left == 0 {
            let (mu1, mu2) = mu;
            let (n, m) = (mu1.len(), mu2.len());
            let mut x = Array2::zeros((n, m));
            let mut rows = mu1.to_vec();
            let mut cols = mu2.to_vec();
            let mut open: Vec<(usize, usize)> = cells.iter().zip(pick.iter()).filter(|(_, &p)| p).map(|(&c, _)| c).collect();
            // peel cells whose row or column has no other open cell
            while !open.is_empty() {
                let pos = open.iter().position(|&(i, j)| {
                    open.iter().filter(|&&(a, _)| a == i).count() == 1 || open.iter().filter(|&&(_, b)| b == j).count() == 1
                });
                let Some(pos) = pos else { return };
                let (i, j) = open.remove(pos);
                let row_only = open.iter().all(|&(a, _)| a != i);
                let v = if row_only { rows[i] } else { cols[j] };
                x[[i, j]] = v;
                rows[i] -= v;
                cols[j] -= v;
            }
            if x.iter().all(|&v| v >= -1e-12) && rows.iter().chain(&cols).all(|r| r.abs() < 1e-9) {
                out.push(x.mapv(|v| v.max(0.0)));
            }
            return;
        }
        for c in start..cells.len() {
            pick[c] = true;
            rec(c + 1, left - 1, cells, pick, mu, out);
            pick[c] = false;
        }
    }
    rec(0, k, &cells, &mut pick, (mu1, mu2), &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_heights_are_ultrametric(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), 5, 0.5);
        let nodes = t.finite_nodes();
        for &u in &nodes {
            for &v in &nodes {
                for &w in &nodes {
                    let uw = t.merge_height(u, w).unwrap();
                    let bound = t.merge_height(u, v).unwrap().max(t.merge_height(v, w).unwrap());
                    prop_assert!(uw <= bound);
                }
            }
        }
    }

    #[test]
    fn lp_metric_is_a_metric(seed in any::<u64>()) {
        let t = random_tree(&mut rng(seed), 5, 0.5);
        let nodes = t.finite_nodes();
        for p in [1.0, 2.0, f64::INFINITY] {
            let d = |u, v| t.lp_metric(u, v, p).unwrap();
            for &u in &nodes {
                prop_assert_eq!(d(u, u), 0.0);
                for &v in &nodes {
                    prop_assert_eq!(d(u, v), d(v, u));
                    if u != v {
                        prop_assert!(d(u, v) > 0.0);
                    }
                    for &w in &nodes {
                        prop_assert!(d(u, w) <= d(u, v) + d(v, w) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn upsampling_is_idempotent_and_keeps_merge_heights(seed in any::<u64>(), mesh in 0.1f64..1.5) {
        let t = random_tree(&mut rng(seed), 5, 0.5);
        let grid = SamplingGrid::for_trees(&[&t], mesh).unwrap();
        let up = upsample_on_grid(&t, &grid);
        prop_assert!(up.validate().is_ok());
        prop_assert_eq!(&upsample_on_grid(&up, &grid), &up);
        let old: Vec<usize> = (0..t.len()).collect();
        prop_assert_eq!(up.merge_height_matrix(&old), t.merge_height_matrix(&old));
        for u in 0..t.len() {
            prop_assert_eq!(up.height(u), t.height(u));
        }
    }

    #[test]
    fn lca_matrices_are_symmetric_with_heights_on_the_diagonal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 5, 0.5);
        let nodes = t.finite_nodes();
        let mut assignment = t.leaves();
        for _ in 0..r.gen_range(0..4) {
            assignment.push(*nodes.choose(&mut r).unwrap());
        }
        assignment.shuffle(&mut r);
        let lab = Labeling::new(&t, assignment.clone()).unwrap();
        let m = lca_matrix(&t, &lab).unwrap();
        for i in 0..m.size() {
            prop_assert_eq!(m.get(i, i), t.height(assignment[i]));
            for j in 0..m.size() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!(m.get(i, j) >= m.get(i, i).max(m.get(j, j)));
            }
        }
    }

    #[test]
    fn scalar_tree_leaves_are_local_minima(values in prop::collection::vec(0u8..5, 1..40)) {
        let vals: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let t = scalar_to_merge_tree(&ScalarSeries::from_values(&vals).unwrap()).unwrap();
        prop_assert!(t.validate().is_ok());
        let mut runs = vals.clone();
        runs.dedup();
        let minima = (0..runs.len())
            .filter(|&i| (i == 0 || runs[i - 1] > runs[i]) && (i + 1 == runs.len() || runs[i + 1] > runs[i]))
            .count();
        prop_assert_eq!(t.leaves().len(), minima);
        let branching: usize = (0..t.len()).filter(|&u| !t.is_leaf(u)).map(|u| t.children(u).len() - 1).sum();
        prop_assert_eq!(branching, minima - 1);
    }

    #[test]
    fn single_linkage_merges_at_minimax_path_cost(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=7);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![r.gen_range(0..6) as f64, r.gen_range(0..6) as f64]).collect();
        let dist = DistanceMatrix::euclidean(&pts).unwrap();
        let sweep = single_linkage_sweep(&dist).unwrap();
        prop_assert!(sweep.tree.validate().is_ok());
        let mut mm: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { dist.get(i, j) }).collect()).collect();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    mm[i][j] = mm[i][j].min(mm[i][k].max(mm[k][j]));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    prop_assert_eq!(sweep.tree.merge_height(sweep.entry[i], sweep.entry[j]).unwrap(), mm[i][j]);
                }
            }
        }
    }

    #[test]
    fn graph_degree_zero_persistence_matches_the_merge_tree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| r.gen_bool(0.4)).collect();
        let weights: Vec<f64> = (0..n).map(|_| r.gen_range(0..5) as f64).collect();
        let g = WeightedGraph::new(n, edges, weights).unwrap();
        let complex = graph_sublevel_complex(&g, Some(2)).unwrap();
        let bars = barcode(&reduce(&complex).unwrap(), 0, true);
        // elder rule on the tree: at each merge every child but the oldest dies
        let t = graph_merge_tree(&g);
        prop_assert!(t.validate().is_ok());
        let mut order: Vec<usize> = (0..t.len()).collect();
        order.sort_by(|&a, &b| t.height(a).total_cmp(&t.height(b)));
        let mut oldest = vec![f64::INFINITY; t.len()];
        let mut expected = Vec::new();
        for u in order {
            if t.is_leaf(u) {
                oldest[u] = t.height(u);
                continue;
            }
            let mut births: Vec<f64> = t.children(u).iter().map(|&c| oldest[c]).collect();
            births.sort_by(f64::total_cmp);
            oldest[u] = births[0];
            let death = t.height(u);
            for &b in &births[if death.is_infinite() { 0 } else { 1 }..] {
                if b < death {
                    expected.push(Interval { birth: b, death });
                }
            }
        }
        prop_assert_eq!(multiset(&bars), multiset(&Barcode::new(0, expected)));
    }

    #[test]
    fn persistence_ignores_tie_breaks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let complex = random_complex(&mut r, 30);
        let mut s = complex.simplices().to_vec();
        // shuffle within blocks of equal (value, dimension)
        let mut i = 0;
        while i < s.len() {
            let j = (i..s.len()).find(|&j| s[j].value != s[i].value || s[j].dim() != s[i].dim()).unwrap_or(s.len());
            s[i..j].shuffle(&mut r);
            i = j;
        }
        let shuffled = FilteredComplex::from_ordered(s).unwrap();
        let (p1, p2) = (reduce(&complex).unwrap(), reduce(&shuffled).unwrap());
        for d in 0..=complex.max_dim().unwrap_or(0) {
            prop_assert_eq!(multiset(&barcode(&p1, d, false)), multiset(&barcode(&p2, d, false)));
        }
    }

    #[test]
    fn lifted_births_match_the_bars(seed in any::<u64>()) {
        let pts = random_cloud(&mut rng(seed));
        let build = pointcloud_dmt(&DistanceMatrix::euclidean(&pts).unwrap(), 1, f64::INFINITY, ComplexKind::Rips).unwrap();
        prop_assert!(build.dmt.tree().validate().is_ok());
        for bar in build.dmt.bars() {
            prop_assert_eq!(bar.birth.height, bar.interval.birth);
        }
        prop_assert_eq!(multiset(&build.dmt.barcode()), multiset(&barcode(&build.pairs, 1, true)));
        if check_disjointness(&build.dmt).is_empty() {
            prop_assert_eq!(multiset(&pushforward(&build.dmt)), multiset(&barcode(&build.pairs, 1, true)));
        }
    }

    #[test]
    fn bottleneck_is_a_pseudometric(a in barcode_strategy(), b in barcode_strategy(), c in barcode_strategy()) {
        let d = |x: &Barcode, y: &Barcode| bottleneck(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn labeled_cost_ignores_label_order(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = (random_tree(&mut r, 4, 0.5), random_tree(&mut r, 4, 0.5));
        let (nf, ng) = (f.finite_nodes(), g.finite_nodes());
        let k = f.leaves().len().max(g.leaves().len()) + r.gen_range(0..3);
        let mut cover = |t: &MergeTree, pool: &[usize]| -> Vec<usize> {
            let mut a = t.leaves();
            while a.len() < k {
                a.push(*pool.choose(&mut r).unwrap());
            }
            a.shuffle(&mut r);
            a
        };
        let af = cover(&f, &nf);
        let ag = cover(&g, &ng);
        let mut perm: Vec<usize> = (0..k).collect();
        perm.shuffle(&mut r);
        let pf: Vec<usize> = perm.iter().map(|&i| af[i]).collect();
        let pg: Vec<usize> = perm.iter().map(|&i| ag[i]).collect();
        let (df, dg) = (random_dmt(&mut r, f.clone(), 3, 0.5), random_dmt(&mut r, g.clone(), 3, 0.5));
        for norm in [Norm::Inf, Norm::L2] {
            let x = labeled_cost(&f, &Labeling::new(&f, af.clone()).unwrap(), &g, &Labeling::new(&g, ag.clone()).unwrap(), norm, None).unwrap();
            let y = labeled_cost(&f, &Labeling::new(&f, pf.clone()).unwrap(), &g, &Labeling::new(&g, pg.clone()).unwrap(), norm, None).unwrap();
            prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }
        let lf = Labeling::new(&f, af).unwrap();
        let lg = Labeling::new(&g, ag).unwrap();
        let plain = labeled_cost(&f, &lf, &g, &lg, Norm::Inf, None).unwrap();
        let decorated = labeled_cost(&f, &lf, &g, &lg, Norm::Inf, Some(Decorations { f: &df, g: &dg })).unwrap();
        let permuted = labeled_cost(
            &f,
            &Labeling::new(&f, pf).unwrap(),
            &g,
            &Labeling::new(&g, pg).unwrap(),
            Norm::Inf,
            Some(Decorations { f: &df, g: &dg }),
        )
        .unwrap();
        prop_assert!(decorated >= plain);
        prop_assert_eq!(decorated, permuted);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn epsilon_matchings_bound_the_decorated_distance(seed in any::<u64>(), eps_steps in 0u32..4) {
        let mut r = rng(seed);
        let step = 0.5;
        let eps = eps_steps as f64 * step;
        let (f, g) = (random_tree(&mut r, 2, step), random_tree(&mut r, 2, step));
        let grid = SamplingGrid::for_trees(&[&f, &g], step).unwrap();
        let df = random_dmt(&mut r, f, 2, step).upsampled(&grid);
        let dg = if seed % 2 == 0 { df.clone() } else { random_dmt(&mut r, g, 2, step).upsampled(&grid) };
        let (tf, tg) = (df.tree(), dg.tree());
        let at = |t: &MergeTree, h: f64| -> Vec<usize> { t.finite_nodes().into_iter().filter(|&u| t.height(u) == h).collect() };
        let mut exact: Option<f64> = None;
        for _ in 0..20 {
            let pick = |r: &mut ChaCha8Rng, from: &MergeTree, to: &MergeTree| -> Option<Vec<(usize, TreePoint)>> {
                from.leaves().into_iter().map(|l| at(to, from.height(l) + eps).choose(r).map(|&u| (l, to.point(u)))).collect()
            };
            let (Some(phi), Some(psi)) = (pick(&mut r, tf, tg), pick(&mut r, tg, tf)) else { continue };
            if epsilon_matching_check(&df, &dg, &phi, &psi, eps, 1e-12).unwrap() {
                let d = *exact.get_or_insert_with(|| {
                    exhaustive_labeled_distance(tf, tg, Norm::Inf, Some(Decorations { f: &df, g: &dg }), &ExhaustiveOptions::default()).unwrap()
                });
                prop_assert!(d <= eps + 1e-9, "exhaustive {} above eps {}", d, eps);
            }
        }
    }

    #[test]
    fn gw_solver_descends_from_the_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, m) = (r.gen_range(1..=8), r.gen_range(1..=8));
        let (a, b) = (random_network(&mut r, n), random_network(&mut r, m));
        let product = Coupling::product(a.mass(), b.mass());
        let fast = gw_distortion(&a, &b, &product, 2).unwrap();
        let slow = gw_distortion_reference(&a, &b, &product, 2).unwrap();
        prop_assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1e-300));
        let out = solve_gw(&a, &b, &Init::Product, &SolverOptions::default()).unwrap();
        for w in out.trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        let (e1, e2) = out.coupling.marginal_errors(a.mass(), b.mass());
        prop_assert!(e1.max(e2) <= 1e-9);
        prop_assert!(out.coupling.matrix().iter().all(|&x| x >= 0.0));
        prop_assert!(gw_distortion(&a, &b, &out.coupling, 2).unwrap() <= fast + 1e-9);
    }

    #[test]
    fn gw_on_small_tree_networks_bounds_the_vertex_minimum(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (f, g) = loop {
            let f = random_tree(&mut r, 2, 0.5);
            let g = random_tree(&mut r, 2, 0.5);
            if f.finite_nodes().len() <= 3 && g.finite_nodes().len() <= 3 {
                break (f, g);
            }
        };
        let (a, b) = (tree_network(&f), tree_network(&g));
        let vertex_min = polytope_vertices(a.mass(), b.mass())
            .into_iter()
            .map(|x| gw_distortion(&a, &b, &Coupling::new(x, a.mass(), b.mass()).unwrap(), 2).unwrap())
            .fold(f64::INFINITY, f64::min);
        let ab = solve_gw(&a, &b, &Init::Product, &SolverOptions::default()).unwrap().objective();
        let ba = solve_gw(&b, &a, &Init::Product, &SolverOptions::default()).unwrap().objective();
        prop_assert!(ab >= vertex_min - 1e-9 && ba >= vertex_min - 1e-9, "{} {} vs {}", ab, ba, vertex_min);
    }

    #[test]
    fn identical_trees_estimate_zero(seed in any::<u64>(), mesh in 0.2f64..1.0) {
        let t = random_tree(&mut rng(seed), 4, 0.5);
        let opts = EstimateOptions { init: InitKind::Identity, ..Default::default() };
        let est = estimate_tree_distance(&t, &t, mesh, Norm::Inf, &opts).unwrap();
        prop_assert_eq!(est.value, 0.0);
        let other = random_tree(&mut rng(seed.wrapping_add(1)), 4, 0.5);
        let est = estimate_tree_distance(&t, &other, mesh, Norm::L2, &EstimateOptions::default()).unwrap();
        prop_assert!(est.value >= 0.0);
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 6, 0.37);
        prop_assert_eq!(&io::tree_from_json(&io::tree_to_json(&t)).unwrap(), &t);
        let d = random_dmt(&mut r, t, 4, 0.37);
        prop_assert_eq!(&io::dmt_from_json(&io::dmt_to_json(&d)).unwrap(), &d);
        let mut b = d.barcode();
        b.bars.extend(b.bars.clone());
        prop_assert_eq!(&io::barcode_from_json(&io::barcode_to_json(&b)).unwrap(), &b);
        let bumped = io::barcode_to_json(&b).replace("\"1.0\"", "\"2.0\"");
        prop_assert!(io::barcode_from_json(&bumped).is_err());
    }
}

#[test]
fn experiments_are_deterministic() {
    use dmt_core::pipeline::{experiment_scalar_classification, ScalarClassificationOptions};
    let opts = ScalarClassificationOptions { seed: 11, samples_per_class: 2, grid_points: 40, ..Default::default() };
    let a = io::report_to_json("r", &experiment_scalar_classification(&opts).unwrap());
    let b = io::report_to_json("r", &experiment_scalar_classification(&opts).unwrap());
    assert_eq!(a, b);
}
