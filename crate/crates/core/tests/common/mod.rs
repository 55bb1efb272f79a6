#![allow(dead_code)]

use dmt_core::decoration::LiftedBar;
use dmt_core::ingest::{FilteredComplex, Simplex};
use dmt_core::{Barcode, DecoratedMergeTree, Interval, MergeTree};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random merge tree with at most `max_leaves` leaves and heights on the
/// lattice `step * Z`.
pub fn random_tree(rng: &mut impl Rng, max_leaves: usize, step: f64) -> MergeTree {
    let k = rng.gen_range(1..=max_leaves);
    let mut heights: Vec<f64> = (0..k).map(|_| step * rng.gen_range(0..=4) as f64).collect();
    let mut parents: Vec<Option<usize>> = vec![None; k];
    let mut tops: Vec<usize> = (0..k).collect();
    while tops.len() > 1 {
        tops.shuffle(rng);
        let m = if tops.len() >= 3 && rng.gen_bool(0.25) { 3 } else { 2 };
        let merged: Vec<usize> = tops.drain(..m).collect();
        let hi = merged.iter().map(|&u| heights[u]).fold(f64::NEG_INFINITY, f64::max);
        let id = heights.len();
        heights.push(hi + step * rng.gen_range(1..=3) as f64);
        parents.push(None);
        for u in merged {
            parents[u] = Some(id);
        }
        tops.push(id);
    }
    let root = heights.len();
    parents[tops[0]] = Some(root);
    heights.push(f64::INFINITY);
    parents.push(None);
    MergeTree::from_parents(heights, parents).expect("generated tree is valid")
}

/// Random bars anchored anywhere below the root, some essential.
pub fn random_dmt(rng: &mut impl Rng, tree: MergeTree, max_bars: usize, step: f64) -> DecoratedMergeTree {
    let nodes = tree.finite_nodes();
    let mut bars = Vec::new();
    for _ in 0..rng.gen_range(0..=max_bars) {
        let u = *nodes.choose(rng).unwrap();
        let b = tree.height(u) + step * rng.gen_range(0..=3) as f64;
        let birth = tree.ancestor_at(u, b).unwrap();
        if rng.gen_bool(0.2) {
            bars.push(LiftedBar { interval: Interval::essential(b), birth, death: None });
        } else {
            let d = b + step * rng.gen_range(1..=4) as f64;
            let death = tree.ancestor_at(birth.node, d);
            bars.push(LiftedBar { interval: Interval::new(b, d).unwrap(), birth, death });
        }
    }
    DecoratedMergeTree::new(tree, 1, bars).expect("generated decoration is valid")
}

/// Points in the plane: a jittered circle or a uniform scatter.
pub fn random_cloud(rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = rng.gen_range(5..=14);
    if rng.gen_bool(0.5) {
        let (cx, cy, r) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64 + rng.gen_range(-0.2..0.2);
                vec![cx + r * a.cos() + rng.gen_range(-0.1..0.1), cy + r * a.sin() + rng.gen_range(-0.1..0.1)]
            })
            .collect()
    } else {
        (0..n).map(|_| vec![rng.gen_range(0.0..3.0), rng.gen_range(0.0..3.0)]).collect()
    }
}

/// Random filtered complex of dimension at most 2 (occasionally 3) with at
/// most `cap` simplices and small integer values, so ties are common.
pub fn random_complex(rng: &mut impl Rng, cap: usize) -> FilteredComplex {
    let n = rng.gen_range(1..=6);
    let mut simplices: Vec<Simplex> = (0..n).map(|v| Simplex::new(vec![v], rng.gen_range(0..4) as f64)).collect();
    let value = |s: &[Simplex], verts: &[usize]| -> Option<f64> {
        let mut hi = f64::NEG_INFINITY;
        for skip in 0..verts.len() {
            let face: Vec<usize> = verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            hi = hi.max(s.iter().find(|x| x.vertices == face)?.value);
        }
        Some(hi)
    };
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            candidates.push(vec![a, b]);
        }
    }
    candidates.shuffle(rng);
    for e in candidates.into_iter().take(rng.gen_range(0..=n * (n - 1) / 2)) {
        if simplices.len() >= cap {
            break;
        }
        let v = value(&simplices, &e).unwrap() + rng.gen_range(0..3) as f64;
        simplices.push(Simplex::new(e, v));
    }
    for dim in 2..=3 {
        let mut higher: Vec<Vec<usize>> = Vec::new();
        let verts = |k: usize| -> Vec<Vec<usize>> {
            let mut out = vec![vec![]];
            for _ in 0..k {
                out = out
                    .into_iter()
                    .flat_map(|c: Vec<usize>| {
                        let start = c.last().map_or(0, |&l| l + 1);
                        (start..n).map(move |v| {
                            let mut d = c.clone();
                            d.push(v);
                            d
                        })
                    })
                    .collect();
            }
            out
        };
        for c in verts(dim + 1) {
            if value(&simplices, &c).is_some() && rng.gen_bool(if dim == 2 { 0.6 } else { 0.3 }) {
                higher.push(c);
            }
        }
        for c in higher {
            if simplices.len() >= cap {
                break;
            }
            let v = value(&simplices, &c).unwrap() + rng.gen_range(0..2) as f64;
            simplices.push(Simplex::new(c, v));
        }
    }
    FilteredComplex::new(simplices).expect("generated complex is valid")
}

/// Bars sorted as `(birth, death)` pairs, for multiset comparison.
pub fn multiset(b: &Barcode) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = b.bars.iter().map(|i| (i.birth, i.death)).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    v
}
