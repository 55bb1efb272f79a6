//! DOT and SVG drawings of decorated merge trees.
//!
//! Heights run up the vertical axis. Every lifted bar is drawn as an offset
//! path beside the tree, from its birth point up to its death point. The
//! root edge is cut short and capped with an arrow.
//!
//! SVG palette: tree edges `#333333`, nodes `#1f77b4`, bars cycle through
//! `#d62728`, `#2ca02c`, `#9467bd`, `#ff7f0e`, `#8c564b`.

use std::fmt::Write as _;

use crate::decoration::{simplify, DecoratedMergeTree};
use crate::error::Result;
use crate::tree::{MergeTree, NodeId, TreePoint};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 50.0;
const BAR_COLORS: [&str; 5] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dot,
    Svg,
}

/// Nodes sorted by (height, id).
fn node_order(tree: &MergeTree) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..tree.len()).collect();
    order.sort_by(|&a, &b| tree.height(a).total_cmp(&tree.height(b)).then(a.cmp(&b)));
    order
}

fn sorted_children(tree: &MergeTree, u: NodeId) -> Vec<NodeId> {
    let mut c = tree.children(u).to_vec();
    c.sort_by(|&a, &b| tree.height(a).total_cmp(&tree.height(b)).then(a.cmp(&b)));
    c
}

/// Horizontal slot per node: leaves in depth-first order, parents centred.
fn x_slots(tree: &MergeTree) -> Vec<f64> {
    let mut x = vec![0.0; tree.len()];
    let mut next = 0.0;
    let mut stack = vec![(tree.root(), false)];
    while let Some((u, done)) = stack.pop() {
        let kids = sorted_children(tree, u);
        if kids.is_empty() {
            x[u] = next;
            next += 1.0;
        } else if done {
            x[u] = kids.iter().map(|&c| x[c]).sum::<f64>() / kids.len() as f64;
        } else {
            stack.push((u, true));
            for &c in kids.iter().rev() {
                stack.push((c, false));
            }
        }
    }
    x
}

struct Layout {
    x: Vec<f64>,
    lo: f64,
    /// Height drawn for the root.
    top: f64,
    leaves: f64,
}

impl Layout {
    fn new(tree: &MergeTree, bars_top: f64) -> Self {
        let lo = tree.min_height();
        let hi = tree.max_finite_height().max(bars_top);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let x = x_slots(tree);
        let leaves = x.iter().copied().fold(0.0, f64::max) + 1.0;
        Layout { x, lo, top: hi + 0.15 * span, leaves }
    }

    fn px(&self, slot: f64) -> f64 {
        MARGIN + (slot + 0.5) / self.leaves * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, h: f64) -> f64 {
        let h = h.min(self.top);
        let span = if self.top > self.lo { self.top - self.lo } else { 1.0 };
        HEIGHT - MARGIN - (h - self.lo) / span * (HEIGHT - 2.0 * MARGIN)
    }

    fn height(&self, tree: &MergeTree, u: NodeId) -> f64 {
        if tree.is_root(u) {
            self.top
        } else {
            tree.height(u)
        }
    }
}

/// Heights along the tree from `from` up to `to` (a point above it).
fn path_points(tree: &MergeTree, from: TreePoint, to: Option<TreePoint>, top: f64) -> Vec<(NodeId, f64)> {
    let mut pts = vec![(from.node, from.height)];
    let end = to.map_or(top, |p| p.height);
    let mut u = from.node;
    while let Some(p) = tree.parent(u) {
        let h = if tree.is_root(p) { top } else { tree.height(p) };
        if h >= end || to.is_some_and(|t| t.node == u) {
            break;
        }
        pts.push((p, h));
        u = p;
    }
    let last = to.map_or(u, |p| p.node);
    pts.push((last, end));
    pts
}

/// Applies `simplify` with the given thresholds, then draws the result.
pub fn render(dmt: &DecoratedMergeTree, format: Format, bar_threshold: f64, tree_threshold: f64) -> Result<String> {
    let d = simplify(dmt, bar_threshold, tree_threshold)?;
    Ok(match format {
        Format::Dot => dot(&d),
        Format::Svg => svg(&d),
    })
}

fn fmt_h(h: f64) -> String {
    if h.is_infinite() {
        "inf".into()
    } else {
        format!("{h}")
    }
}

fn dot(d: &DecoratedMergeTree) -> String {
    let tree = d.tree();
    let mut out = String::from("digraph dmt {\n  rankdir=BT;\n  node [shape=point];\n");
    for u in node_order(tree) {
        let _ = writeln!(out, "  n{u} [height_value=\"{}\", label=\"{}\"];", fmt_h(tree.height(u)), fmt_h(tree.height(u)));
    }
    for u in node_order(tree) {
        if let Some(p) = tree.parent(u) {
            let style = if tree.is_root(p) { " [arrowhead=normal, style=dashed]" } else { " [arrowhead=none]" };
            let _ = writeln!(out, "  n{u} -> n{p}{style};");
        }
    }
    for (i, bar) in d.bars().iter().enumerate() {
        let death = bar.death.map_or(tree.root(), |p| p.node);
        let _ = writeln!(
            out,
            "  b{i}_birth [shape=circle, width=0.05, height_value=\"{}\", anchor=n{}];\n  b{i}_death [shape=circle, width=0.05, height_value=\"{}\", anchor=n{death}];\n  b{i}_birth -> b{i}_death [class=bar, color=\"{}\", arrowhead=none];",
            fmt_h(bar.interval.birth),
            bar.birth.node,
            fmt_h(bar.interval.death),
            BAR_COLORS[i % BAR_COLORS.len()],
        );
    }
    out.push_str("}\n");
    out
}

fn svg(d: &DecoratedMergeTree) -> String {
    let tree = d.tree();
    let bars_top = d
        .bars()
        .iter()
        .map(|b| if b.interval.is_essential() { b.interval.birth } else { b.interval.death })
        .fold(f64::NEG_INFINITY, f64::max);
    let lay = Layout::new(tree, bars_top);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        out,
        "<defs><marker id=\"arrow\" markerWidth=\"8\" markerHeight=\"8\" refX=\"4\" refY=\"4\" orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"#333333\"/></marker></defs>"
    );
    // height axis
    let _ = writeln!(
        out,
        "<line class=\"axis\" x1=\"{m}\" y1=\"{:.2}\" x2=\"{m}\" y2=\"{:.2}\" stroke=\"#999999\"/>",
        lay.py(lay.lo),
        lay.py(lay.top),
        m = MARGIN / 2.0
    );
    for h in [lay.lo, tree.max_finite_height()] {
        let _ = writeln!(
            out,
            "<text class=\"tick\" x=\"2\" y=\"{:.2}\" font-size=\"10\">{}</text>",
            lay.py(h),
            fmt_h(h)
        );
    }
    let order = node_order(tree);
    for &u in &order {
        let Some(p) = tree.parent(u) else { continue };
        let (x0, y0) = (lay.px(lay.x[u]), lay.py(tree.height(u)));
        let (x1, y1) = (lay.px(lay.x[p]), lay.py(lay.height(tree, p)));
        let marker = if tree.is_root(p) { " marker-end=\"url(#arrow)\"" } else { "" };
        let _ = writeln!(
            out,
            "<polyline class=\"edge\" points=\"{x0:.2},{y0:.2} {x0:.2},{y1:.2} {x1:.2},{y1:.2}\" fill=\"none\" stroke=\"#333333\"{marker}/>"
        );
    }
    for &u in &order {
        if tree.is_root(u) {
            continue;
        }
        let _ = writeln!(
            out,
            "<circle class=\"node\" data-id=\"{u}\" data-height=\"{}\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#1f77b4\"/>",
            fmt_h(tree.height(u)),
            lay.px(lay.x[u]),
            lay.py(tree.height(u))
        );
    }
    let step = 0.12;
    for (i, bar) in d.bars().iter().enumerate() {
        let offset = step * (1 + i % 3) as f64;
        let pts = path_points(tree, bar.birth, bar.death, lay.top);
        let coords: Vec<String> = pts
            .iter()
            .map(|&(u, h)| format!("{:.2},{:.2}", lay.px(lay.x[u] + offset), lay.py(h)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline class=\"bar\" data-birth=\"{}\" data-death=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>",
            fmt_h(bar.interval.birth),
            fmt_h(bar.interval.death),
            coords.join(" "),
            BAR_COLORS[i % BAR_COLORS.len()]
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcode::Interval;
    use crate::decoration::LiftedBar;

    const INF: f64 = f64::INFINITY;

    fn cherry() -> MergeTree {
        MergeTree::from_parents(vec![0.0, 1.0, 2.0, INF], vec![Some(2), Some(2), Some(3), None]).unwrap()
    }

    #[test]
    fn plain_tree_has_no_bars() {
        let d = DecoratedMergeTree::undecorated(cherry(), 1);
        let s = render(&d, Format::Svg, 0.0, f64::NEG_INFINITY).unwrap();
        assert_eq!(s.matches("class=\"edge\"").count(), 3);
        assert_eq!(s.matches("class=\"bar\"").count(), 0);
        assert_eq!(s.matches("marker-end").count(), 1);
    }

    #[test]
    fn one_bar_one_offset_edge() {
        let bar = LiftedBar {
            interval: Interval::new(0.5, 3.0).unwrap(),
            birth: TreePoint { node: 0, height: 0.5 },
            death: Some(TreePoint { node: 2, height: 3.0 }),
        };
        let d = DecoratedMergeTree::new(cherry(), 1, vec![bar]).unwrap();
        let s = render(&d, Format::Svg, 0.0, f64::NEG_INFINITY).unwrap();
        assert_eq!(s.matches("class=\"bar\"").count(), 1);
        assert!(s.contains("data-birth=\"0.5\" data-death=\"3\""));
        let dot = render(&d, Format::Dot, 0.0, f64::NEG_INFINITY).unwrap();
        assert_eq!(dot.matches("class=bar").count(), 1);
        assert_eq!(render(&d, Format::Svg, 0.0, f64::NEG_INFINITY).unwrap(), s);
    }

    #[test]
    fn bar_path_endpoints() {
        let t = cherry();
        let pts = path_points(&t, TreePoint { node: 0, height: 0.5 }, Some(TreePoint { node: 2, height: 3.0 }), 5.0);
        assert_eq!(pts.first().unwrap().1, 0.5);
        assert_eq!(pts.last().unwrap().1, 3.0);
        assert_eq!(pts, vec![(0, 0.5), (2, 2.0), (2, 3.0)]);
    }
}
