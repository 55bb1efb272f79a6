use std::path::Path;

use anyhow::{bail, Context, Result};
use dmt_core::decoration::check_disjointness;
use dmt_core::ingest::{
    degree_weights, density_subsample, image_to_grid_graph, scalar_to_merge_tree, sliding_window, Connectivity,
    DistanceMatrix,
};
use dmt_core::io;
use dmt_core::metrics::bottleneck;
use dmt_core::persistence::barcode;
use dmt_core::pipeline::{
    estimate_dmt_distance, estimate_tree_distance, experiment_figure1, experiment_scalar_classification,
    graph_dmt, pairwise_matrix, pointcloud_dmt, ComplexKind, DmtBuild, EstimateOptions, Figure1Options, InitKind,
    InterleavingEstimate, Item, PairMetric, PairwiseOptions, ScalarClassificationOptions,
};
use dmt_core::render::Format;
use dmt_core::transport::SolverOptions;
use dmt_core::{Barcode, DecoratedMergeTree, MergeTree, Norm};
use serde_json::json;

use crate::input::{read_image, read_rows, read_series, read_text};
use crate::output::{beside, usage, Outputs, Schema};
use crate::{
    ComplexArg, DecorationArgs, DistanceMode, ExperimentKind, MatrixMetric, NormArg, RenderFormat, SolverArgs,
};

pub struct WindowArgs {
    pub dim: usize,
    pub tau: f64,
    pub k: usize,
    pub keep_fraction: f64,
    pub max_radius: f64,
    pub complex: ComplexArg,
}

pub struct TransportArgs {
    pub mesh: f64,
    pub zeta: f64,
    pub norm: NormArg,
    pub identity_init: bool,
    pub solver: SolverArgs,
}

pub struct ExperimentArgs {
    pub seed: u64,
    pub mesh: Option<f64>,
    pub samples: usize,
    pub grid_points: usize,
    pub radius: f64,
    pub noise: f64,
    pub solver: SolverArgs,
}

fn norm(n: NormArg) -> Norm {
    match n {
        NormArg::Inf => Norm::Inf,
        NormArg::L2 => Norm::L2,
    }
}

fn norm_name(n: Norm) -> &'static str {
    match n {
        Norm::Inf => "inf",
        Norm::L2 => "l2",
    }
}

fn complex_kind(c: ComplexArg) -> ComplexKind {
    match c {
        ComplexArg::Rips => ComplexKind::Rips,
        ComplexArg::Cech => ComplexKind::Cech,
    }
}

fn solver(s: &SolverArgs) -> SolverOptions {
    SolverOptions { max_iters: s.max_iters as usize, tol: s.tol }
}

fn estimate_options(t: &TransportArgs) -> EstimateOptions {
    EstimateOptions {
        solver: solver(&t.solver),
        init: if t.identity_init { InitKind::Identity } else { InitKind::Product },
    }
}

pub fn scalar_tree(input: &Path, output: &Path) -> Result<String> {
    let series = read_series(input)?;
    let tree = scalar_to_merge_tree(&series)?;
    let mut out = Outputs::default();
    out.add(output, io::tree_to_json(&tree));
    out.commit()?;
    Ok(format!("merge tree with {} nodes and {} leaves -> {}", tree.len(), tree.leaves().len(), output.display()))
}

/// Writes the DMT and, when asked, the barcodes of degrees up to its degree.
fn write_build(build: &DmtBuild, output: &Path, decoration: &DecorationArgs) -> Result<String> {
    let mut out = Outputs::default();
    out.add(output, io::dmt_to_json(&build.dmt));
    if let Some(path) = &decoration.barcodes {
        let set: Vec<Barcode> = (0..=decoration.degree).map(|d| barcode(&build.pairs, d, true)).collect();
        out.add(path, io::barcodes_to_json(&set));
    }
    out.commit()?;
    let d = &build.dmt;
    Ok(format!(
        "decorated merge tree with {} nodes, {} degree-{} bars, {} warnings -> {}",
        d.tree().len(),
        d.bars().len(),
        d.degree(),
        d.warnings().len(),
        output.display()
    ))
}

fn check_degree(degree: usize) -> Result<()> {
    if degree > 1 {
        bail!(usage(format!("--degree must be 0 or 1, got {degree}")));
    }
    Ok(())
}

pub fn pointcloud(input: &Path, output: &Path, decoration: &DecorationArgs, max_radius: f64, complex: ComplexArg) -> Result<String> {
    check_degree(decoration.degree)?;
    let points = read_rows(input)?;
    let dist = DistanceMatrix::euclidean(&points)?;
    let build = pointcloud_dmt(&dist, decoration.degree, max_radius, complex_kind(complex))?;
    write_build(&build, output, decoration)
}

pub fn graph(input: &Path, output: &Path, decoration: &DecorationArgs, hops: usize, use_degrees: bool) -> Result<String> {
    check_degree(decoration.degree)?;
    let mut g = io::graph_from_json(&read_text(input)?)?;
    if use_degrees {
        g = g.with_weights(degree_weights(&g))?;
    }
    let build = graph_dmt(&g, decoration.degree, Some(hops))?;
    write_build(&build, output, decoration)
}

pub fn image(input: &Path, output: &Path, decoration: &DecorationArgs, connectivity: u8, hops: usize) -> Result<String> {
    check_degree(decoration.degree)?;
    let pixels = read_image(input)?;
    let conn = if connectivity == 8 { Connectivity::Eight } else { Connectivity::Four };
    let g = image_to_grid_graph(&pixels, conn)?;
    let build = graph_dmt(&g, decoration.degree, Some(hops))?;
    write_build(&build, output, decoration)
}

pub fn sliding(input: &Path, output: &Path, decoration: &DecorationArgs, w: &WindowArgs) -> Result<String> {
    check_degree(decoration.degree)?;
    let series = read_series(input)?;
    let mut points = sliding_window(&series, w.dim - 1, w.tau)?;
    if w.keep_fraction < 1.0 {
        let keep = density_subsample(&points, w.k, w.keep_fraction)?;
        points = keep.into_iter().map(|i| points[i].clone()).collect();
    }
    let dist = DistanceMatrix::euclidean(&points)?;
    let build = pointcloud_dmt(&dist, decoration.degree, w.max_radius, complex_kind(w.complex))?;
    write_build(&build, output, decoration)
}

/// A parsed input document.
enum Doc {
    Tree(MergeTree),
    Dmt(DecoratedMergeTree),
    Barcodes(Vec<Barcode>),
}

fn load(path: &Path) -> Result<Doc> {
    let text = read_text(path)?;
    let kind = io::document_kind(&text).with_context(|| path.display().to_string())?;
    let doc = match kind.as_str() {
        "merge_tree" => Doc::Tree(io::tree_from_json(&text)?),
        "decorated_merge_tree" => Doc::Dmt(io::dmt_from_json(&text)?),
        "barcode" | "barcodes" => Doc::Barcodes(io::barcodes_from_json(&text)?),
        other => bail!(Schema(format!("{}: documents of kind {other:?} cannot be compared", path.display()))),
    };
    Ok(doc)
}

fn need_tree(doc: Doc, path: &Path) -> Result<MergeTree> {
    match doc {
        Doc::Tree(t) => Ok(t),
        Doc::Dmt(d) => Ok(d.tree().clone()),
        Doc::Barcodes(_) => bail!(Schema(format!("{}: expected a merge tree", path.display()))),
    }
}

fn need_dmt(doc: Doc, path: &Path) -> Result<DecoratedMergeTree> {
    match doc {
        Doc::Dmt(d) => Ok(d),
        _ => bail!(Schema(format!("{}: expected a decorated merge tree", path.display()))),
    }
}

fn need_barcodes(doc: Doc, path: &Path) -> Result<Vec<Barcode>> {
    match doc {
        Doc::Barcodes(b) => Ok(b),
        Doc::Dmt(d) => Ok(vec![d.barcode()]),
        Doc::Tree(_) => bail!(Schema(format!("{}: expected barcodes", path.display()))),
    }
}

/// Largest bottleneck distance over the degrees present in both sets.
fn bottleneck_sets(a: &[Barcode], b: &[Barcode]) -> Result<f64> {
    let mut best: Option<f64> = None;
    for x in a {
        if let Some(y) = b.iter().find(|y| y.degree == x.degree) {
            let d = bottleneck(x, y)?;
            best = Some(best.map_or(d, |m: f64| m.max(d)));
        }
    }
    best.ok_or_else(|| anyhow::Error::new(Schema("the inputs share no barcode degree".into())))
}

fn estimate_report(est: &InterleavingEstimate, mode: &str, zeta: f64) -> serde_json::Value {
    json!({
        "mode": mode,
        "value": est.value,
        "norm": norm_name(est.norm),
        "mesh": est.mesh,
        "zeta": zeta,
        "iterations": est.trace.len().saturating_sub(1),
        "objective": est.trace.last(),
        "capped_infinite_costs": est.capped_costs,
        "labelings": [est.labelings.0.assignment(), est.labelings.1.assignment()],
        "orders": [&est.orders.0, &est.orders.1],
    })
}

pub fn distance(
    mode: DistanceMode,
    t: &TransportArgs,
    output: Option<&Path>,
    coupling: Option<&Path>,
    a: &Path,
    b: &Path,
) -> Result<String> {
    let (da, db) = (load(a)?, load(b)?);
    let opts = estimate_options(t);
    let mut out = Outputs::default();
    let (value, report) = match mode {
        DistanceMode::Bottleneck => {
            let v = bottleneck_sets(&need_barcodes(da, a)?, &need_barcodes(db, b)?)?;
            (v, json!({ "mode": "bottleneck", "value": v }))
        }
        DistanceMode::Tree | DistanceMode::Dmt => {
            let (est, name) = if mode == DistanceMode::Tree {
                (estimate_tree_distance(&need_tree(da, a)?, &need_tree(db, b)?, t.mesh, norm(t.norm), &opts)?, "tree")
            } else {
                (estimate_dmt_distance(&need_dmt(da, a)?, &need_dmt(db, b)?, t.mesh, t.zeta, &opts)?, "dmt")
            };
            let coupling_path = match (coupling, output) {
                (Some(c), _) => c.to_path_buf(),
                (None, Some(o)) => beside(o, ".coupling.csv"),
                (None, None) => beside(a, ".coupling.csv"),
            };
            out.add(beside(&coupling_path, ".trace.csv"), io::trace_to_csv(&est.trace));
            out.add(coupling_path, io::coupling_to_csv(&est.coupling));
            (est.value, estimate_report(&est, name, t.zeta))
        }
    };
    if let Some(o) = output {
        out.add(o, io::report_to_json("distance_report", &report));
    }
    out.commit()?;
    Ok(format!("{value}"))
}

pub fn matrix(metric: MatrixMetric, t: &TransportArgs, output: &Path, inputs: &[std::path::PathBuf]) -> Result<String> {
    let items = inputs
        .iter()
        .map(|p| {
            Ok(match (metric, load(p)?) {
                (MatrixMetric::Tree, d) => Item::Tree(need_tree(d, p)?),
                (MatrixMetric::Dmt, d) => Item::Dmt(need_dmt(d, p)?),
                (_, d) => Item::Barcodes(need_barcodes(d, p)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pm = match metric {
        MatrixMetric::Tree => PairMetric::Tree(norm(t.norm)),
        MatrixMetric::Dmt => PairMetric::Dmt { zeta: t.zeta },
        MatrixMetric::Bottleneck0 => PairMetric::Bottleneck0,
        MatrixMetric::Bottleneck1 => PairMetric::Bottleneck1,
        MatrixMetric::Max01 => PairMetric::Max01,
    };
    let opts = PairwiseOptions { mesh: t.mesh, estimate: estimate_options(t) };
    let m = pairwise_matrix(&items, pm, &opts)?;
    let rows: Vec<Vec<f64>> = m.outer_iter().map(|r| r.to_vec()).collect();
    let mut out = Outputs::default();
    out.add(output, io::write_csv_rows(None, rows.iter().map(Vec::as_slice)));
    out.commit()?;
    Ok(format!("{n}x{n} distance matrix -> {}", output.display(), n = items.len()))
}

pub fn experiment(kind: ExperimentKind, e: &ExperimentArgs, output: &Path, matrix_dir: Option<&Path>) -> Result<String> {
    let mut out = Outputs::default();
    let summary = match kind {
        ExperimentKind::Scalar => {
            let opts = ScalarClassificationOptions {
                seed: e.seed,
                samples_per_class: e.samples,
                grid_points: e.grid_points,
                mesh: e.mesh.unwrap_or(0.5),
                solver: solver(&e.solver),
                ..Default::default()
            };
            let report = experiment_scalar_classification(&opts)?;
            if let Some(dir) = matrix_dir {
                for r in &report.results {
                    let csv = io::write_csv_rows(None, r.distances.iter().map(Vec::as_slice));
                    out.add(dir.join(format!("distances_{}.csv", r.norm)), csv);
                }
            }
            out.add(output, io::report_to_json("scalar_classification_report", &report));
            let acc: Vec<String> = report.results.iter().map(|r| format!("{}={:.4}", r.norm, r.accuracy)).collect();
            format!("loo-nn accuracy {}", acc.join(" "))
        }
        ExperimentKind::Figure1 => {
            if matrix_dir.is_some() {
                bail!(usage("--matrix-dir only applies to the scalar experiment"));
            }
            let opts = Figure1Options {
                radius: e.radius,
                separation: 4.0 * e.radius,
                noise: e.noise,
                seed: e.seed,
                max_radius: 1.5 * e.radius,
                mesh: e.mesh.unwrap_or(0.25 * e.radius),
                simplify: Some((0.0, 0.1 * e.radius)),
                solver: solver(&e.solver),
                ..Default::default()
            };
            let report = experiment_figure1(&opts)?;
            out.add(output, io::report_to_json("figure1_report", &report));
            format!(
                "bottleneck0={:.4} bottleneck1={:.4} dmt={:.4}",
                report.bottleneck0, report.bottleneck1, report.dmt_estimate
            )
        }
    };
    out.commit()?;
    Ok(summary)
}

pub fn render(input: &Path, output: &Path, format: RenderFormat, bar_threshold: f64, tree_threshold: f64) -> Result<String> {
    let dmt = match load(input)? {
        Doc::Dmt(d) => d,
        Doc::Tree(t) => DecoratedMergeTree::undecorated(t, 0),
        Doc::Barcodes(_) => bail!(Schema(format!("{}: expected a tree", input.display()))),
    };
    let fmt = match format {
        RenderFormat::Dot => Format::Dot,
        RenderFormat::Svg => Format::Svg,
    };
    let text = dmt_core::render::render(&dmt, fmt, bar_threshold, tree_threshold)?;
    let mut out = Outputs::default();
    out.add(output, text);
    out.commit()?;
    Ok(format!("rendered {} nodes -> {}", dmt.tree().len(), output.display()))
}

pub fn validate(input: &Path) -> Result<String> {
    let text = read_text(input)?;
    let kind = io::document_kind(&text)?;
    let summary = match kind.as_str() {
        "merge_tree" => {
            let t = io::tree_from_json(&text)?;
            format!("valid merge_tree: {} nodes, {} leaves", t.len(), t.leaves().len())
        }
        "decorated_merge_tree" => {
            let d = io::dmt_from_json(&text)?;
            let violations = check_disjointness(&d).len();
            format!(
                "valid decorated_merge_tree: {} nodes, {} bars, {} disjointness violations",
                d.tree().len(),
                d.bars().len(),
                violations
            )
        }
        "barcode" | "barcodes" => {
            let set = io::barcodes_from_json(&text)?;
            format!("valid {kind}: {} bars", set.iter().map(|b| b.bars.len()).sum::<usize>())
        }
        "graph" => {
            let g = io::graph_from_json(&text)?;
            format!("valid graph: {} vertices, {} edges", g.vertex_count(), g.edges().len())
        }
        k if k.ends_with("_report") => format!("valid {k}"),
        other => bail!(Schema(format!("unknown document kind {other:?}"))),
    };
    Ok(summary)
}
