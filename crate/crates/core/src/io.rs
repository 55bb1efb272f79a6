//! Versioned JSON schemas and CSV writers.
//!
//! Heights are JSON numbers, or the strings `"inf"` / `"-inf"`. Every
//! document carries `"format_version": "MAJOR.MINOR"`; readers accept any
//! minor revision of the current major version.

use std::fmt::Write as _;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::barcode::{Barcode, Interval};
use crate::decoration::{DecoratedMergeTree, LiftedBar};
use crate::error::{Error, Result};
use crate::ingest::WeightedGraph;
use crate::transport::Coupling;
use crate::tree::{MergeTree, TreeNode, TreePoint};

pub const FORMAT_VERSION: &str = "1.0";
const MAJOR: u64 = 1;

/// A height that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Height(pub f64);

impl Serialize for Height {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            x if x == f64::INFINITY => s.serialize_str("inf"),
            x if x == f64::NEG_INFINITY => s.serialize_str("-inf"),
            x => s.serialize_f64(x),
        }
    }
}

impl<'de> Deserialize<'de> for Height {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => n.as_f64().map(Height).ok_or_else(|| de::Error::custom("height out of range")),
            Value::String(s) if s == "inf" => Ok(Height(f64::INFINITY)),
            Value::String(s) if s == "-inf" => Ok(Height(f64::NEG_INFINITY)),
            other => Err(de::Error::custom(format!("expected a number or \"inf\", got {other}"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: usize,
    height: Height,
    parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    origin: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeDoc {
    format_version: String,
    kind: String,
    nodes: Vec<NodeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    node: usize,
    height: Height,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BarDoc {
    birth: Height,
    death: Height,
    birth_point: PointDoc,
    death_point: Option<PointDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DmtDoc {
    format_version: String,
    kind: String,
    degree: usize,
    nodes: Vec<NodeDoc>,
    bars: Vec<BarDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BarcodeDoc {
    format_version: String,
    kind: String,
    degree: usize,
    bars: Vec<(Height, Height)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BarcodeSetDoc {
    format_version: String,
    kind: String,
    barcodes: Vec<BarsDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BarsDoc {
    degree: usize,
    bars: Vec<(Height, Height)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphDoc {
    format_version: String,
    kind: String,
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

/// Checks `format_version` and `kind` before the typed parse.
fn header(text: &str, kind: &str) -> Result<Value> {
    let value: Value = serde_json::from_str(text).map_err(|e| schema(format!("malformed JSON: {e}")))?;
    let version = value
        .get("format_version")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("missing format_version"))?;
    let major = version
        .split('.')
        .next()
        .and_then(|m| m.parse::<u64>().ok())
        .ok_or_else(|| schema(format!("unreadable format_version {version:?}")))?;
    if major != MAJOR {
        return Err(schema(format!("unsupported format_version {version} (this reader handles {MAJOR}.x)")));
    }
    match value.get("kind").and_then(Value::as_str) {
        Some(k) if k == kind => Ok(value),
        Some(k) => Err(schema(format!("expected a {kind} document, found {k}"))),
        None => Err(schema("missing kind")),
    }
}

fn typed<T: for<'de> Deserialize<'de>>(value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| schema(e.to_string()))
}

fn to_pretty<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialise");
    s.push('\n');
    s
}

fn node_docs(tree: &MergeTree) -> Vec<NodeDoc> {
    tree.nodes()
        .into_iter()
        .map(|n| NodeDoc { id: n.id, height: Height(n.height), parent: n.parent, origin: tree.origin(n.id) })
        .collect()
}

fn tree_from_docs(nodes: Vec<NodeDoc>) -> Result<MergeTree> {
    let mut origin = vec![None; nodes.len()];
    let mut raw = Vec::with_capacity(nodes.len());
    for n in nodes {
        if let Some(slot) = origin.get_mut(n.id) {
            *slot = n.origin;
        }
        raw.push(TreeNode { id: n.id, height: n.height.0, parent: n.parent });
    }
    let mut tree = MergeTree::new(raw)?;
    tree.set_origin(origin);
    Ok(tree)
}

pub fn tree_to_json(tree: &MergeTree) -> String {
    to_pretty(&TreeDoc { format_version: FORMAT_VERSION.into(), kind: "merge_tree".into(), nodes: node_docs(tree) })
}

pub fn tree_from_json(text: &str) -> Result<MergeTree> {
    let doc: TreeDoc = typed(header(text, "merge_tree")?)?;
    tree_from_docs(doc.nodes)
}

pub fn dmt_to_json(dmt: &DecoratedMergeTree) -> String {
    let point = |p: TreePoint| PointDoc { node: p.node, height: Height(p.height) };
    let bars = dmt
        .bars()
        .iter()
        .map(|b| BarDoc {
            birth: Height(b.interval.birth),
            death: Height(b.interval.death),
            birth_point: point(b.birth),
            death_point: b.death.map(point),
        })
        .collect();
    to_pretty(&DmtDoc {
        format_version: FORMAT_VERSION.into(),
        kind: "decorated_merge_tree".into(),
        degree: dmt.degree(),
        nodes: node_docs(dmt.tree()),
        bars,
        warnings: dmt.warnings().to_vec(),
    })
}

pub fn dmt_from_json(text: &str) -> Result<DecoratedMergeTree> {
    let doc: DmtDoc = typed(header(text, "decorated_merge_tree")?)?;
    let tree = tree_from_docs(doc.nodes)?;
    let point = |p: PointDoc| TreePoint { node: p.node, height: p.height.0 };
    let bars = doc
        .bars
        .into_iter()
        .map(|b| {
            Ok(LiftedBar {
                interval: Interval::new(b.birth.0, b.death.0)?,
                birth: point(b.birth_point),
                death: b.death_point.map(point),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecoratedMergeTree::new(tree, doc.degree, bars)?.with_warnings(doc.warnings))
}

pub fn barcode_to_json(b: &Barcode) -> String {
    to_pretty(&BarcodeDoc {
        format_version: FORMAT_VERSION.into(),
        kind: "barcode".into(),
        degree: b.degree,
        bars: b.bars.iter().map(|i| (Height(i.birth), Height(i.death))).collect(),
    })
}

pub fn barcode_from_json(text: &str) -> Result<Barcode> {
    let doc: BarcodeDoc = typed(header(text, "barcode")?)?;
    let bars = doc.bars.into_iter().map(|(b, d)| Interval::new(b.0, d.0)).collect::<Result<Vec<_>>>()?;
    Ok(Barcode::new(doc.degree, bars))
}

/// Barcodes of several degrees in one document.
pub fn barcodes_to_json(set: &[Barcode]) -> String {
    to_pretty(&BarcodeSetDoc {
        format_version: FORMAT_VERSION.into(),
        kind: "barcodes".into(),
        barcodes: set
            .iter()
            .map(|b| BarsDoc { degree: b.degree, bars: b.bars.iter().map(|i| (Height(i.birth), Height(i.death))).collect() })
            .collect(),
    })
}

/// Reads either a single barcode or a barcode set.
pub fn barcodes_from_json(text: &str) -> Result<Vec<Barcode>> {
    if let Ok(b) = barcode_from_json(text) {
        return Ok(vec![b]);
    }
    let doc: BarcodeSetDoc = typed(header(text, "barcodes")?)?;
    doc.barcodes
        .into_iter()
        .map(|b| {
            let bars = b.bars.into_iter().map(|(x, y)| Interval::new(x.0, y.0)).collect::<Result<Vec<_>>>()?;
            Ok(Barcode::new(b.degree, bars))
        })
        .collect()
}

/// The `kind` field of a document, after the version check.
pub fn document_kind(text: &str) -> Result<String> {
    let value: Value = serde_json::from_str(text).map_err(|e| schema(format!("malformed JSON: {e}")))?;
    let kind = value.get("kind").and_then(Value::as_str).ok_or_else(|| schema("missing kind"))?.to_string();
    header(text, &kind)?;
    Ok(kind)
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    to_pretty(&GraphDoc {
        format_version: FORMAT_VERSION.into(),
        kind: "graph".into(),
        vertex_count: g.vertex_count(),
        edges: g.edges().to_vec(),
        weights: g.weights().to_vec(),
    })
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    let doc: GraphDoc = typed(header(text, "graph")?)?;
    WeightedGraph::new(doc.vertex_count, doc.edges, doc.weights)
}

/// Any serialisable report wrapped with the format version.
pub fn report_to_json<T: Serialize>(kind: &str, report: &T) -> String {
    let mut value = serde_json::to_value(report).expect("reports serialise");
    let mut doc = serde_json::Map::new();
    doc.insert("format_version".into(), FORMAT_VERSION.into());
    doc.insert("kind".into(), kind.into());
    match value.take() {
        Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("value".into(), other);
        }
    }
    to_pretty(&Value::Object(doc))
}

fn fmt_value(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

pub fn write_csv_rows<'a>(header: Option<&str>, rows: impl IntoIterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| fmt_value(x)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn coupling_to_csv(c: &Coupling) -> String {
    let rows: Vec<Vec<f64>> = c.matrix().outer_iter().map(|r| r.to_vec()).collect();
    write_csv_rows(None, rows.iter().map(Vec::as_slice))
}

pub fn trace_to_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,value\n");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_value(*v));
    }
    out
}
