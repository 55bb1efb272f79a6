use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dmt_core::io;
use tempfile::TempDir;

fn dmt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmt")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_circle(dir: &Path, name: &str, rx: f64, n: usize) {
    let mut s = String::from("x,y\n");
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        s.push_str(&format!("{},{}\n", rx * a.cos(), a.sin()));
    }
    fs::write(dir.join(name), s).unwrap();
}

fn write_series(dir: &Path, name: &str) {
    let s: String = (0..60).map(|i| format!("{}\n", (i as f64 / 5.0).sin() + 0.1 * (i as f64).cos())).collect();
    fs::write(dir.join(name), s).unwrap();
}

#[test]
fn scalar_tree_output_parses() {
    let d = TempDir::new().unwrap();
    write_series(d.path(), "s.csv");
    let o = dmt(d.path(), &["scalar-tree", "--input", "s.csv", "--output", "t.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 1);
    let tree = io::tree_from_json(&fs::read_to_string(d.path().join("t.json")).unwrap()).unwrap();
    assert!(tree.validate().is_ok());
    assert!(tree.height(tree.root()).is_infinite());
}

#[test]
fn distance_prints_one_number_and_writes_coupling() {
    let d = TempDir::new().unwrap();
    write_circle(d.path(), "a.csv", 1.0, 16);
    write_circle(d.path(), "b.csv", 1.4, 16);
    for (i, o) in [("a.csv", "a.json"), ("b.csv", "b.json")] {
        let r = dmt(d.path(), &["pointcloud-dmt", "--input", i, "--output", o]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let o = dmt(d.path(), &["distance", "--mode", "dmt", "--mesh", "0.5", "--zeta", "0.5", "--output", "r.json", "a.json", "b.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let value: f64 = stdout(&o).trim().parse().expect("one number");
    assert!(value.is_finite() && value >= 0.0);
    let coupling = fs::read_to_string(d.path().join("r.coupling.csv")).unwrap();
    let mass: f64 = coupling.lines().flat_map(|l| l.split(',')).map(|x| x.parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-9);
    assert!(d.path().join("r.coupling.trace.csv").exists());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["value"].as_f64().unwrap(), value);
}

#[test]
fn distance_without_output_writes_beside_first_input() {
    let d = TempDir::new().unwrap();
    write_series(d.path(), "s.csv");
    assert!(dmt(d.path(), &["scalar-tree", "--input", "s.csv", "--output", "t.json"]).status.success());
    let o = dmt(d.path(), &["distance", "t.json", "t.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
    assert!(d.path().join("t.coupling.csv").exists());
}

#[test]
fn malformed_json_is_a_schema_error_without_outputs() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("bad.json"), "{\"format_version\": \"1.0\", \"kind\": ").unwrap();
    write_series(d.path(), "s.csv");
    assert!(dmt(d.path(), &["scalar-tree", "--input", "s.csv", "--output", "t.json"]).status.success());
    let before: Vec<_> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    let o = dmt(d.path(), &["distance", "--output", "r.json", "bad.json", "t.json"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).expect("json on stderr");
    assert_eq!(err["error"]["code"], 3);
    let after: Vec<_> = fs::read_dir(d.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(before.len(), after.len());
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(dmt(d.path(), &["validate", "missing.json"]).status.code(), Some(5));
    assert_eq!(dmt(d.path(), &["distance", "--zeta", "2", "a", "b"]).status.code(), Some(2));
    assert_eq!(dmt(d.path(), &["bogus"]).status.code(), Some(2));
    fs::write(d.path().join("v2.json"), r#"{"format_version":"2.0","kind":"merge_tree","nodes":[]}"#).unwrap();
    assert_eq!(dmt(d.path(), &["validate", "v2.json"]).status.code(), Some(3));
    // edge endpoint out of range
    fs::write(d.path().join("g.json"), r#"{"format_version":"1.0","kind":"graph","vertex_count":2,"edges":[[0,5]],"weights":[0,1]}"#)
        .unwrap();
    let o = dmt(d.path(), &["graph-dmt", "--input", "g.json", "--output", "o.json"]);
    assert!(matches!(o.status.code(), Some(3) | Some(4)));
    assert!(!d.path().join("o.json").exists());
}

#[test]
fn help_documents_exit_codes() {
    let d = TempDir::new().unwrap();
    let o = dmt(d.path(), &["--help"]);
    let text = stdout(&o);
    for line in ["0  success", "2  usage", "3  schema", "4  numeric", "5  I/O", "DMT_THREADS"] {
        assert!(text.contains(line), "missing {line}");
    }
}

#[test]
fn rerun_is_byte_identical() {
    let d = TempDir::new().unwrap();
    write_circle(d.path(), "a.csv", 1.0, 20);
    let run = |out: &str| {
        let o = dmt(d.path(), &["pointcloud-dmt", "--input", "a.csv", "--output", out, "--barcodes", &format!("{out}.bars")]);
        assert!(o.status.success());
        let r = dmt(d.path(), &["render", "--input", out, "--output", &format!("{out}.svg")]);
        assert!(r.status.success());
    };
    run("x.json");
    run("y.json");
    for ext in ["", ".bars", ".svg"] {
        let a = fs::read(d.path().join(format!("x.json{ext}"))).unwrap();
        let b = fs::read(d.path().join(format!("y.json{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
    }
    let svg = fs::read_to_string(d.path().join("x.json.svg")).unwrap();
    assert_eq!(svg.matches("class=\"bar\"").count(), 1);
}

#[test]
fn image_and_graph_inputs() {
    let d = TempDir::new().unwrap();
    fs::write(d.path().join("im.pgm"), "P2\n4 3\n255\n0 50 100 0\n200 255 200 10\n0 30 60 90\n").unwrap();
    let o = dmt(d.path(), &["image-dmt", "--input", "im.pgm", "--output", "im.json", "--degree", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dmt_doc = io::dmt_from_json(&fs::read_to_string(d.path().join("im.json")).unwrap()).unwrap();
    assert!(dmt_doc.tree().heights().iter().filter(|h| h.is_finite()).all(|&h| (0.0..=1.0).contains(&h)));

    // a 6-cycle keeps its loop when triangles are limited to one hop
    fs::write(
        d.path().join("g.json"),
        r#"{"format_version":"1.0","kind":"graph","vertex_count":6,"edges":[[0,1],[1,2],[2,3],[3,4],[4,5],[5,0]],"weights":[0,1,2,3,2,1]}"#,
    )
    .unwrap();
    let o = dmt(d.path(), &["graph-dmt", "--input", "g.json", "--output", "g_dmt.json", "--hops", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let g = io::dmt_from_json(&fs::read_to_string(d.path().join("g_dmt.json")).unwrap()).unwrap();
    assert_eq!(g.bars().len(), 1);
    assert!(dmt(d.path(), &["validate", "g_dmt.json"]).status.success());
}

#[test]
fn bottleneck_matrix_is_symmetric() {
    let d = TempDir::new().unwrap();
    let names = ["a", "b", "c"];
    for (i, n) in names.iter().enumerate() {
        write_circle(d.path(), &format!("{n}.csv"), 1.0 + 0.3 * i as f64, 12);
        let o = dmt(d.path(), &[
            "pointcloud-dmt", "--input", &format!("{n}.csv"), "--output", &format!("{n}.json"), "--barcodes", &format!("{n}.bars.json"),
        ]);
        assert!(o.status.success());
    }
    let o = dmt(d.path(), &["matrix", "--metric", "max01", "--output", "m.csv", "a.bars.json", "b.bars.json", "c.bars.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<Vec<f64>> = fs::read_to_string(d.path().join("m.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    for i in 0..3 {
        assert_eq!(rows[i][i], 0.0);
        for j in 0..3 {
            assert_eq!(rows[i][j], rows[j][i]);
        }
    }
    assert!(rows[0][2] > 0.0);
}
