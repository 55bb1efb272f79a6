use std::time::Instant;

use dmt_core::pipeline::{experiment_scalar_classification, ScalarClassificationOptions};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let start = Instant::now();
    let report = experiment_scalar_classification(&ScalarClassificationOptions { seed, ..Default::default() })
        .expect("experiment runs");
    for r in &report.results {
        println!("{}: accuracy {:.4}", r.norm, r.accuracy);
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
}
