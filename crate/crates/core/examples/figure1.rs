use std::time::Instant;

use dmt_core::pipeline::{experiment_figure1, Figure1Options};

fn main() {
    let start = Instant::now();
    let report = experiment_figure1(&Figure1Options::default()).expect("experiment runs");
    println!("{}", serde_json::to_string_pretty(&report).expect("serialisable"));
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
}
