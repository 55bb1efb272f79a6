use crate::error::{Error, Result};
use crate::ingest::sweep::{SweepBuilder, SweepTree};
use crate::tree::MergeTree;

/// A sampled scalar function `t -> f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSeries {
    pub samples: Vec<(f64, f64)>,
}

impl ScalarSeries {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("scalar series is empty"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::input(format!(
                    "sample times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|&(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(Error::input("scalar series contains non-finite values"));
        }
        Ok(ScalarSeries { samples })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().enumerate().map(|(i, &f)| (i as f64, f)).collect())
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

/// Merge tree of the sublevel filtration of the piecewise-linear interpolant.
pub fn scalar_to_merge_tree(series: &ScalarSeries) -> Result<MergeTree> {
    Ok(scalar_sweep(series)?.tree)
}

/// Sweep over the series after collapsing plateaus; `entry` is indexed by
/// original sample index.
pub fn scalar_sweep(series: &ScalarSeries) -> Result<SweepTree> {
    let values = series.values();
    if values.is_empty() {
        return Err(Error::input("scalar series is empty"));
    }
    // collapse runs of equal consecutive values
    let mut collapsed: Vec<(usize, f64)> = Vec::new();
    let mut group_of = Vec::with_capacity(values.len());
    for (i, &f) in values.iter().enumerate() {
        match collapsed.last() {
            Some(&(_, g)) if g == f => {}
            _ => collapsed.push((i, f)),
        }
        group_of.push(collapsed.len() - 1);
    }

    let m = collapsed.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| collapsed[a].1.total_cmp(&collapsed[b].1).then(a.cmp(&b)));

    let mut sweep = SweepBuilder::new(m);
    let mut neighbours = Vec::with_capacity(2);
    for &g in &order {
        neighbours.clear();
        if g > 0 && sweep.is_active(g - 1) {
            neighbours.push(g - 1);
        }
        if g + 1 < m && sweep.is_active(g + 1) {
            neighbours.push(g + 1);
        }
        sweep.add_joining(g, collapsed[g].1, &neighbours);
    }
    let SweepTree { mut tree, entry } = sweep.finish();
    // report origins as original sample indices
    let origin = (0..tree.len())
        .map(|node| tree.origin(node).map(|g| collapsed[g].0))
        .collect();
    tree.set_origin(origin);
    let entry = group_of.iter().map(|&g| entry[g]).collect();
    Ok(SweepTree { tree, entry })
}
