use crate::error::{Error, Result};
use crate::ingest::scalar::ScalarSeries;

/// Delay embedding `t -> (f(t), f(t + tau), ..., f(t + d tau))` read at exact
/// sample offsets of a uniformly spaced series.
pub fn sliding_window(series: &ScalarSeries, d: usize, tau: f64) -> Result<Vec<Vec<f64>>> {
    let s = &series.samples;
    let values = series.values();
    if d == 0 {
        return Ok(values.into_iter().map(|v| vec![v]).collect());
    }
    if s.len() < 2 {
        return Err(Error::input("sliding window needs at least two samples"));
    }
    let spacing = s[1].0 - s[0].0;
    let span = s[s.len() - 1].0 - s[0].0;
    let tol = 1e-9 * span;
    for w in s.windows(2) {
        if ((w[1].0 - w[0].0) - spacing).abs() > tol {
            return Err(Error::input("series is not uniformly spaced"));
        }
    }
    if !(tau > 0.0) {
        return Err(Error::input(format!("tau must be positive, got {tau}")));
    }
    let ratio = tau / spacing;
    let step = ratio.round();
    if step < 1.0 || (ratio - step).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::input(format!(
            "tau = {tau} is not an integer multiple of the sample spacing {spacing}"
        )));
    }
    let step = step as usize;
    let reach = d * step;
    if reach >= s.len() {
        return Err(Error::input(format!("d * tau = {} exceeds the time span {span}", d as f64 * tau)));
    }
    Ok((0..s.len() - reach)
        .map(|start| (0..=d).map(|j| values[start + j * step]).collect())
        .collect())
}

/// Indices (ascending) of the `ceil(keep_fraction * n)` points with the
/// smallest distance to their `k`-th nearest neighbour; ties by index.
pub fn density_subsample(points: &[Vec<f64>], k: usize, keep_fraction: f64) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k >= n {
        return Err(Error::input(format!("k = {k} must lie in 1..{n}")));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::input(format!("keep_fraction {keep_fraction} outside (0, 1]")));
    }
    let dist = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let radius: Vec<f64> = (0..n)
        .map(|i| {
            let mut ds: Vec<f64> =
                (0..n).filter(|&j| j != i).map(|j| dist(&points[i], &points[j])).collect();
            ds.select_nth_unstable_by(k - 1, f64::total_cmp);
            ds[k - 1]
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radius[a].total_cmp(&radius[b]).then(a.cmp(&b)));
    let keep = ((keep_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut kept = order[..keep].to_vec();
    kept.sort_unstable();
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(values: &[f64]) -> ScalarSeries {
        ScalarSeries::from_values(values).unwrap()
    }

    #[test]
    fn read_off_windows() {
        let pts = sliding_window(&series(&[1.0, 2.0, 3.0, 4.0]), 1, 1.0).unwrap();
        assert_eq!(pts, vec![vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);
        let pts = sliding_window(&series(&[1.0, 2.0, 3.0, 4.0]), 0, 1.0).unwrap();
        assert_eq!(pts, vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let pts = sliding_window(&series(&[1.0, 2.0, 3.0, 4.0]), 3, 1.0).unwrap();
        assert_eq!(pts, vec![vec![1.0, 2.0, 3.0, 4.0]]);
    }

    #[test]
    fn tau_must_be_a_multiple_of_spacing() {
        assert!(sliding_window(&series(&[1.0, 2.0, 3.0, 4.0]), 1, 1.5).is_err());
        assert!(sliding_window(&series(&[1.0, 2.0, 3.0, 4.0]), 2, 2.0).is_err());
        let pts = sliding_window(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), 2, 2.0).unwrap();
        assert_eq!(pts, vec![vec![1.0, 3.0, 5.0]]);
    }

    #[test]
    fn outlier_is_dropped() {
        let mut pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 1e-3, 0.0]).collect();
        pts.push(vec![100.0, 100.0]);
        let kept = density_subsample(&pts, 2, 0.9).unwrap();
        assert_eq!(kept, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn ties_broken_by_index() {
        let pts = vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]];
        assert_eq!(density_subsample(&pts, 1, 0.5).unwrap(), vec![0, 1]);
        assert_eq!(density_subsample(&pts, 1, 1.0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(density_subsample(&pts, 1, 0.6).unwrap().len(), 3);
    }
}
