use crate::error::{Error, Result};
use crate::ingest::sweep::{SweepBuilder, SweepTree};
use crate::tree::MergeTree;

/// A symmetric, non-negative matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("distance matrix must be square".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, data)
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch("distance matrix must be square".into()));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::input(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = data[i * n + j];
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::input(format!("entry ({i},{j}) = {v} is not a finite non-negative value")));
                }
                if v != data[j * n + i] {
                    return Err(Error::input(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Euclidean distances between the rows of a point cloud.
    pub fn euclidean(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.len();
        if let Some(d) = points.first().map(|p| p.len()) {
            if points.iter().any(|p| p.len() != d) {
                return Err(Error::DimensionMismatch("points differ in dimension".into()));
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn scaled(&self, factor: f64) -> DistanceMatrix {
        DistanceMatrix { n: self.n, data: self.data.iter().map(|v| v * factor).collect() }
    }

    /// Upper-triangle pairs sorted by (distance, i, j).
    pub fn sorted_pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut pairs = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                pairs.push((i, j, self.get(i, j)));
            }
        }
        pairs.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        pairs
    }
}

/// Single-linkage dendrogram: leaves at 0, merges at minimum-spanning-tree
/// edge lengths, an infinite root on top.
pub fn single_linkage_tree(dist: &DistanceMatrix) -> Result<MergeTree> {
    Ok(single_linkage_sweep(dist)?.tree)
}

pub fn single_linkage_sweep(dist: &DistanceMatrix) -> Result<SweepTree> {
    let n = dist.len();
    if n == 0 {
        return Err(Error::input("distance matrix is empty"));
    }
    let mut sweep = SweepBuilder::new(n);
    for i in 0..n {
        sweep.add_leaf(i, 0.0);
    }
    let mut merges = 0;
    for (i, j, d) in dist.sorted_pairs() {
        if merges == n - 1 {
            break;
        }
        if sweep.find(i) != sweep.find(j) {
            sweep.connect(i, j, d, Some(i));
            merges += 1;
        }
    }
    Ok(sweep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points() {
        let d = DistanceMatrix::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let t = single_linkage_tree(&d).unwrap();
        assert_eq!(t.leaves().len(), 2);
        assert_eq!(t.merge_height(0, 1).unwrap(), 2.0);
    }

    #[test]
    fn single_point() {
        let d = DistanceMatrix::new(vec![vec![0.0]]).unwrap();
        let t = single_linkage_tree(&d).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn collinear_points_merge_at_one() {
        let d = DistanceMatrix::new(vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        let t = single_linkage_tree(&d).unwrap();
        assert!(t.validate().is_ok());
        let leaves = t.leaves();
        for &a in &leaves {
            for &b in &leaves {
                if a != b {
                    assert_eq!(t.merge_height(a, b).unwrap(), 1.0);
                }
            }
        }
        assert!(t.heights().iter().all(|&h| h != 2.0));
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DistanceMatrix::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::new(vec![vec![1.0]]).is_err());
    }

    #[test]
    fn coincident_points_share_a_leaf() {
        let d = DistanceMatrix::euclidean(&[vec![0.0], vec![0.0], vec![3.0]]).unwrap();
        let s = single_linkage_sweep(&d).unwrap();
        assert!(s.tree.validate().is_ok());
        assert_eq!(s.tree.leaves().len(), 2);
        assert_eq!(s.entry[0], s.entry[1]);
    }
}
