//! Persistence pairs by column reduction of the boundary matrix over Z/2.

use std::collections::HashMap;

use crate::barcode::{Barcode, Interval};
use crate::error::{Error, Result};
use crate::ingest::FilteredComplex;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub interval: Interval,
    pub degree: usize,
    /// Index of the creating simplex in the complex order.
    pub birth_simplex: usize,
    /// Index of the destroying simplex; `None` for essential classes.
    pub death_simplex: Option<usize>,
}

/// XOR of two sorted index lists.
fn add_columns(target: &mut Vec<usize>, source: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Boundary columns as ascending lists of face indices.
pub fn boundary_columns(complex: &FilteredComplex) -> Result<Vec<Vec<usize>>> {
    let simplices = complex.simplices();
    let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(simplices.len());
    let mut columns = Vec::with_capacity(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        let mut col = Vec::with_capacity(s.vertices.len());
        for facet in s.facets() {
            match index.get(facet.as_slice()) {
                Some(&j) if simplices[j].value <= s.value => col.push(j),
                _ => {
                    return Err(Error::NonMonotone(format!(
                        "face {facet:?} of simplex {:?} is missing, later or higher",
                        s.vertices
                    )))
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
        index.insert(&s.vertices, i);
    }
    Ok(columns)
}

/// Standard left-to-right reduction. Zero-length pairs are kept.
pub fn reduce(complex: &FilteredComplex) -> Result<Vec<PersistencePair>> {
    let simplices = complex.simplices();
    let mut columns = boundary_columns(complex)?;
    let mut pivot_owner: HashMap<usize, usize> = HashMap::new();
    let mut scratch = Vec::new();
    let mut paired = vec![false; simplices.len()];
    let mut pairs = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match pivot_owner.get(&low) {
                Some(&k) => {
                    let (left, right) = columns.split_at_mut(j);
                    add_columns(&mut right[0], &left[k], &mut scratch);
                }
                None => break,
            }
        }
        if let Some(&low) = columns[j].last() {
            pivot_owner.insert(low, j);
            paired[low] = true;
            paired[j] = true;
            pairs.push(PersistencePair {
                interval: Interval { birth: simplices[low].value, death: simplices[j].value },
                degree: simplices[low].dim(),
                birth_simplex: low,
                death_simplex: Some(j),
            });
        }
    }
    for (j, col) in columns.iter().enumerate() {
        if col.is_empty() && !paired[j] {
            pairs.push(PersistencePair {
                interval: Interval::essential(simplices[j].value),
                degree: simplices[j].dim(),
                birth_simplex: j,
                death_simplex: None,
            });
        }
    }
    pairs.sort_by_key(|p| (p.degree, p.birth_simplex));
    Ok(pairs)
}

/// Bars of one degree, optionally without zero-length intervals.
pub fn barcode(pairs: &[PersistencePair], degree: usize, drop_zero_length: bool) -> Barcode {
    Barcode::new(
        degree,
        pairs
            .iter()
            .filter(|p| p.degree == degree && !(drop_zero_length && p.interval.is_empty()))
            .map(|p| p.interval)
            .collect(),
    )
}
