//! Intervals and barcodes.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A half-open interval `[birth, death)`; `death` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub birth: f64,
    pub death: f64,
}

impl Interval {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() {
            return Err(Error::input(format!("interval birth must be finite, got {birth}")));
        }
        if death.is_nan() || death < birth {
            return Err(Error::input(format!("interval [{birth}, {death}) has death before birth")));
        }
        Ok(Interval { birth, death })
    }

    pub fn essential(birth: f64) -> Self {
        Interval { birth, death: f64::INFINITY }
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_empty(&self) -> bool {
        self.birth == self.death
    }

    pub fn contains(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }

    /// Distance to the diagonal, `(death - birth) / 2`.
    pub fn diagonal_cost(&self) -> f64 {
        (self.death - self.birth) / 2.0
    }

    /// `max(|b - b'|, |d - d'|)` with `inf - inf = 0`.
    pub fn sup_distance(&self, other: &Interval) -> f64 {
        let db = (self.birth - other.birth).abs();
        let dd = match (self.is_essential(), other.is_essential()) {
            (true, true) => 0.0,
            (false, false) => (self.death - other.death).abs(),
            _ => f64::INFINITY,
        };
        db.max(dd)
    }

    /// Truncation at height `h`: unchanged below the birth, rebased at `h`
    /// while `h` lies inside the interval, gone once `h` reaches the death.
    pub fn truncate(&self, h: f64) -> Option<Interval> {
        if h <= self.birth {
            Some(*self)
        } else if h < self.death {
            Some(Interval { birth: h, death: self.death })
        } else {
            None
        }
    }

    pub(crate) fn total_cmp(&self, other: &Interval) -> Ordering {
        self.birth
            .total_cmp(&other.birth)
            .then(self.death.total_cmp(&other.death))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_essential() {
            write!(f, "[{}, inf)", self.birth)
        } else {
            write!(f, "[{}, {})", self.birth, self.death)
        }
    }
}

/// A finite multiset of intervals in a fixed homology degree.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Barcode {
    pub degree: usize,
    pub bars: Vec<Interval>,
}

impl Barcode {
    pub fn new(degree: usize, bars: Vec<Interval>) -> Self {
        Barcode { degree, bars }
    }

    pub fn empty(degree: usize) -> Self {
        Barcode { degree, bars: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn essential_count(&self) -> usize {
        self.bars.iter().filter(|b| b.is_essential()).count()
    }

    pub fn truncate(&self, h: f64) -> Barcode {
        truncate_barcode(self, h)
    }

    pub fn without_zero_length(&self) -> Barcode {
        Barcode {
            degree: self.degree,
            bars: self.bars.iter().copied().filter(|b| !b.is_empty()).collect(),
        }
    }

    /// Bars sorted by `(birth, death)`; two barcodes are equal as multisets
    /// iff their sorted bars are equal.
    pub fn sorted_bars(&self) -> Vec<Interval> {
        let mut bars = self.bars.clone();
        bars.sort_by(Interval::total_cmp);
        bars
    }

    pub fn multiset_eq(&self, other: &Barcode) -> bool {
        self.degree == other.degree && self.sorted_bars() == other.sorted_bars()
    }

    /// Number of bars containing `t`.
    pub fn rank_at(&self, t: f64) -> usize {
        self.bars.iter().filter(|b| b.contains(t)).count()
    }
}

pub fn truncate_barcode(barcode: &Barcode, h: f64) -> Barcode {
    Barcode {
        degree: barcode.degree,
        bars: barcode.bars.iter().filter_map(|b| b.truncate(h)).collect(),
    }
}
