//! Percentile-based selection of salient pixels.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{MstcError, Result};

/// Integer lattice coordinate of a pixel. Orders row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub row: u32,
    pub col: u32,
}

impl Pixel {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }

    /// Squared Euclidean distance, exact in integer arithmetic.
    #[inline]
    pub fn dist2(self, other: Pixel) -> u64 {
        let dr = self.row.abs_diff(other.row) as u64;
        let dc = self.col.abs_diff(other.col) as u64;
        dr * dr + dc * dc
    }

    #[inline]
    pub fn dist(self, other: Pixel) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }
}

impl From<(u32, u32)> for Pixel {
    fn from((row, col): (u32, u32)) -> Self {
        Self { row, col }
    }
}

/// Pixels kept by [`percentile_threshold`], in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SalientPointSet {
    pub points: Vec<Pixel>,
    pub source_height: usize,
    pub source_width: usize,
    /// Smallest retained value.
    pub threshold_value: f64,
    pub percentile: f64,
}

impl SalientPointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Number of pixels retained out of `n_pixels` at `percentile`:
/// `round((100 - p) * n / 100)`, rounding half away from zero, clamped to
/// `[1, n_pixels]`.
pub fn retained_count(n_pixels: usize, percentile: f64) -> usize {
    let keep = ((100.0 - percentile) * n_pixels as f64 / 100.0).round();
    (keep as usize).clamp(1, n_pixels)
}

pub(crate) fn validate_percentile(percentile: f64) -> Result<()> {
    if percentile > 0.0 && percentile < 100.0 {
        Ok(())
    } else {
        Err(MstcError::InvalidPercentile(percentile))
    }
}

/// Keeps the [`retained_count`] largest pixels of a nonnegative map.
///
/// Ties at the cut go to the pixel that comes first in row-major order, so
/// the selection is a pure function of value ranks and is nested across
/// percentiles. Callers apply [`absolute`](crate::attribution::absolute)
/// first; because only ranks matter, any positive rescaling of the map
/// selects the same pixels.
pub fn percentile_threshold(map: &AttributionMap, percentile: f64) -> Result<SalientPointSet> {
    validate_percentile(percentile)?;
    let values = map.values();
    let keep = retained_count(values.len(), percentile);

    // Descending by value, ascending by row-major index on ties.
    let by_rank = |&a: &u32, &b: &u32| -> Ordering {
        values[b as usize]
            .total_cmp(&values[a as usize])
            .then(a.cmp(&b))
    };

    let mut order: Vec<u32> = (0..values.len() as u32).collect();
    if keep < order.len() {
        order.select_nth_unstable_by(keep - 1, by_rank);
        order.truncate(keep);
    }
    let threshold_value = order
        .iter()
        .map(|&i| values[i as usize])
        .fold(f64::INFINITY, f64::min);
    order.sort_unstable();

    let width = map.width() as u32;
    Ok(SalientPointSet {
        points: order
            .into_iter()
            .map(|i| Pixel::new(i / width, i % width))
            .collect(),
        source_height: map.height(),
        source_width: map.width(),
        threshold_value,
        percentile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp4x4() -> AttributionMap {
        AttributionMap::new(4, 4, (1..=16).map(f64::from).collect()).unwrap()
    }

    #[test]
    fn keeps_largest_values() {
        let s = percentile_threshold(&ramp4x4(), 80.0).unwrap();
        // round(0.2 * 16) = 3 pixels: values 14, 15, 16 in the last row.
        assert_eq!(
            s.points,
            vec![Pixel::new(3, 1), Pixel::new(3, 2), Pixel::new(3, 3)]
        );
        assert_eq!(s.threshold_value, 14.0);
    }

    #[test]
    fn constant_map_takes_row_major_prefix() {
        let m = AttributionMap::filled(4, 4, 0.5).unwrap();
        let s = percentile_threshold(&m, 80.0).unwrap();
        assert_eq!(
            s.points,
            vec![Pixel::new(0, 0), Pixel::new(0, 1), Pixel::new(0, 2)]
        );
    }

    #[test]
    fn count_on_224() {
        assert_eq!(retained_count(224 * 224, 80.0), 10035);
        let m = AttributionMap::filled(224, 224, 0.0).unwrap();
        assert_eq!(percentile_threshold(&m, 80.0).unwrap().len(), 10035);
    }

    #[test]
    fn at_least_one_pixel() {
        let m = AttributionMap::filled(2, 2, 1.0).unwrap();
        assert_eq!(percentile_threshold(&m, 99.9).unwrap().len(), 1);
    }

    #[test]
    fn rejects_percentile_outside_open_interval() {
        let m = ramp4x4();
        for p in [0.0, 100.0, -1.0, 150.0, f64::NAN] {
            assert!(matches!(
                percentile_threshold(&m, p),
                Err(MstcError::InvalidPercentile(_))
            ));
        }
    }
}
