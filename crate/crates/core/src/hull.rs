//! Convex hull of lattice points (Andrew's monotone chain) and its area.
//!
//! Orientation is taken in the `(row, col)` plane with `row` as the first
//! axis; all predicates are evaluated exactly in `i64`.

use serde::{Deserialize, Serialize};

use crate::threshold::Pixel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHull {
    /// Counter-clockwise ring without repeated closing vertex. For a
    /// degenerate hull this holds the distinct extreme points (at most two).
    pub vertices: Vec<Pixel>,
    pub area: f64,
    /// Fewer than three points, or all points collinear.
    pub degenerate: bool,
}

#[inline]
pub(crate) fn cross(o: Pixel, a: Pixel, b: Pixel) -> i64 {
    let (or, oc) = (o.row as i64, o.col as i64);
    (a.row as i64 - or) * (b.col as i64 - oc) - (a.col as i64 - oc) * (b.row as i64 - or)
}

/// Twice the signed shoelace area of a closed ring.
pub fn twice_signed_area(ring: &[Pixel]) -> i64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            a.row as i64 * b.col as i64 - b.row as i64 * a.col as i64
        })
        .sum()
}

pub fn convex_hull(points: &[Pixel]) -> ConvexHull {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();

    if pts.len() < 3 {
        return ConvexHull {
            vertices: pts,
            area: 0.0,
            degenerate: true,
        };
    }

    let mut lower: Vec<Pixel> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Pixel> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() < 3 {
        // All points collinear: the chains collapse to the two endpoints.
        return ConvexHull {
            vertices: lower,
            area: 0.0,
            degenerate: true,
        };
    }
    let area = twice_signed_area(&lower) as f64 / 2.0;
    ConvexHull {
        vertices: lower,
        area,
        degenerate: false,
    }
}
