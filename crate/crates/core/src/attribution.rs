//! Dense single-channel attribution heatmaps and the elementwise transforms
//! applied before graph construction.

use crate::error::{MstcError, Result};

/// A dense `height x width` grid of finite attribution scores, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl AttributionMap {
    /// Builds a map from row-major values, rejecting empty grids and
    /// non-finite entries.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(MstcError::InvalidDimensions { height, width });
        }
        if values.len() != height * width {
            return Err(MstcError::Format(format!(
                "expected {} values for a {height}x{width} grid, got {}",
                height * width,
                values.len()
            )));
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            return Err(MstcError::NonFiniteValue {
                row: idx / width,
                col: idx % width,
            });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(height * width);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != width {
                return Err(MstcError::Format(format!(
                    "row {i} has {} values, expected {width}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(height, width, values)
    }

    /// Map of the given shape filled with `value`.
    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.width)
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Multiplies every value by `factor`. Used by invariance tests and
    /// callers that rescale maps; `factor` must be finite.
    pub fn scaled(&self, factor: f64) -> Self {
        assert!(factor.is_finite(), "scale factor must be finite");
        self.map_values(|v| v * factor)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Divides by the largest absolute value so every entry lands in `[-1, 1]`.
/// An all-zero map is returned unchanged.
pub fn normalize_maxabs(map: &AttributionMap) -> AttributionMap {
    let m = map.max_abs();
    if m == 0.0 {
        return map.clone();
    }
    map.map_values(|v| v / m)
}

/// Elementwise absolute value.
pub fn absolute(map: &AttributionMap) -> AttributionMap {
    map.map_values(f64::abs)
}

/// Bilinear resampling with half-pixel centers and edge clamping.
///
/// Output pixel `(y, x)` samples the source at
/// `((y + 0.5) * h_in / h_out - 0.5, (x + 0.5) * w_in / w_out - 0.5)`, with the
/// source coordinate clamped to `[0, n - 1]` on each axis. Every output value
/// is a convex combination of input values.
pub fn bilinear_resize(
    map: &AttributionMap,
    new_height: usize,
    new_width: usize,
) -> Result<AttributionMap> {
    if new_height == 0 || new_width == 0 {
        return Err(MstcError::InvalidDimensions {
            height: new_height,
            width: new_width,
        });
    }
    if new_height == map.height && new_width == map.width {
        return Ok(map.clone());
    }

    let rows = axis_taps(map.height, new_height);
    let cols = axis_taps(map.width, new_width);
    let w = map.width;
    let src = &map.values;

    let mut values = Vec::with_capacity(new_height * new_width);
    for &(y0, y1, fy) in &rows {
        let top = &src[y0 * w..(y0 + 1) * w];
        let bottom = &src[y1 * w..(y1 + 1) * w];
        for &(x0, x1, fx) in &cols {
            let t = lerp(top[x0], top[x1], fx);
            let b = lerp(bottom[x0], bottom[x1], fx);
            values.push(lerp(t, b, fy));
        }
    }
    AttributionMap::new(new_height, new_width, values)
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    if t == 0.0 {
        a
    } else {
        a + (b - a) * t
    }
}

/// Per output index: the two source taps and the fractional weight of the
/// second one.
fn axis_taps(len_in: usize, len_out: usize) -> Vec<(usize, usize, f64)> {
    let scale = len_in as f64 / len_out as f64;
    let max = (len_in - 1) as f64;
    (0..len_out)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(len_in - 1);
            (i0, i1, src - i0 as f64)
        })
        .collect()
}
