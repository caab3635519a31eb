//! Global-statistics complexity metrics used as comparison baselines, and
//! Pearson correlation.
//!
//! All metrics operate on absolute values.

use crate::attribution::AttributionMap;
use crate::error::{MstcError, Result};

/// A flattened attribution vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatAttribution {
    values: Vec<f64>,
}

impl FlatAttribution {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(MstcError::EmptyPointSet);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(MstcError::NonFiniteValue { row: 0, col: i });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn abs_total(&self) -> Result<f64> {
        let total = compensated_sum(self.values.iter().map(|v| v.abs()));
        if total > 0.0 {
            Ok(total)
        } else {
            Err(MstcError::AllZero)
        }
    }
}

impl From<&AttributionMap> for FlatAttribution {
    fn from(map: &AttributionMap) -> Self {
        Self {
            values: map.values().to_vec(),
        }
    }
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + carry
}

/// Gini index of the absolute values: `sum_i (2i - n - 1) |a|_(i) / (n sum |a|)`
/// over ascending order, 1-based `i`. Lies in `[0, 1 - 1/n]`.
pub fn sparseness_gini(a: &FlatAttribution) -> Result<f64> {
    let total = a.abs_total()?;
    let mut sorted: Vec<f64> = a.values.iter().map(|v| v.abs()).collect();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let weighted = compensated_sum(
        sorted
            .iter()
            .enumerate()
            .map(|(i, v)| (2.0 * (i + 1) as f64 - n - 1.0) * v),
    );
    Ok(weighted / (n * total))
}

/// Shannon entropy (natural log) of the fractional absolute contributions.
pub fn complexity_entropy(a: &FlatAttribution) -> Result<f64> {
    let total = a.abs_total()?;
    Ok(compensated_sum(
        a.values
            .iter()
            .map(|v| v.abs() / total)
            .filter(|&mu| mu > 0.0)
            .map(|mu| -mu * mu.ln()),
    ))
}

/// Number of entries whose magnitude exceeds `eps`.
pub fn effective_complexity(a: &FlatAttribution, eps: f64) -> usize {
    a.values.iter().filter(|v| v.abs() > eps).count()
}

/// Sample Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(MstcError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MstcError::TooFewNodes(xs.len()));
    }
    let constant = |v: &[f64]| v.iter().all(|&x| x == v[0]);
    if constant(xs) || constant(ys) {
        return Err(MstcError::ZeroVariance);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MstcError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}
