//! Fixtures shared by the benchmarks in `benches/`.

use mstc_core::{generate, percentile_threshold, AttributionMap, Pixel, SynthSpec};

/// Square uniform-noise map, the worst case for graph size at a given
/// percentile.
pub fn noise_map(side: usize) -> AttributionMap {
    generate(&SynthSpec::uniform_noise(side, side, 1)).expect("valid spec")
}

pub fn salient_points(side: usize, percentile: f64) -> Vec<Pixel> {
    percentile_threshold(&noise_map(side), percentile)
        .expect("valid percentile")
        .points
}
