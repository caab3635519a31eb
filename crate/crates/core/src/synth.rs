//! Deterministic synthetic heatmaps with controllable spatial structure.
//!
//! Noise comes from a counter-based generator so any implementation can
//! reproduce a field exactly. With `GOLDEN = 0x9E3779B97F4A7C15` and the
//! SplitMix64 finalizer
//!
//! ```text
//! mix(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!          z ^= z >> 27; z *= 0x94D049BB133111EB;
//!          z ^ (z >> 31)                       (wrapping u64 arithmetic)
//! ```
//!
//! the stream key is `mix(seed ^ (stream * 0xD1B54A32D192ED03))` and draw `i`
//! (the row-major pixel index) is `mix(key + GOLDEN * (i + 1)) >> 11` scaled by
//! `2^-53`, a uniform value in `[0, 1)`.

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{MstcError, Result};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_MUL: u64 = 0xD1B5_4A32_D192_ED03;

#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random access uniform stream keyed by `(seed, stream)`.
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            key: splitmix64_mix(seed ^ stream.wrapping_mul(STREAM_MUL)),
        }
    }

    #[inline]
    pub fn bits(&self, counter: u64) -> u64 {
        splitmix64_mix(
            self.key
                .wrapping_add(GOLDEN.wrapping_mul(counter.wrapping_add(1))),
        )
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        (self.bits(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Structure of a synthetic map. Centers are `[row, col]` in pixels.
///
/// `speckle` in `[0, 1]` multiplies the structured field by
/// `(1 - speckle) + speckle * u` with `u` uniform, so salient pixels thin out
/// gradually rather than forming a solid region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SynthKind {
    GaussianBlob {
        center: [f64; 2],
        sigma: f64,
        #[serde(default)]
        speckle: f64,
    },
    MultiBlob {
        centers: Vec<[f64; 2]>,
        sigma: f64,
        #[serde(default)]
        speckle: f64,
    },
    UniformNoise,
    Ring {
        center: [f64; 2],
        radius: f64,
        sigma: f64,
        #[serde(default)]
        speckle: f64,
    },
    /// A Gaussian blob plus additive uniform noise of the given amplitude.
    FragmentedNoisePlusBlob {
        center: [f64; 2],
        sigma: f64,
        noise_amplitude: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    #[serde(flatten)]
    pub kind: SynthKind,
    pub height: usize,
    pub width: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, height: usize, width: usize, seed: u64) -> Self {
        Self {
            kind,
            height,
            width,
            seed,
        }
    }

    pub fn gaussian_blob(height: usize, width: usize, center: [f64; 2], sigma: f64) -> Self {
        Self::new(
            SynthKind::GaussianBlob {
                center,
                sigma,
                speckle: 0.0,
            },
            height,
            width,
            0,
        )
    }

    pub fn uniform_noise(height: usize, width: usize, seed: u64) -> Self {
        Self::new(SynthKind::UniformNoise, height, width, seed)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MstcError::InvalidSpec(msg));
        if self.height == 0 || self.width == 0 {
            return bad(format!(
                "dimensions {}x{} must be positive",
                self.height, self.width
            ));
        }
        let (h, w) = ((self.height - 1) as f64, (self.width - 1) as f64);
        let inside = |c: &[f64; 2]| {
            c.iter().all(|v| v.is_finite())
                && (0.0..=h).contains(&c[0])
                && (0.0..=w).contains(&c[1])
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let unit = |v: f64| (0.0..=1.0).contains(&v);

        match &self.kind {
            SynthKind::GaussianBlob {
                center,
                sigma,
                speckle,
            } => {
                if !inside(center) {
                    return bad(format!("center {center:?} outside the image"));
                }
                if !positive(*sigma) || !unit(*speckle) {
                    return bad("sigma must be > 0 and speckle in [0, 1]".into());
                }
            }
            SynthKind::MultiBlob {
                centers,
                sigma,
                speckle,
            } => {
                if centers.is_empty() {
                    return bad("multi_blob needs at least one center".into());
                }
                if let Some(c) = centers.iter().find(|c| !inside(c)) {
                    return bad(format!("center {c:?} outside the image"));
                }
                if !positive(*sigma) || !unit(*speckle) {
                    return bad("sigma must be > 0 and speckle in [0, 1]".into());
                }
            }
            SynthKind::UniformNoise => {}
            SynthKind::Ring {
                center,
                radius,
                sigma,
                speckle,
            } => {
                if !inside(center) {
                    return bad(format!("center {center:?} outside the image"));
                }
                if !(radius.is_finite() && *radius >= 0.0) || !positive(*sigma) || !unit(*speckle) {
                    return bad("ring needs radius >= 0, sigma > 0, speckle in [0, 1]".into());
                }
            }
            SynthKind::FragmentedNoisePlusBlob {
                center,
                sigma,
                noise_amplitude,
            } => {
                if !inside(center) {
                    return bad(format!("center {center:?} outside the image"));
                }
                if !positive(*sigma) || !(noise_amplitude.is_finite() && *noise_amplitude >= 0.0) {
                    return bad("sigma must be > 0 and noise_amplitude >= 0".into());
                }
            }
        }
        Ok(())
    }
}

fn gaussian(row: f64, col: f64, center: &[f64; 2], sigma: f64) -> f64 {
    let (dr, dc) = (row - center[0], col - center[1]);
    (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp()
}

pub fn generate(spec: &SynthSpec) -> Result<AttributionMap> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let noise = CounterRng::new(spec.seed, 0);
    let speckled = |i: usize, v: f64, speckle: f64| {
        if speckle == 0.0 {
            v
        } else {
            v * ((1.0 - speckle) + speckle * noise.uniform(i as u64))
        }
    };

    let mut values = Vec::with_capacity(h * w);
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            let (rf, cf) = (r as f64, c as f64);
            let v = match &spec.kind {
                SynthKind::GaussianBlob {
                    center,
                    sigma,
                    speckle,
                } => speckled(i, gaussian(rf, cf, center, *sigma), *speckle),
                SynthKind::MultiBlob {
                    centers,
                    sigma,
                    speckle,
                } => {
                    let g = centers
                        .iter()
                        .map(|ctr| gaussian(rf, cf, ctr, *sigma))
                        .sum();
                    speckled(i, g, *speckle)
                }
                SynthKind::UniformNoise => noise.uniform(i as u64),
                SynthKind::Ring {
                    center,
                    radius,
                    sigma,
                    speckle,
                } => {
                    let d = (rf - center[0]).hypot(cf - center[1]) - radius;
                    speckled(i, (-(d * d) / (2.0 * sigma * sigma)).exp(), *speckle)
                }
                SynthKind::FragmentedNoisePlusBlob {
                    center,
                    sigma,
                    noise_amplitude,
                } => gaussian(rf, cf, center, *sigma) + noise_amplitude * noise.uniform(i as u64),
            };
            values.push(v);
        }
    }
    AttributionMap::new(h, w, values)
}
