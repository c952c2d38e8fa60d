use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::zonotope::Zonotope;
use super::{member_system_unchecked, XPoint, YVector, MEMBERSHIP_SLACK};

/// Samples per RNG stream. Each chunk draws from its own ChaCha stream, so
/// results depend only on (seed, sample count), not on thread scheduling.
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// w + Σ t_j g_j with t uniform in [0, 1]^n.
    ZonotopeT,
    /// Uniform in the box ∏_i [0, y_i + y_{i+1}].
    BoundingBox,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Per-coordinate extent of P(y): x_i ranges over [0, y_i + y_{i+1}].
pub fn bounding_box(y: &YVector) -> Vec<(f64, f64)> {
    y.values().windows(2).map(|w| (0.0, w[0] + w[1])).collect()
}

fn draw(rng: &mut ChaCha8Rng, mode: SampleMode, z: &Zonotope, bbox: &[(f64, f64)], out: &mut [f64]) {
    match mode {
        SampleMode::ZonotopeT => {
            out.copy_from_slice(&z.offset);
            for g in &z.generators {
                let t: f64 = rng.gen();
                for (o, gi) in out.iter_mut().zip(g) {
                    *o += t * gi;
                }
            }
        }
        SampleMode::BoundingBox => {
            for (o, &(lo, hi)) in out.iter_mut().zip(bbox) {
                *o = lo + (hi - lo) * rng.gen::<f64>();
            }
        }
    }
}

/// The first point of the stream for `seed`.
pub fn sample_point(y: &YVector, mode: SampleMode, seed: u64) -> XPoint {
    sample_points(y, mode, seed, 1).pop().unwrap_or(XPoint(Vec::new()))
}

/// `count` points; the i-th point is the same for every `count > i`.
pub fn sample_points(y: &YVector, mode: SampleMode, seed: u64, count: usize) -> Vec<XPoint> {
    let z = Zonotope::new(y);
    let bbox = bounding_box(y);
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0.0; y.n() - 1];
    for chunk in 0..count.div_ceil(CHUNK) {
        let mut rng = chunk_rng(seed, chunk as u64);
        let len = CHUNK.min(count - chunk * CHUNK);
        for _ in 0..len {
            draw(&mut rng, mode, &z, &bbox, &mut buf);
            out.push(XPoint(buf.clone()));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McVolume {
    pub estimate: f64,
    pub std_error: f64,
    pub accepted: u64,
    pub samples: u64,
    pub box_volume: f64,
}

/// Hit-or-miss volume of P(y) inside its bounding box.
pub fn monte_carlo_volume(y: &YVector, samples: u64, seed: u64) -> McVolume {
    let bbox = bounding_box(y);
    let box_volume: f64 = bbox.iter().map(|(lo, hi)| hi - lo).product();
    let py = y.prefix();
    let z = Zonotope::new(y);
    let chunks = samples.div_ceil(CHUNK as u64);
    let accepted: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = (CHUNK as u64).min(samples - c * CHUNK as u64);
            let mut buf = vec![0.0; y.n() - 1];
            let mut hits = 0u64;
            for _ in 0..len {
                draw(&mut rng, SampleMode::BoundingBox, &z, &bbox, &mut buf);
                if member_system_unchecked(&buf, &py, MEMBERSHIP_SLACK) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = accepted as f64 / samples as f64;
    McVolume {
        estimate: p * box_volume,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        accepted,
        samples,
        box_volume,
    }
}
