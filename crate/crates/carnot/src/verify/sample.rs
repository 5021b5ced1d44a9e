//! Deterministic sampling utilities: stream-derived RNGs, floating-point
//! group arithmetic, and rejection sampling in gauge balls.

use super::VerifyError;
use crate::algebra::Group;
use crate::group::group_law_polynomials;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; spreads structured seed/stream pairs over u64.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// A reproducible generator for stream `stream` of master seed `seed`.
/// Distinct streams decorrelate; the same pair always replays.
pub fn derived_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ stream.wrapping_mul(0x9E3779B97F4A7C15)))
}

/// Floating-point homogeneous gauge of a coordinate vector.
pub fn gauge_coords_f64(group: &Group, coords: &[f64]) -> f64 {
    let r = group.step() as u32;
    let rfact: u32 = (1..=r).product();
    let mut total = 0.0f64;
    for j in 1..=group.step() {
        let mut norm_sq = 0.0;
        for k in group.layer_range(j) {
            norm_sq += coords[k] * coords[k];
        }
        total += norm_sq.powi((rfact / j as u32) as i32);
    }
    total.powf(1.0 / (2.0 * rfact as f64))
}

/// Group product in floating point, via the exact law polynomials.
pub fn product_f64(group: &Group, p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut buf = Vec::with_capacity(p.len() + q.len());
    buf.extend_from_slice(p);
    buf.extend_from_slice(q);
    let law = group_law_polynomials(group);
    law.components().iter().map(|c| c.evaluate_f64(&buf)).collect()
}

/// Inverse in exponential coordinates.
pub fn inverse_f64(p: &[f64]) -> Vec<f64> {
    p.iter().map(|c| -c).collect()
}

/// Gauge quasi-distance `|q^{-1} p|` in floating point.
pub fn distance_coords_f64(group: &Group, p: &[f64], q: &[f64]) -> f64 {
    gauge_coords_f64(group, &product_f64(group, &inverse_f64(q), p))
}

/// `p` composed with `exp(v)` for a horizontal vector `v`: the exponential
/// of a first-layer vector has those first-layer coordinates and zeros above.
pub fn step_horizontal_f64(group: &Group, p: &[f64], v: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; group.dimension()];
    q[..v.len()].copy_from_slice(v);
    product_f64(group, p, &q)
}

/// One uniform draw from the coordinate box `[-rho^{w_k}, rho^{w_k}]`,
/// which contains the gauge ball of radius `rho`.
pub fn box_sample<R: Rng>(group: &Group, rng: &mut R, rho: f64) -> Vec<f64> {
    (0..group.dimension())
        .map(|k| {
            let half = rho.powi(group.weight(k) as i32);
            rng.gen_range(-half..=half)
        })
        .collect()
}

/// Uniform sample from the gauge ball of radius `rho`, by rejection from
/// the enclosing coordinate box.
pub fn gauge_ball_sample<R: Rng>(
    group: &Group,
    rng: &mut R,
    rho: f64,
) -> Result<Vec<f64>, VerifyError> {
    for _ in 0..100_000 {
        let p = box_sample(group, rng, rho);
        if gauge_coords_f64(group, &p) <= rho {
            return Ok(p);
        }
    }
    Err(VerifyError::BadInput(format!(
        "rejection sampling failed in the gauge ball of radius {rho}"
    )))
}

/// A batch of gauge-ball samples.
pub fn gauge_ball_samples<R: Rng>(
    group: &Group,
    rng: &mut R,
    rho: f64,
    count: usize,
) -> Result<Vec<Vec<f64>>, VerifyError> {
    (0..count).map(|_| gauge_ball_sample(group, rng, rho)).collect()
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
