//! Serializable reports produced by the verification probes and the
//! approximating-polynomial solver. Serialization order is deterministic:
//! struct fields in declaration order, maps sorted by key.

use crate::approx::ApproxResult;
use crate::scalar::format_rational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Log-log decay measurement: residual suprema per radius and the fitted
/// line `log(residual) = slope * log(radius) + intercept`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub residuals: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
}

/// Outcome of the exterior tangent-ball barrier construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BarrierReport {
    /// Least exponent that made the barrier's operator image uniformly
    /// negative enough, if one was found within the scanned range.
    pub k_found: Option<u32>,
    /// Worst slack of the inequality at the reported exponent.
    pub margin: f64,
    pub samples: usize,
}

/// Monte Carlo estimate with its sampling error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Minimum horizontal gradient of the defining function over boundary
/// samples; near-zero means a characteristic point was found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CharScanReport {
    pub min_grad: f64,
    pub argmin: Vec<f64>,
    pub characteristic: bool,
    pub samples: usize,
}

/// Measured gauge-ball volume doubling against the homogeneous dimension.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeReport {
    pub radius: f64,
    pub ratio: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// Two-sided comparison of the Euclidean and gauge distances on samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceComparisonReport {
    /// Largest observed `d_euclidean / d_gauge`.
    pub c_upper: f64,
    /// Fitted exponent in `d_gauge ~ c * d_euclidean^epsilon`.
    pub epsilon: f64,
    /// Fitted constant of that power law.
    pub c_holder: f64,
    pub pairs: usize,
}

/// Nontangential approach point with its two comparability ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NontangentialReport {
    pub point: Vec<f64>,
    /// Gauge distance to the base boundary point, divided by the scale.
    pub ratio_to_base: f64,
    /// Estimated gauge distance to the boundary, divided by the scale.
    pub ratio_to_boundary: f64,
}

/// JSON form of a solver result: the polynomial, the residual check, and
/// the values assigned to the free coefficients.
pub fn approx_result_json(result: &ApproxResult) -> Value {
    let p_json: Value =
        serde_json::from_str(&crate::poly::to_json_string(&result.p)).expect("round trip");
    let residuals: Vec<Value> = result
        .residuals
        .iter()
        .map(|(word, value)| {
            json!({
                "word": word,
                "value": format_rational(value),
            })
        })
        .collect();
    let free: serde_json::Map<String, Value> = result
        .free_assignment
        .iter()
        .map(|(index, value)| {
            (
                crate::approx::render_monomial(result.p.group(), index),
                Value::String(format_rational(value)),
            )
        })
        .collect();
    json!({
        "P": p_json,
        "residuals": residuals,
        "free_assignment": Value::Object(free),
    })
}
