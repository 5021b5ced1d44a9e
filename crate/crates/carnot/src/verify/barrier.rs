//! Exterior tangent-ball barrier at a non-characteristic boundary point.
//!
//! The construction places a Euclidean ball of radius `r1` outside the
//! domain, tangent at the base boundary point, and scans exponents `k`
//! until `g = C (1 - (r1^2 / psi)^k)` with `psi` the squared Euclidean
//! distance to the ball's center satisfies `L g <= -f_bound` on the
//! intersection of the domain with the Euclidean ball of radius `r1`
//! around the base point. Tangency keeps `psi >= r1^2` there, so `g >= 0`
//! vanishes exactly at the base point and the inequality forces
//! supersolution behavior against any source bounded by `f_bound`.

use super::domain::Domain;
use super::expr::ScalarField;
use super::probes::fd_horizontal_derivative;
use super::sample::derived_rng;
use super::VerifyError;
use crate::diffop::DiffOperator;
use crate::report::BarrierReport;
use rand::Rng;

fn euclid_dist_sq(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `L u(q)` by nested central differences, for `L = sum a_ij X_i X_j`
/// with polynomial coefficient entries evaluated at `q`.
fn apply_operator_fd(
    operator: &DiffOperator,
    field: &ScalarField,
    q: &[f64],
    h: f64,
) -> Result<f64, VerifyError> {
    let m = operator.group().horizontal_dim();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            let a = operator.entry(i, j).evaluate_f64(q);
            if a == 0.0 {
                continue;
            }
            acc += a * fd_horizontal_derivative(field, &[i, j], q, h)?;
        }
    }
    Ok(acc)
}

/// Runs the tangent-ball barrier construction at the identity, scanning
/// `k = 1..=k_max` for the least exponent that makes the operator image
/// uniformly negative enough on domain samples. Reports the worst slack
/// after auto-calibrating the amplitude.
pub fn barrier_check(
    domain: &Domain,
    operator: &DiffOperator,
    f_bound: f64,
    r1: f64,
    k_max: u32,
    samples: usize,
    seed: u64,
) -> Result<BarrierReport, VerifyError> {
    let group = domain.group().clone();
    let n = group.dimension();
    if !(r1 > 0.0) || !(f_bound > 0.0) || k_max == 0 || samples == 0 {
        return Err(VerifyError::BadInput(
            "need positive radius, positive source bound, and nonzero scan ranges".into(),
        ));
    }
    let p0 = vec![0.0; n];
    if domain.phi_value(&p0).abs() > 1e-9 {
        return Err(VerifyError::BadInput("the identity must lie on the boundary".into()));
    }

    // Center of the exterior ball: step outward along the Euclidean normal.
    let grad = domain.grad_phi(&p0);
    let gnorm = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    if gnorm < 1e-9 {
        return Err(VerifyError::NoTangentBall(
            "the defining function has vanishing gradient at the base point".into(),
        ));
    }
    let center: Vec<f64> = grad.iter().map(|v| r1 * v / gnorm).collect();

    // Tangency: nearby boundary points must stay outside the open ball.
    let mut rng = derived_rng(seed, 0xBA11);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 500 && attempts < 500_000 {
        attempts += 1;
        let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0 * r1..=2.0 * r1)).collect();
        if domain.lift_to_boundary(&mut q).is_err() {
            continue;
        }
        if euclid_dist_sq(&q, &p0) > 4.0 * r1 * r1 {
            continue;
        }
        checked += 1;
        let dist_sq = euclid_dist_sq(&q, &center);
        if dist_sq < r1 * r1 * (1.0 - 1e-6) {
            return Err(VerifyError::NoTangentBall(format!(
                "boundary point at squared distance {dist_sq} from the center \
                 cuts into the ball of squared radius {}",
                r1 * r1
            )));
        }
    }

    // Sample the barrier's working region: the domain intersected with the
    // Euclidean ball of radius r1 around the base point.
    let mut region = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while region.len() < samples && attempts < samples.saturating_mul(10_000) {
        attempts += 1;
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-r1..=r1)).collect();
        if euclid_dist_sq(&q, &p0) > r1 * r1 {
            continue;
        }
        if domain.phi_value(&q) >= 0.0 {
            continue;
        }
        region.push(q);
    }
    if region.is_empty() {
        return Err(VerifyError::DegenerateSample(
            "no samples landed in the domain near the base point".into(),
        ));
    }

    let fd_step = r1 * 1e-3;
    let mut best_margin = f64::NEG_INFINITY;
    for k in 1..=k_max {
        let shape = ScalarField::from_fn(&group, {
            let center = center.clone();
            let r1sq = r1 * r1;
            move |p: &[f64]| {
                let psi = euclid_dist_sq(p, &center);
                1.0 - (r1sq / psi).powi(k as i32)
            }
        });
        let mut s_max = f64::NEG_INFINITY;
        let mut ok = true;
        for q in &region {
            let s = apply_operator_fd(operator, &shape, q, fd_step)?;
            if !s.is_finite() {
                return Err(VerifyError::EvaluationFailure(format!(
                    "barrier shape at {q:?}"
                )));
            }
            s_max = s_max.max(s);
            if s >= 0.0 {
                ok = false;
                break;
            }
        }
        if ok && s_max < 0.0 {
            // Amplitude making L g <= -f_bound with slack to spare.
            let amplitude = 2.0 * (f_bound / (-s_max)).max(f_bound);
            let margin = amplitude * (-s_max) - f_bound;
            return Ok(BarrierReport { k_found: Some(k), margin, samples: region.len() });
        }
        best_margin = best_margin.max(-f_bound - s_max);
    }
    Ok(BarrierReport { k_found: None, margin: best_margin, samples: region.len() })
}
