//! Measurement probes: finite-difference derivatives, Hölder quotients,
//! boundary decay slopes, Taylor remainder slopes, characteristic scans,
//! nontangential approach points, and gauge-metric geometry checks.

use super::domain::Domain;
use super::expr::{horizontal_expr_derivative, Expr, ScalarField};
use super::sample::{
    box_sample, derived_rng, distance_coords_f64, gauge_ball_sample, gauge_ball_samples,
    gauge_coords_f64, ols, product_f64, step_horizontal_f64,
};
use super::VerifyError;
use crate::algebra::Group;
use crate::poly::StratifiedPolynomial;
use crate::report::{
    CharScanReport, DecayReport, DistanceComparisonReport, NontangentialReport, VolumeReport,
};
use crate::scalar::{from_f64, rat};
use crate::taylor::{horizontal_words, taylor_from_derivatives, TaylorError};
use std::collections::BTreeMap;

/// Nested central-difference approximation of the word derivative
/// `X_{i_1}(... X_{i_l} f)` at `point`, stepping along group exponentials.
/// Second-order accurate in `h` per level.
pub fn fd_horizontal_derivative(
    field: &ScalarField,
    word: &[usize],
    point: &[f64],
    h: f64,
) -> Result<f64, VerifyError> {
    if !(h > 0.0) {
        return Err(VerifyError::BadInput(format!("step must be positive, got {h}")));
    }
    let m = field.group().horizontal_dim();
    if let Some(&bad) = word.iter().find(|&&i| i >= m) {
        return Err(VerifyError::BadInput(format!(
            "letter {bad} is not a horizontal direction (m = {m})"
        )));
    }
    fd_rec(field, word, point, h)
}

fn fd_rec(field: &ScalarField, word: &[usize], point: &[f64], h: f64) -> Result<f64, VerifyError> {
    match word.split_first() {
        None => field.eval(point),
        Some((&i, rest)) => {
            let group = field.group();
            let mut dir = vec![0.0; group.horizontal_dim()];
            dir[i] = h;
            let forward = step_horizontal_f64(group, point, &dir);
            dir[i] = -h;
            let backward = step_horizontal_f64(group, point, &dir);
            let fp = fd_rec(field, rest, &forward, h)?;
            let fm = fd_rec(field, rest, &backward, h)?;
            Ok((fp - fm) / (2.0 * h))
        }
    }
}

/// Largest pairwise Hölder quotient `|f(p) - f(q)| / d(p,q)^alpha` over the
/// supplied points, with `d` the gauge quasi-distance.
pub fn holder_seminorm(
    field: &ScalarField,
    points: &[Vec<f64>],
    alpha: f64,
) -> Result<f64, VerifyError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(VerifyError::BadInput(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if points.len() < 2 {
        return Err(VerifyError::BadInput("need at least two sample points".into()));
    }
    let group = field.group();
    let values: Vec<f64> =
        points.iter().map(|p| field.eval(p)).collect::<Result<_, _>>()?;
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = distance_coords_f64(group, &points[i], &points[j]);
            if d < 1e-12 {
                return Err(VerifyError::DegenerateSample(format!(
                    "points {i} and {j} are closer than 1e-12 in gauge distance"
                )));
            }
            let q = (values[i] - values[j]).abs() / d.powf(alpha);
            best = best.max(q);
        }
    }
    Ok(best)
}

fn fit_decay(radii: &[f64], residuals: &[f64]) -> (f64, f64) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (r, s) in radii.iter().zip(residuals) {
        if *s > 0.0 {
            xs.push(r.ln());
            ys.push(s.ln());
        }
    }
    if xs.len() < 2 {
        // Residuals vanish identically: decay faster than any power.
        return (f64::INFINITY, f64::NEG_INFINITY);
    }
    ols(&xs, &ys)
}

/// Measures `sup_{Omega  cap B(rho)} |u - P|` per radius and fits the
/// log-log slope; the slope estimates the vanishing order of `u - P` at
/// the identity from inside the domain.
pub fn decay_exponent(
    u: &ScalarField,
    p_approx: &StratifiedPolynomial,
    domain: &Domain,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<DecayReport, VerifyError> {
    let group = u.group();
    if radii.len() < 2 {
        return Err(VerifyError::BadInput("need at least two radii".into()));
    }
    let mut residuals = Vec::with_capacity(radii.len());
    for (stream, &rho) in radii.iter().enumerate() {
        let mut rng = derived_rng(seed, stream as u64);
        let mut sup = 0.0f64;
        let mut found = 0usize;
        let mut attempts = 0usize;
        while found < samples_per_radius && attempts < samples_per_radius.saturating_mul(1000) {
            attempts += 1;
            let q = box_sample(group, &mut rng, rho);
            if gauge_coords_f64(group, &q) > rho || !domain.contains(&q) {
                continue;
            }
            found += 1;
            let diff = (u.eval(&q)? - p_approx.evaluate_f64(&q)).abs();
            sup = sup.max(diff);
        }
        if found == 0 {
            return Err(VerifyError::EmptyShell(rho));
        }
        residuals.push(sup);
    }
    let (slope, intercept) = fit_decay(radii, &residuals);
    Ok(DecayReport { radii: radii.to_vec(), residuals, slope, intercept })
}

/// Builds the order-`k` stratified Taylor polynomial of `f` at `g0` from
/// symbolic word derivatives, then measures `sup_{|g| <= rho} |f(g0 g) - P(g)|`
/// per radius. The fitted slope should be at least `k + 1` for smooth `f`,
/// which is the content of the stratified Taylor inequality.
pub fn check_taylor_inequality(
    f: &ScalarField,
    g0: &[f64],
    k: u32,
    radii: &[f64],
    samples_per_radius: usize,
    seed: u64,
) -> Result<DecayReport, VerifyError> {
    let group = f.group().clone();
    let expr = f.as_expr().ok_or_else(|| {
        VerifyError::BadInput("Taylor check needs a closed-form field".into())
    })?;
    if radii.len() < 2 {
        return Err(VerifyError::BadInput("need at least two radii".into()));
    }

    // Word derivatives share suffixes; build them once, bottom up.
    let mut exprs: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
    exprs.insert(Vec::new(), expr);
    let mut words = horizontal_words(group.horizontal_dim(), k);
    words.sort_by_key(|w| w.len());
    for word in &words {
        if word.is_empty() {
            continue;
        }
        let inner = exprs[&word[1..]].clone();
        let outer = horizontal_expr_derivative(&group, word[0], &inner)?;
        exprs.insert(word.clone(), outer);
    }
    let mut table: BTreeMap<Vec<usize>, crate::scalar::Rational> = BTreeMap::new();
    for (word, e) in &exprs {
        let v = e.eval_f64(g0);
        let value = from_f64(v).ok_or_else(|| {
            VerifyError::EvaluationFailure(format!("derivative {word:?} at {g0:?}"))
        })?;
        table.insert(word.clone(), value);
    }
    // The derivative data is floating point, so the overdetermined solve
    // gets a consistency tolerance well above f64 noise.
    let tol = rat(1, 1_000_000);
    let p = taylor_from_derivatives(&group, k, Some(&tol), |w| {
        table.get(w).cloned().ok_or_else(|| TaylorError::MissingDerivative(w.to_vec()))
    })?;

    let mut residuals = Vec::with_capacity(radii.len());
    for (stream, &rho) in radii.iter().enumerate() {
        let mut rng = derived_rng(seed, stream as u64);
        let mut sup = 0.0f64;
        for _ in 0..samples_per_radius {
            let g = gauge_ball_sample(&group, &mut rng, rho)?;
            let moved = product_f64(&group, g0, &g);
            let diff = (f.eval(&moved)? - p.evaluate_f64(&g)).abs();
            sup = sup.max(diff);
        }
        residuals.push(sup);
    }
    let (slope, intercept) = fit_decay(radii, &residuals);
    Ok(DecayReport { radii: radii.to_vec(), residuals, slope, intercept })
}

/// Scans boundary samples within the given gauge radius for the minimum of
/// `|grad_H phi|`; a near-zero minimum exhibits a characteristic point.
pub fn characteristic_scan(
    domain: &Domain,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<CharScanReport, VerifyError> {
    let group = domain.group().clone();
    let mut min_grad = f64::INFINITY;
    let mut argmin = Vec::new();
    let mut kept = 0usize;

    let consider = |q: &[f64], min_grad: &mut f64, argmin: &mut Vec<f64>| {
        let hg = domain.horizontal_grad_phi(q);
        let norm = hg.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < *min_grad {
            *min_grad = norm;
            *argmin = q.to_vec();
        }
    };

    let origin = vec![0.0; group.dimension()];
    if domain.phi_value(&origin).abs() < 1e-9 {
        consider(&origin, &mut min_grad, &mut argmin);
        kept += 1;
    }

    let mut rng = derived_rng(seed, 0xC5A2);
    let mut attempts = 0usize;
    while kept < samples && attempts < samples.saturating_mul(1000) {
        attempts += 1;
        let mut q = box_sample(&group, &mut rng, radius);
        if domain.lift_to_boundary(&mut q).is_err() {
            continue;
        }
        if gauge_coords_f64(&group, &q) > radius {
            continue;
        }
        consider(&q, &mut min_grad, &mut argmin);
        kept += 1;
    }
    if kept == 0 {
        return Err(VerifyError::EmptyShell(radius));
    }
    Ok(CharScanReport {
        min_grad,
        argmin,
        characteristic: min_grad < 1e-6,
        samples: kept,
    })
}

/// Builds the canonical nontangential approach point at scale `t`: march
/// from the boundary point `p1` along the horizontal inner normal by `a*t`.
/// Reports the two comparability ratios `d(p3, p1)/t` (which is `a` by
/// construction) and `d(p3, boundary)/t` (estimated over boundary samples
/// near `p1`). Fails on characteristic base points.
pub fn nontangential_point(
    domain: &Domain,
    p1: &[f64],
    t: f64,
    a: f64,
    seed: u64,
) -> Result<NontangentialReport, VerifyError> {
    let group = domain.group().clone();
    if !(a > 0.0 && a <= 1.0) || !(t > 0.0) {
        return Err(VerifyError::BadInput(format!("need 0 < a <= 1 and t > 0, got a={a}, t={t}")));
    }
    if domain.phi_value(p1).abs() > 1e-9 {
        return Err(VerifyError::BadInput("base point is not on the boundary".into()));
    }
    let hg = domain.horizontal_grad_phi(p1);
    let hnorm = hg.iter().map(|v| v * v).sum::<f64>().sqrt();
    if hnorm < 0.1 {
        return Err(VerifyError::NotFound(format!(
            "base point is characteristic to working precision (|grad_H phi| = {hnorm:.3e})"
        )));
    }
    // Unit horizontal inner normal; phi increases outward, so step along
    // the negative horizontal gradient.
    let step: Vec<f64> = hg.iter().map(|v| -v / hnorm * a * t).collect();
    let p3 = step_horizontal_f64(&group, p1, &step);
    if domain.phi_value(&p3) >= 0.0 {
        return Err(VerifyError::NotFound(
            "the inward horizontal step left the domain; reduce the scale".into(),
        ));
    }
    let ratio_to_base = distance_coords_f64(&group, &p3, p1) / t;

    // Estimate the gauge distance to the boundary from samples near p1.
    let mut best = distance_coords_f64(&group, &p3, p1);
    let mut rng = derived_rng(seed, 0x17);
    let mut kept = 0usize;
    let mut attempts = 0usize;
    while kept < 400 && attempts < 400_000 {
        attempts += 1;
        let g = box_sample(&group, &mut rng, 4.0 * t);
        let mut q = product_f64(&group, p1, &g);
        if domain.lift_to_boundary(&mut q).is_err() {
            continue;
        }
        kept += 1;
        let d = distance_coords_f64(&group, &p3, &q);
        if d < best {
            best = d;
        }
    }
    Ok(NontangentialReport { point: p3, ratio_to_base, ratio_to_boundary: best / t })
}

/// Estimates the gauge-ball volume doubling ratio `|B(2r)| / |B(r)|` by
/// rejection counting in the enclosing coordinate boxes; homogeneity makes
/// the exact value `2^Q` with `Q` the homogeneous dimension.
pub fn volume_ratio(
    group: &Group,
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<VolumeReport, VerifyError> {
    if samples == 0 {
        return Err(VerifyError::BadInput("need a positive sample count".into()));
    }
    let count_hits = |rho: f64, stream: u64| -> usize {
        let mut rng = derived_rng(seed, stream);
        (0..samples)
            .filter(|_| {
                let p = box_sample(group, &mut rng, rho);
                gauge_coords_f64(group, &p) <= rho
            })
            .count()
    };
    let hits_r = count_hits(radius, 0xB0);
    let hits_2r = count_hits(2.0 * radius, 0xB1);
    if hits_r == 0 {
        return Err(VerifyError::DegenerateSample(format!(
            "no box sample landed in the gauge ball of radius {radius}"
        )));
    }
    let expected = 2f64.powi(group.homogeneous_dimension() as i32);
    let ratio = expected * (hits_2r as f64) / (hits_r as f64);
    Ok(VolumeReport {
        radius,
        ratio,
        expected,
        relative_error: (ratio - expected).abs() / expected,
    })
}

/// Compares the Euclidean and gauge distances on ball samples: the largest
/// `d_e / d_gauge` bounds one direction, and an OLS fit of
/// `log d_gauge` against `log d_e` measures the Hölder exponent of the
/// other. A measurement over samples, not a certification.
pub fn distance_comparison(
    group: &Group,
    radius: f64,
    n_points: usize,
    seed: u64,
) -> Result<DistanceComparisonReport, VerifyError> {
    let mut rng = derived_rng(seed, 0xD1);
    let pts = gauge_ball_samples(group, &mut rng, radius, n_points)?;
    let mut c_upper = 0.0f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let de: f64 = pts[i]
                .iter()
                .zip(&pts[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dg = distance_coords_f64(group, &pts[i], &pts[j]);
            if de < 1e-12 || dg < 1e-12 {
                continue;
            }
            c_upper = c_upper.max(de / dg);
            xs.push(de.ln());
            ys.push(dg.ln());
        }
    }
    if xs.len() < 2 {
        return Err(VerifyError::DegenerateSample(
            "not enough distinct pairs for the comparison".into(),
        ));
    }
    let (epsilon, intercept) = ols(&xs, &ys);
    Ok(DistanceComparisonReport {
        c_upper,
        epsilon,
        c_holder: intercept.exp(),
        pairs: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{engel, heisenberg};
    use crate::poly::VarSpace;
    use crate::verify::expr::parse_expr;

    fn field(group: &Group, text: &str) -> ScalarField {
        ScalarField::from_text(group, text).unwrap()
    }

    #[test]
    fn fd_first_derivatives_match_known_values() {
        let g = heisenberg(1);
        // X1(x^2) = 2x, so the value at (1, 0, 0) is 2.
        let f = field(&g, "x^2");
        let v = fd_horizontal_derivative(&f, &[0], &[1.0, 0.0, 0.0], 1e-4).unwrap();
        assert!((v - 2.0).abs() < 1e-7, "got {v}");
        // Derivatives of constants vanish to rounding.
        let c = field(&g, "5/7");
        for word in [vec![0], vec![1], vec![0, 1]] {
            let v = fd_horizontal_derivative(&c, &word, &[0.3, -0.2, 0.9], 1e-3).unwrap();
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn fd_second_derivatives_see_the_commutator() {
        let g = heisenberg(1);
        let f = field(&g, "t");
        // X1 X2 t = 1/2 at the identity.
        let v = fd_horizontal_derivative(&f, &[0, 1], &[0.0; 3], 1e-3).unwrap();
        assert!((v - 0.5).abs() < 1e-6, "got {v}");
        let w = fd_horizontal_derivative(&f, &[1, 0], &[0.0; 3], 1e-3).unwrap();
        assert!((w + 0.5).abs() < 1e-6, "got {w}");
    }

    #[test]
    fn fd_error_shrinks_quadratically() {
        let g = heisenberg(1);
        let f = ScalarField::from_expression(&g, parse_expr(&g, "sin(x)*y").unwrap());
        let p = [0.4, 0.7, -0.1];
        // Exact X1(sin(x) y) = cos(x) y.
        let exact = 0.4f64.cos() * 0.7;
        let e1 = (fd_horizontal_derivative(&f, &[0], &p, 1e-2).unwrap() - exact).abs();
        let e2 = (fd_horizontal_derivative(&f, &[0], &p, 5e-3).unwrap() - exact).abs();
        let shrink = e1 / e2;
        assert!(
            (2.5..6.0).contains(&shrink),
            "halving the step gave error factor {shrink}, expected about 4"
        );
    }

    #[test]
    fn fd_agrees_with_symbolic_on_a_transcendental_field() {
        let g = engel();
        let f = ScalarField::from_text(&g, "sin(z) + x*y^2").unwrap();
        let e = f.as_expr().unwrap();
        let p = [0.2, -0.4, 0.3, 0.1];
        for word in [vec![0], vec![1], vec![1, 0]] {
            let sym = crate::verify::expr::word_expr_derivative(&g, &word, &e)
                .unwrap()
                .eval_f64(&p);
            let num = fd_horizontal_derivative(&f, &word, &p, 1e-4).unwrap();
            assert!((sym - num).abs() < 1e-5, "word {word:?}: {sym} vs {num}");
        }
    }

    #[test]
    fn fd_rejects_bad_words_and_steps() {
        let g = heisenberg(1);
        let f = field(&g, "x");
        assert!(fd_horizontal_derivative(&f, &[2], &[0.0; 3], 1e-3).is_err());
        assert!(fd_horizontal_derivative(&f, &[0], &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn holder_quotients_behave_on_known_fields() {
        let g = heisenberg(1);
        let mut rng = derived_rng(5, 0);
        let pts = gauge_ball_samples(&g, &mut rng, 1.0, 60).unwrap();
        // Constants have vanishing seminorm.
        let c = field(&g, "3");
        assert_eq!(holder_seminorm(&c, &pts, 0.5).unwrap(), 0.0);
        // f = x is 1-Lipschitz for the gauge: |x(p) - x(q)| <= d(p, q).
        let x = field(&g, "x");
        let s = holder_seminorm(&x, &pts, 1.0).unwrap();
        assert!(s <= 1.0 + 1e-9, "got {s}");
        assert!(s > 0.5, "quotient suspiciously small: {s}");
        // The gauge itself is alpha-Hölder with constant about 1 for alpha=1.
        let gauge_field = ScalarField::from_fn(&g, {
            let g = g.clone();
            move |p| gauge_coords_f64(&g, p)
        });
        let s = holder_seminorm(&gauge_field, &pts, 1.0).unwrap();
        assert!(s <= 1.0 + 1e-9, "gauge quotient {s}");
    }

    #[test]
    fn holder_rejects_degenerate_input() {
        let g = heisenberg(1);
        let f = field(&g, "x");
        let pts = vec![vec![0.1, 0.2, 0.0], vec![0.1, 0.2, 0.0]];
        assert!(matches!(
            holder_seminorm(&f, &pts, 1.0),
            Err(VerifyError::DegenerateSample(_))
        ));
        assert!(holder_seminorm(&f, &pts[..1].to_vec(), 1.0).is_err());
        assert!(holder_seminorm(&f, &pts, 1.5).is_err());
    }

    #[test]
    fn exact_agreement_gives_vanishing_residuals() {
        let g = heisenberg(1);
        let u = field(&g, "y*t");
        let p = u.as_polynomial().unwrap().clone();
        let d = Domain::flat(&g);
        let radii = [0.5, 0.25, 0.125];
        let report = decay_exponent(&u, &p, &d, &radii, 100, 3).unwrap();
        for r in &report.residuals {
            assert!(*r <= 1e-12);
        }
        assert!(report.slope.is_infinite());
    }

    #[test]
    fn decay_slope_matches_the_vanishing_order() {
        let g = heisenberg(1);
        // u = y * x^3 vanishes to order 4 at the identity (weight 1 + 3).
        let u = field(&g, "y*x^3");
        let zero = StratifiedPolynomial::zero(&g, VarSpace::Single);
        let d = Domain::flat(&g);
        let radii: Vec<f64> = (2..=7).map(|i| 2f64.powi(-i)).collect();
        let report = decay_exponent(&u, &zero, &d, &radii, 200, 11).unwrap();
        assert!(
            (report.slope - 4.0).abs() < 0.2,
            "slope {} should be near 4",
            report.slope
        );
    }

    #[test]
    fn empty_shells_are_reported() {
        let g = heisenberg(1);
        let u = field(&g, "x");
        let zero = StratifiedPolynomial::zero(&g, VarSpace::Single);
        // A bound far smaller than the scan radii empties every shell.
        let d = Domain::flat(&g).with_bound(1e-9);
        let radii = [0.5, 0.25];
        assert!(matches!(
            decay_exponent(&u, &zero, &d, &radii, 50, 1),
            Err(VerifyError::EmptyShell(_))
        ));
    }

    #[test]
    fn taylor_remainder_of_sine_decays_at_third_order() {
        let g = heisenberg(1);
        let f = ScalarField::from_expression(&g, parse_expr(&g, "sin(x)").unwrap());
        let radii: Vec<f64> = (2..=6).map(|i| 2f64.powi(-i)).collect();
        let report = check_taylor_inequality(&f, &[0.0; 3], 2, &radii, 200, 5).unwrap();
        assert!(
            (report.slope - 3.0).abs() < 0.2,
            "slope {} should be near 3",
            report.slope
        );
    }

    #[test]
    fn taylor_remainder_of_polynomials_is_zero() {
        let g = heisenberg(1);
        let f = field(&g, "x^2*y - t + 1/3");
        let radii = [0.5, 0.25, 0.125];
        // Base point away from the identity exercises the translation.
        let report = check_taylor_inequality(&f, &[0.3, -0.2, 0.5], 3, &radii, 100, 9).unwrap();
        for r in &report.residuals {
            assert!(*r <= 1e-9, "residual {r}");
        }
    }

    #[test]
    fn mixed_weight_taylor_remainder_reaches_seventh_order() {
        let g = heisenberg(1);
        // y * sin(t) = y t - y t^3/6 + ...; the order-3 polynomial is y t,
        // and the next term has homogeneous degree 1 + 6 = 7.
        let f = ScalarField::from_expression(&g, parse_expr(&g, "y*sin(t)").unwrap());
        let radii: Vec<f64> = (2..=6).map(|i| 2f64.powi(-i)).collect();
        let report = check_taylor_inequality(&f, &[0.0; 3], 3, &radii, 200, 5).unwrap();
        assert!(
            (report.slope - 7.0).abs() < 0.5,
            "slope {} should be near 7",
            report.slope
        );
    }

    #[test]
    fn characteristic_scan_separates_the_two_half_spaces() {
        let g = heisenberg(1);
        // y > 0 is non-characteristic everywhere: |grad_H phi| = 1.
        let good = Domain::flat(&g);
        let r = characteristic_scan(&good, 0.5, 300, 7).unwrap();
        assert!(!r.characteristic);
        assert!((r.min_grad - 1.0).abs() < 1e-12);
        // t > 0 has a characteristic point at the identity.
        let bad = Domain::implicit_text(&g, "-t").unwrap();
        let r = characteristic_scan(&bad, 0.5, 300, 7).unwrap();
        assert!(r.characteristic, "min grad {}", r.min_grad);
        assert!(r.min_grad < 1e-9);
        let origin_norm: f64 = r.argmin.iter().map(|v| v * v).sum();
        assert!(origin_norm < 1e-9, "minimum should sit at the identity");
    }

    #[test]
    fn curved_noncharacteristic_boundary_passes_the_scan() {
        let g = heisenberg(1);
        // phi = x - y t has X1 phi = 1 + y^2/2 >= 1 everywhere.
        let d = Domain::implicit_text(&g, "x - y*t").unwrap();
        let r = characteristic_scan(&d, 0.5, 300, 13).unwrap();
        assert!(!r.characteristic);
        assert!(r.min_grad >= 1.0 - 1e-9, "min grad {}", r.min_grad);
    }

    #[test]
    fn nontangential_point_on_the_flat_boundary() {
        let g = heisenberg(1);
        let d = Domain::flat(&g);
        let r = nontangential_point(&d, &[0.0; 3], 0.125, 0.5, 2).unwrap();
        let expect = [0.0, 0.0625, 0.0];
        for (a, b) in r.point.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((r.ratio_to_base - 0.5).abs() < 1e-9);
        // The flat boundary realizes the distance at the foot point.
        assert!(r.ratio_to_boundary >= 0.5 - 1e-9);
        assert!(r.ratio_to_boundary <= 2.0 + 1e-9);
    }

    #[test]
    fn nontangential_ratios_stabilize_on_a_curved_boundary() {
        let g = heisenberg(1);
        let d = Domain::graph_text(&g, "t^2").unwrap();
        let a = 0.5;
        for t in [0.125, 0.0625, 0.03125] {
            let r = nontangential_point(&d, &[0.0; 3], t, a, 2).unwrap();
            // Comparability with constants approaching [a, 1/a] as t -> 0.
            assert!(r.ratio_to_base >= a - 1e-9 && r.ratio_to_base <= 1.0 / a + 1e-9);
            assert!(
                r.ratio_to_boundary >= a - 0.1 && r.ratio_to_boundary <= 1.0 / a + 0.1,
                "t={t}: boundary ratio {}",
                r.ratio_to_boundary
            );
        }
    }

    #[test]
    fn nontangential_point_fails_at_characteristic_base() {
        let g = heisenberg(1);
        let d = Domain::implicit_text(&g, "-t").unwrap();
        assert!(matches!(
            nontangential_point(&d, &[0.0; 3], 0.125, 0.5, 2),
            Err(VerifyError::NotFound(_))
        ));
    }

    #[test]
    fn ball_volumes_double_by_the_homogeneous_dimension() {
        for (group, q) in [(heisenberg(1), 4), (engel(), 7)] {
            let report = volume_ratio(&group, 0.7, 60_000, 21).unwrap();
            assert_eq!(report.expected, 2f64.powi(q));
            assert!(
                report.relative_error < 0.05,
                "{}: ratio {} vs 2^{q}",
                group.name(),
                report.ratio
            );
        }
    }

    #[test]
    fn distance_comparison_measures_both_directions() {
        let g = heisenberg(1);
        let report = distance_comparison(&g, 1.0, 150, 17).unwrap();
        assert!(report.pairs > 5000);
        // Euclidean distance is controlled by the gauge on bounded sets.
        assert!(report.c_upper >= 1.0 && report.c_upper < 10.0, "c {}", report.c_upper);
        // The typical Hölder exponent sits in (0, 1]: vertical pairs pull
        // it below 1, and it must stay at least 1/step.
        assert!(report.epsilon > 0.3 && report.epsilon <= 1.05, "eps {}", report.epsilon);
        assert!(report.c_holder.is_finite() && report.c_holder > 0.0);
    }
}
