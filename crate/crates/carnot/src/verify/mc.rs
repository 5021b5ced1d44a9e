//! Monte Carlo Dirichlet solver: the horizontal random walk
//! `p <- p . exp(sqrt(dt) A^{1/2} zeta)` with standard normal `zeta` has
//! generator `(1/2) sum a_ij X_i X_j`, so for `L u = f` in the domain with
//! `u = g` on the boundary,
//! `u(start) = E[ g(exit) - (1/2) sum_steps dt f(path) ]`.

use super::domain::Domain;
use super::expr::ScalarField;
use super::sample::derived_rng;
use super::VerifyError;
use crate::algebra::Group;
use crate::diffop::DiffOperator;
use crate::group::group_law_polynomials;
use crate::report::McEstimate;
use crate::scalar::to_f64;
use rand::Rng;
use rand_distr::StandardNormal;

struct CompiledTerm {
    coeff: f64,
    factors: Vec<(usize, u32)>,
}

/// The group law flattened to coefficient/exponent lists over the
/// concatenated `(p, q)` coordinates, for tight inner loops.
struct CompiledLaw {
    n: usize,
    components: Vec<Vec<CompiledTerm>>,
}

impl CompiledLaw {
    fn new(group: &Group) -> Self {
        let law = group_law_polynomials(group);
        let components = law
            .components()
            .iter()
            .map(|c| {
                c.sorted_terms()
                    .into_iter()
                    .map(|(index, coeff)| CompiledTerm {
                        coeff: to_f64(coeff),
                        factors: index
                            .exponents()
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(v, &e)| (v, e))
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        CompiledLaw { n: group.dimension(), components }
    }

    fn product_into(&self, p: &[f64], q: &[f64], out: &mut [f64], buf: &mut [f64]) {
        buf[..self.n].copy_from_slice(p);
        buf[self.n..].copy_from_slice(q);
        for (k, terms) in self.components.iter().enumerate() {
            let mut acc = 0.0;
            for t in terms {
                let mut v = t.coeff;
                for &(var, e) in &t.factors {
                    let x = buf[var];
                    for _ in 0..e {
                        v *= x;
                    }
                }
                acc += v;
            }
            out[k] = acc;
        }
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 1e-14 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

/// Gauge raised to the power `2 r!`: cheap per-step radius check.
fn gauge_power_f64(group: &Group, coords: &[f64], rfact: u32) -> f64 {
    let mut total = 0.0;
    for j in 1..=group.step() {
        let mut norm_sq = 0.0;
        for k in group.layer_range(j) {
            norm_sq += coords[k] * coords[k];
        }
        total += norm_sq.powi((rfact / j as u32) as i32);
    }
    total
}

/// Estimates the Dirichlet solution at `start` by simulating `n_paths`
/// horizontal walks until they leave the domain (through the defining
/// surface or the bounding gauge sphere, both required for almost-sure
/// exit). The operator must have constant, positive definite coefficients.
/// Path `i` draws from the derived stream `(seed, i)`, so estimates replay
/// exactly for a given seed.
#[allow(clippy::too_many_arguments)]
pub fn mc_dirichlet(
    domain: &Domain,
    operator: &DiffOperator,
    f: &ScalarField,
    g: &ScalarField,
    start: &[f64],
    dt: f64,
    n_paths: usize,
    seed: u64,
    max_steps: Option<usize>,
) -> Result<McEstimate, VerifyError> {
    let group = domain.group().clone();
    let n = group.dimension();
    let m = group.horizontal_dim();
    if !(dt > 0.0) || n_paths == 0 {
        return Err(VerifyError::BadInput("need a positive step and path count".into()));
    }
    if start.len() != n {
        return Err(VerifyError::BadInput(format!(
            "start point has {} coordinates, group has {n}",
            start.len()
        )));
    }
    let bound = domain.bound().ok_or_else(|| {
        VerifyError::BadInput(
            "the walk needs a bounded domain; set a gauge bound on it".into(),
        )
    })?;
    if !domain.contains(start) {
        return Err(VerifyError::NonInterior);
    }
    let amat = operator.constant_matrix().ok_or_else(|| {
        VerifyError::BadInput("the walk needs constant operator coefficients".into())
    })?;
    let af: Vec<Vec<f64>> =
        (0..m).map(|i| (0..m).map(|j| to_f64(amat.at(i, j))).collect()).collect();
    let sqrt_a = cholesky(&af).ok_or_else(|| {
        VerifyError::BadInput("coefficient matrix is not positive definite".into())
    })?;
    let max_steps = max_steps.unwrap_or_else(|| (20.0 / dt).ceil() as usize);
    let sqrt_dt = dt.sqrt();
    let law = CompiledLaw::new(&group);
    let rfact: u32 = (1..=group.step() as u32).product();
    let bound_power = bound.powi(2 * rfact as i32);

    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut step = vec![0.0; n];
    let mut buf = vec![0.0; 2 * n];
    let mut zeta = vec![0.0; m];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;

    for path in 0..n_paths {
        let mut rng = derived_rng(seed, path as u64);
        p.copy_from_slice(start);
        let mut running = 0.0;
        let mut exit: Option<Vec<f64>> = None;
        for _ in 0..max_steps {
            running += f.eval(&p)? * dt;
            for z in zeta.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            for i in 0..m {
                let mut v = 0.0;
                for (j, z) in zeta.iter().enumerate().take(i + 1) {
                    v += sqrt_a[i][j] * z;
                }
                step[i] = sqrt_dt * v;
            }
            law.product_into(&p, &step, &mut q, &mut buf);
            // First point at or past the boundary stops the walk. The
            // boundary datum is read right there: our fields evaluate in a
            // neighborhood of the boundary, and for payoffs that extend
            // smoothly this keeps the stopped chain an exact martingale,
            // where projecting back onto the surface would bias it by the
            // mean overshoot.
            if domain.phi_value(&q) >= 0.0
                || gauge_power_f64(&group, &q, rfact) > bound_power
            {
                exit = Some(q.clone());
                break;
            }
            std::mem::swap(&mut p, &mut q);
        }
        let exit = exit.ok_or(VerifyError::StuckPath(max_steps))?;
        let payoff = g.eval(&exit)? - 0.5 * running;
        sum += payoff;
        sum_sq += payoff * payoff;
    }

    let np = n_paths as f64;
    let mean = sum / np;
    let variance = if n_paths > 1 {
        ((sum_sq / np - mean * mean) * np / (np - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate { mean, std_error: (variance / np).sqrt(), n_paths, seed })
}
