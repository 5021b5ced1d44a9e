//! Domains with boundary through the identity: graphs `x_m > h(x-hat)`
//! over the remaining coordinates, and general implicit sets `phi < 0`.

use super::expr::{horizontal_expr_derivative, parse_expr, poly_to_expr, sub, Expr};
use super::sample::gauge_coords_f64;
use super::VerifyError;
use crate::algebra::Group;
use crate::poly::{StratifiedPolynomial, VarSpace};

#[derive(Debug, Clone)]
enum DomainKind {
    /// `x_m > h`, `h` independent of `x_m`, normalized at the identity.
    Graph { h: Expr, h_poly: Option<StratifiedPolynomial> },
    /// `phi < 0`.
    Implicit,
}

/// An open set whose boundary passes through the identity, described by a
/// defining function `phi` with the set being `phi < 0`. Graph domains
/// additionally expose the graph function itself.
#[derive(Debug, Clone)]
pub struct Domain {
    group: Group,
    kind: DomainKind,
    phi: Expr,
    grad: Vec<Expr>,
    hgrad: Vec<Expr>,
    bound: Option<f64>,
}

fn finish(group: &Group, kind: DomainKind, phi: Expr) -> Result<Domain, VerifyError> {
    let grad: Vec<Expr> = (0..group.dimension()).map(|k| phi.partial(k)).collect();
    let hgrad: Vec<Expr> = (0..group.horizontal_dim())
        .map(|i| horizontal_expr_derivative(group, i, &phi))
        .collect::<Result<_, _>>()?;
    Ok(Domain { group: group.clone(), kind, phi, grad, hgrad, bound: None })
}

impl Domain {
    /// The half space `x_m > 0`.
    pub fn flat(group: &Group) -> Domain {
        let phi = neg_var(group.xm_index());
        let kind = DomainKind::Graph {
            h: Expr::Const(crate::scalar::rat_int(0)),
            h_poly: Some(StratifiedPolynomial::zero(group, VarSpace::Single)),
        };
        finish(group, kind, phi).expect("flat domain always builds")
    }

    /// Graph domain from an expression for `h` (may be transcendental).
    pub fn graph_expr(group: &Group, h: Expr) -> Result<Domain, VerifyError> {
        validate_graph_expr(group, &h)?;
        let h_poly = h.to_polynomial(group);
        let phi = sub(h.clone(), Expr::Var(group.xm_index()));
        finish(group, DomainKind::Graph { h, h_poly }, phi)
    }

    /// Graph domain parsed from text, e.g. `"t^2"` or `"1 - cos(x)"`.
    pub fn graph_text(group: &Group, text: &str) -> Result<Domain, VerifyError> {
        Self::graph_expr(group, parse_expr(group, text)?)
    }

    /// Graph domain from an exact polynomial `h`.
    pub fn graph_poly(group: &Group, h: &StratifiedPolynomial) -> Result<Domain, VerifyError> {
        let e = poly_to_expr(h);
        validate_graph_expr(group, &e)?;
        let phi = sub(e.clone(), Expr::Var(group.xm_index()));
        finish(group, DomainKind::Graph { h: e, h_poly: Some(h.clone()) }, phi)
    }

    /// Implicit domain `phi < 0`; no normalization is imposed beyond the
    /// boundary passing near the identity, which the probes check where
    /// they need it.
    pub fn implicit(group: &Group, phi: Expr) -> Result<Domain, VerifyError> {
        finish(group, DomainKind::Implicit, phi)
    }

    pub fn implicit_text(group: &Group, text: &str) -> Result<Domain, VerifyError> {
        Self::implicit(group, parse_expr(group, text)?)
    }

    /// Restricts sampling to the gauge ball of this radius.
    pub fn with_bound(mut self, radius: f64) -> Self {
        self.bound = Some(radius);
        self
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    pub fn is_graph(&self) -> bool {
        matches!(self.kind, DomainKind::Graph { .. })
    }

    pub fn graph_h(&self) -> Option<&Expr> {
        match &self.kind {
            DomainKind::Graph { h, .. } => Some(h),
            DomainKind::Implicit => None,
        }
    }

    pub fn graph_h_poly(&self) -> Option<&StratifiedPolynomial> {
        match &self.kind {
            DomainKind::Graph { h_poly, .. } => h_poly.as_ref(),
            DomainKind::Implicit => None,
        }
    }

    pub fn phi(&self) -> &Expr {
        &self.phi
    }

    pub fn phi_value(&self, coords: &[f64]) -> f64 {
        self.phi.eval_f64(coords)
    }

    /// Euclidean gradient of the defining function.
    pub fn grad_phi(&self, coords: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval_f64(coords)).collect()
    }

    /// Horizontal gradient `(X_1 phi, ..., X_m phi)`.
    pub fn horizontal_grad_phi(&self, coords: &[f64]) -> Vec<f64> {
        self.hgrad.iter().map(|g| g.eval_f64(coords)).collect()
    }

    /// Membership test, honoring the sampling bound when one is set.
    pub fn contains(&self, coords: &[f64]) -> bool {
        if self.phi_value(coords) >= 0.0 {
            return false;
        }
        match self.bound {
            Some(radius) => gauge_coords_f64(&self.group, coords) <= radius,
            None => true,
        }
    }

    /// Moves a point to the boundary: graphs set the graph coordinate,
    /// implicit domains run a gradient-flow projection onto `phi = 0`.
    pub fn lift_to_boundary(&self, coords: &mut [f64]) -> Result<(), VerifyError> {
        match &self.kind {
            DomainKind::Graph { h, .. } => {
                coords[self.group.xm_index()] = 0.0;
                coords[self.group.xm_index()] = h.eval_f64(coords);
                Ok(())
            }
            DomainKind::Implicit => {
                for _ in 0..60 {
                    let v = self.phi_value(coords);
                    if v.abs() < 1e-13 {
                        return Ok(());
                    }
                    let g = self.grad_phi(coords);
                    let norm_sq: f64 = g.iter().map(|x| x * x).sum();
                    if norm_sq < 1e-18 {
                        return Err(VerifyError::DegenerateSample(format!(
                            "vanishing gradient while projecting {coords:?} to the boundary"
                        )));
                    }
                    for (c, gi) in coords.iter_mut().zip(&g) {
                        *c -= v * gi / norm_sq;
                    }
                }
                if self.phi_value(coords).abs() < 1e-9 {
                    Ok(())
                } else {
                    Err(VerifyError::NotFound(format!(
                        "projection to the boundary did not converge near {coords:?}"
                    )))
                }
            }
        }
    }
}

fn neg_var(i: usize) -> Expr {
    super::expr::neg(Expr::Var(i))
}

/// Graph normalization at the identity: `h(0) = 0`, no dependence on the
/// graph coordinate, and vanishing horizontal gradient at the origin (the
/// identity is then a non-characteristic boundary point with inner normal
/// along `x_m`).
fn validate_graph_expr(group: &Group, h: &Expr) -> Result<(), VerifyError> {
    let n = group.dimension();
    let m_bar = group.xm_index();
    if h.references_var(m_bar) {
        return Err(VerifyError::BadInput(
            "graph function must not depend on the graph coordinate".into(),
        ));
    }
    let origin = vec![0.0; n];
    let at0 = h.eval_f64(&origin);
    if !at0.is_finite() || at0.abs() > 1e-12 {
        return Err(VerifyError::BadInput(format!(
            "graph function must vanish at the identity, got {at0}"
        )));
    }
    for i in 0..group.horizontal_dim() {
        if i == m_bar {
            continue;
        }
        let d = h.partial(i).eval_f64(&origin);
        if !d.is_finite() || d.abs() > 1e-12 {
            return Err(VerifyError::BadInput(format!(
                "graph function must have zero horizontal gradient at the identity; \
                 partial in direction {i} is {d}"
            )));
        }
    }
    Ok(())
}
