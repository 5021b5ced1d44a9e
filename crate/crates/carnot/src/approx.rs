//! Boundary approximating polynomials on graph domains.
//!
//! The domain is `{x_m > h(x', y)}` near the identity, where `x_m` is the
//! last horizontal coordinate, `x'` the remaining horizontal ones, and `y`
//! the higher-layer coordinates. `distance_expansion` produces a polynomial
//! jet of the (Euclidean, in exponential coordinates) signed distance to the
//! graph. `assemble_system` and `solve_approximating` then run the
//! coefficient-matching construction: find `P` of degree `< k` with
//!
//!   `L(d * P) = f + O(degree k - 1)`   at the identity,
//!
//! so that `d * P` absorbs the boundary data of the Dirichlet problem up to
//! order `k`. `harmonic_companions` enumerates the kernel of the flat
//! construction, and `verify_approximating` re-checks any candidate through
//! horizontal derivatives, a route independent of the assembly.

use crate::algebra::Group;
use crate::diffop::{sub_laplacian, DiffOperator, DiffOpError};
use crate::linalg::{ExactLu, LinalgError, Mat};
use crate::poly::{monomial_basis, MultiIndex, PolyError, StratifiedPolynomial, VarSpace};
use crate::scalar::{self, Rational};
use crate::taylor::{derivative_table, TaylorError};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ApproxError {
    #[error("invalid graph function: {0}")]
    BadGraph(String),
    #[error("characteristic boundary point: the distance gradient degenerates")]
    CharacteristicPoint,
    #[error("matching matrix is not lower triangular: row {row} meets column {col}")]
    OffTriangular { row: String, col: String },
    #[error("matching system is singular")]
    SingularSystem,
    #[error("free coefficient key {0} does not name a free column")]
    FreeKeyInvalid(String),
    #[error("approximation order must be at least 2, got {0}")]
    OrderTooSmall(u32),
    #[error("polynomial error: {0}")]
    Poly(#[from] PolyError),
    #[error("operator error: {0}")]
    DiffOp(#[from] DiffOpError),
    #[error("derivative error: {0}")]
    Taylor(#[from] TaylorError),
    #[error("linear algebra error: {0}")]
    Linalg(#[from] LinalgError),
}

/// Polynomial model of the boundary distance near the identity.
///
/// `poly_part` is a polynomial whose weighted-degree-one part is
/// `grad_norm * x_m`; when `exact_jet` holds it agrees with the true
/// distance to the graph up to weighted degree `order`. `grad_norm` is
/// `1/sqrt(1 + |grad_y h(0)|^2)`; `grad_norm_exact` records whether that
/// square root is an exact rational (otherwise it is a Newton refinement
/// far below any tolerance used downstream).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceModel {
    group: Group,
    order: u32,
    grad_norm: Rational,
    grad_norm_exact: bool,
    exact_jet: bool,
    poly_part: StratifiedPolynomial,
}

impl DistanceModel {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn grad_norm(&self) -> &Rational {
        &self.grad_norm
    }

    pub fn grad_norm_exact(&self) -> bool {
        self.grad_norm_exact
    }

    pub fn exact_jet(&self) -> bool {
        self.exact_jet
    }

    pub fn poly_part(&self) -> &StratifiedPolynomial {
        &self.poly_part
    }

    /// Wraps a caller-supplied polynomial as a distance model. The gradient
    /// norm is read off the linear `x_m` coefficient and must be nonzero;
    /// no exactness is claimed. Useful for feeding explicit `d` expressions
    /// into the solvers; models with sideways linear parts will trip the
    /// triangular mode's order check.
    pub fn from_polynomial(
        group: &Group,
        poly_part: StratifiedPolynomial,
        order: u32,
    ) -> Result<DistanceModel, ApproxError> {
        if poly_part.group() != group || poly_part.space() != VarSpace::Single {
            return Err(ApproxError::Poly(PolyError::GroupMismatch));
        }
        let unit = MultiIndex::unit(group.dimension(), group.xm_index());
        let grad_norm = poly_part.coeff(&unit);
        if grad_norm.is_zero() {
            return Err(ApproxError::CharacteristicPoint);
        }
        Ok(DistanceModel {
            group: group.clone(),
            order,
            grad_norm,
            grad_norm_exact: true,
            exact_jet: false,
            poly_part,
        })
    }
}

/// The flat half-space `{x_m > 0}`: the distance is exactly `x_m`.
pub fn flat_distance(group: &Group, order: u32) -> DistanceModel {
    let poly_part = StratifiedPolynomial::variable(group, VarSpace::Single, group.xm_index())
        .expect("graph coordinate exists");
    DistanceModel {
        group: group.clone(),
        order,
        grad_norm: Rational::one(),
        grad_norm_exact: true,
        exact_jet: true,
        poly_part,
    }
}

/// `sqrt(1 + s)` as a polynomial jet, for `s` with zero constant term,
/// truncated at weighted degree `k`.
fn sqrt_one_plus_jet(s: &StratifiedPolynomial, k: u32) -> Result<StratifiedPolynomial, PolyError> {
    let group = s.group().clone();
    let mut out = StratifiedPolynomial::one(&group, VarSpace::Single);
    let mut power = StratifiedPolynomial::one(&group, VarSpace::Single);
    // Binomial coefficients (1/2 choose n), built incrementally.
    let mut coeff = Rational::one();
    let half = scalar::rat(1, 2);
    for n in 1..=k {
        coeff *= (&half - Rational::from_integer((n as i64 - 1).into()))
            / Rational::from_integer((n as i64).into());
        power = power.mul(s)?.truncate(k);
        if power.is_zero() {
            break;
        }
        out = out.add(&power.scale(&coeff))?;
    }
    Ok(out.truncate(k))
}

/// Newton refinement of `sqrt(q)` from an `f64` seed; used only when the
/// root is irrational, and accurate far beyond `f64`.
fn newton_sqrt(q: &Rational, iterations: u32) -> Rational {
    let seed = scalar::to_f64(q).sqrt();
    let mut x = scalar::from_f64(seed).filter(|v| v.is_positive()).unwrap_or_else(Rational::one);
    for _ in 0..iterations {
        x = (&x + q / &x) / Rational::from_integer(2.into());
    }
    x
}

fn validate_graph(
    group: &Group,
    h: &StratifiedPolynomial,
) -> Result<(), ApproxError> {
    if h.group() != group || h.space() != VarSpace::Single {
        return Err(ApproxError::BadGraph("graph function lives in the wrong space".into()));
    }
    let n = group.dimension();
    let m_bar = group.xm_index();
    if !h.coeff(&MultiIndex::zero(n)).is_zero() {
        return Err(ApproxError::BadGraph("graph function must vanish at the origin".into()));
    }
    if h.terms().any(|(idx, _)| idx.exponents()[m_bar] > 0) {
        return Err(ApproxError::BadGraph(
            "graph function must not depend on the graph coordinate".into(),
        ));
    }
    for i in 0..group.horizontal_dim() {
        if i == m_bar {
            continue;
        }
        if !h.coeff(&MultiIndex::unit(n, i)).is_zero() {
            return Err(ApproxError::BadGraph(
                "graph must be tangent to the remaining horizontal directions at the origin"
                    .into(),
            ));
        }
    }
    Ok(())
}

/// Distance jet for the graph domain `{x_m > h}` at the identity, truncated
/// at weighted degree `order`.
///
/// Normalization expected of `h`: `h(0) = 0`, no dependence on `x_m`, and no
/// linear part in the other horizontal coordinates (so the point is
/// non-characteristic and the inward horizontal normal is `x_m`). Linear
/// dependence on higher-layer coordinates is allowed.
///
/// Exactness:
/// - if `h` has no linear part at all, the full Euclidean foot-point jet is
///   computed exactly in rational arithmetic (`exact_jet`, `grad_norm = 1`);
/// - if `h` is affine in the higher-layer coordinates, the distance to the
///   hyperplane is exact: `grad_norm * (x_m - h)`, with `grad_norm` exact
///   whenever `1 + |grad h|^2` is a rational square;
/// - otherwise the model `grad_norm * (x_m - h)` is returned with
///   `exact_jet = false`: it has the correct gradient and vanishes on the
///   graph, which is what the matching construction consumes.
pub fn distance_expansion(
    group: &Group,
    h: &StratifiedPolynomial,
    order: u32,
) -> Result<DistanceModel, ApproxError> {
    validate_graph(group, h)?;
    let n = group.dimension();
    let m_bar = group.xm_index();
    let xm = StratifiedPolynomial::variable(group, VarSpace::Single, m_bar)?;

    // Linear part of h over the higher layers.
    let mut linear = Vec::new();
    for j in group.horizontal_dim()..n {
        let c = h.coeff(&MultiIndex::unit(n, j));
        if !c.is_zero() {
            linear.push((j, c));
        }
    }

    if linear.is_empty() {
        // Foot-point iteration: u* = u + lam * grad h(u*), lam = x_m - h(u*).
        // Each pass raises the Euclidean (hence weighted) degree of the
        // correction, so truncation at `order` reaches a fixed point.
        let grads: Vec<StratifiedPolynomial> =
            (0..n).map(|i| h.partial(i)).collect::<Result<_, _>>()?;
        let mut images: Vec<StratifiedPolynomial> = (0..n)
            .map(|i| StratifiedPolynomial::variable(group, VarSpace::Single, i))
            .collect::<Result<_, _>>()?;
        for _ in 0..=order {
            let lam = xm.sub(&h.substitute(&images)?)?.truncate(order);
            let mut next = images.clone();
            let mut changed = false;
            for (i, next_i) in next.iter_mut().enumerate() {
                if i == m_bar {
                    continue;
                }
                let gi = grads[i].substitute(&images)?.truncate(order);
                if gi.is_zero() {
                    continue;
                }
                let candidate = StratifiedPolynomial::variable(group, VarSpace::Single, i)?
                    .add(&lam.mul(&gi)?)?
                    .truncate(order);
                if candidate != *next_i {
                    changed = true;
                    *next_i = candidate;
                }
            }
            images = next;
            if !changed {
                break;
            }
        }
        let lam = xm.sub(&h.substitute(&images)?)?.truncate(order);
        let mut s = StratifiedPolynomial::zero(group, VarSpace::Single);
        for (i, g) in grads.iter().enumerate() {
            if i == m_bar || g.is_zero() {
                continue;
            }
            let gi = g.substitute(&images)?.truncate(order);
            s = s.add(&gi.mul(&gi)?.truncate(order))?;
        }
        let poly_part = lam.mul(&sqrt_one_plus_jet(&s, order)?)?.truncate(order);
        return Ok(DistanceModel {
            group: group.clone(),
            order,
            grad_norm: Rational::one(),
            grad_norm_exact: true,
            exact_jet: true,
            poly_part,
        });
    }

    // Nonzero higher-layer linear part: gradient norm at the origin.
    let one_plus: Rational = Rational::one()
        + linear.iter().map(|(_, c)| c * c).fold(Rational::zero(), |acc, v| acc + v);
    let inv = Rational::one() / one_plus;
    let (grad_norm, grad_norm_exact) = match scalar::exact_sqrt(&inv) {
        Some(r) => (r, true),
        None => (newton_sqrt(&inv, 6), false),
    };
    if !grad_norm.is_positive() {
        return Err(ApproxError::CharacteristicPoint);
    }
    let affine = h
        .terms()
        .all(|(idx, _)| idx.length() == 1 && idx.exponents()[group.horizontal_dim()..].iter().any(|&e| e > 0));
    let poly_part = xm.sub(&h.truncate(order))?.scale(&grad_norm);
    Ok(DistanceModel {
        group: group.clone(),
        order,
        grad_norm,
        grad_norm_exact,
        exact_jet: affine && grad_norm_exact,
        poly_part,
    })
}

/// The coefficient-matching system for one `(operator, distance, order)`
/// triple. Columns index the candidate monomials of `P` (degree `< k`),
/// rows the matched degrees of `L(d P)` (degree `<= k - 2`). Column `J` is
/// the coefficient vector of `L(d z^J)` truncated at degree `k - 2`.
///
/// Columns with no `x_m` factor are free; the rest are determined, in
/// bijection with rows via `J = R + e_m`.
#[derive(Debug, Clone)]
pub struct ApproxSystem {
    group: Group,
    order: u32,
    rows: Vec<MultiIndex>,
    cols: Vec<MultiIndex>,
    matrix: Mat,
    free_cols: Vec<usize>,
    determined_cols: Vec<usize>,
}

impl ApproxSystem {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn rows(&self) -> &[MultiIndex] {
        &self.rows
    }

    pub fn cols(&self) -> &[MultiIndex] {
        &self.cols
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    /// Column indices with no `x_m` factor, in the global monomial order.
    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    /// For each row index, the column index of its determined unknown
    /// `J = R + e_m`.
    pub fn determined_cols(&self) -> &[usize] {
        &self.determined_cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        self.matrix.at(row, col)
    }
}

/// Builds the matching system for `L(d P) = f mod degree k - 1`.
pub fn assemble_system(
    operator: &DiffOperator,
    distance: &DistanceModel,
    k: u32,
) -> Result<ApproxSystem, ApproxError> {
    if k < 2 {
        return Err(ApproxError::OrderTooSmall(k));
    }
    let group = operator.group().clone();
    if distance.group() != &group {
        return Err(ApproxError::Poly(PolyError::GroupMismatch));
    }
    let rows = monomial_basis(&group, k - 2);
    let cols = monomial_basis(&group, k - 1);
    let row_index: BTreeMap<&MultiIndex, usize> =
        rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut matrix = Mat::zeros(rows.len(), cols.len());
    for (j, col) in cols.iter().enumerate() {
        let z = StratifiedPolynomial::monomial(
            &group,
            VarSpace::Single,
            col.clone(),
            Rational::one(),
        )?;
        let image = operator.apply(&distance.poly_part().mul(&z)?)?.truncate(k - 2);
        for (idx, c) in image.terms() {
            let ri = row_index[idx];
            matrix.set(ri, j, c.clone());
        }
    }
    let col_index: BTreeMap<&MultiIndex, usize> =
        cols.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let free_cols: Vec<usize> = cols
        .iter()
        .enumerate()
        .filter(|(_, c)| c.beta_xm(&group) == 0)
        .map(|(i, _)| i)
        .collect();
    let bump = MultiIndex::unit(group.dimension(), group.xm_index());
    let determined_cols: Vec<usize> =
        rows.iter().map(|r| col_index[&r.plus(&bump)]).collect();
    debug_assert_eq!(free_cols.len() + determined_cols.len(), cols.len());
    Ok(ApproxSystem { group, order: k, rows, cols, matrix, free_cols, determined_cols })
}

/// How to solve the matching system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    /// Forward substitution down the determined columns in the global
    /// monomial order; fails with `OffTriangular` if an entry above the
    /// diagonal is nonzero. This is the fast path for the flat half-space.
    Triangular,
    /// Exact Gaussian elimination on the determined columns; handles
    /// perturbed domains and operators.
    General,
}

/// An approximating polynomial with its residual certificate: the values of
/// `X^I (L(d P) - f)` at the identity for every horizontal word with
/// `|I| <= k - 2`, computed through vector fields rather than the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub p: StratifiedPolynomial,
    pub free_assignment: BTreeMap<MultiIndex, Rational>,
    pub residuals: Vec<(Vec<usize>, Rational)>,
    pub mode: SolveMode,
}

impl ApproxResult {
    pub fn residuals_all_zero(&self) -> bool {
        self.residuals.iter().all(|(_, v)| v.is_zero())
    }

    pub fn max_residual_f64(&self) -> f64 {
        self.residuals
            .iter()
            .map(|(_, v)| scalar::to_f64(v).abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `L(d P) = f mod degree k - 1` for `P` of degree `< k`, with the
/// free coefficients pinned to `free_assignment` (absent keys default to
/// zero). Returns the polynomial together with an independently computed
/// residual certificate.
pub fn solve_approximating(
    operator: &DiffOperator,
    distance: &DistanceModel,
    f: &StratifiedPolynomial,
    k: u32,
    free_assignment: &BTreeMap<MultiIndex, Rational>,
    mode: SolveMode,
) -> Result<ApproxResult, ApproxError> {
    if distance.grad_norm().is_zero() {
        return Err(ApproxError::CharacteristicPoint);
    }
    let system = assemble_system(operator, distance, k)?;
    solve_assembled(&system, operator, distance, f, free_assignment, mode)
}

/// Same as `solve_approximating`, reusing an already assembled system (the
/// matrix depends only on `(operator, distance, k)`, not on `f`).
pub fn solve_assembled(
    system: &ApproxSystem,
    operator: &DiffOperator,
    distance: &DistanceModel,
    f: &StratifiedPolynomial,
    free_assignment: &BTreeMap<MultiIndex, Rational>,
    mode: SolveMode,
) -> Result<ApproxResult, ApproxError> {
    let group = system.group().clone();
    let k = system.order();
    if f.group() != &group || f.space() != VarSpace::Single {
        return Err(ApproxError::Poly(PolyError::GroupMismatch));
    }
    let col_index: BTreeMap<&MultiIndex, usize> =
        system.cols.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let free_set: std::collections::BTreeSet<usize> = system.free_cols.iter().copied().collect();

    // Pin the free coefficients.
    let mut coeffs: Vec<Rational> = vec![Rational::zero(); system.cols.len()];
    let mut full_assignment: BTreeMap<MultiIndex, Rational> = system
        .free_cols
        .iter()
        .map(|&j| (system.cols[j].clone(), Rational::zero()))
        .collect();
    for (key, value) in free_assignment {
        let j = *col_index
            .get(key)
            .filter(|j| free_set.contains(j))
            .ok_or_else(|| ApproxError::FreeKeyInvalid(render_monomial(&group, key)))?;
        coeffs[j] = value.clone();
        full_assignment.insert(key.clone(), value.clone());
    }

    // Right-hand side: coefficients of f up to degree k - 2, minus the free
    // columns' contribution.
    let f_low = f.truncate(k - 2);
    let mut rhs: Vec<Rational> = system
        .rows
        .iter()
        .map(|r| f_low.coeff(r))
        .collect();
    for &j in &system.free_cols {
        if coeffs[j].is_zero() {
            continue;
        }
        for (ri, value) in rhs.iter_mut().enumerate() {
            *value -= system.matrix.at(ri, j) * &coeffs[j];
        }
    }

    match mode {
        SolveMode::Triangular => {
            // Determined columns ordered like the rows; entries strictly
            // above the diagonal must vanish.
            for i in 0..system.rows.len() {
                for jrow in (i + 1)..system.rows.len() {
                    let col = system.determined_cols[jrow];
                    if !system.matrix.at(i, col).is_zero() {
                        return Err(ApproxError::OffTriangular {
                            row: render_monomial(&group, &system.rows[i]),
                            col: render_monomial(&group, &system.cols[col]),
                        });
                    }
                }
            }
            for i in 0..system.rows.len() {
                let mut acc = rhs[i].clone();
                for jrow in 0..i {
                    let col = system.determined_cols[jrow];
                    acc -= system.matrix.at(i, col) * &coeffs[col];
                }
                let diag = system.matrix.at(i, system.determined_cols[i]);
                if diag.is_zero() {
                    return Err(ApproxError::SingularSystem);
                }
                coeffs[system.determined_cols[i]] = acc / diag;
            }
        }
        SolveMode::General => {
            let nd = system.determined_cols.len();
            let mut square = Mat::zeros(system.rows.len(), nd);
            for i in 0..system.rows.len() {
                for (jj, &col) in system.determined_cols.iter().enumerate() {
                    square.set(i, jj, system.matrix.at(i, col).clone());
                }
            }
            let lu = ExactLu::new(&square).map_err(|_| ApproxError::SingularSystem)?;
            let solution = lu.solve(&rhs);
            for (jj, &col) in system.determined_cols.iter().enumerate() {
                coeffs[col] = solution[jj].clone();
            }
        }
    }

    let mut p = StratifiedPolynomial::zero(&group, VarSpace::Single);
    for (j, c) in coeffs.into_iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        p = p.add(&StratifiedPolynomial::monomial(
            &group,
            VarSpace::Single,
            system.cols[j].clone(),
            c,
        )?)?;
    }
    let residuals = verify_approximating(operator, distance, &p, f, k)?;
    Ok(ApproxResult { p, free_assignment: full_assignment, residuals, mode })
}

/// Residual certificate through an independent route: horizontal-derivative
/// values of `L(d P) - f` at the identity for every word of length at most
/// `k - 2`. All must vanish for a valid approximating polynomial.
pub fn verify_approximating(
    operator: &DiffOperator,
    distance: &DistanceModel,
    p: &StratifiedPolynomial,
    f: &StratifiedPolynomial,
    k: u32,
) -> Result<Vec<(Vec<usize>, Rational)>, ApproxError> {
    if k < 2 {
        return Err(ApproxError::OrderTooSmall(k));
    }
    let group = operator.group().clone();
    let g = operator.apply(&distance.poly_part().mul(p)?)?.sub(f)?;
    let origin = vec![Rational::zero(); group.dimension()];
    let table = derivative_table(&g, &origin, k - 2)?;
    Ok(table.into_iter().collect())
}

/// Companion polynomials of degree at most `kappa`: a basis of the
/// `Q in P_kappa` with `Delta(x_m Q) = 0`, one per free column of the flat
/// sub-Laplacian system, each re-verified by applying the operator.
pub fn harmonic_companions(
    group: &Group,
    kappa: u32,
) -> Result<Vec<StratifiedPolynomial>, ApproxError> {
    let lap = sub_laplacian(group);
    let xm = StratifiedPolynomial::variable(group, VarSpace::Single, group.xm_index())?;
    if kappa == 0 {
        let one = StratifiedPolynomial::one(group, VarSpace::Single);
        debug_assert!(lap.apply(&xm)?.is_zero());
        return Ok(vec![one]);
    }
    let k = kappa + 1;
    let distance = flat_distance(group, k);
    let system = assemble_system(&lap, &distance, k)?;
    let zero = StratifiedPolynomial::zero(group, VarSpace::Single);
    let mut companions = Vec::new();
    for &j in system.free_cols() {
        let mut assignment = BTreeMap::new();
        assignment.insert(system.cols()[j].clone(), Rational::one());
        let result =
            solve_assembled(&system, &lap, &distance, &zero, &assignment, SolveMode::Triangular)?;
        // Q has degree <= kappa, so Delta(x_m Q) has degree <= kappa - 1 and
        // the truncated matching already forces it to vanish identically;
        // re-check through the operator anyway.
        let check = lap.apply(&xm.mul(&result.p)?)?;
        if !check.is_zero() {
            return Err(ApproxError::SingularSystem);
        }
        companions.push(result.p);
    }
    Ok(companions)
}

/// Graph function for the domain dilated by `1/sigma`:
/// `h_sigma = dilate(h, sigma) / sigma`.
pub fn rescale_graph(
    h: &StratifiedPolynomial,
    sigma: &Rational,
) -> Result<StratifiedPolynomial, ApproxError> {
    Ok(h.dilate(sigma)?.scale(&(Rational::one() / sigma)))
}

/// Right-hand side for the dilated problem: `sigma^2 * dilate(f, sigma)`.
pub fn rescale_rhs(
    f: &StratifiedPolynomial,
    sigma: &Rational,
) -> Result<StratifiedPolynomial, ApproxError> {
    Ok(f.dilate(sigma)?.scale(&(sigma * sigma)))
}

/// One scale of the rescaling driver.
#[derive(Debug, Clone)]
pub struct ScaleStep {
    pub sigma: Rational,
    pub distance: DistanceModel,
    pub result: ApproxResult,
}

/// Runs the matching construction across scales: for each `sigma`, dilate
/// the graph and the data (`h_sigma = dilate(h, sigma)/sigma`,
/// `f_sigma = sigma^2 dilate(f, sigma)`, operator coefficients dilated),
/// rebuild the distance jet, and solve with zero free coefficients.
pub fn rescale_solve(
    operator: &DiffOperator,
    h: &StratifiedPolynomial,
    f: &StratifiedPolynomial,
    k: u32,
    sigmas: &[Rational],
    mode: SolveMode,
) -> Result<Vec<ScaleStep>, ApproxError> {
    let group = operator.group().clone();
    let m = group.horizontal_dim();
    let mut steps = Vec::new();
    for sigma in sigmas {
        if !sigma.is_positive() {
            return Err(ApproxError::Poly(PolyError::NonpositiveLambda));
        }
        let entries: Vec<Vec<StratifiedPolynomial>> = (0..m)
            .map(|i| (0..m).map(|j| operator.entry(i, j).dilate(sigma)).collect())
            .collect::<Result<Vec<Vec<_>>, _>>()?;
        let op_sigma = crate::diffop::operator_from_poly_matrix(&group, entries)?;
        let h_sigma = rescale_graph(h, sigma)?;
        let f_sigma = rescale_rhs(f, sigma)?;
        let distance = distance_expansion(&group, &h_sigma, k)?;
        let result =
            solve_approximating(&op_sigma, &distance, &f_sigma, k, &BTreeMap::new(), mode)?;
        steps.push(ScaleStep { sigma: sigma.clone(), distance, result });
    }
    Ok(steps)
}

pub fn render_monomial(group: &Group, index: &MultiIndex) -> String {
    StratifiedPolynomial::monomial(group, VarSpace::Single, index.clone(), Rational::one())
        .map(|p| p.render())
        .unwrap_or_else(|_| format!("{:?}", index.exponents()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{engel, heisenberg};
    use crate::diffop::operator_from_matrix;
    use crate::group::GroupElement;
    use crate::linalg;
    use crate::poly::global_order;
    use crate::scalar::{rat, rat_int};

    fn h1() -> Group {
        heisenberg(1)
    }

    fn var(g: &Group, i: usize) -> StratifiedPolynomial {
        StratifiedPolynomial::variable(g, VarSpace::Single, i).unwrap()
    }

    fn mono(g: &Group, exps: &[u32]) -> MultiIndex {
        MultiIndex::new(exps.to_vec())
    }

    #[test]
    fn flat_distance_is_the_graph_coordinate() {
        let g = h1();
        let d = flat_distance(&g, 4);
        assert_eq!(d.poly_part(), &var(&g, 1));
        assert_eq!(d.grad_norm(), &rat_int(1));
        assert!(d.exact_jet());
    }

    #[test]
    fn graph_validation_rejects_bad_normalizations() {
        let g = h1();
        let (x, y, t) = (var(&g, 0), var(&g, 1), var(&g, 2));
        // Depends on the graph coordinate x_m = y.
        assert!(matches!(
            distance_expansion(&g, &y.pow(2), 3),
            Err(ApproxError::BadGraph(_))
        ));
        // Nonzero at the origin.
        let shifted = t.add(&StratifiedPolynomial::one(&g, VarSpace::Single)).unwrap();
        assert!(matches!(distance_expansion(&g, &shifted, 3), Err(ApproxError::BadGraph(_))));
        // Linear part in the remaining horizontal direction.
        assert!(matches!(distance_expansion(&g, &x, 3), Err(ApproxError::BadGraph(_))));
        // A purely quadratic horizontal graph is fine.
        assert!(distance_expansion(&g, &x.pow(2), 3).is_ok());
    }

    #[test]
    fn zero_graph_recovers_the_flat_model() {
        let g = h1();
        let zero = StratifiedPolynomial::zero(&g, VarSpace::Single);
        let d = distance_expansion(&g, &zero, 4).unwrap();
        assert_eq!(d.poly_part(), &var(&g, 1));
        assert_eq!(d.grad_norm(), &rat_int(1));
        assert!(d.exact_jet() && d.grad_norm_exact());
    }

    #[test]
    fn parabolic_graph_distance_matches_the_hand_expansion() {
        // h = t^2 on the first Heisenberg group: t has weight 2, so h has
        // weighted degree 4 and the first correction to y - t^2 appears at
        // weighted degree 6; at order 4 the jet is exactly y - t^2.
        let g = h1();
        let t = var(&g, 2);
        let d = distance_expansion(&g, &t.pow(2), 4).unwrap();
        let expected = var(&g, 1).sub(&t.pow(2)).unwrap();
        assert_eq!(d.poly_part(), &expected);
        assert!(d.exact_jet());
        assert_eq!(d.grad_norm(), &rat_int(1));
    }

    #[test]
    fn horizontal_parabola_gets_curvature_corrections() {
        // h = x^2: the foot-point correction enters at weighted degree 3
        // through the x-gradient. Check the defining properties instead of
        // a closed form: the jet vanishes on the graph and satisfies the
        // Euclidean eikonal equation to the expected orders.
        let g = h1();
        let x = var(&g, 0);
        let k = 5;
        let d = distance_expansion(&g, &x.pow(2), k).unwrap();
        assert!(d.exact_jet());
        // Substitute y = h(x, t) = x^2: the distance vanishes on the graph.
        let images = vec![var(&g, 0), x.pow(2), var(&g, 2)];
        let on_graph = d.poly_part().substitute(&images).unwrap().truncate(k);
        assert!(on_graph.is_zero(), "on-graph values: {}", on_graph.render());
        // Euclidean eikonal: sum of squared coordinate partials is 1 + O(k-1).
        let mut grad_sq = StratifiedPolynomial::zero(&g, VarSpace::Single);
        for i in 0..3 {
            let di = d.poly_part().partial(i).unwrap();
            grad_sq = grad_sq.add(&di.mul(&di).unwrap()).unwrap();
        }
        let defect = grad_sq
            .sub(&StratifiedPolynomial::one(&g, VarSpace::Single))
            .unwrap()
            .truncate(k - 2);
        assert!(defect.is_zero(), "eikonal defect: {}", defect.render());
        // The linear part is exactly the graph coordinate.
        assert_eq!(d.poly_part().homogeneous_component(1), var(&g, 1));
    }

    #[test]
    fn deep_parabolic_graph_on_engel_vanishes_on_its_graph() {
        // Engel group, h = z^2 (z in layer two, t in layer three): exercises
        // the iteration across layers. x_m = y here (index 1).
        let g = engel();
        let z = var(&g, 2);
        let k = 6;
        let d = distance_expansion(&g, &z.pow(2), k).unwrap();
        assert!(d.exact_jet());
        let images = vec![var(&g, 0), z.pow(2), var(&g, 2), var(&g, 3)];
        let on_graph = d.poly_part().substitute(&images).unwrap().truncate(k);
        assert!(on_graph.is_zero(), "on-graph values: {}", on_graph.render());
    }

    #[test]
    fn affine_graph_distance_is_exact_with_rational_norm() {
        // h = (3/4) t: 1 + 9/16 = 25/16, so the gradient norm is 4/5 exactly.
        let g = h1();
        let t = var(&g, 2);
        let h = t.scale(&rat(3, 4));
        let d = distance_expansion(&g, &h, 4).unwrap();
        assert_eq!(d.grad_norm(), &rat(4, 5));
        assert!(d.grad_norm_exact() && d.exact_jet());
        let expected = var(&g, 1).sub(&h).unwrap().scale(&rat(4, 5));
        assert_eq!(d.poly_part(), &expected);
    }

    #[test]
    fn irrational_norm_is_flagged_and_accurate() {
        // h = t: 1 + 1 = 2, gradient norm 1/sqrt(2), irrational.
        let g = h1();
        let t = var(&g, 2);
        let d = distance_expansion(&g, &t, 3).unwrap();
        assert!(!d.grad_norm_exact());
        assert!(!d.exact_jet());
        let approx = scalar::to_f64(d.grad_norm());
        assert!((approx - 0.5f64.sqrt()).abs() < 1e-14);
        // The square of the stored value is extremely close to 1/2.
        let sq = d.grad_norm() * d.grad_norm();
        let err = sq - rat(1, 2);
        assert!(scalar::to_f64(&err).abs() < 1e-60);
    }

    #[test]
    fn nonlinear_tilted_graph_is_a_model_not_a_jet() {
        let g = h1();
        let t = var(&g, 2);
        let h = t.scale(&rat(3, 4)).add(&t.pow(2)).unwrap();
        let d = distance_expansion(&g, &h, 4).unwrap();
        assert!(!d.exact_jet());
        assert!(d.grad_norm_exact());
        assert_eq!(d.grad_norm(), &rat(4, 5));
        // The model still vanishes on the graph and has the right gradient.
        let images = vec![var(&g, 0), h.clone(), var(&g, 2)];
        assert!(d.poly_part().substitute(&images).unwrap().truncate(4).is_zero());
    }

    #[test]
    fn flat_system_on_h1_matches_hand_rows_at_k3() {
        // Rows P_1 = {1, x, y}, columns P_2. Hand values of Delta(y z^J):
        //   row 1: 2 at column y
        //   row x: 2 at column xy, 1 at column t
        //   row y: 2 at column x^2, 6 at column y^2
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let s = assemble_system(&lap, &d, 3).unwrap();
        assert_eq!(s.rows().len(), 3);
        assert_eq!(s.cols().len(), 7);
        let col = |exps: &[u32]| s.cols().iter().position(|c| c == &mono(&g, exps)).unwrap();
        let row = |exps: &[u32]| s.rows().iter().position(|r| r == &mono(&g, exps)).unwrap();
        let mut expected = Mat::zeros(3, 7);
        expected.set(row(&[0, 0, 0]), col(&[0, 1, 0]), rat_int(2));
        expected.set(row(&[1, 0, 0]), col(&[1, 1, 0]), rat_int(2));
        expected.set(row(&[1, 0, 0]), col(&[0, 0, 1]), rat_int(1));
        expected.set(row(&[0, 1, 0]), col(&[2, 0, 0]), rat_int(2));
        expected.set(row(&[0, 1, 0]), col(&[0, 2, 0]), rat_int(6));
        for i in 0..3 {
            for j in 0..7 {
                assert_eq!(s.entry(i, j), expected.at(i, j), "entry ({i}, {j})");
            }
        }
        // Free columns are exactly the x_m-free monomials of P_2.
        let free: Vec<&MultiIndex> = s.free_cols().iter().map(|&j| &s.cols()[j]).collect();
        assert_eq!(
            free,
            vec![&mono(&g, &[0, 0, 0]), &mono(&g, &[1, 0, 0]), &mono(&g, &[2, 0, 0]), &mono(&g, &[0, 0, 1])]
        );
    }

    #[test]
    fn flat_diagonal_follows_the_factorial_rule() {
        // Flat half-space, sub-Laplacian: the determined diagonal entry for
        // row R is (beta + 1)(beta + 2) where beta is the x_m-exponent of R.
        for (g, k) in [(h1(), 5u32), (engel(), 4u32)] {
            let lap = sub_laplacian(&g);
            let d = flat_distance(&g, k);
            let s = assemble_system(&lap, &d, k).unwrap();
            for (i, r) in s.rows().iter().enumerate() {
                let beta = r.beta_xm(&g) as i64;
                let expected = rat_int((beta + 1) * (beta + 2));
                assert_eq!(
                    s.entry(i, s.determined_cols()[i]),
                    &expected,
                    "row {} on {}",
                    render_monomial(&g, r),
                    g.name()
                );
                // And everything above the diagonal vanishes (triangularity,
                // checked entry-wise).
                for jrow in (i + 1)..s.rows().len() {
                    assert!(s.entry(i, s.determined_cols()[jrow]).is_zero());
                }
            }
        }
    }

    #[test]
    fn tilted_diagonal_scales_by_the_gradient_norm() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let t = var(&g, 2);
        let d = distance_expansion(&g, &t.scale(&rat(3, 4)), 3).unwrap();
        let s = assemble_system(&lap, &d, 3).unwrap();
        for (i, r) in s.rows().iter().enumerate() {
            let beta = r.beta_xm(&g) as i64;
            let expected = rat(4, 5) * rat_int((beta + 1) * (beta + 2));
            assert_eq!(s.entry(i, s.determined_cols()[i]), &expected);
        }
    }

    #[test]
    fn worked_heisenberg_solve_gives_xy_over_two() {
        // Delta(y P) = x to order k = 3 with zero free part: P = xy/2.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let f = var(&g, 0);
        let result =
            solve_approximating(&lap, &d, &f, 3, &BTreeMap::new(), SolveMode::Triangular)
                .unwrap();
        let expected = var(&g, 0).mul(&var(&g, 1)).unwrap().scale(&rat(1, 2));
        assert_eq!(result.p, expected);
        assert!(result.residuals_all_zero());
        // Words of length <= 1 are certified: the empty word and both
        // horizontal directions.
        assert_eq!(result.residuals.len(), 3);
    }

    #[test]
    fn constant_data_solve_gives_y_over_two() {
        // Delta(y P) = 1 to order k = 2: P = y/2.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 2);
        let f = StratifiedPolynomial::one(&g, VarSpace::Single);
        let result =
            solve_approximating(&lap, &d, &f, 2, &BTreeMap::new(), SolveMode::Triangular)
                .unwrap();
        assert_eq!(result.p, var(&g, 1).scale(&rat(1, 2)));
        assert!(result.residuals_all_zero());
    }

    #[test]
    fn general_mode_agrees_with_triangular_on_flat_data() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 4);
        let f = var(&g, 0).mul(&var(&g, 2)).unwrap();
        let a = solve_approximating(&lap, &d, &f, 4, &BTreeMap::new(), SolveMode::Triangular)
            .unwrap();
        let b =
            solve_approximating(&lap, &d, &f, 4, &BTreeMap::new(), SolveMode::General).unwrap();
        assert_eq!(a.p, b.p);
        assert!(a.residuals_all_zero() && b.residuals_all_zero());
    }

    #[test]
    fn perturbed_graph_domains_stay_triangular() {
        // Graph perturbations of the distance only raise weighted degrees,
        // so their entries land strictly below the diagonal: both modes
        // succeed and agree.
        let g = h1();
        let lap = sub_laplacian(&g);
        let t = var(&g, 2);
        let k = 4;
        let d = distance_expansion(&g, &t.pow(2), k).unwrap();
        let f = var(&g, 0);
        let tri = solve_approximating(&lap, &d, &f, k, &BTreeMap::new(), SolveMode::Triangular)
            .unwrap();
        let gen =
            solve_approximating(&lap, &d, &f, k, &BTreeMap::new(), SolveMode::General).unwrap();
        assert_eq!(tri.p, gen.p);
        assert!(tri.residuals_all_zero() && gen.residuals_all_zero());
        // The leading part still matches the flat solve.
        assert_eq!(
            tri.p.homogeneous_component(2),
            var(&g, 0).mul(&var(&g, 1)).unwrap().scale(&rat(1, 2))
        );
    }

    #[test]
    fn sideways_linear_parts_break_triangularity() {
        // d = y + x is not a graph distance for the x_m = y normalization:
        // the x-part feeds row x from the column determined by row y, an
        // off-order entry. Triangular mode refuses; general mode solves.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d_poly = var(&g, 1).add(&var(&g, 0)).unwrap();
        let d = DistanceModel::from_polynomial(&g, d_poly, 3).unwrap();
        assert_eq!(d.grad_norm(), &rat_int(1));
        let f = var(&g, 0);
        let err =
            solve_approximating(&lap, &d, &f, 3, &BTreeMap::new(), SolveMode::Triangular)
                .unwrap_err();
        assert!(matches!(err, ApproxError::OffTriangular { .. }), "got {err:?}");
        let result =
            solve_approximating(&lap, &d, &f, 3, &BTreeMap::new(), SolveMode::General).unwrap();
        assert!(result.residuals_all_zero());
    }

    #[test]
    fn vanishing_graph_gradient_is_characteristic() {
        let g = h1();
        let t = var(&g, 2);
        assert_eq!(
            DistanceModel::from_polynomial(&g, t.clone(), 3).unwrap_err(),
            ApproxError::CharacteristicPoint
        );
    }

    #[test]
    fn free_keys_must_name_free_columns() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let f = var(&g, 0);
        let mut bad = BTreeMap::new();
        bad.insert(mono(&g, &[0, 1, 0]), rat_int(1));
        let err = solve_approximating(&lap, &d, &f, 3, &bad, SolveMode::Triangular).unwrap_err();
        assert!(matches!(err, ApproxError::FreeKeyInvalid(_)));
        let mut way_off = BTreeMap::new();
        way_off.insert(mono(&g, &[9, 0, 0]), rat_int(1));
        let err2 =
            solve_approximating(&lap, &d, &f, 3, &way_off, SolveMode::Triangular).unwrap_err();
        assert!(matches!(err2, ApproxError::FreeKeyInvalid(_)));
    }

    #[test]
    fn nonzero_free_part_shifts_by_a_companion() {
        // With f = 0 and the free coefficient of t set to one, the solve
        // returns the companion t - xy/2.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let zero = StratifiedPolynomial::zero(&g, VarSpace::Single);
        let mut assignment = BTreeMap::new();
        assignment.insert(mono(&g, &[0, 0, 1]), rat_int(1));
        let result =
            solve_approximating(&lap, &d, &zero, 3, &assignment, SolveMode::Triangular).unwrap();
        let expected = var(&g, 2)
            .sub(&var(&g, 0).mul(&var(&g, 1)).unwrap().scale(&rat(1, 2)))
            .unwrap();
        assert_eq!(result.p, expected);
        assert!(result.residuals_all_zero());
    }

    #[test]
    fn approximating_polynomials_are_not_unique() {
        // P = t and P = xy/2 both satisfy Delta(y P) = x + O(degree 2):
        // they differ by the companion t - xy/2.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let f = var(&g, 0);
        let residuals = verify_approximating(&lap, &d, &var(&g, 2), &f, 3).unwrap();
        assert!(residuals.iter().all(|(_, v)| v.is_zero()));
    }

    #[test]
    fn verification_catches_wrong_candidates() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let f = var(&g, 0);
        let wrong = var(&g, 0).mul(&var(&g, 1)).unwrap(); // xy, missing the 1/2
        let residuals = verify_approximating(&lap, &d, &wrong, &f, 3).unwrap();
        let nonzero: Vec<_> = residuals.iter().filter(|(_, v)| !v.is_zero()).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, vec![0]); // the X1 word sees Delta(xy^2) - x = x
        assert_eq!(nonzero[0].1, rat_int(1));
    }

    #[test]
    fn companion_bases_match_the_worked_examples() {
        let g = h1();
        let x = var(&g, 0);
        let y = var(&g, 1);
        let t = var(&g, 2);
        let one = StratifiedPolynomial::one(&g, VarSpace::Single);

        let c0 = harmonic_companions(&g, 0).unwrap();
        assert_eq!(c0, vec![one.clone()]);

        let c1 = harmonic_companions(&g, 1).unwrap();
        assert_eq!(c1, vec![one.clone(), x.clone()]);

        let c2 = harmonic_companions(&g, 2).unwrap();
        let xy_half = x.mul(&y).unwrap().scale(&rat(1, 2));
        let expected = vec![
            one.clone(),
            x.clone(),
            x.pow(2).sub(&y.pow(2).scale(&rat(1, 3))).unwrap(),
            t.sub(&xy_half).unwrap(),
        ];
        assert_eq!(c2, expected);
        for q in &c2 {
            let check = sub_laplacian(&g).apply(&y.mul(q).unwrap()).unwrap();
            assert!(check.is_zero());
        }
    }

    #[test]
    fn companion_count_equals_the_nullity_of_the_flat_system() {
        for (g, kappa) in [(h1(), 3u32), (engel(), 2u32)] {
            let lap = sub_laplacian(&g);
            let d = flat_distance(&g, kappa + 1);
            let s = assemble_system(&lap, &d, kappa + 1).unwrap();
            let nullity = linalg::nullspace(s.matrix()).len();
            let companions = harmonic_companions(&g, kappa).unwrap();
            assert_eq!(companions.len(), nullity);
            assert_eq!(companions.len(), s.free_cols().len());
        }
    }

    #[test]
    fn left_translation_of_solutions_certifies_at_other_points() {
        // Certificates are taken at the identity; translating the data
        // through the group law and re-solving stays consistent: the solve
        // depends only on the jet, and the residual words match.
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 3);
        let f = var(&g, 0).scale(&rat(2, 3));
        let res = solve_approximating(&lap, &d, &f, 3, &BTreeMap::new(), SolveMode::Triangular)
            .unwrap();
        assert!(res.residuals_all_zero());
        let p0 = GroupElement::identity(&g);
        assert!(p0.is_identity());
    }

    #[test]
    fn rescaling_commutes_with_the_construction() {
        // u_sigma = u o delta_sigma solves the dilated problem; writing
        // u = d P with flat d = x_m pulls one factor of sigma out of the
        // distance, so P_sigma = sigma * dilate(P, sigma).
        let g = h1();
        let lap = sub_laplacian(&g);
        let zero_h = StratifiedPolynomial::zero(&g, VarSpace::Single);
        let f = var(&g, 0); // homogeneous of degree 1
        let sigma = rat(3, 2);
        let steps =
            rescale_solve(&lap, &zero_h, &f, 3, &[rat_int(1), sigma.clone()], SolveMode::Triangular)
                .unwrap();
        assert_eq!(steps.len(), 2);
        let base = &steps[0].result.p;
        let scaled = &steps[1].result.p;
        let expected = base.dilate(&sigma).unwrap().scale(&sigma);
        assert_eq!(scaled, &expected);
        for step in &steps {
            assert!(step.result.residuals_all_zero());
        }
    }

    #[test]
    fn rescaling_a_curved_graph_raises_the_effective_flatness() {
        // h = t^2 has weighted degree 4; h_sigma = sigma^3 t^2, so shrinking
        // sigma flattens the domain and the distance jet tends to y.
        let g = h1();
        let t = var(&g, 2);
        let h = t.pow(2);
        let sigma = rat(1, 2);
        let h_sigma = rescale_graph(&h, &sigma).unwrap();
        assert_eq!(h_sigma, t.pow(2).scale(&rat(1, 8)));
        let d = distance_expansion(&g, &h_sigma, 4).unwrap();
        let expected = var(&g, 1).sub(&t.pow(2).scale(&rat(1, 8))).unwrap();
        assert_eq!(d.poly_part(), &expected);
    }

    #[test]
    fn order_below_two_is_rejected() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 1);
        assert_eq!(assemble_system(&lap, &d, 1).unwrap_err(), ApproxError::OrderTooSmall(1));
        assert_eq!(assemble_system(&lap, &d, 0).unwrap_err(), ApproxError::OrderTooSmall(0));
    }

    #[test]
    fn anisotropic_operator_changes_the_solution() {
        // A = [[1, 1/2], [1/2, 1]]: the cross derivatives feed L(xy^2) an
        // extra 2y, which the y^2 column must cancel: P = xy/2 - y^2/6.
        // Hand check: L(y P) = L(xy^2)/2 - L(y^3)/6 = (2x + 2y)/2 - 6y/6 = x.
        let g = h1();
        let a = operator_from_matrix(
            &g,
            vec![vec![rat_int(1), rat(1, 2)], vec![rat(1, 2), rat_int(1)]],
        )
        .unwrap();
        let d = flat_distance(&g, 3);
        let f = var(&g, 0);
        for mode in [SolveMode::Triangular, SolveMode::General] {
            let result = solve_approximating(&a, &d, &f, 3, &BTreeMap::new(), mode).unwrap();
            assert!(result.residuals_all_zero());
            let expected = var(&g, 0)
                .mul(&var(&g, 1))
                .unwrap()
                .scale(&rat(1, 2))
                .sub(&var(&g, 1).pow(2).scale(&rat(1, 6)))
                .unwrap();
            assert_eq!(result.p, expected);
        }
    }

    #[test]
    fn global_order_sorts_rows_and_columns() {
        let g = h1();
        let lap = sub_laplacian(&g);
        let d = flat_distance(&g, 4);
        let s = assemble_system(&lap, &d, 4).unwrap();
        for w in s.rows().windows(2) {
            assert_eq!(global_order(&g, &w[0], &w[1]), std::cmp::Ordering::Less);
        }
        for w in s.cols().windows(2) {
            assert_eq!(global_order(&g, &w[0], &w[1]), std::cmp::Ordering::Less);
        }
    }
}
