//! Exact polynomials graded by weighted degree.
//!
//! A monomial's weighted degree counts each coordinate with the weight of its
//! layer, so dilations act on a homogeneous polynomial as a pure power of the
//! scale factor. Group-law components live in a doubled variable space: `N`
//! variables for the left factor, `N` for the right, both graded by the same
//! layer weights.
//!
//! The global monomial order used everywhere (bases, serialized terms, the
//! approximating solver's elimination order) sorts by weighted degree, then
//! by the exponent of the distinguished last horizontal coordinate `x_m`,
//! then lexicographically (larger leading exponents first).

use crate::algebra::{AlgebraError, BracketCoeff, Group};
use crate::scalar::{format_rational, parse_rational, pow_u32, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::{Ordering, Reverse};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials belong to different groups")]
    GroupMismatch,
    #[error("polynomials live in different variable spaces")]
    SpaceMismatch,
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("variable index {0} out of range")]
    BadVariable(usize),
    #[error("dilation factor must be positive")]
    NonpositiveLambda,
    #[error("malformed polynomial data: {0}")]
    Malformed(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Whether a polynomial sees one copy of the coordinates or the doubled
/// group-law space (left factor then right factor).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarSpace {
    Single,
    Doubled,
}

/// Exponent vector of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    /// Total (unweighted) degree.
    pub fn length(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weighted_degree(&self, group: &Group) -> u32 {
        let n = group.dimension();
        self.0
            .iter()
            .enumerate()
            .map(|(k, &e)| e * group.weight(if k >= n { k - n } else { k }) as u32)
            .sum()
    }

    /// Exponent of the distinguished coordinate `x_m` (first block).
    pub fn beta_xm(&self, group: &Group) -> u32 {
        self.0[group.xm_index()]
    }

    /// Componentwise sum.
    pub fn plus(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.0.len(), other.0.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference if nonnegative.
    pub fn minus(&self, other: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.0.len(), other.0.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<u32>>>()
            .map(MultiIndex)
    }
}

/// Sort key realizing the global monomial order.
pub fn order_key(group: &Group, index: &MultiIndex) -> (u32, u32, Reverse<Vec<u32>>) {
    (
        index.weighted_degree(group),
        index.beta_xm(group),
        Reverse(index.exponents().to_vec()),
    )
}

/// Compares two multi-indices in the global monomial order.
pub fn global_order(group: &Group, a: &MultiIndex, b: &MultiIndex) -> Ordering {
    order_key(group, a).cmp(&order_key(group, b))
}

/// All multi-indices of weighted degree at most `kappa`, in the global order.
pub fn monomial_basis(group: &Group, kappa: u32) -> Vec<MultiIndex> {
    let n = group.dimension();
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(
        group: &Group,
        var: usize,
        budget: u32,
        current: &mut Vec<u32>,
        out: &mut Vec<MultiIndex>,
    ) {
        if var == current.len() {
            out.push(MultiIndex::new(current.clone()));
            return;
        }
        let w = group.weight(var) as u32;
        let max = budget / w;
        for e in 0..=max {
            current[var] = e;
            rec(group, var + 1, budget - e * w, current, out);
        }
        current[var] = 0;
    }
    rec(group, 0, kappa, &mut current, &mut out);
    out.sort_by_cached_key(|j| order_key(group, j));
    out
}

/// Sparse polynomial with exact rational coefficients.
#[derive(Debug, Clone)]
pub struct StratifiedPolynomial {
    group: Group,
    space: VarSpace,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl PartialEq for StratifiedPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.terms == other.terms && *self.group == *other.group
    }
}
impl Eq for StratifiedPolynomial {}

impl StratifiedPolynomial {
    pub fn zero(group: &Group, space: VarSpace) -> Self {
        StratifiedPolynomial { group: group.clone(), space, terms: BTreeMap::new() }
    }

    pub fn constant(group: &Group, space: VarSpace, value: Rational) -> Self {
        let mut p = Self::zero(group, space);
        if !value.is_zero() {
            p.terms.insert(MultiIndex::zero(p.nvars()), value);
        }
        p
    }

    pub fn one(group: &Group, space: VarSpace) -> Self {
        Self::constant(group, space, Rational::one())
    }

    pub fn variable(group: &Group, space: VarSpace, var: usize) -> Result<Self, PolyError> {
        let mut p = Self::zero(group, space);
        if var >= p.nvars() {
            return Err(PolyError::BadVariable(var));
        }
        p.terms.insert(MultiIndex::unit(p.nvars(), var), Rational::one());
        Ok(p)
    }

    pub fn monomial(
        group: &Group,
        space: VarSpace,
        index: MultiIndex,
        coeff: Rational,
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(group, space);
        if index.nvars() != p.nvars() {
            return Err(PolyError::ArityMismatch { expected: p.nvars(), got: index.nvars() });
        }
        if !coeff.is_zero() {
            p.terms.insert(index, coeff);
        }
        Ok(p)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn nvars(&self) -> usize {
        match self.space {
            VarSpace::Single => self.group.dimension(),
            VarSpace::Doubled => 2 * self.group.dimension(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Rational {
        self.terms.get(index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    /// Terms sorted by the global monomial order.
    pub fn sorted_terms(&self) -> Vec<(&MultiIndex, &Rational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_cached_key(|(j, _)| order_key(&self.group, j));
        v
    }

    fn check_compatible(&self, other: &Self) -> Result<(), PolyError> {
        if self.space != other.space {
            return Err(PolyError::SpaceMismatch);
        }
        if !Arc::ptr_eq(&self.group, &other.group) && *self.group != *other.group {
            return Err(PolyError::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (j, c) in &other.terms {
            let entry = terms.entry(j.clone()).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(j);
            }
        }
        Ok(StratifiedPolynomial { group: self.group.clone(), space: self.space, terms })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        StratifiedPolynomial {
            group: self.group.clone(),
            space: self.space,
            terms: self.terms.iter().map(|(j, c)| (j.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero(&self.group, self.space);
        }
        StratifiedPolynomial {
            group: self.group.clone(),
            space: self.space,
            terms: self.terms.iter().map(|(j, c)| (j.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_compatible(other)?;
        let mut terms: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        for (ja, ca) in &self.terms {
            for (jb, cb) in &other.terms {
                let j = ja.plus(jb);
                let entry = terms.entry(j).or_insert_with(Rational::zero);
                *entry += ca * cb;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(StratifiedPolynomial { group: self.group.clone(), space: self.space, terms })
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.group, self.space);
        for _ in 0..e {
            acc = acc.mul(self).expect("same context");
        }
        acc
    }

    pub fn evaluate(&self, coords: &[Rational]) -> Result<Rational, PolyError> {
        if coords.len() != self.nvars() {
            return Err(PolyError::ArityMismatch { expected: self.nvars(), got: coords.len() });
        }
        let mut acc = Rational::zero();
        for (j, c) in &self.terms {
            let mut term = c.clone();
            for (k, &e) in j.exponents().iter().enumerate() {
                if e > 0 {
                    term *= pow_u32(&coords[k], e);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    pub fn evaluate_f64(&self, coords: &[f64]) -> f64 {
        debug_assert_eq!(coords.len(), self.nvars());
        let mut acc = 0.0;
        for (j, c) in &self.terms {
            let mut term = crate::scalar::to_f64(c);
            for (k, &e) in j.exponents().iter().enumerate() {
                for _ in 0..e {
                    term *= coords[k];
                }
            }
            acc += term;
        }
        acc
    }

    pub fn partial(&self, var: usize) -> Result<Self, PolyError> {
        if var >= self.nvars() {
            return Err(PolyError::BadVariable(var));
        }
        let mut terms: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        for (j, c) in &self.terms {
            let e = j.exponents()[var];
            if e == 0 {
                continue;
            }
            let mut exps = j.exponents().to_vec();
            exps[var] -= 1;
            let coeff = c * Rational::from_integer(e.into());
            let entry = terms.entry(MultiIndex::new(exps)).or_insert_with(Rational::zero);
            *entry += coeff;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(StratifiedPolynomial { group: self.group.clone(), space: self.space, terms })
    }

    /// Largest weighted degree among the terms; `None` for the zero
    /// polynomial.
    pub fn weighted_degree(&self) -> Option<u32> {
        self.terms.keys().map(|j| j.weighted_degree(&self.group)).max()
    }

    /// Drops every term of weighted degree above `kappa`.
    pub fn truncate(&self, kappa: u32) -> Self {
        StratifiedPolynomial {
            group: self.group.clone(),
            space: self.space,
            terms: self
                .terms
                .iter()
                .filter(|(j, _)| j.weighted_degree(&self.group) <= kappa)
                .map(|(j, c)| (j.clone(), c.clone()))
                .collect(),
        }
    }

    /// Terms of weighted degree exactly `w`.
    pub fn homogeneous_component(&self, w: u32) -> Self {
        StratifiedPolynomial {
            group: self.group.clone(),
            space: self.space,
            terms: self
                .terms
                .iter()
                .filter(|(j, _)| j.weighted_degree(&self.group) == w)
                .map(|(j, c)| (j.clone(), c.clone()))
                .collect(),
        }
    }

    /// Precomposition with the dilation: `P(delta_lambda(p))`, i.e. each term
    /// picks up `lambda^{d(J)}`.
    pub fn dilate(&self, lambda: &Rational) -> Result<Self, PolyError> {
        if *lambda <= Rational::zero() {
            return Err(PolyError::NonpositiveLambda);
        }
        Ok(StratifiedPolynomial {
            group: self.group.clone(),
            space: self.space,
            terms: self
                .terms
                .iter()
                .map(|(j, c)| (j.clone(), c * pow_u32(lambda, j.weighted_degree(&self.group))))
                .collect(),
        })
    }

    /// Substitutes `images[k]` for variable `k`. All images must share a
    /// context, which becomes the context of the result.
    pub fn substitute(&self, images: &[Self]) -> Result<Self, PolyError> {
        if images.len() != self.nvars() {
            return Err(PolyError::ArityMismatch { expected: self.nvars(), got: images.len() });
        }
        let Some(first) = images.first() else {
            return Err(PolyError::ArityMismatch { expected: 1, got: 0 });
        };
        for im in images {
            first.check_compatible(im)?;
        }
        // Cache powers per variable up to the highest exponent used.
        let mut powers: Vec<Vec<Self>> =
            images.iter().map(|im| vec![Self::one(&im.group, im.space), im.clone()]).collect();
        let mut out = Self::zero(&first.group, first.space);
        for (j, c) in &self.terms {
            let mut term = Self::constant(&first.group, first.space, c.clone());
            for (k, &e) in j.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[k].len() <= e as usize {
                    let next = powers[k].last().unwrap().mul(&images[k])?;
                    powers[k].push(next);
                }
                term = term.mul(&powers[k][e as usize])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Fixes the left-factor block of a doubled polynomial to constants,
    /// producing a single-space polynomial in the right factor.
    pub fn eval_first_block(&self, coords: &[Rational]) -> Result<Self, PolyError> {
        self.eval_block(coords, true)
    }

    /// Fixes the right-factor block to constants.
    pub fn eval_second_block(&self, coords: &[Rational]) -> Result<Self, PolyError> {
        self.eval_block(coords, false)
    }

    fn eval_block(&self, coords: &[Rational], first: bool) -> Result<Self, PolyError> {
        if self.space != VarSpace::Doubled {
            return Err(PolyError::SpaceMismatch);
        }
        let n = self.group.dimension();
        if coords.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: coords.len() });
        }
        let mut terms: BTreeMap<MultiIndex, Rational> = BTreeMap::new();
        for (j, c) in &self.terms {
            let exps = j.exponents();
            let (fixed, kept) = if first { (&exps[..n], &exps[n..]) } else { (&exps[n..], &exps[..n]) };
            let mut coeff = c.clone();
            for (k, &e) in fixed.iter().enumerate() {
                if e > 0 {
                    coeff *= pow_u32(&coords[k], e);
                }
            }
            if coeff.is_zero() {
                continue;
            }
            let entry =
                terms.entry(MultiIndex::new(kept.to_vec())).or_insert_with(Rational::zero);
            *entry += coeff;
        }
        terms.retain(|_, c| !c.is_zero());
        Ok(StratifiedPolynomial { group: self.group.clone(), space: VarSpace::Single, terms })
    }

    /// Renders with coordinate names; doubled right-factor variables carry a
    /// prime.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let names = self.group.coordinate_names();
        let mut out = String::new();
        for (j, c) in self.sorted_terms() {
            let mut factors = Vec::new();
            for (k, &e) in j.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if k < names.len() {
                    names[k].clone()
                } else {
                    format!("{}'", names[k - names.len()])
                };
                factors.push(if e == 1 { name } else { format!("{name}^{e}") });
            }
            let mono = factors.join("*");
            let (sign, mag) = if *c < Rational::zero() {
                ("-", format_rational(&-c.clone()))
            } else {
                ("+", format_rational(c))
            };
            if out.is_empty() {
                if sign == "-" {
                    out.push('-');
                }
            } else {
                out.push_str(if sign == "-" { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&mag);
            } else if mag == "1" {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl fmt::Display for StratifiedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl BracketCoeff for StratifiedPolynomial {
    fn zero_like(proto: &Self) -> Self {
        Self::zero(&proto.group, proto.space)
    }
    fn coeff_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn coeff_mul(&self, other: &Self) -> Self {
        self.mul(other).expect("same context")
    }
    fn coeff_scale(&self, k: &Rational) -> Self {
        self.scale(k)
    }
    fn coeff_add_assign(&mut self, other: &Self) {
        *self = self.add(other).expect("same context");
    }
}

/// The exact group law: one doubled-space polynomial per coordinate of the
/// product, so component `k` gives `(p ∘ q)_k` as a polynomial in the `N`
/// coordinates of `p` followed by the `N` coordinates of `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupLawMap {
    components: Vec<StratifiedPolynomial>,
}

impl GroupLawMap {
    pub(crate) fn new(components: Vec<StratifiedPolynomial>) -> Self {
        GroupLawMap { components }
    }

    pub fn components(&self) -> &[StratifiedPolynomial] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &StratifiedPolynomial {
        &self.components[k]
    }

    pub fn group(&self) -> &Group {
        self.components[0].group()
    }

    /// Evaluates the law on concrete coordinates.
    pub fn evaluate(&self, p: &[Rational], q: &[Rational]) -> Result<Vec<Rational>, PolyError> {
        let n = self.group().dimension();
        if p.len() != n || q.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: p.len().max(q.len()) });
        }
        let stacked: Vec<Rational> = p.iter().chain(q.iter()).cloned().collect();
        self.components.iter().map(|c| c.evaluate(&stacked)).collect()
    }

    /// Left translation of a polynomial: returns `q ↦ f(g0 ∘ q)`.
    pub fn left_translate(
        &self,
        f: &StratifiedPolynomial,
        g0: &[Rational],
    ) -> Result<StratifiedPolynomial, PolyError> {
        if f.space() != VarSpace::Single {
            return Err(PolyError::SpaceMismatch);
        }
        let images: Vec<StratifiedPolynomial> = self
            .components
            .iter()
            .map(|c| c.eval_first_block(g0))
            .collect::<Result<_, _>>()?;
        f.substitute(&images)
    }
}

// ---------------------------------------------------------------------------
// Polynomial files
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct PolyFile {
    nvars: usize,
    terms: Vec<TermFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermFile {
    exponents: Vec<i64>,
    coeff: String,
}

/// Serializes a polynomial: `{"nvars": .., "terms": [{"exponents": ..,
/// "coeff": "num/den"}]}` with terms in the global monomial order.
pub fn to_json_string(poly: &StratifiedPolynomial) -> String {
    let file = PolyFile {
        nvars: poly.nvars(),
        terms: poly
            .sorted_terms()
            .into_iter()
            .map(|(j, c)| TermFile {
                exponents: j.exponents().iter().map(|&e| e as i64).collect(),
                coeff: format_rational(c),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("polynomial serializes")
}

/// Parses the polynomial file format in the context of a group. `nvars` must
/// equal the group dimension (single space) or twice it (doubled).
pub fn from_json_str(group: &Group, text: &str) -> Result<StratifiedPolynomial, PolyError> {
    let file: PolyFile =
        serde_json::from_str(text).map_err(|e| PolyError::Malformed(e.to_string()))?;
    let n = group.dimension();
    let space = if file.nvars == n {
        VarSpace::Single
    } else if file.nvars == 2 * n {
        VarSpace::Doubled
    } else {
        return Err(PolyError::Malformed(format!(
            "nvars {} matches neither dimension {} nor its double",
            file.nvars, n
        )));
    };
    let mut poly = StratifiedPolynomial::zero(group, space);
    for term in &file.terms {
        if term.exponents.len() != file.nvars {
            return Err(PolyError::Malformed(format!(
                "term has {} exponents, expected {}",
                term.exponents.len(),
                file.nvars
            )));
        }
        let exps: Vec<u32> = term
            .exponents
            .iter()
            .map(|&e| u32::try_from(e).map_err(|_| PolyError::Malformed("negative exponent".into())))
            .collect::<Result<_, _>>()?;
        let coeff =
            parse_rational(&term.coeff).map_err(|e| PolyError::Malformed(e.to_string()))?;
        let mono = StratifiedPolynomial::monomial(group, space, MultiIndex::new(exps), coeff)?;
        poly = poly.add(&mono)?;
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{engel, heisenberg};
    use crate::scalar::{rat, rat_int};

    fn h1_vars() -> (Group, StratifiedPolynomial, StratifiedPolynomial, StratifiedPolynomial) {
        let g = heisenberg(1);
        let x = StratifiedPolynomial::variable(&g, VarSpace::Single, 0).unwrap();
        let y = StratifiedPolynomial::variable(&g, VarSpace::Single, 1).unwrap();
        let t = StratifiedPolynomial::variable(&g, VarSpace::Single, 2).unwrap();
        (g, x, y, t)
    }

    #[test]
    fn monomial_basis_counts_on_heisenberg() {
        let g = heisenberg(1);
        let sizes: Vec<usize> = (0..4).map(|k| monomial_basis(&g, k).len()).collect();
        assert_eq!(sizes, vec![1, 3, 7, 13]);
    }

    #[test]
    fn monomial_basis_respects_the_global_order() {
        let g = heisenberg(1);
        let basis = monomial_basis(&g, 2);
        let degrees: Vec<u32> = basis.iter().map(|j| j.weighted_degree(&g)).collect();
        let mut sorted = degrees.clone();
        sorted.sort();
        assert_eq!(degrees, sorted);
        // Within fixed degree, x_m exponent ascends: x before y, and both
        // degree-2 monomials without y precede xy, which precedes y^2.
        let names: Vec<String> = basis
            .iter()
            .map(|j| {
                StratifiedPolynomial::monomial(&g, VarSpace::Single, j.clone(), rat_int(1))
                    .unwrap()
                    .render()
            })
            .collect();
        assert_eq!(names, vec!["1", "x1", "x2", "x1^2", "y2_1", "x1*x2", "x2^2"]);
    }

    #[test]
    fn weighted_degree_counts_layers() {
        let (g, x, y, t) = h1_vars();
        let p = x.mul(&t).unwrap().add(&y.pow(2)).unwrap();
        assert_eq!(p.weighted_degree(), Some(3));
        assert_eq!(p.homogeneous_component(3), x.mul(&t).unwrap());
        assert_eq!(p.truncate(2), y.pow(2));
        assert_eq!(StratifiedPolynomial::zero(&g, VarSpace::Single).weighted_degree(), None);
        let eng = engel();
        let top = StratifiedPolynomial::variable(&eng, VarSpace::Single, 3).unwrap();
        assert_eq!(top.weighted_degree(), Some(3));
    }

    #[test]
    fn dilation_scales_by_weighted_degree() {
        let (_, x, _, t) = h1_vars();
        let p = x.pow(2).add(&t.scale(&rat_int(5))).unwrap();
        let q = p.dilate(&rat_int(2)).unwrap();
        assert_eq!(q.coeff(&MultiIndex::new(vec![2, 0, 0])), rat_int(4));
        assert_eq!(q.coeff(&MultiIndex::new(vec![0, 0, 1])), rat_int(20));
        assert_eq!(p.dilate(&rat_int(0)).unwrap_err(), PolyError::NonpositiveLambda);
        assert_eq!(p.dilate(&rat_int(-1)).unwrap_err(), PolyError::NonpositiveLambda);
    }

    #[test]
    fn evaluation_and_partials() {
        let (_, x, y, t) = h1_vars();
        // p = x^2 y - t/2
        let p = x.pow(2).mul(&y).unwrap().sub(&t.scale(&rat(1, 2))).unwrap();
        let v = p.evaluate(&[rat_int(2), rat_int(3), rat_int(4)]).unwrap();
        assert_eq!(v, rat_int(10));
        assert!(p.evaluate(&[rat_int(0)]).is_err());
        let px = p.partial(0).unwrap();
        assert_eq!(px, x.mul(&y).unwrap().scale(&rat_int(2)));
        let pt = p.partial(2).unwrap();
        assert_eq!(pt.coeff(&MultiIndex::zero(3)), rat(-1, 2));
        assert!((p.evaluate_f64(&[2.0, 3.0, 4.0]) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn product_rule_and_degree_additivity() {
        let (_, x, y, t) = h1_vars();
        let p = x.add(&y.mul(&t).unwrap()).unwrap();
        let q = t.sub(&x.pow(3)).unwrap();
        let prod = p.mul(&q).unwrap();
        for var in 0..3 {
            let lhs = prod.partial(var).unwrap();
            let rhs = p
                .partial(var)
                .unwrap()
                .mul(&q)
                .unwrap()
                .add(&p.mul(&q.partial(var).unwrap()).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
        assert_eq!(
            prod.weighted_degree(),
            Some(p.weighted_degree().unwrap() + q.weighted_degree().unwrap())
        );
    }

    #[test]
    fn substitution_composes() {
        let (g, x, y, t) = h1_vars();
        let p = x.mul(&y).unwrap().add(&t).unwrap();
        let identity = vec![x.clone(), y.clone(), t.clone()];
        assert_eq!(p.substitute(&identity).unwrap(), p);
        // Substitute x -> x + y, others fixed; evaluate both ways.
        let images = vec![x.add(&y).unwrap(), y.clone(), t.clone()];
        let q = p.substitute(&images).unwrap();
        let at = [rat(1, 2), rat_int(3), rat(-1, 3)];
        let direct = p.evaluate(&[at[0].clone() + &at[1], at[1].clone(), at[2].clone()]).unwrap();
        assert_eq!(q.evaluate(&at).unwrap(), direct);
        assert!(p.substitute(&images[..2]).is_err());
        let _ = g;
    }

    #[test]
    fn block_evaluation_reduces_doubled_space() {
        let g = heisenberg(1);
        // q = x1 * x2' + y2_1'
        let x1 = StratifiedPolynomial::variable(&g, VarSpace::Doubled, 0).unwrap();
        let x2p = StratifiedPolynomial::variable(&g, VarSpace::Doubled, 4).unwrap();
        let tp = StratifiedPolynomial::variable(&g, VarSpace::Doubled, 5).unwrap();
        let q = x1.mul(&x2p).unwrap().add(&tp).unwrap();
        let fixed = q.eval_first_block(&[rat_int(2), rat_int(7), rat_int(9)]).unwrap();
        assert_eq!(fixed.space(), VarSpace::Single);
        assert_eq!(fixed.evaluate(&[rat_int(0), rat_int(3), rat_int(4)]).unwrap(), rat_int(10));
        let fixed2 = q.eval_second_block(&[rat_int(1), rat_int(3), rat_int(5)]).unwrap();
        assert_eq!(fixed2.evaluate(&[rat_int(2), rat_int(0), rat_int(0)]).unwrap(), rat_int(11));
        let single = StratifiedPolynomial::variable(&g, VarSpace::Single, 0).unwrap();
        assert_eq!(
            single.eval_first_block(&vec![rat_int(0); 3]).unwrap_err(),
            PolyError::SpaceMismatch
        );
    }

    #[test]
    fn render_is_readable() {
        let (_, x, y, t) = h1_vars();
        let p = x
            .pow(2)
            .scale(&rat_int(2))
            .sub(&y.mul(&t).unwrap().scale(&rat(1, 3)))
            .unwrap()
            .add(&StratifiedPolynomial::one(x.group(), VarSpace::Single))
            .unwrap();
        assert_eq!(p.render(), "1 + 2*x1^2 - 1/3*x2*y2_1");
        assert_eq!(StratifiedPolynomial::zero(x.group(), VarSpace::Single).render(), "0");
    }

    #[test]
    fn json_round_trip_and_rejects_malformed() {
        let (g, x, y, t) = h1_vars();
        let p = x.mul(&y).unwrap().scale(&rat(3, 7)).sub(&t.pow(2)).unwrap();
        let text = to_json_string(&p);
        assert_eq!(from_json_str(&g, &text).unwrap(), p);
        assert!(from_json_str(&g, "{\"nvars\": 4, \"terms\": []}").is_err());
        assert!(from_json_str(
            &g,
            "{\"nvars\": 3, \"terms\": [{\"exponents\": [1], \"coeff\": \"1\"}]}"
        )
        .is_err());
        assert!(from_json_str(
            &g,
            "{\"nvars\": 3, \"terms\": [{\"exponents\": [-1, 0, 0], \"coeff\": \"1\"}]}"
        )
        .is_err());
        assert!(from_json_str(
            &g,
            "{\"nvars\": 3, \"terms\": [{\"exponents\": [1, 0, 0], \"coeff\": \"1/0\"}]}"
        )
        .is_err());
        // Doubled-space polynomials round-trip through nvars = 2N.
        let q = StratifiedPolynomial::variable(&g, VarSpace::Doubled, 5).unwrap();
        assert_eq!(from_json_str(&g, &to_json_string(&q)).unwrap(), q);
    }

    #[test]
    fn ring_axioms_on_sampled_polynomials() {
        use proptest::prelude::*;
        let g = heisenberg(1);
        let coeff = (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d));
        let term = (proptest::collection::vec(0u32..3, 3), coeff);
        let poly_strategy = proptest::collection::vec(term, 0..5).prop_map(move |terms| {
            let mut p = StratifiedPolynomial::zero(&g, VarSpace::Single);
            for (exps, c) in terms {
                let m = StratifiedPolynomial::monomial(
                    &g,
                    VarSpace::Single,
                    MultiIndex::new(exps),
                    c,
                )
                .unwrap();
                p = p.add(&m).unwrap();
            }
            p
        });
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        runner
            .run(
                &(poly_strategy.clone(), poly_strategy.clone(), poly_strategy),
                |(a, b, c)| {
                    prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
                    prop_assert_eq!(
                        a.mul(&b).unwrap().mul(&c).unwrap(),
                        a.mul(&b.mul(&c).unwrap()).unwrap()
                    );
                    prop_assert_eq!(
                        a.mul(&b.add(&c).unwrap()).unwrap(),
                        a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
                    );
                    prop_assert_eq!(a.add(&b).unwrap().sub(&b).unwrap(), a);
                    Ok(())
                },
            )
            .unwrap();
    }
}
