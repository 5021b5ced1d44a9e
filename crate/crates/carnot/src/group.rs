//! Group operations in exponential coordinates.
//!
//! Products are computed with the truncated Dynkin series for
//! `log(exp X exp Y)`; nilpotency of step `r` kills every bracket longer than
//! `r` letters, so the truncation is exact. The same series, run with
//! polynomial coefficients, yields the group law as an explicit polynomial
//! map, which is cached on the group.

use crate::algebra::{AlgebraElement, BracketCoeff, Group};
use crate::poly::{GroupLawMap, StratifiedPolynomial, VarSpace};
use crate::scalar::{format_rational, parse_rational, pow_u32, to_f64, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("elements belong to different groups")]
    Mismatch,
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("dilation factor must be positive")]
    NonpositiveLambda,
    #[error("malformed element: {0}")]
    Malformed(String),
}

/// Right-nested bracket of a word in the letters `x`, `y`.
fn word_bracket<T: BracketCoeff>(group: &Group, word: &[bool], x: &[T], y: &[T]) -> Vec<T> {
    let pick = |is_y: bool| if is_y { y } else { x };
    let mut acc: Vec<T> = pick(*word.last().expect("nonempty word")).to_vec();
    for &letter in word[..word.len() - 1].iter().rev() {
        acc = group.bracket_generic(pick(letter), &acc);
    }
    acc
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Truncated Dynkin series for `log(exp X exp Y)`, generic over the
/// coefficient ring (exact scalars or polynomials).
pub(crate) fn dynkin_log<T: BracketCoeff>(group: &Group, x: &[T], y: &[T]) -> Vec<T> {
    let n = group.dimension();
    assert_eq!(x.len(), n);
    assert_eq!(y.len(), n);
    let r = group.step() as u32;
    let mut out: Vec<T> = (0..n).map(|_| T::zero_like(&x[0])).collect();

    // Enumerate block sequences ((p_1,q_1),...,(p_m,q_m)) with p_i+q_i >= 1
    // whose word X^{p_1} Y^{q_1} ... has at most `r` letters.
    let mut blocks: Vec<(u32, u32)> = Vec::new();
    fn rec<T: BracketCoeff>(
        group: &Group,
        budget: u32,
        blocks: &mut Vec<(u32, u32)>,
        x: &[T],
        y: &[T],
        out: &mut [T],
    ) {
        for p in 0..=budget {
            for q in 0..=(budget - p) {
                if p + q == 0 {
                    continue;
                }
                blocks.push((p, q));
                accumulate(group, blocks, x, y, out);
                rec(group, budget - p - q, blocks, x, y, out);
                blocks.pop();
            }
        }
    }

    fn accumulate<T: BracketCoeff>(
        group: &Group,
        blocks: &[(u32, u32)],
        x: &[T],
        y: &[T],
        out: &mut [T],
    ) {
        let length: u32 = blocks.iter().map(|&(p, q)| p + q).sum();
        // Words ending in a repeated letter bracket to zero; the cheap cases
        // are worth skipping because they dominate the enumeration.
        let (p_last, q_last) = *blocks.last().unwrap();
        if (q_last == 0 && p_last >= 2 && length >= 2) || (q_last >= 2 && length >= 2) {
            return;
        }
        let mut word: Vec<bool> = Vec::with_capacity(length as usize);
        for &(p, q) in blocks {
            word.extend(std::iter::repeat(false).take(p as usize));
            word.extend(std::iter::repeat(true).take(q as usize));
        }
        let mut den = BigInt::from(blocks.len() as u32) * length;
        for &(p, q) in blocks {
            den *= factorial(p) * factorial(q);
        }
        let sign = if blocks.len() % 2 == 1 { BigInt::one() } else { -BigInt::one() };
        let coeff = Rational::new(sign, den);
        let bracket = word_bracket(group, &word, x, y);
        for (slot, value) in out.iter_mut().zip(bracket) {
            if !value.coeff_is_zero() {
                slot.coeff_add_assign(&value.coeff_scale(&coeff));
            }
        }
    }

    rec(group, r, &mut blocks, x, y, &mut out);
    out
}

/// The group law as a cached polynomial map in doubled variables.
pub fn group_law_polynomials(group: &Group) -> &GroupLawMap {
    group.caches.group_law.get_or_init(|| {
        let n = group.dimension();
        let x: Vec<StratifiedPolynomial> = (0..n)
            .map(|k| StratifiedPolynomial::variable(group, VarSpace::Doubled, k).unwrap())
            .collect();
        let y: Vec<StratifiedPolynomial> = (0..n)
            .map(|k| StratifiedPolynomial::variable(group, VarSpace::Doubled, n + k).unwrap())
            .collect();
        GroupLawMap::new(dynkin_log(group, &x, &y))
    })
}

/// A point of the group in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupElement {
    group: Group,
    coords: Vec<Rational>,
}

impl GroupElement {
    pub fn new(group: &Group, coords: Vec<Rational>) -> Result<Self, GroupError> {
        if coords.len() != group.dimension() {
            return Err(GroupError::Arity { expected: group.dimension(), got: coords.len() });
        }
        Ok(GroupElement { group: group.clone(), coords })
    }

    pub fn identity(group: &Group) -> Self {
        GroupElement { group: group.clone(), coords: vec![Rational::zero(); group.dimension()] }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &Rational {
        &self.coords[k]
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(to_f64).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn from_algebra(el: &AlgebraElement) -> Self {
        GroupElement { group: el.group().clone(), coords: el.coords().to_vec() }
    }

    fn check_same(&self, other: &Self) -> Result<(), GroupError> {
        if Arc::ptr_eq(&self.group, &other.group) || *self.group == *other.group {
            Ok(())
        } else {
            Err(GroupError::Mismatch)
        }
    }

    /// Group product via the truncated Dynkin series on exact coordinates.
    pub fn product(&self, other: &Self) -> Result<Self, GroupError> {
        self.check_same(other)?;
        let coords = dynkin_log(&self.group, &self.coords, &other.coords);
        Ok(GroupElement { group: self.group.clone(), coords })
    }

    /// In exponential coordinates the inverse is coordinatewise negation.
    pub fn inverse(&self) -> Self {
        GroupElement {
            group: self.group.clone(),
            coords: self.coords.iter().map(|c| -c.clone()).collect(),
        }
    }

    /// Anisotropic dilation: layer-`j` coordinates scale by `lambda^j`.
    pub fn dilate(&self, lambda: &Rational) -> Result<Self, GroupError> {
        if *lambda <= Rational::zero() {
            return Err(GroupError::NonpositiveLambda);
        }
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, c)| c * pow_u32(lambda, self.group.weight(k) as u32))
            .collect();
        Ok(GroupElement { group: self.group.clone(), coords })
    }

    /// Exact value of `|p|^{2 r!}` where `|.|` is the homogeneous gauge
    /// `( sum_j ||xi_j||^{2 r!/j} )^{1/(2 r!)}`.
    pub fn gauge_power(&self) -> Rational {
        let r = self.group.step() as u32;
        let rfact = factorial(r);
        let mut total = Rational::zero();
        for j in 1..=self.group.step() {
            let mut norm_sq = Rational::zero();
            for k in self.group.layer_range(j) {
                norm_sq += &self.coords[k] * &self.coords[k];
            }
            let exp = (rfact.clone() / BigInt::from(j as u32))
                .try_into()
                .ok()
                .and_then(|b: i64| u32::try_from(b).ok())
                .expect("step small enough for exact gauge exponents");
            total += pow_u32(&norm_sq, exp);
        }
        total
    }

    /// Floating-point homogeneous gauge `|p|`.
    pub fn gauge_f64(&self) -> f64 {
        let r = self.group.step() as u32;
        let two_rfact: f64 = 2.0 * to_f64(&Rational::from_integer(factorial(r)));
        to_f64(&self.gauge_power()).powf(1.0 / two_rfact)
    }

    /// Exact `d(p,q)^{2 r!}` for the gauge quasi-distance `|q^{-1} p|`.
    pub fn distance_power(&self, other: &Self) -> Result<Rational, GroupError> {
        Ok(other.inverse().product(self)?.gauge_power())
    }

    pub fn distance_f64(&self, other: &Self) -> Result<f64, GroupError> {
        Ok(other.inverse().product(self)?.gauge_f64())
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(format_rational).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses `"1,1,1/2"` style coordinate lists.
pub fn parse_element(group: &Group, text: &str) -> Result<GroupElement, GroupError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != group.dimension() {
        return Err(GroupError::Arity { expected: group.dimension(), got: parts.len() });
    }
    let coords: Vec<Rational> = parts
        .iter()
        .map(|s| parse_rational(s.trim()).map_err(|e| GroupError::Malformed(format!("{s}: {e}"))))
        .collect::<Result<_, _>>()?;
    GroupElement::new(group, coords)
}

/// Positive part guard used by gauge comparisons in floating point.
pub fn gauge_root_f64(group: &Group, power: &Rational) -> f64 {
    let r = group.step() as u32;
    let two_rfact: f64 = 2.0 * to_f64(&Rational::from_integer(factorial(r)));
    to_f64(&power.abs()).powf(1.0 / two_rfact)
}
