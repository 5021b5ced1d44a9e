//! Left-invariant vector fields and constant-coefficient second-order
//! operators built from them.
//!
//! The field attached to basis direction `e_i` is obtained from the group
//! law: its coefficient in the `k`-th coordinate slot is the partial of the
//! `k`-th law component with respect to the right-factor variable `i`,
//! evaluated at right factor zero. Coefficients come out polynomial, and for
//! a direction of layer `j` the slot-`k` coefficient is homogeneous of
//! weighted degree `w_k - j`.

use crate::algebra::Group;
use crate::group::group_law_polynomials;
use crate::linalg::{self, Mat};
use crate::poly::{PolyError, StratifiedPolynomial, VarSpace};
use crate::scalar::Rational;
use num_traits::Zero;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiffOpError {
    #[error("field and polynomial belong to different groups")]
    GroupMismatch,
    #[error("coefficient matrix must be {expected}x{expected}, got {rows}x{cols}")]
    BadShape { expected: usize, rows: usize, cols: usize },
    #[error("coefficient matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("coefficient matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("word letter {0} is not a horizontal index")]
    BadWordLetter(usize),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// A vector field with polynomial coefficients: `sum_k c_k(p) d/dp_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorField {
    group: Group,
    label: String,
    coeffs: Vec<StratifiedPolynomial>,
}

impl VectorField {
    pub fn new(group: &Group, label: String, coeffs: Vec<StratifiedPolynomial>) -> Self {
        assert_eq!(coeffs.len(), group.dimension());
        VectorField { group: group.clone(), label, coeffs }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeffs(&self) -> &[StratifiedPolynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &StratifiedPolynomial {
        &self.coeffs[k]
    }

    fn check_same_group(&self, other: &Group) -> Result<(), DiffOpError> {
        if Arc::ptr_eq(&self.group, other) || *self.group == **other {
            Ok(())
        } else {
            Err(DiffOpError::GroupMismatch)
        }
    }

    /// Applies the field to a polynomial.
    pub fn apply(&self, f: &StratifiedPolynomial) -> Result<StratifiedPolynomial, DiffOpError> {
        self.check_same_group(f.group())?;
        if f.space() != VarSpace::Single {
            return Err(DiffOpError::Poly(PolyError::SpaceMismatch));
        }
        let mut out = StratifiedPolynomial::zero(&self.group, VarSpace::Single);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            out = out.add(&c.mul(&f.partial(k)?)?)?;
        }
        Ok(out)
    }

    /// Coefficient vector at a point.
    pub fn evaluate_at(&self, coords: &[Rational]) -> Result<Vec<Rational>, DiffOpError> {
        self.coeffs.iter().map(|c| c.evaluate(coords).map_err(DiffOpError::from)).collect()
    }
}

/// Commutator `[A, B] = A B - B A`, again a first-order field because the
/// second-order parts cancel: slot `k` carries `A(B_k) - B(A_k)`.
pub fn vf_commutator(a: &VectorField, b: &VectorField) -> Result<VectorField, DiffOpError> {
    a.check_same_group(&b.group)?;
    let coeffs: Vec<StratifiedPolynomial> = a
        .coeffs
        .iter()
        .zip(&b.coeffs)
        .map(|(ak, bk)| Ok(a.apply(bk)?.sub(&b.apply(ak)?)?))
        .collect::<Result<_, DiffOpError>>()?;
    Ok(VectorField::new(&a.group, format!("[{},{}]", a.label, b.label), coeffs))
}

/// The left-invariant fields for every basis direction, cached on the group.
pub fn left_invariant_fields(group: &Group) -> &[VectorField] {
    group.caches.left_fields.get_or_init(|| {
        let law = group_law_polynomials(group);
        let n = group.dimension();
        let zeros = vec![Rational::zero(); n];
        (0..n)
            .map(|i| {
                let coeffs: Vec<StratifiedPolynomial> = (0..n)
                    .map(|k| {
                        law.component(k)
                            .partial(n + i)
                            .and_then(|d| d.eval_second_block(&zeros))
                            .expect("law components are polynomial in both blocks")
                    })
                    .collect();
                let (j, s) = group.layer_slot(i);
                let label = if j == 1 { format!("X{s}") } else { format!("Y{j}_{s}") };
                VectorField::new(group, label, coeffs)
            })
            .collect()
    })
}

/// The horizontal (first-layer) fields `X_1 .. X_m`.
pub fn horizontal_fields(group: &Group) -> &[VectorField] {
    &left_invariant_fields(group)[..group.horizontal_dim()]
}

/// Iterated horizontal derivative `X_{i_1} ( X_{i_2} ( ... f ) )` for a word
/// of zero-based horizontal indices.
pub fn horizontal_derivative(
    group: &Group,
    word: &[usize],
    f: &StratifiedPolynomial,
) -> Result<StratifiedPolynomial, DiffOpError> {
    let m = group.horizontal_dim();
    let fields = horizontal_fields(group);
    let mut acc = f.clone();
    for &i in word.iter().rev() {
        if i >= m {
            return Err(DiffOpError::BadWordLetter(i));
        }
        acc = fields[i].apply(&acc)?;
    }
    Ok(acc)
}

/// Verifies that iterated commutators of the horizontal fields span every
/// direction at the identity; returns the achieved rank.
pub fn bracket_generation_rank(group: &Group) -> Result<usize, DiffOpError> {
    let origin = vec![Rational::zero(); group.dimension()];
    let mut generation: Vec<VectorField> = horizontal_fields(group).to_vec();
    let mut rows: Vec<Vec<Rational>> =
        generation.iter().map(|f| f.evaluate_at(&origin)).collect::<Result<_, _>>()?;
    let horizontal: Vec<VectorField> = generation.clone();
    for _ in 2..=group.step() {
        let mut next = Vec::new();
        for f in &generation {
            for x in &horizontal {
                let c = vf_commutator(x, f)?;
                rows.push(c.evaluate_at(&origin)?);
                next.push(c);
            }
        }
        generation = next;
    }
    Ok(linalg::rank(&Mat::from_rows(rows)))
}

/// Second-order operator `sum_{i,j} a_{ij}(p) X_i X_j` over the horizontal
/// fields. Entries are polynomials (constants included); the matrix is
/// symmetric, and ellipticity is guarded exactly at the base point by a
/// positive-semidefiniteness check of the frozen matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOperator {
    group: Group,
    entries: Vec<Vec<StratifiedPolynomial>>,
}

impl DiffOperator {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn entry(&self, i: usize, j: usize) -> &StratifiedPolynomial {
        &self.entries[i][j]
    }

    /// The matrix with every entry frozen at the identity.
    pub fn frozen_matrix(&self) -> Mat {
        let origin = vec![Rational::zero(); self.group.dimension()];
        Mat::from_rows(
            self.entries
                .iter()
                .map(|row| row.iter().map(|e| e.evaluate(&origin).expect("arity")).collect())
                .collect(),
        )
    }

    /// The constant matrix, if every entry is constant.
    pub fn constant_matrix(&self) -> Option<Mat> {
        let constant = self
            .entries
            .iter()
            .flatten()
            .all(|e| e.is_zero() || e.weighted_degree() == Some(0));
        constant.then(|| self.frozen_matrix())
    }

    pub fn is_sub_laplacian(&self) -> bool {
        let m = self.group.horizontal_dim();
        (0..m).all(|i| {
            (0..m).all(|j| {
                let e = &self.entries[i][j];
                if i == j {
                    *e == StratifiedPolynomial::one(&self.group, VarSpace::Single)
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Applies the operator to a polynomial.
    pub fn apply(&self, f: &StratifiedPolynomial) -> Result<StratifiedPolynomial, DiffOpError> {
        let fields = horizontal_fields(&self.group);
        let m = self.group.horizontal_dim();
        let mut out = StratifiedPolynomial::zero(&self.group, VarSpace::Single);
        // First derivatives are shared across the i loop.
        let firsts: Vec<StratifiedPolynomial> =
            fields.iter().map(|x| x.apply(f)).collect::<Result<_, _>>()?;
        for i in 0..m {
            for j in 0..m {
                let a = &self.entries[i][j];
                if a.is_zero() {
                    continue;
                }
                out = out.add(&a.mul(&fields[i].apply(&firsts[j])?)?)?;
            }
        }
        Ok(out)
    }
}

fn validate_entries(
    group: &Group,
    entries: Vec<Vec<StratifiedPolynomial>>,
) -> Result<DiffOperator, DiffOpError> {
    let m = group.horizontal_dim();
    let shape_err = |r: usize, c: usize| DiffOpError::BadShape { expected: m, rows: r, cols: c };
    if entries.len() != m {
        return Err(shape_err(entries.len(), entries.first().map_or(0, |r| r.len())));
    }
    for row in &entries {
        if row.len() != m {
            return Err(shape_err(entries.len(), row.len()));
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if entries[i][j] != entries[j][i] {
                return Err(DiffOpError::NotSymmetric(i, j));
            }
        }
    }
    let op = DiffOperator { group: group.clone(), entries };
    match linalg::is_positive_semidefinite(&op.frozen_matrix()) {
        Ok(true) => Ok(op),
        _ => Err(DiffOpError::NotPositiveSemidefinite),
    }
}

/// Builds a constant-coefficient operator from a symmetric positive
/// semidefinite matrix over the horizontal directions.
pub fn operator_from_matrix(
    group: &Group,
    rows: Vec<Vec<Rational>>,
) -> Result<DiffOperator, DiffOpError> {
    let entries = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| StratifiedPolynomial::constant(group, VarSpace::Single, v))
                .collect()
        })
        .collect();
    validate_entries(group, entries)
}

/// Builds an operator with polynomial coefficients; symmetry is exact and
/// ellipticity is checked on the matrix frozen at the identity.
pub fn operator_from_poly_matrix(
    group: &Group,
    rows: Vec<Vec<StratifiedPolynomial>>,
) -> Result<DiffOperator, DiffOpError> {
    validate_entries(group, rows)
}

/// The sub-Laplacian `sum_i X_i^2`.
pub fn sub_laplacian(group: &Group) -> DiffOperator {
    let m = group.horizontal_dim();
    let zero = StratifiedPolynomial::zero(group, VarSpace::Single);
    let one = StratifiedPolynomial::one(group, VarSpace::Single);
    let entries = (0..m)
        .map(|i| (0..m).map(|j| if i == j { one.clone() } else { zero.clone() }).collect())
        .collect();
    DiffOperator { group: group.clone(), entries }
}
