//! Stratified Taylor polynomials.
//!
//! The order-`k` Taylor polynomial of `f` at `g0` is the unique `P` of
//! weighted degree at most `k` whose horizontal derivatives `X_I P` at the
//! identity match `X_I f` at `g0` for every word `I` of length at most `k`.
//! `P` is expressed in coordinates centered at `g0`: its value at `q`
//! approximates `f(g0 . q)`.
//!
//! The solver assembles that (overdetermined) linear system explicitly and
//! reduces it exactly; redundant equations then certify consistency instead
//! of being discarded. A tolerance widens the consistency check when the
//! derivative values come from rationalized floating-point data.

use crate::algebra::Group;
use crate::diffop::{horizontal_fields, DiffOpError};
use crate::linalg::{self, LinalgError, Mat};
use crate::poly::{monomial_basis, MultiIndex, PolyError, StratifiedPolynomial, VarSpace};
use crate::scalar::{rat, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaylorError {
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("no derivative value supplied for word {0:?}")]
    MissingDerivative(Vec<usize>),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// All words over the horizontal indices `0..m` of length at most `max_len`,
/// in depth-first prefix order (the empty word, then each extension).
pub fn horizontal_words(m: usize, max_len: u32) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut word = Vec::new();
    fn rec(m: usize, max_len: u32, word: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(word.clone());
        if word.len() as u32 == max_len {
            return;
        }
        for i in 0..m {
            word.push(i);
            rec(m, max_len, word, out);
            word.pop();
        }
    }
    rec(m, max_len, &mut word, &mut out);
    out
}

/// The matching system: one row per word, one column per monomial of
/// weighted degree at most `k` (global order); the entry is `X_I z^J`
/// evaluated at the identity, where a word `[i_1, .., i_l]` acts as
/// `X_{i_1}( X_{i_2}( ... ) )`.
pub fn taylor_system(group: &Group, k: u32) -> (Vec<Vec<usize>>, Vec<MultiIndex>, Mat) {
    let basis = monomial_basis(group, k);
    let fields = horizontal_fields(group);
    let origin = vec![Rational::zero(); group.dimension()];
    let monomials: Vec<StratifiedPolynomial> = basis
        .iter()
        .map(|j| {
            StratifiedPolynomial::monomial(group, VarSpace::Single, j.clone(), Rational::one())
                .expect("basis indices fit the group")
        })
        .collect();

    let mut words = Vec::new();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    // Derivatives of the whole basis are carried down the word tree so each
    // prefix is differentiated once, not once per word.
    fn rec(
        group: &Group,
        fields: &[crate::diffop::VectorField],
        origin: &[Rational],
        k: u32,
        word: &mut Vec<usize>,
        derivs: &[StratifiedPolynomial],
        words: &mut Vec<Vec<usize>>,
        rows: &mut Vec<Vec<Rational>>,
    ) {
        words.push(word.clone());
        rows.push(derivs.iter().map(|p| p.evaluate(origin).expect("arity fixed")).collect());
        if word.len() as u32 == k {
            return;
        }
        for (i, field) in fields.iter().enumerate() {
            let next: Vec<StratifiedPolynomial> =
                derivs.iter().map(|p| field.apply(p).expect("same group")).collect();
            // The new field acts on what is already there, so its letter goes
            // in front: the word reads left to right as nested application.
            word.insert(0, i);
            rec(group, fields, origin, k, word, &next, words, rows);
            word.remove(0);
        }
    }
    let mut word = Vec::new();
    rec(group, fields, &origin, k, &mut word, &monomials, &mut words, &mut rows);
    (words, basis, Mat::from_rows(rows))
}

/// Horizontal derivatives of a polynomial at a point, for every word of
/// length at most `max_len`, sharing prefixes down the word tree.
pub fn derivative_table(
    f: &StratifiedPolynomial,
    g0: &[Rational],
    max_len: u32,
) -> Result<BTreeMap<Vec<usize>, Rational>, TaylorError> {
    let group = f.group().clone();
    if g0.len() != group.dimension() {
        return Err(TaylorError::Arity { expected: group.dimension(), got: g0.len() });
    }
    let fields = horizontal_fields(&group);
    let mut table = BTreeMap::new();
    fn rec(
        fields: &[crate::diffop::VectorField],
        g0: &[Rational],
        max_len: u32,
        word: &mut Vec<usize>,
        f: &StratifiedPolynomial,
        table: &mut BTreeMap<Vec<usize>, Rational>,
    ) -> Result<(), TaylorError> {
        table.insert(word.clone(), f.evaluate(g0)?);
        if word.len() as u32 == max_len {
            return Ok(());
        }
        for (i, field) in fields.iter().enumerate() {
            let next = field.apply(f)?;
            word.insert(0, i);
            rec(fields, g0, max_len, word, &next, table)?;
            word.remove(0);
        }
        Ok(())
    }
    let mut word = Vec::new();
    rec(fields, g0, max_len, &mut word, f, &mut table)?;
    Ok(table)
}

/// Solves for the Taylor polynomial given the derivative values `X_I f(g0)`,
/// supplied by a callback (exact symbols, rationalized measurements, ...).
pub fn taylor_from_derivatives<F>(
    group: &Group,
    k: u32,
    tolerance: Option<&Rational>,
    mut deriv: F,
) -> Result<StratifiedPolynomial, TaylorError>
where
    F: FnMut(&[usize]) -> Result<Rational, TaylorError>,
{
    let (words, basis, mat) = taylor_system(group, k);
    let rhs: Vec<Rational> =
        words.iter().map(|w| deriv(w)).collect::<Result<_, TaylorError>>()?;
    let coeffs = linalg::solve_unique(&mat, &rhs, tolerance)?;
    let mut p = StratifiedPolynomial::zero(group, VarSpace::Single);
    for (j, c) in basis.into_iter().zip(coeffs) {
        let mono = StratifiedPolynomial::monomial(group, VarSpace::Single, j, c)?;
        p = p.add(&mono)?;
    }
    Ok(p)
}

/// Order-`k` Taylor polynomial of a polynomial at `g0`, in centered
/// coordinates. Exact; the translation identity makes this verifiable
/// against truncation of `f(g0 . q)`.
pub fn taylor_poly(
    f: &StratifiedPolynomial,
    g0: &[Rational],
    k: u32,
) -> Result<StratifiedPolynomial, TaylorError> {
    let table = derivative_table(f, g0, k)?;
    taylor_from_derivatives(f.group(), k, None, |w| {
        table.get(w).cloned().ok_or_else(|| TaylorError::MissingDerivative(w.to_vec()))
    })
}

/// Weights `c_1..c_{k+2}` with `sum_i c_i (-1/i)^m = 1` for `m = 0..k+1`.
///
/// They extend a function from one side of a flat boundary: sampling at
/// depths `t/i` with these weights reproduces one-sided jets to order `k+1`.
pub fn reflection_coefficients(k: u32) -> Vec<Rational> {
    let n = (k + 2) as usize;
    let mut rows = Vec::with_capacity(n);
    for m in 0..n {
        rows.push(
            (1..=n)
                .map(|i| crate::scalar::pow_u32(&rat(-1, i as i64), m as u32))
                .collect::<Vec<_>>(),
        );
    }
    let mat = Mat::from_rows(rows);
    let ones = vec![Rational::one(); n];
    linalg::solve_unique(&mat, &ones, None).expect("distinct nodes make the system invertible")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{engel, heisenberg};
    use crate::group::group_law_polynomials;
    use crate::scalar::{from_f64, rat_int, to_f64};
    use num_traits::Signed;

    fn h1_polys() -> (Group, StratifiedPolynomial, StratifiedPolynomial, StratifiedPolynomial) {
        let g = heisenberg(1);
        let x = StratifiedPolynomial::variable(&g, VarSpace::Single, 0).unwrap();
        let y = StratifiedPolynomial::variable(&g, VarSpace::Single, 1).unwrap();
        let t = StratifiedPolynomial::variable(&g, VarSpace::Single, 2).unwrap();
        (g, x, y, t)
    }

    #[test]
    fn word_enumeration_counts_and_order() {
        let words = horizontal_words(2, 2);
        assert_eq!(words.len(), 1 + 2 + 4);
        assert_eq!(words[0], Vec::<usize>::new());
        assert_eq!(words[1], vec![0]);
        assert_eq!(words[2], vec![0, 0]);
        assert_eq!(words[3], vec![0, 1]);
        assert_eq!(words[4], vec![1]);
    }

    #[test]
    fn center_coordinate_needs_a_commutator() {
        // On the first Heisenberg group the matching matrix must give the
        // degree-2 monomial t a nonzero entry only on words of length 2.
        let g = heisenberg(1);
        let (words, basis, mat) = taylor_system(&g, 2);
        let t_col = basis
            .iter()
            .position(|j| j.exponents() == [0, 0, 1])
            .expect("t is in the degree-2 basis");
        for (row, word) in words.iter().enumerate() {
            let entry = mat.at(row, t_col);
            if word.len() == 2 && word[0] != word[1] {
                assert!(!entry.is_zero());
            } else if word.len() < 2 {
                assert!(entry.is_zero());
            }
        }
    }

    #[test]
    fn taylor_of_center_coordinate_at_a_shifted_point() {
        let (_g, _, y, t) = h1_polys();
        let p = taylor_poly(&t, &[rat_int(1), rat_int(0), rat_int(0)], 2).unwrap();
        let expected = t.add(&y.scale(&rat(1, 2))).unwrap();
        assert_eq!(p, expected);
    }

    #[test]
    fn taylor_matches_translation_truncation() {
        let (g, x, y, t) = h1_polys();
        let law = group_law_polynomials(&g);
        let f = x
            .pow(2)
            .mul(&y)
            .unwrap()
            .add(&t.mul(&x).unwrap())
            .unwrap()
            .sub(&y.pow(4).scale(&rat(2, 7)))
            .unwrap();
        let g0 = [rat(1, 2), rat_int(-1), rat(1, 3)];
        for k in 0..=4 {
            let direct = taylor_poly(&f, &g0, k).unwrap();
            let oracle = law.left_translate(&f, &g0).unwrap().truncate(k);
            assert_eq!(direct, oracle, "k = {k}");
        }
        // A step-3 group exercises weight-3 detection.
        let eng = engel();
        let z = StratifiedPolynomial::variable(&eng, VarSpace::Single, 2).unwrap();
        let w = StratifiedPolynomial::variable(&eng, VarSpace::Single, 3).unwrap();
        let f2 = z.mul(&w).unwrap();
        let law2 = group_law_polynomials(&eng);
        let g1 = [rat_int(1), rat(1, 2), rat_int(0), rat_int(-2)];
        for k in 0..=3 {
            let direct = taylor_poly(&f2, &g1, k).unwrap();
            let oracle = law2.left_translate(&f2, &g1).unwrap().truncate(k);
            assert_eq!(direct, oracle, "engel k = {k}");
        }
    }

    #[test]
    fn inconsistent_data_is_rejected_exactly_but_passes_with_tolerance() {
        // At order 3 on two horizontal directions there are 15 words against
        // 13 monomials, so corrupted data has redundant rows to collide with.
        let (g, x, _, t) = h1_polys();
        let f = t.mul(&x).unwrap();
        let g0 = [rat(1, 2), rat_int(-1), rat(1, 3)];
        let table = derivative_table(&f, &g0, 3).unwrap();
        let noisy = |w: &[usize]| {
            let base = table.get(w).cloned().unwrap();
            Ok(if w == [0, 1, 1] { base + rat(1, 1_000_000) } else { base })
        };
        let err = taylor_from_derivatives(&g, 3, None, noisy).unwrap_err();
        assert!(matches!(err, TaylorError::Linalg(LinalgError::Inconsistent { .. })));
        let ok = taylor_from_derivatives(&g, 3, Some(&rat(1, 1000)), noisy).unwrap();
        let exact = taylor_poly(&f, &g0, 3).unwrap();
        for (j, c) in exact.terms() {
            assert!((ok.coeff(j) - c).abs() <= rat(1, 1000), "coefficient {j:?} drifted");
        }
    }

    #[test]
    fn rationalized_float_data_recovers_coefficients() {
        let (g, x, y, t) = h1_polys();
        let f = t.mul(&y).unwrap().add(&x.pow(3).scale(&rat(1, 3))).unwrap();
        let g0 = [rat(1, 4), rat(-1, 2), rat_int(2)];
        let exact_table = derivative_table(&f, &g0, 3).unwrap();
        let tol = rat(1, 1_000_000);
        let approx = taylor_from_derivatives(&g, 3, Some(&tol), |w| {
            // Round-trip the exact derivative through f64.
            Ok(from_f64(to_f64(exact_table.get(w).unwrap())).unwrap())
        })
        .unwrap();
        let exact = taylor_poly(&f, &g0, 3).unwrap();
        for (j, c) in exact.terms() {
            let delta = (approx.coeff(j) - c).abs();
            assert!(delta < rat(1, 1_000), "coefficient {j:?} off by {delta}");
        }
    }

    #[test]
    fn constant_order_taylor_is_the_value() {
        let (_, x, y, _) = h1_polys();
        let f = x.mul(&y).unwrap().add(&x).unwrap();
        let g0 = [rat_int(2), rat_int(3), rat(1, 5)];
        let p = taylor_poly(&f, &g0, 0).unwrap();
        assert_eq!(p, StratifiedPolynomial::constant(f.group(), VarSpace::Single, rat_int(8)));
    }

    #[test]
    fn reflection_weights_reproduce_one_sided_jets() {
        assert_eq!(reflection_coefficients(0), vec![rat_int(-3), rat_int(4)]);
        for k in 0..5u32 {
            let c = reflection_coefficients(k);
            assert_eq!(c.len(), (k + 2) as usize);
            for m in 0..=(k + 1) {
                let mut s = Rational::zero();
                for (idx, ci) in c.iter().enumerate() {
                    s += ci * crate::scalar::pow_u32(&rat(-1, idx as i64 + 1), m);
                }
                assert_eq!(s, Rational::one(), "k = {k}, moment {m}");
            }
        }
    }
}
