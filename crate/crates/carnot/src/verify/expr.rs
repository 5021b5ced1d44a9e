//! A small closed-form expression language over group coordinates.
//!
//! Grammar: rational constants (`3`, `3/4`, `0.25`), coordinates by any
//! registered name (`x1`, `y2_1`, aliases like `x`, `t`), `+ - *`,
//! integer powers `^`, `sin`, `cos`, `exp`, parentheses, unary minus.
//! There is no division operator: `/` only occurs inside rational
//! literals. The class is closed under coordinate partials, so horizontal
//! derivatives of expression fields are computed symbolically.

use super::VerifyError;
use crate::algebra::Group;
use crate::diffop::horizontal_fields;
use crate::poly::{StratifiedPolynomial, VarSpace};
use crate::scalar::{self, Rational};
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Rational),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

// Smart constructors fold constants and drop units so that repeated
// differentiation does not balloon the tree.
pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        (Expr::Const(x), b) if x.is_zero() => b,
        (a, Expr::Const(y)) if y.is_zero() => a,
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        (a, Expr::Const(y)) if y.is_zero() => a,
        (Expr::Const(x), b) if x.is_zero() => neg(b),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        (Expr::Const(x), _) | (_, Expr::Const(x)) if x.is_zero() => Expr::Const(Rational::zero()),
        (Expr::Const(x), b) if x.is_one() => b,
        (a, Expr::Const(y)) if y.is_one() => a,
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(-x),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub fn pow(a: Expr, n: u32) -> Expr {
    match n {
        0 => Expr::Const(Rational::one()),
        1 => a,
        _ => match a {
            Expr::Const(x) => Expr::Const(scalar::pow_u32(&x, n)),
            a => Expr::Pow(Box::new(a), n),
        },
    }
}

impl Expr {
    pub fn constant(v: Rational) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn eval_f64(&self, coords: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => scalar::to_f64(c),
            Expr::Var(i) => coords[*i],
            Expr::Add(a, b) => a.eval_f64(coords) + b.eval_f64(coords),
            Expr::Sub(a, b) => a.eval_f64(coords) - b.eval_f64(coords),
            Expr::Mul(a, b) => a.eval_f64(coords) * b.eval_f64(coords),
            Expr::Neg(a) => -a.eval_f64(coords),
            Expr::Pow(a, n) => a.eval_f64(coords).powi(*n as i32),
            Expr::Sin(a) => a.eval_f64(coords).sin(),
            Expr::Cos(a) => a.eval_f64(coords).cos(),
            Expr::Exp(a) => a.eval_f64(coords).exp(),
        }
    }

    /// Symbolic coordinate partial; the class is closed under this.
    pub fn partial(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(Rational::zero()),
            Expr::Var(i) => {
                Expr::Const(if *i == var { Rational::one() } else { Rational::zero() })
            }
            Expr::Add(a, b) => add(a.partial(var), b.partial(var)),
            Expr::Sub(a, b) => sub(a.partial(var), b.partial(var)),
            Expr::Mul(a, b) => add(
                mul(a.partial(var), (**b).clone()),
                mul((**a).clone(), b.partial(var)),
            ),
            Expr::Neg(a) => neg(a.partial(var)),
            Expr::Pow(a, n) => mul(
                mul(
                    Expr::Const(Rational::from_integer((*n as i64).into())),
                    pow((**a).clone(), n - 1),
                ),
                a.partial(var),
            ),
            Expr::Sin(a) => mul(Expr::Cos(a.clone()), a.partial(var)),
            Expr::Cos(a) => neg(mul(Expr::Sin(a.clone()), a.partial(var))),
            Expr::Exp(a) => mul(Expr::Exp(a.clone()), a.partial(var)),
        }
    }

    pub fn references_var(&self, var: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(i) => *i == var,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.references_var(var) || b.references_var(var)
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                a.references_var(var)
            }
        }
    }

    /// Exact polynomial form, if the expression contains no transcendental
    /// node.
    pub fn to_polynomial(&self, group: &Group) -> Option<StratifiedPolynomial> {
        match self {
            Expr::Const(c) => {
                Some(StratifiedPolynomial::constant(group, VarSpace::Single, c.clone()))
            }
            Expr::Var(i) => StratifiedPolynomial::variable(group, VarSpace::Single, *i).ok(),
            Expr::Add(a, b) => a.to_polynomial(group)?.add(&b.to_polynomial(group)?).ok(),
            Expr::Sub(a, b) => a.to_polynomial(group)?.sub(&b.to_polynomial(group)?).ok(),
            Expr::Mul(a, b) => a.to_polynomial(group)?.mul(&b.to_polynomial(group)?).ok(),
            Expr::Neg(a) => Some(a.to_polynomial(group)?.neg()),
            Expr::Pow(a, n) => Some(a.to_polynomial(group)?.pow(*n)),
            Expr::Sin(_) | Expr::Cos(_) | Expr::Exp(_) => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        let own = match self {
            Expr::Add(..) | Expr::Sub(..) => 0,
            Expr::Neg(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Const(c) if c.is_negative() => 1,
            _ => 4,
        };
        if own < prec {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write!(f, "{}", scalar::format_rational(c))?,
            Expr::Var(i) => write!(f, "@{i}")?, // replaced by named rendering below
            Expr::Add(a, b) => {
                a.fmt_prec(f, 0)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 1)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 0)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 1)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 2)?;
            }
            Expr::Pow(a, n) => {
                a.fmt_prec(f, 4)?;
                write!(f, "^{n}")?;
            }
            Expr::Sin(a) => write!(f, "sin({a})")?,
            Expr::Cos(a) => write!(f, "cos({a})")?,
            Expr::Exp(a) => write!(f, "exp({a})")?,
        }
        if own < prec {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Renders with coordinates named after the group's canonical names,
    /// producing text the parser accepts back.
    pub fn render(&self, group: &Group) -> String {
        let names = group.coordinate_names();
        let raw = format!("{self}");
        // Variables print as @i; substitute longest indices first so @12
        // is not clobbered by @1.
        let mut out = raw;
        for i in (0..names.len()).rev() {
            out = out.replace(&format!("@{i}"), &names[i]);
        }
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Transcribes a polynomial into the expression language.
pub fn poly_to_expr(p: &StratifiedPolynomial) -> Expr {
    let mut out = Expr::Const(Rational::zero());
    for (index, coeff) in p.sorted_terms() {
        let mut term = Expr::Const(coeff.clone());
        for (var, &e) in index.exponents().iter().enumerate() {
            if e > 0 {
                term = mul(term, pow(Expr::Var(var), e));
            }
        }
        out = add(out, term);
    }
    out
}

/// Symbolic left-invariant horizontal derivative `X_i e`.
pub fn horizontal_expr_derivative(group: &Group, i: usize, e: &Expr) -> Result<Expr, VerifyError> {
    let fields = horizontal_fields(group);
    let field = fields
        .get(i)
        .ok_or_else(|| VerifyError::BadInput(format!("no horizontal direction {i}")))?;
    let mut out = Expr::Const(Rational::zero());
    for k in 0..group.dimension() {
        let coeff = field.coeff(k);
        if coeff.is_zero() {
            continue;
        }
        out = add(out, mul(poly_to_expr(coeff), e.partial(k)));
    }
    Ok(out)
}

/// `X_{i_1}(X_{i_2}(... X_{i_l} e))` for a word, innermost letter last.
pub fn word_expr_derivative(
    group: &Group,
    word: &[usize],
    e: &Expr,
) -> Result<Expr, VerifyError> {
    let mut cur = e.clone();
    for &i in word.iter().rev() {
        cur = horizontal_expr_derivative(group, i, &cur)?;
    }
    Ok(cur)
}

// ---------------------------------------------------------------------------
// Scalar fields
// ---------------------------------------------------------------------------

#[derive(Clone)]
enum FieldKind {
    Polynomial(StratifiedPolynomial),
    Expression(Expr),
    Function(std::sync::Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

/// A scalar function on the group, in one of three representations:
/// an exact polynomial, a closed-form expression, or an opaque callback.
/// The first two support symbolic horizontal derivatives; the callback
/// only supports pointwise evaluation.
#[derive(Clone)]
pub struct ScalarField {
    group: Group,
    kind: FieldKind,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FieldKind::Polynomial(p) => write!(f, "ScalarField::Polynomial({})", p.render()),
            FieldKind::Expression(e) => {
                write!(f, "ScalarField::Expression({})", e.render(&self.group))
            }
            FieldKind::Function(_) => write!(f, "ScalarField::Function(..)"),
        }
    }
}

impl ScalarField {
    pub fn from_polynomial(group: &Group, p: StratifiedPolynomial) -> Self {
        ScalarField { group: group.clone(), kind: FieldKind::Polynomial(p) }
    }

    pub fn from_expression(group: &Group, e: Expr) -> Self {
        ScalarField { group: group.clone(), kind: FieldKind::Expression(e) }
    }

    /// Parses the expression grammar; exact polynomial input stays exact.
    pub fn from_text(group: &Group, text: &str) -> Result<Self, VerifyError> {
        let e = parse_expr(group, text)?;
        Ok(match e.to_polynomial(group) {
            Some(p) => Self::from_polynomial(group, p),
            None => Self::from_expression(group, e),
        })
    }

    pub fn from_fn<F>(group: &Group, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ScalarField { group: group.clone(), kind: FieldKind::Function(std::sync::Arc::new(f)) }
    }

    pub fn constant(group: &Group, v: f64) -> Self {
        Self::from_fn(group, move |_| v)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn eval(&self, coords: &[f64]) -> Result<f64, VerifyError> {
        if coords.len() != self.group.dimension() {
            return Err(VerifyError::BadInput(format!(
                "point has {} coordinates, group has {}",
                coords.len(),
                self.group.dimension()
            )));
        }
        let v = match &self.kind {
            FieldKind::Polynomial(p) => p.evaluate_f64(coords),
            FieldKind::Expression(e) => e.eval_f64(coords),
            FieldKind::Function(f) => f(coords),
        };
        if !v.is_finite() {
            return Err(VerifyError::EvaluationFailure(format!("at {coords:?}")));
        }
        Ok(v)
    }

    /// The field as an expression, when it has a closed form.
    pub fn as_expr(&self) -> Option<Expr> {
        match &self.kind {
            FieldKind::Polynomial(p) => Some(poly_to_expr(p)),
            FieldKind::Expression(e) => Some(e.clone()),
            FieldKind::Function(_) => None,
        }
    }

    pub fn as_polynomial(&self) -> Option<&StratifiedPolynomial> {
        match &self.kind {
            FieldKind::Polynomial(p) => Some(p),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<Token>, VerifyError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                } else if i + 1 < bytes.len()
                    && bytes[i] == b'/'
                    && bytes[i + 1].is_ascii_digit()
                {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit = &text[start..i];
                let value = scalar::parse_rational(lit)
                    .map_err(|e| VerifyError::Parse(format!("bad number {lit:?}: {e}")))?;
                out.push(Token::Num(value));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Token::Ident(text[start..i].to_string()));
            }
            '/' => {
                return Err(VerifyError::Parse(
                    "division is only allowed inside rational literals like 3/4".into(),
                ))
            }
            other => {
                return Err(VerifyError::Parse(format!("unexpected character {other:?}")))
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    group: &'a Group,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr, VerifyError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = add(acc, self.term()?);
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, VerifyError> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = mul(acc, self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, VerifyError> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(neg(self.factor()?));
        }
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.next() {
                Some(Token::Num(n)) if n.is_integer() && !n.is_negative() => {
                    let e = n.to_integer().to_u32().ok_or_else(|| {
                        VerifyError::Parse("exponent too large".into())
                    })?;
                    return Ok(pow(base, e));
                }
                other => {
                    return Err(VerifyError::Parse(format!(
                        "expected a nonnegative integer exponent, got {other:?}"
                    )))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, VerifyError> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Const(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "sin" | "cos" | "exp" => {
                    if self.next() != Some(Token::LParen) {
                        return Err(VerifyError::Parse(format!("{name} needs parentheses")));
                    }
                    let inner = self.expr()?;
                    if self.next() != Some(Token::RParen) {
                        return Err(VerifyError::Parse(format!("unclosed {name}(...)")));
                    }
                    Ok(match name.as_str() {
                        "sin" => Expr::Sin(Box::new(inner)),
                        "cos" => Expr::Cos(Box::new(inner)),
                        _ => Expr::Exp(Box::new(inner)),
                    })
                }
                _ => match self.group.coordinate_index(&name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(VerifyError::Parse(format!("unknown coordinate {name:?}"))),
                },
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                if self.next() != Some(Token::RParen) {
                    return Err(VerifyError::Parse("unclosed parenthesis".into()));
                }
                Ok(inner)
            }
            other => Err(VerifyError::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression over the group's coordinates.
pub fn parse_expr(group: &Group, text: &str) -> Result<Expr, VerifyError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(VerifyError::Parse("empty expression".into()));
    }
    let mut parser = Parser { group, tokens, pos: 0 };
    let e = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(VerifyError::Parse(format!(
            "trailing input after position {}",
            parser.pos
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::heisenberg;
    use crate::scalar::{rat, rat_int};

    #[test]
    fn parses_arithmetic_with_aliases_and_rationals() {
        let g = heisenberg(1);
        let e = parse_expr(&g, "x*y - 3/4*t + 0.25").unwrap();
        let v = e.eval_f64(&[2.0, 3.0, 4.0]);
        assert!((v - (6.0 - 3.0 + 0.25)).abs() < 1e-12);
        // Canonical names work too and mean the same variables.
        let e2 = parse_expr(&g, "x1*x2 - 3/4*y2_1 + 1/4").unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn parses_functions_powers_and_unary_minus() {
        let g = heisenberg(1);
        let e = parse_expr(&g, "-sin(x)^2 + cos(x)*cos(x) + exp(2*y)").unwrap();
        let v = e.eval_f64(&[0.7, 0.3, 0.0]);
        let expect = -(0.7f64.sin().powi(2)) + 0.7f64.cos().powi(2) + (0.6f64).exp();
        assert!((v - expect).abs() < 1e-12);
    }

    #[test]
    fn rejects_division_and_unknown_names() {
        let g = heisenberg(1);
        assert!(matches!(parse_expr(&g, "x/2"), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, "q + 1"), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, "sin x"), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, "x ^ y"), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, "(x + 1"), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, ""), Err(VerifyError::Parse(_))));
        assert!(matches!(parse_expr(&g, "x 1"), Err(VerifyError::Parse(_))));
    }

    #[test]
    fn symbolic_partials_follow_the_chain_rule() {
        let g = heisenberg(1);
        let e = parse_expr(&g, "sin(x^2*y)").unwrap();
        let dx = e.partial(0);
        // d/dx sin(x^2 y) = cos(x^2 y) * 2xy
        let p = [1.2, -0.7, 0.0];
        let expect = (1.2f64.powi(2) * -0.7).cos() * 2.0 * 1.2 * -0.7;
        assert!((dx.eval_f64(&p) - expect).abs() < 1e-12);
        // Exp differentiates to itself times the inner derivative.
        let h = parse_expr(&g, "exp(3*t)").unwrap();
        let dt = h.partial(2);
        assert!((dt.eval_f64(&[0.0, 0.0, 0.5]) - 3.0 * 1.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn horizontal_derivatives_match_the_vector_fields() {
        // X1 = d/dx - (y/2) d/dt on the first Heisenberg group.
        let g = heisenberg(1);
        let e = parse_expr(&g, "t").unwrap();
        let x1t = horizontal_expr_derivative(&g, 0, &e).unwrap();
        let p = [0.4, 0.8, -0.3];
        assert!((x1t.eval_f64(&p) - (-0.4)).abs() < 1e-12);
        // X1 X2 t = 1/2 everywhere.
        let w = word_expr_derivative(&g, &[0, 1], &e).unwrap();
        assert!((w.eval_f64(&p) - 0.5).abs() < 1e-12);
        let w2 = word_expr_derivative(&g, &[1, 0], &e).unwrap();
        assert!((w2.eval_f64(&p) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn expression_derivatives_agree_with_polynomial_calculus() {
        use crate::diffop::horizontal_derivative;
        let g = heisenberg(1);
        let text = "x^2*y - 1/3*t*x";
        let e = parse_expr(&g, text).unwrap();
        let p_poly = e.to_polynomial(&g).unwrap();
        for word in [vec![0], vec![1], vec![0, 1], vec![1, 1], vec![0, 0, 1]] {
            let sym = word_expr_derivative(&g, &word, &e).unwrap();
            let exact = horizontal_derivative(&g, &word, &p_poly).unwrap();
            for sample in [[0.3, -0.2, 0.9], [1.0, 2.0, -0.5]] {
                assert!(
                    (sym.eval_f64(&sample) - exact.evaluate_f64(&sample)).abs() < 1e-10,
                    "word {word:?}"
                );
            }
        }
    }

    #[test]
    fn polynomial_round_trip_preserves_values() {
        let g = heisenberg(1);
        let e = parse_expr(&g, "(x + y)^3 - 2*t*x + 5/7").unwrap();
        let p = e.to_polynomial(&g).unwrap();
        let back = poly_to_expr(&p);
        for sample in [[0.0, 0.0, 0.0], [0.5, -1.5, 2.0], [3.0, 0.25, -0.125]] {
            assert!((e.eval_f64(&sample) - back.eval_f64(&sample)).abs() < 1e-9);
        }
        assert!(parse_expr(&g, "sin(x)").unwrap().to_polynomial(&g).is_none());
    }

    #[test]
    fn rendering_round_trips_through_the_parser() {
        let g = heisenberg(1);
        for text in [
            "x*y - 3/4*t + 1/4",
            "-sin(x^2*y) + exp(t)*cos(y)",
            "(x - y)*(x + y)",
            "2*x^3 - 1/2",
        ] {
            let e = parse_expr(&g, text).unwrap();
            let rendered = e.render(&g);
            let back = parse_expr(&g, &rendered).unwrap();
            for sample in [[0.3, 0.7, -0.2], [1.0, -1.0, 0.5]] {
                assert!(
                    (e.eval_f64(&sample) - back.eval_f64(&sample)).abs() < 1e-12,
                    "render {rendered:?} of {text:?}"
                );
            }
        }
        // Derivatives render to parseable text as well.
        let e = parse_expr(&g, "y*sin(t)").unwrap();
        let d = word_expr_derivative(&g, &[0], &e).unwrap();
        let back = parse_expr(&g, &d.render(&g)).unwrap();
        let sample = [0.2, 0.4, 0.6];
        assert!((d.eval_f64(&sample) - back.eval_f64(&sample)).abs() < 1e-12);
    }

    #[test]
    fn constant_folding_keeps_trees_small() {
        assert_eq!(add(Expr::Const(rat_int(2)), Expr::Const(rat_int(3))), Expr::Const(rat_int(5)));
        assert_eq!(mul(Expr::Const(rat_int(0)), Expr::Var(1)), Expr::Const(rat_int(0)));
        assert_eq!(mul(Expr::Const(rat_int(1)), Expr::Var(1)), Expr::Var(1));
        assert_eq!(pow(Expr::Var(0), 1), Expr::Var(0));
        assert_eq!(pow(Expr::Const(rat(1, 2)), 2), Expr::Const(rat(1, 4)));
        assert_eq!(neg(neg(Expr::Var(2))), Expr::Var(2));
    }
}
