//! A small arithmetic expression language over chart variables `x1..xm`.
//!
//! Expressions support `+ - * / ^`, unary minus, numeric literals and the
//! functions `exp`, `log`, `sin`, `cos`, `sqrt`. Every expression can be
//! differentiated symbolically, which is how scenario metrics obtain exact
//! partial derivatives.

mod diff;
mod parse;

use std::fmt;

pub use parse::ParseError;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sqrt => v.sqrt(),
        }
    }
}

/// Syntax tree node. Variables are zero-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => x[*k],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => pow(a.eval(x), b.eval(x)),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(k) => Some(*k),
            Expr::Neg(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(p), Some(q)) => Some(p.max(q)),
                    (p, q) => p.or(q),
                }
            }
        }
    }

    fn shifted(&self, offset: usize) -> Expr {
        let b = |e: &Expr| Box::new(e.shifted(offset));
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Var(k) => Expr::Var(k + offset),
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, y) => Expr::Pow(b(x), b(y)),
            Expr::Call(f, a) => Expr::Call(*f, b(a)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

// Integer exponents go through powi so that x^2 is exact and defined for x < 0.
fn pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= 64.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() && *v != 0.0 {
                    write!(f, "-{:?}", -v)
                } else {
                    write!(f, "{:?}", v.abs())
                }
            }
            Expr::Var(k) => write!(f, "x{}", k + 1),
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_child(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                b.write_child(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { '*' } else { '/' })?;
                b.write_child(f, 3)
            }
            Expr::Pow(a, b) => {
                a.write_child(f, 5)?;
                write!(f, "^")?;
                b.write_child(f, 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// A parsed, evaluable expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Expr,
}

impl Expression {
    /// Parses `src`, accepting any variable `x<k>` with `k >= 1`.
    pub fn parse(src: &str) -> std::result::Result<Self, ParseError> {
        Ok(Expression {
            root: parse::parse(src, None)?,
        })
    }

    /// Parses `src`, rejecting variables beyond `x<num_vars>`.
    pub fn parse_with_vars(src: &str, num_vars: usize) -> std::result::Result<Self, ParseError> {
        Ok(Expression {
            root: parse::parse(src, Some(num_vars))?,
        })
    }

    pub fn constant(v: f64) -> Self {
        Expression { root: Expr::Num(v) }
    }

    pub fn from_expr(root: Expr) -> Self {
        Expression { root }
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    /// Number of variables the expression needs (highest index + 1).
    pub fn arity(&self) -> usize {
        self.root.max_var().map_or(0, |k| k + 1)
    }

    pub fn is_constant(&self) -> bool {
        self.root.max_var().is_none()
    }

    /// Evaluates at the binding `x` (`x[0]` is `x1`).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() < self.arity() {
            return Err(Error::Argument(format!(
                "expression `{}` needs {} variables, got {}",
                self,
                self.arity(),
                x.len()
            )));
        }
        Ok(self.root.eval(x))
    }

    /// Symbolic partial derivative with respect to the zero-based variable `var`.
    pub fn differentiate(&self, var: usize) -> Expression {
        Expression {
            root: diff::derivative(&self.root, var),
        }
    }

    /// The same expression with every variable index raised by `offset`.
    pub fn shifted(&self, offset: usize) -> Expression {
        Expression {
            root: self.root.shifted(offset),
        }
    }

    /// Symbolic partial derivative with respect to a variable named `x<k>`.
    pub fn differentiate_named(&self, var: &str) -> Result<Expression> {
        let k = parse::variable_index(var)
            .ok_or_else(|| Error::Argument(format!("`{var}` is not a variable name")))?;
        Ok(self.differentiate(k))
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

impl std::str::FromStr for Expression {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(src: &str, x: &[f64]) -> f64 {
        Expression::parse(src).unwrap().eval(x).unwrap()
    }

    #[test]
    fn exp_at_origin_and_one() {
        assert_eq!(ev("exp(2*x2)", &[0.0, 0.0]), 1.0);
        let e2 = std::f64::consts::E * std::f64::consts::E;
        assert!((ev("exp(2*x2)", &[0.0, 1.0]) - e2).abs() < 1e-15 * e2);
        assert!((ev("exp(2*x2)", &[0.0, 1.0]) - 7.38905609893065).abs() < 1e-13);
    }

    #[test]
    fn syntax_error_offset() {
        match Expression::parse("x1 + * x2") {
            Err(ParseError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 5);
                assert!(expected.iter().any(|e| e == "variable"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("-2^2", &[]), -4.0);
        assert_eq!(ev("2^3^2", &[]), 512.0);
        assert_eq!(ev("8/4/2", &[]), 1.0);
        assert_eq!(ev("8-4-2", &[]), 2.0);
        assert_eq!(ev("2*3+4*5", &[]), 26.0);
        assert_eq!(ev("2^-1", &[]), 0.5);
        assert_eq!(ev("  1 +\t2 ", &[]), 3.0);
        assert_eq!(ev("1.5e1 - 2E-1", &[]), 14.8);
        assert_eq!(ev("-x1^2", &[3.0]), -9.0);
        assert_eq!(ev("(-x1)^2", &[3.0]), 9.0);
    }

    #[test]
    fn errors() {
        assert_eq!(Expression::parse("   "), Err(ParseError::Empty));
        assert!(matches!(
            Expression::parse("y + 1"),
            Err(ParseError::UnknownIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            Expression::parse_with_vars("x1 + x3", 2),
            Err(ParseError::UnknownIdentifier { offset: 5, .. })
        ));
        assert!(matches!(Expression::parse("x0"), Err(ParseError::UnknownIdentifier { .. })));
        assert!(matches!(Expression::parse("exp x1"), Err(ParseError::Syntax { offset: 4, .. })));
        assert!(matches!(Expression::parse("(x1"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(Expression::parse("x1 x2"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(matches!(Expression::parse("x1 # 2"), Err(ParseError::Syntax { offset: 3, .. })));
        assert!(Expression::parse("x1").unwrap().eval(&[]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let e = Expression::parse("exp(2*x2)").unwrap();
        let d = e.differentiate_named("x2").unwrap();
        for x2 in [-1.0f64, 0.0, 0.3, 2.0] {
            let want = 2.0 * (2.0 * x2).exp();
            assert_eq!(d.eval(&[0.0, x2]).unwrap(), want);
        }
        let sq = Expression::parse("x1^2").unwrap().differentiate(0);
        assert_eq!(sq.eval(&[3.0]).unwrap(), 6.0);
        assert!(Expression::parse("4.5").unwrap().differentiate(0).is_constant());
        assert_eq!(Expression::parse("4.5").unwrap().differentiate(0).eval(&[]).unwrap(), 0.0);
        assert!(e.differentiate_named("y").is_err());
    }

    #[test]
    fn display_reparses_to_same_tree() {
        for src in [
            "-x1^2",
            "(-x1)^2",
            "x1 - (x2 - x3)",
            "x1/(x2*x3)",
            "2^3^2",
            "(2^3)^2",
            "exp(-2*x2)*(1 + 0.1*sin(x1))",
            "-(x1 + x2)",
            "x1^-0.5",
            "1e-7*x1",
        ] {
            let e = Expression::parse(src).unwrap();
            let again = Expression::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src} -> {e}");
        }
    }

    // Random expression trees on a domain where every function is defined.
    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-2.0f64..2.0).prop_map(|v| Expr::Num((v * 100.0).round() / 100.0)),
            (0usize..3).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                // denominators and log/sqrt arguments kept positive
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(
                    Box::new(a),
                    Box::new(Expr::Add(
                        Box::new(Expr::Num(2.5)),
                        Box::new(Expr::Call(Func::Sin, Box::new(b))),
                    )),
                )),
                inner.clone().prop_map(|a| Expr::Pow(Box::new(a), Box::new(Expr::Num(2.0)))),
                inner.clone().prop_map(|a| Expr::Call(
                    Func::Exp,
                    Box::new(Expr::Call(Func::Sin, Box::new(a))),
                )),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
                inner.clone().prop_map(|a| Expr::Call(Func::Cos, Box::new(a))),
                inner.clone().prop_map(|a| Expr::Call(
                    Func::Log,
                    Box::new(Expr::Add(
                        Box::new(Expr::Num(1.5)),
                        Box::new(Expr::Call(Func::Cos, Box::new(a))),
                    )),
                )),
                inner.prop_map(|a| Expr::Call(
                    Func::Sqrt,
                    Box::new(Expr::Add(
                        Box::new(Expr::Num(1.2)),
                        Box::new(Expr::Call(Func::Sin, Box::new(a))),
                    )),
                )),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // Symbolic derivative against a central-difference oracle.
        #[test]
        fn derivative_matches_central_difference(
            e in arb_expr(),
            x in proptest::collection::vec(-1.0f64..1.0, 3),
            var in 0usize..3,
        ) {
            let expr = Expression::from_expr(e);
            let d = expr.differentiate(var).eval(&x).unwrap();
            let h = 1e-5;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[var] += h;
            xm[var] -= h;
            let fd = (expr.eval(&xp).unwrap() - expr.eval(&xm).unwrap()) / (2.0 * h);
            let scale = 1.0f64.max(d.abs());
            prop_assert!((d - fd).abs() <= 1e-7 * scale, "{} d={} fd={}", expr, d, fd);
        }

        #[test]
        fn display_roundtrip_preserves_values(
            e in arb_expr(),
            x in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let expr = Expression::from_expr(e);
            let again = Expression::parse(&expr.to_string()).unwrap();
            let a = expr.eval(&x).unwrap();
            let b = again.eval(&x).unwrap();
            prop_assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
}
