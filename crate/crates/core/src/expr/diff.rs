//! Symbolic differentiation with light constant folding.

use super::{Expr, Func};

fn num(v: f64) -> Expr {
    Expr::Num(v)
}

fn is_num(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Num(x) if *x == v)
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(v) => num(-v),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x + y),
        _ if is_num(&a, 0.0) => b,
        _ if is_num(&b, 0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x - y),
        _ if is_num(&b, 0.0) => a,
        _ if is_num(&a, 0.0) => neg(b),
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Num(x), Expr::Num(y)) => num(x * y),
        _ if is_num(&a, 0.0) || is_num(&b, 0.0) => num(0.0),
        _ if is_num(&a, 1.0) => b,
        _ if is_num(&b, 1.0) => a,
        _ if is_num(&a, -1.0) => neg(b),
        _ if is_num(&b, -1.0) => neg(a),
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_num(&a, 0.0) => num(0.0),
        _ if is_num(&b, 1.0) => a,
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

fn pow(a: Expr, b: Expr) -> Expr {
    match &b {
        _ if is_num(&b, 1.0) => a,
        _ if is_num(&b, 0.0) => num(1.0),
        _ => Expr::Pow(Box::new(a), Box::new(b)),
    }
}

fn call(f: Func, a: Expr) -> Expr {
    Expr::Call(f, Box::new(a))
}

fn depends_on(e: &Expr, var: usize) -> bool {
    match e {
        Expr::Num(_) => false,
        Expr::Var(k) => *k == var,
        Expr::Neg(a) | Expr::Call(_, a) => depends_on(a, var),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
            depends_on(a, var) || depends_on(b, var)
        }
    }
}

pub(super) fn derivative(e: &Expr, var: usize) -> Expr {
    if !depends_on(e, var) {
        return num(0.0);
    }
    match e {
        Expr::Num(_) => num(0.0),
        Expr::Var(k) => num(if *k == var { 1.0 } else { 0.0 }),
        Expr::Neg(a) => neg(derivative(a, var)),
        Expr::Add(a, b) => add(derivative(a, var), derivative(b, var)),
        Expr::Sub(a, b) => sub(derivative(a, var), derivative(b, var)),
        Expr::Mul(a, b) => add(
            mul(derivative(a, var), (**b).clone()),
            mul((**a).clone(), derivative(b, var)),
        ),
        Expr::Div(a, b) => {
            // (a'b - ab') / b^2
            let da = derivative(a, var);
            let db = derivative(b, var);
            if is_num(&db, 0.0) {
                div(da, (**b).clone())
            } else {
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), num(2.0)),
                )
            }
        }
        Expr::Pow(a, b) => {
            let da = derivative(a, var);
            if !depends_on(b, var) {
                // b * a^(b-1) * a'
                let lowered = match &**b {
                    Expr::Num(v) => num(v - 1.0),
                    other => sub(other.clone(), num(1.0)),
                };
                mul(mul((**b).clone(), pow((**a).clone(), lowered)), da)
            } else {
                // a^b * (b' ln a + b a'/a)
                let db = derivative(b, var);
                let log_term = mul(db, call(Func::Log, (**a).clone()));
                let base_term = div(mul((**b).clone(), da), (**a).clone());
                mul(e.clone(), add(log_term, base_term))
            }
        }
        Expr::Call(f, a) => {
            let da = derivative(a, var);
            let outer = match f {
                Func::Exp => e.clone(),
                Func::Log => return div(da, (**a).clone()),
                Func::Sin => call(Func::Cos, (**a).clone()),
                Func::Cos => neg(call(Func::Sin, (**a).clone())),
                Func::Sqrt => return div(da, mul(num(2.0), e.clone())),
            };
            mul(outer, da)
        }
    }
}
