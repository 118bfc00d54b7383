use super::file::{MetricSpec, ScenarioFlags, ScenarioSpec};
use super::{validation_points, SubmersionScenario};
use crate::error::{Error, Result};
use crate::expr::{Expr, Expression};

fn e(src: &str) -> Expression {
    Expression::parse(src).unwrap_or_else(|err| panic!("built-in expression `{src}`: {err}"))
}

fn row(srcs: &[&str]) -> Vec<Expression> {
    srcs.iter().map(|s| e(s)).collect()
}

fn axis(m: usize, i: usize) -> Vec<Expression> {
    (0..m).map(|k| Expression::constant(if k == i { 1.0 } else { 0.0 })).collect()
}

fn is_one(x: &Expression) -> bool {
    matches!(x.root(), Expr::Num(v) if *v == 1.0)
}

/// `a * b`, dropping unit factors.
fn times(a: &Expression, b: &Expression) -> Expression {
    if is_one(a) {
        return b.clone();
    }
    if is_one(b) {
        return a.clone();
    }
    Expression::from_expr(Expr::Mul(Box::new(a.root().clone()), Box::new(b.root().clone())))
}

fn square(a: &Expression) -> Expression {
    if is_one(a) {
        return a.clone();
    }
    Expression::from_expr(Expr::Pow(Box::new(a.root().clone()), Box::new(Expr::Num(2.0))))
}

fn call(name: &str, a: &Expression) -> Expression {
    e(&format!("{name}({a})"))
}

/// `F(x1, x2) = (x1 + x2)/√2` on `(R², e^{2x₂}(dx₁² + dx₂²))` onto a line.
pub(super) fn example2_spec() -> ScenarioSpec {
    ScenarioSpec {
        name: "example2".into(),
        total: MetricSpec::diagonal(row(&["exp(2*x2)", "exp(2*x2)"])),
        base: MetricSpec::flat(1),
        map: row(&["(x1 + x2)/sqrt(2)"]),
        vertical: vec![row(&["exp(-x2)", "-exp(-x2)"])],
        // the basic unit lift of d/dy; same direction as e1 + e2
        horizontal: vec![row(&["1/sqrt(2)", "1/sqrt(2)"])],
        dilation: Some(e("exp(-x2)")),
        clairaut_f: Some(e("x1 + x2")),
        flags: ScenarioFlags {
            expected_conformal: true,
            expected_clairaut: true,
            expected_umbilical: true,
            expected_harmonic: false,
            einstein_lambda_f: None,
        },
        sample_box: vec![(-1.0, 1.0), (-1.0, 1.0)],
    }
}

pub fn build_example2() -> Result<SubmersionScenario> {
    SubmersionScenario::from_spec(example2_spec())
}

/// Example 2's map with `g₁₁` perturbed by `1 + 0.1 sin x₁` and `f = x₁`.
pub fn perturbed_nonclairaut() -> ScenarioSpec {
    ScenarioSpec {
        name: "perturbed_nonclairaut".into(),
        total: MetricSpec::diagonal(row(&["exp(2*x2)*(1 + 0.1*sin(x1))", "exp(2*x2)"])),
        base: MetricSpec::flat(1),
        map: row(&["(x1 + x2)/sqrt(2)"]),
        vertical: vec![row(&["exp(-x2)", "-exp(-x2)"])],
        horizontal: vec![row(&[
            "sqrt(2)/(2 + 0.1*sin(x1))",
            "sqrt(2)*(1 + 0.1*sin(x1))/(2 + 0.1*sin(x1))",
        ])],
        dilation: Some(e("exp(-x2)*sqrt((1/(1 + 0.1*sin(x1)) + 1)/2)")),
        clairaut_f: Some(e("x1")),
        flags: ScenarioFlags {
            expected_conformal: true,
            expected_clairaut: false,
            expected_umbilical: true,
            expected_harmonic: false,
            einstein_lambda_f: None,
        },
        sample_box: vec![(-1.0, 1.0), (-1.0, 1.0)],
    }
}

/// Projection of `R^m` onto its first `n` coordinates.
pub fn build_euclidean_product(m: usize, n: usize) -> Result<SubmersionScenario> {
    SubmersionScenario::from_spec(euclidean_product_spec(m, n)?)
}

fn euclidean_product_spec(m: usize, n: usize) -> Result<ScenarioSpec> {
    if n == 0 || n > m {
        return Err(Error::Argument(format!("cannot project R^{m} onto R^{n}")));
    }
    Ok(ScenarioSpec {
        name: "euclidean_product".into(),
        total: MetricSpec::flat(m),
        base: MetricSpec::flat(n),
        map: (0..n).map(|i| e(&format!("x{}", i + 1))).collect(),
        vertical: (n..m).map(|i| axis(m, i)).collect(),
        horizontal: (0..n).map(|i| axis(m, i)).collect(),
        dilation: Some(Expression::constant(1.0)),
        clairaut_f: Some(Expression::constant(0.0)),
        flags: ScenarioFlags {
            expected_conformal: true,
            expected_clairaut: true,
            expected_umbilical: true,
            expected_harmonic: true,
            einstein_lambda_f: (m - n >= 2).then_some(0.0),
        },
        sample_box: vec![(-1.0, 1.0); m],
    })
}

/// Doubly warped product `M₁ × M₂` with `g = λ(q)² g₁ + f₁(p)² g₂`,
/// projected onto `M₁`. Expressions for `g₂` and `lam` use the local
/// coordinates `x1..` of `M₂`.
#[derive(Clone, Debug)]
pub struct DoublyWarped {
    pub name: String,
    pub g1: MetricSpec,
    pub g2: MetricSpec,
    pub f1: Expression,
    pub lam: Expression,
    pub box1: Vec<(f64, f64)>,
    pub box2: Vec<(f64, f64)>,
    pub einstein_lambda_f: Option<f64>,
}

impl DoublyWarped {
    pub fn spec(&self) -> Result<ScenarioSpec> {
        let (d1, d2) = (self.g1.dim, self.g2.dim);
        let m = d1 + d2;
        if self.box1.len() != d1 || self.box2.len() != d2 {
            return Err(Error::Argument("sample box does not match the factor dimensions".into()));
        }
        if self.f1.arity() > d1 || self.lam.arity() > d2 {
            return Err(Error::Argument("warp functions must depend on their own factor only".into()));
        }
        let lam = self.lam.shifted(d1);
        let lam2 = square(&lam);
        let f12 = square(&self.f1);
        let mut total = MetricSpec::empty(m);
        for i in 0..d1 {
            for j in 0..d1 {
                total.entries[i][j] = self.g1.entries[i][j].as_ref().map(|g| times(&lam2, g));
            }
        }
        for a in 0..d2 {
            for b in 0..d2 {
                total.entries[d1 + a][d1 + b] = self.g2.entries[a][b].as_ref().map(|g| times(&f12, &g.shifted(d1)));
            }
        }
        let lam_const = self.lam.is_constant();
        Ok(ScenarioSpec {
            name: self.name.clone(),
            total,
            base: self.g1.clone(),
            map: (0..d1).map(|i| e(&format!("x{}", i + 1))).collect(),
            vertical: (d1..m).map(|i| axis(m, i)).collect(),
            horizontal: (0..d1).map(|i| axis(m, i)).collect(),
            dilation: Some(e(&format!("1/({lam})"))),
            clairaut_f: Some(call("log", &self.f1)),
            flags: ScenarioFlags {
                expected_conformal: true,
                // the dilation 1/lam(q) is constant on fibers only for constant lam
                expected_clairaut: lam_const,
                expected_umbilical: true,
                expected_harmonic: self.f1.is_constant(),
                einstein_lambda_f: self.einstein_lambda_f,
            },
            sample_box: self.box1.iter().chain(&self.box2).copied().collect(),
        })
    }
}

pub fn build_doubly_warped(dw: &DoublyWarped) -> Result<SubmersionScenario> {
    let spec = dw.spec()?;
    let d1 = dw.g1.dim;
    for p in validation_points(&spec) {
        let x = p.coords().as_slice();
        let f1 = dw.f1.eval(&x[..d1])?;
        let lam = dw.lam.eval(&x[d1..])?;
        if !(f1 > 0.0 && lam > 0.0) {
            return Err(Error::Domain(format!("warp functions must be positive: f1 = {f1}, lam = {lam} at {x:?}")));
        }
    }
    SubmersionScenario::from_spec(spec)
}

const F1_DEFAULT: &str = "2 + 0.5*sin(x1) + 0.15*x2^2";

/// Flat factors, `f₁ = 2 + 0.5 sin x₁ + 0.15 x₂²`, constant `lam = 1.25`.
pub fn doubly_warped_default() -> DoublyWarped {
    DoublyWarped {
        name: "doubly_warped_default".into(),
        g1: MetricSpec::flat(2),
        g2: MetricSpec::flat(2),
        f1: e(F1_DEFAULT),
        lam: e("1.25"),
        box1: vec![(-1.0, 1.0); 2],
        box2: vec![(-1.0, 1.0); 2],
        einstein_lambda_f: Some(0.0),
    }
}

/// As the default, with `lam = 1 + 0.1 cos x₁ + 0.05 x₂²` on the fiber factor.
pub fn doubly_warped_varlam() -> DoublyWarped {
    DoublyWarped {
        name: "doubly_warped_varlam".into(),
        lam: e("1 + 0.1*cos(x1) + 0.05*x2^2"),
        einstein_lambda_f: None,
        ..doubly_warped_default()
    }
}

/// Round unit-sphere fibers warped by `f₁` over a flat plane, `lam = 1`.
pub fn doubly_warped_sphere() -> DoublyWarped {
    DoublyWarped {
        name: "doubly_warped_sphere".into(),
        g2: MetricSpec::diagonal(row(&["1", "sin(x1)^2"])),
        lam: e("1"),
        box2: vec![(1.0, 2.1), (-1.0, 1.0)],
        einstein_lambda_f: Some(1.0),
        ..doubly_warped_default()
    }
}

/// `dt² + r(t)² dφ²` projected onto the `t`-axis.
pub fn build_surface_of_revolution(name: &str, r: Expression) -> Result<SubmersionScenario> {
    let spec = surface_spec(name, r.clone())?;
    for p in validation_points(&spec) {
        let v = r.eval(p.coords().as_slice())?;
        if !(v > 0.0) {
            return Err(Error::Domain(format!("profile must be positive: r = {v} at {:?}", p.to_vec())));
        }
    }
    SubmersionScenario::from_spec(spec)
}

fn surface_spec(name: &str, r: Expression) -> Result<ScenarioSpec> {
    if r.arity() > 1 {
        return Err(Error::Argument("the profile may depend on x1 only".into()));
    }
    Ok(ScenarioSpec {
        name: name.into(),
        total: MetricSpec::diagonal(vec![Expression::constant(1.0), square(&r)]),
        base: MetricSpec::flat(1),
        map: row(&["x1"]),
        vertical: vec![row(&["0", "1"])],
        horizontal: vec![row(&["1", "0"])],
        dilation: Some(Expression::constant(1.0)),
        clairaut_f: Some(call("log", &r)),
        flags: ScenarioFlags {
            expected_conformal: true,
            expected_clairaut: true,
            expected_umbilical: true,
            expected_harmonic: r.is_constant(),
            einstein_lambda_f: None,
        },
        sample_box: vec![(-1.0, 1.0), (0.0, 2.0 * std::f64::consts::PI)],
    })
}

/// Catenoid-like profile `r = cosh t`, written with `exp`.
pub fn surface_of_revolution_default() -> ScenarioSpec {
    surface_spec("surface_of_revolution_default", e("(exp(x1) + exp(-x1))/2")).expect("fixed profile")
}

/// All built-in scenarios, alphabetically.
pub fn registry() -> Vec<ScenarioSpec> {
    let mut specs = vec![
        example2_spec(),
        perturbed_nonclairaut(),
        euclidean_product_spec(4, 2).expect("fixed dimensions"),
        doubly_warped_default().spec().expect("fixed factors"),
        doubly_warped_varlam().spec().expect("fixed factors"),
        doubly_warped_sphere().spec().expect("fixed factors"),
        surface_of_revolution_default(),
    ];
    specs.sort_by(|a, b| a.name.cmp(&b.name));
    specs
}
