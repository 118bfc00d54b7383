//! Seeded check runs over a scenario and their JSON/text reports.

pub mod tolerances;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clairaut::{
    angle_omega, clairaut_condition_residual, clairaut_invariant_trace, geodesic_condition_residuals_at,
    infer_mean_curvature_potential, mean_curvature_formula_check, projected_geodesic_residual,
    ricci_identity_residual, theorem33_identity_residual, CurvatureIdentityReport,
};
use crate::error::{Error, Result};
use crate::geodesic::{integrate, GeodesicState, GeodesicTrace};
use crate::geometry::{inner, ChartPoint, Vector};
use crate::scenario::SubmersionScenario;
use crate::submersion::check_conformal;

pub const SCHEMA_VERSION: u32 = 1;

/// Rejection-sampling budget for a non-horizontal initial velocity.
const MAX_DRAWS: usize = 10_000;

/// Along a trace the split geodesic equations are evaluated every this many
/// states.
const CONDITION_STRIDE: usize = 100;

/// Sampling and integration settings of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub points: usize,
    pub geodesics: usize,
    pub step: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            points: 20,
            geodesics: 10,
            step: 1e-3,
            t_end: 1.0,
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 || self.geodesics == 0 {
            return Err(Error::Argument("point and geodesic counts must be positive".into()));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Argument(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Argument(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// One check: residuals at the sampled points against a tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub scenario: String,
    pub points: Vec<Vec<f64>>,
    pub residual_max: f64,
    pub residual_mean: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    pub fn new(check: &str, scenario: &str, points: Vec<Vec<f64>>, residuals: &[f64], tolerance: f64) -> Self {
        let residual_max = residuals.iter().copied().fold(0.0, f64::max);
        let residual_mean = if residuals.is_empty() {
            0.0
        } else {
            residuals.iter().sum::<f64>() / residuals.len() as f64
        };
        CheckRecord {
            check: check.into(),
            scenario: scenario.into(),
            points,
            residual_max,
            residual_mean,
            tolerance,
            pass: residual_max <= tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: &str) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A check that could not run on this scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedCheck {
    pub check: String,
    pub reason: String,
}

/// A declared flag against the observed verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expectation {
    pub flag: String,
    pub expected: bool,
    pub observed: bool,
    pub matches: bool,
}

/// Agreement of the tensor criterion with the dynamical invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coherence {
    pub condition_pass: bool,
    pub drift_pass: bool,
    pub concordant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub scenario: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub skipped: Vec<SkippedCheck>,
    pub expectations: Vec<Expectation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<Coherence>,
    pub expectations_met: bool,
}

impl RunReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == name)
    }

    pub fn expectation(&self, flag: &str) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.flag == flag)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} ({})\n", self.scenario, self.command);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<28} max {:>11.3e}  mean {:>11.3e}  tol {:>8.1e}  {}",
                c.check,
                c.residual_max,
                c.residual_mean,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        for s in &self.skipped {
            let _ = writeln!(out, "  {:<28} skipped: {}", s.check, s.reason);
        }
        for e in &self.expectations {
            let _ = writeln!(
                out,
                "  expected {:<10} {:<5}  observed {:<5}  {}",
                e.flag,
                e.expected,
                e.observed,
                if e.matches { "ok" } else { "MISMATCH" }
            );
        }
        if let Some(c) = &self.coherence {
            if !c.concordant {
                let _ = writeln!(
                    out,
                    "  condition and invariant disagree: condition {}, drift {}",
                    verdict(c.condition_pass),
                    verdict(c.drift_pass)
                );
            }
        }
        let _ = writeln!(out, "expectations {}", if self.expectations_met { "met" } else { "NOT met" });
        out
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports contain only plain data");
    s.push('\n');
    s
}

/// Points and integrated geodesics drawn from one generator.
#[derive(Clone, Debug)]
pub struct Sample {
    pub points: Vec<ChartPoint>,
    pub traces: Vec<GeodesicTrace>,
}

impl Sample {
    pub fn draw(s: &SubmersionScenario, config: &RunConfig) -> Result<Sample> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let points = s.sample_points(&mut rng, config.points);
        let traces = (0..config.geodesics)
            .map(|_| {
                let st = random_unit_state(s, &mut rng)?;
                integrate(s.total(), &st, st.t + config.t_end, config.step)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sample { points, traces })
    }

    fn coords(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }

    fn starts(&self) -> Vec<Vec<f64>> {
        self.traces.iter().map(|t| t.states()[0].point.to_vec()).collect()
    }
}

/// A unit-speed state at a uniform point of the sample box, with a uniform
/// coordinate direction rejected until `sin ω ≥` [`tolerances::MIN_SIN_OMEGA`].
pub fn random_unit_state<R: Rng>(s: &SubmersionScenario, rng: &mut R) -> Result<GeodesicState> {
    let m = s.total().dim();
    for _ in 0..MAX_DRAWS {
        let p = s.sample_point(rng);
        let w = Vector::from_iterator(m, (0..m).map(|_| rng.gen_range(-1.0..1.0)));
        let g = s.total().metric_at(p.coords())?;
        let n = inner(&g, &w, &w).sqrt();
        if !(n > 1e-3) {
            continue;
        }
        let st = GeodesicState::new(0.0, p, (w / n).as_slice().to_vec())?;
        if angle_omega(s.map(), &st)?.sin() >= tolerances::MIN_SIN_OMEGA {
            return Ok(st);
        }
    }
    Err(Error::Numeric(format!("no non-horizontal direction found in {MAX_DRAWS} draws")))
}

/// Errors that mean "this check does not apply here" rather than a failure.
fn is_inapplicable(e: &Error) -> bool {
    matches!(e, Error::PreconditionViolated(_) | Error::TrivialIdentity(_) | Error::NotBasic { .. })
}

struct Runner<'a> {
    s: &'a SubmersionScenario,
    sample: &'a Sample,
    checks: Vec<CheckRecord>,
    skipped: Vec<SkippedCheck>,
}

impl<'a> Runner<'a> {
    fn push(&mut self, name: &str, result: Result<CheckRecord>) -> Result<()> {
        match result {
            Ok(rec) => self.checks.push(rec),
            Err(e) if is_inapplicable(&e) => self.skipped.push(SkippedCheck {
                check: name.into(),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.skipped.push(SkippedCheck {
            check: name.into(),
            reason: reason.into(),
        });
    }

    fn per_point<F>(&self, name: &str, tol: f64, f: F) -> Result<CheckRecord>
    where
        F: Fn(&ChartPoint) -> Result<f64>,
    {
        let residuals = self.sample.points.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(CheckRecord::new(name, self.s.name(), self.sample.coords(), &residuals, tol))
    }

    fn per_trace<F>(&self, name: &str, tol: f64, f: F) -> Result<CheckRecord>
    where
        F: Fn(&GeodesicTrace) -> Result<f64>,
    {
        let residuals = self.sample.traces.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(CheckRecord::new(name, self.s.name(), self.sample.starts(), &residuals, tol))
    }

    fn core_checks(&mut self) -> Result<()> {
        let s = self.s;
        let map = s.map();
        let dil = s.dilation_or_estimate();

        let conformal = check_conformal(map, &self.sample.points, s.dilation()).map(|rep| {
            let rel: Vec<f64> = rep.samples.iter().map(|c| c.residual / (c.lambda * c.lambda).max(1.0)).collect();
            CheckRecord::new("conformal", s.name(), self.sample.coords(), &rel, tolerances::CONFORMAL)
        });
        self.push("conformal", conformal)?;
        let umbilical = self.per_point("umbilical", tolerances::UMBILICAL, |p| map.umbilical_residual(p));
        self.push("umbilical", umbilical)?;

        match s.clairaut_f() {
            Some(f) => {
                let cond = self.per_point("clairaut_condition", tolerances::CONDITION_TOL, |p| {
                    clairaut_condition_residual(map, &dil, f, p)
                });
                self.push("clairaut_condition", cond)?;
                let drift = self.per_trace("invariant_drift", tolerances::INVARIANT_TOL, |t| {
                    Ok(clairaut_invariant_trace(map, f, t)?.drift)
                });
                self.push("invariant_drift", drift)?;
            }
            None => {
                self.skip("clairaut_condition", "no f declared");
                self.skip("invariant_drift", "no f declared");
            }
        }
        let speed = self.per_trace("geodesic_speed", tolerances::SPEED_DRIFT, |t| Ok(t.speed_drift()));
        self.push("geodesic_speed", speed)?;

        let tension = self
            .sample
            .points
            .iter()
            .map(|p| map.tension_field(&dil, p))
            .collect::<Result<Vec<_>>>();
        match tension {
            Ok(values) => {
                let consistency: Vec<f64> = values.iter().map(|t| t.residual).collect();
                self.checks.push(CheckRecord::new(
                    "tension_consistency",
                    s.name(),
                    self.sample.coords(),
                    &consistency,
                    tolerances::TENSION_CONSISTENCY,
                ));
                let norms = values
                    .iter()
                    .map(|t| {
                        let gb = s.base().metric_at(t.trace.base().coords())?;
                        let c = t.trace.components();
                        Ok(inner(&gb, c, c).max(0.0).sqrt())
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.checks.push(CheckRecord::new(
                    "harmonic",
                    s.name(),
                    self.sample.coords(),
                    &norms,
                    tolerances::HARMONIC,
                ));
            }
            Err(e) if is_inapplicable(&e) => {
                self.skip("tension_consistency", &e.to_string());
                self.skip("harmonic", &e.to_string());
            }
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn identity_checks(&mut self) -> Result<()> {
        let s = self.s;
        let map = s.map();
        let dil = s.dilation_or_estimate();
        let frame = map.horizontal_frame().to_vec();

        let a_formula = self.per_point("a_formula", tolerances::A_FORMULA, |p| {
            let mut worst: f64 = 0.0;
            for a in &frame {
                for b in &frame {
                    worst = worst.max(map.a_formula_residual(&dil, a, b, p)?);
                }
            }
            Ok(worst)
        });
        self.push("a_formula", a_formula)?;
        let sff = self.per_point("second_fundamental_form", tolerances::SECOND_FUNDAMENTAL_FORM, |p| {
            let mut worst: f64 = 0.0;
            for a in &frame {
                for b in &frame {
                    worst = worst.max(map.second_fundamental_form(&dil, a, b, p)?.residual);
                }
            }
            Ok(worst)
        });
        self.push("second_fundamental_form", sff)?;

        let conditions = self.per_trace("geodesic_conditions", tolerances::GEODESIC_CONDITION_TOL, |t| {
            let mut worst: f64 = 0.0;
            for st in t.states().iter().step_by(CONDITION_STRIDE) {
                let (v, h) = geodesic_condition_residuals_at(map, st)?;
                worst = worst.max(v).max(h);
            }
            Ok(worst)
        });
        self.push("geodesic_conditions", conditions)?;
        let projected = self.per_trace("projected_geodesic", tolerances::PROJECTED_GEODESIC, |t| {
            Ok(projected_geodesic_residual(map, &dil, t)?.agreement_max)
        });
        self.push("projected_geodesic", projected)?;

        if let Some(f) = s.clairaut_f() {
            let checks = self
                .sample
                .points
                .iter()
                .map(|p| mean_curvature_formula_check(map, &dil, f, p))
                .collect::<Result<Vec<_>>>();
            match checks {
                Ok(cs) => {
                    let h: Vec<f64> = cs.iter().map(|c| c.h_residual).collect();
                    let d: Vec<f64> = cs.iter().map(|c| c.divergence_residual).collect();
                    self.checks.push(CheckRecord::new(
                        "mean_curvature_formula",
                        s.name(),
                        self.sample.coords(),
                        &h,
                        tolerances::MEAN_CURVATURE,
                    ));
                    self.checks.push(CheckRecord::new(
                        "mean_curvature_divergence",
                        s.name(),
                        self.sample.coords(),
                        &d,
                        tolerances::MEAN_CURVATURE_DIVERGENCE,
                    ));
                }
                Err(e) if is_inapplicable(&e) => {
                    self.skip("mean_curvature_formula", &e.to_string());
                    self.skip("mean_curvature_divergence", &e.to_string());
                }
                Err(e) => return Err(e),
            }
            let t33 = self.per_point("theorem33", tolerances::CURVATURE_IDENTITY_TOL, |p| {
                Ok(theorem33_identity_residual(map, &dil, f, p)?.residual)
            });
            self.push("theorem33", t33)?;
            if s.flags().einstein_lambda_f.is_some() {
                let k = map.fiber_dim();
                let ricci = self.per_point("ricci_identity", tolerances::CURVATURE_IDENTITY_TOL, |p| {
                    let mut worst: f64 = 0.0;
                    for i in 0..k {
                        worst = worst.max(ricci_identity_residual(map, &dil, f, p, i, None)?.residual);
                    }
                    Ok(worst)
                });
                self.push("ricci_identity", ricci)?;
            } else {
                self.skip("ricci_identity", "fibers not declared Einstein");
            }
        } else {
            for name in ["mean_curvature_formula", "mean_curvature_divergence", "theorem33", "ricci_identity"] {
                self.skip(name, "no f declared");
            }
        }

        match infer_mean_curvature_potential(map, &self.sample.points) {
            Ok(est) => {
                self.checks.push(
                    CheckRecord::new(
                        "potential_closedness",
                        s.name(),
                        self.sample.coords(),
                        &[est.closedness_max],
                        tolerances::POTENTIAL_CLOSEDNESS,
                    )
                    .with_note("diagnostic"),
                );
                if let Some(f) = s.clairaut_f() {
                    let gaps = self
                        .sample
                        .points
                        .iter()
                        .zip(&est.gradients)
                        .map(|(p, g)| {
                            let grad = s.total().gradient(f, p)?;
                            let d = g.components() - grad.components();
                            let gm = s.total().metric_at(p.coords())?;
                            Ok(inner(&gm, &d, &d).max(0.0).sqrt())
                        })
                        .collect::<Result<Vec<_>>>()?;
                    self.checks.push(
                        CheckRecord::new(
                            "potential_gradient",
                            s.name(),
                            self.sample.coords(),
                            &gaps,
                            tolerances::POTENTIAL_CLOSEDNESS,
                        )
                        .with_note("diagnostic"),
                    );
                }
            }
            Err(e) if is_inapplicable(&e) => self.skip("potential_closedness", &e.to_string()),
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn finish(self, command: &str, config: &RunConfig) -> RunReport {
        let flags = self.s.flags();
        let pass = |name: &str| self.checks.iter().find(|c| c.check == name).map(|c| c.pass);
        let mut expectations = Vec::new();
        let mut expect = |flag: &str, expected: bool, observed: Option<bool>| {
            if let Some(observed) = observed {
                expectations.push(Expectation {
                    flag: flag.into(),
                    expected,
                    observed,
                    matches: expected == observed,
                });
            }
        };
        expect("conformal", flags.expected_conformal, pass("conformal"));
        expect("umbilical", flags.expected_umbilical, pass("umbilical"));
        let condition = pass("clairaut_condition");
        let drift = pass("invariant_drift");
        let coherence = match (condition, drift) {
            (Some(c), Some(d)) => Some(Coherence {
                condition_pass: c,
                drift_pass: d,
                concordant: c == d,
            }),
            _ => None,
        };
        let clairaut = match (condition, drift) {
            (Some(c), Some(d)) => Some(c && d),
            // without f nothing can be Clairaut-certified
            _ => Some(false),
        };
        expect("clairaut", flags.expected_clairaut, clairaut);
        expect("harmonic", flags.expected_harmonic, pass("harmonic"));
        let expectations_met = expectations.iter().all(|e| e.matches);
        RunReport {
            schema: SCHEMA_VERSION,
            command: command.into(),
            scenario: self.s.name().into(),
            config: config.clone(),
            checks: self.checks,
            skipped: self.skipped,
            expectations,
            coherence,
            expectations_met,
        }
    }
}

/// Conformality, umbilicity, the Clairaut criterion and invariant, geodesic
/// speed, and the tension field, compared against the declared flags.
pub fn run_check(s: &SubmersionScenario, config: &RunConfig) -> Result<RunReport> {
    let sample = Sample::draw(s, config)?;
    let mut r = Runner {
        s,
        sample: &sample,
        checks: Vec::new(),
        skipped: Vec::new(),
    };
    r.core_checks()?;
    Ok(r.finish("check", config))
}

/// Every check of [`run_check`] plus the structural identities.
pub fn run_report(s: &SubmersionScenario, config: &RunConfig) -> Result<RunReport> {
    let sample = Sample::draw(s, config)?;
    let mut r = Runner {
        s,
        sample: &sample,
        checks: Vec::new(),
        skipped: Vec::new(),
    };
    r.core_checks()?;
    r.identity_checks()?;
    Ok(r.finish("report", config))
}

/// One evaluated curvature identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureSample {
    pub identity: String,
    pub point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub terms: BTreeMap<String, f64>,
}

impl CurvatureSample {
    fn new(identity: &str, p: &ChartPoint, index: Option<usize>, rep: &CurvatureIdentityReport) -> Self {
        CurvatureSample {
            identity: identity.into(),
            point: p.to_vec(),
            index,
            lhs: rep.lhs,
            rhs: rep.rhs,
            residual: rep.residual,
            terms: rep.terms.iter().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureRun {
    pub schema: u32,
    pub scenario: String,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub samples: Vec<CurvatureSample>,
    pub notices: Vec<String>,
}

impl CurvatureRun {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {} (curvature)\n", self.scenario);
        for n in &self.notices {
            let _ = writeln!(out, "  notice: {n}");
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  {:<16} max {:>11.3e}  mean {:>11.3e}  tol {:>8.1e}  {}",
                c.check,
                c.residual_max,
                c.residual_mean,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        if let Some(first) = self.samples.first() {
            let _ = writeln!(out, "  terms at {:?} ({}):", first.point, first.identity);
            let _ = writeln!(out, "    lhs = {:.6e}, rhs = {:.6e}", first.lhs, first.rhs);
            for (k, v) in &first.terms {
                let _ = writeln!(out, "    {k} = {v:.6e}");
            }
        }
        out
    }
}

/// Vertical scalar curvature identity and, for declared Einstein fibers, the
/// Ricci identity at seeded points. One-dimensional fibers give a notice.
pub fn run_curvature(s: &SubmersionScenario, config: &RunConfig) -> Result<CurvatureRun> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points = s.sample_points(&mut rng, config.points);
    let coords: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    let mut run = CurvatureRun {
        schema: SCHEMA_VERSION,
        scenario: s.name().into(),
        config: config.clone(),
        checks: Vec::new(),
        samples: Vec::new(),
        notices: Vec::new(),
    };
    let Some(f) = s.clairaut_f() else {
        run.notices.push("no f declared; the identities need one".into());
        return Ok(run);
    };
    let map = s.map();
    let dil = s.dilation_or_estimate();
    let mut residuals = Vec::new();
    for p in &points {
        match theorem33_identity_residual(map, &dil, f, p) {
            Ok(rep) => {
                residuals.push(rep.residual);
                run.samples.push(CurvatureSample::new("theorem33", p, None, &rep));
            }
            Err(Error::TrivialIdentity(msg)) => {
                run.notices.push(format!("trivial identity: {msg}"));
                return Ok(run);
            }
            Err(e) => return Err(e),
        }
    }
    run.checks.push(CheckRecord::new(
        "theorem33",
        s.name(),
        coords.clone(),
        &residuals,
        tolerances::CURVATURE_IDENTITY_TOL,
    ));
    if s.flags().einstein_lambda_f.is_some() {
        let mut residuals = Vec::new();
        for p in &points {
            let mut worst: f64 = 0.0;
            for i in 0..map.fiber_dim() {
                let rep = ricci_identity_residual(map, &dil, f, p, i, None)?;
                worst = worst.max(rep.residual);
                run.samples.push(CurvatureSample::new("ricci_identity", p, Some(i), &rep));
            }
            residuals.push(worst);
        }
        run.checks.push(CheckRecord::new(
            "ricci_identity",
            s.name(),
            coords,
            &residuals,
            tolerances::CURVATURE_IDENTITY_TOL,
        ));
    } else {
        run.notices.push("fibers not declared Einstein; Ricci identity not run".into());
    }
    Ok(run)
}
