use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use clairaut_core::clairaut::{angle_omega, clairaut_invariant_trace};
use clairaut_core::geodesic::{fmt_num, integrate, GeodesicState};
use clairaut_core::geometry::ChartPoint;
use clairaut_core::report::{random_unit_state, run_check, run_curvature, run_report, to_json, RunReport};
use clairaut_core::scenario::{load_scenario, lookup, registry, SubmersionScenario};
use clairaut_core::Error;

use crate::{Cli, Command, Format, GeodesicArgs, Options, Outcome, Target};

pub(crate) fn run(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    match &cli.command {
        Command::Scenarios => {
            emit(opts, &scenarios(opts.format))?;
            Ok(Outcome::Met)
        }
        Command::Check(t) => checks(opts, t, run_check),
        Command::Report(t) => checks(opts, t, run_report),
        Command::Curvature(t) => curvature(opts, t),
        Command::Geodesic(g) => geodesic(opts, g),
    }
}

fn resolve(opts: &Options, target: &Target) -> Result<SubmersionScenario> {
    if let Some(path) = &opts.file {
        if target.name.is_some() {
            bail!("give either a scenario name or --file, not both");
        }
        return load_scenario(path).with_context(|| format!("loading {}", path.display()));
    }
    let name = match (&target.name, &opts.scenario) {
        (Some(a), Some(b)) if a != b => bail!("conflicting scenarios `{a}` and `{b}`"),
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => bail!("no scenario given; pass a registry name or --file"),
    };
    match lookup(name) {
        Err(Error::UnknownScenario(_)) if Path::new(name).is_file() => {
            load_scenario(name).with_context(|| format!("loading {name}"))
        }
        other => other.with_context(|| format!("scenario `{name}`")),
    }
}

fn emit(opts: &Options, text: &str) -> Result<()> {
    match &opts.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn scenarios(format: Format) -> String {
    let specs = registry();
    match format {
        Format::Json => {
            let list: Vec<_> = specs
                .iter()
                .map(|s| {
                    json!({
                        "name": s.name,
                        "total_dim": s.total.dim,
                        "base_dim": s.base.dim,
                        "expected_conformal": s.flags.expected_conformal,
                        "expected_clairaut": s.flags.expected_clairaut,
                        "expected_umbilical": s.flags.expected_umbilical,
                        "expected_harmonic": s.flags.expected_harmonic,
                        "einstein_lambda_f": s.flags.einstein_lambda_f,
                    })
                })
                .collect();
            to_json(&json!({ "schema": 1, "scenarios": list }))
        }
        Format::Csv => {
            let mut out = String::from("name,total_dim,base_dim,conformal,clairaut,umbilical,harmonic,einstein_lambda_f\n");
            for s in &specs {
                let f = &s.flags;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    s.name,
                    s.total.dim,
                    s.base.dim,
                    f.expected_conformal,
                    f.expected_clairaut,
                    f.expected_umbilical,
                    f.expected_harmonic,
                    f.einstein_lambda_f.map(fmt_num).unwrap_or_default()
                );
            }
            out
        }
        Format::Text => {
            let mut out = String::new();
            for s in &specs {
                let f = &s.flags;
                let mut flags: Vec<String> = [
                    ("conformal", f.expected_conformal),
                    ("clairaut", f.expected_clairaut),
                    ("umbilical", f.expected_umbilical),
                    ("harmonic", f.expected_harmonic),
                ]
                .iter()
                .filter(|(_, on)| *on)
                .map(|(n, _)| n.to_string())
                .collect();
                if let Some(l) = f.einstein_lambda_f {
                    flags.push(format!("einstein({l})"));
                }
                let _ = writeln!(out, "{:<32} {}->{}  {}", s.name, s.total.dim, s.base.dim, flags.join(" "));
            }
            out
        }
    }
}

fn checks(
    opts: &Options,
    target: &Target,
    runner: fn(&SubmersionScenario, &clairaut_core::report::RunConfig) -> clairaut_core::Result<RunReport>,
) -> Result<Outcome> {
    let s = resolve(opts, target)?;
    let report = runner(&s, &opts.config())?;
    let text = match opts.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
        Format::Csv => {
            let mut out = String::from("check,scenario,residual_max,residual_mean,tolerance,pass\n");
            for c in &report.checks {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.check,
                    c.scenario,
                    fmt_num(c.residual_max),
                    fmt_num(c.residual_mean),
                    fmt_num(c.tolerance),
                    c.pass
                );
            }
            out
        }
    };
    emit(opts, &text)?;
    Ok(if report.expectations_met { Outcome::Met } else { Outcome::Mismatch })
}

fn curvature(opts: &Options, target: &Target) -> Result<Outcome> {
    let s = resolve(opts, target)?;
    let run = run_curvature(&s, &opts.config())?;
    let text = match opts.format {
        Format::Json => run.to_json(),
        Format::Text => run.to_text(),
        Format::Csv => {
            let mut out = String::from("identity,index,point,lhs,rhs,residual\n");
            for c in &run.samples {
                let point: Vec<String> = c.point.iter().map(|v| fmt_num(*v)).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.identity,
                    c.index.map(|i| i.to_string()).unwrap_or_default(),
                    point.join(";"),
                    fmt_num(c.lhs),
                    fmt_num(c.rhs),
                    fmt_num(c.residual)
                );
            }
            out
        }
    };
    emit(opts, &text)?;
    Ok(if run.passes() { Outcome::Met } else { Outcome::Mismatch })
}

/// `trace.csv` → `trace.invariant.csv`.
fn invariant_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "trace".into());
    out.with_file_name(format!("{stem}.invariant.csv"))
}

fn geodesic(opts: &Options, args: &GeodesicArgs) -> Result<Outcome> {
    let s = resolve(opts, &args.target)?;
    let config = opts.config();
    config.validate()?;
    let m = s.total().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = match (&args.point, &args.velocity) {
        (None, None) => random_unit_state(&s, &mut rng)?,
        (point, velocity) => {
            let point = match point {
                Some(p) => p.clone(),
                None => s.sample_point(&mut rng).to_vec(),
            };
            let velocity = velocity.clone().ok_or_else(|| anyhow!("--point needs --velocity"))?;
            if point.len() != m || velocity.len() != m {
                bail!("point and velocity need {m} components");
            }
            if velocity.iter().all(|v| *v == 0.0) {
                bail!("initial velocity is zero");
            }
            let p = ChartPoint::new(point)?;
            s.total().validate_at(&p)?;
            GeodesicState::new(0.0, p, velocity)?
        }
    };
    let trace = integrate(s.total(), &initial, config.t_end, config.step)?;
    let invariant = match s.clairaut_f() {
        Some(f) => Some(clairaut_invariant_trace(s.map(), f, &trace)?),
        None => None,
    };
    let omega0 = angle_omega(s.map(), &initial)?;
    let drift = invariant.as_ref().map(|i| i.drift);

    if let Some(out) = &opts.out {
        std::fs::write(out, trace.to_csv()).with_context(|| format!("writing {}", out.display()))?;
        if let Some(inv) = &invariant {
            let path = invariant_path(out);
            std::fs::write(&path, inv.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let summary = match opts.format {
        Format::Csv if opts.out.is_none() => trace.to_csv(),
        Format::Json => to_json(&json!({
            "schema": 1,
            "scenario": s.name(),
            "point": initial.point.to_vec(),
            "velocity": initial.velocity.as_slice(),
            "step": config.step,
            "t_end": config.t_end,
            "states": trace.states().len(),
            "omega0": omega0,
            "speed_drift": trace.speed_drift(),
            "invariant_drift": drift,
        })),
        _ => {
            let mut out = format!("scenario {} (geodesic)\n", s.name());
            let _ = writeln!(out, "  point    {:?}", initial.point.to_vec());
            let _ = writeln!(out, "  velocity {:?}", initial.velocity.as_slice());
            let _ = writeln!(out, "  states {}  omega0 {:.6}", trace.states().len(), omega0);
            let _ = writeln!(out, "  speed drift     {:.3e}", trace.speed_drift());
            match drift {
                Some(d) => {
                    let _ = writeln!(out, "  invariant drift {d:.3e}");
                }
                None => out.push_str("  invariant drift n/a (no f declared)\n"),
            }
            if let Some(path) = &opts.out {
                let _ = writeln!(out, "  wrote {}", path.display());
                if invariant.is_some() {
                    let _ = writeln!(out, "  wrote {}", invariant_path(path).display());
                }
            }
            out
        }
    };
    print!("{summary}");
    Ok(Outcome::Met)
}
