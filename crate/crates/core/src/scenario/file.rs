//! Line-oriented scenario files.
//!
//! ```text
//! name = example2
//! [total]
//! dim = 2
//! g_1_1 = exp(2*x2)
//! g_2_2 = exp(2*x2)
//! [base]
//! dim = 1
//! g_1_1 = 1
//! [map]
//! F1 = (x1 + x2)/sqrt(2)
//! [frames]
//! U1 = exp(-x2), -exp(-x2)
//! X1 = 1/sqrt(2), 1/sqrt(2)
//! [dilation]
//! lambda = exp(-x2)
//! [clairaut]
//! f = x1 + x2
//! [flags]
//! conformal = true
//! clairaut = true
//! umbilical = true
//! harmonic = false
//! einstein_lambda_f = 1
//! [sample_box]
//! x1 = -1, 1
//! x2 = -1, 1
//! ```
//!
//! Base metric entries are expressions in the base coordinates `x1..xn`.
//! Metric entries not listed are 0 off the diagonal; diagonal entries are
//! required. `#` starts a comment.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::Expression;

/// Declared expectations for a scenario.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioFlags {
    pub expected_conformal: bool,
    pub expected_clairaut: bool,
    pub expected_umbilical: bool,
    pub expected_harmonic: bool,
    pub einstein_lambda_f: Option<f64>,
}

/// Metric entries `g_ij` as expressions; `None` marks an omitted entry.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricSpec {
    pub dim: usize,
    pub entries: Vec<Vec<Option<Expression>>>,
}

impl MetricSpec {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![vec![None; dim]; dim],
        }
    }

    /// Diagonal metric from expressions.
    pub fn diagonal(diag: Vec<Expression>) -> Self {
        let mut m = Self::empty(diag.len());
        for (i, e) in diag.into_iter().enumerate() {
            m.entries[i][i] = Some(e);
        }
        m
    }

    /// Flat metric on `R^dim`.
    pub fn flat(dim: usize) -> Self {
        Self::diagonal(vec![Expression::constant(1.0); dim])
    }

    /// The entry for `(i, j)`, falling back to `(j, i)`, then to 0.
    pub fn entry(&self, i: usize, j: usize) -> Expression {
        self.entries[i][j]
            .clone()
            .or_else(|| self.entries[j][i].clone())
            .unwrap_or_else(|| Expression::constant(0.0))
    }
}

/// Declarative content of a scenario, independent of how it is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub total: MetricSpec,
    pub base: MetricSpec,
    pub map: Vec<Expression>,
    pub vertical: Vec<Vec<Expression>>,
    pub horizontal: Vec<Vec<Expression>>,
    pub dilation: Option<Expression>,
    pub clairaut_f: Option<Expression>,
    pub flags: ScenarioFlags,
    pub sample_box: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Total,
    Base,
    Map,
    Frames,
    Dilation,
    Clairaut,
    Flags,
    SampleBox,
}

impl Section {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "total" => Section::Total,
            "base" => Section::Base,
            "map" => Section::Map,
            "frames" => Section::Frames,
            "dilation" => Section::Dilation,
            "clairaut" => Section::Clairaut,
            "flags" => Section::Flags,
            "sample_box" => Section::SampleBox,
            _ => return None,
        })
    }
}

fn file_err(line: usize, message: impl Into<String>) -> Error {
    Error::ScenarioFile {
        line,
        message: message.into(),
    }
}

/// Index from a key such as `F2` or `x3` (prefix already matched), 1-based.
fn key_index(line: usize, key: &str, prefix: &str) -> Result<usize> {
    key.strip_prefix(prefix)
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&k| k >= 1)
        .map(|k| k - 1)
        .ok_or_else(|| file_err(line, format!("malformed key `{key}`")))
}

#[derive(Default)]
struct MetricDraft {
    dim: Option<usize>,
    entries: Vec<(usize, usize, usize, Expression)>,
}

impl MetricDraft {
    fn finish(self, section: &str) -> Result<MetricSpec> {
        let dim = self
            .dim
            .ok_or_else(|| file_err(0, format!("[{section}] is missing `dim`")))?;
        let mut m = MetricSpec::empty(dim);
        for (line, i, j, e) in self.entries {
            if i >= dim || j >= dim {
                return Err(file_err(line, format!("g_{}_{} outside dimension {dim}", i + 1, j + 1)));
            }
            if e.arity() > dim {
                return Err(file_err(line, format!("g_{}_{} uses x{} beyond dimension {dim}", i + 1, j + 1, e.arity())));
            }
            if m.entries[i][j].is_some() {
                return Err(file_err(line, format!("duplicate entry g_{}_{}", i + 1, j + 1)));
            }
            m.entries[i][j] = Some(e);
        }
        for i in 0..dim {
            if m.entries[i][i].is_none() {
                return Err(file_err(0, format!("[{section}] is missing diagonal entry g_{0}_{0}", i + 1)));
            }
        }
        Ok(m)
    }
}

fn parse_expr(line: usize, src: &str) -> Result<Expression> {
    Expression::parse(src).map_err(|e| file_err(line, format!("{e} in `{src}`")))
}

fn parse_list(line: usize, src: &str) -> Result<Vec<Expression>> {
    src.split(',').map(|s| parse_expr(line, s.trim())).collect()
}

fn parse_bool(line: usize, src: &str) -> Result<bool> {
    match src {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(file_err(line, format!("expected true or false, found `{src}`"))),
    }
}

fn parse_real(line: usize, src: &str) -> Result<f64> {
    src.parse::<f64>()
        .map_err(|_| file_err(line, format!("expected a number, found `{src}`")))
}

fn place<T: Clone>(line: usize, slots: &mut Vec<Option<T>>, k: usize, value: T, key: &str) -> Result<()> {
    if slots.len() <= k {
        slots.resize(k + 1, None);
    }
    if slots[k].is_some() {
        return Err(file_err(line, format!("duplicate key `{key}`")));
    }
    slots[k] = Some(value);
    Ok(())
}

fn dense<T>(slots: Vec<Option<T>>, what: &str) -> Result<Vec<T>> {
    slots
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| file_err(0, format!("{what} {} is missing", k + 1))))
        .collect()
}

impl ScenarioSpec {
    /// Parses the text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut section = Section::Header;
        let mut name = None;
        let mut total = MetricDraft::default();
        let mut base = MetricDraft::default();
        let mut map: Vec<Option<Expression>> = Vec::new();
        let mut vertical: Vec<Option<Vec<Expression>>> = Vec::new();
        let mut horizontal: Vec<Option<Vec<Expression>>> = Vec::new();
        let mut dilation = None;
        let mut clairaut_f = None;
        let mut flags = ScenarioFlags::default();
        let mut sample_box: Vec<Option<(f64, f64)>> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(inner) = content.strip_prefix('[') {
                let sec = inner
                    .strip_suffix(']')
                    .ok_or_else(|| file_err(line, "unterminated section header"))?;
                section = Section::from_name(sec.trim()).ok_or_else(|| file_err(line, format!("unknown section `{sec}`")))?;
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| file_err(line, "expected `key = value`"))?;
            if value.is_empty() {
                return Err(file_err(line, format!("empty value for `{key}`")));
            }
            match section {
                Section::Header => match key {
                    "name" => name = Some(value.to_string()),
                    _ => return Err(file_err(line, format!("unknown key `{key}` before the first section"))),
                },
                Section::Total | Section::Base => {
                    let draft = if section == Section::Total { &mut total } else { &mut base };
                    if key == "dim" {
                        let d = value
                            .parse::<usize>()
                            .ok()
                            .filter(|&d| d >= 1)
                            .ok_or_else(|| file_err(line, format!("bad dimension `{value}`")))?;
                        draft.dim = Some(d);
                    } else {
                        let mut parts = key.split('_');
                        let (g, i, j) = (parts.next(), parts.next(), parts.next());
                        let idx = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok()).filter(|&k| k >= 1);
                        match (g, idx(i), idx(j), parts.next()) {
                            (Some("g"), Some(i), Some(j), None) => draft.entries.push((line, i - 1, j - 1, parse_expr(line, value)?)),
                            _ => return Err(file_err(line, format!("malformed metric key `{key}`"))),
                        }
                    }
                }
                Section::Map => {
                    let k = key_index(line, key, "F")?;
                    place(line, &mut map, k, parse_expr(line, value)?, key)?;
                }
                Section::Frames => {
                    if key.starts_with('U') {
                        let k = key_index(line, key, "U")?;
                        place(line, &mut vertical, k, parse_list(line, value)?, key)?;
                    } else {
                        let k = key_index(line, key, "X")?;
                        place(line, &mut horizontal, k, parse_list(line, value)?, key)?;
                    }
                }
                Section::Dilation => match key {
                    "lambda" => dilation = Some(parse_expr(line, value)?),
                    _ => return Err(file_err(line, format!("unknown key `{key}` in [dilation]"))),
                },
                Section::Clairaut => match key {
                    "f" => clairaut_f = Some(parse_expr(line, value)?),
                    _ => return Err(file_err(line, format!("unknown key `{key}` in [clairaut]"))),
                },
                Section::Flags => match key {
                    "conformal" => flags.expected_conformal = parse_bool(line, value)?,
                    "clairaut" => flags.expected_clairaut = parse_bool(line, value)?,
                    "umbilical" => flags.expected_umbilical = parse_bool(line, value)?,
                    "harmonic" => flags.expected_harmonic = parse_bool(line, value)?,
                    "einstein_lambda_f" => flags.einstein_lambda_f = Some(parse_real(line, value)?),
                    _ => return Err(file_err(line, format!("unknown flag `{key}`"))),
                },
                Section::SampleBox => {
                    let k = key_index(line, key, "x")?;
                    let (lo, hi) = value
                        .split_once(',')
                        .ok_or_else(|| file_err(line, "expected `lo, hi`"))?;
                    let (lo, hi) = (parse_real(line, lo.trim())?, parse_real(line, hi.trim())?);
                    if !(lo <= hi) {
                        return Err(file_err(line, format!("empty range [{lo}, {hi}]")));
                    }
                    place(line, &mut sample_box, k, (lo, hi), key)?;
                }
            }
        }

        let spec = ScenarioSpec {
            name: name.ok_or_else(|| file_err(0, "missing `name`"))?,
            total: total.finish("total")?,
            base: base.finish("base")?,
            map: dense(map, "map component F")?,
            vertical: dense(vertical, "vertical frame U")?,
            horizontal: dense(horizontal, "horizontal frame X")?,
            dilation,
            clairaut_f,
            flags,
            sample_box: dense(sample_box, "sample range x")?,
        };
        spec.check_shape()?;
        Ok(spec)
    }

    /// Dimension bookkeeping that needs no evaluation.
    pub fn check_shape(&self) -> Result<()> {
        let (m, n) = (self.total.dim, self.base.dim);
        let shape = |msg: String| file_err(0, msg);
        if n > m {
            return Err(shape(format!("base dimension {n} exceeds total dimension {m}")));
        }
        if self.map.len() != n {
            return Err(shape(format!("{} map components for a {n}-dimensional base", self.map.len())));
        }
        if self.vertical.len() != m - n || self.horizontal.len() != n {
            return Err(shape(format!(
                "frames: {} vertical and {} horizontal fields, expected {} and {n}",
                self.vertical.len(),
                self.horizontal.len(),
                m - n
            )));
        }
        for (kind, frames) in [("U", &self.vertical), ("X", &self.horizontal)] {
            for (k, f) in frames.iter().enumerate() {
                if f.len() != m {
                    return Err(shape(format!("{kind}{} has {} components, expected {m}", k + 1, f.len())));
                }
            }
        }
        if self.sample_box.len() != m {
            return Err(shape(format!("sample box has {} ranges, expected {m}", self.sample_box.len())));
        }
        let total_exprs = self
            .map
            .iter()
            .chain(self.vertical.iter().flatten())
            .chain(self.horizontal.iter().flatten())
            .chain(self.dilation.iter())
            .chain(self.clairaut_f.iter());
        for e in total_exprs {
            if e.arity() > m {
                return Err(shape(format!("`{e}` uses x{} beyond dimension {m}", e.arity())));
            }
        }
        Ok(())
    }

    /// Serializes to the text format; [`ScenarioSpec::parse`] reads it back.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        for (title, metric) in [("total", &self.total), ("base", &self.base)] {
            let _ = writeln!(out, "\n[{title}]\ndim = {}", metric.dim);
            for (i, row) in metric.entries.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if let Some(e) = e {
                        let _ = writeln!(out, "g_{}_{} = {e}", i + 1, j + 1);
                    }
                }
            }
        }
        out.push_str("\n[map]\n");
        for (k, e) in self.map.iter().enumerate() {
            let _ = writeln!(out, "F{} = {e}", k + 1);
        }
        out.push_str("\n[frames]\n");
        let join = |f: &[Expression]| f.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ");
        for (k, f) in self.vertical.iter().enumerate() {
            let _ = writeln!(out, "U{} = {}", k + 1, join(f));
        }
        for (k, f) in self.horizontal.iter().enumerate() {
            let _ = writeln!(out, "X{} = {}", k + 1, join(f));
        }
        if let Some(l) = &self.dilation {
            let _ = writeln!(out, "\n[dilation]\nlambda = {l}");
        }
        if let Some(f) = &self.clairaut_f {
            let _ = writeln!(out, "\n[clairaut]\nf = {f}");
        }
        let fl = &self.flags;
        let _ = writeln!(
            out,
            "\n[flags]\nconformal = {}\nclairaut = {}\numbilical = {}\nharmonic = {}",
            fl.expected_conformal, fl.expected_clairaut, fl.expected_umbilical, fl.expected_harmonic
        );
        if let Some(l) = fl.einstein_lambda_f {
            let _ = writeln!(out, "einstein_lambda_f = {l:?}");
        }
        out.push_str("\n[sample_box]\n");
        for (k, (lo, hi)) in self.sample_box.iter().enumerate() {
            let _ = writeln!(out, "x{} = {lo:?}, {hi:?}", k + 1);
        }
        out
    }
}
