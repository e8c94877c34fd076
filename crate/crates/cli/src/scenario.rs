//! Scenario files: flat `section.key = value` lines, `#` comments.
//!
//! Numeric values accept products and quotients of numbers, `pi` and
//! `period` (= 2 pi / omega), e.g. `3*period` or `period/1500`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use invphase_core::invariant::DephasingParams;
use invphase_core::robustness::{ChannelSpec, InvariantSpec, PhaseKind, SweepScenario};
use invphase_core::superop::{ChannelKind, SuperOperator};
use invphase_core::{CMatrix, TimeGrid, C64};

use crate::error::CliError;

const KEYS: &[&str] = &[
    "channel.kind",
    "channel.omega",
    "channel.gamma",
    "channel.alpha1",
    "channel.alpha2",
    "channel.alpha3",
    "invariant.family",
    "invariant.alpha1",
    "invariant.alpha2",
    "invariant.c1",
    "invariant.c2",
    "invariant.q",
    "invariant.x",
    "invariant.eps1",
    "invariant.eps2",
    "invariant.matrix",
    "time.start",
    "time.end",
    "time.step",
    "time.report",
    "phase.kind",
    "phase.lambda",
    "sweep.parameter",
    "sweep.start",
    "sweep.stop",
    "sweep.step",
    "sweep.values",
    "output.phase",
    "output.phase_series",
    "output.dynamical",
    "output.nonabelian",
    "output.verdict",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    Cyclic,
    NonCyclic,
    NonAbelian,
}

impl PhaseMode {
    pub fn kind(self) -> PhaseKind {
        match self {
            PhaseMode::Cyclic => PhaseKind::Cyclic,
            _ => PhaseKind::NonCyclic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    /// Geometric phase at the report times.
    Phase,
    /// Open-path geometric phase at every grid node.
    PhaseSeries,
    Dynamical,
    /// Entries of `exp Phi` per block.
    NonAbelian,
    /// Robustness spreads and verdicts over the rate sweep.
    Verdict,
}

impl Quantity {
    fn from_key(key: &str) -> Option<Self> {
        Some(match key {
            "output.phase" => Quantity::Phase,
            "output.phase_series" => Quantity::PhaseSeries,
            "output.dynamical" => Quantity::Dynamical,
            "output.nonabelian" => Quantity::NonAbelian,
            "output.verdict" => Quantity::Verdict,
            _ => return None,
        })
    }

    pub fn description(self, mode: PhaseMode) -> &'static str {
        match (self, mode) {
            (Quantity::Phase, PhaseMode::Cyclic) => "cyclic geometric phase",
            (Quantity::Phase, _) => "non-cyclic geometric phase",
            (Quantity::PhaseSeries, _) => "non-cyclic geometric phase along the path",
            (Quantity::Dynamical, _) => "dynamical phase",
            (Quantity::NonAbelian, _) => "non-abelian phase factor exp(Phi)",
            (Quantity::Verdict, _) => "robustness of the phases over the rate sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Dephasing,
    SpontaneousEmission,
    BitFlip,
    Numeric,
}

impl Family {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dephasing" | "dephasing_family" => Family::Dephasing,
            "spontaneous_emission" | "se_family" => Family::SpontaneousEmission,
            "bit_flip" | "bitflip_family" => Family::BitFlip,
            "numeric" => Family::Numeric,
            _ => return None,
        })
    }

    fn scalar_keys(self) -> &'static [&'static str] {
        match self {
            Family::Dephasing => &["alpha1", "alpha2", "c1", "c2"],
            Family::SpontaneousEmission => &["alpha1", "alpha2", "c1", "c2", "q", "x"],
            Family::BitFlip => &["alpha1", "eps1", "eps2"],
            Family::Numeric => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantDesc {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub matrix: Option<SuperOperator>,
}

impl InvariantDesc {
    /// The invariant with `over` replacing one scalar parameter.
    pub fn build(&self, over: Option<(&str, f64)>) -> InvariantSpec {
        let get = |k: &str| match over {
            Some((name, v)) if name == k => v,
            _ => self.params.get(k).copied().unwrap_or(f64::NAN),
        };
        let inner = || DephasingParams::new(get("alpha1"), get("alpha2"), get("c1"), get("c2"));
        match self.family {
            Family::Dephasing => InvariantSpec::Dephasing(inner()),
            Family::SpontaneousEmission => InvariantSpec::SpontaneousEmission {
                inner: inner(),
                q: get("q"),
                x: get("x"),
            },
            Family::BitFlip => InvariantSpec::BitFlip {
                alpha1: get("alpha1"),
                eps1: get("eps1"),
                eps2: get("eps2"),
            },
            Family::Numeric => InvariantSpec::Numeric(self.matrix.clone().expect("validated")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepTarget {
    Rate,
    /// Scalar invariant parameter, without the section prefix.
    Invariant(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub target: SweepTarget,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub channel: ChannelSpec,
    pub gamma: f64,
    pub invariant: InvariantDesc,
    pub grid: TimeGrid,
    pub report_times: Vec<f64>,
    pub mode: PhaseMode,
    pub lambda: Option<C64>,
    pub sweep: Option<Sweep>,
    pub outputs: Vec<(Quantity, PathBuf)>,
}

impl Scenario {
    /// Sweep values in grid order, or a single unswept point.
    pub fn points(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Rate and pipeline scenario at one point.
    pub fn at(&self, point: Option<f64>) -> (f64, SweepScenario) {
        let (gamma, over) = match (&self.sweep, point) {
            (Some(Sweep { target: SweepTarget::Rate, .. }), Some(v)) => (v, None),
            (Some(Sweep { target: SweepTarget::Invariant(k), .. }), Some(v)) => (self.gamma, Some((k.as_str(), v))),
            _ => (self.gamma, None),
        };
        let scenario = SweepScenario {
            channel: self.channel,
            invariant: self.invariant.build(over),
            grid: self.grid,
            kind: self.mode.kind(),
            report_times: self.report_times.clone(),
        };
        (gamma, scenario)
    }

    /// Column name of the swept parameter.
    pub fn sweep_column(&self) -> Option<String> {
        Some(match &self.sweep.as_ref()?.target {
            SweepTarget::Rate => match self.channel.kind {
                ChannelKind::Dephasing => "gamma_d".into(),
                ChannelKind::SpontaneousEmission => "gamma_se".into(),
                ChannelKind::BitFlip => "gamma_b".into(),
                ChannelKind::Custom => "gamma".into(),
            },
            SweepTarget::Invariant(k) => k.clone(),
        })
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: BTreeMap<&'static str, Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let Some((k, v)) = s.split_once('=') else {
                return Err(CliError::parse(line, s, "expected `key = value`"));
            };
            let (k, v) = (k.trim(), v.trim());
            let Some(&key) = KEYS.iter().find(|&&known| known == k) else {
                return Err(CliError::parse(line, k, "unknown key"));
            };
            if v.is_empty() {
                return Err(CliError::parse(line, k, "empty value"));
            }
            if entries.contains_key(key) {
                return Err(CliError::parse(line, k, "duplicate key"));
            }
            entries.insert(key, Entry { line, value: v.to_string() });
        }
        Ok(Self { entries })
    }

    fn has(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn require(&self, key: &str) -> Result<&str, CliError> {
        self.str(key)
            .ok_or_else(|| CliError::Validation(format!("missing required key `{key}`")))
    }

    fn number(&self, key: &str, omega: f64) -> Result<Option<f64>, CliError> {
        self.str(key)
            .map(|v| {
                eval(v, omega).ok_or_else(|| CliError::parse(self.line(key), key, format!("not a number: `{v}`")))
            })
            .transpose()
    }

    fn list(&self, key: &str, omega: f64) -> Result<Vec<f64>, CliError> {
        let Some(v) = self.str(key) else {
            return Ok(Vec::new());
        };
        v.split(',')
            .map(|item| {
                eval(item.trim(), omega)
                    .ok_or_else(|| CliError::parse(self.line(key), key, format!("not a number: `{}`", item.trim())))
            })
            .collect()
    }

    fn complex(&self, key: &str) -> Result<Option<C64>, CliError> {
        self.str(key)
            .map(|v| {
                parse_complex(v)
                    .ok_or_else(|| CliError::parse(self.line(key), key, format!("not a complex number: `{v}`")))
            })
            .transpose()
    }
}

/// Product or quotient of numbers, `pi` and `period`.
fn eval(s: &str, omega: f64) -> Option<f64> {
    let mut acc = 1.0;
    let mut op = '*';
    let mut rest = s.trim();
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let (atom, tail) = rest.split_at(end);
        let atom = atom.trim();
        let (sign, body) = match atom.strip_prefix('-') {
            Some(b) => (-1.0, b),
            None => (1.0, atom),
        };
        let x = sign
            * match body {
                "pi" => PI,
                "period" => 2.0 * PI / omega,
                _ => body.parse::<f64>().ok()?,
            };
        acc = if op == '*' { acc * x } else { acc / x };
        if tail.is_empty() {
            break;
        }
        op = tail.chars().next()?;
        rest = &tail[1..];
    }
    acc.is_finite().then_some(acc)
}

/// `a`, `bi`, `a+bi` or `a-bi`.
fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i') else {
        return Some(C64::new(s.parse().ok()?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        v => v.parse().ok()?,
    };
    Some(C64::new(re.parse().ok()?, im))
}

/// Rows separated by `;`, entries by whitespace.
fn parse_matrix(s: &str) -> Option<CMatrix> {
    let rows: Vec<Vec<C64>> = s
        .split(';')
        .map(|r| r.split_whitespace().map(parse_complex).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    let n = rows.len();
    if !(n == 2 || n == 4) || rows.iter().any(|r| r.len() != n) {
        return None;
    }
    Some(CMatrix::from_fn(n, |i, j| rows[i][j]))
}

fn channel_kind(s: &str) -> Option<ChannelKind> {
    Some(match s {
        "dephasing" => ChannelKind::Dephasing,
        "spontaneous_emission" => ChannelKind::SpontaneousEmission,
        "bit_flip" => ChannelKind::BitFlip,
        "custom" => ChannelKind::Custom,
        _ => return None,
    })
}

/// Parses and validates a scenario; relative output paths are resolved
/// against `base`.
pub fn parse_scenario(text: &str, base: &Path) -> Result<Scenario, CliError> {
    let doc = Document::parse(text)?;
    let invalid = |m: String| CliError::Validation(m);

    let kind_s = doc.require("channel.kind")?;
    let kind = channel_kind(kind_s)
        .ok_or_else(|| CliError::parse(doc.line("channel.kind"), "channel.kind", format!("unknown channel `{kind_s}`")))?;
    let omega = match doc.str("channel.omega") {
        Some(v) => eval(v, f64::NAN)
            .ok_or_else(|| CliError::parse(doc.line("channel.omega"), "channel.omega", format!("not a number: `{v}`")))?,
        None => 1.0,
    };
    if !(omega > 0.0) {
        return Err(invalid("channel.omega must be positive".into()));
    }
    let mut channel = ChannelSpec::preset(kind, omega);
    let alpha_keys = ["channel.alpha1", "channel.alpha2", "channel.alpha3"];
    if kind == ChannelKind::Custom {
        for (i, k) in alpha_keys.iter().enumerate() {
            channel.alpha[i] = doc
                .complex(k)?
                .ok_or_else(|| invalid(format!("custom channel needs `{k}`")))?;
        }
    } else if let Some(k) = alpha_keys.iter().find(|k| doc.has(k)) {
        return Err(invalid(format!("`{k}` only applies to channel.kind = custom")));
    }
    let gamma = doc.number("channel.gamma", omega)?;

    let fam_s = doc.require("invariant.family")?;
    let family = Family::parse(fam_s).ok_or_else(|| {
        CliError::parse(doc.line("invariant.family"), "invariant.family", format!("unknown family `{fam_s}`"))
    })?;

    let sweep_key = doc.str("sweep.parameter");
    let target = match sweep_key {
        None => None,
        Some("channel.gamma") => Some(SweepTarget::Rate),
        Some(k) => match k.strip_prefix("invariant.") {
            Some(p) if family.scalar_keys().contains(&p) => Some(SweepTarget::Invariant(p.to_string())),
            _ => return Err(invalid(format!("cannot sweep `{k}`: use channel.gamma or a scalar invariant parameter"))),
        },
    };

    let mut params = BTreeMap::new();
    for p in ["alpha1", "alpha2", "c1", "c2", "q", "x", "eps1", "eps2"] {
        let key = format!("invariant.{p}");
        let swept = target == Some(SweepTarget::Invariant(p.to_string()));
        let used = family.scalar_keys().contains(&p);
        match doc.number(&key, omega)? {
            Some(_) if !used => return Err(invalid(format!("`{key}` is not a parameter of the {fam_s} family"))),
            Some(_) if swept => return Err(invalid(format!("`{key}` is swept and must not also be set"))),
            Some(v) => {
                params.insert(p.to_string(), v);
            }
            None if used && !swept => return Err(invalid(format!("missing required key `{key}`"))),
            None => {}
        }
    }
    let matrix = match (family, doc.str("invariant.matrix")) {
        (Family::Numeric, Some(v)) => {
            let m = parse_matrix(v).ok_or_else(|| {
                CliError::parse(
                    doc.line("invariant.matrix"),
                    "invariant.matrix",
                    "expected a 2x2 or 4x4 matrix, rows separated by `;`",
                )
            })?;
            Some(SuperOperator::new(m).map_err(|e| invalid(e.to_string()))?)
        }
        (Family::Numeric, None) => return Err(invalid("missing required key `invariant.matrix`".into())),
        (_, Some(_)) => return Err(invalid("`invariant.matrix` only applies to the numeric family".into())),
        (_, None) => None,
    };
    let invariant = InvariantDesc { family, params, matrix };

    let start = doc.number("time.start", omega)?.unwrap_or(0.0);
    let end = doc
        .number("time.end", omega)?
        .ok_or_else(|| invalid("missing required key `time.end`".into()))?;
    let step = doc
        .number("time.step", omega)?
        .ok_or_else(|| invalid("missing required key `time.step`".into()))?;
    if !(end > start) {
        return Err(invalid("time.end must exceed time.start".into()));
    }
    if !(step > 0.0) || step > end - start {
        return Err(invalid("time.step must be positive and no longer than the time span".into()));
    }
    let grid = TimeGrid::with_max_step(start, end, step).map_err(|e| invalid(e.to_string()))?;

    let mode = match doc.require("phase.kind")? {
        "cyclic" => PhaseMode::Cyclic,
        "noncyclic" => PhaseMode::NonCyclic,
        "nonabelian" => PhaseMode::NonAbelian,
        other => {
            return Err(CliError::parse(doc.line("phase.kind"), "phase.kind", format!("unknown phase kind `{other}`")))
        }
    };
    let report_times = doc.list("time.report", omega)?;
    if mode == PhaseMode::Cyclic && !report_times.is_empty() {
        return Err(invalid("time.report applies to open paths; cyclic phases close at time.end".into()));
    }
    let lambda = doc.complex("phase.lambda")?;

    let sweep = match target {
        Some(target) => {
            let values = if doc.has("sweep.values") {
                if ["sweep.start", "sweep.stop", "sweep.step"].iter().any(|k| doc.has(k)) {
                    return Err(invalid("give either sweep.values or sweep.start/stop/step".into()));
                }
                doc.list("sweep.values", omega)?
            } else {
                let need = |k: &str| {
                    doc.number(k, omega)?
                        .ok_or_else(|| invalid(format!("missing required key `{k}`")))
                };
                let (a, b, h) = (need("sweep.start")?, need("sweep.stop")?, need("sweep.step")?);
                if !(h > 0.0) || b < a {
                    return Err(invalid("sweep needs step > 0 and stop >= start".into()));
                }
                let n = ((b - a) / h + 1e-9).floor() as usize;
                (0..=n).map(|k| a + k as f64 * h).collect()
            };
            if values.is_empty() {
                return Err(invalid("sweep grid is empty".into()));
            }
            if target == SweepTarget::Rate && gamma.is_some() {
                return Err(invalid("channel.gamma is swept and must not also be set".into()));
            }
            Some(Sweep { target, values })
        }
        None => {
            if let Some(k) = ["sweep.start", "sweep.stop", "sweep.step", "sweep.values"]
                .iter()
                .find(|k| doc.has(k))
            {
                return Err(invalid(format!("`{k}` given without sweep.parameter")));
            }
            None
        }
    };

    let mut outputs = Vec::new();
    for (&key, entry) in &doc.entries {
        if let Some(q) = Quantity::from_key(key) {
            outputs.push((q, base.join(&entry.value)));
        }
    }
    if outputs.is_empty() {
        return Err(invalid("no output.* entries: nothing to compute".into()));
    }
    let wants = |q: Quantity| outputs.iter().any(|(o, _)| *o == q);
    if wants(Quantity::NonAbelian) && mode != PhaseMode::NonAbelian {
        return Err(invalid("output.nonabelian needs phase.kind = nonabelian".into()));
    }
    if wants(Quantity::Verdict) {
        match &sweep {
            None => return Err(invalid("output.verdict needs a sweep over channel.gamma".into())),
            Some(Sweep { target: SweepTarget::Invariant(p), .. }) => {
                return Err(invalid(format!(
                    "sweep parameter invariant.{p} appears in the invariant spec; a robustness verdict needs the swept rate to stay out of it"
                )))
            }
            Some(_) if family == Family::BitFlip => {
                return Err(invalid(
                    "the bit_flip invariant family contains the swept rate gamma_b; a robustness verdict needs the swept rate to stay out of the invariant spec".into(),
                ))
            }
            Some(_) => {}
        }
    }

    let scenario = Scenario {
        channel,
        gamma: gamma.unwrap_or(0.0),
        invariant,
        grid,
        report_times,
        mode,
        lambda,
        sweep,
        outputs,
    };
    check_preconditions(&scenario)?;
    Ok(scenario)
}

/// Builds channel and invariant at every point on a one-step grid. Without a
/// sweep every failure is a broken precondition; inside a sweep numerical
/// failures are left to the run, which reports them per point.
fn check_preconditions(s: &Scenario) -> Result<(), CliError> {
    let (_, base) = s.at(None);
    base.times().map_err(|e| CliError::Validation(e.to_string()))?;
    let probe = TimeGrid::new(s.grid.start(), s.grid.start() + s.grid.dt(), 1).expect("valid grid");
    for point in s.points() {
        let (gamma, sc) = s.at(point);
        let check = sc
            .channel
            .generator(gamma, sc.invariant.dim())
            .and_then(|_| sc.invariant.trajectory(&sc.channel, gamma, probe));
        if let Err(e) = check {
            if point.is_none() || !e.is_numerical() {
                let at = match (point, s.sweep_column()) {
                    (Some(v), Some(col)) => format!(" at {col} = {v}"),
                    _ => String::new(),
                };
                return Err(CliError::Validation(format!("{e}{at}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
channel.kind = dephasing
channel.gamma = 0.5
channel.omega = 1
invariant.family = dephasing_family
invariant.alpha1 = 1
invariant.alpha2 = 0.5
invariant.c1 = 0
invariant.c2 = 0
time.end = period
time.step = period/1000
phase.kind = cyclic
output.phase = out.csv
";

    fn parse(text: &str) -> Result<Scenario, CliError> {
        parse_scenario(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_dephasing_scenario() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.mode, PhaseMode::Cyclic);
        assert_eq!(s.gamma, 0.5);
        assert_eq!(s.grid.steps(), 1000);
        assert!((s.grid.end() - 2.0 * PI).abs() < 1e-15);
        assert_eq!(s.outputs, vec![(Quantity::Phase, PathBuf::from("/tmp/out.csv"))]);
    }

    #[test]
    fn expressions() {
        assert_eq!(eval("3*period", 1.0), Some(6.0 * PI));
        assert_eq!(eval("period/4", 2.0), Some(PI / 4.0));
        assert_eq!(eval("-pi", 1.0), Some(-PI));
        assert_eq!(eval("1e-3", 1.0), Some(1e-3));
        assert_eq!(eval("two", 1.0), None);
        assert_eq!(eval("1/0", 1.0), None);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1-0.5i"), Some(C64::new(1.0, -0.5)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("2.5"), Some(C64::new(2.5, 0.0)));
        assert_eq!(parse_complex("1e-3+2e+1i"), Some(C64::new(1e-3, 20.0)));
        assert_eq!(parse_complex("1+"), None);
    }

    #[test]
    fn unknown_key_is_rejected_with_its_line() {
        let text = format!("{MINIMAL}channel.colour = blue\n");
        match parse(&text) {
            Err(CliError::Parse { line, key, .. }) => {
                assert_eq!(line, 13);
                assert_eq!(key, "channel.colour");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_family_names_the_eigenbasis_condition() {
        let text = MINIMAL.replace("invariant.c2 = 0", "invariant.c2 = 2.23606797749979");
        match parse(&text) {
            Err(CliError::Validation(m)) => assert!(m.contains("4(alpha1^2 + alpha2^2)"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verdict_needs_a_rate_free_invariant() {
        let text = MINIMAL
            .replace("invariant.c2 = 0\n", "")
            .replace("channel.gamma = 0.5\n", "")
            + "sweep.parameter = invariant.c2\nsweep.values = 0, 0.1\noutput.verdict = v.csv\n";
        match parse(&text) {
            Err(CliError::Validation(m)) => assert!(m.contains("appears in the invariant spec"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_grid_includes_both_ends() {
        let text = MINIMAL.replace("channel.gamma = 0.5\n", "")
            + "sweep.parameter = channel.gamma\nsweep.start = 0\nsweep.stop = 1.5\nsweep.step = 0.05\n";
        let s = parse(&text).unwrap();
        let v = &s.sweep.unwrap().values;
        assert_eq!(v.len(), 31);
        assert!((v[30] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn family_keys_must_match_the_family() {
        let text = format!("{MINIMAL}invariant.q = 1\n");
        assert!(matches!(parse(&text), Err(CliError::Validation(_))));
        let text = MINIMAL.replace("invariant.c1 = 0\n", "");
        assert!(matches!(parse(&text), Err(CliError::Validation(_))));
    }
}
