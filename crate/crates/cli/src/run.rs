use std::fmt::Write as _;
use std::path::PathBuf;

use invphase_core::phase::{noncyclic_series, BasisPath, BlockPhase, PhaseDecomposition};
use invphase_core::robustness::{evaluate_point, phase_sweep, RobustnessReport, SweepScenario, Verdict};
use invphase_core::{CMatrix, C64};
use rayon::prelude::*;

use crate::error::CliError;
use crate::scenario::{Quantity, Scenario};

/// One CSV file, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: String,
}

type Outcomes = Vec<Vec<invphase_core::Result<PhaseDecomposition>>>;

/// Runs every requested output. Failed sweep points become NaN rows and a
/// line in `warnings`; without a sweep any failure aborts the run.
pub fn execute(s: &Scenario, hash: &str, warnings: &mut Vec<String>) -> Result<Vec<Artifact>, CliError> {
    let wants = |q: Quantity| s.outputs.iter().any(|(o, _)| *o == q);
    let points = s.points();

    let mut report = None;
    let outcomes: Option<Outcomes> = if wants(Quantity::Verdict) {
        let (_, base) = s.at(None);
        let values = &s.sweep.as_ref().expect("validated").values;
        let r = phase_sweep(&base, values).map_err(CliError::from_core)?;
        let o = r.points.iter().map(|p| p.outcomes.clone()).collect();
        report = Some(r);
        Some(o)
    } else if wants(Quantity::Phase) || wants(Quantity::Dynamical) || wants(Quantity::NonAbelian) {
        Some(
            points
                .par_iter()
                .map(|&p| {
                    let (gamma, sc) = s.at(p);
                    evaluate_point(&sc, gamma)
                })
                .collect(),
        )
    } else {
        None
    };
    if let (None, Some(o)) = (&s.sweep, &outcomes) {
        if let Some(e) = o.iter().flatten().find_map(|r| r.as_ref().err()) {
            return Err(CliError::from_core(e.clone()));
        }
    }

    let series = if wants(Quantity::PhaseSeries) {
        let all: Vec<_> = points
            .par_iter()
            .map(|&p| {
                let (gamma, sc) = s.at(p);
                phase_series(&sc, gamma, s.lambda)
            })
            .collect();
        if s.sweep.is_none() {
            if let Some(Err(e)) = all.first() {
                return Err(CliError::from_core(e.clone()));
            }
        }
        Some(all)
    } else {
        None
    };

    let times = s.at(None).1.times().map_err(CliError::from_core)?;
    let mut out = Vec::new();
    for (q, path) in &s.outputs {
        let mut csv = Csv::new(s, *q, hash);
        match q {
            Quantity::Phase | Quantity::Dynamical => {
                phase_rows(&mut csv, s, *q, outcomes.as_ref().expect("computed"), &times, warnings)
            }
            Quantity::NonAbelian => nonabelian_rows(&mut csv, s, outcomes.as_ref().expect("computed"), &times, warnings),
            Quantity::PhaseSeries => series_rows(&mut csv, s, series.as_ref().expect("computed"), warnings),
            Quantity::Verdict => verdict_rows(&mut csv, report.as_ref().expect("computed"), warnings),
        }
        out.push(Artifact {
            path: path.clone(),
            contents: csv.text,
        });
    }
    Ok(out)
}

type Series = Vec<(usize, C64, Vec<(f64, C64)>)>;

fn phase_series(sc: &SweepScenario, gamma: f64, lambda: Option<C64>) -> invphase_core::Result<Series> {
    let inv = sc.invariant.trajectory(&sc.channel, gamma, sc.grid)?;
    let path = BasisPath::track(&inv)?;
    let blocks: Vec<usize> = match lambda {
        Some(l) => vec![path.block_nearest(l)],
        None => (0..path.block_count()).filter(|&b| path.degeneracy(b) == 1).collect(),
    };
    blocks
        .into_iter()
        .map(|b| {
            let s = noncyclic_series(&path, b)?;
            Ok((b, path.eigenvalue(b), s.iter().map(|a| (a.time, a.total_geometric)).collect()))
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    text: String,
    sweep: Option<String>,
    blocks: bool,
}

impl Csv {
    fn new(s: &Scenario, q: Quantity, hash: &str) -> Self {
        let omega = s.channel.omega;
        let units = if omega == 1.0 {
            "omega = 1, times in units of 1/omega".to_string()
        } else {
            format!("omega = {omega} (overriding the omega = 1 convention), times in the same units")
        };
        let mut text = String::new();
        writeln!(text, "# quantity: {}; units: {units}; scenario sha256: {hash}", q.description(s.mode)).unwrap();
        let sweep = if q == Quantity::Verdict { None } else { s.sweep_column() };
        let blocks = s.lambda.is_none() || q == Quantity::NonAbelian;
        let mut cols: Vec<&str> = Vec::new();
        if let Some(c) = &sweep {
            cols.push(c);
        }
        match q {
            Quantity::Verdict => cols.extend([
                "block",
                "lambda_re",
                "lambda_im",
                "phase_spread",
                "dynamical_spread",
                "phase_verdict",
                "dynamical_verdict",
                "commutator_independent",
                "commutator_spread",
                "failed_points",
            ]),
            _ => {
                cols.push("t");
                if blocks {
                    cols.extend(["block", "lambda_re", "lambda_im"]);
                }
                match q {
                    Quantity::Dynamical => cols.extend(["re_dyn", "im_dyn"]),
                    Quantity::NonAbelian => cols.extend(["row", "col", "re_exp_phi", "im_exp_phi"]),
                    _ => cols.extend(["re_phi", "im_phi"]),
                }
            }
        }
        text.push_str(&cols.join(","));
        text.push('\n');
        Self { text, sweep, blocks }
    }

    /// Writes `[sweep,] t, [block, lambda,] rest...`.
    fn row(&mut self, point: Option<f64>, t: f64, block: Option<(usize, C64)>, rest: &[String]) {
        let mut cells = Vec::new();
        if self.sweep.is_some() {
            cells.push(num(point.unwrap_or(f64::NAN)));
        }
        cells.push(num(t));
        if self.blocks {
            match block {
                Some((b, l)) => cells.extend([b.to_string(), num(l.re), num(l.im)]),
                None => cells.extend(["NaN".to_string(), num(f64::NAN), num(f64::NAN)]),
            }
        }
        cells.extend_from_slice(rest);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn selected(d: &PhaseDecomposition, lambda: Option<C64>) -> Vec<(usize, &BlockPhase)> {
    match lambda {
        Some(l) => d
            .blocks
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.lambda - l).norm().total_cmp(&(b.1.lambda - l).norm()))
            .into_iter()
            .collect(),
        None => d.blocks.iter().enumerate().collect(),
    }
}

fn warn(warnings: &mut Vec<String>, s: &Scenario, point: Option<f64>, t: f64, e: &invphase_core::Error) {
    let at = match (point, s.sweep_column()) {
        (Some(v), Some(col)) => format!("{col} = {v}, "),
        _ => String::new(),
    };
    warnings.push(format!("warning: {at}t = {t}: {e}; row written as NaN"));
}

fn nan_pair() -> [String; 2] {
    [num(f64::NAN), num(f64::NAN)]
}

fn phase_rows(csv: &mut Csv, s: &Scenario, q: Quantity, o: &Outcomes, times: &[f64], w: &mut Vec<String>) {
    for (point, per_time) in s.points().into_iter().zip(o) {
        for (&t, r) in times.iter().zip(per_time) {
            match r {
                Ok(d) => {
                    for (b, bp) in selected(d, s.lambda) {
                        let v = if q == Quantity::Dynamical { bp.dynamical } else { bp.total_geometric };
                        csv.row(point, d.time, Some((b, bp.lambda)), &[num(v.re), num(v.im)]);
                    }
                }
                Err(e) => {
                    warn(w, s, point, t, e);
                    csv.row(point, t, None, &nan_pair());
                }
            }
        }
    }
}

fn nonabelian_rows(csv: &mut Csv, s: &Scenario, o: &Outcomes, times: &[f64], w: &mut Vec<String>) {
    for (point, per_time) in s.points().into_iter().zip(o) {
        for (&t, r) in times.iter().zip(per_time) {
            match r {
                Ok(d) => {
                    for (b, bp) in selected(d, s.lambda) {
                        let m = match &bp.non_abelian {
                            Some(n) => n.exp_phi.clone(),
                            None => CMatrix::from_fn(1, |_, _| bp.total_geometric.exp()),
                        };
                        for i in 0..m.dim() {
                            for j in 0..m.dim() {
                                let z = m[(i, j)];
                                let rest = [i.to_string(), j.to_string(), num(z.re), num(z.im)];
                                csv.row(point, d.time, Some((b, bp.lambda)), &rest);
                            }
                        }
                    }
                }
                Err(e) => {
                    warn(w, s, point, t, e);
                    let [a, b] = nan_pair();
                    csv.row(point, t, None, &["NaN".into(), "NaN".into(), a, b]);
                }
            }
        }
    }
}

fn series_rows(csv: &mut Csv, s: &Scenario, all: &[invphase_core::Result<Series>], w: &mut Vec<String>) {
    for (point, r) in s.points().into_iter().zip(all) {
        match r {
            Ok(blocks) => {
                for (b, lambda, values) in blocks {
                    for &(t, v) in values {
                        csv.row(point, t, Some((*b, *lambda)), &[num(v.re), num(v.im)]);
                    }
                }
            }
            Err(e) => {
                warn(w, s, point, f64::NAN, e);
                csv.row(point, f64::NAN, None, &nan_pair());
            }
        }
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Robust => "robust",
        Verdict::NonRobust => "non_robust",
        Verdict::Undetermined => "undetermined",
    }
}

fn verdict_rows(csv: &mut Csv, r: &RobustnessReport, w: &mut Vec<String>) {
    let failed = r
        .points
        .iter()
        .filter(|p| p.outcomes.iter().any(|o| o.is_err()))
        .count();
    if failed > 0 {
        w.push(format!(
            "warning: {failed} of {} sweep points failed and are left out of the spreads",
            r.points.len()
        ));
    }
    for b in 0..r.phase_spread.len() {
        let lambda = r
            .points
            .iter()
            .flat_map(|p| p.outcomes.iter().filter_map(|o| o.as_ref().ok()))
            .find_map(|d| d.blocks.get(b))
            .map_or(C64::new(f64::NAN, f64::NAN), |bp| bp.lambda);
        let cells = [
            b.to_string(),
            num(lambda.re),
            num(lambda.im),
            num(r.phase_spread[b]),
            num(r.dynamical_spread[b]),
            verdict_name(r.phase_verdict[b]).to_string(),
            verdict_name(r.dynamical_verdict[b]).to_string(),
            u8::from(r.commutator_independence).to_string(),
            num(r.commutator_spread),
            failed.to_string(),
        ];
        csv.text.push_str(&cells.join(","));
        csv.text.push('\n');
    }
}
