//! Decoherence robustness: the commutator independence test and parameter
//! sweeps of geometric and dynamical phases.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::invariant::{
    bitflip_family, dephasing_family, se_family, solve_invariant, DephasingParams, InvariantTrajectory,
};
use crate::matrix::C64;
use crate::phase::{
    abelian_cyclic_gp, phase_decomposition, phase_distance, BasisPath, PhaseDecomposition, QUAD_TOL,
};
use crate::superop::{build_lindblad, extract_internal_block, ChannelKind, DecoherenceChannel, Generator, SuperOperator};

/// Entrywise spread of `[L(gamma), I(t)]` below which it counts as independent.
pub const INDEPENDENCE_TOL: f64 = 1e-12;

/// Spreads below this are reported as robust.
pub const ROBUST_TOL: f64 = 10.0 * QUAD_TOL;

/// Entries of `[L(gamma), I]` are at most quadratic in gamma, so four
/// distinct points are enough.
pub const DEFAULT_PROBE: [f64; 4] = [0.0, 0.1, 0.5, 1.0];

/// True iff `[L(gamma), I(t)]` is the same for every `gamma` of the grid at
/// every node of `time_grid`, together with the largest entrywise spread.
pub fn commutator_independence<F, G>(
    l_family: F,
    inv: &InvariantTrajectory,
    gamma_grid: &[f64],
    time_grid: &TimeGrid,
) -> (bool, f64)
where
    F: Fn(f64) -> G,
    G: Generator,
{
    let family: Vec<G> = gamma_grid.iter().map(|&g| l_family(g)).collect();
    let mut spread = 0.0_f64;
    for t in time_grid.times() {
        let i = inv.matrix(t);
        let mut first = None;
        for l in &family {
            let lt = l.at(t);
            if lt.dim() != i.dim() {
                return (false, f64::INFINITY);
            }
            let c = lt.matrix().commutator(&i);
            match &first {
                None => first = Some(c),
                Some(c0) => spread = spread.max((&c - c0).max_abs()),
            }
        }
    }
    let spread = if spread.is_nan() { f64::INFINITY } else { spread };
    (spread < INDEPENDENCE_TOL, spread)
}

/// Decoherence channel with its rate left open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub omega: f64,
    /// Operator coefficients for `ChannelKind::Custom`, scaled by the rate.
    pub alpha: [C64; 3],
}

impl ChannelSpec {
    pub fn preset(kind: ChannelKind, omega: f64) -> Self {
        Self {
            kind,
            omega,
            alpha: [C64::new(0.0, 0.0); 3],
        }
    }

    pub fn channel(&self, gamma: f64) -> Result<DecoherenceChannel> {
        match self.kind {
            ChannelKind::Dephasing => DecoherenceChannel::dephasing(self.omega, gamma),
            ChannelKind::SpontaneousEmission => DecoherenceChannel::spontaneous_emission(self.omega, gamma),
            ChannelKind::BitFlip => DecoherenceChannel::bit_flip(self.omega, gamma),
            ChannelKind::Custom => {
                if !(gamma >= 0.0) {
                    return Err(Error::InvalidParameter("decoherence rate must be non-negative"));
                }
                let a = self.alpha.map(|z| z * gamma);
                let c = DecoherenceChannel::custom(self.omega, a);
                if !c.is_finite() {
                    return Err(Error::InvalidParameter("channel coefficients must be finite"));
                }
                Ok(c)
            }
        }
    }

    /// Generator acting on the space of the invariant: the internal block for
    /// `dim == 2`, the full matrix otherwise.
    pub fn generator(&self, gamma: f64, dim: usize) -> Result<SuperOperator> {
        let l = build_lindblad(&self.channel(gamma)?);
        if dim == 2 {
            extract_internal_block(&l)
        } else {
            Ok(l)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InvariantSpec {
    /// Internal-block family; needs a channel that decouples the identity.
    Dephasing(DephasingParams),
    SpontaneousEmission { inner: DephasingParams, q: f64, x: f64 },
    /// Depends on the bit-flip rate through `xi`.
    BitFlip { alpha1: f64, eps1: f64, eps2: f64 },
    /// Integrated from `I(0)` under the generator at each rate.
    Numeric(SuperOperator),
}

impl InvariantSpec {
    pub fn dim(&self) -> usize {
        match self {
            InvariantSpec::Dephasing(_) => 2,
            InvariantSpec::Numeric(i) => i.dim(),
            _ => 4,
        }
    }

    pub fn depends_on_rate(&self) -> bool {
        matches!(self, InvariantSpec::BitFlip { .. } | InvariantSpec::Numeric(_))
    }

    pub fn trajectory(&self, channel: &ChannelSpec, gamma: f64, grid: TimeGrid) -> Result<InvariantTrajectory> {
        let omega = channel.omega;
        match self {
            InvariantSpec::Dephasing(p) => dephasing_family(*p, omega, grid),
            InvariantSpec::SpontaneousEmission { inner, q, x } => se_family(*inner, *q, *x, omega, grid),
            InvariantSpec::BitFlip { alpha1, eps1, eps2 } => bitflip_family(*alpha1, *eps1, *eps2, omega, gamma, grid),
            InvariantSpec::Numeric(i0) => solve_invariant(&channel.generator(gamma, i0.dim())?, i0, grid),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Cyclic,
    NonCyclic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepScenario {
    pub channel: ChannelSpec,
    pub invariant: InvariantSpec,
    pub grid: TimeGrid,
    pub kind: PhaseKind,
    /// Times at which open-path phases are reported; the grid end if empty.
    /// Ignored for cyclic phases.
    pub report_times: Vec<f64>,
}

impl SweepScenario {
    pub fn times(&self) -> Result<Vec<f64>> {
        if self.kind == PhaseKind::Cyclic || self.report_times.is_empty() {
            return Ok(alloc::vec![self.grid.end()]);
        }
        self.report_times
            .iter()
            .map(|&t| match self.grid.node_of(t) {
                Some(k) if k >= 4 => Ok(self.grid.time(k)),
                _ => Err(Error::InvalidParameter("report time outside the time grid")),
            })
            .collect()
    }
}

/// Full pipeline at one rate, one decomposition per report time. Each
/// report time gets its own path from the start of the grid, so a failure
/// late in the run does not hide the earlier results.
pub fn evaluate_point(scenario: &SweepScenario, gamma: f64) -> Vec<Result<PhaseDecomposition>> {
    let times = match scenario.times() {
        Ok(t) => t,
        Err(e) => return alloc::vec![Err(e)],
    };
    let l = match scenario.channel.generator(gamma, scenario.invariant.dim()) {
        Ok(l) => l,
        Err(e) => return alloc::vec![Err(e); times.len()],
    };
    times
        .iter()
        .map(|&t| {
            let k = scenario.grid.node_of(t).ok_or(Error::InvalidGrid)?;
            let grid = if k == scenario.grid.steps() { scenario.grid } else { scenario.grid.truncated(k)? };
            let inv = scenario.invariant.trajectory(&scenario.channel, gamma, grid)?;
            let path = BasisPath::track(&inv)?;
            if scenario.kind == PhaseKind::Cyclic {
                for b in 0..path.block_count() {
                    if path.degeneracy(b) == 1 {
                        abelian_cyclic_gp(&path, b)?;
                    }
                }
            }
            phase_decomposition(&path, &l)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Robust,
    NonRobust,
    /// No sweep point succeeded.
    Undetermined,
}

impl Verdict {
    fn of(spread: f64) -> Self {
        if spread.is_nan() {
            Verdict::Undetermined
        } else if spread < ROBUST_TOL {
            Verdict::Robust
        } else {
            Verdict::NonRobust
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub gamma: f64,
    /// One entry per report time.
    pub outcomes: Vec<Result<PhaseDecomposition>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    pub label: String,
    pub gammas: Vec<f64>,
    pub times: Vec<f64>,
    pub commutator_independence: bool,
    pub commutator_spread: f64,
    pub points: Vec<SweepPoint>,
    /// Per block, maximum over report times; NaN when nothing succeeded.
    pub phase_spread: Vec<f64>,
    pub dynamical_spread: Vec<f64>,
    pub phase_verdict: Vec<Verdict>,
    pub dynamical_verdict: Vec<Verdict>,
}

impl RobustnessReport {
    pub fn failures(&self) -> usize {
        self.points
            .iter()
            .flat_map(|p| &p.outcomes)
            .filter(|o| o.is_err())
            .count()
    }
}

/// Runs `evaluate_point` at every rate. Failed points are kept in the report
/// and left out of the spreads.
pub fn phase_sweep(scenario: &SweepScenario, gamma_grid: &[f64]) -> Result<RobustnessReport> {
    if gamma_grid.is_empty() || gamma_grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidParameter("rate grid must be non-empty and finite"));
    }
    let times = scenario.times()?;
    let dim = scenario.invariant.dim();
    let inv = scenario.invariant.trajectory(&scenario.channel, gamma_grid[0], scenario.grid)?;
    let probe = DEFAULT_PROBE
        .iter()
        .map(|&g| scenario.channel.generator(g, dim))
        .collect::<Result<Vec<_>>>()?;
    let (commutator_independence, commutator_spread) = commutator_independence(
        |g| {
            let i = DEFAULT_PROBE.iter().position(|&x| x == g).unwrap_or(0);
            probe[i].clone()
        },
        &inv,
        &DEFAULT_PROBE,
        &scenario.grid,
    );

    let points: Vec<SweepPoint> = gamma_grid
        .iter()
        .map(|&gamma| SweepPoint {
            gamma,
            outcomes: evaluate_point(scenario, gamma),
        })
        .collect();

    let blocks = points
        .iter()
        .flat_map(|p| p.outcomes.iter().filter_map(|o| o.as_ref().ok()))
        .map(|d| d.blocks.len())
        .max()
        .unwrap_or(0);
    let mut phase_spread = alloc::vec![f64::NAN; blocks];
    let mut dynamical_spread = phase_spread.clone();
    for ti in 0..times.len() {
        for b in 0..blocks {
            let vals: Vec<(C64, C64)> = points
                .iter()
                .filter_map(|p| p.outcomes.get(ti)?.as_ref().ok()?.blocks.get(b))
                .map(|bp| (bp.total_geometric, bp.dynamical))
                .collect();
            if vals.is_empty() {
                continue;
            }
            let (ps, ds) = (&mut phase_spread[b], &mut dynamical_spread[b]);
            if ps.is_nan() {
                *ps = 0.0;
                *ds = 0.0;
            }
            for (i, a) in vals.iter().enumerate() {
                for c in &vals[i + 1..] {
                    *ps = ps.max(phase_distance(a.0, c.0));
                    *ds = ds.max(phase_distance(a.1, c.1));
                }
            }
        }
    }
    Ok(RobustnessReport {
        label: scenario.channel.kind.to_string(),
        gammas: gamma_grid.to_vec(),
        times,
        commutator_independence,
        commutator_spread,
        points,
        phase_verdict: phase_spread.iter().map(|&s| Verdict::of(s)).collect(),
        dynamical_verdict: dynamical_spread.iter().map(|&s| Verdict::of(s)).collect(),
        phase_spread,
        dynamical_spread,
    })
}
