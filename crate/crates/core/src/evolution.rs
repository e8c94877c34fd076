//! Direct integration of the master equation and projection onto the
//! invariant basis. Used as ground truth for the phase predictions.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::matrix::{norm2, pair, C64};
use crate::ode;
use crate::phase::BasisPath;
use crate::superop::{Generator, HsVector};

/// Step-halving tolerance per unit time of the state integration.
pub const MASTER_TOL: f64 = 1e-9;

/// Floor of the relative error in `oracle_compare`.
pub const COMPARE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<HsVector>,
}

/// RK4 solution of `d rho/dt = L(t) rho` at every node of `grid`.
pub fn integrate_master<G: Generator>(l: &G, rho0: &HsVector, grid: TimeGrid) -> Result<StateTrajectory> {
    let physical = match rho0.dim() {
        4 => rho0.is_physical(1e-12),
        2 => {
            let c = rho0.components();
            c.iter().all(|z| z.im.abs() <= 1e-12) && norm2(c) <= 1.0 + 1e-12
        }
        _ => false,
    };
    if !physical {
        return Err(Error::InvalidParameter("initial state is not a physical density operator"));
    }
    let rhs = |t: f64, y: &[C64]| l.at(t).matrix().matvec(y);
    let fine = ode::rk4_checked(&rhs, rho0.components(), &grid, MASTER_TOL)?;
    let states = fine.into_iter().step_by(2).map(HsVector::new).collect();
    Ok(StateTrajectory { grid, states })
}

/// `c(t) = <<E(t)|rho(t)>>` for every member, `[node][flat member]`.
pub fn expand_in_invariant_basis(traj: &StateTrajectory, path: &BasisPath) -> Result<Vec<Vec<C64>>> {
    if traj.states.len() != path.len() {
        return Err(Error::DimensionMismatch {
            expected: path.len(),
            found: traj.states.len(),
        });
    }
    traj.states
        .iter()
        .zip(path.bases())
        .map(|(rho, basis)| {
            if rho.dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim(),
                    found: rho.dim(),
                });
            }
            Ok(basis.pairs().map(|p| pair(&p.left, rho.components())).collect())
        })
        .collect()
}

/// `max_t ||rho(t) - sum c(t) D(t)||`
pub fn reconstruction_residual(traj: &StateTrajectory, path: &BasisPath, coeffs: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0_f64;
    for ((rho, basis), c) in traj.states.iter().zip(path.bases()).zip(coeffs) {
        let mut r = rho.components().to_vec();
        for (p, ck) in basis.pairs().zip(c) {
            for (ri, d) in r.iter_mut().zip(&p.right) {
                *ri -= ck * d;
            }
        }
        worst = worst.max(norm2(&r));
    }
    worst
}

/// Largest deviation of each member, relative to the largest modulus that
/// member reaches in `direct` (at least `COMPARE_FLOOR`). Coefficients pass
/// close to zero along oscillating paths, where a pointwise ratio means
/// nothing.
pub fn oracle_compare(direct: &[Vec<C64>], predicted: &[Vec<C64>]) -> f64 {
    let members = direct.iter().map(Vec::len).max().unwrap_or(0);
    let mut worst = 0.0_f64;
    for m in 0..members {
        let mut scale = COMPARE_FLOOR;
        let mut dev = 0.0_f64;
        for (d, p) in direct.iter().zip(predicted) {
            let (Some(a), Some(b)) = (d.get(m), p.get(m)) else {
                return f64::INFINITY;
            };
            scale = scale.max(a.norm());
            dev = dev.max((a - b).norm());
        }
        worst = worst.max(dev / scale);
    }
    if worst.is_nan() {
        f64::INFINITY
    } else {
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::{dephasing_family, DephasingParams};
    use crate::phase::coefficient_evolution;
    use crate::superop::{build_lindblad, extract_internal_block, DecoherenceChannel, HsBasis, SuperOperator};
    use core::f64::consts::PI;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.0, 2.0 * PI, 1000).unwrap()
    }

    #[test]
    fn zero_generator_keeps_state() {
        let rho = HsVector::from_bloch([0.1, 0.2, 0.3]);
        let tr = integrate_master(&SuperOperator::zeros(HsBasis::Full), &rho, grid()).unwrap();
        assert!(tr.states.iter().all(|s| *s == rho));
    }

    #[test]
    fn dephasing_spiral() {
        let g = 0.3;
        let l = build_lindblad(&DecoherenceChannel::dephasing(1.0, g).unwrap());
        let tr = integrate_master(&l, &HsVector::from_bloch([1.0, 0.0, 0.0]), grid()).unwrap();
        for (t, s) in tr.grid.times().zip(&tr.states) {
            let env = (-2.0 * g * g * t).exp();
            let c = s.components();
            assert!((c[1].re - env * t.cos()).abs() < 1e-10);
            assert!((c[2].re - env * t.sin()).abs() < 1e-10);
            assert!((c[0].re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spontaneous_emission_relaxes_to_ground_state() {
        let g = 0.5;
        let l = build_lindblad(&DecoherenceChannel::spontaneous_emission(1.0, g).unwrap());
        let tr = integrate_master(&l, &HsVector::from_bloch([0.0, 0.0, 0.0]), grid()).unwrap();
        for (t, s) in tr.grid.times().zip(&tr.states) {
            let v3 = -(1.0 - (-4.0 * g * g * t).exp());
            assert!((s.components()[3].re - v3).abs() < 1e-10);
        }
    }

    #[test]
    fn unphysical_state_is_rejected() {
        let l = SuperOperator::zeros(HsBasis::Full);
        let bad = HsVector::from_bloch([1.0, 1.0, 0.0]);
        assert!(integrate_master(&l, &bad, grid()).is_err());
    }

    #[test]
    fn projection_and_prediction_agree_for_dephasing() {
        let l = extract_internal_block(&build_lindblad(&DecoherenceChannel::dephasing(1.0, 0.4).unwrap())).unwrap();
        let traj = dephasing_family(DephasingParams::new(0.6, -0.9, 0.3, 0.5), 1.0, grid()).unwrap();
        let path = BasisPath::track(&traj).unwrap();
        let rho0 = HsVector::new(alloc::vec![C64::new(0.6, 0.0), C64::new(-0.3, 0.0)]);
        let states = integrate_master(&l, &rho0, grid()).unwrap();
        let direct = expand_in_invariant_basis(&states, &path).unwrap();
        assert!(reconstruction_residual(&states, &path, &direct) < 1e-9);
        let predicted = coefficient_evolution(&path, &l, &direct[0]).unwrap();
        assert!(oracle_compare(&direct, &predicted) < 1e-5);
        assert_eq!(oracle_compare(&direct, &direct), 0.0);
    }
}
