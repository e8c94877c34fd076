//! Fixed-step classical Runge-Kutta with a step-halving check.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::matrix::{axpy, norm2, C64};

/// Integrates `y' = f(t, y)` with `substeps` RK4 steps per grid interval and
/// returns the solution at every grid node.
pub fn rk4<F>(f: &F, y0: &[C64], grid: &TimeGrid, substeps: usize) -> Vec<Vec<C64>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let h = grid.dt() / substeps as f64;
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0.to_vec();
    out.push(y.clone());
    for k in 0..grid.steps() {
        let t0 = grid.time(k);
        for s in 0..substeps {
            y = step(f, t0 + s as f64 * h, &y, h);
        }
        out.push(y.clone());
    }
    out
}

fn step<F>(f: &F, t: f64, y: &[C64], h: f64) -> Vec<C64>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let half = C64::new(0.5 * h, 0.0);
    let k1 = f(t, y);
    let mut tmp = y.to_vec();
    axpy(&mut tmp, half, &k1);
    let k2 = f(t + 0.5 * h, &tmp);
    tmp.copy_from_slice(y);
    axpy(&mut tmp, half, &k2);
    let k3 = f(t + 0.5 * h, &tmp);
    tmp.copy_from_slice(y);
    axpy(&mut tmp, C64::new(h, 0.0), &k3);
    let k4 = f(t + h, &tmp);
    let mut next = y.to_vec();
    for i in 0..next.len() {
        next[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
    next
}

/// RK4 at the grid step and at half the grid step. Returns the finer
/// solution at every node of `grid.refined()`; it is rejected when the two
/// runs differ at a shared node by more than `10 * tol_per_time * duration`,
/// relative to the largest state norm.
pub fn rk4_checked<F>(f: &F, y0: &[C64], grid: &TimeGrid, tol_per_time: f64) -> Result<Vec<Vec<C64>>>
where
    F: Fn(f64, &[C64]) -> Vec<C64>,
{
    let coarse = rk4(f, y0, grid, 1);
    let fine = rk4(f, y0, &grid.refined(), 1);
    let scale = fine.iter().map(|y| norm2(y)).fold(1e-300, f64::max);
    let mut change = 0.0_f64;
    for (k, a) in coarse.iter().enumerate() {
        let d: Vec<C64> = a.iter().zip(&fine[2 * k]).map(|(x, y)| x - y).collect();
        change = change.max(norm2(&d) / scale);
    }
    let tolerance = tol_per_time * grid.duration();
    if !(change <= 10.0 * tolerance) {
        return Err(Error::StepTooLarge { change, tolerance });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    fn rotation(_t: f64, y: &[C64]) -> Vec<C64> {
        vec![-y[1], y[0]]
    }

    #[test]
    fn harmonic_oscillator_one_period() {
        let g = TimeGrid::new(0.0, 2.0 * PI, 1000).unwrap();
        let y = rk4_checked(&rotation, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &g, 1e-9).unwrap();
        let end = &y[2000];
        assert!((end[0].re - 1.0).abs() < 1e-11);
        assert!(end[1].re.abs() < 1e-11);
        let mid = &y[500];
        assert!(mid[0].re.abs() < 1e-11 && (mid[1].re - 1.0).abs() < 1e-11);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let g = TimeGrid::new(0.0, 20.0, 10).unwrap();
        let stiff = |_t: f64, y: &[C64]| vec![y[0] * -3.0];
        let r = rk4_checked(&stiff, &[C64::new(1.0, 0.0)], &g, 1e-9);
        assert!(matches!(r, Err(Error::StepTooLarge { .. })));
    }
}
