//! Quadrature and differentiation on uniform grids.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::{C64, ZERO};

/// Composite Simpson rule over uniformly spaced samples. An odd number of
/// intervals finishes with the 3/8 rule on the last three.
pub fn simpson(f: &[C64], dt: f64) -> C64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => ZERO,
        1 => (f[0] + f[1]) * (0.5 * dt),
        _ if n % 2 == 0 => simpson_even(f, dt),
        3 => three_eighths(&f[0..4], dt),
        _ => simpson_even(&f[..n - 2], dt) + three_eighths(&f[n - 3..], dt),
    }
}

fn simpson_even(f: &[C64], dt: f64) -> C64 {
    let n = f.len() - 1;
    let mut acc = f[0] + f[n];
    for (k, v) in f.iter().enumerate().take(n).skip(1) {
        acc += v * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (dt / 3.0)
}

fn three_eighths(f: &[C64], dt: f64) -> C64 {
    (f[0] + f[1] * 3.0 + f[2] * 3.0 + f[3]) * (3.0 * dt / 8.0)
}

/// Running integral `F[k] = int_{t0}^{t_k} f`: Simpson on even nodes, plus
/// a quadratic partial-interval rule for odd nodes.
pub fn cumulative(f: &[C64], dt: f64) -> Vec<C64> {
    let n = f.len();
    let mut out = vec![ZERO; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = (f[0] + f[1]) * (0.5 * dt);
        return out;
    }
    let mut k = 0;
    while k + 2 < n {
        // int over [t_k, t_{k+1}] from the parabola through k, k+1, k+2
        out[k + 1] = out[k] + (f[k] * 5.0 + f[k + 1] * 8.0 - f[k + 2]) * (dt / 12.0);
        out[k + 2] = out[k] + (f[k] + f[k + 1] * 4.0 + f[k + 2]) * (dt / 3.0);
        k += 2;
    }
    if k + 1 < n {
        // last interval from the parabola through k-1, k, k+1
        out[k + 1] = out[k] + (-f[k - 1] + f[k] * 8.0 + f[k + 1] * 5.0) * (dt / 12.0);
    }
    out
}

/// Fourth-order finite-difference derivative of a sampled vector path:
/// central five-point stencil inside, one-sided five-point at the ends.
pub fn differentiate(samples: &[Vec<C64>], dt: f64) -> Vec<Vec<C64>> {
    let n = samples.len();
    assert!(n >= 5, "need at least five samples to differentiate");
    let dim = samples[0].len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (base, w): (usize, [f64; 5]) = if k >= 2 && k + 2 < n {
            (k - 2, [1.0, -8.0, 0.0, 8.0, -1.0])
        } else if k < 2 {
            (0, if k == 0 { FWD0 } else { FWD1 })
        } else if k + 2 == n {
            (n - 5, BWD1)
        } else {
            (n - 5, BWD0)
        };
        let mut d = vec![ZERO; dim];
        for (s, &ws) in w.iter().enumerate() {
            if ws != 0.0 {
                for (di, x) in d.iter_mut().zip(&samples[base + s]) {
                    *di += x * ws;
                }
            }
        }
        let inv = 1.0 / (12.0 * dt);
        out.push(d.into_iter().map(|z| z * inv).collect());
    }
    out
}

/// Degree-four Lagrange interpolation of uniformly spaced vector samples
/// (first node at `t0`) through the five nodes nearest to `t`.
pub fn interpolate(samples: &[Vec<C64>], t0: f64, dt: f64, t: f64) -> Vec<C64> {
    let n = samples.len();
    let x = (t - t0) / dt;
    let k = x.round();
    if (x - k).abs() < 1e-9 && k >= 0.0 && (k as usize) < n {
        return samples[k as usize].clone();
    }
    let width = n.min(5);
    let centre = x.floor() as isize - (width as isize - 1) / 2;
    let base = centre.clamp(0, (n - width) as isize) as usize;
    let mut out = vec![ZERO; samples[0].len()];
    for a in 0..width {
        let mut w = 1.0;
        for b in 0..width {
            if a != b {
                w *= (x - (base + b) as f64) / (a as f64 - b as f64);
            }
        }
        for (o, v) in out.iter_mut().zip(&samples[base + a]) {
            *o += v * w;
        }
    }
    out
}

// Five-point stencils (scaled by 1/12) for the first two and last two nodes.
const FWD0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const FWD1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const BWD1: [f64; 5] = [-1.0, 6.0, -18.0, 10.0, 3.0];
const BWD0: [f64; 5] = [3.0, -16.0, 36.0, -48.0, 25.0];
