//! Dynamical invariants `dI/dt = [L, I]`: closed-form families for the three
//! preset channels and a Runge-Kutta solver for arbitrary initial data.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::matrix::{CMatrix, C64};
use crate::ode;
use crate::quadrature;
use crate::spectral::{align_continuity, decompose, TOL_DEG};
use crate::superop::{Generator, SuperOperator};

/// Target accuracy of `solve_invariant`, per unit time and relative to `||I0||`.
pub const SOLVE_TOL: f64 = 1e-8;

const DEGENERACY_TOL: f64 = 1e-10;

/// Constants of the 2x2 dephasing family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl DephasingParams {
    pub fn new(alpha1: f64, alpha2: f64, c1: f64, c2: f64) -> Self {
        Self { alpha1, alpha2, c1, c2 }
    }

    /// `2 alpha2 + c2`
    pub fn k1(&self) -> f64 {
        2.0 * self.alpha2 + self.c2
    }

    /// `alpha1^2 + alpha2^2`
    pub fn k2(&self) -> f64 {
        self.alpha1 * self.alpha1 + self.alpha2 * self.alpha2
    }

    /// `(4 k2 - c2^2)^(1/2)`, imaginary when the eigenvalues are complex.
    pub fn k3(&self) -> C64 {
        C64::new(4.0 * self.k2() - self.c2 * self.c2, 0.0).sqrt()
    }

    /// The family has an eigenbasis unless `4(alpha1^2 + alpha2^2) = c2^2`.
    pub fn validate(&self) -> Result<()> {
        let (a, b) = (4.0 * self.k2(), self.c2 * self.c2);
        if ![self.alpha1, self.alpha2, self.c1, self.c2].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("family constants must be finite"));
        }
        if (a - b).abs() <= DEGENERACY_TOL * (a + b).max(1.0) {
            return Err(Error::DegenerateFamily);
        }
        Ok(())
    }

    /// `c1/2 -+ k3/2`, lower first.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let h = self.k3() * 0.5;
        let m = C64::new(self.c1 / 2.0, 0.0);
        [m - h, m + h]
    }
}

/// `I(t) = [[a, b], [b + c2, -a + c1]]` on the (sigma_x, sigma_y) block with
/// `a = alpha1 cos 2wt + alpha2 sin 2wt + c1/2`, `b = alpha1 sin 2wt - alpha2 cos 2wt - c2/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingFamily {
    pub params: DephasingParams,
    pub omega: f64,
}

impl DephasingFamily {
    pub fn new(params: DephasingParams, omega: f64) -> Result<Self> {
        params.validate()?;
        if !omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be finite"));
        }
        Ok(Self { params, omega })
    }

    fn entries(&self, t: f64) -> [f64; 4] {
        let p = &self.params;
        let (s, c) = (2.0 * self.omega * t).sin_cos();
        let a = p.alpha1 * c + p.alpha2 * s + p.c1 / 2.0;
        let b = p.alpha1 * s - p.alpha2 * c - p.c2 / 2.0;
        [a, b, b + p.c2, -a + p.c1]
    }

    fn derivative_entries(&self, t: f64) -> [f64; 4] {
        let p = &self.params;
        let w2 = 2.0 * self.omega;
        let (s, c) = (w2 * t).sin_cos();
        let da = w2 * (-p.alpha1 * s + p.alpha2 * c);
        let db = w2 * (p.alpha1 * c + p.alpha2 * s);
        [da, db, db, -da]
    }

    pub fn value(&self, t: f64) -> CMatrix {
        let [a, b, g, d] = self.entries(t);
        CMatrix::from_real_rows(&[[a, b], [g, d]])
    }

    pub fn derivative(&self, t: f64) -> CMatrix {
        let [a, b, g, d] = self.derivative_entries(t);
        CMatrix::from_real_rows(&[[a, b], [g, d]])
    }
}

/// 4x4 invariant for spontaneous emission: dephasing family on the inner
/// block, `q` on (I, I), `x` on (sz, I) and `y = q + x` on (sz, sz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeFamily {
    pub inner: DephasingFamily,
    pub q: f64,
    pub x: f64,
}

impl SeFamily {
    pub fn new(inner: DephasingParams, q: f64, x: f64, omega: f64) -> Result<Self> {
        if !q.is_finite() || !x.is_finite() {
            return Err(Error::InvalidParameter("q and x must be finite"));
        }
        Ok(Self {
            inner: DephasingFamily::new(inner, omega)?,
            q,
            x,
        })
    }

    pub fn y(&self) -> f64 {
        self.q + self.x
    }

    pub fn value(&self, t: f64) -> CMatrix {
        let [a, b, g, d] = self.inner.entries(t);
        CMatrix::from_real_rows(&[
            [self.q, 0.0, 0.0, 0.0],
            [0.0, a, b, 0.0],
            [0.0, g, d, 0.0],
            [self.x, 0.0, 0.0, self.y()],
        ])
    }

    pub fn derivative(&self, t: f64) -> CMatrix {
        let [a, b, g, d] = self.inner.derivative_entries(t);
        CMatrix::from_real_rows(&[
            [0.0; 4],
            [0.0, a, b, 0.0],
            [0.0, g, d, 0.0],
            [0.0; 4],
        ])
    }
}

/// 4x4 invariant for bit-flip with vanishing outer rows and columns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitFlipFamily {
    pub alpha1: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub sigma1: f64,
    pub omega: f64,
    pub gamma_b: f64,
    xi: C64,
    c1: f64,
}

impl BitFlipFamily {
    pub fn new(alpha1: f64, eps1: f64, eps2: f64, sigma1: f64, omega: f64, gamma_b: f64) -> Result<Self> {
        if ![alpha1, eps1, eps2, sigma1, omega, gamma_b].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("family constants must be finite"));
        }
        if omega == 0.0 {
            return Err(Error::InvalidParameter("omega must be non-zero"));
        }
        let g4 = gamma_b.powi(4);
        let w2 = omega * omega;
        if (g4 - w2).abs() <= 1e-12 * (g4 + w2) {
            return Err(Error::SingularXi);
        }
        let xi = C64::new(g4 - w2, 0.0).sqrt();
        let c1 = 2.0 * alpha1 + gamma_b * gamma_b * sigma1 / omega;
        Ok(Self {
            alpha1,
            eps1,
            eps2,
            sigma1,
            omega,
            gamma_b,
            xi,
            c1,
        })
    }

    /// `(gamma_b^4 - omega^2)^(1/2)`
    pub fn xi(&self) -> C64 {
        self.xi
    }

    /// `c1 = 2 alpha1 + gamma_b^2 sigma1 / omega`
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Eigenvalues of the inner block; `alpha1 -+ (eps1 eps2)^(1/2)` when `sigma1 = 0`.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let m = self.inner(0.0);
        let half = (m[0] - m[3]) * 0.5;
        let r = (half * half + m[1] * m[2]).sqrt();
        let c = C64::new(self.c1 / 2.0, 0.0);
        [c - r, c + r]
    }

    fn exps(&self, t: f64) -> (C64, C64) {
        let e = (self.xi * (2.0 * t)).exp();
        (e * self.eps1, e.inv() * self.eps2)
    }

    fn inner(&self, t: f64) -> [C64; 4] {
        let (p, m) = self.exps(t);
        let g2 = self.gamma_b * self.gamma_b;
        let a = (m - p) * self.omega / (self.xi * 2.0) + self.alpha1;
        let eps = p + m;
        let sig = (p - m) * g2 / self.xi + self.sigma1;
        [a, (eps + sig) * 0.5, (eps - sig) * 0.5, -a + self.c1]
    }

    fn inner_derivative(&self, t: f64) -> [C64; 4] {
        let (p, m) = self.exps(t);
        let g2 = self.gamma_b * self.gamma_b;
        let eps = p + m;
        let da = -eps * self.omega;
        let deps = (p - m) * self.xi * 2.0;
        let dsig = eps * (2.0 * g2);
        [da, (deps + dsig) * 0.5, (deps - dsig) * 0.5, -da]
    }

    fn embed(e: [C64; 4]) -> CMatrix {
        let mut m = CMatrix::zeros(4);
        m[(1, 1)] = e[0];
        m[(1, 2)] = e[1];
        m[(2, 1)] = e[2];
        m[(2, 2)] = e[3];
        m
    }

    pub fn value(&self, t: f64) -> CMatrix {
        Self::embed(self.inner(t))
    }

    pub fn derivative(&self, t: f64) -> CMatrix {
        Self::embed(self.inner_derivative(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Dephasing(DephasingFamily),
    SpontaneousEmission(SeFamily),
    BitFlip(BitFlipFamily),
}

impl Family {
    pub fn value(&self, t: f64) -> CMatrix {
        match self {
            Family::Dephasing(f) => f.value(t),
            Family::SpontaneousEmission(f) => f.value(t),
            Family::BitFlip(f) => f.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> CMatrix {
        match self {
            Family::Dephasing(f) => f.derivative(t),
            Family::SpontaneousEmission(f) => f.derivative(t),
            Family::BitFlip(f) => f.derivative(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Family(Family),
    /// Flattened matrices on a uniform grid, with their derivatives.
    Numeric {
        fine: TimeGrid,
        dim: usize,
        values: Vec<Vec<C64>>,
        derivatives: Vec<Vec<C64>>,
    },
}

/// An invariant together with the grid it is evaluated on.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTrajectory {
    source: Source,
    grid: TimeGrid,
}

impl InvariantTrajectory {
    pub fn from_family(family: Family, grid: TimeGrid) -> Self {
        Self {
            source: Source::Family(family),
            grid,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Same invariant on another grid. Numeric trajectories only accept grids
    /// inside the span they were solved on.
    pub fn with_grid(&self, grid: TimeGrid) -> Result<Self> {
        if let Source::Numeric { fine, .. } = &self.source {
            let slack = 1e-9 * fine.duration();
            if grid.start() < fine.start() - slack || grid.end() > fine.end() + slack {
                return Err(Error::InvalidGrid);
            }
        }
        Ok(Self {
            source: self.source.clone(),
            grid,
        })
    }

    pub fn family(&self) -> Option<&Family> {
        match &self.source {
            Source::Family(f) => Some(f),
            Source::Numeric { .. } => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.family().is_some()
    }

    pub fn dim(&self) -> usize {
        self.matrix(self.grid.start()).dim()
    }

    pub fn matrix(&self, t: f64) -> CMatrix {
        match &self.source {
            Source::Family(f) => f.value(t),
            Source::Numeric { fine, dim, values, .. } => unflatten(
                *dim,
                &quadrature::interpolate(values, fine.start(), fine.dt(), t),
            ),
        }
    }

    pub fn derivative_matrix(&self, t: f64) -> CMatrix {
        match &self.source {
            Source::Family(f) => f.derivative(t),
            Source::Numeric {
                fine,
                dim,
                derivatives,
                ..
            } => unflatten(
                *dim,
                &quadrature::interpolate(derivatives, fine.start(), fine.dt(), t),
            ),
        }
    }

    pub fn value(&self, t: f64) -> SuperOperator {
        SuperOperator::new(self.matrix(t)).expect("invariant dimension is 2 or 4")
    }

    pub fn derivative(&self, t: f64) -> SuperOperator {
        SuperOperator::new(self.derivative_matrix(t)).expect("invariant dimension is 2 or 4")
    }
}

fn flatten(m: &CMatrix) -> Vec<C64> {
    m.as_slice().to_vec()
}

fn unflatten(n: usize, v: &[C64]) -> CMatrix {
    CMatrix::from_fn(n, |i, j| v[i * n + j])
}

pub fn dephasing_family(params: DephasingParams, omega: f64, grid: TimeGrid) -> Result<InvariantTrajectory> {
    Ok(InvariantTrajectory::from_family(
        Family::Dephasing(DephasingFamily::new(params, omega)?),
        grid,
    ))
}

pub fn se_family(internal: DephasingParams, q: f64, x: f64, omega: f64, grid: TimeGrid) -> Result<InvariantTrajectory> {
    Ok(InvariantTrajectory::from_family(
        Family::SpontaneousEmission(SeFamily::new(internal, q, x, omega)?),
        grid,
    ))
}

/// Bit-flip family with `sigma1 = 0`, hence `c1 = 2 alpha1`.
pub fn bitflip_family(
    alpha1: f64,
    eps1: f64,
    eps2: f64,
    omega: f64,
    gamma_b: f64,
    grid: TimeGrid,
) -> Result<InvariantTrajectory> {
    Ok(InvariantTrajectory::from_family(
        Family::BitFlip(BitFlipFamily::new(alpha1, eps1, eps2, 0.0, omega, gamma_b)?),
        grid,
    ))
}

/// `[L, I]`
pub fn invariant_rhs(l: &SuperOperator, i: &SuperOperator) -> Result<SuperOperator> {
    if l.dim() != i.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: i.dim(),
        });
    }
    SuperOperator::new(l.matrix().commutator(i.matrix()))
}

/// Integrates `dI/dt = [L(t), I]` from `i0` over `grid` with RK4.
pub fn solve_invariant<G: Generator>(l: &G, i0: &SuperOperator, grid: TimeGrid) -> Result<InvariantTrajectory> {
    if !i0.is_finite() {
        return Err(Error::InvalidParameter("initial invariant has non-finite entries"));
    }
    let n = i0.dim();
    let rhs = |t: f64, y: &[C64]| -> Vec<C64> {
        let lt = l.at(t);
        flatten(&lt.matrix().commutator(&unflatten(n, y)))
    };
    let fine_grid = grid.refined();
    let values = ode::rk4_checked(&rhs, &flatten(i0.matrix()), &grid, SOLVE_TOL)?;
    let derivatives = quadrature::differentiate(&values, fine_grid.dt());
    Ok(InvariantTrajectory {
        source: Source::Numeric {
            fine: fine_grid,
            dim: n,
            values,
            derivatives,
        },
        grid,
    })
}

/// Residual of the invariant equation and eigenvalue drift along the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub max_residual: f64,
    pub max_eigen_drift: f64,
}

/// `max_t ||dI/dt - [L, I]||` and `max_t |lambda(t) - lambda(0)|` over the
/// trajectory grid. The drift is infinite when the eigenvalues cannot be
/// tracked continuously.
pub fn verify_invariant<G: Generator>(traj: &InvariantTrajectory, l: &G) -> Verification {
    let mut max_residual = 0.0_f64;
    let mut max_eigen_drift = 0.0_f64;
    let mut prev = None;
    let mut first: Option<Vec<C64>> = None;
    for t in traj.grid().times() {
        let i = traj.matrix(t);
        let lt = l.at(t);
        let r = &traj.derivative_matrix(t) - &lt.matrix().commutator(&i);
        max_residual = max_residual.max(r.frobenius_norm());

        if max_eigen_drift.is_finite() {
            let basis = decompose(&i, TOL_DEG).and_then(|b| match &prev {
                Some(p) => align_continuity(p, &b, TOL_DEG),
                None => Ok(b),
            });
            match basis {
                Ok(b) => {
                    let ev = b.eigenvalues();
                    match &first {
                        Some(e0) => {
                            for (a, z) in ev.iter().zip(e0) {
                                max_eigen_drift = max_eigen_drift.max((a - z).norm());
                            }
                        }
                        None => first = Some(ev),
                    }
                    prev = Some(b);
                }
                Err(_) => max_eigen_drift = f64::INFINITY,
            }
        }
    }
    Verification {
        max_residual,
        max_eigen_drift,
    }
}
