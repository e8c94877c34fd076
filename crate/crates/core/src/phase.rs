//! Abelian and non-Abelian geometric and dynamical phases along the
//! eigenbasis of a dynamical invariant.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::invariant::{DephasingParams, InvariantTrajectory};
use crate::matrix::{norm2, pair, CMatrix, C64, ONE, ZERO};
use crate::quadrature::{cumulative, differentiate, simpson};
use crate::spectral::{align_continuity, decompose, SpectralBasis, TOL_DEG};
use crate::superop::Generator;

/// Target accuracy of the phase quadratures.
pub const QUAD_TOL: f64 = 1e-8;
/// Relative endpoint mismatch of the eigen-ray allowed for a cyclic path.
pub const CYCLIC_TOL: f64 = 1e-6;
/// Overlaps below this modulus leave the non-cyclic phase undefined.
pub const OVERLAP_FLOOR: f64 = 1e-12;
/// `||[int A, int H]||` above which the factored non-Abelian phase is advisory.
pub const ADVISORY_TOL: f64 = 1e-8;
/// Relative tolerance of the step-halving check on ordered exponentials.
pub const PROPAGATOR_TOL: f64 = 1e-9;

/// Continuity-aligned biorthonormal bases at every node of a grid, with the
/// time derivatives of the right vectors.
#[derive(Debug, Clone)]
pub struct BasisPath {
    grid: TimeGrid,
    bases: Vec<SpectralBasis>,
    /// `[node][flat member]`
    derivs: Vec<Vec<Vec<C64>>>,
    offsets: Vec<usize>,
}

impl BasisPath {
    /// Decomposes the invariant at every node of its grid and aligns the
    /// bases sequentially.
    pub fn track(traj: &InvariantTrajectory) -> Result<Self> {
        let grid = *traj.grid();
        let mut bases = Vec::with_capacity(grid.len());
        for t in grid.times() {
            let b = decompose(&traj.matrix(t), TOL_DEG)?;
            let b = match bases.last() {
                Some(prev) => align_continuity(prev, &b, TOL_DEG)?,
                None => b,
            };
            bases.push(b);
        }
        Self::from_bases(grid, bases)
    }

    /// Uses the given bases as they are; they must share one block layout.
    pub fn from_bases(grid: TimeGrid, bases: Vec<SpectralBasis>) -> Result<Self> {
        if bases.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: bases.len(),
            });
        }
        if bases.len() < 5 {
            return Err(Error::InvalidGrid);
        }
        let layout: Vec<usize> = bases[0].blocks().iter().map(|b| b.degeneracy()).collect();
        for b in &bases {
            let l: Vec<usize> = b.blocks().iter().map(|b| b.degeneracy()).collect();
            if l != layout || b.dim() != bases[0].dim() {
                return Err(Error::BlockStructureChanged);
            }
        }
        let mut offsets = Vec::with_capacity(layout.len());
        let mut acc = 0;
        for n in &layout {
            offsets.push(acc);
            acc += n;
        }
        let dt = grid.dt();
        let mut derivs = vec![Vec::with_capacity(acc); bases.len()];
        for f in 0..acc {
            let samples: Vec<Vec<C64>> = bases
                .iter()
                .map(|b| b.pairs().nth(f).expect("layout checked").right.clone())
                .collect();
            for (k, d) in differentiate(&samples, dt).into_iter().enumerate() {
                derivs[k].push(d);
            }
        }
        Ok(Self {
            grid,
            bases,
            derivs,
            offsets,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bases(&self) -> &[SpectralBasis] {
        &self.bases
    }

    pub fn basis(&self, k: usize) -> &SpectralBasis {
        &self.bases[k]
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn degeneracy(&self, block: usize) -> usize {
        self.bases[0].block(block).degeneracy()
    }

    pub fn eigenvalue(&self, block: usize) -> C64 {
        self.bases[0].block(block).lambda
    }

    /// Block whose eigenvalue is closest to `lambda`.
    pub fn block_nearest(&self, lambda: C64) -> usize {
        (0..self.block_count())
            .min_by(|&a, &b| {
                (self.eigenvalue(a) - lambda)
                    .norm()
                    .total_cmp(&(self.eigenvalue(b) - lambda).norm())
            })
            .unwrap_or(0)
    }

    pub fn right(&self, k: usize, block: usize, i: usize) -> &[C64] {
        &self.bases[k].block(block).members[i].right
    }

    pub fn left(&self, k: usize, block: usize, i: usize) -> &[C64] {
        &self.bases[k].block(block).members[i].left
    }

    /// `d/dt |D_block^(i)>>` at node `k`.
    pub fn right_derivative(&self, k: usize, block: usize, i: usize) -> &[C64] {
        &self.derivs[k][self.offsets[block] + i]
    }

    /// Nodes `0..=k` of this path; derivatives are kept from the full path.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        let grid = self.grid.truncated(k)?;
        Ok(Self {
            grid,
            bases: self.bases[..=k].to_vec(),
            derivs: self.derivs[..=k].to_vec(),
            offsets: self.offsets.clone(),
        })
    }

    fn abelian(&self, block: usize) -> Result<()> {
        if block >= self.block_count() {
            return Err(Error::InvalidParameter("block index out of range"));
        }
        let n = self.degeneracy(block);
        if n != 1 {
            return Err(Error::DegenerateBlock {
                block,
                degeneracy: n,
            });
        }
        Ok(())
    }
}

/// Phase data of one non-degenerate block at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbelianPhase {
    pub time: f64,
    /// `-int <<E|d_t|D>> dt`
    pub geometric_integral: C64,
    /// `<<E(0)|D(t)>>`
    pub overlap: C64,
    /// Principal `ln <<E(0)|D(t)>>`
    pub ln_correction: C64,
    /// `ln_correction + geometric_integral`
    pub total_geometric: C64,
}

/// `max |<<E_b|(L - d_t)|D_a>>|` over nodes and pairs of distinct blocks.
pub fn check_block_decoupling<G: Generator>(path: &BasisPath, l: &G) -> f64 {
    let mut worst = 0.0_f64;
    for (k, t) in path.grid.times().enumerate() {
        let lm = l.at(t);
        for a in 0..path.block_count() {
            for i in 0..path.degeneracy(a) {
                let d = path.right(k, a, i);
                let ld = lm.matrix().matvec(d);
                let dd = path.right_derivative(k, a, i);
                for b in (0..path.block_count()).filter(|&b| b != a) {
                    for j in 0..path.degeneracy(b) {
                        let e = path.left(k, b, j);
                        worst = worst.max((pair(e, &ld) - pair(e, dd)).norm());
                    }
                }
            }
        }
    }
    worst
}

/// `-<<E|d_t|D>>` at every node.
pub fn geometric_integrand(path: &BasisPath, block: usize) -> Result<Vec<C64>> {
    path.abelian(block)?;
    Ok((0..path.len())
        .map(|k| -pair(path.left(k, block, 0), path.right_derivative(k, block, 0)))
        .collect())
}

/// `<<E|L|D>>` at every node.
pub fn dynamical_integrand<G: Generator>(path: &BasisPath, l: &G, block: usize) -> Result<Vec<C64>> {
    path.abelian(block)?;
    Ok(path
        .grid
        .times()
        .enumerate()
        .map(|(k, t)| {
            let ld = l.at(t).matrix().matvec(path.right(k, block, 0));
            pair(path.left(k, block, 0), &ld)
        })
        .collect())
}

/// Simpson integral with one step-halving check.
fn checked_integral(f: &[C64], dt: f64) -> Result<C64> {
    let full = simpson(f, dt);
    if f.len() >= 5 {
        let half: Vec<C64> = f.iter().step_by(2).copied().collect();
        if (f.len() - 1) % 2 == 0 {
            let coarse = simpson(&half, 2.0 * dt);
            let change = (full - coarse).norm() / 15.0;
            let tolerance = QUAD_TOL * full.norm().max(1.0);
            if !(change <= 10.0 * tolerance) {
                return Err(Error::StepTooLarge { change, tolerance });
            }
        }
    }
    Ok(full)
}

/// Cyclic phase `-int_0^T <<E|d_t|D>> dt` in a gauge with `|D(T)>> = |D(0)>>`.
///
/// The aligned path closes only up to a factor `h = <<E(0)|D(T)>>`; the
/// phase is reported in the closing gauge `D h^(-t/T)`, i.e. `Ln h - int`.
pub fn abelian_cyclic_gp(path: &BasisPath, block: usize) -> Result<C64> {
    let integrand = geometric_integrand(path, block)?;
    let last = path.len() - 1;
    let d0 = path.right(0, block, 0);
    let dt_ = path.right(last, block, 0);
    let h = pair(path.left(0, block, 0), dt_);
    let residual: Vec<C64> = dt_.iter().zip(d0).map(|(x, y)| x - h * y).collect();
    let mismatch = norm2(&residual) / norm2(dt_).max(1e-300);
    if !(mismatch <= CYCLIC_TOL) {
        return Err(Error::NotCyclic { mismatch });
    }
    Ok(h.ln() + checked_integral(&integrand, path.grid.dt())?)
}

/// Gauge-invariant open-path phase at the end of the path.
pub fn abelian_noncyclic_gp(path: &BasisPath, block: usize) -> Result<AbelianPhase> {
    let integrand = geometric_integrand(path, block)?;
    let last = path.len() - 1;
    let integral = checked_integral(&integrand, path.grid.dt())?;
    open_phase(path, block, last, integral)
}

fn open_phase(path: &BasisPath, block: usize, k: usize, integral: C64) -> Result<AbelianPhase> {
    let time = path.grid.time(k);
    let overlap = pair(path.left(0, block, 0), path.right(k, block, 0));
    if !(overlap.norm() >= OVERLAP_FLOOR) {
        return Err(Error::VanishingOverlap {
            time,
            modulus: overlap.norm(),
        });
    }
    let ln_correction = overlap.ln();
    Ok(AbelianPhase {
        time,
        geometric_integral: integral,
        overlap,
        ln_correction,
        total_geometric: ln_correction + integral,
    })
}

/// Open-path phase at every node; the integral is accumulated continuously
/// and the logarithm taken on the principal branch pointwise.
pub fn noncyclic_series(path: &BasisPath, block: usize) -> Result<Vec<AbelianPhase>> {
    let integrand = geometric_integrand(path, block)?;
    checked_integral(&integrand, path.grid.dt())?;
    cumulative(&integrand, path.grid.dt())
        .into_iter()
        .enumerate()
        .map(|(k, integral)| open_phase(path, block, k, integral))
        .collect()
}

/// `int <<E|L|D>> dt` over the whole path.
pub fn dynamical_phase<G: Generator>(path: &BasisPath, l: &G, block: usize) -> Result<C64> {
    checked_integral(&dynamical_integrand(path, l, block)?, path.grid.dt())
}

/// Running dynamical phase at every node.
pub fn dynamical_series<G: Generator>(path: &BasisPath, l: &G, block: usize) -> Result<Vec<C64>> {
    Ok(cumulative(&dynamical_integrand(path, l, block)?, path.grid.dt()))
}

/// `H`, `A = -<<E|d_t|D>>` and `M = H + A` of one block at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NonAbelianMatrices {
    pub h: CMatrix,
    pub a: CMatrix,
    pub m: CMatrix,
}

pub fn nonabelian_matrices<G: Generator>(path: &BasisPath, l: &G, k: usize, block: usize) -> NonAbelianMatrices {
    let n = path.degeneracy(block);
    let lm = l.at(path.grid.time(k));
    let ld: Vec<Vec<C64>> = (0..n).map(|j| lm.matrix().matvec(path.right(k, block, j))).collect();
    let h = CMatrix::from_fn(n, |i, j| pair(path.left(k, block, i), &ld[j]));
    let a = CMatrix::from_fn(n, |i, j| -pair(path.left(k, block, i), path.right_derivative(k, block, j)));
    let m = &h + &a;
    NonAbelianMatrices { h, a, m }
}

fn integrate_matrices(samples: &[CMatrix], dt: f64) -> CMatrix {
    let n = samples[0].dim();
    CMatrix::from_fn(n, |i, j| {
        let f: Vec<C64> = samples.iter().map(|m| m[(i, j)]).collect();
        simpson(&f, dt)
    })
}

/// Fourth-order Magnus exponent over `[t0, t0 + 2h]` from node values.
fn magnus_double(a0: &CMatrix, a1: &CMatrix, a2: &CMatrix, h: f64) -> CMatrix {
    let d = 2.0 * h;
    let b0 = (&(a0 + &a1.scale_re(4.0)) + a2).scale_re(1.0 / 6.0);
    let b1 = (a2 - a0).scale_re(1.0 / 12.0);
    &b0.scale_re(d) + &b1.commutator(&b0).scale_re(d * d)
}

/// Magnus exponent over `[t_k, t_k + h]` given the node before or after.
fn magnus_single(prev: Option<&CMatrix>, a0: &CMatrix, a1: &CMatrix, next: Option<&CMatrix>, h: f64) -> CMatrix {
    let int = match (prev, next) {
        (_, Some(a2)) => (&(&a0.scale_re(5.0) + &a1.scale_re(8.0)) - a2).scale_re(h / 12.0),
        (Some(am), None) => (&(&a0.scale_re(8.0) + &a1.scale_re(5.0)) - am).scale_re(h / 12.0),
        (None, None) => (a0 + a1).scale_re(h / 2.0),
    };
    &int + &a1.commutator(a0).scale_re(h * h / 12.0)
}

/// Ordered exponential of node-sampled generators, latest factor leftmost.
pub fn ordered_exponential(samples: &[CMatrix], h: f64) -> CMatrix {
    let n = samples.len();
    let mut u = CMatrix::identity(samples[0].dim());
    let mut k = 0;
    while k + 2 < n {
        u = &magnus_double(&samples[k], &samples[k + 1], &samples[k + 2], h).expm() * &u;
        k += 2;
    }
    if k + 1 < n {
        let prev = k.checked_sub(1).map(|p| &samples[p]);
        u = &magnus_single(prev, &samples[k], &samples[k + 1], None, h).expm() * &u;
    }
    u
}

/// Ordered exponential at every node.
pub fn ordered_exponential_series(samples: &[CMatrix], h: f64) -> Vec<CMatrix> {
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    let mut u = CMatrix::identity(samples[0].dim());
    out.push(u.clone());
    let mut k = 0;
    while k + 2 < n {
        let half = magnus_single(None, &samples[k], &samples[k + 1], Some(&samples[k + 2]), h);
        out.push(&half.expm() * &u);
        u = &magnus_double(&samples[k], &samples[k + 1], &samples[k + 2], h).expm() * &u;
        out.push(u.clone());
        k += 2;
    }
    if k + 1 < n {
        let prev = k.checked_sub(1).map(|p| &samples[p]);
        out.push(&magnus_single(prev, &samples[k], &samples[k + 1], None, h).expm() * &u);
    }
    out
}

/// `T exp int M(t) dt` over `grid`, checked against the same product on a
/// grid with half the step.
pub fn time_ordered_propagator<F: Fn(f64) -> CMatrix>(m: F, grid: &TimeGrid) -> Result<CMatrix> {
    let coarse: Vec<CMatrix> = grid.times().map(&m).collect();
    let fine_grid = grid.refined();
    let fine: Vec<CMatrix> = fine_grid.times().map(&m).collect();
    let uc = ordered_exponential(&coarse, grid.dt());
    let uf = ordered_exponential(&fine, fine_grid.dt());
    let change = (&uf - &uc).frobenius_norm() / uf.frobenius_norm().max(1.0);
    if !(change <= 10.0 * PROPAGATOR_TOL) {
        return Err(Error::StepTooLarge {
            change,
            tolerance: PROPAGATOR_TOL,
        });
    }
    Ok(uf)
}

/// Non-Abelian phase data of one block at the end of the path.
#[derive(Debug, Clone, PartialEq)]
pub struct NonAbelianPhase {
    /// `W_ij = <<E_i(0)|D_j(t)>>`
    pub overlap: CMatrix,
    /// `T exp int A`
    pub a_propagator: CMatrix,
    /// `T exp int M`, the coefficient propagator
    pub propagator: CMatrix,
    /// `exp Phi = W T exp int A`
    pub exp_phi: CMatrix,
    pub a_integral: CMatrix,
    pub h_integral: CMatrix,
    /// `||[int A, int H]||`
    pub commutator_norm: f64,
    /// The factored form is not justified when the integrals do not commute.
    pub advisory: bool,
}

pub fn nonabelian_gp<G: Generator>(path: &BasisPath, l: &G, block: usize) -> NonAbelianPhase {
    let n = path.degeneracy(block);
    let last = path.len() - 1;
    let dt = path.grid.dt();
    let mats: Vec<NonAbelianMatrices> = (0..path.len())
        .map(|k| nonabelian_matrices(path, l, k, block))
        .collect();
    let a: Vec<CMatrix> = mats.iter().map(|x| x.a.clone()).collect();
    let h: Vec<CMatrix> = mats.iter().map(|x| x.h.clone()).collect();
    let m: Vec<CMatrix> = mats.iter().map(|x| x.m.clone()).collect();
    let overlap = CMatrix::from_fn(n, |i, j| pair(path.left(0, block, i), path.right(last, block, j)));
    let a_propagator = ordered_exponential(&a, dt);
    let propagator = ordered_exponential(&m, dt);
    let a_integral = integrate_matrices(&a, dt);
    let h_integral = integrate_matrices(&h, dt);
    let commutator_norm = a_integral.commutator(&h_integral).frobenius_norm();
    NonAbelianPhase {
        exp_phi: &overlap * &a_propagator,
        overlap,
        a_propagator,
        propagator,
        a_integral,
        h_integral,
        commutator_norm,
        advisory: commutator_norm > ADVISORY_TOL,
    }
}

/// Phase data of one block at the end of a path.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPhase {
    pub lambda: C64,
    pub degeneracy: usize,
    /// For `N > 1` the scalar fields hold the determinant (U(1)) part:
    /// `tr int A`, `ln det W` and `tr int H`.
    pub geometric_integral: C64,
    pub ln_correction: C64,
    pub dynamical: C64,
    pub total_geometric: C64,
    pub non_abelian: Option<NonAbelianPhase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDecomposition {
    pub time: f64,
    pub blocks: Vec<BlockPhase>,
}

/// All blocks at the end of the path.
pub fn phase_decomposition<G: Generator>(path: &BasisPath, l: &G) -> Result<PhaseDecomposition> {
    let mut blocks = Vec::with_capacity(path.block_count());
    for b in 0..path.block_count() {
        let lambda = path.eigenvalue(b);
        let degeneracy = path.degeneracy(b);
        if degeneracy == 1 {
            let p = abelian_noncyclic_gp(path, b)?;
            blocks.push(BlockPhase {
                lambda,
                degeneracy,
                geometric_integral: p.geometric_integral,
                ln_correction: p.ln_correction,
                dynamical: dynamical_phase(path, l, b)?,
                total_geometric: p.total_geometric,
                non_abelian: None,
            });
        } else {
            let na = nonabelian_gp(path, l, b);
            let det = determinant(&na.overlap);
            if !(det.norm() >= OVERLAP_FLOOR) {
                return Err(Error::VanishingOverlap {
                    time: path.grid.end(),
                    modulus: det.norm(),
                });
            }
            let geometric_integral = na.a_integral.trace();
            blocks.push(BlockPhase {
                lambda,
                degeneracy,
                geometric_integral,
                ln_correction: det.ln(),
                dynamical: na.h_integral.trace(),
                total_geometric: det.ln() + geometric_integral,
                non_abelian: Some(na),
            });
        }
    }
    Ok(PhaseDecomposition {
        time: path.grid.end(),
        blocks,
    })
}

fn determinant(m: &CMatrix) -> C64 {
    let n = m.dim();
    let mut a = m.clone();
    let mut det = ONE;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap_or(k);
        if a[(p, k)] == ZERO {
            return ZERO;
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    det
}

/// Predicted expansion coefficients `c(t)` of the state in the invariant
/// basis, `[node][flat member]`, starting from `c0` in block order. Each
/// block evolves by `T exp int (H + A)`; for `N = 1` this is
/// `c(0) exp(geometric_integral) exp(dynamical)`.
pub fn coefficient_evolution<G: Generator>(path: &BasisPath, l: &G, c0: &[C64]) -> Result<Vec<Vec<C64>>> {
    let total: usize = (0..path.block_count()).map(|b| path.degeneracy(b)).sum();
    if c0.len() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: c0.len(),
        });
    }
    let dt = path.grid.dt();
    let mut out = vec![Vec::with_capacity(total); path.len()];
    let mut off = 0;
    for b in 0..path.block_count() {
        let n = path.degeneracy(b);
        if n == 1 {
            let g = cumulative(&geometric_integrand(path, b)?, dt);
            let d = cumulative(&dynamical_integrand(path, l, b)?, dt);
            for k in 0..path.len() {
                out[k].push(c0[off] * g[k].exp() * d[k].exp());
            }
        } else {
            let m: Vec<CMatrix> = (0..path.len())
                .map(|k| nonabelian_matrices(path, l, k, b).m)
                .collect();
            for (k, u) in ordered_exponential_series(&m, dt).into_iter().enumerate() {
                out[k].extend(u.matvec(&c0[off..off + n]));
            }
        }
        off += n;
    }
    Ok(out)
}

/// Reference values of the cyclic dephasing phases for `T = 2 pi / omega`:
/// `phi1 = -2 pi (c2 k1 + 2 k2 (-(k1/k3)^2)^(1/2)) / (k1 k3)` and `phi2 = -phi1`,
/// with the principal square root.
pub fn closed_form_dephasing_gp(alpha1: f64, alpha2: f64, c2: f64) -> Result<(C64, C64)> {
    let p = DephasingParams::new(alpha1, alpha2, 0.0, c2);
    p.validate()?;
    let k1 = p.k1();
    if k1.abs() <= 1e-12 * (1.0 + alpha2.abs() + c2.abs()) {
        return Err(Error::VanishingK1);
    }
    let k2 = p.k2();
    let k3 = p.k3();
    let ratio = C64::new(k1, 0.0) / k3;
    let sq = ratio * ratio;
    // negating a real square would put a -0 imaginary part on the branch cut
    let root = C64::new(-sq.re, if sq.im == 0.0 { 0.0 } else { -sq.im }).sqrt();
    let phi1 = -(root * (2.0 * k2) + c2 * k1) * (2.0 * PI) / (k3 * k1);
    Ok((phi1, -phi1))
}

/// Cyclic dephasing dynamical phases `-4 pi gamma_d^2 / omega +- 2 c2 pi / k3`,
/// lower invariant eigenvalue first.
pub fn closed_form_dephasing_dynamical(params: &DephasingParams, gamma_d: f64, omega: f64) -> Result<(C64, C64)> {
    params.validate()?;
    let base = C64::new(-4.0 * PI * gamma_d * gamma_d / omega, 0.0);
    let shift = C64::new(2.0 * params.c2 * PI, 0.0) / params.k3();
    Ok((base + shift, base - shift))
}

/// For every right eigenvector `v` of `i`, `min_lambda ||L v - lambda v||`
/// over the eigenvalues of `l`; the maximum over `v` is returned.
pub fn common_eigenbasis_residual(i: &CMatrix, l: &CMatrix) -> Result<f64> {
    let bi = decompose(i, TOL_DEG)?;
    let lambdas = crate::eigen::eigenvalues(l)?;
    let mut worst = 0.0_f64;
    for p in bi.pairs() {
        let lv = l.matvec(&p.right);
        let nv = norm2(&p.right);
        let best = lambdas
            .iter()
            .map(|&lam| {
                let r: Vec<C64> = lv.iter().zip(&p.right).map(|(a, b)| a - lam * b).collect();
                norm2(&r) / nv
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    Ok(worst)
}

/// `|a - b|` with the imaginary difference reduced modulo `2 pi`.
pub fn phase_distance(a: C64, b: C64) -> f64 {
    let d = a - b;
    let im = d.im - 2.0 * PI * (d.im / (2.0 * PI)).round();
    C64::new(d.re, im).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::{dephasing_family, se_family};
    use crate::superop::{build_lindblad, extract_internal_block, DecoherenceChannel, SuperOperator};

    fn grid(t: f64, steps: usize) -> TimeGrid {
        TimeGrid::new(0.0, t, steps).unwrap()
    }

    fn l_dp(gamma: f64) -> SuperOperator {
        extract_internal_block(&build_lindblad(&DecoherenceChannel::dephasing(1.0, gamma).unwrap())).unwrap()
    }

    fn dephasing_path(p: DephasingParams, steps: usize) -> BasisPath {
        BasisPath::track(&dephasing_family(p, 1.0, grid(2.0 * PI, steps)).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_special_case() {
        let (a, b) = closed_form_dephasing_gp(1.0, 0.5, 0.0).unwrap();
        assert!((a - C64::new(0.0, -PI)).norm() < 1e-14);
        assert!((b - C64::new(0.0, PI)).norm() < 1e-14);
        let (a, b) = closed_form_dephasing_gp(1.0, -0.5, 0.0).unwrap();
        assert!((a - C64::new(0.0, PI)).norm() < 1e-14);
        assert!((b - C64::new(0.0, -PI)).norm() < 1e-14);
        assert_eq!(closed_form_dephasing_gp(1.0, -0.5, 1.0), Err(Error::VanishingK1));
        assert_eq!(closed_form_dephasing_gp(0.3, 0.4, 1.0), Err(Error::DegenerateFamily));
    }

    #[test]
    fn dephasing_cyclic_phase_real_part_and_dynamical_phase() {
        let p = DephasingParams::new(1.0, 0.5, 0.0, 0.3);
        let path = dephasing_path(p, 1000);
        let k3 = p.k3().re;
        let phi1 = abelian_cyclic_gp(&path, 0).unwrap();
        let phi2 = abelian_cyclic_gp(&path, 1).unwrap();
        assert!((phi1.re + 2.0 * PI * p.c2 / k3).abs() < 1e-8, "{phi1}");
        assert!(phase_distance(phi1, -phi2) < 1e-8);
        let (d1, d2) = closed_form_dephasing_dynamical(&p, 0.5, 1.0).unwrap();
        let l = l_dp(0.5);
        assert!((dynamical_phase(&path, &l, 0).unwrap() - d1).norm() < 1e-8);
        assert!((dynamical_phase(&path, &l, 1).unwrap() - d2).norm() < 1e-8);
        assert!(check_block_decoupling(&path, &l) < 1e-8);
    }

    #[test]
    fn constant_invariant_has_no_geometric_phase() {
        let path = dephasing_path(DephasingParams::new(0.0, 0.0, 0.2, 0.6), 200);
        for b in 0..2 {
            assert!(abelian_cyclic_gp(&path, b).unwrap().norm() < 1e-14);
            assert!(abelian_noncyclic_gp(&path.truncated(37).unwrap(), b)
                .unwrap()
                .total_geometric
                .norm()
                < 1e-14);
        }
    }

    #[test]
    fn noncyclic_phase_vanishes_at_start_and_closes() {
        let path = dephasing_path(DephasingParams::new(0.7, -0.2, 0.1, 0.4), 1000);
        let s = noncyclic_series(&path, 1).unwrap();
        assert_eq!(s[0].total_geometric, C64::new(0.0, 0.0));
        let cyc = abelian_cyclic_gp(&path, 1).unwrap();
        assert!(phase_distance(s[1000].total_geometric, cyc) < 1e-12);
    }

    #[test]
    fn open_path_is_not_cyclic() {
        let path = dephasing_path(DephasingParams::new(1.0, 0.5, 0.0, 0.0), 1000);
        let half = path.truncated(250).unwrap();
        assert!(matches!(abelian_cyclic_gp(&half, 0), Err(Error::NotCyclic { .. })));
    }

    #[test]
    fn ordered_exponential_of_constant_and_commuting_generators() {
        let m0 = CMatrix::from_rows(&[[C64::new(0.1, 0.2), C64::new(-1.0, 0.0)], [C64::new(0.5, 0.0), C64::new(-0.3, 0.1)]]);
        let g = grid(2.0, 200);
        let u = time_ordered_propagator(|_| m0.clone(), &g).unwrap();
        assert!((&u - &m0.scale_re(2.0).expm()).max_abs() < 1e-12);
        let u = time_ordered_propagator(|t| m0.scale_re(t.cos()), &g).unwrap();
        assert!((&u - &m0.scale_re(2.0_f64.sin()).expm()).max_abs() < 1e-10);
        let odd = grid(2.0, 201);
        let samples: Vec<CMatrix> = odd.times().map(|t| m0.scale_re(t.cos())).collect();
        let u = ordered_exponential(&samples, odd.dt());
        assert!((&u - &m0.scale_re(2.0_f64.sin()).expm()).max_abs() < 1e-9);
        let series = ordered_exponential_series(&samples, odd.dt());
        for (k, v) in series.iter().enumerate().step_by(17) {
            let e = m0.scale_re(odd.time(k).sin()).expm();
            assert!((v - &e).max_abs() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn identity_invariant_single_degenerate_block() {
        let traj = dephasing_family(DephasingParams::new(0.0, 0.0, 2.0, 0.6), 1.0, grid(1.0, 100)).unwrap();
        // identity: single N = 2 block on the internal space
        let id = CMatrix::identity(2);
        let bases: Vec<SpectralBasis> = traj.grid().times().map(|_| decompose(&id, TOL_DEG).unwrap()).collect();
        let path = BasisPath::from_bases(*traj.grid(), bases).unwrap();
        let l = l_dp(0.3);
        let m = nonabelian_matrices(&path, &l, 10, 0);
        assert!((&m.h - l.matrix()).max_abs() < 1e-14);
        assert_eq!(m.a.max_abs(), 0.0);
        let na = nonabelian_gp(&path, &l, 0);
        assert!((&na.overlap - &id).max_abs() < 1e-15);
        assert!((&na.exp_phi - &id).max_abs() < 1e-15);
        assert!((&na.propagator - &l.matrix().expm()).max_abs() < 1e-12);
        assert!(!na.advisory);
    }

    #[test]
    fn scalar_nonabelian_reduces_to_abelian() {
        let p = DephasingParams::new(0.8, 0.4, 0.0, 0.2);
        let path = dephasing_path(p, 1000).truncated(700).unwrap();
        let l = l_dp(0.2);
        let na = nonabelian_gp(&path, &l, 0);
        let ab = abelian_noncyclic_gp(&path, 0).unwrap();
        assert!((na.exp_phi[(0, 0)] - ab.total_geometric.exp()).norm() < 1e-8);
        let dec = phase_decomposition(&path, &l).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        assert!(dec.blocks[0].non_abelian.is_none());
    }

    #[test]
    fn se_phases_equal_dephasing_phases() {
        let p = DephasingParams::new(1.0, 0.5, 0.0, 0.0);
        let g = grid(2.0 * PI, 1000);
        let dp = BasisPath::track(&dephasing_family(p, 1.0, g).unwrap()).unwrap();
        let se = BasisPath::track(&se_family(p, 1.0, 0.5, 1.0, g).unwrap()).unwrap();
        for b in 0..2 {
            let lam = dp.eigenvalue(b);
            let sb = se.block_nearest(lam);
            assert!((se.eigenvalue(sb) - lam).norm() < 1e-12);
            let a = abelian_cyclic_gp(&dp, b).unwrap();
            let c = abelian_cyclic_gp(&se, sb).unwrap();
            assert!(phase_distance(a, c) < 1e-10, "{a} vs {c}");
        }
    }

    #[test]
    fn adiabatic_constant_member_shares_eigenbasis() {
        let traj = dephasing_family(DephasingParams::new(0.0, 0.0, 0.0, 0.6), 1.0, grid(1.0, 4)).unwrap();
        let r = common_eigenbasis_residual(&traj.matrix(0.3), l_dp(0.4).matrix()).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn determinant_matches_expansion() {
        let m = CMatrix::from_real_rows(&[[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]]);
        assert!((determinant(&m) - C64::new(18.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn phase_distance_wraps() {
        assert!(phase_distance(C64::new(0.0, PI), C64::new(0.0, -PI)) < 1e-15);
        assert!((phase_distance(C64::new(1.0, 0.0), C64::new(0.0, 0.0)) - 1.0).abs() < 1e-15);
    }
}
