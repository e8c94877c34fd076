//! Hilbert-Schmidt vectors and Lindblad super-operators of a driven two-level
//! system with one decoherence channel `Gamma = sum_i alpha_i sigma_i`.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ZERO};

/// Tolerance on the entries coupling the (sigma_x, sigma_y) block to the rest.
pub const DECOUPLING_TOL: f64 = 1e-12;

/// Row/column ordering of a super-operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsBasis {
    /// (I, sigma_x, sigma_y, sigma_z)
    Full,
    /// (sigma_x, sigma_y)
    Internal,
}

impl HsBasis {
    pub fn dim(self) -> usize {
        match self {
            HsBasis::Full => 4,
            HsBasis::Internal => 2,
        }
    }

    fn of_dim(n: usize) -> Result<Self> {
        match n {
            4 => Ok(HsBasis::Full),
            2 => Ok(HsBasis::Internal),
            _ => Err(Error::DimensionMismatch { expected: 4, found: n }),
        }
    }
}

/// Coherence vector `rho = (c0 I + c1 sx + c2 sy + c3 sz) / 2`, stored
/// without the 1/2. Internal-block vectors carry only `(c1, c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsVector {
    components: Vec<C64>,
}

impl HsVector {
    pub fn new(components: Vec<C64>) -> Self {
        Self { components }
    }

    /// Density operator with Bloch vector `v`.
    pub fn from_bloch(v: [f64; 3]) -> Self {
        Self::new(alloc::vec![
            C64::new(1.0, 0.0),
            C64::new(v[0], 0.0),
            C64::new(v[1], 0.0),
            C64::new(v[2], 0.0),
        ])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(alloc::vec![ZERO; dim])
    }

    pub fn components(&self) -> &[C64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn into_components(self) -> Vec<C64> {
        self.components
    }

    /// Bloch vector (real parts of c1..c3) of a full vector.
    pub fn bloch(&self) -> Option<[f64; 3]> {
        (self.dim() == 4).then(|| {
            [
                self.components[1].re,
                self.components[2].re,
                self.components[3].re,
            ]
        })
    }

    /// `c0 = 1`, real coherence components and a Bloch vector inside the ball.
    pub fn is_physical(&self, tol: f64) -> bool {
        let Some(v) = self.bloch() else {
            return false;
        };
        let c = &self.components;
        (c[0] - C64::new(1.0, 0.0)).norm() <= tol
            && c[1..].iter().all(|z| z.im.abs() <= tol)
            && v.iter().map(|x| x * x).sum::<f64>() <= 1.0 + tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Dephasing,
    SpontaneousEmission,
    BitFlip,
    Custom,
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::SpontaneousEmission => "spontaneous_emission",
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::Custom => "custom",
        })
    }
}

/// Hamiltonian `(omega/2) sigma_z` plus one Lindblad operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceChannel {
    pub omega: f64,
    pub alpha: [C64; 3],
    pub kind: ChannelKind,
}

impl DecoherenceChannel {
    /// `Gamma = gamma_d sigma_z`
    pub fn dephasing(omega: f64, gamma_d: f64) -> Result<Self> {
        let g = rate(gamma_d)?;
        Ok(Self::with_kind(omega, [ZERO, ZERO, g], ChannelKind::Dephasing))
    }

    /// `Gamma = gamma_se (sigma_x - i sigma_y)`
    pub fn spontaneous_emission(omega: f64, gamma_se: f64) -> Result<Self> {
        let g = rate(gamma_se)?;
        Ok(Self::with_kind(
            omega,
            [g, C64::new(0.0, -g.re), ZERO],
            ChannelKind::SpontaneousEmission,
        ))
    }

    /// `Gamma = gamma_b sigma_x`
    pub fn bit_flip(omega: f64, gamma_b: f64) -> Result<Self> {
        let g = rate(gamma_b)?;
        Ok(Self::with_kind(omega, [g, ZERO, ZERO], ChannelKind::BitFlip))
    }

    pub fn custom(omega: f64, alpha: [C64; 3]) -> Self {
        Self::with_kind(omega, alpha, ChannelKind::Custom)
    }

    fn with_kind(omega: f64, alpha: [C64; 3], kind: ChannelKind) -> Self {
        Self { omega, alpha, kind }
    }

    pub fn is_finite(&self) -> bool {
        self.omega.is_finite() && self.alpha.iter().all(|a| a.is_finite())
    }
}

fn rate(g: f64) -> Result<C64> {
    if !g.is_finite() || g < 0.0 {
        return Err(Error::InvalidParameter("decoherence rate must be finite and non-negative"));
    }
    Ok(C64::new(g, 0.0))
}

/// Square matrix acting on Hilbert-Schmidt vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    matrix: CMatrix,
    basis: HsBasis,
}

impl SuperOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let basis = HsBasis::of_dim(matrix.dim())?;
        Ok(Self { matrix, basis })
    }

    pub fn zeros(basis: HsBasis) -> Self {
        Self {
            matrix: CMatrix::zeros(basis.dim()),
            basis,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn basis(&self) -> HsBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.is_finite()
    }

    /// Full super-operator with `self` placed on the (sigma_x, sigma_y) block.
    pub fn embed(&self) -> SuperOperator {
        match self.basis {
            HsBasis::Full => self.clone(),
            HsBasis::Internal => {
                let mut m = CMatrix::zeros(4);
                for i in 0..2 {
                    for j in 0..2 {
                        m[(i + 1, j + 1)] = self.matrix[(i, j)];
                    }
                }
                SuperOperator {
                    matrix: m,
                    basis: HsBasis::Full,
                }
            }
        }
    }
}

/// Time-dependent generator `t -> L(t)`.
pub trait Generator {
    fn at(&self, t: f64) -> SuperOperator;
}

impl Generator for SuperOperator {
    fn at(&self, _t: f64) -> SuperOperator {
        self.clone()
    }
}

impl<F: Fn(f64) -> SuperOperator> Generator for F {
    fn at(&self, t: f64) -> SuperOperator {
        self(t)
    }
}

/// Lindblad super-operator of `channel` in the (I, sx, sy, sz) basis.
pub fn build_lindblad(channel: &DecoherenceChannel) -> SuperOperator {
    let w = channel.omega;
    let [a1, a2, a3] = channel.alpha;
    let sq = |a: C64| a.norm_sqr();
    // a_i* a_j + a_i a_j* and a_i* a_j - a_i a_j*
    let sym = |a: C64, b: C64| a.conj() * b + a * b.conj();
    let asym = |a: C64, b: C64| a.conj() * b - a * b.conj();
    let i2 = C64::new(0.0, 2.0);
    let r = |x: f64| C64::new(x, 0.0);

    let mut m = CMatrix::zeros(4);
    m[(1, 0)] = -i2 * asym(a2, a3);
    m[(1, 1)] = r(-2.0 * (sq(a2) + sq(a3)));
    m[(1, 2)] = r(-w) + sym(a1, a2);
    m[(1, 3)] = sym(a1, a3);

    m[(2, 0)] = i2 * asym(a1, a3);
    m[(2, 1)] = r(w) + sym(a1, a2);
    m[(2, 2)] = r(-2.0 * (sq(a1) + sq(a3)));
    m[(2, 3)] = sym(a2, a3);

    m[(3, 0)] = -i2 * asym(a1, a2);
    m[(3, 1)] = sym(a1, a3);
    m[(3, 2)] = sym(a2, a3);
    m[(3, 3)] = r(-2.0 * (sq(a1) + sq(a2)));
    SuperOperator {
        matrix: m,
        basis: HsBasis::Full,
    }
}

/// The (sigma_x, sigma_y) block of a full super-operator.
pub fn extract_internal_block(l: &SuperOperator) -> Result<SuperOperator> {
    if l.basis != HsBasis::Full {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: l.dim(),
        });
    }
    let m = &l.matrix;
    let mut coupling = 0.0_f64;
    for i in [1, 2] {
        for j in [0, 3] {
            coupling = coupling.max(m[(i, j)].norm()).max(m[(j, i)].norm());
        }
    }
    if coupling > DECOUPLING_TOL {
        return Err(Error::NotBlockDecoupled { coupling });
    }
    Ok(SuperOperator {
        matrix: m.submatrix(&[1, 2]),
        basis: HsBasis::Internal,
    })
}

/// `L rho`
pub fn apply_generator(l: &SuperOperator, rho: &HsVector) -> Result<HsVector> {
    if l.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho.dim(),
        });
    }
    Ok(HsVector::new(l.matrix.matvec(rho.components())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn assert_matrix(m: &CMatrix, expected: &[[f64; 4]; 4]) {
        let e = CMatrix::from_real_rows(expected);
        assert!((m - &e).max_abs() < 1e-15, "{m:?}");
    }

    #[test]
    fn dephasing_preset() {
        let (w, g) = (1.3, 0.4);
        let l = build_lindblad(&DecoherenceChannel::dephasing(w, g).unwrap());
        let d = -2.0 * g * g;
        assert_matrix(
            l.matrix(),
            &[
                [0.0, 0.0, 0.0, 0.0],
                [0.0, d, -w, 0.0],
                [0.0, w, d, 0.0],
                [0.0, 0.0, 0.0, 0.0],
            ],
        );
        let inner = extract_internal_block(&l).unwrap();
        assert_eq!(inner.basis(), HsBasis::Internal);
        assert!((inner.matrix() - &CMatrix::from_real_rows(&[[d, -w], [w, d]])).max_abs() < 1e-15);
    }

    #[test]
    fn bit_flip_preset() {
        let (w, g) = (1.0, 0.7);
        let l = build_lindblad(&DecoherenceChannel::bit_flip(w, g).unwrap());
        let d = -2.0 * g * g;
        assert_matrix(
            l.matrix(),
            &[
                [0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, -w, 0.0],
                [0.0, w, d, 0.0],
                [0.0, 0.0, 0.0, d],
            ],
        );
    }

    #[test]
    fn spontaneous_emission_pumps_towards_ground_state() {
        let g = 0.3;
        let l = build_lindblad(&DecoherenceChannel::spontaneous_emission(1.0, g).unwrap());
        let rho = apply_generator(&l, &HsVector::from_bloch([0.0, 0.0, 0.0])).unwrap();
        let out = rho.components();
        assert!(out[0].norm() < 1e-15 && out[1].norm() < 1e-15 && out[2].norm() < 1e-15);
        assert!((out[3] - c(-4.0 * g * g, 0.0)).norm() < 1e-15);
        assert!((l.matrix()[(3, 3)] - c(-4.0 * g * g, 0.0)).norm() < 1e-15);
        let inner = extract_internal_block(&l).unwrap();
        let d = -2.0 * g * g;
        assert!((inner.matrix() - &CMatrix::from_real_rows(&[[d, -1.0], [1.0, d]])).max_abs() < 1e-15);
    }

    #[test]
    fn apply_dephasing_to_x_state() {
        let (w, g) = (0.8, 0.5);
        let l = build_lindblad(&DecoherenceChannel::dephasing(w, g).unwrap());
        let out = apply_generator(&l, &HsVector::from_bloch([1.0, 0.0, 0.0])).unwrap();
        let e = [c(0.0, 0.0), c(-2.0 * g * g, 0.0), c(w, 0.0), c(0.0, 0.0)];
        for (a, b) in out.components().iter().zip(e) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(apply_generator(&l, &HsVector::zeros(4)).unwrap(), HsVector::zeros(4));
        assert!(matches!(
            apply_generator(&l, &HsVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trivial_channel_is_zero() {
        let l = build_lindblad(&DecoherenceChannel::custom(0.0, [ZERO; 3]));
        assert_eq!(l.matrix().max_abs(), 0.0);
        let inner = extract_internal_block(&l).unwrap();
        assert_eq!(inner.matrix().max_abs(), 0.0);
    }

    #[test]
    fn coupled_block_is_rejected() {
        let ch = DecoherenceChannel::custom(1.0, [c(0.2, 0.0), ZERO, c(0.3, 0.0)]);
        assert!(matches!(
            extract_internal_block(&build_lindblad(&ch)),
            Err(Error::NotBlockDecoupled { .. })
        ));
    }

    #[test]
    fn negative_rates_are_rejected() {
        assert!(DecoherenceChannel::dephasing(1.0, -0.1).is_err());
        assert!(DecoherenceChannel::bit_flip(1.0, f64::NAN).is_err());
    }
}
