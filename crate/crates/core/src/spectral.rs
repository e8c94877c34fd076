//! Biorthonormal eigen-bases of diagonalizable super-operators.

use alloc::vec;
use alloc::vec::Vec;

use crate::eigen;
use crate::error::{Error, Result};
use crate::matrix::{hdot, norm2, pair, CMatrix, C64, ZERO};
use crate::superop::SuperOperator;

/// Default clustering tolerance, relative to `max(1, ||M||)`.
pub const TOL_DEG: f64 = 1e-8;

/// Condition number of the right eigenvector matrix beyond which the input
/// is treated as defective.
pub const MAX_CONDITION: f64 = 1e12;

/// A right vector `|D>>` and its dual left covector `<<E|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub right: Vec<C64>,
    pub left: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBlock {
    pub lambda: C64,
    pub members: Vec<EigenPair>,
}

impl SpectralBlock {
    pub fn degeneracy(&self) -> usize {
        self.members.len()
    }

    /// Right vectors as the columns of a `dim x N` array, column-major.
    pub fn rights(&self) -> Vec<&[C64]> {
        self.members.iter().map(|p| p.right.as_slice()).collect()
    }

    pub fn lefts(&self) -> Vec<&[C64]> {
        self.members.iter().map(|p| p.left.as_slice()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    blocks: Vec<SpectralBlock>,
    dim: usize,
}

impl SpectralBasis {
    /// Assembles a basis from explicit blocks. No biorthonormality check is made.
    pub fn from_blocks(blocks: Vec<SpectralBlock>) -> Result<Self> {
        let dim = blocks
            .first()
            .and_then(|b| b.members.first())
            .map(|p| p.right.len())
            .ok_or(Error::InvalidParameter("spectral basis needs at least one vector"))?;
        let count: usize = blocks.iter().map(SpectralBlock::degeneracy).sum();
        if count != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: count,
            });
        }
        for p in blocks.iter().flat_map(|b| &b.members) {
            if p.right.len() != dim || p.left.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.right.len().max(p.left.len()),
                });
            }
        }
        Ok(Self { blocks, dim })
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &SpectralBlock {
        &self.blocks[b]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.blocks.iter().map(|b| b.lambda).collect()
    }

    /// Flattened pairs in block order.
    pub fn pairs(&self) -> impl Iterator<Item = &EigenPair> {
        self.blocks.iter().flat_map(|b| &b.members)
    }

    /// Right vectors as columns, in block order.
    pub fn right_matrix(&self) -> CMatrix {
        let cols: Vec<Vec<C64>> = self.pairs().map(|p| p.right.clone()).collect();
        CMatrix::from_columns(&cols)
    }

    /// Left covectors as rows, in block order.
    pub fn left_matrix(&self) -> CMatrix {
        let rows: Vec<Vec<C64>> = self.pairs().map(|p| p.left.clone()).collect();
        CMatrix::from_rows(&rows)
    }

    /// Gauge transformation `D -> f D`, `E -> E / f` of one member.
    pub fn rescale_member(&mut self, block: usize, member: usize, f: C64) {
        let p = &mut self.blocks[block].members[member];
        for z in p.right.iter_mut() {
            *z *= f;
        }
        for z in p.left.iter_mut() {
            *z /= f;
        }
    }

    /// Gauge transformation within a block: `D -> D G`, `E -> G^-1 E`.
    pub fn transform_block(&mut self, block: usize, g: &CMatrix) -> Result<()> {
        let b = &mut self.blocks[block];
        let n = b.degeneracy();
        if g.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
        let gi = g.inverse().ok_or(Error::NonDiagonalizable {
            condition: f64::INFINITY,
        })?;
        let rights: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                let mut v = vec![ZERO; self.dim];
                for (k, p) in b.members.iter().enumerate() {
                    for (vi, x) in v.iter_mut().zip(&p.right) {
                        *vi += x * g[(k, j)];
                    }
                }
                v
            })
            .collect();
        let lefts: Vec<Vec<C64>> = (0..n)
            .map(|i| {
                let mut v = vec![ZERO; self.dim];
                for (k, p) in b.members.iter().enumerate() {
                    for (vi, x) in v.iter_mut().zip(&p.left) {
                        *vi += gi[(i, k)] * x;
                    }
                }
                v
            })
            .collect();
        for ((p, r), l) in b.members.iter_mut().zip(rights).zip(lefts) {
            p.right = r;
            p.left = l;
        }
        Ok(())
    }
}

impl AsRef<CMatrix> for SuperOperator {
    fn as_ref(&self) -> &CMatrix {
        self.matrix()
    }
}

impl AsRef<CMatrix> for CMatrix {
    fn as_ref(&self) -> &CMatrix {
        self
    }
}

/// Eigen-decomposition of a diagonalizable matrix into clustered blocks.
pub fn decompose<M: AsRef<CMatrix>>(m: &M, tol_deg: f64) -> Result<SpectralBasis> {
    let m = m.as_ref();
    let n = m.dim();
    let scale = m.frobenius_norm().max(1.0);
    let eig = eigen::eigenvalues(m)?;
    let clusters = cluster(&eig, tol_deg * scale);

    let mut raw: Vec<(C64, Vec<Vec<C64>>)> = Vec::with_capacity(clusters.len());
    for members in clusters {
        let mean = members.iter().map(|&i| eig[i]).sum::<C64>() / members.len() as f64;
        let shifted = m - &CMatrix::identity(n).scale(mean);
        let mut vecs = eigen::null_space(&shifted, members.len());
        for v in vecs.iter_mut() {
            let res = norm2(&shifted.matvec(v));
            if !(res <= 1e-6 * scale) {
                return Err(Error::NonDiagonalizable {
                    condition: f64::INFINITY,
                });
            }
            eigen::fix_gauge(v);
        }
        raw.push((mean, vecs));
    }

    let cols: Vec<Vec<C64>> = raw.iter().flat_map(|(_, v)| v.iter().cloned()).collect();
    let r = CMatrix::from_columns(&cols);
    let condition = r.condition_number();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::NonDiagonalizable { condition });
    }
    let e = r.inverse().ok_or(Error::NonDiagonalizable { condition })?;

    let mut blocks = Vec::with_capacity(raw.len());
    let mut col = 0;
    for (_, vecs) in raw {
        let nb = vecs.len();
        let mut members = Vec::with_capacity(nb);
        let mut tr = ZERO;
        for v in vecs {
            let left = e.row(col);
            tr += pair(&left, &m.matvec(&v));
            members.push(EigenPair { right: v, left });
            col += 1;
        }
        blocks.push(SpectralBlock {
            lambda: tr / nb as f64,
            members,
        });
    }
    let tie = tol_deg * scale;
    blocks.sort_by(|a, b| {
        let (x, y) = (a.lambda, b.lambda);
        if (x.re - y.re).abs() > tie {
            x.re.total_cmp(&y.re)
        } else {
            x.im.total_cmp(&y.im)
        }
    });
    Ok(SpectralBasis { blocks, dim: n })
}

/// Transitive clustering of eigenvalues closer than `tol`.
fn cluster(eig: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = eig.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (eig[i] - eig[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// `max_ij |<<E_i|D_j>> - delta_ij|` over all pairs of the basis.
pub fn check_biorthonormality(b: &SpectralBasis) -> f64 {
    let pairs: Vec<&EigenPair> = b.pairs().collect();
    let mut worst = 0.0_f64;
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((pair(&p.left, &q.right) - target).norm());
        }
    }
    worst
}

/// `sum_a lambda_a |D_a>><<E_a|`
pub fn reconstruct(b: &SpectralBasis) -> CMatrix {
    let mut m = CMatrix::zeros(b.dim());
    for blk in b.blocks() {
        for p in &blk.members {
            for i in 0..b.dim() {
                let s = blk.lambda * p.right[i];
                for j in 0..b.dim() {
                    m[(i, j)] += s * p.left[j];
                }
            }
        }
    }
    m
}

/// Reorders the blocks of `cur` to follow those of `prev` and fixes the gauge
/// of each block so its right vectors stay as close as possible to their
/// predecessors. Left covectors are transformed inversely.
pub fn align_continuity(prev: &SpectralBasis, cur: &SpectralBasis, tol_deg: f64) -> Result<SpectralBasis> {
    if prev.dim != cur.dim {
        return Err(Error::DimensionMismatch {
            expected: prev.dim,
            found: cur.dim,
        });
    }
    let m = prev.blocks.len();
    if cur.blocks.len() != m {
        return Err(Error::BlockStructureChanged);
    }
    let scale = prev
        .blocks
        .iter()
        .map(|b| b.lambda.norm())
        .fold(1.0, f64::max);
    let (perm, margin) = best_matching(prev, cur)?;
    if m > 1 && margin <= tol_deg * scale {
        return Err(Error::AmbiguousMatching { margin });
    }

    let blocks: Vec<SpectralBlock> = perm.iter().map(|&j| cur.blocks[j].clone()).collect();
    let mut out = SpectralBasis { blocks, dim: cur.dim };
    for (b, pb) in prev.blocks.iter().enumerate() {
        let n = pb.degeneracy();
        // least-squares G with D_cur G ~ D_prev
        let gram = CMatrix::from_fn(n, |i, j| {
            hdot(&out.blocks[b].members[i].right, &out.blocks[b].members[j].right)
        });
        let proj = CMatrix::from_fn(n, |i, j| {
            hdot(&out.blocks[b].members[i].right, &pb.members[j].right)
        });
        let g = &gram.inverse().ok_or(Error::NonDiagonalizable {
            condition: f64::INFINITY,
        })? * &proj;
        out.transform_block(b, &g)?;
    }
    Ok(out)
}

/// Permutation `perm[b_prev] = b_cur` minimising the total eigenvalue shift,
/// with the margin to the runner-up.
fn best_matching(prev: &SpectralBasis, cur: &SpectralBasis) -> Result<(Vec<usize>, f64)> {
    let m = prev.blocks.len();
    let mut idx: Vec<usize> = (0..m).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut second = f64::INFINITY;
    loop {
        let mut cost = 0.0;
        for (b, &j) in idx.iter().enumerate() {
            let (p, c) = (&prev.blocks[b], &cur.blocks[j]);
            if p.degeneracy() != c.degeneracy() {
                cost = f64::INFINITY;
                break;
            }
            cost += (p.lambda - c.lambda).norm();
        }
        match &best {
            Some((bc, _)) if cost >= *bc => second = second.min(cost),
            _ => {
                if let Some((bc, _)) = &best {
                    second = second.min(*bc);
                }
                best = Some((cost, idx.clone()));
            }
        }
        if !next_permutation(&mut idx) {
            break;
        }
    }
    match best {
        Some((c, perm)) if c.is_finite() => Ok((perm, second - c)),
        _ => Err(Error::BlockStructureChanged),
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dephasing_block_eigenpairs() {
        let (w, g) = (1.0, 0.3);
        let d = -2.0 * g * g;
        let m = CMatrix::from_real_rows(&[[d, -w], [w, d]]);
        let b = decompose(&m, TOL_DEG).unwrap();
        assert_eq!(b.blocks().len(), 2);
        assert!((b.block(0).lambda - c(d, -w)).norm() < 1e-14);
        assert!((b.block(1).lambda - c(d, w)).norm() < 1e-14);
        for blk in b.blocks() {
            let v = &blk.members[0].right;
            let r: Vec<C64> = m.matvec(v).iter().zip(v).map(|(x, y)| x - blk.lambda * y).collect();
            assert!(norm2(&r) < 1e-12);
        }
        // proportional to (-i, 1) and (i, 1)
        let v0 = &b.block(0).members[0].right;
        assert!((v0[0] / v0[1] - c(0.0, -1.0)).norm() < 1e-13);
        let v1 = &b.block(1).members[0].right;
        assert!((v1[0] / v1[1] - c(0.0, 1.0)).norm() < 1e-13);
        assert!(check_biorthonormality(&b) < 1e-14);
    }

    #[test]
    fn identity_is_one_block() {
        let b = decompose(&CMatrix::identity(4), TOL_DEG).unwrap();
        assert_eq!(b.blocks().len(), 1);
        assert_eq!(b.block(0).degeneracy(), 4);
        assert!((b.block(0).lambda - c(1.0, 0.0)).norm() < 1e-15);
        assert!(check_biorthonormality(&b) < 1e-14);
    }

    #[test]
    fn invariant_at_origin_has_unit_eigenvalues() {
        let m = CMatrix::from_real_rows(&[[1.0, 0.0], [0.0, -1.0]]);
        let b = decompose(&m, TOL_DEG).unwrap();
        assert!((b.block(0).lambda + 1.0).norm() < 1e-15);
        assert!((b.block(1).lambda - 1.0).norm() < 1e-15);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let m = CMatrix::from_real_rows(&[[2.0, 1.0], [0.0, 2.0]]);
        assert!(matches!(decompose(&m, TOL_DEG), Err(Error::NonDiagonalizable { .. })));
        let m = CMatrix::from_real_rows(&[[2.0, 1.0], [1e-30, 2.0]]);
        assert!(matches!(decompose(&m, TOL_DEG), Err(Error::NonDiagonalizable { .. })));
    }

    #[test]
    fn doubled_right_vector_breaks_normalisation() {
        let m = CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.5]]);
        let mut b = decompose(&m, TOL_DEG).unwrap();
        for z in b.blocks[0].members[0].right.iter_mut() {
            *z *= 2.0;
        }
        assert!(check_biorthonormality(&b) >= 1.0);
    }

    #[test]
    fn reconstruction_and_gauge() {
        let m = CMatrix::from_rows(&[
            [c(0.3, 0.1), c(1.0, 0.0), c(0.0, 0.2)],
            [c(-0.5, 0.0), c(0.1, 0.0), c(0.7, -0.3)],
            [c(0.2, 0.2), c(0.0, 0.0), c(-1.0, 0.5)],
        ]);
        let mut b = decompose(&m, TOL_DEG).unwrap();
        assert!((&reconstruct(&b) - &m).max_abs() < 1e-12);
        let before = check_biorthonormality(&b);
        b.rescale_member(1, 0, C64::from_polar(2.5, 0.7));
        assert!((check_biorthonormality(&b) - before).abs() < 1e-13);
        assert!((&reconstruct(&b) - &m).max_abs() < 1e-12);
    }

    #[test]
    fn alignment_restores_order_and_gauge() {
        let m = CMatrix::from_real_rows(&[[1.0, 2.0, 0.0], [0.0, 3.0, 1.0], [0.5, 0.0, -2.0]]);
        let prev = decompose(&m, TOL_DEG).unwrap();
        let same = align_continuity(&prev, &prev, TOL_DEG).unwrap();
        for (a, b) in same.pairs().zip(prev.pairs()) {
            assert!(norm2(&a.right.iter().zip(&b.right).map(|(x, y)| x - y).collect::<Vec<_>>()) < 1e-14);
        }
        let mut swapped = prev.clone();
        swapped.blocks.swap(0, 2);
        swapped.rescale_member(0, 0, c(0.0, -3.0));
        let back = align_continuity(&prev, &swapped, TOL_DEG).unwrap();
        for (a, b) in back.pairs().zip(prev.pairs()) {
            let d: Vec<C64> = a.right.iter().zip(&b.right).map(|(x, y)| x - y).collect();
            assert!(norm2(&d) < 1e-14);
            let d: Vec<C64> = a.left.iter().zip(&b.left).map(|(x, y)| x - y).collect();
            assert!(norm2(&d) < 1e-13);
        }
    }

    #[test]
    fn degenerate_alignment_rotates_within_block() {
        let prev = decompose(&CMatrix::identity(2), TOL_DEG).unwrap();
        let mut cur = prev.clone();
        let g = CMatrix::from_real_rows(&[[0.6, -0.8], [0.8, 0.6]]);
        cur.transform_block(0, &g).unwrap();
        let back = align_continuity(&prev, &cur, TOL_DEG).unwrap();
        assert!((&back.right_matrix() - &prev.right_matrix()).max_abs() < 1e-14);
        assert!(check_biorthonormality(&back) < 1e-14);
    }

    #[test]
    fn structure_change_is_reported() {
        let a = decompose(&CMatrix::identity(2), TOL_DEG).unwrap();
        let b = decompose(&CMatrix::from_real_rows(&[[1.0, 0.0], [0.0, 2.0]]), TOL_DEG).unwrap();
        assert_eq!(align_continuity(&a, &b, TOL_DEG), Err(Error::BlockStructureChanged));
    }

    #[test]
    fn permutation_enumeration() {
        let mut a = [0, 1, 2];
        let mut count = 1;
        while next_permutation(&mut a) {
            count += 1;
        }
        assert_eq!(count, 6);
    }
}
