//! Dense complex eigen-solver for small matrices: Householder reduction to
//! Hessenberg form, shifted QR for the eigenvalues, and null spaces by
//! complete-pivot elimination for the eigenvectors.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{norm2, CMatrix, C64, ONE, ZERO};

const EPS: f64 = f64::EPSILON;

/// Eigenvalues of `a` in no particular order.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    let n = a.dim();
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries"));
    }
    let mut h = hessenberg(a);
    let norm = h.frobenius_norm();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut its = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // deflation point
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].norm() <= EPS * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            its = 0;
            continue;
        }
        total += 1;
        its += 1;
        if total > 30 * n {
            return Err(Error::EigenNoConvergence);
        }
        let mu = if its % 10 == 0 {
            h[(hi, hi)] + C64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        qr_step(&mut h, l, hi, mu);
    }
    Ok(eig)
}

fn wilkinson(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = (a + d) * 0.5;
    let (l1, l2) = (m + disc, m - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicitly shifted QR sweep on the active window `lo..=hi`.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let x = h[(k, k)];
        let y = h[(k + 1, k)];
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 { (ONE, ZERO) } else { (x / r, y / r) };
        for j in k..=hi {
            let a = h[(k, j)];
            let b = h[(k + 1, j)];
            h[(k, j)] = c.conj() * a + s.conj() * b;
            h[(k + 1, j)] = -s * a + c * b;
        }
        rots.push((c, s));
    }
    for (off, &(c, s)) in rots.iter().enumerate() {
        let k = lo + off;
        for i in lo..=(k + 2).min(hi) {
            let a = h[(i, k)];
            let b = h[(i, k + 1)];
            h[(i, k)] = a * c + b * s;
            h[(i, k + 1)] = -a * s.conj() + b * c.conj();
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}

/// Unitary similarity to upper Hessenberg form.
pub fn hessenberg(a: &CMatrix) -> CMatrix {
    let n = a.dim();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let alpha = norm2(&x);
        if alpha <= EPS * h.frobenius_norm() {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x;
        v[0] += phase * alpha;
        let vn = norm2(&v);
        for z in v.iter_mut() {
            *z /= vn;
        }
        // H <- (I - 2vv^H) H (I - 2vv^H)
        for j in 0..n {
            let mut s = ZERO;
            for (p, vp) in v.iter().enumerate() {
                s += vp.conj() * h[(k + 1 + p, j)];
            }
            for (p, vp) in v.iter().enumerate() {
                h[(k + 1 + p, j)] -= vp * s * 2.0;
            }
        }
        for i in 0..n {
            let mut s = ZERO;
            for (p, vp) in v.iter().enumerate() {
                s += h[(i, k + 1 + p)] * vp;
            }
            for (p, vp) in v.iter().enumerate() {
                h[(i, k + 1 + p)] -= s * vp.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Basis of the null space of `a`, assuming it has dimension `dim`.
/// Complete-pivot elimination stops after `n - dim` pivots; the returned
/// vectors have unit norm. The caller checks residuals.
pub fn null_space(a: &CMatrix, dim: usize) -> Vec<Vec<C64>> {
    let n = a.dim();
    let rank = n - dim;
    let mut m = a.clone();
    let mut cols: Vec<usize> = (0..n).collect();
    for k in 0..rank {
        let (mut pi, mut pj, mut best) = (k, k, -1.0);
        for i in k..n {
            for j in k..n {
                let v = m[(i, j)].norm();
                if v > best {
                    best = v;
                    pi = i;
                    pj = j;
                }
            }
        }
        m.swap_rows(k, pi);
        if pj != k {
            for i in 0..n {
                let t = m[(i, k)];
                m[(i, k)] = m[(i, pj)];
                m[(i, pj)] = t;
            }
            cols.swap(k, pj);
        }
        let p = m[(k, k)];
        if p == ZERO {
            continue;
        }
        for i in 0..n {
            if i != k {
                let f = m[(i, k)] / p;
                if f != ZERO {
                    for j in k..n {
                        let t = m[(k, j)];
                        m[(i, j)] -= f * t;
                    }
                }
            }
        }
    }
    // reduced form: x_pivot = -sum_j (m[k][j]/m[k][k]) x_free
    let mut out = Vec::with_capacity(dim);
    for f in rank..n {
        let mut x = vec![ZERO; n];
        x[cols[f]] = ONE;
        for k in 0..rank {
            let p = m[(k, k)];
            if p != ZERO {
                x[cols[k]] = -m[(k, f)] / p;
            }
        }
        let nx = norm2(&x);
        out.push(x.into_iter().map(|z| z / nx).collect());
    }
    out
}

/// Largest-magnitude component made real and positive, norm one.
pub fn fix_gauge(v: &mut [C64]) {
    let nv = norm2(v);
    let mut idx = 0;
    let mut best = -1.0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best * (1.0 + 1e-12) {
            best = z.norm();
            idx = i;
        }
    }
    if best <= 0.0 {
        return;
    }
    let phase = v[idx].conj() / (v[idx].norm() * nv);
    for z in v.iter_mut() {
        *z *= phase;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn triangular_eigenvalues_are_the_diagonal() {
        let a = CMatrix::from_real_rows(&[[1.0, 2.0, 3.0], [0.0, 4.0, 5.0], [0.0, 0.0, -6.0]]);
        let e = sorted(eigenvalues(&a).unwrap());
        assert!((e[0] - C64::new(-6.0, 0.0)).norm() < 1e-13);
        assert!((e[1] - C64::new(1.0, 0.0)).norm() < 1e-13);
        assert!((e[2] - C64::new(4.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn rotation_has_imaginary_pair() {
        let a = CMatrix::from_real_rows(&[[-0.5, -1.0], [1.0, -0.5]]);
        let e = sorted(eigenvalues(&a).unwrap());
        assert!((e[0] - C64::new(-0.5, -1.0)).norm() < 1e-14);
        assert!((e[1] - C64::new(-0.5, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn random_matrices_satisfy_characteristic_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let a = CMatrix::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let e = eigenvalues(&a).unwrap();
            let tr: C64 = e.iter().sum();
            assert!((tr - a.trace()).norm() < 1e-12 * n as f64);
            for lam in e {
                let shifted = &a - &CMatrix::identity(n).scale(lam);
                let v = &null_space(&shifted, 1)[0];
                assert!(norm2(&shifted.matvec(v)) < 1e-10, "residual for {lam}");
            }
        }
    }

    #[test]
    fn hessenberg_preserves_spectrum_invariants() {
        let a = CMatrix::from_fn(5, |i, j| C64::new((i * 3 + j) as f64 % 4.0, (i as f64 - j as f64) * 0.3));
        let h = hessenberg(&a);
        for i in 2..5 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.frobenius_norm() - a.frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_rank_deficient_matrix() {
        let a = CMatrix::from_real_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 1.0, 1.0]]);
        let ns = null_space(&a, 1);
        assert!(norm2(&a.matvec(&ns[0])) < 1e-14);
        let z = CMatrix::zeros(3);
        assert_eq!(null_space(&z, 3).len(), 3);
    }

    #[test]
    fn gauge_fix_makes_largest_component_real() {
        let mut v = vec![C64::new(0.1, 0.2), C64::new(0.0, -3.0)];
        fix_gauge(&mut v);
        assert!(v[1].im.abs() < 1e-15 && v[1].re > 0.0);
        assert!((norm2(&v) - 1.0).abs() < 1e-15);
    }
}
