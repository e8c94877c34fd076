//! Reference implementations shared by the integration tests. Nothing here
//! calls into the crate's numerical routines.
#![allow(dead_code)]

use invphase_core::C64;

pub type M2 = [[C64; 2]; 2];

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn paulis() -> [M2; 4] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        [[one, o], [o, one]],
        [[o, one], [one, o]],
        [[o, -i], [i, o]],
        [[one, o], [o, -one]],
    ]
}

pub fn mul(a: &M2, b: &M2) -> M2 {
    let mut r = [[c(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn add(a: &M2, b: &M2, s: C64) -> M2 {
    let mut r = *a;
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] += s * b[i][j];
        }
    }
    r
}

pub fn dagger(a: &M2) -> M2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// `-i[H, rho] + Gamma rho Gamma^+ - (Gamma^+ Gamma rho + rho Gamma^+ Gamma)/2`
/// with `H = (omega/2) sigma_z` and `Gamma = sum alpha_i sigma_i`, as a 4x4
/// matrix in the (I, sx, sy, sz) basis: entry (i, j) = tr(sigma_i L(sigma_j))/2.
pub fn lindblad_oracle(omega: f64, alpha: [C64; 3]) -> [[C64; 4]; 4] {
    let p = paulis();
    let zero = [[c(0.0, 0.0); 2]; 2];
    let h = add(&zero, &p[3], c(omega / 2.0, 0.0));
    let mut g = zero;
    for k in 0..3 {
        g = add(&g, &p[k + 1], alpha[k]);
    }
    let gd = dagger(&g);
    let gdg = mul(&gd, &g);
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for j in 0..4 {
        let rho = p[j];
        let comm = add(&mul(&h, &rho), &mul(&rho, &h), c(-1.0, 0.0));
        let mut l = add(&zero, &comm, c(0.0, -1.0));
        l = add(&l, &mul(&mul(&g, &rho), &gd), c(1.0, 0.0));
        l = add(&l, &mul(&gdg, &rho), c(-0.5, 0.0));
        l = add(&l, &mul(&rho, &gdg), c(-0.5, 0.0));
        for i in 0..4 {
            let prod = mul(&p[i], &l);
            out[i][j] = (prod[0][0] + prod[1][1]) * 0.5;
        }
    }
    out
}
