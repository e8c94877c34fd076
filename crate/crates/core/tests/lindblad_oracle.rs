mod common;

use common::{c, lindblad_oracle};
use invphase_core::superop::{build_lindblad, DecoherenceChannel, HsVector};
use invphase_core::C64;
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generator_matches_explicit_dissipator(
        omega in -3.0f64..3.0,
        a1 in coeff(),
        a2 in coeff(),
        a3 in coeff(),
    ) {
        let l = build_lindblad(&DecoherenceChannel::custom(omega, [a1, a2, a3]));
        let o = lindblad_oracle(omega, [a1, a2, a3]);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((l.matrix()[(i, j)] - o[i][j]).norm() < 1e-12, "entry ({}, {})", i, j);
            }
        }
    }

    #[test]
    fn real_coefficients_leave_first_column_empty(
        omega in -3.0f64..3.0,
        a in prop::array::uniform3(-2.0f64..2.0),
    ) {
        let l = build_lindblad(&DecoherenceChannel::custom(omega, a.map(|x| c(x, 0.0))));
        for i in 0..4 {
            prop_assert_eq!(l.matrix()[(i, 0)], c(0.0, 0.0));
            prop_assert_eq!(l.matrix()[(0, i)], c(0.0, 0.0));
        }
    }

    #[test]
    fn presets_preserve_trace(
        gamma in 0.0f64..1.5,
        v in prop::array::uniform3(-0.57f64..0.57),
        kind in 0usize..3,
    ) {
        let ch = match kind {
            0 => DecoherenceChannel::dephasing(1.0, gamma),
            1 => DecoherenceChannel::spontaneous_emission(1.0, gamma),
            _ => DecoherenceChannel::bit_flip(1.0, gamma),
        }.unwrap();
        let l = build_lindblad(&ch);
        let rho = HsVector::from_bloch(v);
        let d = invphase_core::superop::apply_generator(&l, &rho).unwrap();
        prop_assert_eq!(d.components()[0], c(0.0, 0.0));
    }
}
