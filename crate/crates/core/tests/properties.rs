mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use fgns::duhamel::TimeMesh;
use fgns::initial::random_bandlimited;
use fgns::norms::{lorentz_norm, time_lorentz_norm};
use fgns::snapshot::{decode, encode};
use fgns::torus::{fractional_semigroup, leray_project, nonlinear_tensor, TorusGrid};

fn grid(dim: usize, n: usize) -> TorusGrid {
    TorusGrid::new(dim, n, 2.0 * PI).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_idempotent_and_transverse(seed in any::<u64>(), dim in 2usize..=3) {
        let g = grid(dim, if dim == 2 { 16 } else { 8 });
        let u = common::random_field(&g, seed);
        let p = leray_project(&u);
        prop_assert!(p.divergence_defect() < 1e-12);
        prop_assert!(leray_project(&p).max_coeff_diff(&p) < 1e-14);
        prop_assert!(p.hermitian_defect() < 1e-14);
    }

    #[test]
    fn semigroup_composes(seed in any::<u64>(), s in 0.0f64..1.0, t in 0.0f64..1.0, beta in 0.55f64..=1.0) {
        let g = grid(2, 16);
        let u = random_bandlimited(&g, 5, 1.0, seed).unwrap();
        let a = fractional_semigroup(&fractional_semigroup(&u, s, beta).unwrap(), t, beta).unwrap();
        let b = fractional_semigroup(&u, s + t, beta).unwrap();
        prop_assert!(a.max_coeff_diff(&b) < 1e-14);
        prop_assert!(b.is_divergence_free());
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact(seed in any::<u64>(), time in 0.0f64..10.0, n in prop::sample::select(vec![8usize, 12, 16])) {
        let g = TorusGrid::new(2, n, 1.0 + (seed % 7) as f64).unwrap();
        let u = common::random_field(&g, seed);
        let bytes = encode(&u, time);
        let (v, t) = decode(&bytes, None).unwrap();
        prop_assert_eq!(t.to_bits(), time.to_bits());
        prop_assert_eq!(encode(&v, t), bytes);
    }

    #[test]
    fn weak_norm_is_homogeneous(seed in any::<u64>(), c in -5.0f64..5.0, q in 1.1f64..20.0) {
        let g = grid(2, 16);
        let u = random_bandlimited(&g, 4, 1.0, seed).unwrap();
        let a = lorentz_norm(&u.scale(c), q).unwrap();
        let b = c.abs() * lorentz_norm(&u, q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn weak_time_norm_of_constant(c in 0.0f64..4.0, horizon in 0.1f64..5.0, p in 1.5f64..30.0) {
        let mesh = TimeMesh::graded(horizon, 40, 2.0).unwrap();
        let v = time_lorentz_norm(&vec![c; mesh.len()], &mesh, p).unwrap();
        prop_assert!((v - c * horizon.powf(1.0 / p)).abs() <= 1e-12 * (1.0 + v));
    }

    #[test]
    fn products_of_real_fields_stay_real(seed in any::<u64>()) {
        let g = grid(2, 16);
        let u = common::random_field(&g, seed);
        let v = common::random_field(&g, seed.wrapping_add(1));
        let t = nonlinear_tensor(&u, &v).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let c = t.component(i, j);
                for m in 0..g.len() {
                    let d = (c[m] - c[g.conjugate_mode(m)].conj()).norm();
                    prop_assert!(d < 1e-14);
                }
            }
        }
    }
}
