//! Property tests of the structural invariants.

use proptest::prelude::*;
use stabenv::cx::{rel_diff, Cx};
use stabenv::envelope_x::{restrict_x, XParams};
use stabenv::mirror::{chamber_image, kappa_inverse, kappa_params};
use stabenv::rect_combinatorics::{
    bj, bj_inv, complement_trees, involution, involution_admissible, lambda_trees, precedes_or_equal, GrassData,
    LShapeRule, Subset, YoungDiagram,
};
use stabenv::sampling::LogSampler;
use stabenv::theta_core::{quasiperiod_residual, reflection_residual, EllipticParams};

const PREC: u32 = 256;

fn grass() -> impl Strategy<Value = GrassData> {
    (2usize..=8).prop_flat_map(|n| (Just(n), 1..=n / 2)).prop_map(|(n, k)| GrassData::new(n, k).unwrap())
}

fn grass_and_subset() -> impl Strategy<Value = (GrassData, Subset)> {
    grass().prop_flat_map(|g| {
        let subsets = g.subsets();
        (Just(g), 0..subsets.len()).prop_map(move |(g, i)| (g, g.subsets()[i].clone()))
    })
}

fn grass_and_diagram() -> impl Strategy<Value = (GrassData, YoungDiagram)> {
    grass_and_subset().prop_map(|(g, p)| (g, bj_inv(&p, &g).unwrap()))
}

fn cx() -> impl Strategy<Value = Cx> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| Cx::from_f64(PREC, re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_laws(w in cx(), r in 0.01f64..0.5, a in 0.0f64..std::f64::consts::TAU) {
        let ell = EllipticParams::new(r * a.cos(), r * a.sin(), PREC, 1e-60).unwrap();
        prop_assert!(quasiperiod_residual(&ell, &w) < 1e-40);
        prop_assert!(reflection_residual(&ell, &w) < 1e-40);
    }

    #[test]
    fn phi_quasiperiod(a in cx(), b in cx()) {
        let ell = EllipticParams::standard();
        // φ(xq, y) = y⁻¹ φ(x, y)
        let lhs = ell.phi(&(&a + ell.log_q()), &b).unwrap();
        let rhs = &ell.phi(&a, &b).unwrap() / &b.exp();
        prop_assert!(rel_diff(&lhs, &rhs, 1e-300) < 1e-55);
    }

    #[test]
    fn bijection_round_trip((g, p) in grass_and_subset()) {
        let lam = bj_inv(&p, &g).unwrap();
        prop_assert_eq!(bj(&lam, &g).unwrap(), p);
        prop_assert!(lam.parts().iter().all(|&r| r <= g.k));
        prop_assert!(lam.parts().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bijection_is_monotone((g, p) in grass_and_subset(), j in 0usize..70) {
        let subsets = g.subsets();
        let q = &subsets[j % subsets.len()];
        let (lam, mu) = (bj_inv(&p, &g).unwrap(), bj_inv(q, &g).unwrap());
        prop_assert_eq!(lam.is_subset_of(&mu), precedes_or_equal(&p, q));
    }

    #[test]
    fn trees_are_valid((g, lam) in grass_and_diagram()) {
        for t in lambda_trees(&lam) {
            prop_assert!(t.validate(&g));
        }
        for rule in [LShapeRule::Plain, LShapeRule::Reflected] {
            for t in complement_trees(&lam, &g, rule) {
                prop_assert!(t.validate(&g));
            }
        }
    }

    #[test]
    fn involution_is_an_involution((g, lam) in grass_and_diagram(), allow in any::<bool>()) {
        for t in complement_trees(&lam, &g, LShapeRule::Plain) {
            for at in lam.complement_cells(&g) {
                if involution_admissible(&t, &at, &lam, &g, allow).is_ok() {
                    let s = involution(&t, &at, &lam, &g, allow).unwrap();
                    prop_assert!(s.validate(&g));
                    prop_assert_ne!(&s, &t);
                    prop_assert_eq!(involution(&s, &at, &lam, &g, allow).unwrap(), t.clone());
                }
            }
        }
    }

    #[test]
    fn kappa_round_trip(seed in any::<u64>(), (n, k) in prop_oneof![Just((3, 1)), Just((4, 2)), Just((5, 2))]) {
        let g = GrassData::new(n, k).unwrap();
        let px = XParams::random(g, &mut LogSampler::new(seed, PREC));
        let back = kappa_inverse(&kappa_params(&px));
        for i in 2..=n {
            prop_assert!(rel_diff(&(back.u(i) - back.u(1)), &(px.u(i) - px.u(1)), 1e-30) < 1e-60);
        }
        prop_assert!(rel_diff(&back.z, &px.z, 1e-30) < 1e-60);
    }

    #[test]
    fn chamber_image_telescopes(sigma in prop::collection::vec(-5i64..5, 2..8)) {
        let z = chamber_image(&sigma);
        prop_assert_eq!(z.iter().sum::<i64>(), sigma[0] - sigma[sigma.len() - 1]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// T_{p,q} vanishes unless q ≼ p.
    #[test]
    fn x_restrictions_are_triangular(seed in any::<u64>(), (n, k) in prop_oneof![Just((3, 1)), Just((4, 2)), Just((5, 2))]) {
        let g = GrassData::new(n, k).unwrap();
        let ell = EllipticParams::standard();
        let prm = XParams::random(g, &mut LogSampler::new(seed, PREC));
        for p in g.subsets() {
            let d = restrict_x(&g, &p, &p, &prm, &ell).unwrap().abs_f64();
            for q in g.subsets() {
                if !precedes_or_equal(&q, &p) {
                    prop_assert!(restrict_x(&g, &p, &q, &prm, &ell).unwrap().abs_f64() < 1e-50 * d.max(1.0));
                }
            }
        }
    }
}
