mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{big, brute_force_in_ri, brute_force_lp, random_atoms, random_density, random_lp, small_tree, BruteOutcome};
use noarb_core::emm::{build_emm, one_step_density, one_step_scale, psi, verify_martingale};
use noarb_core::exact::{solve_lp, LpOutcome};
use noarb_core::geometry::{arbitrage_direction, one_sided_direction_lp, ri_conv_contains_origin, RiCertificate};
use noarb_core::model::{conditional_support, gains, reweight, Strategy};
use noarb_core::verify::{beta_exact, equivalence_report, is_arbitrage, oracle_emm_lp};
use noarb_core::{Rational, RationalVector};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn lp_matches_vertex_enumeration(seed in any::<u64>()) {
        let lp = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        let out = solve_lp(&lp).unwrap();
        prop_assert!(out.verify(&lp));
        match (brute_force_lp(&lp), &out) {
            (BruteOutcome::Infeasible, LpOutcome::Infeasible { .. }) => {}
            (BruteOutcome::Unbounded, LpOutcome::Unbounded { .. }) => {}
            (BruteOutcome::Optimal(v), LpOutcome::Optimal { value, .. }) => prop_assert_eq!(v, big(value)),
            (b, o) => prop_assert!(false, "brute force {:?}, simplex {:?}", b, o),
        }
    }

    #[test]
    fn lp_is_deterministic(seed in any::<u64>()) {
        let lp = random_lp(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
    }

    #[test]
    fn geometry_dichotomy(seed in any::<u64>()) {
        let atoms = random_atoms(&mut ChaCha8Rng::seed_from_u64(seed));
        let cert = ri_conv_contains_origin(&atoms).unwrap();
        prop_assert!(cert.verify(&atoms));
        prop_assert_eq!(cert.is_in_ri(), brute_force_in_ri(&atoms));
        let dir = arbitrage_direction(&atoms).unwrap();
        prop_assert_eq!(dir.is_some(), !cert.is_in_ri());
        if cert.is_in_ri() {
            let (value, h) = one_sided_direction_lp(&atoms).unwrap();
            prop_assert!(value.is_zero());
            prop_assert!(h.is_zero());
        }
    }

    #[test]
    fn geometry_scale_invariance(seed in any::<u64>(), num in 1i64..=20, den in 1i64..=20) {
        let atoms = random_atoms(&mut ChaCha8Rng::seed_from_u64(seed));
        let c = Rational::new(num, den);
        let scaled: Vec<RationalVector> = atoms.iter().map(|x| x.scale(&c)).collect();
        let a = ri_conv_contains_origin(&atoms).unwrap();
        let b = ri_conv_contains_origin(&scaled).unwrap();
        prop_assert_eq!(a.is_in_ri(), b.is_in_ri());
        if let RiCertificate::NotInRi { direction } = &a {
            // the same direction separates the scaled atoms
            let moved = RiCertificate::NotInRi { direction: direction.clone() };
            prop_assert!(moved.verify(&scaled));
        }
    }

    #[test]
    fn psi_is_positively_homogeneous(seed in any::<u64>(), num in 1i64..=12, den in 1i64..=12) {
        let tree = small_tree(seed);
        let c = Rational::new(num, den);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for node in tree.internal_nodes() {
            let support = conditional_support(&tree, node.id).unwrap();
            let h: RationalVector = (0..tree.dim())
                .map(|_| Rational::from(rand::Rng::gen_range(&mut rng, -3i64..=3)))
                .collect();
            prop_assert_eq!(psi(&support, &h.scale(&c)), &c * &psi(&support, &h));
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn support_invariance(seed in any::<u64>()) {
        let tree = small_tree(seed);
        let z = random_density(&tree, seed);
        let reweighted = reweight(&tree, &z).unwrap();
        for node in tree.internal_nodes() {
            let before = conditional_support(&tree, node.id).unwrap();
            let after = conditional_support(&reweighted, node.id).unwrap();
            prop_assert_eq!(before.points(), after.points());
            prop_assert!(after.atoms.iter().all(|a| a.q.is_positive()));
        }
        let before = equivalence_report(&tree).unwrap();
        let after = equivalence_report(&reweighted).unwrap();
        prop_assert_eq!(before.no_arbitrage(), after.no_arbitrage());
    }

    #[test]
    fn three_routes_agree(seed in any::<u64>()) {
        let tree = small_tree(seed);
        let r = equivalence_report(&tree).unwrap();
        prop_assert!(r.consistent);
        if let Some(s) = &r.arbitrage {
            prop_assert!(is_arbitrage(&tree, s));
        }
        if let Some(z) = &r.density {
            prop_assert!(verify_martingale(&tree, z).unwrap().holds);
        }
        prop_assert_eq!(oracle_emm_lp(&tree).unwrap().is_some(), r.no_arbitrage());
    }

    #[test]
    fn constructed_measure_is_a_martingale_measure(seed in any::<u64>()) {
        let tree = small_tree(seed);
        let Ok(emm) = build_emm(&tree) else { return Ok(()); };
        emm.leaf_density.check(&tree).unwrap();
        prop_assert!(verify_martingale(&tree, &emm.leaf_density).unwrap().holds);
        prop_assert!(emm.bound >= Rational::one());
        for node in tree.internal_nodes() {
            let support = conditional_support(&tree, node.id).unwrap();
            let density = one_step_density(&support).unwrap();
            prop_assert!(density.verify(&support));
            let f = one_step_scale(&support).unwrap();
            prop_assert!(density.g.iter().all(|g| *g >= f));
            prop_assert!(f <= Rational::one());
        }
        prop_assert!(beta_exact(&tree).unwrap() <= Rational::one());
    }

    #[test]
    fn gains_have_zero_mean_under_the_measure(seed in any::<u64>()) {
        let tree = small_tree(seed);
        let Ok(emm) = build_emm(&tree) else { return Ok(()); };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = Strategy::zero(&tree);
        for node in tree.internal_nodes() {
            let v: RationalVector = (0..tree.dim())
                .map(|_| Rational::new(rand::Rng::gen_range(&mut rng, -4i64..=4), 2))
                .collect();
            s.set(node.id, v);
        }
        let g = gains(&tree, &s).unwrap();
        let expectation: Rational = tree
            .leaves()
            .map(|l| &(&l.mass * &emm.leaf_density.0[&l.id]) * &g[&l.id])
            .sum();
        prop_assert!(expectation.is_zero());
    }
}
