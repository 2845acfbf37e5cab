use cohdist::channels::{bit_flip, bit_phase_flip, phase_flip, random_channel, weak_measurement};
use cohdist::complementarity::{
    check_bipartite_discord, check_bipartite_entanglement, check_single,
};
use cohdist::measures::{coherence_relative_entropy, von_neumann_entropy};
use cohdist::quantities::{
    disturbance, er_upper_bound_product, quantum_discord, relative_entropy_entanglement_with,
    ErConfig,
};
use cohdist::states::{purify, random_mixed, random_pure, random_unitary};
use cohdist::{Basis, ErMode, RngStream};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn purification_choice_does_not_matter(seed in any::<u64>(), d in 2usize..4, m in 1usize..5) {
        let mut rng = RngStream::new(seed, 0).generator();
        let rho = random_mixed(d, d, &mut rng).unwrap();
        let ch = random_channel(d, m, &mut rng);
        let psi = purify(&rho).rotate_reference(&random_unitary(d, &mut rng)).unwrap();
        let rotated = von_neumann_entropy(&rho) - von_neumann_entropy(&ch.apply(&rho).unwrap())
            + von_neumann_entropy(&ch.apply_extended(&psi).unwrap());
        prop_assert!((rotated - disturbance(&rho, &ch).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn weak_disturbance_grows_with_strength(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 1).generator();
        let rho = random_mixed(2, 2, &mut rng).unwrap();
        let mut prev = 0.0;
        for j in 0..50 {
            let d = disturbance(&rho, &weak_measurement(j as f64 / 49.0).unwrap()).unwrap();
            prop_assert!(d >= prev - 1e-8);
            prev = d;
        }
    }

    #[test]
    fn disturbance_range(seed in any::<u64>(), d in 2usize..5, m in 1usize..6) {
        let mut rng = RngStream::new(seed, 2).generator();
        let rho = random_mixed(d, 1 + (seed as usize) % d, &mut rng).unwrap();
        let ch = random_channel(d, m, &mut rng);
        let dist = disturbance(&rho, &ch).unwrap();
        prop_assert!((0.0..=2.0 * (d as f64).log2() + 1e-8).contains(&dist));
    }

    #[test]
    fn single_relation_reports_are_consistent(seed in any::<u64>(), d in 2usize..4, m in 1usize..5) {
        let mut rng = RngStream::new(seed, 3).generator();
        let rho = random_mixed(d, d, &mut rng).unwrap();
        let ch = random_channel(d, m, &mut rng);
        let r = check_single(&rho, &ch, &Basis::computational(d)).unwrap();
        prop_assert!((r.components.values().sum::<f64>() - r.lhs).abs() < 1e-10);
        prop_assert!(r.satisfied);
    }

    #[test]
    fn bipartite_reports_are_consistent(seed in any::<u64>(), m in 1usize..4) {
        let mut rng = RngStream::new(seed, 4).generator();
        let rho = random_mixed(4, 4, &mut rng).unwrap();
        let ch = random_channel(4, m, &mut rng);
        let basis = Basis::computational(4);
        for r in [
            check_bipartite_entanglement(&rho, (2, 2), &ch, &basis, ErMode::Certified).unwrap(),
            check_bipartite_discord(&rho, (2, 2), &ch, &basis).unwrap(),
        ] {
            prop_assert!((r.components.values().sum::<f64>() - r.lhs).abs() < 1e-10);
            prop_assert!(r.satisfied, "{:?}", r);
        }
    }

    #[test]
    fn discord_of_pure_states(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 5).generator();
        let psi = random_pure(4, &mut rng);
        let a = psi.reduce(&[2, 2], &[0]).unwrap();
        let q = quantum_discord(&psi, (2, 2)).unwrap().value;
        prop_assert!((q - von_neumann_entropy(&a)).abs() < 3e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn variational_entanglement_never_exceeds_the_product_bound(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 6).generator();
        let rho = random_mixed(4, 1 + (seed as usize) % 4, &mut rng).unwrap();
        let cfg = ErConfig { restarts: 2, max_iterations: 200, ..Default::default() };
        let er = relative_entropy_entanglement_with(&rho, (2, 2), &cfg).unwrap();
        prop_assert!(er.value <= er_upper_bound_product(&rho, (2, 2)).unwrap() + 1e-6);
        prop_assert!(er.value >= 0.0);
    }
}

/// The tighter bound C + D ≤ 1 beyond the Schmidt family: random qubit states
/// under the weak-measurement and flip channels, coherence in the computational frame.
#[test]
fn tighter_qubit_bound_holds_empirically() {
    let mut rng = RngStream::new(2024, 7).generator();
    let basis = Basis::computational(2);
    let mut worst: f64 = 0.0;
    for i in 0..4_000 {
        let rho = random_mixed(2, 2, &mut rng).unwrap();
        let p = (i % 101) as f64 / 100.0;
        let c = coherence_relative_entropy(&rho, &basis).unwrap();
        for ch in [
            weak_measurement(p).unwrap(),
            bit_flip(p).unwrap(),
            phase_flip(p).unwrap(),
            bit_phase_flip(p).unwrap(),
        ] {
            worst = worst.max(c + disturbance(&rho, &ch).unwrap());
        }
    }
    println!("max C + D over weak and flip channels: {worst:.6}");
    assert!(worst <= 1.0 + 1e-8);
}
