//! Property checks on random states.

use monogamy_core::density::embed_operator;
use monogamy_core::entropy::marginal_entropy;
use monogamy_core::random::{random_mixed_state, random_pure_state, random_unitary};
use monogamy_core::states::pseudo_pure;
use monogamy_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const Q3: [usize; 3] = [2, 2, 2];

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn local(u: &ComplexMatrix, target: usize) -> ComplexMatrix {
    embed_operator(u, &Q3, &[target]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partial_traces_compose(seed in any::<u64>()) {
        let rho = random_mixed_state(&Q3, &mut rng(seed));
        let direct = rho.partial_trace(&[0]).unwrap();
        let staged = rho.partial_trace(&[0, 2]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!(direct.matrix().max_abs_diff(staged.matrix()) < 1e-12);
        let tr = rho.partial_trace(&[1, 2]).unwrap().matrix().trace();
        prop_assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
    }

    #[test]
    fn outcome_probabilities_sum_to_one(seed in any::<u64>(), t in 0.0..std::f64::consts::PI, p in 0.0..6.3f64) {
        let rho = random_mixed_state(&Q3, &mut rng(seed));
        let basis = qubit_basis(1, t, p);
        let total: f64 = basis
            .projectors()
            .iter()
            .map(|proj| project_and_normalize(&rho, proj, &[1]).unwrap().probability)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let params = [t, p, 0.3, p, t, 1.1, 0.4, 0.9];
        let basis = two_qubit_basis([0, 2], &params);
        let total: f64 = basis
            .projectors()
            .iter()
            .map(|proj| project_and_normalize(&rho, proj, &[0, 2]).unwrap().probability)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_mixed_state(&Q3, &mut r);
        let u = random_unitary(8, &mut r);
        let a = vn_entropy(&rho).unwrap().0;
        let b = vn_entropy(&rho.conjugated(&u).unwrap()).unwrap().0;
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a >= 0.0 && a <= 3.0 + 1e-12);
    }

    #[test]
    fn subadditivity_and_strong_subadditivity(seed in any::<u64>()) {
        let rho = random_mixed_state(&Q3, &mut rng(seed));
        let s = |set: &[usize]| marginal_entropy(&rho, set).unwrap().0;
        prop_assert!(s(&[0, 1]) <= s(&[0]) + s(&[1]) + 1e-10);
        prop_assert!(s(&[0, 1, 2]) + s(&[1]) <= s(&[0, 1]) + s(&[1, 2]) + 1e-10);
        prop_assert!(unmeasured_cond_mutual_info(&rho, 0, 2, 1).unwrap().0 >= -1e-10);
        prop_assert!(quantum_mutual_information(&rho, &[0], &[1, 2]).unwrap().0 >= -1e-10);
    }

    #[test]
    fn pure_state_cuts_have_equal_entropy(seed in any::<u64>()) {
        let rho = random_pure_state(&Q3, &mut rng(seed)).to_density();
        for (a, rest) in [(vec![0], vec![1, 2]), (vec![1], vec![0, 2]), (vec![2], vec![0, 1])] {
            let sa = marginal_entropy(&rho, &a).unwrap().0;
            let sr = marginal_entropy(&rho, &rest).unwrap().0;
            prop_assert!((sa - sr).abs() < 1e-9);
        }
        prop_assert!(vn_entropy(&rho).unwrap().0.abs() < 1e-10);
    }

    #[test]
    fn unmeasured_interaction_info_is_permutation_symmetric(seed in any::<u64>()) {
        let rho = random_mixed_state(&Q3, &mut rng(seed));
        let base = unmeasured_interaction_info(&rho).unwrap().0;
        for order in [[1, 0, 2], [2, 1, 0], [1, 2, 0], [2, 0, 1]] {
            let x = unmeasured_interaction_info(&rho.permuted(&order).unwrap()).unwrap().0;
            prop_assert!((x - base).abs() < 1e-10);
        }
    }

    #[test]
    fn pseudo_pure_spectrum_is_affine(seed in any::<u64>(), p in 0.0..=1.0f64) {
        let psi = random_pure_state(&Q3, &mut rng(seed));
        let rho = pseudo_pure(&psi, p).unwrap();
        let eig = hermitian_eig(rho.matrix()).unwrap();
        let low = (1.0 - p) / 8.0;
        for &v in &eig.values[..7] {
            prop_assert!((v - low).abs() < 1e-12);
        }
        prop_assert!((eig.values[7] - (low + p)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn discord_is_local_unitary_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_mixed_state(&Q3, &mut r);
        let cfg = OptimizerConfig::default();
        let before = discord(&rho, &[0], &[1], &cfg).unwrap().value.0;
        let u = &local(&random_unitary(2, &mut r), 0) * &local(&random_unitary(2, &mut r), 1);
        let after = discord(&rho.conjugated(&u).unwrap(), &[0], &[1], &cfg).unwrap().value.0;
        prop_assert!((before - after).abs() < 1e-6, "{before} vs {after}");
        prop_assert!(before >= -1e-9);
    }

    #[test]
    fn discord_bounded_by_mutual_information(seed in any::<u64>()) {
        let rho = random_mixed_state(&[2, 2], &mut rng(seed));
        let cfg = OptimizerConfig::default();
        let d = discord(&rho, &[0], &[1], &cfg).unwrap();
        let qmi = quantum_mutual_information(&rho, &[0], &[1]).unwrap().0;
        prop_assert!(d.value.0 >= -1e-9);
        prop_assert!(d.classical_correlation().0 >= -1e-9);
        prop_assert!(d.value.0 <= qmi + 1e-9);
    }
}

#[test]
fn pure_state_interaction_info_vanishes() {
    let mut r = rng(7);
    for _ in 0..20 {
        let rho = random_pure_state(&Q3, &mut r).to_density();
        assert!(unmeasured_interaction_info(&rho).unwrap().0.abs() < 1e-9);
    }
}

#[test]
fn spec_strings_round_trip_through_json() {
    let spec: StateSpec = "gen_w:theta=0.4,phi=1.2,p=0.3".parse().unwrap();
    let json = serde_json::to_string(&spec).unwrap();
    let back: StateSpec = json.parse().unwrap();
    assert_eq!(spec, back);
    assert_eq!(spec.family(), "pseudo_pure");
}

#[test]
fn density_json_round_trip() {
    let rho = random_mixed_state(&Q3, &mut rng(3));
    let text = serde_json::to_string(&rho).unwrap();
    let back: DensityMatrix = serde_json::from_str(&text).unwrap();
    assert!(rho.matrix().max_abs_diff(back.matrix()) < 1e-15);
}
