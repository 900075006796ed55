use kt_measure::group::FiniteAbelianGroup;
use kt_measure::hilbert::{expectation, DenseOperator, LegSpace, StateVector};
use kt_measure::measurement::*;
use kt_measure::random::*;
use kt_measure::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(orders: &[usize], dim: usize, seed: u64) -> (SpectralRepresentation, StateVector, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = FiniteAbelianGroup::new(orders).unwrap();
    let rep = random_spectral_representation(&mut rng, g, dim).unwrap();
    let xi = random_state(&mut rng, LegSpace::single("sys", dim));
    (rep, xi, rng)
}

fn groups() -> impl Strategy<Value = Vec<usize>> {
    prop_oneof![
        Just(vec![2]),
        Just(vec![3]),
        Just(vec![4]),
        Just(vec![2, 2]),
        Just(vec![6]),
        Just(vec![2, 4]),
        Just(vec![8])
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn probability_is_additive_over_every_partition(orders in groups(), dim in 1usize..=4, seed in any::<u64>()) {
        let (rep, xi, _) = setup(&orders, dim, seed);
        let n = rep.group().size();
        let id = DenseOperator::identity(rep.system_space());
        let p = |set: &[usize]| instrument(&rep, &Outcome::new(rep.group(), set).unwrap(), &xi, &id).unwrap().probability;
        let singles: Vec<f64> = (0..n).map(|k| p(&[k])).collect();
        for mask in 0u32..(1 << n) {
            let d1: Vec<usize> = (0..n).filter(|k| mask & (1 << k) != 0).collect();
            let d2: Vec<usize> = (0..n).filter(|k| mask & (1 << k) == 0).collect();
            prop_assert!((p(&d1) + p(&d2) - 1.0).abs() <= 1e-12);
            let sum: f64 = d1.iter().map(|&k| singles[k]).sum();
            prop_assert!((p(&d1) - sum).abs() <= 1e-12);
        }
    }

    #[test]
    fn psd_observables_have_nonnegative_values(orders in groups(), dim in 1usize..=4, seed in any::<u64>()) {
        let (rep, xi, mut rng) = setup(&orders, dim, seed);
        let b = random_psd(&mut rng, rep.system_space());
        let d = Outcome::new(rep.group(), &random_subset(&mut rng, rep.group().size())).unwrap();
        let v = instrument(&rep, &d, &xi, &b).unwrap().conditional_expectation;
        prop_assert!(v.re >= -1e-12);
        prop_assert!(v.im.abs() <= 1e-12);
    }

    #[test]
    fn outcomes_are_repeatable(orders in groups(), dim in 1usize..=4, seed in any::<u64>()) {
        let (rep, xi, _) = setup(&orders, dim, seed);
        let id = DenseOperator::identity(rep.system_space());
        for gamma in rep.spectrum() {
            let d = Outcome::new(rep.group(), &[gamma]).unwrap();
            let first = instrument(&rep, &d, &xi, &id).unwrap();
            let Some(rho) = first.post_state else { continue };
            prop_assert!((rho.trace() - C64::new(1.0, 0.0)).norm() <= 1e-12);
            let again = instrument_density(&rep, &d, &rho, &id).unwrap();
            prop_assert!((again.probability - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn coupling_correlates_system_and_probe(orders in groups(), dim in 1usize..=4, seed in any::<u64>()) {
        let (rep, xi, _) = setup(&orders, dim, seed);
        let n = rep.group().size();
        let coupled = couple(&rep, &xi, &rep.group().trivial_character()).unwrap();
        for chi in 0..n {
            for chi2 in 0..n {
                let pin = DenseOperator::from_fn(LegSpace::single("probe", n), |i, j| {
                    if i == chi2 && j == chi2 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
                });
                let joint = expectation(&coupled, &rep.projection_at(chi).kron(&pin).unwrap()).unwrap().re;
                if chi != chi2 {
                    prop_assert!(joint.abs() <= 1e-12);
                }
            }
        }
        // the output is the sector expansion with the probe carrying the label
        let mut expected = vec![C64::new(0.0, 0.0); dim * n];
        for s in rep.sector_decomposition(&xi).unwrap() {
            for (k, a) in s.state.amplitudes().iter().enumerate() {
                expected[k * n + s.character] += a * s.weight;
            }
        }
        let diff: f64 = coupled.amplitudes().iter().zip(&expected).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn instrument_equals_coupled_expectation(orders in groups(), dim in 1usize..=4, seed in any::<u64>()) {
        let (rep, xi, mut rng) = setup(&orders, dim, seed);
        let b = random_hermitian(&mut rng, rep.system_space());
        let d = Outcome::new(rep.group(), &random_subset(&mut rng, rep.group().size())).unwrap();
        prop_assert!(verify_instrument_equals_coupled_expectation(&rep, &d, &xi, &b).unwrap() <= 1e-12);
        let all = Outcome::spectrum(&rep);
        let id = DenseOperator::identity(rep.system_space());
        prop_assert!((instrument(&rep, &all, &xi, &id).unwrap().probability - 1.0).abs() <= 1e-12);
    }
}
