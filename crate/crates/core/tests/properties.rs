//! Property tests across module boundaries.

use num_bigint::BigUint;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sidonbench::boolean_cube::wht_forward;
use sidonbench::index_sets::{binomial, count_exact, enumerate, FamilyKind};
use sidonbench::ksz_lab::{ksz_trig_trial, unit_coefficients};
use sidonbench::multipliers::{multiplier_norm_bracket, two_summing_norm, MultiplierSpec, SearchConfig, Space};
use sidonbench::par;
use sidonbench::trig_poly::{certified_sup, eval_grid, l2_norm, GridSpec, TrigPolynomial, DEFAULT_GRID_CAP};

fn random_poly(m: usize, n: usize, seed: u64) -> TrigPolynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = enumerate(FamilyKind::TSet, m, n).unwrap();
    let terms: Vec<_> = family
        .multi_indices()
        .unwrap()
        .iter()
        .filter_map(|a| {
            let keep = rng.random_bool(0.6);
            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            keep.then(|| (a.clone(), c))
        })
        .collect();
    TrigPolynomial::from_terms(n, m, terms).unwrap()
}

fn grid_max(p: &TrigPolynomial, points: usize) -> f64 {
    let grid = GridSpec::new(points, p.n()).unwrap();
    eval_grid(p, &grid, DEFAULT_GRID_CAP).unwrap().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn graded_families_count_exactly() {
    for m in 0..=30u64 {
        for n in 1..=30u64 {
            assert_eq!(count_exact(FamilyKind::LambdaEQ, m as usize, n as usize), binomial(m + n - 1, m), "m={m} n={n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn families_are_sorted_and_duplicate_free(kind in prop::sample::select(vec![
        FamilyKind::LambdaLE, FamilyKind::LambdaEQ, FamilyKind::TSet, FamilyKind::SubsetsLE, FamilyKind::SubsetsEQ,
    ]), m in 0usize..5, n in 1usize..6) {
        let fam = enumerate(kind, m, n).unwrap();
        prop_assert!(fam.is_canonically_sorted());
        prop_assert_eq!(BigUint::from(fam.len()), count_exact(kind, m, n));
        let mut text = Vec::new();
        fam.write_text(&mut text).unwrap();
        let back = sidonbench::index_sets::IndexFamily::read_text(&text[..]).unwrap();
        prop_assert_eq!(back.len(), fam.len());
        match fam.multi_indices() {
            Some(list) => prop_assert!(list.windows(2).all(|w| w[0] != w[1])),
            None => {
                let s = fam.subsets().unwrap();
                prop_assert!(s.windows(2).all(|w| w[0] != w[1]));
            }
        }
    }

    #[test]
    fn l2_norm_is_at_most_twice_the_grid_max(seed in any::<u64>(), m in 1usize..5, n in 1usize..4) {
        let p = random_poly(m, n, seed);
        let g = grid_max(&p, 1 + 20 * m);
        prop_assert!(l2_norm(&p) <= 2.0 * g + 1e-12);
    }

    #[test]
    fn refining_the_grid_never_lowers_the_max(seed in any::<u64>(), m in 1usize..4, n in 1usize..3) {
        let p = random_poly(m, n, seed);
        let coarse = grid_max(&p, 1 + 20 * m);
        let fine = grid_max(&p, 2 * (1 + 20 * m));
        prop_assert!(fine >= coarse - 1e-12);
    }

    #[test]
    fn rotated_grid_max_stays_in_the_bracket(seed in any::<u64>(), m in 1usize..4, n in 1usize..3, shift in 0.0f64..6.3) {
        let p = random_poly(m, n, seed);
        let bracket = certified_sup(&p, DEFAULT_GRID_CAP);
        let offset: Vec<f64> = (0..n).map(|j| shift * (j as f64 + 1.0) / n as f64).collect();
        let rotated = grid_max(&p.rotated(&offset), 1 + 20 * m);
        prop_assert!(rotated <= bracket.upper * (1.0 + 1e-12) + 1e-12);
        prop_assert!(2.0 * rotated >= bracket.lower * (1.0 - 1e-12) - 1e-12);
    }

    #[test]
    fn walsh_parseval(seed in any::<u64>(), n in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let coeffs = wht_forward(&table).unwrap();
        let energy = table.iter().map(|v| v * v).sum::<f64>() / table.len() as f64;
        let spectral = coeffs.iter().map(|v| v * v).sum::<f64>();
        prop_assert!((energy - spectral).abs() <= 1e-10 * energy.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn multiplier_upper_is_the_two_summing_norm(seed in any::<u64>(), m in 1usize..3, n in 1usize..3, pi in 0usize..3) {
        let p = [1.0, 4.0 / 3.0, 2.0][pi];
        let space = Space::torus(FamilyKind::LambdaLE, m, n).unwrap();
        let len = space.family(1 << 20).unwrap().len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi: Vec<Complex64> = (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let spec = MultiplierSpec::new(space, xi.clone(), p, 1 << 20).unwrap();
        let b = multiplier_norm_bracket(&spec, 1, seed, &SearchConfig::default()).unwrap();
        prop_assert_eq!(b.bracket.upper, two_summing_norm(&xi, p).unwrap());
        prop_assert!(b.bracket.lower <= b.bracket.upper + 1e-9);
    }
}

#[test]
fn ksz_trials_do_not_depend_on_worker_count() {
    let coeffs = unit_coefficients(2, 2).unwrap();
    let run = |workers| par::with_workers(Some(workers), || ksz_trig_trial(2, 2, &coeffs, 50, 11, DEFAULT_GRID_CAP).unwrap());
    let one = run(1);
    let four = run(4);
    assert_eq!(one.mean_sup.to_bits(), four.mean_sup.to_bits());
    assert_eq!(one.mean_width.to_bits(), four.mean_width.to_bits());
}
