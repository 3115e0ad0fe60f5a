//! Property tests for the invariants of each module.

mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use congruence_lab::counting::{cauchy_schwarz_lower_bound, lambda, nu_histogram, NuOptions, PointSet};
use congruence_lab::experiments::{derive_seed, exponent_fit, sample_subset};
use congruence_lab::field::FieldParams;
use congruence_lab::fourier::{inverse_transform, parseval_defect, transform, ComplexGrid};
use congruence_lab::group::{enumerate_group, stab_exponent, GroupTable};
use congruence_lab::structure::{
    canonicalize, exponent_identity_check, shape_key, RootedTree, Simplex, SimplexStructure, StructureDoc,
};

fn small_params() -> impl Strategy<Value = FieldParams> {
    (prop::sample::select(vec![3u32, 5, 7]), 1usize..=2).prop_map(|(q, d)| FieldParams::new(q, d).unwrap())
}

fn tree_from_seed(seed: u64, max_simplices: usize, max_dim: usize) -> SimplexStructure {
    common::random_tree(&mut ChaCha8Rng::seed_from_u64(seed), max_simplices, max_dim)
}

/// The same tree with every vertex and simplex renamed and the simplices reversed.
fn relabel(s: &SimplexStructure) -> SimplexStructure {
    let simplices = s
        .simplices()
        .iter()
        .rev()
        .map(|x| Simplex::new(format!("T{}", x.id), x.vertices.iter().map(|v| format!("w_{v}"))))
        .collect();
    SimplexStructure::tree(simplices).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric_and_translation_invariant(p in small_params(), a in 0usize..49, b in 0usize..49, c in 0usize..49) {
        let (x, y, z) = (p.vector_at(a % p.size()), p.vector_at(b % p.size()), p.vector_at(c % p.size()));
        let dxy = p.distance(&x, &y).unwrap();
        prop_assert_eq!(dxy, p.distance(&y, &x).unwrap());
        prop_assert_eq!(dxy, p.distance(&p.add(&x, &z), &p.add(&y, &z)).unwrap());
        prop_assert_eq!(dxy, common::dist(p.q(), x.coords(), y.coords()));
    }

    #[test]
    fn rotations_preserve_distance(q in prop::sample::select(vec![3u32, 5, 7]), g in 0usize..64, a in 0usize..49, b in 0usize..49) {
        let p = FieldParams::new(q, 2).unwrap();
        let group = enumerate_group(p).unwrap();
        let theta = &group.elements()[g % group.len()];
        let (x, y) = (p.vector_at(a % p.size()), p.vector_at(b % p.size()));
        prop_assert_eq!(
            p.distance(&theta.apply(p, &x), &theta.apply(p, &y)).unwrap(),
            p.distance(&x, &y).unwrap()
        );
    }

    #[test]
    fn group_cache_round_trips(q in prop::sample::select(vec![3u32, 5, 7, 11]), d in 1usize..=2) {
        let p = FieldParams::new(q, d).unwrap();
        let g = enumerate_group(p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("o.bin");
        g.write_cache(&path).unwrap();
        let back = GroupTable::read_cache(&path, p).unwrap();
        prop_assert_eq!(back.encodings(), g.encodings());
        prop_assert!(GroupTable::read_cache(&path, FieldParams::new(13, d).unwrap()).is_err());
    }

    #[test]
    fn stabilizer_exponents_shrink_with_dimension(d in 2usize..8, n in 1usize..8) {
        prop_assert!(stab_exponent(n + 1, d) <= stab_exponent(n, d));
        prop_assert!(exponent_identity_check(d, n, n).unwrap().balanced);
    }

    #[test]
    fn parseval_and_round_trip(p in small_params(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values: Vec<Complex64> = (0..p.size())
            .map(|_| Complex64::new(rand::Rng::gen_range(&mut rng, -3.0..3.0), rand::Rng::gen_range(&mut rng, -3.0..3.0)))
            .collect();
        let f = ComplexGrid::from_values(p, values).unwrap();
        let scale = f.sum_sq().max(1.0);
        prop_assert!(parseval_defect(&f) <= 1e-9 * scale);
        prop_assert!(inverse_transform(&transform(&f)).max_abs_diff(&f) <= 1e-9 * scale.sqrt());
    }

    #[test]
    fn transform_is_linear(p in small_params(), s1 in any::<u64>(), s2 in any::<u64>(), c in -4.0f64..4.0) {
        let grid = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..p.size()).map(|_| rand::Rng::gen_range(&mut rng, 0.0..5.0)).collect();
            v
        };
        let (a, b) = (grid(s1), grid(s2));
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + c * y).collect();
        let ta = transform(&ComplexGrid::from_real(p, &a).unwrap());
        let tb = transform(&ComplexGrid::from_real(p, &b).unwrap());
        let ts = transform(&ComplexGrid::from_real(p, &sum).unwrap());
        for m in 0..p.size() {
            prop_assert!((ts.get(m) - ta.get(m) - tb.get(m) * c).norm() <= 1e-9);
        }
    }

    #[test]
    fn structure_documents_round_trip(seed in any::<u64>()) {
        let s = tree_from_seed(seed, 6, 4);
        prop_assert!(s.validate().is_ok());
        let doc = s.to_doc();
        let back = StructureDoc::from_json(&doc.to_json().unwrap()).unwrap().structure().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn shape_keys_ignore_labels(seed in any::<u64>()) {
        let s = tree_from_seed(seed, 5, 3);
        prop_assert_eq!(shape_key(&s), shape_key(&relabel(&s)));
    }

    #[test]
    fn class_exponent_is_additive(seed in any::<u64>(), d in 2usize..6) {
        let s = tree_from_seed(seed, 6, 4);
        let sum: usize = s.simplices().iter().map(|x| congruence_lab::structure::c_simplex(x.dim(), d)).sum();
        prop_assert_eq!(s.c(d), sum);
        for k in 1..4 {
            prop_assert!(s.n_k(k + 1) <= s.n_k(k) + 1);
            prop_assert!(s.n_k(k) >= k);
        }
    }

    #[test]
    fn canonical_forms_have_one_big_simplex(seed in any::<u64>(), k in 1usize..=2) {
        let s = tree_from_seed(seed, 5, 4);
        let nk = s.n_k(k);
        for t in canonicalize(&RootedTree::from_structure(s.clone()).unwrap(), k).unwrap() {
            let big: Vec<usize> = t.structure().dims().into_iter().filter(|&n| n > k).collect();
            prop_assert!(big.len() <= 1);
            prop_assert_eq!(big.first().copied().unwrap_or(k), nk);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn histogram_sandwich(seed in any::<u64>(), q in prop::sample::select(vec![3u32, 5]), size in 0usize..9) {
        let p = FieldParams::new(q, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_tree(&mut rng, 2, 2);
        let e = PointSet::from_indices(p, common::random_points(&mut rng, q, 2, size)).unwrap();
        let h = nu_histogram(&e, &s, NuOptions::default()).unwrap();
        prop_assert_eq!(h.total(), (e.len() as u128).pow(s.vertex_count() as u32));
        prop_assert!(cauchy_schwarz_lower_bound(&h) <= Ratio::from_integer(h.delta() as u128));
        prop_assert!(h.delta() as u128 <= (q as u128).pow(s.edges().len() as u32));
        let nd = nu_histogram(&e, &s, NuOptions { nondegenerate_only: true, track_degenerate: true }).unwrap();
        prop_assert!(nd.delta() <= h.delta());
        prop_assert_eq!(nd.total() + nd.degenerate_maps().unwrap() as u128, h.total());
    }

    #[test]
    fn lambda_mass_is_the_pair_count(seed in any::<u64>(), q in prop::sample::select(vec![3u32, 5, 7]), g in 0usize..64) {
        let p = FieldParams::new(q, 2).unwrap();
        let group = enumerate_group(p).unwrap();
        let theta = &group.elements()[g % group.len()];
        let e = congruence_lab::experiments::sample_density(p, 0.5, seed);
        prop_assert_eq!(lambda(&e, theta).unwrap().l1(), (e.len() * e.len()) as u128);
    }

    #[test]
    fn subsets_are_reproducible_and_bounded(seed in any::<u64>(), num in 1i64..8) {
        let p = FieldParams::new(5, 2).unwrap();
        let s = Ratio::new(num, 4);
        let a = sample_subset(p, s, seed).unwrap();
        prop_assert_eq!(&a, &sample_subset(p, s, seed).unwrap());
        prop_assert!(a.len() <= p.size());
        prop_assert_ne!(derive_seed(&[seed, 1]), derive_seed(&[seed, 2]));
    }

    #[test]
    fn fits_recover_exact_power_laws(e in -3.0f64..3.0, c in 0.1f64..10.0) {
        let m: BTreeMap<u32, f64> = [3u32, 5, 7, 11].iter().map(|&q| (q, c * (q as f64).powf(e))).collect();
        let fit = exponent_fit(&m).unwrap();
        prop_assert!((fit.slope - e).abs() <= 1e-9);
        prop_assert!(fit.residual <= 1e-9);
    }
}
