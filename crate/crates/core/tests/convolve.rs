mod common;

use agc::{
    convolve_k, frequency_response, smoothness, smoothness_edge_sum, FeatureMatrix, FilterOrder,
    IncrementalFilter, PropagationOperator, SparseGraph,
};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

use common::*;

fn filtered_column(op: &PropagationOperator<'_>, f: &[f64], k: usize) -> Vec<f64> {
    let x = FeatureMatrix::from_columns(&[f.to_vec()]).unwrap();
    convolve_k(op, &x, FilterOrder(k)).unwrap().column(0)
}

#[test]
fn response_examples() {
    assert_eq!(frequency_response(0.0, FilterOrder(17)).unwrap(), 1.0);
    assert_eq!(frequency_response(2.0, FilterOrder(1)).unwrap(), 0.0);
    assert_eq!(frequency_response(1.0, FilterOrder(2)).unwrap(), 0.25);
    assert!(frequency_response(2.5, FilterOrder(1)).is_err());
    assert!(frequency_response(-0.1, FilterOrder(1)).is_err());
}

#[test]
fn thirty_node_graph_at_order_seven_matches_spectral_filter() {
    let mut r = rng(30);
    let g = connected_graph(&mut r, 30, 0.15);
    let x = random_matrix(&mut r, 30, 5);
    let op = PropagationOperator::new(&g);
    let got = to_dense(&convolve_k(&op, &x, FilterOrder(7)).unwrap());
    assert!(rel_frobenius(&got, &spectral_filter(&g, &x, 7)) <= 1e-8);
}

#[test]
fn eigenvector_smoothness_is_its_eigenvalue() {
    let mut r = rng(3);
    let g = connected_graph(&mut r, 25, 0.2);
    let op = PropagationOperator::new(&g);
    let eig = SymmetricEigen::new(dense_laplacian(&g));
    for q in 0..25 {
        let u: Vec<f64> = eig.eigenvectors.column(q).iter().copied().collect();
        let s = smoothness(&op, &u).unwrap();
        assert!(
            (s - eig.eigenvalues[q]).abs() < 1e-10,
            "q={q}: {s} vs {}",
            eig.eigenvalues[q]
        );
    }
}

#[test]
fn dimension_mismatch_rejected() {
    let g = SparseGraph::empty(3);
    let op = PropagationOperator::new(&g);
    let x = FeatureMatrix::zeros(4, 2);
    assert!(matches!(
        convolve_k(&op, &x, FilterOrder(1)),
        Err(agc::AgcError::Validation(_))
    ));
    assert!(smoothness(&op, &[1.0, 2.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn smoothness_never_increases_with_order(seed in any::<u64>(), n in 2usize..80, p in 0.0f64..0.3) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, p);
        let op = PropagationOperator::new(&g);
        let f = random_matrix(&mut r, n, 1).column(0);
        let mut prev = f64::INFINITY;
        let mut x = FeatureMatrix::from_columns(&[f]).unwrap();
        for k in 0..=20 {
            let s = smoothness(&op, &x.column(0)).unwrap();
            prop_assert!((0.0..=2.0 + 1e-12).contains(&s));
            prop_assert!(s <= prev + 1e-9, "k={k}: {s} > {prev}");
            prev = s;
            x = op.half_step(&x);
        }
    }

    #[test]
    fn iterative_filter_matches_spectral(seed in any::<u64>(), n in 2usize..50, p in 0.0f64..0.4, k in 0usize..=20) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, p);
        let x = random_matrix(&mut r, n, 3);
        let op = PropagationOperator::new(&g);
        let got = to_dense(&convolve_k(&op, &x, FilterOrder(k)).unwrap());
        prop_assert!(rel_frobenius(&got, &spectral_filter(&g, &x, k)) <= 1e-8);
    }

    #[test]
    fn filter_is_linear(seed in any::<u64>(), n in 2usize..40, k in 0usize..12, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.2);
        let op = PropagationOperator::new(&g);
        let x = random_matrix(&mut r, n, 2);
        let y = random_matrix(&mut r, n, 2);
        let combo: Vec<f64> = x.as_slice().iter().zip(y.as_slice()).map(|(p, q)| a * p + b * q).collect();
        let lhs = convolve_k(&op, &FeatureMatrix::new(n, 2, combo).unwrap(), FilterOrder(k)).unwrap();
        let fx = convolve_k(&op, &x, FilterOrder(k)).unwrap();
        let fy = convolve_k(&op, &y, FilterOrder(k)).unwrap();
        for i in 0..n * 2 {
            let rhs = a * fx.as_slice()[i] + b * fy.as_slice()[i];
            prop_assert!((lhs.as_slice()[i] - rhs).abs() <= 1e-10);
        }
    }

    #[test]
    fn smoothness_is_scale_invariant(seed in any::<u64>(), n in 2usize..60, beta in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.2);
        let op = PropagationOperator::new(&g);
        let f = random_matrix(&mut r, n, 1).column(0);
        let scaled: Vec<f64> = f.iter().map(|v| beta * v).collect();
        let (s, t) = (smoothness(&op, &f).unwrap(), smoothness(&op, &scaled).unwrap());
        prop_assert!((s - t).abs() <= 1e-12, "{s} vs {t}");
    }

    #[test]
    fn quadratic_and_edge_forms_agree(seed in any::<u64>(), n in 2usize..60, p in 0.0f64..0.4) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, p);
        let op = PropagationOperator::new(&g);
        let f = random_matrix(&mut r, n, 1).column(0);
        let (q, e) = (smoothness(&op, &f).unwrap(), smoothness_edge_sum(&op, &f).unwrap());
        prop_assert!((q - e).abs() <= 1e-10, "{q} vs {e}");
    }

    #[test]
    fn constant_mode_is_perfectly_smooth(seed in any::<u64>(), n in 2usize..80, p in 0.0f64..0.3) {
        let g = connected_graph(&mut rng(seed), n, p);
        let op = PropagationOperator::new(&g);
        let f = g.degree_vector().sqrt();
        prop_assert!(smoothness(&op, &f).unwrap() <= 1e-12);
    }

    #[test]
    fn incremental_filter_tracks_from_scratch(seed in any::<u64>(), n in 2usize..40, steps in 1usize..25) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.15);
        let op = PropagationOperator::new(&g);
        let x = random_matrix(&mut r, n, 3);
        let mut inc = IncrementalFilter::new(&op, x.clone()).unwrap();
        for k in 1..=steps {
            let step = inc.advance().clone();
            prop_assert_eq!(inc.order(), FilterOrder(k));
            prop_assert_eq!(&step, &convolve_k(&op, &x, FilterOrder(k)).unwrap());
        }
    }

    #[test]
    fn single_column_filter_is_columnwise(seed in any::<u64>(), n in 2usize..30, k in 0usize..10) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, 0.2);
        let op = PropagationOperator::new(&g);
        let x = random_matrix(&mut r, n, 3);
        let all = convolve_k(&op, &x, FilterOrder(k)).unwrap();
        for j in 0..3 {
            prop_assert_eq!(filtered_column(&op, &x.column(j), k), all.column(j));
        }
    }
}
