//! Algebraic invariants of the matrix layer and the network semantics.

use bnctl::logic::{
    bits_of, column_of, dummy_matrix, pinning_equation_lhs, power_reducing_matrix, solve_pinning_equation, stp,
    swap_matrix, CanonicalVector, PinningSolveMode,
};
use bnctl::random::{random_bcn, random_graph};
use bnctl::structural::{check_structural_controllability, check_structural_controllability_dense};
use bnctl::{BooleanFunction, LogicalMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn logical(rows: usize, cols: usize) -> impl Strategy<Value = LogicalMatrix> {
    prop::collection::vec(0..rows, cols).prop_map(move |idx| LogicalMatrix::new(rows, idx).unwrap())
}

fn vector(dim: usize) -> impl Strategy<Value = LogicalMatrix> {
    (1..=dim).prop_map(move |i| CanonicalVector::new(dim, i).unwrap().to_matrix())
}

fn function(arity: usize) -> impl Strategy<Value = BooleanFunction> {
    prop::collection::vec(any::<bool>(), 1 << arity).prop_map(move |t| BooleanFunction::new(arity, t).unwrap())
}

proptest! {
    #[test]
    fn stp_is_associative(
        (a, b, c) in (1usize..5, 1usize..5, 1usize..5, 1usize..5, 1usize..5, 1usize..5)
            .prop_flat_map(|(r1, c1, r2, c2, r3, c3)| (logical(r1, c1), logical(r2, c2), logical(r3, c3)))
    ) {
        let left = stp(&stp(&a, &b).unwrap(), &c).unwrap();
        let right = stp(&a, &stp(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn swap_exchanges_factors(
        (x, y, u, v) in (1usize..7, 1usize..7).prop_flat_map(|(u, v)| (vector(u), vector(v), Just(u), Just(v)))
    ) {
        let w = swap_matrix(v, u).unwrap();
        let lhs = stp(&stp(&w, &x).unwrap(), &y).unwrap();
        prop_assert_eq!(lhs, stp(&y, &x).unwrap());
    }

    #[test]
    fn power_reduction((x, u) in (1usize..9).prop_flat_map(|u| (vector(u), Just(u)))) {
        let phi = power_reducing_matrix(u).unwrap();
        prop_assert_eq!(stp(&phi, &x).unwrap(), stp(&x, &x).unwrap());
    }

    #[test]
    fn dummy_drops_the_first_factor(x in vector(2), y in vector(2)) {
        let lhs = stp(&stp(&dummy_matrix(), &x).unwrap(), &y).unwrap();
        prop_assert_eq!(lhs, y);
    }

    #[test]
    fn structure_matrix_is_a_bijection(f in (0usize..5).prop_flat_map(function)) {
        let l = f.structure_matrix();
        prop_assert_eq!(&BooleanFunction::from_structure_matrix(&l).unwrap(), &f);
        for s in 0..1usize << f.arity() {
            let x = bits_of(f.arity(), s);
            let mut v = LogicalMatrix::new(1, vec![0]).unwrap();
            for &b in &x {
                v = stp(&v, &CanonicalVector::from_bool(b).to_matrix()).unwrap();
            }
            let out = stp(&l, &v).unwrap();
            prop_assert_eq!(out.col(0) == 0, f.eval(&x));
        }
    }

    #[test]
    fn pinning_equation_is_solved(
        (big_f, f) in (0usize..5).prop_flat_map(|d| (function(d), function(d))),
        search in any::<bool>()
    ) {
        let mode = if search { PinningSolveMode::Search } else { PinningSolveMode::Xor };
        let (op, g) = solve_pinning_equation(&big_f.structure_matrix(), &f.structure_matrix(), mode).unwrap();
        let lhs = pinning_equation_lhs(&op, &g, &f.structure_matrix()).unwrap();
        prop_assert_eq!(lhs, big_f.structure_matrix());
        if !search {
            prop_assert_eq!(op.operator_name(), Some("xor"));
        }
    }

    #[test]
    fn transition_matrix_matches_simulation(seed in any::<u64>(), n in 1usize..5, m in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_bcn(&mut rng, n, m, 3);
        let l = net.assr_transition(1 << 16).unwrap();
        for c in 0..1usize << (n + m) {
            let (u, x) = (bits_of(m, c >> n), bits_of(n, c & ((1 << n) - 1)));
            prop_assert_eq!(l.col(c), column_of(&net.step(&x, &u)));
        }
    }

    #[test]
    fn linear_and_dense_checks_agree(seed in any::<u64>(), n in 1usize..9, m in 0usize..4, p in 0.05f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, m, p);
        prop_assert_eq!(check_structural_controllability(&g).structurally_controllable, check_structural_controllability_dense(&g));
    }
}
