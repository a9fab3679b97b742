mod common;

use std::collections::BTreeSet;

use common::{big, bi, Big, RawSystem};
use klt_core::discrepancy::{
    classify, classify_klt, discrepancies, local_group_order, pullback_defect, BasketShape,
    Classification,
};
use klt_core::graph::{Arm, BoundaryIndex, DualGraph};
use klt_core::mmp::{enumerate_baskets, EnumerationBudget};
use klt_core::rational::rat;
use proptest::prelude::*;

fn marker() -> impl Strategy<Value = BoundaryIndex> {
    prop_oneof![Just(BoundaryIndex::TRIVIAL), (2u32..5).prop_map(BoundaryIndex::Finite)]
}

fn chain() -> impl Strategy<Value = DualGraph> {
    (prop::collection::vec(2u32..6, 1..7), marker(), marker())
        .prop_map(|(w, s, e)| DualGraph::chain_with_boundary(&w, s, e))
}

fn arm() -> impl Strategy<Value = Arm> {
    (prop::collection::vec(2u32..5, 0..3), marker())
        .prop_map(|(weights, marker)| Arm { weights, marker })
        .prop_filter("empty arms carry boundary", |a| !a.weights.is_empty() || !a.marker.is_trivial())
}

fn fork() -> impl Strategy<Value = DualGraph> {
    (2u32..5, arm(), arm(), arm()).prop_map(|(c, a, b, d)| DualGraph::fork(c, &[a, b, d]))
}

proptest! {
    #[test]
    fn chain_discrepancies_match_oracle(g in chain()) {
        let ours = discrepancies(&g).unwrap();
        let sys = RawSystem::from_graph(&g);
        let theirs = sys.discrepancies().unwrap();
        for (id, a) in &ours {
            prop_assert_eq!(&big(*a), &theirs[id.as_str()]);
        }
        prop_assert_eq!(big(pullback_defect(&g).unwrap()), sys.square(&theirs));
    }

    #[test]
    fn klt_chain_invariants(g in chain()) {
        let b = classify_klt(&g).unwrap();
        let BasketShape::Cyclic(t) = b.shape else { panic!("chain classified as fork") };
        prop_assert_eq!(b.r, rat(i128::from(t.n) * i128::from(t.m1) * i128::from(t.m2), 1));
        prop_assert_eq!(local_group_order(&b), b.r);
        let four_over_r = rat(4, 1) / b.r;
        prop_assert_eq!(b.delta, rat(b.e_sq.into(), 1) - four_over_r - b.pullback_defect);
        for a in b.discrepancies.values() {
            prop_assert!(*a > rat(-1, 1) && *a <= rat(0, 1));
        }
    }

    #[test]
    fn fork_classification_matches_oracle(g in fork()) {
        match classify(&g).unwrap() {
            Classification::Klt(b) => {
                let BasketShape::Platonic(p) = b.shape else { panic!("fork classified as chain") };
                prop_assert!(p.inverse_sum() > rat(1, 1));
                let br = p.branches.map(|x| (x.n, x.q, x.m));
                prop_assert_eq!(big(b.r), common::platonic_order(p.b, &br));
                let theirs = RawSystem::from_graph(&g).discrepancies().unwrap();
                for (id, a) in &b.discrepancies {
                    prop_assert_eq!(&big(*a), &theirs[id.as_str()]);
                    prop_assert!(*a > rat(-1, 1));
                }
            }
            Classification::NotKlt => {
                // Either semidefinite, or some log discrepancy reaches zero.
                let m = g.intersection_matrix();
                let minors_ok = klt_core::linalg::is_negative_definite(&m).unwrap();
                if minors_ok {
                    let theirs = RawSystem::from_graph(&g).discrepancies().unwrap();
                    prop_assert!(theirs.values().any(|a| *a <= bi(-1)));
                }
            }
        }
    }
}

#[test]
fn boundary_tests_include_coefficients() {
    let g = DualGraph::chain_with_boundary(&[2], BoundaryIndex::Finite(2), BoundaryIndex::TRIVIAL);
    let b = classify_klt(&g).unwrap();
    assert_eq!(b.threshold.min_log_discrepancy_excess, rat(1, 2));
    assert!(!b.is_epsilon_klt(rat(1, 2)));
    assert!(b.is_epsilon_klt(rat(1, 3)));
}

#[test]
fn enumerated_baskets_respect_bounds() {
    let eps = rat(1, 3);
    let e = enumerate_baskets(&EnumerationBudget::new(eps, 4, 4), &BTreeSet::from([2]));
    let mut deltas = Vec::new();
    for b in &e.baskets {
        assert!(klt_core::linalg::is_negative_definite(&b.graph.intersection_matrix()).unwrap());
        for a in b.discrepancies.values() {
            assert!(*a > eps - rat(1, 1) && *a <= rat(0, 1), "{}", b.key());
        }
        for v in b.graph.vertices() {
            if let Some(w) = v.kind.weight() {
                assert!(rat(w.into(), 1) <= rat(2, 1) / eps);
            }
        }
        deltas.push(b.delta);
    }
    let lo = deltas.iter().min().unwrap();
    let hi = deltas.iter().max().unwrap();
    println!("delta range over {} baskets: [{lo}, {hi}]", e.baskets.len());
    assert!(*lo >= rat(-6, 1) && *hi <= rat(6, 1));
}

#[test]
fn platonic_orders_are_integral_on_enumeration() {
    let e = enumerate_baskets(&EnumerationBudget::new(rat(1, 6), 6, 6), &BTreeSet::from([2, 3]));
    let forks: Vec<_> = e
        .baskets
        .iter()
        .filter(|b| matches!(b.shape, BasketShape::Platonic(_)))
        .collect();
    assert!(!forks.is_empty());
    let non_integral: Vec<String> = forks
        .iter()
        .filter(|b| !b.r.is_integer())
        .map(|b| format!("{} r={}", b.key(), b.r))
        .collect();
    println!("{} forks, {} with non-integral r", forks.len(), non_integral.len());
    assert!(non_integral.is_empty(), "{non_integral:?}");
}

#[test]
fn oracle_solver_sanity() {
    let sol = common::gauss_solve(
        vec![vec![bi(-3), bi(1)], vec![bi(1), bi(-2)]],
        vec![Big::new(3.into(), 2.into()), bi(0)],
    )
    .unwrap();
    assert_eq!(sol, vec![Big::new((-3).into(), 5.into()), Big::new((-3).into(), 10.into())]);
}
