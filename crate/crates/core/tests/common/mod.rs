//! Shared helpers for the integration suites: seeded random instances,
//! permutation tooling, and the LP-based fair-flow oracle.
#![allow(dead_code)]

pub mod simplex;

use fairflow::edgefair::MechanismOutcome;
use fairflow::problem::{Capacity, Edge, Node, Problem};
use fairflow::rational::{rat, rint, Rat};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn node(id: String, peak: Rat) -> Node {
    Node { id, peak }
}

fn all_pairs(ns: usize, nd: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(ns * nd);
    for i in 0..ns {
        for j in 0..nd {
            v.push((i, j));
        }
    }
    v
}

/// Up to 3+3 nodes, integer peaks and caps bounded by 4, at least one edge.
pub fn small_instance(rng: &mut ChaCha8Rng) -> Problem {
    let ns = rng.random_range(1..=3);
    let nd = rng.random_range(1..=3);
    let suppliers: Vec<Node> = (0..ns)
        .map(|i| node(format!("s{}", i + 1), rint(rng.random_range(0..=4))))
        .collect();
    let demanders: Vec<Node> = (0..nd)
        .map(|j| node(format!("d{}", j + 1), rint(rng.random_range(0..=4))))
        .collect();
    let mut pairs = all_pairs(ns, nd);
    pairs.shuffle(rng);
    let k = rng.random_range(1..=pairs.len());
    let edges: Vec<Edge> = pairs[..k]
        .iter()
        .map(|&(i, j)| Edge {
            from: suppliers[i].id.clone(),
            to: demanders[j].id.clone(),
            cap: if rng.random_bool(0.5) {
                Capacity::Unbounded
            } else {
                Capacity::Finite(rint(rng.random_range(0..=4)))
            },
        })
        .collect();
    Problem::new(suppliers, demanders, edges).unwrap()
}

/// Up to 8+8 nodes and 20 edges, rational peaks and caps bounded by 12.
pub fn mid_instance(rng: &mut ChaCha8Rng) -> Problem {
    let value = |rng: &mut ChaCha8Rng, top: i64| {
        let den = rng.random_range(1..=4i64);
        rat(rng.random_range(0..=top * den), den)
    };
    let ns = rng.random_range(1..=8);
    let nd = rng.random_range(1..=8);
    let suppliers: Vec<Node> = (0..ns)
        .map(|i| {
            let v = value(rng, 12);
            node(format!("s{}", i + 1), v)
        })
        .collect();
    let demanders: Vec<Node> = (0..nd)
        .map(|j| {
            let v = value(rng, 12);
            node(format!("d{}", j + 1), v)
        })
        .collect();
    let mut pairs = all_pairs(ns, nd);
    pairs.shuffle(rng);
    let k = rng.random_range(1..=pairs.len().min(20));
    let edges: Vec<Edge> = pairs[..k]
        .iter()
        .map(|&(i, j)| Edge {
            from: suppliers[i].id.clone(),
            to: demanders[j].id.clone(),
            cap: if rng.random_bool(0.5) {
                Capacity::Unbounded
            } else {
                Capacity::Finite(value(rng, 12))
            },
        })
        .collect();
    Problem::new(suppliers, demanders, edges).unwrap()
}

pub fn corpus_small(n: usize, seed: u64) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| small_instance(&mut rng)).collect()
}

pub fn corpus_mid(n: usize, seed: u64) -> Vec<Problem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| mid_instance(&mut rng)).collect()
}

/// Same instance with suppliers, demanders, and edges declared in a random
/// order; ids travel with their nodes.
pub fn permuted(p: &Problem, rng: &mut ChaCha8Rng) -> Problem {
    let mut suppliers = p.suppliers.clone();
    let mut demanders = p.demanders.clone();
    let mut edges = p.edges.clone();
    suppliers.shuffle(rng);
    demanders.shuffle(rng);
    edges.shuffle(rng);
    Problem::new(suppliers, demanders, edges).unwrap()
}

/// Outcomes agree once ids are matched up, regardless of declaration order.
pub fn assert_same_outcome_by_id(
    p: &Problem,
    a: &MechanismOutcome,
    q: &Problem,
    b: &MechanismOutcome,
) {
    for (i, s) in p.suppliers.iter().enumerate() {
        let qi = q.supplier_index(&s.id).unwrap();
        assert_eq!(
            a.allocation.supply[i], b.allocation.supply[qi],
            "supplier {} differs under reordering",
            s.id
        );
    }
    for (j, d) in p.demanders.iter().enumerate() {
        let qj = q.demander_index(&d.id).unwrap();
        assert_eq!(
            a.allocation.demand[j], b.allocation.demand[qj],
            "demander {} differs under reordering",
            d.id
        );
    }
    for (e, edge) in p.edges.iter().enumerate() {
        let qe = q.edge_index(&edge.from, &edge.to).unwrap();
        assert_eq!(
            a.flow.z[e], b.flow.z[qe],
            "edge ({}, {}) differs under reordering",
            edge.from, edge.to
        );
    }
}
