//! Small reference systems with known behaviour, used by the tests, the
//! acceptance suite and the documentation.

use crate::coarse::Partition;
use crate::netscale::WeightedGraph;
use crate::phiid::FactorizedSystem;
use crate::prob::{ProbVector, TransitionMatrix};
use crate::scalar::Scalar;

fn tpm<T: Scalar>(rows: &[&[f64]]) -> TransitionMatrix<T> {
    TransitionMatrix::new(rows.iter().map(|r| r.iter().map(|&x| T::lit(x)).collect()).collect())
        .expect("reference matrix is stochastic")
}

/// Three states mixing uniformly among themselves plus one fixed point:
/// rows 0..=2 are `(1/3, 1/3, 1/3, 0)`, row 3 is `(0, 0, 0, 1)`.
pub fn degenerate_four_state<T: Scalar>() -> TransitionMatrix<T> {
    let third = T::one() / T::lit(3.0);
    let z = T::zero();
    let mixing = vec![third, third, third, z];
    TransitionMatrix::new(vec![mixing.clone(), mixing.clone(), mixing, vec![z, z, z, T::one()]])
        .expect("reference matrix is stochastic")
}

/// A four-state chain with incongruous transitions under [`incongruous_partition`]
/// for both the uniform and the stationary prior.
///
/// Every entry is positive, so the chain is ergodic and every transition
/// has a finite local value at both scales.
pub fn incongruous_four_state<T: Scalar>() -> TransitionMatrix<T> {
    tpm(&[&[0.30, 0.30, 0.25, 0.15], &[0.25, 0.05, 0.40, 0.30], &[0.10, 0.20, 0.35, 0.35], &[0.25, 0.40, 0.05, 0.30]])
}

/// `{0, 1}`, `{2, 3}`.
pub fn incongruous_partition() -> Partition {
    Partition::new(vec![0, 0, 1, 1]).expect("valid partition")
}

fn binary_pair<T: Scalar>(rows: &[&[f64]], prior: Option<&[f64]>) -> FactorizedSystem<T> {
    let w = tpm::<T>(rows);
    let prior = match prior {
        Some(p) => ProbVector::new(p.iter().map(|&x| T::lit(x)).collect()).expect("valid prior"),
        None => ProbVector::uniform(w.n()).expect("non-empty"),
    };
    FactorizedSystem::new((2, 2), w, prior).expect("2x2 system")
}

/// Two binary elements that each copy their own past; uniform prior.
pub fn independent_copy<T: Scalar>() -> FactorizedSystem<T> {
    binary_pair(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]], None)
}

/// Two binary elements whose next state ignores the past; uniform prior.
pub fn memoryless_pair<T: Scalar>() -> FactorizedSystem<T> {
    let row: &[f64] = &[0.1, 0.2, 0.3, 0.4];
    binary_pair(&[row, row, row, row], None)
}

/// `(a1, a2) -> (a1 xor a2, a1)` with a uniform prior.
pub fn xor_pair<T: Scalar>() -> FactorizedSystem<T> {
    binary_pair(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0], &[0.0, 1.0, 0.0, 0.0]], None)
}

/// A two-element binary system with positive expected causal decoupling and
/// transitions whose local decoupling is negative; stationary prior.
pub fn flickering_synergy<T: Scalar>() -> FactorizedSystem<T> {
    let w = tpm::<T>(&[
        &[0.35, 0.30, 0.30, 0.05],
        &[0.20, 0.05, 0.35, 0.40],
        &[0.15, 0.40, 0.15, 0.30],
        &[0.10, 0.20, 0.30, 0.40],
    ]);
    FactorizedSystem::with_policy((2, 2), w, crate::prob::Prior::Stationary).expect("2x2 system")
}

/// Two `k`-cliques joined by the single edge `(k - 1, k)`; unit weights.
pub fn barbell<T: Scalar>(k: usize) -> WeightedGraph<T> {
    let mut g = WeightedGraph::with_nodes(2 * k);
    for base in [0, k] {
        for a in base..base + k {
            for b in a + 1..base + k {
                g.add_undirected(a, b, T::one()).expect("in range");
            }
        }
    }
    g.add_undirected(k - 1, k, T::one()).expect("in range");
    g
}

/// Undirected edges `(a, b, weight)` of a 12-node graph with planted
/// communities `0..6` and `6..12`, sampled once with within/between edge
/// probabilities 0.6 / 0.12 and integer weights in `1..=3`.
pub const PLANTED_PARTITION_12: &[(usize, usize, f64)] = &[
    (0, 1, 3.0),
    (0, 2, 2.0),
    (0, 3, 1.0),
    (0, 5, 3.0),
    (0, 6, 1.0),
    (1, 2, 2.0),
    (1, 10, 1.0),
    (2, 3, 3.0),
    (3, 4, 2.0),
    (3, 5, 1.0),
    (6, 7, 1.0),
    (6, 8, 2.0),
    (6, 9, 1.0),
    (6, 10, 2.0),
    (7, 10, 3.0),
    (7, 11, 2.0),
    (8, 9, 1.0),
    (8, 11, 2.0),
    (9, 11, 1.0),
    (10, 11, 3.0),
];

pub fn planted_partition_12<T: Scalar>() -> WeightedGraph<T> {
    let mut g = WeightedGraph::with_nodes(12);
    for &(a, b, w) in PLANTED_PARTITION_12 {
        g.add_undirected(a, b, T::lit(w)).expect("in range");
    }
    g
}

/// The planted communities of [`planted_partition_12`].
pub fn planted_communities_12() -> Vec<usize> {
    (0..12).map(|i| i / 6).collect()
}
