use flicker_core::coarse::{classify_transitions, effectiveness, macro_tpm, partition_search_with};
use flicker_core::netscale::{label_propagation, network_emergence, CommunitySource};
use flicker_core::phiid::{PhiSolver, Realization};
use flicker_core::prob::{self, excess_entropy, expected_mi, local_excess_entropy, local_mi, stationary};
use flicker_core::walker::{self, AnnotationContext};
use flicker_core::{
    CommunityAssignment, FactorizedSystem, JointDist, Partition, Prior, ProbVector, SearchMode, TransitionClass,
    TransitionMatrix, WeightedGraph, Weighting,
};
use proptest::prelude::*;

fn normalize(w: &[u32]) -> Option<Vec<f64>> {
    let total: u32 = w.iter().sum();
    (total > 0).then(|| w.iter().map(|&x| x as f64 / total as f64).collect())
}

fn joint_dist() -> impl Strategy<Value = JointDist<f64>> {
    (1usize..=8, 1usize..=8)
        .prop_flat_map(|(r, c)| (Just(r), Just(c), prop::collection::vec(0u32..=12, r * c)))
        .prop_filter_map("all-zero table", |(r, c, w)| JointDist::from_flat(r, c, normalize(&w)?).ok())
}

/// Row-stochastic matrix; `min` = 1 gives a strictly positive chain.
fn tpm(n: std::ops::RangeInclusive<usize>, min: u32) -> impl Strategy<Value = TransitionMatrix<f64>> {
    n.prop_flat_map(move |n| prop::collection::vec(prop::collection::vec(min..=20u32, n), n)).prop_filter_map(
        "zero row",
        |rows| {
            let rows: Option<Vec<Vec<f64>>> = rows.iter().map(|r| normalize(r)).collect();
            TransitionMatrix::new(rows?).ok()
        },
    )
}

fn tpm_with_partition(min: u32) -> impl Strategy<Value = (TransitionMatrix<f64>, Partition)> {
    tpm(2..=7, min).prop_flat_map(|w| {
        let n = w.n();
        (Just(w), prop::collection::vec(0..n, n)).prop_map(|(w, raw)| {
            let mut seen = Vec::new();
            let canon: Vec<usize> = raw
                .iter()
                .map(|x| match seen.iter().position(|s| s == x) {
                    Some(k) => k,
                    None => {
                        seen.push(*x);
                        seen.len() - 1
                    }
                })
                .collect();
            (w, Partition::new(canon).unwrap())
        })
    })
}

/// Two-element system with a strictly positive matrix and prior.
fn factorized() -> impl Strategy<Value = FactorizedSystem<f64>> {
    (2usize..=3, 2usize..=3)
        .prop_flat_map(|(a, b)| {
            let n = a * b;
            (
                Just((a, b)),
                prop::collection::vec(prop::collection::vec(1u32..=20, n), n),
                prop::collection::vec(1u32..=20, n),
            )
        })
        .prop_map(|(cards, rows, prior)| {
            let rows = rows.iter().map(|r| normalize(r).unwrap()).collect();
            let w = TransitionMatrix::new(rows).unwrap();
            FactorizedSystem::new(cards, w, ProbVector::new(normalize(&prior).unwrap()).unwrap()).unwrap()
        })
}

proptest! {
    #[test]
    fn local_mi_averages_to_expected_mi(j in joint_dist()) {
        let mut mean = 0.0;
        for (x, y, p) in j.cells() {
            if p > 0.0 {
                mean += p * local_mi(&j, x, y).unwrap();
            }
        }
        prop_assert!((mean - expected_mi(&j)).abs() < 1e-9);
    }

    #[test]
    fn local_mi_is_negative_exactly_below_independence(j in joint_dist()) {
        for (x, y, p) in j.cells() {
            let (px, py) = (j.row_marginal().get(x), j.col_marginal().get(y));
            if px == 0.0 || py == 0.0 {
                prop_assert!(local_mi(&j, x, y).is_err());
                continue;
            }
            let v = local_mi(&j, x, y).unwrap();
            prop_assert_eq!(v < 0.0, p < px * py);
            prop_assert_eq!(v > 0.0, p > px * py);
        }
    }

    #[test]
    fn mutual_information_is_symmetric(j in joint_dist()) {
        let t = j.transpose();
        prop_assert!((expected_mi(&j) - expected_mi(&t)).abs() < 1e-12);
        for (x, y, p) in j.cells() {
            if p > 0.0 {
                prop_assert_eq!(local_mi(&j, x, y).unwrap(), local_mi(&t, y, x).unwrap());
            }
        }
    }

    #[test]
    fn stationary_distribution_is_invariant(w in tpm(1..=8, 1)) {
        let pi = stationary(&w).unwrap();
        let next = w.propagate(&pi).unwrap();
        let l1: f64 = pi.probs().iter().zip(next.probs()).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(l1 < 1e-8);
    }

    #[test]
    fn excess_entropy_is_bounded(w in tpm(1..=8, 0), prior in prop::collection::vec(0u32..=9, 8)) {
        let n = w.n();
        let Some(p) = normalize(&prior[..n]) else { return Ok(()) };
        let p = ProbVector::new(p).unwrap();
        let ee = excess_entropy(&w, &p).unwrap();
        prop_assert!(ee >= -1e-12);
        prop_assert!(ee <= prob::entropy(&p) + 1e-9);
        prop_assert!(ee <= (n as f64).log2() + 1e-9);
    }

    #[test]
    fn excess_entropy_is_mean_of_local_values(w in tpm(1..=8, 0)) {
        let pi = stationary(&w).unwrap();
        let mut mean = 0.0;
        for i in 0..w.n() {
            for j in 0..w.n() {
                let p = pi.get(i) * w.get(i, j);
                if p > 0.0 {
                    mean += p * local_excess_entropy(&w, &pi, i, j).unwrap();
                }
            }
        }
        prop_assert!((mean - excess_entropy(&w, &pi).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn effectiveness_stays_in_unit_interval(w in tpm(2..=8, 0)) {
        let e = effectiveness(&w).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
    }

    #[test]
    fn permutations_are_fully_effective(perm in (2usize..=8).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle())) {
        let w = TransitionMatrix::<f64>::permutation(&perm).unwrap();
        prop_assert!((effectiveness(&w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lumped_matrices_are_stochastic((w, p) in tpm_with_partition(0)) {
        for weighting in [Weighting::UniformWithinGroup, Weighting::StationaryWithinGroup] {
            let m = macro_tpm(&w, &p, weighting).unwrap();
            prop_assert_eq!(m.tpm.n(), p.n_macro());
            for row in m.tpm.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn identity_partition_never_incongruous(w in tpm(1..=8, 0)) {
        let m = macro_tpm(&w, &Partition::identity(w.n()).unwrap(), Weighting::UniformWithinGroup).unwrap();
        for prior in [Prior::Uniform, Prior::Stationary] {
            let c = classify_transitions(&w, &m, prior).unwrap();
            prop_assert_eq!(c.counts.incongruous, 0);
            prop_assert_eq!(c.counts.anti_incongruous, 0);
            prop_assert_eq!(c.incongruity_fraction, 0.0);
        }
    }

    #[test]
    fn classification_matches_signs((w, p) in tpm_with_partition(1)) {
        let m = macro_tpm(&w, &p, Weighting::UniformWithinGroup).unwrap();
        let c = classify_transitions(&w, &m, Prior::Uniform).unwrap();
        prop_assert_eq!(c.counts.total(), c.transitions.len());
        for t in &c.transitions {
            if t.class == TransitionClass::Incongruous {
                prop_assert!(t.e_micro.unwrap() > 0.0 && t.e_macro.unwrap() < 0.0);
            }
        }
        let (inc, ci) = (c.counts.incongruous, c.counts.congruent_informative);
        if inc + ci > 0 {
            prop_assert_eq!(c.incongruity_fraction, inc as f64 / (inc + ci) as f64);
        }
    }

    #[test]
    fn exhaustive_search_is_schedule_independent(w in tpm(2..=6, 0)) {
        let par = partition_search_with(&w, SearchMode::Exhaustive, true).unwrap();
        let seq = partition_search_with(&w, SearchMode::Exhaustive, false).unwrap();
        prop_assert_eq!(&par, &seq);
        let gpar = partition_search_with(&w, SearchMode::Greedy, true).unwrap();
        let gseq = partition_search_with(&w, SearchMode::Greedy, false).unwrap();
        prop_assert_eq!(&gpar, &gseq);
        prop_assert!(gpar.effectiveness <= par.effectiveness + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn local_atoms_sum_to_local_excess_entropy(sys in factorized()) {
        let solver = PhiSolver::new(&sys);
        for (r, _) in solver.realizations() {
            let table = solver.local(&r).unwrap();
            let a = sys.joint_index(r.from.0, r.from.1);
            let b = sys.joint_index(r.to.0, r.to.1);
            let e = local_excess_entropy(sys.tpm(), sys.prior(), a, b).unwrap();
            prop_assert!((table.total() - e).abs() < 1e-9);
        }
        let expected = solver.expected().unwrap();
        let ee = excess_entropy(sys.tpm(), sys.prior()).unwrap();
        prop_assert!((expected.total() - ee).abs() < 1e-9);
    }

    #[test]
    fn expected_atoms_are_means_of_local_atoms(sys in factorized()) {
        let solver = PhiSolver::new(&sys);
        let expected = solver.expected().unwrap();
        let mut mean = vec![0.0; expected.values().len()];
        for (r, p) in solver.realizations() {
            for (m, v) in mean.iter_mut().zip(solver.local(&r).unwrap().values()) {
                *m += p * v;
            }
        }
        for (m, e) in mean.iter().zip(expected.values()) {
            prop_assert!((m - e).abs() < 1e-9);
        }
    }

    #[test]
    fn realizations_cover_the_support(sys in factorized()) {
        let solver = PhiSolver::new(&sys);
        let total: f64 = solver.realizations().iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let (n1, n2) = sys.cards();
        prop_assert!(solver.local(&Realization::new((n1, 0), (0, n2 - 1))).is_err());
    }

    #[test]
    fn flags_are_sound((w, p) in tpm_with_partition(0), seed in any::<u64>()) {
        let m = macro_tpm(&w, &p, Weighting::UniformWithinGroup).unwrap();
        let ctx = AnnotationContext { macro_scale: Some(&m), factorized: None, prior: Prior::Uniform };
        let trace = walker::walk(&w, &walker::Start::Fixed(0), 200, seed, &ctx).unwrap();
        prop_assert_eq!(trace.steps.len(), 200);
        for s in &trace.steps {
            prop_assert!(w.get(s.from, s.to) > 0.0);
            if s.flicker() {
                prop_assert!(s.e_micro.unwrap() > 0.0 && s.e_macro.unwrap() < 0.0);
            }
        }
        let again = walker::walk(&w, &walker::Start::Fixed(0), 200, seed, &ctx).unwrap();
        prop_assert_eq!(trace, again);
    }

    #[test]
    fn label_propagation_is_reproducible(
        edges in prop::collection::vec((0usize..10, 0usize..10, 1u32..=3), 1..30),
        seed in any::<u64>(),
    ) {
        let mut g = WeightedGraph::<f64>::with_nodes(10);
        for &(a, b, w) in &edges {
            g.add_undirected(a, b, w as f64).unwrap();
        }
        let c1 = label_propagation(&g, seed).unwrap();
        let c2 = label_propagation(&g, seed).unwrap();
        prop_assert_eq!(&c1, &c2);
        // canonical: first appearance order
        let mut next = 0;
        for &id in c1.communities() {
            prop_assert!(id <= next);
            if id == next {
                next += 1;
            }
        }
    }

    #[test]
    fn edge_class_fractions_sum_to_one(
        edges in prop::collection::vec((0usize..8, 0usize..8, 1u32..=3), 1..25),
        ids in prop::collection::vec(0usize..3, 8),
    ) {
        let mut g = WeightedGraph::<f64>::with_nodes(8);
        for &(a, b, w) in &edges {
            g.add_undirected(a, b, w as f64).unwrap();
        }
        let c = CommunityAssignment::new(&ids, CommunitySource::File).unwrap();
        let r = network_emergence(&g, &c, Prior::Uniform).unwrap();
        let s = r.edge_classes;
        if let (Some(a), Some(b)) = (s.informative_within_fraction, s.informative_between_fraction) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
        if let (Some(a), Some(b)) = (s.misinformative_within_fraction, s.misinformative_between_fraction) {
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
        let identity = CommunityAssignment::new(&(0..8).collect::<Vec<_>>(), CommunitySource::File).unwrap();
        let r = network_emergence(&g, &identity, Prior::Uniform).unwrap();
        prop_assert_eq!(r.classification.counts.incongruous, 0);
    }
}
