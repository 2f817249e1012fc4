//! Random walkers on weighted graphs: walk transition matrices, community
//! macro-nodes, per-edge local excess entropy and the within/between
//! community statistics of informative and misinformative edges.

use std::collections::BTreeMap;

use crate::coarse::{
    classify_transitions, effective_information, effectiveness, emergence_score, macro_tpm, Partition,
    TransitionClassification, Weighting,
};
use crate::error::{Error, Result};
use crate::prob::{LocalExcessTable, Prior, TransitionMatrix};
use crate::rng;
use crate::scalar::{sign_of, Scalar, Sign};

/// A directed graph with non-negative edge weights. Parallel edges add up.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    labels: Vec<String>,
    edges: Vec<(usize, usize, T)>,
}

impl<T: Scalar> WeightedGraph<T> {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels, edges: Vec::new() }
    }

    /// Nodes labelled `"0".."n-1"`.
    pub fn with_nodes(n: usize) -> Self {
        Self::new(crate::prob::default_labels(n))
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, weight: T) -> Result<()> {
        let n = self.labels.len();
        for idx in [src, dst] {
            if idx >= n {
                return Err(Error::IndexOutOfRange { index: idx, len: n });
            }
        }
        if !weight.is_finite() || weight < T::zero() {
            return Err(Error::InvalidGraph(format!(
                "edge {} -> {} has weight {weight}",
                self.labels[src], self.labels[dst]
            )));
        }
        self.edges.push((src, dst, weight));
        Ok(())
    }

    /// Adds `src -> dst` and `dst -> src` (a self-loop once).
    pub fn add_undirected(&mut self, a: usize, b: usize, weight: T) -> Result<()> {
        self.add_edge(a, b, weight)?;
        if a != b {
            self.add_edge(b, a, weight)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    /// Dense weight matrix, row-major.
    pub fn adjacency(&self) -> Vec<T> {
        let n = self.n();
        let mut a = vec![T::zero(); n * n];
        for &(i, j, w) in &self.edges {
            a[i * n + j] += w;
        }
        a
    }
}

/// The random-walk chain of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkChain<T> {
    pub tpm: TransitionMatrix<T>,
    /// Nodes without out-weight, given a self-loop of probability one.
    pub dangling: Vec<usize>,
}

/// Row-normalized out-weights; dangling nodes stay put.
pub fn walk_tpm<T: Scalar>(g: &WeightedGraph<T>) -> Result<WalkChain<T>> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no nodes".into()));
    }
    let mut a = g.adjacency();
    let mut dangling = Vec::new();
    for i in 0..n {
        let row = &mut a[i * n..(i + 1) * n];
        let out: T = row.iter().copied().sum();
        if out > T::zero() {
            row.iter_mut().for_each(|w| *w /= out);
        } else {
            row[i] = T::one();
            dangling.push(i);
        }
    }
    let tpm = TransitionMatrix::from_flat(n, a)?.with_labels(g.labels.clone())?;
    Ok(WalkChain { tpm, dangling })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommunitySource {
    File,
    LabelPropagation,
}

/// Node-to-community map, numbered by smallest member node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityAssignment {
    community: Vec<usize>,
    n_communities: usize,
    pub source: CommunitySource,
}

impl CommunityAssignment {
    /// Canonicalizes arbitrary community ids.
    pub fn new(ids: &[usize], source: CommunitySource) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidPartition("no nodes".into()));
        }
        let mut map = BTreeMap::new();
        let community: Vec<usize> = ids
            .iter()
            .map(|id| {
                let next = map.len();
                *map.entry(*id).or_insert(next)
            })
            .collect();
        Ok(Self { n_communities: map.len(), community, source })
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.community[node]
    }

    pub fn communities(&self) -> &[usize] {
        &self.community
    }

    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    pub fn n_nodes(&self) -> usize {
        self.community.len()
    }

    pub fn to_partition(&self) -> Partition {
        Partition::new(self.community.clone()).expect("canonical ids are contiguous")
    }
}

/// Asynchronous label propagation with a seeded visiting order.
///
/// Every sweep visits nodes in a fresh shuffled order; a node adopts the
/// label of greatest total (symmetrized) neighbour weight, keeping its
/// current label when that label is among the maxima and otherwise drawing
/// uniformly among the tied maxima. Stops after a sweep without changes.
pub fn label_propagation<T: Scalar>(g: &WeightedGraph<T>, seed: u64) -> Result<CommunityAssignment> {
    const MAX_SWEEPS: usize = 1000;
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no nodes".into()));
    }
    let a = g.adjacency();
    let neighbours: Vec<Vec<(usize, T)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, a[i * n + j] + a[j * n + i]))
                .filter(|&(_, w)| w > T::zero())
                .collect()
        })
        .collect();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut gen = rng::seeded(seed);
    for _ in 0..MAX_SWEEPS {
        rng::shuffle(&mut gen, &mut order);
        let mut changed = false;
        for &v in &order {
            if neighbours[v].is_empty() {
                continue;
            }
            let mut tally: BTreeMap<usize, T> = BTreeMap::new();
            for &(u, w) in &neighbours[v] {
                *tally.entry(labels[u]).or_insert_with(T::zero) += w;
            }
            let top = tally.values().copied().fold(T::neg_infinity(), T::max);
            let tied: Vec<usize> = tally.iter().filter(|(_, &w)| w == top).map(|(&l, _)| l).collect();
            if tied.contains(&labels[v]) {
                continue;
            }
            labels[v] = tied[rng::below(&mut gen, tied.len())];
            changed = true;
        }
        if !changed {
            break;
        }
    }
    CommunityAssignment::new(&labels, CommunitySource::LabelPropagation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeInfo<T> {
    pub src: usize,
    pub dst: usize,
    /// Local excess entropy of the step `src -> dst`; `None` when undefined under the prior.
    pub value: Option<T>,
    /// Whether both endpoints share a community, once communities are attached.
    pub within: Option<bool>,
}

/// Local excess entropy of every edge with positive walk probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfoMap<T> {
    pub edges: Vec<EdgeInfo<T>>,
    pub dangling: Vec<usize>,
}

impl<T: Scalar> EdgeInfoMap<T> {
    pub fn attach_communities(&mut self, c: &CommunityAssignment) {
        for e in &mut self.edges {
            e.within = Some(c.community_of(e.src) == c.community_of(e.dst));
        }
    }

    pub fn get(&self, src: usize, dst: usize) -> Option<&EdgeInfo<T>> {
        self.edges.iter().find(|e| e.src == src && e.dst == dst)
    }
}

pub fn edge_info_map<T: Scalar>(g: &WeightedGraph<T>, prior: Prior) -> Result<EdgeInfoMap<T>> {
    let chain = walk_tpm(g)?;
    edge_info_from_chain(&chain, prior)
}

fn edge_info_from_chain<T: Scalar>(chain: &WalkChain<T>, prior: Prior) -> Result<EdgeInfoMap<T>> {
    let w = &chain.tpm;
    let p = prior.resolve(w)?;
    let table = LocalExcessTable::compute(w, &p)?;
    let mut edges = Vec::new();
    for i in 0..w.n() {
        for j in 0..w.n() {
            if w.get(i, j) > T::zero() {
                edges.push(EdgeInfo { src: i, dst: j, value: table.get(i, j), within: None });
            }
        }
    }
    Ok(EdgeInfoMap { edges, dangling: chain.dangling.clone() })
}

/// Counts and fractions of informative/misinformative edges inside and between communities.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EdgeClassStats<T> {
    pub informative_within: usize,
    pub informative_between: usize,
    pub misinformative_within: usize,
    pub misinformative_between: usize,
    /// Fractions of informative edges within / between (`None` if no informative edge).
    pub informative_within_fraction: Option<T>,
    pub informative_between_fraction: Option<T>,
    /// Fractions of misinformative edges within / between (`None` if no misinformative edge).
    pub misinformative_within_fraction: Option<T>,
    pub misinformative_between_fraction: Option<T>,
}

impl<T: Scalar> EdgeClassStats<T> {
    pub fn from_edges(map: &EdgeInfoMap<T>) -> Self {
        let mut s = Self::default();
        for e in &map.edges {
            let (Some(v), Some(within)) = (e.value, e.within) else { continue };
            match (sign_of(v), within) {
                (Sign::Positive, true) => s.informative_within += 1,
                (Sign::Positive, false) => s.informative_between += 1,
                (Sign::Negative, true) => s.misinformative_within += 1,
                (Sign::Negative, false) => s.misinformative_between += 1,
                (Sign::Zero, _) => {}
            }
        }
        let frac = |a: usize, b: usize| -> (Option<T>, Option<T>) {
            let total = a + b;
            if total == 0 {
                (None, None)
            } else {
                let t = T::lit(total as f64);
                (Some(T::lit(a as f64) / t), Some(T::lit(b as f64) / t))
            }
        };
        (s.informative_within_fraction, s.informative_between_fraction) =
            frac(s.informative_within, s.informative_between);
        (s.misinformative_within_fraction, s.misinformative_between_fraction) =
            frac(s.misinformative_within, s.misinformative_between);
        s
    }
}

/// Coarse-graining analysis of a graph's walker under a community assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEmergence<T> {
    pub n_nodes: usize,
    pub n_communities: usize,
    pub dangling: Vec<usize>,
    pub micro_ei: T,
    pub micro_effectiveness: Option<T>,
    pub macro_ei: T,
    /// `None` when the macro scale has a single node.
    pub macro_effectiveness: Option<T>,
    /// `None` when either effectiveness is undefined or both are zero.
    pub emergence_score: Option<T>,
    pub macro_undefined: bool,
    pub macro_tpm: TransitionMatrix<T>,
    pub classification: TransitionClassification<T>,
    pub edges: EdgeInfoMap<T>,
    pub edge_classes: EdgeClassStats<T>,
}

/// Compares the micro walker with its community-lumped macro walker.
///
/// Macro nodes use uniform within-group weighting; `prior` localizes both
/// the edge values and the cross-scale classification.
pub fn network_emergence<T: Scalar>(
    g: &WeightedGraph<T>,
    c: &CommunityAssignment,
    prior: Prior,
) -> Result<NetworkEmergence<T>> {
    if c.n_nodes() != g.n() {
        return Err(Error::DimensionMismatch { what: "community assignment", expected: g.n(), found: c.n_nodes() });
    }
    let chain = walk_tpm(g)?;
    let w = &chain.tpm;
    let macro_ = macro_tpm(w, &c.to_partition(), Weighting::UniformWithinGroup)?;
    let micro_effectiveness = effectiveness(w).ok();
    let macro_effectiveness = effectiveness(&macro_.tpm).ok();
    let emergence = emergence_score(w, &macro_).ok();
    let classification = classify_transitions(w, &macro_, prior)?;
    let mut edges = edge_info_from_chain(&chain, prior)?;
    edges.attach_communities(c);
    let edge_classes = EdgeClassStats::from_edges(&edges);
    Ok(NetworkEmergence {
        n_nodes: g.n(),
        n_communities: c.n_communities(),
        dangling: chain.dangling.clone(),
        micro_ei: effective_information(w),
        micro_effectiveness,
        macro_ei: effective_information(&macro_.tpm),
        macro_effectiveness,
        emergence_score: emergence,
        macro_undefined: macro_.tpm.n() < 2,
        macro_tpm: macro_.tpm,
        classification,
        edges,
        edge_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_abs_diff_eq;

    fn clique(g: &mut WeightedGraph<f64>, nodes: &[usize]) {
        for (k, &a) in nodes.iter().enumerate() {
            for &b in &nodes[k + 1..] {
                g.add_undirected(a, b, 1.0).unwrap();
            }
        }
    }

    fn two_triangles() -> WeightedGraph<f64> {
        let mut g = WeightedGraph::with_nodes(6);
        clique(&mut g, &[0, 1, 2]);
        clique(&mut g, &[3, 4, 5]);
        g
    }

    #[test]
    fn triangle_walk() {
        let mut g = WeightedGraph::with_nodes(3);
        clique(&mut g, &[0, 1, 2]);
        let chain = walk_tpm(&g).unwrap();
        assert_eq!(chain.tpm.row(0), &[0.0, 0.5, 0.5]);
        assert_eq!(chain.tpm.row(2), &[0.5, 0.5, 0.0]);
        assert!(chain.dangling.is_empty());
    }

    #[test]
    fn isolated_node_gets_self_loop() {
        let mut g = WeightedGraph::with_nodes(3);
        g.add_undirected(0, 1, 1.0).unwrap();
        let chain = walk_tpm(&g).unwrap();
        assert_eq!(chain.tpm.row(2), &[0.0, 0.0, 1.0]);
        assert_eq!(chain.dangling, vec![2]);
    }

    #[test]
    fn weighted_star_hub_row() {
        let mut g = WeightedGraph::with_nodes(4);
        g.add_undirected(0, 1, 2.0).unwrap();
        g.add_undirected(0, 2, 1.0).unwrap();
        g.add_undirected(0, 3, 1.0).unwrap();
        let chain = walk_tpm(&g).unwrap();
        assert_eq!(chain.tpm.row(0), &[0.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn negative_weight_rejected() {
        let mut g = WeightedGraph::<f64>::with_nodes(2);
        assert!(matches!(g.add_edge(0, 1, -1.0), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn complete_graph_edges_carry_nothing() {
        let mut g = WeightedGraph::with_nodes(4);
        clique(&mut g, &[0, 1, 2, 3]);
        // self-loops make the walk memoryless
        for i in 0..4 {
            g.add_edge(i, i, 1.0).unwrap();
        }
        let map = edge_info_map(&g, Prior::Uniform).unwrap();
        assert_eq!(map.edges.len(), 16);
        for e in &map.edges {
            assert_abs_diff_eq!(e.value.unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn disconnected_cliques_edges_are_informative() {
        let map = edge_info_map(&two_triangles(), Prior::Uniform).unwrap();
        assert_eq!(map.edges.len(), 12);
        for e in &map.edges {
            assert_abs_diff_eq!(e.value.unwrap(), 3f64.log2(), epsilon = 1e-12);
        }
    }

    #[test]
    fn directed_two_cycle_is_one_bit() {
        let mut g = WeightedGraph::with_nodes(2);
        g.add_edge(0, 1, 1.0).unwrap();
        g.add_edge(1, 0, 1.0).unwrap();
        let map = edge_info_map(&g, Prior::Uniform).unwrap();
        for e in &map.edges {
            assert_abs_diff_eq!(e.value.unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn label_propagation_examples() {
        let c = label_propagation(&two_triangles(), 3).unwrap();
        assert_eq!(c.communities(), &[0, 0, 0, 1, 1, 1]);
        let mut g = WeightedGraph::with_nodes(5);
        clique(&mut g, &[0, 1, 2, 3, 4]);
        assert_eq!(label_propagation(&g, 9).unwrap().n_communities(), 1);
    }

    #[test]
    fn barbell_splits_at_the_bridge() {
        let g = systems::barbell::<f64>(5);
        let c = label_propagation(&g, 42).unwrap();
        assert_eq!(c.n_communities(), 2);
        assert_ne!(c.community_of(4), c.community_of(5));
        assert_eq!(c.communities(), &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        assert_eq!(c, label_propagation(&g, 42).unwrap());
    }

    #[test]
    fn natural_communities_have_no_between_edges() {
        let g = two_triangles();
        let c = CommunityAssignment::new(&[7, 7, 7, 2, 2, 2], CommunitySource::File).unwrap();
        assert_eq!(c.communities(), &[0, 0, 0, 1, 1, 1]);
        let r = network_emergence(&g, &c, Prior::Uniform).unwrap();
        assert_eq!(r.edge_classes.informative_between, 0);
        assert_eq!(r.edge_classes.misinformative_between, 0);
        assert_eq!(r.edge_classes.informative_within_fraction, Some(1.0));
        assert_eq!(r.edge_classes.misinformative_between_fraction, None);
    }

    #[test]
    fn identity_assignment_has_no_incongruity() {
        let g = systems::barbell::<f64>(4);
        let ids: Vec<usize> = (0..g.n()).collect();
        let c = CommunityAssignment::new(&ids, CommunitySource::File).unwrap();
        let r = network_emergence(&g, &c, Prior::Uniform).unwrap();
        assert_eq!(r.classification.counts.incongruous, 0);
        assert_eq!(r.emergence_score, Some(0.0));
    }

    #[test]
    fn single_community_leaves_macro_undefined() {
        let g = two_triangles();
        let c = CommunityAssignment::new(&[0; 6], CommunitySource::File).unwrap();
        let r = network_emergence(&g, &c, Prior::Uniform).unwrap();
        assert!(r.macro_undefined);
        assert_eq!(r.macro_effectiveness, None);
        assert_eq!(r.emergence_score, None);
    }
}
