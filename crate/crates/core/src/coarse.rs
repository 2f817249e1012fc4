//! Coarse-graining emergence.
//!
//! A [`Partition`] maps micro states onto macro states; [`macro_tpm`] lumps
//! the micro dynamics accordingly. Effective information is the excess
//! entropy under a uniform prior, effectiveness normalizes it by `log2 N`,
//! and the emergence score is the log-ratio of macro to micro effectiveness.
//! [`classify_transitions`] compares signs of local excess entropies across
//! the two scales.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::{excess_entropy, LocalExcessTable, Prior, ProbVector, TransitionMatrix};
use crate::scalar::{sign_of, Scalar, Sign};

/// Largest state count accepted by [`SearchMode::Exhaustive`].
pub const EXHAUSTIVE_MAX_STATES: usize = 10;

/// A surjection from micro states `0..N` onto macro states `0..M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    n_macro: usize,
    micro_labels: Vec<String>,
    macro_labels: Vec<String>,
}

impl Partition {
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("no micro states".into()));
        }
        let n_macro = assignment.iter().max().map_or(0, |&m| m + 1);
        let mut seen = vec![false; n_macro];
        for &a in &assignment {
            seen[a] = true;
        }
        if let Some(empty) = seen.iter().position(|&s| !s) {
            return Err(Error::InvalidPartition(format!("macro state {empty} has no members")));
        }
        let n = assignment.len();
        Ok(Self {
            assignment,
            n_macro,
            micro_labels: crate::prob::default_labels(n),
            macro_labels: crate::prob::default_labels(n_macro),
        })
    }

    /// Builds a partition from explicit groups of micro states, numbered in the given order.
    pub fn from_groups(n: usize, groups: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            for &i in members {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, len: n });
                }
                if assignment[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("micro state {i} assigned twice")));
                }
                assignment[i] = g;
            }
        }
        if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidPartition(format!("micro state {i} is unassigned")));
        }
        Self::new(assignment)
    }

    /// Every micro state in its own group.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    /// All micro states in one group.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![0; n])
    }

    pub fn with_labels(mut self, micro: Vec<String>, macro_: Vec<String>) -> Result<Self> {
        if micro.len() != self.n_micro() {
            return Err(Error::DimensionMismatch {
                what: "micro labels",
                expected: self.n_micro(),
                found: micro.len(),
            });
        }
        if macro_.len() != self.n_macro {
            return Err(Error::DimensionMismatch { what: "macro labels", expected: self.n_macro, found: macro_.len() });
        }
        self.micro_labels = micro;
        self.macro_labels = macro_;
        Ok(self)
    }

    pub fn n_micro(&self) -> usize {
        self.assignment.len()
    }

    pub fn n_macro(&self) -> usize {
        self.n_macro
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn macro_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn micro_labels(&self) -> &[String] {
        &self.micro_labels
    }

    pub fn macro_labels(&self) -> &[String] {
        &self.macro_labels
    }

    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_macro];
        for (i, &a) in self.assignment.iter().enumerate() {
            groups[a].push(i);
        }
        groups
    }

    pub fn is_identity(&self) -> bool {
        self.n_macro == self.n_micro()
    }

    /// The assignment relabeled by order of first appearance (a restricted growth string).
    pub fn canonical_assignment(&self) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.n_macro];
        let mut next = 0;
        self.assignment
            .iter()
            .map(|&a| {
                if map[a] == usize::MAX {
                    map[a] = next;
                    next += 1;
                }
                map[a]
            })
            .collect()
    }

    /// Projects a micro distribution onto the macro states.
    pub fn project<T: Scalar>(&self, p: &ProbVector<T>) -> Result<ProbVector<T>> {
        if p.len() != self.n_micro() {
            return Err(Error::DimensionMismatch {
                what: "micro distribution",
                expected: self.n_micro(),
                found: p.len(),
            });
        }
        let mut out = vec![T::zero(); self.n_macro];
        for (i, &a) in self.assignment.iter().enumerate() {
            out[a] += p.get(i);
        }
        Ok(ProbVector::from_raw(out))
    }
}

/// Element-wise Boolean aggregation function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolFn {
    And,
    Or,
    Xor,
    /// Strict majority of the group's elements are on.
    Maj,
}

impl BoolFn {
    pub fn apply(self, bits: &[bool]) -> bool {
        let ones = bits.iter().filter(|&&b| b).count();
        match self {
            BoolFn::And => ones == bits.len(),
            BoolFn::Or => ones > 0,
            BoolFn::Xor => ones % 2 == 1,
            BoolFn::Maj => 2 * ones > bits.len(),
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "AND" => Some(BoolFn::And),
            "OR" => Some(BoolFn::Or),
            "XOR" => Some(BoolFn::Xor),
            "MAJ" => Some(BoolFn::Maj),
            _ => None,
        }
    }
}

/// A group of Boolean elements collapsed into one macro element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementGroup {
    pub elements: Vec<usize>,
    pub function: BoolFn,
}

/// Converts an element-wise Boolean aggregation into a state-level partition.
///
/// Micro states index `n_elements` binary elements with element 0 as the
/// most significant bit; macro states index the group outputs the same way.
/// Groups must be non-empty and disjoint; elements outside every group are
/// ignored by the coarse-graining.
pub fn boolean_aggregation(n_elements: usize, groups: &[ElementGroup]) -> Result<Partition> {
    if n_elements == 0 || n_elements > 20 {
        return Err(Error::InvalidPartition(format!("element count {n_elements} outside 1..=20")));
    }
    if groups.is_empty() {
        return Err(Error::InvalidPartition("no element groups".into()));
    }
    let mut used = vec![false; n_elements];
    for (g, group) in groups.iter().enumerate() {
        if group.elements.is_empty() {
            return Err(Error::InvalidPartition(format!("element group {g} is empty")));
        }
        for &e in &group.elements {
            if e >= n_elements {
                return Err(Error::IndexOutOfRange { index: e, len: n_elements });
            }
            if std::mem::replace(&mut used[e], true) {
                return Err(Error::InvalidPartition(format!("element {e} is in two groups")));
            }
        }
    }
    let n_states = 1usize << n_elements;
    let n_groups = groups.len();
    let bit = |s: usize, k: usize, width: usize| (s >> (width - 1 - k)) & 1 == 1;
    let assignment: Vec<usize> = (0..n_states)
        .map(|s| {
            groups.iter().enumerate().fold(0usize, |acc, (g, group)| {
                let bits: Vec<bool> = group.elements.iter().map(|&e| bit(s, e, n_elements)).collect();
                acc | (usize::from(group.function.apply(&bits)) << (n_groups - 1 - g))
            })
        })
        .collect();
    let micro = (0..n_states).map(|s| format!("{s:0n_elements$b}")).collect();
    let macro_ = (0..1usize << n_groups).map(|s| format!("{s:0n_groups$b}")).collect();
    Partition::new(assignment)?.with_labels(micro, macro_)
}

/// Weighting of micro states within a macro group when lumping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    UniformWithinGroup,
    StationaryWithinGroup,
}

impl Weighting {
    pub fn name(self) -> &'static str {
        match self {
            Weighting::UniformWithinGroup => "uniform",
            Weighting::StationaryWithinGroup => "stationary",
        }
    }
}

/// A coarse-grained system: the partition and its induced transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroScale<T> {
    pub partition: Partition,
    pub tpm: TransitionMatrix<T>,
    pub weighting: Weighting,
    /// Groups with (numerically) zero stationary mass that fell back to uniform weighting.
    pub fallback_groups: Vec<usize>,
}

/// Lumps `w` onto the macro states of `partition`:
/// `W~[a][b] = sum_{i in a} w_i sum_{j in b} W[i][j]` with `w` the
/// within-group weighting renormalized on `a`.
pub fn macro_tpm<T: Scalar>(
    w: &TransitionMatrix<T>,
    partition: &Partition,
    weighting: Weighting,
) -> Result<MacroScale<T>> {
    let n = w.n();
    if partition.n_micro() != n {
        return Err(Error::DimensionMismatch { what: "partition", expected: n, found: partition.n_micro() });
    }
    let groups = partition.groups();
    let m = groups.len();
    let stationary = match weighting {
        Weighting::UniformWithinGroup => None,
        Weighting::StationaryWithinGroup => Some(crate::prob::stationary(w)?),
    };
    let mut fallback_groups = Vec::new();
    let mut data = vec![T::zero(); m * m];
    for (a, members) in groups.iter().enumerate() {
        let weights: Vec<T> = match &stationary {
            Some(pi) => {
                let mass: T = members.iter().map(|&i| pi.get(i)).sum();
                // transient mass left over from power iteration counts as zero
                if mass > T::stationary_tol() {
                    members.iter().map(|&i| pi.get(i) / mass).collect()
                } else {
                    fallback_groups.push(a);
                    uniform_weights(members.len())
                }
            }
            None => uniform_weights(members.len()),
        };
        let row = &mut data[a * m..(a + 1) * m];
        for (&i, &wi) in members.iter().zip(&weights) {
            for (j, &p) in w.row(i).iter().enumerate() {
                row[partition.macro_of(j)] += wi * p;
            }
        }
    }
    let tpm = TransitionMatrix::from_flat(m, data)?.with_labels(partition.macro_labels().to_vec())?;
    Ok(MacroScale { partition: partition.clone(), tpm, weighting, fallback_groups })
}

fn uniform_weights<T: Scalar>(k: usize) -> Vec<T> {
    vec![T::one() / T::lit(k as f64); k]
}

/// Effective information: excess entropy under the uniform prior, in bits.
///
/// Clamped to `[0, log2 N]` to absorb rounding at the extremes.
pub fn effective_information<T: Scalar>(w: &TransitionMatrix<T>) -> T {
    let uniform = ProbVector::uniform(w.n()).expect("matrix has at least one state");
    let ei = excess_entropy(w, &uniform).expect("uniform prior has matching length");
    let cap = T::lit(w.n() as f64).log2();
    ei.max(T::zero()).min(cap)
}

/// Effective information normalized by `log2 N`, in `[0, 1]`.
pub fn effectiveness<T: Scalar>(w: &TransitionMatrix<T>) -> Result<T> {
    if w.n() < 2 {
        return Err(Error::Domain("effectiveness is undefined for a single state".into()));
    }
    Ok(effective_information(w) / T::lit(w.n() as f64).log2())
}

/// `log2(effectiveness(macro) / effectiveness(micro))`; positive means the
/// coarse-graining is emergent. `+inf` when only the micro scale is ineffective.
pub fn emergence_score<T: Scalar>(w: &TransitionMatrix<T>, macro_: &MacroScale<T>) -> Result<T> {
    if macro_.partition.n_micro() != w.n() {
        return Err(Error::DimensionMismatch {
            what: "macro scale",
            expected: w.n(),
            found: macro_.partition.n_micro(),
        });
    }
    if macro_.tpm.n() < 2 {
        return Err(Error::Domain("macro scale has a single state".into()));
    }
    let micro = effectiveness(w)?;
    let mac = effectiveness(&macro_.tpm)?;
    let zero = T::zero_band();
    match (micro <= zero, mac <= zero) {
        (true, true) => Err(Error::Domain("both scales have zero effectiveness".into())),
        (true, false) => Ok(T::infinity()),
        _ => Ok((mac / micro).log2()),
    }
}

/// Cross-scale sign class of a micro transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransitionClass {
    /// Informative at both scales.
    CongruentInformative,
    /// Misinformative at both scales.
    CongruentMisinformative,
    /// Informative at the micro scale, misinformative at the macro scale.
    Incongruous,
    /// Misinformative at the micro scale, informative at the macro scale.
    AntiIncongruous,
    /// A zero or undefined value at either scale.
    Zero,
}

impl TransitionClass {
    pub fn from_values<T: Scalar>(e_micro: Option<T>, e_macro: Option<T>) -> Self {
        match (e_micro.map(sign_of), e_macro.map(sign_of)) {
            (Some(Sign::Positive), Some(Sign::Positive)) => Self::CongruentInformative,
            (Some(Sign::Negative), Some(Sign::Negative)) => Self::CongruentMisinformative,
            (Some(Sign::Positive), Some(Sign::Negative)) => Self::Incongruous,
            (Some(Sign::Negative), Some(Sign::Positive)) => Self::AntiIncongruous,
            _ => Self::Zero,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::CongruentInformative => "congruent-informative",
            Self::CongruentMisinformative => "congruent-misinformative",
            Self::Incongruous => "incongruous",
            Self::AntiIncongruous => "anti-incongruous",
            Self::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedTransition<T> {
    pub from: usize,
    pub to: usize,
    /// Micro-scale local excess entropy; `None` if the source has zero prior mass.
    pub e_micro: Option<T>,
    /// Macro-scale local excess entropy; `None` if the macro transition is unreachable.
    pub e_macro: Option<T>,
    pub class: TransitionClass,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassCounts {
    pub congruent_informative: usize,
    pub congruent_misinformative: usize,
    pub incongruous: usize,
    pub anti_incongruous: usize,
    pub zero: usize,
}

impl ClassCounts {
    fn add(&mut self, c: TransitionClass) {
        match c {
            TransitionClass::CongruentInformative => self.congruent_informative += 1,
            TransitionClass::CongruentMisinformative => self.congruent_misinformative += 1,
            TransitionClass::Incongruous => self.incongruous += 1,
            TransitionClass::AntiIncongruous => self.anti_incongruous += 1,
            TransitionClass::Zero => self.zero += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.congruent_informative
            + self.congruent_misinformative
            + self.incongruous
            + self.anti_incongruous
            + self.zero
    }
}

/// Per-transition cross-scale classification with summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionClassification<T> {
    pub transitions: Vec<ClassifiedTransition<T>>,
    pub counts: ClassCounts,
    /// Incongruous transitions over micro-informative transitions with a
    /// non-zero macro value. Zero when that denominator is empty.
    pub incongruity_fraction: T,
    /// Set when no transition is informative at both-defined scales, so the
    /// fraction is reported as zero by convention.
    pub all_zero: bool,
    pub prior: Prior,
}

impl<T: Scalar> TransitionClassification<T> {
    pub fn class_of(&self, from: usize, to: usize) -> Option<TransitionClass> {
        self.transitions.iter().find(|t| t.from == from && t.to == to).map(|t| t.class)
    }
}

/// Classifies every micro transition with `W[i][j] > 0` by the signs of its
/// local excess entropy at the micro scale and of its image at the macro scale.
///
/// The macro scale is localized under the prior projected through the partition.
pub fn classify_transitions<T: Scalar>(
    w: &TransitionMatrix<T>,
    macro_: &MacroScale<T>,
    prior: Prior,
) -> Result<TransitionClassification<T>> {
    let p = prior.resolve(w)?;
    classify_with_prior(w, macro_, &p, prior)
}

pub(crate) fn classify_with_prior<T: Scalar>(
    w: &TransitionMatrix<T>,
    macro_: &MacroScale<T>,
    p: &ProbVector<T>,
    policy: Prior,
) -> Result<TransitionClassification<T>> {
    let part = &macro_.partition;
    if part.n_micro() != w.n() {
        return Err(Error::DimensionMismatch { what: "macro scale", expected: w.n(), found: part.n_micro() });
    }
    let micro = LocalExcessTable::compute(w, p)?;
    let projected = part.project(p)?;
    let mac = LocalExcessTable::compute(&macro_.tpm, &projected)?;
    let mut transitions = Vec::new();
    let mut counts = ClassCounts::default();
    for i in 0..w.n() {
        for j in 0..w.n() {
            if w.get(i, j) <= T::zero() {
                continue;
            }
            let e_micro = micro.get(i, j);
            let e_macro = mac.get(part.macro_of(i), part.macro_of(j));
            let class = TransitionClass::from_values(e_micro, e_macro);
            counts.add(class);
            transitions.push(ClassifiedTransition { from: i, to: j, e_micro, e_macro, class });
        }
    }
    let denom = counts.incongruous + counts.congruent_informative;
    let (incongruity_fraction, all_zero) =
        if denom == 0 { (T::zero(), true) } else { (T::lit(counts.incongruous as f64) / T::lit(denom as f64), false) };
    Ok(TransitionClassification { transitions, counts, incongruity_fraction, all_zero, prior: policy })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Every set partition; at most [`EXHAUSTIVE_MAX_STATES`] states.
    Exhaustive,
    /// Agglomerative best-single-merge.
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    pub partition: Partition,
    /// Macro effectiveness under uniform lumping; zero for the single-group partition.
    pub effectiveness: T,
    pub evaluated: usize,
}

/// Effectiveness of the uniform lumping of `w` onto `partition`, with the
/// single-group partition scored as zero.
pub fn partition_effectiveness<T: Scalar>(w: &TransitionMatrix<T>, partition: &Partition) -> Result<T> {
    if partition.n_macro() < 2 {
        return Ok(T::zero());
    }
    let m = macro_tpm(w, partition, Weighting::UniformWithinGroup)?;
    effectiveness(&m.tpm)
}

struct Candidate<T> {
    score: T,
    key: Vec<usize>,
    n_macro: usize,
}

/// Canonical preference: higher score beyond the zero band, then fewer macro
/// states, then the lexicographically smallest canonical assignment.
fn prefer<T: Scalar>(a: &Candidate<T>, b: &Candidate<T>) -> bool {
    let tol = T::zero_band();
    if a.score > b.score + tol {
        return true;
    }
    if b.score > a.score + tol {
        return false;
    }
    (a.n_macro, &a.key) < (b.n_macro, &b.key)
}

/// Finds the partition maximizing macro effectiveness.
pub fn partition_search<T: Scalar>(w: &TransitionMatrix<T>, mode: SearchMode) -> Result<SearchResult<T>> {
    partition_search_with(w, mode, true)
}

/// [`partition_search`] with explicit control over parallel scoring. The
/// result does not depend on `parallel`.
pub fn partition_search_with<T: Scalar>(
    w: &TransitionMatrix<T>,
    mode: SearchMode,
    parallel: bool,
) -> Result<SearchResult<T>> {
    match mode {
        SearchMode::Exhaustive => exhaustive(w, parallel),
        SearchMode::Greedy => greedy(w, parallel),
    }
}

/// All set partitions of `n` items as restricted growth strings, in lexicographic order.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut a = vec![0usize; n];
    let mut maxes = vec![0usize; n];
    loop {
        out.push(a.clone());
        // find rightmost position that can be incremented
        let mut i = n - 1;
        loop {
            if i == 0 {
                return out;
            }
            if a[i] <= maxes[i - 1] {
                break;
            }
            i -= 1;
        }
        a[i] += 1;
        maxes[i] = maxes[i - 1].max(a[i]);
        for k in i + 1..n {
            a[k] = 0;
            maxes[k] = maxes[i];
        }
    }
}

fn score_all<T: Scalar>(w: &TransitionMatrix<T>, keys: Vec<Vec<usize>>, parallel: bool) -> Result<Vec<Candidate<T>>> {
    let score = |key: Vec<usize>| -> Result<Candidate<T>> {
        let p = Partition::new(key.clone())?;
        Ok(Candidate { score: partition_effectiveness(w, &p)?, n_macro: p.n_macro(), key })
    };
    if parallel {
        keys.into_par_iter().map(score).collect()
    } else {
        keys.into_iter().map(score).collect()
    }
}

fn best<T: Scalar>(cands: Vec<Candidate<T>>) -> Option<Candidate<T>> {
    cands.into_iter().reduce(|acc, c| if prefer(&c, &acc) { c } else { acc })
}

fn exhaustive<T: Scalar>(w: &TransitionMatrix<T>, parallel: bool) -> Result<SearchResult<T>> {
    let n = w.n();
    if n > EXHAUSTIVE_MAX_STATES {
        return Err(Error::SearchTooLarge { n, max: EXHAUSTIVE_MAX_STATES });
    }
    let keys = restricted_growth_strings(n);
    let evaluated = keys.len();
    let winner = best(score_all(w, keys, parallel)?).expect("at least one partition");
    Ok(SearchResult { partition: Partition::new(winner.key)?, effectiveness: winner.score, evaluated })
}

fn greedy<T: Scalar>(w: &TransitionMatrix<T>, parallel: bool) -> Result<SearchResult<T>> {
    let n = w.n();
    let mut current = Partition::identity(n)?;
    let mut current_score = partition_effectiveness(w, &current)?;
    let mut evaluated = 1;
    while current.n_macro() > 1 {
        let m = current.n_macro();
        let mut keys = Vec::with_capacity(m * (m - 1) / 2);
        for a in 0..m {
            for b in a + 1..m {
                let merged: Vec<usize> = current.assignment().iter().map(|&g| if g == b { a } else { g }).collect();
                let canon = Partition::new(compact(merged))?.canonical_assignment();
                keys.push(canon);
            }
        }
        evaluated += keys.len();
        let winner = best(score_all(w, keys, parallel)?).expect("at least one merge");
        // ties go to the coarser partition
        if winner.score + T::zero_band() < current_score {
            break;
        }
        current = Partition::new(winner.key)?;
        current_score = winner.score;
    }
    Ok(SearchResult { partition: current, effectiveness: current_score, evaluated })
}

/// Renumbers group ids to be contiguous.
fn compact(assignment: Vec<usize>) -> Vec<usize> {
    let mut ids: Vec<usize> = assignment.clone();
    ids.sort_unstable();
    ids.dedup();
    assignment.into_iter().map(|g| ids.binary_search(&g).expect("present")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use approx::assert_abs_diff_eq;

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![0, 2]).is_err());
        let p = Partition::new(vec![1, 0, 1]).unwrap();
        assert_eq!(p.n_macro(), 2);
        assert_eq!(p.canonical_assignment(), vec![0, 1, 0]);
        assert_eq!(p.groups(), vec![vec![1], vec![0, 2]]);
        assert!(Partition::from_groups(3, &[vec![0], vec![0, 1, 2]]).is_err());
        assert!(Partition::from_groups(3, &[vec![0], vec![1]]).is_err());
    }

    #[test]
    fn boolean_and_aggregation_of_four_elements() {
        let groups = [
            ElementGroup { elements: vec![0, 1], function: BoolFn::And },
            ElementGroup { elements: vec![2, 3], function: BoolFn::And },
        ];
        let p = boolean_aggregation(4, &groups).unwrap();
        assert_eq!(p.n_micro(), 16);
        assert_eq!(p.n_macro(), 4);
        // 1111 -> 11, 1100 -> 10, 0011 -> 01
        assert_eq!(p.macro_of(0b1111), 0b11);
        assert_eq!(p.macro_of(0b1100), 0b10);
        assert_eq!(p.macro_of(0b0011), 0b01);
        let sizes: Vec<usize> = p.groups().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![9, 3, 3, 1]);
        assert_eq!(p.macro_labels()[2], "10");
    }

    #[test]
    fn boolean_functions() {
        assert!(BoolFn::Maj.apply(&[true, true, false]));
        assert!(!BoolFn::Maj.apply(&[true, false]));
        assert!(BoolFn::Xor.apply(&[true, false, false]));
        assert!(!BoolFn::Xor.apply(&[true, true]));
        assert!(BoolFn::Or.apply(&[false, true]));
        assert_eq!(BoolFn::parse("maj"), Some(BoolFn::Maj));
        assert_eq!(BoolFn::parse("nand"), None);
        let overlap = [
            ElementGroup { elements: vec![0, 1], function: BoolFn::Or },
            ElementGroup { elements: vec![1], function: BoolFn::Or },
        ];
        assert!(boolean_aggregation(2, &overlap).is_err());
    }

    #[test]
    fn block_diagonal_lumps_to_identity() {
        let w = TransitionMatrix::new(vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ])
        .unwrap();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let m = macro_tpm(&w, &p, Weighting::UniformWithinGroup).unwrap();
        assert_eq!(m.tpm, TransitionMatrix::identity(2).unwrap());
    }

    #[test]
    fn identity_partition_is_a_no_op() {
        let w = systems::incongruous_four_state::<f64>();
        for weighting in [Weighting::UniformWithinGroup, Weighting::StationaryWithinGroup] {
            let m = macro_tpm(&w, &Partition::identity(4).unwrap(), weighting).unwrap();
            for i in 0..4 {
                assert_eq!(m.tpm.row(i), w.row(i));
            }
            assert_eq!(emergence_score(&w, &m).unwrap(), 0.0);
        }
    }

    #[test]
    fn degenerate_four_state_example() {
        let w = systems::degenerate_four_state::<f64>();
        let p = Partition::new(vec![0, 0, 0, 1]).unwrap();
        let m = macro_tpm(&w, &p, Weighting::UniformWithinGroup).unwrap();
        assert_abs_diff_eq!(m.tpm.get(0, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.tpm.get(1, 1), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(effective_information(&w), 0.811_278_124_459_132_8, epsilon = 1e-12);
        assert_abs_diff_eq!(effectiveness(&w).unwrap(), 0.405_639_062_229_566_4, epsilon = 1e-12);
        assert_abs_diff_eq!(emergence_score(&w, &m).unwrap(), 1.301_731_507_212_373_4, epsilon = 1e-12);
    }

    #[test]
    fn stationary_weighting_falls_back_on_transient_groups() {
        // states 0,1 transient into absorbing 2
        let w = TransitionMatrix::new(vec![vec![0.0, 0.5, 0.5], vec![0.5, 0.0, 0.5], vec![0.0, 0.0, 1.0]]).unwrap();
        let p = Partition::new(vec![0, 0, 1]).unwrap();
        let m = macro_tpm(&w, &p, Weighting::StationaryWithinGroup).unwrap();
        assert_eq!(m.fallback_groups, vec![0]);
        assert_abs_diff_eq!(m.tpm.get(0, 0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn effectiveness_extremes_and_domain() {
        let perm = TransitionMatrix::<f64>::permutation(&[1, 2, 3, 0]).unwrap();
        assert_abs_diff_eq!(effective_information(&perm), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(effectiveness(&perm).unwrap(), 1.0, epsilon = 1e-12);
        let flat = TransitionMatrix::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(effectiveness(&flat).unwrap(), 0.0, epsilon = 1e-12);
        let one = TransitionMatrix::<f64>::identity(1).unwrap();
        assert!(matches!(effectiveness(&one), Err(Error::Domain(_))));
    }

    #[test]
    fn effectiveness_in_f32() {
        let w = systems::degenerate_four_state::<f32>();
        assert!((effectiveness(&w).unwrap() - 0.405_639_06).abs() < 1e-5);
    }

    #[test]
    fn emergence_score_sentinels() {
        let flat = TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let m = macro_tpm(&flat, &Partition::identity(2).unwrap(), Weighting::UniformWithinGroup).unwrap();
        assert!(matches!(emergence_score(&flat, &m), Err(Error::Domain(_))));
        let single = macro_tpm(&flat, &Partition::single(2).unwrap(), Weighting::UniformWithinGroup).unwrap();
        assert!(matches!(emergence_score(&flat, &single), Err(Error::Domain(_))));
    }

    #[test]
    fn coarse_graining_a_permutation_loses_effectiveness() {
        // 0->1->2->3->0 lumped {0,1},{2,3}: the macro chain is 0.5/0.5 in each row
        let perm = TransitionMatrix::<f64>::permutation(&[1, 2, 3, 0]).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1]).unwrap();
        let m = macro_tpm(&perm, &p, Weighting::UniformWithinGroup).unwrap();
        let score = emergence_score(&perm, &m);
        // macro effectiveness 0 with micro 1 -> log2(0) = -inf
        assert!(score.unwrap() < 0.0);
        let p = Partition::new(vec![0, 1, 1, 1]).unwrap();
        let m = macro_tpm(&perm, &p, Weighting::UniformWithinGroup).unwrap();
        assert!(emergence_score(&perm, &m).unwrap() < 0.0);
    }

    #[test]
    fn identity_partition_has_no_incongruity() {
        let w = systems::incongruous_four_state::<f64>();
        let m = macro_tpm(&w, &Partition::identity(4).unwrap(), Weighting::UniformWithinGroup).unwrap();
        let c = classify_transitions(&w, &m, Prior::Uniform).unwrap();
        assert_eq!(c.counts.incongruous, 0);
        assert_eq!(c.counts.anti_incongruous, 0);
        for t in &c.transitions {
            assert_eq!(t.e_micro, t.e_macro);
        }
    }

    #[test]
    fn memoryless_classification_is_all_zero() {
        let w = TransitionMatrix::new(vec![vec![0.25, 0.75], vec![0.25, 0.75]]).unwrap();
        let m = macro_tpm(&w, &Partition::identity(2).unwrap(), Weighting::UniformWithinGroup).unwrap();
        let c = classify_transitions(&w, &m, Prior::Uniform).unwrap();
        assert!(c.all_zero);
        assert_eq!(c.incongruity_fraction, 0.0);
        assert_eq!(c.counts.zero, 4);
    }

    #[test]
    fn committed_incongruous_system() {
        let w = systems::incongruous_four_state::<f64>();
        let p = systems::incongruous_partition();
        let m = macro_tpm(&w, &p, Weighting::UniformWithinGroup).unwrap();
        for prior in [Prior::Uniform, Prior::Stationary] {
            let c = classify_transitions(&w, &m, prior).unwrap();
            assert!(c.counts.incongruous >= 1, "{prior:?}");
            for t in &c.transitions {
                if t.class == TransitionClass::Incongruous {
                    assert!(t.e_micro.unwrap() > 0.0 && t.e_macro.unwrap() < 0.0);
                }
            }
        }
    }

    #[test]
    fn restricted_growth_strings_count_bell_numbers() {
        let bell = [1, 1, 2, 5, 15, 52, 203, 877];
        for (n, &b) in bell.iter().enumerate().skip(1) {
            assert_eq!(restricted_growth_strings(n).len(), b);
        }
        assert_eq!(restricted_growth_strings(3)[1], vec![0, 0, 1]);
    }

    #[test]
    fn search_refuses_large_exhaustive() {
        let w = TransitionMatrix::<f64>::identity(11).unwrap();
        assert!(matches!(partition_search(&w, SearchMode::Exhaustive), Err(Error::SearchTooLarge { n: 11, max: 10 })));
    }

    #[test]
    fn search_finds_degenerate_grouping() {
        let w = systems::degenerate_four_state::<f64>();
        for mode in [SearchMode::Exhaustive, SearchMode::Greedy] {
            let r = partition_search(&w, mode).unwrap();
            assert_eq!(r.partition.canonical_assignment(), vec![0, 0, 0, 1], "{mode:?}");
            assert_abs_diff_eq!(r.effectiveness, 1.0, epsilon = 1e-12);
        }
        assert_eq!(partition_search(&w, SearchMode::Exhaustive).unwrap().evaluated, 15);
    }

    #[test]
    fn memoryless_search_returns_single_group() {
        let w = TransitionMatrix::new(vec![vec![0.1, 0.2, 0.7]; 3]).unwrap();
        for mode in [SearchMode::Exhaustive, SearchMode::Greedy] {
            let r = partition_search(&w, mode).unwrap();
            assert_eq!(r.partition.n_macro(), 1, "{mode:?}");
            assert_eq!(r.effectiveness, 0.0);
        }
    }
}
