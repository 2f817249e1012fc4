//! Integrated information decomposition of two-element systems.
//!
//! The one-step excess entropy of a system `X = {X1, X2}` splits into 16
//! atoms `A -> B`, one per pair of source collections (antichains of
//! element subsets) at `t-1` and `t`. Atoms are partially ordered by the
//! product of the redundancy orders on each side; given a double-redundancy
//! function evaluated on every atom, the atom values follow by Möbius
//! inversion from the bottom `{1}{2}->{1}{2}` up to the top `{12}->{12}`.
//!
//! The default redundancy ([`SharedExclusions`]) is the local mutual
//! information between the disjunction of the source events and the
//! disjunction of the target events, which is signed and defined for every
//! realized transition. Other functions plug in through [`DoubleRedundancy`].

use std::fmt;

use crate::error::{Error, Result};
use crate::prob::{expected_mi, joint_from_tpm, JointDist, Prior, ProbVector, TransitionMatrix};
use crate::scalar::{sign_of, Scalar, Sign};

/// Antichain of non-empty element subsets; each subset is a bitmask with
/// bit `k` standing for element `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceCollection(Vec<u32>);

impl SourceCollection {
    pub fn new(mut sets: Vec<u32>) -> Result<Self> {
        if sets.is_empty() || sets.contains(&0) {
            return Err(Error::Domain("source collections need non-empty subsets".into()));
        }
        sets.sort_unstable();
        sets.dedup();
        for &a in &sets {
            for &b in &sets {
                if a != b && a & b == a {
                    return Err(Error::Domain(format!("{{{a:b}}} ⊂ {{{b:b}}}: not an antichain")));
                }
            }
        }
        Ok(Self(sets))
    }

    /// `{1}{2}`
    pub fn redundant() -> Self {
        Self(vec![0b01, 0b10])
    }

    /// `{1}`
    pub fn first() -> Self {
        Self(vec![0b01])
    }

    /// `{2}`
    pub fn second() -> Self {
        Self(vec![0b10])
    }

    /// `{12}`
    pub fn joint() -> Self {
        Self(vec![0b11])
    }

    pub fn sets(&self) -> &[u32] {
        &self.0
    }

    /// All antichains over `n_elements` elements (`n_elements <= 3`), in a
    /// linear extension of the order.
    pub fn all(n_elements: usize) -> Vec<Self> {
        assert!((1..=3).contains(&n_elements), "supported for 1..=3 elements");
        let subsets: Vec<u32> = (1..1u32 << n_elements).collect();
        let mut out: Vec<Self> = (1..1u64 << subsets.len())
            .filter_map(|family| {
                let sets: Vec<u32> =
                    subsets.iter().enumerate().filter(|(k, _)| family >> k & 1 == 1).map(|(_, &s)| s).collect();
                Self::new(sets).ok()
            })
            .collect();
        let below = |c: &Self, all: &[Self]| all.iter().filter(|o| o.leq(c)).count();
        let snapshot = out.clone();
        out.sort_by_key(|c| (below(c, &snapshot), c.to_string()));
        out
    }

    /// Redundancy order: `self ⊑ other` iff every subset in `other` contains
    /// some subset of `self`.
    pub fn leq(&self, other: &Self) -> bool {
        other.0.iter().all(|&b| self.0.iter().any(|&a| a & !b == 0))
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("cannot parse source collection {s:?}"));
        let s = s.trim();
        if !s.starts_with('{') || !s.ends_with('}') {
            return Err(bad());
        }
        let mut sets = Vec::new();
        for part in s[1..s.len() - 1].split("}{") {
            let mut mask = 0u32;
            for ch in part.chars() {
                let d = ch.to_digit(10).filter(|&d| d >= 1).ok_or_else(bad)?;
                mask |= 1 << (d - 1);
            }
            sets.push(mask);
        }
        Self::new(sets)
    }
}

impl fmt::Display for SourceCollection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str("{")?;
            for k in 0..32 {
                if s >> k & 1 == 1 {
                    write!(f, "{}", k + 1)?;
                }
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

/// One source-collection to target-collection dependency.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhiAtom {
    pub source: SourceCollection,
    pub target: SourceCollection,
}

impl PhiAtom {
    pub fn new(source: SourceCollection, target: SourceCollection) -> Self {
        Self { source, target }
    }

    /// `{12}->{12}`, the causal-decoupling (temporal synergy) atom.
    pub fn decoupling() -> Self {
        Self::new(SourceCollection::joint(), SourceCollection::joint())
    }

    /// Parses the canonical form, e.g. `{1}{2}->{12}`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s.split_once("->").ok_or_else(|| Error::Domain(format!("cannot parse atom {s:?}")))?;
        Ok(Self::new(SourceCollection::parse(a)?, SourceCollection::parse(b)?))
    }

    pub fn leq(&self, other: &Self) -> bool {
        self.source.leq(&other.source) && self.target.leq(&other.target)
    }
}

impl fmt::Display for PhiAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.source, self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeOrder {
    Below,
    Above,
    Equal,
    Incomparable,
}

/// Position of `a` relative to `b` in the product order.
pub fn lattice_order(a: &PhiAtom, b: &PhiAtom) -> LatticeOrder {
    match (a.leq(b), b.leq(a)) {
        (true, true) => LatticeOrder::Equal,
        (true, false) => LatticeOrder::Below,
        (false, true) => LatticeOrder::Above,
        (false, false) => LatticeOrder::Incomparable,
    }
}

/// The double-redundancy lattice with its order relation precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiLattice {
    atoms: Vec<PhiAtom>,
    /// `leq[a * k + b]` iff atom a ⊑ atom b.
    leq: Vec<bool>,
    /// Atom indices in a linear extension (bottom first).
    order: Vec<usize>,
}

impl PhiLattice {
    pub fn new(n_elements: usize) -> Self {
        let collections = SourceCollection::all(n_elements);
        let atoms: Vec<PhiAtom> = collections
            .iter()
            .flat_map(|s| collections.iter().map(move |t| PhiAtom::new(s.clone(), t.clone())))
            .collect();
        let k = atoms.len();
        let leq: Vec<bool> = (0..k * k).map(|x| atoms[x / k].leq(&atoms[x % k])).collect();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&b| (0..k).filter(|&a| leq[a * k + b]).count());
        Self { atoms, leq, order }
    }

    /// The 16-atom lattice of a two-element system.
    pub fn two_element() -> Self {
        Self::new(2)
    }

    pub fn atoms(&self) -> &[PhiAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn index_of(&self, atom: &PhiAtom) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.atoms.len() + b]
    }

    pub fn compare(&self, a: usize, b: usize) -> LatticeOrder {
        match (self.leq(a, b), self.leq(b, a)) {
            (true, true) => LatticeOrder::Equal,
            (true, false) => LatticeOrder::Below,
            (false, true) => LatticeOrder::Above,
            (false, false) => LatticeOrder::Incomparable,
        }
    }

    pub fn strictly_below(&self, b: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.atoms.len()).filter(move |&a| a != b && self.leq(a, b))
    }

    /// Covering pairs `(lower, upper)`: the edges of the Hasse diagram.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let k = self.atoms.len();
        let mut out = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if a == b || !self.leq(a, b) {
                    continue;
                }
                let direct = !(0..k).any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b));
                if direct {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn bottom(&self) -> usize {
        self.order[0]
    }

    pub fn top(&self) -> usize {
        self.order[self.order.len() - 1]
    }

    /// Möbius inversion: `atom(x) = redundancy(x) - sum_{y < x} atom(y)`.
    pub fn mobius<T: Scalar>(&self, redundancy: &[T]) -> Vec<T> {
        assert_eq!(redundancy.len(), self.atoms.len());
        let mut atoms = vec![T::zero(); self.atoms.len()];
        for &x in &self.order {
            let below: T = self.strictly_below(x).map(|y| atoms[y]).sum();
            atoms[x] = redundancy[x] - below;
        }
        atoms
    }
}

/// A Markov system over the product of two elements' state spaces.
///
/// Joint index `k = s1 * n2 + s2`: element 1 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedSystem<T> {
    cards: (usize, usize),
    tpm: TransitionMatrix<T>,
    prior: ProbVector<T>,
}

impl<T: Scalar> FactorizedSystem<T> {
    pub fn new(cards: (usize, usize), tpm: TransitionMatrix<T>, prior: ProbVector<T>) -> Result<Self> {
        let (n1, n2) = cards;
        if n1 == 0 || n2 == 0 {
            return Err(Error::Domain("element cardinalities must be positive".into()));
        }
        if tpm.n() != n1 * n2 {
            return Err(Error::DimensionMismatch {
                what: "joint transition matrix",
                expected: n1 * n2,
                found: tpm.n(),
            });
        }
        tpm.check_prior(&prior)?;
        Ok(Self { cards, tpm, prior })
    }

    /// Resolves the prior from a policy (stationary by default for ΦID).
    pub fn with_policy(cards: (usize, usize), tpm: TransitionMatrix<T>, policy: Prior) -> Result<Self> {
        let prior = policy.resolve(&tpm)?;
        Self::new(cards, tpm, prior)
    }

    /// The product of two independent element dynamics.
    pub fn product(a: &TransitionMatrix<T>, b: &TransitionMatrix<T>, prior: ProbVector<T>) -> Result<Self> {
        let (n1, n2) = (a.n(), b.n());
        let n = n1 * n2;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            let (i1, i2) = (i / n2, i % n2);
            for j in 0..n {
                data.push(a.get(i1, j / n2) * b.get(i2, j % n2));
            }
        }
        Self::new((n1, n2), TransitionMatrix::from_flat(n, data)?, prior)
    }

    pub fn cards(&self) -> (usize, usize) {
        self.cards
    }

    pub fn n_states(&self) -> usize {
        self.cards.0 * self.cards.1
    }

    pub fn tpm(&self) -> &TransitionMatrix<T> {
        &self.tpm
    }

    pub fn prior(&self) -> &ProbVector<T> {
        &self.prior
    }

    pub fn joint_index(&self, s1: usize, s2: usize) -> usize {
        s1 * self.cards.1 + s2
    }

    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.cards.1, k % self.cards.1)
    }

    /// `p(x_{t-1}, x_t)` over joint states.
    pub fn temporal_joint(&self) -> JointDist<T> {
        joint_from_tpm(&self.tpm, &self.prior).expect("prior length checked at construction")
    }

    /// Temporal joint of one element, `p(x^e_{t-1}, x^e_t)`, with `element` 0 or 1.
    pub fn element_temporal_joint(&self, element: usize) -> JointDist<T> {
        let card = if element == 0 { self.cards.0 } else { self.cards.1 };
        let pick = |k: usize| {
            let (s1, s2) = self.split(k);
            if element == 0 {
                s1
            } else {
                s2
            }
        };
        let mut table = vec![T::zero(); card * card];
        for (a, b, p) in self.temporal_joint().cells() {
            table[pick(a) * card + pick(b)] += p;
        }
        JointDist::from_flat(card, card, table).expect("marginal of a valid joint")
    }

    fn check_realization(&self, r: &Realization) -> Result<(usize, usize)> {
        let (n1, n2) = self.cards;
        for (s1, s2) in [r.from, r.to] {
            if s1 >= n1 || s2 >= n2 {
                return Err(Error::UndefinedRealization(format!("{r} is outside the {n1}x{n2} state space")));
            }
        }
        Ok((self.joint_index(r.from.0, r.from.1), self.joint_index(r.to.0, r.to.1)))
    }
}

/// A transition `(a1, a2) -> (b1, b2)` in element coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Realization {
    pub from: (usize, usize),
    pub to: (usize, usize),
}

impl Realization {
    pub fn new(from: (usize, usize), to: (usize, usize)) -> Self {
        Self { from, to }
    }
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})->({},{})", self.from.0, self.from.1, self.to.0, self.to.1)
    }
}

/// Precomputed quantities shared by every redundancy evaluation on a system.
#[derive(Debug, Clone)]
pub struct TemporalModel<'a, T> {
    pub system: &'a FactorizedSystem<T>,
    /// Next-state distribution `prior · W`.
    pub next: ProbVector<T>,
}

impl<'a, T: Scalar> TemporalModel<'a, T> {
    pub fn new(system: &'a FactorizedSystem<T>) -> Self {
        let next = system.tpm.propagate(&system.prior).expect("prior length checked");
        Self { system, next }
    }

    /// Joint states whose elements agree with `state` on at least one subset of `coll`.
    fn event(&self, coll: &SourceCollection, state: usize) -> Vec<usize> {
        let sys = self.system;
        let (a1, a2) = sys.split(state);
        (0..sys.n_states())
            .filter(|&k| {
                let (k1, k2) = sys.split(k);
                coll.sets().iter().any(|&s| (s & 0b01 == 0 || k1 == a1) && (s & 0b10 == 0 || k2 == a2))
            })
            .collect()
    }
}

/// A local double-redundancy function `i(A -> B)` on realized transitions.
pub trait DoubleRedundancy<T: Scalar>: Send + Sync {
    /// Local redundancy in bits for `atom` at the joint transition `from -> to`.
    /// May return `-inf` when the target event is impossible given the source event.
    fn local(&self, model: &TemporalModel<'_, T>, atom: &PhiAtom, from: usize, to: usize) -> Result<T>;

    fn name(&self) -> &'static str;
}

/// Local mutual information between the disjunction of the source events at
/// `t-1` and the disjunction of the target events at `t`:
/// `log2(p(T | S) / p(T))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SharedExclusions;

impl<T: Scalar> DoubleRedundancy<T> for SharedExclusions {
    fn local(&self, model: &TemporalModel<'_, T>, atom: &PhiAtom, from: usize, to: usize) -> Result<T> {
        let sys = model.system;
        let past = model.event(&atom.source, from);
        let future = model.event(&atom.target, to);
        let p_s: T = past.iter().map(|&a| sys.prior.get(a)).sum();
        if p_s <= T::zero() {
            return Err(Error::UndefinedConditional(format!("source event of {atom} has zero probability")));
        }
        let p_t: T = future.iter().map(|&b| model.next.get(b)).sum();
        if p_t <= T::zero() {
            return Ok(T::neg_infinity());
        }
        let row_mass = |a: usize| -> T { future.iter().map(|&b| sys.tpm.get(a, b)).sum() };
        let p_t_given_s = if let [a] = past[..] {
            row_mass(a)
        } else {
            past.iter().map(|&a| sys.prior.get(a) * row_mass(a)).sum::<T>() / p_s
        };
        Ok((p_t_given_s / p_t).log2())
    }

    fn name(&self) -> &'static str {
        "shared-exclusions"
    }
}

/// Local double redundancy of one atom at a realization under [`SharedExclusions`].
pub fn double_redundancy<T: Scalar>(sys: &FactorizedSystem<T>, atom: &PhiAtom, realization: &Realization) -> Result<T> {
    let (from, to) = sys.check_realization(realization)?;
    SharedExclusions.local(&TemporalModel::new(sys), atom, from, to)
}

/// Expected double redundancy of one atom: the temporal-joint-weighted mean
/// of its local values.
pub fn expected_double_redundancy<T: Scalar>(sys: &FactorizedSystem<T>, atom: &PhiAtom) -> Result<T> {
    let model = TemporalModel::new(sys);
    let joint = sys.temporal_joint();
    let mut acc = T::zero();
    for (a, b, p) in joint.cells() {
        if p > T::zero() {
            acc += p * SharedExclusions.local(&model, atom, a, b)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Local(Realization),
    Expected,
}

/// Solved atom values together with the redundancy values they were inverted from.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTable<T> {
    pub scope: Scope,
    atoms: Vec<PhiAtom>,
    values: Vec<T>,
    redundancy: Vec<T>,
}

impl<T: Scalar> AtomTable<T> {
    pub fn atoms(&self) -> &[PhiAtom] {
        &self.atoms
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn redundancy(&self) -> &[T] {
        &self.redundancy
    }

    pub fn get(&self, atom: &PhiAtom) -> Option<T> {
        self.atoms.iter().position(|a| a == atom).map(|i| self.values[i])
    }

    /// Looks up an atom by its canonical string, e.g. `"{12}->{1}"`.
    pub fn get_str(&self, atom: &str) -> Option<T> {
        PhiAtom::parse(atom).ok().and_then(|a| self.get(&a))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PhiAtom, T)> {
        self.atoms.iter().zip(self.values.iter().copied())
    }

    pub fn total(&self) -> T {
        self.values.iter().copied().sum()
    }
}

/// Caches the lattice and temporal model of one system for repeated decompositions.
pub struct PhiSolver<'a, T: Scalar> {
    lattice: PhiLattice,
    model: TemporalModel<'a, T>,
    redundancy: Box<dyn DoubleRedundancy<T> + 'a>,
}

impl<'a, T: Scalar> PhiSolver<'a, T> {
    pub fn new(sys: &'a FactorizedSystem<T>) -> Self {
        Self::with_redundancy(sys, Box::new(SharedExclusions))
    }

    pub fn with_redundancy(sys: &'a FactorizedSystem<T>, redundancy: Box<dyn DoubleRedundancy<T> + 'a>) -> Self {
        Self { lattice: PhiLattice::two_element(), model: TemporalModel::new(sys), redundancy }
    }

    pub fn lattice(&self) -> &PhiLattice {
        &self.lattice
    }

    /// Local decomposition of a realized transition.
    ///
    /// Fails with [`Error::UndefinedRealization`] when the transition has zero
    /// probability or any redundancy term is undefined or infinite.
    pub fn local(&self, realization: &Realization) -> Result<AtomTable<T>> {
        let sys = self.model.system;
        let (from, to) = sys.check_realization(realization)?;
        if sys.prior.get(from) <= T::zero() || sys.tpm.get(from, to) <= T::zero() {
            return Err(Error::UndefinedRealization(format!("{realization} has zero probability")));
        }
        self.local_indexed(from, to, Scope::Local(*realization))
    }

    fn local_indexed(&self, from: usize, to: usize, scope: Scope) -> Result<AtomTable<T>> {
        let mut redundancy = Vec::with_capacity(self.lattice.len());
        for atom in self.lattice.atoms() {
            let v = self
                .redundancy
                .local(&self.model, atom, from, to)
                .map_err(|e| Error::UndefinedRealization(format!("{atom}: {e}")))?;
            if !v.is_finite() {
                return Err(Error::UndefinedRealization(format!("{atom} is {v}")));
            }
            redundancy.push(v);
        }
        Ok(self.solve(redundancy, scope))
    }

    /// Expected decomposition: redundancies averaged over the temporal joint, then inverted.
    pub fn expected(&self) -> Result<AtomTable<T>> {
        let joint = self.model.system.temporal_joint();
        let mut redundancy = vec![T::zero(); self.lattice.len()];
        for (a, b, p) in joint.cells() {
            if p <= T::zero() {
                continue;
            }
            for (acc, atom) in redundancy.iter_mut().zip(self.lattice.atoms()) {
                *acc += p * self.redundancy.local(&self.model, atom, a, b)?;
            }
        }
        Ok(self.solve(redundancy, Scope::Expected))
    }

    fn solve(&self, redundancy: Vec<T>, scope: Scope) -> AtomTable<T> {
        AtomTable { scope, atoms: self.lattice.atoms().to_vec(), values: self.lattice.mobius(&redundancy), redundancy }
    }

    /// Every realization with positive probability, with its weight `p(a, b)`.
    pub fn realizations(&self) -> Vec<(Realization, T)> {
        let sys = self.model.system;
        sys.temporal_joint()
            .cells()
            .filter(|&(_, _, p)| p > T::zero())
            .map(|(a, b, p)| (Realization::new(sys.split(a), sys.split(b)), p))
            .collect()
    }
}

/// Solves all 16 atoms for a realization, or in expectation when `realization` is `None`.
pub fn mobius_solve<T: Scalar>(sys: &FactorizedSystem<T>, realization: Option<&Realization>) -> Result<AtomTable<T>> {
    let solver = PhiSolver::new(sys);
    match realization {
        Some(r) => solver.local(r),
        None => solver.expected(),
    }
}

/// Whole-system excess entropy minus the sum of element-wise excess entropies.
pub fn phi_heuristic<T: Scalar>(sys: &FactorizedSystem<T>) -> T {
    let whole = expected_mi(&sys.temporal_joint());
    let parts = expected_mi(&sys.element_temporal_joint(0)) + expected_mi(&sys.element_temporal_joint(1));
    whole - parts
}

/// Atoms with synergistic sources and simpler targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DownwardAtoms<T> {
    /// `{12}->{1}`
    pub to_first: T,
    /// `{12}->{2}`
    pub to_second: T,
    /// `{12}->{1}{2}`
    pub to_redundant: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergenceAtoms<T> {
    /// `{12}->{12}`
    pub causal_decoupling: T,
    pub downward: DownwardAtoms<T>,
    /// Local decoupling is negative while the expected decoupling of the same system is positive.
    pub incongruous: bool,
}

/// Extracts the emergence-relevant atoms. `expected_decoupling` is the
/// expected `{12}->{12}` of the same system, used only for local tables.
pub fn emergence_atoms<T: Scalar>(table: &AtomTable<T>, expected_decoupling: Option<T>) -> EmergenceAtoms<T> {
    let syn = SourceCollection::joint();
    let get = |t: SourceCollection| table.get(&PhiAtom::new(syn.clone(), t)).unwrap_or_else(T::nan);
    let causal_decoupling = get(SourceCollection::joint());
    let incongruous = matches!(table.scope, Scope::Local(_))
        && expected_decoupling.is_some_and(|e| sign_of(e) == Sign::Positive)
        && sign_of(causal_decoupling) == Sign::Negative;
    EmergenceAtoms {
        causal_decoupling,
        downward: DownwardAtoms {
            to_first: get(SourceCollection::first()),
            to_second: get(SourceCollection::second()),
            to_redundant: get(SourceCollection::redundant()),
        },
        incongruous,
    }
}
