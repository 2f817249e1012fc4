//! Seeded random walks on a transition matrix, annotated step by step with
//! local information values and flicker flags.
//!
//! A step is flagged when a locally measured emergent quantity is negative
//! while its expected counterpart is positive: an incongruous transition
//! (informative micro step, misinformative macro step) when a macro scale is
//! supplied, or a negative local causal decoupling under a positive expected
//! decoupling when a factorized system is supplied.

use std::collections::HashMap;

use crate::coarse::{MacroScale, TransitionClass};
use crate::error::{Error, Result};
use crate::phiid::{FactorizedSystem, PhiAtom, PhiSolver, Realization};
use crate::prob::{LocalExcessTable, Prior, ProbVector, TransitionMatrix};
use crate::rng;
use crate::scalar::{sign_of, Scalar, Sign};

/// Micro values with magnitude below this make the macro/micro ratio undefined.
pub const RATIO_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Start<T> {
    Fixed(usize),
    /// Draw the initial state from a distribution.
    Draw(ProbVector<T>),
}

/// Inverse-CDF draw over `probs` in index order.
fn sample<T: Scalar>(gen: &mut rng::Generator, probs: &[T]) -> usize {
    let u = rng::unit(gen);
    let mut cum = 0.0;
    for (j, p) in probs.iter().enumerate() {
        cum += p.to_f64_lossy();
        if u < cum {
            return j;
        }
    }
    // rounding left u above the final cumulative sum
    probs.iter().rposition(|&p| p > T::zero()).unwrap_or(probs.len() - 1)
}

/// Simulates `steps` transitions, returning `steps + 1` states.
pub fn simulate<T: Scalar>(w: &TransitionMatrix<T>, start: &Start<T>, steps: usize, seed: u64) -> Result<Vec<usize>> {
    if steps == 0 {
        return Err(Error::Domain("a walk needs at least one step".into()));
    }
    let mut gen = rng::seeded(seed);
    let x0 = match start {
        Start::Fixed(i) if *i >= w.n() => return Err(Error::IndexOutOfRange { index: *i, len: w.n() }),
        Start::Fixed(i) => *i,
        Start::Draw(p) => {
            w.check_prior(p)?;
            sample(&mut gen, p.probs())
        }
    };
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x0);
    let mut x = x0;
    for _ in 0..steps {
        x = sample(&mut gen, w.row(x));
        states.push(x);
    }
    Ok(states)
}

/// Optional analysis layers applied along a walk.
#[derive(Clone, Copy, Default)]
pub struct AnnotationContext<'a, T> {
    pub macro_scale: Option<&'a MacroScale<T>>,
    pub factorized: Option<&'a FactorizedSystem<T>>,
    pub prior: Prior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio<T> {
    Value(T),
    /// `|e_micro|` below [`RATIO_GUARD`] or `e_micro` undefined.
    Undefined,
}

/// Annotation of the transition `from -> to` landing at time `t` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct StepAnnotation<T> {
    pub t: usize,
    pub from: usize,
    pub to: usize,
    pub e_micro: Option<T>,
    pub e_macro: Option<T>,
    pub ratio: Option<Ratio<T>>,
    pub class: Option<TransitionClass>,
    /// Local `{12}->{12}`; `None` without a factorized system or when undefined.
    pub decoupling: Option<T>,
    pub incongruous: bool,
    pub decoupling_flicker: bool,
}

impl<T> StepAnnotation<T> {
    pub fn flicker(&self) -> bool {
        self.incongruous || self.decoupling_flicker
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrace<T> {
    pub seed: Option<u64>,
    pub states: Vec<usize>,
    pub steps: Vec<StepAnnotation<T>>,
    pub prior: Prior,
    pub has_macro: bool,
    pub has_factorized: bool,
    /// Expected `{12}->{12}` of the factorized system, when supplied.
    pub expected_decoupling: Option<T>,
}

impl<T: Scalar> WalkTrace<T> {
    pub fn flags(&self) -> Vec<bool> {
        self.steps.iter().map(StepAnnotation::flicker).collect()
    }
}

/// Annotates an existing state sequence. Every consecutive pair must be a
/// positive-probability transition of `w`.
pub fn annotate<T: Scalar>(
    w: &TransitionMatrix<T>,
    states: &[usize],
    ctx: &AnnotationContext<'_, T>,
) -> Result<WalkTrace<T>> {
    let n = w.n();
    if let Some(&bad) = states.iter().find(|&&s| s >= n) {
        return Err(Error::IndexOutOfRange { index: bad, len: n });
    }
    for pair in states.windows(2) {
        if w.get(pair[0], pair[1]) <= T::zero() {
            return Err(Error::Domain(format!(
                "trace takes the impossible transition {} -> {}",
                w.labels()[pair[0]],
                w.labels()[pair[1]]
            )));
        }
    }
    let prior = ctx.prior.resolve(w)?;
    let micro = LocalExcessTable::compute(w, &prior)?;

    let macro_table = match ctx.macro_scale {
        Some(m) => {
            if m.partition.n_micro() != n {
                return Err(Error::DimensionMismatch { what: "partition", expected: n, found: m.partition.n_micro() });
            }
            Some(LocalExcessTable::compute(&m.tpm, &m.partition.project(&prior)?)?)
        }
        None => None,
    };

    let solver = match ctx.factorized {
        Some(sys) => {
            if sys.n_states() != n {
                return Err(Error::DimensionMismatch { what: "factorized system", expected: n, found: sys.n_states() });
            }
            Some((sys, PhiSolver::new(sys)))
        }
        None => None,
    };
    let expected_decoupling = match &solver {
        Some((_, s)) => s.expected()?.get(&PhiAtom::decoupling()),
        None => None,
    };
    let expected_positive = expected_decoupling.is_some_and(|e| sign_of(e) == Sign::Positive);
    let mut decoupling_cache: HashMap<(usize, usize), Option<T>> = HashMap::new();

    let guard = T::lit(RATIO_GUARD);
    let mut steps = Vec::with_capacity(states.len().saturating_sub(1));
    for (k, pair) in states.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        let e_micro = micro.get(from, to);
        let (e_macro, ratio, class) = match (ctx.macro_scale, &macro_table) {
            (Some(m), Some(table)) => {
                let e_macro = table.get(m.partition.macro_of(from), m.partition.macro_of(to));
                let ratio = match (e_micro, e_macro) {
                    (Some(mi), Some(ma)) if mi.abs() >= guard => Ratio::Value(ma / mi),
                    _ => Ratio::Undefined,
                };
                (e_macro, Some(ratio), Some(TransitionClass::from_values(e_micro, e_macro)))
            }
            _ => (None, None, None),
        };
        let decoupling = match &solver {
            Some((sys, s)) => *decoupling_cache.entry((from, to)).or_insert_with(|| {
                let r = Realization::new(sys.split(from), sys.split(to));
                s.local(&r).ok().and_then(|t| t.get(&PhiAtom::decoupling()))
            }),
            None => None,
        };
        let decoupling_flicker = expected_positive && decoupling.is_some_and(|d| sign_of(d) == Sign::Negative);
        steps.push(StepAnnotation {
            t: k + 1,
            from,
            to,
            e_micro,
            e_macro,
            ratio,
            class,
            decoupling,
            incongruous: class == Some(TransitionClass::Incongruous),
            decoupling_flicker,
        });
    }
    Ok(WalkTrace {
        seed: None,
        states: states.to_vec(),
        steps,
        prior: ctx.prior,
        has_macro: ctx.macro_scale.is_some(),
        has_factorized: ctx.factorized.is_some(),
        expected_decoupling,
    })
}

/// Simulates and annotates in one go.
pub fn walk<T: Scalar>(
    w: &TransitionMatrix<T>,
    start: &Start<T>,
    steps: usize,
    seed: u64,
    ctx: &AnnotationContext<'_, T>,
) -> Result<WalkTrace<T>> {
    let states = simulate(w, start, steps, seed)?;
    let mut trace = annotate(w, &states, ctx)?;
    trace.seed = Some(seed);
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlickerSummary {
    pub steps: usize,
    pub count: usize,
    pub fraction: f64,
    /// `t` of every flagged step.
    pub events: Vec<usize>,
    /// Lengths of consecutive flagged runs, in order of occurrence.
    pub flagged_runs: Vec<usize>,
    /// Lengths of consecutive unflagged runs, in order of occurrence.
    pub unflagged_runs: Vec<usize>,
}

/// `(run length, number of runs)` pairs in increasing run length.
pub type RunHistogram = Vec<(usize, usize)>;

impl FlickerSummary {
    /// Run length -> number of runs, for flagged and unflagged dwell intervals.
    pub fn run_length_distribution(&self) -> (RunHistogram, RunHistogram) {
        fn hist(runs: &[usize]) -> RunHistogram {
            let mut m = std::collections::BTreeMap::new();
            for &r in runs {
                *m.entry(r).or_insert(0) += 1;
            }
            m.into_iter().collect()
        }
        (hist(&self.flagged_runs), hist(&self.unflagged_runs))
    }
}

pub fn flicker_summary<T: Scalar>(trace: &WalkTrace<T>) -> FlickerSummary {
    summarize_flags(&trace.flags())
}

/// Summary of a flag sequence whose first entry is step `t = 1`.
pub fn summarize_flags(flags: &[bool]) -> FlickerSummary {
    let events: Vec<usize> = flags.iter().enumerate().filter(|(_, &f)| f).map(|(k, _)| k + 1).collect();
    let mut flagged_runs = Vec::new();
    let mut unflagged_runs = Vec::new();
    for chunk in flags.chunk_by(|a, b| a == b) {
        if chunk[0] {
            flagged_runs.push(chunk.len());
        } else {
            unflagged_runs.push(chunk.len());
        }
    }
    let count = events.len();
    FlickerSummary {
        steps: flags.len(),
        count,
        fraction: if flags.is_empty() { 0.0 } else { count as f64 / flags.len() as f64 },
        events,
        flagged_runs,
        unflagged_runs,
    }
}
