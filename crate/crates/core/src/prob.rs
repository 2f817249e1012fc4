//! Discrete probability foundation: distributions, entropies, expected and
//! local mutual information, transition matrices and stationary
//! distributions.
//!
//! All information quantities are in bits. Local (pointwise) values are
//! signed; a zero-probability cell with positive marginals yields
//! `-inf`, which carries zero weight in every expectation.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Iteration cap for [`stationary`].
pub const STATIONARY_MAX_ITERATIONS: usize = 100_000;

fn check_entries<T: Scalar>(probs: &[T], what: &str) -> Result<T> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    let mut sum = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "{what} entry {i} is {p} (must be finite and non-negative)"
            )));
        }
        sum += p;
    }
    Ok(sum)
}

/// Outcome of validating a total against one: accept, renormalize, or reject.
fn total_ok<T: Scalar>(sum: T, lenient: bool) -> Option<bool> {
    let dev = (sum - T::one()).abs();
    if dev <= T::validation_tol() {
        Some(false)
    } else if lenient && dev <= T::renormalize_tol() {
        Some(true)
    } else {
        None
    }
}

/// A probability distribution over a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector<T> {
    probs: Vec<T>,
    labels: Option<Vec<String>>,
}

impl<T: Scalar> ProbVector<T> {
    /// Validates `probs` strictly: non-negative, finite, summing to one within
    /// [`Scalar::validation_tol`].
    pub fn new(probs: Vec<T>) -> Result<Self> {
        let sum = check_entries(&probs, "distribution")?;
        match total_ok(sum, false) {
            Some(_) => Ok(Self { probs, labels: None }),
            None => Err(Error::InvalidDistribution(format!("entries sum to {sum}"))),
        }
    }

    /// Like [`ProbVector::new`] but rescales totals within
    /// [`Scalar::renormalize_tol`] of one. The flag reports whether a rescale happened.
    pub fn renormalized(mut probs: Vec<T>) -> Result<(Self, bool)> {
        let sum = check_entries(&probs, "distribution")?;
        match total_ok(sum, true) {
            Some(rescale) => {
                if rescale {
                    probs.iter_mut().for_each(|p| *p /= sum);
                }
                Ok((Self { probs, labels: None }, rescale))
            }
            None => Err(Error::InvalidDistribution(format!("entries sum to {sum}"))),
        }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDistribution("distribution is empty".into()));
        }
        let p = T::one() / T::lit(n as f64);
        Ok(Self { probs: vec![p; n], labels: None })
    }

    pub fn point_mass(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
        let mut probs = vec![T::zero(); n];
        probs[k] = T::one();
        Ok(Self { probs, labels: None })
    }

    /// Internal constructor for vectors that are stochastic by construction
    /// (marginals, propagated distributions).
    pub(crate) fn from_raw(probs: Vec<T>) -> Self {
        Self { probs, labels: None }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.probs.len() {
            return Err(Error::DimensionMismatch { what: "labels", expected: self.probs.len(), found: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> T {
        self.probs[i]
    }
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy<T: Scalar>(p: &ProbVector<T>) -> T {
    p.probs.iter().filter(|&&x| x > T::zero()).map(|&x| -x * x.log2()).sum()
}

/// A joint distribution `p(x, y)` over two finite supports, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist<T> {
    rows: usize,
    cols: usize,
    table: Vec<T>,
    row_marginal: ProbVector<T>,
    col_marginal: ProbVector<T>,
}

impl<T: Scalar> JointDist<T> {
    /// Builds a joint table from nested rows.
    pub fn new(table: Vec<Vec<T>>) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if let Some(bad) = table.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { what: "joint table row", expected: cols, found: bad.len() });
        }
        Self::from_flat(rows, cols, table.into_iter().flatten().collect())
    }

    pub fn from_flat(rows: usize, cols: usize, table: Vec<T>) -> Result<Self> {
        if table.len() != rows * cols {
            return Err(Error::DimensionMismatch { what: "joint table", expected: rows * cols, found: table.len() });
        }
        let sum = check_entries(&table, "joint table")?;
        if total_ok(sum, false).is_none() {
            return Err(Error::InvalidDistribution(format!("joint table sums to {sum}")));
        }
        Ok(Self::assemble(rows, cols, table))
    }

    fn assemble(rows: usize, cols: usize, table: Vec<T>) -> Self {
        let mut rm = vec![T::zero(); rows];
        let mut cm = vec![T::zero(); cols];
        for i in 0..rows {
            for j in 0..cols {
                let p = table[i * cols + j];
                rm[i] += p;
                cm[j] += p;
            }
        }
        Self { rows, cols, table, row_marginal: ProbVector::from_raw(rm), col_marginal: ProbVector::from_raw(cm) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.table[x * self.cols + y]
    }

    /// `p(x)`, the marginal over rows.
    pub fn row_marginal(&self) -> &ProbVector<T> {
        &self.row_marginal
    }

    /// `p(y)`, the marginal over columns.
    pub fn col_marginal(&self) -> &ProbVector<T> {
        &self.col_marginal
    }

    pub fn transpose(&self) -> Self {
        let mut t = vec![T::zero(); self.table.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[j * self.rows + i] = self.table[i * self.cols + j];
            }
        }
        Self::assemble(self.cols, self.rows, t)
    }

    /// Iterates `(x, y, p(x, y))` over every cell.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let cols = self.cols;
        self.table.iter().enumerate().map(move |(k, &p)| (k / cols, k % cols, p))
    }
}

/// Expected mutual information `I(X; Y)` in bits.
pub fn expected_mi<T: Scalar>(j: &JointDist<T>) -> T {
    let mut acc = T::zero();
    for (x, y, p) in j.cells() {
        if p > T::zero() {
            let ratio = p / (j.row_marginal.get(x) * j.col_marginal.get(y));
            acc += p * ratio.log2();
        }
    }
    acc
}

/// Local (pointwise) mutual information `i(x; y)` in bits.
///
/// Negative exactly when `p(x, y) < p(x) p(y)`; `-inf` when `p(x, y) = 0`.
pub fn local_mi<T: Scalar>(j: &JointDist<T>, x: usize, y: usize) -> Result<T> {
    if x >= j.rows {
        return Err(Error::IndexOutOfRange { index: x, len: j.rows });
    }
    if y >= j.cols {
        return Err(Error::IndexOutOfRange { index: y, len: j.cols });
    }
    let px = j.row_marginal.get(x);
    let py = j.col_marginal.get(y);
    if px <= T::zero() || py <= T::zero() {
        return Err(Error::UndefinedConditional(format!("zero marginal at ({x}, {y}): p(x) = {px}, p(y) = {py}")));
    }
    Ok((j.get(x, y) / (px * py)).log2())
}

/// A row-stochastic matrix `W[i][j] = P(x_t = j | x_{t-1} = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    n: usize,
    data: Vec<T>,
    labels: Vec<String>,
}

impl<T: Scalar> TransitionMatrix<T> {
    /// Strictly validated constructor; labels default to `"0".."N-1"`.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let (n, data) = Self::flatten(rows)?;
        Self::from_flat(n, data)
    }

    /// Accepts rows whose totals are within [`Scalar::renormalize_tol`] of one,
    /// rescaling them. Returns the indices of rescaled rows.
    pub fn renormalized(rows: Vec<Vec<T>>) -> Result<(Self, Vec<usize>)> {
        let (n, mut data) = Self::flatten(rows)?;
        let mut fixed = Vec::new();
        for i in 0..n {
            let row = &mut data[i * n..(i + 1) * n];
            let sum = check_row(row, i)?;
            match total_ok(sum, true) {
                Some(true) => {
                    row.iter_mut().for_each(|p| *p /= sum);
                    fixed.push(i);
                }
                Some(false) => {}
                None => return Err(Error::RowSum { row: i, sum: sum.to_f64_lossy() }),
            }
        }
        Ok((Self { n, data, labels: default_labels(n) }, fixed))
    }

    pub fn from_flat(n: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix has no states".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                what: "square transition matrix",
                expected: n * n,
                found: data.len(),
            });
        }
        for i in 0..n {
            let sum = check_row(&data[i * n..(i + 1) * n], i)?;
            if total_ok(sum, false).is_none() {
                return Err(Error::RowSum { row: i, sum: sum.to_f64_lossy() });
            }
        }
        Ok(Self { n, data, labels: default_labels(n) })
    }

    fn flatten(rows: Vec<Vec<T>>) -> Result<(usize, Vec<T>)> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix has no states".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                what: "square transition matrix row",
                expected: n,
                found: bad.len(),
            });
        }
        Ok((n, rows.into_iter().flatten().collect()))
    }

    /// The identity dynamics on `n` states.
    pub fn identity(n: usize) -> Result<Self> {
        Self::permutation(&(0..n).collect::<Vec<_>>())
    }

    /// Deterministic dynamics `i -> targets[i]`.
    pub fn permutation(targets: &[usize]) -> Result<Self> {
        let n = targets.len();
        let mut data = vec![T::zero(); n * n];
        for (i, &t) in targets.iter().enumerate() {
            if t >= n {
                return Err(Error::IndexOutOfRange { index: t, len: n });
            }
            data[i * n + t] = T::one();
        }
        Self::from_flat(n, data)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { what: "state labels", expected: self.n, found: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.n)
    }

    /// Next-state distribution `prior · W`.
    pub fn propagate(&self, prior: &ProbVector<T>) -> Result<ProbVector<T>> {
        self.check_prior(prior)?;
        Ok(ProbVector::from_raw(self.push(prior.probs())))
    }

    fn push(&self, p: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (i, &pi) in p.iter().enumerate() {
            if pi == T::zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += pi * w;
            }
        }
        out
    }

    pub(crate) fn check_prior(&self, prior: &ProbVector<T>) -> Result<()> {
        if prior.len() != self.n {
            return Err(Error::DimensionMismatch { what: "prior", expected: self.n, found: prior.len() });
        }
        Ok(())
    }

    /// `true` when every row is identical, i.e. the dynamics carry no memory.
    pub fn is_memoryless(&self) -> bool {
        let first = self.row(0);
        self.rows().all(|r| r == first)
    }
}

fn check_row<T: Scalar>(row: &[T], i: usize) -> Result<T> {
    let mut sum = T::zero();
    for (j, &p) in row.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) is {p} (must be finite and non-negative)")));
        }
        sum += p;
    }
    Ok(sum)
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Stationary distribution reached from the uniform start.
///
/// Iterates the lazy chain `(I + W) / 2`, whose powers converge to the same
/// limit as the Cesàro averages of `W` (the spectral projector onto the
/// unit eigenvalue) but geometrically, so periodic chains are handled
/// without the `1/k` tail of plain averaging. Reducible chains return the
/// distribution reachable from uniform.
pub fn stationary<T: Scalar>(w: &TransitionMatrix<T>) -> Result<ProbVector<T>> {
    let n = w.n();
    let mut p = vec![T::one() / T::lit(n as f64); n];
    let half = T::lit(0.5);
    let target = T::stationary_tol() / T::lit(16.0);
    let mut residual = T::infinity();
    for _ in 0..STATIONARY_MAX_ITERATIONS {
        let next = w.push(&p);
        residual = next.iter().zip(&p).map(|(&a, &b)| (a - b).abs()).sum();
        if residual <= target {
            break;
        }
        for (pi, ni) in p.iter_mut().zip(&next) {
            *pi = half * (*pi + *ni);
        }
    }
    if residual > T::stationary_tol() {
        return Err(Error::NonConvergence { iterations: STATIONARY_MAX_ITERATIONS, residual: residual.to_f64_lossy() });
    }
    let total: T = p.iter().copied().sum();
    p.iter_mut().for_each(|x| *x /= total);
    Ok(ProbVector::from_raw(p))
}

/// The joint temporal distribution `p(x_{t-1} = i, x_t = j) = prior_i W_ij`.
pub fn joint_from_tpm<T: Scalar>(w: &TransitionMatrix<T>, prior: &ProbVector<T>) -> Result<JointDist<T>> {
    w.check_prior(prior)?;
    let n = w.n();
    let mut table = Vec::with_capacity(n * n);
    for i in 0..n {
        let pi = prior.get(i);
        table.extend(w.row(i).iter().map(|&x| pi * x));
    }
    Ok(JointDist::assemble(n, n, table))
}

/// One-step excess entropy `I(X_{t-1}; X_t)` under `prior`.
pub fn excess_entropy<T: Scalar>(w: &TransitionMatrix<T>, prior: &ProbVector<T>) -> Result<T> {
    Ok(expected_mi(&joint_from_tpm(w, prior)?))
}

/// Local excess entropy of the transition `i -> j`: `log2(W_ij / (prior·W)_j)`.
pub fn local_excess_entropy<T: Scalar>(
    w: &TransitionMatrix<T>,
    prior: &ProbVector<T>,
    i: usize,
    j: usize,
) -> Result<T> {
    let next = w.propagate(prior)?;
    local_excess_with(w, prior, &next, i, j)
}

pub(crate) fn local_excess_with<T: Scalar>(
    w: &TransitionMatrix<T>,
    prior: &ProbVector<T>,
    next: &ProbVector<T>,
    i: usize,
    j: usize,
) -> Result<T> {
    let n = w.n();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    if prior.get(i) <= T::zero() {
        return Err(Error::UndefinedConditional(format!("past state {} has zero prior probability", w.labels[i])));
    }
    let q = next.get(j);
    if q <= T::zero() {
        return Err(Error::UndefinedConditional(format!("future state {} has zero probability", w.labels[j])));
    }
    Ok((w.get(i, j) / q).log2())
}

/// Every local excess entropy of `W` under `prior`, row-major; `None` where
/// the value is undefined (zero prior at the source or zero mass at the target).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalExcessTable<T> {
    n: usize,
    values: Vec<Option<T>>,
}

impl<T: Scalar> LocalExcessTable<T> {
    pub fn compute(w: &TransitionMatrix<T>, prior: &ProbVector<T>) -> Result<Self> {
        let next = w.propagate(prior)?;
        let n = w.n();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(local_excess_with(w, prior, &next, i, j).ok());
            }
        }
        Ok(Self { n, values })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        self.values[i * self.n + j]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Prior over past states used when localizing excess entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prior {
    /// Maximum-entropy prior, as in effective information.
    #[default]
    Uniform,
    /// The stationary distribution of the dynamics.
    Stationary,
}

impl Prior {
    pub fn resolve<T: Scalar>(self, w: &TransitionMatrix<T>) -> Result<ProbVector<T>> {
        match self {
            Prior::Uniform => ProbVector::uniform(w.n()),
            Prior::Stationary => stationary(w),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Prior::Uniform => "uniform",
            Prior::Stationary => "stationary",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coins(p: [[f64; 2]; 2]) -> JointDist<f64> {
        JointDist::new(p.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let u = ProbVector::<f64>::uniform(4).unwrap();
        assert_abs_diff_eq!(entropy(&u), 2.0, epsilon = 1e-15);
        let pm = ProbVector::<f64>::point_mass(3, 1).unwrap();
        assert_eq!(entropy(&pm), 0.0);
        let b = ProbVector::new(vec![0.9, 0.1]).unwrap();
        assert_abs_diff_eq!(entropy(&b), 0.468_995_593_589_281, epsilon = 1e-12);
    }

    #[test]
    fn entropy_in_f32() {
        let b = ProbVector::<f32>::new(vec![0.9, 0.1]).unwrap();
        assert!((entropy(&b) - 0.468_995_6).abs() < 1e-5);
    }

    #[test]
    fn distribution_validation() {
        assert!(ProbVector::<f64>::new(vec![]).is_err());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.2, -0.2]).is_err());
        assert!(ProbVector::new(vec![0.5, f64::NAN]).is_err());
        // within 1e-6 but not 1e-9: strict rejects, lenient rescales
        assert!(ProbVector::new(vec![0.5, 0.500_000_5]).is_err());
        let (p, fixed) = ProbVector::renormalized(vec![0.5, 0.500_000_5]).unwrap();
        assert!(fixed);
        assert_abs_diff_eq!(p.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        assert!(ProbVector::renormalized(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn expected_mi_examples() {
        assert_eq!(expected_mi(&coins([[0.25, 0.25], [0.25, 0.25]])), 0.0);
        assert_abs_diff_eq!(expected_mi(&coins([[0.5, 0.0], [0.0, 0.5]])), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn expected_mi_matches_weighted_local_mean() {
        let j = coins([[0.45, 0.05], [0.05, 0.45]]);
        let mut acc = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                acc += j.get(x, y) * local_mi(&j, x, y).unwrap();
            }
        }
        assert_abs_diff_eq!(expected_mi(&j), acc, epsilon = 1e-9);
    }

    #[test]
    fn local_mi_examples() {
        let ind = coins([[0.25, 0.25], [0.25, 0.25]]);
        assert_eq!(local_mi(&ind, 0, 0).unwrap(), 0.0);
        let cor = coins([[0.5, 0.0], [0.0, 0.5]]);
        assert_abs_diff_eq!(local_mi(&cor, 0, 0).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(local_mi(&cor, 0, 1).unwrap(), f64::NEG_INFINITY);
        let j = coins([[0.45, 0.05], [0.05, 0.45]]);
        assert_abs_diff_eq!(local_mi(&j, 0, 1).unwrap(), (0.2f64).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(local_mi(&j, 0, 1).unwrap(), -2.321_928_094_887_362, epsilon = 1e-12);
    }

    #[test]
    fn local_mi_zero_marginal_is_undefined() {
        let j = coins([[0.5, 0.5], [0.0, 0.0]]);
        assert!(matches!(local_mi(&j, 1, 0), Err(Error::UndefinedConditional(_))));
        assert!(matches!(local_mi(&j, 2, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn transition_matrix_validation() {
        assert!(TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.8, 0.0]]).is_err());
        assert!(matches!(
            TransitionMatrix::new(vec![vec![0.5, 0.5], vec![0.8, 0.0]]),
            Err(Error::RowSum { row: 1, .. })
        ));
        assert!(TransitionMatrix::new(vec![vec![1.0, 0.0]]).is_err());
        assert!(TransitionMatrix::<f64>::new(vec![]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        let (w, fixed) = TransitionMatrix::renormalized(vec![vec![0.5, 0.500_000_2], vec![0.0, 1.0]]).unwrap();
        assert_eq!(fixed, vec![0]);
        assert_abs_diff_eq!(w.get(0, 0) + w.get(0, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn stationary_examples() {
        let ds = TransitionMatrix::new(vec![vec![0.2, 0.5, 0.3], vec![0.5, 0.3, 0.2], vec![0.3, 0.2, 0.5]]).unwrap();
        let pi = stationary(&ds).unwrap();
        for &p in pi.probs() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-9);
        }

        let absorbing =
            TransitionMatrix::new(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.5, 0.5], vec![0.0, 0.0, 1.0]]).unwrap();
        let pi = stationary(&absorbing).unwrap();
        assert_abs_diff_eq!(pi.get(2), 1.0, epsilon = 1e-8);

        let cycle = TransitionMatrix::<f64>::permutation(&[1, 0]).unwrap();
        let pi = stationary(&cycle).unwrap();
        assert_eq!(pi.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn stationary_handles_periodic_non_uniform_chain() {
        // bipartite, period 2, stationary (0.5, 0.25, 0.25)
        let w = TransitionMatrix::new(vec![vec![0.0, 0.5, 0.5], vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        let pi = stationary(&w).unwrap();
        assert_abs_diff_eq!(pi.get(0), 0.5, epsilon = 1e-8);
        assert_abs_diff_eq!(pi.get(1), 0.25, epsilon = 1e-8);
        let again = stationary(&w).unwrap();
        assert_eq!(pi, again);
    }

    #[test]
    fn joint_from_tpm_examples() {
        let id = TransitionMatrix::<f64>::identity(2).unwrap();
        let u = ProbVector::uniform(2).unwrap();
        let j = joint_from_tpm(&id, &u).unwrap();
        assert_eq!((j.get(0, 0), j.get(0, 1), j.get(1, 1)), (0.5, 0.0, 0.5));

        let w = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let j = joint_from_tpm(&w, &u).unwrap();
        assert_eq!((j.get(0, 0), j.get(0, 1)), (0.45, 0.05));

        let pm = ProbVector::point_mass(2, 1).unwrap();
        let j = joint_from_tpm(&w, &pm).unwrap();
        assert_eq!((j.get(1, 0), j.get(1, 1), j.get(0, 0)), (0.1, 0.9, 0.0));

        let bad = ProbVector::uniform(3).unwrap();
        assert!(matches!(joint_from_tpm(&w, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn excess_entropy_examples() {
        let w = TransitionMatrix::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let u = ProbVector::uniform(2).unwrap();
        assert_abs_diff_eq!(excess_entropy(&w, &u).unwrap(), 0.531_004_406_410_719, epsilon = 1e-12);
        assert_abs_diff_eq!(local_excess_entropy(&w, &u, 0, 0).unwrap(), 0.847_996_906_554_950, epsilon = 1e-12);
        assert_abs_diff_eq!(local_excess_entropy(&w, &u, 0, 1).unwrap(), -2.321_928_094_887_362, epsilon = 1e-12);

        let perm = TransitionMatrix::<f64>::permutation(&[2, 0, 3, 1]).unwrap();
        let u4 = ProbVector::uniform(4).unwrap();
        assert_abs_diff_eq!(excess_entropy(&perm, &u4).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(local_excess_entropy(&perm, &u4, 0, 2).unwrap(), 2.0, epsilon = 1e-12);

        let memoryless = TransitionMatrix::new(vec![vec![0.2, 0.8], vec![0.2, 0.8]]).unwrap();
        assert_abs_diff_eq!(excess_entropy(&memoryless, &u).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(local_excess_entropy(&memoryless, &u, 1, 0).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn local_excess_entropy_preconditions() {
        let w = TransitionMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let pm = ProbVector::point_mass(2, 0).unwrap();
        assert!(matches!(local_excess_entropy(&w, &pm, 1, 0), Err(Error::UndefinedConditional(_))));
        assert!(matches!(local_excess_entropy(&w, &pm, 0, 1), Err(Error::UndefinedConditional(_))));
        let table = LocalExcessTable::compute(&w, &pm).unwrap();
        assert_eq!(table.get(0, 0), Some(0.0));
        assert_eq!(table.get(0, 1), None);
    }
}
