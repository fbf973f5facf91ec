//! Reduced-word enumeration, trace-reality reports and the entry-level
//! reality predicates used by the engine.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::hermitian::GroupElement;
use crate::word::{Letter, Word};

pub const DEFAULT_TOL_REAL: f64 = 1e-8;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("enumeration needs {needed} words, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("no generators given")]
    NoGenerators,
    #[error("maximum word length must be at least 1")]
    ZeroLength,
    #[error("input below the zero threshold: |a| = {a:.3e}, |b| = {b:.3e}")]
    ZeroInput { a: f64, b: f64 },
}

/// Number of nonempty reduced words of length `1..=max_length` over
/// `generators` generators: `Σ 2k(2k−1)^{ℓ−1}`.
pub fn reduced_word_count(generators: usize, max_length: usize) -> u128 {
    let k = generators as u128;
    if k == 0 {
        return 0;
    }
    let mut total = 0u128;
    let mut level = 2 * k;
    for _ in 0..max_length {
        total = total.saturating_add(level);
        level = level.saturating_mul(2 * k - 1);
    }
    total
}

/// Streams reduced words in enumeration order (by length, then
/// lexicographically), each paired with its matrix.
pub struct WordIterator {
    alphabet: Vec<GroupElement>,
    max_length: usize,
    level: Vec<GroupElement>,
    position: usize,
}

impl WordIterator {
    fn new(alphabet: Vec<GroupElement>, first_level: Vec<GroupElement>, max_length: usize) -> Self {
        Self {
            alphabet,
            max_length,
            level: first_level,
            position: 0,
        }
    }

    fn advance_level(&mut self) -> bool {
        let length = self.level.first().map_or(0, |g| g.word().len());
        if length == 0 || length >= self.max_length {
            self.level.clear();
            return false;
        }
        let mut next = Vec::with_capacity(self.level.len() * (self.alphabet.len() - 1).max(1));
        for w in &self.level {
            let last = w.word().last().expect("nonempty word");
            for letter in &self.alphabet {
                let l = letter.word().last().expect("letter");
                if l != last.inverse() {
                    next.push(w.compose(letter));
                }
            }
        }
        self.level = next;
        self.position = 0;
        !self.level.is_empty()
    }
}

impl Iterator for WordIterator {
    type Item = GroupElement;

    fn next(&mut self) -> Option<GroupElement> {
        if self.position >= self.level.len() && !self.advance_level() {
            return None;
        }
        let item = self.level[self.position].clone();
        self.position += 1;
        Some(item)
    }
}

/// Generator elements labelled `g_i` and their inverses, in letter order.
pub fn alphabet(generators: &[GroupElement]) -> Vec<GroupElement> {
    generators
        .iter()
        .enumerate()
        .flat_map(|(i, g)| {
            let g = g.clone().with_word(Word::single(Letter::generator(i)));
            let inv = g.inverse();
            [g, inv]
        })
        .collect()
}

fn check_enumeration(generators: &[GroupElement], max_length: usize, budget: u64) -> Result<(), TraceError> {
    if generators.is_empty() {
        return Err(TraceError::NoGenerators);
    }
    if max_length == 0 {
        return Err(TraceError::ZeroLength);
    }
    let needed = reduced_word_count(generators.len(), max_length);
    if needed > budget as u128 {
        return Err(TraceError::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// All nonempty reduced words up to `max_length`.
pub fn enumerate_words(
    generators: &[GroupElement],
    max_length: usize,
    budget: u64,
) -> Result<WordIterator, TraceError> {
    check_enumeration(generators, max_length, budget)?;
    let letters = alphabet(generators);
    Ok(WordIterator::new(letters.clone(), letters, max_length))
}

/// The reduced words starting with `first`; the prefix classes partition
/// the full enumeration.
pub fn enumerate_words_with_prefix(
    generators: &[GroupElement],
    max_length: usize,
    budget: u64,
    first: Letter,
) -> Result<WordIterator, TraceError> {
    check_enumeration(generators, max_length, budget)?;
    let letters = alphabet(generators);
    let start = letters
        .iter()
        .find(|g| g.word().letters() == [first])
        .cloned()
        .into_iter()
        .collect();
    Ok(WordIterator::new(letters, start, max_length))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceVerdict {
    AllReal,
    NotReal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub max_im_trace: f64,
    /// Word attaining `max_im_trace` (earliest in enumeration order on ties).
    pub witness_word: Option<Word>,
    pub words_checked: u64,
    pub verdict: TraceVerdict,
    pub tol_real: f64,
}

impl TraceReport {
    fn empty(tol_real: f64) -> Self {
        Self {
            max_im_trace: 0.0,
            witness_word: None,
            words_checked: 0,
            verdict: TraceVerdict::AllReal,
            tol_real,
        }
    }

    fn observe(&mut self, g: &GroupElement) {
        self.words_checked += 1;
        let im = g.trace().im.abs();
        let better = match &self.witness_word {
            None => true,
            Some(_) => im > self.max_im_trace,
        };
        if better {
            self.max_im_trace = im;
            self.witness_word = Some(g.word().clone());
        }
        self.refresh_verdict();
    }

    fn refresh_verdict(&mut self) {
        self.verdict = if self.max_im_trace > self.tol_real {
            TraceVerdict::NotReal
        } else {
            TraceVerdict::AllReal
        };
    }

    /// Combines reports over disjoint word sets. Associative and
    /// commutative: ties go to the word earlier in enumeration order.
    pub fn merge(mut self, other: TraceReport) -> TraceReport {
        self.words_checked += other.words_checked;
        let take_other = match (&self.witness_word, &other.witness_word) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => match other.max_im_trace.total_cmp(&self.max_im_trace) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => b.enumeration_cmp(a) == Ordering::Less,
            },
        };
        if take_other {
            self.max_im_trace = other.max_im_trace;
            self.witness_word = other.witness_word;
        }
        self.refresh_verdict();
        self
    }
}

/// Scans every reduced word up to `max_length`.
pub fn trace_reality_report(
    generators: &[GroupElement],
    max_length: usize,
    tol_real: f64,
    budget: u64,
) -> Result<TraceReport, TraceError> {
    let mut report = TraceReport::empty(tol_real);
    for g in enumerate_words(generators, max_length, budget)? {
        report.observe(&g);
    }
    Ok(report)
}

/// Same report as [`trace_reality_report`], with the prefix classes spread
/// over `jobs` threads. The result does not depend on `jobs`.
pub fn trace_reality_report_parallel(
    generators: &[GroupElement],
    max_length: usize,
    tol_real: f64,
    budget: u64,
    jobs: usize,
) -> Result<TraceReport, TraceError> {
    check_enumeration(generators, max_length, budget)?;
    let letters = Letter::alphabet(generators.len());
    let jobs = jobs.clamp(1, letters.len());
    let chunks: Vec<Vec<Letter>> = (0..jobs)
        .map(|j| letters.iter().skip(j).step_by(jobs).copied().collect())
        .collect();

    let partials: Vec<Result<TraceReport, TraceError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    let mut report = TraceReport::empty(tol_real);
                    for &first in chunk {
                        for g in enumerate_words_with_prefix(generators, max_length, budget, first)? {
                            report.observe(&g);
                        }
                    }
                    Ok(report)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("trace worker panicked"))
            .collect()
    });

    partials
        .into_iter()
        .try_fold(TraceReport::empty(tol_real), |acc, r| Ok(acc.merge(r?)))
}

/// Scans lengths in increasing order and stops after the first length that
/// contains a non-real trace; the witness is the worst word of that length.
pub fn trace_screen(
    generators: &[GroupElement],
    max_length: usize,
    tol_real: f64,
    budget: u64,
) -> Result<TraceReport, TraceError> {
    let mut overall = TraceReport::empty(tol_real);
    let mut current = TraceReport::empty(tol_real);
    let mut current_len = 1;
    for g in enumerate_words(generators, max_length, budget)? {
        if g.word().len() != current_len {
            if current.verdict == TraceVerdict::NotReal {
                return Ok(current.merge_count(overall.words_checked));
            }
            overall = overall.merge(current);
            current = TraceReport::empty(tol_real);
            current_len = g.word().len();
        }
        current.observe(&g);
    }
    if current.verdict == TraceVerdict::NotReal {
        return Ok(current.merge_count(overall.words_checked));
    }
    Ok(overall.merge(current))
}

impl TraceReport {
    fn merge_count(mut self, earlier: u64) -> Self {
        self.words_checked += earlier;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerPairBranch {
    RealPair,
    ImaginaryPair,
    HypothesisFailed,
}

/// For nonzero `a`, `b` with `ab` and `ab̄` real, both are real or both are
/// purely imaginary. Reports which, or that the hypotheses fail.
pub fn corner_pair_branch(a: Complex64, b: Complex64, tol: f64) -> Result<CornerPairBranch, TraceError> {
    let (na, nb) = (a.norm(), b.norm());
    if na <= tol || nb <= tol {
        return Err(TraceError::ZeroInput { a: na, b: nb });
    }
    let scale = tol * na * nb;
    if (a * b).im.abs() > scale || (a * b.conj()).im.abs() > scale {
        return Ok(CornerPairBranch::HypothesisFailed);
    }
    let real = a.im.abs() <= tol * na;
    let imaginary = a.re.abs() <= tol * na;
    Ok(match (real, imaginary) {
        (true, false) => CornerPairBranch::RealPair,
        (false, true) => CornerPairBranch::ImaginaryPair,
        _ => CornerPairBranch::HypothesisFailed,
    })
}

/// Imaginary parts of the corner entries and the middle trace,
/// `(Im a, Im t, Im(f + n))`, in coordinates where the diagonal
/// loxodromic normal form belongs to the group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryReality {
    pub im_top_left: f64,
    pub im_bottom_right: f64,
    pub im_middle_trace: f64,
}

impl EntryReality {
    pub fn max(&self) -> f64 {
        self.im_top_left.max(self.im_bottom_right).max(self.im_middle_trace)
    }
}

pub fn entry_reality_check(b: &GroupElement) -> EntryReality {
    let m = b.matrix();
    EntryReality {
        im_top_left: m[(0, 0)].im.abs(),
        im_bottom_right: m[(3, 3)].im.abs(),
        im_middle_trace: (m[(1, 1)] + m[(2, 2)]).im.abs(),
    }
}

pub const PAIRWISE_QUANTITIES: [&str; 6] = [
    "b1 e2 + c1 l2",
    "d1 q2",
    "r1 h2 + s1 p2",
    "q1 d2",
    "e1 b2 + l1 c2 + h1 r2 + p1 s2",
    "f1 f2 + g1 m2 + m1 g2 + n1 n2",
];

/// The six products of entries of two group elements that are real in
/// normalized coordinates, as complex values (same order as
/// [`PAIRWISE_QUANTITIES`]).
pub fn pairwise_quantities(b1: &GroupElement, b2: &GroupElement) -> [Complex64; 6] {
    let x = b1.matrix();
    let y = b2.matrix();
    [
        x[(0, 1)] * y[(1, 0)] + x[(0, 2)] * y[(2, 0)],
        x[(0, 3)] * y[(3, 0)],
        x[(3, 1)] * y[(1, 3)] + x[(3, 2)] * y[(2, 3)],
        x[(3, 0)] * y[(0, 3)],
        x[(1, 0)] * y[(0, 1)] + x[(2, 0)] * y[(0, 2)] + x[(1, 3)] * y[(3, 1)] + x[(2, 3)] * y[(3, 2)],
        x[(1, 1)] * y[(1, 1)] + x[(1, 2)] * y[(2, 1)] + x[(2, 1)] * y[(1, 2)] + x[(2, 2)] * y[(2, 2)],
    ]
}

/// Absolute imaginary parts of [`pairwise_quantities`].
pub fn pairwise_reality_checks(b1: &GroupElement, b2: &GroupElement) -> [f64; 6] {
    pairwise_quantities(b1, b2).map(|z| z.im.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, real_matrix, CMatrix4, I, ONE};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cert(m: CMatrix4) -> GroupElement {
        GroupElement::certify(m, Word::empty(), 1e-12).unwrap()
    }

    fn lox(u: f64, theta: f64) -> GroupElement {
        cert(diag([c(u, 0.0), Complex64::from_polar(1.0, theta), Complex64::from_polar(1.0, -theta), c(1.0 / u, 0.0)]))
    }

    #[test]
    fn one_generator_length_two() {
        let words: Vec<Vec<i32>> = enumerate_words(&[lox(2.0, 0.3)], 2, DEFAULT_BUDGET)
            .unwrap()
            .map(|g| g.word().letters().iter().map(|l| l.signed()).collect())
            .collect();
        assert_eq!(words, vec![vec![1], vec![-1], vec![1, 1], vec![-1, -1]]);
    }

    #[test]
    fn word_counts() {
        let gens = [lox(2.0, 0.3), lox(3.0, 1.0)];
        assert_eq!(enumerate_words(&gens, 1, DEFAULT_BUDGET).unwrap().count(), 4);
        assert_eq!(enumerate_words(&gens, 3, DEFAULT_BUDGET).unwrap().count(), 52);
        assert_eq!(reduced_word_count(2, 3), 52);
        assert_eq!(reduced_word_count(3, 2), 6 + 30);
    }

    #[test]
    fn enumeration_order_is_length_then_lex() {
        let gens = [lox(2.0, 0.3), lox(3.0, 1.0)];
        let words: Vec<Word> = enumerate_words(&gens, 3, DEFAULT_BUDGET)
            .unwrap()
            .map(|g| g.word().clone())
            .collect();
        for pair in words.windows(2) {
            assert_eq!(pair[0].enumeration_cmp(&pair[1]), Ordering::Less);
        }
    }

    #[test]
    fn budget_is_enforced_up_front() {
        let gens = [lox(2.0, 0.3), lox(3.0, 1.0)];
        assert_eq!(
            enumerate_words(&gens, 3, 51).err(),
            Some(TraceError::BudgetExceeded { needed: 52, budget: 51 })
        );
        assert_eq!(enumerate_words(&gens, 0, 10).err(), Some(TraceError::ZeroLength));
        assert_eq!(enumerate_words(&[], 2, 10).err(), Some(TraceError::NoGenerators));
    }

    #[test]
    fn real_generators_give_exactly_real_traces() {
        let boost = cert(real_matrix([
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 0.6, -0.8, 0.0],
            [0.0, 0.8, 0.6, 0.0],
            [0.0, 0.0, 0.0, 0.5],
        ]));
        let swap = cert(real_matrix([
            [0.0, 0.0, 0.0, 1.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]));
        let report = trace_reality_report(&[boost, swap], 5, DEFAULT_TOL_REAL, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.verdict, TraceVerdict::AllReal);
        assert_eq!(report.max_im_trace, 0.0);
        assert_eq!(report.words_checked, reduced_word_count(2, 5) as u64);
    }

    #[test]
    fn non_real_trace_is_witnessed() {
        let g = cert(diag([c(0.0, 2.0), -I, -I, c(0.0, 0.5)]));
        let report = trace_reality_report(&[g], 2, DEFAULT_TOL_REAL, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.verdict, TraceVerdict::NotReal);
        assert!((report.max_im_trace - 0.5).abs() < 1e-14);
        assert_eq!(report.witness_word.unwrap().len(), 1);
    }

    #[test]
    fn parallel_report_matches_sequential() {
        let g = cert(diag([c(0.0, 2.0), -I, -I, c(0.0, 0.5)]));
        let gens = [g, lox(2.0, 0.4)];
        let seq = trace_reality_report(&gens, 4, DEFAULT_TOL_REAL, DEFAULT_BUDGET).unwrap();
        for jobs in 1..=5 {
            let par = trace_reality_report_parallel(&gens, 4, DEFAULT_TOL_REAL, DEFAULT_BUDGET, jobs).unwrap();
            assert_eq!(par, seq, "jobs = {jobs}");
        }
    }

    #[test]
    fn screen_stops_at_first_failing_length() {
        let g = cert(diag([c(0.0, 2.0), -I, -I, c(0.0, 0.5)]));
        let report = trace_screen(&[g, lox(2.0, 0.4)], 4, DEFAULT_TOL_REAL, DEFAULT_BUDGET).unwrap();
        assert_eq!(report.verdict, TraceVerdict::NotReal);
        assert_eq!(report.witness_word.as_ref().unwrap().len(), 1);
        assert_eq!(report.words_checked, 4);
    }

    #[test]
    fn corner_pair_examples() {
        assert_eq!(corner_pair_branch(c(2.0, 0.0), c(3.0, 0.0), 1e-9), Ok(CornerPairBranch::RealPair));
        assert_eq!(corner_pair_branch(c(0.0, 2.0), c(0.0, -1.0), 1e-9), Ok(CornerPairBranch::ImaginaryPair));
        assert_eq!(corner_pair_branch(c(1.0, 1.0), ONE, 1e-9), Ok(CornerPairBranch::HypothesisFailed));
        assert!(matches!(corner_pair_branch(c(0.0, 0.0), ONE, 1e-9), Err(TraceError::ZeroInput { .. })));
    }

    #[test]
    fn entry_reality_examples() {
        let r = entry_reality_check(&lox(3.0, PI / 7.0));
        assert_eq!(r.max(), 0.0);
        let mut m = CMatrix4::identity();
        m[(0, 3)] = I;
        assert_eq!(entry_reality_check(&cert(m)).max(), 0.0);
    }

    #[test]
    fn pairwise_checks_specialize_to_corner_quantities() {
        let m = crate::linalg::real_matrix([
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 0.6, -0.8, 0.0],
            [0.0, 0.8, 0.6, 0.0],
            [0.0, 0.0, 0.0, 0.5],
        ]);
        let b = cert(m);
        assert_eq!(pairwise_reality_checks(&b, &b), [0.0; 6]);

        let mut n = CMatrix4::identity();
        n[(0, 3)] = c(0.0, 1.5);
        let b = cert(n);
        let same = pairwise_quantities(&b, &b);
        assert_eq!(same[1], b.entry(0, 3) * b.entry(3, 0));
        let inv = b.inverse();
        let with_inverse = pairwise_quantities(&b, &inv);
        // B2 = B1⁻¹: d1·q2 = d1·conj(q1).
        assert_eq!(with_inverse[1], b.entry(0, 3) * b.entry(3, 0).conj());
    }
}
