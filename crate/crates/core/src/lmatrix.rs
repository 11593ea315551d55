//! Rank-two matrices `L_u`, the equation `M_u L_x = M_s`, and left
//! generalized inverses.
//!
//! An [`LMatrix`] keeps column `q` of some word matrix and sends every other
//! row to one further column, the column with index `i = n - (S_q, u)`. Column
//! indices are counted in the order `q, 1, 2, ...` with `q` removed from its
//! usual place, so for the usual `q = 1` the index is just the column number.

use std::collections::HashSet;

use serde::Serialize;

use crate::automaton::{Dfa, DfaError, StateSet, Word};
use crate::exactla::{rank_of_word_matrices, Basis, Insertion};
use crate::wordmatrix::{matrix_of_word, MatrixError, WordMatrix};

/// Upper bound on inverses produced by [`generalized_inverses`].
pub const GENERALIZED_INVERSE_CAP: usize = 1_000_000;

/// Above this many free rows, [`solutions_by_subsumption`] counts instead of listing.
pub const SUBSUMPTION_ENUMERATION_LIMIT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LError {
    #[error("column {q} is empty; no L matrix is q-equivalent to it")]
    EmptySinkColumn { q: usize },
    #[error("no canonical L for synchronizing matrix (all units in column {q})")]
    SynchronizingInput { q: usize },
    #[error("the right-hand side is not the synchronizing matrix of state {q}")]
    InconsistentSink { q: usize },
    #[error("M_u L_x differs from M_s")]
    NotASolution,
    #[error("not a left generalized inverse: row {row} misses column {column}")]
    NotGeneralizedInverse { row: usize, column: usize },
    #[error("column {column} of M_u M_a M_a^- lies outside R(u)")]
    TransportPrecondition { column: usize },
    #[error("word does not synchronize to state {q}")]
    NotSynchronizing { q: usize },
    #[error("substituted set {set} does not fit a {n}-state automaton")]
    BadSubstitution { set: String, n: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Automaton(#[from] DfaError),
}

/// Column number of index `i` (1-based) when columns are ordered `q` first.
pub fn column_of_index(n: usize, q: usize, i: usize) -> usize {
    assert!((1..=n).contains(&i) && q < n);
    if i == 1 {
        q
    } else if i - 1 <= q {
        i - 2
    } else {
        i - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LMatrix {
    matrix: WordMatrix,
    q: usize,
    index: usize,
}

impl LMatrix {
    /// The L matrix whose column `q` is exactly `column`. A full column gives
    /// the synchronizing boundary (`i = 1`), kept but flagged non-canonical.
    pub fn from_column(q: usize, column: StateSet) -> Result<Self, LError> {
        let n = column.n();
        if q >= n {
            return Err(MatrixError::StateOutOfRange { state: q + 1, n }.into());
        }
        let k = column.len();
        if k == 0 {
            return Err(LError::EmptySinkColumn { q: q + 1 });
        }
        let index = n - k + 1;
        let other = column_of_index(n, q, index);
        let images = (0..n).map(|r| if column.contains(r) { q } else { other }).collect();
        Ok(LMatrix { matrix: WordMatrix::from_images(images)?, q, index })
    }

    pub fn matrix(&self) -> &WordMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> WordMatrix {
        self.matrix
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `i`: the index of the second nonzero column.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Column number (0-based) holding the off-`q` units.
    pub fn off_column(&self) -> usize {
        column_of_index(self.matrix.n(), self.q, self.index)
    }

    /// `(S_q, ·) = n - i`.
    pub fn series_value(&self) -> i64 {
        (self.matrix.n() - self.index) as i64
    }

    pub fn sink_column(&self) -> StateSet {
        self.matrix.column(self.q)
    }

    /// False for the synchronizing boundary `i = 1`.
    pub fn is_canonical(&self) -> bool {
        self.index > 1
    }
}

/// `L_u`: same column `q` as `m`, all other units in column `i = n - k + 1`
/// where `k` is the unit count of column `q`.
pub fn canonical_l(m: &WordMatrix, q: usize) -> Result<LMatrix, LError> {
    if q >= m.n() {
        return Err(MatrixError::StateOutOfRange { state: q + 1, n: m.n() }.into());
    }
    let column = m.column(q);
    if column.len() == m.n() {
        return Err(LError::SynchronizingInput { q: q + 1 });
    }
    LMatrix::from_column(q, column)
}

fn check_sink(s: &WordMatrix, q: usize) -> Result<(), LError> {
    if q >= s.n() {
        return Err(MatrixError::StateOutOfRange { state: q + 1, n: s.n() }.into());
    }
    if s.column_count(q) != s.n() {
        return Err(LError::InconsistentSink { q: q + 1 });
    }
    Ok(())
}

/// Minimal solution of `M_u L_x = M_s`: column `q` of `L_x` is exactly `R(u)`.
pub fn solve_min(u: &WordMatrix, s: &WordMatrix, q: usize) -> Result<LMatrix, LError> {
    if u.n() != s.n() {
        return Err(MatrixError::DimensionMismatch { left: u.n(), right: s.n() }.into());
    }
    check_sink(s, q)?;
    let l = LMatrix::from_column(q, u.nonzero_columns())?;
    if &u.multiply(l.matrix())? != s {
        return Err(LError::NotASolution);
    }
    Ok(l)
}

#[derive(Clone, Debug)]
pub struct SubsumptionSolutions {
    /// Listed solutions (supersets of the minimal column), smallest column first.
    pub solutions: Vec<LMatrix>,
    /// `2^(n - |R(u)|)`: all supersets, listed or not.
    pub total: u128,
    pub enumerated: bool,
    /// Candidates outside the subsumption order that were checked to fail.
    pub rejected_checked: usize,
    /// Candidates whose behaviour contradicted the subsumption criterion.
    pub violations: usize,
}

/// L matrices solving `M_u L_y = M_s`, i.e. those with `L_x ⊑_q L_y`.
pub fn solutions_by_subsumption(
    min_sol: &LMatrix,
    u: &WordMatrix,
    s: &WordMatrix,
    q: usize,
) -> Result<SubsumptionSolutions, LError> {
    check_sink(s, q)?;
    let n = u.n();
    let base = min_sol.sink_column();
    let free: Vec<usize> = base.complement().iter().collect();
    let total = 1u128 << free.len();
    let enumerated = free.len() <= SUBSUMPTION_ENUMERATION_LIMIT;
    let mut solutions = Vec::new();
    let mut violations = 0;
    if enumerated {
        for mask in 0..(1u64 << free.len()) {
            let mut column = base;
            for (b, &r) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    column.insert(r);
                }
            }
            let l = LMatrix::from_column(q, column)?;
            if &u.multiply(l.matrix())? == s {
                solutions.push(l);
            } else {
                violations += 1;
            }
        }
        solutions.sort_by_key(|l| (l.sink_column().len(), l.sink_column().bits()));
    }
    let mut rejected_checked = 0;
    if n <= SUBSUMPTION_ENUMERATION_LIMIT {
        for bits in 1..(1u64 << n) {
            let column = StateSet::from_bits(n, bits).expect("bits below n");
            if base.is_subset(&column) {
                continue;
            }
            let l = LMatrix::from_column(q, column)?;
            rejected_checked += 1;
            if &u.multiply(l.matrix())? == s {
                violations += 1;
            }
        }
    }
    Ok(SubsumptionSolutions { solutions, total, enumerated, rejected_checked, violations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InversePolicy {
    Canonical,
    All,
    InvertibleOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralizedInverse {
    pub source: WordMatrix,
    pub inverse: WordMatrix,
    /// `(j, i)` for every nonzero column `j` of the source: the chosen unit
    /// `a_{i,j}` that put a unit at `(j, i)` of the inverse.
    pub choices: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct InverseSet {
    pub items: Vec<GeneralizedInverse>,
    pub truncated: bool,
}

/// Checks the defining property: for every nonzero column `j` of `a`, row `j`
/// of `inv` points back at a row `i` with `a_{i,j} = 1`.
pub fn is_generalized_inverse(a: &WordMatrix, inv: &WordMatrix) -> Result<(), LError> {
    if a.n() != inv.n() {
        return Err(MatrixError::DimensionMismatch { left: a.n(), right: inv.n() }.into());
    }
    for j in a.nonzero_columns().iter() {
        if a.image(inv.image(j)) != j {
            return Err(LError::NotGeneralizedInverse { row: j + 1, column: inv.image(j) + 1 });
        }
    }
    Ok(())
}

/// Number of left generalized inverses: the product of the unit counts of
/// the nonzero columns, times `n` choices for every zero column.
pub fn generalized_inverse_count(a: &WordMatrix) -> u128 {
    let n = a.n();
    (0..n)
        .map(|j| match a.column_count(j) {
            0 => n as u128,
            c => c as u128,
        })
        .product()
}

fn build_inverse(a: &WordMatrix, images: Vec<usize>) -> GeneralizedInverse {
    let r = a.nonzero_columns();
    let choices = r.iter().map(|j| (j, images[j])).collect();
    GeneralizedInverse {
        source: a.clone(),
        inverse: WordMatrix::from_images(images).expect("valid columns"),
        choices,
    }
}

pub fn generalized_inverses(a: &WordMatrix, policy: InversePolicy) -> InverseSet {
    generalized_inverses_capped(a, policy, GENERALIZED_INVERSE_CAP)
}

pub fn generalized_inverses_capped(a: &WordMatrix, policy: InversePolicy, cap: usize) -> InverseSet {
    let n = a.n();
    let r = a.nonzero_columns();
    if policy == InversePolicy::Canonical {
        let mut images = vec![usize::MAX; n];
        let mut used = StateSet::empty(n);
        for j in r.iter() {
            let i = a.column(j).iter().next().expect("nonzero column");
            images[j] = i;
            used.insert(i);
        }
        let free = used.complement();
        let mut unused = free.iter();
        for slot in images.iter_mut().filter(|x| **x == usize::MAX) {
            *slot = unused.next().expect("one unused column per zero row");
        }
        return InverseSet { items: vec![build_inverse(a, images)], truncated: false };
    }
    let options: Vec<Vec<usize>> = (0..n)
        .map(|j| if r.contains(j) { a.column(j).iter().collect() } else { (0..n).collect() })
        .collect();
    let distinct = policy == InversePolicy::InvertibleOnly;
    let mut items = Vec::new();
    let mut images = vec![0; n];
    let mut truncated = false;
    enumerate_inverses(a, &options, distinct, 0, 0, &mut images, &mut items, cap, &mut truncated);
    InverseSet { items, truncated }
}

#[allow(clippy::too_many_arguments)]
fn enumerate_inverses(
    a: &WordMatrix,
    options: &[Vec<usize>],
    distinct: bool,
    row: usize,
    used: u64,
    images: &mut Vec<usize>,
    out: &mut Vec<GeneralizedInverse>,
    cap: usize,
    truncated: &mut bool,
) {
    if *truncated {
        return;
    }
    if row == options.len() {
        if out.len() >= cap {
            *truncated = true;
            return;
        }
        out.push(build_inverse(a, images.clone()));
        return;
    }
    for &c in &options[row] {
        if distinct && used >> c & 1 == 1 {
            continue;
        }
        images[row] = c;
        enumerate_inverses(a, options, distinct, row + 1, used | 1 << c, images, out, cap, truncated);
    }
}

/// Outcome of [`inverse_transport`].
#[derive(Clone, Debug)]
pub struct Transport {
    /// `M_u M_a M_a^-`
    pub folded: WordMatrix,
    /// `M_a^- L_x`, a solution of `M_{ua} Y = M_s`.
    pub carried: WordMatrix,
    /// Minimal solution for `M_{ua}`.
    pub minimal: LMatrix,
    pub series_x: i64,
    pub series_y: i64,
}

/// Carries a solution of `M_u L_x = M_s` to `M_{ua} L_y = M_s` through a left
/// generalized inverse of `M_a`, checking every link of the chain
/// `M_u M_a M_a^- L_x = M_{ua} (M_a^- L_x) = M_s`.
pub fn inverse_transport(
    u: &WordMatrix,
    a: &WordMatrix,
    a_inv: &WordMatrix,
    x_sol: &LMatrix,
    q: usize,
) -> Result<Transport, LError> {
    let n = u.n();
    let s = WordMatrix::constant(n, q);
    if u.multiply(x_sol.matrix())? != s {
        return Err(LError::NotASolution);
    }
    is_generalized_inverse(a, a_inv)?;
    let folded = u.multiply(a)?.multiply(a_inv)?;
    let ru = u.nonzero_columns();
    if let Some(col) = folded.nonzero_columns().iter().find(|&c| !ru.contains(c)) {
        return Err(LError::TransportPrecondition { column: col + 1 });
    }
    if folded.multiply(x_sol.matrix())? != s {
        return Err(LError::NotASolution);
    }
    let ua = u.multiply(a)?;
    let carried = a_inv.multiply(x_sol.matrix())?;
    if ua.multiply(&carried)? != s {
        return Err(LError::NotASolution);
    }
    let minimal = solve_min(&ua, &s, q)?;
    let series_x = x_sol.series_value();
    let series_y = minimal.series_value();
    Ok(Transport { folded, carried, minimal, series_x, series_y })
}

/// First generalized inverse of `a` (in enumeration order) meeting the
/// transport precondition for `u`.
pub fn find_transport_inverse(u: &WordMatrix, a: &WordMatrix) -> Option<WordMatrix> {
    let ru = u.nonzero_columns();
    let ua = u.multiply(a).ok()?;
    generalized_inverses(a, InversePolicy::All)
        .items
        .into_iter()
        .map(|g| g.inverse)
        .find(|inv| {
            ua.multiply(inv).is_ok_and(|f| f.nonzero_columns().is_subset(&ru))
        })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainLine {
    pub word: Word,
    /// `c_u`, the image of all states.
    pub image: StateSet,
    /// The set placed in column `q`.
    pub column: StateSet,
    pub substituted: bool,
    /// `column` contains `image`, so the line's L matrix solves `M_u L = M_s`.
    pub solves: bool,
    pub l: LMatrix,
    pub series: i64,
    pub rank_so_far: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub q: usize,
    pub lines: Vec<ChainLine>,
    pub rank: usize,
}

impl ChainReport {
    pub fn target(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    pub fn l_matrices(&self) -> Vec<WordMatrix> {
        self.lines.iter().map(|l| l.l.matrix().clone()).collect()
    }
}

/// Walks the nonempty prefixes of the reset word `s` and builds the L matrix
/// of each image, reporting the rank of the family as it grows.
pub fn independent_chain(dfa: &Dfa, q: usize, s: &Word) -> Result<ChainReport, LError> {
    let lines: Vec<(Word, Option<StateSet>)> = (1..=s.len()).map(|k| (s.prefix(k), None)).collect();
    let last = dfa.image_of_all(s)?;
    if last != StateSet::singleton(dfa.n(), q) {
        return Err(LError::NotSynchronizing { q: q + 1 });
    }
    independent_chain_with(dfa, q, &lines)
}

/// Same as [`independent_chain`] for an explicit list of words, where a line
/// may replace its image by another set (normally a superset).
pub fn independent_chain_with(dfa: &Dfa, q: usize, lines: &[(Word, Option<StateSet>)]) -> Result<ChainReport, LError> {
    let n = dfa.n();
    let mut basis = Basis::new(n);
    let mut out = Vec::with_capacity(lines.len());
    for (word, substitute) in lines {
        let image = dfa.image_of_all(word)?;
        let column = match substitute {
            Some(set) if set.n() != n || set.is_empty() => {
                return Err(LError::BadSubstitution { set: set.to_vector(), n })
            }
            Some(set) => *set,
            None => image,
        };
        let l = LMatrix::from_column(q, column)?;
        basis.insert_word_matrix(l.matrix())?;
        out.push(ChainLine {
            word: word.clone(),
            image,
            column,
            substituted: substitute.is_some_and(|s| s != image),
            solves: image.is_subset(&column),
            series: l.series_value(),
            l,
            rank_so_far: basis.rank(),
        });
    }
    Ok(ChainReport { n, q, rank: basis.rank(), lines: out })
}

/// The L matrices of every prefix of `s` (the minimal solutions for each
/// prefix `u`), deduplicated. Used to widen the span in membership checks.
pub fn prefix_l_family(dfa: &Dfa, q: usize, s: &Word) -> Result<Vec<WordMatrix>, LError> {
    let sink = WordMatrix::constant(dfa.n(), q);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for k in 1..=s.len() {
        let u = matrix_of_word(dfa, &s.prefix(k))?;
        let l = solve_min(&u, &sink, q)?;
        if l.is_canonical() && seen.insert(l.matrix().clone()) {
            out.push(l.into_matrix());
        }
    }
    Ok(out)
}

/// Whether the synchronizing matrix for `q` lies outside the span of `family`.
pub fn sync_matrix_outside_span(family: &[WordMatrix], q: usize) -> Result<bool, LError> {
    let Some(first) = family.first() else { return Ok(true) };
    let n = first.n();
    let mut basis = Basis::new(n);
    for m in family {
        basis.insert_word_matrix(m)?;
    }
    let before = basis.rank();
    let added = matches!(basis.insert_word_matrix(&WordMatrix::constant(n, q))?, Insertion::Added(_));
    debug_assert_eq!(before + usize::from(added), basis.rank());
    Ok(added)
}

pub fn rank(ms: &[WordMatrix]) -> Result<usize, LError> {
    Ok(rank_of_word_matrices(ms)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wm(images: &[usize]) -> WordMatrix {
        WordMatrix::from_images(images.to_vec()).unwrap()
    }

    #[test]
    fn canonical_l_of_the_five_state_example() {
        // column 1 holds rows 2 and 3; the other rows move to column 4
        let mu = wm(&[1, 0, 0, 4, 2]);
        let l = canonical_l(&mu, 0).unwrap();
        assert_eq!(l.matrix(), &wm(&[3, 0, 0, 3, 3]));
        assert_eq!(l.series_value(), 1);
        assert_eq!(l.index(), 4);
        assert!(l.is_canonical());
    }

    #[test]
    fn boundary_index_two() {
        let m = wm(&[0, 0, 0, 3]);
        let l = canonical_l(&m, 0).unwrap();
        assert_eq!(l.index(), 2);
        assert_eq!(l.matrix(), &wm(&[0, 0, 0, 1]));
    }

    #[test]
    fn rejects_synchronizing_and_empty_columns() {
        assert_eq!(canonical_l(&WordMatrix::constant(3, 0), 0), Err(LError::SynchronizingInput { q: 1 }));
        assert!(matches!(canonical_l(&wm(&[1, 1, 2]), 0), Err(LError::EmptySinkColumn { .. })));
    }

    #[test]
    fn column_order_puts_q_first() {
        // q = 2 (0-based 1): index 2 -> column 1, index 3 -> column 3, index 4 -> column 4
        assert_eq!(column_of_index(4, 1, 1), 1);
        assert_eq!(column_of_index(4, 1, 2), 0);
        assert_eq!(column_of_index(4, 1, 3), 2);
        assert_eq!(column_of_index(4, 1, 4), 3);
        assert_eq!(column_of_index(4, 0, 3), 2);
    }

    #[test]
    fn minimal_solution_for_a_sync_word() {
        let s = WordMatrix::constant(4, 0);
        let l = solve_min(&s, &s, 0).unwrap();
        assert_eq!(l.sink_column(), StateSet::singleton(4, 0));
        assert_eq!(l.matrix(), &wm(&[0, 3, 3, 3]));
        assert!(matches!(solve_min(&s, &WordMatrix::constant(4, 2), 0), Err(LError::InconsistentSink { .. })));
        assert!(solve_min(&WordMatrix::identity(3), &s, 0).is_err());
    }

    #[test]
    fn subsumption_listing() {
        let s = WordMatrix::constant(4, 0);
        let u = wm(&[1, 2, 3, 3]);
        let min = solve_min(&u, &s, 0).unwrap();
        let sols = solutions_by_subsumption(&min, &u, &s, 0).unwrap();
        let columns: Vec<String> = sols.solutions.iter().map(|l| l.sink_column().to_string()).collect();
        assert_eq!(columns, vec!["0111", "1111"]);
        assert_eq!(sols.total, 2);
        assert_eq!(sols.violations, 0);
        assert_eq!(sols.rejected_checked, 15 - 2);

        let full = LMatrix::from_column(0, StateSet::full(4)).unwrap();
        let only = solutions_by_subsumption(&full, &WordMatrix::identity(4), &s, 0).unwrap();
        assert_eq!(only.solutions.len(), 1);
        assert!(!only.solutions[0].is_canonical());
    }

    // the singular 5x5 example with both displayed inverses
    #[test]
    fn generalized_inverses_of_the_example() {
        let a = wm(&[1, 1, 4, 2, 2]);
        let all = generalized_inverses(&a, InversePolicy::All);
        assert!(!all.truncated);
        assert_eq!(all.items.len() as u128, generalized_inverse_count(&a));
        assert_eq!(all.items.len(), 100);
        let shown = [wm(&[1, 0, 4, 3, 2]), wm(&[0, 1, 3, 3, 2])];
        for m in &shown {
            assert!(all.items.iter().any(|g| &g.inverse == m), "{m:?}");
            is_generalized_inverse(&a, m).unwrap();
        }
        let canonical = &generalized_inverses(&a, InversePolicy::Canonical).items[0];
        assert!(canonical.inverse.is_permutation());
        let inv = generalized_inverses(&a, InversePolicy::InvertibleOnly);
        assert!(inv.items.iter().all(|g| g.inverse.is_permutation()));
        assert_eq!(inv.items.len(), all.items.iter().filter(|g| g.inverse.is_permutation()).count());
        assert!(inv.items.iter().any(|g| g.inverse == shown[0]));
    }

    #[test]
    fn permutation_has_unique_inverse() {
        let p = wm(&[2, 0, 1, 3]);
        let all = generalized_inverses(&p, InversePolicy::All);
        assert_eq!(all.items.len(), 1);
        assert_eq!(Some(all.items[0].inverse.clone()), p.inverse());
    }

    #[test]
    fn inverse_cap_truncates() {
        let set = generalized_inverses_capped(&WordMatrix::constant(4, 0), InversePolicy::All, 10);
        assert!(set.truncated);
        assert_eq!(set.items.len(), 10);
    }

    #[test]
    fn transport_through_identity() {
        let s = WordMatrix::constant(4, 0);
        let u = wm(&[1, 2, 3, 3]);
        let x = solve_min(&u, &s, 0).unwrap();
        let id = WordMatrix::identity(4);
        let t = inverse_transport(&u, &id, &id, &x, 0).unwrap();
        assert_eq!(&t.minimal, &x);
        assert_eq!(&t.carried, x.matrix());
    }

    #[test]
    fn transport_rejects_bad_inputs() {
        let s = WordMatrix::constant(3, 0);
        let u = wm(&[1, 2, 2]);
        let x = solve_min(&u, &s, 0).unwrap();
        let a = wm(&[1, 1, 2]);
        assert!(matches!(
            inverse_transport(&u, &a, &wm(&[0, 2, 2]), &x, 0),
            Err(LError::NotGeneralizedInverse { .. })
        ));
        let wrong = LMatrix::from_column(0, StateSet::singleton(3, 0)).unwrap();
        assert_eq!(inverse_transport(&u, &a, &wm(&[0, 0, 2]), &wrong, 0).unwrap_err(), LError::NotASolution);
    }
}
