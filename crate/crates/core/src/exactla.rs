//! Exact rational linear algebra over flattened `n x n` matrices.
//!
//! Matrices are flattened row-major (`entry (i, j)` sits at `i * n + j`), and
//! every coefficient vector reported by this module follows that order or the
//! insertion order of a [`Basis`]. Arithmetic is on arbitrary-precision
//! rationals, so nothing rounds and nothing overflows.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::automaton::{Dfa, Word};
use crate::wordmatrix::{letter_matrix, matrix_of_word, MatrixError, WordMatrix};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Always `p/q`, including integers (`3/1`), for unambiguous TSV/JSON output.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            (!q.is_zero()).then(|| Rational::new(p, q))
        }
        None => Some(Rational::from_integer(text.parse().ok()?)),
    }
}

/// A square matrix of exact rationals, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zero(n: usize) -> Self {
        RationalMatrix { n, entries: vec![Rational::zero(); n * n] }
    }

    pub fn from_entries(n: usize, entries: Vec<Rational>) -> Result<Self, MatrixError> {
        if entries.len() != n * n {
            return Err(MatrixError::DimensionMismatch { left: n * n, right: entries.len() });
        }
        Ok(RationalMatrix { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.n + col] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn add_scaled(&mut self, factor: &Rational, other: &RationalMatrix) -> Result<(), MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        if factor.is_zero() {
            return Ok(());
        }
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            if !b.is_zero() {
                *a += factor * b;
            }
        }
        Ok(())
    }

    /// Ordinary matrix product.
    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let mut out = RationalMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * n + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row-space rank of the square matrix itself (not of a family).
    pub fn rank(&self) -> usize {
        let rows = self.entries.chunks(self.n).map(<[Rational]>::to_vec).collect();
        rank_of_vectors(rows)
    }

    /// `Some` when the matrix is 0/1 with one unit per row.
    pub fn as_word_matrix(&self) -> Option<WordMatrix> {
        let n = self.n;
        let mut images = Vec::with_capacity(n);
        for row in self.entries.chunks(n) {
            let mut unit = None;
            for (j, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                if !v.is_one() || unit.is_some() {
                    return None;
                }
                unit = Some(j);
            }
            images.push(unit?);
        }
        WordMatrix::from_images(images).ok()
    }
}

impl From<&WordMatrix> for RationalMatrix {
    fn from(m: &WordMatrix) -> Self {
        let n = m.n();
        let mut out = RationalMatrix::zero(n);
        for (i, &j) in m.images().iter().enumerate() {
            out.entries[i * n + j] = Rational::one();
        }
        out
    }
}

impl From<WordMatrix> for RationalMatrix {
    fn from(m: WordMatrix) -> Self {
        RationalMatrix::from(&m)
    }
}

/// `Σ λ_i M_i`.
pub fn linear_combination(terms: &[(Rational, RationalMatrix)]) -> Result<RationalMatrix, MatrixError> {
    let n = terms.first().map_or(0, |(_, m)| m.n());
    let mut acc = RationalMatrix::zero(n);
    for (coef, m) in terms {
        acc.add_scaled(coef, m)?;
    }
    Ok(acc)
}

fn rank_of_vectors(mut rows: Vec<Vec<Rational>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let lead = rows[rank][col].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &lead;
            let (top, bottom) = rows.split_at_mut(r);
            for (x, y) in bottom[0][col..].iter_mut().zip(&top[rank][col..]) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Rank of a family of matrices seen as vectors of length `n^2`.
/// An empty family has rank 0.
pub fn rank_of_family(ms: &[RationalMatrix]) -> Result<usize, MatrixError> {
    let Some(first) = ms.first() else { return Ok(0) };
    if let Some(bad) = ms.iter().find(|m| m.n != first.n) {
        return Err(MatrixError::DimensionMismatch { left: first.n, right: bad.n });
    }
    Ok(rank_of_vectors(ms.iter().map(|m| m.entries.clone()).collect()))
}

pub fn rank_of_word_matrices(ms: &[WordMatrix]) -> Result<usize, MatrixError> {
    let family: Vec<RationalMatrix> = ms.iter().map(RationalMatrix::from).collect();
    rank_of_family(&family)
}

#[derive(Clone, Debug)]
struct EchelonRow {
    pivot: usize,
    vector: Vec<Rational>,
    /// `vector = Σ combo[j] * members[j]`
    combo: Vec<Rational>,
}

/// Outcome of [`Basis::insert`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Insertion {
    /// The matrix was independent and became member number `.0`.
    Added(usize),
    /// Already in the span, with these coefficients over the members.
    InSpan(Vec<Rational>),
}

/// Linearly independent matrices kept in reduced row echelon form of their
/// flattenings, with each echelon row expressed over the original members so
/// membership queries return coefficients for the members themselves.
#[derive(Clone, Debug)]
pub struct Basis {
    n: usize,
    members: Vec<RationalMatrix>,
    rows: Vec<EchelonRow>,
}

impl Basis {
    pub fn new(n: usize) -> Self {
        Basis { n, members: Vec::new(), rows: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[RationalMatrix] {
        &self.members
    }

    fn reduce(&self, m: &RationalMatrix) -> Result<(Vec<Rational>, Vec<Rational>), MatrixError> {
        if m.n != self.n {
            return Err(MatrixError::DimensionMismatch { left: self.n, right: m.n });
        }
        let mut residual = m.entries.clone();
        let mut coeffs = vec![Rational::zero(); self.members.len()];
        for row in &self.rows {
            let f = residual[row.pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in residual.iter_mut().zip(&row.vector) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            for (c, y) in coeffs.iter_mut().zip(&row.combo) {
                if !y.is_zero() {
                    *c += &f * y;
                }
            }
        }
        Ok((residual, coeffs))
    }

    /// Coefficients over the members when `m` is in the span, `None` when independent.
    pub fn express(&self, m: &RationalMatrix) -> Result<Option<Vec<Rational>>, MatrixError> {
        let (residual, coeffs) = self.reduce(m)?;
        Ok(residual.iter().all(Zero::is_zero).then_some(coeffs))
    }

    pub fn contains(&self, m: &RationalMatrix) -> Result<bool, MatrixError> {
        Ok(self.express(m)?.is_some())
    }

    /// Adds `m` if it is independent of the current members; otherwise reports
    /// how it decomposes. Rank grows by at most one.
    pub fn insert(&mut self, m: RationalMatrix) -> Result<Insertion, MatrixError> {
        let (mut residual, coeffs) = self.reduce(&m)?;
        let Some(pivot) = residual.iter().position(|x| !x.is_zero()) else {
            return Ok(Insertion::InSpan(coeffs));
        };
        let index = self.members.len();
        self.members.push(m);
        for row in &mut self.rows {
            row.combo.push(Rational::zero());
        }
        // residual = m - Σ coeffs_j members_j
        let mut combo: Vec<Rational> = coeffs.into_iter().map(|c| -c).collect();
        combo.push(Rational::one());
        let lead = residual[pivot].clone();
        for x in residual.iter_mut().chain(combo.iter_mut()) {
            *x /= &lead;
        }
        for row in &mut self.rows {
            let f = row.vector[pivot].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in row.vector.iter_mut().zip(&residual) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            for (x, y) in row.combo.iter_mut().zip(&combo) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        self.rows.push(EchelonRow { pivot, vector: residual, combo });
        Ok(Insertion::Added(index))
    }

    pub fn insert_word_matrix(&mut self, m: &WordMatrix) -> Result<Insertion, MatrixError> {
        self.insert(RationalMatrix::from(m))
    }
}

/// Result of [`in_span`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanMembership {
    Coefficients(Vec<Rational>),
    Independent,
}

pub fn in_span(m: &RationalMatrix, basis: &Basis) -> Result<SpanMembership, MatrixError> {
    Ok(match basis.express(m)? {
        Some(c) => SpanMembership::Coefficients(c),
        None => SpanMembership::Independent,
    })
}

/// All `k^n` word matrices whose units lie in the first `k` columns.
pub fn all_word_matrices(n: usize, k: usize) -> Vec<WordMatrix> {
    let total = k.checked_pow(n as u32).expect("k^n fits in usize");
    (0..total)
        .map(|mut code| {
            let images = (0..n)
                .map(|_| {
                    let c = code % k;
                    code /= k;
                    c
                })
                .collect();
            WordMatrix::from_images(images).expect("columns below k <= n")
        })
        .collect()
}

/// The spanning family of the `n x k` word matrices: `V_{i,j}` carries a unit
/// at `(i, j)` for `j < k` and units at `(m, k)` for every other row `m`, and
/// `K` has all units in column `k`. Returned in the order `V_{1,1}, V_{1,2},
/// ..., V_{n,k-1}, K`, `n(k-1)+1` matrices. Columns beyond `k` stay zero.
pub fn canonical_basis(n: usize, k: usize) -> Result<Vec<WordMatrix>, MatrixError> {
    if n == 0 || k == 0 || k > n {
        return Err(MatrixError::StateOutOfRange { state: k, n });
    }
    let last = k - 1;
    let mut out = Vec::with_capacity(n * (k - 1) + 1);
    for i in 0..n {
        for j in 0..last {
            let mut images = vec![last; n];
            images[i] = j;
            out.push(WordMatrix::from_images(images)?);
        }
    }
    out.push(WordMatrix::constant(n, last));
    Ok(out)
}

/// Coefficients of `T` over [`canonical_basis`] by the direct construction:
/// one `V_{i,j}` per unit of `T` outside the last column, minus `(m - 1) K`
/// where `m` is the number of such units.
pub fn canonical_coefficients(t: &WordMatrix, k: usize) -> Result<Vec<Rational>, MatrixError> {
    let n = t.n();
    let basis_len = n * (k - 1) + 1;
    if t.images().iter().any(|&c| c >= k) {
        return Err(MatrixError::StateOutOfRange { state: k + 1, n });
    }
    let mut coeffs = vec![Rational::zero(); basis_len];
    let mut m = 0i64;
    for (i, &j) in t.images().iter().enumerate() {
        if j < k - 1 {
            coeffs[i * (k - 1) + j] = Rational::one();
            m += 1;
        }
    }
    coeffs[basis_len - 1] = integer(1 - m);
    Ok(coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CombinationKind {
    WordMatrix,
    Zero,
    NonWord,
}

#[derive(Clone, Debug)]
pub struct CombinationCheck {
    pub sum: Rational,
    pub kind: CombinationKind,
    pub result: RationalMatrix,
    /// Whether the coefficient sum agrees with the classification:
    /// a word matrix needs sum 1, the zero matrix sum 0, and any sum
    /// outside `{0, 1}` must give a non-word.
    pub consistent: bool,
}

/// Forms `Σ λ_i M_i` and classifies it.
pub fn coefficient_sum_check(coeffs: &[Rational], ms: &[WordMatrix]) -> Result<CombinationCheck, MatrixError> {
    if coeffs.len() != ms.len() {
        return Err(MatrixError::DimensionMismatch { left: coeffs.len(), right: ms.len() });
    }
    let n = ms.first().map_or(0, WordMatrix::n);
    let mut result = RationalMatrix::zero(n);
    for (c, m) in coeffs.iter().zip(ms) {
        if m.n() != n {
            return Err(MatrixError::DimensionMismatch { left: n, right: m.n() });
        }
        for (i, &j) in m.images().iter().enumerate() {
            result.entries[i * n + j] += c;
        }
    }
    let sum: Rational = coeffs.iter().sum();
    let kind = if result.is_zero() {
        CombinationKind::Zero
    } else if result.as_word_matrix().is_some() {
        CombinationKind::WordMatrix
    } else {
        CombinationKind::NonWord
    };
    let consistent = match kind {
        CombinationKind::WordMatrix => sum.is_one(),
        CombinationKind::Zero => ms.is_empty() || sum.is_zero(),
        CombinationKind::NonWord => true,
    };
    Ok(CombinationCheck { sum, kind, result, consistent })
}

/// Growth record of [`span_left_closure`].
#[derive(Clone, Debug)]
pub struct LeftClosure {
    pub basis: Basis,
    /// Word of each basis member, in insertion order.
    pub words: Vec<Word>,
    /// Dimension after the seeds, then after each round of left letter products.
    pub trace: Vec<usize>,
    /// True when a round added nothing, so the span is closed under left
    /// multiplication by letters.
    pub fixpoint: bool,
    pub products_tested: usize,
}

/// Default insertion cap: the `n(n-1)+1` ceiling on independent word matrices.
pub fn default_closure_cap(n: usize) -> usize {
    n * (n - 1) + 1
}

/// Grows the span of the seed words' matrices by left letter products
/// `M_{βw}` until a round adds nothing or `cap` members exist. The number of
/// products tested is bounded by `4 * cap * |Σ|`; hitting either limit leaves
/// `fixpoint` false.
pub fn span_left_closure(dfa: &Dfa, seeds: &[Word], cap: Option<usize>) -> Result<LeftClosure, MatrixError> {
    let n = dfa.n();
    let cap = cap.unwrap_or_else(|| default_closure_cap(n));
    let product_budget = 4 * cap * dfa.alphabet_len().max(1);
    let letters: Vec<WordMatrix> = (0..dfa.alphabet_len()).map(|l| letter_matrix(dfa, l)).collect();
    let mut basis = Basis::new(n);
    let mut words = Vec::new();
    let mut matrices: Vec<WordMatrix> = Vec::new();
    let mut seen = HashSet::new();
    let mut frontier = Vec::new();
    for w in seeds {
        let m = matrix_of_word(dfa, w)?;
        if !seen.insert(m.clone()) || basis.rank() >= cap {
            continue;
        }
        if let Insertion::Added(_) = basis.insert_word_matrix(&m)? {
            words.push(w.clone());
            matrices.push(m);
            frontier.push(words.len() - 1);
        }
    }
    let mut trace = vec![basis.rank()];
    let mut products_tested = 0;
    let mut fixpoint = false;
    'rounds: loop {
        let mut next = Vec::new();
        for &idx in &frontier {
            for (l, lm) in letters.iter().enumerate() {
                if basis.rank() >= cap || products_tested >= product_budget {
                    trace.push(basis.rank());
                    break 'rounds;
                }
                products_tested += 1;
                let m = lm.multiply(&matrices[idx])?;
                if !seen.insert(m.clone()) {
                    continue;
                }
                if let Insertion::Added(_) = basis.insert_word_matrix(&m)? {
                    let mut w = vec![l];
                    w.extend_from_slice(words[idx].letters());
                    words.push(Word(w));
                    matrices.push(m);
                    next.push(words.len() - 1);
                }
            }
        }
        trace.push(basis.rank());
        if next.is_empty() {
            fixpoint = true;
            break;
        }
        frontier = next;
    }
    Ok(LeftClosure { basis, words, trace, fixpoint, products_tested })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wm(images: &[usize]) -> WordMatrix {
        WordMatrix::from_images(images.to_vec()).unwrap()
    }

    #[test]
    fn empty_family_has_rank_zero() {
        assert_eq!(rank_of_family(&[]).unwrap(), 0);
        assert_eq!(rank_of_word_matrices(&[wm(&[0, 0])]).unwrap(), 1);
        assert!(rank_of_family(&[RationalMatrix::zero(2), RationalMatrix::zero(3)]).is_err());
    }

    #[test]
    fn basis_members_express_as_unit_vectors() {
        let ms = canonical_basis(3, 2).unwrap();
        let mut basis = Basis::new(3);
        for m in &ms {
            assert!(matches!(basis.insert_word_matrix(m).unwrap(), Insertion::Added(_)));
        }
        for (i, m) in ms.iter().enumerate() {
            let SpanMembership::Coefficients(c) = in_span(&m.into(), &basis).unwrap() else {
                panic!("member not in span");
            };
            for (j, x) in c.iter().enumerate() {
                assert_eq!(x, &integer(i64::from(i == j)));
            }
        }
    }

    #[test]
    fn dependent_insert_reports_coefficients() {
        // V_{1,1} + V_{3,2} - K is the word matrix with row 1 -> col 1, row 3 -> col 2.
        let ms = canonical_basis(4, 3).unwrap();
        let mut basis = Basis::new(4);
        for m in &ms {
            basis.insert_word_matrix(m).unwrap();
        }
        let t = wm(&[0, 2, 1, 2]);
        let Insertion::InSpan(c) = basis.insert_word_matrix(&t).unwrap() else {
            panic!("expected span membership");
        };
        assert_eq!(c, canonical_coefficients(&t, 3).unwrap());
        assert_eq!(c[0], integer(1));
        assert_eq!(c[2 * 2 + 1], integer(1));
        assert_eq!(c[8], integer(-1));
        assert_eq!(basis.rank(), 9);
    }

    #[test]
    fn canonical_basis_shapes() {
        assert_eq!(canonical_basis(3, 2).unwrap().len(), 4);
        assert_eq!(canonical_basis(4, 3).unwrap().len(), 9);
        assert_eq!(canonical_basis(2, 1).unwrap(), vec![WordMatrix::constant(2, 0)]);
        assert!(canonical_basis(2, 3).is_err());
        assert!(canonical_basis(3, 0).is_err());
    }

    #[test]
    fn combination_classes() {
        let a = wm(&[1, 0, 2]);
        let b = wm(&[2, 2, 0]);
        let one = coefficient_sum_check(&[integer(1)], std::slice::from_ref(&a)).unwrap();
        assert_eq!(one.kind, CombinationKind::WordMatrix);
        assert_eq!(one.sum, integer(1));
        let zero = coefficient_sum_check(&[integer(1), integer(-1)], &[a.clone(), a.clone()]).unwrap();
        assert_eq!(zero.kind, CombinationKind::Zero);
        assert!(zero.consistent);
        let half = coefficient_sum_check(&[rational(1, 4), rational(1, 4)], &[a, b]).unwrap();
        assert_eq!(half.kind, CombinationKind::NonWord);
        assert_eq!(half.sum, rational(1, 2));
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(format_rational(&rational(-6, 4)), "-3/2");
        assert_eq!(format_rational(&integer(3)), "3/1");
        assert_eq!(parse_rational("-3/2"), Some(rational(-3, 2)));
        assert_eq!(parse_rational("7"), Some(integer(7)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn square_rank_matches_nonzero_columns() {
        for m in all_word_matrices(3, 3) {
            assert_eq!(RationalMatrix::from(&m).rank(), m.rank(), "{m:?}");
        }
    }
}
