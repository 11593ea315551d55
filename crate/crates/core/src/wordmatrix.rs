//! Matrices of words: `n x n` 0/1 matrices with exactly one unit per row.
//!
//! A [`WordMatrix`] stores the row-image vector (`row i -> column images[i]`);
//! the dense 0/1 view is derived from it, so the one-unit-per-row shape holds
//! by construction. Products compose row-image maps: `M_u M_v = M_{uv}`.
//!
//! The empty word maps to the identity matrix. That is the unit of the
//! product above; a zero matrix would break `M_u M_empty = M_u`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{Dfa, DfaError, StateSet, Word, MAX_STATES};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state {state} is outside 1..={n}")]
    StateOutOfRange { state: usize, n: usize },
    #[error("row {row} does not hold exactly one unit")]
    NotRowFunctional { row: usize },
    #[error("matrix text: {0}")]
    Parse(String),
    #[error(transparent)]
    Automaton(#[from] DfaError),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordMatrix {
    images: Vec<usize>,
}

impl WordMatrix {
    /// Builds a matrix from its row images (0-based columns).
    pub fn from_images(images: Vec<usize>) -> Result<Self, MatrixError> {
        let n = images.len();
        if n == 0 {
            return Err(MatrixError::Parse("empty matrix".into()));
        }
        if n > MAX_STATES {
            return Err(MatrixError::StateOutOfRange { state: n, n: MAX_STATES });
        }
        if let Some(&bad) = images.iter().find(|&&c| c >= n) {
            return Err(MatrixError::StateOutOfRange { state: bad + 1, n });
        }
        Ok(WordMatrix { images })
    }

    pub fn identity(n: usize) -> Self {
        WordMatrix { images: (0..n).collect() }
    }

    /// Every row has its unit in `column`: the matrix of a word synchronizing to it.
    pub fn constant(n: usize, column: usize) -> Self {
        assert!(column < n);
        WordMatrix { images: vec![column; n] }
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Column of the unit in `row`.
    pub fn image(&self, row: usize) -> usize {
        self.images[row]
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.images[row] == col
    }

    /// `self * other`, i.e. apply `self` first, then `other`.
    pub fn multiply(&self, other: &WordMatrix) -> Result<WordMatrix, MatrixError> {
        self.check_dim(other)?;
        Ok(WordMatrix { images: self.images.iter().map(|&j| other.images[j]).collect() })
    }

    fn check_dim(&self, other: &WordMatrix) -> Result<(), MatrixError> {
        if self.n() != other.n() {
            return Err(MatrixError::DimensionMismatch { left: self.n(), right: other.n() });
        }
        Ok(())
    }

    /// `R(u)`: the set of nonzero columns.
    pub fn nonzero_columns(&self) -> StateSet {
        StateSet::from_states(self.n(), self.images.iter().copied())
    }

    /// Rows with a unit in column `q`.
    pub fn column(&self, q: usize) -> StateSet {
        StateSet::from_states(self.n(), (0..self.n()).filter(|&i| self.images[i] == q))
    }

    pub fn column_count(&self, q: usize) -> usize {
        self.images.iter().filter(|&&c| c == q).count()
    }

    /// Rank over the rationals. A word matrix contains a permutation
    /// submatrix on its nonzero columns, so this is `|R(u)|`; the exact
    /// elimination in [`crate::exactla`] cross-checks it in tests.
    pub fn rank(&self) -> usize {
        self.nonzero_columns().len()
    }

    pub fn is_permutation(&self) -> bool {
        self.rank() == self.n()
    }

    /// Synchronizing matrix: a single nonzero column.
    pub fn is_constant(&self) -> bool {
        self.rank() == 1
    }

    /// Inverse of a permutation matrix (its transpose).
    pub fn inverse(&self) -> Option<WordMatrix> {
        if !self.is_permutation() {
            return None;
        }
        let mut inv = vec![0; self.n()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Some(WordMatrix { images: inv })
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        self.images
            .iter()
            .map(|&j| (0..n).map(|c| u8::from(c == j)).collect())
            .collect()
    }

    /// Builds from a dense 0/1 matrix; every row must have exactly one unit.
    pub fn from_dense(rows: &[Vec<u8>]) -> Result<Self, MatrixError> {
        let n = rows.len();
        let mut images = Vec::with_capacity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::DimensionMismatch { left: n, right: row.len() });
            }
            let ones: Vec<usize> = row.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, _)| j).collect();
            if ones.len() != 1 || row[ones[0]] != 1 {
                return Err(MatrixError::NotRowFunctional { row: i + 1 });
            }
            images.push(ones[0]);
        }
        Self::from_images(images)
    }

    /// `n` lines of `0`/`1` characters.
    pub fn to_grid(&self) -> String {
        self.to_dense()
            .iter()
            .map(|r| r.iter().map(|&v| char::from(b'0' + v)).collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Compact form `row-image: j1 ... jn` with 1-based columns.
    pub fn to_row_image(&self) -> String {
        let cols: Vec<String> = self.images.iter().map(|j| (j + 1).to_string()).collect();
        format!("row-image: {}", cols.join(" "))
    }

    /// Accepts either the grid form or the `row-image:` form.
    pub fn parse(text: &str) -> Result<Self, MatrixError> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("row-image:") {
            let images = rest
                .split_whitespace()
                .map(|t| match t.parse::<usize>() {
                    Ok(c) if c >= 1 => Ok(c - 1),
                    _ => Err(MatrixError::Parse(format!("bad column '{t}'"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Self::from_images(images);
        }
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(MatrixError::Parse(format!("unexpected '{c}'"))),
                    })
                    .collect::<Result<Vec<u8>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_dense(&rows)
    }
}

impl fmt::Debug for WordMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WordMatrix({})", self.to_row_image())
    }
}

impl fmt::Display for WordMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_grid())
    }
}

/// `M_w`: row `i` has its unit in column `i . w`. The empty word gives the identity.
pub fn matrix_of_word(dfa: &Dfa, word: &Word) -> Result<WordMatrix, MatrixError> {
    dfa.check_word(word)?;
    Ok(WordMatrix { images: (0..dfa.n()).map(|s| dfa.run(s, word)).collect() })
}

pub fn letter_matrix(dfa: &Dfa, letter: usize) -> WordMatrix {
    WordMatrix { images: dfa.letter_map(letter).to_vec() }
}

pub fn multiply(a: &WordMatrix, b: &WordMatrix) -> Result<WordMatrix, MatrixError> {
    a.multiply(b)
}

pub fn nonzero_columns(m: &WordMatrix) -> StateSet {
    m.nonzero_columns()
}

fn check_q(a: &WordMatrix, b: &WordMatrix, q: usize) -> Result<(), MatrixError> {
    a.check_dim(b)?;
    if q >= a.n() {
        return Err(MatrixError::StateOutOfRange { state: q + 1, n: a.n() });
    }
    Ok(())
}

/// `a ~_q b`: column `q` of both matrices is equal.
pub fn q_equivalent(a: &WordMatrix, b: &WordMatrix, q: usize) -> Result<bool, MatrixError> {
    check_q(a, b, q)?;
    Ok(a.column(q) == b.column(q))
}

/// `b ⊑_q a`: the units of column `q` of `b` are among those of `a`.
pub fn q_subsumes(a: &WordMatrix, b: &WordMatrix, q: usize) -> Result<bool, MatrixError> {
    check_q(a, b, q)?;
    Ok(b.column(q).is_subset(&a.column(q)))
}

/// Empirical probe: which cells `(i, j)` carry a unit in the matrix of some word.
/// Explores the transition monoid by BFS and stops after `max_elements`
/// distinct matrices; returns the coverage grid and whether the monoid was exhausted.
pub fn cell_coverage(dfa: &Dfa, max_elements: usize) -> (Vec<Vec<bool>>, bool) {
    use std::collections::{HashSet, VecDeque};
    let n = dfa.n();
    let mut cover = vec![vec![false; n]; n];
    let letters: Vec<WordMatrix> = (0..dfa.alphabet_len()).map(|l| letter_matrix(dfa, l)).collect();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    for m in &letters {
        if seen.insert(m.clone()) {
            queue.push_back(m.clone());
        }
    }
    while let Some(m) = queue.pop_front() {
        for (i, &j) in m.images().iter().enumerate() {
            cover[i][j] = true;
        }
        for l in &letters {
            let next = m.multiply(l).expect("same dimension");
            if seen.len() >= max_elements {
                return (cover, false);
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    (cover, true)
}
