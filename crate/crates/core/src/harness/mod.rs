//! Example automata, their golden `(word, c_u)` tables, and audits built on them.

pub mod census;
pub mod properties;

use serde::Serialize;

use crate::automaton::{shortest_sync_word, Dfa, DfaError, StateSet, Word};
use crate::exactla::{
    all_word_matrices, canonical_basis, canonical_coefficients, coefficient_sum_check, rank_of_word_matrices, Basis,
};
use crate::lmatrix::{independent_chain_with, prefix_l_family, sync_matrix_outside_span, ChainReport, LError};
use crate::wordmatrix::{matrix_of_word, MatrixError, WordMatrix};

pub use census::{audit_small_dfas, CensusOptions, CensusReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("Cerny automaton needs n >= 2, got {0}")]
    CernyTooSmall(usize),
    #[error("golden table line {line}: {message}")]
    Golden { line: usize, message: String },
    #[error(transparent)]
    Automaton(#[from] DfaError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    LMatrix(#[from] LError),
}

fn letters(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| (*s).to_owned()).collect()
}

/// Cerny automaton: `a` is the cycle `i -> i+1` (`n -> 1`), `b` sends state 1
/// to state 2 and fixes every other state. Its shortest reset word,
/// `b (a^{n-1} b)^{n-2}`, has length `(n-1)^2`.
pub fn build_cerny(n: usize) -> Result<Dfa, HarnessError> {
    if n < 2 {
        return Err(HarnessError::CernyTooSmall(n));
    }
    let a = (0..n).map(|i| (i + 1) % n).collect();
    let b = (0..n).map(|i| if i == 0 { 1 } else { i }).collect();
    Ok(Dfa::from_letter_maps(letters(&["a", "b"]), vec![a, b])?)
}

/// The reset word `b (a^{n-1} b)^{n-2}` of [`build_cerny`].
pub fn cerny_reset_word(n: usize) -> Word {
    let mut w = vec![1];
    for _ in 0..n.saturating_sub(2) {
        w.extend(std::iter::repeat_n(0, n - 1));
        w.push(1);
    }
    Word(w)
}

/// Kari's six-state automaton; state `k + 1` is figure label `k`.
pub fn build_kari() -> Dfa {
    Dfa::from_letter_maps(
        letters(&["a", "b"]),
        vec![vec![1, 2, 0, 4, 5, 3], vec![3, 1, 2, 0, 4, 0]],
    )
    .expect("static table")
}

/// Roman's five-state automaton over three letters.
pub fn build_roman() -> Dfa {
    Dfa::from_letter_maps(
        letters(&["a", "b", "c"]),
        vec![vec![2, 0, 0, 3, 4], vec![0, 2, 1, 3, 4], vec![3, 1, 4, 0, 2]],
    )
    .expect("static table")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowNote {
    /// Printed vector is the image.
    Exact,
    /// Printed vector is a superset of the image, used in place of it.
    Superset,
    /// Printed vector is used in place of the image but does not contain it.
    Mismatch,
    /// Printed vector cannot be an image; the corrected image is stored.
    Erratum,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenRow {
    pub line: usize,
    pub word_text: String,
    pub word: Word,
    pub printed: StateSet,
    pub image: StateSet,
    pub note: RowNote,
}

impl GoldenRow {
    /// The set that goes into column `q` of the row's L matrix.
    pub fn chain_column(&self) -> StateSet {
        match self.note {
            RowNote::Exact | RowNote::Superset | RowNote::Mismatch => self.printed,
            RowNote::Erratum => self.image,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenTable {
    pub id: String,
    pub n: usize,
    /// 0-based sink state.
    pub sink: usize,
    /// Figure label to state number, when the source used other labels.
    pub relabel: Vec<(String, usize)>,
    pub rows: Vec<GoldenRow>,
}

impl GoldenTable {
    /// Parses a `.golden` file against the automaton it describes.
    pub fn parse(text: &str, dfa: &Dfa) -> Result<Self, HarnessError> {
        let err = |line: usize, message: String| HarnessError::Golden { line, message };
        let mut id = String::new();
        let mut n = 0;
        let mut sink = None;
        let mut relabel = Vec::new();
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if !raw.contains('\t') {
                let mut toks = body.split_whitespace();
                match toks.next() {
                    Some("automaton") => id = toks.next().unwrap_or_default().to_owned(),
                    Some("states") => {
                        n = toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(line, "bad states".into()))?
                    }
                    Some("sink") => {
                        let s: usize =
                            toks.next().and_then(|t| t.parse().ok()).ok_or_else(|| err(line, "bad sink".into()))?;
                        sink = Some(s.checked_sub(1).ok_or_else(|| err(line, "sink is 1-based".into()))?);
                    }
                    Some("relabel") => {
                        for pair in toks {
                            let (from, to) = pair.split_once(':').ok_or_else(|| err(line, format!("bad pair {pair}")))?;
                            let to: usize = to.parse().map_err(|_| err(line, format!("bad pair {pair}")))?;
                            relabel.push((from.to_owned(), to));
                        }
                    }
                    _ => return Err(err(line, format!("unknown directive '{body}'"))),
                }
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
            if cols.len() < 3 {
                return Err(err(line, "expected word, printed vector, image".into()));
            }
            let word = dfa.parse_word(cols[0])?;
            let printed = StateSet::parse_vector(cols[1]).ok_or_else(|| err(line, "bad printed vector".into()))?;
            let image = match cols[2] {
                "=" => printed,
                v => StateSet::parse_vector(v).ok_or_else(|| err(line, "bad image vector".into()))?,
            };
            let note = match cols.get(3).copied().unwrap_or("") {
                "" if image == printed => RowNote::Exact,
                "superset" if image.is_subset(&printed) && image != printed => RowNote::Superset,
                "mismatch" if !image.is_subset(&printed) => RowNote::Mismatch,
                "erratum" => RowNote::Erratum,
                other => return Err(err(line, format!("inconsistent note '{other}'"))),
            };
            if printed.n() != n || image.n() != n {
                return Err(err(line, format!("vector length differs from {n}")));
            }
            rows.push(GoldenRow { line, word_text: cols[0].to_owned(), word, printed, image, note });
        }
        if n != dfa.n() {
            return Err(err(0, format!("table has {n} states, automaton {}", dfa.n())));
        }
        let sink = sink.ok_or_else(|| err(0, "missing sink".into()))?;
        Ok(GoldenTable { id, n, sink, relabel, rows })
    }
}

pub const KARI_GOLDEN: &str = include_str!("../../data/kari.golden");
pub const CERNY4_GOLDEN: &str = include_str!("../../data/cerny4.golden");
pub const ROMAN_GOLDEN: &str = include_str!("../../data/roman.golden");

/// The three automata with published tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Example {
    Cerny4,
    Kari,
    Roman,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::Cerny4, Example::Kari, Example::Roman];

    pub fn name(self) -> &'static str {
        match self {
            Example::Cerny4 => "cerny4",
            Example::Kari => "kari",
            Example::Roman => "roman",
        }
    }

    pub fn dfa(self) -> Dfa {
        match self {
            Example::Cerny4 => build_cerny(4).expect("n = 4"),
            Example::Kari => build_kari(),
            Example::Roman => build_roman(),
        }
    }

    pub fn golden(self) -> GoldenTable {
        let text = match self {
            Example::Cerny4 => CERNY4_GOLDEN,
            Example::Kari => KARI_GOLDEN,
            Example::Roman => ROMAN_GOLDEN,
        };
        GoldenTable::parse(text, &self.dfa()).expect("bundled table parses")
    }

    /// The published reset word: the last row of the table.
    pub fn reset_word(self) -> Word {
        self.golden().rows.last().expect("nonempty table").word.clone()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayRow {
    pub line: usize,
    pub word: String,
    pub printed: StateSet,
    pub expected: StateSet,
    pub computed: StateSet,
    pub note: RowNote,
}

impl ReplayRow {
    /// The computed image equals the table's image column.
    pub fn matches(&self) -> bool {
        self.computed == self.expected
    }

    /// The computed image is bit-for-bit the printed vector.
    pub fn matches_printed(&self) -> bool {
        self.computed == self.printed
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub id: String,
    pub rows: Vec<ReplayRow>,
}

impl ReplayReport {
    /// Rows whose recorded image is reproduced, excluding errata.
    pub fn reproduced(&self) -> usize {
        self.rows.iter().filter(|r| r.note != RowNote::Erratum && r.matches()).count()
    }

    pub fn checked(&self) -> usize {
        self.rows.iter().filter(|r| r.note != RowNote::Erratum).count()
    }

    pub fn all_match(&self) -> bool {
        self.rows.iter().all(ReplayRow::matches)
    }
}

/// Applies every table word to the full state set.
pub fn replay(dfa: &Dfa, table: &GoldenTable) -> Result<ReplayReport, HarnessError> {
    let rows = table
        .rows
        .iter()
        .map(|r| {
            Ok(ReplayRow {
                line: r.line,
                word: r.word_text.clone(),
                printed: r.printed,
                expected: r.image,
                computed: dfa.image_of_all(&r.word)?,
                note: r.note,
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Ok(ReplayReport { id: table.id.clone(), rows })
}

/// A chain computed on a renumbered copy of an automaton.
#[derive(Clone, Debug)]
pub struct ChainRun {
    /// The automaton as given.
    pub dfa: Dfa,
    /// `perm[old] = new`; the sink is new state 1.
    pub perm: Vec<usize>,
    pub chain: ChainReport,
}

impl ChainRun {
    /// Maps a set in the renumbered automaton back to the original states.
    pub fn restore(&self, set: &StateSet) -> StateSet {
        let mut inverse = vec![0; self.perm.len()];
        for (old, &new) in self.perm.iter().enumerate() {
            inverse[new] = old;
        }
        StateSet::from_states(set.n(), set.iter().map(|s| inverse[s]))
    }

    pub fn sink(&self) -> usize {
        self.perm.iter().position(|&p| p == self.chain.q).expect("perm is a bijection")
    }
}

/// Chain of L matrices over a golden table, after moving the sink to state 1.
pub fn golden_chain(dfa: &Dfa, table: &GoldenTable) -> Result<ChainRun, HarnessError> {
    let (renamed, perm) = dfa.renumber_sink_first(table.sink)?;
    let lines: Vec<(Word, Option<StateSet>)> = table
        .rows
        .iter()
        .map(|r| {
            let col = r.chain_column();
            let moved = StateSet::from_states(col.n(), col.iter().map(|s| perm[s]));
            let image = StateSet::from_states(col.n(), r.image.iter().map(|s| perm[s]));
            (r.word.clone(), (moved != image).then_some(moved))
        })
        .collect();
    let chain = independent_chain_with(&renamed, 0, &lines)?;
    Ok(ChainRun { dfa: dfa.clone(), perm, chain })
}

pub fn example_chain(example: Example) -> Result<ChainRun, HarnessError> {
    golden_chain(&example.dfa(), &example.golden())
}

/// Chain over the prefixes of a reset word (a shortest one by default).
pub fn prefix_chain(dfa: &Dfa, s: Option<Word>) -> Result<ChainRun, HarnessError> {
    let s = match s {
        Some(s) => s,
        None => shortest_sync_word(dfa)?,
    };
    let image = dfa.image_of_all(&s)?;
    if !image.is_singleton() {
        return Err(DfaError::NotSynchronizing.into());
    }
    let sink = image.iter().next().expect("singleton");
    let (renamed, perm) = dfa.renumber_sink_first(sink)?;
    let chain = crate::lmatrix::independent_chain(&renamed, 0, &s)?;
    Ok(ChainRun { dfa: dfa.clone(), perm, chain })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanCheck {
    pub family_size: usize,
    pub family_rank: usize,
    pub sync_outside: bool,
}

/// Is `M_s` outside the span of every L matrix met while building chains for
/// `example`: the golden chain plus the minimal solutions of all prefixes?
pub fn sync_matrix_check(example: Example) -> Result<SpanCheck, HarnessError> {
    let dfa = example.dfa();
    let table = example.golden();
    let run = golden_chain(&dfa, &table)?;
    let (renamed, _) = dfa.renumber_sink_first(table.sink)?;
    let mut family = run.chain.l_matrices();
    family.extend(prefix_l_family(&renamed, 0, &example.reset_word())?);
    family.sort();
    family.dedup();
    Ok(SpanCheck {
        family_size: family.len(),
        family_rank: rank_of_word_matrices(&family)?,
        sync_outside: sync_matrix_outside_span(&family, 0)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SuffixReport {
    pub suffixes: usize,
    pub distinct: usize,
    pub rank: usize,
}

impl SuffixReport {
    pub fn independent(&self) -> bool {
        self.rank == self.distinct
    }
}

/// Exact rank of the matrices of all nonempty suffixes of `s`.
pub fn right_subword_independence(dfa: &Dfa, s: &Word) -> Result<SuffixReport, HarnessError> {
    let mut ms: Vec<WordMatrix> = (0..s.len())
        .map(|i| matrix_of_word(dfa, &s.suffix_from(i)))
        .collect::<Result<_, _>>()?;
    let suffixes = ms.len();
    ms.sort();
    ms.dedup();
    Ok(SuffixReport { suffixes, distinct: ms.len(), rank: rank_of_word_matrices(&ms)? })
}

#[derive(Clone, Debug, Serialize)]
pub struct WordSpaceReport {
    pub n: usize,
    pub k: usize,
    pub matrices: usize,
    pub dimension: usize,
    pub expected: usize,
    pub canonical_rank: usize,
    /// Every matrix lies in the span of the canonical family.
    pub canonical_spans: bool,
    /// The direct coefficients rebuild every matrix.
    pub coefficients_exact: bool,
}

impl WordSpaceReport {
    pub fn holds(&self) -> bool {
        self.dimension == self.expected && self.canonical_rank == self.expected && self.canonical_spans && self.coefficients_exact
    }
}

/// Brute-force dimension of the span of all `k^n` word matrices with units in
/// the first `k` columns, compared with `n(k-1)+1` and the canonical family.
pub fn word_space_dimension(n: usize, k: usize) -> Result<WordSpaceReport, HarnessError> {
    let all = all_word_matrices(n, k);
    let canonical = canonical_basis(n, k)?;
    let mut basis = Basis::new(n);
    for m in &canonical {
        basis.insert_word_matrix(m)?;
    }
    let mut canonical_spans = true;
    let mut coefficients_exact = true;
    for m in &all {
        canonical_spans &= basis.contains(&m.into())?;
        let cs = canonical_coefficients(m, k)?;
        let chk = coefficient_sum_check(&cs, &canonical)?;
        coefficients_exact &= chk.result.as_word_matrix().as_ref() == Some(m);
    }
    Ok(WordSpaceReport {
        n,
        k,
        matrices: all.len(),
        dimension: rank_of_word_matrices(&all)?,
        expected: n * (k - 1) + 1,
        canonical_rank: basis.rank(),
        canonical_spans,
        coefficients_exact,
    })
}
