//! Complete deterministic automata, words, state subsets and reset-word search.
//!
//! States are indexed from `0` internally; every text format (the DFA file,
//! c-vectors, matrix displays) uses 1-based state numbers. Letters are indices
//! into the automaton's ordered alphabet, so the declared order doubles as the
//! tie-break order for every search in this module.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of states a [`StateSet`] (and so a [`Dfa`]) can hold.
pub const MAX_STATES: usize = 64;

/// Largest automaton handed to the exact subset BFS. The visited table is
/// dense (`4 * 2^n` bytes), so 24 states cost 64 MiB.
pub const MAX_BFS_STATES: usize = 24;

/// The alphabet is capped so a BFS parent entry (mask and letter) fits in one
/// `u32` without touching the two sentinel values.
pub const MAX_LETTERS: usize = 254;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DfaError {
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("automaton has {0} states, more than the supported {MAX_STATES}")]
    TooManyStates(usize),
    #[error("alphabet must contain at least one letter")]
    EmptyAlphabet,
    #[error("alphabet has {0} letters, more than the supported {MAX_LETTERS}")]
    TooManyLetters(usize),
    #[error("alphabet contains duplicate letter '{0}'")]
    DuplicateLetter(String),
    #[error("letter '{0}' is not part of the alphabet")]
    UnknownLetter(String),
    #[error("incomplete: no transition from state {state} on letter '{letter}'")]
    Incomplete { state: usize, letter: String },
    #[error("state {state} is outside 1..={n}")]
    StateOutOfRange { state: usize, n: usize },
    #[error("state set of length {got} used with a {expected}-state automaton")]
    LengthMismatch { expected: usize, got: usize },
    #[error("exact search is limited to {MAX_BFS_STATES} states, automaton has {0}")]
    SearchTooLarge(usize),
    #[error("automaton is not synchronizing")]
    NotSynchronizing,
    #[error("invalid state permutation")]
    BadPermutation,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A subset of states, stored as a bit mask. Bit `j` stands for state `j + 1`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StateSet {
    n: usize,
    bits: u64,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_STATES, "state sets hold at most {MAX_STATES} states");
        StateSet { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        set.bits = low_mask(n);
        set
    }

    pub fn singleton(n: usize, state: usize) -> Self {
        let mut set = Self::empty(n);
        set.insert(state);
        set
    }

    pub fn from_states(n: usize, states: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for s in states {
            set.insert(s);
        }
        set
    }

    /// Builds a set from raw bits; bits at or above `n` are rejected.
    pub fn from_bits(n: usize, bits: u64) -> Option<Self> {
        (n <= MAX_STATES && bits & !low_mask(n) == 0).then_some(StateSet { n, bits })
    }

    /// Parses a characteristic vector such as `011011` (first character is state 1).
    pub fn parse_vector(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() || text.len() > MAX_STATES {
            return None;
        }
        let mut set = Self::empty(text.len());
        for (j, ch) in text.chars().enumerate() {
            match ch {
                '1' => set.insert(j),
                '0' => {}
                _ => return None,
            }
        }
        Some(set)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn contains(&self, state: usize) -> bool {
        state < self.n && self.bits >> state & 1 == 1
    }

    pub fn insert(&mut self, state: usize) {
        assert!(state < self.n, "state {state} outside a set of length {}", self.n);
        self.bits |= 1 << state;
    }

    pub fn remove(&mut self, state: usize) {
        if state < self.n {
            self.bits &= !(1 << state);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_singleton(&self) -> bool {
        self.len() == 1
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet { n: self.n, bits: self.bits | other.bits }
    }

    pub fn complement(&self) -> StateSet {
        StateSet { n: self.n, bits: !self.bits & low_mask(self.n) }
    }

    /// Members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..self.n).filter(move |j| bits >> j & 1 == 1)
    }

    /// The characteristic vector, e.g. `111110`.
    pub fn to_vector(&self) -> String {
        (0..self.n).map(|j| if self.contains(j) { '1' } else { '0' }).collect()
    }
}

impl fmt::Display for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_vector())
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StateSet({})", self.to_vector())
    }
}

fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A word as a sequence of letter indices. The empty word is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    pub fn suffix_from(&self, start: usize) -> Word {
        Word(self.0[start..].to_vec())
    }
}

/// A complete deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dfa {
    n: usize,
    letters: Vec<String>,
    /// `delta[letter * n + state]`
    delta: Vec<usize>,
}

impl Dfa {
    /// Builds and validates an automaton from per-letter image tables
    /// (`images[letter][state]`, 0-based states).
    pub fn from_letter_maps(letters: Vec<String>, images: Vec<Vec<usize>>) -> Result<Self, DfaError> {
        let n = images.first().map_or(0, Vec::len);
        check_alphabet(&letters)?;
        if n == 0 {
            return Err(DfaError::NoStates);
        }
        if n > MAX_STATES {
            return Err(DfaError::TooManyStates(n));
        }
        if images.len() != letters.len() {
            let letter = letters.get(images.len()).cloned().unwrap_or_default();
            return Err(DfaError::Incomplete { state: 1, letter });
        }
        let mut delta = Vec::with_capacity(n * letters.len());
        for (l, row) in images.iter().enumerate() {
            if row.len() != n {
                return Err(DfaError::Incomplete {
                    state: row.len().min(n) + 1,
                    letter: letters[l].clone(),
                });
            }
            for &img in row {
                if img >= n {
                    return Err(DfaError::StateOutOfRange { state: img + 1, n });
                }
                delta.push(img);
            }
        }
        Ok(Dfa { n, letters, delta })
    }

    /// Builds an automaton from the row layout used by the text format:
    /// `rows[state][letter]` holds the image, `None` marks a missing transition.
    pub fn from_state_rows(letters: Vec<String>, rows: Vec<Vec<Option<usize>>>) -> Result<Self, DfaError> {
        check_alphabet(&letters)?;
        let n = rows.len();
        if n == 0 {
            return Err(DfaError::NoStates);
        }
        let mut images = vec![vec![0; n]; letters.len()];
        for (state, row) in rows.iter().enumerate() {
            for (l, letter) in letters.iter().enumerate() {
                match row.get(l).copied().flatten() {
                    Some(img) => images[l][state] = img,
                    None => {
                        return Err(DfaError::Incomplete { state: state + 1, letter: letter.clone() })
                    }
                }
            }
            if row.len() > letters.len() {
                return Err(DfaError::Parse {
                    line: state + 3,
                    message: format!("state {} lists more images than letters", state + 1),
                });
            }
        }
        Self::from_letter_maps(letters, images)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_len(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter_index(&self, symbol: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == symbol)
    }

    #[inline]
    pub fn step(&self, state: usize, letter: usize) -> usize {
        self.delta[letter * self.n + state]
    }

    /// Image map of one letter, indexed by state.
    pub fn letter_map(&self, letter: usize) -> &[usize] {
        &self.delta[letter * self.n..(letter + 1) * self.n]
    }

    pub fn run(&self, state: usize, word: &Word) -> usize {
        word.0.iter().fold(state, |s, &l| self.step(s, l))
    }

    /// Parses a word. Without whitespace every character is one letter;
    /// with whitespace the tokens are letters (for multi-character symbols).
    pub fn parse_word(&self, text: &str) -> Result<Word, DfaError> {
        let text = text.trim();
        let tokens: Vec<String> = if text.contains(char::is_whitespace) {
            text.split_whitespace().map(str::to_owned).collect()
        } else {
            text.chars().map(String::from).collect()
        };
        tokens
            .into_iter()
            .map(|t| self.letter_index(&t).ok_or(DfaError::UnknownLetter(t)))
            .collect::<Result<_, _>>()
            .map(Word)
    }

    pub fn format_word(&self, word: &Word) -> String {
        let single = self.letters.iter().all(|l| l.chars().count() == 1);
        let parts: Vec<&str> = word.0.iter().map(|&l| self.letters[l].as_str()).collect();
        if single {
            parts.concat()
        } else {
            parts.join(" ")
        }
    }

    /// Checks that `word` only uses letters of this automaton.
    pub fn check_word(&self, word: &Word) -> Result<(), DfaError> {
        match word.0.iter().find(|&&l| l >= self.letters.len()) {
            Some(&l) => Err(DfaError::UnknownLetter(format!("#{l}"))),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn image_bits(&self, bits: u64, letter: usize) -> u64 {
        let map = self.letter_map(letter);
        let mut out = 0u64;
        let mut rest = bits;
        while rest != 0 {
            let s = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1 << map[s];
        }
        out
    }

    /// The image `Pw` of `set` under `word`, letter by letter.
    pub fn apply(&self, set: &StateSet, word: &Word) -> Result<StateSet, DfaError> {
        if set.n() != self.n {
            return Err(DfaError::LengthMismatch { expected: self.n, got: set.n() });
        }
        self.check_word(word)?;
        let bits = word.0.iter().fold(set.bits(), |b, &l| self.image_bits(b, l));
        Ok(StateSet { n: self.n, bits })
    }

    /// `c_w`: the image of the full state set.
    pub fn image_of_all(&self, word: &Word) -> Result<StateSet, DfaError> {
        self.apply(&StateSet::full(self.n), word)
    }

    pub fn is_strongly_connected(&self) -> bool {
        let forward = self.reachable_from(0, false);
        let backward = self.reachable_from(0, true);
        forward.iter().all(|&x| x) && backward.iter().all(|&x| x)
    }

    fn reachable_from(&self, start: usize, reverse: bool) -> Vec<bool> {
        let mut adj = vec![Vec::new(); self.n];
        for l in 0..self.alphabet_len() {
            for s in 0..self.n {
                let t = self.step(s, l);
                if reverse {
                    adj[t].push(s);
                } else {
                    adj[s].push(t);
                }
            }
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(s) = stack.pop() {
            for &t in &adj[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Relabels states: old state `i` becomes `perm[i]`.
    pub fn permute_states(&self, perm: &[usize]) -> Result<Dfa, DfaError> {
        if perm.len() != self.n {
            return Err(DfaError::BadPermutation);
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(DfaError::BadPermutation);
            }
        }
        let images = (0..self.alphabet_len())
            .map(|l| {
                let mut row = vec![0; self.n];
                for s in 0..self.n {
                    row[perm[s]] = perm[self.step(s, l)];
                }
                row
            })
            .collect();
        Dfa::from_letter_maps(self.letters.clone(), images)
    }

    /// Swaps `sink` with state 1 so the fixed state of a reset word is state 1.
    /// Returns the relabelled automaton and the permutation used.
    pub fn renumber_sink_first(&self, sink: usize) -> Result<(Dfa, Vec<usize>), DfaError> {
        if sink >= self.n {
            return Err(DfaError::StateOutOfRange { state: sink + 1, n: self.n });
        }
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.swap(0, sink);
        Ok((self.permute_states(&perm)?, perm))
    }
}

fn check_alphabet(letters: &[String]) -> Result<(), DfaError> {
    if letters.is_empty() {
        return Err(DfaError::EmptyAlphabet);
    }
    if letters.len() > MAX_LETTERS {
        return Err(DfaError::TooManyLetters(letters.len()));
    }
    for (i, l) in letters.iter().enumerate() {
        if letters[..i].contains(l) {
            return Err(DfaError::DuplicateLetter(l.clone()));
        }
    }
    Ok(())
}

/// Result of [`validate`]: the automaton plus the connectivity flag.
#[derive(Clone, Debug)]
pub struct Checked {
    pub dfa: Dfa,
    pub strongly_connected: bool,
}

/// Construction already enforces completeness; this reports strong connectivity,
/// which is a warning rather than an error.
pub fn validate(dfa: Dfa) -> Checked {
    let strongly_connected = dfa.is_strongly_connected();
    Checked { dfa, strongly_connected }
}

fn pair_index(n: usize, p: usize, q: usize) -> usize {
    let (a, b) = if p < q { (p, q) } else { (q, p) };
    a * n + b
}

/// Shortest merging words for every pair of states, by backward BFS on the
/// pair automaton. Entry `a * n + b` (`a < b`) holds the first letter and the
/// pair reached after it; `None` marks a pair that can never be merged.
struct PairTable {
    n: usize,
    dist: Vec<u32>,
    next: Vec<Option<(usize, usize, usize)>>,
}

impl PairTable {
    const UNREACHED: u32 = u32::MAX;

    fn build(dfa: &Dfa) -> Self {
        let n = dfa.n();
        let k = dfa.alphabet_len();
        let mut preimages: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; k];
        for l in 0..k {
            for s in 0..n {
                preimages[l][dfa.step(s, l)].push(s);
            }
        }
        let mut dist = vec![Self::UNREACHED; n * n];
        let mut next = vec![None; n * n];
        let mut queue = VecDeque::new();
        // Distance 1: pairs merged by a single letter, in letter order.
        for (l, by_target) in preimages.iter().enumerate() {
            for (t, pre) in by_target.iter().enumerate() {
                for (i, &p) in pre.iter().enumerate() {
                    for &q in &pre[i + 1..] {
                        let idx = pair_index(n, p, q);
                        if dist[idx] == Self::UNREACHED {
                            dist[idx] = 1;
                            next[idx] = Some((l, t, t));
                            queue.push_back((p.min(q), p.max(q)));
                        }
                    }
                }
            }
        }
        while let Some((a, b)) = queue.pop_front() {
            let d = dist[a * n + b];
            for (l, by_target) in preimages.iter().enumerate() {
                for &p in &by_target[a] {
                    for &q in &by_target[b] {
                        if p == q {
                            continue;
                        }
                        let idx = pair_index(n, p, q);
                        if dist[idx] == Self::UNREACHED {
                            dist[idx] = d + 1;
                            next[idx] = Some((l, a, b));
                            queue.push_back((p.min(q), p.max(q)));
                        }
                    }
                }
            }
        }
        PairTable { n, dist, next }
    }

    fn distance(&self, p: usize, q: usize) -> Option<u32> {
        let d = self.dist[pair_index(self.n, p, q)];
        (d != Self::UNREACHED).then_some(d)
    }

    fn merging_word(&self, p: usize, q: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let (mut a, mut b) = (p, q);
        while a != b {
            let (l, na, nb) = self.next[pair_index(self.n, a, b)].expect("pair is mergeable");
            word.push(l);
            a = na;
            b = nb;
        }
        word
    }
}

/// True iff some word maps all states to one. Every pair must be mergeable.
pub fn is_synchronizing(dfa: &Dfa) -> bool {
    let table = PairTable::build(dfa);
    let n = dfa.n();
    (0..n).all(|p| (p + 1..n).all(|q| table.distance(p, q).is_some()))
}

/// A shortest reset word found by breadth-first search over subset images.
///
/// Letters are tried in alphabet order and the first discovery of a subset is
/// kept, so the returned witness is the same on every run.
pub fn shortest_sync_word(dfa: &Dfa) -> Result<Word, DfaError> {
    let n = dfa.n();
    if n > MAX_BFS_STATES {
        return Err(DfaError::SearchTooLarge(n));
    }
    if n == 1 {
        return Ok(Word::empty());
    }
    // parent[mask] = (previous mask << 8) | letter; the full set is the root.
    const UNSEEN: u32 = u32::MAX;
    const ROOT: u32 = u32::MAX - 1;
    let full = low_mask(n) as u32;
    let mut parent = vec![UNSEEN; 1usize << n];
    parent[full as usize] = ROOT;
    let mut queue = VecDeque::from([full]);
    let k = dfa.alphabet_len();
    while let Some(mask) = queue.pop_front() {
        for l in 0..k {
            let next = dfa.image_bits(mask as u64, l) as u32;
            if parent[next as usize] != UNSEEN {
                continue;
            }
            parent[next as usize] = (mask << 8) | l as u32;
            if next.count_ones() == 1 {
                let mut letters = Vec::new();
                let mut cur = next;
                while parent[cur as usize] != ROOT {
                    let entry = parent[cur as usize];
                    letters.push((entry & 0xff) as usize);
                    cur = entry >> 8;
                }
                letters.reverse();
                return Ok(Word(letters));
            }
            queue.push_back(next);
        }
    }
    Err(DfaError::NotSynchronizing)
}

/// Length of a shortest reset word, or `None` for a non-synchronizing automaton.
pub fn reset_threshold(dfa: &Dfa) -> Result<Option<usize>, DfaError> {
    match shortest_sync_word(dfa) {
        Ok(w) => Ok(Some(w.len())),
        Err(DfaError::NotSynchronizing) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Greedy pair-merging reset word: while the current image has two or more
/// states, append a shortest word merging the closest pair in it.
pub fn greedy_sync_word(dfa: &Dfa) -> Result<Word, DfaError> {
    let table = PairTable::build(dfa);
    let n = dfa.n();
    let mut current = StateSet::full(n);
    let mut word = Vec::new();
    while current.len() > 1 {
        let members: Vec<usize> = current.iter().collect();
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, &p) in members.iter().enumerate() {
            for &q in &members[i + 1..] {
                let d = table.distance(p, q).ok_or(DfaError::NotSynchronizing)?;
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, p, q));
                }
            }
        }
        let (_, p, q) = best.expect("at least two states");
        let piece = Word(table.merging_word(p, q));
        current = dfa.apply(&current, &piece)?;
        word.extend(piece.0);
    }
    let word = Word(word);
    debug_assert!(dfa.image_of_all(&word).is_ok_and(|s| s.is_singleton()));
    Ok(word)
}

/// Reads the line-oriented DFA format:
///
/// ```text
/// dfa <n> <k>
/// letters <l1> ... <lk>
/// state <i>: <image under l1> ... <image under lk>
/// ```
///
/// `#` starts a comment; blank lines are ignored.
pub fn parse_dfa(text: &str) -> Result<Dfa, DfaError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, message: &str| DfaError::Parse { line, message: message.to_owned() };

    let (hline, header) = lines.next().ok_or_else(|| perr(0, "empty input"))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 || head[0] != "dfa" {
        return Err(perr(hline, "expected `dfa <n> <k>`"));
    }
    let n: usize = head[1].parse().map_err(|_| perr(hline, "bad state count"))?;
    let k: usize = head[2].parse().map_err(|_| perr(hline, "bad letter count"))?;
    if n == 0 {
        return Err(DfaError::NoStates);
    }
    if n > MAX_STATES {
        return Err(DfaError::TooManyStates(n));
    }

    let (lline, letters_line) = lines.next().ok_or_else(|| perr(hline, "missing `letters` line"))?;
    let mut toks = letters_line.split_whitespace();
    if toks.next() != Some("letters") {
        return Err(perr(lline, "expected `letters ...`"));
    }
    let letters: Vec<String> = toks.map(str::to_owned).collect();
    if letters.len() != k {
        return Err(perr(lline, &format!("expected {k} letters, found {}", letters.len())));
    }
    check_alphabet(&letters)?;

    let mut rows: Vec<Option<Vec<Option<usize>>>> = vec![None; n];
    for (line, body) in lines {
        let rest = body.strip_prefix("state").ok_or_else(|| perr(line, "expected `state <i>: ...`"))?;
        let (idx, images) = rest.split_once(':').ok_or_else(|| perr(line, "missing ':'"))?;
        let state: usize = idx.trim().parse().map_err(|_| perr(line, "bad state index"))?;
        if state == 0 || state > n {
            return Err(DfaError::StateOutOfRange { state, n });
        }
        if rows[state - 1].is_some() {
            return Err(perr(line, &format!("state {state} listed twice")));
        }
        let mut row = Vec::with_capacity(k);
        for tok in images.split_whitespace() {
            let img: usize = tok.parse().map_err(|_| perr(line, "bad image"))?;
            if img == 0 || img > n {
                return Err(DfaError::StateOutOfRange { state: img, n });
            }
            row.push(Some(img - 1));
        }
        if row.len() > k {
            return Err(perr(line, &format!("state {state} lists more than {k} images")));
        }
        rows[state - 1] = Some(row);
    }
    let rows = rows.into_iter().map(|r| r.unwrap_or_default()).collect();
    Dfa::from_state_rows(letters, rows)
}

/// Writes the text format read by [`parse_dfa`].
pub fn format_dfa(dfa: &Dfa) -> String {
    let mut out = format!("dfa {} {}\nletters {}\n", dfa.n(), dfa.alphabet_len(), dfa.letters().join(" "));
    for s in 0..dfa.n() {
        let images: Vec<String> = (0..dfa.alphabet_len()).map(|l| (dfa.step(s, l) + 1).to_string()).collect();
        out.push_str(&format!("state {}: {}\n", s + 1, images.join(" ")));
    }
    out
}
