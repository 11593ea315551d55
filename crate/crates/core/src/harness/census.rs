//! Exhaustive census of small complete automata.
//!
//! Transition tables are numbered `0 .. n^(kn)`; table `code` is read as `kn`
//! base-`n` digits, letter-major. Codes are independent, so the census is a
//! sharded map-reduce over the code range.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::automaton::{reset_threshold, Dfa};
use crate::exec::{map_reduce, Execution};

/// Default number of tables examined before the census stops and flags itself partial.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Extremal examples kept in a report.
const MAX_EXAMPLES: usize = 32;

#[derive(Clone, Copy, Debug)]
pub struct CensusOptions {
    pub budget: u64,
    pub execution: Execution,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { budget: DEFAULT_BUDGET, execution: Execution::Parallel }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub k: usize,
    pub tables_total: u128,
    pub tables_examined: u64,
    /// True when the budget stopped the census before the last table.
    pub partial: bool,
    pub strongly_connected: u64,
    /// Strongly connected and synchronizing.
    pub synchronizing: u64,
    /// Shortest reset length -> number of tables.
    pub histogram: BTreeMap<usize, u64>,
    pub max_reset: Option<usize>,
    /// Tables reaching `max_reset`.
    pub extremal_tables: u64,
    /// Classes of extremal tables under state and letter renaming.
    pub extremal_classes: usize,
    /// Canonical tables of up to 32 extremal classes (letter-major images).
    pub extremal_examples: Vec<Vec<u8>>,
    pub cerny_bound_holds: bool,
    pub frankl_bound_holds: bool,
}

pub fn cerny_bound(n: usize) -> usize {
    (n - 1) * (n - 1)
}

pub fn frankl_bound(n: usize) -> usize {
    (n * n * n - n) / 6
}

#[derive(Clone, Default)]
struct Tally {
    strongly_connected: u64,
    synchronizing: u64,
    histogram: BTreeMap<usize, u64>,
    max: Option<usize>,
    extremal_tables: u64,
    classes: BTreeSet<Vec<u8>>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.strongly_connected += other.strongly_connected;
        self.synchronizing += other.synchronizing;
        for (len, c) in other.histogram {
            *self.histogram.entry(len).or_default() += c;
        }
        match self.max.cmp(&other.max) {
            std::cmp::Ordering::Less => {
                self.max = other.max;
                self.extremal_tables = other.extremal_tables;
                self.classes = other.classes;
            }
            std::cmp::Ordering::Equal => {
                self.extremal_tables += other.extremal_tables;
                self.classes.extend(other.classes);
            }
            std::cmp::Ordering::Greater => {}
        }
        self
    }
}

/// Decodes table `code` into per-letter image maps.
pub fn decode_table(n: usize, k: usize, mut code: u64) -> Vec<Vec<usize>> {
    let mut images = vec![vec![0; n]; k];
    for row in images.iter_mut() {
        for slot in row.iter_mut() {
            *slot = (code % n as u64) as usize;
            code /= n as u64;
        }
    }
    images
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut perm, &mut out);
    out
}

fn heap_permute(k: usize, perm: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(perm.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, perm, out);
        let j = if k.is_multiple_of(2) { i } else { 0 };
        perm.swap(j, k - 1);
    }
}

/// Smallest letter-major table over all simultaneous renamings of states and
/// of letters. This is the isomorphism notion used to count classes.
pub fn canonical_table(images: &[Vec<usize>], state_perms: &[Vec<usize>], letter_perms: &[Vec<usize>]) -> Vec<u8> {
    let n = images[0].len();
    let mut best: Option<Vec<u8>> = None;
    let mut buf = vec![0u8; images.len() * n];
    for sp in state_perms {
        for lp in letter_perms {
            for (new_l, &old_l) in lp.iter().enumerate() {
                for s in 0..n {
                    buf[new_l * n + sp[s]] = sp[images[old_l][s]] as u8;
                }
            }
            if best.as_ref().is_none_or(|b| buf < *b) {
                best = Some(buf.clone());
            }
        }
    }
    best.expect("at least one permutation")
}

fn letter_names(k: usize) -> Vec<String> {
    (0..k).map(|l| char::from(b'a' + l as u8).to_string()).collect()
}

/// Enumerates every complete `n`-state, `k`-letter table (up to the budget),
/// keeps the strongly connected synchronizing ones, and records the length
/// distribution of their shortest reset words.
pub fn audit_small_dfas(n: usize, k: usize, options: CensusOptions) -> CensusReport {
    assert!(n >= 1 && (1..=26).contains(&k), "census needs n >= 1 and 1 <= k <= 26");
    let digits = (n * k) as u32;
    let total = (n as u128).checked_pow(digits).unwrap_or(u128::MAX);
    let examined = total.min(options.budget as u128) as u64;
    let state_perms = permutations(n);
    let letter_perms = permutations(k);
    let names = letter_names(k);

    let tally = map_reduce(
        options.execution,
        0..examined,
        Tally::default(),
        |code| {
            let images = decode_table(n, k, code);
            let dfa = Dfa::from_letter_maps(names.clone(), images.clone()).expect("decoded table is complete");
            let mut t = Tally::default();
            if !dfa.is_strongly_connected() {
                return t;
            }
            t.strongly_connected = 1;
            if let Ok(Some(len)) = reset_threshold(&dfa) {
                t.synchronizing = 1;
                t.histogram.insert(len, 1);
                t.max = Some(len);
                t.extremal_tables = 1;
                t.classes.insert(canonical_table(&images, &state_perms, &letter_perms));
            }
            t
        },
        Tally::merge,
    );

    let max_reset = tally.max;
    let worst = tally.histogram.keys().next_back().copied();
    CensusReport {
        n,
        k,
        tables_total: total,
        tables_examined: examined,
        partial: (examined as u128) < total,
        strongly_connected: tally.strongly_connected,
        synchronizing: tally.synchronizing,
        cerny_bound_holds: worst.is_none_or(|w| w <= cerny_bound(n)),
        frankl_bound_holds: worst.is_none_or(|w| w <= frankl_bound(n)),
        histogram: tally.histogram,
        max_reset,
        extremal_tables: tally.extremal_tables,
        extremal_classes: tally.classes.len(),
        extremal_examples: tally.classes.into_iter().take(MAX_EXAMPLES).collect(),
    }
}
