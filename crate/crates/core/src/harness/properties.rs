//! Randomized drivers for the algebraic invariants.
//!
//! Case `i` of a run with seed `s` draws from its own generator seeded from
//! `(s, i)`, so a run gives the same verdict sequentially or in parallel and a
//! failing case can be replayed alone.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::automaton::{greedy_sync_word, shortest_sync_word, Dfa, StateSet, Word};
use crate::exactla::{
    canonical_basis, canonical_coefficients, coefficient_sum_check, linear_combination, rational, CombinationKind,
    Rational, RationalMatrix,
};
use crate::exec::{map_reduce, Execution};
use crate::lmatrix::solve_min;
use crate::series::{sink_value, SeriesContext};
use crate::wordmatrix::{matrix_of_word, q_equivalent, q_subsumes, WordMatrix};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_CASES: u64 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    Compose,
    ImageShrinks,
    RankIsImageSize,
    LeftStability,
    CoefficientSum,
    LeftDistributive,
    SeriesColumnCount,
    MinimalSolution,
    ApplyCompose,
    ResetWords,
}

impl Property {
    pub const ALL: [Property; 10] = [
        Property::Compose,
        Property::ImageShrinks,
        Property::RankIsImageSize,
        Property::LeftStability,
        Property::CoefficientSum,
        Property::LeftDistributive,
        Property::SeriesColumnCount,
        Property::MinimalSolution,
        Property::ApplyCompose,
        Property::ResetWords,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Compose => "compose",
            Property::ImageShrinks => "image-shrinks",
            Property::RankIsImageSize => "rank-is-image-size",
            Property::LeftStability => "left-stability",
            Property::CoefficientSum => "coefficient-sum",
            Property::LeftDistributive => "left-distributive",
            Property::SeriesColumnCount => "series-column-count",
            Property::MinimalSolution => "minimal-solution",
            Property::ApplyCompose => "apply-compose",
            Property::ResetWords => "reset-words",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Property::Compose => "M_u M_v = M_uv",
            Property::ImageShrinks => "|R(ua)| <= |R(u)| and R(au) subset of R(u)",
            Property::RankIsImageSize => "rank(M_b) = |R(b)|",
            Property::LeftStability => "~_q and subsumption survive left multiplication",
            Property::CoefficientSum => "coefficient sum classifies linear combinations",
            Property::LeftDistributive => "M_b (sum t_i M_x_i) = sum t_i M_b M_x_i",
            Property::SeriesColumnCount => "(S_q, u) = column count - 1",
            Property::MinimalSolution => "M_u L_x = M_s and (S_q, x) = |R(u)| - 1",
            Property::ApplyCompose => "apply(apply(P, u), v) = apply(P, uv)",
            Property::ResetWords => "shortest reset word no longer than the greedy one",
        }
    }

    fn check(self, rng: &mut StdRng, case: u64) -> Result<(), String> {
        match self {
            Property::Compose => compose(rng),
            Property::ImageShrinks => image_shrinks(rng),
            Property::RankIsImageSize => rank_is_image_size(rng),
            Property::LeftStability => left_stability(rng),
            Property::CoefficientSum => coefficient_sum(rng, case),
            Property::LeftDistributive => left_distributive(rng),
            Property::SeriesColumnCount => series_column_count(rng),
            Property::MinimalSolution => minimal_solution(rng),
            Property::ApplyCompose => apply_compose(rng),
            Property::ResetWords => reset_words(rng),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: &'static str,
    pub seed: u64,
    pub cases: u64,
    pub failures: u64,
    /// Smallest failing case index and its message.
    pub first_failure: Option<(u64, String)>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Generator for case `case` of a run seeded with `seed`.
pub fn case_rng(seed: u64, case: u64) -> StdRng {
    let mut z = seed ^ case.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    StdRng::seed_from_u64(z ^ (z >> 31))
}

pub fn run_property(property: Property, seed: u64, cases: u64, exec: Execution) -> PropertyReport {
    let (failures, first_failure) = map_reduce(
        exec,
        0..cases,
        (0u64, None::<(u64, String)>),
        |case| match property.check(&mut case_rng(seed, case), case) {
            Ok(()) => (0, None),
            Err(msg) => (1, Some((case, msg))),
        },
        |(fa, a), (fb, b)| {
            let first = match (a, b) {
                (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                (x, y) => x.or(y),
            };
            (fa + fb, first)
        },
    );
    PropertyReport { property: property.name(), seed, cases, failures, first_failure }
}

pub fn run_all(seed: u64, cases: u64, exec: Execution) -> Vec<PropertyReport> {
    Property::ALL.iter().map(|&p| run_property(p, seed, cases, exec)).collect()
}

fn random_dfa(rng: &mut StdRng) -> Dfa {
    let n = rng.gen_range(1..=7);
    let k = rng.gen_range(1..=3);
    let images = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect()).collect();
    let letters = ["a", "b", "c"][..k].iter().map(|s| (*s).to_owned()).collect();
    Dfa::from_letter_maps(letters, images).expect("random table is complete")
}

fn random_word(rng: &mut StdRng, dfa: &Dfa, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word((0..len).map(|_| rng.gen_range(0..dfa.alphabet_len())).collect())
}

fn random_matrix(rng: &mut StdRng, n: usize) -> WordMatrix {
    WordMatrix::from_images((0..n).map(|_| rng.gen_range(0..n)).collect()).expect("images below n")
}

fn random_rational(rng: &mut StdRng) -> Rational {
    rational(rng.gen_range(-6..=6), rng.gen_range(1..=5))
}

fn m(dfa: &Dfa, w: &Word) -> Result<WordMatrix, String> {
    matrix_of_word(dfa, w).map_err(|e| e.to_string())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn compose(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let u = random_word(rng, &dfa, 12);
    let v = random_word(rng, &dfa, 12);
    let lhs = m(&dfa, &u)?.multiply(&m(&dfa, &v)?).map_err(|e| e.to_string())?;
    let rhs = m(&dfa, &u.concat(&v))?;
    ensure(lhs == rhs, || format!("u={:?} v={:?}: {lhs} vs {rhs}", u.0, v.0))
}

fn image_shrinks(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let u = random_word(rng, &dfa, 12);
    let a = Word(vec![rng.gen_range(0..dfa.alphabet_len())]);
    let r_u = m(&dfa, &u)?.nonzero_columns();
    let ma = m(&dfa, &a)?;
    let r_ua = m(&dfa, &u.concat(&a))?.nonzero_columns();
    let r_au = m(&dfa, &a.concat(&u))?.nonzero_columns();
    ensure(r_ua.len() <= r_u.len(), || format!("|R(ua)| = {} > |R(u)| = {}", r_ua.len(), r_u.len()))?;
    ensure(r_au.is_subset(&r_u), || format!("R(au) = {r_au} not inside R(u) = {r_u}"))?;
    ensure(!ma.is_permutation() || r_ua.len() == r_u.len(), || "permutation letter changed |R|".into())
}

fn rank_is_image_size(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let b = random_word(rng, &dfa, 12);
    let mb = m(&dfa, &b)?;
    let exact = RationalMatrix::from(&mb).rank();
    let image = dfa.image_of_all(&b).map_err(|e| e.to_string())?;
    ensure(exact == mb.rank() && exact == image.len(), || {
        format!("rank {exact}, |R| {}, |image| {} for {mb}", mb.rank(), image.len())
    })
}

fn left_stability(rng: &mut StdRng) -> Result<(), String> {
    let n = rng.gen_range(1..=7);
    let q = rng.gen_range(0..n);
    let alpha = random_matrix(rng, n);
    let u = random_matrix(rng, n);
    let off_q = |rng: &mut StdRng| {
        if n == 1 {
            q
        } else {
            (q + rng.gen_range(1..n)) % n
        }
    };
    // v agrees with u on column q; w keeps only part of it
    let v_images: Vec<usize> = u.images().iter().map(|&j| if j == q { q } else { off_q(rng) }).collect();
    let w_images: Vec<usize> =
        u.images().iter().map(|&j| if j == q && rng.gen_bool(0.5) { q } else { off_q(rng) }).collect();
    let v = WordMatrix::from_images(v_images).map_err(|e| e.to_string())?;
    let w = WordMatrix::from_images(w_images).map_err(|e| e.to_string())?;
    let err = |e: crate::wordmatrix::MatrixError| e.to_string();
    ensure(q_equivalent(&u, &v, q).map_err(err)?, || "generator broke ~_q".into())?;
    ensure(q_subsumes(&u, &w, q).map_err(err)?, || "generator broke subsumption".into())?;
    let au = alpha.multiply(&u).map_err(err)?;
    let av = alpha.multiply(&v).map_err(err)?;
    let aw = alpha.multiply(&w).map_err(err)?;
    ensure(q_equivalent(&au, &av, q).map_err(err)?, || format!("a={alpha} u={u} v={v} q={q}: ~_q lost"))?;
    ensure(q_subsumes(&au, &aw, q).map_err(err)?, || format!("a={alpha} u={u} w={w} q={q}: subsumption lost"))
}

fn coefficient_sum(rng: &mut StdRng, case: u64) -> Result<(), String> {
    let n = rng.gen_range(2..=6);
    let err = |e: crate::wordmatrix::MatrixError| e.to_string();
    match case % 3 {
        0 => {
            let count = rng.gen_range(1..=5);
            let ms: Vec<WordMatrix> = (0..count).map(|_| random_matrix(rng, n)).collect();
            let cs: Vec<Rational> = (0..count).map(|_| random_rational(rng)).collect();
            let chk = coefficient_sum_check(&cs, &ms).map_err(err)?;
            ensure(chk.consistent, || format!("sum {} classified {:?}", chk.sum, chk.kind))
        }
        1 => {
            let k = rng.gen_range(2..=n);
            let t = WordMatrix::from_images((0..n).map(|_| rng.gen_range(0..k)).collect()).map_err(err)?;
            let basis = canonical_basis(n, k).map_err(err)?;
            let cs = canonical_coefficients(&t, k).map_err(err)?;
            let chk = coefficient_sum_check(&cs, &basis).map_err(err)?;
            ensure(chk.consistent && chk.kind == CombinationKind::WordMatrix, || format!("{t}: {:?}", chk.kind))?;
            ensure(chk.result.as_word_matrix().as_ref() == Some(&t), || format!("{t} not rebuilt"))
        }
        _ => {
            let count = rng.gen_range(2..=5);
            let ms: Vec<WordMatrix> = (0..count).map(|_| random_matrix(rng, n)).collect();
            let mut cs: Vec<Rational> = (0..count - 1).map(|_| random_rational(rng)).collect();
            let partial: Rational = cs.iter().sum();
            cs.push(-partial);
            let chk = coefficient_sum_check(&cs, &ms).map_err(err)?;
            ensure(chk.consistent && chk.kind != CombinationKind::WordMatrix, || {
                format!("zero-sum combination classified {:?}", chk.kind)
            })
        }
    }
}

fn left_distributive(rng: &mut StdRng) -> Result<(), String> {
    let n = rng.gen_range(1..=6);
    let err = |e: crate::wordmatrix::MatrixError| e.to_string();
    let b = RationalMatrix::from(&random_matrix(rng, n));
    let count = rng.gen_range(1..=4);
    let terms: Vec<(Rational, RationalMatrix)> =
        (0..count).map(|_| (random_rational(rng), RationalMatrix::from(&random_matrix(rng, n)))).collect();
    let lhs = b.mul(&linear_combination(&terms).map_err(err)?).map_err(err)?;
    let moved = terms
        .iter()
        .map(|(t, x)| Ok((t.clone(), b.mul(x)?)))
        .collect::<Result<Vec<_>, crate::wordmatrix::MatrixError>>()
        .map_err(err)?;
    let rhs = linear_combination(&moved).map_err(err)?;
    ensure(lhs == rhs, || "products differ".into())
}

fn series_column_count(rng: &mut StdRng) -> Result<(), String> {
    let n = rng.gen_range(1..=7);
    let mat = random_matrix(rng, n);
    let q = rng.gen_range(0..n);
    let err = |e: crate::wordmatrix::MatrixError| e.to_string();
    let sink = SeriesContext::sink(n, q);
    let full = sink.evaluate_rational(&RationalMatrix::from(&mat)).map_err(err)?;
    let expected = mat.column_count(q) as i64 - 1;
    ensure(full == rational(expected, 1) && sink_value(&mat, q) == expected, || {
        format!("{mat} q={q}: product {full}, count {expected}")
    })?;
    let p = StateSet::from_bits(n, rng.gen_range(0..1u64 << n)).expect("bits below n");
    let ctx = SeriesContext::new(p);
    let short = ctx.evaluate(&mat).map_err(err)?;
    let long = ctx.evaluate_rational(&RationalMatrix::from(&mat)).map_err(err)?;
    ensure(long == rational(short, 1), || format!("{mat} P={p}: {short} vs {long}"))
}

fn minimal_solution(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let n = dfa.n();
    let u = random_word(rng, &dfa, 12);
    let q = rng.gen_range(0..n);
    let mu = m(&dfa, &u)?;
    let s = WordMatrix::constant(n, q);
    let l = solve_min(&mu, &s, q).map_err(|e| e.to_string())?;
    let product = mu.multiply(l.matrix()).map_err(|e| e.to_string())?;
    ensure(product == s, || format!("M_u L_x = {product}, expected {s}"))?;
    ensure(l.sink_column() == mu.nonzero_columns(), || "column q differs from R(u)".into())?;
    let value = SeriesContext::sink(n, q).evaluate(l.matrix()).map_err(|e| e.to_string())?;
    let expected = mu.rank() as i64 - 1;
    ensure(value == expected && l.series_value() == expected, || {
        format!("(S_q, x) = {value} / {}, expected {expected}", l.series_value())
    })
}

fn apply_compose(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let n = dfa.n();
    let p = StateSet::from_bits(n, rng.gen_range(0..1u64 << n)).expect("bits below n");
    let u = random_word(rng, &dfa, 10);
    let v = random_word(rng, &dfa, 10);
    let err = |e: crate::automaton::DfaError| e.to_string();
    let stepwise = dfa.apply(&dfa.apply(&p, &u).map_err(err)?, &v).map_err(err)?;
    let whole = dfa.apply(&p, &u.concat(&v)).map_err(err)?;
    ensure(stepwise == whole, || format!("{stepwise} vs {whole}"))?;
    ensure(whole.len() <= p.len(), || "image grew".into())
}

fn reset_words(rng: &mut StdRng) -> Result<(), String> {
    let dfa = random_dfa(rng);
    let (exact, greedy) = match (shortest_sync_word(&dfa), greedy_sync_word(&dfa)) {
        (Ok(e), Ok(g)) => (e, g),
        (Err(_), Err(_)) => return Ok(()),
        (e, g) => return Err(format!("exact {:?} but greedy {:?}", e.is_ok(), g.is_ok())),
    };
    let err = |e: crate::automaton::DfaError| e.to_string();
    let n = dfa.n();
    ensure(dfa.image_of_all(&exact).map_err(err)?.len() == 1, || "exact word does not reset".into())?;
    ensure(dfa.image_of_all(&greedy).map_err(err)?.len() == 1, || "greedy word does not reset".into())?;
    ensure(exact.len() <= greedy.len(), || format!("exact {} > greedy {}", exact.len(), greedy.len()))?;
    ensure(exact.len() <= (n * n * n - n) / 6, || format!("length {} above the cubic bound", exact.len()))
}
