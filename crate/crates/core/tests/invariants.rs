use proptest::collection::vec;
use proptest::prelude::*;

use syncmat_core::automaton::{greedy_sync_word, shortest_sync_word};
use syncmat_core::exactla::{integer, rational, linear_combination, rank_of_word_matrices, Basis, Rational, RationalMatrix};
use syncmat_core::lmatrix::{canonical_l, solutions_by_subsumption, solve_min, LMatrix};
use syncmat_core::series::sink_value;
use syncmat_core::wordmatrix::{matrix_of_word, q_equivalent, q_subsumes};
use syncmat_core::{Dfa, SeriesContext, StateSet, Word, WordMatrix};

const LETTERS: [&str; 3] = ["a", "b", "c"];

fn dfa_strategy(max_n: usize) -> impl Strategy<Value = Dfa> {
    (1..=max_n, 1..=3usize).prop_flat_map(|(n, k)| {
        vec(vec(0..n, n), k).prop_map(move |images| {
            let letters = LETTERS[..k].iter().map(|s| s.to_string()).collect();
            Dfa::from_letter_maps(letters, images).unwrap()
        })
    })
}

fn word_for(dfa: &Dfa, raw: &[usize]) -> Word {
    Word(raw.iter().map(|&x| x % dfa.alphabet_len()).collect())
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = WordMatrix> {
    vec(0..n, n).prop_map(|images| WordMatrix::from_images(images).unwrap())
}

/// `(n, q, u, v)` with `v` agreeing with `u` on column `q` and free elsewhere.
fn q_equivalent_pair() -> impl Strategy<Value = (usize, usize, WordMatrix, WordMatrix)> {
    (2..=6usize)
        .prop_flat_map(|n| (Just(n), 0..n, matrix_strategy(n), vec(1..n, n)))
        .prop_map(|(n, q, u, shifts)| {
            let images = u.images().iter().zip(&shifts).map(|(&j, &s)| if j == q { q } else { (q + s) % n }).collect();
            (n, q, u, WordMatrix::from_images(images).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn apply_composes(dfa in dfa_strategy(7), u in vec(0..3usize, 0..10), v in vec(0..3usize, 0..10), bits in any::<u64>()) {
        let (u, v) = (word_for(&dfa, &u), word_for(&dfa, &v));
        let s = StateSet::from_bits(dfa.n(), bits & ((1u64 << dfa.n()) - 1)).unwrap();
        prop_assert_eq!(dfa.apply(&dfa.apply(&s, &u).unwrap(), &v).unwrap(), dfa.apply(&s, &u.concat(&v)).unwrap());
    }

    #[test]
    fn apply_is_monotone_and_shrinks(dfa in dfa_strategy(7), u in vec(0..3usize, 0..10), w in vec(0..3usize, 0..10), a in any::<u64>(), b in any::<u64>()) {
        let (u, w) = (word_for(&dfa, &u), word_for(&dfa, &w));
        let mask = (1u64 << dfa.n()) - 1;
        let t = StateSet::from_bits(dfa.n(), (a | b) & mask).unwrap();
        let s = StateSet::from_bits(dfa.n(), a & mask).unwrap();
        prop_assert!(dfa.apply(&s, &u).unwrap().is_subset(&dfa.apply(&t, &u).unwrap()));
        prop_assert!(dfa.apply(&s, &u.concat(&w)).unwrap().len() <= dfa.apply(&s, &u).unwrap().len());
    }

    #[test]
    fn exact_word_no_longer_than_greedy(dfa in dfa_strategy(7)) {
        match (shortest_sync_word(&dfa), greedy_sync_word(&dfa)) {
            (Ok(e), Ok(g)) => {
                prop_assert!(e.len() <= g.len());
                prop_assert!(dfa.image_of_all(&e).unwrap().is_singleton());
                prop_assert!(dfa.image_of_all(&g).unwrap().is_singleton());
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "the two searches disagree on synchronizability"),
        }
    }

    #[test]
    fn matrices_compose(dfa in dfa_strategy(7), u in vec(0..3usize, 0..10), v in vec(0..3usize, 0..10)) {
        let (u, v) = (word_for(&dfa, &u), word_for(&dfa, &v));
        let uv = matrix_of_word(&dfa, &u.concat(&v)).unwrap();
        prop_assert_eq!(matrix_of_word(&dfa, &u).unwrap().multiply(&matrix_of_word(&dfa, &v).unwrap()).unwrap(), uv);
    }

    #[test]
    fn exact_rank_is_image_size(m in (1..=7usize).prop_flat_map(matrix_strategy)) {
        prop_assert_eq!(RationalMatrix::from(&m).rank(), m.nonzero_columns().len());
    }

    #[test]
    fn q_relations_are_left_stable((n, q, u, v) in q_equivalent_pair(), alpha in vec(any::<usize>(), 6), drop in vec(any::<bool>(), 6)) {
        let alpha = WordMatrix::from_images(alpha[..n].iter().map(|x| x % n).collect()).unwrap();
        let w = WordMatrix::from_images(
            v.images().iter().zip(&drop).map(|(&j, &d)| if j == q && d { (q + 1) % n } else { j }).collect(),
        ).unwrap();
        prop_assert!(q_equivalent(&u, &v, q).unwrap());
        prop_assert!(q_subsumes(&u, &w, q).unwrap());
        let (au, av, aw) = (alpha.multiply(&u).unwrap(), alpha.multiply(&v).unwrap(), alpha.multiply(&w).unwrap());
        prop_assert!(q_equivalent(&au, &av, q).unwrap());
        prop_assert!(q_subsumes(&au, &aw, q).unwrap());
    }

    #[test]
    fn q_equivalence_transfers_synchronization((n, q, u, v) in q_equivalent_pair(), picks in vec(any::<usize>(), 6)) {
        let col: Vec<usize> = v.column(q).iter().collect();
        prop_assume!(!col.is_empty());
        let t = WordMatrix::from_images(picks[..n].iter().map(|p| col[p % col.len()]).collect()).unwrap();
        let s = WordMatrix::constant(n, q);
        prop_assert_eq!(t.multiply(&v).unwrap(), s.clone());
        prop_assert_eq!(t.multiply(&u).unwrap(), s);
    }

    #[test]
    fn products_reuse_rows_and_merge_columns(n in 1..=6usize, seed in vec(any::<usize>(), 12)) {
        let a = WordMatrix::from_images(seed[..n].iter().map(|x| x % n).collect()).unwrap();
        let u = WordMatrix::from_images(seed[6..6 + n].iter().map(|x| x % n).collect()).unwrap();
        let au = a.multiply(&u).unwrap();
        for r in 0..n {
            prop_assert_eq!(au.image(r), u.image(a.image(r)));
        }
        let ua = u.multiply(&a).unwrap();
        for j in 0..n {
            let merged = (0..n).filter(|&i| a.image(i) == j).fold(StateSet::empty(n), |acc, i| acc.union(&u.column(i)));
            prop_assert_eq!(ua.column(j), merged);
        }
    }

    #[test]
    fn series_matches_column_count(m in (1..=7usize).prop_flat_map(matrix_strategy), q in any::<usize>()) {
        let q = q % m.n();
        let ctx = SeriesContext::sink(m.n(), q);
        let full = ctx.evaluate_rational(&RationalMatrix::from(&m)).unwrap();
        prop_assert_eq!(full, integer(sink_value(&m, q)));
        prop_assert_eq!(ctx.evaluate(&m).unwrap(), m.column_count(q) as i64 - 1);
    }

    #[test]
    fn series_respects_q_relations((n, q, u, v) in q_equivalent_pair(), drop in vec(any::<bool>(), 6)) {
        let ctx = SeriesContext::sink(n, q);
        prop_assert_eq!(ctx.evaluate(&u).unwrap(), ctx.evaluate(&v).unwrap());
        let w = WordMatrix::from_images(
            v.images().iter().zip(&drop).map(|(&j, &d)| if j == q && d { (q + 1) % n } else { j }).collect(),
        ).unwrap();
        prop_assert!(ctx.evaluate(&w).unwrap() <= ctx.evaluate(&u).unwrap());
    }

    #[test]
    fn affine_combinations_keep_the_series(n in 2..=6usize, count in 1..=5usize, target in 0..6usize, seed in vec(any::<u64>(), 40), q in any::<usize>()) {
        let q = q % n;
        let c = target % n + 1;
        let ms: Vec<WordMatrix> = (0..count).map(|j| {
            let images = (0..n).map(|r| if r < c { q } else {
                let x = (seed[j * 6 + r % 6] as usize) % (n - 1);
                if x >= q { x + 1 } else { x }
            }).collect();
            WordMatrix::from_images(images).unwrap()
        }).collect();
        let mut coeffs: Vec<Rational> = (0..count - 1).map(|j| rational((seed[30 + j] % 11) as i64 - 5, 3)).collect();
        let partial: Rational = coeffs.iter().sum();
        coeffs.push(integer(1) - partial);
        let ctx = SeriesContext::sink(n, q);
        let terms: Vec<(Rational, RationalMatrix)> = coeffs.iter().cloned().zip(ms.iter().map(RationalMatrix::from)).collect();
        let combo = linear_combination(&terms).unwrap();
        prop_assert_eq!(ctx.evaluate_rational(&combo).unwrap(), integer(c as i64 - 1));
    }

    #[test]
    fn columns_outside_p_do_not_matter(m in (2..=7usize).prop_flat_map(matrix_strategy), bits in any::<u64>(), row in any::<usize>(), to in any::<usize>()) {
        let n = m.n();
        let p = StateSet::from_bits(n, bits & ((1u64 << n) - 1)).unwrap();
        let outside: Vec<usize> = p.complement().iter().collect();
        let row = row % n;
        prop_assume!(!outside.is_empty() && !p.contains(m.image(row)));
        let mut images = m.images().to_vec();
        images[row] = outside[to % outside.len()];
        let moved = WordMatrix::from_images(images).unwrap();
        let ctx = SeriesContext::new(p);
        prop_assert_eq!(ctx.evaluate(&m).unwrap(), ctx.evaluate(&moved).unwrap());
    }

    #[test]
    fn family_rank_bounds(n in 2..=5usize, family in vec(vec(any::<usize>(), 5), 1..40), zero in any::<usize>()) {
        let all: Vec<WordMatrix> = family.iter().map(|r| WordMatrix::from_images(r[..n].iter().map(|x| x % n).collect()).unwrap()).collect();
        prop_assert!(rank_of_word_matrices(&all).unwrap() <= n * (n - 1) + 1);
        let z = zero % n;
        let avoiding: Vec<WordMatrix> = family.iter().map(|r| {
            WordMatrix::from_images(r[..n].iter().map(|x| { let c = x % (n - 1); if c >= z { c + 1 } else { c } }).collect()).unwrap()
        }).collect();
        prop_assert!(rank_of_word_matrices(&avoiding).unwrap() <= (n - 1) * (n - 1));
    }

    #[test]
    fn words_ending_in_a_non_surjective_letter(dfa in dfa_strategy(6), words in vec(vec(0..3usize, 0..8), 1..30)) {
        let n = dfa.n();
        let alpha = (0..dfa.alphabet_len()).find(|&l| {
            StateSet::from_states(n, dfa.letter_map(l).iter().copied()).len() < n
        });
        prop_assume!(dfa.is_strongly_connected() && alpha.is_some());
        let alpha = alpha.unwrap();
        let ms: Vec<WordMatrix> = words.iter().map(|w| {
            let mut w = word_for(&dfa, w).0;
            w.push(alpha);
            matrix_of_word(&dfa, &Word(w)).unwrap()
        }).collect();
        prop_assert!(rank_of_word_matrices(&ms).unwrap() <= (n - 1) * (n - 1));
    }

    #[test]
    fn left_distributivity(n in 1..=5usize, seed in vec(any::<usize>(), 25), taus in vec(-4i64..=4, 4)) {
        let mk = |off: usize| WordMatrix::from_images(seed[off..off + n].iter().map(|x| x % n).collect()).unwrap();
        let b = RationalMatrix::from(&mk(0));
        let terms: Vec<(Rational, RationalMatrix)> = (0..4).map(|i| (integer(taus[i]), RationalMatrix::from(&mk(5 + 5 * i)))).collect();
        let lhs = b.mul(&linear_combination(&terms).unwrap()).unwrap();
        let moved: Vec<(Rational, RationalMatrix)> = terms.iter().map(|(t, x)| (t.clone(), b.mul(x).unwrap())).collect();
        prop_assert_eq!(lhs, linear_combination(&moved).unwrap());
    }

    #[test]
    fn basis_rank_ignores_order(n in 2..=4usize, family in vec(vec(any::<usize>(), 4), 1..20), rot in any::<usize>()) {
        let ms: Vec<WordMatrix> = family.iter().map(|r| WordMatrix::from_images(r[..n].iter().map(|x| x % n).collect()).unwrap()).collect();
        let rank = |order: &[WordMatrix]| {
            let mut b = Basis::new(n);
            for m in order { b.insert_word_matrix(m).unwrap(); }
            b.rank()
        };
        let mut shuffled = ms.clone();
        shuffled.reverse();
        shuffled.rotate_left(rot % ms.len());
        prop_assert_eq!(rank(&ms), rank(&shuffled));
        prop_assert_eq!(rank(&ms), rank_of_word_matrices(&ms).unwrap());
    }

    #[test]
    fn left_multiplication_of_l_matrices(n in 2..=6usize, seed in vec(any::<usize>(), 12), q in any::<usize>()) {
        let q = q % n;
        let v = WordMatrix::from_images(seed[..n].iter().map(|x| x % n).collect()).unwrap();
        let u = WordMatrix::from_images(seed[6..6 + n].iter().map(|x| x % n).collect()).unwrap();
        let vu = v.multiply(&u).unwrap();
        prop_assume!(u.column_count(q) > 0 && u.column_count(q) < n && vu.column_count(q) > 0);
        let lu = canonical_l(&u, q).unwrap();
        let lvu = LMatrix::from_column(q, vu.column(q)).unwrap();
        let moved = v.multiply(lu.matrix()).unwrap();
        prop_assert!(q_equivalent(&moved, lvu.matrix(), q).unwrap());
        if u.column_count(q) == vu.column_count(q) || v.is_permutation() {
            prop_assert_eq!(&moved, lvu.matrix());
        }
    }

    #[test]
    fn minimal_solution_is_minimal(dfa in dfa_strategy(5), u in vec(0..3usize, 0..10), q in any::<usize>()) {
        let n = dfa.n();
        let q = q % n;
        let mu = matrix_of_word(&dfa, &word_for(&dfa, &u)).unwrap();
        let s = WordMatrix::constant(n, q);
        let l = solve_min(&mu, &s, q).unwrap();
        prop_assert_eq!(l.series_value(), mu.rank() as i64 - 1);
        let sols = solutions_by_subsumption(&l, &mu, &s, q).unwrap();
        prop_assert_eq!(sols.violations, 0);
        prop_assert_eq!(sols.solutions.len() as u128, sols.total);
        prop_assert!(sols.solutions.iter().all(|y| y.sink_column().len() >= l.sink_column().len()));
    }

    #[test]
    fn minimal_series_never_grows_along_a_reset_word(dfa in dfa_strategy(6)) {
        let Ok(s) = shortest_sync_word(&dfa) else { return Ok(()); };
        let n = dfa.n();
        let q = dfa.image_of_all(&s).unwrap().iter().next().unwrap();
        let sink = WordMatrix::constant(n, q);
        let values: Vec<i64> = (1..=s.len())
            .map(|k| solve_min(&matrix_of_word(&dfa, &s.prefix(k)).unwrap(), &sink, q).unwrap().series_value())
            .collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
    }

    #[test]
    fn constant_series_families_are_small(n in 2..=6usize, size in 1..6usize, cols in vec(any::<u64>(), 1..30), extra in 1..3usize) {
        let q = 0;
        let size = size % (n - 1) + 1;
        // k states ordered by 4-bit keys drawn from `bits`
        let pick = |bits: u64, k: usize| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&i| (bits >> (4 * i)) & 15);
            StateSet::from_states(n, order.into_iter().take(k))
        };
        let same: Vec<WordMatrix> = cols.iter().map(|&c| LMatrix::from_column(q, pick(c, size)).unwrap().into_matrix()).collect();
        prop_assert!(rank_of_word_matrices(&same).unwrap() <= n);
        let values = (extra + 1).min(n - 1);
        let mixed: Vec<WordMatrix> = cols.iter().enumerate().map(|(i, &c)| {
            LMatrix::from_column(q, pick(c, (size + i % values - 1) % (n - 1) + 1)).unwrap().into_matrix()
        }).collect();
        prop_assert!(rank_of_word_matrices(&mixed).unwrap() <= n * values);
    }
}

#[test]
fn series_preserving_left_factor_can_merge_independent_l_matrices() {
    // Two distinct L matrices with equal series stay q-equivalent to L_{bx}
    // under M_b, yet M_b sends both to the same matrix.
    let q = 0;
    let b = WordMatrix::parse("row-image: 3 2 3 2").unwrap();
    let l1 = LMatrix::from_column(q, StateSet::from_states(4, [0, 2])).unwrap();
    let l2 = LMatrix::from_column(q, StateSet::from_states(4, [2, 3])).unwrap();
    let family = [l1.matrix().clone(), l2.matrix().clone()];
    assert_eq!(rank_of_word_matrices(&family).unwrap(), 2);
    let moved: Vec<WordMatrix> = family.iter().map(|l| b.multiply(l).unwrap()).collect();
    for (l, m) in [&l1, &l2].iter().zip(&moved) {
        assert_eq!(m.column_count(q), l.sink_column().len());
        let lbx = LMatrix::from_column(q, m.column(q)).unwrap();
        assert_eq!(lbx.matrix(), m);
    }
    assert_eq!(moved[0], moved[1]);
    assert_eq!(rank_of_word_matrices(&moved).unwrap(), 1);
}
