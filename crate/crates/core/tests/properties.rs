//! Property tests over the core invariants.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xjoin_core::candidates::transformations_from_skeleton;
use xjoin_core::coverage::{evaluate_coverage_unpruned, greedy_min_cover, CoverageRecord};
use xjoin_core::oracle::exact_min_cover;
use xjoin_core::placeholder::{enumerate_skeletons, maximal_placeholders};
use xjoin_core::row_match::build_index;
use xjoin_core::{
    covers, evaluate_coverage, generate_candidates, parse_transformation, transform_join, CandidatePair,
    ColumnTable, GenerationConfig, NonCoveringCache, SkeletonLimits, Transformation, Unit, UnitKinds,
};

fn any_char() -> impl Strategy<Value = char> {
    prop_oneof![
        4 => prop::sample::select(vec!['a', 'b', 'c', ' ', ',', '-', '\'', '\\', '(', ')', '<', '>']),
        1 => any::<char>(),
    ]
}

fn span() -> impl Strategy<Value = (usize, usize)> {
    (0usize..30, 1usize..30).prop_map(|(s, len)| (s, s + len))
}

fn unit() -> impl Strategy<Value = Unit> {
    prop_oneof![
        span().prop_map(|(start, end)| Unit::Substr { start, end }),
        (any_char(), 1usize..12).prop_map(|(delim, index)| Unit::Split { delim, index }),
        (any_char(), 1usize..12, span()).prop_map(|(delim, index, (start, end))| Unit::SplitSubstr {
            delim,
            index,
            start,
            end
        }),
        (any_char(), any_char(), 1usize..12, span())
            .prop_filter("distinct delimiters", |(a, b, _, _)| a != b)
            .prop_map(|(first, second, index, (start, end))| Unit::TwoCharSplitSubstr {
                first,
                second,
                index,
                start,
                end
            }),
        prop::collection::vec(any_char(), 1..8).prop_map(|cs| Unit::literal(cs.into_iter().collect::<String>())),
    ]
}

fn transformation() -> impl Strategy<Value = Transformation> {
    prop::collection::vec(unit(), 1..7).prop_map(Transformation::new)
}

fn text(max: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!['a', 'b', 'c', '1', ' ', ',', '-']), 0..=max)
        .prop_map(|cs| cs.into_iter().collect())
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn contains(hay: &[char], needle: &[char]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

fn random_pairs(seed: u64, rows: usize, len: usize) -> Vec<CandidatePair> {
    common::random_small_instance(&mut ChaCha8Rng::seed_from_u64(seed), rows, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_transformations_parse_back(t in transformation()) {
        let printed = t.to_string();
        prop_assert_eq!(parse_transformation(&printed), Ok(t));
    }

    #[test]
    fn ngram_index_is_complete(rows in prop::collection::vec(text(12), 1..8), n0 in 1usize..4, extra in 0usize..4) {
        let n_max = n0 + extra;
        let table = ColumnTable::from_texts(rows.iter().map(String::as_str));
        let idx = build_index(&table, n0, n_max);
        for (id, row) in table.rows() {
            let cs = chars(row);
            for n in n0..=n_max.min(cs.len()) {
                for w in cs.windows(n) {
                    let gram: String = w.iter().collect();
                    prop_assert!(idx.posting(&gram).is_some_and(|p| p.contains(id)), "{:?} missing row {}", gram, id);
                }
            }
        }
        for (gram, posting) in idx.grams() {
            prop_assert!((n0..=n_max).contains(&gram.chars().count()));
            for id in posting {
                prop_assert!(table.text(*id).is_some_and(|r| r.contains(gram)));
            }
        }
    }

    #[test]
    fn placeholders_are_maximal(src in text(14), tgt in text(14)) {
        let s = chars(&src);
        let t = chars(&tgt);
        for p in maximal_placeholders(&src, &tgt, 1) {
            let piece = &t[p.target.clone()];
            prop_assert_eq!(piece.iter().collect::<String>(), p.text.clone());
            prop_assert!(!p.sources.is_empty());
            for r in &p.sources {
                prop_assert_eq!(&s[r.clone()], piece);
            }
            if p.target.start > 0 {
                prop_assert!(!contains(&s, &t[p.target.start - 1..p.target.end]));
            }
            if p.target.end < t.len() {
                prop_assert!(!contains(&s, &t[p.target.start..p.target.end + 1]));
            }
        }
    }

    #[test]
    fn skeletons_reconstruct_the_target(src in text(14), tgt in text(14), max_ph in 0usize..4, cap in 1usize..64) {
        let pair = CandidatePair::of(src, tgt.clone());
        let limits = SkeletonLimits { max_placeholders: max_ph, cap, min_placeholder_len: 1 };
        let sks = enumerate_skeletons(&pair, limits);
        prop_assert!(sks.len() <= cap);
        for sk in &sks {
            prop_assert_eq!(sk.text(), tgt.clone());
            prop_assert!(sk.placeholder_count() <= max_ph);
        }
    }

    #[test]
    fn more_placeholders_only_add_skeletons(src in text(12), tgt in text(12), max_ph in 0usize..3) {
        let pair = CandidatePair::of(src, tgt);
        let limits = |m| SkeletonLimits { max_placeholders: m, cap: 100_000, min_placeholder_len: 1 };
        let small: BTreeSet<String> = enumerate_skeletons(&pair, limits(max_ph)).iter().map(|s| format!("{s:?}")).collect();
        let large: BTreeSet<String> = enumerate_skeletons(&pair, limits(max_ph + 1)).iter().map(|s| format!("{s:?}")).collect();
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn generated_candidates_cover_their_pair(src in text(12), tgt in text(12)) {
        let pair = CandidatePair::of(src.clone(), tgt.clone());
        for sk in enumerate_skeletons(&pair, SkeletonLimits::default()) {
            for t in transformations_from_skeleton(&sk, &src, UnitKinds::all()) {
                prop_assert!(covers(&t, &src, &tgt), "{} on {:?} -> {:?}", t, src, tgt);
            }
        }
    }

    #[test]
    fn pruning_never_changes_coverage(seed in any::<u64>()) {
        let pairs = random_pairs(seed, 6, 12);
        let pool = generate_candidates(&pairs, &GenerationConfig::default());
        let mut cache = NonCoveringCache::new(pairs.len());
        prop_assert_eq!(evaluate_coverage(&pool, &pairs, &mut cache), evaluate_coverage_unpruned(&pool, &pairs));
    }

    #[test]
    fn greedy_cover_is_valid_and_within_bound(
        sets in prop::collection::vec(prop::collection::btree_set(0u32..10, 0..6), 1..9)
    ) {
        let records: Vec<CoverageRecord> = sets
            .iter()
            .enumerate()
            .map(|(i, s)| CoverageRecord::new(
                Transformation::new(vec![Unit::literal(format!("t{i}"))]),
                s.iter().copied().collect(),
                10,
            ))
            .collect();
        let universe: BTreeSet<u32> = sets.iter().flatten().copied().collect();
        let greedy = greedy_min_cover(&records, 10);
        let mut seen = BTreeSet::new();
        for pick in &greedy {
            prop_assert!(!pick.marginal.is_empty());
            for p in &pick.marginal {
                prop_assert!(seen.insert(*p), "pair {} covered twice", p);
            }
        }
        prop_assert_eq!(&seen, &universe);
        let exact = exact_min_cover(&records).unwrap();
        let largest = sets.iter().map(BTreeSet::len).max().unwrap_or(1).max(1) as f64;
        prop_assert!(exact.len() <= greedy.len());
        prop_assert!(greedy.len() as f64 <= (1.0 + largest.ln()) * exact.len() as f64 + 1e-9);
    }

    #[test]
    fn join_witnesses_are_valid_and_complete(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = common::random_small_instance(&mut rng, 6, 10);
        let src = ColumnTable::from_texts(pairs.iter().map(|p| p.source.as_str()));
        let tgt = ColumnTable::from_texts(pairs.iter().map(|p| p.target.as_str()));
        let ts: Vec<Transformation> = generate_candidates(&pairs, &GenerationConfig::default())
            .transformations()
            .take(k * 7)
            .step_by(7)
            .collect();
        prop_assume!(!ts.is_empty());
        let result = transform_join(&src, &tgt, &ts);
        let joined = result.id_pairs();
        for p in &result.pairs {
            prop_assert!(!p.witnesses.is_empty());
            for &w in &p.witnesses {
                prop_assert!(covers(&ts[w], src.text(p.source_id).unwrap(), tgt.text(p.target_id).unwrap()));
            }
        }
        for (sid, s) in src.rows() {
            for (tid, t) in tgt.rows() {
                let any = ts.iter().any(|tr| covers(tr, s, t));
                prop_assert_eq!(any, joined.contains(&(*sid, *tid)));
            }
        }
    }

    #[test]
    fn adding_transformations_never_loses_join_pairs(seed in any::<u64>()) {
        let pairs = random_pairs(seed, 6, 10);
        let src = ColumnTable::from_texts(pairs.iter().map(|p| p.source.as_str()));
        let tgt = ColumnTable::from_texts(pairs.iter().map(|p| p.target.as_str()));
        let all: Vec<Transformation> = generate_candidates(&pairs, &GenerationConfig::default())
            .transformations()
            .step_by(11)
            .take(6)
            .collect();
        prop_assume!(all.len() >= 2);
        let fewer = transform_join(&src, &tgt, &all[..all.len() / 2]).id_pairs();
        let more = transform_join(&src, &tgt, &all).id_pairs();
        prop_assert!(fewer.is_subset(&more));
    }
}
