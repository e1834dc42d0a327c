//! Brute-force reference implementations for tiny instances.
//!
//! Nothing here is fast. These functions exist so the search and the cover
//! can be checked against exhaustive answers.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::coverage::{compare_records, CoverageRecord, PairId};
use crate::table::CandidatePair;
use crate::transform::{segment_range, ApplyError, ApplyFailure, ApplyOutcome, Transformation, Unit, UnitKind, UnitKinds};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_units: usize,
    pub max_literal_len: usize,
    pub kinds: UnitKinds,
    pub max_rows: usize,
    /// Longest accepted source or target, in characters.
    pub max_input_len: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_units: 3,
            max_literal_len: 12,
            kinds: UnitKinds::default_set(),
            max_rows: 6,
            max_input_len: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("budget exceeded: {what} is {actual}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },
}

fn guard(what: &'static str, actual: usize, limit: usize) -> Result<(), OracleError> {
    if actual > limit {
        Err(OracleError::BudgetExceeded { what, actual, limit })
    } else {
        Ok(())
    }
}

/// Every unit over the instance's parameter space that succeeds on `src`,
/// with its output. Delimiters range over `delims`; substring bounds and
/// segment indices are bounded by `max_len`.
fn units_on_source(src: &[char], delims: &[char], max_len: usize, kinds: UnitKinds) -> Vec<(Unit, String)> {
    let mut out = Vec::new();
    let text = |r: std::ops::Range<usize>| src[r].iter().collect::<String>();
    let substrings = |seg: std::ops::Range<usize>, out: &mut Vec<(usize, usize, String)>| {
        let len = seg.end - seg.start;
        for s in 0..len {
            for e in s + 1..=len {
                out.push((s, e, text(seg.start + s..seg.start + e)));
            }
        }
    };
    if kinds.contains(UnitKind::Substr) {
        let mut subs = Vec::new();
        substrings(0..src.len(), &mut subs);
        for (start, end, t) in subs {
            out.push((Unit::Substr { start, end }, t));
        }
    }
    for &delim in delims {
        for index in 1..=max_len + 1 {
            let Ok(seg) = segment_range(src, index, |c| c == delim) else {
                break;
            };
            if kinds.contains(UnitKind::Split) {
                out.push((Unit::Split { delim, index }, text(seg.clone())));
            }
            if kinds.contains(UnitKind::SplitSubstr) {
                let mut subs = Vec::new();
                substrings(seg, &mut subs);
                for (start, end, t) in subs {
                    out.push((Unit::SplitSubstr { delim, index, start, end }, t));
                }
            }
        }
    }
    if kinds.contains(UnitKind::TwoCharSplitSubstr) {
        for (a, &first) in delims.iter().enumerate() {
            for &second in &delims[a + 1..] {
                for index in 1..=max_len + 1 {
                    let Ok(seg) = segment_range(src, index, |c| c == first || c == second) else {
                        break;
                    };
                    let mut subs = Vec::new();
                    substrings(seg, &mut subs);
                    for (start, end, t) in subs {
                        let unit = Unit::TwoCharSplitSubstr { first, second, index, start, end };
                        out.push((unit, t));
                    }
                }
            }
        }
    }
    out
}

/// All transformations of at most `budget.max_units` units covering at
/// least one pair, each with its exact coverage, sorted by
/// [`compare_records`].
///
/// Delimiters range over the characters of all sources; literals over the
/// substrings of all targets up to `budget.max_literal_len` characters.
pub fn enumerate_all_transformations(
    pairs: &[CandidatePair],
    budget: &OracleBudget,
) -> Result<Vec<CoverageRecord>, OracleError> {
    guard("row count", pairs.len(), budget.max_rows)?;
    for p in pairs {
        guard("source length", p.source.chars().count(), budget.max_input_len)?;
        guard("target length", p.target.chars().count(), budget.max_input_len)?;
    }
    if pairs.is_empty() || budget.max_units == 0 {
        return Ok(Vec::new());
    }
    let delims: Vec<char> = pairs
        .iter()
        .flat_map(|p| p.source.chars())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let max_len = pairs.iter().map(|p| p.source.chars().count()).max().unwrap_or(0);

    let mut covered: HashMap<Vec<Unit>, Vec<PairId>> = HashMap::new();
    for (pid, pair) in pairs.iter().enumerate() {
        let src: Vec<char> = pair.source.chars().collect();
        let tgt: Vec<char> = pair.target.chars().collect();
        // Units grouped by the target slice they produce.
        let mut by_output: HashMap<String, Vec<Unit>> = HashMap::new();
        for (unit, out) in units_on_source(&src, &delims, max_len, budget.kinds) {
            by_output.entry(out).or_default().push(unit);
        }
        if budget.kinds.contains(UnitKind::Literal) {
            for s in 0..tgt.len() {
                for e in s + 1..=tgt.len().min(s + budget.max_literal_len) {
                    let t: String = tgt[s..e].iter().collect();
                    by_output.entry(t.clone()).or_default().push(Unit::literal(t));
                }
            }
        }
        let mut found: HashSet<Vec<Unit>> = HashSet::new();
        let mut path = Vec::new();
        extend(&tgt, 0, budget.max_units, &by_output, &mut path, &mut found);
        for units in found {
            covered.entry(units).or_default().push(pid as PairId);
        }
    }
    let mut records: Vec<CoverageRecord> = covered
        .into_iter()
        .map(|(units, ids)| CoverageRecord::new(Transformation::new(units), ids, pairs.len()))
        .collect();
    records.sort_by(compare_records);
    Ok(records)
}

fn extend(
    tgt: &[char],
    pos: usize,
    remaining: usize,
    by_output: &HashMap<String, Vec<Unit>>,
    path: &mut Vec<Unit>,
    found: &mut HashSet<Vec<Unit>>,
) {
    if pos == tgt.len() && !path.is_empty() {
        found.insert(path.clone());
    }
    if remaining == 0 {
        return;
    }
    for end in pos..=tgt.len() {
        let piece: String = tgt[pos..end].iter().collect();
        if let Some(units) = by_output.get(&piece) {
            for u in units {
                path.push(u.clone());
                extend(tgt, end, remaining - 1, by_output, path, found);
                path.pop();
            }
        }
    }
}

/// Largest number of candidate sets [`exact_min_cover`] searches exhaustively.
pub const EXACT_COVER_LIMIT: usize = 20;

/// A minimum-cardinality subset of `records` covering every pair covered by
/// any record. Sets contained in another set are dropped first; among
/// equal sets the one ranked first by [`compare_records`] is kept.
pub fn exact_min_cover(records: &[CoverageRecord]) -> Result<Vec<CoverageRecord>, OracleError> {
    let mut ranked: Vec<&CoverageRecord> = records.iter().filter(|r| !r.covered.is_empty()).collect();
    ranked.sort_by(|a, b| compare_records(a, b));
    let universe: BTreeSet<PairId> = ranked.iter().flat_map(|r| r.covered.iter().copied()).collect();
    let index: HashMap<PairId, usize> = universe.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let words = universe.len().div_ceil(64).max(1);
    let mask = |r: &CoverageRecord| {
        let mut m = vec![0u64; words];
        for p in &r.covered {
            let i = index[p];
            m[i / 64] |= 1 << (i % 64);
        }
        m
    };
    let subset = |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(x, y)| x & !y == 0);

    // Larger sets come first in `ranked`, so a set is dominated iff some
    // earlier kept set contains it.
    let mut kept: Vec<(&CoverageRecord, Vec<u64>)> = Vec::new();
    for r in ranked {
        let m = mask(r);
        if !kept.iter().any(|(_, k)| subset(&m, k)) {
            kept.push((r, m));
        }
    }
    guard("candidate sets after dominance reduction", kept.len(), EXACT_COVER_LIMIT)?;

    let full: Vec<u64> = {
        let mut m = vec![0u64; words];
        for i in 0..universe.len() {
            m[i / 64] |= 1 << (i % 64);
        }
        m
    };
    if universe.is_empty() {
        return Ok(Vec::new());
    }
    for k in 1..=kept.len() {
        let mut chosen = Vec::with_capacity(k);
        if let Some(found) = search(&kept, &full, 0, k, &mut chosen, &vec![0u64; words]) {
            return Ok(found.into_iter().map(|i| kept[i].0.clone()).collect());
        }
    }
    unreachable!("the union of all kept sets is the universe")
}

fn search(
    sets: &[(&CoverageRecord, Vec<u64>)],
    full: &[u64],
    from: usize,
    k: usize,
    chosen: &mut Vec<usize>,
    acc: &[u64],
) -> Option<Vec<usize>> {
    if chosen.len() == k {
        return (acc == full).then(|| chosen.clone());
    }
    for i in from..sets.len() {
        if sets.len() - i < k - chosen.len() {
            break;
        }
        let next: Vec<u64> = acc.iter().zip(&sets[i].1).map(|(a, b)| a | b).collect();
        chosen.push(i);
        if let Some(found) = search(sets, full, i + 1, k, chosen, &next) {
            return Some(found);
        }
        chosen.pop();
    }
    None
}

/// Split at `first`, take segment `outer`, split that at `second`, take
/// segment `inner`, then characters `[start, end)`. Segment indices are
/// 1-based.
pub fn split_split_substr_oracle(
    first: char,
    second: char,
    outer: usize,
    inner: usize,
    start: usize,
    end: usize,
    src: &str,
) -> ApplyOutcome {
    let chars: Vec<char> = src.chars().collect();
    split_split_substr_range(first, second, outer, inner, start, end, &chars)
        .map(|r| chars[r].iter().collect())
        .map_err(|reason| ApplyError { position: 0, reason })
}

fn split_split_substr_range(
    first: char,
    second: char,
    outer: usize,
    inner: usize,
    start: usize,
    end: usize,
    src: &[char],
) -> Result<std::ops::Range<usize>, ApplyFailure> {
    let seg = segment_range(src, outer, |c| c == first)?;
    let sub = segment_range(&src[seg.clone()], inner, |c| c == second)?;
    let (lo, hi) = (seg.start + sub.start, seg.start + sub.end);
    if start >= end || end > hi - lo {
        return Err(ApplyFailure::IndexOutOfRange);
    }
    Ok(lo + start..lo + end)
}

/// A `Substr`, `SplitSubstr` or `TwoCharSplitSubstr` unit producing the same
/// output as the given split-split-substring on `src`, or `None` when that
/// is undefined.
///
/// The selected characters never contain `second`, and never contain
/// `first` unless the two coincide, so a single split over both delimiters
/// isolates a segment holding the output. Which unit is returned follows
/// the delimiters present in `src`: neither gives `Substr`, one of them a
/// one-character split, both a two-character split.
pub fn equivalent_unit(
    first: char,
    second: char,
    outer: usize,
    inner: usize,
    start: usize,
    end: usize,
    src: &str,
) -> Option<Unit> {
    let chars: Vec<char> = src.chars().collect();
    let range = split_split_substr_range(first, second, outer, inner, start, end, &chars).ok()?;
    let has = |c: char| chars.contains(&c);
    let locate = |is_delim: &dyn Fn(char) -> bool| {
        let before = &chars[..range.start];
        let index = 1 + before.iter().filter(|&&c| is_delim(c)).count();
        let seg_start = before.iter().rposition(|&c| is_delim(c)).map_or(0, |p| p + 1);
        (index, range.start - seg_start, range.end - seg_start)
    };
    let unit = match (has(first), has(second)) {
        (false, false) => Unit::Substr {
            start: range.start,
            end: range.end,
        },
        (true, true) if first != second => {
            let (a, b) = (first.min(second), first.max(second));
            let (index, start, end) = locate(&|c| c == a || c == b);
            Unit::TwoCharSplitSubstr {
                first: a,
                second: b,
                index,
                start,
                end,
            }
        }
        (f, _) => {
            let delim = if f { first } else { second };
            let (index, start, end) = locate(&|c| c == delim);
            Unit::SplitSubstr {
                delim,
                index,
                start,
                end,
            }
        }
    };
    Some(unit)
}
