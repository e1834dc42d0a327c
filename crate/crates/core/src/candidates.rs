//! Candidate units per placeholder and candidate transformations per pair.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::placeholder::{enumerate_skeletons, Block, PlaceholderMatch, Skeleton, SkeletonLimits};
use crate::table::CandidatePair;
use crate::transform::{segment_range, Transformation, Unit, UnitKind, UnitKinds};

/// Units that map a source onto one placeholder's text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateUnitSet {
    pub placeholder: PlaceholderMatch,
    pub units: Vec<Unit>,
}

/// Candidate units for `ph`, one instantiation family per source span.
pub fn candidate_units(ph: &PlaceholderMatch, src: &str, enabled: UnitKinds) -> CandidateUnitSet {
    let chars: Vec<char> = src.chars().collect();
    CandidateUnitSet {
        placeholder: ph.clone(),
        units: candidate_units_chars(ph, &chars, enabled),
    }
}

fn candidate_units_chars(ph: &PlaceholderMatch, src: &[char], enabled: UnitKinds) -> Vec<Unit> {
    let txt: HashSet<char> = ph.text.chars().collect();
    // Distinct source characters that may act as delimiters, ascending.
    let delims: Vec<char> = src
        .iter()
        .copied()
        .filter(|c| !txt.contains(c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |u: Unit| {
        if seen.insert(u.clone()) {
            out.push(u);
        }
    };

    for span in &ph.sources {
        let (s, e) = (span.start, span.end);
        if enabled.contains(UnitKind::Substr) {
            push(Unit::Substr { start: s, end: e });
        }
        if enabled.contains(UnitKind::Split) {
            let adjacent = [s.checked_sub(1).map(|i| src[i]), src.get(e).copied()];
            for c in adjacent.into_iter().flatten() {
                if txt.contains(&c) {
                    continue;
                }
                let index = 1 + src[..s].iter().filter(|&&x| x == c).count();
                if segment_range(src, index, |x| x == c) == Ok(s..e) {
                    push(Unit::Split { delim: c, index });
                }
            }
        }
        if enabled.contains(UnitKind::SplitSubstr) {
            for &c in &delims {
                let before = &src[..s];
                let index = 1 + before.iter().filter(|&&x| x == c).count();
                let seg_start = before.iter().rposition(|&x| x == c).map_or(0, |p| p + 1);
                push(Unit::SplitSubstr {
                    delim: c,
                    index,
                    start: s - seg_start,
                    end: e - seg_start,
                });
            }
        }
        if enabled.contains(UnitKind::TwoCharSplitSubstr) {
            for (a, &c1) in delims.iter().enumerate() {
                for &c2 in &delims[a + 1..] {
                    let is_delim = |x: char| x == c1 || x == c2;
                    let before = &src[..s];
                    let index = 1 + before.iter().filter(|&&x| is_delim(x)).count();
                    let seg_start = before.iter().rposition(|&x| is_delim(x)).map_or(0, |p| p + 1);
                    push(Unit::TwoCharSplitSubstr {
                        first: c1,
                        second: c2,
                        index,
                        start: s - seg_start,
                        end: e - seg_start,
                    });
                }
            }
        }
    }
    if enabled.contains(UnitKind::Literal) && !ph.text.is_empty() {
        push(Unit::literal(ph.text.as_str()));
    }
    out
}

/// Every transformation obtained by picking one candidate unit per
/// placeholder block; literal blocks become `Literal` units.
pub fn transformations_from_skeleton(sk: &Skeleton, src: &str, enabled: UnitKinds) -> Vec<Transformation> {
    let chars: Vec<char> = src.chars().collect();
    let Some(choices) = block_choices(sk, enabled, |ph| candidate_units_chars(ph, &chars, enabled)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for_each_product(&choices, &mut |sel| {
        out.push(Transformation::new(sel.iter().map(|u| (*u).clone()).collect()));
    });
    out
}

/// Per-block unit choices, or `None` when some block has no realization.
fn block_choices<T: Clone + From<Unit>>(
    sk: &Skeleton,
    enabled: UnitKinds,
    mut units_for: impl FnMut(&PlaceholderMatch) -> Vec<T>,
) -> Option<Vec<Vec<T>>> {
    let mut choices = Vec::with_capacity(sk.blocks.len());
    for block in &sk.blocks {
        let options = match block {
            Block::Literal(text) => {
                if !enabled.contains(UnitKind::Literal) {
                    return None;
                }
                vec![T::from(Unit::literal(text.as_str()))]
            }
            Block::Placeholder(ph) => units_for(ph),
        };
        if options.is_empty() {
            return None;
        }
        choices.push(options);
    }
    if choices.is_empty() {
        return None;
    }
    Some(choices)
}

fn for_each_product<'a, T>(choices: &'a [Vec<T>], visit: &mut dyn FnMut(&[&'a T])) {
    fn rec<'a, T>(choices: &'a [Vec<T>], acc: &mut Vec<&'a T>, visit: &mut dyn FnMut(&[&'a T])) {
        match choices.split_first() {
            None => visit(acc),
            Some((first, rest)) => {
                for item in first {
                    acc.push(item);
                    rec(rest, acc, visit);
                    acc.pop();
                }
            }
        }
    }
    rec(choices, &mut Vec::with_capacity(choices.len()), visit);
}

pub type UnitId = u32;

/// Interned units; ids follow the total order of [`Unit`] once frozen.
#[derive(Clone, Debug, Default)]
pub struct UnitTable {
    units: Vec<Unit>,
    ids: HashMap<Unit, UnitId>,
}

impl UnitTable {
    pub fn intern(&mut self, unit: &Unit) -> UnitId {
        if let Some(&id) = self.ids.get(unit) {
            return id;
        }
        let id = self.units.len() as UnitId;
        self.units.push(unit.clone());
        self.ids.insert(unit.clone(), id);
        id
    }

    pub fn get(&self, id: UnitId) -> &Unit {
        &self.units[id as usize]
    }

    pub fn id_of(&self, unit: &Unit) -> Option<UnitId> {
        self.ids.get(unit).copied()
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitId, &Unit)> {
        self.units.iter().enumerate().map(|(i, u)| (i as UnitId, u))
    }
}

/// A deduplicated, frozen set of candidate transformations.
///
/// Transformations are stored as sequences of interned unit ids and kept
/// in lexicographic id order, so transformations sharing a prefix are
/// contiguous.
#[derive(Clone, Debug, Default)]
pub struct CandidatePool {
    units: UnitTable,
    seqs: Vec<Box<[UnitId]>>,
    generated: u64,
}

impl CandidatePool {
    /// Builds a pool from explicit transformations (duplicates are counted).
    pub fn from_transformations<'a>(ts: impl IntoIterator<Item = &'a Transformation>) -> CandidatePool {
        let mut b = PoolBuilder::default();
        for t in ts {
            b.insert(t.units());
        }
        b.freeze()
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    /// Transformations produced before deduplication.
    pub fn generated(&self) -> u64 {
        self.generated
    }

    pub fn duplicate_count(&self) -> u64 {
        self.generated - self.seqs.len() as u64
    }

    /// `duplicate_count / generated`, 0 for an empty pool.
    pub fn duplicate_fraction(&self) -> f64 {
        if self.generated == 0 {
            0.0
        } else {
            self.duplicate_count() as f64 / self.generated as f64
        }
    }

    pub fn units(&self) -> &UnitTable {
        &self.units
    }

    pub fn sequence(&self, i: usize) -> &[UnitId] {
        &self.seqs[i]
    }

    pub fn sequences(&self) -> &[Box<[UnitId]>] {
        &self.seqs
    }

    pub fn transformation(&self, i: usize) -> Transformation {
        Transformation::new(self.seqs[i].iter().map(|&id| self.units.get(id).clone()).collect())
    }

    pub fn transformations(&self) -> impl Iterator<Item = Transformation> + '_ {
        (0..self.len()).map(|i| self.transformation(i))
    }

    /// Position of each transformation when sorted by
    /// [`Transformation::preference_key`].
    ///
    /// Unit ids follow the printed order of units, and printed unit forms
    /// are prefix-free, so among sequences of equal length the pool order
    /// is already the printed order. Only length and literal count remain.
    pub fn preference_ranks(&self) -> Vec<usize> {
        let key = |i: usize| {
            let s = &self.seqs[i];
            let literals = s.iter().filter(|&&u| matches!(self.units.get(u), Unit::Literal(_))).count();
            (s.len(), literals)
        };
        let keys: Vec<(usize, usize)> = (0..self.seqs.len()).into_par_iter().map(key).collect();
        let mut order: Vec<usize> = (0..self.seqs.len()).collect();
        order.sort_by_key(|&i| keys[i]);
        let mut rank = vec![0; order.len()];
        for (r, i) in order.into_iter().enumerate() {
            rank[i] = r;
        }
        rank
    }

    pub fn contains(&self, t: &Transformation) -> bool {
        let ids: Option<Vec<UnitId>> = t.units().iter().map(|u| self.units.id_of(u)).collect();
        ids.is_some_and(|ids| self.seqs.binary_search_by(|s| s[..].cmp(&ids[..])).is_ok())
    }
}

#[derive(Default)]
struct PoolBuilder {
    units: UnitTable,
    /// Every inserted sequence, duplicates included until [`Self::freeze`].
    seqs: Vec<Box<[UnitId]>>,
}

impl PoolBuilder {
    fn insert(&mut self, units: &[Unit]) {
        let ids: Box<[UnitId]> = units.iter().map(|u| self.units.intern(u)).collect();
        self.insert_ids(ids);
    }

    fn insert_ids(&mut self, ids: Box<[UnitId]>) {
        self.seqs.push(ids);
    }

    /// Renumbers units in the order of their printed forms and sorts the
    /// sequences, which makes the pool layout independent of insertion order.
    fn freeze(self) -> CandidatePool {
        let mut order: Vec<(String, UnitId)> = self.units.iter().map(|(id, u)| (u.to_string(), id)).collect();
        order.sort_unstable();
        let order: Vec<UnitId> = order.into_iter().map(|(_, id)| id).collect();
        let mut remap = vec![0 as UnitId; order.len()];
        let mut units = UnitTable::default();
        for (new, &old) in order.iter().enumerate() {
            remap[old as usize] = new as UnitId;
            units.intern(self.units.get(old));
        }
        let generated = self.seqs.len() as u64;
        let mut seqs = self.seqs;
        seqs.par_iter_mut().for_each(|s| s.iter_mut().for_each(|id| *id = remap[*id as usize]));
        seqs.par_sort_unstable();
        seqs.dedup();
        CandidatePool {
            units,
            seqs,
            generated,
        }
    }
}

/// Settings for candidate generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GenerationConfig {
    pub limits: SkeletonLimits,
    pub kinds: UnitKinds,
}

/// One pair's generated transformations over a pair-local unit table.
struct PairBatch {
    units: Vec<Unit>,
    seqs: Vec<Vec<u32>>,
}

fn pair_batch(pair: &CandidatePair, cfg: &GenerationConfig) -> PairBatch {
    let src: Vec<char> = pair.source.chars().collect();
    let mut local = UnitTable::default();
    let mut per_span: HashMap<(usize, usize), Vec<u32>> = HashMap::new();
    let mut seqs = Vec::new();
    for sk in enumerate_skeletons(pair, cfg.limits) {
        let mut choices = Vec::with_capacity(sk.blocks.len());
        for block in &sk.blocks {
            let options = match block {
                Block::Literal(text) if cfg.kinds.contains(UnitKind::Literal) => {
                    vec![local.intern(&Unit::literal(text.as_str()))]
                }
                Block::Literal(_) => Vec::new(),
                Block::Placeholder(ph) => per_span
                    .entry((ph.target.start, ph.target.end))
                    .or_insert_with(|| {
                        candidate_units_chars(ph, &src, cfg.kinds)
                            .iter()
                            .map(|u| local.intern(u))
                            .collect()
                    })
                    .clone(),
            };
            if options.is_empty() {
                choices.clear();
                break;
            }
            choices.push(options);
        }
        if choices.is_empty() {
            continue;
        }
        for_each_product(&choices, &mut |sel| seqs.push(sel.iter().map(|&&id| id).collect()));
    }
    PairBatch {
        units: local.units,
        seqs,
    }
}

/// Generates and deduplicates candidate transformations for all pairs.
/// Work is spread across the current rayon pool; the result does not
/// depend on the worker count or on pair order.
pub fn generate_candidates(pairs: &[CandidatePair], cfg: &GenerationConfig) -> CandidatePool {
    let mut builder = PoolBuilder::default();
    // Batches are merged chunk by chunk so only one chunk of per-pair unit tables is alive at a time.
    for chunk in pairs.chunks(64) {
        let batches: Vec<PairBatch> = chunk.par_iter().map(|p| pair_batch(p, cfg)).collect();
        for batch in batches {
            let remap: Vec<UnitId> = batch.units.iter().map(|u| builder.units.intern(u)).collect();
            for seq in batch.seqs {
                builder.insert_ids(seq.iter().map(|&id| remap[id as usize]).collect());
            }
        }
    }
    builder.freeze()
}
