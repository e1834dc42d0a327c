//! Coverage of candidate transformations and the answer sets built from it.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::candidates::{CandidatePool, UnitId};
use crate::table::CandidatePair;
use crate::transform::{covers, Transformation, Unit};

/// Index of a pair in the slice handed to [`evaluate_coverage`].
pub type PairId = u32;

#[derive(Clone, Debug, PartialEq)]
pub struct CoverageRecord {
    pub transformation: Transformation,
    /// Ascending ids of the covered pairs.
    pub covered: Vec<PairId>,
    pub coverage_fraction: f64,
}

/// `covered / num_pairs`, 0 when there are no pairs.
pub fn coverage_fraction(covered: usize, num_pairs: usize) -> f64 {
    if num_pairs == 0 {
        0.0
    } else {
        covered as f64 / num_pairs as f64
    }
}

impl CoverageRecord {
    pub fn new(transformation: Transformation, covered: Vec<PairId>, num_pairs: usize) -> Self {
        let coverage_fraction = coverage_fraction(covered.len(), num_pairs);
        CoverageRecord {
            transformation,
            covered,
            coverage_fraction,
        }
    }
}

/// Per-pair sets of units known not to appear in any transformation
/// covering that pair, plus application counters.
///
/// Units are identified by their id in the pool being evaluated, so a
/// cache must only be reused with the pool it was first used with.
#[derive(Clone, Debug, Default)]
pub struct NonCoveringCache {
    per_pair: Vec<BitSet>,
    attempted: u64,
    skipped: u64,
}

#[derive(Clone, Debug, Default)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn contains(&self, i: UnitId) -> bool {
        let i = i as usize;
        self.0.get(i / 64).is_some_and(|w| w & (1 << (i % 64)) != 0)
    }

    fn insert(&mut self, i: UnitId) {
        let i = i as usize;
        if i / 64 >= self.0.len() {
            self.0.resize(i / 64 + 1, 0);
        }
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

impl NonCoveringCache {
    pub fn new(num_pairs: usize) -> NonCoveringCache {
        NonCoveringCache {
            per_pair: vec![BitSet::default(); num_pairs],
            attempted: 0,
            skipped: 0,
        }
    }

    /// Whether the pool unit `unit` is cached as non-covering for `pair`.
    pub fn contains(&self, pair: PairId, unit: UnitId) -> bool {
        self.per_pair
            .get(pair as usize)
            .is_some_and(|b| b.contains(unit))
    }

    /// Cached unit ids for a pair, ascending.
    pub fn cached_units(&self, pair: PairId) -> Vec<UnitId> {
        let Some(bits) = self.per_pair.get(pair as usize) else {
            return Vec::new();
        };
        (0..bits.0.len() * 64)
            .map(|i| i as UnitId)
            .filter(|&i| bits.contains(i))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.per_pair.iter().map(BitSet::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (transformation, pair) applications actually performed.
    pub fn attempted(&self) -> u64 {
        self.attempted
    }

    /// (transformation, pair) applications avoided because a unit was cached.
    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    /// `skipped / (skipped + attempted)`, 0 when nothing was evaluated.
    pub fn hit_ratio(&self) -> f64 {
        let total = self.skipped + self.attempted;
        if total == 0 {
            0.0
        } else {
            self.skipped as f64 / total as f64
        }
    }
}

/// Trie over the pool's sorted unit-id sequences.
struct Trie {
    nodes: Vec<Node>,
    roots: std::ops::Range<u32>,
}

struct Node {
    unit: UnitId,
    /// Sequences below this node occupy `lo..hi` of the pool.
    lo: u32,
    hi: u32,
    /// The sequence ending at this node (always `lo` when present).
    terminal: bool,
    children: std::ops::Range<u32>,
}

impl Trie {
    fn build(seqs: &[Box<[UnitId]>]) -> Trie {
        let mut nodes = Vec::new();
        let roots = Self::level(seqs, 0, seqs.len(), 0, &mut nodes);
        Trie { nodes, roots }
    }

    fn level(
        seqs: &[Box<[UnitId]>],
        lo: usize,
        hi: usize,
        depth: usize,
        nodes: &mut Vec<Node>,
    ) -> std::ops::Range<u32> {
        let mut groups = Vec::new();
        let mut i = lo;
        while i < hi {
            if seqs[i].len() <= depth {
                i += 1;
                continue;
            }
            let unit = seqs[i][depth];
            let mut j = i + 1;
            while j < hi && seqs[j].len() > depth && seqs[j][depth] == unit {
                j += 1;
            }
            groups.push((unit, i, j));
            i = j;
        }
        let first = nodes.len() as u32;
        for &(unit, a, b) in &groups {
            nodes.push(Node {
                unit,
                lo: a as u32,
                hi: b as u32,
                terminal: seqs[a].len() == depth + 1,
                children: 0..0,
            });
        }
        for (k, &(_, a, b)) in groups.iter().enumerate() {
            let children = Self::level(seqs, a, b, depth + 1, nodes);
            nodes[first as usize + k].children = children;
        }
        first..first + groups.len() as u32
    }
}

/// Character views of the pool's units.
enum Compiled {
    Copy(Unit),
    Literal(Vec<char>),
}

fn is_substring(needle: &[char], hay: &[char]) -> bool {
    needle.is_empty() || hay.windows(needle.len()).any(|w| w == needle)
}

const FAILED: u32 = u32::MAX;

/// Per-thread memo of unit outputs, invalidated by bumping `stamp`.
#[derive(Default)]
struct Scratch {
    stamp: u32,
    seen: Vec<u32>,
    /// Output as a source range, or `(FAILED, _)`.
    range: Vec<(u32, u32)>,
    /// 0 unknown, 1 substring of the target, 2 not.
    inside: Vec<u8>,
}

impl Scratch {
    fn reset(&mut self, n_units: usize) {
        if self.seen.len() < n_units {
            self.seen.resize(n_units, 0);
            self.range.resize(n_units, (0, 0));
            self.inside.resize(n_units, 0);
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
    }
}

#[derive(Clone, Copy)]
enum Out {
    Literal(usize),
    Source(usize, usize),
}

struct PairEval<'a, 's> {
    src: Vec<char>,
    tgt: Vec<char>,
    compiled: &'a [Compiled],
    scratch: &'s mut Scratch,
    cache: BitSet,
    attempted: u64,
    skipped: u64,
    covered: Vec<u32>,
    /// Cache insertions so far, to avoid rechecking an unchanged path.
    inserted: u64,
}

impl PairEval<'_, '_> {
    fn any_cached(&self, path: &[UnitId]) -> bool {
        path.iter().any(|&u| self.cache.contains(u))
    }

    /// Output of unit `uid` on this pair's source, memoized. `None` when
    /// the unit fails; the text is read back with [`PairEval::text`].
    fn output(&mut self, uid: UnitId) -> Option<Out> {
        let i = uid as usize;
        if let Compiled::Literal(_) = &self.compiled[i] {
            return Some(Out::Literal(i));
        }
        if self.scratch.seen[i] != self.scratch.stamp {
            self.scratch.seen[i] = self.scratch.stamp;
            self.scratch.inside[i] = 0;
            self.scratch.range[i] = match &self.compiled[i] {
                Compiled::Copy(unit) => match unit.source_range(&self.src).expect("copy unit") {
                    Ok(r) => (r.start as u32, r.end as u32),
                    Err(_) => (FAILED, 0),
                },
                Compiled::Literal(_) => unreachable!(),
            };
        }
        let (a, b) = self.scratch.range[i];
        (a != FAILED).then_some(Out::Source(a as usize, b as usize))
    }

    fn text(&self, out: Out) -> &[char] {
        match out {
            Out::Literal(i) => match &self.compiled[i] {
                Compiled::Literal(chars) => chars,
                Compiled::Copy(_) => unreachable!(),
            },
            Out::Source(a, b) => &self.src[a..b],
        }
    }

    /// Whether unit `uid` fails or produces text absent from the target.
    fn non_covering(&mut self, uid: UnitId) -> bool {
        let i = uid as usize;
        let memo = matches!(self.compiled[i], Compiled::Copy(_));
        if memo && self.scratch.inside[i] != 0 {
            return self.scratch.inside[i] == 2;
        }
        let verdict = match self.output(uid) {
            None => true,
            Some(out) => !is_substring(self.text(out), &self.tgt),
        };
        if memo {
            self.scratch.inside[i] = if verdict { 2 } else { 1 };
        }
        verdict
    }

    /// Number of sequences below `node` (inclusive) with no cached unit,
    /// stopping early once `limit` are found. Ancestors are uncached.
    fn count_uncached(&self, trie: &Trie, node_idx: u32, limit: u64) -> u64 {
        let node = &trie.nodes[node_idx as usize];
        if self.cache.contains(node.unit) {
            return 0;
        }
        let mut n = node.terminal as u64;
        for child in node.children.clone() {
            if n >= limit {
                break;
            }
            n += self.count_uncached(trie, child, limit - n);
        }
        n
    }

    /// Walks the subtree of `node` with the target matched up to `pos` by
    /// the units on `path`.
    ///
    /// Sequences are visited in pool order and the outcome equals applying
    /// each one separately: a sequence is skipped when any of its units is
    /// cached at the time it is reached, otherwise it is applied until the
    /// first unit breaking the target prefix, which is cached when it fails
    /// or is not a substring of the target.
    fn visit(&mut self, trie: &Trie, node_idx: u32, pos: usize, path: &mut Vec<UnitId>) {
        let node = &trie.nodes[node_idx as usize];
        let size = (node.hi - node.lo) as u64;
        // Callers have checked that no unit on `path` is cached.
        if self.cache.contains(node.unit) {
            self.skipped += size;
            return;
        }
        path.push(node.unit);
        let tgt_len = self.tgt.len();
        let next = match self.output(node.unit) {
            Some(out) => {
                let out = self.text(out);
                let end = pos + out.len();
                (end <= tgt_len && self.tgt[pos..end] == *out).then_some(end)
            }
            None => None,
        };
        match next {
            Some(end) => {
                if node.terminal {
                    self.attempted += 1;
                    if end == tgt_len {
                        self.covered.push(node.lo);
                    }
                }
                let mut checked = self.inserted;
                for child in node.children.clone() {
                    if self.inserted != checked && self.any_cached(path) {
                        let from = trie.nodes[child as usize].lo;
                        self.skipped += (node.hi - from) as u64;
                        break;
                    }
                    checked = self.inserted;
                    self.visit(trie, child, end, path);
                }
            }
            None => {
                // Every sequence below breaks at this unit. If the unit is
                // non-covering, the first applied sequence caches it and the
                // rest are skipped; otherwise each uncached one is applied.
                let applied = if self.non_covering(node.unit) {
                    let first = self.count_uncached(trie, node_idx, 1);
                    if first > 0 {
                        self.cache.insert(node.unit);
                        self.inserted += 1;
                    }
                    first
                } else {
                    self.count_uncached(trie, node_idx, u64::MAX)
                };
                self.attempted += applied;
                self.skipped += size - applied;
            }
        }
        path.pop();
    }
}

/// Exact coverage of every pool transformation over `pairs`, in pool order.
///
/// A (transformation, pair) application is skipped when one of its units
/// is cached as non-covering for the pair. Applications stop at the first
/// unit whose output breaks the target prefix, and any unit whose output is
/// not a substring of the target (or that fails) is cached. Pairs are
/// evaluated independently in parallel, each walking the pool in order, so
/// records, cache contents and counters are deterministic.
pub fn evaluate_coverage(
    pool: &CandidatePool,
    pairs: &[CandidatePair],
    cache: &mut NonCoveringCache,
) -> Vec<CoverageRecord> {
    evaluate_coverage_sets(pool, pairs, cache)
        .into_iter()
        .enumerate()
        .map(|(i, c)| CoverageRecord::new(pool.transformation(i), c, pairs.len()))
        .collect()
}

/// The covered pair ids of each pool transformation, as computed by
/// [`evaluate_coverage`], without building the transformations.
pub fn evaluate_coverage_sets(
    pool: &CandidatePool,
    pairs: &[CandidatePair],
    cache: &mut NonCoveringCache,
) -> Vec<Vec<PairId>> {
    if cache.per_pair.len() < pairs.len() {
        cache.per_pair.resize(pairs.len(), BitSet::default());
    }
    let compiled: Vec<Compiled> = pool
        .units()
        .iter()
        .map(|(_, u)| match u {
            Unit::Literal(text) => Compiled::Literal(text.chars().collect()),
            other => Compiled::Copy(other.clone()),
        })
        .collect();
    let trie = Trie::build(pool.sequences());
    let n_units = pool.units().len();

    let results: Vec<(Vec<u32>, BitSet, u64, u64)> = pairs
        .par_iter()
        .zip(cache.per_pair.par_iter())
        .map_init(Scratch::default, |scratch, (pair, prior)| {
            scratch.reset(n_units);
            let mut bits = prior.clone();
            if bits.0.len() * 64 < n_units {
                bits.0.resize(n_units.div_ceil(64), 0);
            }
            let mut ev = PairEval {
                src: pair.source.chars().collect(),
                tgt: pair.target.chars().collect(),
                compiled: &compiled,
                scratch,
                cache: bits,
                attempted: 0,
                skipped: 0,
                covered: Vec::new(),
                inserted: 0,
            };
            let mut path = Vec::new();
            for root in trie.roots.clone() {
                ev.visit(&trie, root, 0, &mut path);
            }
            (ev.covered, ev.cache, ev.attempted, ev.skipped)
        })
        .collect();

    let mut covered: Vec<Vec<PairId>> = vec![Vec::new(); pool.len()];
    for (pair_id, (hits, bits, attempted, skipped)) in results.into_iter().enumerate() {
        for seq in hits {
            covered[seq as usize].push(pair_id as PairId);
        }
        cache.per_pair[pair_id] = bits;
        cache.attempted += attempted;
        cache.skipped += skipped;
    }
    covered
}

/// Reference evaluation: every transformation applied to every pair.
pub fn evaluate_coverage_unpruned(pool: &CandidatePool, pairs: &[CandidatePair]) -> Vec<CoverageRecord> {
    (0..pool.len())
        .into_par_iter()
        .map(|i| {
            let t = pool.transformation(i);
            let covered = pairs
                .iter()
                .enumerate()
                .filter(|(_, p)| covers(&t, &p.source, &p.target))
                .map(|(k, _)| k as PairId)
                .collect();
            CoverageRecord::new(t, covered, pairs.len())
        })
        .collect()
}

/// Ranking used by [`top_k`] and [`greedy_min_cover`]: larger coverage first,
/// then [`Transformation::preference_key`].
pub fn compare_records(a: &CoverageRecord, b: &CoverageRecord) -> Ordering {
    b.covered
        .len()
        .cmp(&a.covered.len())
        .then_with(|| a.transformation.preference_key().cmp(&b.transformation.preference_key()))
}

/// Position of each record when sorted by
/// [`Transformation::preference_key`] alone.
///
/// Printed unit forms are prefix-free, so for sequences of equal length the
/// printed transformations compare like their per-unit printed forms. Each
/// distinct unit is printed once and ranked, and records compare by unit
/// ranks instead of by their full printed text.
pub fn preference_ranks(records: &[CoverageRecord]) -> Vec<usize> {
    let mut distinct: HashMap<&Unit, u32> = HashMap::new();
    for r in records {
        for u in r.transformation.units() {
            distinct.entry(u).or_insert(0);
        }
    }
    let mut printed: Vec<(String, &Unit)> = distinct.keys().map(|u| (u.to_string(), *u)).collect();
    printed.par_sort_unstable_by(|x, y| x.0.cmp(&y.0));
    for (rank, (_, u)) in printed.iter().enumerate() {
        distinct.insert(u, rank as u32);
    }
    let keys: Vec<(usize, usize, Vec<u32>)> = records
        .par_iter()
        .map(|r| {
            let t = &r.transformation;
            (t.len(), t.literal_count(), t.units().iter().map(|u| distinct[u]).collect())
        })
        .collect();
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.par_sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut rank = vec![0; records.len()];
    for (r, i) in order.into_iter().enumerate() {
        rank[i] = r;
    }
    rank
}

/// The `k` records with the largest coverage.
///
/// # Panics
/// Panics if `k == 0`.
pub fn top_k(records: &[CoverageRecord], k: usize) -> Vec<CoverageRecord> {
    top_k_ranked(records, &preference_ranks(records), k)
}

/// [`top_k`] with ranks from [`preference_ranks`] computed by the caller.
pub fn top_k_ranked(records: &[CoverageRecord], rank: &[usize], k: usize) -> Vec<CoverageRecord> {
    top_k_indices(records.len(), |i| &records[i].covered, rank, k)
        .into_iter()
        .map(|i| records[i].clone())
        .collect()
}

/// Indices of the `k` best of `n` candidates, where candidate `i` covers
/// `covered(i)` and ties go to the lower `rank[i]`.
///
/// # Panics
/// Panics if `k == 0`.
pub fn top_k_indices<'a>(n: usize, covered: impl Fn(usize) -> &'a [PairId], rank: &[usize], k: usize) -> Vec<usize> {
    assert!(k >= 1, "k must be at least 1");
    let mut order: Vec<usize> = (0..n).collect();
    let key = |&i: &usize| (Reverse(covered(i).len()), rank[i]);
    if order.len() > k {
        order.select_nth_unstable_by_key(k - 1, key);
        order.truncate(k);
    }
    order.sort_unstable_by_key(key);
    order
}

/// One step of the greedy cover.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPick {
    pub record: CoverageRecord,
    /// Pairs first covered by this pick.
    pub marginal: Vec<PairId>,
}

/// Greedy set cover: repeatedly picks the record covering the most
/// still-uncovered pairs until no record adds anything.
pub fn greedy_min_cover(records: &[CoverageRecord], num_pairs: usize) -> Vec<CoverPick> {
    greedy_min_cover_ranked(records, &preference_ranks(records), num_pairs)
}

/// [`greedy_min_cover`] with ranks from [`preference_ranks`] computed by the caller.
pub fn greedy_min_cover_ranked(records: &[CoverageRecord], rank: &[usize], num_pairs: usize) -> Vec<CoverPick> {
    greedy_cover_indices(records.len(), |i| &records[i].covered, rank, num_pairs)
        .into_iter()
        .map(|(i, marginal)| CoverPick {
            record: records[i].clone(),
            marginal,
        })
        .collect()
}

/// Greedy cover over `n` candidates given by their covered sets, returning
/// each pick's index and newly covered pairs. Ties go to the lower `rank[i]`.
pub fn greedy_cover_indices<'a>(
    n: usize,
    covered: impl Fn(usize) -> &'a [PairId],
    rank: &[usize],
    num_pairs: usize,
) -> Vec<(usize, Vec<PairId>)> {
    let mut uncovered = vec![true; num_pairs];
    // Stored gains are upper bounds on current gains (lazy evaluation).
    let mut heap: BinaryHeap<(usize, Reverse<usize>, usize)> = (0..n)
        .filter(|&i| !covered(i).is_empty())
        .map(|i| (covered(i).len(), Reverse(rank[i]), i))
        .collect();
    let mut picks = Vec::new();
    let mut remaining = num_pairs;
    while let Some((stored, r, i)) = heap.pop() {
        if remaining == 0 {
            break;
        }
        let marginal: Vec<PairId> = covered(i)
            .iter()
            .copied()
            .filter(|&p| uncovered.get(p as usize).copied().unwrap_or(false))
            .collect();
        if marginal.is_empty() {
            continue;
        }
        if marginal.len() < stored {
            heap.push((marginal.len(), r, i));
            continue;
        }
        for &p in &marginal {
            uncovered[p as usize] = false;
        }
        remaining -= marginal.len();
        picks.push((i, marginal));
    }
    picks
}

/// Keeps records whose coverage fraction reaches `min_support` (inclusive).
pub fn filter_by_support(records: Vec<CoverageRecord>, min_support: f64) -> Vec<CoverageRecord> {
    records.into_iter().filter(|r| meets_support(r, min_support)).collect()
}

pub fn meets_support(record: &CoverageRecord, min_support: f64) -> bool {
    fraction_meets_support(record.coverage_fraction, min_support)
}

pub fn fraction_meets_support(fraction: f64, min_support: f64) -> bool {
    fraction + 1e-12 >= min_support
}

/// A uniform sample of `size` pairs without replacement, in input order.
///
/// # Panics
/// Panics unless `1 <= size <= pairs.len()`.
pub fn sample_pairs(pairs: &[CandidatePair], size: usize, seed: u64) -> Vec<CandidatePair> {
    assert!(size >= 1 && size <= pairs.len(), "sample size out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, pairs.len(), size).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| pairs[i].clone()).collect()
}

/// Probability that a transformation covering a fraction `q` of the input
/// is supported by at least two rows of a uniform sample of size `s`.
pub fn detection_probability(q: f64, s: u32) -> f64 {
    let none = (1.0 - q).powi(s as i32);
    let one = s as f64 * q * (1.0 - q).powi(s as i32 - 1);
    1.0 - none - one
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::candidates::{generate_candidates, GenerationConfig};

    fn tr(s: &str) -> Transformation {
        s.parse().unwrap()
    }

    fn rec(t: &str, covered: &[PairId], n: usize) -> CoverageRecord {
        CoverageRecord::new(tr(t), covered.to_vec(), n)
    }

    #[test]
    fn reindexed_pair_full_coverage() {
        let t3 = tr("<Literal('d'), Substr(4,7), Literal('.'), Substr(9,11), Literal('b')>");
        let pool = CandidatePool::from_transformations([&t3]);
        let pairs = [
            CandidatePair::new(0, 0, "abcdefghijklmn", "defg.jkb"),
            CandidatePair::new(1, 1, "0123456789abcd", "d456.9ab"),
        ];
        let mut cache = NonCoveringCache::new(2);
        let recs = evaluate_coverage(&pool, &pairs, &mut cache);
        assert_eq!(recs[0].covered, vec![0, 1]);
        assert_eq!(recs[0].coverage_fraction, 1.0);
    }

    #[test]
    fn substring_outputs_are_not_cached() {
        let split = tr("<Split(',',1)>");
        let pool = CandidatePool::from_transformations([&split]);
        let unit = pool.units().id_of(&split.units()[0]).unwrap();
        let pairs = [
            CandidatePair::new(0, 0, "bowling, michael", "m bowling"),
            CandidatePair::new(1, 1, "gosgnach, simon", "(780) 432-4814"),
        ];
        let mut cache = NonCoveringCache::new(2);
        let recs = evaluate_coverage(&pool, &pairs, &mut cache);
        assert!(recs[0].covered.is_empty());
        assert!(!cache.contains(0, unit));
        assert!(cache.contains(1, unit));
    }

    #[test]
    fn cached_units_skip_later_transformations() {
        let ts = [
            tr("<Split(',',1)>"),
            tr("<Split(',',1), Literal('x')>"),
            tr("<Literal('('), Split(',',1)>"),
        ];
        let pool = CandidatePool::from_transformations(ts.iter());
        let pairs = [CandidatePair::new(0, 0, "gosgnach, simon", "(780) 432-4814")];
        let mut cache = NonCoveringCache::new(1);
        evaluate_coverage(&pool, &pairs, &mut cache);
        assert_eq!(cache.attempted() + cache.skipped(), 3);
        assert!(cache.skipped() >= 1);
    }

    #[test]
    fn empty_pool() {
        let mut cache = NonCoveringCache::new(3);
        let pairs = vec![CandidatePair::of("a", "b"); 3];
        assert!(evaluate_coverage(&CandidatePool::default(), &pairs, &mut cache).is_empty());
        assert_eq!((cache.attempted(), cache.skipped()), (0, 0));
        assert_eq!(cache.hit_ratio(), 0.0);
    }

    /// Applies every pool sequence to every pair in pool order with the
    /// cache semantics spelled out one transformation at a time.
    fn naive_counters(pool: &CandidatePool, pairs: &[CandidatePair]) -> (Vec<Vec<PairId>>, Vec<Vec<UnitId>>, u64, u64) {
        let mut covered = vec![Vec::new(); pool.len()];
        let mut cached_all = Vec::new();
        let (mut attempted, mut skipped) = (0, 0);
        for (pid, pair) in pairs.iter().enumerate() {
            let src: Vec<char> = pair.source.chars().collect();
            let tgt: Vec<char> = pair.target.chars().collect();
            let mut cached = std::collections::BTreeSet::new();
            for (seq, hits) in pool.sequences().iter().zip(covered.iter_mut()) {
                if seq.iter().any(|u| cached.contains(u)) {
                    skipped += 1;
                    continue;
                }
                attempted += 1;
                let mut pos = 0;
                let mut ok = true;
                for &uid in seq.iter() {
                    match pool.units().get(uid).apply_chars(&src) {
                        Err(_) => {
                            cached.insert(uid);
                            ok = false;
                        }
                        Ok(out) => {
                            let out: Vec<char> = out.chars().collect();
                            if tgt.len() >= pos + out.len() && tgt[pos..pos + out.len()] == out[..] {
                                pos += out.len();
                                continue;
                            }
                            if !is_substring(&out, &tgt) {
                                cached.insert(uid);
                            }
                            ok = false;
                        }
                    }
                    break;
                }
                if ok && pos == tgt.len() {
                    hits.push(pid as PairId);
                }
            }
            cached_all.push(cached.into_iter().collect());
        }
        (covered, cached_all, attempted, skipped)
    }

    fn assert_matches_naive(pairs: &[CandidatePair]) {
        let pool = generate_candidates(pairs, &GenerationConfig::default());
        let mut cache = NonCoveringCache::new(pairs.len());
        let records = evaluate_coverage(&pool, pairs, &mut cache);
        let (covered, cached, attempted, skipped) = naive_counters(&pool, pairs);
        let got: Vec<Vec<PairId>> = records.iter().map(|r| r.covered.clone()).collect();
        assert_eq!(got, covered);
        for (pid, want) in cached.iter().enumerate() {
            assert_eq!(&cache.cached_units(pid as PairId), want, "pair {pid}");
        }
        assert_eq!((cache.attempted(), cache.skipped()), (attempted, skipped));
    }

    #[test]
    fn counters_match_one_at_a_time_evaluation() {
        assert_matches_naive(&[
            CandidatePair::new(0, 0, "bowling, michael", "m bowling"),
            CandidatePair::new(1, 1, "gosgnach, simon", "s gosgnach"),
            CandidatePair::new(2, 2, "gosgnach, simon", "(780) 432-4814"),
            CandidatePair::new(3, 3, "rafiei, davood", "d rafiei"),
        ]);
        for seed in 0..6 {
            let b = crate::synthgen::generate_benchmark(&crate::synthgen::SynthParams::synth(12, seed));
            let mut pairs = crate::table::pairs_from_ids(&b.source, &b.target, b.golden_pairs.iter().copied());
            // Corrupted targets exercise the caching paths.
            let corrupted: Vec<CandidatePair> = pairs
                .iter()
                .take(3)
                .map(|p| {
                    let mut t: String = p.target.chars().skip(1).collect();
                    t.push('~');
                    CandidatePair::new(p.source_id + 100, p.target_id + 100, p.source.clone(), t)
                })
                .collect();
            pairs.extend(corrupted);
            assert_matches_naive(&pairs);
        }
    }

    #[test]
    fn unit_ranks_agree_with_printed_order() {
        let b = crate::synthgen::generate_benchmark(&crate::synthgen::SynthParams::synth(8, 3));
        let pairs = crate::table::pairs_from_ids(&b.source, &b.target, b.golden_pairs.iter().copied());
        let pool = generate_candidates(&pairs, &GenerationConfig::default());
        let records = evaluate_coverage_unpruned(&pool, &pairs);
        let rank = preference_ranks(&records);
        let mut by_rank: Vec<usize> = (0..records.len()).collect();
        by_rank.sort_by_key(|&i| rank[i]);
        let mut by_key = by_rank.clone();
        by_key.sort_by_key(|&i| records[i].transformation.preference_key());
        assert_eq!(by_rank, by_key);
        assert_eq!(pool.preference_ranks(), rank);
    }

    #[test]
    fn pruned_matches_unpruned() {
        let pairs = vec![
            CandidatePair::new(0, 0, "bowling, michael", "m bowling"),
            CandidatePair::new(1, 1, "gosgnach, simon", "s gosgnach"),
            CandidatePair::new(2, 2, "prus-czarnecki, andrzej", "a prus-czarnecki"),
            CandidatePair::new(3, 3, "rafiei, davood", "d rafiei"),
        ];
        let pool = generate_candidates(&pairs, &GenerationConfig::default());
        let mut cache = NonCoveringCache::new(pairs.len());
        let fast = evaluate_coverage(&pool, &pairs, &mut cache);
        let slow = evaluate_coverage_unpruned(&pool, &pairs);
        assert_eq!(fast, slow);
        assert!(cache.hit_ratio() > 0.5);
        let best = &top_k(&fast, 1)[0];
        assert_eq!(best.covered.len(), 4);
        let walkthrough = tr("<SplitSubstr(' ',2,0,1), Literal(' '), Split(',',1)>");
        let rec = fast.iter().find(|r| r.transformation == walkthrough).unwrap();
        assert_eq!(rec.covered, vec![0, 1, 2, 3]);
        // Copying the space after the comma ties on coverage and length and
        // wins on the literal count.
        assert_eq!(
            best.transformation.to_string(),
            "<SplitSubstr(' ',2,0,1), SplitSubstr(',',2,0,1), Split(',',1)>"
        );
    }

    #[test]
    fn top_k_orders_by_coverage_then_preference() {
        let recs = [
            rec("<Literal('a'), Substr(0,1)>", &[0, 1, 2], 5),
            rec("<Substr(0,2)>", &[0, 1, 2, 3, 4], 5),
            rec("<Substr(0,1)>", &[1, 2, 3], 5),
        ];
        let top = top_k(&recs, 2);
        assert_eq!(top[0].transformation.to_string(), "<Substr(0,2)>");
        assert_eq!(top[1].transformation.to_string(), "<Substr(0,1)>");
        assert_eq!(top_k(&recs, 10).len(), 3);
    }

    #[test]
    fn copying_beats_literal_on_ties() {
        let recs = [rec("<Literal('abc')>", &[0], 1), rec("<Substr(0,3)>", &[0], 1)];
        assert_eq!(top_k(&recs, 1)[0].transformation.to_string(), "<Substr(0,3)>");
    }

    #[test]
    fn greedy_disjoint_and_nested() {
        let disjoint = [
            rec("<Substr(0,1)>", &[0, 1], 6),
            rec("<Substr(0,2)>", &[2, 3], 6),
            rec("<Substr(0,3)>", &[4, 5], 6),
        ];
        assert_eq!(greedy_min_cover(&disjoint, 6).len(), 3);
        let nested = [
            rec("<Substr(0,1)>", &[0, 1], 4),
            rec("<Substr(0,2)>", &[0, 1, 2, 3], 4),
            rec("<Substr(0,3)>", &[3], 4),
        ];
        let picks = greedy_min_cover(&nested, 4);
        assert_eq!(picks.len(), 1);
        assert_eq!(picks[0].marginal, vec![0, 1, 2, 3]);
    }

    #[test]
    fn greedy_reports_marginals_in_pick_order() {
        let recs = [
            rec("<Substr(0,1)>", &[0, 1, 2], 5),
            rec("<Substr(0,2)>", &[2, 3], 5),
            rec("<Substr(0,3)>", &[3, 4], 5),
        ];
        let picks = greedy_min_cover(&recs, 5);
        let marginals: Vec<_> = picks.iter().map(|p| p.marginal.clone()).collect();
        assert_eq!(marginals, vec![vec![0, 1, 2], vec![3, 4]]);
    }

    #[test]
    fn support_filter() {
        let recs = [rec("<Substr(0,1)>", &[0], 200), rec("<Substr(0,2)>", &[0, 1], 200)];
        assert_eq!(filter_by_support(recs.to_vec(), 0.0).len(), 2);
        let kept = filter_by_support(recs.to_vec(), 0.01);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].covered.len(), 2);
    }

    #[test]
    fn sampling_is_seeded() {
        let pairs: Vec<_> = (0..50).map(|i| CandidatePair::new(i, i, "s", "t")).collect();
        assert_eq!(sample_pairs(&pairs, 50, 1), pairs);
        let a = sample_pairs(&pairs, 10, 7);
        assert_eq!(a, sample_pairs(&pairs, 10, 7));
        assert_eq!(a.len(), 10);
        assert!(a.windows(2).all(|w| w[0].source_id < w[1].source_id));
    }

    #[test]
    fn detection_probability_values() {
        assert!((detection_probability(0.05, 100) - 0.9629).abs() < 1e-4);
        assert_eq!(detection_probability(1.0, 7), 1.0);
        assert!((detection_probability(0.5, 2) - 0.25).abs() < 1e-12);
    }
}
