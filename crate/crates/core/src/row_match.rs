//! Candidate row matching through representative character n-grams.
//!
//! Every n-gram is scored by the product of its inverse row frequencies in
//! the two columns. For each source row and each n-gram length, the best
//! scoring shared gram is the row's representative, and every target row
//! containing it becomes a candidate partner.

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::table::{CandidatePair, ColumnTable, RowId};

pub const DEFAULT_N0: usize = 4;
pub const DEFAULT_N_MAX: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RowMatchError {
    #[error("n-gram {0:?} is not in the index")]
    UndefinedGram(String),
}

/// Inverted index from character n-grams to the rows containing them.
#[derive(Clone, Debug)]
pub struct NGramIndex {
    n0: usize,
    n_max: usize,
    postings: HashMap<String, Vec<RowId>>,
}

/// Distinct n-grams of `chars` of length `n`.
fn grams_of(chars: &[char], n: usize) -> HashSet<String> {
    if n == 0 || chars.len() < n {
        return HashSet::new();
    }
    chars.windows(n).map(|w| w.iter().collect()).collect()
}

impl NGramIndex {
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Rows containing `gram`, ascending.
    pub fn posting(&self, gram: &str) -> Option<&[RowId]> {
        self.postings.get(gram).map(Vec::as_slice)
    }

    pub fn num_grams(&self) -> usize {
        self.postings.len()
    }

    pub fn grams(&self) -> impl Iterator<Item = (&str, &[RowId])> {
        self.postings.iter().map(|(g, p)| (g.as_str(), p.as_slice()))
    }

    fn count(&self, gram: &str) -> usize {
        self.postings.get(gram).map_or(0, Vec::len)
    }
}

/// # Panics
/// Panics unless `1 <= n0 <= n_max`.
pub fn build_index(col: &ColumnTable, n0: usize, n_max: usize) -> NGramIndex {
    assert!(n0 >= 1 && n0 <= n_max, "n-gram bounds must satisfy 1 <= n0 <= n_max");
    let mut postings: HashMap<String, Vec<RowId>> = HashMap::new();
    for (id, text) in col.rows() {
        let chars: Vec<char> = text.chars().collect();
        for n in n0..=n_max.min(chars.len()) {
            for gram in grams_of(&chars, n) {
                postings.entry(gram).or_default().push(*id);
            }
        }
    }
    for rows in postings.values_mut() {
        rows.sort_unstable();
        rows.dedup();
    }
    NGramIndex {
        n0,
        n_max,
        postings,
    }
}

/// Inverse row frequency: one over the number of rows containing `gram`.
pub fn irf(gram: &str, idx: &NGramIndex) -> Result<f64, RowMatchError> {
    match idx.count(gram) {
        0 => Err(RowMatchError::UndefinedGram(gram.to_string())),
        n => Ok(1.0 / n as f64),
    }
}

/// Representative score; 0 when the gram is missing from either column.
pub fn rscore(gram: &str, src: &NGramIndex, tgt: &NGramIndex) -> f64 {
    match (irf(gram, src), irf(gram, tgt)) {
        (Ok(a), Ok(b)) => a * b,
        _ => 0.0,
    }
}

/// Orders two columns as (source, target): the column with the strictly
/// larger mean length is the source, ties keep the argument order.
pub fn designate_source<'a>(
    a: &'a ColumnTable,
    b: &'a ColumnTable,
) -> (&'a ColumnTable, &'a ColumnTable) {
    if b.avg_len() > a.avg_len() {
        (b, a)
    } else {
        (a, b)
    }
}

/// Best-scoring shared gram of length `n` in `chars`. Scores are compared
/// exactly as inverse products of posting sizes; ties go to the
/// lexicographically smallest gram.
fn representative(chars: &[char], n: usize, src: &NGramIndex, tgt: &NGramIndex) -> Option<String> {
    let mut best: Option<(usize, String)> = None;
    for gram in grams_of(chars, n) {
        let in_tgt = tgt.count(&gram);
        if in_tgt == 0 {
            continue;
        }
        let cost = src.count(&gram).max(1) * in_tgt;
        let better = match &best {
            None => true,
            Some((c, g)) => cost < *c || (cost == *c && gram < *g),
        };
        if better {
            best = Some((cost, gram));
        }
    }
    best.map(|(_, g)| g)
}

/// Candidate joinable pairs between `src` and `tgt`, sorted by (source id, target id).
pub fn find_candidate_pairs(
    src: &ColumnTable,
    tgt: &ColumnTable,
    n0: usize,
    n_max: usize,
) -> Vec<CandidatePair> {
    let src_idx = build_index(src, n0, n_max);
    let tgt_idx = build_index(tgt, n0, n_max);
    let matched: BTreeSet<(RowId, RowId)> = src
        .rows()
        .par_iter()
        .map(|(sid, text)| {
            let chars: Vec<char> = text.chars().collect();
            let mut out = BTreeSet::new();
            for n in n0..=n_max.min(chars.len()) {
                if let Some(rep) = representative(&chars, n, &src_idx, &tgt_idx) {
                    for tid in tgt_idx.posting(&rep).unwrap_or_default() {
                        out.insert((*sid, *tid));
                    }
                }
            }
            out
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    let tgt_text: HashMap<RowId, &str> = tgt.rows().iter().map(|(i, s)| (*i, s.as_str())).collect();
    let src_text: HashMap<RowId, &str> = src.rows().iter().map(|(i, s)| (*i, s.as_str())).collect();
    matched
        .into_iter()
        .map(|(s, t)| CandidatePair::new(s, t, src_text[&s], tgt_text[&t]))
        .collect()
}
