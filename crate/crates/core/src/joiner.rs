//! Equi-join of two columns under a set of transformations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::table::{ColumnTable, RowId};
use crate::transform::Transformation;

/// One joined row pair with the indices of the transformations witnessing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinedPair {
    pub source_id: RowId,
    pub target_id: RowId,
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JoinResult {
    /// Transformations referenced by `JoinedPair::witnesses`.
    pub transformations: Vec<Transformation>,
    /// Sorted by (source id, target id), no duplicates.
    pub pairs: Vec<JoinedPair>,
}

impl JoinResult {
    pub fn id_pairs(&self) -> BTreeSet<(RowId, RowId)> {
        self.pairs.iter().map(|p| (p.source_id, p.target_id)).collect()
    }
}

/// Precision, recall and F1 against golden pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JoinMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when the join emitted nothing and precision fell back to 1.
    pub empty_result: bool,
}

/// Applies each transformation to every source row and joins the rows whose
/// output equals a target row's text. Rows where a transformation fails are
/// skipped.
///
/// # Panics
/// Panics if `ts` is empty.
pub fn transform_join(src: &ColumnTable, tgt: &ColumnTable, ts: &[Transformation]) -> JoinResult {
    assert!(!ts.is_empty(), "at least one transformation is required");
    let mut by_text: HashMap<&str, Vec<RowId>> = HashMap::new();
    for (id, text) in tgt.rows() {
        by_text.entry(text.as_str()).or_default().push(*id);
    }
    let hits: Vec<Vec<(RowId, RowId, usize)>> = src
        .rows()
        .par_iter()
        .map(|(sid, text)| {
            let chars: Vec<char> = text.chars().collect();
            let mut out = Vec::new();
            for (k, t) in ts.iter().enumerate() {
                if let Ok(value) = t.apply_chars(&chars) {
                    for tid in by_text.get(value.as_str()).into_iter().flatten() {
                        out.push((*sid, *tid, k));
                    }
                }
            }
            out
        })
        .collect();
    let mut merged: BTreeMap<(RowId, RowId), Vec<usize>> = BTreeMap::new();
    for (s, t, k) in hits.into_iter().flatten() {
        merged.entry((s, t)).or_default().push(k);
    }
    JoinResult {
        transformations: ts.to_vec(),
        pairs: merged
            .into_iter()
            .map(|((source_id, target_id), mut witnesses)| {
                witnesses.sort_unstable();
                witnesses.dedup();
                JoinedPair {
                    source_id,
                    target_id,
                    witnesses,
                }
            })
            .collect(),
    }
}

/// Scores emitted pairs against `golden`. An empty result has precision 1.
pub fn evaluate_pairs(emitted: &BTreeSet<(RowId, RowId)>, golden: &BTreeSet<(RowId, RowId)>) -> JoinMetrics {
    let hit = emitted.intersection(golden).count() as f64;
    let empty_result = emitted.is_empty();
    let precision = if empty_result { 1.0 } else { hit / emitted.len() as f64 };
    let recall = if golden.is_empty() { 0.0 } else { hit / golden.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    JoinMetrics {
        precision,
        recall,
        f1,
        empty_result,
    }
}

pub fn evaluate_join(result: &JoinResult, golden: &BTreeSet<(RowId, RowId)>) -> JoinMetrics {
    evaluate_pairs(&result.id_pairs(), golden)
}
