use serde::{Deserialize, Serialize};

pub type RowId = u32;

/// A single text column with stable row ids.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnTable {
    rows: Vec<(RowId, String)>,
    avg_len: f64,
}

impl ColumnTable {
    /// Builds a table whose row ids follow `texts` order, starting at 0.
    pub fn from_texts<I, S>(texts: I) -> ColumnTable
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ColumnTable::from_rows(
            texts
                .into_iter()
                .enumerate()
                .map(|(i, s)| (i as RowId, s.into())),
        )
    }

    /// # Panics
    /// Panics on duplicate row ids.
    pub fn from_rows(rows: impl IntoIterator<Item = (RowId, String)>) -> ColumnTable {
        let rows: Vec<_> = rows.into_iter().collect();
        let mut ids: Vec<RowId> = rows.iter().map(|r| r.0).collect();
        ids.sort_unstable();
        assert!(
            ids.windows(2).all(|w| w[0] != w[1]),
            "row ids must be unique"
        );
        let total: usize = rows.iter().map(|(_, s)| s.chars().count()).sum();
        let avg_len = if rows.is_empty() {
            0.0
        } else {
            total as f64 / rows.len() as f64
        };
        ColumnTable { rows, avg_len }
    }

    pub fn rows(&self) -> &[(RowId, String)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Mean length in characters.
    pub fn avg_len(&self) -> f64 {
        self.avg_len
    }

    pub fn text(&self, id: RowId) -> Option<&str> {
        self.rows
            .iter()
            .find(|(rid, _)| *rid == id)
            .map(|(_, s)| s.as_str())
    }

    pub fn map_texts(&self, f: impl Fn(&str) -> String) -> ColumnTable {
        ColumnTable::from_rows(self.rows.iter().map(|(id, s)| (*id, f(s))))
    }
}

/// A (source row, target row) pair hypothesized to be joinable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CandidatePair {
    pub source_id: RowId,
    pub target_id: RowId,
    pub source: String,
    pub target: String,
}

impl CandidatePair {
    pub fn new(
        source_id: RowId,
        target_id: RowId,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> CandidatePair {
        CandidatePair {
            source_id,
            target_id,
            source: source.into(),
            target: target.into(),
        }
    }

    /// A pair with both ids set to 0, handy for single-pair checks.
    pub fn of(source: impl Into<String>, target: impl Into<String>) -> CandidatePair {
        CandidatePair::new(0, 0, source, target)
    }

    pub fn ids(&self) -> (RowId, RowId) {
        (self.source_id, self.target_id)
    }
}

/// Resolves id pairs against two tables, skipping ids that are absent.
pub fn pairs_from_ids(
    source: &ColumnTable,
    target: &ColumnTable,
    ids: impl IntoIterator<Item = (RowId, RowId)>,
) -> Vec<CandidatePair> {
    use std::collections::HashMap;
    let src: HashMap<RowId, &str> = source.rows().iter().map(|(i, s)| (*i, s.as_str())).collect();
    let tgt: HashMap<RowId, &str> = target.rows().iter().map(|(i, s)| (*i, s.as_str())).collect();
    let mut out: Vec<CandidatePair> = ids
        .into_iter()
        .filter_map(|(s, t)| Some(CandidatePair::new(s, t, *src.get(&s)?, *tgt.get(&t)?)))
        .collect();
    out.sort();
    out.dedup();
    out
}
