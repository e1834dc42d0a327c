//! Reading and writing tables, pair lists and transformation files.
//!
//! Tables are RFC 4180 CSV files with a header row. Row ids follow file
//! order starting at 0. Pair lists have the header `source_id,target_id`.
//! Transformation files hold one grammar expression per line; blank lines
//! and lines starting with `#` are ignored.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::config::Normalization;
use crate::grammar::parse_transformation;
use crate::joiner::JoinResult;
use crate::table::{ColumnTable, RowId};
use crate::transform::Transformation;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: no column {requested}; available columns: {}", .available.join(", "))]
    MissingColumn {
        path: String,
        requested: String,
        available: Vec<String>,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}:{column}: expected {expected}")]
    Transformation {
        path: String,
        line: usize,
        column: usize,
        expected: String,
    },
}

/// Selects a CSV column by header name or by 0-based position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSelector {
    Name(String),
    Index(usize),
}

impl ColumnSelector {
    /// All-digit text selects by position, anything else by name.
    pub fn parse(text: &str) -> ColumnSelector {
        match text.parse::<usize>() {
            Ok(i) => ColumnSelector::Index(i),
            Err(_) => ColumnSelector::Name(text.to_string()),
        }
    }
}

impl std::fmt::Display for ColumnSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnSelector::Name(n) => write!(f, "'{n}'"),
            ColumnSelector::Index(i) => write!(f, "at index {i}"),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    let message = e.to_string();
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io {
            path: path.display().to_string(),
            source,
        },
        _ => IoError::Malformed {
            path: path.display().to_string(),
            line,
            message,
        },
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

/// Reads one column of a CSV table, applying `normalization` to every row.
pub fn ingest(path: &Path, column: &ColumnSelector, normalization: Normalization) -> Result<ColumnTable, IoError> {
    let mut reader = open_csv(path)?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let idx = match column {
        ColumnSelector::Name(name) => headers.iter().position(|h| h == name),
        ColumnSelector::Index(i) => (*i < headers.len()).then_some(*i),
    }
    .ok_or_else(|| IoError::MissingColumn {
        path: path.display().to_string(),
        requested: column.to_string(),
        available: headers.clone(),
    })?;
    let mut texts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        texts.push(normalization.apply(&record[idx]));
    }
    Ok(ColumnTable::from_texts(texts))
}

/// Reads a `source_id,target_id` pair list.
pub fn read_pairs(path: &Path) -> Result<BTreeSet<(RowId, RowId)>, IoError> {
    let mut reader = open_csv(path)?;
    let mut out = BTreeSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<RowId, IoError> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| IoError::Malformed {
                    path: path.display().to_string(),
                    line,
                    message: format!("field {} is not a row id", i + 1),
                })
        };
        out.insert((field(0)?, field(1)?));
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn finish_csv<W: Write>(path: &Path, w: csv::Writer<W>) -> Result<(), IoError> {
    w.into_inner()
        .map_err(|e| IoError::Io {
            path: path.display().to_string(),
            source: std::io::Error::new(e.error().kind(), e.error().to_string()),
        })?
        .flush()
        .map_err(io_err(path))
}

/// Writes a single-column table with the given header.
pub fn write_table(path: &Path, header: &str, table: &ColumnTable) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([header]).map_err(|e| csv_err(path, e))?;
    for (_, text) in table.rows() {
        w.write_record([text]).map_err(|e| csv_err(path, e))?;
    }
    finish_csv(path, w)
}

pub fn write_pairs(path: &Path, pairs: &BTreeSet<(RowId, RowId)>) -> Result<(), IoError> {
    let mut file = create(path)?;
    write_pairs_to(&mut file, pairs).map_err(|e| csv_err(path, e))?;
    file.flush().map_err(io_err(path))
}

/// Writes a `source_id,target_id` pair list to any writer.
pub fn write_pairs_to<W: Write>(out: W, pairs: &BTreeSet<(RowId, RowId)>) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source_id", "target_id"])?;
    for (s, t) in pairs {
        w.write_record([s.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes joined pairs as `source_id,target_id,witness`, one row per pair,
/// naming the first witnessing transformation.
pub fn write_join_pairs<W: Write>(out: W, result: &JoinResult) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source_id", "target_id", "witness"])?;
    for p in &result.pairs {
        let witness = result.transformations[p.witnesses[0]].to_string();
        w.write_record([p.source_id.to_string(), p.target_id.to_string(), witness])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_transformations(path: &Path, ts: &[Transformation]) -> Result<(), IoError> {
    let mut w = create(path)?;
    for t in ts {
        writeln!(w, "{t}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Parses transformation file contents; `path` only labels errors.
pub fn parse_transformations(path: &str, text: &str) -> Result<Vec<Transformation>, IoError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.trim_end();
        if trimmed.trim_start().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let t = parse_transformation(trimmed).map_err(|e| IoError::Transformation {
            path: path.to_string(),
            line: n + 1,
            column: e.column,
            expected: e.expected,
        })?;
        out.push(t);
    }
    Ok(out)
}

pub fn read_transformations(path: &Path) -> Result<Vec<Transformation>, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_transformations(&path.display().to_string(), &text)
}
