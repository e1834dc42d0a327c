//! Synthetic benchmark tables.
//!
//! Source rows are random `[a-z0-9]` strings. A small set of golden
//! transformations alternates copy units with literal blocks; each target
//! row is one uniformly chosen golden transformation applied to its source.
//! Copy units are `Substr` spans inside the shortest possible row, or `Split`
//! on a sentinel character placed at the same position in every row, so
//! every golden transformation applies to every source row.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::table::{ColumnTable, RowId};
use crate::transform::{Transformation, Unit};

pub const SOURCE_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
/// Literal characters; disjoint from the source alphabet and the sentinel.
pub const LITERAL_ALPHABET: &[u8] = b"-_.,:;/@#+= ";
pub const SENTINEL: char = '|';

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub rows: usize,
    pub source_len: (usize, usize),
    pub placeholders: usize,
    pub literal_blocks: (usize, usize),
    pub literal_len: (usize, usize),
    pub transformations: usize,
    /// Chance that a placeholder is a `Split` on the sentinel rather than a `Substr`.
    pub split_probability: f64,
    pub seed: u64,
}

impl SynthParams {
    /// Synth-N: rows of length 20..=35.
    pub fn synth(rows: usize, seed: u64) -> SynthParams {
        SynthParams {
            rows,
            source_len: (20, 35),
            placeholders: 2,
            literal_blocks: (1, 2),
            literal_len: (1, 5),
            transformations: 3,
            split_probability: 0.25,
            seed,
        }
    }

    /// Synth-NL: rows of length 40..=70.
    pub fn synth_long(rows: usize, seed: u64) -> SynthParams {
        SynthParams {
            source_len: (40, 70),
            ..SynthParams::synth(rows, seed)
        }
    }

    fn validate(&self) {
        assert!(self.rows >= 1, "at least one row");
        assert!(self.transformations >= 1, "at least one transformation");
        assert!(self.placeholders >= 1, "at least one placeholder");
        for (name, (lo, hi)) in [
            ("source_len", self.source_len),
            ("literal_blocks", self.literal_blocks),
            ("literal_len", self.literal_len),
        ] {
            assert!(lo <= hi, "{name} range is empty");
        }
        assert!(self.source_len.0 >= 3, "rows must be at least 3 characters");
        assert!(self.literal_len.0 >= 1, "literal blocks must be non-empty");
    }
}

#[derive(Clone, Debug)]
pub struct Benchmark {
    pub source: ColumnTable,
    pub target: ColumnTable,
    pub golden_pairs: Vec<(RowId, RowId)>,
    pub golden_transformations: Vec<Transformation>,
    /// Index into `golden_transformations` used for each row.
    pub assignment: Vec<usize>,
}

fn random_text(rng: &mut ChaCha8Rng, alphabet: &[u8], len: usize) -> String {
    (0..len)
        .map(|_| *alphabet.choose(rng).expect("alphabet") as char)
        .collect()
}

/// Block layout alternating placeholders (`true`) and literals (`false`).
fn layout(rng: &mut ChaCha8Rng, placeholders: usize, literals: usize) -> Vec<bool> {
    // Placeholders never touch each other, so `literals` is raised to at
    // least `placeholders - 1` and literals go into the gaps or the ends.
    let gaps = placeholders.saturating_sub(1);
    let literals = literals.max(gaps);
    let extra = (literals - gaps).min(2);
    let mut ends = [false, false];
    match extra {
        1 => ends[rng.gen_range(0..2)] = true,
        2 => ends = [true, true],
        _ => {}
    }
    let mut out = Vec::new();
    if ends[0] {
        out.push(false);
    }
    for i in 0..placeholders {
        if i > 0 {
            out.push(false);
        }
        out.push(true);
    }
    if ends[1] {
        out.push(false);
    }
    out
}

pub fn generate_benchmark(params: &SynthParams) -> Benchmark {
    params.validate();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (min_len, max_len) = params.source_len;

    let mut sources: Vec<String> = (0..params.rows)
        .map(|_| {
            let len = rng.gen_range(min_len..=max_len);
            random_text(&mut rng, SOURCE_ALPHABET, len)
        })
        .collect();
    let sentinel_pos = rng.gen_range(1..min_len - 1);

    let mut golden: Vec<Transformation> = Vec::new();
    let mut attempts = 0;
    while golden.len() < params.transformations {
        attempts += 1;
        let literals = rng.gen_range(params.literal_blocks.0..=params.literal_blocks.1);
        let units: Vec<Unit> = layout(&mut rng, params.placeholders, literals)
            .into_iter()
            .map(|is_placeholder| {
                if !is_placeholder {
                    let len = rng.gen_range(params.literal_len.0..=params.literal_len.1);
                    Unit::literal(random_text(&mut rng, LITERAL_ALPHABET, len))
                } else if rng.gen_bool(params.split_probability) {
                    Unit::Split {
                        delim: SENTINEL,
                        index: rng.gen_range(1..=2),
                    }
                } else {
                    let start = rng.gen_range(0..min_len);
                    let end = rng.gen_range(start + 1..=min_len);
                    Unit::Substr { start, end }
                }
            })
            .collect();
        let t = Transformation::new(units);
        // Distinct goldens; give up on distinctness for degenerate parameters.
        if !golden.contains(&t) || attempts > 1000 {
            golden.push(t);
        }
    }

    let uses_split = golden
        .iter()
        .any(|t| t.units().iter().any(|u| matches!(u, Unit::Split { .. })));
    if uses_split {
        for s in &mut sources {
            let mut chars: Vec<char> = s.chars().collect();
            chars[sentinel_pos] = SENTINEL;
            *s = chars.into_iter().collect();
        }
    }

    let mut targets = Vec::with_capacity(params.rows);
    let mut assignment = Vec::with_capacity(params.rows);
    for src in &sources {
        let k = rng.gen_range(0..golden.len());
        let chars: Vec<char> = src.chars().collect();
        let out = golden[k]
            .apply_chars(&chars)
            .expect("golden transformations apply to every row by construction");
        targets.push(out);
        assignment.push(k);
    }

    Benchmark {
        source: ColumnTable::from_texts(sources),
        target: ColumnTable::from_texts(targets),
        golden_pairs: (0..params.rows as RowId).map(|i| (i, i)).collect(),
        golden_transformations: golden,
        assignment,
    }
}
