//! Transformation units and transformations.
//!
//! A [`Unit`] copies part of its input (or a constant) to the output and a
//! [`Transformation`] concatenates the outputs of its units. All indices count
//! Unicode scalar values: substring bounds are 0-based and half-open, segment
//! indices are 1-based.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

/// One parameterized transformation unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Unit {
    /// Characters `[start, end)` of the input.
    Substr { start: usize, end: usize },
    /// Segment `index` (1-based) after splitting the input at every `delim`.
    Split { delim: char, index: usize },
    /// `Split` followed by `Substr` on the selected segment.
    SplitSubstr {
        delim: char,
        index: usize,
        start: usize,
        end: usize,
    },
    /// Like `SplitSubstr`, splitting at every occurrence of either delimiter.
    TwoCharSplitSubstr {
        first: char,
        second: char,
        index: usize,
        start: usize,
        end: usize,
    },
    /// A constant, returned regardless of the input.
    Literal(Arc<str>),
}

/// The kind of a [`Unit`], used to enable or disable unit families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[derive(serde::Serialize, serde::Deserialize)]
pub enum UnitKind {
    Substr,
    Split,
    SplitSubstr,
    TwoCharSplitSubstr,
    Literal,
}

impl UnitKind {
    pub const ALL: [UnitKind; 5] = [
        UnitKind::Substr,
        UnitKind::Split,
        UnitKind::SplitSubstr,
        UnitKind::TwoCharSplitSubstr,
        UnitKind::Literal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Substr => "Substr",
            UnitKind::Split => "Split",
            UnitKind::SplitSubstr => "SplitSubstr",
            UnitKind::TwoCharSplitSubstr => "TwoCharSplitSubstr",
            UnitKind::Literal => "Literal",
        }
    }

    pub fn from_name(name: &str) -> Option<UnitKind> {
        UnitKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

/// A set of enabled unit kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct UnitKinds(u8);

impl UnitKinds {
    pub const NONE: UnitKinds = UnitKinds(0);

    /// Every kind except `TwoCharSplitSubstr`, which is opt-in.
    pub fn default_set() -> UnitKinds {
        UnitKinds::NONE
            .with(UnitKind::Substr)
            .with(UnitKind::Split)
            .with(UnitKind::SplitSubstr)
            .with(UnitKind::Literal)
    }

    pub fn all() -> UnitKinds {
        UnitKind::ALL.into_iter().collect()
    }

    pub fn with(self, kind: UnitKind) -> UnitKinds {
        UnitKinds(self.0 | (1 << kind as u8))
    }

    pub fn contains(self, kind: UnitKind) -> bool {
        self.0 & (1 << kind as u8) != 0
    }

    pub fn iter(self) -> impl Iterator<Item = UnitKind> {
        UnitKind::ALL.into_iter().filter(move |k| self.contains(*k))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl Default for UnitKinds {
    fn default() -> Self {
        UnitKinds::default_set()
    }
}

impl FromIterator<UnitKind> for UnitKinds {
    fn from_iter<I: IntoIterator<Item = UnitKind>>(iter: I) -> Self {
        iter.into_iter().fold(UnitKinds::NONE, UnitKinds::with)
    }
}

/// Why a unit could not produce output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum ApplyFailure {
    #[error("index out of range")]
    IndexOutOfRange,
    #[error("segment index out of range")]
    SegmentIndexOutOfRange,
}

/// A failed application, tagged with the position of the failing unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("unit {position}: {reason}")]
pub struct ApplyError {
    pub position: usize,
    pub reason: ApplyFailure,
}

pub type ApplyOutcome = Result<String, ApplyError>;

/// Range of the `index`-th (1-based) segment of `src` split at chars matching `is_delim`.
/// Empty segments are preserved; an absent delimiter yields a single segment.
pub(crate) fn segment_range(
    src: &[char],
    index: usize,
    is_delim: impl Fn(char) -> bool,
) -> Result<Range<usize>, ApplyFailure> {
    if index == 0 {
        return Err(ApplyFailure::SegmentIndexOutOfRange);
    }
    let mut seg = 1;
    let mut begin = 0;
    for (pos, &c) in src.iter().enumerate() {
        if is_delim(c) {
            if seg == index {
                return Ok(begin..pos);
            }
            seg += 1;
            begin = pos + 1;
        }
    }
    if seg == index {
        Ok(begin..src.len())
    } else {
        Err(ApplyFailure::SegmentIndexOutOfRange)
    }
}

fn sub_range(outer: Range<usize>, start: usize, end: usize) -> Result<Range<usize>, ApplyFailure> {
    let len = outer.end - outer.start;
    if start >= end || start >= len || end > len {
        return Err(ApplyFailure::IndexOutOfRange);
    }
    Ok(outer.start + start..outer.start + end)
}

impl Unit {
    pub fn kind(&self) -> UnitKind {
        match self {
            Unit::Substr { .. } => UnitKind::Substr,
            Unit::Split { .. } => UnitKind::Split,
            Unit::SplitSubstr { .. } => UnitKind::SplitSubstr,
            Unit::TwoCharSplitSubstr { .. } => UnitKind::TwoCharSplitSubstr,
            Unit::Literal(_) => UnitKind::Literal,
        }
    }

    pub fn literal(text: impl Into<Arc<str>>) -> Unit {
        Unit::Literal(text.into())
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Unit::Literal(_))
    }

    /// Checks the parameter invariants: `start < end`, `index >= 1`,
    /// distinct delimiters and a non-empty literal.
    pub fn is_well_formed(&self) -> bool {
        match self {
            Unit::Substr { start, end } => start < end,
            Unit::Split { index, .. } => *index >= 1,
            Unit::SplitSubstr {
                index, start, end, ..
            } => *index >= 1 && start < end,
            Unit::TwoCharSplitSubstr {
                first,
                second,
                index,
                start,
                end,
            } => first != second && *index >= 1 && start < end,
            Unit::Literal(text) => !text.is_empty(),
        }
    }

    /// The source range this unit copies, or `None` for a literal.
    pub fn source_range(&self, src: &[char]) -> Option<Result<Range<usize>, ApplyFailure>> {
        Some(match *self {
            Unit::Substr { start, end } => sub_range(0..src.len(), start, end),
            Unit::Split { delim, index } => segment_range(src, index, |c| c == delim),
            Unit::SplitSubstr {
                delim,
                index,
                start,
                end,
            } => segment_range(src, index, |c| c == delim)
                .and_then(|seg| sub_range(seg, start, end)),
            Unit::TwoCharSplitSubstr {
                first,
                second,
                index,
                start,
                end,
            } => segment_range(src, index, |c| c == first || c == second)
                .and_then(|seg| sub_range(seg, start, end)),
            Unit::Literal(_) => return None,
        })
    }

    /// Applies the unit to a pre-split character buffer.
    pub fn apply_chars(&self, src: &[char]) -> Result<String, ApplyFailure> {
        match self {
            Unit::Literal(text) => Ok(text.to_string()),
            other => {
                let range = other.source_range(src).expect("non-literal")?;
                Ok(src[range].iter().collect())
            }
        }
    }
}

/// Applies a single unit to `src`. A failure is reported at position 0.
pub fn apply_unit(unit: &Unit, src: &str) -> ApplyOutcome {
    let chars: Vec<char> = src.chars().collect();
    unit.apply_chars(&chars).map_err(|reason| ApplyError {
        position: 0,
        reason,
    })
}

/// An ordered, non-empty sequence of units whose outputs are concatenated.
#[derive(Clone)]
pub struct Transformation {
    units: Arc<[Unit]>,
    hash: u64,
}

impl Transformation {
    /// # Panics
    /// Panics if `units` is empty.
    pub fn new(units: Vec<Unit>) -> Transformation {
        assert!(!units.is_empty(), "a transformation needs at least one unit");
        let mut hasher = DefaultHasher::new();
        units.hash(&mut hasher);
        Transformation {
            hash: hasher.finish(),
            units: units.into(),
        }
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cached structural digest.
    pub fn structural_hash(&self) -> u64 {
        self.hash
    }

    pub fn literal_count(&self) -> usize {
        self.units.iter().filter(|u| u.is_literal()).count()
    }

    pub fn apply_chars(&self, src: &[char]) -> ApplyOutcome {
        let mut out = String::new();
        for (position, unit) in self.units.iter().enumerate() {
            match unit {
                Unit::Literal(text) => out.push_str(text),
                other => {
                    let range = other
                        .source_range(src)
                        .expect("non-literal")
                        .map_err(|reason| ApplyError { position, reason })?;
                    out.extend(&src[range]);
                }
            }
        }
        Ok(out)
    }

    /// Sort key used wherever transformations of equal coverage are ranked:
    /// fewer units, then fewer literals, then the printed form.
    pub fn preference_key(&self) -> (usize, usize, String) {
        (self.len(), self.literal_count(), self.to_string())
    }
}

impl PartialEq for Transformation {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.units == other.units
    }
}

impl Eq for Transformation {}

impl Hash for Transformation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn apply_transformation(t: &Transformation, src: &str) -> ApplyOutcome {
    let chars: Vec<char> = src.chars().collect();
    t.apply_chars(&chars)
}

/// True iff `t` maps `source` exactly onto `target`.
pub fn covers(t: &Transformation, source: &str, target: &str) -> bool {
    matches!(apply_transformation(t, source), Ok(out) if out == target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(units: Vec<Unit>) -> Transformation {
        Transformation::new(units)
    }

    fn brute_substr(s: &str, start: usize, end: usize) -> String {
        s.chars().skip(start).take(end - start).collect()
    }

    #[test]
    fn split_takes_first_segment() {
        let u = Unit::Split {
            delim: ',',
            index: 1,
        };
        assert_eq!(apply_unit(&u, "prus-czarnecki, andrzej").unwrap(), "prus-czarnecki");
    }

    #[test]
    fn literal_ignores_input() {
        assert_eq!(apply_unit(&Unit::literal("@ualberta.ca"), "").unwrap(), "@ualberta.ca");
    }

    #[test]
    fn substr_is_half_open() {
        let u = Unit::Substr { start: 4, end: 7 };
        assert_eq!(apply_unit(&u, "abcdefghijklmn").unwrap(), brute_substr("abcdefghijklmn", 4, 7));
        assert_eq!(apply_unit(&u, "abcdefghijklmn").unwrap(), "efg");
    }

    #[test]
    fn absent_delimiter_yields_one_segment() {
        let u = Unit::Split {
            delim: 'x',
            index: 2,
        };
        assert_eq!(
            apply_unit(&u, "abc").unwrap_err().reason,
            ApplyFailure::SegmentIndexOutOfRange
        );
        let whole = Unit::Split {
            delim: 'x',
            index: 1,
        };
        assert_eq!(apply_unit(&whole, "abc").unwrap(), "abc");
    }

    #[test]
    fn empty_segments_are_preserved() {
        let seg = |i| {
            apply_unit(
                &Unit::Split {
                    delim: ',',
                    index: i,
                },
                "a,,b",
            )
        };
        assert_eq!(seg(1).unwrap(), "a");
        assert_eq!(seg(2).unwrap(), "");
        assert_eq!(seg(3).unwrap(), "b");
        assert!(seg(4).is_err());
        let u = Unit::Split {
            delim: 'a',
            index: 2,
        };
        assert_eq!(apply_unit(&u, "ab").unwrap(), "b");
    }

    #[test]
    fn index_errors() {
        let err = |u: Unit, s: &str| apply_unit(&u, s).unwrap_err().reason;
        assert_eq!(
            err(Unit::Substr { start: 2, end: 5 }, "abcd"),
            ApplyFailure::IndexOutOfRange
        );
        assert_eq!(
            err(Unit::Substr { start: 4, end: 5 }, "abcd"),
            ApplyFailure::IndexOutOfRange
        );
        assert_eq!(
            err(
                Unit::SplitSubstr {
                    delim: ',',
                    index: 2,
                    start: 0,
                    end: 3
                },
                "ab,cd"
            ),
            ApplyFailure::IndexOutOfRange
        );
    }

    #[test]
    fn indices_count_scalar_values() {
        let u = Unit::Substr { start: 1, end: 3 };
        assert_eq!(apply_unit(&u, "héllo").unwrap(), "él");
        let s = Unit::Split {
            delim: '→',
            index: 2,
        };
        assert_eq!(apply_unit(&s, "a→βγ").unwrap(), "βγ");
    }

    #[test]
    fn two_char_split_uses_either_delimiter() {
        let u = Unit::TwoCharSplitSubstr {
            first: ',',
            second: ';',
            index: 3,
            start: 0,
            end: 2,
        };
        assert_eq!(apply_unit(&u, "ab,cd;ef,gh").unwrap(), "ef");
    }

    #[test]
    fn reindexed_example_transformation() {
        let t3 = t(vec![
            Unit::literal("d"),
            Unit::Substr { start: 4, end: 7 },
            Unit::literal("."),
            Unit::Substr { start: 9, end: 11 },
            Unit::literal("b"),
        ]);
        let oracle = |s: &str| {
            format!("d{}.{}b", brute_substr(s, 4, 7), brute_substr(s, 9, 11))
        };
        assert_eq!(oracle("abcdefghijklmn"), "defg.jkb");
        assert_eq!(oracle("0123456789abcd"), "d456.9ab");
        assert_eq!(apply_transformation(&t3, "abcdefghijklmn").unwrap(), "defg.jkb");
        assert_eq!(apply_transformation(&t3, "0123456789abcd").unwrap(), "d456.9ab");
        assert!(covers(&t3, "abcdefghijklmn", "defg.jkb"));
    }

    #[test]
    fn name_to_email_initial() {
        let t = t(vec![
            Unit::SplitSubstr {
                delim: ' ',
                index: 2,
                start: 0,
                end: 1,
            },
            Unit::literal(" "),
            Unit::Split {
                delim: ',',
                index: 1,
            },
        ]);
        assert_eq!(apply_transformation(&t, "gosgnach, simon").unwrap(), "s gosgnach");
        assert!(!covers(
            &Transformation::new(vec![Unit::Split {
                delim: ',',
                index: 1
            }]),
            "bowling, michael",
            "m bowling"
        ));
    }

    #[test]
    fn literal_only_transformations() {
        let x = t(vec![Unit::literal("x")]);
        assert_eq!(apply_transformation(&x, "anything").unwrap(), "x");
        let a = t(vec![Unit::literal("a")]);
        assert!(covers(&a, "x", "a"));
        assert!(!covers(&a, "x", "b"));
    }

    #[test]
    fn failure_reports_unit_position() {
        let t = t(vec![
            Unit::literal("a"),
            Unit::Split {
                delim: ',',
                index: 3,
            },
        ]);
        let err = apply_transformation(&t, "x,y").unwrap_err();
        assert_eq!(err.position, 1);
        assert_eq!(err.reason, ApplyFailure::SegmentIndexOutOfRange);
    }

    #[test]
    fn equal_values_hash_equal() {
        let a = t(vec![Unit::Substr { start: 0, end: 2 }, Unit::literal("z")]);
        let b = t(vec![Unit::Substr { start: 0, end: 2 }, Unit::literal("z")]);
        assert_eq!(a, b);
        assert_eq!(a.structural_hash(), b.structural_hash());
        let c = t(vec![Unit::Substr { start: 0, end: 2 }]);
        assert_ne!(a, c);
    }
}
