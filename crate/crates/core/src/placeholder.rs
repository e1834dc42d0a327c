//! Placeholders and skeletons.
//!
//! A placeholder is a block of target text that also occurs in the source,
//! so some non-constant unit may have produced it. A skeleton segments a
//! target row into placeholder blocks and literal blocks.

use std::ops::Range;

use crate::table::CandidatePair;

pub const DEFAULT_MAX_PLACEHOLDERS: usize = 3;
pub const DEFAULT_SKELETON_CAP: usize = 256;
pub const DEFAULT_MIN_PLACEHOLDER_LEN: usize = 1;

/// A span of the target copied from one or more spans of the source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlaceholderMatch {
    /// Character span in the target.
    pub target: Range<usize>,
    /// Every character span of the source holding the same text, ascending.
    pub sources: Vec<Range<usize>>,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    Placeholder(PlaceholderMatch),
    Literal(String),
}

impl Block {
    pub fn text(&self) -> &str {
        match self {
            Block::Placeholder(p) => &p.text,
            Block::Literal(s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Skeleton {
    pub blocks: Vec<Block>,
}

impl Skeleton {
    pub fn placeholder_count(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| matches!(b, Block::Placeholder(_)))
            .count()
    }

    /// Concatenated block texts; equals the target row.
    pub fn text(&self) -> String {
        self.blocks.iter().map(Block::text).collect()
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &PlaceholderMatch> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Placeholder(p) => Some(p),
            Block::Literal(_) => None,
        })
    }
}

/// Whitespace and ASCII punctuation.
pub fn is_separator(c: char) -> bool {
    c.is_whitespace() || c.is_ascii_punctuation()
}

/// Start positions of every occurrence of `needle` in `hay`.
pub(crate) fn occurrences(hay: &[char], needle: &[char]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    hay.windows(needle.len())
        .enumerate()
        .filter(|(_, w)| *w == needle)
        .map(|(i, _)| i)
        .collect()
}

fn source_spans(src: &[char], text: &[char]) -> Vec<Range<usize>> {
    occurrences(src, text)
        .into_iter()
        .map(|k| k..k + text.len())
        .collect()
}

fn chars_of(s: &str) -> Vec<char> {
    s.chars().collect()
}

/// Maximal-length placeholder occurrences in `tgt`, at least `min_len` long.
///
/// An occurrence is maximal when neither a one-character extension to the
/// left nor to the right is still a substring of `src`. Results are ordered
/// by target start.
pub fn maximal_placeholders(src: &str, tgt: &str, min_len: usize) -> Vec<PlaceholderMatch> {
    let s = chars_of(src);
    let t = chars_of(tgt);
    // Longest prefix of t[i..] occurring in s.
    let mut longest = vec![0usize; t.len() + 1];
    let mut next_row = vec![0usize; s.len() + 1];
    for i in (0..t.len()).rev() {
        let mut row = vec![0usize; s.len() + 1];
        for k in (0..s.len()).rev() {
            if t[i] == s[k] {
                row[k] = 1 + next_row[k + 1];
            }
        }
        longest[i] = row.iter().copied().max().unwrap_or(0);
        next_row = row;
    }
    let mut out = Vec::new();
    for i in 0..t.len() {
        let len = longest[i];
        if len == 0 || len < min_len.max(1) {
            continue;
        }
        if i > 0 && longest[i - 1] > len {
            continue;
        }
        let text = &t[i..i + len];
        out.push(PlaceholderMatch {
            target: i..i + len,
            sources: source_spans(&s, text),
            text: text.iter().collect(),
        });
    }
    out
}

/// Adds to `ps` the tokens obtained by cutting each placeholder at
/// separator characters, with spans recomputed against `src`.
pub fn token_split_placeholders(
    ps: &[PlaceholderMatch],
    src: &str,
    is_sep: impl Fn(char) -> bool,
) -> Vec<PlaceholderMatch> {
    let s = chars_of(src);
    let mut out: Vec<PlaceholderMatch> = ps.to_vec();
    for p in ps {
        let chars = chars_of(&p.text);
        if !chars.iter().any(|&c| is_sep(c)) {
            continue;
        }
        let mut begin = 0;
        for end in 0..=chars.len() {
            if end == chars.len() || is_sep(chars[end]) {
                if end > begin {
                    let piece = &chars[begin..end];
                    out.push(PlaceholderMatch {
                        target: p.target.start + begin..p.target.start + end,
                        sources: source_spans(&s, piece),
                        text: piece.iter().collect(),
                    });
                }
                begin = end + 1;
            }
        }
    }
    out.sort_by(|a, b| {
        (a.target.start, a.target.end).cmp(&(b.target.start, b.target.end))
    });
    out.dedup_by(|a, b| a.target == b.target);
    out
}

/// Limits on skeleton enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeletonLimits {
    pub max_placeholders: usize,
    pub cap: usize,
    pub min_placeholder_len: usize,
}

impl Default for SkeletonLimits {
    fn default() -> Self {
        SkeletonLimits {
            max_placeholders: DEFAULT_MAX_PLACEHOLDERS,
            cap: DEFAULT_SKELETON_CAP,
            min_placeholder_len: DEFAULT_MIN_PLACEHOLDER_LEN,
        }
    }
}

/// Candidate placeholder spans of a pair: maximal occurrences plus their
/// separator tokens, sorted by target span.
pub fn placeholder_candidates(pair: &CandidatePair, min_len: usize) -> Vec<PlaceholderMatch> {
    let maximal = maximal_placeholders(&pair.source, &pair.target, min_len);
    let mut all = token_split_placeholders(&maximal, &pair.source, is_separator);
    all.retain(|p| p.target.len() >= min_len.max(1));
    all
}

/// Skeletons fitting the pair, fewest placeholders first and then in
/// lexicographic order of placeholder spans, truncated to `limits.cap`.
/// The all-literal skeleton comes first (when the target is non-empty).
pub fn enumerate_skeletons(pair: &CandidatePair, limits: SkeletonLimits) -> Vec<Skeleton> {
    let target = chars_of(&pair.target);
    let cands = placeholder_candidates(pair, limits.min_placeholder_len);
    // Longest chain of non-overlapping candidates starting at each index.
    let mut chain = vec![1usize; cands.len()];
    for j in (0..cands.len()).rev() {
        for k in j + 1..cands.len() {
            if cands[k].target.start >= cands[j].target.end {
                chain[j] = chain[j].max(1 + chain[k]);
            }
        }
    }

    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for k in 0..=limits.max_placeholders {
        if out.len() >= limits.cap {
            break;
        }
        choose(&cands, &chain, k, 0, 0, &mut chosen, &mut |sel| {
            out.push(build_skeleton(&target, &cands, sel));
            out.len() < limits.cap
        });
    }
    out
}

/// Visits every increasing selection of `k` non-overlapping candidates in
/// lexicographic order. Returns false once `visit` asks to stop.
fn choose(
    cands: &[PlaceholderMatch],
    chain: &[usize],
    k: usize,
    from: usize,
    min_start: usize,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if k == 0 {
        return visit(chosen);
    }
    for j in from..cands.len() {
        if cands[j].target.start < min_start || chain[j] < k {
            continue;
        }
        chosen.push(j);
        let go_on = choose(cands, chain, k - 1, j + 1, cands[j].target.end, chosen, visit);
        chosen.pop();
        if !go_on {
            return false;
        }
    }
    true
}

fn build_skeleton(target: &[char], cands: &[PlaceholderMatch], sel: &[usize]) -> Skeleton {
    let mut blocks = Vec::with_capacity(2 * sel.len() + 1);
    let mut pos = 0;
    for &j in sel {
        let p = &cands[j];
        if p.target.start > pos {
            blocks.push(Block::Literal(target[pos..p.target.start].iter().collect()));
        }
        blocks.push(Block::Placeholder(p.clone()));
        pos = p.target.end;
    }
    if pos < target.len() {
        blocks.push(Block::Literal(target[pos..].iter().collect()));
    }
    Skeleton { blocks }
}
