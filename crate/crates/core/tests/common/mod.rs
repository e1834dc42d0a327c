//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use xjoin_core::{CandidatePair, Transformation, Unit};

const CHAR_POOL: &[char] = &[
    'a', 'b', 'z', '0', '9', ' ', ',', '.', '-', '\'', '\\', '\n', '\t', '\u{1}', '\u{7f}', 'é', 'ß', '中', '😀',
];

pub fn random_char(rng: &mut ChaCha8Rng) -> char {
    *CHAR_POOL.choose(rng).unwrap()
}

fn span(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let start = rng.gen_range(0..20);
    (start, rng.gen_range(start + 1..=start + 20))
}

/// Any well-formed unit, including awkward characters in delimiters and literals.
pub fn random_unit(rng: &mut ChaCha8Rng) -> Unit {
    match rng.gen_range(0..5) {
        0 => {
            let (start, end) = span(rng);
            Unit::Substr { start, end }
        }
        1 => Unit::Split {
            delim: random_char(rng),
            index: rng.gen_range(1..10),
        },
        2 => {
            let (start, end) = span(rng);
            Unit::SplitSubstr {
                delim: random_char(rng),
                index: rng.gen_range(1..10),
                start,
                end,
            }
        }
        3 => {
            let first = random_char(rng);
            let second = loop {
                let c = random_char(rng);
                if c != first {
                    break c;
                }
            };
            let (start, end) = span(rng);
            Unit::TwoCharSplitSubstr {
                first,
                second,
                index: rng.gen_range(1..10),
                start,
                end,
            }
        }
        _ => {
            let len = rng.gen_range(1..6);
            Unit::literal((0..len).map(|_| random_char(rng)).collect::<String>())
        }
    }
}

pub fn random_transformation(rng: &mut ChaCha8Rng) -> Transformation {
    let n = rng.gen_range(1..=6);
    Transformation::new((0..n).map(|_| random_unit(rng)).collect())
}

pub fn random_text(rng: &mut ChaCha8Rng, alphabet: &[char], min: usize, max: usize) -> String {
    let len = rng.gen_range(min..=max);
    (0..len).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

/// A small table pair in the style of the synthetic benchmark: most
/// targets come from one of two hidden transformations, the rest are noise.
pub fn random_small_instance(rng: &mut ChaCha8Rng, max_rows: usize, max_len: usize) -> Vec<CandidatePair> {
    const SRC: &[char] = &['a', 'b', 'c', 'd', '1', '2', '-', ' '];
    const LIT: &[char] = &['.', ',', '_', '/'];
    let rows = rng.gen_range(2..=max_rows);
    let hidden: Vec<Transformation> = (0..2)
        .map(|_| {
            let mut units = Vec::new();
            for k in 0..rng.gen_range(1..=3) {
                let unit = if k % 2 == 1 || rng.gen_bool(0.2) {
                    Unit::literal(random_text(rng, LIT, 1, 2))
                } else if rng.gen_bool(0.3) {
                    Unit::Split {
                        delim: *['-', ' '].choose(rng).unwrap(),
                        index: rng.gen_range(1..=2),
                    }
                } else {
                    let start = rng.gen_range(0..3);
                    Unit::Substr {
                        start,
                        end: rng.gen_range(start + 1..=start + 3),
                    }
                };
                units.push(unit);
            }
            Transformation::new(units)
        })
        .collect();
    let mut pairs = Vec::new();
    while pairs.len() < rows {
        let src = random_text(rng, SRC, 3, max_len);
        let chars: Vec<char> = src.chars().collect();
        let tgt = if rng.gen_bool(0.15) {
            random_text(rng, SRC, 1, max_len)
        } else {
            match hidden.choose(rng).unwrap().apply_chars(&chars) {
                Ok(t) if !t.is_empty() && t.chars().count() <= max_len => t,
                _ => continue,
            }
        };
        let id = pairs.len() as u32;
        pairs.push(CandidatePair::new(id, id, src, tgt));
    }
    pairs
}
