//! Textual form of transformations.
//!
//! ```text
//! transformation := "<" unit { "," SP unit } ">"
//! unit := "Substr(" INT "," INT ")"
//!       | "Split(" CHAR "," INT ")"
//!       | "SplitSubstr(" CHAR "," INT "," INT "," INT ")"
//!       | "TwoCharSplitSubstr(" CHAR "," CHAR "," INT "," INT "," INT ")"
//!       | "Literal(" QSTR ")"
//! ```
//!
//! `CHAR` is a single quoted scalar and `QSTR` quoted text; both accept the
//! escapes `\'`, `\\`, `\n`, `\t` and `\u{HEX}`. Printing escapes quotes,
//! backslashes, newlines, tabs and any other control character.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::transform::{Transformation, Unit};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at column {column}: expected {expected}")]
pub struct ParseError {
    /// 1-based character column.
    pub column: usize,
    pub expected: String,
}

fn write_escaped(f: &mut impl fmt::Write, c: char) -> fmt::Result {
    match c {
        '\'' => f.write_str("\\'"),
        '\\' => f.write_str("\\\\"),
        '\n' => f.write_str("\\n"),
        '\t' => f.write_str("\\t"),
        c if c.is_control() => write!(f, "\\u{{{:X}}}", c as u32),
        c => f.write_char(c),
    }
}

fn write_quoted(f: &mut impl fmt::Write, text: &str) -> fmt::Result {
    f.write_char('\'')?;
    for c in text.chars() {
        write_escaped(f, c)?;
    }
    f.write_char('\'')
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unit::Substr { start, end } => write!(f, "Substr({start},{end})"),
            Unit::Split { delim, index } => {
                f.write_str("Split(")?;
                write_quoted(f, &delim.to_string())?;
                write!(f, ",{index})")
            }
            Unit::SplitSubstr {
                delim,
                index,
                start,
                end,
            } => {
                f.write_str("SplitSubstr(")?;
                write_quoted(f, &delim.to_string())?;
                write!(f, ",{index},{start},{end})")
            }
            Unit::TwoCharSplitSubstr {
                first,
                second,
                index,
                start,
                end,
            } => {
                f.write_str("TwoCharSplitSubstr(")?;
                write_quoted(f, &first.to_string())?;
                f.write_char(',')?;
                write_quoted(f, &second.to_string())?;
                write!(f, ",{index},{start},{end})")
            }
            Unit::Literal(text) => {
                f.write_str("Literal(")?;
                write_quoted(f, text)?;
                f.write_char(')')
            }
        }
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('<')?;
        for (i, unit) in self.units().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{unit}")?;
        }
        f.write_char('>')
    }
}

pub fn print_transformation(t: &Transformation) -> String {
    t.to_string()
}

pub fn parse_transformation(text: &str) -> Result<Transformation, ParseError> {
    Parser::new(text).transformation()
}

impl FromStr for Transformation {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_transformation(s)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Parser {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn fail<T>(&self, expected: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            column: self.pos + 1,
            expected: expected.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, token: &str) -> Result<(), ParseError> {
        let n = token.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(token.chars());
        if !matches {
            return self.fail(format!("`{token}`"));
        }
        self.pos += n;
        Ok(())
    }

    fn transformation(mut self) -> Result<Transformation, ParseError> {
        self.expect("<")?;
        let mut units = vec![self.unit()?];
        loop {
            match self.peek() {
                Some(',') => {
                    self.expect(", ")?;
                    units.push(self.unit()?);
                }
                Some('>') => {
                    self.pos += 1;
                    break;
                }
                _ => return self.fail("`, ` or `>`"),
            }
        }
        if self.pos != self.chars.len() {
            return self.fail("end of input");
        }
        Ok(Transformation::new(units))
    }

    fn unit(&mut self) -> Result<Unit, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        let unit = match name.as_str() {
            "Substr" => {
                self.expect("(")?;
                let s = self.int()?;
                self.expect(",")?;
                let e = self.int()?;
                Unit::Substr { start: s, end: e }
            }
            "Split" => {
                self.expect("(")?;
                let delim = self.char_lit()?;
                self.expect(",")?;
                let index = self.int()?;
                Unit::Split { delim, index }
            }
            "SplitSubstr" => {
                self.expect("(")?;
                let delim = self.char_lit()?;
                self.expect(",")?;
                let index = self.int()?;
                self.expect(",")?;
                let s = self.int()?;
                self.expect(",")?;
                let e = self.int()?;
                Unit::SplitSubstr {
                    delim,
                    index,
                    start: s,
                    end: e,
                }
            }
            "TwoCharSplitSubstr" => {
                self.expect("(")?;
                let first = self.char_lit()?;
                self.expect(",")?;
                let second = self.char_lit()?;
                self.expect(",")?;
                let index = self.int()?;
                self.expect(",")?;
                let s = self.int()?;
                self.expect(",")?;
                let e = self.int()?;
                Unit::TwoCharSplitSubstr {
                    first,
                    second,
                    index,
                    start: s,
                    end: e,
                }
            }
            "Literal" => {
                self.expect("(")?;
                Unit::Literal(self.quoted()?.into())
            }
            _ => {
                self.pos = start;
                return self.fail("unit name (Substr, Split, SplitSubstr, TwoCharSplitSubstr, Literal)");
            }
        };
        self.expect(")")?;
        if !unit.is_well_formed() {
            self.pos = start;
            return self.fail(format!("well-formed parameters for {}", unit.kind().name()));
        }
        Ok(unit)
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail("integer");
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().or_else(|_| {
            self.pos = start;
            self.fail("integer within range")
        })
    }

    fn escaped(&mut self) -> Result<char, ParseError> {
        match self.peek() {
            None => self.fail("character"),
            Some('\\') => {
                self.pos += 1;
                let c = match self.peek() {
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('n') => '\n',
                    Some('t') => '\t',
                    Some('u') => {
                        self.pos += 1;
                        self.expect("{")?;
                        let start = self.pos;
                        while matches!(self.peek(), Some(c) if c.is_ascii_hexdigit()) {
                            self.pos += 1;
                        }
                        let hex: String = self.chars[start..self.pos].iter().collect();
                        let value = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32);
                        let Some(c) = value else {
                            self.pos = start;
                            return self.fail("hexadecimal scalar value");
                        };
                        self.expect("}")?;
                        return Ok(c);
                    }
                    _ => return self.fail("escape (\\', \\\\, \\n, \\t, \\u{HEX})"),
                };
                self.pos += 1;
                Ok(c)
            }
            Some(c) => {
                self.pos += 1;
                Ok(c)
            }
        }
    }

    fn char_lit(&mut self) -> Result<char, ParseError> {
        self.expect("'")?;
        if self.peek() == Some('\'') {
            return self.fail("character");
        }
        let c = self.escaped()?;
        self.expect("'")?;
        Ok(c)
    }

    fn quoted(&mut self) -> Result<String, ParseError> {
        self.expect("'")?;
        let mut out = String::new();
        loop {
            match self.peek() {
                Some('\'') => {
                    self.pos += 1;
                    break;
                }
                None => return self.fail("closing `'`"),
                _ => out.push(self.escaped()?),
            }
        }
        if out.is_empty() {
            self.pos -= 1;
            return self.fail("non-empty literal");
        }
        Ok(out)
    }
}
