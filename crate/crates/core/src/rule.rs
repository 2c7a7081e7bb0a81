//! Semi-totalistic transition rules.
//!
//! A rule is a 2×5 binary matrix `f[s][σ]`: the next state of a node in state
//! `s` with `σ` excited neighbours. Row 0 governs excitation of resting nodes,
//! row 1 governs persistence of excited nodes. Each row is named by its
//! decimal value with the `σ = 0` entry as the most significant bit, so rule
//! `(10, 4)` is `F0 = 01010`, `F1 = 00100`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of distinct rules.
pub const RULE_COUNT: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    f: [[u8; 5]; 2],
}

impl Rule {
    /// Builds the rule whose rows are the 5-bit big-endian expansions of the codes.
    pub fn decode(code0: u32, code1: u32) -> Result<Rule> {
        Ok(Rule {
            f: [row_from_code(code0)?, row_from_code(code1)?],
        })
    }

    /// Builds a rule from explicit binary rows. Every entry must be 0 or 1.
    pub fn from_rows(f0: [u8; 5], f1: [u8; 5]) -> Result<Rule> {
        for &b in f0.iter().chain(f1.iter()) {
            if b > 1 {
                return Err(Error::CellValue(b));
            }
        }
        Ok(Rule { f: [f0, f1] })
    }

    /// Rule with flat index `code0 * 32 + code1`.
    pub fn from_index(index: usize) -> Result<Rule> {
        if index >= RULE_COUNT {
            return Err(Error::Parameter(format!("rule index {index} >= {RULE_COUNT}")));
        }
        Rule::decode((index / 32) as u32, (index % 32) as u32)
    }

    /// All 1024 rules in `(code0, code1)` lexicographic order.
    pub fn all() -> impl Iterator<Item = Rule> {
        (0..RULE_COUNT).map(|i| Rule::from_index(i).expect("index in range"))
    }

    pub fn encode(&self) -> (u32, u32) {
        (row_to_code(&self.f[0]), row_to_code(&self.f[1]))
    }

    pub fn code0(&self) -> u32 {
        row_to_code(&self.f[0])
    }

    pub fn code1(&self) -> u32 {
        row_to_code(&self.f[1])
    }

    pub fn index(&self) -> usize {
        let (a, b) = self.encode();
        (a * 32 + b) as usize
    }

    /// Transition entry for a node in `state` with `sigma` excited neighbours.
    #[inline]
    pub fn next(&self, state: u8, sigma: u8) -> u8 {
        self.f[state as usize][sigma as usize]
    }

    pub fn row(&self, state: usize) -> &[u8; 5] {
        &self.f[state]
    }

    pub fn matrix(&self) -> &[[u8; 5]; 2] {
        &self.f
    }

    /// True when a resting node with no excited neighbours excites, which
    /// ignites the whole resting background.
    pub fn excites_from_rest(&self) -> bool {
        self.f[0][0] == 1
    }
}

fn row_from_code(code: u32) -> Result<[u8; 5]> {
    if code > 31 {
        return Err(Error::RuleCode(code));
    }
    let mut row = [0u8; 5];
    for (j, cell) in row.iter_mut().enumerate() {
        *cell = ((code >> (4 - j)) & 1) as u8;
    }
    Ok(row)
}

fn row_to_code(row: &[u8; 5]) -> u32 {
    row.iter().fold(0, |acc, &b| (acc << 1) | b as u32)
}

/// Parses a five-character binary row such as `"01010"`.
pub fn parse_row(s: &str) -> Result<[u8; 5]> {
    let s = s.trim();
    let bytes = s.as_bytes();
    if bytes.len() != 5 {
        return Err(Error::RuleRow(s.to_string()));
    }
    let mut row = [0u8; 5];
    for (cell, &c) in row.iter_mut().zip(bytes) {
        *cell = match c {
            b'0' => 0,
            b'1' => 1,
            _ => return Err(Error::RuleRow(s.to_string())),
        };
    }
    Ok(row)
}

pub fn format_row(row: &[u8; 5]) -> String {
    row.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.code0(), self.code1())
    }
}

/// Accepts `code0,code1` (decimal, optionally parenthesised) or
/// `F0=xxxxx,F1=xxxxx` (binary rows).
impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rule> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parameter(format!("rule {s:?}: expected two comma-separated parts")))?;
        let (a, b) = (a.trim(), b.trim());
        let strip = |part: &str, key: &str| -> Option<String> {
            let (k, v) = part.split_once('=')?;
            k.trim().eq_ignore_ascii_case(key).then(|| v.trim().to_string())
        };
        match (strip(a, "F0"), strip(b, "F1")) {
            (Some(r0), Some(r1)) => Rule::from_rows(parse_row(&r0)?, parse_row(&r1)?),
            (None, None) => {
                let parse = |v: &str| {
                    v.parse::<u32>()
                        .map_err(|_| Error::Parameter(format!("rule code {v:?} is not an integer")))
                };
                Rule::decode(parse(a)?, parse(b)?)
            }
            _ => Err(Error::Parameter(format!("rule {s:?}: mixed decimal and binary forms"))),
        }
    }
}
