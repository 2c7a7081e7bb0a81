//! Chain states, paired automaton states and space-time records.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::Rule;

/// Selects one of the two coupled chains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Chain {
    X,
    Y,
}

impl Chain {
    pub fn name(self) -> &'static str {
        match self {
            Chain::X => "x",
            Chain::Y => "y",
        }
    }

    pub fn other(self) -> Chain {
        match self {
            Chain::X => Chain::Y,
            Chain::Y => Chain::X,
        }
    }
}

impl FromStr for Chain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Chain> {
        match s.trim() {
            "x" | "X" => Ok(Chain::X),
            "y" | "Y" => Ok(Chain::Y),
            other => Err(Error::Parameter(format!("unknown chain {other:?}"))),
        }
    }
}

/// One chain: a binary sequence of `n` cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChainState {
    cells: Vec<u8>,
}

impl ChainState {
    pub fn resting(n: usize) -> ChainState {
        ChainState { cells: vec![0; n] }
    }

    pub fn from_cells(cells: Vec<u8>) -> Result<ChainState> {
        if let Some(&bad) = cells.iter().find(|&&c| c > 1) {
            return Err(Error::CellValue(bad));
        }
        Ok(ChainState { cells })
    }

    pub(crate) fn from_cells_unchecked(cells: Vec<u8>) -> ChainState {
        debug_assert!(cells.iter().all(|&c| c <= 1));
        ChainState { cells }
    }

    pub fn n(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.cells[i]
    }

    /// Cell value, or 0 for indices outside the chain (resting boundary).
    #[inline]
    pub fn get_or_rest(&self, i: isize) -> u8 {
        if i < 0 {
            0
        } else {
            self.cells.get(i as usize).copied().unwrap_or(0)
        }
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.cells[i] = value as u8;
    }

    pub fn excited(&self) -> usize {
        self.cells.iter().map(|&c| c as usize).sum()
    }

    pub fn reversed(&self) -> ChainState {
        ChainState {
            cells: self.cells.iter().rev().copied().collect(),
        }
    }
}

impl fmt::Display for ChainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            f.write_str(if c == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for ChainState {
    type Err = Error;

    fn from_str(s: &str) -> Result<ChainState> {
        let cells = s
            .trim()
            .bytes()
            .map(|b| match b {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => Err(Error::CellValue(other)),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(ChainState { cells })
    }
}

/// Both chains at time step `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AutomatonState {
    pub x: ChainState,
    pub y: ChainState,
    pub t: u64,
}

impl AutomatonState {
    pub fn new(x: ChainState, y: ChainState) -> Result<AutomatonState> {
        if x.n() != y.n() {
            return Err(Error::ChainMismatch { x: x.n(), y: y.n() });
        }
        if x.n() == 0 {
            return Err(Error::Parameter("chains must hold at least one site".into()));
        }
        Ok(AutomatonState { x, y, t: 0 })
    }

    pub fn resting(n: usize) -> AutomatonState {
        AutomatonState {
            x: ChainState::resting(n),
            y: ChainState::resting(n),
            t: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn chain(&self, chain: Chain) -> &ChainState {
        match chain {
            Chain::X => &self.x,
            Chain::Y => &self.y,
        }
    }

    pub fn chain_mut(&mut self, chain: Chain) -> &mut ChainState {
        match chain {
            Chain::X => &mut self.x,
            Chain::Y => &mut self.y,
        }
    }

    pub fn excited(&self) -> usize {
        self.x.excited() + self.y.excited()
    }

    /// Mirror image `i -> n-1-i` combined with exchanging the chains. The
    /// neighbourhood structure is invariant under this map.
    pub fn reflect_swap(&self) -> AutomatonState {
        AutomatonState {
            x: self.y.reversed(),
            y: self.x.reversed(),
            t: self.t,
        }
    }

    /// Both chains resting except a centred window of `width` cells on each,
    /// each cell excited with probability `p`.
    pub fn random_window<R: Rng>(n: usize, width: usize, p: f64, rng: &mut R) -> AutomatonState {
        let width = width.min(n);
        let start = (n - width) / 2;
        let mut s = AutomatonState::resting(n);
        for chain in [Chain::X, Chain::Y] {
            let cells = s.chain_mut(chain);
            for i in start..start + width {
                cells.set(i, rng.random_bool(p));
            }
        }
        s
    }
}

/// How the initial state of a run is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InitSpec {
    /// Centred random window on both chains.
    RandomWindow { width: usize, p: f64 },
    /// Every cell of both chains random.
    RandomFull { p: f64 },
    /// A five-cell seed pair placed at the centre.
    Seed { sx: u8, sy: u8 },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::RandomWindow { width: 100, p: 0.5 }
    }
}

impl InitSpec {
    pub fn build<R: Rng>(&self, n: usize, rng: &mut R) -> Result<AutomatonState> {
        if n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        match *self {
            InitSpec::RandomWindow { width, p } => Ok(AutomatonState::random_window(n, width, p, rng)),
            InitSpec::RandomFull { p } => Ok(AutomatonState::random_window(n, n, p, rng)),
            InitSpec::Seed { sx, sy } => crate::localization::Seed::new(sx, sy).place(n),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::RandomWindow { width, p } => write!(f, "random{width}:{p}"),
            InitSpec::RandomFull { p } => write!(f, "full:{p}"),
            InitSpec::Seed { sx, sy } => write!(f, "seed:{sx:05b},{sy:05b}"),
        }
    }
}

/// Accepts `random<width>:<p>`, `full:<p>` and `seed:<sx>,<sy>` with binary seeds.
impl FromStr for InitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<InitSpec> {
        let s = s.trim();
        let bad = || Error::Parameter(format!("init spec {s:?}: expected random<W>:<p>, full:<p> or seed:<sx>,<sy>"));
        let prob = |v: &str| -> Result<f64> {
            let p: f64 = v.parse().map_err(|_| bad())?;
            if (0.0..=1.0).contains(&p) {
                Ok(p)
            } else {
                Err(Error::Parameter(format!("probability {p} outside [0,1]")))
            }
        };
        if let Some(rest) = s.strip_prefix("seed:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            let bits = |v: &str| -> Result<u8> {
                let row = crate::rule::parse_row(v)?;
                Ok(row.iter().fold(0, |acc, &b| (acc << 1) | b))
            };
            return Ok(InitSpec::Seed { sx: bits(a)?, sy: bits(b)? });
        }
        if let Some(rest) = s.strip_prefix("full:") {
            return Ok(InitSpec::RandomFull { p: prob(rest)? });
        }
        if let Some(rest) = s.strip_prefix("random") {
            let (w, p) = rest.split_once(':').ok_or_else(bad)?;
            let width = w.parse().map_err(|_| bad())?;
            return Ok(InitSpec::RandomWindow { width, p: prob(p)? });
        }
        Err(bad())
    }
}

/// The full history of one run: `tau + 1` snapshots of each chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceTimeRecord {
    pub rule: Rule,
    pub n: usize,
    pub tau: usize,
    pub rows_x: Vec<ChainState>,
    pub rows_y: Vec<ChainState>,
}

impl SpaceTimeRecord {
    /// Builds a record from explicit rows, checking shapes.
    pub fn from_rows(rule: Rule, rows_x: Vec<ChainState>, rows_y: Vec<ChainState>) -> Result<SpaceTimeRecord> {
        if rows_x.is_empty() || rows_x.len() != rows_y.len() {
            return Err(Error::Parameter(format!(
                "record needs equal, non-empty row counts (x={}, y={})",
                rows_x.len(),
                rows_y.len()
            )));
        }
        let n = rows_x[0].n();
        for row in rows_x.iter().chain(rows_y.iter()) {
            if row.n() != n {
                return Err(Error::ChainMismatch { x: n, y: row.n() });
            }
        }
        Ok(SpaceTimeRecord {
            rule,
            n,
            tau: rows_x.len() - 1,
            rows_x,
            rows_y,
        })
    }

    pub fn rows(&self, chain: Chain) -> &[ChainState] {
        match chain {
            Chain::X => &self.rows_x,
            Chain::Y => &self.rows_y,
        }
    }

    pub fn state_at(&self, t: usize) -> AutomatonState {
        AutomatonState {
            x: self.rows_x[t].clone(),
            y: self.rows_y[t].clone(),
            t: t as u64,
        }
    }

    /// Number of cells in one chain's space-time matrix, `n * (tau + 1)`.
    pub fn cells_per_chain(&self) -> usize {
        self.n * (self.tau + 1)
    }

    pub fn excited(&self, chain: Chain) -> usize {
        self.rows(chain).iter().map(ChainState::excited).sum()
    }

    /// Debug dump: one line per time step per chain, `x` rows then `y` rows.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity(2 * (self.tau + 1) * (self.n + 1));
        for chain in [Chain::X, Chain::Y] {
            for row in self.rows(chain) {
                out.push_str(&row.to_string());
                out.push('\n');
            }
        }
        out
    }

    /// Parses the dump produced by [`SpaceTimeRecord::to_ascii`].
    pub fn from_ascii(rule: Rule, text: &str) -> Result<SpaceTimeRecord> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<ChainState>>>()?;
        if rows.len() % 2 != 0 {
            return Err(Error::Parameter("ascii dump has an odd number of rows".into()));
        }
        let half = rows.len() / 2;
        let mut rows_x = rows;
        let rows_y = rows_x.split_off(half);
        SpaceTimeRecord::from_rows(rule, rows_x, rows_y)
    }
}
