//! Synchronous update of the coupled chains.
//!
//! Neighbourhoods are `{x[i-1], x[i+1], y[i], y[i-1]}` for `x[i]` and
//! `{y[i-1], y[i+1], x[i], x[i+1]}` for `y[i]`. Sites outside `0..n` are
//! permanently resting.
//!
//! Two steppers are provided: [`step_reference`] evaluates every site from the
//! definition and is the oracle; [`PackedState`] packs 64 sites per word and
//! counts neighbours with bit-sliced adders.

use crate::error::{Error, Result};
use crate::rule::Rule;
use crate::state::{AutomatonState, Chain, ChainState, SpaceTimeRecord};

/// Number of excited neighbours of site `i` on `chain`.
pub fn neighbor_sum(state: &AutomatonState, chain: Chain, i: usize) -> Result<u8> {
    let n = state.n();
    if i >= n {
        return Err(Error::SiteIndex { index: i, n });
    }
    Ok(neighbor_sum_unchecked(state, chain, i as isize))
}

#[inline]
fn neighbor_sum_unchecked(state: &AutomatonState, chain: Chain, i: isize) -> u8 {
    let (x, y) = (&state.x, &state.y);
    match chain {
        Chain::X => x.get_or_rest(i - 1) + x.get_or_rest(i + 1) + y.get_or_rest(i) + y.get_or_rest(i - 1),
        Chain::Y => y.get_or_rest(i - 1) + y.get_or_rest(i + 1) + x.get_or_rest(i) + x.get_or_rest(i + 1),
    }
}

/// Per-site reference stepper.
pub fn step_reference(state: &AutomatonState, rule: &Rule) -> AutomatonState {
    let n = state.n();
    let next_chain = |chain: Chain| {
        let cur = state.chain(chain);
        let cells = (0..n)
            .map(|i| rule.next(cur.get(i), neighbor_sum_unchecked(state, chain, i as isize)))
            .collect();
        ChainState::from_cells_unchecked(cells)
    };
    AutomatonState {
        x: next_chain(Chain::X),
        y: next_chain(Chain::Y),
        t: state.t + 1,
    }
}

/// Word-parallel stepper on an unpacked state.
pub fn step(state: &AutomatonState, rule: &Rule) -> AutomatonState {
    let packed = PackedState::from_state(state);
    let mut next = PackedState::resting(state.n());
    packed.step_into(&CompiledRule::new(rule), &mut next);
    let mut out = next.to_state();
    out.t = state.t + 1;
    out
}

/// Runs `tau` steps with the word-parallel stepper.
pub fn run(rule: &Rule, initial: &AutomatonState, tau: usize) -> Result<SpaceTimeRecord> {
    if tau < 1 {
        return Err(Error::Parameter("tau must be at least 1".into()));
    }
    let compiled = CompiledRule::new(rule);
    let mut cur = PackedState::from_state(initial);
    let mut next = PackedState::resting(initial.n());
    let mut rows_x = Vec::with_capacity(tau + 1);
    let mut rows_y = Vec::with_capacity(tau + 1);
    rows_x.push(initial.x.clone());
    rows_y.push(initial.y.clone());
    for _ in 0..tau {
        cur.step_into(&compiled, &mut next);
        std::mem::swap(&mut cur, &mut next);
        rows_x.push(cur.unpack(Chain::X));
        rows_y.push(cur.unpack(Chain::Y));
    }
    Ok(SpaceTimeRecord {
        rule: *rule,
        n: initial.n(),
        tau,
        rows_x,
        rows_y,
    })
}

/// Runs `tau` steps with the reference stepper.
pub fn run_reference(rule: &Rule, initial: &AutomatonState, tau: usize) -> Result<SpaceTimeRecord> {
    if tau < 1 {
        return Err(Error::Parameter("tau must be at least 1".into()));
    }
    let mut rows_x = vec![initial.x.clone()];
    let mut rows_y = vec![initial.y.clone()];
    let mut cur = initial.clone();
    for _ in 0..tau {
        cur = step_reference(&cur, rule);
        rows_x.push(cur.x.clone());
        rows_y.push(cur.y.clone());
    }
    Ok(SpaceTimeRecord {
        rule: *rule,
        n: initial.n(),
        tau,
        rows_x,
        rows_y,
    })
}

/// Treatment of the sites beyond the chain ends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Out-of-range neighbours are permanently resting.
    #[default]
    Resting,
    /// Site `n` wraps to site 0 (ring).
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Boundary> {
        match s {
            "resting" => Ok(Boundary::Resting),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Parameter(format!("unknown boundary {other:?}"))),
        }
    }
}

/// A rule expanded into per-count word masks.
#[derive(Clone, Copy, Debug)]
pub struct CompiledRule {
    rest: [u64; 5],
    excited: [u64; 5],
}

impl CompiledRule {
    pub fn new(rule: &Rule) -> CompiledRule {
        let mask = |b: u8| if b == 1 { !0u64 } else { 0 };
        let mut rest = [0; 5];
        let mut excited = [0; 5];
        for k in 0..5 {
            rest[k] = mask(rule.row(0)[k]);
            excited[k] = mask(rule.row(1)[k]);
        }
        CompiledRule { rest, excited }
    }

    /// Next state of 64 sites given their states and four neighbour planes.
    #[inline(always)]
    fn apply(&self, me: u64, a: u64, b: u64, c: u64, d: u64) -> u64 {
        let s1 = a ^ b;
        let c1 = a & b;
        let s2 = c ^ d;
        let c2 = c & d;
        let lo = s1 ^ s2;
        let k = s1 & s2;
        let mid = c1 ^ c2 ^ k;
        let hi = (c1 & c2) | (c1 & k) | (c2 & k);
        let nh = !hi;
        let eq = [
            nh & !mid & !lo,
            nh & !mid & lo,
            nh & mid & !lo,
            nh & mid & lo,
            hi,
        ];
        let mut from_rest = 0;
        let mut from_excited = 0;
        for j in 0..5 {
            from_rest |= self.rest[j] & eq[j];
            from_excited |= self.excited[j] & eq[j];
        }
        (!me & from_rest) | (me & from_excited)
    }
}

/// Bit-packed pair of chains, 64 sites per word; bits at and beyond `n` are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PackedState {
    n: usize,
    pub(crate) x: Vec<u64>,
    pub(crate) y: Vec<u64>,
}

impl PackedState {
    pub fn resting(n: usize) -> PackedState {
        let words = n.div_ceil(64);
        PackedState {
            n,
            x: vec![0; words],
            y: vec![0; words],
        }
    }

    pub fn from_state(state: &AutomatonState) -> PackedState {
        let mut p = PackedState::resting(state.n());
        for (chain, words) in [(Chain::X, &mut p.x), (Chain::Y, &mut p.y)] {
            for (i, &c) in state.chain(chain).cells().iter().enumerate() {
                words[i / 64] |= (c as u64) << (i % 64);
            }
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self, chain: Chain) -> &[u64] {
        match chain {
            Chain::X => &self.x,
            Chain::Y => &self.y,
        }
    }

    pub fn set(&mut self, chain: Chain, i: usize, value: bool) {
        let words = match chain {
            Chain::X => &mut self.x,
            Chain::Y => &mut self.y,
        };
        let bit = 1u64 << (i % 64);
        if value {
            words[i / 64] |= bit;
        } else {
            words[i / 64] &= !bit;
        }
    }

    pub fn unpack(&self, chain: Chain) -> ChainState {
        let words = self.words(chain);
        let cells = (0..self.n).map(|i| ((words[i / 64] >> (i % 64)) & 1) as u8).collect();
        ChainState::from_cells_unchecked(cells)
    }

    pub fn to_state(&self) -> AutomatonState {
        AutomatonState {
            x: self.unpack(Chain::X),
            y: self.unpack(Chain::Y),
            t: 0,
        }
    }

    pub fn excited(&self) -> u32 {
        self.x.iter().chain(self.y.iter()).map(|w| w.count_ones()).sum()
    }

    pub fn is_resting(&self) -> bool {
        self.x.iter().chain(self.y.iter()).all(|&w| w == 0)
    }

    /// Smallest and largest excited site over both chains.
    pub fn support(&self) -> Option<(usize, usize)> {
        let words = self.x.len();
        let first = (0..words).find_map(|w| {
            let m = self.x[w] | self.y[w];
            (m != 0).then(|| w * 64 + m.trailing_zeros() as usize)
        })?;
        let last = (0..words).rev().find_map(|w| {
            let m = self.x[w] | self.y[w];
            (m != 0).then(|| w * 64 + 63 - m.leading_zeros() as usize)
        })?;
        Some((first, last))
    }

    fn last_mask(&self) -> u64 {
        match self.n % 64 {
            0 => !0,
            r => (1u64 << r) - 1,
        }
    }

    /// Writes the successor of `self` into `out`, which must have the same `n`.
    pub fn step_into(&self, rule: &CompiledRule, out: &mut PackedState) {
        self.step_into_with(rule, out, Boundary::Resting)
    }

    pub fn step_into_with(&self, rule: &CompiledRule, out: &mut PackedState, boundary: Boundary) {
        debug_assert_eq!(self.n, out.n);
        let words = self.x.len();
        let (x, y) = (&self.x, &self.y);
        let n = self.n;
        let bit = |v: &[u64], i: usize| (v[i / 64] >> (i % 64)) & 1;
        let (wrap_lo_x, wrap_lo_y, wrap_hi_x, wrap_hi_y) = match boundary {
            Boundary::Resting => (0, 0, 0, 0),
            Boundary::Periodic => (
                bit(x, n - 1),
                bit(y, n - 1),
                bit(x, 0) << ((n - 1) % 64),
                bit(y, 0) << ((n - 1) % 64),
            ),
        };
        for w in 0..words {
            let xw = x[w];
            let yw = y[w];
            let x_prev = if w > 0 { x[w - 1] >> 63 } else { wrap_lo_x };
            let y_prev = if w > 0 { y[w - 1] >> 63 } else { wrap_lo_y };
            let (x_next, y_next) = if w + 1 < words {
                (x[w + 1] << 63, y[w + 1] << 63)
            } else {
                (wrap_hi_x, wrap_hi_y)
            };
            // value at bit i is the neighbour's value at site i-1 (left) or i+1 (right)
            let x_left = (xw << 1) | x_prev;
            let x_right = (xw >> 1) | x_next;
            let y_left = (yw << 1) | y_prev;
            let y_right = (yw >> 1) | y_next;
            out.x[w] = rule.apply(xw, x_left, x_right, yw, y_left);
            out.y[w] = rule.apply(yw, y_left, y_right, xw, x_right);
        }
        let last = words - 1;
        let mask = self.last_mask();
        out.x[last] &= mask;
        out.y[last] &= mask;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_x(n: usize, i: usize) -> AutomatonState {
        let mut s = AutomatonState::resting(n);
        s.x.set(i, true);
        s
    }

    fn excited_sites(c: &ChainState) -> Vec<usize> {
        (0..c.n()).filter(|&i| c.get(i) == 1).collect()
    }

    #[test]
    fn neighbor_sum_examples() {
        let s = AutomatonState::resting(10);
        for i in 0..10 {
            assert_eq!(neighbor_sum(&s, Chain::X, i).unwrap(), 0);
        }
        let s = single_x(10, 5);
        assert_eq!(neighbor_sum(&s, Chain::X, 4).unwrap(), 1);
        assert_eq!(neighbor_sum(&s, Chain::Y, 5).unwrap(), 1);
        assert_eq!(neighbor_sum(&s, Chain::Y, 4).unwrap(), 1);
        assert_eq!(neighbor_sum(&s, Chain::Y, 6).unwrap(), 0);
        assert_eq!(neighbor_sum(&s, Chain::X, 5).unwrap(), 0);

        let full = AutomatonState::new("11111".parse().unwrap(), "11111".parse().unwrap()).unwrap();
        assert_eq!(neighbor_sum(&full, Chain::X, 2).unwrap(), 4);
        // x[0] lacks x[-1] and y[-1]; y[4] lacks y[5] and x[5]
        assert_eq!(neighbor_sum(&full, Chain::X, 0).unwrap(), 2);
        assert_eq!(neighbor_sum(&full, Chain::Y, 4).unwrap(), 2);
        assert_eq!(neighbor_sum(&full, Chain::X, 4).unwrap(), 3);
        assert_eq!(neighbor_sum(&full, Chain::Y, 0).unwrap(), 3);

        assert!(matches!(
            neighbor_sum(&full, Chain::X, 5),
            Err(Error::SiteIndex { index: 5, n: 5 })
        ));
    }

    #[test]
    fn zero_rule_kills_everything() {
        let rule = Rule::decode(0, 0).unwrap();
        let s = AutomatonState::new("1011001".parse().unwrap(), "0110111".parse().unwrap()).unwrap();
        let next = step(&s, &rule);
        assert_eq!(next, AutomatonState { t: 1, ..AutomatonState::resting(7) });
    }

    #[test]
    fn rule_8_0_single_seed() {
        let rule = Rule::decode(8, 0).unwrap();
        for stepper in [step_reference, step] {
            let next = stepper(&single_x(20, 9), &rule);
            assert_eq!(excited_sites(&next.x), vec![8, 10]);
            assert_eq!(excited_sites(&next.y), vec![8, 9]);
            assert_eq!(next.t, 1);
        }
    }

    #[test]
    fn autonomous_excitation_fills() {
        let rule = Rule::decode(31, 31).unwrap();
        let next = step(&AutomatonState::resting(130), &rule);
        assert_eq!(next.excited(), 260);
    }

    #[test]
    fn run_shapes() {
        let rule = Rule::decode(8, 0).unwrap();
        let init = single_x(20, 9);
        let rec = run(&rule, &init, 2).unwrap();
        assert_eq!(rec.rows_x.len(), 3);
        assert_eq!(rec.state_at(0), init);
        let one = step_reference(&init, &rule);
        let two = step_reference(&one, &rule);
        assert_eq!(rec.state_at(1), one);
        assert_eq!(rec.state_at(2), two);
        assert_eq!(run_reference(&rule, &init, 2).unwrap(), rec);
        assert!(run(&rule, &init, 0).is_err());
    }

    #[test]
    fn word_boundaries() {
        // sites straddling the 64-bit word edges, including n a multiple of 64
        for n in [63, 64, 65, 128, 129] {
            for i in [0, 62, 63, 64, 65, n - 1] {
                if i >= n {
                    continue;
                }
                for rule in [Rule::decode(8, 0).unwrap(), Rule::decode(15, 31).unwrap()] {
                    let mut s = single_x(n, i);
                    s.y.set(n - 1 - i, true);
                    let mut a = s.clone();
                    let mut b = s.clone();
                    for _ in 0..5 {
                        a = step_reference(&a, &rule);
                        b = step(&b, &rule);
                        assert_eq!(a, b, "n={n} i={i} rule={rule}");
                    }
                }
            }
        }
    }

    #[test]
    fn packed_support() {
        let mut p = PackedState::resting(200);
        assert_eq!(p.support(), None);
        p.set(Chain::X, 70, true);
        p.set(Chain::Y, 130, true);
        assert_eq!(p.support(), Some((70, 130)));
        assert_eq!(p.excited(), 2);
    }
}
