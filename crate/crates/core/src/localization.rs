//! Seed scans for travelling and stationary localizations.
//!
//! Every rule is probed with all 1024 pairs of five-cell seeds placed on
//! otherwise resting chains. A seed qualifies when its accumulated excitation
//! over the run lies in the activity band and never dies out; survivors are
//! then split into stationary and travelling by the extent of their
//! cumulative support, with a shift-periodicity test for the middle ground.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rule::Rule;
use crate::state::{AutomatonState, Chain};
use crate::step::{Boundary, CompiledRule, PackedState};

/// Number of seed pairs.
pub const SEED_COUNT: usize = 1024;

/// Shortest chain that can hold a seed with room to evolve.
pub const MIN_CHAIN: usize = 20;

/// A pair of five-cell patterns. Bit 4 of `sx` is `x0`, the leftmost cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    pub sx: u8,
    pub sy: u8,
}

impl Seed {
    pub fn new(sx: u8, sy: u8) -> Seed {
        Seed { sx: sx & 0x1f, sy: sy & 0x1f }
    }

    pub fn from_index(index: usize) -> Seed {
        Seed::new((index / 32) as u8, (index % 32) as u8)
    }

    pub fn index(&self) -> usize {
        self.sx as usize * 32 + self.sy as usize
    }

    /// Leftmost site of the seed on a chain of `n` sites.
    pub fn placement(n: usize) -> usize {
        n / 2 - 2
    }

    /// Seed whose placed state is the reflect-swap image of this one's.
    pub fn reflect_swapped(&self) -> Seed {
        let rev = |b: u8| (b.reverse_bits() >> 3) & 0x1f;
        Seed::new(rev(self.sy), rev(self.sx))
    }

    pub fn place(&self, n: usize) -> Result<AutomatonState> {
        if n < MIN_CHAIN {
            return Err(Error::ChainTooShort { n, min: MIN_CHAIN });
        }
        let start = Seed::placement(n);
        let mut s = AutomatonState::resting(n);
        for j in 0..5 {
            s.x.set(start + j, (self.sx >> (4 - j)) & 1 == 1);
            s.y.set(start + j, (self.sy >> (4 - j)) & 1 == 1);
        }
        Ok(s)
    }

    pub fn label(&self) -> (String, String) {
        (format!("{:05b}", self.sx), format!("{:05b}", self.sy))
    }
}

/// All 1024 seeds in `sx * 32 + sy` order, validated against chain length `n`.
pub fn enumerate_seeds(n: usize) -> Result<Vec<Seed>> {
    if n < MIN_CHAIN {
        return Err(Error::ChainTooShort { n, min: MIN_CHAIN });
    }
    Ok((0..SEED_COUNT).map(Seed::from_index).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalizationKind {
    None,
    Stationary,
    Travelling,
}

impl LocalizationKind {
    pub fn name(self) -> &'static str {
        match self {
            LocalizationKind::None => "none",
            LocalizationKind::Stationary => "stationary",
            LocalizationKind::Travelling => "travelling",
        }
    }
}

/// Thresholds of the seed classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    /// Lower bound on accumulated excitation (both chains, all steps).
    pub activity_min: u64,
    /// Upper bound is `activity_max_per_step * tau`.
    pub activity_max_per_step: u64,
    /// Cumulative support spans up to this many sites are stationary.
    pub stationary_span: usize,
    /// Spans beyond this are travelling if the per-step count stays small.
    pub travelling_span: usize,
    /// Per-step excited-cell ceiling for the span-only travelling verdict.
    pub max_excited: u32,
    /// Largest period searched by the periodicity test.
    pub max_period: usize,
    /// Number of final steps that must repeat under the periodicity test.
    pub tail: usize,
    /// Chain-end treatment during seed runs.
    pub boundary: Boundary,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            activity_min: 10,
            activity_max_per_step: 6,
            stationary_span: 20,
            travelling_span: 50,
            max_excited: 12,
            max_period: 60,
            tail: 120,
            boundary: Boundary::Resting,
        }
    }
}

impl ClassifierParams {
    pub fn activity_max(&self, tau: usize) -> u64 {
        self.activity_max_per_step * tau as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.stationary_span > self.travelling_span {
            return Err(Error::Parameter(format!(
                "stationary span {} exceeds travelling span {}",
                self.stationary_span, self.travelling_span
            )));
        }
        if self.max_period == 0 || self.tail == 0 {
            return Err(Error::Parameter("period search needs max_period >= 1 and tail >= 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one seed run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalizationVerdict {
    pub kind: LocalizationKind,
    /// Excited cells summed over both chains and every recorded step
    /// (accumulation stops once the ceiling is crossed).
    pub total_activity: u64,
    /// Width of the union of excited sites over all steps.
    pub support_span: usize,
    /// Excitation present at every step of the run.
    pub persisted: bool,
    pub period: Option<usize>,
    pub shift: Option<i64>,
    /// Steps actually simulated before a verdict was forced.
    pub steps_run: usize,
}

/// T and S for one rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleLocalizationCounts {
    pub code0: u32,
    pub code1: u32,
    #[serde(rename = "T")]
    pub travelling: u32,
    #[serde(rename = "S")]
    pub stationary: u32,
}

/// Reusable buffers for classifying many seeds on one chain length.
pub struct Classifier {
    n: usize,
    tau: usize,
    params: ClassifierParams,
    words: usize,
    history_len: usize,
    // ring of the last `history_len` states: x words then y words per slot
    history: Vec<u64>,
}

impl Classifier {
    pub fn new(n: usize, tau: usize, params: ClassifierParams) -> Result<Classifier> {
        if n < MIN_CHAIN {
            return Err(Error::ChainTooShort { n, min: MIN_CHAIN });
        }
        params.validate()?;
        let history_len = (params.tail + params.max_period).min(tau + 1);
        if tau < params.max_period + params.tail.min(tau) || tau < 2 {
            return Err(Error::Parameter(format!(
                "tau {tau} too short for period search (max_period {} + tail {})",
                params.max_period, params.tail
            )));
        }
        let words = n.div_ceil(64);
        Ok(Classifier {
            n,
            tau,
            params,
            words,
            history_len,
            history: vec![0; history_len * 2 * words],
        })
    }

    pub fn params(&self) -> &ClassifierParams {
        &self.params
    }

    fn record(&mut self, t: usize, state: &PackedState) {
        let slot = t % self.history_len;
        let base = slot * 2 * self.words;
        self.history[base..base + self.words].copy_from_slice(state.words(Chain::X));
        self.history[base + self.words..base + 2 * self.words].copy_from_slice(state.words(Chain::Y));
    }

    fn slot(&self, t: usize) -> (&[u64], &[u64]) {
        let base = (t % self.history_len) * 2 * self.words;
        (
            &self.history[base..base + self.words],
            &self.history[base + self.words..base + 2 * self.words],
        )
    }

    pub fn classify(&mut self, rule: &Rule, seed: Seed) -> Result<LocalizationVerdict> {
        let initial = seed.place(self.n)?;
        Ok(self.classify_state(rule, &initial))
    }

    /// Classifies an arbitrary initial state of length `n`.
    pub fn classify_state(&mut self, rule: &Rule, initial: &AutomatonState) -> LocalizationVerdict {
        let tau = self.tau;
        let max_activity = self.params.activity_max(tau);
        let mut cur = PackedState::from_state(initial);
        let mut next = PackedState::resting(self.n);
        let compiled = CompiledRule::new(rule);

        let mut total = cur.excited() as u64;
        let mut max_count = cur.excited();
        let mut span = cur.support();
        let history_start = tau + 1 - self.history_len;

        let none = |total, span: Option<(usize, usize)>, persisted, steps_run| LocalizationVerdict {
            kind: LocalizationKind::None,
            total_activity: total,
            support_span: span.map_or(0, |(lo, hi)| hi - lo + 1),
            persisted,
            period: None,
            shift: None,
            steps_run,
        };

        if span.is_none() {
            return none(0, None, false, 0);
        }
        if history_start == 0 {
            self.record(0, &cur);
        }
        for t in 1..=tau {
            cur.step_into_with(&compiled, &mut next, self.params.boundary);
            std::mem::swap(&mut cur, &mut next);
            let count = cur.excited();
            if count == 0 {
                return none(total, span, false, t);
            }
            total += count as u64;
            if total > max_activity {
                return none(total, span, true, t);
            }
            max_count = max_count.max(count);
            if let (Some((lo, hi)), Some((a, b))) = (span, cur.support()) {
                span = Some((lo.min(a), hi.max(b)));
            }
            if t >= history_start {
                self.record(t, &cur);
            }
        }

        let support_span = span.map_or(0, |(lo, hi)| hi - lo + 1);
        let mut verdict = LocalizationVerdict {
            kind: LocalizationKind::None,
            total_activity: total,
            support_span,
            persisted: true,
            period: None,
            shift: None,
            steps_run: tau,
        };
        if total < self.params.activity_min {
            return verdict;
        }
        let periodic = self.shift_period();
        if let Some((p, d)) = periodic {
            verdict.period = Some(p);
            verdict.shift = Some(d);
        }
        verdict.kind = if support_span <= self.params.stationary_span {
            LocalizationKind::Stationary
        } else if support_span > self.params.travelling_span && max_count <= self.params.max_excited {
            LocalizationKind::Travelling
        } else {
            match periodic {
                Some((_, 0)) => LocalizationKind::Stationary,
                Some(_) => LocalizationKind::Travelling,
                None => LocalizationKind::None,
            }
        };
        verdict
    }

    /// Smallest period `p` and shift `d` such that every state over the final
    /// `tail` steps equals the state `p` steps earlier translated by `d` sites.
    fn shift_period(&self) -> Option<(usize, i64)> {
        let tau = self.tau;
        let tail = self.params.tail.min(self.history_len - 1);
        let max_p = self.params.max_period.min(self.history_len - tail);
        let canon: Vec<(usize, Vec<u64>)> = (tau + 1 - self.history_len..=tau)
            .map(|t| {
                let (x, y) = self.slot(t);
                canonical(x, y, self.words)
            })
            .collect();
        let at = |t: usize| &canon[t + self.history_len - tau - 1];
        'period: for p in 1..=max_p {
            let mut shift = None;
            for t in tau + 1 - tail..=tau {
                let (lo_now, ref now) = *at(t);
                let (lo_then, ref then) = *at(t - p);
                if now != then {
                    continue 'period;
                }
                let d = lo_now as i64 - lo_then as i64;
                match shift {
                    None => shift = Some(d),
                    Some(s) if s != d => continue 'period,
                    _ => {}
                }
            }
            return shift.map(|d| (p, d));
        }
        None
    }
}

/// Lowest excited site over both chains and both chains' words shifted so
/// that site becomes bit 0. A resting state maps to `(0, zeros)`.
fn canonical(x: &[u64], y: &[u64], words: usize) -> (usize, Vec<u64>) {
    let lo = (0..words)
        .find_map(|w| {
            let m = x[w] | y[w];
            (m != 0).then(|| w * 64 + m.trailing_zeros() as usize)
        })
        .unwrap_or(0);
    let mut out = Vec::with_capacity(2 * words);
    for chain in [x, y] {
        let (ws, bs) = (lo / 64, lo % 64);
        for w in 0..words {
            let a = chain.get(w + ws).copied().unwrap_or(0);
            let b = chain.get(w + ws + 1).copied().unwrap_or(0);
            out.push(if bs == 0 { a } else { (a >> bs) | (b << (64 - bs)) });
        }
    }
    (lo, out)
}

/// Classifies one seed on a chain of `n` sites.
pub fn classify_seed(
    rule: &Rule,
    seed: Seed,
    n: usize,
    tau: usize,
    params: &ClassifierParams,
) -> Result<LocalizationVerdict> {
    Classifier::new(n, tau, params.clone())?.classify(rule, seed)
}

/// Verdicts for all 1024 seeds in seed order.
pub fn scan_rule(rule: &Rule, n: usize, tau: usize, params: &ClassifierParams) -> Result<Vec<LocalizationVerdict>> {
    let mut classifier = Classifier::new(n, tau, params.clone())?;
    enumerate_seeds(n)?
        .into_iter()
        .map(|seed| classifier.classify(rule, seed))
        .collect()
}

pub fn count_localizations(rule: &Rule, n: usize, tau: usize, params: &ClassifierParams) -> Result<RuleLocalizationCounts> {
    let mut classifier = Classifier::new(n, tau, params.clone())?;
    count_with(&mut classifier, rule)
}

/// T and S using a caller-owned classifier. Rules that excite from rest flood
/// the background and are reported as (0, 0) without simulation.
pub fn count_with(classifier: &mut Classifier, rule: &Rule) -> Result<RuleLocalizationCounts> {
    let (code0, code1) = rule.encode();
    let mut counts = RuleLocalizationCounts {
        code0,
        code1,
        travelling: 0,
        stationary: 0,
    };
    if rule.excites_from_rest() {
        return Ok(counts);
    }
    for index in 0..SEED_COUNT {
        match classifier.classify(rule, Seed::from_index(index))?.kind {
            LocalizationKind::Travelling => counts.travelling += 1,
            LocalizationKind::Stationary => counts.stationary += 1,
            LocalizationKind::None => {}
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_enumerated_in_order() {
        let seeds = enumerate_seeds(300).unwrap();
        assert_eq!(seeds.len(), 1024);
        assert_eq!(seeds[0], Seed::new(0, 0));
        assert_eq!(seeds[1], Seed::new(0, 1));
        assert_eq!(seeds[1023], Seed::new(31, 31));
        assert!(seeds[0].place(300).unwrap().excited() == 0);
        assert!(matches!(enumerate_seeds(19), Err(Error::ChainTooShort { n: 19, min: 20 })));
    }

    #[test]
    fn seed_placement() {
        let s = Seed::new(0b10001, 0b10111).place(300).unwrap();
        let xs: Vec<usize> = (0..300).filter(|&i| s.x.get(i) == 1).collect();
        let ys: Vec<usize> = (0..300).filter(|&i| s.y.get(i) == 1).collect();
        assert_eq!(xs, vec![148, 152]);
        assert_eq!(ys, vec![148, 150, 151, 152]);
    }

    #[test]
    fn reflected_seed_matches_reflected_state() {
        // n odd and even: placement is only mirror-exact when n is odd
        for index in [1, 37, 500, 1023] {
            let seed = Seed::from_index(index);
            let n = 301;
            let image = seed.place(n).unwrap().reflect_swap();
            assert_eq!(seed.reflect_swapped().place(n).unwrap(), image);
            assert_eq!(seed.reflect_swapped().reflect_swapped(), seed);
        }
    }

    #[test]
    fn zero_rule_never_localizes() {
        let rule = Rule::decode(0, 0).unwrap();
        let params = ClassifierParams::default();
        let v = classify_seed(&rule, Seed::new(0b00100, 0), 300, 200, &params).unwrap();
        assert_eq!(v.kind, LocalizationKind::None);
        assert!(!v.persisted);
        assert_eq!(v.total_activity, 1);
        let counts = count_localizations(&rule, 300, 200, &params).unwrap();
        assert_eq!((counts.travelling, counts.stationary), (0, 0));
    }

    #[test]
    fn flooding_rule_never_localizes() {
        let rule = Rule::decode(31, 31).unwrap();
        let params = ClassifierParams::default();
        let v = classify_seed(&rule, Seed::new(0b00100, 0), 300, 200, &params).unwrap();
        assert_eq!(v.kind, LocalizationKind::None);
        assert!(v.total_activity > params.activity_max(200));
        assert!(v.steps_run <= 3);
    }

    #[test]
    fn persistent_block_is_stationary() {
        // (0,16): nothing excites, an isolated excited node stays excited.
        let rule = Rule::decode(0, 16).unwrap();
        let params = ClassifierParams::default();
        let v = classify_seed(&rule, Seed::new(0b00100, 0), 300, 200, &params).unwrap();
        assert!(v.persisted, "{v:?}");
        assert_eq!(v.kind, LocalizationKind::Stationary, "{v:?}");
        assert!(v.support_span <= params.stationary_span);
    }

    #[test]
    fn canonical_shift() {
        let mut a = PackedState::resting(200);
        let mut b = PackedState::resting(200);
        for i in [60, 61, 70] {
            a.set(Chain::X, i, true);
            b.set(Chain::X, i + 20, true);
        }
        a.set(Chain::Y, 63, true);
        b.set(Chain::Y, 83, true);
        let (la, ca) = canonical(a.words(Chain::X), a.words(Chain::Y), 4);
        let (lb, cb) = canonical(b.words(Chain::X), b.words(Chain::Y), 4);
        assert_eq!((la, lb), (60, 80));
        assert_eq!(ca, cb);
    }

    #[test]
    fn short_tau_rejected() {
        assert!(Classifier::new(300, 50, ClassifierParams::default()).is_err());
        let mut bad = ClassifierParams::default();
        bad.stationary_span = 60;
        assert!(Classifier::new(300, 500, bad).is_err());
    }
}
