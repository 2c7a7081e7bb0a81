//! Integral measures of a space-time configuration.
//!
//! Pattern statistics use every 3×3 window lying fully inside one chain's
//! `(tau+1) × n` matrix. Windows with no excited cell are not counted, so the
//! all-zero pattern never appears and `eta` is the number of non-resting
//! windows.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Chain, SpaceTimeRecord};

/// Number of distinct 3×3 binary patterns.
pub const PATTERN_COUNT: usize = 512;

/// DEFLATE level used for the compressibility measure.
pub const DEFLATE_LEVEL: u32 = 6;

/// Which matrix the single-chain measures (H, D, P, R, A) are taken from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeasureSource {
    #[default]
    X,
    Y,
    /// Pools windows and cells of both chains.
    Both,
}

impl MeasureSource {
    fn chains(self) -> &'static [Chain] {
        match self {
            MeasureSource::X => &[Chain::X],
            MeasureSource::Y => &[Chain::Y],
            MeasureSource::Both => &[Chain::X, Chain::Y],
        }
    }
}

impl std::str::FromStr for MeasureSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(MeasureSource::X),
            "y" => Ok(MeasureSource::Y),
            "both" => Ok(MeasureSource::Both),
            other => Err(Error::Parameter(format!("unknown measure source {other:?}"))),
        }
    }
}

/// How window keys are identified before computing H, D and R.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternFold {
    /// All 9 bits distinguish patterns.
    Full,
    /// Keys are reduced mod 128, merging windows that differ only in the two
    /// leading cells of the earliest row. Matches the published reference values.
    #[default]
    Mod128,
}

impl std::str::FromStr for PatternFold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(PatternFold::Full),
            "mod128" => Ok(PatternFold::Mod128),
            other => Err(Error::Parameter(format!("unknown pattern fold {other:?}"))),
        }
    }
}

/// Occurrence counts of non-resting 3×3 patterns.
///
/// Pattern keys are 9-bit: bit `8 - (3*dt + di)` holds the cell at time
/// offset `dt` and site offset `di` within the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowHistogram {
    counts: Vec<u64>,
    eta: u64,
}

impl Default for WindowHistogram {
    fn default() -> Self {
        WindowHistogram {
            counts: vec![0; PATTERN_COUNT],
            eta: 0,
        }
    }
}

impl WindowHistogram {
    /// Builds a histogram from explicit `(pattern, count)` pairs. Pattern 0 is rejected.
    pub fn from_counts(pairs: &[(u16, u64)]) -> Result<WindowHistogram> {
        let mut h = WindowHistogram::default();
        for &(key, count) in pairs {
            if key == 0 || key as usize >= PATTERN_COUNT {
                return Err(Error::Parameter(format!("pattern key {key} not in 1..512")));
            }
            h.counts[key as usize] += count;
            h.eta += count;
        }
        Ok(h)
    }

    pub fn eta(&self) -> u64 {
        self.eta
    }

    pub fn count(&self, key: u16) -> u64 {
        self.counts[key as usize]
    }

    /// `(pattern, count)` for every pattern seen at least once.
    pub fn iter(&self) -> impl Iterator<Item = (u16, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k as u16, c))
    }

    /// Re-keys the histogram. Under [`PatternFold::Mod128`] key 0 may become
    /// populated; `eta` is unchanged.
    pub fn folded(&self, fold: PatternFold) -> WindowHistogram {
        match fold {
            PatternFold::Full => self.clone(),
            PatternFold::Mod128 => {
                let mut h = WindowHistogram { counts: vec![0; PATTERN_COUNT], eta: self.eta };
                for (k, &c) in self.counts.iter().enumerate() {
                    h.counts[k & 127] += c;
                }
                h
            }
        }
    }

    pub fn distinct(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    fn merge(&mut self, other: &WindowHistogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.eta += other.eta;
    }
}

pub fn window_histogram(record: &SpaceTimeRecord, chain: Chain) -> Result<WindowHistogram> {
    let (n, tau) = (record.n, record.tau);
    if n < 3 || tau < 2 {
        return Err(Error::MatrixTooSmall { n, tau });
    }
    let rows = record.rows(chain);
    // triples[t][i] = 3-bit code of sites i..i+2 at step t
    let triples: Vec<Vec<u16>> = rows
        .iter()
        .map(|row| {
            row.cells()
                .windows(3)
                .map(|w| (w[0] as u16) << 2 | (w[1] as u16) << 1 | w[2] as u16)
                .collect()
        })
        .collect();
    let mut hist = WindowHistogram::default();
    for t in 0..=tau - 2 {
        let (a, b, c) = (&triples[t], &triples[t + 1], &triples[t + 2]);
        for i in 0..n - 2 {
            let key = (a[i] << 6 | b[i] << 3 | c[i]) as usize;
            if key != 0 {
                hist.counts[key] += 1;
            }
        }
    }
    hist.eta = hist.counts.iter().sum();
    Ok(hist)
}

fn histogram_for(record: &SpaceTimeRecord, source: MeasureSource) -> Result<WindowHistogram> {
    let mut hist = WindowHistogram::default();
    for &chain in source.chains() {
        hist.merge(&window_histogram(record, chain)?);
    }
    Ok(hist)
}

/// Shannon entropy of the pattern distribution, in nats. Zero for an empty histogram.
pub fn shannon_entropy(hist: &WindowHistogram) -> f64 {
    if hist.eta == 0 {
        return 0.0;
    }
    let eta = hist.eta as f64;
    -hist
        .iter()
        .map(|(_, c)| {
            let q = c as f64 / eta;
            q * q.ln()
        })
        .sum::<f64>()
}

/// Simpson diversity `1 - Σ q²`. Zero for an empty histogram.
pub fn simpson_diversity(hist: &WindowHistogram) -> f64 {
    if hist.eta == 0 {
        return 0.0;
    }
    let eta = hist.eta as f64;
    let sum_sq: f64 = hist
        .iter()
        .map(|(_, c)| {
            let q = c as f64 / eta;
            q * q
        })
        .sum();
    (1.0 - sum_sq).max(0.0)
}

/// Fraction of the 512 possible patterns that occur.
pub fn richness(hist: &WindowHistogram) -> f64 {
    hist.distinct() as f64 / PATTERN_COUNT as f64
}

/// Fraction of cells whose 3×3 space-time neighbourhood (clipped at the
/// matrix edges) holds at least one excited cell.
pub fn space_filling(record: &SpaceTimeRecord, chain: Chain) -> f64 {
    non_resting_cells(record, chain) as f64 / record.cells_per_chain() as f64
}

fn non_resting_cells(record: &SpaceTimeRecord, chain: Chain) -> usize {
    let rows = record.rows(chain);
    let n = record.n;
    // spatial dilation of each row
    let dilated: Vec<Vec<u8>> = rows
        .iter()
        .map(|row| {
            let c = row.cells();
            (0..n)
                .map(|i| {
                    let lo = i.saturating_sub(1);
                    let hi = (i + 1).min(n - 1);
                    c[lo..=hi].contains(&1) as u8
                })
                .collect()
        })
        .collect();
    let last = dilated.len() - 1;
    let mut count = 0;
    for t in 0..=last {
        let lo = t.saturating_sub(1);
        let hi = (t + 1).min(last);
        for i in 0..n {
            if (lo..=hi).any(|s| dilated[s][i] == 1) {
                count += 1;
            }
        }
    }
    count
}

/// Fraction of excited cells in one chain's space-time matrix.
pub fn activity(record: &SpaceTimeRecord, chain: Chain) -> f64 {
    record.excited(chain) as f64 / record.cells_per_chain() as f64
}

/// `|Σx - Σy| / (n (tau+1))`.
pub fn incoherence(record: &SpaceTimeRecord) -> f64 {
    let sx = record.excited(Chain::X) as f64;
    let sy = record.excited(Chain::Y) as f64;
    (sx - sy).abs() / record.cells_per_chain() as f64
}

/// Size in bytes of the DEFLATE-compressed x matrix (one byte per cell, row-major).
pub fn compressed_size(record: &SpaceTimeRecord) -> usize {
    let mut enc = DeflateEncoder::new(Vec::new(), Compression::new(DEFLATE_LEVEL));
    for row in &record.rows_x {
        enc.write_all(row.cells()).expect("writing to a Vec cannot fail");
    }
    enc.finish().expect("writing to a Vec cannot fail").len()
}

/// Reciprocal of [`compressed_size`].
pub fn compressibility(record: &SpaceTimeRecord) -> f64 {
    1.0 / compressed_size(record) as f64
}

/// The seven integral measures of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "Z")]
    pub z: f64,
}

impl MetricsRecord {
    /// Values in `H, D, R, P, A, I, Z` order.
    pub fn values(&self) -> [f64; 7] {
        [self.h, self.d, self.r, self.p, self.a, self.i, self.z]
    }

    /// Component-wise mean.
    pub fn mean(records: &[MetricsRecord]) -> Option<MetricsRecord> {
        if records.is_empty() {
            return None;
        }
        let k = records.len() as f64;
        let mut acc = [0.0; 7];
        for r in records {
            for (a, v) in acc.iter_mut().zip(r.values()) {
                *a += v;
            }
        }
        let [h, d, r, p, a, i, z] = acc.map(|v| v / k);
        Some(MetricsRecord { h, d, r, p, a, i, z })
    }
}

/// All measures, with the single-chain ones taken on chain x.
pub fn compute_all(record: &SpaceTimeRecord) -> Result<MetricsRecord> {
    compute_with(record, MeasureSource::X)
}

pub fn compute_with(record: &SpaceTimeRecord, source: MeasureSource) -> Result<MetricsRecord> {
    compute_configured(record, source, PatternFold::default())
}

pub fn compute_configured(record: &SpaceTimeRecord, source: MeasureSource, fold: PatternFold) -> Result<MetricsRecord> {
    let hist = histogram_for(record, source)?.folded(fold);
    let chains = source.chains();
    let cells = (record.cells_per_chain() * chains.len()) as f64;
    let filled: usize = chains.iter().map(|&c| non_resting_cells(record, c)).sum();
    let excited: usize = chains.iter().map(|&c| record.excited(c)).sum();
    Ok(MetricsRecord {
        h: shannon_entropy(&hist),
        d: simpson_diversity(&hist),
        r: richness(&hist),
        p: filled as f64 / cells,
        a: excited as f64 / cells,
        i: incoherence(record),
        z: compressibility(record),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::Rule;
    use crate::state::ChainState;

    fn record(x: &[&str], y: &[&str]) -> SpaceTimeRecord {
        let parse = |rows: &[&str]| rows.iter().map(|r| r.parse::<ChainState>().unwrap()).collect();
        SpaceTimeRecord::from_rows(Rule::decode(0, 0).unwrap(), parse(x), parse(y)).unwrap()
    }

    fn uniform(n: usize, tau: usize, v: u8) -> SpaceTimeRecord {
        let row = ChainState::from_cells(vec![v; n]).unwrap();
        SpaceTimeRecord::from_rows(Rule::decode(0, 0).unwrap(), vec![row.clone(); tau + 1], vec![row; tau + 1]).unwrap()
    }

    #[test]
    fn empty_and_uniform_histograms() {
        let h = window_histogram(&uniform(10, 6, 0), Chain::X).unwrap();
        assert_eq!(h.eta(), 0);
        assert_eq!(h.distinct(), 0);
        assert_eq!(shannon_entropy(&h), 0.0);
        assert_eq!(simpson_diversity(&h), 0.0);
        assert_eq!(richness(&h), 0.0);

        let h = window_histogram(&uniform(10, 6, 1), Chain::X).unwrap();
        assert_eq!(h.eta(), 8 * 5);
        assert_eq!(h.count(511), 40);
        assert_eq!(shannon_entropy(&h), 0.0);
        assert_eq!(simpson_diversity(&h), 0.0);
        assert_eq!(richness(&h), 1.0 / 512.0);
    }

    #[test]
    fn single_cell_gives_nine_windows() {
        let rows = ["00000", "00000", "00100", "00000", "00000"];
        let rec = record(&rows, &rows);
        let h = window_histogram(&rec, Chain::X).unwrap();
        assert_eq!(h.eta(), 9);
        assert_eq!(h.distinct(), 9);
        // each single-bit key appears once
        for b in 0..9 {
            assert_eq!(h.count(1 << b), 1);
        }
    }

    #[test]
    fn too_small() {
        let rec = record(&["01", "10", "11"], &["00", "00", "00"]);
        assert!(matches!(window_histogram(&rec, Chain::X), Err(Error::MatrixTooSmall { n: 2, tau: 2 })));
        let rec = record(&["010", "110"], &["000", "000"]);
        assert!(window_histogram(&rec, Chain::X).is_err());
    }

    #[test]
    fn entropy_and_simpson_analytic() {
        let h = WindowHistogram::from_counts(&[(5, 37)]).unwrap();
        assert_eq!(shannon_entropy(&h), 0.0);
        let h = WindowHistogram::from_counts(&[(3, 20), (100, 20)]).unwrap();
        assert!((shannon_entropy(&h) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((simpson_diversity(&h) - 0.5).abs() < 1e-12);
        let k = 7u16;
        let pairs: Vec<(u16, u64)> = (1..=k).map(|p| (p, 3)).collect();
        let h = WindowHistogram::from_counts(&pairs).unwrap();
        assert!((simpson_diversity(&h) - (1.0 - 1.0 / k as f64)).abs() < 1e-12);
        assert!((shannon_entropy(&h) - (k as f64).ln()).abs() < 1e-12);
        assert!(WindowHistogram::from_counts(&[(0, 1)]).is_err());
    }

    #[test]
    fn space_filling_and_activity() {
        assert_eq!(space_filling(&uniform(8, 5, 0), Chain::X), 0.0);
        assert_eq!(space_filling(&uniform(8, 5, 1), Chain::X), 1.0);
        let rows = ["000000", "000000", "001000", "000000", "000000"];
        let rec = record(&rows, &rows);
        assert!((space_filling(&rec, Chain::X) - 9.0 / 30.0).abs() < 1e-15);

        assert_eq!(activity(&uniform(8, 5, 1), Chain::Y), 1.0);
        let alt = record(&["1111", "0000", "1111", "0000"], &["0000", "0000", "0000", "0000"]);
        assert_eq!(activity(&alt, Chain::X), 0.5);
        assert_eq!(incoherence(&alt), 0.5);
    }

    #[test]
    fn incoherence_extremes() {
        let same = uniform(5, 3, 1);
        assert_eq!(incoherence(&same), 0.0);
        let rec = record(&["111", "111", "111"], &["000", "000", "000"]);
        assert_eq!(incoherence(&rec), 1.0);
    }

    #[test]
    fn compressibility_orders_constant_above_noise() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (n, tau) = (300, 1000);
        let constant = uniform(n, tau, 0);
        let noisy_rows: Vec<ChainState> = (0..=tau)
            .map(|_| ChainState::from_cells((0..n).map(|_| rng.random_bool(0.5) as u8).collect()).unwrap())
            .collect();
        let noisy = SpaceTimeRecord::from_rows(Rule::decode(0, 0).unwrap(), noisy_rows.clone(), noisy_rows).unwrap();
        let zc = compressibility(&constant);
        let zn = compressibility(&noisy);
        assert!(zc > zn, "constant {zc} vs noise {zn}");
        // a 0/1 byte stream at p=0.5 cannot go below one bit per cell
        assert!(compressed_size(&noisy) >= n * (tau + 1) / 8);
    }

    #[test]
    fn all_resting_metrics() {
        let m = compute_all(&uniform(20, 10, 0)).unwrap();
        assert_eq!([m.h, m.d, m.r, m.p, m.a, m.i], [0.0; 6]);
        assert!(m.z > 0.0);
    }

    #[test]
    fn both_source_pools_chains() {
        let rec = record(&["111", "111", "111"], &["000", "000", "000"]);
        let m = compute_with(&rec, MeasureSource::Both).unwrap();
        assert_eq!(m.a, 0.5);
        assert_eq!(m.p, 0.5);
        let my = compute_with(&rec, MeasureSource::Y).unwrap();
        assert_eq!(my.a, 0.0);
        assert_eq!(my.h, 0.0);
    }

    #[test]
    fn mod128_fold_merges_leading_cells() {
        let h = WindowHistogram::from_counts(&[(0b100000000, 2), (0b010000000, 3), (0b000000001, 5), (0b110000001, 1)]).unwrap();
        let f = h.folded(PatternFold::Mod128);
        assert_eq!(f.eta(), 11);
        assert_eq!(f.count(0), 5);
        assert_eq!(f.count(1), 6);
        assert_eq!(f.distinct(), 2);
        assert_eq!(h.folded(PatternFold::Full), h);
        assert_eq!("mod128".parse::<PatternFold>().unwrap(), PatternFold::Mod128);
        assert!("half".parse::<PatternFold>().is_err());
    }

    #[test]
    fn fold_only_changes_pattern_measures() {
        let rows = ["000000", "010010", "001100", "000010", "100000"];
        let rec = record(&rows, &rows);
        let full = compute_configured(&rec, MeasureSource::X, PatternFold::Full).unwrap();
        let folded = compute_configured(&rec, MeasureSource::X, PatternFold::Mod128).unwrap();
        assert_eq!((full.p, full.a, full.i, full.z), (folded.p, folded.a, folded.i, folded.z));
        assert!(folded.r <= full.r);
        assert!(folded.h <= full.h + 1e-12);
    }
}
