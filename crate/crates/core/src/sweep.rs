//! Exhaustive, resumable sweeps over the rule space.
//!
//! A sweep directory holds `metrics.csv`, `localization.csv` and
//! `manifest.json`. Rows are computed in parallel but written in rule order,
//! so the files depend only on the configuration.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localization::{count_with, Classifier, ClassifierParams, RuleLocalizationCounts};
use crate::metrics::{compute_configured, MeasureSource, MetricsRecord, PatternFold};
use crate::rule::{Rule, RULE_COUNT};
use crate::state::InitSpec;
use crate::step;

pub const METRICS_FILE: &str = "metrics.csv";
pub const LOCALIZATION_FILE: &str = "localization.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_HEADER: &str = "code0,code1,H,D,R,P,A,I,Z";
pub const LOCALIZATION_HEADER: &str = "code0,code1,T,S";

/// Inclusive range of rule indices (`code0 * 32 + code1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleRange {
    pub first: usize,
    pub last: usize,
}

impl RuleRange {
    pub const ALL: RuleRange = RuleRange { first: 0, last: RULE_COUNT - 1 };

    pub fn new(first: usize, last: usize) -> Result<RuleRange> {
        if first > last || last >= RULE_COUNT {
            return Err(Error::Parameter(format!("rule range {first}..{last} not within 0..{}", RULE_COUNT - 1)));
        }
        Ok(RuleRange { first, last })
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }
}

impl Default for RuleRange {
    fn default() -> Self {
        RuleRange::ALL
    }
}

impl std::fmt::Display for RuleRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl std::str::FromStr for RuleRange {
    type Err = Error;

    /// `a..b` (inclusive) or a single index.
    fn from_str(s: &str) -> Result<RuleRange> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parameter(format!("bad rule range {s:?}")))
        };
        match s.split_once("..") {
            Some((a, b)) => RuleRange::new(num(a)?, num(b.trim_start_matches('='))?),
            None => {
                let i = num(s)?;
                RuleRange::new(i, i)
            }
        }
    }
}

/// Everything that determines a sweep's output, plus execution knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub n: usize,
    pub tau: usize,
    #[serde(with = "display_fromstr")]
    pub init: InitSpec,
    pub rng_seed: u64,
    /// Independent runs averaged per rule in the metrics sweep.
    pub runs_per_rule: usize,
    pub source: MeasureSource,
    pub fold: PatternFold,
    /// Chain length for the localization scan.
    pub localization_n: usize,
    /// Steps per seed in the localization scan.
    pub localization_tau: usize,
    pub classifier: ClassifierParams,
    pub rules: RuleRange,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 300,
            tau: 1000,
            init: InitSpec::default(),
            rng_seed: 1,
            runs_per_rule: 5,
            source: MeasureSource::X,
            fold: PatternFold::default(),
            localization_n: 300,
            localization_tau: 1000,
            classifier: ClassifierParams::default(),
            rules: RuleRange::ALL,
            workers: 0,
            out_dir: None,
        }
    }
}

mod display_fromstr {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<T: std::fmt::Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
        D: Deserializer<'de>,
    {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.tau < 2 {
            return Err(Error::MatrixTooSmall { n: self.n, tau: self.tau });
        }
        if self.runs_per_rule == 0 {
            return Err(Error::Parameter("runs_per_rule must be at least 1".into()));
        }
        Classifier::new(self.localization_n, self.localization_tau, self.classifier.clone()).map(|_| ())
    }

    /// Output-determining fields as `key=value` lines. Execution knobs
    /// (workers, rule range, directory) are left out so a sweep can be
    /// extended or rerun with different parallelism.
    pub fn canonical_text(&self) -> String {
        let c = &self.classifier;
        let mut s = String::new();
        let _ = writeln!(s, "n={}", self.n);
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "init={}", self.init);
        let _ = writeln!(s, "rng_seed={}", self.rng_seed);
        let _ = writeln!(s, "runs_per_rule={}", self.runs_per_rule);
        let _ = writeln!(s, "source={:?}", self.source);
        let _ = writeln!(s, "fold={:?}", self.fold);
        let _ = writeln!(s, "localization_n={}", self.localization_n);
        let _ = writeln!(s, "localization_tau={}", self.localization_tau);
        let _ = writeln!(
            s,
            "classifier={},{},{},{},{},{},{},{:?}",
            c.activity_min,
            c.activity_max_per_step,
            c.stationary_span,
            c.travelling_span,
            c.max_excited,
            c.max_period,
            c.tail,
            c.boundary
        );
        s
    }

    pub fn hash(&self) -> u64 {
        fnv1a64(self.canonical_text().as_bytes())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Parameter(format!("thread pool: {e}")))
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Random stream for one rule: ChaCha8 keyed by `rng_seed ^ index`.
pub fn rule_rng(rng_seed: u64, rule: &Rule) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(rng_seed ^ rule.index() as u64)
}

/// Metrics for one rule, averaged over `runs_per_rule` runs drawn in turn
/// from the rule's stream.
pub fn rule_metrics(config: &SweepConfig, rule: &Rule) -> Result<MetricsRecord> {
    let mut rng = rule_rng(config.rng_seed, rule);
    let mut records = Vec::with_capacity(config.runs_per_rule);
    for _ in 0..config.runs_per_rule {
        let init = config.init.build(config.n, &mut rng)?;
        let rec = step::run(rule, &init, config.tau)?;
        records.push(compute_configured(&rec, config.source, config.fold)?);
    }
    MetricsRecord::mean(&records).ok_or_else(|| Error::Parameter("no runs".into()))
}

/// Metrics row of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub rule: Rule,
    pub metrics: MetricsRecord,
}

/// Joined metrics and localization counts of one rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rule: Rule,
    pub metrics: MetricsRecord,
    pub travelling: u32,
    pub stationary: u32,
}

impl From<SweepRow> for crate::analysis::RuleSummary {
    fn from(r: SweepRow) -> Self {
        crate::analysis::RuleSummary { rule: r.rule, metrics: r.metrics, travelling: r.travelling, stationary: r.stationary }
    }
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{v:.decimals$}"))
    }
}

pub fn metrics_line(row: &MetricsRow) -> String {
    let (c0, c1) = row.rule.encode();
    let mut s = format!("{c0},{c1}");
    for v in row.metrics.values() {
        s.push(',');
        s.push_str(&format_sig(v, 6));
    }
    s
}

pub fn localization_line(c: &RuleLocalizationCounts) -> String {
    format!("{},{},{},{}", c.code0, c.code1, c.travelling, c.stationary)
}

fn parse_rule(fields: &[&str]) -> Option<Rule> {
    Rule::decode(fields.first()?.parse().ok()?, fields.get(1)?.parse().ok()?).ok()
}

fn parse_metrics_line(line: &str) -> Option<MetricsRow> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 9 {
        return None;
    }
    let v: Vec<f64> = f[2..].iter().map(|x| x.parse().ok()).collect::<Option<_>>()?;
    Some(MetricsRow {
        rule: parse_rule(&f)?,
        metrics: MetricsRecord { h: v[0], d: v[1], r: v[2], p: v[3], a: v[4], i: v[5], z: v[6] },
    })
}

fn parse_localization_line(line: &str) -> Option<RuleLocalizationCounts> {
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 4 {
        return None;
    }
    let rule = parse_rule(&f)?;
    Some(RuleLocalizationCounts {
        code0: rule.code0(),
        code1: rule.code1(),
        travelling: f[2].parse().ok()?,
        stationary: f[3].parse().ok()?,
    })
}

/// Complete, well-formed data lines of a CSV. A trailing line without a
/// newline is a torn write and is dropped.
fn read_rows<T>(path: &Path, header: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)?;
    let malformed = |msg: String| Error::Malformed { path: path.to_path_buf(), msg };
    let complete = match text.rfind('\n') {
        Some(end) => &text[..=end],
        None => "",
    };
    let mut lines = complete.lines();
    match lines.next() {
        Some(h) if h == header => {}
        None => return Ok(Vec::new()),
        Some(h) => return Err(malformed(format!("header {h:?}, expected {header:?}"))),
    }
    lines
        .enumerate()
        .map(|(k, line)| parse(line).ok_or_else(|| malformed(format!("line {}: {line:?}", k + 2))))
        .collect()
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    read_rows(path, METRICS_HEADER, parse_metrics_line)
}

pub fn read_localization_csv(path: &Path) -> Result<Vec<RuleLocalizationCounts>> {
    read_rows(path, LOCALIZATION_HEADER, parse_localization_line)
}

/// Joins the two tables on rule; rules missing from either side are skipped.
pub fn join_rows(metrics: &[MetricsRow], localization: &[RuleLocalizationCounts]) -> Vec<SweepRow> {
    let mut loc = vec![None; RULE_COUNT];
    for c in localization {
        if let Ok(rule) = Rule::decode(c.code0, c.code1) {
            loc[rule.index()] = Some((c.travelling, c.stationary));
        }
    }
    let mut rows: Vec<SweepRow> = metrics
        .iter()
        .filter_map(|m| {
            loc[m.rule.index()].map(|(t, s)| SweepRow { rule: m.rule, metrics: m.metrics, travelling: t, stationary: s })
        })
        .collect();
    rows.sort_by_key(|r| r.rule.index());
    rows
}

/// Loads and joins both CSVs of a sweep directory.
pub fn load_sweep(dir: &Path) -> Result<Vec<SweepRow>> {
    Ok(join_rows(
        &read_metrics_csv(&dir.join(METRICS_FILE))?,
        &read_localization_csv(&dir.join(LOCALIZATION_FILE))?,
    ))
}

/// Contiguous inclusive ranges covering a set of indices.
pub fn to_ranges(done: &BTreeSet<usize>) -> Vec<RuleRange> {
    let mut out: Vec<RuleRange> = Vec::new();
    for &i in done {
        match out.last_mut() {
            Some(r) if r.last + 1 == i => r.last = i,
            _ => out.push(RuleRange { first: i, last: i }),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub metrics_completed: Vec<RuleRange>,
    pub localization_completed: Vec<RuleRange>,
}

impl Manifest {
    fn new(config: &SweepConfig) -> Manifest {
        let mut echo = config.clone();
        echo.out_dir = None;
        echo.workers = 0;
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: format!("{:016x}", config.hash()),
            config: echo,
            metrics_completed: Vec::new(),
            localization_completed: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> Result<Manifest> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_string_pretty(self)? + "\n")?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// Which tables a sweep computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepParts {
    pub metrics: bool,
    pub localization: bool,
}

impl SweepParts {
    pub const BOTH: SweepParts = SweepParts { metrics: true, localization: true };
}

/// Outcome of [`run_sweep`]: how many rules were newly computed per table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub metrics_computed: usize,
    pub localization_computed: usize,
}

impl SweepReport {
    pub fn is_noop(&self) -> bool {
        self.metrics_computed == 0 && self.localization_computed == 0
    }
}

/// One table file in a sweep directory, kept sorted by rule.
struct Table<T> {
    path: PathBuf,
    header: &'static str,
    rows: Vec<T>,
}

impl<T> Table<T> {
    fn open(path: PathBuf, header: &'static str, read: impl Fn(&Path) -> Result<Vec<T>>) -> Result<Table<T>> {
        let rows = if path.exists() { read(&path)? } else { Vec::new() };
        Ok(Table { path, header, rows })
    }

    /// Rewrites the file atomically with rows sorted by `key`.
    fn store(&mut self, key: impl Fn(&T) -> usize, line: impl Fn(&T) -> String) -> Result<()> {
        self.rows.sort_by_key(&key);
        self.rows.dedup_by_key(|r| key(r));
        let mut body = String::with_capacity(64 * (self.rows.len() + 1));
        body.push_str(self.header);
        body.push('\n');
        for r in &self.rows {
            body.push_str(&line(r));
            body.push('\n');
        }
        let tmp = self.path.with_extension("csv.tmp");
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    /// Appends rows to the file without rewriting it.
    fn append(&mut self, new: Vec<T>, line: impl Fn(&T) -> String) -> Result<()> {
        let mut f = fs::OpenOptions::new().append(true).open(&self.path)?;
        let mut buf = String::new();
        for r in &new {
            buf.push_str(&line(r));
            buf.push('\n');
        }
        f.write_all(buf.as_bytes())?;
        f.flush()?;
        self.rows.extend(new);
        Ok(())
    }
}

/// Rules per batch between flushes to disk.
const BATCH: usize = 16;

fn counts_index(c: &RuleLocalizationCounts) -> usize {
    (c.code0 * 32 + c.code1) as usize
}

/// Runs (or resumes) a sweep in `config.out_dir`. Rules already present in
/// the CSVs are skipped; a manifest written under a different configuration
/// is refused.
pub fn run_sweep(config: &SweepConfig, parts: SweepParts, mut progress: impl FnMut(&str, usize, usize)) -> Result<SweepReport> {
    config.validate()?;
    let dir = config
        .out_dir
        .clone()
        .ok_or_else(|| Error::Parameter("sweep needs an output directory".into()))?;
    fs::create_dir_all(&dir)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut manifest = Manifest::new(config);
    if manifest_path.exists() {
        let previous = Manifest::read(&manifest_path)?;
        if previous.config_hash != manifest.config_hash {
            return Err(Error::ConfigMismatch {
                path: manifest_path.clone(),
                expected: config.hash(),
                found: u64::from_str_radix(&previous.config_hash, 16).unwrap_or(0),
            });
        }
    }
    let pool = config.pool()?;
    let mut report = SweepReport::default();

    let mut metrics = Table::open(dir.join(METRICS_FILE), METRICS_HEADER, read_metrics_csv)?;
    let mut localization = Table::open(dir.join(LOCALIZATION_FILE), LOCALIZATION_HEADER, read_localization_csv)?;
    metrics.store(|r| r.rule.index(), metrics_line)?;
    localization.store(counts_index, localization_line)?;

    let sync = |m: &mut Manifest, metrics: &Table<MetricsRow>, loc: &Table<RuleLocalizationCounts>| -> Result<()> {
        m.metrics_completed = to_ranges(&metrics.rows.iter().map(|r| r.rule.index()).collect());
        m.localization_completed = to_ranges(&loc.rows.iter().map(counts_index).collect());
        m.write(&manifest_path)
    };
    sync(&mut manifest, &metrics, &localization)?;

    if parts.metrics {
        let done: BTreeSet<usize> = metrics.rows.iter().map(|r| r.rule.index()).collect();
        let todo: Vec<usize> = config.rules.indices().filter(|i| !done.contains(i)).collect();
        let total = todo.len();
        for (k, chunk) in todo.chunks(BATCH).enumerate() {
            let rows: Vec<MetricsRow> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|&i| {
                        let rule = Rule::from_index(i)?;
                        Ok(MetricsRow { rule, metrics: rule_metrics(config, &rule)? })
                    })
                    .collect::<Result<_>>()
            })?;
            metrics.append(rows, metrics_line)?;
            sync(&mut manifest, &metrics, &localization)?;
            progress("metrics", (k * BATCH + chunk.len()).min(total), total);
        }
        report.metrics_computed = total;
        metrics.store(|r| r.rule.index(), metrics_line)?;
    }

    if parts.localization {
        let done: BTreeSet<usize> = localization.rows.iter().map(counts_index).collect();
        let todo: Vec<usize> = config.rules.indices().filter(|i| !done.contains(i)).collect();
        let total = todo.len();
        for (k, chunk) in todo.chunks(BATCH).enumerate() {
            let rows: Vec<RuleLocalizationCounts> = pool.install(|| {
                chunk
                    .par_iter()
                    .map_init(
                        || Classifier::new(config.localization_n, config.localization_tau, config.classifier.clone()),
                        |classifier, &i| {
                            let classifier = classifier.as_mut().map_err(|e| Error::Parameter(e.to_string()))?;
                            count_with(classifier, &Rule::from_index(i)?)
                        },
                    )
                    .collect::<Result<_>>()
            })?;
            localization.append(rows, localization_line)?;
            sync(&mut manifest, &metrics, &localization)?;
            progress("localization", (k * BATCH + chunk.len()).min(total), total);
        }
        report.localization_computed = total;
        localization.store(counts_index, localization_line)?;
    }
    sync(&mut manifest, &metrics, &localization)?;
    Ok(report)
}

/// In-memory metrics sweep over `config.rules`, in rule order.
pub fn run_metrics_sweep(config: &SweepConfig) -> Result<Vec<MetricsRow>> {
    config.validate()?;
    config.pool()?.install(|| {
        config
            .rules
            .indices()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&i| {
                let rule = Rule::from_index(i)?;
                Ok(MetricsRow { rule, metrics: rule_metrics(config, &rule)? })
            })
            .collect()
    })
}

/// In-memory localization sweep over `config.rules`, in rule order.
pub fn run_localization_sweep(config: &SweepConfig) -> Result<Vec<RuleLocalizationCounts>> {
    config.validate()?;
    config.pool()?.install(|| {
        config
            .rules
            .indices()
            .collect::<Vec<_>>()
            .par_iter()
            .map_init(
                || {
                    Classifier::new(config.localization_n, config.localization_tau, config.classifier.clone())
                        .expect("checked above")
                },
                |classifier, &i| count_with(classifier, &Rule::from_index(i)?),
            )
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(0.0, 6), "0");
        assert_eq!(format_sig(4.31, 6), "4.31");
        assert_eq!(format_sig(0.98318724, 6), "0.983187");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(6.6712345e-6, 6), "6.67123e-06");
        assert_eq!(format_sig(0.00012345678, 6), "0.000123457");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(999999.5, 6), "1e+06");
        assert_eq!(format_sig(-2.5, 6), "-2.5");
    }

    #[test]
    fn range_parsing() {
        let r: RuleRange = "0..63".parse().unwrap();
        assert_eq!(r.len(), 64);
        assert_eq!("17".parse::<RuleRange>().unwrap(), RuleRange { first: 17, last: 17 });
        assert!("5..2".parse::<RuleRange>().is_err());
        assert!("0..1024".parse::<RuleRange>().is_err());
        assert_eq!(RuleRange::ALL.to_string(), "0..1023");
    }

    #[test]
    fn ranges_from_sets() {
        let set: BTreeSet<usize> = [0, 1, 2, 5, 7, 8].into_iter().collect();
        assert_eq!(
            to_ranges(&set),
            vec![RuleRange { first: 0, last: 2 }, RuleRange { first: 5, last: 5 }, RuleRange { first: 7, last: 8 }]
        );
        assert!(to_ranges(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn hash_ignores_execution_knobs() {
        let a = SweepConfig::default();
        let b = SweepConfig { workers: 3, rules: RuleRange::new(0, 9).unwrap(), out_dir: Some("x".into()), ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        let c = SweepConfig { tau: 999, ..a.clone() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn csv_lines_roundtrip() {
        let row = MetricsRow {
            rule: Rule::decode(7, 20).unwrap(),
            metrics: MetricsRecord { h: 4.31, d: 0.98, r: 0.22, p: 0.84, a: 0.32, i: 0.28, z: 6.67e-6 },
        };
        let line = metrics_line(&row);
        assert_eq!(line, "7,20,4.31,0.98,0.22,0.84,0.32,0.28,6.67e-06");
        assert_eq!(parse_metrics_line(&line), Some(row));
        let c = RuleLocalizationCounts { code0: 7, code1: 20, travelling: 40, stationary: 101 };
        assert_eq!(parse_localization_line(&localization_line(&c)), Some(c));
        assert_eq!(parse_metrics_line("7,20,1,2"), None);
    }

    #[test]
    fn rule_streams_differ() {
        use rand::Rng;
        let a: u64 = rule_rng(5, &Rule::decode(0, 0).unwrap()).random();
        let b: u64 = rule_rng(5, &Rule::decode(0, 1).unwrap()).random();
        let a2: u64 = rule_rng(5, &Rule::decode(0, 0).unwrap()).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }
}
