//! Rule-space statistics: entropy classes, frequency vectors over rule rows,
//! dominating positions, group summaries and least-squares fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;
use crate::rule::Rule;

/// Number of entropy classes.
pub const CLASS_COUNT: usize = 50;
/// Width of one entropy class.
pub const CLASS_WIDTH: f64 = 0.1;

/// Rules whose entropy falls in `[0.1 (z-1), 0.1 z)`; the last class also takes `H >= 5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyClass {
    pub z: usize,
    pub lo: f64,
    pub hi: f64,
    pub members: Vec<Rule>,
}

/// One-based class index of an entropy value.
pub fn class_index(h: f64) -> usize {
    if h.is_nan() || h <= 0.0 {
        return 1;
    }
    ((h / CLASS_WIDTH).floor() as usize + 1).min(CLASS_COUNT)
}

/// Buckets rules into the 50 entropy classes. Every rule lands in exactly one class.
pub fn entropy_classes(entropies: &[(Rule, f64)]) -> Vec<EntropyClass> {
    let mut classes: Vec<EntropyClass> = (1..=CLASS_COUNT)
        .map(|z| EntropyClass {
            z,
            lo: (z - 1) as f64 * CLASS_WIDTH,
            hi: z as f64 * CLASS_WIDTH,
            members: Vec::new(),
        })
        .collect();
    for &(rule, h) in entropies {
        classes[class_index(h) - 1].members.push(rule);
    }
    classes
}

/// Which row of the rule matrix a frequency vector summarises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// Row 0: resting node becomes excited.
    Excite,
    /// Row 1: excited node stays excited.
    Persist,
}

impl Transition {
    pub fn row(self) -> usize {
        match self {
            Transition::Excite => 0,
            Transition::Persist => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Transition::Excite => "0->1",
            Transition::Persist => "1->1",
        }
    }
}

/// Position-wise frequency of 1s in one row over a set of rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub kind: Transition,
    pub counts: [u32; 5],
    pub basis_size: u32,
    pub values: [f64; 5],
}

impl FrequencyVector {
    fn from_rules(rules: &[Rule], kind: Transition) -> FrequencyVector {
        let mut counts = [0u32; 5];
        for rule in rules {
            for (c, &b) in counts.iter_mut().zip(rule.row(kind.row())) {
                *c += b as u32;
            }
        }
        let basis_size = rules.len() as u32;
        FrequencyVector {
            kind,
            counts,
            basis_size,
            values: counts.map(|c| c as f64 / basis_size as f64),
        }
    }

    /// Builds a vector from given frequencies (no underlying rule set).
    pub fn from_values(kind: Transition, values: [f64; 5]) -> FrequencyVector {
        FrequencyVector {
            kind,
            counts: [0; 5],
            basis_size: 0,
            values,
        }
    }

    /// `count/basis` strings, e.g. `5/14`.
    pub fn fractions(&self) -> [String; 5] {
        self.counts.map(|c| format!("{c}/{}", self.basis_size))
    }
}

/// Excitation and persistence frequency vectors of a rule set.
pub fn group_frequency_vectors(rules: &[Rule]) -> Result<(FrequencyVector, FrequencyVector)> {
    if rules.is_empty() {
        return Err(Error::EmptyGroup("frequency vectors need at least one rule".into()));
    }
    Ok((
        FrequencyVector::from_rules(rules, Transition::Excite),
        FrequencyVector::from_rules(rules, Transition::Persist),
    ))
}

pub fn class_frequency_vectors(class: &EntropyClass) -> Result<(FrequencyVector, FrequencyVector)> {
    if class.members.is_empty() {
        return Err(Error::EmptyGroup(format!("entropy class {} has no members", class.z)));
    }
    group_frequency_vectors(&class.members)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominatingPosition {
    pub position: u8,
    /// Another position shared the maximum; the lowest was taken.
    pub tie: bool,
}

pub fn dominating_position(v: &FrequencyVector) -> DominatingPosition {
    let max = v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut hits = v.values.iter().enumerate().filter(|(_, &x)| x == max).map(|(i, _)| i);
    let position = hits.next().unwrap_or(0) as u8;
    DominatingPosition {
        position,
        tie: hits.next().is_some(),
    }
}

pub fn dominating_positions(vectors: &[FrequencyVector]) -> Result<Vec<DominatingPosition>> {
    if vectors.is_empty() {
        return Err(Error::EmptyGroup("no frequency vectors".into()));
    }
    Ok(vectors.iter().map(dominating_position).collect())
}

/// Concatenated digits of the dominating positions.
pub fn digit_string(positions: &[DominatingPosition]) -> String {
    positions.iter().map(|p| char::from(b'0' + p.position)).collect()
}

/// Bit `i` is set iff `values[i] >= cutoff`.
pub fn threshold_simplify(v: &FrequencyVector, cutoff: f64) -> [u8; 5] {
    v.values.map(|x| (x >= cutoff) as u8)
}

/// Dispersion estimator for [`group_statistics`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dispersion {
    #[default]
    Population,
    Sample,
}

/// Names of the measures summarised by [`GroupStats`], in order.
pub const STAT_MEASURES: [&str; 6] = ["H", "D", "R", "P", "A", "I"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub label: String,
    pub size: usize,
    /// Means of H, D, R, P, A, I.
    pub mean: [f64; 6],
    pub std: [f64; 6],
}

fn six(m: &MetricsRecord) -> [f64; 6] {
    [m.h, m.d, m.r, m.p, m.a, m.i]
}

pub fn group_stats(label: &str, records: &[MetricsRecord], dispersion: Dispersion) -> Result<GroupStats> {
    if records.is_empty() {
        return Err(Error::EmptyGroup(format!("group {label:?} is empty")));
    }
    let k = records.len() as f64;
    // shifting by the first record keeps identical inputs exact
    let base = six(&records[0]);
    let mut shift = [0.0; 6];
    for r in records {
        for ((m, v), b) in shift.iter_mut().zip(six(r)).zip(base) {
            *m += v - b;
        }
    }
    let mut mean = [0.0; 6];
    for ((m, s), b) in mean.iter_mut().zip(shift).zip(base) {
        *m = b + s / k;
    }
    let denom = match dispersion {
        Dispersion::Population => k,
        Dispersion::Sample if records.len() > 1 => k - 1.0,
        Dispersion::Sample => 1.0,
    };
    let mut std = [0.0; 6];
    for r in records {
        for ((s, v), m) in std.iter_mut().zip(six(r)).zip(mean) {
            *s += (v - m) * (v - m);
        }
    }
    Ok(GroupStats {
        label: label.to_string(),
        size: records.len(),
        mean,
        std: std.map(|s| (s / denom).sqrt()),
    })
}

/// Statistics for each labelled group, in input order.
pub fn group_statistics(groups: &[(String, Vec<MetricsRecord>)], dispersion: Dispersion) -> Result<Vec<GroupStats>> {
    groups
        .iter()
        .map(|(label, records)| group_stats(label, records, dispersion))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitModel {
    /// `c0 + c1 x + ... + ck x^k`.
    Polynomial(usize),
    /// `c0 + c1 ln x`.
    Logarithmic,
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitModel::Polynomial(k) => write!(f, "poly{k}"),
            FitModel::Logarithmic => write!(f, "log"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// Ascending: intercept first.
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub points: usize,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        design_row(self.model, x)
            .iter()
            .zip(&self.coefficients)
            .map(|(a, c)| a * c)
            .sum()
    }
}

fn design_row(model: FitModel, x: f64) -> Vec<f64> {
    match model {
        FitModel::Polynomial(k) => (0..=k).map(|p| x.powi(p as i32)).collect(),
        FitModel::Logarithmic => vec![1.0, x.ln()],
    }
}

/// Design matrix rows for the points a model can use. The logarithmic model
/// drops points with `x <= 0`.
pub fn design(model: FitModel, xs: &[f64], ys: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    xs.iter()
        .zip(ys)
        .filter(|(&x, _)| !matches!(model, FitModel::Logarithmic) || x > 0.0)
        .map(|(&x, &y)| (design_row(model, x), y))
        .unzip()
}

/// Least-squares fit by Householder QR.
pub fn fit(xs: &[f64], ys: &[f64], model: FitModel) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("length mismatch: {} xs, {} ys", xs.len(), ys.len())));
    }
    let (rows, y) = design(model, xs, ys);
    let cols = match model {
        FitModel::Polynomial(k) => k + 1,
        FitModel::Logarithmic => 2,
    };
    if rows.len() < cols {
        return Err(Error::Fit(format!("{} usable points for {cols} coefficients", rows.len())));
    }
    let coefficients = solve_least_squares(&rows, &y)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = rows
        .iter()
        .zip(&y)
        .map(|(row, v)| {
            let pred: f64 = row.iter().zip(&coefficients).map(|(a, c)| a * c).sum();
            (v - pred) * (v - pred)
        })
        .sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 0.0 };
    Ok(FitResult {
        model,
        coefficients,
        r_squared,
        points: y.len(),
    })
}

fn solve_least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<Vec<f64>> {
    let m = rows.len();
    let n = rows[0].len();
    // column-major copy of the design matrix
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut b = y.to_vec();
    let scale = a
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 * scale * (m as f64).sqrt() {
            return Err(Error::Fit("design matrix is rank deficient".into()));
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, p) in col.iter_mut().zip(&v) {
                *c -= f * p;
            }
        };
        for col in a.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut b[k..]);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[j][i] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Ok(x)
}

/// `max_j |Σ_i r_i a_ij| / (‖r‖ ‖a_j‖)` over design columns; zero for an exact fit.
pub fn residual_orthogonality(xs: &[f64], ys: &[f64], result: &FitResult) -> f64 {
    let (rows, y) = design(result.model, xs, ys);
    let resid: Vec<f64> = rows
        .iter()
        .zip(&y)
        .map(|(row, v)| v - row.iter().zip(&result.coefficients).map(|(a, c)| a * c).sum::<f64>())
        .collect();
    let rnorm = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    if rnorm == 0.0 {
        return 0.0;
    }
    (0..result.coefficients.len())
        .map(|j| {
            let dot: f64 = rows.iter().zip(&resid).map(|(row, r)| row[j] * r).sum();
            let cnorm = rows.iter().map(|row| row[j] * row[j]).sum::<f64>().sqrt();
            dot.abs() / (rnorm * cnorm)
        })
        .fold(0.0, f64::max)
}

/// One rule per line in any form [`Rule`] parses; blank lines and `#` comments are skipped.
pub fn parse_rule_list(text: &str) -> Result<Vec<Rule>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

/// Thresholds selecting the rule groups of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Cutoff for the simplified `*V` vectors.
    pub cutoff: f64,
    /// Rules with at least this many travelling seeds form the top travelling group.
    pub top_travelling: u32,
    /// Rules with at least this many stationary seeds form the top stationary group.
    pub top_stationary: u32,
    /// Both counts must reach these for the top mixed group.
    pub top_both: (u32, u32),
    pub dispersion: Dispersion,
    /// Polynomial degrees fitted to D against H, besides the logarithmic model.
    pub poly_degrees: Vec<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            cutoff: 0.5,
            top_travelling: 100,
            top_stationary: 900,
            top_both: (100, 350),
            dispersion: Dispersion::Population,
            poly_degrees: vec![1, 2, 3],
        }
    }
}

/// Per-rule inputs of a report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RuleSummary {
    pub rule: Rule,
    pub metrics: MetricsRecord,
    pub travelling: u32,
    pub stationary: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub z: usize,
    pub lo: f64,
    pub hi: f64,
    pub size: usize,
    pub g0: Option<[f64; 5]>,
    pub g1: Option<[f64; 5]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominatingString {
    pub transition: String,
    pub digits: String,
    /// Class indices whose argmax was a tie.
    pub tied_classes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupVectors {
    pub label: String,
    pub size: usize,
    pub v0: [String; 5],
    pub v1: [String; 5],
    pub v0_values: [f64; 5],
    pub v1_values: [f64; 5],
    pub simplified_v0: [u8; 5],
    pub simplified_v1: [u8; 5],
}

impl GroupVectors {
    pub fn new(label: &str, rules: &[Rule], cutoff: f64) -> Result<GroupVectors> {
        let (v0, v1) = group_frequency_vectors(rules)?;
        Ok(GroupVectors {
            label: label.to_string(),
            size: rules.len(),
            simplified_v0: threshold_simplify(&v0, cutoff),
            simplified_v1: threshold_simplify(&v1, cutoff),
            v0: v0.fractions(),
            v1: v1.fractions(),
            v0_values: v0.values,
            v1_values: v1.values,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    pub points: usize,
    pub orthogonality: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub rules: usize,
    pub classes: Vec<ClassSummary>,
    pub dominating: Vec<DominatingString>,
    pub group_stats: Vec<GroupStats>,
    /// Groups that were empty and so have no statistics or vectors.
    pub empty_groups: Vec<String>,
    pub vectors: Vec<GroupVectors>,
    pub fits: Vec<FitReport>,
}

/// Group labels used in reports.
pub const GROUP_ALL: &str = "all";
pub const GROUP_TRAVELLING: &str = "travelling";
pub const GROUP_STATIONARY: &str = "stationary";
pub const GROUP_BOTH: &str = "both";
pub const GROUP_NONE: &str = "none";

/// Membership of the statistics groups: any travelling seed, any stationary
/// seed, both, neither.
pub fn statistics_groups(rows: &[RuleSummary]) -> Vec<(String, Vec<RuleSummary>)> {
    let pick = |f: &dyn Fn(&RuleSummary) -> bool| rows.iter().filter(|r| f(r)).copied().collect::<Vec<_>>();
    vec![
        (GROUP_ALL.into(), rows.to_vec()),
        (GROUP_TRAVELLING.into(), pick(&|r| r.travelling > 0)),
        (GROUP_STATIONARY.into(), pick(&|r| r.stationary > 0)),
        (GROUP_BOTH.into(), pick(&|r| r.travelling > 0 && r.stationary > 0)),
        (GROUP_NONE.into(), pick(&|r| r.travelling == 0 && r.stationary == 0)),
    ]
}

pub fn analyze(rows: &[RuleSummary], config: &AnalysisConfig) -> Result<AnalysisReport> {
    if rows.is_empty() {
        return Err(Error::EmptyGroup("no rules to analyze".into()));
    }
    let entropies: Vec<(Rule, f64)> = rows.iter().map(|r| (r.rule, r.metrics.h)).collect();
    let classes = entropy_classes(&entropies);
    let mut summaries = Vec::with_capacity(CLASS_COUNT);
    let mut per_kind: [Vec<(usize, FrequencyVector)>; 2] = [Vec::new(), Vec::new()];
    for class in &classes {
        let vectors = class_frequency_vectors(class).ok();
        if let Some((g0, g1)) = &vectors {
            per_kind[0].push((class.z, g0.clone()));
            per_kind[1].push((class.z, g1.clone()));
        }
        summaries.push(ClassSummary {
            z: class.z,
            lo: class.lo,
            hi: class.hi,
            size: class.members.len(),
            g0: vectors.as_ref().map(|v| v.0.values),
            g1: vectors.as_ref().map(|v| v.1.values),
        });
    }
    let dominating = [Transition::Excite, Transition::Persist]
        .iter()
        .zip(&per_kind)
        .map(|(kind, list)| {
            let positions: Vec<DominatingPosition> = list.iter().map(|(_, v)| dominating_position(v)).collect();
            DominatingString {
                transition: kind.label().into(),
                digits: digit_string(&positions),
                tied_classes: list.iter().zip(&positions).filter(|(_, p)| p.tie).map(|((z, _), _)| *z).collect(),
            }
        })
        .collect();

    let mut empty_groups = Vec::new();
    let mut group_stats_out = Vec::new();
    for (label, members) in statistics_groups(rows) {
        let records: Vec<MetricsRecord> = members.iter().map(|r| r.metrics).collect();
        match group_stats(&label, &records, config.dispersion) {
            Ok(g) => group_stats_out.push(g),
            Err(_) => empty_groups.push(label),
        }
    }

    let (bt, bs) = config.top_both;
    let tops = [
        ("top-travelling", config.top_travelling, 0),
        ("top-stationary", 0, config.top_stationary),
        ("top-both", bt, bs),
    ];
    let mut vectors = Vec::new();
    for (label, min_t, min_s) in tops {
        let rules: Vec<Rule> = rows
            .iter()
            .filter(|r| r.travelling >= min_t && r.stationary >= min_s)
            .map(|r| r.rule)
            .collect();
        match GroupVectors::new(label, &rules, config.cutoff) {
            Ok(v) => vectors.push(v),
            Err(_) => empty_groups.push(label.to_string()),
        }
    }

    // zero-entropy rules carry no pattern information, so every model skips them
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.metrics.h > 0.0)
        .map(|r| (r.metrics.h, r.metrics.d))
        .unzip();
    let models = std::iter::once(FitModel::Logarithmic).chain(config.poly_degrees.iter().map(|&k| FitModel::Polynomial(k)));
    let fits = models
        .filter_map(|model| {
            fit(&xs, &ys, model).ok().map(|f| FitReport {
                model: model.to_string(),
                orthogonality: residual_orthogonality(&xs, &ys, &f),
                coefficients: f.coefficients,
                r_squared: f.r_squared,
                points: f.points,
            })
        })
        .collect();

    Ok(AnalysisReport {
        rules: rows.len(),
        classes: summaries,
        dominating,
        group_stats: group_stats_out,
        empty_groups,
        vectors,
        fits,
    })
}

/// `z,lo,hi,size,G0_0..G0_4,G1_0..G1_4`; empty classes leave the vectors blank.
pub fn class_table_csv(report: &AnalysisReport) -> String {
    let mut out = String::from("z,lo,hi,size,G0_0,G0_1,G0_2,G0_3,G0_4,G1_0,G1_1,G1_2,G1_3,G1_4\n");
    for c in &report.classes {
        out.push_str(&format!("{},{:.1},{:.1},{}", c.z, c.lo, c.hi, c.size));
        for g in [c.g0, c.g1] {
            for k in 0..5 {
                out.push(',');
                if let Some(v) = g {
                    out.push_str(&format!("{:.6}", v[k]));
                }
            }
        }
        out.push('\n');
    }
    out
}

/// `group,size,H,H_std,D,D_std,...`
pub fn group_stats_csv(report: &AnalysisReport) -> String {
    let mut out = String::from("group,size");
    for m in STAT_MEASURES {
        out.push_str(&format!(",{m},{m}_std"));
    }
    out.push('\n');
    for g in &report.group_stats {
        out.push_str(&format!("{},{}", g.label, g.size));
        for k in 0..6 {
            out.push_str(&format!(",{:.6},{:.6}", g.mean[k], g.std[k]));
        }
        out.push('\n');
    }
    out
}
