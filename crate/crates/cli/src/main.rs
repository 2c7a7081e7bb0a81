use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actin_core::analysis::{self, AnalysisConfig, Dispersion, GroupVectors, RuleSummary};
use actin_core::localization::{self, Classifier, ClassifierParams, Seed};
use actin_core::render::{self, Layer};
use actin_core::step::{self, Boundary};
use actin_core::sweep::{self, RuleRange, SweepConfig, SweepParts};
use actin_core::{InitSpec, MeasureSource, PatternFold, Rule};
use clap::{Args, Parser, Subcommand};

mod config;

use config::FileConfig;

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "ACTIN_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "actin", version, about = "Two-chain binary actin automata toolkit")]
struct Cli {
    /// TOML file supplying defaults for any flag below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps (default: one per core)
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one rule and dump the space-time record (and optionally images)
    Simulate(SimulateArgs),
    /// Integral measures of one rule
    Metrics(MetricsArgs),
    /// Classify the 1024 seeds of one rule, or a single seed
    Localize(LocalizeArgs),
    /// Exhaustive, resumable sweep over the rule space
    Sweep(SweepArgs),
    /// Entropy classes, frequency vectors, group statistics and fits
    Analyze(AnalyzeArgs),
    /// Write PGM images of one rule's space-time diagram
    Render(RenderArgs),
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Rule as `code0,code1` or `F0=00111,F1=10100`
    #[arg(long, value_parser = parse_rule)]
    rule: Rule,
    /// Chain length [default: 300]
    #[arg(long)]
    n: Option<usize>,
    /// Number of steps [default: 1000]
    #[arg(long)]
    tau: Option<usize>,
    /// Initial condition: random<W>:<p>, full:<p> or seed:<sx>,<sy> [default: random100:0.5]
    #[arg(long, value_parser = parse_init)]
    init: Option<InitSpec>,
    /// RNG seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Output directory [default: $ACTIN_OUT_DIR or .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Image layers to write (x, y, xor); none by default
    #[arg(long, value_delimiter = ',', value_parser = parse_layer)]
    images: Vec<Layer>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// Chain(s) for H, D, R, P, A: x, y or both [default: x]
    #[arg(long, value_parser = parse_source)]
    source: Option<MeasureSource>,
    /// Pattern identification: mod128 or full [default: mod128]
    #[arg(long, value_parser = parse_fold)]
    fold: Option<PatternFold>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[command(flatten)]
    run: RunArgs,
    #[command(flatten)]
    measure: MeasureArgs,
    /// Independent runs averaged [default: 5]
    #[arg(long)]
    runs: Option<usize>,
    /// Print JSON instead of a CSV row
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug, Default)]
struct ClassifierArgs {
    /// Lower activity bound [default: 10]
    #[arg(long)]
    activity_min: Option<u64>,
    /// Upper activity bound per step, times tau [default: 6]
    #[arg(long)]
    activity_max_per_step: Option<u64>,
    /// Stationary span W_s [default: 20]
    #[arg(long)]
    w_s: Option<usize>,
    /// Travelling span W_t [default: 50]
    #[arg(long)]
    w_t: Option<usize>,
    /// Per-step excited ceiling C_max [default: 12]
    #[arg(long)]
    c_max: Option<u32>,
    /// Largest period searched p_max [default: 60]
    #[arg(long)]
    p_max: Option<usize>,
    /// Steps that must repeat for the periodicity test [default: 120]
    #[arg(long)]
    tail: Option<usize>,
    /// Chain ends during seed runs: resting or periodic [default: resting]
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
}

#[derive(Args, Debug)]
struct LocalizeArgs {
    #[arg(long, value_parser = parse_rule)]
    rule: Rule,
    /// Chain length [default: 300]
    #[arg(long)]
    n: Option<usize>,
    /// Steps per seed [default: 1000]
    #[arg(long)]
    tau: Option<usize>,
    /// Classify only this seed (index 0..1023)
    #[arg(long, conflicts_with = "pattern")]
    seed_index: Option<usize>,
    /// Classify only this seed, as `<sx>,<sy>` five-bit rows
    #[arg(long)]
    pattern: Option<String>,
    /// Print one verdict line per seed
    #[arg(long)]
    verbose: bool,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Output directory [default: $ACTIN_OUT_DIR or .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive rule-index range `a..b` [default: 0..1023]
    #[arg(long, value_parser = parse_range)]
    rules: Option<RuleRange>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long, value_parser = parse_init)]
    init: Option<InitSpec>,
    /// Runs averaged per rule [default: 5]
    #[arg(long)]
    runs: Option<usize>,
    /// Chain length for seed scans [default: 300]
    #[arg(long)]
    loc_n: Option<usize>,
    /// Steps per seed [default: 1000]
    #[arg(long)]
    loc_tau: Option<usize>,
    /// Compute only one table: metrics or localization
    #[arg(long, value_parser = ["metrics", "localization"])]
    only: Option<String>,
    /// Suppress progress output
    #[arg(long)]
    quiet: bool,
    #[command(flatten)]
    measure: MeasureArgs,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Sweep directory holding metrics.csv and localization.csv
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report directory [default: <input>/analysis]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only compute V and *V vectors for the rules listed in this file
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Cutoff for simplified vectors [default: 0.5]
    #[arg(long)]
    cutoff: Option<f64>,
    /// Use sample instead of population standard deviation
    #[arg(long)]
    sample_std: bool,
    /// T threshold of the top travelling group [default: 100]
    #[arg(long)]
    top_t: Option<u32>,
    /// S threshold of the top stationary group [default: 900]
    #[arg(long)]
    top_s: Option<u32>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Output directory [default: $ACTIN_OUT_DIR or .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Layers to draw [default: x,y,xor]
    #[arg(long, value_delimiter = ',', value_parser = parse_layer)]
    layers: Vec<Layer>,
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_init(s: &str) -> Result<InitSpec, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_layer(s: &str) -> Result<Layer, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_source(s: &str) -> Result<MeasureSource, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_fold(s: &str) -> Result<PatternFold, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

fn parse_range(s: &str) -> Result<RuleRange, String> {
    s.parse().map_err(|e: actin_core::Error| e.to_string())
}

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<actin_core::Error> for Failure {
    fn from(e: actin_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(msg) => return report(Failure::Usage(msg)),
        },
        None => FileConfig::default(),
    };
    let ctx = Context { file, workers: cli.workers };
    let result = match cli.command {
        Command::Simulate(a) => ctx.simulate(a),
        Command::Metrics(a) => ctx.metrics(a),
        Command::Localize(a) => ctx.localize(a),
        Command::Sweep(a) => ctx.sweep(a),
        Command::Analyze(a) => ctx.analyze(a),
        Command::Render(a) => ctx.render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    match f {
        Failure::Usage(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Failure::Runtime(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Flags layered over the config file over built-in defaults.
struct Context {
    file: FileConfig,
    workers: Option<usize>,
}

impl Context {
    fn out_dir(&self, flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| self.file.out.clone())
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn n(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.n).unwrap_or(300)
    }

    fn tau(&self, flag: Option<usize>) -> usize {
        flag.or(self.file.tau).unwrap_or(1000)
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.file.seed).unwrap_or(1)
    }

    fn init(&self, flag: Option<InitSpec>) -> Result<InitSpec, Failure> {
        match flag {
            Some(i) => Ok(i),
            None => match &self.file.init {
                Some(s) => parse_init(s).map_err(Failure::Usage),
                None => Ok(InitSpec::default()),
            },
        }
    }

    fn source(&self, flag: Option<MeasureSource>) -> Result<MeasureSource, Failure> {
        match (flag, &self.file.source) {
            (Some(s), _) => Ok(s),
            (None, Some(s)) => parse_source(s).map_err(Failure::Usage),
            (None, None) => Ok(MeasureSource::default()),
        }
    }

    fn fold(&self, flag: Option<PatternFold>) -> Result<PatternFold, Failure> {
        match (flag, &self.file.fold) {
            (Some(f), _) => Ok(f),
            (None, Some(f)) => parse_fold(f).map_err(Failure::Usage),
            (None, None) => Ok(PatternFold::default()),
        }
    }

    fn classifier(&self, a: &ClassifierArgs) -> Result<ClassifierParams, Failure> {
        let mut p = self.file.classifier.clone().unwrap_or_default();
        if let Some(v) = a.activity_min {
            p.activity_min = v;
        }
        if let Some(v) = a.activity_max_per_step {
            p.activity_max_per_step = v;
        }
        if let Some(v) = a.w_s {
            p.stationary_span = v;
        }
        if let Some(v) = a.w_t {
            p.travelling_span = v;
        }
        if let Some(v) = a.c_max {
            p.max_excited = v;
        }
        if let Some(v) = a.p_max {
            p.max_period = v;
        }
        if let Some(v) = a.tail {
            p.tail = v;
        }
        if let Some(v) = a.boundary {
            p.boundary = v;
        }
        p.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(p)
    }

    fn record(&self, run: &RunArgs) -> Result<actin_core::SpaceTimeRecord, Failure> {
        let n = self.n(run.n);
        let tau = self.tau(run.tau);
        let init = self.init(run.init.clone())?;
        let mut rng = sweep::rule_rng(self.seed(run.seed), &run.rule);
        let state = init.build(n, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(step::run(&run.rule, &state, tau)?)
    }

    fn simulate(&self, a: SimulateArgs) -> Outcome {
        let rec = self.record(&a.run)?;
        let dir = self.out_dir(a.out);
        std::fs::create_dir_all(&dir)?;
        let (c0, c1) = a.run.rule.encode();
        let path = dir.join(format!("rule_{c0}_{c1}.txt"));
        std::fs::write(&path, rec.to_ascii())?;
        println!("{}", path.display());
        for layer in a.images {
            println!("{}", render::write_layer(&rec, layer, &dir)?.display());
        }
        Ok(())
    }

    fn metrics(&self, a: MetricsArgs) -> Outcome {
        let config = SweepConfig {
            n: self.n(a.run.n),
            tau: self.tau(a.run.tau),
            init: self.init(a.run.init.clone())?,
            rng_seed: self.seed(a.run.seed),
            runs_per_rule: a.runs.or(self.file.runs).unwrap_or(5),
            source: self.source(a.measure.source)?,
            fold: self.fold(a.measure.fold)?,
            ..SweepConfig::default()
        };
        config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let m = sweep::rule_metrics(&config, &a.run.rule)?;
        if a.json {
            println!("{}", serde_json::to_string_pretty(&m)?);
        } else {
            println!("{}", sweep::METRICS_HEADER);
            println!("{}", sweep::metrics_line(&sweep::MetricsRow { rule: a.run.rule, metrics: m }));
        }
        Ok(())
    }

    fn localize(&self, a: LocalizeArgs) -> Outcome {
        let n = a.n.or(self.file.loc_n).unwrap_or(300);
        let tau = a.tau.or(self.file.loc_tau).unwrap_or(1000);
        let params = self.classifier(&a.classifier)?;
        let mut classifier = Classifier::new(n, tau, params).map_err(|e| Failure::Usage(e.to_string()))?;
        let single = match (a.seed_index, &a.pattern) {
            (Some(i), _) if i >= localization::SEED_COUNT => {
                return Err(Failure::Usage(format!("seed index {i} not in 0..1023")))
            }
            (Some(i), _) => Some(Seed::from_index(i)),
            (None, Some(p)) => match parse_init(&format!("seed:{p}")).map_err(Failure::Usage)? {
                InitSpec::Seed { sx, sy } => Some(Seed::new(sx, sy)),
                _ => unreachable!("seed prefix"),
            },
            (None, None) => None,
        };
        if let Some(seed) = single {
            let v = classifier.classify(&a.rule, seed)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            return Ok(());
        }
        if a.verbose {
            println!("seed,sx,sy,kind,total_activity,support_span,period,shift");
            for i in 0..localization::SEED_COUNT {
                let seed = Seed::from_index(i);
                let v = classifier.classify(&a.rule, seed)?;
                let (sx, sy) = seed.label();
                let opt = |o: Option<String>| o.unwrap_or_default();
                println!(
                    "{i},{sx},{sy},{},{},{},{},{}",
                    v.kind.name(),
                    v.total_activity,
                    v.support_span,
                    opt(v.period.map(|p| p.to_string())),
                    opt(v.shift.map(|s| s.to_string()))
                );
            }
            return Ok(());
        }
        let counts = localization::count_with(&mut classifier, &a.rule)?;
        println!("{}", sweep::LOCALIZATION_HEADER);
        println!("{}", sweep::localization_line(&counts));
        Ok(())
    }

    fn sweep(&self, a: SweepArgs) -> Outcome {
        let config = SweepConfig {
            n: self.n(a.n),
            tau: self.tau(a.tau),
            init: self.init(a.init.clone())?,
            rng_seed: self.seed(a.seed),
            runs_per_rule: a.runs.or(self.file.runs).unwrap_or(5),
            source: self.source(a.measure.source)?,
            fold: self.fold(a.measure.fold)?,
            localization_n: a.loc_n.or(self.file.loc_n).unwrap_or(300),
            localization_tau: a.loc_tau.or(self.file.loc_tau).unwrap_or(1000),
            classifier: self.classifier(&a.classifier)?,
            rules: a.rules.unwrap_or_default(),
            workers: self.workers.or(self.file.workers).unwrap_or(0),
            out_dir: Some(self.out_dir(a.out)),
        };
        config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let parts = match a.only.as_deref() {
            Some("metrics") => SweepParts { metrics: true, localization: false },
            Some("localization") => SweepParts { metrics: false, localization: true },
            _ => SweepParts::BOTH,
        };
        let quiet = a.quiet;
        let report = sweep::run_sweep(&config, parts, |what, done, total| {
            if !quiet {
                eprintln!("{what}: {done}/{total}");
            }
        })?;
        if report.is_noop() {
            eprintln!("sweep already complete; nothing to do");
        }
        Ok(())
    }

    fn analyze(&self, a: AnalyzeArgs) -> Outcome {
        let config = AnalysisConfig {
            cutoff: a.cutoff.or(self.file.cutoff).unwrap_or(0.5),
            top_travelling: a.top_t.unwrap_or(100),
            top_stationary: a.top_s.unwrap_or(900),
            dispersion: if a.sample_std { Dispersion::Sample } else { Dispersion::Population },
            ..AnalysisConfig::default()
        };
        if let Some(list) = &a.rules {
            let text = std::fs::read_to_string(list)
                .map_err(|e| Failure::Usage(format!("cannot read rule list {}: {e}", list.display())))?;
            let rules = analysis::parse_rule_list(&text).map_err(|e| Failure::Usage(e.to_string()))?;
            if rules.is_empty() {
                return Err(Failure::Usage(format!("rule list {} is empty", list.display())));
            }
            let v = GroupVectors::new(&list.display().to_string(), &rules, config.cutoff)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            return Ok(());
        }
        let input = a
            .input
            .ok_or_else(|| Failure::Usage("analyze needs --input <sweep dir> or --rules <file>".into()))?;
        for file in [sweep::METRICS_FILE, sweep::LOCALIZATION_FILE] {
            if !input.join(file).is_file() {
                return Err(Failure::Usage(format!("{} not found", input.join(file).display())));
            }
        }
        let rows: Vec<RuleSummary> = sweep::load_sweep(&input)?.into_iter().map(Into::into).collect();
        let report = analysis::analyze(&rows, &config)?;
        let out = a.out.unwrap_or_else(|| input.join("analysis"));
        write_report(&report, &out)?;
        for g in &report.group_stats {
            println!("{:<12} n={:<5} H={:.3} (sd {:.3})", g.label, g.size, g.mean[0], g.std[0]);
        }
        for d in &report.dominating {
            println!("dominating {}: {}", d.transition, d.digits);
        }
        for f in &report.fits {
            println!("fit {}: {:?} R2={:.4}", f.model, f.coefficients, f.r_squared);
        }
        println!("{}", out.display());
        Ok(())
    }

    fn render(&self, a: RenderArgs) -> Outcome {
        let rec = self.record(&a.run)?;
        let dir = self.out_dir(a.out);
        std::fs::create_dir_all(&dir)?;
        let layers = if a.layers.is_empty() {
            vec![Layer::Chain(actin_core::Chain::X), Layer::Chain(actin_core::Chain::Y), Layer::Incoherence]
        } else {
            a.layers
        };
        for layer in layers {
            println!("{}", render::write_layer(&rec, layer, &dir)?.display());
        }
        Ok(())
    }
}

fn write_report(report: &analysis::AnalysisReport, dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("analysis.json"), serde_json::to_string_pretty(report)? + "\n")?;
    std::fs::write(dir.join("classes.csv"), analysis::class_table_csv(report))?;
    std::fs::write(dir.join("groups.csv"), analysis::group_stats_csv(report))?;
    Ok(())
}
