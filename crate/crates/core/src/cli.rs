//! Command-line front end.
//!
//! Settings resolve as: command-line flag, then `VMIFS_WORKERS` (worker count
//! only), then a `key=value` config file given with `--config`, then the
//! built-in default. Reports go to stdout (or `--output`); diagnostics and
//! errors go to stderr.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::baseline_select;
use crate::bench::{default_feature_counts, leakage_self_check, run_bench, FeatureRanker, LeakageReport, Method};
use crate::data::{discretize, gen_from_spec, gen_tree_synthetic, load_csv, write_csv, BinStrategy, Dataset};
use crate::data::{LabelColumn, Schema, TreeModelSpec};
use crate::error::{Error, Result};
use crate::estimators::{joint_mi_exact, mi_plugin};
use crate::selection::{SelectionResult, StepRecord};
use crate::verify::{run_suite, Suite};
use crate::vmi::{init_state, select, VmiConfig};

pub const WORKERS_ENV: &str = "VMIFS_WORKERS";

const SELECT_METHODS: [&str; 8] = ["vmi-naive", "vmi-pairwise", "mim", "mrmr", "jmi", "cmim", "cife", "exact-greedy"];

#[derive(Debug, Parser)]
#[command(name = "vmifs", version, about = "Variational information maximization feature selection")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Worker threads for parallel scoring (default: available cores).
    #[arg(long, global = true, env = WORKERS_ENV, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// key=value settings file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity on stderr (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Format as ValueEnum>::from_str(s, true).map_err(|_| Error::InvalidArgument(format!("unknown format '{s}'")))
    }
}

/// Options shared by commands that read a dataset.
#[derive(Debug, Clone, Args)]
pub struct DataOpts {
    /// Label column: header name or 0-based index (default: last column).
    #[arg(long)]
    pub label: Option<String>,
    /// Bins for continuous columns (default 10).
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub bins: Option<u64>,
    /// Binning strategy: equal-width or equal-frequency (default).
    #[arg(long)]
    pub strategy: Option<String>,
    /// Keep continuous columns and use kernel density estimates (VMI methods only).
    #[arg(long)]
    pub kde: bool,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank features of a CSV dataset.
    Select {
        input: PathBuf,
        #[arg(short, long, value_parser = SELECT_METHODS)]
        method: Option<String>,
        /// Number of features to select.
        #[arg(short = 'T', long = "n-select", value_parser = clap::value_parser!(u64).range(1..))]
        n_select: Option<u64>,
        /// Additive smoothing for VMI conditional tables (default 0.1).
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        data: DataOpts,
    },
    /// Per-feature plug-in MI and single-feature bound, or exact joint MI of a set.
    Mi {
        input: PathBuf,
        /// Comma-separated feature names or indices (default: all).
        #[arg(long, value_delimiter = ',')]
        features: Vec<String>,
        /// Compute the exact joint MI of the set given by --set.
        #[arg(long, requires = "set")]
        exact: bool,
        /// Feature set for --exact.
        #[arg(long, value_delimiter = ',')]
        set: Vec<String>,
        /// Smoothing used for the bound column (default 0.1).
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        data: DataOpts,
    },
    /// Generate a synthetic dataset as CSV.
    Synth {
        /// `tree-gaussian` or a path to a JSON tree model.
        #[arg(long, default_value = "tree-gaussian")]
        model: String,
        #[arg(short, long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validated 3-NN error curves and paired t-tests.
    Bench {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Comma-separated methods (default vmi-naive,mim).
        #[arg(long, value_delimiter = ',', value_parser = Method::NAMES)]
        methods: Vec<String>,
        /// Comma-separated feature counts (default 10,20,...,100 up to D).
        #[arg(long, value_delimiter = ',')]
        counts: Vec<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Neighbors for the classifier (default 3).
        #[arg(short, long, value_parser = clap::value_parser!(u64).range(1..))]
        k: Option<u64>,
        /// Also run the canary leakage self-check.
        #[arg(long)]
        leakage_check: bool,
        #[command(flatten)]
        data: DataOpts,
    },
    /// Randomized checks of the bound against exact oracles.
    Verify {
        #[arg(value_parser = ["theorem1", "theorem2", "bound", "step1"])]
        suite: String,
        /// Number of random instances (default depends on the suite).
        #[arg(long)]
        cases: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Values from a `key=value` config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile(HashMap<String, String>);

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("config line {}: expected key=value", n + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(ConfigFile(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidArgument(format!("config key {key}: cannot parse '{v}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    Bins { bins: usize, strategy: BinStrategy },
    Kde,
}

/// Resolved settings, echoed into reports. The worker count is left out of
/// the echo because results do not depend on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub method: String,
    pub n_select: usize,
    pub alpha: f64,
    pub discretization: Discretization,
    pub seed: u64,
    pub k: usize,
    pub label: Option<String>,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub format: Format,
    #[serde(skip)]
    pub verbosity: u8,
}

impl RunConfig {
    fn vmi_config(&self) -> VmiConfig {
        VmiConfig { alpha: self.alpha }
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

struct Resolver<'a> {
    file: &'a ConfigFile,
}

impl Resolver<'_> {
    fn data(&self, data: &DataOpts) -> Result<(Discretization, Option<String>, Format)> {
        let kde = data.kde || self.file.get::<bool>("kde")?.unwrap_or(false);
        let disc = if kde {
            Discretization::Kde
        } else {
            let bins = pick(data.bins.map(|b| b as usize), self.file, "bins", 10)?;
            if bins < 2 {
                return Err(Error::InvalidArgument(format!("bins must be at least 2, got {bins}")));
            }
            let strategy = match &data.strategy {
                Some(s) => s.parse()?,
                None => self.file.get("strategy")?.unwrap_or(BinStrategy::EqualFrequency),
            };
            Discretization::Bins { bins, strategy }
        };
        let label = match &data.label {
            Some(l) => Some(l.clone()),
            None => self.file.get("label")?,
        };
        Ok((disc, label, pick(data.format, self.file, "format", Format::Json)?))
    }
}

fn usage_error(message: &str) -> clap::Error {
    Cli::command().error(ErrorKind::ArgumentConflict, message)
}

/// Resolution failures that are usage errors (exit 2) rather than runtime
/// errors (exit 1).
enum Failure {
    Usage(clap::Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn load_dataset(path: &Path, cfg: &RunConfig) -> Result<Dataset> {
    let label = cfg.label.as_deref().map_or(LabelColumn::Last, LabelColumn::parse);
    let ds = load_csv(path, &label, &Schema::Infer)?;
    match &cfg.discretization {
        Discretization::Kde => Ok(ds),
        Discretization::Bins { bins, strategy } if !ds.is_all_categorical() => discretize(&ds, *bins, *strategy),
        Discretization::Bins { .. } => Ok(ds),
    }
}

fn feature_ref(ds: &Dataset, s: &str) -> Result<usize> {
    if let Some(i) = ds.feature_index(s) {
        return Ok(i);
    }
    match s.parse::<usize>() {
        Ok(i) if i < ds.n_features() => Ok(i),
        _ => Err(Error::InvalidArgument(format!("unknown feature '{s}'"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Serialize(e.to_string())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|source| Error::Io { path: p.to_path_buf(), source })?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_all(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| Error::Io { path: PathBuf::from("<output>"), source })
}

#[derive(Serialize)]
struct SelectReport<'a> {
    run: &'a RunConfig,
    input: String,
    n_samples: usize,
    n_features: usize,
    result: &'a SelectionResult,
}

fn cmd_select(input: &Path, cfg: &RunConfig, output: Option<&Path>) -> Result<()> {
    let ds = load_dataset(input, cfg)?;
    let result = match Method::parse(&cfg.method, cfg.alpha, cfg.seed)? {
        Method::Vmi { kind, config } => select(&ds, kind, cfg.n_select, config)?,
        Method::Baseline(kind) => baseline_select(kind, &ds, cfg.n_select)?,
        other => return Err(Error::InvalidArgument(format!("method {other} cannot be used with select"))),
    };
    log::info!("selection finished in {:.3} s", result.elapsed.as_secs_f64());
    let mut out = open_output(output)?;
    match cfg.format {
        Format::Json => {
            let report = SelectReport {
                run: cfg,
                input: input.display().to_string(),
                n_samples: ds.n_samples(),
                n_features: ds.n_features(),
                result: &result,
            };
            write_all(&mut out, &(to_json(&report)? + "\n"))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["step", "event", "feature", "name", "value"]).map_err(csv_err)?;
            for (step, rec) in result.steps.iter().enumerate() {
                let (event, f, v) = match rec {
                    StepRecord::Select { feature, value } => ("select", *feature, *value),
                    StepRecord::Restart { best_feature, best_score, .. } => ("restart", *best_feature, *best_score),
                };
                w.write_record([&step.to_string(), event, &f.to_string(), ds.feature_name(f), &v.to_string()])
                    .map_err(csv_err)?;
            }
            w.flush().map_err(|source| Error::Io { path: PathBuf::from("<output>"), source })
        }
    }
}

#[derive(Serialize)]
struct MiRow {
    feature: usize,
    name: String,
    /// Plug-in MI with no smoothing.
    mi: f64,
    /// Single-feature variational bound with the configured smoothing.
    lb: f64,
}

#[derive(Serialize)]
struct MiReport<'a> {
    run: &'a RunConfig,
    input: String,
    features: Vec<MiRow>,
}

#[derive(Serialize)]
struct ExactReport<'a> {
    run: &'a RunConfig,
    input: String,
    set: Vec<usize>,
    names: Vec<String>,
    joint_mi: f64,
}

fn cmd_mi(input: &Path, features: &[String], exact_set: Option<&[String]>, cfg: &RunConfig, output: Option<&Path>) -> Result<()> {
    let ds = load_dataset(input, cfg)?;
    let mut out = open_output(output)?;
    if let Some(set) = exact_set {
        let set = set.iter().map(|s| feature_ref(&ds, s)).collect::<Result<Vec<_>>>()?;
        let joint_mi = joint_mi_exact(&ds, &set)?;
        let names = set.iter().map(|&i| ds.feature_name(i).to_string()).collect();
        return match cfg.format {
            Format::Json => {
                let report = ExactReport { run: cfg, input: input.display().to_string(), set, names, joint_mi };
                write_all(&mut out, &(to_json(&report)? + "\n"))
            }
            Format::Csv => write_all(&mut out, &format!("set,joint_mi\n\"{}\",{joint_mi}\n", names.join(","))),
        };
    }
    let idx: Vec<usize> = if features.is_empty() {
        (0..ds.n_features()).collect()
    } else {
        features.iter().map(|s| feature_ref(&ds, s)).collect::<Result<_>>()?
    };
    let state = init_state(&ds, crate::vmi::QDistKind::Naive, cfg.vmi_config())?;
    let rows = idx
        .iter()
        .map(|&i| {
            Ok(MiRow {
                feature: i,
                name: ds.feature_name(i).to_string(),
                mi: mi_plugin(&ds, i, 0.0)?,
                lb: state.score_candidate(i)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match cfg.format {
        Format::Json => {
            let report = MiReport { run: cfg, input: input.display().to_string(), features: rows };
            write_all(&mut out, &(to_json(&report)? + "\n"))
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush().map_err(|source| Error::Io { path: PathBuf::from("<output>"), source })
        }
    }
}

fn cmd_synth(model: &str, n: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let ds = if model == "tree-gaussian" {
        gen_tree_synthetic(n, seed)?
    } else {
        let path = Path::new(model);
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let spec: TreeModelSpec = serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("cannot parse model file {model}: {e}")))?;
        gen_from_spec(&spec, n, seed)?
    };
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf)?;
    let mut out = open_output(out)?;
    write_all(&mut out, &String::from_utf8_lossy(&buf))
}

#[derive(Serialize)]
struct BenchEntry {
    input: String,
    report: crate::bench::BenchReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    leakage: Vec<LeakageEntry>,
}

#[derive(Serialize)]
struct LeakageEntry {
    method: String,
    #[serde(flatten)]
    report: LeakageReport,
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    run: &'a RunConfig,
    methods: &'a [String],
    datasets: Vec<BenchEntry>,
}

fn cmd_bench(
    inputs: &[PathBuf],
    methods: &[String],
    counts: &[usize],
    leakage_check: bool,
    cfg: &RunConfig,
    output: Option<&Path>,
) -> Result<()> {
    let parsed = methods.iter().map(|m| Method::parse(m, cfg.alpha, cfg.seed)).collect::<Result<Vec<_>>>()?;
    let rankers: Vec<&dyn FeatureRanker> = parsed.iter().map(|m| m as &dyn FeatureRanker).collect();
    let mut entries = Vec::new();
    for input in inputs {
        let ds = load_dataset(input, cfg)?;
        let grid = if counts.is_empty() { default_feature_counts(ds.n_features()) } else { counts.to_vec() };
        let report = run_bench(&ds, &rankers, &grid, cfg.seed, cfg.k)?;
        let mut leakage = Vec::new();
        if leakage_check {
            for m in &parsed {
                let r = leakage_self_check(&ds, m, grid[grid.len() - 1], cfg.seed)?;
                log::info!("leakage check {} on {}: {}", m, input.display(), if r.passed { "pass" } else { "FAIL" });
                if !r.passed {
                    return Err(Error::VerificationFailed(format!(
                        "held-out rows influenced the {m} ranking on {}",
                        input.display()
                    )));
                }
                leakage.push(LeakageEntry { method: m.to_string(), report: r });
            }
        }
        entries.push(BenchEntry { input: input.display().to_string(), report, leakage });
    }
    let mut out = open_output(output)?;
    match cfg.format {
        Format::Json => {
            let all = BenchOutput { run: cfg, methods, datasets: entries };
            write_all(&mut out, &(to_json(&all)? + "\n"))
        }
        Format::Csv if entries.len() == 1 => entries[0].report.write_csv(out),
        Format::Csv => {
            // Several inputs: prefix each method with its file stem.
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["method", "m", "mean_error", "std"]).map_err(csv_err)?;
            for e in &entries {
                let stem = Path::new(&e.input).file_stem().map_or("", |s| s.to_str().unwrap_or(""));
                for c in &e.report.methods {
                    for p in &c.points {
                        w.write_record([
                            format!("{stem}/{}", c.method),
                            p.m.to_string(),
                            p.mean_error.to_string(),
                            p.std.to_string(),
                        ])
                        .map_err(csv_err)?;
                    }
                }
            }
            w.flush().map_err(|source| Error::Io { path: PathBuf::from("<output>"), source })
        }
    }
}

fn cmd_verify(suite: &str, cases: Option<usize>, seed: u64) -> Result<()> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, cases.unwrap_or(suite.default_cases()), seed)?;
    let mut out = open_output(None)?;
    write_all(&mut out, &(to_json(&report)? + "\n"))?;
    if report.passed {
        Ok(())
    } else {
        Err(Error::VerificationFailed(format!("{} of {} checks failed in {suite}", report.failures.len(), report.checks)))
    }
}

fn base_config(file: &ConfigFile, method: Option<&String>, alpha: Option<f64>, seed: Option<u64>) -> Result<RunConfig> {
    Ok(RunConfig {
        method: pick(method.cloned(), file, "method", "vmi-naive".to_string())?,
        n_select: pick(None, file, "n_select", 10)?,
        alpha: pick(alpha, file, "alpha", VmiConfig::default().alpha)?,
        discretization: Discretization::Bins { bins: 10, strategy: BinStrategy::EqualFrequency },
        seed: pick(seed, file, "seed", 0)?,
        k: pick(None, file, "k", crate::bench::DEFAULT_K)?,
        label: None,
        workers: None,
        format: Format::Json,
        verbosity: 0,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be finite and >= 0, got {alpha}")))
    }
}

fn execute(cli: &Cli, file: &ConfigFile) -> std::result::Result<(), Failure> {
    let resolver = Resolver { file };
    match &cli.command {
        Command::Select { input, method, n_select, alpha, data } => {
            let mut cfg = base_config(file, method.as_ref(), *alpha, None)?;
            cfg.n_select = pick(n_select.map(|t| t as usize), file, "T", cfg.n_select)?;
            if cfg.n_select == 0 {
                return Err(Error::InvalidArgument("T must be at least 1".into()).into());
            }
            (cfg.discretization, cfg.label, cfg.format) = resolver.data(data)?;
            check_alpha(cfg.alpha)?;
            let method = Method::parse(&cfg.method, cfg.alpha, cfg.seed)?;
            if cfg.discretization == Discretization::Kde && !method.is_vmi() {
                return Err(Failure::Usage(usage_error("--kde can only be used with vmi-naive or vmi-pairwise")));
            }
            cmd_select(input, &cfg, data.output.as_deref())?;
        }
        Command::Mi { input, features, exact, set, alpha, data } => {
            let mut cfg = base_config(file, None, *alpha, None)?;
            (cfg.discretization, cfg.label, cfg.format) = resolver.data(data)?;
            check_alpha(cfg.alpha)?;
            if cfg.discretization == Discretization::Kde {
                return Err(Failure::Usage(usage_error("mi works on discretized data; drop --kde")));
            }
            cmd_mi(input, features, exact.then_some(set.as_slice()), &cfg, data.output.as_deref())?;
        }
        Command::Synth { model, n, seed, out } => {
            let seed = pick(*seed, file, "seed", 0)?;
            cmd_synth(model, *n as usize, seed, out.as_deref())?;
        }
        Command::Bench { inputs, methods, counts, alpha, seed, k, leakage_check, data } => {
            let mut cfg = base_config(file, None, *alpha, *seed)?;
            cfg.k = pick(k.map(|k| k as usize), file, "k", cfg.k)?;
            (cfg.discretization, cfg.label, cfg.format) = resolver.data(data)?;
            check_alpha(cfg.alpha)?;
            let methods: Vec<String> = if methods.is_empty() {
                match file.get::<String>("methods")? {
                    Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
                    None => vec!["vmi-naive".into(), "mim".into()],
                }
            } else {
                methods.clone()
            };
            cfg.method = methods.join(",");
            let parsed = methods.iter().map(|m| Method::parse(m, cfg.alpha, cfg.seed)).collect::<Result<Vec<_>>>()?;
            if cfg.discretization == Discretization::Kde && parsed.iter().any(|m| !m.is_vmi()) {
                return Err(Failure::Usage(usage_error("--kde can only be used with vmi-naive or vmi-pairwise")));
            }
            cmd_bench(inputs, &methods, counts, *leakage_check, &cfg, data.output.as_deref())?;
        }
        Command::Verify { suite, cases, seed } => {
            cmd_verify(suite, *cases, pick(*seed, file, "seed", 0)?)?;
        }
    }
    Ok(())
}

fn report_error(e: &Error) {
    let line = serde_json::json!({ "error": { "code": e.code(), "message": e.to_string() } });
    eprintln!("{line}");
}

/// Parses `args` and runs the selected command. Returns the process exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).target(env_logger::Target::Stderr).try_init();

    let file = match cli.global.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            report_error(&e);
            return ExitCode::from(1);
        }
    };
    let workers = match cli.global.workers.map(|w| w as usize) {
        Some(w) => Ok(Some(w)),
        None => file.get::<usize>("workers"),
    };
    let workers = match workers {
        Ok(Some(0)) => Err(Error::InvalidArgument("workers must be at least 1".into())),
        other => other,
    };
    let pool = workers.and_then(|w| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w.unwrap_or(0))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
    });
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            report_error(&e);
            return ExitCode::from(1);
        }
    };
    match pool.install(|| execute(&cli, &file)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            report_error(&e);
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let f = ConfigFile::parse("# comment\nalpha = 0.5\n\nmethod=mim\n").unwrap();
        assert_eq!(f.get::<f64>("alpha").unwrap(), Some(0.5));
        assert_eq!(f.get::<String>("method").unwrap().as_deref(), Some("mim"));
        assert_eq!(f.get::<usize>("T").unwrap(), None);
        assert!(f.get::<usize>("method").is_err());
        assert!(ConfigFile::parse("novalue").is_err());
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let f = ConfigFile::parse("alpha=0.5").unwrap();
        assert_eq!(pick(Some(0.2), &f, "alpha", 0.1).unwrap(), 0.2);
        assert_eq!(pick(None, &f, "alpha", 0.1).unwrap(), 0.5);
        assert_eq!(pick(None, &ConfigFile::default(), "alpha", 0.1).unwrap(), 0.1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
