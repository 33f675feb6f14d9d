//! Command-line front end: argument definitions and subcommand handlers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use casmi_core::baselines::BaselineKind;
use casmi_core::estimators::{plugin_entropy, turing_missing_mass, zhang_entropy};
use casmi_core::prep::{
    coverage_report, emit, ingest_path, BinningMethod, CoverageFlag, Dataset, IngestOptions,
    NaPolicy,
};
use casmi_core::selector::{extend_with, select, SelectionConfig, SelectionResult, StopRule};
use casmi_core::simlab::{
    generate_dataset, run_entropy_experiment, run_irr_experiment, write_entropy_table,
    write_irr_aggregate, write_irr_runs, IrrExperiment, Method,
};
use casmi_core::tabulate::tabulate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "casmi",
    version,
    about = "Coverage-adjusted mutual information feature selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Screen and greedily select features for an outcome column.
    Select(SelectArgs),
    /// Report the estimated sample coverage of every column.
    Coverage(CoverageArgs),
    /// Report plug-in and bias-corrected entropy of every column.
    Entropy(CoverageArgs),
    /// Entropy-estimator bias experiment on the triangle law.
    SimulateEntropy(SimulateEntropyArgs),
    /// Information-recovery comparison of CASMI against the baselines.
    SimulateIrr(SimulateIrrArgs),
    /// Write one sample of the simulated ten-feature population.
    SimulateData(SimulateDataArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopRuleArg {
    StrictIncrease,
    NonDecrease,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NaPolicyArg {
    NaCategory,
    DropRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BinningArg {
    EqualFrequency,
    EqualWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum BaselineArg {
    Mim,
    Jmi,
    Cmim,
    Mrmr,
    Disr,
    Njmim,
}

impl From<BaselineArg> for BaselineKind {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::Mim => BaselineKind::Mim,
            BaselineArg::Jmi => BaselineKind::Jmi,
            BaselineArg::Cmim => BaselineKind::Cmim,
            BaselineArg::Mrmr => BaselineKind::Mrmr,
            BaselineArg::Disr => BaselineKind::Disr,
            BaselineArg::Njmim => BaselineKind::Njmim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum MethodArg {
    Casmi,
    Mim,
    Jmi,
    Cmim,
    Mrmr,
    Disr,
    Njmim,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        let b = match m {
            MethodArg::Casmi => return Method::Casmi,
            MethodArg::Mim => BaselineArg::Mim,
            MethodArg::Jmi => BaselineArg::Jmi,
            MethodArg::Cmim => BaselineArg::Cmim,
            MethodArg::Mrmr => BaselineArg::Mrmr,
            MethodArg::Disr => BaselineArg::Disr,
            MethodArg::Njmim => BaselineArg::Njmim,
        };
        Method::Baseline(b.into())
    }
}

/// Flags controlling how a delimited file becomes categorical columns.
#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Field delimiter (a single ASCII character).
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Cell values treated as missing (comma-separated; empty string included by default).
    #[arg(long, value_delimiter = ',', default_values_t = vec!["NA".to_string(), String::new()])]
    pub na_tokens: Vec<String>,
    #[arg(long, value_enum, default_value_t = NaPolicyArg::NaCategory)]
    pub na_policy: NaPolicyArg,
    /// Binning of all-numeric columns.
    #[arg(long, value_enum, default_value_t = BinningArg::EqualFrequency)]
    pub binning: BinningArg,
    #[arg(long, default_value_t = 5)]
    pub bins: usize,
    /// Halve the bin count until the binned column's coverage reaches 0.5.
    #[arg(long)]
    pub auto_bins: bool,
    /// Columns to keep categorical even when numeric (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub as_categorical: Vec<String>,
    /// Keep every column categorical.
    #[arg(long)]
    pub all_categorical: bool,
}

impl IngestArgs {
    fn options(&self) -> Result<IngestOptions, CliError> {
        if !self.delimiter.is_ascii() {
            return Err(CliError::Usage(
                "delimiter must be a single ASCII character".into(),
            ));
        }
        if self.bins < 2 {
            return Err(CliError::Usage("--bins must be at least 2".into()));
        }
        Ok(IngestOptions {
            delimiter: self.delimiter as u8,
            na_tokens: self.na_tokens.clone(),
            na_policy: match self.na_policy {
                NaPolicyArg::NaCategory => NaPolicy::NaCategory,
                NaPolicyArg::DropRow => NaPolicy::DropRow,
            },
            binning: match self.binning {
                BinningArg::EqualFrequency => BinningMethod::EqualFrequency,
                BinningArg::EqualWidth => BinningMethod::EqualWidth,
            },
            bins: self.bins,
            auto_bins: self.auto_bins,
            as_categorical: self.as_categorical.clone(),
            all_categorical: self.all_categorical,
        })
    }
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the outcome column.
    #[arg(long)]
    pub outcome: String,
    /// Screening level of the independence test.
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,
    /// Coverage exponent of the score.
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    #[arg(long, value_enum, default_value_t = StopRuleArg::StrictIncrease)]
    pub stop_rule: StopRuleArg,
    /// Desired number of features.
    #[arg(long)]
    pub k: Option<usize>,
    /// Fill up to --k with this baseline instead of continuing the greedy search.
    #[arg(long, value_enum, ignore_case = true, requires = "k")]
    pub extend_with: Option<BaselineArg>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Outcome column to leave out of the report.
    #[arg(long)]
    pub outcome: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub ingest: IngestArgs,
}

#[derive(Debug, Args)]
pub struct SimulateEntropyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 300, 500, 1000, 1500, 2000])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 2022)]
    pub seed: u64,
    /// Output table; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available processors).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateIrrArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![250, 500, 1000, 1500])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    /// Methods to compare (comma-separated); CASMI always runs.
    #[arg(long, value_enum, ignore_case = true, value_delimiter = ',')]
    pub methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 2022)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.10)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    #[arg(long, value_enum, default_value_t = StopRuleArg::StrictIncrease)]
    pub stop_rule: StopRuleArg,
    /// Directory receiving irr_runs.csv and irr_aggregate.csv; the
    /// aggregate goes to standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateDataArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2022)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations (exit 2).
    Usage(String),
    /// Unreadable or unusable data (exit 1).
    Data(casmi_core::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<casmi_core::Error> for CliError {
    fn from(e: casmi_core::Error) -> Self {
        match e {
            casmi_core::Error::Io(io) => CliError::Io(io),
            other => CliError::Data(other),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Select(a) => cmd_select(&a, out),
        Command::Coverage(a) => cmd_coverage(&a, out),
        Command::Entropy(a) => cmd_entropy(&a, out),
        Command::SimulateEntropy(a) => cmd_simulate_entropy(&a, out),
        Command::SimulateIrr(a) => cmd_simulate_irr(&a, out),
        Command::SimulateData(a) => cmd_simulate_data(&a, out),
    }
}

fn stop_rule(s: StopRuleArg) -> StopRule {
    match s {
        StopRuleArg::StrictIncrease => StopRule::StrictIncrease,
        StopRuleArg::NonDecrease => StopRule::NonDecrease,
    }
}

fn selection_config(
    alpha: f64,
    u: f64,
    rule: StopRuleArg,
    k: Option<usize>,
) -> Result<SelectionConfig, CliError> {
    let cfg = SelectionConfig {
        alpha,
        u,
        stop_rule: stop_rule(rule),
        desired_k: k,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load(input: &Path, outcome: Option<&str>, ingest: &IngestArgs) -> Result<Dataset, CliError> {
    Ok(ingest_path(input, outcome, &ingest.options()?)?)
}

fn cmd_select(a: &SelectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    // With --extend-with the greedy search stops naturally and the baseline
    // supplies the remainder.
    let greedy_k = if a.extend_with.is_some() { None } else { a.k };
    let cfg = selection_config(a.alpha, a.u, a.stop_rule, greedy_k)?;
    if a.k == Some(0) {
        return Err(CliError::Usage("--k must be positive".into()));
    }
    let ds = load(&a.input, Some(&a.outcome), &a.ingest)?;
    let features = ds.features();
    let y = ds.outcome()?;
    if let Some(k) = a.k {
        if k > features.len() {
            return Err(CliError::Usage(format!(
                "--k {k} exceeds the {} available features",
                features.len()
            )));
        }
    }
    let result = select(&features, y, &cfg)?;
    let extension = match (a.extend_with, a.k) {
        (Some(kind), Some(k)) if k > result.selected.len() => {
            let full = extend_with(&result.selected, &features, y, k, kind.into())?;
            Some((
                BaselineKind::from(kind),
                full[result.selected.len()..].to_vec(),
            ))
        }
        _ => None,
    };

    match a.format {
        Format::Json => {
            let mut selected = result.selected.clone();
            if let Some((_, extra)) = &extension {
                selected.extend(extra.iter().cloned());
            }
            let report = json!({
                "outcome": a.outcome,
                "n": ds.n_rows(),
                "config": {
                    "alpha": a.alpha,
                    "u": a.u,
                    "stop_rule": cfg.stop_rule,
                    "k": a.k,
                    "extend_with": extension.as_ref().map(|e| e.0.name()),
                },
                "screened_out": result.screened_out,
                "retained": result.retained,
                "casmi_selected": result.selected,
                "extended": extension.as_ref().map(|e| &e.1),
                "selected": selected,
                "score_trace": result.score_trace,
                "final_score": result.final_score(),
                "stop_reason": result.stop_reason,
            });
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Text => {
            write_select_text(out, &a.outcome, ds.n_rows(), &result, extension.as_ref())?
        }
    }
    Ok(())
}

fn write_select_text(
    out: &mut dyn Write,
    outcome: &str,
    n: usize,
    r: &SelectionResult,
    extension: Option<&(BaselineKind, Vec<String>)>,
) -> io::Result<()> {
    writeln!(out, "outcome: {outcome} (n = {n})")?;
    writeln!(out, "screened out ({}):", r.screened_out.len())?;
    for s in &r.screened_out {
        let stat = s
            .statistic
            .map_or("constant".to_string(), |v| format!("chi2 = {v:.4}"));
        writeln!(out, "  {:<20} p = {:.6}  {stat}", s.name, s.p_value)?;
    }
    writeln!(out, "retained ({}):", r.retained.len())?;
    for s in &r.retained {
        writeln!(out, "  {:<20} p = {:.3e}", s.name, s.p_value)?;
    }
    writeln!(out, "score trace:")?;
    for (i, step) in r.score_trace.iter().enumerate() {
        let mark = if step.accepted { "+" } else { "x" };
        writeln!(
            out,
            "  step {} {mark} {:<20} score = {:.6}",
            i + 1,
            step.winner,
            step.score
        )?;
        for c in &step.candidates {
            writeln!(out, "      {:<20} {:.6}", c.name, c.score)?;
        }
    }
    writeln!(out, "selected: {}", r.selected.join(", "))?;
    if let Some((kind, extra)) = extension {
        writeln!(out, "extended with {kind}: {}", extra.join(", "))?;
    }
    writeln!(out, "final score: {:.6}", r.final_score())?;
    writeln!(out, "stop reason: {}", stop_reason_name(r))?;
    Ok(())
}

fn stop_reason_name(r: &SelectionResult) -> String {
    serde_json::to_value(r.stop_reason)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn cmd_coverage(a: &CoverageArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = load(&a.input, a.outcome.as_deref(), &a.ingest)?;
    let report = coverage_report(&ds);
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(
                out,
                "{:<20} {:>8} {:>10}  flag",
                "column", "coverage", "categories"
            )?;
            for e in &report {
                let flag = match e.flag {
                    Some(CoverageFlag::IdLike) => "id_like",
                    Some(CoverageFlag::LowCoverage) => "low_coverage",
                    None => "",
                };
                writeln!(
                    out,
                    "{:<20} {:>8.3} {:>10}  {flag}",
                    e.name, e.coverage, e.categories
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_entropy(a: &CoverageArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ds = load(&a.input, a.outcome.as_deref(), &a.ingest)?;
    let rows: Vec<_> = ds
        .columns()
        .iter()
        .map(|c| {
            let t = tabulate(c);
            json!({
                "name": c.name(),
                "n": t.n(),
                "categories": t.k_effective(),
                "plugin": plugin_entropy(&t).value,
                "zhang": zhang_entropy(&t).value,
                "missing_mass": turing_missing_mass(&t),
            })
        })
        .collect();
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows).map_err(io::Error::from)?;
            writeln!(out)?;
        }
        Format::Text => {
            writeln!(
                out,
                "{:<20} {:>6} {:>10} {:>10} {:>8}",
                "column", "K", "plugin", "zhang", "T1"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:<20} {:>6} {:>10.6} {:>10.6} {:>8.4}",
                    r["name"].as_str().unwrap_or_default(),
                    r["categories"],
                    r["plugin"].as_f64().unwrap_or_default(),
                    r["zhang"].as_f64().unwrap_or_default(),
                    r["missing_mass"].as_f64().unwrap_or_default(),
                )?;
            }
        }
    }
    Ok(())
}

fn check_grid(sizes: &[usize], reps: usize, workers: Option<usize>) -> Result<(), CliError> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(CliError::Usage(
            "--sizes must list positive sample sizes".into(),
        ));
    }
    if reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    if workers == Some(0) {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    Ok(())
}

fn cmd_simulate_entropy(a: &SimulateEntropyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_grid(&a.sizes, a.reps, a.workers)?;
    let rows = run_entropy_experiment(&a.sizes, a.reps, a.seed, a.workers)?;
    match &a.out {
        Some(path) => write_entropy_table(&rows, BufWriter::new(File::create(path)?))?,
        None => write_entropy_table(&rows, &mut *out)?,
    }
    Ok(())
}

fn cmd_simulate_irr(a: &SimulateIrrArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_grid(&a.sizes, a.reps, a.workers)?;
    let config = selection_config(a.alpha, a.u, a.stop_rule, None)?;
    let methods: Vec<Method> = if a.methods.is_empty() {
        Method::all()
    } else {
        a.methods.iter().map(|&m| m.into()).collect()
    };
    let exp = IrrExperiment {
        sizes: a.sizes.clone(),
        reps: a.reps,
        methods,
        config,
        seed: a.seed,
        workers: a.workers,
    };
    let report = run_irr_experiment(&exp)?;
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_irr_runs(
                &report,
                BufWriter::new(File::create(dir.join("irr_runs.csv"))?),
            )?;
            write_irr_aggregate(
                &report,
                BufWriter::new(File::create(dir.join("irr_aggregate.csv"))?),
            )?;
        }
        None => write_irr_aggregate(&report, &mut *out)?,
    }
    Ok(())
}

fn cmd_simulate_data(a: &SimulateDataArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be positive".into()));
    }
    let ds = generate_dataset(a.n, a.seed)?;
    match &a.out {
        Some(path) => emit(&ds, BufWriter::new(File::create(path)?), b',')?,
        None => emit(&ds, &mut *out, b',')?,
    }
    Ok(())
}
