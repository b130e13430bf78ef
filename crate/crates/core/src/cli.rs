//! Command-line front end: argument parsing, the `run`, `validate-payoffs`
//! and `inspect-chromosome` commands, and the CSV/JSON output formats.
//!
//! Settings are layered: built-in defaults, then `--preset`, then a
//! `key=value` config file (`--config`), then flags. The seed falls back to
//! the `DF_SEED` environment variable when neither flag nor file sets it.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::evolution::{GenerationStats, SelectionScope};
use crate::experiment::{
    build_case, run_case, CaseId, CaseOutcome, CaseSpec, RunConfig, Summary, TimeSeries,
};
use crate::game::{classify_business_game, payoff_matrix_from, DilemmaKind};
use crate::strategy::{Action, Chromosome, ClassificationThresholds, JointOutcome};

pub const SEED_ENV: &str = "DF_SEED";

pub const CSV_HEADER: &str =
    "generation,frac_cooperator,frac_defector,frac_top_defector,frac_neutral,fitness_mean,fitness_max,fitness_min";

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text; not a failure.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "defectors",
    version,
    about = "Evolution of defectors in online business games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve populations and write per-generation statistics.
    Run(RunArgs),
    /// Print the payoff matrix and dilemma class of each case.
    ValidatePayoffs {
        #[arg(long, default_value = "all")]
        case: CaseChoice,
    },
    /// Describe a chromosome given as 18 hex digits.
    InspectChromosome { hex: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CaseChoice {
    #[value(name = "I")]
    One,
    #[value(name = "IIA")]
    TwoA,
    #[value(name = "IIB")]
    TwoB,
    #[value(name = "all")]
    All,
}

impl CaseChoice {
    fn cases(self) -> Vec<CaseSpec> {
        let ids: &[CaseId] = match self {
            CaseChoice::One => &[CaseId::CaseI],
            CaseChoice::TwoA => &[CaseId::CaseIIA],
            CaseChoice::TwoB => &[CaseId::CaseIIB],
            CaseChoice::All => &CaseId::PAPER_CASES,
        };
        ids.iter().map(|&id| CaseSpec::new(id)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Selection {
    Global,
    Local,
}

impl From<Selection> for SelectionScope {
    fn from(s: Selection) -> Self {
        match s {
            Selection::Global => SelectionScope::Global,
            Selection::Local => SelectionScope::Local,
        }
    }
}

#[derive(Debug, Default, Args)]
struct RunArgs {
    #[arg(long)]
    case: Option<CaseChoice>,
    /// Grid size as WIDTHxHEIGHT.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    #[arg(long)]
    generations: Option<usize>,
    /// Rounds per neighbour pairing per generation.
    #[arg(long)]
    rounds: Option<u32>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    crossover: Option<f64>,
    /// Per-bit mutation probability.
    #[arg(long)]
    mutation: Option<f64>,
    /// Linear scaling multiple.
    #[arg(long)]
    scaling: Option<f64>,
    #[arg(long)]
    selection: Option<Selection>,
    #[arg(long = "coop-share")]
    coop_share: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    preset: Option<Preset>,
    /// key=value settings file, overridden by flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let dim = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((dim(w)?, dim(h)?))
}

/// A fully resolved command.
#[derive(Debug, Clone, PartialEq)]
pub enum CliConfig {
    Run(RunRequest),
    ValidatePayoffs { cases: Vec<CaseSpec> },
    InspectChromosome { chromosome: Chromosome },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRequest {
    pub cases: Vec<CaseSpec>,
    pub config: RunConfig,
    pub out_dir: PathBuf,
}

/// Parse `argv` (program name first). `env_seed` is the value of `DF_SEED`, if any.
pub fn parse_args<I, T>(argv: I, env_seed: Option<&str>) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;
    match cli.command {
        Command::Run(args) => resolve_run(args, env_seed).map(CliConfig::Run),
        Command::ValidatePayoffs { case } => Ok(CliConfig::ValidatePayoffs {
            cases: case.cases(),
        }),
        Command::InspectChromosome { hex } => Chromosome::decode_hex(hex.trim())
            .map(|chromosome| CliConfig::InspectChromosome { chromosome })
            .map_err(|e| usage(e.to_string())),
    }
}

fn resolve_run(flags: RunArgs, env_seed: Option<&str>) -> Result<RunRequest, CliError> {
    let file = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => RunArgs::default(),
    };

    let mut config = match flags.preset.or(file.preset) {
        Some(Preset::Desk) => RunConfig::desk(),
        None => RunConfig::default(),
    };
    let env_seed = env_seed
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|e| usage(format!("{SEED_ENV}={s:?}: {e}")))
        })
        .transpose()?;

    for layer in [&file, &flags] {
        if let Some((w, h)) = layer.grid {
            config.grid_width = w;
            config.grid_height = h;
        }
        if let Some(v) = layer.generations {
            config.generations = v;
        }
        if let Some(v) = layer.rounds {
            config.evolution.rounds_per_pair = v;
        }
        if let Some(v) = layer.runs {
            config.runs = v;
        }
        if let Some(v) = layer.crossover {
            config.evolution.crossover_probability = v;
        }
        if let Some(v) = layer.mutation {
            config.evolution.mutation_probability = v;
        }
        if let Some(v) = layer.scaling {
            config.evolution.scaling_multiple = v;
        }
        if let Some(v) = layer.selection {
            config.evolution.selection_scope = v.into();
        }
        if let Some(v) = layer.coop_share {
            config.initial_cooperator_share = v;
        }
    }
    config.base_seed = flags.seed.or(file.seed).or(env_seed).unwrap_or(0);
    config.validate().map_err(|e| usage(e.to_string()))?;

    let cases = flags.case.or(file.case).unwrap_or(CaseChoice::All).cases();
    let out_dir = flags
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("results"));
    Ok(RunRequest {
        cases,
        config,
        out_dir,
    })
}

/// Flat `key=value` lines; keys are the long flag names. `#` starts a comment.
fn parse_config_file(text: &str) -> Result<RunArgs, CliError> {
    let mut args = RunArgs::default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |e: String| usage(format!("config line {}: {key}: {e}", n + 1));
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        match key {
            "case" => args.case = Some(CaseChoice::from_str(value, false).map_err(bad)?),
            "grid" => args.grid = Some(parse_grid(value).map_err(bad)?),
            "generations" => args.generations = Some(num(value).map_err(bad)?),
            "rounds" => args.rounds = Some(num(value).map_err(bad)?),
            "runs" => args.runs = Some(num(value).map_err(bad)?),
            "seed" => args.seed = Some(num(value).map_err(bad)?),
            "crossover" => args.crossover = Some(num(value).map_err(bad)?),
            "mutation" => args.mutation = Some(num(value).map_err(bad)?),
            "scaling" => args.scaling = Some(num(value).map_err(bad)?),
            "selection" => args.selection = Some(Selection::from_str(value, true).map_err(bad)?),
            "coop-share" => args.coop_share = Some(num(value).map_err(bad)?),
            "out" => args.out = Some(PathBuf::from(value)),
            "preset" => args.preset = Some(Preset::from_str(value, true).map_err(bad)?),
            other => {
                return Err(usage(format!(
                    "config line {}: unknown key {other:?}",
                    n + 1
                )))
            }
        }
    }
    Ok(args)
}

/// One CSV row per generation, fixed six decimals, LF endings.
pub fn format_csv(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(80 * (series.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &series.0 {
        let GenerationStats {
            generation,
            fraction_cooperator,
            fraction_defector,
            fraction_top_defector,
            fraction_neutral,
            fitness_mean,
            fitness_max,
            fitness_min,
        } = *s;
        writeln!(
            out,
            "{generation},{fraction_cooperator:.6},{fraction_defector:.6},{fraction_top_defector:.6},{fraction_neutral:.6},{fitness_mean:.6},{fitness_max:.6},{fitness_min:.6}"
        )
        .expect("writing to a String");
    }
    out
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    config: &'a RunConfig,
    cases: Vec<&'a Summary>,
    /// Case labels by descending peak defector share.
    peak_defector_order: Vec<String>,
    /// Case labels by descending peak top-defector share.
    peak_top_defector_order: Vec<String>,
}

fn order_by(summaries: &[&Summary], key: fn(&Summary) -> f64) -> Vec<String> {
    let mut sorted = summaries.to_vec();
    sorted.sort_by(|a, b| key(b).total_cmp(&key(a)));
    sorted.into_iter().map(|s| s.case.clone()).collect()
}

fn case_file(dir: &Path, case: CaseId, suffix: &str) -> PathBuf {
    dir.join(format!("{case}_{suffix}"))
}

/// Run every requested case and write its files. Returns the written paths.
pub fn cmd_run(req: &RunRequest) -> Result<Vec<PathBuf>, CliError> {
    let outcomes = req
        .cases
        .iter()
        .map(|case| run_case(case, &req.config))
        .collect::<crate::Result<Vec<CaseOutcome>>>()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut written = Vec::new();
    write_outputs(req, &outcomes, &mut written).map_err(|e| {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        CliError::Runtime(format!(
            "cannot write results to {}: {e}",
            req.out_dir.display()
        ))
    })?;
    Ok(written)
}

fn write_outputs(
    req: &RunRequest,
    outcomes: &[CaseOutcome],
    written: &mut Vec<PathBuf>,
) -> io::Result<()> {
    fs::create_dir_all(&req.out_dir)?;
    let mut put = |path: PathBuf, contents: String| -> io::Result<()> {
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    for outcome in outcomes {
        let id = outcome.case.id;
        for (run, series) in outcome.runs.iter().enumerate() {
            put(
                case_file(&req.out_dir, id, &format!("run{run}.csv")),
                format_csv(series),
            )?;
        }
        put(
            case_file(&req.out_dir, id, "avg.csv"),
            format_csv(&outcome.average),
        )?;
        put(
            case_file(&req.out_dir, id, "summary.json"),
            to_json(&outcome.summary)?,
        )?;
    }
    let summaries: Vec<&Summary> = outcomes.iter().map(|o| &o.summary).collect();
    let report = RunReport {
        config: &req.config,
        peak_defector_order: order_by(&summaries, |s| s.peak_defector),
        peak_top_defector_order: order_by(&summaries, |s| s.peak_top_defector),
        cases: summaries,
    };
    put(req.out_dir.join("summary.json"), to_json(&report)?)
}

fn to_json<T: Serialize>(value: &T) -> io::Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    Ok(text)
}

/// Payoffs and dilemma class of each case, one line per case.
pub fn cmd_validate_payoffs(cases: &[CaseSpec]) -> Result<String, CliError> {
    let mut out = String::new();
    for case in cases {
        let cfg = build_case(case).map_err(|e| usage(e.to_string()))?;
        let m = payoff_matrix_from(&cfg);
        let class = classify_business_game(&cfg);
        let iterated = if class.iterated_condition_holds {
            "holds"
        } else if 2 * m.reward == m.temptation + m.sucker {
            "fails (equality)"
        } else {
            "fails"
        };
        let kind = match class.kind {
            DilemmaKind::None => "No dilemma".to_string(),
            k => format!("{k} dilemma"),
        };
        writeln!(
            out,
            "Case {}: T={} R={} P={} S={} (delta={}); {kind}; 2R>T+S {iterated}",
            case.id.label(),
            m.temptation,
            m.reward,
            m.punishment,
            m.sucker,
            cfg.compensation
        )
        .expect("writing to a String");
    }
    Ok(out)
}

/// Class, cooperation share and opening behaviour of a chromosome.
pub fn cmd_inspect_chromosome(c: Chromosome) -> String {
    let class = c.classify(&ClassificationThresholds::default());
    let reply = |history: &[Action]| -> char {
        let h: Vec<JointOutcome> = history
            .iter()
            .map(|&opp| JointOutcome::new(Action::Cooperate, opp))
            .collect();
        c.decide(&h).expect("at most two rounds").letter()
    };
    use Action::{Cooperate as C, Defect as D};
    let mut out = String::new();
    writeln!(out, "chromosome={}", c.encode_hex()).unwrap();
    writeln!(
        out,
        "class={class}, fraction={:.3}",
        c.cooperation_fraction()
    )
    .unwrap();
    writeln!(out, "opening move: {}", reply(&[])).unwrap();
    writeln!(
        out,
        "second move after opponent C: {}, D: {}",
        reply(&[C]),
        reply(&[D])
    )
    .unwrap();
    writeln!(
        out,
        "third move after opponent CC: {}, CD: {}, DC: {}, DD: {}",
        reply(&[C, C]),
        reply(&[C, D]),
        reply(&[D, C]),
        reply(&[D, D])
    )
    .unwrap();
    out
}

/// Entry point shared by the binary and tests; returns the exit status.
pub fn main_with<I, T>(argv: I, env_seed: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_args(argv, env_seed).and_then(|cfg| match cfg {
        CliConfig::Run(req) => cmd_run(&req).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
        CliConfig::ValidatePayoffs { cases } => cmd_validate_payoffs(&cases).map(|r| print!("{r}")),
        CliConfig::InspectChromosome { chromosome } => {
            print!("{}", cmd_inspect_chromosome(chromosome));
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Info(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
