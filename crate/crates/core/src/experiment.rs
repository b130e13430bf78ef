//! Payoff cases, population set-up, repeated runs and their summaries.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::evolution::{
    evaluate_fitness, generation_stats, next_generation, EvolutionConfig, GenerationStats, Grid,
};
use crate::game::{payoff_matrix_from, Currency, PayoffConfig};
use crate::strategy::{sample_class_member, ClassificationThresholds, StrategyClass};

/// The generator behind every run.
pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// No compensation.
    CaseI,
    /// Half the loss compensated.
    CaseIIA,
    /// Full loss compensated.
    CaseIIB,
    Custom,
}

impl CaseId {
    pub const PAPER_CASES: [CaseId; 3] = [CaseId::CaseI, CaseId::CaseIIA, CaseId::CaseIIB];

    /// Short label used in file names and reports: `I`, `IIA`, `IIB`, `custom`.
    pub fn label(self) -> &'static str {
        match self {
            CaseId::CaseI => "I",
            CaseId::CaseIIA => "IIA",
            CaseId::CaseIIB => "IIB",
            CaseId::Custom => "custom",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case{}", self.label())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(CaseId::CaseI),
            "IIA" | "iia" | "2a" => Ok(CaseId::CaseIIA),
            "IIB" | "iib" | "2b" => Ok(CaseId::CaseIIB),
            "custom" => Ok(CaseId::Custom),
            other => Err(Error::Config(format!("unknown case {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub id: CaseId,
    pub reward_value: Currency,
    /// Required for `Custom`, ignored otherwise.
    pub compensation: Option<Currency>,
}

impl CaseSpec {
    pub fn new(id: CaseId) -> Self {
        CaseSpec {
            id,
            reward_value: 10,
            compensation: None,
        }
    }

    pub fn custom(reward_value: Currency, compensation: Currency) -> Self {
        CaseSpec {
            id: CaseId::Custom,
            reward_value,
            compensation: Some(compensation),
        }
    }
}

pub fn build_case(spec: &CaseSpec) -> Result<PayoffConfig> {
    let r = spec.reward_value;
    let compensation = match spec.id {
        CaseId::CaseI => 0,
        CaseId::CaseIIA => {
            if r % 2 != 0 {
                return Err(Error::Config(format!(
                    "half compensation of an odd reward {r} is not a whole amount"
                )));
            }
            r / 2
        }
        CaseId::CaseIIB => r,
        CaseId::Custom => spec
            .compensation
            .ok_or_else(|| Error::Config("custom case needs an explicit compensation".into()))?,
    };
    PayoffConfig::new(r, compensation)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    pub generations: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub evolution: EvolutionConfig,
    pub thresholds: ClassificationThresholds,
    pub initial_cooperator_share: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_width: 50,
            grid_height: 50,
            generations: 1000,
            runs: 5,
            base_seed: 0,
            evolution: EvolutionConfig::default(),
            thresholds: ClassificationThresholds::default(),
            initial_cooperator_share: 0.80,
        }
    }
}

impl RunConfig {
    /// 20x20 grid, 300 generations, 50 rounds per pair, 5 runs.
    pub fn desk() -> Self {
        let mut cfg = RunConfig {
            grid_width: 20,
            grid_height: 20,
            generations: 300,
            ..RunConfig::default()
        };
        cfg.evolution.rounds_per_pair = 50;
        cfg
    }

    pub fn population(&self) -> usize {
        self.grid_width * self.grid_height
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_width < 3 || self.grid_height < 3 {
            return Err(Error::Config(format!(
                "grid must be at least 3x3, got {}x{}",
                self.grid_width, self.grid_height
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("need at least one run".into()));
        }
        if !(0.0..=1.0).contains(&self.initial_cooperator_share) {
            return Err(Error::Config(format!(
                "initial cooperator share must be in [0, 1], got {}",
                self.initial_cooperator_share
            )));
        }
        self.evolution.validate()?;
        self.thresholds.validate()
    }

    pub fn seed_for_run(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }
}

/// A cooperator share of the cells, chosen by a seeded shuffle, gets
/// cooperator-class strategies and the rest defector-class ones.
pub fn init_population(rng: &mut SimRng, cfg: &RunConfig) -> Result<Grid> {
    cfg.validate()?;
    let n = cfg.population();
    let cooperators = (cfg.initial_cooperator_share * n as f64).round() as usize;
    let mut classes: Vec<StrategyClass> = (0..n)
        .map(|i| {
            if i < cooperators {
                StrategyClass::Cooperator
            } else {
                StrategyClass::Defector
            }
        })
        .collect();
    classes.shuffle(rng);
    let cells = classes
        .into_iter()
        .map(|class| sample_class_member(rng, class, &cfg.thresholds))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(cfg.grid_width, cfg.grid_height, cells)
}

/// Per-generation statistics, generation 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries(pub Vec<GenerationStats>);

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn defector(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|s| s.fraction_defector)
    }
}

/// Evolve one population for `cfg.generations` generations.
pub fn run_simulation(case: &CaseSpec, cfg: &RunConfig, seed: u64) -> Result<TimeSeries> {
    cfg.validate()?;
    let matrix = payoff_matrix_from(&build_case(case)?);
    let mut rng = SimRng::seed_from_u64(seed);
    let mut grid = init_population(&mut rng, cfg)?;
    let mut series = Vec::with_capacity(cfg.generations + 1);
    for generation in 0..=cfg.generations {
        let fitness = evaluate_fitness(&grid, &cfg.evolution, &matrix)?;
        series.push(generation_stats(
            &grid,
            &fitness,
            &cfg.thresholds,
            generation,
        )?);
        if generation < cfg.generations {
            grid = next_generation(&grid, &fitness, &cfg.evolution, &mut rng)?;
        }
    }
    Ok(TimeSeries(series))
}

/// Element-wise mean of equally long series.
pub fn average_runs(series: &[TimeSeries]) -> Result<TimeSeries> {
    let Some(first) = series.first() else {
        return contract("nothing to average");
    };
    if series.iter().any(|s| s.len() != first.len()) {
        return contract("cannot average series of different lengths");
    }
    let k = series.len() as f64;
    let averaged = (0..first.len())
        .map(|g| {
            let mean = |field: fn(&GenerationStats) -> f64| {
                series.iter().map(|s| field(&s.0[g])).sum::<f64>() / k
            };
            GenerationStats {
                generation: first.0[g].generation,
                fraction_cooperator: mean(|s| s.fraction_cooperator),
                fraction_defector: mean(|s| s.fraction_defector),
                fraction_top_defector: mean(|s| s.fraction_top_defector),
                fraction_neutral: mean(|s| s.fraction_neutral),
                fitness_mean: mean(|s| s.fitness_mean),
                fitness_max: mean(|s| s.fitness_max),
                fitness_min: mean(|s| s.fitness_min),
            }
        })
        .collect();
    Ok(TimeSeries(averaged))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakField {
    Defector,
    TopDefector,
}

/// Largest value of `field` and the earliest generation reaching it.
pub fn peak(series: &TimeSeries, field: PeakField) -> Result<(f64, usize)> {
    if series.is_empty() {
        return contract("peak of an empty series");
    }
    let value = |s: &GenerationStats| match field {
        PeakField::Defector => s.fraction_defector,
        PeakField::TopDefector => s.fraction_top_defector,
    };
    let mut best = (value(&series.0[0]), series.0[0].generation);
    for s in &series.0[1..] {
        if value(s) > best.0 {
            best = (value(s), s.generation);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub case: String,
    pub runs: usize,
    pub peak_defector: f64,
    pub peak_defector_generation: usize,
    pub peak_top_defector: f64,
    pub peak_top_defector_generation: usize,
    /// Mean defector share over the last tenth of the series (at least one entry).
    pub final_window_defector_mean: f64,
}

pub fn summarize(case: CaseId, runs: usize, averaged: &TimeSeries) -> Result<Summary> {
    let (peak_defector, peak_defector_generation) = peak(averaged, PeakField::Defector)?;
    let (peak_top_defector, peak_top_defector_generation) = peak(averaged, PeakField::TopDefector)?;
    let window = (averaged.len() / 10).max(1);
    let final_window_defector_mean = averaged
        .defector()
        .skip(averaged.len() - window)
        .sum::<f64>()
        / window as f64;
    Ok(Summary {
        case: case.label().to_string(),
        runs,
        peak_defector,
        peak_defector_generation,
        peak_top_defector,
        peak_top_defector_generation,
        final_window_defector_mean,
    })
}

/// All runs of one case, their average and its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub case: CaseSpec,
    pub runs: Vec<TimeSeries>,
    pub average: TimeSeries,
    pub summary: Summary,
}

/// Run seeds `base_seed .. base_seed + runs` of a case; runs are independent.
pub fn run_case(case: &CaseSpec, cfg: &RunConfig) -> Result<CaseOutcome> {
    cfg.validate()?;
    let runs = (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_simulation(case, cfg, cfg.seed_for_run(run)))
        .collect::<Result<Vec<_>>>()?;
    let average = average_runs(&runs)?;
    let summary = summarize(case.id, runs.len(), &average)?;
    Ok(CaseOutcome {
        case: *case,
        runs,
        average,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(generation: usize, defector: f64) -> GenerationStats {
        GenerationStats {
            generation,
            fraction_cooperator: 1.0 - defector,
            fraction_defector: defector,
            fraction_top_defector: defector / 2.0,
            fraction_neutral: 0.0,
            fitness_mean: 1.0,
            fitness_max: 2.0,
            fitness_min: 0.0,
        }
    }

    fn series(values: &[f64]) -> TimeSeries {
        TimeSeries(
            values
                .iter()
                .enumerate()
                .map(|(g, &v)| stats(g, v))
                .collect(),
        )
    }

    fn tiny() -> RunConfig {
        let mut cfg = RunConfig {
            grid_width: 6,
            grid_height: 5,
            generations: 4,
            runs: 2,
            ..RunConfig::default()
        };
        cfg.evolution.rounds_per_pair = 12;
        cfg
    }

    #[test]
    fn cases() {
        let of = |id| build_case(&CaseSpec::new(id)).unwrap();
        assert_eq!(of(CaseId::CaseI), PayoffConfig::new(10, 0).unwrap());
        assert_eq!(of(CaseId::CaseIIA).compensation, 5);
        assert_eq!(of(CaseId::CaseIIB).compensation, 10);
        assert!(build_case(&CaseSpec::new(CaseId::Custom)).is_err());
        assert_eq!(
            build_case(&CaseSpec::custom(10, 3)).unwrap().compensation,
            3
        );
        assert!(build_case(&CaseSpec {
            reward_value: 7,
            ..CaseSpec::new(CaseId::CaseIIA)
        })
        .is_err());
        assert_eq!("IIA".parse::<CaseId>().unwrap(), CaseId::CaseIIA);
        assert!("III".parse::<CaseId>().is_err());
    }

    #[test]
    fn default_population_split() {
        let cfg = RunConfig::default();
        let grid = init_population(&mut SimRng::seed_from_u64(1), &cfg).unwrap();
        let t = cfg.thresholds;
        let coop = grid
            .cells()
            .iter()
            .filter(|c| c.classify(&t) == StrategyClass::Cooperator)
            .count();
        let def = grid
            .cells()
            .iter()
            .filter(|c| c.classify(&t).is_defector())
            .count();
        assert_eq!((coop, def), (2000, 500));
    }

    #[test]
    fn all_cooperators_when_share_is_one() {
        let cfg = RunConfig {
            initial_cooperator_share: 1.0,
            ..tiny()
        };
        let grid = init_population(&mut SimRng::seed_from_u64(1), &cfg).unwrap();
        let t = cfg.thresholds;
        assert!(grid
            .cells()
            .iter()
            .all(|c| c.classify(&t) == StrategyClass::Cooperator));
    }

    #[test]
    fn simulation_lengths_and_determinism() {
        let case = CaseSpec::new(CaseId::CaseI);
        let cfg = tiny();
        let a = run_simulation(&case, &cfg, 3).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a, run_simulation(&case, &cfg, 3).unwrap());
        assert_eq!(a.0[0].fraction_defector, 6.0 / 30.0);
        let zero = RunConfig {
            generations: 0,
            ..cfg
        };
        assert_eq!(run_simulation(&case, &zero, 3).unwrap().len(), 1);
    }

    #[test]
    fn averaging() {
        let one = series(&[0.2, 0.4]);
        assert_eq!(average_runs(std::slice::from_ref(&one)).unwrap(), one);
        let two = series(&[0.4, 0.2]);
        let avg = average_runs(&[one.clone(), two.clone()]).unwrap();
        assert!((avg.0[0].fraction_defector - 0.3).abs() < 1e-15);
        assert_eq!(avg, average_runs(&[two, one.clone()]).unwrap());
        assert!(average_runs(&[one, series(&[0.1])]).is_err());
        assert!(average_runs(&[]).is_err());
    }

    #[test]
    fn peaks() {
        assert_eq!(
            peak(&series(&[0.2, 0.5, 0.74, 0.6]), PeakField::Defector).unwrap(),
            (0.74, 2)
        );
        assert_eq!(
            peak(&series(&[0.3, 0.3]), PeakField::Defector).unwrap(),
            (0.3, 0)
        );
        assert_eq!(
            peak(&series(&[0.2, 0.5]), PeakField::TopDefector).unwrap(),
            (0.25, 1)
        );
        assert!(peak(&TimeSeries(vec![]), PeakField::Defector).is_err());
    }

    #[test]
    fn summary_window() {
        let values: Vec<f64> = (0..20).map(|g| g as f64 / 100.0).collect();
        let s = summarize(CaseId::CaseI, 1, &series(&values)).unwrap();
        assert_eq!(s.peak_defector_generation, 19);
        assert!((s.final_window_defector_mean - 0.185).abs() < 1e-12);
    }

    #[test]
    fn case_runs_are_seed_isolated() {
        let case = CaseSpec::new(CaseId::CaseIIA);
        let cfg = tiny();
        let outcome = run_case(&case, &cfg).unwrap();
        assert_eq!(outcome.runs.len(), 2);
        assert_eq!(
            outcome.runs[1],
            run_simulation(&case, &cfg, cfg.base_seed + 1).unwrap()
        );
        let (avg_peak, _) = peak(&outcome.average, PeakField::Defector).unwrap();
        let run_max = outcome
            .runs
            .iter()
            .map(|r| peak(r, PeakField::Defector).unwrap().0)
            .fold(f64::MIN, f64::max);
        assert!(avg_peak <= run_max);
    }
}
