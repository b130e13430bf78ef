//! The spatial population and its genetic algorithm.
//!
//! One generation is: every Moore-adjacent pair plays a single match, each
//! player's fitness is the sum of its eight match totals, fitness is linearly
//! scaled, and a new grid is bred by roulette selection, single-point
//! crossover and per-bit mutation. Match play never touches the rng, so the
//! random stream of a generation is consumed only while breeding.

mod grid;
mod operators;
mod scaling;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::game::{play_match, Currency, PayoffMatrix};
use crate::strategy::{ClassificationThresholds, StrategyClass};

pub use grid::Grid;
pub use operators::{crossover, crossover_at, mutate};
pub use scaling::{linear_scale, select_parent, Roulette};

/// Where parents for a cell's offspring are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionScope {
    /// Roulette over the whole population; offspring fill the grid row-major.
    Global,
    /// Roulette over the 3x3 block around each cell; one offspring per cell.
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub rounds_per_pair: u32,
    pub crossover_probability: f64,
    pub mutation_probability: f64,
    pub scaling_multiple: f64,
    pub selection_scope: SelectionScope,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            rounds_per_pair: 200,
            crossover_probability: 0.98,
            mutation_probability: 0.01,
            scaling_multiple: 2.0,
            selection_scope: SelectionScope::Global,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let probability = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} probability must be in [0, 1], got {p}"
                )))
            }
        };
        probability("crossover", self.crossover_probability)?;
        probability("mutation", self.mutation_probability)?;
        if !(self.scaling_multiple > 1.0 && self.scaling_multiple.is_finite()) {
            return Err(Error::Config(format!(
                "scaling multiple must be a finite number above 1, got {}",
                self.scaling_multiple
            )));
        }
        if self.rounds_per_pair == 0 {
            return Err(Error::Config("rounds per pair must be at least 1".into()));
        }
        Ok(())
    }
}

/// Raw payoff totals per player, indexed like the grid cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FitnessVector(pub Vec<Currency>);

impl FitnessVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> Currency {
        self.0.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| v as f64).collect()
    }
}

/// Play every neighbour pair once and sum each player's payoffs.
pub fn evaluate_fitness(
    grid: &Grid,
    cfg: &EvolutionConfig,
    m: &PayoffMatrix,
) -> Result<FitnessVector> {
    if cfg.rounds_per_pair == 0 {
        return contract("a match needs at least one round");
    }
    let cells = grid.cells();
    let edges = grid.edges();
    let results = edges
        .par_iter()
        .map(|&(a, b)| play_match(cells[a], cells[b], cfg.rounds_per_pair, m))
        .collect::<Result<Vec<_>>>()?;
    let mut fitness = vec![0; grid.len()];
    for (&(a, b), r) in edges.iter().zip(&results) {
        fitness[a] += r.payoff_a;
        fitness[b] += r.payoff_b;
    }
    Ok(FitnessVector(fitness))
}

/// Breed the next grid.
///
/// Random draws per offspring pair (Global) or per cell (Local), in order:
/// parent one, parent two, crossover decision and cut, then mutation of the
/// first child and (Global only) the second child, locus by locus.
pub fn next_generation<R: Rng + ?Sized>(
    grid: &Grid,
    fitness: &FitnessVector,
    cfg: &EvolutionConfig,
    rng: &mut R,
) -> Result<Grid> {
    if grid.len() != fitness.len() {
        return contract(format!(
            "fitness has {} entries for {} cells",
            fitness.len(),
            grid.len()
        ));
    }
    let scaled = linear_scale(&fitness.as_f64(), cfg.scaling_multiple)?;
    let cells = grid.cells();
    let n = grid.len();
    let pc = cfg.crossover_probability;
    let pm = cfg.mutation_probability;
    let mut offspring = Vec::with_capacity(n);

    match cfg.selection_scope {
        SelectionScope::Global => {
            let wheel = Roulette::new(&scaled)?;
            while offspring.len() < n {
                let p1 = cells[wheel.spin(rng)];
                let p2 = cells[wheel.spin(rng)];
                let (c1, c2) = crossover(p1, p2, rng, pc);
                let c1 = mutate(c1, rng, pm);
                let c2 = mutate(c2, rng, pm);
                offspring.push(c1);
                if offspring.len() < n {
                    offspring.push(c2);
                }
            }
        }
        SelectionScope::Local => {
            for cell in 0..n {
                let block = grid.neighborhood(cell);
                let weights = block.map(|i| scaled[i]);
                let wheel = Roulette::new(&weights)?;
                let p1 = cells[block[wheel.spin(rng)]];
                let p2 = cells[block[wheel.spin(rng)]];
                let (child, _) = crossover(p1, p2, rng, pc);
                offspring.push(mutate(child, rng, pm));
            }
        }
    }
    Grid::new(grid.width(), grid.height(), offspring)
}

/// Class shares and fitness summary of one generation.
///
/// Top defectors are counted inside `fraction_defector` and also reported on
/// their own, so cooperator + defector + neutral = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub fraction_cooperator: f64,
    pub fraction_defector: f64,
    pub fraction_top_defector: f64,
    pub fraction_neutral: f64,
    pub fitness_mean: f64,
    pub fitness_max: f64,
    pub fitness_min: f64,
}

pub fn generation_stats(
    grid: &Grid,
    fitness: &FitnessVector,
    thresholds: &ClassificationThresholds,
    generation: usize,
) -> Result<GenerationStats> {
    if grid.len() != fitness.len() || grid.is_empty() {
        return contract(format!(
            "fitness has {} entries for {} cells",
            fitness.len(),
            grid.len()
        ));
    }
    let mut counts = [0usize; 4];
    for c in grid.cells() {
        let slot = match c.classify(thresholds) {
            StrategyClass::Cooperator => 0,
            StrategyClass::Defector => 1,
            StrategyClass::TopDefector => 2,
            StrategyClass::Neutral => 3,
        };
        counts[slot] += 1;
    }
    let n = grid.len() as f64;
    let share = |k: usize| k as f64 / n;
    Ok(GenerationStats {
        generation,
        fraction_cooperator: share(counts[0]),
        fraction_defector: share(counts[1] + counts[2]),
        fraction_top_defector: share(counts[2]),
        fraction_neutral: share(counts[3]),
        fitness_mean: fitness.total() as f64 / n,
        fitness_max: *fitness.0.iter().max().expect("non-empty") as f64,
        fitness_min: *fitness.0.iter().min().expect("non-empty") as f64,
    })
}
