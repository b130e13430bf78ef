//! Evolution of cooperation and defection in anonymous online business games.
//!
//! Players sit on a toroidal grid and play an iterated prisoner's dilemma with
//! each of their eight Moore neighbours. Strategies are 71-bit memory-3
//! chromosomes evolved by a genetic algorithm with linear fitness scaling,
//! roulette selection, single-point crossover and per-bit mutation. Payoffs
//! come from a buyer/seller business game in which the system may compensate
//! the cheated party.

pub mod cli;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod game;
pub mod strategy;

pub use error::{Error, Result};
pub use evolution::{EvolutionConfig, FitnessVector, GenerationStats, Grid, SelectionScope};
pub use experiment::{CaseId, CaseSpec, RunConfig, Summary, TimeSeries};
pub use game::{DilemmaClass, DilemmaKind, MatchResult, PayoffConfig, PayoffMatrix};
pub use strategy::{Action, Chromosome, ClassificationThresholds, JointOutcome, StrategyClass};
