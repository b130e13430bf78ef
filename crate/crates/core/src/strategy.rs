//! Memory-3 strategy chromosomes.
//!
//! A chromosome is 71 loci, each holding an action (`0` = cooperate,
//! `1` = defect):
//!
//! * loci `0..64` form the history table. A three-round history of joint
//!   outcomes `h[0], h[1], h[2]` (oldest first) selects locus
//!   `16·code(h[0]) + 4·code(h[1]) + code(h[2])`, where
//!   `code = 2·own + opponent` so that CC=0, CD=1, DC=2, DD=3.
//! * loci `64..71` hold the opening moves, conditioned only on what the
//!   opponent did so far: locus 64 is the first move, loci 65/66 the second
//!   move after an opponent C/D, loci 67..=70 the third move after opponent
//!   CC, CD, DC, DD.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

pub const CHROMOSOME_LEN: usize = 71;
pub const TABLE_LEN: usize = 64;
pub const FIRST_MOVE_LOCUS: usize = 64;
pub const SECOND_MOVE_LOCUS: usize = 65;
pub const THIRD_MOVE_LOCUS: usize = 67;

/// Number of hex digits in the text form (72 bits, top bit is padding).
pub const HEX_LEN: usize = 18;

const LOCI_MASK: u128 = (1u128 << CHROMOSOME_LEN) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Cooperate,
    Defect,
}

impl Action {
    #[inline]
    pub fn bit(self) -> u8 {
        match self {
            Action::Cooperate => 0,
            Action::Defect => 1,
        }
    }

    #[inline]
    pub fn from_bit(bit: u8) -> Action {
        if bit & 1 == 0 {
            Action::Cooperate
        } else {
            Action::Defect
        }
    }

    pub fn flip(self) -> Action {
        Action::from_bit(self.bit() ^ 1)
    }

    pub fn letter(self) -> char {
        match self {
            Action::Cooperate => 'C',
            Action::Defect => 'D',
        }
    }
}

/// One round of a pairing, seen from one player's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointOutcome {
    pub own: Action,
    pub opponent: Action,
}

impl JointOutcome {
    pub fn new(own: Action, opponent: Action) -> Self {
        JointOutcome { own, opponent }
    }

    /// CC=0, CD=1, DC=2, DD=3.
    #[inline]
    pub fn code(self) -> usize {
        (2 * self.own.bit() + self.opponent.bit()) as usize
    }

    /// The same round from the opponent's side.
    pub fn mirrored(self) -> Self {
        JointOutcome::new(self.opponent, self.own)
    }
}

/// Index into the 64-entry history table for exactly three rounds, oldest first.
pub fn history_index(history: &[JointOutcome]) -> Result<usize> {
    if history.len() != 3 {
        return contract(format!(
            "history_index needs exactly 3 rounds, got {}",
            history.len()
        ));
    }
    Ok(history.iter().fold(0, |acc, h| acc * 4 + h.code()))
}

/// A 71-locus memory-3 strategy. Locus `i` is stored in bit `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Chromosome(u128);

impl Chromosome {
    pub fn all_cooperate() -> Self {
        Chromosome(0)
    }

    pub fn all_defect() -> Self {
        Chromosome(LOCI_MASK)
    }

    /// Build from raw bits; bit `i` is locus `i`. Bits above locus 70 must be clear.
    pub fn from_bits(bits: u128) -> Result<Self> {
        if bits & !LOCI_MASK != 0 {
            return contract("chromosome bits beyond locus 70 are set");
        }
        Ok(Chromosome(bits))
    }

    pub fn from_actions(actions: &[Action]) -> Result<Self> {
        if actions.len() != CHROMOSOME_LEN {
            return contract(format!(
                "chromosome needs {CHROMOSOME_LEN} loci, got {}",
                actions.len()
            ));
        }
        let bits = actions
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, a)| acc | (u128::from(a.bit()) << i));
        Ok(Chromosome(bits))
    }

    /// Tit-for-tat: cooperate first, then copy the opponent's last move.
    pub fn tit_for_tat() -> Self {
        let mut c = Chromosome::all_cooperate();
        for index in 0..TABLE_LEN {
            // most recent round is the low base-4 digit; its low bit is the opponent move
            c = c.with_locus(index, Action::from_bit((index & 1) as u8));
        }
        c = c.with_locus(SECOND_MOVE_LOCUS + 1, Action::Defect);
        for opp in 0..4 {
            c = c.with_locus(THIRD_MOVE_LOCUS + opp, Action::from_bit((opp & 1) as u8));
        }
        c
    }

    #[inline]
    pub fn bits(self) -> u128 {
        self.0
    }

    #[inline]
    pub fn locus(self, index: usize) -> Action {
        debug_assert!(index < CHROMOSOME_LEN);
        Action::from_bit(((self.0 >> index) & 1) as u8)
    }

    pub fn with_locus(self, index: usize, action: Action) -> Self {
        assert!(index < CHROMOSOME_LEN, "locus {index} out of range");
        let cleared = self.0 & !(1u128 << index);
        Chromosome(cleared | (u128::from(action.bit()) << index))
    }

    pub fn actions(self) -> impl Iterator<Item = Action> {
        (0..CHROMOSOME_LEN).map(move |i| self.locus(i))
    }

    pub fn defect_count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn cooperate_count(self) -> u32 {
        CHROMOSOME_LEN as u32 - self.defect_count()
    }

    /// Share of all 71 loci that say cooperate.
    pub fn cooperation_fraction(self) -> f64 {
        f64::from(self.cooperate_count()) / CHROMOSOME_LEN as f64
    }

    pub fn classify(self, thresholds: &ClassificationThresholds) -> StrategyClass {
        thresholds.classify_fraction(self.cooperation_fraction())
    }

    /// The locus consulted after `history` (at most three rounds, oldest first).
    pub fn locus_for(history: &[JointOutcome]) -> Result<usize> {
        match history {
            [] => Ok(FIRST_MOVE_LOCUS),
            [first] => Ok(SECOND_MOVE_LOCUS + first.opponent.bit() as usize),
            [first, second] => Ok(THIRD_MOVE_LOCUS
                + 2 * first.opponent.bit() as usize
                + second.opponent.bit() as usize),
            [_, _, _] => history_index(history),
            _ => contract(format!(
                "memory-3 strategies see at most 3 rounds, got {}",
                history.len()
            )),
        }
    }

    pub fn decide(self, history: &[JointOutcome]) -> Result<Action> {
        Chromosome::locus_for(history).map(|i| self.locus(i))
    }

    /// Uppercase hex, 18 digits. The leading bit is padding; locus 0 is the
    /// next most significant bit and locus 70 the least significant.
    pub fn encode_hex(self) -> String {
        format!("{:018X}", self.msb_first())
    }

    pub fn decode_hex(text: &str) -> Result<Self> {
        if text.len() != HEX_LEN {
            return Err(Error::Decode(format!(
                "expected {HEX_LEN} hex digits, got {}",
                text.len()
            )));
        }
        if !text.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::Decode(format!("not a hex string: {text:?}")));
        }
        let value =
            u128::from_str_radix(text, 16).map_err(|e| Error::Decode(format!("{text:?}: {e}")))?;
        if value >> CHROMOSOME_LEN != 0 {
            return Err(Error::Decode("pad bit is set".into()));
        }
        Ok(Chromosome(reverse_loci(value)))
    }

    fn msb_first(self) -> u128 {
        reverse_loci(self.0)
    }
}

/// Reverse the order of the low 71 bits.
fn reverse_loci(bits: u128) -> u128 {
    bits.reverse_bits() >> (128 - CHROMOSOME_LEN)
}

impl fmt::Debug for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chromosome({})", self.encode_hex())
    }
}

impl fmt::Display for Chromosome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode_hex())
    }
}

impl std::str::FromStr for Chromosome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Chromosome::decode_hex(s)
    }
}

/// Cooperation-fraction cutoffs. All bounds are strict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationThresholds {
    pub cooperator_min: f64,
    pub defector_max: f64,
    pub top_defector_max: f64,
}

impl Default for ClassificationThresholds {
    fn default() -> Self {
        ClassificationThresholds {
            cooperator_min: 0.60,
            defector_max: 0.40,
            top_defector_max: 0.25,
        }
    }
}

impl ClassificationThresholds {
    pub fn new(cooperator_min: f64, defector_max: f64, top_defector_max: f64) -> Result<Self> {
        let t = ClassificationThresholds {
            cooperator_min,
            defector_max,
            top_defector_max,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = 0.0 <= self.top_defector_max
            && self.top_defector_max <= self.defector_max
            && self.defector_max <= self.cooperator_min
            && self.cooperator_min <= 1.0;
        if ordered {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "thresholds must satisfy 0 <= top_defector_max <= defector_max <= cooperator_min <= 1, got {self:?}"
            )))
        }
    }

    pub fn classify_fraction(&self, fraction: f64) -> StrategyClass {
        if fraction > self.cooperator_min {
            StrategyClass::Cooperator
        } else if fraction < self.top_defector_max {
            StrategyClass::TopDefector
        } else if fraction < self.defector_max {
            StrategyClass::Defector
        } else {
            StrategyClass::Neutral
        }
    }
}

/// Most specific class of a strategy. `TopDefector` is also a defector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyClass {
    Cooperator,
    Defector,
    TopDefector,
    Neutral,
}

impl StrategyClass {
    pub fn is_defector(self) -> bool {
        matches!(self, StrategyClass::Defector | StrategyClass::TopDefector)
    }
}

impl fmt::Display for StrategyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StrategyClass::Cooperator => "Cooperator",
            StrategyClass::Defector => "Defector",
            StrategyClass::TopDefector => "TopDefector",
            StrategyClass::Neutral => "Neutral",
        };
        f.write_str(name)
    }
}

/// Each locus cooperates independently with `cooperate_probability`; locus 0 is drawn first.
pub fn random_chromosome<R: Rng + ?Sized>(rng: &mut R, cooperate_probability: f64) -> Chromosome {
    assert!(
        (0.0..=1.0).contains(&cooperate_probability),
        "probability {cooperate_probability} outside [0, 1]"
    );
    let mut bits = 0u128;
    for locus in 0..CHROMOSOME_LEN {
        if !rng.gen_bool(cooperate_probability) {
            bits |= 1u128 << locus;
        }
    }
    Chromosome(bits)
}

/// Per-locus cooperate bias used when sampling a class member.
pub fn class_bias(target: StrategyClass) -> Result<f64> {
    match target {
        StrategyClass::Cooperator => Ok(0.8),
        StrategyClass::Defector => Ok(0.2),
        other => contract(format!("cannot sample a {other} directly")),
    }
}

/// Draw a chromosome of the target class. Also returns how many draws were rejected.
pub fn sample_class_member_counted<R: Rng + ?Sized>(
    rng: &mut R,
    target: StrategyClass,
    thresholds: &ClassificationThresholds,
) -> Result<(Chromosome, usize)> {
    let bias = class_bias(target)?;
    let mut rejections = 0;
    loop {
        let c = random_chromosome(rng, bias);
        let class = c.classify(thresholds);
        let accepted = match target {
            StrategyClass::Cooperator => class == StrategyClass::Cooperator,
            _ => class.is_defector(),
        };
        if accepted {
            return Ok((c, rejections));
        }
        rejections += 1;
    }
}

pub fn sample_class_member<R: Rng + ?Sized>(
    rng: &mut R,
    target: StrategyClass,
    thresholds: &ClassificationThresholds,
) -> Result<Chromosome> {
    sample_class_member_counted(rng, target, thresholds).map(|(c, _)| c)
}
