//! Business-game payoffs, dilemma classification and the pairwise match engine.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::strategy::{Action, Chromosome, FIRST_MOVE_LOCUS, SECOND_MOVE_LOCUS, THIRD_MOVE_LOCUS};

/// Whole currency units (pounds).
pub type Currency = i64;

/// Price of the traded goods and the compensation paid to a cheated party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffConfig {
    pub goods_price: Currency,
    pub compensation: Currency,
}

impl PayoffConfig {
    pub fn new(goods_price: Currency, compensation: Currency) -> Result<Self> {
        let cfg = PayoffConfig {
            goods_price,
            compensation,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.goods_price <= 0 {
            return Err(Error::Config(format!(
                "goods price must be positive, got {}",
                self.goods_price
            )));
        }
        if !(0..=self.goods_price).contains(&self.compensation) {
            return Err(Error::Config(format!(
                "compensation must lie in [0, {}], got {}",
                self.goods_price, self.compensation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub temptation: Currency,
    pub reward: Currency,
    pub punishment: Currency,
    pub sucker: Currency,
}

impl PayoffMatrix {
    pub fn new(
        temptation: Currency,
        reward: Currency,
        punishment: Currency,
        sucker: Currency,
    ) -> Self {
        PayoffMatrix {
            temptation,
            reward,
            punishment,
            sucker,
        }
    }

    /// Row player's payoff indexed by outcome code (CC, CD, DC, DD).
    #[inline]
    pub fn by_code(&self) -> [Currency; 4] {
        [self.reward, self.sucker, self.temptation, self.punishment]
    }
}

/// Seller and buyer both gain the price on a completed trade; a cheat pockets
/// twice the price while the victim loses it, softened by the compensation.
pub fn payoff_matrix_from(cfg: &PayoffConfig) -> PayoffMatrix {
    let price = cfg.goods_price;
    PayoffMatrix {
        temptation: 2 * price,
        reward: price,
        punishment: 0,
        sucker: -price + cfg.compensation,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DilemmaKind {
    /// T > R > P > S
    Strong,
    /// T > R > P = S
    Weak,
    None,
}

impl fmt::Display for DilemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DilemmaKind::Strong => "Strong",
            DilemmaKind::Weak => "Weak",
            DilemmaKind::None => "No",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DilemmaClass {
    pub kind: DilemmaKind,
    /// Strict 2R > T + S, reported on its own.
    pub iterated_condition_holds: bool,
}

pub fn classify_dilemma(m: &PayoffMatrix) -> DilemmaClass {
    let upper = m.temptation > m.reward && m.reward > m.punishment;
    let kind = if upper && m.punishment > m.sucker {
        DilemmaKind::Strong
    } else if upper && m.punishment == m.sucker {
        DilemmaKind::Weak
    } else {
        DilemmaKind::None
    };
    DilemmaClass {
        kind,
        iterated_condition_holds: 2 * m.reward > m.temptation + m.sucker,
    }
}

/// Dilemma class of a business game. Any compensation of the cheated party
/// weakens the dilemma, even while the bare matrix still has P > S.
pub fn classify_business_game(cfg: &PayoffConfig) -> DilemmaClass {
    let m = payoff_matrix_from(cfg);
    let mut class = classify_dilemma(&m);
    let weak_chain = m.temptation > m.reward && m.reward > m.punishment && m.punishment >= m.sucker;
    if cfg.compensation > 0 && weak_chain {
        class.kind = DilemmaKind::Weak;
    }
    class
}

/// Payoffs of one round for the two players.
#[inline]
pub fn payoffs(a: Action, b: Action, m: &PayoffMatrix) -> (Currency, Currency) {
    match (a, b) {
        (Action::Cooperate, Action::Cooperate) => (m.reward, m.reward),
        (Action::Cooperate, Action::Defect) => (m.sucker, m.temptation),
        (Action::Defect, Action::Cooperate) => (m.temptation, m.sucker),
        (Action::Defect, Action::Defect) => (m.punishment, m.punishment),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub payoff_a: Currency,
    pub payoff_b: Currency,
    pub cooperations_a: u32,
    pub cooperations_b: u32,
    pub rounds: u32,
}

impl MatchResult {
    pub fn mirrored(self) -> Self {
        MatchResult {
            payoff_a: self.payoff_b,
            payoff_b: self.payoff_a,
            cooperations_a: self.cooperations_b,
            cooperations_b: self.cooperations_a,
            rounds: self.rounds,
        }
    }

    fn add_round(&mut self, a: u8, b: u8, table: &[Currency; 4]) {
        let code = (2 * a + b) as usize;
        let mirrored = (2 * b + a) as usize;
        self.payoff_a += table[code];
        self.payoff_b += table[mirrored];
        self.cooperations_a += u32::from(a ^ 1);
        self.cooperations_b += u32::from(b ^ 1);
        self.rounds += 1;
    }
}

/// Swap own/opponent inside each 2-bit code of a 6-bit history index.
#[inline]
fn mirror_index(index: usize) -> usize {
    ((index & 0b010101) << 1) | ((index & 0b101010) >> 1)
}

#[inline]
fn bit(c: Chromosome, locus: usize) -> u8 {
    ((c.bits() >> locus) & 1) as u8
}

/// Moves of both players in round `round` (0-based, < 3) given the earlier
/// opening moves of this pairing.
fn opening_moves(a: Chromosome, b: Chromosome, round: usize, prev: &[(u8, u8)]) -> (u8, u8) {
    match round {
        0 => (bit(a, FIRST_MOVE_LOCUS), bit(b, FIRST_MOVE_LOCUS)),
        1 => {
            let (a0, b0) = prev[0];
            (
                bit(a, SECOND_MOVE_LOCUS + b0 as usize),
                bit(b, SECOND_MOVE_LOCUS + a0 as usize),
            )
        }
        _ => {
            let ((a0, b0), (a1, b1)) = (prev[0], prev[1]);
            (
                bit(a, THIRD_MOVE_LOCUS + 2 * b0 as usize + b1 as usize),
                bit(b, THIRD_MOVE_LOCUS + 2 * a0 as usize + a1 as usize),
            )
        }
    }
}

/// Round-by-round moves of a match between `a` and `b`.
pub fn play_match_trace(
    a: Chromosome,
    b: Chromosome,
    rounds: u32,
) -> Result<Vec<(Action, Action)>> {
    if rounds == 0 {
        return contract("a match needs at least one round");
    }
    let mut moves: Vec<(u8, u8)> = Vec::with_capacity(rounds as usize);
    let mut index_a = 0usize;
    for round in 0..rounds as usize {
        let (ma, mb) = if round < 3 {
            opening_moves(a, b, round, &moves)
        } else {
            (bit(a, index_a), bit(b, mirror_index(index_a)))
        };
        index_a = ((index_a << 2) & 63) | (2 * ma + mb) as usize;
        moves.push((ma, mb));
    }
    Ok(moves
        .into_iter()
        .map(|(x, y)| (Action::from_bit(x), Action::from_bit(y)))
        .collect())
}

/// Play `rounds` rounds between `a` and `b`, both starting with no history.
///
/// From round four on the pair's state is the last three joint outcomes, so
/// the game is eventually periodic with period at most 64; once a state
/// repeats, whole cycles are added in one step.
pub fn play_match(
    a: Chromosome,
    b: Chromosome,
    rounds: u32,
    m: &PayoffMatrix,
) -> Result<MatchResult> {
    if rounds == 0 {
        return contract("a match needs at least one round");
    }
    let table = m.by_code();
    let mut result = MatchResult::default();
    let mut opening: [(u8, u8); 3] = [(0, 0); 3];
    let mut index_a = 0usize;

    let opening_rounds = rounds.min(3) as usize;
    for round in 0..opening_rounds {
        let (ma, mb) = opening_moves(a, b, round, &opening[..round]);
        opening[round] = (ma, mb);
        result.add_round(ma, mb, &table);
        index_a = ((index_a << 2) & 63) | (2 * ma + mb) as usize;
    }

    // first visit of each state: rounds played and running totals at that time
    let mut seen: [Option<MatchResult>; 64] = [None; 64];
    let mut skipped = false;
    while result.rounds < rounds {
        if !skipped {
            if let Some(earlier) = seen[index_a] {
                let period = result.rounds - earlier.rounds;
                let cycles = (rounds - result.rounds) / period;
                let k = Currency::from(cycles);
                result.payoff_a += k * (result.payoff_a - earlier.payoff_a);
                result.payoff_b += k * (result.payoff_b - earlier.payoff_b);
                result.cooperations_a += cycles * (result.cooperations_a - earlier.cooperations_a);
                result.cooperations_b += cycles * (result.cooperations_b - earlier.cooperations_b);
                result.rounds += cycles * period;
                skipped = true;
                continue;
            }
            seen[index_a] = Some(result);
        }
        let ma = bit(a, index_a);
        let mb = bit(b, mirror_index(index_a));
        result.add_round(ma, mb, &table);
        index_a = ((index_a << 2) & 63) | (2 * ma + mb) as usize;
    }
    Ok(result)
}
