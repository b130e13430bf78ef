use rand::Rng;

use crate::strategy::{Chromosome, CHROMOSOME_LEN};

/// Cut both parents at the same point and swap tails.
///
/// With probability `pc` a cut `k` is drawn uniformly from `1..=70`; the
/// children are `p1[..k] ++ p2[k..]` and `p2[..k] ++ p1[k..]`. Otherwise the
/// parents are copied.
pub fn crossover<R: Rng + ?Sized>(
    p1: Chromosome,
    p2: Chromosome,
    rng: &mut R,
    pc: f64,
) -> (Chromosome, Chromosome) {
    if !rng.gen_bool(pc) {
        return (p1, p2);
    }
    let cut = rng.gen_range(1..CHROMOSOME_LEN);
    crossover_at(p1, p2, cut)
}

pub fn crossover_at(p1: Chromosome, p2: Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    assert!(cut <= CHROMOSOME_LEN, "cut {cut} beyond chromosome");
    let head = (1u128 << cut) - 1;
    let (a, b) = (p1.bits(), p2.bits());
    let child1 = (a & head) | (b & !head);
    let child2 = (b & head) | (a & !head);
    (
        Chromosome::from_bits(child1).expect("loci stay in range"),
        Chromosome::from_bits(child2).expect("loci stay in range"),
    )
}

/// Flip each locus independently with probability `pm`, drawing in locus order.
pub fn mutate<R: Rng + ?Sized>(c: Chromosome, rng: &mut R, pm: f64) -> Chromosome {
    let mut bits = c.bits();
    for locus in 0..CHROMOSOME_LEN {
        if rng.gen_bool(pm) {
            bits ^= 1u128 << locus;
        }
    }
    Chromosome::from_bits(bits).expect("loci stay in range")
}
