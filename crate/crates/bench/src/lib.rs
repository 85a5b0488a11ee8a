//! Benchmark fixtures shared by the bench targets.

use lksmult::potentials::{green_kernel, KernelSeq};
use lksmult::{CoeffSeq, SingularitySet};

/// Green kernel of the Riesz weight of order `alpha` on the full range of a
/// grid of size `2^log2m`.
pub fn riesz_green(alpha: f64, log2m: u32) -> KernelSeq {
    let m = 1usize << log2m;
    let c = CoeffSeq::riesz(alpha).expect("valid order");
    green_kernel(&c, m, m / 2 - 1).expect("kernel").0
}

/// Twelve points made of three rotated squares.
pub fn three_squares() -> SingularitySet {
    let turns: Vec<(i64, i64)> = (0..3).flat_map(|i| (0..4).map(move |k| (17 * k + 4 * i, 68))).collect();
    SingularitySet::same_order(&turns, 0.5).expect("valid set")
}
