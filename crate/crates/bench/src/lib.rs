//! Seeded instances shared by the benchmarks.

use bnctl::random::{random_in_tree_forest, random_pbn};
use bnctl::{ProbabilisticBooleanNetwork, WiringGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// In-tree forest over `n` state nodes with roughly `n / 500` trees.
pub fn forest(n: usize) -> WiringGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    random_in_tree_forest(&mut rng, n, (n / 500).max(1), 3)
}

pub fn pbn(n: usize, modes: usize) -> ProbabilisticBooleanNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64);
    random_pbn(&mut rng, n, modes, 2)
}
