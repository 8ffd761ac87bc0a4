//! Brute-force checks on concrete networks over the full state space, used
//! as independent references for the graph-level results.

use crate::error::Result;
use crate::graph::strongly_connected_components;
use crate::network::BooleanNetwork;

/// Default cap on `2^{n+m}` for exhaustive checks.
pub const DEFAULT_STATE_CAP: u128 = 1 << 20;

/// Successor sets of the state-transition graph with inputs quantified
/// existentially: `succ[x]` holds every `L̃ ⋉ u ⋉ x`.
pub fn reachability_graph(net: &BooleanNetwork, cap: u128) -> Result<Vec<Vec<usize>>> {
    let l = net.assr_transition(cap)?;
    let nx = 1usize << net.n();
    let mut succ = vec![vec![]; nx];
    for c in 0..l.cols() {
        succ[c % nx].push(l.col(c));
    }
    for s in &mut succ {
        s.sort_unstable();
        s.dedup();
    }
    Ok(succ)
}

/// Every state reaches every other state under some input sequence.
pub fn assr_controllable(net: &BooleanNetwork, cap: u128) -> Result<bool> {
    let succ = reachability_graph(net, cap)?;
    Ok(strongly_connected_components(&succ).len() == 1)
}

/// Every ordered pair `(x₀, x_d)` is joined by a path of exactly `k` steps.
pub fn all_pairs_reachable_in(net: &BooleanNetwork, k: usize, cap: u128) -> Result<bool> {
    let succ = reachability_graph(net, cap)?;
    let nx = succ.len();
    let words = nx.div_ceil(64);
    // reach[x] = bitset of states reachable from x in exactly t steps
    let mut reach: Vec<Vec<u64>> = (0..nx)
        .map(|x| {
            let mut b = vec![0u64; words];
            b[x / 64] |= 1 << (x % 64);
            b
        })
        .collect();
    for _ in 0..k {
        reach = reach
            .iter()
            .map(|row| {
                let mut next = vec![0u64; words];
                for y in 0..nx {
                    if row[y / 64] >> (y % 64) & 1 == 1 {
                        for &z in &succ[y] {
                            next[z / 64] |= 1 << (z % 64);
                        }
                    }
                }
                next
            })
            .collect();
    }
    let full = |row: &Vec<u64>| (0..nx).all(|y| row[y / 64] >> (y % 64) & 1 == 1);
    Ok(reach.iter().all(full))
}

/// Controllability of every network in the structural equivalence class.
pub fn class_controllable(net: &BooleanNetwork, max_arity: usize, class_cap: u128, state_cap: u128) -> Result<bool> {
    for member in net.enumerate_equivalent(max_arity, class_cap)? {
        if !assr_controllable(&member, state_cap)? {
            return Ok(false);
        }
    }
    Ok(true)
}
