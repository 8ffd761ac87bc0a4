//! Seeded random instances for oracle sweeps and benchmarks.

use crate::graph::WiringGraph;
use crate::logic::BooleanFunction;
use crate::network::{minimal_functions, BooleanNetwork, NodeId, ProbabilisticBooleanNetwork, Update};
use rand::seq::SliceRandom;
use rand::Rng;

/// State nodes `1..=n`, generators `1..=m`; every state node draws `0..=max_in`
/// distinct in-neighbours (self-loops allowed) and a minimal function over
/// them, or a random constant when it draws none.
pub fn random_bcn<R: Rng>(rng: &mut R, n: usize, m: usize, max_in: usize) -> BooleanNetwork {
    let pool: Vec<NodeId> = (1..=m).map(NodeId::generator).chain((1..=n).map(NodeId::state)).collect();
    let updates = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=max_in.min(pool.len()));
            let mut args: Vec<NodeId> = pool.choose_multiple(rng, k).copied().collect();
            args.sort_unstable();
            if k == 0 {
                Update::constant(rng.gen())
            } else {
                let fs = minimal_functions(k).expect("small arity");
                Update::new(args, fs.choose(rng).expect("non-empty").clone())
            }
        })
        .collect();
    BooleanNetwork::new("random", (1..=n).collect(), (1..=m).collect(), updates).expect("valid by construction")
}

/// Random digraph over `m` generators and `n` state nodes with each
/// admissible edge present with probability `p` (self-loops allowed).
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, m: usize, p: f64) -> WiringGraph {
    let vertices: Vec<NodeId> = (1..=m).map(NodeId::generator).chain((1..=n).map(NodeId::state)).collect();
    let mut edges = vec![];
    for &a in &vertices {
        for b in (1..=n).map(NodeId::state) {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    WiringGraph::new(vertices, &edges).expect("valid by construction")
}

/// A structurally controllable graph: a forest of in-trees over `n` state
/// nodes, each tree rooted at a state node, with one generator per leaf.
/// `branching` bounds the number of children per node.
pub fn random_in_tree_forest<R: Rng>(rng: &mut R, n: usize, trees: usize, branching: usize) -> WiringGraph {
    let trees = trees.clamp(1, n.max(1));
    let mut children = vec![0usize; n + 1];
    let mut edges = vec![];
    let mut open: Vec<usize> = (1..=trees.min(n)).collect();
    for v in trees + 1..=n {
        let slot = rng.gen_range(0..open.len());
        let parent = open[slot];
        edges.push((NodeId::state(v), NodeId::state(parent)));
        children[parent] += 1;
        if children[parent] >= branching.max(1) {
            open.swap_remove(slot);
        }
        open.push(v);
    }
    let mut gens = 0;
    for v in 1..=n {
        if children[v] == 0 {
            gens += 1;
            edges.push((NodeId::generator(gens), NodeId::state(v)));
        }
    }
    let vertices: Vec<NodeId> = (1..=gens).map(NodeId::generator).chain((1..=n).map(NodeId::state)).collect();
    WiringGraph::new(vertices, &edges).expect("valid by construction")
}

/// A network with the given wiring: every state node gets a random minimal
/// function over its in-neighbours (constant when it has none).
pub fn network_on_graph<R: Rng>(rng: &mut R, g: &WiringGraph) -> BooleanNetwork {
    let states: Vec<usize> = g.vertices().iter().filter(|v| !v.is_generator()).map(|v| v.index).collect();
    let gens: Vec<usize> = g.vertices().iter().filter(|v| v.is_generator()).map(|v| v.index).collect();
    let updates = states
        .iter()
        .map(|&k| {
            let args = g.in_of(NodeId::state(k));
            if args.is_empty() {
                Update::constant(rng.gen())
            } else if args.len() <= 4 {
                Update::new(args.clone(), minimal_functions(args.len()).expect("small").choose(rng).expect("non-empty").clone())
            } else {
                // parity is minimal for every arity
                let f = BooleanFunction::from_fn(args.len(), |x| x.iter().filter(|&&b| b).count() % 2 == 1)
                    .expect("arity within cap");
                Update::new(args, f)
            }
        })
        .collect();
    BooleanNetwork::new("random", states, gens, updates).expect("valid by construction")
}

/// Random PBN without generators: `modes` networks over the same `n` nodes
/// and random positive probabilities summing to one.
pub fn random_pbn<R: Rng>(rng: &mut R, n: usize, modes: usize, max_in: usize) -> ProbabilisticBooleanNetwork {
    let nets: Vec<BooleanNetwork> = (0..modes).map(|_| random_bcn(rng, n, 0, max_in)).collect();
    let weights: Vec<u32> = (0..modes).map(|_| rng.gen_range(1..=10)).collect();
    let total: u32 = weights.iter().sum();
    let mut probs: Vec<f64> = weights.iter().map(|&w| f64::from(w) / f64::from(total)).collect();
    let head: f64 = probs[..modes - 1].iter().sum();
    probs[modes - 1] = 1.0 - head;
    ProbabilisticBooleanNetwork::new("random", nets, probs).expect("valid by construction")
}

/// Random simple undirected graph on `n` vertices (`0..n`) with edge
/// probability `p`; loops appear with probability `p_loop`.
pub fn random_undirected<R: Rng>(rng: &mut R, n: usize, p: f64, p_loop: f64) -> Vec<(usize, usize)> {
    let mut edges = vec![];
    for a in 0..n {
        if rng.gen_bool(p_loop) {
            edges.push((a, a));
        }
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    edges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structural::check_structural_controllability;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn forests_pass_the_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 10, 200] {
            let g = random_in_tree_forest(&mut rng, n, 3, 3);
            assert!(check_structural_controllability(&g).structurally_controllable);
        }
    }

    #[test]
    fn pbn_probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_pbn(&mut rng, 4, 3, 2);
        assert!((p.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
