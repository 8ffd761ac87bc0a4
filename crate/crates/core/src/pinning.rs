//! Pinning-node selection in three stages (cycle breaking, out-degree
//! trimming, zero in-degree coverage) and synthesis of the distributed
//! pinning controller `x_k(t+1) = g_k(X_k) ⊕_k f_k(X_k)` or
//! `x_k(t+1) = ũ_k ⊕_k …` for open-loop nodes.

use crate::error::{Error, Result};
use crate::graph::{topological_order, WiringGraph, DEFAULT_CYCLE_CAP};
use crate::logic::{
    permutation_matrix, solve_pinning_equation, stp_chain, BooleanFunction, LogicalMatrix, PinningSolveMode,
};
use crate::network::{BooleanNetwork, NodeId, Update};
use crate::oracle::assr_controllable;
use crate::structural::{check_structural_controllability, ControllabilityVerdict};
use serde::Serialize;

/// Breaks every elementary cycle by removing incoming cycle edges.
///
/// `seed` edges are removed first (their heads join Γ₁); the remaining
/// cycles are hit greedily by the vertex lying on most of them (lowest on
/// ties), removing that vertex's in-edge on each cycle it covers.
pub fn select_gamma1(
    g: &WiringGraph,
    seed: &[(NodeId, NodeId)],
    cycle_cap: usize,
) -> Result<(Vec<NodeId>, Vec<(NodeId, NodeId)>)> {
    for &(a, b) in seed {
        if !g.has_edge(a, b) {
            return Err(Error::invalid(format!("seed edge ({a},{b}) is not in the graph")));
        }
    }
    let cycles = g.enumerate_simple_cycles(cycle_cap)?;
    let in_edge = |c: &[NodeId], v: NodeId| -> Option<(NodeId, NodeId)> {
        let i = c.iter().position(|&x| x == v)?;
        Some((c[(i + c.len() - 1) % c.len()], v))
    };
    let uses = |c: &[NodeId], e: (NodeId, NodeId)| in_edge(c, e.1) == Some(e);
    let mut covered: Vec<bool> = cycles.iter().map(|c| seed.iter().any(|&e| uses(c, e))).collect();
    let mut removed: Vec<(NodeId, NodeId)> = seed.to_vec();
    loop {
        let mut count: std::collections::BTreeMap<NodeId, usize> = Default::default();
        for (c, _) in cycles.iter().zip(&covered).filter(|(_, &cov)| !cov) {
            for &v in c {
                *count.entry(v).or_default() += 1;
            }
        }
        // max count, lowest vertex on ties (BTreeMap iterates ascending)
        let Some((&v, _)) = count.iter().rev().max_by_key(|(_, &k)| k) else { break };
        for (c, cov) in cycles.iter().zip(covered.iter_mut()) {
            if !*cov {
                if let Some(e) = in_edge(c, v) {
                    removed.push(e);
                    *cov = true;
                }
            }
        }
    }
    removed.sort_unstable();
    removed.dedup();
    let mut gamma1: Vec<NodeId> = removed.iter().map(|&(_, b)| b).collect();
    gamma1.dedup();
    gamma1.sort_unstable();
    gamma1.dedup();
    Ok((gamma1, removed))
}

/// `⊙(v)`: number of vertices with out-degree ≥ 2 pointing at `v`.
pub fn odot_scores(g: &WiringGraph) -> Vec<(NodeId, usize)> {
    let n = g.num_vertices();
    let mut score = vec![0usize; n];
    for i in (0..n).filter(|&i| g.out_neighbors(i).len() >= 2) {
        for &j in g.out_neighbors(i) {
            score[j] += 1;
        }
    }
    (0..n).filter(|&i| score[i] > 0).map(|i| (g.vertex(i), score[i])).collect()
}

/// Each vertex with out-degree ≥ 2 keeps its out-neighbour of least `⊙`
/// (lowest on ties) and loses the others; Γ₂ collects the cut heads.
pub fn select_gamma2(g_arrow: &WiringGraph) -> (Vec<NodeId>, Vec<(NodeId, NodeId)>) {
    let n = g_arrow.num_vertices();
    let scores = odot_scores(g_arrow);
    let score_of = |v: NodeId| scores.iter().find(|(x, _)| *x == v).map_or(0, |&(_, s)| s);
    let mut removed = vec![];
    for i in (0..n).filter(|&i| g_arrow.out_neighbors(i).len() >= 2) {
        let outs: Vec<NodeId> = g_arrow.out_neighbors(i).iter().map(|&j| g_arrow.vertex(j)).collect();
        let keep = *outs.iter().min_by_key(|&&v| (score_of(v), v)).expect("out-degree ≥ 2");
        removed.extend(outs.into_iter().filter(|&v| v != keep).map(|v| (g_arrow.vertex(i), v)));
    }
    let mut gamma2: Vec<NodeId> = removed.iter().map(|&(_, b)| b).collect();
    gamma2.sort_unstable();
    gamma2.dedup();
    removed.sort_unstable();
    (gamma2, removed)
}

/// State nodes with no in-neighbour.
pub fn select_gamma3(g_ddot: &WiringGraph) -> Vec<NodeId> {
    (0..g_ddot.num_vertices())
        .filter(|&i| !g_ddot.is_generator(i) && g_ddot.in_neighbors(i).is_empty())
        .map(|i| g_ddot.vertex(i))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PinnedNode {
    pub node: NodeId,
    /// Original arguments of `f_k`.
    pub args: Vec<NodeId>,
    /// Retained in-neighbours (a subsequence of `args`).
    pub retained: Vec<NodeId>,
    /// `A_k` over `retained` (`None` for open-loop-only nodes).
    pub a_k: Option<BooleanFunction>,
    /// `F_k` over `args`.
    pub f_target: Option<BooleanFunction>,
    pub operator: BooleanFunction,
    /// `g_k` over `args`, or `None` when the node is driven by `ũ_k` alone.
    pub feedback: Option<BooleanFunction>,
    /// Fresh generator index `ũ_k` when the node is in Γ₃.
    pub input: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PinningPlan {
    pub gamma1: Vec<NodeId>,
    pub gamma2: Vec<NodeId>,
    pub gamma3: Vec<NodeId>,
    pub gamma: Vec<NodeId>,
    pub removed_gamma1: Vec<(NodeId, NodeId)>,
    pub removed_gamma2: Vec<(NodeId, NodeId)>,
    pub odot: Vec<(NodeId, usize)>,
    pub nodes: Vec<PinnedNode>,
    /// `(fresh generator index, pinned node)` in ascending node order.
    pub inputs: Vec<(usize, NodeId)>,
    pub network: BooleanNetwork,
}

impl PinningPlan {
    /// `|Γ|` as a share of `reference_n` state nodes, in percent.
    pub fn percent(&self, reference_n: usize) -> f64 {
        100.0 * self.gamma.len() as f64 / reference_n as f64
    }

    pub fn node(&self, v: NodeId) -> Option<&PinnedNode> {
        self.nodes.iter().find(|p| p.node == v)
    }
}

#[derive(Clone, Debug)]
pub struct PinningOptions {
    pub mode: PinningSolveMode,
    pub gamma1_seed: Vec<(NodeId, NodeId)>,
    /// Injected `A_k` over the retained in-neighbours of `k`.
    pub a_overrides: Vec<(NodeId, BooleanFunction)>,
    pub cycle_cap: usize,
    /// Largest in-degree accepted for synthesis (`2^d` truth tables).
    pub arity_cap: usize,
}

impl Default for PinningOptions {
    fn default() -> Self {
        PinningOptions {
            mode: PinningSolveMode::Search,
            gamma1_seed: vec![],
            a_overrides: vec![],
            cycle_cap: DEFAULT_CYCLE_CAP,
            arity_cap: crate::network::DEFAULT_ARITY_CAP,
        }
    }
}

/// `F_k = A_k ⋉ (I_{2^r} ⊗ 𝟏ᵀ_{2^{d−r}}) ⋉ P`, where `P` brings the retained
/// arguments to the front.
pub fn embed_target(a_k: &BooleanFunction, positions: &[usize], arity: usize) -> Result<LogicalMatrix> {
    let r = positions.len();
    if a_k.arity() != r {
        return Err(Error::Dimension(format!("A_k has arity {} for {r} retained arguments", a_k.arity())));
    }
    let mut order = positions.to_vec();
    order.extend((0..arity).filter(|p| !positions.contains(p)));
    let p = permutation_matrix(&order)?;
    let drop = LogicalMatrix::new(1 << r, (0..1usize << arity).map(|c| c >> (arity - r)).collect())?;
    stp_chain(&[&a_k.structure_matrix(), &drop, &p])
}

pub fn design_pinning(net: &BooleanNetwork, opts: &PinningOptions) -> Result<PinningPlan> {
    let g = net.wiring_graph();
    let (gamma1, removed1) = select_gamma1(&g, &opts.gamma1_seed, opts.cycle_cap)?;
    let g_arrow = g.without_edges(&removed1);
    if topological_order(g_arrow.adjacency()).is_none() {
        return Err(Error::invalid("cycle breaking left a cycle"));
    }
    let odot = odot_scores(&g_arrow);
    let (gamma2, removed2) = select_gamma2(&g_arrow);
    let g_ddot = g_arrow.without_edges(&removed2);
    let gamma3 = select_gamma3(&g_ddot);
    let mut closed: Vec<NodeId> = gamma1.iter().chain(&gamma2).copied().collect();
    closed.sort_unstable();
    closed.dedup();
    let mut gamma: Vec<NodeId> = closed.iter().chain(&gamma3).copied().collect();
    gamma.sort_unstable();
    gamma.dedup();

    let next_gen = net.generator_indices().iter().max().copied().unwrap_or(0);
    let inputs: Vec<(usize, NodeId)> = gamma3.iter().enumerate().map(|(i, &v)| (next_gen + 1 + i, v)).collect();
    let mut updates: Vec<Update> = net.updates().to_vec();
    let mut nodes = vec![];
    for &v in &gamma {
        let k = net.state_position(v.index).expect("state node");
        let up = &net.updates()[k];
        let d = up.args.len();
        if d > opts.arity_cap {
            return Err(Error::ArityCap { node: v.to_string(), arity: d, cap: opts.arity_cap });
        }
        let input = inputs.iter().find(|(_, x)| *x == v).map(|&(u, _)| u);
        let retained: Vec<NodeId> = g_ddot.in_of(v);
        let positions: Vec<usize> =
            retained.iter().map(|r| up.args.iter().position(|a| a == r).expect("retained ⊆ args")).collect();
        let node = if closed.contains(&v) {
            let a_k = match opts.a_overrides.iter().find(|(x, _)| *x == v) {
                Some((_, a)) => a.clone(),
                None if retained.is_empty() => BooleanFunction::constant(0, true),
                None => BooleanFunction::positive_conjunction(retained.len()),
            };
            let f_target = BooleanFunction::from_structure_matrix(&embed_target(&a_k, &positions, d)?)?;
            let (op, gk) = solve_pinning_equation(&f_target.structure_matrix(), &up.function.structure_matrix(), opts.mode)?;
            let closed_loop = gk.combine(&op, &up.function)?;
            debug_assert_eq!(closed_loop, f_target);
            updates[k] = match input {
                Some(u) => with_input(u, BooleanFunction::and(), &up.args, &closed_loop),
                None => Update::new(up.args.clone(), closed_loop),
            };
            PinnedNode {
                node: v,
                args: up.args.clone(),
                retained,
                a_k: Some(a_k),
                f_target: Some(f_target),
                operator: if input.is_some() { BooleanFunction::and() } else { op },
                feedback: Some(gk),
                input,
            }
        } else {
            // untouched node without in-neighbours: its update is a constant
            let c = up.function.is_constant().ok_or_else(|| Error::invalid(format!("{v} has in-neighbours")))?;
            let op = if c { BooleanFunction::and() } else { BooleanFunction::or() };
            let u = input.expect("Γ₃ node has an input");
            updates[k] = with_input(u, op.clone(), &up.args, &up.function);
            PinnedNode {
                node: v,
                args: up.args.clone(),
                retained,
                a_k: None,
                f_target: None,
                operator: op,
                feedback: None,
                input,
            }
        };
        nodes.push(node);
    }
    let mut generators = net.generator_indices().to_vec();
    generators.extend(inputs.iter().map(|&(u, _)| u));
    let network = BooleanNetwork::new(&format!("{}-pinned", net.name), net.state_indices().to_vec(), generators, updates)?;
    Ok(PinningPlan {
        gamma1,
        gamma2,
        gamma3,
        gamma,
        removed_gamma1: removed1,
        removed_gamma2: removed2,
        odot,
        nodes,
        inputs,
        network,
    })
}

/// `x_k = ũ op h(args)` as an update over `args` with `ũ` inserted in
/// canonical position.
fn with_input(u: usize, op: BooleanFunction, args: &[NodeId], h: &BooleanFunction) -> Update {
    let d = args.len();
    let un = NodeId::generator(u);
    let p = args.iter().position(|&a| a > un).unwrap_or(d);
    let f = BooleanFunction::from_fn(d + 1, |x| {
        let rest: Vec<bool> = x[..p].iter().chain(&x[p + 1..]).copied().collect();
        op.eval(&[x[p], h.eval(&rest)])
    })
    .expect("arity within cap");
    let mut all = args.to_vec();
    all.insert(p, un);
    Update::new(all, f)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlanVerification {
    pub verdict: ControllabilityVerdict,
    /// Wiring graph equals the trimmed graph plus the fresh input edges.
    pub structure_matches: bool,
    /// `F_k` depends on exactly the retained arguments, for every closed-loop node.
    pub essential_sets_match: bool,
    /// ASSR reachability certificate, when `n + m` is small enough.
    pub oracle_controllable: Option<bool>,
}

impl PlanVerification {
    pub fn ok(&self) -> bool {
        self.verdict.structurally_controllable
            && self.structure_matches
            && self.essential_sets_match
            && self.oracle_controllable != Some(false)
    }
}

pub fn verify_plan(net: &BooleanNetwork, plan: &PinningPlan, oracle_limit: usize) -> Result<PlanVerification> {
    let pinned_graph = plan.network.wiring_graph();
    let verdict = check_structural_controllability(&pinned_graph);
    let mut removed = plan.removed_gamma1.clone();
    removed.extend(&plan.removed_gamma2);
    let g_ddot = net.wiring_graph().without_edges(&removed);
    let mut expected = g_ddot.edges();
    expected.extend(plan.inputs.iter().map(|&(u, v)| (NodeId::generator(u), v)));
    expected.sort_unstable();
    let mut actual = pinned_graph.edges();
    actual.sort_unstable();
    let essential_sets_match = plan.nodes.iter().all(|p| match &p.f_target {
        Some(f) => {
            let ess: Vec<NodeId> = f.essential_positions().into_iter().map(|i| p.args[i]).collect();
            ess == p.retained
        }
        None => true,
    });
    let oracle_controllable = if plan.network.n() + plan.network.m() <= oracle_limit {
        Some(assr_controllable(&plan.network, crate::oracle::DEFAULT_STATE_CAP)?)
    } else {
        None
    };
    Ok(PlanVerification { verdict, structure_matches: expected == actual, essential_sets_match, oracle_controllable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnfile::{parse_network, ParsedNetwork};
    use crate::fixtures;

    fn bn(text: &str) -> BooleanNetwork {
        match parse_network(text).unwrap().network {
            ParsedNetwork::Bn(n) => n,
            ParsedNetwork::Pbn(_) => unreachable!(),
        }
    }

    fn s(i: usize) -> NodeId {
        NodeId::state(i)
    }

    #[test]
    fn self_loop_is_cut() {
        let net = bn("x1 = !x1");
        let (g1, rem) = select_gamma1(&net.wiring_graph(), &[], 100).unwrap();
        assert_eq!(g1, vec![s(1)]);
        assert_eq!(rem, vec![(s(1), s(1))]);
    }

    #[test]
    fn acyclic_graph_needs_no_cycle_cut() {
        let net = bn("u1:input\nx1 = u1\nx2 = x1");
        assert!(select_gamma1(&net.wiring_graph(), &[], 100).unwrap().0.is_empty());
        assert!(select_gamma3(&net.wiring_graph()).is_empty());
        assert_eq!(select_gamma3(&bn("x1 = 1").wiring_graph()), vec![s(1)]);
    }

    #[test]
    fn star_keeps_one_leaf() {
        let net = bn("u1:input\nx1 = u1\nx2 = x1\nx3 = x1");
        let (g2, rem) = select_gamma2(&net.wiring_graph());
        assert_eq!(g2, vec![s(3)]);
        assert_eq!(rem, vec![(s(1), s(3))]);
    }

    #[test]
    fn embedding_by_stp_matches_direct_embedding() {
        let a = BooleanFunction::from_fn(2, |x| x[0] && !x[1]).unwrap();
        let f = embed_target(&a, &[3, 1], 4).unwrap();
        let direct = BooleanFunction::from_fn(4, |x| x[3] && !x[1]).unwrap();
        assert_eq!(BooleanFunction::from_structure_matrix(&f).unwrap(), direct);
    }

    #[test]
    fn toy_cycle_pinned_is_controllable() {
        let net = bn("x1 = x3\nx2 = x1 & !x3\nx3 = x2 | x1");
        let plan = design_pinning(&net, &PinningOptions::default()).unwrap();
        let v = verify_plan(&net, &plan, 10).unwrap();
        assert!(v.ok(), "{v:?}");
        assert_eq!(v.oracle_controllable, Some(true));
        assert!(!check_structural_controllability(&net.wiring_graph()).structurally_controllable);
    }

    #[test]
    fn pinning_random_networks() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for t in 0..150 {
            let n = 2 + t % 9;
            let net = crate::random::random_bcn(&mut rng, n, t % 3, 3);
            let plan = design_pinning(&net, &PinningOptions::default()).unwrap();
            let v = verify_plan(&net, &plan, 10).unwrap();
            assert!(v.ok(), "network {t}: {v:?}\n{}", net.to_bn_string());
        }
    }

    #[test]
    fn tcell_plan_verifies() {
        let net = fixtures::tcell();
        let plan = design_pinning(&net, &PinningOptions::default()).unwrap();
        let v = verify_plan(&net, &plan, 10).unwrap();
        assert!(v.ok());
        // the literal self-loop on x35 can only be cut at x35
        assert!(plan.gamma1.contains(&s(35)));
    }
}
