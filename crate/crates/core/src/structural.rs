//! Structural controllability from the wiring graph alone, the fixed-time
//! horizon η, and shift-register style control schedules for concrete
//! networks whose graph passes the check.

use crate::error::{Error, Result};
use crate::graph::{in_tree_decomposition, DecompositionFailure, InTreeDecomposition, WiringGraph};
use crate::logic::bits_of;
use crate::network::{BooleanNetwork, NodeId};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControllabilityVerdict {
    pub structurally_controllable: bool,
    pub witness: Option<InTreeDecomposition>,
    pub violation: Option<DecompositionFailure>,
    pub eta: Option<usize>,
}

/// Accepts iff the graph is acyclic and every state node has a non-empty
/// in-neighbourhood made only of channels. Linear time.
pub fn check_structural_controllability(g: &WiringGraph) -> ControllabilityVerdict {
    match in_tree_decomposition(g) {
        Ok(d) => ControllabilityVerdict {
            structurally_controllable: true,
            eta: Some(d.layer_count),
            witness: Some(d),
            violation: None,
        },
        Err(v) => ControllabilityVerdict { structurally_controllable: false, witness: None, violation: Some(v), eta: None },
    }
}

/// Quadratic adjacency-matrix form of the same test, kept as an independent
/// cross-check of the linear-time implementation.
pub fn check_structural_controllability_dense(g: &WiringGraph) -> bool {
    let n = g.num_vertices();
    let mut a = vec![vec![false; n]; n];
    for i in 0..n {
        for &j in g.out_neighbors(i) {
            a[i][j] = true;
        }
    }
    // acyclicity by peeling sources
    let mut removed = vec![false; n];
    let mut indeg: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| a[i][j]).count()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for v in 0..n {
            if !removed[v] && indeg[v] == 0 {
                removed[v] = true;
                changed = true;
                for w in 0..n {
                    if a[v][w] {
                        indeg[w] -= 1;
                    }
                }
            }
        }
    }
    if removed.iter().any(|&r| !r) {
        return false;
    }
    let mut counter = vec![0usize; n];
    for i in 0..n {
        let outs: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
        if outs.len() == 1 && !a[i][i] {
            counter[outs[0]] += 1;
        }
    }
    (0..n).filter(|&j| !g.is_generator(j)).all(|j| {
        let d = (0..n).filter(|&i| a[i][j]).count();
        d >= 1 && counter[j] == d
    })
}

/// The uniform reachability horizon: the layer count of the in-tree forest.
pub fn fixed_time_eta(g: &WiringGraph) -> Result<usize> {
    let v = check_structural_controllability(g);
    v.eta.ok_or_else(|| Error::NotControllable(v.violation.map(|x| x.to_string()).unwrap_or_default()))
}

/// Three-layer structure: generators feed exactly one layer-2 node each,
/// layer-2 nodes have a single generator in-neighbour, layer-3 nodes are
/// sinks fed only by layer 2. Returns the verdict "every layer-2 vertex has
/// out-degree ≤ 1" when the graph has this shape.
pub fn three_layer_verdict(g: &WiringGraph) -> Option<bool> {
    let n = g.num_vertices();
    let layer2: Vec<bool> = (0..n)
        .map(|i| !g.is_generator(i) && g.in_neighbors(i).len() == 1 && g.is_generator(g.in_neighbors(i)[0]))
        .collect();
    for i in 0..n {
        if g.is_generator(i) {
            if g.out_neighbors(i).len() != 1 || !layer2[g.out_neighbors(i)[0]] {
                return None;
            }
        } else if layer2[i] {
            if g.out_neighbors(i).iter().any(|&j| layer2[j]) {
                return None;
            }
        } else if g.in_neighbors(i).is_empty()
            || !g.out_neighbors(i).is_empty()
            || g.in_neighbors(i).iter().any(|&j| !layer2[j])
        {
            return None;
        }
    }
    Some((0..n).filter(|&i| layer2[i]).all(|i| g.out_neighbors(i).len() <= 1))
}

/// Open-loop input sequences, `inputs[k][t]` for the `k`-th generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControlSchedule {
    pub horizon: usize,
    pub generators: Vec<NodeId>,
    pub inputs: Vec<Vec<bool>>,
    pub target: Option<Vec<bool>>,
}

impl ControlSchedule {
    pub fn input_at(&self, t: usize) -> Vec<bool> {
        self.inputs.iter().map(|seq| seq[t]).collect()
    }

    /// States `x(0), …, x(horizon)` from `x0`.
    pub fn simulate(&self, net: &BooleanNetwork, x0: &[bool]) -> Vec<Vec<bool>> {
        let mut traj = vec![x0.to_vec()];
        for t in 0..self.horizon {
            let next = net.step(traj.last().expect("non-empty"), &self.input_at(t));
            traj.push(next);
        }
        traj
    }
}

/// Root nodes (state vertices with no successor) in ascending order.
pub fn root_nodes(g: &WiringGraph) -> Vec<NodeId> {
    (0..g.num_vertices()).filter(|&i| !g.is_generator(i) && g.out_neighbors(i).is_empty()).map(|i| g.vertex(i)).collect()
}

/// Drives every state node to `target` at time η from any initial state.
pub fn synthesize_schedule(net: &BooleanNetwork, target: &[bool]) -> Result<ControlSchedule> {
    if target.len() != net.n() {
        return Err(Error::Dimension(format!("target has {} bits for {} state nodes", target.len(), net.n())));
    }
    let eta = fixed_time_eta(&net.wiring_graph())?;
    let reqs: Vec<(usize, usize, bool)> = (0..net.n()).map(|k| (k, eta, target[k])).collect();
    let mut s = backward_substitute(net, eta, reqs)?;
    s.target = Some(target.to_vec());
    Ok(s)
}

/// Makes the root nodes emit `root_targets[k]` (one bit per root, ascending)
/// at time `η + k`.
pub fn trajectory_follow(net: &BooleanNetwork, root_targets: &[Vec<bool>]) -> Result<ControlSchedule> {
    let g = net.wiring_graph();
    let eta = fixed_time_eta(&g)?;
    if root_targets.is_empty() {
        return Err(Error::invalid("empty root trajectory"));
    }
    let roots = root_nodes(&g);
    let mut reqs = vec![];
    for (k, values) in root_targets.iter().enumerate() {
        if values.len() != roots.len() {
            return Err(Error::Dimension(format!("{} values for {} roots", values.len(), roots.len())));
        }
        for (r, &v) in roots.iter().zip(values) {
            reqs.push((net.state_position(r.index).expect("root is a state node"), eta + k, v));
        }
    }
    backward_substitute(net, eta + root_targets.len() - 1, reqs)
}

/// Pushes `(state position, time, value)` requirements down the in-trees.
/// Each requirement is met by the lexicographically smallest argument tuple
/// (0 before 1); unconstrained inputs default to 0.
fn backward_substitute(net: &BooleanNetwork, horizon: usize, reqs: Vec<(usize, usize, bool)>) -> Result<ControlSchedule> {
    let m = net.m();
    let mut inputs = vec![vec![false; horizon]; m];
    let mut input_set = vec![vec![false; horizon]; m];
    let mut state_req: std::collections::HashMap<(usize, usize), bool> = Default::default();
    let mut stack = reqs;
    while let Some((k, t, value)) = stack.pop() {
        if let Some(&prev) = state_req.get(&(k, t)) {
            if prev != value {
                return Err(Error::invalid(format!("conflicting requirements on x{} at t={t}", net.state_indices()[k])));
            }
            continue;
        }
        if t == 0 {
            return Err(Error::invalid("a state requirement reached the initial time"));
        }
        state_req.insert((k, t), value);
        let up = &net.updates()[k];
        let d = up.args.len();
        let beta = (0..1usize << d)
            .map(|s| (0..d).map(|j| (s >> (d - 1 - j)) & 1 == 1).collect::<Vec<bool>>())
            .find(|b| up.function.eval(b) == value)
            .ok_or_else(|| Error::invalid(format!("x{} cannot take value {value}", net.state_indices()[k])))?;
        for (a, &b) in up.args.iter().zip(&beta) {
            if a.is_generator() {
                let g = net.generator_position(a.index).expect("declared generator");
                if input_set[g][t - 1] && inputs[g][t - 1] != b {
                    return Err(Error::invalid(format!("conflicting requirements on {a} at t={}", t - 1)));
                }
                input_set[g][t - 1] = true;
                inputs[g][t - 1] = b;
            } else {
                stack.push((net.state_position(a.index).expect("declared state"), t - 1, b));
            }
        }
    }
    Ok(ControlSchedule { horizon, generators: net.generator_nodes(), inputs, target: None })
}

/// Every assignment of a BN with `n` nodes, in canonical order.
pub fn all_states(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0..1usize << n).map(move |s| bits_of(n, s))
}
