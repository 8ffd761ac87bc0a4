//! Boolean (control) networks, probabilistic Boolean networks, their wiring
//! graphs, algebraic state-space transition matrices and structural
//! equivalence classes.

use crate::error::{check_cap, Error, Result};
use crate::graph::WiringGraph;
use crate::logic::{bits_of, column_of, BooleanFunction, LogicalMatrix};
use serde::Serialize;
use std::fmt;

/// Default cap on in-degree accepted at load time.
pub const DEFAULT_ARITY_CAP: usize = 20;
/// Default cap on the size of an enumerated equivalence class.
pub const DEFAULT_CLASS_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NodeKind {
    Generator,
    State,
}

/// A vertex label: `u<index>` for generators, `x<index>` for state nodes.
///
/// Ordering puts generators first, then state nodes, each by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub fn state(index: usize) -> Self {
        NodeId { kind: NodeKind::State, index }
    }

    pub fn generator(index: usize) -> Self {
        NodeId { kind: NodeKind::Generator, index }
    }

    pub fn is_generator(&self) -> bool {
        self.kind == NodeKind::Generator
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NodeKind::Generator => write!(f, "u{}", self.index),
            NodeKind::State => write!(f, "x{}", self.index),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Update {
    pub args: Vec<NodeId>,
    pub function: BooleanFunction,
}

impl Update {
    pub fn new(args: Vec<NodeId>, function: BooleanFunction) -> Self {
        Update { args, function }
    }

    pub fn constant(value: bool) -> Self {
        Update { args: vec![], function: BooleanFunction::constant(0, value) }
    }

    /// Drops non-essential arguments; returns the names of the dropped ones.
    pub fn minimized(&self) -> (Update, Vec<NodeId>) {
        let keep = self.function.essential_positions();
        if keep.len() == self.args.len() {
            return (self.clone(), vec![]);
        }
        let dropped = (0..self.args.len()).filter(|p| !keep.contains(p)).map(|p| self.args[p]).collect();
        let args = keep.iter().map(|&p| self.args[p]).collect();
        (Update { args, function: self.function.project(&keep) }, dropped)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Slot {
    Gen(usize),
    State(usize),
}

/// A Boolean network with optional generators (control inputs).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BooleanNetwork {
    pub name: String,
    states: Vec<usize>,
    generators: Vec<usize>,
    updates: Vec<Update>,
    #[serde(skip)]
    slots: Vec<Vec<Slot>>,
}

impl BooleanNetwork {
    /// Validates and minimizes; dropped arguments are discarded silently.
    pub fn new(name: &str, states: Vec<usize>, generators: Vec<usize>, updates: Vec<Update>) -> Result<Self> {
        Self::build(name, states, generators, updates).map(|(net, _)| net)
    }

    /// Validates and minimizes, returning one warning per dropped argument.
    pub fn build(
        name: &str,
        states: Vec<usize>,
        generators: Vec<usize>,
        updates: Vec<Update>,
    ) -> Result<(Self, Vec<String>)> {
        if !is_strictly_sorted(&states) || !is_strictly_sorted(&generators) {
            return Err(Error::invalid("node indices must be unique and ascending"));
        }
        if states.len() != updates.len() {
            return Err(Error::invalid("one update per state node is required"));
        }
        let mut warnings = vec![];
        let mut minimized = Vec::with_capacity(updates.len());
        for (k, up) in updates.iter().enumerate() {
            if up.function.arity() != up.args.len() {
                return Err(Error::Dimension(format!(
                    "x{}: function arity {} but {} arguments",
                    states[k],
                    up.function.arity(),
                    up.args.len()
                )));
            }
            if !is_strictly_sorted(&up.args) {
                return Err(Error::invalid(format!("x{}: arguments must be unique and in canonical order", states[k])));
            }
            let (m, dropped) = up.minimized();
            for d in dropped {
                warnings.push(format!("x{}: argument {d} is not essential and was dropped", states[k]));
            }
            minimized.push(m);
        }
        let mut net = BooleanNetwork { name: name.to_string(), states, generators, updates: minimized, slots: vec![] };
        net.slots = net
            .updates
            .iter()
            .map(|up| {
                up.args
                    .iter()
                    .map(|a| net.slot(*a).ok_or_else(|| Error::invalid(format!("unknown node {a}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok((net, warnings))
    }

    fn slot(&self, id: NodeId) -> Option<Slot> {
        match id.kind {
            NodeKind::Generator => self.generators.binary_search(&id.index).ok().map(Slot::Gen),
            NodeKind::State => self.states.binary_search(&id.index).ok().map(Slot::State),
        }
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.generators.len()
    }

    pub fn state_indices(&self) -> &[usize] {
        &self.states
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn state_nodes(&self) -> Vec<NodeId> {
        self.states.iter().map(|&i| NodeId::state(i)).collect()
    }

    pub fn generator_nodes(&self) -> Vec<NodeId> {
        self.generators.iter().map(|&i| NodeId::generator(i)).collect()
    }

    pub fn updates(&self) -> &[Update] {
        &self.updates
    }

    /// Position of a state node in the state vector.
    pub fn state_position(&self, index: usize) -> Option<usize> {
        self.states.binary_search(&index).ok()
    }

    pub fn generator_position(&self, index: usize) -> Option<usize> {
        self.generators.binary_search(&index).ok()
    }

    pub fn update_of(&self, index: usize) -> Option<&Update> {
        self.state_position(index).map(|p| &self.updates[p])
    }

    /// Returns a copy with the update of state node `index` replaced.
    pub fn with_update(&self, index: usize, update: Update) -> Result<Self> {
        let p = self.state_position(index).ok_or_else(|| Error::invalid(format!("no state node x{index}")))?;
        let mut updates = self.updates.clone();
        updates[p] = update;
        Self::new(&self.name, self.states.clone(), self.generators.clone(), updates)
    }

    /// Returns a copy with extra generators declared.
    pub fn with_generators(&self, extra: &[usize]) -> Result<Self> {
        let mut generators = self.generators.clone();
        generators.extend_from_slice(extra);
        generators.sort_unstable();
        Self::new(&self.name, self.states.clone(), generators, self.updates.clone())
    }

    /// Value of update `k` given the current state and input.
    pub fn eval_node(&self, k: usize, x: &[bool], u: &[bool]) -> bool {
        let up = &self.updates[k];
        let mut col = 0usize;
        for s in &self.slots[k] {
            let v = match *s {
                Slot::Gen(i) => u[i],
                Slot::State(i) => x[i],
            };
            col = (col << 1) | usize::from(!v);
        }
        up.function.eval_column(col)
    }

    /// One synchronous step `x(t+1) = F(x(t), u(t))`.
    pub fn step(&self, x: &[bool], u: &[bool]) -> Vec<bool> {
        (0..self.n()).map(|k| self.eval_node(k, x, u)).collect()
    }

    pub fn wiring_graph(&self) -> WiringGraph {
        let mut vertices = self.generator_nodes();
        vertices.extend(self.state_nodes());
        let edges: Vec<(NodeId, NodeId)> = self
            .updates
            .iter()
            .zip(&self.states)
            .flat_map(|(up, &k)| up.args.iter().map(move |&a| (a, NodeId::state(k))))
            .collect();
        WiringGraph::new(vertices, &edges).expect("arguments are declared nodes")
    }

    /// `L` (`2^n × 2^n`) for a network without generators, otherwise
    /// `L̃` (`2^n × 2^{m+n}`) with the input product preceding the state.
    pub fn assr_transition(&self, cap: u128) -> Result<LogicalMatrix> {
        let (n, m) = (self.n(), self.m());
        check_cap("state-space size", 1u128 << (n + m).min(127), cap)?;
        let (nx, nu) = (1usize << n, 1usize << m);
        let mut cols = Vec::with_capacity(nx * nu);
        for cu in 0..nu {
            let u = bits_of(m, cu);
            for cx in 0..nx {
                let x = bits_of(n, cx);
                cols.push(column_of(&self.step(&x, &u)));
            }
        }
        LogicalMatrix::new(nx, cols)
    }

    /// Every network with the same state/generator sets whose node functions
    /// are minimal over exactly the same argument lists.
    pub fn enumerate_equivalent(&self, max_arity: usize, cap: u128) -> Result<EquivalenceClass> {
        let mut choices = Vec::with_capacity(self.n());
        let mut size: u128 = 1;
        for (k, up) in self.updates.iter().enumerate() {
            let d = up.args.len();
            if d > max_arity {
                return Err(Error::ArityCap { node: format!("x{}", self.states[k]), arity: d, cap: max_arity });
            }
            let fs = if d == 0 { vec![up.function.clone()] } else { minimal_functions(d)? };
            size = size.saturating_mul(fs.len() as u128);
            check_cap("equivalence class", size, cap)?;
            choices.push(fs);
        }
        Ok(EquivalenceClass { base: self.clone(), choices, counter: vec![0; self.n()], done: false, size })
    }

    pub fn to_bn_string(&self) -> String {
        crate::bnfile::serialize_network(self)
    }
}

fn is_strictly_sorted<T: Ord>(v: &[T]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// All Boolean functions of the given positive arity with every argument
/// essential, in truth-table order.
pub fn minimal_functions(arity: usize) -> Result<Vec<BooleanFunction>> {
    if arity == 0 {
        return Err(Error::invalid("no minimal function exists for a positive in-degree of zero arguments"));
    }
    if arity > 4 {
        return Err(Error::CapExceeded { what: "minimal-function arity", size: arity as u128, cap: 4 });
    }
    let len = 1usize << arity;
    Ok((0u64..1u64 << len)
        .map(|code| {
            let table = (0..len).map(|s| code >> (len - 1 - s) & 1 == 1).collect();
            BooleanFunction::new(arity, table).expect("arity within cap")
        })
        .filter(BooleanFunction::is_minimal)
        .collect())
}

/// Iterator over a structural-equivalence class (mixed-radix counter).
#[derive(Debug)]
pub struct EquivalenceClass {
    base: BooleanNetwork,
    choices: Vec<Vec<BooleanFunction>>,
    counter: Vec<usize>,
    done: bool,
    size: u128,
}

impl EquivalenceClass {
    pub fn size(&self) -> u128 {
        self.size
    }
}

impl Iterator for EquivalenceClass {
    type Item = BooleanNetwork;

    fn next(&mut self) -> Option<BooleanNetwork> {
        if self.done {
            return None;
        }
        let mut net = self.base.clone();
        for (k, &c) in self.counter.iter().enumerate() {
            net.updates[k].function = self.choices[k][c].clone();
        }
        // advance
        let mut k = 0;
        loop {
            if k == self.counter.len() {
                self.done = true;
                break;
            }
            self.counter[k] += 1;
            if self.counter[k] < self.choices[k].len() {
                break;
            }
            self.counter[k] = 0;
            k += 1;
        }
        Some(net)
    }
}

/// A network that switches i.i.d. between modes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilisticBooleanNetwork {
    pub name: String,
    modes: Vec<BooleanNetwork>,
    probabilities: Vec<f64>,
}

impl ProbabilisticBooleanNetwork {
    pub fn new(name: &str, modes: Vec<BooleanNetwork>, probabilities: Vec<f64>) -> Result<Self> {
        if modes.is_empty() || modes.len() != probabilities.len() {
            return Err(Error::invalid("one probability per mode is required"));
        }
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| !p.is_finite() || p <= 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Probability { sum });
        }
        let first = &modes[0];
        if modes.iter().any(|m| m.states != first.states || m.generators != first.generators) {
            return Err(Error::invalid("all modes must share the same state and input nodes"));
        }
        Ok(ProbabilisticBooleanNetwork { name: name.to_string(), modes, probabilities })
    }

    pub fn modes(&self) -> &[BooleanNetwork] {
        &self.modes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn n(&self) -> usize {
        self.modes[0].n()
    }

    pub fn m(&self) -> usize {
        self.modes[0].m()
    }

    pub fn to_bn_string(&self) -> String {
        crate::bnfile::serialize_pbn(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> BooleanNetwork {
        BooleanNetwork::new(
            "chain",
            vec![1, 2],
            vec![1],
            vec![
                Update::new(vec![NodeId::generator(1)], BooleanFunction::projection(1, 0)),
                Update::new(vec![NodeId::state(1)], BooleanFunction::projection(1, 0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn minimal_function_counts() {
        assert_eq!(minimal_functions(1).unwrap().len(), 2);
        assert_eq!(minimal_functions(2).unwrap().len(), 10);
        assert_eq!(minimal_functions(3).unwrap().len(), 218);
        assert!(minimal_functions(0).is_err());
    }

    #[test]
    fn wiring_graph_of_chain() {
        let g = chain().wiring_graph();
        let edges = g.edges();
        assert_eq!(edges, vec![(NodeId::generator(1), NodeId::state(1)), (NodeId::state(1), NodeId::state(2))]);
    }

    #[test]
    fn assr_of_input_copy() {
        let net = BooleanNetwork::new(
            "copy",
            vec![1],
            vec![1],
            vec![Update::new(vec![NodeId::generator(1)], BooleanFunction::projection(1, 0))],
        )
        .unwrap();
        assert_eq!(net.assr_transition(1 << 20).unwrap().delta(), vec![1, 1, 2, 2]);
    }

    #[test]
    fn assr_of_negation_and_identity() {
        let neg = BooleanNetwork::new(
            "neg",
            vec![1],
            vec![],
            vec![Update::new(vec![NodeId::state(1)], BooleanFunction::not())],
        )
        .unwrap();
        assert_eq!(neg.assr_transition(1 << 20).unwrap().delta(), vec![2, 1]);
        let id = BooleanNetwork::new(
            "id",
            vec![1, 2],
            vec![],
            vec![
                Update::new(vec![NodeId::state(1)], BooleanFunction::projection(1, 0)),
                Update::new(vec![NodeId::state(2)], BooleanFunction::projection(1, 0)),
            ],
        )
        .unwrap();
        assert_eq!(id.assr_transition(1 << 20).unwrap().delta(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn non_essential_arguments_are_dropped() {
        let f = BooleanFunction::from_fn(2, |x| x[0]).unwrap();
        let (net, warnings) = BooleanNetwork::build(
            "t",
            vec![1, 2],
            vec![],
            vec![
                Update::new(vec![NodeId::state(1), NodeId::state(2)], f),
                Update::constant(true),
            ],
        )
        .unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(net.updates()[0].args, vec![NodeId::state(1)]);
    }

    #[test]
    fn equivalence_class_size_and_graph() {
        let net = chain();
        let class: Vec<_> = net.enumerate_equivalent(3, DEFAULT_CLASS_CAP).unwrap().collect();
        assert_eq!(class.len(), 4);
        for member in &class {
            assert_eq!(member.wiring_graph(), net.wiring_graph());
        }
    }

    #[test]
    fn equivalence_class_cap() {
        let net = chain();
        assert!(net.enumerate_equivalent(3, 3).unwrap_err().is_cap());
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let net = chain();
        let err = ProbabilisticBooleanNetwork::new("p", vec![net.clone(), net], vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::Probability { .. }));
    }
}
