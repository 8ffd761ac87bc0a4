//! Wiring graphs and the graph algorithms used throughout: strongly
//! connected components, elementary cycles, topological order, node
//! classification and root in-tree decomposition.

use crate::error::{check_cap, Error, Result};
use crate::network::NodeId;
use serde::Serialize;
use std::collections::HashMap;

/// Default cap on the number of enumerated elementary cycles.
pub const DEFAULT_CYCLE_CAP: usize = 100_000;

/// Directed graph over generators and state nodes.
///
/// Vertices are kept sorted (generators first); adjacency lists hold vertex
/// positions, sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WiringGraph {
    vertices: Vec<NodeId>,
    out: Vec<Vec<usize>>,
    inn: Vec<Vec<usize>>,
}

impl WiringGraph {
    pub fn new(mut vertices: Vec<NodeId>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("duplicate vertex"));
        }
        let pos: HashMap<NodeId, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut out = vec![vec![]; vertices.len()];
        for (a, b) in edges {
            let (Some(&i), Some(&j)) = (pos.get(a), pos.get(b)) else {
                return Err(Error::invalid(format!("edge ({a},{b}) uses an unknown vertex")));
            };
            if b.is_generator() {
                return Err(Error::invalid(format!("generator {b} cannot have in-edges")));
            }
            out[i].push(j);
        }
        Ok(Self::from_adjacency(vertices, out))
    }

    /// Builds from sorted vertices and position-based out-lists.
    pub fn from_adjacency(vertices: Vec<NodeId>, mut out: Vec<Vec<usize>>) -> Self {
        let mut inn = vec![vec![]; vertices.len()];
        for (i, list) in out.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &j in list.iter() {
                inn[j].push(i);
            }
        }
        WiringGraph { vertices, out, inn }
    }

    pub fn vertices(&self) -> &[NodeId] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn position(&self, v: NodeId) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    pub fn vertex(&self, i: usize) -> NodeId {
        self.vertices[i]
    }

    pub fn out_neighbors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn in_neighbors(&self, i: usize) -> &[usize] {
        &self.inn[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.out
    }

    pub fn is_generator(&self, i: usize) -> bool {
        self.vertices[i].is_generator()
    }

    pub fn has_self_loop(&self, i: usize) -> bool {
        self.out[i].binary_search(&i).is_ok()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        match (self.position(a), self.position(b)) {
            (Some(i), Some(j)) => self.out[i].binary_search(&j).is_ok(),
            _ => false,
        }
    }

    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |&j| (self.vertices[i], self.vertices[j])))
            .collect()
    }

    pub fn out_of(&self, v: NodeId) -> Vec<NodeId> {
        self.position(v).map_or(vec![], |i| self.out[i].iter().map(|&j| self.vertices[j]).collect())
    }

    pub fn in_of(&self, v: NodeId) -> Vec<NodeId> {
        self.position(v).map_or(vec![], |i| self.inn[i].iter().map(|&j| self.vertices[j]).collect())
    }

    pub fn without_edges(&self, removed: &[(NodeId, NodeId)]) -> WiringGraph {
        let mut out = self.out.clone();
        for &(a, b) in removed {
            if let (Some(i), Some(j)) = (self.position(a), self.position(b)) {
                out[i].retain(|&x| x != j);
            }
        }
        Self::from_adjacency(self.vertices.clone(), out)
    }

    /// Removes every in-edge of the given state nodes and feeds each from a
    /// fresh generator (numbered after the existing ones).
    pub fn with_controlled(&self, controlled: &[NodeId]) -> WiringGraph {
        let next = self.vertices.iter().filter(|v| v.is_generator()).map(|v| v.index).max().unwrap_or(0);
        let mut vertices = self.vertices.clone();
        let mut targets: Vec<NodeId> = controlled.iter().copied().filter(|v| !v.is_generator()).collect();
        targets.sort_unstable();
        targets.dedup();
        let fresh: Vec<NodeId> = (1..=targets.len()).map(|k| NodeId::generator(next + k)).collect();
        vertices.extend(&fresh);
        let mut edges: Vec<(NodeId, NodeId)> =
            self.edges().into_iter().filter(|(_, b)| targets.binary_search(b).is_err()).collect();
        edges.extend(fresh.iter().zip(&targets).map(|(&g, &t)| (g, t)));
        WiringGraph::new(vertices, &edges).expect("fresh generators are distinct")
    }

    /// Subgraph induced by the given vertices.
    pub fn induced(&self, keep: &[NodeId]) -> WiringGraph {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let edges: Vec<(NodeId, NodeId)> = self
            .edges()
            .into_iter()
            .filter(|(a, b)| keep.binary_search(a).is_ok() && keep.binary_search(b).is_ok())
            .collect();
        WiringGraph::new(keep, &edges).expect("subset of a valid graph")
    }

    pub fn strongly_connected_components(&self) -> Vec<Vec<NodeId>> {
        strongly_connected_components(&self.out)
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.vertices[i]).collect())
            .collect()
    }

    pub fn enumerate_simple_cycles(&self, cap: usize) -> Result<Vec<Vec<NodeId>>> {
        Ok(simple_cycles(&self.out, cap)?
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.vertices[i]).collect())
            .collect())
    }

    pub fn classify_nodes(&self) -> Vec<NodeClass> {
        (0..self.num_vertices())
            .map(|i| {
                let label = if self.is_generator(i) {
                    NodeLabel::Generator
                } else if self.inn[i].iter().any(|&j| self.is_generator(j)) {
                    NodeLabel::ControlNode
                } else {
                    NodeLabel::SimpleNode
                };
                NodeClass {
                    node: self.vertices[i],
                    label,
                    is_channel: !self.is_generator(i) && self.out[i].len() == 1 && !self.has_self_loop(i),
                }
            })
            .collect()
    }

    /// DOT rendering: generators as boxes, channels as ellipses, other state
    /// nodes as circles; `pinned` nodes are filled.
    pub fn to_dot(&self, name: &str, pinned: &[NodeId]) -> String {
        let classes = self.classify_nodes();
        let mut s = format!("digraph \"{name}\" {{\n");
        for c in &classes {
            let shape = match (c.label, c.is_channel) {
                (NodeLabel::Generator, _) => "box",
                (_, true) => "ellipse",
                _ => "circle",
            };
            let fill = if pinned.contains(&c.node) { ", style=filled, fillcolor=lightgray" } else { "" };
            s.push_str(&format!("  {} [shape={shape}{fill}];\n", c.node));
        }
        for (a, b) in self.edges() {
            s.push_str(&format!("  {a} -> {b};\n"));
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NodeLabel {
    Generator,
    ControlNode,
    SimpleNode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NodeClass {
    pub node: NodeId,
    pub label: NodeLabel,
    pub is_channel: bool,
}

/// Tarjan's algorithm (iterative); components come out in reverse
/// topological order of the condensation, each sorted.
pub fn strongly_connected_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = vec![];
    let mut comps = vec![];
    let mut counter = 0;
    let mut call: Vec<(usize, usize)> = vec![];
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                if index[w] == UNSEEN {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = vec![];
                loop {
                    let w = stack.pop().expect("component on stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Kahn's algorithm; `None` when the graph has a cycle.
pub fn topological_order(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut indeg = vec![0usize; n];
    for l in adj {
        for &j in l {
            indeg[j] += 1;
        }
    }
    let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &adj[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Johnson's elementary-cycle enumeration. Each cycle starts at its lowest
/// vertex; cycles are listed by start vertex, then in discovery order.
pub fn simple_cycles(adj: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = adj.len();
    let mut cycles = vec![];
    let mut blocked = vec![false; n];
    let mut bmap: Vec<Vec<usize>> = vec![vec![]; n];
    for s in 0..n {
        // strongly connected component of s within vertices ≥ s
        let sub: Vec<Vec<usize>> =
            (0..n).map(|v| if v < s { vec![] } else { adj[v].iter().copied().filter(|&w| w >= s).collect() }).collect();
        let comp = strongly_connected_components(&sub).into_iter().find(|c| c.contains(&s)).expect("s is somewhere");
        let in_comp = {
            let mut m = vec![false; n];
            for &v in &comp {
                m[v] = true;
            }
            m
        };
        if comp.len() == 1 && !adj[s].contains(&s) {
            continue;
        }
        for &v in &comp {
            blocked[v] = false;
            bmap[v].clear();
        }
        let mut path = vec![s];
        // explicit stack of (vertex, next-neighbour index, found-a-cycle flag)
        let mut stack: Vec<(usize, usize, bool)> = vec![(s, 0, false)];
        blocked[s] = true;
        while let Some(top) = stack.last_mut() {
            let (v, next) = (top.0, top.1);
            let nbrs = &adj[v];
            if next < nbrs.len() {
                top.1 += 1;
                let w = nbrs[next];
                if !in_comp[w] {
                    continue;
                }
                if w == s {
                    cycles.push(path.clone());
                    check_cap("cycle count", cycles.len() as u128, cap as u128)?;
                    top.2 = true;
                } else if !blocked[w] {
                    blocked[w] = true;
                    path.push(w);
                    stack.push((w, 0, false));
                }
                continue;
            }
            let (v, _, found) = stack.pop().expect("non-empty");
            path.pop();
            if found {
                unblock(v, &mut blocked, &mut bmap);
            } else {
                for &w in &adj[v] {
                    if in_comp[w] && !bmap[w].contains(&v) {
                        bmap[w].push(v);
                    }
                }
            }
            if let Some(parent) = stack.last_mut() {
                parent.2 |= found;
            }
        }
    }
    Ok(cycles)
}

fn unblock(u: usize, blocked: &mut [bool], bmap: &mut [Vec<usize>]) {
    let mut work = vec![u];
    while let Some(v) = work.pop() {
        if !blocked[v] {
            continue;
        }
        blocked[v] = false;
        work.append(&mut bmap[v]);
    }
}

/// One rooted in-tree of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InTree {
    pub root: NodeId,
    pub vertices: Vec<NodeId>,
    /// `(child, parent)` pairs.
    pub parent: Vec<(NodeId, NodeId)>,
}

/// Forest of disjoint root in-trees with root-aligned layers: every root
/// sits on layer `layer_count`, and a vertex at distance `d` from its root
/// sits on layer `layer_count − d` (state nodes land on layers ≥ 1,
/// generators on layers ≥ 0).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InTreeDecomposition {
    pub trees: Vec<InTree>,
    pub layer_of: Vec<(NodeId, usize)>,
    pub layer_count: usize,
}

impl InTreeDecomposition {
    pub fn layer(&self, v: NodeId) -> Option<usize> {
        self.layer_of.binary_search_by_key(&v, |&(n, _)| n).ok().map(|i| self.layer_of[i].1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DecompositionFailure {
    /// The reported cycle is the shortest one through the lowest vertex that
    /// lies on any cycle.
    Cyclic(Vec<NodeId>),
    EmptyInNeighborhood(NodeId),
    NonChannelInNeighbor { node: NodeId, neighbor: NodeId },
}

impl std::fmt::Display for DecompositionFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecompositionFailure::Cyclic(c) => {
                let names: Vec<String> = c.iter().map(NodeId::name).collect();
                write!(f, "cyclic: {}", names.join(" -> "))
            }
            DecompositionFailure::EmptyInNeighborhood(v) => write!(f, "state node with empty in-neighborhood: {v}"),
            DecompositionFailure::NonChannelInNeighbor { node, neighbor } => {
                write!(f, "simple node with non-channel in-neighbor: {node} <- {neighbor}")
            }
        }
    }
}

/// Shortest cycle through `start` (BFS), as a vertex sequence from `start`.
fn shortest_cycle_through(adj: &[Vec<usize>], start: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([start]);
    let mut seen = vec![false; n];
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if w == start {
                let mut cyc = vec![v];
                let mut x = v;
                while x != start {
                    x = prev[x];
                    cyc.push(x);
                }
                cyc.reverse();
                return Some(cyc);
            }
            if !seen[w] {
                seen[w] = true;
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Decides acyclicity plus the channel condition in `O(|V| + |E|)` and, on
/// success, returns the in-tree forest.
pub fn in_tree_decomposition(g: &WiringGraph) -> std::result::Result<InTreeDecomposition, DecompositionFailure> {
    let n = g.num_vertices();
    let Some(order) = topological_order(g.adjacency()) else {
        let on_cycle = strongly_connected_components(g.adjacency())
            .into_iter()
            .filter(|c| c.len() > 1 || g.has_self_loop(c[0]))
            .flatten()
            .min()
            .expect("a cyclic graph has a cycle");
        let cyc = shortest_cycle_through(g.adjacency(), on_cycle).expect("vertex lies on a cycle");
        return Err(DecompositionFailure::Cyclic(cyc.into_iter().map(|i| g.vertex(i)).collect()));
    };
    // counter[j] = number of in-neighbours of j that are channels (generators
    // with a single out-edge count as channels here)
    let mut counter = vec![0usize; n];
    for i in 0..n {
        if g.out_neighbors(i).len() == 1 && !g.has_self_loop(i) {
            counter[g.out_neighbors(i)[0]] += 1;
        }
    }
    for &j in &order {
        if g.is_generator(j) {
            continue;
        }
        let indeg = g.in_neighbors(j).len();
        if indeg == 0 {
            return Err(DecompositionFailure::EmptyInNeighborhood(g.vertex(j)));
        }
        if counter[j] != indeg {
            let bad = g
                .in_neighbors(j)
                .iter()
                .copied()
                .find(|&i| g.out_neighbors(i).len() != 1)
                .expect("some in-neighbour is not a channel");
            return Err(DecompositionFailure::NonChannelInNeighbor { node: g.vertex(j), neighbor: g.vertex(bad) });
        }
    }
    // every vertex now has out-degree ≤ 1 unless it has no successors at all
    // (a generator with out-degree ≥ 2 would have failed above)
    let mut height = vec![0usize; n];
    for &v in &order {
        if !g.is_generator(v) {
            height[v] = 1 + g.in_neighbors(v).iter().map(|&i| height[i]).max().unwrap_or(0);
        }
    }
    let roots: Vec<usize> = (0..n).filter(|&i| g.out_neighbors(i).is_empty()).collect();
    let eta = roots.iter().map(|&r| height[r]).max().unwrap_or(0);
    let mut dist = vec![0usize; n];
    let mut tree_of = vec![usize::MAX; n];
    for (t, &r) in roots.iter().enumerate() {
        tree_of[r] = t;
    }
    for &v in order.iter().rev() {
        if let Some(&p) = g.out_neighbors(v).first() {
            dist[v] = dist[p] + 1;
            tree_of[v] = tree_of[p];
        }
    }
    let mut trees: Vec<InTree> =
        roots.iter().map(|&r| InTree { root: g.vertex(r), vertices: vec![], parent: vec![] }).collect();
    for v in 0..n {
        let t = &mut trees[tree_of[v]];
        t.vertices.push(g.vertex(v));
        if let Some(&p) = g.out_neighbors(v).first() {
            t.parent.push((g.vertex(v), g.vertex(p)));
        }
    }
    let layer_of = (0..n).map(|v| (g.vertex(v), eta - dist[v])).collect();
    Ok(InTreeDecomposition { trees, layer_of, layer_count: eta })
}
