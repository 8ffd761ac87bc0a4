//! Minimum node control: single-source-channel aggregation, the reduction
//! rules, the constraint matrices `M̄`, `M̃` over canonical vectors, an exact
//! per-block solver, a subset-enumeration oracle and the vertex-cover
//! instances used to exercise the NP-hard core.

use crate::error::{check_cap, Error, Result};
use crate::graph::{simple_cycles, strongly_connected_components, WiringGraph, DEFAULT_CYCLE_CAP};
use crate::logic::{bits_of, column_of, dummy_matrix, stp, swap_matrix, DenseMatrix, LogicalMatrix};
use crate::network::{BooleanNetwork, NodeId};
use crate::structural::check_structural_controllability;
use serde::Serialize;
use std::collections::BTreeSet;

/// Default cap on free (undecided) variables per block.
pub const DEFAULT_FREE_CAP: usize = 20;
/// Default cap on `n` for materialized constraint matrices (`2 × 2^n`).
pub const DEFAULT_MATRIX_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AggregationPartition {
    pub blocks: Vec<Vec<NodeId>>,
    /// Block-index pairs `(i, j)` with an edge from block `i` into block `j`.
    pub aggregated_edges: Vec<(usize, usize)>,
}

impl AggregationPartition {
    pub fn block_of(&self, v: NodeId) -> Option<usize> {
        self.blocks.iter().position(|b| b.binary_search(&v).is_ok())
    }
}

/// Validates a partition as a single-source-channel aggregation whose blocks
/// keep every strongly connected component intact.
pub fn build_aggregation(g: &WiringGraph, blocks: &[Vec<NodeId>]) -> Result<AggregationPartition> {
    let n = g.num_vertices();
    let mut block_of = vec![usize::MAX; n];
    for (b, vs) in blocks.iter().enumerate() {
        if vs.is_empty() {
            return Err(Error::invalid("blocks not a partition: empty block"));
        }
        for &v in vs {
            let i = g.position(v).ok_or_else(|| Error::invalid(format!("blocks not a partition: unknown vertex {v}")))?;
            if block_of[i] != usize::MAX {
                return Err(Error::invalid(format!("blocks not a partition: {v} appears twice")));
            }
            block_of[i] = b;
        }
    }
    if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
        return Err(Error::invalid(format!("blocks not a partition: {} is not covered", g.vertex(i))));
    }
    for comp in strongly_connected_components(g.adjacency()) {
        if comp.iter().any(|&v| block_of[v] != block_of[comp[0]]) {
            return Err(Error::invalid("SCC split across blocks"));
        }
    }
    let k = blocks.len();
    let mut succ: Vec<Option<usize>> = vec![None; k];
    let mut target_of: Vec<Option<usize>> = vec![None; n];
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for &j in g.out_neighbors(i) {
            let (bi, bj) = (block_of[i], block_of[j]);
            if bi == bj {
                continue;
            }
            match succ[bi] {
                Some(s) if s != bj => {
                    return Err(Error::invalid(format!(
                        "channel property violated at edge ({},{})",
                        g.vertex(i),
                        g.vertex(j)
                    )))
                }
                _ => succ[bi] = Some(bj),
            }
            match target_of[i] {
                Some(t) if t != j => {
                    return Err(Error::invalid(format!("single-source property violated at vertex {}", g.vertex(i))))
                }
                _ => target_of[i] = Some(j),
            }
            edges.insert((bi, bj));
        }
    }
    // at most one successor per block: the block graph is a functional graph,
    // so a cycle shows up as a walk that revisits a block
    for start in 0..k {
        let mut seen = vec![false; k];
        let mut b = start;
        while let Some(s) = succ[b] {
            if seen[s] {
                return Err(Error::invalid("aggregated graph cyclic"));
            }
            seen[s] = true;
            b = s;
        }
    }
    let mut sorted: Vec<Vec<NodeId>> = blocks.to_vec();
    for b in &mut sorted {
        b.sort_unstable();
    }
    Ok(AggregationPartition { blocks: sorted, aggregated_edges: edges.into_iter().collect() })
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    /// Joins keeping the lower root; true when the sets were distinct.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.0[hi] = lo;
        true
    }
}

/// Merges until every block condition holds — each vertex's out-neighbours
/// share a block, SCCs stay whole, each block has at most one successor
/// block, inter-block edges leave a vertex towards a single target, the
/// block graph is acyclic — then folds every block joined to its successor
/// by exactly one edge into that successor (so chains collapse). Blocks are
/// ordered by their lowest vertex.
pub fn auto_aggregate(g: &WiringGraph) -> AggregationPartition {
    let n = g.num_vertices();
    let mut uf = UnionFind((0..n).collect());
    for comp in strongly_connected_components(g.adjacency()) {
        for w in comp.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    for i in 0..n {
        for w in g.out_neighbors(i).windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    loop {
        let mut changed = false;
        // several successor blocks → merge them
        let mut first_succ: Vec<Option<usize>> = vec![None; n];
        for i in 0..n {
            for &j in g.out_neighbors(i) {
                let (bi, bj) = (uf.find(i), uf.find(j));
                if bi == bj {
                    continue;
                }
                match first_succ[bi] {
                    None => first_succ[bi] = Some(j),
                    Some(s) => changed |= uf.union(s, j),
                }
            }
        }
        // a vertex sending inter-block edges to two targets joins them
        for i in 0..n {
            let outs = g.out_neighbors(i);
            let inter: Vec<usize> = outs.iter().copied().filter(|&j| uf.find(j) != uf.find(i)).collect();
            if inter.len() > 1 {
                changed |= uf.union(i, inter[0]);
            }
        }
        // cycles in the block graph
        let mut block_adj: Vec<Vec<usize>> = vec![vec![]; n];
        for i in 0..n {
            for &j in g.out_neighbors(i) {
                let (bi, bj) = (uf.find(i), uf.find(j));
                if bi != bj {
                    block_adj[bi].push(bj);
                }
            }
        }
        for comp in strongly_connected_components(&block_adj) {
            for w in comp.windows(2) {
                changed |= uf.union(w[0], w[1]);
            }
        }
        if !changed {
            break;
        }
    }
    // coarsen: a block linked to its successor by a single edge joins it
    loop {
        let mut crossing: std::collections::BTreeMap<(usize, usize), usize> = Default::default();
        for i in 0..n {
            for &j in g.out_neighbors(i) {
                let (bi, bj) = (uf.find(i), uf.find(j));
                if bi != bj {
                    *crossing.entry((bi, bj)).or_default() += 1;
                }
            }
        }
        let Some((&(bi, bj), _)) = crossing.iter().find(|(_, &c)| c == 1) else { break };
        uf.union(bi, bj);
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<NodeId>> = Default::default();
    for i in 0..n {
        let r = uf.find(i);
        groups.entry(r).or_default().push(g.vertex(i));
    }
    // roots are the lowest member, so map order is lowest-vertex order
    let blocks: Vec<Vec<NodeId>> = groups.into_values().collect();
    build_aggregation(g, &blocks).expect("merging to a fixpoint yields a valid aggregation")
}

/// Forced (`W₁`) and excluded (`W₂`) state nodes.
///
/// 1. in-degree 0 → forced; 5. self-loop → forced;
/// 2. `b` whose unique in-neighbour `a` has `b` as its only out-neighbour →
///    excluded (on an isolated cycle where every vertex qualifies, the lowest
///    vertex is left undecided);
/// 3. (and 4.) a vertex with out-degree ≥ 2 and at least one acyclic child
///    whose only in-neighbour it is: the highest such child is excluded and
///    every other out-neighbour forced.
///
/// Each rule has an exchange argument preserving some optimum, and the rules
/// never touch the same vertex twice, so one pass suffices.
pub fn reduction_rules(g: &WiringGraph) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
    let n = g.num_vertices();
    let on_cycle = cycle_membership(g);
    let mut forced = vec![false; n];
    let mut excluded = vec![false; n];
    for i in (0..n).filter(|&i| !g.is_generator(i)) {
        if g.in_neighbors(i).is_empty() || g.has_self_loop(i) {
            forced[i] = true;
        }
    }
    let strict = |b: usize| -> bool {
        !g.is_generator(b)
            && !g.has_self_loop(b)
            && g.in_neighbors(b).len() == 1
            && g.out_neighbors(g.in_neighbors(b)[0]).len() == 1
    };
    let mut rule2 = vec![false; n];
    for b in 0..n {
        rule2[b] = strict(b);
    }
    // isolated cycles: every vertex of the SCC qualifies under rule 2
    for comp in strongly_connected_components(g.adjacency()) {
        if comp.len() > 1 && comp.iter().all(|&v| rule2[v]) {
            rule2[*comp.iter().min().expect("non-empty")] = false;
        }
    }
    for b in 0..n {
        if rule2[b] {
            excluded[b] = true;
        }
    }
    for v in 0..n {
        let outs = g.out_neighbors(v);
        if outs.len() < 2 {
            continue;
        }
        let free: Vec<usize> =
            outs.iter().copied().filter(|&c| c != v && g.in_neighbors(c) == [v] && !on_cycle[c]).collect();
        if let Some(&keep) = free.last() {
            excluded[keep] = true;
            for &c in outs.iter().filter(|&&c| c != keep) {
                forced[c] = true;
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| forced[i] && excluded[i]) {
        return Err(Error::invalid(format!("contradiction: {} is both forced and excluded", g.vertex(i))));
    }
    let pick = |m: &[bool]| (0..n).filter(|&i| m[i]).map(|i| g.vertex(i)).collect();
    Ok((pick(&forced), pick(&excluded)))
}

fn cycle_membership(g: &WiringGraph) -> Vec<bool> {
    let mut on = vec![false; g.num_vertices()];
    for comp in strongly_connected_components(g.adjacency()) {
        if comp.len() > 1 || g.has_self_loop(comp[0]) {
            for v in comp {
                on[v] = true;
            }
        }
    }
    on
}

/// `M̄` (2 × 2ⁿ), one `M̃ᵢ` per cycle, and the feasible canonical indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintMatrices {
    pub n: usize,
    pub m_bar: DenseMatrix,
    pub m_tilde: Vec<DenseMatrix>,
    /// 1-based indices `s` with `δ_{2ⁿ}^s` feasible.
    pub feasible: Vec<usize>,
}

impl ConstraintMatrices {
    /// `J₁ ⋉ M̄` as a row.
    pub fn j1_m_bar(&self) -> Vec<f64> {
        self.m_bar.row(0).to_vec()
    }

    pub fn j1_m_tilde(&self, cycle: usize) -> Vec<f64> {
        self.m_tilde[cycle].row(0).to_vec()
    }
}

/// Decision vector of the 1-based canonical index `s`: `ς_j = 1` ⇔ the
/// `j`-th factor of `δ_{2ⁿ}^s` is `δ₂¹`.
pub fn sigma_of_index(n: usize, s: usize) -> Vec<bool> {
    bits_of(n, s - 1)
}

pub fn index_of_sigma(sigma: &[bool]) -> usize {
    column_of(sigma) + 1
}

/// `M_j = Ψ^{n−1} ⋉ W`, the logical matrix extracting the `j`-th factor
/// (1-based) of a product of `n` Boolean canonical vectors.
pub fn factor_extractor(n: usize, j: usize) -> Result<LogicalMatrix> {
    if j == 0 || j > n {
        return Err(Error::Dimension(format!("factor {j} of {n}")));
    }
    let mut psi = LogicalMatrix::identity(2);
    for _ in 1..n {
        psi = stp(&psi, &dummy_matrix())?;
    }
    stp(&psi, &swap_matrix(1 << (n - j), 1 << j)?)
}

/// Builds the constraint matrices over `n` columns from the row adjacency
/// `a` (`a[i][j] = 1` when row vertex `i` points to column `j`) and cycle
/// indicators, then lists every index with `J₁M̄ ∈ {0,1}`, `J₁M̃ᵢ ≠ 0` for all
/// cycles, forced columns selected and excluded columns unselected.
pub fn constraint_matrices(
    a: &[Vec<u8>],
    cycles: &[Vec<u8>],
    forced: &[usize],
    excluded: &[usize],
    cap: usize,
) -> Result<ConstraintMatrices> {
    let n = a.first().or(cycles.first()).map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Dimension("constraint matrices need at least one column".into()));
    }
    check_cap("constraint-matrix variables", n as u128, cap as u128)?;
    if a.iter().chain(cycles).any(|r| r.len() != n) {
        return Err(Error::Dimension("ragged adjacency".into()));
    }
    let cols = 1usize << n;
    let mj: Vec<DenseMatrix> = (1..=n).map(|j| factor_extractor(n, j).map(|m| m.to_dense())).collect::<Result<_>>()?;
    let mut top = DenseMatrix::zeros(2, cols);
    for c in 0..cols {
        top.set(0, c, 1.0);
    }
    let mut m_bar: Option<DenseMatrix> = None;
    for row in a {
        let mut mi = DenseMatrix::zeros(2, cols);
        for (j, &aij) in row.iter().enumerate() {
            if aij != 0 {
                mi = mi.add(&top.sub(&mj[j])?.scale(f64::from(aij)))?;
            }
        }
        m_bar = Some(match m_bar {
            None => mi,
            Some(acc) => acc.max(&mi)?,
        });
    }
    let m_bar = m_bar.unwrap_or_else(|| DenseMatrix::zeros(2, cols));
    let mut m_tilde = vec![];
    for gamma in cycles {
        let mut mi = DenseMatrix::zeros(2, cols);
        for (j, &g) in gamma.iter().enumerate() {
            if g != 0 {
                mi = mi.add(&mj[j].scale(f64::from(g)))?;
            }
        }
        m_tilde.push(mi);
    }
    let feasible = (0..cols)
        .filter(|&c| {
            let sigma = bits_of(n, c);
            let out_ok = matches!(m_bar.get(0, c), v if v == 0.0 || v == 1.0);
            out_ok
                && m_tilde.iter().all(|m| m.get(0, c) != 0.0)
                && forced.iter().all(|&j| sigma[j])
                && excluded.iter().all(|&j| !sigma[j])
        })
        .map(|c| c + 1)
        .collect();
    Ok(ConstraintMatrices { n, m_bar, m_tilde, feasible })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSelection {
    pub vertices: Vec<NodeId>,
    /// Decision columns: the block's state nodes, ascending.
    pub columns: Vec<NodeId>,
    pub forced: Vec<NodeId>,
    pub excluded: Vec<NodeId>,
    pub cycles: usize,
    pub sigma: Vec<bool>,
    /// Number of feasible assignments among the `2^free` enumerated ones.
    pub feasible_count: u64,
    pub free: usize,
}

impl BlockSelection {
    pub fn selected(&self) -> Vec<NodeId> {
        self.columns.iter().zip(&self.sigma).filter(|(_, &s)| s).map(|(&v, _)| v).collect()
    }

    /// 1-based canonical index of the chosen `ς`.
    pub fn index(&self) -> Option<usize> {
        (self.columns.len() < usize::BITS as usize).then(|| index_of_sigma(&self.sigma))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControlSelection {
    pub partition: AggregationPartition,
    pub blocks: Vec<BlockSelection>,
    pub lambda: Vec<NodeId>,
    pub n_star: usize,
    pub verified: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct MinControlOptions {
    pub free_cap: usize,
    pub cycle_cap: usize,
}

impl Default for MinControlOptions {
    fn default() -> Self {
        MinControlOptions { free_cap: DEFAULT_FREE_CAP, cycle_cap: DEFAULT_CYCLE_CAP }
    }
}

pub fn minimum_control(net: &BooleanNetwork) -> Result<ControlSelection> {
    minimum_control_graph(&net.wiring_graph(), MinControlOptions::default())
}

/// Exact minimum control set: aggregate, apply the reduction rules, solve
/// each block over its undecided columns, and verify the union.
pub fn minimum_control_graph(g: &WiringGraph, opts: MinControlOptions) -> Result<ControlSelection> {
    let partition = auto_aggregate(g);
    let (w1, w2) = reduction_rules(g)?;
    let mut blocks = vec![];
    for block in &partition.blocks {
        blocks.push(solve_block(g, block, &w1, &w2, opts)?);
    }
    let mut lambda: Vec<NodeId> = blocks.iter().flat_map(BlockSelection::selected).collect();
    lambda.sort_unstable();
    let verified = check_structural_controllability(&g.with_controlled(&lambda)).structurally_controllable;
    if !verified {
        return Err(Error::invalid("internal inconsistency: selected set fails the structural check"));
    }
    Ok(ControlSelection { n_star: lambda.len(), partition, blocks, lambda, verified })
}

fn solve_block(
    g: &WiringGraph,
    block: &[NodeId],
    w1: &[NodeId],
    w2: &[NodeId],
    opts: MinControlOptions,
) -> Result<BlockSelection> {
    let columns: Vec<NodeId> = block.iter().copied().filter(|v| !v.is_generator()).collect();
    let col_of = |v: NodeId| columns.binary_search(&v).ok();
    let mut rows: Vec<Vec<usize>> = vec![];
    for i in 0..g.num_vertices() {
        let outs = g.out_neighbors(i);
        if !outs.is_empty() && outs.iter().all(|&j| col_of(g.vertex(j)).is_some()) {
            rows.push(outs.iter().map(|&j| col_of(g.vertex(j)).expect("checked")).collect());
        }
    }
    let sub = g.induced(block);
    let cycles: Vec<Vec<usize>> = simple_cycles(sub.adjacency(), opts.cycle_cap)?
        .into_iter()
        .map(|c| c.into_iter().map(|i| col_of(sub.vertex(i)).expect("cycles avoid generators")).collect())
        .collect();
    let forced: Vec<NodeId> = columns.iter().copied().filter(|v| w1.contains(v)).collect();
    let excluded: Vec<NodeId> = columns.iter().copied().filter(|v| w2.contains(v)).collect();
    let free: Vec<usize> =
        (0..columns.len()).filter(|&j| !forced.contains(&columns[j]) && !excluded.contains(&columns[j])).collect();
    check_cap("free variables per block", free.len() as u128, opts.free_cap as u128)?;
    let mut base = vec![false; columns.len()];
    for v in &forced {
        base[col_of(*v).expect("column")] = true;
    }
    let mut best: Option<Vec<bool>> = None;
    let mut feasible_count = 0u64;
    for mask in 0..1u64 << free.len() {
        let mut sigma = base.clone();
        for (b, &j) in free.iter().enumerate() {
            sigma[j] = (mask >> b) & 1 == 1;
        }
        let out_ok = rows.iter().all(|r| r.iter().filter(|&&j| !sigma[j]).count() <= 1);
        let cyc_ok = cycles.iter().all(|c| c.iter().any(|&j| sigma[j]));
        if !(out_ok && cyc_ok) {
            continue;
        }
        feasible_count += 1;
        let better = match &best {
            None => true,
            Some(b) => {
                let (pc, pb) = (sigma.iter().filter(|&&s| s).count(), b.iter().filter(|&&s| s).count());
                pc < pb || (pc == pb && sigma < *b)
            }
        };
        if better {
            best = Some(sigma);
        }
    }
    let sigma = best.ok_or_else(|| Error::invalid("no feasible selection"))?;
    Ok(BlockSelection {
        vertices: block.to_vec(),
        columns,
        forced,
        excluded,
        cycles: cycles.len(),
        sigma,
        feasible_count,
        free: free.len(),
    })
}

/// Smallest set of state nodes whose control makes the graph pass the
/// structural check, by enumerating subsets in increasing cardinality
/// (lexicographic within a cardinality).
pub fn minimum_control_oracle(g: &WiringGraph, cap_n: usize) -> Result<Vec<NodeId>> {
    let states: Vec<NodeId> = g.vertices().iter().copied().filter(|v| !v.is_generator()).collect();
    check_cap("oracle state nodes", states.len() as u128, cap_n as u128)?;
    let n = states.len();
    for k in 0..=n {
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let set: Vec<NodeId> = idx.iter().map(|&i| states[i]).collect();
            if check_structural_controllability(&g.with_controlled(&set)).structurally_controllable {
                return Ok(set);
            }
            // next combination
            let Some(p) = (0..k).rev().find(|&p| idx[p] < n - k + p) else { break };
            idx[p] += 1;
            for q in p + 1..k {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    unreachable!("controlling every state node always passes")
}

/// Instance of the reduction from vertex cover: one state node per
/// non-isolated vertex, a copy `v′` per vertex carrying a loop edge, and one
/// self-looped node per edge pointing at its two endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VertexCoverInstance {
    pub graph: WiringGraph,
    /// `(node, original vertex)` for vertex nodes and their copies.
    pub vertex_nodes: Vec<(NodeId, usize)>,
    pub edge_nodes: Vec<NodeId>,
}

impl VertexCoverInstance {
    /// Original vertices hit by a control set (edge nodes dropped, copies
    /// mapped back).
    pub fn cover_from_control(&self, control: &[NodeId]) -> Vec<usize> {
        let mut cover: Vec<usize> =
            self.vertex_nodes.iter().filter(|(node, _)| control.contains(node)).map(|&(_, v)| v).collect();
        cover.sort_unstable();
        cover.dedup();
        cover
    }
}

pub fn vertex_cover_instance(num_vertices: usize, edges: &[(usize, usize)]) -> VertexCoverInstance {
    let mut edges: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    edges.sort_unstable();
    edges.dedup();
    let mut used: Vec<usize> = edges.iter().flat_map(|&(a, b)| [a, b]).filter(|&v| v < num_vertices).collect();
    used.sort_unstable();
    used.dedup();
    let mut next = 0usize;
    let mut fresh = || {
        next += 1;
        NodeId::state(next)
    };
    let mut vertex_nodes: Vec<(NodeId, usize)> = used.iter().map(|&v| (fresh(), v)).collect();
    let node_of = |v: usize, vn: &[(NodeId, usize)]| vn.iter().find(|&&(_, o)| o == v).expect("used vertex").0;
    let mut copies = vec![];
    for &(a, b) in &edges {
        if a == b {
            copies.push((fresh(), a));
        }
    }
    let mut graph_edges = vec![];
    let mut edge_nodes = vec![];
    for &(a, b) in edges.iter().filter(|&&(a, _)| a < num_vertices) {
        let e = fresh();
        edge_nodes.push(e);
        graph_edges.push((e, e));
        graph_edges.push((e, node_of(a, &vertex_nodes)));
        let second = if a == b { copies.iter().find(|&&(_, o)| o == a).expect("copy").0 } else { node_of(b, &vertex_nodes) };
        graph_edges.push((e, second));
    }
    vertex_nodes.extend(copies);
    let vertices: Vec<NodeId> = vertex_nodes.iter().map(|&(v, _)| v).chain(edge_nodes.iter().copied()).collect();
    let graph = WiringGraph::new(vertices, &graph_edges).expect("well-formed instance");
    VertexCoverInstance { graph, vertex_nodes, edge_nodes }
}
