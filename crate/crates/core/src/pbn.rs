//! Probabilistic Boolean networks as finite Markov chains: transition
//! matrices, state classification, stability in probability (checked both by
//! the graph criterion and from the definitions), and the two-step pinning
//! stabilization with Monte Carlo validation.

use crate::error::{check_cap, Error, Result};
use crate::graph::{strongly_connected_components, topological_order, DEFAULT_CYCLE_CAP};
use crate::logic::{bits_of, column_of, solve_pinning_equation, BooleanFunction, DenseMatrix, PinningSolveMode};
use crate::network::{BooleanNetwork, NodeId, ProbabilisticBooleanNetwork, Update};
use crate::pinning::{design_pinning, select_gamma1, PinningOptions, PinningPlan};
use crate::structural::{synthesize_schedule, ControlSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::{HashMap, VecDeque};

/// Default cap on the number of states held in a transition model.
pub const DEFAULT_TPM_CAP: u128 = 1 << 22;
/// Largest chain checked against the definitions (scan and matrix powers).
pub const DEFAULT_DEFINITION_CAP: usize = 256;
/// States enumerated while searching for a short step-2 trajectory.
pub const DEFAULT_SEARCH_CAP: usize = 1 << 22;

/// Column-stochastic transition matrix over a set of states, stored sparse:
/// `columns[j]` lists `(i, P(x(t+1) = states[i] | x(t) = states[j]))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionModel {
    pub n: usize,
    /// Global canonical column (0-based) of each local state.
    pub states: Vec<usize>,
    pub columns: Vec<Vec<(usize, f64)>>,
}

impl TransitionModel {
    /// Explores from `seeds` (every state when `None`) through `succ`, which
    /// maps a global state to its weighted successors.
    pub fn explore(
        n: usize,
        seeds: Option<&[usize]>,
        cap: u128,
        succ: impl Fn(usize) -> Vec<(usize, f64)>,
    ) -> Result<TransitionModel> {
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut states = vec![];
        let mut queue = VecDeque::new();
        match seeds {
            None => {
                check_cap("transition-model states", 1u128 << n.min(127), cap)?;
                for s in 0..1usize << n {
                    index.insert(s, s);
                    states.push(s);
                    queue.push_back(s);
                }
            }
            Some(seeds) => {
                for &s in seeds {
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(s) {
                        e.insert(states.len());
                        states.push(s);
                        queue.push_back(s);
                    }
                }
            }
        }
        let mut columns: Vec<Vec<(usize, f64)>> = vec![];
        while let Some(s) = queue.pop_front() {
            let mut col: Vec<(usize, f64)> = vec![];
            for (t, p) in succ(s) {
                let i = match index.get(&t) {
                    Some(&i) => i,
                    None => {
                        check_cap("transition-model states", states.len() as u128 + 1, cap)?;
                        index.insert(t, states.len());
                        states.push(t);
                        queue.push_back(t);
                        states.len() - 1
                    }
                };
                match col.iter_mut().find(|(r, _)| *r == i) {
                    Some(e) => e.1 += p,
                    None => col.push((i, p)),
                }
            }
            col.sort_by_key(|&(r, _)| r);
            columns.push(col);
        }
        Ok(TransitionModel { n, states, columns })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn local(&self, global: usize) -> Option<usize> {
        self.states.iter().position(|&s| s == global)
    }

    /// Positive-probability successor lists (the STG).
    pub fn stg(&self) -> Vec<Vec<usize>> {
        self.columns.iter().map(|c| c.iter().filter(|(_, p)| *p > 0.0).map(|&(r, _)| r).collect()).collect()
    }

    pub fn max_column_defect(&self) -> f64 {
        self.columns.iter().map(|c| (c.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `𝒫 v` for a distribution `v` over the local states.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for (j, col) in self.columns.iter().enumerate() {
            if v[j] != 0.0 {
                for &(i, p) in col {
                    out[i] += p * v[j];
                }
            }
        }
        out
    }

    /// Row update `r ↦ r 𝒫`: with `r = e_αᵀ𝒫ᵗ`, gives `e_αᵀ𝒫^{t+1}`.
    pub fn apply_row(&self, r: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|col| col.iter().map(|&(i, p)| p * r[i]).sum()).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, p) in col {
                m.set(i, j, p);
            }
        }
        m
    }
}

/// `𝒫 = Σᵢ pᵢ L̆ⁱ` over the full state space of a PBN without generators.
pub fn build_tpm(pbn: &ProbabilisticBooleanNetwork, cap: u128) -> Result<TransitionModel> {
    if pbn.m() > 0 {
        return Err(Error::invalid("the network has inputs; close the loop first"));
    }
    let closed = ClosedLoopPbn::open(pbn, false);
    closed.transition_model(None, cap)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateClassification {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub recurrent: Vec<bool>,
    pub period: Vec<usize>,
}

impl StateClassification {
    pub fn recurrent_states(&self) -> Vec<usize> {
        (0..self.class_of.len()).filter(|&s| self.recurrent[self.class_of[s]]).collect()
    }
}

pub fn classify_states(tm: &TransitionModel) -> StateClassification {
    let adj = tm.stg();
    let classes = strongly_connected_components(&adj);
    let mut class_of = vec![0; tm.len()];
    for (c, members) in classes.iter().enumerate() {
        for &v in members {
            class_of[v] = c;
        }
    }
    let recurrent: Vec<bool> =
        classes.iter().enumerate().map(|(c, m)| m.iter().all(|&v| adj[v].iter().all(|&w| class_of[w] == c))).collect();
    let period = classes.iter().enumerate().map(|(c, m)| class_period(&adj, &class_of, c, m[0])).collect();
    StateClassification { class_of, classes, recurrent, period }
}

/// gcd of `level(u) + 1 − level(v)` over the class edges, levels from BFS.
fn class_period(adj: &[Vec<usize>], class_of: &[usize], c: usize, root: usize) -> usize {
    let mut level: HashMap<usize, i64> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([root]);
    let mut g = 0i64;
    let mut any_edge = false;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if class_of[v] != c {
                continue;
            }
            any_edge = true;
            match level.get(&v) {
                Some(&lv) => g = gcd(g, (level[&u] + 1 - lv).abs()),
                None => {
                    level.insert(v, level[&u] + 1);
                    queue.push_back(v);
                }
            }
        }
    }
    // a transient singleton without a self-loop has no return: report 0
    if any_edge {
        g.max(1) as usize
    } else {
        0
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Stationary distribution of a closed class (zero elsewhere), by power
/// iteration on the lazy chain `(I + 𝒫)/2` when the class is periodic.
pub fn stationary(tm: &TransitionModel, class: &[usize], periodic: bool, max_iter: usize) -> (Vec<f64>, f64) {
    let mut v = vec![0.0; tm.len()];
    for &s in class {
        v[s] = 1.0 / class.len() as f64;
    }
    let step = |v: &[f64]| -> Vec<f64> {
        let w = tm.apply(v);
        if periodic {
            w.iter().zip(v).map(|(a, b)| 0.5 * (a + b)).collect()
        } else {
            w
        }
    };
    for _ in 0..max_iter {
        let w = step(&v);
        let diff = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if diff < 1e-15 {
            break;
        }
    }
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    let residual = tm.apply(&v).iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    (v, residual)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityVerdict {
    pub target: usize,
    /// Graph criterion: target reachable from every state and aperiodic.
    pub sp: bool,
    pub reachable_from_all: bool,
    pub target_period: usize,
    /// `[μ]_α` when the criterion holds.
    pub limiting_prob_at_target: Option<f64>,
    pub stationary_residual: Option<f64>,
    /// Definitional checks (present when the chain is small enough).
    pub sp_scan: Option<bool>,
    pub sapp: Option<bool>,
    pub sspp: Option<bool>,
    pub spd: Option<bool>,
    pub snp: Option<bool>,
    pub spd_mu: Option<Vec<f64>>,
    /// Every computed verdict agrees with `sp`.
    pub consistent: bool,
}

/// Stability in probability at local state `target`.
pub fn check_sp(tm: &TransitionModel, target: usize, definition_cap: usize) -> StabilityVerdict {
    let n = tm.len();
    let adj = tm.stg();
    let mut radj = vec![vec![]; n];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            radj[v].push(u);
        }
    }
    let mut seen = vec![false; n];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(v) = queue.pop_front() {
        for &u in &radj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    let reachable_from_all = seen.iter().all(|&s| s);
    let cls = classify_states(tm);
    let c = cls.class_of[target];
    let target_period = cls.period[c];
    let sp = reachable_from_all && target_period == 1;
    let (limit, residual) = if reachable_from_all {
        let (w, r) = stationary(tm, &cls.classes[c], target_period != 1, 1_000_000);
        (Some(w[target]), Some(r))
    } else {
        (None, None)
    };
    let mut v = StabilityVerdict {
        target,
        sp,
        reachable_from_all,
        target_period,
        limiting_prob_at_target: if sp { limit } else { None },
        stationary_residual: residual,
        sp_scan: None,
        sapp: None,
        sspp: None,
        spd: None,
        snp: None,
        spd_mu: None,
        consistent: true,
    };
    if n <= definition_cap {
        definitional_checks(tm, target, &mut v);
    }
    v.consistent = [v.sp_scan, v.sapp, v.sspp, v.spd].iter().all(|x| x.is_none_or(|b| b == sp));
    v
}

/// Evaluates the definitions directly on powers of `𝒫`.
fn definitional_checks(tm: &TransitionModel, target: usize, v: &mut StabilityVerdict) {
    let n = tm.len();
    let (lo, hi) = (2 * n, 4 * n);
    // r_t = e_αᵀ 𝒫ᵗ: entry x₀ is P{x(t) = α | x(0) = x₀}
    let mut r = vec![0.0; n];
    r[target] = 1.0;
    let mut always_positive = true;
    let mut limsup = vec![0.0f64; n];
    for t in 1..=hi {
        r = tm.apply_row(&r);
        if t >= lo {
            always_positive &= r.iter().all(|&p| p > 0.0);
            for (m, &p) in limsup.iter_mut().zip(&r) {
                *m = m.max(p);
            }
        }
    }
    v.sp_scan = Some(always_positive);
    // SAPP presupposes SP
    v.sapp = Some(always_positive && limsup.iter().all(|&m| m > 1e-9));
    // limit of 𝒫ᵗ by repeated squaring
    let mut q = tm.to_dense();
    let p = q.clone();
    let mut converged = false;
    for _ in 0..64 {
        let qp = q.matmul(&p).expect("square");
        if qp.max_abs_diff(&q) < 1e-12 {
            converged = true;
            break;
        }
        q = q.matmul(&q).expect("square");
    }
    let row: Vec<f64> = (0..n).map(|j| q.get(target, j)).collect();
    v.sspp = Some(converged && row.iter().all(|&x| x > 1e-9));
    let columns_equal = (1..n).all(|j| (0..n).all(|i| (q.get(i, j) - q.get(i, 0)).abs() < 1e-9));
    let spd = converged && columns_equal;
    v.spd = Some(spd && q.get(target, 0) > 1e-9);
    if spd {
        v.spd_mu = Some((0..n).map(|i| q.get(i, 0)).collect());
    }
    v.snp = Some(always_positive && converged && row.iter().all(|&x| x <= 1e-9));
}

/// How a generator is driven in a closed-loop mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum InputLaw {
    Const(bool),
    /// State feedback: the listed value at the listed global states (sorted),
    /// `default` elsewhere.
    Waypoints { points: Vec<(usize, bool)>, default: bool },
}

impl InputLaw {
    pub fn value(&self, state: usize) -> bool {
        match self {
            InputLaw::Const(b) => *b,
            InputLaw::Waypoints { points, default } => match points.binary_search_by_key(&state, |&(s, _)| s) {
                Ok(i) => points[i].1,
                Err(_) => *default,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedLoopMode {
    pub network: BooleanNetwork,
    pub laws: Vec<InputLaw>,
}

/// A PBN whose every generator is driven by an input law, hence autonomous.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedLoopPbn {
    pub modes: Vec<ClosedLoopMode>,
    pub probabilities: Vec<f64>,
}

impl ClosedLoopPbn {
    /// Every generator held at `input`.
    pub fn open(pbn: &ProbabilisticBooleanNetwork, input: bool) -> ClosedLoopPbn {
        ClosedLoopPbn {
            modes: pbn
                .modes()
                .iter()
                .map(|m| ClosedLoopMode { network: m.clone(), laws: vec![InputLaw::Const(input); m.m()] })
                .collect(),
            probabilities: pbn.probabilities().to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.modes[0].network.n()
    }

    pub fn step(&self, mode: usize, x: &[bool]) -> Vec<bool> {
        let m = &self.modes[mode];
        let s = column_of(x);
        let u: Vec<bool> = m.laws.iter().map(|l| l.value(s)).collect();
        m.network.step(x, &u)
    }

    pub fn successors(&self, state: usize) -> Vec<(usize, f64)> {
        let x = bits_of(self.n(), state);
        (0..self.modes.len()).map(|i| (column_of(&self.step(i, &x)), self.probabilities[i])).collect()
    }

    pub fn transition_model(&self, seeds: Option<&[usize]>, cap: u128) -> Result<TransitionModel> {
        TransitionModel::explore(self.n(), seeds, cap, |s| self.successors(s))
    }

    fn sample_mode<R: Rng>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            acc += p;
            if r < acc {
                return i;
            }
        }
        self.probabilities.len() - 1
    }
}

/// Generator positions each node reads, and the node checks unlocked once
/// generators `0..=i` are assigned.
fn generator_levels(net: &BooleanNetwork) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut free = vec![];
    let mut at = vec![vec![]; net.m()];
    for (k, up) in net.updates().iter().enumerate() {
        let last = up.args.iter().filter(|a| a.is_generator()).filter_map(|a| net.generator_position(a.index)).max();
        match last {
            Some(i) => at[i].push(k),
            None => free.push(k),
        }
    }
    (free, at)
}

/// An input `u` with `F(x, u) = y`, by backtracking over the generators.
pub fn one_step_input(net: &BooleanNetwork, x: &[bool], y: &[bool]) -> Option<Vec<bool>> {
    let (free, at) = generator_levels(net);
    let zero = vec![false; net.m()];
    if free.iter().any(|&k| net.eval_node(k, x, &zero) != y[k]) {
        return None;
    }
    fn go(net: &BooleanNetwork, x: &[bool], y: &[bool], at: &[Vec<usize>], u: &mut Vec<bool>, i: usize) -> bool {
        if i == u.len() {
            return true;
        }
        for b in [false, true] {
            u[i] = b;
            if at[i].iter().all(|&k| net.eval_node(k, x, u) == y[k]) && go(net, x, y, at, u, i + 1) {
                return true;
            }
        }
        false
    }
    let mut u = zero;
    go(net, x, y, &at, &mut u, 0).then_some(u)
}

/// Shortest input sequence steering `x0` to `target`, by breadth-first
/// search over states; each expanded state enumerates its `2^m` inputs.
/// `None` when no path of at most `max_len` steps exists within `state_cap`
/// visited states.
pub fn shortest_trajectory(
    net: &BooleanNetwork,
    x0: &[bool],
    target: &[bool],
    max_len: usize,
    state_cap: usize,
) -> Option<(Vec<Vec<bool>>, Vec<Vec<bool>>)> {
    if x0 == target {
        return Some((vec![x0.to_vec()], vec![]));
    }
    let m = net.m();
    let mut parent: HashMap<Vec<bool>, Option<(Vec<bool>, Vec<bool>)>> = HashMap::from([(x0.to_vec(), None)]);
    let mut frontier = vec![x0.to_vec()];
    for _ in 0..max_len {
        let mut next = vec![];
        for x in &frontier {
            if let Some(u) = one_step_input(net, x, target) {
                let mut states = vec![target.to_vec(), x.clone()];
                let mut inputs = vec![u];
                let mut cur = x.clone();
                while let Some(Some((p, pu))) = parent.get(&cur) {
                    states.push(p.clone());
                    inputs.push(pu.clone());
                    cur = p.clone();
                }
                states.reverse();
                inputs.reverse();
                return Some((states, inputs));
            }
        }
        if m >= usize::BITS as usize - 1 || frontier.len().saturating_mul(1 << m) > state_cap {
            return None;
        }
        for x in &frontier {
            for c in 0..1usize << m {
                let u = bits_of(m, c);
                let y = net.step(x, &u);
                if !parent.contains_key(&y) {
                    parent.insert(y.clone(), Some((x.clone(), u)));
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            return None;
        }
        frontier = next;
    }
    None
}

/// Largest `n` for which hits are broken down per initial state.
pub const BREAKDOWN_MAX_N: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialStateHits {
    pub state: usize,
    pub runs: usize,
    /// Hits at the final step and at the step before it.
    pub hits: usize,
    pub hits_before: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub runs: usize,
    pub horizon: usize,
    pub hits: usize,
    pub frequency: f64,
    /// Binomial standard error of `frequency`.
    pub sigma: f64,
    /// Hit frequency at each of the last few steps.
    pub tail_frequencies: Vec<f64>,
    /// Per initial state (when `n ≤ BREAKDOWN_MAX_N`).
    pub breakdown: Vec<InitialStateHits>,
    /// The frequencies still move between the last two steps by more than
    /// sampling noise allows, overall or for some initial state.
    pub non_convergent: bool,
}

/// Simulates `runs` trajectories from uniformly random initial states and
/// counts how many sit at `target` after `horizon` steps. Run `r` draws from
/// stream `r` of a ChaCha generator keyed by `seed`.
pub fn monte_carlo(
    pbn: &ClosedLoopPbn,
    target: &[bool],
    runs: usize,
    horizon: usize,
    seed: u64,
) -> MonteCarloResult {
    const TAIL: usize = 4;
    let n = pbn.n();
    let mut tail_hits = vec![0usize; TAIL.min(horizon + 1)];
    let tail_start = horizon + 1 - tail_hits.len();
    let mut per_state: std::collections::BTreeMap<usize, InitialStateHits> = Default::default();
    for r in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let x0 = column_of(&x);
        let (mut last, mut before) = (false, false);
        for t in 0..=horizon {
            let at = x == target;
            if t >= tail_start && at {
                tail_hits[t - tail_start] += 1;
            }
            if t + 1 == horizon {
                before = at;
            }
            if t == horizon {
                last = at;
            } else {
                let m = pbn.sample_mode(&mut rng);
                x = pbn.step(m, &x);
            }
        }
        if n <= BREAKDOWN_MAX_N {
            let e = per_state.entry(x0).or_insert(InitialStateHits { state: x0, runs: 0, hits: 0, hits_before: 0 });
            e.runs += 1;
            e.hits += usize::from(last);
            e.hits_before += usize::from(before);
        }
    }
    let hits = *tail_hits.last().expect("non-empty");
    let frequency = hits as f64 / runs as f64;
    let tail_frequencies: Vec<f64> = tail_hits.iter().map(|&h| h as f64 / runs as f64).collect();
    let sigma = (frequency * (1.0 - frequency) / runs as f64).sqrt();
    // the difference of two frequencies has σ ≤ sqrt(1/(2r))
    let moved = |a: usize, b: usize, r: usize| r >= 50 && (a as f64 - b as f64).abs() / r as f64 > 5.0 * (0.5 / r as f64).sqrt();
    let k = tail_hits.len();
    let non_convergent = (k >= 2 && moved(tail_hits[k - 1], tail_hits[k - 2], runs))
        || per_state.values().any(|e| moved(e.hits, e.hits_before, e.runs));
    MonteCarloResult {
        runs,
        horizon,
        hits,
        frequency,
        sigma,
        tail_frequencies,
        breakdown: per_state.into_values().collect(),
        non_convergent,
    }
}

/// Cycle-breaking pinning of one mode: the pinned nodes lose their
/// cycle-closing arguments (fixed to 0), giving an acyclic mode with a
/// unique steady state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeStabilization {
    pub mode: usize,
    pub gamma: Vec<NodeId>,
    pub removed: Vec<(NodeId, NodeId)>,
    /// `(node, ⊕, g over the original arguments, new update)`.
    pub feedback: Vec<(NodeId, BooleanFunction, BooleanFunction, Update)>,
    pub network: BooleanNetwork,
    pub inputs: Vec<bool>,
    pub steady_state: Vec<bool>,
    /// Longest path among state nodes of the pinned mode.
    pub longest_path: usize,
}

pub fn stabilize_mode(
    pbn: &ProbabilisticBooleanNetwork,
    mode: usize,
    seed: &[(NodeId, NodeId)],
    input: bool,
) -> Result<ModeStabilization> {
    let net = pbn.modes().get(mode).ok_or_else(|| Error::invalid(format!("no mode {mode}")))?;
    let g = net.wiring_graph();
    let (gamma, removed) = select_gamma1(&g, seed, DEFAULT_CYCLE_CAP)?;
    let mut pinned = net.clone();
    let mut feedback = vec![];
    for &v in &gamma {
        let up = net.update_of(v.index).expect("state node");
        let cut: Vec<usize> = removed
            .iter()
            .filter(|(_, b)| *b == v)
            .map(|(a, _)| up.args.iter().position(|x| x == a).expect("edge from an argument"))
            .collect();
        let target = BooleanFunction::from_fn(up.args.len(), |x| {
            let y: Vec<bool> = x.iter().enumerate().map(|(i, &b)| b && !cut.contains(&i)).collect();
            up.function.eval(&y)
        })?;
        let (op, gk) =
            solve_pinning_equation(&target.structure_matrix(), &up.function.structure_matrix(), PinningSolveMode::Search)?;
        let new = Update::new(up.args.clone(), gk.combine(&op, &up.function)?).minimized().0;
        pinned = pinned.with_update(v.index, new.clone())?;
        feedback.push((v, op, gk, new));
    }
    let pg = pinned.wiring_graph();
    let order = topological_order(pg.adjacency()).ok_or_else(|| Error::invalid("pinned mode is still cyclic"))?;
    let mut depth = vec![0usize; pg.num_vertices()];
    for &v in &order {
        for &w in pg.out_neighbors(v) {
            if !pg.is_generator(v) {
                depth[w] = depth[w].max(depth[v] + 1);
            }
        }
    }
    let longest_path = depth.into_iter().max().unwrap_or(0);
    let inputs = vec![input; pinned.m()];
    let mut x = vec![false; pinned.n()];
    for _ in 0..=longest_path {
        x = pinned.step(&x, &inputs);
    }
    debug_assert_eq!(pinned.step(&x, &inputs), x);
    Ok(ModeStabilization { mode, gamma, removed, feedback, network: pinned, inputs, steady_state: x, longest_path })
}

#[derive(Clone, Debug)]
pub struct StabilizeOptions {
    pub step1_mode: Option<usize>,
    pub step2_mode: Option<usize>,
    pub step1_seed: Vec<(NodeId, NodeId)>,
    pub pinning: PinningOptions,
    /// Value held by the original generators wherever no law is synthesized.
    pub input_default: bool,
    pub cap: Option<u128>,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        StabilizeOptions {
            step1_mode: None,
            step2_mode: None,
            step1_seed: vec![],
            pinning: PinningOptions::default(),
            input_default: true,
            cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilizationPlan {
    pub step1: ModeStabilization,
    pub step2_mode: usize,
    pub pinning: PinningPlan,
    /// Fixed-time schedule of the pinned step-2 mode (valid from any state).
    pub schedule: ControlSchedule,
    /// `x_e = x(0), …, x(T) = target` under the step-2 mode, `T ≤ η`.
    pub trajectory: Vec<Vec<bool>>,
    /// `inputs[t]` drives `trajectory[t]` to `trajectory[t + 1]`.
    pub inputs: Vec<Vec<bool>>,
    pub closed_loop: ClosedLoopPbn,
    /// Chain restricted to the states reachable from `x_e`.
    pub model: TransitionModel,
    pub verdict: StabilityVerdict,
    /// The step-1 mode is acyclic, so `x_e` is reachable from every state and
    /// the restricted chain holds the unique closed class.
    pub global_certificate: bool,
}

pub fn stabilize_to_target(
    pbn: &ProbabilisticBooleanNetwork,
    target: &[bool],
    opts: &StabilizeOptions,
) -> Result<StabilizationPlan> {
    let s = pbn.modes().len();
    if s < 2 {
        return Err(Error::invalid("fewer than 2 modes"));
    }
    if target.len() != pbn.n() {
        return Err(Error::Dimension(format!("target has {} bits for {} nodes", target.len(), pbn.n())));
    }
    let step1_mode = match opts.step1_mode {
        Some(m) => m,
        None => {
            let mut best = (usize::MAX, 0);
            for (i, m) in pbn.modes().iter().enumerate() {
                let c = m.wiring_graph().enumerate_simple_cycles(DEFAULT_CYCLE_CAP)?.len();
                if c < best.0 {
                    best = (c, i);
                }
            }
            best.1
        }
    };
    let step2_mode = opts.step2_mode.unwrap_or(if step1_mode == 0 { 1 } else { 0 });
    if step1_mode == step2_mode || step2_mode >= s || step1_mode >= s {
        return Err(Error::invalid("steps 1 and 2 need two distinct existing modes"));
    }
    let step1 = stabilize_mode(pbn, step1_mode, &opts.step1_seed, opts.input_default)?;
    let pinning = design_pinning(&pbn.modes()[step2_mode], &opts.pinning)?;
    let schedule = synthesize_schedule(&pinning.network, target)?;
    // the fixed-time schedule works from any state; a shorter route from x_e
    // is preferred when the search stays small
    let (trajectory, inputs) = match shortest_trajectory(
        &pinning.network,
        &step1.steady_state,
        target,
        schedule.horizon,
        DEFAULT_SEARCH_CAP,
    ) {
        Some(found) => found,
        None => {
            let states = schedule.simulate(&pinning.network, &step1.steady_state);
            let inputs = (0..schedule.horizon).map(|t| schedule.inputs.iter().map(|g| g[t]).collect()).collect();
            (states, inputs)
        }
    };
    if trajectory.last() != Some(&target.to_vec()) {
        return Err(Error::invalid("schedule does not reach the target from the steady state"));
    }
    // state feedback reproducing the schedule along the trajectory; on a
    // revisited state the later input wins
    let laws: Vec<InputLaw> = (0..pinning.network.m())
        .map(|gi| {
            let mut points: std::collections::BTreeMap<usize, bool> = Default::default();
            for (x, u) in trajectory.iter().zip(&inputs) {
                points.insert(column_of(x), u[gi]);
            }
            InputLaw::Waypoints { points: points.into_iter().collect(), default: false }
        })
        .collect();
    let modes = (0..s)
        .map(|i| {
            if i == step1_mode {
                ClosedLoopMode { network: step1.network.clone(), laws: vec![InputLaw::Const(opts.input_default); step1.network.m()] }
            } else if i == step2_mode {
                ClosedLoopMode { network: pinning.network.clone(), laws: laws.clone() }
            } else {
                let m = &pbn.modes()[i];
                ClosedLoopMode { network: m.clone(), laws: vec![InputLaw::Const(opts.input_default); m.m()] }
            }
        })
        .collect();
    let closed_loop = ClosedLoopPbn { modes, probabilities: pbn.probabilities().to_vec() };
    let xe = column_of(&step1.steady_state);
    let model = closed_loop.transition_model(Some(&[xe]), opts.cap.unwrap_or(DEFAULT_TPM_CAP))?;
    let alpha = model
        .local(column_of(target))
        .ok_or_else(|| Error::invalid("target is not reachable from the steady state"))?;
    let verdict = check_sp(&model, alpha, DEFAULT_DEFINITION_CAP);
    let global_certificate = topological_order(step1.network.wiring_graph().adjacency()).is_some();
    Ok(StabilizationPlan {
        step1,
        step2_mode,
        pinning,
        schedule,
        trajectory,
        inputs,
        closed_loop,
        model,
        verdict,
        global_certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bnfile::{parse_network, ParsedNetwork};

    fn pbn(text: &str) -> ProbabilisticBooleanNetwork {
        match parse_network(text).unwrap().network {
            ParsedNetwork::Pbn(p) => p,
            ParsedNetwork::Bn(n) => ProbabilisticBooleanNetwork::new("bn", vec![n], vec![1.0]).unwrap(),
        }
    }

    #[test]
    fn coin_flip_chain() {
        let p = pbn("mode p=0.5 {\nx1 = x1\n}\nmode p=0.5 {\nx1 = !x1\n}");
        let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
        let dense = tm.to_dense();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(dense.get(i, j), 0.5);
            }
        }
        let v = check_sp(&tm, 0, 64);
        assert!(v.sp && v.consistent);
        assert!((v.limiting_prob_at_target.unwrap() - 0.5).abs() < 1e-12);
        let mc = monte_carlo(&ClosedLoopPbn::open(&p, false), &[true], 100_000, 20, 3);
        let sigma = (0.25f64 / 1e5).sqrt();
        assert!((mc.frequency - 0.5).abs() < 3.0 * sigma);
        assert!(!mc.non_convergent);
    }

    #[test]
    fn two_cycle_is_periodic() {
        let p = pbn("x1 = !x1");
        let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
        let cls = classify_states(&tm);
        assert_eq!(cls.classes.len(), 1);
        assert_eq!(cls.period, vec![2]);
        let v = check_sp(&tm, 0, 64);
        assert!(!v.sp && v.consistent);
        // exact: from x₀ = α the target is never occupied at odd times
        let alpha = tm.states[0];
        let mut d = vec![0.0; 2];
        d[0] = 1.0;
        for t in 1..=9 {
            d = tm.apply(&d);
            if t % 2 == 1 {
                assert_eq!(d[0], 0.0, "{alpha}");
            }
        }
        let mc = monte_carlo(&ClosedLoopPbn::open(&p, false), &[true], 2_000, 31, 1);
        assert!(mc.non_convergent);
        assert!(mc.breakdown.iter().all(|e| e.hits == 0 || e.hits == e.runs));
    }

    #[test]
    fn identity_chain() {
        let p = pbn("x1 = x1\nx2 = x2");
        let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
        let cls = classify_states(&tm);
        assert!(cls.recurrent.iter().all(|&r| r));
        assert!(cls.period.iter().all(|&d| d == 1));
        assert!(!check_sp(&tm, 0, 64).sp);
        let single = build_tpm(&pbn("x1 = 1"), DEFAULT_TPM_CAP).unwrap();
        let v = check_sp(&single, 0, 64);
        assert!(v.sp && v.consistent);
        assert_eq!(v.limiting_prob_at_target, Some(1.0));
        let mc = monte_carlo(&ClosedLoopPbn::open(&pbn("x1 = 1"), false), &[true], 1000, 3, 5);
        assert_eq!(mc.frequency, 1.0);
    }

    #[test]
    fn absorbing_state_with_feeder() {
        // 1 → 0 → 0
        let p = pbn("x1 = 0");
        let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
        let cls = classify_states(&tm);
        let absorbing = tm.local(1).unwrap();
        let feeder = tm.local(0).unwrap();
        assert!(cls.recurrent[cls.class_of[absorbing]]);
        assert!(!cls.recurrent[cls.class_of[feeder]]);
        assert_eq!(cls.period[cls.class_of[absorbing]], 1);
    }

    #[test]
    fn columns_are_stochastic() {
        let p = pbn("mode p=0.6 {\nx1 = x2\nx2 = x1 & x2\n}\nmode p=0.4 {\nx1 = !x2\nx2 = x1\n}");
        let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
        assert!(tm.max_column_defect() < 1e-12);
    }

    #[test]
    fn acyclic_mode_needs_no_pinning() {
        let p = pbn("mode p=0.5 {\nx1 = 1\nx2 = x1\n}\nmode p=0.5 {\nx1 = x2\nx2 = x1\n}");
        let s = stabilize_mode(&p, 0, &[], true).unwrap();
        assert!(s.gamma.is_empty());
        assert_eq!(s.steady_state, vec![true, true]);
        let s = stabilize_mode(&pbn("mode p=0.5 {\nx1 = !x1\n}\nmode p=0.5 {\nx1 = 1\n}"), 0, &[], true).unwrap();
        assert_eq!(s.gamma, vec![NodeId::state(1)]);
    }

    #[test]
    fn random_two_mode_stabilization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p = crate::random::random_pbn(&mut rng, 4, 2, 2);
            let target: Vec<bool> = (0..4).map(|_| rng.gen()).collect();
            let plan = stabilize_to_target(&p, &target, &StabilizeOptions::default()).unwrap();
            assert!(plan.global_certificate);
            assert!(plan.verdict.sp && plan.verdict.consistent, "{:?}", plan.verdict);
            // the full chain agrees with the restricted one
            let full = plan.closed_loop.transition_model(None, DEFAULT_TPM_CAP).unwrap();
            let v = check_sp(&full, full.local(column_of(&target)).unwrap(), 64);
            assert!(v.sp);
            assert!((v.limiting_prob_at_target.unwrap() - plan.verdict.limiting_prob_at_target.unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn definitions_agree_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut sp_seen = [0; 2];
        for _ in 0..60 {
            let n = rng.gen_range(1..=4);
            let s = rng.gen_range(1..=3);
            let p = crate::random::random_pbn(&mut rng, n, s, 2);
            let tm = build_tpm(&p, DEFAULT_TPM_CAP).unwrap();
            let alpha = rng.gen_range(0..tm.len());
            let v = check_sp(&tm, alpha, 64);
            assert!(v.consistent, "{v:?}");
            assert_eq!(v.snp, Some(false));
            sp_seen[usize::from(v.sp)] += 1;
            if v.sp {
                let mu = v.spd_mu.as_ref().unwrap();
                assert!((mu[alpha] - v.limiting_prob_at_target.unwrap()).abs() < 1e-9);
                assert!(v.stationary_residual.unwrap() <= 1e-12);
            }
        }
        assert!(sp_seen[0] > 0 && sp_seen[1] > 0, "{sp_seen:?}");
    }

    #[test]
    fn tcell_step_one_with_listed_seed() {
        use crate::fixtures;
        let p = fixtures::tcell_pbn();
        let seed = [(NodeId::state(10), NodeId::state(26))];
        let s = stabilize_mode(&p, fixtures::STEP1_MODE, &seed, fixtures::DEFAULT_INPUT).unwrap();
        assert!(s.gamma.contains(&NodeId::state(26)));
        let (_, op, _, up) = s.feedback.iter().find(|f| f.0 == NodeId::state(26)).unwrap();
        assert_eq!(op.operator_name(), Some("and"));
        assert_eq!(up.args, vec![NodeId::state(fixtures::STEP1_FEEDBACK_ARG)]);
        assert_eq!(up.function, BooleanFunction::not());
        assert_eq!(s.steady_state, fixtures::assignment(&fixtures::STEP1_ATTRACTOR));
    }
}
