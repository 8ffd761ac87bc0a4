//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails. Budgets and tolerances are pinned below.

use bnctl::fixtures;
use bnctl::logic::{solve_pinning_equation, PinningSolveMode};
use bnctl::mincontrol::{
    constraint_matrices, minimum_control, minimum_control_graph, minimum_control_oracle, vertex_cover_instance,
    MinControlOptions,
};
use bnctl::oracle::{all_pairs_reachable_in, assr_controllable, DEFAULT_STATE_CAP};
use bnctl::pbn::{build_tpm, check_sp, classify_states, monte_carlo, stabilize_mode, stabilize_to_target, DEFAULT_TPM_CAP};
use bnctl::pinning::{embed_target, verify_plan};
use bnctl::random::{network_on_graph, random_bcn, random_graph, random_in_tree_forest, random_pbn, random_undirected};
use bnctl::structural::check_structural_controllability;
use bnctl::{BooleanFunction, BooleanNetwork, NodeId, WiringGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

const BUDGET_CHECK_TCELL: Duration = Duration::from_millis(50);
const BUDGET_MINCONTROL: Duration = Duration::from_secs(5);
const BUDGET_PIN: Duration = Duration::from_secs(2);
const BUDGET_CLASS_SWEEP: Duration = Duration::from_secs(600);
const BUDGET_PBN_SWEEP: Duration = Duration::from_secs(300);
const BUDGET_FOREST_1E4: Duration = Duration::from_millis(100);
const BUDGET_FOREST_1E5: Duration = Duration::from_secs(2);
/// Largest equivalence class enumerated per network in the class sweeps.
const CLASS_ENUM_CAP: u128 = 20_000;
const RESIDUAL_TOL: f64 = 1e-12;
const MC_RUNS: usize = 100_000;
const MC_HORIZON: usize = 200;
const MC_SIGMAS: f64 = 3.0;

struct Line {
    pass: bool,
    detail: String,
}

fn ids(v: &[usize]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId::state(i)).collect()
}

fn idx(v: &[NodeId]) -> Vec<usize> {
    v.iter().map(|n| n.index).collect()
}

fn set(v: &[usize]) -> BTreeSet<usize> {
    v.iter().copied().collect()
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "NO"
    }
}

/// Criterion 1: T-cell wiring graph fails the check, with exactly the four
/// listed cycles.
fn tcell_check() -> Line {
    let g = fixtures::tcell().wiring_graph();
    let t = Instant::now();
    let v = check_structural_controllability(&g);
    let cycles = g.enumerate_simple_cycles(bnctl::graph::DEFAULT_CYCLE_CAP).unwrap();
    let el = t.elapsed();
    let found: BTreeSet<BTreeSet<usize>> = cycles.iter().map(|c| set(&idx(c))).collect();
    let listed: BTreeSet<BTreeSet<usize>> = fixtures::CYCLES.iter().map(|c| set(c)).collect();
    let extra = found.difference(&listed).count();
    let missing = listed.difference(&found).count();
    let pass = !v.structurally_controllable && found == listed && el < BUDGET_CHECK_TCELL;
    Line {
        pass,
        detail: format!(
            "controllable={} cycles={} (listed {}, missing {missing}, extra {extra}) in {:?}",
            v.structurally_controllable,
            found.len(),
            listed.len(),
            el
        ),
    }
}

/// Criterion 2: minimum control of the T-cell network and the constraint
/// vectors of the printed local subsystem.
fn tcell_mincontrol() -> Line {
    let net = fixtures::tcell();
    let g = net.wiring_graph();
    let t = Instant::now();
    let sel = minimum_control(&net).unwrap();
    let el = t.elapsed();
    let listed_ok =
        check_structural_controllability(&g.with_controlled(&ids(&fixtures::LAMBDA_STAR))).structurally_controllable;
    let a: Vec<Vec<u8>> = fixtures::LOCAL_ADJACENCY.iter().map(|r| r.to_vec()).collect();
    // the listed vector is the unconstrained feasible set of the subsystem
    let cm = constraint_matrices(&a, &[fixtures::LOCAL_CYCLE.to_vec()], &[], &[], 20).unwrap();
    let bar_diff: Vec<usize> =
        (0..64).filter(|&i| cm.j1_m_bar()[i] != f64::from(fixtures::J1_MBAR[i])).map(|i| i + 1).collect();
    let tilde_diff = (0..64).filter(|&i| cm.j1_m_tilde(0)[i] != f64::from(fixtures::J1_MTILDE[i])).count();
    let zeta_ok = cm.feasible == fixtures::ZETA1;
    let zeta_extra: Vec<usize> = cm.feasible.iter().copied().filter(|s| !fixtures::ZETA1.contains(s)).collect();
    let zeta_missing: Vec<usize> = fixtures::ZETA1.iter().copied().filter(|s| !cm.feasible.contains(s)).collect();
    let pass = sel.n_star == fixtures::N_STAR
        && sel.verified
        && listed_ok
        && bar_diff.is_empty()
        && tilde_diff == 0
        && zeta_ok
        && el < BUDGET_MINCONTROL;
    Line {
        pass,
        detail: format!(
            "N*={} (listed {}), verified={}, listed selection feasible={}, J1*Mbar differs at {:?}, \
             J1*Mtilde differs at {} entries, zeta exact={} (extra {:?}, missing {:?}), {:?}",
            sel.n_star,
            fixtures::N_STAR,
            sel.verified,
            listed_ok,
            bar_diff,
            tilde_diff,
            zeta_ok,
            zeta_extra,
            zeta_missing,
            el
        ),
    }
}

/// Criterion 3: pinning with the reference choices injected.
fn tcell_pinning() -> Line {
    let net = fixtures::tcell();
    let t = Instant::now();
    let (plan, warnings) = fixtures::reference_pinning(&net).unwrap();
    let ver = verify_plan(&net, &plan, 0).unwrap();
    let el = t.elapsed();
    let g1 = set(&idx(&plan.gamma1)) == set(&fixtures::GAMMA1);
    let g2 = set(&idx(&plan.gamma2)) == set(&fixtures::GAMMA2);
    let g3 = set(&idx(&plan.gamma3)) == set(&fixtures::GAMMA3);
    let size = plan.gamma.len() == fixtures::GAMMA.len();
    let pct = (plan.percent(fixtures::TCELL_REFERENCE_STATE_COUNT) - fixtures::GAMMA_PERCENT).abs() < 0.005;
    let scored = |s: usize| -> BTreeSet<usize> { plan.odot.iter().filter(|(_, k)| *k == s).map(|(v, _)| v.index).collect() };
    let odot = scored(2) == set(&fixtures::ODOT_TWO) && scored(1) == set(&fixtures::ODOT_ONE);
    // F₂₅ from A₂₅ over the listed retained set, independent of the plan
    let up = net.update_of(25).unwrap();
    let pos: Vec<usize> =
        fixtures::RETAINED_25.iter().map(|&r| up.args.iter().position(|a| a.index == r).unwrap()).collect();
    let f25 = embed_target(&fixtures::a25(), &pos, up.args.len()).unwrap();
    let f25_ok = f25.delta() == fixtures::F25;
    let lf_ok = up.function.structure_matrix().delta() == fixtures::L_F25;
    let (op, g) = solve_pinning_equation(&f25, &up.function.structure_matrix(), PinningSolveMode::Search).unwrap();
    let expected_g = BooleanFunction::from_fn(up.args.len(), |x| {
        let at = |k: usize| x[up.args.iter().position(|a| a.index == k).unwrap()];
        fixtures::G25_POSITIVE.iter().all(|&k| at(k)) && fixtures::G25_NEGATIVE.iter().all(|&k| !at(k))
    })
    .unwrap();
    let sol_ok = op.operator_name() == Some("and") && g == expected_g;
    let pass = g1 && g2 && g3 && size && pct && odot && f25_ok && sol_ok && ver.ok() && el < BUDGET_PIN;
    Line {
        pass,
        detail: format!(
            "G1 {} G2 {} G3 {} |G|={} ({:.2}%) odot {} F25 {} (L_f25 as listed {}), op={} g exact {}, \
             structural pass {}, {:?}{}",
            yn(g1),
            yn(g2),
            yn(g3),
            plan.gamma.len(),
            plan.percent(fixtures::TCELL_REFERENCE_STATE_COUNT),
            yn(odot),
            yn(f25_ok),
            yn(lf_ok),
            op.operator_name().unwrap_or("?"),
            yn(g == expected_g),
            yn(ver.ok()),
            el,
            if warnings.is_empty() { String::new() } else { format!("; {}", warnings.join("; ")) }
        ),
    }
}

/// Networks with `n + m ≤ 10` and in-degree ≤ 2: plain random ones, in-tree
/// forests, and forests with one extra edge.
fn sweep_network(rng: &mut ChaCha8Rng, i: usize) -> BooleanNetwork {
    match i % 3 {
        0 => {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=(10 - n).min(3));
            random_bcn(rng, n, m, 2)
        }
        _ => loop {
            let n = rng.gen_range(1..=6);
            let trees = rng.gen_range(1..=n);
            let g = random_in_tree_forest(rng, n, trees, 2);
            if g.num_vertices() > 10 {
                continue;
            }
            let g = if i % 3 == 2 { with_extra_edge(rng, &g) } else { g };
            if (0..g.num_vertices()).any(|v| g.in_neighbors(v).len() > 2) {
                continue;
            }
            break network_on_graph(rng, &g);
        },
    }
}

fn with_extra_edge(rng: &mut ChaCha8Rng, g: &WiringGraph) -> WiringGraph {
    let vs = g.vertices().to_vec();
    let states: Vec<NodeId> = vs.iter().copied().filter(|v| !v.is_generator()).collect();
    let a = vs[rng.gen_range(0..vs.len())];
    let b = states[rng.gen_range(0..states.len())];
    let mut edges = g.edges();
    if !edges.contains(&(a, b)) {
        edges.push((a, b));
    }
    WiringGraph::new(vs, &edges).unwrap()
}

/// Criterion 4: structural verdict equals controllability of the whole
/// class, found by exhaustive enumeration.
fn class_sweep() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t = Instant::now();
    let (mut tested, mut skipped, mut positive, mut mismatches) = (0, 0, 0, vec![]);
    let mut i = 0;
    while tested < 200 {
        let net = sweep_network(&mut rng, i);
        i += 1;
        let structural = check_structural_controllability(&net.wiring_graph()).structurally_controllable;
        let Ok(class) = net.enumerate_equivalent(4, CLASS_ENUM_CAP) else {
            skipped += 1;
            continue;
        };
        let mut all = true;
        for member in class {
            if !assr_controllable(&member, DEFAULT_STATE_CAP).unwrap() {
                all = false;
                break;
            }
        }
        tested += 1;
        positive += usize::from(all);
        if all != structural {
            mismatches.push(net.to_bn_string());
        }
    }
    let el = t.elapsed();
    Line {
        pass: mismatches.is_empty() && el < BUDGET_CLASS_SWEEP,
        detail: format!(
            "{tested} networks ({positive} controllable classes, {skipped} skipped for class size > {CLASS_ENUM_CAP}), \
             {} mismatches, {el:?}",
            mismatches.len()
        ),
    }
}

/// Criterion 5: every member of the class joins every pair in exactly η
/// steps and some member cannot do it in η − 1.
fn eta_exactness() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut tested, mut failures) = (0, 0);
    while tested < 40 {
        let n = rng.gen_range(1..=6);
        let trees = rng.gen_range(1..=n);
        let g = random_in_tree_forest(&mut rng, n, trees, 2);
        if g.num_vertices() > 10 {
            continue;
        }
        let net = network_on_graph(&mut rng, &g);
        let eta = check_structural_controllability(&g).eta.unwrap();
        let Ok(class) = net.enumerate_equivalent(4, CLASS_ENUM_CAP) else { continue };
        let mut exact = true;
        let mut some_slower = false;
        for member in class {
            exact &= all_pairs_reachable_in(&member, eta, DEFAULT_STATE_CAP).unwrap();
            some_slower |= !all_pairs_reachable_in(&member, eta - 1, DEFAULT_STATE_CAP).unwrap();
        }
        tested += 1;
        failures += usize::from(!(exact && some_slower));
    }
    Line { pass: failures == 0, detail: format!("{tested} classes, {failures} failures") }
}

/// Criterion 6: solver size equals the brute-force minimum.
fn mincontrol_sweep() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut mismatches, mut invalid) = (0, 0);
    let total = 120;
    for _ in 0..total {
        let n = rng.gen_range(1..=10);
        let m = rng.gen_range(0..=3);
        let p = rng.gen_range(0.05..0.35);
        let g = random_graph(&mut rng, n, m, p);
        let sel = minimum_control_graph(&g, MinControlOptions::default()).unwrap();
        let brute = minimum_control_oracle(&g, 10).unwrap();
        mismatches += usize::from(sel.n_star != brute.len());
        invalid += usize::from(!check_structural_controllability(&g.with_controlled(&sel.lambda)).structurally_controllable);
    }
    Line {
        pass: mismatches == 0 && invalid == 0,
        detail: format!("{total} graphs, {mismatches} size mismatches, {invalid} infeasible selections"),
    }
}

fn brute_vertex_cover(n: usize, edges: &[(usize, usize)]) -> usize {
    (0u32..1 << n)
        .filter(|mask| edges.iter().all(|&(a, b)| mask >> a & 1 == 1 || mask >> b & 1 == 1))
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

/// Criterion 7: minimum control on the reduction instance recovers a
/// minimum vertex cover.
fn vertex_cover() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut bad, total) = (0, 60);
    for _ in 0..total {
        let n = rng.gen_range(1..=8);
        let p = rng.gen_range(0.1..0.6);
        let edges = random_undirected(&mut rng, n, p, 0.05);
        let inst = vertex_cover_instance(n, &edges);
        let sel = minimum_control_graph(&inst.graph, MinControlOptions::default()).unwrap();
        let cover = inst.cover_from_control(&sel.lambda);
        let is_cover = edges.iter().all(|(a, b)| cover.contains(a) || cover.contains(b));
        let tau = brute_vertex_cover(n, &edges);
        bad += usize::from(!(is_cover && cover.len() == tau && sel.n_star == tau + inst.edge_nodes.len()));
    }
    Line { pass: bad == 0, detail: format!("{total} graphs, {bad} failures") }
}

/// Positivity of `P{x(t) = α | x₀}` for all `x₀` at every `t` in `[lo, hi]`,
/// from successor sets only.
fn positive_window(succ: &[Vec<usize>], alpha: usize, lo: usize, hi: usize) -> bool {
    let n = succ.len();
    // hit[x] = α reachable from x in exactly t steps
    let mut hit: Vec<bool> = (0..n).map(|x| x == alpha).collect();
    for t in 1..=hi {
        hit = (0..n).map(|x| succ[x].iter().any(|&y| hit[y])).collect();
        if t >= lo && !hit.iter().all(|&h| h) {
            return false;
        }
    }
    true
}

/// Criterion 8: the four verdicts, from their definitions, agree with the
/// graph criterion.
fn pbn_sweep() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let t = Instant::now();
    let (mut disagree, mut sp, mut worst_residual) = (0, 0, 0.0f64);
    let total = 150;
    for i in 0..total {
        let n = rng.gen_range(1..=6);
        let s = rng.gen_range(1..=3);
        let pbn = random_pbn(&mut rng, n, s, 2);
        let tm = build_tpm(&pbn, DEFAULT_TPM_CAP).unwrap();
        let cls = classify_states(&tm);
        let rec = cls.recurrent_states();
        let alpha = if i % 2 == 0 { rec[rng.gen_range(0..rec.len())] } else { rng.gen_range(0..tm.len()) };
        let v = check_sp(&tm, alpha, 256);
        let scan = positive_window(&tm.stg(), alpha, 2 * tm.len(), 4 * tm.len());
        let verdicts = [v.sp_scan, v.sapp, v.sspp, v.spd].map(|x| x.unwrap());
        if verdicts.iter().any(|&b| b != v.sp) || scan != v.sp || v.snp == Some(true) {
            disagree += 1;
        }
        if v.sp {
            sp += 1;
            worst_residual = worst_residual.max(v.stationary_residual.unwrap());
            let mu = v.spd_mu.as_ref().unwrap();
            if (mu[alpha] - v.limiting_prob_at_target.unwrap()).abs() > 1e-9 {
                disagree += 1;
            }
        }
    }
    let el = t.elapsed();
    Line {
        pass: disagree == 0 && worst_residual <= RESIDUAL_TOL && el < BUDGET_PBN_SWEEP,
        detail: format!("{total} chains ({sp} SP), {disagree} disagreements, max residual {worst_residual:.1e}, {el:?}"),
    }
}

/// Criterion 9: two-step stabilization of the T-cell PBN.
fn tcell_stabilization() -> Line {
    let pbn = fixtures::tcell_pbn();
    let mode = fixtures::STEP1_MODE;
    let free = stabilize_mode(&pbn, mode, &[], fixtures::DEFAULT_INPUT).unwrap();
    let gamma_ok = idx(&free.gamma) == fixtures::STEP1_GAMMA;
    let opts = fixtures::reference_stabilize_options();
    let seeded = stabilize_mode(&pbn, mode, &opts.step1_seed, opts.input_default).unwrap();
    let g26 = seeded.feedback.iter().find(|f| f.0 == NodeId::state(26));
    let g_ok = g26.is_some_and(|(_, op, _, up)| {
        op.operator_name() == Some("and")
            && idx(&up.args) == [fixtures::STEP1_FEEDBACK_ARG]
            && up.function == BooleanFunction::not()
    });
    let attractor = fixtures::assignment(&fixtures::STEP1_ATTRACTOR);
    let attractor_ok = free.steady_state == attractor && seeded.steady_state == attractor;
    let target = fixtures::assignment(&fixtures::TARGET);
    let plan = stabilize_to_target(&pbn, &target, &opts).unwrap();
    let sp_ok = plan.verdict.sp && plan.global_certificate;
    let via_listed = plan.trajectory.len() == 3 && plan.trajectory[1] == fixtures::assignment(&fixtures::STEP2_INTERMEDIATE);
    let mu = plan.verdict.limiting_prob_at_target.unwrap_or(0.0);
    let mc = monte_carlo(&plan.closed_loop, &target, MC_RUNS, MC_HORIZON, 9);
    let sigma = (mu * (1.0 - mu) / MC_RUNS as f64).sqrt();
    let mc_ok = (mc.frequency - mu).abs() <= MC_SIGMAS * sigma;
    let on = |x: &[bool]| -> Vec<usize> { (0..x.len()).filter(|&i| x[i]).map(|i| i + 1).collect() };
    Line {
        pass: gamma_ok && g_ok && attractor_ok && sp_ok && mc_ok,
        detail: format!(
            "Gamma1={:?} (listed {:?}), g26=!x35 with AND {}, attractor {:?} {}, closed loop SP {} on {} states, \
             {}-step route{}, mu={mu:.3e}, MC {}/{} (|diff| <= 3 sigma {})",
            idx(&free.gamma),
            fixtures::STEP1_GAMMA,
            yn(g_ok),
            on(&free.steady_state),
            yn(attractor_ok),
            yn(sp_ok),
            plan.model.len(),
            plan.trajectory.len() - 1,
            if via_listed { " via the listed intermediate" } else { "" },
            mc.hits,
            MC_RUNS,
            yn(mc_ok)
        ),
    }
}

fn best_of(reps: usize, f: impl Fn() -> bool) -> (Duration, bool) {
    let mut best = Duration::MAX;
    let mut ok = true;
    for _ in 0..reps {
        let t = Instant::now();
        ok &= f();
        best = best.min(t.elapsed());
    }
    (best, ok)
}

/// Criterion 10: the check scales (near-)linearly on in-tree forests.
fn forest_scaling() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let small = random_in_tree_forest(&mut rng, 10_000, 20, 3);
    let large = random_in_tree_forest(&mut rng, 100_000, 200, 3);
    let check = |g: &WiringGraph| check_structural_controllability(g).structurally_controllable;
    let (t4, ok4) = best_of(3, || check(&small));
    let (t5, ok5) = best_of(3, || check(&large));
    let ratio = t5.as_secs_f64() / t4.as_secs_f64().max(1e-9);
    Line {
        pass: ok4 && ok5 && t4 < BUDGET_FOREST_1E4 && t5 < BUDGET_FOREST_1E5 && ratio <= 100.0,
        detail: format!("n=1e4 {t4:?}, n=1e5 {t5:?}, growth x{ratio:.1} for x10 nodes"),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter selects criteria
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Line); 10] = [
        ("tcell_check", tcell_check),
        ("tcell_mincontrol", tcell_mincontrol),
        ("tcell_pinning", tcell_pinning),
        ("class_sweep", class_sweep),
        ("eta_exactness", eta_exactness),
        ("mincontrol_oracle", mincontrol_sweep),
        ("vertex_cover", vertex_cover),
        ("pbn_equivalence", pbn_sweep),
        ("tcell_stabilization", tcell_stabilization),
        ("forest_scaling", forest_scaling),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let line = f();
        failed += usize::from(!line.pass);
        println!("{} {:>2} {name}: {}", if line.pass { "PASS" } else { "FAIL" }, i + 1, line.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
