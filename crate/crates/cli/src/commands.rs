use crate::report::{bitstring, edge_names, names, parse_bits, truth_table, Report};
use crate::{Cli, Command, Fixture, OracleMode, SolveMode};
use anyhow::{bail, Context, Result};
use bnctl::fixtures;
use bnctl::logic::{column_of, PinningSolveMode};
use bnctl::mincontrol::{minimum_control_graph, minimum_control_oracle, MinControlOptions};
use bnctl::oracle::{all_pairs_reachable_in, assr_controllable, class_controllable, DEFAULT_STATE_CAP};
use bnctl::pbn::{
    check_sp, classify_states, monte_carlo, stabilize_to_target, ClosedLoopPbn, StabilityVerdict, TransitionModel,
    DEFAULT_DEFINITION_CAP, DEFAULT_TPM_CAP,
};
use bnctl::pinning::{design_pinning, verify_plan, PinningOptions};
use bnctl::structural::check_structural_controllability;
use bnctl::{parse_network, BooleanNetwork, NodeId, ParsedNetwork, ProbabilisticBooleanNetwork};
use serde_json::json;
use std::path::Path;
use std::time::Instant;

const DEFAULT_CYCLE_CAP: u64 = bnctl::graph::DEFAULT_CYCLE_CAP as u64;
/// Largest `n + m` handed to the exhaustive plan check.
const PLAN_ORACLE_LIMIT: usize = 12;

struct Outcome {
    report: Report,
    dot: Option<String>,
    csv: Option<String>,
    ok: bool,
}

pub fn run(cli: &Cli) -> Result<u8> {
    let start = Instant::now();
    let mut out = match &cli.command {
        Command::Check { file } => check(cli, file)?,
        Command::Mincontrol { file } => mincontrol(cli, file)?,
        Command::Pin { file, mode, out } => pin(cli, file, *mode, out.as_deref())?,
        Command::PbnCheck { file, target, from, inputs, csv, csv_horizon } => {
            pbn_check(cli, file, target, from.as_deref(), *inputs, csv.is_some().then_some(*csv_horizon))?
        }
        Command::PbnStabilize { file, target, step1_mode, step2_mode, runs, horizon, csv, csv_horizon } => {
            pbn_stabilize(cli, file, target, *step1_mode, *step2_mode, *runs, *horizon, csv.is_some().then_some(*csv_horizon))?
        }
        Command::Oracle { file, mode } => oracle(cli, file, *mode)?,
    };
    if cli.timing {
        out.report.timing = Some(crate::report::Timing { elapsed_ms: start.elapsed().as_secs_f64() * 1e3 });
    }
    for w in &out.report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &cli.json {
        let text = serde_json::to_string_pretty(&out.report)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let (Some(path), Some(dot)) = (&cli.dot, &out.dot) {
        std::fs::write(path, dot).with_context(|| format!("writing {}", path.display()))?;
    }
    let csv_path = match &cli.command {
        Command::PbnCheck { csv, .. } | Command::PbnStabilize { csv, .. } => csv.as_ref(),
        _ => None,
    };
    if let (Some(path), Some(csv)) = (csv_path, &out.csv) {
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(if out.ok { 0 } else { 1 })
}

fn read(file: &Path) -> Result<(String, ParsedNetwork)> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let parsed = parse_network(&text).with_context(|| format!("parsing {}", file.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok((text, parsed.network))
}

fn read_bn(file: &Path) -> Result<(String, BooleanNetwork)> {
    match read(file)? {
        (text, ParsedNetwork::Bn(net)) => Ok((text, net)),
        (_, ParsedNetwork::Pbn(_)) => bail!("{} holds a probabilistic network; use the pbn-* commands", file.display()),
    }
}

fn read_pbn(file: &Path) -> Result<(String, ProbabilisticBooleanNetwork)> {
    match read(file)? {
        (text, ParsedNetwork::Pbn(p)) => Ok((text, p)),
        (text, ParsedNetwork::Bn(net)) => {
            let name = net.name.clone();
            Ok((text, ProbabilisticBooleanNetwork::new(&name, vec![net], vec![1.0])?))
        }
    }
}

fn base_report(cli: &Cli, command: &str, file: &Path, text: &str) -> Report {
    let mut r = Report::new(command, &file.display().to_string(), text);
    r.flag("seed", cli.seed);
    r.flag("cap", cli.cap);
    r.flag("fixture", cli.fixture.map(|f| format!("{f:?}")));
    r
}

fn cycle_cap(cli: &Cli) -> usize {
    cli.cap.unwrap_or(DEFAULT_CYCLE_CAP) as usize
}

fn state_cap(cli: &Cli, default: u128) -> u128 {
    cli.cap.map_or(default, u128::from)
}

fn check(cli: &Cli, file: &Path) -> Result<Outcome> {
    let (text, net) = read_bn(file)?;
    let g = net.wiring_graph();
    let v = check_structural_controllability(&g);
    let mut r = base_report(cli, "check", file, &text);
    r.verdict("structurally_controllable", v.structurally_controllable);
    r.verdict("eta", v.eta);
    if let Some(w) = &v.witness {
        let layers: Vec<(String, usize)> = w.layer_of.iter().map(|(n, l)| (n.name(), *l)).collect();
        r.artifact("layers", layers);
        println!("structurally controllable, eta = {}", w.layer_count);
    } else {
        let violation = v.violation.as_ref().map(|x| x.to_string()).unwrap_or_default();
        let cycles = g.enumerate_simple_cycles(cycle_cap(cli))?;
        let cycles: Vec<Vec<String>> = cycles.iter().map(|c| names(c)).collect();
        println!("not structurally controllable: {violation}");
        for c in &cycles {
            println!("cycle: {}", c.join(" -> "));
        }
        r.artifact("violation", violation);
        r.artifact("cycles", cycles);
    }
    Ok(Outcome { dot: Some(g.to_dot(&net.name, &[])), report: r, csv: None, ok: v.structurally_controllable })
}

fn mincontrol(cli: &Cli, file: &Path) -> Result<Outcome> {
    let (text, net) = read_bn(file)?;
    let g = net.wiring_graph();
    let opts = MinControlOptions { cycle_cap: cycle_cap(cli), ..MinControlOptions::default() };
    let sel = minimum_control_graph(&g, opts)?;
    let mut r = base_report(cli, "mincontrol", file, &text);
    r.verdict("n_star", sel.n_star);
    r.verdict("verified", sel.verified);
    r.artifact("lambda", names(&sel.lambda));
    let blocks: Vec<_> = sel
        .blocks
        .iter()
        .map(|b| {
            json!({
                "vertices": names(&b.vertices),
                "columns": names(&b.columns),
                "forced": names(&b.forced),
                "excluded": names(&b.excluded),
                "cycles": b.cycles,
                "free": b.free,
                "feasible_count": b.feasible_count,
                "selected": names(&b.selected()),
            })
        })
        .collect();
    r.artifact("blocks", blocks);
    r.artifact("aggregated_edges", &sel.partition.aggregated_edges);
    println!("N* = {}: {}", sel.n_star, names(&sel.lambda).join(" "));
    if matches!(cli.fixture, Some(Fixture::TcellPaper)) {
        let listed: Vec<NodeId> = fixtures::LAMBDA_STAR.iter().map(|&i| NodeId::state(i)).collect();
        let ok = check_structural_controllability(&g.with_controlled(&listed)).structurally_controllable;
        r.verdict("listed_lambda_feasible", ok);
        r.verdict("listed_n_star", fixtures::N_STAR);
        println!("listed selection ({} nodes) feasible: {ok}", fixtures::N_STAR);
    }
    Ok(Outcome { dot: Some(g.to_dot(&net.name, &sel.lambda)), report: r, csv: None, ok: sel.verified })
}

fn pin(cli: &Cli, file: &Path, mode: SolveMode, out: Option<&Path>) -> Result<Outcome> {
    let (text, net) = read_bn(file)?;
    let mode = match mode {
        SolveMode::Search => PinningSolveMode::Search,
        SolveMode::Xor => PinningSolveMode::Xor,
    };
    let mut r = base_report(cli, "pin", file, &text);
    r.flag("mode", format!("{mode:?}"));
    let (plan, reference_n) = match cli.fixture {
        Some(Fixture::TcellPaper) => {
            let (plan, warnings) = fixtures::reference_pinning(&net)?;
            r.warnings.extend(warnings);
            (plan, fixtures::TCELL_REFERENCE_STATE_COUNT)
        }
        None => {
            let opts = PinningOptions { mode, cycle_cap: cycle_cap(cli), ..PinningOptions::default() };
            (design_pinning(&net, &opts)?, net.n())
        }
    };
    let ver = verify_plan(&net, &plan, PLAN_ORACLE_LIMIT)?;
    r.verdict("pinned_structurally_controllable", ver.verdict.structurally_controllable);
    r.verdict("structure_matches", ver.structure_matches);
    r.verdict("essential_sets_match", ver.essential_sets_match);
    r.verdict("oracle_controllable", ver.oracle_controllable);
    r.verdict("gamma_size", plan.gamma.len());
    r.verdict("gamma_percent", plan.percent(reference_n));
    r.artifact("gamma1", names(&plan.gamma1));
    r.artifact("gamma2", names(&plan.gamma2));
    r.artifact("gamma3", names(&plan.gamma3));
    r.artifact("gamma", names(&plan.gamma));
    r.artifact("removed_gamma1", edge_names(&plan.removed_gamma1));
    r.artifact("removed_gamma2", edge_names(&plan.removed_gamma2));
    let odot: Vec<(String, usize)> = plan.odot.iter().map(|(v, s)| (v.name(), *s)).collect();
    r.artifact("odot", odot);
    let nodes: Vec<_> = plan
        .nodes
        .iter()
        .map(|p| {
            json!({
                "node": p.node.name(),
                "args": names(&p.args),
                "retained": names(&p.retained),
                "a_k": p.a_k.as_ref().map(truth_table),
                "f_target_delta": p.f_target.as_ref().map(|f| f.structure_matrix().delta()),
                "operator": p.operator.operator_name(),
                "g": p.feedback.as_ref().map(truth_table),
                "input": p.input.map(|u| NodeId::generator(u).name()),
            })
        })
        .collect();
    r.artifact("nodes", nodes);
    r.artifact("inputs", plan.inputs.iter().map(|(u, v)| [NodeId::generator(*u).name(), v.name()]).collect::<Vec<_>>());
    println!(
        "|Gamma| = {} ({:.2}%): {}",
        plan.gamma.len(),
        plan.percent(reference_n),
        names(&plan.gamma).join(" ")
    );
    println!("pinned network structurally controllable: {}", ver.verdict.structurally_controllable);
    if let Some(path) = out {
        std::fs::write(path, plan.network.to_bn_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    let dot = plan.network.wiring_graph().to_dot(&plan.network.name, &plan.gamma);
    Ok(Outcome { dot: Some(dot), report: r, csv: None, ok: ver.ok() })
}

fn verdict_json(v: &StabilityVerdict) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

/// `P{x(t) = α | x(0) = x₀}` rows `t,x0,probability`.
fn target_row_csv(tm: &TransitionModel, alpha: usize, horizon: usize) -> Result<String> {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(["t", "x0", "probability"])?;
    let mut row = vec![0.0; tm.len()];
    row[alpha] = 1.0;
    for t in 0..=horizon {
        for (j, &p) in row.iter().enumerate() {
            let x0 = bitstring(&bnctl::logic::bits_of(tm.n, tm.states[j]));
            w.write_record([t.to_string(), x0, format!("{p:.12e}")])?;
        }
        row = tm.apply_row(&row);
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn csv_horizon(requested: Option<usize>, states: usize) -> usize {
    requested.unwrap_or((4 * states).min(200))
}

fn pbn_check(
    cli: &Cli,
    file: &Path,
    target: &str,
    from: Option<&str>,
    inputs: u8,
    csv: Option<Option<usize>>,
) -> Result<Outcome> {
    let (text, pbn) = read_pbn(file)?;
    let target = parse_bits(target, pbn.n())?;
    let closed = ClosedLoopPbn::open(&pbn, inputs != 0);
    let seeds = from.map(|f| parse_bits(f, pbn.n())).transpose()?.map(|x| vec![column_of(&x)]);
    let tm = closed.transition_model(seeds.as_deref(), state_cap(cli, DEFAULT_TPM_CAP))?;
    let mut r = base_report(cli, "pbn-check", file, &text);
    r.flag("target", bitstring(&target));
    r.flag("from", from);
    r.flag("inputs", inputs);
    r.artifact("states", tm.len());
    let Some(alpha) = tm.local(column_of(&target)) else {
        r.verdict("sp", false);
        r.warnings.push("target is not in the explored chain".into());
        println!("not SP: target unreachable");
        return Ok(Outcome { report: r, dot: None, csv: None, ok: false });
    };
    let cls = classify_states(&tm);
    let recurrent: Vec<_> = (0..cls.classes.len())
        .filter(|&c| cls.recurrent[c])
        .map(|c| {
            let mut members: Vec<String> =
                cls.classes[c].iter().map(|&s| bitstring(&bnctl::logic::bits_of(tm.n, tm.states[s]))).collect();
            members.sort();
            members.truncate(64);
            json!({ "size": cls.classes[c].len(), "period": cls.period[c], "members": members })
        })
        .collect();
    r.artifact("classes", cls.classes.len());
    r.artifact("recurrent_classes", recurrent);
    let v = check_sp(&tm, alpha, DEFAULT_DEFINITION_CAP);
    r.verdict("sp", v.sp);
    r.verdict("verdict", verdict_json(&v));
    if !v.consistent {
        r.warnings.push("definitional checks disagree with the graph criterion".into());
    }
    println!(
        "{}: reachable from all = {}, period = {}, mu(target) = {}",
        if v.sp { "SP" } else { "not SP" },
        v.reachable_from_all,
        v.target_period,
        v.limiting_prob_at_target.map_or("-".into(), |p| format!("{p:.6e}"))
    );
    let csv = match csv {
        Some(h) => Some(target_row_csv(&tm, alpha, csv_horizon(h, tm.len()))?),
        None => None,
    };
    Ok(Outcome { report: r, dot: None, csv, ok: v.sp })
}

#[allow(clippy::too_many_arguments)]
fn pbn_stabilize(
    cli: &Cli,
    file: &Path,
    target: &str,
    step1_mode: Option<usize>,
    step2_mode: Option<usize>,
    runs: usize,
    horizon: usize,
    csv: Option<Option<usize>>,
) -> Result<Outcome> {
    let (text, pbn) = read_pbn(file)?;
    let target = parse_bits(target, pbn.n())?;
    let mut opts = match cli.fixture {
        Some(Fixture::TcellPaper) => fixtures::reference_stabilize_options(),
        None => bnctl::pbn::StabilizeOptions::default(),
    };
    opts.step1_mode = step1_mode.or(opts.step1_mode);
    opts.step2_mode = step2_mode.or(opts.step2_mode);
    opts.cap = cli.cap.map(u128::from);
    let plan = stabilize_to_target(&pbn, &target, &opts)?;
    let mut r = base_report(cli, "pbn-stabilize", file, &text);
    r.flag("target", bitstring(&target));
    r.flag("runs", runs);
    r.flag("horizon", horizon);
    let s1 = &plan.step1;
    let feedback: Vec<_> = s1
        .feedback
        .iter()
        .map(|(v, op, g, up)| {
            json!({
                "node": v.name(),
                "operator": op.operator_name(),
                "g": truth_table(g),
                "update_args": names(&up.args),
                "update": truth_table(&up.function),
            })
        })
        .collect();
    r.artifact(
        "step1",
        json!({
            "mode": s1.mode,
            "gamma": names(&s1.gamma),
            "removed": edge_names(&s1.removed),
            "feedback": feedback,
            "steady_state": bitstring(&s1.steady_state),
            "longest_path": s1.longest_path,
        }),
    );
    r.artifact(
        "step2",
        json!({
            "mode": plan.step2_mode,
            "gamma": names(&plan.pinning.gamma),
            "inputs": plan.pinning.inputs.iter().map(|(u, v)| [NodeId::generator(*u).name(), v.name()]).collect::<Vec<_>>(),
            "eta": plan.schedule.horizon,
            "trajectory": plan.trajectory.iter().map(|x| bitstring(x)).collect::<Vec<_>>(),
            "trajectory_inputs": plan.inputs.iter().map(|u| bitstring(u)).collect::<Vec<_>>(),
        }),
    );
    r.artifact("chain_states", plan.model.len());
    r.verdict("sp", plan.verdict.sp);
    r.verdict("global_certificate", plan.global_certificate);
    r.verdict("verdict", verdict_json(&plan.verdict));
    println!(
        "step 1: mode {}, pinned {}; steady state {}",
        s1.mode,
        names(&s1.gamma).join(" "),
        bitstring(&s1.steady_state)
    );
    println!("step 2: mode {}, {} steps to target", plan.step2_mode, plan.trajectory.len() - 1);
    println!(
        "{} on {} states (global certificate: {}), mu(target) = {}",
        if plan.verdict.sp { "SP" } else { "not SP" },
        plan.model.len(),
        plan.global_certificate,
        plan.verdict.limiting_prob_at_target.map_or("-".into(), |p| format!("{p:.6e}"))
    );
    if runs > 0 {
        let mc = monte_carlo(&plan.closed_loop, &target, runs, horizon, cli.seed);
        let mu = plan.verdict.limiting_prob_at_target.unwrap_or(0.0);
        let sigma = (mu * (1.0 - mu) / runs as f64).sqrt();
        let within = (mc.frequency - mu).abs() <= 3.0 * sigma;
        r.verdict("monte_carlo_within_3_sigma", within);
        r.artifact(
            "monte_carlo",
            json!({
                "runs": mc.runs, "horizon": mc.horizon, "hits": mc.hits,
                "frequency": mc.frequency, "expected": mu, "sigma": sigma,
                "tail_frequencies": mc.tail_frequencies, "non_convergent": mc.non_convergent,
            }),
        );
        println!("monte carlo: {}/{} at target (expected {:.3e} ± {:.1e})", mc.hits, runs, mu, 3.0 * sigma);
    }
    let csv = match csv {
        Some(h) => {
            let alpha = plan.model.local(column_of(&target)).expect("target in chain");
            Some(target_row_csv(&plan.model, alpha, csv_horizon(h, plan.model.len()))?)
        }
        None => None,
    };
    let ok = plan.verdict.sp && plan.global_certificate;
    Ok(Outcome { report: r, dot: None, csv, ok })
}

fn oracle(cli: &Cli, file: &Path, mode: OracleMode) -> Result<Outcome> {
    let (text, net) = read_bn(file)?;
    let cap = state_cap(cli, DEFAULT_STATE_CAP);
    let mut r = base_report(cli, "oracle", file, &text);
    r.flag("mode", format!("{mode:?}"));
    let g = net.wiring_graph();
    let structural = check_structural_controllability(&g);
    r.verdict("structurally_controllable", structural.structurally_controllable);
    let ok = match mode {
        OracleMode::Assr => {
            let c = assr_controllable(&net, cap)?;
            r.verdict("controllable", c);
            println!("controllable: {c}");
            c
        }
        OracleMode::Class => {
            let c = class_controllable(&net, 4, bnctl::network::DEFAULT_CLASS_CAP, cap)?;
            r.verdict("class_controllable", c);
            r.verdict("agrees", c == structural.structurally_controllable);
            println!("every network with this wiring controllable: {c} (structural: {})", structural.structurally_controllable);
            c
        }
        OracleMode::Mincontrol => {
            let brute = minimum_control_oracle(&g, 20)?;
            let sel = minimum_control_graph(&g, MinControlOptions { cycle_cap: cycle_cap(cli), ..Default::default() })?;
            r.verdict("oracle_n_star", brute.len());
            r.verdict("solver_n_star", sel.n_star);
            r.artifact("oracle_lambda", names(&brute));
            println!("oracle N* = {}, solver N* = {}", brute.len(), sel.n_star);
            brute.len() == sel.n_star
        }
        OracleMode::Eta => {
            let Some(eta) = structural.eta else {
                bail!("eta is defined for structurally controllable networks only");
            };
            let exact = all_pairs_reachable_in(&net, eta, cap)?;
            let earlier = eta > 0 && all_pairs_reachable_in(&net, eta - 1, cap)?;
            r.verdict("eta", eta);
            r.verdict("all_pairs_in_eta", exact);
            r.verdict("all_pairs_in_eta_minus_1", earlier);
            println!("eta = {eta}: all pairs in eta steps {exact}, in eta-1 steps {earlier}");
            exact && !earlier
        }
    };
    Ok(Outcome { report: r, dot: None, csv: None, ok })
}
