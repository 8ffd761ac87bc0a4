//! The bundled T-cell receptor network and the reference choices and values
//! printed for it in the literature (cycle list, aggregation block, pinning
//! edge choices, `A₂₅`, constraint vectors, …). Everything here is data.

use crate::bnfile::{parse_network, ParsedNetwork};
use crate::error::Result;
use crate::logic::{BooleanFunction, LogicalMatrix};
use crate::network::{BooleanNetwork, NodeId, ProbabilisticBooleanNetwork};
use crate::pbn::StabilizeOptions;
use crate::pinning::{design_pinning, PinningOptions, PinningPlan};

pub const TCELL_BN: &str = include_str!("../../../fixtures/tcell.bn");
pub const TCELL_PBN: &str = include_str!("../../../fixtures/tcell_pbn.bn");
pub const CHAIN_BN: &str = include_str!("../../../fixtures/chain.bn");

pub fn tcell() -> BooleanNetwork {
    match parse_network(TCELL_BN).expect("bundled fixture parses").network {
        ParsedNetwork::Bn(net) => net,
        ParsedNetwork::Pbn(_) => unreachable!("fixture is a BN"),
    }
}

pub fn tcell_pbn() -> ProbabilisticBooleanNetwork {
    match parse_network(TCELL_PBN).expect("bundled fixture parses").network {
        ParsedNetwork::Pbn(p) => p,
        ParsedNetwork::Bn(_) => unreachable!("fixture is a PBN"),
    }
}

/// x38 is an auxiliary copy of u1; percentages are taken over the 37
/// original state nodes.
pub const TCELL_AUXILIARY: usize = 38;
pub const TCELL_REFERENCE_STATE_COUNT: usize = 37;

/// The unique non-trivial strongly connected component.
pub const SCC: [usize; 7] = [4, 10, 20, 26, 35, 36, 37];

/// The four cycles listed for the raw network (as vertex sets).
pub const CYCLES: [&[usize]; 4] = [&[37, 4], &[37, 4, 35, 26, 20], &[35, 10, 36, 37, 4], &[10, 20, 26]];

/// Minimum control set and its size.
pub const LAMBDA_STAR: [usize; 11] = [10, 26, 37, 4, 15, 12, 25, 7, 29, 32, 33];
pub const N_STAR: usize = 11;

/// The largest aggregation block (state-node indices, then generators).
pub const BLOCK_N1_STATES: [usize; 26] =
    [38, 36, 10, 20, 31, 35, 26, 37, 4, 19, 11, 34, 15, 12, 27, 25, 14, 29, 30, 7, 2, 33, 24, 13, 3, 22];
pub const BLOCK_N1_GENERATORS: [usize; 3] = [1, 2, 3];

/// Reduction-rule membership stated for block N₁.
pub const N1_FORCED: [usize; 9] = [12, 7, 30, 33, 29, 37, 15, 25, 4];
pub const N1_EXCLUDED: [usize; 13] = [2, 3, 22, 11, 34, 35, 38, 14, 24, 13, 27, 31, 19];

/// Local subsystem of block N₁: vertex order and adjacency (`a[i][j] = 1`
/// for an edge from local vertex i to local vertex j).
pub const LOCAL_ORDER: [usize; 6] = [10, 20, 26, 35, 36, 38];
pub const LOCAL_ADJACENCY: [[u8; 6]; 6] = [
    [0, 0, 1, 0, 1, 0],
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [1, 0, 1, 0, 1, 0],
    [0, 0, 0, 0, 0, 0],
    [1, 1, 0, 0, 0, 0],
];
/// Membership of the local cycle {v10, v26, v20}.
pub const LOCAL_CYCLE: [u8; 6] = [1, 1, 1, 0, 0, 0];

pub const J1_MBAR: [u32; 64] = [
    0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 2, 2, 1, 1, 2, 2, //
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 1, 1, 2, 2, //
    1, 1, 2, 2, 1, 1, 2, 2, 2, 2, 3, 3, 2, 2, 3, 3, //
    2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2,
];
pub const J1_MTILDE: [u32; 64] = [
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, //
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, //
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, //
    1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0,
];
/// 1-based canonical indices of the local feasible set.
pub const ZETA1: [usize; 20] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 13, 14, 17, 26, 29, 30, 33, 34, 37, 38];
/// Index said to carry the minimal selection, and that selection.
pub const ZETA1_OPTIMUM_INDEX: usize = 30;
pub const ZETA1_OPTIMUM_SIGMA: [bool; 6] = [true, false, true, false, false, false];

/// Edges removed to break every cycle.
pub const GAMMA1_EDGES: [(usize, usize); 4] = [(4, 37), (20, 37), (36, 37), (20, 10)];
pub const GAMMA1: [usize; 2] = [10, 37];
pub const ODOT_TWO: [usize; 5] = [10, 26, 15, 25, 30];
pub const ODOT_ONE: [usize; 13] = [20, 36, 4, 19, 37, 9, 32, 27, 29, 33, 13, 7, 14];
pub const GAMMA2: [usize; 9] = [10, 26, 15, 25, 30, 9, 27, 13, 7];
pub const GAMMA3: [usize; 10] = [10, 26, 15, 4, 30, 9, 27, 13, 7, 37];
pub const GAMMA: [usize; 11] = [10, 15, 25, 37, 30, 9, 27, 13, 7, 26, 4];
pub const GAMMA_PERCENT: f64 = 29.73;

/// Retained in-neighbours of x25 and the injected `A₂₅` over them.
pub const RETAINED_25: [usize; 4] = [15, 27, 31, 34];
pub const A25: [usize; 16] = [2, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2];
pub const L_F25: [usize; 32] = [
    1, 2, 2, 2, 1, 2, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, //
    1, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2,
];
pub const F25: [usize; 32] = [
    2, 2, 2, 2, 1, 2, 1, 2, 2, 2, 2, 2, 2, 2, 2, 2, //
    2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2, 2,
];
/// `g₂₅ = x15 ∧ x27 ∧ ¬x31 ∧ x34` (coupled by ∧).
pub const G25_POSITIVE: [usize; 3] = [15, 27, 34];
pub const G25_NEGATIVE: [usize; 1] = [31];

/// Mode used for global stabilization, its pinned node and feedback.
pub const STEP1_MODE: usize = 1;
pub const STEP1_GAMMA: [usize; 1] = [26];
/// `g = ¬x35`, coupled by ∧, removes the x10 dependency from f26.
pub const STEP1_FEEDBACK_ARG: usize = 35;
/// Nodes true in the unique attractor of the stabilized mode (37 nodes).
pub const STEP1_ATTRACTOR: [usize; 2] = [16, 26];
/// Nodes true in the stabilization target.
pub const TARGET: [usize; 3] = [13, 15, 16];
/// Intermediate state of the two-step trajectory.
pub const STEP2_INTERMEDIATE: [usize; 2] = [4, 16];
/// Inputs (u1, u2, u3, ũ4, ũ7, ũ9, ũ10, ũ13, ũ15, ũ26, ũ27, ũ30, ũ37)
/// switched on at each step of the trajectory.
pub const STEP2_INPUT_NODES: [&str; 13] =
    ["u1", "u2", "u3", "x4", "x7", "x9", "x10", "x13", "x15", "x26", "x27", "x30", "x37"];
pub const STEP2_INPUTS_ON: [&[usize]; 2] = [&[1, 2, 3, 4], &[8, 9]];

/// Constant value used for inputs the literature leaves unspecified and for
/// the auxiliary node in 37-node state vectors.
pub const DEFAULT_INPUT: bool = true;

/// A full 38-node assignment with exactly the given nodes true, plus x38
/// set to `DEFAULT_INPUT`.
pub fn assignment(true_nodes: &[usize]) -> Vec<bool> {
    (1..=38).map(|k| if k == TCELL_AUXILIARY { DEFAULT_INPUT } else { true_nodes.contains(&k) }).collect()
}

/// `A₂₅` as a function of `RETAINED_25` (in that order).
pub fn a25() -> BooleanFunction {
    let m = LogicalMatrix::from_delta(2, &A25).expect("16 columns over δ₂");
    BooleanFunction::from_structure_matrix(&m).expect("structure matrix")
}

/// Pinning options with the listed cycle-breaking edges as seed.
pub fn reference_pinning_options() -> PinningOptions {
    PinningOptions {
        gamma1_seed: GAMMA1_EDGES.iter().map(|&(a, b)| (NodeId::state(a), NodeId::state(b))).collect(),
        ..PinningOptions::default()
    }
}

/// Pinning with the listed choices injected. `A₂₅` is only injected when
/// the computed retained set of x25 is `RETAINED_25`; otherwise a warning
/// says why it was left out.
pub fn reference_pinning(net: &BooleanNetwork) -> Result<(PinningPlan, Vec<String>)> {
    let mut opts = reference_pinning_options();
    let plan = design_pinning(net, &opts)?;
    let x25 = NodeId::state(25);
    let retained: Option<Vec<usize>> = plan.node(x25).map(|p| p.retained.iter().map(|r| r.index).collect());
    match retained {
        Some(r) if r == RETAINED_25 => {
            opts.a_overrides = vec![(x25, a25())];
            Ok((design_pinning(net, &opts)?, vec![]))
        }
        Some(r) => Ok((plan, vec![format!("A25 not injected: retained in-neighbours of x25 are {r:?}, not {RETAINED_25:?}")])),
        None => Ok((plan, vec!["A25 not injected: x25 is not pinned".into()])),
    }
}

/// Mode choices and the x10 → x26 cut of the stabilization example.
pub fn reference_stabilize_options() -> StabilizeOptions {
    StabilizeOptions {
        step1_mode: Some(STEP1_MODE),
        step2_mode: Some(0),
        step1_seed: vec![(NodeId::state(10), NodeId::state(26))],
        input_default: DEFAULT_INPUT,
        ..StabilizeOptions::default()
    }
}
